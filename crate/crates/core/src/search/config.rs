use crate::error::{Error, Result};
use crate::lines::{AppearanceCaps, LineConstraints};
use crate::plane::{Order, PartialPlane, PointSet};

/// When a branch stops growing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    /// No compatible candidate remains.
    ListEmpty,
    /// The plane has exactly this many lines.
    TargetSize(usize),
    /// Each listed point appears exactly the listed number of times.
    AppearanceTarget(Vec<(usize, usize)>),
}

/// Which terminal planes are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recording {
    Always,
    /// Appearance counts along the listed points are non-increasing.
    MonotoneAppearance(Vec<usize>),
}

/// Pruning checks applied to each extended plane.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Checks {
    /// If point `i` appears, so does point `i - 1`.
    pub point_contiguity: bool,
    /// Lines added in one run appear in ascending order.
    pub lexicographic: bool,
    /// No point exceeds its cap.
    pub appearance_caps: Option<AppearanceCaps>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub termination: Termination,
    pub recording: Recording,
    pub checks: Checks,
    /// Marked points for the isomorphism test applied to results.
    pub marked_points: Option<PointSet>,
}

impl SearchConfig {
    pub fn new(termination: Termination) -> Self {
        SearchConfig {
            termination,
            recording: Recording::Always,
            checks: Checks::default(),
            marked_points: None,
        }
    }

    pub fn lexicographic(mut self) -> Self {
        self.checks.lexicographic = true;
        self
    }

    pub fn contiguity(mut self) -> Self {
        self.checks.point_contiguity = true;
        self
    }

    pub fn caps(mut self, caps: AppearanceCaps) -> Self {
        self.checks.appearance_caps = Some(caps);
        self
    }

    pub fn recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }

    pub fn marked(mut self, points: PointSet) -> Self {
        self.marked_points = Some(points);
        self
    }

    pub(crate) fn validate(&self, order: Order, start: &PartialPlane) -> Result<()> {
        let universe = order.universe_size();
        match &self.termination {
            Termination::ListEmpty => {}
            Termination::TargetSize(t) => {
                if *t <= start.size() {
                    return Err(Error::invalid(format!(
                        "target size {t} does not exceed starting size {}",
                        start.size()
                    )));
                }
            }
            Termination::AppearanceTarget(targets) => {
                for &(p, c) in targets {
                    if p >= universe || c > order.points_per_line() {
                        return Err(Error::invalid(format!("bad appearance target ({p}, {c})")));
                    }
                }
            }
        }
        if let Recording::MonotoneAppearance(chain) = &self.recording {
            if chain.iter().any(|&p| p >= universe) {
                return Err(Error::invalid("monotone chain point outside universe"));
            }
        }
        if let Some(caps) = &self.checks.appearance_caps {
            caps.validate(order)?;
        }
        if let Some(m) = self.marked_points {
            if !m.is_subset(order.universe()) {
                return Err(Error::invalid("marked points outside universe"));
            }
        }
        Ok(())
    }
}

/// One search phase: how to build each input's starting list and how to
/// search from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpec {
    pub config: SearchConfig,
    pub candidate_constraints: LineConstraints,
}

impl PhaseSpec {
    pub fn new(config: SearchConfig, candidate_constraints: LineConstraints) -> Self {
        PhaseSpec {
            config,
            candidate_constraints,
        }
    }
}
