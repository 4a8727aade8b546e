//! Depth-first extension of planes and the phase runner built on it.
//!
//! Top-level branches of each search are independent and run on the rayon
//! pool; their results are merged in branch order, so output never depends
//! on the number of workers.

mod config;
mod engine;

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;

pub use config::{Checks, PhaseSpec, Recording, SearchConfig, Termination};
pub use engine::SearchStats;

use engine::{Compiled, Engine, Sink};

use crate::error::{Error, Result};
use crate::iso::{dedupe, plane_certificate, CanonicalCertificate};
use crate::lines::{enumerate_compatible_lines, is_saturated, LineConstraints};
use crate::plane::{Line, Order, PartialPlane, PointSet};

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    pub stats: Option<Arc<SearchStats>>,
}

impl RunOptions {
    pub fn workers(n: usize) -> Self {
        RunOptions {
            workers: Some(n),
            stats: None,
        }
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(f()),
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w.max(1))
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// Keeps the first plane seen per certificate.
struct DedupeSink {
    marked: Option<PointSet>,
    seen: HashSet<CanonicalCertificate>,
    items: Vec<(CanonicalCertificate, PartialPlane)>,
}

impl DedupeSink {
    fn new(marked: Option<PointSet>) -> Self {
        DedupeSink {
            marked,
            seen: HashSet::new(),
            items: Vec::new(),
        }
    }

    fn push(&mut self, p: PartialPlane) {
        let cert = plane_certificate(&p, self.marked).expect("marked points validated");
        if self.seen.insert(cert.clone()) {
            self.items.push((cert, p));
        }
    }

    fn absorb(&mut self, other: DedupeSink) {
        for (cert, p) in other.items {
            if self.seen.insert(cert.clone()) {
                self.items.push((cert, p));
            }
        }
    }

    fn into_sorted(mut self) -> Vec<PartialPlane> {
        self.items.sort_by(|a, b| a.0.cmp(&b.0));
        self.items.into_iter().map(|(_, p)| p).collect()
    }
}

impl Sink for DedupeSink {
    fn accept(&mut self, order: Order, lines: &[u128]) {
        self.push(PartialPlane::from_sorted_bits(order, lines.iter().copied()));
    }
}

enum Work {
    /// The start itself is terminal.
    Root(usize),
    Branch(usize, usize),
}

/// Runs every (start, candidate list) pair, splitting at the top level.
fn explore<S, F>(
    starts: &[PartialPlane],
    lists: &[Vec<u128>],
    cfg: &Compiled,
    stats: Option<&SearchStats>,
    new_sink: F,
) -> Vec<S>
where
    S: Sink + Send,
    F: Fn() -> S + Sync,
{
    let mut work = Vec::new();
    for (k, (start, rl)) in starts.iter().zip(lists).enumerate() {
        let mut probe = Engine::new(cfg, start, None);
        let mut scratch = new_sink();
        if probe.root(rl, &mut scratch) {
            work.push(Work::Root(k));
        } else {
            work.extend(probe.root_branches(rl).map(|i| Work::Branch(k, i)));
        }
    }
    work.into_par_iter()
        .map(|w| {
            let mut sink = new_sink();
            match w {
                Work::Root(k) => {
                    let mut e = Engine::new(cfg, &starts[k], stats);
                    e.root(&lists[k], &mut sink);
                    e.flush();
                }
                Work::Branch(k, i) => {
                    let mut e = Engine::new(cfg, &starts[k], stats);
                    e.branch(&lists[k], i, 0, &mut sink);
                    e.flush();
                }
            }
            sink
        })
        .collect()
}

fn check_same_order(ps: &[PartialPlane]) -> Result<Option<Order>> {
    let Some(first) = ps.first() else {
        return Ok(None);
    };
    for p in ps {
        if p.order() != first.order() {
            return Err(Error::invalid("inputs of different orders"));
        }
    }
    Ok(Some(first.order()))
}

fn require_pure(p: &PartialPlane, what: &str) -> Result<()> {
    match p.defect() {
        None => Ok(()),
        Some(d) => Err(Error::invalid(format!("{what} is not pure: {d:?}"))),
    }
}

/// All planes recorded by a depth-first extension of `start` over
/// `candidates`, in traversal order and without isomorph rejection.
pub fn dfs_extend(
    start: &PartialPlane,
    candidates: &[Line],
    config: &SearchConfig,
) -> Result<Vec<PartialPlane>> {
    dfs_extend_with(start, candidates, config, &RunOptions::default())
}

pub fn dfs_extend_with(
    start: &PartialPlane,
    candidates: &[Line],
    config: &SearchConfig,
    opts: &RunOptions,
) -> Result<Vec<PartialPlane>> {
    require_pure(start, "starting plane")?;
    let order = start.order();
    config.validate(order, start)?;
    for c in candidates {
        if !c.fits(order) || start.lines().iter().any(|l| l.meet(*c) != 1) {
            return Err(Error::invalid(format!(
                "candidate {c:?} is not compatible with the starting plane"
            )));
        }
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let list: Vec<u128> = sorted.iter().map(|l| l.bits()).collect();
    let compiled = Compiled::new(order, config);
    let starts = std::slice::from_ref(start);
    let lists = [list];
    let parts: Vec<Vec<PartialPlane>> =
        opts.install(|| explore(starts, &lists, &compiled, opts.stats.as_deref(), Vec::new))?;
    Ok(parts.into_iter().flatten().collect())
}

/// One phase: for each input build its starting list from the phase's
/// candidate constraints, extend, and keep one plane per isomorphism class.
pub fn run_phase(inputs: &[PartialPlane], spec: &PhaseSpec) -> Result<Vec<PartialPlane>> {
    run_phase_with(inputs, spec, &RunOptions::default())
}

pub fn run_phase_with(
    inputs: &[PartialPlane],
    spec: &PhaseSpec,
    opts: &RunOptions,
) -> Result<Vec<PartialPlane>> {
    let Some(order) = check_same_order(inputs)? else {
        return Ok(Vec::new());
    };
    spec.candidate_constraints.validate(order)?;
    for (i, p) in inputs.iter().enumerate() {
        require_pure(p, &format!("input {i}"))?;
        spec.config.validate(order, p)?;
    }
    let compiled = Compiled::new(order, &spec.config);
    let marked = spec.config.marked_points;
    let constraints = &spec.candidate_constraints;
    opts.install(|| {
        let lists: Vec<Vec<u128>> = inputs
            .par_iter()
            .map(|p| {
                enumerate_compatible_lines(p, constraints)
                    .into_iter()
                    .map(|l| l.bits())
                    .collect()
            })
            .collect();
        let parts = explore(inputs, &lists, &compiled, opts.stats.as_deref(), || {
            DedupeSink::new(marked)
        });
        let mut merged = DedupeSink::new(marked);
        for part in parts {
            merged.absorb(part);
        }
        merged.into_sorted()
    })
}

/// Every saturated pure plane of order 2 or 3, one per isomorphism class.
///
/// Grows isomorphism classes one line at a time from the line `{0..n}`,
/// deduplicating at each size; a class with no compatible line is
/// saturated.
pub fn exhaustive_small_order(n: usize) -> Result<Vec<PartialPlane>> {
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!(
            "exhaustive search is limited to orders 2 and 3, got {n}"
        )));
    }
    let order = Order::new(n)?;
    let first = Line::new(0..=n)?;
    let mut frontier = vec![PartialPlane::new(order, vec![first])?];
    let mut saturated = Vec::new();
    while !frontier.is_empty() {
        let (done, grow): (Vec<_>, Vec<_>) = frontier.into_iter().partition(is_saturated);
        saturated.extend(done);
        let Some(size) = grow.first().map(PartialPlane::size) else {
            break;
        };
        let spec = PhaseSpec::new(
            SearchConfig::new(Termination::TargetSize(size + 1)),
            LineConstraints::none(),
        );
        frontier = run_phase(&grow, &spec)?;
    }
    dedupe(&saturated, None)
}

/// Single depth-first run from `{0..n}` over every compatible line with
/// list-empty termination, then deduplicated. Exponential; meant for
/// order 2 cross-checks.
pub fn exhaustive_by_dfs(n: usize, lexicographic: bool) -> Result<Vec<PartialPlane>> {
    let order = Order::new(n)?;
    let start = PartialPlane::new(order, vec![Line::new(0..=n)?])?;
    let candidates = enumerate_compatible_lines(&start, &LineConstraints::none());
    let mut cfg = SearchConfig::new(Termination::ListEmpty);
    cfg.checks.lexicographic = lexicographic;
    let raw = dfs_extend(&start, &candidates, &cfg)?;
    dedupe(&raw, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lines::AppearanceCaps;
    use crate::plane::tests::fano;
    use crate::plane::{appearance_profile, check_no_n_point};
    use crate::planes_isomorphic;

    fn two() -> Order {
        Order::new(2).unwrap()
    }

    fn single(n: usize) -> PartialPlane {
        PartialPlane::new(Order::new(n).unwrap(), vec![Line::new(0..=n).unwrap()]).unwrap()
    }

    #[test]
    fn empty_candidates_record_start() {
        let start = single(2);
        let out = dfs_extend(&start, &[], &SearchConfig::new(Termination::ListEmpty)).unwrap();
        assert_eq!(out, vec![start]);
    }

    #[test]
    fn incompatible_candidate_is_rejected() {
        let start = single(2);
        let bad = Line::new([3, 4, 5]).unwrap();
        let err = dfs_extend(&start, &[bad], &SearchConfig::new(Termination::ListEmpty));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn order_two_finds_fano() {
        let start = single(2);
        let cands = enumerate_compatible_lines(&start, &LineConstraints::none());
        let cfg = SearchConfig::new(Termination::ListEmpty).lexicographic();
        let raw = dfs_extend(&start, &cands, &cfg).unwrap();
        assert!(raw.iter().all(|p| p.is_pure() && is_saturated(p)));
        assert!(raw.iter().all(|p| p.contains_line(start.lines()[0])));
        let big: Vec<_> = raw.iter().filter(|p| p.size() == 7).collect();
        assert!(!big.is_empty());
        assert!(big
            .iter()
            .all(|p| planes_isomorphic(p, &fano(), None).unwrap()));
    }

    #[test]
    fn lexicographic_check_loses_no_classes() {
        let with = exhaustive_by_dfs(2, true).unwrap();
        let without = exhaustive_by_dfs(2, false).unwrap();
        assert_eq!(with.len(), without.len());
        for (a, b) in with.iter().zip(&without) {
            assert!(planes_isomorphic(a, b, None).unwrap());
        }
        let layered = exhaustive_small_order(2).unwrap();
        assert_eq!(layered.len(), with.len());
    }

    #[test]
    fn order_two_classes_have_a_triple_point() {
        let classes = exhaustive_small_order(2).unwrap();
        assert!(classes.iter().any(|p| p.size() == 7));
        assert_eq!(classes.iter().map(PartialPlane::size).max(), Some(7));
        for p in &classes {
            assert!(appearance_profile(p).max_count() >= 3);
            assert!(check_no_n_point(p));
        }
    }

    #[test]
    fn target_size_and_caps() {
        let start = single(2);
        let cands = enumerate_compatible_lines(&start, &LineConstraints::none());
        let cfg = SearchConfig::new(Termination::TargetSize(3))
            .lexicographic()
            .caps(AppearanceCaps::uniform(two().universe(), 2));
        let out = dfs_extend(&start, &cands, &cfg).unwrap();
        assert!(!out.is_empty());
        for p in &out {
            assert_eq!(p.size(), 3);
            assert!(appearance_profile(p).max_count() <= 2);
        }
    }

    #[test]
    fn appearance_target_stops_exactly() {
        let start = single(2);
        let cands = enumerate_compatible_lines(&start, &LineConstraints::none());
        let cfg =
            SearchConfig::new(Termination::AppearanceTarget(vec![(0, 3), (1, 2)])).lexicographic();
        let out = dfs_extend(&start, &cands, &cfg).unwrap();
        assert!(!out.is_empty());
        for p in &out {
            let prof = appearance_profile(p);
            assert_eq!((prof.count(0), prof.count(1)), (3, 2));
        }
    }

    #[test]
    fn monotone_recording_filters() {
        let start = PartialPlane::from_rows(two(), &[&[0, 1, 2], &[0, 3, 4]]).unwrap();
        let cands = enumerate_compatible_lines(&start, &LineConstraints::none());
        let plain = SearchConfig::new(Termination::TargetSize(3)).lexicographic();
        let mono = plain
            .clone()
            .recording(Recording::MonotoneAppearance(vec![1, 2]));
        let a = dfs_extend(&start, &cands, &plain).unwrap();
        let b = dfs_extend(&start, &cands, &mono).unwrap();
        assert!(b.len() < a.len());
        for p in &b {
            let prof = appearance_profile(p);
            assert!(prof.count(1) >= prof.count(2));
        }
        assert_eq!(
            dedupe(&a, None).unwrap().len(),
            dedupe(&b, None).unwrap().len()
        );
    }

    #[test]
    fn run_phase_passes_saturated_input_through() {
        let spec = PhaseSpec::new(
            SearchConfig::new(Termination::ListEmpty).lexicographic(),
            LineConstraints::none(),
        );
        assert_eq!(run_phase(&[fano()], &spec).unwrap(), vec![fano()]);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let start = single(3);
        let spec = PhaseSpec::new(
            SearchConfig::new(Termination::TargetSize(3)).lexicographic(),
            LineConstraints::none(),
        );
        let one = run_phase_with(&[start.clone()], &spec, &RunOptions::workers(1)).unwrap();
        let four = run_phase_with(&[start], &spec, &RunOptions::workers(4)).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn target_not_above_start_is_rejected() {
        let spec = PhaseSpec::new(
            SearchConfig::new(Termination::TargetSize(1)),
            LineConstraints::none(),
        );
        assert!(run_phase(&[single(2)], &spec).is_err());
    }

    #[test]
    fn unsupported_exhaustive_order() {
        assert!(matches!(
            exhaustive_small_order(4),
            Err(Error::Unsupported(_))
        ));
    }
}
