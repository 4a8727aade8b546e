//! Depth-first extension over a candidate list.
//!
//! At each node: if the terminating predicate holds, record the plane when
//! the recording predicate allows it; otherwise try each remaining candidate
//! `L` in ascending order, keep the candidates that meet `L` in exactly one
//! point, apply the checks and recurse.

use std::sync::atomic::{AtomicU64, Ordering};

use super::config::{Recording, SearchConfig, Termination};
use crate::plane::{lex_less_bits, Order, PartialPlane};

/// Counters shared by all workers of a run.
#[derive(Debug, Default)]
pub struct SearchStats {
    pub nodes: AtomicU64,
    pub recorded: AtomicU64,
}

impl SearchStats {
    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn recorded(&self) -> u64 {
        self.recorded.load(Ordering::Relaxed)
    }
}

/// Receives terminal planes.
pub(crate) trait Sink {
    fn accept(&mut self, order: Order, lines: &[u128]);
}

impl Sink for Vec<PartialPlane> {
    fn accept(&mut self, order: Order, lines: &[u128]) {
        self.push(PartialPlane::from_sorted_bits(order, lines.iter().copied()));
    }
}

/// The configuration flattened for the inner loop.
pub(crate) struct Compiled {
    order: Order,
    termination: Termination,
    targets: Vec<(usize, u8)>,
    chain: Vec<usize>,
    contiguity: bool,
    lex: bool,
    caps: [u8; 128],
    /// Keep candidates below the just-added line in child lists. Needed
    /// when termination asks for an empty list; otherwise they are dead.
    keep_smaller: bool,
}

impl Compiled {
    pub(crate) fn new(order: Order, cfg: &SearchConfig) -> Self {
        let targets = match &cfg.termination {
            Termination::AppearanceTarget(t) => t.iter().map(|&(p, c)| (p, c as u8)).collect(),
            _ => Vec::new(),
        };
        let chain = match &cfg.recording {
            Recording::Always => Vec::new(),
            Recording::MonotoneAppearance(c) => c.clone(),
        };
        let lex = cfg.checks.lexicographic;
        Compiled {
            order,
            termination: cfg.termination.clone(),
            targets,
            chain,
            contiguity: cfg.checks.point_contiguity,
            lex,
            caps: cfg
                .checks
                .appearance_caps
                .as_ref()
                .map_or([u8::MAX; 128], |c| c.table()),
            keep_smaller: !lex || cfg.termination == Termination::ListEmpty,
        }
    }
}

#[derive(Clone)]
pub(crate) struct Engine<'a> {
    cfg: &'a Compiled,
    lines: Vec<u128>,
    added: Vec<u128>,
    counts: [u8; 128],
    appeared: u128,
    at_cap: u128,
    bufs: Vec<Vec<u128>>,
    pending_nodes: u64,
    stats: Option<&'a SearchStats>,
}

const FLUSH_EVERY: u64 = 1 << 12;

impl<'a> Engine<'a> {
    pub(crate) fn new(
        cfg: &'a Compiled,
        start: &PartialPlane,
        stats: Option<&'a SearchStats>,
    ) -> Self {
        let lines: Vec<u128> = start.lines().iter().map(|l| l.bits()).collect();
        let mut counts = [0u8; 128];
        let mut appeared = 0u128;
        for &l in &lines {
            appeared |= l;
            for p in crate::plane::PointSet(l).iter() {
                counts[p] += 1;
            }
        }
        let mut at_cap = 0u128;
        for p in 0..128 {
            if counts[p] >= cfg.caps[p] {
                at_cap |= 1 << p;
            }
        }
        Engine {
            cfg,
            lines,
            added: Vec::new(),
            counts,
            appeared,
            at_cap,
            bufs: Vec::new(),
            pending_nodes: 0,
            stats,
        }
    }

    fn push(&mut self, l: u128) {
        self.lines.push(l);
        self.added.push(l);
        let mut rest = l;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            self.counts[p] += 1;
            if self.counts[p] >= self.cfg.caps[p] {
                self.at_cap |= 1 << p;
            }
        }
        self.appeared |= l;
    }

    fn pop(&mut self, l: u128) {
        self.lines.pop();
        self.added.pop();
        let mut rest = l;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            self.counts[p] -= 1;
            if self.counts[p] == 0 {
                self.appeared &= !(1 << p);
            }
            if self.counts[p] < self.cfg.caps[p] {
                self.at_cap &= !(1 << p);
            }
        }
    }

    fn terminal(&self, rl: &[u128]) -> bool {
        match &self.cfg.termination {
            Termination::ListEmpty => rl.is_empty(),
            Termination::TargetSize(t) => self.lines.len() == *t,
            Termination::AppearanceTarget(_) => {
                self.cfg.targets.iter().all(|&(p, c)| self.counts[p] == c)
            }
        }
    }

    fn recordable(&self) -> bool {
        self.cfg
            .chain
            .windows(2)
            .all(|w| self.counts[w[0]] >= self.counts[w[1]])
    }

    /// Index of the first candidate that may still be added.
    fn first_open(&self, rl: &[u128]) -> usize {
        match (self.cfg.lex, self.added.last()) {
            (true, Some(&last)) => rl.partition_point(|&m| !lex_less_bits(last, m)),
            _ => 0,
        }
    }

    fn passes_checks(&self, l: u128) -> bool {
        if l & self.at_cap != 0 {
            return false;
        }
        if self.cfg.contiguity {
            let a = self.appeared | l;
            if a & a.wrapping_add(1) != 0 {
                return false;
            }
        }
        true
    }

    /// Admissible bound: can the terminating predicate still be reached
    /// with the candidates that remain addable?
    fn reachable(&self, child: &[u128]) -> bool {
        let open = &child[self.first_open(child)..];
        match &self.cfg.termination {
            Termination::ListEmpty => true,
            Termination::TargetSize(t) => {
                self.lines.len() <= *t && self.lines.len() + open.len() >= *t
            }
            Termination::AppearanceTarget(_) => self.cfg.targets.iter().all(|&(p, c)| {
                let have = self.counts[p];
                if have > c {
                    return false;
                }
                let need = (c - have) as usize;
                need == 0 || open.iter().filter(|&&m| m >> p & 1 == 1).take(need).count() == need
            }),
        }
    }

    fn tick(&mut self) {
        self.pending_nodes += 1;
        if self.pending_nodes == FLUSH_EVERY {
            self.flush();
        }
    }

    pub(crate) fn flush(&mut self) {
        if let Some(s) = self.stats {
            s.nodes.fetch_add(self.pending_nodes, Ordering::Relaxed);
        }
        self.pending_nodes = 0;
    }

    fn record<S: Sink>(&self, sink: &mut S) {
        if let Some(s) = self.stats {
            s.recorded.fetch_add(1, Ordering::Relaxed);
        }
        sink.accept(self.cfg.order, &self.lines);
    }

    /// Visits the node for the current plane with remaining list `rl`.
    pub(crate) fn node<S: Sink>(&mut self, rl: &[u128], depth: usize, sink: &mut S) {
        self.tick();
        if self.terminal(rl) {
            if self.recordable() {
                self.record(sink);
            }
            return;
        }
        for i in self.first_open(rl)..rl.len() {
            self.branch(rl, i, depth, sink);
        }
    }

    /// Adds `rl[i]` and explores below it.
    pub(crate) fn branch<S: Sink>(&mut self, rl: &[u128], i: usize, depth: usize, sink: &mut S) {
        let l = rl[i];
        if !self.passes_checks(l) {
            return;
        }
        if self.bufs.len() <= depth {
            self.bufs.resize_with(depth + 1, Vec::new);
        }
        let mut child = std::mem::take(&mut self.bufs[depth]);
        child.clear();
        let src = if self.cfg.keep_smaller {
            rl
        } else {
            &rl[i + 1..]
        };
        child.extend(src.iter().copied().filter(|&m| (m & l).count_ones() == 1));
        self.push(l);
        if self.reachable(&child) {
            self.node(&child, depth + 1, sink);
        }
        self.pop(l);
        self.bufs[depth] = child;
    }

    /// Whether the root itself is terminal; records it if so.
    pub(crate) fn root<S: Sink>(&mut self, rl: &[u128], sink: &mut S) -> bool {
        self.tick();
        if self.terminal(rl) {
            if self.recordable() {
                self.record(sink);
            }
            return true;
        }
        false
    }

    pub(crate) fn root_branches(&self, rl: &[u128]) -> std::ops::Range<usize> {
        self.first_open(rl)..rl.len()
    }
}
