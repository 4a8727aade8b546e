//! Canonical labeling by partition refinement and individualization.
//!
//! An ordered partition of the vertices is refined until equitable (every
//! vertex of a cell has the same number of neighbors in each cell). A
//! non-singleton target cell is then split by individualizing each of its
//! vertices in turn, and the search recurses. Every leaf is a discrete
//! partition, i.e. a labeling; the certificate is the least adjacency
//! encoding over all leaves.
//!
//! Pruning:
//! - twins (equal initial color, equal neighborhood) are swapped by an
//!   automorphism fixing everything else, so only one is individualized;
//! - each refinement emits a trace of split events; leaves are compared by
//!   (traces along the path, encoding), and a refinement whose trace runs
//!   above the best leaf's at the same depth is abandoned mid-way;
//! - a leaf equal to the first or the best leaf yields an automorphism, and
//!   the search jumps back to where the two paths split;
//! - children in one orbit of the automorphisms found so far that fix the
//!   current path are explored once.

use std::collections::{HashMap, VecDeque};

use super::graph::IncidenceGraph;

/// Totally ordered isomorphism-class key for a colored graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCertificate(Vec<u8>);

impl CanonicalCertificate {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// Ordered partition. Cells are contiguous runs of `lab`, named by their
/// start index, so a vertex's cell start is its color.
#[derive(Clone)]
struct Partition {
    lab: Vec<u32>,
    cell: Vec<u32>,
    /// end (exclusive) of the cell starting at each index
    end: Vec<u32>,
    cells: usize,
}

impl Partition {
    fn from_colors(colors: &[u32]) -> Self {
        let n = colors.len();
        let mut lab: Vec<u32> = (0..n as u32).collect();
        lab.sort_by_key(|&v| colors[v as usize]);
        let mut cell = vec![0u32; n];
        let mut end = vec![0u32; n];
        let mut cells = 0;
        let mut i = 0;
        while i < n {
            let c = colors[lab[i] as usize];
            let mut j = i;
            while j < n && colors[lab[j] as usize] == c {
                cell[lab[j] as usize] = i as u32;
                j += 1;
            }
            end[i] = j as u32;
            cells += 1;
            i = j;
        }
        Partition {
            lab,
            cell,
            end,
            cells,
        }
    }

    fn starts(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.lab.len();
        let mut i = 0;
        std::iter::from_fn(move || {
            (i < n).then(|| {
                let s = i;
                i = self.end[s] as usize;
                s
            })
        })
    }

    fn is_discrete(&self) -> bool {
        self.cells == self.lab.len()
    }

    /// Moves `v` into a singleton cell at the front of its cell; returns the
    /// singleton's start.
    fn individualize(&mut self, v: u32) -> usize {
        let s = self.cell[v as usize] as usize;
        let e = self.end[s];
        let at = self.lab[s..e as usize]
            .iter()
            .position(|&u| u == v)
            .expect("vertex in its cell")
            + s;
        self.lab.swap(s, at);
        self.end[s] = s as u32 + 1;
        self.end[s + 1] = e;
        for i in s + 1..e as usize {
            self.cell[self.lab[i] as usize] = s as u32 + 1;
        }
        self.cells += 1;
        s
    }
}

struct Leaf {
    path: Vec<u32>,
    trace: Vec<Vec<u64>>,
    labels: Vec<u32>,
    enc: Vec<u64>,
}

struct Canonizer<'g> {
    g: &'g IncidenceGraph,
    twin: Vec<u32>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<u32>>,
    path: Vec<u32>,
    trace: Vec<Vec<u64>>,
    leaves: u64,
    // refinement scratch
    count: Vec<u32>,
    touched: Vec<u32>,
    queued: Vec<bool>,
}

impl<'g> Canonizer<'g> {
    fn new(g: &'g IncidenceGraph, initial: &[u32]) -> Self {
        let mut classes: HashMap<(u32, &[u32]), u32> = HashMap::new();
        let twin = (0..g.vertex_count())
            .map(|v| {
                let next = classes.len() as u32;
                *classes.entry((initial[v], g.neighbors(v))).or_insert(next)
            })
            .collect();
        let n = g.vertex_count();
        Canonizer {
            g,
            twin,
            first: None,
            best: None,
            generators: Vec::new(),
            path: Vec::new(),
            trace: Vec::new(),
            leaves: 0,
            count: vec![0; n],
            touched: Vec::new(),
            queued: vec![false; n],
        }
    }

    /// Refines `p` until equitable, starting from the splitter cells in
    /// `queue`. Touched cells are split by neighbor count in ascending count
    /// order and processed in ascending position, so the result depends
    /// only on the partition's structure.
    ///
    /// Returns the split events, or `None` once they exceed `bound`.
    fn refine(
        &mut self,
        p: &mut Partition,
        mut queue: VecDeque<usize>,
        bound: Option<&[u64]>,
    ) -> Option<Vec<u64>> {
        let mut events = Vec::new();
        let mut tied = bound.is_some();
        let bound = bound.unwrap_or(&[]);
        for &s in &queue {
            self.queued[s] = true;
        }
        let mut cells_hit: Vec<usize> = Vec::new();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        while let Some(ws) = queue.pop_front() {
            self.queued[ws] = false;
            let we = p.end[ws] as usize;
            for i in ws..we {
                for &u in self.g.neighbors(p.lab[i] as usize) {
                    if self.count[u as usize] == 0 {
                        self.touched.push(u);
                    }
                    self.count[u as usize] += 1;
                }
            }
            cells_hit.clear();
            cells_hit.extend(self.touched.iter().map(|&u| p.cell[u as usize] as usize));
            cells_hit.sort_unstable();
            cells_hit.dedup();
            for &s in &cells_hit {
                let e = p.end[s] as usize;
                if e - s == 1 {
                    continue;
                }
                let count = &self.count;
                p.lab[s..e].sort_unstable_by_key(|&v| count[v as usize]);
                runs.clear();
                let mut i = s;
                while i < e {
                    let c = count[p.lab[i] as usize];
                    let mut j = i + 1;
                    while j < e && count[p.lab[j] as usize] == c {
                        j += 1;
                    }
                    runs.push((i, j));
                    i = j;
                }
                if runs.len() == 1 {
                    continue;
                }
                let mut h = Trace::default();
                h.mix(ws as u64);
                h.mix(s as u64);
                for &(a, _) in &runs {
                    h.mix(a as u64);
                    h.mix(count[p.lab[a] as usize] as u64);
                }
                if tied {
                    match bound.get(events.len()) {
                        Some(&b) if h.0 < b => tied = false,
                        Some(&b) if h.0 == b => {}
                        _ => {
                            for &u in &self.touched {
                                self.count[u as usize] = 0;
                            }
                            self.touched.clear();
                            for &q in &queue {
                                self.queued[q] = false;
                            }
                            return None;
                        }
                    }
                }
                events.push(h.0);
                for &(a, b) in &runs {
                    p.end[a] = b as u32;
                    for k in a..b {
                        p.cell[p.lab[k] as usize] = a as u32;
                    }
                }
                p.cells += runs.len() - 1;
                let largest = if self.queued[s] {
                    usize::MAX
                } else {
                    let mut li = 0;
                    for (k, &(a, b)) in runs.iter().enumerate() {
                        if b - a > runs[li].1 - runs[li].0 {
                            li = k;
                        }
                    }
                    li
                };
                for (k, &(a, _)) in runs.iter().enumerate() {
                    if k != largest && !self.queued[a] {
                        self.queued[a] = true;
                        queue.push_back(a);
                    }
                }
            }
            for &u in &self.touched {
                self.count[u as usize] = 0;
            }
            self.touched.clear();
        }
        events.push(p.cells as u64);
        if tied && events[..] > bound[..] {
            return None;
        }
        Some(events)
    }

    /// Explores the node for `p`, refined from `queue`. `Some(d)` asks every
    /// ancestor deeper than `d` to return at once.
    fn search(&mut self, mut p: Partition, queue: VecDeque<usize>) -> Option<usize> {
        let d = self.trace.len();
        // only a node tied with the best leaf so far can be cut
        let best = self.best.take();
        let bound = best
            .as_ref()
            .filter(|b| b.trace.len() > d && b.trace[..d] == self.trace[..])
            .map(|b| &b.trace[d][..]);
        let t = self.refine(&mut p, queue, bound);
        self.best = best;
        self.trace.push(t?);
        let out = self.node(p);
        self.trace.pop();
        out
    }

    fn node(&mut self, p: Partition) -> Option<usize> {
        if p.is_discrete() {
            return self.leaf(&p.cell);
        }
        let depth = self.path.len();
        // first largest non-singleton cell
        let mut target = 0;
        let mut target_size = 1;
        for s in p.starts() {
            let size = p.end[s] as usize - s;
            if size > target_size {
                target = s;
                target_size = size;
            }
        }
        let mut members: Vec<u32> = p.lab[target..target + target_size].to_vec();
        members.sort_unstable();

        let mut seen_twins: Vec<u32> = Vec::new();
        let mut explored: Vec<u32> = Vec::new();
        for v in members {
            if seen_twins.contains(&self.twin[v as usize]) {
                continue;
            }
            if !explored.is_empty() && !self.generators.is_empty() {
                let orbit = self.stabilizer_orbits();
                let root = find(&orbit, v as usize);
                if explored.iter().any(|&e| find(&orbit, e as usize) == root) {
                    continue;
                }
            }
            seen_twins.push(self.twin[v as usize]);
            explored.push(v);
            let mut child = p.clone();
            let s = child.individualize(v);
            self.path.push(v);
            let jump = self.search(child, VecDeque::from([s]));
            self.path.pop();
            if let Some(d) = jump {
                if d < depth {
                    return Some(d);
                }
            }
        }
        None
    }

    /// Union-find parents for the orbits of the generators that fix the
    /// current path.
    fn stabilizer_orbits(&self) -> Vec<usize> {
        let n = self.g.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        for g in &self.generators {
            if self.path.iter().any(|&v| g[v as usize] != v) {
                continue;
            }
            for (v, &w) in g.iter().enumerate() {
                let (a, b) = (find(&parent, v), find(&parent, w as usize));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        parent
    }

    fn leaf(&mut self, labels: &[u32]) -> Option<usize> {
        self.leaves += 1;
        let enc = encode(self.g, labels);
        let trace = &self.trace;
        let leaf = |path: &[u32], enc: Vec<u64>| Leaf {
            path: path.to_vec(),
            trace: trace.clone(),
            labels: labels.to_vec(),
            enc,
        };
        let Some(first) = &self.first else {
            self.best = Some(leaf(&self.path, enc.clone()));
            self.first = Some(leaf(&self.path, enc));
            return None;
        };
        let best = self.best.as_ref().expect("best leaf");
        let same = if first.trace == self.trace && first.enc == enc {
            Some(first)
        } else if best.trace == self.trace && best.enc == enc {
            Some(best)
        } else {
            None
        };
        if let Some(other) = same {
            // v goes to the vertex carrying the same label in `other`
            let mut by_label = vec![0u32; labels.len()];
            for (u, &l) in other.labels.iter().enumerate() {
                by_label[l as usize] = u as u32;
            }
            let gamma: Vec<u32> = labels.iter().map(|&l| by_label[l as usize]).collect();
            let split = other
                .path
                .iter()
                .zip(&self.path)
                .take_while(|(a, b)| a == b)
                .count();
            self.generators.push(gamma);
            return Some(split);
        }
        if (&self.trace, &enc) < (&best.trace, &best.enc) {
            self.best = Some(leaf(&self.path, enc));
        }
        None
    }
}

/// Order-sensitive 64-bit mix.
#[derive(Default)]
struct Trace(u64);

impl Trace {
    fn mix(&mut self, x: u64) {
        self.0 = (self.0 ^ x)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(29);
    }
}

fn find(parent: &[usize], mut v: usize) -> usize {
    while parent[v] != v {
        v = parent[v];
    }
    v
}

fn count_classes(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Upper-triangular adjacency bitstring of the relabeled graph, most
/// significant bit first, so that `Vec<u64>` order is bitstring order.
fn encode(g: &IncidenceGraph, labels: &[u32]) -> Vec<u64> {
    let n = labels.len();
    let bits = n * n.saturating_sub(1) / 2;
    let mut words = vec![0u64; bits.div_ceil(64)];
    for v in 0..n {
        for &u in g.neighbors(v) {
            let (a, b) = (labels[v] as usize, labels[u as usize] as usize);
            if a < b {
                let idx = a * n - a * (a + 1) / 2 + (b - a - 1);
                words[idx / 64] |= 1u64 << (63 - idx % 64);
            }
        }
    }
    words
}

/// Canonical certificate of a colored incidence graph.
pub fn canonical_form(g: &IncidenceGraph) -> CanonicalCertificate {
    canonical_form_with_stats(g).0
}

/// Certificate plus the number of leaves visited.
pub fn canonical_form_with_stats(g: &IncidenceGraph) -> (CanonicalCertificate, u64) {
    let initial = g.initial_colors();
    let mut canon = Canonizer::new(g, &initial);
    let p = Partition::from_colors(&initial);
    let queue: VecDeque<usize> = p.starts().collect();
    canon.search(p, queue);
    let best = canon.best.take().expect("search reaches a leaf");

    let mut class_sizes = vec![0u32; count_classes(&initial)];
    for &c in &initial {
        class_sizes[c as usize] += 1;
    }
    let mut bytes = Vec::with_capacity(8 + 4 * class_sizes.len() + 8 * best.enc.len());
    bytes.extend_from_slice(&(g.vertex_count() as u32).to_be_bytes());
    bytes.extend_from_slice(&(class_sizes.len() as u32).to_be_bytes());
    for s in class_sizes {
        bytes.extend_from_slice(&s.to_be_bytes());
    }
    for level in &best.trace {
        bytes.extend_from_slice(&(level.len() as u32).to_be_bytes());
        for t in level {
            bytes.extend_from_slice(&t.to_be_bytes());
        }
    }
    for w in best.enc {
        bytes.extend_from_slice(&w.to_be_bytes());
    }
    (CanonicalCertificate(bytes), canon.leaves)
}
