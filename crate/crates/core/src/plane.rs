//! Planes, lines and the counting identities every pure plane satisfies.
//!
//! Points are `0..n²+n+1`. A set of points is a `u128` bitmask, so orders up
//! to 10 are representable; the search code is tuned for `n <= 9`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest order whose universe fits in a [`PointSet`].
pub const MAX_ORDER: usize = 10;

/// Order `n` of a plane: lines have `n + 1` points drawn from `n² + n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order(usize);

impl Order {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::invalid(format!(
                "order must be in 1..={MAX_ORDER}, got {n}"
            )));
        }
        Ok(Order(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn points_per_line(self) -> usize {
        self.0 + 1
    }

    #[inline]
    pub fn universe_size(self) -> usize {
        self.0 * self.0 + self.0 + 1
    }

    /// Every point of the universe.
    pub fn universe(self) -> PointSet {
        PointSet::range(0, self.universe_size())
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A set of point identifiers below 128.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PointSet(pub u128);

impl PointSet {
    pub const EMPTY: PointSet = PointSet(0);

    /// Points `lo..hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        assert!(lo <= hi && hi <= 128);
        let upper = if hi == 128 {
            u128::MAX
        } else {
            (1u128 << hi) - 1
        };
        let lower = (1u128 << lo) - 1;
        PointSet(upper & !lower)
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(points: I) -> Result<Self> {
        let mut bits = 0u128;
        for p in points {
            if p >= 128 {
                return Err(Error::invalid(format!("point {p} out of range")));
            }
            bits |= 1 << p;
        }
        Ok(PointSet(bits))
    }

    #[inline]
    pub fn contains(self, p: usize) -> bool {
        p < 128 && self.0 >> p & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn insert(&mut self, p: usize) {
        self.0 |= 1 << p;
    }

    #[inline]
    pub fn union(self, other: PointSet) -> PointSet {
        PointSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: PointSet) -> PointSet {
        PointSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: PointSet) -> PointSet {
        PointSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: PointSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ascending iteration.
    pub fn iter(self) -> PointIter {
        PointIter(self.0)
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 127 - self.0.leading_zeros() as usize)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = PointSet::EMPTY;
        for p in iter {
            s.insert(p);
        }
        s
    }
}

pub struct PointIter(u128);

impl Iterator for PointIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for PointIter {}

/// A line: a set of points, written in ascending order.
///
/// Lines compare shortlex on their sorted point lists; for lines of one
/// plane (all the same length) this is plain elementwise comparison.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Line(PointSet);

impl Line {
    /// Builds a line from points in any order. Duplicates are rejected.
    pub fn new<I: IntoIterator<Item = usize>>(points: I) -> Result<Self> {
        let mut set = PointSet::EMPTY;
        let mut count = 0;
        for p in points {
            if p >= 128 {
                return Err(Error::invalid(format!("point {p} out of range")));
            }
            if set.contains(p) {
                return Err(Error::invalid(format!("point {p} repeated in line")));
            }
            set.insert(p);
            count += 1;
        }
        debug_assert_eq!(count, set.len());
        Ok(Line(set))
    }

    #[inline]
    pub(crate) fn from_bits(bits: u128) -> Self {
        Line(PointSet(bits))
    }

    #[inline]
    pub fn bits(self) -> u128 {
        self.0 .0
    }

    #[inline]
    pub fn points(self) -> PointSet {
        self.0
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.0.iter().collect()
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(self, p: usize) -> bool {
        self.0.contains(p)
    }

    /// Number of points shared with `other`.
    #[inline]
    pub fn meet(self, other: Line) -> usize {
        (self.bits() & other.bits()).count_ones() as usize
    }

    /// Whether the line is a valid line of a plane of order `n`.
    pub fn fits(self, order: Order) -> bool {
        self.len() == order.points_per_line()
            && self.0.max().is_some_and(|m| m < order.universe_size())
    }
}

/// Elementwise comparison of sorted point lists of equal length: the lower
/// set bit of the symmetric difference decides.
#[inline]
pub(crate) fn lex_less_bits(a: u128, b: u128) -> bool {
    let d = a ^ b;
    d != 0 && a & d & d.wrapping_neg() != 0
}

impl Ord for Line {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            if self.0 == other.0 {
                Ordering::Equal
            } else if lex_less_bits(self.bits(), other.bits()) {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Line {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in self.0.iter() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// True iff the two lines meet in exactly one point.
pub fn lines_compatible(order: Order, a: Line, b: Line) -> Result<bool> {
    for l in [a, b] {
        if !l.fits(order) {
            return Err(Error::invalid(format!(
                "line {l:?} is not a line of order {order}"
            )));
        }
    }
    Ok(a.meet(b) == 1)
}

/// Two lines of a plane that do not meet in exactly one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defect {
    /// Line `index` has the wrong length or an out-of-range point.
    Malformed { index: usize },
    /// Lines `first` and `second` share `shared != 1` points.
    Incompatible {
        first: usize,
        second: usize,
        shared: usize,
    },
}

/// An order plus a list of lines, kept in ascending order.
///
/// Construction through [`PartialPlane::new`] enforces purity;
/// [`PartialPlane::unchecked`] only sorts, and [`PartialPlane::defect`]
/// reports what is wrong.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialPlane {
    order: Order,
    lines: Vec<Line>,
}

impl PartialPlane {
    pub fn empty(order: Order) -> Self {
        PartialPlane {
            order,
            lines: Vec::new(),
        }
    }

    /// A pure plane; errors name the first offending pair.
    pub fn new(order: Order, lines: Vec<Line>) -> Result<Self> {
        let plane = Self::unchecked(order, lines);
        match plane.defect() {
            None => Ok(plane),
            Some(Defect::Malformed { index }) => Err(Error::invalid(format!(
                "line {:?} is not a line of order {order}",
                plane.lines[index]
            ))),
            Some(Defect::Incompatible {
                first,
                second,
                shared,
            }) => Err(Error::Structural {
                plane: 0,
                first,
                second,
                shared,
            }),
        }
    }

    pub fn unchecked(order: Order, mut lines: Vec<Line>) -> Self {
        lines.sort_unstable();
        PartialPlane { order, lines }
    }

    pub fn from_rows(order: Order, rows: &[&[usize]]) -> Result<Self> {
        let lines = rows
            .iter()
            .map(|r| Line::new(r.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(order, lines)
    }

    pub(crate) fn from_sorted_bits(order: Order, bits: impl IntoIterator<Item = u128>) -> Self {
        let mut lines: Vec<Line> = bits.into_iter().map(Line::from_bits).collect();
        lines.sort_unstable();
        PartialPlane { order, lines }
    }

    #[inline]
    pub fn order(&self) -> Order {
        self.order
    }

    #[inline]
    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    /// Number of lines.
    #[inline]
    pub fn size(&self) -> usize {
        self.lines.len()
    }

    pub fn contains_line(&self, line: Line) -> bool {
        self.lines.binary_search(&line).is_ok()
    }

    /// The plane with one more line; purity is not rechecked.
    pub fn with_line(&self, line: Line) -> Self {
        let mut lines = self.lines.clone();
        let at = lines.binary_search(&line).unwrap_or_else(|i| i);
        lines.insert(at, line);
        PartialPlane {
            order: self.order,
            lines,
        }
    }

    /// Points lying on at least one line.
    pub fn covered(&self) -> PointSet {
        self.lines
            .iter()
            .fold(PointSet::EMPTY, |acc, l| acc.union(l.points()))
    }

    /// First structural problem, scanning lines then pairs in order.
    pub fn defect(&self) -> Option<Defect> {
        if let Some(index) = self.lines.iter().position(|l| !l.fits(self.order)) {
            return Some(Defect::Malformed { index });
        }
        for (i, a) in self.lines.iter().enumerate() {
            for (j, b) in self.lines.iter().enumerate().skip(i + 1) {
                let shared = a.meet(*b);
                if shared != 1 {
                    return Some(Defect::Incompatible {
                        first: i,
                        second: j,
                        shared,
                    });
                }
            }
        }
        None
    }

    /// Every line well formed and every pair of lines meets exactly once.
    pub fn is_pure(&self) -> bool {
        self.defect().is_none()
    }

    /// Relabels points by `perm` (a permutation of the universe).
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let lines = self
            .lines
            .iter()
            .map(|l| Line::from_bits(l.points().iter().fold(0u128, |acc, p| acc | 1 << perm[p])))
            .collect();
        Self::unchecked(self.order, lines)
    }
}

impl fmt::Debug for PartialPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialPlane(n={}, ", self.order)?;
        f.debug_list().entries(self.lines.iter()).finish()?;
        write!(f, ")")
    }
}

/// Per-point appearance counts and the histogram of those counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppearanceProfile {
    /// `counts[i]`: number of lines through point `i`.
    pub counts: Vec<usize>,
    /// `histogram[k]`: number of points on exactly `k` lines.
    pub histogram: Vec<usize>,
    size: usize,
}

impl AppearanceProfile {
    /// `a_k`, zero past the end of the histogram.
    pub fn a(&self, k: usize) -> usize {
        self.histogram.get(k).copied().unwrap_or(0)
    }

    pub fn count(&self, point: usize) -> usize {
        self.counts[point]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `Σ k·a_k` and `Σ k²·a_k`.
    pub fn moments(&self) -> (usize, usize) {
        self.histogram
            .iter()
            .enumerate()
            .fold((0, 0), |(m1, m2), (k, &a)| (m1 + k * a, m2 + k * k * a))
    }
}

pub fn appearance_profile(p: &PartialPlane) -> AppearanceProfile {
    let order = p.order();
    let mut counts = vec![0usize; order.universe_size()];
    for line in p.lines() {
        for pt in line.points().iter() {
            if pt < counts.len() {
                counts[pt] += 1;
            }
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; max.max(order.points_per_line()) + 1];
    for &c in &counts {
        histogram[c] += 1;
    }
    AppearanceProfile {
        counts,
        histogram,
        size: p.size(),
    }
}

/// `Σ k·a_k = (n+1)s` and `Σ k²·a_k = s² + ns`.
pub fn check_sum_identities(p: &PartialPlane) -> bool {
    let n = p.order().get();
    let s = p.size();
    let (m1, m2) = appearance_profile(p).moments();
    m1 == (n + 1) * s && m2 == s * s + n * s
}

/// The appearance counts along a line of a pure plane sum to `s + n`.
pub fn check_line_sum(p: &PartialPlane, line: Line) -> Result<bool> {
    if !p.contains_line(line) {
        return Err(Error::invalid(format!(
            "{line:?} is not a line of the plane"
        )));
    }
    let profile = appearance_profile(p);
    let sum: usize = line.points().iter().map(|pt| profile.counts[pt]).sum();
    Ok(sum == p.size() + p.order().get())
}

/// No point of a saturated plane lies on exactly `n` lines.
pub fn check_no_n_point(p: &PartialPlane) -> bool {
    let n = p.order().get();
    appearance_profile(p).counts.iter().all(|&c| c != n)
}
