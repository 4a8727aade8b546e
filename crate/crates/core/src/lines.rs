//! Generation of lines compatible with a plane.
//!
//! A new line must meet every existing line in exactly one point. The
//! generator walks the existing lines in order and, for each line not yet
//! met, picks its meeting point among the points not already excluded;
//! once every line is met the remaining slots are filled with points that
//! lie on no line. Each compatible line is produced exactly once.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::plane::{appearance_profile, Line, Order, PartialPlane, PointSet};

/// Upper bounds on total appearances, per point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AppearanceCaps(BTreeMap<usize, usize>);

impl AppearanceCaps {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same cap on every point of `points`.
    pub fn uniform(points: PointSet, cap: usize) -> Self {
        AppearanceCaps(points.iter().map(|p| (p, cap)).collect())
    }

    pub fn set(&mut self, point: usize, cap: usize) -> &mut Self {
        self.0.insert(point, cap);
        self
    }

    pub fn extend_uniform(&mut self, points: PointSet, cap: usize) -> &mut Self {
        for p in points.iter() {
            self.0.insert(p, cap);
        }
        self
    }

    pub fn get(&self, point: usize) -> Option<usize> {
        self.0.get(&point).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().map(|(&p, &c)| (p, c))
    }

    pub(crate) fn validate(&self, order: Order) -> Result<()> {
        for (p, c) in self.iter() {
            if p >= order.universe_size() {
                return Err(Error::invalid(format!("cap on point {p} outside universe")));
            }
            if c > order.points_per_line() {
                return Err(Error::invalid(format!(
                    "cap {c} on point {p} exceeds {}",
                    order.points_per_line()
                )));
            }
        }
        Ok(())
    }

    /// Dense table indexed by point; `u8::MAX` means uncapped.
    pub(crate) fn table(&self) -> [u8; 128] {
        let mut t = [u8::MAX; 128];
        for (p, c) in self.iter() {
            t[p] = c as u8;
        }
        t
    }
}

/// "Exactly `from_a` points from `set_a` and the rest from `set_b`."
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MembershipQuota {
    pub from_a: usize,
    pub set_a: PointSet,
    pub set_b: PointSet,
}

impl MembershipQuota {
    pub fn satisfied_by(&self, line: Line, order: Order) -> bool {
        let a = line.points().intersection(self.set_a).len();
        let b = line.points().intersection(self.set_b).len();
        a == self.from_a && a + b == order.points_per_line()
    }
}

/// Restrictions on which compatible lines are produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineConstraints {
    pub required_point: Option<usize>,
    /// The line must contain at least one of these points.
    pub required_any_of: Option<PointSet>,
    /// The line must be strictly greater than this one.
    pub lexicographic_floor: Option<Line>,
    pub appearance_caps: AppearanceCaps,
    pub membership_quota: Option<MembershipQuota>,
}

impl LineConstraints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn through(point: usize) -> Self {
        LineConstraints {
            required_point: Some(point),
            ..Self::default()
        }
    }

    pub fn through_any(points: PointSet) -> Self {
        LineConstraints {
            required_any_of: Some(points),
            ..Self::default()
        }
    }

    pub fn validate(&self, order: Order) -> Result<()> {
        let universe = order.universe_size();
        if let Some(p) = self.required_point {
            if p >= universe {
                return Err(Error::invalid(format!(
                    "required point {p} outside universe"
                )));
            }
        }
        if let Some(f) = self.lexicographic_floor {
            if !f.fits(order) {
                return Err(Error::invalid(format!(
                    "floor {f:?} is not a line of order {order}"
                )));
            }
        }
        self.appearance_caps.validate(order)?;
        if let Some(q) = &self.membership_quota {
            if !q.set_a.intersection(q.set_b).is_empty() {
                return Err(Error::invalid("membership quota sets overlap"));
            }
            if !q.set_a.union(q.set_b).is_subset(order.universe()) {
                return Err(Error::invalid("membership quota sets leave the universe"));
            }
            if q.from_a > order.points_per_line() {
                return Err(Error::invalid("membership quota exceeds line length"));
            }
        }
        Ok(())
    }

    fn accepts(&self, line: Line, order: Order) -> bool {
        if let Some(any) = self.required_any_of {
            if line.points().intersection(any).is_empty() {
                return false;
            }
        }
        if let Some(floor) = self.lexicographic_floor {
            if line <= floor {
                return false;
            }
        }
        if let Some(q) = &self.membership_quota {
            if !q.satisfied_by(line, order) {
                return false;
            }
        }
        true
    }
}

struct Generator<'a> {
    k: usize,
    lines: &'a [u128],
    /// Union of the lines through each point.
    through: Vec<u128>,
    allowed: u128,
    fresh: u128,
    quota: Option<MembershipQuota>,
}

impl Generator<'_> {
    fn quota_ok(&self, chosen: u128) -> bool {
        match &self.quota {
            None => true,
            Some(q) => {
                let a = (chosen & q.set_a.0).count_ones() as usize;
                let b = (chosen & q.set_b.0).count_ones() as usize;
                a <= q.from_a && b + q.from_a <= self.k
            }
        }
    }

    fn walk<F>(&self, from: usize, chosen: u128, blocked: u128, emit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(u128) -> ControlFlow<()>,
    {
        let mut i = from;
        while i < self.lines.len() && self.lines[i] & chosen != 0 {
            i += 1;
        }
        let size = chosen.count_ones() as usize;
        if i == self.lines.len() {
            return self.fill(chosen, emit);
        }
        if size == self.k {
            return ControlFlow::Continue(());
        }
        let mut options = self.lines[i] & self.allowed & !blocked;
        while options != 0 {
            let p = options.trailing_zeros() as usize;
            options &= options - 1;
            let next = chosen | 1 << p;
            if !self.quota_ok(next) {
                continue;
            }
            self.walk(i + 1, next, blocked | self.through[p], emit)?;
        }
        ControlFlow::Continue(())
    }

    /// Completes `chosen` with points on no existing line.
    fn fill<F>(&self, chosen: u128, emit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(u128) -> ControlFlow<()>,
    {
        let need = self.k - chosen.count_ones() as usize;
        let pool = self.fresh & !chosen;
        match &self.quota {
            None => combinations(pool, need, 0, &mut |extra| emit(chosen | extra)),
            Some(q) => {
                let need_a = q.from_a - (chosen & q.set_a.0).count_ones() as usize;
                let need_b = need - need_a;
                combinations(pool & q.set_a.0, need_a, 0, &mut |xa| {
                    combinations(pool & q.set_b.0, need_b, 0, &mut |xb| {
                        emit(chosen | xa | xb)
                    })
                })
            }
        }
    }
}

/// Calls `f` with every `k`-subset of `pool` (as a bitmask).
fn combinations<F>(pool: u128, k: usize, acc: u128, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(u128) -> ControlFlow<()>,
{
    if k == 0 {
        return f(acc);
    }
    if (pool.count_ones() as usize) < k {
        return ControlFlow::Continue(());
    }
    let mut rest = pool;
    while rest.count_ones() as usize >= k {
        let p = rest.trailing_zeros();
        rest &= rest - 1;
        combinations(rest, k - 1, acc | 1 << p, f)?;
    }
    ControlFlow::Continue(())
}

/// Visits every line satisfying `c` that is compatible with all of `p`'s
/// lines, in generation (not sorted) order.
pub(crate) fn for_each_compatible_line<F>(p: &PartialPlane, c: &LineConstraints, mut f: F)
where
    F: FnMut(Line) -> ControlFlow<()>,
{
    let order = p.order();
    let universe = order.universe().0;
    let lines: Vec<u128> = p.lines().iter().map(|l| l.bits()).collect();
    let mut through = vec![0u128; 128];
    let mut covered = 0u128;
    for &l in &lines {
        covered |= l;
        let mut rest = l;
        while rest != 0 {
            let pt = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            through[pt] |= l;
        }
    }

    let mut allowed = universe;
    if !c.appearance_caps.is_empty() {
        let profile = appearance_profile(p);
        for (pt, cap) in c.appearance_caps.iter() {
            if profile.counts[pt] >= cap {
                allowed &= !(1u128 << pt);
            }
        }
    }
    if let Some(q) = &c.membership_quota {
        allowed &= q.set_a.0 | q.set_b.0;
    }

    let gen = Generator {
        k: order.points_per_line(),
        lines: &lines,
        through,
        allowed,
        fresh: allowed & !covered,
        quota: c.membership_quota,
    };

    let mut emit = |bits: u128| {
        let line = Line::from_bits(bits);
        if c.accepts(line, order) {
            f(line)
        } else {
            ControlFlow::Continue(())
        }
    };

    let (start, blocked) = match c.required_point {
        None => (0u128, 0u128),
        Some(r) => {
            if allowed >> r & 1 == 0 {
                return;
            }
            (1u128 << r, gen.through[r])
        }
    };
    if !gen.quota_ok(start) {
        return;
    }
    let _ = gen.walk(0, start, blocked, &mut emit);
}

/// All lines satisfying `c` and compatible with every line of `p`, in
/// ascending lexicographic order.
pub fn enumerate_compatible_lines(p: &PartialPlane, c: &LineConstraints) -> Vec<Line> {
    let mut out = Vec::new();
    for_each_compatible_line(p, c, |l| {
        out.push(l);
        ControlFlow::Continue(())
    });
    out.sort_unstable();
    out
}

/// Some line compatible with the whole plane, if one exists.
pub fn compatible_witness(p: &PartialPlane) -> Option<Line> {
    let mut found = None;
    for_each_compatible_line(p, &LineConstraints::none(), |l| {
        found = Some(l);
        ControlFlow::Break(())
    });
    found
}

/// No line can be added without breaking purity.
pub fn is_saturated(p: &PartialPlane) -> bool {
    compatible_witness(p).is_none()
}
