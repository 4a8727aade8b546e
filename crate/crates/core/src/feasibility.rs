//! Integer feasibility of appearance histograms.
//!
//! For a pure plane of order `n` and size `s`, with `a_k` points on exactly
//! `k` lines:
//!
//! ```text
//! Σ a_k       = n² + n + 1
//! Σ k·a_k     = (n+1)·s
//! Σ k²·a_k    = s² + n·s
//! ```
//!
//! Subtracting `(n-1)` times the second from the third removes `a_{n-1}`:
//! `Σ k(k-n+1)·a_k = s² - (n²-n-1)·s`. The solver first checks each identity
//! for divisibility after substituting fixed values, then enumerates every
//! non-negative solution with bound propagation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::plane::Order;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    /// `a_k`
    A(usize),
    /// the size `s`
    Size,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// `Σ coef·var + constant  cmp  0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(Var, i64)>,
    pub constant: i64,
    pub cmp: Cmp,
    source: String,
}

impl LinearConstraint {
    fn holds(&self, a: &[i64], s: i64) -> bool {
        let lhs = self.constant
            + self
                .terms
                .iter()
                .map(|&(v, c)| {
                    c * match v {
                        Var::A(k) => a.get(k).copied().unwrap_or(0),
                        Var::Size => s,
                    }
                })
                .sum::<i64>();
        match self.cmp {
            Cmp::Le => lhs <= 0,
            Cmp::Lt => lhs < 0,
            Cmp::Ge => lhs >= 0,
            Cmp::Gt => lhs > 0,
            Cmp::Eq => lhs == 0,
        }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn parse_side(
    side: &str,
    sign: i64,
    terms: &mut BTreeMap<Var, i64>,
    constant: &mut i64,
) -> Result<()> {
    let bad = |m: &str| Error::invalid(format!("constraint `{side}`: {m}"));
    let compact: String = side.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad("empty side"));
    }
    let mut chunks = Vec::new();
    let mut cur = String::new();
    for (i, ch) in compact.char_indices() {
        if (ch == '+' || ch == '-') && i > 0 {
            chunks.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    chunks.push(cur);
    for chunk in chunks {
        let (neg, body) = match chunk.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, chunk.strip_prefix('+').unwrap_or(&chunk)),
        };
        let unit = if neg { -sign } else { sign };
        let (coef, var) = match body.split_once('*') {
            Some((c, v)) => (
                c.parse::<i64>().map_err(|_| bad("bad coefficient"))?,
                Some(v),
            ),
            None if body.starts_with(|c: char| c.is_ascii_digit()) => {
                (body.parse::<i64>().map_err(|_| bad("bad number"))?, None)
            }
            None => (1, Some(body)),
        };
        match var {
            None => *constant += unit * coef,
            Some(v) => {
                let var = if v == "s" {
                    Var::Size
                } else if let Some(k) = v.strip_prefix('a') {
                    Var::A(k.parse().map_err(|_| bad("bad variable"))?)
                } else {
                    return Err(bad("unknown variable"));
                };
                *terms.entry(var).or_insert(0) += unit * coef;
            }
        }
    }
    Ok(())
}

impl FromStr for LinearConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = [
            ("<=", Cmp::Le),
            (">=", Cmp::Ge),
            ("<", Cmp::Lt),
            (">", Cmp::Gt),
            ("=", Cmp::Eq),
        ];
        let (lhs, rhs, cmp) = ops
            .iter()
            .find_map(|(tok, cmp)| s.split_once(tok).map(|(l, r)| (l, r, *cmp)))
            .ok_or_else(|| Error::invalid(format!("constraint `{s}` has no comparison")))?;
        let mut terms = BTreeMap::new();
        let mut constant = 0;
        parse_side(lhs, 1, &mut terms, &mut constant)?;
        parse_side(rhs, -1, &mut terms, &mut constant)?;
        Ok(LinearConstraint {
            terms: terms.into_iter().filter(|&(_, c)| c != 0).collect(),
            constant,
            cmp,
            source: s.trim().to_string(),
        })
    }
}

/// Parses `a7=1` or `a7=0..1`.
pub fn parse_fix(s: &str) -> Result<(usize, RangeInclusive<usize>)> {
    let bad = || {
        Error::invalid(format!(
            "bad fix `{s}`, expected a<k>=<v> or a<k>=<lo>..<hi>"
        ))
    };
    let (var, val) = s.split_once('=').ok_or_else(bad)?;
    let k = var
        .trim()
        .strip_prefix('a')
        .ok_or_else(bad)?
        .parse()
        .map_err(|_| bad())?;
    let val = val.trim();
    let range = match val.split_once("..") {
        Some((lo, hi)) => {
            let lo: usize = lo.parse().map_err(|_| bad())?;
            let hi: usize = hi.trim_start_matches('=').parse().map_err(|_| bad())?;
            lo..=hi
        }
        None => {
            let v: usize = val.parse().map_err(|_| bad())?;
            v..=v
        }
    };
    Ok((k, range))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityProblem {
    pub order: Order,
    pub sizes: RangeInclusive<usize>,
    /// Allowed values of individual `a_k`.
    pub fixed: BTreeMap<usize, RangeInclusive<usize>>,
    pub constraints: Vec<LinearConstraint>,
    /// Every point lies on some line (`a_0 = 0`).
    pub all_points_appear: bool,
    /// Restrict to saturated planes, where no point lies on exactly `n`
    /// lines (`a_n = 0`).
    pub saturated: bool,
}

impl FeasibilityProblem {
    pub fn new(order: Order, sizes: RangeInclusive<usize>) -> Self {
        FeasibilityProblem {
            order,
            sizes,
            fixed: BTreeMap::new(),
            constraints: Vec::new(),
            all_points_appear: false,
            saturated: true,
        }
    }

    pub fn fix(mut self, k: usize, value: usize) -> Self {
        self.fixed.insert(k, value..=value);
        self
    }

    pub fn fix_range(mut self, k: usize, values: RangeInclusive<usize>) -> Self {
        self.fixed.insert(k, values);
        self
    }

    pub fn constraint(mut self, c: LinearConstraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn all_points_appear(mut self) -> Self {
        self.all_points_appear = true;
        self
    }

    pub fn unsaturated(mut self) -> Self {
        self.saturated = false;
        self
    }
}

/// An appearance histogram `a_0..=a_{n+1}` for a given size.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Profile {
    pub size: usize,
    pub a: Vec<usize>,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s={}", self.size)?;
        for (k, v) in self.a.iter().enumerate().rev() {
            if *v != 0 {
                write!(f, " a{k}={v}")?;
            }
        }
        Ok(())
    }
}

/// Why a size has no solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage {
    /// An identity, with fixed values substituted, reads `Σ c_k a_k = rhs`
    /// and `gcd(c_k)` does not divide `rhs`.
    Divisibility {
        identity: &'static str,
        equation: String,
        gcd: i64,
        rhs: i64,
    },
    /// The exhaustive enumeration found nothing.
    Enumeration,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Divisibility {
                identity,
                equation,
                gcd,
                rhs,
            } => write!(
                f,
                "{identity}: {equation} (gcd {gcd} does not divide {rhs})"
            ),
            Stage::Enumeration => f.write_str("enumeration: no non-negative integer solution"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeOutcome {
    pub size: usize,
    pub profiles: Vec<Profile>,
    pub infeasible: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub outcomes: Vec<SizeOutcome>,
}

impl FeasibilityReport {
    pub fn profiles(&self) -> impl Iterator<Item = &Profile> {
        self.outcomes.iter().flat_map(|o| o.profiles.iter())
    }

    pub fn is_infeasible(&self) -> bool {
        self.profiles().next().is_none()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

struct Solver<'p> {
    p: &'p FeasibilityProblem,
    /// variable order: k descending, a_0 last
    ks: Vec<usize>,
    domains: Vec<(i64, i64)>,
    size: i64,
    /// per position, (smallest, largest) positive k still open after it
    rest_range: Vec<Option<(i64, i64)>>,
    out: Vec<Profile>,
}

impl Solver<'_> {
    fn run(&mut self, idx: usize, r0: i64, r1: i64, r2: i64, a: &mut Vec<i64>) {
        if idx == self.ks.len() {
            if r0 == 0
                && r1 == 0
                && r2 == 0
                && self.p.constraints.iter().all(|c| c.holds(a, self.size))
            {
                self.out.push(Profile {
                    size: self.size as usize,
                    a: a.iter().map(|&v| v as usize).collect(),
                });
            }
            return;
        }
        let k = self.ks[idx];
        let (lo, hi) = self.domains[k];
        if k == 0 {
            if r1 == 0 && r2 == 0 && (lo..=hi).contains(&r0) {
                a[0] = r0;
                self.run(idx + 1, 0, 0, 0, a);
                a[0] = 0;
            }
            return;
        }
        let ki = k as i64;
        let top = hi.min(r0).min(r1 / ki).min(r2 / (ki * ki));
        for v in lo..=top {
            let (n0, n1, n2) = (r0 - v, r1 - ki * v, r2 - ki * ki * v);
            let ok = match self.rest_range[idx] {
                None => n1 == 0 && n2 == 0,
                Some((kmin, kmax)) => kmin * n1 <= n2 && n2 <= kmax * n1 && n0 * kmax >= n1,
            };
            if !ok {
                continue;
            }
            a[k] = v;
            self.run(idx + 1, n0, n1, n2, a);
        }
        a[k] = 0;
    }
}

/// Every histogram consistent with the identities, fixed values and side
/// constraints, per size in `f.sizes`.
pub fn feasibility_solve(f: &FeasibilityProblem) -> Result<FeasibilityReport> {
    let n = f.order.get();
    if n > 9 {
        return Err(Error::Unsupported(format!(
            "feasibility enumeration needs n <= 9, got {n}"
        )));
    }
    let points = f.order.universe_size() as i64;
    let kmax = n + 1;
    let mut domains = vec![(0i64, points); kmax + 1];
    for (&k, r) in &f.fixed {
        if k > kmax {
            if *r.start() > 0 {
                return Err(Error::invalid(format!("a{k} must be 0 at order {n}")));
            }
            continue;
        }
        domains[k] = (
            domains[k].0.max(*r.start() as i64),
            domains[k].1.min(*r.end() as i64),
        );
    }
    if f.saturated {
        domains[n].1 = domains[n].1.min(0);
    }
    if f.all_points_appear {
        domains[0].1 = domains[0].1.min(0);
    }
    for c in &f.constraints {
        if let Some(&(Var::A(k), _)) = c
            .terms
            .iter()
            .find(|(v, _)| matches!(v, Var::A(k) if *k > kmax))
        {
            return Err(Error::invalid(format!(
                "constraint `{c}` mentions a{k} beyond order {n}"
            )));
        }
    }

    let ks: Vec<usize> = (0..=kmax).rev().collect();
    let rest_range: Vec<Option<(i64, i64)>> = (0..ks.len())
        .map(|idx| {
            let open: Vec<i64> = ks[idx + 1..]
                .iter()
                .filter(|&&k| k > 0 && domains[k].1 > 0)
                .map(|&k| k as i64)
                .collect();
            Some((*open.iter().min()?, *open.iter().max()?))
        })
        .collect();

    let mut outcomes = Vec::new();
    for s in f.sizes.clone() {
        let si = s as i64;
        let ni = n as i64;
        let identities: [(&'static str, Box<dyn Fn(i64) -> i64>, i64); 4] = [
            ("point count", Box::new(|_| 1), points),
            ("first moment", Box::new(|k| k), (ni + 1) * si),
            ("second moment", Box::new(|k| k * k), si * si + ni * si),
            (
                "eliminated identity",
                Box::new(move |k| k * (k - ni + 1)),
                si * si - (ni * ni - ni - 1) * si,
            ),
        ];
        let mut stage = None;
        if domains.iter().any(|&(lo, hi)| lo > hi) {
            stage = Some(Stage::Enumeration);
        }
        for (name, coef, rhs) in &identities {
            if stage.is_some() {
                break;
            }
            let mut rest = *rhs;
            let mut g = 0;
            let mut eq = String::new();
            for k in 0..=kmax {
                let c = coef(k as i64);
                let (lo, hi) = domains[k];
                if lo == hi {
                    rest -= c * lo;
                } else if c != 0 {
                    g = gcd(g, c);
                    if !eq.is_empty() {
                        eq.push_str(" + ");
                    }
                    eq.push_str(&format!("{c}*a{k}"));
                }
            }
            let divisible = if g == 0 { rest == 0 } else { rest % g == 0 };
            if !divisible {
                if eq.is_empty() {
                    eq.push('0');
                }
                stage = Some(Stage::Divisibility {
                    identity: name,
                    equation: format!("{eq} = {rest}"),
                    gcd: g,
                    rhs: rest,
                });
            }
        }
        let profiles = if stage.is_some() {
            Vec::new()
        } else {
            let mut solver = Solver {
                p: f,
                ks: ks.clone(),
                domains: domains.clone(),
                size: si,
                rest_range: rest_range.clone(),
                out: Vec::new(),
            };
            let mut a = vec![0i64; kmax + 1];
            solver.run(0, points, (ni + 1) * si, si * si + ni * si, &mut a);
            let mut out = solver.out;
            out.sort();
            if out.is_empty() {
                stage = Some(Stage::Enumeration);
            }
            out
        };
        outcomes.push(SizeOutcome {
            size: s,
            profiles,
            infeasible: stage,
        });
    }
    Ok(FeasibilityReport { outcomes })
}
