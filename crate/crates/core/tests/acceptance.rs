//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Criteria 9-12 are long runs; they execute only
//! with `PPP_EXTENDED=1` and are reported as SKIP otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppp_core::cases::{expectation, run_case, seed_planes, CaseId};
use ppp_core::construct_odd_order_sppp;
use ppp_core::feasibility::feasibility_solve;
use ppp_core::golden::appendix_planes;
use ppp_core::iso::plane_certificate;
use ppp_core::search::{
    dfs_extend, exhaustive_by_dfs, exhaustive_small_order, RunOptions, SearchConfig, Termination,
};
use ppp_core::{
    appearance_profile, check_sum_identities, dedupe, enumerate_compatible_lines, is_saturated,
    planes_isomorphic, Line, LineConstraints, Order, PartialPlane,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_pipeline(c: CaseId, upto: usize) -> Result<Vec<Vec<PartialPlane>>, String> {
    let mut out = Vec::new();
    let mut planes = seed_planes(c);
    for phase in 1..=upto {
        planes = run_case(c, phase, &planes, &RunOptions::default()).map_err(|e| e.to_string())?;
        out.push(planes.clone());
    }
    Ok(out)
}

fn size_census(ps: &[PartialPlane]) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for p in ps {
        *m.entry(p.size()).or_insert(0) += 1;
    }
    m
}

fn criterion_1() -> Outcome {
    let ps = appendix_planes();
    ensure(ps.len() == 4, format!("{} planes bundled", ps.len()))?;
    for (i, p) in ps.iter().enumerate() {
        ensure(
            p.order().get() == 6 && p.size() == 25,
            format!("plane {} shape", i + 1),
        )?;
        ensure(p.is_pure(), format!("plane {} impure", i + 1))?;
        ensure(is_saturated(p), format!("plane {} not saturated", i + 1))?;
    }
    let classes = dedupe(&ps, None).map_err(|e| e.to_string())?.len();
    ensure(
        classes == 4,
        format!("{classes} classes among the 4 planes"),
    )?;
    let prof = appearance_profile(&ps[3]);
    ensure(
        (prof.a(5), prof.a(4), prof.a(0)) == (15, 25, 3),
        format!(
            "plane 4 profile a5={} a4={} a0={}",
            prof.a(5),
            prof.a(4),
            prof.a(0)
        ),
    )?;
    Ok("4 pure saturated distinct planes of size 25; plane 4 has a5=15 a4=25 a0=3".into())
}

fn case1_pipeline(c: CaseId) -> Result<Vec<Vec<PartialPlane>>, String> {
    run_pipeline(c, 2)
}

fn criterion_2(p1: &[PartialPlane]) -> Outcome {
    let census = size_census(p1);
    ensure(
        p1.len() == 12 && census.keys().eq([19].iter()),
        format!("{} classes, sizes {census:?}", p1.len()),
    )?;
    Ok("12 classes of size 19".into())
}

fn criterion_3(p2: &[PartialPlane]) -> Outcome {
    let e = expectation(CaseId::Case1_1, 2).expect("manifest");
    let bad = e.mismatches(p2);
    ensure(bad.is_empty(), bad.join("; "))?;
    let known = appendix_planes();
    for p in p2.iter().filter(|p| p.size() == 25) {
        let hit = known[..3]
            .iter()
            .position(|k| planes_isomorphic(p, k, None).unwrap_or(false));
        ensure(
            hit.is_some(),
            "size-25 class matches none of bundled planes 1-3",
        )?;
    }
    let matched: BTreeSet<usize> = p2
        .iter()
        .filter(|p| p.size() == 25)
        .filter_map(|p| {
            known[..3]
                .iter()
                .position(|k| planes_isomorphic(p, k, None).unwrap_or(false))
        })
        .collect();
    ensure(
        matched.len() == 3,
        "size-25 classes do not cover planes 1-3",
    )?;
    Ok(format!(
        "36 saturated classes, sizes {:?}, 3 of size 25 = bundled 1-3",
        size_census(p2)
    ))
}

fn criterion_4(phases: &[Vec<PartialPlane>]) -> Outcome {
    let (p1, p2) = (&phases[0], &phases[1]);
    ensure(
        p1.len() == 2 && p1.iter().all(|p| p.size() == 18),
        format!("phase 1: {} classes, sizes {:?}", p1.len(), size_census(p1)),
    )?;
    let bad = expectation(CaseId::Case1_2, 2)
        .expect("manifest")
        .mismatches(p2);
    ensure(bad.is_empty(), bad.join("; "))?;
    ensure(p2.iter().all(|p| p.size() < 25), "a size-25 plane appeared")?;
    Ok(format!(
        "2 classes of size 18; 30 saturated classes, sizes {:?}",
        size_census(p2)
    ))
}

/// Relabeling-invariant key by trying every permutation of the points.
fn brute_canonical(lines: &[u8]) -> Vec<u8> {
    fn perms(k: usize, a: &mut [usize; 7], out: &mut Vec<[usize; 7]>) {
        if k == 7 {
            out.push(*a);
            return;
        }
        for i in k..7 {
            a.swap(k, i);
            perms(k + 1, a, out);
            a.swap(k, i);
        }
    }
    thread_local! {
        static PERMS: Vec<[usize; 7]> = {
            let mut out = Vec::new();
            perms(0, &mut [0, 1, 2, 3, 4, 5, 6], &mut out);
            out
        };
    }
    PERMS.with(|ps| {
        ps.iter()
            .map(|p| {
                let mut img: Vec<u8> = lines
                    .iter()
                    .map(|&m| {
                        (0..7)
                            .filter(|&i| m >> i & 1 == 1)
                            .map(|i| 1u8 << p[i])
                            .fold(0, |a, b| a | b)
                    })
                    .collect();
                img.sort_unstable();
                img
            })
            .min()
            .expect("permutations")
    })
}

/// Every saturated pure plane of order 2 from all 3-subsets of 7 points,
/// classified by brute-force relabeling.
fn order2_oracle() -> BTreeMap<Vec<u8>, usize> {
    let all: Vec<u8> = (0u8..128).filter(|m| m.count_ones() == 3).collect();
    let ok = |a: u8, b: u8| (a & b).count_ones() == 1;
    let mut classes = BTreeMap::new();
    fn grow(
        all: &[u8],
        from: usize,
        cur: &mut Vec<u8>,
        ok: &dyn Fn(u8, u8) -> bool,
        classes: &mut BTreeMap<Vec<u8>, usize>,
    ) {
        for i in from..all.len() {
            if cur.iter().all(|&l| ok(l, all[i])) {
                cur.push(all[i]);
                grow(all, i + 1, cur, ok, classes);
                cur.pop();
            }
        }
        let maximal = !cur.is_empty()
            && all
                .iter()
                .all(|&m| cur.contains(&m) || !cur.iter().all(|&l| ok(l, m)));
        if maximal {
            classes.entry(brute_canonical(cur)).or_insert(cur.len());
        }
    }
    grow(&all, 0, &mut Vec::new(), &ok, &mut classes);
    classes
}

fn criterion_5() -> Outcome {
    let found = exhaustive_small_order(2).map_err(|e| e.to_string())?;
    let biggest = found.iter().map(|p| p.size()).max().unwrap_or(0);
    ensure(biggest == 7, format!("largest class has size {biggest}"))?;
    ensure(
        found.iter().filter(|p| p.size() == 7).count() == 1,
        "more than one class of size 7",
    )?;
    for p in &found {
        ensure(
            appearance_profile(p).max_count() >= 3,
            format!("class of size {} has no point on 3 lines", p.size()),
        )?;
    }
    let ours: BTreeSet<Vec<u8>> = found
        .iter()
        .map(|p| {
            let lines: Vec<u8> = p.lines().iter().map(|l| l.bits() as u8).collect();
            brute_canonical(&lines)
        })
        .collect();
    ensure(
        ours.len() == found.len(),
        "engine classes collide under brute-force relabeling",
    )?;
    let oracle = order2_oracle();
    let theirs: BTreeSet<Vec<u8>> = oracle.keys().cloned().collect();
    ensure(
        ours == theirs,
        format!(
            "engine {} classes, oracle {} classes",
            ours.len(),
            theirs.len()
        ),
    )?;
    let sizes: Vec<usize> = oracle.values().copied().collect();
    Ok(format!(
        "{} classes with sizes {sizes:?}; Fano is the unique maximum",
        found.len()
    ))
}

fn criterion_6() -> Outcome {
    for n in [3, 5] {
        let p = construct_odd_order_sppp(n).map_err(|e| e.to_string())?;
        ensure(p.size() == n + 2, format!("n={n}: size {}", p.size()))?;
        ensure(is_saturated(&p), format!("n={n}: not saturated"))?;
        ensure(
            appearance_profile(&p).max_count() == 2,
            format!("n={n}: a point on 3 lines"),
        )?;
    }
    let oracle = exhaustive_small_order(3).map_err(|e| e.to_string())?;
    let fives: Vec<&PartialPlane> = oracle.iter().filter(|p| p.size() == 5).collect();
    let p3 = construct_odd_order_sppp(3).map_err(|e| e.to_string())?;
    let hit = fives
        .iter()
        .any(|q| planes_isomorphic(&p3, q, None).unwrap_or(false));
    ensure(hit, "order-3 construction matches no size-5 class")?;
    Ok(format!(
        "n=3,5 saturated with sizes 5,7 and max appearance 2; order-3 census has {} classes",
        oracle.len()
    ))
}

fn criterion_7() -> Outcome {
    let six = Order::new(6).unwrap();
    use ppp_core::feasibility::FeasibilityProblem;
    let r = feasibility_solve(
        &FeasibilityProblem::new(six, 26..=26)
            .fix(7, 0)
            .fix(1, 0)
            .fix(2, 0)
            .fix(3, 0),
    )
    .map_err(|e| e.to_string())?;
    ensure(r.is_infeasible(), "s=26, a7=0 has solutions")?;
    let stage = r.outcomes[0]
        .infeasible
        .clone()
        .map(|s| s.to_string())
        .unwrap_or_default();
    let r = feasibility_solve(
        &FeasibilityProblem::new(six, 25..=25)
            .fix(7, 0)
            .fix(1, 0)
            .fix(2, 0)
            .constraint("3*a3<=s".parse().unwrap()),
    )
    .map_err(|e| e.to_string())?;
    let ps: Vec<_> = r.profiles().collect();
    ensure(
        ps.len() == 1 && (ps[0].a[5], ps[0].a[4], ps[0].a[3]) == (15, 25, 0),
        format!("s=25 profiles: {ps:?}"),
    )?;
    let r = feasibility_solve(
        &FeasibilityProblem::new(six, 25..=43)
            .fix(7, 1)
            .fix(1, 0)
            .fix(2, 0)
            .all_points_appear(),
    )
    .map_err(|e| e.to_string())?;
    ensure(
        r.outcomes.len() == 19 && r.is_infeasible(),
        "a7=1 has a solution in 25..=43",
    )?;
    Ok(format!(
        "s=26 infeasible ({stage}); s=25 unique (15,25,0); a7=1 infeasible for 25..=43"
    ))
}

/// A random line meeting every line of `p` once, built greedily from a
/// shuffled point order; `None` if the attempts run out.
fn random_compatible(rng: &mut ChaCha8Rng, p: &PartialPlane) -> Option<Line> {
    let order = p.order();
    let mut pts: Vec<usize> = (0..order.universe_size()).collect();
    for _ in 0..50 {
        pts.shuffle(rng);
        let mut chosen: Vec<usize> = Vec::new();
        for &q in &pts {
            let fits = p.lines().iter().all(|l| {
                let hit = chosen.iter().filter(|&&c| l.contains(c)).count();
                !(l.contains(q) && hit >= 1)
            });
            if fits {
                chosen.push(q);
                if chosen.len() == order.points_per_line() {
                    break;
                }
            }
        }
        if chosen.len() < order.points_per_line() {
            continue;
        }
        let line = Line::new(chosen).ok()?;
        if p.lines().iter().all(|l| l.meet(line) == 1) && !p.contains_line(line) {
            return Some(line);
        }
    }
    None
}

/// Grows a random pure plane by adding random compatible lines.
fn random_plane(rng: &mut ChaCha8Rng, n: usize) -> PartialPlane {
    let order = Order::new(n).unwrap();
    let mut p = PartialPlane::empty(order);
    let steps = rng.gen_range(0..=n * n + n + 1);
    for _ in 0..steps {
        let line = if n <= 3 {
            let cands = enumerate_compatible_lines(&p, &LineConstraints::none());
            cands.choose(rng).copied()
        } else {
            random_compatible(rng, &p)
        };
        match line {
            Some(l) => p = p.with_line(l),
            None => break,
        }
    }
    p
}

fn random_relabel(rng: &mut ChaCha8Rng, p: &PartialPlane) -> PartialPlane {
    let mut perm: Vec<usize> = (0..p.order().universe_size()).collect();
    perm.shuffle(rng);
    p.relabel(&perm)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut grown = Vec::new();
    for i in 0..600 {
        let n = 2 + i % 5;
        let p = random_plane(&mut rng, n);
        ensure(p.is_pure(), "grown plane is impure")?;
        ensure(
            check_sum_identities(&p),
            format!("identities fail at order {n} size {}", p.size()),
        )?;
        grown.push(p);
    }

    let mut pool: Vec<PartialPlane> = appendix_planes();
    pool.extend(grown.iter().filter(|p| p.size() >= 3).take(60).cloned());
    let mut checked = 0;
    for i in 0..1200 {
        let p = &pool[i % pool.len()];
        let q = random_relabel(&mut rng, p);
        let a = plane_certificate(p, None).map_err(|e| e.to_string())?;
        let b = plane_certificate(&q, None).map_err(|e| e.to_string())?;
        ensure(
            a == b,
            format!("certificate changed under relabeling (size {})", p.size()),
        )?;
        checked += 1;
    }

    let mut mixed: Vec<PartialPlane> = grown
        .iter()
        .filter(|p| p.order().get() == 3)
        .cloned()
        .collect();
    let copies: Vec<PartialPlane> = mixed
        .iter()
        .take(40)
        .map(|p| random_relabel(&mut rng, p))
        .collect();
    mixed.extend(copies);
    let once = dedupe(&mixed, None).map_err(|e| e.to_string())?;
    let twice = dedupe(&once, None).map_err(|e| e.to_string())?;
    ensure(once == twice, "dedupe is not idempotent")?;

    let key = |ps: Vec<PartialPlane>| -> BTreeSet<_> {
        ps.iter()
            .map(|p| plane_certificate(p, None).unwrap())
            .collect()
    };
    let with = key(exhaustive_by_dfs(2, true).map_err(|e| e.to_string())?);
    let without = key(exhaustive_by_dfs(2, false).map_err(|e| e.to_string())?);
    ensure(
        with == without,
        "lexicographic check loses saturated classes at order 2",
    )?;
    let two = Order::new(2).unwrap();
    let start = PartialPlane::new(two, vec![Line::new([0, 1, 2]).unwrap()]).unwrap();
    let cands = enumerate_compatible_lines(&start, &LineConstraints::none());
    let mut per_size = Vec::new();
    for target in 2..=7 {
        let cfg = SearchConfig::new(Termination::TargetSize(target));
        let off = key(dfs_extend(&start, &cands, &cfg).map_err(|e| e.to_string())?);
        let on =
            key(dfs_extend(&start, &cands, &cfg.clone().lexicographic())
                .map_err(|e| e.to_string())?);
        ensure(
            on == off,
            format!("lexicographic check loses size-{target} classes at order 2"),
        )?;
        per_size.push(on.len());
    }
    Ok(format!(
        "identities on {} grown planes; {checked} relabelings invariant; dedupe idempotent ({} -> {} classes); lex on/off agree (saturated {}, per size 2..=7 {:?})",
        grown.len(),
        mixed.len(),
        once.len(),
        with.len(),
        per_size
    ))
}

fn extended(
    c: CaseId,
    check: impl Fn(&[Vec<PartialPlane>]) -> Result<String, String>,
) -> Option<Outcome> {
    if std::env::var("PPP_EXTENDED").as_deref() != Ok("1") {
        return None;
    }
    Some(run_pipeline(c, c.phase_count()).and_then(|phases| check(&phases)))
}

fn manifest_check(c: CaseId, phases: &[Vec<PartialPlane>]) -> Outcome {
    let mut notes = Vec::new();
    for (k, ps) in phases.iter().enumerate() {
        let e = expectation(c, k + 1).expect("manifest");
        let bad = e.mismatches(ps);
        if !bad.is_empty() {
            if e.strict {
                return Err(format!("phase {}: {}", k + 1, bad.join("; ")));
            }
            notes.push(format!("phase {} (soft): {}", k + 1, bad.join("; ")));
        }
    }
    let counts: Vec<usize> = phases.iter().map(Vec::len).collect();
    Ok(format!("phase counts {counts:?} {}", notes.join(" ")))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, what: &str, t: Instant, outcome: Option<Outcome>| {
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Some(Ok(d)) => println!("PASS criterion {id} [{what}] ({secs:.1}s): {d}"),
            Some(Err(d)) => {
                failed += 1;
                println!("FAIL criterion {id} [{what}] ({secs:.1}s): {d}");
            }
            None => println!("SKIP criterion {id} [{what}]: extended tier, set PPP_EXTENDED=1"),
        }
    };

    let t = Instant::now();
    report("1", "bundled size-25 planes", t, Some(criterion_1()));

    let t = Instant::now();
    match case1_pipeline(CaseId::Case1_1) {
        Ok(phases) => {
            report("2", "case1-1 phase 1", t, Some(criterion_2(&phases[0])));
            report("3", "case1-1 phase 2", t, Some(criterion_3(&phases[1])));
        }
        Err(e) => {
            report("2", "case1-1 phase 1", t, Some(Err(e.clone())));
            report("3", "case1-1 phase 2", t, Some(Err(e)));
        }
    }

    let t = Instant::now();
    let c4 = case1_pipeline(CaseId::Case1_2).and_then(|p| criterion_4(&p));
    report("4", "case1-2", t, Some(c4));

    let t = Instant::now();
    report("5", "order-2 oracle", t, Some(criterion_5()));
    let t = Instant::now();
    report("6", "odd-order construction", t, Some(criterion_6()));
    let t = Instant::now();
    report("7", "feasibility analyzer", t, Some(criterion_7()));
    let t = Instant::now();
    report("8", "property suites", t, Some(criterion_8()));

    let t = Instant::now();
    report(
        "9",
        "case3",
        t,
        extended(CaseId::Case3, |ph| {
            let grew = ph[1].iter().all(|p| p.size() <= 23);
            ensure(grew, "a phase-2 plane grew by more than one line")?;
            manifest_check(CaseId::Case3, ph)
        }),
    );
    let t = Instant::now();
    report(
        "10",
        "case4",
        t,
        extended(CaseId::Case4, |ph| manifest_check(CaseId::Case4, ph)),
    );
    let t = Instant::now();
    report(
        "11",
        "case5",
        t,
        extended(CaseId::Case5, |ph| {
            let out = manifest_check(CaseId::Case5, ph)?;
            let last = &ph[2];
            let four = &appendix_planes()[3];
            ensure(
                last.len() == 1 && planes_isomorphic(&last[0], four, None).unwrap_or(false),
                "size-25 plane is not bundled plane 4",
            )?;
            ensure(
                last.iter().all(is_saturated),
                "size-25 plane is not saturated",
            )?;
            let three = |l: &Line| l.points().iter().filter(|&p| p < 15).count() == 3;
            ensure(
                last[0].lines().iter().all(three),
                "a line breaks the 3+4 split",
            )?;
            Ok(out)
        }),
    );
    let t = Instant::now();
    report(
        "12",
        "case2",
        t,
        extended(CaseId::Case2, |ph| manifest_check(CaseId::Case2, ph)),
    );

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all run criteria passed");
}
