//! Case pipelines end to end, plus the classification report under mutation.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ppp_core::cases::{phase_spec, run_case, seed_planes, verify_main_theorem, CaseId};
use ppp_core::feasibility::{feasibility_solve, FeasibilityProblem};
use ppp_core::golden::appendix_planes;
use ppp_core::io::{format_planes, parse_planes};
use ppp_core::iso::{build_uncolored_incidence_graph, canonical_form};
use ppp_core::search::RunOptions;
use ppp_core::{appearance_profile, check_line_sum, dedupe, is_saturated, Order, PartialPlane};

fn pipeline(c: CaseId, opts: &RunOptions) -> Vec<PartialPlane> {
    let mut cur = seed_planes(c);
    for phase in 1..=c.phase_count() {
        cur = run_case(c, phase, &cur, opts).unwrap();
    }
    cur
}

fn case1_1() -> &'static [PartialPlane] {
    static OUT: OnceLock<Vec<PartialPlane>> = OnceLock::new();
    OUT.get_or_init(|| pipeline(CaseId::Case1_1, &RunOptions::default()))
}

fn six() -> Order {
    Order::new(6).unwrap()
}

#[test]
fn case1_1_outputs_are_saturated_pure_and_distinct() {
    let out = case1_1();
    assert_eq!(out.len(), 36);
    for p in out {
        assert!(p.is_pure() && is_saturated(p));
        assert!(p.lines().iter().all(|l| check_line_sum(p, *l).unwrap()));
    }
    assert_eq!(dedupe(out, None).unwrap().len(), 36);
    assert_eq!(out.iter().filter(|p| p.size() == 25).count(), 3);
}

#[test]
fn uncolored_certificates_agree_on_case_outputs() {
    let certs: Vec<_> = case1_1()
        .iter()
        .map(|p| canonical_form(&build_uncolored_incidence_graph(p).unwrap()))
        .collect();
    let mut sorted = certs.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), certs.len());
}

#[test]
fn found_profiles_are_feasible() {
    for p in case1_1() {
        let prof = appearance_profile(p);
        let rep = feasibility_solve(&FeasibilityProblem::new(six(), p.size()..=p.size())).unwrap();
        assert!(
            rep.profiles().any(|f| (0..=7).all(|k| f.a[k] == prof.a(k))),
            "profile of size-{} output missing from feasibility report",
            p.size()
        );
    }
}

#[test]
fn worker_count_and_file_round_trip_keep_output() {
    let one = pipeline(CaseId::Case1_2, &RunOptions::workers(1));
    let four = pipeline(CaseId::Case1_2, &RunOptions::workers(4));
    let (a, b) = (
        format_planes(six(), &one).unwrap(),
        format_planes(six(), &four).unwrap(),
    );
    assert_eq!(a, b);
    let (order, back) = parse_planes(&a).unwrap();
    assert_eq!(order, six());
    assert_eq!(back, one);
    assert_eq!(one.len(), 30);
}

#[test]
fn phase_specs_exist_for_every_phase() {
    for c in CaseId::ALL {
        for k in 1..=c.phase_count() {
            assert!(phase_spec(c, k).is_ok(), "{c} phase {k}");
        }
        assert!(phase_spec(c, c.phase_count() + 1).is_err());
    }
}

fn results() -> BTreeMap<CaseId, Vec<PartialPlane>> {
    let mut m: BTreeMap<CaseId, Vec<PartialPlane>> =
        CaseId::ALL.iter().map(|c| (*c, Vec::new())).collect();
    m.insert(CaseId::Case1_1, case1_1().to_vec());
    m.insert(CaseId::Case5, vec![appendix_planes()[3].clone()]);
    m
}

fn passed(r: &ppp_core::cases::Report, name: &str) -> bool {
    r.check(name)
        .unwrap_or_else(|| panic!("no check {name}"))
        .passed
}

#[test]
fn report_accepts_the_real_top_planes() {
    let r = verify_main_theorem(&results());
    for name in [
        "all cases present",
        "max size",
        "size-25 count",
        "size-25 provenance",
        "matches bundled planes",
        "pairwise non-isomorphic",
        "case5 saturated",
    ] {
        assert!(passed(&r, name), "{name}\n{r}");
    }
    assert!(
        r.checks
            .iter()
            .filter(|c| c.name.starts_with("feasibility"))
            .all(|c| c.passed),
        "{r}"
    );
}

#[test]
fn report_notices_a_missing_top_plane() {
    let mut m = results();
    let ps = m.get_mut(&CaseId::Case1_1).unwrap();
    let i = ps.iter().position(|p| p.size() == 25).unwrap();
    ps.remove(i);
    let r = verify_main_theorem(&m);
    assert!(!r.passed());
    let c = r.check("size-25 count").unwrap();
    assert!(!c.passed);
    assert_eq!(c.detail, "expected 4 classes, found 3");
}

#[test]
fn report_notices_a_duplicated_top_plane() {
    let mut m = results();
    let ps = m.get_mut(&CaseId::Case1_1).unwrap();
    let i = ps.iter().position(|p| p.size() == 25).unwrap();
    let mut perm: Vec<usize> = (0..43).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let keep = ps[i].clone();
    let copy = keep.relabel(&perm);
    ps.retain(|p| p.size() != 25 || *p == keep);
    ps.push(copy);
    ps.push(appendix_planes()[0].clone());
    let r = verify_main_theorem(&m);
    assert!(!passed(&r, "pairwise non-isomorphic"), "{r}");
    assert!(!r.passed());
}

#[test]
fn report_notices_missing_cases() {
    let mut m = results();
    m.remove(&CaseId::Case3);
    let r = verify_main_theorem(&m);
    let c = r.check("all cases present").unwrap();
    assert!(!c.passed && c.detail.contains("case3"));
}
