use std::sync::Arc;
use std::time::Instant;

use ppp_core::cases::{run_case, seed_planes, CaseId};
use ppp_core::search::{RunOptions, SearchStats};

fn main() {
    let case: CaseId = std::env::args()
        .nth(1)
        .unwrap_or("case1-1".into())
        .parse()
        .unwrap();
    let last: usize = std::env::args()
        .nth(2)
        .map_or(case.phase_count(), |s| s.parse().unwrap());
    let mut planes = seed_planes(case);
    for phase in 1..=last {
        let stats = Arc::new(SearchStats::default());
        let opts = RunOptions {
            workers: None,
            stats: Some(stats.clone()),
        };
        let t = Instant::now();
        let s2 = stats.clone();
        std::thread::spawn(move || loop {
            std::thread::sleep(std::time::Duration::from_secs(5));
            eprintln!("  nodes {} recorded {}", s2.nodes(), s2.recorded());
        });
        planes = run_case(case, phase, &planes, &opts).unwrap();
        let mut sizes: Vec<usize> = planes.iter().map(|p| p.size()).collect();
        sizes.sort();
        println!(
            "{case} phase {phase}: {} classes in {:?}, nodes {}, recorded {}, sizes {:?}",
            planes.len(),
            t.elapsed(),
            stats.nodes(),
            stats.recorded(),
            sizes
        );
    }
}
