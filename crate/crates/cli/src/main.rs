use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ppp_core::cases::{
    case5_marked, expectation, run_case, seed_planes, verify_main_theorem, CaseId,
};
use ppp_core::feasibility::{feasibility_solve, parse_fix, FeasibilityProblem, LinearConstraint};
use ppp_core::golden::appendix_planes;
use ppp_core::io::{import_braces, read_planes, write_planes};
use ppp_core::search::{exhaustive_small_order, RunOptions, SearchStats};
use ppp_core::{appearance_profile, dedupe, is_saturated, Order, PartialPlane, PointSet};

#[derive(Parser)]
#[command(
    name = "ppp",
    version,
    about = "Search and verify pure partial planes of small order"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the seed planes of a case.
    Seed {
        case: CaseId,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one phase of a case.
    Run {
        case: CaseId,
        #[arg(long)]
        phase: usize,
        /// Input planes; defaults to the case seeds for phase 1.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "PPP_WORKERS")]
        workers: Option<usize>,
        /// Report search counters on stderr every few seconds.
        #[arg(long)]
        progress: bool,
    },
    /// Run every phase of a case, writing `<case>-phase<k>.ppp` into a directory.
    Pipeline {
        case: CaseId,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, env = "PPP_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        progress: bool,
    },
    /// Check a plane file: purity always, other properties on request.
    Verify {
        file: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        /// Every plane must be saturated.
        #[arg(long)]
        saturated: bool,
        /// Planes must be pairwise non-isomorphic.
        #[arg(long)]
        distinct: bool,
        /// Marked points `lo..hi` kept apart when comparing planes.
        #[arg(long, value_parser = parse_range)]
        marked: Option<PointSet>,
        /// Compare with the expected output of this case phase.
        #[arg(long, requires = "phase")]
        case: Option<CaseId>,
        #[arg(long)]
        phase: Option<usize>,
    },
    /// Size census and appearance profiles of a plane file.
    Stats { file: PathBuf },
    /// Solve the appearance-count arithmetic for a size or size range.
    Feasibility {
        #[arg(long)]
        order: usize,
        /// `s` or `lo..hi` (inclusive).
        #[arg(long, value_parser = parse_sizes)]
        size: (usize, usize),
        /// `a7=1` or `a7=0..1`.
        #[arg(long)]
        fix: Vec<String>,
        /// Linear constraint such as `3*a3<=s`.
        #[arg(long)]
        constraint: Vec<String>,
        /// Every point lies on at least one line.
        #[arg(long)]
        all_points: bool,
        /// Allow points on exactly n lines.
        #[arg(long)]
        unsaturated: bool,
    },
    /// Every saturated plane of order 2 or 3 up to isomorphism.
    Oracle {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the four bundled size-25 planes.
    Golden {
        #[arg(long)]
        out: PathBuf,
    },
    /// Check final phase outputs of all cases against the classification.
    CheckMain {
        #[arg(long)]
        results_dir: PathBuf,
    },
    /// Convert brace notation `{{0,1,2},{0,3,4}}` to a plane file.
    ImportBraces {
        file: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_range(s: &str) -> Result<PointSet, String> {
    let (lo, hi) = s.split_once("..").ok_or("expected lo..hi")?;
    let lo: usize = lo.trim().parse().map_err(|_| "bad lower bound")?;
    let hi: usize = hi.trim().parse().map_err(|_| "bad upper bound")?;
    if lo > hi || hi > 128 {
        return Err(format!("bad range {s}"));
    }
    Ok(PointSet::range(lo, hi))
}

fn parse_sizes(s: &str) -> Result<(usize, usize), String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad size {t}"))
    };
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            Ok((a, b))
        }
        None => num(s).map(|v| (v, v)),
    }
}

fn six() -> Order {
    Order::new(6).expect("order 6")
}

/// Prints counters until dropped.
struct Progress {
    stop: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Progress {
    fn start(label: String, stats: Arc<SearchStats>) -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let handle = std::thread::spawn(move || {
            let t = Instant::now();
            let mut last = Instant::now();
            while !flag.load(Ordering::Relaxed) {
                std::thread::sleep(Duration::from_millis(100));
                if last.elapsed() >= Duration::from_secs(5) {
                    last = Instant::now();
                    eprintln!(
                        "{label}: {:.0}s nodes {} recorded {}",
                        t.elapsed().as_secs_f64(),
                        stats.nodes(),
                        stats.recorded()
                    );
                }
            }
        });
        Progress {
            stop,
            handle: Some(handle),
        }
    }
}

impl Drop for Progress {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn run_one(
    case: CaseId,
    phase: usize,
    inputs: &[PartialPlane],
    workers: Option<usize>,
    progress: bool,
) -> Result<Vec<PartialPlane>> {
    let stats = Arc::new(SearchStats::default());
    let opts = RunOptions {
        workers,
        stats: Some(stats.clone()),
    };
    let t = Instant::now();
    let out = {
        let _p = progress.then(|| Progress::start(format!("{case} phase {phase}"), stats.clone()));
        run_case(case, phase, inputs, &opts)?
    };
    eprintln!(
        "{case} phase {phase}: {} inputs -> {} classes ({} nodes, {} recorded, {:.1}s)",
        inputs.len(),
        out.len(),
        stats.nodes(),
        stats.recorded(),
        t.elapsed().as_secs_f64()
    );
    Ok(out)
}

fn census(planes: &[PartialPlane]) -> String {
    let mut by: BTreeMap<usize, usize> = BTreeMap::new();
    for p in planes {
        *by.entry(p.size()).or_default() += 1;
    }
    by.iter()
        .map(|(s, c)| format!("{s}:{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn read_order(file: &Path, want: Option<usize>) -> Result<(Order, Vec<PartialPlane>)> {
    let (order, planes) =
        read_planes(file).with_context(|| format!("reading {}", file.display()))?;
    if let Some(n) = want {
        if order.get() != n {
            bail!("{} has order {order}, expected {n}", file.display());
        }
    }
    Ok((order, planes))
}

/// Ok(true) when every requested check passed.
fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Seed { case, out } => {
            let seeds = seed_planes(case);
            write_planes(&out, six(), &seeds)?;
            println!("wrote {} seed planes to {}", seeds.len(), out.display());
            Ok(true)
        }
        Cmd::Run {
            case,
            phase,
            input,
            out,
            workers,
            progress,
        } => {
            let inputs = match input {
                Some(f) => read_order(&f, Some(6))?.1,
                None if phase == 1 => seed_planes(case),
                None => bail!("--in is required after phase 1"),
            };
            let planes = run_one(case, phase, &inputs, workers, progress)?;
            write_planes(&out, six(), &planes)?;
            println!("{} classes, sizes {}", planes.len(), census(&planes));
            Ok(true)
        }
        Cmd::Pipeline {
            case,
            out_dir,
            workers,
            progress,
        } => {
            std::fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            let mut cur = seed_planes(case);
            for phase in 1..=case.phase_count() {
                cur = run_one(case, phase, &cur, workers, progress)?;
                let f = out_dir.join(format!("{case}-phase{phase}.ppp"));
                write_planes(&f, six(), &cur)?;
                println!(
                    "{case} phase {phase}: {} classes, sizes {}",
                    cur.len(),
                    census(&cur)
                );
            }
            Ok(true)
        }
        Cmd::Verify {
            file,
            order,
            saturated,
            distinct,
            marked,
            case,
            phase,
        } => {
            let (order, planes) = read_order(&file, order)?;
            println!("{} pure planes of order {order}", planes.len());
            let mut ok = true;
            if saturated {
                let bad: Vec<usize> = (0..planes.len())
                    .filter(|&i| !is_saturated(&planes[i]))
                    .collect();
                if bad.is_empty() {
                    println!("PASS saturated");
                } else {
                    println!("FAIL saturated: planes {bad:?} admit another line");
                    ok = false;
                }
            }
            let marked = marked.or_else(|| (case == Some(CaseId::Case5)).then(case5_marked));
            if distinct {
                let classes = dedupe(&planes, marked)?.len();
                if classes == planes.len() {
                    println!("PASS distinct: {classes} classes");
                } else {
                    println!(
                        "FAIL distinct: {} planes in {classes} classes",
                        planes.len()
                    );
                    ok = false;
                }
            }
            if let (Some(c), Some(k)) = (case, phase) {
                match expectation(c, k) {
                    None => println!("no expectation recorded for {c} phase {k}"),
                    Some(e) => {
                        let bad = e.mismatches(&planes);
                        if bad.is_empty() {
                            println!("PASS {c} phase {k}");
                        } else if e.strict {
                            println!("FAIL {c} phase {k}: {}", bad.join("; "));
                            ok = false;
                        } else {
                            println!("NOTE {c} phase {k} (soft): {}", bad.join("; "));
                        }
                    }
                }
            }
            Ok(ok)
        }
        Cmd::Stats { file } => {
            let (order, planes) = read_order(&file, None)?;
            println!(
                "order {order}, {} planes, sizes {}",
                planes.len(),
                census(&planes)
            );
            let sat = planes.iter().filter(|p| is_saturated(p)).count();
            println!("saturated {sat}");
            let mut profiles: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            for p in &planes {
                let a = appearance_profile(p);
                let v: Vec<usize> = (0..=order.get() + 1).map(|k| a.a(k)).collect();
                *profiles.entry((p.size(), v)).or_default() += 1;
            }
            for ((s, v), c) in profiles {
                let terms: Vec<String> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| **x > 0)
                    .map(|(k, x)| format!("a{k}={x}"))
                    .collect();
                println!("s={s} {} x{c}", terms.join(" "));
            }
            Ok(true)
        }
        Cmd::Feasibility {
            order,
            size,
            fix,
            constraint,
            all_points,
            unsaturated,
        } => {
            let mut prob = FeasibilityProblem::new(Order::new(order)?, size.0..=size.1);
            for f in &fix {
                let (k, r) = parse_fix(f)?;
                prob = prob.fix_range(k, r);
            }
            for c in &constraint {
                prob = prob.constraint(c.parse::<LinearConstraint>()?);
            }
            if all_points {
                prob = prob.all_points_appear();
            }
            if unsaturated {
                prob = prob.unsaturated();
            }
            let rep = feasibility_solve(&prob)?;
            for o in &rep.outcomes {
                match &o.infeasible {
                    Some(stage) => println!("s={} INFEASIBLE {stage}", o.size),
                    None => {
                        for p in &o.profiles {
                            println!("{p}");
                        }
                    }
                }
            }
            if rep.is_infeasible() {
                println!("INFEASIBLE for every size in {}..={}", size.0, size.1);
            }
            Ok(true)
        }
        Cmd::Oracle { order, out } => {
            let planes = exhaustive_small_order(order)?;
            println!("{} classes, sizes {}", planes.len(), census(&planes));
            if let Some(f) = out {
                write_planes(&f, Order::new(order)?, &planes)?;
            }
            Ok(true)
        }
        Cmd::Golden { out } => {
            let planes = appendix_planes();
            write_planes(&out, six(), &planes)?;
            println!("wrote {} planes to {}", planes.len(), out.display());
            Ok(true)
        }
        Cmd::CheckMain { results_dir } => {
            let mut results = BTreeMap::new();
            for c in CaseId::ALL {
                let f = results_dir.join(format!("{c}-phase{}.ppp", c.phase_count()));
                if f.exists() {
                    results.insert(c, read_order(&f, Some(6))?.1);
                } else {
                    eprintln!("missing {}", f.display());
                }
            }
            let report = verify_main_theorem(&results);
            println!("{report}");
            Ok(report.passed())
        }
        Cmd::ImportBraces { file, order, out } => {
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let order = Order::new(order)?;
            let planes = import_braces(&text, order)?;
            write_planes(&out, order, &planes)?;
            println!("imported {} planes", planes.len());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
