use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{bail, Context, Result};
use coexist_core::harness::bundle::{read_json, write_json, REPORT_FILE};
use coexist_core::harness::layout::spread_header;
use coexist_core::harness::{
    layout_for_simulation, run_pivot, simulate as run_simulation, spread_metrics, AcquisitionPlan,
    Bundle, CopyOrder, LayoutConfig, Pause, PivotConfig, RegionLayout, RunMeta, TraceGenConfig,
};
use coexist_core::{
    check as run_check, oracle_check, AggregateStats, ConsistencyReport, ExecutionTrace, OneDimGca,
    Snapshot,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use walkdir::WalkDir;

use crate::{
    AggregateArgs, CheckArgs, PivotArgs, SimulateArgs, SpreadArgs, EXIT_DISAGREEMENT,
    EXIT_INCONSISTENT, EXIT_OK, EXIT_USAGE,
};

#[derive(Serialize)]
struct SimulateEcho<'a> {
    trace: &'a TraceGenConfig,
    plan: &'a AcquisitionPlan,
    layout: &'a LayoutConfig,
}

pub fn simulate(args: SimulateArgs) -> Result<u8> {
    let n = args.regions as usize;
    let cfg = TraceGenConfig {
        region_count: n,
        warmup_events: args.events,
        trailing_events: args.trailing,
    };
    let plan = match &args.plan {
        Some(path) => read_json::<AcquisitionPlan>(path)
            .with_context(|| format!("reading plan {}", path.display()))?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x5EED_0FA1);
            AcquisitionPlan::random(n, args.max_between, &mut rng)
        }
    };
    let layout_cfg = LayoutConfig {
        region_count: n,
        clustering: args.clustering,
    };
    let sim = run_simulation(&cfg, &plan, args.seed)?;
    let report = run_check(&sim.snapshot, &sim.gca)?;
    let bundle = Bundle {
        layout: layout_for_simulation(&layout_cfg, args.seed),
        meta: RunMeta::new(
            "simulate",
            &SimulateEcho {
                trace: &cfg,
                plan: &plan,
                layout: &layout_cfg,
            },
            args.seed,
            false,
        )?,
        trace: sim.trace,
        snapshot: sim.snapshot,
        report,
    };
    bundle
        .write(&args.out)
        .with_context(|| format!("writing bundle {}", args.out.display()))?;
    println!("{}", summary(&args.out, &bundle.report));
    Ok(EXIT_OK)
}

fn summary(dir: &Path, report: &ConsistencyReport) -> String {
    format!(
        "{}: {} (t_hat {}, {} inconsistent regions, {} missed updates)",
        dir.display(),
        if report.consistent {
            "consistent"
        } else {
            "inconsistent"
        },
        report.t_hat,
        report.inconsistency_count(),
        report.total_missed_updates()
    )
}

pub fn pivot(args: PivotArgs) -> Result<u8> {
    let base = PivotConfig {
        region_count: args.regions as usize,
        worker_threads: args.threads as usize,
        mutation_ops: args.mutation_ops,
        acquire_after: args.acquire_after,
        copy_pause: Pause::Fixed {
            micros: args.copy_pause_us,
        },
        worker_wait: Pause::Uniform {
            min_micros: 0,
            max_micros: args.wait_max_us,
        },
        copy_order: CopyOrder::Address,
        clustering: args.clustering,
        gca_capacity: None,
        seed: args.seed,
    };
    if let Err(e) = base.validate() {
        eprintln!("error: {e}");
        return Ok(EXIT_USAGE);
    }
    let configs: Vec<(PathBuf, PivotConfig)> = (0..args.runs)
        .map(|k| {
            let dir = args.out.join(format!("run-{k:03}"));
            let cfg = PivotConfig {
                seed: args.seed.wrapping_add(k),
                ..base
            };
            (dir, cfg)
        })
        .collect();
    let frozen = args.frozen;

    let results: Vec<Result<ConsistencyReport>> = if args.parallel {
        thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|(dir, cfg)| s.spawn(move || pivot_once(dir, cfg, frozen)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| bail!("pivot run panicked")))
                .collect()
        })
    } else {
        configs
            .iter()
            .map(|(dir, cfg)| pivot_once(dir, cfg, frozen))
            .collect()
    };

    let mut counts = Vec::with_capacity(results.len());
    for ((dir, _), r) in configs.iter().zip(results) {
        let report = r?;
        println!("{}", summary(dir, &report));
        counts.push(report.inconsistency_count() as u64);
    }
    let stats = AggregateStats::from_counts(counts)?;
    println!();
    println!(
        "{:<12} {:<8} {}",
        "System state",
        "Activity",
        AggregateStats::header()
    );
    println!(
        "{:<12} {:<8} {stats}",
        if frozen { "Frozen" } else { "Live" },
        format!("{} thr", args.threads)
    );
    Ok(EXIT_OK)
}

fn pivot_once(dir: &Path, cfg: &PivotConfig, frozen: bool) -> Result<ConsistencyReport> {
    let run = run_pivot(cfg, frozen)?;
    let report = run_check(&run.snapshot, &run.gca)?;
    let bundle = Bundle {
        trace: run.trace,
        snapshot: run.snapshot,
        layout: run.layout,
        report,
        meta: RunMeta::new("pivot", cfg, cfg.seed, frozen)?,
    };
    bundle
        .write(dir)
        .with_context(|| format!("writing bundle {}", dir.display()))?;
    Ok(bundle.report)
}

pub fn check(args: CheckArgs) -> Result<u8> {
    let snapshot: Snapshot = read_json(&args.snapshot)
        .with_context(|| format!("reading snapshot {}", args.snapshot.display()))?;
    let gca: OneDimGca = read_json(&args.gca)
        .with_context(|| format!("reading counter array {}", args.gca.display()))?;
    let report = run_check(&snapshot, &gca)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    if args.oracle {
        let path = args.trace.as_ref().expect("clap enforces --trace");
        let trace: ExecutionTrace =
            read_json(path).with_context(|| format!("reading trace {}", path.display()))?;
        let verdict = oracle_check(&trace, &snapshot)?;
        let witness = verdict
            .witness_time
            .map_or_else(|| "none".to_string(), |t| t.to_string());
        if verdict.consistent != report.consistent {
            eprintln!(
                "checker ({}) and oracle ({}, witness {witness}) disagree",
                report.consistent, verdict.consistent
            );
            return Ok(EXIT_DISAGREEMENT);
        }
        eprintln!("oracle agrees (witness {witness})");
    }
    Ok(if report.consistent {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    })
}

fn is_report_file(path: &Path) -> bool {
    path.file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n == REPORT_FILE || n.ends_with(".report.json"))
}

pub fn aggregate(args: AggregateArgs) -> Result<u8> {
    if !args.reports.is_dir() {
        eprintln!("error: {} is not a directory", args.reports.display());
        return Ok(EXIT_USAGE);
    }
    let mut paths = Vec::new();
    for entry in WalkDir::new(&args.reports).sort_by_file_name() {
        let entry = entry?;
        if entry.file_type().is_file() && is_report_file(entry.path()) {
            paths.push(entry.into_path());
        }
    }
    if paths.is_empty() {
        eprintln!("error: no reports under {}", args.reports.display());
        return Ok(EXIT_USAGE);
    }
    let mut counts = Vec::with_capacity(paths.len());
    for p in &paths {
        let report: ConsistencyReport =
            read_json(p).with_context(|| format!("reading report {}", p.display()))?;
        counts.push(report.inconsistency_count() as u64);
    }
    let stats = AggregateStats::from_counts(counts)?;
    let record = stats.record();
    if args.machine {
        println!("{}", serde_json::to_string(&record)?);
    } else {
        println!("{}", AggregateStats::header());
        println!("{stats}");
    }
    if let Some(out) = &args.json {
        write_json(out, &record)?;
    }
    Ok(EXIT_OK)
}

pub fn spread(args: SpreadArgs) -> Result<u8> {
    let (layout, label, inconsistencies) = match (&args.layout, &args.bundle) {
        (Some(path), _) => {
            let layout: RegionLayout =
                read_json(path).with_context(|| format!("reading layout {}", path.display()))?;
            (layout, "-".to_string(), None)
        }
        (None, Some(dir)) => {
            let bundle =
                Bundle::read(dir).with_context(|| format!("reading bundle {}", dir.display()))?;
            let label = dir
                .file_name()
                .map_or_else(|| "-".into(), |n| n.to_string_lossy().into_owned());
            (
                bundle.layout,
                label,
                Some(bundle.report.inconsistency_count()),
            )
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let m = spread_metrics(&layout)?;
    println!("{}", spread_header());
    println!("{}", m.row(&label, inconsistencies));
    Ok(EXIT_OK)
}
