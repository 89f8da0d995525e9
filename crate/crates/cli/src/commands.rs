use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use riot_core::frontier::{read_objectives, FrontierDoc};
use riot_core::metrics::{nondominated, Bounds, IgdDirection, MetricsError, ObjectivePoint};
use riot_core::riot::default_eta_grid;
use riot_core::sim::ScheduleDoc;
use riot_core::workflow::{generate, parse_dax, parse_json, to_json, Shape};
use riot_core::{
    default_catalog, heft_schedule, hypervolume, igd, load_catalog, normalize, random_search, riot_schedule, rng,
    spread, Budget, Catalog, EventSimulator, RiotError, RiotParams, RunMeta, ScheduleFrontier, Workflow, VERSION,
};

use crate::{config, Algo, CompareArgs, Format, GenArgs, ScheduleArgs, SimulateArgs};

/// Marks errors caused by the user's input (exit code 2).
#[derive(Debug)]
pub struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input(msg: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.to_string()))
}

pub fn is_input_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| e.is::<InputError>())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    s.into()
}

fn load_workflow(path: &Path) -> Result<Workflow> {
    let text = read(path)?;
    let parsed = if text.trim_start().starts_with('<') {
        parse_dax(&text)
    } else {
        parse_json(&text)
    };
    parsed.map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_catalog_arg(path: Option<&Path>) -> Result<Catalog> {
    match path {
        None => Ok(default_catalog()),
        Some(p) => load_catalog(&read(p)?).map_err(|e| input(format!("{}: {e}", p.display()))),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

pub fn gen(args: GenArgs) -> Result<()> {
    let shape: Shape = args.shape.parse().map_err(input)?;
    let seed = resolve_seed(args.seed);
    let wf = generate(shape, args.n, seed).map_err(input)?;
    let json = to_json(&wf);
    match args.out {
        Some(path) => write(&path, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

pub fn schedule(args: ScheduleArgs) -> Result<()> {
    let args = match &args.config {
        Some(path) => {
            let file = config::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
            config::merge(args, file)
        }
        None => args,
    };
    let workflow = load_workflow(&args.workflow)?;
    let catalog = load_catalog_arg(args.catalog.as_deref())?;
    let algo = args.algo.unwrap_or(Algo::Riot);
    let seed = resolve_seed(args.seed);
    let simulator = EventSimulator::new(&catalog);

    let started = Instant::now();
    let (frontier, simulations): (ScheduleFrontier, usize) = match algo {
        Algo::Riot => {
            let defaults = RiotParams::default();
            let params = RiotParams {
                n_random: args.n_random.unwrap_or(defaults.n_random),
                n_anchor_extra: args.n_anchor.unwrap_or(defaults.n_anchor_extra),
                eta_grid: args.eta_grid.clone().unwrap_or_else(default_eta_grid),
                seed,
                keep_anchors: args.keep_anchors,
                ..defaults
            };
            let out = riot_schedule(&workflow, &params, &simulator).map_err(|e| match e {
                RiotError::InvalidParams(_) => input(e),
                other => anyhow::Error::new(other),
            })?;
            (out.frontier, out.simulations)
        }
        Algo::Random => {
            let budget = Budget::new(args.budget.unwrap_or(760)).map_err(input)?;
            let frontier = random_search(&workflow, budget, &simulator, &mut rng::stream(seed, 0))?;
            (frontier, budget.max_simulations())
        }
        Algo::Heft => (heft_schedule(&workflow, &simulator)?, 1),
    };
    let wall = started.elapsed().as_secs_f64();

    let meta = RunMeta {
        algorithm: format!("{algo:?}").to_lowercase(),
        seed: Some(seed),
        catalog_sha256: catalog.fingerprint(),
        version: VERSION.to_string(),
        simulations,
        wall_time_s: wall,
    };
    let csv = frontier.to_csv();
    let json = serde_json::to_string_pretty(&frontier.to_doc(&workflow, meta))?;
    let summary = format!(
        "points={} best_makespan_s={} best_cost_usd={} simulations={} wall_time_s={:.3}",
        frontier.len(),
        frontier.points.iter().map(|p| p.makespan).fold(f64::INFINITY, f64::min),
        frontier.points.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min),
        simulations,
        wall
    );
    match &args.out {
        Some(prefix) => {
            write(&with_suffix(prefix, ".csv"), &csv)?;
            write(&with_suffix(prefix, ".json"), &json)?;
            println!("{summary}");
        }
        None => {
            match args.format.unwrap_or(Format::Csv) {
                Format::Csv => print!("{csv}"),
                Format::Json => println!("{json}"),
            }
            eprintln!("{summary}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateReport {
    version: &'static str,
    catalog_sha256: String,
    #[serde(flatten)]
    evaluation: riot_core::sim::EvaluationDoc,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let workflow = load_workflow(&args.workflow)?;
    let catalog = load_catalog_arg(args.catalog.as_deref())?;
    let text = read(&args.schedule)?;
    let bad = |e: &dyn fmt::Display| input(format!("{}: {e}", args.schedule.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
    let doc: ScheduleDoc = if value.get("points").is_some() {
        let frontier: FrontierDoc = serde_json::from_value(value).map_err(|e| bad(&e))?;
        let n = frontier.points.len();
        frontier
            .points
            .into_iter()
            .nth(args.point)
            .ok_or_else(|| bad(&format!("point {} requested but the frontier has {n}", args.point)))?
            .schedule
    } else {
        serde_json::from_value(value).map_err(|e| bad(&e))?
    };
    let schedule = doc.resolve(&workflow).map_err(|e| bad(&e))?;
    let ev = riot_core::simulate(&workflow, &schedule, &catalog).map_err(|e| bad(&e))?;
    let report = SimulateReport {
        version: VERSION,
        catalog_sha256: catalog.fingerprint(),
        evaluation: ev.to_doc(&workflow, &schedule, &catalog),
    };
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => write(path, &json)?,
        None => println!("{json}"),
    }
    println!("makespan_s={} cost_usd={}", ev.makespan, ev.cost);
    Ok(())
}

#[derive(Serialize)]
struct CompareReport {
    version: &'static str,
    igd_direction: IgdDirection,
    bounds: Bounds,
    reference_points: usize,
    inputs: Vec<CompareRow>,
}

#[derive(Serialize)]
struct CompareRow {
    path: String,
    /// Metadata of JSON frontier reports (seed, catalog hash, tool version).
    meta: Option<RunMeta>,
    n_points: usize,
    hypervolume: f64,
    igd: f64,
    /// `None` when the frontier has fewer than two points.
    spread: Option<f64>,
}

/// Widens a zero-width range so a single shared point still normalizes.
fn widen((lo, hi): (f64, f64)) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + lo.abs().max(1.0))
    }
}

pub fn compare(args: CompareArgs) -> Result<()> {
    let mut inputs: Vec<(PathBuf, Option<RunMeta>, Vec<ObjectivePoint>)> = Vec::new();
    for path in &args.frontiers {
        let text = read(path)?;
        let points = read_objectives(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        if points.is_empty() {
            return Err(input(format!("{}: frontier has no points", path.display())));
        }
        let meta = serde_json::from_str::<FrontierDoc>(&text).ok().map(|d| d.meta);
        inputs.push((path.clone(), meta, points));
    }
    let mut bounds = Bounds::from_union(inputs.iter().map(|(_, _, p)| p.as_slice()))?;
    bounds.makespan = widen(bounds.makespan);
    bounds.cost = widen(bounds.cost);
    let direction = if args.igd_from_frontier {
        IgdDirection::FrontierToReference
    } else {
        IgdDirection::ReferenceToFrontier
    };

    let union: Vec<ObjectivePoint> = inputs.iter().flat_map(|(_, _, p)| p.iter().cloned()).collect();
    let reference = normalize(&nondominated(&union)?, &bounds)?.points;
    let mut rows = Vec::new();
    for (path, meta, points) in inputs {
        let norm = normalize(&points, &bounds)?.points;
        rows.push(CompareRow {
            path: path.display().to_string(),
            meta,
            n_points: points.len(),
            hypervolume: hypervolume(&norm)?,
            igd: igd(&norm, &reference, direction)?,
            spread: match spread(&norm) {
                Ok(s) => Some(s),
                Err(MetricsError::NotEnoughPoints(_)) => None,
                Err(e) => return Err(e.into()),
            },
        });
    }

    println!("{:<40} {:>8} {:>12} {:>12} {:>12}", "frontier", "points", "hypervolume", "igd", "spread");
    for r in &rows {
        let spread = r.spread.map_or_else(|| "n.a.".to_string(), |s| format!("{s:.6}"));
        println!(
            "{:<40} {:>8} {:>12.6} {:>12.6} {:>12}",
            r.path, r.n_points, r.hypervolume, r.igd, spread
        );
    }
    let report = CompareReport {
        version: VERSION,
        igd_direction: direction,
        bounds,
        reference_points: reference.len(),
        inputs: rows,
    };
    if let Some(path) = &args.out {
        write(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}
