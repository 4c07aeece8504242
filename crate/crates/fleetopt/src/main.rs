//! Command-line entry point wiring the solvers and the telemetry pipeline.
//!
//! Exit codes: 0 on success, 1 when a solver reports infeasibility or a
//! validation finds violations, 2 on usage and input errors.

use clap::{Parser, Subcommand, ValueEnum};
use fleetopt::anneal::{anneal, anneal_traced, AnnealConfig};
use fleetopt::error::FleetError;
use fleetopt::exact::{build_milp, export_lp, solve_exact};
use fleetopt::feasibility::{solution_cost, validate_solution};
use fleetopt::greedy::{greedy_assign, GreedyConfig};
use fleetopt::model::{
    generate_instance, ingest_gtfs, load_instance, load_solution_record, save_instance,
    save_solution_record, DeadheadSource, EnergySource, FleetProfile, Instance, Solution,
    SolutionRecord, VehicleKind,
};
use fleetopt::pipeline::{
    clean_and_label, evaluate_matching, fit_ols, make_samples, map_match, predict_trip_energy,
    read_samples_csv, read_trace_csv, write_samples_csv, CleanConfig, LinearModel, MatchConfig,
    NetworkGeometry, RoadNetwork, SegmentFeatures, TrafficSeries, WeatherSeries,
    DEFAULT_JOIN_HORIZON_S,
};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fleetopt", version, about = "Mixed-fleet transit assignment, EV charging scheduling, and telemetry-driven energy models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Greedy,
    Sa,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Electric,
    LiquidFuel,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic instance.
    Generate {
        #[arg(long, default_value_t = 1)]
        lines: u32,
        #[arg(long = "trips-per-line", default_value_t = 10)]
        trips_per_line: u32,
        #[arg(long, default_value_t = 3)]
        evs: u32,
        #[arg(long = "icev-factor", default_value_t = 5)]
        icev_factor: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build an instance from static GTFS files plus a fleet profile.
    IngestGtfs {
        /// Directory containing trips.txt, stop_times.txt, stops.txt.
        gtfs_dir: PathBuf,
        /// Deadhead duration matrix JSON, or "haversine" for the fallback.
        #[arg(long, default_value = "haversine")]
        deadhead: String,
        /// JSON map of model id to kWh per km.
        #[arg(long = "energy-constants", conflicts_with = "calibration")]
        energy_constants: Option<PathBuf>,
        /// JSON map of model id to a calibrated linear model.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Fleet profile JSON; a small mixed fleet is assumed when absent.
        #[arg(long)]
        fleet: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve an instance with the chosen algorithm.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(short, long)]
        output: PathBuf,
        /// Layover penalty in kWh per second.
        #[arg(long, default_value_t = 0.0005)]
        alpha: f64,
        #[arg(long = "charging-floor", default_value_t = 0.0)]
        charging_floor: f64,
        #[arg(long = "k-max", default_value_t = 10_000)]
        k_max: u32,
        #[arg(long = "p-start", default_value_t = 0.7)]
        p_start: f64,
        #[arg(long = "p-end", default_value_t = 0.001)]
        p_end: f64,
        #[arg(long = "p-swap", default_value_t = 0.02)]
        p_swap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent seeded annealing runs; the cheapest wins.
        #[arg(long, default_value_t = 1)]
        restarts: u32,
        #[arg(long = "time-limit", default_value_t = 60.0)]
        time_limit: f64,
        /// Write the per-iteration annealing trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record measured wall time in the solution file (breaks
        /// byte-for-byte reproducibility between runs).
        #[arg(long)]
        timings: bool,
        /// Write the exact solver's certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Check a solution against an instance; violations exit with code 1.
    Validate { instance: PathBuf, solution: PathBuf },
    /// Export the instance's integer program in LP format.
    ExportLp {
        instance: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Map-match a telemetry trace onto a road network.
    Match {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Matching accuracy under synthetic location noise.
    MatchEval {
        /// Road network JSON; a synthetic grid is used when absent.
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long = "grid-ways", default_value_t = 50)]
        grid_ways: usize,
        #[arg(long, default_value_t = 10)]
        routes: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Comma-separated noise standard deviations in meters.
        #[arg(long, value_delimiter = ',', default_value = "1.1,20,60,100,140")]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Clean a trace, label energy, match it, and cut per-segment samples.
    Samples {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        weather: Option<PathBuf>,
        #[arg(long)]
        traffic: Option<PathBuf>,
        #[arg(long, default_value_t = 100.0)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_JOIN_HORIZON_S)]
        horizon: i64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fit the linear energy model on a samples CSV.
    Calibrate {
        samples: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Predict trip energy from ordered segment features.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Segment features in the samples CSV format (label column ignored).
        #[arg(long)]
        segments: PathBuf,
    },
    /// Compare greedy and annealing costs against the exact optimum.
    Report {
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "time-limit", default_value_t = 60.0)]
        time_limit: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Failures that warrant exit code 1 rather than 2.
fn is_infeasibility(err: &FleetError) -> bool {
    matches!(
        err,
        FleetError::Infeasible { .. }
            | FleetError::ChargingRepairFailed { .. }
            | FleetError::SearchInfeasible { .. }
            | FleetError::TimeLimit
            | FleetError::NeighborExhausted { .. }
    )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("FLEETOPT_LOG")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if is_infeasibility(&err) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, FleetError> {
    match command {
        Command::Generate { lines, trips_per_line, evs, icev_factor, seed, output } => {
            let instance = generate_instance(lines, trips_per_line, evs, icev_factor, seed);
            save_instance(&instance, &output)?;
            println!(
                "generated {} trips, {} vehicles -> {}",
                instance.trips.len(),
                instance.vehicles.len(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::IngestGtfs { gtfs_dir, deadhead, energy_constants, calibration, fleet, output } => {
            let deadhead = if deadhead == "haversine" {
                DeadheadSource::Haversine
            } else {
                DeadheadSource::MatrixFile(PathBuf::from(deadhead))
            };
            let energy = match (energy_constants, calibration) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
                    let constants: BTreeMap<String, f64> = serde_json::from_str(&text)
                        .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
                    EnergySource::Constants(constants)
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
                    let models: BTreeMap<String, LinearModel> = serde_json::from_str(&text)
                        .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
                    EnergySource::Calibration(models)
                }
                _ => {
                    return Err(FleetError::Validation(
                        "exactly one of --energy-constants or --calibration is required".into(),
                    ))
                }
            };
            let fleet = match fleet {
                Some(path) => FleetProfile::load(path)?,
                None => FleetProfile::default_mixed(),
            };
            let instance = ingest_gtfs(&gtfs_dir, &deadhead, &energy, &fleet)?;
            save_instance(&instance, &output)?;
            println!("ingested {} trips -> {}", instance.trips.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            instance,
            algo,
            output,
            alpha,
            charging_floor,
            k_max,
            p_start,
            p_end,
            p_swap,
            seed,
            restarts,
            time_limit,
            trace,
            timings,
            certificate,
        } => {
            let instance = load_instance(&instance)?;
            let greedy_cfg = GreedyConfig { alpha, charging_safety_floor_kwh: charging_floor };
            let started = Instant::now();
            let (solution, algorithm) = match algo {
                Algo::Greedy => (greedy_assign(&instance, &greedy_cfg)?, "greedy"),
                Algo::Sa => {
                    let base =
                        AnnealConfig { k_max, p_start, p_end, p_swap, seed, ..Default::default() };
                    (solve_sa(&instance, &base, &greedy_cfg, restarts, trace.as_deref())?, "sa")
                }
                Algo::Exact => {
                    let outcome = solve_exact(&instance, time_limit)?;
                    let cert = serde_json::to_string_pretty(&outcome.certificate())
                        .expect("certificate serializes");
                    println!("{cert}");
                    if let Some(path) = &certificate {
                        std::fs::write(path, format!("{cert}\n"))
                            .map_err(|e| FleetError::io(path.display().to_string(), e))?;
                    }
                    (outcome.solution, "exact")
                }
            };
            let cost = solution_cost(&instance, &solution);
            let mut record = SolutionRecord::new(&solution, cost, algorithm, seed);
            if timings {
                record.wall_time_ms = Some(started.elapsed().as_millis() as u64);
            }
            save_solution_record(&record, &output)?;
            println!("{algorithm} cost {:.6} -> {}", record.cost, output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance, solution } => {
            let instance = load_instance(&instance)?;
            let record = load_solution_record(&solution)?;
            let report = validate_solution(&instance, &record.solution());
            if report.is_empty() {
                println!("ok: solution is feasible and complete");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{}", report.to_json());
                Ok(ExitCode::from(1))
            }
        }
        Command::ExportLp { instance, output } => {
            let instance = load_instance(&instance)?;
            let model = build_milp(&instance)?;
            export_lp(&model, &output)?;
            println!(
                "wrote {} variables, {} constraints -> {}",
                model.vars.len(),
                model.constraints.len(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Match { network, trace, radius, window, output } => {
            let network = RoadNetwork::load(&network)?;
            let points = read_trace_csv(&trace)?;
            let cfg = MatchConfig { radius_m: radius, window, ..Default::default() };
            let locations: Vec<(f64, f64)> = points.iter().map(|p| (p.lat, p.lon)).collect();
            let matched = map_match(&network, &locations, &cfg)?;
            let mut out = String::from("ts_s,lat,lon,segment_id\n");
            for (point, segment) in points.iter().zip(&matched) {
                out.push_str(&format!(
                    "{},{:.6},{:.6},{}\n",
                    point.ts_s,
                    point.lat,
                    point.lon,
                    segment.as_deref().unwrap_or("")
                ));
            }
            std::fs::write(&output, out)
                .map_err(|e| FleetError::io(output.display().to_string(), e))?;
            let hits = matched.iter().filter(|m| m.is_some()).count();
            println!("matched {hits}/{} points -> {}", matched.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::MatchEval {
            network,
            grid_ways,
            routes,
            points,
            sigmas,
            seed,
            radius,
            window,
            output,
        } => {
            let network = match network {
                Some(path) => RoadNetwork::load(&path)?,
                None => RoadNetwork::grid(grid_ways, 450.0),
            };
            let cfg = MatchConfig { radius_m: radius, window, ..Default::default() };
            let rows = evaluate_matching(&network, routes, points, &sigmas, seed, &cfg)?;
            let mut text = String::from("sigma,accuracy\n");
            for (sigma, accuracy) in &rows {
                text.push_str(&format!("{sigma:.6},{accuracy:.6}\n"));
            }
            match &output {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| FleetError::io(path.display().to_string(), e))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Samples {
            network,
            trace,
            kind,
            weather,
            traffic,
            radius,
            window,
            horizon,
            output,
        } => {
            let network = RoadNetwork::load(&network)?;
            let geometry = NetworkGeometry::new(&network)?;
            let raw = read_trace_csv(&trace)?;
            let kind = match kind {
                Kind::Electric => VehicleKind::Electric,
                Kind::LiquidFuel => VehicleKind::LiquidFuel,
            };
            let cleaned = clean_and_label(&raw, kind, &CleanConfig::default())?;
            let cfg = MatchConfig { radius_m: radius, window, ..Default::default() };
            let locations: Vec<(f64, f64)> =
                cleaned.points.iter().map(|p| (p.lat, p.lon)).collect();
            let matched = map_match(&network, &locations, &cfg)?;
            let weather = weather.map(WeatherSeries::load).transpose()?;
            let traffic = traffic.map(TrafficSeries::load).transpose()?;
            let samples = make_samples(
                &geometry,
                &cleaned.points,
                &matched,
                &cleaned.point_energies,
                weather.as_ref(),
                traffic.as_ref(),
                horizon,
            )?;
            write_samples_csv(&samples, &output)?;
            println!("cut {} samples -> {}", samples.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Calibrate { samples, output } => {
            let samples = read_samples_csv(&samples)?;
            let model = fit_ols(&samples)?;
            model.save(&output)?;
            println!(
                "fit {} features, training mse {:.6} -> {}",
                model.features.len(),
                model.mse,
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { model, segments } => {
            let model = LinearModel::load(&model)?;
            let rows = read_samples_csv(&segments)?;
            let features: Vec<SegmentFeatures> = rows.iter().map(SegmentFeatures::from).collect();
            let energy = predict_trip_energy(&model, &features)?;
            println!("{energy:.6}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { instances, seed, time_limit, output } => {
            if instances.is_empty() {
                return Err(FleetError::Validation("report needs at least one instance".into()));
            }
            let mut text = String::from(
                "instance,exact_cost,exact_optimal,greedy_cost,sa_cost,greedy_pct,sa_pct\n",
            );
            for path in &instances {
                let instance = load_instance(path)?;
                let greedy_cfg = GreedyConfig::default();
                let exact = solve_exact(&instance, time_limit)?;
                let greedy = greedy_assign(&instance, &greedy_cfg)?;
                let sa_cfg = AnnealConfig { seed, ..Default::default() };
                let annealed = anneal(&instance, &sa_cfg, &greedy_cfg)?;
                let greedy_cost = solution_cost(&instance, &greedy);
                let sa_cost = solution_cost(&instance, &annealed);
                text.push_str(&format!(
                    "{},{:.6},{},{:.6},{:.6},{:.6},{:.6}\n",
                    path.display(),
                    exact.cost,
                    exact.optimal,
                    greedy_cost,
                    sa_cost,
                    100.0 * greedy_cost / exact.cost,
                    100.0 * sa_cost / exact.cost,
                ));
            }
            std::fs::write(&output, text)
                .map_err(|e| FleetError::io(output.display().to_string(), e))?;
            println!("report for {} instances -> {}", instances.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Runs `restarts` independently seeded annealings (concurrently with the
/// parallel feature) and keeps the cheapest result; ties go to the lowest
/// seed so output stays deterministic.
fn solve_sa(
    instance: &Instance,
    base: &AnnealConfig,
    greedy_cfg: &GreedyConfig,
    restarts: u32,
    trace: Option<&std::path::Path>,
) -> Result<Solution, FleetError> {
    if restarts <= 1 {
        return match trace {
            None => anneal(instance, base, greedy_cfg),
            Some(path) => {
                let (solution, rows) = anneal_traced(instance, base, greedy_cfg)?;
                let mut text = String::from("iteration,tau,delta_e,accepted,best_cost\n");
                for row in rows {
                    text.push_str(&format!(
                        "{},{:.6},{:.6},{},{:.6}\n",
                        row.iteration, row.tau, row.delta_e, row.accepted, row.best_cost
                    ));
                }
                std::fs::write(path, text)
                    .map_err(|e| FleetError::io(path.display().to_string(), e))?;
                Ok(solution)
            }
        };
    }
    let outcomes = fleetopt::par::map_indexed(restarts as usize, |offset| {
        let cfg = AnnealConfig { seed: base.seed + offset as u64, ..*base };
        anneal(instance, &cfg, greedy_cfg).map(|solution| {
            let cost = solution_cost(instance, &solution);
            (cost, offset, solution)
        })
    });
    let mut best: Option<(f64, usize, Solution)> = None;
    for outcome in outcomes {
        let (cost, offset, solution) = outcome?;
        let better = match &best {
            None => true,
            Some((c, o, _)) => cost < *c || (cost == *c && offset < *o),
        };
        if better {
            best = Some((cost, offset, solution));
        }
    }
    Ok(best.expect("restarts >= 1").2)
}
