//! Acceptance gate: every criterion below prints one PASS line; failures
//! abort with the offending numbers. Run with
//! `cargo test -p fleetopt --test acceptance -- --nocapture` to see the lines.

mod common;

use common::{
    brute_force_best, charging_needed_instance, synthetic_discharge_trace, tiny_random_instance,
};
use fleetopt::anneal::{accept_probability, anneal, AnnealConfig, Schedule};
use fleetopt::exact::{build_milp, models_equal, parse_lp, solve_exact, write_lp};
use fleetopt::feasibility::{solution_cost, validate_solution, ViolationKind};
use fleetopt::greedy::{greedy_assign, GreedyConfig};
use fleetopt::model::{generate_instance, load_instance, VehicleKind};
use fleetopt::pipeline::{
    clean_and_label, evaluate_matching, fit_ols, predict_trip_energy, CleanConfig, EnergySample,
    MatchConfig, RoadNetwork, SegmentFeatures,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::time::Instant;

fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Criterion 1: optimality-gap envelope on 20 generated instances.
#[test]
fn acceptance_1_optimality_gap_envelope() {
    let greedy_cfg = GreedyConfig::default();
    let mut within = 0usize;
    let mut total = 0usize;
    for seed in 1..=20u64 {
        let lines = if seed <= 10 { 1 } else { 2 };
        let instance = generate_instance(lines, 10, 3, 5 * lines, seed);
        let started = Instant::now();
        let exact = solve_exact(&instance, 60.0).expect("exact solvable");
        let exact_elapsed = started.elapsed().as_secs_f64();
        assert!(exact.optimal, "seed {seed}: exact must certify optimality");
        assert!(exact_elapsed <= 60.0, "seed {seed}: exact took {exact_elapsed:.1}s");

        let greedy = greedy_assign(&instance, &greedy_cfg).expect("greedy solvable");
        let sa_cfg = AnnealConfig { seed, ..Default::default() };
        let annealed = anneal(&instance, &sa_cfg, &greedy_cfg).expect("sa solvable");

        let greedy_cost = solution_cost(&instance, &greedy);
        let sa_cost = solution_cost(&instance, &annealed);
        assert!(
            sa_cost <= greedy_cost + 1e-9,
            "seed {seed}: sa {sa_cost} must not exceed greedy {greedy_cost}"
        );
        assert!(greedy_cost >= exact.cost - 1e-9, "seed {seed}: greedy beat the optimum");

        total += 1;
        let greedy_ratio = greedy_cost / exact.cost;
        let sa_ratio = sa_cost / exact.cost;
        if greedy_ratio <= 1.6 && sa_ratio <= 1.6 {
            within += 1;
        }
    }
    assert!(
        within * 10 >= total * 9,
        "only {within}/{total} instances within the 1.6 gap envelope"
    );
    println!(
        "ACCEPTANCE 1 PASS: greedy and sa within 1.6x of exact on {within}/{total} instances, sa <= greedy on all"
    );
}

/// Criterion 2: branch-and-bound equals the no-pruning enumeration oracle.
#[test]
fn acceptance_2_pruning_soundness() {
    let mut feasible = 0usize;
    for seed in 1..=10u64 {
        let instance = tiny_random_instance(seed);
        let oracle = brute_force_best(&instance);
        let solved = solve_exact(&instance, 30.0);
        match (oracle, solved) {
            (Some((oracle_cost, _)), Ok(outcome)) => {
                assert!(outcome.optimal, "seed {seed}: search must complete");
                assert!(
                    (outcome.cost - oracle_cost).abs() < 1e-9,
                    "seed {seed}: exact {} vs oracle {oracle_cost}",
                    outcome.cost
                );
                let report = validate_solution(&instance, &outcome.solution);
                assert!(report.is_empty(), "seed {seed}: {}", report.to_json());
                feasible += 1;
            }
            (None, Err(_)) => {}
            (oracle, solved) => {
                panic!("seed {seed}: oracle {oracle:?} disagrees with solver {solved:?}")
            }
        }
    }
    println!(
        "ACCEPTANCE 2 PASS: exact matches the enumeration oracle on 10 random tiny instances ({feasible} feasible)"
    );
}

/// Criterion 3: randomized solution mutations always trigger the right
/// violation kind.
#[test]
fn acceptance_3_constraint_suite() {
    let greedy_cfg = GreedyConfig::default();
    let bases: Vec<_> = (101..=104u64)
        .map(|seed| {
            let instance = generate_instance(2, 10, 3, 10, seed);
            let solution = greedy_assign(&instance, &greedy_cfg).expect("solvable");
            (instance, solution)
        })
        .collect();
    let charging_instance = charging_needed_instance();
    let charging_solution =
        greedy_assign(&charging_instance, &greedy_cfg).expect("charging instance solvable");
    assert!(
        !charging_solution.charging_assignments.is_empty(),
        "fixture must rely on charging"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000u32 {
        let kind = case % 4;
        if kind == 3 {
            // Drain the battery: drop every charging assignment.
            let mut mutated = charging_solution.clone();
            mutated.charging_assignments.clear();
            let report = validate_solution(&charging_instance, &mutated);
            assert!(
                report.has_kind(ViolationKind::BatteryUnderflow),
                "case {case}: draining must underflow: {}",
                report.to_json()
            );
            continue;
        }
        let (instance, solution) = &bases[rng.random_range(0..bases.len())];
        let assignments: Vec<(String, String)> =
            solution.trip_assignments.iter().cloned().collect();
        let (owner, trip) = assignments[rng.random_range(0..assignments.len())].clone();
        let mut mutated = solution.clone();
        let expected = match kind {
            0 => {
                mutated.trip_assignments.remove(&(owner, trip));
                ViolationKind::UnassignedTrip
            }
            1 => {
                let other = instance
                    .vehicles
                    .iter()
                    .map(|v| v.id.clone())
                    .find(|v| *v != owner)
                    .expect("second vehicle exists");
                mutated.trip_assignments.insert((other, trip));
                ViolationKind::DoubleAssignedTrip
            }
            _ => {
                // Move a trip onto the vehicle serving a time-overlapping
                // trip; parallel lines guarantee one exists.
                let t = instance.trip(&trip).expect("trip exists");
                let overlapping = instance
                    .trips
                    .iter()
                    .find(|o| o.id != t.id && o.start_s < t.end_s && t.start_s < o.end_s)
                    .expect("generated lines overlap");
                let other_owner = solution.vehicle_of_trip(&overlapping.id).unwrap().to_string();
                if other_owner == owner {
                    // Same vehicle would mean the base was infeasible.
                    unreachable!("base solutions are feasible");
                }
                mutated.trip_assignments.remove(&(owner, trip.clone()));
                mutated.trip_assignments.insert((other_owner, trip));
                ViolationKind::TimeInfeasiblePair
            }
        };
        let report = validate_solution(instance, &mutated);
        assert!(
            report.has_kind(expected),
            "case {case}: expected {expected:?}, got {}",
            report.to_json()
        );
    }
    println!("ACCEPTANCE 3 PASS: 1000 solution mutations each triggered the expected violation kind");
}

/// Criterion 4: annealing schedule endpoints and tabulated acceptance
/// probabilities.
#[test]
fn acceptance_4_sa_schedule_math() {
    let schedule = Schedule::new(0.7, 0.001, 10_000);
    let tau_start_expect = -1.0 / 0.7_f64.ln();
    let tau_end_expect = -1.0 / 0.001_f64.ln();
    assert!((schedule.tau_start - tau_start_expect).abs() / tau_start_expect < 1e-9);
    assert!((schedule.tau_end - tau_end_expect).abs() / tau_end_expect < 1e-9);
    assert!((tau_start_expect - 2.80367).abs() < 1e-5);
    assert!((tau_end_expect - 0.14476).abs() < 1e-5);

    let mut tau = schedule.tau_start;
    for _ in 1..10_000u32 {
        tau *= schedule.tau_rate;
    }
    assert!((tau - schedule.tau_end).abs() / schedule.tau_end < 1e-9, "ladder closes at tau_end");

    assert_eq!(accept_probability(0.0, 1.0, 1.0), 1.0);
    assert!((accept_probability(1.0, 1.0, 1.0) - (-1.0_f64).exp()).abs() < 1e-12);
    assert!((accept_probability(2.0, 1.0, 0.5) - (-4.0_f64).exp()).abs() < 1e-12);
    println!("ACCEPTANCE 4 PASS: tau endpoints and acceptance probabilities match closed forms");
}

/// Criterion 5: map-matching accuracy at low noise and the decreasing trend.
#[test]
fn acceptance_5_map_matching_curve() {
    let network = RoadNetwork::grid(50, 450.0);
    let sigmas = [1.1, 20.0, 60.0, 100.0, 140.0];
    let cfg = MatchConfig::default();
    let runs = 10;
    let mut average = vec![0.0_f64; sigmas.len()];
    for seed in 1..=runs {
        let rows = evaluate_matching(&network, 10, 200, &sigmas, seed, &cfg).expect("evaluable");
        for (i, (_, accuracy)) in rows.iter().enumerate() {
            average[i] += accuracy / runs as f64;
        }
    }
    assert!(average[0] >= 0.98, "accuracy at 1.1 m was {:.4}", average[0]);
    for i in 1..sigmas.len() {
        assert!(
            average[i] <= average[i - 1] + 0.02,
            "accuracy rose from sigma {} to {}: {average:?}",
            sigmas[i - 1],
            sigmas[i]
        );
    }
    println!(
        "ACCEPTANCE 5 PASS: matching accuracy {:.4} at 1.1 m, non-increasing over sigmas {average:?}",
        average[0]
    );
}

/// Criterion 6: current-voltage energy labels agree with SoC-derived energy.
#[test]
fn acceptance_6_energy_label_unbiasedness() {
    let capacity_kwh = 400.0;
    let trace = synthetic_discharge_trace(5, 3600, capacity_kwh);
    let cleaned =
        clean_and_label(&trace, VehicleKind::Electric, &CleanConfig::default()).expect("clean");
    let labeled: f64 = cleaned.point_energies.iter().map(|(_, kwh)| kwh).sum();
    let soc_first = cleaned.points.first().unwrap().soc_pct.unwrap();
    let soc_last = cleaned.points.last().unwrap().soc_pct.unwrap();
    let soc_energy = (soc_first - soc_last) / 100.0 * capacity_kwh;
    let relative = (labeled - soc_energy).abs() / soc_energy;
    assert!(
        relative <= 0.01,
        "labels {labeled:.3} kWh vs SoC energy {soc_energy:.3} kWh ({relative:.4} relative)"
    );
    println!(
        "ACCEPTANCE 6 PASS: labeled {labeled:.2} kWh within {:.2}% of SoC-derived {soc_energy:.2} kWh",
        relative * 100.0
    );
}

/// Criterion 7: OLS coefficient recovery, residual orthogonality, and the
/// long-over-short trip error trend.
#[test]
fn acceptance_7_ols_correctness() {
    // Exact linear world: energy = 2 * distance_km + 1.
    let exact_samples: Vec<EnergySample> = (0..60)
        .map(|i| {
            let distance_m = 150.0 + 120.0 * i as f64;
            sample(distance_m, 0.0, "residential", 2.0 * distance_m / 1000.0 + 1.0)
        })
        .collect();
    let model = fit_ols(&exact_samples).expect("fit");
    let dist_idx = model.features.iter().position(|f| f == "distance_m").unwrap();
    assert!((model.coefficients[dist_idx] - 0.002).abs() < 1e-6);
    assert!((model.intercept - 1.0).abs() < 1e-6);

    // Residual orthogonality on a noisy fit.
    let mut noisy = exact_samples.clone();
    for (i, s) in noisy.iter_mut().enumerate() {
        s.energy_kwh += if i % 2 == 0 { 0.08 } else { -0.08 };
    }
    let noisy_model = fit_ols(&noisy).expect("fit");
    let residuals: Vec<f64> = noisy
        .iter()
        .map(|s| {
            s.energy_kwh - noisy_model.predict_segment(&SegmentFeatures::from(s)).unwrap()
        })
        .collect();
    let n = noisy.len() as f64;
    let sum: f64 = residuals.iter().sum();
    let dot: f64 = residuals.iter().zip(&noisy).map(|(r, s)| r * s.distance_m).sum();
    assert!((sum / n).abs() < 1e-6, "residual sum {sum}");
    assert!((dot / n).abs() < 1e-6, "residual-distance dot {dot}");

    // Long trips average out unbiased per-segment noise.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut train = Vec::new();
    for _ in 0..400 {
        let distance_m: f64 = rng.random_range(80.0..500.0);
        let speed_ratio: f64 = rng.random_range(0.4..1.0);
        let class = if rng.random_range(0..2) == 0 { "residential" } else { "primary" };
        let truth = truth_energy(distance_m, speed_ratio, class);
        let noise: f64 = rng.random_range(-0.09..0.09);
        let mut s = sample(distance_m, 0.0, class, truth + noise);
        s.speed_ratio = speed_ratio;
        train.push(s);
    }
    let world_model = fit_ols(&train).expect("fit");
    let mut short_errors = Vec::new();
    let mut long_errors = Vec::new();
    for _ in 0..50 {
        for (segments, sink) in [(3usize, &mut short_errors), (72, &mut long_errors)] {
            let mut actual = 0.0;
            let mut features = Vec::new();
            for _ in 0..segments {
                let distance_m: f64 = rng.random_range(80.0..500.0);
                let speed_ratio: f64 = rng.random_range(0.4..1.0);
                let class = if rng.random_range(0..2) == 0 { "residential" } else { "primary" };
                let noise: f64 = rng.random_range(-0.09..0.09);
                actual += truth_energy(distance_m, speed_ratio, class) + noise;
                let mut f = SegmentFeatures::from(&sample(distance_m, 0.0, class, 0.0));
                f.speed_ratio = speed_ratio;
                features.push(f);
            }
            let predicted = predict_trip_energy(&world_model, &features).expect("predict");
            sink.push((predicted - actual).abs() / actual);
        }
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (short_mean, long_mean) = (mean(&short_errors), mean(&long_errors));
    assert!(
        long_mean <= short_mean,
        "long-trip error {long_mean:.4} should not exceed short-trip error {short_mean:.4}"
    );
    println!(
        "ACCEPTANCE 7 PASS: coefficients recovered, residuals orthogonal, long-trip error {long_mean:.4} <= short-trip {short_mean:.4}"
    );
}

/// Criterion 8: byte-stable outputs for every seeded command.
#[test]
fn acceptance_8_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_fleetopt");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).display().to_string();
    let run = |args: &[&str]| {
        let output = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("spawns");
        assert!(output.status.success(), "{args:?}: {}", String::from_utf8_lossy(&output.stderr));
    };

    run(&["generate", "--lines", "2", "--seed", "5", "-o", &path("i1.json")]);
    run(&["generate", "--lines", "2", "--seed", "5", "-o", &path("i2.json")]);
    assert_eq!(
        std::fs::read(dir.path().join("i1.json")).unwrap(),
        std::fs::read(dir.path().join("i2.json")).unwrap(),
        "generate must be byte-stable"
    );

    for (algo, extra) in [
        ("greedy", vec![]),
        ("sa", vec!["--seed", "3", "--k-max", "600"]),
        ("exact", vec!["--time-limit", "30"]),
    ] {
        for out in ["a.json", "b.json"] {
            let mut args: Vec<String> =
                ["solve", &path("i1.json"), "--algo", algo, "-o", &path(out)]
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
            args.extend(extra.iter().map(|s| s.to_string()));
            let output = std::process::Command::new(bin).args(&args).output().expect("spawns");
            assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        }
        assert_eq!(
            std::fs::read(dir.path().join("a.json")).unwrap(),
            std::fs::read(dir.path().join("b.json")).unwrap(),
            "solve --algo {algo} must be byte-stable"
        );
    }

    for out in ["m1.csv", "m2.csv"] {
        run(&["match-eval", "--sigmas", "1.1,60", "--routes", "4", "--points", "100", "--seed", "9", "-o", &path(out)]);
    }
    assert_eq!(
        std::fs::read(dir.path().join("m1.csv")).unwrap(),
        std::fs::read(dir.path().join("m2.csv")).unwrap(),
        "match-eval must be byte-stable"
    );
    println!("ACCEPTANCE 8 PASS: generate, all solvers, and match-eval are byte-stable under fixed seeds");
}

/// Criterion 9: LP export/parse round trip on the golden instances.
#[test]
fn acceptance_9_lp_round_trip() {
    for name in ["line1_seed1.json", "line3.json"] {
        let instance = load_instance(data_path(name)).expect("golden loads");
        let model = build_milp(&instance).expect("model builds");
        let text_a = write_lp(&model);
        let text_b = write_lp(&build_milp(&instance).unwrap());
        assert_eq!(text_a, text_b, "{name}: export must be byte-stable");
        let parsed = parse_lp(&text_a).expect("parses");
        assert!(models_equal(&model, &parsed), "{name}: round trip must preserve the model");
        assert_eq!(model.vars.len(), parsed.vars.len());
        assert_eq!(model.constraints.len(), parsed.constraints.len());
    }
    // Frozen snapshot of the line-1 export.
    let instance = load_instance(data_path("line1_seed1.json")).unwrap();
    let text = write_lp(&build_milp(&instance).unwrap());
    let digest = format!("{:x}", Sha256::digest(text.as_bytes()));
    assert_eq!(
        digest, "968d4078f2ffb7bcae3c752baf3c678f51d4f93f5a049436bba3fb0a32ec2634",
        "line1 seed 1 LP snapshot changed"
    );
    println!("ACCEPTANCE 9 PASS: LP round trip preserves both golden models and the frozen snapshot");
}

fn sample(distance_m: f64, elevation: f64, class: &str, energy_kwh: f64) -> EnergySample {
    EnergySample {
        segment_id: "s".into(),
        start_ts: 0,
        end_ts: 10,
        distance_m,
        elevation_delta_m: elevation,
        road_class: class.into(),
        temp_c: 0.0,
        humidity_pct: 0.0,
        visibility_km: 0.0,
        precip_mm: 0.0,
        wind_ms: 0.0,
        speed_ratio: 1.0,
        energy_kwh,
    }
}

fn truth_energy(distance_m: f64, speed_ratio: f64, class: &str) -> f64 {
    0.0015 * distance_m + 0.3 * (1.2 - speed_ratio) + if class == "primary" { 0.25 } else { 0.0 }
}
