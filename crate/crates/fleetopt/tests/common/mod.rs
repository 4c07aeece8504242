//! Shared fixtures and the no-pruning enumeration oracle.

#![allow(dead_code)]

use fleetopt::feasibility::{solution_cost, validate_solution};
use fleetopt::geo::{destination_point, haversine_m};
use fleetopt::model::{
    ChargingPole, CostParams, DeadheadEntry, Instance, Location, SlotGrid, Solution, TransitTrip,
    TripEnergyEntry, Vehicle, VehicleKind, VehicleModelSpec,
};
use fleetopt::pipeline::TelemetryPoint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Exhaustively enumerates every trip assignment and every charging
/// configuration, keeping the cheapest solution that validates cleanly.
/// Completely independent of the branch-and-bound search path.
pub fn brute_force_best(instance: &Instance) -> Option<(f64, Solution)> {
    let vehicles: Vec<&str> = instance.vehicles.iter().map(|v| v.id.as_str()).collect();
    let trips: Vec<&str> = instance.trips.iter().map(|t| t.id.as_str()).collect();
    let electric: Vec<&str> = instance
        .vehicles
        .iter()
        .filter(|v| {
            instance
                .model_spec(&v.model)
                .map(|m| m.kind == VehicleKind::Electric)
                .unwrap_or(false)
        })
        .map(|v| v.id.as_str())
        .collect();
    let slots: Vec<(&str, usize)> = instance
        .charging_poles
        .iter()
        .flat_map(|p| (0..instance.slot_grid.slot_count()).map(move |s| (p.id.as_str(), s)))
        .collect();

    let n_assign = (vehicles.len() as u64).checked_pow(trips.len() as u32).expect("small");
    let n_charge = ((electric.len() + 1) as u64).checked_pow(slots.len() as u32).expect("small");

    let mut best: Option<(f64, Solution)> = None;
    for assign_code in 0..n_assign {
        let mut base = Solution::default();
        let mut code = assign_code;
        for trip in &trips {
            let v = vehicles[(code % vehicles.len() as u64) as usize];
            code /= vehicles.len() as u64;
            base.trip_assignments.insert((v.to_string(), trip.to_string()));
        }
        for charge_code in 0..n_charge {
            let mut candidate = base.clone();
            let mut code = charge_code;
            for (pole, slot) in &slots {
                let pick = (code % (electric.len() + 1) as u64) as usize;
                code /= (electric.len() + 1) as u64;
                if pick > 0 {
                    candidate.charging_assignments.insert((
                        electric[pick - 1].to_string(),
                        pole.to_string(),
                        *slot,
                    ));
                }
            }
            if !validate_solution(instance, &candidate).is_empty() {
                continue;
            }
            let cost = solution_cost(instance, &candidate);
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, candidate));
            }
        }
    }
    best
}

/// Random 2-vehicle (one small-battery EV, one diesel), 4-trip instance with
/// one pole and two charging slots. Trips may overlap, batteries may need
/// charging, and some seeds are infeasible.
pub fn tiny_random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot = (35.04, -85.31);
    let (a_lat, a_lon) = destination_point(depot.0, depot.1, 0.9, 2_000.0);
    let (b_lat, b_lon) = destination_point(depot.0, depot.1, 2.4, 3_000.0);
    let locations = vec![
        Location { id: "a".into(), lat: a_lat, lon: a_lon },
        Location { id: "b".into(), lat: b_lat, lon: b_lon },
        Location { id: "depot".into(), lat: depot.0, lon: depot.1 },
    ];

    let mut deadhead = Vec::new();
    for from in &locations {
        for to in &locations {
            let km = haversine_m(from.lat, from.lon, to.lat, to.lon) / 1000.0;
            deadhead.push(DeadheadEntry {
                from: from.id.clone(),
                to: to.id.clone(),
                duration_s: (km / 25.0 * 3600.0).round() as i64,
                energy_kwh: [
                    ("bev".to_string(), km * 1.2),
                    ("diesel".to_string(), km * 4.5),
                ]
                .into(),
            });
        }
    }

    let mut trips = Vec::new();
    let mut trip_energy = Vec::new();
    for i in 0..4 {
        let start_s: i64 = rng.random_range(0..10_800);
        let duration: i64 = rng.random_range(1_800..3_600);
        let flip = rng.random_range(0..2) == 0;
        let (origin, destination) = if flip { ("a", "b") } else { ("b", "a") };
        let id = format!("t{i}");
        trips.push(TransitTrip {
            id: id.clone(),
            origin: origin.into(),
            destination: destination.into(),
            start_s,
            end_s: start_s + duration,
        });
        trip_energy.push(TripEnergyEntry {
            trip: id.clone(),
            model: "bev".into(),
            energy_kwh: rng.random_range(1.5..4.0),
        });
        trip_energy.push(TripEnergyEntry {
            trip: id,
            model: "diesel".into(),
            energy_kwh: rng.random_range(5.0..10.0),
        });
    }

    let initial: f64 = rng.random_range(2.0..6.0);
    let mut instance = Instance {
        models: vec![
            VehicleModelSpec {
                id: "bev".into(),
                kind: VehicleKind::Electric,
                battery_capacity_kwh: 12.0,
            },
            VehicleModelSpec {
                id: "diesel".into(),
                kind: VehicleKind::LiquidFuel,
                battery_capacity_kwh: 0.0,
            },
        ],
        vehicles: vec![
            Vehicle { id: "ev1".into(), model: "bev".into(), initial_charge_kwh: initial },
            Vehicle { id: "ice1".into(), model: "diesel".into(), initial_charge_kwh: 0.0 },
        ],
        locations,
        trips,
        charging_poles: vec![ChargingPole {
            id: "cp".into(),
            location: "depot".into(),
            power_per_slot_kwh: [("bev".to_string(), 6.0)].into(),
        }],
        slot_grid: SlotGrid { day_start_s: 0, day_end_s: 14_400, slot_length_s: 7_200 },
        deadhead,
        trip_energy,
        costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
    };
    instance.normalize();
    instance.validate().expect("tiny instance validates");
    instance
}

/// Electric discharge trace whose state of charge is carried exactly and then
/// quantized to 0.1 percentage points, mirroring low-precision SoC recording.
pub fn synthetic_discharge_trace(seed: u64, points: usize, capacity_kwh: f64) -> Vec<TelemetryPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut soc_exact = 95.0_f64;
    let quantize = |soc: f64| (soc * 10.0).round() / 10.0;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let current: f64 = rng.random_range(80.0..400.0);
        let voltage: f64 = rng.random_range(590.0..650.0);
        if i > 0 {
            let kwh = current * voltage * 1.0 / 3.6e6;
            soc_exact -= kwh / capacity_kwh * 100.0;
        }
        out.push(TelemetryPoint {
            ts_s: i as i64,
            lat: 35.0,
            lon: -85.0,
            current_a: Some(current),
            voltage_v: Some(voltage),
            soc_pct: Some(quantize(soc_exact)),
            cable: Some(0),
            fuel_gal: None,
        });
    }
    out
}

/// Instance where the single EV must charge to finish its one trip; greedy
/// output therefore carries charging assignments.
pub fn charging_needed_instance() -> Instance {
    let mut deadhead = Vec::new();
    let durations: BTreeMap<(&str, &str), i64> =
        [(("depot", "stopA"), 900), (("stopA", "depot"), 900), (("depot", "stopB"), 1500),
         (("stopB", "depot"), 1500), (("stopA", "stopB"), 600), (("stopB", "stopA"), 600)]
            .into();
    for from in ["depot", "stopA", "stopB"] {
        for to in ["depot", "stopA", "stopB"] {
            let duration = if from == to { 0 } else { durations[&(from, to)] };
            let energy = if from == to { 0.0 } else { 1.0 };
            deadhead.push(DeadheadEntry {
                from: from.into(),
                to: to.into(),
                duration_s: duration,
                energy_kwh: [("bev".to_string(), energy)].into(),
            });
        }
    }
    let mut instance = Instance {
        models: vec![VehicleModelSpec {
            id: "bev".into(),
            kind: VehicleKind::Electric,
            battery_capacity_kwh: 100.0,
        }],
        vehicles: vec![Vehicle { id: "eva".into(), model: "bev".into(), initial_charge_kwh: 11.0 }],
        locations: vec![
            Location { id: "depot".into(), lat: 35.0, lon: -85.0 },
            Location { id: "stopA".into(), lat: 35.02, lon: -85.0 },
            Location { id: "stopB".into(), lat: 35.05, lon: -85.0 },
        ],
        trips: vec![TransitTrip {
            id: "t1".into(),
            origin: "stopA".into(),
            destination: "stopB".into(),
            start_s: 8 * 3600,
            end_s: 9 * 3600,
        }],
        charging_poles: vec![ChargingPole {
            id: "cp1".into(),
            location: "depot".into(),
            power_per_slot_kwh: [("bev".to_string(), 45.0)].into(),
        }],
        slot_grid: SlotGrid { day_start_s: 0, day_end_s: 86400, slot_length_s: 3600 },
        deadhead,
        trip_energy: vec![TripEnergyEntry {
            trip: "t1".into(),
            model: "bev".into(),
            energy_kwh: 12.0,
        }],
        costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
    };
    instance.normalize();
    instance.validate().expect("charging instance validates");
    instance
}
