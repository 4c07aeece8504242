//! Seeded synthetic instance generator.
//!
//! Lays `lines` bus lines radially around one depot. Each line alternates
//! between its two terminals with hourly departures, so a single vehicle can
//! chain a whole line with zero deadhead; that keeps small instances feasible
//! for the exact solver while cross-line assignments still cost deadheads.

use super::{
    round6, ChargingPole, CostParams, DeadheadEntry, Instance, Location, SlotGrid, TransitTrip,
    TripEnergyEntry, Vehicle, VehicleModelSpec, VehicleKind,
};
use crate::geo::{destination_point, haversine_m};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const DEPOT_LAT: f64 = 35.04;
const DEPOT_LON: f64 = -85.31;
const ICEV_CAP: u32 = 50;
const EV_CAPACITY_KWH: f64 = 350.0;
const POLE_POWER_KWH: f64 = 45.0;
const DEADHEAD_SPEED_KMH: f64 = 25.0;
const ROUTE_FACTOR: f64 = 1.15;
const EV_DEADHEAD_KWH_PER_KM: f64 = 1.2;
const ICEV_DEADHEAD_KWH_PER_KM: f64 = 4.5;

/// Deterministic for a fixed seed: same parameters always produce a
/// byte-identical instance.
pub fn generate_instance(
    lines: u32,
    trips_per_line: u32,
    evs: u32,
    icev_factor: u32,
    seed: u64,
) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = lines.max(1);
    let trips_per_line = trips_per_line.max(1);

    let mut locations = vec![Location { id: "depot".into(), lat: DEPOT_LAT, lon: DEPOT_LON }];
    let mut trips = Vec::new();
    let mut trip_energy = Vec::new();

    // Hub-and-spoke terminal geometry: every line's near terminal sits close
    // to the depot so switching lines costs little deadhead, as in a downtown
    // transit hub. Per-trip energy draws keep the EV per-km range strictly
    // below the ICEV range.
    let mut line_terminals = Vec::new();
    for line in 0..lines {
        let bearing = 2.0 * std::f64::consts::PI * line as f64 / lines as f64;
        let near_km: f64 = rng.random_range(0.5..1.5);
        let far_km: f64 = rng.random_range(6.0..8.0);
        let (a_lat, a_lon) = destination_point(DEPOT_LAT, DEPOT_LON, bearing, near_km * 1000.0);
        let (b_lat, b_lon) = destination_point(DEPOT_LAT, DEPOT_LON, bearing, far_km * 1000.0);
        let a_id = format!("l{line:02}a");
        let b_id = format!("l{line:02}b");
        locations.push(Location { id: a_id.clone(), lat: round6(a_lat), lon: round6(a_lon) });
        locations.push(Location { id: b_id.clone(), lat: round6(b_lat), lon: round6(b_lon) });
        line_terminals.push((a_id, b_id));
    }

    for line in 0..lines {
        let (a_id, b_id) = &line_terminals[line as usize];
        let a = locations.iter().find(|l| &l.id == a_id).unwrap().clone();
        let b = locations.iter().find(|l| &l.id == b_id).unwrap().clone();
        let trip_km = haversine_m(a.lat, a.lon, b.lat, b.lon) / 1000.0 * ROUTE_FACTOR;
        for i in 0..trips_per_line {
            let start_s = 7 * 3600 + line as i64 * 900 + i as i64 * 3600;
            let (origin, destination) =
                if i % 2 == 0 { (a_id.clone(), b_id.clone()) } else { (b_id.clone(), a_id.clone()) };
            let trip_id = format!("t{line:02}_{i:03}");
            trips.push(TransitTrip {
                id: trip_id.clone(),
                origin,
                destination,
                start_s,
                end_s: start_s + 2400,
            });
            let ev_per_km: f64 = rng.random_range(1.0..1.5);
            let ice_per_km: f64 = rng.random_range(3.8..5.2);
            trip_energy.push(TripEnergyEntry {
                trip: trip_id.clone(),
                model: "bev".into(),
                energy_kwh: round6(trip_km * ev_per_km),
            });
            trip_energy.push(TripEnergyEntry {
                trip: trip_id,
                model: "diesel".into(),
                energy_kwh: round6(trip_km * ice_per_km),
            });
        }
    }

    let models = vec![
        VehicleModelSpec {
            id: "bev".into(),
            kind: VehicleKind::Electric,
            battery_capacity_kwh: EV_CAPACITY_KWH,
        },
        VehicleModelSpec {
            id: "diesel".into(),
            kind: VehicleKind::LiquidFuel,
            battery_capacity_kwh: 0.0,
        },
    ];

    let mut vehicles = Vec::new();
    for k in 0..evs {
        let initial: f64 = rng.random_range(300.0..340.0);
        vehicles.push(Vehicle {
            id: format!("ev{k:02}"),
            model: "bev".into(),
            initial_charge_kwh: round6(initial),
        });
    }
    let icevs = (icev_factor.saturating_mul(lines)).min(ICEV_CAP);
    for k in 0..icevs {
        vehicles.push(Vehicle { id: format!("ice{k:02}"), model: "diesel".into(), initial_charge_kwh: 0.0 });
    }

    let charging_poles = vec![
        ChargingPole {
            id: "cp1".into(),
            location: "depot".into(),
            power_per_slot_kwh: [("bev".to_string(), POLE_POWER_KWH)].into(),
        },
        ChargingPole {
            id: "cp2".into(),
            location: "depot".into(),
            power_per_slot_kwh: [("bev".to_string(), POLE_POWER_KWH)].into(),
        },
    ];

    let mut deadhead = Vec::new();
    for from in &locations {
        for to in &locations {
            let dist_km = haversine_m(from.lat, from.lon, to.lat, to.lon) / 1000.0;
            let duration_s = (dist_km / DEADHEAD_SPEED_KMH * 3600.0).round() as i64;
            let energy: BTreeMap<String, f64> = [
                ("bev".to_string(), round6(dist_km * EV_DEADHEAD_KWH_PER_KM)),
                ("diesel".to_string(), round6(dist_km * ICEV_DEADHEAD_KWH_PER_KM)),
            ]
            .into();
            deadhead.push(DeadheadEntry {
                from: from.id.clone(),
                to: to.id.clone(),
                duration_s,
                energy_kwh: energy,
            });
        }
    }

    let mut instance = Instance {
        models,
        vehicles,
        locations,
        trips,
        charging_poles,
        slot_grid: SlotGrid { day_start_s: 0, day_end_s: 86400, slot_length_s: 3600 },
        deadhead,
        trip_energy,
        costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
    };
    instance.normalize();
    debug_assert!(instance.validate().is_ok());
    instance
}
