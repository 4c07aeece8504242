//! Shared in-crate test fixtures.

use crate::model::{
    ChargingPole, CostParams, DeadheadEntry, Instance, Location, SlotGrid, TransitTrip,
    TripEnergyEntry, Vehicle, VehicleKind, VehicleModelSpec,
};
use std::collections::BTreeMap;

/// One EV ("eva", 100 kWh capacity, 80 kWh initial) and one diesel ("icea"),
/// a depot with one pole, two terminals, two chained trips.
pub fn fixture() -> Instance {
    let locations = vec![
        Location { id: "depot".into(), lat: 35.0, lon: -85.0 },
        Location { id: "stopA".into(), lat: 35.02, lon: -85.0 },
        Location { id: "stopB".into(), lat: 35.05, lon: -85.0 },
    ];
    let durations: BTreeMap<(&str, &str), i64> = [
        (("depot", "stopA"), 900),
        (("stopA", "depot"), 900),
        (("depot", "stopB"), 1500),
        (("stopB", "depot"), 1500),
        (("stopA", "stopB"), 600),
        (("stopB", "stopA"), 600),
    ]
    .into();
    let mut deadhead = Vec::new();
    for from in ["depot", "stopA", "stopB"] {
        for to in ["depot", "stopA", "stopB"] {
            let duration = if from == to { 0 } else { durations[&(from, to)] };
            let energy = if from == to { 0.0 } else { 1.0 };
            deadhead.push(DeadheadEntry {
                from: from.into(),
                to: to.into(),
                duration_s: duration,
                energy_kwh: [("bev".to_string(), energy), ("diesel".to_string(), energy * 3.0)]
                    .into(),
            });
        }
    }
    let trips = vec![
        TransitTrip {
            id: "t1".into(),
            origin: "stopA".into(),
            destination: "stopB".into(),
            start_s: 8 * 3600,
            end_s: 9 * 3600,
        },
        TransitTrip {
            id: "t2".into(),
            origin: "stopB".into(),
            destination: "stopA".into(),
            start_s: 10 * 3600,
            end_s: 11 * 3600,
        },
    ];
    let mut trip_energy = Vec::new();
    for t in &trips {
        trip_energy.push(TripEnergyEntry { trip: t.id.clone(), model: "bev".into(), energy_kwh: 10.0 });
        trip_energy.push(TripEnergyEntry { trip: t.id.clone(), model: "diesel".into(), energy_kwh: 20.0 });
    }
    let mut inst = Instance {
        models: vec![
            VehicleModelSpec {
                id: "bev".into(),
                kind: VehicleKind::Electric,
                battery_capacity_kwh: 100.0,
            },
            VehicleModelSpec {
                id: "diesel".into(),
                kind: VehicleKind::LiquidFuel,
                battery_capacity_kwh: 0.0,
            },
        ],
        vehicles: vec![
            Vehicle { id: "eva".into(), model: "bev".into(), initial_charge_kwh: 80.0 },
            Vehicle { id: "icea".into(), model: "diesel".into(), initial_charge_kwh: 0.0 },
        ],
        locations,
        trips,
        charging_poles: vec![ChargingPole {
            id: "cp1".into(),
            location: "depot".into(),
            power_per_slot_kwh: [("bev".to_string(), 45.0)].into(),
        }],
        slot_grid: SlotGrid { day_start_s: 0, day_end_s: 86400, slot_length_s: 3600 },
        deadhead,
        trip_energy,
        costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
    };
    inst.normalize();
    inst.validate().unwrap();
    inst
}
