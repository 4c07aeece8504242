//! Optimization-domain types: fleet, trips, charging infrastructure, and the
//! assignment solution, plus instance validation.
//!
//! Every collection is kept sorted by id so that all downstream algorithms
//! iterate deterministically. All energy quantities are kWh; times are integer
//! seconds since local midnight.

mod generate;
mod gtfs;
mod io;

pub use generate::generate_instance;
pub use gtfs::{ingest_gtfs, parse_gtfs_time, DeadheadSource, EnergySource, FleetProfile};
pub use io::{
    instance_to_json, load_instance, load_solution_record, save_instance, save_solution_record,
};

use crate::error::{FleetError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleKind {
    LiquidFuel,
    Electric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleModelSpec {
    pub id: String,
    pub kind: VehicleKind,
    /// Battery capacity in kWh; zero and unused for liquid-fuel models.
    pub battery_capacity_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: String,
    pub model: String,
    /// Charge available before the day starts (electric only).
    #[serde(default)]
    pub initial_charge_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitTrip {
    pub id: String,
    pub origin: String,
    pub destination: String,
    pub start_s: i64,
    pub end_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingPole {
    pub id: String,
    pub location: String,
    /// Energy delivered to one bus of the given model in one time slot.
    pub power_per_slot_kwh: BTreeMap<String, f64>,
}

/// Uniform-length charging time slots covering the operating day.
/// Slot `k` spans `[day_start_s + k*slot_length_s, day_start_s + (k+1)*slot_length_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotGrid {
    pub day_start_s: i64,
    pub day_end_s: i64,
    pub slot_length_s: i64,
}

impl SlotGrid {
    pub fn slot_count(&self) -> usize {
        ((self.day_end_s - self.day_start_s) / self.slot_length_s) as usize
    }

    pub fn slot_start(&self, slot: usize) -> i64 {
        self.day_start_s + slot as i64 * self.slot_length_s
    }

    pub fn slot_end(&self, slot: usize) -> i64 {
        self.day_start_s + (slot as i64 + 1) * self.slot_length_s
    }

    /// Smallest slot whose end is at or after `t`: the slot an event ending at
    /// `t` is accounted in. Events at `day_start_s` map to slot 0.
    pub fn slot_accounting(&self, t: i64) -> usize {
        if t <= self.slot_start(0) {
            return 0;
        }
        let offset = t - self.day_start_s;
        let k = (offset + self.slot_length_s - 1) / self.slot_length_s - 1;
        (k as usize).min(self.slot_count().saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeadheadEntry {
    pub from: String,
    pub to: String,
    pub duration_s: i64,
    /// Energy per vehicle model for driving this non-service trip.
    pub energy_kwh: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripEnergyEntry {
    pub trip: String,
    pub model: String,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub k_gas: f64,
    pub k_elec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub models: Vec<VehicleModelSpec>,
    pub vehicles: Vec<Vehicle>,
    pub locations: Vec<Location>,
    pub trips: Vec<TransitTrip>,
    pub charging_poles: Vec<ChargingPole>,
    pub slot_grid: SlotGrid,
    pub deadhead: Vec<DeadheadEntry>,
    pub trip_energy: Vec<TripEnergyEntry>,
    pub costs: CostParams,
}

/// One assignment of a vehicle to a transit trip.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TripAssignment {
    pub vehicle: String,
    pub trip: String,
}

/// One assignment of an electric vehicle to a charging pole for a full slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChargingAssignment {
    pub vehicle: String,
    pub pole: String,
    pub slot: usize,
}

/// A set of trip and charging assignments. Complete when every trip appears
/// exactly once; validity is judged by `feasibility::validate_solution`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Solution {
    pub trip_assignments: BTreeSet<(String, String)>,
    pub charging_assignments: BTreeSet<(String, String, usize)>,
}

impl Solution {
    pub fn assignment_count(&self) -> usize {
        self.trip_assignments.len() + self.charging_assignments.len()
    }

    pub fn vehicle_of_trip(&self, trip: &str) -> Option<&str> {
        self.trip_assignments
            .iter()
            .find(|(_, t)| t == trip)
            .map(|(v, _)| v.as_str())
    }

    /// Charging assignments of one vehicle, as (pole, slot) pairs.
    pub fn charging_of(&self, vehicle: &str) -> Vec<(String, usize)> {
        self.charging_assignments
            .iter()
            .filter(|(v, _, _)| v == vehicle)
            .map(|(_, p, s)| (p.clone(), *s))
            .collect()
    }
}

/// On-disk form of a solution, with the derived cost and run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub trip_assignments: Vec<TripAssignment>,
    pub charging_assignments: Vec<ChargingAssignment>,
    pub cost: f64,
    pub algorithm: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl SolutionRecord {
    pub fn new(solution: &Solution, cost: f64, algorithm: &str, seed: u64) -> Self {
        Self {
            trip_assignments: solution
                .trip_assignments
                .iter()
                .map(|(v, t)| TripAssignment { vehicle: v.clone(), trip: t.clone() })
                .collect(),
            charging_assignments: solution
                .charging_assignments
                .iter()
                .map(|(v, p, s)| ChargingAssignment {
                    vehicle: v.clone(),
                    pole: p.clone(),
                    slot: *s,
                })
                .collect(),
            cost: round6(cost),
            algorithm: algorithm.to_string(),
            seed,
            wall_time_ms: None,
        }
    }

    pub fn solution(&self) -> Solution {
        Solution {
            trip_assignments: self
                .trip_assignments
                .iter()
                .map(|a| (a.vehicle.clone(), a.trip.clone()))
                .collect(),
            charging_assignments: self
                .charging_assignments
                .iter()
                .map(|a| (a.vehicle.clone(), a.pole.clone(), a.slot))
                .collect(),
        }
    }
}

/// Round to six decimals; applied to derived metrics before serialization so
/// reports stay snapshot-stable.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl Instance {
    pub fn model_spec(&self, id: &str) -> Option<&VehicleModelSpec> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn vehicle(&self, id: &str) -> Option<&Vehicle> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn trip(&self, id: &str) -> Option<&TransitTrip> {
        self.trips.iter().find(|t| t.id == id)
    }

    pub fn electric_vehicle_count(&self) -> usize {
        self.vehicles
            .iter()
            .filter(|v| {
                self.model_spec(&v.model)
                    .map(|m| m.kind == VehicleKind::Electric)
                    .unwrap_or(false)
            })
            .count()
    }

    /// Sorts every id-keyed collection lexicographically. Called by the loader
    /// and the generator so all algorithms see one canonical order.
    pub fn normalize(&mut self) {
        self.models.sort_by(|a, b| a.id.cmp(&b.id));
        self.vehicles.sort_by(|a, b| a.id.cmp(&b.id));
        self.locations.sort_by(|a, b| a.id.cmp(&b.id));
        self.trips.sort_by(|a, b| a.id.cmp(&b.id));
        self.charging_poles.sort_by(|a, b| a.id.cmp(&b.id));
        self.deadhead
            .sort_by(|a, b| (a.from.as_str(), a.to.as_str()).cmp(&(b.from.as_str(), b.to.as_str())));
        self.trip_energy
            .sort_by(|a, b| (a.trip.as_str(), a.model.as_str()).cmp(&(b.trip.as_str(), b.model.as_str())));
    }

    /// Checks every structural invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        fn unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<()> {
            let mut seen = BTreeSet::new();
            for id in ids {
                if !seen.insert(id) {
                    return Err(FleetError::Validation(format!("duplicate {kind} id '{id}'")));
                }
            }
            Ok(())
        }

        unique("model", self.models.iter().map(|m| m.id.as_str()))?;
        unique("vehicle", self.vehicles.iter().map(|v| v.id.as_str()))?;
        unique("location", self.locations.iter().map(|l| l.id.as_str()))?;
        unique("trip", self.trips.iter().map(|t| t.id.as_str()))?;
        unique("charging pole", self.charging_poles.iter().map(|p| p.id.as_str()))?;

        if self.vehicles.is_empty() {
            return Err(FleetError::Validation("instance has no vehicles".into()));
        }
        if self.trips.is_empty() {
            return Err(FleetError::Validation("instance has no trips".into()));
        }

        for m in &self.models {
            if !m.battery_capacity_kwh.is_finite() || m.battery_capacity_kwh < 0.0 {
                return Err(FleetError::Validation(format!(
                    "model '{}' has invalid battery capacity {}",
                    m.id, m.battery_capacity_kwh
                )));
            }
            if m.kind == VehicleKind::Electric && m.battery_capacity_kwh <= 0.0 {
                return Err(FleetError::Validation(format!(
                    "electric model '{}' must have positive battery capacity",
                    m.id
                )));
            }
        }

        for v in &self.vehicles {
            let model = self.model_spec(&v.model).ok_or_else(|| {
                FleetError::Validation(format!(
                    "vehicle '{}' references unknown model '{}'",
                    v.id, v.model
                ))
            })?;
            if !v.initial_charge_kwh.is_finite() || v.initial_charge_kwh < 0.0 {
                return Err(FleetError::Validation(format!(
                    "vehicle '{}' has invalid initial charge {}",
                    v.id, v.initial_charge_kwh
                )));
            }
            match model.kind {
                VehicleKind::Electric => {
                    if v.initial_charge_kwh > model.battery_capacity_kwh {
                        return Err(FleetError::Validation(format!(
                            "vehicle '{}' initial charge {} exceeds capacity {}",
                            v.id, v.initial_charge_kwh, model.battery_capacity_kwh
                        )));
                    }
                }
                VehicleKind::LiquidFuel => {
                    if v.initial_charge_kwh != 0.0 {
                        return Err(FleetError::Validation(format!(
                            "liquid-fuel vehicle '{}' must have zero initial charge",
                            v.id
                        )));
                    }
                }
            }
        }

        let location_ids: BTreeSet<&str> = self.locations.iter().map(|l| l.id.as_str()).collect();
        for l in &self.locations {
            if !(-90.0..=90.0).contains(&l.lat) || !(-180.0..=180.0).contains(&l.lon) {
                return Err(FleetError::Validation(format!(
                    "location '{}' has out-of-range coordinates ({}, {})",
                    l.id, l.lat, l.lon
                )));
            }
        }

        let grid = &self.slot_grid;
        if grid.slot_length_s <= 0 {
            return Err(FleetError::Validation("slot length must be positive".into()));
        }
        if grid.day_end_s <= grid.day_start_s
            || (grid.day_end_s - grid.day_start_s) % grid.slot_length_s != 0
        {
            return Err(FleetError::Validation(format!(
                "slot grid [{}, {}) is not divisible into {}-second slots",
                grid.day_start_s, grid.day_end_s, grid.slot_length_s
            )));
        }

        for t in &self.trips {
            if t.start_s >= t.end_s {
                return Err(FleetError::Validation(format!(
                    "trip '{}' must start before it ends",
                    t.id
                )));
            }
            for loc in [&t.origin, &t.destination] {
                if !location_ids.contains(loc.as_str()) {
                    return Err(FleetError::Validation(format!(
                        "trip '{}' references unknown location '{}'",
                        t.id, loc
                    )));
                }
            }
            if t.start_s < grid.day_start_s || t.end_s > grid.day_end_s {
                return Err(FleetError::Validation(format!(
                    "trip '{}' lies outside the slot grid [{}, {})",
                    t.id, grid.day_start_s, grid.day_end_s
                )));
            }
        }

        let electric_models: Vec<&str> = self
            .models
            .iter()
            .filter(|m| m.kind == VehicleKind::Electric)
            .map(|m| m.id.as_str())
            .collect();
        for p in &self.charging_poles {
            if !location_ids.contains(p.location.as_str()) {
                return Err(FleetError::Validation(format!(
                    "charging pole '{}' references unknown location '{}'",
                    p.id, p.location
                )));
            }
            for m in &electric_models {
                match p.power_per_slot_kwh.get(*m) {
                    Some(power) if power.is_finite() && *power >= 0.0 => {}
                    Some(power) => {
                        return Err(FleetError::Validation(format!(
                            "pole '{}' has invalid power {power} for model '{m}'",
                            p.id
                        )))
                    }
                    None => {
                        return Err(FleetError::Validation(format!(
                            "pole '{}' defines no power for electric model '{m}'",
                            p.id
                        )))
                    }
                }
            }
        }

        let mut seen_pairs = BTreeSet::new();
        for d in &self.deadhead {
            for loc in [&d.from, &d.to] {
                if !location_ids.contains(loc.as_str()) {
                    return Err(FleetError::Validation(format!(
                        "deadhead entry references unknown location '{loc}'"
                    )));
                }
            }
            if !seen_pairs.insert((d.from.as_str(), d.to.as_str())) {
                return Err(FleetError::Validation(format!(
                    "duplicate deadhead entry for ('{}', '{}')",
                    d.from, d.to
                )));
            }
            if d.duration_s < 0 {
                return Err(FleetError::Validation(format!(
                    "deadhead ('{}', '{}') has negative duration",
                    d.from, d.to
                )));
            }
            for m in &self.models {
                match d.energy_kwh.get(&m.id) {
                    Some(e) if e.is_finite() && *e >= 0.0 => {}
                    Some(e) => {
                        return Err(FleetError::Validation(format!(
                            "deadhead ('{}', '{}') has invalid energy {e} for model '{}'",
                            d.from, d.to, m.id
                        )))
                    }
                    None => {
                        return Err(FleetError::Validation(format!(
                            "deadhead ('{}', '{}') defines no energy for model '{}'",
                            d.from, d.to, m.id
                        )))
                    }
                }
            }
            if d.from == d.to {
                let zero_energy = d.energy_kwh.values().all(|e| *e == 0.0);
                if d.duration_s != 0 || !zero_energy {
                    return Err(FleetError::Validation(format!(
                        "deadhead ('{}', '{}') from a location to itself must be zero",
                        d.from, d.to
                    )));
                }
            }
        }

        let mut energy_pairs = BTreeSet::new();
        for e in &self.trip_energy {
            if self.trip(&e.trip).is_none() {
                return Err(FleetError::Validation(format!(
                    "trip energy entry references unknown trip '{}'",
                    e.trip
                )));
            }
            if self.model_spec(&e.model).is_none() {
                return Err(FleetError::Validation(format!(
                    "trip energy entry references unknown model '{}'",
                    e.model
                )));
            }
            if !e.energy_kwh.is_finite() || e.energy_kwh < 0.0 {
                return Err(FleetError::Validation(format!(
                    "trip energy for ('{}', '{}') is invalid: {}",
                    e.trip, e.model, e.energy_kwh
                )));
            }
            if !energy_pairs.insert((e.trip.as_str(), e.model.as_str())) {
                return Err(FleetError::Validation(format!(
                    "duplicate trip energy entry for ('{}', '{}')",
                    e.trip, e.model
                )));
            }
        }
        for t in &self.trips {
            for m in &self.models {
                if !energy_pairs.contains(&(t.id.as_str(), m.id.as_str())) {
                    return Err(FleetError::Validation(format!(
                        "no trip energy defined for ('{}', '{}')",
                        t.id, m.id
                    )));
                }
            }
        }

        for (name, k) in [("k_gas", self.costs.k_gas), ("k_elec", self.costs.k_elec)] {
            if !k.is_finite() || k < 0.0 {
                return Err(FleetError::Validation(format!("cost weight {name} is invalid: {k}")));
            }
        }

        Ok(())
    }
}

/// Directed deadhead duration lookup. A location to itself is always zero;
/// any other absent pair is an error naming it.
pub fn deadhead_duration(instance: &Instance, from: &str, to: &str) -> Result<i64> {
    if from == to {
        return Ok(0);
    }
    instance
        .deadhead
        .iter()
        .find(|d| d.from == from && d.to == to)
        .map(|d| d.duration_s)
        .ok_or_else(|| FleetError::MissingDeadhead { from: from.to_string(), to: to.to_string() })
}

/// Map from (from, to) to deadhead entries, built once per solver run.
pub(crate) fn deadhead_map(instance: &Instance) -> BTreeMap<(&str, &str), &DeadheadEntry> {
    instance
        .deadhead
        .iter()
        .map(|d| ((d.from.as_str(), d.to.as_str()), d))
        .collect()
}
