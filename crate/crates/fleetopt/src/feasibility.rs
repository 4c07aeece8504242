//! Constraint predicates, the battery/energy ledger, solution validation, and
//! the objective. Every solver in this crate consults these functions instead
//! of re-deriving constraint logic.
//!
//! Transit trips and charging slots are treated uniformly as [`Task`]s: a
//! charging slot occupies its pole's location for the whole slot, so one
//! pairwise time predicate covers all four trip/slot combinations.

use crate::error::{FleetError, Result};
use crate::model::{deadhead_map, DeadheadEntry, Instance, Solution, VehicleKind, VehicleModelSpec};
use serde::Serialize;
use std::collections::BTreeMap;

/// Tolerance absorbing float noise in the strict battery lower bound: a level
/// is an underflow when it drops below this, an overflow when it exceeds
/// capacity by more than this.
pub const BATTERY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskRef {
    Trip(String),
    Charge { pole: String, slot: usize },
}

impl std::fmt::Display for TaskRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Trip(id) => write!(f, "trip '{id}'"),
            Self::Charge { pole, slot } => write!(f, "charging slot ('{pole}', {slot})"),
        }
    }
}

/// A transit trip or a charging slot with its time window and endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub reference: TaskRef,
    pub start_s: i64,
    pub end_s: i64,
    pub origin: String,
    pub destination: String,
}

impl Task {
    /// Total order used for schedules: start time first, identity on ties.
    pub fn chrono_key(&self) -> (i64, &TaskRef) {
        (self.start_s, &self.reference)
    }
}

/// Pre-resolved lookups over one instance; build once per solver run.
pub struct View<'a> {
    pub instance: &'a Instance,
    models: BTreeMap<&'a str, &'a VehicleModelSpec>,
    vehicle_models: BTreeMap<&'a str, &'a VehicleModelSpec>,
    initial_charge: BTreeMap<&'a str, f64>,
    trips: BTreeMap<&'a str, &'a crate::model::TransitTrip>,
    poles: BTreeMap<&'a str, &'a crate::model::ChargingPole>,
    deadheads: BTreeMap<(&'a str, &'a str), &'a DeadheadEntry>,
    trip_energy: BTreeMap<(&'a str, &'a str), f64>,
}

impl<'a> View<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let models: BTreeMap<&str, &VehicleModelSpec> =
            instance.models.iter().map(|m| (m.id.as_str(), m)).collect();
        let vehicle_models = instance
            .vehicles
            .iter()
            .filter_map(|v| models.get(v.model.as_str()).map(|m| (v.id.as_str(), *m)))
            .collect();
        Self {
            instance,
            vehicle_models,
            initial_charge: instance
                .vehicles
                .iter()
                .map(|v| (v.id.as_str(), v.initial_charge_kwh))
                .collect(),
            trips: instance.trips.iter().map(|t| (t.id.as_str(), t)).collect(),
            poles: instance.charging_poles.iter().map(|p| (p.id.as_str(), p)).collect(),
            deadheads: deadhead_map(instance),
            trip_energy: instance
                .trip_energy
                .iter()
                .map(|e| ((e.trip.as_str(), e.model.as_str()), e.energy_kwh))
                .collect(),
            models,
        }
    }

    pub fn model_of(&self, vehicle: &str) -> Option<&VehicleModelSpec> {
        self.vehicle_models.get(vehicle).copied()
    }

    pub fn model(&self, id: &str) -> Option<&VehicleModelSpec> {
        self.models.get(id).copied()
    }

    pub fn is_electric(&self, vehicle: &str) -> bool {
        self.model_of(vehicle).map(|m| m.kind == VehicleKind::Electric).unwrap_or(false)
    }

    pub fn initial_charge(&self, vehicle: &str) -> f64 {
        self.initial_charge.get(vehicle).copied().unwrap_or(0.0)
    }

    pub fn cost_weight(&self, vehicle: &str) -> f64 {
        match self.model_of(vehicle).map(|m| m.kind) {
            Some(VehicleKind::Electric) => self.instance.costs.k_elec,
            _ => self.instance.costs.k_gas,
        }
    }

    pub fn deadhead_duration_s(&self, from: &str, to: &str) -> Option<i64> {
        if from == to {
            return Some(0);
        }
        self.deadheads.get(&(from, to)).map(|d| d.duration_s)
    }

    pub fn deadhead_energy(&self, from: &str, to: &str, model: &str) -> Option<f64> {
        if from == to {
            return Some(0.0);
        }
        self.deadheads.get(&(from, to)).and_then(|d| d.energy_kwh.get(model)).copied()
    }

    pub fn trip_energy(&self, trip: &str, model: &str) -> f64 {
        self.trip_energy.get(&(trip, model)).copied().unwrap_or(0.0)
    }

    /// Charging power delivered to a vehicle of `model` in one slot at `pole`.
    pub fn pole_power(&self, pole: &str, model: &str) -> f64 {
        self.poles
            .get(pole)
            .and_then(|p| p.power_per_slot_kwh.get(model))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn trip_task(&self, trip: &str) -> Option<Task> {
        self.trips.get(trip).map(|t| Task {
            reference: TaskRef::Trip(t.id.clone()),
            start_s: t.start_s,
            end_s: t.end_s,
            origin: t.origin.clone(),
            destination: t.destination.clone(),
        })
    }

    pub fn charge_task(&self, pole: &str, slot: usize) -> Option<Task> {
        let grid = &self.instance.slot_grid;
        if slot >= grid.slot_count() {
            return None;
        }
        self.poles.get(pole).map(|p| Task {
            reference: TaskRef::Charge { pole: p.id.clone(), slot },
            start_s: grid.slot_start(slot),
            end_s: grid.slot_end(slot),
            origin: p.location.clone(),
            destination: p.location.clone(),
        })
    }

    /// True iff `x1` can be followed by `x2` on one vehicle: the deadhead from
    /// `x1`'s destination reaches `x2`'s origin by its start. The caller
    /// orders the pair by start time. A missing deadhead entry is infeasible.
    pub fn pair_feasible(&self, x1: &Task, x2: &Task) -> bool {
        debug_assert!(x1.start_s <= x2.start_s, "caller must order the pair");
        match self.deadhead_duration_s(&x1.destination, &x2.origin) {
            Some(d) => x1.end_s + d <= x2.start_s,
            None => false,
        }
    }

    /// All tasks assigned to one vehicle, ordered by (start, identity).
    pub fn schedule_of(&self, solution: &Solution, vehicle: &str) -> Vec<Task> {
        let mut tasks: Vec<Task> = solution
            .trip_assignments
            .iter()
            .filter(|(v, _)| v == vehicle)
            .filter_map(|(_, t)| self.trip_task(t))
            .chain(
                solution
                    .charging_assignments
                    .iter()
                    .filter(|(v, _, _)| v == vehicle)
                    .filter_map(|(_, p, s)| self.charge_task(p, *s)),
            )
            .collect();
        tasks.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
        tasks
    }

    /// Deadhead energies induced between consecutive tasks of a schedule, for
    /// the given vehicle model. Missing matrix entries contribute zero here;
    /// `validate_solution` reports them as infeasible pairs.
    fn schedule_deadheads(&self, schedule: &[Task], model: &str) -> Vec<(usize, f64)> {
        schedule
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let energy = self
                    .deadhead_energy(&w[0].destination, &w[1].origin, model)
                    .unwrap_or(0.0);
                (i + 1, energy)
            })
            .collect()
    }
}

/// Per-slot cumulative energy ledger of one electric vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryProfile {
    /// Cumulative energy used by the end of each slot, trips plus deadheads.
    pub used_kwh: Vec<f64>,
    /// Cumulative energy charged by the end of each slot, including the
    /// initial charge (a virtual pre-day charging slot).
    pub charged_kwh: Vec<f64>,
}

impl BatteryProfile {
    pub fn slot_count(&self) -> usize {
        self.used_kwh.len()
    }

    /// Battery level at the end of the slot; derived, never stored.
    pub fn level_kwh(&self, slot: usize) -> f64 {
        self.charged_kwh[slot] - self.used_kwh[slot]
    }

    pub fn min_level(&self) -> f64 {
        (0..self.slot_count()).map(|s| self.level_kwh(s)).fold(f64::INFINITY, f64::min)
    }

    /// First slot whose end-of-slot level drops below `floor`, if any.
    pub fn first_below(&self, floor: f64) -> Option<usize> {
        (0..self.slot_count()).find(|s| self.level_kwh(*s) < floor)
    }
}

/// Energy ledger for one electric vehicle under a (possibly infeasible)
/// solution. Trips count in the slot their end falls in; each deadhead counts
/// in the slot its successor task starts in; charging counts in its own slot.
pub fn battery_profile(instance: &Instance, solution: &Solution, vehicle: &str) -> Result<BatteryProfile> {
    let view = View::new(instance);
    battery_profile_view(&view, solution, vehicle)
}

pub fn battery_profile_view(view: &View, solution: &Solution, vehicle: &str) -> Result<BatteryProfile> {
    let model = view
        .model_of(vehicle)
        .ok_or_else(|| FleetError::Validation(format!("unknown vehicle '{vehicle}'")))?;
    if model.kind != VehicleKind::Electric {
        return Err(FleetError::Validation(format!(
            "battery profile requested for non-electric vehicle '{vehicle}'"
        )));
    }
    let schedule = view.schedule_of(solution, vehicle);
    Ok(profile_of_schedule(view, &schedule, &model.id, view.initial_charge(vehicle)))
}

/// Profile from an explicit schedule; shared with the solvers so hypothetical
/// schedules can be costed without building a full solution.
pub(crate) fn profile_of_schedule(
    view: &View,
    schedule: &[Task],
    model: &str,
    initial_charge: f64,
) -> BatteryProfile {
    let grid = &view.instance.slot_grid;
    let n = grid.slot_count();
    let mut used = vec![0.0; n];
    let mut charged = vec![0.0; n];
    for task in schedule {
        match &task.reference {
            TaskRef::Trip(id) => used[grid.slot_accounting(task.end_s)] += view.trip_energy(id, model),
            TaskRef::Charge { pole, slot } => charged[*slot] += view.pole_power(pole, model),
        }
    }
    for (idx, energy) in view.schedule_deadheads(schedule, model) {
        used[grid.slot_accounting(schedule[idx].start_s)] += energy;
    }
    for s in 1..n {
        used[s] += used[s - 1];
        charged[s] += charged[s - 1];
    }
    for c in charged.iter_mut() {
        *c += initial_charge;
    }
    BatteryProfile { used_kwh: used, charged_kwh: charged }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnassignedTrip,
    DoubleAssignedTrip,
    SlotConflict,
    TimeInfeasiblePair,
    BatteryUnderflow,
    BatteryOverflow,
    LiquidVehicleCharging,
    DanglingReference,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vehicle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trip: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_kind(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Checks a solution against every constraint; all problems become report
/// entries, so this never fails. An empty report on a solution covering all
/// trips means the solution is feasible and complete.
pub fn validate_solution(instance: &Instance, solution: &Solution) -> ValidationReport {
    let view = View::new(instance);
    validate_solution_view(&view, solution)
}

pub fn validate_solution_view(view: &View, solution: &Solution) -> ValidationReport {
    let mut report = ValidationReport::default();
    let grid = &view.instance.slot_grid;

    let mut push = |kind, vehicle: Option<&str>, trip: Option<&str>, pole: Option<&str>, slot, detail: String| {
        report.violations.push(Violation {
            kind,
            vehicle: vehicle.map(str::to_string),
            trip: trip.map(str::to_string),
            pole: pole.map(str::to_string),
            slot,
            detail,
        });
    };

    // Dangling references make the remaining checks skip those entries.
    for (v, t) in &solution.trip_assignments {
        if view.model_of(v).is_none() {
            push(ViolationKind::DanglingReference, Some(v), Some(t), None, None,
                format!("unknown vehicle '{v}'"));
        }
        if view.trip_task(t).is_none() {
            push(ViolationKind::DanglingReference, Some(v), Some(t), None, None,
                format!("unknown trip '{t}'"));
        }
    }
    for (v, p, s) in &solution.charging_assignments {
        if view.model_of(v).is_none() {
            push(ViolationKind::DanglingReference, Some(v), None, Some(p), Some(*s),
                format!("unknown vehicle '{v}'"));
        }
        if view.charge_task(p, *s).is_none() {
            push(ViolationKind::DanglingReference, Some(v), None, Some(p), Some(*s),
                format!("unknown charging slot ('{p}', {s})"));
        }
    }

    // Exactly-one coverage per trip.
    let mut owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (v, t) in &solution.trip_assignments {
        owners.entry(t.as_str()).or_default().push(v.as_str());
    }
    for trip in &view.instance.trips {
        match owners.get(trip.id.as_str()) {
            None => push(ViolationKind::UnassignedTrip, None, Some(&trip.id), None, None,
                format!("trip '{}' is not assigned to any vehicle", trip.id)),
            Some(vs) if vs.len() > 1 => push(
                ViolationKind::DoubleAssignedTrip, None, Some(&trip.id), None, None,
                format!("trip '{}' is assigned to {} vehicles: {}", trip.id, vs.len(), vs.join(", ")),
            ),
            _ => {}
        }
    }

    // At most one vehicle per charging slot.
    let mut slot_users: BTreeMap<(&str, usize), Vec<&str>> = BTreeMap::new();
    for (v, p, s) in &solution.charging_assignments {
        slot_users.entry((p.as_str(), *s)).or_default().push(v.as_str());
    }
    for ((pole, slot), vs) in &slot_users {
        if vs.len() > 1 {
            push(ViolationKind::SlotConflict, None, None, Some(pole), Some(*slot),
                format!("charging slot ('{pole}', {slot}) is assigned to: {}", vs.join(", ")));
        }
    }

    // Charging is for electric vehicles only.
    for (v, p, s) in &solution.charging_assignments {
        if let Some(model) = view.model_of(v) {
            if model.kind == VehicleKind::LiquidFuel {
                push(ViolationKind::LiquidVehicleCharging, Some(v), None, Some(p), Some(*s),
                    format!("liquid-fuel vehicle '{v}' assigned to charging slot ('{p}', {s})"));
            }
        }
    }

    // Pairwise time feasibility over every task pair of each vehicle.
    for vehicle in &view.instance.vehicles {
        let schedule = view.schedule_of(solution, &vehicle.id);
        for i in 0..schedule.len() {
            for j in (i + 1)..schedule.len() {
                let (a, b) = (&schedule[i], &schedule[j]);
                if !view.pair_feasible(a, b) {
                    let trip_id = match &b.reference {
                        TaskRef::Trip(id) => Some(id.as_str()),
                        TaskRef::Charge { .. } => None,
                    };
                    push(ViolationKind::TimeInfeasiblePair, Some(&vehicle.id), trip_id, None, None,
                        format!("{} cannot be followed by {} on vehicle '{}'",
                            a.reference, b.reference, vehicle.id));
                }
            }
        }
    }

    // Battery window at every slot boundary for electric vehicles.
    for vehicle in &view.instance.vehicles {
        let Some(model) = view.model_of(&vehicle.id) else { continue };
        if model.kind != VehicleKind::Electric {
            continue;
        }
        let schedule = view.schedule_of(solution, &vehicle.id);
        let profile = profile_of_schedule(view, &schedule, &model.id, vehicle.initial_charge_kwh);
        for s in 0..grid.slot_count() {
            let level = profile.level_kwh(s);
            if level < BATTERY_EPS {
                push(ViolationKind::BatteryUnderflow, Some(&vehicle.id), None, None, Some(s),
                    format!("vehicle '{}' battery level {level:.6} kWh at end of slot {s}", vehicle.id));
            } else if level > model.battery_capacity_kwh + BATTERY_EPS {
                push(ViolationKind::BatteryOverflow, Some(&vehicle.id), None, None, Some(s),
                    format!("vehicle '{}' battery level {level:.6} kWh exceeds capacity {} at end of slot {s}",
                        vehicle.id, model.battery_capacity_kwh));
            }
        }
    }

    report
}

/// Weighted energy cost of a solution: for each vehicle, the unit cost of its
/// model's energy times assigned trip energies plus induced deadhead energies.
/// Defined for partial and infeasible solutions; an empty solution costs zero.
pub fn solution_cost(instance: &Instance, solution: &Solution) -> f64 {
    let view = View::new(instance);
    solution_cost_view(&view, solution)
}

pub fn solution_cost_view(view: &View, solution: &Solution) -> f64 {
    view.instance
        .vehicles
        .iter()
        .map(|v| vehicle_cost_view(view, solution, &v.id))
        .sum()
}

/// Cost restricted to one vehicle; `solution_cost` is the sum over vehicles.
pub fn vehicle_cost_view(view: &View, solution: &Solution, vehicle: &str) -> f64 {
    let Some(model) = view.model_of(vehicle) else { return 0.0 };
    let schedule = view.schedule_of(solution, vehicle);
    cost_of_schedule(view, &schedule, &model.id, view.cost_weight(vehicle))
}

pub(crate) fn cost_of_schedule(view: &View, schedule: &[Task], model: &str, weight: f64) -> f64 {
    let trips: f64 = schedule
        .iter()
        .filter_map(|t| match &t.reference {
            TaskRef::Trip(id) => Some(view.trip_energy(id, model)),
            TaskRef::Charge { .. } => None,
        })
        .sum();
    let deadheads: f64 = view.schedule_deadheads(schedule, model).iter().map(|(_, e)| e).sum();
    weight * (trips + deadheads)
}

/// Wrapper matching the spec'd operation shape; see [`View::pair_feasible`].
pub fn pair_feasible(instance: &Instance, x1: &Task, x2: &Task) -> bool {
    View::new(instance).pair_feasible(x1, x2)
}
