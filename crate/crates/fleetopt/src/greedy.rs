//! Biased-cost greedy construction.
//!
//! Repeatedly commits the (vehicle, trip) pair with the lowest biased cost:
//! the assignment's energy plus deadhead energies to its schedule neighbors
//! plus an `alpha`-weighted layover penalty. After each commit, charging slots
//! are inserted for electric vehicles whenever their ledger dips below the
//! safety floor.

use crate::error::{FleetError, Result};
use crate::feasibility::{
    profile_of_schedule, validate_solution_view, Task, TaskRef, View, BATTERY_EPS,
};
use crate::model::{Instance, Solution, VehicleKind};
use crate::par;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy)]
pub struct GreedyConfig {
    /// Layover penalty in kWh per second of waiting around an assignment.
    pub alpha: f64,
    /// Extra headroom above the battery lower bound that triggers charging
    /// insertion; zero targets the constraint bound itself.
    pub charging_safety_floor_kwh: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self { alpha: 0.0005, charging_safety_floor_kwh: 0.0 }
    }
}

impl GreedyConfig {
    pub(crate) fn floor(&self) -> f64 {
        self.charging_safety_floor_kwh.max(0.0) + BATTERY_EPS
    }
}

/// Biased costs of candidate assignments; infinity encodes infeasibility
/// under the current partial solution.
#[derive(Debug, Clone, Default)]
pub struct CostLedger {
    pub entries: BTreeMap<(String, String), f64>,
}

impl CostLedger {
    /// Lowest finite entry; ties resolve to the smallest (vehicle, trip) key.
    pub fn argmin(&self) -> Option<(&(String, String), f64)> {
        let mut best: Option<(&(String, String), f64)> = None;
        for (key, cost) in &self.entries {
            if cost.is_finite() && best.is_none_or(|(_, c)| *cost < c) {
                best = Some((key, *cost));
            }
        }
        best
    }
}

/// Biased cost of assigning `task` to `vehicle` on top of `partial`.
pub fn biased_cost(
    instance: &Instance,
    partial: &Solution,
    vehicle: &str,
    task: &Task,
    alpha: f64,
) -> f64 {
    let view = View::new(instance);
    let cfg = GreedyConfig { alpha, ..Default::default() };
    biased_cost_view(&view, partial, vehicle, task, &cfg)
}

pub(crate) fn biased_cost_view(
    view: &View,
    partial: &Solution,
    vehicle: &str,
    task: &Task,
    cfg: &GreedyConfig,
) -> f64 {
    let Some(model) = view.model_of(vehicle) else { return f64::INFINITY };
    let schedule = view.schedule_of(partial, vehicle);

    // Every already-assigned task must sit cleanly before or after the
    // candidate, with a reachable deadhead either way.
    let mut prev: Option<&Task> = None;
    let mut next: Option<&Task> = None;
    for assigned in &schedule {
        if assigned.end_s <= task.start_s {
            if !view.pair_feasible(assigned, task) {
                return f64::INFINITY;
            }
            if prev.is_none_or(|p| (assigned.end_s, &assigned.reference) > (p.end_s, &p.reference)) {
                prev = Some(assigned);
            }
        } else if task.end_s <= assigned.start_s {
            if !view.pair_feasible(task, assigned) {
                return f64::INFINITY;
            }
            if next.is_none_or(|n| (assigned.start_s, &assigned.reference) < (n.start_s, &n.reference)) {
                next = Some(assigned);
            }
        } else {
            return f64::INFINITY; // time overlap
        }
    }

    let mut cost = match &task.reference {
        TaskRef::Trip(id) => view.trip_energy(id, &model.id),
        TaskRef::Charge { .. } => 0.0,
    };
    if let Some(p) = prev {
        cost += view.deadhead_energy(&p.destination, &task.origin, &model.id).unwrap_or(0.0);
        cost += cfg.alpha * (task.start_s - p.end_s) as f64;
    }
    if let Some(n) = next {
        cost += view.deadhead_energy(&task.destination, &n.origin, &model.id).unwrap_or(0.0);
        cost += cfg.alpha * (n.start_s - task.end_s) as f64;
    }

    if model.kind == VehicleKind::Electric && !admits_charging_repair(view, partial, vehicle, task, cfg)
    {
        return f64::INFINITY;
    }
    cost
}

/// Would the vehicle's battery still be repairable if `task` were committed?
fn admits_charging_repair(
    view: &View,
    partial: &Solution,
    vehicle: &str,
    task: &Task,
    cfg: &GreedyConfig,
) -> bool {
    let model = match view.model_of(vehicle) {
        Some(m) => m,
        None => return false,
    };
    let mut schedule = view.schedule_of(partial, vehicle);
    insert_sorted(&mut schedule, task.clone());
    let profile = profile_of_schedule(view, &schedule, &model.id, view.initial_charge(vehicle));
    if profile.first_below(cfg.floor()).is_none() {
        return true;
    }
    let mut scratch = partial.clone();
    match &task.reference {
        TaskRef::Trip(id) => {
            scratch.trip_assignments.insert((vehicle.to_string(), id.clone()));
        }
        TaskRef::Charge { pole, slot } => {
            scratch.charging_assignments.insert((vehicle.to_string(), pole.clone(), *slot));
        }
    }
    repair_charging(view, &mut scratch, vehicle, cfg).is_ok()
}

fn insert_sorted(schedule: &mut Vec<Task>, task: Task) {
    let pos = schedule
        .binary_search_by(|t| t.chrono_key().cmp(&task.chrono_key()))
        .unwrap_or_else(|p| p);
    schedule.insert(pos, task);
}

/// True when `task` fits the schedule without overlap and with reachable
/// deadheads against every existing task.
fn fits_schedule(view: &View, schedule: &[Task], task: &Task) -> bool {
    schedule.iter().all(|assigned| {
        if assigned.end_s <= task.start_s {
            view.pair_feasible(assigned, task)
        } else if task.end_s <= assigned.start_s {
            view.pair_feasible(task, assigned)
        } else {
            false
        }
    })
}

/// Inserts unoccupied charging slots until the vehicle's ledger clears the
/// safety floor at every slot boundary. Candidates are ranked by deadhead
/// energy plus `alpha`-weighted waiting around the insertion, earliest slot
/// first on ties. Returns the inserted (pole, slot) pairs.
pub(crate) fn repair_charging(
    view: &View,
    solution: &mut Solution,
    vehicle: &str,
    cfg: &GreedyConfig,
) -> Result<Vec<(String, usize)>> {
    let model = view
        .model_of(vehicle)
        .ok_or_else(|| FleetError::Validation(format!("unknown vehicle '{vehicle}'")))?
        .clone();
    let initial = view.initial_charge(vehicle);
    let floor = cfg.floor();
    let mut inserted = Vec::new();

    loop {
        let schedule = view.schedule_of(solution, vehicle);
        let profile = profile_of_schedule(view, &schedule, &model.id, initial);
        let Some(dip) = profile.first_below(floor) else {
            return Ok(inserted);
        };
        let dip_level = profile.level_kwh(dip);

        let occupied: BTreeSet<(&str, usize)> = solution
            .charging_assignments
            .iter()
            .map(|(_, p, s)| (p.as_str(), *s))
            .collect();

        // Candidate ranking key: (score, slot, pole id).
        let mut best: Option<(f64, usize, String, Task)> = None;
        for pole in &view.instance.charging_poles {
            if view.pole_power(&pole.id, &model.id) <= 0.0 {
                continue;
            }
            for slot in 0..=dip {
                if occupied.contains(&(pole.id.as_str(), slot)) {
                    continue;
                }
                let task = view.charge_task(&pole.id, slot).expect("slot in range");
                if !fits_schedule(view, &schedule, &task) {
                    continue;
                }
                let mut hypothetical = schedule.clone();
                insert_sorted(&mut hypothetical, task.clone());
                let repaired = profile_of_schedule(view, &hypothetical, &model.id, initial);
                if repaired.level_kwh(dip) <= dip_level {
                    continue; // charge is eaten by its own deadheads
                }
                let overflow = (0..repaired.slot_count())
                    .any(|s| repaired.level_kwh(s) > model.battery_capacity_kwh + BATTERY_EPS);
                if overflow {
                    continue;
                }
                let score = insertion_score(view, &schedule, &task, &model.id, cfg.alpha);
                let candidate = (score, slot, pole.id.clone());
                let better = match &best {
                    None => true,
                    Some((s, sl, p, _)) => candidate < (*s, *sl, p.clone()),
                };
                if better {
                    best = Some((score, slot, pole.id.clone(), task));
                }
            }
        }

        match best {
            Some((_, slot, pole, _)) => {
                solution.charging_assignments.insert((vehicle.to_string(), pole.clone(), slot));
                inserted.push((pole, slot));
            }
            None => return Err(FleetError::ChargingRepairFailed { vehicle: vehicle.to_string() }),
        }
    }
}

/// Deadhead energy plus waiting bias around inserting `task` into `schedule`.
fn insertion_score(view: &View, schedule: &[Task], task: &Task, model: &str, alpha: f64) -> f64 {
    let mut score = 0.0;
    let prev = schedule
        .iter()
        .filter(|t| t.end_s <= task.start_s)
        .max_by(|a, b| (a.end_s, &a.reference).cmp(&(b.end_s, &b.reference)));
    let next = schedule
        .iter()
        .filter(|t| task.end_s <= t.start_s)
        .min_by(|a, b| (a.start_s, &a.reference).cmp(&(b.start_s, &b.reference)));
    if let Some(p) = prev {
        score += view.deadhead_energy(&p.destination, &task.origin, model).unwrap_or(0.0);
        score += alpha * (task.start_s - p.end_s) as f64;
    }
    if let Some(n) = next {
        score += view.deadhead_energy(&task.destination, &n.origin, model).unwrap_or(0.0);
        score += alpha * (n.start_s - task.end_s) as f64;
    }
    score
}

/// Post-commit bookkeeping: recomputes the committed vehicle's ledger row,
/// inserts charging for electric vehicles as needed, and refreshes other
/// electric vehicles' rows when newly occupied slots may affect them.
pub fn update_after_assign(
    instance: &Instance,
    partial: &mut Solution,
    ledger: &mut CostLedger,
    vehicle: &str,
    task: &Task,
    config: &GreedyConfig,
) -> Result<Vec<(String, usize)>> {
    let view = View::new(instance);
    update_after_assign_view(&view, partial, ledger, vehicle, task, config)
}

pub(crate) fn update_after_assign_view(
    view: &View,
    partial: &mut Solution,
    ledger: &mut CostLedger,
    vehicle: &str,
    task: &Task,
    cfg: &GreedyConfig,
) -> Result<Vec<(String, usize)>> {
    if let TaskRef::Trip(id) = &task.reference {
        ledger.entries.retain(|(_, trip), _| trip != id);
    }

    let inserted = if view.is_electric(vehicle) {
        repair_charging(view, partial, vehicle, cfg)?
    } else {
        Vec::new()
    };

    let assigned: BTreeSet<&str> =
        partial.trip_assignments.iter().map(|(_, t)| t.as_str()).collect();
    let unassigned: Vec<&crate::model::TransitTrip> = view
        .instance
        .trips
        .iter()
        .filter(|t| !assigned.contains(t.id.as_str()))
        .collect();

    let mut stale: Vec<&str> = vec![vehicle];
    if !inserted.is_empty() {
        for v in &view.instance.vehicles {
            if v.id != vehicle && view.is_electric(&v.id) {
                stale.push(&v.id);
            }
        }
    }
    for v in stale {
        let costs = par::map_collect(&unassigned, |trip| {
            let task = view.trip_task(&trip.id).expect("trip exists");
            biased_cost_view(view, partial, v, &task, cfg)
        });
        for (trip, cost) in unassigned.iter().zip(costs) {
            ledger.entries.insert((v.to_string(), trip.id.clone()), cost);
        }
    }
    Ok(inserted)
}

/// Builds a complete feasible solution or fails naming the first trip that no
/// vehicle can take.
pub fn greedy_assign(instance: &Instance, config: &GreedyConfig) -> Result<Solution> {
    let view = View::new(instance);
    greedy_assign_view(&view, config)
}

pub(crate) fn greedy_assign_view(view: &View, cfg: &GreedyConfig) -> Result<Solution> {
    let mut solution = Solution::default();
    let mut unassigned: BTreeSet<String> =
        view.instance.trips.iter().map(|t| t.id.clone()).collect();

    let pairs: Vec<(String, String)> = view
        .instance
        .vehicles
        .iter()
        .flat_map(|v| {
            view.instance.trips.iter().map(move |t| (v.id.clone(), t.id.clone()))
        })
        .collect();
    let costs = par::map_collect(&pairs, |(v, t)| {
        let task = view.trip_task(t).expect("trip exists");
        biased_cost_view(view, &Solution::default(), v, &task, cfg)
    });
    let mut ledger = CostLedger::default();
    for (pair, cost) in pairs.into_iter().zip(costs) {
        ledger.entries.insert(pair, cost);
    }

    while !unassigned.is_empty() {
        let Some(((vehicle, trip), _)) = ledger.argmin().map(|(k, c)| (k.clone(), c)) else {
            let first = unassigned.iter().next().expect("nonempty").clone();
            return Err(FleetError::Infeasible { trip: first });
        };
        let task = view.trip_task(&trip).expect("trip exists");
        solution.trip_assignments.insert((vehicle.clone(), trip.clone()));
        unassigned.remove(&trip);
        update_after_assign_view(view, &mut solution, &mut ledger, &vehicle, &task, cfg)?;
    }

    log::debug!(
        "greedy: {} trips assigned, {} charging slots inserted",
        solution.trip_assignments.len(),
        solution.charging_assignments.len()
    );
    debug_assert!(
        validate_solution_view(view, &solution).is_empty(),
        "greedy must return feasible solutions"
    );
    Ok(solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::{solution_cost, validate_solution};
    use crate::model::{
        generate_instance, CostParams, DeadheadEntry, Instance, Location, SlotGrid, TransitTrip,
        TripEnergyEntry, Vehicle, VehicleModelSpec,
    };

    fn single_vehicle_instance(trip_energies: &[(i64, i64, f64)]) -> Instance {
        // All trips loop between two stops; index encodes times and energy.
        let mut trips = Vec::new();
        let mut trip_energy = Vec::new();
        for (i, (start, end, energy)) in trip_energies.iter().enumerate() {
            let id = format!("t{i}");
            trips.push(TransitTrip {
                id: id.clone(),
                origin: "a".into(),
                destination: "a".into(),
                start_s: *start,
                end_s: *end,
            });
            trip_energy.push(TripEnergyEntry { trip: id, model: "diesel".into(), energy_kwh: *energy });
        }
        let mut inst = Instance {
            models: vec![VehicleModelSpec {
                id: "diesel".into(),
                kind: VehicleKind::LiquidFuel,
                battery_capacity_kwh: 0.0,
            }],
            vehicles: vec![Vehicle { id: "v1".into(), model: "diesel".into(), initial_charge_kwh: 0.0 }],
            locations: vec![Location { id: "a".into(), lat: 35.0, lon: -85.0 }],
            trips,
            charging_poles: vec![],
            slot_grid: SlotGrid { day_start_s: 0, day_end_s: 86400, slot_length_s: 3600 },
            deadhead: vec![DeadheadEntry {
                from: "a".into(),
                to: "a".into(),
                duration_s: 0,
                energy_kwh: [("diesel".to_string(), 0.0)].into(),
            }],
            trip_energy,
            costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
        };
        inst.normalize();
        inst.validate().unwrap();
        inst
    }

    #[test]
    fn biased_cost_no_neighbors_is_base_energy() {
        let inst = single_vehicle_instance(&[(1000, 2000, 5.0)]);
        let view = View::new(&inst);
        let task = view.trip_task("t0").unwrap();
        let cost = biased_cost(&inst, &Solution::default(), "v1", &task, 0.001);
        assert_eq!(cost, 5.0);
    }

    #[test]
    fn biased_cost_zero_gap_neighbor() {
        let inst = single_vehicle_instance(&[(1000, 2000, 5.0), (2000, 3000, 7.0)]);
        let mut partial = Solution::default();
        partial.trip_assignments.insert(("v1".into(), "t0".into()));
        let view = View::new(&inst);
        let task = view.trip_task("t1").unwrap();
        let cost = biased_cost(&inst, &partial, "v1", &task, 0.001);
        assert_eq!(cost, 7.0, "zero deadhead and zero wait add nothing");
    }

    #[test]
    fn biased_cost_gap_and_deadhead() {
        // Previous task ends 600 s before the candidate at a location with a
        // 1.0 kWh deadhead; alpha 0.001 adds 0.6: total 5 + 1 + 0.6 = 6.6.
        let mut inst = crate::testutil::fixture();
        inst.trips.push(TransitTrip {
            id: "tc".into(),
            origin: "stopA".into(),
            destination: "stopB".into(),
            start_s: 9 * 3600 + 600,
            end_s: 10 * 3600,
        });
        for model in ["bev", "diesel"] {
            inst.trip_energy.push(TripEnergyEntry {
                trip: "tc".into(),
                model: model.into(),
                energy_kwh: 5.0,
            });
        }
        inst.normalize();
        // t1 ends at stopB 09:00; candidate starts 09:10 at stopA with the
        // (stopB, stopA) edge costing 3.0 for diesel; rewrite it to 1.0.
        for d in inst.deadhead.iter_mut() {
            if d.from == "stopB" && d.to == "stopA" {
                d.energy_kwh.insert("diesel".into(), 1.0);
                d.duration_s = 600;
            }
        }
        let mut partial = Solution::default();
        partial.trip_assignments.insert(("icea".into(), "t1".into()));
        let view = View::new(&inst);
        let task = view.trip_task("tc").unwrap();
        let cost = biased_cost(&inst, &partial, "icea", &task, 0.001);
        assert!((cost - 6.6).abs() < 1e-12, "got {cost}");
    }

    #[test]
    fn greedy_two_sequential_trips_one_vehicle() {
        let inst = single_vehicle_instance(&[(1000, 2000, 5.0), (3000, 4000, 7.0)]);
        let solution = greedy_assign(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(solution.trip_assignments.len(), 2);
        assert!(validate_solution(&inst, &solution).is_empty());
        assert_eq!(solution_cost(&inst, &solution), 12.0);
    }

    #[test]
    fn greedy_prefers_cheaper_vehicle() {
        // One trip; EV energy 4 vs diesel 8 with equal weights: EV takes it.
        let mut inst = crate::testutil::fixture();
        inst.costs = CostParams { k_gas: 1.0, k_elec: 1.0 };
        inst.trips.retain(|t| t.id == "t1");
        inst.trip_energy.retain(|e| e.trip == "t1");
        for e in inst.trip_energy.iter_mut() {
            e.energy_kwh = if e.model == "bev" { 4.0 } else { 8.0 };
        }
        inst.normalize();
        inst.validate().unwrap();
        let solution = greedy_assign(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(solution.vehicle_of_trip("t1"), Some("eva"));
    }

    #[test]
    fn greedy_infeasible_names_a_trip() {
        let inst = single_vehicle_instance(&[(1000, 2000, 5.0), (1500, 2500, 7.0)]);
        match greedy_assign(&inst, &GreedyConfig::default()) {
            Err(FleetError::Infeasible { trip }) => assert_eq!(trip, "t1"),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let inst = generate_instance(2, 8, 2, 3, 5);
        let a = greedy_assign(&inst, &GreedyConfig::default()).unwrap();
        let b = greedy_assign(&inst, &GreedyConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn greedy_output_validates_on_generated_instances() {
        for seed in 1..=6 {
            let inst = generate_instance(2, 10, 3, 5, seed);
            let solution = greedy_assign(&inst, &GreedyConfig::default()).unwrap();
            let report = validate_solution(&inst, &solution);
            assert!(report.is_empty(), "seed {seed}: {}", report.to_json());
            assert_eq!(solution.trip_assignments.len(), inst.trips.len());
        }
    }

    #[test]
    fn alpha_zero_single_vehicle_orders_by_energy_plus_deadhead() {
        // Three chained trips; with alpha = 0 the greedy commits them purely
        // in energy-plus-deadhead order: t2 (3.0), t0 (5.0), t1 (7.0).
        let inst = single_vehicle_instance(&[
            (1000, 2000, 5.0),
            (3000, 4000, 7.0),
            (5000, 6000, 3.0),
        ]);
        let cfg = GreedyConfig { alpha: 0.0, ..Default::default() };
        let solution = greedy_assign(&inst, &cfg).unwrap();
        assert_eq!(solution.trip_assignments.len(), 3);

        // Replay the ledger by hand: first argmin must be t2.
        let view = View::new(&inst);
        let empty = Solution::default();
        let costs: Vec<f64> = ["t0", "t1", "t2"]
            .iter()
            .map(|t| biased_cost_view(&view, &empty, "v1", &view.trip_task(t).unwrap(), &cfg))
            .collect();
        assert_eq!(costs, vec![5.0, 7.0, 3.0]);
    }

    fn charging_fixture(initial: f64, trip_energy: f64) -> Instance {
        let mut inst = crate::testutil::fixture();
        inst.vehicles.retain(|v| v.id == "eva");
        inst.vehicles[0].initial_charge_kwh = initial;
        inst.trips.retain(|t| t.id == "t1");
        inst.trip_energy.retain(|e| e.trip == "t1");
        for e in inst.trip_energy.iter_mut() {
            if e.model == "bev" {
                e.energy_kwh = trip_energy;
            }
        }
        inst.normalize();
        inst.validate().unwrap();
        inst
    }

    #[test]
    fn update_inserts_charging_when_profile_dips() {
        // Initial 11 kWh, trip needs 12 plus a 1 kWh approach deadhead: the
        // profile dips below zero until one 45 kWh slot is inserted.
        let inst = charging_fixture(11.0, 12.0);
        let view = View::new(&inst);
        let cfg = GreedyConfig::default();
        let mut partial = Solution::default();
        partial.trip_assignments.insert(("eva".into(), "t1".into()));
        let mut ledger = CostLedger::default();
        let task = view.trip_task("t1").unwrap();
        let inserted =
            update_after_assign(&inst, &mut partial, &mut ledger, "eva", &task, &cfg).unwrap();
        assert!(!inserted.is_empty(), "a charging slot must be inserted");
        let profile = crate::feasibility::battery_profile(&inst, &partial, "eva").unwrap();
        assert!(profile.min_level() > 0.0, "profile must clear the floor");
        assert!(validate_solution(&inst, &partial).is_empty());
    }

    #[test]
    fn update_no_charging_for_liquid_vehicle() {
        let inst = crate::testutil::fixture();
        let cfg = GreedyConfig::default();
        let mut partial = Solution::default();
        partial.trip_assignments.insert(("icea".into(), "t1".into()));
        let mut ledger = CostLedger::default();
        let view = View::new(&inst);
        let task = view.trip_task("t1").unwrap();
        let inserted =
            update_after_assign(&inst, &mut partial, &mut ledger, "icea", &task, &cfg).unwrap();
        assert!(inserted.is_empty());
        assert!(partial.charging_assignments.is_empty());
    }

    #[test]
    fn repair_fails_when_every_slot_conflicts() {
        // The only charging slots overlap the trip itself, so no insertion
        // can save a drained battery.
        let mut inst = charging_fixture(11.0, 12.0);
        inst.slot_grid = SlotGrid { day_start_s: 8 * 3600, day_end_s: 9 * 3600, slot_length_s: 3600 };
        inst.normalize();
        let view = View::new(&inst);
        let mut solution = Solution::default();
        solution.trip_assignments.insert(("eva".into(), "t1".into()));
        match repair_charging(&view, &mut solution, "eva", &GreedyConfig::default()) {
            Err(FleetError::ChargingRepairFailed { vehicle }) => assert_eq!(vehicle, "eva"),
            other => panic!("expected repair failure, got {other:?}"),
        }
    }

    #[test]
    fn ledger_argmin_breaks_ties_by_vehicle_then_trip() {
        let mut ledger = CostLedger::default();
        ledger.entries.insert(("vb".into(), "t1".into()), 2.0);
        ledger.entries.insert(("va".into(), "t2".into()), 2.0);
        ledger.entries.insert(("va".into(), "t9".into()), f64::INFINITY);
        let (key, cost) = ledger.argmin().unwrap();
        assert_eq!(key, &("va".to_string(), "t2".to_string()));
        assert_eq!(cost, 2.0);
    }
}
