//! Exact solving: the MILP model with LP export for external solvers, and a
//! built-in depth-first branch-and-bound that certifies optimality on small
//! instances.

mod lp;
mod milp;

pub use lp::{export_lp, parse_lp, parse_lp_file, write_lp};
pub use milp::{
    build_milp, build_milp_capped, models_equal, sanitize, Constraint, MilpModel, Sense, VarKind,
    Variable, DEFAULT_VAR_CAP,
};

use crate::error::{FleetError, Result};
use crate::feasibility::{
    profile_of_schedule, solution_cost_view, validate_solution_view, Task, View, BATTERY_EPS,
};
use crate::model::{Instance, Solution, VehicleKind};
use serde::Serialize;
use std::collections::BTreeSet;
use std::time::Instant;

/// Result of an exact solve, with its optimality certificate fields.
#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub solution: Solution,
    pub cost: f64,
    /// True when the search space was exhausted; false on a time limit with
    /// an incumbent.
    pub optimal: bool,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub optimal: bool,
    pub nodes_explored: u64,
    pub incumbent_cost: f64,
}

impl ExactOutcome {
    pub fn certificate(&self) -> Certificate {
        Certificate {
            optimal: self.optimal,
            nodes_explored: self.nodes_explored,
            incumbent_cost: crate::model::round6(self.cost),
        }
    }
}

struct VehicleState {
    id: String,
    model_id: String,
    electric: bool,
    weight: f64,
    capacity: f64,
    initial: f64,
    schedule: Vec<Task>,
}

struct Search<'a> {
    view: &'a View<'a>,
    trips: Vec<Task>,
    vehicles: Vec<VehicleState>,
    /// Lower bound on the cost of serving trips from index `d` onward.
    suffix_bound: Vec<f64>,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
    incumbent: Option<(f64, Solution)>,
}

const COST_EPS: f64 = 1e-9;

impl<'a> Search<'a> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(128) && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Depth-first branch over vehicles for the trip at `depth`, trips taken
    /// in chronological order, cheapest vehicle first.
    fn assign(&mut self, depth: usize, partial_cost: f64, assigned: &mut Vec<usize>) {
        if self.tick() {
            return;
        }
        if depth == self.trips.len() {
            self.complete_leaf(assigned);
            return;
        }
        let trip = self.trips[depth].clone();

        // Candidates with their incremental cost; identical empty vehicles are
        // interchangeable, so keep only the first of each signature.
        let mut seen_empty: BTreeSet<(String, u64)> = BTreeSet::new();
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for (vi, vehicle) in self.vehicles.iter().enumerate() {
            if vehicle.schedule.is_empty() {
                let signature = (vehicle.model_id.clone(), vehicle.initial.to_bits());
                if !seen_empty.insert(signature) {
                    continue;
                }
            }
            let Some(increment) = self.increment(vehicle, &trip) else { continue };
            candidates.push((increment, vi));
        }
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        for (increment, vi) in candidates {
            if self.timed_out {
                return;
            }
            let cost = partial_cost + increment;
            let bound = cost + self.suffix_bound[depth + 1];
            if let Some((best, _)) = &self.incumbent {
                if bound >= *best - COST_EPS {
                    continue;
                }
            }
            self.vehicles[vi].schedule.push(trip.clone());
            assigned.push(vi);
            self.assign(depth + 1, cost, assigned);
            assigned.pop();
            self.vehicles[vi].schedule.pop();
        }
    }

    /// Appending cost of `trip` on `vehicle`, or None when time-infeasible.
    /// Trips arrive in chronological order, so the new trip always lands at
    /// the end of the schedule.
    fn increment(&self, vehicle: &VehicleState, trip: &Task) -> Option<f64> {
        for existing in &vehicle.schedule {
            if existing.end_s > trip.start_s {
                return None; // overlap: same or later end on an earlier start
            }
            if !self.view.pair_feasible(existing, trip) {
                return None;
            }
        }
        let mut energy = self.view.trip_energy(
            match &trip.reference {
                crate::feasibility::TaskRef::Trip(id) => id,
                _ => unreachable!("only trips are branched"),
            },
            &vehicle.model_id,
        );
        if let Some(last) = vehicle.schedule.last() {
            energy += self
                .view
                .deadhead_energy(&last.destination, &trip.origin, &vehicle.model_id)?;
        }
        Some(vehicle.weight * energy)
    }

    /// All trips are placed: insert charging exhaustively and keep the
    /// cheapest feasible completion.
    fn complete_leaf(&mut self, assigned: &[usize]) {
        let mut solution = Solution::default();
        for (ti, vi) in assigned.iter().enumerate() {
            if let crate::feasibility::TaskRef::Trip(id) = &self.trips[ti].reference {
                solution
                    .trip_assignments
                    .insert((self.vehicles[*vi].id.clone(), id.clone()));
            }
        }
        self.charging_search(&mut solution);
    }

    /// Earliest battery violation across electric vehicles, as
    /// (dip slot, vehicle index).
    fn first_violation(&self, solution: &Solution) -> Option<(usize, usize)> {
        let mut worst: Option<(usize, usize)> = None;
        for (vi, vehicle) in self.vehicles.iter().enumerate() {
            if !vehicle.electric {
                continue;
            }
            let schedule = self.view.schedule_of(solution, &vehicle.id);
            let profile =
                profile_of_schedule(self.view, &schedule, &vehicle.model_id, vehicle.initial);
            if let Some(dip) = profile.first_below(BATTERY_EPS) {
                if worst.is_none_or(|(d, v)| (dip, vi) < (d, v)) {
                    worst = Some((dip, vi));
                }
            }
        }
        worst
    }

    fn charging_search(&mut self, solution: &mut Solution) {
        if self.tick() {
            return;
        }
        let cost = solution_cost_view(self.view, solution);
        if let Some((best, _)) = &self.incumbent {
            if cost >= *best - COST_EPS {
                return;
            }
        }
        let Some((dip, vi)) = self.first_violation(solution) else {
            debug_assert!(validate_solution_view(self.view, solution).is_empty());
            self.incumbent = Some((cost, solution.clone()));
            return;
        };

        let vehicle = &self.vehicles[vi];
        let vehicle_id = vehicle.id.clone();
        let model_id = vehicle.model_id.clone();
        let capacity = vehicle.capacity;
        let initial = vehicle.initial;
        let schedule = self.view.schedule_of(solution, &vehicle_id);
        let dip_level =
            profile_of_schedule(self.view, &schedule, &model_id, initial).level_kwh(dip);
        let occupied: BTreeSet<(String, usize)> = solution
            .charging_assignments
            .iter()
            .map(|(_, p, s)| (p.clone(), *s))
            .collect();

        let mut candidates: Vec<(f64, usize, String)> = Vec::new();
        for pole in &self.view.instance.charging_poles {
            if self.view.pole_power(&pole.id, &model_id) <= 0.0 {
                continue;
            }
            for slot in 0..=dip {
                if occupied.contains(&(pole.id.clone(), slot)) {
                    continue;
                }
                let task = self.view.charge_task(&pole.id, slot).expect("slot in range");
                let fits = schedule.iter().all(|existing| {
                    if existing.end_s <= task.start_s {
                        self.view.pair_feasible(existing, &task)
                    } else if task.end_s <= existing.start_s {
                        self.view.pair_feasible(&task, existing)
                    } else {
                        false
                    }
                });
                if !fits {
                    continue;
                }
                let mut hypothetical = schedule.clone();
                let pos = hypothetical
                    .binary_search_by(|t| t.chrono_key().cmp(&task.chrono_key()))
                    .unwrap_or_else(|p| p);
                hypothetical.insert(pos, task);
                let repaired = profile_of_schedule(self.view, &hypothetical, &model_id, initial);
                if repaired.level_kwh(dip) <= dip_level {
                    continue;
                }
                if (0..repaired.slot_count())
                    .any(|s| repaired.level_kwh(s) > capacity + BATTERY_EPS)
                {
                    continue;
                }
                let added = crate::feasibility::cost_of_schedule(
                    self.view,
                    &hypothetical,
                    &model_id,
                    self.view.cost_weight(&vehicle_id),
                );
                candidates.push((added, slot, pole.id.clone()));
            }
        }
        candidates.sort_by(|a, b| {
            a.0.partial_cmp(&b.0).unwrap().then_with(|| (a.1, &a.2).cmp(&(b.1, &b.2)))
        });

        for (_, slot, pole) in candidates {
            if self.timed_out {
                return;
            }
            let key = (vehicle_id.clone(), pole, slot);
            solution.charging_assignments.insert(key.clone());
            self.charging_search(solution);
            solution.charging_assignments.remove(&key);
        }
    }
}

/// Depth-first branch-and-bound over trip-to-vehicle choices in chronological
/// trip order, with charging slots inserted by exhaustive repair per leaf.
/// Returns the global minimum with `optimal = true`, the best incumbent with
/// `optimal = false` on a time limit, or an infeasibility proof.
pub fn solve_exact(instance: &Instance, time_limit_s: f64) -> Result<ExactOutcome> {
    let view = View::new(instance);
    let mut trips: Vec<Task> = instance
        .trips
        .iter()
        .filter_map(|t| view.trip_task(&t.id))
        .collect();
    trips.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));

    let vehicles: Vec<VehicleState> = instance
        .vehicles
        .iter()
        .map(|v| {
            let model = view.model_of(&v.id).expect("validated");
            VehicleState {
                id: v.id.clone(),
                model_id: model.id.clone(),
                electric: model.kind == VehicleKind::Electric,
                weight: view.cost_weight(&v.id),
                capacity: model.battery_capacity_kwh,
                initial: v.initial_charge_kwh,
                schedule: Vec::new(),
            }
        })
        .collect();

    // Admissible bound: every remaining trip pays at least its cheapest
    // weighted model energy, deadheads ignored.
    let mut suffix_bound = vec![0.0; trips.len() + 1];
    for (i, trip) in trips.iter().enumerate().rev() {
        let crate::feasibility::TaskRef::Trip(id) = &trip.reference else { unreachable!() };
        let cheapest = vehicles
            .iter()
            .map(|v| v.weight * view.trip_energy(id, &v.model_id))
            .fold(f64::INFINITY, f64::min);
        suffix_bound[i] = suffix_bound[i + 1] + cheapest;
    }

    let mut search = Search {
        view: &view,
        trips,
        vehicles,
        suffix_bound,
        deadline: Instant::now() + std::time::Duration::from_secs_f64(time_limit_s.max(0.0)),
        nodes: 0,
        timed_out: false,
        incumbent: None,
    };
    search.assign(0, 0.0, &mut Vec::new());
    log::debug!(
        "exact: {} nodes explored, timed_out={}, incumbent={:?}",
        search.nodes,
        search.timed_out,
        search.incumbent.as_ref().map(|(c, _)| *c)
    );

    match (search.incumbent, search.timed_out) {
        (Some((cost, solution)), timed_out) => Ok(ExactOutcome {
            solution,
            cost,
            optimal: !timed_out,
            nodes_explored: search.nodes,
        }),
        (None, true) => Err(FleetError::TimeLimit),
        (None, false) => Err(FleetError::SearchInfeasible { nodes_explored: search.nodes }),
    }
}
