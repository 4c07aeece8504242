//! In-memory mixed-integer model of the assignment problem.
//!
//! Variables: binary trip assignments `a_v_t`, binary charging assignments
//! `ach_v_cp_s`, binary deadhead indicators `m_v_x1_x2` over ordered task
//! pairs, continuous per-slot charge `c_v_s`, and continuous battery level
//! `e_v_s` at each slot boundary (slot 0 is fixed to the initial charge,
//! standing in for a virtual pre-day charging slot).

use crate::error::{FleetError, Result};
use crate::feasibility::{Task, TaskRef, View};
use crate::model::Instance;
use std::collections::BTreeMap;

pub const DEFAULT_VAR_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Binary,
    Continuous { lb: f64, ub: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// (coefficient, variable index) pairs.
    pub terms: Vec<(f64, usize)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Minimization objective as (coefficient, variable index) pairs.
    pub objective: Vec<(f64, usize)>,
}

impl MilpModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    fn add_var(&mut self, name: String, kind: VarKind) -> usize {
        self.vars.push(Variable { name, kind });
        self.vars.len() - 1
    }
}

/// Structural equality that ignores declaration order: same variables with the
/// same kinds, same named constraints with the same term maps, same objective.
pub fn models_equal(a: &MilpModel, b: &MilpModel) -> bool {
    let vars = |m: &MilpModel| -> BTreeMap<String, VarKind> {
        m.vars.iter().map(|v| (v.name.clone(), v.kind.clone())).collect()
    };
    let constraints = |m: &MilpModel| -> BTreeMap<String, (BTreeMap<String, f64>, Sense, f64)> {
        m.constraints
            .iter()
            .map(|c| {
                let terms: BTreeMap<String, f64> = c
                    .terms
                    .iter()
                    .map(|(coef, idx)| (m.vars[*idx].name.clone(), *coef))
                    .collect();
                (c.name.clone(), (terms, c.sense, c.rhs))
            })
            .collect()
    };
    let objective = |m: &MilpModel| -> BTreeMap<String, f64> {
        m.objective.iter().map(|(coef, idx)| (m.vars[*idx].name.clone(), *coef)).collect()
    };
    vars(a) == vars(b) && constraints(a) == constraints(b) && objective(a) == objective(b)
}

/// Replaces anything outside `[A-Za-z0-9_]` with an underscore.
pub fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn task_token(task: &Task) -> String {
    match &task.reference {
        TaskRef::Trip(id) => sanitize(id),
        TaskRef::Charge { pole, slot } => format!("{}_{slot}", sanitize(pole)),
    }
}

pub fn build_milp(instance: &Instance) -> Result<MilpModel> {
    build_milp_capped(instance, DEFAULT_VAR_CAP)
}

#[allow(clippy::needless_range_loop)]
pub fn build_milp_capped(instance: &Instance, var_cap: u64) -> Result<MilpModel> {
    let view = View::new(instance);
    let grid = &instance.slot_grid;
    let slots = grid.slot_count();

    // Tasks in one global total order: trips plus every charging slot.
    let mut tasks: Vec<Task> = instance
        .trips
        .iter()
        .filter_map(|t| view.trip_task(&t.id))
        .collect();
    for pole in &instance.charging_poles {
        for slot in 0..slots {
            tasks.push(view.charge_task(&pole.id, slot).expect("slot in range"));
        }
    }
    tasks.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));

    let electric: Vec<&crate::model::Vehicle> = instance
        .vehicles
        .iter()
        .filter(|v| view.is_electric(&v.id))
        .collect();
    let n_trips = instance.trips.len() as u64;
    let n_vehicles = instance.vehicles.len() as u64;
    let n_elec = electric.len() as u64;
    let n_tasks_elec = tasks.len() as u64;
    let n_tasks_gas = n_trips;
    let pairs = |n: u64| n.saturating_mul(n.saturating_sub(1)) / 2;
    let projected = n_vehicles * n_trips
        + n_elec * (instance.charging_poles.len() as u64) * slots as u64
        + (n_vehicles - n_elec) * pairs(n_tasks_gas)
        + n_elec * pairs(n_tasks_elec)
        + 2 * n_elec * (slots as u64 + 1);
    if projected > var_cap {
        return Err(FleetError::ModelTooLarge { vars: projected, cap: var_cap });
    }

    let mut model = MilpModel::default();

    // a_v_t
    let mut a_idx: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for v in &instance.vehicles {
        for t in &instance.trips {
            let idx = model
                .add_var(format!("a_{}_{}", sanitize(&v.id), sanitize(&t.id)), VarKind::Binary);
            a_idx.insert((v.id.as_str(), t.id.as_str()), idx);
        }
    }

    // ach_v_cp_s
    let mut ach_idx: BTreeMap<(&str, &str, usize), usize> = BTreeMap::new();
    for v in &electric {
        for pole in &instance.charging_poles {
            for slot in 0..slots {
                let idx = model.add_var(
                    format!("ach_{}_{}_{slot}", sanitize(&v.id), sanitize(&pole.id)),
                    VarKind::Binary,
                );
                ach_idx.insert((v.id.as_str(), pole.id.as_str(), slot), idx);
            }
        }
    }

    // Assignment variable of a vehicle for an arbitrary task, when it exists.
    let assignment_var = |v: &str, task: &Task| -> Option<usize> {
        match &task.reference {
            TaskRef::Trip(id) => a_idx.get(&(v, id.as_str())).copied(),
            TaskRef::Charge { pole, slot } => ach_idx.get(&(v, pole.as_str(), *slot)).copied(),
        }
    };

    // m_v_x1_x2 over ordered pairs; gas vehicles only pair trips.
    let mut m_idx: BTreeMap<(&str, usize, usize), usize> = BTreeMap::new();
    let mut m_tasks: Vec<(usize, usize)> = Vec::new();
    for i in 0..tasks.len() {
        for j in (i + 1)..tasks.len() {
            m_tasks.push((i, j));
        }
    }
    for v in &instance.vehicles {
        let is_elec = view.is_electric(&v.id);
        for (i, j) in &m_tasks {
            let (x1, x2) = (&tasks[*i], &tasks[*j]);
            if !is_elec
                && (matches!(x1.reference, TaskRef::Charge { .. })
                    || matches!(x2.reference, TaskRef::Charge { .. }))
            {
                continue;
            }
            let idx = model.add_var(
                format!("m_{}_{}_{}", sanitize(&v.id), task_token(x1), task_token(x2)),
                VarKind::Binary,
            );
            m_idx.insert((v.id.as_str(), *i, *j), idx);
        }
    }

    // c_v_s and e_v_s for electric vehicles.
    let mut c_idx: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    let mut e_idx: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    for v in &electric {
        let cap = view.model_of(&v.id).map(|m| m.battery_capacity_kwh).unwrap_or(0.0);
        for slot in 0..slots {
            let idx = model.add_var(
                format!("c_{}_{slot}", sanitize(&v.id)),
                VarKind::Continuous { lb: 0.0, ub: cap },
            );
            c_idx.insert((v.id.as_str(), slot), idx);
        }
        for boundary in 0..=slots {
            let idx = model.add_var(
                format!("e_{}_{boundary}", sanitize(&v.id)),
                VarKind::Continuous { lb: 0.0, ub: cap },
            );
            e_idx.insert((v.id.as_str(), boundary), idx);
        }
    }

    // Every trip is served by exactly one bus.
    for t in &instance.trips {
        let terms: Vec<(f64, usize)> = instance
            .vehicles
            .iter()
            .map(|v| (1.0, a_idx[&(v.id.as_str(), t.id.as_str())]))
            .collect();
        model.constraints.push(Constraint {
            name: format!("assign_{}", sanitize(&t.id)),
            terms,
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }

    // Each charging slot holds at most one electric bus.
    if !electric.is_empty() {
        for pole in &instance.charging_poles {
            for slot in 0..slots {
                let terms: Vec<(f64, usize)> = electric
                    .iter()
                    .map(|v| (1.0, ach_idx[&(v.id.as_str(), pole.id.as_str(), slot)]))
                    .collect();
                model.constraints.push(Constraint {
                    name: format!("slotcap_{}_{slot}", sanitize(&pole.id)),
                    terms,
                    sense: Sense::Le,
                    rhs: 1.0,
                });
            }
        }
    }

    // Pairs violating the time predicate exclude one another per vehicle.
    for v in &instance.vehicles {
        for (i, j) in &m_tasks {
            let (x1, x2) = (&tasks[*i], &tasks[*j]);
            let (Some(a1), Some(a2)) = (assignment_var(&v.id, x1), assignment_var(&v.id, x2))
            else {
                continue;
            };
            if !view.pair_feasible(x1, x2) {
                model.constraints.push(Constraint {
                    name: format!(
                        "forbid_{}_{}_{}",
                        sanitize(&v.id),
                        task_token(x1),
                        task_token(x2)
                    ),
                    terms: vec![(1.0, a1), (1.0, a2)],
                    sense: Sense::Le,
                    rhs: 1.0,
                });
            }
        }
    }

    // Consecutive assignments force the deadhead indicator: the in-between sum
    // ranges over other tasks only, so m >= a1 + a2 - 1 exactly when nothing
    // is scheduled between the pair.
    for v in &instance.vehicles {
        for (i, j) in &m_tasks {
            let Some(&m_var) = m_idx.get(&(v.id.as_str(), *i, *j)) else { continue };
            let (x1, x2) = (&tasks[*i], &tasks[*j]);
            let (Some(a1), Some(a2)) = (assignment_var(&v.id, x1), assignment_var(&v.id, x2))
            else {
                continue;
            };
            let mut terms = vec![(1.0, m_var), (-1.0, a1), (-1.0, a2)];
            for k in (*i + 1)..*j {
                if let Some(between) = assignment_var(&v.id, &tasks[k]) {
                    terms.push((1.0, between));
                }
            }
            model.constraints.push(Constraint {
                name: format!("link_{}_{}_{}", sanitize(&v.id), task_token(x1), task_token(x2)),
                terms,
                sense: Sense::Ge,
                rhs: -1.0,
            });
        }
    }

    // Charge caps and the battery recurrence.
    for v in &electric {
        let model_id = &view.model_of(&v.id).expect("validated").id.clone();
        for slot in 0..slots {
            let mut terms = vec![(1.0, c_idx[&(v.id.as_str(), slot)])];
            for pole in &instance.charging_poles {
                let power = view.pole_power(&pole.id, model_id);
                terms.push((-power, ach_idx[&(v.id.as_str(), pole.id.as_str(), slot)]));
            }
            model.constraints.push(Constraint {
                name: format!("chargecap_{}_{slot}", sanitize(&v.id)),
                terms,
                sense: Sense::Le,
                rhs: 0.0,
            });
        }

        model.constraints.push(Constraint {
            name: format!("einit_{}", sanitize(&v.id)),
            terms: vec![(1.0, e_idx[&(v.id.as_str(), 0)])],
            sense: Sense::Eq,
            rhs: v.initial_charge_kwh,
        });

        for slot in 0..slots {
            let mut terms = vec![
                (1.0, e_idx[&(v.id.as_str(), slot + 1)]),
                (-1.0, e_idx[&(v.id.as_str(), slot)]),
                (-1.0, c_idx[&(v.id.as_str(), slot)]),
            ];
            for t in &instance.trips {
                if grid.slot_accounting(t.end_s) == slot {
                    terms.push((view.trip_energy(&t.id, model_id), a_idx[&(v.id.as_str(), t.id.as_str())]));
                }
            }
            for (i, j) in &m_tasks {
                let Some(&m_var) = m_idx.get(&(v.id.as_str(), *i, *j)) else { continue };
                let successor = &tasks[*j];
                if grid.slot_accounting(successor.start_s) != slot {
                    continue;
                }
                let energy = view
                    .deadhead_energy(&tasks[*i].destination, &successor.origin, model_id)
                    .unwrap_or(0.0);
                if energy != 0.0 {
                    terms.push((energy, m_var));
                }
            }
            model.constraints.push(Constraint {
                name: format!("ebal_{}_{slot}", sanitize(&v.id)),
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
            });
        }
    }

    // Objective: weighted trip energies plus weighted deadhead energies.
    for v in &instance.vehicles {
        let weight = view.cost_weight(&v.id);
        let model_id = view.model_of(&v.id).expect("validated").id.clone();
        for t in &instance.trips {
            let coef = weight * view.trip_energy(&t.id, &model_id);
            if coef != 0.0 {
                model.objective.push((coef, a_idx[&(v.id.as_str(), t.id.as_str())]));
            }
        }
        for (i, j) in &m_tasks {
            let Some(&m_var) = m_idx.get(&(v.id.as_str(), *i, *j)) else { continue };
            let energy = view
                .deadhead_energy(&tasks[*i].destination, &tasks[*j].origin, &model_id)
                .unwrap_or(0.0);
            let coef = weight * energy;
            if coef != 0.0 {
                model.objective.push((coef, m_var));
            }
        }
    }

    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TransitTrip, TripEnergyEntry};

    #[test]
    fn smallest_model_is_one_var_one_constraint() {
        let mut inst = crate::testutil::fixture();
        inst.vehicles.retain(|v| v.id == "icea");
        inst.charging_poles.clear();
        inst.trips.retain(|t| t.id == "t1");
        inst.trip_energy.retain(|e| e.trip == "t1");
        inst.normalize();
        inst.validate().unwrap();
        let model = build_milp(&inst).unwrap();
        let a_vars: Vec<_> = model.vars.iter().filter(|v| v.name.starts_with("a_")).collect();
        assert_eq!(a_vars.len(), 1);
        assert_eq!(model.vars.len(), 1, "no pair exists, so no m-vars");
        assert_eq!(model.constraints.len(), 1);
        assert_eq!(model.constraints[0].sense, Sense::Eq);
        assert_eq!(model.constraints[0].rhs, 1.0);
    }

    #[test]
    fn infeasible_pair_gets_exclusion_for_every_vehicle() {
        let mut inst = crate::testutil::fixture();
        inst.charging_poles.clear();
        // Make t2 start too early for the deadhead after t1.
        for t in inst.trips.iter_mut() {
            if t.id == "t2" {
                t.start_s = 9 * 3600 + 100;
                t.end_s = 10 * 3600;
                t.origin = "stopA".into();
            }
        }
        inst.normalize();
        inst.validate().unwrap();
        let model = build_milp(&inst).unwrap();
        let forbids: Vec<_> =
            model.constraints.iter().filter(|c| c.name.starts_with("forbid_")).collect();
        assert_eq!(forbids.len(), inst.vehicles.len(), "one exclusion per vehicle");
        for c in forbids {
            assert_eq!(c.terms.len(), 2);
            assert_eq!(c.sense, Sense::Le);
            assert_eq!(c.rhs, 1.0);
        }
    }

    #[test]
    fn m_var_count_is_all_ordered_pairs() {
        // 1 EV, 2 sequential trips, 1 pole, 3 slots: 5 tasks, C(5,2) = 10.
        let mut inst = crate::testutil::fixture();
        inst.vehicles.retain(|v| v.id == "eva");
        inst.slot_grid.day_end_s = 3 * 3600;
        inst.trips = vec![
            TransitTrip {
                id: "t1".into(),
                origin: "stopA".into(),
                destination: "stopB".into(),
                start_s: 0,
                end_s: 1800,
            },
            TransitTrip {
                id: "t2".into(),
                origin: "stopB".into(),
                destination: "stopA".into(),
                start_s: 4000,
                end_s: 5000,
            },
        ];
        inst.trip_energy = Vec::new();
        for t in ["t1", "t2"] {
            for m in ["bev", "diesel"] {
                inst.trip_energy.push(TripEnergyEntry {
                    trip: t.into(),
                    model: m.into(),
                    energy_kwh: 1.0,
                });
            }
        }
        inst.normalize();
        inst.validate().unwrap();
        let model = build_milp(&inst).unwrap();
        let m_vars = model.vars.iter().filter(|v| v.name.starts_with("m_")).count();
        assert_eq!(m_vars, 10);
    }

    #[test]
    fn var_cap_is_enforced() {
        let inst = crate::testutil::fixture();
        match build_milp_capped(&inst, 10) {
            Err(FleetError::ModelTooLarge { vars, cap }) => {
                assert!(vars > 10);
                assert_eq!(cap, 10);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn build_is_deterministic() {
        let inst = crate::testutil::fixture();
        let a = build_milp(&inst).unwrap();
        let b = build_milp(&inst).unwrap();
        assert_eq!(a, b);
    }
}
