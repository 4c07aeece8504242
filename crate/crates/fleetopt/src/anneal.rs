//! Simulated annealing refinement of the greedy solution.
//!
//! Neighbors swap the late-day trips of two random vehicles around a random
//! split time; their charging assignments are discarded and rebuilt by the
//! greedy charging repair. Acceptance uses an exponential schedule on a
//! geometric temperature ladder, with the cost delta normalized by the
//! running average of accepted deltas.

use crate::error::{FleetError, Result};
use crate::feasibility::{solution_cost_view, validate_solution_view, View};
use crate::greedy::{greedy_assign_view, repair_charging, GreedyConfig};
use crate::model::{Instance, Solution};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashSet};

#[derive(Debug, Clone, Copy)]
pub struct AnnealConfig {
    /// Total iterations; the temperature ladder closes exactly at the last.
    pub k_max: u32,
    /// Initial acceptance probability for an average worsening move.
    pub p_start: f64,
    /// Final acceptance probability.
    pub p_end: f64,
    /// Fraction of assignments swapped per neighbor draw.
    pub p_swap: f64,
    pub seed: u64,
    /// Consecutive invalid neighbor candidates tolerated per iteration.
    pub neighbor_retry_limit: u32,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            k_max: 10_000,
            p_start: 0.7,
            p_end: 0.001,
            p_swap: 0.02,
            seed: 0,
            neighbor_retry_limit: 50,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 2 {
            return Err(FleetError::Validation("k_max must be at least 2".into()));
        }
        for (name, p) in [("p_start", self.p_start), ("p_end", self.p_end)] {
            if !(0.0 < p && p < 1.0) {
                return Err(FleetError::Validation(format!("{name} must lie in (0, 1), got {p}")));
            }
        }
        if self.p_end >= self.p_start {
            return Err(FleetError::Validation(format!(
                "p_end {} must be below p_start {}",
                self.p_end, self.p_start
            )));
        }
        if !(0.0 < self.p_swap && self.p_swap <= 1.0) {
            return Err(FleetError::Validation(format!(
                "p_swap must lie in (0, 1], got {}",
                self.p_swap
            )));
        }
        if self.neighbor_retry_limit == 0 {
            return Err(FleetError::Validation("neighbor_retry_limit must be positive".into()));
        }
        Ok(())
    }
}

/// Geometric temperature ladder derived from the endpoint probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub tau_start: f64,
    pub tau_end: f64,
    pub tau_rate: f64,
}

impl Schedule {
    pub fn new(p_start: f64, p_end: f64, k_max: u32) -> Self {
        let tau_start = -1.0 / p_start.ln();
        let tau_end = -1.0 / p_end.ln();
        let tau_rate = (tau_end / tau_start).powf(1.0 / (k_max as f64 - 1.0));
        Self { tau_start, tau_end, tau_rate }
    }
}

/// Probability of accepting a move that worsens cost by `delta_e`, with the
/// running accepted-delta average `delta_avg` at temperature `tau_k`.
pub fn accept_probability(delta_e: f64, delta_avg: f64, tau_k: f64) -> f64 {
    debug_assert!(tau_k > 0.0);
    (-delta_e / (delta_avg * tau_k)).exp()
}

/// One per-iteration record for `--trace` output.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iteration: u32,
    pub tau: f64,
    pub delta_e: f64,
    pub accepted: bool,
    pub best_cost: f64,
}

/// One swap round: trips of `v1` and `v2` starting at or after `split_s`
/// exchange owners. Charging assignments are untouched here; the caller
/// rebuilds them.
fn swap_round(solution: &mut Solution, v1: &str, v2: &str, split_s: i64, view: &View) {
    let moved: Vec<(String, String)> = solution
        .trip_assignments
        .iter()
        .filter(|(v, t)| {
            (v == v1 || v == v2)
                && view.trip_task(t).map(|task| task.start_s >= split_s).unwrap_or(false)
        })
        .cloned()
        .collect();
    for (v, t) in moved {
        solution.trip_assignments.remove(&(v.clone(), t.clone()));
        let owner = if v == v1 { v2 } else { v1 };
        solution.trip_assignments.insert((owner.to_string(), t));
    }
}

/// Draws a validated neighbor of `current`, or fails after
/// `neighbor_retry_limit` invalid candidates.
pub fn random_neighbor(
    instance: &Instance,
    current: &Solution,
    p_swap: f64,
    neighbor_retry_limit: u32,
    greedy_cfg: &GreedyConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Solution> {
    let view = View::new(instance);
    random_neighbor_view(&view, current, p_swap, neighbor_retry_limit, greedy_cfg, rng)
}

pub(crate) fn random_neighbor_view(
    view: &View,
    current: &Solution,
    p_swap: f64,
    neighbor_retry_limit: u32,
    greedy_cfg: &GreedyConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Solution> {
    let vehicles: Vec<&str> = view.instance.vehicles.iter().map(|v| v.id.as_str()).collect();
    if vehicles.len() < 2 {
        return Err(FleetError::NeighborExhausted { retries: 0 });
    }
    let grid = &view.instance.slot_grid;
    let swaps = ((current.assignment_count() as f64 * p_swap) as usize).max(1);

    for retry in 0..neighbor_retry_limit {
        let mut candidate = current.clone();
        let mut touched: BTreeSet<&str> = BTreeSet::new();
        for _ in 0..swaps {
            let i1 = rng.random_range(0..vehicles.len());
            let mut i2 = rng.random_range(0..vehicles.len() - 1);
            if i2 >= i1 {
                i2 += 1;
            }
            let split_s = rng.random_range(grid.day_start_s..=grid.day_end_s);
            swap_round(&mut candidate, vehicles[i1], vehicles[i2], split_s, view);
            touched.insert(vehicles[i1]);
            touched.insert(vehicles[i2]);
        }

        // Swapping trips invalidates the touched vehicles' charging plans:
        // drop them and rebuild with the greedy repair.
        let mut repair_ok = true;
        for v in &touched {
            if view.is_electric(v) {
                candidate.charging_assignments.retain(|(owner, _, _)| owner != v);
            }
        }
        for v in &touched {
            if view.is_electric(v) && repair_charging(view, &mut candidate, v, greedy_cfg).is_err()
            {
                repair_ok = false;
                break;
            }
        }
        if repair_ok && validate_solution_view(view, &candidate).is_empty() {
            return Ok(candidate);
        }
        let _ = retry;
    }
    Err(FleetError::NeighborExhausted { retries: neighbor_retry_limit })
}

pub fn anneal(instance: &Instance, config: &AnnealConfig, greedy_cfg: &GreedyConfig) -> Result<Solution> {
    run(instance, config, greedy_cfg, None)
}

pub fn anneal_traced(
    instance: &Instance,
    config: &AnnealConfig,
    greedy_cfg: &GreedyConfig,
) -> Result<(Solution, Vec<TraceRow>)> {
    let mut trace = Vec::with_capacity(config.k_max as usize);
    let solution = run(instance, config, greedy_cfg, Some(&mut trace))?;
    Ok((solution, trace))
}

fn run(
    instance: &Instance,
    config: &AnnealConfig,
    greedy_cfg: &GreedyConfig,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<Solution> {
    config.validate()?;
    let view = View::new(instance);
    let schedule = Schedule::new(config.p_start, config.p_end, config.k_max);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut current = greedy_assign_view(&view, greedy_cfg)?;
    let mut current_cost = solution_cost_view(&view, &current);
    let mut best = current.clone();
    let mut best_cost = current_cost;

    let mut accepted_set: HashSet<Solution> = HashSet::new();
    accepted_set.insert(current.clone());
    let mut delta_avg = 0.0_f64;
    let mut tau_k = schedule.tau_start;

    for k in 1..=config.k_max {
        let step = random_neighbor_view(
            &view,
            &current,
            config.p_swap,
            config.neighbor_retry_limit,
            greedy_cfg,
            &mut rng,
        );
        let (delta_e, accepted) = match step {
            Err(_) => (0.0, false), // exhausted neighborhoods count as rejected
            Ok(candidate) => {
                let candidate_cost = solution_cost_view(&view, &candidate);
                let delta_e = candidate_cost - current_cost;
                if k == 1 {
                    delta_avg = delta_e;
                }
                // A zero average would make the acceptance ratio undefined.
                let avg = if delta_avg == 0.0 { 1e-9 } else { delta_avg };
                let accept = candidate_cost < current_cost
                    || accept_probability(delta_e, avg, tau_k) > rng.random::<f64>();
                if accept {
                    debug_assert!(
                        validate_solution_view(&view, &candidate).is_empty(),
                        "accepted neighbors must be feasible"
                    );
                    current = candidate;
                    current_cost = candidate_cost;
                    delta_avg += (delta_e - delta_avg) / accepted_set.len() as f64;
                    accepted_set.insert(current.clone());
                    if current_cost < best_cost {
                        best = current.clone();
                        best_cost = current_cost;
                    }
                }
                (delta_e, accept)
            }
        };
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow { iteration: k, tau: tau_k, delta_e, accepted, best_cost });
        }
        tau_k *= schedule.tau_rate;
    }

    log::debug!(
        "sa: {} accepted over {} iterations, best cost {best_cost:.6}",
        accepted_set.len(),
        config.k_max
    );
    Ok(best)
}
