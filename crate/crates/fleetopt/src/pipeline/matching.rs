//! Heuristic map matching of noisy positions onto road segments, plus the
//! synthetic-noise evaluation harness.
//!
//! Candidates come from an R-tree over segment bounding boxes intersected
//! with a disk around each location, filtered to bus-legal road classes. The
//! winner is the candidate with the most neighboring locations nearby,
//! breaking ties by distance and then segment id.

use crate::error::{FleetError, Result};
use crate::geo::{point_at_along, project_to_polyline};
use crate::par;
use crate::pipeline::network::{NetworkGeometry, RoadNetwork};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rstar::{RTree, RTreeObject, AABB};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct MatchConfig {
    /// Candidate disk radius around each location, meters.
    pub radius_m: f64,
    /// Neighbor count window on each side for the scoring heuristic.
    pub window: usize,
    /// Road classes buses may legally use.
    pub bus_classes: BTreeSet<String>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        let bus_classes = [
            "motorway",
            "trunk",
            "primary",
            "secondary",
            "tertiary",
            "residential",
            "unclassified",
            "service",
            "busway",
        ]
        .into_iter()
        .map(str::to_string)
        .collect();
        Self { radius_m: 100.0, window: 10, bus_classes }
    }
}

struct IndexedSegment {
    way_idx: usize,
    envelope: AABB<[f64; 2]>,
}

impl RTreeObject for IndexedSegment {
    type Envelope = AABB<[f64; 2]>;

    fn envelope(&self) -> Self::Envelope {
        self.envelope
    }
}

/// Spatial index over the bus-legal subset of a network's segments.
pub struct SegmentIndex<'a> {
    geometry: &'a NetworkGeometry,
    tree: RTree<IndexedSegment>,
}

impl<'a> SegmentIndex<'a> {
    pub fn new(geometry: &'a NetworkGeometry, cfg: &MatchConfig) -> Self {
        let objects: Vec<IndexedSegment> = geometry
            .ways
            .iter()
            .enumerate()
            .filter(|(_, way)| cfg.bus_classes.contains(&way.class))
            .map(|(way_idx, way)| {
                let xs: Vec<f64> = way.polyline.iter().map(|p| p.0).collect();
                let ys: Vec<f64> = way.polyline.iter().map(|p| p.1).collect();
                let min = [
                    xs.iter().cloned().fold(f64::INFINITY, f64::min),
                    ys.iter().cloned().fold(f64::INFINITY, f64::min),
                ];
                let max = [
                    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                ];
                IndexedSegment { way_idx, envelope: AABB::from_corners(min, max) }
            })
            .collect();
        Self { geometry, tree: RTree::bulk_load(objects) }
    }

    /// Segments whose polyline passes within `radius_m` of the point.
    pub fn candidates(&self, p: (f64, f64), radius_m: f64) -> Vec<(usize, f64)> {
        let disk = AABB::from_corners([p.0 - radius_m, p.1 - radius_m], [p.0 + radius_m, p.1 + radius_m]);
        let mut out: Vec<(usize, f64)> = self
            .tree
            .locate_in_envelope_intersecting(&disk)
            .filter_map(|seg| {
                let way = &self.geometry.ways[seg.way_idx];
                let (dist, _) = project_to_polyline(&way.polyline, p);
                (dist <= radius_m).then_some((seg.way_idx, dist))
            })
            .collect();
        out.sort_by_key(|a| a.0);
        out
    }
}

/// Matches each projected location to a way id, or None when no bus-legal
/// segment lies within the radius.
pub fn map_match(
    network: &RoadNetwork,
    locations: &[(f64, f64)],
    cfg: &MatchConfig,
) -> Result<Vec<Option<String>>> {
    let geometry = NetworkGeometry::new(network)?;
    let xy: Vec<(f64, f64)> = locations
        .iter()
        .map(|(lat, lon)| geometry.projection.to_xy(*lat, *lon))
        .collect();
    Ok(match_projected(&geometry, &xy, cfg, false))
}

/// Sequential variant used by the comparison benches.
pub fn map_match_seq(
    network: &RoadNetwork,
    locations: &[(f64, f64)],
    cfg: &MatchConfig,
) -> Result<Vec<Option<String>>> {
    let geometry = NetworkGeometry::new(network)?;
    let xy: Vec<(f64, f64)> = locations
        .iter()
        .map(|(lat, lon)| geometry.projection.to_xy(*lat, *lon))
        .collect();
    Ok(match_projected(&geometry, &xy, cfg, true))
}

pub(crate) fn match_projected(
    geometry: &NetworkGeometry,
    xy: &[(f64, f64)],
    cfg: &MatchConfig,
    force_sequential: bool,
) -> Vec<Option<String>> {
    let index = SegmentIndex::new(geometry, cfg);
    let match_one = |i: usize| -> Option<String> {
        let candidates = index.candidates(xy[i], cfg.radius_m);
        if candidates.is_empty() {
            return None;
        }
        let lo = i.saturating_sub(cfg.window);
        let hi = (i + cfg.window).min(xy.len() - 1);
        let mut best: Option<(usize, f64, usize)> = None; // (score, dist, way_idx)
        for (way_idx, dist) in candidates {
            let way = &geometry.ways[way_idx];
            let score = (lo..=hi)
                .filter(|j| *j != i)
                .filter(|j| project_to_polyline(&way.polyline, xy[*j]).0 <= cfg.radius_m)
                .count();
            let better = match &best {
                None => true,
                Some((s, d, w)) => {
                    score > *s
                        || (score == *s
                            && (dist < *d
                                || (dist == *d && geometry.ways[way_idx].id < geometry.ways[*w].id)))
                }
            };
            if better {
                best = Some((score, dist, way_idx));
            }
        }
        best.map(|(_, _, way_idx)| geometry.ways[way_idx].id.clone())
    };
    if force_sequential {
        par::map_indexed_seq(xy.len(), match_one)
    } else {
        par::map_indexed(xy.len(), match_one)
    }
}

/// A ground-truth route: sampled points and the way generating each.
pub(crate) struct TruthRoute {
    pub points: Vec<(f64, f64)>,
    pub truth: Vec<String>,
}

/// Random walk over connected ways, sampled at equal spacing.
pub(crate) fn random_route(
    geometry: &NetworkGeometry,
    points: usize,
    spacing_m: f64,
    rng: &mut ChaCha8Rng,
) -> TruthRoute {
    // Node -> ways adjacency over way endpoints.
    let mut adjacency: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, way) in geometry.ways.iter().enumerate() {
        for node in [way.node_ids.first().unwrap(), way.node_ids.last().unwrap()] {
            adjacency.entry(node).or_default().push(idx);
        }
    }

    let target_len = points as f64 * spacing_m;
    let mut pieces: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    let mut total = 0.0;

    let mut current = rng.random_range(0..geometry.ways.len());
    let mut forward = rng.random_range(0..2) == 0;
    while total < target_len && pieces.len() < 10_000 {
        let way = &geometry.ways[current];
        let mut polyline = way.polyline.clone();
        if !forward {
            polyline.reverse();
        }
        total += way.length_m;
        pieces.push((current, polyline));
        let exit_node =
            if forward { way.node_ids.last().unwrap() } else { way.node_ids.first().unwrap() };
        let next_options: Vec<usize> = adjacency
            .get(exit_node.as_str())
            .map(|ways| ways.iter().copied().filter(|w| *w != current).collect())
            .unwrap_or_default();
        if next_options.is_empty() {
            break;
        }
        let next = next_options[rng.random_range(0..next_options.len())];
        let next_way = &geometry.ways[next];
        forward = next_way.node_ids.first().unwrap() == exit_node;
        current = next;
    }

    // Sample mid-gap positions so points avoid way endpoints.
    let mut points_out = Vec::with_capacity(points);
    let mut truth = Vec::with_capacity(points);
    let count = points.max(1);
    let gap = total / count as f64;
    let mut piece_starts = Vec::with_capacity(pieces.len());
    let mut cum = 0.0;
    for (way_idx, polyline) in &pieces {
        piece_starts.push(cum);
        cum += crate::geo::polyline_length(polyline);
        let _ = way_idx;
    }
    for k in 0..count {
        let d = (k as f64 + 0.5) * gap;
        let piece = match piece_starts.binary_search_by(|s| s.partial_cmp(&d).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let (way_idx, polyline) = &pieces[piece];
        let local = d - piece_starts[piece];
        points_out.push(point_at_along(polyline, local));
        truth.push(geometry.ways[*way_idx].id.clone());
    }
    TruthRoute { points: points_out, truth }
}

/// Accuracy of the matcher against ground truth under isotropic Gaussian
/// noise, one row per sigma. Deterministic for a fixed seed.
pub fn evaluate_matching(
    network: &RoadNetwork,
    routes: usize,
    points_per_route: usize,
    sigmas_m: &[f64],
    seed: u64,
    cfg: &MatchConfig,
) -> Result<Vec<(f64, f64)>> {
    let geometry = NetworkGeometry::new(network)?;
    let connected = geometry.ways.len() >= 2 && {
        let mut endpoint_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for way in &geometry.ways {
            for node in [way.node_ids.first().unwrap(), way.node_ids.last().unwrap()] {
                *endpoint_counts.entry(node.as_str()).or_default() += 1;
            }
        }
        endpoint_counts.values().any(|c| *c >= 2)
    };
    if !connected {
        return Err(FleetError::DegenerateNetwork);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing_m = 20.0;
    let truth_routes: Vec<TruthRoute> = (0..routes)
        .map(|_| random_route(&geometry, points_per_route, spacing_m, &mut rng))
        .collect();

    let mut out = Vec::with_capacity(sigmas_m.len());
    for sigma in sigmas_m {
        // Noise is drawn sequentially so results do not depend on the
        // parallel matching order.
        let noisy: Vec<Vec<(f64, f64)>> = truth_routes
            .iter()
            .map(|route| {
                route
                    .points
                    .iter()
                    .map(|(x, y)| {
                        if *sigma == 0.0 {
                            (*x, *y)
                        } else {
                            let normal = Normal::new(0.0, *sigma).expect("positive sigma");
                            (x + normal.sample(&mut rng), y + normal.sample(&mut rng))
                        }
                    })
                    .collect()
            })
            .collect();
        let mut correct = 0usize;
        let mut total = 0usize;
        for (route, noisy_points) in truth_routes.iter().zip(&noisy) {
            let matched = match_projected(&geometry, noisy_points, cfg, false);
            for (m, t) in matched.iter().zip(&route.truth) {
                total += 1;
                if m.as_deref() == Some(t.as_str()) {
                    correct += 1;
                }
            }
        }
        out.push((*sigma, correct as f64 / total.max(1) as f64));
    }
    Ok(out)
}
