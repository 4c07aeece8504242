//! Simplified street graph: nodes, ways, and the derived per-way polyline
//! geometry in a local planar frame.

use crate::error::{FleetError, Result};
use crate::geo::{polyline_length, LocalProjection};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkWay {
    pub id: String,
    pub nodes: Vec<String>,
    pub highway: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub nodes: Vec<NetworkNode>,
    pub ways: Vec<NetworkWay>,
}

impl RoadNetwork {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| FleetError::io(path.display().to_string(), e))?;
        let network: RoadNetwork = serde_json::from_str(&text)
            .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
        network.validate()?;
        Ok(network)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("network serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| FleetError::io(path.display().to_string(), e))
    }

    pub fn validate(&self) -> Result<()> {
        let ids: BTreeMap<&str, ()> = self.nodes.iter().map(|n| (n.id.as_str(), ())).collect();
        if ids.len() != self.nodes.len() {
            return Err(FleetError::Validation("duplicate node id in network".into()));
        }
        for way in &self.ways {
            if way.nodes.len() < 2 {
                return Err(FleetError::Validation(format!(
                    "way '{}' needs at least 2 nodes",
                    way.id
                )));
            }
            for node in &way.nodes {
                if !ids.contains_key(node.as_str()) {
                    return Err(FleetError::Validation(format!(
                        "way '{}' references unknown node '{node}'",
                        way.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Synthetic orthogonal street grid with roughly `ways` ways: half run
    /// east-west, half north-south, sharing nodes at every crossing. At least
    /// a 2x2 grid is produced so every way has two nodes.
    pub fn grid(ways: usize, spacing_m: f64) -> Self {
        let rows = (ways / 2).max(2);
        let cols = ways.saturating_sub(rows).max(2);
        let projection = LocalProjection::new(35.0, -85.3);
        let mut nodes = Vec::new();
        for i in 0..cols {
            for j in 0..rows {
                let (lat, lon) = projection.to_lat_lon(i as f64 * spacing_m, j as f64 * spacing_m);
                nodes.push(NetworkNode {
                    id: format!("n{i:02}_{j:02}"),
                    lat,
                    lon,
                    elevation_m: None,
                });
            }
        }
        let mut ways_out = Vec::new();
        for j in 0..rows {
            ways_out.push(NetworkWay {
                id: format!("h{j:02}"),
                nodes: (0..cols).map(|i| format!("n{i:02}_{j:02}")).collect(),
                highway: "residential".into(),
            });
        }
        for i in 0..cols {
            ways_out.push(NetworkWay {
                id: format!("v{i:02}"),
                nodes: (0..rows).map(|j| format!("n{i:02}_{j:02}")).collect(),
                highway: "residential".into(),
            });
        }
        RoadNetwork { nodes, ways: ways_out }
    }
}

/// One way's polyline in local planar meters.
#[derive(Debug, Clone)]
pub struct WayGeometry {
    pub id: String,
    pub class: String,
    pub polyline: Vec<(f64, f64)>,
    pub length_m: f64,
    /// Node elevations when every node on the way has one.
    pub elevations: Option<Vec<f64>>,
    /// Cumulative arc length at each polyline vertex.
    pub cumulative: Vec<f64>,
    pub node_ids: Vec<String>,
}

impl WayGeometry {
    /// Linear elevation interpolation at an arc-length position.
    pub fn elevation_at(&self, along: f64) -> Option<f64> {
        let elevations = self.elevations.as_ref()?;
        let along = along.clamp(0.0, self.length_m);
        for w in 0..self.cumulative.len() - 1 {
            let (c0, c1) = (self.cumulative[w], self.cumulative[w + 1]);
            if along <= c1 {
                if c1 == c0 {
                    return Some(elevations[w]);
                }
                let t = (along - c0) / (c1 - c0);
                return Some(elevations[w] + t * (elevations[w + 1] - elevations[w]));
            }
        }
        elevations.last().copied()
    }
}

/// Projected geometry for a whole network, keyed by way id.
pub struct NetworkGeometry {
    pub projection: LocalProjection,
    pub ways: Vec<WayGeometry>,
    index_by_id: BTreeMap<String, usize>,
}

impl NetworkGeometry {
    pub fn new(network: &RoadNetwork) -> Result<Self> {
        network.validate()?;
        if network.nodes.is_empty() {
            return Err(FleetError::Validation("network has no nodes".into()));
        }
        let lat0 = network.nodes.iter().map(|n| n.lat).sum::<f64>() / network.nodes.len() as f64;
        let lon0 = network.nodes.iter().map(|n| n.lon).sum::<f64>() / network.nodes.len() as f64;
        let projection = LocalProjection::new(lat0, lon0);
        let by_id: BTreeMap<&str, &NetworkNode> =
            network.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

        let mut ways = Vec::with_capacity(network.ways.len());
        let mut index_by_id = BTreeMap::new();
        for way in &network.ways {
            let polyline: Vec<(f64, f64)> = way
                .nodes
                .iter()
                .map(|id| {
                    let node = by_id[id.as_str()];
                    projection.to_xy(node.lat, node.lon)
                })
                .collect();
            let elevations: Option<Vec<f64>> =
                way.nodes.iter().map(|id| by_id[id.as_str()].elevation_m).collect();
            let mut cumulative = vec![0.0];
            for w in polyline.windows(2) {
                let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
                cumulative.push(cumulative.last().unwrap() + d);
            }
            index_by_id.insert(way.id.clone(), ways.len());
            ways.push(WayGeometry {
                id: way.id.clone(),
                class: way.highway.clone(),
                length_m: polyline_length(&polyline),
                polyline,
                elevations,
                cumulative,
                node_ids: way.nodes.clone(),
            });
        }
        Ok(Self { projection, ways, index_by_id })
    }

    pub fn way(&self, id: &str) -> Option<&WayGeometry> {
        self.index_by_id.get(id).map(|idx| &self.ways[*idx])
    }
}
