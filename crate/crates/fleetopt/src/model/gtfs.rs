//! GTFS-lite ingestion: builds an optimization instance from the static
//! `trips.txt` / `stop_times.txt` / `stops.txt` subset plus a fleet profile.
//!
//! Only trip endpoints matter to the assignment problem, so intermediate
//! stops contribute distance but no locations.

use super::{
    ChargingPole, CostParams, DeadheadEntry, Instance, Location, SlotGrid, TransitTrip,
    TripEnergyEntry, Vehicle, VehicleModelSpec, VehicleKind,
};
use crate::error::{FleetError, Result};
use crate::geo::haversine_m;
use crate::pipeline::regression::{predict_trip_energy, LinearModel, SegmentFeatures};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

const DEADHEAD_SPEED_KMH: f64 = 25.0;

/// Where deadhead durations come from.
#[derive(Debug, Clone)]
pub enum DeadheadSource {
    /// Haversine distance at 25 km/h.
    Haversine,
    /// JSON file with `[{from, to, duration_s}]` entries (stop ids).
    MatrixFile(PathBuf),
}

/// How per-trip and deadhead energies are estimated.
#[derive(Debug, Clone)]
pub enum EnergySource {
    /// kWh per km for each vehicle model.
    Constants(BTreeMap<String, f64>),
    /// Calibrated linear model per vehicle model, applied to each
    /// stop-to-stop hop of a trip.
    Calibration(BTreeMap<String, LinearModel>),
}

/// Fleet description accompanying a GTFS feed; the feed itself carries no
/// vehicle data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetProfile {
    pub models: Vec<VehicleModelSpec>,
    pub vehicles: Vec<Vehicle>,
    /// Pole locations must name stop ids from the feed.
    #[serde(default)]
    pub charging_poles: Vec<ChargingPole>,
    pub costs: CostParams,
    #[serde(default = "default_slot_length")]
    pub slot_length_s: i64,
}

fn default_slot_length() -> i64 {
    3600
}

impl FleetProfile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| FleetError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| FleetError::parse(path.display().to_string(), e))
    }

    /// Two electric and five diesel buses, no charging poles.
    pub fn default_mixed() -> Self {
        let mut vehicles = Vec::new();
        for k in 0..2 {
            vehicles.push(Vehicle {
                id: format!("ev{k:02}"),
                model: "bev".into(),
                initial_charge_kwh: 330.0,
            });
        }
        for k in 0..5 {
            vehicles.push(Vehicle {
                id: format!("ice{k:02}"),
                model: "diesel".into(),
                initial_charge_kwh: 0.0,
            });
        }
        Self {
            models: vec![
                VehicleModelSpec {
                    id: "bev".into(),
                    kind: VehicleKind::Electric,
                    battery_capacity_kwh: 350.0,
                },
                VehicleModelSpec {
                    id: "diesel".into(),
                    kind: VehicleKind::LiquidFuel,
                    battery_capacity_kwh: 0.0,
                },
            ],
            vehicles,
            charging_poles: vec![],
            costs: CostParams { k_gas: 1.0, k_elec: 0.25 },
            slot_length_s: 3600,
        }
    }
}

#[derive(Debug, Deserialize)]
struct MatrixRow {
    from: String,
    to: String,
    duration_s: i64,
}

struct Stop {
    lat: f64,
    lon: f64,
}

#[derive(Clone)]
struct StopTimeRow {
    trip_id: String,
    stop_id: String,
    stop_sequence: u32,
    arrival_s: Option<i64>,
    departure_s: Option<i64>,
}

/// Parses `HH:MM:SS` allowing hours of 24 and beyond.
pub fn parse_gtfs_time(text: &str) -> Result<i64> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    if parts.len() != 3 {
        return Err(FleetError::parse("gtfs time", format!("bad time '{text}'")));
    }
    let h: i64 = parts[0].parse().map_err(|_| FleetError::parse("gtfs time", text))?;
    let m: i64 = parts[1].parse().map_err(|_| FleetError::parse("gtfs time", text))?;
    let s: i64 = parts[2].parse().map_err(|_| FleetError::parse("gtfs time", text))?;
    if h < 0 || !(0..60).contains(&m) || !(0..60).contains(&s) {
        return Err(FleetError::parse("gtfs time", format!("bad time '{text}'")));
    }
    Ok(h * 3600 + m * 60 + s)
}

fn read_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path)
        .map_err(|e| FleetError::io(path.display().to_string(), e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        FleetError::parse(path.display().to_string(), format!("missing column '{name}'"))
    })
}

pub fn ingest_gtfs(
    dir: impl AsRef<Path>,
    deadhead: &DeadheadSource,
    energy: &EnergySource,
    fleet: &FleetProfile,
) -> Result<Instance> {
    let dir = dir.as_ref();
    for required in ["trips.txt", "stop_times.txt", "stops.txt"] {
        if !dir.join(required).exists() {
            return Err(FleetError::Validation(format!(
                "GTFS directory {} is missing {required}",
                dir.display()
            )));
        }
    }

    // stops.txt
    let stops_path = dir.join("stops.txt");
    let mut reader = read_csv(&stops_path)?;
    let headers = reader.headers().map_err(|e| FleetError::parse("stops.txt", e))?.clone();
    let (c_id, c_lat, c_lon) = (
        column(&headers, "stop_id", &stops_path)?,
        column(&headers, "stop_lat", &stops_path)?,
        column(&headers, "stop_lon", &stops_path)?,
    );
    let mut stops: BTreeMap<String, Stop> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| FleetError::parse("stops.txt", e))?;
        let id = record.get(c_id).unwrap_or_default().to_string();
        let lat: f64 = record
            .get(c_lat)
            .unwrap_or_default()
            .parse()
            .map_err(|e| FleetError::parse("stops.txt", format!("stop '{id}': {e}")))?;
        let lon: f64 = record
            .get(c_lon)
            .unwrap_or_default()
            .parse()
            .map_err(|e| FleetError::parse("stops.txt", format!("stop '{id}': {e}")))?;
        stops.insert(id, Stop { lat, lon });
    }

    // trips.txt
    let trips_path = dir.join("trips.txt");
    let mut reader = read_csv(&trips_path)?;
    let headers = reader.headers().map_err(|e| FleetError::parse("trips.txt", e))?.clone();
    let c_trip = column(&headers, "trip_id", &trips_path)?;
    let mut trip_ids: BTreeSet<String> = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| FleetError::parse("trips.txt", e))?;
        trip_ids.insert(record.get(c_trip).unwrap_or_default().to_string());
    }

    // stop_times.txt
    let st_path = dir.join("stop_times.txt");
    let mut reader = read_csv(&st_path)?;
    let headers = reader.headers().map_err(|e| FleetError::parse("stop_times.txt", e))?.clone();
    let c_t = column(&headers, "trip_id", &st_path)?;
    let c_s = column(&headers, "stop_id", &st_path)?;
    let c_seq = column(&headers, "stop_sequence", &st_path)?;
    let c_arr = column(&headers, "arrival_time", &st_path)?;
    let c_dep = column(&headers, "departure_time", &st_path)?;
    let mut by_trip: BTreeMap<String, Vec<StopTimeRow>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| FleetError::parse("stop_times.txt", e))?;
        let trip_id = record.get(c_t).unwrap_or_default().to_string();
        let stop_id = record.get(c_s).unwrap_or_default().to_string();
        if !trip_ids.contains(&trip_id) {
            return Err(FleetError::Validation(format!(
                "stop_times references unknown trip '{trip_id}'"
            )));
        }
        if !stops.contains_key(&stop_id) {
            return Err(FleetError::Validation(format!(
                "stop_times references unknown stop '{stop_id}'"
            )));
        }
        let stop_sequence: u32 = record
            .get(c_seq)
            .unwrap_or_default()
            .parse()
            .map_err(|e| FleetError::parse("stop_times.txt", format!("{e}")))?;
        let parse_opt = |idx: usize| -> Result<Option<i64>> {
            let raw = record.get(idx).unwrap_or_default();
            if raw.is_empty() { Ok(None) } else { parse_gtfs_time(raw).map(Some) }
        };
        by_trip.entry(trip_id.clone()).or_default().push(StopTimeRow {
            trip_id,
            stop_id,
            stop_sequence,
            arrival_s: parse_opt(c_arr)?,
            departure_s: parse_opt(c_dep)?,
        });
    }

    let mut trips = Vec::new();
    let mut trip_hops: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut endpoint_stops: BTreeSet<String> = BTreeSet::new();
    for (trip_id, mut rows) in by_trip {
        rows.sort_by_key(|r| r.stop_sequence);
        if rows.len() < 2 {
            return Err(FleetError::Validation(format!(
                "trip '{}' has a single stop time and no destination",
                rows.first().map(|r| r.trip_id.as_str()).unwrap_or(trip_id.as_str())
            )));
        }
        let first = &rows[0];
        let last = &rows[rows.len() - 1];
        let start_s = first.departure_s.or(first.arrival_s).ok_or_else(|| {
            FleetError::Validation(format!("trip '{trip_id}' has no departure time at its origin"))
        })?;
        let end_s = last.arrival_s.or(last.departure_s).ok_or_else(|| {
            FleetError::Validation(format!("trip '{trip_id}' has no arrival time at its destination"))
        })?;
        let hops: Vec<f64> = rows
            .windows(2)
            .map(|w| {
                let a = &stops[&w[0].stop_id];
                let b = &stops[&w[1].stop_id];
                haversine_m(a.lat, a.lon, b.lat, b.lon)
            })
            .collect();
        endpoint_stops.insert(first.stop_id.clone());
        endpoint_stops.insert(last.stop_id.clone());
        trips.push(TransitTrip {
            id: trip_id.clone(),
            origin: first.stop_id.clone(),
            destination: last.stop_id.clone(),
            start_s,
            end_s,
        });
        trip_hops.insert(trip_id, hops);
    }

    for pole in &fleet.charging_poles {
        if !stops.contains_key(&pole.location) {
            return Err(FleetError::Validation(format!(
                "charging pole '{}' references unknown stop '{}'",
                pole.id, pole.location
            )));
        }
        endpoint_stops.insert(pole.location.clone());
    }

    let locations: Vec<Location> = endpoint_stops
        .iter()
        .map(|id| Location { id: id.clone(), lat: stops[id].lat, lon: stops[id].lon })
        .collect();

    // Slot grid covering every trip, including times past midnight.
    let max_end = trips.iter().map(|t| t.end_s).max().unwrap_or(86400);
    let slot_len = fleet.slot_length_s.max(1);
    let day_end = ((max_end.max(86400) + slot_len - 1) / slot_len) * slot_len;

    let durations: Option<BTreeMap<(String, String), i64>> = match deadhead {
        DeadheadSource::Haversine => None,
        DeadheadSource::MatrixFile(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| FleetError::io(path.display().to_string(), e))?;
            let rows: Vec<MatrixRow> = serde_json::from_str(&text)
                .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
            Some(rows.into_iter().map(|r| ((r.from, r.to), r.duration_s)).collect())
        }
    };

    let per_model_energy = |distance_m: f64| -> Result<BTreeMap<String, f64>> {
        let mut out = BTreeMap::new();
        for model in &fleet.models {
            let kwh = estimate_energy(energy, &model.id, &[distance_m])?;
            out.insert(model.id.clone(), kwh);
        }
        Ok(out)
    };

    let mut deadhead_entries = Vec::new();
    for from in &locations {
        for to in &locations {
            let dist_m = haversine_m(from.lat, from.lon, to.lat, to.lon);
            let duration_s = match &durations {
                None => (dist_m / 1000.0 / DEADHEAD_SPEED_KMH * 3600.0).round() as i64,
                Some(map) => match map.get(&(from.id.clone(), to.id.clone())) {
                    Some(d) => *d,
                    None if from.id == to.id => 0,
                    None => continue, // partial matrix: pair stays unknown
                },
            };
            deadhead_entries.push(DeadheadEntry {
                from: from.id.clone(),
                to: to.id.clone(),
                duration_s: if from.id == to.id { 0 } else { duration_s },
                energy_kwh: if from.id == to.id {
                    fleet.models.iter().map(|m| (m.id.clone(), 0.0)).collect()
                } else {
                    per_model_energy(dist_m)?
                },
            });
        }
    }

    let mut trip_energy = Vec::new();
    for trip in &trips {
        let hops = &trip_hops[&trip.id];
        for model in &fleet.models {
            trip_energy.push(TripEnergyEntry {
                trip: trip.id.clone(),
                model: model.id.clone(),
                energy_kwh: estimate_energy(energy, &model.id, hops)?,
            });
        }
    }

    let mut instance = Instance {
        models: fleet.models.clone(),
        vehicles: fleet.vehicles.clone(),
        locations,
        trips,
        charging_poles: fleet.charging_poles.clone(),
        slot_grid: SlotGrid { day_start_s: 0, day_end_s: day_end, slot_length_s: slot_len },
        deadhead: deadhead_entries,
        trip_energy,
        costs: fleet.costs,
    };
    instance.normalize();
    instance.validate()?;
    Ok(instance)
}

/// Energy for a sequence of hop distances, by constants or calibrated model.
fn estimate_energy(energy: &EnergySource, model_id: &str, hops_m: &[f64]) -> Result<f64> {
    match energy {
        EnergySource::Constants(per_km) => {
            let rate = per_km.get(model_id).ok_or_else(|| {
                FleetError::Validation(format!("no kWh/km constant for model '{model_id}'"))
            })?;
            Ok(hops_m.iter().sum::<f64>() / 1000.0 * rate)
        }
        EnergySource::Calibration(models) => {
            let model = models.get(model_id).ok_or_else(|| {
                FleetError::Validation(format!("no calibrated model for '{model_id}'"))
            })?;
            let segments: Vec<SegmentFeatures> = hops_m
                .iter()
                .map(|d| SegmentFeatures {
                    distance_m: *d,
                    elevation_delta_m: 0.0,
                    road_class: "unclassified".into(),
                    temp_c: 0.0,
                    humidity_pct: 0.0,
                    visibility_km: 0.0,
                    precip_mm: 0.0,
                    wind_ms: 0.0,
                    speed_ratio: 1.0,
                })
                .collect();
            predict_trip_energy(model, &segments)
        }
    }
}
