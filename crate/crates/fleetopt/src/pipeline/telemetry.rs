//! Raw vehicle telemetry: CSV traces, garage/charging filtering, and energy
//! labeling between consecutive points.

use crate::error::{FleetError, Result};
use crate::geo::point_in_polygon;
use crate::model::VehicleKind;
use std::path::Path;

/// Diesel lower heating value used to put fuel on the kWh axis.
pub const DEFAULT_KWH_PER_GALLON: f64 = 37.95;

const JOULES_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TelemetryPoint {
    pub ts_s: i64,
    pub lat: f64,
    pub lon: f64,
    pub current_a: Option<f64>,
    pub voltage_v: Option<f64>,
    pub soc_pct: Option<f64>,
    pub cable: Option<u8>,
    pub fuel_gal: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CleanConfig {
    /// Geofences (closed (lat, lon) rings) whose interior points are dropped.
    pub garage_polygons: Vec<Vec<(f64, f64)>>,
    pub kwh_per_gallon: f64,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self { garage_polygons: Vec::new(), kwh_per_gallon: DEFAULT_KWH_PER_GALLON }
    }
}

/// Filtered trace with energies between consecutive surviving points;
/// `point_energies[k] = (i, kwh)` labels the span from `points[i-1]` to
/// `points[i]`.
#[derive(Debug, Clone)]
pub struct CleanedTrace {
    pub points: Vec<TelemetryPoint>,
    pub point_energies: Vec<(usize, f64)>,
}

/// Drops charging-cable and garage points, then labels energy between the
/// surviving consecutive points: battery current times voltage for electric
/// vehicles, fuel-level deltas for liquid fuel (refueling spans dropped).
pub fn clean_and_label(
    trace: &[TelemetryPoint],
    kind: VehicleKind,
    cfg: &CleanConfig,
) -> Result<CleanedTrace> {
    if trace.is_empty() {
        return Err(FleetError::EmptyAfterFilter);
    }
    for (i, w) in trace.windows(2).enumerate() {
        if w[1].ts_s <= w[0].ts_s {
            return Err(FleetError::NonMonotonicTimestamps { index: i + 1 });
        }
    }

    let points: Vec<TelemetryPoint> = trace
        .iter()
        .filter(|p| p.cable != Some(1))
        .filter(|p| !cfg.garage_polygons.iter().any(|poly| point_in_polygon(p.lat, p.lon, poly)))
        .cloned()
        .collect();
    if points.is_empty() {
        return Err(FleetError::EmptyAfterFilter);
    }

    let mut point_energies = Vec::new();
    for i in 1..points.len() {
        match kind {
            VehicleKind::Electric => {
                let (Some(current), Some(voltage)) = (points[i].current_a, points[i].voltage_v)
                else {
                    continue;
                };
                let dt = (points[i].ts_s - points[i - 1].ts_s) as f64;
                let joules = current * voltage * dt;
                point_energies.push((i, joules / JOULES_PER_KWH));
            }
            VehicleKind::LiquidFuel => {
                let (Some(prev), Some(curr)) = (points[i - 1].fuel_gal, points[i].fuel_gal)
                else {
                    continue;
                };
                let consumed_gal = prev - curr;
                if consumed_gal < 0.0 {
                    continue; // refueling
                }
                point_energies.push((i, consumed_gal * cfg.kwh_per_gallon));
            }
        }
    }
    Ok(CleanedTrace { points, point_energies })
}

fn parse_opt<T: std::str::FromStr>(field: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<T>()
        .map(Some)
        .map_err(|e| FleetError::parse("trace csv", format!("bad field '{field}': {e}")))
}

/// Columns: `ts_s,lat,lon,current_a,voltage_v,soc_pct,cable,fuel_gal`;
/// blank fields mean absent.
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<Vec<TelemetryPoint>> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| FleetError::io(path.display().to_string(), e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| FleetError::parse("trace csv", e))?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            FleetError::parse(path.display().to_string(), format!("missing column '{name}'"))
        })
    };
    let (c_ts, c_lat, c_lon) = (col("ts_s")?, col("lat")?, col("lon")?);
    let (c_cur, c_volt, c_soc) = (col("current_a")?, col("voltage_v")?, col("soc_pct")?);
    let (c_cable, c_fuel) = (col("cable")?, col("fuel_gal")?);

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FleetError::parse("trace csv", e))?;
        let get = |idx: usize| record.get(idx).unwrap_or_default();
        out.push(TelemetryPoint {
            ts_s: get(c_ts)
                .parse()
                .map_err(|e| FleetError::parse("trace csv", format!("bad ts_s: {e}")))?,
            lat: get(c_lat)
                .parse()
                .map_err(|e| FleetError::parse("trace csv", format!("bad lat: {e}")))?,
            lon: get(c_lon)
                .parse()
                .map_err(|e| FleetError::parse("trace csv", format!("bad lon: {e}")))?,
            current_a: parse_opt(get(c_cur))?,
            voltage_v: parse_opt(get(c_volt))?,
            soc_pct: parse_opt(get(c_soc))?,
            cable: parse_opt(get(c_cable))?,
            fuel_gal: parse_opt(get(c_fuel))?,
        });
    }
    Ok(out)
}

pub fn write_trace_csv(points: &[TelemetryPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("ts_s,lat,lon,current_a,voltage_v,soc_pct,cable,fuel_gal\n");
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    for p in points {
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{},{},{},{}\n",
            p.ts_s,
            p.lat,
            p.lon,
            fmt(p.current_a),
            fmt(p.voltage_v),
            fmt(p.soc_pct),
            p.cable.map(|c| c.to_string()).unwrap_or_default(),
            fmt(p.fuel_gal),
        ));
    }
    std::fs::write(path, out).map_err(|e| FleetError::io(path.display().to_string(), e))
}
