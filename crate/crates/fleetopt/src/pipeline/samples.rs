//! Per-segment energy samples: maximal continuous runs on one road segment,
//! with along-polyline distances and weather/traffic features joined by
//! nearest timestamp.

use crate::error::{FleetError, Result};
use crate::geo::project_to_polyline;
use crate::pipeline::network::NetworkGeometry;
use crate::pipeline::telemetry::TelemetryPoint;
use std::collections::BTreeMap;
use std::path::Path;

pub const DEFAULT_JOIN_HORIZON_S: i64 = 3600;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySample {
    pub segment_id: String,
    pub start_ts: i64,
    pub end_ts: i64,
    pub distance_m: f64,
    pub elevation_delta_m: f64,
    pub road_class: String,
    pub temp_c: f64,
    pub humidity_pct: f64,
    pub visibility_km: f64,
    pub precip_mm: f64,
    pub wind_ms: f64,
    pub speed_ratio: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WeatherRow {
    pub temp_c: f64,
    pub humidity_pct: f64,
    pub visibility_km: f64,
    pub precip_mm: f64,
    pub wind_ms: f64,
}

/// Timestamped weather rows, sorted by time, nearest-lookup within a horizon.
#[derive(Debug, Clone, Default)]
pub struct WeatherSeries {
    rows: Vec<(i64, WeatherRow)>,
}

/// Timestamped speed-ratio rows (actual over free-flow).
#[derive(Debug, Clone, Default)]
pub struct TrafficSeries {
    rows: Vec<(i64, f64)>,
}

fn nearest<T: Copy>(rows: &[(i64, T)], ts: i64, horizon_s: i64) -> Option<T> {
    if rows.is_empty() {
        return None;
    }
    let idx = rows.partition_point(|(t, _)| *t < ts);
    let mut best: Option<(i64, T)> = None;
    for candidate in [idx.checked_sub(1), Some(idx)].into_iter().flatten() {
        if let Some((t, v)) = rows.get(candidate) {
            let gap = (t - ts).abs();
            if best.is_none_or(|(g, _)| gap < g) {
                best = Some((gap, *v));
            }
        }
    }
    best.and_then(|(gap, v)| (gap <= horizon_s).then_some(v))
}

impl WeatherSeries {
    pub fn new(mut rows: Vec<(i64, WeatherRow)>) -> Self {
        rows.sort_by_key(|(t, _)| *t);
        Self { rows }
    }

    /// Columns: `ts_s,temp_c,humidity_pct,visibility_km,precip_mm,wind_ms`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file =
            std::fs::File::open(path).map_err(|e| FleetError::io(path.display().to_string(), e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let mut rows = Vec::new();
        for record in reader.deserialize::<(i64, f64, f64, f64, f64, f64)>() {
            let (ts, temp_c, humidity_pct, visibility_km, precip_mm, wind_ms) =
                record.map_err(|e| FleetError::parse("weather csv", e))?;
            rows.push((ts, WeatherRow { temp_c, humidity_pct, visibility_km, precip_mm, wind_ms }));
        }
        Ok(Self::new(rows))
    }

    pub fn nearest(&self, ts: i64, horizon_s: i64) -> Option<WeatherRow> {
        nearest(&self.rows, ts, horizon_s)
    }
}

impl TrafficSeries {
    pub fn new(mut rows: Vec<(i64, f64)>) -> Self {
        rows.sort_by_key(|(t, _)| *t);
        Self { rows }
    }

    /// Columns: `ts_s,speed_ratio`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file =
            std::fs::File::open(path).map_err(|e| FleetError::io(path.display().to_string(), e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let mut rows = Vec::new();
        for record in reader.deserialize::<(i64, f64)>() {
            let (ts, ratio) = record.map_err(|e| FleetError::parse("traffic csv", e))?;
            rows.push((ts, ratio));
        }
        Ok(Self::new(rows))
    }

    pub fn nearest(&self, ts: i64, horizon_s: i64) -> Option<f64> {
        nearest(&self.rows, ts, horizon_s)
    }
}

/// Cuts matched points into per-segment samples. Runs of unmatched points
/// split runs; single-point runs carry no time span and are dropped. Energy
/// label `k` covers the span into point `k`, so a run `[a..=b]` sums labels
/// `a+1..=b`.
pub fn make_samples(
    geometry: &NetworkGeometry,
    points: &[TelemetryPoint],
    matched: &[Option<String>],
    energies: &[(usize, f64)],
    weather: Option<&WeatherSeries>,
    traffic: Option<&TrafficSeries>,
    horizon_s: i64,
) -> Result<Vec<EnergySample>> {
    assert_eq!(points.len(), matched.len(), "matched ids must align with points");
    let energy_at: BTreeMap<usize, f64> = energies.iter().copied().collect();

    let mut samples = Vec::new();
    let mut run_start = 0usize;
    while run_start < matched.len() {
        let Some(segment_id) = &matched[run_start] else {
            run_start += 1;
            continue;
        };
        let mut run_end = run_start;
        while run_end + 1 < matched.len() && matched[run_end + 1].as_ref() == Some(segment_id) {
            run_end += 1;
        }
        if run_end > run_start {
            samples.push(build_sample(
                geometry,
                points,
                &energy_at,
                segment_id,
                run_start,
                run_end,
                weather,
                traffic,
                horizon_s,
            )?);
        }
        run_start = run_end + 1;
    }
    Ok(samples)
}

#[allow(clippy::too_many_arguments)]
fn build_sample(
    geometry: &NetworkGeometry,
    points: &[TelemetryPoint],
    energy_at: &BTreeMap<usize, f64>,
    segment_id: &str,
    run_start: usize,
    run_end: usize,
    weather: Option<&WeatherSeries>,
    traffic: Option<&TrafficSeries>,
    horizon_s: i64,
) -> Result<EnergySample> {
    let way = geometry.way(segment_id).ok_or_else(|| {
        FleetError::Validation(format!("matched segment '{segment_id}' not in network"))
    })?;
    let first = &points[run_start];
    let last = &points[run_end];
    let first_xy = geometry.projection.to_xy(first.lat, first.lon);
    let last_xy = geometry.projection.to_xy(last.lat, last.lon);
    let (_, along_first) = project_to_polyline(&way.polyline, first_xy);
    let (_, along_last) = project_to_polyline(&way.polyline, last_xy);
    let distance_m = (along_last - along_first).abs();
    let elevation_delta_m = match (way.elevation_at(along_first), way.elevation_at(along_last)) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let energy_kwh: f64 =
        (run_start + 1..=run_end).filter_map(|i| energy_at.get(&i)).sum();

    let start_ts = first.ts_s;
    let weather_row = match weather {
        None => WeatherRow::default(),
        Some(series) => series
            .nearest(start_ts, horizon_s)
            .ok_or(FleetError::FeatureJoinGap { ts_s: start_ts, horizon_s })?,
    };
    let speed_ratio = match traffic {
        None => 1.0,
        Some(series) => series
            .nearest(start_ts, horizon_s)
            .ok_or(FleetError::FeatureJoinGap { ts_s: start_ts, horizon_s })?,
    };

    Ok(EnergySample {
        segment_id: segment_id.to_string(),
        start_ts,
        end_ts: last.ts_s,
        distance_m,
        elevation_delta_m,
        road_class: way.class.clone(),
        temp_c: weather_row.temp_c,
        humidity_pct: weather_row.humidity_pct,
        visibility_km: weather_row.visibility_km,
        precip_mm: weather_row.precip_mm,
        wind_ms: weather_row.wind_ms,
        speed_ratio,
        energy_kwh,
    })
}

pub const SAMPLES_CSV_HEADER: &str = "segment_id,start_ts,end_ts,distance_m,elevation_delta_m,\
road_class,temp_c,humidity_pct,visibility_km,precip_mm,wind_ms,speed_ratio,energy_kwh";

pub fn write_samples_csv(samples: &[EnergySample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(SAMPLES_CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            s.segment_id,
            s.start_ts,
            s.end_ts,
            s.distance_m,
            s.elevation_delta_m,
            s.road_class,
            s.temp_c,
            s.humidity_pct,
            s.visibility_km,
            s.precip_mm,
            s.wind_ms,
            s.speed_ratio,
            s.energy_kwh,
        ));
    }
    std::fs::write(path, out).map_err(|e| FleetError::io(path.display().to_string(), e))
}

pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<Vec<EnergySample>> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| FleetError::io(path.display().to_string(), e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut out = Vec::new();
    type Row = (String, i64, i64, f64, f64, String, f64, f64, f64, f64, f64, f64, f64);
    for record in reader.deserialize::<Row>() {
        let (
            segment_id,
            start_ts,
            end_ts,
            distance_m,
            elevation_delta_m,
            road_class,
            temp_c,
            humidity_pct,
            visibility_km,
            precip_mm,
            wind_ms,
            speed_ratio,
            energy_kwh,
        ) = record.map_err(|e| FleetError::parse("samples csv", e))?;
        out.push(EnergySample {
            segment_id,
            start_ts,
            end_ts,
            distance_m,
            elevation_delta_m,
            road_class,
            temp_c,
            humidity_pct,
            visibility_km,
            precip_mm,
            wind_ms,
            speed_ratio,
            energy_kwh,
        });
    }
    Ok(out)
}
