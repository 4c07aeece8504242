//! Linear energy prediction: ordinary least squares on the sample features
//! via the normal equations, with a small ridge fallback when the system is
//! singular (duplicated or constant columns).

use crate::error::{FleetError, Result};
use crate::pipeline::samples::EnergySample;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;

pub const NUMERIC_FEATURES: [&str; 8] = [
    "distance_m",
    "elevation_delta_m",
    "temp_c",
    "humidity_pct",
    "visibility_km",
    "precip_mm",
    "wind_ms",
    "speed_ratio",
];

const RIDGE_LAMBDA: f64 = 1e-8;

/// Feature vector of one road-segment traversal, for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatures {
    pub distance_m: f64,
    pub elevation_delta_m: f64,
    pub road_class: String,
    pub temp_c: f64,
    pub humidity_pct: f64,
    pub visibility_km: f64,
    pub precip_mm: f64,
    pub wind_ms: f64,
    pub speed_ratio: f64,
}

impl From<&EnergySample> for SegmentFeatures {
    fn from(s: &EnergySample) -> Self {
        Self {
            distance_m: s.distance_m,
            elevation_delta_m: s.elevation_delta_m,
            road_class: s.road_class.clone(),
            temp_c: s.temp_c,
            humidity_pct: s.humidity_pct,
            visibility_km: s.visibility_km,
            precip_mm: s.precip_mm,
            wind_ms: s.wind_ms,
            speed_ratio: s.speed_ratio,
        }
    }
}

impl SegmentFeatures {
    fn numeric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "distance_m" => self.distance_m,
            "elevation_delta_m" => self.elevation_delta_m,
            "temp_c" => self.temp_c,
            "humidity_pct" => self.humidity_pct,
            "visibility_km" => self.visibility_km,
            "precip_mm" => self.precip_mm,
            "wind_ms" => self.wind_ms,
            "speed_ratio" => self.speed_ratio,
            _ => return None,
        })
    }
}

/// Trained linear model: one coefficient per encoded feature plus intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Encoded feature names: numeric features then one-hot `road_class=...`.
    pub features: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Training mean squared error.
    pub mse: f64,
    /// Features constant across the training set (e.g. elevation when node
    /// heights are unavailable); their coefficients carry no signal.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_features: Vec<String>,
}

impl LinearModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| FleetError::io(path.display().to_string(), e))?;
        let model: LinearModel = serde_json::from_str(&text)
            .map_err(|e| FleetError::parse(path.display().to_string(), e))?;
        if model.features.len() != model.coefficients.len() {
            return Err(FleetError::Validation(format!(
                "model has {} features but {} coefficients",
                model.features.len(),
                model.coefficients.len()
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| FleetError::io(path.display().to_string(), e))
    }

    /// Encodes one segment against this model's feature list.
    fn encode(&self, features: &SegmentFeatures) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.features.len());
        let mut class_matched = false;
        let mut has_class_features = false;
        for name in &self.features {
            if let Some(value) = features.numeric(name) {
                row.push(value);
            } else if let Some(class) = name.strip_prefix("road_class=") {
                has_class_features = true;
                let hit = class == features.road_class;
                class_matched |= hit;
                row.push(if hit { 1.0 } else { 0.0 });
            } else {
                return Err(FleetError::EncodingMismatch(format!("unknown feature '{name}'")));
            }
        }
        if has_class_features && !class_matched {
            return Err(FleetError::EncodingMismatch(format!(
                "road class '{}' not in the model's encoding",
                features.road_class
            )));
        }
        Ok(row)
    }

    pub fn predict_segment(&self, features: &SegmentFeatures) -> Result<f64> {
        let row = self.encode(features)?;
        Ok(self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>())
    }
}

/// Sum of per-segment predictions for an ordered trip, floored at zero.
pub fn predict_trip_energy(model: &LinearModel, segments: &[SegmentFeatures]) -> Result<f64> {
    let mut total = 0.0;
    for segment in segments {
        total += model.predict_segment(segment)?;
    }
    Ok(total.max(0.0))
}

/// Fits by solving the normal equations; on a singular system retries with a
/// tiny ridge penalty on everything except the intercept.
#[allow(clippy::needless_range_loop)] // triangular index loops read clearest
pub fn fit_ols(samples: &[EnergySample]) -> Result<LinearModel> {
    let classes: BTreeSet<&str> = samples.iter().map(|s| s.road_class.as_str()).collect();
    let mut features: Vec<String> = NUMERIC_FEATURES.iter().map(|s| s.to_string()).collect();
    features.extend(classes.iter().map(|c| format!("road_class={c}")));
    let p = features.len();
    if samples.len() < p + 1 {
        return Err(FleetError::InsufficientSamples { have: samples.len(), need: p + 1 });
    }

    // Design matrix rows [1, x...] fold directly into Z^T Z and Z^T y.
    let n = p + 1;
    let mut xtx = vec![vec![0.0_f64; n]; n];
    let mut xty = vec![0.0_f64; n];
    let mut rows = Vec::with_capacity(samples.len());
    for sample in samples {
        let encoded = encode_training(sample, &classes);
        let mut row = Vec::with_capacity(n);
        row.push(1.0);
        row.extend(encoded);
        for i in 0..n {
            for j in i..n {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * sample.energy_kwh;
        }
        rows.push(row);
    }
    for i in 0..n {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }

    // Normalize columns to unit L2 norm before solving so the Gram diagonal
    // is exactly one: the ridge strength and the singularity test become
    // scale-free. Zero columns keep scale one and a zero coefficient.
    let scale: Vec<f64> = (0..n)
        .map(|j| {
            let norm = xtx[j][j].sqrt();
            if norm > 0.0 { norm } else { 1.0 }
        })
        .collect();
    let mut xtx_n = xtx.clone();
    let mut xty_n = xty.clone();
    for i in 0..n {
        for j in 0..n {
            xtx_n[i][j] /= scale[i] * scale[j];
        }
        xty_n[i] /= scale[i];
    }

    let beta_n = match cholesky_solve(&xtx_n, &xty_n) {
        Some(beta) => refine(&xtx_n, &xtx_n, &xty_n, beta),
        None => {
            let mut ridged = xtx_n.clone();
            for (i, row) in ridged.iter_mut().enumerate().skip(1) {
                row[i] += RIDGE_LAMBDA;
            }
            let beta = cholesky_solve(&ridged, &xty_n).ok_or_else(|| {
                FleetError::Validation("normal equations unsolvable even with ridge".into())
            })?;
            // Refining against the unridged system drives the ridge bias out
            // of the range space; the null-space split stays where the first
            // solve put it.
            refine(&xtx_n, &ridged, &xty_n, beta)
        }
    };
    let beta: Vec<f64> = beta_n.iter().zip(&scale).map(|(b, s)| b / s).collect();

    let mse = rows
        .iter()
        .zip(samples)
        .map(|(row, sample)| {
            let predicted: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            (sample.energy_kwh - predicted).powi(2)
        })
        .sum::<f64>()
        / samples.len() as f64;

    let degenerate_features = features
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let first = rows[0][idx + 1];
            rows.iter().all(|row| row[idx + 1] == first)
        })
        .map(|(_, name)| name.clone())
        .collect();

    Ok(LinearModel {
        features,
        coefficients: beta[1..].to_vec(),
        intercept: beta[0],
        mse,
        degenerate_features,
    })
}

fn encode_training(sample: &EnergySample, classes: &BTreeSet<&str>) -> Vec<f64> {
    let features = SegmentFeatures::from(sample);
    let mut row: Vec<f64> =
        NUMERIC_FEATURES.iter().map(|name| features.numeric(name).unwrap()).collect();
    for class in classes {
        row.push(if *class == sample.road_class { 1.0 } else { 0.0 });
    }
    row
}

/// Iterative refinement of `target x = b` using `solver` for the correction
/// solves. With `solver` ridged and `target` the raw Gram matrix this is
/// iterated Tikhonov regularization.
fn refine(target: &[Vec<f64>], solver: &[Vec<f64>], b: &[f64], mut x: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for _ in 0..3 {
        let mut residual = vec![0.0_f64; n];
        for i in 0..n {
            let ax: f64 = (0..n).map(|j| target[i][j] * x[j]).sum();
            residual[i] = b[i] - ax;
        }
        let Some(correction) = cholesky_solve(solver, &residual) else { return x };
        for i in 0..n {
            x[i] += correction[i];
        }
    }
    x
}

/// Solves `a x = b` for symmetric positive-definite `a`; None when a pivot
/// collapses (rank deficiency).
#[allow(clippy::needless_range_loop)]
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut lower = vec![vec![0.0_f64; n]; n];
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= lower[j][k] * lower[j][k];
        }
        if diag <= a[j][j].abs() * 1e-12 + 1e-300 {
            return None;
        }
        lower[j][j] = diag.sqrt();
        for i in (j + 1)..n {
            let mut value = a[i][j];
            for k in 0..j {
                value -= lower[i][k] * lower[j][k];
            }
            lower[i][j] = value / lower[j][j];
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0_f64; n];
    for i in 0..n {
        let mut value = b[i];
        for k in 0..i {
            value -= lower[i][k] * y[k];
        }
        y[i] = value / lower[i][i];
    }
    let mut x = vec![0.0_f64; n];
    for i in (0..n).rev() {
        let mut value = y[i];
        for k in (i + 1)..n {
            value -= lower[k][i] * x[k];
        }
        x[i] = value / lower[i][i];
    }
    Some(x)
}
