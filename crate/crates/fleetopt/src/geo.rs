//! Small spherical/planar geometry helpers shared by the instance generator
//! and the telemetry pipeline.

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance in meters.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().atan2((1.0 - a).sqrt())
}

/// Point reached from (lat, lon) after `dist_m` meters along `bearing_rad`.
pub fn destination_point(lat: f64, lon: f64, bearing_rad: f64, dist_m: f64) -> (f64, f64) {
    let delta = dist_m / EARTH_RADIUS_M;
    let p1 = lat.to_radians();
    let l1 = lon.to_radians();
    let p2 = (p1.sin() * delta.cos() + p1.cos() * delta.sin() * bearing_rad.cos()).asin();
    let l2 = l1
        + (bearing_rad.sin() * delta.sin() * p1.cos()).atan2(delta.cos() - p1.sin() * p2.sin());
    (p2.to_degrees(), l2.to_degrees())
}

/// Equirectangular projection around a reference point. Adequate at city
/// scale; relative error stays below 0.1% within a kilometer.
#[derive(Debug, Clone, Copy)]
pub struct LocalProjection {
    pub lat0: f64,
    pub lon0: f64,
    cos_lat0: f64,
}

impl LocalProjection {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Self { lat0, lon0, cos_lat0: lat0.to_radians().cos() }
    }

    pub fn to_xy(&self, lat: f64, lon: f64) -> (f64, f64) {
        let x = (lon - self.lon0).to_radians() * self.cos_lat0 * EARTH_RADIUS_M;
        let y = (lat - self.lat0).to_radians() * EARTH_RADIUS_M;
        (x, y)
    }

    pub fn to_lat_lon(&self, x: f64, y: f64) -> (f64, f64) {
        let lat = self.lat0 + (y / EARTH_RADIUS_M).to_degrees();
        let lon = self.lon0 + (x / (EARTH_RADIUS_M * self.cos_lat0)).to_degrees();
        (lat, lon)
    }
}

/// Squared distance from `p` to the segment `(a, b)` in the plane, plus the
/// clamped projection parameter in [0, 1].
fn point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    let (ex, ey) = (p.0 - cx, p.1 - cy);
    (ex * ex + ey * ey, t)
}

/// Distance from `p` to a polyline and the arc-length position of the closest
/// point measured along it.
pub fn project_to_polyline(poly: &[(f64, f64)], p: (f64, f64)) -> (f64, f64) {
    debug_assert!(poly.len() >= 2);
    let mut best_d2 = f64::INFINITY;
    let mut best_along = 0.0;
    let mut cum = 0.0;
    for w in poly.windows(2) {
        let (d2, t) = point_segment(p, w[0], w[1]);
        let seg_len = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        if d2 < best_d2 {
            best_d2 = d2;
            best_along = cum + t * seg_len;
        }
        cum += seg_len;
    }
    (best_d2.sqrt(), best_along)
}

pub fn polyline_length(poly: &[(f64, f64)]) -> f64 {
    poly.windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum()
}

/// Point at arc-length `along` on the polyline, clamped to its ends.
pub fn point_at_along(poly: &[(f64, f64)], along: f64) -> (f64, f64) {
    debug_assert!(poly.len() >= 2);
    let mut remaining = along.max(0.0);
    for w in poly.windows(2) {
        let seg_len = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        if remaining <= seg_len || seg_len == 0.0 {
            if seg_len == 0.0 {
                continue;
            }
            let t = remaining / seg_len;
            return (w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1));
        }
        remaining -= seg_len;
    }
    *poly.last().unwrap()
}

/// Ray-casting point-in-polygon test; `polygon` is a closed ring of (lat, lon).
pub fn point_in_polygon(lat: f64, lon: f64, polygon: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let mut j = n - 1;
    for i in 0..n {
        let (yi, xi) = polygon[i];
        let (yj, xj) = polygon[j];
        if ((yi > lat) != (yj > lat))
            && (lon < (xj - xi) * (lat - yi) / (yj - yi + f64::EPSILON) + xi)
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}
