//! WGS84 points, great-circle distances and the small planar helpers used
//! for snapping and polygon membership.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("invalid coordinate lat={lat}, lon={lon}")]
pub struct InvalidPoint {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<GeoPoint, InvalidPoint> {
        let p = GeoPoint { lat, lon };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(InvalidPoint { lat, lon })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }

    /// Unit vector on the sphere; chord length between two of these is
    /// monotone in great-circle distance.
    pub fn to_unit_vector(&self) -> [f64; 3] {
        let (phi, lambda) = (self.lat.to_radians(), self.lon.to_radians());
        [phi.cos() * lambda.cos(), phi.cos() * lambda.sin(), phi.sin()]
    }
}

/// Parses `"lat,lon"`.
impl std::str::FromStr for GeoPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lat, lon) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `lat,lon`, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", v.trim()))
        };
        let (lat, lon) = (parse(lat)?, parse(lon)?);
        GeoPoint::new(lat, lon).map_err(|e| e.to_string())
    }
}

pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

pub fn polyline_length_m(points: &[GeoPoint]) -> f64 {
    points.windows(2).map(|w| haversine_m(w[0], w[1])).sum()
}

/// Equirectangular projection around `origin`, in meters (x east, y north).
pub fn project_local(origin: GeoPoint, p: GeoPoint) -> (f64, f64) {
    let mut dlon = p.lon - origin.lon;
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    let x = EARTH_RADIUS_M * origin.lat.to_radians().cos() * dlon.to_radians();
    let y = EARTH_RADIUS_M * (p.lat - origin.lat).to_radians();
    (x, y)
}

/// Closest approach of `p` to a polyline, measured in a local plane
/// centered on `p`. Returns the distance in meters and the segment index
/// plus the fraction along it.
pub fn point_to_polyline_m(p: GeoPoint, polyline: &[GeoPoint]) -> (f64, usize, f64) {
    let mut best = (f64::INFINITY, 0, 0.0);
    for (i, w) in polyline.windows(2).enumerate() {
        let a = project_local(p, w[0]);
        let b = project_local(p, w[1]);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            ((-a.0 * dx - a.1 * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
        let d = (cx * cx + cy * cy).sqrt();
        if d < best.0 {
            best = (d, i, t);
        }
    }
    best
}

/// Point halfway along the polyline by haversine length.
pub fn polyline_midpoint(points: &[GeoPoint]) -> GeoPoint {
    let total = polyline_length_m(points);
    let half = total / 2.0;
    let mut walked = 0.0;
    for w in points.windows(2) {
        let seg = haversine_m(w[0], w[1]);
        if walked + seg >= half && seg > 0.0 {
            let t = (half - walked) / seg;
            return GeoPoint {
                lat: w[0].lat + t * (w[1].lat - w[0].lat),
                lon: w[0].lon + t * (w[1].lon - w[0].lon),
            };
        }
        walked += seg;
    }
    points[points.len() - 1]
}

/// Even-odd ray casting in lon/lat space. `ring` may or may not repeat its
/// first point at the end.
pub fn point_in_ring(p: GeoPoint, ring: &[GeoPoint]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if p.lon < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn segments_cross(a: GeoPoint, b: GeoPoint, c: GeoPoint, d: GeoPoint) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    (o1 * o2 < 0.0) && (o3 * o4 < 0.0)
}

/// Checks that a closed ring has at least three distinct vertices, nonzero
/// area and no crossing edges.
pub fn validate_ring(ring: &[GeoPoint]) -> Result<(), String> {
    if ring.len() < 4 {
        return Err(format!("ring needs at least 4 positions, got {}", ring.len()));
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    if let Some(p) = ring.iter().find(|p| !p.is_valid()) {
        return Err(format!("invalid coordinate lat={}, lon={}", p.lat, p.lon));
    }
    let edges: Vec<(GeoPoint, GeoPoint)> = ring.windows(2).map(|w| (w[0], w[1])).collect();
    let area2: f64 = edges.iter().map(|(a, b)| a.lon * b.lat - b.lon * a.lat).sum();
    if area2 == 0.0 {
        return Err("ring has zero area".into());
    }
    for i in 0..edges.len() {
        for j in i + 2..edges.len() {
            if i == 0 && j == edges.len() - 1 {
                continue;
            }
            if segments_cross(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                return Err(format!("ring self-intersects between edges {i} and {j}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn zero_distance() {
        let a = pt(47.6, -122.3);
        assert_eq!(haversine_m(a, a), 0.0);
    }

    #[test]
    fn thousandth_degree_at_equator() {
        // R * 0.001 deg in radians
        let expected = EARTH_RADIUS_M * 0.001_f64.to_radians();
        assert!((expected - 111.195).abs() < 0.01);
        let d = haversine_m(pt(0.0, 0.0), pt(0.001, 0.0));
        assert!((d - expected).abs() < 1e-6, "{d}");
    }

    #[test]
    fn antipodes() {
        let d = haversine_m(pt(10.0, 20.0), pt(-10.0, -160.0));
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 1.0);
    }

    #[test]
    fn invalid_points() {
        assert!(GeoPoint::new(91.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn distance_to_east_west_segment() {
        let lat = 47.6;
        let seg = [pt(lat, -122.3010), pt(lat, -122.2990)];
        // 2 m north of the segment midpoint
        let dlat = (2.0 / EARTH_RADIUS_M).to_degrees();
        let (d, idx, t) = point_to_polyline_m(pt(lat + dlat, -122.3), &seg);
        assert!((d - 2.0).abs() < 1e-6, "{d}");
        assert_eq!(idx, 0);
        assert!((t - 0.5).abs() < 1e-6);
    }

    #[test]
    fn distance_beyond_segment_end_is_to_endpoint() {
        let seg = [pt(0.0, 0.0), pt(0.0, 0.001)];
        let p = pt(0.0, 0.002);
        let (d, _, t) = point_to_polyline_m(p, &seg);
        assert_eq!(t, 1.0);
        assert!((d - haversine_m(p, seg[1])).abs() < 1e-6);
    }

    #[test]
    fn ring_checks() {
        let square = [pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 0.0)];
        assert!(validate_ring(&square).is_ok());
        assert!(point_in_ring(pt(0.5, 0.5), &square));
        assert!(!point_in_ring(pt(1.5, 0.5), &square));
        let bowtie = [pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(1.0, 0.0), pt(0.0, 0.0)];
        assert!(validate_ring(&bowtie).is_err());
        assert!(validate_ring(&square[..4]).is_err());
        let flat = [pt(0.0, 0.0), pt(0.0, 1.0), pt(0.0, 2.0), pt(0.0, 0.0)];
        assert!(validate_ring(&flat).is_err());
    }

    #[test]
    fn parse_lat_lon() {
        assert_eq!("47.6,-122.3".parse::<GeoPoint>().unwrap(), pt(47.6, -122.3));
        assert_eq!(" 1 , 2 ".parse::<GeoPoint>().unwrap(), pt(1.0, 2.0));
        assert!("47.6".parse::<GeoPoint>().is_err());
        assert!("95,0".parse::<GeoPoint>().is_err());
        assert!("a,b".parse::<GeoPoint>().is_err());
    }

    #[test]
    fn midpoint_of_straight_line() {
        let m = polyline_midpoint(&[pt(0.0, 0.0), pt(0.0, 0.001), pt(0.0, 0.003)]);
        assert!((m.lon - 0.0015).abs() < 1e-9);
    }
}
