//! Geometry primitives shared by all spatial computation.
//!
//! All operations are pure; lon/lat are degrees, plane coordinates are
//! meters on a local equirectangular projection. Distances use a sphere of
//! radius [`EARTH_RADIUS_M`]; at city scale the ellipsoid correction is
//! far below the noise floor of the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sphere radius used for every distance in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Distance (degrees) below which a point counts as lying on a boundary.
/// Roughly 0.1 mm at the equator.
const BOUNDARY_EPS_DEG: f64 = 1e-9;

/// Longitude/latitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        let p = GeoPoint { lon, lat };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lon.is_finite() || !self.lat.is_finite() {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if self.lon < -180.0 || self.lon > 180.0 {
            return Err(Error::InvalidInput(format!(
                "longitude {} out of [-180, 180]",
                self.lon
            )));
        }
        if self.lat < -90.0 || self.lat > 90.0 {
            return Err(Error::InvalidInput(format!(
                "latitude {} out of [-90, 90]",
                self.lat
            )));
        }
        Ok(())
    }
}

/// Meters east/north of a reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn dist(&self, other: &PlanePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Simple polygon with optional holes. Rings are stored open (the closing
/// vertex is implicit) and validated as non-self-intersecting on
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonGeom {
    exterior: Vec<GeoPoint>,
    holes: Vec<Vec<GeoPoint>>,
}

impl PolygonGeom {
    pub fn new(exterior: Vec<GeoPoint>, holes: Vec<Vec<GeoPoint>>) -> Result<Self> {
        validate_ring(&exterior)?;
        for hole in &holes {
            validate_ring(hole)?;
        }
        Ok(PolygonGeom { exterior, holes })
    }

    pub fn exterior(&self) -> &[GeoPoint] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<GeoPoint>] {
        &self.holes
    }

    /// All ring vertices, exterior first.
    pub fn vertices(&self) -> impl Iterator<Item = &GeoPoint> {
        self.exterior
            .iter()
            .chain(self.holes.iter().flat_map(|h| h.iter()))
    }

    /// Boundary segments of every ring, with the implicit closing segment.
    pub fn segments(&self) -> Vec<(GeoPoint, GeoPoint)> {
        let mut segs = ring_segments(&self.exterior);
        for hole in &self.holes {
            segs.extend(ring_segments(hole));
        }
        segs
    }

    pub fn bbox(&self) -> (GeoPoint, GeoPoint) {
        let mut min = GeoPoint {
            lon: f64::INFINITY,
            lat: f64::INFINITY,
        };
        let mut max = GeoPoint {
            lon: f64::NEG_INFINITY,
            lat: f64::NEG_INFINITY,
        };
        for v in &self.exterior {
            min.lon = min.lon.min(v.lon);
            min.lat = min.lat.min(v.lat);
            max.lon = max.lon.max(v.lon);
            max.lat = max.lat.max(v.lat);
        }
        (min, max)
    }
}

fn ring_segments(ring: &[GeoPoint]) -> Vec<(GeoPoint, GeoPoint)> {
    (0..ring.len())
        .map(|i| (ring[i], ring[(i + 1) % ring.len()]))
        .collect()
}

fn validate_ring(ring: &[GeoPoint]) -> Result<()> {
    let distinct: Vec<&GeoPoint> = {
        let mut out: Vec<&GeoPoint> = Vec::new();
        for v in ring {
            v.validate()?;
            if !out.iter().any(|u| u.lon == v.lon && u.lat == v.lat) {
                out.push(v);
            }
        }
        out
    };
    if distinct.len() < 3 {
        return Err(Error::InvalidGeometry(format!(
            "ring needs >=3 distinct vertices, got {}",
            distinct.len()
        )));
    }
    if ring
        .first()
        .zip(ring.last())
        .is_some_and(|(a, b)| ring.len() > 1 && a.lon == b.lon && a.lat == b.lat)
    {
        return Err(Error::InvalidGeometry(
            "ring stores an explicit closing vertex; closure is implicit".into(),
        ));
    }
    let segs = ring_segments(ring);
    let n = segs.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // consecutive segments share exactly one endpoint
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(segs[i], segs[j]) {
                return Err(Error::InvalidGeometry(format!(
                    "ring self-intersects between segments {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

fn orient(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> f64 {
    (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon)
}

fn on_segment_bbox(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool {
    p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

fn segments_intersect(s1: (GeoPoint, GeoPoint), s2: (GeoPoint, GeoPoint)) -> bool {
    let (p1, p2) = s1;
    let (p3, p4) = s2;
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment_bbox(p3, p4, p1))
        || (d2 == 0.0 && on_segment_bbox(p3, p4, p2))
        || (d3 == 0.0 && on_segment_bbox(p1, p2, p3))
        || (d4 == 0.0 && on_segment_bbox(p1, p2, p4))
}

/// Haversine distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn great_circle_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let mut dlon = (b.lon - a.lon).to_radians();
    // shorter arc across the antimeridian
    if dlon > std::f64::consts::PI {
        dlon -= 2.0 * std::f64::consts::PI;
    } else if dlon < -std::f64::consts::PI {
        dlon += 2.0 * std::f64::consts::PI;
    }
    let sin_dlat = (dlat / 2.0).sin();
    let sin_dlon = (dlon / 2.0).sin();
    let h = sin_dlat * sin_dlat + lat1.cos() * lat2.cos() * sin_dlon * sin_dlon;
    let central = 2.0 * h.sqrt().atan2((1.0 - h).sqrt());
    EARTH_RADIUS_M * central
}

/// Squared distance (degree space) from `p` to segment `(a, b)`.
fn point_segment_dist2(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    let (dx, dy) = (b.lon - a.lon, b.lat - a.lat);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (p.lon - (a.lon + t * dx), p.lat - (a.lat + t * dy));
    ex * ex + ey * ey
}

fn on_ring_boundary(p: GeoPoint, ring: &[GeoPoint]) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        point_segment_dist2(p, ring[i], ring[(i + 1) % n]) <= BOUNDARY_EPS_DEG * BOUNDARY_EPS_DEG
    })
}

fn ray_crossings(p: GeoPoint, ring: &[GeoPoint]) -> usize {
    // horizontal ray to +lon, even-odd rule
    let n = ring.len();
    let mut crossings = 0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let (lo, hi) = if a.lat <= b.lat { (a, b) } else { (b, a) };
        if p.lat >= lo.lat && p.lat < hi.lat {
            let x_at = lo.lon + (p.lat - lo.lat) / (hi.lat - lo.lat) * (hi.lon - lo.lon);
            if x_at > p.lon {
                crossings += 1;
            }
        }
    }
    crossings
}

/// Even-odd point-in-polygon. Points in holes are outside; points on any
/// ring boundary count as inside.
pub fn point_in_polygon(p: GeoPoint, poly: &PolygonGeom) -> bool {
    let (min, max) = poly.bbox();
    // bbox grown by the boundary tolerance
    if p.lon < min.lon - BOUNDARY_EPS_DEG
        || p.lon > max.lon + BOUNDARY_EPS_DEG
        || p.lat < min.lat - BOUNDARY_EPS_DEG
        || p.lat > max.lat + BOUNDARY_EPS_DEG
    {
        return false;
    }
    if on_ring_boundary(p, &poly.exterior) || poly.holes.iter().any(|h| on_ring_boundary(p, h)) {
        return true;
    }
    let mut crossings = ray_crossings(p, &poly.exterior);
    for hole in &poly.holes {
        crossings += ray_crossings(p, hole);
    }
    crossings % 2 == 1
}

/// Signed shoelace area and first moments of a ring in the local plane.
fn ring_area_moments(ring: &[GeoPoint], reference: GeoPoint) -> (f64, f64, f64) {
    let pts = project_local(ring, reference);
    let n = pts.len();
    let (mut area2, mut mx, mut my) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let cross = a.x * b.y - b.x * a.y;
        area2 += cross;
        mx += (a.x + b.x) * cross;
        my += (a.y + b.y) * cross;
    }
    (area2 / 2.0, mx / 6.0, my / 6.0)
}

/// Area in square meters (exterior minus holes) in the local plane.
pub fn polygon_area_m2(poly: &PolygonGeom) -> f64 {
    let reference = ring_mean(&poly.exterior);
    let (a, _, _) = ring_area_moments(&poly.exterior, reference);
    let mut area = a.abs();
    for hole in &poly.holes {
        let (h, _, _) = ring_area_moments(hole, reference);
        area -= h.abs();
    }
    area
}

fn ring_mean(ring: &[GeoPoint]) -> GeoPoint {
    let n = ring.len() as f64;
    GeoPoint {
        lon: ring.iter().map(|p| p.lon).sum::<f64>() / n,
        lat: ring.iter().map(|p| p.lat).sum::<f64>() / n,
    }
}

/// Area-weighted centroid (exterior minus holes), computed in the local
/// equirectangular plane and unprojected back to lon/lat.
pub fn polygon_centroid(poly: &PolygonGeom) -> Result<GeoPoint> {
    let reference = ring_mean(&poly.exterior);
    let (a_ext, mx_ext, my_ext) = ring_area_moments(&poly.exterior, reference);
    // ring centroid is winding-independent: moments and area share sign
    let mut area = a_ext.abs();
    let sign = if a_ext >= 0.0 { 1.0 } else { -1.0 };
    let mut mx = sign * mx_ext;
    let mut my = sign * my_ext;
    for hole in &poly.holes {
        let (a_h, mx_h, my_h) = ring_area_moments(hole, reference);
        let s = if a_h >= 0.0 { 1.0 } else { -1.0 };
        area -= a_h.abs();
        mx -= s * mx_h;
        my -= s * my_h;
    }
    if area <= f64::EPSILON {
        return Err(Error::InvalidGeometry("degenerate (zero-area) polygon".into()));
    }
    Ok(unproject_local(
        PlanePoint {
            x: mx / area,
            y: my / area,
        },
        reference,
    ))
}

/// Equirectangular projection: meters east/north of `reference`.
/// `x = R * dlon * cos(lat_ref)`, `y = R * dlat` (radians).
pub fn project_local(points: &[GeoPoint], reference: GeoPoint) -> Vec<PlanePoint> {
    let cos_ref = reference.lat.to_radians().cos();
    points
        .iter()
        .map(|p| {
            let mut dlon = p.lon - reference.lon;
            if dlon > 180.0 {
                dlon -= 360.0;
            } else if dlon < -180.0 {
                dlon += 360.0;
            }
            PlanePoint {
                x: EARTH_RADIUS_M * dlon.to_radians() * cos_ref,
                y: EARTH_RADIUS_M * (p.lat - reference.lat).to_radians(),
            }
        })
        .collect()
}

/// Inverse of [`project_local`].
pub fn unproject_local(p: PlanePoint, reference: GeoPoint) -> GeoPoint {
    let cos_ref = reference.lat.to_radians().cos();
    GeoPoint {
        lon: reference.lon + (p.x / (EARTH_RADIUS_M * cos_ref)).to_degrees(),
        lat: reference.lat + (p.y / EARTH_RADIUS_M).to_degrees(),
    }
}
