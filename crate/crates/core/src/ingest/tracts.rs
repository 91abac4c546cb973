//! Census-tract GeoJSON parser (RFC 7946 FeatureCollection).
//!
//! Only `Polygon` and `MultiPolygon` geometries are accepted; anything
//! else is a fatal error. The tract-id property defaults to `tract_id`
//! and is configurable. Multi-polygon tracts keep their parts; contiguity
//! and containment treat parts as a union.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::{point_in_polygon, polygon_area_m2, polygon_centroid, GeoPoint, PolygonGeom};

/// One census tract: possibly multi-part geometry plus a precomputed
/// area-weighted centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTract {
    pub tract_id: String,
    pub geometry: Vec<PolygonGeom>,
    pub centroid: GeoPoint,
}

impl CensusTract {
    pub fn new(tract_id: String, geometry: Vec<PolygonGeom>) -> Result<Self> {
        if geometry.is_empty() {
            return Err(Error::InvalidGeometry(format!(
                "tract {tract_id} has no polygon parts"
            )));
        }
        let centroid = multipart_centroid(&geometry)?;
        Ok(CensusTract {
            tract_id,
            geometry,
            centroid,
        })
    }

    /// Union containment over parts; boundary points count as inside.
    pub fn contains(&self, p: GeoPoint) -> bool {
        self.geometry.iter().any(|poly| point_in_polygon(p, poly))
    }

    pub fn area_m2(&self) -> f64 {
        self.geometry.iter().map(polygon_area_m2).sum()
    }
}

/// Area-weighted mean of part centroids.
fn multipart_centroid(parts: &[PolygonGeom]) -> Result<GeoPoint> {
    let mut total_area = 0.0;
    let (mut lon, mut lat) = (0.0, 0.0);
    for part in parts {
        let area = polygon_area_m2(part);
        let c = polygon_centroid(part)?;
        lon += area * c.lon;
        lat += area * c.lat;
        total_area += area;
    }
    if total_area <= f64::EPSILON {
        return Err(Error::InvalidGeometry("zero-area tract".into()));
    }
    GeoPoint::new(lon / total_area, lat / total_area)
}

fn ring_from_coords(coords: &Value) -> Result<Vec<GeoPoint>> {
    let arr = coords
        .as_array()
        .ok_or_else(|| Error::InvalidGeometry("ring is not an array".into()))?;
    let mut ring = Vec::with_capacity(arr.len());
    for pos in arr {
        let pair = pos
            .as_array()
            .ok_or_else(|| Error::InvalidGeometry("position is not an array".into()))?;
        if pair.len() < 2 {
            return Err(Error::InvalidGeometry("position needs lon and lat".into()));
        }
        let lon = pair[0]
            .as_f64()
            .ok_or_else(|| Error::InvalidGeometry("non-numeric longitude".into()))?;
        let lat = pair[1]
            .as_f64()
            .ok_or_else(|| Error::InvalidGeometry("non-numeric latitude".into()))?;
        ring.push(GeoPoint::new(lon, lat)?);
    }
    // GeoJSON rings repeat the first position at the end; we store open rings
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    Ok(ring)
}

fn polygon_from_coords(coords: &Value) -> Result<PolygonGeom> {
    let rings = coords
        .as_array()
        .ok_or_else(|| Error::InvalidGeometry("polygon coordinates not an array".into()))?;
    if rings.is_empty() {
        return Err(Error::InvalidGeometry("polygon with no rings".into()));
    }
    let exterior = ring_from_coords(&rings[0])?;
    let holes = rings[1..]
        .iter()
        .map(ring_from_coords)
        .collect::<Result<Vec<_>>>()?;
    PolygonGeom::new(exterior, holes)
}

/// Parse a GeoJSON FeatureCollection of Polygon/MultiPolygon tracts.
pub fn parse_tracts(geojson: &str, id_property: &str) -> Result<Vec<CensusTract>> {
    let doc: Value = serde_json::from_str(geojson).map_err(|e| Error::from_json(e, geojson))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::InvalidInput(
            "expected a GeoJSON FeatureCollection".into(),
        ));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput("FeatureCollection without features".into()))?;

    let mut tracts: Vec<CensusTract> = Vec::with_capacity(features.len());
    for feature in features {
        let props = feature.get("properties").unwrap_or(&Value::Null);
        let id = match props.get(id_property) {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "feature missing id property `{id_property}`"
                )))
            }
        };
        if tracts.iter().any(|t| t.tract_id == id) {
            return Err(Error::DuplicateId(id));
        }
        let geometry = feature
            .get("geometry")
            .ok_or_else(|| Error::InvalidGeometry(format!("feature {id} has no geometry")))?;
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| Error::InvalidGeometry(format!("feature {id} has no coordinates")))?;
        let parts = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![polygon_from_coords(coords)?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| Error::InvalidGeometry("MultiPolygon coordinates".into()))?
                .iter()
                .map(polygon_from_coords)
                .collect::<Result<Vec<_>>>()?,
            other => {
                return Err(Error::InvalidGeometry(format!(
                    "feature {id}: unsupported geometry type {other:?} (only Polygon/MultiPolygon)"
                )))
            }
        };
        tracts.push(CensusTract::new(id, parts)?);
    }
    Ok(tracts)
}

fn ring_to_coords(ring: &[GeoPoint]) -> Value {
    let mut positions: Vec<Value> = ring.iter().map(|p| json!([p.lon, p.lat])).collect();
    if let Some(first) = positions.first().cloned() {
        positions.push(first); // GeoJSON rings are explicitly closed
    }
    Value::Array(positions)
}

pub fn geometry_to_geojson(parts: &[PolygonGeom]) -> Value {
    let poly_coords = |p: &PolygonGeom| {
        let mut rings = vec![ring_to_coords(p.exterior())];
        rings.extend(p.holes().iter().map(|h| ring_to_coords(h)));
        Value::Array(rings)
    };
    if parts.len() == 1 {
        json!({ "type": "Polygon", "coordinates": poly_coords(&parts[0]) })
    } else {
        json!({
            "type": "MultiPolygon",
            "coordinates": Value::Array(parts.iter().map(poly_coords).collect()),
        })
    }
}

/// Serialize tracts (with optional extra per-tract properties) back to a
/// FeatureCollection. Property maps must be in tract order.
pub fn tracts_to_geojson(tracts: &[CensusTract], properties: &[Value]) -> Value {
    let features: Vec<Value> = tracts
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut props = match properties.get(i) {
                Some(Value::Object(m)) => Value::Object(m.clone()),
                _ => json!({}),
            };
            props["tract_id"] = json!(t.tract_id);
            json!({
                "type": "Feature",
                "properties": props,
                "geometry": geometry_to_geojson(&t.geometry),
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}
