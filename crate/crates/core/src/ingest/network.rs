//! Street-network parser: `nodes.csv` (`node_id,lon,lat`) plus
//! `edges.csv` (`u,v,length_m,width_m,bike_lanes`; the last three columns
//! are optional and empty cells are allowed).
//!
//! Dangling edges and self-loops are rejected with a counted reason.
//! Missing edge lengths are back-filled with the great-circle distance
//! between the endpoints.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{great_circle_distance, GeoPoint};
use crate::ingest::IngestReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: String,
    pub v: String,
    pub length_m: f64,
    pub width_m: Option<f64>,
    pub bike_lanes: Option<u32>,
}

/// Undirected street graph. Node order is deterministic (BTreeMap).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreetNetwork {
    pub nodes: BTreeMap<String, GeoPoint>,
    pub edges: Vec<Edge>,
}

impl StreetNetwork {
    /// Programmatic construction with the same guarantees as parsing:
    /// endpoints must exist, self-loops are dropped, missing lengths are
    /// back-filled from endpoint distance.
    pub fn new(
        nodes: BTreeMap<String, GeoPoint>,
        edges: Vec<(String, String, Option<f64>, Option<f64>, Option<u32>)>,
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, length, width, bikes) in edges {
            if u == v {
                continue;
            }
            let (pu, pv) = match (nodes.get(&u), nodes.get(&v)) {
                (Some(a), Some(b)) => (*a, *b),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "edge {u}-{v} references a missing node"
                    )))
                }
            };
            let length_m = match length {
                Some(l) if l > 0.0 => l,
                Some(l) => {
                    return Err(Error::InvalidInput(format!(
                        "edge {u}-{v} has non-positive length {l}"
                    )))
                }
                None => great_circle_distance(pu, pv),
            };
            out.push(Edge {
                u,
                v,
                length_m,
                width_m: width,
                bike_lanes: bikes,
            });
        }
        Ok(StreetNetwork { nodes, edges: out })
    }

    /// Undirected degree per node id.
    pub fn degrees(&self) -> BTreeMap<&str, usize> {
        let mut deg: BTreeMap<&str, usize> = self.nodes.keys().map(|k| (k.as_str(), 0)).collect();
        for e in &self.edges {
            if let Some(d) = deg.get_mut(e.u.as_str()) {
                *d += 1;
            }
            if let Some(d) = deg.get_mut(e.v.as_str()) {
                *d += 1;
            }
        }
        deg
    }
}

fn header_position(header: &csv::StringRecord, name: &str) -> Option<usize> {
    header
        .iter()
        .position(|c| c.trim().eq_ignore_ascii_case(name))
}

fn require(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header_position(header, name).ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Parse the node/edge CSV pair into a [`StreetNetwork`]. The report
/// covers both files; reasons distinguish node and edge problems.
pub fn parse_network<R1: Read, R2: Read>(
    nodes_reader: R1,
    edges_reader: R2,
) -> Result<(StreetNetwork, IngestReport)> {
    let mut report = IngestReport::default();

    let mut nodes_csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(nodes_reader);
    let header = nodes_csv.headers()?.clone();
    let id_col = require(&header, "node_id")?;
    let lon_col = require(&header, "lon")?;
    let lat_col = require(&header, "lat")?;

    let mut nodes: BTreeMap<String, GeoPoint> = BTreeMap::new();
    for row in nodes_csv.records() {
        let row = row?;
        let id = row.get(id_col).unwrap_or("").trim().to_string();
        let lon_raw = row.get(lon_col).unwrap_or("").trim();
        let lat_raw = row.get(lat_col).unwrap_or("").trim();
        if id.is_empty() {
            report.reject("missing_node_id");
            continue;
        }
        if lon_raw.is_empty() || lat_raw.is_empty() {
            report.reject("missing_coordinates");
            continue;
        }
        let point = match (lon_raw.parse::<f64>(), lat_raw.parse::<f64>()) {
            (Ok(lon), Ok(lat)) => match GeoPoint::new(lon, lat) {
                Ok(p) => p,
                Err(_) => {
                    report.reject("invalid_coordinates");
                    continue;
                }
            },
            _ => {
                report.reject("invalid_coordinates");
                continue;
            }
        };
        if nodes.contains_key(&id) {
            report.reject("duplicate_node");
            continue;
        }
        nodes.insert(id, point);
        report.accept();
    }

    let mut edges_csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(edges_reader);
    let header = edges_csv.headers()?.clone();
    let u_col = require(&header, "u")?;
    let v_col = require(&header, "v")?;
    let len_col = header_position(&header, "length_m");
    let width_col = header_position(&header, "width_m");
    let bikes_col = header_position(&header, "bike_lanes");

    let optional_f64 = |row: &csv::StringRecord, col: Option<usize>| -> std::result::Result<Option<f64>, ()> {
        match col.and_then(|c| row.get(c)).map(str::trim) {
            None | Some("") => Ok(None),
            Some(raw) => raw.parse::<f64>().map(Some).map_err(|_| ()),
        }
    };

    let mut edges = Vec::new();
    for row in edges_csv.records() {
        let row = row?;
        let u = row.get(u_col).unwrap_or("").trim().to_string();
        let v = row.get(v_col).unwrap_or("").trim().to_string();
        if u.is_empty() || v.is_empty() {
            report.reject("missing_endpoint");
            continue;
        }
        if u == v {
            report.reject("self_loop");
            continue;
        }
        let (pu, pv) = match (nodes.get(&u), nodes.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                report.reject("dangling_edge");
                continue;
            }
        };
        let length_m = match optional_f64(&row, len_col) {
            Ok(Some(l)) if l > 0.0 => l,
            Ok(Some(_)) => {
                report.reject("invalid_length");
                continue;
            }
            Ok(None) => great_circle_distance(pu, pv),
            Err(()) => {
                report.reject("invalid_length");
                continue;
            }
        };
        let width_m = match optional_f64(&row, width_col) {
            Ok(Some(w)) if w > 0.0 => Some(w),
            Ok(None) => None,
            _ => {
                report.reject("invalid_width");
                continue;
            }
        };
        let bike_lanes = match bikes_col.and_then(|c| row.get(c)).map(str::trim) {
            None | Some("") => None,
            Some(raw) => match raw.parse::<u32>() {
                Ok(b) => Some(b),
                Err(_) => {
                    report.reject("invalid_bike_lanes");
                    continue;
                }
            },
        };
        edges.push(Edge {
            u,
            v,
            length_m,
            width_m,
            bike_lanes,
        });
        report.accept();
    }

    Ok((StreetNetwork { nodes, edges }, report))
}
