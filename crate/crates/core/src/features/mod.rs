//! Model-ready feature tables.
//!
//! The aggregated table has one row per tract (features + severe-accident
//! count + projected centroid); the point table has one row per accident
//! that falls inside a tract with a usable network summary. A severe
//! accident is any record with `injured + killed >= 1`.

pub mod smote;

pub use smote::{needed_for_ratio, smote_oversample, SmoteConfig};

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{project_local, GeoPoint, PlanePoint};
use crate::ingest::{AccidentRecord, CensusTract};
use crate::netmetrics::TractNetworkSummary;

/// Tract-level feature order used everywhere (tables, models, CSV).
pub const AGG_FEATURE_NAMES: [&str; 4] = [
    "complexity",
    "avg_street_width_m",
    "avg_bike_lanes",
    "avg_node_degree",
];

/// Point-level feature order: temporal, vehicle one-hot, tract features.
pub const POINT_FEATURE_NAMES: [&str; 13] = [
    "hour",
    "day_of_week",
    "veh_car",
    "veh_two_wheeler",
    "veh_truck",
    "veh_bus",
    "veh_taxi",
    "veh_bicycle",
    "veh_other",
    "complexity",
    "avg_street_width_m",
    "avg_bike_lanes",
    "avg_node_degree",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedRow {
    pub tract_id: String,
    /// [`AGG_FEATURE_NAMES`] order.
    pub features: Vec<f64>,
    pub centroid: PlanePoint,
    /// Count of severe accidents assigned to the tract.
    pub y: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub accident_id: String,
    pub tract_id: String,
    /// [`POINT_FEATURE_NAMES`] order.
    pub features: Vec<f64>,
    pub label: u8,
}

/// Coverage accounting for the table builders; the severe share is
/// reported at each stage because filtering can move it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub accidents_in: usize,
    pub accidents_assigned: usize,
    pub accidents_outside: usize,
    pub accidents_in_dropped_tracts: usize,
    pub tracts_in: usize,
    pub tracts_kept: usize,
    pub tracts_dropped_missing_features: usize,
    pub severe_share_input: f64,
    pub severe_share_assigned: f64,
}

/// 1 iff the record injured or killed anyone.
pub fn severity_label(rec: &AccidentRecord) -> u8 {
    u8::from(rec.injured + rec.killed >= 1)
}

/// `(hour 0-23, day of week 0-6 with Monday = 0)`.
pub fn temporal_features(timestamp: NaiveDateTime) -> (u32, u32) {
    (
        timestamp.hour(),
        timestamp.weekday().num_days_from_monday(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleCategory {
    Car,
    TwoWheeler,
    Truck,
    Bus,
    Taxi,
    Bicycle,
    Other,
}

impl VehicleCategory {
    /// Index into the one-hot block of [`POINT_FEATURE_NAMES`].
    pub fn one_hot_index(self) -> usize {
        match self {
            VehicleCategory::Car => 0,
            VehicleCategory::TwoWheeler => 1,
            VehicleCategory::Truck => 2,
            VehicleCategory::Bus => 3,
            VehicleCategory::Taxi => 4,
            VehicleCategory::Bicycle => 5,
            VehicleCategory::Other => 6,
        }
    }
}

/// Case-insensitive substring rules, checked in order; first hit wins.
/// Motorized two-wheelers are checked before bicycles so that
/// "MOTORBIKE" does not fall into the bicycle bucket.
pub const VEHICLE_KEYWORDS: &[(&str, VehicleCategory)] = &[
    ("MOTORCYCLE", VehicleCategory::TwoWheeler),
    ("MOTORBIKE", VehicleCategory::TwoWheeler),
    ("MOPED", VehicleCategory::TwoWheeler),
    ("SCOOTER", VehicleCategory::TwoWheeler),
    ("MINIBIKE", VehicleCategory::TwoWheeler),
    ("MINICYCLE", VehicleCategory::TwoWheeler),
    ("BUS", VehicleCategory::Bus),
    ("TAXI", VehicleCategory::Taxi),
    ("LIVERY", VehicleCategory::Taxi),
    ("LIMO", VehicleCategory::Taxi),
    ("TRUCK", VehicleCategory::Truck),
    ("VAN", VehicleCategory::Truck),
    ("PICK-UP", VehicleCategory::Truck),
    ("PICKUP", VehicleCategory::Truck),
    ("TRACTOR", VehicleCategory::Truck),
    ("TRAILER", VehicleCategory::Truck),
    ("FLAT BED", VehicleCategory::Truck),
    ("FLATBED", VehicleCategory::Truck),
    ("DUMP", VehicleCategory::Truck),
    ("DELIVER", VehicleCategory::Truck),
    ("TOW", VehicleCategory::Truck),
    ("BICYCLE", VehicleCategory::Bicycle),
    ("BIKE", VehicleCategory::Bicycle),
    ("PEDICAB", VehicleCategory::Bicycle),
    ("SEDAN", VehicleCategory::Car),
    ("WAGON", VehicleCategory::Car),
    ("SUV", VehicleCategory::Car),
    ("SPORT UTILITY", VehicleCategory::Car),
    ("PASSENGER", VehicleCategory::Car),
    ("CONVERTIBLE", VehicleCategory::Car),
    ("COUPE", VehicleCategory::Car),
    ("HATCH", VehicleCategory::Car),
    ("CAR", VehicleCategory::Car),
];

/// Map a raw vehicle-type string onto one of the seven categories.
pub fn vehicle_category(raw: &str) -> VehicleCategory {
    let upper = raw.to_uppercase();
    for (keyword, category) in VEHICLE_KEYWORDS {
        if upper.contains(keyword) {
            return *category;
        }
    }
    VehicleCategory::Other
}

/// Uniform grid over tract bounding boxes for point-to-tract assignment.
struct TractIndex<'a> {
    tracts: &'a [CensusTract],
    order: Vec<usize>,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
    min: GeoPoint,
    inv_cell: f64,
}

impl<'a> TractIndex<'a> {
    fn build(tracts: &'a [CensusTract]) -> Self {
        let mut min = GeoPoint {
            lon: f64::INFINITY,
            lat: f64::INFINITY,
        };
        let mut max = GeoPoint {
            lon: f64::NEG_INFINITY,
            lat: f64::NEG_INFINITY,
        };
        let bboxes: Vec<(GeoPoint, GeoPoint)> = tracts
            .iter()
            .map(|t| {
                let mut lo = GeoPoint {
                    lon: f64::INFINITY,
                    lat: f64::INFINITY,
                };
                let mut hi = GeoPoint {
                    lon: f64::NEG_INFINITY,
                    lat: f64::NEG_INFINITY,
                };
                for part in &t.geometry {
                    let (a, b) = part.bbox();
                    lo.lon = lo.lon.min(a.lon);
                    lo.lat = lo.lat.min(a.lat);
                    hi.lon = hi.lon.max(b.lon);
                    hi.lat = hi.lat.max(b.lat);
                }
                min.lon = min.lon.min(lo.lon);
                min.lat = min.lat.min(lo.lat);
                max.lon = max.lon.max(hi.lon);
                max.lat = max.lat.max(hi.lat);
                (lo, hi)
            })
            .collect();

        let span = (max.lon - min.lon).max(max.lat - min.lat).max(1e-9);
        let grid = (tracts.len() as f64).sqrt().ceil().max(1.0);
        let inv_cell = grid / span;

        // assignment ties break by lowest tract id
        let mut order: Vec<usize> = (0..tracts.len()).collect();
        order.sort_by(|&a, &b| tracts[a].tract_id.cmp(&tracts[b].tract_id));

        let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for (idx, (lo, hi)) in bboxes.iter().enumerate() {
            let (cx0, cy0) = Self::cell_raw(min, inv_cell, *lo);
            let (cx1, cy1) = Self::cell_raw(min, inv_cell, *hi);
            for cx in cx0..=cx1 {
                for cy in cy0..=cy1 {
                    cells.entry((cx, cy)).or_default().push(idx);
                }
            }
        }
        TractIndex {
            tracts,
            order,
            cells,
            min,
            inv_cell,
        }
    }

    fn cell_raw(min: GeoPoint, inv_cell: f64, p: GeoPoint) -> (i64, i64) {
        (
            ((p.lon - min.lon) * inv_cell).floor() as i64,
            ((p.lat - min.lat) * inv_cell).floor() as i64,
        )
    }

    /// Containing tract with the lexicographically smallest id.
    fn assign(&self, p: GeoPoint) -> Option<usize> {
        let cell = Self::cell_raw(self.min, self.inv_cell, p);
        let candidates = self.cells.get(&cell)?;
        if candidates.len() == 1 {
            let idx = candidates[0];
            return self.tracts[idx].contains(p).then_some(idx);
        }
        self.order
            .iter()
            .copied()
            .filter(|idx| candidates.contains(idx))
            .find(|&idx| self.tracts[idx].contains(p))
    }
}

fn usable_features(summary: &TractNetworkSummary) -> Option<Vec<f64>> {
    if summary.empty_network {
        return None;
    }
    let complexity = summary.complexity;
    let width = summary.avg_street_width_m?;
    let bikes = summary.avg_bike_lanes?;
    let degree = summary.avg_node_degree;
    let features = vec![complexity, width, bikes, degree];
    features.iter().all(|v| v.is_finite()).then_some(features)
}

fn severe_share(labels: impl Iterator<Item = u8>) -> f64 {
    let (mut pos, mut total) = (0usize, 0usize);
    for l in labels {
        total += 1;
        pos += l as usize;
    }
    if total == 0 {
        0.0
    } else {
        pos as f64 / total as f64
    }
}

/// Build the tract-level regression table.
pub fn build_aggregated(
    accidents: &[AccidentRecord],
    tracts: &[CensusTract],
    summaries: &[TractNetworkSummary],
) -> Result<(Vec<AggregatedRow>, BuildReport)> {
    if tracts.is_empty() {
        return Err(Error::InvalidInput("no tracts".into()));
    }
    let summary_by_id: BTreeMap<&str, &TractNetworkSummary> =
        summaries.iter().map(|s| (s.tract_id.as_str(), s)).collect();

    let mut report = BuildReport {
        accidents_in: accidents.len(),
        tracts_in: tracts.len(),
        severe_share_input: severe_share(accidents.iter().map(severity_label)),
        ..Default::default()
    };

    let kept: Vec<(usize, Vec<f64>)> = tracts
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            summary_by_id
                .get(t.tract_id.as_str())
                .and_then(|s| usable_features(s))
                .map(|f| (i, f))
        })
        .collect();
    report.tracts_kept = kept.len();
    report.tracts_dropped_missing_features = tracts.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::InvalidInput(
            "no tract has a usable network summary".into(),
        ));
    }
    let kept_ids: std::collections::BTreeSet<usize> = kept.iter().map(|(i, _)| *i).collect();

    let index = TractIndex::build(tracts);
    let mut severe_counts: BTreeMap<usize, u32> = kept.iter().map(|(i, _)| (*i, 0)).collect();
    let mut assigned_labels = Vec::new();
    for rec in accidents {
        match index.assign(rec.location) {
            Some(t) if kept_ids.contains(&t) => {
                report.accidents_assigned += 1;
                let label = severity_label(rec);
                assigned_labels.push(label);
                *severe_counts.get_mut(&t).unwrap() += label as u32;
            }
            Some(_) => report.accidents_in_dropped_tracts += 1,
            None => report.accidents_outside += 1,
        }
    }
    report.severe_share_assigned = severe_share(assigned_labels.into_iter());

    // local plane around the mean of kept-tract centroids
    let reference = {
        let n = kept.len() as f64;
        GeoPoint {
            lon: kept.iter().map(|(i, _)| tracts[*i].centroid.lon).sum::<f64>() / n,
            lat: kept.iter().map(|(i, _)| tracts[*i].centroid.lat).sum::<f64>() / n,
        }
    };
    let centroids: Vec<GeoPoint> = kept.iter().map(|(i, _)| tracts[*i].centroid).collect();
    let plane = project_local(&centroids, reference);

    let rows = kept
        .into_iter()
        .zip(plane)
        .map(|((i, features), centroid)| AggregatedRow {
            tract_id: tracts[i].tract_id.clone(),
            features,
            centroid,
            y: severe_counts[&i],
        })
        .collect();
    Ok((rows, report))
}

/// Build the point-level classification table. Order follows the input
/// accident order.
pub fn build_point(
    accidents: &[AccidentRecord],
    tracts: &[CensusTract],
    summaries: &[TractNetworkSummary],
) -> Result<(Vec<PointRow>, BuildReport)> {
    if tracts.is_empty() {
        return Err(Error::InvalidInput("no tracts".into()));
    }
    let summary_by_id: BTreeMap<&str, &TractNetworkSummary> =
        summaries.iter().map(|s| (s.tract_id.as_str(), s)).collect();
    let tract_features: BTreeMap<usize, Vec<f64>> = tracts
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            summary_by_id
                .get(t.tract_id.as_str())
                .and_then(|s| usable_features(s))
                .map(|f| (i, f))
        })
        .collect();

    let mut report = BuildReport {
        accidents_in: accidents.len(),
        tracts_in: tracts.len(),
        tracts_kept: tract_features.len(),
        tracts_dropped_missing_features: tracts.len() - tract_features.len(),
        severe_share_input: severe_share(accidents.iter().map(severity_label)),
        ..Default::default()
    };

    let index = TractIndex::build(tracts);
    let mut rows = Vec::new();
    for rec in accidents {
        let tract_idx = match index.assign(rec.location) {
            Some(t) => t,
            None => {
                report.accidents_outside += 1;
                continue;
            }
        };
        let Some(tract_feats) = tract_features.get(&tract_idx) else {
            report.accidents_in_dropped_tracts += 1;
            continue;
        };
        report.accidents_assigned += 1;

        let (hour, dow) = temporal_features(rec.timestamp);
        let mut features = vec![0.0; POINT_FEATURE_NAMES.len()];
        features[0] = hour as f64;
        features[1] = dow as f64;
        if rec.vehicle_types.is_empty() {
            features[2 + VehicleCategory::Other.one_hot_index()] = 1.0;
        } else {
            for raw in &rec.vehicle_types {
                features[2 + vehicle_category(raw).one_hot_index()] = 1.0;
            }
        }
        features[9..13].copy_from_slice(tract_feats);

        rows.push(PointRow {
            accident_id: rec.id.clone(),
            tract_id: tracts[tract_idx].tract_id.clone(),
            features,
            label: severity_label(rec),
        });
    }
    report.severe_share_assigned = severe_share(rows.iter().map(|r| r.label));
    Ok((rows, report))
}

/// Fixed-order CSV export for the aggregated table.
pub fn write_aggregated_csv<W: Write>(rows: &[AggregatedRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["tract_id".to_string()];
    header.extend(AGG_FEATURE_NAMES.iter().map(|s| s.to_string()));
    header.extend(["centroid_x".into(), "centroid_y".into(), "y".into()]);
    out.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.tract_id.clone()];
        rec.extend(row.features.iter().map(|v| format!("{v}")));
        rec.push(format!("{}", row.centroid.x));
        rec.push(format!("{}", row.centroid.y));
        rec.push(row.y.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_aggregated_csv<R: Read>(reader: R) -> Result<Vec<AggregatedRow>> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv_reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_col = col("tract_id")?;
    let feat_cols = AGG_FEATURE_NAMES
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>>>()?;
    let (cx, cy, y_col) = (col("centroid_x")?, col("centroid_y")?, col("y")?);
    let mut rows = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        let rec = rec?;
        let parse = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::BadRow {
                    row: i + 1,
                    reason: "bad_number".into(),
                })
        };
        rows.push(AggregatedRow {
            tract_id: rec.get(id_col).unwrap_or("").to_string(),
            features: feat_cols.iter().map(|&c| parse(c)).collect::<Result<_>>()?,
            centroid: PlanePoint {
                x: parse(cx)?,
                y: parse(cy)?,
            },
            y: rec
                .get(y_col)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::BadRow {
                    row: i + 1,
                    reason: "bad_count".into(),
                })?,
        });
    }
    Ok(rows)
}

/// Fixed-order CSV export for the point table.
pub fn write_point_csv<W: Write>(rows: &[PointRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["accident_id".to_string(), "tract_id".to_string()];
    header.extend(POINT_FEATURE_NAMES.iter().map(|s| s.to_string()));
    header.push("label".into());
    out.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.accident_id.clone(), row.tract_id.clone()];
        rec.extend(row.features.iter().map(|v| format!("{v}")));
        rec.push(row.label.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_point_csv<R: Read>(reader: R) -> Result<Vec<PointRow>> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv_reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let aid = col("accident_id")?;
    let tid = col("tract_id")?;
    let feat_cols = POINT_FEATURE_NAMES
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>>>()?;
    let label_col = col("label")?;
    let mut rows = Vec::new();
    for (i, rec) in csv_reader.records().enumerate() {
        let rec = rec?;
        rows.push(PointRow {
            accident_id: rec.get(aid).unwrap_or("").to_string(),
            tract_id: rec.get(tid).unwrap_or("").to_string(),
            features: feat_cols
                .iter()
                .map(|&c| {
                    rec.get(c).unwrap_or("").parse().map_err(|_| Error::BadRow {
                        row: i + 1,
                        reason: "bad_number".into(),
                    })
                })
                .collect::<Result<_>>()?,
            label: rec
                .get(label_col)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::BadRow {
                    row: i + 1,
                    reason: "bad_label".into(),
                })?,
        });
    }
    Ok(rows)
}
