//! Accident-record CSV parser.
//!
//! Canonical schema (comma-separated, RFC-4180 quoting, header required):
//!
//! ```text
//! id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
//! ```
//!
//! `date` is `YYYY-MM-DD`, `time` is `HH:MM` local civil time. Empty
//! vehicle cells are allowed. `(0,0)` coordinates are treated as a
//! sentinel for "unknown location" and rejected.

use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::ingest::IngestReport;

pub const ACCIDENT_CSV_HEADER: [&str; 12] = [
    "id", "date", "time", "lon", "lat", "vehicle1", "vehicle2", "vehicle3", "vehicle4",
    "vehicle5", "injured", "killed",
];

/// One collision event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccidentRecord {
    pub id: String,
    pub location: GeoPoint,
    pub timestamp: NaiveDateTime,
    pub vehicle_types: Vec<String>,
    pub injured: u32,
    pub killed: u32,
}

struct ColumnIndex {
    id: usize,
    date: usize,
    time: usize,
    lon: usize,
    lat: usize,
    vehicles: Vec<usize>,
    injured: usize,
    killed: usize,
}

fn find_column(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|c| c.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

impl ColumnIndex {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        Ok(ColumnIndex {
            id: find_column(header, "id")?,
            date: find_column(header, "date")?,
            time: find_column(header, "time")?,
            lon: find_column(header, "lon")?,
            lat: find_column(header, "lat")?,
            vehicles: (1..=5)
                .filter_map(|i| {
                    header
                        .iter()
                        .position(|c| c.trim().eq_ignore_ascii_case(&format!("vehicle{i}")))
                })
                .collect(),
            injured: find_column(header, "injured")?,
            killed: find_column(header, "killed")?,
        })
    }
}

fn field<'a>(rec: &'a csv::StringRecord, idx: usize) -> &'a str {
    rec.get(idx).unwrap_or("").trim()
}

fn parse_count(raw: &str) -> std::result::Result<u32, &'static str> {
    let v: i64 = raw.parse().map_err(|_| "bad_count")?;
    if v < 0 {
        return Err("negative_count");
    }
    u32::try_from(v).map_err(|_| "bad_count")
}

fn parse_row(rec: &csv::StringRecord, cols: &ColumnIndex) -> std::result::Result<AccidentRecord, &'static str> {
    let lon_raw = field(rec, cols.lon);
    let lat_raw = field(rec, cols.lat);
    if lon_raw.is_empty() || lat_raw.is_empty() {
        return Err("missing_coordinates");
    }
    let lon: f64 = lon_raw.parse().map_err(|_| "invalid_coordinates")?;
    let lat: f64 = lat_raw.parse().map_err(|_| "invalid_coordinates")?;
    if lon == 0.0 && lat == 0.0 {
        return Err("zero_coordinates");
    }
    let location = GeoPoint::new(lon, lat).map_err(|_| "invalid_coordinates")?;

    let date = NaiveDate::parse_from_str(field(rec, cols.date), "%Y-%m-%d")
        .map_err(|_| "bad_timestamp")?;
    let time =
        NaiveTime::parse_from_str(field(rec, cols.time), "%H:%M").map_err(|_| "bad_timestamp")?;
    let timestamp = NaiveDateTime::new(date, time);

    let injured = parse_count(field(rec, cols.injured))?;
    let killed = parse_count(field(rec, cols.killed))?;

    let vehicle_types = cols
        .vehicles
        .iter()
        .map(|&i| field(rec, i))
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();

    Ok(AccidentRecord {
        id: field(rec, cols.id).to_string(),
        location,
        timestamp,
        vehicle_types,
        injured,
        killed,
    })
}

/// Parse the canonical accident CSV. Row numbers in strict-mode errors are
/// 1-based over data rows (the header is row 0).
pub fn parse_accidents<R: Read>(
    reader: R,
    strict: bool,
) -> Result<(Vec<AccidentRecord>, IngestReport)> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let cols = ColumnIndex::from_header(csv_reader.headers()?)?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for (i, row) in csv_reader.records().enumerate() {
        let row = row?;
        match parse_row(&row, &cols) {
            Ok(rec) => {
                report.accept();
                records.push(rec);
            }
            Err(reason) => {
                if strict {
                    return Err(Error::BadRow {
                        row: i + 1,
                        reason: reason.to_string(),
                    });
                }
                report.reject(reason);
            }
        }
    }
    Ok((records, report))
}

/// Serialize records back to the canonical CSV (round-trips with
/// [`parse_accidents`]).
pub fn write_accidents_csv<W: Write>(records: &[AccidentRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(ACCIDENT_CSV_HEADER)?;
    for rec in records {
        let mut vehicles = [""; 5];
        for (slot, v) in vehicles.iter_mut().zip(rec.vehicle_types.iter()) {
            *slot = v;
        }
        out.write_record([
            rec.id.as_str(),
            &rec.timestamp.date().format("%Y-%m-%d").to_string(),
            &rec.timestamp.time().format("%H:%M").to_string(),
            &format!("{}", rec.location.lon),
            &format!("{}", rec.location.lat),
            vehicles[0],
            vehicles[1],
            vehicles[2],
            vehicles[3],
            vehicles[4],
            &rec.injured.to_string(),
            &rec.killed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL_FORMED: &str = "\
id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
a1,2019-05-14,18:35,-73.9,40.7,SEDAN,,,,,1,0
a2,2019-05-14,03:10,-73.8,40.6,TAXI,BICYCLE,,,,0,0
a3,2019-05-15,23:59,-73.7,40.8,,,,,,2,1
";

    #[test]
    fn parses_well_formed_file() {
        let (recs, report) = parse_accidents(WELL_FORMED.as_bytes(), false).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(report.rows_read, 3);
        assert_eq!(report.rows_rejected, 0);
        assert_eq!(recs[0].vehicle_types, vec!["SEDAN"]);
        assert_eq!(recs[1].vehicle_types, vec!["TAXI", "BICYCLE"]);
        assert!(recs[2].vehicle_types.is_empty());
        assert_eq!(recs[2].injured, 2);
        assert_eq!(recs[2].killed, 1);
    }

    #[test]
    fn rejects_missing_coordinates_leniently() {
        let data = "\
id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
a1,2019-05-14,18:35,,,SEDAN,,,,,1,0
";
        let (recs, report) = parse_accidents(data.as_bytes(), false).unwrap();
        assert!(recs.is_empty());
        assert_eq!(report.rows_rejected, 1);
        assert_eq!(report.rejection_reasons.get("missing_coordinates"), Some(&1));
    }

    #[test]
    fn rejects_negative_counts() {
        let data = "\
id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
a1,2019-05-14,18:35,-73.9,40.7,SEDAN,,,,,-1,0
";
        let (_, report) = parse_accidents(data.as_bytes(), false).unwrap();
        assert_eq!(report.rejection_reasons.get("negative_count"), Some(&1));
    }

    #[test]
    fn rejects_zero_coordinate_sentinel() {
        let data = "\
id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
a1,2019-05-14,18:35,0,0,SEDAN,,,,,1,0
";
        let (_, report) = parse_accidents(data.as_bytes(), false).unwrap();
        assert_eq!(report.rejection_reasons.get("zero_coordinates"), Some(&1));
    }

    #[test]
    fn strict_mode_is_fatal_with_row_number() {
        let data = "\
id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed
a1,2019-05-14,18:35,-73.9,40.7,SEDAN,,,,,1,0
a2,2019-05-14,xx:35,-73.9,40.7,SEDAN,,,,,1,0
";
        let err = parse_accidents(data.as_bytes(), true).unwrap_err();
        match err {
            Error::BadRow { row, reason } => {
                assert_eq!(row, 2);
                assert_eq!(reason, "bad_timestamp");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_fatal() {
        let data = "id,date,time,lon,vehicle1,injured,killed\n";
        let err = parse_accidents(data.as_bytes(), false).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "lat"));
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let (recs, _) = parse_accidents(WELL_FORMED.as_bytes(), false).unwrap();
        let mut buf = Vec::new();
        write_accidents_csv(&recs, &mut buf).unwrap();
        let (again, report) = parse_accidents(buf.as_slice(), true).unwrap();
        assert_eq!(recs, again);
        assert_eq!(report.rows_ok, 3);
    }

    #[test]
    fn counts_are_exact_under_corruption() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(5);
        let mut data = String::from(
            "id,date,time,lon,lat,vehicle1,vehicle2,vehicle3,vehicle4,vehicle5,injured,killed\n",
        );
        let n = 300;
        for i in 0..n {
            if rng.gen_bool(0.3) {
                // corrupted row, one of several flavors
                match rng.gen_range(0..4) {
                    0 => data.push_str(&format!("b{i},2019-01-01,10:00,,40.7,,,,,,1,0\n")),
                    1 => data.push_str(&format!("b{i},2019-13-01,10:00,-73.9,40.7,,,,,,1,0\n")),
                    2 => data.push_str(&format!("b{i},2019-01-01,10:00,-73.9,40.7,,,,,,-3,0\n")),
                    _ => data.push_str(&format!("b{i},2019-01-01,10:00,oops,40.7,,,,,,1,0\n")),
                }
            } else {
                data.push_str(&format!("g{i},2019-01-01,10:00,-73.9,40.7,,,,,,1,0\n"));
            }
        }
        let (recs, report) = parse_accidents(data.as_bytes(), false).unwrap();
        assert_eq!(report.rows_read, n);
        assert_eq!(report.rows_ok + report.rows_rejected, report.rows_read);
        assert_eq!(recs.len() as u64, report.rows_ok);
    }
}
