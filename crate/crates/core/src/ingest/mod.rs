//! Parsers and validators for the three input datasets.
//!
//! Lenient mode (the default) rejects bad rows and counts them instead of
//! aborting; strict mode turns the first rejection into a fatal error.
//! Missing required columns are always fatal. Counts satisfy
//! `rows_ok + rows_rejected = rows_read` exactly.

mod accidents;
mod network;
mod tracts;

pub use accidents::{parse_accidents, write_accidents_csv, AccidentRecord, ACCIDENT_CSV_HEADER};
pub use network::{parse_network, Edge, StreetNetwork};
pub use tracts::{parse_tracts, tracts_to_geojson, CensusTract};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Row-level accounting for one parse pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_ok: u64,
    pub rows_rejected: u64,
    pub rejection_reasons: BTreeMap<String, u64>,
}

impl IngestReport {
    pub fn accept(&mut self) {
        self.rows_read += 1;
        self.rows_ok += 1;
    }

    pub fn reject(&mut self, reason: &str) {
        self.rows_read += 1;
        self.rows_rejected += 1;
        *self.rejection_reasons.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &IngestReport) {
        self.rows_read += other.rows_read;
        self.rows_ok += other.rows_ok;
        self.rows_rejected += other.rows_rejected;
        for (reason, count) in &other.rejection_reasons {
            *self.rejection_reasons.entry(reason.clone()).or_insert(0) += count;
        }
    }
}
