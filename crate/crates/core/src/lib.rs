//! Accident-severity modeling over street networks.
//!
//! The crate covers the full path from raw files to fitted models:
//!
//! * [`geo`] — points, polygons, great-circle distance, local projection.
//! * [`ingest`] — parsers for accident CSV, tract GeoJSON, and the
//!   node/edge street-network CSV pair, with row-level error accounting.
//! * [`spatial`] — queen-contiguity weights, Local Moran's I, and
//!   conditional-permutation inference with HH/LL/HL/LH cluster labels.
//! * [`netmetrics`] — per-tract street-network summaries (intersections,
//!   circuity, complexity, width/bike-lane/degree averages).
//! * [`features`] — the two model-ready tables (tract regression and
//!   point classification) plus SMOTE oversampling.
//! * [`learners`] — CART trees, gradient boosting, random forest,
//!   logistic regression, and Gaussian-process regression.
//! * [`eval`] — R², ROC/AUC, and deterministic k-fold plans.
//! * [`pipeline`] — the two end-to-end experiments, a synthetic-data
//!   generator, and model persistence.
//!
//! Everything downstream of a seed is deterministic, including under
//! parallel execution: per-unit / per-fold / per-tree RNG streams are
//! derived from the master seed, never from scheduling order.

pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod learners;
pub mod netmetrics;
pub mod pipeline;
pub mod rng;
pub mod spatial;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use features::{AggregatedRow, PointRow, SmoteConfig};
pub use geo::{GeoPoint, PlanePoint, PolygonGeom};
pub use ingest::{AccidentRecord, CensusTract, IngestReport, StreetNetwork};
pub use learners::{ForestModel, GbmModel, GpModel, ImportanceReport, LinearModel};
pub use netmetrics::TractNetworkSummary;
pub use spatial::{MoranResult, SpatialWeights};
