//! Queen-contiguity weights and Local Moran's I with permutation inference.
//!
//! The statistic for unit `j` is
//!
//! ```text
//! I_j = (n-1) * (y_j - ybar) / sum_{k!=j} w_jk (y_k - ybar)^2
//!                            * sum_{k!=j} w_jk (y_k - ybar)
//! ```
//!
//! with binary queen weights. Note the weighted denominator: it normalizes
//! by the *neighbors'* squared deviations, not the usual global variance.
//! [`MoranVariant::Conventional`] switches to the standard
//! `m2 = sum_k (y_k - ybar)^2 / (n-1)` normalization for cross-checks.
//!
//! Significance uses conditional permutation: `y_j` stays fixed while the
//! remaining values are redrawn onto its neighbor positions. Pseudo
//! p-values are two-sided. Per-unit RNG streams are derived from the seed
//! and the unit's *content* (its value and neighbor values), so results
//! are independent of thread schedule and consistent under unit
//! reordering.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::GeoPoint;
use crate::ingest::CensusTract;
use crate::rng;

/// Sparse binary queen-contiguity neighbor structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialWeights {
    n: usize,
    neighbors: Vec<Vec<usize>>,
}

impl SpatialWeights {
    /// Build from per-unit neighbor lists, enforcing symmetry and
    /// irreflexivity. Lists are sorted and deduplicated.
    pub fn from_neighbor_lists(mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        for (j, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&k| k == j) {
                return Err(Error::InvalidInput(format!("unit {j} is its own neighbor")));
            }
            if list.iter().any(|&k| k >= n) {
                return Err(Error::InvalidInput(format!(
                    "unit {j} has a neighbor index out of range"
                )));
            }
        }
        for j in 0..n {
            for &k in &neighbors[j] {
                if neighbors[k].binary_search(&j).is_err() {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric weights: {j} -> {k} but not {k} -> {j}"
                    )));
                }
            }
        }
        Ok(SpatialWeights { n, neighbors })
    }

    /// Queen contiguity on a rows x cols grid (8-neighborhood).
    pub fn grid_queen(rows: usize, cols: usize) -> Self {
        let n = rows * cols;
        let mut neighbors = vec![Vec::new(); n];
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                let j = (r * cols as i64 + c) as usize;
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (r + dr, c + dc);
                        if nr >= 0 && nc >= 0 && nr < rows as i64 && nc < cols as i64 {
                            neighbors[j].push((nr * cols as i64 + nc) as usize);
                        }
                    }
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        SpatialWeights { n, neighbors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    pub fn is_isolated(&self, j: usize) -> bool {
        self.neighbors[j].is_empty()
    }
}

/// Which Moran denominator to use; `Paper` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoranVariant {
    #[default]
    Paper,
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClusterLabel {
    #[serde(rename = "HH")]
    HighHigh,
    #[serde(rename = "LL")]
    LowLow,
    #[serde(rename = "HL")]
    HighLow,
    #[serde(rename = "LH")]
    LowHigh,
    NotSignificant,
    Isolated,
}

impl std::fmt::Display for ClusterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClusterLabel::HighHigh => "HH",
            ClusterLabel::LowLow => "LL",
            ClusterLabel::HighLow => "HL",
            ClusterLabel::LowHigh => "LH",
            ClusterLabel::NotSignificant => "NotSignificant",
            ClusterLabel::Isolated => "Isolated",
        };
        f.write_str(s)
    }
}

/// Per-unit statistic, pseudo p-value, and cluster label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoranResult {
    /// `None` marks an undefined statistic (no neighbors, or all neighbor
    /// deviations zero).
    pub i_values: Vec<Option<f64>>,
    pub p_values: Vec<f64>,
    pub clusters: Vec<ClusterLabel>,
}

fn validate_y(y: &[f64], w: &SpatialWeights) -> Result<f64> {
    if y.len() != w.n() {
        return Err(Error::LengthMismatch {
            expected: w.n(),
            got: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 units".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in y".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::ZeroVariance);
    }
    Ok(mean)
}

/// Statistic for one unit given its own deviation and neighbor deviations.
fn moran_stat(
    n: usize,
    dev_j: f64,
    neighbor_devs: impl Iterator<Item = f64>,
    variant: MoranVariant,
    m2: f64,
) -> Option<f64> {
    let mut any = false;
    let (mut denom, mut sum) = (0.0, 0.0);
    for d in neighbor_devs {
        any = true;
        denom += d * d;
        sum += d;
    }
    if !any {
        return None;
    }
    match variant {
        MoranVariant::Paper => {
            if denom == 0.0 {
                None
            } else {
                Some((n as f64 - 1.0) * dev_j / denom * sum)
            }
        }
        MoranVariant::Conventional => Some(dev_j / m2 * sum),
    }
}

/// Local Moran's I per unit. `None` entries mark undefined statistics.
pub fn local_morans_i(
    y: &[f64],
    w: &SpatialWeights,
    variant: MoranVariant,
) -> Result<Vec<Option<f64>>> {
    let mean = validate_y(y, w)?;
    let n = w.n();
    let m2 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    Ok((0..n)
        .map(|j| {
            moran_stat(
                n,
                y[j] - mean,
                w.neighbors(j).iter().map(|&k| y[k] - mean),
                variant,
                m2,
            )
        })
        .collect())
}

/// Stable content hash so per-unit RNG streams survive unit reordering.
fn unit_stream_id(y_j: f64, neighbor_values: &[f64]) -> u64 {
    let mut sorted: Vec<u64> = neighbor_values.iter().map(|v| v.to_bits()).collect();
    sorted.sort_unstable();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
    };
    feed(y_j.to_bits());
    for bits in sorted {
        feed(bits);
    }
    h
}

/// Conditional-permutation inference for Local Moran's I.
///
/// For each unit the remaining values are resampled (without replacement)
/// onto its neighbor positions `n_perm` times; the two-sided pseudo
/// p-value is `(#{|I_perm| >= |I_obs|} + 1) / (n_perm + 1)`. Cluster
/// labels are assigned only when `p <= alpha`.
pub fn moran_permutation(
    y: &[f64],
    w: &SpatialWeights,
    n_perm: usize,
    seed: u64,
    alpha: f64,
    variant: MoranVariant,
) -> Result<MoranResult> {
    if n_perm < 99 {
        return Err(Error::InvalidInput(format!(
            "n_perm must be >= 99, got {n_perm}"
        )));
    }
    let mean = validate_y(y, w)?;
    let n = w.n();
    let m2 = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let i_obs = local_morans_i(y, w, variant)?;

    // sorted pool of all values; each unit removes one copy of its own
    let mut sorted_values = y.to_vec();
    sorted_values.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let per_unit: Vec<(f64, ClusterLabel)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let neighbors = w.neighbors(j);
            if neighbors.is_empty() {
                return (1.0, ClusterLabel::Isolated);
            }
            let observed = match i_obs[j] {
                Some(v) => v,
                None => return (1.0, ClusterLabel::NotSignificant),
            };
            let q = neighbors.len();
            let dev_j = y[j] - mean;

            // pool = sorted values minus one occurrence of y[j]
            let mut pool = sorted_values.clone();
            let pos = pool
                .binary_search_by(|v| v.partial_cmp(&y[j]).unwrap())
                .unwrap_or_else(|p| p);
            pool.remove(pos.min(pool.len() - 1));

            let neighbor_values: Vec<f64> = neighbors.iter().map(|&k| y[k]).collect();
            let mut rng = rng::stream_rng(seed, unit_stream_id(y[j], &neighbor_values));

            let m = pool.len();
            let mut exceed = 0usize;
            let mut draw = vec![0.0; q];
            for _ in 0..n_perm {
                // partial Fisher-Yates: first q entries of a fresh shuffle
                for (slot, item) in draw.iter_mut().enumerate().take(q) {
                    let pick = rng.gen_range(slot..m);
                    pool.swap(slot, pick);
                    *item = pool[slot];
                }
                let perm_stat = moran_stat(
                    n,
                    dev_j,
                    draw.iter().map(|v| v - mean),
                    variant,
                    m2,
                );
                if let Some(stat) = perm_stat {
                    if stat.abs() >= observed.abs() {
                        exceed += 1;
                    }
                }
            }
            let p = (exceed as f64 + 1.0) / (n_perm as f64 + 1.0);
            let label = if p <= alpha {
                let neighbor_mean_dev =
                    neighbor_values.iter().map(|v| v - mean).sum::<f64>() / q as f64;
                match (dev_j >= 0.0, neighbor_mean_dev >= 0.0) {
                    (true, true) => ClusterLabel::HighHigh,
                    (false, false) => ClusterLabel::LowLow,
                    (true, false) => ClusterLabel::HighLow,
                    (false, true) => ClusterLabel::LowHigh,
                }
            } else {
                ClusterLabel::NotSignificant
            };
            (p, label)
        })
        .collect();

    Ok(MoranResult {
        i_values: i_obs,
        p_values: per_unit.iter().map(|(p, _)| *p).collect(),
        clusters: per_unit.into_iter().map(|(_, c)| c).collect(),
    })
}

/// Planar meters between two lon/lat points at city scale.
fn approx_meters(a: GeoPoint, b: GeoPoint, cos_lat: f64) -> f64 {
    let dx = (a.lon - b.lon).to_radians() * cos_lat * crate::geo::EARTH_RADIUS_M;
    let dy = (a.lat - b.lat).to_radians() * crate::geo::EARTH_RADIUS_M;
    (dx * dx + dy * dy).sqrt()
}

fn segment_distance_m(p: GeoPoint, a: GeoPoint, b: GeoPoint, cos_lat: f64) -> f64 {
    let scale = crate::geo::EARTH_RADIUS_M.to_radians();
    let (ax, ay) = (a.lon * scale * cos_lat, a.lat * scale);
    let (bx, by) = (b.lon * scale * cos_lat, b.lat * scale);
    let (px, py) = (p.lon * scale * cos_lat, p.lat * scale);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (px - (ax + t * dx), py - (ay + t * dy));
    (ex * ex + ey * ey).sqrt()
}

/// Queen contiguity over tract polygons: units are neighbors iff their
/// boundaries share at least one point (vertex or edge interior) after
/// snapping within `snap_tol_m` meters.
pub fn queen_contiguity(tracts: &[CensusTract], snap_tol_m: f64) -> Result<SpatialWeights> {
    if tracts.is_empty() {
        return Err(Error::InvalidInput("no tracts".into()));
    }
    let n = tracts.len();
    let mean_lat = tracts.iter().map(|t| t.centroid.lat).sum::<f64>() / n as f64;
    let cos_lat = mean_lat.to_radians().cos().max(1e-6);
    let tol = snap_tol_m.max(1e-9);

    // degree-sized snap cells, lon axis corrected for latitude
    let cell_lat = tol / crate::geo::EARTH_RADIUS_M.to_radians();
    let cell_lon = cell_lat / cos_lat;
    let cell_of = |p: &GeoPoint| {
        (
            (p.lon / cell_lon).floor() as i64,
            (p.lat / cell_lat).floor() as i64,
        )
    };

    let mut vertex_cells: HashMap<(i64, i64), Vec<(usize, GeoPoint)>> = HashMap::new();
    for (idx, tract) in tracts.iter().enumerate() {
        for part in &tract.geometry {
            for v in part.vertices() {
                vertex_cells.entry(cell_of(v)).or_default().push((idx, *v));
            }
        }
    }

    let mut adjacency: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let mut connect = |a: usize, b: usize, adj: &mut Vec<HashSet<usize>>| {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    };

    // shared (snapped) vertices
    for ((cx, cy), members) in &vertex_cells {
        for &(idx_a, pa) in members {
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(others) = vertex_cells.get(&(cx + dx, cy + dy)) {
                        for &(idx_b, pb) in others {
                            if idx_a < idx_b && approx_meters(pa, pb, cos_lat) <= tol {
                                connect(idx_a, idx_b, &mut adjacency);
                            }
                        }
                    }
                }
            }
        }
    }

    // T-junctions: a vertex of one tract lying on another tract's edge.
    // Candidate pairs come from overlapping (tolerance-expanded) bboxes.
    let bboxes: Vec<(GeoPoint, GeoPoint)> = tracts
        .iter()
        .map(|t| {
            let mut min = GeoPoint {
                lon: f64::INFINITY,
                lat: f64::INFINITY,
            };
            let mut max = GeoPoint {
                lon: f64::NEG_INFINITY,
                lat: f64::NEG_INFINITY,
            };
            for part in &t.geometry {
                let (lo, hi) = part.bbox();
                min.lon = min.lon.min(lo.lon);
                min.lat = min.lat.min(lo.lat);
                max.lon = max.lon.max(hi.lon);
                max.lat = max.lat.max(hi.lat);
            }
            (min, max)
        })
        .collect();
    let pad_lon = cell_lon;
    let pad_lat = cell_lat;
    let boxes_overlap = |a: usize, b: usize| {
        let (amin, amax) = bboxes[a];
        let (bmin, bmax) = bboxes[b];
        amin.lon - pad_lon <= bmax.lon
            && bmin.lon - pad_lon <= amax.lon
            && amin.lat - pad_lat <= bmax.lat
            && bmin.lat - pad_lat <= amax.lat
    };

    let vertex_on_edge = |a: usize, b: usize| {
        let segs: Vec<(GeoPoint, GeoPoint)> = tracts[b]
            .geometry
            .iter()
            .flat_map(|p| p.segments())
            .collect();
        tracts[a].geometry.iter().any(|part| {
            part.vertices().any(|v| {
                segs.iter().any(|(s, e)| {
                    // cheap bbox reject before the exact distance
                    v.lon >= s.lon.min(e.lon) - pad_lon
                        && v.lon <= s.lon.max(e.lon) + pad_lon
                        && v.lat >= s.lat.min(e.lat) - pad_lat
                        && v.lat <= s.lat.max(e.lat) + pad_lat
                        && segment_distance_m(*v, *s, *e, cos_lat) <= tol
                })
            })
        })
    };

    for a in 0..n {
        for b in (a + 1)..n {
            if adjacency[a].contains(&b) || !boxes_overlap(a, b) {
                continue;
            }
            if vertex_on_edge(a, b) || vertex_on_edge(b, a) {
                connect(a, b, &mut adjacency);
            }
        }
    }

    let neighbors = adjacency
        .into_iter()
        .map(|set| {
            let mut v: Vec<usize> = set.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(SpatialWeights {
        n,
        neighbors,
    })
}

/// FeatureCollection with per-tract `I`, `p_value`, and `cluster`
/// properties (`I` is null where undefined).
pub fn moran_geojson(tracts: &[CensusTract], result: &MoranResult) -> Value {
    let props: Vec<Value> = (0..tracts.len())
        .map(|j| {
            json!({
                "I": result.i_values[j],
                "p_value": result.p_values[j],
                "cluster": result.clusters[j].to_string(),
            })
        })
        .collect();
    crate::ingest::tracts_to_geojson(tracts, &props)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::PolygonGeom;

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint { lon, lat }
    }

    fn square_tract(id: &str, x0: f64, y0: f64, side: f64) -> CensusTract {
        CensusTract::new(
            id.to_string(),
            vec![PolygonGeom::new(
                vec![
                    pt(x0, y0),
                    pt(x0 + side, y0),
                    pt(x0 + side, y0 + side),
                    pt(x0, y0 + side),
                ],
                vec![],
            )
            .unwrap()],
        )
        .unwrap()
    }

    fn line3_weights() -> SpatialWeights {
        SpatialWeights::from_neighbor_lists(vec![vec![1], vec![0, 2], vec![1]]).unwrap()
    }

    #[test]
    fn neighbor_list_validation() {
        assert!(SpatialWeights::from_neighbor_lists(vec![vec![0]]).is_err());
        assert!(SpatialWeights::from_neighbor_lists(vec![vec![1], vec![]]).is_err());
        assert!(SpatialWeights::from_neighbor_lists(vec![vec![1], vec![0]]).is_ok());
    }

    #[test]
    fn queen_shared_edge_and_corner() {
        let s = 0.01;
        let tracts = vec![
            square_tract("a", 0.0, 0.0, s),
            square_tract("b", s, 0.0, s),    // shares full edge with a
            square_tract("c", s, s, s),      // corner-touches a, edge-shares b
            square_tract("d", 0.5, 0.5, s),  // far away
        ];
        let w = queen_contiguity(&tracts, 0.5).unwrap();
        assert_eq!(w.neighbors(0), &[1, 2]);
        assert_eq!(w.neighbors(1), &[0, 2]);
        assert_eq!(w.neighbors(2), &[0, 1]);
        assert!(w.is_isolated(3));
    }

    #[test]
    fn queen_t_junction_vertex_on_edge_interior() {
        let s = 0.01;
        // b sits on top of a but shifted half a side: b's corner lies in
        // the interior of a's top edge, with no shared vertices
        let tracts = vec![
            square_tract("a", 0.0, 0.0, s),
            square_tract("b", s / 2.0, s, s),
        ];
        let w = queen_contiguity(&tracts, 0.5).unwrap();
        assert_eq!(w.neighbors(0), &[1]);
    }

    #[test]
    fn queen_snapping_bridges_small_gaps() {
        let s = 0.01;
        // 0.1 m gap between the squares: within the 0.5 m default snap
        let gap = 0.1 / crate::geo::EARTH_RADIUS_M.to_radians();
        let tracts = vec![
            square_tract("a", 0.0, 0.0, s),
            square_tract("b", s + gap, 0.0, s),
        ];
        let w = queen_contiguity(&tracts, 0.5).unwrap();
        assert_eq!(w.neighbors(0), &[1]);
        let w = queen_contiguity(&tracts, 0.01).unwrap();
        assert!(w.is_isolated(0));
    }

    #[test]
    fn moran_three_unit_line_hand_value() {
        // y = [1, 2, 4], ybar = 7/3
        // I_0 = 2 * (1 - 7/3) / (2 - 7/3)^2 * (2 - 7/3) = 8
        let w = line3_weights();
        let i = local_morans_i(&[1.0, 2.0, 4.0], &w, MoranVariant::Paper).unwrap();
        assert!((i[0].unwrap() - 8.0).abs() < 1e-12, "{:?}", i);
    }

    #[test]
    fn moran_isolated_unit_is_undefined() {
        let w = SpatialWeights::from_neighbor_lists(vec![vec![1], vec![0], vec![]]).unwrap();
        let i = local_morans_i(&[1.0, 2.0, 3.0], &w, MoranVariant::Paper).unwrap();
        assert!(i[2].is_none());
    }

    #[test]
    fn moran_constant_y_errors() {
        let w = line3_weights();
        assert!(matches!(
            local_morans_i(&[5.0, 5.0, 5.0], &w, MoranVariant::Paper),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn moran_length_mismatch_errors() {
        let w = line3_weights();
        assert!(local_morans_i(&[1.0, 2.0], &w, MoranVariant::Paper).is_err());
    }

    #[test]
    fn moran_affine_invariance() {
        let w = SpatialWeights::grid_queen(5, 5);
        let y: Vec<f64> = (0..25).map(|i| ((i * 37 + 11) % 17) as f64).collect();
        let base = local_morans_i(&y, &w, MoranVariant::Paper).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 3.5 * v + 100.0).collect();
        let transformed = local_morans_i(&scaled, &w, MoranVariant::Paper).unwrap();
        for (a, b) in base.iter().zip(&transformed) {
            match (a, b) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9),
                (None, None) => {}
                _ => panic!("definedness changed under affine map"),
            }
        }
    }

    #[test]
    fn permutation_deterministic_and_reorder_consistent() {
        let w = SpatialWeights::grid_queen(6, 6);
        let y: Vec<f64> = (0..36).map(|i| ((i * 31 + 7) % 23) as f64).collect();
        let a = moran_permutation(&y, &w, 199, 42, 0.05, MoranVariant::Paper).unwrap();
        let b = moran_permutation(&y, &w, 199, 42, 0.05, MoranVariant::Paper).unwrap();
        assert_eq!(a.p_values, b.p_values);

        // reverse the unit order; p-values must follow their units
        let n = w.n();
        let rev_neighbors: Vec<Vec<usize>> = (0..n)
            .map(|j| w.neighbors(n - 1 - j).iter().map(|&k| n - 1 - k).collect())
            .collect();
        let w_rev = SpatialWeights::from_neighbor_lists(rev_neighbors).unwrap();
        let y_rev: Vec<f64> = y.iter().rev().copied().collect();
        let c = moran_permutation(&y_rev, &w_rev, 199, 42, 0.05, MoranVariant::Paper).unwrap();
        for j in 0..n {
            assert_eq!(a.p_values[j], c.p_values[n - 1 - j]);
        }
    }

    #[test]
    fn permutation_flags_planted_block() {
        let (rows, cols) = (10, 10);
        let w = SpatialWeights::grid_queen(rows, cols);
        let mut rng = crate::rng::seeded_rng(9);
        use rand::Rng;
        let mut y: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for r in 3..6 {
            for c in 3..6 {
                y[r * cols + c] += 8.0;
            }
        }
        let res = moran_permutation(&y, &w, 199, 1, 0.05, MoranVariant::Paper).unwrap();
        // the block center has all-high neighbors
        assert_eq!(res.clusters[4 * cols + 4], ClusterLabel::HighHigh);
        assert!(res.p_values[4 * cols + 4] <= 0.05);
    }

    #[test]
    fn conventional_variant_differs_but_same_sign() {
        let w = SpatialWeights::grid_queen(4, 4);
        let y: Vec<f64> = (0..16).map(|i| (i % 5) as f64).collect();
        let paper = local_morans_i(&y, &w, MoranVariant::Paper).unwrap();
        let conv = local_morans_i(&y, &w, MoranVariant::Conventional).unwrap();
        for (p, c) in paper.iter().zip(&conv) {
            if let (Some(p), Some(c)) = (p, c) {
                if p.abs() > 1e-9 && c.abs() > 1e-9 {
                    assert_eq!(p.signum(), c.signum());
                }
            }
        }
    }

    #[test]
    fn isolated_unit_labeled_isolated() {
        let w = SpatialWeights::from_neighbor_lists(vec![
            vec![1],
            vec![0, 2],
            vec![1],
            vec![],
        ])
        .unwrap();
        let res =
            moran_permutation(&[1.0, 2.0, 4.0, 3.0], &w, 99, 0, 0.05, MoranVariant::Paper)
                .unwrap();
        assert_eq!(res.clusters[3], ClusterLabel::Isolated);
        assert_eq!(res.p_values[3], 1.0);
    }
}
