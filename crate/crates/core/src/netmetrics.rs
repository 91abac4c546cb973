//! Per-tract street-network summaries.
//!
//! An intersection is a node of degree >= 3 in the tract-clipped
//! subgraph. Circuity is the ratio of summed edge lengths to summed
//! endpoint chord distances (ratio of sums, not mean of ratios), so a
//! network whose lengths were all back-filled from endpoint distance has
//! circuity exactly 1. Complexity is `intersections * circuity`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::great_circle_distance;
use crate::ingest::{CensusTract, StreetNetwork};

pub const SUMMARY_CSV_HEADER: [&str; 10] = [
    "tract_id",
    "n_nodes",
    "n_edges",
    "intersections",
    "circuity",
    "complexity",
    "avg_node_degree",
    "avg_street_width_m",
    "avg_bike_lanes",
    "empty_network",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractNetworkSummary {
    pub tract_id: String,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub intersections: usize,
    /// Absent when the clipped network has no edges.
    pub circuity: Option<f64>,
    pub complexity: f64,
    pub avg_node_degree: f64,
    pub avg_street_width_m: Option<f64>,
    pub avg_bike_lanes: Option<f64>,
    /// Set when the clipped network had no nodes or edges.
    pub empty_network: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetricsOptions {
    /// Count each edge twice per endpoint (directed reading of the graph).
    pub directed_degree: bool,
    /// Length-weighted width / bike-lane averages instead of per-edge means.
    pub length_weighted: bool,
}

/// Keep nodes inside the tract (boundary counts as inside) and edges with
/// both endpoints kept.
pub fn clip_network(net: &StreetNetwork, tract: &CensusTract) -> StreetNetwork {
    let nodes: BTreeMap<String, crate::geo::GeoPoint> = net
        .nodes
        .iter()
        .filter(|(_, p)| tract.contains(**p))
        .map(|(k, p)| (k.clone(), *p))
        .collect();
    let edges = net
        .edges
        .iter()
        .filter(|e| nodes.contains_key(&e.u) && nodes.contains_key(&e.v))
        .cloned()
        .collect();
    StreetNetwork { nodes, edges }
}

/// Ratio of summed network length to summed endpoint chord length.
/// `None` for edgeless networks; zero total chord length is an error.
pub fn circuity(net: &StreetNetwork) -> Result<Option<f64>> {
    if net.edges.is_empty() {
        return Ok(None);
    }
    let mut network_total = 0.0;
    let mut chord_total = 0.0;
    for e in &net.edges {
        let (u, v) = (net.nodes[&e.u], net.nodes[&e.v]);
        network_total += e.length_m;
        chord_total += great_circle_distance(u, v);
    }
    if chord_total == 0.0 {
        return Err(Error::InvalidInput(
            "zero total chord length (coincident endpoints)".into(),
        ));
    }
    Ok(Some(network_total / chord_total))
}

/// Number of nodes with degree >= 3.
pub fn intersection_count(net: &StreetNetwork) -> usize {
    net.degrees().values().filter(|&&d| d >= 3).count()
}

pub fn tract_summary(
    net: &StreetNetwork,
    tract: &CensusTract,
    opts: MetricsOptions,
) -> Result<TractNetworkSummary> {
    let clipped = clip_network(net, tract);
    let n_nodes = clipped.nodes.len();
    let n_edges = clipped.edges.len();
    if n_nodes == 0 || n_edges == 0 {
        return Ok(TractNetworkSummary {
            tract_id: tract.tract_id.clone(),
            n_nodes,
            n_edges,
            intersections: 0,
            circuity: None,
            complexity: 0.0,
            avg_node_degree: 0.0,
            avg_street_width_m: None,
            avg_bike_lanes: None,
            empty_network: true,
        });
    }

    let intersections = intersection_count(&clipped);
    let circ = circuity(&clipped)?;
    let complexity = circ.map_or(0.0, |c| intersections as f64 * c);

    let degree_factor = if opts.directed_degree { 2.0 } else { 1.0 };
    let avg_node_degree = degree_factor
        * clipped.degrees().values().map(|&d| d as f64).sum::<f64>()
        / n_nodes as f64;

    let weighted_mean = |values: Vec<(f64, f64)>| -> Option<f64> {
        // (value, weight) pairs over edges carrying the attribute
        if values.is_empty() {
            return None;
        }
        let total_w: f64 = values.iter().map(|(_, w)| w).sum();
        Some(values.iter().map(|(v, w)| v * w).sum::<f64>() / total_w)
    };
    let edge_weight = |e: &crate::ingest::Edge| if opts.length_weighted { e.length_m } else { 1.0 };
    let avg_street_width_m = weighted_mean(
        clipped
            .edges
            .iter()
            .filter_map(|e| e.width_m.map(|w| (w, edge_weight(e))))
            .collect(),
    );
    let avg_bike_lanes = weighted_mean(
        clipped
            .edges
            .iter()
            .filter_map(|e| e.bike_lanes.map(|b| (b as f64, edge_weight(e))))
            .collect(),
    );

    Ok(TractNetworkSummary {
        tract_id: tract.tract_id.clone(),
        n_nodes,
        n_edges,
        intersections,
        circuity: circ,
        complexity,
        avg_node_degree,
        avg_street_width_m,
        avg_bike_lanes,
        empty_network: false,
    })
}

/// One row per tract, columns per [`SUMMARY_CSV_HEADER`]; absent values
/// are empty cells.
pub fn write_summaries_csv<W: Write>(summaries: &[TractNetworkSummary], writer: W) -> Result<()> {
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(SUMMARY_CSV_HEADER)?;
    for s in summaries {
        out.write_record([
            s.tract_id.as_str(),
            &s.n_nodes.to_string(),
            &s.n_edges.to_string(),
            &s.intersections.to_string(),
            &fmt_opt(s.circuity),
            &format!("{}", s.complexity),
            &format!("{}", s.avg_node_degree),
            &fmt_opt(s.avg_street_width_m),
            &fmt_opt(s.avg_bike_lanes),
            &s.empty_network.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{GeoPoint, PolygonGeom};

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint { lon, lat }
    }

    fn tract(x0: f64, y0: f64, side: f64) -> CensusTract {
        CensusTract::new(
            "t".into(),
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

    fn network(
        nodes: &[(&str, f64, f64)],
        edges: &[(&str, &str, Option<f64>)],
    ) -> StreetNetwork {
        let node_map: BTreeMap<String, GeoPoint> = nodes
            .iter()
            .map(|(id, lon, lat)| (id.to_string(), pt(*lon, *lat)))
            .collect();
        StreetNetwork::new(
            node_map,
            edges
                .iter()
                .map(|(u, v, l)| (u.to_string(), v.to_string(), *l, None, None))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn clip_keeps_interior_drops_straddlers() {
        let t = tract(0.0, 0.0, 0.01);
        let net = network(
            &[
                ("in1", 0.002, 0.002),
                ("in2", 0.008, 0.008),
                ("out", 0.02, 0.02),
            ],
            &[("in1", "in2", None), ("in2", "out", None)],
        );
        let clipped = clip_network(&net, &t);
        assert_eq!(clipped.nodes.len(), 2);
        assert_eq!(clipped.edges.len(), 1);

        // node exactly on the boundary is kept
        let net2 = network(&[("edge", 0.0, 0.005), ("in", 0.005, 0.005)], &[("edge", "in", None)]);
        let clipped2 = clip_network(&net2, &t);
        assert_eq!(clipped2.nodes.len(), 2);
        assert_eq!(clipped2.edges.len(), 1);
    }

    #[test]
    fn circuity_backfilled_is_exactly_one() {
        let net = network(&[("a", 0.0, 0.0), ("b", 0.001, 0.0)], &[("a", "b", None)]);
        assert_eq!(circuity(&net).unwrap(), Some(1.0));
    }

    #[test]
    fn circuity_direct_ratio_and_ratio_of_sums() {
        // single edge: length 150 over a ~100 m chord
        let chord = great_circle_distance(pt(0.0, 0.0), pt(0.0, 0.0009));
        let net = network(
            &[("a", 0.0, 0.0), ("b", 0.0, 0.0009)],
            &[("a", "b", Some(chord * 1.5))],
        );
        let c = circuity(&net).unwrap().unwrap();
        assert!((c - 1.5).abs() < 1e-12);

        // lengths [120, 80] over chords [100, 80] -> 200/180
        let d1 = great_circle_distance(pt(0.0, 0.0), pt(0.0, 0.0009));
        let d2 = great_circle_distance(pt(0.01, 0.0), pt(0.01, 0.00072));
        let net = network(
            &[
                ("a", 0.0, 0.0),
                ("b", 0.0, 0.0009),
                ("c", 0.01, 0.0),
                ("d", 0.01, 0.00072),
            ],
            &[
                ("a", "b", Some(d1 * 1.2)),
                ("c", "d", Some(d2)),
            ],
        );
        let c = circuity(&net).unwrap().unwrap();
        let expect = (d1 * 1.2 + d2) / (d1 + d2);
        assert!((c - expect).abs() < 1e-12);
        // ratio of sums (~1.111), not mean of ratios (1.1)
        assert!((c - 1.1).abs() > 1e-3);
    }

    #[test]
    fn circuity_empty_and_degenerate() {
        let net = network(&[("a", 0.0, 0.0)], &[]);
        assert_eq!(circuity(&net).unwrap(), None);
    }

    #[test]
    fn intersections_degree_rule() {
        // single edge: both endpoints degree 1
        let net = network(&[("a", 0.0, 0.0), ("b", 0.001, 0.0)], &[("a", "b", None)]);
        assert_eq!(intersection_count(&net), 0);

        // plus sign: center degree 4
        let net = network(
            &[
                ("c", 0.0, 0.0),
                ("n", 0.0, 0.001),
                ("s", 0.0, -0.001),
                ("e", 0.001, 0.0),
                ("w", -0.001, 0.0),
            ],
            &[
                ("c", "n", None),
                ("c", "s", None),
                ("c", "e", None),
                ("c", "w", None),
            ],
        );
        assert_eq!(intersection_count(&net), 1);
    }

    #[test]
    fn grid_3x3_has_five_intersections() {
        // 2x2 blocks: 3x3 nodes, edges along rows and columns
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let names: Vec<String> = (0..9).map(|i| format!("n{i}")).collect();
        for r in 0..3usize {
            for c in 0..3usize {
                nodes.push((names[r * 3 + c].as_str(), c as f64 * 0.001, r as f64 * 0.001));
            }
        }
        for r in 0..3usize {
            for c in 0..3usize {
                if c + 1 < 3 {
                    edges.push((names[r * 3 + c].as_str(), names[r * 3 + c + 1].as_str(), None));
                }
                if r + 1 < 3 {
                    edges.push((names[r * 3 + c].as_str(), names[(r + 1) * 3 + c].as_str(), None));
                }
            }
        }
        let net = network(&nodes, &edges);
        // center deg 4, four edge-midpoints deg 3, four corners deg 2
        assert_eq!(intersection_count(&net), 5);
    }

    #[test]
    fn summary_complexity_is_product() {
        let t = tract(-0.001, -0.002, 0.01);
        let net = network(
            &[
                ("c", 0.0, 0.0),
                ("n", 0.0, 0.001),
                ("s", 0.0, -0.001),
                ("e", 0.001, 0.0),
                ("w", -0.001, 0.0),
            ],
            &[
                ("c", "n", None),
                ("c", "s", None),
                ("c", "e", None),
                ("c", "w", None),
            ],
        );
        let s = tract_summary(&net, &t, MetricsOptions::default()).unwrap();
        assert_eq!(s.intersections, 1);
        assert_eq!(s.circuity, Some(1.0));
        assert_eq!(s.complexity, s.intersections as f64 * s.circuity.unwrap());
        assert!((s.avg_node_degree - 8.0 / 5.0).abs() < 1e-12);
        assert!(s.avg_street_width_m.is_none());
        assert!(!s.empty_network);
    }

    #[test]
    fn summary_empty_tract_flagged() {
        let t = tract(10.0, 10.0, 0.01);
        let net = network(&[("a", 0.0, 0.0), ("b", 0.001, 0.0)], &[("a", "b", None)]);
        let s = tract_summary(&net, &t, MetricsOptions::default()).unwrap();
        assert!(s.empty_network);
        assert_eq!(s.complexity, 0.0);
        assert!(s.circuity.is_none());
    }

    #[test]
    fn width_and_bike_means_plain_and_weighted() {
        let t = tract(-0.001, -0.001, 0.01);
        let node_map: BTreeMap<String, GeoPoint> = [
            ("a".to_string(), pt(0.0, 0.0)),
            ("b".to_string(), pt(0.001, 0.0)),
            ("c".to_string(), pt(0.002, 0.0)),
        ]
        .into();
        let net = StreetNetwork::new(
            node_map,
            vec![
                ("a".into(), "b".into(), Some(100.0), Some(10.0), Some(0)),
                ("b".into(), "c".into(), Some(300.0), Some(20.0), Some(2)),
            ],
        )
        .unwrap();
        let s = tract_summary(&net, &t, MetricsOptions::default()).unwrap();
        assert_eq!(s.avg_street_width_m, Some(15.0));
        assert_eq!(s.avg_bike_lanes, Some(1.0));

        let s = tract_summary(
            &net,
            &t,
            MetricsOptions {
                length_weighted: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((s.avg_street_width_m.unwrap() - 17.5).abs() < 1e-12);
    }

    #[test]
    fn circuity_invariant_under_edge_reordering() {
        let chord = great_circle_distance(pt(0.0, 0.0), pt(0.0, 0.0009));
        let mk = |order: bool| {
            let mut edges = vec![
                ("a", "b", Some(chord * 1.3)),
                ("b", "c", Some(chord * 1.1)),
            ];
            if order {
                edges.reverse();
            }
            network(
                &[("a", 0.0, 0.0), ("b", 0.0, 0.0009), ("c", 0.0, 0.0018)],
                &edges,
            )
        };
        let c1 = circuity(&mk(false)).unwrap().unwrap();
        let c2 = circuity(&mk(true)).unwrap().unwrap();
        assert_eq!(c1, c2);
    }
}
