//! The spillover table as a directed weighted graph: nodes are locations,
//! edges carry the pairwise directed spillover in percentage points.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Warning;
use crate::num;
use crate::spillover::SpilloverTable;

/// Net direction of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NodeRole {
    Transmitter,
    Receiver,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphNode {
    pub label: String,
    /// Net spillover in percentage points.
    pub net: f64,
    /// Transmitter iff net > 0; ties classify as receiver.
    pub role: NodeRole,
    /// log(1 + total outward weight); the 1 floors zero-weight nodes at 0.
    pub size: f64,
    /// Outward spillover above the within-graph 75th percentile.
    pub strong_transmitter: bool,
    /// Inward spillover above the within-graph 75th percentile.
    pub weak_receiver: bool,
    /// Latitude, longitude in degrees when known.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub coordinates: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphEdge {
    pub source: String,
    pub target: String,
    /// Directed spillover in percentage points; never negative.
    pub weight: f64,
    /// Set by thresholding when the weight clears the highlight cutoff.
    pub emphasized: bool,
}

/// Directed weighted spillover graph. Nodes are sorted by label and edges
/// by (source, target) so exports are deterministic.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpilloverGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Edge cutoffs: keep weights strictly above `retain_above`, emphasize
/// weights strictly above `highlight_above`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdSpec {
    pub retain_above: f64,
    pub highlight_above: f64,
}

impl ThresholdSpec {
    pub fn new(retain_above: f64, highlight_above: f64) -> Self {
        assert!(retain_above >= 0.0 && highlight_above >= retain_above);
        ThresholdSpec { retain_above, highlight_above }
    }
}

/// Build the full graph from a table: one edge per ordered off-diagonal
/// pair, no self-loops.
pub fn to_graph(
    table: &SpilloverTable,
    coordinates: Option<&BTreeMap<String, [f64; 2]>>,
) -> (SpilloverGraph, Vec<Warning>) {
    let n = table.locations.len();
    let mut warnings = Vec::new();

    let outward = &table.to_others;
    let inward = &table.from_others;
    let strong_cut = num::quantile_of(outward, 0.75);
    let weak_cut = num::quantile_of(inward, 0.75);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| table.locations[a].cmp(&table.locations[b]));

    let mut nodes = Vec::with_capacity(n);
    for &i in &order {
        let label = table.locations[i].clone();
        let coords = match coordinates {
            Some(map) => match map.get(&label) {
                Some(c) => Some(*c),
                None => {
                    warnings.push(Warning::MissingCoordinates { label: label.clone() });
                    None
                }
            },
            None => None,
        };
        let net = table.net[i];
        nodes.push(GraphNode {
            label,
            net,
            role: if net > 0.0 { NodeRole::Transmitter } else { NodeRole::Receiver },
            size: num::ln_1p(outward[i]),
            strong_transmitter: outward[i] > strong_cut,
            weak_receiver: inward[i] > weak_cut,
            coordinates: coords,
        });
    }

    let mut edges = Vec::with_capacity(n * (n - 1));
    for &i in &order {
        for &j in &order {
            if i == j {
                continue;
            }
            edges.push(GraphEdge {
                source: table.locations[i].clone(),
                target: table.locations[j].clone(),
                weight: table.shares_pct[(i, j)],
                emphasized: false,
            });
        }
    }
    edges.sort_by(|a, b| (a.source.as_str(), a.target.as_str()).cmp(&(b.source.as_str(), b.target.as_str())));

    (SpilloverGraph { nodes, edges }, warnings)
}

/// Drop edges at or below the retain cutoff and tag the emphasized ones.
///
/// Node nets and roles always reflect the full table; sizes are recomputed
/// from the surviving outward weights only when `recompute_sizes` is set.
pub fn apply_threshold(
    graph: &SpilloverGraph,
    spec: &ThresholdSpec,
    recompute_sizes: bool,
) -> SpilloverGraph {
    let edges: Vec<GraphEdge> = graph
        .edges
        .iter()
        .filter(|e| e.weight > spec.retain_above)
        .map(|e| GraphEdge {
            emphasized: e.weight > spec.highlight_above,
            ..e.clone()
        })
        .collect();
    let mut nodes = graph.nodes.clone();
    if recompute_sizes {
        for node in &mut nodes {
            let outward: f64 = edges
                .iter()
                .filter(|e| e.source == node.label)
                .map(|e| e.weight)
                .sum();
            node.size = num::ln_1p(outward);
        }
    }
    SpilloverGraph { nodes, edges }
}

impl SpilloverGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, label: &str) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fevd::{FevdMatrix, FevdMethod};
    use crate::linalg::Mat;
    use crate::spillover::spillover_table;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn table_from(shares: Mat) -> SpilloverTable {
        let n = shares.rows();
        spillover_table(
            &FevdMatrix {
                horizon: 10,
                method: FevdMethod::Generalized,
                shares,
                normalized: true,
                locations: (0..n).map(|i| format!("m{i}")).collect(),
            },
        )
        .unwrap()
    }

    #[test]
    fn identity_table_yields_isolated_nodes_after_threshold() {
        let table = table_from(Mat::identity(3));
        let (g, warnings) = to_graph(&table, None);
        assert!(warnings.is_empty());
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(g.edge_count(), 6);
        let cut = apply_threshold(&g, &ThresholdSpec::new(0.0, 0.0), false);
        assert_eq!(cut.edge_count(), 0);
        assert_eq!(cut.nodes.len(), 3);
    }

    #[test]
    fn two_node_roles_follow_net_sign() {
        // d(0 -> 1) = 5pp, d(1 -> 0) = 2pp.
        let shares = Mat::from_rows(&[&[0.93, 0.05], &[0.02, 0.95]]);
        let table = table_from(shares);
        let (g, _) = to_graph(&table, None);
        let n0 = g.node("m0").unwrap();
        let n1 = g.node("m1").unwrap();
        assert_eq!(n0.role, NodeRole::Transmitter);
        assert!((n0.net - 3.0).abs() < 1e-9);
        assert_eq!(n1.role, NodeRole::Receiver);
        assert!((n1.net + 3.0).abs() < 1e-9);
    }

    #[test]
    fn full_graph_has_n_times_n_minus_one_edges() {
        let n = 14;
        let mut shares = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                shares[(i, j)] = if i == j { 0.5 } else { 0.5 / (n - 1) as f64 };
            }
        }
        let table = table_from(shares);
        let (g, _) = to_graph(&table, None);
        assert_eq!(g.edge_count(), n * (n - 1)); // 182
    }

    #[test]
    fn threshold_retains_and_emphasizes_fig6_style() {
        // Weights 0.1, 0.3, 0.7 with cutoffs (0.2, 0.5): keep {0.3, 0.7},
        // emphasize {0.7}.
        let g = SpilloverGraph {
            nodes: vec![],
            edges: vec![0.1, 0.3, 0.7]
                .into_iter()
                .enumerate()
                .map(|(k, w)| GraphEdge {
                    source: format!("s{k}"),
                    target: format!("t{k}"),
                    weight: w,
                    emphasized: false,
                })
                .collect(),
        };
        let cut = apply_threshold(&g, &ThresholdSpec::new(0.2, 0.5), false);
        let weights: Vec<f64> = cut.edges.iter().map(|e| e.weight).collect();
        assert_eq!(weights, vec![0.3, 0.7]);
        assert_eq!(cut.edges[0].emphasized, false);
        assert_eq!(cut.edges[1].emphasized, true);
        // Equal cutoffs: everything retained is emphasized.
        let all = apply_threshold(&g, &ThresholdSpec::new(10.0, 10.0), false);
        assert!(all.edges.is_empty());
        let ten = SpilloverGraph {
            nodes: vec![],
            edges: vec![GraphEdge {
                source: "a".into(),
                target: "b".into(),
                weight: 12.0,
                emphasized: false,
            }],
        };
        let kept = apply_threshold(&ten, &ThresholdSpec::new(10.0, 10.0), false);
        assert_eq!(kept.edges.len(), 1);
        assert!(kept.edges[0].emphasized);
    }

    #[test]
    fn raising_retain_cutoff_never_adds_edges() {
        let shares = Mat::from_rows(&[
            &[0.8, 0.15, 0.1],
            &[0.1, 0.8, 0.05],
            &[0.1, 0.05, 0.85],
        ]);
        let table = table_from(shares);
        let (g, _) = to_graph(&table, None);
        let mut prev = g.edge_count();
        for cut in [0.0, 5.0, 10.0, 14.0, 20.0] {
            let c = apply_threshold(&g, &ThresholdSpec::new(cut, cut), false).edge_count();
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn node_nets_sum_to_zero() {
        let shares = Mat::from_rows(&[
            &[0.7, 0.2, 0.25],
            &[0.2, 0.7, 0.05],
            &[0.1, 0.1, 0.7],
        ]);
        let table = table_from(shares);
        let (g, _) = to_graph(&table, None);
        let sum: f64 = g.nodes.iter().map(|n| n.net).sum();
        assert!(sum.abs() < 1e-8);
    }

    #[test]
    fn missing_coordinates_warn_but_emit() {
        let table = table_from(Mat::identity(2));
        let mut coords = BTreeMap::new();
        coords.insert("m0".to_string(), [48.85, 2.35]);
        let (g, warnings) = to_graph(&table, Some(&coords));
        assert_eq!(warnings.len(), 1);
        assert!(matches!(&warnings[0], Warning::MissingCoordinates { label } if label == "m1"));
        assert_eq!(g.node("m0").unwrap().coordinates, Some([48.85, 2.35]));
        assert_eq!(g.node("m1").unwrap().coordinates, None);
    }

    #[test]
    fn zero_outward_node_has_zero_size() {
        let table = table_from(Mat::identity(3));
        let (g, _) = to_graph(&table, None);
        for node in &g.nodes {
            assert_eq!(node.size, 0.0);
        }
    }
}
