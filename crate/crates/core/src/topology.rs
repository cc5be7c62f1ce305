//! Tree-shaped network layouts rooted at the sink.
//!
//! Source clusters are leaves; each one hands its packets to a single
//! queueing node (a relay or the sink). Relays forward to their parent
//! until the sink is reached.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    SourceCluster,
    Relay,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub role: NodeRole,
    /// Packets/s; unused for source-cluster nodes.
    pub service_rate: f64,
    /// Overflow threshold B.
    pub threshold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSpec {
    pub id: u32,
    /// Number of identical sources in the cluster.
    pub sources: u32,
    /// The cluster's own leaf node.
    pub node: NodeId,
    /// First queueing node the cluster's packets enter.
    pub attach: NodeId,
    /// Aggregate mean packet rate of the cluster (packets/s).
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologySpec {
    pub nodes: Vec<NodeSpec>,
    /// `(child, parent)` pairs.
    pub edges: Vec<(NodeId, NodeId)>,
    pub clusters: Vec<ClusterSpec>,
    /// Depth promised by the constructor, in levels.
    pub expected_depth: Option<usize>,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    NoSink,
    MultipleSinks(Vec<NodeId>),
    DuplicateNode(NodeId),
    UnknownNode { edge: (NodeId, NodeId), missing: NodeId },
    NotATree { node: NodeId, reason: &'static str },
    BadServiceRate(NodeId),
    BadThreshold(NodeId),
    ClusterNode { cluster: u32, reason: &'static str },
    DepthMismatch { expected: usize, actual: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NoSink => write!(f, "no sink"),
            Diagnostic::MultipleSinks(ids) => write!(f, "multiple sinks: {ids:?}"),
            Diagnostic::DuplicateNode(id) => write!(f, "duplicate node id {id}"),
            Diagnostic::UnknownNode { edge, missing } => {
                write!(f, "edge {}->{} references unknown node {missing}", edge.0, edge.1)
            }
            Diagnostic::NotATree { node, reason } => write!(f, "not a tree at node {node}: {reason}"),
            Diagnostic::BadServiceRate(id) => write!(f, "node {id} needs a positive finite service rate"),
            Diagnostic::BadThreshold(id) => write!(f, "node {id} needs an overflow threshold >= 1"),
            Diagnostic::ClusterNode { cluster, reason } => write!(f, "cluster {cluster}: {reason}"),
            Diagnostic::DepthMismatch { expected, actual } => {
                write!(f, "depth {actual} does not match expected {expected}")
            }
        }
    }
}

/// Checks every structural invariant and returns the violations found.
/// An empty list means the topology is usable.
pub fn validate_topology(spec: &TopologySpec) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut ids = BTreeSet::new();
    for n in &spec.nodes {
        if !ids.insert(n.id) {
            diags.push(Diagnostic::DuplicateNode(n.id));
        }
        if n.role != NodeRole::SourceCluster {
            if !(n.service_rate.is_finite() && n.service_rate > 0.0) {
                diags.push(Diagnostic::BadServiceRate(n.id));
            }
            if n.threshold < 1 {
                diags.push(Diagnostic::BadThreshold(n.id));
            }
        }
    }
    let sinks: Vec<NodeId> = spec.nodes.iter().filter(|n| n.role == NodeRole::Sink).map(|n| n.id).collect();
    match sinks.len() {
        0 => diags.push(Diagnostic::NoSink),
        1 => {}
        _ => diags.push(Diagnostic::MultipleSinks(sinks.clone())),
    }

    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for &(child, par) in &spec.edges {
        for end in [child, par] {
            if !ids.contains(&end) {
                diags.push(Diagnostic::UnknownNode {
                    edge: (child, par),
                    missing: end,
                });
            }
        }
        if child == par {
            diags.push(Diagnostic::NotATree {
                node: child,
                reason: "self loop",
            });
        } else if parent.insert(child, par).is_some() {
            diags.push(Diagnostic::NotATree {
                node: child,
                reason: "more than one parent",
            });
        }
    }

    let role = |id: NodeId| spec.nodes.iter().find(|n| n.id == id).map(|n| n.role);
    for n in &spec.nodes {
        match (n.role, parent.get(&n.id)) {
            (NodeRole::Sink, Some(_)) => diags.push(Diagnostic::NotATree {
                node: n.id,
                reason: "sink has a parent",
            }),
            (NodeRole::Sink, None) => {}
            (_, None) => diags.push(Diagnostic::NotATree {
                node: n.id,
                reason: "no path to the sink",
            }),
            (_, Some(&p)) => {
                if role(p) == Some(NodeRole::SourceCluster) {
                    diags.push(Diagnostic::NotATree {
                        node: n.id,
                        reason: "parent is a source cluster",
                    });
                }
            }
        }
    }

    // Walk upward from every node; revisiting a node means a cycle.
    for n in &spec.nodes {
        let mut seen = BTreeSet::from([n.id]);
        let mut cur = n.id;
        while let Some(&p) = parent.get(&cur) {
            if !seen.insert(p) {
                diags.push(Diagnostic::NotATree {
                    node: n.id,
                    reason: "cycle",
                });
                break;
            }
            cur = p;
        }
    }

    let mut claimed = BTreeSet::new();
    for c in &spec.clusters {
        if role(c.node) != Some(NodeRole::SourceCluster) {
            diags.push(Diagnostic::ClusterNode {
                cluster: c.id,
                reason: "leaf node is not a source-cluster node",
            });
        }
        if !claimed.insert(c.node) {
            diags.push(Diagnostic::ClusterNode {
                cluster: c.id,
                reason: "leaf node shared with another cluster",
            });
        }
        if parent.get(&c.node) != Some(&c.attach) {
            diags.push(Diagnostic::ClusterNode {
                cluster: c.id,
                reason: "attachment node is not the leaf's parent",
            });
        }
        if !(c.rate.is_finite() && c.rate >= 0.0) || (c.sources > 0 && c.rate == 0.0) {
            diags.push(Diagnostic::ClusterNode {
                cluster: c.id,
                reason: "aggregate rate must be positive",
            });
        }
    }
    for n in spec.nodes.iter().filter(|n| n.role == NodeRole::SourceCluster) {
        if !claimed.contains(&n.id) {
            diags.push(Diagnostic::ClusterNode {
                cluster: n.id,
                reason: "source-cluster node without a cluster entry",
            });
        }
    }

    if diags.is_empty() {
        if let Some(expected) = spec.expected_depth {
            let actual = spec.depth();
            if actual != expected {
                diags.push(Diagnostic::DepthMismatch { expected, actual });
            }
        }
    }
    diags
}

impl TopologySpec {
    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn sink(&self) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.role == NodeRole::Sink).map(|n| n.id)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.edges.iter().find(|e| e.0 == id).map(|e| e.1)
    }

    /// Queueing nodes visited by packets of `cluster`, first hop first.
    pub fn path(&self, cluster: &ClusterSpec) -> Vec<NodeId> {
        let mut path = vec![cluster.attach];
        let mut cur = cluster.attach;
        while let Some(p) = self.parent(cur) {
            if path.contains(&p) {
                break;
            }
            path.push(p);
            cur = p;
        }
        path
    }

    /// Longest leaf-to-sink path, counting nodes.
    pub fn depth(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| {
                let mut levels = 1;
                let mut cur = n.id;
                while let Some(p) = self.parent(cur) {
                    levels += 1;
                    cur = p;
                    if levels > self.nodes.len() {
                        break;
                    }
                }
                levels
            })
            .max()
            .unwrap_or(0)
    }

    /// Mean packet rate offered to `node` by all clusters routed through it.
    pub fn offered_load(&self, node: NodeId) -> f64 {
        self.clusters
            .iter()
            .filter(|c| self.path(c).contains(&node))
            .map(|c| c.rate)
            .sum()
    }

    pub fn utilization(&self, node: NodeId) -> f64 {
        match self.node(node) {
            Some(n) if n.role != NodeRole::SourceCluster => self.offered_load(node) / n.service_rate,
            _ => 0.0,
        }
    }

    /// Relays and the sink, in id order.
    pub fn queue_nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.iter().filter(|n| n.role != NodeRole::SourceCluster)
    }
}

fn check_common(n: u32, lambda: f64) -> Result<(), ModelError> {
    if n < 1 {
        return Err(ModelError::domain("N", "need at least one source"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ModelError::domain("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<(), ModelError> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(ModelError::domain("rho", format!("must lie in (0,1), got {rho}")))
    }
}

fn queue(id: NodeId, role: NodeRole, service_rate: f64, threshold: u64) -> NodeSpec {
    NodeSpec {
        id,
        role,
        service_rate,
        threshold,
    }
}

fn leaf(id: NodeId) -> NodeSpec {
    NodeSpec {
        id,
        role: NodeRole::SourceCluster,
        service_rate: 0.0,
        threshold: 1,
    }
}

/// `n` sources attached directly to the sink.
pub fn build_star(n: u32, lambda_total: f64, v: f64, threshold: u64) -> Result<TopologySpec, ModelError> {
    check_common(n, lambda_total)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(ModelError::domain("v", format!("must be > 0, got {v}")));
    }
    Ok(TopologySpec {
        nodes: vec![queue(0, NodeRole::Sink, v, threshold), leaf(1)],
        edges: vec![(1, 0)],
        clusters: vec![ClusterSpec {
            id: 1,
            sources: n,
            node: 1,
            attach: 0,
            rate: lambda_total,
        }],
        expected_depth: Some(2),
    })
}

/// Two clusters of `n` sources, each behind its own relay, feeding the
/// sink. Relays run at `lambda_per_relay / rho`; the sink at
/// `2 lambda_per_relay / rho` unless overridden.
pub fn build_case2(
    n: u32,
    lambda_per_relay: f64,
    rho_target: f64,
    threshold: u64,
    sink_service_rate: Option<f64>,
) -> Result<TopologySpec, ModelError> {
    check_common(n, lambda_per_relay)?;
    check_rho(rho_target)?;
    let v_relay = lambda_per_relay / rho_target;
    let v_sink = sink_service_rate.unwrap_or(2.0 * lambda_per_relay / rho_target);
    Ok(TopologySpec {
        nodes: vec![
            queue(0, NodeRole::Sink, v_sink, threshold),
            queue(1, NodeRole::Relay, v_relay, threshold),
            queue(2, NodeRole::Relay, v_relay, threshold),
            leaf(3),
            leaf(4),
        ],
        edges: vec![(1, 0), (2, 0), (3, 1), (4, 2)],
        clusters: vec![
            ClusterSpec {
                id: 1,
                sources: n,
                node: 3,
                attach: 1,
                rate: lambda_per_relay,
            },
            ClusterSpec {
                id: 2,
                sources: n,
                node: 4,
                attach: 2,
                rate: lambda_per_relay,
            },
        ],
        expected_depth: Some(3),
    })
}

/// Case 2 plus a third cluster sending straight to the sink. The sink runs
/// at `3 lambda / rho` unless overridden.
pub fn build_case3(
    n: u32,
    lambda: f64,
    rho_target: f64,
    threshold: u64,
    sink_service_rate: Option<f64>,
) -> Result<TopologySpec, ModelError> {
    let mut spec = build_case2(n, lambda, rho_target, threshold, None)?;
    spec.nodes[0].service_rate = sink_service_rate.unwrap_or(3.0 * lambda / rho_target);
    spec.nodes.push(leaf(5));
    spec.edges.push((5, 0));
    spec.clusters.push(ClusterSpec {
        id: 3,
        sources: n,
        node: 5,
        attach: 0,
        rate: lambda,
    });
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn star_shape() {
        let s = build_star(1, 50.0, 100.0, 1000).unwrap();
        assert!(validate_topology(&s).is_empty());
        assert_eq!(s.depth(), 2);
        assert_eq!(s.utilization(0), 0.5);
        let s = build_star(10, 50.0, 100.0, 1000).unwrap();
        assert_eq!(s.clusters[0].rate / f64::from(s.clusters[0].sources), 5.0);
        assert!(build_star(1, 0.0, 100.0, 1000).is_err());
        assert!(build_star(0, 50.0, 100.0, 1000).is_err());
    }

    #[test]
    fn case2_rates() {
        let s = build_case2(1, 50.0, 0.5, 1000, None).unwrap();
        assert!(validate_topology(&s).is_empty());
        assert_eq!(s.node(1).unwrap().service_rate, 100.0);
        assert_eq!(s.node(2).unwrap().service_rate, 100.0);
        assert_eq!(s.node(0).unwrap().service_rate, 200.0);
        assert_eq!(s.depth(), 3);
        let s5 = build_case2(5, 50.0, 0.5, 1000, None).unwrap();
        assert_eq!(s5.clusters[0].rate / f64::from(s5.clusters[0].sources), 10.0);
        assert_eq!(s5.depth(), 3);
        let o = build_case2(1, 50.0, 0.5, 1000, Some(100.0)).unwrap();
        assert_eq!(o.utilization(0), 1.0);
    }

    #[test]
    fn case3_paths() {
        let s = build_case3(1, 50.0, 0.5, 1000, None).unwrap();
        assert!(validate_topology(&s).is_empty());
        assert_eq!(s.node(0).unwrap().service_rate, 300.0);
        assert_eq!(s.depth(), 3);
        assert_eq!(s.path(&s.clusters[2]), vec![0]);
        assert_eq!(s.path(&s.clusters[0]), vec![1, 0]);
        assert_eq!(s.path(&s.clusters[1]), vec![2, 0]);
    }

    #[test]
    fn equal_utilization_everywhere() {
        for rho in [0.1, 0.25, 0.5, 0.8] {
            for s in [
                build_case2(2, 50.0, rho, 1000, None).unwrap(),
                build_case3(1, 50.0, rho, 1000, None).unwrap(),
            ] {
                for q in s.queue_nodes() {
                    let load = s.offered_load(q.id);
                    assert!((load - rho * q.service_rate).abs() < 1e-12 * load);
                }
            }
        }
    }

    #[test]
    fn multiple_sinks_reported() {
        let mut s = build_star(3, 50.0, 100.0, 1000).unwrap();
        s.nodes.push(queue(9, NodeRole::Sink, 100.0, 10));
        let d = validate_topology(&s);
        assert!(d.iter().any(|d| d.to_string().contains("multiple sinks")), "{d:?}");
    }

    #[test]
    fn cycle_reported() {
        let mut s = build_case2(1, 50.0, 0.5, 1000, None).unwrap();
        // relay 1 -> relay 2 -> relay 1
        s.edges.retain(|e| *e != (1, 0) && *e != (2, 0));
        s.edges.push((1, 2));
        s.edges.push((2, 1));
        let d = validate_topology(&s);
        assert!(d.iter().any(|d| d.to_string().contains("not a tree")), "{d:?}");
    }

    #[test]
    fn other_violations() {
        let mut s = build_star(1, 50.0, 100.0, 1000).unwrap();
        s.nodes[0].service_rate = 0.0;
        s.nodes[0].threshold = 0;
        let d = validate_topology(&s);
        assert!(d.contains(&Diagnostic::BadServiceRate(0)));
        assert!(d.contains(&Diagnostic::BadThreshold(0)));

        let mut s = build_star(1, 50.0, 100.0, 1000).unwrap();
        s.expected_depth = Some(3);
        assert_eq!(
            validate_topology(&s),
            vec![Diagnostic::DepthMismatch { expected: 3, actual: 2 }]
        );

        let mut s = build_star(1, 50.0, 100.0, 1000).unwrap();
        s.nodes.retain(|n| n.role != NodeRole::Sink);
        assert!(validate_topology(&s).contains(&Diagnostic::NoSink));

        let mut s = build_case2(1, 50.0, 0.5, 1000, None).unwrap();
        s.clusters[0].attach = 2;
        assert!(validate_topology(&s)
            .iter()
            .any(|d| matches!(d, Diagnostic::ClusterNode { cluster: 1, .. })));
    }

    proptest! {
        #[test]
        fn constructors_validate(n in 1u32..50, lambda in 0.1f64..1000.0, rho in 0.01f64..0.99) {
            prop_assert!(validate_topology(&build_star(n, lambda, lambda / rho, 1000).unwrap()).is_empty());
            prop_assert!(validate_topology(&build_case2(n, lambda, rho, 1000, None).unwrap()).is_empty());
            prop_assert!(validate_topology(&build_case3(n, lambda, rho, 1000, None).unwrap()).is_empty());
        }
    }
}
