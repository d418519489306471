//! Random mutation sequences checked against a naive map-of-maps model.

use std::collections::BTreeMap;

use gssl::{LabelAssignment, LabeledGraph, NodeId, SimilarityGraph};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    AddNode,
    RemoveNode(usize),
    AddEdge(usize, usize, f64),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        2 => Just(Op::AddNode),
        1 => any::<usize>().prop_map(Op::RemoveNode),
        4 => (any::<usize>(), any::<usize>(), 0.1f64..5.0).prop_map(|(a, b, w)| Op::AddEdge(a, b, w)),
    ]
}

type Model = BTreeMap<usize, BTreeMap<usize, f64>>;

fn check_against(g: &SimilarityGraph, model: &Model) {
    assert_eq!(g.node_count(), model.len());
    let ids: Vec<usize> = g.ids().iter().map(|n| n.0).collect();
    assert_eq!(ids, model.keys().copied().collect::<Vec<_>>());
    let mut edges = 0;
    for (&u, nbrs) in model {
        let expect: f64 = nbrs.values().sum();
        let got = g.degree(NodeId(u)).unwrap();
        assert!((got - expect).abs() <= 1e-12, "degree of {u}: {got} vs {expect}");
        let listed: Vec<(usize, f64)> = g.neighbors(NodeId(u)).unwrap().iter().map(|(n, w)| (n.0, *w)).collect();
        assert_eq!(listed, nbrs.iter().map(|(&v, &w)| (v, w)).collect::<Vec<_>>());
        for (&v, &w) in nbrs {
            assert_eq!(g.weight(NodeId(v), NodeId(u)), Some(w), "symmetry {u}-{v}");
        }
        edges += nbrs.len();
    }
    assert_eq!(g.edge_count() * 2, edges);
    assert!(g.validate().is_ok());
}

proptest! {
    #[test]
    fn mutations_match_reference(ops in prop::collection::vec(op_strategy(), 1..120)) {
        let mut g = SimilarityGraph::new();
        let mut model: Model = BTreeMap::new();
        let mut next = 0usize;
        for op in ops {
            match op {
                Op::AddNode => {
                    let id = g.add_node().unwrap();
                    prop_assert_eq!(id.0, next);
                    model.insert(next, BTreeMap::new());
                    next += 1;
                }
                Op::RemoveNode(pick) => {
                    if model.is_empty() {
                        prop_assert!(g.remove_node(NodeId(pick)).is_err());
                        continue;
                    }
                    let u = *model.keys().nth(pick % model.len()).unwrap();
                    g.remove_node(NodeId(u)).unwrap();
                    model.remove(&u);
                    for nbrs in model.values_mut() {
                        nbrs.remove(&u);
                    }
                    prop_assert!(g.remove_node(NodeId(u)).is_err());
                }
                Op::AddEdge(a, b, w) => {
                    if model.len() < 2 {
                        continue;
                    }
                    let u = *model.keys().nth(a % model.len()).unwrap();
                    let v = *model.keys().nth(b % model.len()).unwrap();
                    let res = g.add_edge(NodeId(u), NodeId(v), w);
                    if u == v || model[&u].contains_key(&v) {
                        prop_assert!(res.is_err());
                    } else {
                        res.unwrap();
                        model.get_mut(&u).unwrap().insert(v, w);
                        model.get_mut(&v).unwrap().insert(u, w);
                    }
                }
            }
            check_against(&g, &model);
        }
        // A rebuild from the edge list reproduces every degree.
        let mut rebuilt = SimilarityGraph::new();
        let mut map = BTreeMap::new();
        for &id in g.ids() {
            map.insert(id, rebuilt.add_node().unwrap());
        }
        for (u, v, w) in g.edges() {
            rebuilt.add_edge(map[&u], map[&v], w).unwrap();
        }
        for &id in g.ids() {
            prop_assert!((rebuilt.degree(map[&id]).unwrap() - g.degree(id).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn labeled_graph_rows_track_nodes(removals in prop::collection::vec(0usize..100, 0..8)) {
        let mut g = SimilarityGraph::with_nodes(10);
        for i in 0..9 {
            g.add_edge(NodeId(i), NodeId(i + 1), 1.0).unwrap();
        }
        let mut labels = LabelAssignment::new(2);
        labels.assign(NodeId(0), 0).unwrap();
        labels.assign(NodeId(9), 1).unwrap();
        let mut lg = LabeledGraph::new(g, labels).unwrap();
        for r in removals {
            if lg.graph.is_empty() {
                break;
            }
            let id = lg.graph.id_at(r % lg.graph.node_count());
            let label = lg.remove_node(id).unwrap();
            prop_assert_eq!(label.is_some(), id == NodeId(0) || id == NodeId(9));
            prop_assert_eq!(lg.features.rows(), lg.graph.node_count());
            prop_assert!(!lg.labels.is_labeled(id));
        }
        let id = lg.add_node().unwrap();
        prop_assert_eq!(lg.features.rows(), lg.graph.node_count());
        let row = lg.graph.row_of(id).unwrap();
        prop_assert!(lg.features.row(row).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn cap_blocks_additions() {
    let mut g = SimilarityGraph::with_cap(1000);
    for _ in 0..1000 {
        g.add_node().unwrap();
    }
    assert!(matches!(g.add_node(), Err(gssl::Error::CapacityExceeded { cap: 1000 })));
    g.remove_node(NodeId(5)).unwrap();
    assert_eq!(g.add_node().unwrap(), NodeId(1000));
}
