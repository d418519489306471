//! Plain-text graph, label and feature formats.
//!
//! Edge list: `<u> <v> <w>` per line, whitespace separated, `#` starts a
//! comment, each undirected edge listed once. Class files (labels, ground
//! truth): `<node-id> <class-index>` per line. Node ids are taken literally;
//! a graph read from an edge list has nodes `0..=max_id`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, LabelAssignment, NodeId, SimilarityGraph};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|err| Error::Io {
        path: path.to_path_buf(),
        err,
    })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (n + 1, body.split_whitespace().collect()))
    })
}

fn parse_field<T: std::str::FromStr>(tok: &str, source: &Path, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        path: source.to_path_buf(),
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

/// Parses an edge list. With `unit_weights` every weight is replaced by 1.
pub fn parse_edge_list(text: &str, source: &Path, unit_weights: bool) -> Result<SimilarityGraph> {
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (line, toks) in data_lines(text) {
        if toks.len() != 2 && toks.len() != 3 {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line,
                msg: format!("expected '<u> <v> <w>', got {} fields", toks.len()),
            });
        }
        let u: usize = parse_field(toks[0], source, line, "node id")?;
        let v: usize = parse_field(toks[1], source, line, "node id")?;
        let w: f64 = match toks.get(2) {
            Some(t) => parse_field(t, source, line, "weight")?,
            None => 1.0,
        };
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((line, u, v, if unit_weights { 1.0 } else { w }));
    }
    let mut g = SimilarityGraph::with_nodes(max_id.map_or(0, |m| m + 1));
    for (line, u, v, w) in edges {
        g.add_edge(NodeId(u), NodeId(v), w).map_err(|e| Error::Parse {
            path: source.to_path_buf(),
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(g)
}

pub fn load_edge_list(path: impl AsRef<Path>, unit_weights: bool) -> Result<SimilarityGraph> {
    let path = path.as_ref();
    parse_edge_list(&read_text(path)?, path, unit_weights)
}

/// `(node, class)` pairs of a label or ground-truth file.
pub fn parse_class_file(text: &str, source: &Path) -> Result<Vec<(NodeId, usize)>> {
    let mut out = Vec::new();
    for (line, toks) in data_lines(text) {
        if toks.len() != 2 {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line,
                msg: "expected '<node-id> <class-index>'".into(),
            });
        }
        let id: usize = parse_field(toks[0], source, line, "node id")?;
        let class: usize = parse_field(toks[1], source, line, "class index")?;
        if out.iter().any(|&(n, _)| n == NodeId(id)) {
            return Err(Error::Parse {
                path: source.to_path_buf(),
                line,
                msg: format!("node {id} listed twice"),
            });
        }
        out.push((NodeId(id), class));
    }
    Ok(out)
}

pub fn load_class_file(path: impl AsRef<Path>) -> Result<Vec<(NodeId, usize)>> {
    let path = path.as_ref();
    parse_class_file(&read_text(path)?, path)
}

/// Builds a label assignment; `num_classes` defaults to `max class + 1`.
pub fn labels_from_pairs(pairs: &[(NodeId, usize)], num_classes: Option<usize>) -> Result<LabelAssignment> {
    let k = num_classes.unwrap_or_else(|| pairs.iter().map(|p| p.1 + 1).max().unwrap_or(1));
    let mut labels = LabelAssignment::new(k);
    for &(id, c) in pairs {
        labels.assign(id, c)?;
    }
    Ok(labels)
}

/// Row-aligned class vector for `graph`; every live node must be listed.
pub fn truth_for_graph(graph: &SimilarityGraph, pairs: &[(NodeId, usize)]) -> Result<Vec<usize>> {
    let mut truth = vec![None; graph.node_count()];
    for &(id, c) in pairs {
        let row = graph.row_of(id).ok_or(Error::UnknownNode(id))?;
        truth[row] = Some(c);
    }
    truth
        .into_iter()
        .enumerate()
        .map(|(r, c)| c.ok_or_else(|| Error::invalid(format!("no class for node {}", graph.id_at(r)))))
        .collect()
}

pub fn write_edge_list<W: Write>(graph: &SimilarityGraph, mut out: W) -> std::io::Result<()> {
    for (u, v, w) in graph.edges() {
        writeln!(out, "{u} {v} {w}")?;
    }
    Ok(())
}

pub fn write_class_file<W: Write>(
    pairs: impl IntoIterator<Item = (NodeId, usize)>,
    mut out: W,
) -> std::io::Result<()> {
    for (id, c) in pairs {
        writeln!(out, "{id} {c}")?;
    }
    Ok(())
}

pub fn write_positions<W: Write>(
    ids: &[NodeId],
    positions: &[[f64; 2]],
    mut out: W,
) -> std::io::Result<()> {
    for (id, p) in ids.iter().zip(positions) {
        writeln!(out, "{id} {} {}", p[0], p[1])?;
    }
    Ok(())
}

/// `node_id,f_0,...,f_{K-1},class`.
pub fn write_features_csv<W: Write>(
    ids: &[NodeId],
    f: &FeatureMatrix,
    classes: &[usize],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node_id".to_string()];
    header.extend((0..f.cols()).map(|k| format!("f_{k}")));
    header.push("class".into());
    w.write_record(&header)?;
    for (r, id) in ids.iter().enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend(f.row(r).iter().map(f64::to_string));
        rec.push(classes[r].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<NodeId>,
    pub features: FeatureMatrix,
    pub classes: Vec<usize>,
}

pub fn read_features_csv<R: Read>(input: R) -> Result<FeatureTable> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "node_id" || &headers[headers.len() - 1] != "class" {
        return Err(Error::invalid(format!("unexpected features header {headers:?}")));
    }
    let k = headers.len() - 2;
    let (mut ids, mut data, mut classes) = (Vec::new(), Vec::new(), Vec::new());
    let bad = |what: &str, v: &str| Error::invalid(format!("features csv: invalid {what} '{v}'"));
    for rec in rd.records() {
        let rec = rec?;
        ids.push(NodeId(rec[0].parse().map_err(|_| bad("node id", &rec[0]))?));
        for c in 1..=k {
            data.push(rec[c].parse::<f64>().map_err(|_| bad("feature", &rec[c]))?);
        }
        classes.push(rec[k + 1].parse().map_err(|_| bad("class", &rec[k + 1]))?);
    }
    Ok(FeatureTable {
        features: FeatureMatrix::from_vec(ids.len(), k, data)?,
        ids,
        classes,
    })
}
