//! Closure order on similarity classes and bundles.
//!
//! `closure_leq(J, J2)` holds when the class of `J` lies in the closure of
//! the class of `J2`: same eigenvalues with the same multiplicities, and for
//! every eigenvalue the running sums of the Weyr characteristic of `J` are at
//! least those of `J2`.
//!
//! Bundles are ordered through explicit down-moves (dominance steps on one
//! eigenvalue and coalescence of two eigenvalues) closed under transitivity.
//! Graphs keep only covering edges.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Result, StrataError};
use crate::structure::{
    all_bundles, canonical_bundle_labeling, jordan_types_with, BundleType, EigLabel, JordanType,
    Partition,
};

/// Largest matrix order accepted by the graph builders.
pub const MAX_GRAPH_ORDER: usize = 8;

/// Class of `j` lies in the closure of the class of `j2`.
pub fn closure_leq(j: &JordanType, j2: &JordanType) -> Result<bool> {
    if j.order() != j2.order() {
        return Err(StrataError::SizeMismatch { expected: j.order(), found: j2.order() });
    }
    if j.label_count() != j2.label_count() {
        return Ok(false);
    }
    for (label, p) in j.entries() {
        match j2.partition(label) {
            Some(q) if q.total() == p.total() => {
                if !p.weyr().dominates(&q.weyr()) {
                    return Ok(false);
                }
            }
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Same test for two partitions of one eigenvalue.
pub fn partition_leq(p: &Partition, q: &Partition) -> bool {
    p.total() == q.total() && p.weyr().dominates(&q.weyr())
}

/// Whether the strata are classes or bundles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Classes,
    Bundles,
}

/// Eigenvalue labels used for a class graph.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelPattern {
    /// Every Jordan type of order `n`, identified up to renaming eigenvalues.
    AllSymbolic,
    /// Fixed eigenvalues with fixed algebraic multiplicities.
    Multiplicities(Vec<(EigLabel, usize)>),
}

impl LabelPattern {
    /// A single eigenvalue 0 of multiplicity `n`.
    pub fn nilpotent(n: usize) -> Self {
        LabelPattern::Multiplicities(vec![(EigLabel::Concrete(num_complex::Complex64::new(0.0, 0.0)), n)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub jordan: JordanType,
    /// ASCII compact notation.
    pub notation: String,
    /// Greek rendering with superscripts.
    pub display: String,
    pub dim: usize,
}

/// Hasse diagram of a closure order. An edge `(a, b)` means stratum `a`
/// lies in the closure of stratum `b`.
#[derive(Clone, Debug)]
pub struct ClosureGraph {
    pub kind: GraphKind,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    reach: Vec<Vec<bool>>,
}

impl ClosureGraph {
    /// Builds the graph from strata and their reflexive-transitive order.
    fn from_order<F>(kind: GraphKind, mut strata: Vec<(JordanType, usize)>, leq: F) -> Self
    where
        F: Fn(&JordanType, &JordanType) -> bool,
    {
        strata.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.to_compact().cmp(&b.0.to_compact())));
        let vertices: Vec<Vertex> = strata
            .into_iter()
            .map(|(jordan, dim)| Vertex {
                notation: jordan.to_compact(),
                display: jordan.display(),
                jordan,
                dim,
            })
            .collect();
        let v = vertices.len();
        let reach: Vec<Vec<bool>> = (0..v)
            .map(|i| (0..v).map(|j| i == j || leq(&vertices[i].jordan, &vertices[j].jordan)).collect())
            .collect();
        let edges = hasse(&reach);
        ClosureGraph { kind, vertices, edges, reach }
    }

    /// Builds the graph from a down-move relation, closing it transitively.
    fn from_moves<F>(kind: GraphKind, strata: Vec<(JordanType, usize)>, down: F) -> Self
    where
        F: Fn(&JordanType) -> Vec<JordanType>,
    {
        let index: BTreeMap<JordanType, usize> =
            strata.iter().enumerate().map(|(i, (j, _))| (j.clone(), i)).collect();
        let v = strata.len();
        // below[b][a]: a is reachable from b by down-moves.
        let mut below = vec![vec![false; v]; v];
        for (b, (jb, _)) in strata.iter().enumerate() {
            let mut queue = VecDeque::from([jb.clone()]);
            below[b][b] = true;
            while let Some(cur) = queue.pop_front() {
                for next in down(&cur) {
                    if let Some(&a) = index.get(&next) {
                        if !below[b][a] {
                            below[b][a] = true;
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        let lookup = |x: &JordanType, y: &JordanType| -> bool {
            match (index.get(x), index.get(y)) {
                (Some(&a), Some(&b)) => below[b][a],
                _ => false,
            }
        };
        Self::from_order(kind, strata, lookup)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Index of the vertex carrying this notation (compact or display).
    pub fn find_notation(&self, notation: &str) -> Option<usize> {
        self.vertices
            .iter()
            .position(|v| v.notation == notation || v.display == notation)
    }

    /// Index of the vertex representing `t`; bundles and quotiented class
    /// graphs match up to renaming of eigenvalues.
    pub fn find(&self, t: &JordanType) -> Option<usize> {
        if let Some(i) = self.vertices.iter().position(|v| &v.jordan == t) {
            return Some(i);
        }
        let key = canonical_bundle_labeling(t);
        self.vertices
            .iter()
            .position(|v| canonical_bundle_labeling(&v.jordan) == key)
    }

    /// Directed path from `a` to `b`, including the empty path.
    pub fn reachable(&self, a: usize, b: usize) -> bool {
        self.reach.get(a).and_then(|row| row.get(b)).copied().unwrap_or(false)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// Edge list rendered with display names, for comparisons in tests.
    pub fn display_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.vertices[a].display.clone(), self.vertices[b].display.clone()))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(id, v)| json!({"id": id, "notation": v.notation, "display": v.display, "dim": v.dim}))
            .collect();
        let edges: Vec<Value> = self.edges.iter().map(|&(a, b)| json!([a, b])).collect();
        let kind = match self.kind {
            GraphKind::Classes => "classes",
            GraphKind::Bundles => "bundles",
        };
        json!({"kind": kind, "vertices": vertices, "edges": edges})
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph closure {\n  rankdir=BT;\n");
        for (id, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{id} [label=\"{} (dim {})\"];", v.display, v.dim);
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "  v{a} -> v{b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Transitive reduction of a reflexive, transitive relation.
fn hasse(reach: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let v = reach.len();
    let mut edges = Vec::new();
    for a in 0..v {
        for b in 0..v {
            if a == b || !reach[a][b] || reach[b][a] {
                continue;
            }
            let covered = (0..v).any(|k| k != a && k != b && reach[a][k] && reach[k][b] && !reach[k][a] && !reach[b][k]);
            if !covered {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GRAPH_ORDER {
        return Err(StrataError::OutOfBounds { n, min: 1, max: MAX_GRAPH_ORDER });
    }
    Ok(())
}

/// Closure graph of similarity classes, annotated with orbit dimensions.
pub fn build_class_graph(n: usize, labels: &LabelPattern) -> Result<ClosureGraph> {
    check_order(n)?;
    match labels {
        LabelPattern::Multiplicities(pattern) => {
            let total: usize = pattern.iter().map(|(_, m)| m).sum();
            if total != n {
                return Err(StrataError::SizeMismatch { expected: n, found: total });
            }
            let names: Vec<EigLabel> = pattern.iter().map(|(l, _)| *l).collect();
            let mults: Vec<usize> = pattern.iter().map(|(_, m)| *m).collect();
            let strata = jordan_types_with(&names, &mults)?
                .into_iter()
                .map(|t| {
                    let d = t.orbit_dim();
                    (t, d)
                })
                .collect();
            Ok(ClosureGraph::from_order(GraphKind::Classes, strata, |a, b| {
                closure_leq(a, b).unwrap_or(false)
            }))
        }
        LabelPattern::AllSymbolic => {
            let strata = all_bundles(n)
                .into_iter()
                .map(|b| {
                    let t = b.into_jordan();
                    let d = t.orbit_dim();
                    (t, d)
                })
                .collect();
            Ok(ClosureGraph::from_order(GraphKind::Classes, strata, closure_leq_up_to_renaming))
        }
    }
}

/// `closure_leq(a, σ(b))` for some bijection σ of eigenvalue labels.
pub fn closure_leq_up_to_renaming(a: &JordanType, b: &JordanType) -> bool {
    if a.order() != b.order() || a.label_count() != b.label_count() {
        return false;
    }
    let pa: Vec<&Partition> = a.entries().values().collect();
    let pb: Vec<&Partition> = b.entries().values().collect();
    let mut used = vec![false; pb.len()];
    match_labels(&pa, &pb, 0, &mut used)
}

fn match_labels(pa: &[&Partition], pb: &[&Partition], i: usize, used: &mut [bool]) -> bool {
    if i == pa.len() {
        return true;
    }
    for j in 0..pb.len() {
        if !used[j] && partition_leq(pa[i], pb[j]) {
            used[j] = true;
            if match_labels(pa, pb, i + 1, used) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

/// Bundles immediately below `b`: dominance steps on one eigenvalue and
/// coalescence of two eigenvalues by part-wise addition of block sizes.
pub fn bundle_down_moves(b: &BundleType) -> Vec<BundleType> {
    let parts: Vec<Partition> = b.partitions().into_iter().cloned().collect();
    let mut out = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        for q in Partition::all(p.total()) {
            if &q != p && partition_leq(&q, p) {
                let mut next = parts.clone();
                next[i] = q;
                if let Ok(bt) = BundleType::from_partitions(next) {
                    out.push(bt);
                }
            }
        }
    }
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            let mut next: Vec<Partition> = parts
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, p)| p.clone())
                .collect();
            next.push(parts[i].partwise_sum(&parts[j]));
            if let Ok(bt) = BundleType::from_partitions(next) {
                out.push(bt);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Closure graph of similarity bundles, annotated with bundle dimensions.
pub fn build_bundle_graph(n: usize) -> Result<ClosureGraph> {
    check_order(n)?;
    let strata = all_bundles(n)
        .into_iter()
        .map(|b| {
            let d = b.dim();
            (b.into_jordan(), d)
        })
        .collect();
    Ok(ClosureGraph::from_moves(GraphKind::Bundles, strata, |t| {
        bundle_down_moves(&canonical_bundle_labeling(t))
            .into_iter()
            .map(BundleType::into_jordan)
            .collect()
    }))
}

/// Bundle of `t` lies in the closure of the bundle of `t2`, read off `g`.
pub fn bundle_reachable(g: &ClosureGraph, t: &JordanType, t2: &JordanType) -> Option<bool> {
    Some(g.reachable(g.find(t)?, g.find(t2)?))
}

/// Free function form of [`ClosureGraph::reachable`].
pub fn reachable(g: &ClosureGraph, a: usize, b: usize) -> bool {
    g.reachable(a, b)
}
