//! Feature-level dependency graphs: representation, the master-side merge,
//! complement masks in encoded-unit space, a precision-matrix recovery
//! baseline, and thresholding of learned path matrices.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::encode::EncodedMatrix;
use crate::data::schema::FeatureSchema;
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;

/// Symmetric feature-level adjacency with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    node_names: Vec<String>,
    adjacency: Array2<bool>,
}

impl DependencyGraph {
    pub fn new(node_names: Vec<String>, adjacency: Array2<bool>) -> Result<Self> {
        let n = node_names.len();
        if adjacency.nrows() != n || adjacency.ncols() != n {
            return Err(Error::Schema(format!(
                "adjacency is {}x{}, expected {n}x{n}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        let distinct: BTreeSet<_> = node_names.iter().collect();
        if distinct.len() != n {
            return Err(Error::Schema("graph node names are not unique".into()));
        }
        for i in 0..n {
            if adjacency[[i, i]] {
                return Err(Error::Schema(format!("graph has a self-loop at '{}'", node_names[i])));
            }
            for j in 0..n {
                if adjacency[[i, j]] != adjacency[[j, i]] {
                    return Err(Error::Schema(format!(
                        "adjacency is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DependencyGraph {
            node_names,
            adjacency,
        })
    }

    /// Graph with the given nodes and no edges.
    pub fn empty(node_names: Vec<String>) -> Result<Self> {
        let n = node_names.len();
        DependencyGraph::new(node_names, Array2::from_elem((n, n), false))
    }

    /// Graph from named edges.
    pub fn from_edges(node_names: Vec<String>, edges: &[(&str, &str)]) -> Result<Self> {
        let mut g = DependencyGraph::empty(node_names)?;
        for (a, b) in edges {
            g.add_edge_by_name(a, b)?;
        }
        Ok(g)
    }

    /// Chain graph x0 - x1 - ... - x{n-1} over the given nodes in order.
    pub fn chain(node_names: Vec<String>) -> Result<Self> {
        let n = node_names.len();
        let mut adjacency = Array2::from_elem((n, n), false);
        for i in 0..n.saturating_sub(1) {
            adjacency[[i, i + 1]] = true;
            adjacency[[i + 1, i]] = true;
        }
        DependencyGraph::new(node_names, adjacency)
    }

    /// Complete graph over the given nodes.
    pub fn complete(node_names: Vec<String>) -> Result<Self> {
        let n = node_names.len();
        let mut adjacency = Array2::from_elem((n, n), true);
        for i in 0..n {
            adjacency[[i, i]] = false;
        }
        DependencyGraph::new(node_names, adjacency)
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[[i, j]]
    }

    pub fn add_edge_by_name(&mut self, a: &str, b: &str) -> Result<()> {
        let i = self
            .node_index(a)
            .ok_or_else(|| Error::Schema(format!("unknown node '{a}'")))?;
        let j = self
            .node_index(b)
            .ok_or_else(|| Error::Schema(format!("unknown node '{b}'")))?;
        if i == j {
            return Err(Error::Schema(format!("self-loop on '{a}' not allowed")));
        }
        self.adjacency[[i, j]] = true;
        self.adjacency[[j, i]] = true;
        Ok(())
    }

    /// Edges as index pairs with i < j.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.adjacency[[i, j]] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges().len()
    }

    /// Edges as sorted name pairs, in lexicographic order.
    pub fn edge_names(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .edges()
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (self.node_names[i].clone(), self.node_names[j].clone());
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect();
        out.sort();
        out
    }

    /// Graph restricted to `names` (node order follows this graph), keeping
    /// edges with both endpoints retained.
    pub fn restrict(&self, names: &[String]) -> Result<DependencyGraph> {
        let wanted: BTreeSet<&str> = names.iter().map(|s| s.as_str()).collect();
        let keep: Vec<usize> = self
            .node_names
            .iter()
            .enumerate()
            .filter(|(_, n)| wanted.contains(n.as_str()))
            .map(|(i, _)| i)
            .collect();
        if keep.len() != wanted.len() {
            return Err(Error::Schema("restrict: some names are not graph nodes".into()));
        }
        let n = keep.len();
        let mut adjacency = Array2::from_elem((n, n), false);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                adjacency[[a, b]] = self.adjacency[[i, j]];
            }
        }
        DependencyGraph::new(keep.iter().map(|&i| self.node_names[i].clone()).collect(), adjacency)
    }

    /// Canonical form for semantic comparison: sorted node names plus the
    /// sorted set of name edges.
    pub fn canonical(&self) -> (Vec<String>, Vec<(String, String)>) {
        let mut nodes = self.node_names.clone();
        nodes.sort();
        (nodes, self.edge_names())
    }

    /// Edge-set precision/recall/F1 against a reference graph (matched by
    /// node names).
    pub fn f1_against(&self, truth: &DependencyGraph) -> GraphScore {
        let mine: BTreeSet<(String, String)> = self.edge_names().into_iter().collect();
        let theirs: BTreeSet<(String, String)> = truth.edge_names().into_iter().collect();
        let tp = mine.intersection(&theirs).count() as f64;
        let fp = mine.difference(&theirs).count() as f64;
        let fn_ = theirs.difference(&mine).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        GraphScore {
            precision,
            recall,
            f1,
            spurious_edges: fp as usize,
            missed_edges: fn_ as usize,
        }
    }
}

/// Edge-set recovery quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub spurious_edges: usize,
    pub missed_edges: usize,
}

/// Versioned on-disk / on-wire form of a dependency graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub version: u32,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

pub const GRAPH_DOC_VERSION: u32 = 1;

impl DependencyGraph {
    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            version: GRAPH_DOC_VERSION,
            nodes: self.node_names.clone(),
            edges: self.edge_names(),
        }
    }

    pub fn from_doc(doc: &GraphDoc) -> Result<DependencyGraph> {
        if doc.version != GRAPH_DOC_VERSION {
            return Err(Error::Serialize(format!(
                "unsupported graph document version {}",
                doc.version
            )));
        }
        let mut g = DependencyGraph::empty(doc.nodes.clone())?;
        for (a, b) in &doc.edges {
            g.add_edge_by_name(a, b)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<DependencyGraph> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        DependencyGraph::from_doc(&doc)
    }
}

/// Nonnegative `D x D` mask in encoded-unit space with block structure
/// consistent with a schema's encoding map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitMask {
    pub values: Array2<f64>,
}

impl UnitMask {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Master-side merge: node set is the intersection of all input node sets
/// (lexicographic order), and an edge is kept if it is present in any input
/// graph with both endpoints in the intersection.
pub fn merge_graphs(graphs: &[DependencyGraph]) -> Result<DependencyGraph> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::Schema("merge_graphs: no input graphs".into()))?;
    let mut common: BTreeSet<String> = first.node_names.iter().cloned().collect();
    for g in &graphs[1..] {
        let names: BTreeSet<String> = g.node_names.iter().cloned().collect();
        common = common.intersection(&names).cloned().collect();
    }
    if common.is_empty() {
        return Err(Error::Schema("merge_graphs: no common features".into()));
    }
    let nodes: Vec<String> = common.into_iter().collect(); // BTreeSet gives lexicographic order
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = nodes.len();
    let mut adjacency = Array2::from_elem((n, n), false);
    for g in graphs {
        for (i, j) in g.edges() {
            let (a, b) = (&g.node_names[i], &g.node_names[j]);
            if let (Some(&ia), Some(&ib)) = (index.get(a.as_str()), index.get(b.as_str())) {
                adjacency[[ia, ib]] = true;
                adjacency[[ib, ia]] = true;
            }
        }
    }
    DependencyGraph::new(nodes, adjacency)
}

/// Expands the feature-level complement of `g` to encoded-unit space.
///
/// Entry (a, b) is 1 when there is no edge between the features owning units
/// `a` and `b` (penalized pair), 0 otherwise. Diagonal feature blocks are 0
/// when `include_self` is true (self-dependence allowed) and 1 otherwise
/// (self paths penalized). Every schema feature must be a graph node.
pub fn complement_mask(
    g: &DependencyGraph,
    schema: &FeatureSchema,
    include_self: bool,
) -> Result<UnitMask> {
    let feature_nodes: Vec<usize> = schema
        .features()
        .iter()
        .map(|f| {
            g.node_index(&f.name)
                .ok_or_else(|| Error::Schema(format!("feature '{}' is not a graph node", f.name)))
        })
        .collect::<Result<_>>()?;
    let dim = schema.encoded_dim();
    let mut values = Array2::<f64>::zeros((dim, dim));
    for fa in 0..schema.n_features() {
        for fb in 0..schema.n_features() {
            let penalized = if fa == fb {
                !include_self
            } else {
                !g.has_edge(feature_nodes[fa], feature_nodes[fb])
            };
            if penalized {
                let ra = schema.encoded_range(fa);
                let rb = schema.encoded_range(fb);
                for a in ra {
                    for b in rb.clone() {
                        values[[a, b]] = 1.0;
                    }
                }
            }
        }
    }
    Ok(UnitMask { values })
}

/// Unit-level mask selecting the diagonal feature blocks (self-dependency
/// pairs), used by the graph-revealer objective.
pub fn self_block_mask(schema: &FeatureSchema) -> UnitMask {
    let dim = schema.encoded_dim();
    let mut values = Array2::<f64>::zeros((dim, dim));
    for f in 0..schema.n_features() {
        let range = schema.encoded_range(f);
        for a in range.clone() {
            for b in range.clone() {
                values[[a, b]] = 1.0;
            }
        }
    }
    UnitMask { values }
}

/// Unit-level expansion of the adjacency itself (1 where an edge exists).
pub fn adjacency_mask(g: &DependencyGraph, schema: &FeatureSchema) -> Result<UnitMask> {
    let complement = complement_mask(g, schema, true)?;
    let dim = complement.dim();
    let mut values = Array2::<f64>::ones((dim, dim));
    values -= &complement.values;
    // The include_self complement leaves diagonal blocks at 0, so the
    // difference marks them as 1; clear them to keep pure adjacency.
    for f in 0..schema.n_features() {
        let range = schema.encoded_range(f);
        for a in range.clone() {
            for b in range.clone() {
                values[[a, b]] = 0.0;
            }
        }
    }
    Ok(UnitMask { values })
}

/// Baseline structure recovery: ridge-regularized precision-matrix
/// thresholding on partial correlations.
///
/// The sample covariance of the encoded matrix gets `ridge * I` added, is
/// inverted, and converted to partial correlations
/// `rho_ij = -theta_ij / sqrt(theta_ii * theta_jj)`. The feature-level score
/// is the max `|rho|` over the unit block; an edge is emitted when it
/// exceeds `threshold`.
pub fn recover_graph_precision(
    x: &EncodedMatrix,
    ridge: f64,
    threshold: f64,
) -> Result<DependencyGraph> {
    if ridge <= 0.0 {
        return Err(Error::Config("recover_graph_precision: ridge must be > 0".into()));
    }
    let m = x.n_rows() as f64;
    let dim = x.dim();
    let means = x.column_means();
    let mut centered = x.values.clone();
    for mut row in centered.rows_mut() {
        row -= &means;
    }
    let mut cov = centered.t().dot(&centered) / m;
    for i in 0..dim {
        cov[[i, i]] += ridge;
    }
    let theta = spd_inverse(&cov)
        .map_err(|e| Error::Numeric(format!("covariance not invertible after ridge: {e}")))?;
    let mut partial = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                partial[[i, j]] = -theta[[i, j]] / (theta[[i, i]] * theta[[j, j]]).sqrt();
            }
        }
    }
    let schema = &x.schema;
    let nf = schema.n_features();
    let mut adjacency = Array2::from_elem((nf, nf), false);
    for fa in 0..nf {
        for fb in (fa + 1)..nf {
            let ra = schema.encoded_range(fa);
            let rb = schema.encoded_range(fb);
            let mut score: f64 = 0.0;
            for a in ra {
                for b in rb.clone() {
                    score = score.max(partial[[a, b]].abs());
                }
            }
            if score > threshold {
                adjacency[[fa, fb]] = true;
                adjacency[[fb, fa]] = true;
            }
        }
    }
    DependencyGraph::new(schema.feature_names(), adjacency)
}

/// Converts a learned path matrix into a feature-level dependency graph.
///
/// The matrix is symmetrized elementwise, feature-level scores are the max
/// over each unit block, and an edge is emitted when the score exceeds
/// `tau`. The diagonal stays zero.
pub fn graph_from_path_matrix(
    s_nn: &Array2<f64>,
    schema: &FeatureSchema,
    tau: f64,
) -> Result<DependencyGraph> {
    let dim = schema.encoded_dim();
    if s_nn.nrows() != dim || s_nn.ncols() != dim {
        return Err(Error::Schema(format!(
            "path matrix is {}x{}, schema encodes to {dim}",
            s_nn.nrows(),
            s_nn.ncols()
        )));
    }
    let sym = symmetrize(s_nn);
    let nf = schema.n_features();
    let mut adjacency = Array2::from_elem((nf, nf), false);
    for fa in 0..nf {
        for fb in (fa + 1)..nf {
            let ra = schema.encoded_range(fa);
            let rb = schema.encoded_range(fb);
            let mut score: f64 = 0.0;
            for a in ra {
                for b in rb.clone() {
                    score = score.max(sym[[a, b]]);
                }
            }
            if score > tau {
                adjacency[[fa, fb]] = true;
                adjacency[[fb, fa]] = true;
            }
        }
    }
    DependencyGraph::new(schema.feature_names(), adjacency)
}

/// Elementwise symmetrization `(S + S^T) / 2`.
pub fn symmetrize(s: &Array2<f64>) -> Array2<f64> {
    (s + &s.t()) * 0.5
}
