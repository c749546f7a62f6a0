//! Synthetic Gaussian graphical model data with known ground-truth
//! structure, used as a desk-scale stand-in for private tabular cohorts.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::dataset::{Dataset, Value};
use crate::data::schema::{Feature, FeatureSchema};
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::linalg::{cholesky, solve_upper_from_lower};

/// Feature names x0..x{n-1}.
pub fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Samples a zero-mean multivariate Gaussian whose sparse precision matrix
/// has the sparsity pattern of a random graph with the given edge density.
///
/// The precision matrix has unit diagonal and off-diagonal magnitudes at
/// most 0.4, rescaled if needed to keep it diagonally dominant (hence
/// positive definite). Deterministic given the seed.
pub fn synth_ggm(
    n_features: usize,
    edge_density: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(Dataset, DependencyGraph)> {
    if n_features < 2 {
        return Err(Error::Config("synth_ggm: need at least 2 features".into()));
    }
    if !(0.0 < edge_density && edge_density < 1.0) {
        return Err(Error::Config("synth_ggm: edge density must be in (0,1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = feature_names(n_features);
    let mut adjacency = Array2::from_elem((n_features, n_features), false);
    let mut n_edges = 0;
    for i in 0..n_features {
        for j in (i + 1)..n_features {
            if rng.gen::<f64>() < edge_density {
                adjacency[[i, j]] = true;
                adjacency[[j, i]] = true;
                n_edges += 1;
            }
        }
    }
    if n_edges == 0 {
        return Err(Error::Config(format!(
            "synth_ggm: density {edge_density} produced zero edges for {n_features} features"
        )));
    }
    let graph = DependencyGraph::new(names, adjacency)?;
    let data = synth_ggm_with_graph(&graph, 0.4, n_samples, seed)?;
    Ok((data, graph))
}

/// Samples a Gaussian whose precision matrix has the given graph's sparsity
/// pattern: unit diagonal, `coupling` on each edge, rescaled to diagonal
/// dominance when necessary.
pub fn synth_ggm_with_graph(
    graph: &DependencyGraph,
    coupling: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_samples < 1 {
        return Err(Error::Config("synth_ggm: need at least 1 sample".into()));
    }
    if coupling.abs() > 0.4 {
        return Err(Error::Config("synth_ggm: |coupling| must be <= 0.4".into()));
    }
    let n = graph.n_nodes();
    let mut theta = Array2::<f64>::eye(n);
    for (i, j) in graph.edges() {
        theta[[i, j]] = coupling;
        theta[[j, i]] = coupling;
    }
    enforce_diagonal_dominance(&mut theta);
    let l = cholesky(&theta)?;
    // With Theta = L L^T, solving L^T x = z for z ~ N(0, I) yields
    // x ~ N(0, Theta^{-1}).
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5a17)); // separate stream from structure draw
    let mut rows = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let z: Array1<f64> = Array1::from_iter((0..n).map(|_| StandardNormal.sample(&mut rng)));
        let x = solve_upper_from_lower(&l, &z);
        rows.push(x.iter().map(|&v| Value::Float(v)).collect());
    }
    let schema = FeatureSchema::new(
        graph
            .node_names()
            .iter()
            .map(|n| Feature::continuous(n.clone()))
            .collect(),
    )?;
    Dataset::new(schema, rows, format!("ggm_{n}f_seed{seed}"))
}

/// Scales off-diagonal entries down so each row is strictly diagonally
/// dominant.
fn enforce_diagonal_dominance(theta: &mut Array2<f64>) {
    let n = theta.nrows();
    let mut max_row_sum: f64 = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                s += theta[[i, j]].abs();
            }
        }
        max_row_sum = max_row_sum.max(s);
    }
    if max_row_sum >= 0.95 {
        let scale = 0.95 / max_row_sum;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    theta[[i, j]] *= scale;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::encode::encode_dataset;
    use crate::linalg::spd_inverse;

    fn sample_covariance(values: &Array2<f64>) -> Array2<f64> {
        let m = values.nrows() as f64;
        let means = values.sum_axis(ndarray::Axis(0)) / m;
        let mut centered = values.clone();
        for mut row in centered.rows_mut() {
            row -= &means;
        }
        centered.t().dot(&centered) / m
    }

    /// Raw (unnormalized) value matrix of an all-continuous dataset.
    fn raw_matrix(d: &Dataset) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((d.n_rows(), d.schema.n_features()));
        for (i, row) in d.rows().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[[i, j]] = v.as_float().unwrap();
            }
        }
        out
    }

    #[test]
    fn chain_precision_yields_conditional_independence() {
        // Theta = [[1,.4,0],[.4,1,.4],[0,.4,1]]: features 0 and 2 are
        // conditionally independent given 1, so the empirical partial
        // correlation of (0,2) must vanish. Oracle: partial correlation
        // computed from the inverse sample covariance.
        let graph = DependencyGraph::chain(feature_names(3)).unwrap();
        let d = synth_ggm_with_graph(&graph, 0.4, 5000, 7).unwrap();
        let cov = sample_covariance(&raw_matrix(&d));
        let theta = spd_inverse(&cov).unwrap();
        let rho_02 = -theta[[0, 2]] / (theta[[0, 0]] * theta[[2, 2]]).sqrt();
        assert!(rho_02.abs() < 0.05, "partial correlation {rho_02}");
        // The coupled pairs stay visible.
        let rho_01 = -theta[[0, 1]] / (theta[[0, 0]] * theta[[1, 1]]).sqrt();
        assert!(rho_01.abs() > 0.2, "partial correlation {rho_01}");
    }

    #[test]
    fn deterministic_under_seed() {
        let (a, ga) = synth_ggm(6, 0.4, 50, 11).unwrap();
        let (b, gb) = synth_ggm(6, 0.4, 50, 11).unwrap();
        assert_eq!(a.rows(), b.rows());
        assert_eq!(ga, gb);
    }

    #[test]
    fn two_features_forced_edge() {
        let (_, g) = synth_ggm(2, 0.999, 10, 3).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn sample_covariance_converges_to_sigma() {
        // For a large sample the covariance approaches Theta^{-1}.
        let graph = DependencyGraph::chain(feature_names(4)).unwrap();
        let d = synth_ggm_with_graph(&graph, 0.4, 50_000, 13).unwrap();
        let cov = sample_covariance(&raw_matrix(&d));
        let mut theta = Array2::<f64>::eye(4);
        for (i, j) in graph.edges() {
            theta[[i, j]] = 0.4;
            theta[[j, i]] = 0.4;
        }
        let sigma = spd_inverse(&theta).unwrap();
        let max_diff = (&cov - &sigma)
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        assert!(max_diff < 0.05, "max deviation {max_diff}");
    }

    #[test]
    fn encodes_cleanly() {
        let (d, _) = synth_ggm(5, 0.5, 200, 21).unwrap();
        let e = encode_dataset(&d).unwrap();
        assert_eq!(e.dim(), 5);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(synth_ggm(1, 0.5, 10, 0).is_err());
        assert!(synth_ggm(4, 0.0, 10, 0).is_err());
        assert!(synth_ggm(4, 1.0, 10, 0).is_err());
    }
}
