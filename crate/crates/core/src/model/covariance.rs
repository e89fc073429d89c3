use ndarray::Array2;

use super::{GlgParams, TreeTopology};
use crate::error::{GlgError, Result};

fn check_levels(params: &GlgParams, topology: &TreeTopology) -> Result<()> {
    if params.levels() != topology.levels() {
        return Err(GlgError::dim(format!(
            "parameters describe {} levels but the tree has {}",
            params.levels(),
            topology.levels()
        )));
    }
    Ok(())
}

/// Regression coefficient linking node `j` (not the root) to its parent.
fn beta_of(params: &GlgParams, topology: &TreeTopology, j: usize) -> f64 {
    params.beta_at(topology.level_of(j) - 1)
}

/// `Cov(s_i, s_j)` for nodes of one tree.
///
/// With `h` the deepest common ancestor, this is `sigma_sq(level(h) - 1)`
/// times the product of the `beta` coefficients along both paths from `h`
/// down to `i` and `j`.
pub fn hidden_covariance(params: &GlgParams, topology: &TreeTopology, i: usize, j: usize) -> Result<f64> {
    check_levels(params, topology)?;
    topology.check_node(i)?;
    topology.check_node(j)?;
    let sigma_sq = params.level_moments().sigma_sq;
    let (mut a, mut b) = (i, j);
    let mut factor = 1.0;
    while topology.level_of(a) > topology.level_of(b) {
        factor *= beta_of(params, topology, a);
        a = topology.parent(a).unwrap_or(a);
    }
    while topology.level_of(b) > topology.level_of(a) {
        factor *= beta_of(params, topology, b);
        b = topology.parent(b).unwrap_or(b);
    }
    while a != b {
        factor *= beta_of(params, topology, a) * beta_of(params, topology, b);
        a = topology.parent(a).unwrap_or(a);
        b = topology.parent(b).unwrap_or(b);
    }
    Ok(factor * sigma_sq[topology.level_of(a) - 1])
}

/// Dense covariance matrix of the hidden states of one tree.
pub fn covariance_matrix(params: &GlgParams, topology: &TreeTopology) -> Result<Array2<f64>> {
    check_levels(params, topology)?;
    let n = topology.node_count();
    let mut c = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = hidden_covariance(params, topology, i, j)?;
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    Ok(c)
}

/// Sparse precision matrix of the hidden states of one tree.
///
/// Nonzeros are the diagonal and the (child, parent) couplings; `coupling[j]`
/// is the entry at `(j, parent(j))` and is zero for the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePrecision {
    pub topology: TreeTopology,
    pub diag: Vec<f64>,
    pub coupling: Vec<f64>,
    /// Prior mean of every node, `mu(level - 1)`.
    pub mean: Vec<f64>,
    log_det: f64,
}

impl TreePrecision {
    pub fn new(params: &GlgParams, topology: &TreeTopology) -> Result<Self> {
        check_levels(params, topology)?;
        let n = topology.node_count();
        let mu = params.level_moments().mu;
        let mut diag = vec![0.0; n];
        let mut coupling = vec![0.0; n];
        let mut mean = vec![0.0; n];
        let mut log_det = 0.0;
        for i in 0..n {
            let r = topology.level_of(i);
            let k_own = params.kappa_sq_at(r - 1);
            diag[i] = 1.0 / k_own;
            log_det -= k_own.ln();
            mean[i] = mu[r - 1];
            let nc = topology.children(i).len();
            if nc > 0 {
                let b = params.beta_at(r);
                diag[i] += nc as f64 * b * b / params.kappa_sq_at(r);
            }
            if r > 1 {
                coupling[i] = -params.beta_at(r - 1) / k_own;
            }
        }
        Ok(TreePrecision { topology: topology.clone(), diag, coupling, mean, log_det })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `y = Delta x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for j in 1..self.len() {
            if let Some(p) = self.topology.parent(j) {
                y[j] += self.coupling[j] * x[p];
                y[p] += self.coupling[j] * x[j];
            }
        }
        y
    }

    /// `(s - mean)^T Delta (s - mean)`.
    pub fn quadratic_form(&self, s: &[f64]) -> f64 {
        let d: Vec<f64> = s.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.mul_vec(&d).iter().zip(&d).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.diag[i];
            if let Some(p) = self.topology.parent(i) {
                m[[i, p]] = self.coupling[i];
                m[[p, i]] = self.coupling[i];
            }
        }
        m
    }
}

/// Convenience wrapper for [`TreePrecision::new`].
pub fn precision_matrix(params: &GlgParams, topology: &TreeTopology) -> Result<TreePrecision> {
    TreePrecision::new(params, topology)
}
