//! MAP estimation of hidden states.
//!
//! For fixed parameters the objective
//! `f(s) = -(s - mu)' Delta (s - mu) / 2 - sum(w_i^2 exp(-s_i) + s_i) / 2`
//! is strictly concave in `s`, so damped Newton from the prior mean converges
//! to the unique maximizer. The Newton system `(Delta + D) x = g`, with `D`
//! diagonal, has the sparsity of the tree and is solved by eliminating leaves
//! towards the root and substituting back down.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{GlgError, Result};
use crate::model::{GlgParams, StateField, TreePrecision};
use crate::wavelet::WaveletForest;

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    /// Stop when the largest gradient component is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// States are kept above `mu - floor_sigmas * sigma` of their level.
    pub floor_sigmas: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { tol: 1e-10, max_iter: 100, floor_sigmas: 10.0 }
    }
}

/// Outcome for one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMap {
    pub states: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    /// Nodes held at the floor.
    pub floor_hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapResult {
    pub states: StateField,
    /// `(tree, description)` for trees that did not reach the tolerance.
    pub failures: Vec<(usize, String)>,
    pub floor_hits: usize,
    pub max_iterations: usize,
}

/// `f(s)` above, without normalizing constants.
pub fn map_log_posterior(precision: &TreePrecision, states: &[f64], wavelets: &[f64]) -> f64 {
    let lik: f64 = states.iter().zip(wavelets).map(|(&s, &w)| w * w * (-s).exp() + s).sum();
    -0.5 * (precision.quadratic_form(states) + lik)
}

/// `grad f(s) = -Delta (s - mu) + (w^2 exp(-s) - 1) / 2`.
pub fn map_gradient(precision: &TreePrecision, states: &[f64], wavelets: &[f64]) -> Vec<f64> {
    let centred: Vec<f64> = states.iter().zip(&precision.mean).map(|(s, m)| s - m).collect();
    let q = precision.mul_vec(&centred);
    q.iter()
        .zip(states.iter().zip(wavelets))
        .map(|(q, (&s, &w))| -q + 0.5 * (w * w * (-s).exp() - 1.0))
        .collect()
}

/// Solves `A x = b` for symmetric `A` with diagonal `diag` and entries
/// `coupling[j]` at `(j, parent(j))`, by leaf-to-root elimination.
pub fn solve_tree_system(precision: &TreePrecision, diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let topo = &precision.topology;
    let n = diag.len();
    let mut a = diag.to_vec();
    let mut b = rhs.to_vec();
    for j in (1..n).rev() {
        if let Some(p) = topo.parent(j) {
            let c = precision.coupling[j];
            a[p] -= c * c / a[j];
            b[p] -= c * b[j] / a[j];
        }
    }
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = match topo.parent(j) {
            Some(p) => (b[j] - precision.coupling[j] * x[p]) / a[j],
            None => b[j] / a[j],
        };
    }
    x
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton for one tree. `floor[i]` bounds `s_i` from below.
pub fn map_tree(precision: &TreePrecision, wavelets: &[f64], floor: &[f64], config: &MapConfig) -> TreeMap {
    let n = precision.len();
    let mut s = precision.mean.clone();
    let mut f = map_log_posterior(precision, &s, wavelets);
    let mut g = map_gradient(precision, &s, wavelets);
    let mut iterations = 0;
    let mut floor_hits = 0;
    while iterations < config.max_iter && inf_norm(&g) >= config.tol {
        iterations += 1;
        let d: Vec<f64> = (0..n).map(|i| precision.diag[i] + 0.5 * wavelets[i].powi(2) * (-s[i]).exp()).collect();
        let step = solve_tree_system(precision, &d, &g);
        let mut t = 1.0;
        let mut moved = false;
        // once the predicted gain is below the resolution of f, objective
        // comparisons are noise; take the full step if it shrinks the gradient
        let gain: f64 = 0.5 * g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
        if gain <= 16.0 * f64::EPSILON * f.abs().max(1.0) {
            let cand: Vec<f64> = s.iter().zip(&step).map(|(a, b)| a + b).collect();
            let gc = map_gradient(precision, &cand, wavelets);
            if inf_norm(&gc) < inf_norm(&g) {
                f = map_log_posterior(precision, &cand, wavelets);
                moved = cand != s;
                s = cand;
                g = gc;
                if !moved {
                    break;
                }
                continue;
            }
        }
        for _ in 0..60 {
            let cand: Vec<f64> = s.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let fc = map_log_posterior(precision, &cand, wavelets);
            if fc.is_finite() && fc >= f {
                moved = cand != s;
                s = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        g = map_gradient(precision, &s, wavelets);
        if !moved {
            break;
        }
    }
    for (si, &lo) in s.iter_mut().zip(floor) {
        if *si < lo {
            *si = lo;
            floor_hits += 1;
        }
    }
    if floor_hits > 0 {
        g = map_gradient(precision, &s, wavelets);
    }
    let grad_norm = inf_norm(&g);
    TreeMap { states: s, iterations, grad_norm, converged: grad_norm < config.tol, floor_hits }
}

/// MAP hidden states of every tree of a forest.
pub fn map_states(forest: &WaveletForest, params: &GlgParams, config: &MapConfig) -> Result<MapResult> {
    let precision = TreePrecision::new(params, &forest.topology)?;
    let lm = params.level_moments();
    let topo = &forest.topology;
    let floor: Vec<f64> = (0..topo.node_count())
        .map(|i| {
            let r = topo.level_of(i) - 1;
            lm.mu[r] - config.floor_sigmas * lm.sigma_sq[r].sqrt()
        })
        .collect();
    if forest.coefficients.iter().any(|w| !w.is_finite()) {
        return Err(GlgError::arg("forest contains non-finite coefficients"));
    }
    let trees: Vec<TreeMap> = (0..forest.tree_count())
        .into_par_iter()
        .map(|t| map_tree(&precision, &forest.coefficients.row(t).to_vec(), &floor, config))
        .collect();
    let mut values = Array2::zeros((forest.tree_count(), forest.node_count()));
    let mut failures = vec![];
    let mut floor_hits = 0;
    let mut max_iterations = 0;
    for (t, tm) in trees.into_iter().enumerate() {
        if !tm.converged {
            failures.push((t, format!("gradient norm {:.3e} after {} iterations", tm.grad_norm, tm.iterations)));
        }
        floor_hits += tm.floor_hits;
        max_iterations = max_iterations.max(tm.iterations);
        values.row_mut(t).assign(&ndarray::Array1::from(tm.states));
    }
    Ok(MapResult { states: StateField::new(values), failures, floor_hits, max_iterations })
}
