use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{GlgParams, StateField, TreeTopology};
use crate::error::{GlgError, Result};
use crate::wavelet::WaveletForest;

/// Draws `k` independent trees of hidden states and coefficients.
///
/// Tree `t` uses ChaCha8 stream `t` of `seed`, so the output does not
/// depend on the thread schedule.
pub fn simulate_forest(
    params: &GlgParams,
    topology: &TreeTopology,
    tree_count: usize,
    seed: u64,
) -> Result<(StateField, WaveletForest)> {
    if tree_count == 0 {
        return Err(GlgError::arg("tree count must be at least 1"));
    }
    if params.levels() != topology.levels() {
        return Err(GlgError::dim("parameter and tree levels differ"));
    }
    let n = topology.node_count();
    let levels: Vec<usize> = (0..n).map(|i| topology.level_of(i)).collect();
    let parents: Vec<usize> = (0..n).map(|i| topology.parent(i).unwrap_or(0)).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut s = vec![0.0; n];
            let mut w = vec![0.0; n];
            for i in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                s[i] = if i == 0 {
                    params.mu0 + params.sigma0_sq.sqrt() * z
                } else {
                    let r = levels[i] - 1;
                    params.alpha_at(r) + params.beta_at(r) * s[parents[i]] + params.kappa_sq_at(r).sqrt() * z
                };
                let e: f64 = StandardNormal.sample(&mut rng);
                w[i] = (0.5 * s[i]).exp() * e;
            }
            (s, w)
        })
        .collect();
    let mut states = Array2::zeros((tree_count, n));
    let mut coefficients = Array2::zeros((tree_count, n));
    for (t, (s, w)) in rows.into_iter().enumerate() {
        states.row_mut(t).assign(&ndarray::Array1::from(s));
        coefficients.row_mut(t).assign(&ndarray::Array1::from(w));
    }
    Ok((StateField::new(states), WaveletForest::new(None, topology.clone(), coefficients)?))
}
