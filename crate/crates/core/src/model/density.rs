use std::f64::consts::PI;

use super::{GlgParams, TreePrecision, TreeTopology};
use crate::error::{GlgError, Result};

fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + (x - mean).powi(2) / var)
}

/// `log N(w; 0, exp(s))`.
pub fn log_emission(w: f64, s: f64) -> f64 {
    -0.5 * ((2.0 * PI).ln() + s + w * w * (-s).exp())
}

fn check_lengths(topology: &TreeTopology, states: &[f64], wavelets: &[f64]) -> Result<()> {
    let n = topology.node_count();
    if states.len() != n || wavelets.len() != n {
        return Err(GlgError::dim(format!(
            "expected {n} states and wavelets, got {} and {}",
            states.len(),
            wavelets.len()
        )));
    }
    Ok(())
}

/// `log p(s, w | theta)` of one tree, as a product of the root prior, the
/// parent-to-child transitions and the emissions.
pub fn joint_log_density(params: &GlgParams, topology: &TreeTopology, states: &[f64], wavelets: &[f64]) -> Result<f64> {
    check_lengths(topology, states, wavelets)?;
    if params.levels() != topology.levels() {
        return Err(GlgError::dim("parameter and tree levels differ"));
    }
    let mut total = log_normal_pdf(states[0], params.mu0, params.sigma0_sq);
    for j in 1..states.len() {
        let r = topology.level_of(j) - 1;
        let p = topology.parent(j).unwrap_or(0);
        total += log_normal_pdf(states[j], params.alpha_at(r) + params.beta_at(r) * states[p], params.kappa_sq_at(r));
    }
    total += states.iter().zip(wavelets).map(|(&s, &w)| log_emission(w, s)).sum::<f64>();
    Ok(total)
}

/// The same density written through the precision matrix:
/// `-(s - mu)' Delta (s - mu) / 2 + log det(Delta) / 2 - n log(2 pi)`
/// `- sum(w_i^2 exp(-s_i) + s_i) / 2`.
pub fn joint_log_density_quadratic(precision: &TreePrecision, states: &[f64], wavelets: &[f64]) -> Result<f64> {
    check_lengths(&precision.topology, states, wavelets)?;
    let n = states.len() as f64;
    let lik: f64 = states.iter().zip(wavelets).map(|(&s, &w)| w * w * (-s).exp() + s).sum();
    Ok(-0.5 * precision.quadratic_form(states) + 0.5 * precision.log_det() - n * (2.0 * PI).ln() - 0.5 * lik)
}
