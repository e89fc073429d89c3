use std::f64::consts::PI;

use rayon::prelude::*;

use super::accel::accelerated_em;
use super::quadrature::{adaptive_nodes, trapezoid_nodes, Posterior1d, QuadratureRule, NOISY_STEP};
use super::trace::{EmTrace, StopReason};
use crate::error::{GlgError, Result};

/// Log-density of `(s, w)` with `s ~ N(mu, var)`, `w | s ~ N(0, exp(s))`, and its first two `s`-derivatives.
#[inline]
pub(crate) fn root_log_joint(s: f64, w: f64, mu: f64, var: f64) -> (f64, f64, f64) {
    let w2e = w * w * (-s).exp();
    let h = -(s - mu).powi(2) / (2.0 * var) - 0.5 * (2.0 * PI * var).ln() - 0.5 * (2.0 * PI).ln() - 0.5 * (w2e + s);
    let d1 = -(s - mu) / var + 0.5 * (w2e - 1.0);
    let d2 = -1.0 / var - 0.5 * w2e;
    (h, d1, d2)
}

/// As [`root_log_joint`] for `v = w + eps` with `eps ~ N(0, noise_var)`, so `v | s ~ N(0, exp(s) + noise_var)`.
#[inline]
pub(crate) fn noisy_log_joint(s: f64, v: f64, mu: f64, var: f64, noise_var: f64) -> (f64, f64, f64) {
    if noise_var == 0.0 {
        return root_log_joint(s, v, mu, var);
    }
    let ce = noise_var * (-s).exp();
    let g = 1.0 / (1.0 + ce);
    let t = s.exp() + noise_var;
    let ln_t = s + ce.ln_1p();
    let r = v * v / t;
    let h = -(s - mu).powi(2) / (2.0 * var) - 0.5 * (2.0 * PI * var).ln() - 0.5 * (2.0 * PI).ln() - 0.5 * (ln_t + r);
    let d1 = -(s - mu) / var + 0.5 * g * (r - 1.0);
    let d2 = -1.0 / var + 0.5 * g * ((1.0 - g) * (r - 1.0) - g * r);
    (h, d1, d2)
}

/// Posterior of `s` given `w` under the prior `N(mu, var)`; `log_mass` is `ln q(w)`.
pub fn root_posterior(rule: &QuadratureRule, w: f64, mu: f64, var: f64) -> Posterior1d {
    let hd = |s: f64| root_log_joint(s, w, mu, var);
    adaptive_nodes(rule, &hd, mu, var.sqrt()).summary()
}

/// Posterior of `s` given a noisy coefficient `v`; `log_mass` is the marginal log-density of `v`.
pub fn noisy_posterior(rule: &QuadratureRule, v: f64, mu: f64, var: f64, noise_var: f64) -> Posterior1d {
    let hd = |s: f64| noisy_log_joint(s, v, mu, var, noise_var);
    if noise_var == 0.0 {
        return adaptive_nodes(rule, &hd, mu, var.sqrt()).summary();
    }
    // the likelihood peaks at exp(s) = v^2 - noise_var and is flat below ln(noise_var)
    let mut starts = vec![mu];
    if v * v > noise_var {
        starts.push((v * v - noise_var).ln());
    }
    trapezoid_nodes(&hd, &starts, var.sqrt(), NOISY_STEP).summary()
}

/// Marginal log-likelihood `ln q(w | mu, var)` of one coefficient.
pub fn root_log_marginal(rule: &QuadratureRule, w: f64, mu: f64, var: f64) -> f64 {
    root_posterior(rule, w, mu, var).log_mass
}

/// EM for `(mu0, sigma0_sq)` from the root coefficients of `k` trees.
///
/// Roots that are exactly zero are treated as unobserved.
pub fn root_em(
    roots: &[f64],
    init: (f64, f64),
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64, EmTrace)> {
    if roots.len() < 2 {
        return Err(GlgError::arg("root EM needs at least two trees"));
    }
    state_em(roots, init, 0.0, rule, tol, max_iter, "root")
}

/// EM for the marginal `(mu, sigma_sq)` of one level's states from noisy
/// coefficients `v = w + eps`, `eps ~ N(0, noise_var)`.
///
/// Every coefficient of the level enters as an independent margin, so the
/// objective is the sum of their marginal log-densities.
pub fn marginal_em(
    values: &[f64],
    init: (f64, f64),
    noise_var: f64,
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64, EmTrace)> {
    if values.len() < 2 {
        return Err(GlgError::arg("marginal EM needs at least two coefficients"));
    }
    if !(noise_var >= 0.0) || !noise_var.is_finite() {
        return Err(GlgError::arg(format!("noise variance must be non-negative, got {noise_var}")));
    }
    state_em(values, init, noise_var, rule, tol, max_iter, "marginal")
}

fn state_em(
    roots: &[f64],
    init: (f64, f64),
    noise_var: f64,
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
    stage: &str,
) -> Result<(f64, f64, EmTrace)> {
    if !(init.1 > 0.0) {
        return Err(GlgError::arg(format!("initial sigma0_sq must be positive, got {}", init.1)));
    }
    let mut trace = EmTrace::new(stage);
    trace.zero_groups = roots.iter().filter(|w| **w == 0.0).count();
    // without noise an exact zero is treated as unobserved, see `level_log_likelihood`
    let zero_missing = noise_var == 0.0;
    if zero_missing && trace.zero_groups == roots.len() {
        trace.reason = StopReason::Degenerate("all coefficients are zero; nothing informs the estimate".into());
        return Ok((init.0, init.1, trace));
    }
    if zero_missing && trace.zero_groups > 0 {
        trace.notes.push(format!("{} zero coefficients treated as unobserved", trace.zero_groups));
    }
    let k = roots.len() as f64;
    let em_map = |theta: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (mu, var) = (theta[0], theta[1]);
        let post: Vec<Posterior1d> = roots
            .par_iter()
            .map(|&w| {
                if zero_missing && w == 0.0 {
                    Posterior1d { log_mass: 0.0, mean: mu, var, m3: 0.0 }
                } else {
                    noisy_posterior(rule, w, mu, var, noise_var)
                }
            })
            .collect();
        let (mut obj, mut e1, mut e2) = (0.0, 0.0, 0.0);
        for p in &post {
            obj += p.log_mass;
            e1 += p.mean;
            e2 += p.var + p.mean * p.mean;
        }
        if !obj.is_finite() || !e1.is_finite() || !e2.is_finite() {
            return Err(GlgError::Numerical(format!("{stage} E-step produced non-finite moments at mu={mu}, sigma_sq={var}")));
        }
        let new_mu = e1 / k;
        let new_var = (e2 / k - new_mu * new_mu).max(f64::MIN_POSITIVE);
        Ok((obj, vec![new_mu, new_var]))
    };
    let theta = accelerated_em(&[init.0, init.1], em_map, |t| t[1] > 0.0, tol, max_iter, &mut trace)?;
    let (mu, var) = (theta[0], theta[1]);
    Ok((mu, var, trace))
}
