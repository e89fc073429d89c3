use log::{debug, warn};

use super::level::{level_em, LevelGroups};
use super::moments::{moment_estimates, moment_init, MomentInit};
use super::quadrature::{gauss_hermite, QuadratureRule};
use super::root::{marginal_em, root_em};
use super::trace::{EmTrace, StopReason};
use crate::error::{GlgError, Result};
use crate::model::GlgParams;
use crate::wavelet::WaveletForest;

pub const DEFAULT_QUAD_ORDER: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub quad_order: usize,
    /// Relative parameter change below which EM stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Known variance of additive noise on the coefficients. When positive,
    /// the moments are corrected for it and the level marginals are fitted
    /// with the noise in the emission.
    pub noise_var: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { quad_order: DEFAULT_QUAD_ORDER, tol: 1e-6, max_iter: 200, noise_var: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: GlgParams,
    pub init: MomentInit,
    /// Root stage first, then one trace per transition level.
    pub traces: Vec<EmTrace>,
}

impl FitReport {
    pub fn iterations(&self) -> usize {
        self.traces.iter().map(|t| t.iterations).sum()
    }

    pub fn converged(&self) -> bool {
        self.traces.iter().all(EmTrace::converged)
    }
}

fn degenerate(trace: &EmTrace, init: &MomentInit) -> Option<GlgError> {
    match &trace.reason {
        StopReason::Degenerate(why) => Some(GlgError::Estimation {
            reason: format!("{} stage: {why}", trace.stage),
            diagnostics: init.diagnostics(),
        }),
        _ => None,
    }
}

/// Fit from noisy coefficients.
///
/// The composite likelihood of parent-child groups has no tractable form once
/// noise is added, so each level's marginal `(mu(r), sigma_sq(r))` is fitted
/// by [`marginal_em`] with the noise in the emission. `beta(r)` comes from the
/// noise-corrected moments, and `alpha(r)`, `kappa_sq(r)` from the level
/// recursion. When that leaves `kappa_sq(r) <= 0`, `beta(r)` is shrunk so that
/// `kappa_sq(r) = sigma_sq(r) / 2`.
fn fit_noisy(forest: &WaveletForest, config: &FitConfig, rule: &QuadratureRule, init: MomentInit) -> Result<FitReport> {
    let topo = &forest.topology;
    let mut mu = vec![];
    let mut var = vec![];
    let mut traces = vec![];
    for r in 0..topo.levels() {
        let values: Vec<f64> = forest
            .coefficients
            .columns()
            .into_iter()
            .skip(topo.level_nodes(r + 1).start)
            .take(topo.level_size(r + 1))
            .flat_map(|c| c.to_vec())
            .collect();
        let (m, v, mut trace) =
            marginal_em(&values, (init.mu[r], init.sigma_sq[r]), config.noise_var, rule, config.tol, config.max_iter)?;
        trace.stage = if r == 0 { "root".into() } else { format!("level {r}") };
        debug!("{} marginal EM: {} iterations, {}", trace.stage, trace.iterations, trace.reason);
        if !trace.converged() {
            warn!("{} marginal EM stopped after {} iterations without converging", trace.stage, trace.iterations);
        }
        mu.push(m);
        var.push(v);
        traces.push(trace);
    }
    let (mut alpha, mut beta, mut kappa_sq) = (vec![], vec![], vec![]);
    for r in 1..topo.levels() {
        let mut b = init.params.beta_at(r);
        let mut k = var[r] - b * b * var[r - 1];
        if !(k > 0.0) {
            b = b.signum() * (0.5 * var[r] / var[r - 1]).sqrt();
            k = 0.5 * var[r];
            traces[r].notes.push(format!("beta shrunk to {b} to keep kappa_sq positive"));
        }
        alpha.push(mu[r] - b * mu[r - 1]);
        beta.push(b);
        kappa_sq.push(k);
    }
    let params = GlgParams::new(mu[0], var[0], alpha, beta, kappa_sq)?;
    Ok(FitReport { params, init, traces })
}

/// Coefficients below this fraction of the largest magnitude are rounding
/// residue of the transform and count as exact zeros.
pub const ZERO_RELATIVE: f64 = 1e-10;

fn snap_zeros(forest: &WaveletForest) -> WaveletForest {
    let peak = forest.coefficients.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let cut = ZERO_RELATIVE * peak;
    let mut out = forest.clone();
    out.coefficients.mapv_inplace(|w| if w.abs() <= cut { 0.0 } else { w });
    out
}

/// Moment initialization followed by root EM and one level EM per transition
/// level, from the coarsest level to the finest.
///
/// Without noise, coefficients that are zero up to rounding are treated as
/// unobserved by the EM stages; see [`level_log_likelihood`](super::level_log_likelihood).
pub fn fit_glg(forest: &WaveletForest, config: &FitConfig) -> Result<FitReport> {
    if !(config.noise_var >= 0.0) {
        return Err(GlgError::arg(format!("noise variance must be non-negative, got {}", config.noise_var)));
    }
    let snapped;
    let forest = if config.noise_var == 0.0 {
        snapped = snap_zeros(forest);
        &snapped
    } else {
        forest
    };
    let rule = gauss_hermite(config.quad_order)?;
    let mut moments = moment_estimates(forest)?;
    if config.noise_var > 0.0 {
        moments = moments.noise_corrected(config.noise_var);
    }
    let init = moment_init(&moments)?;
    for note in init.diagnostics() {
        warn!("moment initialization: {note}");
    }
    if config.noise_var > 0.0 {
        return fit_noisy(forest, config, &rule, init);
    }
    let roots: Vec<f64> = forest.coefficients.column(0).to_vec();
    let (mu0, sigma0_sq, trace) = root_em(&roots, (init.mu[0], init.sigma_sq[0]), &rule, config.tol, config.max_iter)?;
    if let Some(e) = degenerate(&trace, &init) {
        return Err(e);
    }
    debug!("root EM: {} iterations, {}", trace.iterations, trace.reason);
    let mut traces = vec![trace];
    let (mut alpha, mut beta, mut kappa_sq) = (vec![], vec![], vec![]);
    let (mut mu_prev, mut var_prev) = (mu0, sigma0_sq);
    for r in 1..forest.levels() {
        let groups = LevelGroups::from_forest(forest, r)?;
        let start = (init.params.alpha_at(r), init.params.beta_at(r), init.params.kappa_sq_at(r));
        let (a, b, k, mut trace) = level_em(&groups, (mu_prev, var_prev), start, &rule, config.tol, config.max_iter)?;
        trace.stage = format!("level {r}");
        if let Some(e) = degenerate(&trace, &init) {
            return Err(e);
        }
        debug!("level {r} EM: {} iterations, {}", trace.iterations, trace.reason);
        if !trace.converged() {
            warn!("level {r} EM stopped after {} iterations without converging", trace.iterations);
        }
        traces.push(trace);
        mu_prev = a + b * mu_prev;
        var_prev = k + b * b * var_prev;
        alpha.push(a);
        beta.push(b);
        kappa_sq.push(k);
    }
    let params = GlgParams::new(mu0, sigma0_sq, alpha, beta, kappa_sq)?;
    Ok(FitReport { params, init, traces })
}
