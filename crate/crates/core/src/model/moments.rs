use super::GlgParams;
use crate::error::{GlgError, Result};

/// Tied coefficient moments at level `r` (tree level `r + 1`).
///
/// * `eta2 = E[w^2]`, `eta4 = E[w^4]`
/// * `eta22 = E[w_i^2 w_j^2]` for siblings `i != j`
/// * `xi22 = E[w_j^2 w_h^2]` for `j` a child of `h`
///
/// The two cross moments are undefined at the root level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalMoments {
    pub eta2: f64,
    pub eta4: f64,
    pub eta22: Option<f64>,
    pub xi22: Option<f64>,
}

pub fn theoretical_moments(params: &GlgParams, r: usize) -> Result<TheoreticalMoments> {
    if r >= params.levels() {
        return Err(GlgError::arg(format!("level {r} out of range for a {}-level model", params.levels())));
    }
    let lm = params.level_moments();
    let (mu, s2) = (lm.mu[r], lm.sigma_sq[r]);
    let eta2 = (mu + 0.5 * s2).exp();
    let eta4 = 3.0 * (2.0 * mu + 2.0 * s2).exp();
    let (eta22, xi22) = if r == 0 {
        (None, None)
    } else {
        let b = params.beta_at(r);
        let (mu_p, s2_p) = (lm.mu[r - 1], lm.sigma_sq[r - 1]);
        let eta22 = (2.0 * mu + s2 + b * b * s2_p).exp();
        let xi22 = (mu + mu_p + 0.5 * s2 + 0.5 * s2_p + b * s2_p).exp();
        (Some(eta22), Some(xi22))
    };
    Ok(TheoreticalMoments { eta2, eta4, eta22, xi22 })
}
