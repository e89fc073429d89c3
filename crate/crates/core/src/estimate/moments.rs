use crate::error::{GlgError, Result};
use crate::model::GlgParams;
use crate::wavelet::WaveletForest;

/// Sample moments of a forest, per level `r = 0..levels-1` (tree level `r + 1`).
///
/// The cross moments `eta22` and `xi22` are `None` at the root level.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub eta2: Vec<f64>,
    pub eta4: Vec<f64>,
    pub eta22: Vec<Option<f64>>,
    pub xi22: Vec<Option<f64>>,
    /// `eta4 > 3 eta2^2`, the condition for a positive variance estimate.
    pub valid: Vec<bool>,
}

impl MomentEstimates {
    pub fn levels(&self) -> usize {
        self.eta2.len()
    }

    fn refresh_validity(&mut self) {
        self.valid = self.eta2.iter().zip(&self.eta4).map(|(e2, e4)| *e4 > 3.0 * e2 * e2).collect();
    }

    /// Moments of the noise-free coefficients `w` recovered from those of
    /// `v = w + eps`, `eps ~ N(0, sigma_eps_sq)` independent of everything.
    pub fn noise_corrected(&self, sigma_eps_sq: f64) -> MomentEstimates {
        let c = sigma_eps_sq;
        let eta2: Vec<f64> = self.eta2.iter().map(|e| e - c).collect();
        let eta4 = self.eta4.iter().zip(&eta2).map(|(e4, e2)| e4 - 6.0 * c * e2 - 3.0 * c * c).collect();
        let eta22 = self.eta22.iter().enumerate().map(|(r, e)| e.map(|e| e - 2.0 * c * eta2[r] - c * c)).collect();
        let xi22 = self
            .xi22
            .iter()
            .enumerate()
            .map(|(r, x)| x.map(|x| x - c * (eta2[r] + eta2[r - 1]) - c * c))
            .collect();
        let mut out = MomentEstimates { eta2, eta4, eta22, xi22, valid: vec![] };
        out.refresh_validity();
        out
    }
}

/// Per-level sample moments pooled over all trees and all nodes of a level.
pub fn moment_estimates(forest: &WaveletForest) -> Result<MomentEstimates> {
    let topo = &forest.topology;
    let levels = topo.levels();
    let b = topo.branching();
    if levels > 1 && b < 2 {
        return Err(GlgError::Topology("sibling moments need at least two children per node".into()));
    }
    let k = forest.tree_count() as f64;
    let mut eta2 = Vec::with_capacity(levels);
    let mut eta4 = Vec::with_capacity(levels);
    let mut eta22 = vec![None];
    let mut xi22 = vec![None];
    for level in 1..=levels {
        let nodes = topo.level_nodes(level);
        let count = k * nodes.len() as f64;
        let (mut s2, mut s4) = (0.0, 0.0);
        for row in forest.coefficients.rows() {
            for &w in row.slice(ndarray::s![nodes.clone()]) {
                let w2 = w * w;
                s2 += w2;
                s4 += w2 * w2;
            }
        }
        eta2.push(s2 / count);
        eta4.push(s4 / count);
        if level > 1 {
            let parents = topo.level_nodes(level - 1);
            let pairs = (b * (b - 1) / 2) as f64;
            let (mut sib, mut pc) = (0.0, 0.0);
            for row in forest.coefficients.rows() {
                for h in parents.clone() {
                    let wh2 = row[h] * row[h];
                    let ch = topo.children(h);
                    let mut within = 0.0;
                    for j1 in ch.clone() {
                        let w1 = row[j1] * row[j1];
                        pc += wh2 * w1;
                        for j2 in j1 + 1..ch.end {
                            within += w1 * row[j2] * row[j2];
                        }
                    }
                    sib += within / pairs;
                }
            }
            let groups = k * parents.len() as f64;
            eta22.push(Some(sib / groups));
            xi22.push(Some(pc / count));
        }
    }
    let mut m = MomentEstimates { eta2, eta4, eta22, xi22, valid: vec![] };
    m.refresh_validity();
    Ok(m)
}

/// Starting values derived from moments, with the substitutions that were needed.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentInit {
    pub params: GlgParams,
    pub sigma_sq: Vec<f64>,
    pub mu: Vec<f64>,
    /// Level `r` used `sigma_sq(r) = 1` because the variance estimate was not positive.
    pub sigma_sq_fallback: Vec<bool>,
    /// Level `r >= 1` used `kappa_sq(r) = sigma_sq(r) / 2`.
    pub kappa_sq_fallback: Vec<bool>,
    /// Level `r >= 1` used `beta(r) = 0` because the ratio estimate was not finite.
    pub beta_fallback: Vec<bool>,
}

impl MomentInit {
    pub fn any_fallback(&self) -> bool {
        self.sigma_sq_fallback.iter().chain(&self.kappa_sq_fallback).chain(&self.beta_fallback).any(|&f| f)
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = vec![];
        for (r, &f) in self.sigma_sq_fallback.iter().enumerate() {
            if f {
                out.push(format!("level {r}: variance estimate not positive, sigma_sq set to 1"));
            }
        }
        for (r, &f) in self.beta_fallback.iter().enumerate() {
            if f {
                out.push(format!("level {r}: beta estimate not finite, set to 0"));
            }
        }
        for (r, &f) in self.kappa_sq_fallback.iter().enumerate() {
            if f {
                out.push(format!("level {r}: kappa_sq estimate not positive, set to sigma_sq/2"));
            }
        }
        out
    }
}

/// Inverts the moment identities level by level.
pub fn moment_init(m: &MomentEstimates) -> Result<MomentInit> {
    let levels = m.levels();
    let mut sigma_sq = Vec::with_capacity(levels);
    let mut mu = Vec::with_capacity(levels);
    let mut sigma_sq_fallback = Vec::with_capacity(levels);
    for r in 0..levels {
        let s = (m.eta4[r] / 3.0).ln() - 2.0 * m.eta2[r].ln();
        let bad = !(m.eta4[r] > 3.0 * m.eta2[r] * m.eta2[r]) || !(s > 0.0) || !s.is_finite();
        let s = if bad { 1.0 } else { s };
        let mut mean = m.eta2[r].ln() - s / 2.0;
        if !mean.is_finite() {
            mean = 0.0;
        }
        sigma_sq.push(s);
        mu.push(mean);
        sigma_sq_fallback.push(bad);
    }
    if sigma_sq_fallback.iter().all(|&f| f) {
        let init = MomentInit {
            params: GlgParams::root_only(0.0, 1.0)?,
            sigma_sq,
            mu,
            kappa_sq_fallback: vec![false; levels],
            beta_fallback: vec![false; levels],
            sigma_sq_fallback,
        };
        return Err(GlgError::Estimation {
            reason: "no level satisfies eta4 > 3 eta2^2; moment initialization impossible".into(),
            diagnostics: init.diagnostics(),
        });
    }
    let (mut alpha, mut beta, mut kappa_sq) = (vec![], vec![], vec![]);
    let mut kappa_sq_fallback = vec![false];
    let mut beta_fallback = vec![false];
    for r in 1..levels {
        let num = m.eta22[r].unwrap_or(f64::NAN).ln() - 2.0 * m.eta2[r].ln();
        let den = m.xi22[r].unwrap_or(f64::NAN).ln() - m.eta2[r].ln() - m.eta2[r - 1].ln();
        let mut b = num / den;
        let bad_beta = !b.is_finite();
        if bad_beta {
            b = 0.0;
        }
        let a = mu[r] - b * mu[r - 1];
        let mut k = sigma_sq[r] - b * b * sigma_sq[r - 1];
        let bad_k = !(k > 0.0) || !k.is_finite();
        if bad_k {
            k = sigma_sq[r] / 2.0;
        }
        alpha.push(a);
        beta.push(b);
        kappa_sq.push(k);
        beta_fallback.push(bad_beta);
        kappa_sq_fallback.push(bad_k);
    }
    let params = GlgParams::new(mu[0], sigma_sq[0], alpha, beta, kappa_sq)?;
    Ok(MomentInit { params, sigma_sq, mu, sigma_sq_fallback, kappa_sq_fallback, beta_fallback })
}

/// Pooled root estimates for the homogeneous submodel: the second and fourth
/// moments are averaged over all non-leaf levels and inverted as a single
/// lognormal scale mixture.
pub fn homogeneous_root_init(m: &MomentEstimates) -> Result<(f64, f64)> {
    let used = m.levels().saturating_sub(1).max(1);
    let e2 = m.eta2[..used].iter().sum::<f64>() / used as f64;
    let e4 = m.eta4[..used].iter().sum::<f64>() / used as f64;
    let s = (e4 / 3.0).ln() - 2.0 * e2.ln();
    if !(s > 0.0) || !s.is_finite() {
        return Err(GlgError::Estimation {
            reason: "pooled moments do not satisfy eta4 > 3 eta2^2".into(),
            diagnostics: vec![format!("pooled eta2 = {e2}, eta4 = {e4}")],
        });
    }
    Ok((e2.ln() - s / 2.0, s))
}
