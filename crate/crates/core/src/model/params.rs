use crate::error::{GlgError, Result};

/// Parameters tied within levels.
///
/// The root hidden state is `N(mu0, sigma0_sq)`. For transition level
/// `r = 1..levels-1`, a node on tree level `r + 1` given its parent has
/// hidden state `N(alpha(r) + beta(r) * s_parent, kappa_sq(r))`. The vectors
/// are stored 0-based, so `alpha[r - 1]` is `alpha(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlgParams {
    pub mu0: f64,
    pub sigma0_sq: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub kappa_sq: Vec<f64>,
}

impl GlgParams {
    pub fn new(mu0: f64, sigma0_sq: f64, alpha: Vec<f64>, beta: Vec<f64>, kappa_sq: Vec<f64>) -> Result<Self> {
        let p = GlgParams { mu0, sigma0_sq, alpha, beta, kappa_sq };
        p.validate()?;
        Ok(p)
    }

    /// Root-only parameters for a single-level model.
    pub fn root_only(mu0: f64, sigma0_sq: f64) -> Result<Self> {
        Self::new(mu0, sigma0_sq, vec![], vec![], vec![])
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.beta.len() || self.alpha.len() != self.kappa_sq.len() {
            return Err(GlgError::arg(format!(
                "alpha, beta and kappa_sq must have equal lengths (got {}, {}, {})",
                self.alpha.len(),
                self.beta.len(),
                self.kappa_sq.len()
            )));
        }
        if !(self.sigma0_sq > 0.0) || !self.sigma0_sq.is_finite() {
            return Err(GlgError::arg(format!("sigma0_sq must be positive and finite, got {}", self.sigma0_sq)));
        }
        if let Some((r, k)) = self.kappa_sq.iter().enumerate().find(|(_, k)| !(**k > 0.0) || !k.is_finite()) {
            return Err(GlgError::arg(format!("kappa_sq({}) must be positive and finite, got {k}", r + 1)));
        }
        let finite = std::iter::once(self.mu0).chain(self.alpha.iter().copied()).chain(self.beta.iter().copied());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(GlgError::arg("parameters must be finite"));
        }
        Ok(())
    }

    /// Number of tree levels `l`.
    pub fn levels(&self) -> usize {
        self.alpha.len() + 1
    }

    /// Number of free parameters, `3l - 1`.
    pub fn parameter_count(&self) -> usize {
        3 * self.levels() - 1
    }

    /// `alpha(r)` for transition level `r >= 1`.
    pub fn alpha_at(&self, r: usize) -> f64 {
        self.alpha[r - 1]
    }

    pub fn beta_at(&self, r: usize) -> f64 {
        self.beta[r - 1]
    }

    /// `kappa_sq(r)`, with `kappa_sq(0) = sigma0_sq`.
    pub fn kappa_sq_at(&self, r: usize) -> f64 {
        if r == 0 {
            self.sigma0_sq
        } else {
            self.kappa_sq[r - 1]
        }
    }

    /// Marginal means and variances of the hidden states per level.
    pub fn level_moments(&self) -> LevelMoments {
        let mut mu = vec![self.mu0];
        let mut sigma_sq = vec![self.sigma0_sq];
        for r in 1..self.levels() {
            let b = self.beta_at(r);
            mu.push(self.alpha_at(r) + b * mu[r - 1]);
            sigma_sq.push(self.kappa_sq_at(r) + b * b * sigma_sq[r - 1]);
        }
        LevelMoments { mu, sigma_sq }
    }

    /// Flat vector `(mu0, sigma0_sq, alpha.., beta.., kappa_sq..)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.mu0, self.sigma0_sq];
        v.extend(&self.alpha);
        v.extend(&self.beta);
        v.extend(&self.kappa_sq);
        v
    }
}

/// Level means `mu(r)` and variances `sigma_sq(r)`, `r = 0..levels-1`.
///
/// Level `r` describes hidden states on tree level `r + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMoments {
    pub mu: Vec<f64>,
    pub sigma_sq: Vec<f64>,
}

impl LevelMoments {
    pub fn levels(&self) -> usize {
        self.mu.len()
    }

    /// Recovers the transition parameters given `beta`: `alpha(r) = mu(r) - beta(r) mu(r-1)` and
    /// `kappa_sq(r) = sigma_sq(r) - beta(r)^2 sigma_sq(r-1)`.
    pub fn transition(&self, r: usize, beta: f64) -> (f64, f64) {
        let alpha = self.mu[r] - beta * self.mu[r - 1];
        let kappa_sq = self.sigma_sq[r] - beta * beta * self.sigma_sq[r - 1];
        (alpha, kappa_sq)
    }
}

/// Parameters shared by every level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousGlgParams {
    pub mu0: f64,
    pub sigma0_sq: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa_sq: f64,
}

impl HomogeneousGlgParams {
    pub fn new(mu0: f64, sigma0_sq: f64, alpha: f64, beta: f64, kappa_sq: f64) -> Result<Self> {
        let p = HomogeneousGlgParams { mu0, sigma0_sq, alpha, beta, kappa_sq };
        p.to_tied(2)?;
        Ok(p)
    }

    pub fn to_tied(&self, levels: usize) -> Result<GlgParams> {
        if levels == 0 {
            return Err(GlgError::arg("levels must be at least 1"));
        }
        let t = levels - 1;
        GlgParams::new(self.mu0, self.sigma0_sq, vec![self.alpha; t], vec![self.beta; t], vec![self.kappa_sq; t])
    }

    /// Closed form of `mu(r)`.
    pub fn mu(&self, r: usize) -> f64 {
        let b = self.beta;
        if b == 1.0 {
            r as f64 * self.alpha + self.mu0
        } else {
            let br = b.powi(r as i32);
            self.alpha * (br - 1.0) / (b - 1.0) + br * self.mu0
        }
    }

    /// Closed form of `sigma_sq(r)`.
    pub fn sigma_sq(&self, r: usize) -> f64 {
        let b2 = self.beta * self.beta;
        if b2 == 1.0 {
            r as f64 * self.kappa_sq + self.sigma0_sq
        } else {
            let b2r = b2.powi(r as i32);
            self.kappa_sq * (b2r - 1.0) / (b2 - 1.0) + b2r * self.sigma0_sq
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_decouples() {
        let p = GlgParams::new(0.3, 2.0, vec![1.0, -1.0], vec![0.0, 0.0], vec![0.5, 0.7]).unwrap();
        let m = p.level_moments();
        assert_eq!(m.mu, vec![0.3, 1.0, -1.0]);
        assert_eq!(m.sigma_sq, vec![2.0, 0.5, 0.7]);
    }

    #[test]
    fn homogeneous_beta_one() {
        let h = HomogeneousGlgParams::new(0.5, 1.5, 0.25, 1.0, 0.4).unwrap();
        let m = h.to_tied(5).unwrap().level_moments();
        for r in 0..5 {
            assert!((h.mu(r) - (r as f64 * 0.25 + 0.5)).abs() < 1e-14);
            assert!((m.mu[r] - h.mu(r)).abs() < 1e-12);
            assert!((m.sigma_sq[r] - (r as f64 * 0.4 + 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_beta_two() {
        let h = HomogeneousGlgParams::new(0.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        let m = h.to_tied(6).unwrap().level_moments();
        for r in 0..6 {
            let four_r = 4f64.powi(r as i32);
            let expected = (four_r - 1.0) / 3.0 + four_r;
            assert!((h.sigma_sq(r) - expected).abs() < 1e-10);
            assert!((m.sigma_sq[r] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_relations_exact() {
        let p = GlgParams::new(-1.0, 0.8, vec![0.2, 0.4], vec![0.9, -0.3], vec![0.6, 0.25]).unwrap();
        let m = p.level_moments();
        for r in 1..3 {
            let (a, k) = m.transition(r, p.beta_at(r));
            assert!((a - p.alpha_at(r)).abs() < 1e-14);
            assert!((k - p.kappa_sq_at(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn validation() {
        assert!(GlgParams::new(0.0, 0.0, vec![], vec![], vec![]).is_err());
        assert!(GlgParams::new(0.0, 1.0, vec![0.0], vec![0.0], vec![-1.0]).is_err());
        assert!(GlgParams::new(0.0, 1.0, vec![0.0], vec![], vec![1.0]).is_err());
        assert_eq!(GlgParams::new(0.0, 1.0, vec![0.0; 2], vec![0.0; 2], vec![1.0; 2]).unwrap().parameter_count(), 8);
    }
}
