//! Denoising under additive white Gaussian noise by posterior-mean shrinkage
//! of detail coefficients, and PSNR scoring.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{GlgError, Result};
use crate::estimate::{fit_glg, trapezoid_nodes, FitConfig, NOISY_STEP};
use crate::model::GlgParams;
use crate::wavelet::{dwt2_forward, dwt2_inverse, extract_forest, insert_forest, Direction, Filter, ImageGrid};

/// Adds i.i.d. `N(0, sigma_eps^2)` noise to every pixel. Values are not clipped.
pub fn add_noise(image: &ImageGrid, sigma_eps: f64, seed: u64) -> Result<ImageGrid> {
    if !(sigma_eps >= 0.0) || !sigma_eps.is_finite() {
        return Err(GlgError::arg(format!("noise standard deviation must be non-negative, got {sigma_eps}")));
    }
    if sigma_eps == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, sigma_eps).map_err(|e| GlgError::arg(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = image.values().mapv(|v| v + normal.sample(&mut rng));
    ImageGrid::with_range(values, image.declared_range())
}

/// Peak signal-to-noise ratio in dB, `20 log10(N (max I - min I) / ||I - J||)`
/// for `N x N` images. Identical images give `f64::INFINITY`.
pub fn psnr(reference: &ImageGrid, test: &ImageGrid) -> Result<f64> {
    if reference.values().dim() != test.values().dim() {
        return Err(GlgError::dim(format!(
            "images differ in size: {:?} vs {:?}",
            reference.values().dim(),
            test.values().dim()
        )));
    }
    let n = reference.side() as f64;
    let max = reference.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = reference.values().iter().copied().fold(f64::INFINITY, f64::min);
    let err = (reference.values() - test.values()).iter().map(|d| d * d).sum::<f64>().sqrt();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (n * (max - min) / err).log10())
}

/// `E[w | v]` for `v = w + eps`, `w | s ~ N(0, exp(s))`, `s ~ N(mu, sigma_sq)`,
/// `eps ~ N(0, sigma_eps_sq)`. Equals `v E[exp(s) / (exp(s) + sigma_eps_sq) | v]`.
///
/// The posterior of `s` given `v` can have two modes, so the integral uses a
/// uniform trapezoid grid rather than a Gauss-Hermite rule.
pub fn shrink_coefficient(v: f64, mu: f64, sigma_sq: f64, sigma_eps_sq: f64) -> f64 {
    shrinkage_factor(v, mu, sigma_sq, sigma_eps_sq) * v
}

/// The factor `E[exp(s) / (exp(s) + sigma_eps_sq) | v]` in `(0, 1]`.
pub fn shrinkage_factor(v: f64, mu: f64, sigma_sq: f64, sigma_eps_sq: f64) -> f64 {
    if sigma_eps_sq == 0.0 {
        return 1.0;
    }
    let c = sigma_eps_sq;
    let v2 = v * v;
    let hd = |s: f64| {
        let g = 1.0 / (1.0 + c * (-s).exp());
        let t = s.exp() + c;
        let ln_t = s + (c * (-s).exp()).ln_1p();
        let h = -(s - mu).powi(2) / (2.0 * sigma_sq) - 0.5 * ln_t - v2 / (2.0 * t);
        let d1 = -(s - mu) / sigma_sq + 0.5 * g * (v2 / t - 1.0);
        let d2 = -1.0 / sigma_sq + 0.5 * g * ((1.0 - g) * (v2 / t - 1.0) - g * v2 / t);
        (h, d1, d2)
    };
    // the likelihood peaks at exp(s) = v^2 - c and is flat below ln(c)
    let mut starts = vec![mu];
    if v2 > c {
        starts.push((v2 - c).ln());
    }
    let nodes = trapezoid_nodes(&hd, &starts, sigma_sq.sqrt(), NOISY_STEP);
    nodes.expect(|s| 1.0 / (1.0 + c * (-s).exp())).clamp(0.0, 1.0)
}

/// Result of [`denoise_image`].
#[derive(Debug, Clone)]
pub struct Denoised {
    pub image: ImageGrid,
    /// Fitted parameters per direction; `None` where the fit failed and the
    /// direction was passed through unchanged.
    pub params: Vec<(Direction, Option<GlgParams>)>,
    pub warnings: Vec<String>,
}

/// Shrinks every detail coefficient of `noisy` by its posterior mean under a
/// GLG model fitted per direction. The approximation subband is kept.
pub fn denoise_image(
    noisy: &ImageGrid,
    filter: Filter,
    levels: usize,
    sigma_eps: f64,
    fit_config: &FitConfig,
) -> Result<Denoised> {
    if !(sigma_eps >= 0.0) || !sigma_eps.is_finite() {
        return Err(GlgError::arg(format!("noise standard deviation must be non-negative, got {sigma_eps}")));
    }
    let c = sigma_eps * sigma_eps;
    let config = FitConfig { noise_var: c, ..fit_config.clone() };
    let mut pyramid = dwt2_forward(noisy, filter, levels)?;
    let mut params = vec![];
    let mut warnings = vec![];
    for dir in Direction::ALL {
        let mut forest = extract_forest(&pyramid, dir)?;
        let fitted = match fit_glg(&forest, &config) {
            Ok(report) => report.params,
            Err(e) => {
                let msg = format!("{dir}: fit failed, coefficients passed through ({e})");
                warn!("{msg}");
                warnings.push(msg);
                params.push((dir, None));
                continue;
            }
        };
        let lm = fitted.level_moments();
        let topo = forest.topology.clone();
        let node_level: Vec<usize> = (0..topo.node_count()).map(|i| topo.level_of(i) - 1).collect();
        forest.coefficients.axis_iter_mut(ndarray::Axis(0)).into_par_iter().for_each(|mut row| {
            for (i, v) in row.iter_mut().enumerate() {
                let r = node_level[i];
                *v = shrink_coefficient(*v, lm.mu[r], lm.sigma_sq[r], c);
            }
        });
        pyramid = insert_forest(&forest, &pyramid, dir)?;
        params.push((dir, Some(fitted)));
    }
    let image = dwt2_inverse(&pyramid)?;
    Ok(Denoised { image, params, warnings })
}
