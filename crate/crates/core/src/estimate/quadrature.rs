use std::f64::consts::PI;

use crate::error::{GlgError, Result};

/// Gauss-Hermite rule for `int f(x) exp(-x^2) dx ~ sum w_k f(x_k)`.
///
/// Nodes are sorted ascending. `log_weights` holds `ln w_k`, which stays
/// finite where the weights themselves would underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

pub const MAX_ORDER: usize = 200;

/// Values of the orthonormal Hermite functions of degree `n` and `n - 1` at `z`.
fn orthonormal_hermite(z: f64, n: usize) -> (f64, f64) {
    let (mut p1, mut p2) = (PI.powf(-0.25), 0.0);
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, p2)
}

/// Number of eigenvalues below `x` of the Jacobi matrix of the Hermite weight
/// (zero diagonal, off-diagonal `sqrt(k / 2)`), by Sturm sequence.
fn eigenvalues_below(x: f64, n: usize) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for k in 1..n {
        let q_prev = if q == 0.0 { f64::EPSILON } else { q };
        q = -x - (k as f64 / 2.0) / q_prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gauss-Hermite nodes and weights.
///
/// Nodes are located by bisection on the Sturm count of the Jacobi matrix
/// and polished by Newton steps on the orthonormal Hermite recursion, which
/// also gives the weights `2 / (sqrt(2n) p_{n-1}(x))^2` without underflow.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(GlgError::arg(format!("quadrature order must be in 1..={MAX_ORDER}, got {order}")));
    }
    let n = order;
    let nf = n as f64;
    let bound = 2.0 * (nf / 2.0).sqrt() + 1.0;
    let mut nodes = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    for i in 0..n {
        // the i-th smallest eigenvalue is where the count passes i
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if eigenvalues_below(mid, n) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..3 {
            let (p1, p2) = orthonormal_hermite(z, n);
            let step = p1 / ((2.0 * nf).sqrt() * p2);
            if !step.is_finite() {
                break;
            }
            z -= step;
        }
        let pp = (2.0 * nf).sqrt() * orthonormal_hermite(z, n).1;
        nodes.push(z);
        log_weights.push(2f64.ln() - 2.0 * pp.abs().ln());
    }
    // enforce exact symmetry
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let lw = 0.5 * (log_weights[i] + log_weights[n - 1 - i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        log_weights[i] = lw;
        log_weights[n - 1 - i] = lw;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let weights = log_weights.iter().map(|l| l.exp()).collect();
    Ok(QuadratureRule { order: n, nodes, weights, log_weights })
}

impl QuadratureRule {
    /// `E[f(Z)]` for `Z ~ N(mean, var)` with the substitution `z = mean + sqrt(2 var) x`.
    pub fn gaussian_expectation(&self, mean: f64, var: f64, f: impl Fn(f64) -> f64) -> f64 {
        let scale = (2.0 * var).sqrt();
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mean + scale * x)).sum();
        s / PI.sqrt()
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Summary of a 1D density known up to a constant, `exp(h(s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior1d {
    /// `ln int exp(h(s)) ds`.
    pub log_mass: f64,
    pub mean: f64,
    pub var: f64,
    /// Third central moment.
    pub m3: f64,
}

/// Nodes and normalized weights of an adaptive rule fitted to `exp(h)`.
pub(crate) struct AdaptiveNodes {
    pub points: Vec<f64>,
    pub probs: Vec<f64>,
    pub log_mass: f64,
}

impl AdaptiveNodes {
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.probs).map(|(&s, &p)| p * f(s)).sum()
    }

    pub fn summary(&self) -> Posterior1d {
        let mean = self.expect(|s| s);
        let var = self.expect(|s| (s - mean).powi(2));
        let m3 = self.expect(|s| (s - mean).powi(3));
        Posterior1d { log_mass: self.log_mass, mean, var, m3 }
    }
}

/// Maximizes `h` given `hd(s) = (h, h', h'')` by damped Newton from `start`.
///
/// `scale` bounds the step length when the curvature is not negative.
pub(crate) fn find_mode(hd: &impl Fn(f64) -> (f64, f64, f64), start: f64, scale: f64) -> (f64, f64, f64, f64) {
    let mut s = start;
    let (mut h, mut d1, mut d2) = hd(s);
    for _ in 0..200 {
        let mut step = if d2 < 0.0 { -d1 / d2 } else { d1.signum() * scale };
        let max_step = 20.0 * scale;
        if step.abs() > max_step {
            step = step.signum() * max_step;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let cand = s + step;
            let (hc, c1, c2) = hd(cand);
            if hc.is_finite() && hc >= h {
                s = cand;
                h = hc;
                d1 = c1;
                d2 = c2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        let tau = if d2 < 0.0 { (-d2).sqrt().recip() } else { scale };
        if !accepted || step.abs() <= 1e-13 * (1.0 + s.abs()) || d1.abs() * tau <= 1e-13 {
            break;
        }
    }
    (s, h, d1, d2)
}

/// Largest skew rate used by the node map in [`adaptive_nodes`].
const MAX_SKEW: f64 = 1.0;

/// Gauss-Hermite rule adapted to `exp(h)`.
///
/// With `s*` the mode and `tau = (-h''(s*))^(-1/2)`, the integral is taken in
/// `x` where `s = s* + tau (exp(lambda x) - 1) / lambda`. The rate
/// `lambda = h''' tau^3 / 3` cancels the third derivative of the transformed
/// log integrand at the origin, so skewed integrands look Gaussian in `x`.
/// The rule is then centred and scaled at the mode in `x`.
pub(crate) fn adaptive_nodes(
    rule: &QuadratureRule,
    hd: &impl Fn(f64) -> (f64, f64, f64),
    start: f64,
    scale: f64,
) -> AdaptiveNodes {
    let (mode, _, _, d2) = find_mode(hd, start, scale);
    let tau = if d2 < 0.0 { (-d2).sqrt().recip() } else { scale };
    let delta = 0.05 * tau;
    let d3 = (hd(mode + delta).2 - hd(mode - delta).2) / (2.0 * delta);
    let lambda = {
        let l = d3 * tau.powi(3) / 3.0;
        if l.is_finite() { l.clamp(-MAX_SKEW, MAX_SKEW) } else { 0.0 }
    };
    let skewed = lambda.abs() > 1e-8;
    // node map and its first two derivatives
    let map = |x: f64| -> (f64, f64, f64) {
        if skewed {
            let e = (lambda * x).exp();
            (mode + tau * (lambda * x).exp_m1() / lambda, tau * e, tau * lambda * e)
        } else {
            (mode + tau * x, tau, 0.0)
        }
    };
    let jac = |x: f64| if skewed { lambda * x } else { 0.0 };
    let hx = |x: f64| -> (f64, f64, f64) {
        let (s, p1, p2) = map(x);
        let (h, d1, d2) = hd(s);
        let jd = if skewed { lambda } else { 0.0 };
        (h + jac(x), d1 * p1 + jd, d2 * p1 * p1 + d1 * p2)
    };
    let (xm, xd2) = if skewed {
        let (xm, _, _, xd2) = find_mode(&hx, 0.0, 1.0);
        (xm, xd2)
    } else {
        (0.0, -1.0)
    };
    let t = if xd2 < 0.0 { (-xd2).sqrt().recip() } else { 1.0 };
    let r = std::f64::consts::SQRT_2 * t;
    let ln_r = (r * tau).ln();
    let mut points = Vec::with_capacity(rule.order);
    let mut logs = Vec::with_capacity(rule.order);
    for (z, lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let x = xm + r * z;
        let s = map(x).0;
        points.push(s);
        logs.push(lw + z * z + ln_r + hd(s).0 + jac(x));
    }
    let log_mass = log_sum_exp(&logs);
    let probs = logs.iter().map(|l| (l - log_mass).exp()).collect();
    AdaptiveNodes { points, probs, log_mass }
}

/// Largest grid step for integrals with a noisy emission. Their integrands are
/// analytic within `pi` of the real axis, so the error is near `exp(-2 pi^2 / step)`.
pub(crate) const NOISY_STEP: f64 = 0.4;

/// Log-integrand drop below the maximum at which [`trapezoid_nodes`] stops.
const TAIL_DROP: f64 = 40.0;

/// Trapezoid rule for `exp(h)` on a uniform grid for integrands that need not
/// be log-concave.
///
/// Modes are sought from every start. The grid step is at most `max_step` and
/// at most two thirds of both `scale` and the narrowest mode scale. The grid
/// runs from the lowest to the highest mode and beyond until `h` has fallen
/// `TAIL_DROP` below its largest value. For integrands analytic in a strip around the real
/// axis the error decays geometrically in `1 / step`.
pub(crate) fn trapezoid_nodes(
    hd: &impl Fn(f64) -> (f64, f64, f64),
    starts: &[f64],
    scale: f64,
    max_step: f64,
) -> AdaptiveNodes {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut top = f64::NEG_INFINITY;
    let mut tau_min = scale;
    for &start in starts {
        let (m, h, _, d2) = find_mode(hd, start, scale);
        if d2 < 0.0 {
            tau_min = tau_min.min((-d2).sqrt().recip());
        }
        lo = lo.min(m);
        hi = hi.max(m);
        top = top.max(h);
    }
    let step = max_step.min(tau_min.min(scale) / 1.5);
    let mut points = vec![];
    let mut logs = vec![];
    let inner = ((hi - lo) / step).floor() as usize + 1;
    for i in 0..inner {
        let s = lo + i as f64 * step;
        points.push(s);
        logs.push(hd(s).0);
    }
    for (from, dir) in [(lo, -1.0), (lo + (inner - 1) as f64 * step, 1.0)] {
        let mut k = 1.0;
        loop {
            let s = from + dir * k * step;
            let h = hd(s).0;
            if !(h > top - TAIL_DROP) {
                break;
            }
            points.push(s);
            logs.push(h);
            k += 1.0;
        }
    }
    let log_mass = log_sum_exp(&logs) + step.ln();
    let probs = logs.iter().map(|l| (l - log_mass).exp() * step).collect();
    AdaptiveNodes { points, probs, log_mass }
}
