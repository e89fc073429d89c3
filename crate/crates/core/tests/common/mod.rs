//! Reference computations shared by the integration tests. None of them use
//! the library's quadrature or solvers.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<const N: usize>(f: &dyn Fn(f64) -> [f64; N], a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc.map(|v| WGK[7] * v);
    let mut g = fc.map(|v| WG[3] * v);
    for j in 0..7 {
        let x = h * XGK[j];
        let (lo, hi) = (f(c - x), f(c + x));
        for q in 0..N {
            let s = lo[q] + hi[q];
            k[q] += WGK[j] * s;
            if j % 2 == 1 {
                g[q] += WG[j / 2] * s;
            }
        }
    }
    let mut err = [0.0; N];
    for q in 0..N {
        err[q] = (k[q] - g[q]).abs() * h;
        k[q] *= h;
    }
    (k, err)
}

/// Adaptive Gauss-Kronrod (7, 15) integral of a vector-valued `f` over `[a, b]`.
///
/// Globally adaptive: the interval with the largest error estimate is split
/// until every component's total estimate is below `tol + 1e-14 |value|` or
/// 4000 intervals are in use.
pub fn integrate_vec<const N: usize>(f: &dyn Fn(f64) -> [f64; N], a: f64, b: f64, tol: f64) -> [f64; N] {
    let mut parts = vec![(a, b, kronrod(f, a, b))];
    let sum = |parts: &[(f64, f64, ([f64; N], [f64; N]))], which: usize| {
        let mut out = [0.0; N];
        for p in parts {
            let v = if which == 0 { p.2 .0 } else { p.2 .1 };
            for q in 0..N {
                out[q] += v[q];
            }
        }
        out
    };
    while parts.len() < 4000 {
        let (value, err) = (sum(&parts, 0), sum(&parts, 1));
        if (0..N).all(|q| err[q] <= tol + 1e-14 * value[q].abs()) {
            break;
        }
        let worst = |p: &(f64, f64, ([f64; N], [f64; N]))| p.2 .1.iter().sum::<f64>();
        let (i, _) = parts.iter().enumerate().max_by(|x, y| worst(x.1).total_cmp(&worst(y.1))).unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, kronrod(f, lo, mid)));
        parts.push((mid, hi, kronrod(f, mid, hi)));
    }
    sum(&parts, 0)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    integrate_vec(&|x| [f(x)], a, b, tol)[0]
}

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// `ln int exp(g)`, `E[s]`, `E[s^2]` for a log-concave `exp(g)` whose mass lies in `[a, b]`.
pub fn log_moments(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let peak = g(golden_max(g, a, b));
    let [z, m1, m2] = integrate_vec(
        &|s| {
            let e = (g(s) - peak).exp();
            [e, s * e, s * s * e]
        },
        a,
        b,
        1e-15,
    );
    (peak + z.ln(), m1 / z, m2 / z)
}

pub fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - (x - mean).powi(2) / (2.0 * var)
}

/// Range holding the mass of `N(s; mean, var) N(w; 0, exp(s))`.
pub fn state_range(w: f64, mean: f64, var: f64) -> (f64, f64) {
    let sd = var.sqrt();
    let mut lo = mean - 15.0 * sd;
    let mut hi = mean + 15.0 * sd;
    if w != 0.0 {
        let l = (w * w).ln();
        lo = lo.min(l - 10.0).max(mean - 40.0 * sd);
        hi = hi.max(l + 10.0).min(mean + 40.0 * sd);
    }
    (lo, hi)
}

/// `(ln q(w), E[s | w], E[s^2 | w])` with `s ~ N(mean, var)`, `w | s ~ N(0, exp(s))`.
pub fn root_oracle(w: f64, mean: f64, var: f64) -> (f64, f64, f64) {
    let g = |s: f64| log_normal_pdf(s, mean, var) + log_normal_pdf(w, 0.0, s.exp());
    let (a, b) = state_range(w, mean, var);
    log_moments(&g, a, b)
}

/// Moments of one parent and one child given their coefficients.
#[derive(Debug, Clone, Copy)]
pub struct PairOracle {
    pub log_lik: f64,
    pub e_parent: f64,
    pub e_parent_sq: f64,
    pub e_child: f64,
    pub e_child_parent: f64,
    pub e_child_sq: f64,
}

/// Nested adaptive integration over `(s_parent, s_child)`.
pub fn pair_oracle(wp: f64, wc: f64, prior: (f64, f64), trans: (f64, f64, f64)) -> PairOracle {
    let (mu, var) = prior;
    let (alpha, beta, kappa_sq) = trans;
    let inner = |sp: f64| root_oracle(wc, alpha + beta * sp, kappa_sq);
    let outer_log = |sp: f64| log_normal_pdf(sp, mu, var) + log_normal_pdf(wp, 0.0, sp.exp()) + inner(sp).0;
    let (a, b) = state_range(wp, mu, var);
    let peak = outer_log(golden_max(&outer_log, a, b));
    let [z, p1, p2, c1, cp, c2] = integrate_vec(
        &|sp| {
            let (lj, m1, m2) = inner(sp);
            let e = (log_normal_pdf(sp, mu, var) + log_normal_pdf(wp, 0.0, sp.exp()) + lj - peak).exp();
            [e, sp * e, sp * sp * e, m1 * e, sp * m1 * e, m2 * e]
        },
        a,
        b,
        1e-13,
    );
    PairOracle {
        log_lik: peak + z.ln(),
        e_parent: p1 / z,
        e_parent_sq: p2 / z,
        e_child: c1 / z,
        e_child_parent: cp / z,
        e_child_sq: c2 / z,
    }
}

/// `E[w | v]` for `v = w + eps` by direct integration over `s`.
pub fn shrink_oracle(v: f64, mu: f64, var: f64, c: f64) -> f64 {
    let g = |s: f64| log_normal_pdf(s, mu, var) + log_normal_pdf(v, 0.0, s.exp() + c);
    let sd = var.sqrt();
    let (a, b) = (mu - 15.0 * sd, mu + 15.0 * sd);
    // the integrand need not be unimodal; scale by a dense grid maximum
    let peak = (0..=3000).map(|i| g(a + (b - a) * i as f64 / 3000.0)).fold(f64::NEG_INFINITY, f64::max);
    let f0 = |s: f64| (g(s) - peak).exp();
    let z = integrate(&f0, a, b, 1e-16);
    let num = integrate(&|s| f0(s) * s.exp() / (s.exp() + c), a, b, 1e-16);
    v * num / z
}

/// Root of a decreasing function on `[a, b]` by bisection.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    assert!(f(a) > 0.0 && f(b) < 0.0, "root not bracketed");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Maximizer of `-(s - m)' P (s - m) / 2 - sum(w_i^2 exp(-s_i) + s_i) / 2` by
/// damped Newton with dense linear algebra.
pub fn dense_map(p: &DMatrix<f64>, m: &[f64], w: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mean = DVector::from_column_slice(m);
    let obj = |s: &DVector<f64>| {
        let d = s - &mean;
        -0.5 * d.dot(&(p * &d)) - 0.5 * (0..n).map(|i| w[i] * w[i] * (-s[i]).exp() + s[i]).sum::<f64>()
    };
    let mut s = mean.clone();
    for _ in 0..100 {
        let d = &s - &mean;
        let mut grad = -(p * &d);
        let mut hess = -p.clone();
        for i in 0..n {
            let e = w[i] * w[i] * (-s[i]).exp();
            grad[i] += 0.5 * (e - 1.0);
            hess[(i, i)] -= 0.5 * e;
        }
        if grad.amax() < 1e-13 {
            break;
        }
        let step = (-hess).lu().solve(&grad).expect("negative Hessian is positive definite");
        if grad.amax() < 1e-6 {
            // quadratic convergence region; objective differences are rounding noise here
            s += step;
            continue;
        }
        let f0 = obj(&s);
        let mut t = 1.0;
        loop {
            let cand = &s + &step * t;
            if obj(&cand) >= f0 || t < 1e-12 {
                s = cand;
                break;
            }
            t *= 0.5;
        }
    }
    s.as_slice().to_vec()
}

pub fn to_nalgebra(a: &ndarray::Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Parameters drawn uniformly from a moderate box.
pub fn random_params(rng: &mut impl rand::Rng, levels: usize) -> glg::GlgParams {
    let t = levels - 1;
    glg::GlgParams::new(
        rng.random_range(-4.0..0.0),
        rng.random_range(0.2..2.0),
        (0..t).map(|_| rng.random_range(-2.0..0.5)).collect(),
        (0..t).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..t).map(|_| rng.random_range(0.1..1.0)).collect(),
    )
    .expect("valid draw")
}
