use std::f64::consts::PI;

use rayon::prelude::*;

use super::accel::accelerated_em;
use super::quadrature::{adaptive_nodes, QuadratureRule};
use super::root::root_log_joint;
use super::trace::{EmTrace, StopReason};
use crate::error::{GlgError, Result};
use crate::wavelet::WaveletForest;

/// Parent-plus-children groups of one transition level, flattened over trees.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGroups {
    pub branching: usize,
    pub parents: Vec<f64>,
    /// `branching` consecutive entries per parent.
    pub children: Vec<f64>,
}

impl LevelGroups {
    pub fn new(parents: Vec<f64>, children: Vec<f64>, branching: usize) -> Result<Self> {
        if branching == 0 || children.len() != parents.len() * branching {
            return Err(GlgError::dim(format!(
                "{} children do not form groups of {branching} for {} parents",
                children.len(),
                parents.len()
            )));
        }
        Ok(LevelGroups { branching, parents, children })
    }

    /// Groups whose parent sits on tree level `r` (children on `r + 1`), `1 <= r < levels`.
    pub fn from_forest(forest: &WaveletForest, r: usize) -> Result<Self> {
        let topo = &forest.topology;
        if r == 0 || r >= topo.levels() {
            return Err(GlgError::arg(format!("transition level {r} out of range for {} levels", topo.levels())));
        }
        let b = topo.branching();
        let mut parents = Vec::with_capacity(forest.tree_count() * topo.level_size(r));
        let mut children = Vec::with_capacity(parents.capacity() * b);
        for row in forest.coefficients.rows() {
            for h in topo.level_nodes(r) {
                parents.push(row[h]);
                children.extend(topo.children(h).map(|j| row[j]));
            }
        }
        Self::new(parents, children, b)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn group(&self, g: usize) -> (f64, &[f64]) {
        (self.parents[g], &self.children[g * self.branching..(g + 1) * self.branching])
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln G(d)` and the first three cumulants of `u` under `N(u; d, kappa_sq) phi(u)`,
/// where `phi(u) = exp(-(exp(-u) + u) / 2) / sqrt(2 pi)`.
#[derive(Debug, Clone, Copy)]
struct Inner {
    log_g: f64,
    m1: f64,
    v: f64,
    c3: f64,
}

fn inner_direct(rule: &QuadratureRule, d: f64, kappa_sq: f64) -> Inner {
    let ln_norm = 0.5 * (2.0 * PI * kappa_sq).ln() + LN_SQRT_2PI;
    let hd = |u: f64| {
        let e = (-u).exp();
        (
            -(u - d).powi(2) / (2.0 * kappa_sq) - ln_norm - 0.5 * (e + u),
            -(u - d) / kappa_sq + 0.5 * (e - 1.0),
            -1.0 / kappa_sq - 0.5 * e,
        )
    };
    let p = adaptive_nodes(rule, &hd, d, kappa_sq.sqrt()).summary();
    Inner { log_g: p.log_mass, m1: p.mean, v: p.var, c3: p.m3 }
}

/// Beyond this offset above `kappa_sq` the `exp(-u)` term is below double precision.
const UPPER_OFFSET: f64 = 40.0;
const TABLE_LOW: f64 = -12.0;
const TABLE_STEP: f64 = 0.005;
/// Longest tabulated range; beyond it the integrals are computed directly.
const TABLE_SPAN: f64 = 300.0;

fn inner_closed_form(d: f64, kappa_sq: f64) -> Inner {
    Inner { log_g: -LN_SQRT_2PI - d / 2.0 + kappa_sq / 8.0, m1: d - kappa_sq / 2.0, v: kappa_sq, c3: 0.0 }
}

/// Tabulated inner integrals for one `kappa_sq`, interpolated by cubic Hermite
/// polynomials whose slopes come from the cumulant identities
/// `(ln G)' = (m1 - d) / kappa_sq`, `m1' = v / kappa_sq`, `v' = c3 / kappa_sq`.
struct InnerTable {
    kappa_sq: f64,
    lo: f64,
    hi: f64,
    /// Start of the closed-form range.
    closed: f64,
    values: Vec<Inner>,
}

impl InnerTable {
    fn new(rule: &QuadratureRule, kappa_sq: f64) -> Self {
        let lo = TABLE_LOW;
        let closed = kappa_sq + UPPER_OFFSET;
        let n = ((closed.min(lo + TABLE_SPAN) - lo) / TABLE_STEP).ceil() as usize;
        let values = (0..=n).into_par_iter().map(|i| inner_direct(rule, lo + i as f64 * TABLE_STEP, kappa_sq)).collect();
        InnerTable { kappa_sq, lo, hi: lo + n as f64 * TABLE_STEP, closed, values }
    }

    fn eval(&self, rule: &QuadratureRule, d: f64) -> Inner {
        if d >= self.closed {
            return inner_closed_form(d, self.kappa_sq);
        }
        if d < self.lo || d >= self.hi || !d.is_finite() {
            return inner_direct(rule, d, self.kappa_sq);
        }
        let x = (d - self.lo) / TABLE_STEP;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - i as f64;
        let (a, b) = (&self.values[i], &self.values[i + 1]);
        let (da, db) = (self.lo + i as f64 * TABLE_STEP, self.lo + (i + 1) as f64 * TABLE_STEP);
        let k = self.kappa_sq;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let h = TABLE_STEP;
        let herm = |fa: f64, ga: f64, fb: f64, gb: f64| h00 * fa + h10 * h * ga + h01 * fb + h11 * h * gb;
        Inner {
            log_g: herm(a.log_g, (a.m1 - da) / k, b.log_g, (b.m1 - db) / k),
            m1: herm(a.m1, a.v / k, b.m1, b.v / k),
            v: herm(a.v, a.c3 / k, b.v, b.c3 / k),
            c3: 0.0,
        }
    }
}

/// Integrates one child state out given its conditional mean `m = alpha + beta s_parent`.
struct ChildKernel<'a> {
    rule: &'a QuadratureRule,
    kappa_sq: f64,
    table: Option<InnerTable>,
}

/// Contribution of one child: `ln int N(s_j; m, kappa_sq) N(w_j; 0, exp(s_j)) ds_j`,
/// its first two derivatives in `m`, and the conditional mean and variance of `s_j`.
#[derive(Debug, Clone, Copy)]
struct ChildTerm {
    c: f64,
    dm: f64,
    dmm: f64,
    mean: f64,
    var: f64,
}

impl<'a> ChildKernel<'a> {
    fn direct(rule: &'a QuadratureRule, kappa_sq: f64) -> Self {
        ChildKernel { rule, kappa_sq, table: None }
    }

    fn tabulated(rule: &'a QuadratureRule, kappa_sq: f64) -> Self {
        ChildKernel { rule, kappa_sq, table: Some(InnerTable::new(rule, kappa_sq)) }
    }

    /// `log_w2` is `ln w_j^2`, `None` when `w_j = 0`. With `zero_missing` a
    /// zero coefficient is treated as unobserved.
    #[inline]
    fn term(&self, m: f64, log_w2: Option<f64>, zero_missing: bool) -> ChildTerm {
        let k = self.kappa_sq;
        match log_w2 {
            None if zero_missing => ChildTerm { c: 0.0, dm: 0.0, dmm: 0.0, mean: m, var: k },
            None => ChildTerm { c: -LN_SQRT_2PI - m / 2.0 + k / 8.0, dm: -0.5, dmm: 0.0, mean: m - k / 2.0, var: k },
            Some(lw) => {
                let d = m - lw;
                let inner = match &self.table {
                    Some(t) => t.eval(self.rule, d),
                    None => inner_direct(self.rule, d, k),
                };
                ChildTerm {
                    c: inner.log_g - 0.5 * lw,
                    dm: (inner.m1 - d) / k,
                    dmm: (inner.v - k) / (k * k),
                    mean: inner.m1 + lw,
                    var: inner.v,
                }
            }
        }
    }
}

/// Posterior moments of one group `(s_i, s_c(i))` given `(w_i, w_c(i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMoments {
    /// `ln q(w_i, w_c(i))`.
    pub log_lik: f64,
    pub e_parent: f64,
    pub e_parent_sq: f64,
    pub e_child: Vec<f64>,
    pub e_child_parent: Vec<f64>,
    pub e_child_sq: Vec<f64>,
}

fn group_moments_with(
    kernel: &ChildKernel,
    w_parent: f64,
    children: &[f64],
    prior: (f64, f64),
    alpha: f64,
    beta: f64,
    zero_missing: bool,
) -> GroupMoments {
    let lws: Vec<Option<f64>> = children.iter().map(|&w| if w == 0.0 { None } else { Some((w * w).ln()) }).collect();
    let (mu, var) = prior;
    let parent_missing = zero_missing && w_parent == 0.0;
    let hd = |s: f64| {
        let (mut h, mut d1, mut d2) = if parent_missing {
            (-(s - mu).powi(2) / (2.0 * var) - 0.5 * (2.0 * PI * var).ln(), -(s - mu) / var, -1.0 / var)
        } else {
            root_log_joint(s, w_parent, mu, var)
        };
        let m = alpha + beta * s;
        for lw in &lws {
            let t = kernel.term(m, *lw, zero_missing);
            h += t.c;
            d1 += beta * t.dm;
            d2 += beta * beta * t.dmm;
        }
        (h, d1, d2)
    };
    let nodes = adaptive_nodes(kernel.rule, &hd, mu, var.sqrt());
    let nc = children.len();
    let mut out = GroupMoments {
        log_lik: nodes.log_mass,
        e_parent: 0.0,
        e_parent_sq: 0.0,
        e_child: vec![0.0; nc],
        e_child_parent: vec![0.0; nc],
        e_child_sq: vec![0.0; nc],
    };
    for (&s, &p) in nodes.points.iter().zip(&nodes.probs) {
        if p == 0.0 {
            continue;
        }
        out.e_parent += p * s;
        out.e_parent_sq += p * s * s;
        let m = alpha + beta * s;
        for (j, lw) in lws.iter().enumerate() {
            let t = kernel.term(m, *lw, zero_missing);
            out.e_child[j] += p * t.mean;
            out.e_child_parent[j] += p * s * t.mean;
            out.e_child_sq[j] += p * (t.var + t.mean * t.mean);
        }
    }
    out
}

/// Posterior moments of one group computed without tabulation.
///
/// `prior` is `(mu(r-1), sigma_sq(r-1))` of the parent and `(alpha, beta, kappa_sq)`
/// the transition to the children.
pub fn group_moments(
    rule: &QuadratureRule,
    w_parent: f64,
    children: &[f64],
    prior: (f64, f64),
    transition: (f64, f64, f64),
) -> GroupMoments {
    let (a, b, k) = transition;
    group_moments_with(&ChildKernel::direct(rule, k), w_parent, children, prior, a, b, false)
}

#[derive(Debug, Clone, Copy, Default)]
struct Suff {
    n: f64,
    sx: f64,
    sxx: f64,
    sy: f64,
    sxy: f64,
    syy: f64,
    obj: f64,
}

fn e_step(groups: &LevelGroups, prior: (f64, f64), trans: (f64, f64, f64), rule: &QuadratureRule) -> Result<Suff> {
    let (a, b, k) = trans;
    let kernel = ChildKernel::tabulated(rule, k);
    let per_group: Vec<GroupMoments> = (0..groups.len())
        .into_par_iter()
        .map(|g| {
            let (wp, ch) = groups.group(g);
            group_moments_with(&kernel, wp, ch, prior, a, b, true)
        })
        .collect();
    let mut s = Suff::default();
    for (g, m) in per_group.iter().enumerate() {
        let nc = m.e_child.len() as f64;
        let vals = [m.log_lik, m.e_parent, m.e_parent_sq];
        if vals.iter().chain(&m.e_child).chain(&m.e_child_sq).any(|v| !v.is_finite()) {
            let (wp, ch) = groups.group(g);
            return Err(GlgError::Numerical(format!(
                "non-finite E-step moments for group {g} (parent {wp}, children {ch:?}) at alpha={a}, beta={b}, kappa_sq={k}"
            )));
        }
        s.obj += m.log_lik;
        s.n += nc;
        s.sx += nc * m.e_parent;
        s.sxx += nc * m.e_parent_sq;
        s.sy += m.e_child.iter().sum::<f64>();
        s.sxy += m.e_child_parent.iter().sum::<f64>();
        s.syy += m.e_child_sq.iter().sum::<f64>();
    }
    Ok(s)
}

/// Log composite likelihood `sum_g ln q(w_i, w_c(i))` of a level, the EM objective.
///
/// Coefficients that are exactly zero are treated as unobserved: they add
/// nothing to the objective and their states keep the prior moments in the
/// E-step. A zero has density `exp(-m / 2 + kappa_sq / 8) / sqrt(2 pi)`,
/// which grows without bound in `kappa_sq`, so counting zeros as observed
/// leaves the likelihood without a maximum whenever they occur.
pub fn level_log_likelihood(
    groups: &LevelGroups,
    prior: (f64, f64),
    transition: (f64, f64, f64),
    rule: &QuadratureRule,
) -> Result<f64> {
    Ok(e_step(groups, prior, transition, rule)?.obj)
}

fn m_step(s: &Suff, old: (f64, f64, f64)) -> (f64, f64, f64) {
    let den = s.n * s.sxx - s.sx * s.sx;
    let beta = if den > 1e-12 * s.n * s.sxx.abs().max(1.0) { (s.n * s.sxy - s.sx * s.sy) / den } else { old.1 };
    let alpha = (s.sy - beta * s.sx) / s.n;
    let rss = s.syy - 2.0 * alpha * s.sy - 2.0 * beta * s.sxy
        + alpha * alpha * s.n
        + 2.0 * alpha * beta * s.sx
        + beta * beta * s.sxx;
    let kappa_sq = (rss / s.n).max(1e-12);
    (alpha, beta, kappa_sq)
}

/// EM for `(alpha(r), beta(r), kappa_sq(r))` with the parent level's
/// `(mu(r-1), sigma_sq(r-1))` held fixed.
pub fn level_em(
    groups: &LevelGroups,
    fixed: (f64, f64),
    init: (f64, f64, f64),
    rule: &QuadratureRule,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64, f64, EmTrace)> {
    if !(fixed.1 > 0.0) {
        return Err(GlgError::arg(format!("parent-level variance must be positive, got {}", fixed.1)));
    }
    if !(init.2 > 0.0) {
        return Err(GlgError::arg(format!("initial kappa_sq must be positive, got {}", init.2)));
    }
    if groups.is_empty() {
        return Err(GlgError::arg("level EM needs at least one group"));
    }
    let mut trace = EmTrace::new("level");
    trace.zero_groups = (0..groups.len())
        .filter(|&g| {
            let (wp, ch) = groups.group(g);
            wp == 0.0 && ch.iter().all(|&w| w == 0.0)
        })
        .count();
    if groups.children.iter().all(|&w| w == 0.0) {
        trace.reason = StopReason::Degenerate("all child coefficients are zero; nothing informs the transition".into());
        return Ok((init.0, init.1, init.2, trace));
    }
    let zeros = groups.parents.iter().chain(&groups.children).filter(|&&w| w == 0.0).count();
    if zeros > 0 {
        trace.notes.push(format!(
            "{zeros} zero coefficients treated as unobserved, {} groups entirely zero",
            trace.zero_groups
        ));
    }
    let em_map = |t: &[f64]| -> Result<(f64, Vec<f64>)> {
        let theta = (t[0], t[1], t[2]);
        let s = e_step(groups, fixed, theta, rule)?;
        let next = m_step(&s, theta);
        Ok((s.obj, vec![next.0, next.1, next.2]))
    };
    let t = accelerated_em(&[init.0, init.1, init.2], em_map, |t| t[2] > 0.0, tol, max_iter, &mut trace)?;
    let theta = (t[0], t[1], t[2]);
    Ok((theta.0, theta.1, theta.2, trace))
}
