use super::trace::{param_change_small, EmTrace, StopReason};
use crate::error::Result;

/// Attempts at pulling an infeasible extrapolation back towards the plain EM step.
const BACKTRACK: usize = 20;

/// Runs an EM map to a fixed point with squared extrapolation (SQUAREM).
///
/// `em_map(theta)` returns the objective at `theta` and the EM update of
/// `theta`. Each cycle takes two plain EM steps and extrapolates along them;
/// the extrapolated point is used only if its objective is no lower than the
/// one reached by plain EM, so the recorded objective never decreases beyond
/// quadrature error. Convergence is judged on plain EM steps.
/// `trace.iterations` counts calls of `em_map`, capped at `max_iter`.
pub(crate) fn accelerated_em(
    init: &[f64],
    mut em_map: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    feasible: impl Fn(&[f64]) -> bool,
    tol: f64,
    max_iter: usize,
    trace: &mut EmTrace,
) -> Result<Vec<f64>> {
    let mut theta = init.to_vec();
    let mut step_max = 1.0;
    let mut eval = |t: &[f64], trace: &mut EmTrace| -> Result<(f64, Vec<f64>)> {
        trace.iterations += 1;
        let out = em_map(t)?;
        trace.objective.push(out.0);
        Ok(out)
    };
    while trace.iterations < max_iter {
        let (_, t1) = eval(&theta, trace)?;
        if param_change_small(&theta, &t1, tol) {
            trace.reason = StopReason::Converged;
            return Ok(t1);
        }
        if trace.iterations >= max_iter {
            return Ok(t1);
        }
        let (l1, t2) = eval(&t1, trace)?;
        if param_change_small(&t1, &t2, tol) {
            trace.reason = StopReason::Converged;
            return Ok(t2);
        }
        let r: Vec<f64> = t1.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = t2.iter().zip(&t1).zip(&r).map(|((a, b), r)| a - b - r).collect();
        let norm = |x: &[f64]| x.iter().map(|y| y * y).sum::<f64>().sqrt();
        let mut step = -norm(&r) / norm(&v);
        if !step.is_finite() {
            step = -step_max;
        }
        step = step.clamp(-step_max, -1.0);
        let at_max = step == -step_max;
        let extrapolate = |a: f64| -> Vec<f64> {
            theta.iter().zip(&r).zip(&v).map(|((t, r), v)| t - 2.0 * a * r + a * a * v).collect()
        };
        let mut next = t2.clone();
        if step == -1.0 && at_max {
            step_max *= 4.0;
        }
        for _ in 0..BACKTRACK {
            // step = -1 reproduces t2
            if step > -1.0 - 1e-3 || trace.iterations >= max_iter {
                break;
            }
            let candidate = extrapolate(step);
            if !feasible(&candidate) {
                step = 0.5 * (step - 1.0);
                continue;
            }
            let before = trace.objective.len();
            let (lx, tx1) = eval(&candidate, trace)?;
            if lx >= l1 {
                next = tx1;
                if at_max {
                    step_max *= 4.0;
                }
                break;
            }
            // a rejected candidate is not a point of the ascent path
            trace.objective.truncate(before);
            step = 0.5 * (step - 1.0);
        }
        theta = next;
    }
    Ok(theta)
}
