use std::fmt;

/// Why an EM stage stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The data pin the estimate to the boundary of the parameter space.
    Degenerate(String),
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::Converged => f.write_str("converged"),
            StopReason::MaxIterations => f.write_str("max-iterations"),
            StopReason::Degenerate(why) => write!(f, "degenerate ({why})"),
        }
    }
}

/// Objective values and stopping information of one EM stage.
///
/// `objective[t]` is the objective at the parameters entering iteration `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    pub stage: String,
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub reason: StopReason,
    /// Groups (or roots) whose coefficients are all exactly zero.
    pub zero_groups: usize,
    pub notes: Vec<String>,
}

impl EmTrace {
    pub(crate) fn new(stage: impl Into<String>) -> Self {
        EmTrace {
            stage: stage.into(),
            objective: vec![],
            iterations: 0,
            reason: StopReason::MaxIterations,
            zero_groups: 0,
            notes: vec![],
        }
    }

    pub fn converged(&self) -> bool {
        self.reason == StopReason::Converged
    }

    /// Largest decrease between consecutive objective values, relative to `max(1, |objective|)`.
    pub fn worst_relative_decrease(&self) -> f64 {
        self.objective
            .windows(2)
            .map(|p| (p[0] - p[1]) / p[0].abs().max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when no step decreased the objective by more than `slack` (relative).
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objective.len() < 2 || self.worst_relative_decrease() <= slack
    }
}

pub(crate) fn param_change_small(old: &[f64], new: &[f64], tol: f64) -> bool {
    old.iter().zip(new).all(|(a, b)| (a - b).abs() <= tol * (1.0 + a.abs()))
}
