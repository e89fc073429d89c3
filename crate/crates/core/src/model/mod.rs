//! The GLG probability model on a single tree and on forests of i.i.d. trees.

mod covariance;
mod density;
mod moments;
mod params;
mod simulate;
mod topology;

pub use covariance::{covariance_matrix, hidden_covariance, precision_matrix, TreePrecision};
pub use density::{joint_log_density, joint_log_density_quadratic, log_emission};
pub use moments::{theoretical_moments, TheoreticalMoments};
pub use params::{GlgParams, HomogeneousGlgParams, LevelMoments};
pub use simulate::simulate_forest;
pub use topology::TreeTopology;

use ndarray::Array2;

/// Hidden states of `k` trees, one row per tree in breadth-first node order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub values: Array2<f64>,
}

impl StateField {
    pub fn new(values: Array2<f64>) -> Self {
        StateField { values }
    }

    pub fn tree_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn node_count(&self) -> usize {
        self.values.ncols()
    }
}
