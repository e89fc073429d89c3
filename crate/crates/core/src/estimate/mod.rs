//! Parameter estimation: moment estimators and level-wise composite-likelihood EM.
//!
//! All one-dimensional latent integrals use Gauss-Hermite rules re-centred at
//! the mode of the integrand and scaled by its curvature there.

mod accel;
mod fit;
mod level;
mod moments;
mod quadrature;
mod root;
mod trace;

pub use fit::{fit_glg, FitConfig, FitReport, DEFAULT_QUAD_ORDER, ZERO_RELATIVE};
pub use level::{group_moments, level_em, level_log_likelihood, GroupMoments, LevelGroups};
pub use moments::{homogeneous_root_init, moment_estimates, moment_init, MomentEstimates, MomentInit};
pub use quadrature::{gauss_hermite, Posterior1d, QuadratureRule, MAX_ORDER};
pub use root::{marginal_em, noisy_posterior, root_em, root_log_marginal, root_posterior};
pub use trace::{EmTrace, StopReason};

pub(crate) use quadrature::{trapezoid_nodes, NOISY_STEP};
