//! Gaussian-log-Gaussian (GLG) wavelet tree models.
//!
//! Wavelet coefficients of an image subband are grouped into quadtrees. Each
//! coefficient `w_i` is zero-mean Gaussian with variance `exp(s_i)`, and the
//! hidden log-variances `s` form a Gaussian field on the tree: the root is
//! `N(mu0, sigma0_sq)` and a child given its parent is
//! `N(alpha(r) + beta(r) s_parent, kappa_sq(r))`.
//!
//! The crate covers the orthonormal wavelet transform and forest layout
//! ([`wavelet`]), the probability model ([`model`]), moment and
//! composite-likelihood EM estimation ([`estimate`]), MAP hidden states
//! ([`states`]), denoising ([`denoise`]), edge detection ([`edges`]) and the
//! command line front end ([`cli`]).

pub mod cli;
pub mod denoise;
pub mod edges;
pub mod error;
pub mod estimate;
pub mod io;
pub mod model;
pub mod states;
pub mod wavelet;

pub use error::{GlgError, Result};
pub use estimate::{fit_glg, FitConfig, FitReport, QuadratureRule};
pub use model::{GlgParams, HomogeneousGlgParams, LevelMoments, StateField, TreeTopology};
pub use wavelet::{Direction, Filter, ImageGrid, WaveletForest, WaveletPyramid};
