//! Edge detection from MAP hidden states.
//!
//! A node is labelled when its MAP state reaches the `p`-quantile of its
//! level's prior. The labels of each direction are placed in an otherwise
//! zero pyramid and inverse transformed; pixels with a non-negligible
//! response are edges. Directions are combined with a logical OR.

use std::collections::BTreeSet;

use log::warn;
use ndarray::Array2;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{GlgError, Result};
use crate::estimate::{fit_glg, FitConfig};
use crate::model::{GlgParams, StateField, TreeTopology};
use crate::states::{map_states, MapConfig};
use crate::wavelet::{dwt2_forward, dwt2_inverse, insert_forest, Direction, Filter, ImageGrid, WaveletForest, WaveletPyramid};

pub const DEFAULT_FRACTILE: f64 = 0.9;

/// Relative magnitude below which an inverse-transformed label response counts as zero.
pub const RESPONSE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelForest {
    pub labels: Array2<u8>,
    pub fractile: f64,
    /// Tree levels (1-based) forced to zero.
    pub masked_levels: BTreeSet<usize>,
}

impl LabelForest {
    pub fn count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub pixels: Array2<u8>,
}

impl EdgeMap {
    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&e| e == 1).count()
    }

    /// Image with edges white on black.
    pub fn to_image(&self) -> ImageGrid {
        ImageGrid::new(self.pixels.mapv(f64::from)).unwrap_or_else(|_| unreachable!("edge maps are square and finite"))
    }
}

/// Labels `f_i = 1` iff `s_i >= z_p` of `N(mu(l-1), sigma_sq(l-1))` at the node's level `l`.
pub fn label_states(
    states: &StateField,
    topology: &TreeTopology,
    params: &GlgParams,
    p: f64,
    masked_levels: &BTreeSet<usize>,
) -> Result<LabelForest> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GlgError::arg(format!("fractile must lie in (0, 1), got {p}")));
    }
    if states.node_count() != topology.node_count() || params.levels() != topology.levels() {
        return Err(GlgError::dim("states, topology and parameters do not agree"));
    }
    let lm = params.level_moments();
    let mut thresholds = Vec::with_capacity(lm.levels());
    for r in 0..lm.levels() {
        let normal = Normal::new(lm.mu[r], lm.sigma_sq[r].sqrt()).map_err(|e| GlgError::Numerical(e.to_string()))?;
        thresholds.push(normal.inverse_cdf(p));
    }
    let levels: Vec<usize> = (0..topology.node_count()).map(|i| topology.level_of(i)).collect();
    let labels = Array2::from_shape_fn(states.values.dim(), |(t, i)| {
        let level = levels[i];
        u8::from(!masked_levels.contains(&level) && states.values[[t, i]] >= thresholds[level - 1])
    });
    Ok(LabelForest { labels, fractile: p, masked_levels: masked_levels.clone() })
}

fn response_map(labels: &LabelForest, topology: &TreeTopology, side: usize, filter: Filter) -> Result<Array2<u8>> {
    let levels = topology.levels();
    let zero = WaveletPyramid::zeros(side, levels, filter)?;
    if labels.labels.iter().all(|&l| l == 0) {
        return Ok(Array2::zeros((side, side)));
    }
    let forest = WaveletForest::new(None, topology.clone(), labels.labels.mapv(f64::from))?;
    // the direction only selects the subband; the inverse is computed on a pyramid holding this one band
    let pyramid = insert_forest(&forest, &zero, Direction::Diagonal)?;
    let response = dwt2_inverse(&pyramid)?;
    let peak = response.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(response.values().mapv(|v| u8::from(v.abs() > RESPONSE_EPS * peak)))
}

/// Pixel edge map from per-direction label forests.
pub fn edge_map(labels: &[(Direction, LabelForest)], topology: &TreeTopology, side: usize, filter: Filter) -> Result<EdgeMap> {
    let mut pixels = Array2::<u8>::zeros((side, side));
    for (dir, lf) in labels {
        let levels = topology.levels();
        let expected = (side >> levels).pow(2);
        if lf.labels.dim() != (expected, topology.node_count()) {
            return Err(GlgError::dim(format!(
                "{dir} labels have shape {:?}, expected ({expected}, {})",
                lf.labels.dim(),
                topology.node_count()
            )));
        }
        let m = response_map(lf, topology, side, filter)?;
        pixels.zip_mut_with(&m, |a, b| *a |= *b);
    }
    Ok(EdgeMap { pixels })
}

/// Everything [`detect_edges`] computed along the way.
#[derive(Debug, Clone)]
pub struct EdgeDetection {
    pub map: EdgeMap,
    pub labels: Vec<(Direction, LabelForest)>,
    pub params: Vec<(Direction, Option<GlgParams>)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeConfig {
    pub filter: Filter,
    pub levels: usize,
    pub fractile: f64,
    pub masked_levels: BTreeSet<usize>,
    pub fit: FitConfig,
    pub map: MapConfig,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        EdgeConfig {
            filter: Filter::Haar,
            levels: 3,
            fractile: DEFAULT_FRACTILE,
            masked_levels: BTreeSet::new(),
            fit: FitConfig::default(),
            map: MapConfig::default(),
        }
    }
}

/// Fit, MAP states, labelling and edge map for each direction, OR-combined.
///
/// A direction whose fit fails (for example because all its coefficients
/// are zero) contributes no labels.
pub fn detect_edges(image: &ImageGrid, config: &EdgeConfig) -> Result<EdgeDetection> {
    let pyramid = dwt2_forward(image, config.filter, config.levels)?;
    let topology = TreeTopology::quadtree(config.levels)?;
    let k = pyramid.coarsest_side().pow(2);
    let mut labels = vec![];
    let mut params = vec![];
    let mut warnings = vec![];
    for dir in Direction::ALL {
        let forest = crate::wavelet::extract_forest(&pyramid, dir)?;
        match fit_glg(&forest, &config.fit) {
            Ok(report) => {
                let map = map_states(&forest, &report.params, &config.map)?;
                if !map.failures.is_empty() {
                    let msg = format!("{dir}: MAP did not converge for {} trees", map.failures.len());
                    warn!("{msg}");
                    warnings.push(msg);
                }
                if map.floor_hits > 0 {
                    warnings.push(format!("{dir}: {} states held at the floor", map.floor_hits));
                }
                let lf = label_states(&map.states, &topology, &report.params, config.fractile, &config.masked_levels)?;
                labels.push((dir, lf));
                params.push((dir, Some(report.params)));
            }
            Err(e) => {
                let msg = format!("{dir}: fit failed, no edges from this direction ({e})");
                warn!("{msg}");
                warnings.push(msg);
                let empty = LabelForest {
                    labels: Array2::zeros((k, topology.node_count())),
                    fractile: config.fractile,
                    masked_levels: config.masked_levels.clone(),
                };
                labels.push((dir, empty));
                params.push((dir, None));
            }
        }
    }
    let map = edge_map(&labels, &topology, image.side(), config.filter)?;
    Ok(EdgeDetection { map, labels, params, warnings })
}
