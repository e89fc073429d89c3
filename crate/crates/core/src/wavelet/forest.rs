use ndarray::Array2;

use super::{Direction, WaveletPyramid};
use crate::error::{GlgError, Result};
use crate::model::TreeTopology;

/// `k` trees of wavelet coefficients sharing one topology.
///
/// Row `t` of `coefficients` holds tree `t` in breadth-first node order.
/// For forests taken from an image, tree `t = y * m + x` is rooted at
/// position `(y, x)` of the `m x m` coarsest subband.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletForest {
    pub direction: Option<Direction>,
    pub topology: TreeTopology,
    pub coefficients: Array2<f64>,
}

impl WaveletForest {
    pub fn new(direction: Option<Direction>, topology: TreeTopology, coefficients: Array2<f64>) -> Result<Self> {
        if coefficients.ncols() != topology.node_count() {
            return Err(GlgError::dim(format!(
                "forest has {} columns but the topology has {} nodes",
                coefficients.ncols(),
                topology.node_count()
            )));
        }
        if coefficients.nrows() == 0 {
            return Err(GlgError::dim("forest has no trees"));
        }
        Ok(WaveletForest { direction, topology, coefficients })
    }

    pub fn tree_count(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn node_count(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn levels(&self) -> usize {
        self.topology.levels()
    }
}

/// Position of each quadtree node inside its tree's block at that node's level.
pub(crate) fn quadtree_local_positions(topology: &TreeTopology) -> Vec<(usize, usize)> {
    let mut pos = vec![(0usize, 0usize); topology.node_count()];
    for i in 0..topology.node_count() {
        let (py, px) = pos[i];
        for (c, j) in topology.children(i).enumerate() {
            pos[j] = (2 * py + c / 2, 2 * px + c % 2);
        }
    }
    pos
}

/// Subband coordinates `(level, row, col)` of every (tree, node) pair, in forest order.
fn coordinates(coarse: usize, topology: &TreeTopology) -> impl Iterator<Item = (usize, usize, usize, usize, usize)> + '_ {
    let local = quadtree_local_positions(topology);
    let levels: Vec<usize> = (0..topology.node_count()).map(|i| topology.level_of(i)).collect();
    (0..coarse * coarse).flat_map(move |t| {
        let (ty, tx) = (t / coarse, t % coarse);
        let local = local.clone();
        let levels = levels.clone();
        (0..local.len()).map(move |i| {
            let r = levels[i];
            let scale = 1usize << (r - 1);
            (t, i, r, ty * scale + local[i].0, tx * scale + local[i].1)
        })
    })
}

/// Groups the detail coefficients of one orientation into quadtrees, one per coarsest position.
pub fn extract_forest(pyramid: &WaveletPyramid, direction: Direction) -> Result<WaveletForest> {
    let levels = pyramid.levels();
    if levels == 0 {
        return Err(GlgError::dim("pyramid has no detail levels"));
    }
    let topology = TreeTopology::quadtree(levels)?;
    let m = pyramid.coarsest_side();
    let mut coefficients = Array2::zeros((m * m, topology.node_count()));
    for (t, i, r, y, x) in coordinates(m, &topology) {
        coefficients[[t, i]] = pyramid.subband(direction, r)[[y, x]];
    }
    WaveletForest::new(Some(direction), topology, coefficients)
}

/// Writes `forest` back into the `direction` subbands of a copy of `pyramid`.
pub fn insert_forest(forest: &WaveletForest, pyramid: &WaveletPyramid, direction: Direction) -> Result<WaveletPyramid> {
    let m = pyramid.coarsest_side();
    if forest.topology.branching() != 4 || forest.levels() != pyramid.levels() || forest.tree_count() != m * m {
        return Err(GlgError::dim(format!(
            "forest ({} trees, {} levels, branching {}) does not fit a {}-level pyramid with {m}x{m} coarsest subbands",
            forest.tree_count(),
            forest.levels(),
            forest.topology.branching(),
            pyramid.levels()
        )));
    }
    let mut out = pyramid.clone();
    for (t, i, r, y, x) in coordinates(m, &forest.topology) {
        out.subband_mut(direction, r)[[y, x]] = forest.coefficients[[t, i]];
    }
    Ok(out)
}
