use std::ops::Range;

use crate::error::{GlgError, Result};

/// Complete tree with `levels` levels where every non-leaf has `branching` children.
///
/// Nodes are numbered breadth first from 0 (the root). Levels are 1-based:
/// the root is on level 1 and leaves on level `levels`. The children of a
/// node are consecutive, and the children of node `q`-th on its level are
/// `offset(r + 1) + branching * q + c` for `c` in `0..branching`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    levels: usize,
    branching: usize,
    offsets: Vec<usize>,
}

impl TreeTopology {
    pub fn new(levels: usize, branching: usize) -> Result<Self> {
        if levels == 0 {
            return Err(GlgError::Topology("a tree needs at least one level".into()));
        }
        if branching == 0 {
            return Err(GlgError::Topology("branching factor must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(levels + 1);
        let mut total = 0usize;
        let mut width = 1usize;
        for _ in 0..levels {
            offsets.push(total);
            total = total
                .checked_add(width)
                .ok_or_else(|| GlgError::Topology("tree too large".into()))?;
            width = width
                .checked_mul(branching)
                .ok_or_else(|| GlgError::Topology("tree too large".into()))?;
        }
        offsets.push(total);
        Ok(TreeTopology { levels, branching, offsets })
    }

    /// Quadtree (four children per node).
    pub fn quadtree(levels: usize) -> Result<Self> {
        Self::new(levels, 4)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn node_count(&self) -> usize {
        self.offsets[self.levels]
    }

    /// Node index range of level `level` (1-based).
    pub fn level_nodes(&self, level: usize) -> Range<usize> {
        self.offsets[level - 1]..self.offsets[level]
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.offsets[level] - self.offsets[level - 1]
    }

    pub fn level_of(&self, node: usize) -> usize {
        debug_assert!(node < self.node_count());
        self.offsets.partition_point(|&o| o <= node)
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        let r = self.level_of(node);
        if r == 1 {
            return None;
        }
        let q = node - self.offsets[r - 1];
        Some(self.offsets[r - 2] + q / self.branching)
    }

    pub fn children(&self, node: usize) -> Range<usize> {
        let r = self.level_of(node);
        if r == self.levels {
            return node..node;
        }
        let q = node - self.offsets[r - 1];
        let start = self.offsets[r] + self.branching * q;
        start..start + self.branching
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.level_of(node) == self.levels
    }

    /// Returns an error unless `node` is a valid index.
    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(GlgError::arg(format!("node {node} out of range for a tree of {} nodes", self.node_count())))
        }
    }

    /// Nodes on the path from the root down to `node`, inclusive.
    pub fn path_from_root(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}
