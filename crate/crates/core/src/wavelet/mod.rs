//! Orthonormal 2D wavelet transform and quadtree forests of detail coefficients.

mod filter;
mod forest;
mod grid;
mod transform;

pub use filter::Filter;
pub use forest::{extract_forest, insert_forest, WaveletForest};
pub use grid::ImageGrid;
pub use transform::{dwt2_forward, dwt2_inverse, DetailLevel, WaveletPyramid};

use std::fmt;
use std::str::FromStr;

use crate::error::GlgError;

/// Detail subband orientation.
///
/// `Horizontal` is low-pass along x and high-pass along y (responds to
/// horizontal edges), `Vertical` is high-pass along x and low-pass along y,
/// `Diagonal` is high-pass along both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Horizontal, Direction::Vertical, Direction::Diagonal];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = GlgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "horizontal" | "h" => Ok(Direction::Horizontal),
            "vertical" | "v" => Ok(Direction::Vertical),
            "diagonal" | "d" => Ok(Direction::Diagonal),
            other => Err(GlgError::arg(format!(
                "unknown direction '{other}' (expected horizontal, vertical or diagonal)"
            ))),
        }
    }
}
