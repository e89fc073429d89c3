use ndarray::Array2;

use crate::error::{GlgError, Result};

/// Square grayscale image. `values[[y, x]]` is the pixel in row `y`, column `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    values: Array2<f64>,
    declared_range: (f64, f64),
}

impl ImageGrid {
    /// Wraps a square matrix of finite values with the unit interval as declared range.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        Self::with_range(values, (0.0, 1.0))
    }

    pub fn with_range(values: Array2<f64>, declared_range: (f64, f64)) -> Result<Self> {
        let (h, w) = values.dim();
        if h != w {
            return Err(GlgError::dim(format!("image must be square, got {h}x{w}")));
        }
        if h == 0 {
            return Err(GlgError::dim("image is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GlgError::arg("image contains non-finite values"));
        }
        if !(declared_range.0 < declared_range.1) {
            return Err(GlgError::arg(format!("invalid declared range {declared_range:?}")));
        }
        Ok(ImageGrid { values, declared_range })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((side, side), |(y, x)| f(y, x)))
    }

    pub fn side(&self) -> usize {
        self.values.nrows()
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }

    pub fn height(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn declared_range(&self) -> (f64, f64) {
        self.declared_range
    }

    /// Copy with every pixel clamped to the declared range.
    pub fn clipped(&self) -> ImageGrid {
        let (lo, hi) = self.declared_range;
        ImageGrid { values: self.values.mapv(|v| v.clamp(lo, hi)), declared_range: self.declared_range }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
