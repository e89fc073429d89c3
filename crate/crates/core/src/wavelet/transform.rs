use ndarray::{Array2, ArrayView1, ArrayViewMut1, Axis, Zip};

use super::{Direction, Filter, ImageGrid};
use crate::error::{GlgError, Result};

/// The three detail subbands of one decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct DetailLevel {
    pub horizontal: Array2<f64>,
    pub vertical: Array2<f64>,
    pub diagonal: Array2<f64>,
}

impl DetailLevel {
    pub fn zeros(side: usize) -> Self {
        DetailLevel {
            horizontal: Array2::zeros((side, side)),
            vertical: Array2::zeros((side, side)),
            diagonal: Array2::zeros((side, side)),
        }
    }

    pub fn side(&self) -> usize {
        self.horizontal.nrows()
    }

    pub fn get(&self, direction: Direction) -> &Array2<f64> {
        match direction {
            Direction::Horizontal => &self.horizontal,
            Direction::Vertical => &self.vertical,
            Direction::Diagonal => &self.diagonal,
        }
    }

    pub fn get_mut(&mut self, direction: Direction) -> &mut Array2<f64> {
        match direction {
            Direction::Horizontal => &mut self.horizontal,
            Direction::Vertical => &mut self.vertical,
            Direction::Diagonal => &mut self.diagonal,
        }
    }
}

/// Multi-level 2D decomposition.
///
/// `details[0]` is the coarsest detail level (tree level 1) and
/// `details[levels - 1]` the finest. `approximation` has the same side as
/// `details[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    pub filter: Filter,
    pub approximation: Array2<f64>,
    pub details: Vec<DetailLevel>,
    pub declared_range: (f64, f64),
}

impl WaveletPyramid {
    /// All-zero pyramid for an image of side `side`.
    pub fn zeros(side: usize, levels: usize, filter: Filter) -> Result<Self> {
        check_side(side, levels)?;
        let coarse = side >> levels;
        Ok(WaveletPyramid {
            filter,
            approximation: Array2::zeros((coarse, coarse)),
            details: (0..levels).map(|r| DetailLevel::zeros(coarse << r)).collect(),
            declared_range: (0.0, 1.0),
        })
    }

    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Side of the coarsest subbands.
    pub fn coarsest_side(&self) -> usize {
        self.approximation.nrows()
    }

    /// Side of the reconstructed image.
    pub fn image_side(&self) -> usize {
        self.coarsest_side() << self.levels()
    }

    /// Detail subband at tree level `level` (1 = coarsest).
    pub fn subband(&self, direction: Direction, level: usize) -> &Array2<f64> {
        self.details[level - 1].get(direction)
    }

    pub fn subband_mut(&mut self, direction: Direction, level: usize) -> &mut Array2<f64> {
        self.details[level - 1].get_mut(direction)
    }

    pub fn energy(&self) -> f64 {
        let sq = |a: &Array2<f64>| a.iter().map(|v| v * v).sum::<f64>();
        sq(&self.approximation)
            + self
                .details
                .iter()
                .map(|d| sq(&d.horizontal) + sq(&d.vertical) + sq(&d.diagonal))
                .sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        let (r, c) = self.approximation.dim();
        if r != c || r == 0 {
            return Err(GlgError::dim(format!("approximation subband must be square and non-empty, got {r}x{c}")));
        }
        for (i, d) in self.details.iter().enumerate() {
            let want = r << i;
            for dir in Direction::ALL {
                let got = d.get(dir).dim();
                if got != (want, want) {
                    return Err(GlgError::dim(format!(
                        "{dir} subband at level {} is {}x{}, expected {want}x{want}",
                        i + 1,
                        got.0,
                        got.1
                    )));
                }
            }
        }
        let side = self.image_side();
        let taps = self.filter.lowpass().len();
        if self.levels() > 0 && (side >> (self.levels() - 1)) < taps.min(2) {
            return Err(GlgError::dim("pyramid too small for filter"));
        }
        Ok(())
    }
}

fn check_side(side: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(GlgError::arg("number of levels must be at least 1"));
    }
    if levels >= usize::BITS as usize || side % (1usize << levels) != 0 || side >> levels == 0 {
        return Err(GlgError::dim(format!("image side {side} is not divisible by 2^{levels}")));
    }
    Ok(())
}

fn analyze_lane(x: ArrayView1<f64>, h: &[f64], g: &[f64], mut lo: ArrayViewMut1<f64>, mut hi: ArrayViewMut1<f64>) {
    let n = x.len();
    for k in 0..n / 2 {
        let (mut a, mut d) = (0.0, 0.0);
        for (m, (hm, gm)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + m) % n];
            a += hm * v;
            d += gm * v;
        }
        lo[k] = a;
        hi[k] = d;
    }
}

fn synthesize_lane(lo: ArrayView1<f64>, hi: ArrayView1<f64>, h: &[f64], g: &[f64], mut x: ArrayViewMut1<f64>) {
    let n = x.len();
    x.fill(0.0);
    for k in 0..n / 2 {
        for (m, (hm, gm)) in h.iter().zip(g).enumerate() {
            x[(2 * k + m) % n] += hm * lo[k] + gm * hi[k];
        }
    }
}

/// Splits `x` along `axis` into (low, high) halves with periodic extension.
fn analyze_axis(x: &Array2<f64>, axis: Axis, h: &[f64], g: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let mut shape = [x.nrows(), x.ncols()];
    shape[axis.index()] /= 2;
    let mut lo = Array2::zeros(shape);
    let mut hi = Array2::zeros(shape);
    Zip::from(x.lanes(axis))
        .and(lo.lanes_mut(axis))
        .and(hi.lanes_mut(axis))
        .for_each(|xl, l, hl| analyze_lane(xl, h, g, l, hl));
    (lo, hi)
}

fn synthesize_axis(lo: &Array2<f64>, hi: &Array2<f64>, axis: Axis, h: &[f64], g: &[f64]) -> Array2<f64> {
    let mut shape = [lo.nrows(), lo.ncols()];
    shape[axis.index()] *= 2;
    let mut out = Array2::zeros(shape);
    Zip::from(lo.lanes(axis))
        .and(hi.lanes(axis))
        .and(out.lanes_mut(axis))
        .for_each(|l, hl, o| synthesize_lane(l, hl, h, g, o));
    out
}

/// Forward orthonormal 2D DWT with periodic boundaries.
pub fn dwt2_forward(image: &ImageGrid, filter: Filter, levels: usize) -> Result<WaveletPyramid> {
    let side = image.side();
    check_side(side, levels)?;
    let h = filter.lowpass();
    let g = filter.highpass();
    let mut current = image.values().to_owned();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        // x is axis 1, y is axis 0
        let (lo_x, hi_x) = analyze_axis(&current, Axis(1), &h, &g);
        let (ll, lh) = analyze_axis(&lo_x, Axis(0), &h, &g);
        let (hl, hh) = analyze_axis(&hi_x, Axis(0), &h, &g);
        details.push(DetailLevel { horizontal: lh, vertical: hl, diagonal: hh });
        current = ll;
    }
    details.reverse();
    Ok(WaveletPyramid { filter, approximation: current, details, declared_range: image.declared_range() })
}

/// Inverse of [`dwt2_forward`].
pub fn dwt2_inverse(pyramid: &WaveletPyramid) -> Result<ImageGrid> {
    pyramid.validate()?;
    let h = pyramid.filter.lowpass();
    let g = pyramid.filter.highpass();
    let mut current = pyramid.approximation.clone();
    for d in &pyramid.details {
        let lo_x = synthesize_axis(&current, &d.horizontal, Axis(0), &h, &g);
        let hi_x = synthesize_axis(&d.vertical, &d.diagonal, Axis(0), &h, &g);
        current = synthesize_axis(&lo_x, &hi_x, Axis(1), &h, &g);
    }
    ImageGrid::with_range(current, pyramid.declared_range)
}

#[cfg(test)]
fn lane_roundtrip(x: &[f64], filter: Filter) -> Vec<f64> {
    use ndarray::Array1;
    let h = filter.lowpass();
    let g = filter.highpass();
    let xv = Array1::from(x.to_vec());
    let mut lo = Array1::zeros(x.len() / 2);
    let mut hi = Array1::zeros(x.len() / 2);
    analyze_lane(xv.view(), &h, &g, lo.view_mut(), hi.view_mut());
    let mut out = Array1::zeros(x.len());
    synthesize_lane(lo.view(), hi.view(), &h, &g, out.view_mut());
    out.to_vec()
}
