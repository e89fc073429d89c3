use std::fmt;
use std::str::FromStr;

use crate::error::GlgError;

/// Orthonormal two-channel filter banks supported by the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Filter {
    Haar,
    /// Four-tap Daubechies filter (two vanishing moments).
    Daub4,
}

impl Filter {
    /// Scaling (low-pass) analysis filter.
    pub fn lowpass(self) -> Vec<f64> {
        match self {
            Filter::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            Filter::Daub4 => {
                let s3 = 3f64.sqrt();
                let norm = 4.0 * std::f64::consts::SQRT_2;
                vec![(1.0 + s3) / norm, (3.0 + s3) / norm, (3.0 - s3) / norm, (1.0 - s3) / norm]
            }
        }
    }

    /// Wavelet (high-pass) analysis filter, the quadrature mirror of [`Filter::lowpass`]:
    /// `g[m] = (-1)^m h[L-1-m]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let len = h.len();
        (0..len)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[len - 1 - m]
            })
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Filter::Haar => "haar",
            Filter::Daub4 => "daub4",
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Filter {
    type Err = GlgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Filter::Haar),
            "daub4" | "d4" => Ok(Filter::Daub4),
            other => Err(GlgError::arg(format!("unknown filter '{other}' (expected haar or daub4)"))),
        }
    }
}
