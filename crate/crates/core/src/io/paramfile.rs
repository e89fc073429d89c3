use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{GlgError, Result};
use crate::model::{GlgParams, HomogeneousGlgParams};
use crate::wavelet::Direction;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Tied,
    Homogeneous,
}

/// Versioned `key=value` parameter file.
///
/// Floats are written in Rust's shortest round-trip form, so reading and
/// writing again reproduces the file byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFile {
    pub model: ModelKind,
    pub params: GlgParams,
    pub direction: Option<Direction>,
    pub filter: Option<String>,
    pub quad_order: Option<usize>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub fallbacks: Vec<String>,
    pub seed: Option<u64>,
}

impl ParamFile {
    pub fn new(params: GlgParams) -> Self {
        ParamFile {
            model: ModelKind::Tied,
            params,
            direction: None,
            filter: None,
            quad_order: None,
            iterations: None,
            converged: None,
            fallbacks: vec![],
            seed: None,
        }
    }

    pub fn homogeneous(h: &HomogeneousGlgParams, levels: usize) -> Result<Self> {
        let mut f = Self::new(h.to_tied(levels)?);
        f.model = ModelKind::Homogeneous;
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "format_version={FORMAT_VERSION}");
        let _ = writeln!(s, "model={}", if self.model == ModelKind::Tied { "tied" } else { "homogeneous" });
        let _ = writeln!(s, "levels={}", p.levels());
        let _ = writeln!(s, "mu0={}", p.mu0);
        let _ = writeln!(s, "sigma0_sq={}", p.sigma0_sq);
        let _ = writeln!(s, "alpha={}", list(&p.alpha));
        let _ = writeln!(s, "beta={}", list(&p.beta));
        let _ = writeln!(s, "kappa_sq={}", list(&p.kappa_sq));
        if let Some(d) = self.direction {
            let _ = writeln!(s, "direction={d}");
        }
        if let Some(f) = &self.filter {
            let _ = writeln!(s, "filter={f}");
        }
        if let Some(q) = self.quad_order {
            let _ = writeln!(s, "quad_order={q}");
        }
        if let Some(i) = self.iterations {
            let _ = writeln!(s, "iterations={i}");
        }
        if let Some(c) = self.converged {
            let _ = writeln!(s, "converged={c}");
        }
        if !self.fallbacks.is_empty() {
            let _ = writeln!(s, "fallbacks={}", self.fallbacks.join(";"));
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        s
    }

    pub fn parse(text: &str, ctx: &str) -> Result<Self> {
        let err = |m: String| GlgError::parse(ctx, m);
        fn num<T: FromStr>(v: &str, key: &str, ctx: &str) -> Result<T> {
            v.trim().parse().map_err(|_| GlgError::parse(ctx, format!("invalid value for {key}: '{v}'")))
        }
        let list = |v: &str, key: &str| -> Result<Vec<f64>> { v.split_whitespace().map(|x| num(x, key, ctx)).collect() };
        let mut version = None;
        let mut model = None;
        let mut levels: Option<usize> = None;
        let (mut mu0, mut sigma0_sq) = (None, None);
        let (mut alpha, mut beta, mut kappa_sq) = (None, None, None);
        let mut out = ParamFile::new(GlgParams::root_only(0.0, 1.0)?);
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("line {}: expected key=value", lineno + 1)))?;
            match key.trim() {
                "format_version" => {
                    let v: u32 = num(value, key, ctx)?;
                    if v != FORMAT_VERSION {
                        return Err(err(format!("unsupported format_version {v} (expected {FORMAT_VERSION})")));
                    }
                    version = Some(v);
                }
                "model" => {
                    model = Some(match value.trim() {
                        "tied" => ModelKind::Tied,
                        "homogeneous" => ModelKind::Homogeneous,
                        other => return Err(err(format!("unknown model '{other}'"))),
                    })
                }
                "levels" => levels = Some(num(value, key, ctx)?),
                "mu0" => mu0 = Some(num(value, key, ctx)?),
                "sigma0_sq" => sigma0_sq = Some(num(value, key, ctx)?),
                "alpha" => alpha = Some(list(value, key)?),
                "beta" => beta = Some(list(value, key)?),
                "kappa_sq" => kappa_sq = Some(list(value, key)?),
                "direction" => out.direction = Some(value.trim().parse()?),
                "filter" => out.filter = Some(value.trim().to_string()),
                "quad_order" => out.quad_order = Some(num(value, key, ctx)?),
                "iterations" => out.iterations = Some(num(value, key, ctx)?),
                "converged" => out.converged = Some(num(value, key, ctx)?),
                "fallbacks" => out.fallbacks = value.split(';').map(str::to_string).collect(),
                "seed" => out.seed = Some(num(value, key, ctx)?),
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        if version.is_none() {
            return Err(err("missing format_version".into()));
        }
        let missing = |k: &str| err(format!("missing {k}"));
        out.model = model.ok_or_else(|| missing("model"))?;
        let levels = levels.ok_or_else(|| missing("levels"))?;
        out.params = GlgParams::new(
            mu0.ok_or_else(|| missing("mu0"))?,
            sigma0_sq.ok_or_else(|| missing("sigma0_sq"))?,
            alpha.ok_or_else(|| missing("alpha"))?,
            beta.ok_or_else(|| missing("beta"))?,
            kappa_sq.ok_or_else(|| missing("kappa_sq"))?,
        )?;
        if out.params.levels() != levels {
            return Err(err(format!("levels={levels} but {} transition values given", out.params.alpha.len())));
        }
        if out.model == ModelKind::Homogeneous {
            let p = &out.params;
            let same = |v: &[f64]| v.windows(2).all(|w| w[0] == w[1]);
            if !(same(&p.alpha) && same(&p.beta) && same(&p.kappa_sq)) {
                return Err(err("homogeneous model with level-dependent values".into()));
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GlgError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| GlgError::io(path, e))
    }
}
