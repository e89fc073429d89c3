use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;

use crate::error::{GlgError, Result};
use crate::model::TreeTopology;
use crate::wavelet::WaveletForest;

/// A forest read from CSV together with its topology.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestFile {
    pub forest: WaveletForest,
}

/// Writes one row per tree, preceded by a `# levels=L,branching=B` line.
pub fn write_matrix_csv(path: &Path, topology: &TreeTopology, values: &Array2<f64>) -> Result<()> {
    let mut out = format!("# levels={},branching={}\n", topology.levels(), topology.branching());
    for row in values.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| GlgError::io(path, e))
}

fn parse_header(line: &str, ctx: &str) -> Result<(usize, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| GlgError::parse(ctx, "first line must be '# levels=L,branching=B'"))?;
    let (mut levels, mut branching) = (None, None);
    for part in body.split(',') {
        let (k, v) = part.trim().split_once('=').ok_or_else(|| GlgError::parse(ctx, "malformed header"))?;
        let v: usize = v.trim().parse().map_err(|_| GlgError::parse(ctx, format!("invalid {k}")))?;
        match k.trim() {
            "levels" => levels = Some(v),
            "branching" => branching = Some(v),
            _ => return Err(GlgError::parse(ctx, format!("unknown header key '{k}'"))),
        }
    }
    match (levels, branching) {
        (Some(l), Some(b)) => Ok((l, b)),
        _ => Err(GlgError::parse(ctx, "header needs levels and branching")),
    }
}

pub fn read_forest_csv(path: &Path) -> Result<ForestFile> {
    let ctx = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| GlgError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|e| GlgError::io(path, e))?;
    let (levels, branching) = parse_header(header.trim(), &ctx)?;
    let topology = TreeTopology::new(levels, branching)?;
    let n = topology.node_count();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(reader);
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| GlgError::parse(&ctx, e.to_string()))?;
        if rec.len() != n {
            return Err(GlgError::parse(&ctx, format!("row {} has {} values, expected {n}", rows + 1, rec.len())));
        }
        for f in rec.iter() {
            data.push(f.trim().parse::<f64>().map_err(|_| GlgError::parse(&ctx, format!("invalid number '{f}'")))?);
        }
        rows += 1;
    }
    let coefficients = Array2::from_shape_vec((rows, n), data).map_err(|e| GlgError::parse(&ctx, e.to_string()))?;
    Ok(ForestFile { forest: WaveletForest::new(None, topology, coefficients)? })
}
