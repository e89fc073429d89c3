use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{GlgError, Result};
use crate::wavelet::ImageGrid;

fn next_token<'a>(data: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize, what: &str, ctx: &str) -> Result<usize> {
    let tok = next_token(data, pos).ok_or_else(|| GlgError::parse(ctx, format!("missing {what}")))?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| GlgError::parse(ctx, format!("invalid {what}")))
}

/// Decodes binary PGM (P5) bytes into values scaled to `[0, 1]`.
pub fn decode_pgm(data: &[u8], ctx: &str) -> Result<ImageGrid> {
    let mut pos = 0;
    if next_token(data, &mut pos) != Some(b"P5") {
        return Err(GlgError::parse(ctx, "not a binary PGM (P5) file"));
    }
    let width = header_number(data, &mut pos, "width", ctx)?;
    let height = header_number(data, &mut pos, "height", ctx)?;
    let maxval = header_number(data, &mut pos, "maxval", ctx)?;
    if maxval == 0 || maxval > 65535 {
        return Err(GlgError::parse(ctx, format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let bytes_per = if maxval < 256 { 1 } else { 2 };
    let need = width * height * bytes_per;
    let raster = data
        .get(pos..pos + need)
        .ok_or_else(|| GlgError::parse(ctx, format!("raster truncated: need {need} bytes")))?;
    let scale = maxval as f64;
    let values = Array2::from_shape_fn((height, width), |(y, x)| {
        let i = (y * width + x) * bytes_per;
        let v = if bytes_per == 1 { raster[i] as f64 } else { u16::from_be_bytes([raster[i], raster[i + 1]]) as f64 };
        v / scale
    });
    ImageGrid::new(values)
}

pub fn read_pgm(path: &Path) -> Result<ImageGrid> {
    let data = fs::read(path).map_err(|e| GlgError::io(path, e))?;
    decode_pgm(&data, &path.display().to_string())
}

/// Reads PGM, or PNG converted to 8-bit luma, by file extension.
pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    if ext.as_deref() == Some("png") {
        let img = ::image::open(path).map_err(|e| GlgError::parse(path.display().to_string(), e.to_string()))?;
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        let values = Array2::from_shape_fn((h as usize, w as usize), |(y, x)| gray.get_pixel(x as u32, y as u32)[0] as f64 / 255.0);
        return ImageGrid::new(values);
    }
    read_pgm(path)
}

/// 8-bit P5 bytes; values are clamped to `[0, 1]` and rounded to `v * 255`.
pub fn encode_pgm(image: &ImageGrid) -> Vec<u8> {
    let (h, w) = image.values().dim();
    let (lo, hi) = image.declared_range();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(image.values().iter().map(|&v| (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn write_pgm(image: &ImageGrid, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| GlgError::io(path, e))?;
    f.write_all(&encode_pgm(image)).map_err(|e| GlgError::io(path, e))
}
