//! C interface to the `glg` library.
//!
//! Images and parameter sets cross the boundary as opaque handles created by
//! `glg_*_new`/`glg_*_read`/fit functions and released with the matching
//! `*_free`. Every fallible function returns a [`GlgStatus`]; on failure the
//! message is available from [`glg_last_error_message`] on the same thread
//! until the next failing call. Panics are caught and reported as
//! [`GlgStatus::Panic`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use glg::denoise::{add_noise, denoise_image, psnr, shrink_coefficient};
use glg::edges::{detect_edges, EdgeConfig};
use glg::io::{read_image, write_pgm};
use glg::wavelet::{dwt2_forward, extract_forest};
use glg::{fit_glg, Direction, FitConfig, Filter, GlgError, ImageGrid, TreeTopology, WaveletForest};
use ndarray::Array2;

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Topology = 4,
    Estimation = 5,
    Numerical = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Values accepted by the `filter` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlgFilter {
    Haar = 0,
    Daub4 = 1,
}

/// Values accepted by the `direction` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlgDirection {
    Horizontal = 0,
    Vertical = 1,
    Diagonal = 2,
}

/// Square grayscale image.
pub struct GlgImage {
    inner: ImageGrid,
}

/// Tied GLG parameters.
pub struct GlgParams {
    inner: glg::GlgParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (GlgStatus, String);

fn status_of(e: &GlgError) -> GlgStatus {
    match e {
        GlgError::Dimension(_) => GlgStatus::Dimension,
        GlgError::InvalidArgument(_) => GlgStatus::InvalidArgument,
        GlgError::Topology(_) => GlgStatus::Topology,
        GlgError::Estimation { .. } => GlgStatus::Estimation,
        GlgError::Numerical(_) => GlgStatus::Numerical,
        GlgError::Parse { .. } => GlgStatus::Parse,
        GlgError::Io { .. } => GlgStatus::Io,
    }
}

fn lib(e: GlgError) -> Failure {
    (status_of(&e), e.to_string())
}

fn invalid(msg: impl Into<String>) -> Failure {
    (GlgStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GlgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            GlgStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (GlgStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err((GlgStatus::NullPointer, format!("{what} is NULL")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err((GlgStatus::NullPointer, "path is NULL".into()));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err((GlgStatus::NullPointer, "output pointer is NULL".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_scalar<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err((GlgStatus::NullPointer, "output pointer is NULL".into()));
    }
    *out = value;
    Ok(())
}

fn filter(code: u32) -> Result<Filter, Failure> {
    match code {
        c if c == GlgFilter::Haar as u32 => Ok(Filter::Haar),
        c if c == GlgFilter::Daub4 as u32 => Ok(Filter::Daub4),
        c => Err(invalid(format!("unknown filter code {c}"))),
    }
}

fn direction(code: u32) -> Result<Direction, Failure> {
    match code {
        c if c == GlgDirection::Horizontal as u32 => Ok(Direction::Horizontal),
        c if c == GlgDirection::Vertical as u32 => Ok(Direction::Vertical),
        c if c == GlgDirection::Diagonal as u32 => Ok(Direction::Diagonal),
        c => Err(invalid(format!("unknown direction code {c}"))),
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn glg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn glg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Image from `side * side` row-major pixels.
///
/// # Safety
/// `pixels` must point to `side * side` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glg_image_new(pixels: *const f64, side: usize, out: *mut *mut GlgImage) -> GlgStatus {
    guard(|| {
        let n = side.checked_mul(side).ok_or_else(|| invalid("side too large"))?;
        let px = slice(pixels, n, "pixels")?;
        let values = Array2::from_shape_vec((side, side), px.to_vec()).map_err(|e| (GlgStatus::Dimension, e.to_string()))?;
        let inner = ImageGrid::new(values).map_err(lib)?;
        emit(out, GlgImage { inner })
    })
}

/// Reads a PGM or PNG image.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glg_image_read(file: *const c_char, out: *mut *mut GlgImage) -> GlgStatus {
    guard(|| {
        let inner = read_image(&path(file)?).map_err(lib)?;
        emit(out, GlgImage { inner })
    })
}

/// Writes an image as 8-bit PGM, clipped to its declared range.
///
/// # Safety
/// `image` must be a live handle and `file` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn glg_image_write_pgm(image: *const GlgImage, file: *const c_char) -> GlgStatus {
    guard(|| {
        let img = borrow(image, "image")?;
        write_pgm(&img.inner.clipped(), &path(file)?).map_err(lib)
    })
}

/// Side length of the image, or 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glg_image_side(image: *const GlgImage) -> usize {
    image.as_ref().map_or(0, |i| i.inner.side())
}

/// Copies the row-major pixels into `out`, which must hold exactly `side * side` values.
///
/// # Safety
/// `image` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn glg_image_pixels(image: *const GlgImage, out: *mut f64, len: usize) -> GlgStatus {
    guard(|| {
        let img = borrow(image, "image")?;
        let n = img.inner.side() * img.inner.side();
        if len != n {
            return Err((GlgStatus::Dimension, format!("buffer holds {len} values, image has {n}")));
        }
        if out.is_null() {
            return Err((GlgStatus::NullPointer, "output buffer is NULL".into()));
        }
        let dst = std::slice::from_raw_parts_mut(out, n);
        for (d, s) in dst.iter_mut().zip(img.inner.values().iter()) {
            *d = *s;
        }
        Ok(())
    })
}

/// Releases an image. NULL is ignored.
///
/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glg_image_free(image: *mut GlgImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// PSNR of `test` against `reference` in dB; identical images give +infinity.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glg_psnr(reference: *const GlgImage, test: *const GlgImage, out: *mut f64) -> GlgStatus {
    guard(|| {
        let v = psnr(&borrow(reference, "reference")?.inner, &borrow(test, "test")?.inner).map_err(lib)?;
        write_scalar(out, v)
    })
}

/// Adds white Gaussian noise of standard deviation `sigma_eps`.
///
/// # Safety
/// `image` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glg_add_noise(image: *const GlgImage, sigma_eps: f64, seed: u64, out: *mut *mut GlgImage) -> GlgStatus {
    guard(|| {
        let inner = add_noise(&borrow(image, "image")?.inner, sigma_eps, seed).map_err(lib)?;
        emit(out, GlgImage { inner })
    })
}

/// Posterior-mean denoising with default fit settings.
///
/// # Safety
/// `noisy` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glg_denoise(
    noisy: *const GlgImage,
    filter_code: u32,
    levels: usize,
    sigma_eps: f64,
    out: *mut *mut GlgImage,
) -> GlgStatus {
    guard(|| {
        let img = borrow(noisy, "noisy image")?;
        let d = denoise_image(&img.inner, filter(filter_code)?, levels, sigma_eps, &FitConfig::default()).map_err(lib)?;
        emit(out, GlgImage { inner: d.image })
    })
}

/// Edge map as a 0/1 image. Bit `l - 1` of `masked_levels` drops tree level `l`
/// (1 = coarsest). `edge_count` may be NULL.
///
/// # Safety
/// `image` must be a live handle, `out` writable and `edge_count` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn glg_detect_edges(
    image: *const GlgImage,
    filter_code: u32,
    levels: usize,
    fractile: f64,
    masked_levels: u32,
    out: *mut *mut GlgImage,
    edge_count: *mut usize,
) -> GlgStatus {
    guard(|| {
        let img = borrow(image, "image")?;
        let masked: BTreeSet<usize> = (1..=32).filter(|l| masked_levels & (1 << (l - 1)) != 0).collect();
        let config = EdgeConfig { filter: filter(filter_code)?, levels, fractile, masked_levels: masked, ..EdgeConfig::default() };
        let det = detect_edges(&img.inner, &config).map_err(lib)?;
        if !edge_count.is_null() {
            *edge_count = det.map.count();
        }
        emit(out, GlgImage { inner: det.map.to_image() })
    })
}

fn fit(forest: &WaveletForest) -> Result<glg::GlgParams, Failure> {
    fit_glg(forest, &FitConfig::default()).map(|r| r.params).map_err(lib)
}

/// Fits the quadtree forest of one subband orientation of an image.
///
/// # Safety
/// `image` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glg_fit_image(
    image: *const GlgImage,
    filter_code: u32,
    levels: usize,
    direction_code: u32,
    out: *mut *mut GlgParams,
) -> GlgStatus {
    guard(|| {
        let img = borrow(image, "image")?;
        let pyramid = dwt2_forward(&img.inner, filter(filter_code)?, levels).map_err(lib)?;
        let forest = extract_forest(&pyramid, direction(direction_code)?).map_err(lib)?;
        emit(out, GlgParams { inner: fit(&forest)? })
    })
}

/// Fits `trees` trees stored row-major, each in breadth-first node order.
///
/// # Safety
/// `coefficients` must point to `trees * node_count` readable doubles, where
/// `node_count` follows from `levels` and `branching`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glg_fit_forest(
    coefficients: *const f64,
    trees: usize,
    levels: usize,
    branching: usize,
    out: *mut *mut GlgParams,
) -> GlgStatus {
    guard(|| {
        let topology = TreeTopology::new(levels, branching).map_err(lib)?;
        let n = topology.node_count();
        let len = trees.checked_mul(n).ok_or_else(|| invalid("forest too large"))?;
        let data = slice(coefficients, len, "coefficients")?.to_vec();
        let values = Array2::from_shape_vec((trees, n), data).map_err(|e| (GlgStatus::Dimension, e.to_string()))?;
        let forest = WaveletForest::new(None, topology, values).map_err(lib)?;
        emit(out, GlgParams { inner: fit(&forest)? })
    })
}

/// Parameters from their components; each transition array holds `transitions`
/// values (`levels - 1`) and may be NULL when `transitions` is 0.
///
/// # Safety
/// The arrays must hold `transitions` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glg_params_new(
    mu0: f64,
    sigma0_sq: f64,
    alpha: *const f64,
    beta: *const f64,
    kappa_sq: *const f64,
    transitions: usize,
    out: *mut *mut GlgParams,
) -> GlgStatus {
    guard(|| {
        let a = slice(alpha, transitions, "alpha")?.to_vec();
        let b = slice(beta, transitions, "beta")?.to_vec();
        let k = slice(kappa_sq, transitions, "kappa_sq")?.to_vec();
        let inner = glg::GlgParams::new(mu0, sigma0_sq, a, b, k).map_err(lib)?;
        emit(out, GlgParams { inner })
    })
}

/// Number of tree levels, or 0 for NULL.
///
/// # Safety
/// `params` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glg_params_levels(params: *const GlgParams) -> usize {
    params.as_ref().map_or(0, |p| p.inner.levels())
}

/// Copies `(mu0, sigma0_sq, alpha.., beta.., kappa_sq..)` into `out`, which
/// must hold exactly `3 * levels - 1` values.
///
/// # Safety
/// `params` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn glg_params_values(params: *const GlgParams, out: *mut f64, len: usize) -> GlgStatus {
    guard(|| {
        let v = borrow(params, "params")?.inner.to_vec();
        if len != v.len() {
            return Err((GlgStatus::Dimension, format!("buffer holds {len} values, parameters have {}", v.len())));
        }
        if out.is_null() {
            return Err((GlgStatus::NullPointer, "output buffer is NULL".into()));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&v);
        Ok(())
    })
}

/// Releases a parameter set. NULL is ignored.
///
/// # Safety
/// `params` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glg_params_free(params: *mut GlgParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Posterior mean of a coefficient observed as `v` with noise variance `noise_var`
/// under the level prior `N(mu, sigma_sq)` on its log-variance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glg_shrink(v: f64, mu: f64, sigma_sq: f64, noise_var: f64, out: *mut f64) -> GlgStatus {
    guard(|| {
        if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
            return Err(invalid(format!("sigma_sq must be positive, got {sigma_sq}")));
        }
        if !(noise_var >= 0.0) || !noise_var.is_finite() || !v.is_finite() || !mu.is_finite() {
            return Err(invalid("coefficient, mean and noise variance must be finite, noise variance non-negative"));
        }
        write_scalar(out, shrink_coefficient(v, mu, sigma_sq, noise_var))
    })
}
