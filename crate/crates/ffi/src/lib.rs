//! C ABI over the hsk-core sketches.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`HskStatus`];
//! on failure [`hsk_last_error`] describes the cause for the calling thread.
//! Functions never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsk_core::mult1d::Universe;
use hsk_core::optimize::Backend;
use hsk_core::sketch::{AnySketch, BuildSpec, SketchBuilder};
use hsk_core::{HskError, HyperplaneQuery, Power};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HskStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    OutOfDomain = 4,
    Unsupported = 5,
    Frozen = 6,
    BadFormat = 7,
    BufferTooSmall = 8,
    Io = 9,
    OtherError = 10,
    Panic = 11,
}

/// Sketch family.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HskBackend {
    Offline1d = 0,
    Mult1d = 1,
    Dyn1d = 2,
    Add1d = 3,
    Add2d = 4,
}

impl From<HskBackend> for Backend {
    fn from(b: HskBackend) -> Self {
        match b {
            HskBackend::Offline1d => Backend::Offline1d,
            HskBackend::Mult1d => Backend::Mult1d,
            HskBackend::Dyn1d => Backend::Dyn1d,
            HskBackend::Add1d => Backend::Add1d,
            HskBackend::Add2d => Backend::Add2d,
        }
    }
}

impl From<Backend> for HskBackend {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Offline1d => HskBackend::Offline1d,
            Backend::Mult1d => HskBackend::Mult1d,
            Backend::Dyn1d => HskBackend::Dyn1d,
            Backend::Add1d => HskBackend::Add1d,
            Backend::Add2d => HskBackend::Add2d,
        }
    }
}

/// Construction parameters. Start from [`hsk_build_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HskBuildOptions {
    pub backend: HskBackend,
    pub epsilon: f64,
    /// Exponent of the hinge, 1 or 2 (2 only for the additive sketches).
    pub p: u32,
    /// Declared stream length.
    pub n_hint: u64,
    pub seed: u64,
    /// Universe bound of the streaming one-dimensional sketches.
    pub w: u64,
    /// Nonzero restricts mult1d input to integers in `[1, w]`.
    pub integer_universe: u8,
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// add1d domain `[-radius, radius]`.
    pub radius: f64,
    /// add2d domain `[lo, hi]^2`.
    pub lo: f64,
    pub hi: f64,
}

/// Opaque sketch under construction.
pub struct HskBuilder(SketchBuilder);

/// Opaque frozen sketch.
pub struct HskSketch(AnySketch);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &HskError) -> HskStatus {
    match e {
        HskError::InvalidParameter { .. } | HskError::EmptyDataset => HskStatus::InvalidParameter,
        HskError::DimensionMismatch { .. } => HskStatus::DimensionMismatch,
        HskError::OutOfDomain { .. } | HskError::NormViolation { .. } => HskStatus::OutOfDomain,
        HskError::Unsupported(_) | HskError::ZeroDirection => HskStatus::Unsupported,
        HskError::Frozen | HskError::NotFrozen => HskStatus::Frozen,
        HskError::Format(_) | HskError::Parse { .. } => HskStatus::BadFormat,
        HskError::Io(_) => HskStatus::Io,
        _ => HskStatus::OtherError,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (HskStatus, String)>) -> HskStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HskStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            HskStatus::Panic
        }
    }
}

fn core_err(e: HskError) -> (HskStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HskStatus, String) {
    (HskStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (HskStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hsk_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"",
    };
    V.as_ptr()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hsk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default options for `backend`.
#[no_mangle]
pub extern "C" fn hsk_build_options_default(
    backend: HskBackend,
    epsilon: f64,
    n_hint: u64,
    seed: u64,
) -> HskBuildOptions {
    let s = BuildSpec::new(backend.into(), epsilon, n_hint, seed);
    HskBuildOptions {
        backend,
        epsilon,
        p: 1,
        n_hint,
        seed,
        w: s.w,
        integer_universe: 0,
        c1: s.c1,
        c2: s.c2,
        c: s.c,
        radius: s.radius,
        lo: s.lo,
        hi: s.hi,
    }
}

fn spec_of(o: &HskBuildOptions) -> Result<BuildSpec, (HskStatus, String)> {
    let p = u8::try_from(o.p)
        .ok()
        .and_then(|p| Power::from_u8(p).ok())
        .ok_or((HskStatus::InvalidParameter, format!("p must be 1 or 2, got {}", o.p)))?;
    let mut s = BuildSpec::new(o.backend.into(), o.epsilon, o.n_hint, o.seed);
    s.p = p;
    s.w = o.w;
    s.universe = if o.integer_universe != 0 { Universe::Integer } else { Universe::Real };
    s.c1 = o.c1;
    s.c2 = o.c2;
    s.c = o.c;
    s.radius = o.radius;
    s.lo = o.lo;
    s.hi = o.hi;
    Ok(s)
}

/// Creates a builder; `*out` receives the handle.
///
/// # Safety
/// `opts` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_new(opts: *const HskBuildOptions, out: *mut *mut HskBuilder) -> HskStatus {
    guard(|| {
        let o = opts.as_ref().ok_or_else(|| null("opts"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let b = SketchBuilder::new(&spec_of(o)?).map_err(core_err)?;
        *out = Box::into_raw(Box::new(HskBuilder(b)));
        Ok(())
    })
}

/// Dimension of points accepted by the builder, 0 for NULL.
///
/// # Safety
/// `b` must be NULL or a live builder.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_dim(b: *const HskBuilder) -> usize {
    b.as_ref().map_or(0, |b| b.0.dim())
}

/// Inserts one point of `dim` coordinates.
///
/// # Safety
/// `b` must be a live builder and `x` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_update(b: *mut HskBuilder, x: *const f64, dim: usize) -> HskStatus {
    guard(|| {
        let b = b.as_mut().ok_or_else(|| null("builder"))?;
        let x = slice(x, dim, "x")?;
        b.0.update(x).map_err(core_err)
    })
}

/// Inserts `count` points stored row-major, `dim` coordinates each.
///
/// # Safety
/// `b` must be a live builder and `xs` must point to `count * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_update_many(
    b: *mut HskBuilder,
    xs: *const f64,
    count: usize,
    dim: usize,
) -> HskStatus {
    guard(|| {
        let b = b.as_mut().ok_or_else(|| null("builder"))?;
        let len = count
            .checked_mul(dim)
            .ok_or((HskStatus::InvalidParameter, "count * dim overflows".into()))?;
        let xs = slice(xs, len, "xs")?;
        if dim == 0 {
            return Err((HskStatus::DimensionMismatch, "dim must be positive".into()));
        }
        for row in xs.chunks_exact(dim) {
            b.0.update(row).map_err(core_err)?;
        }
        Ok(())
    })
}

/// Freezes the builder into a sketch. The builder is consumed even on
/// failure and must not be used again.
///
/// # Safety
/// `b` must be a live builder; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_finish(b: *mut HskBuilder, out: *mut *mut HskSketch) -> HskStatus {
    guard(|| {
        if b.is_null() {
            return Err(null("builder"));
        }
        let builder = Box::from_raw(b);
        if out.is_null() {
            return Err(null("out"));
        }
        let s = builder.0.finish().map_err(core_err)?;
        *out = Box::into_raw(Box::new(HskSketch(s)));
        Ok(())
    })
}

/// Releases a builder. NULL is ignored.
///
/// # Safety
/// `b` must be NULL or a live builder not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hsk_builder_free(b: *mut HskBuilder) {
    if !b.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(b))));
    }
}

unsafe fn query_with(
    s: *const HskSketch,
    theta: *const f64,
    dim: usize,
    b: f64,
    out: *mut f64,
    f: fn(&AnySketch, &HyperplaneQuery) -> hsk_core::Result<f64>,
) -> HskStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sketch"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let theta = slice(theta, dim, "theta")?;
        *out = f(&s.0, &HyperplaneQuery::new(theta.to_vec(), b)).map_err(core_err)?;
        Ok(())
    })
}

/// Estimated mean of `max{0, b - theta.x}^p` over the stream.
///
/// # Safety
/// `s` must be a live sketch, `theta` must point to `dim` doubles and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_query(
    s: *const HskSketch,
    theta: *const f64,
    dim: usize,
    b: f64,
    out: *mut f64,
) -> HskStatus {
    query_with(s, theta, dim, b, out, AnySketch::query)
}

/// Estimated sum of `max{0, b - theta.x}^p` over the stream.
///
/// # Safety
/// Same as [`hsk_sketch_query`].
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_query_sum(
    s: *const HskSketch,
    theta: *const f64,
    dim: usize,
    b: f64,
    out: *mut f64,
) -> HskStatus {
    query_with(s, theta, dim, b, out, AnySketch::query_sum)
}

/// Number of points summarized, 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live sketch.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_len(s: *const HskSketch) -> u64 {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Machine words retained, 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live sketch.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_space_words(s: *const HskSketch) -> usize {
    s.as_ref().map_or(0, |s| s.0.space_words())
}

/// Point dimension, 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live sketch.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_dim(s: *const HskSketch) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Backend of the sketch.
///
/// # Safety
/// `s` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_backend(s: *const HskSketch, out: *mut HskBackend) -> HskStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sketch"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.0.backend().into();
        Ok(())
    })
}

/// Serializes into `buf`. `*len` always receives the required size; with a
/// NULL or short buffer the call returns `BufferTooSmall` and writes nothing.
///
/// # Safety
/// `s` and `len` must be valid; `buf` must be NULL or hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_serialize(
    s: *const HskSketch,
    buf: *mut u8,
    cap: usize,
    len: *mut usize,
) -> HskStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("sketch"))?;
        if len.is_null() {
            return Err(null("len"));
        }
        let bytes = s.0.to_bytes().map_err(core_err)?;
        *len = bytes.len();
        if buf.is_null() || cap < bytes.len() {
            return Err((
                HskStatus::BufferTooSmall,
                format!("need {} bytes, have {cap}", bytes.len()),
            ));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// Loads a sketch from bytes produced by [`hsk_sketch_serialize`] or the
/// command-line tool.
///
/// # Safety
/// `bytes` must hold `len` bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_deserialize(bytes: *const u8, len: usize, out: *mut *mut HskSketch) -> HskStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if bytes.is_null() && len > 0 {
            return Err(null("bytes"));
        }
        let data = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bytes, len) };
        let s = AnySketch::from_bytes(data).map_err(core_err)?;
        *out = Box::into_raw(Box::new(HskSketch(s)));
        Ok(())
    })
}

/// Releases a sketch. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a live sketch not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hsk_sketch_free(s: *mut HskSketch) {
    if !s.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(s))));
    }
}
