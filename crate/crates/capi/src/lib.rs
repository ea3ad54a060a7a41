//! C ABI for the catmorph library.
//!
//! Images travel as opaque [`CmImage`] handles created and freed here; every
//! fallible function returns a [`CmStatus`] code and leaves a human-readable
//! message retrievable with [`cm_last_error_message`] on failure. Output
//! handles are written through out-pointers and owned by the caller, who
//! must release them with [`cm_image_free`].
//!
//! The generated header lives at `include/catmorph.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use catmorph::io::{read_catd, write_catd, CatdImage};
use catmorph::protected::{ProtectionMode, ProtectionSpec};
use catmorph::{categorical, protected, CategoricalImage, DirichletImage, Error, Norm};

/// Opaque image handle: a categorical, Dirichlet or scalar image.
pub struct CmImage {
    inner: CatdImage,
}

/// Status code of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmStatus {
    /// Success.
    Ok = 0,
    /// A parameter is out of range or inconsistent.
    InvalidArgument = 1,
    /// The data violates an invariant (simplex, positivity, file format).
    InvalidData = 2,
    /// The operating system reported an I/O failure.
    Io = 3,
    /// A required pointer was null.
    NullPointer = 4,
    /// Internal failure; details in the last error message.
    Internal = 5,
}

/// Ball norms for structuring elements.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmNorm {
    CityBlock = 0,
    Chessboard = 1,
    Euclidean = 2,
}

impl From<CmNorm> for Norm {
    fn from(n: CmNorm) -> Norm {
        match n {
            CmNorm::CityBlock => Norm::CityBlock,
            CmNorm::Chessboard => Norm::Chessboard,
            CmNorm::Euclidean => Norm::Euclidean,
        }
    }
}

/// Semantics of fractional protected mass in protected operations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmProtectionMode {
    /// Only fully protected pixels block propagation; fractional protection
    /// caps the operated channel pointwise.
    Literal = 0,
    /// Mass may only traverse pixels with room for it, evaluated over
    /// quantized capacity levels.
    Capacity = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CmStatus {
    match err {
        Error::Io(_) => CmStatus::Io,
        Error::InvalidShape { .. }
        | Error::ShapeMismatch { .. }
        | Error::InvalidChannels { .. }
        | Error::DataLength { .. }
        | Error::CategoryOutOfRange { .. }
        | Error::TooManyCategories { .. }
        | Error::InvalidStructuringElement(_)
        | Error::ProtectedCategory { .. }
        | Error::PaletteSize { .. }
        | Error::Unsupported(_) => CmStatus::InvalidArgument,
        _ => CmStatus::InvalidData,
    }
}

fn fail(err: Error) -> CmStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null_fail(what: &str) -> CmStatus {
    set_error(format!("{what} must not be null"));
    CmStatus::NullPointer
}

/// Run a fallible body, translating panics into [`CmStatus::Internal`].
fn guarded(body: impl FnOnce() -> CmStatus) -> CmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            CmStatus::Internal
        }
    }
}

/// Message describing the most recent failure on this thread, or null when
/// no failure has been recorded. The pointer stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn cm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn write_handle(out: *mut *mut CmImage, img: CatdImage) -> CmStatus {
    *out = Box::into_raw(Box::new(CmImage { inner: img }));
    CmStatus::Ok
}

/// Create a categorical image from row-major, channel-interleaved values.
/// `values_len` must equal the pixel count times `channels`; every pixel
/// must lie on the probability simplex within the standard tolerance.
///
/// # Safety
/// `shape` must point to `rank` readable values, `values` to `values_len`
/// readable doubles, and `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn cm_image_new_categorical(
    shape: *const usize,
    rank: usize,
    channels: usize,
    values: *const f64,
    values_len: usize,
    out: *mut *mut CmImage,
) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let Some(shape) = slice_arg(shape, rank) else {
            return null_fail("shape");
        };
        let Some(values) = slice_arg(values, values_len) else {
            return null_fail("values");
        };
        match CategoricalImage::new(shape.to_vec(), channels, values.to_vec()) {
            Ok(img) => write_handle(out, CatdImage::Categorical(img)),
            Err(e) => fail(e),
        }
    })
}

/// Create a Dirichlet parameter image; every value must be positive and
/// finite.
///
/// # Safety
/// As for [`cm_image_new_categorical`].
#[no_mangle]
pub unsafe extern "C" fn cm_image_new_dirichlet(
    shape: *const usize,
    rank: usize,
    channels: usize,
    values: *const f64,
    values_len: usize,
    out: *mut *mut CmImage,
) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let Some(shape) = slice_arg(shape, rank) else {
            return null_fail("shape");
        };
        let Some(values) = slice_arg(values, values_len) else {
            return null_fail("values");
        };
        match DirichletImage::new(shape.to_vec(), channels, values.to_vec()) {
            Ok(img) => write_handle(out, CatdImage::Dirichlet(img)),
            Err(e) => fail(e),
        }
    })
}

/// Release an image handle. Passing null is a no-op.
///
/// # Safety
/// `img` must be a handle obtained from this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn cm_image_free(img: *mut CmImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Number of axes (1..=3).
///
/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_image_rank(img: *const CmImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.shape().len())
}

/// Copy the extents into `out`, which must hold `cm_image_rank` values.
///
/// # Safety
/// `img` must be a live handle and `out` writable for the rank.
#[no_mangle]
pub unsafe extern "C" fn cm_image_shape(img: *const CmImage, out: *mut usize) -> CmStatus {
    guarded(|| {
        let Some(h) = img.as_ref() else {
            return null_fail("img");
        };
        if out.is_null() {
            return null_fail("out");
        }
        let shape = h.inner.shape();
        std::ptr::copy_nonoverlapping(shape.as_ptr(), out, shape.len());
        CmStatus::Ok
    })
}

/// Channel count (1 for scalar payloads).
///
/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_image_channels(img: *const CmImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.channels())
}

/// Total number of stored values (pixels × channels).
///
/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_image_value_count(img: *const CmImage) -> usize {
    img.as_ref().map_or(0, |h| h.inner.values().len())
}

/// Copy all values (row-major, channels innermost) into `out`.
///
/// # Safety
/// `img` must be a live handle and `out` writable for `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cm_image_copy_values(
    img: *const CmImage,
    out: *mut f64,
    out_len: usize,
) -> CmStatus {
    guarded(|| {
        let Some(h) = img.as_ref() else {
            return null_fail("img");
        };
        if out.is_null() {
            return null_fail("out");
        }
        let values = h.inner.values();
        if out_len != values.len() {
            set_error(format!(
                "buffer holds {out_len} values, image has {}",
                values.len()
            ));
            return CmStatus::InvalidArgument;
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        CmStatus::Ok
    })
}

/// Check a categorical image against the simplex constraint at `tol`.
/// Non-categorical images pass trivially.
///
/// # Safety
/// `img` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cm_image_validate(img: *const CmImage, tol: f64) -> CmStatus {
    guarded(|| {
        let Some(h) = img.as_ref() else {
            return null_fail("img");
        };
        if let CatdImage::Categorical(c) = &h.inner {
            if let Err(e) = c.validate(tol) {
                return fail(e);
            }
        }
        CmStatus::Ok
    })
}

unsafe fn categorical_arg<'a>(img: *const CmImage) -> Result<&'a CategoricalImage, CmStatus> {
    let Some(h) = img.as_ref() else {
        return Err(null_fail("img"));
    };
    h.inner.as_categorical().map_err(fail)
}

type CatOp = fn(
    &CategoricalImage,
    usize,
    &catmorph::StructuringElement,
) -> catmorph::Result<CategoricalImage>;

unsafe fn run_cat_op(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    out: *mut *mut CmImage,
    op: CatOp,
) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let f = match categorical_arg(img) {
            Ok(f) => f,
            Err(status) => return status,
        };
        let se = match catmorph::StructuringElement::ball(f.shape().len(), radius, norm.into()) {
            Ok(se) => se,
            Err(e) => return fail(e),
        };
        match op(f, category, &se) {
            Ok(img) => write_handle(out, CatdImage::Categorical(img)),
            Err(e) => fail(e),
        }
    })
}

/// Dilate one category with a ball structuring element.
///
/// # Safety
/// `img` must be a live categorical handle and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cm_dilate_category(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_cat_op(img, category, radius, norm, out, categorical::dilate_i)
}

/// Erode one category with a ball structuring element.
///
/// # Safety
/// As for [`cm_dilate_category`].
#[no_mangle]
pub unsafe extern "C" fn cm_erode_category(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_cat_op(img, category, radius, norm, out, categorical::erode_i)
}

/// Open one category (erode, then dilate).
///
/// # Safety
/// As for [`cm_dilate_category`].
#[no_mangle]
pub unsafe extern "C" fn cm_open_category(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_cat_op(img, category, radius, norm, out, categorical::open_i)
}

/// Close one category (dilate, then erode).
///
/// # Safety
/// As for [`cm_dilate_category`].
#[no_mangle]
pub unsafe extern "C" fn cm_close_category(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_cat_op(img, category, radius, norm, out, categorical::close_i)
}

type ProtectedOp = fn(
    &CategoricalImage,
    usize,
    &catmorph::StructuringElement,
    &ProtectionSpec,
) -> catmorph::Result<CategoricalImage>;

#[allow(clippy::too_many_arguments)]
unsafe fn run_protected_op(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    protected_channels: *const usize,
    protected_len: usize,
    mode: CmProtectionMode,
    out: *mut *mut CmImage,
    op: ProtectedOp,
) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let Some(protected_channels) = slice_arg(protected_channels, protected_len) else {
            return null_fail("protected_channels");
        };
        let f = match categorical_arg(img) {
            Ok(f) => f,
            Err(status) => return status,
        };
        let se = match catmorph::StructuringElement::ball(f.shape().len(), radius, norm.into()) {
            Ok(se) => se,
            Err(e) => return fail(e),
        };
        let spec = ProtectionSpec::new(protected_channels).mode(match mode {
            CmProtectionMode::Literal => ProtectionMode::Literal,
            CmProtectionMode::Capacity => ProtectionMode::Capacity,
        });
        match op(f, category, &se, &spec) {
            Ok(img) => write_handle(out, CatdImage::Categorical(img)),
            Err(e) => fail(e),
        }
    })
}

/// Dilate one category while the listed channels stay frozen and gate
/// propagation.
///
/// # Safety
/// `img` must be a live categorical handle, `protected_channels` readable
/// for `protected_len` entries, `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cm_protected_dilate(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    protected_channels: *const usize,
    protected_len: usize,
    mode: CmProtectionMode,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_protected_op(
        img,
        category,
        radius,
        norm,
        protected_channels,
        protected_len,
        mode,
        out,
        protected::protected_dilate,
    )
}

/// Erode one category under protection.
///
/// # Safety
/// As for [`cm_protected_dilate`].
#[no_mangle]
pub unsafe extern "C" fn cm_protected_erode(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    protected_channels: *const usize,
    protected_len: usize,
    mode: CmProtectionMode,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_protected_op(
        img,
        category,
        radius,
        norm,
        protected_channels,
        protected_len,
        mode,
        out,
        protected::protected_erode,
    )
}

/// Open one category under protection.
///
/// # Safety
/// As for [`cm_protected_dilate`].
#[no_mangle]
pub unsafe extern "C" fn cm_protected_open(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    protected_channels: *const usize,
    protected_len: usize,
    mode: CmProtectionMode,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_protected_op(
        img,
        category,
        radius,
        norm,
        protected_channels,
        protected_len,
        mode,
        out,
        protected::protected_open,
    )
}

/// Close one category under protection.
///
/// # Safety
/// As for [`cm_protected_dilate`].
#[no_mangle]
pub unsafe extern "C" fn cm_protected_close(
    img: *const CmImage,
    category: usize,
    radius: f64,
    norm: CmNorm,
    protected_channels: *const usize,
    protected_len: usize,
    mode: CmProtectionMode,
    out: *mut *mut CmImage,
) -> CmStatus {
    run_protected_op(
        img,
        category,
        radius,
        norm,
        protected_channels,
        protected_len,
        mode,
        out,
        protected::protected_close,
    )
}

/// Project a Dirichlet image to its expected categorical distribution.
///
/// # Safety
/// `img` must be a live Dirichlet handle and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cm_dirichlet_expectation(
    img: *const CmImage,
    out: *mut *mut CmImage,
) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let Some(h) = img.as_ref() else {
            return null_fail("img");
        };
        match h.inner.as_dirichlet() {
            Ok(d) => write_handle(out, CatdImage::Categorical(d.expectation())),
            Err(e) => fail(e),
        }
    })
}

/// Per-pixel Shannon entropy (nats) of a categorical image, written as a
/// scalar image handle.
///
/// # Safety
/// `img` must be a live categorical handle and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cm_entropy_map(img: *const CmImage, out: *mut *mut CmImage) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        let f = match categorical_arg(img) {
            Ok(f) => f,
            Err(status) => return status,
        };
        write_handle(out, CatdImage::Scalar(f.entropy_map()))
    })
}

/// Per-pixel index of the most probable category (ties to the lowest
/// index), written into a caller buffer of pixel-count entries.
///
/// # Safety
/// `img` must be a live categorical handle and `out` writable for
/// `out_len` entries.
#[no_mangle]
pub unsafe extern "C" fn cm_argmax_labels(
    img: *const CmImage,
    out: *mut u32,
    out_len: usize,
) -> CmStatus {
    guarded(|| {
        let f = match categorical_arg(img) {
            Ok(f) => f,
            Err(status) => return status,
        };
        if out.is_null() {
            return null_fail("out");
        }
        if out_len != f.pixel_count() {
            set_error(format!(
                "buffer holds {out_len} labels, image has {} pixels",
                f.pixel_count()
            ));
            return CmStatus::InvalidArgument;
        }
        for (slot, label) in f.argmax_labels().data().iter().enumerate() {
            let catmorph::Label::Cat(k) = label else {
                unreachable!()
            };
            *out.add(slot) = *k;
        }
        CmStatus::Ok
    })
}

/// Read a `.catd` container from disk.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn cm_read_catd(path: *const c_char, out: *mut *mut CmImage) -> CmStatus {
    guarded(|| {
        if out.is_null() {
            return null_fail("out");
        }
        if path.is_null() {
            return null_fail("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8".to_string());
            return CmStatus::InvalidArgument;
        };
        match read_catd(path) {
            Ok(img) => write_handle(out, img),
            Err(e) => fail(e),
        }
    })
}

/// Write an image as a `.catd` container.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cm_write_catd(img: *const CmImage, path: *const c_char) -> CmStatus {
    guarded(|| {
        let Some(h) = img.as_ref() else {
            return null_fail("img");
        };
        if path.is_null() {
            return null_fail("path");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8".to_string());
            return CmStatus::InvalidArgument;
        };
        match write_catd(&h.inner, path) {
            Ok(()) => CmStatus::Ok,
            Err(e) => fail(e),
        }
    })
}
