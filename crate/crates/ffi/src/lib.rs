//! C ABI over `latency-snn`.
//!
//! Every fallible call returns an [`LsnnStatus`]; on failure a message is kept
//! per thread and can be fetched with [`lsnn_last_error_message`]. Networks are
//! opaque handles created by `lsnn_network_new` / `lsnn_network_load` and
//! released with `lsnn_network_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use latency_snn::dataio::{load_checkpoint, save_checkpoint, Checkpoint};
use latency_snn::readout::{self, ReceptiveFieldBank};
use latency_snn::training::{train_from, TrainPlan};
use latency_snn::{
    init_weights, stdp_delta, Error, NetworkConfig, Retina, StdpParams, SynapseMatrix,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Io = 4,
    Data = 5,
    Panic = 6,
}

impl From<&Error> for LsnnStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidSigma { .. }
            | Error::InvalidSize(_)
            | Error::Domain(_) => LsnnStatus::InvalidArgument,
            Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } => {
                LsnnStatus::Dimension
            }
            Error::Io { .. } => LsnnStatus::Io,
            Error::BadMagic { .. }
            | Error::Truncated { .. }
            | Error::VersionMismatch { .. }
            | Error::SizeMismatch { .. }
            | Error::InsufficientImages { .. }
            | Error::Empty(_)
            | Error::Csv(_)
            | Error::Png(_) => LsnnStatus::Data,
        }
    }
}

/// Trained or freshly initialized network plus the retina that feeds it.
pub struct LsnnNetwork {
    rows: usize,
    cols: usize,
    retina: Retina,
    config: NetworkConfig,
    weights: SynapseMatrix,
    bank: ReceptiveFieldBank,
    epoch: u32,
}

impl LsnnNetwork {
    fn assemble(
        rows: usize,
        cols: usize,
        config: NetworkConfig,
        weights: SynapseMatrix,
        epoch: u32,
    ) -> Result<Self, Error> {
        config.validate()?;
        let retina = Retina::default();
        let bank = readout::estimate_rf(&weights, &retina.kernel, (rows, cols))?;
        Ok(Self {
            rows,
            cols,
            retina,
            config,
            weights,
            bank,
            epoch,
        })
    }

    fn pixels(&self) -> usize {
        self.rows * self.cols
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|s| *s.borrow_mut() = Some(c));
}

fn fail(status: LsnnStatus, msg: impl Into<String>) -> LsnnStatus {
    set_last_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), LsnnStatus>) -> LsnnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|s| *s.borrow_mut() = None);
            LsnnStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(LsnnStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: Result<T, Error>) -> Result<T, LsnnStatus> {
    r.map_err(|e| fail(LsnnStatus::from(&e), e.to_string()))
}

fn nonnull<T>(p: *const T, what: &str) -> Result<(), LsnnStatus> {
    if p.is_null() {
        Err(fail(LsnnStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn dims(what: &str, expected: usize, actual: usize) -> Result<(), LsnnStatus> {
    if expected == actual {
        Ok(())
    } else {
        Err(fail(
            LsnnStatus::Dimension,
            format!("{what}: expected {expected}, got {actual}"),
        ))
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, LsnnStatus> {
    nonnull(p, "path")?;
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(LsnnStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Creates a network for `rows × cols` images with random initial weights.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_new(
    rows: u32,
    cols: u32,
    n_neurons: u32,
    theta: f64,
    wta_k: u32,
    seed: u64,
    out: *mut *mut LsnnNetwork,
) -> LsnnStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = ptr::null_mut();
        let (rows, cols) = (rows as usize, cols as usize);
        if rows == 0 || cols == 0 {
            return Err(fail(
                LsnnStatus::InvalidArgument,
                "image size must be positive",
            ));
        }
        let config = NetworkConfig {
            n_neurons: n_neurons as usize,
            theta,
            wta_k: wta_k as usize,
            stdp: StdpParams::default(),
            seed,
        };
        lift(config.validate())?;
        let weights = lift(init_weights(2 * rows * cols, config.n_neurons, seed))?;
        let net = lift(LsnnNetwork::assemble(rows, cols, config, weights, 0))?;
        *out = Box::into_raw(Box::new(net));
        Ok(())
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `net` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_free(net: *mut LsnnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Loads a checkpoint for `rows × cols` images. The stored weights must have
/// `2 · rows · cols` afferents.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_load(
    path: *const c_char,
    rows: u32,
    cols: u32,
    wta_k: u32,
    out: *mut *mut LsnnNetwork,
) -> LsnnStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let ckpt = lift(load_checkpoint(&path))?;
        let (rows, cols) = (rows as usize, cols as usize);
        dims(
            "checkpoint afferents",
            2 * rows * cols,
            ckpt.weights.n_afferents(),
        )?;
        let config = NetworkConfig {
            n_neurons: ckpt.weights.n_neurons(),
            theta: ckpt.theta,
            wta_k: wta_k as usize,
            stdp: ckpt.stdp,
            seed: 0,
        };
        let net = lift(LsnnNetwork::assemble(
            rows,
            cols,
            config,
            ckpt.weights,
            ckpt.epoch,
        ))?;
        *out = Box::into_raw(Box::new(net));
        Ok(())
    })
}

/// # Safety
/// `net` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_save(
    net: *const LsnnNetwork,
    path: *const c_char,
) -> LsnnStatus {
    guard(|| {
        nonnull(net, "net")?;
        let net = &*net;
        let path = path_arg(path)?;
        lift(save_checkpoint(
            &path,
            &Checkpoint {
                epoch: net.epoch,
                theta: net.config.theta,
                stdp: net.config.stdp,
                weights: net.weights.clone(),
            },
        ))
    })
}

/// Number of afferents, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_n_afferents(net: *const LsnnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.weights.n_afferents())
}

/// Number of neurons, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_n_neurons(net: *const LsnnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.weights.n_neurons())
}

/// Trains on `n_images` row-major 8-bit images packed back to back.
///
/// # Safety
/// `net` must be a live handle; `images` must hold `n_images · rows · cols`
/// bytes; `epochs_run` may be null.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_train(
    net: *mut LsnnNetwork,
    images: *const u8,
    n_images: usize,
    epochs: u32,
    shuffle_seed: u64,
    epochs_run: *mut u32,
) -> LsnnStatus {
    guard(|| {
        nonnull(net, "net")?;
        nonnull(images, "images")?;
        let net = &mut *net;
        let px = net.pixels();
        let bytes = std::slice::from_raw_parts(images, n_images * px);
        let dataset = bytes
            .chunks_exact(px)
            .map(|im| {
                net.retina
                    .encode_bytes(net.rows, net.cols, im)
                    .map(|s| s.latencies)
            })
            .collect::<Result<Vec<_>, _>>();
        let dataset = lift(dataset)?;
        let plan = TrainPlan {
            epochs: epochs as usize,
            rng_seed: shuffle_seed,
            network: net.config.clone(),
            ..TrainPlan::default()
        };
        let stats = lift(train_from(&dataset, &plan, &mut net.weights))?;
        net.epoch += stats.epochs.len() as u32;
        net.bank = lift(readout::estimate_rf(
            &net.weights,
            &net.retina.kernel,
            (net.rows, net.cols),
        ))?;
        if !epochs_run.is_null() {
            *epochs_run = stats.epochs.len() as u32;
        }
        Ok(())
    })
}

/// Test-mode response to one image: `responses[i]` is 1 if neuron `i` fired.
///
/// # Safety
/// `image` must hold `rows · cols` bytes and `responses` `len` bytes;
/// `spike_count` may be null.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_respond(
    net: *const LsnnNetwork,
    image: *const u8,
    responses: *mut u8,
    len: usize,
    spike_count: *mut u32,
) -> LsnnStatus {
    guard(|| {
        nonnull(net, "net")?;
        nonnull(image, "image")?;
        nonnull(responses, "responses")?;
        let net = &*net;
        dims("responses length", net.weights.n_neurons(), len)?;
        let image = std::slice::from_raw_parts(image, net.pixels());
        let stim = lift(net.retina.encode_bytes(net.rows, net.cols, image))?;
        let r = lift(readout::responses(
            &stim.latencies,
            &net.weights,
            &net.config,
        ))?;
        let out = std::slice::from_raw_parts_mut(responses, len);
        for (o, &b) in out.iter_mut().zip(r.as_slice()) {
            *o = u8::from(b);
        }
        if !spike_count.is_null() {
            *spike_count = r.spike_count() as u32;
        }
        Ok(())
    })
}

/// Reconstructs one image from its test-mode response into `out`
/// (`rows · cols` doubles) and writes the reconstruction error.
///
/// # Safety
/// `image` must hold `rows · cols` bytes and `out` `len` doubles; `error`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_reconstruct(
    net: *const LsnnNetwork,
    image: *const u8,
    out: *mut f64,
    len: usize,
    error: *mut f64,
) -> LsnnStatus {
    guard(|| {
        nonnull(net, "net")?;
        nonnull(image, "image")?;
        nonnull(out, "out")?;
        let net = &*net;
        dims("output length", net.pixels(), len)?;
        let image = std::slice::from_raw_parts(image, net.pixels());
        let stim = lift(net.retina.encode_bytes(net.rows, net.cols, image))?;
        let (_, or, err) = lift(readout::evaluate_one(
            &net.weights,
            &net.bank,
            &stim,
            &net.config,
        ))?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(or.as_slice());
        if !error.is_null() {
            *error = err;
        }
        Ok(())
    })
}

/// Copies the afferent-major weight matrix into `out`.
///
/// # Safety
/// `out` must hold `len` floats.
#[no_mangle]
pub unsafe extern "C" fn lsnn_network_weights(
    net: *const LsnnNetwork,
    out: *mut f32,
    len: usize,
) -> LsnnStatus {
    guard(|| {
        nonnull(net, "net")?;
        nonnull(out, "out")?;
        let w = (*net).weights.as_slice();
        dims("weights length", w.len(), len)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(w);
        Ok(())
    })
}

/// Weight change under the default learning rule.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lsnn_stdp_delta(
    w: f64,
    pre_before_post: bool,
    out: *mut f64,
) -> LsnnStatus {
    guard(|| {
        nonnull(out, "out")?;
        *out = lift(stdp_delta(w, pre_before_post, &StdpParams::default()))?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the length the full message
/// needs including the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lsnn_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|s| {
        let s = s.borrow();
        let Some(msg) = s.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn lsnn_status_str(status: LsnnStatus) -> *const c_char {
    let s: &'static CStr = match status {
        LsnnStatus::Ok => c"ok",
        LsnnStatus::NullPointer => c"null pointer",
        LsnnStatus::InvalidArgument => c"invalid argument",
        LsnnStatus::Dimension => c"dimension mismatch",
        LsnnStatus::Io => c"i/o error",
        LsnnStatus::Data => c"malformed or insufficient data",
        LsnnStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
