//! C ABI over the `hdrg` decoders.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every fallible call returns an [`HdrgStatus`]; the
//! message of the most recent failure on the calling thread is available
//! through [`hdrg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hdrg::bench::{run_batch, DecoderKind, ExperimentConfig, Measurement, Model};
use hdrg::code::{logical_class, syndrome_of, CodeParams, DefectSet, ErrorChain};
use hdrg::hdrg::{hdrg_run, Strategy};
use hdrg::mwm::{decode, DecoderConfig};
use hdrg::noise::{sample_chain, trial_rng, NoiseParams};
use hdrg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdrgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidCode = 2,
    InvalidProbability = 3,
    InvalidArgument = 4,
    NonEmptySyndrome = 5,
    DecoderFailed = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdrgDecoderKind {
    Mwm = 0,
    Bh = 1,
    Abcb = 2,
    Ed = 3,
}

/// Code parameters `(d, L)`.
pub struct HdrgCode(CodeParams);

/// A sparse Z_d chain on the edges of a code.
pub struct HdrgChain(ErrorChain);

/// A configured decoder.
pub struct HdrgDecoder {
    kind: HdrgDecoderKind,
    p: f64,
    cfg: DecoderConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HdrgBatchConfig {
    pub decoder: HdrgDecoderKind,
    pub d: u32,
    pub l: u32,
    pub p: f64,
    pub trials: u64,
    /// Zero for perfect measurements, otherwise the number of faulty rounds.
    pub rounds: u32,
    pub shortcuts: bool,
    pub lambda: f64,
    pub dm1_factor: bool,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HdrgBatchStats {
    pub trials: u64,
    pub failures: u64,
    pub p_logical: f64,
    pub sigma: f64,
    pub mean_iterations: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HdrgStatus {
    match e {
        Error::InvalidCode { .. } => HdrgStatus::InvalidCode,
        Error::Probability { .. } => HdrgStatus::InvalidProbability,
        Error::NonEmptySyndrome(_) => HdrgStatus::NonEmptySyndrome,
        Error::NoProgress(_) | Error::NoPerfectMatching | Error::OddVertexCount(_) | Error::OddLambda(_) => {
            HdrgStatus::DecoderFailed
        }
        Error::Trial { .. } => HdrgStatus::DecoderFailed,
        _ => HdrgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HdrgStatus>) -> HdrgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HdrgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            HdrgStatus::Panic
        }
    }
}

fn fail(e: Error) -> HdrgStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null() -> HdrgStatus {
    set_error("null pointer argument".into());
    HdrgStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, HdrgStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, HdrgStatus> {
    p.as_mut().ok_or_else(null)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hdrg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null when `len` is 0.
/// `needed`, if non-null, receives the message length including the NUL.
#[no_mangle]
pub unsafe extern "C" fn hdrg_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> HdrgStatus {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !needed.is_null() {
            *needed = bytes.len();
        }
        if len < bytes.len() {
            return HdrgStatus::BufferTooSmall;
        }
        if buf.is_null() {
            return HdrgStatus::NullPointer;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        HdrgStatus::Ok
    })
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hdrg_code_new(d: u32, l: u32, out: *mut *mut HdrgCode) -> HdrgStatus {
    guard(|| {
        let out = deref_mut(out)?;
        let c = CodeParams::new(d, l as usize).map_err(fail)?;
        *out = Box::into_raw(Box::new(HdrgCode(c)));
        Ok(())
    })
}

/// # Safety
/// `code` must come from [`hdrg_code_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hdrg_code_free(code: *mut HdrgCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Number of edges, `2 L^2`.
///
/// # Safety
/// `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hdrg_code_num_edges(code: *const HdrgCode) -> usize {
    code.as_ref().map_or(0, |c| c.0.num_edges())
}

/// Creates an empty chain.
#[no_mangle]
pub extern "C" fn hdrg_chain_new() -> *mut HdrgChain {
    Box::into_raw(Box::new(HdrgChain(ErrorChain::new())))
}

/// # Safety
/// `chain` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hdrg_chain_free(chain: *mut HdrgChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Adds `g` (mod d) to edge `edge`.
///
/// # Safety
/// `chain` and `code` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn hdrg_chain_add(chain: *mut HdrgChain, code: *const HdrgCode, edge: usize, g: u32) -> HdrgStatus {
    guard(|| {
        let (ch, c) = (deref_mut(chain)?, deref(code)?);
        if edge >= c.0.num_edges() {
            set_error(format!("edge {edge} out of range"));
            return Err(HdrgStatus::InvalidArgument);
        }
        ch.0.add(edge, g % c.0.d, c.0.d);
        Ok(())
    })
}

/// Exponent on `edge`, 0 when absent or when `chain` is null.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdrg_chain_get(chain: *const HdrgChain, edge: usize) -> u32 {
    chain.as_ref().map_or(0, |c| c.0.get(edge))
}

/// Number of edges with a nonzero exponent.
///
/// # Safety
/// `chain` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hdrg_chain_len(chain: *const HdrgChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.len())
}

/// Replaces `chain` with a uniform noise sample for `(seed, trial)`.
///
/// # Safety
/// `chain` and `code` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn hdrg_chain_sample(
    chain: *mut HdrgChain,
    code: *const HdrgCode,
    p: f64,
    seed: u64,
    trial: u64,
) -> HdrgStatus {
    guard(|| {
        let (ch, c) = (deref_mut(chain)?, deref(code)?);
        let np = NoiseParams::uniform(p, c.0.d).map_err(fail)?;
        ch.0 = sample_chain(&np, &c.0, &mut trial_rng(seed, trial)).map_err(fail)?;
        Ok(())
    })
}

/// Number of defects in the syndrome of `chain`.
///
/// # Safety
/// `chain` and `code` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdrg_syndrome_size(code: *const HdrgCode, chain: *const HdrgChain, out: *mut usize) -> HdrgStatus {
    guard(|| {
        let (c, ch, out) = (deref(code)?, deref(chain)?, deref_mut(out)?);
        *out = syndrome_of(&ch.0, &c.0).len();
        Ok(())
    })
}

/// Homology class of a closed chain.
///
/// # Safety
/// `code` and `chain` must be live handles; `gx` and `gy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hdrg_logical_class(
    code: *const HdrgCode,
    chain: *const HdrgChain,
    gx: *mut u32,
    gy: *mut u32,
) -> HdrgStatus {
    guard(|| {
        let (c, ch, gx, gy) = (deref(code)?, deref(chain)?, deref_mut(gx)?, deref_mut(gy)?);
        let lc = logical_class(&ch.0, &c.0).map_err(fail)?;
        *gx = lc.gx;
        *gy = lc.gy;
        Ok(())
    })
}

/// Creates a decoder. `p` is the assumed error rate (used by the MWM
/// weights); `lambda` and `dm1_factor` only affect the MWM decoder.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hdrg_decoder_new(
    kind: HdrgDecoderKind,
    p: f64,
    lambda: f64,
    shortcuts: bool,
    dm1_factor: bool,
    out: *mut *mut HdrgDecoder,
) -> HdrgStatus {
    guard(|| {
        let out = deref_mut(out)?;
        if !lambda.is_finite() {
            set_error("lambda must be finite".into());
            return Err(HdrgStatus::InvalidArgument);
        }
        let cfg = DecoderConfig { lambda, include_dm1_factor: dm1_factor, use_shortcuts: shortcuts, ..Default::default() };
        *out = Box::into_raw(Box::new(HdrgDecoder { kind, p, cfg }));
        Ok(())
    })
}

/// # Safety
/// `dec` must come from [`hdrg_decoder_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hdrg_decoder_free(dec: *mut HdrgDecoder) {
    if !dec.is_null() {
        drop(Box::from_raw(dec));
    }
}

/// Decodes the syndrome of `error` (perfect measurements) and returns a
/// new recovery chain in `*recovery`, to be released with [`hdrg_chain_free`].
///
/// # Safety
/// All handles must be live; `recovery` must be writable; `iterations`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn hdrg_decode(
    dec: *const HdrgDecoder,
    code: *const HdrgCode,
    error: *const HdrgChain,
    recovery: *mut *mut HdrgChain,
    iterations: *mut usize,
) -> HdrgStatus {
    guard(|| {
        let (dec, c, e, rec) = (deref(dec)?, deref(code)?, deref(error)?, deref_mut(recovery)?);
        let ds = DefectSet::from_syndrome(&syndrome_of(&e.0, &c.0));
        let sc = dec.cfg.use_shortcuts;
        let out = match dec.kind {
            HdrgDecoderKind::Mwm => decode(&ds, &c.0, dec.p, &dec.cfg),
            HdrgDecoderKind::Bh => hdrg_run(Strategy::Bh, &ds, &c.0, sc),
            HdrgDecoderKind::Abcb => hdrg_run(Strategy::Abcb, &ds, &c.0, sc),
            HdrgDecoderKind::Ed => hdrg_run(Strategy::Ed, &ds, &c.0, sc),
        }
        .map_err(fail)?;
        if let Some(it) = iterations.as_mut() {
            *it = out.iterations;
        }
        *rec = Box::into_raw(Box::new(HdrgChain(out.recovery)));
        Ok(())
    })
}

/// Runs a seeded Monte Carlo batch on the Z_d model.
///
/// # Safety
/// `cfg` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hdrg_run_batch(cfg: *const HdrgBatchConfig, out: *mut HdrgBatchStats) -> HdrgStatus {
    guard(|| {
        let (c, out) = (deref(cfg)?, deref_mut(out)?);
        let ec = ExperimentConfig {
            model: Model::Zd,
            decoder: match c.decoder {
                HdrgDecoderKind::Mwm => DecoderKind::Mwm,
                HdrgDecoderKind::Bh => DecoderKind::Bh,
                HdrgDecoderKind::Abcb => DecoderKind::Abcb,
                HdrgDecoderKind::Ed => DecoderKind::Ed,
            },
            d: c.d,
            l: c.l as usize,
            p: c.p,
            trials: c.trials,
            rounds: (c.rounds > 0).then_some(c.rounds as usize),
            measurement: if c.rounds > 0 { Measurement::Faulty } else { Measurement::Perfect },
            shortcuts: c.shortcuts,
            lambda: c.lambda,
            dm1_factor: c.dm1_factor,
            seed: c.seed,
        };
        let s = run_batch(&ec).map_err(fail)?;
        *out = HdrgBatchStats {
            trials: s.trials,
            failures: s.failures,
            p_logical: s.p_logical,
            sigma: s.sigma,
            mean_iterations: s.mean_iterations,
        };
        Ok(())
    })
}

/// Hashing bound for qudit dimension `d`; NaN for `d < 2`.
#[no_mangle]
pub extern "C" fn hdrg_hashing_bound(d: u32) -> f64 {
    if d < 2 {
        return f64::NAN;
    }
    hdrg::bench::hashing_bound(d)
}
