//! The six transmit/receive chains.
//!
//! Every scheme turns a bit payload into a sequence of nonnegative LED
//! drive intensities (one `N_t`-vector per channel use) and inverts the
//! process from zero-forced receiver samples:
//!
//! * `dco`: DC-biased OFDM — full Hermitian frame, bias `k sigma_x` added,
//!   residual negatives clipped at zero; one or two independent parallel
//!   streams, one LED each.
//! * `aco`: asymmetrically clipped OFDM — odd subcarriers only, clipped at
//!   zero; clipping falls on even bins and halves the odd ones, which the
//!   receiver undoes by doubling.
//! * `flip`: positive part and flipped negative part sent in two
//!   consecutive time slots.
//! * `ndc`: the positive part drives LED 1 and the flipped negative part
//!   LED 2, so the active-LED identity carries the sign and no DC bias or
//!   slot doubling is needed.
//! * `indc`: NDC over a selected LED pair; the pair index carries one extra
//!   bit per channel use.
//! * `cindc`: `indc` with the index bits protected by a rate-1/2 LDPC code.
//!
//! Transceivers are immutable after construction and safe to share across
//! worker threads.

pub mod detector;

mod aco;
mod cindc;
mod dco;
mod flip;
mod indc;
mod ndc;

pub use detector::{DetectError, SmDecision, ZfDetector, ZfEqualizer};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::ChannelMatrix;
use crate::ldpc::LdpcError;
use crate::ofdm::{mean_sq, FrameLayout, OfdmError, OfdmPlan, SubcarrierFrame};
use crate::qam::{QamConstellation, QamError};
use crate::rng_util::mix_seed;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Qam(#[from] QamError),
    #[error(transparent)]
    Ofdm(#[from] OfdmError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("invalid scheme config: {0}")]
    BadConfig(String),
    #[error("{what}: expected {expected} bits, got {got}")]
    PayloadSize { what: &'static str, expected: usize, got: usize },
    #[error("scheme needs {required} LEDs, geometry has {got}")]
    LedCount { required: usize, got: usize },
    #[error("received block: expected {expected} uses x {expected_cols} detectors, got {rows} x {cols}")]
    SignalShape { expected: usize, expected_cols: usize, rows: usize, cols: usize },
    #[error("link operators are missing the {0} this scheme requires")]
    MissingOperator(&'static str),
    #[error("genie index stream: expected {expected} bits, got {got}")]
    GenieSize { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Dco,
    Aco,
    Flip,
    Ndc,
    Indc,
    Cindc,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Dco => "dco",
            SchemeKind::Aco => "aco",
            SchemeKind::Flip => "flip",
            SchemeKind::Ndc => "ndc",
            SchemeKind::Indc => "indc",
            SchemeKind::Cindc => "cindc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "dco" => SchemeKind::Dco,
            "aco" => SchemeKind::Aco,
            "flip" => SchemeKind::Flip,
            "ndc" => SchemeKind::Ndc,
            "indc" | "i-ndc" => SchemeKind::Indc,
            "cindc" | "ci-ndc" => SchemeKind::Cindc,
            _ => return None,
        })
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// LDPC parameters for the coded index stream.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Feed the decoder hard decisions (fixed-magnitude LLRs) instead of
    /// soft metrics.
    pub hard_input: bool,
}

impl Default for CodeParams {
    fn default() -> Self {
        Self { n: 1008, k: 504, seed: 1, max_iterations: 50, hard_input: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Subcarrier count N.
    pub n_subcarriers: usize,
    /// Constellation order M (or M_c for the coded scheme).
    pub order: usize,
    /// DC bias in dB above the signal power (DCO only).
    pub bias_db: f64,
    /// Independent parallel streams for DCO/ACO/Flip, one LED each.
    pub parallel_blocks: usize,
    /// LED pairs for index schemes; only 2 is supported.
    pub n_pairs: usize,
    pub code: CodeParams,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            n_subcarriers: 64,
            order: 16,
            bias_db: 7.0,
            parallel_blocks: 1,
            n_pairs: 2,
            code: CodeParams::default(),
        }
    }
}

/// Bit budget of one transmit frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadShape {
    pub modulation_bits: usize,
    pub index_bits: usize,
}

/// Bits for one transmit frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub modulation: Vec<bool>,
    pub index: Vec<bool>,
}

/// Row-major sample matrix: one row per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n_cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// One transmitted frame: drive intensities plus the index bit actually
/// sent on each channel use (post-encoding; empty for index-free schemes).
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub intensity: SampleMatrix,
    pub index_stream: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeStats {
    pub converged: bool,
    pub iterations: usize,
}

/// Receiver verdict for one frame.
#[derive(Debug, Clone)]
pub struct RxOutput {
    pub modulation: Vec<bool>,
    /// Index decisions before decoding (the raw detector stream).
    pub index_raw: Vec<bool>,
    /// Index information bits (decoded for CI-NDC, equal to `index_raw`
    /// for I-NDC, empty otherwise).
    pub index_info: Vec<bool>,
    pub decode: Option<DecodeStats>,
}

/// Receiver-side operators derived from one channel realization.
#[derive(Debug, Clone)]
pub struct LinkOps {
    /// Effective matrix `r H` seen by the electrical receiver.
    pub eff: ChannelMatrix,
    pub sigma: f64,
    pub equalizer: Option<ZfEqualizer>,
    pub detector: Option<ZfDetector>,
}

impl LinkOps {
    /// Builds the operators `t` needs over effective channel `r h` with
    /// noise level `sigma`.
    pub fn new(
        h: &ChannelMatrix,
        responsivity: f64,
        sigma: f64,
        t: &Transceiver,
    ) -> Result<Self, SchemeError> {
        t.check_led_count(h.n_cols())?;
        let eff = h.scaled(responsivity);
        let (equalizer, detector) = match t.kind() {
            SchemeKind::Dco | SchemeKind::Aco | SchemeKind::Flip => {
                (Some(ZfEqualizer::new(&eff)?), None)
            }
            SchemeKind::Ndc | SchemeKind::Indc | SchemeKind::Cindc => {
                (None, Some(ZfDetector::new(&eff)?))
            }
        };
        Ok(Self { eff, sigma, equalizer, detector })
    }

    fn equalizer(&self) -> Result<&ZfEqualizer, SchemeError> {
        self.equalizer.as_ref().ok_or(SchemeError::MissingOperator("equalizer"))
    }

    fn detector(&self) -> Result<&ZfDetector, SchemeError> {
        self.detector.as_ref().ok_or(SchemeError::MissingOperator("detector"))
    }
}

/// Per-frame receive context.
#[derive(Debug, Clone, Copy)]
pub struct RxContext<'a> {
    pub ops: &'a LinkOps,
    /// Error-free index stream for genie mode (the transmitted
    /// `index_stream`); substitutes block decisions only, never the
    /// sign/magnitude path.
    pub genie_index: Option<&'a [bool]>,
}

/// Splits a bipolar signal into its positive part and flipped negative
/// part: `x = plus - minus`, `plus * minus = 0` pointwise, both
/// nonnegative. `x(n) = 0` lands in the positive branch.
pub fn polarity_separate(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let plus: Vec<f64> = x.iter().map(|&v| if v >= 0.0 { v } else { 0.0 }).collect();
    let minus: Vec<f64> = x.iter().map(|&v| if v >= 0.0 { 0.0 } else { -v }).collect();
    (plus, minus)
}

/// Shared modulation chain: constellation + transform plan + the calibrated
/// mean-square of the bipolar time-domain signal.
#[derive(Debug)]
pub(crate) struct ModChain {
    pub plan: OfdmPlan,
    pub qam: QamConstellation,
    pub layout: FrameLayout,
    pub sigma_x: f64,
}

const CALIBRATION_SEED: u64 = 0x5EED_CA11_B2A7_E001;
const CALIBRATION_FRAMES: usize = 4096;

impl ModChain {
    pub fn new(n: usize, order: usize, layout: FrameLayout) -> Result<Self, SchemeError> {
        let plan = OfdmPlan::new(n)?;
        let qam = QamConstellation::new(order)?;
        let sigma_x = calibrate_sigma_x(&plan, &qam, layout)?;
        Ok(Self { plan, qam, layout, sigma_x })
    }

    pub fn n(&self) -> usize {
        self.plan.n()
    }

    pub fn symbols_per_frame(&self) -> usize {
        match self.layout {
            FrameLayout::Full => self.n() / 2 - 1,
            FrameLayout::OddOnly => self.n() / 4,
        }
    }

    pub fn bits_per_frame(&self) -> usize {
        self.symbols_per_frame() * self.qam.bits_per_symbol()
    }

    /// Bits -> bipolar time signal for one OFDM symbol.
    pub fn modulate(&self, bits: &[bool]) -> Result<Vec<f64>, SchemeError> {
        let syms = self.qam.map_bits(bits)?;
        let frame = match self.layout {
            FrameLayout::Full => SubcarrierFrame::full(self.n(), &syms)?,
            FrameLayout::OddOnly => SubcarrierFrame::odd_only(self.n(), &syms)?,
        };
        Ok(self.plan.ifft_real(&frame)?)
    }

    /// Reconstructed bipolar signal -> bits, appended to `out`.
    pub fn demodulate(&self, signal: &[f64], out: &mut Vec<bool>) -> Result<(), SchemeError> {
        let spectrum = self.plan.fft(signal)?;
        match self.layout {
            FrameLayout::Full => self.qam.demap_bits(spectrum.full_data(), out),
            FrameLayout::OddOnly => {
                // clipping halved the odd bins; undo it
                let syms: Vec<_> = spectrum.odd_data().iter().map(|s| s * 2.0).collect();
                self.qam.demap_bits(&syms, out)
            }
        }
        Ok(())
    }
}

/// Empirical RMS of the bipolar OFDM signal for this (N, M, layout),
/// measured once over a seeded stream of random frames. All power and SNR
/// accounting is anchored to this value.
fn calibrate_sigma_x(
    plan: &OfdmPlan,
    qam: &QamConstellation,
    layout: FrameLayout,
) -> Result<f64, SchemeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[
        CALIBRATION_SEED,
        plan.n() as u64,
        qam.order() as u64,
        matches!(layout, FrameLayout::OddOnly) as u64,
    ]));
    let symbols = match layout {
        FrameLayout::Full => plan.n() / 2 - 1,
        FrameLayout::OddOnly => plan.n() / 4,
    };
    let bits_per_frame = symbols * qam.bits_per_symbol();
    let mut acc = 0.0f64;
    let mut bits = vec![false; bits_per_frame];
    for _ in 0..CALIBRATION_FRAMES {
        for b in bits.iter_mut() {
            *b = rng.gen();
        }
        let syms = qam.map_bits(&bits)?;
        let frame = match layout {
            FrameLayout::Full => SubcarrierFrame::full(plan.n(), &syms)?,
            FrameLayout::OddOnly => SubcarrierFrame::odd_only(plan.n(), &syms)?,
        };
        acc += mean_sq(&plan.ifft_real(&frame)?);
    }
    Ok((acc / CALIBRATION_FRAMES as f64).sqrt())
}

/// LED-count contract of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequiredLeds {
    /// Spatial schemes: the geometry must provide exactly this many LEDs.
    Exact(usize),
    /// Stream schemes: at least this many; extra LEDs stay dark.
    AtLeast(usize),
}

pub(crate) trait SchemeImpl: Send + Sync + std::fmt::Debug {
    fn payload_shape(&self) -> PayloadShape;
    fn uses_per_frame(&self) -> usize;
    fn required_leds(&self) -> RequiredLeds;
    fn rate(&self) -> f64;
    fn sigma_x(&self) -> f64;
    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError>;
    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError>;
}

/// A configured transmitter/receiver pair for one scheme.
#[derive(Debug)]
pub struct Transceiver {
    kind: SchemeKind,
    config: SchemeConfig,
    inner: Box<dyn SchemeImpl>,
}

impl Transceiver {
    pub fn new(config: &SchemeConfig) -> Result<Self, SchemeError> {
        let c = config;
        let inner: Box<dyn SchemeImpl> = match c.kind {
            SchemeKind::Dco => Box::new(dco::Dco::new(c)?),
            SchemeKind::Aco => Box::new(aco::Aco::new(c)?),
            SchemeKind::Flip => Box::new(flip::Flip::new(c)?),
            SchemeKind::Ndc => Box::new(ndc::Ndc::new(c)?),
            SchemeKind::Indc => Box::new(indc::Indc::new(c)?),
            SchemeKind::Cindc => Box::new(cindc::Cindc::new(c)?),
        };
        Ok(Self { kind: c.kind, config: c.clone(), inner })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    /// Bit budget of one frame.
    pub fn payload_shape(&self) -> PayloadShape {
        self.inner.payload_shape()
    }

    /// Channel uses (time samples) per frame.
    pub fn uses_per_frame(&self) -> usize {
        self.inner.uses_per_frame()
    }

    pub fn required_leds(&self) -> RequiredLeds {
        self.inner.required_leds()
    }

    /// Nominal spectral efficiency in bits per channel use.
    pub fn rate(&self) -> f64 {
        self.inner.rate()
    }

    /// Effective signal RMS entering the average-SNR definition.
    ///
    /// The noise calibration in the simulator assumes a single LED driven by
    /// a bipolar frame of this RMS. Schemes whose transmit format radiates
    /// more or less mean optical power than that reference (DC bias, clipped
    /// or slotted sub-frames, several simultaneously active LEDs) fold the
    /// ratio into this value so that equal SNR always means equal received
    /// signal power.
    pub fn sigma_x(&self) -> f64 {
        self.inner.sigma_x()
    }

    pub fn check_led_count(&self, n_t: usize) -> Result<(), SchemeError> {
        let ok = match self.required_leds() {
            RequiredLeds::Exact(n) => n_t == n,
            RequiredLeds::AtLeast(n) => n_t >= n,
        };
        if ok {
            Ok(())
        } else {
            let required = match self.required_leds() {
                RequiredLeds::Exact(n) | RequiredLeds::AtLeast(n) => n,
            };
            Err(SchemeError::LedCount { required, got: n_t })
        }
    }

    /// Draws a uniformly random payload: modulation bits first, then index
    /// bits, in stream order.
    pub fn random_payload<R: Rng>(&self, rng: &mut R) -> Payload {
        let shape = self.payload_shape();
        let modulation = (0..shape.modulation_bits).map(|_| rng.gen()).collect();
        let index = (0..shape.index_bits).map(|_| rng.gen()).collect();
        Payload { modulation, index }
    }

    /// Encodes one payload into LED intensities for a geometry with `n_t`
    /// LEDs.
    pub fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        self.check_led_count(n_t)?;
        let shape = self.payload_shape();
        if payload.modulation.len() != shape.modulation_bits {
            return Err(SchemeError::PayloadSize {
                what: "modulation bits",
                expected: shape.modulation_bits,
                got: payload.modulation.len(),
            });
        }
        if payload.index.len() != shape.index_bits {
            return Err(SchemeError::PayloadSize {
                what: "index bits",
                expected: shape.index_bits,
                got: payload.index.len(),
            });
        }
        let tx = self.inner.transmit(payload, n_t)?;
        debug_assert!(tx.intensity.min_value() >= 0.0, "intensities must be nonnegative");
        Ok(tx)
    }

    /// Recovers the payload estimate from one frame of receiver samples
    /// (`uses_per_frame` rows, one column per detector).
    pub fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        if y.n_rows() != self.uses_per_frame() {
            return Err(SchemeError::SignalShape {
                expected: self.uses_per_frame(),
                expected_cols: ctx.ops.eff.n_rows(),
                rows: y.n_rows(),
                cols: y.n_cols(),
            });
        }
        self.inner.receive(y, ctx)
    }
}

pub(crate) fn validate_blocks(blocks: usize) -> Result<(), SchemeError> {
    if blocks == 1 || blocks == 2 {
        Ok(())
    } else {
        Err(SchemeError::BadConfig(format!("parallel_blocks must be 1 or 2, got {blocks}")))
    }
}
