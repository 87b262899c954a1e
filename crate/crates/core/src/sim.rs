//! Deterministic Monte Carlo BER engine.
//!
//! Every trial owns an RNG seeded from `(master seed, SNR bits, trial
//! index)`, so a point's tallies are a sum of per-trial integer counts that
//! does not depend on scheduling. Trials run in fixed-size batches; the
//! stopping rule is evaluated only at batch boundaries, which keeps the
//! number of trials — and therefore every count — identical no matter how
//! many worker threads rayon uses.

use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    build_channel, received_power_sq, sigma_for_snr, ChannelError, ChannelMatrix, GeometryParams,
};
use crate::rng_util::mix_seed;
use crate::schemes::{LinkOps, RxContext, SampleMatrix, SchemeConfig, SchemeError, Transceiver};

/// Trials per scheduling batch. The stopping rule is checked after each
/// batch, so this is part of the reproducibility contract: changing it
/// changes how many trials a point runs.
const BATCH_TRIALS: u64 = 64;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
}

/// One Monte Carlo experiment: a scheme over a geometry, swept across SNR.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub scheme: SchemeConfig,
    pub geometry: GeometryParams,
    /// Electrical SNR points in dB. `+inf` is allowed and means zero noise.
    pub snr_db: Vec<f64>,
    pub seed: u64,
    /// Stop a point once it has at least this many total bit errors ...
    pub min_errors: u64,
    /// ... or once it has consumed this many channel uses.
    pub max_uses: u64,
    /// Hand the receiver the transmitted index stream (error-free index
    /// bits).
    pub genie_index: bool,
}

impl SimConfig {
    pub fn new(scheme: SchemeConfig) -> Self {
        Self {
            scheme,
            geometry: GeometryParams::default(),
            snr_db: Vec::new(),
            seed: 1,
            min_errors: 200,
            max_uses: 100_000_000,
            genie_index: false,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.min_errors == 0 {
            return Err(SimError::BadConfig("min_errors must be at least 1".into()));
        }
        if self.max_uses == 0 {
            return Err(SimError::BadConfig("max_uses must be at least 1".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(SimError::BadConfig("SNR list contains NaN".into()));
        }
        Ok(())
    }
}

/// Why a point stopped accumulating trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reached the requested error count.
    ErrorTarget,
    /// Exhausted the channel-use budget first.
    UseBudget,
}

/// BER tallies for one (scheme, SNR) point, split by bit class.
#[derive(Debug, Clone)]
pub struct BerPoint {
    pub scheme: String,
    pub snr_db: f64,
    pub trials: u64,
    pub uses: u64,
    pub bits_mod: u64,
    pub errs_mod: u64,
    /// Raw index decisions, counted against the transmitted (coded) index
    /// stream.
    pub bits_idx: u64,
    pub errs_idx: u64,
    /// Index information bits after any decoding.
    pub bits_idx_info: u64,
    pub errs_idx_info: u64,
    pub seed: u64,
    pub stop: StopReason,
    pub elapsed_s: f64,
}

pub const CSV_HEADER: &str = "scheme,snr_db,trials,bits_mod,errs_mod,bits_idx,errs_idx,\
                              bits_idx_info,errs_idx_info,ber_total,ci95_low,ci95_high,seed";

impl BerPoint {
    /// Total errors across the classes a payload bit belongs to:
    /// modulation bits plus index information bits.
    pub fn total_errors(&self) -> u64 {
        self.errs_mod + self.errs_idx_info
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_mod + self.bits_idx_info
    }

    pub fn ber_total(&self) -> f64 {
        self.total_errors() as f64 / self.total_bits() as f64
    }

    /// 95% confidence interval for the total BER (normal approximation of
    /// the binomial).
    pub fn ci95(&self) -> (f64, f64) {
        let n = self.total_bits() as f64;
        let p = self.ber_total();
        let half = 1.96 * (p * (1.0 - p) / n).sqrt();
        ((p - half).max(0.0), (p + half).min(1.0))
    }

    pub fn csv_row(&self) -> String {
        let (lo, hi) = self.ci95();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.snr_db,
            self.trials,
            self.bits_mod,
            self.errs_mod,
            self.bits_idx,
            self.errs_idx,
            self.bits_idx_info,
            self.errs_idx_info,
            self.ber_total(),
            lo,
            hi,
            self.seed,
        )
    }
}

/// Writes the standard CSV: one header line, one row per point.
pub fn write_csv<W: Write>(w: &mut W, points: &[BerPoint]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{}", p.csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Default, Clone, Copy)]
struct Tallies {
    bits_mod: u64,
    errs_mod: u64,
    bits_idx: u64,
    errs_idx: u64,
    bits_idx_info: u64,
    errs_idx_info: u64,
}

impl Tallies {
    fn add(self, o: Tallies) -> Tallies {
        Tallies {
            bits_mod: self.bits_mod + o.bits_mod,
            errs_mod: self.errs_mod + o.errs_mod,
            bits_idx: self.bits_idx + o.bits_idx,
            errs_idx: self.errs_idx + o.errs_idx,
            bits_idx_info: self.bits_idx_info + o.bits_idx_info,
            errs_idx_info: self.errs_idx_info + o.errs_idx_info,
        }
    }

    fn total_errors(&self) -> u64 {
        self.errs_mod + self.errs_idx_info
    }
}

fn hamming(a: &[bool], b: &[bool]) -> u64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// One independent trial: draw a payload, push a frame through `y = rHx + n`,
/// and count the bit errors per class.
fn run_trial(
    cfg: &SimConfig,
    t: &Transceiver,
    ops: &LinkOps,
    snr_db: f64,
    trial: u64,
) -> Result<Tallies, SchemeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, snr_db.to_bits(), trial]));
    let payload = t.random_payload(&mut rng);
    let tx = t.transmit(&payload, ops.eff.n_cols())?;
    let uses = tx.intensity.n_rows();
    let mut y = SampleMatrix::zeros(uses, ops.eff.n_rows());
    for u in 0..uses {
        ops.eff.accumulate_product(tx.intensity.row(u), y.row_mut(u));
    }
    if ops.sigma > 0.0 {
        for u in 0..uses {
            for v in y.row_mut(u) {
                *v += ops.sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    let genie = cfg.genie_index.then_some(tx.index_stream.as_slice());
    let rx = t.receive(&y, &RxContext { ops, genie_index: genie })?;
    Ok(Tallies {
        bits_mod: payload.modulation.len() as u64,
        errs_mod: hamming(&payload.modulation, &rx.modulation),
        bits_idx: tx.index_stream.len() as u64,
        errs_idx: hamming(&tx.index_stream, &rx.index_raw),
        bits_idx_info: payload.index.len() as u64,
        errs_idx_info: hamming(&payload.index, &rx.index_info),
    })
}

fn point_inner(
    cfg: &SimConfig,
    t: &Transceiver,
    ops: &LinkOps,
    snr_db: f64,
) -> Result<BerPoint, SimError> {
    let started = Instant::now();
    let uses_per_frame = t.uses_per_frame() as u64;
    let mut tallies = Tallies::default();
    let mut trials = 0u64;
    while tallies.total_errors() < cfg.min_errors && trials * uses_per_frame < cfg.max_uses {
        let batch = (trials..trials + BATCH_TRIALS)
            .into_par_iter()
            .map(|trial| run_trial(cfg, t, ops, snr_db, trial))
            .try_reduce(Tallies::default, |a, b| Ok(a.add(b)))?;
        tallies = tallies.add(batch);
        trials += BATCH_TRIALS;
    }
    let stop = if tallies.total_errors() >= cfg.min_errors {
        StopReason::ErrorTarget
    } else {
        StopReason::UseBudget
    };
    let scheme = if cfg.genie_index {
        format!("{}-genie", t.kind().name())
    } else {
        t.kind().name().to_string()
    };
    Ok(BerPoint {
        scheme,
        snr_db,
        trials,
        uses: trials * uses_per_frame,
        bits_mod: tallies.bits_mod,
        errs_mod: tallies.errs_mod,
        bits_idx: tallies.bits_idx,
        errs_idx: tallies.errs_idx,
        bits_idx_info: tallies.bits_idx_info,
        errs_idx_info: tallies.errs_idx_info,
        seed: cfg.seed,
        stop,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

/// Runs one (scheme, SNR) point to its stopping rule.
pub fn run_point(cfg: &SimConfig, snr_db: f64) -> Result<BerPoint, SimError> {
    cfg.validate()?;
    let t = Transceiver::new(&cfg.scheme)?;
    let resp = cfg.geometry.responsivity;
    let h = build_channel(&cfg.geometry.build()?);
    let ops = link_for_snr(&t, &h, resp, snr_db)?;
    point_inner(cfg, &t, &ops, snr_db)
}

fn link_for_snr(
    t: &Transceiver,
    h: &ChannelMatrix,
    responsivity: f64,
    snr_db: f64,
) -> Result<LinkOps, SimError> {
    let pr_sq = received_power_sq(h, t.sigma_x());
    let sigma = sigma_for_snr(snr_db, responsivity, pr_sq)?;
    Ok(LinkOps::new(h, responsivity, sigma, t)?)
}

/// Runs the configured SNR sweep, invoking `on_point` as each point
/// completes (the hook is how callers persist partial results).
pub fn run_sweep_with(
    cfg: &SimConfig,
    mut on_point: impl FnMut(&BerPoint),
) -> Result<Vec<BerPoint>, SimError> {
    cfg.validate()?;
    let t = Transceiver::new(&cfg.scheme)?;
    let resp = cfg.geometry.responsivity;
    let h = build_channel(&cfg.geometry.build()?);
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for &snr_db in &cfg.snr_db {
        let ops = link_for_snr(&t, &h, resp, snr_db)?;
        let point = point_inner(cfg, &t, &ops, snr_db)?;
        on_point(&point);
        points.push(point);
    }
    Ok(points)
}

/// Runs the configured SNR sweep and returns the points in list order.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>, SimError> {
    run_sweep_with(cfg, |_| {})
}

/// Sweeps the LED spacing at the configured SNR points. The channel is
/// rebuilt for every spacing and the noise level re-derived from its
/// received power, so the SNR axis means the same thing at every spacing.
pub fn sweep_dtx(cfg: &SimConfig, d_tx: &[f64]) -> Result<Vec<(f64, BerPoint)>, SimError> {
    cfg.validate()?;
    let t = Transceiver::new(&cfg.scheme)?;
    let mut out = Vec::with_capacity(d_tx.len() * cfg.snr_db.len());
    for &d in d_tx {
        let params = GeometryParams { d_tx: d, ..cfg.geometry.clone() };
        let h = build_channel(&params.build()?);
        for &snr_db in &cfg.snr_db {
            let ops = link_for_snr(&t, &h, params.responsivity, snr_db)?;
            out.push((d, point_inner(cfg, &t, &ops, snr_db)?));
        }
    }
    Ok(out)
}
