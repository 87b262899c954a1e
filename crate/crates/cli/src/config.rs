//! TOML configuration schema.
//!
//! Every section and every field is optional; omitted values fall back to
//! the reference indoor setup. The same schema doubles as the run
//! manifest: a manifest is a fully resolved config plus a `[run]` metadata
//! table, so feeding a manifest back through `--config` replays the run.

use serde::{Deserialize, Serialize};
use vlc_ofdm::channel::{GeometryParams, Vec3};
use vlc_ofdm::schemes::{CodeParams, SchemeConfig, SchemeKind};
use vlc_ofdm::sim::SimConfig;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub room: RoomSection,
    pub transmitter: TxSection,
    pub receiver: RxSection,
    pub scheme: SchemeSection,
    pub sim: SimSection,
    /// Present only in manifests; ignored as input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomSection {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for RoomSection {
    fn default() -> Self {
        Self { x: 5.0, y: 5.0, z: 3.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxSection {
    /// Height of the downward-facing LED plane in metres.
    pub height: f64,
    pub half_power_deg: f64,
    /// Number of LEDs: 2 (on the x axis) or 4 (square grid).
    pub count: usize,
    /// LED spacing d_tx in metres.
    pub spacing: f64,
}

impl Default for TxSection {
    fn default() -> Self {
        Self { height: 3.0, half_power_deg: 60.0, count: 2, spacing: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxSection {
    /// Height of the upward-facing detector plane in metres.
    pub height: f64,
    pub fov_deg: f64,
    pub area_m2: f64,
    /// Number of detectors: 2 or 4, mirroring the LED layouts.
    pub count: usize,
    /// Detector spacing d_rx in metres.
    pub spacing: f64,
    pub responsivity: f64,
}

impl Default for RxSection {
    fn default() -> Self {
        Self {
            height: 0.8,
            fov_deg: 85.0,
            area_m2: 1e-4,
            count: 2,
            spacing: 0.1,
            responsivity: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    /// One of: dco, aco, flip, ndc, indc (i-ndc), cindc (ci-ndc).
    pub kind: String,
    pub subcarriers: usize,
    /// QAM order: 4, 16, 64, 128, 256 or 1024.
    pub order: usize,
    /// DC bias in dB (DCO only).
    pub bias_db: f64,
    /// Parallel OFDM blocks for the stream schemes: 1 or 2.
    pub parallel_blocks: usize,
    pub code: CodeSection,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kind: "ndc".into(),
            subcarriers: 64,
            order: 16,
            bias_db: 7.0,
            parallel_blocks: 1,
            code: CodeSection::default(),
        }
    }
}

/// LDPC code for the coded index scheme.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeSection {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Feed the decoder hard pair decisions instead of soft metrics.
    pub hard_input: bool,
}

impl Default for CodeSection {
    fn default() -> Self {
        let d = CodeParams::default();
        Self {
            n: d.n,
            k: d.k,
            seed: d.seed,
            max_iterations: d.max_iterations,
            hard_input: d.hard_input,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// SNR points in dB.
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub min_errors: u64,
    pub max_uses: u64,
    pub genie_index: bool,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    /// When set, sweep the LED spacing over these values (metres) at each
    /// SNR point instead of a plain SNR sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_tx: Option<Vec<f64>>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            snr_db: Vec::new(),
            seed: 1,
            min_errors: 200,
            max_uses: 100_000_000,
            genie_index: false,
            workers: 0,
            d_tx: None,
        }
    }
}

/// Metadata block written into manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub output: String,
    pub elapsed_s: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            tool: String::new(),
            version: String::new(),
            created_unix: 0,
            output: String::new(),
            elapsed_s: 0.0,
        }
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn geometry(&self) -> GeometryParams {
        GeometryParams {
            room: Vec3::new(self.room.x, self.room.y, self.room.z),
            tx_height: self.transmitter.height,
            phi_half_deg: self.transmitter.half_power_deg,
            n_leds: self.transmitter.count,
            d_tx: self.transmitter.spacing,
            rx_height: self.receiver.height,
            fov_deg: self.receiver.fov_deg,
            area_m2: self.receiver.area_m2,
            n_pds: self.receiver.count,
            d_rx: self.receiver.spacing,
            responsivity: self.receiver.responsivity,
        }
    }

    pub fn to_sim(&self) -> Result<SimConfig, String> {
        let kind = SchemeKind::parse(&self.scheme.kind)
            .ok_or_else(|| format!("unknown scheme '{}' in [scheme] kind", self.scheme.kind))?;
        let mut scheme = SchemeConfig::new(kind);
        scheme.n_subcarriers = self.scheme.subcarriers;
        scheme.order = self.scheme.order;
        scheme.bias_db = self.scheme.bias_db;
        scheme.parallel_blocks = self.scheme.parallel_blocks;
        scheme.code = CodeParams {
            n: self.scheme.code.n,
            k: self.scheme.code.k,
            seed: self.scheme.code.seed,
            max_iterations: self.scheme.code.max_iterations,
            hard_input: self.scheme.code.hard_input,
        };
        let mut cfg = SimConfig::new(scheme);
        cfg.geometry = self.geometry();
        cfg.snr_db = self.sim.snr_db.clone();
        cfg.seed = self.sim.seed;
        cfg.min_errors = self.sim.min_errors;
        cfg.max_uses = self.sim.max_uses;
        cfg.genie_index = self.sim.genie_index;
        Ok(cfg)
    }
}

/// Parses an SNR grid given as `start:step:stop` (inclusive) or a single
/// value.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>, String> {
    let bad = |m: &str| format!("--snr '{text}': {m}");
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
                return Err(bad("values must be finite"));
            }
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            let n = ((stop - start) / step).round() as usize;
            if n > 10_000 {
                return Err(bad("grid has more than 10000 points"));
            }
            let mut grid: Vec<f64> = (0..=n)
                .map(|i| start + step * i as f64)
                .filter(|v| *v <= stop + 1e-9)
                .collect();
            if grid.last().copied().unwrap_or(f64::NAN) < stop - 1e-9 {
                grid.push(stop);
            }
            Ok(grid)
        }
        _ => Err(bad("expected start:step:stop or a single value")),
    }
}
