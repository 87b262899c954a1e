//! Link-level simulator for multiple-LED visible light communication.
//!
//! The crate models an indoor optical wireless downlink end to end: a
//! Lambertian line-of-sight MIMO channel between ceiling LEDs and table-top
//! photodetectors, Gray-coded QAM on Hermitian-symmetric OFDM frames, a set
//! of unipolar transmission schemes (DC-biased, asymmetrically clipped,
//! flipped, and non-DC-biased variants with spatial index modulation and an
//! optional LDPC-protected index stream), and a deterministic Monte Carlo
//! harness that estimates bit error rates over an AWGN-impaired link.
//!
//! Everything is reproducible: a master seed plus the operating point fully
//! determine every random draw, regardless of how many worker threads run
//! the trials.

pub mod channel;
pub mod ldpc;
pub mod ofdm;
pub mod qam;
mod rng_util;
pub mod schemes;
pub mod sim;

pub use channel::{build_channel, ChannelMatrix, Geometry, GeometryParams};
pub use schemes::{SchemeConfig, SchemeKind, Transceiver};
pub use sim::{run_point, run_sweep, run_sweep_with, sweep_dtx, BerPoint, SimConfig};
