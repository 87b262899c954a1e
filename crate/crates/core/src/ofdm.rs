//! Hermitian-symmetric subcarrier framing and real-valued OFDM transforms.
//!
//! A frame of `N` subcarriers carries complex data symbols arranged so the
//! inverse transform is real:
//!
//! * full layout: bins `1..N/2-1` hold the `N/2 - 1` data symbols, bins `0`
//!   and `N/2` are zero, and bins `N/2+1..N` mirror the data conjugated in
//!   reverse order;
//! * odd-only layout: the `N/4` data symbols occupy odd bins `1, 3, ...,
//!   N/2 - 1`, every even bin is zero, and the upper half mirrors as above.
//!
//! Transforms follow the convention of an unscaled forward FFT and a `1/N`
//! scaled inverse, so `fft(ifft(X)) == X`. No cyclic prefix is used: the
//! channel is frequency-flat, each time sample is one channel use.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OfdmError {
    #[error("subcarrier count {0} must be a multiple of 4, at least 8")]
    BadSize(usize),
    #[error("expected {expected} data symbols for N = {n}, got {got}")]
    BadSymbolCount { n: usize, expected: usize, got: usize },
    #[error("frame of length {got} does not match the {expected}-point plan")]
    SizeMismatch { expected: usize, got: usize },
    #[error("frame violates Hermitian structure at bin {bin}")]
    NotHermitian { bin: usize },
    #[error("inverse transform produced imaginary residue {residue:.3e} (limit {limit:.3e})")]
    ImaginaryResidue { residue: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameLayout {
    Full,
    OddOnly,
}

/// One OFDM frame in the frequency domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierFrame {
    values: Vec<Complex64>,
    layout: FrameLayout,
}

fn check_size(n: usize) -> Result<(), OfdmError> {
    if n < 8 || n % 4 != 0 {
        return Err(OfdmError::BadSize(n));
    }
    Ok(())
}

impl SubcarrierFrame {
    /// Builds a full-layout frame of size `n` from `n/2 - 1` data symbols.
    pub fn full(n: usize, symbols: &[Complex64]) -> Result<Self, OfdmError> {
        check_size(n)?;
        if symbols.len() != n / 2 - 1 {
            return Err(OfdmError::BadSymbolCount { n, expected: n / 2 - 1, got: symbols.len() });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for (k, &s) in symbols.iter().enumerate() {
            values[k + 1] = s;
            values[n - 1 - k] = s.conj();
        }
        Ok(Self { values, layout: FrameLayout::Full })
    }

    /// Builds an odd-only frame of size `n` from `n/4` data symbols placed
    /// on bins `1, 3, ..., n/2 - 1`.
    pub fn odd_only(n: usize, symbols: &[Complex64]) -> Result<Self, OfdmError> {
        check_size(n)?;
        if symbols.len() != n / 4 {
            return Err(OfdmError::BadSymbolCount { n, expected: n / 4, got: symbols.len() });
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        for (idx, &s) in symbols.iter().enumerate() {
            let k = 2 * idx + 1;
            values[k] = s;
            values[n - k] = s.conj();
        }
        Ok(Self { values, layout: FrameLayout::OddOnly })
    }

    /// Wraps a measured spectrum (e.g. the transform of a noisy signal)
    /// without structural checks.
    pub fn raw(values: Vec<Complex64>) -> Self {
        Self { values, layout: FrameLayout::Full }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Data symbols of a full-layout frame: bins `1..n/2 - 1`.
    pub fn full_data(&self) -> &[Complex64] {
        &self.values[1..self.n() / 2]
    }

    /// Data symbols of an odd-only frame: every odd bin below `n/2`.
    pub fn odd_data(&self) -> Vec<Complex64> {
        (0..self.n() / 4).map(|idx| self.values[2 * idx + 1]).collect()
    }

    /// Verifies the Hermitian structure within `tol` (absolute, per bin).
    pub fn validate(&self, tol: f64) -> Result<(), OfdmError> {
        let n = self.n();
        check_size(n)?;
        let near = |a: Complex64, b: Complex64| (a - b).norm() <= tol;
        let zero = Complex64::new(0.0, 0.0);
        if !near(self.values[0], zero) {
            return Err(OfdmError::NotHermitian { bin: 0 });
        }
        if !near(self.values[n / 2], zero) {
            return Err(OfdmError::NotHermitian { bin: n / 2 });
        }
        for k in 1..n / 2 {
            if !near(self.values[n - k], self.values[k].conj()) {
                return Err(OfdmError::NotHermitian { bin: n - k });
            }
            if self.layout == FrameLayout::OddOnly && k % 2 == 0 && !near(self.values[k], zero) {
                return Err(OfdmError::NotHermitian { bin: k });
            }
        }
        Ok(())
    }
}

/// Cached transform plans for one frame size.
pub struct OfdmPlan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for OfdmPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfdmPlan").field("n", &self.n).finish()
    }
}

impl OfdmPlan {
    pub fn new(n: usize) -> Result<Self, OfdmError> {
        check_size(n)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Inverse transform of a Hermitian frame to a real signal.
    ///
    /// The frame structure is validated first; the imaginary part left over
    /// by floating-point arithmetic must stay below `1e-9` times the peak
    /// signal magnitude before it is discarded.
    pub fn ifft_real(&self, frame: &SubcarrierFrame) -> Result<Vec<f64>, OfdmError> {
        if frame.n() != self.n {
            return Err(OfdmError::SizeMismatch { expected: self.n, got: frame.n() });
        }
        frame.validate(0.0)?;
        let mut buf = frame.values.clone();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        let mut peak = 0.0f64;
        let mut residue = 0.0f64;
        for v in &buf {
            peak = peak.max((v.re * scale).abs());
            residue = residue.max((v.im * scale).abs());
        }
        let limit = 1e-9 * peak.max(f64::MIN_POSITIVE);
        if residue > limit {
            return Err(OfdmError::ImaginaryResidue { residue, limit });
        }
        Ok(buf.iter().map(|v| v.re * scale).collect())
    }

    /// Unscaled forward transform of a real signal; inverse of `ifft_real`.
    pub fn fft(&self, signal: &[f64]) -> Result<SubcarrierFrame, OfdmError> {
        if signal.len() != self.n {
            return Err(OfdmError::SizeMismatch { expected: self.n, got: signal.len() });
        }
        let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        Ok(SubcarrierFrame::raw(buf))
    }
}

/// Mean square value of a signal.
pub fn mean_sq(signal: &[f64]) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    signal.iter().map(|x| x * x).sum::<f64>() / signal.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Textbook O(N^2) DFT used as an independent oracle.
    fn dft(signal: &[f64]) -> Vec<Complex64> {
        let n = signal.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|t| {
                        let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                        c(signal[t] * ang.cos(), signal[t] * ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn full_frame_layout() {
        let syms = [c(1.0, 2.0), c(-3.0, 0.5), c(0.25, -1.0)];
        let f = SubcarrierFrame::full(8, &syms).unwrap();
        let v = f.values();
        assert_eq!(v[0], c(0.0, 0.0));
        assert_eq!(v[4], c(0.0, 0.0));
        assert_eq!(&v[1..4], &syms);
        assert_eq!(v[5], syms[2].conj());
        assert_eq!(v[6], syms[1].conj());
        assert_eq!(v[7], syms[0].conj());
        f.validate(0.0).unwrap();
        assert_eq!(f.full_data(), &syms);
    }

    #[test]
    fn odd_frame_layout() {
        let syms = [c(1.0, 1.0), c(2.0, -2.0)];
        let f = SubcarrierFrame::odd_only(8, &syms).unwrap();
        let v = f.values();
        assert_eq!(v[1], syms[0]);
        assert_eq!(v[3], syms[1]);
        assert_eq!(v[5], syms[1].conj());
        assert_eq!(v[7], syms[0].conj());
        for k in [0, 2, 4, 6] {
            assert_eq!(v[k], c(0.0, 0.0));
        }
        f.validate(0.0).unwrap();
        assert_eq!(f.odd_data(), syms);
    }

    #[test]
    fn size_and_count_validation() {
        assert_eq!(OfdmPlan::new(6).unwrap_err(), OfdmError::BadSize(6));
        assert_eq!(OfdmPlan::new(4).unwrap_err(), OfdmError::BadSize(4));
        assert!(OfdmPlan::new(8).is_ok());
        assert!(SubcarrierFrame::full(8, &[c(1.0, 0.0)]).is_err());
        assert!(SubcarrierFrame::odd_only(8, &[c(1.0, 0.0); 3]).is_err());
        assert!(SubcarrierFrame::full(10, &[c(1.0, 0.0); 4]).is_err());
    }

    #[test]
    fn single_tone_closed_form() {
        // X_1 = 1 on N = 8 gives x(t) = (2/8) cos(2 pi t / 8)
        let f = SubcarrierFrame::full(8, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let x = OfdmPlan::new(8).unwrap().ifft_real(&f).unwrap();
        for (t, &xt) in x.iter().enumerate() {
            let want = 0.25 * (2.0 * std::f64::consts::PI * t as f64 / 8.0).cos();
            assert!((xt - want).abs() < 1e-15, "t = {t}: {xt} vs {want}");
        }
    }

    #[test]
    fn forward_matches_naive_dft() {
        let plan = OfdmPlan::new(64).unwrap();
        let mut state = 0x9E3779B97F4A7C15u64;
        let signal: Vec<f64> = (0..64)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let fast = plan.fft(&signal).unwrap();
        let slow = dft(&signal);
        for (a, b) in fast.values().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn transform_roundtrip() {
        let plan = OfdmPlan::new(64).unwrap();
        let syms: Vec<Complex64> =
            (0..31).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let frame = SubcarrierFrame::full(64, &syms).unwrap();
        let x = plan.ifft_real(&frame).unwrap();
        let back = plan.fft(&x).unwrap();
        for (a, b) in back.values().iter().zip(frame.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_frames_transform_to_real_signals() {
        // direct check that validation + residue guard accept real cases
        let plan = OfdmPlan::new(32).unwrap();
        let syms: Vec<Complex64> = (0..15).map(|k| c(1.0 - k as f64 * 0.1, k as f64)).collect();
        let frame = SubcarrierFrame::full(32, &syms).unwrap();
        assert!(plan.ifft_real(&frame).is_ok());
        let odd = SubcarrierFrame::odd_only(32, &syms[..8]).unwrap();
        assert!(plan.ifft_real(&odd).is_ok());
    }

    #[test]
    fn corrupted_frames_rejected() {
        let plan = OfdmPlan::new(8).unwrap();
        let mut vals = SubcarrierFrame::full(8, &[c(1.0, 0.0); 3]).unwrap().values().to_vec();
        vals[5] = c(9.0, 9.0); // breaks conjugate symmetry
        let broken = SubcarrierFrame::raw(vals);
        assert!(matches!(plan.ifft_real(&broken), Err(OfdmError::NotHermitian { bin: 5 })));
        let dc = SubcarrierFrame::raw(vec![c(1.0, 0.0); 8]);
        assert!(matches!(plan.ifft_real(&dc), Err(OfdmError::NotHermitian { bin: 0 })));
    }

    #[test]
    fn frame_energy_identity() {
        // sum x^2 = (1/N) sum |X|^2 under this normalization
        let plan = OfdmPlan::new(64).unwrap();
        let syms: Vec<Complex64> = (0..31).map(|k| c((k as f64 * 0.3).sin(), 0.4)).collect();
        let frame = SubcarrierFrame::full(64, &syms).unwrap();
        let x = plan.ifft_real(&frame).unwrap();
        let lhs: f64 = x.iter().map(|v| v * v).sum();
        let rhs: f64 = frame.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / 64.0;
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
        // unit-modulus symbols on the full layout give mean square (N-2)/N^2
        let unit = vec![c(1.0, 0.0); 31];
        let frame = SubcarrierFrame::full(64, &unit).unwrap();
        let x = plan.ifft_real(&frame).unwrap();
        assert!((mean_sq(&x) - 62.0 / 4096.0).abs() < 1e-15);
    }
}
