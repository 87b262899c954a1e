//! Zero-forcing receivers: a full pseudo-inverse equalizer for parallel
//! streams and a per-column projector for spatial-modulation detection.

use thiserror::Error;

use crate::channel::ChannelMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("channel matrix is singular (normal-equation pivot {0:.3e})")]
    Singular(f64),
    #[error("channel column {0} is identically zero")]
    ZeroColumn(usize),
    #[error("need at least as many detectors as LEDs for equalization ({rows} x {cols})")]
    Underdetermined { rows: usize, cols: usize },
}

/// Least-squares stream separator `x_hat = (H^T H)^-1 H^T y`.
#[derive(Debug, Clone)]
pub struct ZfEqualizer {
    n_rows: usize,
    n_cols: usize,
    /// Pseudo-inverse, `n_cols x n_rows` row-major.
    pinv: Vec<f64>,
}

impl ZfEqualizer {
    pub fn new(h: &ChannelMatrix) -> Result<Self, DetectError> {
        let (nr, nt) = (h.n_rows(), h.n_cols());
        if nr < nt {
            return Err(DetectError::Underdetermined { rows: nr, cols: nt });
        }
        // normal matrix G = H^T H
        let mut g = vec![0.0f64; nt * nt];
        for i in 0..nt {
            for j in 0..nt {
                g[i * nt + j] = (0..nr).map(|r| h.get(r, i) * h.get(r, j)).sum();
            }
        }
        let ginv = invert_spd(&g, nt)?;
        // pinv = G^-1 H^T
        let mut pinv = vec![0.0f64; nt * nr];
        for i in 0..nt {
            for r in 0..nr {
                pinv[i * nr + r] = (0..nt).map(|j| ginv[i * nt + j] * h.get(r, j)).sum();
            }
        }
        Ok(Self { n_rows: nr, n_cols: nt, pinv })
    }

    pub fn n_streams(&self) -> usize {
        self.n_cols
    }

    /// Writes the `n_cols` stream estimates for one received sample.
    pub fn equalize_into(&self, y: &[f64], x_hat: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n_rows);
        debug_assert_eq!(x_hat.len(), self.n_cols);
        for (i, out) in x_hat.iter_mut().enumerate() {
            let row = &self.pinv[i * self.n_rows..(i + 1) * self.n_rows];
            *out = row.iter().zip(y).map(|(p, yv)| p * yv).sum();
        }
    }
}

/// Gauss-Jordan inverse of a small symmetric positive-definite matrix with
/// partial pivoting; singularity is judged relative to the largest entry.
fn invert_spd(g: &[f64], n: usize) -> Result<Vec<f64>, DetectError> {
    let scale = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(DetectError::Singular(0.0));
    }
    let mut a = g.to_vec();
    let mut inv = vec![0.0f64; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a_r, &b_r| {
                a[a_r * n + col].abs().total_cmp(&a[b_r * n + col].abs())
            })
            .unwrap();
        let pivot = a[pivot_row * n + col];
        if pivot.abs() <= 1e-13 * scale {
            return Err(DetectError::Singular(pivot));
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
                inv.swap(col * n + j, pivot_row * n + j);
            }
        }
        let inv_pivot = 1.0 / a[col * n + col];
        for j in 0..n {
            a[col * n + j] *= inv_pivot;
            inv[col * n + j] *= inv_pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r * n + j] -= f * a[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    Ok(inv)
}

/// Outcome of spatial-modulation detection for one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmDecision {
    /// Winning column, 0-based.
    pub column: usize,
    /// `max_i |z_i|`.
    pub magnitude: f64,
    /// Signed amplitude estimate: `+magnitude` for even 0-based columns
    /// (first LED of a pair), `-magnitude` for odd ones.
    pub amplitude: f64,
}

/// Per-column zero-forcing projector: `z_i = h_i^T y / (h_i^T h_i)`.
#[derive(Debug, Clone)]
pub struct ZfDetector {
    n_rows: usize,
    n_cols: usize,
    /// Rows `h_i^T / ||h_i||^2`, column-major over `i`.
    proj: Vec<f64>,
    /// `1 / ||h_i||^2`: the ZF output noise variance per unit sigma^2.
    noise_gain: Vec<f64>,
}

impl ZfDetector {
    pub fn new(h: &ChannelMatrix) -> Result<Self, DetectError> {
        let (nr, nt) = (h.n_rows(), h.n_cols());
        let mut proj = vec![0.0f64; nt * nr];
        let mut noise_gain = vec![0.0f64; nt];
        for i in 0..nt {
            let norm_sq: f64 = (0..nr).map(|r| h.get(r, i) * h.get(r, i)).sum();
            if norm_sq <= f64::MIN_POSITIVE {
                return Err(DetectError::ZeroColumn(i));
            }
            noise_gain[i] = 1.0 / norm_sq;
            for r in 0..nr {
                proj[i * nr + r] = h.get(r, i) / norm_sq;
            }
        }
        Ok(Self { n_rows: nr, n_cols: nt, proj, noise_gain })
    }

    pub fn n_columns(&self) -> usize {
        self.n_cols
    }

    /// ZF output noise variance of column `i` per unit input variance.
    pub fn noise_gain(&self, i: usize) -> f64 {
        self.noise_gain[i]
    }

    /// Writes all column projections `z_i` for one received sample.
    pub fn project_into(&self, y: &[f64], z: &mut [f64]) {
        debug_assert_eq!(y.len(), self.n_rows);
        debug_assert_eq!(z.len(), self.n_cols);
        for (i, zi) in z.iter_mut().enumerate() {
            let row = &self.proj[i * self.n_rows..(i + 1) * self.n_rows];
            *zi = row.iter().zip(y).map(|(p, yv)| p * yv).sum();
        }
    }

    /// Argmax of `|z_i]` over `columns`; ties break to the smallest index.
    pub fn decide_among(&self, z: &[f64], columns: std::ops::Range<usize>) -> SmDecision {
        debug_assert!(!columns.is_empty() && columns.end <= self.n_cols);
        let mut column = columns.start;
        let mut magnitude = z[column].abs();
        for i in columns.skip(1) {
            let m = z[i].abs();
            if m > magnitude {
                magnitude = m;
                column = i;
            }
        }
        let amplitude = if column % 2 == 0 { magnitude } else { -magnitude };
        SmDecision { column, magnitude, amplitude }
    }

    /// Full detection: project and decide over all columns.
    pub fn detect(&self, y: &[f64], z: &mut [f64]) -> SmDecision {
        self.project_into(y, z);
        self.decide_among(z, 0..self.n_cols)
    }
}
