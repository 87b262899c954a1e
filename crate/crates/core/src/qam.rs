//! Gray-coded QAM constellations with unit average energy.
//!
//! Square orders (4, 16, 64, 256, 1024) use an independent Gray code per
//! dimension: the label's first half selects the in-phase level, the second
//! half the quadrature level, most significant bit first. Gray index 0 maps
//! to the most positive level, so the all-zeros label is the top-right
//! corner point (for 4-QAM, bits `00 -> (+1 + j)/sqrt 2`).
//!
//! Order 128 is the cross constellation obtained by folding a 16 x 8
//! Gray-coded rectangle: the four outer columns (|I| > 11 on the odd-integer
//! grid) move into wings above and below the 12 x 8 core, producing the
//! classic 12 x 12 cross with the four 2 x 2 corners removed. The fold keeps
//! the labelling quasi-Gray; its mean energy on the integer grid is exactly
//! 82, so the unit-energy scale is `1/sqrt(82)`.
//!
//! Hard demapping returns the nearest constellation point in Euclidean
//! distance; exact ties resolve to the smallest label value.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QamError {
    #[error("unsupported QAM order {0}; expected 4, 16, 64, 128, 256 or 1024")]
    UnsupportedOrder(usize),
    #[error("bit count {0} is not a multiple of {1}")]
    RaggedBits(usize, usize),
}

fn gray_encode(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Layout {
    /// `side x side` Gray grid; stores the per-dimension level count.
    Square { side: usize },
    Cross128,
}

#[derive(Debug, Clone)]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: usize,
    layout: Layout,
    scale: f64,
    /// Point for each label value.
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self, QamError> {
        match order {
            4 | 16 | 64 | 256 | 1024 => Ok(Self::square(order)),
            128 => Ok(Self::cross128()),
            other => Err(QamError::UnsupportedOrder(other)),
        }
    }

    fn square(order: usize) -> Self {
        let bits = order.trailing_zeros() as usize;
        let side = 1usize << (bits / 2);
        // mean energy of the odd-integer grid: 2 * (side^2 - 1) / 3 per point
        let mean_energy = 2.0 * ((side * side - 1) as f64) / 3.0;
        let scale = mean_energy.sqrt().recip();
        let points = (0..order)
            .map(|label| {
                let gi = label >> (bits / 2);
                let gq = label & (side - 1);
                let i = gray_decode(gi);
                let q = gray_decode(gq);
                Complex64::new(level(i, side) * scale, level(q, side) * scale)
            })
            .collect();
        Self { order, bits_per_symbol: bits, layout: Layout::Square { side }, scale, points }
    }

    fn cross128() -> Self {
        let scale = 82f64.sqrt().recip();
        let points = (0..128)
            .map(|label| {
                let (a, b) = cross_point(label);
                Complex64::new(a as f64 * scale, b as f64 * scale)
            })
            .collect();
        Self { order: 128, bits_per_symbol: 7, layout: Layout::Cross128, scale, points }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Maps `bits` (MSB first within each symbol) to constellation points.
    pub fn map_bits(&self, bits: &[bool]) -> Result<Vec<Complex64>, QamError> {
        if bits.len() % self.bits_per_symbol != 0 {
            return Err(QamError::RaggedBits(bits.len(), self.bits_per_symbol));
        }
        Ok(bits
            .chunks(self.bits_per_symbol)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[label]
            })
            .collect())
    }

    /// Label of the constellation point nearest to `sym`; ties go to the
    /// smallest label.
    pub fn demap_hard(&self, sym: Complex64) -> usize {
        match self.layout {
            Layout::Square { side } => {
                let half = self.bits_per_symbol / 2;
                let i = self.nearest_level(sym.re, side);
                let q = self.nearest_level(sym.im, side);
                (gray_encode(i) << half) | gray_encode(q)
            }
            Layout::Cross128 => {
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for (label, p) in self.points.iter().enumerate() {
                    let d = (sym - p).norm_sqr();
                    if d < best_d {
                        best_d = d;
                        best = label;
                    }
                }
                best
            }
        }
    }

    /// Appends the demapped bits of each symbol to `out`.
    pub fn demap_bits(&self, syms: &[Complex64], out: &mut Vec<bool>) {
        for &s in syms {
            let label = self.demap_hard(s);
            for k in (0..self.bits_per_symbol).rev() {
                out.push((label >> k) & 1 == 1);
            }
        }
    }

    /// Nearest level index along one dimension. On an exact midpoint the
    /// candidate with the smaller Gray label wins, which keeps the combined
    /// label lexicographically minimal.
    fn nearest_level(&self, u: f64, side: usize) -> usize {
        let t = ((side - 1) as f64 - u / self.scale) / 2.0;
        let lo = (t.floor() as i64).clamp(0, side as i64 - 1) as usize;
        let hi = (lo + 1).min(side - 1);
        let d_lo = (u - level(lo, side) * self.scale).abs();
        let d_hi = (u - level(hi, side) * self.scale).abs();
        if d_hi < d_lo || (d_hi == d_lo && gray_encode(hi) < gray_encode(lo)) {
            hi
        } else {
            lo
        }
    }
}

/// Odd-integer level for index `i` in a `side`-level dimension; index 0 is
/// the most positive level.
fn level(i: usize, side: usize) -> f64 {
    (side as i64 - 1 - 2 * i as i64) as f64
}

/// Integer-grid coordinates of cross-128 label `label` before scaling.
fn cross_point(label: usize) -> (i64, i64) {
    let gi = label >> 3;
    let gq = label & 7;
    let u = 15 - 2 * gray_decode(gi) as i64;
    let v = 7 - 2 * gray_decode(gq) as i64;
    if u.abs() <= 11 {
        (u, v)
    } else {
        // fold the outer columns into wings above/below the core
        (v, u.signum() * (24 - u.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn bits_of(label: usize, width: usize) -> Vec<bool> {
        (0..width).rev().map(|k| (label >> k) & 1 == 1).collect()
    }

    #[test]
    fn orders_and_bit_widths() {
        for (order, bits) in [(4, 2), (16, 4), (64, 6), (128, 7), (256, 8), (1024, 10)] {
            let c = QamConstellation::new(order).unwrap();
            assert_eq!(c.bits_per_symbol(), bits);
            assert_eq!(c.points().len(), order);
        }
        assert!(QamConstellation::new(32).is_err());
        assert!(QamConstellation::new(0).is_err());
    }

    #[test]
    fn unit_average_energy() {
        for order in [4, 16, 64, 128, 256, 1024] {
            let c = QamConstellation::new(order).unwrap();
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            assert!((e - 1.0).abs() < 1e-12, "order {order}: energy {e}");
        }
    }

    #[test]
    fn all_points_distinct() {
        for order in [4, 16, 64, 128, 256, 1024] {
            let c = QamConstellation::new(order).unwrap();
            let mut seen = HashSet::new();
            for p in c.points() {
                assert!(seen.insert((p.re.to_bits(), p.im.to_bits())), "order {order}");
            }
        }
    }

    #[test]
    fn qpsk_reference_mapping() {
        let c = QamConstellation::new(4).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            (false, false, s, s),
            (false, true, s, -s),
            (true, false, -s, s),
            (true, true, -s, -s),
        ];
        for (b0, b1, re, im) in expect {
            let p = c.map_bits(&[b0, b1]).unwrap()[0];
            assert!((p.re - re).abs() < 1e-15 && (p.im - im).abs() < 1e-15);
        }
    }

    #[test]
    fn gray_adjacency_square() {
        // Horizontally or vertically adjacent points differ in exactly one bit.
        for order in [16usize, 64, 256, 1024] {
            let c = QamConstellation::new(order).unwrap();
            let side = (order as f64).sqrt() as usize;
            let min_gap = 2.0 * c.scale;
            let mut checked = 0;
            for a in 0..order {
                for b in (a + 1)..order {
                    let d = (c.point(a) - c.point(b)).norm();
                    if (d - min_gap).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "order {order}: {a:0w$b} {b:0w$b}", w = c.bits_per_symbol());
                        checked += 1;
                    }
                }
            }
            assert_eq!(checked, 2 * side * (side - 1));
        }
    }

    #[test]
    fn map_demap_roundtrip_all_orders() {
        for order in [4, 16, 64, 128, 256, 1024] {
            let c = QamConstellation::new(order).unwrap();
            for label in 0..order {
                assert_eq!(c.demap_hard(c.point(label)), label, "order {order}");
                let bits = bits_of(label, c.bits_per_symbol());
                let sym = c.map_bits(&bits).unwrap();
                let mut back = Vec::new();
                c.demap_bits(&sym, &mut back);
                assert_eq!(back, bits);
            }
        }
    }

    #[test]
    fn demap_survives_small_noise() {
        // Perturbations below half the minimum distance never change the label.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for order in [16, 128, 1024] {
            let c = QamConstellation::new(order).unwrap();
            let safe = 0.9 * c.scale; // half min distance = scale
            for label in 0..order {
                let p = c.point(label);
                for _ in 0..8 {
                    let (dx, dy) = (next(), next());
                    let norm = (dx * dx + dy * dy).sqrt().max(1e-9);
                    let shifted =
                        p + Complex64::new(dx / norm * safe * 0.99, dy / norm * safe * 0.99);
                    assert_eq!(c.demap_hard(shifted), label, "order {order} label {label}");
                }
            }
        }
    }

    /// Reference demapper: scan labels in ascending order, keep on strict
    /// improvement. Defines the tie-break the fast path must reproduce.
    fn demap_reference(c: &QamConstellation, sym: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in c.points().iter().enumerate() {
            let d = (sym - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    #[test]
    fn ties_resolve_to_smallest_label() {
        // The origin ties among the four innermost points; midpoints between
        // lattice neighbours tie pairwise. The fast per-dimension slicer must
        // agree with the ascending-label scan everywhere.
        for order in [4, 16, 64, 256, 1024] {
            let c = QamConstellation::new(order).unwrap();
            let origin = Complex64::new(0.0, 0.0);
            assert_eq!(c.demap_hard(origin), demap_reference(&c, origin), "order {order}");
            for label in 0..order {
                let p = c.point(label);
                for (dx, dy) in [(c.scale, 0.0), (0.0, -c.scale), (c.scale, c.scale)] {
                    let m = p + Complex64::new(dx, dy);
                    assert_eq!(c.demap_hard(m), demap_reference(&c, m), "order {order}");
                }
            }
        }
        // 4-QAM: all-zero bits map to (+1+j)/sqrt2, and the origin returns it
        let c = QamConstellation::new(4).unwrap();
        assert_eq!(c.demap_hard(Complex64::new(0.0, 0.0)), 0);
    }

    #[test]
    fn demap_clamps_out_of_grid_symbols() {
        let c = QamConstellation::new(16).unwrap();
        // far beyond the grid corner
        let label = c.demap_hard(Complex64::new(100.0, 100.0));
        let p = c.point(label);
        assert!(p.re > 0.0 && p.im > 0.0);
        assert_eq!(label, 0); // Gray index 0 is the most positive level
    }

    #[test]
    fn cross128_shape() {
        let c = QamConstellation::new(128).unwrap();
        let s = 82f64.sqrt();
        let grid: HashSet<(i64, i64)> = c
            .points()
            .iter()
            .map(|p| ((p.re * s).round() as i64, (p.im * s).round() as i64))
            .collect();
        assert_eq!(grid.len(), 128);
        for &(a, b) in &grid {
            assert!(a.abs() <= 11 && b.abs() <= 11, "({a},{b}) outside cross");
            assert!(a.rem_euclid(2) == 1 && b.rem_euclid(2) == 1);
            assert!(!(a.abs() > 7 && b.abs() > 7), "corner point ({a},{b})");
        }
        // integer-grid mean energy is exactly 82
        let e: i64 = grid.iter().map(|&(a, b)| a * a + b * b).sum();
        assert_eq!(e, 82 * 128);
    }

    #[test]
    fn cross128_core_is_gray() {
        // Within the unfolded 12 x 8 core, lattice neighbours differ in one bit.
        let c = QamConstellation::new(128).unwrap();
        let s = 82f64.sqrt();
        let lookup: std::collections::HashMap<(i64, i64), usize> = c
            .points()
            .iter()
            .enumerate()
            .map(|(l, p)| (((p.re * s).round() as i64, (p.im * s).round() as i64), l))
            .collect();
        for a in (-11..=11).step_by(2) {
            for b in (-7..=7).step_by(2) {
                let here = lookup[&(a, b)];
                if a + 2 <= 11 {
                    let right = lookup[&(a + 2, b)];
                    assert_eq!((here ^ right).count_ones(), 1);
                }
                if b + 2 <= 7 {
                    let up = lookup[&(a, b + 2)];
                    assert_eq!((here ^ up).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn ragged_bit_slices_rejected() {
        let c = QamConstellation::new(16).unwrap();
        assert!(matches!(c.map_bits(&[true; 7]), Err(QamError::RaggedBits(7, 4))));
    }
}
