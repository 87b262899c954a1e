//! Coded index modulation over two LED pairs.
//!
//! The index stream of [`Indc`](super::indc) is protected by a rate-1/2
//! LDPC code: one codeword spans a superframe of consecutive OFDM frames
//! (1024 uses for the default 1008-bit code and 64 subcarriers; trailing
//! uses pad with index bit 0). The receiver forms a soft metric per use
//! from the two matched-filter pairs,
//!
//! ```text
//! LLR(u) = (m0^2 - m1^2) / sigma_z^2,   m_b = max over pair b of |z|
//! ```
//!
//! with `sigma_z^2` the noise variance on the strongest column's matched
//! filter, runs sum-product decoding, then re-detects every use restricted
//! to the pair the decoded codeword dictates before demodulating. A
//! hard-input ablation replaces the soft metric with fixed-magnitude LLRs.

use super::{
    DecodeStats, ModChain, Payload, PayloadShape, RequiredLeds, RxContext, RxOutput,
    SampleMatrix, SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ldpc::{decode_sum_product, DecodeOptions, LdpcCode};
use crate::ofdm::FrameLayout;

/// LLR magnitude assigned to hard pair decisions in the ablation mode.
const HARD_LLR: f64 = 2.0;

#[derive(Debug)]
pub(super) struct Cindc {
    chain: ModChain,
    code: LdpcCode,
    opts: DecodeOptions,
    hard_input: bool,
    /// OFDM frames per superframe, `ceil(code.n / chain.n)`.
    frames: usize,
}

impl Cindc {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        if c.n_pairs != 2 {
            return Err(SchemeError::BadConfig(format!(
                "index modulation is implemented for exactly 2 LED pairs, got {}",
                c.n_pairs
            )));
        }
        if c.code.max_iterations == 0 {
            return Err(SchemeError::BadConfig(
                "decoder needs at least one iteration".into(),
            ));
        }
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::Full)?;
        let code = LdpcCode::new_rate_half(c.code.n, c.code.k, c.code.seed)?;
        let opts = DecodeOptions { max_iterations: c.code.max_iterations, ..Default::default() };
        let frames = (code.n() + chain.n() - 1) / chain.n();
        Ok(Self { chain, code, opts, hard_input: c.code.hard_input, frames })
    }
}

impl SchemeImpl for Cindc {
    fn payload_shape(&self) -> PayloadShape {
        PayloadShape {
            modulation_bits: self.frames * self.chain.bits_per_frame(),
            index_bits: self.code.k(),
        }
    }

    fn uses_per_frame(&self) -> usize {
        self.frames * self.chain.n()
    }

    fn required_leds(&self) -> RequiredLeds {
        RequiredLeds::Exact(4)
    }

    fn rate(&self) -> f64 {
        self.code.rate() + self.chain.bits_per_frame() as f64 / self.chain.n() as f64
    }

    fn sigma_x(&self) -> f64 {
        // Same duty accounting as the uncoded four-LED scheme: one of four
        // LEDs fires per use, half the mean power of the one-in-two reference.
        self.chain.sigma_x / 2f64.sqrt()
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let per_frame = self.chain.bits_per_frame();
        let coded = self.code.encode(&payload.index)?;
        let mut intensity = SampleMatrix::zeros(self.frames * n, n_t);
        for f in 0..self.frames {
            let x = self.chain.modulate(&payload.modulation[f * per_frame..(f + 1) * per_frame])?;
            for (t, &xt) in x.iter().enumerate() {
                let u = f * n + t;
                let pair = coded.get(u).copied().unwrap_or(false) as usize;
                intensity.set(u, 2 * pair + (xt < 0.0) as usize, xt.abs());
            }
        }
        Ok(TxFrame { intensity, index_stream: coded })
    }

    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        let det = ctx.ops.detector()?;
        let sigma = ctx.ops.sigma;
        let n = self.chain.n();
        let uses = self.frames * n;
        let n_coded = self.code.n();
        if let Some(genie) = ctx.genie_index {
            if genie.len() != n_coded {
                return Err(SchemeError::GenieSize { expected: n_coded, got: genie.len() });
            }
        }

        // First pass: matched-filter every use, keep the projections around
        // for re-detection, and build the decoder input.
        let n_cols = det.n_columns();
        let mut z_all = vec![0.0f64; uses * n_cols];
        let mut llrs = Vec::with_capacity(n_coded);
        let mut index_raw = Vec::with_capacity(n_coded);
        for u in 0..uses {
            let z = &mut z_all[u * n_cols..(u + 1) * n_cols];
            det.project_into(y.row(u), z);
            if u >= n_coded {
                continue;
            }
            let m0 = z[0].abs().max(z[1].abs());
            let m1 = z[2].abs().max(z[3].abs());
            let hard_one = m1 > m0;
            index_raw.push(hard_one);
            let llr = if self.hard_input {
                if hard_one { -HARD_LLR } else { HARD_LLR }
            } else if sigma == 0.0 {
                if hard_one { -self.opts.clamp } else { self.opts.clamp }
            } else {
                let strongest = det.decide_among(z, 0..n_cols).column;
                let sigma_z_sq = sigma * sigma * det.noise_gain(strongest);
                ((m0 * m0 - m1 * m1) / sigma_z_sq).clamp(-self.opts.clamp, self.opts.clamp)
            };
            llrs.push(llr);
        }

        let (coded_hat, decode) = match ctx.genie_index {
            Some(genie) => {
                index_raw.copy_from_slice(genie);
                (genie.to_vec(), None)
            }
            None => {
                let out = decode_sum_product(&self.code, &llrs, &self.opts);
                (out.codeword, Some(DecodeStats { converged: out.converged, iterations: out.iterations }))
            }
        };
        let index_info = self.code.extract_info(&coded_hat);

        // Second pass: the decoded codeword pins down the pair for every
        // use, so re-detect within that pair only.
        let mut x_hat = vec![0.0f64; uses];
        for u in 0..uses {
            let pair = coded_hat.get(u).copied().unwrap_or(false) as usize;
            let z = &z_all[u * n_cols..(u + 1) * n_cols];
            x_hat[u] = det.decide_among(z, 2 * pair..2 * pair + 2).amplitude;
        }
        let mut modulation = Vec::with_capacity(self.frames * self.chain.bits_per_frame());
        for f in 0..self.frames {
            self.chain.demodulate(&x_hat[f * n..(f + 1) * n], &mut modulation)?;
        }
        Ok(RxOutput { modulation, index_raw, index_info, decode })
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{default_link, loopback, propagate};
    use super::super::{Payload, RxContext, SchemeConfig, SchemeKind, Transceiver};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SchemeConfig {
        let mut c = SchemeConfig::new(SchemeKind::Cindc);
        c.order = 128;
        c
    }

    #[test]
    fn noiseless_loopback_converges_immediately() {
        let c = cfg();
        let (payload, rx) = loopback(&c, 4, 42);
        assert_eq!(rx.modulation, payload.modulation);
        assert_eq!(rx.index_info, payload.index);
        let stats = rx.decode.expect("decoder ran");
        assert!(stats.converged);
        // Clean hard decisions already satisfy every parity check.
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn superframe_covers_codeword_with_padding() {
        let c = cfg();
        let t = Transceiver::new(&c).unwrap();
        assert_eq!(t.uses_per_frame(), 1024);
        let shape = t.payload_shape();
        assert_eq!(shape.index_bits, 504);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let payload = t.random_payload(&mut rng);
        let tx = t.transmit(&payload, 4).unwrap();
        assert_eq!(tx.index_stream.len(), 1008);
        // The 16 trailing uses carry no codeword bit and fall back to the
        // first pair.
        for u in 1008..1024 {
            assert_eq!(tx.intensity.get(u, 2), 0.0, "use {u}");
            assert_eq!(tx.intensity.get(u, 3), 0.0, "use {u}");
        }
    }

    #[test]
    fn all_zero_info_stays_on_first_pair() {
        // The code is linear, so the all-zero message encodes to the
        // all-zero codeword and the second pair never fires.
        let c = cfg();
        let t = Transceiver::new(&c).unwrap();
        let shape = t.payload_shape();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let payload = Payload {
            modulation: (0..shape.modulation_bits).map(|_| rng.gen()).collect(),
            index: vec![false; shape.index_bits],
        };
        let tx = t.transmit(&payload, 4).unwrap();
        assert!(tx.index_stream.iter().all(|&b| !b));
        for u in 0..tx.intensity.n_rows() {
            assert_eq!(tx.intensity.get(u, 2), 0.0, "use {u}");
            assert_eq!(tx.intensity.get(u, 3), 0.0, "use {u}");
        }
    }

    #[test]
    fn hard_input_mode_loopback() {
        let mut c = cfg();
        c.code.hard_input = true;
        let (payload, rx) = loopback(&c, 4, 8);
        assert_eq!(rx.modulation, payload.modulation);
        assert_eq!(rx.index_info, payload.index);
    }

    #[test]
    fn genie_bypasses_the_decoder() {
        let c = cfg();
        let t = Transceiver::new(&c).unwrap();
        let ops = default_link(&t, 4, 4, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let payload = t.random_payload(&mut rng);
        let tx = t.transmit(&payload, 4).unwrap();
        let y = propagate(&ops, &tx.intensity);
        let ctx = RxContext { ops: &ops, genie_index: Some(&tx.index_stream) };
        let rx = t.receive(&y, &ctx).unwrap();
        assert!(rx.decode.is_none());
        assert_eq!(rx.index_raw, tx.index_stream);
        assert_eq!(rx.index_info, payload.index);
        assert_eq!(rx.modulation, payload.modulation);
    }
}
