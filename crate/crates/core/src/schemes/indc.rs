//! Index-modulated NDC over two LED pairs.
//!
//! Every channel use carries one extra uncoded bit by selecting which LED
//! pair fires: bit 0 keeps the polarity pair on LEDs {0, 1}, bit 1 moves it
//! to LEDs {2, 3}. The receiver takes the strongest of the four matched
//! filters; its pair recovers the index bit and its polarity the sample
//! sign. With the genie flag set the true index stream is handed to the
//! receiver, isolating the modulation error floor from index mistakes.

use super::{
    ModChain, Payload, PayloadShape, RequiredLeds, RxContext, RxOutput, SampleMatrix,
    SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ofdm::FrameLayout;

#[derive(Debug)]
pub(super) struct Indc {
    chain: ModChain,
}

impl Indc {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        if c.n_pairs != 2 {
            return Err(SchemeError::BadConfig(format!(
                "index modulation is implemented for exactly 2 LED pairs, got {}",
                c.n_pairs
            )));
        }
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::Full)?;
        Ok(Self { chain })
    }
}

impl SchemeImpl for Indc {
    fn payload_shape(&self) -> PayloadShape {
        PayloadShape {
            modulation_bits: self.chain.bits_per_frame(),
            index_bits: self.chain.n(),
        }
    }

    fn uses_per_frame(&self) -> usize {
        self.chain.n()
    }

    fn required_leds(&self) -> RequiredLeds {
        RequiredLeds::Exact(4)
    }

    fn rate(&self) -> f64 {
        (self.chain.bits_per_frame() + self.chain.n()) as f64 / self.chain.n() as f64
    }

    fn sigma_x(&self) -> f64 {
        // One of four LEDs fires per use instead of one of two, so the mean
        // received power is half the one-in-two reference.
        self.chain.sigma_x / 2f64.sqrt()
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let x = self.chain.modulate(&payload.modulation)?;
        let mut intensity = SampleMatrix::zeros(n, n_t);
        for (t, &xt) in x.iter().enumerate() {
            let pair = payload.index[t] as usize;
            let col = 2 * pair + (xt < 0.0) as usize;
            intensity.set(t, col, xt.abs());
        }
        Ok(TxFrame { intensity, index_stream: payload.index.clone() })
    }

    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        let det = ctx.ops.detector()?;
        let n = self.chain.n();
        if let Some(genie) = ctx.genie_index {
            if genie.len() != n {
                return Err(SchemeError::GenieSize { expected: n, got: genie.len() });
            }
        }
        let mut z = vec![0.0f64; det.n_columns()];
        let mut x_hat = vec![0.0f64; n];
        let mut index_raw = Vec::with_capacity(n);
        for t in 0..n {
            det.project_into(y.row(t), &mut z);
            let (pair, amplitude) = match ctx.genie_index {
                Some(genie) => {
                    let b = genie[t];
                    let span = 2 * b as usize..2 * b as usize + 2;
                    (b, det.decide_among(&z, span).amplitude)
                }
                None => {
                    let d = det.decide_among(&z, 0..det.n_columns());
                    (d.column >= 2, d.amplitude)
                }
            };
            index_raw.push(pair);
            x_hat[t] = amplitude;
        }
        let mut modulation = Vec::with_capacity(self.chain.bits_per_frame());
        self.chain.demodulate(&x_hat, &mut modulation)?;
        let index_info = index_raw.clone();
        Ok(RxOutput { modulation, index_raw, index_info, decode: None })
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{default_link, loopback, propagate};
    use super::super::{Payload, RxContext, SchemeConfig, SchemeKind, Transceiver};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_loopback_is_exact() {
        let mut c = SchemeConfig::new(SchemeKind::Indc);
        c.order = 64;
        for seed in 0..20 {
            let (payload, rx) = loopback(&c, 4, seed);
            assert_eq!(rx.modulation, payload.modulation, "seed {seed}");
            assert_eq!(rx.index_raw, payload.index, "seed {seed}");
            assert_eq!(rx.index_info, payload.index, "seed {seed}");
        }
    }

    #[test]
    fn zero_index_stream_reduces_to_first_pair() {
        // With every index bit 0 the second pair must stay dark and the
        // drive on the first pair must match plain polarity splitting.
        let mut c = SchemeConfig::new(SchemeKind::Indc);
        c.order = 16;
        let t = Transceiver::new(&c).unwrap();
        let shape = t.payload_shape();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let modulation: Vec<bool> = (0..shape.modulation_bits).map(|_| rng.gen()).collect();
        let payload = Payload {
            modulation: modulation.clone(),
            index: vec![false; shape.index_bits],
        };
        let tx = t.transmit(&payload, 4).unwrap();

        let mut ndc_cfg = SchemeConfig::new(SchemeKind::Ndc);
        ndc_cfg.order = 16;
        let ndc = Transceiver::new(&ndc_cfg).unwrap();
        let ndc_tx = ndc.transmit(&Payload { modulation, index: Vec::new() }, 2).unwrap();

        for u in 0..tx.intensity.n_rows() {
            assert_eq!(tx.intensity.get(u, 0), ndc_tx.intensity.get(u, 0));
            assert_eq!(tx.intensity.get(u, 1), ndc_tx.intensity.get(u, 1));
            assert_eq!(tx.intensity.get(u, 2), 0.0);
            assert_eq!(tx.intensity.get(u, 3), 0.0);
        }
    }

    #[test]
    fn genie_pins_index_decisions() {
        // Even under crushing noise the genie receiver reports the
        // transmitted index stream verbatim.
        let mut c = SchemeConfig::new(SchemeKind::Indc);
        c.order = 4;
        let t = Transceiver::new(&c).unwrap();
        let ops = default_link(&t, 4, 4, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let payload = t.random_payload(&mut rng);
        let tx = t.transmit(&payload, 4).unwrap();
        let mut y = propagate(&ops, &tx.intensity);
        for u in 0..y.n_rows() {
            for c in 0..y.n_cols() {
                y.set(u, c, y.get(u, c) + 1e-5 * ((u * 7 + c * 3) as f64).sin());
            }
        }
        let ctx = RxContext { ops: &ops, genie_index: Some(&tx.index_stream) };
        let rx = t.receive(&y, &ctx).unwrap();
        assert_eq!(rx.index_raw, payload.index);
        assert_eq!(rx.index_info, payload.index);
    }
}
