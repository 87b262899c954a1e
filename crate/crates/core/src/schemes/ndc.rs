//! Non-DC-biased OFDM (polarity-split spatial modulation over an LED pair).
//!
//! One bipolar Hermitian frame drives two LEDs: positive samples go out on
//! the first LED, the magnitudes of negative samples on the second, so each
//! channel use lights exactly one LED. The receiver recovers the bipolar
//! sample per use by deciding which column of the channel matrix fired and
//! restoring the sign implied by that column.

use super::{
    ModChain, Payload, PayloadShape, RequiredLeds, RxContext, RxOutput, SampleMatrix,
    SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ofdm::FrameLayout;

#[derive(Debug)]
pub(super) struct Ndc {
    chain: ModChain,
}

impl Ndc {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::Full)?;
        Ok(Self { chain })
    }
}

impl SchemeImpl for Ndc {
    fn payload_shape(&self) -> PayloadShape {
        PayloadShape { modulation_bits: self.chain.bits_per_frame(), index_bits: 0 }
    }

    fn uses_per_frame(&self) -> usize {
        self.chain.n()
    }

    fn required_leds(&self) -> RequiredLeds {
        RequiredLeds::Exact(2)
    }

    fn rate(&self) -> f64 {
        self.chain.bits_per_frame() as f64 / self.chain.n() as f64
    }

    fn sigma_x(&self) -> f64 {
        self.chain.sigma_x
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let x = self.chain.modulate(&payload.modulation)?;
        let mut intensity = SampleMatrix::zeros(n, n_t);
        for (t, &xt) in x.iter().enumerate() {
            if xt >= 0.0 {
                intensity.set(t, 0, xt);
            } else {
                intensity.set(t, 1, -xt);
            }
        }
        Ok(TxFrame { intensity, index_stream: Vec::new() })
    }

    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        let det = ctx.ops.detector()?;
        let n = self.chain.n();
        let mut z = vec![0.0f64; det.n_columns()];
        let mut x_hat = vec![0.0f64; n];
        for t in 0..n {
            det.project_into(y.row(t), &mut z);
            x_hat[t] = det.decide_among(&z, 0..det.n_columns()).amplitude;
        }
        let mut modulation = Vec::with_capacity(self.chain.bits_per_frame());
        self.chain.demodulate(&x_hat, &mut modulation)?;
        Ok(RxOutput { modulation, index_raw: Vec::new(), index_info: Vec::new(), decode: None })
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{default_link, loopback, propagate};
    use super::super::{RxContext, SchemeConfig, SchemeKind, Transceiver};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_loopback_is_exact() {
        // The centred pair gives equal column norms, so the inactive
        // matched filter is strictly weaker and the polarity decision is
        // always right without noise.
        let mut c = SchemeConfig::new(SchemeKind::Ndc);
        c.order = 256;
        for seed in 0..20 {
            let (payload, rx) = loopback(&c, 2, seed);
            assert_eq!(rx.modulation, payload.modulation, "seed {seed}");
        }
    }

    #[test]
    fn loopback_with_more_detectors_than_leds() {
        let mut c = SchemeConfig::new(SchemeKind::Ndc);
        c.order = 256;
        let t = Transceiver::new(&c).unwrap();
        let ops = default_link(&t, 2, 4, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let payload = t.random_payload(&mut rng);
        let tx = t.transmit(&payload, 2).unwrap();
        let y = propagate(&ops, &tx.intensity);
        let rx = t.receive(&y, &RxContext { ops: &ops, genie_index: None }).unwrap();
        assert_eq!(rx.modulation, payload.modulation);
    }

    #[test]
    fn at_most_one_led_fires_per_use() {
        let c = SchemeConfig::new(SchemeKind::Ndc);
        let t = Transceiver::new(&c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let payload = t.random_payload(&mut rng);
        let tx = t.transmit(&payload, 2).unwrap();
        for u in 0..tx.intensity.n_rows() {
            let row = tx.intensity.row(u);
            assert!(row.iter().filter(|&&v| v != 0.0).count() <= 1, "use {u}");
        }
    }
}
