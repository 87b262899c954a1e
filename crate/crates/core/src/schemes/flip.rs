//! Flip-OFDM.
//!
//! A bipolar Hermitian frame is split into its positive and negative parts,
//! which are sent unipolar in two consecutive sub-frames (the negative part
//! sign-flipped). Subtracting the second sub-frame from the first at the
//! receiver reconstructs the bipolar signal, at the cost of doubling the
//! channel uses per frame.

use super::{
    validate_blocks, polarity_separate, ModChain, Payload, PayloadShape, RequiredLeds, RxContext,
    RxOutput, SampleMatrix, SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ofdm::FrameLayout;

#[derive(Debug)]
pub(super) struct Flip {
    chain: ModChain,
    blocks: usize,
}

impl Flip {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        validate_blocks(c.parallel_blocks)?;
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::Full)?;
        Ok(Self { chain, blocks: c.parallel_blocks })
    }
}

impl SchemeImpl for Flip {
    fn payload_shape(&self) -> PayloadShape {
        PayloadShape { modulation_bits: self.blocks * self.chain.bits_per_frame(), index_bits: 0 }
    }

    fn uses_per_frame(&self) -> usize {
        2 * self.chain.n()
    }

    fn required_leds(&self) -> RequiredLeds {
        RequiredLeds::AtLeast(self.blocks)
    }

    fn rate(&self) -> f64 {
        (self.blocks * self.chain.bits_per_frame()) as f64 / (2 * self.chain.n()) as f64
    }

    fn sigma_x(&self) -> f64 {
        // Each sub-frame carries one polarity, so per channel use an LED
        // radiates half the bipolar power; `blocks` LEDs give `blocks / 2`
        // times the one-LED reference.
        self.chain.sigma_x * (self.blocks as f64 / 2.0).sqrt()
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let per_block = self.chain.bits_per_frame();
        let mut intensity = SampleMatrix::zeros(2 * n, n_t);
        for b in 0..self.blocks {
            let x = self.chain.modulate(&payload.modulation[b * per_block..(b + 1) * per_block])?;
            let (pos, neg) = polarity_separate(&x);
            for t in 0..n {
                intensity.set(t, b, pos[t]);
                intensity.set(n + t, b, neg[t]);
            }
        }
        Ok(TxFrame { intensity, index_stream: Vec::new() })
    }

    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        let eq = ctx.ops.equalizer()?;
        let n = self.chain.n();
        let n_streams = eq.n_streams();
        let mut stream = vec![vec![0.0f64; 2 * n]; self.blocks];
        let mut x_hat = vec![0.0f64; n_streams];
        for t in 0..2 * n {
            eq.equalize_into(y.row(t), &mut x_hat);
            for (b, s) in stream.iter_mut().enumerate() {
                s[t] = x_hat[b];
            }
        }
        let mut modulation = Vec::with_capacity(self.blocks * self.chain.bits_per_frame());
        let mut recombined = vec![0.0f64; n];
        for s in &stream {
            for t in 0..n {
                recombined[t] = s[t] - s[n + t];
            }
            self.chain.demodulate(&recombined, &mut modulation)?;
        }
        Ok(RxOutput { modulation, index_raw: Vec::new(), index_info: Vec::new(), decode: None })
    }
}
