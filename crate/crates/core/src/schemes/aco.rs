//! Asymmetrically clipped optical OFDM.
//!
//! Data rides only on odd subcarriers, which makes the time-domain signal
//! antiperiodic over half a frame. Clipping at zero then folds the signal
//! onto itself without destroying information: it exactly halves the odd
//! bins and dumps the other half of the energy onto even bins the receiver
//! never reads. The demodulator compensates by doubling the odd bins.

use super::{
    validate_blocks, ModChain, Payload, PayloadShape, RequiredLeds, RxContext, RxOutput,
    SampleMatrix, SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ofdm::FrameLayout;

#[derive(Debug)]
pub(super) struct Aco {
    chain: ModChain,
    blocks: usize,
}

impl Aco {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        validate_blocks(c.parallel_blocks)?;
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::OddOnly)?;
        Ok(Self { chain, blocks: c.parallel_blocks })
    }
}

impl SchemeImpl for Aco {
    fn payload_shape(&self) -> PayloadShape {
        PayloadShape { modulation_bits: self.blocks * self.chain.bits_per_frame(), index_bits: 0 }
    }

    fn uses_per_frame(&self) -> usize {
        self.chain.n()
    }

    fn required_leds(&self) -> RequiredLeds {
        RequiredLeds::AtLeast(self.blocks)
    }

    fn rate(&self) -> f64 {
        (self.blocks * self.chain.bits_per_frame()) as f64 / self.chain.n() as f64
    }

    fn sigma_x(&self) -> f64 {
        // Clipping leaves each LED with half the bipolar power, so `blocks`
        // LEDs together radiate `blocks / 2` times the one-LED reference.
        self.chain.sigma_x * (self.blocks as f64 / 2.0).sqrt()
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let per_block = self.chain.bits_per_frame();
        let mut intensity = SampleMatrix::zeros(n, n_t);
        for b in 0..self.blocks {
            let x = self.chain.modulate(&payload.modulation[b * per_block..(b + 1) * per_block])?;
            for (t, &xt) in x.iter().enumerate() {
                intensity.set(t, b, xt.max(0.0));
            }
        }
        Ok(TxFrame { intensity, index_stream: Vec::new() })
    }

    fn receive(&self, y: &SampleMatrix, ctx: &RxContext) -> Result<RxOutput, SchemeError> {
        let eq = ctx.ops.equalizer()?;
        let n = self.chain.n();
        let n_streams = eq.n_streams();
        let mut stream = vec![vec![0.0f64; n]; self.blocks];
        let mut x_hat = vec![0.0f64; n_streams];
        for t in 0..n {
            eq.equalize_into(y.row(t), &mut x_hat);
            for (b, s) in stream.iter_mut().enumerate() {
                s[t] = x_hat[b];
            }
        }
        let mut modulation = Vec::with_capacity(self.blocks * self.chain.bits_per_frame());
        for s in &stream {
            // The odd-only demodulator doubles the surviving bins, undoing
            // the factor-of-two loss from clipping.
            self.chain.demodulate(s, &mut modulation)?;
        }
        Ok(RxOutput { modulation, index_raw: Vec::new(), index_info: Vec::new(), decode: None })
    }
}
