//! DC-biased optical OFDM.
//!
//! Each parallel block modulates a full Hermitian frame, adds a DC bias of
//! `k sigma_x` with `k = sqrt(10^(bias_db/10) - 1)` (so the bias costs
//! `10 log10(k^2 + 1)` dB of electrical power), and clips whatever stays
//! negative at zero. The receiver zero-forces the streams apart, subtracts
//! the bias, and FFT-demaps. Clipping noise is part of the scheme: exact
//! recovery is only guaranteed at generous bias.

use super::{
    validate_blocks, ModChain, Payload, PayloadShape, RequiredLeds, RxContext, RxOutput,
    SampleMatrix, SchemeConfig, SchemeError, SchemeImpl, TxFrame,
};
use crate::ofdm::FrameLayout;

#[derive(Debug)]
pub(super) struct Dco {
    chain: ModChain,
    blocks: usize,
    /// Absolute DC bias `k sigma_x`.
    bias: f64,
}

impl Dco {
    pub fn new(c: &SchemeConfig) -> Result<Self, SchemeError> {
        validate_blocks(c.parallel_blocks)?;
        if !(c.bias_db >= 0.0 && c.bias_db.is_finite()) {
            return Err(SchemeError::BadConfig(format!(
                "bias_db must be finite and nonnegative, got {}",
                c.bias_db
            )));
        }
        let chain = ModChain::new(c.n_subcarriers, c.order, FrameLayout::Full)?;
        let k = (10f64.powf(c.bias_db / 10.0) - 1.0).sqrt();
        let bias = k * chain.sigma_x;
        Ok(Self { chain, blocks: c.parallel_blocks, bias })
    }
}

impl SchemeImpl for Dco {
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
        // Every block drives its LED with a full-power biased stream, so the
        // mean received power is `blocks * (1 + k^2)` times the one-LED
        // zero-bias reference that the SNR definition is normalised to.
        let k = self.bias / self.chain.sigma_x;
        self.chain.sigma_x * (self.blocks as f64 * (1.0 + k * k)).sqrt()
    }

    fn transmit(&self, payload: &Payload, n_t: usize) -> Result<TxFrame, SchemeError> {
        let n = self.chain.n();
        let per_block = self.chain.bits_per_frame();
        let mut intensity = SampleMatrix::zeros(n, n_t);
        for b in 0..self.blocks {
            let x = self.chain.modulate(&payload.modulation[b * per_block..(b + 1) * per_block])?;
            for (t, &xt) in x.iter().enumerate() {
                intensity.set(t, b, (xt + self.bias).max(0.0));
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
                s[t] = x_hat[b] - self.bias;
            }
        }
        let mut modulation = Vec::with_capacity(self.blocks * self.chain.bits_per_frame());
        for s in &stream {
            self.chain.demodulate(s, &mut modulation)?;
        }
        Ok(RxOutput { modulation, index_raw: Vec::new(), index_info: Vec::new(), decode: None })
    }
}
