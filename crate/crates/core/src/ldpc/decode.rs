//! Flooding sum-product decoding.
//!
//! Log-likelihood ratios follow the convention `LLR > 0` means bit 0 is
//! more likely. Inputs and messages are clamped to +-30 for numerical
//! stability. Check updates use the tanh rule with stable prefix/suffix
//! products instead of division; after every iteration the tentative hard
//! decision is tested against the parity checks and decoding stops early on
//! success. A word whose initial hard decision already satisfies every
//! check reports zero iterations.

use super::LdpcCode;

#[derive(Debug, Clone, Copy)]
pub struct DecodeOptions {
    pub max_iterations: usize,
    /// Symmetric clamp applied to input LLRs and all messages.
    pub clamp: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self { max_iterations: 50, clamp: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    /// Hard decision for every codeword bit.
    pub codeword: Vec<bool>,
    /// Whether the result satisfies all parity checks.
    pub converged: bool,
    /// Iterations actually performed.
    pub iterations: usize,
}

/// Decodes `llrs` (one per codeword bit) against `code`.
///
/// Always returns a hard decision; `converged` distinguishes a valid
/// codeword from the best effort after `max_iterations`.
pub fn decode_sum_product(code: &LdpcCode, llrs: &[f64], opts: &DecodeOptions) -> DecodeOutput {
    assert_eq!(llrs.len(), code.n(), "one LLR per codeword bit");
    let clamp = opts.clamp;
    let lambda: Vec<f64> = llrs.iter().map(|&l| l.clamp(-clamp, clamp)).collect();

    // Flat edge arrays grouped by check node.
    let m = code.n_checks();
    let mut check_start = Vec::with_capacity(m + 1);
    let mut edge_var: Vec<u32> = Vec::new();
    check_start.push(0usize);
    for vars in code.check_vars() {
        edge_var.extend_from_slice(vars);
        check_start.push(edge_var.len());
    }
    let n_edges = edge_var.len();
    let mut var_edges: Vec<Vec<u32>> = vec![Vec::new(); code.n()];
    for (e, &v) in edge_var.iter().enumerate() {
        var_edges[v as usize].push(e as u32);
    }

    let hard = |posterior: &[f64]| -> Vec<bool> { posterior.iter().map(|&p| p < 0.0).collect() };

    let mut decision = hard(&lambda);
    if code.syndrome_ok(&decision) {
        return DecodeOutput { codeword: decision, converged: true, iterations: 0 };
    }

    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| lambda[v as usize]).collect();
    let mut c2v = vec![0.0f64; n_edges];
    let mut posterior = lambda.clone();
    let mut tanhs: Vec<f64> = Vec::new();
    let mut prefix: Vec<f64> = Vec::new();
    let mut suffix: Vec<f64> = Vec::new();

    for iter in 1..=opts.max_iterations {
        // check-node update: c2v[e] = 2 atanh( prod_{e' != e} tanh(v2c[e']/2) )
        for c in 0..m {
            let lo = check_start[c];
            let hi = check_start[c + 1];
            let deg = hi - lo;
            tanhs.clear();
            tanhs.extend(v2c[lo..hi].iter().map(|&x| (x / 2.0).tanh()));
            prefix.clear();
            prefix.resize(deg + 1, 1.0);
            suffix.clear();
            suffix.resize(deg + 1, 1.0);
            for i in 0..deg {
                prefix[i + 1] = prefix[i] * tanhs[i];
            }
            for i in (0..deg).rev() {
                suffix[i] = suffix[i + 1] * tanhs[i];
            }
            for i in 0..deg {
                let prod = prefix[i] * suffix[i + 1];
                c2v[lo + i] = (2.0 * prod.atanh()).clamp(-clamp, clamp);
            }
        }
        // variable-node update and posterior
        for (v, edges) in var_edges.iter().enumerate() {
            let total: f64 = lambda[v] + edges.iter().map(|&e| c2v[e as usize]).sum::<f64>();
            posterior[v] = total;
            for &e in edges {
                v2c[e as usize] = (total - c2v[e as usize]).clamp(-clamp, clamp);
            }
        }
        decision = hard(&posterior);
        if code.syndrome_ok(&decision) {
            return DecodeOutput { codeword: decision, converged: true, iterations: iter };
        }
    }
    DecodeOutput { codeword: decision, converged: false, iterations: opts.max_iterations }
}
