//! Regular LDPC codes: progressive edge-growth construction, systematic
//! encoding, and alist import/export.
//!
//! Codes are (dv, dc)-regular binary LDPC codes built by progressive edge
//! growth (PEG): variable nodes acquire their edges one at a time, each new
//! edge attaching to a check node that is as far as possible from the
//! variable in the current graph (maximizing local girth), with ties broken
//! first by the lowest check degree and then by a seeded RNG. Construction
//! retries with a re-derived seed until the parity-check matrix has full row
//! rank, so `k = n - m` information bits are always carried.
//!
//! Encoding is systematic in the generalized sense: Gaussian elimination
//! over GF(2) selects `m` pivot columns, the remaining `k` columns carry the
//! information bits verbatim (in ascending column order), and each pivot
//! position is a parity formed from the information vector.

pub mod decode;

pub use decode::{decode_sum_product, DecodeOptions, DecodeOutput};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rng_util::mix_seed;

#[derive(Debug, Error, PartialEq)]
pub enum LdpcError {
    #[error("invalid regular code shape: n = {n}, dv = {dv}, dc = {dc}")]
    BadShape { n: usize, dv: usize, dc: usize },
    #[error("expected k = {expected} for this shape, got {got}")]
    WrongK { expected: usize, got: usize },
    #[error("construction failed after {0} attempts")]
    ConstructionFailed(usize),
    #[error("parity-check matrix is rank deficient")]
    RankDeficient,
    #[error("alist parse error: {0}")]
    AlistParse(String),
    #[error("expected {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// A binary LDPC code with a precomputed systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    m: usize,
    k: usize,
    /// Variable indices of each check node, ascending.
    check_vars: Vec<Vec<u32>>,
    /// Check indices of each variable node, ascending.
    var_checks: Vec<Vec<u32>>,
    /// Columns that carry information bits verbatim, ascending.
    info_cols: Vec<u32>,
    /// Pivot column solved by each reduced row.
    parity_cols: Vec<u32>,
    /// Reduced rows restricted to the information columns, bit-packed.
    parity_rows: Vec<Vec<u64>>,
}

const WORD: usize = 64;

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

fn get_bit(words: &[u64], i: usize) -> bool {
    words[i / WORD] >> (i % WORD) & 1 == 1
}

fn set_bit(words: &mut [u64], i: usize) {
    words[i / WORD] |= 1 << (i % WORD);
}

impl LdpcCode {
    /// Builds a (3,6)-regular rate-1/2 code with `n` columns and `k = n/2`
    /// information bits.
    pub fn new_rate_half(n: usize, k: usize, seed: u64) -> Result<Self, LdpcError> {
        if k * 2 != n {
            return Err(LdpcError::WrongK { expected: n / 2, got: k });
        }
        Self::new_regular(n, 3, 6, seed)
    }

    /// Builds a (dv, dc)-regular code of length `n` by progressive edge
    /// growth. Deterministic for a given `(n, dv, dc, seed)`.
    pub fn new_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<Self, LdpcError> {
        if n == 0 || dv == 0 || dc <= dv || n * dv % dc != 0 || n * dv / dc >= n {
            return Err(LdpcError::BadShape { n, dv, dc });
        }
        let m = n * dv / dc;
        const MAX_ATTEMPTS: usize = 64;
        for attempt in 0..MAX_ATTEMPTS as u64 {
            let rng_seed = mix_seed(&[seed, attempt]);
            let Some(check_vars) = peg_attempt(n, m, dv, dc, rng_seed) else {
                continue;
            };
            match Self::from_adjacency(n, check_vars) {
                Ok(code) => return Ok(code),
                Err(LdpcError::RankDeficient) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(LdpcError::ConstructionFailed(MAX_ATTEMPTS))
    }

    /// Assembles a code from explicit check-node adjacency, deriving the
    /// systematic encoder. Fails if the matrix is rank deficient.
    pub fn from_adjacency(n: usize, check_vars: Vec<Vec<u32>>) -> Result<Self, LdpcError> {
        let m = check_vars.len();
        let mut var_checks = vec![Vec::new(); n];
        for (c, vars) in check_vars.iter().enumerate() {
            for &v in vars {
                var_checks[v as usize].push(c as u32);
            }
        }
        let (info_cols, parity_cols, parity_rows) = derive_encoder(n, &check_vars)?;
        let mut check_vars = check_vars;
        for vars in &mut check_vars {
            vars.sort_unstable();
        }
        Ok(Self { n, m, k: n - m, check_vars, var_checks, info_cols, parity_cols, parity_rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_checks(&self) -> usize {
        self.m
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn check_vars(&self) -> &[Vec<u32>] {
        &self.check_vars
    }

    pub fn var_checks(&self) -> &[Vec<u32>] {
        &self.var_checks
    }

    /// Codeword positions that hold the information bits, ascending.
    pub fn info_positions(&self) -> &[u32] {
        &self.info_cols
    }

    /// Systematic encoding of `k` information bits into an `n`-bit codeword.
    pub fn encode(&self, info: &[bool]) -> Result<Vec<bool>, LdpcError> {
        if info.len() != self.k {
            return Err(LdpcError::WrongLength { expected: self.k, got: info.len() });
        }
        let mut packed = vec![0u64; words_for(self.k)];
        for (i, &b) in info.iter().enumerate() {
            if b {
                set_bit(&mut packed, i);
            }
        }
        let mut cw = vec![false; self.n];
        for (i, &col) in self.info_cols.iter().enumerate() {
            cw[col as usize] = info[i];
        }
        for (r, row) in self.parity_rows.iter().enumerate() {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            cw[self.parity_cols[r] as usize] = ones % 2 == 1;
        }
        Ok(cw)
    }

    /// Reads the information bits back out of a codeword.
    pub fn extract_info(&self, codeword: &[bool]) -> Vec<bool> {
        self.info_cols.iter().map(|&c| codeword[c as usize]).collect()
    }

    /// True when every parity check is satisfied.
    pub fn syndrome_ok(&self, codeword: &[bool]) -> bool {
        self.check_vars
            .iter()
            .all(|vars| !vars.iter().fold(false, |acc, &v| acc ^ codeword[v as usize]))
    }

    /// Serializes the parity-check matrix in alist format: `n m`, the
    /// maximum column/row degrees, per-column and per-row degree lists, then
    /// one line of 1-based check indices per column and one line of 1-based
    /// variable indices per row.
    pub fn to_alist(&self) -> String {
        let dv_max = self.var_checks.iter().map(Vec::len).max().unwrap_or(0);
        let dc_max = self.check_vars.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        out.push_str(&format!("{} {}\n{} {}\n", self.n, self.m, dv_max, dc_max));
        let degrees = |lists: &[Vec<u32>]| {
            lists.iter().map(|l| l.len().to_string()).collect::<Vec<_>>().join(" ")
        };
        out.push_str(&degrees(&self.var_checks));
        out.push('\n');
        out.push_str(&degrees(&self.check_vars));
        out.push('\n');
        let lines = |lists: &[Vec<u32>], out: &mut String| {
            for l in lists {
                let row: Vec<String> = l.iter().map(|&i| (i + 1).to_string()).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        };
        lines(&self.var_checks, &mut out);
        lines(&self.check_vars, &mut out);
        out
    }

    /// Parses an alist string. Lines may be padded with zero entries (as
    /// written for irregular codes); the declared degree lists must match
    /// the nonzero entry counts. The systematic encoder is re-derived from
    /// the matrix, so a round trip through alist preserves encoding exactly.
    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        let bad = |msg: String| LdpcError::AlistParse(msg);
        let parse_line = |line: &str| -> Result<Vec<i64>, LdpcError> {
            line.split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|_| bad(format!("not an integer: {t:?}"))))
                .collect()
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next_line = |what: &str| {
            lines.next().ok_or_else(|| bad(format!("unexpected end of input at {what}")))
        };
        let dims = parse_line(next_line("dimensions")?)?;
        let [n, m] = dims[..] else {
            return Err(bad(format!("expected `n m`, got {dims:?}")));
        };
        if n <= 0 || m <= 0 || m >= n {
            return Err(bad(format!("bad dimensions {n} x {m}")));
        }
        let (n, m) = (n as usize, m as usize);
        let _max_degrees = parse_line(next_line("max degrees")?)?;
        let read_degrees = |line: &str, count: usize| -> Result<Vec<usize>, LdpcError> {
            let d = parse_line(line)?;
            if d.len() != count || d.iter().any(|&x| x < 0) {
                return Err(bad(format!("expected {count} degrees, got {}", d.len())));
            }
            Ok(d.into_iter().map(|x| x as usize).collect())
        };
        let col_deg = read_degrees(next_line("column degrees")?, n)?;
        let row_deg = read_degrees(next_line("row degrees")?, m)?;
        let mut read_adjacency = |count: usize,
                                  degrees: &[usize],
                                  max_index: usize,
                                  what: &str|
         -> Result<Vec<Vec<u32>>, LdpcError> {
            (0..count)
                .map(|i| {
                    let entries = parse_line(next_line(what)?)?;
                    let nonzero: Vec<u32> = entries
                        .iter()
                        .filter(|&&e| e != 0)
                        .map(|&e| {
                            if e < 1 || e as usize > max_index {
                                Err(bad(format!("{what} index {e} out of range")))
                            } else {
                                Ok(e as u32 - 1)
                            }
                        })
                        .collect::<Result<_, _>>()?;
                    if nonzero.len() != degrees[i] {
                        return Err(bad(format!(
                            "{what} {i}: declared degree {} but {} entries",
                            degrees[i],
                            nonzero.len()
                        )));
                    }
                    Ok(nonzero)
                })
                .collect()
        };
        let cols = read_adjacency(n, &col_deg, m, "column")?;
        let rows = read_adjacency(m, &row_deg, n, "row")?;
        let mut check_vars: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (v, checks) in cols.iter().enumerate() {
            for &c in checks {
                check_vars[c as usize].push(v as u32);
            }
        }
        let mut rows_sorted = rows;
        for (vars, from_cols) in rows_sorted.iter_mut().zip(check_vars.iter_mut()) {
            vars.sort_unstable();
            from_cols.sort_unstable();
        }
        if check_vars != rows_sorted {
            return Err(bad("column and row sections disagree".into()));
        }
        Self::from_adjacency(n, check_vars)
    }
}

/// One PEG construction pass. Returns check-node adjacency or `None` when
/// the strict degree cap leads to a dead end.
fn peg_attempt(n: usize, m: usize, dv: usize, dc: usize, rng_seed: u64) -> Option<Vec<Vec<u32>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut check_vars: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut var_checks: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut depth = vec![usize::MAX; m]; // scratch for BFS
    for v in 0..n {
        for edge in 0..dv {
            let pool: Vec<u32> = if edge == 0 {
                (0..m as u32).filter(|&c| check_vars[c as usize].len() < dc).collect()
            } else {
                bfs_depths(v, &var_checks, &check_vars, &mut depth);
                let open = |c: &u32| {
                    check_vars[*c as usize].len() < dc
                        && !var_checks[v].contains(c)
                };
                let unreached: Vec<u32> =
                    (0..m as u32).filter(|c| depth[*c as usize] == usize::MAX).filter(open).collect();
                if !unreached.is_empty() {
                    unreached
                } else {
                    let deepest = (0..m as u32)
                        .filter(open)
                        .map(|c| depth[c as usize])
                        .max()?;
                    (0..m as u32)
                        .filter(open)
                        .filter(|&c| depth[c as usize] == deepest)
                        .collect()
                }
            };
            if pool.is_empty() {
                return None;
            }
            let min_deg = pool.iter().map(|&c| check_vars[c as usize].len()).min().unwrap();
            let best: Vec<u32> =
                pool.into_iter().filter(|&c| check_vars[c as usize].len() == min_deg).collect();
            let pick = best[rng.gen_range(0..best.len())];
            check_vars[pick as usize].push(v as u32);
            var_checks[v].push(pick);
        }
    }
    Some(check_vars)
}

/// Breadth-first distances from variable `v` to every check node in the
/// current graph; unreached checks keep `usize::MAX`.
fn bfs_depths(
    v: usize,
    var_checks: &[Vec<u32>],
    check_vars: &[Vec<u32>],
    depth: &mut [usize],
) {
    depth.fill(usize::MAX);
    let mut seen_vars = vec![false; var_checks.len()];
    seen_vars[v] = true;
    let mut frontier = vec![v as u32];
    let mut level = 1usize;
    while !frontier.is_empty() {
        let mut next_vars = Vec::new();
        for &fv in &frontier {
            for &c in &var_checks[fv as usize] {
                if depth[c as usize] == usize::MAX {
                    depth[c as usize] = level;
                    for &nv in &check_vars[c as usize] {
                        if !seen_vars[nv as usize] {
                            seen_vars[nv as usize] = true;
                            next_vars.push(nv);
                        }
                    }
                }
            }
        }
        frontier = next_vars;
        level += 1;
    }
}

/// Gauss-Jordan elimination over GF(2) yielding the systematic encoder:
/// information columns (the non-pivots, ascending), pivot columns, and for
/// each pivot its parity mask over the information columns.
#[allow(clippy::type_complexity)]
fn derive_encoder(
    n: usize,
    check_vars: &[Vec<u32>],
) -> Result<(Vec<u32>, Vec<u32>, Vec<Vec<u64>>), LdpcError> {
    let m = check_vars.len();
    let w = words_for(n);
    let mut rows: Vec<Vec<u64>> = vec![vec![0u64; w]; m];
    for (c, vars) in check_vars.iter().enumerate() {
        for &v in vars {
            rows[c][v as usize / WORD] ^= 1 << (v as usize % WORD);
        }
    }
    let mut pivot_cols: Vec<u32> = Vec::with_capacity(m);
    let mut rank = 0usize;
    for col in 0..n {
        let Some(src) = (rank..m).find(|&r| get_bit(&rows[r], col)) else {
            continue;
        };
        rows.swap(rank, src);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && get_bit(row, col) {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivot_cols.push(col as u32);
        rank += 1;
        if rank == m {
            break;
        }
    }
    if rank < m {
        return Err(LdpcError::RankDeficient);
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivot_cols {
        is_pivot[c as usize] = true;
    }
    let info_cols: Vec<u32> = (0..n as u32).filter(|&c| !is_pivot[c as usize]).collect();
    let k = info_cols.len();
    let parity_rows: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let mut packed = vec![0u64; words_for(k)];
            for (i, &col) in info_cols.iter().enumerate() {
                if get_bit(row, col as usize) {
                    set_bit(&mut packed, i);
                }
            }
            packed
        })
        .collect();
    Ok((info_cols, pivot_cols, parity_rows))
}
