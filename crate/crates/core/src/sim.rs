//! Seeded synthetic sources and memoryless corruption.
//!
//! All randomness comes from ChaCha8 keyed by the user seed. Each consumer
//! reads its own stream: the source uses stream 0, copy `j` uses stream
//! `j + 1` and draws exactly one 64-bit word pair per cell, so cell `(i, j)`
//! depends only on `(seed, i, j)` and rows can be generated in any order.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::empirical::ObservationMatrix;
use crate::error::{Error, Result};
use crate::model::{BscParam, Channel, Distribution, Symbol};

/// Generator identity recorded in manifests and reports.
pub const RNG_ALGORITHM: &str = "chacha8";

const PARAMETER_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceMode {
    /// Type fixed to `floor(n p(x))` per symbol, remainder on symbol 0.
    #[default]
    Exact,
    Iid,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Uniform in `[0, 1)` from one 64-bit word, 53-bit resolution.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sample(probs: &[f64], u: f64) -> Symbol {
    let mut acc = 0.0;
    for (s, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return s as Symbol;
        }
    }
    // rounding left u above the cumulative sum: last symbol with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as Symbol
}

/// Passes `x` through each channel independently, one column per channel.
pub fn corrupt(x: &[Symbol], channels: &[Channel], seed: u64) -> Result<ObservationMatrix> {
    let first = channels.first().ok_or(Error::EmptySystem)?;
    let alphabet = first.alphabet();
    for ch in channels {
        if ch.size() != alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.size(),
                found: ch.size(),
            });
        }
    }
    for &s in x {
        alphabet.check_symbol(s)?;
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let columns: Vec<Vec<Symbol>> = channels
        .iter()
        .enumerate()
        .map(|(j, ch)| {
            let mut rng = stream(seed, j as u64 + 1);
            x.iter().map(|&xi| sample(ch.row(xi as usize), unit(&mut rng))).collect()
        })
        .collect();
    ObservationMatrix::from_columns(alphabet, &columns)
}

/// A length-`n` sequence with type (approximately) `p`.
pub fn synthesize_source(p: &Distribution, n: usize, seed: u64, mode: SourceMode) -> Result<Vec<Symbol>> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = stream(seed, 0);
    match mode {
        SourceMode::Exact => {
            let mut counts: Vec<usize> = p.probs().iter().map(|&q| (n as f64 * q).floor() as usize).collect();
            let assigned: usize = counts.iter().sum();
            counts[0] += n - assigned;
            let mut x: Vec<Symbol> = counts
                .iter()
                .enumerate()
                .flat_map(|(s, &c)| std::iter::repeat_n(s as Symbol, c))
                .collect();
            x.shuffle(&mut rng);
            Ok(x)
        }
        SourceMode::Iid => Ok((0..n).map(|_| sample(p.probs(), unit(&mut rng))).collect()),
    }
}

/// `k` BSC parameters uniform on `[0, 1]` subject to `|b - 1/2| >= min_gap`.
pub fn random_bscs(k: usize, seed: u64, min_gap: f64) -> Result<Vec<BscParam>> {
    if !(0.0..0.5).contains(&min_gap) {
        return Err(Error::InvalidArgument(format!("min_gap must lie in [0, 0.5), got {min_gap}")));
    }
    let mut rng = stream(seed, PARAMETER_STREAM);
    let width = 0.5 - min_gap;
    (0..k)
        .map(|_| {
            let offset = min_gap + width * rng.random::<f64>();
            let b = if rng.random::<bool>() { 0.5 + offset } else { 0.5 - offset };
            BscParam::new(b)
        })
        .collect()
}
