//! Minimal clairvoyant ambiguous (MCA) decoding.
//!
//! Given a system `(p, W_1..W_K)` and a distortion `d`, the decoder labels
//! every output tuple `y` with a source symbol. For a symbol permutation
//! `tau`, tuple `y` gets the label `x'` minimizing
//! `sum_x p(x) d(x, tau^-1(x')) w(y|x)` where `w(y|x) = prod_j w_j(y_j|x)`,
//! and the decoder keeps the `tau` with the smallest total. Relabeling
//! the cells of the partition and relabeling `tau` describe the same family,
//! so the minimum does not depend on which side `tau` is applied to.
//!
//! Reconstructions are only defined up to a symbol permutation; the
//! evaluation helpers here minimize over all of them.

use crate::empirical::{JointDistribution, ObservationMatrix};
use crate::error::{Error, Result};
use crate::model::{decode_index, Alphabet, Channel, DependentComponentSystem, Distribution, DistortionMeasure, Permutation, Symbol};

/// Largest alphabet for which permutations are enumerated.
pub const MAX_PERMUTATION_ALPHABET: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct McaDecoder {
    alphabet: Alphabet,
    k: usize,
    labeling: Vec<Symbol>,
    tau: Permutation,
    expected_distortion: f64,
}

impl McaDecoder {
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Label of every output tuple, indexed like [`JointDistribution`] cells.
    pub fn labeling(&self) -> &[Symbol] {
        &self.labeling
    }

    pub fn tau(&self) -> &Permutation {
        &self.tau
    }

    pub fn expected_distortion(&self) -> f64 {
        self.expected_distortion
    }

    pub fn label(&self, tuple: &[Symbol]) -> Symbol {
        let l = self.alphabet.size();
        self.labeling[tuple.iter().fold(0, |acc, &s| acc * l + s as usize)]
    }
}

fn check_permutable(size: usize) -> Result<()> {
    if size > MAX_PERMUTATION_ALPHABET {
        Err(Error::AlphabetTooLarge(size))
    } else {
        Ok(())
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0, 0.0);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Row-major table of `p(x) w(y|x)` with one row per output tuple.
fn weighted_likelihoods(sys: &DependentComponentSystem) -> Result<Vec<f64>> {
    let l = sys.alphabet().size();
    let cells = JointDistribution::cell_count(sys.alphabet(), sys.k())?;
    let mut table = vec![0.0; cells * l];
    let mut tuple = vec![0usize; sys.k()];
    for idx in 0..cells {
        decode_index(idx, l, &mut tuple);
        for x in 0..l {
            let w: f64 = sys
                .channels()
                .iter()
                .zip(&tuple)
                .map(|(ch, &y)| ch.w(x, y))
                .product();
            table[idx * l + x] = sys.source().prob(x) * w;
        }
    }
    Ok(table)
}

fn check_distortion(sys: &DependentComponentSystem, d: &DistortionMeasure) -> Result<()> {
    if d.size() != sys.alphabet().size() {
        return Err(Error::DimensionMismatch {
            expected: sys.alphabet().size(),
            found: d.size(),
        });
    }
    check_permutable(d.size())
}

fn solve(sys: &DependentComponentSystem, d: &DistortionMeasure, keep_labeling: bool) -> Result<McaDecoder> {
    check_distortion(sys, d)?;
    let l = sys.alphabet().size();
    let table = weighted_likelihoods(sys)?;
    let cells = table.len() / l;
    let compensated = l > 4;

    let mut best: Option<(f64, Permutation, Vec<Symbol>)> = None;
    for tau in Permutation::all(l) {
        let inv = tau.inverse();
        let mut total = 0.0;
        let mut labeling = if keep_labeling { Vec::with_capacity(cells) } else { Vec::new() };
        for row in table.chunks(l) {
            let mut arg = (0, f64::INFINITY);
            for label in 0..l {
                let target = inv.apply(label);
                let terms = row.iter().enumerate().map(|(x, &pw)| pw * d.d(x, target));
                let cost = if compensated { kahan_sum(terms) } else { terms.sum() };
                if cost < arg.1 {
                    arg = (label, cost);
                }
            }
            total += arg.1;
            if keep_labeling {
                labeling.push(arg.0 as Symbol);
            }
        }
        if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            best = Some((total, tau, labeling));
        }
    }
    let (expected_distortion, tau, labeling) = best.expect("at least one permutation");
    Ok(McaDecoder {
        alphabet: sys.alphabet(),
        k: sys.k(),
        labeling,
        tau,
        expected_distortion,
    })
}

/// The MCA decoder of `sys` under `d`.
pub fn build_mca(sys: &DependentComponentSystem, d: &DistortionMeasure) -> Result<McaDecoder> {
    solve(sys, d, true)
}

/// `d_MCA(p, W)`, the expected distortion of the MCA decoder.
pub fn mca_distortion(sys: &DependentComponentSystem, d: &DistortionMeasure) -> Result<f64> {
    Ok(solve(sys, d, false)?.expected_distortion)
}

/// Labels every row of `obs`.
pub fn decode(dec: &McaDecoder, obs: &ObservationMatrix) -> Result<Vec<Symbol>> {
    if obs.k() != dec.k {
        return Err(Error::DimensionMismatch {
            expected: dec.k,
            found: obs.k(),
        });
    }
    if obs.alphabet() != dec.alphabet {
        return Err(Error::DimensionMismatch {
            expected: dec.alphabet.size(),
            found: obs.alphabet().size(),
        });
    }
    Ok((0..obs.n()).map(|i| dec.labeling[obs.row_index(i)]).collect())
}

/// `1 - max_tau sum_x p(x) w(tau(x)|x)`: the error of the best
/// symbol-by-symbol relabeling of a single channel output.
pub fn colour_agnostic_baseline(p: &Distribution, w: &Channel) -> Result<f64> {
    if p.alphabet() != w.alphabet() {
        return Err(Error::DimensionMismatch {
            expected: w.size(),
            found: p.alphabet().size(),
        });
    }
    check_permutable(w.size())?;
    let best = Permutation::all(w.size())
        .iter()
        .map(|tau| (0..w.size()).map(|x| p.prob(x) * w.w(x, tau.apply(x))).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(1.0 - best)
}

/// Per-row majority vote on binary copies; ties go to 0.
pub fn majority_decode(obs: &ObservationMatrix) -> Result<Vec<Symbol>> {
    if !obs.alphabet().is_binary() {
        return Err(Error::NonBinaryAlphabet(obs.alphabet().size()));
    }
    Ok(obs.rows().map(majority_symbol).collect())
}

fn majority_symbol(row: &[Symbol]) -> Symbol {
    let ones = row.iter().filter(|&&s| s == 1).count();
    Symbol::from(2 * ones > row.len())
}

/// The majority rule written as a labeling of all `2^K` binary tuples.
pub fn majority_labeling(k: usize) -> Result<Vec<Symbol>> {
    let cells = JointDistribution::cell_count(Alphabet::BINARY, k)?;
    let mut tuple = vec![0usize; k];
    Ok((0..cells)
        .map(|idx| {
            decode_index(idx, 2, &mut tuple);
            let row: Vec<Symbol> = tuple.iter().map(|&s| s as Symbol).collect();
            majority_symbol(&row)
        })
        .collect())
}

/// Expected distortion of an arbitrary labeling of output tuples, optionally
/// minimized over relabelings of its output.
pub fn labeling_distortion(
    sys: &DependentComponentSystem,
    d: &DistortionMeasure,
    labeling: &[Symbol],
    up_to_permutation: bool,
) -> Result<f64> {
    check_distortion(sys, d)?;
    let l = sys.alphabet().size();
    let table = weighted_likelihoods(sys)?;
    if labeling.len() * l != table.len() {
        return Err(Error::DimensionMismatch {
            expected: table.len() / l,
            found: labeling.len(),
        });
    }
    let perms = if up_to_permutation {
        Permutation::all(l)
    } else {
        vec![Permutation::identity(l)]
    };
    let mut best = f64::INFINITY;
    for tau in &perms {
        let mut total = 0.0;
        for (row, &label) in table.chunks(l).zip(labeling) {
            let target = tau.apply(label as usize);
            total += row.iter().enumerate().map(|(x, &pw)| pw * d.d(x, target)).sum::<f64>();
        }
        best = best.min(total);
    }
    Ok(best)
}

/// Mean distortion between `truth` and `estimate` after the best relabeling
/// of the estimate, with the minimizing permutation (lowest on ties).
pub fn permutation_min_distortion(
    truth: &[Symbol],
    estimate: &[Symbol],
    d: &DistortionMeasure,
) -> Result<(f64, Permutation)> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let l = d.size();
    check_permutable(l)?;
    let mut confusion = vec![0u64; l * l];
    for (&x, &xh) in truth.iter().zip(estimate) {
        if x as usize >= l || xh as usize >= l {
            return Err(Error::SymbolOutOfRange {
                symbol: x.max(xh) as usize,
                size: l,
            });
        }
        confusion[x as usize * l + xh as usize] += 1;
    }
    let n = truth.len() as f64;
    let mut best: Option<(f64, Permutation)> = None;
    for tau in Permutation::all(l) {
        let mut total = 0.0;
        for x in 0..l {
            for xh in 0..l {
                total += confusion[x * l + xh] as f64 * d.d(x, tau.apply(xh));
            }
        }
        let value = total / n;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, tau));
        }
    }
    Ok(best.expect("at least one permutation"))
}
