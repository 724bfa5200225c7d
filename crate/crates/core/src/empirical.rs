//! Empirical statistics of observed copies: types, joint empirical
//! distributions over `X^K`, marginals, conditionals and the signed parity
//! statistic used by the binary estimators.
//!
//! Joint distributions are dense tensors indexed by the tuple
//! `(y_1, .., y_K)` read as a base-`L` number with the first copy as the
//! most significant digit.

use crate::error::{Error, Result};
use crate::model::{decode_index, validate_probs, Alphabet, Distribution, Symbol, PRODUCT_TOL};

/// Largest dense joint distribution we are willing to allocate.
pub const MAX_CELLS: usize = 1 << 20;

/// `n` rows (positions) by `K` columns (copies) of observed symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMatrix {
    alphabet: Alphabet,
    n: usize,
    k: usize,
    data: Vec<Symbol>,
}

impl ObservationMatrix {
    /// Row-major constructor: `data[i * k + j]` is copy `j` at position `i`.
    pub fn new(alphabet: Alphabet, k: usize, data: Vec<Symbol>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptySystem);
        }
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !data.len().is_multiple_of(k) {
            return Err(Error::DimensionMismatch {
                expected: k * data.len().div_ceil(k),
                found: data.len(),
            });
        }
        for &s in &data {
            alphabet.check_symbol(s)?;
        }
        Ok(ObservationMatrix {
            alphabet,
            n: data.len() / k,
            k,
            data,
        })
    }

    /// Builds the matrix from one sequence per copy.
    pub fn from_columns(alphabet: Alphabet, columns: &[Vec<Symbol>]) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        for c in columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
        }
        let mut data = Vec::with_capacity(n * k);
        for i in 0..n {
            data.extend(columns.iter().map(|c| c[i]));
        }
        ObservationMatrix::new(alphabet, k, data)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Symbol] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Symbol]> {
        self.data.chunks_exact(self.k)
    }

    pub fn column(&self, j: usize) -> Vec<Symbol> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Copies restricted to the given column indices, in that order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<ObservationMatrix> {
        for &j in cols {
            if j >= self.k {
                return Err(Error::CoordinateOutOfRange { index: j, k: self.k });
            }
        }
        let data = self
            .rows()
            .flat_map(|r| cols.iter().map(move |&j| r[j]))
            .collect();
        ObservationMatrix::new(self.alphabet, cols.len(), data)
    }

    /// Applies a symbol relabeling to every entry.
    pub fn relabeled(&self, tau: &crate::model::Permutation) -> Result<ObservationMatrix> {
        if tau.len() != self.alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet.size(),
                found: tau.len(),
            });
        }
        Ok(ObservationMatrix {
            data: self.data.iter().map(|&s| tau.apply(s as usize) as Symbol).collect(),
            ..self.clone()
        })
    }

    /// Tensor index of row `i`.
    #[inline]
    pub(crate) fn row_index(&self, i: usize) -> usize {
        let l = self.alphabet.size();
        self.row(i).iter().fold(0, |acc, &s| acc * l + s as usize)
    }
}

/// Dense probability tensor over `X^K`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    alphabet: Alphabet,
    k: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    /// Number of cells `L^K`, rejecting tensors above [`MAX_CELLS`].
    pub fn cell_count(alphabet: Alphabet, k: usize) -> Result<usize> {
        let cells = (alphabet.size() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if cells > MAX_CELLS as u128 {
            return Err(Error::TooManyCells {
                cells,
                limit: MAX_CELLS,
            });
        }
        Ok(cells as usize)
    }

    pub fn new(alphabet: Alphabet, k: usize, probs: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptySystem);
        }
        let cells = Self::cell_count(alphabet, k)?;
        if probs.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                found: probs.len(),
            });
        }
        Ok(JointDistribution {
            alphabet,
            k,
            probs: validate_probs(probs, PRODUCT_TOL)?,
        })
    }

    pub fn uniform(alphabet: Alphabet, k: usize) -> Result<Self> {
        let cells = Self::cell_count(alphabet, k)?;
        JointDistribution::new(alphabet, k, vec![1.0 / cells as f64; cells])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, tuple: &[Symbol]) -> usize {
        let l = self.alphabet.size();
        tuple.iter().fold(0, |acc, &s| acc * l + s as usize)
    }

    pub fn tuple_of(&self, idx: usize) -> Vec<Symbol> {
        let mut t = vec![0usize; self.k];
        decode_index(idx, self.alphabet.size(), &mut t);
        t.into_iter().map(|s| s as Symbol).collect()
    }

    pub fn get(&self, tuple: &[Symbol]) -> f64 {
        self.probs[self.index_of(tuple)]
    }

    pub fn l1_distance(&self, other: &JointDistribution) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    pub fn l2_distance(&self, other: &JointDistribution) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    fn check_same_shape(&self, other: &JointDistribution) -> Result<()> {
        if self.probs.len() != other.probs.len() || self.k != other.k {
            return Err(Error::DimensionMismatch {
                expected: self.probs.len(),
                found: other.probs.len(),
            });
        }
        Ok(())
    }

    /// True if a single cell carries all the mass.
    pub fn is_point_mass(&self) -> bool {
        self.probs.iter().any(|&p| p >= 1.0 - PRODUCT_TOL)
    }

    fn check_coord(&self, i: usize) -> Result<()> {
        if i < self.k {
            Ok(())
        } else {
            Err(Error::CoordinateOutOfRange { index: i, k: self.k })
        }
    }

    /// Distribution of copy `i` (0-based).
    pub fn marginal(&self, i: usize) -> Result<Distribution> {
        self.check_coord(i)?;
        let l = self.alphabet.size();
        let stride = l.pow((self.k - 1 - i) as u32);
        let mut out = vec![0.0; l];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[(idx / stride) % l] += p;
        }
        Distribution::from_computed(out)
    }

    /// Joint law of the copies listed in `coords`, in that order.
    pub fn marginal_onto(&self, coords: &[usize]) -> Result<JointDistribution> {
        for &c in coords {
            self.check_coord(c)?;
        }
        let l = self.alphabet.size();
        let cells = Self::cell_count(self.alphabet, coords.len())?;
        let mut out = vec![0.0; cells];
        let mut tuple = vec![0usize; self.k];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode_index(idx, l, &mut tuple);
            let j = coords.iter().fold(0, |acc, &c| acc * l + tuple[c]);
            out[j] += p;
        }
        JointDistribution::new(self.alphabet, coords.len(), out)
    }

    /// Marginal on all copies except `i`.
    pub fn marginal_excluding(&self, i: usize) -> Result<JointDistribution> {
        self.check_coord(i)?;
        let coords: Vec<usize> = (0..self.k).filter(|&c| c != i).collect();
        if coords.is_empty() {
            return Err(Error::TooFewCopies {
                required: 2,
                found: self.k,
            });
        }
        self.marginal_onto(&coords)
    }

    /// `q(. | y_i = s)` over the remaining `K - 1` copies.
    pub fn condition_on(&self, i: usize, s: Symbol) -> Result<JointDistribution> {
        self.check_coord(i)?;
        self.alphabet.check_symbol(s)?;
        if self.k < 2 {
            return Err(Error::TooFewCopies {
                required: 2,
                found: self.k,
            });
        }
        let l = self.alphabet.size();
        let mut tuple = vec![0usize; self.k];
        let mut out = vec![0.0; self.probs.len() / l];
        let mut mass = 0.0;
        for (idx, &p) in self.probs.iter().enumerate() {
            decode_index(idx, l, &mut tuple);
            if tuple[i] != s as usize {
                continue;
            }
            let j = tuple
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != i)
                .fold(0, |acc, (_, &y)| acc * l + y);
            out[j] += p;
            mass += p;
        }
        if mass <= 0.0 {
            return Err(Error::ConditioningOnNullEvent { index: i, symbol: s });
        }
        out.iter_mut().for_each(|p| *p /= mass);
        JointDistribution::new(self.alphabet, self.k - 1, out)
    }

    /// Signed parity sum `sum_y (-1)^{y_1 + .. + y_K} q(y)` for binary data
    /// and even `K`.
    ///
    /// Each coordinate contributes `+1` when the per-copy permutation is the
    /// identity (`tau_j(1) = 1`) and `-1` for the flip, so the sign of a cell
    /// is `(-1)^{#zeros}`, which equals `(-1)^{#ones}` for even `K`.
    pub fn f_k_even(&self) -> Result<f64> {
        check_even_binary(self.alphabet, self.k)?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .map(|(idx, &p)| if idx.count_ones() % 2 == 0 { p } else { -p })
            .sum())
    }
}

fn check_even_binary(alphabet: Alphabet, k: usize) -> Result<()> {
    if !alphabet.is_binary() {
        return Err(Error::NonBinaryAlphabet(alphabet.size()));
    }
    if !k.is_multiple_of(2) || k == 0 {
        return Err(Error::OddK(k));
    }
    Ok(())
}

/// Relative symbol frequencies of a sequence.
pub fn type_of(x: &[Symbol], alphabet: Alphabet) -> Result<Distribution> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![0u64; alphabet.size()];
    for &s in x {
        alphabet.check_symbol(s)?;
        counts[s as usize] += 1;
    }
    let n = x.len() as f64;
    Distribution::from_computed(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Tuple counts of the observation rows, divided by `n`.
pub fn joint_empirical(obs: &ObservationMatrix) -> Result<JointDistribution> {
    let cells = JointDistribution::cell_count(obs.alphabet, obs.k)?;
    let mut counts = vec![0u64; cells];
    for i in 0..obs.n {
        counts[obs.row_index(i)] += 1;
    }
    let n = obs.n as f64;
    JointDistribution::new(
        obs.alphabet,
        obs.k,
        counts.into_iter().map(|c| c as f64 / n).collect(),
    )
}

/// Row-wise form of [`JointDistribution::f_k_even`] on the empirical joint:
/// `(1/n) sum_i (-1)^{sum_j y_ij}`.
pub fn f_k_even_streaming(obs: &ObservationMatrix) -> Result<f64> {
    check_even_binary(obs.alphabet, obs.k)?;
    let signed: i64 = obs
        .rows()
        .map(|r| {
            let ones: usize = r.iter().map(|&s| s as usize).sum();
            if ones.is_multiple_of(2) {
                1
            } else {
                -1
            }
        })
        .sum();
    Ok(signed as f64 / obs.n as f64)
}
