//! Core domain types: alphabets, distributions, channels, distortion
//! measures and dependent component systems.
//!
//! Symbols are `u8` values `0..L`. A channel stores `w(y|x)` row-major with
//! the input symbol `x` selecting the row, so every row is a distribution
//! over outputs.

use serde::{Deserialize, Serialize};

use crate::empirical::JointDistribution;
use crate::error::{Error, Result};

/// Tolerance on the sum of a freshly constructed distribution or channel row.
pub const PROB_TOL: f64 = 1e-12;

/// Tolerance on accumulated products such as a joint output distribution.
pub const PRODUCT_TOL: f64 = 1e-10;

pub type Symbol = u8;

/// Finite alphabet `{0, .., L-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet(usize);

impl Alphabet {
    pub const BINARY: Alphabet = Alphabet(2);

    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::InvalidAlphabet(size));
        }
        Ok(Alphabet(size))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }

    pub fn is_binary(self) -> bool {
        self.0 == 2
    }

    pub fn check_symbol(self, symbol: Symbol) -> Result<()> {
        if (symbol as usize) < self.0 {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol: symbol as usize,
                size: self.0,
            })
        }
    }
}

/// Checks entries and normalization; renormalizes when the drift is within `tol`.
pub(crate) fn validate_probs(mut probs: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { sum });
    }
    if sum != 1.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(probs)
}

/// Probability vector over an alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        Ok(Distribution {
            probs: validate_probs(probs, PROB_TOL)?,
        })
    }

    /// Builds a distribution from nonnegative values produced by arithmetic
    /// on other distributions, where the sum may drift by rounding.
    pub(crate) fn from_computed(probs: Vec<f64>) -> Result<Self> {
        Alphabet::new(probs.len())?;
        Ok(Distribution {
            probs: validate_probs(probs, PRODUCT_TOL)?,
        })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let l = alphabet.size();
        Distribution {
            probs: vec![1.0 / l as f64; l],
        }
    }

    /// Point mass on `symbol`.
    pub fn dirac(alphabet: Alphabet, symbol: Symbol) -> Result<Self> {
        alphabet.check_symbol(symbol)?;
        let mut probs = vec![0.0; alphabet.size()];
        probs[symbol as usize] = 1.0;
        Ok(Distribution { probs })
    }

    /// Binary distribution `(p0, 1 - p0)`.
    pub fn binary(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidProbability { index: 0, value: p0 });
        }
        Ok(Distribution {
            probs: vec![p0, 1.0 - p0],
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.probs.len())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Symbols with positive probability.
    pub fn support(&self) -> Vec<Symbol> {
        (0..self.probs.len())
            .filter(|&x| self.probs[x] > 0.0)
            .map(|x| x as Symbol)
            .collect()
    }

    pub fn l1_distance(&self, other: &Distribution) -> Result<f64> {
        check_dim(self.probs.len(), other.probs.len())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// True if `p(0) >= p(1) >= ...`.
    pub fn is_nonincreasing(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] >= w[1])
    }

    /// The image `tau(p)`, i.e. `p'(tau(x)) = p(x)`.
    pub fn permuted(&self, tau: &Permutation) -> Result<Distribution> {
        check_dim(self.probs.len(), tau.len())?;
        let mut probs = vec![0.0; self.probs.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            probs[tau.apply(x)] = p;
        }
        Ok(Distribution { probs })
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Bijection on `{0, .., L-1}` stored as the image of each symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(size: usize) -> Self {
        Permutation((0..size).collect())
    }

    /// The binary flip `0 <-> 1`.
    pub fn flip() -> Self {
        Permutation(vec![1, 0])
    }

    /// Every permutation of `size` symbols in lexicographic order.
    pub fn all(size: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..size).collect();
        loop {
            out.push(Permutation(current.clone()));
            // next lexicographic permutation
            let Some(i) = (0..size.saturating_sub(1))
                .rev()
                .find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..size).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Parameter `b = b(0|0)` of a binary symmetric channel.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BscParam(f64);

impl BscParam {
    pub fn new(b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::BscOutOfRange(b));
        }
        Ok(BscParam(b))
    }

    /// Clamps `b` into `[0, 1]`, reporting whether clamping was needed.
    pub fn clamped(b: f64) -> (Self, bool) {
        let c = b.clamp(0.0, 1.0);
        (BscParam(c), c != b || b.is_nan())
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The invertible subclass excludes `b = 1/2`.
    pub fn is_invertible(self) -> bool {
        self.0 != 0.5
    }

    /// Same channel seen through a flipped input labeling: `1 - b`.
    pub fn complement(self) -> Self {
        BscParam(1.0 - self.0)
    }

    /// Parameter of the composition of two BSCs, `c = 2ab + 1 - a - b`.
    pub fn compose(a: BscParam, b: BscParam) -> BscParam {
        BscParam(2.0 * a.0 * b.0 + 1.0 - a.0 - b.0)
    }

    pub fn channel(self) -> Channel {
        Channel::bsc(self)
    }
}

/// Row-stochastic square matrix `w(y|x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    size: usize,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        Alphabet::new(size)?;
        let mut flat = Vec::with_capacity(size * size);
        for (r, row) in rows.into_iter().enumerate() {
            check_dim(size, row.len())?;
            let row = validate_probs(row, PROB_TOL).map_err(|e| match e {
                Error::NotNormalized { sum } => Error::NotStochastic {
                    channel: 0,
                    row: r,
                    sum,
                },
                other => other,
            })?;
            flat.extend(row);
        }
        Ok(Channel { size, rows: flat })
    }

    /// Row-major constructor without validation; callers guarantee stochasticity.
    pub(crate) fn from_flat_unchecked(size: usize, rows: Vec<f64>) -> Self {
        debug_assert_eq!(rows.len(), size * size);
        Channel { size, rows }
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let l = alphabet.size();
        let mut rows = vec![0.0; l * l];
        for x in 0..l {
            rows[x * l + x] = 1.0;
        }
        Channel { size: l, rows }
    }

    pub fn bsc(b: BscParam) -> Self {
        let b = b.value();
        Channel {
            size: 2,
            rows: vec![b, 1.0 - b, 1.0 - b, b],
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.size)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `w(y|x)`.
    #[inline]
    pub fn w(&self, x: usize, y: usize) -> f64 {
        self.rows[x * self.size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x * self.size..(x + 1) * self.size]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    /// `W(p)(y) = sum_x w(y|x) p(x)`.
    pub fn apply(&self, p: &Distribution) -> Result<Distribution> {
        check_dim(self.size, p.probs.len())?;
        let mut out = vec![0.0; self.size];
        for (x, &px) in p.probs.iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                *o += self.w(x, y) * px;
            }
        }
        Distribution::from_computed(out)
    }

    /// `max_x sum_y |v(y|x) - w(y|x)|`.
    pub fn fb_distance(&self, other: &Channel) -> Result<f64> {
        check_dim(self.size, other.size)?;
        Ok((0..self.size)
            .map(|x| {
                self.row(x)
                    .iter()
                    .zip(other.row(x))
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }

    /// `W o tau^{-1}`: row `x'` of the result is row `tau^{-1}(x')` of `self`.
    pub fn relabel_inputs(&self, tau: &Permutation) -> Result<Channel> {
        check_dim(self.size, tau.len())?;
        let inv = tau.inverse();
        let mut rows = Vec::with_capacity(self.rows.len());
        for x in 0..self.size {
            rows.extend_from_slice(self.row(inv.apply(x)));
        }
        Ok(Channel {
            size: self.size,
            rows,
        })
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.size;
        let mut a = self.rows.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for i in col + 1..n {
                let f = a[i * n + col] / d;
                for k in col..n {
                    a[i * n + k] -= f * a[col * n + k];
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        self.determinant().abs() > PROB_TOL
    }

    /// Interprets a binary channel as a BSC if it is symmetric within `tol`.
    pub fn as_bsc(&self, tol: f64) -> Option<BscParam> {
        if self.size != 2 || (self.w(0, 0) - self.w(1, 1)).abs() > tol {
            return None;
        }
        Some(BscParam(0.5 * (self.w(0, 0) + self.w(1, 1))))
    }
}

/// Source distribution together with the channels every copy passes through.
#[derive(Clone, Debug, PartialEq)]
pub struct DependentComponentSystem {
    source: Distribution,
    channels: Vec<Channel>,
}

impl DependentComponentSystem {
    pub fn new(source: Distribution, channels: Vec<Channel>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptySystem);
        }
        for ch in &channels {
            check_dim(source.probs.len(), ch.size)?;
        }
        Ok(DependentComponentSystem { source, channels })
    }

    /// Binary system with BSC channels.
    pub fn bsc(p0: f64, bs: &[f64]) -> Result<Self> {
        let channels = bs
            .iter()
            .map(|&b| BscParam::new(b).map(Channel::bsc))
            .collect::<Result<Vec<_>>>()?;
        DependentComponentSystem::new(Distribution::binary(p0)?, channels)
    }

    pub fn source(&self) -> &Distribution {
        &self.source
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn k(&self) -> usize {
        self.channels.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.source.alphabet()
    }

    /// Joint law of the copies, `q(y) = sum_x p(x) prod_j w_j(y_j|x)`.
    pub fn product_output(&self) -> Result<JointDistribution> {
        let l = self.alphabet().size();
        let k = self.k();
        let cells = JointDistribution::cell_count(self.alphabet(), k)?;
        let mut probs = vec![0.0; cells];
        let mut tuple = vec![0usize; k];
        for (idx, q) in probs.iter_mut().enumerate() {
            decode_index(idx, l, &mut tuple);
            *q = (0..l)
                .map(|x| {
                    tuple
                        .iter()
                        .zip(&self.channels)
                        .fold(self.source.probs[x], |acc, (&y, ch)| acc * ch.w(x, y))
                })
                .sum();
        }
        JointDistribution::new(self.alphabet(), k, probs)
    }

    /// `||r - s||_1 + sum_j ||V_j - W_j||_FB`.
    pub fn dcs_distance(&self, other: &DependentComponentSystem) -> Result<f64> {
        check_dim(self.k(), other.k())?;
        let mut d = self.source.l1_distance(&other.source)?;
        for (a, b) in self.channels.iter().zip(&other.channels) {
            d += a.fb_distance(b)?;
        }
        Ok(d)
    }

    /// `(tau(p), W_1 o tau^{-1}, .., W_K o tau^{-1})`, which has the same
    /// joint output distribution as `self`.
    pub fn flip_system(&self, tau: &Permutation) -> Result<DependentComponentSystem> {
        Ok(DependentComponentSystem {
            source: self.source.permuted(tau)?,
            channels: self
                .channels
                .iter()
                .map(|c| c.relabel_inputs(tau))
                .collect::<Result<_>>()?,
        })
    }

    /// Marginal system over a subset of copies.
    pub fn select(&self, copies: &[usize]) -> Result<DependentComponentSystem> {
        let channels = copies
            .iter()
            .map(|&j| {
                self.channels
                    .get(j)
                    .cloned()
                    .ok_or(Error::CoordinateOutOfRange {
                        index: j,
                        k: self.k(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        DependentComponentSystem::new(self.source.clone(), channels)
    }
}

/// Writes the base-`l` digits of `idx` into `tuple`, first copy most significant.
#[inline]
pub(crate) fn decode_index(mut idx: usize, l: usize, tuple: &mut [usize]) {
    for slot in tuple.iter_mut().rev() {
        *slot = idx % l;
        idx /= l;
    }
}

/// Nonnegative cost `d(x, x')` of reporting `x'` when the truth is `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionMeasure {
    size: usize,
    d: Vec<f64>,
}

impl DistortionMeasure {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        Alphabet::new(size)?;
        let mut d = Vec::with_capacity(size * size);
        for row in rows {
            check_dim(size, row.len())?;
            for (index, value) in row.into_iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::InvalidProbability { index, value });
                }
                d.push(value);
            }
        }
        Ok(DistortionMeasure { size, d })
    }

    /// `d(x, x') = 1 - delta(x, x')`.
    pub fn hamming(alphabet: Alphabet) -> Self {
        let l = alphabet.size();
        let d = (0..l * l)
            .map(|i| if i / l == i % l { 0.0 } else { 1.0 })
            .collect();
        DistortionMeasure { size: l, d }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn d(&self, x: usize, x_hat: usize) -> f64 {
        self.d[x * self.size + x_hat]
    }

    pub fn max(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    /// Mean per-letter distortion between two sequences.
    pub fn sequence_distortion(&self, truth: &[Symbol], estimate: &[Symbol]) -> Result<f64> {
        check_dim(truth.len(), estimate.len())?;
        if truth.is_empty() {
            return Err(Error::EmptyInput);
        }
        let total: f64 = truth
            .iter()
            .zip(estimate)
            .map(|(&x, &y)| self.d(x as usize, y as usize))
            .sum();
        Ok(total / truth.len() as f64)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.size).map(<[f64]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn apply_channel_examples() {
        let p = Distribution::binary(0.7).unwrap();
        let id = Channel::identity(Alphabet::BINARY);
        assert_eq!(id.apply(&p).unwrap(), p);

        let out = Channel::bsc(BscParam::new(0.7).unwrap()).apply(&p).unwrap();
        assert!(close(out.prob(0), 0.7 * 0.7 + 0.3 * 0.3, 1e-15));
        assert!(close(out.prob(0), 0.58, 1e-12));

        let half = Channel::bsc(BscParam::new(0.5).unwrap());
        for p0 in [0.0, 0.2, 0.9] {
            let out = half.apply(&Distribution::binary(p0).unwrap()).unwrap();
            assert!(close(out.prob(0), 0.5, 1e-15));
        }
    }

    #[test]
    fn apply_channel_dimension_mismatch() {
        let p = Distribution::uniform(Alphabet::new(3).unwrap());
        let err = Channel::identity(Alphabet::BINARY).apply(&p).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn distribution_renormalizes_small_drift_only() {
        let d = Distribution::new(vec![0.5, 0.5 + 1e-13]).unwrap();
        assert_eq!(d.probs().iter().sum::<f64>(), 1.0);
        assert!(matches!(
            Distribution::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Distribution::new(vec![1.1, -0.1]),
            Err(Error::InvalidProbability { index: 1, .. })
        ));
        assert_eq!(
            Distribution::new(vec![0.2, 0.0, 0.8]).unwrap().support(),
            vec![0, 2]
        );
    }

    #[test]
    fn channel_rejects_non_stochastic_row() {
        let err = Channel::new(vec![vec![0.5, 0.5], vec![0.4, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::NotStochastic { row: 1, .. }));
    }

    #[test]
    fn product_output_examples() {
        let id = Channel::identity(Alphabet::BINARY);
        let sys = DependentComponentSystem::new(
            Distribution::binary(0.5).unwrap(),
            vec![id.clone(), id],
        )
        .unwrap();
        let q = sys.product_output().unwrap();
        assert_eq!(q.probs(), &[0.5, 0.0, 0.0, 0.5]);

        let sys = DependentComponentSystem::bsc(0.5, &[0.9, 0.8]).unwrap();
        let q = sys.product_output().unwrap();
        // 1/2 (0.9 * 0.8 + 0.1 * 0.2)
        for (got, want) in q.probs().iter().zip([0.37, 0.13, 0.13, 0.37]) {
            assert!(close(*got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn dcs_distance_examples() {
        let a = DependentComponentSystem::bsc(0.6, &[0.9]).unwrap();
        let b = DependentComponentSystem::bsc(0.6, &[0.8]).unwrap();
        assert_eq!(a.dcs_distance(&a).unwrap(), 0.0);
        assert!(close(a.dcs_distance(&b).unwrap(), 0.2, 1e-12));

        let c = DependentComponentSystem::bsc(1.0, &[0.9]).unwrap();
        let d = DependentComponentSystem::bsc(0.0, &[0.9]).unwrap();
        assert_eq!(c.dcs_distance(&d).unwrap(), 2.0);
    }

    #[test]
    fn compose_bsc_examples() {
        let b = BscParam::new(0.37).unwrap();
        assert_eq!(BscParam::compose(BscParam::new(1.0).unwrap(), b), b);
        let c = BscParam::compose(BscParam::new(0.9).unwrap(), BscParam::new(0.8).unwrap());
        assert!(close(c.value(), 0.74, 1e-15));
        let h = BscParam::new(0.5).unwrap();
        assert_eq!(BscParam::compose(h, h).value(), 0.5);
    }

    #[test]
    fn flip_system_examples() {
        let sys = DependentComponentSystem::bsc(0.7, &[0.9]).unwrap();
        assert_eq!(sys.flip_system(&Permutation::identity(2)).unwrap(), sys);
        let flipped = sys.flip_system(&Permutation::flip()).unwrap();
        assert!(close(flipped.source().prob(0), 0.3, 1e-15));
        assert!(close(flipped.source().prob(1), 0.7, 1e-15));
        assert!(close(flipped.channels()[0].w(0, 0), 0.1, 1e-15));
        assert!(close(flipped.channels()[0].w(1, 1), 0.1, 1e-15));
    }

    #[test]
    fn permutation_enumeration_is_lexicographic() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].images(), &[0, 1, 2]);
        assert_eq!(all[1].images(), &[0, 2, 1]);
        assert_eq!(all[5].images(), &[2, 1, 0]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(Permutation::new(vec![0, 0]).is_err());
        let t = Permutation::new(vec![2, 0, 1]).unwrap();
        let inv = t.inverse();
        assert!((0..3).all(|x| inv.apply(t.apply(x)) == x));
    }

    #[test]
    fn determinant_and_invertibility() {
        let b = Channel::bsc(BscParam::new(0.8).unwrap());
        assert!(close(b.determinant(), 0.6, 1e-15));
        assert!(!Channel::bsc(BscParam::new(0.5).unwrap()).is_invertible());
        let c = Channel::new(vec![
            vec![0.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.2, 0.3, 0.5],
        ])
        .unwrap();
        // expansion along the middle row
        assert!(close(c.determinant(), 0.5 * 0.5 - 0.5 * 0.2, 1e-15));
    }

    #[test]
    fn hamming_penalizes_disagreement() {
        let d = DistortionMeasure::hamming(Alphabet::new(3).unwrap());
        assert_eq!(d.d(1, 1), 0.0);
        assert_eq!(d.d(0, 2), 1.0);
        assert_eq!(d.sequence_distortion(&[0, 1, 2, 2], &[0, 1, 1, 2]).unwrap(), 0.25);
    }
}
