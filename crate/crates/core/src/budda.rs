//! Closed-form estimation for binary systems with symmetric channels.
//!
//! For a binary source `p` observed through BSCs with parameters `b_i`, the
//! marginals satisfy `1 - 2 q_i(0) = (1 - 2 b_i)(2 p(0) - 1)`, and the signed
//! sum `f_K(q) = sum_y (-1)^{|y|} q(y)` equals `prod_i (1 - 2 b_i)` for even
//! `K` regardless of `p`. Together they give the source bias
//!
//! ```text
//! |2 p(0) - 1| = (|prod_i (1 - 2 q_i(0))| / |f_K(q)|)^{1/K}
//! ```
//!
//! and each channel follows from its marginal by inverting a BSC. For odd
//! `K`, `f_K` is the `(K-1)`-th root of the product of the even `f_{K-1}`
//! values on the leave-one-out marginals, where every factor appears `K-1`
//! times.
//!
//! The estimator picks between two routes. When the source is visibly
//! biased, channels are inverted directly against the source estimate.
//! When it is close to uniform, the joint law is conditioned on the
//! majority symbol of one copy, which biases the conditional source while
//! leaving the other channels unchanged, and the channels are inverted
//! against the conditional source instead.
//!
//! Estimates are reported in the gauge where `p_hat(0) >= 1/2`; the true
//! system may be the global flip of the reported one.

use crate::empirical::{joint_empirical, JointDistribution, ObservationMatrix};
use crate::error::{Error, Result};
use crate::model::{BscParam, Distribution, Symbol};

pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Which source estimator the branch logic uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Estimator {
    /// `E_K` on the full joint law, conditioning on copies 1 and 2.
    #[default]
    Literal,
    /// `E_3` on the three most correlated copies, conditioning on the two
    /// copies whose conditionals carry the most source bias.
    Optimized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuddaConfig {
    /// Degeneracy threshold on `|f_K|` and on `|2 s(0) - 1|`.
    pub epsilon: f64,
    pub estimator: Estimator,
}

impl Default for BuddaConfig {
    fn default() -> Self {
        BuddaConfig {
            epsilon: DEFAULT_EPSILON,
            estimator: Estimator::Literal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Direct,
    Conditional,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Direct => "direct",
            Branch::Conditional => "conditional",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuddaDiagnostics {
    /// `||p_hat - pi||_1` with `pi` uniform.
    pub source_distance: f64,
    /// The conditional quantity the source distance is compared against.
    pub conditional_distance: f64,
    /// Copies conditioned on by the conditional route.
    pub conditioning_copies: (usize, usize),
    /// `(p_hat_1(0), p_hat_2(0))` when the conditional route ran.
    pub conditional_sources: Option<(f64, f64)>,
    /// Per channel: whether the raw estimate left `[0, 1]` and was clamped.
    pub clamped: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuddaEstimate {
    pub p_hat: Distribution,
    pub b_hat: Vec<BscParam>,
    pub branch: Branch,
    /// Majority symbol of the first copy (ties go to 0).
    pub majority_symbol: Symbol,
    pub diagnostics: BuddaDiagnostics,
}

fn require_binary(q: &JointDistribution) -> Result<()> {
    if q.alphabet().is_binary() {
        Ok(())
    } else {
        Err(Error::NonBinaryAlphabet(q.alphabet().size()))
    }
}

/// Signed `f_K` without the degeneracy check.
fn f_k_raw(q: &JointDistribution) -> Result<f64> {
    require_binary(q)?;
    let k = q.k();
    if k < 2 {
        return Err(Error::TooFewCopies { required: 2, found: k });
    }
    if k.is_multiple_of(2) {
        return q.f_k_even();
    }
    let mut prod = 1.0;
    for i in 0..k {
        prod *= q.marginal_excluding(i)?.f_k_even()?;
    }
    Ok(prod.signum() * prod.abs().powf(1.0 / (k - 1) as f64))
}

/// `f_K(q)`; fails with [`Error::DegenerateChannel`] when `|f_K| < epsilon`.
pub fn f_k(q: &JointDistribution, epsilon: f64) -> Result<f64> {
    let f = f_k_raw(q)?;
    if f.abs() < epsilon {
        return Err(Error::DegenerateChannel { context: "f_k", value: f });
    }
    Ok(f)
}

/// `E_K(q)`: the estimated probability of the more likely source symbol,
/// in `[1/2, 1]`.
pub fn e_k(q: &JointDistribution, epsilon: f64) -> Result<f64> {
    let f = f_k(q, epsilon).map_err(|e| e.with_context("e_k"))?;
    let k = q.k();
    let mut num = 1.0;
    for i in 0..k {
        num *= 1.0 - 2.0 * q.marginal(i)?.prob(0);
    }
    let bias = (num.abs() / f.abs()).powf(1.0 / k as f64);
    Ok((0.5 * (1.0 + bias)).clamp(0.5, 1.0))
}

/// `b(r, s) = (s(0) + r(0) - 1) / (2 s(0) - 1)`: the BSC parameter mapping
/// `s` to `r`. Returns the clamped parameter and whether clamping occurred.
pub fn bsc_from_pair(r: &Distribution, s: &Distribution, epsilon: f64) -> Result<(BscParam, bool)> {
    Ok(BscParam::clamped(bsc_from_pair_raw(r, s, epsilon)?))
}

fn bsc_from_pair_raw(r: &Distribution, s: &Distribution, epsilon: f64) -> Result<f64> {
    if !r.alphabet().is_binary() || !s.alphabet().is_binary() {
        return Err(Error::NonBinaryAlphabet(r.alphabet().size().max(s.alphabet().size())));
    }
    let denom = 2.0 * s.prob(0) - 1.0;
    if denom.abs() < epsilon {
        return Err(Error::DegenerateSource {
            context: "bsc_from_pair",
            value: denom,
        });
    }
    Ok((s.prob(0) + r.prob(0) - 1.0) / denom)
}

fn majority(q: &JointDistribution, i: usize) -> Result<Symbol> {
    let m = q.marginal(i)?;
    Ok(if m.prob(1) > m.prob(0) { 1 } else { 0 })
}

fn bias(p0: f64) -> f64 {
    (2.0 * p0 - 1.0).abs()
}

/// `E_3` on the three most mutually correlated coordinates (`E_K` when
/// `K <= 3`).
fn informative_e(q: &JointDistribution, epsilon: f64) -> Result<f64> {
    let k = q.k();
    if k <= 3 {
        return e_k(q, epsilon);
    }
    let mut corr = vec![0.0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let c = q.marginal_onto(&[i, j])?.f_k_even()?.abs();
            corr[i * k + j] = c;
            corr[j * k + i] = c;
        }
    }
    let (mut a, mut b) = (0, 1);
    for i in 0..k {
        for j in i + 1..k {
            if corr[i * k + j] > corr[a * k + b] {
                (a, b) = (i, j);
            }
        }
    }
    let mut third = None;
    for t in (0..k).filter(|&t| t != a && t != b) {
        let s = corr[a * k + t].min(corr[b * k + t]);
        if third.is_none_or(|(_, best)| s > best) {
            third = Some((t, s));
        }
    }
    let mut coords = [a, b, third.expect("k > 3").0];
    coords.sort_unstable();
    e_k(&q.marginal_onto(&coords)?, epsilon)
}

fn source_estimate(q: &JointDistribution, config: &BuddaConfig) -> Result<f64> {
    match config.estimator {
        Estimator::Literal => e_k(q, config.epsilon),
        Estimator::Optimized => informative_e(q, config.epsilon),
    }
}

/// Conditions on `copy = symbol` and inverts every other channel against the
/// conditional source estimate, placed with its larger mass on symbol 0.
/// Entry `copy` of the result is NaN.
fn conditional_channels(
    q: &JointDistribution,
    copy: usize,
    symbol: Symbol,
    config: &BuddaConfig,
) -> Result<(f64, Vec<f64>)> {
    // the conditional law drops coordinate `copy`
    let cond = q.condition_on(copy, symbol)?;
    let p_c = source_estimate(&cond, config).map_err(|e| e.with_context("conditional source"))?;
    let s = Distribution::binary(p_c)?;
    let mut b = vec![f64::NAN; q.k()];
    for (i, slot) in b.iter_mut().enumerate() {
        if i != copy {
            let j = if i < copy { i } else { i - 1 };
            *slot = bsc_from_pair_raw(&cond.marginal(j)?, &s, config.epsilon)
                .map_err(|e| e.with_context("conditional channel"))?;
        }
    }
    Ok((p_c, b))
}

/// Channel estimates from two conditionals, brought into one gauge through
/// the channels both of them estimate.
fn combine_conditionals(b1: &[f64], b2: &[f64], c1: usize, c2: usize) -> Vec<f64> {
    let shared = || (0..b1.len()).filter(|&i| i != c1 && i != c2);
    let same: f64 = shared().map(|i| (b1[i] - b2[i]).abs()).sum();
    let flipped: f64 = shared().map(|i| (b1[i] - (1.0 - b2[i])).abs()).sum();
    let mut b = b1.to_vec();
    b[c1] = if flipped < same { 1.0 - b2[c1] } else { b2[c1] };
    b
}

/// Flips `b` if the source placed as `(1 - p0, p0)` explains the marginals
/// better than `(p0, 1 - p0)`, so that `(p0, b)` is one consistent system.
fn orient_to_source(q: &JointDistribution, p0: f64, b: &mut [f64]) -> Result<()> {
    let mut err = [0.0, 0.0];
    for (i, &bi) in b.iter().enumerate() {
        let obs = q.marginal(i)?.prob(0);
        for (slot, s0) in err.iter_mut().zip([p0, 1.0 - p0]) {
            *slot += (bi * s0 + (1.0 - bi) * (1.0 - s0) - obs).abs();
        }
    }
    if err[1] < err[0] {
        b.iter_mut().for_each(|x| *x = 1.0 - *x);
    }
    Ok(())
}

fn check_input(q: &JointDistribution) -> Result<()> {
    require_binary(q)?;
    if q.k() < 3 {
        return Err(Error::TooFewCopies { required: 3, found: q.k() });
    }
    if q.is_point_mass() {
        return Err(Error::AllCopiesConstant);
    }
    Ok(())
}

fn finish(
    p0: f64,
    raw: Vec<f64>,
    branch: Branch,
    majority_symbol: Symbol,
    mut diagnostics: BuddaDiagnostics,
) -> Result<BuddaEstimate> {
    let (b_hat, clamped): (Vec<_>, Vec<_>) = raw.into_iter().map(BscParam::clamped).unzip();
    diagnostics.clamped = clamped;
    Ok(BuddaEstimate {
        p_hat: Distribution::binary(p0)?,
        b_hat,
        branch,
        majority_symbol,
        diagnostics,
    })
}

/// Runs the direct route on `q`: `b_i = b(q_i, p_hat)` for every copy.
pub fn estimate_direct(q: &JointDistribution, config: &BuddaConfig) -> Result<BuddaEstimate> {
    check_input(q)?;
    let p0 = source_estimate(q, config)?;
    let s = Distribution::binary(p0)?;
    let raw = (0..q.k())
        .map(|i| {
            bsc_from_pair_raw(&q.marginal(i)?, &s, config.epsilon).map_err(|e| e.with_context("direct channel"))
        })
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = BuddaDiagnostics {
        source_distance: bias(p0),
        conditional_distance: f64::NAN,
        conditioning_copies: (0, 1),
        conditional_sources: None,
        clamped: Vec::new(),
    };
    finish(p0, raw, Branch::Direct, majority(q, 0)?, diagnostics)
}

/// Runs the conditional route on `q`, conditioning on copy `c1` and copy
/// `c2` each taking its own `symbol`.
pub fn estimate_conditional(
    q: &JointDistribution,
    (c1, s1): (usize, Symbol),
    (c2, s2): (usize, Symbol),
    config: &BuddaConfig,
) -> Result<BuddaEstimate> {
    check_input(q)?;
    if c1 == c2 || c1 >= q.k() || c2 >= q.k() {
        return Err(Error::InvalidArgument(format!(
            "conditioning copies must be distinct and below {}, got {c1} and {c2}",
            q.k()
        )));
    }
    let p0 = source_estimate(q, config)?;
    let (p1, b1) = conditional_channels(q, c1, s1, config)?;
    let (p2, b2) = conditional_channels(q, c2, s2, config)?;
    let mut raw = combine_conditionals(&b1, &b2, c1, c2);
    orient_to_source(q, p0, &mut raw)?;
    let diagnostics = BuddaDiagnostics {
        source_distance: bias(p0),
        conditional_distance: f64::NAN,
        conditioning_copies: (c1, c2),
        conditional_sources: Some((p1, p2)),
        clamped: Vec::new(),
    };
    finish(p0, raw, Branch::Conditional, majority(q, 0)?, diagnostics)
}

/// Branch selection and estimation on a joint law; [`budda_estimate`] is this
/// applied to the joint empirical distribution.
pub fn budda_estimate_joint(q: &JointDistribution, config: &BuddaConfig) -> Result<BuddaEstimate> {
    check_input(q)?;
    let m = majority(q, 0)?;
    let (source_distance, conditional_distance, first, second) = match config.estimator {
        Estimator::Literal => {
            let p0 = e_k(q, config.epsilon)?;
            let cond = q.condition_on(0, m)?;
            let mut nearest = f64::INFINITY;
            for i in 0..cond.k() {
                nearest = nearest.min(bias(cond.marginal(i)?.prob(0)));
            }
            (bias(p0), nearest, (0, m), (1, m))
        }
        Estimator::Optimized => {
            let p0 = informative_e(q, config.epsilon)?;
            // source bias left after conditioning on each copy's own majority
            let mut ranked = Vec::with_capacity(q.k());
            for c in 0..q.k() {
                let mc = majority(q, c)?;
                let rest = q.condition_on(c, mc)?;
                let beta = informative_e(&rest, config.epsilon).map(bias).unwrap_or(0.0);
                ranked.push((c, mc, beta));
            }
            ranked.sort_by(|a, b| b.2.total_cmp(&a.2));
            let (c1, m1, _) = ranked[0];
            let (c2, m2, beta2) = ranked[1];
            (bias(p0), beta2, (c1, m1), (c2, m2))
        }
    };

    let mut est = if source_distance >= conditional_distance {
        estimate_direct(q, config)?
    } else {
        estimate_conditional(q, first, second, config)?
    };
    est.majority_symbol = m;
    est.diagnostics.source_distance = source_distance;
    est.diagnostics.conditional_distance = conditional_distance;
    est.diagnostics.conditioning_copies = (first.0, second.0);
    Ok(est)
}

/// Estimates the source and all channels from `K >= 3` binary copies.
pub fn budda_estimate(obs: &ObservationMatrix, config: &BuddaConfig) -> Result<BuddaEstimate> {
    budda_estimate_joint(&joint_empirical(obs)?, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, Channel, DependentComponentSystem};

    fn q_of(p0: f64, bs: &[f64]) -> JointDistribution {
        DependentComponentSystem::bsc(p0, bs).unwrap().product_output().unwrap()
    }

    #[test]
    fn f_k_examples() {
        let f2 = f_k(&q_of(0.3, &[0.9, 0.8]), DEFAULT_EPSILON).unwrap();
        assert!((f2 - 0.48).abs() < 1e-12);
        let f3 = f_k(&q_of(0.3, &[0.9, 0.8, 0.7]), DEFAULT_EPSILON).unwrap();
        assert!((f3.abs() - 0.192).abs() < 1e-12);
        let err = f_k(&q_of(0.3, &[0.9, 0.5, 0.7]), DEFAULT_EPSILON).unwrap_err();
        assert!(matches!(err, Error::DegenerateChannel { .. }));
    }

    #[test]
    fn e_k_examples() {
        let id = Channel::identity(Alphabet::BINARY);
        for k in 2..6 {
            let sys = DependentComponentSystem::new(Distribution::binary(0.7).unwrap(), vec![id.clone(); k]).unwrap();
            let e = e_k(&sys.product_output().unwrap(), DEFAULT_EPSILON).unwrap();
            assert!((e - 0.7).abs() < 1e-12, "k={k}: {e}");
        }
        let e = e_k(&q_of(0.55, &[0.9, 0.8, 0.7]), DEFAULT_EPSILON).unwrap();
        assert!((e - 0.55).abs() < 1e-12);
        let e = e_k(&q_of(0.5, &[0.9, 0.8, 0.7]), DEFAULT_EPSILON).unwrap();
        assert_eq!(e, 0.5);
    }

    #[test]
    fn bsc_from_pair_examples() {
        let s = Distribution::binary(0.7).unwrap();
        let (b, clamped) = bsc_from_pair(&s, &s, DEFAULT_EPSILON).unwrap();
        assert!((b.value() - 1.0).abs() < 1e-12 && !clamped);
        let r = Distribution::binary(0.58).unwrap();
        let (b, _) = bsc_from_pair(&r, &s, DEFAULT_EPSILON).unwrap();
        assert!((b.value() - 0.7).abs() < 1e-12);
        let back = b.channel().apply(&s).unwrap();
        assert!(back.l1_distance(&r).unwrap() < 1e-12);
        let u = Distribution::binary(0.5).unwrap();
        assert!(matches!(
            bsc_from_pair(&r, &u, DEFAULT_EPSILON),
            Err(Error::DegenerateSource { .. })
        ));
        let (b, clamped) = bsc_from_pair(&Distribution::binary(0.9).unwrap(), &s, DEFAULT_EPSILON).unwrap();
        assert!(clamped && b.value() == 1.0);
    }

    #[test]
    fn noiseless_copies() {
        let x: Vec<Symbol> = (0..400).map(|i| u8::from(i % 4 == 3)).collect();
        let obs = ObservationMatrix::from_columns(Alphabet::BINARY, &[x.clone(), x.clone(), x]).unwrap();
        let est = budda_estimate(&obs, &BuddaConfig::default()).unwrap();
        assert!((est.p_hat.prob(0) - 0.75).abs() < 1e-12);
        for b in &est.b_hat {
            assert!((b.value() - 1.0).abs() < 1e-12);
        }
        // conditionals are point masses, farther from uniform than the source
        assert_eq!(est.branch, Branch::Conditional);
    }

    #[test]
    fn uniform_source_takes_conditional_branch() {
        let q = q_of(0.5, &[0.9, 0.8, 0.7]);
        let est = budda_estimate_joint(&q, &BuddaConfig::default()).unwrap();
        assert_eq!(est.branch, Branch::Conditional);
        assert!(est.diagnostics.source_distance < est.diagnostics.conditional_distance);
        let truth = [0.9, 0.8, 0.7];
        let direct = est.b_hat.iter().zip(truth).all(|(b, t)| (b.value() - t).abs() < 1e-9);
        let flipped = est.b_hat.iter().zip(truth).all(|(b, t)| (b.value() - (1.0 - t)).abs() < 1e-9);
        assert!(direct || flipped, "{:?}", est.b_hat);
    }

    #[test]
    fn exact_recovery_in_source_majority_gauge() {
        for estimator in [Estimator::Literal, Estimator::Optimized] {
            let config = BuddaConfig { estimator, ..Default::default() };
            let est = budda_estimate_joint(&q_of(0.3, &[0.9, 0.2, 0.75, 0.6]), &config).unwrap();
            assert!((est.p_hat.prob(0) - 0.7).abs() < 1e-9);
            for (b, t) in est.b_hat.iter().zip([0.1, 0.8, 0.25, 0.4]) {
                assert!((b.value() - t).abs() < 1e-9, "{estimator:?}: {:?}", est.b_hat);
            }
        }
    }

    #[test]
    fn rejects_point_mass_and_two_copies() {
        let zeros = vec![0u8; 10];
        let obs = ObservationMatrix::from_columns(Alphabet::BINARY, &[zeros.clone(), zeros.clone(), zeros.clone()]).unwrap();
        assert!(matches!(budda_estimate(&obs, &BuddaConfig::default()), Err(Error::AllCopiesConstant)));
        let obs = ObservationMatrix::from_columns(Alphabet::BINARY, &[zeros.clone(), zeros]).unwrap();
        assert!(matches!(
            budda_estimate(&obs, &BuddaConfig::default()),
            Err(Error::TooFewCopies { .. })
        ));
    }
}
