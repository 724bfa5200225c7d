//! Dependent component analysis: fit a source distribution and `K` general
//! channels whose joint output matches an observed joint distribution.
//!
//! The model is only identifiable up to a relabeling of the hidden symbol,
//! and only for `K >= 3` copies through invertible channels. The fit
//! minimizes the squared L2 distance between the model output and the
//! target by block alternating minimization:
//!
//! * each channel row is an exact block minimizer. With every other block
//!   fixed the objective is `a * ||u + beta / a||^2 + const` in the row `u`,
//!   so the update is a single simplex projection;
//! * the source is updated by projected gradient steps with step size
//!   `1 / trace(M^T M)`, which never increases the objective;
//! * after each sweep, an extrapolated point along the sweep direction is
//!   tried and accepted only when it lowers the objective.
//!
//! Restarts draw their starting points from a flat Dirichlet distribution
//! and are ordered by `(L1 residual, restart index)`. After convergence the
//! winner is rotated into canonical orientation (nonincreasing source), which
//! fixes the permutation gauge without constraining the inner updates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::empirical::JointDistribution;
use crate::error::{Error, Result};
use crate::model::{decode_index, Channel, DependentComponentSystem, Distribution, Permutation};
use crate::simplex::project_onto_simplex;

/// Determinant magnitude below which a fitted channel is reported as near-singular.
pub const NEAR_SINGULAR_DET: f64 = 0.05;

/// Fitted source mass below which the fit is reported as near the boundary.
pub const SMALL_SOURCE_MASS: f64 = 1e-3;

const SOURCE_STEPS: usize = 100;
const MAX_JUMP: f64 = 64.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DcaConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Accept a restart once its L1 residual is at most this.
    pub tolerance: f64,
    /// Stop a restart when one sweep lowers the objective by less than this
    /// fraction of its current value.
    pub min_decrease: f64,
    /// Stop at the first restart meeting `tolerance` instead of running all.
    pub early_stop: bool,
    pub seed: u64,
}

impl Default for DcaConfig {
    fn default() -> Self {
        DcaConfig {
            restarts: 16,
            max_sweeps: 500,
            tolerance: 1e-6,
            min_decrease: 1e-12,
            early_stop: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DcaWarning {
    /// Fewer than three copies: the decomposition is not unique.
    TooFewCopies { k: usize },
    NearSingularChannel { copy: usize, determinant: f64 },
    SmallSourceMass { symbol: usize, mass: f64 },
}

/// Result of a single restart, already in canonical orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct DcaCandidate {
    pub restart: usize,
    pub system: DependentComponentSystem,
    pub residual_l1: f64,
    pub residual_l2: f64,
    pub sweeps: usize,
    /// Squared L2 objective after every sweep.
    pub objective_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DcaFit {
    pub system: DependentComponentSystem,
    pub residual_l1: f64,
    pub residual_l2: f64,
    pub restarts_used: usize,
    pub converged: bool,
    pub non_identifiable: bool,
    pub warnings: Vec<DcaWarning>,
    pub candidates: Vec<DcaCandidate>,
}

impl DcaFit {
    /// The fit, or [`Error::MaxRestartsExceeded`] if no restart met the tolerance.
    pub fn require_converged(&self) -> Result<&DcaFit> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxRestartsExceeded {
                best: self.residual_l1,
            })
        }
    }
}

/// Joint output of a system; the forward map the fit inverts.
pub fn theta_forward(sys: &DependentComponentSystem) -> Result<JointDistribution> {
    sys.product_output()
}

/// Relabels the hidden symbol so the source is nonincreasing.
///
/// Ties keep index order, which selects the lexicographically smallest
/// sorting permutation.
pub fn canonical_orientation(sys: &DependentComponentSystem) -> Result<DependentComponentSystem> {
    let p = sys.source().probs();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
    let mut tau = vec![0; p.len()];
    for (rank, &x) in order.iter().enumerate() {
        tau[x] = rank;
    }
    sys.flip_system(&Permutation::new(tau)?)
}

/// Working state of one restart: source plus row-major channel matrices.
#[derive(Clone)]
struct State {
    l: usize,
    source: Vec<f64>,
    channels: Vec<Vec<f64>>,
}

impl State {
    /// `self + s * (self - prev)`, projected back onto the simplices.
    fn extrapolate(&self, prev: &State, s: f64) -> State {
        let step = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let mut v: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + s * (x - y)).collect();
            v.chunks_mut(self.l).for_each(project_onto_simplex);
            v
        };
        State {
            l: self.l,
            source: step(&self.source, &prev.source),
            channels: self
                .channels
                .iter()
                .zip(&prev.channels)
                .map(|(a, b)| step(a, b))
                .collect(),
        }
    }
}

/// Cell tuples and target values shared by every restart.
struct Problem<'a> {
    l: usize,
    k: usize,
    tuples: Vec<usize>,
    target: &'a [f64],
}

impl Problem<'_> {
    #[inline]
    fn tuple(&self, idx: usize) -> &[usize] {
        &self.tuples[idx * self.k..(idx + 1) * self.k]
    }

    /// `prod_j v_j(y_j | x)` for cell `idx`, skipping copy `skip`.
    #[inline]
    fn path(&self, st: &State, idx: usize, x: usize, skip: Option<usize>) -> f64 {
        let l = self.l;
        self.tuple(idx)
            .iter()
            .enumerate()
            .filter(|&(j, _)| Some(j) != skip)
            .fold(1.0, |acc, (j, &y)| acc * st.channels[j][x * l + y])
    }

    fn model(&self, st: &State) -> Vec<f64> {
        (0..self.target.len())
            .map(|idx| (0..self.l).map(|x| st.source[x] * self.path(st, idx, x, None)).sum())
            .collect()
    }

    fn objective(&self, st: &State) -> f64 {
        self.model(st)
            .iter()
            .zip(self.target)
            .map(|(m, q)| (m - q) * (m - q))
            .sum()
    }

    /// Exact minimization over row `x` of channel `j`.
    fn update_row(&self, st: &mut State, j: usize, x: usize) {
        let l = self.l;
        let model = self.model(st);
        let mut alpha = 0.0;
        let mut beta = vec![0.0; l];
        for (idx, (&m, &q)) in model.iter().zip(self.target).enumerate() {
            let a = st.source[x] * self.path(st, idx, x, Some(j));
            let y = self.tuple(idx)[j];
            let c = m - st.channels[j][x * l + y] * a - q;
            beta[y] += c * a;
            // alpha sums a^2 over y_{-j}; the cells with y_j = 0 enumerate it once
            if y == 0 {
                alpha += a * a;
            }
        }
        if alpha <= f64::MIN_POSITIVE {
            return;
        }
        let mut row: Vec<f64> = beta.iter().map(|b| -b / alpha).collect();
        project_onto_simplex(&mut row);
        st.channels[j][x * l..(x + 1) * l].copy_from_slice(&row);
    }

    fn update_source(&self, st: &mut State) {
        let l = self.l;
        let cells = self.target.len();
        let mut m = vec![0.0; cells * l];
        for idx in 0..cells {
            for x in 0..l {
                m[idx * l + x] = self.path(st, idx, x, None);
            }
        }
        let mut gram = vec![0.0; l * l];
        let mut h = vec![0.0; l];
        for idx in 0..cells {
            let row = &m[idx * l..(idx + 1) * l];
            for a in 0..l {
                h[a] += row[a] * self.target[idx];
                for b in 0..l {
                    gram[a * l + b] += row[a] * row[b];
                }
            }
        }
        let trace: f64 = (0..l).map(|a| gram[a * l + a]).sum();
        if trace <= f64::MIN_POSITIVE {
            return;
        }
        let step = 1.0 / trace;
        let mut r = st.source.clone();
        for _ in 0..SOURCE_STEPS {
            let mut next: Vec<f64> = (0..l)
                .map(|a| {
                    let g: f64 = (0..l).map(|b| gram[a * l + b] * r[b]).sum::<f64>() - h[a];
                    r[a] - step * g
                })
                .collect();
            project_onto_simplex(&mut next);
            let moved: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
            r = next;
            if moved < 1e-16 {
                break;
            }
        }
        st.source = r;
    }
}

fn random_simplex_point(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    // flat Dirichlet via normalized unit exponentials
    let mut v: Vec<f64> = (0..l).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn to_system(st: &State) -> Result<DependentComponentSystem> {
    let mut source = st.source.clone();
    project_onto_simplex(&mut source);
    let channels = st
        .channels
        .iter()
        .map(|rows| {
            let mut rows = rows.clone();
            rows.chunks_mut(st.l).for_each(project_onto_simplex);
            Channel::from_flat_unchecked(st.l, rows)
        })
        .collect();
    DependentComponentSystem::new(Distribution::from_computed(source)?, channels)
}

fn run_restart(problem: &Problem, q: &JointDistribution, restart: usize, config: &DcaConfig) -> Result<DcaCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let l = problem.l;
    let source = random_simplex_point(&mut rng, l);
    let channels = (0..problem.k)
        .map(|_| (0..l).flat_map(|_| random_simplex_point(&mut rng, l)).collect())
        .collect();
    let mut st = State { l, source, channels };

    let mut trace = Vec::with_capacity(config.max_sweeps);
    let mut prev = problem.objective(&st);
    let mut sweeps = 0;
    let mut jump = 1.0;
    while sweeps < config.max_sweeps {
        let start = st.clone();
        for j in 0..problem.k {
            for x in 0..l {
                problem.update_row(&mut st, j, x);
            }
        }
        problem.update_source(&mut st);
        sweeps += 1;
        let mut obj = problem.objective(&st);
        // extrapolate along the sweep direction; kept only if it helps
        let trial = st.extrapolate(&start, jump);
        let trial_obj = problem.objective(&trial);
        if trial_obj < obj {
            st = trial;
            obj = trial_obj;
            jump = (jump * 1.5).min(MAX_JUMP);
        } else {
            jump = 1.0;
        }
        if obj > prev {
            // rounding at the noise floor; keep the previous iterate and stop
            st = start;
            obj = prev;
        }
        trace.push(obj);
        let decrease = prev - obj;
        prev = obj;
        if decrease < config.min_decrease * obj || obj < 1e-30 {
            break;
        }
    }

    let system = canonical_orientation(&to_system(&st)?)?;
    let fitted = theta_forward(&system)?;
    Ok(DcaCandidate {
        restart,
        residual_l1: fitted.l1_distance(q)?,
        residual_l2: fitted.l2_distance(q)?,
        system,
        sweeps,
        objective_trace: trace,
    })
}

/// Fits `(r, V_1, .., V_K)` to `q`.
///
/// Always returns the best candidate; `converged` records whether it met
/// `config.tolerance` on the L1 residual.
pub fn dca_fit(q: &JointDistribution, config: &DcaConfig) -> Result<DcaFit> {
    if config.restarts == 0 {
        return Err(Error::InvalidArgument("dca needs at least one restart".into()));
    }
    let l = q.alphabet().size();
    let k = q.k();
    let cells = q.probs().len();
    let mut tuples = vec![0usize; cells * k];
    for (idx, t) in tuples.chunks_mut(k).enumerate() {
        decode_index(idx, l, t);
    }
    let problem = Problem {
        l,
        k,
        tuples,
        target: q.probs(),
    };

    let mut candidates: Vec<DcaCandidate> = Vec::with_capacity(config.restarts);
    for restart in 0..config.restarts {
        let cand = run_restart(&problem, q, restart, config)?;
        let done = config.early_stop && cand.residual_l1 <= config.tolerance;
        candidates.push(cand);
        if done {
            break;
        }
    }

    let best = candidates
        .iter()
        .min_by(|a, b| {
            a.residual_l1
                .total_cmp(&b.residual_l1)
                .then(a.restart.cmp(&b.restart))
        })
        .expect("at least one restart")
        .clone();

    let mut warnings = Vec::new();
    if k < 3 {
        warnings.push(DcaWarning::TooFewCopies { k });
    }
    for (copy, ch) in best.system.channels().iter().enumerate() {
        let determinant = ch.determinant();
        if determinant.abs() < NEAR_SINGULAR_DET {
            warnings.push(DcaWarning::NearSingularChannel { copy, determinant });
        }
    }
    for (symbol, &mass) in best.system.source().probs().iter().enumerate() {
        if mass < SMALL_SOURCE_MASS {
            warnings.push(DcaWarning::SmallSourceMass { symbol, mass });
        }
    }
    let non_identifiable = warnings
        .iter()
        .any(|w| matches!(w, DcaWarning::TooFewCopies { .. } | DcaWarning::NearSingularChannel { .. }));

    Ok(DcaFit {
        converged: best.residual_l1 <= config.tolerance,
        system: best.system,
        residual_l1: best.residual_l1,
        residual_l2: best.residual_l2,
        restarts_used: candidates.len(),
        non_identifiable,
        warnings,
        candidates,
    })
}
