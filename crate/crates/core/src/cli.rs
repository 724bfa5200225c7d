//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for malformed input or usage, 3 when the data
//! is too uninformative to estimate from.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::budda::{budda_estimate, BuddaConfig, BuddaEstimate, Estimator, DEFAULT_EPSILON};
use crate::dca::{dca_fit, DcaConfig, DcaFit, DcaWarning};
use crate::empirical::{joint_empirical, type_of, ObservationMatrix};
use crate::error::{Error, Result};
use crate::io::{
    read_channels, read_image, read_observation_dir, read_pbm, read_system, round12, write_observation_dir,
    write_pbm, write_report, BinaryImage, Manifest, ObservationSet, PbmEncoding, Report, Residuals, SystemFile,
};
use crate::mca::{
    build_mca, colour_agnostic_baseline, decode, labeling_distortion, majority_decode, majority_labeling,
    permutation_min_distortion, McaDecoder,
};
use crate::model::{Alphabet, Channel, DependentComponentSystem, Distribution, DistortionMeasure, Symbol};
use crate::sim::{corrupt, random_bscs, synthesize_source, SourceMode, RNG_ALGORITHM};

#[derive(Debug, Parser)]
#[command(name = "unidenoise", version, about = "Denoise a sequence from several independently corrupted copies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrupt a source image or synthetic sequence into K noisy copies.
    Simulate(SimulateArgs),
    /// Estimate the source distribution and channels from an observation directory.
    Estimate(EstimateArgs),
    /// Estimate, build the MCA decoder and write the reconstruction.
    Denoise(DenoiseArgs),
    /// Distortion between two images, minimized over symbol relabelings.
    Evaluate(EvaluateArgs),
    /// Reference decoders: per-row majority vote or the best single copy.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Iid,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Source image (PBM, or PGM thresholded at 50%).
    #[arg(long, conflicts_with_all = ["p", "n"])]
    pub image: Option<PathBuf>,
    /// Source type: `p0` for binary, or comma-separated probabilities.
    #[arg(long, requires = "n")]
    pub p: Option<String>,
    /// Length of the synthetic source.
    #[arg(long, requires = "p")]
    pub n: Option<usize>,
    /// Image width for synthetic sources (default: square if n is a square, else n).
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Channel file: `index,b00` CSV of BSCs or JSON matrices.
    #[arg(long, conflicts_with = "random_bsc")]
    pub channels: Option<PathBuf>,
    /// Draw K random BSCs instead of reading a channel file.
    #[arg(long, value_name = "K")]
    pub random_bsc: Option<usize>,
    /// Minimum |b - 1/2| for random BSCs.
    #[arg(long, default_value_t = 0.1)]
    pub min_gap: f64,
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum EstimateMethod {
    Budda,
    Dca,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum DenoiseMethod {
    Budda,
    Dca,
    Genie,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Literal,
    Optimized,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    /// BUDDA degeneracy threshold.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// BUDDA source estimator.
    #[arg(long, value_enum, default_value = "literal")]
    pub estimator: EstimatorArg,
    /// DCA restarts.
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// DCA sweeps per restart.
    #[arg(long, default_value_t = 500)]
    pub max_sweeps: usize,
    /// DCA acceptance tolerance on the L1 residual.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Seed for DCA restarts (required with --method dca).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long, value_enum)]
    pub method: EstimateMethod,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long, value_enum)]
    pub method: DenoiseMethod,
    /// True system for `genie` (default: the one recorded in the manifest).
    #[arg(long)]
    pub truth_system: Option<PathBuf>,
    /// `hamming` or a JSON distortion matrix.
    #[arg(long, default_value = "hamming")]
    pub distortion: String,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Reconstructed image; the inverted image is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Report path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub estimate: PathBuf,
    #[arg(long, default_value = "hamming")]
    pub distortion: String,
    /// Also write a JSON summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum BaselineRule {
    Majority,
    ColourAgnostic,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long, value_enum)]
    pub rule: BaselineRule,
    /// True system (default: the one recorded in the manifest).
    #[arg(long)]
    pub truth_system: Option<PathBuf>,
    #[arg(long, default_value = "hamming")]
    pub distortion: String,
    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `std::env::args`, runs, prints errors and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_degenerate() {
        3
    } else {
        2
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Denoise(a) => denoise(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Baseline(a) => baseline(a),
    }
}

fn parse_type(text: &str) -> Result<Distribution> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad probability {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    match values.as_slice() {
        [p0] => Distribution::binary(*p0),
        _ => Distribution::new(values),
    }
}

fn default_width(n: usize) -> usize {
    let r = (n as f64).sqrt().round() as usize;
    if r * r == n {
        r
    } else {
        n
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (x, width, source) = match (&a.image, &a.p, a.n) {
        (Some(path), None, None) => {
            let (img, lossy) = read_image(path)?;
            if lossy {
                eprintln!("warning: {} is grayscale; thresholded at 50%", path.display());
            }
            let p = type_of(&img.pixels, Alphabet::BINARY)?;
            (img.pixels, img.width, p)
        }
        (None, Some(p), Some(n)) => {
            let p = parse_type(p)?;
            let mode = match a.mode {
                ModeArg::Exact => SourceMode::Exact,
                ModeArg::Iid => SourceMode::Iid,
            };
            let x = synthesize_source(&p, n, a.seed, mode)?;
            (x, a.width.unwrap_or_else(|| default_width(n)), p)
        }
        _ => return Err(Error::InvalidArgument("give either --image or both --p and --n".into())),
    };
    let channels: Vec<Channel> = match (&a.channels, a.random_bsc) {
        (Some(path), None) => read_channels(path)?,
        (None, Some(k)) => random_bscs(k, a.seed, a.min_gap)?.into_iter().map(Channel::bsc).collect(),
        _ => return Err(Error::InvalidArgument("give either --channels or --random-bsc".into())),
    };
    if channels.iter().any(|c| c.size() != source.probs().len()) {
        return Err(Error::InvalidArgument(format!(
            "channels act on {} symbols, source has {}",
            channels[0].size(),
            source.probs().len()
        )));
    }
    if source.probs().len() != 2 {
        return Err(Error::NonBinaryAlphabet(source.probs().len()));
    }
    let obs = corrupt(&x, &channels, a.seed)?;
    let system = DependentComponentSystem::new(source, channels)?;
    let truth = BinaryImage::new(width, x.len() / width.max(1), x)?;
    let manifest = Manifest {
        n: 0,
        k: 0,
        width,
        height: 0,
        seed: a.seed,
        rng: RNG_ALGORITHM.into(),
        copies: Vec::new(),
        system: Some(SystemFile::from_system(&system)),
        truth: None,
    };
    write_observation_dir(&a.out, &obs, width, Some(&truth), manifest)?;
    eprintln!("wrote {} copies of {} symbols to {}", obs.k(), obs.n(), a.out.display());
    Ok(())
}

fn read_distortion(spec: &str, alphabet: Alphabet) -> Result<DistortionMeasure> {
    if spec == "hamming" {
        return Ok(DistortionMeasure::hamming(alphabet));
    }
    let rows: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(spec)?)
        .map_err(|e| Error::InvalidArgument(format!("distortion file {spec}: {e}")))?;
    let d = DistortionMeasure::new(rows)?;
    if d.size() != alphabet.size() {
        return Err(Error::DimensionMismatch {
            expected: alphabet.size(),
            found: d.size(),
        });
    }
    Ok(d)
}

fn budda_config(fit: &FitArgs) -> BuddaConfig {
    BuddaConfig {
        epsilon: fit.epsilon,
        estimator: match fit.estimator {
            EstimatorArg::Literal => Estimator::Literal,
            EstimatorArg::Optimized => Estimator::Optimized,
        },
    }
}

fn dca_config(fit: &FitArgs) -> Result<DcaConfig> {
    let seed = fit
        .seed
        .ok_or_else(|| Error::InvalidArgument("--seed is required with --method dca".into()))?;
    Ok(DcaConfig {
        restarts: fit.restarts,
        max_sweeps: fit.max_sweeps,
        tolerance: fit.tolerance,
        seed,
        ..DcaConfig::default()
    })
}

fn warning_text(w: &DcaWarning) -> String {
    match w {
        DcaWarning::TooFewCopies { k } => format!("only {k} copies: the decomposition is not identifiable"),
        DcaWarning::NearSingularChannel { copy, determinant } => {
            format!("fitted channel {} is near-singular (det {determinant:.3e})", copy + 1)
        }
        DcaWarning::SmallSourceMass { symbol, mass } => {
            format!("fitted source mass of symbol {symbol} is {mass:.3e}")
        }
    }
}

/// An estimated (or given) system plus the report fields describing it.
struct Fitted {
    system: DependentComponentSystem,
    report: Report,
}

fn budda_fitted(obs: &ObservationMatrix, fit: &FitArgs) -> Result<Fitted> {
    let est: BuddaEstimate = budda_estimate(obs, &budda_config(fit))?;
    let bs: Vec<f64> = est.b_hat.iter().map(|b| b.value()).collect();
    let system = DependentComponentSystem::bsc(est.p_hat.prob(0), &bs)?;
    let q = joint_empirical(obs)?;
    let model = system.product_output()?;
    let clamped: Vec<usize> = est
        .diagnostics
        .clamped
        .iter()
        .enumerate()
        .filter(|(_, &c)| c)
        .map(|(i, _)| i + 1)
        .collect();
    let warnings = clamped
        .iter()
        .map(|i| format!("channel {i} estimate left [0, 1] and was clamped"))
        .collect();
    Ok(Fitted {
        report: Report {
            algorithm: "budda".into(),
            p_hat: est.p_hat.probs().to_vec(),
            b_hat: Some(bs),
            branch: Some(est.branch.as_str().into()),
            residuals: Some(Residuals {
                l1: model.l1_distance(&q)?,
                l2: model.l2_distance(&q)?,
            }),
            clamped,
            warnings,
            ..Report::default()
        },
        system,
    })
}

fn dca_fitted(obs: &ObservationMatrix, fit: &FitArgs) -> Result<Fitted> {
    let config = dca_config(fit)?;
    let q = joint_empirical(obs)?;
    let result: DcaFit = dca_fit(&q, &config)?;
    let mut warnings: Vec<String> = result.warnings.iter().map(warning_text).collect();
    if !result.converged {
        warnings.push(format!(
            "no restart reached the L1 tolerance {:e}; best residual {:e}",
            config.tolerance, result.residual_l1
        ));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let bs = result
        .system
        .channels()
        .iter()
        .map(|c| c.as_bsc(1e-9).map(|b| b.value()))
        .collect::<Option<Vec<_>>>();
    Ok(Fitted {
        report: Report {
            algorithm: "dca".into(),
            seed: Some(config.seed),
            p_hat: result.system.source().probs().to_vec(),
            b_hat: bs,
            residuals: Some(Residuals {
                l1: result.residual_l1,
                l2: result.residual_l2,
            }),
            channels: Some(result.system.channels().iter().map(Channel::to_rows).collect()),
            warnings,
            ..Report::default()
        },
        system: result.system,
    })
}

fn truth_system(path: Option<&Path>, set: &ObservationSet) -> Result<DependentComponentSystem> {
    match path {
        Some(p) => read_system(p),
        None => set
            .manifest
            .system
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no --truth-system given and the manifest records none".into()))?
            .to_system(),
    }
}

fn genie_fitted(path: Option<&Path>, set: &ObservationSet) -> Result<Fitted> {
    let system = truth_system(path, set)?;
    if system.k() != set.obs.k() {
        return Err(Error::DimensionMismatch {
            expected: set.obs.k(),
            found: system.k(),
        });
    }
    let bs = system
        .channels()
        .iter()
        .map(|c| c.as_bsc(1e-12).map(|b| b.value()))
        .collect::<Option<Vec<_>>>();
    Ok(Fitted {
        report: Report {
            algorithm: "genie".into(),
            p_hat: system.source().probs().to_vec(),
            b_hat: bs,
            ..Report::default()
        },
        system,
    })
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_report(path, report),
        None => {
            println!("{}", report.to_json()?);
            Ok(())
        }
    }
}

fn finish_report(report: &mut Report, set: &ObservationSet, seed: Option<u64>, start: Instant) {
    report.seed = report.seed.or(seed).or(Some(set.manifest.seed));
    report.n = set.obs.n();
    report.k = set.obs.k();
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let start = Instant::now();
    let set = read_observation_dir(&a.obs)?;
    let mut fitted = match a.method {
        EstimateMethod::Budda => budda_fitted(&set.obs, &a.fit)?,
        EstimateMethod::Dca => dca_fitted(&set.obs, &a.fit)?,
    };
    finish_report(&mut fitted.report, &set, a.fit.seed, start);
    emit(&fitted.report, a.out.as_deref())
}

fn achieved(set: &ObservationSet, estimate: &[Symbol], d: &DistortionMeasure) -> Result<Option<f64>> {
    match set.truth_path() {
        Some(path) if path.exists() => {
            let truth = read_pbm(&path)?;
            Ok(Some(permutation_min_distortion(&truth.pixels, estimate, d)?.0))
        }
        _ => Ok(None),
    }
}

fn inverted_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("denoised");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("pbm");
    out.with_file_name(format!("{stem}_inverted.{ext}"))
}

fn denoise(a: DenoiseArgs) -> Result<()> {
    let start = Instant::now();
    let set = read_observation_dir(&a.obs)?;
    let d = read_distortion(&a.distortion, set.obs.alphabet())?;
    if a.method == DenoiseMethod::Dca && set.obs.k() < 3 {
        return Err(Error::TooFewCopies {
            required: 3,
            found: set.obs.k(),
        });
    }
    let mut fitted = match a.method {
        DenoiseMethod::Budda => budda_fitted(&set.obs, &a.fit)?,
        DenoiseMethod::Dca => dca_fitted(&set.obs, &a.fit)?,
        DenoiseMethod::Genie => genie_fitted(a.truth_system.as_deref(), &set)?,
    };
    let decoder: McaDecoder = build_mca(&fitted.system, &d)?;
    let x_hat = decode(&decoder, &set.obs)?;
    let img = BinaryImage::new(set.width, set.height, x_hat)?;
    write_pbm(&a.out, &img, PbmEncoding::Raw)?;
    write_pbm(&inverted_path(&a.out), &img.inverted(), PbmEncoding::Raw)?;

    fitted.report.expected_distortion = Some(decoder.expected_distortion());
    fitted.report.achieved_distortion_up_to_permutation = achieved(&set, &img.pixels, &d)?;
    finish_report(&mut fitted.report, &set, a.fit.seed, start);
    emit(&fitted.report, a.report.as_deref())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (truth, _) = read_image(&a.truth)?;
    let (est, _) = read_image(&a.estimate)?;
    if (truth.width, truth.height) != (est.width, est.height) {
        return Err(Error::DimensionMismatch {
            expected: truth.pixels.len(),
            found: est.pixels.len(),
        });
    }
    let d = read_distortion(&a.distortion, Alphabet::BINARY)?;
    let (value, tau) = permutation_min_distortion(&truth.pixels, &est.pixels, &d)?;
    println!("{}", round12(value));
    if let Some(out) = &a.out {
        let doc = serde_json::json!({
            "distortion_up_to_permutation": round12(value),
            "permutation": tau.images(),
            "n": truth.pixels.len(),
        });
        std::fs::write(out, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    Ok(())
}

fn baseline(a: BaselineArgs) -> Result<()> {
    let start = Instant::now();
    let set = read_observation_dir(&a.obs)?;
    let d = read_distortion(&a.distortion, set.obs.alphabet())?;
    let system = match truth_system(a.truth_system.as_deref(), &set) {
        Ok(s) => Some(s),
        Err(_) if a.truth_system.is_none() => None,
        Err(e) => return Err(e),
    };
    let mut report = Report::default();
    let x_hat = match a.rule {
        BaselineRule::Majority => {
            report.algorithm = "majority".into();
            if let Some(sys) = &system {
                let labels = majority_labeling(sys.k())?;
                report.expected_distortion = Some(labeling_distortion(sys, &d, &labels, true)?);
            }
            majority_decode(&set.obs)?
        }
        BaselineRule::ColourAgnostic => {
            report.algorithm = "colour-agnostic".into();
            let sys = system
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("colour-agnostic baseline needs the true system".into()))?;
            let per_copy = sys
                .channels()
                .iter()
                .map(|w| colour_agnostic_baseline(sys.source(), w))
                .collect::<Result<Vec<_>>>()?;
            let best = (0..per_copy.len())
                .min_by(|&i, &j| per_copy[i].total_cmp(&per_copy[j]))
                .expect("at least one copy");
            report.expected_distortion = Some(per_copy[best]);
            report.warnings.push(format!(
                "best single copy is {} of {}; per-copy errors {:?}",
                best + 1,
                per_copy.len(),
                per_copy.iter().map(|v| round12(*v)).collect::<Vec<_>>()
            ));
            set.obs.column(best)
        }
    };
    if let Some(sys) = &system {
        report.p_hat = sys.source().probs().to_vec();
    }
    report.achieved_distortion_up_to_permutation = achieved(&set, &x_hat, &d)?;
    finish_report(&mut report, &set, None, start);
    emit(&report, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn type_parsing() {
        assert_eq!(parse_type("0.55").unwrap(), Distribution::binary(0.55).unwrap());
        assert_eq!(parse_type("0.2,0.3,0.5").unwrap().probs().len(), 3);
        assert!(parse_type("0.2,x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::AllCopiesConstant), 3);
        assert_eq!(exit_code(&Error::EmptyInput), 2);
    }

    #[test]
    fn widths_and_paths() {
        assert_eq!(default_width(40_000), 200);
        assert_eq!(default_width(10), 10);
        assert_eq!(inverted_path(Path::new("/tmp/out.pbm")), PathBuf::from("/tmp/out_inverted.pbm"));
    }
}
