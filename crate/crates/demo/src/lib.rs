//! Browser demo: corrupt a test pattern through several noisy copies, recover
//! the channels without side information, and chart the optimal decoder's
//! error as copies are added.
//!
//! The logic lives in plain functions so it can be tested natively; the
//! exported wrappers only convert errors.

use unidenoise::budda::{budda_estimate, BuddaConfig, Estimator};
use unidenoise::empirical::ObservationMatrix;
use unidenoise::mca::{
    build_mca, decode, labeling_distortion, majority_decode, majority_labeling, mca_distortion,
    permutation_min_distortion,
};
use unidenoise::model::{Alphabet, BscParam, DependentComponentSystem, Distribution, DistortionMeasure, Symbol};
use unidenoise::sim::{corrupt, random_bscs};
use wasm_bindgen::prelude::*;

/// Largest copy count the error curve will enumerate.
pub const MAX_CURVE_COPIES: usize = 14;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// A ring, a diagonal band and a solid block; 1 is black.
pub fn pattern(width: usize, height: usize) -> Vec<Symbol> {
    let (w, h) = (width as f64, height as f64);
    let mut px = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let (x, y) = (c as f64 / w, r as f64 / h);
            let d = ((x - 0.35).powi(2) + (y - 0.4).powi(2)).sqrt();
            let ring = (0.17..0.27).contains(&d);
            let band = (x + y - 1.3).abs() < 0.07;
            let block = (0.6..0.85).contains(&x) && (0.1..0.35).contains(&y);
            px.push(Symbol::from(ring || band || block));
        }
    }
    px
}

fn hamming() -> DistortionMeasure {
    DistortionMeasure::hamming(Alphabet::BINARY)
}

#[wasm_bindgen]
pub struct Scene {
    width: usize,
    height: usize,
    truth: Vec<Symbol>,
    obs: ObservationMatrix,
    system: DependentComponentSystem,
}

impl Scene {
    pub fn build(width: usize, height: usize, params: &[f64], seed: u64) -> Result<Scene, String> {
        if width == 0 || height == 0 {
            return Err("image must not be empty".into());
        }
        let truth = pattern(width, height);
        let zeros = truth.iter().filter(|&&s| s == 0).count();
        let p0 = zeros as f64 / truth.len() as f64;
        let system = DependentComponentSystem::bsc(p0, params).map_err(err)?;
        let obs = corrupt(&truth, system.channels(), seed).map_err(err)?;
        Ok(Scene {
            width,
            height,
            truth,
            obs,
            system,
        })
    }

    pub fn build_random(width: usize, height: usize, k: usize, seed: u64) -> Result<Scene, String> {
        let params: Vec<f64> = random_bscs(k, seed, 0.1).map_err(err)?.iter().map(|b| b.value()).collect();
        Scene::build(width, height, &params, seed)
    }

    pub fn run_denoise(&self, optimized: bool) -> Result<Denoised, String> {
        let d = hamming();
        let config = BuddaConfig {
            estimator: if optimized {
                Estimator::Optimized
            } else {
                Estimator::Literal
            },
            ..BuddaConfig::default()
        };
        let est = budda_estimate(&self.obs, &config).map_err(err)?;
        let b_hat: Vec<f64> = est.b_hat.iter().map(|b| b.value()).collect();
        let fitted = DependentComponentSystem::bsc(est.p_hat.prob(0), &b_hat).map_err(err)?;
        let image = decode(&build_mca(&fitted, &d).map_err(err)?, &self.obs).map_err(err)?;
        let error = permutation_min_distortion(&self.truth, &image, &d).map_err(err)?.0;

        let genie = build_mca(&self.system, &d).map_err(err)?;
        let genie_image = decode(&genie, &self.obs).map_err(err)?;
        let genie_error = permutation_min_distortion(&self.truth, &genie_image, &d).map_err(err)?.0;
        let majority = majority_decode(&self.obs).map_err(err)?;
        let majority_error = permutation_min_distortion(&self.truth, &majority, &d).map_err(err)?.0;
        Ok(Denoised {
            p0: est.p_hat.prob(0),
            b_hat,
            branch: est.branch.as_str().to_string(),
            image,
            error,
            genie_error,
            genie_expected: genie.expected_distortion(),
            majority_error,
        })
    }
}

#[wasm_bindgen]
impl Scene {
    /// Corrupts the test pattern with one BSC per entry of `params`.
    #[wasm_bindgen(constructor)]
    pub fn new(width: usize, height: usize, params: Vec<f64>, seed: u32) -> Result<Scene, JsError> {
        Scene::build(width, height, &params, seed.into()).map_err(|e| JsError::new(&e))
    }

    /// `k` random BSCs at least 0.1 away from 1/2.
    pub fn random(width: usize, height: usize, k: usize, seed: u32) -> Result<Scene, JsError> {
        Scene::build_random(width, height, k, seed.into()).map_err(|e| JsError::new(&e))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn copies(&self) -> usize {
        self.obs.k()
    }

    pub fn truth(&self) -> Vec<u8> {
        self.truth.clone()
    }

    pub fn copy(&self, j: usize) -> Vec<u8> {
        if j < self.obs.k() {
            self.obs.column(j)
        } else {
            Vec::new()
        }
    }

    pub fn source_p0(&self) -> f64 {
        self.system.source().prob(0)
    }

    pub fn channel_params(&self) -> Vec<f64> {
        self.system
            .channels()
            .iter()
            .map(|c| c.as_bsc(1e-12).map_or(f64::NAN, BscParam::value))
            .collect()
    }

    /// Blind estimate and decode, compared with the decoder that knows the
    /// true channels.
    pub fn denoise(&self, optimized: bool) -> Result<Denoised, JsError> {
        self.run_denoise(optimized).map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen]
pub struct Denoised {
    p0: f64,
    b_hat: Vec<f64>,
    branch: String,
    image: Vec<Symbol>,
    error: f64,
    genie_error: f64,
    genie_expected: f64,
    majority_error: f64,
}

#[wasm_bindgen]
impl Denoised {
    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn b_hat(&self) -> Vec<f64> {
        self.b_hat.clone()
    }

    pub fn branch(&self) -> String {
        self.branch.clone()
    }

    pub fn image(&self) -> Vec<u8> {
        self.image.clone()
    }

    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn genie_error(&self) -> f64 {
        self.genie_error
    }

    pub fn genie_expected(&self) -> f64 {
        self.genie_expected
    }

    pub fn majority_error(&self) -> f64 {
        self.majority_error
    }
}

/// Optimal and majority-vote error for `1..=max_k` identical BSCs, as
/// `[mca_1, majority_1, mca_2, majority_2, ..]`.
pub fn error_curve(p0: f64, b: f64, max_k: usize) -> Result<Vec<f64>, String> {
    if max_k == 0 || max_k > MAX_CURVE_COPIES {
        return Err(format!("copies must lie in 1..={MAX_CURVE_COPIES}"));
    }
    Distribution::binary(p0).map_err(err)?;
    let d = hamming();
    let mut out = Vec::with_capacity(2 * max_k);
    for k in 1..=max_k {
        let sys = DependentComponentSystem::bsc(p0, &vec![b; k]).map_err(err)?;
        out.push(mca_distortion(&sys, &d).map_err(err)?);
        let maj = majority_labeling(k).map_err(err)?;
        out.push(labeling_distortion(&sys, &d, &maj, true).map_err(err)?);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve_js(p0: f64, b: f64, max_k: usize) -> Result<Vec<f64>, JsError> {
    error_curve(p0, b, max_k).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_has_both_colours() {
        let px = pattern(64, 48);
        assert_eq!(px.len(), 64 * 48);
        let ones = px.iter().filter(|&&s| s == 1).count();
        assert!(ones > 200 && ones < 64 * 48 - 200);
    }

    #[test]
    fn scene_is_reproducible() {
        let a = Scene::build(40, 30, &[0.8, 0.3, 0.9], 4).unwrap();
        let b = Scene::build(40, 30, &[0.8, 0.3, 0.9], 4).unwrap();
        assert_eq!(a.obs, b.obs);
        assert_eq!(a.copy(1).len(), 1200);
        assert!(a.copy(3).is_empty());
        assert_eq!(a.channel_params(), vec![0.8, 0.3, 0.9]);
    }

    #[test]
    fn blind_decode_tracks_the_genie() {
        let scene = Scene::build(160, 120, &[0.85, 0.2, 0.75, 0.3, 0.8], 9).unwrap();
        let out = scene.run_denoise(true).unwrap();
        assert!(out.error - out.genie_error < 0.01, "{} vs {}", out.error, out.genie_error);
        assert!((out.genie_error - out.genie_expected).abs() < 0.02);
        assert_eq!(out.image.len(), 160 * 120);
    }

    #[test]
    fn optimal_error_never_rises_with_copies() {
        let curve = error_curve(0.6, 0.8, 8).unwrap();
        let mca: Vec<f64> = curve.iter().step_by(2).copied().collect();
        assert!(mca.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        for pair in curve.chunks(2) {
            assert!(pair[0] <= pair[1] + 1e-12);
        }
        assert!(error_curve(0.6, 0.8, MAX_CURVE_COPIES + 1).is_err());
    }
}
