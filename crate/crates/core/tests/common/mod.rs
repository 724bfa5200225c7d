#![allow(dead_code)]

use proptest::prelude::*;
use unidenoise::model::{Channel, DependentComponentSystem, Distribution};

/// BSC parameter with `|b - 1/2| >= gap`.
pub fn bsc_param(gap: f64) -> impl Strategy<Value = f64> {
    (gap..=0.5, any::<bool>()).prop_map(|(off, hi)| if hi { 0.5 + off } else { 0.5 - off })
}

pub fn bsc_params(k: std::ops::RangeInclusive<usize>, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(bsc_param(gap), k)
}

/// Probability vector of length `l` with every entry at least `floor`.
pub fn distribution(l: usize, floor: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, l).prop_map(move |v| {
        let s: f64 = v.iter().sum::<f64>() + 1e-9;
        let free = 1.0 - floor * l as f64;
        let mut p: Vec<f64> = v.iter().map(|x| floor + free * (x + 1e-9 / l as f64) / s).collect();
        let t: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= t);
        p
    })
}

pub fn channel(l: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(distribution(l, 0.0), l).prop_map(|rows| Channel::new(rows).unwrap())
}

pub fn system(l: usize, k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DependentComponentSystem> {
    (distribution(l, 0.0), prop::collection::vec(channel(l), k))
        .prop_map(|(p, chans)| DependentComponentSystem::new(Distribution::new(p).unwrap(), chans).unwrap())
}

/// `q(y) = sum_x p(x) prod_j w_j(y_j|x)` for BSCs `w_j(y|x) = b_j` if `y == x`,
/// written out tuple by tuple with the first copy as the most significant bit.
pub fn bsc_joint_oracle(p0: f64, bs: &[f64]) -> Vec<f64> {
    let k = bs.len();
    (0..1usize << k)
        .map(|idx| {
            let mut total = 0.0;
            for (x, px) in [(0usize, p0), (1, 1.0 - p0)] {
                let mut prod = px;
                for (j, &b) in bs.iter().enumerate() {
                    let y = (idx >> (k - 1 - j)) & 1;
                    prod *= if y == x { b } else { 1.0 - b };
                }
                total += prod;
            }
            total
        })
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
