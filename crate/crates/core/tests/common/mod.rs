//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use myotune::emg_data::{make_splits, synth_generate, DatasetSplit, SplitConfig, SynthConfig, WindowParams};
use myotune::features::{extract_recordings, FeatureConfig, FeatureVector};

fn weakly_better(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fronts by repeatedly peeling off the members nobody remaining dominates.
pub fn peel_fronts(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut remaining: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| !remaining.iter().any(|&j| weakly_better(&objs[j], &objs[i])))
            .collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

pub fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    (-gamma * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
}

/// Maximum of `sum(a) - a'Qa/2` subject to `0 <= a <= c` and `t'a = 0`.
///
/// Enumerates every assignment of each variable to lower bound, upper bound
/// or free; for each, solves the equality-constrained stationarity system of
/// the free block with a pseudo-inverse and keeps feasible solutions.
pub fn svm_dual_oracle(x: &[Vec<f64>], t: &[f64], c: f64, gamma: f64) -> f64 {
    let m = x.len();
    let q = DMatrix::from_fn(m, m, |i, j| t[i] * t[j] * rbf(&x[i], &x[j], gamma));
    let objective = |a: &DVector<f64>| a.sum() - 0.5 * (a.transpose() * &q * a)[(0, 0)];
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(m as u32) {
        let mut state = vec![0u8; m];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..m).filter(|&i| state[i] == 2).collect();
        let mut a = DVector::from_fn(m, |i, _| if state[i] == 1 { c } else { 0.0 });
        if !free.is_empty() {
            let k = free.len();
            let mut lhs = DMatrix::zeros(k + 1, k + 1);
            let mut rhs = DVector::zeros(k + 1);
            let fixed = &q * &a;
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    lhs[(r, s)] = q[(i, j)];
                }
                lhs[(r, k)] = t[i];
                lhs[(k, r)] = t[i];
                rhs[r] = 1.0 - fixed[i];
            }
            rhs[k] = -(0..m).filter(|i| state[*i] != 2).map(|i| t[i] * a[i]).sum::<f64>();
            let Ok(pinv) = lhs.clone().pseudo_inverse(1e-12) else { continue };
            let sol = &pinv * &rhs;
            if (&lhs * &sol - &rhs).amax() > 1e-8 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                a[i] = sol[r];
            }
        }
        let feasible = a.iter().all(|&v| v >= -1e-10 && v <= c + 1e-10)
            && (0..m).map(|i| t[i] * a[i]).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(objective(&a));
        }
    }
    best
}

pub fn zdt1(x: &[f64]) -> Vec<f64> {
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    vec![x[0], g * (1.0 - (x[0] / g).sqrt())]
}

/// Mean Euclidean distance from each point to the curve `f2 = 1 - sqrt(f1)`,
/// sampled at `samples + 1` evenly spaced `f1` values.
pub fn generational_distance(points: &[Vec<f64>], samples: usize) -> f64 {
    let curve: Vec<(f64, f64)> = (0..=samples)
        .map(|i| {
            let f1 = i as f64 / samples as f64;
            (f1, 1.0 - f1.sqrt())
        })
        .collect();
    let nearest = |p: &[f64]| {
        curve.iter().map(|&(a, b)| ((p[0] - a).powi(2) + (p[1] - b).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
    };
    points.iter().map(|p| nearest(p)).sum::<f64>() / points.len() as f64
}

/// One subject, three one-second trials per (position, class).
pub fn toy_split(seed: u64, window: WindowParams) -> DatasetSplit<FeatureVector> {
    let cfg = SynthConfig { subjects: 1, trials: 3, duration_s: 1.0, ..SynthConfig::default() };
    let features =
        extract_recordings(synth_generate(&cfg, seed).unwrap(), window, &FeatureConfig::default()).unwrap();
    let split = SplitConfig { ts1_per_class: None, ts2_per_class: 40, reserve_ts2_trials: true };
    make_splits(&features, &split, seed).unwrap()
}
