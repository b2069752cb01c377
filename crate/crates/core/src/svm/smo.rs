//! Two-coordinate dual solver.
//!
//! Works on the minimization form `½ αᵀQα − eᵀα`, `Q_ij = t_i t_j K_ij`,
//! keeping the gradient `G = Qα − e` up to date. Each step picks
//! `i = argmax_{I_up} −t G` and `j = argmin_{I_low} −t G` (lowest index on
//! ties) and solves the two-variable subproblem analytically with clipping to
//! the box. The loop stops when the maximal violation `m − M ≤ tol`.

use super::kernel::KernelSource;
use super::SvmError;

/// Iteration cap on pair updates.
pub const MAX_PAIR_UPDATES: usize = 1_000_000;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final `m − M`.
    pub violation: f64,
    /// `Σα − ½ αᵀQα`, the maximized dual value.
    pub dual_objective: f64,
}

#[inline]
fn in_up(t: f64, a: f64, c: f64) -> bool {
    if t > 0.0 {
        a < c
    } else {
        a > 0.0
    }
}

#[inline]
fn in_low(t: f64, a: f64, c: f64) -> bool {
    if t > 0.0 {
        a > 0.0
    } else {
        a < c
    }
}

/// Solves the box-constrained dual for labels `t ∈ {−1, +1}` and bound `c`.
pub fn solve(kernel: &KernelSource<'_>, t: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<SmoSolution, SvmError> {
    let n = t.len();
    let mut rows = kernel.rows(n);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let violation = loop {
        let mut g_max = f64::NEG_INFINITY;
        let mut g_min = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for k in 0..n {
            let v = -t[k] * grad[k];
            if in_up(t[k], alpha[k], c) && v > g_max {
                g_max = v;
                i = k;
            }
            if in_low(t[k], alpha[k], c) && v < g_min {
                g_min = v;
                j = k;
            }
        }
        let gap = g_max - g_min;
        if i == usize::MAX || j == usize::MAX || gap <= tol {
            break gap.max(0.0);
        }
        if iterations >= max_iter {
            return Err(SvmError::NonConvergence { iterations, violation: gap });
        }
        iterations += 1;

        let ki = rows.row(i);
        let kj = rows.row(j);
        let (ti, tj) = (t[i], t[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = ki[i] + kj[j] - 2.0 * ki[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if ti != tj {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = ((ai - old_i) * ti, (aj - old_j) * tj);
        for k in 0..n {
            grad[k] += t[k] * (ki[k] * di + kj[k] * dj);
        }
    };

    let bias = bias_from_gradient(t, &alpha, &grad, c);
    let dual_objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>();
    Ok(SmoSolution { alpha, bias, iterations, violation, dual_objective })
}

/// Mean of `t_i − Σ_j α_j t_j K_ij` over free vectors; midpoint of the
/// feasible interval when every vector is at a bound.
fn bias_from_gradient(t: &[f64], alpha: &[f64], grad: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for k in 0..t.len() {
        // −t G = t − Σ α t K for t ∈ {−1, +1}.
        let v = -t[k] * grad[k];
        if alpha[k] >= c {
            if t[k] > 0.0 {
                ub = ub.min(v);
            } else {
                lb = lb.max(v);
            }
        } else if alpha[k] <= 0.0 {
            if t[k] > 0.0 {
                lb = lb.max(v);
            } else {
                ub = ub.min(v);
            }
        } else {
            free += 1;
            sum += v;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        0.5 * (ub + lb)
    }
}

/// Per-point KKT violation of `(alpha, bias)` for the box `[0, c]`.
pub fn kkt_violations(kernel: &KernelSource<'_>, t: &[f64], alpha: &[f64], bias: f64, c: f64) -> Vec<f64> {
    let n = t.len();
    let mut rows = kernel.rows(n);
    (0..n)
        .map(|i| {
            let row = rows.row(i);
            let f: f64 = (0..n).map(|j| alpha[j] * t[j] * row[j]).sum::<f64>() + bias;
            let margin = t[i] * f;
            if alpha[i] <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if alpha[i] >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::PairwiseDistances;
    use rand::Rng;

    fn gram(points: &[Vec<f64>], gamma: f64) -> Vec<f64> {
        PairwiseDistances::compute(points).rbf_gram(gamma)
    }

    #[test]
    fn symmetric_pair() {
        let pts = vec![vec![0.0], vec![1.0]];
        let g = gram(&pts, 1.0);
        let t = [-1.0, 1.0];
        let sol = solve(&KernelSource::Dense(&g), &t, 100.0, 1e-9, MAX_PAIR_UPDATES).unwrap();
        let expected = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((sol.alpha[0] - expected).abs() < 1e-9);
        assert!((sol.alpha[1] - expected).abs() < 1e-9);
        assert!(sol.bias.abs() < 1e-9);
    }

    #[test]
    fn random_problems_satisfy_kkt_and_equality() {
        let mut rng = crate::rng::stream(17, &[]);
        for _ in 0..30 {
            let n = rng.random_range(4..60);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
            let t: Vec<f64> = pts.iter().map(|p| if p[0] + 0.3 * p[1] + rng.random_range(-0.5..0.5) > 0.0 { 1.0 } else { -1.0 }).collect();
            if t.iter().all(|&v| v == t[0]) {
                continue;
            }
            let c = rng.random_range(0.1..10.0);
            let g = gram(&pts, rng.random_range(0.1..5.0));
            let k = KernelSource::Dense(&g);
            let sol = solve(&k, &t, c, 1e-3, MAX_PAIR_UPDATES).unwrap();
            let eq: f64 = sol.alpha.iter().zip(&t).map(|(a, y)| a * y).sum();
            assert!(eq.abs() < 1e-9);
            assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
            assert!(sol.dual_objective >= 0.0);
            let worst = kkt_violations(&k, &t, &sol.alpha, sol.bias, c).into_iter().fold(0.0, f64::max);
            assert!(worst <= 1e-3, "violation {worst}");
        }
    }

    #[test]
    fn lazy_and_dense_agree() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let t: Vec<f64> = (0..30).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let g = gram(&pts, 2.0);
        let a = solve(&KernelSource::Dense(&g), &t, 5.0, 1e-6, MAX_PAIR_UPDATES).unwrap();
        let b = solve(&KernelSource::Lazy { points: &pts, gamma: 2.0 }, &t, 5.0, 1e-6, MAX_PAIR_UPDATES).unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (x, y) in a.alpha.iter().zip(&b.alpha) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_cap_reports_violation() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 0.1]).collect();
        let t: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = gram(&pts, 1.0);
        match solve(&KernelSource::Dense(&g), &t, 1000.0, 1e-12, 3) {
            Err(SvmError::NonConvergence { iterations: 3, violation }) => assert!(violation > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
