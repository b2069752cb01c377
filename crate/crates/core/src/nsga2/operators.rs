use rand::seq::SliceRandom;
use rand::Rng;

use super::engine::Individual;
use super::{Bounds, Nsga2Error, OperatorParams};

/// Crowded binary tournament. Runs two passes over a shuffled pairing of the
/// population; each pass yields `N/2` winners. Lower rank wins, then larger
/// crowding distance, then a fair coin.
pub fn crowded_tournament_select<T, R: Rng>(pop: &[Individual<T>], rng: &mut R) -> Result<Vec<usize>, Nsga2Error> {
    let keys = pop
        .iter()
        .enumerate()
        .map(|(i, ind)| match (ind.rank, ind.crowding) {
            (Some(r), Some(c)) => Ok((r, c)),
            _ => Err(Nsga2Error::MissingRankOrCrowding(i)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = pop.len();
    let mut winners = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..2 {
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            let ((ra, ca), (rb, cb)) = (keys[a], keys[b]);
            let pick = if ra != rb {
                if ra < rb { a } else { b }
            } else if ca != cb {
                if ca > cb { a } else { b }
            } else if rng.random_bool(0.5) {
                a
            } else {
                b
            };
            winners.push(pick);
        }
    }
    Ok(winners)
}

/// Spread factor for a uniform draw `u ∈ [0, 1)`, by inverting the SBX
/// density `0.5 (η+1) β^η` for `β ≤ 1` and `0.5 (η+1) / β^(η+2)` above.
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let exponent = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(exponent)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(exponent)
    }
}

/// Unclamped children; `c1 + c2 = p1 + p2`.
#[inline]
pub fn sbx_children(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    (0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2), 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2))
}

pub fn sbx_crossover<R: Rng>(
    p1: &[f64],
    p2: &[f64],
    params: &OperatorParams,
    bounds: &Bounds,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>), Nsga2Error> {
    bounds.check(p1)?;
    bounds.check(p2)?;
    let (mut c1, mut c2) = (p1.to_vec(), p2.to_vec());
    if rng.random::<f64>() < params.pc {
        for k in 0..p1.len() {
            let beta = sbx_beta(rng.random::<f64>(), params.eta_c);
            (c1[k], c2[k]) = sbx_children(p1[k], p2[k], beta);
        }
        bounds.clamp(&mut c1);
        bounds.clamp(&mut c2);
    }
    Ok((c1, c2))
}

/// Normalized perturbation for a uniform draw `u ∈ [0, 1)`; lies in `[−1, 1)`.
pub fn polynomial_delta(u: f64, eta_m: f64) -> f64 {
    let exponent = 1.0 / (eta_m + 1.0);
    if u < 0.5 {
        (2.0 * u).powf(exponent) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(exponent)
    }
}

pub fn polynomial_mutation<R: Rng>(
    x: &[f64],
    params: &OperatorParams,
    bounds: &Bounds,
    rng: &mut R,
) -> Result<Vec<f64>, Nsga2Error> {
    bounds.check(x)?;
    let mut out = x.to_vec();
    for (k, gene) in out.iter_mut().enumerate() {
        if rng.random::<f64>() < params.pm {
            let delta = polynomial_delta(rng.random::<f64>(), params.eta_m);
            *gene += delta * (bounds.upper()[k] - bounds.lower()[k]);
        }
    }
    bounds.clamp(&mut out);
    Ok(out)
}
