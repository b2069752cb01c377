use std::collections::HashMap;
use std::convert::Infallible;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{crowded_tournament_select, polynomial_mutation, sbx_crossover};
use super::sorting::{assign_rank_and_crowding, crowding_distance, fast_nondominated_sort};
use super::{Bounds, EvolutionConfig, InitStrategy, Nsga2Error};
use crate::rng::{stream, tag};

/// Objectives (minimized) plus whatever the evaluator wants to keep.
#[derive(Debug, Clone)]
pub struct Evaluation<D> {
    pub objectives: Vec<f64>,
    pub detail: D,
}

pub trait Evaluator: Sync {
    type Detail: Clone + Send + Sync;
    type Error: std::error::Error + Send + Sync + 'static;

    fn evaluate(&self, genome: &[f64]) -> Result<Evaluation<Self::Detail>, Self::Error>;
}

/// Adapts a plain objective function.
pub struct FnEvaluator<F>(pub F);

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    type Detail = ();
    type Error = Infallible;

    fn evaluate(&self, genome: &[f64]) -> Result<Evaluation<()>, Infallible> {
        Ok(Evaluation { objectives: (self.0)(genome), detail: () })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual<D> {
    pub genome: Vec<f64>,
    pub objectives: Vec<f64>,
    pub detail: D,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
}

impl<D> AsRef<[f64]> for Individual<D> {
    fn as_ref(&self) -> &[f64] {
        &self.objectives
    }
}

/// Population after survivor selection at the end of one generation.
#[derive(Debug, Clone)]
pub struct Generation<D> {
    /// 1-based.
    pub generation: usize,
    pub population: Vec<Individual<D>>,
}

impl<D> Generation<D> {
    pub fn front(&self) -> impl Iterator<Item = &Individual<D>> {
        self.population.iter().filter(|i| i.rank == Some(1))
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<D> {
    /// Ranked initial population.
    pub initial: Vec<Individual<D>>,
    pub history: Vec<Generation<D>>,
    /// Distinct genomes evaluated.
    pub evaluations: usize,
    /// Evaluations answered from the memo.
    pub cache_hits: usize,
}

impl<D> EvolutionResult<D> {
    pub fn population(&self) -> &[Individual<D>] {
        self.history.last().map_or(&self.initial, |g| &g.population)
    }

    /// Rank-1 members of the final population.
    pub fn final_front(&self) -> Vec<&Individual<D>> {
        self.population().iter().filter(|i| i.rank == Some(1)).collect()
    }
}

fn lattice_side(n: usize, dim: usize) -> Option<usize> {
    let budget = n / 2;
    let fits = |k: usize| k.checked_pow(dim as u32).is_some_and(|p| p <= budget);
    if !fits(2) {
        return None;
    }
    let mut k = 2;
    while fits(k + 1) {
        k += 1;
    }
    Some(k)
}

fn latin_hypercube<R: Rng>(count: usize, bounds: &Bounds, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; bounds.dim()]; count];
    for d in 0..bounds.dim() {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        let (lo, hi) = (bounds.lower()[d], bounds.upper()[d]);
        for (row, s) in out.iter_mut().zip(strata) {
            let u: f64 = rng.random();
            row[d] = lo + (hi - lo) * (s as f64 + u) / count as f64;
        }
    }
    for row in &mut out {
        bounds.clamp(row);
    }
    out
}

/// Starting genomes: a lattice over the bounds (corners included, at most half
/// the population) followed by seeded Latin hypercube samples.
pub fn initial_population(cfg: &EvolutionConfig, bounds: &Bounds) -> Vec<Vec<f64>> {
    let n = cfg.population_size;
    let dim = bounds.dim();
    let mut genomes = Vec::with_capacity(n);
    if cfg.init == InitStrategy::GridThenLatinHypercube {
        if let Some(k) = lattice_side(n, dim) {
            for flat in 0..k.pow(dim as u32) {
                let mut rest = flat;
                let g = (0..dim)
                    .map(|d| {
                        let step = rest % k;
                        rest /= k;
                        let (lo, hi) = (bounds.lower()[d], bounds.upper()[d]);
                        if step == k - 1 {
                            hi
                        } else {
                            lo + (hi - lo) * step as f64 / (k - 1) as f64
                        }
                    })
                    .collect();
                genomes.push(g);
            }
        }
    }
    let mut rng = stream(cfg.seed, &[tag("init")]);
    genomes.extend(latin_hypercube(n - genomes.len(), bounds, &mut rng));
    genomes
}

type GenomeKey = Vec<u64>;

fn key(genome: &[f64]) -> GenomeKey {
    genome.iter().map(|g| g.to_bits()).collect()
}

struct Memo<D> {
    seen: HashMap<GenomeKey, Evaluation<D>>,
    hits: usize,
}

impl<D: Clone + Send + Sync> Memo<D> {
    /// Evaluates the distinct unseen genomes in parallel, in first-seen order.
    fn evaluate_batch<E>(&mut self, evaluator: &E, genomes: Vec<Vec<f64>>) -> Result<Vec<Individual<D>>, Nsga2Error>
    where
        E: Evaluator<Detail = D>,
    {
        let mut pending: Vec<&Vec<f64>> = Vec::new();
        let mut queued = std::collections::HashSet::new();
        for g in &genomes {
            let k = key(g);
            if self.seen.contains_key(&k) || !queued.insert(k) {
                self.hits += 1;
            } else {
                pending.push(g);
            }
        }
        let results: Vec<_> = pending.par_iter().map(|g| evaluator.evaluate(g)).collect();
        for (g, r) in pending.iter().zip(results) {
            let eval = r.map_err(|e| Nsga2Error::Evaluation { genome: g.to_vec(), source: Box::new(e) })?;
            if let Some(i) = eval.objectives.iter().position(|v| !v.is_finite()) {
                return Err(Nsga2Error::Evaluation {
                    genome: g.to_vec(),
                    source: format!("objective {i} is not finite").into(),
                });
            }
            self.seen.insert(key(g), eval);
        }
        Ok(genomes
            .into_iter()
            .map(|g| {
                let e = &self.seen[&key(&g)];
                Individual { objectives: e.objectives.clone(), detail: e.detail.clone(), genome: g, rank: None, crowding: None }
            })
            .collect())
    }
}

fn rank<D>(pop: &mut [Individual<D>]) -> Result<(), Nsga2Error> {
    let (ranks, crowding) = assign_rank_and_crowding(pop)?;
    for ((ind, r), c) in pop.iter_mut().zip(ranks).zip(crowding) {
        ind.rank = Some(r);
        ind.crowding = Some(c);
    }
    Ok(())
}

/// Picks `n` indices of `merged`: whole fronts in rank order, then the members
/// of the first front that does not fit with the largest crowding distance
/// (lowest index on ties).
pub fn survivor_select<O: AsRef<[f64]>>(merged: &[O], n: usize) -> Result<Vec<usize>, Nsga2Error> {
    let mut chosen = Vec::with_capacity(n);
    for front in fast_nondominated_sort(merged)? {
        if chosen.len() + front.len() <= n {
            chosen.extend_from_slice(&front);
        } else {
            let members: Vec<&[f64]> = front.iter().map(|&i| merged[i].as_ref()).collect();
            let cd = crowding_distance(&members);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(a.cmp(&b)));
            let room = n - chosen.len();
            chosen.extend(order[..room].iter().map(|&k| front[k]));
        }
        if chosen.len() == n {
            break;
        }
    }
    Ok(chosen)
}

/// Runs the generational loop for `cfg.generations` generations.
///
/// Deterministic for a fixed seed and a deterministic evaluator, regardless of
/// thread count. Identical genomes are evaluated once per run.
pub fn evolve<E: Evaluator>(
    evaluator: &E,
    cfg: &EvolutionConfig,
    bounds: &Bounds,
) -> Result<EvolutionResult<E::Detail>, Nsga2Error> {
    evolve_observed(evaluator, cfg, bounds, |_| {})
}

/// [`evolve`] with a callback invoked after each completed generation.
pub fn evolve_observed<E: Evaluator>(
    evaluator: &E,
    cfg: &EvolutionConfig,
    bounds: &Bounds,
    mut on_generation: impl FnMut(&Generation<E::Detail>),
) -> Result<EvolutionResult<E::Detail>, Nsga2Error> {
    cfg.validate()?;
    let n = cfg.population_size;
    let ops = &cfg.operators;
    let mut memo = Memo { seen: HashMap::new(), hits: 0 };

    let mut population = memo.evaluate_batch(evaluator, initial_population(cfg, bounds))?;
    rank(&mut population)?;
    let initial = population.clone();
    let mut history = Vec::with_capacity(cfg.generations);

    for generation in 1..=cfg.generations {
        let g = generation as u64;
        let mating = crowded_tournament_select(&population, &mut stream(cfg.seed, &[tag("select"), g]))?;
        let mut children = Vec::with_capacity(n);
        for (k, pair) in mating.chunks_exact(2).enumerate() {
            let mut rng = stream(cfg.seed, &[tag("sbx"), g, k as u64]);
            let (a, b) =
                sbx_crossover(&population[pair[0]].genome, &population[pair[1]].genome, ops, bounds, &mut rng)?;
            children.push(a);
            children.push(b);
        }
        let children = children
            .iter()
            .enumerate()
            .map(|(m, c)| polynomial_mutation(c, ops, bounds, &mut stream(cfg.seed, &[tag("mutate"), g, m as u64])))
            .collect::<Result<Vec<_>, _>>()?;
        let offspring = memo.evaluate_batch(evaluator, children)?;

        let mut merged = population;
        merged.extend(offspring);
        let keep = survivor_select(&merged, n)?;
        let mut slots: Vec<Option<Individual<E::Detail>>> = merged.into_iter().map(Some).collect();
        population = keep.into_iter().map(|i| slots[i].take().expect("survivor chosen once")).collect();
        rank(&mut population)?;
        let snapshot = Generation { generation, population: population.clone() };
        on_generation(&snapshot);
        history.push(snapshot);
    }

    Ok(EvolutionResult { initial, history, evaluations: memo.seen.len(), cache_hits: memo.hits })
}
