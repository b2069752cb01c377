//! Multi-objective SVM hyperparameter search.
//!
//! Genomes are `(log10 C, log10 gamma)`. Each candidate trains a one-vs-rest
//! model on a fit set and is scored on an evaluation set by
//! `(-accuracy, rest false negatives)`, both minimized. The two extremes of
//! the final front are retrained on the full training set and evaluated on
//! both test sets.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, Flag, KvConfig};
use crate::emg_data::{DataError, DatasetSplit, Movement, SplitConfig, Tagged};
use crate::features::FeatureVector;
use crate::metrics::{accuracy, confusion, rest_fn, ConfusionMatrix, EvalSummary, MetricsError};
use crate::nsga2::{
    evolve_observed, Bounds, Evaluation, Evaluator, EvolutionConfig, Generation, Individual, InitStrategy,
    Nsga2Error, OperatorParams,
};
use crate::rng::{stream, tag};
use crate::svm::{
    train_ovr, train_ovr_with, KernelSource, OvrModel, PairwiseDistances, SvmError, SvmHyperparams, DEFAULT_TOL,
    DENSE_LIMIT,
};

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("invalid tuning config: {0}")]
    InvalidConfig(String),
    #[error("class {class} has {count} samples, need at least 2 for a hold-out split")]
    ClassTooSmall { class: Movement, count: usize },
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("genome {0:?} lies outside the search space")]
    OutsideSpace(Vec<f64>),
    #[error("final front is empty")]
    EmptyFront,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Evolution(#[from] Nsga2Error),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub log10_c: (f64, f64),
    pub log10_gamma: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self { log10_c: (-2.0, 4.0), log10_gamma: (-5.0, 2.0) }
    }
}

impl SearchSpace {
    pub fn bounds(&self) -> Result<Bounds, TuneError> {
        Bounds::new(vec![self.log10_c.0, self.log10_gamma.0], vec![self.log10_c.1, self.log10_gamma.1])
            .map_err(|e| TuneError::InvalidConfig(e.to_string()))
    }

    pub fn contains(&self, genome: &[f64]) -> bool {
        let inside = |g: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&g);
        genome.len() == 2 && inside(genome[0], self.log10_c) && inside(genome[1], self.log10_gamma)
    }

    pub fn decode(&self, genome: &[f64]) -> Result<SvmHyperparams, TuneError> {
        if !self.contains(genome) {
            return Err(TuneError::OutsideSpace(genome.to_vec()));
        }
        Ok(SvmHyperparams::new(10f64.powf(genome[0]), 10f64.powf(genome[1]))?)
    }
}

/// Which samples drive selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSet {
    /// Stratified hold-out carved from the training set.
    Holdout,
    /// Train on the full training set and score on TS2.
    Ts2,
}

impl FromStr for ObjectiveSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "holdout" => Ok(Self::Holdout),
            "ts2" => Ok(Self::Ts2),
            other => Err(format!("unknown objective set `{other}` (expected holdout or ts2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub population_size: usize,
    pub generations: usize,
    pub operators: OperatorParams,
    pub init: InitStrategy,
    pub space: SearchSpace,
    pub holdout_fraction: f64,
    pub objective_set: ObjectiveSet,
    pub svm_tol: f64,
    /// Z-score features with statistics of the set each model is trained on.
    pub standardize: bool,
    pub split: SplitConfig,
    pub seed: u64,
}

impl Default for TuneConfig {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        Self {
            population_size: evo.population_size,
            generations: evo.generations,
            operators: evo.operators,
            init: evo.init,
            space: SearchSpace::default(),
            holdout_fraction: 0.2,
            objective_set: ObjectiveSet::Holdout,
            svm_tol: DEFAULT_TOL,
            standardize: true,
            split: SplitConfig::default(),
            seed: 0,
        }
    }
}

impl TuneConfig {
    /// Consumes every tuning key from `kv`.
    pub fn take_from(kv: &mut KvConfig) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        kv.take("population_size", &mut c.population_size)?;
        kv.take("generations", &mut c.generations)?;
        kv.take("pc", &mut c.operators.pc)?;
        kv.take("eta_c", &mut c.operators.eta_c)?;
        kv.take("pm", &mut c.operators.pm)?;
        kv.take("eta_m", &mut c.operators.eta_m)?;
        kv.take("init", &mut c.init)?;
        kv.take("log10_c_min", &mut c.space.log10_c.0)?;
        kv.take("log10_c_max", &mut c.space.log10_c.1)?;
        kv.take("log10_gamma_min", &mut c.space.log10_gamma.0)?;
        kv.take("log10_gamma_max", &mut c.space.log10_gamma.1)?;
        kv.take("holdout_fraction", &mut c.holdout_fraction)?;
        kv.take("objective_set", &mut c.objective_set)?;
        kv.take("svm_tol", &mut c.svm_tol)?;
        let mut standardize = Flag(c.standardize);
        kv.take("standardize", &mut standardize)?;
        c.standardize = standardize.0;
        kv.take_opt("ts1_per_class", &mut c.split.ts1_per_class)?;
        kv.take("ts2_per_class", &mut c.split.ts2_per_class)?;
        let mut allow = Flag(!c.split.reserve_ts2_trials);
        kv.take("ts2_allow_train_windows", &mut allow)?;
        c.split.reserve_ts2_trials = !allow.0;
        kv.take("seed", &mut c.seed)?;
        Ok(c)
    }

    pub fn from_kv(mut kv: KvConfig) -> Result<Self, ConfigError> {
        let c = Self::take_from(&mut kv)?;
        kv.finish()?;
        Ok(c)
    }

    pub fn evolution(&self, seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.population_size,
            generations: self.generations,
            seed,
            operators: self.operators,
            init: self.init,
        }
    }

    pub fn validate(&self) -> Result<(), TuneError> {
        self.evolution(self.seed).validate().map_err(|e| TuneError::InvalidConfig(e.to_string()))?;
        self.space.bounds()?;
        let finite = [self.space.log10_c.0, self.space.log10_c.1, self.space.log10_gamma.0, self.space.log10_gamma.1];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(TuneError::InvalidConfig("search space bounds must be finite".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(TuneError::InvalidConfig(format!("holdout_fraction {} not in (0, 1)", self.holdout_fraction)));
        }
        if !(self.svm_tol.is_finite() && self.svm_tol > 0.0) {
            return Err(TuneError::InvalidConfig(format!("svm_tol {} must be positive", self.svm_tol)));
        }
        Ok(())
    }
}

/// Per-column z-scoring; constant columns are only centred.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var.into_iter().map(|s| (s / n).sqrt()).map(|sd| if sd > 0.0 { sd } else { 1.0 }).collect();
        Self { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

struct Labeled {
    x: Vec<Vec<f64>>,
    y: Vec<Movement>,
}

fn labeled(items: &[FeatureVector], scaler: Option<&Standardizer>) -> Labeled {
    let x = items.iter().map(|f| scaler.map_or_else(|| f.values.clone(), |s| s.apply(&f.values))).collect();
    Labeled { x, y: items.iter().map(|f| f.tag.class).collect() }
}

fn check_set(name: &'static str, items: &[FeatureVector], dim: Option<usize>) -> Result<usize, TuneError> {
    let first = items.first().ok_or(TuneError::EmptySet(name))?.values.len();
    let expected = dim.unwrap_or(first);
    match items.iter().find(|f| f.values.len() != expected) {
        Some(f) => Err(TuneError::DimensionMismatch { expected, found: f.values.len() }),
        None => Ok(expected),
    }
}

/// Stratified split into `(fit, validation)`, both in input order.
///
/// The validation size is `round(n * fraction)` overall; each class gets the
/// floor or ceiling of its own share, larger remainders first.
pub fn hold_out_split<T: Tagged + Clone>(items: &[T], fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>), TuneError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(TuneError::InvalidConfig(format!("hold-out fraction {fraction} not in (0, 1)")));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); Movement::COUNT];
    for (i, it) in items.iter().enumerate() {
        members[it.tag().class.index()].push(i);
    }
    let present: Vec<usize> = (0..Movement::COUNT).filter(|&c| !members[c].is_empty()).collect();
    if present.is_empty() {
        return Err(TuneError::EmptySet("training"));
    }
    for &c in &present {
        if members[c].len() < 2 {
            return Err(TuneError::ClassTooSmall { class: Movement::ALL[c], count: members[c].len() });
        }
    }
    let target = (items.len() as f64 * fraction).round() as usize;
    let mut quota: Vec<usize> = vec![0; Movement::COUNT];
    let mut remainders = Vec::new();
    for &c in &present {
        let exact = members[c].len() as f64 * fraction;
        quota[c] = exact.floor() as usize;
        remainders.push((exact - exact.floor(), c));
    }
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let assigned: usize = quota.iter().sum();
    for &(_, c) in remainders.iter().take(target.saturating_sub(assigned)) {
        quota[c] += 1;
    }
    let mut in_validation = vec![false; items.len()];
    for &c in &present {
        let n = members[c].len();
        let q = quota[c].clamp(1, n - 1);
        let mut idx = members[c].clone();
        idx.shuffle(&mut stream(seed, &[tag("holdout"), c as u64]));
        for &i in &idx[..q] {
            in_validation[i] = true;
        }
    }
    let (mut fit, mut validation) = (Vec::new(), Vec::new());
    for (it, &v) in items.iter().zip(&in_validation) {
        if v {
            validation.push(it.clone());
        } else {
            fit.push(it.clone());
        }
    }
    Ok((fit, validation))
}

/// Scores genomes by training on a fixed fit set and predicting an
/// evaluation set. Squared distances of the fit set are computed once.
pub struct SvmObjective {
    fit: Labeled,
    eval: Labeled,
    distances: Option<PairwiseDistances>,
    space: SearchSpace,
    tol: f64,
}

impl SvmObjective {
    pub fn new(
        fit: &[FeatureVector],
        eval: &[FeatureVector],
        space: SearchSpace,
        tol: f64,
        standardize: bool,
    ) -> Result<Self, TuneError> {
        let dim = check_set("fit", fit, None)?;
        check_set("evaluation", eval, Some(dim))?;
        let raw: Vec<Vec<f64>> = fit.iter().map(|f| f.values.clone()).collect();
        let scaler = standardize.then(|| Standardizer::fit(&raw));
        let fit = labeled(fit, scaler.as_ref());
        let eval = labeled(eval, scaler.as_ref());
        let distances = (fit.x.len() <= DENSE_LIMIT).then(|| PairwiseDistances::compute(&fit.x));
        Ok(Self { fit, eval, distances, space, tol })
    }

    pub fn train(&self, hp: SvmHyperparams) -> Result<OvrModel, SvmError> {
        match &self.distances {
            Some(d) => train_ovr_with(&self.fit.x, &self.fit.y, &KernelSource::Dense(&d.rbf_gram(hp.gamma)), hp, self.tol),
            None => train_ovr_with(
                &self.fit.x,
                &self.fit.y,
                &KernelSource::Lazy { points: &self.fit.x, gamma: hp.gamma },
                hp,
                self.tol,
            ),
        }
    }
}

impl Evaluator for SvmObjective {
    type Detail = ConfusionMatrix;
    type Error = TuneError;

    fn evaluate(&self, genome: &[f64]) -> Result<Evaluation<ConfusionMatrix>, TuneError> {
        let model = self.train(self.space.decode(genome)?)?;
        let cm = confusion(&model.predict_all(&self.eval.x)?, &self.eval.y)?;
        Ok(Evaluation { objectives: vec![-accuracy(&cm)?, rest_fn(&cm) as f64], detail: cm })
    }
}

/// Objectives `(-accuracy, rest_fn)` of one genome, standardizing on `fit`.
pub fn objective_eval(
    genome: &[f64],
    fit: &[FeatureVector],
    eval: &[FeatureVector],
    space: SearchSpace,
    tol: f64,
) -> Result<Evaluation<ConfusionMatrix>, TuneError> {
    SvmObjective::new(fit, eval, space, tol, true)?.evaluate(genome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionTag {
    AccuracyDominant,
    FnDominant,
}

impl SolutionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::AccuracyDominant => "accuracy_dominant",
            Self::FnDominant => "fn_dominant",
        }
    }
}

/// Serializes infinite crowding distances as `"inf"`.
mod crowding_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad crowding distance `{t}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub genome: Vec<f64>,
    pub hyperparams: SvmHyperparams,
    /// Raw minimized objectives `(-accuracy, rest_fn)`.
    pub objectives: Vec<f64>,
    pub rank: usize,
    #[serde(with = "crowding_serde")]
    pub crowding: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub generation: usize,
    pub population: Vec<MemberReport>,
}

impl GenerationReport {
    fn from_generation(g: &Generation<ConfusionMatrix>, space: &SearchSpace) -> Result<Self, TuneError> {
        let population = g.population.iter().map(|ind| member_report(ind, space)).collect::<Result<_, _>>()?;
        Ok(Self { generation: g.generation, population })
    }

    pub fn front(&self) -> impl Iterator<Item = &MemberReport> {
        self.population.iter().filter(|m| m.rank == 1)
    }
}

fn member_report(ind: &Individual<ConfusionMatrix>, space: &SearchSpace) -> Result<MemberReport, TuneError> {
    Ok(MemberReport {
        genome: ind.genome.clone(),
        hyperparams: space.decode(&ind.genome)?,
        objectives: ind.objectives.clone(),
        rank: ind.rank.unwrap_or(0),
        crowding: ind.crowding.unwrap_or(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSolution {
    pub genome: Vec<f64>,
    pub hyperparams: SvmHyperparams,
    pub accuracy: f64,
    pub rest_fn: u64,
    pub accuracy_dominant: bool,
    pub fn_dominant: bool,
    pub validation: EvalSummary,
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

/// Indices of the accuracy-dominant and FN-dominant members.
///
/// Ties on the primary objective go to the better secondary objective, then
/// to the lexicographically smaller genome.
pub fn select_extremes(front: &[FrontSolution]) -> Result<(usize, usize), TuneError> {
    if front.is_empty() {
        return Err(TuneError::EmptyFront);
    }
    let best_by = |cmp: &dyn Fn(&FrontSolution, &FrontSolution) -> Ordering| {
        (1..front.len()).fold(0, |best, i| {
            let order = cmp(&front[i], &front[best]).then_with(|| lex(&front[i].genome, &front[best].genome));
            if order == Ordering::Less {
                i
            } else {
                best
            }
        })
    };
    let acc = best_by(&|a, b| b.accuracy.total_cmp(&a.accuracy).then(a.rest_fn.cmp(&b.rest_fn)));
    let fnd = best_by(&|a, b| a.rest_fn.cmp(&b.rest_fn).then(b.accuracy.total_cmp(&a.accuracy)));
    Ok((acc, fnd))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeReport {
    pub tag: SolutionTag,
    pub genome: Vec<f64>,
    pub hyperparams: SvmHyperparams,
    pub validation: EvalSummary,
    pub ts1: EvalSummary,
    pub ts2: EvalSummary,
    /// Support vectors per one-vs-rest binary, in class order.
    pub support_vectors: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSizes {
    pub train: usize,
    pub fit: usize,
    pub validation: usize,
    pub ts1: usize,
    pub ts2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    /// `None` when the training set mixes subjects.
    pub subject: Option<u32>,
    pub seed: u64,
    pub config: TuneConfig,
    pub sizes: SetSizes,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub generations: Vec<GenerationReport>,
    /// Rank-1 members of the final population, one per distinct genome.
    pub final_front: Vec<FrontSolution>,
    /// Accuracy-dominant first, FN-dominant second.
    pub extremes: Vec<ExtremeReport>,
}

impl TuneReport {
    pub fn extreme(&self, tag: SolutionTag) -> &ExtremeReport {
        self.extremes.iter().find(|e| e.tag == tag).expect("both extremes are always present")
    }

    pub fn to_json(&self) -> Result<String, TuneError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, TuneError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn common_subject(items: &[FeatureVector]) -> Option<u32> {
    let first = items.first()?.tag.subject;
    items.iter().all(|f| f.tag.subject == first).then_some(first)
}

pub fn run_tuning(split: &DatasetSplit<FeatureVector>, cfg: &TuneConfig, seed: u64) -> Result<TuneReport, TuneError> {
    run_tuning_observed(split, cfg, seed, |_| {})
}

/// [`run_tuning`] with a callback after every generation, so snapshots can be
/// persisted even if a later generation fails.
pub fn run_tuning_observed(
    split: &DatasetSplit<FeatureVector>,
    cfg: &TuneConfig,
    seed: u64,
    mut on_generation: impl FnMut(&GenerationReport),
) -> Result<TuneReport, TuneError> {
    cfg.validate()?;
    let dim = check_set("training", &split.train, None)?;
    check_set("TS1", &split.ts1, Some(dim))?;
    check_set("TS2", &split.ts2, Some(dim))?;

    let (fit, validation) = match cfg.objective_set {
        ObjectiveSet::Holdout => hold_out_split(&split.train, cfg.holdout_fraction, seed)?,
        ObjectiveSet::Ts2 => (split.train.clone(), split.ts2.clone()),
    };
    let objective = SvmObjective::new(&fit, &validation, cfg.space, cfg.svm_tol, cfg.standardize)?;
    let mut snapshot_error = None;
    let result = evolve_observed(&objective, &cfg.evolution(seed), &cfg.space.bounds()?, |g| {
        match GenerationReport::from_generation(g, &cfg.space) {
            Ok(report) => on_generation(&report),
            Err(e) => {
                snapshot_error.get_or_insert(e);
            }
        }
    })
    .map_err(|e| match e {
        Nsga2Error::Evaluation { genome, source } => match source.downcast::<TuneError>() {
            Ok(inner) => TuneError::Evolution(Nsga2Error::Evaluation { genome, source: inner }),
            Err(source) => TuneError::Evolution(Nsga2Error::Evaluation { genome, source }),
        },
        other => TuneError::Evolution(other),
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    let generations =
        result.history.iter().map(|g| GenerationReport::from_generation(g, &cfg.space)).collect::<Result<Vec<_>, _>>()?;

    let mut final_front: Vec<FrontSolution> = Vec::new();
    for ind in result.final_front() {
        if final_front.iter().any(|s| s.genome == ind.genome) {
            continue;
        }
        let validation = EvalSummary::from_confusion(ind.detail.clone())?;
        final_front.push(FrontSolution {
            genome: ind.genome.clone(),
            hyperparams: cfg.space.decode(&ind.genome)?,
            accuracy: validation.accuracy,
            rest_fn: validation.rest_fn,
            accuracy_dominant: false,
            fn_dominant: false,
            validation,
        });
    }
    final_front.sort_by(|a, b| {
        b.accuracy.total_cmp(&a.accuracy).then(a.rest_fn.cmp(&b.rest_fn)).then_with(|| lex(&a.genome, &b.genome))
    });
    let (acc_i, fn_i) = select_extremes(&final_front)?;
    final_front[acc_i].accuracy_dominant = true;
    final_front[fn_i].fn_dominant = true;

    let raw: Vec<Vec<f64>> = split.train.iter().map(|f| f.values.clone()).collect();
    let scaler = cfg.standardize.then(|| Standardizer::fit(&raw));
    let train = labeled(&split.train, scaler.as_ref());
    let ts1 = labeled(&split.ts1, scaler.as_ref());
    let ts2 = labeled(&split.ts2, scaler.as_ref());
    let score = |model: &OvrModel, set: &Labeled| -> Result<EvalSummary, TuneError> {
        Ok(EvalSummary::from_confusion(confusion(&model.predict_all(&set.x)?, &set.y)?)?)
    };
    let mut extremes: Vec<ExtremeReport> = Vec::with_capacity(2);
    for (tag, idx) in [(SolutionTag::AccuracyDominant, acc_i), (SolutionTag::FnDominant, fn_i)] {
        let chosen = &final_front[idx];
        if let Some(prev) = extremes.iter().find(|e| e.genome == chosen.genome) {
            extremes.push(ExtremeReport { tag, ..prev.clone() });
            continue;
        }
        let model = train_ovr(&train.x, &train.y, chosen.hyperparams, cfg.svm_tol)?;
        extremes.push(ExtremeReport {
            tag,
            genome: chosen.genome.clone(),
            hyperparams: chosen.hyperparams,
            validation: chosen.validation.clone(),
            ts1: score(&model, &ts1)?,
            ts2: score(&model, &ts2)?,
            support_vectors: model.binaries.iter().map(|b| b.support_vectors.len()).collect(),
        });
    }

    Ok(TuneReport {
        subject: common_subject(&split.train),
        seed,
        config: cfg.clone(),
        sizes: SetSizes {
            train: split.train.len(),
            fit: fit.len(),
            validation: validation.len(),
            ts1: split.ts1.len(),
            ts2: split.ts2.len(),
        },
        evaluations: result.evaluations,
        cache_hits: result.cache_hits,
        generations,
        final_front,
        extremes,
    })
}

pub const REPORT_FILE: &str = "report.json";

pub fn run_dir_name(subject: Option<u32>, seed: u64) -> String {
    match subject {
        Some(s) => format!("subject_{s:02}_seed_{seed}"),
        None => format!("subject_all_seed_{seed}"),
    }
}

/// Plot-ready population table: genome, decoded hyperparameters, raw
/// objectives, rank and crowding distance.
pub fn front_csv(g: &GenerationReport) -> String {
    let mut out = String::from("log10_c,log10_gamma,c,gamma,neg_accuracy,rest_fn,rank,crowding\n");
    for m in &g.population {
        let crowding = if m.crowding.is_infinite() { "inf".to_string() } else { m.crowding.to_string() };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            m.genome[0], m.genome[1], m.hyperparams.c, m.hyperparams.gamma, m.objectives[0], m.objectives[1], m.rank, crowding
        )
        .expect("writing to a String");
    }
    out
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, TuneError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| TuneError::Io { path: parent.display().to_string(), source })?;
    }
    fs::write(&path, contents).map_err(|source| TuneError::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

pub fn write_generation(dir: &Path, g: &GenerationReport) -> Result<PathBuf, TuneError> {
    write_file(dir.join("fronts").join(format!("gen_{:03}.csv", g.generation)), &front_csv(g))
}

/// Writes the report JSON, every front CSV and the extremes' confusion
/// matrices under `dir`; returns the written paths.
pub fn write_run(dir: &Path, report: &TuneReport) -> Result<Vec<PathBuf>, TuneError> {
    let mut written = vec![write_file(dir.join(REPORT_FILE), &report.to_json()?)?];
    for g in &report.generations {
        written.push(write_generation(dir, g)?);
    }
    for e in &report.extremes {
        for (set, summary) in [("validation", &e.validation), ("ts1", &e.ts1), ("ts2", &e.ts2)] {
            let path = dir.join("confusion").join(format!("{}_{set}.csv", e.tag.as_str()));
            written.push(write_file(path, &summary.confusion.to_csv())?);
        }
    }
    Ok(written)
}
