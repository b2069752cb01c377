//! Real-coded NSGA-II.
//!
//! Objectives are always minimized. One generation:
//!
//! 1. crowded binary tournament on the ranked parent population (two passes
//!    over shuffled pairings, `N/2` winners each);
//! 2. SBX on consecutive mating pairs, then polynomial mutation;
//! 3. evaluation of the offspring;
//! 4. non-dominated sort of parents ∪ offspring and survivor selection by
//!    front, breaking the last partial front by descending crowding distance.
//!
//! Randomness comes from per-(generation, index, operator) streams, so the
//! result does not depend on how evaluations are scheduled.

mod engine;
mod operators;
mod sorting;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{
    evolve, evolve_observed, initial_population, survivor_select, Evaluation, Evaluator, EvolutionResult, FnEvaluator, Generation,
    Individual,
};
pub use operators::{
    crowded_tournament_select, polynomial_delta, polynomial_mutation, sbx_beta, sbx_children, sbx_crossover,
};
pub use sorting::{assign_rank_and_crowding, crowding_distance, dominates, fast_nondominated_sort};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum Nsga2Error {
    #[error("objective vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("individual {0} has non-finite objectives (not evaluated)")]
    NotEvaluated(usize),
    #[error("individual {0} has no rank or crowding distance")]
    MissingRankOrCrowding(usize),
    #[error("gene {index} = {value} outside [{lower}, {upper}]")]
    OutOfBounds { index: usize, value: f64, lower: f64, upper: f64 },
    #[error("genome has {found} genes, bounds have {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("evaluation failed at genome {genome:?}: {source}")]
    Evaluation {
        genome: Vec<f64>,
        #[source]
        source: BoxError,
    },
}

/// Box constraints, `lower < upper` per gene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, Nsga2Error> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Nsga2Error::InvalidBounds("lower and upper must be non-empty and equally long".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Nsga2Error::InvalidBounds(format!("gene {i}: need finite lower {l} < upper {u}")));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, Nsga2Error> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn check(&self, genome: &[f64]) -> Result<(), Nsga2Error> {
        if genome.len() != self.dim() {
            return Err(Nsga2Error::DimensionMismatch { expected: self.dim(), found: genome.len() });
        }
        for (index, &value) in genome.iter().enumerate() {
            let (lower, upper) = (self.lower[index], self.upper[index]);
            if !(lower..=upper).contains(&value) {
                return Err(Nsga2Error::OutOfBounds { index, value, lower, upper });
            }
        }
        Ok(())
    }

    pub fn clamp(&self, genome: &mut [f64]) {
        for (i, g) in genome.iter_mut().enumerate() {
            *g = g.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    /// Crossover probability per mating pair.
    pub pc: f64,
    /// SBX distribution index.
    pub eta_c: f64,
    /// Mutation probability per gene.
    pub pm: f64,
    /// Polynomial mutation distribution index.
    pub eta_m: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self { pc: 0.6, eta_c: 15.0, pm: 0.4, eta_m: 20.0 }
    }
}

impl OperatorParams {
    pub fn validate(&self) -> Result<(), Nsga2Error> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let index = |e: f64| e.is_finite() && e > 0.0;
        if prob(self.pc) && prob(self.pm) && index(self.eta_c) && index(self.eta_m) {
            Ok(())
        } else {
            Err(Nsga2Error::InvalidConfig(format!("operator parameters out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// A lattice over the bounds (corners included) filled up with Latin
    /// hypercube samples.
    GridThenLatinHypercube,
    LatinHypercube,
}

impl std::str::FromStr for InitStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grid_lhs" | "grid_then_latin_hypercube" => Ok(Self::GridThenLatinHypercube),
            "lhs" | "latin_hypercube" => Ok(Self::LatinHypercube),
            other => Err(format!("unknown init strategy `{other}` (expected grid_lhs or lhs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
    pub operators: OperatorParams,
    pub init: InitStrategy,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 98,
            generations: 10,
            seed: 0,
            operators: OperatorParams::default(),
            init: InitStrategy::GridThenLatinHypercube,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), Nsga2Error> {
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return Err(Nsga2Error::InvalidConfig(format!(
                "population size {} must be even and at least 2",
                self.population_size
            )));
        }
        if self.generations == 0 {
            return Err(Nsga2Error::InvalidConfig("at least one generation required".into()));
        }
        self.operators.validate()
    }
}
