//! Search strategies for optimal biclusters.
//!
//! Each algorithm implements [`SearchStrategy`] and is registered by name in
//! a [`StrategyRegistry`]; callers pick one at runtime from a flag or config
//! value. Both built-in strategies start from the same seeded random
//! population and share the aggregation step in [`aggregate`].

pub mod annealing;
pub mod greedy;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bicluster::{Bicluster, BiclusterRecord, BiclusterScore};
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::metrics::{overlapping_degree, pair_overlap, AcvThreshold};
use crate::parallel::Parallelism;
use crate::report::RunReport;

pub use annealing::{AnnealingConfig, SimulatedAnnealing};
pub use greedy::{GreedyConfig, GreedyHillClimb};

/// Pairwise cell overlap at or above which two solutions count as the same.
pub const DEDUP_OVERLAP: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBicluster {
    pub bicluster: Bicluster,
    pub score: BiclusterScore,
}

impl ScoredBicluster {
    pub fn record(&self) -> BiclusterRecord {
        BiclusterRecord::new(&self.bicluster, &self.score)
    }
}

/// Optimal set (best first) plus run statistics.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub biclusters: Vec<ScoredBicluster>,
    pub report: RunReport,
}

impl SearchOutcome {
    pub fn records(&self) -> Vec<BiclusterRecord> {
        self.biclusters.iter().map(ScoredBicluster::record).collect()
    }

    pub fn top(&self) -> &ScoredBicluster {
        &self.biclusters[0]
    }
}

pub trait SearchStrategy: Send + Sync {
    /// Registry name, also written to `RunReport::method`.
    fn name(&self) -> &'static str;

    /// Parameters echoed into the run report.
    fn config_echo(&self) -> serde_json::Value;

    fn search(&self, matrix: &SessionPageMatrix, parallelism: Parallelism) -> Result<SearchOutcome>;
}

/// Every tunable a registered strategy may read. Strategies ignore the
/// fields that do not apply to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub t_initial: f64,
    pub alpha: f64,
    pub t_min: f64,
    pub population: usize,
    pub delta: AcvThreshold,
    pub moves_per_temperature: usize,
    pub seed: u64,
    pub compat_pseudocode: bool,
    pub max_stall: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        let sa = AnnealingConfig::default();
        let greedy = GreedyConfig::default();
        Self {
            t_initial: sa.t_initial,
            alpha: sa.alpha,
            t_min: sa.t_min,
            population: sa.population,
            delta: sa.delta,
            moves_per_temperature: sa.moves_per_temperature,
            seed: sa.seed,
            compat_pseudocode: sa.compat_pseudocode,
            max_stall: greedy.max_stall,
        }
    }
}

impl SearchParams {
    pub fn annealing(&self) -> AnnealingConfig {
        AnnealingConfig {
            t_initial: self.t_initial,
            alpha: self.alpha,
            t_min: self.t_min,
            population: self.population,
            delta: self.delta,
            moves_per_temperature: self.moves_per_temperature,
            seed: self.seed,
            compat_pseudocode: self.compat_pseudocode,
        }
    }

    pub fn greedy(&self) -> GreedyConfig {
        GreedyConfig {
            population: self.population,
            delta: self.delta,
            seed: self.seed,
            max_stall: self.max_stall,
        }
    }
}

pub type StrategyFactory = fn(&SearchParams) -> Result<Box<dyn SearchStrategy>>;

/// Name -> constructor table for search strategies.
pub struct StrategyRegistry {
    factories: BTreeMap<&'static str, StrategyFactory>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry holding `sa` and `greedy`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(annealing::NAME, |p| {
            Ok(Box::new(SimulatedAnnealing::new(p.annealing())?) as Box<dyn SearchStrategy>)
        });
        r.register(greedy::NAME, |p| {
            Ok(Box::new(GreedyHillClimb::new(p.greedy())?) as Box<dyn SearchStrategy>)
        });
        r
    }

    /// Adds or replaces the strategy called `name`.
    pub fn register(&mut self, name: &'static str, factory: StrategyFactory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, params: &SearchParams) -> Result<Box<dyn SearchStrategy>> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| BiclusterError::UnknownStrategy(name.to_string()))?;
        factory(params)
    }
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Turns per-chain (or per-restart) results into an optimal set.
///
/// Candidates with zero fitness are dropped whenever at least one candidate
/// clears the ACV threshold. The rest are sorted by fitness, then ACV, then
/// original index, and any candidate overlapping an already kept one by
/// [`DEDUP_OVERLAP`] or more is discarded.
pub fn aggregate(
    method: &str,
    candidates: Vec<ScoredBicluster>,
    config_echo: serde_json::Value,
    elapsed: Duration,
) -> Result<SearchOutcome> {
    if candidates.is_empty() {
        return Err(BiclusterError::EmptyInput("search produced no candidates".into()));
    }
    let any_feasible = candidates.iter().any(|c| c.score.fitness > 0.0);
    let mut pool: Vec<(usize, ScoredBicluster)> = candidates
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !any_feasible || c.score.fitness > 0.0)
        .collect();
    pool.sort_by(|(ia, a), (ib, b)| {
        b.score
            .fitness
            .total_cmp(&a.score.fitness)
            .then_with(|| acv_or_zero(&b.score).total_cmp(&acv_or_zero(&a.score)))
            .then_with(|| ia.cmp(ib))
    });

    let mut kept: Vec<ScoredBicluster> = Vec::new();
    for (_, cand) in pool {
        let duplicate = kept.iter().any(|k| {
            k.bicluster == cand.bicluster || pair_overlap(&k.bicluster, &cand.bicluster) >= DEDUP_OVERLAP
        });
        if !duplicate {
            kept.push(cand);
        }
    }

    let report = RunReport::from_set(method, &kept, config_echo, elapsed)?;
    Ok(SearchOutcome {
        biclusters: kept,
        report,
    })
}

/// ACV used for ranking and statistics; degenerate selections count as 0.
pub fn acv_or_zero(score: &BiclusterScore) -> f64 {
    score.acv.unwrap_or(0.0)
}

pub(crate) fn set_overlap(set: &[ScoredBicluster]) -> Result<f64> {
    let bs: Vec<Bicluster> = set.iter().map(|s| s.bicluster.clone()).collect();
    overlapping_degree(&bs)
}
