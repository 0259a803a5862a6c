//! Steepest-ascent hill climbing over single-bit flips.
//!
//! From each initial bicluster every row/column flip is scored and the best
//! strictly improving one is taken (lowest bit index on ties). A climb stops
//! at a single-flip local optimum or after `max_stall` sweeps.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{aggregate, ScoredBicluster, SearchOutcome, SearchStrategy};
use crate::bicluster::{random_population, Bicluster, BiclusterScore};
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::metrics::{score, AcvThreshold};
use crate::parallel::Parallelism;

pub const NAME: &str = "greedy";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub population: usize,
    pub delta: AcvThreshold,
    pub seed: u64,
    pub max_stall: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            population: 100,
            delta: AcvThreshold::DEFAULT,
            seed: 0,
            max_stall: 1000,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(BiclusterError::InvalidParameter("population must be at least 1".into()));
        }
        if self.max_stall == 0 {
            return Err(BiclusterError::InvalidParameter("max_stall must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one climb.
#[derive(Debug, Clone)]
pub struct Climb {
    pub end: ScoredBicluster,
    /// Fitness after each accepted move, starting with the initial fitness.
    pub trajectory: Vec<f64>,
    pub sweeps: usize,
}

pub fn climb(start: Bicluster, matrix: &SessionPageMatrix, config: &GreedyConfig) -> Result<Climb> {
    start.check_against(matrix)?;
    let mut current = start;
    let mut current_score = score(&current, matrix, config.delta)?;
    let mut trajectory = vec![current_score.fitness];
    let mut sweeps = 0;
    while sweeps < config.max_stall {
        sweeps += 1;
        let mut best: Option<(usize, BiclusterScore)> = None;
        for index in 0..current.encoding_len() {
            let s = score(&current.flipped(index), matrix, config.delta)?;
            let bar = best.map_or(current_score.fitness, |(_, b)| b.fitness);
            if s.fitness > bar {
                best = Some((index, s));
            }
        }
        let Some((index, s)) = best else { break };
        current.flip(index);
        current_score = s;
        trajectory.push(s.fitness);
    }
    Ok(Climb {
        end: ScoredBicluster {
            bicluster: current,
            score: current_score,
        },
        trajectory,
        sweeps,
    })
}

pub fn run_greedy(matrix: &SessionPageMatrix, config: &GreedyConfig, parallelism: Parallelism) -> Result<SearchOutcome> {
    config.validate()?;
    let started = Instant::now();
    let population = random_population(matrix.n_rows(), matrix.n_cols(), config.population, config.seed)?;
    let ends = parallelism.map(population.len(), |i| Ok(climb(population[i].clone(), matrix, config)?.end))?;
    aggregate(NAME, ends, serde_json::to_value(config)?, started.elapsed())
}

/// Registry entry for the hill-climbing baseline.
#[derive(Debug, Clone)]
pub struct GreedyHillClimb {
    config: GreedyConfig,
}

impl GreedyHillClimb {
    pub fn new(config: GreedyConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }
}

impl SearchStrategy for GreedyHillClimb {
    fn name(&self) -> &'static str {
        NAME
    }

    fn config_echo(&self) -> serde_json::Value {
        serde_json::to_value(&self.config).expect("config serializes")
    }

    fn search(&self, matrix: &SessionPageMatrix, parallelism: Parallelism) -> Result<SearchOutcome> {
        run_greedy(matrix, &self.config, parallelism)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn scaled_rows(rows: usize, cols: usize) -> SessionPageMatrix {
        SessionPageMatrix::from_values(Array2::from_shape_fn((rows, cols), |(i, j)| {
            (0.2 + 0.1 * j as f64) * (1.0 + 0.1 * i as f64) / 3.0
        }))
        .unwrap()
    }

    #[test]
    fn optimum_is_fixed_point() {
        let m = scaled_rows(6, 5);
        let c = climb(Bicluster::full(6, 5), &m, &GreedyConfig::default()).unwrap();
        assert_eq!(c.end.bicluster, Bicluster::full(6, 5));
        assert_eq!(c.trajectory, vec![30.0]);
    }

    #[test]
    fn climbs_to_full_matrix_from_small_seed() {
        let m = scaled_rows(6, 5);
        let start = Bicluster::from_indices(6, 5, &[0, 1], &[0, 1]).unwrap();
        let c = climb(start, &m, &GreedyConfig::default()).unwrap();
        assert_eq!(c.end.score.fitness, 30.0);
        assert!(c.trajectory.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn stall_limit_caps_sweeps() {
        let m = scaled_rows(6, 5);
        let start = Bicluster::from_indices(6, 5, &[0, 1], &[0, 1]).unwrap();
        let config = GreedyConfig {
            max_stall: 1,
            ..GreedyConfig::default()
        };
        let c = climb(start, &m, &config).unwrap();
        assert_eq!(c.sweeps, 1);
        assert_eq!(c.trajectory.len(), 2);
    }
}
