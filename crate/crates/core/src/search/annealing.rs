//! Simulated-annealing biclustering.
//!
//! Each initial bicluster seeds an independent chain. A chain repeatedly
//! flips one random row or column bit, scores the neighbour with the
//! thresholded-volume fitness and accepts it by the Boltzmann rule. The
//! temperature follows `T <- T / (1 + alpha)` until it drops to `t_min`.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{aggregate, ScoredBicluster, SearchOutcome, SearchStrategy};
use crate::bicluster::{random_population, Bicluster, BiclusterScore};
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::metrics::{score, AcvThreshold};
use crate::parallel::Parallelism;
use crate::rng::{chain_rng, SearchRng};

pub const NAME: &str = "sa";

/// Upper bound on moves per chain in pseudocode-compatible mode, where the
/// temperature only drops on rejected moves and a flat fitness plateau would
/// otherwise never cool.
pub const COMPAT_MOVE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealingConfig {
    pub t_initial: f64,
    pub alpha: f64,
    pub t_min: f64,
    pub population: usize,
    pub delta: AcvThreshold,
    pub moves_per_temperature: usize,
    pub seed: u64,
    /// Replays the literal loop: best updated without moving on improvement,
    /// cooling only on rejection, one move per step.
    pub compat_pseudocode: bool,
}

impl Default for AnnealingConfig {
    fn default() -> Self {
        Self {
            t_initial: 50.0,
            alpha: 0.7,
            t_min: 0.01,
            population: 100,
            delta: AcvThreshold::DEFAULT,
            moves_per_temperature: 20,
            seed: 0,
            compat_pseudocode: false,
        }
    }
}

impl AnnealingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BiclusterError::InvalidParameter(msg));
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return bad(format!("t_min must be positive, got {}", self.t_min));
        }
        if !(self.t_initial > self.t_min && self.t_initial.is_finite()) {
            return bad(format!(
                "t_initial ({}) must exceed t_min ({})",
                self.t_initial, self.t_min
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.population == 0 {
            return bad("population must be at least 1".into());
        }
        if self.moves_per_temperature == 0 {
            return bad("moves_per_temperature must be at least 1".into());
        }
        Ok(())
    }

    /// Number of cooling steps a chain performs in epoch mode.
    pub fn cooling_steps(&self) -> usize {
        let mut t = self.t_initial;
        let mut k = 0;
        while t > self.t_min {
            t = cool(t, self.alpha);
            k += 1;
        }
        k
    }
}

/// Search state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: Bicluster,
    pub current_energy: f64,
    pub best: Bicluster,
    pub best_energy: f64,
    pub best_score: BiclusterScore,
    pub temperature: f64,
    pub rng: SearchRng,
    /// Neighbours evaluated so far.
    pub moves: usize,
    pub cooling_steps: usize,
    /// `(temperature, best_energy)` recorded after every cooling step.
    pub trace: Vec<(f64, f64)>,
}

/// Copy of `b` with one uniformly chosen row or column bit flipped.
pub fn neighbor(b: &Bicluster, rng: &mut SearchRng) -> Bicluster {
    let index = rng.random_range(0..b.encoding_len());
    b.flipped(index)
}

/// Boltzmann acceptance for a maximization problem. `delta_e = e_new - e`;
/// non-negative changes are always accepted, worse ones with probability
/// `exp(delta_e / temperature)`.
pub fn accept(delta_e: f64, temperature: f64, rng: &mut SearchRng) -> Result<bool> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(BiclusterError::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if delta_e >= 0.0 {
        return Ok(true);
    }
    Ok((delta_e / temperature).exp() > rng.random::<f64>())
}

/// One step of the geometric schedule `T / (1 + alpha)`.
pub fn cool(temperature: f64, alpha: f64) -> f64 {
    temperature / (1.0 + alpha)
}

/// Runs one chain from `start` to termination.
pub fn run_chain(
    start: Bicluster,
    config: &AnnealingConfig,
    matrix: &SessionPageMatrix,
    rng: SearchRng,
) -> Result<ChainState> {
    config.validate()?;
    start.check_against(matrix)?;
    let start_score = score(&start, matrix, config.delta)?;
    let mut state = ChainState {
        current: start.clone(),
        current_energy: start_score.fitness,
        best: start,
        best_energy: start_score.fitness,
        best_score: start_score,
        temperature: config.t_initial,
        rng,
        moves: 0,
        cooling_steps: 0,
        trace: Vec::new(),
    };
    if config.compat_pseudocode {
        run_compat(&mut state, config, matrix)?;
    } else {
        run_epochs(&mut state, config, matrix)?;
    }
    Ok(state)
}

fn run_epochs(state: &mut ChainState, config: &AnnealingConfig, matrix: &SessionPageMatrix) -> Result<()> {
    while state.temperature > config.t_min {
        for _ in 0..config.moves_per_temperature {
            let candidate = neighbor(&state.current, &mut state.rng);
            let cand_score = score(&candidate, matrix, config.delta)?;
            let e_new = cand_score.fitness;
            state.moves += 1;
            if e_new > state.best_energy {
                state.best = candidate.clone();
                state.best_energy = e_new;
                state.best_score = cand_score;
            }
            if accept(e_new - state.current_energy, state.temperature, &mut state.rng)? {
                state.current = candidate;
                state.current_energy = e_new;
            }
        }
        state.temperature = cool(state.temperature, config.alpha);
        state.cooling_steps += 1;
        state.trace.push((state.temperature, state.best_energy));
    }
    Ok(())
}

fn run_compat(state: &mut ChainState, config: &AnnealingConfig, matrix: &SessionPageMatrix) -> Result<()> {
    while state.temperature > config.t_min && state.moves < COMPAT_MOVE_LIMIT {
        let candidate = neighbor(&state.current, &mut state.rng);
        let cand_score = score(&candidate, matrix, config.delta)?;
        let e_new = cand_score.fitness;
        state.moves += 1;
        if e_new > state.best_energy {
            state.best = candidate;
            state.best_energy = e_new;
            state.best_score = cand_score;
        } else if accept(e_new - state.current_energy, state.temperature, &mut state.rng)? {
            state.current = candidate;
            state.current_energy = e_new;
        } else {
            state.temperature = cool(state.temperature, config.alpha);
            state.cooling_steps += 1;
            state.trace.push((state.temperature, state.best_energy));
        }
    }
    Ok(())
}

/// Runs one chain per initial bicluster and aggregates the chain bests.
pub fn run_sa(matrix: &SessionPageMatrix, config: &AnnealingConfig, parallelism: Parallelism) -> Result<SearchOutcome> {
    config.validate()?;
    let started = Instant::now();
    let population = random_population(matrix.n_rows(), matrix.n_cols(), config.population, config.seed)?;
    let bests = parallelism.map(population.len(), |i| {
        let chain = run_chain(population[i].clone(), config, matrix, chain_rng(config.seed, i))?;
        Ok(ScoredBicluster {
            bicluster: chain.best,
            score: chain.best_score,
        })
    })?;
    aggregate(
        NAME,
        bests,
        serde_json::to_value(config)?,
        started.elapsed(),
    )
}

/// Registry entry for simulated annealing.
#[derive(Debug, Clone)]
pub struct SimulatedAnnealing {
    config: AnnealingConfig,
}

impl SimulatedAnnealing {
    pub fn new(config: AnnealingConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &AnnealingConfig {
        &self.config
    }
}

impl SearchStrategy for SimulatedAnnealing {
    fn name(&self) -> &'static str {
        NAME
    }

    fn config_echo(&self) -> serde_json::Value {
        serde_json::to_value(&self.config).expect("config serializes")
    }

    fn search(&self, matrix: &SessionPageMatrix, parallelism: Parallelism) -> Result<SearchOutcome> {
        run_sa(matrix, &self.config, parallelism)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn rng(seed: u64) -> SearchRng {
        chain_rng(seed, 0)
    }

    #[test]
    fn cool_examples() {
        assert!((cool(50.0, 0.7) - 29.411_764_705_882_355).abs() < 1e-12);
        assert_eq!(cool(3.5, 0.0), 3.5);
        let mut t = 50.0;
        let mut k = 0;
        while t >= 0.01 {
            t = cool(t, 0.7);
            k += 1;
        }
        assert_eq!(k, 17);
        assert_eq!(AnnealingConfig::default().cooling_steps(), 17);
    }

    #[test]
    fn accept_rules() {
        let mut r = rng(1);
        assert!(accept(0.0, 1.0, &mut r).unwrap());
        assert!(accept(5.0, 1e-9, &mut r).unwrap());
        assert!(accept(-1.0, 0.0, &mut r).is_err());
        assert!(accept(-1.0, -2.0, &mut r).is_err());
    }

    #[test]
    fn neighbor_flips_exactly_one_bit() {
        let mut r = rng(3);
        let b = Bicluster::full(7, 4);
        for _ in 0..200 {
            let n = neighbor(&b, &mut r);
            let diff = b.encoding().iter().zip(n.encoding()).filter(|(x, y)| **x != *y).count();
            assert_eq!(diff, 1);
        }
        let seq = |seed| {
            let mut r = rng(seed);
            (0..20).map(|_| neighbor(&b, &mut r)).collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn config_validation() {
        let mut c = AnnealingConfig::default();
        assert!(c.validate().is_ok());
        c.t_min = 60.0;
        assert!(c.validate().is_err());
        let c = AnnealingConfig {
            alpha: 0.0,
            ..AnnealingConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_epoch_boundary() {
        let m = SessionPageMatrix::from_values(Array2::from_shape_fn((4, 3), |(i, j)| (i * 3 + j) as f64 % 5.0)).unwrap();
        let config = AnnealingConfig {
            t_initial: 0.01 * 1.001,
            moves_per_temperature: 1,
            ..AnnealingConfig::default()
        };
        let state = run_chain(Bicluster::full(4, 3), &config, &m, rng(0)).unwrap();
        assert_eq!(state.moves, 1);
        assert_eq!(state.cooling_steps, 1);
    }

    #[test]
    fn compat_mode_terminates() {
        let m = SessionPageMatrix::from_values(Array2::from_shape_fn((6, 5), |(i, j)| ((i * 7 + j * 3) % 11) as f64)).unwrap();
        let config = AnnealingConfig {
            compat_pseudocode: true,
            moves_per_temperature: 1,
            population: 3,
            ..AnnealingConfig::default()
        };
        let state = run_chain(Bicluster::full(6, 5), &config, &m, rng(2)).unwrap();
        assert!(state.moves <= COMPAT_MOVE_LIMIT);
        assert!(state.best_energy >= score(&Bicluster::full(6, 5), &m, config.delta).unwrap().fitness);
    }
}
