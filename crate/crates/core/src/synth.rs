//! Planted-block benchmark matrices.
//!
//! Background cells are uniform on `[0, 1)`. Inside the planted block every
//! row is a positive multiple of one base row plus Gaussian noise, clamped
//! back into `[0, 1]`, so the block is a scaling-pattern bicluster whose
//! location is known.

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bicluster::Bicluster;
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::rng::synth_rng;

/// Range of the per-row scale factors inside the block.
const SCALE_RANGE: (f64, f64) = (0.6, 1.0);
/// Range the base row's values are evenly spread over.
const BASE_RANGE: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    /// Standard deviation of the Gaussian noise added inside the block.
    pub noise: f64,
    pub seed: u64,
}

/// The 100x20 benchmark with a 30x6 block and noise 0.01.
impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            rows: 100,
            cols: 20,
            block_rows: 30,
            block_cols: 6,
            noise: 0.01,
            seed: 0,
        }
    }
}

/// Ground truth written next to a synthetic matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl PlantedBlock {
    pub fn bicluster(&self, n_rows: usize, n_cols: usize) -> Result<Bicluster> {
        Bicluster::from_indices(n_rows, n_cols, &self.rows, &self.cols)
    }

    pub fn volume(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    /// Fraction of planted cells covered by `b`.
    pub fn recall(&self, b: &Bicluster) -> f64 {
        let rows = self.rows.iter().filter(|&&r| b.row_mask().get(r).copied().unwrap_or(false)).count();
        let cols = self.cols.iter().filter(|&&c| b.col_mask().get(c).copied().unwrap_or(false)).count();
        (rows * cols) as f64 / self.volume() as f64
    }
}

#[derive(Debug, Clone)]
pub struct SynthMatrix {
    pub matrix: SessionPageMatrix,
    pub planted: PlantedBlock,
}

pub fn generate(spec: &SynthSpec) -> Result<SynthMatrix> {
    if spec.rows < 2 || spec.cols < 2 {
        return Err(BiclusterError::InvalidParameter(format!(
            "matrix must be at least 2x2, got {}x{}",
            spec.rows, spec.cols
        )));
    }
    if spec.block_rows == 0 || spec.block_cols == 0 || spec.block_rows > spec.rows || spec.block_cols > spec.cols {
        return Err(BiclusterError::InvalidParameter(format!(
            "planted block {}x{} does not fit in {}x{} matrix",
            spec.block_rows, spec.block_cols, spec.rows, spec.cols
        )));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(BiclusterError::InvalidParameter(format!("noise level {} must be >= 0", spec.noise)));
    }

    let mut rng = synth_rng(spec.seed);
    let mut values = Array2::from_shape_simple_fn((spec.rows, spec.cols), || rng.random::<f64>());

    let mut rows = index::sample(&mut rng, spec.rows, spec.block_rows).into_vec();
    let mut cols = index::sample(&mut rng, spec.cols, spec.block_cols).into_vec();
    rows.sort_unstable();
    cols.sort_unstable();

    let (lo, hi) = BASE_RANGE;
    let step = if spec.block_cols > 1 { (hi - lo) / (spec.block_cols - 1) as f64 } else { 0.0 };
    let mut base: Vec<f64> = (0..spec.block_cols).map(|j| lo + step * j as f64).collect();
    base.shuffle(&mut rng);

    let normal = Normal::new(0.0, spec.noise).map_err(|e| BiclusterError::InvalidParameter(e.to_string()))?;
    for &r in &rows {
        let scale = rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1);
        for (k, &c) in cols.iter().enumerate() {
            let eps = if spec.noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            values[[r, c]] = (scale * base[k] + eps).clamp(0.0, 1.0);
        }
    }

    Ok(SynthMatrix {
        matrix: SessionPageMatrix::from_values(values)?,
        planted: PlantedBlock { rows, cols },
    })
}
