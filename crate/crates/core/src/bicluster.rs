//! Biclusters as binary row/column membership masks.

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::rng::population_rng;

/// A selected subset of rows (sessions) and columns (pages).
///
/// Flattened, a bicluster is the bit string of length `n_rows + n_cols`
/// whose first `n_rows` bits are the row mask and whose last `n_cols` bits
/// are the column mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bicluster {
    rows: Vec<bool>,
    cols: Vec<bool>,
}

impl Bicluster {
    pub fn new(rows: Vec<bool>, cols: Vec<bool>) -> Self {
        Self { rows, cols }
    }

    pub fn full(n_rows: usize, n_cols: usize) -> Self {
        Self::new(vec![true; n_rows], vec![true; n_cols])
    }

    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        Self::new(vec![false; n_rows], vec![false; n_cols])
    }

    pub fn from_indices(n_rows: usize, n_cols: usize, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let mut b = Self::empty(n_rows, n_cols);
        for &r in rows {
            *b.rows.get_mut(r).ok_or_else(|| {
                BiclusterError::Dimension(format!("row index {r} out of range for {n_rows} rows"))
            })? = true;
        }
        for &c in cols {
            *b.cols.get_mut(c).ok_or_else(|| {
                BiclusterError::Dimension(format!("column index {c} out of range for {n_cols} columns"))
            })? = true;
        }
        Ok(b)
    }

    pub fn from_encoding(bits: &[bool], n_rows: usize) -> Result<Self> {
        if n_rows > bits.len() {
            return Err(BiclusterError::Dimension(format!(
                "encoding of length {} cannot hold {n_rows} row bits",
                bits.len()
            )));
        }
        let (rows, cols) = bits.split_at(n_rows);
        Ok(Self::new(rows.to_vec(), cols.to_vec()))
    }

    pub fn encoding(&self) -> Vec<bool> {
        self.rows.iter().chain(&self.cols).copied().collect()
    }

    pub fn encoding_len(&self) -> usize {
        self.rows.len() + self.cols.len()
    }

    /// Toggles bit `index` of the flat encoding.
    pub fn flip(&mut self, index: usize) {
        let n = self.rows.len();
        if index < n {
            self.rows[index] = !self.rows[index];
        } else {
            self.cols[index - n] = !self.cols[index - n];
        }
    }

    pub fn flipped(&self, index: usize) -> Self {
        let mut b = self.clone();
        b.flip(index);
        b
    }

    pub fn row_mask(&self) -> &[bool] {
        &self.rows
    }

    pub fn col_mask(&self) -> &[bool] {
        &self.cols
    }

    pub fn row_indices(&self) -> Vec<usize> {
        selected(&self.rows)
    }

    pub fn col_indices(&self) -> Vec<usize> {
        selected(&self.cols)
    }

    pub fn n_selected_rows(&self) -> usize {
        self.rows.iter().filter(|&&b| b).count()
    }

    pub fn n_selected_cols(&self) -> usize {
        self.cols.iter().filter(|&&b| b).count()
    }

    /// `|U| * |P|`.
    pub fn volume(&self) -> usize {
        self.n_selected_rows() * self.n_selected_cols()
    }

    /// At least two rows and two columns selected.
    pub fn is_scorable(&self) -> bool {
        self.n_selected_rows() >= 2 && self.n_selected_cols() >= 2
    }

    pub fn check_against(&self, m: &SessionPageMatrix) -> Result<()> {
        if self.rows.len() != m.n_rows() || self.cols.len() != m.n_cols() {
            return Err(BiclusterError::Dimension(format!(
                "bicluster masks {}x{} do not match {}x{} matrix",
                self.rows.len(),
                self.cols.len(),
                m.n_rows(),
                m.n_cols()
            )));
        }
        Ok(())
    }

    /// Selected rows and columns of `m`, in their original order.
    pub fn submatrix(&self, m: &SessionPageMatrix) -> Result<Array2<f64>> {
        self.check_against(m)?;
        let rows = self.row_indices();
        let cols = self.col_indices();
        if rows.is_empty() {
            return Err(BiclusterError::EmptySelection("rows"));
        }
        if cols.is_empty() {
            return Err(BiclusterError::EmptySelection("columns"));
        }
        Ok(m.values().select(Axis(0), &rows).select(Axis(1), &cols))
    }

    /// Cartesian product of the selected row and column indices.
    pub fn cells(&self) -> BTreeSet<(usize, usize)> {
        let cols = self.col_indices();
        self.row_indices()
            .into_iter()
            .flat_map(|r| cols.iter().map(move |&c| (r, c)))
            .collect()
    }

    /// Number of cells shared with `other`, without materializing either set.
    pub fn shared_cells(&self, other: &Bicluster) -> usize {
        let common = |a: &[bool], b: &[bool]| a.iter().zip(b).filter(|(x, y)| **x && **y).count();
        common(&self.rows, &other.rows) * common(&self.cols, &other.cols)
    }
}

fn selected(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// `count` random biclusters over an `n_rows x n_cols` matrix; every mask
/// bit is `round(u)` for `u` uniform on `[0, 1)`.
pub fn random_population(n_rows: usize, n_cols: usize, count: usize, seed: u64) -> Result<Vec<Bicluster>> {
    if n_rows < 2 || n_cols < 2 {
        return Err(BiclusterError::DegenerateMatrix(format!(
            "{n_rows}x{n_cols} matrix, need at least 2x2"
        )));
    }
    if count == 0 {
        return Err(BiclusterError::InvalidParameter("population size must be at least 1".into()));
    }
    let mut rng = population_rng(seed);
    let len = n_rows + n_cols;
    Ok((0..count)
        .map(|_| {
            let bits: Vec<bool> = (0..len).map(|_| rng.random::<f64>() >= 0.5).collect();
            Bicluster::from_encoding(&bits, n_rows).expect("length fits")
        })
        .collect())
}

/// Cached quality of a bicluster. `acv` is `None` when fewer than two rows
/// or two columns are selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiclusterScore {
    pub acv: Option<f64>,
    pub volume: usize,
    pub fitness: f64,
}

/// Serialized form of a scored bicluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiclusterRecord {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub acv: Option<f64>,
    pub volume: usize,
    pub fitness: f64,
}

impl BiclusterRecord {
    pub fn new(b: &Bicluster, score: &BiclusterScore) -> Self {
        Self {
            rows: b.row_indices(),
            cols: b.col_indices(),
            acv: score.acv,
            volume: score.volume,
            fitness: score.fitness,
        }
    }

    pub fn to_bicluster(&self, n_rows: usize, n_cols: usize) -> Result<Bicluster> {
        Bicluster::from_indices(n_rows, n_cols, &self.rows, &self.cols)
    }
}
