//! Correlation-based bicluster quality: Pearson correlation, the average
//! correlation value (ACV), the thresholded volume fitness and the
//! overlapping degree of a bicluster set.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::bicluster::{Bicluster, BiclusterScore};
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;

/// Minimum ACV a bicluster needs for non-zero fitness.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AcvThreshold(f64);

impl AcvThreshold {
    pub const DEFAULT: AcvThreshold = AcvThreshold(0.93);

    /// Accepts values in `[0, 1]`. Zero turns fitness into plain volume.
    pub fn new(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(BiclusterError::InvalidParameter(format!(
                "ACV threshold {delta} must lie in [0, 1]"
            )));
        }
        Ok(Self(delta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for AcvThreshold {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl TryFrom<f64> for AcvThreshold {
    type Error = BiclusterError;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AcvThreshold> for f64 {
    fn from(t: AcvThreshold) -> f64 {
        t.0
    }
}

/// Pearson correlation of `x` and `y`; `Ok(None)` if either has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(BiclusterError::Dimension(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(BiclusterError::Dimension(format!(
            "correlation needs at least 2 observations, got {}",
            x.len()
        )));
    }
    if is_constant(x.iter()) || is_constant(y.iter()) {
        return Ok(None);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

fn is_constant<'a>(mut values: impl Iterator<Item = &'a f64>) -> bool {
    match values.next() {
        Some(first) => values.all(|v| v == first),
        None => true,
    }
}

/// Centers each lane of `a` along `axis` and scales it to unit norm.
/// Constant lanes are zeroed so they correlate with nothing.
fn standardized(a: &Array2<f64>, axis: Axis) -> Array2<f64> {
    let mut z = a.clone();
    for mut lane in z.lanes_mut(axis) {
        if is_constant(lane.iter()) {
            lane.fill(0.0);
            continue;
        }
        let mean = lane.mean().unwrap_or(0.0);
        lane.mapv_inplace(|v| v - mean);
        let norm = lane.dot(&lane).sqrt();
        if norm > 0.0 {
            lane.mapv_inplace(|v| v / norm);
        } else {
            lane.fill(0.0);
        }
    }
    z
}

/// Mean absolute off-diagonal correlation between the lanes of `z`, which
/// must already be standardized along `axis`. Self-correlations count as 1
/// in the sum and are then removed, leaving `sum_{i != j} |r_ij| / (k^2 - k)`.
fn mean_abs_offdiag(z: &Array2<f64>, by_rows: bool) -> f64 {
    let gram = if by_rows { z.dot(&z.t()) } else { z.t().dot(z) };
    let k = gram.nrows();
    let mut off = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            off += gram[[i, j]].abs().min(1.0);
        }
    }
    let kf = k as f64;
    2.0 * off / (kf * kf - kf)
}

/// Row and column halves of the ACV for a dense block.
pub fn acv_terms(block: &Array2<f64>) -> Result<(f64, f64)> {
    let (r, c) = block.dim();
    if r < 2 || c < 2 {
        return Err(BiclusterError::DegenerateBicluster { rows: r, cols: c });
    }
    let rows = mean_abs_offdiag(&standardized(block, Axis(1)), true);
    let cols = mean_abs_offdiag(&standardized(block, Axis(0)), false);
    Ok((rows, cols))
}

/// ACV of a dense block: the larger of its row and column terms.
pub fn acv_of_block(block: &Array2<f64>) -> Result<f64> {
    let (rows, cols) = acv_terms(block)?;
    Ok(rows.max(cols))
}

/// ACV of the submatrix selected by `b`.
pub fn acv(b: &Bicluster, m: &SessionPageMatrix) -> Result<f64> {
    b.check_against(m)?;
    if !b.is_scorable() {
        return Err(BiclusterError::DegenerateBicluster {
            rows: b.n_selected_rows(),
            cols: b.n_selected_cols(),
        });
    }
    acv_of_block(&b.submatrix(m)?)
}

/// `|U| * |P|` when the ACV reaches `threshold`, otherwise 0. Selections
/// smaller than 2x2 score 0.
pub fn fitness(b: &Bicluster, m: &SessionPageMatrix, threshold: AcvThreshold) -> Result<f64> {
    Ok(score(b, m, threshold)?.fitness)
}

pub fn score(b: &Bicluster, m: &SessionPageMatrix, threshold: AcvThreshold) -> Result<BiclusterScore> {
    b.check_against(m)?;
    let volume = b.volume();
    if !b.is_scorable() {
        return Ok(BiclusterScore {
            acv: None,
            volume,
            fitness: 0.0,
        });
    }
    let value = acv(b, m)?;
    let fitness = if value >= threshold.value() { volume as f64 } else { 0.0 };
    Ok(BiclusterScore {
        acv: Some(value),
        volume,
        fitness,
    })
}

/// `|cells(a) ∩ cells(b)| / min(|cells(a)|, |cells(b)|)`, or 0 when either
/// is empty.
pub fn pair_overlap(a: &Bicluster, b: &Bicluster) -> f64 {
    let smaller = a.volume().min(b.volume());
    if smaller == 0 {
        return 0.0;
    }
    a.shared_cells(b) as f64 / smaller as f64
}

/// Mean pairwise overlap over all unordered pairs; 0 for a single bicluster.
pub fn overlapping_degree(bs: &[Bicluster]) -> Result<f64> {
    if bs.is_empty() {
        return Err(BiclusterError::EmptyInput("bicluster list".into()));
    }
    let dims = (bs[0].row_mask().len(), bs[0].col_mask().len());
    if bs
        .iter()
        .any(|b| (b.row_mask().len(), b.col_mask().len()) != dims)
    {
        return Err(BiclusterError::Dimension("biclusters index different matrices".into()));
    }
    if bs.len() == 1 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..bs.len() {
        for j in (i + 1)..bs.len() {
            total += pair_overlap(&bs[i], &bs[j]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}
