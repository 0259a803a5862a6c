//! Aggregate usage profiles: pages of an optimal bicluster weighted by
//! their mean normalized value over the bicluster's users.

use serde::Serialize;

use crate::bicluster::Bicluster;
use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::metrics::acv;

pub const DEFAULT_MIN_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePage {
    pub code: u32,
    pub label: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UsageProfile {
    /// Weight descending, ties by page code.
    pub pages: Vec<ProfilePage>,
    /// `None` when the source selects fewer than two users or pages.
    pub acv: Option<f64>,
    pub user_fraction: f64,
    #[serde(skip)]
    pub source: Bicluster,
}

impl UsageProfile {
    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }
}

/// Mean of column `page` over the bicluster's selected users.
pub fn page_weight(b: &Bicluster, m: &SessionPageMatrix, page: usize) -> Result<f64> {
    b.check_against(m)?;
    if !b.col_mask().get(page).copied().unwrap_or(false) {
        return Err(BiclusterError::InvalidParameter(format!(
            "page column {page} is not selected in the bicluster"
        )));
    }
    let users = b.row_indices();
    if users.is_empty() {
        return Err(BiclusterError::EmptySelection("rows"));
    }
    let sum: f64 = users.iter().map(|&i| m.get(i, page)).sum();
    Ok(sum / users.len() as f64)
}

/// Profile of the selected pages whose weight strictly exceeds `min_weight`.
pub fn build_profile(b: &Bicluster, m: &SessionPageMatrix, min_weight: f64) -> Result<UsageProfile> {
    b.check_against(m)?;
    if b.n_selected_rows() == 0 {
        return Err(BiclusterError::EmptySelection("rows"));
    }
    if b.n_selected_cols() == 0 {
        return Err(BiclusterError::EmptySelection("columns"));
    }
    let mut pages = Vec::new();
    for col in b.col_indices() {
        let weight = page_weight(b, m, col)?;
        if weight > min_weight {
            let page = m.catalog().page(col);
            pages.push(ProfilePage {
                code: page.code,
                label: page.label.clone(),
                weight,
            });
        }
    }
    pages.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.code.cmp(&b.code)));
    let acv = if b.is_scorable() { Some(acv(b, m)?) } else { None };
    Ok(UsageProfile {
        pages,
        acv,
        user_fraction: b.n_selected_rows() as f64 / m.n_rows() as f64,
        source: b.clone(),
    })
}

/// Profiles for an optimal set in its given (fitness) order; empty profiles
/// are dropped.
pub fn build_profiles(optimal: &[Bicluster], m: &SessionPageMatrix, min_weight: f64) -> Result<Vec<UsageProfile>> {
    if optimal.is_empty() {
        return Err(BiclusterError::EmptyInput("optimal bicluster set".into()));
    }
    let mut out = Vec::with_capacity(optimal.len());
    for b in optimal {
        let p = build_profile(b, m, min_weight)?;
        if !p.is_empty() {
            out.push(p);
        }
    }
    if out.is_empty() {
        log::warn!("no page weight exceeds min_weight {min_weight}; every profile is empty");
    }
    Ok(out)
}

#[derive(Serialize)]
struct ProfileCsvRow {
    profile: usize,
    pages: String,
    weights: String,
    acv: String,
    user_percentage: String,
}

/// One line per profile: page codes, their weights, ACV and the percentage
/// of users in the source bicluster.
pub fn profiles_csv(profiles: &[UsageProfile]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, p) in profiles.iter().enumerate() {
        w.serialize(ProfileCsvRow {
            profile: i + 1,
            pages: p.pages.iter().map(|pg| pg.code.to_string()).collect::<Vec<_>>().join(","),
            weights: p
                .pages
                .iter()
                .map(|pg| format!("{:.4}", pg.weight))
                .collect::<Vec<_>>()
                .join(","),
            acv: p.acv.map_or_else(String::new, |a| format!("{a:.4}")),
            user_percentage: format!("{:.2}", 100.0 * p.user_fraction),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| BiclusterError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BiclusterError::Serialization(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn weights_are_column_means() {
        let m = SessionPageMatrix::from_values(array![[1.0, 0.5], [1.0, 1.0], [0.0, 0.2]]).unwrap();
        let b = Bicluster::from_indices(3, 2, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(page_weight(&b, &m, 0).unwrap(), 1.0);
        assert_eq!(page_weight(&b, &m, 1).unwrap(), 0.75);
        let only_first = Bicluster::from_indices(3, 2, &[0, 1], &[0]).unwrap();
        assert!(page_weight(&only_first, &m, 1).is_err());
    }

    /// Three selected pages whose bicluster means come out at the given
    /// weights (two users, symmetric around each weight).
    fn matrix_with_weights() -> (SessionPageMatrix, Bicluster) {
        let w: [f64; 3] = [0.7421, 1.0, 0.8507];
        let mut v = Array2::zeros((3, 10));
        for (k, &col) in [0usize, 3, 6].iter().enumerate() {
            let spread = (1.0 - w[k]).min(w[k]) / 2.0;
            v[[0, col]] = w[k] - spread;
            v[[1, col]] = w[k] + spread;
        }
        v[[2, 1]] = 1.0;
        let m = SessionPageMatrix::new(
            v,
            vec!["a".into(), "b".into(), "c".into()],
            crate::matrix::PageCatalog::cti(),
        )
        .unwrap();
        let b = Bicluster::from_indices(3, 10, &[0, 1], &[0, 3, 6]).unwrap();
        (m, b)
    }

    #[test]
    fn profile_lists_pages_over_threshold() {
        let (m, b) = matrix_with_weights();
        let p = build_profile(&b, &m, 0.5).unwrap();
        let codes: Vec<u32> = p.pages.iter().map(|pg| pg.code).collect();
        assert_eq!(codes, vec![4, 7, 1]);
        let by_code = |c: u32| p.pages.iter().find(|pg| pg.code == c).unwrap().weight;
        assert!((by_code(1) - 0.7421).abs() < 1e-12);
        assert!((by_code(4) - 1.0).abs() < 1e-12);
        assert!((by_code(7) - 0.8507).abs() < 1e-12);
        assert_eq!(p.pages[0].label, "Admissions");
        assert!((p.user_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_edges() {
        let (m, b) = matrix_with_weights();
        assert_eq!(build_profile(&b, &m, 0.0).unwrap().pages.len(), 3);
        assert!(build_profile(&b, &m, 1.0).unwrap().is_empty());
        assert!(build_profiles(std::slice::from_ref(&b), &m, 1.0).unwrap().is_empty());
        assert!(build_profiles(&[], &m, 0.5).is_err());
    }

    #[test]
    fn zero_weight_page_excluded_at_zero_threshold() {
        let m = SessionPageMatrix::from_values(array![[0.0, 0.4], [0.0, 0.6]]).unwrap();
        let p = build_profile(&Bicluster::full(2, 2), &m, 0.0).unwrap();
        assert_eq!(p.pages.len(), 1);
        assert_eq!(p.pages[0].code, 2);
    }

    #[test]
    fn csv_mirrors_profile_table() {
        let (m, b) = matrix_with_weights();
        let p = build_profiles(&[b], &m, 0.5).unwrap();
        let csv = profiles_csv(&p).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "profile,pages,weights,acv,user_percentage");
        assert!(lines.next().unwrap().starts_with("1,\"4,7,1\",\"1.0000,0.8507,0.7421\""));
    }
}
