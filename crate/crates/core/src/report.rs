//! Run statistics and the SA-vs-greedy comparison tables.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{BiclusterError, Result};
use crate::matrix::SessionPageMatrix;
use crate::parallel::Parallelism;
use crate::search::{acv_or_zero, set_overlap, ScoredBicluster, SearchOutcome, SearchParams, StrategyRegistry};

/// Statistics over the optimal set returned by one search run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub n_biclusters: usize,
    pub best_fitness: f64,
    pub worst_fitness: f64,
    pub best_acv: f64,
    pub worst_acv: f64,
    pub mean_acv: f64,
    pub best_volume: usize,
    pub worst_volume: usize,
    pub mean_volume: f64,
    pub overlapping_degree: f64,
    /// Wall-clock time of the search. Not serialized, so that reports from
    /// identical runs are byte-identical.
    #[serde(skip)]
    pub elapsed_secs: f64,
    pub config_echo: serde_json::Value,
}

impl RunReport {
    pub fn from_set(
        method: &str,
        set: &[ScoredBicluster],
        config_echo: serde_json::Value,
        elapsed: Duration,
    ) -> Result<Self> {
        if set.is_empty() {
            return Err(BiclusterError::EmptyInput("optimal set".into()));
        }
        let n = set.len() as f64;
        let acvs: Vec<f64> = set.iter().map(|s| acv_or_zero(&s.score)).collect();
        let fitness = set.iter().map(|s| s.score.fitness);
        let volumes = set.iter().map(|s| s.score.volume);
        Ok(Self {
            method: method.to_string(),
            n_biclusters: set.len(),
            best_fitness: fitness.clone().fold(f64::NEG_INFINITY, f64::max),
            worst_fitness: fitness.fold(f64::INFINITY, f64::min),
            best_acv: acvs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            worst_acv: acvs.iter().copied().fold(f64::INFINITY, f64::min),
            mean_acv: acvs.iter().sum::<f64>() / n,
            best_volume: volumes.clone().max().unwrap_or(0),
            worst_volume: volumes.clone().min().unwrap_or(0),
            mean_volume: volumes.map(|v| v as f64).sum::<f64>() / n,
            overlapping_degree: set_overlap(set)?,
            elapsed_secs: elapsed.as_secs_f64(),
            config_echo,
        })
    }
}

/// One method's row of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub mean_volume: f64,
    pub mean_acv: f64,
    pub overlapping_degree: f64,
    pub best_acv: f64,
    pub worst_acv: f64,
}

/// Per-seed, per-method line of the detailed CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub method: String,
    pub n_biclusters: usize,
    pub best_fitness: f64,
    pub top_acv: f64,
    pub mean_volume: f64,
    pub mean_acv: f64,
    pub overlapping_degree: f64,
    pub best_acv: f64,
    pub worst_acv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub table: Vec<ComparisonRow>,
    pub per_seed: Vec<SeedRow>,
}

impl Comparison {
    pub fn row(&self, method: &str) -> Option<&ComparisonRow> {
        self.table.iter().find(|r| r.method == method)
    }

    /// Mean over seeds of the top bicluster's fitness for `method`.
    pub fn mean_best_fitness(&self, method: &str) -> f64 {
        let rows: Vec<&SeedRow> = self.per_seed.iter().filter(|r| r.method == method).collect();
        rows.iter().map(|r| r.best_fitness).sum::<f64>() / rows.len().max(1) as f64
    }

    pub fn table_csv(&self) -> Result<String> {
        to_csv(&self.table)
    }

    pub fn per_seed_csv(&self) -> Result<String> {
        to_csv(&self.per_seed)
    }

    /// Fixed-width text rendering of the method table.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<8} {:>12} {:>9} {:>12} {:>9} {:>10}\n",
            "method", "mean_volume", "mean_acv", "overlapping", "best_acv", "worst_acv"
        );
        for r in &self.table {
            out.push_str(&format!(
                "{:<8} {:>12.2} {:>9.4} {:>12.4} {:>9.4} {:>10.4}\n",
                r.method, r.mean_volume, r.mean_acv, r.overlapping_degree, r.best_acv, r.worst_acv
            ));
        }
        out
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| BiclusterError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BiclusterError::Serialization(e.to_string()))
}

/// Runs every method in `methods` once per seed on the same matrix and
/// summarizes them side by side.
pub fn compare(
    matrix: &SessionPageMatrix,
    registry: &StrategyRegistry,
    methods: &[&str],
    params: &SearchParams,
    seeds: &[u64],
    parallelism: Parallelism,
) -> Result<Comparison> {
    if seeds.is_empty() {
        return Err(BiclusterError::InvalidParameter("comparison needs at least one seed".into()));
    }
    let mut per_seed = Vec::new();
    let mut outcomes: Vec<(String, Vec<SearchOutcome>)> = Vec::new();
    for &method in methods {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let p = SearchParams { seed, ..params.clone() };
            let outcome = registry.create(method, &p)?.search(matrix, parallelism)?;
            let rep = &outcome.report;
            per_seed.push(SeedRow {
                seed,
                method: method.to_string(),
                n_biclusters: rep.n_biclusters,
                best_fitness: rep.best_fitness,
                top_acv: acv_or_zero(&outcome.top().score),
                mean_volume: rep.mean_volume,
                mean_acv: rep.mean_acv,
                overlapping_degree: rep.overlapping_degree,
                best_acv: rep.best_acv,
                worst_acv: rep.worst_acv,
            });
            runs.push(outcome);
        }
        outcomes.push((method.to_string(), runs));
    }
    per_seed.sort_by(|a, b| a.seed.cmp(&b.seed).then_with(|| a.method.cmp(&b.method)));

    let table = outcomes
        .iter()
        .map(|(method, runs)| {
            let k = runs.len() as f64;
            let mean = |f: fn(&RunReport) -> f64| runs.iter().map(|o| f(&o.report)).sum::<f64>() / k;
            ComparisonRow {
                method: method.clone(),
                mean_volume: mean(|r| r.mean_volume),
                mean_acv: mean(|r| r.mean_acv),
                overlapping_degree: mean(|r| r.overlapping_degree),
                best_acv: runs.iter().map(|o| o.report.best_acv).fold(f64::NEG_INFINITY, f64::max),
                worst_acv: runs.iter().map(|o| o.report.worst_acv).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    Ok(Comparison {
        seeds: seeds.to_vec(),
        table,
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicluster::{Bicluster, BiclusterScore};

    fn scored(rows: &[usize], cols: &[usize], acv: f64, fitness: f64) -> ScoredBicluster {
        let b = Bicluster::from_indices(6, 6, rows, cols).unwrap();
        ScoredBicluster {
            score: BiclusterScore {
                acv: Some(acv),
                volume: b.volume(),
                fitness,
            },
            bicluster: b,
        }
    }

    #[test]
    fn report_statistics() {
        let set = vec![
            scored(&[0, 1, 2], &[0, 1], 0.95, 6.0),
            scored(&[3, 4], &[2, 3], 0.99, 4.0),
        ];
        let r = RunReport::from_set("sa", &set, serde_json::json!({"seed": 1}), Duration::from_millis(5)).unwrap();
        assert_eq!(r.n_biclusters, 2);
        assert_eq!(r.best_fitness, 6.0);
        assert_eq!(r.worst_fitness, 4.0);
        assert_eq!(r.best_acv, 0.99);
        assert_eq!(r.worst_acv, 0.95);
        assert!((r.mean_acv - 0.97).abs() < 1e-12);
        assert_eq!(r.mean_volume, 5.0);
        assert_eq!(r.overlapping_degree, 0.0);
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("elapsed"));
    }

    #[test]
    fn comparison_csv_columns() {
        let c = Comparison {
            seeds: vec![1],
            table: vec![ComparisonRow {
                method: "sa".into(),
                mean_volume: 1.0,
                mean_acv: 0.5,
                overlapping_degree: 0.0,
                best_acv: 0.5,
                worst_acv: 0.5,
            }],
            per_seed: vec![],
        };
        let csv = c.table_csv().unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "method,mean_volume,mean_acv,overlapping_degree,best_acv,worst_acv"
        );
    }
}
