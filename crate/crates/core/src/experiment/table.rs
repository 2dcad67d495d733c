//! Result rows, per-cell aggregates and the log-log scaling fit.

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ARTIFACT_VERSION};
use crate::error::{Error, Result};
use crate::rng::PRNG_ID;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Found,
    /// Budget exhausted before the optimum appeared.
    Censored,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Found => "found",
            RunStatus::Censored => "censored",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub cell: usize,
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub c: Option<f64>,
    pub selection: String,
    pub replicate: usize,
    pub seed: u64,
    pub outcome: RunStatus,
    /// Runtime `T` for found runs; evaluations spent for censored ones.
    pub evaluations: u64,
    pub generation: u64,
    pub best_fitness: f64,
    pub min_zero_bits: usize,
    /// Smallest zero-bit count seen in any generation.
    pub running_min_zero_bits: usize,
    pub fallback_generations: u64,
    pub nonfinite_events: u64,
    pub wall_ms: f64,
}

impl ResultRow {
    pub fn found(&self) -> bool {
        self.outcome == RunStatus::Found
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub cell: usize,
    pub n: usize,
    pub lambda: usize,
    pub chi: f64,
    pub runs: usize,
    pub successes: usize,
    pub censored: usize,
    pub success_rate: f64,
    /// Over successful runs only; `censored` says how many were left out.
    pub median_t: Option<f64>,
    pub mean_t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub artifact_version: String,
    pub prng: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<CellAggregate>,
}

impl ResultTable {
    pub fn from_rows(config: ExperimentConfig, rows: Vec<ResultRow>) -> Self {
        Self {
            artifact_version: ARTIFACT_VERSION.to_string(),
            prng: PRNG_ID.to_string(),
            aggregates: aggregate(&rows),
            config,
            rows,
        }
    }

    /// Rows with wall time zeroed, for reproducibility comparisons.
    pub fn rows_without_wall_time(&self) -> Vec<ResultRow> {
        self.rows
            .iter()
            .cloned()
            .map(|mut r| {
                r.wall_ms = 0.0;
                r
            })
            .collect()
    }

    /// `(n, median T)` per cell, ready for [`scaling_fit`].
    pub fn scaling_points(&self) -> Vec<ScalingPoint> {
        self.aggregates
            .iter()
            .map(|a| ScalingPoint {
                n: a.n as f64,
                median_t: a.median_t,
                censored: a.censored,
            })
            .collect()
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let k = sorted.len();
    match k {
        0 => None,
        _ if k % 2 == 1 => Some(sorted[k / 2]),
        _ => Some((sorted[k / 2 - 1] + sorted[k / 2]) / 2.0),
    }
}

/// Per-cell statistics, in order of first appearance of each cell.
pub fn aggregate(rows: &[ResultRow]) -> Vec<CellAggregate> {
    let mut cells: Vec<usize> = rows.iter().map(|r| r.cell).collect();
    cells.sort_unstable();
    cells.dedup();
    cells
        .into_iter()
        .map(|cell| {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.cell == cell).collect();
            let mut ts: Vec<f64> = group.iter().filter(|r| r.found()).map(|r| r.evaluations as f64).collect();
            ts.sort_by(f64::total_cmp);
            let first = group[0];
            CellAggregate {
                cell,
                n: first.n,
                lambda: first.lambda,
                chi: first.chi,
                runs: group.len(),
                successes: ts.len(),
                censored: group.len() - ts.len(),
                success_rate: ts.len() as f64 / group.len() as f64,
                median_t: median(&ts),
                mean_t: (!ts.is_empty()).then(|| ts.iter().sum::<f64>() / ts.len() as f64),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: f64,
    pub median_t: Option<f64>,
    pub censored: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    /// Natural-log intercept: `ln T ≈ intercept + slope·ln n`.
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of `ln(median T)` against `ln n`. Refuses fewer than
/// three points and any cell with censored runs.
pub fn scaling_fit(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::FitRefused(format!("need at least 3 cells, got {}", points.len())));
    }
    let bad: Vec<String> = points
        .iter()
        .filter(|p| p.censored > 0 || p.median_t.is_none())
        .map(|p| format!("n={} ({} censored)", p.n, p.censored))
        .collect();
    if !bad.is_empty() {
        return Err(Error::FitRefused(format!("censored cells: {}", bad.join(", "))));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n.ln(), p.median_t.unwrap_or(0.0).ln())).collect();
    if xy.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::FitRefused("n and median T must be positive".into()));
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRefused("all cells share the same n".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (sse / k).sqrt(),
        points: xy.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(f: impl Fn(f64) -> f64) -> Vec<ScalingPoint> {
        [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&n| ScalingPoint {
                n,
                median_t: Some(f(n)),
                censored: 0,
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let fit = scaling_fit(&pts(|n| n * n)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        let fit = scaling_fit(&pts(|n| 5.0 * n.powi(3))).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!((fit.intercept - 5f64.ln()).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn refusals() {
        assert!(matches!(scaling_fit(&pts(|n| n)[..2]), Err(Error::FitRefused(_))));
        let mut p = pts(|n| n);
        p[1].censored = 2;
        let err = scaling_fit(&p).unwrap_err().to_string();
        assert!(err.contains("n=20"), "{err}");
    }

    fn row(cell: usize, found: bool, t: u64) -> ResultRow {
        ResultRow {
            scenario: "s".into(),
            cell,
            n: 10 * (cell + 1),
            lambda: 5,
            chi: 1.0,
            c: None,
            selection: "proportionate".into(),
            replicate: 0,
            seed: 0,
            outcome: if found { RunStatus::Found } else { RunStatus::Censored },
            evaluations: t,
            generation: 1,
            best_fitness: 0.0,
            min_zero_bits: 0,
            running_min_zero_bits: 0,
            fallback_generations: 0,
            nonfinite_events: 0,
            wall_ms: 1.0,
        }
    }

    #[test]
    fn aggregates_report_censoring() {
        let rows = vec![row(0, true, 10), row(0, false, 99), row(0, true, 30), row(1, true, 7)];
        let a = aggregate(&rows);
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].runs, a[0].successes, a[0].censored), (3, 2, 1));
        assert_eq!(a[0].median_t, Some(20.0));
        assert_eq!(a[0].mean_t, Some(20.0));
        assert_eq!(a[1].median_t, Some(7.0));
        let all_censored = aggregate(&[row(0, false, 5)]);
        assert_eq!(all_censored[0].median_t, None);
        assert_eq!(all_censored[0].success_rate, 0.0);
    }

    proptest! {
        #[test]
        fn slope_recovers_power(a in 0.1f64..100.0, b in -1.0f64..5.0) {
            let fit = scaling_fit(&pts(|n| a * n.powf(b))).unwrap();
            prop_assert!((fit.slope - b).abs() < 1e-8);
        }

        #[test]
        fn aggregate_counts_add_up(flags in proptest::collection::vec((0usize..4, any::<bool>(), 1u64..1000), 1..40)) {
            let rows: Vec<ResultRow> = flags.iter().map(|&(c, f, t)| row(c, f, t)).collect();
            let agg = aggregate(&rows);
            prop_assert_eq!(agg.iter().map(|a| a.runs).sum::<usize>(), rows.len());
            for a in &agg {
                prop_assert_eq!(a.successes + a.censored, a.runs);
            }
        }
    }
}
