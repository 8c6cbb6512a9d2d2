//! Timing and iteration counts over seeded random instances.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::{gen_instance, InstanceSpec};
use crate::solver::{decompose, SolverConfig};

/// A run counts as converged when `f_p ≤ CONVERGED_REL·‖p‖²`.
pub const CONVERGED_REL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub degree: usize,
    pub rank: usize,
    pub seed: u64,
    pub iterations: usize,
    pub transform_calls: u64,
    pub wall_time: f64,
    pub rel_residual: f64,
    /// `converged`, `not_converged`, or `error: ...`.
    pub status: String,
}

impl BenchRow {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self { median: quantile(&v, 0.5), p25: quantile(&v, 0.25), p75: quantile(&v, 0.75) })
    }
}

/// Quantile of sorted data, `h = (n - 1)q`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchAggregate {
    pub degree: usize,
    pub rank: usize,
    pub runs: usize,
    pub converged: usize,
    /// Statistics over the runs that did not error.
    pub iterations: Option<Quartiles>,
    pub transform_calls: Option<Quartiles>,
    pub wall_time: Option<Quartiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<BenchAggregate>,
}

impl BenchReport {
    /// Groups rows by `(degree, rank)` in first-seen order.
    pub fn from_rows(rows: Vec<BenchRow>) -> Self {
        let mut keys: Vec<(usize, usize)> = Vec::new();
        for r in &rows {
            if !keys.contains(&(r.degree, r.rank)) {
                keys.push((r.degree, r.rank));
            }
        }
        let aggregates = keys
            .into_iter()
            .map(|(degree, rank)| {
                let group: Vec<&BenchRow> =
                    rows.iter().filter(|r| r.degree == degree && r.rank == rank).collect();
                let ok: Vec<&&BenchRow> = group.iter().filter(|r| !r.status.starts_with("error")).collect();
                let stat = |f: fn(&BenchRow) -> f64| Quartiles::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
                BenchAggregate {
                    degree,
                    rank,
                    runs: group.len(),
                    converged: group.iter().filter(|r| r.converged()).count(),
                    iterations: stat(|r| r.iterations as f64),
                    transform_calls: stat(|r| r.transform_calls as f64),
                    wall_time: stat(|r| r.wall_time),
                }
            })
            .collect();
        Self { rows, aggregates }
    }

    pub fn aggregate(&self, degree: usize, rank: usize) -> Option<&BenchAggregate> {
        self.aggregates.iter().find(|a| a.degree == degree && a.rank == rank)
    }

    pub fn rows_csv(&self) -> String {
        let mut s = String::from("degree,rank,seed,iterations,transform_calls,wall_time,rel_residual,status\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{:.6},{:e},{}\n",
                r.degree, r.rank, r.seed, r.iterations, r.transform_calls, r.wall_time, r.rel_residual, r.status
            ));
        }
        s
    }

    pub fn aggregates_csv(&self) -> String {
        let mut s = String::from(
            "degree,rank,runs,converged,iter_median,iter_p25,iter_p75,calls_median,time_median,time_p25,time_p75\n",
        );
        let nan = Quartiles { median: f64::NAN, p25: f64::NAN, p75: f64::NAN };
        for a in &self.aggregates {
            let (it, calls, t) = (
                a.iterations.unwrap_or(nan),
                a.transform_calls.unwrap_or(nan),
                a.wall_time.unwrap_or(nan),
            );
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6}\n",
                a.degree, a.rank, a.runs, a.converged, it.median, it.p25, it.p75, calls.median, t.median, t.p25, t.p75
            ));
        }
        s
    }
}

/// Instance for run `k` uses seed `base_seed + k`; the solver uses the same seed.
pub fn bench_run(degree: usize, rank: usize, seed: u64, cfg: &SolverConfig) -> BenchRow {
    let cfg = cfg.clone().with_rank(rank).with_seed(seed);
    let start = Instant::now();
    let out = gen_instance(&InstanceSpec::new(degree, seed)).and_then(|p| decompose(&p, &cfg));
    let wall_time = start.elapsed().as_secs_f64();
    match out {
        Ok(d) => BenchRow {
            degree,
            rank,
            seed,
            iterations: d.trace.iterations(),
            transform_calls: d.trace.transform_calls(),
            wall_time,
            rel_residual: d.rel_residual,
            status: if d.rel_residual <= CONVERGED_REL { "converged" } else { "not_converged" }.into(),
        },
        Err(e) => BenchRow {
            degree,
            rank,
            seed,
            iterations: 0,
            transform_calls: 0,
            wall_time,
            rel_residual: f64::NAN,
            status: format!("error: {e}"),
        },
    }
}

/// Every `(degree, rank, run)` combination, executed on the current rayon pool.
pub fn run_bench(degrees: &[usize], ranks: &[usize], runs: usize, base_seed: u64, cfg: &SolverConfig) -> BenchReport {
    let jobs: Vec<(usize, usize, u64)> = degrees
        .iter()
        .flat_map(|&d| ranks.iter().flat_map(move |&r| (0..runs as u64).map(move |k| (d, r, base_seed + k))))
        .collect();
    let rows = jobs.par_iter().map(|&(d, r, s)| bench_run(d, r, s, cfg)).collect();
    BenchReport::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(q.median, 2.5);
        assert_eq!(q.p25, 1.75);
        assert_eq!(q.p75, 3.25);
        assert!(Quartiles::of(&[]).is_none());
    }

    #[test]
    fn single_run_report() {
        let report = run_bench(&[16], &[2], 1, 7, &SolverConfig::default());
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        let agg = report.aggregate(16, 2).unwrap();
        let it = agg.iterations.unwrap();
        assert_eq!((it.median, it.p25, it.p75), (row.iterations as f64, row.iterations as f64, row.iterations as f64));
        assert_eq!(agg.runs, 1);
        assert!(row.converged(), "{row:?}");
    }

    #[test]
    fn aggregates_recompute() {
        let report = run_bench(&[8, 12], &[2, 3], 3, 1, &SolverConfig::default());
        assert_eq!(report.rows.len(), 12);
        assert_eq!(BenchReport::from_rows(report.rows.clone()), report);
        assert_eq!(report.rows_csv().lines().count(), 13);
        assert_eq!(report.aggregates_csv().lines().count(), 5);
    }

    #[test]
    fn errors_are_recorded() {
        let row = bench_run(3, 2, 0, &SolverConfig::default());
        assert!(row.status.starts_with("error"));
        let report = BenchReport::from_rows(vec![row]);
        assert!(report.aggregates[0].iterations.is_none());
    }
}
