//! Desk-scale fiber experiments: the Lambda-sum over `n^r + k` for
//! `n <= x`, `n = n0 (mod m0)`, its deviation from the singular-series
//! prediction, second moments over `k <= y`, and exceptional-set counts.
//!
//! Per-`k` evaluation is pure and runs in parallel; the summary reduction
//! is a compensated sum over the records in fixed `k` order, so reruns
//! are bit-stable regardless of worker count.

use std::time::Instant;

use rayon::prelude::*;

use crate::arith;
use crate::singular::{SingularSeries, SingularSeriesParams};
use crate::{Error, Result};

/// Compensated (Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Configuration of one deviation experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub r: u64,
    /// Fiber bound: `n` ranges over `[1, x]`.
    pub x: u64,
    /// `k` ranges over `[1, y]`.
    pub y: u64,
    pub n0: i64,
    pub m0: u64,
    /// Singular-series truncation.
    pub trunc_p: u64,
    /// Exceptional cutoff exponent: a deviation counts as exceptional when
    /// `|dev| >= x / (log x)^threshold_b`.
    pub threshold_b: f64,
}

impl ExperimentConfig {
    pub fn new(
        r: u64,
        x: u64,
        y: u64,
        n0: i64,
        m0: u64,
        trunc_p: u64,
        threshold_b: f64,
    ) -> Result<Self> {
        if !arith::is_prime(r) {
            return Err(Error::Domain(format!("r = {r} must be prime")));
        }
        if x < 2 || y < 1 || m0 < 1 {
            return Err(Error::Domain(
                "need x >= 2, y >= 1, m0 >= 1 for an experiment".into(),
            ));
        }
        if trunc_p < 3 {
            return Err(Error::Domain("truncation bound must be at least 3".into()));
        }
        // The whole fiber must stay inside u64.
        let max_power = (0..r).try_fold(1u64, |acc, _| acc.checked_mul(x));
        if max_power.and_then(|v| v.checked_add(y)).is_none() {
            return Err(Error::Range(format!(
                "x^r + y overflows 64 bits for x = {x}, r = {r}, y = {y}"
            )));
        }
        Ok(ExperimentConfig {
            r,
            x,
            y,
            n0,
            m0,
            trunc_p,
            threshold_b,
        })
    }

    /// `x / (log x)^threshold_b`.
    pub fn exceptional_cutoff(&self) -> f64 {
        self.x as f64 / (self.x as f64).ln().powf(self.threshold_b)
    }
}

/// Per-`k` outcome of the experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRecord {
    pub k: u64,
    pub lambda_sum: f64,
    /// Singular-series prediction `S(k) * x`.
    pub expected: f64,
    pub deviation: f64,
    pub is_exceptional: bool,
    /// The indicator clause killed this class: `gcd(m0, n0^r + k) > 1`.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExperimentSummary {
    /// Mean squared deviation over admissible `k`.
    pub m2: f64,
    pub m2_over_x2: f64,
    pub exceptional_count: u64,
    pub admissible_count: u64,
    pub degenerate_count: u64,
    pub cutoff: f64,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub records: Vec<DeviationRecord>,
    pub summary: ExperimentSummary,
}

/// `sum_{n <= x, n = n0 (mod m0)} Lambda(n^r + k)`, by direct prime-power
/// testing of every fiber value.
pub fn lambda_sum(k: u64, cfg: &ExperimentConfig) -> Result<f64> {
    let first = first_index(cfg.n0, cfg.m0);
    let mut acc = KahanSum::default();
    let mut n = first;
    while n <= cfg.x {
        let fiber = fiber_value(n, cfg.r, k)?;
        acc.add(arith::von_mangoldt(fiber));
        n += cfg.m0;
    }
    Ok(acc.value())
}

fn first_index(n0: i64, m0: u64) -> u64 {
    let residue = n0.rem_euclid(m0 as i64) as u64;
    if residue == 0 {
        m0
    } else {
        residue
    }
}

fn fiber_value(n: u64, r: u64, k: u64) -> Result<u64> {
    (0..r)
        .try_fold(1u64, |acc, _| acc.checked_mul(n))
        .and_then(|v| v.checked_add(k))
        .ok_or_else(|| Error::Range(format!("{n}^{r} + {k} overflows 64 bits")))
}

/// Run the experiment over `k = 1..=y`; one record per `k`, plus summary
/// moments over the admissible classes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    let series = SingularSeries::new(SingularSeriesParams::new(
        cfg.r, cfg.n0, cfg.m0, cfg.trunc_p,
    )?)?;
    let cutoff = cfg.exceptional_cutoff();

    let records: Vec<DeviationRecord> = (1..=cfg.y)
        .into_par_iter()
        .map(|k| {
            let degenerate = series.degenerate(k as i64);
            let expected = series.value(k as i64) * cfg.x as f64;
            let lambda = lambda_sum(k, cfg)?;
            let deviation = lambda - expected;
            Ok(DeviationRecord {
                k,
                lambda_sum: lambda,
                expected,
                deviation,
                is_exceptional: !degenerate && deviation.abs() >= cutoff,
                degenerate,
            })
        })
        .collect::<Result<_>>()?;

    let summary = summarize(&records, cfg, cutoff, started.elapsed().as_secs_f64());
    Ok(ExperimentRun { records, summary })
}

fn summarize(
    records: &[DeviationRecord],
    cfg: &ExperimentConfig,
    cutoff: f64,
    wall_time_secs: f64,
) -> ExperimentSummary {
    let mut square_sum = KahanSum::default();
    let mut admissible = 0u64;
    let mut degenerate = 0u64;
    let mut exceptional = 0u64;
    for record in records {
        if record.degenerate {
            degenerate += 1;
            continue;
        }
        admissible += 1;
        square_sum.add(record.deviation * record.deviation);
        if record.is_exceptional {
            exceptional += 1;
        }
    }
    let m2 = if admissible > 0 {
        square_sum.value() / admissible as f64
    } else {
        0.0
    };
    ExperimentSummary {
        m2,
        m2_over_x2: m2 / (cfg.x as f64 * cfg.x as f64),
        exceptional_count: exceptional,
        admissible_count: admissible,
        degenerate_count: degenerate,
        cutoff,
        wall_time_secs,
    }
}

/// Exceptional-set report at an explicit cutoff: the count of admissible
/// `k` with `|deviation| >= cutoff`, and the count normalised by
/// `y (log x)^{-C}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalReport {
    pub cutoff: f64,
    pub count: u64,
    pub fraction: f64,
    /// `count * (log x)^C / y`.
    pub normalized: f64,
}

pub fn exceptional_report(
    records: &[DeviationRecord],
    x: u64,
    cutoff: f64,
    c: f64,
) -> ExceptionalReport {
    let y = records.len().max(1) as f64;
    let count = records
        .iter()
        .filter(|r| !r.degenerate && r.deviation.abs() >= cutoff)
        .count() as u64;
    ExceptionalReport {
        cutoff,
        count,
        fraction: count as f64 / y,
        normalized: count as f64 * (x as f64).ln().powf(c) / y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(r: u64, x: u64, y: u64, n0: i64, m0: u64) -> ExperimentConfig {
        ExperimentConfig::new(r, x, y, n0, m0, 100, 1.0).unwrap()
    }

    #[test]
    fn lambda_sum_hand_counts() {
        // 1^3+1 = 2 prime, 2^3+1 = 9 = 3^2, 3^3+1 = 28 composite.
        let got = lambda_sum(1, &config(3, 3, 1, 0, 1)).unwrap();
        assert!((got - (2f64.ln() + 3f64.ln())).abs() < 1e-12);

        // Restricting to odd n keeps only 2 and 28.
        let got = lambda_sum(1, &config(3, 3, 1, 1, 2)).unwrap();
        assert!((got - 2f64.ln()).abs() < 1e-12);

        // 26 = 2 * 13 and 33 = 3 * 11: no prime power in the fiber.
        let got = lambda_sum(25, &config(3, 2, 1, 0, 1)).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn lambda_sum_overflow_guard() {
        assert!(ExperimentConfig::new(5, 1 << 13, 10, 0, 1, 100, 1.0).is_err());
        let cfg = config(3, 50, 4, 0, 1);
        assert!(fiber_value(u64::MAX, 3, 1).is_err());
        assert!(lambda_sum(4, &cfg).is_ok());
    }

    #[test]
    fn lambda_sum_matches_least_factor_oracle() {
        // Independent Lambda evaluation through least-prime-factor
        // factorization, term by term.
        let table = arith::PrimeTable::with_least_factors(1 << 20).unwrap();
        let oracle_lambda = |m: u64| -> f64 {
            match table.least_factor(m) {
                None => 0.0,
                Some(p) => {
                    let mut q = m;
                    while q % p == 0 {
                        q /= p;
                    }
                    if q == 1 {
                        (p as f64).ln()
                    } else {
                        0.0
                    }
                }
            }
        };
        for k in [1u64, 2, 7, 30] {
            for n in 1..=50u64 {
                let fiber = n * n * n + k;
                assert_eq!(arith::von_mangoldt(fiber), oracle_lambda(fiber), "m={fiber}");
            }
        }
    }

    #[test]
    fn restriction_classes_partition_the_full_sum() {
        let full = config(3, 60, 1, 0, 1);
        for m0 in [2u64, 3, 5] {
            for k in [1u64, 5, 12] {
                let total = lambda_sum(k, &full).unwrap();
                let mut split = KahanSum::default();
                for n0 in 0..m0 {
                    split.add(lambda_sum(k, &config(3, 60, 1, n0 as i64, m0)).unwrap());
                }
                assert!(
                    (split.value() - total).abs() <= 1e-9 * total.abs().max(1.0),
                    "m0={m0} k={k}"
                );
            }
        }
    }

    #[test]
    fn lambda_sum_is_a_pure_function_of_fiber_values() {
        let cfg = config(3, 40, 1, 0, 1);
        for k in [1u64, 9, 17] {
            let mut direct = KahanSum::default();
            for n in 1..=40u64 {
                direct.add(arith::von_mangoldt(n * n * n + k));
            }
            assert_eq!(lambda_sum(k, &cfg).unwrap(), direct.value());
        }
    }

    #[test]
    fn run_experiment_summary_consistency() {
        let cfg = config(3, 50, 100, 0, 1);
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.records.len(), 100);
        let naive: f64 = run
            .records
            .iter()
            .filter(|r| !r.degenerate)
            .map(|r| r.deviation * r.deviation)
            .sum::<f64>()
            / run.summary.admissible_count as f64;
        assert!((run.summary.m2 - naive).abs() <= 1e-9 * naive.max(1.0));
        for r in &run.records {
            assert_eq!(r.deviation, r.lambda_sum - r.expected);
            assert!(r.lambda_sum >= 0.0);
        }
    }

    #[test]
    fn degenerate_classes_are_flagged_and_excluded() {
        // n0 = 0, m0 = 2: even k make the fiber class all even.
        let cfg = ExperimentConfig::new(3, 30, 20, 0, 2, 100, 1.0).unwrap();
        let run = run_experiment(&cfg).unwrap();
        for r in &run.records {
            assert_eq!(r.degenerate, r.k % 2 == 0, "k = {}", r.k);
            if r.degenerate {
                assert_eq!(r.expected, 0.0);
                assert!(!r.is_exceptional);
            }
        }
        assert_eq!(run.summary.degenerate_count, 10);
        assert_eq!(run.summary.admissible_count, 10);
    }

    #[test]
    fn exceptional_report_edges() {
        let cfg = config(3, 50, 40, 0, 1);
        let run = run_experiment(&cfg).unwrap();
        let zeroed: Vec<DeviationRecord> = run
            .records
            .iter()
            .map(|r| DeviationRecord {
                deviation: 0.0,
                ..r.clone()
            })
            .collect();
        assert_eq!(exceptional_report(&zeroed, 50, 7.2, 1.0).count, 0);
        // Cutoff 0 counts every admissible class.
        let all = exceptional_report(&run.records, 50, 0.0, 0.0);
        assert_eq!(all.count, run.summary.admissible_count);
        assert!((all.normalized - all.count as f64 / 40.0).abs() < 1e-12);
    }
}
