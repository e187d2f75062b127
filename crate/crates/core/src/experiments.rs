//! Monte-Carlo sweep engine and scaling analysis.
//!
//! A sweep runs `trials` independent random-activation runs for every
//! instance size in a grid and aggregates per-cell statistics. Per-trial
//! seeds are derived as `mix_seed([base_seed, topology_tag, n, trial])`, so
//! results are independent of scheduling: serial and parallel execution
//! produce identical results (wall-clock columns aside). Trials that exhaust
//! their activation budget are aggregated explicitly as censored.
//!
//! The CSV schema is one raw row per trial,
//! `topology,n,epsilon,delta,trial,seed,steps,censored,final_potential,wall_ms`,
//! followed by a `#`-prefixed summary block. Floats are printed in Rust's
//! shortest round-trip form, so re-importing reproduces every statistic
//! exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::instances::{gen_complete_random, gen_dumbbell, gen_path, Topology};
use crate::rng::mix_seed;
use crate::runner::{run_until_stable, RunConfig, DEFAULT_MAX_STEPS};
use crate::state::HksState;

/// Sweep grid: one topology, several sizes, many trials per size.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub topology: Topology,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub base_seed: u64,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
    /// Per-trial activation budget.
    pub max_steps: u64,
    /// Dimension for `CompleteRandom` instances.
    pub dimension: usize,
    /// Position spread for `CompleteRandom` instances (defaults to epsilon).
    pub spread: Option<f64>,
}

impl SweepConfig {
    pub fn new(topology: Topology, sizes: Vec<usize>, trials: usize, base_seed: u64) -> Self {
        SweepConfig {
            topology,
            sizes,
            trials,
            epsilon: 100.0,
            delta: 1.0,
            base_seed,
            jobs: 1,
            max_steps: DEFAULT_MAX_STEPS,
            dimension: 1,
            spread: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::invalid("sweep needs at least one size"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("sweep needs at least one trial per size"));
        }
        if self.jobs == 0 {
            return Err(Error::invalid("jobs must be at least 1"));
        }
        if self.delta <= 0.0 || !self.delta.is_finite() {
            return Err(Error::invalid("delta must be positive and finite"));
        }
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon must be positive and finite"));
        }
        if self.topology == Topology::Custom {
            return Err(Error::invalid("sweeps over custom instances unsupported"));
        }
        Ok(())
    }
}

/// One trial outcome (raw CSV row).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub topology: Topology,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub trial: usize,
    /// Derived per-trial seed recorded for reproducibility.
    pub seed: u64,
    /// Activations performed (to stability, or the budget when censored).
    pub steps: u64,
    pub censored: bool,
    pub final_potential: f64,
    /// Wall-clock milliseconds; excluded from determinism guarantees.
    pub wall_ms: f64,
}

/// Aggregated statistics for one `(topology, n)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub topology: Topology,
    pub n: usize,
    /// Completed (non-censored) trials.
    pub trials: usize,
    pub censored: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: u64,
    pub max: u64,
    /// `mean / n^3`.
    pub normalized_mean: f64,
}

/// Raw rows in canonical order plus per-cell summaries.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<TrialRow>,
    pub cells: Vec<CellSummary>,
}

/// Stable per-trial seed: `mix_seed([base_seed, topology_tag, n, trial])`.
pub fn trial_seed(base_seed: u64, topology: Topology, n: usize, trial: usize) -> u64 {
    mix_seed(&[base_seed, topology.tag(), n as u64, trial as u64])
}

fn build_instance(config: &SweepConfig, n: usize, seed: u64) -> Result<HksState> {
    match config.topology {
        Topology::Path => gen_path(n, config.epsilon),
        Topology::DumbbellFull => gen_dumbbell(n, config.epsilon, true),
        Topology::DumbbellReduced => gen_dumbbell(n, config.epsilon, false),
        Topology::CompleteRandom => gen_complete_random(
            n,
            config.dimension,
            config.epsilon,
            config.spread.unwrap_or(config.epsilon),
            mix_seed(&[seed, 1]),
        ),
        Topology::Custom => Err(Error::invalid("sweeps over custom instances unsupported")),
    }
}

fn run_trial(config: &SweepConfig, n: usize, trial: usize) -> Result<TrialRow> {
    let seed = trial_seed(config.base_seed, config.topology, n, trial);
    let start = Instant::now();
    let mut state = build_instance(config, n, seed)?;
    let run = RunConfig {
        delta: config.delta,
        max_steps: config.max_steps,
        seed: mix_seed(&[seed, 2]),
        record_potential_every: None,
        record_first_moves: false,
        check_social_stability: false,
    };
    let report = run_until_stable(&mut state, &run)?;
    Ok(TrialRow {
        topology: config.topology,
        n,
        epsilon: config.epsilon,
        delta: config.delta,
        trial,
        seed,
        steps: report.steps_to_stable.unwrap_or(config.max_steps),
        censored: report.censored(),
        final_potential: report.final_potential,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the sweep on a bounded worker pool. Rows come back in canonical
/// `(size index, trial)` order regardless of scheduling.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    // Instance-level validation up front so a bad grid fails before work starts.
    for &n in &config.sizes {
        build_instance(
            config,
            n,
            trial_seed(config.base_seed, config.topology, n, 0),
        )?;
    }

    let tasks: Vec<(usize, usize)> = config
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..config.trials).map(move |t| (i, t)))
        .collect();
    let slots: Mutex<Vec<Option<Result<TrialRow>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = config.jobs.min(tasks.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let (size_idx, trial) = tasks[i];
                let row = run_trial(config, config.sizes[size_idx], trial);
                slots.lock().expect("worker panicked")[i] = Some(row);
            });
        }
    });

    let rows: Vec<TrialRow> = slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|slot| slot.expect("every task ran"))
        .collect::<Result<_>>()?;
    let cells = summarize(&rows);
    Ok(SweepResult { rows, cells })
}

/// Recomputes per-cell summaries from raw rows (rows stay as given).
pub fn summarize(rows: &[TrialRow]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut keys: Vec<(u64, usize)> = rows.iter().map(|r| (r.topology.tag(), r.n)).collect();
    keys.sort_unstable();
    keys.dedup();
    for (tag, n) in keys {
        let cell_rows: Vec<&TrialRow> = rows
            .iter()
            .filter(|r| r.topology.tag() == tag && r.n == n)
            .collect();
        let topology = cell_rows[0].topology;
        let censored = cell_rows.iter().filter(|r| r.censored).count();
        let mut steps: Vec<u64> = cell_rows
            .iter()
            .filter(|r| !r.censored)
            .map(|r| r.steps)
            .collect();
        steps.sort_unstable();
        let (mean, median, q1, q3, min, max) = if steps.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0, 0)
        } else {
            let mean = steps.iter().map(|&s| s as f64).sum::<f64>() / steps.len() as f64;
            (
                mean,
                quantile(&steps, 0.5),
                quantile(&steps, 0.25),
                quantile(&steps, 0.75),
                steps[0],
                steps[steps.len() - 1],
            )
        };
        cells.push(CellSummary {
            topology,
            n,
            trials: steps.len(),
            censored,
            mean,
            median,
            q1,
            q3,
            min,
            max,
            normalized_mean: mean / (n as f64).powi(3),
        });
    }
    cells
}

/// Quantile with the linear-interpolation convention: rank `(len-1)*p`
/// interpolated between the two nearest order statistics.
fn quantile(sorted: &[u64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] as f64 + frac * (sorted[lo + 1] as f64 - sorted[lo] as f64)
    } else {
        sorted[lo] as f64
    }
}

/// Least-squares power-law fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    /// Slope of `log(mean steps)` against `log(n)`.
    pub exponent: f64,
    pub r_squared: f64,
}

/// Fits `log(mean steps) ~ exponent * log(n)` over the sweep's cells.
///
/// Refuses censored data: a censored trial has no finished step count, so a
/// fit over its cell would understate the true mean.
pub fn fit_scaling_exponent(result: &SweepResult) -> Result<ScalingFit> {
    let censored: usize = result.cells.iter().map(|c| c.censored).sum();
    if censored > 0 {
        return Err(Error::CensoredData(format!(
            "{censored} censored trials in the fitted set"
        )));
    }
    let points: Vec<(f64, f64)> = result.cells.iter().map(|c| (c.n as f64, c.mean)).collect();
    fit_log_log(&points)
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 sizes, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::invalid(format!(
            "scaling fit needs positive data, got ({x}, {y})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "scaling fit needs at least two distinct sizes",
        ));
    }
    let exponent = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(ScalingFit {
        exponent,
        r_squared,
    })
}

pub const CSV_HEADER: &str =
    "topology,n,epsilon,delta,trial,seed,steps,censored,final_potential,wall_ms";

/// Writes raw rows plus a `#`-prefixed summary block.
pub fn export_csv(result: &SweepResult, mut writer: impl Write) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.topology,
            r.n,
            r.epsilon,
            r.delta,
            r.trial,
            r.seed,
            r.steps,
            r.censored,
            r.final_potential,
            r.wall_ms
        ));
    }
    if !result.cells.is_empty() {
        out.push_str(
            "# summary: topology,n,trials,censored,mean,median,q1,q3,min,max,normalized_mean\n",
        );
        for c in &result.cells {
            out.push_str(&format!(
                "# summary: {},{},{},{},{},{},{},{},{},{},{}\n",
                c.topology,
                c.n,
                c.trials,
                c.censored,
                c.mean,
                c.median,
                c.q1,
                c.q3,
                c.min,
                c.max,
                c.normalized_mean
            ));
        }
    }
    writer
        .write_all(out.as_bytes())
        .map_err(|e| Error::Parse(format!("writing csv: {e}")))
}

/// Writes the results CSV to `path`.
pub fn export_csv_path(result: &SweepResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    export_csv(result, std::io::BufWriter::new(file))
}

/// Parses a results CSV (raw rows; `#` lines are ignored) and recomputes the
/// summaries from the rows.
pub fn import_csv(reader: impl Read) -> Result<SweepResult> {
    let buf = BufReader::new(reader);
    let mut rows: Vec<TrialRow> = Vec::new();
    for (idx, line) in buf.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(format!("csv line {}: {e}", idx + 1)))?;
        if line.is_empty() || line.starts_with('#') || line == CSV_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Parse(format!(
                "csv line {}: expected 10 fields, got {}",
                idx + 1,
                fields.len()
            )));
        }
        let parse_err = |what: &str| Error::Parse(format!("csv line {}: bad {what}", idx + 1));
        rows.push(TrialRow {
            topology: fields[0].parse().map_err(|_| parse_err("topology"))?,
            n: fields[1].parse().map_err(|_| parse_err("n"))?,
            epsilon: fields[2].parse().map_err(|_| parse_err("epsilon"))?,
            delta: fields[3].parse().map_err(|_| parse_err("delta"))?,
            trial: fields[4].parse().map_err(|_| parse_err("trial"))?,
            seed: fields[5].parse().map_err(|_| parse_err("seed"))?,
            steps: fields[6].parse().map_err(|_| parse_err("steps"))?,
            censored: fields[7].parse().map_err(|_| parse_err("censored"))?,
            final_potential: fields[8]
                .parse()
                .map_err(|_| parse_err("final_potential"))?,
            wall_ms: fields[9].parse().map_err(|_| parse_err("wall_ms"))?,
        });
    }
    let cells = summarize(&rows);
    Ok(SweepResult { rows, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_path;

    fn small_sweep(jobs: usize) -> SweepResult {
        let mut config = SweepConfig::new(Topology::Path, vec![4, 6, 8], 5, 99);
        config.delta = 5.0;
        config.jobs = jobs;
        run_sweep(&config).unwrap()
    }

    #[test]
    fn single_trial_reduces_to_one_run() {
        let mut config = SweepConfig::new(Topology::Path, vec![8], 1, 7);
        config.delta = 1.0;
        let result = run_sweep(&config).unwrap();
        assert_eq!(result.rows.len(), 1);
        let row = &result.rows[0];
        assert!(!row.censored);
        assert_eq!(result.cells.len(), 1);
        assert_eq!(result.cells[0].mean, row.steps as f64);
        assert_eq!(result.cells[0].min, row.steps);

        // The row reproduces a direct run with the derived seed.
        let mut state = gen_path(8, 100.0).unwrap();
        let run = RunConfig::new(1.0, mix_seed(&[row.seed, 2]));
        let report = run_until_stable(&mut state, &run).unwrap();
        assert_eq!(report.steps_to_stable, Some(row.steps));
        assert_eq!(report.final_potential, row.final_potential);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let serial = small_sweep(1);
        let parallel = small_sweep(8);
        assert_eq!(serial.rows.len(), parallel.rows.len());
        for (a, b) in serial.rows.iter().zip(&parallel.rows) {
            assert_eq!(a.steps, b.steps);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.final_potential, b.final_potential);
            assert_eq!((a.topology, a.n, a.trial), (b.topology, b.n, b.trial));
        }
        assert_eq!(serial.cells, parallel.cells);
    }

    #[test]
    fn aggregates_match_independent_recomputation() {
        let result = small_sweep(2);
        for cell in &result.cells {
            let mut steps: Vec<u64> = result
                .rows
                .iter()
                .filter(|r| r.n == cell.n && !r.censored)
                .map(|r| r.steps)
                .collect();
            steps.sort_unstable();
            let mean = steps.iter().sum::<u64>() as f64 / steps.len() as f64;
            assert_eq!(cell.mean, mean);
            assert_eq!(cell.min, steps[0]);
            assert_eq!(cell.max, *steps.last().unwrap());
            assert_eq!(cell.normalized_mean, mean / (cell.n as f64).powi(3));
            assert!(cell.q1 <= cell.median && cell.median <= cell.q3);
        }
    }

    #[test]
    fn quantiles_use_linear_interpolation() {
        assert_eq!(quantile(&[1, 2, 3, 4], 0.25), 1.75);
        assert_eq!(quantile(&[1, 2, 3, 4], 0.5), 2.5);
        assert_eq!(quantile(&[1, 2, 3, 4], 0.75), 3.25);
        assert_eq!(quantile(&[5], 0.5), 5.0);
    }

    #[test]
    fn censored_trials_are_flagged_and_block_the_fit() {
        let mut config = SweepConfig::new(Topology::Path, vec![8, 12, 16], 2, 3);
        config.delta = 1.0;
        config.max_steps = 5;
        let result = run_sweep(&config).unwrap();
        assert!(result.rows.iter().all(|r| r.censored && r.steps == 5));
        assert!(matches!(
            fit_scaling_exponent(&result),
            Err(Error::CensoredData(_))
        ));
    }

    #[test]
    fn exact_power_laws_fit_exactly() {
        let cubic: Vec<(f64, f64)> = [8.0f64, 16.0, 24.0, 32.0]
            .iter()
            .map(|&n| (n, 2.5 * n.powi(3)))
            .collect();
        let fit = fit_log_log(&cubic).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let quartic: Vec<(f64, f64)> = [8.0f64, 16.0, 24.0, 32.0]
            .iter()
            .map(|&n| (n, 0.1 * n.powi(4)))
            .collect();
        let fit = fit_log_log(&quartic).unwrap();
        assert!((fit.exponent - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_three_sizes() {
        assert!(fit_log_log(&[(8.0, 1.0), (16.0, 2.0)]).is_err());
    }

    #[test]
    fn empty_result_exports_header_only() {
        let result = SweepResult {
            rows: Vec::new(),
            cells: Vec::new(),
        };
        let mut buf = Vec::new();
        export_csv(&result, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_roundtrip_reproduces_rows_and_aggregates() {
        let result = small_sweep(3);
        let mut buf = Vec::new();
        export_csv(&result, &mut buf).unwrap();
        let imported = import_csv(buf.as_slice()).unwrap();
        assert_eq!(imported.rows, result.rows);
        assert_eq!(imported.cells, result.cells);
    }

    #[test]
    fn import_reports_line_context() {
        let text = format!("{CSV_HEADER}\npath,8,100,1,0,1,abc,false,0,0\n");
        let err = import_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_invalid_grids() {
        assert!(run_sweep(&SweepConfig::new(Topology::Path, vec![], 5, 1)).is_err());
        assert!(run_sweep(&SweepConfig::new(Topology::Path, vec![8], 0, 1)).is_err());
        // Dumbbell size constraint caught before any work.
        let config = SweepConfig::new(Topology::DumbbellReduced, vec![10], 1, 1);
        assert!(run_sweep(&config).is_err());
    }
}
