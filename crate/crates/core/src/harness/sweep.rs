//! Averaging trials over the SNR grid.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::Result;
use crate::scheduler::{SchedulerKind, Scope};

use super::config::ScenarioConfig;
use super::trial::{run_trial, TrialRecord};

/// Mean and spread of one (system, policy, SNR) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scope: Scope,
    pub scheduler: SchedulerKind,
    pub snr_db: f64,
    pub mean_rate: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std_rate: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config_hash: String,
    pub master_seed: u64,
    pub version: &'static str,
}

impl SweepResult {
    pub fn row(&self, scope: Scope, scheduler: SchedulerKind, snr_db: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scope == scope && r.scheduler == scheduler && r.snr_db == snr_db)
    }

    pub fn mean(&self, scope: Scope, scheduler: SchedulerKind, snr_db: f64) -> Option<f64> {
        self.row(scope, scheduler, snr_db).map(|r| r.mean_rate)
    }
}

/// Runs every trial (in parallel) and folds them in trial order.
pub fn run_sweep(config: &ScenarioConfig) -> Result<SweepResult> {
    run_sweep_with(config, |_| {})
}

/// [`run_sweep`] that also hands every finished trial to `inspect`, in trial
/// order.
pub fn run_sweep_with(
    config: &ScenarioConfig,
    mut inspect: impl FnMut(&TrialRecord),
) -> Result<SweepResult> {
    config.validate()?;
    let records: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    if let Some(first) = records.first() {
        for (slot, o) in first.outcomes.iter().enumerate() {
            let rates: Vec<f64> = records.iter().map(|r| r.outcomes[slot].sum_rate).collect();
            let (mean_rate, std_rate) = mean_std(&rates);
            rows.push(SweepRow {
                scope: o.scope,
                scheduler: o.scheduler,
                snr_db: o.snr_db,
                mean_rate,
                std_rate,
                trials: rates.len(),
            });
        }
    }
    records.iter().for_each(&mut inspect);
    // Rows ordered by system, policy, then SNR.
    let scope_rank = |s: Scope| config.mode.scopes().iter().position(|&x| x == s);
    let sched_rank = |s: SchedulerKind| config.schedulers.iter().position(|&x| x == s);
    let snr_rank = |v: f64| config.snr_db.iter().position(|&x| x == v);
    rows.sort_by_key(|r| (scope_rank(r.scope), sched_rank(r.scheduler), snr_rank(r.snr_db)));
    Ok(SweepResult {
        rows,
        config_hash: config.hash(),
        master_seed: config.master_seed,
        version: env!("CARGO_PKG_VERSION"),
    })
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Plain decimal rendering that always carries a decimal point.
pub fn decimal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || !v.is_finite() {
        s
    } else {
        s + ".0"
    }
}

pub const CSV_HEADER: [&str; 6] = ["mode", "scheduler", "snr_db", "mean_rate", "std_rate", "trials"];

/// Writes the result rows.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.scope.name().to_string(),
            r.scheduler.name().to_string(),
            decimal(r.snr_db),
            decimal(r.mean_rate),
            decimal(r.std_rate),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the result rows to `path`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_csv(result, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Key-value run metadata, one `key=value` per line.
pub fn write_metadata<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "config_sha256={}", result.config_hash)?;
    writeln!(out, "master_seed={}", result.master_seed)?;
    writeln!(out, "version={}", result.version)?;
    Ok(())
}

/// Writes every C-ESG stage of every cluster: `trial,mode,snr_db,cluster,stage,users,rate`.
/// Users are global indices separated by spaces; `rate` is the stage's
/// estimate under the stage-1 interference.
pub fn write_traces<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "mode", "snr_db", "cluster", "stage", "users", "rate"])?;
    for rec in records {
        for o in rec.outcomes.iter().filter(|o| o.scheduler == SchedulerKind::Cesg) {
            for s in &o.schedules {
                let Some(trace) = &s.trace else { continue };
                for (stage, set) in trace.stage_sets.iter().enumerate() {
                    let users: Vec<String> = set.users.iter().map(|u| u.to_string()).collect();
                    w.write_record([
                        rec.trial.to_string(),
                        o.scope.name().to_string(),
                        decimal(o.snr_db),
                        s.cluster.to_string(),
                        (stage + 1).to_string(),
                        users.join(" "),
                        decimal(set.rate),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
