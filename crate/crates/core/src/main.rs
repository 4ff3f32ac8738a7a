use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use cellfree::channel::{write_complex_matrix_csv, write_real_matrix_csv};
use cellfree::complexity::{write_report_csv, write_table_comparison, CostReport};
use cellfree::harness::sweep::run_sweep_with;
use cellfree::harness::{draw_network, write_csv, write_metadata, write_traces, ScenarioConfig};
use cellfree::topology::write_layout_csv;

/// Downlink scheduling simulator for cell-free and clustered cell-free networks.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(p) => ScenarioConfig::from_file(p)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mean sum-rate of every system and policy over the SNR grid.
    Sweep(Common),
    /// Scheduler comparison at a single SNR.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        /// Also write every C-ESG stage to this CSV file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Closed-form FLOP and signaling counts.
    ComplexityReport {
        #[command(flatten)]
        common: Common,
        /// AP counts to tabulate; users scale as `users_per_ap · M`.
        #[arg(long, value_delimiter = ',', default_values_t = [16usize, 32, 64, 128, 256])]
        aps: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        users_per_ap: usize,
        /// Also compare the configured network against the quoted per-method counts.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Layout and cluster assignment of one trial.
    DumpTopology {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Directory for the large-scale gains and channel matrices.
        #[arg(long)]
        channels: Option<PathBuf>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let cfg = common.load()?;
            let result = run_sweep_with(&cfg, |_| {})?;
            let mut out = output(&common.out)?;
            write_csv(&result, &mut out)?;
            out.flush()?;
            if let Some(p) = &common.out {
                write_metadata(&result, File::create(sidecar(p))?)?;
            }
        }
        Command::Compare { common, snr_db, trace } => {
            let mut cfg = common.load()?;
            cfg.snr_db = vec![snr_db];
            let mut records = Vec::new();
            let result = run_sweep_with(&cfg, |r| {
                if trace.is_some() {
                    records.push(r.clone());
                }
            })?;
            let mut out = output(&common.out)?;
            write_csv(&result, &mut out)?;
            out.flush()?;
            if let Some(p) = &trace {
                let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
                write_traces(&records, BufWriter::new(f))?;
            }
        }
        Command::ComplexityReport { common, aps, users_per_ap, table } => {
            let cfg = common.load()?;
            let reports = aps
                .iter()
                .map(|&m| CostReport::equal(m, users_per_ap * m, cfg.cluster_count))
                .collect::<cellfree::Result<Vec<_>>>()?;
            let mut out = output(&common.out)?;
            write_report_csv(&reports, &mut out)?;
            out.flush()?;
            if let Some(p) = &table {
                let r = CostReport::equal(cfg.ap_count, cfg.user_count, cfg.cluster_count)?;
                write_table_comparison(&r, File::create(p)?)?;
                if r.flops_clustered < 0 {
                    eprintln!(
                        "warning: the cluster FLOP polynomial is negative ({}) at M={}, K={}, C={}",
                        r.flops_clustered, r.m, r.k, r.c
                    );
                }
            }
        }
        Command::DumpTopology { common, trial, channels } => {
            let cfg = common.load()?;
            let net = draw_network(&cfg, trial)?;
            let mut out = output(&common.out)?;
            write_layout_csv(&net.layout, &net.clusters, &mut out)?;
            out.flush()?;
            if let Some(dir) = channels {
                std::fs::create_dir_all(&dir)?;
                write_real_matrix_csv(&net.beta, File::create(dir.join("beta.csv"))?)?;
                write_complex_matrix_csv(&net.channel.g, File::create(dir.join("g.csv"))?)?;
                write_complex_matrix_csv(&net.channel.g_hat, File::create(dir.join("g_hat.csv"))?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
