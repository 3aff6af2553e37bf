use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sasrl::harness::{compare_report, fit_transition, run_experiment, RunConfig};
use sasrl::mmrp::read_trajectory_log;
use sasrl::probe::{Discretizer, OccupancyStats, DEFAULT_SUPPORT_THRESHOLD};
use sasrl::{Error, Result};

#[derive(Parser)]
#[command(name = "sasrl", version, about = "Transition-value actor-critic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured seed and write its artifacts.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        algo: Option<String>,
        #[arg(long)]
        env: Option<String>,
        /// `0,1,2` or `0..10`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        granularity: Option<String>,
        #[arg(long)]
        train_transition_model: bool,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Artifact directory; defaults to `runs/<algo>_<env>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate R1, R2 and k from a trajectory log.
    ProbeK {
        #[arg(long)]
        log: PathBuf,
        /// State bins, optionally followed by action bins: `10` or `10,8`.
        #[arg(long, default_value = "10,8")]
        bins: String,
        #[arg(long, default_value_t = DEFAULT_SUPPORT_THRESHOLD)]
        support: u64,
        /// Per-cell histogram CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Compare plateau returns of finished runs.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Summary CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Fit inverse transition models to a run's logged prefill.
    FitTransition {
        #[arg(long)]
        run: PathBuf,
    },
}

fn parse_bins(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("`--bins` expects `S` or `S,A`, got `{s}`"));
    let parts: Vec<usize> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    match parts[..] {
        [sb] => Ok((sb, 8)),
        [sb, ab] => Ok((sb, ab)),
        _ => Err(bad()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Train {
            config,
            algo,
            env,
            seeds,
            granularity,
            train_transition_model,
            overrides,
            out,
        } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            for (k, v) in [("algo", algo), ("env", env), ("seeds", seeds), ("granularity", granularity)] {
                if let Some(v) = v {
                    cfg.set(k, &v)?;
                }
            }
            if train_transition_model {
                cfg.agent.train_transition_model = true;
            }
            for o in &overrides {
                let (k, v) = o
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("`--set` expects KEY=VALUE, got `{o}`")))?;
                cfg.set(k.trim(), v.trim())?;
            }
            let dir = out.unwrap_or_else(|| PathBuf::from(format!("runs/{}_{}", cfg.algo, cfg.env)));
            let summary = run_experiment(&cfg, &dir)?;
            if let Some(last) = summary.aggregate.last() {
                println!(
                    "{}: final mean return {:.3} over {} seeds",
                    dir.display(),
                    last.mean_return,
                    summary.runs.len()
                );
            }
            match &summary.k {
                Ok(k) => println!("k probe: {}", k.report_line()),
                Err(e) => println!("k probe: {e}"),
            }
            if let Some((seed, e)) = summary.failures.first() {
                eprintln!("{} of {} seeds failed; first: seed {seed}: {e}", summary.failures.len(), cfg.seeds.len());
                return Ok(ExitCode::from(e.exit_code() as u8));
            }
        }
        Command::ProbeK {
            log,
            bins,
            support,
            histogram,
        } => {
            let (sb, ab) = parse_bins(&bins)?;
            let file = File::open(&log).map_err(|e| Error::Config(format!("cannot open {}: {e}", log.display())))?;
            let (header, samples) = read_trajectory_log(BufReader::new(file))?;
            let disc = Discretizer::uniform(&header.state_box, &header.action_box, sb, ab)?;
            let mut stats = OccupancyStats::new();
            stats.accumulate(&samples, &disc);
            if let Some(p) = histogram {
                stats.write_histogram(BufWriter::new(File::create(p)?))?;
            }
            println!("{}", stats.estimate_k(support)?.report_line());
        }
        Command::Compare { runs, csv } => {
            let report = compare_report(&runs)?;
            if let Some(p) = csv {
                report.write_csv(BufWriter::new(File::create(p)?))?;
            }
            print!("{}", report.table());
        }
        Command::FitTransition { run } => {
            for f in fit_transition(&run)? {
                println!(
                    "seed {}: {} train / {} held out, loss {:.6} / {:.6}",
                    f.seed, f.train_samples, f.holdout_samples, f.train_loss, f.holdout_loss
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
