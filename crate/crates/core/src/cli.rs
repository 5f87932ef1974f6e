//! Command-line front end. Reports are line-oriented text; the exit code is
//! 0 on pass, 1 on a violation and 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{parse_fifo, Config, ConsistencyMode, LoadHitGuard};
use crate::consistency::{check_execution, run_litmus, Execution, LitmusSpec};
use crate::error::{ConfigError, Error};
use crate::explorer::{
    explore_bfs, mutation_sweep, render_trace, run_random, standard_config, BfsOptions,
    ScheduleConfig,
};
use crate::fifo::FifoMode;
use crate::protocol::{Machine, Mutation};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "tardis",
    version,
    about = "Timestamp coherence protocol model checker"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One seeded random schedule; prints the trace and stats.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Overrides,
        /// Defaults to the configuration's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Always fire a voluntary write-back rule when one is enabled.
        #[arg(long)]
        adversarial: bool,
        /// Lease lengths a shared grant may choose from, e.g. `0,1,5`.
        #[arg(long, value_delimiter = ',')]
        leases: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded breadth-first exploration with every oracle enabled.
    Explore {
        config: PathBuf,
        #[command(flatten)]
        common: Overrides,
        #[arg(long, default_value_t = 25)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a litmus file under many seeds and prints the outcome histogram.
    Litmus {
        file: PathBuf,
        #[command(flatten)]
        common: Overrides,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        /// Defaults to the configuration's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a saved trace offline.
    CheckTrace {
        trace: PathBuf,
        #[arg(long, value_parser = parse_mode, default_value = "sc")]
        mode: ConsistencyMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweeps each seeded protocol defect and reports whether it is caught.
    Selftest {
        /// Sweep this configuration instead of the built-in one.
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags that override the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ConsistencyMode>,
    #[arg(long, value_parser = parse_on_off)]
    pub memory: Option<bool>,
    #[arg(long)]
    pub lease: Option<u64>,
    #[arg(long, value_parser = parse_fifo_arg)]
    pub fifo: Option<FifoMode>,
    #[arg(long = "loadhit-guard", value_parser = parse_guard)]
    pub loadhit_guard: Option<LoadHitGuard>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut Config) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(m) = self.memory {
            cfg.memory = m;
        }
        if let Some(l) = self.lease {
            cfg.lease = l;
        }
        if let Some(f) = self.fifo {
            cfg.fifo = f;
        }
        if let Some(g) = self.loadhit_guard {
            cfg.loadhit_guard = g;
        }
    }
}

fn parse_mode(s: &str) -> Result<ConsistencyMode, String> {
    s.parse()
        .map_err(|_| format!("expected sc or tso, got `{s}`"))
}

fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected on or off, got `{s}`")),
    }
}

fn parse_fifo_arg(s: &str) -> Result<FifoMode, String> {
    parse_fifo(s).ok_or_else(|| format!("expected strict or per-address, got `{s}`"))
}

fn parse_guard(s: &str) -> Result<LoadHitGuard, String> {
    s.parse()
        .map_err(|_| format!("expected table6 or table2, got `{s}`"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(path: &Path, o: &Overrides) -> Result<Config, CliError> {
    let config_err = |source| CliError::Config {
        path: path.to_path_buf(),
        source,
    };
    let mut cfg = Config::parse(&read(path)?).map_err(config_err)?;
    o.apply(&mut cfg);
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

/// Report text and whether everything passed.
struct Report {
    text: String,
    passed: bool,
}

impl Report {
    fn new() -> Report {
        Report {
            text: String::new(),
            passed: true,
        }
    }

    fn line(&mut self, l: impl AsRef<str>) {
        self.text.push_str(l.as_ref());
        self.text.push('\n');
    }

    fn verdict(&mut self, first: Option<String>) {
        match first {
            Some(v) => {
                self.passed = false;
                self.line(v);
            }
            None => self.line("PASS"),
        }
    }
}

fn execute(cmd: &Command) -> Result<Report, CliError> {
    let mut r = Report::new();
    match cmd {
        Command::Run {
            config,
            common,
            seed,
            steps,
            adversarial,
            leases,
            ..
        } => {
            let cfg = load_config(config, common)?;
            let seed = seed.unwrap_or(cfg.seed);
            let m = Machine::new(cfg)?;
            let mut sched = if *adversarial {
                ScheduleConfig::adversarial(seed, *steps)
            } else {
                ScheduleConfig::random(seed, *steps)
            };
            sched.leases = leases.clone();
            let run = run_random(&m, &sched);
            r.text.push_str(&render_trace(&run));
            for l in run.stats.stat_lines() {
                r.line(l);
            }
            r.verdict(run.violations.first().map(|v| v.to_string()));
        }
        Command::Explore {
            config,
            common,
            depth,
            jobs,
            ..
        } => {
            let m = Machine::new(load_config(config, common)?)?;
            let opts = BfsOptions {
                depth: *depth,
                jobs: *jobs,
                stop_on_violation: false,
            };
            let report = explore_bfs(&m, opts);
            r.text.push_str(&report.stats.to_string());
            match &report.counterexample {
                Some(cx) => {
                    r.passed = false;
                    r.text.push_str(&cx.to_string());
                }
                None => r.line("PASS"),
            }
        }
        Command::Litmus {
            file,
            common,
            runs,
            seed,
            steps,
            jobs,
            ..
        } => {
            let mut spec = LitmusSpec::parse(&read(file)?).map_err(|source| CliError::Config {
                path: file.clone(),
                source,
            })?;
            common.apply(&mut spec.config);
            let seed = seed.unwrap_or(spec.config.seed);
            let report = run_litmus(&spec, *runs, seed, *steps, *jobs)?;
            for l in report.lines() {
                r.line(l);
            }
            if let Some((_, _, trace)) = report.violations.first() {
                r.text.push_str(trace);
            }
            r.passed = report.passed();
            r.line(if r.passed { "PASS" } else { "FAIL litmus" });
        }
        Command::CheckTrace { trace, mode, .. } => {
            let x = Execution::parse(&read(trace)?)?;
            let cfg = Config {
                mode: *mode,
                ..Config::default()
            };
            r.line(format!("stat commits={}", x.commits.len()));
            r.line(format!("stat stores={}", x.stores.len()));
            r.verdict(check_execution(&cfg, &x).first().map(|v| v.to_string()));
        }
        Command::Selftest {
            config,
            depth,
            jobs,
            ..
        } => {
            let base = match config {
                Some(p) => Some(load_config(p, &Overrides::default())?),
                None => None,
            };
            for mutation in Mutation::ALL {
                let mut cfg = base
                    .clone()
                    .unwrap_or_else(|| standard_config(mutation.needs_memory()));
                cfg.memory |= mutation.needs_memory();
                let res = mutation_sweep(cfg, mutation, *depth, *jobs);
                r.passed &= res.detected() && res.replayed;
                r.line(res.line());
            }
            r.line(if r.passed { "PASS" } else { "FAIL selftest" });
        }
    }
    Ok(r)
}

fn out_path(cmd: &Command) -> Option<&PathBuf> {
    match cmd {
        Command::Run { out, .. }
        | Command::Explore { out, .. }
        | Command::Litmus { out, .. }
        | Command::CheckTrace { out, .. }
        | Command::Selftest { out, .. } => out.as_ref(),
    }
}

/// Parses `args`, runs the command and writes its report to `stdout` or
/// the `--out` file. Returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match out_path(&cli.command) {
        Some(p) => fs::write(p, &report.text).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => stdout
            .write_all(report.text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    }
}
