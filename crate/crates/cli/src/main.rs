#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monolab::field3d::PhiField;
use monolab::radial::RadialConformalMetric;

mod config;
mod run;

use config::{config_err, Command, ConfigError, FuzzDomain, RunConfig, SeedRange};

/// Verification suites for harmonic level-set monotonicity on radial and
/// 3D conformally flat metrics.
///
/// Exit status: 0 when every suite passes, 1 when any check fails (the
/// summary is still written), 2 on a configuration error.
#[derive(Debug, Parser)]
#[command(name = "monolab", version)]
struct Cli {
    /// Run config (JSON or TOML). A bare metric description runs a sweep.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of the random metric for `sweep`, or a single `fuzz` seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol_mono: Option<f64>,
    #[arg(long, global = true)]
    tol_bound: Option<f64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "MONOLAB_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form and monotonicity suites on Schwarzschild exteriors.
    VerifySchwarzschild {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        masses: Option<Vec<f64>>,
        #[arg(long)]
        r0: Option<f64>,
        /// Skip the two-ended manifolds.
        #[arg(long)]
        no_two_ended: bool,
    },
    /// Level quantities and checks for one radial metric.
    Sweep {
        /// Flat exterior of the unit sphere.
        #[arg(long, conflicts_with = "schwarzschild")]
        flat: bool,
        /// Schwarzschild exterior of this mass.
        #[arg(long, allow_negative_numbers = true)]
        schwarzschild: Option<f64>,
        #[arg(long)]
        r0: Option<f64>,
        /// Number of equally spaced levels on [0, 0.99].
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Monotonicity checks on seeded random admissible metrics.
    Fuzz {
        /// Inclusive range such as `0..199`.
        #[arg(long)]
        seeds: Option<SeedRange>,
        #[arg(long, value_enum)]
        domain: Option<FuzzDomain>,
        #[arg(long)]
        shells: Option<usize>,
    },
    /// Solve on a 3D grid and check the estimated level quantities.
    Solve3d {
        #[arg(long, value_enum)]
        field: Option<FieldKind>,
        #[arg(long, allow_negative_numbers = true)]
        mass: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        r_box: Option<f64>,
        #[arg(long)]
        r0: Option<f64>,
    },
    /// Summarize the suite results already in the output directory.
    Report,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FieldKind {
    Flat,
    Schwarzschild,
    TwoShell,
}

fn build_config(cli: Cli) -> anyhow::Result<RunConfig> {
    let mut c = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(match &cli.command {
            Some(cmd) => command_of(cmd),
            None => return Err(config_err("a subcommand or --config is required")),
        }),
    };
    if let Some(cmd) = &cli.command {
        c.command = command_of(cmd);
    }
    if let Some(s) = cli.seed {
        c.seed = Some(s);
    }
    if let Some(t) = cli.tol_mono {
        c.tolerances.mono = t;
    }
    if let Some(t) = cli.tol_bound {
        c.tolerances.bound = t;
    }
    if let Some(n) = cli.threads {
        c.threads = Some(n);
    }
    if let Some(o) = cli.out {
        c.out = o;
    }
    match cli.command {
        Some(Cmd::VerifySchwarzschild {
            masses,
            r0,
            no_two_ended,
        }) => {
            let s = &mut c.schwarzschild;
            if let Some(m) = masses {
                s.masses = m;
            }
            if let Some(r) = r0 {
                s.r0 = r;
            }
            s.two_ended &= !no_two_ended;
        }
        Some(Cmd::Sweep {
            flat,
            schwarzschild,
            r0,
            levels,
        }) => {
            let r0 = r0.unwrap_or(1.0);
            let metric = if flat {
                Some(RadialConformalMetric::flat(r0))
            } else {
                schwarzschild.map(|m| RadialConformalMetric::schwarzschild_exterior(m, r0))
            };
            if let Some(m) = metric {
                c.metric = Some(m.map_err(|e| config_err(e.to_string()))?.config().clone());
            }
            if let Some(n) = levels {
                c.t_grid.count = n;
            }
        }
        Some(Cmd::Fuzz {
            seeds,
            domain,
            shells,
        }) => {
            if let Some(s) = seeds {
                c.fuzz.seeds = s;
            } else if let Some(s) = cli.seed {
                c.fuzz.seeds = SeedRange { first: s, last: s };
            }
            if let Some(d) = domain {
                c.fuzz.domain = d;
            }
            if let Some(n) = shells {
                c.fuzz.shell_count = n;
            }
        }
        Some(Cmd::Solve3d {
            field,
            mass,
            cells,
            r_box,
            r0,
        }) => {
            let f = &mut c.field;
            match field {
                Some(FieldKind::Flat) => f.field = PhiField::Flat,
                Some(FieldKind::Schwarzschild) => {
                    f.field = PhiField::Schwarzschild {
                        mass: mass.unwrap_or(1.0),
                    }
                }
                Some(FieldKind::TwoShell) => f.field = PhiField::two_shell_example(),
                None => {}
            }
            if let Some(n) = cells {
                f.solve.cells = n;
            }
            if let Some(r) = r_box {
                f.solve.r_box = r;
            }
            if let Some(r) = r0 {
                f.solve.r0 = r;
            }
        }
        Some(Cmd::Report) | None => {}
    }
    Ok(c)
}

fn command_of(cmd: &Cmd) -> Command {
    match cmd {
        Cmd::VerifySchwarzschild { .. } => Command::VerifySchwarzschild,
        Cmd::Sweep { .. } => Command::Sweep,
        Cmd::Fuzz { .. } => Command::Fuzz,
        Cmd::Solve3d { .. } => Command::Solve3d,
        Cmd::Report => Command::Report,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = build_config(cli).and_then(|config| {
        if let Some(n) = config.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
        run::execute(&config)
    });
    match result {
        Ok(summary) if summary.passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<ConfigError>().is_some() {
                eprintln!("config error: {e:#}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
