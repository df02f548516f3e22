//! `spl`: verification campaigns, single-instance analysis, bound sweeps
//! and sharpness searches for off-diagonal perturbations of spectral
//! subspaces.
//!
//! Exit status: 0 clean, 2 bound violation, 3 structural failure,
//! 4 configuration or input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use spl_core::harness::{
    self, analyze, bound_row, campaign::Tolerances, exit, run_campaign, sharpness_search, sweep,
    trial_instance, write_csv, CampaignConfig, ErrorReport, Grid, Regime, SharpnessConfig, Span,
    SweepSpec,
};
use spl_core::{bounds, json, Error};

#[derive(Parser)]
#[command(name = "spl", version, about = "Spectral perturbation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one instance: split, angular operator, identities, bounds.
    Analyze {
        /// Instance JSON, or Matrix JSON of A together with a gap.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, requires = "gap_right", allow_hyphen_values = true)]
        gap_left: Option<f64>,
        #[arg(long, requires = "gap_left", allow_hyphen_values = true)]
        gap_right: Option<f64>,
        /// Matrix JSON of a Hermitian W; its off-diagonal part is V.
        #[arg(long)]
        perturbation: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate every bound at one (D, d, v).
    Bounds {
        #[arg(long = "D")]
        gap_len: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        v: f64,
        /// Evaluate formulas outside their hypotheses instead of failing.
        #[arg(long)]
        unchecked: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded random verification campaign.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inner block size, `n` or `lo:hi`.
        #[arg(long, default_value = "1:4")]
        n0: Span<usize>,
        /// Outer block size, `n` or `lo:hi` (at least 2).
        #[arg(long, default_value = "2:6")]
        n1: Span<usize>,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        gap_left: f64,
        /// Right gap end, `x` or `lo:hi`.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        gap_right: Span<f64>,
        /// Distance between the spectral components, `x` or `lo:hi`.
        #[arg(long, default_value = "1")]
        d: Span<f64>,
        #[arg(long, default_value_t = 1.0)]
        outer_radius: f64,
        #[arg(long, default_value = "mixed")]
        regime: Regime,
        /// Fraction of the regime interval, `f` or `lo:hi`, in [0, 1).
        #[arg(long = "v-frac", default_value = "0:0.99")]
        v_fraction: Span<f64>,
        /// Worker threads (0: all cores).
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Keep instances in block-diagonal coordinates.
        #[arg(long)]
        no_hide_basis: bool,
        /// Write the Instance JSON of this trial instead of running.
        #[arg(long)]
        dump_trial: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate bounds over a (D, d, v) grid as CSV.
    Sweep {
        /// `lo:hi:steps` or a single value.
        #[arg(long = "D-range")]
        gap_len: Grid,
        #[arg(long)]
        d: Grid,
        #[arg(long = "v-range")]
        v: Grid,
        #[arg(long)]
        unchecked: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for instances that come close to the detailed bound.
    Sharpness {
        #[arg(long = "D")]
        gap_len: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 1)]
        n0: usize,
        #[arg(long, default_value_t = 2)]
        n1: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spread of extra outer eigenvalues (default: D).
        #[arg(long)]
        outer_radius: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => {
            fs::write(p, text).map_err(|e| Error::Parse(format!("writing {}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(p: &Path) -> Result<String, Error> {
    fs::read_to_string(p).map_err(|e| Error::Parse(format!("reading {}: {e}", p.display())))
}

fn run(cli: Cli) -> Result<i32, (Error, Option<PathBuf>)> {
    match cli.command {
        Command::Analyze {
            input,
            gap_left,
            gap_right,
            perturbation,
            out,
            format: Format::Json,
        } => {
            let go = || -> Result<i32, Error> {
                let text = read(&input)?;
                let w = perturbation.as_deref().map(read).transpose()?;
                let gap = gap_left.zip(gap_right);
                let inst = analyze::AnalyzeInput::parse(&text, gap, w.as_deref())?.build()?;
                let report = analyze(&inst)?;
                emit(out.as_deref(), &json::to_string(&report))?;
                Ok(if report.all_bounds_satisfied {
                    exit::CLEAN
                } else {
                    exit::BOUND_VIOLATION
                })
            };
            go().map_err(|e| (e, out))
        }
        Command::Bounds {
            gap_len,
            d,
            v,
            unchecked,
            out,
        } => {
            let go = || -> Result<i32, Error> {
                let inp = bounds::BoundInputs::new(gap_len, d, v)?;
                if !unchecked && !inp.flags().regime29 {
                    return Err(spl_core::DomainError::NormTooLarge {
                        v,
                        limit: inp.limit_29(),
                        condition: "v < sqrt(d*D)",
                    }
                    .into());
                }
                let row = bound_row(gap_len, d, v, unchecked);
                emit(out.as_deref(), &json::to_string(&row))?;
                Ok(exit::CLEAN)
            };
            go().map_err(|e| (e, out))
        }
        Command::Verify {
            trials,
            seed,
            n0,
            n1,
            gap_left,
            gap_right,
            d,
            outer_radius,
            regime,
            v_fraction,
            parallel,
            no_hide_basis,
            dump_trial,
            out,
        } => {
            let cfg = CampaignConfig {
                trials,
                seed,
                n0,
                n1,
                gap_left,
                gap_right,
                d,
                outer_radius,
                regime,
                v_fraction,
                hide_basis: !no_hide_basis,
                tolerances: Tolerances::default(),
                parallel,
            };
            let go = || -> Result<i32, Error> {
                if let Some(i) = dump_trial {
                    cfg.validate()?;
                    let inst = trial_instance(&cfg, i)?;
                    emit(out.as_deref(), &json::to_string(&inst.to_json()))?;
                    return Ok(exit::CLEAN);
                }
                let start = Instant::now();
                let report = run_campaign(&cfg)?;
                emit(out.as_deref(), &json::to_string(&report))?;
                let s = &report.summary;
                eprintln!(
                    "trials {} completed {} violations {} max ratio13 {:.6} max ratio32 {:.6} \
                     max riccati/scale {:.2e} failures {:?} in {:.2?}",
                    s.trials,
                    s.completed,
                    s.violations,
                    s.max_ratio13,
                    s.max_ratio32,
                    s.max_riccati_relative,
                    s.failures,
                    start.elapsed()
                );
                Ok(report.exit_code())
            };
            go().map_err(|e| (e, out))
        }
        Command::Sweep {
            gap_len,
            d,
            v,
            unchecked,
            out,
        } => {
            let go = || -> Result<i32, Error> {
                let rows = sweep(&SweepSpec {
                    gap_len,
                    d,
                    v,
                    unchecked,
                });
                let mut buf = Vec::new();
                write_csv(&rows, &mut buf)?;
                emit(out.as_deref(), &String::from_utf8_lossy(&buf))?;
                Ok(exit::CLEAN)
            };
            go().map_err(|e| (e, out))
        }
        Command::Sharpness {
            gap_len,
            d,
            v,
            n0,
            n1,
            restarts,
            iters,
            seed,
            outer_radius,
            out,
        } => {
            let go = || -> Result<i32, Error> {
                let report = sharpness_search(&SharpnessConfig {
                    gap_len,
                    d,
                    v,
                    n0,
                    n1,
                    restarts,
                    iters,
                    seed,
                    outer_radius: outer_radius.unwrap_or(gap_len),
                })?;
                emit(out.as_deref(), &json::to_string(&report))?;
                eprintln!(
                    "initial ratio {:.6} best ratio {:.9} (restart {})",
                    report.initial_ratio, report.best_ratio, report.best_restart
                );
                Ok(if report.within_bound {
                    exit::CLEAN
                } else {
                    exit::BOUND_VIOLATION
                })
            };
            go().map_err(|e| (e, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are configuration errors, not bound violations.
            let code = if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::CLEAN
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err((e, out)) => {
            eprintln!("error: {e}");
            let report = json::to_string(&ErrorReport::from_error(&e));
            // Structured errors go where the report would have gone.
            if emit(out.as_deref(), &report).is_err() {
                print!("{report}");
            }
            harness::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
