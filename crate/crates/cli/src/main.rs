mod report;
mod sweep;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use gptgeo_core::geometry;
use gptgeo_core::helstrom::{self, EnsembleFile, FamilyMode};
use gptgeo_core::info;
use gptgeo_core::lp::{LpConfig, DEFAULT_TOL};
use gptgeo_core::model::{self, GpModel, StateVec};
use gptgeo_core::{zoo, Error};
use serde::Serialize;

/// Exit codes.
const EXIT_VERDICT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LP: u8 = 3;
const EXIT_HELSTROM: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "gptgeo", version, about = "Point asymmetry and storable information of polytopic GP models")]
struct Cli {
    /// LP feasibility/optimality tolerance.
    #[arg(long, global = true, env = "GPTGEO_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Print every linear program to stderr before solving it.
    #[arg(long, global = true)]
    dump_lp: bool,
    /// Record wall-clock time in reports (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated model as JSON.
    Gen(GenArgs),
    /// Full analysis report of a model.
    Analyze {
        /// Model file or zoo name.
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the capacity lower bound (and the chain verdicts that need it).
        #[arg(long)]
        no_capacity: bool,
    },
    /// Storable information of the vertex family (both programs).
    Nstore {
        model: String,
        /// JSON list of affine points to use instead of the vertices.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Minkowski measure and critical states.
    Minkowski {
        model: String,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Helstrom family of an ensemble file.
    Helstrom {
        ensemble: PathBuf,
        /// Accept any family with P_S ≤ p.
        #[arg(long)]
        weak: bool,
    },
    /// Max-relative entropy between two states (comma-separated affine coordinates).
    Dmax {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        s1: String,
        #[arg(long, allow_hyphen_values = true)]
        s2: String,
    },
    /// CSV of (parameter, m, n, d, C_lb) over a model family.
    Sweep(sweep::SweepArgs),
    /// Runs an invariant suite.
    Verify {
        scope: verify::Scope,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Run on the zoo models instead of random ones.
        #[arg(long)]
        zoo: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    Simplex,
    Polygon,
    Hypercube,
    Ball,
    Prism,
    Random,
}

#[derive(clap::Args, Debug)]
struct GenArgs {
    kind: GenKind,
    /// Number of outcomes of the simplex.
    #[arg(long)]
    d: Option<usize>,
    /// Number of vertices (polygon, ball, random, prism base).
    #[arg(long)]
    k: Option<usize>,
    /// Dimension (hypercube, ball, random).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    height: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors carrying an exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let err = e.into();
        let code = match err.downcast_ref::<Error>() {
            Some(Error::Lp(_)) => EXIT_LP,
            Some(
                Error::UnknownModel(_)
                | Error::InvalidParameter(_)
                | Error::DegenerateModel(_)
                | Error::DimensionMismatch(_)
                | Error::InvalidSymmetry(_)
                | Error::InvalidEnsemble(_)
                | Error::PointOutsideModel(_),
            ) => EXIT_USAGE,
            _ => EXIT_VERDICT,
        };
        Failure { code, err }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        err: anyhow!(msg.into()),
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if cli.dump_lp {
        logger.filter_module("gptgeo_core::lp", log::LevelFilter::Trace);
    }
    logger.format_timestamp(None).init();
    if !(cli.tol > 0.0) {
        eprintln!("error: tolerance must be positive");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let start = Instant::now();
    let cfg = LpConfig::with_tol(cli.tol);
    let elapsed = || cli.timing.then(|| start.elapsed().as_secs_f64());
    match &cli.cmd {
        Command::Gen(args) => {
            let m = generate(args)?.with_lp_config(cfg);
            emit(&m.to_json(), args.out.as_deref())?;
            Ok(0)
        }
        Command::Analyze {
            model,
            out,
            no_capacity,
        } => {
            let m = load_model(model, &cfg)?;
            let mut rep = report::analyze(&m, model, cli.tol, !no_capacity)?;
            rep.wall_clock_s = elapsed();
            emit(&to_json(&rep)?, out.as_deref())?;
            Ok(if rep.passed { 0 } else { EXIT_VERDICT })
        }
        Command::Nstore { model, family } => {
            let m = load_model(model, &cfg)?;
            let fam = match family {
                Some(p) => {
                    let pts: Vec<Vec<f64>> = serde_json::from_str(&read(p)?)?;
                    pts.iter().map(|x| StateVec::from_affine(x)).collect()
                }
                None => m.vertices().to_vec(),
            };
            let r = info::storable_info(&fam, &m)?;
            #[derive(Serialize)]
            struct Out<'a> {
                model: &'a str,
                n_dual: f64,
                n_primal: Option<f64>,
                gap: Option<f64>,
                critical_state: Vec<f64>,
                result: &'a info::StorableInfoResult,
                wall_clock_s: Option<f64>,
            }
            let out = Out {
                model: m.name(),
                n_dual: r.value,
                n_primal: r.primal_value,
                gap: r.gap(),
                critical_state: r.dual_state.coords(),
                result: &r,
                wall_clock_s: elapsed(),
            };
            emit(&to_json(&out)?, None)?;
            Ok(0)
        }
        Command::Minkowski {
            model,
            samples,
            seed,
        } => {
            let m = load_model(model, &cfg)?;
            let mut r = geometry::minkowski_measure(&m)?;
            r.critical_samples = geometry::critical_samples(&m, *samples, *seed)?;
            #[derive(Serialize)]
            struct Out<'a> {
                model: &'a str,
                measure: f64,
                critical_state: Vec<f64>,
                distortion_at_critical: f64,
                critical_samples: Vec<Vec<f64>>,
                wall_clock_s: Option<f64>,
            }
            let out = Out {
                model: m.name(),
                measure: r.measure,
                critical_state: r.critical_state.coords(),
                distortion_at_critical: r.distortion_at_critical,
                critical_samples: r.critical_samples.iter().map(StateVec::coords).collect(),
                wall_clock_s: elapsed(),
            };
            emit(&to_json(&out)?, None)?;
            Ok(0)
        }
        Command::Helstrom { ensemble, weak } => {
            let file: EnsembleFile = serde_json::from_str(&read(ensemble)?)
                .with_context(|| format!("parsing {}", ensemble.display()))?;
            let base = ensemble.parent().unwrap_or(Path::new("."));
            let (m, ens) = file.resolve(base, cli.tol)?;
            let m = m.with_lp_config(cfg);
            let fam = helstrom::helstrom_family(&ens, &m)?;
            let mode = if *weak { FamilyMode::Weak } else { FamilyMode::Strict };
            let verdict = helstrom::verify_family(&fam, &ens, &m, mode)?;
            #[derive(Serialize)]
            struct Out<'a> {
                model: &'a str,
                ratio: f64,
                common_state: Vec<f64>,
                conjugates: Vec<Vec<f64>>,
                tilde_weights: &'a [f64],
                degenerate: &'a [bool],
                verdict: &'a helstrom::FamilyVerdict,
                wall_clock_s: Option<f64>,
            }
            let out = Out {
                model: m.name(),
                ratio: fam.ratio,
                common_state: fam.common_state.coords(),
                conjugates: fam.conjugates.iter().map(StateVec::coords).collect(),
                tilde_weights: &fam.tilde_weights,
                degenerate: &fam.degenerate,
                verdict: &verdict,
                wall_clock_s: elapsed(),
            };
            emit(&to_json(&out)?, None)?;
            Ok(if verdict.passed { 0 } else { EXIT_HELSTROM })
        }
        Command::Dmax { model, s1, s2 } => {
            let m = load_model(model, &cfg)?;
            let a = StateVec::from_affine(&parse_coords(s1)?);
            let b = StateVec::from_affine(&parse_coords(s2)?);
            if a.dim() != m.dim() || b.dim() != m.dim() {
                return Err(usage(format!("states must have {} coordinates", m.dim())));
            }
            let d = info::dmax(&a, &b, &m)?;
            #[derive(Serialize)]
            struct Out {
                dmax_bits: info::ExtReal,
                ratio: info::ExtReal,
            }
            emit(
                &to_json(&Out {
                    dmax_bits: d,
                    ratio: d.exp2(),
                })?,
                None,
            )?;
            Ok(0)
        }
        Command::Sweep(args) => {
            let csv = sweep::run(args, &cfg)?;
            emit(&csv, args.out.as_deref())?;
            Ok(0)
        }
        Command::Verify {
            scope,
            seed,
            count,
            zoo,
        } => {
            let summary = verify::run(*scope, *seed, *count, *zoo, &cfg)?;
            print!("{summary}");
            Ok(if summary.passed() { 0 } else { EXIT_VERDICT })
        }
    }
}

fn generate(a: &GenArgs) -> Result<GpModel, Failure> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("--{flag} is required")));
    let m = match a.kind {
        GenKind::Simplex => zoo::simplex(need(a.d, "d")?),
        GenKind::Polygon => zoo::regular_polygon(need(a.k, "k")?),
        GenKind::Hypercube => zoo::hypercube(need(a.dim, "dim")?),
        GenKind::Ball => zoo::ball_approx(need(a.dim, "dim")?, need(a.k, "k")?, a.seed),
        GenKind::Prism => zoo::regular_polygon(need(a.k, "k")?).and_then(|b| zoo::prism(&b, a.height)),
        GenKind::Random => model::random_model(need(a.dim, "dim")?, need(a.k, "k")?, a.seed),
    };
    m.map_err(|e| usage(e.to_string()))
}

/// A path to a model file, or a zoo name.
pub(crate) fn load_model(spec: &str, cfg: &LpConfig) -> Result<GpModel, Failure> {
    let path = Path::new(spec);
    let m = if path.is_file() {
        GpModel::from_json(&read(path)?, cfg.tol).with_context(|| format!("loading {spec}"))?
    } else {
        zoo::from_name(spec).map_err(|e| usage(format!("{e} (not a file either)")))?
    };
    Ok(m.with_lp_config(*cfg))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_coords(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| usage(format!("bad coordinate {x:?}: {e}"))))
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}
