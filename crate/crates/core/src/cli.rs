//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the exit code together with the JSON written to standard output; logs and
//! error messages go to standard error.

use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::exec::ExecMode;
use crate::kn::{self, ChartOptions};
use crate::monoid::AffineMonoid;
use crate::points::{CPoint, KNPoint, DEFAULT_TOL};
use crate::report::{SuiteOptions, VerificationReport};
use crate::rootstack::{self, CubeOptions};

/// Environment variable holding the default tolerance.
pub const TOL_ENV: &str = "KNROOT_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTATION: i32 = 3;

/// Default `(n, m)` pairs for the tower suite.
pub const TOWER_PAIRS: [(u64, u64); 4] = [(1, 2), (2, 4), (2, 6), (3, 6)];
pub const FACTORIZATION_LEVELS: [u64; 3] = [2, 3, 5];
pub const CUBE_LEVELS: [u64; 2] = [2, 3];

#[derive(Parser, Debug)]
#[command(
    name = "knroot",
    version,
    about = "Affine monoids, Kato-Nakayama local models and root-stack fibers"
)]
struct Cli {
    /// Print the JSON output schemas and exit.
    #[arg(long)]
    schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monoid invariants.
    #[command(subcommand)]
    Monoid(MonoidCommand),
    /// The group μ_n(P).
    Mu {
        spec: String,
        #[arg(long)]
        n: u64,
    },
    /// Fiber of τ over a point of ℂ(P).
    KnFiber {
        spec: String,
        /// Point of ℂ(P) as JSON, or @path.
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// All lifts of a point of ℂ(P) to ℂ((1/n)P) and their stabilizer.
    RootFiber {
        spec: String,
        #[arg(long)]
        n: u64,
        /// Point of ℂ(P) as JSON, or @path.
        #[arg(long)]
        point: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Φ_n of a Kato-Nakayama point.
    Phi {
        spec: String,
        #[arg(long)]
        n: u64,
        /// Kato-Nakayama point as JSON, or @path.
        #[arg(long)]
        point: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum MonoidCommand {
    Info {
        spec: String,
    },
    Saturate {
        spec: String,
        /// Saturate in the ambient lattice `ℤ^d` instead of in `P^gp`
        #[arg(long)]
        ambient: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Charts,
    Cube,
    Tower,
    Factorization,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    spec: String,
    /// Root level; suites run their default levels when omitted.
    #[arg(long)]
    n: Option<u64>,
    /// Upper level of the tower suite (requires --n).
    #[arg(long, requires = "n")]
    m: Option<u64>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    /// Run the suites' negative controls (charts: perturbed lifts; cube:
    /// wrong root), which are expected to fail.
    #[arg(long)]
    negative_control: bool,
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
}

enum CliError {
    Usage(String),
    Computation(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(msg) => CliError::Usage(msg),
            other => CliError::Computation(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (EXIT_OK, e.to_string()),
                _ => {
                    eprint!("{e}");
                    (EXIT_USAGE, String::new())
                }
            };
        }
    };
    match dispatch(cli) {
        Ok((code, value)) => {
            let mut out = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            out.push('\n');
            (code, out)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            (EXIT_USAGE, String::new())
        }
        Err(CliError::Computation(e)) => {
            eprintln!("error: {e}");
            (EXIT_COMPUTATION, String::new())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<(i32, Value)> {
    if cli.schema {
        return Ok((EXIT_OK, schemas()));
    }
    let Some(command) = cli.command else {
        return Err(CliError::Usage("no subcommand given (try --help)".into()));
    };
    match command {
        Command::Monoid(MonoidCommand::Info { spec }) => ok(monoid_info(&parse_monoid(&spec)?)?),
        Command::Monoid(MonoidCommand::Saturate { spec, ambient }) => {
            let m = parse_monoid(&spec)?;
            let sat = if ambient {
                m.saturate_in_ambient()?
            } else {
                m.saturate()?
            };
            ok(json!({
                "monoid": m,
                "lattice": if ambient { "ambient" } else { "groupification" },
                "saturation": sat,
                "already_saturated": sat == m,
            }))
        }
        Command::Mu { spec, n } => {
            let m = Arc::new(parse_monoid(&spec)?);
            let mut out = rootstack::mu_n(&m, n)?.to_json();
            out["monoid"] = json!(*m);
            ok(out)
        }
        Command::KnFiber {
            spec,
            point,
            samples,
            seed,
            tol,
        } => {
            let m = Arc::new(parse_monoid(&spec)?);
            let x = CPoint::from_json(m.clone(), &parse_json(&point)?, tolerance(tol)?)?;
            let mut out = kn::kn_fiber(&x, samples, seed)?.to_json();
            out["monoid"] = json!(*m);
            ok(out)
        }
        Command::RootFiber { spec, n, point, tol } => {
            let m = Arc::new(parse_monoid(&spec)?);
            let x = CPoint::from_json(m.clone(), &parse_json(&point)?, tolerance(tol)?)?;
            let mut out = rootstack::root_fiber(&x, n)?.to_json();
            out["monoid"] = json!(*m);
            ok(out)
        }
        Command::Phi { spec, n, point, tol } => {
            let m = Arc::new(parse_monoid(&spec)?);
            let k = KNPoint::from_json(m.clone(), &parse_json(&point)?, tolerance(tol)?)?;
            let mut out = rootstack::phi_n(&k, n)?.to_json();
            out["monoid"] = json!(*m);
            ok(out)
        }
        Command::Verify(args) => verify(args),
    }
}

fn ok(v: Value) -> CliResult<(i32, Value)> {
    Ok((EXIT_OK, v))
}

fn verify(args: VerifyArgs) -> CliResult<(i32, Value)> {
    let m = Arc::new(parse_monoid(&args.spec)?);
    let opts = SuiteOptions {
        samples: args.samples,
        seed: args.seed,
        tol: tolerance(args.tol)?,
        mode: if args.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        },
    };
    if args.m.is_some() && args.suite != Suite::Tower {
        return Err(CliError::Usage("--m only applies to the tower suite".into()));
    }
    match (args.n, args.m) {
        (Some(n), Some(m)) if !m.is_multiple_of(n) => {
            return Err(CliError::Usage(format!("--n {n} must divide --m {m}")));
        }
        _ => {}
    }
    let suites = match args.suite {
        Suite::All => vec![Suite::Charts, Suite::Factorization, Suite::Tower, Suite::Cube],
        s => vec![s],
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    for suite in suites {
        log::info!("running {suite:?} on {} samples", opts.samples);
        match suite {
            Suite::Charts => {
                let perturbation = args.negative_control.then_some(1e-3);
                reports.push(kn::verify_chart_cartesian(
                    &m,
                    &ChartOptions {
                        suite: opts,
                        perturbation,
                    },
                )?);
            }
            Suite::Factorization => {
                for n in args.n.map_or(FACTORIZATION_LEVELS.to_vec(), |n| vec![n]) {
                    reports.push(rootstack::verify_factorization(&m, n, &opts)?);
                }
            }
            Suite::Tower => {
                let pairs = match (args.n, args.m) {
                    (Some(n), Some(m)) => vec![(n, m)],
                    (Some(n), None) => vec![(n, 2 * n)],
                    _ => TOWER_PAIRS.to_vec(),
                };
                for (n, mm) in pairs {
                    reports.push(rootstack::verify_tower(&m, n, mm, &opts)?);
                }
            }
            Suite::Cube => {
                let cube = CubeOptions {
                    suite: opts,
                    wrong_root: args.negative_control,
                };
                for n in args.n.map_or(CUBE_LEVELS.to_vec(), |n| vec![n]) {
                    reports.push(rootstack::verify_cube(&m, n, &cube)?);
                }
            }
            Suite::All => unreachable!("expanded above"),
        }
    }
    let passed = reports.iter().all(|r| r.passed);
    for r in reports.iter().filter(|r| !r.passed) {
        log::warn!("suite {} failed on {} case(s)", r.suite, r.failures.len());
    }
    let code = if passed { EXIT_OK } else { EXIT_VERIFICATION_FAILED };
    Ok((code, json!({ "passed": passed, "reports": reports })))
}

fn tolerance(flag: Option<f64>) -> CliResult<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("{TOL_ENV}={s:?}: {e}")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if tol.is_finite() && tol >= 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!(
            "tolerance must be a nonnegative real, got {tol}"
        )))
    }
}

fn parse_json(text: &str) -> CliResult<Value> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).map_err(|e| CliError::Usage(format!("invalid JSON: {e}")))
}

/// Built-in name, `file:<path>` holding `{ambient_dim, generators}`, or
/// `gens:[[…],…]`.
pub fn parse_monoid(spec: &str) -> crate::Result<AffineMonoid> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")));
    }
    if let Some(list) = spec.strip_prefix("gens:") {
        let raw: Vec<Vec<Value>> =
            serde_json::from_str(list).map_err(|e| Error::Parse(format!("bad generator list: {e}")))?;
        let gens = raw
            .iter()
            .map(|g| {
                g.iter()
                    .map(crate::vec_ops::parse_i64)
                    .collect::<crate::Result<Vec<_>>>()
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let dim = gens
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Parse("generator list is empty".into()))?;
        return AffineMonoid::new(dim, &gens);
    }
    AffineMonoid::builtin(spec)
}

fn monoid_info(m: &AffineMonoid) -> crate::Result<Value> {
    let sharp = m.is_sharp()?;
    let faces = if sharp {
        Some(
            m.faces()?
                .iter()
                .map(|f| {
                    json!({
                        "index": f.index,
                        "dim": f.descriptor.dim,
                        "generators": f.generator_indices,
                        "gp_rank": f.rank(),
                    })
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    Ok(json!({
        "monoid": m,
        "gp_rank": m.rank(),
        "gp_basis": m.groupification().basis(),
        "sharp": sharp,
        "saturated": m.is_saturated()?,
        "fine": m.is_fine(),
        "face_count": faces.as_ref().map(Vec::len),
        "faces": faces,
        "relation_lattice": m.relation_lattice().basis(),
    }))
}

fn schemas() -> Value {
    let reals = "array of decimal strings (17 significant digits, see precision)";
    let point_cplx = json!({
        "face": "array of generator indices spanning the support face",
        "modulus": format!("log |x| on the HNF basis of F^gp: {reals}"),
        "angles": format!("arg x on the HNF basis of F^gp, in [0, 2π): {reals}"),
        "precision": "integer",
        "alternative input": {"values": "array of [re, im] per generator"},
    });
    let point_kn = json!({
        "face": "array of generator indices",
        "log_modulus": format!("log ρ on the HNF basis of F^gp: {reals}"),
        "sigma": format!("angles of σ on the HNF basis of P^gp: {reals}"),
        "precision": "integer",
        "alternative input": {"polar": "array of [ρ, angle] per generator"},
    });
    let root_point = json!({
        "n": "integer level",
        "point": "point of ℂ((1/n)P) in the coordinates of P (p/n ↦ p)",
        "base": "point of ℂ(P)",
        "generator_values": "array of [re, im] at g/n for each generator g",
    });
    let monoid = json!({
        "ambient_dim": "integer",
        "generators": "array of integer vectors as decimal strings, sorted, without duplicates",
    });
    json!({
        "monoid": monoid,
        "cpoint": point_cplx,
        "knpoint": point_kn,
        "monoid info": {
            "monoid": "monoid",
            "gp_rank": "integer",
            "gp_basis": "HNF basis of P^gp, rows of decimal strings",
            "sharp": "bool", "saturated": "bool", "fine": "bool",
            "face_count": "integer or null (non-sharp)",
            "faces": "array of {index, dim, generators, gp_rank} or null",
            "relation_lattice": "basis of the generator relations, rows of decimal strings",
        },
        "monoid saturate": {"monoid": "monoid", "lattice": "\"groupification\" | \"ambient\"", "saturation": "monoid", "already_saturated": "bool"},
        "mu": {
            "monoid": "monoid", "n": "integer", "rank": "integer",
            "invariant_factors": "array of decimal strings",
            "order": "decimal string or null",
            "enumerated": "bool",
            "elements": "array of c ∈ [0,n)^rank (character w ↦ e^{2πi⟨c,w⟩/n}) or null",
        },
        "kn-fiber": {
            "monoid": "monoid", "base": "cpoint", "rank": "integer",
            "lattice": "{free_rank, invariant_factors, projection}: P^gp/F^gp",
            "samples": "array of knpoint",
        },
        "root-fiber": {
            "monoid": "monoid", "lifts": "array of root point", "orbit_size": "integer",
            "stabilizer": "{invariant_factors, order, elements}",
        },
        "root point": root_point,
        "phi": {
            "monoid": "monoid", "point": "root point",
            "certificate": "{stabilizer, lift_translate}",
        },
        "verify": {
            "passed": "bool",
            "reports": "array of {suite, parameters {monoid, n?, m?, samples, seed, tolerance}, passed, cases_run, failures [{sample, face, input, expected, actual, detail}]}",
        },
        "exit codes": {"0": "success", "1": "verification failed", "2": "usage error", "3": "computation error"},
        "environment": {TOL_ENV: "default tolerance (1e-9)"},
    })
}
