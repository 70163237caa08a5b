//! Command-line front end. Every subcommand writes one JSON document or one
//! CSV table, to `--output-path` (atomically) or stdout.

use crate::equilibrium::{
    alpha_threshold, check_sphere, f_eval_at, power_law_radius, stationary_radii, ModifiedPotentialCtx, RadiusSearch,
    ScanGrid,
};
use crate::error::Error;
use crate::ext;
use crate::fields::RadialField;
use crate::oracle::{
    particle_energy, particle_equilibrium_solve, radial_equilibrium_solve, support_report, FrankWolfeOptions,
    ParticleOptions, RadialGrid, SupportReport,
};
use crate::sphere_kernel::{b_d, c_sd, RieszParams, SphereEvalPoint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_FLAGS: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

/// Tag written into every JSON document; bumped with the schemas in `schemas/`.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(
    name = "riesz-eq",
    version,
    about = "Certify sphere equilibria of Riesz energies with external fields"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output_path: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized solvers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Radial,
    Particles,
}

#[derive(Debug, Args)]
pub struct Kernel {
    #[arg(long)]
    pub d: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// c_{s,d}, b_d and the power-law threshold.
    Constants(#[command(flatten)] Kernel),
    /// Modified potential f and its first two derivatives on a lambda grid.
    Potential {
        #[command(flatten)]
        kernel: Kernel,
        #[arg(long = "R")]
        radius: f64,
        /// Field specification (JSON).
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 3.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 301)]
        n: usize,
        /// Log-spaced grid (needs lambda-min > 0).
        #[arg(long)]
        log: bool,
    },
    /// Full sphere check: radii, necessary conditions, certificates, verdict.
    CheckSphere {
        #[command(flatten)]
        kernel: Kernel,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        r_min: f64,
        #[arg(long, default_value_t = 1e4)]
        r_max: f64,
    },
    /// Power-law sphere region over an (s, alpha) grid.
    Scan {
        #[arg(long)]
        d: u32,
        #[arg(long, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        s_max: f64,
        #[arg(long)]
        s_n: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long)]
        alpha_n: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Numeric equilibrium by the radial or particle oracle.
    Solve {
        #[command(flatten)]
        kernel: Kernel,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0.2)]
        r_min: f64,
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        /// Number of grid radii (radial method).
        #[arg(long, default_value_t = 400)]
        m: usize,
        /// Number of particles (particle method).
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long)]
        max_iters: Option<usize>,
    },
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn flags(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_FLAGS,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::Collision { .. } | Error::NoConvergence(_) => EXIT_NOT_CONVERGED,
            Error::QuadratureFailure { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_DOMAIN,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Errors go to stderr; stdout carries only results.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FLAGS } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cfg).and_then(|out| emit(&cfg, &out)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("riesz-eq: {}", f.message);
            f.code
        }
    }
}

fn emit(cfg: &RunConfig, out: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_IO,
        message: e.to_string(),
    };
    match &cfg.output_path {
        None => std::io::stdout().lock().write_all(out.as_bytes()).map_err(io),
        Some(path) => write_atomic(path, out.as_bytes()).map_err(io),
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn params(k: &Kernel) -> Result<RieszParams, Failure> {
    Ok(RieszParams::new(k.d, k.s)?)
}

fn read_field(path: &Path) -> Result<RadialField, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::flags(format!("cannot read field file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::flags(format!("invalid field file {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn format_or(cfg: &RunConfig, default: Format, allowed: &[Format], what: &str) -> Result<Format, Failure> {
    let f = cfg.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Failure::flags(
            format!("{what} does not support --format {f:?}").to_lowercase(),
        ));
    }
    Ok(f)
}

fn execute(cfg: &RunConfig) -> Result<String, Failure> {
    match &cfg.command {
        Command::Constants(k) => constants(cfg, k),
        Command::Potential {
            kernel,
            radius,
            field,
            lambda_min,
            lambda_max,
            n,
            log,
        } => potential(cfg, kernel, *radius, field, *lambda_min, *lambda_max, *n, *log),
        Command::CheckSphere {
            kernel,
            field,
            r_min,
            r_max,
        } => {
            format_or(cfg, Format::Json, &[Format::Json], "check-sphere")?;
            let p = params(kernel)?;
            let f = read_field(field)?;
            let search = RadiusSearch {
                r_min: *r_min,
                r_max: *r_max,
                ..RadiusSearch::default()
            };
            let verdict = check_sphere(p, &f, search, ScanGrid::default())?;
            Ok(to_json(
                &json!({ "schema_version": SCHEMA_VERSION, "command": "check-sphere", "result": verdict }),
            ))
        }
        Command::Scan {
            d,
            s_min,
            s_max,
            s_n,
            alpha_min,
            alpha_max,
            alpha_n,
            gamma,
        } => scan(
            cfg,
            *d,
            (*s_min, *s_max, *s_n),
            (*alpha_min, *alpha_max, *alpha_n),
            *gamma,
        ),
        Command::Solve {
            kernel,
            field,
            method,
            r_min,
            r_max,
            m,
            n,
            max_iters,
        } => {
            format_or(cfg, Format::Json, &[Format::Json], "solve")?;
            let p = params(kernel)?;
            let f = read_field(field)?;
            solve(
                cfg,
                p,
                &f,
                *method,
                RadialGrid {
                    r_min: *r_min,
                    r_max: *r_max,
                    m: *m,
                },
                *n,
                *max_iters,
            )
        }
    }
}

#[derive(Serialize)]
struct ConstantsOut {
    d: u32,
    s: f64,
    c_sd: f64,
    b_d: f64,
    /// null outside `-2 < s < d - 3`.
    alpha_threshold: Option<f64>,
}

fn constants(cfg: &RunConfig, k: &Kernel) -> Result<String, Failure> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv], "constants")?;
    let p = params(k)?;
    let out = ConstantsOut {
        d: p.d,
        s: p.s,
        c_sd: c_sd(p)?,
        b_d: b_d(p.d)?,
        alpha_threshold: if p.s < p.dim() - 3.0 {
            Some(alpha_threshold(p)?)
        } else {
            None
        },
    };
    Ok(match format {
        Format::Json => to_json(&json!({ "schema_version": SCHEMA_VERSION, "command": "constants", "result": out })),
        Format::Csv => to_csv(
            &["d", "s", "c_sd", "b_d", "alpha_threshold"],
            &[vec![
                out.d.to_string(),
                csv_num(out.s),
                csv_num(out.c_sd),
                csv_num(out.b_d),
                out.alpha_threshold.map(csv_num).unwrap_or_default(),
            ]],
        ),
    })
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect()
}

#[derive(Serialize)]
struct PotentialRow {
    lambda: f64,
    #[serde(serialize_with = "ext::opt_real")]
    f: Option<f64>,
    #[serde(serialize_with = "ext::opt_real")]
    df: Option<f64>,
    #[serde(serialize_with = "ext::opt_real")]
    d2f: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn potential(
    cfg: &RunConfig,
    k: &Kernel,
    radius: f64,
    field: &Path,
    lambda_min: f64,
    lambda_max: f64,
    n: usize,
    log: bool,
) -> Result<String, Failure> {
    let format = format_or(cfg, Format::Csv, &[Format::Json, Format::Csv], "potential")?;
    if n == 0 || !(lambda_min >= 0.0) || !(lambda_max >= lambda_min) || !lambda_max.is_finite() {
        return Err(Failure::flags("need n >= 1 and 0 <= lambda-min <= lambda-max < inf"));
    }
    if log && !(lambda_min > 0.0) {
        return Err(Failure::flags("--log needs lambda-min > 0"));
    }
    let p = params(k)?;
    let f = read_field(field)?;
    let ctx = ModifiedPotentialCtx::new(p, f, radius)?;
    let mut rows = Vec::with_capacity(n);
    for lambda in grid(lambda_min, lambda_max, n, log) {
        let pt = SphereEvalPoint::new(lambda)?;
        // Undefined derivatives (one-sided limits that disagree) become empty cells.
        let at = |order| match f_eval_at(&ctx, pt, order) {
            Ok(v) => Ok(Some(v)),
            Err(Error::LimitUndefined(_)) | Err(Error::Domain(_)) if order > 0 => Ok(None),
            Err(e) => Err(e),
        };
        rows.push(PotentialRow {
            lambda,
            f: at(0)?,
            df: at(1)?,
            d2f: at(2)?,
        });
    }
    Ok(match format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "potential",
            "result": { "d": p.d, "s": p.s, "R": radius, "field": f, "rows": rows },
        })),
        Format::Csv => {
            let cell = |x: Option<f64>| x.map(csv_num).unwrap_or_default();
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![csv_num(r.lambda), cell(r.f), cell(r.df), cell(r.d2f)])
                .collect();
            to_csv(&["lambda", "f", "f'", "f''"], &table)
        }
    })
}

#[derive(Serialize)]
struct ScanRow {
    s: f64,
    alpha: f64,
    in_region: u8,
    #[serde(rename = "R_star")]
    r_star: Option<f64>,
}

fn scan_threads() -> Result<usize, Failure> {
    match std::env::var("RIESZ_EQ_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::flags(format!("RIESZ_EQ_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn scan(
    cfg: &RunConfig,
    d: u32,
    (s_min, s_max, s_n): (f64, f64, usize),
    (a_min, a_max, a_n): (f64, f64, usize),
    gamma: f64,
) -> Result<String, Failure> {
    let format = format_or(cfg, Format::Csv, &[Format::Json, Format::Csv], "scan")?;
    if s_n == 0 || a_n == 0 || !(s_max >= s_min) || !(a_max >= a_min) {
        return Err(Failure::flags("scan needs s-n, alpha-n >= 1 and min <= max"));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Failure::flags(format!("gamma must be finite and > 0, got {gamma}")));
    }
    let cells: Vec<(f64, f64)> = grid(s_min, s_max, s_n, false)
        .into_iter()
        .flat_map(|s| grid(a_min, a_max, a_n, false).into_iter().map(move |a| (s, a)))
        .collect();
    let cell = |&(s, alpha): &(f64, f64)| -> Result<ScanRow, Error> {
        let p = RieszParams::new(d, s)?;
        let inside = s < p.dim() - 3.0 && alpha > (-s).max(0.0) && alpha >= alpha_threshold(p)?;
        let r_star = if inside {
            Some(power_law_radius(p, gamma, alpha)?)
        } else {
            None
        };
        Ok(ScanRow {
            s,
            alpha,
            in_region: inside as u8,
            r_star,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scan_threads()?)
        .build()
        .map_err(|e| Failure {
            code: EXIT_IO,
            message: e.to_string(),
        })?;
    // Ordered collect keeps the output independent of the thread count.
    let rows: Vec<ScanRow> = pool.install(|| cells.par_iter().map(cell).collect::<Result<_, _>>())?;
    Ok(match format {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "command": "scan",
            "result": { "d": d, "gamma": gamma, "rows": rows },
        })),
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        csv_num(r.s),
                        csv_num(r.alpha),
                        r.in_region.to_string(),
                        r.r_star.map(csv_num).unwrap_or_default(),
                    ]
                })
                .collect();
            to_csv(&["s", "alpha", "in_region", "R_star"], &table)
        }
    })
}

#[derive(Serialize)]
struct SolveOut<'a> {
    method: &'static str,
    d: u32,
    s: f64,
    field: &'a RadialField,
    /// First stationary radius, the reference for `support.sphere_score`.
    reference_radius: Option<f64>,
    support: SupportReport,
    energy: f64,
    iterations: usize,
    #[serde(flatten)]
    detail: serde_json::Value,
}

fn solve(
    cfg: &RunConfig,
    p: RieszParams,
    f: &RadialField,
    method: Method,
    grid: RadialGrid,
    n: usize,
    max_iters: Option<usize>,
) -> Result<String, Failure> {
    let reference = if p.s < p.dim() - 1.0 {
        stationary_radii(p, f, RadiusSearch::default())?.radii.first().copied()
    } else {
        None
    };
    let out = match method {
        Method::Radial => {
            let mut opt = FrankWolfeOptions::default();
            if let Some(it) = max_iters {
                opt.max_iters = it;
            }
            let sol = radial_equilibrium_solve(p, f, grid, opt)?;
            SolveOut {
                method: "radial",
                d: p.d,
                s: p.s,
                field: f,
                reference_radius: reference,
                support: support_report(&sol.measure, reference),
                energy: sol.value,
                iterations: sol.iterations,
                detail: json!({ "grid": grid, "gap": sol.gap, "measure": sol.measure }),
            }
        }
        Method::Particles => {
            let mut opt = ParticleOptions {
                seed: cfg.seed,
                ..ParticleOptions::default()
            };
            if let Some(it) = max_iters {
                opt.max_iters = it;
            }
            let sol = particle_equilibrium_solve(p, Some(f), n, opt)?;
            SolveOut {
                method: "particles",
                d: p.d,
                s: p.s,
                field: f,
                reference_radius: reference,
                support: support_report(&sol, reference),
                energy: particle_energy(p, Some(f), &sol.points)?,
                iterations: sol.iterations,
                detail: json!({
                    "n": n,
                    "seed": cfg.seed,
                    "grad_norm": sol.grad_norm,
                    "restarts": sol.restarts,
                    "points": sol.points,
                }),
            }
        }
    };
    Ok(to_json(
        &json!({ "schema_version": SCHEMA_VERSION, "command": "solve", "result": out }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(csv_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn flag_errors_exit_2() {
        assert_eq!(run(["riesz-eq", "constants", "--d", "8"]), EXIT_FLAGS);
        assert_eq!(run(["riesz-eq", "nonsense"]), EXIT_FLAGS);
        assert_eq!(
            run(["riesz-eq", "constants", "--d", "8", "--s", "4", "--format", "xml"]),
            EXIT_FLAGS
        );
    }

    #[test]
    fn domain_errors_exit_3() {
        assert_eq!(run(["riesz-eq", "constants", "--d", "8", "--s", "9"]), EXIT_DOMAIN);
    }
}
