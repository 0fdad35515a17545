//! Command-line surface for the positive-damping passivization toolkit.
//!
//! Exit codes: 0 = condition holds / system passive, 1 = fails / not
//! passive, 2 = error. Reports are JSON on stdout; plot data is CSV,
//! JSON, or minimal SVG. Set PDREGION_THREADS to cap the parallel sweep
//! worker count.

mod output;
mod repro;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use output::{fmt_sig, CircleOverlay, Curve};
use pdregion::bands::{self, BandMode};
use pdregion::genpass::{self, ROperator};
use pdregion::margins::{self, QuadSpec};
use pdregion::passivity;
use pdregion::pdcore::{self, PassivityIndex, PassivizationMode};
use pdregion::tfparse::{parse_expression, parse_system, SystemFile};
use pdregion::{GridSpec, RationalMatrix, ToleranceConfig};

#[derive(Parser)]
#[command(
    name = "pdregion",
    version,
    about = "Geometric passivization analysis: PD checks, regions, bands, margins"
)]
struct Cli {
    /// Significant digits in CSV and table output.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    Siso,
    MimoExact,
    MimoEstimated,
    If,
    Generalized,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RKind {
    Identity,
    Differentiator,
    Custom,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PlotKind {
    Nyquist,
    Nichols,
    Band,
    Range,
    GenRegion,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one PD check at a single frequency.
    Check {
        system: PathBuf,
        /// Frequency in rad/s.
        #[arg(long, allow_negative_numbers = true)]
        freq: f64,
        /// Scalar passivity index (expanded to sigma*I for MIMO modes).
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        /// Symmetric index matrix as inline JSON [[..],[..]] or @file.
        #[arg(long)]
        sigma_matrix: Option<String>,
        #[arg(long, value_enum, default_value = "siso")]
        mode: CheckMode,
        /// Operator for the generalized mode.
        #[arg(long, value_enum, default_value = "identity")]
        r: RKind,
        /// Rational operator expression for --r custom.
        #[arg(long)]
        r_expr: Option<String>,
        /// Support angles for the estimated MIMO check.
        #[arg(long, default_value_t = 64)]
        angles: usize,
    },
    /// PD frequency band over a log grid; lists print a table.
    Band {
        system: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        /// Comma-separated scalar indices for a table.
        #[arg(long, allow_hyphen_values = true)]
        sigma_list: Option<String>,
        #[arg(long)]
        sigma_matrix: Option<String>,
        /// Band mode; default: siso for 1x1 systems, mimo-estimated
        /// otherwise.
        #[arg(long, value_enum)]
        mode: Option<CheckMode>,
        #[arg(long, value_enum, default_value = "identity")]
        r: RKind,
        #[arg(long)]
        r_expr: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        wmin: f64,
        #[arg(long, default_value_t = 1e3)]
        wmax: f64,
        #[arg(long, default_value_t = 100)]
        ppd: u32,
        /// Add the first failing decade-aligned grid frequency column
        /// (step = 1/ppd decades).
        #[arg(long)]
        report_grid_point: bool,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full OF passivity verdict with winding, containment, residue and
    /// oracle evidence.
    Passivize {
        system: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        /// identity = classical check; differentiator = generalized.
        #[arg(long, value_enum, default_value = "identity")]
        r: RKind,
        #[arg(long, default_value_t = 1e-3)]
        wmin: f64,
        #[arg(long, default_value_t = 1e3)]
        wmax: f64,
        #[arg(long, default_value_t = 100)]
        ppd: u32,
    },
    /// Robustness distance to the PD-disk boundary and perturbation
    /// admissibility.
    Robust {
        system: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
        #[arg(long, default_value_t = 1e-3)]
        wmin: f64,
        #[arg(long, default_value_t = 1e3)]
        wmax: f64,
        #[arg(long, default_value_t = 100)]
        ppd: u32,
        /// H-infinity norm of a candidate perturbation.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Conservation identity of the damping metric, optionally with the
    /// bandwidth/index trade-off bound.
    Waterbed {
        system: PathBuf,
        /// Poisson kernel parameter (> 0).
        #[arg(long)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long)]
        wc: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        wmin: f64,
        #[arg(long, default_value_t = 1e3)]
        wmax: f64,
        #[arg(long, default_value_t = 100)]
        ppd: u32,
    },
    /// Numerical-range boundary of G(jw) at one frequency.
    Range {
        system: PathBuf,
        #[arg(long)]
        freq: f64,
        #[arg(long, default_value_t = 256)]
        angles: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: FileFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit plot data: Nyquist or Nichols curves with PD-region
    /// overlays, band charts, numerical-range slices, generalized-region
    /// samples.
    Plot {
        system: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "nyquist")]
        kind: PlotKind,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        sigma_list: Option<String>,
        #[arg(long, value_enum, default_value = "identity")]
        r: RKind,
        #[arg(long)]
        r_expr: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FileFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        wmin: f64,
        #[arg(long, default_value_t = 1e3)]
        wmax: f64,
        #[arg(long, default_value_t = 100)]
        ppd: u32,
        /// Run the bundled case-study suite and write all its tables and
        /// plot data into --out (a directory).
        #[arg(long)]
        reproduce_paper: bool,
    },
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("PDREGION_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = serde_json::json!({ "error": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(pdregion::Error),
    Usage(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<pdregion::Error> for CliError {
    fn from(e: pdregion::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_system(path: &Path) -> CliResult<(String, RationalMatrix)> {
    let text = std::fs::read_to_string(path)?;
    let file = SystemFile::from_json(&text)?;
    let matrix = parse_system(&file)?;
    Ok((file.name, matrix))
}

/// Resolve the passivity index from --sigma / --sigma-matrix.
fn resolve_sigma(
    sigma: Option<f64>,
    sigma_matrix: Option<&str>,
    dim: usize,
    cfg: &ToleranceConfig,
) -> CliResult<PassivityIndex> {
    if let Some(spec) = sigma_matrix {
        let text = if let Some(path) = spec.strip_prefix('@') {
            std::fs::read_to_string(path)?
        } else {
            spec.to_string()
        };
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(pdregion::Error::from)?;
        let idx = PassivityIndex::from_matrix(rows, cfg)?;
        if idx.dim() != dim {
            return Err(CliError::Usage(format!(
                "sigma matrix is {}x{} but the system is {dim}x{dim}",
                idx.dim(),
                idx.dim()
            )));
        }
        return Ok(idx);
    }
    match sigma {
        Some(s) if dim == 1 => Ok(PassivityIndex::scalar(s)),
        Some(s) => Ok(PassivityIndex::identity_scaled(dim, s)),
        None => Err(CliError::Usage(
            "provide --sigma or --sigma-matrix".to_string(),
        )),
    }
}

fn resolve_operator(r: RKind, r_expr: Option<&str>) -> CliResult<ROperator> {
    match r {
        RKind::Identity => Ok(ROperator::identity()),
        RKind::Differentiator => Ok(ROperator::differentiator()),
        RKind::Custom => {
            let expr = r_expr.ok_or_else(|| {
                CliError::Usage("--r custom requires --r-expr <expression>".to_string())
            })?;
            Ok(ROperator::custom(parse_expression(expr)?))
        }
    }
}

fn require_siso<'m>(
    g: &'m RationalMatrix,
    what: &str,
) -> CliResult<&'m pdregion::RationalFunction> {
    g.as_siso()
        .ok_or_else(|| CliError::Usage(format!("{what} requires a 1x1 system")))
}

fn emit(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print_stdout(content),
    }
    Ok(())
}

/// Print, ignoring a closed pipe (e.g. `pdregion ... | head`).
fn print_stdout(content: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(content.as_bytes());
    let _ = out.flush();
}

fn print_line(content: &str) {
    print_stdout(content);
    print_stdout("\n");
}

#[derive(Serialize)]
struct CheckReport {
    command: &'static str,
    system: String,
    mode: &'static str,
    sigma_lambda_min: f64,
    freq: f64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_min_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_point: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inconclusive: Option<bool>,
}

fn run(cli: Cli) -> CliResult<u8> {
    let cfg = ToleranceConfig::default();
    let sig = cli.precision;
    match cli.command {
        Command::Check {
            system,
            freq,
            sigma,
            sigma_matrix,
            mode,
            r,
            r_expr,
            angles,
        } => {
            let (name, g) = load_system(&system)?;
            let idx = resolve_sigma(sigma, sigma_matrix.as_deref(), g.dim(), &cfg)?;
            let report = match mode {
                CheckMode::Siso => {
                    let f = require_siso(&g, "siso check")?;
                    let s = idx.as_scalar().ok_or_else(|| {
                        CliError::Usage("siso check needs a scalar sigma".to_string())
                    })?;
                    let c = pdcore::pd_check_siso(f, s, freq, &cfg)?;
                    CheckReport {
                        command: "check",
                        system: name,
                        mode: "siso",
                        sigma_lambda_min: idx.lambda_min(),
                        freq,
                        holds: c.holds,
                        margin: Some(c.margin),
                        lambda_min_value: None,
                        worst_point: None,
                        inconclusive: None,
                    }
                }
                CheckMode::MimoExact => {
                    let c = pdcore::pd_check_mimo_exact(&g, &idx, freq, &cfg)?;
                    CheckReport {
                        command: "check",
                        system: name,
                        mode: "mimo-exact",
                        sigma_lambda_min: idx.lambda_min(),
                        freq,
                        holds: c.holds,
                        margin: None,
                        lambda_min_value: Some(c.lambda_min_value),
                        worst_point: None,
                        inconclusive: None,
                    }
                }
                CheckMode::MimoEstimated => {
                    let c = pdcore::pd_check_mimo_necessary(&g, &idx, freq, angles, &cfg)?;
                    CheckReport {
                        command: "check",
                        system: name,
                        mode: "mimo-estimated",
                        sigma_lambda_min: idx.lambda_min(),
                        freq,
                        holds: c.holds,
                        margin: None,
                        lambda_min_value: None,
                        worst_point: Some([c.worst_point.re, c.worst_point.im]),
                        inconclusive: Some(c.inconclusive),
                    }
                }
                CheckMode::If => {
                    let holds = pdcore::pd_check_if(&g, &idx, freq, &cfg)?;
                    CheckReport {
                        command: "check",
                        system: name,
                        mode: "if",
                        sigma_lambda_min: idx.lambda_min(),
                        freq,
                        holds,
                        margin: None,
                        lambda_min_value: None,
                        worst_point: None,
                        inconclusive: None,
                    }
                }
                CheckMode::Generalized => {
                    let f = require_siso(&g, "generalized check")?;
                    let s = idx.as_scalar().ok_or_else(|| {
                        CliError::Usage("generalized check needs a scalar sigma".to_string())
                    })?;
                    let op = resolve_operator(r, r_expr.as_deref())?;
                    let c = genpass::gen_pd_check(f, s, &op, freq, &cfg)?;
                    CheckReport {
                        command: "check",
                        system: name,
                        mode: "generalized",
                        sigma_lambda_min: idx.lambda_min(),
                        freq,
                        holds: c.holds,
                        margin: Some(c.margin),
                        lambda_min_value: None,
                        worst_point: None,
                        inconclusive: None,
                    }
                }
            };
            print_line(&serde_json::to_string_pretty(&report).unwrap());
            Ok(if report.holds { 0 } else { 1 })
        }

        Command::Band {
            system,
            sigma,
            sigma_list,
            sigma_matrix,
            mode,
            r,
            r_expr,
            wmin,
            wmax,
            ppd,
            report_grid_point,
            out,
        } => {
            let (name, g) = load_system(&system)?;
            let grid = GridSpec::log(wmin, wmax, ppd)?;
            let band_mode = match mode {
                Some(CheckMode::Siso) => BandMode::SisoExact,
                Some(CheckMode::MimoExact) => BandMode::MimoExact,
                Some(CheckMode::MimoEstimated) => BandMode::MimoEstimated,
                Some(CheckMode::If) => BandMode::If,
                Some(CheckMode::Generalized) => BandMode::SisoExact,
                None if g.is_siso() => BandMode::SisoExact,
                None => BandMode::MimoEstimated,
            };
            let generalized = matches!(mode, Some(CheckMode::Generalized));
            let op = resolve_operator(r, r_expr.as_deref())?;

            let sigmas: Vec<f64> = if let Some(list) = &sigma_list {
                list.split(',')
                    .map(|t| {
                        t.trim().parse::<f64>().map_err(|_| {
                            CliError::Usage(format!("bad sigma value `{t}` in --sigma-list"))
                        })
                    })
                    .collect::<CliResult<Vec<f64>>>()?
            } else if sigma.is_some() || sigma_matrix.is_some() {
                Vec::new()
            } else {
                return Err(CliError::Usage(
                    "provide --sigma, --sigma-matrix, or --sigma-list".to_string(),
                ));
            };

            if sigmas.is_empty() {
                let idx = resolve_sigma(sigma, sigma_matrix.as_deref(), g.dim(), &cfg)?;
                let band = if generalized {
                    let f = require_siso(&g, "generalized band")?;
                    genpass::gen_pd_band(f, idx.lambda_min(), &op, &grid, &cfg)?
                } else {
                    bands::pd_band(&g, &idx, &grid, band_mode, &cfg)?
                };
                emit(out.as_deref(), &(band.to_json() + "\n"))?;
                return Ok(0);
            }

            let mut table = String::new();
            table.push_str(&format!(
                "# system: {name}  grid: [{wmin}, {wmax}] @ {ppd} points/decade\n"
            ));
            table.push_str("sigma\tband\trefined_edge\tcritical_grid_point\n");
            for &s in &sigmas {
                let idx = PassivityIndex::identity_scaled(g.dim(), s);
                let band = if generalized {
                    let f = require_siso(&g, "generalized band")?;
                    genpass::gen_pd_band(f, s, &op, &grid, &cfg)?
                } else {
                    bands::pd_band(&g, &idx, &grid, band_mode, &cfg)?
                };
                let band_str = if band.is_empty() {
                    "empty".to_string()
                } else {
                    band.intervals
                        .iter()
                        .map(|iv| {
                            format!("[{}, {}]", fmt_sig(iv.lo.w, sig), fmt_sig(iv.hi.w, sig))
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let edge = band
                    .upper_edge()
                    .map(|e| fmt_sig(e, sig))
                    .unwrap_or_else(|| "-".to_string());
                let critical = if report_grid_point {
                    let collapsed = band.is_empty()
                        || (band.intervals.len() == 1
                            && band.intervals[0].is_point()
                            && band.intervals[0].lo.w == 0.0);
                    if collapsed {
                        "0.0000".to_string()
                    } else {
                        let f = require_siso(&g, "--report-grid-point")?;
                        match bands::first_failing_grid_point(
                            &RationalMatrix::from_scalar(f.clone()),
                            s,
                            1.0 / f64::from(ppd),
                            &cfg,
                        ) {
                            Ok(w) => format!("{w:.4}"),
                            Err(pdregion::Error::NoFailure) => "-".to_string(),
                            Err(e) => return Err(e.into()),
                        }
                    }
                } else {
                    String::new()
                };
                table.push_str(&format!(
                    "{}\t{band_str}\t{edge}\t{critical}\n",
                    fmt_sig(s, sig)
                ));
            }
            emit(out.as_deref(), &table)?;
            Ok(0)
        }

        Command::Passivize {
            system,
            sigma,
            r,
            wmin,
            wmax,
            ppd,
        } => {
            let (_, g) = load_system(&system)?;
            let f = require_siso(&g, "passivize")?;
            let grid = GridSpec::log(wmin, wmax, ppd)?;
            let mut report = match r {
                RKind::Identity => {
                    let mut rep = passivity::of_passivity_check(f, sigma, &grid, &cfg)?;
                    rep.oracle_verdict =
                        Some(passivity::oracle_of_passivity(f, sigma, &grid, &cfg)?);
                    rep
                }
                RKind::Differentiator => genpass::gen_full_passivity(
                    f,
                    sigma,
                    &ROperator::differentiator(),
                    &grid,
                    &cfg,
                )?,
                RKind::Custom => {
                    return Err(CliError::Usage(
                        "passivize supports --r identity or differentiator".to_string(),
                    ))
                }
            };
            report.warnings.sort();
            print_line(&report.to_json());
            Ok(match report.verdict {
                passivity::Verdict::Passive => 0,
                _ => 1,
            })
        }

        Command::Robust {
            system,
            sigma,
            wmin,
            wmax,
            ppd,
            delta,
        } => {
            let (_, g) = load_system(&system)?;
            let f = require_siso(&g, "robust")?;
            let grid = GridSpec::log(wmin, wmax, ppd)?;
            let rob = margins::robustness_distance(f, sigma, (wmin, wmax), &grid, &cfg)?;
            #[derive(Serialize)]
            struct RobustReport {
                #[serde(flatten)]
                rob: margins::RobustnessResult,
                #[serde(skip_serializing_if = "Option::is_none")]
                delta: Option<f64>,
                #[serde(skip_serializing_if = "Option::is_none")]
                admissible: Option<bool>,
            }
            let admissible = delta.map(|d| d < rob.d_min);
            let rep = RobustReport {
                rob,
                delta,
                admissible,
            };
            print_line(&serde_json::to_string_pretty(&rep).unwrap());
            Ok(match admissible {
                Some(true) => 0,
                Some(false) => 1,
                None if rob.d_min > 0.0 => 0,
                None => 1,
            })
        }

        Command::Waterbed {
            system,
            a,
            sigma,
            wc,
            wmin,
            wmax,
            ppd,
        } => {
            let (_, g) = load_system(&system)?;
            let f = require_siso(&g, "waterbed")?;
            let identity = margins::waterbed_identity(f, a, &QuadSpec::default(), &cfg)?;
            #[derive(Serialize)]
            struct WaterbedReport {
                #[serde(flatten)]
                identity: margins::WaterbedResult,
                #[serde(skip_serializing_if = "Option::is_none")]
                bound: Option<margins::WaterbedBound>,
            }
            let bound = match (sigma, wc) {
                (Some(s), Some(wc)) => {
                    let grid = GridSpec::log(wmin, wmax, ppd)?;
                    Some(margins::waterbed_bound(f, s, wc, a, &grid, &cfg)?)
                }
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "the trade-off bound needs both --sigma and --wc".to_string(),
                    ))
                }
            };
            let ok = identity.abs_error <= 1e-6 && bound.is_none_or(|b| b.satisfied);
            let rep = WaterbedReport { identity, bound };
            print_line(&serde_json::to_string_pretty(&rep).unwrap());
            Ok(if ok { 0 } else { 1 })
        }

        Command::Range {
            system,
            freq,
            angles,
            format,
            out,
        } => {
            let (name, g) = load_system(&system)?;
            let m = g.eval_jw(freq, &cfg)?;
            let boundary = pdregion::hermlin::numerical_range(&m, angles.max(8));
            match format {
                FileFormat::Json => {
                    #[derive(Serialize)]
                    struct RangeReport {
                        system: String,
                        freq: f64,
                        angles: Vec<f64>,
                        points: Vec<[f64; 2]>,
                        support_values: Vec<f64>,
                        numerical_radius: f64,
                    }
                    let rep = RangeReport {
                        system: name,
                        freq,
                        angles: boundary.angles.clone(),
                        points: boundary
                            .boundary_points
                            .iter()
                            .map(|p| [p.re, p.im])
                            .collect(),
                        support_values: boundary.support_values.clone(),
                        numerical_radius: pdregion::hermlin::numerical_radius(&m),
                    };
                    emit(
                        out.as_deref(),
                        &(serde_json::to_string_pretty(&rep).unwrap() + "\n"),
                    )?;
                }
                FileFormat::Csv | FileFormat::Svg => {
                    let curve = Curve {
                        name: format!("range_w{}", fmt_sig(freq, sig)),
                        rows: boundary
                            .angles
                            .iter()
                            .zip(&boundary.boundary_points)
                            .zip(&boundary.support_values)
                            .map(|((&th, p), &sv)| (th, p.re, p.im, Some(sv)))
                            .collect(),
                    };
                    let content = if format == FileFormat::Csv {
                        output::curves_to_csv(&[curve], sig)
                    } else {
                        output::curves_to_svg(&[curve], &[])
                    };
                    emit(out.as_deref(), &content)?;
                }
            }
            Ok(0)
        }

        Command::Plot {
            system,
            kind,
            sigma,
            sigma_list,
            r,
            r_expr,
            format,
            out,
            wmin,
            wmax,
            ppd,
            reproduce_paper,
        } => {
            if reproduce_paper {
                let dir = out.unwrap_or_else(|| PathBuf::from("case-study-out"));
                repro::run_reproduce(&dir, &cfg)?;
                print_line(&format!("case-study suite written to {}", dir.display()));
                return Ok(0);
            }
            let system = system.ok_or_else(|| {
                CliError::Usage("plot requires a system file (or --reproduce-paper)".to_string())
            })?;
            let (name, g) = load_system(&system)?;
            let grid = GridSpec::log(wmin, wmax, ppd)?;
            let sigmas: Vec<f64> = match (&sigma_list, sigma) {
                (Some(list), _) => list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::Usage(format!("bad sigma `{t}`")))
                    })
                    .collect::<CliResult<Vec<f64>>>()?,
                (None, Some(s)) => vec![s],
                (None, None) => Vec::new(),
            };
            let op = resolve_operator(r, r_expr.as_deref())?;
            let content = render_plot(&name, &g, kind, &sigmas, &op, &grid, format, sig, &cfg)?;
            emit(out.as_deref(), &content)?;
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn render_plot(
    name: &str,
    g: &RationalMatrix,
    kind: PlotKind,
    sigmas: &[f64],
    op: &ROperator,
    grid: &GridSpec,
    format: FileFormat,
    sig: usize,
    cfg: &ToleranceConfig,
) -> CliResult<String> {
    match kind {
        PlotKind::Nyquist => {
            let f = require_siso(g, "nyquist plot")?;
            let mut rows = Vec::new();
            for w in std::iter::once(0.0).chain(grid.points()) {
                if let Ok(v) = f.eval_jw(w, cfg) {
                    let margin = sigmas.first().map(|&s| {
                        pdcore::pd_region(&PassivityIndex::scalar(s), PassivizationMode::Of)
                            .margin(v)
                    });
                    rows.push((w, v.re, v.im, margin));
                }
            }
            let curves = vec![Curve {
                name: name.to_string(),
                rows,
            }];
            let overlays = disk_overlays(sigmas, sig);
            Ok(match format {
                FileFormat::Csv => {
                    let mut all = curves;
                    for o in &overlays {
                        all.push(circle_curve(o));
                    }
                    output::curves_to_csv(&all, sig)
                }
                FileFormat::Svg => output::curves_to_svg(&curves, &overlays),
                FileFormat::Json => plot_json(&curves),
            })
        }
        PlotKind::Nichols => {
            let f = require_siso(g, "nichols plot")?;
            let mut rows = Vec::new();
            for w in grid.points() {
                if let Ok(v) = f.eval_jw(w, cfg) {
                    let mag_db = 20.0 * v.norm().log10();
                    let phase_deg = v.arg().to_degrees();
                    let bound = sigmas
                        .first()
                        .and_then(|&s| pdcore::nichols_bound(s, v.arg()).ok().flatten());
                    rows.push((w, phase_deg, mag_db, bound));
                }
            }
            let mut curves = vec![Curve {
                name: name.to_string(),
                rows,
            }];
            if let Some(&s) = sigmas.first() {
                if s > 0.0 {
                    let mut bound_rows = Vec::new();
                    for k in -89..=89 {
                        let phase = (k as f64).to_radians();
                        if let Ok(Some(b)) = pdcore::nichols_bound(s, phase) {
                            bound_rows.push((k as f64, k as f64, b, None));
                        }
                    }
                    curves.push(Curve {
                        name: format!("gain_bound_sigma_{}", fmt_sig(s, sig)),
                        rows: bound_rows,
                    });
                }
            }
            Ok(match format {
                FileFormat::Csv => output::curves_to_csv(&curves, sig),
                FileFormat::Svg => output::curves_to_svg(&curves, &[]),
                FileFormat::Json => plot_json(&curves),
            })
        }
        PlotKind::Band => {
            let mut curves = Vec::new();
            for &s in sigmas {
                let idx = PassivityIndex::identity_scaled(g.dim(), s);
                let mode = if g.is_siso() {
                    BandMode::SisoExact
                } else {
                    BandMode::MimoEstimated
                };
                let band = bands::pd_band(g, &idx, grid, mode, cfg)?;
                let rows = band
                    .intervals
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| (i as f64, iv.lo.w, iv.hi.w, Some(s)))
                    .collect();
                curves.push(Curve {
                    name: format!("band_sigma_{}", fmt_sig(s, sig)),
                    rows,
                });
            }
            Ok(match format {
                FileFormat::Csv => output::curves_to_csv(&curves, sig),
                FileFormat::Svg => output::curves_to_svg(&curves, &[]),
                FileFormat::Json => plot_json(&curves),
            })
        }
        PlotKind::Range => {
            let mut curves = Vec::new();
            for w in grid.points() {
                let Ok(m) = g.eval_jw(w, cfg) else { continue };
                let b = pdregion::hermlin::numerical_range(&m, 90);
                curves.push(Curve {
                    name: format!("range_w{}", fmt_sig(w, sig)),
                    rows: b
                        .boundary_points
                        .iter()
                        .zip(&b.support_values)
                        .map(|(p, &sv)| (w, p.re, p.im, Some(sv)))
                        .collect(),
                });
            }
            let overlays = disk_overlays(sigmas, sig);
            Ok(match format {
                FileFormat::Csv => {
                    let mut all = curves;
                    for o in &overlays {
                        all.push(circle_curve(o));
                    }
                    output::curves_to_csv(&all, sig)
                }
                FileFormat::Svg => output::curves_to_svg(&curves, &overlays),
                FileFormat::Json => plot_json(&curves),
            })
        }
        PlotKind::GenRegion => {
            let f = require_siso(g, "generalized region export")?;
            let s = sigmas
                .first()
                .copied()
                .ok_or_else(|| CliError::Usage("gen-region export needs --sigma".to_string()))?;
            let samples = genpass::gen_pd_samples(f, s, op, grid, cfg)?;
            let mut out = String::from("w,re_g,im_g,holds,margin,boundary\n");
            for sample in samples {
                let slice = genpass::gen_region_slice(s, op, sample.w, cfg)?;
                let desc = match slice.boundary {
                    genpass::SliceBoundary::Disk {
                        center_re,
                        center_im,
                        radius,
                    } => format!(
                        "disk({};{};{})",
                        fmt_sig(center_re, sig),
                        fmt_sig(center_im, sig),
                        fmt_sig(radius, sig)
                    ),
                    genpass::SliceBoundary::DiskComplement {
                        center_re,
                        center_im,
                        radius,
                    } => format!(
                        "disk_complement({};{};{})",
                        fmt_sig(center_re, sig),
                        fmt_sig(center_im, sig),
                        fmt_sig(radius, sig)
                    ),
                    genpass::SliceBoundary::HalfPlane { a, b } => {
                        format!("halfplane({};{})", fmt_sig(a, sig), fmt_sig(b, sig))
                    }
                    genpass::SliceBoundary::AllPlane => "all".to_string(),
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_sig(sample.w, sig),
                    fmt_sig(sample.re_g, sig),
                    fmt_sig(sample.im_g, sig),
                    sample.holds,
                    fmt_sig(sample.margin, sig),
                    desc
                ));
            }
            Ok(out)
        }
    }
}

fn disk_overlays(sigmas: &[f64], sig: usize) -> Vec<CircleOverlay> {
    sigmas
        .iter()
        .filter(|&&s| s != 0.0)
        .map(|&s| {
            let c = 1.0 / (2.0 * s);
            CircleOverlay {
                name: format!("pd_region_sigma_{}", fmt_sig(s, sig)),
                center: Complex64::new(c, 0.0),
                radius: c.abs(),
                complement: s < 0.0,
            }
        })
        .collect()
}

/// Sampled circle boundary as a CSV curve.
fn circle_curve(o: &CircleOverlay) -> Curve {
    let rows = (0..=256)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            let p = o.center + Complex64::from_polar(o.radius, th);
            (th, p.re, p.im, None)
        })
        .collect();
    Curve {
        name: o.name.clone(),
        rows,
    }
}

#[derive(Serialize)]
struct JsonPoint {
    w: f64,
    re: f64,
    im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<f64>,
}

fn plot_json(curves: &[Curve]) -> String {
    let mut map = serde_json::Map::new();
    for c in curves {
        let pts: Vec<JsonPoint> = c
            .rows
            .iter()
            .map(|&(w, re, im, extra)| JsonPoint { w, re, im, extra })
            .collect();
        map.insert(c.name.clone(), serde_json::to_value(pts).unwrap());
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).unwrap() + "\n"
}
