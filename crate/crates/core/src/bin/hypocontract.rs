use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hypocontract::error::{Error, Result};
use hypocontract::report::Outcome;
use hypocontract::report::{
    curve_to_csv, run_analyze, run_curve, run_sweep, sweep_to_csv, to_fixed_json, write_atomic,
    AnalyzeOptions, CurveMode,
};
use hypocontract::{DecayFit, MatrixDocument, OperatorMatrix, ThetaScheme};

#[derive(Parser)]
#[command(
    name = "hypocontract",
    version,
    about = "Hypocoercivity and theta-method contractivity certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Continuous,
    Discrete,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: dissipativity, hypocoercivity, indices, per-scheme contractivity, step-size windows.
    Analyze {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated theta values.
        #[arg(long, default_value = "0,0.5,1")]
        theta: String,
        /// Comma-separated list or log range lo:hi:n.
        #[arg(long, default_value = "1")]
        tau: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Contractivity of one theta-scheme over a log-spaced tau range.
    Sweep {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        theta: f64,
        /// Log range lo:hi:n.
        #[arg(long)]
        tau: String,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Norm curve of e^(-Bt) (continuous) or of D^k (discrete).
    Curve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "continuous")]
        mode: Mode,
        /// Log time grid lo:hi:n for continuous mode.
        #[arg(long, default_value = "1e-4:1e-2:50")]
        grid: String,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad {what} value {t:?}: {e}")))
        })
        .collect()
}

fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidArgument(format!("expected lo:hi:n, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].trim().parse().map_err(|_| bad())?;
    let hi = parts[1].trim().parse().map_err(|_| bad())?;
    let n = parts[2].trim().parse().map_err(|_| bad())?;
    Ok((lo, hi, n))
}

fn parse_taus(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        let (lo, hi, n) = parse_range(s)?;
        hypocontract::log_spaced(lo, hi, n)
    } else {
        parse_list(s, "tau")
    }
}

fn read_document(path: &Path) -> Result<MatrixDocument> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    MatrixDocument::parse(&bytes)
}

fn read_matrix(path: &Path) -> Result<OperatorMatrix> {
    read_document(path)?.to_operator()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            matrix,
            theta,
            tau,
            tol,
            cap,
            out,
            format,
        } => {
            let doc = read_document(&matrix)?;
            let b = doc.to_operator()?;
            let opts = AnalyzeOptions {
                thetas: parse_list(&theta, "theta")?,
                taus: parse_taus(&tau)?,
                tol,
                cap,
                label: doc.label,
            };
            let report = run_analyze(&b, &opts)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            emit(out.as_deref(), &text)?;
            let errors = report.scheme_errors();
            let code = if errors.is_empty() {
                0
            } else if errors.iter().any(|e| e.class == "numerical") {
                4
            } else if errors.iter().all(|e| e.class == "scheme_inapplicable") {
                3
            } else {
                2
            };
            Ok(code)
        }
        Command::Sweep {
            matrix,
            theta,
            tau,
            tol,
            out,
            format,
        } => {
            let b = read_matrix(&matrix)?;
            let rows = run_sweep(&b, theta, parse_range(&tau)?, tol)?;
            let text = match format {
                Format::Json => to_fixed_json(&rows),
                Format::Csv => sweep_to_csv(&rows),
            };
            write_atomic(&out, &text)?;
            let inapplicable = rows
                .iter()
                .filter_map(|r| r.result.error())
                .filter(|e| e.class == "scheme_inapplicable")
                .count();
            Ok(if inapplicable > 0 { 3 } else { 0 })
        }
        Command::Curve {
            matrix,
            mode,
            grid,
            theta,
            tau,
            k_max,
            out,
            format,
        } => {
            let b = read_matrix(&matrix)?;
            let mode = match mode {
                Mode::Continuous => CurveMode::Continuous {
                    grid: parse_range(&grid)?,
                },
                Mode::Discrete => {
                    let (Some(theta), Some(tau)) = (theta, tau) else {
                        return Err(Error::InvalidArgument(
                            "discrete mode needs --theta and --tau".into(),
                        ));
                    };
                    CurveMode::Discrete {
                        scheme: ThetaScheme::new(theta, tau)?,
                        k_max,
                    }
                }
            };
            let output = run_curve(&b, mode)?;
            match format {
                Format::Json => write_atomic(&out, &to_fixed_json(&output))?,
                Format::Csv => {
                    write_atomic(&out, &curve_to_csv(&output))?;
                    #[derive(serde::Serialize)]
                    struct Summary<'a> {
                        fit: &'a Option<Outcome<DecayFit>>,
                        first_contraction_index: &'a Option<Option<usize>>,
                    }
                    print!(
                        "{}",
                        to_fixed_json(&Summary {
                            fit: &output.fit,
                            first_contraction_index: &output.first_contraction_index,
                        })
                    );
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
