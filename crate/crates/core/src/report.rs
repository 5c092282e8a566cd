//! Analysis reports and their deterministic serialization.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::coercivity::{
    coercivity_bounds, hc_index, is_hypocoercive, is_semi_dissipative,
    spectral_abscissa_decay_rate, CoercivityBounds, IndexResult, SpectralWitness,
};
use crate::decay::{
    discrete_norm_sequence, first_contraction_index, fit_short_time_exponent, log_spaced,
    propagator_norm_curve, CurveKind, DecayFit, NormCurve,
};
use crate::document::MatrixDocument;
use crate::error::{Error, ErrorClass, Result};
use crate::operator::{Definiteness, OperatorMatrix};
use crate::theta::{
    classify_contractivity, dhc_index, is_hypocontractive, max_stepsize, Contractivity,
    ContractivityClass, StepSizeWindow, ThetaScheme, DEFAULT_CONTRACTIVITY_TOL,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Slack for ‖Dʲ‖ against 1 when locating the first contraction.
pub const PLATEAU_TOL: f64 = 1e-9;

/// Pretty JSON with every float written at 17 significant digits.
pub struct FixedPrecisionFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedPrecisionFormatter<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for FixedPrecisionFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_float(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{}", format_float(f64::from(value)))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_fixed_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, FixedPrecisionFormatter::default());
    value
        .serialize(&mut ser)
        .expect("report serialization is infallible");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub class: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        let class = match e.class() {
            ErrorClass::Input => "input",
            ErrorClass::SchemeInapplicable => "scheme_inapplicable",
            ErrorClass::Numerical => "numerical",
        };
        Self {
            class,
            message: e.to_string(),
        }
    }
}

/// Per-entry result; failures are recorded instead of aborting the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Error(ErrorRecord),
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Error(ErrorRecord::from(&e)),
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&ErrorRecord> {
        match self {
            Outcome::Ok(_) => None,
            Outcome::Error(e) => Some(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// `None` means the relative default `max(dim, 4)·ε·‖H‖` per matrix.
    pub hermitian: Option<f64>,
    pub contractivity: f64,
    pub spectral: f64,
    pub plateau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiDissipativeEntry {
    pub value: bool,
    pub min_eigenvalue: f64,
    pub classification: Definiteness,
    pub tolerance_used: f64,
    pub marginal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeAnalysis {
    pub contractivity: ContractivityClass,
    pub hypocontractive: bool,
    pub dhc_index: Outcome<IndexResult>,
    /// Smallest j with ‖Dʲ‖ < 1 − plateau tolerance, searched up to dim + 1.
    pub first_contraction_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeEntry {
    pub theta: f64,
    pub tau: f64,
    pub result: Outcome<SchemeAnalysis>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEntry {
    pub theta: f64,
    pub window: Outcome<StepSizeWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub input: MatrixDocument,
    pub tolerances: Tolerances,
    pub semi_dissipative: SemiDissipativeEntry,
    pub hypocoercive: SpectralWitness,
    pub decay_rate: f64,
    pub coercivity_bounds: Outcome<CoercivityBounds>,
    pub hc_index: Outcome<IndexResult>,
    pub schemes: Vec<SchemeEntry>,
    pub step_size_windows: Vec<WindowEntry>,
    /// Any entry carries a marginal flag.
    pub marginal: bool,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        to_fixed_json(self)
    }

    /// Schemes that could not be analyzed at all.
    pub fn scheme_errors(&self) -> Vec<&ErrorRecord> {
        self.schemes
            .iter()
            .filter_map(|s| s.result.error())
            .collect()
    }

    /// One row per scheme.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "theta",
            "tau",
            "class",
            "norm_D",
            "form_min_eigenvalue",
            "hypocontractive",
            "dhc_index",
            "first_contraction_index",
            "marginal",
            "error",
        ])
        .expect("in-memory write");
        for s in &self.schemes {
            let mut row = vec![format_float(s.theta), format_float(s.tau)];
            match &s.result {
                Outcome::Ok(a) => {
                    let dhc = match &a.dhc_index {
                        Outcome::Ok(r) => r.index.map_or("none".to_string(), |m| m.to_string()),
                        Outcome::Error(_) => String::new(),
                    };
                    let marginal =
                        a.contractivity.marginal || a.dhc_index.ok().is_some_and(|r| r.marginal);
                    row.extend([
                        a.contractivity.class.as_str().to_string(),
                        format_float(a.contractivity.norm),
                        format_float(a.contractivity.form_min_eigenvalue),
                        a.hypocontractive.to_string(),
                        dhc,
                        a.first_contraction_index
                            .map_or("none".to_string(), |j| j.to_string()),
                        marginal.to_string(),
                        a.dhc_index
                            .error()
                            .map_or(String::new(), |e| e.message.clone()),
                    ]);
                }
                Outcome::Error(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 7));
                    row.push(e.message.clone());
                }
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv emits UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeOptions {
    pub thetas: Vec<f64>,
    pub taus: Vec<f64>,
    pub tol: Option<f64>,
    pub cap: Option<usize>,
    pub label: Option<String>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            thetas: vec![0.0, 0.5, 1.0],
            taus: vec![1.0],
            tol: None,
            cap: None,
            label: None,
        }
    }
}

fn analyze_scheme(
    b: &OperatorMatrix,
    s: &ThetaScheme,
    opts: &AnalyzeOptions,
    contractivity_tol: f64,
    spectral_tol: f64,
) -> Result<SchemeAnalysis> {
    let contractivity = classify_contractivity(b, s, Some(contractivity_tol))?;
    let hypocontractive = is_hypocontractive(b, s, Some(spectral_tol))?;
    let dhc = if contractivity.class.is_semi_contractive() {
        Outcome::from_result(dhc_index(b, s, opts.tol, opts.cap))
    } else {
        Outcome::Error(ErrorRecord::from(&Error::NotSemiContractive {
            norm: contractivity.norm,
        }))
    };
    let curve = discrete_norm_sequence(b, s, b.dim() + 1)?;
    Ok(SchemeAnalysis {
        contractivity,
        hypocontractive,
        dhc_index: dhc,
        first_contraction_index: first_contraction_index(&curve, PLATEAU_TOL)?,
    })
}

fn window_for(
    b: &OperatorMatrix,
    theta: f64,
    tol: Option<f64>,
    semi_dissipative: bool,
) -> Result<StepSizeWindow> {
    if theta < 0.5 {
        max_stepsize(b, theta, tol)
    } else if semi_dissipative {
        // 2τB_H + τ²(2θ−1)B*B ⪰ 0 for every τ once B_H ⪰ 0 and θ ≥ ½.
        Ok(StepSizeWindow::AllTau)
    } else {
        Err(Error::InvalidArgument(format!(
            "no step-size window characterization for theta = {theta} when B is not semi-dissipative"
        )))
    }
}

/// Finite entries can still have a norm beyond f64 range; every
/// tolerance is scaled by it, so nothing downstream is meaningful.
fn ensure_finite_norm(b: &OperatorMatrix) -> Result<()> {
    if b.spectral_norm().is_finite() {
        Ok(())
    } else {
        Err(Error::Overflow)
    }
}

/// Runs every check on `b` for each (θ, τ) pair in `opts`.
pub fn run_analyze(b: &OperatorMatrix, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    ensure_finite_norm(b)?;
    if opts.thetas.is_empty() || opts.taus.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one theta and one tau".into(),
        ));
    }
    let contractivity_tol = opts.tol.unwrap_or(DEFAULT_CONTRACTIVITY_TOL);
    let spectral_tol = crate::coercivity::default_spectral_tolerance(b.spectral_norm());

    let sd = is_semi_dissipative(b, opts.tol)?;
    let hypocoercive = is_hypocoercive(b, Some(spectral_tol))?;
    let decay_rate = spectral_abscissa_decay_rate(b)?;
    let bounds = Outcome::from_result(coercivity_bounds(b));
    let hc = Outcome::from_result(hc_index(b, opts.tol, opts.cap));

    let mut schemes = Vec::with_capacity(opts.thetas.len() * opts.taus.len());
    for &theta in &opts.thetas {
        for &tau in &opts.taus {
            let result = ThetaScheme::new(theta, tau)
                .and_then(|s| analyze_scheme(b, &s, opts, contractivity_tol, spectral_tol));
            schemes.push(SchemeEntry {
                theta,
                tau,
                result: Outcome::from_result(result),
            });
        }
    }

    let step_size_windows = opts
        .thetas
        .iter()
        .map(|&theta| WindowEntry {
            theta,
            window: Outcome::from_result(window_for(b, theta, opts.tol, sd.semi_dissipative)),
        })
        .collect();

    let scheme_marginal = schemes
        .iter()
        .filter_map(|s| s.result.ok())
        .any(|a| a.contractivity.marginal || a.dhc_index.ok().is_some_and(|r| r.marginal));
    let marginal = sd.certificate.marginal
        || hypocoercive.marginal
        || hc.ok().is_some_and(|r| r.marginal)
        || scheme_marginal;

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo {
            name: TOOL_NAME,
            version: TOOL_VERSION,
        },
        input: MatrixDocument::from_operator(b, opts.label.clone()),
        tolerances: Tolerances {
            hermitian: opts.tol,
            contractivity: contractivity_tol,
            spectral: spectral_tol,
            plateau: PLATEAU_TOL,
        },
        semi_dissipative: SemiDissipativeEntry {
            value: sd.semi_dissipative,
            min_eigenvalue: sd.certificate.min_eigenvalue,
            classification: sd.certificate.classification,
            tolerance_used: sd.certificate.tolerance_used,
            marginal: sd.certificate.marginal,
        },
        hypocoercive,
        decay_rate,
        coercivity_bounds: bounds,
        hc_index: hc,
        schemes,
        step_size_windows,
        marginal,
    })
}

/// Contractivity row of a τ-sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub result: Outcome<ContractivityClass>,
}

/// Classifies the scheme on `n` log-spaced step sizes in [lo, hi].
pub fn run_sweep(
    b: &OperatorMatrix,
    theta: f64,
    range: (f64, f64, usize),
    tol: Option<f64>,
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    ensure_finite_norm(b)?;
    let (lo, hi, n) = range;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidScheme { theta, tau: lo });
    }
    let grid = crate::decay::log_spaced(lo, hi, n)?;
    Ok(grid
        .par_iter()
        .map(|&tau| SweepRow {
            tau,
            result: Outcome::from_result(
                ThetaScheme::new(theta, tau).and_then(|s| classify_contractivity(b, &s, tol)),
            ),
        })
        .collect())
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau", "norm_D", "class", "form_min_eigenvalue"])
        .expect("in-memory write");
    for row in rows {
        let record = match &row.result {
            Outcome::Ok(c) => [
                format_float(row.tau),
                format_float(c.norm),
                c.class.as_str().to_string(),
                format_float(c.form_min_eigenvalue),
            ],
            Outcome::Error(e) => [
                format_float(row.tau),
                String::new(),
                e.class.to_string(),
                String::new(),
            ],
        };
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv emits UTF-8")
}

/// Number of sweep rows whose class is `class`.
pub fn count_class(rows: &[SweepRow], class: Contractivity) -> usize {
    rows.iter()
        .filter(|r| r.result.ok().is_some_and(|c| c.class == class))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveMode {
    /// ‖e^{−Bt}‖ on a log-spaced grid (lo, hi, n).
    Continuous { grid: (f64, f64, usize) },
    /// ‖Dʲ‖ for j = 0..=k_max.
    Discrete { scheme: ThetaScheme, k_max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveOutput {
    pub curve: NormCurve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<Outcome<DecayFit>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_contraction_index: Option<Option<usize>>,
}

/// Norm curve plus the exponent fit (continuous) or first contraction index
/// (discrete). A flow without decay yields a recorded fit error, not a
/// failure.
pub fn run_curve(b: &OperatorMatrix, mode: CurveMode) -> Result<CurveOutput> {
    ensure_finite_norm(b)?;
    match mode {
        CurveMode::Continuous { grid: (lo, hi, n) } => {
            let grid = log_spaced(lo, hi, n)?;
            let curve = propagator_norm_curve(b, &grid)?;
            let fit = Outcome::from_result(fit_short_time_exponent(&curve));
            Ok(CurveOutput {
                curve,
                fit: Some(fit),
                first_contraction_index: None,
            })
        }
        CurveMode::Discrete { scheme, k_max } => {
            let curve = discrete_norm_sequence(b, &scheme, k_max)?;
            let first = first_contraction_index(&curve, PLATEAU_TOL)?;
            Ok(CurveOutput {
                curve,
                fit: None,
                first_contraction_index: Some(first),
            })
        }
    }
}

pub fn curve_to_csv(out: &CurveOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let x = match out.curve.kind {
        CurveKind::Continuous => "t",
        CurveKind::Discrete => "k",
    };
    w.write_record([x, "norm"]).expect("in-memory write");
    for (a, v) in out.curve.abscissae.iter().zip(&out.curve.values) {
        let a = match out.curve.kind {
            CurveKind::Continuous => format_float(*a),
            CurveKind::Discrete => format!("{a}"),
        };
        w.write_record([a, format_float(*v)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv emits UTF-8")
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io_err = |e: &dyn std::fmt::Display| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_err(&e))?;
    tmp.persist(path).map_err(|e| io_err(&e.error))?;
    Ok(())
}
