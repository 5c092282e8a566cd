//! Norm curves of the continuous propagator e^{−Bt} and of the discrete powers
//! Dᵏ, the short-time exponent fit, and trajectories of both evolutions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coercivity::IndexResult;
use crate::error::{Error, Result};
use crate::operator::{matrix_exponential, OperatorMatrix};
use crate::theta::{theta_operator, ThetaScheme};

/// Default short-time fit window.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e-4, 1e-2);
pub const DEFAULT_FIT_POINTS: usize = 50;

/// Powers up to this exponent are built by repeated multiplication; larger
/// ones by binary exponentiation from D.
const REPEATED_PRODUCT_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCurve {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub a_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub fit_window: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub abscissae: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
}

impl Trajectory {
    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|x| x.norm()).collect()
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "log grid needs 0 < lo < hi and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + step * i as f64).exp(),
        })
        .collect())
}

fn check_increasing_positive(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if !grid.iter().all(|t| *t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(
            "time grid must be positive and finite".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "time grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// ‖e^{−Bt}‖ on each grid point.
pub fn propagator_norm_curve(b: &OperatorMatrix, t_grid: &[f64]) -> Result<NormCurve> {
    check_increasing_positive(t_grid)?;
    let values = t_grid
        .par_iter()
        .map(|&t| matrix_exponential(&b.scale(-t)).map(|p| p.spectral_norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormCurve {
        abscissae: t_grid.to_vec(),
        values,
        kind: CurveKind::Continuous,
    })
}

/// Least-squares fit of log(1 − ‖e^{−Bt}‖) = log c + a·log t over the whole
/// curve.
pub fn fit_short_time_exponent(curve: &NormCurve) -> Result<DecayFit> {
    if curve.kind != CurveKind::Continuous {
        return Err(Error::InvalidArgument(
            "exponent fit needs a continuous curve".into(),
        ));
    }
    if curve.abscissae.len() < 2 {
        return Err(Error::InvalidArgument(
            "exponent fit needs at least two points".into(),
        ));
    }
    // Below this the gap 1 − ‖·‖ is indistinguishable from rounding.
    let noise = 4.0 * f64::EPSILON;
    if curve.values.iter().any(|v| 1.0 - v <= noise) {
        return Err(Error::NoDecayDetected);
    }
    let xs: Vec<f64> = curve.abscissae.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = curve.values.iter().map(|v| (1.0 - v).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        a_hat: slope,
        c_hat: intercept.exp(),
        r_squared,
        fit_window: (curve.abscissae[0], *curve.abscissae.last().unwrap()),
    })
}

/// Fit on the default window with the default number of log-spaced points.
pub fn short_time_exponent(b: &OperatorMatrix) -> Result<DecayFit> {
    let grid = log_spaced(
        DEFAULT_FIT_WINDOW.0,
        DEFAULT_FIT_WINDOW.1,
        DEFAULT_FIT_POINTS,
    )?;
    fit_short_time_exponent(&propagator_norm_curve(b, &grid)?)
}

fn matrix_power(d: &DMatrix<Complex64>, mut k: usize) -> DMatrix<Complex64> {
    let n = d.nrows();
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut base = d.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// ‖Dʲ‖ for j = 0..=k_max.
pub fn discrete_norm_sequence(
    b: &OperatorMatrix,
    s: &ThetaScheme,
    k_max: usize,
) -> Result<NormCurve> {
    let d = theta_operator(b, s)?;
    power_norm_sequence(&d, k_max)
}

/// Same as [`discrete_norm_sequence`] for a given iteration matrix.
pub fn power_norm_sequence(d: &OperatorMatrix, k_max: usize) -> Result<NormCurve> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let dm = d.as_matrix();
    let n = d.dim();
    let mut values = Vec::with_capacity(k_max + 1);
    values.push(1.0);
    let mut power = DMatrix::<Complex64>::identity(n, n);
    for j in 1..=k_max {
        let p = if j <= REPEATED_PRODUCT_LIMIT {
            power = dm * &power;
            power.clone()
        } else {
            matrix_power(dm, j)
        };
        let norm = OperatorMatrix::wrap(p).spectral_norm();
        if !norm.is_finite() {
            return Err(Error::Overflow);
        }
        values.push(norm);
    }
    Ok(NormCurve {
        abscissae: (0..=k_max).map(|k| k as f64).collect(),
        values,
        kind: CurveKind::Discrete,
    })
}

/// Smallest j ≥ 1 with ‖Dʲ‖ < 1 − tol.
pub fn first_contraction_index(curve: &NormCurve, tol: f64) -> Result<Option<usize>> {
    if curve.kind != CurveKind::Discrete {
        return Err(Error::InvalidArgument(
            "first contraction index needs a discrete curve".into(),
        ));
    }
    Ok(curve
        .values
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, v)| **v < 1.0 - tol)
        .map(|(j, _)| j))
}

/// The plateau/drop pattern of `curve` matches the index: ‖Dʲ‖ = 1 for
/// 1 ≤ j ≤ m and ‖D^{m+1}‖ < 1, both to `tol`.
pub fn plateau_matches_index(curve: &NormCurve, index: &IndexResult, tol: f64) -> Result<bool> {
    let Some(m) = index.index else {
        return Ok(false);
    };
    if curve.values.len() < m + 2 {
        return Err(Error::InvalidArgument(format!(
            "curve too short: need k_max >= {}",
            m + 1
        )));
    }
    let plateau = curve.values[1..=m].iter().all(|v| (v - 1.0).abs() <= tol);
    Ok(plateau && first_contraction_index(curve, tol)? == Some(m + 1))
}

/// x(t) = e^{−Bt}·x₀ on `t_grid`; t = 0 is prepended when absent.
pub fn evolve_continuous(
    b: &OperatorMatrix,
    x0: &DVector<Complex64>,
    t_grid: &[f64],
) -> Result<Trajectory> {
    if x0.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            actual: x0.len(),
        });
    }
    let mut abscissae = Vec::with_capacity(t_grid.len() + 1);
    if t_grid.first() != Some(&0.0) {
        abscissae.push(0.0);
    }
    abscissae.extend_from_slice(t_grid);
    if !abscissae.iter().all(|t| *t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(
            "times must be finite and nonnegative".into(),
        ));
    }
    let states = abscissae
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(x0.clone())
            } else {
                matrix_exponential(&b.scale(-t))?.apply(x0)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { abscissae, states })
}

/// x_{k+1} = D·x_k for k < k_max.
pub fn evolve_discrete(
    b: &OperatorMatrix,
    s: &ThetaScheme,
    x0: &DVector<Complex64>,
    k_max: usize,
) -> Result<Trajectory> {
    if x0.len() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            actual: x0.len(),
        });
    }
    let d = theta_operator(b, s)?;
    let mut states = Vec::with_capacity(k_max + 1);
    states.push(x0.clone());
    for k in 0..k_max {
        let next = d.apply(&states[k])?;
        states.push(next);
    }
    Ok(Trajectory {
        abscissae: (0..=k_max).map(|k| k as f64).collect(),
        states,
    })
}
