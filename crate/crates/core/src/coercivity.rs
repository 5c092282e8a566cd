//! Continuous-time side: semi-dissipativity, hypocoercivity, the
//! hypocoercivity index and the coercivity bounds of B*B.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    classify_hermitian, default_tolerance, hermitian_part, invert, symmetrize,
    HermitianCertificate, OperatorMatrix,
};

/// Default slack for spectral (eigenvalue location) decisions, relative to
/// `max(1, ‖B‖)`.
pub fn default_spectral_tolerance(norm: f64) -> f64 {
    f64::EPSILON.sqrt() * norm.max(1.0)
}

/// Outcome of an index search over the partial sums of a positive
/// semidefinite series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexResult {
    /// Smallest `m ≤ search_cap` whose partial sum is coercive.
    pub index: Option<usize>,
    /// Min eigenvalue of the certifying partial sum.
    pub witness_kappa: Option<f64>,
    pub search_cap: usize,
    pub partial_min_eigenvalues: Vec<f64>,
    /// Tolerance applied to each partial sum.
    pub tolerances: Vec<f64>,
    #[serde(skip)]
    pub certifying_sum: Option<OperatorMatrix>,
    pub marginal: bool,
}

impl IndexResult {
    pub fn is_finite(&self) -> bool {
        self.index.is_some()
    }
}

/// Accumulates `term(0) + term(1) + ...` and stops at the first coercive
/// partial sum or after `cap`.
///
/// `term(j)` also returns the magnitude of the quantities it was computed
/// from. Rounding in a term scales with that, not with the term itself, so
/// the default tolerance uses the larger of the two.
pub(crate) fn index_search<F>(
    dim: usize,
    cap: usize,
    tol: Option<f64>,
    mut term: F,
) -> Result<IndexResult>
where
    F: FnMut(usize) -> (DMatrix<Complex64>, f64),
{
    let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
    let mut magnitude = 0.0;
    let mut partial_min_eigenvalues = Vec::with_capacity(cap + 1);
    let mut tolerances = Vec::with_capacity(cap + 1);
    for j in 0..=cap {
        let (t, m) = term(j);
        sum += t;
        magnitude += m;
        sum = symmetrize(&sum);
        let partial = OperatorMatrix::wrap(sum.clone());
        let tolerance =
            tol.unwrap_or_else(|| default_tolerance(dim, partial.spectral_norm().max(magnitude)));
        if !tolerance.is_finite() {
            return Err(Error::Overflow);
        }
        let cert = classify_hermitian(&partial, Some(tolerance))?;
        partial_min_eigenvalues.push(cert.min_eigenvalue);
        tolerances.push(tolerance);
        if cert.is_coercive() {
            return Ok(IndexResult {
                index: Some(j),
                witness_kappa: Some(cert.min_eigenvalue),
                search_cap: cap,
                partial_min_eigenvalues,
                tolerances,
                certifying_sum: Some(cert.matrix),
                marginal: cert.marginal,
            });
        }
    }
    let last = partial_min_eigenvalues.last().copied().unwrap_or(0.0);
    let last_tol = tolerances.last().copied().unwrap_or(0.0);
    Ok(IndexResult {
        index: None,
        witness_kappa: None,
        search_cap: cap,
        partial_min_eigenvalues,
        tolerances,
        certifying_sum: None,
        marginal: last_tol > 0.0 && last >= last_tol / 10.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiDissipativity {
    pub semi_dissipative: bool,
    pub certificate: HermitianCertificate,
}

/// Checks B_H ⪰ 0. The default tolerance scales with ‖B‖, since that is
/// the size of the rounding left in B_H.
pub fn is_semi_dissipative(b: &OperatorMatrix, tol: Option<f64>) -> Result<SemiDissipativity> {
    let tol = tol.unwrap_or_else(|| default_tolerance(b.dim(), b.spectral_norm()));
    let certificate = classify_hermitian(&hermitian_part(b), Some(tol))?;
    Ok(SemiDissipativity {
        semi_dissipative: certificate.is_positive_semidefinite(),
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralWitness {
    pub hypocoercive: bool,
    /// min Re σ(B)
    pub min_real_part: f64,
    pub tolerance: f64,
    pub marginal: bool,
}

/// σ(−B) lies in the open left half-plane, i.e. every eigenvalue of B has
/// real part above `tol`.
pub fn is_hypocoercive(b: &OperatorMatrix, tol: Option<f64>) -> Result<SpectralWitness> {
    let tolerance = tol.unwrap_or_else(|| default_spectral_tolerance(b.spectral_norm()));
    let min_real_part = spectral_abscissa_decay_rate(b)?;
    let hypocoercive = min_real_part > tolerance;
    Ok(SpectralWitness {
        hypocoercive,
        min_real_part,
        tolerance,
        marginal: (tolerance / 10.0..=10.0 * tolerance).contains(&min_real_part.abs()),
    })
}

/// min Re σ(B): the sharp exponential decay rate of e^{−Bt}.
pub fn spectral_abscissa_decay_rate(b: &OperatorMatrix) -> Result<f64> {
    Ok(b.spectrum()?
        .iter()
        .map(|z| z.re)
        .fold(f64::INFINITY, f64::min))
}

/// Hypocoercivity index: smallest m with Σ_{j≤m} (B*)ʲ B_H Bʲ coercive.
///
/// `cap = None` searches up to `dim − 1`. Fails when B is not semi-dissipative.
pub fn hc_index(b: &OperatorMatrix, tol: Option<f64>, cap: Option<usize>) -> Result<IndexResult> {
    let sd = is_semi_dissipative(b, tol)?;
    if !sd.semi_dissipative {
        return Err(Error::NotSemiDissipative {
            min_eigenvalue: sd.certificate.min_eigenvalue,
        });
    }
    let n = b.dim();
    let cap = cap.unwrap_or(n - 1);
    let bh = sd.certificate.matrix.into_matrix();
    let bm = b.as_matrix();
    let norm = b.spectral_norm();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    index_search(n, cap, tol, |j| {
        if j > 0 {
            power = bm * &power;
        }
        (power.adjoint() * &bh * &power, norm.powi(2 * j as i32 + 1))
    })
}

/// λI ⪰ B*B ⪰ μI with μ = λ_min(B*B), λ = ‖B‖².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityBounds {
    pub mu: f64,
    pub lambda_upper: f64,
    /// ‖B⁻¹‖⁻², the constructive lower bound.
    pub inverse_norm_bound: f64,
}

pub fn coercivity_bounds(b: &OperatorMatrix) -> Result<CoercivityBounds> {
    let inv = invert(b)?;
    let gram = b.adjoint().matmul(b);
    let cert = classify_hermitian(&gram, None)?;
    let inverse_norm_bound = inv.spectral_norm().powi(-2);
    let mu = cert.min_eigenvalue;
    let lambda_upper = cert.max_eigenvalue;
    let slack = 1e-8 * lambda_upper.max(1.0);
    if !(mu > 0.0 && mu >= inverse_norm_bound - slack && lambda_upper >= mu) {
        return Err(Error::Verification(format!(
            "B*B bounds inconsistent: mu = {mu:e}, lambda = {lambda_upper:e}, ||B^-1||^-2 = {inverse_norm_bound:e}"
        )));
    }
    Ok(CoercivityBounds {
        mu,
        lambda_upper,
        inverse_norm_bound,
    })
}
