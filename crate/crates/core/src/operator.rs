//! Dense complex operator matrices and the Hermitian/spectral primitives the
//! analysis modules are built on.
//!
//! Every matrix is stored complex even when the input is real. Values are
//! immutable after construction; the spectrum and spectral norm are computed
//! lazily and cached, so an [`OperatorMatrix`] can be shared across threads.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest accepted dimension.
pub const MAX_DIM: usize = 512;

/// Residual bound ‖A·A⁻¹ − I‖ accepted by [`invert`].
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER_PER_DIM: usize = 10_000;

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    spectrum: OnceLock<Vec<Complex64>>,
    norm: OnceLock<f64>,
}

impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl OperatorMatrix {
    /// Wraps a complex matrix after checking shape and finiteness.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyMatrix);
        }
        if rows > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                dim: rows,
                max: MAX_DIM,
            });
        }
        for col in 0..cols {
            for row in 0..rows {
                let z = entries[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self::wrap(entries))
    }

    pub(crate) fn wrap(entries: DMatrix<Complex64>) -> Self {
        Self {
            entries,
            spectrum: OnceLock::new(),
            norm: OnceLock::new(),
        }
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds a matrix from row-major real entries (embedded with zero
    /// imaginary part).
    pub fn from_real_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_row_slice(dim, &complex)
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_real_row_slice(N, &flat).expect("real rows must be finite")
    }

    pub fn identity(dim: usize) -> Self {
        Self::wrap(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::wrap(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            for col in 0..n {
                out.push(self.entries[(row, col)]);
            }
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.entries.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::wrap(self.entries.map(|z| z * factor))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::wrap(&self.entries * &other.entries)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::wrap(&self.entries + &other.entries)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::wrap(&self.entries - &other.entries)
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(&self.entries * x)
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// All eigenvalues with algebraic multiplicity (cached).
    pub fn spectrum(&self) -> Result<&[Complex64]> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let computed = compute_spectrum(&self.entries)?;
        Ok(self.spectrum.get_or_init(|| computed))
    }

    /// Largest singular value (cached).
    pub fn spectral_norm(&self) -> f64 {
        *self
            .norm
            .get_or_init(|| largest_singular_value(&self.entries))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .spectrum()?
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm())))
    }
}

fn compute_spectrum(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Overflow);
    }
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let peak = m
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    // Eigenvalues scale linearly; working at unit size keeps the QR sweeps in range.
    let schur = Schur::try_new(m.unscale(peak), f64::EPSILON, SCHUR_MAX_ITER_PER_DIM * n)
        .ok_or(Error::EigenSolverFailed)?;
    // The complex Schur form is upper triangular.
    let eig = schur.eigenvalues().ok_or(Error::EigenSolverFailed)?;
    let eig: Vec<Complex64> = eig.iter().map(|z| z * peak).collect();
    if eig.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Overflow);
    }
    Ok(eig)
}

fn largest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.iter().any(|z| z.re.is_nan() || z.im.is_nan()) {
        return f64::NAN;
    }
    let peak = m
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if peak == 0.0 || peak.is_infinite() {
        return peak;
    }
    // Scaling keeps the internal squares in range for entries near f64::MAX.
    let svd = SVD::try_new(m.unscale(peak), false, false, f64::EPSILON, 0)
        .expect("SVD with unbounded iterations converges");
    svd.singular_values.max() * peak
}

/// Hermitian part (A + A*)/2, symmetrized so the result is exactly Hermitian.
pub fn hermitian_part(a: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::wrap(symmetrize(a.as_matrix()))
}

pub(crate) fn symmetrize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

pub fn spectrum(a: &OperatorMatrix) -> Result<Vec<Complex64>> {
    a.spectrum().map(<[Complex64]>::to_vec)
}

pub fn spectral_norm(a: &OperatorMatrix) -> f64 {
    a.spectral_norm()
}

/// Closed-form spectral norm of a real 2×2 matrix [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm2x2 {
    /// a² + b² + c² + d²
    pub g: f64,
    /// (ad − bc)²
    pub h: f64,
    /// g² − 4h, evaluated as ((a−d)² + (b+c)²)·((a+d)² + (b−c)²) so that it
    /// keeps full relative accuracy when g² ≈ 4h.
    pub discriminant: f64,
    pub norm: f64,
}

impl ClosedForm2x2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        let g = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        let h = det * det;
        let discriminant =
            ((a - d).powi(2) + (b + c).powi(2)) * ((a + d).powi(2) + (b - c).powi(2));
        let norm = ((g + discriminant.sqrt()) / 2.0).sqrt();
        Self {
            g,
            h,
            discriminant,
            norm,
        }
    }

    /// Same as [`ClosedForm2x2::new`] for a real 2×2 operator, `None` otherwise.
    pub fn of(a: &OperatorMatrix) -> Option<Self> {
        if a.dim() != 2 || !a.is_real() {
            return None;
        }
        Some(Self::new(
            a.get(0, 0).re,
            a.get(0, 1).re,
            a.get(1, 0).re,
            a.get(1, 1).re,
        ))
    }
}

/// Default slack for semidefiniteness decisions on `h`:
/// `max(dim, 4) · ε · ‖h‖`.
pub fn default_tolerance(dim: usize, norm: f64) -> f64 {
    dim.max(4) as f64 * f64::EPSILON * norm
}

/// Positivity class of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Coercive,
    PositiveSemidefinite,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianCertificate {
    pub matrix: OperatorMatrix,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub classification: Definiteness,
    pub tolerance_used: f64,
    /// The deciding eigenvalue sits within 10× the tolerance of zero.
    pub marginal: bool,
}

impl HermitianCertificate {
    pub fn is_coercive(&self) -> bool {
        self.classification == Definiteness::Coercive
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.classification != Definiteness::Indefinite
    }
}

/// Classifies the Hermitian matrix `h` as coercive, positive semidefinite or
/// indefinite. `tol = None` uses [`default_tolerance`].
pub fn classify_hermitian(h: &OperatorMatrix, tol: Option<f64>) -> Result<HermitianCertificate> {
    if !h.is_finite() {
        return Err(Error::Overflow);
    }
    let tolerance = match tol {
        Some(t) if t.is_finite() && t >= 0.0 => t,
        Some(t) => {
            return Err(Error::InvalidArgument(format!(
                "tolerance {t} must be >= 0"
            )))
        }
        None => default_tolerance(h.dim(), h.spectral_norm()),
    };
    let m = h.as_matrix();
    let deviation = (m - m.adjoint())
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if deviation > tolerance.max(f64::EPSILON * h.spectral_norm()) {
        return Err(Error::NotHermitian {
            deviation,
            tolerance,
        });
    }
    let sym = symmetrize(m);
    let eig = hermitian_eigenvalues(&sym);
    let min_eigenvalue = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let classification = if min_eigenvalue > tolerance {
        Definiteness::Coercive
    } else if min_eigenvalue >= -tolerance {
        Definiteness::PositiveSemidefinite
    } else {
        Definiteness::Indefinite
    };
    let band = 10.0 * tolerance;
    let marginal = match classification {
        Definiteness::Coercive => min_eigenvalue <= band,
        Definiteness::PositiveSemidefinite => false,
        Definiteness::Indefinite => min_eigenvalue >= -band,
    };
    Ok(HermitianCertificate {
        matrix: OperatorMatrix::wrap(sym),
        min_eigenvalue,
        max_eigenvalue,
        classification,
        tolerance_used: tolerance,
        marginal,
    })
}

pub(crate) fn hermitian_eigenvalues(sym: &DMatrix<Complex64>) -> Vec<f64> {
    if sym.nrows() == 1 {
        return vec![sym[(0, 0)].re];
    }
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// exp(A) by scaling and squaring with a Padé approximant.
pub fn matrix_exponential(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    let e = a.as_matrix().exp();
    let out = OperatorMatrix::wrap(e);
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Overflow)
    }
}

/// A⁻¹, rejected when LU breaks down or the residual exceeds
/// [`INVERSE_RESIDUAL_TOL`].
pub fn invert(a: &OperatorMatrix) -> Result<OperatorMatrix> {
    invert_with_tolerance(a, INVERSE_RESIDUAL_TOL)
}

pub fn invert_with_tolerance(a: &OperatorMatrix, residual_tol: f64) -> Result<OperatorMatrix> {
    let m = a.as_matrix();
    let inv = m.clone().lu().try_inverse().ok_or(Error::NotInvertible {
        residual: f64::INFINITY,
    })?;
    let n = a.dim();
    let residual = (m * &inv - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if !residual.is_finite() || residual > residual_tol {
        return Err(Error::NotInvertible { residual });
    }
    Ok(OperatorMatrix::wrap(inv))
}

/// Principal square root of a Hermitian positive semidefinite matrix, via its
/// eigendecomposition.
pub fn hermitian_sqrt(h: &OperatorMatrix) -> Result<OperatorMatrix> {
    let cert = classify_hermitian(h, None)?;
    if !cert.is_positive_semidefinite() {
        return Err(Error::InvalidArgument(format!(
            "square root needs a positive semidefinite matrix (min eigenvalue {:e})",
            cert.min_eigenvalue
        )));
    }
    let eig = SymmetricEigen::new(cert.matrix.into_matrix());
    let roots = eig
        .eigenvalues
        .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.adjoint();
    Ok(OperatorMatrix::wrap(symmetrize(&root)))
}

/// Lower-triangular Cholesky factor L with h = L·L*.
pub fn cholesky_factor(h: &OperatorMatrix) -> Result<OperatorMatrix> {
    let sym = symmetrize(h.as_matrix());
    let chol = sym.cholesky().ok_or(Error::NotInvertible {
        residual: f64::INFINITY,
    })?;
    Ok(OperatorMatrix::wrap(chol.unpack()))
}
