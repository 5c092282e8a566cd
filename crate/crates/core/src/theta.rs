//! Discrete-time side: the θ-method iteration matrix D = M_{θ,τ}(−B), its
//! contractivity class, hypocontractivity index, and the admissible step-size
//! window for θ < ½.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::coercivity::{index_search, is_hypocoercive, IndexResult};
use crate::error::{Error, Result};
use crate::operator::{
    cholesky_factor, classify_hermitian, hermitian_part, hermitian_sqrt, invert, symmetrize,
    Definiteness, OperatorMatrix,
};

/// Default slack on ‖D‖ against 1.
pub const DEFAULT_CONTRACTIVITY_TOL: f64 = 1e-12;

/// Slack used when re-classifying at τ₀ and 1.01·τ₀ in [`max_stepsize`].
pub const STEP_WINDOW_VERIFY_TOL: f64 = 1e-9;

/// Smallest accepted |1 + θτλ| over λ ∈ σ(B), relative to max(1, θτ‖B‖).
const RESOLVENT_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaScheme {
    theta: f64,
    tau: f64,
}

impl ThetaScheme {
    pub fn new(theta: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidScheme { theta, tau });
        }
        Ok(Self { theta, tau })
    }

    pub fn explicit_euler(tau: f64) -> Result<Self> {
        Self::new(0.0, tau)
    }

    pub fn midpoint(tau: f64) -> Result<Self> {
        Self::new(0.5, tau)
    }

    pub fn implicit_euler(tau: f64) -> Result<Self> {
        Self::new(1.0, tau)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Scalar Möbius map z ↦ (1 + (1−θ)τz) / (1 − θτz); `None` at the pole.
    pub fn mobius(&self, z: Complex64) -> Option<Complex64> {
        let den = Complex64::new(1.0, 0.0) - z * (self.theta * self.tau);
        if den == Complex64::new(0.0, 0.0) {
            return None;
        }
        Some((Complex64::new(1.0, 0.0) + z * ((1.0 - self.theta) * self.tau)) / den)
    }
}

fn peak_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max)
}

/// D = (I + τθB)⁻¹ (I − τ(1−θ)B).
pub fn theta_operator(b: &OperatorMatrix, s: &ThetaScheme) -> Result<OperatorMatrix> {
    let n = b.dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let bm = b.as_matrix();
    let rhs = &id - bm * Complex64::new(s.tau * (1.0 - s.theta), 0.0);
    if s.theta == 0.0 {
        return Ok(OperatorMatrix::wrap(rhs));
    }
    let scale = s.theta * s.tau;
    let guard = RESOLVENT_GUARD * (scale * b.spectral_norm()).max(1.0);
    let worst = b
        .spectrum()?
        .iter()
        .copied()
        .min_by(|x, y| {
            let dx = (Complex64::new(1.0, 0.0) + x * scale).norm();
            let dy = (Complex64::new(1.0, 0.0) + y * scale).norm();
            dx.total_cmp(&dy)
        })
        .expect("spectrum is non-empty");
    let inapplicable = Error::SchemeInapplicable {
        theta: s.theta,
        tau: s.tau,
        eigenvalue: worst,
    };
    if (Complex64::new(1.0, 0.0) + worst * scale).norm() <= guard {
        return Err(inapplicable);
    }
    let lhs = &id + bm * Complex64::new(scale, 0.0);
    // Complex division squares its divisor; unit-sized pivots keep that finite.
    let peak = peak_entry(&lhs).max(1.0);
    let d = lhs
        .unscale(peak)
        .lu()
        .solve(&rhs.unscale(peak))
        .ok_or(Error::NotInvertible {
            residual: f64::INFINITY,
        })?;
    let d = OperatorMatrix::wrap(d);
    if !d.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(d)
}

/// −2τ·A_H + τ²(2θ−1)·A*A. Callers pass the generator A = −B.
pub fn contractivity_form(a: &OperatorMatrix, s: &ThetaScheme) -> OperatorMatrix {
    let ah = hermitian_part(a).into_matrix();
    let mut form = ah * Complex64::new(-2.0 * s.tau, 0.0);
    let quad = s.tau * s.tau * (2.0 * s.theta - 1.0);
    if quad != 0.0 {
        let am = a.as_matrix();
        form += am.adjoint() * am * Complex64::new(quad, 0.0);
    }
    OperatorMatrix::wrap(symmetrize(&form))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Contractivity {
    Contractive,
    SemiContractiveNotContractive,
    Expanding,
}

impl Contractivity {
    pub fn is_semi_contractive(self) -> bool {
        self != Contractivity::Expanding
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Contractivity::Contractive => "contractive",
            Contractivity::SemiContractiveNotContractive => "semi_contractive",
            Contractivity::Expanding => "expanding",
        }
    }
}

/// Contractivity of D decided from ‖D‖, cross-checked against the sign of the
/// Hermitian form −2τA_H + τ²(2θ−1)A*A with A = −B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractivityClass {
    pub class: Contractivity,
    /// ‖D‖
    pub norm: f64,
    pub form_min_eigenvalue: f64,
    /// Class implied by the form alone.
    pub form_class: Contractivity,
    pub tolerance: f64,
    pub form_tolerance: f64,
    /// Either route sits within 10× its tolerance of the threshold, or the
    /// two routes disagree.
    pub marginal: bool,
}

pub fn classify_contractivity(
    b: &OperatorMatrix,
    s: &ThetaScheme,
    tol: Option<f64>,
) -> Result<ContractivityClass> {
    let tolerance = tol.unwrap_or(DEFAULT_CONTRACTIVITY_TOL);
    let d = theta_operator(b, s)?;
    let norm = d.spectral_norm();
    let class = if norm < 1.0 - tolerance {
        Contractivity::Contractive
    } else if norm > 1.0 + tolerance {
        Contractivity::Expanding
    } else {
        Contractivity::SemiContractiveNotContractive
    };

    // The form is the congruence (I + θτB)* (I − D*D) (I + θτB), so its
    // slack scales with σ_max(I + θτB)².
    let n = b.dim();
    let resolvent = OperatorMatrix::wrap(
        DMatrix::<Complex64>::identity(n, n) + b.as_matrix() * Complex64::new(s.theta * s.tau, 0.0),
    );
    let form_tolerance = 2.0 * tolerance * resolvent.spectral_norm().powi(2);
    if !form_tolerance.is_finite() {
        return Err(Error::Overflow);
    }
    let form = contractivity_form(&b.scale(-1.0), s);
    let cert = classify_hermitian(&form, Some(form_tolerance))?;
    let form_class = match cert.classification {
        Definiteness::Coercive => Contractivity::Contractive,
        Definiteness::PositiveSemidefinite => Contractivity::SemiContractiveNotContractive,
        Definiteness::Indefinite => Contractivity::Expanding,
    };
    let near = |x: f64, t: f64| x.abs() <= 10.0 * t && x.abs() >= t / 10.0;
    let marginal = class != form_class
        || (class != Contractivity::SemiContractiveNotContractive && near(norm - 1.0, tolerance))
        || (form_class != Contractivity::SemiContractiveNotContractive
            && near(cert.min_eigenvalue, form_tolerance));
    Ok(ContractivityClass {
        class,
        norm,
        form_min_eigenvalue: cert.min_eigenvalue,
        form_class,
        tolerance,
        form_tolerance,
        marginal,
    })
}

/// Spectral radius of D below `1 − tol`.
pub fn is_hypocontractive(b: &OperatorMatrix, s: &ThetaScheme, tol: Option<f64>) -> Result<bool> {
    let d = theta_operator(b, s)?;
    let tolerance = tol.unwrap_or(f64::EPSILON.sqrt());
    Ok(d.spectral_radius()? < 1.0 - tolerance)
}

/// Hypocontractivity index of D = M_{θ,τ}(−B).
///
/// With M = I + θτB the defect is I − D*D = M⁻*·(2τB_H + τ²(2θ−1)B*B)·M⁻¹,
/// which is formed from that product rather than by subtraction so that
/// small defects keep their relative accuracy.
pub fn dhc_index(
    b: &OperatorMatrix,
    s: &ThetaScheme,
    tol: Option<f64>,
    cap: Option<usize>,
) -> Result<IndexResult> {
    let d = theta_operator(b, s)?;
    check_semi_contractive(&d, tol)?;
    let n = b.dim();
    let form = contractivity_form(&b.scale(-1.0), s).into_matrix();
    let id = DMatrix::<Complex64>::identity(n, n);
    let m_inv = if s.theta == 0.0 {
        id
    } else {
        let m = &id + b.as_matrix() * Complex64::new(s.theta * s.tau, 0.0);
        let peak = peak_entry(&m).max(1.0);
        m.unscale(peak)
            .lu()
            .solve(&id)
            .ok_or(Error::NotInvertible {
                residual: f64::INFINITY,
            })?
            .unscale(peak)
    };
    let defect = symmetrize(&(m_inv.adjoint() * form * &m_inv));
    let norm_b = b.spectral_norm();
    let form_scale =
        2.0 * s.tau * norm_b + s.tau * s.tau * (2.0 * s.theta - 1.0).abs() * norm_b * norm_b;
    let m_inv_norm = m_inv.singular_values().max();
    defect_search(&d, defect, form_scale * m_inv_norm * m_inv_norm, tol, cap)
}

/// Smallest m with Σ_{j≤m} (D*)ʲ (I − D*D) Dʲ coercive, for a given D.
///
/// Fails when ‖D‖ exceeds `1 + tol`.
pub fn dhc_index_of(
    d: &OperatorMatrix,
    tol: Option<f64>,
    cap: Option<usize>,
) -> Result<IndexResult> {
    let norm = check_semi_contractive(d, tol)?;
    let n = d.dim();
    let dm = d.as_matrix();
    let defect = symmetrize(&(DMatrix::<Complex64>::identity(n, n) - dm.adjoint() * dm));
    defect_search(d, defect, 1.0 + norm * norm, tol, cap)
}

fn check_semi_contractive(d: &OperatorMatrix, tol: Option<f64>) -> Result<f64> {
    let norm = d.spectral_norm();
    if norm > 1.0 + tol.unwrap_or(DEFAULT_CONTRACTIVITY_TOL) {
        return Err(Error::NotSemiContractive { norm });
    }
    Ok(norm)
}

fn defect_search(
    d: &OperatorMatrix,
    defect: DMatrix<Complex64>,
    defect_scale: f64,
    tol: Option<f64>,
    cap: Option<usize>,
) -> Result<IndexResult> {
    let n = d.dim();
    let cap = cap.unwrap_or(n - 1);
    let dm = d.as_matrix();
    let norm = d.spectral_norm();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    index_search(n, cap, tol, |j| {
        if j > 0 {
            power = dm * &power;
        }
        (
            power.adjoint() * &defect * &power,
            defect_scale * norm.powi(2 * j as i32),
        )
    })
}

/// Set of step sizes τ > 0 for which the scheme is semi-contractive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSizeWindow {
    AllTau,
    UpTo {
        tau0: f64,
        /// ‖D(τ₀)‖ as computed; not asserted to equal 1.
        norm_at_tau0: f64,
    },
    Empty,
}

impl StepSizeWindow {
    pub fn tau0(&self) -> Option<f64> {
        match self {
            StepSizeWindow::UpTo { tau0, .. } => Some(*tau0),
            _ => None,
        }
    }
}

/// Factor R of B*B = R·R* used to reduce 2B_H ⪰ τ(1−2θ)B*B to an eigenvalue
/// problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GramFactor {
    #[default]
    HermitianSqrt,
    Cholesky,
}

/// Step-size window for θ ∈ [0, ½).
pub fn max_stepsize(b: &OperatorMatrix, theta: f64, tol: Option<f64>) -> Result<StepSizeWindow> {
    max_stepsize_with(b, theta, tol, GramFactor::default())
}

pub fn max_stepsize_with(
    b: &OperatorMatrix,
    theta: f64,
    tol: Option<f64>,
    factor: GramFactor,
) -> Result<StepSizeWindow> {
    if !(0.0..0.5).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "max_stepsize needs theta in [0, 1/2), got {theta}"
        )));
    }
    let witness = is_hypocoercive(b, None)?;
    if !witness.hypocoercive {
        return Err(Error::NotHypocoercive {
            abscissa: witness.min_real_part,
        });
    }
    let bh = classify_hermitian(&hermitian_part(b), tol)?;
    if !bh.is_coercive() {
        return Ok(StepSizeWindow::Empty);
    }
    let gram = b.adjoint().matmul(b);
    // Congruence by R⁻¹ turns the pencil (B_H, B*B) into a single Hermitian
    // matrix whose smallest eigenvalue is the threshold.
    let reduced = match factor {
        GramFactor::HermitianSqrt => {
            let r_inv = invert(&hermitian_sqrt(&gram)?)?;
            r_inv.adjoint().matmul(&bh.matrix).matmul(&r_inv)
        }
        GramFactor::Cholesky => {
            let l_inv = invert(&cholesky_factor(&gram)?)?;
            l_inv.matmul(&bh.matrix).matmul(&l_inv.adjoint())
        }
    };
    let reduced = OperatorMatrix::wrap(symmetrize(reduced.as_matrix()));
    let lambda_min = classify_hermitian(&reduced, None)?.min_eigenvalue;
    let tau0 = 2.0 * lambda_min / (1.0 - 2.0 * theta);

    let at = classify_contractivity(
        b,
        &ThetaScheme::new(theta, tau0)?,
        Some(STEP_WINDOW_VERIFY_TOL),
    )?;
    let past = classify_contractivity(
        b,
        &ThetaScheme::new(theta, 1.01 * tau0)?,
        Some(STEP_WINDOW_VERIFY_TOL),
    )?;
    if !at.class.is_semi_contractive() || past.class != Contractivity::Expanding {
        return Err(Error::Verification(format!(
            "tau0 = {tau0}: class at tau0 is {}, at 1.01 tau0 is {}",
            at.class.as_str(),
            past.class.as_str()
        )));
    }
    Ok(StepSizeWindow::UpTo {
        tau0,
        norm_at_tau0: at.norm,
    })
}
