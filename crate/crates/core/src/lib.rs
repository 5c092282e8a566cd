//! Certificates for hypocoercivity of ẋ = −Bx and for the contractivity,
//! hypocontractivity and step-size windows of its θ-method discretizations
//! x_{k+1} = (I + τθB)⁻¹(I − τ(1−θ)B)x_k, on dense complex matrices.

pub mod coercivity;
pub mod decay;
pub mod document;
pub mod error;
pub mod operator;
pub mod report;
pub mod theta;

pub use coercivity::{
    coercivity_bounds, hc_index, is_hypocoercive, is_semi_dissipative,
    spectral_abscissa_decay_rate, CoercivityBounds, IndexResult, SemiDissipativity,
    SpectralWitness,
};
pub use decay::{
    discrete_norm_sequence, evolve_continuous, evolve_discrete, first_contraction_index,
    fit_short_time_exponent, log_spaced, propagator_norm_curve, short_time_exponent, CurveKind,
    DecayFit, NormCurve, Trajectory,
};
pub use document::{parse_matrix, serialize_matrix, MatrixDocument};
pub use error::{Error, ErrorClass, Result};
pub use operator::{
    classify_hermitian, hermitian_part, invert, matrix_exponential, spectral_norm, spectrum,
    ClosedForm2x2, Definiteness, HermitianCertificate, OperatorMatrix,
};
pub use report::{run_analyze, run_curve, run_sweep, AnalysisReport, AnalyzeOptions, CurveMode};
pub use theta::{
    classify_contractivity, contractivity_form, dhc_index, dhc_index_of, is_hypocontractive,
    max_stepsize, theta_operator, Contractivity, ContractivityClass, StepSizeWindow, ThetaScheme,
};
