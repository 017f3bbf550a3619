//! Bures geometry of positive normal forms on finite direct sums of full
//! matrix algebras, realized in the Hilbert–Schmidt standard form.
//!
//! The algebra `M = ⊕ M_{n_i}(ℂ)` acts on `H = ⊕ M_{n_i}(ℂ)` by left
//! multiplication and its commutant by right multiplication. A positive form
//! `ν(x) = Σ tr(a_i x_i)` is stored through its densities `a_i`.
//!
//! ```
//! use bures_core::{bures_distance, Algebra, PositiveForm};
//! use bures_core::linalg::{real, zeros};
//!
//! let alg = Algebra::new(&[2]).unwrap();
//! let mut a = zeros(2, 2);
//! a[(0, 0)] = real(1.0);
//! let mut c = zeros(2, 2);
//! c[(0, 0)] = real(0.5);
//! c[(1, 1)] = real(0.5);
//! let nu = PositiveForm::new(&alg, vec![a]).unwrap();
//! let rho = PositiveForm::new(&alg, vec![c]).unwrap();
//! let r = bures_distance(&nu, &rho).unwrap();
//! assert!((r.fidelity - 0.5f64.sqrt()).abs() < 1e-12);
//! ```

pub mod algebra;
pub mod bures;
pub mod error;
pub mod fibre;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod overlap;
pub mod properties;
pub mod random;
pub mod standard_form;
pub mod sweep;

pub use algebra::{centralizer_contains, conjugate_form, evaluate, mvn_precedes, AlgElement, Algebra, PositiveForm};
pub use bures::{
    bures_distance, commutation_report, commutes, conjugated_form_vector, fidelity, g_functional, minimal_pair,
    optimal_vector, rho_perp, skew_information, variational_fidelity, BuresReport, CommutationReport,
    MinimalPairReport, VariationalMode, VariationalResult,
};
pub use error::{Error, Result};
pub use fibre::{distance_to_fibre, relative_fibre_survey, relfaser_check, MembershipReport, SurveySummary};
pub use linalg::{ComplexMatrix, TolerancePolicy, C64};
pub use overlap::{build_overlap, functional_norm, is_positive, OverlapForm};
pub use standard_form::{
    fibre_contains, fibre_sample, hs_inner, left_act, right_act, support_left, support_right, HSVector, StandardForm,
};
pub use sweep::{NuMode, PsiMode, SweepRow};
