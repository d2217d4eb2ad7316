//! Numerical checks of the properties the continuous problem is known to have.

mod closed_form;
mod flux;
mod poincare;
pub mod resample;
mod second;
mod study;
mod trace;

pub use closed_form::{flat_errors, FlatClosedForm, FlatErrors};
pub use flux::{flux_jump_residual, FluxJump};
pub use poincare::{poincare_check, PoincareCheck};
pub use resample::ComparisonGrid;
pub use second::{h2_surrogate, identity_check, layer_second_derivatives, H2Surrogate, IdentityReport, SecondDerivatives};
pub use study::{surrogate_ratio, SURROGATE_FLOOR, 
    fitted_order, kappa_family_study, refine_study, stability_study, KappaRecord, KappaStudy, KappaSummary,
    RefineRecord, RefineStudy, StabilityRecord, StudyTable,
};
pub use trace::{trace_gap, trace_gradient, TraceData, TraceLocation};
