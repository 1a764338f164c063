//! Two-drug addiction dynamics.
//!
//! A five-compartment population model (susceptible, addicted to drug 1 or 2,
//! recovered from drug 1 or 2) with a constant population, its exact
//! four-dimensional form, and the two-dimensional reduction obtained by
//! holding the recovered classes at steady state. The reduced model is a
//! competitive Lotka-Volterra system:
//!
//! ```text
//! dD1/dt = r1 D1 - (D1 / N)(a11 D1 + a12 D2)
//! dD2/dt = r2 D2 - (D2 / N)(a21 D1 + a22 D2)
//! ```
//!
//! The crate locates its equilibria in closed form, classifies them from the
//! Jacobian, integrates every tier, and builds phase portraits.

pub mod dynamics;
pub mod equilibria;
pub mod integrator;
pub mod model;
pub mod portrait;

pub mod stability;

pub use dynamics::{exact4_rhs, full_rhs, qss_recovered, reduced_rhs, Exact4State};
pub use equilibria::{
    axis_equilibria, equilibria, interior_equilibrium, Equilibrium, EquilibriumKind, EquilibriumSet, InteriorOutcome,
};
pub use integrator::{
    integrate, integrate_exact4, integrate_full, integrate_reduced, reduction_error, IntegrateError, IntegratorOptions,
    Method, TerminalReason, Tier, Trajectory,
};
pub use model::{
    reduced_coefficients, validate_parameters, LVCoefficients, ModelParameters, PopulationState, ReducedState,
    Tolerance, ValidatedParameters, ValidationError, ValidationErrors,
};
pub use portrait::{
    build_portrait, nullclines, render_svg, separatrices, trajectory_bundle, GridLayout, PhasePortrait, PortraitError,
    PortraitOptions, SvgStyle, Window,
};
pub use stability::{
    classify, classify_equilibria, eigen2, jacobian_at, origin_analysis, ClassifiedEquilibrium, ClassifiedSet,
    Jacobian2, OriginAnalysis, OriginCase, StabilityClass, StabilityReport,
};
