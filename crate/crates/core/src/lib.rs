//! Potential of a two-layer dielectric stack above a ground plate.
//!
//! The domain is `Ω(u) = Ω₁(u) ∪ Ω₂(u) ∪ Σ(u)` where `u` is the deflection of the
//! bottom of an elastic plate of thickness `d` suspended above a ground plate at
//! `z = -H`. The free space `Ω₁` and the plate `Ω₂` carry permittivities `σ₁` and
//! `σ₂`; the interface `Σ(u)` is the graph of `u`. The potential solves
//! `div(σ∇ψ) = 0` with continuity of `ψ` and of the conormal flux across `Σ(u)`.
//!
//! Where `u` touches the ground plate (the coincidence set) the lower layer pinches
//! off and part of the interface becomes outer boundary. The terrain-following
//! mesh in [`mesh`] collapses those columns instead of failing.
//!
//! Module map:
//! - [`geometry`]: physical parameters, sampled profiles, admissibility.
//! - [`boundary`]: the quadratic-ramp Dirichlet lift `h_u`.
//! - [`mesh`]: interface-fitted bilinear quadrilateral mesh.
//! - [`solver`]: assembly, Jacobi-preconditioned CG, energies.
//! - [`diagnostics`]: flux jump, Poincaré bound, second-derivative identity,
//!   H² surrogates, traces, and the stability / κ-family studies.
//! - [`cli`] and [`io`]: config-driven runs with byte-stable CSV/JSON output.

pub mod boundary;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod solver;
pub mod sparse;

pub use boundary::Lift;
pub use error::{Error, Result};
pub use geometry::{Admissibility, AdmissibilityClass, BuiltinProfile, PhysicalParams, Profile, Tolerances};
pub use mesh::{LateralBoundary, LayeredMesh, MeshSpec};
pub use solver::{solve, Field, FieldKind, Solution, SolveReport, SolverSettings};
