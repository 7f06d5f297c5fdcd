//! Geometry of the 3-dimensional Riemannian metric `g = circ(A, B, B)`.
//!
//! `A` and `B` are scalar fields on a domain of ℝ³. The crate builds the
//! metric and its inverse, the Levi-Civita connection (by two independent
//! routes), the covariant derivative of the cyclic shift `q`, the curvature
//! tensor, and the sectional curvatures of the sections spanned by
//! `{x, qx}`, `{qx, q²x}`, `{q²x, x}`.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the
//! circulant algebra additionally works over integers and rationals. The
//! `f64` aliases below are what the CLI uses.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod circulant;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod fields;
pub mod poly;
pub mod scalar;
pub mod tolerance;

pub use circulant::{row_times_s, s_matrix, StructuralConstants};
pub use connection::{
    christoffel_closed, christoffel_general, is_parallel_at, metric_compatibility_residual, nabla_q, parallel_defect,
    reduced_christoffel, Erratum, CLOSED_FORM_ERRATA,
};
pub use curvature::{
    curvature_at, curvature_at_with, independence_cubic, orbit_report, orbit_sectional_check, orbit_sections,
    sectional_curvature, Stencil, DEFAULT_CURVATURE_STEP,
};
pub use error::{GeometryError, Result};
pub use fields::{Domain, DomainStatus, GradMode, ScalarField, DEFAULT_GRADIENT_STEP, PAPER_EXAMPLE};
pub use poly::Monomial;
pub use scalar::{Mat3, Real, Vec3};

pub type CirculantMatrix = circulant::CirculantMatrix<f64>;
pub type FieldPair = fields::FieldPair<f64>;
pub type MetricAtPoint = fields::MetricAtPoint<f64>;
pub type Polynomial = poly::Polynomial<f64>;
pub type ChristoffelSymbols = connection::ChristoffelSymbols<f64>;
pub type NablaQ = connection::NablaQ<f64>;
pub type ReducedChristoffel = connection::ReducedChristoffel<f64>;
pub type CurvatureAtPoint = curvature::CurvatureAtPoint<f64>;
pub type OrbitSections = curvature::OrbitSections<f64>;
pub type SectionReport = curvature::SectionReport<f64>;
