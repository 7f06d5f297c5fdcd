use thiserror::Error;

/// Errors raised by the geometry routines.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("circulant matrix is singular (det = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("unknown built-in field `{0}`")]
    UnknownBuiltin(String),

    #[error("metric is degenerate at ({:.6}, {:.6}, {:.6}): D = {d:e}", point[0], point[1], point[2])]
    DegenerateMetric { d: f64, point: [f64; 3] },

    #[error("grad A differs from grad B . S by {defect:e}")]
    ParallelismViolated { defect: f64 },

    #[error("finite-difference stencil leaves the field domain")]
    StencilTooWide,

    #[error("x, qx, q^2 x are linearly dependent (cubic = {cubic:e})")]
    DependentOrbit { cubic: f64 },

    #[error("metric is not positive definite")]
    IndefiniteMetric,

    #[error("section is degenerate (Gram determinant = {gram:e})")]
    DegenerateSection { gram: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
