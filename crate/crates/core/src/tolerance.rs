//! Default tolerances used by the verification routines and the CLI.

/// `max |closed − general|` for Christoffel symbols with analytic gradients.
pub const CHRISTOFFEL_DUAL_PATH: f64 = 1e-9;
/// Same comparison when gradients come from central differences.
pub const CHRISTOFFEL_DUAL_PATH_FD: f64 = 1e-5;
/// `‖∇q‖∞` must not exceed this where `grad A = grad B · S`.
pub const PARALLEL_FORWARD: f64 = 1e-10;
/// `‖∇q‖∞` must exceed this where the parallelism defect is large.
pub const PARALLEL_CONVERSE: f64 = 1e-6;
/// Defect magnitude at which the converse check applies.
pub const CONVERSE_DEFECT_MIN: f64 = 0.1;
/// `|Γ|` for constant fields.
pub const FLAT_CHRISTOFFEL: f64 = 1e-14;
/// `‖R‖∞` for constant fields.
pub const FLAT_CURVATURE: f64 = 1e-10;
/// `|g_{is} g^{js} − δᵢʲ|`.
pub const METRIC_INVERSE: f64 = 1e-12;
/// `g(qx, qy)` against `g(x, y)`, in units in the last place.
pub const Q_ISOMETRY_ULPS: u64 = 4;
/// Levi-Civita metric compatibility residual.
pub const METRIC_COMPATIBILITY: f64 = 1e-9;
/// Antisymmetry and pair symmetry of `R_{kjis}`, relative to `max(1, max|R|)`.
pub const CURVATURE_SYMMETRY: f64 = 1e-8;
/// Relative residual for `q`-identities of the curvature tensor.
pub const CURVATURE_IDENTITY_REL: f64 = 1e-7;
/// Componentwise change of `R` when the step is halved.
pub const FD_HALF_STEP: f64 = 1e-6;
/// Spread of orbit sectional curvatures: `REL · max|μ| + ABS`.
pub const ORBIT_SPREAD_REL: f64 = 1e-6;
pub const ORBIT_SPREAD_ABS: f64 = 1e-9;
/// `|cubic| ≤ REL · ‖x‖³` counts as a dependent orbit.
pub const ORBIT_DEPENDENCE_REL: f64 = 1e-12;
/// Gram determinant floor relative to `g(u,u) g(v,v)`.
pub const SECTION_GRAM_REL: f64 = 1e-12;
