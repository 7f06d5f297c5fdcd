//! The two scalar fields `A`, `B` and the metric `g = circ(A, B, B)` they define.

use std::fmt;
use std::sync::Arc;

use crate::circulant::CirculantMatrix;
use crate::error::{GeometryError, Result};
use crate::poly::{Parser, Polynomial};
use crate::scalar::{ordered_sum, Mat3, Real, Vec3};

/// Name of the built-in linear pair `A = 4x¹ + 2x²`, `B = x¹ + 2x² + 3x³`.
pub const PAPER_EXAMPLE: &str = "paper-example";

/// Default base step for central-difference gradients; the step along axis
/// `k` is `base · (1 + |xᵏ|)`.
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-6;

type ValueFn<T> = Arc<dyn Fn(&Vec3<T>) -> T + Send + Sync>;
type GradientFn<T> = Arc<dyn Fn(&Vec3<T>) -> Vec3<T> + Send + Sync>;

#[derive(Clone)]
pub enum ScalarField<T> {
    Polynomial(Polynomial<T>),
    /// Arbitrary smooth field. Its gradient is always taken by central differences.
    Function(ValueFn<T>),
    /// Smooth field with a caller-supplied gradient.
    WithGradient {
        value: ValueFn<T>,
        gradient: GradientFn<T>,
    },
}

impl<T: Real> ScalarField<T> {
    pub fn function(f: impl Fn(&Vec3<T>) -> T + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn with_gradient(
        value: impl Fn(&Vec3<T>) -> T + Send + Sync + 'static,
        gradient: impl Fn(&Vec3<T>) -> Vec3<T> + Send + Sync + 'static,
    ) -> Self {
        Self::WithGradient { value: Arc::new(value), gradient: Arc::new(gradient) }
    }

    pub fn eval(&self, p: &Vec3<T>) -> T {
        match self {
            Self::Polynomial(poly) => poly.eval(p),
            Self::Function(f) => f(p),
            Self::WithGradient { value, .. } => value(p),
        }
    }

    fn analytic_gradient(&self, p: &Vec3<T>) -> Option<Vec3<T>> {
        match self {
            Self::Polynomial(poly) => Some(poly.gradient(p)),
            Self::Function(_) => None,
            Self::WithGradient { gradient, .. } => Some(gradient(p)),
        }
    }

    fn central_gradient(&self, p: &Vec3<T>, base_step: T) -> Vec3<T> {
        let mut g = [T::zero(); 3];
        for (k, gk) in g.iter_mut().enumerate() {
            let h = base_step * (T::one() + p[k].abs());
            let (mut fwd, mut bwd) = (*p, *p);
            fwd[k] += h;
            bwd[k] -= h;
            *gk = (self.eval(&fwd) - self.eval(&bwd)) / (fwd[k] - bwd[k]);
        }
        g
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Polynomial(p) if p.is_constant())
    }
}

impl<T: Real> From<Polynomial<T>> for ScalarField<T> {
    fn from(p: Polynomial<T>) -> Self {
        Self::Polynomial(p)
    }
}

impl<T: fmt::Debug> fmt::Debug for ScalarField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Self::Function(_) => write!(f, "Function(..)"),
            Self::WithGradient { .. } => write!(f, "WithGradient(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradMode<T> {
    /// Exact derivatives for polynomial fields; falls back to central
    /// differences with the default step for function fields.
    Analytic,
    CentralDifference {
        base_step: T,
    },
}

impl<T: Real> GradMode<T> {
    pub fn central_default() -> Self {
        Self::CentralDifference { base_step: T::lit(DEFAULT_GRADIENT_STEP) }
    }
}

/// Axis-aligned box on which the fields are declared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Domain<T> {
    pub fn contains(&self, p: &Vec3<T>) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// The pair of scalar fields defining `g = circ(A, B, B)`.
#[derive(Debug, Clone)]
pub struct FieldPair<T> {
    pub a: ScalarField<T>,
    pub b: ScalarField<T>,
    pub grad_mode: GradMode<T>,
    pub domain: Option<Domain<T>>,
}

/// Degeneracy and definiteness of the metric at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainStatus<T> {
    pub a: T,
    pub b: T,
    /// `D = (A − B)(A + 2B)`.
    pub d: T,
    /// `|D|` must exceed this for the metric to count as nondegenerate.
    pub threshold: T,
    pub nondegenerate: bool,
    /// `A − B > 0` and `A + 2B > 0`.
    pub definite: bool,
}

impl<T: Real> FieldPair<T> {
    pub fn new(a: impl Into<ScalarField<T>>, b: impl Into<ScalarField<T>>) -> Self {
        Self { a: a.into(), b: b.into(), grad_mode: GradMode::Analytic, domain: None }
    }

    pub fn with_grad_mode(mut self, mode: GradMode<T>) -> Self {
        self.grad_mode = mode;
        self
    }

    pub fn with_domain(mut self, domain: Domain<T>) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn constant(a: T, b: T) -> Self {
        Self::new(Polynomial::constant(a), Polynomial::constant(b))
    }

    pub fn paper_example() -> Self {
        Self::new(
            Polynomial::linear(T::zero(), [T::lit(4.0), T::lit(2.0), T::zero()]),
            Polynomial::linear(T::zero(), [T::one(), T::lit(2.0), T::lit(3.0)]),
        )
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            PAPER_EXAMPLE => Ok(Self::paper_example()),
            other => Err(GeometryError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Parses `A: <poly>; B: <poly>` or a built-in name. Clauses may also be
    /// separated by newlines.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if !trimmed.contains(':') {
            let is_name = !trimmed.is_empty()
                && trimmed.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
                && trimmed.starts_with(|c: char| c.is_ascii_alphabetic());
            if is_name {
                return Self::builtin(trimmed);
            }
        }

        let mut a = None;
        let mut b = None;
        let mut offset = 0;
        for clause in text.split([';', '\n']) {
            let start = offset;
            offset += clause.len() + 1;
            if clause.trim().is_empty() {
                continue;
            }
            let Some(colon) = clause.find(':') else {
                let lead = clause.len() - clause.trim_start().len();
                return Err(GeometryError::Parse {
                    position: start + lead,
                    message: "expected `A: <poly>` or `B: <poly>`".into(),
                });
            };
            let name = clause[..colon].trim();
            let slot = match name {
                "A" => &mut a,
                "B" => &mut b,
                _ => {
                    let lead = clause.len() - clause.trim_start().len();
                    return Err(GeometryError::Parse {
                        position: start + lead,
                        message: format!("unknown field name `{name}`"),
                    });
                }
            };
            if slot.is_some() {
                return Err(GeometryError::Parse { position: start, message: format!("field `{name}` given twice") });
            }
            let body_offset = start + colon + 1;
            let mut parser = Parser::new(&clause[colon + 1..], body_offset);
            let poly = parser.poly::<T>()?;
            parser.skip_ws();
            if let Some(ch) = parser.peek() {
                return Err(parser.error(format!("unexpected character `{ch}`")));
            }
            *slot = Some(poly);
        }
        match (a, b) {
            (Some(a), Some(b)) => Ok(Self::new(a, b)),
            (None, _) => Err(GeometryError::Parse { position: text.len(), message: "missing `A:` clause".into() }),
            (_, None) => Err(GeometryError::Parse { position: text.len(), message: "missing `B:` clause".into() }),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_constant() && self.b.is_constant()
    }

    pub fn eval(&self, p: &Vec3<T>) -> (T, T) {
        (self.a.eval(p), self.b.eval(p))
    }

    /// `(grad A, grad B)` at `p`.
    pub fn grad(&self, p: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
        let one = |field: &ScalarField<T>| match self.grad_mode {
            GradMode::Analytic => {
                field.analytic_gradient(p).unwrap_or_else(|| field.central_gradient(p, T::lit(DEFAULT_GRADIENT_STEP)))
            }
            GradMode::CentralDifference { base_step } => field.central_gradient(p, base_step),
        };
        (one(&self.a), one(&self.b))
    }

    pub fn domain_check(&self, p: &Vec3<T>) -> DomainStatus<T> {
        let (a, b) = self.eval(p);
        let d = (a - b) * (a + T::lit(2.0) * b);
        let threshold = T::lit(1e-10) * (T::one() + a * a + b * b);
        DomainStatus {
            a,
            b,
            d,
            threshold,
            nondegenerate: d.is_finite() && d.abs() >= threshold,
            definite: a - b > T::zero() && a + T::lit(2.0) * b > T::zero(),
        }
    }

    pub fn metric_at(&self, p: &Vec3<T>) -> Result<MetricAtPoint<T>> {
        let status = self.domain_check(p);
        if !status.nondegenerate {
            return Err(GeometryError::DegenerateMetric { d: status.d.as_f64(), point: p.map(|x| x.as_f64()) });
        }
        Ok(MetricAtPoint::from_values(status.a, status.b))
    }
}

/// The metric and its inverse at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricAtPoint<T> {
    pub g: CirculantMatrix<T>,
    pub g_inv: CirculantMatrix<T>,
    pub d: T,
    pub definite: bool,
}

impl<T: Real> MetricAtPoint<T> {
    /// Builds `circ(A, B, B)` and `(1/D)·circ(A+B, −B, −B)` without any
    /// degeneracy check.
    pub fn from_values(a: T, b: T) -> Self {
        let d = (a - b) * (a + T::lit(2.0) * b);
        let off = -b / d;
        Self {
            g: CirculantMatrix::symmetric(a, b),
            g_inv: CirculantMatrix::new((a + b) / d, off, off),
            d,
            definite: a - b > T::zero() && a + T::lit(2.0) * b > T::zero(),
        }
    }

    pub fn g_dense(&self) -> Mat3<T> {
        self.g.to_dense()
    }

    pub fn g_inv_dense(&self) -> Mat3<T> {
        self.g_inv.to_dense()
    }

    /// `g(x, y) = xᵀ g y`, summed so that permuting coordinates of both
    /// arguments by the same cyclic shift gives a bit-identical result.
    pub fn inner(&self, x: &Vec3<T>, y: &Vec3<T>) -> T {
        let g = self.g_dense();
        let mut terms = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                terms.push(x[i] * g[i][j] * y[j]);
            }
        }
        ordered_sum(terms)
    }

    /// `max |g_{is} g^{js} − δᵢʲ|`.
    pub fn inverse_residual(&self) -> T {
        let (g, gi) = (self.g_dense(), self.g_inv_dense());
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let s = (0..3).fold(T::zero(), |acc, s| acc + g[i][s] * gi[j][s]);
                let delta = if i == j { T::one() } else { T::zero() };
                worst = worst.max((s - delta).abs());
            }
        }
        worst
    }

    /// Gram determinant `g(u,u) g(v,v) − g(u,v)²`.
    pub fn gram(&self, u: &Vec3<T>, v: &Vec3<T>) -> T {
        let uv = self.inner(u, v);
        self.inner(u, u) * self.inner(v, v) - uv * uv
    }
}
