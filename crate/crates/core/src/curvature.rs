//! Curvature of the Levi-Civita connection and sectional curvatures of the
//! three 2-sections spanned by consecutive vectors of a `q`-orbit.
//!
//! Conventions: `Rˢₖⱼᵢ = ∂ₖΓˢⱼᵢ − ∂ⱼΓˢₖᵢ + ΓˢₖₐΓᵃⱼᵢ − ΓˢⱼₐΓᵃₖᵢ` are the
//! components of `R(∂ₖ, ∂ⱼ)∂ᵢ`, and the lowered tensor
//! `R_{kjis} = g_{as}Rᵃₖⱼᵢ` gives `R(x, y, z, u) = g(R(x, y)z, u)`.
//! Derivatives of `Γ` are central differences of [`christoffel_general`],
//! five-point by default.

use crate::circulant::CirculantMatrix;
use crate::connection::{christoffel_general, ChristoffelSymbols, Tensor3};
use crate::error::{GeometryError, Result};
use crate::fields::{FieldPair, MetricAtPoint};
use crate::scalar::{max_abs, norm, Real, Vec3};
use crate::tolerance;

pub type Tensor4<T> = [[[[T; 3]; 3]; 3]; 3];

/// Default base step for differentiating `Γ`; the step along axis `k` is
/// `base · (1 + |xᵏ|)`.
pub const DEFAULT_CURVATURE_STEP: f64 = 1e-5;

fn zeros4<T: Real>() -> Tensor4<T> {
    [[[[T::zero(); 3]; 3]; 3]; 3]
}

fn flat4<T: Copy>(t: &Tensor4<T>) -> impl Iterator<Item = T> + '_ {
    t.iter().flatten().flatten().flatten().copied()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureAtPoint<T> {
    /// `Rˢₖⱼᵢ`, indexed `[s][k][j][i]`.
    pub r_up: Tensor4<T>,
    /// `R_{kjis}`, indexed `[k][j][i][s]`.
    pub r_down: Tensor4<T>,
    pub point: Vec3<T>,
    /// Base step used for the derivatives of `Γ`.
    pub fd_step: T,
    pub stencil: Stencil,
    /// `max |R(h) − R(h/2)|` over the components of `r_up`.
    pub half_step_delta: T,
    pub metric: MetricAtPoint<T>,
}

/// Central-difference stencil for the derivatives of `Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Stencil {
    /// `(f(x+h) − f(x−h)) / 2h`, error `O(h²)`.
    ThreePoint,
    /// `(8(f(x+h) − f(x−h)) − (f(x+2h) − f(x−2h))) / 12h`, error `O(h⁴)`.
    #[default]
    FivePoint,
}

impl Stencil {
    fn reach(self) -> usize {
        match self {
            Self::ThreePoint => 1,
            Self::FivePoint => 2,
        }
    }
}

/// `(Γ(p + m·h·eₖ) − Γ(p − m·h·eₖ)) / span` for one multiple `m` of the step.
fn symmetric_quotient<T: Real>(f: &FieldPair<T>, p: &Vec3<T>, k: usize, h: T) -> Result<Tensor3<T>> {
    let (mut fwd, mut bwd) = (*p, *p);
    fwd[k] += h;
    bwd[k] -= h;
    if let Some(domain) = &f.domain {
        if !domain.contains(&fwd) || !domain.contains(&bwd) {
            return Err(GeometryError::StencilTooWide);
        }
    }
    let span = fwd[k] - bwd[k];
    let (gf, gb) = (christoffel_general(f, &fwd)?, christoffel_general(f, &bwd)?);
    let mut out = crate::connection::zeros3();
    for s in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                out[s][i][j] = (gf.gamma[s][i][j] - gb.gamma[s][i][j]) / span;
            }
        }
    }
    Ok(out)
}

fn christoffel_derivatives<T: Real>(
    f: &FieldPair<T>,
    p: &Vec3<T>,
    base: T,
    stencil: Stencil,
) -> Result<[Tensor3<T>; 3]> {
    let mut out = [crate::connection::zeros3(); 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let h = base * (T::one() + p[k].abs());
        if let Some(domain) = &f.domain {
            let reach = h * T::lit(stencil.reach() as f64);
            let (mut fwd, mut bwd) = (*p, *p);
            fwd[k] += reach;
            bwd[k] -= reach;
            if !domain.contains(&fwd) || !domain.contains(&bwd) {
                return Err(GeometryError::StencilTooWide);
            }
        }
        let near = symmetric_quotient(f, p, k, h)?;
        *slot = match stencil {
            Stencil::ThreePoint => near,
            Stencil::FivePoint => {
                let far = symmetric_quotient(f, p, k, h + h)?;
                let mut d = near;
                for s in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            d[s][i][j] = (T::lit(4.0) * near[s][i][j] - far[s][i][j]) / T::lit(3.0);
                        }
                    }
                }
                d
            }
        };
    }
    Ok(out)
}

fn riemann_up<T: Real>(
    f: &FieldPair<T>,
    p: &Vec3<T>,
    gamma: &ChristoffelSymbols<T>,
    base: T,
    stencil: Stencil,
) -> Result<Tensor4<T>> {
    // dgamma[k][s][i][j] = ∂ₖΓˢᵢⱼ
    let dgamma = christoffel_derivatives(f, p, base, stencil)?;
    let mut r = zeros4();
    for s in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for i in 0..3 {
                    let mut v = dgamma[k][s][j][i] - dgamma[j][s][k][i];
                    for a in 0..3 {
                        v += gamma.get(s, k, a) * gamma.get(a, j, i) - gamma.get(s, j, a) * gamma.get(a, k, i);
                    }
                    r[s][k][j][i] = v;
                }
            }
        }
    }
    Ok(r)
}

/// Curvature at `p` with base step `h` and the default [`Stencil`], plus the
/// half-step consistency delta.
pub fn curvature_at<T: Real>(f: &FieldPair<T>, p: &Vec3<T>, h: T) -> Result<CurvatureAtPoint<T>> {
    curvature_at_with(f, p, h, Stencil::default())
}

pub fn curvature_at_with<T: Real>(
    f: &FieldPair<T>,
    p: &Vec3<T>,
    h: T,
    stencil: Stencil,
) -> Result<CurvatureAtPoint<T>> {
    let metric = f.metric_at(p)?;
    let gamma = christoffel_general(f, p)?;
    let r_up = riemann_up(f, p, &gamma, h, stencil)?;
    let r_half = riemann_up(f, p, &gamma, h * T::lit(0.5), stencil)?;
    let half_step_delta = max_abs(flat4(&r_up).zip(flat4(&r_half)).map(|(a, b)| a - b));

    let g = metric.g_dense();
    let mut r_down = zeros4();
    for k in 0..3 {
        for j in 0..3 {
            for i in 0..3 {
                for s in 0..3 {
                    r_down[k][j][i][s] = (0..3).fold(T::zero(), |acc, a| acc + g[a][s] * r_up[a][k][j][i]);
                }
            }
        }
    }
    Ok(CurvatureAtPoint { r_up, r_down, point: *p, fd_step: h, stencil, half_step_delta, metric })
}

impl<T: Real> CurvatureAtPoint<T> {
    /// `R(x, y, z, u) = R_{kjis} xᵏ yʲ zⁱ uˢ`.
    pub fn eval(&self, x: &Vec3<T>, y: &Vec3<T>, z: &Vec3<T>, u: &Vec3<T>) -> T {
        let mut acc = T::zero();
        for k in 0..3 {
            for j in 0..3 {
                let xy = x[k] * y[j];
                if xy.is_zero() {
                    continue;
                }
                for i in 0..3 {
                    for s in 0..3 {
                        acc += self.r_down[k][j][i][s] * xy * z[i] * u[s];
                    }
                }
            }
        }
        acc
    }

    pub fn max_abs_up(&self) -> T {
        max_abs(flat4(&self.r_up))
    }

    pub fn max_abs_down(&self) -> T {
        max_abs(flat4(&self.r_down))
    }

    /// `max |R_{kjis} + R_{jkis}|`.
    pub fn first_pair_antisymmetry(&self) -> T {
        let r = &self.r_down;
        let mut worst = T::zero();
        for (k, j, i, s) in indices4() {
            worst = worst.max((r[k][j][i][s] + r[j][k][i][s]).abs());
        }
        worst
    }

    /// `max |R_{kjis} − R_{iskj}|`.
    pub fn pair_symmetry(&self) -> T {
        let r = &self.r_down;
        let mut worst = T::zero();
        for (k, j, i, s) in indices4() {
            worst = worst.max((r[k][j][i][s] - r[i][s][k][j]).abs());
        }
        worst
    }

    /// `max |Rˢₖⱼₐqᵢᵃ − Rᵃₖⱼᵢqₐˢ|`, the coordinate form of `R` commuting with `q`.
    pub fn q_commutation_residual(&self) -> T {
        let q = CirculantMatrix::<T>::shift().to_dense();
        let r = &self.r_up;
        let mut worst = T::zero();
        for (s, k, j, i) in indices4() {
            let mut v = T::zero();
            for a in 0..3 {
                v += r[s][k][j][a] * q[i][a] - r[a][k][j][i] * q[a][s];
            }
            worst = worst.max(v.abs());
        }
        worst
    }

    /// `|R(x, y, q²z, u) − R(x, y, z, qu)|`.
    pub fn q_identity_residual(&self, x: &Vec3<T>, y: &Vec3<T>, z: &Vec3<T>, u: &Vec3<T>) -> T {
        let q = CirculantMatrix::<T>::shift();
        let q2 = q * q;
        (self.eval(x, y, &q2.apply(z), u) - self.eval(x, y, z, &q.apply(u))).abs()
    }

    /// `(|R(x,y,z,u) − R(x,y,qz,qu)|, |R(x,y,z,u) − R(x,y,q²z,q²u)|)`.
    pub fn q_invariance_residuals(&self, x: &Vec3<T>, y: &Vec3<T>, z: &Vec3<T>, u: &Vec3<T>) -> (T, T) {
        let q = CirculantMatrix::<T>::shift();
        let q2 = q * q;
        let base = self.eval(x, y, z, u);
        (
            (base - self.eval(x, y, &q.apply(z), &q.apply(u))).abs(),
            (base - self.eval(x, y, &q2.apply(z), &q2.apply(u))).abs(),
        )
    }

    /// Magnitude against which multilinear residuals are judged:
    /// `max|R_{kjis}| · ‖x‖‖y‖‖z‖‖u‖`.
    pub fn residual_scale(&self, vectors: [&Vec3<T>; 4]) -> T {
        vectors.iter().fold(self.max_abs_down(), |acc, v| acc * norm(v))
    }

    /// `R(u, v, u, v) / (g(u,u) g(v,v) − g(u,v)²)`.
    pub fn sectional(&self, u: &Vec3<T>, v: &Vec3<T>) -> Result<T> {
        if !self.metric.definite {
            return Err(GeometryError::IndefiniteMetric);
        }
        let gram = self.metric.gram(u, v);
        let floor = T::lit(tolerance::SECTION_GRAM_REL) * self.metric.inner(u, u) * self.metric.inner(v, v);
        if !(gram > floor) {
            return Err(GeometryError::DegenerateSection { gram: gram.as_f64() });
        }
        Ok(self.eval(u, v, u, v) / gram)
    }
}

fn indices4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..81).map(|n| (n / 27, (n / 9) % 3, (n / 3) % 3, n % 3))
}

/// `3x¹x²x³ − (x¹)³ − (x²)³ − (x³)³`; nonzero iff `x, qx, q²x` are independent.
pub fn independence_cubic<T: Real>(x: &Vec3<T>) -> T {
    T::lit(3.0) * x[0] * x[1] * x[2] - x[0] * x[0] * x[0] - x[1] * x[1] * x[1] - x[2] * x[2] * x[2]
}

/// The three sections `E₁ = {x, qx}`, `E₂ = {qx, q²x}`, `E₃ = {q²x, x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSections<T> {
    pub x: Vec3<T>,
    pub sections: [(Vec3<T>, Vec3<T>); 3],
    pub independence: T,
}

pub fn orbit_sections<T: Real>(f: &FieldPair<T>, p: &Vec3<T>, x: &Vec3<T>) -> Result<OrbitSections<T>> {
    let independence = independence_cubic(x);
    let n = norm(x);
    if !(independence.abs() > T::lit(tolerance::ORBIT_DEPENDENCE_REL) * n * n * n) {
        return Err(GeometryError::DependentOrbit { cubic: independence.as_f64() });
    }
    if !f.metric_at(p)?.definite {
        return Err(GeometryError::IndefiniteMetric);
    }
    let q = CirculantMatrix::<T>::shift();
    let qx = q.apply(x);
    let q2x = q.apply(&qx);
    Ok(OrbitSections { x: *x, sections: [(*x, qx), (qx, q2x), (q2x, *x)], independence })
}

pub fn sectional_curvature<T: Real>(f: &FieldPair<T>, p: &Vec3<T>, u: &Vec3<T>, v: &Vec3<T>, h: T) -> Result<T> {
    if !f.metric_at(p)?.definite {
        return Err(GeometryError::IndefiniteMetric);
    }
    curvature_at(f, p, h)?.sectional(u, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionReport<T> {
    pub x: Vec3<T>,
    pub sections: [(Vec3<T>, Vec3<T>); 3],
    pub mu: [T; 3],
    /// `max |μ(Eₘ) − μ(Eₙ)|`.
    pub spread: T,
    pub independence: T,
    /// `1e-6 · max|μ| + 1e-9`.
    pub tolerance: T,
    pub pass: bool,
}

/// Sectional curvatures of the three orbit sections from an already
/// computed curvature tensor.
pub fn orbit_report<T: Real>(curv: &CurvatureAtPoint<T>, orbit: &OrbitSections<T>) -> Result<SectionReport<T>> {
    let mut mu = [T::zero(); 3];
    for (slot, (u, v)) in mu.iter_mut().zip(&orbit.sections) {
        *slot = curv.sectional(u, v)?;
    }
    let spread = (mu[0] - mu[1]).abs().max((mu[1] - mu[2]).abs()).max((mu[0] - mu[2]).abs());
    let tolerance = T::lit(tolerance::ORBIT_SPREAD_REL) * max_abs(mu) + T::lit(tolerance::ORBIT_SPREAD_ABS);
    Ok(SectionReport {
        x: orbit.x,
        sections: orbit.sections,
        mu,
        spread,
        independence: orbit.independence,
        tolerance,
        pass: spread <= tolerance,
    })
}

/// Computes and compares `μ(E₁)`, `μ(E₂)`, `μ(E₃)` for the orbit of `x`.
pub fn orbit_sectional_check<T: Real>(f: &FieldPair<T>, p: &Vec3<T>, x: &Vec3<T>, h: T) -> Result<SectionReport<T>> {
    let orbit = orbit_sections(f, p, x)?;
    let curv = curvature_at(f, p, h)?;
    orbit_report(&curv, &orbit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Domain;
    use crate::poly::Polynomial;

    type F = FieldPair<f64>;
    const H: f64 = DEFAULT_CURVATURE_STEP;

    #[test]
    fn constant_fields_are_flat() {
        let c = curvature_at(&F::constant(2.0, 1.0), &[0.5, -1.0, 2.0], H).unwrap();
        assert!(c.max_abs_up() <= 1e-10);
        let mu = sectional_curvature(&F::constant(2.0, 1.0), &[0.0; 3], &[1.0, 0.0, 0.0], &[0.0, 1.0, 2.0], H).unwrap();
        assert!(mu.abs() <= 1e-10);
        let r = orbit_sectional_check(&F::constant(2.0, 1.0), &[0.0; 3], &[1.0, 2.0, 3.0], H).unwrap();
        assert_eq!(r.mu, [0.0; 3]);
        assert_eq!(r.spread, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn builtin_pair_is_curved_at_unit_point() {
        let c = curvature_at(&F::paper_example(), &[1.0, 0.0, 0.0], H).unwrap();
        assert!(c.max_abs_up() > 1e-3);
        assert!(c.half_step_delta <= 1e-6);
        assert!(c.first_pair_antisymmetry() <= 1e-8);
        assert!(c.pair_symmetry() <= 1e-8);
        assert!(c.q_commutation_residual() <= 1e-7 * c.max_abs_up());
    }

    #[test]
    fn multilinear_zero_slots() {
        let c = curvature_at(&F::paper_example(), &[1.0, 0.0, 0.0], H).unwrap();
        let z = [0.0; 3];
        assert_eq!(c.q_identity_residual(&[1.0, 2.0, 3.0], &[0.0, 1.0, -1.0], &z, &z), 0.0);
    }

    #[test]
    fn independence_cubic_examples() {
        assert_eq!(independence_cubic(&[1.0, 2.0, 3.0]), -18.0);
        assert_eq!(independence_cubic(&[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(independence_cubic(&[1.0, 0.0, 0.0]), -1.0);
        // equals −det circ(x¹, x², x³)
        let x: [f64; 3] = [0.3, -1.7, 2.2];
        let det = CirculantMatrix::new(x[0], x[1], x[2]).det();
        assert!((independence_cubic(&x) + det).abs() < 1e-12);
    }

    #[test]
    fn orbit_sections_validation() {
        let f = F::paper_example();
        let p = [1.0, 0.0, 0.0];
        let o = orbit_sections(&f, &p, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(o.sections[0], ([1.0, 2.0, 3.0], [2.0, 3.0, 1.0]));
        assert_eq!(o.sections[1], ([2.0, 3.0, 1.0], [3.0, 1.0, 2.0]));
        assert_eq!(o.sections[2], ([3.0, 1.0, 2.0], [1.0, 2.0, 3.0]));
        assert!(orbit_sections(&f, &p, &[1.0, 0.0, 0.0]).is_ok());
        assert!(matches!(orbit_sections(&f, &p, &[1.0, 1.0, 1.0]), Err(GeometryError::DependentOrbit { .. })));
        assert!(matches!(
            orbit_sections(&F::constant(0.0, 1.0), &p, &[1.0, 2.0, 3.0]),
            Err(GeometryError::IndefiniteMetric)
        ));
    }

    #[test]
    fn sectional_is_basis_invariant() {
        let f = F::paper_example();
        let p = [1.0, 0.0, 0.0];
        let c = curvature_at(&f, &p, H).unwrap();
        let (u, v) = ([1.0, 2.0, 3.0], [2.0, 3.0, 1.0]);
        let mu = c.sectional(&u, &v).unwrap();
        let scaled = c.sectional(&[2.0, 4.0, 6.0], &v).unwrap();
        assert!((mu - scaled).abs() <= 1e-9 * mu.abs() + 1e-12);
        let mixed = c
            .sectional(
                &[u[0] + 2.0 * v[0], u[1] + 2.0 * v[1], u[2] + 2.0 * v[2]],
                &[-v[0] + 0.5 * u[0], -v[1] + 0.5 * u[1], -v[2] + 0.5 * u[2]],
            )
            .unwrap();
        assert!((mu - mixed).abs() <= 1e-8 * mu.abs());
    }

    #[test]
    fn sectional_is_stable_under_step_halving() {
        let f = F::paper_example();
        let (u, v) = ([1.0, 2.0, 3.0], [2.0, 3.0, 1.0]);
        let a = sectional_curvature(&f, &[1.0, 0.0, 0.0], &u, &v, H).unwrap();
        let b = sectional_curvature(&f, &[1.0, 0.0, 0.0], &u, &v, H / 2.0).unwrap();
        assert!(a.is_finite() && a != 0.0);
        assert!((a - b).abs() <= 1e-6 * a.abs());
    }

    #[test]
    fn degenerate_sections_are_rejected() {
        let c = curvature_at(&F::paper_example(), &[1.0, 0.0, 0.0], H).unwrap();
        assert!(matches!(
            c.sectional(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]),
            Err(GeometryError::DegenerateSection { .. })
        ));
        let indefinite = curvature_at(&F::constant(0.0, 1.0), &[0.0; 3], H).unwrap();
        assert!(matches!(
            indefinite.sectional(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]),
            Err(GeometryError::IndefiniteMetric)
        ));
    }

    #[test]
    fn orbit_curvatures_agree_for_builtin_pair() {
        let r = orbit_sectional_check(&F::paper_example(), &[1.0, 0.0, 0.0], &[1.0, 2.0, 3.0], H).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.mu[0] != 0.0);
    }

    #[test]
    fn stencil_must_stay_in_domain() {
        let f = F::paper_example().with_domain(Domain { min: [0.5, -1.0, -1.0], max: [1.5, 1.0, 1.0] });
        assert!(curvature_at(&f, &[1.0, 0.0, 0.0], H).is_ok());
        assert_eq!(curvature_at(&f, &[0.5, 0.0, 0.0], H).unwrap_err(), GeometryError::StencilTooWide);
        // the five-point stencil reaches twice as far
        let p = [0.5 + 2.2e-5, 0.0, 0.0];
        assert!(curvature_at_with(&f, &p, H, Stencil::ThreePoint).is_ok());
        assert_eq!(curvature_at_with(&f, &p, H, Stencil::FivePoint).unwrap_err(), GeometryError::StencilTooWide);
    }

    #[test]
    fn five_point_stencil_converges_faster() {
        let f = F::paper_example();
        let p = [0.3, 0.4, -0.5];
        let three = curvature_at_with(&f, &p, 1e-3, Stencil::ThreePoint).unwrap();
        let five = curvature_at_with(&f, &p, 1e-3, Stencil::FivePoint).unwrap();
        assert_eq!(five.stencil, Stencil::FivePoint);
        assert!(five.half_step_delta < 1e-2 * three.half_step_delta);
        let reference = curvature_at_with(&f, &p, 1e-5, Stencil::FivePoint).unwrap();
        let err = |c: &CurvatureAtPoint<f64>| max_abs(flat4(&c.r_up).zip(flat4(&reference.r_up)).map(|(a, b)| a - b));
        assert!(err(&five) < 1e-2 * err(&three));
    }

    #[test]
    fn stencil_degeneracy_propagates() {
        use crate::fields::ScalarField;
        // A vanishes for x¹ ≤ 0, so the backward stencil point is degenerate.
        let a = ScalarField::function(|p: &Vec3<f64>| if p[0] > 0.0 { 1.0 + p[0] } else { 0.0 });
        let f = F::new(a, Polynomial::constant(0.0));
        let p = [1e-6, 0.0, 0.0];
        assert!(f.metric_at(&p).is_ok());
        let err = curvature_at(&f, &p, H).unwrap_err();
        assert!(matches!(err, GeometryError::DegenerateMetric { .. }));
    }

    #[test]
    fn non_parallel_pair_breaks_commutation() {
        let f =
            F::new(Polynomial::parse("3 + x1^2 + 0.5*x2*x3").unwrap(), Polynomial::parse("0.5*x1 - 0.3*x2^2").unwrap());
        let c = curvature_at(&f, &[0.4, 0.2, -0.3], H).unwrap();
        assert!(c.max_abs_up() > 1e-3);
        assert!(c.q_commutation_residual() > 1e-4);
    }
}
