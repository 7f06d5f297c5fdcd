//! 3×3 real circulant matrices.
//!
//! A circulant matrix is stored as its first row `(a, b, c)` and expands to
//!
//! ```text
//! | a b c |
//! | c a b |
//! | b c a |
//! ```
//!
//! The set is closed under multiplication and the product is commutative.
//! Everything except [`CirculantMatrix::inverse`] works for any ring-like
//! scalar (`i64`, rationals, floats).

use std::ops::Mul;

use num_traits::Num;

use crate::error::{GeometryError, Result};
use crate::scalar::{Mat3, Real, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CirculantMatrix<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Copy + Num> CirculantMatrix<T> {
    pub const fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    /// The affine structure `q`: the cyclic shift `(x¹, x², x³) ↦ (x², x³, x¹)`.
    pub fn shift() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    /// Symmetric circulant `circ(a, b, b)`, the layout of the metric.
    pub fn symmetric(a: T, b: T) -> Self {
        Self::new(a, b, b)
    }

    pub fn is_symmetric(&self) -> bool
    where
        T: PartialEq,
    {
        self.b == self.c
    }

    pub fn to_dense(&self) -> Mat3<T> {
        let Self { a, b, c } = *self;
        [[a, b, c], [c, a, b], [b, c, a]]
    }

    /// Reads a circulant back from a dense matrix, if it has circulant layout.
    pub fn from_dense(m: &Mat3<T>) -> Option<Self>
    where
        T: PartialEq,
    {
        let candidate = Self::new(m[0][0], m[0][1], m[0][2]);
        (candidate.to_dense() == *m).then_some(candidate)
    }

    /// Matrix product. Each entry pairs the mixed terms before adding the
    /// remaining one, so `m1 * m2` and `m2 * m1` round identically.
    pub fn product(&self, rhs: &Self) -> Self {
        let (a, b, c) = (self.a, self.b, self.c);
        let (x, y, z) = (rhs.a, rhs.b, rhs.c);
        Self::new(a * x + (b * z + c * y), (a * y + b * x) + c * z, (a * z + c * x) + b * y)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::identity(), |acc, _| acc.product(self))
    }

    /// Determinant `a³ + b³ + c³ − 3abc`.
    pub fn det(&self) -> T {
        let Self { a, b, c } = *self;
        let three = T::one() + T::one() + T::one();
        a * a * a + b * b * b + c * c * c - three * a * b * c
    }

    /// Action on a column vector using the dense row layout.
    pub fn apply(&self, v: &Vec3<T>) -> Vec3<T> {
        let Self { a, b, c } = *self;
        [a * v[0] + b * v[1] + c * v[2], c * v[0] + a * v[1] + b * v[2], b * v[0] + c * v[1] + a * v[2]]
    }

    /// Adjugate, itself circulant: `(a² − bc, c² − ab, b² − ac)`.
    pub fn adjugate(&self) -> Self {
        let Self { a, b, c } = *self;
        Self::new(a * a - b * c, c * c - a * b, b * b - a * c)
    }

    /// Exact inverse for scalars with exact division (rationals).
    pub fn inverse_exact(&self) -> Option<Self> {
        let det = self.det();
        if det.is_zero() {
            return None;
        }
        let adj = self.adjugate();
        Some(Self::new(adj.a / det, adj.b / det, adj.c / det))
    }
}

impl<T: Real> CirculantMatrix<T> {
    /// Scale-aware singularity threshold `1e-12 · (1 + max|entry|³)`.
    pub fn singularity_threshold(&self) -> T {
        let m = self.a.abs().max(self.b.abs()).max(self.c.abs());
        T::lit(1e-12) * (T::one() + m * m * m)
    }

    /// Inverse with the default singularity threshold.
    ///
    /// For symmetric matrices `circ(A, B, B)` the closed form
    /// `(1/D)·circ(A+B, −B, −B)` with `D = (A−B)(A+2B)` is used.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() < self.singularity_threshold() || !det.is_finite() {
            return Err(GeometryError::SingularMatrix { det: det.as_f64() });
        }
        if self.is_symmetric() {
            let (a, b) = (self.a, self.b);
            let d = (a - b) * (a + T::lit(2.0) * b);
            let inv_d = d.recip();
            let off = -b * inv_d;
            return Ok(Self::new((a + b) * inv_d, off, off));
        }
        let adj = self.adjugate();
        Ok(Self::new(adj.a / det, adj.b / det, adj.c / det))
    }
}

impl<T: Copy + Num> Mul for CirculantMatrix<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.product(&rhs)
    }
}

/// The constant structural tensors: the shift `q`, the matrix `S` and the
/// identity `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralConstants<T> {
    pub q: CirculantMatrix<T>,
    pub s: Mat3<T>,
    pub e: CirculantMatrix<T>,
}

impl<T: Copy + Num + std::ops::Neg<Output = T>> StructuralConstants<T> {
    pub fn new() -> Self {
        Self { q: CirculantMatrix::shift(), s: s_matrix(), e: CirculantMatrix::identity() }
    }
}

impl<T: Copy + Num + std::ops::Neg<Output = T>> Default for StructuralConstants<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Symmetric matrix with `−1` on the diagonal and `+1` elsewhere.
pub fn s_matrix<T: Copy + Num + std::ops::Neg<Output = T>>() -> Mat3<T> {
    let (o, m) = (T::one(), -T::one());
    [[m, o, o], [o, m, o], [o, o, m]]
}

/// Row vector times `S`: `(−v₁+v₂+v₃, v₁−v₂+v₃, v₁+v₂−v₃)`.
pub fn row_times_s<T: Copy + Num>(v: &Vec3<T>) -> Vec3<T> {
    [v[1] + v[2] - v[0], v[0] + v[2] - v[1], v[0] + v[1] - v[2]]
}
