//! Levi-Civita connection of `g = circ(A, B, B)` and the covariant derivative
//! of the shift `q`.
//!
//! Christoffel symbols are produced two ways: by contracting metric
//! derivatives with the inverse metric ([`christoffel_general`]) and from
//! eighteen closed-form expressions in `A`, `B` and their gradients
//! ([`christoffel_closed`]). The first is the reference; the second must
//! agree with it everywhere.
//!
//! Indexing: `gamma[s][i][j]` is `Γˢᵢⱼ`, with `∇_{∂ᵢ}∂ⱼ = Γˢᵢⱼ ∂ₛ`.

use crate::circulant::{row_times_s, CirculantMatrix};
use crate::error::{GeometryError, Result};
use crate::fields::FieldPair;
use crate::scalar::{max_abs, Mat3, Real, Vec3};

pub type Tensor3<T> = [[[T; 3]; 3]; 3];

pub(crate) fn zeros3<T: Real>() -> Tensor3<T> {
    [[[T::zero(); 3]; 3]; 3]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelSymbols<T> {
    pub gamma: Tensor3<T>,
}

impl<T: Real> ChristoffelSymbols<T> {
    /// `Γˢᵢⱼ` with zero-based indices.
    #[inline]
    pub fn get(&self, s: usize, i: usize, j: usize) -> T {
        self.gamma[s][i][j]
    }

    pub fn max_abs(&self) -> T {
        max_abs(self.gamma.iter().flatten().flatten().copied())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        max_abs(self.gamma.iter().flatten().flatten().zip(other.gamma.iter().flatten().flatten()).map(|(a, b)| *a - *b))
    }

    /// `max |Γˢᵢⱼ − Γˢⱼᵢ|`.
    pub fn lower_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for s in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((self.gamma[s][i][j] - self.gamma[s][j][i]).abs());
                }
            }
        }
        worst
    }
}

/// `∂ₖg_{ij}` from the circulant pattern: diagonal entries differentiate to
/// `Aₖ`, off-diagonal ones to `Bₖ`. Indexed `[k][i][j]`.
pub fn metric_derivatives<T: Real>(grad_a: &Vec3<T>, grad_b: &Vec3<T>) -> Tensor3<T> {
    let mut dg = zeros3();
    for k in 0..3 {
        dg[k] = CirculantMatrix::symmetric(grad_a[k], grad_b[k]).to_dense();
    }
    dg
}

fn nondegenerate_metric<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Result<(Mat3<T>, Mat3<T>)> {
    let m = f.metric_at(p)?;
    Ok((m.g_dense(), m.g_inv_dense()))
}

/// `2Γˢᵢⱼ = gᵃˢ(∂ᵢg_{aj} + ∂ⱼg_{ai} − ∂ₐg_{ij})`, computed for `i ≤ j` and
/// mirrored.
pub fn christoffel_general<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Result<ChristoffelSymbols<T>> {
    let (_, g_inv) = nondegenerate_metric(f, p)?;
    let (grad_a, grad_b) = f.grad(p);
    let dg = metric_derivatives(&grad_a, &grad_b);
    let half = T::lit(0.5);
    let mut gamma = zeros3();
    for s in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut acc = T::zero();
                for a in 0..3 {
                    acc += g_inv[a][s] * (dg[i][a][j] + dg[j][a][i] - dg[a][i][j]);
                }
                gamma[s][i][j] = half * acc;
                gamma[s][j][i] = half * acc;
            }
        }
    }
    Ok(ChristoffelSymbols { gamma })
}

/// A correction applied to the commonly printed closed-form list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Erratum {
    pub symbol: &'static str,
    pub printed: &'static str,
    pub corrected: &'static str,
    pub note: &'static str,
}

/// Every deviation of [`christoffel_closed`] from the printed closed forms.
pub const CLOSED_FORM_ERRATA: &[Erratum] = &[
    Erratum {
        symbol: "Γ¹₂₂",
        printed: "(A+B)(2B-A₁)",
        corrected: "(A+B)(2B₂-A₁)",
        note: "missing index on B; first-kind symbol Γ₁,₂₂ = ½(2B₂ − A₁)",
    },
    Erratum {
        symbol: "Γ³₁₂",
        printed: "-BA{1}",
        corrected: "-B·A₁",
        note: "typesetting: subscript lost, value unchanged",
    },
    Erratum {
        symbol: "Γ³₂₂",
        printed: "-BA{2}",
        corrected: "-B·A₂",
        note: "typesetting: subscript lost, value unchanged",
    },
];

/// The eighteen closed-form Christoffel symbols (with [`CLOSED_FORM_ERRATA`]
/// applied). Writing `P = A + B`, every symbol has the shape
/// `(1/2D)(P·Γₛ − B·Γ₍ₐ₎ − B·Γ₍ᵦ₎)` where `Γₛ,ᵢⱼ` is the first-kind symbol
/// with the same upper index and the other two first-kind symbols enter with `−B`.
pub fn christoffel_closed<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Result<ChristoffelSymbols<T>> {
    let m = f.metric_at(p)?;
    let (a, b) = (m.g.a, m.g.b);
    let (ga, gb) = f.grad(p);
    let (a1, a2, a3) = (ga[0], ga[1], ga[2]);
    let (b1, b2, b3) = (gb[0], gb[1], gb[2]);
    let two = T::lit(2.0);
    let h = (two * m.d).recip();
    let pp = a + b;

    let mut gamma = zeros3();
    let mut set = |s: usize, i: usize, j: usize, v: T| {
        gamma[s - 1][i - 1][j - 1] = v;
        gamma[s - 1][j - 1][i - 1] = v;
    };

    set(1, 1, 1, h * (pp * a1 - b * (two * b1 - a2) - b * (two * b1 - a3)));
    set(2, 1, 1, h * (-b * a1 + pp * (two * b1 - a2) - b * (two * b1 - a3)));
    set(3, 1, 1, h * (-b * a1 - b * (two * b1 - a2) + pp * (two * b1 - a3)));

    set(1, 1, 2, h * (pp * a2 - b * a1 - b * (b1 + b2 - b3)));
    set(2, 1, 2, h * (-b * a2 + pp * a1 - b * (b1 + b2 - b3)));
    set(3, 1, 2, h * (-b * a2 - b * a1 + pp * (b1 + b2 - b3)));

    set(1, 1, 3, h * (pp * a3 - b * (b1 - b2 + b3) - b * a1));
    set(2, 1, 3, h * (-b * a3 + pp * (b1 - b2 + b3) - b * a1));
    set(3, 1, 3, h * (-b * a3 - b * (b1 - b2 + b3) + pp * a1));

    set(1, 2, 2, h * (pp * (two * b2 - a1) - b * a2 - b * (two * b2 - a3)));
    set(2, 2, 2, h * (-b * (two * b2 - a1) + pp * a2 - b * (two * b2 - a3)));
    set(3, 2, 2, h * (-b * (two * b2 - a1) - b * a2 + pp * (two * b2 - a3)));

    set(1, 2, 3, h * (pp * (-b1 + b2 + b3) - b * a3 - b * a2));
    set(2, 2, 3, h * (-b * (-b1 + b2 + b3) + pp * a3 - b * a2));
    set(3, 2, 3, h * (-b * (-b1 + b2 + b3) - b * a3 + pp * a2));

    set(1, 3, 3, h * (pp * (two * b3 - a1) - b * (two * b3 - a2) - b * a3));
    set(2, 3, 3, h * (-b * (two * b3 - a1) + pp * (two * b3 - a2) - b * a3));
    set(3, 3, 3, h * (-b * (two * b3 - a1) - b * (two * b3 - a2) + pp * a3));

    Ok(ChristoffelSymbols { gamma })
}

/// `grad A − grad B · S`. Vanishes exactly when `q` is parallel at `p`.
pub fn parallel_defect<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Vec3<T> {
    let (ga, gb) = f.grad(p);
    let sb = row_times_s(&gb);
    [ga[0] - sb[0], ga[1] - sb[1], ga[2] - sb[2]]
}

/// Zero test for [`parallel_defect`]: `‖defect‖∞ ≤ 1e-9 · (1 + ‖grad A‖∞)`.
pub fn is_parallel_at<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> bool {
    let defect = parallel_defect(f, p);
    let (ga, _) = f.grad(p);
    max_abs(defect) <= T::lit(1e-9) * (T::one() + max_abs(ga))
}

/// Components `∇ᵢqⱼˢ = Γˢᵢₐqⱼᵃ − Γᵃᵢⱼqₐˢ`, indexed `[i][j][s]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NablaQ<T> {
    pub components: Tensor3<T>,
}

impl<T: Real> NablaQ<T> {
    pub fn max_norm(&self) -> T {
        max_abs(self.components.iter().flatten().flatten().copied())
    }
}

pub fn nabla_q_from<T: Real>(gamma: &ChristoffelSymbols<T>) -> NablaQ<T> {
    let q = CirculantMatrix::<T>::shift().to_dense();
    let mut out = zeros3();
    for i in 0..3 {
        for j in 0..3 {
            for s in 0..3 {
                let mut acc = T::zero();
                for a in 0..3 {
                    acc += gamma.get(s, i, a) * q[j][a] - gamma.get(a, i, j) * q[a][s];
                }
                out[i][j][s] = acc;
            }
        }
    }
    NablaQ { components: out }
}

pub fn nabla_q<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Result<NablaQ<T>> {
    Ok(nabla_q_from(&christoffel_general(f, p)?))
}

/// `(s, i, j)` index triples (one-based) sharing each of the three values
/// taken by the connection when `q` is parallel.
pub const PARALLEL_GROUPS: [[(usize, usize, usize); 6]; 3] = [
    [(1, 1, 1), (2, 1, 2), (3, 1, 3), (3, 2, 2), (1, 2, 3), (2, 3, 3)],
    [(3, 1, 1), (1, 1, 2), (2, 1, 3), (2, 2, 2), (3, 2, 3), (1, 3, 3)],
    [(2, 1, 1), (3, 1, 2), (1, 1, 3), (1, 2, 2), (2, 2, 3), (3, 3, 3)],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedChristoffel<T> {
    pub groups: [T; 3],
    /// Largest `|Γ − Gₙ|` over all eighteen members of the three groups,
    /// with `Γ` from [`christoffel_general`].
    pub max_deviation: T,
}

/// The three distinct connection values under parallelism:
/// `Gₙ = (1/2D)(A·Aₙ + B·(Σₘ Bₘ − 4Bₙ))`.
pub fn reduced_christoffel<T: Real>(f: &FieldPair<T>, p: &Vec3<T>) -> Result<ReducedChristoffel<T>> {
    if !is_parallel_at(f, p) {
        return Err(GeometryError::ParallelismViolated { defect: max_abs(parallel_defect(f, p)).as_f64() });
    }
    let general = christoffel_general(f, p)?;
    let m = f.metric_at(p)?;
    let (a, b) = (m.g.a, m.g.b);
    let (ga, gb) = f.grad(p);
    let h = (T::lit(2.0) * m.d).recip();
    let three = T::lit(3.0);
    let groups = [
        h * (a * ga[0] + b * (-three * gb[0] + gb[1] + gb[2])),
        h * (a * ga[1] + b * (gb[0] - three * gb[1] + gb[2])),
        h * (a * ga[2] + b * (gb[0] + gb[1] - three * gb[2])),
    ];
    let max_deviation =
        max_abs(PARALLEL_GROUPS.iter().zip(groups).flat_map(|(members, value)| {
            members.iter().map(move |&(s, i, j)| general.get(s - 1, i - 1, j - 1) - value)
        }));
    Ok(ReducedChristoffel { groups, max_deviation })
}

/// `max |∂ₖg_{ij} − Γᵃₖᵢ g_{aj} − Γᵃₖⱼ g_{ia}|`, zero for the Levi-Civita connection.
pub fn metric_compatibility_residual<T: Real>(
    f: &FieldPair<T>,
    p: &Vec3<T>,
    gamma: &ChristoffelSymbols<T>,
) -> Result<T> {
    let (g, _) = nondegenerate_metric(f, p)?;
    let (ga, gb) = f.grad(p);
    let dg = metric_derivatives(&ga, &gb);
    let mut worst = T::zero();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut r = dg[k][i][j];
                for a in 0..3 {
                    r -= gamma.get(a, k, i) * g[a][j] + gamma.get(a, k, j) * g[i][a];
                }
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}
