//! Independent oracles for the connection and curvature pipeline.

#![allow(clippy::needless_range_loop)]

use circgeo_core::{
    christoffel_closed, christoffel_general, curvature_at, CirculantMatrix, FieldPair, Mat3, Polynomial, ScalarField,
    Vec3, DEFAULT_CURVATURE_STEP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_g(f: &FieldPair, p: &Vec3<f64>) -> Mat3<f64> {
    let (a, b) = f.eval(p);
    CirculantMatrix::new(a, b, b).to_dense()
}

fn invert3(m: &Mat3<f64>) -> Mat3<f64> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r1, r2) = ((j + 1) % 3, (j + 2) % 3);
            let (c1, c2) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
        }
    }
    out
}

/// Christoffel symbols from central differences of the dense metric and a
/// cofactor inverse; shares nothing with the library path beyond field evaluation.
fn christoffel_by_metric_differences(f: &FieldPair, p: &Vec3<f64>) -> [[[f64; 3]; 3]; 3] {
    let h = 1e-5;
    let mut dg = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        let (mut fwd, mut bwd) = (*p, *p);
        fwd[k] += h;
        bwd[k] -= h;
        let (gf, gb) = (dense_g(f, &fwd), dense_g(f, &bwd));
        for i in 0..3 {
            for j in 0..3 {
                dg[k][i][j] = (gf[i][j] - gb[i][j]) / (2.0 * h);
            }
        }
    }
    let gi = invert3(&dense_g(f, p));
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for s in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                gamma[s][i][j] =
                    0.5 * (0..3).map(|a| gi[s][a] * (dg[i][a][j] + dg[j][a][i] - dg[a][i][j])).sum::<f64>();
            }
        }
    }
    gamma
}

#[test]
fn christoffel_matches_metric_difference_oracle() {
    let fields = [
        FieldPair::paper_example(),
        FieldPair::new(
            Polynomial::parse("3 + x1^2 - 0.5*x2*x3 + x3").unwrap(),
            Polynomial::parse("0.2*x1*x2 - 0.4*x3^2 + 0.1").unwrap(),
        ),
    ];
    let points = [[1.0, 0.0, 0.0], [0.7, -0.2, 0.3], [2.0, 1.0, -0.5]];
    for f in &fields {
        for p in &points {
            let oracle = christoffel_by_metric_differences(f, p);
            let general = christoffel_general(f, p).unwrap();
            let closed = christoffel_closed(f, p).unwrap();
            for s in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((general.gamma[s][i][j] - oracle[s][i][j]).abs() < 1e-7, "{p:?} {s}{i}{j}");
                        assert!((closed.gamma[s][i][j] - oracle[s][i][j]).abs() < 1e-7, "{p:?} {s}{i}{j}");
                    }
                }
            }
        }
    }
}

/// Round 3-sphere of radius 1 in stereographic coordinates:
/// `g = 4/(1+r²)² δ`, i.e. `A = 4/(1+r²)²`, `B = 0`.
fn stereographic_sphere() -> FieldPair {
    let a = ScalarField::with_gradient(
        |p: &Vec3<f64>| {
            let w = 1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            4.0 / (w * w)
        },
        |p: &Vec3<f64>| {
            let w = 1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            let c = -16.0 / (w * w * w);
            [c * p[0], c * p[1], c * p[2]]
        },
    );
    FieldPair::new(a, Polynomial::constant(0.0))
}

#[test]
fn unit_sphere_has_constant_curvature() {
    // With R(x,y,z,u) = g(R(x,y)z, u), the ratio R(u,v,u,v)/Gram is −K, so the
    // unit sphere gives −1 for every section.
    let f = stereographic_sphere();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let p: Vec3<f64> = [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)];
        let curv = curvature_at(&f, &p, DEFAULT_CURVATURE_STEP).unwrap();
        for _ in 0..10 {
            let u: Vec3<f64> = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let v: Vec3<f64> = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let Ok(mu) = curv.sectional(&u, &v) else { continue };
            assert!((mu + 1.0).abs() < 1e-6, "mu = {mu} at {p:?}");
        }
        // R(x,y)z = g(y,z)x − g(x,z)y on the unit sphere
        let g = curv.metric.g_dense();
        for s in 0..3 {
            for k in 0..3 {
                for j in 0..3 {
                    for i in 0..3 {
                        let expected = if s == k { g[j][i] } else { 0.0 } - if s == j { g[k][i] } else { 0.0 };
                        assert!((curv.r_up[s][k][j][i] - expected).abs() < 1e-6 * (1.0 + g[0][0]));
                    }
                }
            }
        }
    }
}

#[test]
fn f32_pipeline_tracks_f64() {
    use circgeo_core::fields::FieldPair as GenericPair;
    let p64 = [1.0, 0.0, 0.0];
    let p32 = [1.0f32, 0.0, 0.0];
    let g64 = christoffel_general(&FieldPair::paper_example(), &p64).unwrap();
    let g32 = christoffel_general(&GenericPair::<f32>::paper_example(), &p32).unwrap();
    for s in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                assert!((g64.gamma[s][i][j] - g32.gamma[s][i][j] as f64).abs() < 1e-6);
            }
        }
    }
    let c32 = curvature_at(&GenericPair::<f32>::paper_example(), &p32, 1e-2).unwrap();
    let c64 = curvature_at(&FieldPair::paper_example(), &p64, DEFAULT_CURVATURE_STEP).unwrap();
    assert!((c32.max_abs_up() as f64 - c64.max_abs_up()).abs() < 1e-2 * c64.max_abs_up());
}
