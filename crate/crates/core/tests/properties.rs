use circgeo_core::circulant::CirculantMatrix as Circ;
use circgeo_core::{CirculantMatrix, FieldPair, MetricAtPoint, Polynomial};
use num_rational::Ratio;
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn circulant() -> impl Strategy<Value = CirculantMatrix> {
    (entry(), entry(), entry()).prop_map(|(a, b, c)| CirculantMatrix::new(a, b, c))
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [entry(), entry(), entry()]
}

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

proptest! {
    #[test]
    fn product_is_commutative_and_closed(m1 in circulant(), m2 in circulant()) {
        prop_assert_eq!(m1 * m2, m2 * m1);
        let d1 = m1.to_dense();
        let d2 = m2.to_dense();
        let mut dense = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                dense[i][j] = (0..3).map(|k| d1[i][k] * d2[k][j]).sum();
            }
        }
        let p = (m1 * m2).to_dense();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((p[i][j] - dense[i][j]).abs() <= 1e-12 * (1.0 + dense[i][j].abs()));
            }
        }
    }

    #[test]
    fn determinant_is_multiplicative(m1 in circulant(), m2 in circulant()) {
        let lhs = (m1 * m2).det();
        let rhs = m1.det() * m2.det();
        let scale = (m1.a.abs() + m1.b.abs() + m1.c.abs()).powi(3) * (m2.a.abs() + m2.b.abs() + m2.c.abs()).powi(3);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn inverse_gives_identity(m in circulant()) {
        prop_assume!(m.det().abs() > 1e-6);
        let max = m.a.abs().max(m.b.abs()).max(m.c.abs());
        // entries of m·m⁻¹ carry rounding ~ cond(m)·eps
        let cond_bound = max.powi(3) / m.det().abs();
        prop_assume!(cond_bound < 1e3);
        let p = m * m.inverse().unwrap();
        prop_assert!((p.a - 1.0).abs() <= 1e-12);
        prop_assert!(p.b.abs() <= 1e-12 && p.c.abs() <= 1e-12);
    }

    #[test]
    fn shift_is_an_isometry(a in entry(), b in entry(), x in vec3(), y in vec3()) {
        prop_assume!(((a - b) * (a + 2.0 * b)).abs() > 1e-6);
        let m = MetricAtPoint::from_values(a, b);
        let q = CirculantMatrix::shift();
        let lhs = m.inner(&q.apply(&x), &q.apply(&y));
        let rhs = m.inner(&x, &y);
        prop_assert!(ulps(lhs, rhs) <= 4, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn definiteness_flag_matches_quadratic_form(a in entry(), b in entry(), xs in proptest::collection::vec(vec3(), 100)) {
        let m = MetricAtPoint::from_values(a, b);
        prop_assume!(((a - b) * (a + 2.0 * b)).abs() > 1e-6);
        let all_positive = xs.iter().filter(|x| x.iter().any(|v| *v != 0.0)).all(|x| m.inner(x, x) > 0.0);
        if m.definite {
            prop_assert!(all_positive);
        } else {
            // an eigenvector of a non-positive eigenvalue witnesses indefiniteness
            let witness = if a + 2.0 * b <= 0.0 { [1.0, 1.0, 1.0] } else { [1.0, -1.0, 0.0] };
            prop_assert!(m.inner(&witness, &witness) <= 0.0);
        }
    }

    #[test]
    fn metric_inverse_residual(x in vec3()) {
        let f = FieldPair::paper_example();
        let s = f.domain_check(&x);
        prop_assume!(s.nondegenerate && (s.a - s.b).abs() > 0.1 && (s.a + 2.0 * s.b).abs() > 0.1);
        let m = f.metric_at(&x).unwrap();
        let scale = (s.a.abs() + s.b.abs()).powi(2) / s.d.abs();
        prop_assert!(m.inverse_residual() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn polynomial_display_round_trips(coefs in proptest::collection::vec((-50i32..50, 0u32..3, 0u32..3, 0u32..3), 0..6)) {
        let text = if coefs.is_empty() {
            "0".to_string()
        } else {
            coefs.iter().map(|(c, e1, e2, e3)| format!("{c}/4*x1^{e1}*x2^{e2}*x3^{e3}")).collect::<Vec<_>>().join(" + ")
        };
        let p = Polynomial::parse(&text).unwrap();
        prop_assert_eq!(Polynomial::parse(&p.to_string()).unwrap(), p);
    }
}

#[test]
fn rational_algebra_is_exact() {
    type Q = Ratio<i64>;
    let r = |n: i64, d: i64| Q::new(n, d);
    let q = Circ::<Q>::shift();
    assert_eq!(q.pow(3), Circ::identity());
    let m = Circ::new(r(4, 1), r(1, 1), r(1, 1));
    assert_eq!(m.inverse_exact().unwrap(), Circ::new(r(5, 18), r(-1, 18), r(-1, 18)));
    let n = Circ::new(r(1, 3), r(-2, 5), r(7, 2));
    assert_eq!(n * n.inverse_exact().unwrap(), Circ::identity());
    assert_eq!((m * n).det(), m.det() * n.det());
    assert_eq!(Circ::new(r(1, 1), r(1, 1), r(1, 1)).inverse_exact(), None);
}
