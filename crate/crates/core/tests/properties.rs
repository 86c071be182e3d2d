//! Randomized invariants of the expression and jet layers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use tanbun::expr::{parse_expr, scaled_residual, Expr, Fraction, Polynomial, SmoothMap};
use tanbun::jet::{self, base_struct, tangent_map, JetPoint, StructKind};

const ARITY: usize = 2;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0..ARITY).prop_map(Expr::var),
        (-5i64..=5).prop_map(Expr::int),
        (-5i64..=5, 1i64..=4).prop_map(|(p, q)| Expr::rational(p, q)),
    ]
}

/// Polynomials in `x0, x1` built with the smart constructors.
fn poly_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner.clone(), 1u32..=3).prop_map(|(b, n)| Expr::pow(b, n)),
            inner.prop_map(Expr::negate),
        ]
    })
}

/// Smooth expressions: polynomials plus `exp, sin, cos` and quotients by
/// `1 + (·)²`, which never vanish.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 20, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner.clone(), 1u32..=2).prop_map(|(b, n)| Expr::pow(b, n)),
            inner.clone().prop_map(Expr::negate),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(|e| Expr::exp(Expr::sin(e))),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::quotient(a, Expr::one() + Expr::pow(b, 2))),
        ]
    })
}

fn smooth_map(coarity: usize) -> impl Strategy<Value = SmoothMap> {
    prop::collection::vec(smooth_expr(), coarity).prop_map(|c| SmoothMap::new(ARITY, c).unwrap())
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, dim)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && scaled_residual(a, b) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_reparses_to_the_same_tree(e in smooth_expr()) {
        let back = parse_expr(&e.to_string(), ARITY).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn canonical_form_respects_sum_and_product(a in poly_expr(), b in poly_expr()) {
        let pa = Polynomial::from_expr(&a, ARITY).unwrap();
        let pb = Polynomial::from_expr(&b, ARITY).unwrap();
        let sum = Polynomial::from_expr(&(a.clone() + b.clone()), ARITY).unwrap();
        let prod = Polynomial::from_expr(&(a * b), ARITY).unwrap();
        prop_assert_eq!(sum, pa.add(&pb));
        prop_assert_eq!(prod, pa.mul(&pb));
    }

    #[test]
    fn canonical_form_evaluates_like_the_tree(e in poly_expr(), x in -3i64..=3, y in 1i64..=4) {
        let p = Polynomial::from_expr(&e, ARITY).unwrap();
        let args = [BigRational::from_integer(BigInt::from(x)), BigRational::new(BigInt::from(1), BigInt::from(y))];
        let exact = p.eval_rational(&args);
        let back = Polynomial::from_expr(&p.to_expr(), ARITY).unwrap();
        prop_assert_eq!(back.eval_rational(&args), exact.clone());
        let float = e.eval(&[x as f64, 1.0 / y as f64]).unwrap();
        let want = exact.to_f64().unwrap();
        prop_assert!(scaled_residual(&[float], &[want]) < 1e-9, "{float} vs {want}");
    }

    #[test]
    fn fractions_compare_up_to_common_factors(a in poly_expr(), b in poly_expr(), c in poly_expr()) {
        let den = |e: &Expr| Expr::one() + Expr::pow(e.clone(), 2);
        let plain = Expr::quotient(a.clone(), den(&b));
        let padded = Expr::quotient(a.clone() * den(&c), den(&b) * den(&c));
        let f = |e: &Expr| Fraction::from_expr(e, ARITY, 200).unwrap();
        prop_assert!(f(&plain).same_as(&f(&padded)));
        prop_assert!(!f(&plain).same_as(&f(&(padded + Expr::one()))));
    }

    #[test]
    fn tangent_is_functorial(f in smooth_map(2), g in smooth_map(2), x in point(4)) {
        let whole = tangent_map(&g.compose(&f).unwrap(), 1);
        let parts = tangent_map(&g, 1).compose(&tangent_map(&f, 1)).unwrap();
        let (a, b) = (whole.eval(&x).unwrap(), parts.eval(&x).unwrap());
        prop_assert!(close(&a, &b, 1e-9), "{a:?} vs {b:?}");
    }

    #[test]
    fn projection_is_natural(f in smooth_map(3), x in point(4)) {
        // p ∘ T(f) = f ∘ p
        let tf = jet::smooth(f.clone()).eval_jet(&JetPoint::new(1, ARITY, x.clone()).unwrap()).unwrap();
        let fx = f.eval(&x[..ARITY]).unwrap();
        prop_assert!(close(tf.base(), &fx, 1e-12));
    }

    #[test]
    fn lift_and_flip_are_natural(f in smooth_map(2), x in point(8)) {
        // ℓ∘T(f) = T²(f)∘ℓ and c∘T²(f) = T²(f)∘c
        let lift = base_struct(StructKind::Lift, ARITY);
        let flip = base_struct(StructKind::Flip, ARITY);
        let (t1, t2) = (tangent_map(&f, 1), tangent_map(&f, 2));
        let a = lift.compose(&t1).unwrap().eval(&x[..4]).unwrap();
        let b = t2.compose(&lift).unwrap().eval(&x[..4]).unwrap();
        prop_assert!(close(&a, &b, 1e-9), "{a:?} vs {b:?}");
        let a = flip.compose(&t2).unwrap().eval(&x).unwrap();
        let b = t2.compose(&flip).unwrap().eval(&x).unwrap();
        prop_assert!(close(&a, &b, 1e-9), "{a:?} vs {b:?}");
    }

    #[test]
    fn jets_match_symbolic_and_finite_differences(f in smooth_map(2), x in point(2), v in point(2)) {
        let pushed = jet::smooth(f.clone())
            .eval_jet(&JetPoint::new(1, ARITY, [x.clone(), v.clone()].concat()).unwrap())
            .unwrap();
        let symbolic = tangent_map(&f, 1).eval(&[x.clone(), v.clone()].concat()).unwrap();
        prop_assert!(close(pushed.flat(), &symbolic, 1e-9));
        let h = 1e-5;
        let at = |s: f64| f.eval(&[x[0] + s * v[0], x[1] + s * v[1]]).unwrap();
        let (fp, fm) = (at(h), at(-h));
        let fd: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let scale = 1.0 + f.eval(&x).unwrap().iter().fold(0.0f64, |m, y| m.max(y.abs()));
        prop_assert!(close(pushed.block(1), &fd, 1e-5 * scale), "{:?} vs {fd:?}", pushed.block(1));
    }

    #[test]
    fn second_order_jets_match_iterated_tangents(f in smooth_map(1), x in point(8)) {
        let pushed = jet::tangent(&jet::smooth(f.clone()), 2).eval(&x).unwrap();
        let symbolic = tangent_map(&f, 2).eval(&x).unwrap();
        prop_assert!(close(&pushed, &symbolic, 1e-9), "{pushed:?} vs {symbolic:?}");
    }
}
