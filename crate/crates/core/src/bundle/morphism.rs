//! Maps between bundles and the squares they must make commute.

use super::{check_equal, comp, slot, tup, BundleSpec, Domain, Fibred, LiftOps};
use crate::expr::{SamplerConfig, SmoothMap};
use crate::jet::{smooth, tangent_map, MapRef};
use crate::report::Check;

/// A smooth map between total spaces. Its base map is `q'∘f∘ξ`.
#[derive(Clone, Debug)]
pub struct BundleMorphism {
    pub source: BundleSpec,
    pub target: BundleSpec,
    pub f: SmoothMap,
}

impl BundleMorphism {
    pub fn new(source: BundleSpec, target: BundleSpec, f: SmoothMap) -> crate::Result<BundleMorphism> {
        if f.arity() != source.total_dim || f.coarity() != target.total_dim {
            return Err(crate::Error::DimensionMismatch(format!(
                "a morphism from {} to {} must map R^{} to R^{}",
                source.name, target.name, source.total_dim, target.total_dim
            )));
        }
        Ok(BundleMorphism { source, target, f })
    }

    pub fn base_map(&self) -> SmoothMap {
        self.target
            .q
            .compose(&self.f)
            .and_then(|g| g.compose(&self.source.xi))
            .expect("morphism shapes")
    }
}

/// `q'f = f₀q` and `λ'f = T(f)λ`.
pub fn linearity_checks(m: &BundleMorphism, cfg: &SamplerConfig) -> Vec<Check> {
    let on_e = Domain::Box(m.source.total_box.clone());
    let f = smooth(m.f.clone());
    let f0 = smooth(m.base_map());
    let tf = smooth(tangent_map(&m.f, 1));
    vec![
        Check::new(
            "H-base",
            "q'∘f = f₀∘q",
            check_equal(&comp(&m.target.q_ref(), &f), &comp(&f0, &m.source.q_ref()), &on_e, cfg),
        ),
        Check::new(
            "H-lift",
            "λ'∘f = T(f)∘λ",
            check_equal(&comp(&m.target.lambda_ref(), &f), &comp(&tf, &m.source.lambda_ref()), &on_e, cfg),
        ),
    ]
}

/// `f(a + b) = f(a) + f(b)` for the given additions on source and target.
pub fn additivity_check(m: &BundleMorphism, add: &MapRef, add_target: &MapRef, cfg: &SamplerConfig) -> Check {
    let d = m.source.total_dim;
    let f = smooth(m.f.clone());
    let (a, b) = (slot(2 * d, 0, d), slot(2 * d, d, d));
    let lhs = comp(&f, &comp(add, &tup(&[a.clone(), b.clone()])));
    let rhs = comp(add_target, &tup(&[comp(&f, &a), comp(&f, &b)]));
    Check::new("H-add", "f(a + b) = f(a) + f(b)", check_equal(&lhs, &rhs, &m.source.pairs(), cfg))
}

/// `f(r • a) = r • f(a)`.
pub fn scalar_check(m: &BundleMorphism, scalar: &MapRef, scalar_target: &MapRef, cfg: &SamplerConfig) -> Check {
    let d = m.source.total_dim;
    let f = smooth(m.f.clone());
    let (r, a) = (slot(1 + d, 0, 1), slot(1 + d, 1, d));
    let lhs = comp(&f, &comp(scalar, &tup(&[r.clone(), a.clone()])));
    let rhs = comp(scalar_target, &tup(&[r, comp(&f, &a)]));
    Check::new("H-scalar", "f(r • a) = r • f(a)", check_equal(&lhs, &rhs, &m.source.domain(1, 1), cfg))
}

/// Linearity of `m` plus additivity for the additions induced by the lifts.
pub fn check_morphism(m: &BundleMorphism, cfg: &SamplerConfig) -> Vec<Check> {
    let mut out = linearity_checks(m, cfg);
    let src = LiftOps::from_spec(&m.source);
    let tgt = LiftOps::from_spec(&m.target);
    out.push(additivity_check(m, &src.add, &tgt.add, cfg));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    fn trivial() -> BundleSpec {
        BundleSpec::new(
            "trivial",
            1,
            2,
            parse_map("x0", 2).unwrap(),
            parse_map("x0, 0", 1).unwrap(),
            parse_map("x0, 0, 0, x1", 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn doubling_is_linear() {
        let m = BundleMorphism::new(trivial(), trivial(), parse_map("x0, 2*x1", 2).unwrap()).unwrap();
        for c in check_morphism(&m, &SamplerConfig::default()) {
            assert!(c.verdict.is_pass(), "{c:?}");
        }
    }

    #[test]
    fn squaring_breaks_the_lift_square() {
        let m = BundleMorphism::new(trivial(), trivial(), parse_map("x0, x1^2", 2).unwrap()).unwrap();
        let checks = linearity_checks(&m, &SamplerConfig::default());
        assert!(checks[0].verdict.is_pass());
        assert!(checks[1].verdict.is_fail());
        // at (0, 1) the tangent blocks differ: λ'f gives 1, T(f)λ gives 0
        let lhs = comp(&m.target.lambda_ref(), &smooth(m.f.clone())).eval(&[0.0, 1.0]).unwrap();
        let rhs = comp(&smooth(tangent_map(&m.f, 1)), &m.source.lambda_ref()).eval(&[0.0, 1.0]).unwrap();
        assert_eq!(lhs, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(rhs, vec![0.0, 0.0, 0.0, 0.0]);
    }
}
