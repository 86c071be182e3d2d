//! Vector bundles and their translation to and from differential bundles:
//! `Ψ` builds the lift from the scalar action, `Φ` recovers the scalar
//! action from the lift.

use serde::Serialize;

use crate::bundle::{
    addition_laws, check_equal, linearity_checks, module_laws, overall, scalar_check, simplify, BundleMorphism,
    BundleSpec, Domain, Fibred,
};
use crate::error::{Error, Result};
use crate::expr::{sample_points, scaled_residual, Expr, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{compose, smooth, tangent, tangent_map, MapRef};
use crate::numeric::solve_base;
use crate::report::{Check, Verdict};
use crate::universal::induce_operations;

const UNIQUENESS_SAMPLES: usize = 16;

/// A fibrewise addition and scalar action on `q: E → M`.
#[derive(Clone, Debug, Serialize)]
pub struct VectorBundleSpec {
    pub name: String,
    pub base_dim: usize,
    pub total_dim: usize,
    pub base_box: SampleBox,
    pub total_box: SampleBox,
    #[serde(serialize_with = "ser_map")]
    pub q: SmoothMap,
    #[serde(serialize_with = "ser_map")]
    pub xi: SmoothMap,
    #[serde(serialize_with = "ser_ref")]
    pub add: MapRef,
    #[serde(serialize_with = "ser_ref")]
    pub scalar: MapRef,
    #[serde(skip)]
    pub negate: Option<MapRef>,
}

fn ser_map<S: serde::Serializer>(m: &SmoothMap, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

fn ser_ref<S: serde::Serializer>(m: &MapRef, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m.as_smooth() {
        Some(f) => s.serialize_str(&f.to_string()),
        None => s.serialize_str(&format!("{m:?}")),
    }
}

impl Fibred for VectorBundleSpec {
    fn name(&self) -> &str {
        &self.name
    }
    fn base_dim(&self) -> usize {
        self.base_dim
    }
    fn total_dim(&self) -> usize {
        self.total_dim
    }
    fn q(&self) -> &SmoothMap {
        &self.q
    }
    fn xi(&self) -> &SmoothMap {
        &self.xi
    }
    fn base_box(&self) -> &SampleBox {
        &self.base_box
    }
    fn total_box(&self) -> &SampleBox {
        &self.total_box
    }
}

impl VectorBundleSpec {
    /// The declared addition and scalar action of `spec`.
    pub fn from_declared(spec: &BundleSpec) -> Result<VectorBundleSpec> {
        let (Some(add), Some(scalar)) = (&spec.add, &spec.scalar) else {
            return Err(Error::Invalid(format!("{} declares no addition and scalar action", spec.name)));
        };
        Ok(VectorBundleSpec {
            name: spec.name.clone(),
            base_dim: spec.base_dim,
            total_dim: spec.total_dim,
            base_box: spec.base_box.clone(),
            total_box: spec.total_box.clone(),
            q: spec.q.clone(),
            xi: spec.xi.clone(),
            add: smooth(add.clone()),
            scalar: smooth(scalar.clone()),
            negate: spec.negate.clone().map(smooth),
        })
    }

    /// Addition and module laws.
    pub fn laws(&self, cfg: &SamplerConfig) -> Vec<Check> {
        let mut out = addition_laws(self, &self.add, self.negate.as_ref(), cfg);
        out.extend(module_laws(self, &self.scalar, &self.add, cfg));
        out
    }
}

/// `e ↦ ((0, e), (1, 0))`, a point of `T(ℝ × E)`.
fn unit_direction(d: usize) -> SmoothMap {
    let mut comps = vec![Expr::zero()];
    comps.extend((0..d).map(Expr::var));
    comps.push(Expr::one());
    comps.extend(vec![Expr::zero(); d]);
    SmoothMap::new(d, comps).expect("within arity")
}

/// `λ(e) = T(•)((0, e), (1, 0))`, without checking any laws. Symbolic when
/// the scalar action is.
pub fn psi_lift(vb: &VectorBundleSpec) -> MapRef {
    let d = vb.total_dim;
    match vb.scalar.as_smooth() {
        Some(s) => smooth(simplify(tangent_map(s, 1).compose(&unit_direction(d)).expect("shapes"))),
        None => compose(&tangent(&vb.scalar, 1), &smooth(unit_direction(d))).expect("shapes"),
    }
}

/// The differential bundle of a vector bundle. Refused when the module
/// laws fail or the scalar action has no symbolic form.
pub fn psi(vb: &VectorBundleSpec, cfg: &SamplerConfig) -> Result<BundleSpec> {
    let laws = vb.laws(cfg);
    if !overall(&laws).is_pass() {
        let failed: Vec<&str> = laws.iter().filter(|c| !c.verdict.is_pass()).map(|c| c.id.as_str()).collect();
        return Err(Error::Refused(format!("{} is not a vector bundle: {} fail", vb.name, failed.join(", "))));
    }
    let lambda = psi_lift(vb);
    let Some(lambda) = lambda.as_smooth() else {
        return Err(Error::Invalid(format!("the scalar action of {} has no symbolic form", vb.name)));
    };
    let mut out = BundleSpec::new(&vb.name, vb.base_dim, vb.total_dim, vb.q.clone(), vb.xi.clone(), lambda.clone())?
        .with_boxes(vb.base_box.clone(), vb.total_box.clone())?;
    if let Some(a) = vb.add.as_smooth() {
        out = out.with_add(a.clone())?;
    }
    if let Some(s) = vb.scalar.as_smooth() {
        out = out.with_scalar(s.clone())?;
    }
    if let Some(n) = vb.negate.as_ref().and_then(|n| n.as_smooth()) {
        out = out.with_negate(n.clone())?;
    }
    Ok(out)
}

fn simplified(m: MapRef) -> MapRef {
    match m.as_smooth() {
        Some(s) => smooth(simplify(s.clone())),
        None => m,
    }
}

/// The vector bundle of a differential bundle: `r • a = λ⁻¹(r ·_p λa)` and
/// the induced addition. Refused unless the lift is universal.
pub fn phi(db: &BundleSpec, cfg: &SamplerConfig) -> Result<VectorBundleSpec> {
    let ops = induce_operations(db, cfg)?;
    Ok(VectorBundleSpec {
        name: db.name.clone(),
        base_dim: db.base_dim,
        total_dim: db.total_dim,
        base_box: db.base_box.clone(),
        total_box: db.total_box.clone(),
        q: db.q.clone(),
        xi: db.xi.clone(),
        add: simplified(ops.add),
        scalar: simplified(ops.scalar),
        negate: Some(simplified(ops.negate)),
    })
}

fn refused(id: &str, description: &str, e: &Error) -> Check {
    Check::new(id, description, Verdict::fail(Vec::new(), e.to_string()))
}

fn exact(same: bool, what: &str) -> Verdict {
    if same {
        Verdict::PassExact
    } else {
        Verdict::fail(Vec::new(), format!("{what} changed"))
    }
}

/// `Φ(Ψ(vb))` has the scalar action and addition of `vb`, and the same `q`
/// and `ξ`.
pub fn roundtrip_vector_bundle(vb: &VectorBundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let db = match psi(vb, cfg) {
        Ok(db) => db,
        Err(e) => return vec![refused("R-psi", "Ψ is defined", &e)],
    };
    let back = match phi(&db, cfg) {
        Ok(v) => v,
        Err(e) => return vec![refused("R-phi", "Φ(Ψ(vb)) is defined", &e)],
    };
    vec![
        Check::new(
            "R-scalar",
            "Φ(Ψ(•)) = •",
            check_equal(&back.scalar, &vb.scalar, &vb.domain(1, 1), cfg),
        ),
        Check::new("R-add", "Φ(Ψ(+)) = +", check_equal(&back.add, &vb.add, &vb.pairs(), cfg)),
        Check::new("R-fixed", "q and ξ are untouched", exact(back.q == vb.q && back.xi == vb.xi, "q or ξ")),
    ]
}

/// Two Newton starts recover the same `r • a` from `λ(r • a) = r ·_p λa`.
fn scalar_uniqueness(db: &BundleSpec, vb: &VectorBundleSpec, cfg: &SamplerConfig) -> Verdict {
    let d = db.total_dim;
    let b = SampleBox::cube(1, -2.0, 2.0).product(&db.total_box);
    let mut worst: f64 = 0.0;
    for p in sample_points(&b, UNIQUENESS_SAMPLES, cfg.seed) {
        let (r, a) = (p[0], &p[1..]);
        let (Ok(la), Ok(zq)) = (db.lambda.eval(a), db.xi_q().eval(a)) else {
            return Verdict::Unknown { reason: format!("λ undefined at {a:?}") };
        };
        let target: Vec<f64> = la[..d].iter().copied().chain(la[d..].iter().map(|v| r * v)).collect();
        let first = solve_base(&db.lambda, &target, a);
        let second = solve_base(&db.lambda, &target, &zq);
        let via_phi = vb.scalar.eval(&p);
        match (first, second, via_phi) {
            (Ok(x), Ok(y), Ok(z)) => {
                let gap = scaled_residual(&x, &y).max(scaled_residual(&x, &z));
                if gap > 1e-7 {
                    return Verdict::fail(p, format!("two starts give {x:?} and {y:?}"));
                }
                worst = worst.max(gap);
            }
            _ => return Verdict::Unknown { reason: format!("no preimage of r ·_p λa found at {p:?}") },
        }
    }
    Verdict::PassNumeric { max_residual: worst }
}

/// `Ψ(Φ(db))` has the lift of `db`; the recovered scalar action obeys the
/// module laws and is uniquely determined.
pub fn roundtrip_differential_bundle(db: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let vb = match phi(db, cfg) {
        Ok(v) => v,
        Err(e) => return vec![refused("R-phi", "Φ is defined", &e)],
    };
    let mut out: Vec<Check> = vb
        .laws(cfg)
        .into_iter()
        .map(|c| Check::new(format!("R-{}", c.id), c.description, c.verdict))
        .collect();
    out.push(Check::new(
        "R-lift",
        "Ψ(Φ(λ)) = λ",
        check_equal(&psi_lift(&vb), &db.lambda_ref(), &Domain::Box(db.total_box.clone()), cfg),
    ));
    out.push(Check::new("R-fixed", "q and ξ are untouched", exact(vb.q == db.q && vb.xi == db.xi, "q or ξ")));
    out.push(Check::new("R-unique", "r • a is the only solution of λx = r ·_p λa", scalar_uniqueness(db, &vb, cfg)));
    out
}

/// Both round trips: from the declared vector-bundle structure when there
/// is one, and from the lift.
pub fn roundtrip_check(db: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let mut out = roundtrip_differential_bundle(db, cfg);
    if let Ok(vb) = VectorBundleSpec::from_declared(db) {
        out.extend(roundtrip_vector_bundle(&vb, cfg));
    }
    out
}

/// `m` commutes with the lifts exactly when it preserves the scalar actions
/// recovered by `Φ`.
pub fn morphism_transport_check(m: &BundleMorphism, cfg: &SamplerConfig) -> Vec<Check> {
    let lift = linearity_checks(m, cfg).swap_remove(1);
    let actions = phi(&m.source, cfg).and_then(|s| Ok((s, phi(&m.target, cfg)?)));
    let scalar = match actions {
        Ok((s, t)) => scalar_check(m, &s.scalar, &t.scalar, cfg),
        Err(e) => refused("H-scalar", "f(r • a) = r • f(a)", &e),
    };
    let agree = if lift.verdict.is_pass() == scalar.verdict.is_pass() && lift.verdict.is_fail() == scalar.verdict.is_fail() {
        Verdict::PassExact
    } else {
        Verdict::fail(
            Vec::new(),
            format!("lift square {}, scalar action {}", lift.verdict.label(), scalar.verdict.label()),
        )
    };
    vec![lift, scalar, Check::new("H-agree", "λ-linear ⇔ preserves •", agree)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::expr::parse_map;

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn trivial_lift_from_scalar_action() {
        let vb = VectorBundleSpec::from_declared(&corpus::trivial(1, 1)).unwrap();
        let lam = psi_lift(&vb);
        assert_eq!(lam.as_smooth().unwrap().to_string(), "(x0, 0, 0, x1)");
        // the zero section goes to zero
        assert_eq!(lam.eval(&[0.3, 0.0]).unwrap(), vec![0.3, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn trivial_scalar_action_from_lift() {
        let vb = phi(&corpus::trivial(1, 1), &cfg()).unwrap();
        assert_eq!(vb.scalar.eval(&[3.0, 0.5, 2.0]).unwrap(), vec![0.5, 6.0]);
        assert_eq!(vb.scalar.eval(&[1.0, 0.5, 2.0]).unwrap(), vec![0.5, 2.0]);
        assert_eq!(vb.scalar.eval(&[0.0, 0.5, 2.0]).unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn conjugated_lift_matches_conjugation() {
        let c = corpus::conjugated_1_1();
        let vb = VectorBundleSpec::from_declared(&c).unwrap();
        let v = check_equal(&psi_lift(&vb), &c.lambda_ref(), &Domain::Box(c.total_box.clone()), &cfg());
        assert!(v.is_pass(), "{v:?}");
    }

    #[test]
    fn round_trips_on_positive_bundles() {
        for spec in [corpus::trivial(1, 1), corpus::trivial(2, 3), corpus::tangent_bundle(2), corpus::conjugated_1_1()] {
            for c in roundtrip_check(&spec, &cfg()) {
                assert!(c.verdict.is_pass(), "{}: {c:?}", spec.name);
            }
        }
    }

    #[test]
    fn counterexample_refused_at_phi() {
        let checks = roundtrip_check(&corpus::bump_counterexample(), &cfg());
        assert_eq!(checks[0].id, "R-phi");
        assert!(checks[0].verdict.is_fail());
    }

    #[test]
    fn transport_of_morphisms() {
        let t = corpus::trivial(1, 1);
        let double = BundleMorphism::new(t.clone(), t.clone(), parse_map("x0, 2*x1", 2).unwrap()).unwrap();
        let checks = morphism_transport_check(&double, &cfg());
        assert!(checks.iter().all(|c| c.verdict.is_pass()), "{checks:?}");
        let shift = BundleMorphism::new(t.clone(), t.clone(), parse_map("x0, x1 + 1", 2).unwrap()).unwrap();
        let checks = morphism_transport_check(&shift, &cfg());
        assert!(checks[0].verdict.is_fail() && checks[1].verdict.is_fail());
        assert!(checks[2].verdict.is_pass());
    }
}
