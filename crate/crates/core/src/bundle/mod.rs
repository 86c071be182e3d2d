//! Chart-local bundles with a lift, and the law checks on them.
//!
//! A bundle is a total space `E ⊆ ℝ^d` over a base `M ⊆ ℝ^k` with a
//! projection `q: E → M`, a zero section `ξ: M → E` and a lift
//! `λ: E → TE`. Optionally it declares an addition on `E ×_M E`, a scalar
//! action `ℝ × E → E` and a negation, which are checked against the usual
//! laws and (in the Cockett–Cruttwell suite) against the operations induced
//! by the lift.

mod conjugate;
pub mod domain;
mod lift;
mod morphism;

use serde::Serialize;

pub use domain::{check_equal, compare_on_points, fibre_constraint, fibre_param, Domain};
pub use conjugate::{conjugate, simplify};
pub use lift::{affine_lift_offset, LiftOps};
pub use morphism::{additivity_check, check_morphism, linearity_checks, scalar_check, BundleMorphism};

use crate::error::{Error, Result};
use crate::expr::{Expr, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{base_struct, compose, select, smooth, tangent, tangent_map, tuple, MapRef, StructKind};
use crate::report::{Check, Verdict};

#[derive(Clone, Debug, Serialize)]
pub struct BundleSpec {
    pub name: String,
    pub base_dim: usize,
    pub total_dim: usize,
    pub base_box: SampleBox,
    pub total_box: SampleBox,
    #[serde(serialize_with = "ser_map")]
    pub q: SmoothMap,
    #[serde(serialize_with = "ser_map")]
    pub xi: SmoothMap,
    #[serde(serialize_with = "ser_map")]
    pub lambda: SmoothMap,
    #[serde(serialize_with = "ser_opt_map")]
    pub add: Option<SmoothMap>,
    #[serde(serialize_with = "ser_opt_map")]
    pub scalar: Option<SmoothMap>,
    #[serde(serialize_with = "ser_opt_map")]
    pub negate: Option<SmoothMap>,
}

fn ser_map<S: serde::Serializer>(m: &SmoothMap, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}

fn ser_opt_map<S: serde::Serializer>(m: &Option<SmoothMap>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => s.serialize_str(&m.to_string()),
        None => s.serialize_none(),
    }
}

fn expect_shape(what: &str, m: &SmoothMap, arity: usize, coarity: usize) -> Result<()> {
    if m.arity() != arity || m.coarity() != coarity {
        return Err(Error::DimensionMismatch(format!(
            "{what} must map R^{arity} to R^{coarity}, but maps R^{} to R^{}",
            m.arity(),
            m.coarity()
        )));
    }
    Ok(())
}

impl BundleSpec {
    /// A bundle with default sampling boxes `[-2, 2]^k` and `[-2, 2]^d`.
    pub fn new(name: &str, base_dim: usize, total_dim: usize, q: SmoothMap, xi: SmoothMap, lambda: SmoothMap) -> Result<BundleSpec> {
        let spec = BundleSpec {
            name: name.to_string(),
            base_dim,
            total_dim,
            base_box: SampleBox::cube(base_dim, -2.0, 2.0),
            total_box: SampleBox::cube(total_dim, -2.0, 2.0),
            q,
            xi,
            lambda,
            add: None,
            scalar: None,
            negate: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_boxes(mut self, base_box: SampleBox, total_box: SampleBox) -> Result<BundleSpec> {
        self.base_box = base_box;
        self.total_box = total_box;
        self.validate()?;
        Ok(self)
    }

    pub fn with_add(mut self, add: SmoothMap) -> Result<BundleSpec> {
        self.add = Some(add);
        self.validate()?;
        Ok(self)
    }

    pub fn with_scalar(mut self, scalar: SmoothMap) -> Result<BundleSpec> {
        self.scalar = Some(scalar);
        self.validate()?;
        Ok(self)
    }

    pub fn with_negate(mut self, negate: SmoothMap) -> Result<BundleSpec> {
        self.negate = Some(negate);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, d) = (self.base_dim, self.total_dim);
        if k > d {
            return Err(Error::DimensionMismatch(format!("base dimension {k} exceeds total dimension {d}")));
        }
        expect_shape("q", &self.q, d, k)?;
        expect_shape("xi", &self.xi, k, d)?;
        expect_shape("lambda", &self.lambda, d, 2 * d)?;
        if let Some(a) = &self.add {
            expect_shape("add", a, 2 * d, d)?;
        }
        if let Some(s) = &self.scalar {
            expect_shape("scalar", s, 1 + d, d)?;
        }
        if let Some(n) = &self.negate {
            expect_shape("negate", n, d, d)?;
        }
        if self.base_box.dim() != k || self.total_box.dim() != d {
            return Err(Error::DimensionMismatch("sampling boxes do not match the dimensions".into()));
        }
        Ok(())
    }

    pub fn lambda_ref(&self) -> MapRef {
        smooth(self.lambda.clone())
    }
}

impl Fibred for BundleSpec {
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

/// A projection `q: E → M` with a section `ξ` and sampling boxes; the part
/// of a bundle the algebraic laws need.
pub trait Fibred {
    fn name(&self) -> &str;
    fn base_dim(&self) -> usize;
    fn total_dim(&self) -> usize;
    fn q(&self) -> &SmoothMap;
    fn xi(&self) -> &SmoothMap;
    fn base_box(&self) -> &SampleBox;
    fn total_box(&self) -> &SampleBox;

    fn fibre_dim(&self) -> usize {
        self.total_dim() - self.base_dim()
    }

    /// True when `q` is `(x_0, ..., x_{k-1})`, so fibre products have an
    /// exact parametrization.
    fn q_is_projection(&self) -> bool {
        self.q().components().iter().enumerate().all(|(i, c)| *c == Expr::Var(i))
    }

    fn q_ref(&self) -> MapRef {
        smooth(self.q().clone())
    }

    fn xi_ref(&self) -> MapRef {
        smooth(self.xi().clone())
    }

    /// `ℝ^scalars × E ×_M ... ×_M E` (`copies` factors), laid out as the
    /// scalars followed by each point of `E`.
    fn domain(&self, scalars: usize, copies: usize) -> Domain {
        let (k, d) = (self.base_dim(), self.total_dim());
        let sbox = SampleBox::cube(scalars, -2.0, 2.0);
        if copies <= 1 {
            return Domain::Box(sbox.product(self.total_box()));
        }
        if self.q_is_projection() {
            let tb = self.total_box();
            let fibre_box = SampleBox::new(tb.lo[k..].to_vec(), tb.hi[k..].to_vec());
            let mut params = sbox.product(self.base_box());
            for _ in 0..copies {
                params = params.product(&fibre_box);
            }
            let param = SmoothMap::product(&SmoothMap::identity(scalars), &fibre_param(k, d, copies));
            return Domain::Param { param, params };
        }
        let mut ambient = sbox.clone();
        for _ in 0..copies {
            ambient = ambient.product(self.total_box());
        }
        let drop = SmoothMap::select(scalars + copies * d, &(scalars..scalars + copies * d).collect::<Vec<_>>());
        let constraint = fibre_constraint(self.q(), copies).compose(&drop).expect("constraint on the points");
        Domain::Constrained {
            ambient,
            constraint: smooth(constraint),
        }
    }

    /// `E ×_M E` as a domain.
    fn pairs(&self) -> Domain {
        self.domain(0, 2)
    }

    /// `ξ ∘ q`.
    fn xi_q(&self) -> SmoothMap {
        self.xi().compose(self.q()).expect("validated shapes")
    }
}

/// Points `offset .. offset + d` of an ambient vector of length `arity`.
pub(crate) fn slot(arity: usize, offset: usize, d: usize) -> MapRef {
    select(arity, &(offset..offset + d).collect::<Vec<_>>())
}

pub(crate) fn comp(outer: &MapRef, inner: &MapRef) -> MapRef {
    compose(outer, inner).expect("law composites are well typed")
}

pub(crate) fn tup(parts: &[MapRef]) -> MapRef {
    tuple(parts).expect("law tuples share a domain")
}

/// The four laws of a pre-differential bundle: `qξ = id`, `ℓλ = T(λ)λ`,
/// `pλ = ξq` and `λξ = 0ξ`.
pub fn pre_differential(spec: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let d = spec.total_dim;
    let on_m = Domain::Box(spec.base_box.clone());
    let on_e = Domain::Box(spec.total_box.clone());
    let q = spec.q_ref();
    let xi = spec.xi_ref();
    let lam = spec.lambda_ref();
    let lift = smooth(base_struct(StructKind::Lift, d));
    let proj = smooth(base_struct(StructKind::Projection, d));
    let zero = smooth(base_struct(StructKind::Zero, d));
    let t_lam = smooth(tangent_map(&spec.lambda, 1));
    vec![
        Check::new(
            "L1",
            "q∘ξ = id",
            check_equal(&comp(&q, &xi), &smooth(SmoothMap::identity(spec.base_dim)), &on_m, cfg),
        ),
        Check::new("L2", "ℓ∘λ = T(λ)∘λ", check_equal(&comp(&lift, &lam), &comp(&t_lam, &lam), &on_e, cfg)),
        Check::new("L3", "p∘λ = ξ∘q", check_equal(&comp(&proj, &lam), &comp(&xi, &q), &on_e, cfg)),
        Check::new("L4", "λ∘ξ = 0∘ξ", check_equal(&comp(&lam, &xi), &comp(&zero, &xi), &on_m, cfg)),
    ]
}

/// Laws of an addition (and optional negation) on `E ×_M E`.
pub fn addition_laws(spec: &dyn Fibred, add: &MapRef, negate: Option<&MapRef>, cfg: &SamplerConfig) -> Vec<Check> {
    let d = spec.total_dim();
    let q = spec.q_ref();
    let xiq = smooth(spec.xi_q());
    let plus = |arity: usize, i: usize, j: usize| comp(add, &tup(&[slot(arity, i * d, d), slot(arity, j * d, d)]));
    let mut out = Vec::new();

    let e2 = spec.domain(0, 2);
    let sum = plus(2 * d, 0, 1);
    out.push(Check::new(
        "A-base",
        "q(a + b) = q(a)",
        check_equal(&comp(&q, &sum), &comp(&q, &slot(2 * d, 0, d)), &e2, cfg),
    ));
    out.push(Check::new("A-comm", "a + b = b + a", check_equal(&sum, &plus(2 * d, 1, 0), &e2, cfg)));

    let e3 = spec.domain(0, 3);
    let ab_c = comp(add, &tup(&[plus(3 * d, 0, 1), slot(3 * d, 2 * d, d)]));
    let a_bc = comp(add, &tup(&[slot(3 * d, 0, d), plus(3 * d, 1, 2)]));
    out.push(Check::new("A-assoc", "(a + b) + c = a + (b + c)", check_equal(&ab_c, &a_bc, &e3, cfg)));

    let e1 = spec.domain(0, 1);
    let id = smooth(SmoothMap::identity(d));
    let unit = comp(add, &tup(&[id.clone(), xiq.clone()]));
    out.push(Check::new("A-unit", "a + ξ(q(a)) = a", check_equal(&unit, &id, &e1, cfg)));

    if let Some(neg) = negate {
        let inv = comp(add, &tup(&[id.clone(), neg.clone()]));
        out.push(Check::new("A-inverse", "a + (-a) = ξ(q(a))", check_equal(&inv, &xiq, &e1, cfg)));
    }
    out
}

fn constant_map(arity: usize, v: i64) -> MapRef {
    smooth(SmoothMap::new(arity, vec![Expr::int(v)]).expect("closed"))
}

/// Module laws of a scalar action `•: ℝ × E → E` with respect to `add`.
pub fn module_laws(spec: &dyn Fibred, scalar: &MapRef, add: &MapRef, cfg: &SamplerConfig) -> Vec<Check> {
    let d = spec.total_dim();
    let q = spec.q_ref();
    let xiq = smooth(spec.xi_q());
    let act = |r: MapRef, a: MapRef| comp(scalar, &tup(&[r, a]));
    let plus = |a: MapRef, b: MapRef| comp(add, &tup(&[a, b]));
    let var = |arity: usize, i: usize| select(arity, &[i]);
    let mut out = Vec::new();

    // E with no scalars
    let e1 = spec.domain(0, 1);
    let a = smooth(SmoothMap::identity(d));
    out.push(Check::new("M1", "1 • a = a", check_equal(&act(constant_map(d, 1), a.clone()), &a, &e1, cfg)));
    out.push(Check::new("M6", "0 • a = ξ(q(a))", check_equal(&act(constant_map(d, 0), a.clone()), &xiq, &e1, cfg)));

    // ℝ × E
    let r_e = spec.domain(1, 1);
    let a1 = slot(1 + d, 1, d);
    let r1 = var(1 + d, 0);
    out.push(Check::new(
        "M3",
        "q(r • a) = q(a)",
        check_equal(&comp(&q, &act(r1, a1.clone())), &comp(&q, &a1), &r_e, cfg),
    ));

    // ℝ² × E
    let rs_e = spec.domain(2, 1);
    let a2 = slot(2 + d, 2, d);
    let (r, s) = (var(2 + d, 0), var(2 + d, 1));
    let rs = smooth(SmoothMap::new(2 + d, vec![Expr::var(0) * Expr::var(1)]).expect("closed"));
    let r_plus_s = smooth(SmoothMap::new(2 + d, vec![Expr::var(0) + Expr::var(1)]).expect("closed"));
    out.push(Check::new(
        "M2",
        "r • (s • a) = (rs) • a",
        check_equal(&act(r.clone(), act(s.clone(), a2.clone())), &act(rs, a2.clone()), &rs_e, cfg),
    ));
    out.push(Check::new(
        "M5",
        "(r + s) • a = r • a + s • a",
        check_equal(&act(r_plus_s, a2.clone()), &plus(act(r, a2.clone()), act(s, a2)), &rs_e, cfg),
    ));

    // ℝ × E ×_M E
    let r_e2 = spec.domain(1, 2);
    let n = 1 + 2 * d;
    let (r, x, y) = (var(n, 0), slot(n, 1, d), slot(n, 1 + d, d));
    out.push(Check::new(
        "M4",
        "r • (a + b) = r • a + r • b",
        check_equal(
            &act(r.clone(), plus(x.clone(), y.clone())),
            &plus(act(r.clone(), x), act(r, y)),
            &r_e2,
            cfg,
        ),
    ));
    out
}

/// Everything checkable from the declared data alone: the pre-differential
/// laws plus the laws of any declared addition, negation and scalar action.
pub fn declared_laws(spec: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let mut out = pre_differential(spec, cfg);
    if let Some(add) = &spec.add {
        let add = smooth(add.clone());
        let neg = spec.negate.clone().map(smooth);
        out.extend(addition_laws(spec, &add, neg.as_ref(), cfg));
        if let Some(s) = &spec.scalar {
            out.extend(module_laws(spec, &smooth(s.clone()), &add, cfg));
        }
    }
    out
}

/// `pλ` is idempotent and split by `ξ` and `q`.
pub fn coalgebra(spec: &BundleSpec, cfg: &SamplerConfig) -> Vec<Check> {
    let on_e = Domain::Box(spec.total_box.clone());
    let on_m = Domain::Box(spec.base_box.clone());
    let p_lam = comp(&smooth(base_struct(StructKind::Projection, spec.total_dim)), &spec.lambda_ref());
    vec![
        Check::new("C-idem", "pλ∘pλ = pλ", check_equal(&comp(&p_lam, &p_lam), &p_lam, &on_e, cfg)),
        Check::new("C-split", "ξ∘q = pλ", check_equal(&smooth(spec.xi_q()), &p_lam, &on_e, cfg)),
        Check::new(
            "C-section",
            "q∘ξ = id",
            check_equal(&comp(&spec.q_ref(), &spec.xi_ref()), &smooth(SmoothMap::identity(spec.base_dim)), &on_m, cfg),
        ),
    ]
}

/// `T(+)` on `TE ×_{TM} TE`, taking the pair `((a, v), (b, w))`.
pub fn tangent_addition(add: &MapRef, d: usize) -> MapRef {
    let regroup: Vec<usize> = (0..d).chain(2 * d..3 * d).chain(d..2 * d).chain(3 * d..4 * d).collect();
    let t_add = match add.as_smooth() {
        Some(a) => smooth(tangent_map(a, 1)),
        None => tangent(add, 1),
    };
    comp(&t_add, &select(4 * d, &regroup))
}

/// Laws of the operations induced by the lift: the additive-bundle laws,
/// additivity of `λ` into `p` and into `T(q)`, and agreement with any
/// declared operations.
pub fn induced_laws(spec: &BundleSpec, ops: &LiftOps, cfg: &SamplerConfig) -> Vec<Check> {
    let d = spec.total_dim;
    let mut out: Vec<Check> = addition_laws(spec, &ops.add, Some(&ops.negate), cfg)
        .into_iter()
        .map(|c| Check::new(format!("I{}", c.id), c.description, c.verdict))
        .collect();
    let e2 = spec.pairs();
    let lam = spec.lambda_ref();
    let (a, b) = (slot(2 * d, 0, d), slot(2 * d, d, d));
    let lam_sum = comp(&lam, &comp(&ops.add, &tup(&[a.clone(), b.clone()])));
    let lams = tup(&[comp(&lam, &a), comp(&lam, &b)]);
    out.push(Check::new(
        "I-lift-p",
        "λ(a + b) = λa +_p λb",
        check_equal(&lam_sum, &comp(&smooth(base_struct(StructKind::Add, d)), &lams), &e2, cfg),
    ));
    out.push(Check::new(
        "I-lift-Tq",
        "λ(a + b) = λa +_T(q) λb",
        check_equal(&lam_sum, &comp(&tangent_addition(&ops.add, d), &lams), &e2, cfg),
    ));
    if let Some(add) = &spec.add {
        out.push(Check::new(
            "I-declared-add",
            "declared + = induced +",
            check_equal(&smooth(add.clone()), &ops.add, &e2, cfg),
        ));
    }
    if let Some(neg) = &spec.negate {
        out.push(Check::new(
            "I-declared-negate",
            "declared - = induced -",
            check_equal(&smooth(neg.clone()), &ops.negate, &spec.domain(0, 1), cfg),
        ));
    }
    if let Some(s) = &spec.scalar {
        out.push(Check::new(
            "I-declared-scalar",
            "declared • = induced •",
            check_equal(&smooth(s.clone()), &ops.scalar, &spec.domain(1, 1), cfg),
        ));
    }
    out
}

/// Aggregate verdict over a list of checks.
pub fn overall(checks: &[Check]) -> Verdict {
    Verdict::aggregate(checks.iter().map(|c| &c.verdict))
}
