//! The universality conditions on a lift, each stated as a pullback square,
//! and the check that they agree.
//!
//! * Rosický: `(λ, q)` over the cospan `((T(q), p), (0, ξ))`.
//! * Cockett–Cruttwell: `μ = λπ₀ +_{T(q)} 0π₁` over `(T(q), 0)`.
//! * Strong: `ν = λπ₀ +_p T(ξ)π₁` over `(p, ξ)`.
//! * Combined: `T(λ)λπ₀ +_{T(p)} T(λ)0π₁` over `((T²(q), T(p)), (00, 0ξ))`.
//!
//! The Cockett–Cruttwell square needs the addition induced by the lift,
//! which only exists when the Rosický square is a pullback. The combined
//! square uses only the tangent bundle's addition and is checked at depth 0,
//! since it already lives two levels up.

mod square;

use serde::Serialize;

pub use square::{check_pullback, cone, CommutingSquare, DepthReport, PullbackVerdict};

use crate::bundle::{tangent_addition, BundleSpec, Domain, Fibred, LiftOps};
use crate::error::{Error, Result};
use crate::expr::{Expr, SampleBox, SamplerConfig, SmoothMap};
use crate::jet::{add_over, base_struct, compose, select, smooth, struct_map, tangent_map, tuple, MapRef, StructKind};
use crate::report::{Check, Verdict};

fn comp(f: &MapRef, g: &MapRef) -> MapRef {
    compose(f, g).expect("square maps are well typed")
}

fn tup(parts: &[MapRef]) -> MapRef {
    tuple(parts).expect("square legs share a domain")
}

fn st(kind: StructKind, k: usize) -> MapRef {
    smooth(base_struct(kind, k))
}

fn pair_legs(d: usize) -> (MapRef, MapRef) {
    (select(2 * d, &(0..d).collect::<Vec<_>>()), select(2 * d, &(d..2 * d).collect::<Vec<_>>()))
}

pub fn rosicky_square(spec: &BundleSpec) -> CommutingSquare {
    let (k, d) = (spec.base_dim, spec.total_dim);
    CommutingSquare {
        name: "rosicky".into(),
        apex: Domain::Box(spec.total_box.clone()),
        top: spec.lambda_ref(),
        left: spec.q_ref(),
        right: tup(&[smooth(tangent_map(&spec.q, 1)), st(StructKind::Projection, d)]),
        bottom: tup(&[st(StructKind::Zero, k), spec.xi_ref()]),
    }
}

/// Apex `E ×_M E`, cone `μ(a, b) = λa +_{T(q)} 0b`.
pub fn cockett_square(spec: &BundleSpec, ops: &LiftOps) -> CommutingSquare {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let (a, b) = pair_legs(d);
    let mu = comp(
        &tangent_addition(&ops.add, d),
        &tup(&[comp(&spec.lambda_ref(), &a), comp(&st(StructKind::Zero, d), &b)]),
    );
    CommutingSquare {
        name: "cockett".into(),
        apex: spec.pairs(),
        top: mu,
        left: comp(&spec.q_ref(), &a),
        right: smooth(tangent_map(&spec.q, 1)),
        bottom: st(StructKind::Zero, k),
    }
}

/// `(e, v) ↦ (e, q(e), v)`, parametrizing `E ×_{q,p} TM`.
fn strong_param(spec: &BundleSpec) -> SmoothMap {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let mut comps: Vec<Expr> = (0..d).map(Expr::var).collect();
    comps.extend(spec.q.components().iter().cloned());
    comps.extend((d..d + k).map(Expr::var));
    SmoothMap::new(d + k, comps).expect("within arity")
}

/// Apex `E ×_{q,p} TM` in coordinates `(e, m, v)`, cone
/// `ν(e, (m, v)) = λe +_p T(ξ)(m, v)`.
pub fn strong_square(spec: &BundleSpec) -> CommutingSquare {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let n = d + 2 * k;
    let e = select(n, &(0..d).collect::<Vec<_>>());
    let mv = select(n, &(d..n).collect::<Vec<_>>());
    let m = select(n, &(d..d + k).collect::<Vec<_>>());
    let nu = comp(
        &st(StructKind::Add, d),
        &tup(&[comp(&spec.lambda_ref(), &e), comp(&smooth(tangent_map(&spec.xi, 1)), &mv)]),
    );
    CommutingSquare {
        name: "strong".into(),
        apex: Domain::Param {
            param: strong_param(spec),
            params: spec.total_box.product(&SampleBox::cube(k, -2.0, 2.0)),
        },
        top: nu,
        left: m,
        right: st(StructKind::Projection, d),
        bottom: spec.xi_ref(),
    }
}

/// Apex `E ×_M E`, cone `T(λ)λa +_{T(p)} T(λ)0b` into `T²E`.
pub fn combined_square(spec: &BundleSpec) -> CommutingSquare {
    let (k, d) = (spec.base_dim, spec.total_dim);
    let (a, b) = pair_legs(d);
    let t_lam = smooth(tangent_map(&spec.lambda, 1));
    let top = comp(
        &smooth(add_over(2, 1, d)),
        &tup(&[
            comp(&t_lam, &comp(&spec.lambda_ref(), &a)),
            comp(&t_lam, &comp(&st(StructKind::Zero, d), &b)),
        ]),
    );
    CommutingSquare {
        name: "combined".into(),
        apex: spec.pairs(),
        top,
        left: comp(&spec.q_ref(), &a),
        right: tup(&[smooth(tangent_map(&spec.q, 2)), smooth(struct_map(StructKind::Projection, d, 1))]),
        bottom: tup(&[
            comp(&st(StructKind::Zero, 2 * k), &st(StructKind::Zero, k)),
            comp(&st(StructKind::Zero, d), &spec.xi_ref()),
        ]),
    }
}

/// The operations induced by the lift, refused unless the Rosický square is
/// a pullback at depth 0.
pub fn induce_operations(spec: &BundleSpec, cfg: &SamplerConfig) -> Result<LiftOps> {
    let v = check_pullback(&rosicky_square(spec), 0, cfg);
    if !v.is_pass() {
        return Err(Error::Refused(format!(
            "the lift of {} is not universal ({}), so it induces no addition",
            spec.name,
            describe(&v.aggregate)
        )));
    }
    Ok(LiftOps::from_spec(spec))
}

fn describe(v: &Verdict) -> String {
    match v {
        Verdict::Fail { witness } => format!("{} at {:?}", witness.detail, witness.point),
        Verdict::Unknown { reason } | Verdict::Skipped { reason } => reason.clone(),
        other => other.label().to_string(),
    }
}

/// Verdicts of all four squares on one bundle.
#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub rosicky: PullbackVerdict,
    pub cockett: PullbackVerdict,
    pub strong: PullbackVerdict,
    pub combined: PullbackVerdict,
}

/// A verdict for a square that could not be formed.
fn not_formed(name: &str, because: &PullbackVerdict) -> PullbackVerdict {
    let aggregate = match &because.aggregate {
        Verdict::Fail { witness } => {
            let mut w = witness.clone();
            w.detail = format!("no induced addition: {}", w.detail);
            Verdict::Fail { witness: w }
        }
        other => Verdict::Unknown {
            reason: format!("no induced addition: Rosický square {}", describe(other)),
        },
    };
    PullbackVerdict {
        square: name.into(),
        commutation: Verdict::Skipped {
            reason: "square not formed".into(),
        },
        depths: Vec::new(),
        depth_checked: None,
        aggregate,
    }
}

impl Equivalence {
    pub fn all(&self) -> [&PullbackVerdict; 4] {
        [&self.rosicky, &self.cockett, &self.strong, &self.combined]
    }

    /// All four pass or all four fail.
    pub fn consistent(&self) -> bool {
        let all = self.all();
        all.iter().all(|v| v.is_pass()) || all.iter().all(|v| v.is_fail())
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out: Vec<Check> = self
            .all()
            .iter()
            .map(|v| square_check(v))
            .collect();
        let agree = if self.consistent() {
            Verdict::PassExact
        } else {
            let labels: Vec<String> = self.all().iter().map(|v| format!("{} {}", v.square, v.aggregate.label())).collect();
            Verdict::Unknown {
                reason: format!("the universality squares disagree: {}", labels.join(", ")),
            }
        };
        out.push(Check::new("U-agree", "the four squares agree", agree));
        out
    }
}

/// The verdict of one square as a check, with the deepest level reached.
pub fn square_check(v: &PullbackVerdict) -> Check {
    let depth = match v.depth_checked {
        Some(t) => format!(" (through T^{t})"),
        None => String::new(),
    };
    Check::new(format!("U-{}", v.square), format!("{}{depth}", square_description(&v.square)), v.aggregate.clone())
}

fn square_description(name: &str) -> &'static str {
    match name {
        "rosicky" => "(λ, q) is a pullback of ((T(q), p), (0, ξ))",
        "cockett" => "(λπ₀ +_T(q) 0π₁, qπ₀) is a pullback of (T(q), 0)",
        "strong" => "(λπ₀ +_p T(ξ)π₁, π₁) is a pullback of (p, ξ)",
        "combined" => "(T(λ)λπ₀ +_T(p) T(λ)0π₁, qπ₀) is a pullback of ((T²(q), T(p)), (00, 0ξ))",
        _ => "pullback square",
    }
}

/// Run all four squares: the Rosický, Cockett–Cruttwell and strong squares
/// to `depth`, the combined one at depth 0.
pub fn cross_check(spec: &BundleSpec, depth: usize, cfg: &SamplerConfig) -> Equivalence {
    let rosicky = check_pullback(&rosicky_square(spec), depth, cfg);
    let cockett = if rosicky.is_pass() {
        check_pullback(&cockett_square(spec, &LiftOps::from_spec(spec)), depth, cfg)
    } else {
        not_formed("cockett", &rosicky)
    };
    let strong = check_pullback(&strong_square(spec), depth, cfg);
    let combined = check_pullback(&combined_square(spec), 0, cfg);
    Equivalence {
        rosicky,
        cockett,
        strong,
        combined,
    }
}
