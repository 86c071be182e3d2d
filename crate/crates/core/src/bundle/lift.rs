//! Operations induced on `E` by the lift: `λ⁻¹`, addition, negation and
//! scalar action, each obtained by transporting the tangent-bundle operation
//! through `λ`.

use std::sync::Arc;

use super::{BundleSpec, Fibred};
use crate::error::{Error, Result};
use crate::expr::{poly_normalize, Expr, SmoothMap};
use crate::jet::{base_struct, from_fn, smooth, JetMap, JetPoint, MapRef, StructKind};
use crate::numeric::solve_jet;

/// The operations a lift induces on its total space.
#[derive(Clone, Debug)]
pub struct LiftOps {
    /// `TE → E`, defined on the image of `λ`.
    pub lambda_inv: MapRef,
    /// `a +_q b = λ⁻¹(λa +_p λb)` on `E ×_M E`.
    pub add: MapRef,
    /// `-a = λ⁻¹(-λa)`.
    pub negate: MapRef,
    /// `r • a = λ⁻¹(r · λa)`.
    pub scalar: MapRef,
    /// True when `λ⁻¹` is a closed-form expression, false when it is a
    /// Newton procedure.
    pub closed_form: bool,
}

/// For a lift of the shape `λ(x, a) = ((x, g(x)), (0, a + c(x)))` with
/// `q(x, a) = x`, return `c`. Such lifts have the closed-form inverse
/// `(X, G, V, W) ↦ (X, W - c(X))` on their image.
pub fn affine_lift_offset(spec: &BundleSpec) -> Option<Vec<Expr>> {
    let (k, d) = (spec.base_dim, spec.total_dim);
    if !spec.q_is_projection() {
        return None;
    }
    let lam = spec.lambda.components();
    if (0..k).any(|i| lam[i] != Expr::Var(i)) {
        return None;
    }
    if lam[k..d].iter().any(|e| e.var_bound() > k) {
        return None;
    }
    if lam[d..d + k].iter().any(|e| !e.is_zero()) {
        return None;
    }
    let mut offsets = Vec::with_capacity(d - k);
    for j in 0..d - k {
        let comp = &lam[d + k + j];
        let rest = comp.clone() - Expr::Var(k + j);
        let rest = match SmoothMap::new(d, vec![rest.clone()]).ok().and_then(|m| poly_normalize(&m).ok()) {
            Some(p) => p.components[0].to_expr(),
            None => strip_term(comp, k + j)?,
        };
        if rest.var_bound() > k {
            return None;
        }
        offsets.push(rest);
    }
    Some(offsets)
}

/// `e - x_v` when `e` is `x_v` or a sum containing `x_v` exactly once as a
/// term.
fn strip_term(e: &Expr, v: usize) -> Option<Expr> {
    match e {
        Expr::Var(i) if *i == v => Some(Expr::zero()),
        Expr::Sum(terms) => {
            let hits: Vec<usize> = terms.iter().enumerate().filter(|(_, t)| **t == Expr::Var(v)).map(|(i, _)| i).collect();
            if hits.len() != 1 {
                return None;
            }
            let rest: Vec<Expr> = terms.iter().enumerate().filter(|(i, _)| *i != hits[0]).map(|(_, t)| t.clone()).collect();
            Some(Expr::sum(rest))
        }
        _ => None,
    }
}

/// `(r, X, V) ↦ (X, r·V)` on `ℝ × TE`.
fn scale_tangent(d: usize) -> SmoothMap {
    let mut comps: Vec<Expr> = (1..=d).map(Expr::var).collect();
    comps.extend((0..d).map(|j| Expr::var(0) * Expr::var(1 + d + j)));
    SmoothMap::new(1 + 2 * d, comps).expect("within arity")
}

/// Solve `T^n(λ)(X) = target`, trying each starting point in turn.
pub(crate) fn invert_lift(lambda: &SmoothMap, target: &JetPoint, guesses: &[Vec<f64>]) -> Result<JetPoint> {
    let mut last = Error::NewtonDiverged { residual: f64::INFINITY };
    for g in guesses {
        match solve_jet(lambda, target, g) {
            Ok(x) => return Ok(x),
            Err(e) => last = e,
        }
    }
    Err(last)
}

impl LiftOps {
    pub fn from_spec(spec: &BundleSpec) -> LiftOps {
        match affine_lift_offset(spec) {
            Some(c) => LiftOps::closed_form(spec, &c),
            None => LiftOps::newton(spec),
        }
    }

    fn closed_form(spec: &BundleSpec, c: &[Expr]) -> LiftOps {
        let (k, d) = (spec.base_dim, spec.total_dim);
        let mut comps: Vec<Expr> = (0..k).map(Expr::var).collect();
        for (j, cj) in c.iter().enumerate() {
            comps.push(Expr::var(d + k + j) - cj.clone());
        }
        let inv = SmoothMap::new(2 * d, comps).expect("within arity");
        let lam = &spec.lambda;
        let pair = SmoothMap::product(lam, lam);
        let add = inv
            .compose(&base_struct(StructKind::Add, d).compose(&pair).expect("shapes"))
            .expect("shapes");
        let negate = inv
            .compose(&base_struct(StructKind::Negate, d).compose(lam).expect("shapes"))
            .expect("shapes");
        let scalar = inv
            .compose(
                &scale_tangent(d)
                    .compose(&SmoothMap::product(&SmoothMap::identity(1), lam))
                    .expect("shapes"),
            )
            .expect("shapes");
        LiftOps {
            lambda_inv: smooth(inv),
            add: smooth(add),
            negate: smooth(negate),
            scalar: smooth(scalar),
            closed_form: true,
        }
    }

    fn newton(spec: &BundleSpec) -> LiftOps {
        let d = spec.total_dim;
        let lam = Arc::new(spec.lambda.clone());
        let xiq = Arc::new(spec.xi_q());

        let l = lam.clone();
        let lambda_inv = from_fn("lambda inverse", 2 * d, d, move |y: &JetPoint| {
            let guess = y.base()[..d].to_vec();
            invert_lift(&l, y, &[guess])
        });

        let (l, z) = (lam.clone(), xiq.clone());
        let add_tan = base_struct(StructKind::Add, d);
        let add = from_fn("induced addition", 2 * d, d, move |x: &JetPoint| {
            let parts = x.split(&[d, d])?;
            let la = l.eval_jet(&parts[0])?;
            let lb = l.eval_jet(&parts[1])?;
            let sum = add_tan.eval_jet(&JetPoint::concat(&[la, lb])?)?;
            let a = parts[0].base().to_vec();
            invert_lift(&l, &sum, &[a, parts[1].base().to_vec(), z.eval(parts[0].base())?])
        });

        let (l, z) = (lam.clone(), xiq.clone());
        let neg_tan = base_struct(StructKind::Negate, d);
        let negate = from_fn("induced negation", d, d, move |x: &JetPoint| {
            let target = neg_tan.eval_jet(&l.eval_jet(x)?)?;
            let zq = z.eval(x.base())?;
            let mirrored: Vec<f64> = x.base().iter().zip(&zq).map(|(a, o)| 2.0 * o - a).collect();
            invert_lift(&l, &target, &[zq, mirrored, x.base().to_vec()])
        });

        let (l, z) = (lam, xiq);
        let scale = scale_tangent(d);
        let scalar = from_fn("induced scalar action", 1 + d, d, move |x: &JetPoint| {
            let parts = x.split(&[1, d])?;
            let target = scale.eval_jet(&JetPoint::concat(&[parts[0].clone(), l.eval_jet(&parts[1])?])?)?;
            let a = parts[1].base().to_vec();
            let zq = z.eval(&a)?;
            let r = parts[0].base()[0];
            let scaled: Vec<f64> = a.iter().zip(&zq).map(|(ai, oi)| oi + r * (ai - oi)).collect();
            invert_lift(&l, &target, &[scaled, a, zq])
        });

        LiftOps {
            lambda_inv,
            add,
            negate,
            scalar,
            closed_form: false,
        }
    }
}
