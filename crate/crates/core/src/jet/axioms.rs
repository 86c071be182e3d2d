//! The tangent-structure equations as data, checked on `ℝ^k`.
//!
//! Each entry produces both sides already composed with a parametrization of
//! the domain, so fibre products such as `T₂M` are covered exactly (the pair
//! `(x, v), (x, w)` is parametrized by `(x, v, w)`).

use serde::Serialize;

use super::{add_over, base_struct, select_blocks, tangent_map, StructKind};
use crate::expr::{equal_maps, EqVerdict, ExprError, SampleBox, SamplerConfig, SmoothMap};

pub struct Axiom {
    pub id: &'static str,
    pub formula: &'static str,
    build: fn(usize) -> (SmoothMap, SmoothMap),
}

impl Axiom {
    /// Both sides on the parameter space, for the instance at `ℝ^k`.
    pub fn sides(&self, k: usize) -> (SmoothMap, SmoothMap) {
        (self.build)(k)
    }
}

fn c(f: &SmoothMap, g: &SmoothMap) -> SmoothMap {
    f.compose(g).expect("axiom composites are well typed")
}

fn pair(f: &SmoothMap, g: &SmoothMap) -> SmoothMap {
    SmoothMap::tuple(&[f, g]).expect("axiom tuples share a domain")
}

fn s(kind: StructKind, k: usize) -> SmoothMap {
    base_struct(kind, k)
}

fn t(f: &SmoothMap) -> SmoothMap {
    tangent_map(f, 1)
}

use StructKind::{Add, Flip, Lift, Negate, Projection as P, Zero};

pub static AXIOMS: &[Axiom] = &[
    Axiom {
        id: "flip-involution",
        formula: "c∘c = id",
        build: |k| (c(&s(Flip, k), &s(Flip, k)), SmoothMap::identity(4 * k)),
    },
    Axiom {
        id: "flip-lift",
        formula: "c∘ℓ = ℓ",
        build: |k| (c(&s(Flip, k), &s(Lift, k)), s(Lift, k)),
    },
    Axiom {
        id: "lift-coassociative",
        formula: "T(ℓ)∘ℓ = ℓ_T∘ℓ",
        build: |k| (c(&t(&s(Lift, k)), &s(Lift, k)), c(&s(Lift, 2 * k), &s(Lift, k))),
    },
    Axiom {
        id: "flip-braid",
        formula: "c_T∘T(c)∘c_T = T(c)∘c_T∘T(c)",
        build: |k| {
            let ct = s(Flip, 2 * k);
            let tc = t(&s(Flip, k));
            (c(&ct, &c(&tc, &ct)), c(&tc, &c(&ct, &tc)))
        },
    },
    Axiom {
        id: "lift-flip",
        formula: "T(ℓ)∘c = c_T∘T(c)∘ℓ_T",
        build: |k| {
            let lhs = c(&t(&s(Lift, k)), &s(Flip, k));
            let rhs = c(&s(Flip, 2 * k), &c(&t(&s(Flip, k)), &s(Lift, 2 * k)));
            (lhs, rhs)
        },
    },
    Axiom {
        id: "projection-zero",
        formula: "p∘0 = id",
        build: |k| (c(&s(P, k), &s(Zero, k)), SmoothMap::identity(k)),
    },
    Axiom {
        id: "add-fibred",
        formula: "p∘+ = p∘π₀",
        build: |k| {
            let pairs = select_blocks(k, 3, &[0, 1, 0, 2]);
            (c(&s(P, k), &c(&s(Add, k), &pairs)), select_blocks(k, 3, &[0]))
        },
    },
    Axiom {
        id: "add-associative",
        formula: "(a + b) + d = a + (b + d)",
        build: |k| {
            let add = s(Add, k);
            let ab = c(&add, &select_blocks(k, 4, &[0, 1, 0, 2]));
            let bd = c(&add, &select_blocks(k, 4, &[0, 2, 0, 3]));
            let lhs = c(&add, &pair(&ab, &select_blocks(k, 4, &[0, 3])));
            let rhs = c(&add, &pair(&select_blocks(k, 4, &[0, 1]), &bd));
            (lhs, rhs)
        },
    },
    Axiom {
        id: "add-commutative",
        formula: "a + b = b + a",
        build: |k| {
            let add = s(Add, k);
            (c(&add, &select_blocks(k, 3, &[0, 1, 0, 2])), c(&add, &select_blocks(k, 3, &[0, 2, 0, 1])))
        },
    },
    Axiom {
        id: "add-unit",
        formula: "a + 0(p(a)) = a",
        build: |k| {
            let zp = c(&s(Zero, k), &s(P, k));
            (c(&s(Add, k), &pair(&SmoothMap::identity(2 * k), &zp)), SmoothMap::identity(2 * k))
        },
    },
    Axiom {
        id: "add-negate",
        formula: "a + (-a) = 0(p(a))",
        build: |k| {
            (
                c(&s(Add, k), &pair(&SmoothMap::identity(2 * k), &s(Negate, k))),
                c(&s(Zero, k), &s(P, k)),
            )
        },
    },
    Axiom {
        id: "lift-additive",
        formula: "ℓ(a + b) = ℓa +_{T(p)} ℓb",
        build: |k| {
            let lhs = c(&s(Lift, k), &c(&s(Add, k), &select_blocks(k, 3, &[0, 1, 0, 2])));
            let la = c(&s(Lift, k), &select_blocks(k, 3, &[0, 1]));
            let lb = c(&s(Lift, k), &select_blocks(k, 3, &[0, 2]));
            (lhs, c(&add_over(2, 1, k), &pair(&la, &lb)))
        },
    },
    Axiom {
        id: "lift-zero",
        formula: "ℓ∘0 = T(0)∘0",
        build: |k| (c(&s(Lift, k), &s(Zero, k)), c(&t(&s(Zero, k)), &s(Zero, k))),
    },
    Axiom {
        id: "flip-additive",
        formula: "c(a +_{T(p)} b) = c(a) +_p c(b)",
        build: |k| {
            let a = select_blocks(k, 6, &[0, 1, 2, 3]);
            let b = select_blocks(k, 6, &[0, 4, 2, 5]);
            let lhs = c(&s(Flip, k), &c(&add_over(2, 1, k), &pair(&a, &b)));
            let rhs = c(&add_over(2, 2, k), &pair(&c(&s(Flip, k), &a), &c(&s(Flip, k), &b)));
            (lhs, rhs)
        },
    },
    Axiom {
        id: "flip-zero",
        formula: "c∘T(0) = 0_T",
        build: |k| (c(&s(Flip, k), &t(&s(Zero, k))), s(Zero, 2 * k)),
    },
];

#[derive(Clone, Debug, Serialize)]
pub struct AxiomResult {
    pub id: &'static str,
    /// The equation is instantiated at `T^instance(ℝ^k)`.
    pub instance: usize,
    /// `T^functor` is applied to both sides.
    pub functor: usize,
    pub verdict: EqVerdict,
}

/// Check `T^functor` of the axiom instantiated at `T^instance(ℝ^k)` on the
/// cube `[-2, 2]^d` of the parameter space.
pub fn check_axiom(
    ax: &Axiom,
    k: usize,
    instance: usize,
    functor: usize,
    cfg: &SamplerConfig,
) -> Result<AxiomResult, ExprError> {
    let (l, r) = ax.sides(k << instance);
    let l = tangent_map(&l, functor);
    let r = tangent_map(&r, functor);
    let domain = SampleBox::cube(l.arity(), -2.0, 2.0);
    Ok(AxiomResult {
        id: ax.id,
        instance,
        functor,
        verdict: equal_maps(&l, &r, &domain, cfg)?,
    })
}

/// Every axiom at every `(instance, functor)` with `instance + functor <= depth`.
pub fn check_all(k: usize, depth: usize, cfg: &SamplerConfig) -> Result<Vec<AxiomResult>, ExprError> {
    let mut out = Vec::new();
    for ax in AXIOMS {
        for instance in 0..=depth {
            for functor in 0..=(depth - instance) {
                out.push(check_axiom(ax, k, instance, functor, cfg)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_axioms_hold_exactly_on_the_line() {
        for r in check_all(1, 1, &SamplerConfig::default()).unwrap() {
            assert_eq!(r.verdict, EqVerdict::EqualExact, "{} at ({}, {})", r.id, r.instance, r.functor);
        }
    }
}
