//! Iterated tangent bundles of `ℝ^k` and their structure maps.
//!
//! Points of `T^n(ℝ^k)` are [`JetPoint`]s. `T` of a map is available two
//! ways: symbolically through [`tangent_map`], and by pushing nested dual
//! numbers through the original map ([`JetMap::eval_jet`]). The structure
//! maps `p, 0, +, -, ℓ, c` are plain linear [`SmoothMap`]s built by
//! [`struct_map`].

pub mod axioms;
mod maps;
mod number;
mod point;

use serde::Serialize;

pub use maps::{chain, compose, from_fn, identity, product, select, select_fast, smooth, tangent, tuple, JetMap, MapRef, Tangent};
pub use number::{Jet, MAX_ORDER};
pub use point::JetPoint;

use crate::expr::{poly_normalize, Expr, SmoothMap};

/// `T^n(f)` as a symbolic map on `ℝ^{2^n · arity}`.
///
/// Each application sends `f` to `(x, v) ↦ (f(x), Df(x)·v)`. Polynomial maps
/// are differentiated in canonical form; others symbolically.
pub fn tangent_map(f: &SmoothMap, n: usize) -> SmoothMap {
    let mut g = f.clone();
    for _ in 0..n {
        g = tangent_once(&g);
    }
    g
}

fn tangent_once(f: &SmoothMap) -> SmoothMap {
    let a = f.arity();
    let mut comps = Vec::with_capacity(2 * f.coarity());
    if let Ok(p) = poly_normalize(f) {
        let mut tangents = Vec::with_capacity(f.coarity());
        for c in &p.components {
            comps.push(c.extend(2 * a).to_expr());
            let mut t = crate::expr::Polynomial::zero(2 * a);
            for j in 0..a {
                let dj = c.derivative(j).extend(2 * a);
                if !dj.is_zero() {
                    t = t.add(&dj.mul(&crate::expr::Polynomial::var(2 * a, a + j)));
                }
            }
            tangents.push(t.to_expr());
        }
        comps.extend(tangents);
    } else {
        comps.extend(f.components().iter().cloned());
        for c in f.components() {
            let terms = (0..a)
                .map(|j| Expr::product(vec![c.derivative(j), Expr::var(a + j)]))
                .collect();
            comps.push(Expr::sum(terms));
        }
    }
    SmoothMap::new(2 * a, comps).expect("tangent map stays within its arity")
}

/// The six structure maps of the tangent bundle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StructKind {
    /// `p: TM → M`
    Projection,
    /// `0: M → TM`
    Zero,
    /// `+: T₂M → TM`, on pairs `(x, v, x', w)` ignoring `x'`
    Add,
    /// `-: TM → TM`
    Negate,
    /// `ℓ: TM → T²M`
    Lift,
    /// `c: T²M → T²M`
    Flip,
}

/// `x ↦ (x[blocks[0]], x[blocks[1]], ...)` where `x` is split into
/// `nblocks` blocks of width `k`.
pub fn select_blocks(k: usize, nblocks: usize, blocks: &[usize]) -> SmoothMap {
    let idx: Vec<usize> = blocks.iter().flat_map(|&b| b * k..(b + 1) * k).collect();
    SmoothMap::select(nblocks * k, &idx)
}

fn block_vars(k: usize, b: usize) -> Vec<Expr> {
    (b * k..(b + 1) * k).map(Expr::var).collect()
}

/// The structure map `kind` at `ℝ^k`.
pub fn base_struct(kind: StructKind, k: usize) -> SmoothMap {
    let zeros = || vec![Expr::zero(); k];
    let (arity, comps): (usize, Vec<Expr>) = match kind {
        StructKind::Projection => (2 * k, block_vars(k, 0)),
        StructKind::Zero => (k, [block_vars(k, 0), zeros()].concat()),
        StructKind::Add => {
            let sums = (0..k).map(|i| Expr::var(k + i) + Expr::var(3 * k + i)).collect();
            (4 * k, [block_vars(k, 0), sums].concat())
        }
        StructKind::Negate => {
            let negs = (0..k).map(|i| Expr::var(k + i).negate()).collect();
            (2 * k, [block_vars(k, 0), negs].concat())
        }
        StructKind::Lift => (2 * k, [block_vars(k, 0), zeros(), zeros(), block_vars(k, 1)].concat()),
        StructKind::Flip => (
            4 * k,
            [block_vars(k, 0), block_vars(k, 2), block_vars(k, 1), block_vars(k, 3)].concat(),
        ),
    };
    SmoothMap::new(arity, comps).expect("structure map within arity")
}

/// `T^j(α)` for the structure map `α = kind` at `ℝ^k`. The component at
/// `T^i M` is `struct_map(kind, 2^i · k, j)`.
pub fn struct_map(kind: StructKind, k: usize, j: usize) -> SmoothMap {
    tangent_map(&base_struct(kind, k), j)
}

/// Addition of two points of `T^n(ℝ^k)` along tangent index `i`
/// (`1 <= i <= n`): blocks containing `i` are added, the others must agree
/// and are taken from the first summand. The input is the pair `(A, B)`
/// concatenated.
///
/// Built as `T^{n-i}(+)` at `T^{i-1}(ℝ^k)` after regrouping the pair.
pub fn add_over(n: usize, i: usize, k: usize) -> SmoothMap {
    assert!(1 <= i && i <= n, "index {i} out of range for T^{n}");
    let big_k = k << (i - 1);
    let total = k << n;
    let low = 1usize << (i - 1);
    let mut idx = vec![0usize; 2 * total];
    for r in 0..(1usize << (n - i)) {
        for t in 0..2 {
            for s in 0..low {
                for c in 0..k {
                    let src = (s + t * low + r * 2 * low) * k + c;
                    idx[r * 4 * big_k + t * big_k + s * k + c] = src;
                    idx[r * 4 * big_k + (2 + t) * big_k + s * k + c] = total + src;
                }
            }
        }
    }
    let shuffle = SmoothMap::select(2 * total, &idx);
    struct_map(StructKind::Add, big_k, n - i)
        .compose(&shuffle)
        .expect("regrouped pair matches the addition's domain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_of_square() {
        let f = crate::expr::parse_map("x0^2", 1).unwrap();
        assert_eq!(tangent_map(&f, 1).to_string(), "(x0^2, 2*x0*x1)");
    }

    #[test]
    fn add_over_matches_blockwise_sum() {
        for n in 1..=3 {
            for i in 1..=n {
                let k = 2;
                let m = add_over(n, i, k);
                let len = k << n;
                let x: Vec<f64> = (0..2 * len).map(|v| (v * v % 17) as f64 - 8.0).collect();
                let out = m.eval(&x).unwrap();
                for s in 0..(1usize << n) {
                    for c in 0..k {
                        let a = x[s * k + c];
                        let b = x[len + s * k + c];
                        let want = if s & (1 << (i - 1)) != 0 { a + b } else { a };
                        assert_eq!(out[s * k + c], want, "n={n} i={i} s={s}");
                    }
                }
            }
        }
    }
}
