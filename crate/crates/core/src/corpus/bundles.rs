//! Builders for the example bundles.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::{conjugate, BundleSpec};
use crate::expr::{parse_map, Expr, SmoothMap};
use crate::jet::{base_struct, StructKind};

fn map(text: &str, arity: usize) -> SmoothMap {
    parse_map(text, arity).unwrap_or_else(|e| panic!("built-in map {text:?}: {e}"))
}

fn vars(range: std::ops::Range<usize>) -> Vec<Expr> {
    range.map(Expr::var).collect()
}

/// `ℝ^k × ℝ^n → ℝ^k` with the linear structure on the fibres, including a
/// declared addition, negation and scalar action.
pub fn trivial(k: usize, n: usize) -> BundleSpec {
    let d = k + n;
    let q = SmoothMap::new(d, vars(0..k)).expect("projection");
    let xi = SmoothMap::new(k, [vars(0..k), vec![Expr::zero(); n]].concat()).expect("zero section");
    let lambda = SmoothMap::new(d, [vars(0..k), vec![Expr::zero(); d], vars(k..d)].concat()).expect("lift");
    let add_fibre = (0..n).map(|j| Expr::var(k + j) + Expr::var(d + k + j)).collect();
    let add = SmoothMap::new(2 * d, [vars(0..k), add_fibre].concat()).expect("addition");
    let neg = SmoothMap::new(d, [vars(0..k), (k..d).map(|j| Expr::var(j).negate()).collect()].concat()).expect("negation");
    let scale = (0..n).map(|j| Expr::var(0) * Expr::var(1 + k + j)).collect();
    let scalar = SmoothMap::new(1 + d, [vars(1..1 + k), scale].concat()).expect("scalar action");
    BundleSpec::new(&format!("trivial_{k}_{n}"), k, d, q, xi, lambda)
        .and_then(|b| b.with_add(add))
        .and_then(|b| b.with_negate(neg))
        .and_then(|b| b.with_scalar(scalar))
        .expect("trivial bundle is well formed")
}

/// `Tℝ^k` with `q = p`, `ξ = 0` and `λ = ℓ`, built from the structure maps.
pub fn tangent_bundle(k: usize) -> BundleSpec {
    let t = trivial(k, k);
    BundleSpec::new(
        &format!("tangent_bundle_{k}"),
        k,
        2 * k,
        base_struct(StructKind::Projection, k),
        base_struct(StructKind::Zero, k),
        base_struct(StructKind::Lift, k),
    )
    .and_then(|b| b.with_add(t.add.clone().expect("declared")))
    .and_then(|b| b.with_negate(base_struct(StructKind::Negate, k)))
    .and_then(|b| b.with_scalar(t.scalar.clone().expect("declared")))
    .expect("tangent bundle is well formed")
}

/// The trivial line bundle transported along `(x, a) ↦ (x, a(1 + x²))`.
pub fn conjugated_1_1() -> BundleSpec {
    let phi = map("x0, x1*(1 + x0^2)", 2);
    let inv = map("x0, x1/(1 + x0^2)", 2);
    conjugate(&trivial(1, 1), "conjugated_1_1", &phi, &inv).expect("conjugation")
}

/// The trivial bundle `trivial(k, n)` transported along a random
/// polynomial diffeomorphism `φ = B∘A` with
/// `A(x, a) = (x + β·a², a)` and `B(x, a) = (x, a + α·x²)` (coefficient
/// vectors drawn from `seed`), whose inverse is again polynomial.
pub fn conjugated_random(k: usize, n: usize, seed: u64) -> BundleSpec {
    let d = k + n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coef = || Expr::rational(rng.gen_range(-4i64..=4), 10);
    let beta: Vec<Expr> = (0..k).map(|_| coef()).collect();
    let alpha: Vec<Expr> = (0..n).map(|_| coef()).collect();
    let sq = |i: usize| Expr::pow(Expr::var(i), 2);
    // A and its inverse shift base coordinate i by β_i·a_{i mod n}²
    let shear_a = |sign: i64| {
        let mut c: Vec<Expr> = (0..k).map(|i| Expr::var(i) + Expr::int(sign) * beta[i].clone() * sq(k + i % n)).collect();
        c.extend(vars(k..d));
        SmoothMap::new(d, c).expect("within arity")
    };
    // B and its inverse shift fibre coordinate j by α_j·x_{j mod k}²
    let shear_b = |sign: i64| {
        let mut c = vars(0..k);
        c.extend((0..n).map(|j| Expr::var(k + j) + Expr::int(sign) * alpha[j].clone() * sq(j % k)));
        SmoothMap::new(d, c).expect("within arity")
    };
    let phi = shear_b(1).compose(&shear_a(1)).expect("shapes");
    let inv = shear_a(-1).compose(&shear_b(-1)).expect("shapes");
    let name = format!("conjugated_{k}_{n}_s{seed}");
    conjugate(&trivial(k, n), &name, &phi, &inv).expect("conjugation")
}

/// The smooth bump function example: `q(x, y) = (1 - δ(y))x + δ(y)x³`,
/// `ξ(z) = (z, 0)`, `λ(x, y) = (q(x, y), 0, 0, y)`. Every pre-differential
/// law holds, but `q` has vanishing derivative at `(0, 1)`.
pub fn bump_counterexample() -> BundleSpec {
    let q = "(1 - bump(x1))*x0 + bump(x1)*x0^3";
    BundleSpec::new(
        "bump_counterexample",
        1,
        2,
        map(q, 2),
        map("x0, 0", 1),
        map(&format!("{q}, 0, 0, x1"), 2),
    )
    .expect("well formed")
}

/// Trivial line bundle with the lift `(x, a) ↦ (x, 0, 0, a + a²)`: all
/// pre-differential laws hold, but the lift folds the fibre at `a = -1/2`.
pub fn quadratic_lift() -> BundleSpec {
    let t = trivial(1, 1);
    BundleSpec::new("quadratic_lift", 1, 2, t.q, t.xi, map("x0, 0, 0, x1 + x1^2", 2)).expect("well formed")
}
