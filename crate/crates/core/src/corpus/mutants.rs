//! Bundles that break one declared law each, for checking the checker.

use super::bundles::trivial;
use crate::bundle::BundleSpec;
use crate::expr::{parse_map, SmoothMap};

fn map(text: &str, arity: usize) -> SmoothMap {
    parse_map(text, arity).unwrap_or_else(|e| panic!("built-in map {text:?}: {e}"))
}

fn line(name: &str, q: &str, xi: &str, lambda: &str) -> BundleSpec {
    BundleSpec::new(name, 1, 2, map(q, 2), map(xi, 1), map(lambda, 2)).expect("well formed")
}

/// `ξ = (x, 1)` off the zero section: `pλ = ξq` and `λξ = 0ξ` fail.
pub fn xi_shift() -> BundleSpec {
    line("mutant_xi_shift", "x0", "x0, 1", "x0, 0, 0, x1")
}

/// `ξ` collapses to the origin, so `qξ ≠ id`.
pub fn xi_collapse() -> BundleSpec {
    line("mutant_xi_collapse", "x0", "0, 0", "0, 0, 0, x1")
}

/// `λ(x, a) = (x, 0, 0, 2a)`: `ℓλ ≠ T(λ)λ`.
pub fn lift_doubled() -> BundleSpec {
    line("mutant_lift_doubled", "x0", "x0, 0", "x0, 0, 0, 2*x1")
}

/// `λ(x, a) = (x, a, 0, 0)` lands off the zero section: `pλ ≠ ξq`.
pub fn lift_vertical() -> BundleSpec {
    line("mutant_lift_vertical", "x0", "x0, 0", "x0, x1, 0, 0")
}

fn with_ops(name: &str, k: usize, n: usize, add: Option<&str>, negate: Option<&str>, scalar: Option<&str>) -> BundleSpec {
    let t = trivial(k, n);
    let d = k + n;
    let mut b = BundleSpec::new(name, k, d, t.q, t.xi, t.lambda).expect("well formed");
    b = b.with_add(add.map_or_else(|| t.add.clone().expect("declared"), |a| map(a, 2 * d))).expect("shape");
    if let Some(nm) = negate {
        b = b.with_negate(map(nm, d)).expect("shape");
    }
    if let Some(s) = scalar {
        b = b.with_scalar(map(s, 1 + d)).expect("shape");
    }
    b
}

/// The Heisenberg group law `(a₁ + b₁, a₂ + b₂, a₃ + b₃ + a₁b₂)` on the
/// fibres: associative with unit but not commutative.
pub fn add_noncommutative() -> BundleSpec {
    with_ops("mutant_add_noncommutative", 1, 3, Some("x0, x1 + x5, x2 + x6, x3 + x7 + x1*x6"), None, None)
}

/// Fibre addition `a + b + a²b²`, commutative with unit but not associative.
pub fn add_nonassociative() -> BundleSpec {
    with_ops("mutant_add_nonassociative", 1, 1, Some("x0, x1 + x3 + x1^2*x3^2"), None, None)
}

/// Fibre addition `a + b + 1`: the zero section is not a unit.
pub fn add_shifted_unit() -> BundleSpec {
    with_ops("mutant_add_shifted_unit", 1, 1, Some("x0, x1 + x3 + 1"), None, None)
}

/// Negation declared as the identity.
pub fn negate_identity() -> BundleSpec {
    with_ops("mutant_negate_identity", 1, 1, None, Some("x0, x1"), None)
}

/// Scalar action `(r a₁, 0)`, which does not fix `1 • a`.
pub fn scalar_drops_coordinate() -> BundleSpec {
    with_ops("mutant_scalar_drops_coordinate", 1, 2, None, None, Some("x1, x0*x2, 0"))
}

/// Scalar action `r³a`, which is not additive in the scalar.
pub fn scalar_cubed() -> BundleSpec {
    with_ops("mutant_scalar_cubed", 1, 1, None, None, Some("x1, x0^3*x2"))
}
