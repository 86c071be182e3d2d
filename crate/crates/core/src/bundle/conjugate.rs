//! Transporting a bundle along a diffeomorphism of its total space.

use super::BundleSpec;
use crate::error::Result;
use crate::expr::{poly_normalize, SmoothMap};
use crate::jet::tangent_map;

/// Canonical polynomial form when there is one, else the map unchanged.
pub fn simplify(m: SmoothMap) -> SmoothMap {
    match poly_normalize(&m) {
        Ok(p) => p.to_smooth_map(),
        Err(_) => m,
    }
}

fn after(f: &SmoothMap, g: &SmoothMap) -> SmoothMap {
    simplify(f.compose(g).expect("conjugation shapes"))
}

/// The bundle `φ` carries `spec` to: `q' = qφ⁻¹`, `ξ' = φξ`,
/// `λ' = T(φ)λφ⁻¹`, and declared operations conjugated the same way.
/// `phi_inv` must invert `phi` on the sampling box.
pub fn conjugate(spec: &BundleSpec, name: &str, phi: &SmoothMap, phi_inv: &SmoothMap) -> Result<BundleSpec> {
    let q = after(&spec.q, phi_inv);
    let xi = after(phi, &spec.xi);
    let lambda = after(&tangent_map(phi, 1), &after(&spec.lambda, phi_inv));
    let mut out = BundleSpec::new(name, spec.base_dim, spec.total_dim, q, xi, lambda)?
        .with_boxes(spec.base_box.clone(), spec.total_box.clone())?;
    if let Some(add) = &spec.add {
        out = out.with_add(after(phi, &after(add, &SmoothMap::product(phi_inv, phi_inv))))?;
    }
    if let Some(s) = &spec.scalar {
        out = out.with_scalar(after(phi, &after(s, &SmoothMap::product(&SmoothMap::identity(1), phi_inv))))?;
    }
    if let Some(n) = &spec.negate {
        out = out.with_negate(after(phi, &after(n, phi_inv)))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn shear_moves_the_zero_section() {
        let q = parse_map("x0", 2).unwrap();
        let xi = parse_map("x0, 0", 1).unwrap();
        let lam = parse_map("x0, 0, 0, x1", 2).unwrap();
        let triv = BundleSpec::new("t", 1, 2, q, xi, lam).unwrap();
        let phi = parse_map("x0, x1 + x0^2", 2).unwrap();
        let inv = parse_map("x0, x1 - x0^2", 2).unwrap();
        let c = conjugate(&triv, "c", &phi, &inv).unwrap();
        assert_eq!(c.xi.to_string(), "(x0, x0^2)");
        assert_eq!(c.lambda.to_string(), "(x0, x0^2, 0, -x0^2 + x1)");
    }
}
