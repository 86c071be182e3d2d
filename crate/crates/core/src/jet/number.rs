//! Nested dual numbers `ℝ[ε_1, ..., ε_n] / (ε_i²)`.
//!
//! A jet of order `n` has one coefficient per subset `S ⊆ {1..n}`, stored at
//! the bitmask of `S` (bit `i - 1` for `ε_i`). Evaluating a map on jets whose
//! `ε`-coefficients are tangent blocks computes the `n`-fold tangent map.

use crate::expr::Scalar;

/// Largest supported order; jets hold `2^MAX_ORDER` coefficients.
pub const MAX_ORDER: usize = 6;
const CAP: usize = 1 << MAX_ORDER;

#[derive(Clone, Copy, Debug)]
pub struct Jet {
    order: u8,
    c: [f64; CAP],
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs() == other.coeffs()
    }
}

impl Jet {
    pub fn constant(order: usize, v: f64) -> Jet {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; CAP];
        c[0] = v;
        Jet { order: order as u8, c }
    }

    pub fn from_coeffs(order: usize, coeffs: &[f64]) -> Jet {
        let mut j = Jet::constant(order, 0.0);
        assert_eq!(coeffs.len(), 1 << order);
        j.c[..coeffs.len()].copy_from_slice(coeffs);
        j
    }

    pub fn order_n(&self) -> usize {
        self.order as usize
    }

    pub fn len(&self) -> usize {
        1 << self.order
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len()]
    }

    pub fn coeff(&self, s: usize) -> f64 {
        self.c[s]
    }

    pub fn set_coeff(&mut self, s: usize, v: f64) {
        self.c[s] = v;
    }
}

impl Scalar for Jet {
    fn lift(&self, v: f64) -> Jet {
        Jet::constant(self.order as usize, v)
    }

    fn base(&self) -> f64 {
        self.c[0]
    }

    fn order(&self) -> usize {
        self.order as usize
    }

    fn add(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order, other.order);
        let mut out = *self;
        for s in 0..self.len() {
            out.c[s] += other.c[s];
        }
        out
    }

    fn mul(&self, other: &Jet) -> Jet {
        debug_assert_eq!(self.order, other.order);
        let mut out = Jet::constant(self.order as usize, 0.0);
        for s in 0..self.len() {
            let mut acc = 0.0;
            let mut t = s;
            loop {
                acc += self.c[t] * other.c[s ^ t];
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            out.c[s] = acc;
        }
        out
    }

    fn neg(&self) -> Jet {
        let mut out = *self;
        for s in 0..self.len() {
            out.c[s] = -out.c[s];
        }
        out
    }

    fn recip(&self) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.order as usize + 1);
        let mut term = 1.0 / a;
        for k in 0..=self.order as usize {
            d.push(term);
            term *= -((k + 1) as f64) / a;
        }
        self.compose_unary(&d)
    }

    fn compose_unary(&self, derivs: &[f64]) -> Jet {
        let n = self.order as usize;
        let mut out = Jet::constant(n, derivs[0]);
        if n == 0 {
            return out;
        }
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut power = delta;
        let mut fact = 1.0;
        for (k, dk) in derivs.iter().enumerate().take(n + 1).skip(1) {
            fact *= k as f64;
            let w = dk / fact;
            if w != 0.0 {
                for s in 1..self.len() {
                    out.c[s] += w * power.c[s];
                }
            }
            if k < n {
                power = power.mul(&delta);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_number_product() {
        // (a + b ε1)(c + d ε1) = ac + (ad + bc) ε1
        let x = Jet::from_coeffs(1, &[2.0, 3.0]);
        let y = Jet::from_coeffs(1, &[5.0, 7.0]);
        assert_eq!(x.mul(&y).coeffs(), &[10.0, 29.0]);
    }

    #[test]
    fn second_order_square() {
        // x = a + ε1 + ε2: x² = a² + 2a ε1 + 2a ε2 + 2 ε1ε2
        let x = Jet::from_coeffs(2, &[3.0, 1.0, 1.0, 0.0]);
        assert_eq!(x.mul(&x).coeffs(), &[9.0, 6.0, 6.0, 2.0]);
    }

    #[test]
    fn unary_composition_is_taylor() {
        // exp(a + ε1 + ε2) has ε1ε2 coefficient exp(a)
        let x = Jet::from_coeffs(2, &[0.5, 1.0, 1.0, 0.0]);
        let e = 0.5f64.exp();
        let y = x.compose_unary(&[e, e, e]);
        for (got, want) in y.coeffs().iter().zip([e, e, e, e]) {
            assert!((got - want).abs() < 1e-15);
        }
        let r = x.recip();
        assert!((r.coeff(3) - 2.0 / 0.125).abs() < 1e-12);
    }
}
