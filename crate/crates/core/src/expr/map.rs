use std::fmt;

use super::{Expr, ExprError, Scalar};

/// A map `ℝ^arity → ℝ^coarity` given by one expression per output coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SmoothMap {
    arity: usize,
    components: Vec<Expr>,
}

impl SmoothMap {
    /// Fails if a component mentions a variable index `>= arity`.
    pub fn new(arity: usize, components: Vec<Expr>) -> Result<SmoothMap, ExprError> {
        for (i, c) in components.iter().enumerate() {
            if c.var_bound() > arity {
                return Err(ExprError::ArityMismatch(format!(
                    "component {i} uses x{} but the map has arity {arity}",
                    c.var_bound() - 1
                )));
            }
        }
        Ok(SmoothMap { arity, components })
    }

    pub fn identity(n: usize) -> SmoothMap {
        SmoothMap {
            arity: n,
            components: (0..n).map(Expr::var).collect(),
        }
    }

    /// `x ↦ (x[indices[0]], x[indices[1]], ...)`.
    pub fn select(arity: usize, indices: &[usize]) -> SmoothMap {
        SmoothMap::new(arity, indices.iter().map(|&i| Expr::var(i)).collect()).expect("index out of range")
    }

    pub fn zero(arity: usize, coarity: usize) -> SmoothMap {
        SmoothMap {
            arity,
            components: vec![Expr::zero(); coarity],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn coarity(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SmoothMap) -> Result<SmoothMap, ExprError> {
        if inner.coarity() != self.arity {
            return Err(ExprError::DimensionMismatch(format!(
                "cannot compose: inner map has {} outputs, outer map expects {}",
                inner.coarity(),
                self.arity
            )));
        }
        Ok(SmoothMap {
            arity: inner.arity,
            components: self.components.iter().map(|c| c.substitute(&inner.components)).collect(),
        })
    }

    /// `x ↦ (f(x), g(x), ...)` for maps on the same domain.
    pub fn tuple(maps: &[&SmoothMap]) -> Result<SmoothMap, ExprError> {
        let arity = maps.first().map(|m| m.arity).unwrap_or(0);
        let mut components = Vec::new();
        for m in maps {
            if m.arity != arity {
                return Err(ExprError::DimensionMismatch("tuple of maps with different domains".into()));
            }
            components.extend(m.components.iter().cloned());
        }
        Ok(SmoothMap { arity, components })
    }

    /// `(x, y) ↦ (f(x), g(y))`.
    pub fn product(f: &SmoothMap, g: &SmoothMap) -> SmoothMap {
        let shift: Vec<Expr> = (0..g.arity).map(|i| Expr::var(f.arity + i)).collect();
        let mut components = f.components.clone();
        components.extend(g.components.iter().map(|c| c.substitute(&shift)));
        SmoothMap {
            arity: f.arity + g.arity,
            components,
        }
    }

    /// Evaluate at a point; fails on near-zero denominators and non-finite
    /// results.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.eval_scalar(x, &0.0)
    }

    pub fn eval_scalar<S: Scalar>(&self, x: &[S], template: &S) -> Result<Vec<S>, ExprError> {
        if x.len() != self.arity {
            return Err(ExprError::DimensionMismatch(format!(
                "expected a point of dimension {}, got {}",
                self.arity,
                x.len()
            )));
        }
        let mut out = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let v = c.eval_with(x, template)?;
            if !v.base().is_finite() {
                return Err(ExprError::NonFinite);
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Symbolic Jacobian, row-major: entry `(i, j)` is `∂ f_i / ∂ x_j`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.components
            .iter()
            .map(|c| (0..self.arity).map(|j| c.derivative(j)).collect())
            .collect()
    }

    /// Render with custom variable names.
    pub fn to_string_with(&self, names: &[String]) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string_with(names)).collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Display for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_map;

    #[test]
    fn compose_substitutes() {
        let f = parse_map("x0*x1, x0 + x1", 2).unwrap();
        let g = parse_map("x0^2, 3", 1).unwrap();
        let h = f.compose(&g).unwrap();
        assert_eq!(h.to_string(), "(3*x0^2, x0^2 + 3)");
        assert!(g.compose(&g).is_err());
    }

    #[test]
    fn product_shifts_variables() {
        let f = parse_map("x0^2", 1).unwrap();
        let g = parse_map("x0 + x1", 2).unwrap();
        let h = SmoothMap::product(&f, &g);
        assert_eq!(h.eval(&[2.0, 3.0, 4.0]).unwrap(), vec![4.0, 7.0]);
    }

    #[test]
    fn display_round_trips() {
        let f = parse_map("x0 - 2*x1^3/(1 + x0^2), -(x0*x1), bump(x1 - 1/2)", 2).unwrap();
        let again = parse_map(&f.to_string(), 2).unwrap();
        assert_eq!(f, again);
    }
}
