//! Sparse multivariate polynomials with exact rational coefficients, used as
//! the canonical form for deciding equality of polynomial maps.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{rat_to_f64, Expr, SmoothMap};

/// Raised when an expression uses a builtin or divides by a non-constant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a polynomial")]
pub struct NotPolynomial;

/// Exponent vector, ordered graded-lexicographically (total degree first,
/// then exponents of `x0, x1, ...` compared in turn).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Polynomial {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; nvars]), c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Polynomial {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Polynomial::zero(nvars);
        p.terms.insert(Monomial(e), BigRational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// The constant coefficient if the polynomial has degree 0.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let e = m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                out.add_term(Monomial(e), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, j: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[j];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[j] -= 1;
            out.add_term(m2, c * BigRational::from_integer(BigInt::from(e)));
        }
        out
    }

    /// The same polynomial viewed in a ring with `nvars >= self.nvars`
    /// variables.
    pub fn extend(&self, nvars: usize) -> Polynomial {
        assert!(nvars >= self.nvars);
        Polynomial {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0.clone();
                    e.resize(nvars, 0);
                    (Monomial(e), c.clone())
                })
                .collect(),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = rat_to_f64(c);
                for (xi, &e) in x.iter().zip(&m.0) {
                    if e > 0 {
                        t *= xi.powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn from_expr(e: &Expr, nvars: usize) -> Result<Polynomial, NotPolynomial> {
        Ok(match e {
            Expr::Var(i) => {
                if *i >= nvars {
                    return Err(NotPolynomial);
                }
                Polynomial::var(nvars, *i)
            }
            Expr::Const(c) => Polynomial::constant(nvars, c.clone()),
            Expr::Sum(v) => {
                let mut acc = Polynomial::zero(nvars);
                for t in v {
                    acc = acc.add(&Polynomial::from_expr(t, nvars)?);
                }
                acc
            }
            Expr::Product(v) => {
                let mut acc = Polynomial::constant(nvars, BigRational::one());
                for t in v {
                    acc = acc.mul(&Polynomial::from_expr(t, nvars)?);
                }
                acc
            }
            Expr::Pow(b, n) => Polynomial::from_expr(b, nvars)?.pow(*n),
            Expr::Neg(b) => Polynomial::from_expr(b, nvars)?.neg(),
            Expr::Quotient(a, b) => {
                let den = Polynomial::from_expr(b, nvars)?.as_constant().ok_or(NotPolynomial)?;
                if den.is_zero() {
                    return Err(NotPolynomial);
                }
                Polynomial::from_expr(a, nvars)?.scale(&den.recip())
            }
            Expr::Call(..) => return Err(NotPolynomial),
        })
    }

    /// Expression with terms in descending monomial order.
    pub fn to_expr(&self) -> Expr {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let mut factors = vec![Expr::Const(c.clone())];
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        factors.push(Expr::pow(Expr::var(i), e));
                    }
                }
                Expr::product(factors)
            })
            .collect();
        Expr::sum(terms)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// A map whose components are all polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    pub arity: usize,
    pub components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn to_smooth_map(&self) -> SmoothMap {
        SmoothMap::new(self.arity, self.components.iter().map(Polynomial::to_expr).collect())
            .expect("polynomial components stay within the arity")
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(x)).collect()
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_smooth_map())
    }
}

/// A quotient of polynomials, not reduced. Two fractions are equal as
/// functions (where both are defined) when their cross products agree.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub num: Polynomial,
    pub den: Polynomial,
}

impl Fraction {
    /// Build from an expression, refusing non-rational expressions and any
    /// intermediate whose numerator plus denominator degree exceeds
    /// `limit`.
    pub fn from_expr(e: &Expr, nvars: usize, limit: u32) -> Result<Fraction, NotPolynomial> {
        let bounded = |f: Fraction| {
            if f.num.degree() + f.den.degree() > limit {
                Err(NotPolynomial)
            } else {
                Ok(f)
            }
        };
        let one = || Polynomial::constant(nvars, BigRational::one());
        match e {
            Expr::Var(_) | Expr::Const(_) => Ok(Fraction {
                num: Polynomial::from_expr(e, nvars)?,
                den: one(),
            }),
            Expr::Sum(v) => {
                let mut acc = Fraction { num: Polynomial::zero(nvars), den: one() };
                for t in v {
                    let f = Fraction::from_expr(t, nvars, limit)?;
                    acc = bounded(if acc.den == f.den {
                        Fraction { num: acc.num.add(&f.num), den: acc.den }
                    } else {
                        Fraction {
                            num: acc.num.mul(&f.den).add(&f.num.mul(&acc.den)),
                            den: acc.den.mul(&f.den),
                        }
                    })?;
                }
                Ok(acc)
            }
            Expr::Product(v) => {
                let mut acc = Fraction { num: one(), den: one() };
                for t in v {
                    let f = Fraction::from_expr(t, nvars, limit)?;
                    acc = bounded(Fraction { num: acc.num.mul(&f.num), den: acc.den.mul(&f.den) })?;
                }
                Ok(acc)
            }
            Expr::Pow(b, n) => {
                let f = Fraction::from_expr(b, nvars, limit)?;
                if (f.num.degree() + f.den.degree()).saturating_mul(*n) > limit {
                    return Err(NotPolynomial);
                }
                Ok(Fraction { num: f.num.pow(*n), den: f.den.pow(*n) })
            }
            Expr::Neg(b) => {
                let f = Fraction::from_expr(b, nvars, limit)?;
                Ok(Fraction { num: f.num.neg(), den: f.den })
            }
            Expr::Quotient(a, b) => {
                let (x, y) = (Fraction::from_expr(a, nvars, limit)?, Fraction::from_expr(b, nvars, limit)?);
                if y.num.is_zero() {
                    return Err(NotPolynomial);
                }
                bounded(Fraction { num: x.num.mul(&y.den), den: x.den.mul(&y.num) })
            }
            Expr::Call(..) => Err(NotPolynomial),
        }
    }

    pub fn same_as(&self, other: &Fraction) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

/// Canonical form of a polynomial map.
pub fn poly_normalize(f: &SmoothMap) -> Result<PolyMap, NotPolynomial> {
    let components = f
        .components()
        .iter()
        .map(|e| Polynomial::from_expr(e, f.arity()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolyMap {
        arity: f.arity(),
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    #[test]
    fn canonical_print_is_highest_first() {
        let e = parse_expr("(x0 + 1)^2", 1).unwrap();
        let p = Polynomial::from_expr(&e, 1).unwrap();
        assert_eq!(p.to_string(), "x0^2 + 2*x0 + 1");
    }

    #[test]
    fn constant_denominators_are_polynomial() {
        let e = parse_expr("x0/(1 + 1)", 1).unwrap();
        let p = Polynomial::from_expr(&e, 1).unwrap();
        assert_eq!(p.to_string(), "(1/2)*x0");
        let e = parse_expr("x0/x1", 2).unwrap();
        assert_eq!(Polynomial::from_expr(&e, 2), Err(NotPolynomial));
        let e = parse_expr("exp(x0)", 1).unwrap();
        assert_eq!(Polynomial::from_expr(&e, 1), Err(NotPolynomial));
    }

    #[test]
    fn cancellation_yields_zero() {
        let e = parse_expr("(x0 - x1)*(x0 + x1) - x0^2 + x1^2", 2).unwrap();
        assert!(Polynomial::from_expr(&e, 2).unwrap().is_zero());
    }

    #[test]
    fn grlex_order() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![1, 1]);
        let c = Monomial(vec![0, 3]);
        assert!(a > b && c > a);
    }
}
