//! The smooth-map expression language.
//!
//! An [`Expr`] is a small AST over positional variables `x0, x1, ...` built
//! from rational constants, sums, products, integer powers, quotients,
//! negation and a handful of builtin functions. A [`SmoothMap`] bundles a
//! list of component expressions with the dimension of its domain, and is the
//! carrier for every structure map in the crate.
//!
//! Expressions are always assembled through the smart constructors on
//! [`Expr`] ([`Expr::sum`], [`Expr::product`], ...), which flatten nested
//! sums and products and fold constants. Parsing, substitution and symbolic
//! differentiation all go through them, so two routes to the same structural
//! expression produce equal ASTs.

mod diff;
mod eval;
mod map;
mod parse;
pub mod poly;
mod print;
mod sample;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use eval::{bump_derivatives, Scalar};
pub use map::SmoothMap;
pub use parse::{parse_expr, parse_map, parse_map_with, VarNames};
pub use poly::{poly_normalize, Fraction, NotPolynomial, PolyMap, Polynomial};
pub use sample::{equal_maps, sample_points, scaled_residual, EqVerdict, MapWitness, SampleBox, SamplerConfig};
pub(crate) use sample::worse;

/// Errors raised while building, parsing or evaluating expressions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unbound variable `{name}` at {line}:{column}")]
    UnboundVariable {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("denominator near zero ({value:e})")]
    DenominatorNearZero { value: f64 },
    #[error("non-finite value produced during evaluation")]
    NonFinite,
}

/// Builtin unary functions.
///
/// `Bump(k)` is the `k`-th derivative of the smooth step
/// `δ(y) = s(y) / (s(y) + s(1 - y))` with `s(t) = exp(-1/t)` for `t > 0`
/// and `0` otherwise. It is `0` for `y <= 0` and `1` for `y >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    Exp,
    Sin,
    Cos,
    Bump(u32),
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Builtin::Exp => "exp".into(),
            Builtin::Sin => "sin".into(),
            Builtin::Cos => "cos".into(),
            Builtin::Bump(0) => "bump".into(),
            Builtin::Bump(1) => "dbump".into(),
            Builtin::Bump(k) => format!("d{k}bump"),
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "exp" => Some(Builtin::Exp),
            "sin" => Some(Builtin::Sin),
            "cos" => Some(Builtin::Cos),
            "bump" => Some(Builtin::Bump(0)),
            "dbump" => Some(Builtin::Bump(1)),
            _ => {
                let k = name.strip_prefix('d')?.strip_suffix("bump")?;
                let k: u32 = k.parse().ok()?;
                (k >= 2).then_some(Builtin::Bump(k))
            }
        }
    }
}

/// Expression AST. Build values with the smart constructors rather than the
/// variants directly; the invariants below are only maintained by them.
///
/// - `Sum` and `Product` have at least two operands and never directly
///   contain an operand of their own kind.
/// - A `Sum` carries at most one constant, in last position. A `Product`
///   carries at most one constant, in first position, never `0`, `1` or `-1`.
/// - `Pow` exponents are at least 2; `Quotient` denominators are never constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(usize),
    Const(BigRational),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Quotient(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Builtin, Box<Expr>),
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// `p/q` in lowest terms. Panics if `q == 0`.
    pub fn rational(p: i64, q: i64) -> Expr {
        assert!(q != 0, "zero denominator");
        Expr::Const(rat(p, q))
    }

    pub fn constant(c: BigRational) -> Expr {
        Expr::Const(c)
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        let mut constant = BigRational::zero();
        for t in terms {
            match t {
                Expr::Sum(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(c) => constant += c,
                            other => flat.push(other),
                        }
                    }
                }
                Expr::Const(c) => constant += c,
                other => flat.push(other),
            }
        }
        if !constant.is_zero() {
            flat.push(Expr::Const(constant));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Sum(flat),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(factors.len());
        let mut constant = BigRational::one();
        let push = |e: Expr, flat: &mut Vec<Expr>, constant: &mut BigRational| match e {
            Expr::Const(c) => *constant *= c,
            Expr::Neg(inner) => {
                *constant = -constant.clone();
                flat.push(*inner);
            }
            other => flat.push(other),
        };
        for f in factors {
            match f {
                Expr::Product(inner) => {
                    for u in inner {
                        push(u, &mut flat, &mut constant);
                    }
                }
                other => push(other, &mut flat, &mut constant),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        // Inner operands pushed above may themselves be products after
        // unwrapping a negation.
        if flat.iter().any(|f| matches!(f, Expr::Product(_) | Expr::Const(_))) {
            let mut again = vec![Expr::Const(constant)];
            again.extend(flat);
            return Expr::product(again);
        }
        let negate = constant == -BigRational::one();
        if !constant.is_one() && !negate {
            flat.insert(0, Expr::Const(constant));
        }
        let body = match flat.len() {
            0 => {
                return if negate { Expr::int(-1) } else { Expr::one() };
            }
            1 => flat.pop().unwrap(),
            _ => Expr::Product(flat),
        };
        if negate {
            Expr::Neg(Box::new(body))
        } else {
            body
        }
    }

    pub fn pow(base: Expr, exp: u32) -> Expr {
        match (exp, base) {
            (0, _) => Expr::one(),
            (1, b) => b,
            (n, Expr::Const(c)) => Expr::Const(rat_pow(&c, n)),
            (n, Expr::Pow(b, m)) => Expr::Pow(b, m * n),
            (n, Expr::Neg(b)) => {
                let p = Expr::pow(*b, n);
                if n % 2 == 0 {
                    p
                } else {
                    p.negate()
                }
            }
            (n, b) => Expr::Pow(Box::new(b), n),
        }
    }

    pub fn quotient(num: Expr, den: Expr) -> Expr {
        match den {
            Expr::Const(c) => {
                assert!(!c.is_zero(), "division by constant zero");
                Expr::product(vec![Expr::Const(c.recip()), num])
            }
            den => {
                if num.is_zero() {
                    Expr::zero()
                } else {
                    Expr::Quotient(Box::new(num), Box::new(den))
                }
            }
        }
    }

    pub fn negate(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            Expr::Product(mut fs) => {
                if let Some(Expr::Const(c)) = fs.first() {
                    let c = -c.clone();
                    if c.is_one() {
                        fs.remove(0);
                        return Expr::product(fs);
                    }
                    fs[0] = Expr::Const(c);
                    Expr::Product(fs)
                } else {
                    Expr::Neg(Box::new(Expr::Product(fs)))
                }
            }
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn call(f: Builtin, arg: Expr) -> Expr {
        if let Expr::Const(c) = &arg {
            match f {
                Builtin::Exp if c.is_zero() => return Expr::one(),
                Builtin::Sin if c.is_zero() => return Expr::zero(),
                Builtin::Cos if c.is_zero() => return Expr::one(),
                Builtin::Bump(_) if !c.is_positive() => return Expr::zero(),
                Builtin::Bump(0) if *c >= BigRational::one() => return Expr::one(),
                Builtin::Bump(_) if *c >= BigRational::one() => return Expr::zero(),
                _ => {}
            }
        }
        Expr::Call(f, Box::new(arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::call(Builtin::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::call(Builtin::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::call(Builtin::Cos, arg)
    }

    pub fn bump(arg: Expr) -> Expr {
        Expr::call(Builtin::Bump(0), arg)
    }

    /// Largest variable index plus one (0 for closed expressions).
    pub fn var_bound(&self) -> usize {
        match self {
            Expr::Var(i) => i + 1,
            Expr::Const(_) => 0,
            Expr::Sum(v) | Expr::Product(v) => v.iter().map(Expr::var_bound).max().unwrap_or(0),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Call(_, b) => b.var_bound(),
            Expr::Quotient(a, b) => a.var_bound().max(b.var_bound()),
        }
    }

    /// Replace each `Var(i)` by `args[i]`, rebuilding through the smart
    /// constructors.
    pub fn substitute(&self, args: &[Expr]) -> Expr {
        match self {
            Expr::Var(i) => args[*i].clone(),
            Expr::Const(_) => self.clone(),
            Expr::Sum(v) => Expr::sum(v.iter().map(|e| e.substitute(args)).collect()),
            Expr::Product(v) => Expr::product(v.iter().map(|e| e.substitute(args)).collect()),
            Expr::Pow(b, n) => Expr::pow(b.substitute(args), *n),
            Expr::Quotient(a, b) => Expr::quotient(a.substitute(args), b.substitute(args)),
            Expr::Neg(b) => b.substitute(args).negate(),
            Expr::Call(f, b) => Expr::call(*f, b.substitute(args)),
        }
    }

    /// Rebuild the expression bottom-up through the smart constructors.
    pub fn normalize(&self) -> Expr {
        match self {
            Expr::Var(_) | Expr::Const(_) => self.clone(),
            Expr::Sum(v) => Expr::sum(v.iter().map(Expr::normalize).collect()),
            Expr::Product(v) => Expr::product(v.iter().map(Expr::normalize).collect()),
            Expr::Pow(b, n) => Expr::pow(b.normalize(), *n),
            Expr::Quotient(a, b) => {
                let den = b.normalize();
                if den.is_zero() {
                    Expr::Quotient(Box::new(a.normalize()), Box::new(den))
                } else {
                    Expr::quotient(a.normalize(), den)
                }
            }
            Expr::Neg(b) => b.normalize().negate(),
            Expr::Call(f, b) => Expr::call(*f, b.normalize()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Sum(v) | Expr::Product(v) => 1 + v.iter().map(Expr::size).sum::<usize>(),
            Expr::Pow(b, _) | Expr::Neg(b) | Expr::Call(_, b) => 1 + b.size(),
            Expr::Quotient(a, b) => 1 + a.size() + b.size(),
        }
    }
}

pub(crate) fn rat_pow(c: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= c;
    }
    acc
}

pub(crate) fn rat_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = c.numer().to_f64().unwrap_or(f64::NAN);
        let d = c.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs.negate()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negate()
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_flatten_and_fold() {
        let e = Expr::sum(vec![
            Expr::var(0),
            Expr::sum(vec![Expr::int(2), Expr::var(1)]),
            Expr::int(-2),
        ]);
        assert_eq!(e, Expr::Sum(vec![Expr::var(0), Expr::var(1)]));
        assert_eq!(Expr::sum(vec![]), Expr::zero());
    }

    #[test]
    fn products_fold_signs() {
        let e = Expr::product(vec![Expr::int(-1), Expr::var(0)]);
        assert_eq!(e, Expr::Neg(Box::new(Expr::var(0))));
        let e = Expr::product(vec![Expr::var(0).negate(), Expr::var(1).negate()]);
        assert_eq!(e, Expr::Product(vec![Expr::var(0), Expr::var(1)]));
        let e = Expr::product(vec![Expr::int(2), Expr::var(0), Expr::int(0)]);
        assert!(e.is_zero());
    }

    #[test]
    fn bump_folds_outside_the_ramp() {
        assert!(Expr::bump(Expr::zero()).is_zero());
        assert!(Expr::bump(Expr::int(3)).is_one());
        assert!(Expr::call(Builtin::Bump(1), Expr::int(-2)).is_zero());
        assert!(Expr::call(Builtin::Bump(2), Expr::int(1)).is_zero());
    }

    #[test]
    fn builtin_names_round_trip() {
        for b in [Builtin::Exp, Builtin::Sin, Builtin::Cos, Builtin::Bump(0), Builtin::Bump(1), Builtin::Bump(4)] {
            assert_eq!(Builtin::from_name(&b.name()), Some(b));
        }
        assert_eq!(Builtin::from_name("d1bump"), None);
    }
}
