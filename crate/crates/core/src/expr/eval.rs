//! Evaluation of expressions over any scalar type that supports ring
//! operations and composition with a univariate function given its Taylor
//! data (plain `f64` and nested dual numbers).

use super::{rat_to_f64, Builtin, Expr, ExprError};

/// Smallest denominator magnitude accepted during evaluation.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

pub trait Scalar: Clone {
    /// Constant with the same shape (jet order) as `self`.
    fn lift(&self, v: f64) -> Self;
    /// Value part.
    fn base(&self) -> f64;
    /// Highest derivative order this scalar carries.
    fn order(&self) -> usize;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse; only called when `base()` is away from zero.
    fn recip(&self) -> Self;
    /// `g(self)` where `derivs[k]` is `g^(k)(self.base())`, for
    /// `k = 0..=self.order()`.
    fn compose_unary(&self, derivs: &[f64]) -> Self;
}

impl Scalar for f64 {
    fn lift(&self, v: f64) -> f64 {
        v
    }
    fn base(&self) -> f64 {
        *self
    }
    fn order(&self) -> usize {
        0
    }
    fn add(&self, other: &f64) -> f64 {
        self + other
    }
    fn mul(&self, other: &f64) -> f64 {
        self * other
    }
    fn neg(&self) -> f64 {
        -self
    }
    fn recip(&self) -> f64 {
        1.0 / self
    }
    fn compose_unary(&self, derivs: &[f64]) -> f64 {
        derivs[0]
    }
}

/// `g^(k)(y)` for `k = first, first + 1, ..., first + count - 1`, where `g`
/// is the smooth step `δ`.
///
/// Inside `(0, 1)` the derivatives come from truncated Taylor arithmetic on
/// `s(y + t) / (s(y + t) + s(1 - y - t))`. Within `1e-8` of either end the
/// flat tails of `s` underflow anyway, so the constant branch is used.
pub fn bump_derivatives(y: f64, first: usize, count: usize) -> Vec<f64> {
    let top = first + count;
    if y <= 1e-8 {
        return vec![0.0; count];
    }
    if y >= 1.0 - 1e-8 {
        return (first..top).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
    }
    let n = top;
    // -1/(y + t) and -1/((1 - y) - t) as series in t
    let z = 1.0 - y;
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
        u[i] = sign / y.powi(i as i32 + 1);
        w[i] = -1.0 / z.powi(i as i32 + 1);
    }
    let s1 = series_exp(&u);
    let s2 = series_exp(&w);
    let den: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| a + b).collect();
    let mut q = vec![0.0; n];
    for i in 0..n {
        let mut acc = s1[i];
        for k in 1..=i {
            acc -= den[k] * q[i - k];
        }
        q[i] = acc / den[0];
    }
    let mut fact = 1.0;
    let mut out = Vec::with_capacity(count);
    for (k, qk) in q.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        if k >= first {
            out.push(qk * fact);
        }
    }
    out
}

fn series_exp(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut e = vec![0.0; n];
    e[0] = u[0].exp();
    for i in 1..n {
        let mut acc = 0.0;
        for k in 1..=i {
            acc += k as f64 * u[k] * e[i - k];
        }
        e[i] = acc / i as f64;
    }
    e
}

/// Values `g^(k)(a)` for `k = 0..=order`.
pub(crate) fn builtin_derivatives(f: Builtin, a: f64, order: usize) -> Vec<f64> {
    match f {
        Builtin::Exp => vec![a.exp(); order + 1],
        Builtin::Sin | Builtin::Cos => {
            let (s, c) = a.sin_cos();
            let cycle = [s, c, -s, -c];
            let offset = if f == Builtin::Sin { 0 } else { 1 };
            (0..=order).map(|k| cycle[(k + offset) % 4]).collect()
        }
        Builtin::Bump(j) => bump_derivatives(a, j as usize, order + 1),
    }
}

impl Expr {
    /// Evaluate at `args`; `template` fixes the scalar shape of constants.
    pub fn eval_with<S: Scalar>(&self, args: &[S], template: &S) -> Result<S, ExprError> {
        Ok(match self {
            Expr::Var(i) => args[*i].clone(),
            Expr::Const(c) => template.lift(rat_to_f64(c)),
            Expr::Sum(v) => {
                let mut acc = v[0].eval_with(args, template)?;
                for e in &v[1..] {
                    acc = acc.add(&e.eval_with(args, template)?);
                }
                acc
            }
            Expr::Product(v) => {
                let mut acc = v[0].eval_with(args, template)?;
                for e in &v[1..] {
                    acc = acc.mul(&e.eval_with(args, template)?);
                }
                acc
            }
            Expr::Pow(b, n) => powi(&b.eval_with(args, template)?, *n),
            Expr::Quotient(a, b) => {
                let den = b.eval_with(args, template)?;
                if !(den.base().abs() >= DENOMINATOR_FLOOR) {
                    return Err(ExprError::DenominatorNearZero { value: den.base() });
                }
                a.eval_with(args, template)?.mul(&den.recip())
            }
            Expr::Neg(b) => b.eval_with(args, template)?.neg(),
            Expr::Call(f, b) => {
                let a = b.eval_with(args, template)?;
                let d = builtin_derivatives(*f, a.base(), a.order());
                a.compose_unary(&d)
            }
        })
    }

    /// Evaluate at a point of `ℝ^n`.
    pub fn eval(&self, args: &[f64]) -> Result<f64, ExprError> {
        self.eval_with(args, &0.0)
    }
}

pub(crate) fn powi<S: Scalar>(b: &S, n: u32) -> S {
    let mut result: Option<S> = None;
    let mut base = b.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.mul(&base),
            });
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(&base);
        }
    }
    result.unwrap_or_else(|| b.lift(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: f64) -> f64 {
        if t > 0.0 {
            (-1.0 / t).exp()
        } else {
            0.0
        }
    }

    fn delta(y: f64) -> f64 {
        s(y) / (s(y) + s(1.0 - y))
    }

    #[test]
    fn bump_values_match_closed_form() {
        for &y in &[-1.0, 0.0, 0.1, 0.3, 0.5, 0.77, 0.99, 1.0, 2.0] {
            let v = bump_derivatives(y, 0, 1)[0];
            assert!((v - delta(y)).abs() < 1e-14, "y = {y}");
        }
        assert_eq!(bump_derivatives(0.5, 0, 1)[0], 0.5);
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let h = 1e-5;
        for &y in &[0.2, 0.45, 0.6, 0.85] {
            let d = bump_derivatives(y, 0, 3);
            let fd1 = (delta(y + h) - delta(y - h)) / (2.0 * h);
            let fd2 = (delta(y + h) - 2.0 * delta(y) + delta(y - h)) / (h * h);
            assert!((d[1] - fd1).abs() < 1e-7, "first derivative at {y}");
            assert!((d[2] - fd2).abs() < 1e-3, "second derivative at {y}");
            let shifted = bump_derivatives(y, 1, 2);
            assert_eq!(shifted, d[1..].to_vec());
        }
    }

    #[test]
    fn builtin_cycles() {
        let d = builtin_derivatives(Builtin::Cos, 0.0, 4);
        assert_eq!(d, vec![1.0, -0.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn quotient_guard() {
        let e = Expr::quotient(Expr::one(), Expr::var(0));
        assert!(matches!(e.eval(&[0.0]), Err(ExprError::DenominatorNearZero { .. })));
        assert_eq!(e.eval(&[4.0]).unwrap(), 0.25);
    }
}
