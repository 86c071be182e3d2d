use super::{Builtin, Expr};

impl Expr {
    /// Symbolic partial derivative with respect to variable `j`.
    pub fn derivative(&self, j: usize) -> Expr {
        match self {
            Expr::Var(i) => {
                if *i == j {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Const(_) => Expr::zero(),
            Expr::Sum(v) => Expr::sum(v.iter().map(|e| e.derivative(j)).collect()),
            Expr::Product(v) => {
                let mut terms = Vec::new();
                for (i, f) in v.iter().enumerate() {
                    let df = f.derivative(j);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors = Vec::with_capacity(v.len());
                    factors.push(df);
                    factors.extend(v.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, e)| e.clone()));
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, n) => {
                let db = b.derivative(j);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product(vec![Expr::int(*n as i64), Expr::pow((**b).clone(), n - 1), db])
            }
            Expr::Quotient(a, b) => {
                let da = a.derivative(j);
                let db = b.derivative(j);
                if db.is_zero() {
                    return Expr::quotient(da, (**b).clone());
                }
                let num = Expr::sum(vec![
                    Expr::product(vec![da, (**b).clone()]),
                    Expr::product(vec![(**a).clone(), db]).negate(),
                ]);
                Expr::quotient(num, Expr::pow((**b).clone(), 2))
            }
            Expr::Neg(b) => b.derivative(j).negate(),
            Expr::Call(f, a) => {
                let da = a.derivative(j);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Builtin::Exp => Expr::exp((**a).clone()),
                    Builtin::Sin => Expr::cos((**a).clone()),
                    Builtin::Cos => Expr::sin((**a).clone()).negate(),
                    Builtin::Bump(k) => Expr::call(Builtin::Bump(k + 1), (**a).clone()),
                };
                Expr::product(vec![outer, da])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // d/dx0 (x0^2 * x1) = 2*x0*x1
        let e = Expr::product(vec![Expr::pow(Expr::var(0), 2), Expr::var(1)]);
        let d = e.derivative(0);
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5)] {
            assert_eq!(d.eval(&[x, y]).unwrap(), 2.0 * x * y);
        }
    }

    #[test]
    fn chain_rule_through_bump() {
        let e = Expr::bump(Expr::product(vec![Expr::int(2), Expr::var(0)]));
        let d = e.derivative(0);
        assert_eq!(
            d,
            Expr::product(vec![Expr::int(2), Expr::call(Builtin::Bump(1), Expr::product(vec![Expr::int(2), Expr::var(0)]))])
        );
    }
}
