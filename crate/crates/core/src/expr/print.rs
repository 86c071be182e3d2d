//! Precedence-aware printing. The output re-parses to the same AST.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::Expr;

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Factor { first: bool },
    Numerator,
    Denominator,
    PowBase,
    NegOperand,
    Subtrahend,
}

struct Printer<'a> {
    names: Option<&'a [String]>,
}

fn is_plain_integer(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_integer() && !c.is_negative())
}

impl Printer<'_> {
    fn needs_parens(&self, e: &Expr, ctx: Ctx) -> bool {
        match ctx {
            Ctx::Top => false,
            Ctx::Subtrahend => matches!(e, Expr::Sum(_)),
            Ctx::Factor { first } => match e {
                Expr::Sum(_) | Expr::Neg(_) | Expr::Product(_) => true,
                Expr::Quotient(..) => !first,
                Expr::Const(c) => !c.is_integer() || (!first && c.is_negative()),
                _ => false,
            },
            Ctx::Numerator => match e {
                Expr::Sum(_) => true,
                Expr::Const(c) => !c.is_integer(),
                _ => false,
            },
            Ctx::Denominator | Ctx::PowBase => {
                !(matches!(e, Expr::Var(_) | Expr::Call(..)) || is_plain_integer(e))
                    && !(ctx == Ctx::Denominator && matches!(e, Expr::Pow(..)))
            }
            Ctx::NegOperand => match e {
                Expr::Sum(_) | Expr::Quotient(..) | Expr::Neg(_) => true,
                Expr::Const(c) => !c.is_integer() || c.is_negative(),
                _ => false,
            },
        }
    }

    fn write(&self, out: &mut String, e: &Expr, ctx: Ctx) {
        if self.needs_parens(e, ctx) {
            out.push('(');
            self.write_bare(out, e);
            out.push(')');
        } else {
            self.write_bare(out, e);
        }
    }

    fn write_bare(&self, out: &mut String, e: &Expr) {
        match e {
            Expr::Var(i) => match self.names.and_then(|n| n.get(*i)) {
                Some(name) => out.push_str(name),
                None => {
                    let _ = write!(out, "x{i}");
                }
            },
            Expr::Const(c) => {
                let _ = write!(out, "{c}");
            }
            Expr::Sum(terms) => {
                self.write(out, &terms[0], Ctx::Top);
                for t in &terms[1..] {
                    match t {
                        Expr::Neg(inner) => {
                            out.push_str(" - ");
                            self.write(out, inner, Ctx::Subtrahend);
                        }
                        Expr::Const(c) if c.is_negative() => {
                            let _ = write!(out, " - {}", -c);
                        }
                        Expr::Product(fs) if matches!(&fs[0], Expr::Const(c) if c.is_negative()) => {
                            let mut fs = fs.clone();
                            if let Expr::Const(c) = &fs[0] {
                                fs[0] = Expr::Const(-c);
                            }
                            out.push_str(" - ");
                            if matches!(&fs[0], Expr::Const(c) if c.is_one()) {
                                fs.remove(0);
                            }
                            self.write_factors(out, &fs);
                        }
                        _ => {
                            out.push_str(" + ");
                            self.write(out, t, Ctx::Top);
                        }
                    }
                }
            }
            Expr::Product(fs) => self.write_factors(out, fs),
            Expr::Pow(b, n) => {
                self.write(out, b, Ctx::PowBase);
                let _ = write!(out, "^{n}");
            }
            Expr::Quotient(a, b) => {
                self.write(out, a, Ctx::Numerator);
                out.push('/');
                self.write(out, b, Ctx::Denominator);
            }
            Expr::Neg(inner) => {
                out.push('-');
                self.write(out, inner, Ctx::NegOperand);
            }
            Expr::Call(f, arg) => {
                let _ = write!(out, "{f}(");
                self.write(out, arg, Ctx::Top);
                out.push(')');
            }
        }
    }

    fn write_factors(&self, out: &mut String, fs: &[Expr]) {
        if fs.len() == 1 {
            self.write(out, &fs[0], Ctx::Top);
            return;
        }
        for (i, f) in fs.iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            self.write(out, f, Ctx::Factor { first: i == 0 });
        }
    }
}

impl Expr {
    /// Render using `names[i]` for variable `i` (falling back to `xi`).
    pub fn to_string_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        Printer { names: Some(names) }.write(&mut out, self, Ctx::Top);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        Printer { names: None }.write(&mut out, self, Ctx::Top);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_common_shapes() {
        let x = Expr::var(0);
        let y = Expr::var(1);
        assert_eq!((x.clone() - y.clone()).to_string(), "x0 - x1");
        assert_eq!((Expr::int(2) * x.clone()).to_string(), "2*x0");
        assert_eq!((Expr::rational(1, 2) * x.clone()).to_string(), "(1/2)*x0");
        assert_eq!(Expr::pow(x.clone() + Expr::one(), 2).to_string(), "(x0 + 1)^2");
        assert_eq!((y.clone() - Expr::int(3) * x.clone()).to_string(), "x1 - 3*x0");
        assert_eq!(Expr::quotient(x.clone(), y.clone() + Expr::one()).to_string(), "x0/(x1 + 1)");
        assert_eq!(Expr::bump(y).to_string(), "bump(x1)");
    }
}
