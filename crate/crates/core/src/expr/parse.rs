//! Recursive-descent parser for the map language.
//!
//! ```text
//! map   := expr (',' expr)*          optionally wrapped in one pair of parens
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' integer)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers may carry a decimal point and are read as exact rationals.
//! Variables are `x0, x1, ...` or aliases registered in [`VarNames`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Builtin, Expr, ExprError, SmoothMap};

/// Variable naming for one parse: the domain dimension plus optional
/// aliases. Positional names `x<i>` with `i < arity` are always accepted
/// unless an alias shadows them.
#[derive(Clone, Debug, Default)]
pub struct VarNames {
    arity: usize,
    aliases: HashMap<String, usize>,
    display: Vec<String>,
}

impl VarNames {
    pub fn positional(arity: usize) -> VarNames {
        VarNames {
            arity,
            aliases: HashMap::new(),
            display: (0..arity).map(|i| format!("x{i}")).collect(),
        }
    }

    /// One name per coordinate, in order.
    pub fn named<S: AsRef<str>>(names: &[S]) -> VarNames {
        let mut v = VarNames::positional(names.len());
        for (i, n) in names.iter().enumerate() {
            v.aliases.insert(n.as_ref().to_string(), i);
            v.display[i] = n.as_ref().to_string();
        }
        v
    }

    pub fn alias(mut self, name: &str, index: usize) -> VarNames {
        assert!(index < self.arity);
        self.aliases.insert(name.to_string(), index);
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn display_names(&self) -> &[String] {
        &self.display
    }

    fn resolve(&self, name: &str) -> Option<usize> {
        if let Some(&i) = self.aliases.get(name) {
            return Some(i);
        }
        let digits = name.strip_prefix('x')?;
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        let i: usize = digits.parse().ok()?;
        (i < self.arity).then_some(i)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = line0;
    let mut line_start = 0usize;
    let col_of = |i: usize, line: usize, line_start: usize| {
        if line == line0 {
            col0 + i
        } else {
            i - line_start + 1
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let column = col_of(i, line, line_start);
        if c == '\n' {
            line += 1;
            line_start = i + 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut frac = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac.push(chars[i]);
                    i += 1;
                }
            }
            let int_part: String = chars[start..i].iter().take_while(|c| c.is_ascii_digit()).collect();
            let digits = format!("{int_part}{frac}");
            let numer: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().expect("digits")
            };
            let denom = num_traits::pow(BigInt::from(10), frac.len());
            out.push(Token {
                tok: Tok::Num(BigRational::new(numer, denom)),
                line,
                column,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                column,
            });
            continue;
        }
        if "+-*/^(),".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                line,
                column,
            });
            i += 1;
            continue;
        }
        return Err(ExprError::Syntax {
            line,
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col_of(chars.len(), line, line_start),
    });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    names: &'a VarNames,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn error(&self, message: impl Into<String>) -> ExprError {
        let t = self.peek();
        ExprError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek().tok == Tok::Op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`, found {}", describe(&self.peek().tok))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(self.term()?.negate());
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = Expr::product(vec![acc, rhs]);
            } else if self.peek().tok == Tok::Op('/') {
                let at = self.pos + 1;
                self.pos += 1;
                let rhs = self.unary()?;
                if rhs.is_zero() {
                    let t = &self.toks[at];
                    return Err(ExprError::Syntax {
                        line: t.line,
                        column: t.column,
                        message: "division by constant zero".into(),
                    });
                }
                acc = Expr::quotient(acc, rhs);
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(self.unary()?.negate());
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let t = self.peek().clone();
            if let Tok::Num(n) = &t.tok {
                if n.is_integer() {
                    if let Ok(k) = n.to_integer().to_string().parse::<u32>() {
                        self.pos += 1;
                        return Ok(Expr::pow(base, k));
                    }
                }
            }
            return Err(self.error("exponent must be a non-negative integer literal"));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek().tok == Tok::Op('(') {
                    let Some(f) = Builtin::from_name(&name) else {
                        return Err(ExprError::Syntax {
                            line: t.line,
                            column: t.column,
                            message: format!("unknown function `{name}`"),
                        });
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(f, arg));
                }
                match self.names.resolve(&name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ExprError::UnboundVariable {
                        name,
                        line: t.line,
                        column: t.column,
                    }),
                }
            }
            other => Err(self.error(format!("expected an expression, found {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("name `{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// If the whole token stream is `( ... )` with a top-level comma inside,
/// drop the outer pair.
fn strip_tuple_parens(toks: &mut Vec<Token>) {
    if toks.first().map(|t| &t.tok) != Some(&Tok::Op('(')) {
        return;
    }
    let mut depth = 0i32;
    let mut comma = false;
    for (i, t) in toks.iter().enumerate() {
        match t.tok {
            Tok::Op('(') => depth += 1,
            Tok::Op(')') => {
                depth -= 1;
                if depth == 0 {
                    if i + 2 == toks.len() && comma {
                        toks.remove(i);
                        toks.remove(0);
                    }
                    return;
                }
            }
            Tok::Op(',') if depth == 1 => comma = true,
            _ => {}
        }
    }
}

fn parse_components(text: &str, names: &VarNames, line: usize, column: usize) -> Result<Vec<Expr>, ExprError> {
    let mut toks = lex(text, line, column)?;
    strip_tuple_parens(&mut toks);
    let mut p = Parser { toks, pos: 0, names };
    let mut comps = vec![p.expr()?];
    while p.eat(',') {
        comps.push(p.expr()?);
    }
    if p.peek().tok != Tok::End {
        return Err(p.error(format!("unexpected {}", describe(&p.peek().tok))));
    }
    Ok(comps)
}

/// Parse a single expression over positional variables `x0..x{arity-1}`.
pub fn parse_expr(text: &str, arity: usize) -> Result<Expr, ExprError> {
    let comps = parse_components(text, &VarNames::positional(arity), 1, 1)?;
    if comps.len() != 1 {
        return Err(ExprError::ArityMismatch(format!("expected one expression, found {}", comps.len())));
    }
    Ok(comps.into_iter().next().unwrap())
}

/// Parse a comma-separated list of components over positional variables.
pub fn parse_map(text: &str, arity: usize) -> Result<SmoothMap, ExprError> {
    parse_map_with(text, &VarNames::positional(arity), None, (1, 1))
}

/// Parse a map with named variables. When `coarity` is given the number of
/// components must match. `at` is the (line, column) of the first character,
/// used to report positions inside a larger document.
pub fn parse_map_with(
    text: &str,
    names: &VarNames,
    coarity: Option<usize>,
    at: (usize, usize),
) -> Result<SmoothMap, ExprError> {
    let comps = parse_components(text, names, at.0, at.1)?;
    if let Some(c) = coarity {
        if comps.len() != c {
            return Err(ExprError::ArityMismatch(format!(
                "expected {c} components, found {}",
                comps.len()
            )));
        }
    }
    SmoothMap::new(names.arity(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_precedence() {
        let e = parse_expr("1 + 2*x0^2 - x1/4", 2).unwrap();
        assert_eq!(e.eval(&[3.0, 8.0]).unwrap(), 1.0 + 18.0 - 2.0);
        let e = parse_expr("-x0^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
    }

    #[test]
    fn decimals_are_exact() {
        let e = parse_expr("0.1 + 0.2", 0).unwrap();
        assert_eq!(e, Expr::rational(3, 10));
        assert_eq!(parse_expr("3/4", 0).unwrap(), Expr::rational(3, 4));
    }

    #[test]
    fn aliases_and_tuples() {
        let names = VarNames::named(&["x", "y"]);
        let m = parse_map_with("(x + y, y*x)", &names, Some(2), (1, 1)).unwrap();
        assert_eq!(m.eval(&[2.0, 3.0]).unwrap(), vec![5.0, 6.0]);
        let m = parse_map_with("(x + y)", &names, None, (1, 1)).unwrap();
        assert_eq!(m.coarity(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("x0 + * 2", 1) {
            Err(ExprError::Syntax { line: 1, column: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_expr("x0 + z", 1) {
            Err(ExprError::UnboundVariable { name, column: 6, .. }) => assert_eq!(name, "z"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("x1", 1), Err(ExprError::UnboundVariable { .. })));
        assert!(matches!(parse_expr("foo(x0)", 1), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_map_with("x0", &VarNames::positional(1), Some(2), (1, 1)), Err(ExprError::ArityMismatch(_))));
    }

    #[test]
    fn offsets_shift_columns() {
        match parse_map_with("x0 +", &VarNames::positional(1), None, (7, 10)) {
            Err(ExprError::Syntax { line: 7, column: 14, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
