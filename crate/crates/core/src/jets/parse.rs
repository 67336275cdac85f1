//! Whitespace-insensitive infix parser for [`Expr`].
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | func '(' expr ')' | '(' expr ')'
//! func  := exp | log | ln | sin | cos | sqrt
//! ```
//! `pi` and `e` are constants unless shadowed by a variable name.

use super::expr::Expr;
use crate::error::{GeomError, Result};

pub fn parse_expr(src: &str, vars: &[&str]) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, vars };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(GeomError::Parse(format!(
            "unexpected trailing input in {src:?}"
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| GeomError::Parse(format!("bad number {s:?}")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(GeomError::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Tok::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(GeomError::Parse(format!("expected {c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let ex = self.unary()?;
            return Ok(base.pow(&ex));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| GeomError::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Op(c) => Err(GeomError::Parse(format!("unexpected {c:?}"))),
            Tok::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::var(i));
                }
                if self.peek_op() == Some('(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return match name.as_str() {
                        "exp" => Ok(arg.exp()),
                        "log" | "ln" => Ok(arg.ln()),
                        "sin" => Ok(arg.sin()),
                        "cos" => Ok(arg.cos()),
                        "sqrt" => Ok(arg.sqrt()),
                        _ => Err(GeomError::Parse(format!("unknown function {name:?}"))),
                    };
                }
                match name.as_str() {
                    "pi" => Ok(Expr::constant(std::f64::consts::PI)),
                    "e" => Ok(Expr::constant(std::f64::consts::E)),
                    _ => Err(GeomError::Parse(format!(
                        "unknown identifier {name:?} (variables: {})",
                        self.vars.join(", ")
                    ))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expr("-x^2 + 3*y/2", &["x", "y"]).unwrap();
        assert_eq!(e.eval(&[2.0, 4.0]).unwrap(), -4.0 + 6.0);
        let e = parse_expr("2^-1", &[]).unwrap();
        assert_eq!(e.eval::<f64>(&[]).unwrap(), 0.5);
    }

    #[test]
    fn functions_and_constants() {
        let e = parse_expr("sin(pi/2) + log(e) + sqrt(4) + exp(0)", &[]).unwrap();
        assert!((e.eval::<f64>(&[]).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_expr("w*x+z*y", &["x", "y", "w", "z"]).unwrap();
        let b = parse_expr("  w * x +\tz*y ", &["x", "y", "w", "z"]).unwrap();
        let p = [0.3, 0.4, 0.5, 0.6];
        assert_eq!(a.eval(&p).unwrap(), b.eval(&p).unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("x +", &["x"]).is_err());
        assert!(parse_expr("q", &["x"]).is_err());
        assert!(parse_expr("foo(x)", &["x"]).is_err());
        assert!(parse_expr("(x", &["x"]).is_err());
        assert!(parse_expr("1e-3*x", &["x"]).is_ok());
    }
}
