use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

const MAX_DEPTH: usize = 32;

/// Parse tree of the weight grammar
/// `pow:a | const:c | dyadic:s | shiftpow:a,c | prod:[e, ...]`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightExpr {
    /// `|x|^a`
    Pow(f64),
    Const(f64),
    /// `2^{k s}`
    Dyadic(f64),
    /// `(c + |x|)^a`
    ShiftPow(f64, f64),
    Prod(Vec<WeightExpr>),
}

impl WeightExpr {
    pub fn powf(&self, s: f64) -> WeightExpr {
        match self {
            WeightExpr::Pow(a) => WeightExpr::Pow(a * s),
            WeightExpr::Const(c) => WeightExpr::Const(c.powf(s)),
            WeightExpr::Dyadic(d) => WeightExpr::Dyadic(d * s),
            WeightExpr::ShiftPow(a, c) => WeightExpr::ShiftPow(a * s, *c),
            WeightExpr::Prod(items) => WeightExpr::Prod(items.iter().map(|e| e.powf(s)).collect()),
        }
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Pow(a) => write!(f, "pow:{a}"),
            WeightExpr::Const(c) => write!(f, "const:{c}"),
            WeightExpr::Dyadic(s) => write!(f, "dyadic:{s}"),
            WeightExpr::ShiftPow(a, c) => write!(f, "shiftpow:{a},{c}"),
            WeightExpr::Prod(items) => {
                write!(f, "prod:[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("weight expression `{}` at byte {}: {msg}", self.src, self.pos))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{token}`")))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit()
                    || c == '.'
                    || c == 'e'
                    || c == 'E'
                    || ((c == '-' || c == '+') && (i == 0 || matches!(rest.as_bytes()[i - 1], b'e' | b'E'))))
            })
            .map_or(rest.len(), |(i, _)| i);
        let value: f64 = rest[..len].parse().map_err(|_| self.err("expected a number"))?;
        if !value.is_finite() {
            return Err(self.err("number is not finite"));
        }
        self.pos += len;
        Ok(value)
    }

    fn expr(&mut self, depth: usize) -> Result<WeightExpr> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        if self.eat("pow:") {
            Ok(WeightExpr::Pow(self.number()?))
        } else if self.eat("const:") {
            let c = self.number()?;
            if c <= 0.0 {
                return Err(self.err("const must be positive"));
            }
            Ok(WeightExpr::Const(c))
        } else if self.eat("dyadic:") {
            Ok(WeightExpr::Dyadic(self.number()?))
        } else if self.eat("shiftpow:") {
            let a = self.number()?;
            self.expect(",")?;
            let c = self.number()?;
            if c <= 0.0 {
                return Err(self.err("shiftpow offset must be positive"));
            }
            Ok(WeightExpr::ShiftPow(a, c))
        } else if self.eat("prod:") {
            self.expect("[")?;
            let mut items = Vec::new();
            if !self.eat("]") {
                loop {
                    items.push(self.expr(depth + 1)?);
                    if self.eat("]") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            Ok(WeightExpr::Prod(items))
        } else {
            Err(self.err("expected one of pow:, const:, dyadic:, shiftpow:, prod:"))
        }
    }
}

impl FromStr for WeightExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let e = p.expr(0)?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}
