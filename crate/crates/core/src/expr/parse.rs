//! Text syntax for expressions.
//!
//! Infix `+ - * / ^` with the usual precedence, parentheses, decimal
//! literals (parsed exactly), imaginary literals such as `2i` or `0.5i`,
//! the constant `i`, atoms `z1..zn`, `zb1..zbn`, `t`, and the functions
//! `conj re im exp log pow abs2 abs sqrt add mul sub div neg`. The prefix
//! form produced by `Display` parses back to an equal expression.
//!
//! Real powers and logarithms written in text are certified: the operand is
//! asserted positive and evaluation checks the assertion.

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use super::Expr;
use crate::error::{Error, Result};
use crate::hgroup::{ExactComplex, Rational};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        pos,
        msg: msg.into(),
    })
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos, format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.unary()?;
            } else if self.eat(b'/') {
                let at = self.pos;
                let d = self.unary()?;
                acc = acc * reciprocal(&d, at)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat(b'^') {
            let at = self.pos;
            let e = self.unary()?;
            return power(&base, &e, at);
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<Rational> {
        let start = self.pos;
        let mut digits = String::new();
        let mut scale: i64 = 0;
        let mut seen_dot = false;
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    scale += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return err(start, "malformed number");
        }
        let mut exp10: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E'))
            && self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
        {
            self.pos += 1;
            let es = self.pos;
            if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
                self.pos += 1;
            }
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[es..self.pos]).unwrap();
            exp10 = match text.parse() {
                Ok(v) => v,
                Err(_) => return err(es, "malformed exponent"),
            };
        }
        let mantissa: BigInt = digits.parse().expect("digits");
        let shift = exp10 - scale;
        let ten = BigInt::from(10);
        let p = num_traits::pow(ten, shift.unsigned_abs() as usize);
        Ok(if shift >= 0 {
            Rational::from_integer(mantissa * p)
        } else {
            Rational::new(mantissa, p)
        })
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect(b'(')?;
        let mut out = Vec::new();
        if self.eat(b')') {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(b')') {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => err(at, "unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let r = self.number()?;
                if self.src.get(self.pos) == Some(&b'i')
                    && !self
                        .src
                        .get(self.pos + 1)
                        .is_some_and(|c| c.is_ascii_alphanumeric())
                {
                    self.pos += 1;
                    Ok(Expr::constant(ExactComplex::new(Rational::zero(), r)))
                } else {
                    Ok(Expr::real(r))
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                self.named(&name, at)
            }
            Some(c) => err(at, format!("unexpected character '{}'", c as char)),
        }
    }

    fn named(&mut self, name: &str, at: usize) -> Result<Expr> {
        if name == "t" {
            return Ok(Expr::t());
        }
        if name == "i" {
            return Ok(Expr::i());
        }
        if let Some(k) = name.strip_prefix("zb").and_then(atom_index) {
            return Ok(Expr::zb(k));
        }
        if let Some(k) = name.strip_prefix('z').and_then(atom_index) {
            return Ok(Expr::z(k));
        }
        let args = self.args()?;
        let arity = |k: usize| -> Result<()> {
            if args.len() == k {
                Ok(())
            } else {
                err(
                    at,
                    format!("{name} takes {k} argument(s), got {}", args.len()),
                )
            }
        };
        match name {
            "conj" => arity(1).map(|_| args[0].conj()),
            "re" => arity(1).map(|_| args[0].re()),
            "im" => arity(1).map(|_| args[0].im()),
            "exp" => arity(1).map(|_| args[0].exp()),
            "log" => arity(1).map(|_| args[0].log_pos()),
            "abs2" => arity(1).map(|_| args[0].abs2()),
            "abs" => arity(1).map(|_| args[0].modulus()),
            "sqrt" => arity(1).map(|_| args[0].pow_pos(Rational64::new(1, 2))),
            "neg" => arity(1).map(|_| -args[0].clone()),
            "pow" => {
                arity(2)?;
                power(&args[0], &args[1], at)
            }
            "sub" => arity(2).map(|_| args[0].clone() - args[1].clone()),
            "div" => {
                arity(2)?;
                Ok(args[0].clone() * reciprocal(&args[1], at)?)
            }
            "add" => Ok(Expr::sum(args)),
            "mul" => Ok(Expr::product(args)),
            _ => err(at, format!("unknown function '{name}'")),
        }
    }
}

fn atom_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (k >= 1).then(|| k - 1)
}

fn reciprocal(d: &Expr, at: usize) -> Result<Expr> {
    if d.is_zero() {
        return err(at, "division by zero");
    }
    Ok(d.pow_int(-1))
}

fn power(base: &Expr, e: &Expr, at: usize) -> Result<Expr> {
    let r = match e.as_constant().and_then(|c| c.as_real()) {
        Some(r) => r.clone(),
        None => return err(at, "exponent must be a real rational constant"),
    };
    let (n, d) = match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => (n, d),
        _ => return err(at, "exponent out of range"),
    };
    let p = Rational64::new(n, d);
    if p.is_integer() {
        if p.to_integer() < 0 && base.is_zero() {
            return err(at, "negative power of zero");
        }
        Ok(base.pow_int(p.to_integer()))
    } else {
        Ok(base.pow_pos(p))
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(e)
}

/// One expression per line; `#` starts a comment; blank lines are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Expr>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.lines() {
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push(parse(body).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos: offset + pos,
                    msg,
                },
                other => other,
            })?);
        }
        offset += line.len() + 1;
    }
    Ok(out)
}
