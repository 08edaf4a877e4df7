//! A small expression language for tower elements.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" exponent)?
//! exponent := int | "(" "-"? int ("/" int)? ")"
//! atom   := int | "p" | "x" | "y" | "(" expr ")"
//! ```
//!
//! `p`, `x` and `y` take rational exponents whose reduced denominator is a
//! power of the prime; compound expressions only take non-negative integer
//! exponents. Division is only allowed by (integer multiples of) powers of
//! `p`. The result lives at the lowest tower level that holds it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::closure::LocalElem;
use crate::tower::{Monomial, TowerCtx, TowerElem, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported at position {pos}: {msg}")]
    Unsupported { pos: usize, msg: String },
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// Parses `text` in the tower family of `family` (its level is ignored).
pub fn parse_expr(text: &str, family: TowerCtx) -> Result<LocalElem, ExprError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        family: family.at_level(0),
    };
    let value = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(value.descend_to(0))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    family: TowerCtx,
}

fn combine(
    a: &LocalElem,
    b: &LocalElem,
    f: impl Fn(&LocalElem, &LocalElem) -> Result<LocalElem, TowerError>,
) -> Result<LocalElem, ExprError> {
    let (a, b) = a.align(b)?;
    Ok(f(&a, &b)?)
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn unsupported(&self, pos: usize, msg: impl Into<String>) -> ExprError {
        ExprError::Unsupported {
            pos,
            msg: msg.into(),
        }
    }

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

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<BigInt, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn expr(&mut self) -> Result<LocalElem, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = combine(&acc, &rhs, LocalElem::add)?;
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                acc = combine(&acc, &rhs, LocalElem::sub)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LocalElem, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                acc = combine(&acc, &rhs, LocalElem::mul)?;
            } else if self.eat(b'/') {
                let pos = self.pos;
                let rhs = self.unary()?;
                acc = self.divide(&acc, &rhs, pos)?;
            } else {
                return Ok(acc);
            }
        }
    }

    /// Division by `±p^e Π^a`, which is `Π^(a + e p^n)` up to sign.
    fn divide(&self, a: &LocalElem, b: &LocalElem, pos: usize) -> Result<LocalElem, ExprError> {
        let (a, b) = a.align(b)?;
        let not_p_power = || self.unsupported(pos, "division is only supported by powers of p");
        let mut terms = b.num().terms();
        let (m, c) = terms.next().ok_or_else(not_p_power)?;
        if terms.next().is_some() || m.x != 0 || m.y != 0 {
            return Err(not_p_power());
        }
        let p = self.family.p().as_bigint();
        let mut mag = c.abs();
        let mut e = 0u64;
        while !mag.is_one() {
            let (q, r) = mag.div_rem(&p);
            if !r.is_zero() {
                return Err(not_p_power());
            }
            mag = q;
            e += 1;
        }
        let n = u64::from(b.ctx().pi_order());
        let k = u64::from(m.pi) + e * n;
        let shift = k as i64 - b.denom_exp() as i64;
        let out = if shift >= 0 {
            a.div_pi(shift as u64)
        } else {
            a.mul_pi((-shift) as u64)
        };
        Ok(if c.is_negative() { out.neg() } else { out })
    }

    fn unary(&mut self) -> Result<LocalElem, ExprError> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<LocalElem, ExprError> {
        let start = self.peek().map(|_| self.pos).unwrap_or(self.pos);
        match self.peek() {
            Some(c @ (b'p' | b'x' | b'y')) => {
                self.pos += 1;
                let (num, den) = if self.eat(b'^') {
                    self.exponent()?
                } else {
                    (BigInt::one(), BigInt::one())
                };
                self.variable(c, num, den, start)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                if !self.eat(b'^') {
                    return Ok(inner);
                }
                let epos = self.pos;
                let (num, den) = self.exponent()?;
                if !den.is_one() || num.is_negative() {
                    return Err(self.unsupported(
                        epos,
                        "compound expressions only take non-negative integer exponents",
                    ));
                }
                let e = num
                    .to_u64()
                    .ok_or_else(|| self.unsupported(epos, "exponent too large"))?;
                Ok(inner.pow(e))
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let base = LocalElem::integral(TowerElem::constant(self.family, n));
                if !self.eat(b'^') {
                    return Ok(base);
                }
                let epos = self.pos;
                let (num, den) = self.exponent()?;
                if !den.is_one() || num.is_negative() {
                    return Err(self.unsupported(epos, "integer literals only take non-negative integer exponents"));
                }
                let e = num
                    .to_u64()
                    .ok_or_else(|| self.unsupported(epos, "exponent too large"))?;
                Ok(base.pow(e))
            }
            Some(_) => Err(self.syntax("expected a number, variable or '('")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    /// `(num, den)` in lowest terms with `den > 0`.
    fn exponent(&mut self) -> Result<(BigInt, BigInt), ExprError> {
        if !self.eat(b'(') {
            return Ok((self.integer()?, BigInt::one()));
        }
        let neg = self.eat(b'-');
        let mut num = self.integer()?;
        if neg {
            num = -num;
        }
        let mut den = BigInt::one();
        if self.eat(b'/') {
            let pos = self.pos;
            den = self.integer()?;
            if den.is_zero() {
                return Err(ExprError::Syntax {
                    pos,
                    msg: "zero denominator".into(),
                });
            }
        }
        self.expect(b')')?;
        let g = num.gcd(&den);
        Ok((num / &g, den / g))
    }

    fn variable(&self, name: u8, num: BigInt, den: BigInt, pos: usize) -> Result<LocalElem, ExprError> {
        let p = self.family.p().as_bigint();
        let mut level = 0u32;
        let mut rest = den.clone();
        while !rest.is_one() {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                return Err(self.unsupported(
                    pos,
                    format!("exponent denominator {den} is not a power of {p}"),
                ));
            }
            rest = q;
            level += 1;
        }
        let ctx = self.family.at_level(level);
        let too_large = || self.unsupported(pos, "exponent too large");
        let e = num.abs().to_u32().ok_or_else(too_large)?;
        if num.is_negative() {
            if name != b'p' {
                return Err(self.unsupported(pos, "only p takes negative exponents"));
            }
            return Ok(LocalElem::new(TowerElem::one(ctx), u64::from(e)));
        }
        let m = match name {
            b'p' => Monomial::new(e, 0, 0),
            b'x' => Monomial::new(0, e, 0),
            _ => Monomial::new(0, 0, e),
        };
        Ok(LocalElem::integral(TowerElem::normalize(ctx, [(m, BigInt::one())])))
    }
}
