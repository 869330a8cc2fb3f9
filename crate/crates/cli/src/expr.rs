//! Infix expressions over PB literals.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := power (("*" | "/") power)*
//! power    := atom ("^" exponent)*
//! atom     := pb-literal | "(" expr ")"
//! exponent := ["-"] digits ["." digits] | "(" ["-"] digits ("/" digits | "." digits)? ")"
//! ```
//!
//! All binary operators are left-associative. `+` and `-` convert through
//! positional arithmetic and leave a receipt each.

use num_bigint::BigInt;
use num_rational::BigRational;

use primebag::convert::{self, ConversionReceipt};
use primebag::pbnum::{self, NumberMode, PrimeBag};
use primebag::{Error, Result};

pub fn evaluate(text: &str, mode: NumberMode, receipts: &mut Vec<ConversionReceipt>) -> Result<PrimeBag> {
    let mut p = ExprParser { text, pos: 0, mode, receipts };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

struct ExprParser<'a, 'r> {
    text: &'a str,
    pos: usize,
    mode: NumberMode,
    receipts: &'r mut Vec<ConversionReceipt>,
}

impl ExprParser<'_, '_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn gate(&self, bag: PrimeBag) -> Result<PrimeBag> {
        self.mode.check(&bag)?;
        Ok(bag)
    }

    fn expr(&mut self) -> Result<PrimeBag> {
        let mut acc = self.term()?;
        loop {
            let add = match self.peek() {
                Some('+') => true,
                Some('-') | Some('\u{2212}') => false,
                _ => return Ok(acc),
            };
            let c = self.peek().unwrap();
            self.pos += c.len_utf8();
            let rhs = self.term()?;
            let (bag, receipt) = if add { convert::add(&acc, &rhs)? } else { convert::sub(&acc, &rhs)? };
            self.receipts.push(receipt);
            acc = self.gate(bag)?;
        }
    }

    fn term(&mut self) -> Result<PrimeBag> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') || self.eat('\u{00d7}') {
                let rhs = self.power()?;
                acc = self.gate(pbnum::mul(&acc, &rhs)?)?;
            } else if self.eat('/') || self.eat('\u{00f7}') {
                let rhs = self.power()?;
                acc = self.gate(pbnum::div_exact(&acc, &rhs)?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<PrimeBag> {
        let mut acc = self.atom()?;
        while self.eat('^') {
            let q = self.exponent()?;
            acc = self.gate(pbnum::pow(&acc, &q, self.mode)?)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<PrimeBag> {
        if self.eat('(') {
            let v = self.expr()?;
            if !self.eat(')') {
                return Err(self.error("expected ')'"));
            }
            return Ok(v);
        }
        self.skip_ws();
        let (bag, used) = pbnum::parse_prefix(self.rest()).map_err(|e| match e {
            Error::Parse { offset, message } => Error::Parse {
                offset: self.pos + offset,
                message,
            },
            other => other,
        })?;
        self.pos += used;
        self.gate(bag)
    }

    fn exponent(&mut self) -> Result<BigRational> {
        if self.eat('(') {
            let q = self.number(true)?;
            if !self.eat(')') {
                return Err(self.error("expected ')' after exponent"));
            }
            Ok(q)
        } else {
            self.number(false)
        }
    }

    /// `["-"] digits` then `"." digits`, or `"/" digits` when `fraction`.
    fn number(&mut self, fraction: bool) -> Result<BigRational> {
        self.skip_ws();
        let negative = self.eat('-');
        let whole = self.digits()?;
        let q = if self.rest().starts_with('.') {
            self.pos += 1;
            let start = self.pos;
            let frac = self.digits()?;
            let scale = BigInt::from(10u32).pow((self.pos - start) as u32);
            BigRational::new(whole * &scale + frac, scale)
        } else if fraction && self.eat('/') {
            let d = self.digits()?;
            if d == BigInt::from(0) {
                return Err(self.error("zero denominator in exponent"));
            }
            BigRational::new(whole, d)
        } else {
            BigRational::from_integer(whole)
        };
        Ok(if negative { -q } else { q })
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let len = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return Err(self.error("expected a number"));
        }
        let n = self.rest()[..len].parse().map_err(|_| self.error("bad number"))?;
        self.pos += len;
        Ok(n)
    }
}
