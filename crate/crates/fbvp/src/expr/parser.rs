//! Recursive-descent parser for the expression grammar.

use crate::error::{Error, Result};

use super::{BinOp, Expr, Func, Var};

/// Parse a source string into an expression AST.
///
/// Errors carry the byte offset of the offending token.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn accept(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.accept(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
    }

    // term := factor (('*' | '/') factor)*
    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            acc = Expr::Bin(op, Box::new(acc), Box::new(rhs));
        }
    }

    // factor := unary ('^' INT)?
    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        self.skip_ws();
        if self.accept(b'^') {
            self.skip_ws();
            let k = self.integer_literal()?;
            Ok(Expr::Pow(Box::new(base), k))
        } else {
            Ok(base)
        }
    }

    // unary := '-' unary | atom
    fn unary(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.accept(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.atom()
        }
    }

    // atom := NUMBER | 'x' | 'y' | FUNC '(' expr ')' | '(' expr ')'
    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match ident {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "sin" | "cos" | "exp" | "step" => {
                        let func = match ident {
                            "sin" => Func::Sin,
                            "cos" => Func::Cos,
                            "exp" => Func::Exp,
                            _ => Func::Step,
                        };
                        self.skip_ws();
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.skip_ws();
                        self.expect(b')')?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    _ => {
                        self.pos = start;
                        Err(self.error(format!("unknown identifier '{ident}'")))
                    }
                }
            }
            Some(c) => Err(self.error(format!("unexpected character '{}'", c as char))),
        }
    }

    /// NUMBER := digits ['.' digits] [('e'|'E') ['+'|'-'] digits] | '.' digits ...
    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.accept(b'.') {
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all (e.g. "2*exp(x)" never reaches
                // here, but "2e" alone would); leave the suffix unconsumed
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if text.is_empty() || text == "." {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Const(v)),
            _ => {
                self.pos = start;
                Err(self.error(format!("malformed number '{text}'")))
            }
        }
    }

    /// Exponents must be bare nonnegative integer literals (digits only).
    fn integer_literal(&mut self) -> Result<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("exponent must be a nonnegative integer literal"));
        }
        // reject "2.5" or "2e3" style exponents outright
        if matches!(self.peek(), Some(b'.')) {
            self.pos = start;
            return Err(self.error("exponent must be a nonnegative integer literal"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<u32>().map_err(|_| {
            self.pos = start;
            self.error("exponent out of range")
        })
    }
}
