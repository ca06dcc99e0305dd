//! Recursive-descent parser for the infix expression language.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" integer)?
//! base   := number | ident | "(" expr ")"
//!         | ("sin"|"cos"|"exp"|"sqrt"|"-") "(" expr ")" | "-" base
//! ```
//!
//! A leading minus binds tighter than `^`, so `-x^2` is `(-x)^2`.

use std::sync::Arc;

use super::{BinaryOp, Coords, Node, ScalarExpr, UnaryOp};
use crate::error::{Error, Result};

/// Parses `source` over the coordinate names in `coords`.
pub fn parse(source: &str, coords: &Coords) -> Result<ScalarExpr> {
    let mut parser = Parser {
        src: source.as_bytes(),
        pos: 0,
        coords,
    };
    let root = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(ScalarExpr::from_node(root, coords.clone()))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: &'a Coords,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
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

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        if self.eat(byte) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", byte as char)))
        }
    }

    fn expr(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Arc::new(Node::Binary(op, lhs, rhs));
        }
    }

    fn term(&mut self) -> Result<Arc<Node>> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Arc::new(Node::Binary(op, lhs, rhs));
        }
    }

    fn factor(&mut self) -> Result<Arc<Node>> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a non-negative integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let exponent: u32 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        Ok(Arc::new(Node::Pow(base, exponent)))
    }

    fn base(&mut self) -> Result<Arc<Node>> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(Arc::new(Node::Unary(UnaryOp::Neg, inner)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Arc<Node>> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.error("malformed exponent in number"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(Arc::new(Node::Const(value)))
    }

    fn identifier(&mut self) -> Result<Arc<Node>> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let function = match name {
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            "exp" => Some(UnaryOp::Exp),
            "sqrt" => Some(UnaryOp::Sqrt),
            _ => None,
        };
        if let Some(op) = function {
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(Arc::new(Node::Unary(op, arg)));
            }
        }
        match self.coords.iter().position(|c| c == name) {
            Some(index) => Ok(Arc::new(Node::Coord(index))),
            None => Err(Error::UnknownCoordinate {
                name: name.to_string(),
                offset: start,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::coords;
    use super::*;

    fn xyz() -> Coords {
        coords(&["x", "y", "z"])
    }

    #[test]
    fn three_leaf_tree() {
        let e = parse("z - y*x", &xyz()).unwrap();
        let Node::Binary(BinaryOp::Sub, lhs, rhs) = e.node() else {
            panic!("expected a difference, got {e}");
        };
        assert_eq!(**lhs, Node::Coord(2));
        assert_eq!(
            **rhs,
            Node::Binary(BinaryOp::Mul, Arc::new(Node::Coord(1)), Arc::new(Node::Coord(0)))
        );
    }

    #[test]
    fn unclosed_parenthesis_offset() {
        assert!(parse("(x^2 + y^2)/2", &xyz()).is_ok());
        let err = parse("(x^2", &xyz()).unwrap_err();
        assert!(matches!(err, Error::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_coordinate_reports_name_and_offset() {
        let err = parse("x + w", &xyz()).unwrap_err();
        assert_eq!(
            err,
            Error::UnknownCoordinate {
                name: "w".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn leading_minus_binds_tighter_than_power() {
        let e = parse("-x^2", &xyz()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]).unwrap(), 9.0);
        let e = parse("-(x^2)", &xyz()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]).unwrap(), -9.0);
        let e = parse("0 - x^2", &xyz()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0, 0.0]).unwrap(), -9.0);
    }

    #[test]
    fn numbers_and_functions() {
        let e = parse("1.5e1 + .5 + sqrt(4) + exp(0) + cos(0) - sin(0)", &xyz()).unwrap();
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 15.0 + 0.5 + 2.0 + 1.0 + 1.0);
    }

    #[test]
    fn rejects_malformed_input() {
        for (src, offset) in [("", 0), ("x +", 3), ("x ^ y", 4), ("2 3", 2), ("x # y", 2), ("1e", 1)] {
            match parse(src, &xyz()) {
                Err(Error::Syntax { offset: o, .. }) => assert_eq!(o, offset, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
