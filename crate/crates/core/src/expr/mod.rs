//! Real-valued coordinate expressions.
//!
//! [`ScalarExpr`] is an immutable expression tree over an ordered list of
//! coordinate names. It evaluates to a plain value or to a second-order
//! [`Jet2`], and supports symbolic partial differentiation and substitution,
//! which is all the exterior calculus layer needs.
//!
//! Parsed trees are kept verbatim. Trees built through the arithmetic
//! operators fold constants and drop neutral elements so that repeated
//! differentiation does not pile up `0 * x` terms.

mod jet;
mod parse;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::Result;

pub use jet::Jet2;
pub use parse::parse;

/// Shared, ordered coordinate names of a chart.
pub type Coords = Arc<[String]>;

/// Builds a coordinate list from names.
pub fn coords<S: AsRef<str>>(names: &[S]) -> Coords {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Coord(usize),
    Unary(UnaryOp, Arc<Node>),
    Binary(BinaryOp, Arc<Node>, Arc<Node>),
    Pow(Arc<Node>, u32),
}

/// Expression over the coordinates of a chart.
#[derive(Clone)]
pub struct ScalarExpr {
    root: Arc<Node>,
    coords: Coords,
}

impl ScalarExpr {
    pub(crate) fn from_node(root: Arc<Node>, coords: Coords) -> Self {
        Self { root, coords }
    }

    pub fn constant(value: f64, coords: &Coords) -> Self {
        Self::from_node(Arc::new(Node::Const(value)), coords.clone())
    }

    pub fn zero(coords: &Coords) -> Self {
        Self::constant(0.0, coords)
    }

    pub fn one(coords: &Coords) -> Self {
        Self::constant(1.0, coords)
    }

    /// The coordinate function with the given index.
    pub fn coordinate(index: usize, coords: &Coords) -> Self {
        assert!(index < coords.len(), "coordinate index out of range");
        Self::from_node(Arc::new(Node::Coord(index)), coords.clone())
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn node(&self) -> &Node {
        &self.root
    }

    /// Names of the coordinates that actually occur, in chart order.
    pub fn free_coords(&self) -> Vec<&str> {
        let mut used = vec![false; self.coords.len()];
        mark_coords(&self.root, &mut used);
        self.coords
            .iter()
            .zip(used)
            .filter_map(|(name, u)| u.then_some(name.as_str()))
            .collect()
    }

    /// `Some(c)` when the tree contains no coordinate reference.
    pub fn constant_value(&self) -> Option<f64> {
        fn has_coord(node: &Node) -> bool {
            match node {
                Node::Const(_) => false,
                Node::Coord(_) => true,
                Node::Unary(_, a) | Node::Pow(a, _) => has_coord(a),
                Node::Binary(_, a, b) => has_coord(a) || has_coord(b),
            }
        }
        if has_coord(&self.root) {
            None
        } else {
            jet::eval_value(&self.root, &vec![0.0; self.dim()]).ok()
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self.root, Node::Const(c) if c == 0.0)
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(crate::Error::PointDimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        jet::eval_value(&self.root, point)
    }

    /// Value, gradient and Hessian at `point`, exact up to rounding.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2> {
        self.check_point(point)?;
        jet::eval_jet(&self.root, point)
    }

    /// Symbolic partial derivative with respect to coordinate `index`.
    pub fn partial(&self, index: usize) -> Self {
        Self::from_node(diff(&self.root, index), self.coords.clone())
    }

    /// Replaces every coordinate `i` by `images[i]`; the result lives on the
    /// coordinate list shared by the images.
    pub fn substitute(&self, images: &[ScalarExpr]) -> Self {
        assert_eq!(images.len(), self.dim(), "one image per coordinate");
        let target = images
            .first()
            .map(|e| e.coords.clone())
            .unwrap_or_else(|| self.coords.clone());
        for image in images {
            assert_same_coords(&target, &image.coords);
        }
        let roots: Vec<Arc<Node>> = images.iter().map(|e| e.root.clone()).collect();
        Self::from_node(subst(&self.root, &roots), target)
    }

    /// Re-homes the expression on a coordinate list that extends this one
    /// (same names at the same indices, possibly more after them).
    pub fn extend_to(&self, coords: &Coords) -> Self {
        assert!(
            coords.len() >= self.dim() && coords[..self.dim()] == self.coords[..],
            "target coordinates must extend the source coordinates"
        );
        Self::from_node(self.root.clone(), coords.clone())
    }

    pub fn powi(&self, n: u32) -> Self {
        Self::from_node(pow(self.root.clone(), n), self.coords.clone())
    }

    pub fn sin(&self) -> Self {
        self.unary(UnaryOp::Sin)
    }

    pub fn cos(&self) -> Self {
        self.unary(UnaryOp::Cos)
    }

    pub fn exp(&self) -> Self {
        self.unary(UnaryOp::Exp)
    }

    pub fn sqrt(&self) -> Self {
        self.unary(UnaryOp::Sqrt)
    }

    fn unary(&self, op: UnaryOp) -> Self {
        Self::from_node(unary(op, self.root.clone()), self.coords.clone())
    }

    fn binary(&self, op: BinaryOp, other: &Self) -> Self {
        assert_same_coords(&self.coords, &other.coords);
        Self::from_node(
            binary(op, self.root.clone(), other.root.clone()),
            self.coords.clone(),
        )
    }
}

fn assert_same_coords(a: &Coords, b: &Coords) {
    assert!(
        Arc::ptr_eq(a, b) || a[..] == b[..],
        "expressions live on different coordinate lists: {a:?} vs {b:?}"
    );
}

fn mark_coords(node: &Node, used: &mut [bool]) {
    match node {
        Node::Const(_) => {}
        Node::Coord(i) => used[*i] = true,
        Node::Unary(_, a) | Node::Pow(a, _) => mark_coords(a, used),
        Node::Binary(_, a, b) => {
            mark_coords(a, used);
            mark_coords(b, used);
        }
    }
}

fn constant(c: f64) -> Arc<Node> {
    Arc::new(Node::Const(c))
}

fn as_const(node: &Node) -> Option<f64> {
    match node {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn unary(op: UnaryOp, a: Arc<Node>) -> Arc<Node> {
    if as_const(&a).is_some() {
        if let Ok(v) = jet::eval_value(&Node::Unary(op, a.clone()), &[]) {
            return constant(v);
        }
    }
    if op == UnaryOp::Neg {
        if let Node::Unary(UnaryOp::Neg, inner) = &*a {
            return inner.clone();
        }
    }
    Arc::new(Node::Unary(op, a))
}

fn binary(op: BinaryOp, a: Arc<Node>, b: Arc<Node>) -> Arc<Node> {
    let (ca, cb) = (as_const(&a), as_const(&b));
    if let (Some(x), Some(y)) = (ca, cb) {
        if !(op == BinaryOp::Div && y == 0.0) {
            return constant(match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
                BinaryOp::Div => x / y,
            });
        }
    }
    match op {
        BinaryOp::Add if ca == Some(0.0) => b,
        BinaryOp::Add | BinaryOp::Sub if cb == Some(0.0) => a,
        BinaryOp::Sub if ca == Some(0.0) => unary(UnaryOp::Neg, b),
        BinaryOp::Mul if ca == Some(0.0) || cb == Some(0.0) => constant(0.0),
        BinaryOp::Mul if ca == Some(1.0) => b,
        BinaryOp::Mul | BinaryOp::Div if cb == Some(1.0) => a,
        BinaryOp::Mul if ca == Some(-1.0) => unary(UnaryOp::Neg, b),
        BinaryOp::Mul if cb == Some(-1.0) => unary(UnaryOp::Neg, a),
        BinaryOp::Div if ca == Some(0.0) => constant(0.0),
        _ => Arc::new(Node::Binary(op, a, b)),
    }
}

fn pow(a: Arc<Node>, n: u32) -> Arc<Node> {
    match (n, as_const(&a)) {
        (0, _) => constant(1.0),
        (1, _) => a,
        (_, Some(c)) => constant(jet::powi(c, n)),
        _ => Arc::new(Node::Pow(a, n)),
    }
}

fn diff(node: &Node, var: usize) -> Arc<Node> {
    use BinaryOp::*;
    match node {
        Node::Const(_) => constant(0.0),
        Node::Coord(i) => constant(if *i == var { 1.0 } else { 0.0 }),
        Node::Unary(op, u) => {
            let du = diff(u, var);
            if as_const(&du) == Some(0.0) {
                return constant(0.0);
            }
            let outer = match op {
                UnaryOp::Neg => return unary(UnaryOp::Neg, du),
                UnaryOp::Sin => unary(UnaryOp::Cos, u.clone()),
                UnaryOp::Cos => unary(UnaryOp::Neg, unary(UnaryOp::Sin, u.clone())),
                UnaryOp::Exp => unary(UnaryOp::Exp, u.clone()),
                UnaryOp::Sqrt => binary(
                    Div,
                    constant(0.5),
                    unary(UnaryOp::Sqrt, u.clone()),
                ),
            };
            binary(Mul, outer, du)
        }
        Node::Binary(op, a, b) => {
            let da = diff(a, var);
            let db = diff(b, var);
            match op {
                Add => binary(Add, da, db),
                Sub => binary(Sub, da, db),
                Mul => binary(
                    Add,
                    binary(Mul, da, b.clone()),
                    binary(Mul, a.clone(), db),
                ),
                Div => {
                    // (a/b)' = a'/b - a b' / b^2
                    let first = binary(Div, da, b.clone());
                    if as_const(&db) == Some(0.0) {
                        return first;
                    }
                    let second = binary(
                        Div,
                        binary(Mul, a.clone(), db),
                        pow(b.clone(), 2),
                    );
                    binary(Sub, first, second)
                }
            }
        }
        Node::Pow(u, n) => {
            let du = diff(u, var);
            let outer = binary(Mul, constant(*n as f64), pow(u.clone(), n - 1));
            binary(Mul, outer, du)
        }
    }
}

fn subst(node: &Node, images: &[Arc<Node>]) -> Arc<Node> {
    match node {
        Node::Const(c) => constant(*c),
        Node::Coord(i) => images[*i].clone(),
        Node::Unary(op, a) => unary(*op, subst(a, images)),
        Node::Binary(op, a, b) => binary(*op, subst(a, images), subst(b, images)),
        Node::Pow(a, n) => pow(subst(a, images), *n),
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({self})")
    }
}

/// Prints in the input grammar. Parentheses follow the tree exactly, so
/// reparsing reproduces the same floating-point evaluation order.
impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.coords)
    }
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_SUM,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_PRODUCT,
        Node::Pow(..) => PREC_POWER,
        // a negative literal prints as `-c`, which parses as a negation
        _ => PREC_ATOM,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, node: &Node, coords: &Coords, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "(")?;
        write_node(f, node, coords)?;
        write!(f, ")")
    } else {
        write_node(f, node, coords)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, coords: &Coords) -> fmt::Result {
    match node {
        Node::Const(c) => {
            if c.is_sign_negative() {
                write!(f, "-{:?}", -c)
            } else {
                write!(f, "{c:?}")
            }
        }
        Node::Coord(i) => write!(f, "{}", coords[*i]),
        Node::Unary(op, a) => {
            let name = match op {
                UnaryOp::Neg => {
                    write!(f, "-")?;
                    return write_wrapped(f, a, coords, precedence(a) < PREC_ATOM);
                }
                UnaryOp::Sin => "sin",
                UnaryOp::Cos => "cos",
                UnaryOp::Exp => "exp",
                UnaryOp::Sqrt => "sqrt",
            };
            write!(f, "{name}(")?;
            write_node(f, a, coords)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            let (prec, sym) = match op {
                BinaryOp::Add => (PREC_SUM, "+"),
                BinaryOp::Sub => (PREC_SUM, "-"),
                BinaryOp::Mul => (PREC_PRODUCT, "*"),
                BinaryOp::Div => (PREC_PRODUCT, "/"),
            };
            write_wrapped(f, a, coords, precedence(a) < prec)?;
            write!(f, " {sym} ")?;
            write_wrapped(f, b, coords, precedence(b) <= prec)
        }
        Node::Pow(a, n) => {
            write_wrapped(f, a, coords, precedence(a) < PREC_ATOM)?;
            write!(f, "^{n}")
        }
    }
}

impl Add for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: &ScalarExpr) -> ScalarExpr {
        self.binary(BinaryOp::Add, rhs)
    }
}

impl Sub for &ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: &ScalarExpr) -> ScalarExpr {
        self.binary(BinaryOp::Sub, rhs)
    }
}

impl Mul for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: &ScalarExpr) -> ScalarExpr {
        self.binary(BinaryOp::Mul, rhs)
    }
}

impl Div for &ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: &ScalarExpr) -> ScalarExpr {
        self.binary(BinaryOp::Div, rhs)
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        self.unary(UnaryOp::Neg)
    }
}

impl Mul<f64> for &ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: f64) -> ScalarExpr {
        &ScalarExpr::constant(rhs, &self.coords) * self
    }
}

impl Add<f64> for &ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: f64) -> ScalarExpr {
        self + &ScalarExpr::constant(rhs, &self.coords)
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: ScalarExpr) -> ScalarExpr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ScalarExpr> for ScalarExpr {
            type Output = ScalarExpr;
            fn $m(self, rhs: &ScalarExpr) -> ScalarExpr {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul, Div::div);

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        -&self
    }
}

impl Mul<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: f64) -> ScalarExpr {
        &self * rhs
    }
}

impl Add<f64> for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: f64) -> ScalarExpr {
        &self + rhs
    }
}
