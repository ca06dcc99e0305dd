//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar function at
//! a point. Every propagation rule below writes entry `(i, j)` with a formula
//! that is symmetric in `i` and `j` under commutative floating-point
//! operations, so the Hessian is exactly symmetric without a
//! symmetrization pass.

use super::{BinaryOp, Node, UnaryOp};
use crate::error::{Error, Result};

/// Value, gradient and Hessian of a scalar function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Row-major `dim x dim`.
    pub hessian: Vec<f64>,
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: vec![0.0; dim],
            hessian: vec![0.0; dim * dim],
        }
    }

    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut jet = Self::constant(value, dim);
        jet.gradient[index] = 1.0;
        jet
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    /// `∂_i ∂_j f`
    #[inline]
    pub fn second(&self, i: usize, j: usize) -> f64 {
        self.hessian[i * self.dim() + j]
    }

    fn combine(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            value: f(self.value, other.value),
            gradient: zip_map(&self.gradient, &other.gradient, &f),
            hessian: zip_map(&self.hessian, &other.hessian, &f),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let n = self.dim();
        let (a, b) = (self.value, other.value);
        let gradient = (0..n)
            .map(|i| a * other.gradient[i] + b * self.gradient[i])
            .collect();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hessian[i * n + j] = a * other.hessian[i * n + j]
                    + b * self.hessian[i * n + j]
                    + (self.gradient[i] * other.gradient[j] + other.gradient[i] * self.gradient[j]);
            }
        }
        Self {
            value: a * b,
            gradient,
            hessian,
        }
    }

    /// Quotient from the identity `a = q b` differentiated twice.
    fn div(&self, other: &Self, point: &[f64]) -> Result<Self> {
        let b = other.value;
        if b == 0.0 {
            return Err(Error::DivisionByZero {
                point: point.to_vec(),
            });
        }
        let n = self.dim();
        let q = self.value / b;
        let gradient: Vec<f64> = (0..n)
            .map(|i| (self.gradient[i] - q * other.gradient[i]) / b)
            .collect();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hessian[i * n + j] = (self.hessian[i * n + j]
                    - q * other.hessian[i * n + j]
                    - (gradient[i] * other.gradient[j] + other.gradient[i] * gradient[j]))
                    / b;
            }
        }
        Ok(Self {
            value: q,
            gradient,
            hessian,
        })
    }

    /// Chain rule for `f(u)` given `f(u)`, `f'(u)`, `f''(u)`.
    fn compose(&self, f: f64, df: f64, ddf: f64) -> Self {
        let n = self.dim();
        let gradient = self.gradient.iter().map(|g| df * g).collect();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hessian[i * n + j] =
                    df * self.hessian[i * n + j] + ddf * (self.gradient[i] * self.gradient[j]);
            }
        }
        Self {
            value: f,
            gradient,
            hessian,
        }
    }
}

fn zip_map(a: &[f64], b: &[f64], f: &impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

pub(crate) fn eval_value(node: &Node, point: &[f64]) -> Result<f64> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Coord(i) => point[*i],
        Node::Unary(op, u) => {
            let u = eval_value(u, point)?;
            match op {
                UnaryOp::Neg => -u,
                UnaryOp::Sin => u.sin(),
                UnaryOp::Cos => u.cos(),
                UnaryOp::Exp => u.exp(),
                UnaryOp::Sqrt => {
                    check_sqrt(u, false, point)?;
                    u.sqrt()
                }
            }
        }
        Node::Binary(op, a, b) => {
            let a = eval_value(a, point)?;
            let b = eval_value(b, point)?;
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => {
                    if b == 0.0 {
                        return Err(Error::DivisionByZero {
                            point: point.to_vec(),
                        });
                    }
                    a / b
                }
            }
        }
        Node::Pow(u, n) => powi(eval_value(u, point)?, *n),
    })
}

pub(crate) fn eval_jet(node: &Node, point: &[f64]) -> Result<Jet2> {
    let dim = point.len();
    Ok(match node {
        Node::Const(c) => Jet2::constant(*c, dim),
        Node::Coord(i) => Jet2::variable(point[*i], *i, dim),
        Node::Unary(op, u) => {
            let u = eval_jet(u, point)?;
            let x = u.value;
            match op {
                UnaryOp::Neg => u.compose(-x, -1.0, 0.0),
                UnaryOp::Sin => u.compose(x.sin(), x.cos(), -x.sin()),
                UnaryOp::Cos => u.compose(x.cos(), -x.sin(), -x.cos()),
                UnaryOp::Exp => {
                    let e = x.exp();
                    u.compose(e, e, e)
                }
                UnaryOp::Sqrt => {
                    check_sqrt(x, true, point)?;
                    let s = x.sqrt();
                    u.compose(s, 0.5 / s, -0.25 / (s * s * s))
                }
            }
        }
        Node::Binary(op, a, b) => {
            let a = eval_jet(a, point)?;
            let b = eval_jet(b, point)?;
            match op {
                BinaryOp::Add => a.combine(&b, |x, y| x + y),
                BinaryOp::Sub => a.combine(&b, |x, y| x - y),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => a.div(&b, point)?,
            }
        }
        Node::Pow(u, n) => {
            let u = eval_jet(u, point)?;
            let x = u.value;
            let n = *n;
            match n {
                0 => Jet2::constant(1.0, dim),
                1 => u,
                _ => {
                    let nf = n as f64;
                    u.compose(
                        powi(x, n),
                        nf * powi(x, n - 1),
                        nf * (nf - 1.0) * powi(x, n - 2),
                    )
                }
            }
        }
    })
}

#[inline]
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

/// The jet path needs `x > 0`: the derivative of `sqrt` blows up at zero.
fn check_sqrt(x: f64, strict: bool, point: &[f64]) -> Result<()> {
    if x < 0.0 || (strict && x == 0.0) || x.is_nan() {
        return Err(Error::Domain {
            message: format!("sqrt of {x}"),
            point: point.to_vec(),
        });
    }
    Ok(())
}
