//! Closed expression trees over named domain variables.
//!
//! An [`Expr`] is an immutable, reference-counted node graph. Evaluation is
//! generic over [`Scalar`], so the same tree yields plain values (`f64`) or
//! exact second-order jets without any numeric differentiation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::NumericsError;

#[derive(Debug)]
enum Node {
    Const(f64),
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Sqrt(Expr),
    Powi(Expr, i32),
    Powf(Expr, f64),
}

/// A scalar expression in the domain variables `x_0, x_1, ...`.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

/// Arithmetic needed to evaluate an [`Expr`].
///
/// Fallible primitives report the offending primitive name through
/// [`NumericsError::Domain`].
pub trait Scalar: Clone {
    fn constant(c: f64, like: &Self) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Applies a smooth unary function given its value and first two derivatives at `self`.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self;

    fn div(&self, rhs: &Self) -> Result<Self, NumericsError> {
        let b = rhs.value();
        if b == 0.0 || !b.is_finite() {
            return Err(NumericsError::Domain {
                primitive: "div",
                value: b,
            });
        }
        let recip = rhs.chain(1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b));
        Ok(self.mul(&recip))
    }
}

impl Scalar for f64 {
    fn constant(c: f64, _like: &Self) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn chain(&self, f: f64, _df: f64, _d2f: f64) -> Self {
        f
    }
    fn div(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if *rhs == 0.0 {
            return Err(NumericsError::Domain {
                primitive: "div",
                value: *rhs,
            });
        }
        Ok(self / rhs)
    }
}

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn var(index: usize) -> Self {
        Self::from_node(Node::Var(index))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn sin(&self) -> Self {
        Self::from_node(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Self::from_node(Node::Cos(self.clone()))
    }

    pub fn exp(&self) -> Self {
        Self::from_node(Node::Exp(self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Self::from_node(Node::Sqrt(self.clone()))
    }

    pub fn powi(&self, n: i32) -> Self {
        Self::from_node(Node::Powi(self.clone(), n))
    }

    pub fn powf(&self, p: f64) -> Self {
        Self::from_node(Node::Powf(self.clone(), p))
    }

    /// Returns the constant value if this node is a literal.
    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Node::Neg(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Sqrt(a)
            | Node::Powi(a, _)
            | Node::Powf(a, _) => a.max_var(),
        }
    }

    /// Renames variable `i` to `i + offset`.
    pub fn shift_vars(&self, offset: usize) -> Self {
        let node = match &*self.0 {
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => Node::Var(i + offset),
            Node::Add(a, b) => Node::Add(a.shift_vars(offset), b.shift_vars(offset)),
            Node::Sub(a, b) => Node::Sub(a.shift_vars(offset), b.shift_vars(offset)),
            Node::Mul(a, b) => Node::Mul(a.shift_vars(offset), b.shift_vars(offset)),
            Node::Div(a, b) => Node::Div(a.shift_vars(offset), b.shift_vars(offset)),
            Node::Neg(a) => Node::Neg(a.shift_vars(offset)),
            Node::Sin(a) => Node::Sin(a.shift_vars(offset)),
            Node::Cos(a) => Node::Cos(a.shift_vars(offset)),
            Node::Exp(a) => Node::Exp(a.shift_vars(offset)),
            Node::Sqrt(a) => Node::Sqrt(a.shift_vars(offset)),
            Node::Powi(a, n) => Node::Powi(a.shift_vars(offset), *n),
            Node::Powf(a, p) => Node::Powf(a.shift_vars(offset), *p),
        };
        Self::from_node(node)
    }

    /// Substitutes each variable `x_i` by `subs[i]`.
    pub fn substitute(&self, subs: &[Expr]) -> Self {
        match &*self.0 {
            Node::Const(c) => Expr::constant(*c),
            Node::Var(i) => subs[*i].clone(),
            Node::Add(a, b) => a.substitute(subs) + b.substitute(subs),
            Node::Sub(a, b) => a.substitute(subs) - b.substitute(subs),
            Node::Mul(a, b) => a.substitute(subs) * b.substitute(subs),
            Node::Div(a, b) => a.substitute(subs) / b.substitute(subs),
            Node::Neg(a) => -a.substitute(subs),
            Node::Sin(a) => a.substitute(subs).sin(),
            Node::Cos(a) => a.substitute(subs).cos(),
            Node::Exp(a) => a.substitute(subs).exp(),
            Node::Sqrt(a) => a.substitute(subs).sqrt(),
            Node::Powi(a, n) => a.substitute(subs).powi(*n),
            Node::Powf(a, p) => a.substitute(subs).powf(*p),
        }
    }

    /// Evaluates the tree with the given variable values.
    pub fn eval<T: Scalar>(&self, vars: &[T]) -> Result<T, NumericsError> {
        let like = vars.first().ok_or(NumericsError::EmptyInput)?;
        self.eval_inner(vars, like)
    }

    fn eval_inner<T: Scalar>(&self, vars: &[T], like: &T) -> Result<T, NumericsError> {
        Ok(match &*self.0 {
            Node::Const(c) => T::constant(*c, like),
            Node::Var(i) => vars
                .get(*i)
                .cloned()
                .ok_or(NumericsError::VariableOutOfRange {
                    index: *i,
                    len: vars.len(),
                })?,
            Node::Add(a, b) => a.eval_inner(vars, like)?.add(&b.eval_inner(vars, like)?),
            Node::Sub(a, b) => a.eval_inner(vars, like)?.sub(&b.eval_inner(vars, like)?),
            Node::Mul(a, b) => a.eval_inner(vars, like)?.mul(&b.eval_inner(vars, like)?),
            Node::Div(a, b) => a.eval_inner(vars, like)?.div(&b.eval_inner(vars, like)?)?,
            Node::Neg(a) => a.eval_inner(vars, like)?.neg(),
            Node::Sin(a) => {
                let u = a.eval_inner(vars, like)?;
                let (s, c) = u.value().sin_cos();
                u.chain(s, c, -s)
            }
            Node::Cos(a) => {
                let u = a.eval_inner(vars, like)?;
                let (s, c) = u.value().sin_cos();
                u.chain(c, -s, -c)
            }
            Node::Exp(a) => {
                let u = a.eval_inner(vars, like)?;
                let e = u.value().exp();
                u.chain(e, e, e)
            }
            Node::Sqrt(a) => {
                let u = a.eval_inner(vars, like)?;
                let v = u.value();
                if v <= 0.0 || !v.is_finite() {
                    return Err(NumericsError::Domain {
                        primitive: "sqrt",
                        value: v,
                    });
                }
                let r = v.sqrt();
                u.chain(r, 0.5 / r, -0.25 / (r * v))
            }
            Node::Powi(a, n) => {
                let u = a.eval_inner(vars, like)?;
                let v = u.value();
                let n = *n;
                if n < 0 && v == 0.0 {
                    return Err(NumericsError::Domain {
                        primitive: "powi",
                        value: v,
                    });
                }
                let nf = f64::from(n);
                let f = v.powi(n);
                let df = if n == 0 { 0.0 } else { nf * v.powi(n - 1) };
                let d2f = if n == 0 || n == 1 {
                    0.0
                } else {
                    nf * (nf - 1.0) * v.powi(n - 2)
                };
                u.chain(f, df, d2f)
            }
            Node::Powf(a, p) => {
                let u = a.eval_inner(vars, like)?;
                let v = u.value();
                if v <= 0.0 || !v.is_finite() {
                    return Err(NumericsError::Domain {
                        primitive: "powf",
                        value: v,
                    });
                }
                let p = *p;
                u.chain(
                    v.powf(p),
                    p * v.powf(p - 1.0),
                    p * (p - 1.0) * v.powf(p - 2.0),
                )
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/{b}"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Powi(a, n) => write!(f, "{a}^{n}"),
            Node::Powf(a, p) => write!(f, "{a}^{p}"),
        }
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::$variant(self, rhs))
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::from_node(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::from_node(Node::$variant(self, rhs.clone()))
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::$variant(self.clone(), rhs))
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::from_node(Node::$variant(self, Expr::constant(rhs)))
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::from_node(Node::$variant(self.clone(), Expr::constant(rhs)))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::from_node(Node::$variant(Expr::constant(self), rhs))
            }
        }
        impl $trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::from_node(Node::$variant(Expr::constant(self), rhs.clone()))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::from_node(Node::Neg(self.clone()))
    }
}

/// A vector-valued map `R^m -> R^n` given by one expression per output.
#[derive(Clone, Debug)]
pub struct MapExpr {
    input_dim: usize,
    outputs: Vec<Expr>,
}

impl MapExpr {
    pub fn new(input_dim: usize, outputs: Vec<Expr>) -> Result<Self, NumericsError> {
        if input_dim == 0 || outputs.is_empty() {
            return Err(NumericsError::EmptyInput);
        }
        for e in &outputs {
            if let Some(i) = e.max_var() {
                if i >= input_dim {
                    return Err(NumericsError::VariableOutOfRange {
                        index: i,
                        len: input_dim,
                    });
                }
            }
        }
        Ok(Self { input_dim, outputs })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NumericsError> {
        self.check_input(x)?;
        self.outputs.iter().map(|e| e.eval(x)).collect()
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<(), NumericsError> {
        if x.len() != self.input_dim {
            return Err(NumericsError::DimensionMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Concatenates two maps on disjoint variable sets: `(x, y) -> (f(x), g(y))`.
    pub fn concat(&self, other: &MapExpr) -> MapExpr {
        let mut outputs = self.outputs.clone();
        outputs.extend(other.outputs.iter().map(|e| e.shift_vars(self.input_dim)));
        MapExpr {
            input_dim: self.input_dim + other.input_dim,
            outputs,
        }
    }

    /// Precomposes with an affine change of variables `x = A y + b`.
    pub fn precompose_affine(&self, a: &nalgebra::DMatrix<f64>, b: &[f64]) -> MapExpr {
        let subs: Vec<Expr> = (0..self.input_dim)
            .map(|i| {
                let mut e = Expr::constant(b[i]);
                for j in 0..a.ncols() {
                    if a[(i, j)] != 0.0 {
                        e = e + a[(i, j)] * Expr::var(j);
                    }
                }
                e
            })
            .collect();
        MapExpr {
            input_dim: a.ncols(),
            outputs: self.outputs.iter().map(|e| e.substitute(&subs)).collect(),
        }
    }

    /// Post-composes with a linear map of the ambient space.
    pub fn postcompose_linear(&self, q: &nalgebra::DMatrix<f64>) -> MapExpr {
        let outputs = (0..q.nrows())
            .map(|r| {
                let mut e = Expr::zero();
                for (c, out) in self.outputs.iter().enumerate() {
                    if q[(r, c)] != 0.0 {
                        e = e + q[(r, c)] * out;
                    }
                }
                e
            })
            .collect();
        MapExpr {
            input_dim: self.input_dim,
            outputs,
        }
    }

    /// Drops the outputs at the given indices.
    pub fn drop_outputs(&self, drop: &[usize]) -> MapExpr {
        let outputs = self
            .outputs
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        MapExpr {
            input_dim: self.input_dim,
            outputs,
        }
    }
}
