//! Truncated second-order Taylor arithmetic.

use nalgebra::DMatrix;

use super::expr::{MapExpr, Scalar};
use super::NumericsError;

/// Second-order Taylor coefficient of a scalar in `m` variables.
///
/// The Hessian is stored as a packed upper triangle so that the mirrored
/// entries of the expanded matrix are bitwise equal.
#[derive(Clone, Debug)]
pub(crate) struct Taylor2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl Taylor2 {
    fn packed_len(m: usize) -> usize {
        m * (m + 1) / 2
    }

    pub(crate) fn variable(value: f64, index: usize, m: usize) -> Self {
        let mut grad = vec![0.0; m];
        grad[index] = 1.0;
        Self {
            value,
            grad,
            hess: vec![0.0; Self::packed_len(m)],
        }
    }

    fn dim(&self) -> usize {
        self.grad.len()
    }

    fn outer_into(&self, other: &Self, out: &mut [f64], scale: f64) {
        let m = self.dim();
        let mut k = 0;
        for i in 0..m {
            for j in i..m {
                out[k] += scale * (self.grad[i] * other.grad[j] + other.grad[i] * self.grad[j]);
                k += 1;
            }
        }
    }
}

impl Scalar for Taylor2 {
    fn constant(c: f64, like: &Self) -> Self {
        let m = like.dim();
        Self {
            value: c,
            grad: vec![0.0; m],
            hess: vec![0.0; Self::packed_len(m)],
        }
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn add(&self, rhs: &Self) -> Self {
        Self {
            value: self.value + rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a + b)
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&rhs.hess)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Self {
            value: self.value - rhs.value,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(a, b)| a - b)
                .collect(),
            hess: self
                .hess
                .iter()
                .zip(&rhs.hess)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (self.value, rhs.value);
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(ga, gb)| ga * b + a * gb)
            .collect();
        let mut hess: Vec<f64> = self
            .hess
            .iter()
            .zip(&rhs.hess)
            .map(|(ha, hb)| ha * b + a * hb)
            .collect();
        self.outer_into(rhs, &mut hess, 1.0);
        Self {
            value: a * b,
            grad,
            hess,
        }
    }

    fn neg(&self) -> Self {
        Self {
            value: -self.value,
            grad: self.grad.iter().map(|g| -g).collect(),
            hess: self.hess.iter().map(|h| -h).collect(),
        }
    }

    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let grad = self.grad.iter().map(|g| df * g).collect();
        let mut hess: Vec<f64> = self.hess.iter().map(|h| df * h).collect();
        // d2f * g g^T; outer_into adds g_i g_j + g_i g_j, hence the half
        self.outer_into(self, &mut hess, 0.5 * d2f);
        Self {
            value: f,
            grad,
            hess,
        }
    }
}

/// Value, Jacobian and Hessian of a map `R^m -> R^n` at a point.
#[derive(Clone, Debug)]
pub struct Jet2 {
    pub value: Vec<f64>,
    /// `n x m`, entry `(a, i)` is `dF_a / dx_i`.
    pub jacobian: DMatrix<f64>,
    /// One symmetric `m x m` matrix per output component.
    pub hessian: Vec<DMatrix<f64>>,
}

impl Jet2 {
    pub fn input_dim(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.value.len()
    }

    /// Second partial `d^2 F / dx_i dx_j` as an ambient vector.
    pub fn second_partial(&self, i: usize, j: usize) -> Vec<f64> {
        self.hessian.iter().map(|h| h[(i, j)]).collect()
    }
}

fn unpack(t: &Taylor2) -> DMatrix<f64> {
    let m = t.dim();
    let mut h = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            h[(i, j)] = t.hess[k];
            h[(j, i)] = t.hess[k];
            k += 1;
        }
    }
    h
}

/// Evaluates `f` and its exact first and second derivatives at `x`.
pub fn jet_eval(f: &MapExpr, x: &[f64]) -> Result<Jet2, NumericsError> {
    f.check_input(x)?;
    let m = x.len();
    let vars: Vec<Taylor2> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Taylor2::variable(v, i, m))
        .collect();
    let n = f.output_dim();
    let mut value = Vec::with_capacity(n);
    let mut jacobian = DMatrix::zeros(n, m);
    let mut hessian = Vec::with_capacity(n);
    for (a, e) in f.outputs().iter().enumerate() {
        let t = e.eval(&vars)?;
        value.push(t.value);
        for i in 0..m {
            jacobian[(a, i)] = t.grad[i];
        }
        hessian.push(unpack(&t));
    }
    Ok(Jet2 {
        value,
        jacobian,
        hessian,
    })
}
