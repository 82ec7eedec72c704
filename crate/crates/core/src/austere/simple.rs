//! Simple spans: every quadratic form shares one linear factor.
//!
//! `S = u a^T + a u^T` for all `S` in the span iff `P S P = 0` for the
//! projector `P` onto `u^⊥`, so simplicity is the vanishing of
//! `min_{|u|=1} sum_i ||P S_i P||^2` over an orthonormal basis `S_i`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::SymSpan;
use crate::numerics::{
    levenberg_marquardt, orthonormal_complement, LmOptions, SymMatrix, DEFAULT_RANK_TOL,
};

pub const SIMPLE_RESTARTS: usize = 32;
pub const DEFAULT_SIMPLE_TOL: f64 = 1e-8;
const SIMPLE_SEED: u64 = 0x5151_4e50_4c45;

#[derive(Clone, Debug)]
pub struct SimpleFit {
    /// `sqrt(sum_i ||P S_i P||^2)` at the best `u`.
    pub residual: f64,
    /// The best common factor direction (unit).
    pub factor: DVector<f64>,
}

fn residual(basis: &[SymMatrix], u: &DVector<f64>) -> Vec<f64> {
    let n = u.len();
    let p = DMatrix::identity(n, n) - u * u.transpose();
    basis
        .iter()
        .flat_map(|s| SymMatrix::symmetrize(&(&p * s.as_matrix() * &p)).to_isometric_vec())
        .collect()
}

fn retract(u: &DVector<f64>, t: &[f64]) -> DVector<f64> {
    let perp = orthonormal_complement(&DMatrix::from_column_slice(u.len(), 1, u.as_slice()))
        .expect("unit vector");
    let v = u + perp * DVector::from_column_slice(t);
    let n = v.norm();
    v / n
}

/// Best common-factor fit over `SIMPLE_RESTARTS` seeded starts.
pub fn simple_defect(span: &SymSpan) -> SimpleFit {
    let n = span.dim_ambient();
    let basis = span.orthonormal_basis(DEFAULT_RANK_TOL);
    let mut e0 = DVector::zeros(n);
    if n > 0 {
        e0[0] = 1.0;
    }
    if basis.is_empty() || n < 2 {
        return SimpleFit {
            residual: 0.0,
            factor: e0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SIMPLE_SEED);
    let opts = LmOptions::default();
    let mut best = SimpleFit {
        residual: f64::INFINITY,
        factor: e0,
    };
    for _ in 0..SIMPLE_RESTARTS {
        let g = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let start = &g / g.norm();
        let out = levenberg_marquardt(start, n - 1, |u| Some(residual(&basis, u)), retract, &opts)
            .expect("residual is total");
        if out.residual < best.residual {
            best = SimpleFit {
                residual: out.residual,
                factor: out.point,
            };
        }
        if best.residual < 1e-13 {
            break;
        }
    }
    best
}

/// Whether every form in the span has a common linear factor, to `tol`.
pub fn is_simple(span: &SymSpan, tol: f64) -> bool {
    simple_defect(span).residual < tol
}
