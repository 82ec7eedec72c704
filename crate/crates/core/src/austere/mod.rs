//! Austerity of symmetric matrices and of linear spaces of them, and the
//! three maximal austere models `Q_A`, `Q_B`, `Q_C` on `R^4`.

mod models;
mod simple;

pub use models::{
    lambda3_from, qa_basis, qa_complex_structure, qb_basis, qb_matrix, qc_basis, qc_matrix,
    QCParams, QC_RELATION_TOL,
};
pub use simple::{is_simple, simple_defect, SimpleFit, DEFAULT_SIMPLE_TOL, SIMPLE_RESTARTS};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::SecondFundamentalForm;
use crate::numerics::{sym_eig, NumericsError, SymMatrix, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AustereError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("expected 4x4 matrices, got {dim}x{dim}")]
    NotFourByFour { dim: usize },
    #[error("matrix of size {found} in a span of {expected}x{expected} matrices")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("lambda relation violated by {residual:e}")]
    InvalidQcParams { residual: f64 },
    #[error("lambda3 is singular at 1 + lambda1*lambda2 = {denominator:e}")]
    SingularLambda { denominator: f64 },
}

/// A linear span of `k x k` symmetric matrices, given by a (possibly
/// redundant) spanning list.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSpan {
    dim_ambient: usize,
    basis: Vec<SymMatrix>,
    span_dim: usize,
}

impl SymSpan {
    pub fn new(dim_ambient: usize, basis: Vec<SymMatrix>) -> Result<Self, AustereError> {
        if let Some(bad) = basis.iter().find(|b| b.dim() != dim_ambient) {
            return Err(AustereError::DimensionMismatch {
                expected: dim_ambient,
                found: bad.dim(),
            });
        }
        let span_dim = orthonormal_coords(&basis, DEFAULT_RANK_TOL).len();
        Ok(Self {
            dim_ambient,
            basis,
            span_dim,
        })
    }

    /// The zero subspace.
    pub fn zero(dim_ambient: usize) -> Self {
        Self {
            dim_ambient,
            basis: Vec::new(),
            span_dim: 0,
        }
    }

    /// `|II_p|`: the span of the components `S^a`.
    pub fn from_second_fundamental_form(sff: &SecondFundamentalForm) -> Self {
        Self::new(sff.domain_dim(), sff.components.clone()).expect("components share one size")
    }

    pub fn dim_ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn basis(&self) -> &[SymMatrix] {
        &self.basis
    }

    /// Numerical dimension at the default relative rank threshold.
    pub fn span_dim(&self) -> usize {
        self.span_dim
    }

    /// Frobenius-orthonormal basis of the span (right singular vectors of
    /// the stacked basis above `rank_tol` relative).
    pub fn orthonormal_basis(&self, rank_tol: f64) -> Vec<SymMatrix> {
        orthonormal_coords(&self.basis, rank_tol)
            .into_iter()
            .map(|v| SymMatrix::from_isometric_vec(self.dim_ambient, &v))
            .collect()
    }

    pub fn element(&self, coeffs: &[f64]) -> SymMatrix {
        if self.basis.is_empty() {
            return SymMatrix::zeros(self.dim_ambient);
        }
        SymMatrix::combination(coeffs, &self.basis)
    }

    /// `{Q S Q^T : S in span}`.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Self {
        let basis: Vec<SymMatrix> = self.basis.iter().map(|b| b.conjugate(q)).collect();
        Self {
            dim_ambient: self.dim_ambient,
            basis,
            span_dim: self.span_dim,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let basis = self.basis.iter().map(|b| b.scale(c)).collect();
        Self::new(self.dim_ambient, basis).expect("same sizes")
    }

    /// Span of this list followed by `extra`.
    pub fn extended(&self, extra: SymMatrix) -> Result<Self, AustereError> {
        let mut basis = self.basis.clone();
        basis.push(extra);
        Self::new(self.dim_ambient, basis)
    }
}

fn orthonormal_coords(basis: &[SymMatrix], rank_tol: f64) -> Vec<Vec<f64>> {
    let Some(first) = basis.first() else {
        return Vec::new();
    };
    let rows: Vec<Vec<f64>> = basis.iter().map(SymMatrix::to_isometric_vec).collect();
    let d = first.dim() * (first.dim() + 1) / 2;
    let a = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let padded = if a.nrows() < d {
        let mut p = DMatrix::zeros(d, d);
        p.view_mut((0, 0), a.shape()).copy_from(&a);
        p
    } else {
        a
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let smax = svd.singular_values[order[0]];
    if smax == 0.0 {
        return Vec::new();
    }
    order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > rank_tol * smax)
        .map(|i| vt.row(i).iter().copied().collect())
        .collect()
}

/// Power sums `tr (S/||S||)^k` for odd `k <= dim`.
fn odd_power_sums(s: &SymMatrix) -> Vec<f64> {
    let norm = s.frobenius_norm();
    if norm == 0.0 {
        return Vec::new();
    }
    let unit = s.as_matrix() / norm;
    let sq = &unit * &unit;
    let mut power = unit.clone();
    let mut out = Vec::new();
    for _k in (1..=s.dim()).step_by(2) {
        out.push(power.trace());
        power = &power * &sq;
    }
    out
}

/// Largest `|tr S^k| / ||S||^k` over odd `k <= dim`; zero for `S = 0`.
pub fn austere_matrix_defect(s: &SymMatrix) -> f64 {
    odd_power_sums(s)
        .into_iter()
        .fold(0.0, |a, p| a.max(p.abs()))
}

/// Odd power-trace test: the spectrum of `S` is symmetric under negation
/// iff every odd power sum up to the dimension vanishes.
pub fn is_austere_matrix(s: &SymMatrix, tol: f64) -> bool {
    austere_matrix_defect(s) < tol
}

/// Brute-force version of [`is_austere_matrix`]: pairs the sorted spectrum
/// from both ends.
pub fn eigen_symmetry_oracle(s: &SymMatrix, tol: f64) -> Result<bool, AustereError> {
    let ev = sym_eig(s)?.eigenvalues;
    let scale = s.frobenius_norm();
    let k = ev.len();
    Ok((0..k).all(|i| (ev[i] + ev[k - 1 - i]).abs() <= tol * scale))
}

/// Symmetrized trace `(1/k!) sum_sigma tr(B_{sigma(1)} ... B_{sigma(k)})`.
fn polarized_trace(mats: &[&DMatrix<f64>]) -> f64 {
    let k = mats.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    // Heap's algorithm
    let mut c = vec![0usize; k];
    let product = |idx: &[usize]| {
        let mut p = mats[idx[0]].clone();
        for &i in &idx[1..] {
            p = &p * mats[i];
        }
        p.trace()
    };
    total += product(&idx);
    count += 1;
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                idx.swap(0, i);
            } else {
                idx.swap(c[i], i);
            }
            total += product(&idx);
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total / count as f64
}

fn multisets(r: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..r {
        cur.push(i);
        multisets(r, k, i, cur, out);
        cur.pop();
    }
}

/// Largest coefficient of the polynomials `X -> tr X^k` (odd `k <= dim`)
/// on the span, in Frobenius-orthonormal coordinates. Zero exactly when
/// every element of the span is austere; no sampling involved.
pub fn austere_subspace_defect(span: &SymSpan) -> f64 {
    let ortho = span.orthonormal_basis(DEFAULT_RANK_TOL);
    let mats: Vec<&DMatrix<f64>> = ortho.iter().map(SymMatrix::as_matrix).collect();
    let mut worst: f64 = 0.0;
    for k in (1..=span.dim_ambient()).step_by(2) {
        let mut sets = Vec::new();
        multisets(mats.len(), k, 0, &mut Vec::new(), &mut sets);
        for set in sets {
            let chosen: Vec<&DMatrix<f64>> = set.iter().map(|&i| mats[i]).collect();
            worst = worst.max(polarized_trace(&chosen).abs());
        }
    }
    worst
}

/// Exact austerity test for spans of 4x4 matrices: every basis trace and
/// every polarized cubic trace vanishes.
pub fn is_austere_subspace(span: &SymSpan, tol: f64) -> Result<bool, AustereError> {
    if span.dim_ambient() != 4 {
        return Err(AustereError::NotFourByFour {
            dim: span.dim_ambient(),
        });
    }
    Ok(austere_subspace_defect(span) < tol)
}

/// Austerity of the submanifold at one point: defect of `|II_p|`.
pub fn austere_point_defect(sff: &SecondFundamentalForm) -> f64 {
    austere_subspace_defect(&SymSpan::from_second_fundamental_form(sff))
}
