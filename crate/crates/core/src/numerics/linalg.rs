//! Small dense linear algebra: symmetric eigensolver, orthonormalization,
//! numerical rank and null spaces.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::NumericsError;

/// Cap on cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// A real symmetric matrix. Symmetry holds bitwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(DMatrix::identity(dim, dim))
    }

    /// Builds from the upper triangle (`i <= j`) of `f`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Accepts a matrix that must already be exactly symmetric.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(NumericsError::NotSymmetric);
                }
            }
        }
        Ok(SymMatrix(m))
    }

    /// Symmetric part `(M + M^T) / 2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, NumericsError> {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMatrix(&self.0 * c)
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        SymMatrix(&self.0 + &other.0)
    }

    /// Linear combination `sum_k c_k M_k`; all inputs share one dimension.
    pub fn combination(coeffs: &[f64], mats: &[SymMatrix]) -> Self {
        let dim = mats.first().map_or(0, SymMatrix::dim);
        let mut out = DMatrix::zeros(dim, dim);
        for (c, m) in coeffs.iter().zip(mats) {
            out += &m.0 * *c;
        }
        SymMatrix(out)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    /// `Q M Q^T`, re-symmetrized.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Self {
        Self::symmetrize(&(q * &self.0 * q.transpose()))
    }

    /// Row-major entries `(i, j)` with `i <= j`, off-diagonals weighted by
    /// `sqrt(2)` so the Euclidean norm equals the Frobenius norm.
    pub fn to_isometric_vec(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let w = if i == j {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                v.push(w * self.0[(i, j)]);
            }
        }
        v
    }

    pub fn from_isometric_vec(dim: usize, v: &[f64]) -> Self {
        let mut k = 0;
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let w = if i == j {
                    1.0
                } else {
                    std::f64::consts::FRAC_1_SQRT_2
                };
                m[(i, j)] = w * v[k];
                m[(j, i)] = w * v[k];
                k += 1;
            }
        }
        SymMatrix(m)
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

/// Cyclic Jacobi eigensolver.
pub fn sym_eig(s: &SymMatrix) -> Result<SymEigen, NumericsError> {
    let n = s.dim();
    let mut a = s.0.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm();
    if n == 0 {
        return Ok(SymEigen {
            eigenvalues: vec![],
            eigenvectors: v,
        });
    }
    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        // one last check after the final sweep
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() > 1e-13 * scale {
            return Err(NumericsError::EigenNoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Result of Gram–Schmidt on the columns of a matrix.
#[derive(Clone, Debug)]
pub struct GramSchmidt {
    /// Orthonormal columns.
    pub q: DMatrix<f64>,
    /// Upper triangular with positive diagonal, `input = q * r`.
    pub r: DMatrix<f64>,
}

/// Modified Gram–Schmidt with one re-orthogonalization pass, in column order.
///
/// Fails if some column is dependent on its predecessors to within
/// `rel_tol * ||B||`.
pub fn gram_schmidt(b: &DMatrix<f64>, rel_tol: f64) -> Result<GramSchmidt, NumericsError> {
    let (n, m) = b.shape();
    let scale = b.norm();
    let mut q = DMatrix::zeros(n, m);
    let mut r = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut v = b.column(j).into_owned();
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                r[(i, j)] += c;
                v.axpy(-c, &qi, 1.0);
            }
        }
        let nv = v.norm();
        if !(nv > rel_tol * scale) || scale == 0.0 {
            return Err(NumericsError::RankDeficient { column: j });
        }
        r[(j, j)] = nv;
        q.set_column(j, &(v / nv));
    }
    Ok(GramSchmidt { q, r })
}

/// Orthonormal complement together with the standard-basis pivots used to build it.
#[derive(Clone, Debug)]
pub struct Complement {
    pub basis: DMatrix<f64>,
    /// Index of the standard basis vector that seeded each column.
    pub pivots: Vec<usize>,
}

/// Orthonormal basis of `col(B)^⊥`, seeded greedily from standard basis
/// vectors (largest residual first) so that it depends smoothly on `B` while
/// the pivot sequence is unchanged.
pub fn orthonormal_complement_with_pivots(b: &DMatrix<f64>) -> Result<Complement, NumericsError> {
    let (n, m) = b.shape();
    let gs = gram_schmidt(b, 1e-10)?;
    let mut frame: Vec<DVector<f64>> = (0..m).map(|j| gs.q.column(j).into_owned()).collect();
    let mut pivots = Vec::with_capacity(n - m);
    let mut out = DMatrix::zeros(n, n - m);
    for col in 0..(n - m) {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for k in 0..n {
            if pivots.contains(&k) {
                continue;
            }
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            for _pass in 0..2 {
                for f in &frame {
                    let c = f.dot(&v);
                    v.axpy(-c, f, 1.0);
                }
            }
            let nv = v.norm();
            // strict comparison: ties keep the lowest index
            if best.as_ref().is_none_or(|(_, _, bn)| nv > *bn + 1e-12) {
                best = Some((k, v, nv));
            }
        }
        let (k, v, nv) = best.ok_or(NumericsError::RankDeficient { column: col })?;
        let v = v / nv;
        out.set_column(col, &v);
        frame.push(v);
        pivots.push(k);
    }
    Ok(Complement { basis: out, pivots })
}

/// Orthonormal basis of the orthogonal complement of `col(B)`.
pub fn orthonormal_complement(b: &DMatrix<f64>) -> Result<DMatrix<f64>, NumericsError> {
    orthonormal_complement_with_pivots(b).map(|c| c.basis)
}

/// Singular values of a matrix, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Number of singular values above `tol` times the largest.
pub fn numerical_rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let a = DMatrix::from_fn(vectors.len(), first.len(), |i, j| vectors[i][j]);
    let s = singular_values(&a);
    let Some(&smax) = s.first() else {
        return 0;
    };
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Orthonormal basis (columns) of the null space of `a`, from the SVD.
///
/// Singular directions below `tol * max(sigma_max, 1)` count as null.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    // pad to at least square so the SVD yields a full right basis
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(1.0);
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol * smax)
        .collect();
    DMatrix::from_fn(cols, null.len(), |r, c| vt[(null[c], r)])
}

/// Reduced row echelon form, in place; returns pivot columns.
pub fn rref(a: &mut DMatrix<f64>, tol: f64) -> Vec<usize> {
    let (rows, cols) = a.shape();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let (best, val) = (row..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap_rows(row, best);
        let p = a[(row, col)];
        for c in 0..cols {
            a[(row, c)] /= p;
        }
        for r in 0..rows {
            if r != row {
                let f = a[(r, col)];
                if f != 0.0 {
                    for c in 0..cols {
                        a[(r, c)] -= f * a[(row, c)];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    for v in a.iter_mut() {
        if v.abs() <= tol {
            *v = 0.0;
        }
    }
    pivots
}

/// Haar-distributed rotation in `SO(n)`: QR of a Gaussian matrix with the
/// sign ambiguity fixed, then one column flipped if needed for `det = +1`.
pub fn haar_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}
