//! The maximal austere models `Q_A`, `Q_B` and `Q_C(lambda)`.

use nalgebra::DMatrix;

use super::{AustereError, SymSpan};
use crate::numerics::{null_space, rref, SymMatrix};

/// Relative tolerance on `l1 l2 l3 + l1 + l2 + l3`.
pub const QC_RELATION_TOL: f64 = 1e-10;

/// The complex structure on `R^4` with `J e1 = e2`, `J e3 = e4`.
pub fn qa_complex_structure() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

/// Upper-triangle coordinates `(i, j), i <= j` of a symmetric 4x4 matrix.
fn upper_pairs() -> Vec<(usize, usize)> {
    (0..4).flat_map(|i| (i..4).map(move |j| (i, j))).collect()
}

fn from_upper(v: &[f64]) -> SymMatrix {
    let pairs = upper_pairs();
    let mut m = DMatrix::zeros(4, 4);
    for (&(i, j), &x) in pairs.iter().zip(v) {
        m[(i, j)] = x;
        m[(j, i)] = x;
    }
    SymMatrix::from_matrix(m).expect("built symmetric")
}

/// Basis of `{S : SJ + JS = 0}`, found as the null space of the
/// anticommutator and brought to reduced echelon form in upper-triangle
/// coordinates.
pub fn qa_basis() -> SymSpan {
    let j = qa_complex_structure();
    let pairs = upper_pairs();
    let mut op = DMatrix::zeros(16, pairs.len());
    for k in 0..pairs.len() {
        let mut e = vec![0.0; pairs.len()];
        e[k] = 1.0;
        let s = from_upper(&e).into_matrix();
        let ac = &s * &j + &j * &s;
        op.set_column(
            k,
            &DMatrix::from_iterator(16, 1, ac.iter().copied()).column(0),
        );
    }
    let null = null_space(&op, 1e-12);
    let mut rows = null.transpose();
    let pivots = rref(&mut rows, 1e-12);
    let basis = (0..pivots.len())
        .map(|r| {
            // the echelon entries are integers up to roundoff
            let v: Vec<f64> = rows
                .row(r)
                .iter()
                .map(|&x| {
                    if (x - x.round()).abs() < 1e-12 {
                        x.round()
                    } else {
                        x
                    }
                })
                .collect();
            from_upper(&v)
        })
        .collect();
    SymSpan::new(4, basis).expect("4x4")
}

/// `[[m,0,b1,b2],[0,m,b3,b4],[b1,b3,-m,0],[b2,b4,0,-m]]`.
pub fn qb_matrix(m: f64, b1: f64, b2: f64, b3: f64, b4: f64) -> SymMatrix {
    SymMatrix::from_rows(&[
        &[m, 0.0, b1, b2],
        &[0.0, m, b3, b4],
        &[b1, b3, -m, 0.0],
        &[b2, b4, 0.0, -m],
    ])
    .expect("symmetric by construction")
}

/// The five coordinate matrices of `Q_B`.
pub fn qb_basis() -> SymSpan {
    let basis = (0..5)
        .map(|k| {
            let mut c = [0.0; 5];
            c[k] = 1.0;
            qb_matrix(c[0], c[1], c[2], c[3], c[4])
        })
        .collect();
    SymSpan::new(4, basis).expect("4x4")
}

/// Parameters of `Q_C`, tied by `l1 l2 l3 + l1 + l2 + l3 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QCParams {
    lambda: [f64; 3],
}

impl QCParams {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self, AustereError> {
        let p = Self {
            lambda: [lambda1, lambda2, lambda3],
        };
        let [a, b, c] = p.lambda;
        let scale = 1f64.max((a * b * c).abs()).max(a.abs() + b.abs() + c.abs());
        let residual = p.relation_residual();
        if !(residual.abs() < QC_RELATION_TOL * scale) {
            return Err(AustereError::InvalidQcParams { residual });
        }
        Ok(p)
    }

    /// Valid parameters with `lambda3` solved from the other two.
    pub fn from_pair(lambda1: f64, lambda2: f64) -> Result<Self, AustereError> {
        Ok(Self {
            lambda: [lambda1, lambda2, lambda3_from(lambda1, lambda2)?],
        })
    }

    /// Skips the relation check; for building deliberately invalid models.
    pub fn new_unchecked(lambda1: f64, lambda2: f64, lambda3: f64) -> Self {
        Self {
            lambda: [lambda1, lambda2, lambda3],
        }
    }

    pub fn lambdas(&self) -> [f64; 3] {
        self.lambda
    }

    pub fn relation_residual(&self) -> f64 {
        let [a, b, c] = self.lambda;
        a * b * c + a + b + c
    }
}

/// `lambda3 = -(l1 + l2) / (1 + l1 l2)`.
pub fn lambda3_from(lambda1: f64, lambda2: f64) -> Result<f64, AustereError> {
    let denominator = 1.0 + lambda1 * lambda2;
    if denominator.abs() <= 1e-10 {
        return Err(AustereError::SingularLambda { denominator });
    }
    Ok(-(lambda1 + lambda2) / denominator)
}

/// `[[0,x1,x2,x3],[x1,0,l3 x3,l2 x2],[x2,l3 x3,0,l1 x1],[x3,l2 x2,l1 x1,0]]`.
pub fn qc_matrix(x1: f64, x2: f64, x3: f64, params: &QCParams) -> SymMatrix {
    let [l1, l2, l3] = params.lambda;
    SymMatrix::from_rows(&[
        &[0.0, x1, x2, x3],
        &[x1, 0.0, l3 * x3, l2 * x2],
        &[x2, l3 * x3, 0.0, l1 * x1],
        &[x3, l2 * x2, l1 * x1, 0.0],
    ])
    .expect("symmetric by construction")
}

pub fn qc_basis(params: &QCParams) -> SymSpan {
    let basis = vec![
        qc_matrix(1.0, 0.0, 0.0, params),
        qc_matrix(0.0, 1.0, 0.0, params),
        qc_matrix(0.0, 0.0, 1.0, params),
    ];
    SymSpan::new(4, basis).expect("4x4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::austere::{eigen_symmetry_oracle, is_austere_matrix, is_austere_subspace};
    use crate::numerics::sym_eig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectrum(s: &SymMatrix) -> Vec<f64> {
        sym_eig(s).unwrap().eigenvalues
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn complex_structure() {
        let j = qa_complex_structure();
        assert_eq!(&j * &j, -DMatrix::identity(4, 4));
        assert_eq!(j.transpose(), -&j);
        assert_eq!(
            j.column(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn qa_is_six_dimensional_and_anticommutes() {
        let qa = qa_basis();
        assert_eq!(qa.basis().len(), 6);
        assert_eq!(qa.span_dim(), 6);
        let j = qa_complex_structure();
        for b in qa.basis() {
            let s = b.as_matrix();
            assert!((s * &j + &j * s).norm() < 1e-14);
            // J S J^T = -S keeps the span closed under conjugation by J
            assert!((&j * s * j.transpose() + s).norm() < 1e-14);
        }
    }

    #[test]
    fn qa_matches_hand_derived_blocks() {
        // [[A, B], [B^T, C]] with each 2x2 block of the form [[p, q], [q, -p]]
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = SymMatrix::from_rows(&[
            &[v[0], v[1], v[2], v[3]],
            &[v[1], -v[0], v[3], -v[2]],
            &[v[2], v[3], v[4], v[5]],
            &[v[3], -v[2], v[5], -v[4]],
        ])
        .unwrap();
        let extended = qa_basis().extended(s).unwrap();
        assert_eq!(extended.span_dim(), 6);
    }

    #[test]
    fn qb_examples() {
        assert!(close(
            &spectrum(&qb_matrix(1.0, 0.0, 0.0, 0.0, 0.0)),
            &[-1.0, -1.0, 1.0, 1.0],
            1e-14
        ));
        assert!(close(
            &spectrum(&qb_matrix(0.0, 1.0, 0.0, 0.0, 0.0)),
            &[-1.0, 0.0, 0.0, 1.0],
            1e-14
        ));
        assert_eq!(qb_basis().span_dim(), 5);
        assert_eq!(
            qb_matrix(2.0, 0.0, 0.0, 0.0, 0.0),
            SymMatrix::diagonal(&[2.0, 2.0, -2.0, -2.0])
        );
    }

    #[test]
    fn lambda_relation() {
        assert_eq!(lambda3_from(1.0, 1.0).unwrap(), -1.0);
        assert_eq!(lambda3_from(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            lambda3_from(1.0, -1.0),
            Err(AustereError::SingularLambda { .. })
        ));
        assert!(QCParams::new(1.0, 1.0, -1.0).is_ok());
        assert!(matches!(
            QCParams::new(1.0, 1.0, -0.9),
            Err(AustereError::InvalidQcParams { .. })
        ));
        let p = QCParams::from_pair(0.3, -2.0).unwrap();
        assert!(p.relation_residual().abs() < 1e-15);
    }

    #[test]
    fn qc_examples() {
        let zero = QCParams::new(0.0, 0.0, 0.0).unwrap();
        assert!(close(
            &spectrum(&qc_matrix(1.0, 0.0, 0.0, &zero)),
            &[-1.0, 0.0, 0.0, 1.0],
            1e-14
        ));
        let p = QCParams::new(1.0, 1.0, -1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x: [f64; 3] = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            let s = qc_matrix(x[0], x[1], x[2], &p);
            assert!(is_austere_matrix(&s, 1e-12));
            assert!(eigen_symmetry_oracle(&s, 1e-9).unwrap());
        }
        assert!(is_austere_subspace(&qc_basis(&p), 1e-12).unwrap());
    }

    #[test]
    fn violated_relation_has_a_witness() {
        let bad = QCParams::new_unchecked(1.0, 1.0, -0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let found = (0..100).any(|_| {
            let x: [f64; 3] = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ];
            !is_austere_matrix(&qc_matrix(x[0], x[1], x[2], &bad), 1e-6)
        });
        assert!(found);
        assert!(!is_austere_subspace(&qc_basis(&bad), 1e-6).unwrap());
    }

    #[test]
    fn zero_diagonal_cubic_trace_identity() {
        // tr X^3 = 6 x1 x2 x3 (l1 + l2 + l3 + l1 l2 l3) for the Q_C pattern
        let p = QCParams::new_unchecked(0.4, -1.3, 2.2);
        let (x1, x2, x3) = (0.7, -0.2, 1.1);
        let s = qc_matrix(x1, x2, x3, &p).into_matrix();
        let lhs = (&s * &s * &s).trace();
        let rhs = 6.0 * x1 * x2 * x3 * p.relation_residual();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
