//! Which maximal austere model (`Q_A`, `Q_B`, `Q_C`) a span of symmetric
//! 4x4 matrices fits into after an orthogonal change of frame.

mod fit;
mod rotation;

pub use fit::{canonical_lambdas, fit_type_b, fit_type_c, FitB, FitC, FitOptions};
pub use rotation::RotationParam;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::austere::{qa_complex_structure, AustereError, QCParams, SymSpan};
use crate::geometry::{second_fundamental_form, GeometryError, Immersion};
use crate::numerics::{singular_values, SymMatrix, DEFAULT_RANK_TOL};

/// Default verdict threshold on the relative residuals.
pub const DEFAULT_CLASSIFY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Austere(#[from] AustereError),
    #[error("span of dimension {span_dim} cannot fit a model of dimension {model_dim}")]
    CannotFit { span_dim: usize, model_dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelType {
    A,
    B,
    C,
}

impl fmt::Display for ModelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelType::A => "A",
            ModelType::B => "B",
            ModelType::C => "C",
        })
    }
}

fn require_four(span: &SymSpan) -> Result<(), ClassifyError> {
    if span.dim_ambient() != 4 {
        return Err(AustereError::NotFourByFour {
            dim: span.dim_ambient(),
        }
        .into());
    }
    Ok(())
}

/// `e_i e_j^T - e_j e_i^T`.
fn elementary_skew(i: usize, j: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(4, 4);
    k[(i, j)] = 1.0;
    k[(j, i)] = -1.0;
    k
}

/// Three pairwise anticommuting complex structures spanning the self-dual
/// (`sign = 1`) or anti-self-dual (`sign = -1`) half of `so(4)`. A skew
/// matrix squares to a negative multiple of the identity exactly when it
/// lies in one of the two halves.
fn chiral_structures(sign: f64) -> [DMatrix<f64>; 3] {
    [
        -(elementary_skew(0, 1) + elementary_skew(2, 3) * sign),
        -(elementary_skew(0, 2) - elementary_skew(1, 3) * sign),
        -(elementary_skew(0, 3) + elementary_skew(1, 2) * sign),
    ]
}

#[derive(Clone, Debug)]
pub struct FitA {
    /// `sqrt(sum_i ||S_i J + J S_i||_F^2)` over a Frobenius-orthonormal
    /// basis; independent of which orthonormal basis is used.
    pub residual: f64,
    /// Best complex structure found (`J^2 = -I`); `None` when no structure
    /// anticommutes with the span to within the default threshold.
    pub j: Option<DMatrix<f64>>,
    /// The best candidate regardless of threshold.
    pub candidate: DMatrix<f64>,
}

/// Linear solve for a complex structure anticommuting with the whole span.
///
/// Within each chirality the condition `S_i J + J S_i = 0` is linear in the
/// three coefficients of `J`; the smallest right singular vector of that
/// operator gives the best `J`.
pub fn fit_type_a(span: &SymSpan) -> Result<FitA, ClassifyError> {
    require_four(span)?;
    let basis = span.orthonormal_basis(DEFAULT_RANK_TOL);
    if basis.is_empty() {
        let j = qa_complex_structure();
        return Ok(FitA {
            residual: 0.0,
            j: Some(j.clone()),
            candidate: j,
        });
    }
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for sign in [1.0, -1.0] {
        let ks = chiral_structures(sign);
        let mut op = DMatrix::zeros(16 * basis.len(), 3);
        for (c, k) in ks.iter().enumerate() {
            for (i, s) in basis.iter().enumerate() {
                let s = s.as_matrix();
                let ac = s * k + k * s;
                for (r, v) in ac.iter().enumerate() {
                    op[(16 * i + r, c)] = *v;
                }
            }
        }
        let svd = op.svd(false, true);
        let vt = svd.v_t.expect("requested v_t");
        let (imin, _) =
            svd.singular_values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
                );
        let coeffs = vt.row(imin);
        let j = &ks[0] * coeffs[0] + &ks[1] * coeffs[1] + &ks[2] * coeffs[2];
        let residual = basis
            .iter()
            .map(|s| (s.as_matrix() * &j + &j * s.as_matrix()).norm_squared())
            .sum::<f64>()
            .sqrt();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, j));
        }
    }
    let (residual, candidate) = best.expect("two chiralities tried");
    let j = (residual < DEFAULT_CLASSIFY_THRESHOLD).then(|| candidate.clone());
    Ok(FitA {
        residual,
        j,
        candidate,
    })
}

/// Outcome of classifying one `|II_p|`.
#[derive(Clone, Debug)]
pub struct TypeReport {
    pub residual_a: f64,
    pub residual_b: f64,
    pub residual_c: f64,
    /// `R` with `R S R^T` in `Q_B` (best found).
    pub frame_b: DMatrix<f64>,
    /// `R` with `R S R^T` in `Q_C(qc_frame_params)`; absent when the span
    /// is too large for `Q_C`.
    pub frame_c: Option<DMatrix<f64>>,
    pub j_found: Option<DMatrix<f64>>,
    /// Sorted canonical representative of the fitted `lambda`, reported
    /// when Type C fits.
    pub qc_params: Option<QCParams>,
    /// The `lambda` that pairs with `frame_c`.
    pub qc_frame_params: Option<QCParams>,
    pub verdict: BTreeSet<ModelType>,
    pub span_dim: usize,
    /// `span_dim <= 1`: every nonzero austere span of dimension one lies in
    /// all three models, so the verdict carries no type information.
    pub rank_one: bool,
    pub threshold: f64,
}

impl TypeReport {
    pub fn verdict_string(&self) -> String {
        if self.verdict.is_empty() {
            return "-".into();
        }
        self.verdict.iter().map(ModelType::to_string).collect()
    }
}

/// Runs all three fits on a 4x4 span.
pub fn classify_span(
    span: &SymSpan,
    threshold: f64,
    opts: &FitOptions,
) -> Result<TypeReport, ClassifyError> {
    require_four(span)?;
    let a = fit_type_a(span)?;
    let b = fit_type_b(span, opts)?;
    let span_dim = span.span_dim();
    let (residual_c, frame_c, qc_frame_params) = match fit_type_c(span, opts) {
        Ok(c) => (c.residual, Some(c.frame), Some(c.params)),
        Err(ClassifyError::CannotFit {
            span_dim,
            model_dim,
        }) => (((span_dim - model_dim) as f64).sqrt(), None, None),
        Err(e) => return Err(e),
    };
    let mut verdict = BTreeSet::new();
    if a.residual < threshold {
        verdict.insert(ModelType::A);
    }
    if b.residual < threshold {
        verdict.insert(ModelType::B);
    }
    if residual_c < threshold {
        verdict.insert(ModelType::C);
    }
    let qc_params = if verdict.contains(&ModelType::C) {
        qc_frame_params.map(|p| {
            let [l1, l2, l3] = canonical_lambdas(p.lambdas());
            QCParams::new_unchecked(l1, l2, l3)
        })
    } else {
        None
    };
    Ok(TypeReport {
        residual_a: a.residual,
        residual_b: b.residual,
        residual_c,
        frame_b: b.frame,
        frame_c,
        j_found: verdict.contains(&ModelType::A).then_some(a.candidate),
        qc_params,
        qc_frame_params,
        verdict,
        span_dim,
        rank_one: span_dim <= 1,
        threshold,
    })
}

/// Classifies `|II_x|` of a 4-dimensional immersion with default fit options.
pub fn classify_point(
    imm: &Immersion,
    x: &[f64],
    threshold: f64,
) -> Result<TypeReport, ClassifyError> {
    classify_point_with(imm, x, threshold, &FitOptions::default())
}

pub fn classify_point_with(
    imm: &Immersion,
    x: &[f64],
    threshold: f64,
    opts: &FitOptions,
) -> Result<TypeReport, ClassifyError> {
    let sff = second_fundamental_form(imm, x)?;
    classify_span(
        &SymSpan::from_second_fundamental_form(&sff),
        threshold,
        opts,
    )
}

/// Smallest singular value of the stacked span; used to report how far a
/// nominally rank-deficient span is from its numerical rank.
pub fn span_singular_values(span: &SymSpan) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = span
        .basis()
        .iter()
        .map(SymMatrix::to_isometric_vec)
        .collect();
    if rows.is_empty() {
        return Vec::new();
    }
    singular_values(&DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
        rows[i][j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::austere::{qa_basis, qb_basis};
    use crate::numerics::haar_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chiral_structures_are_quaternionic() {
        let id = DMatrix::<f64>::identity(4, 4);
        for sign in [1.0, -1.0] {
            let ks = chiral_structures(sign);
            for a in 0..3 {
                assert_eq!(&ks[a] * &ks[a], -&id);
                for b in (a + 1)..3 {
                    assert_eq!(&ks[a] * &ks[b] + &ks[b] * &ks[a], DMatrix::zeros(4, 4));
                }
            }
            let c = [0.3, -0.5, 0.81];
            let n2: f64 = c.iter().map(|v| v * v).sum();
            let k = &ks[0] * c[0] + &ks[1] * c[1] + &ks[2] * c[2];
            assert!((&k * &k + &id * n2).norm() < 1e-15);
        }
        assert_eq!(chiral_structures(1.0)[0], qa_complex_structure());
    }

    #[test]
    fn type_a_on_subspace_of_qa() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let qa = qa_basis();
        let r = haar_rotation(&mut rng, 4);
        let elems: Vec<SymMatrix> = (0..2)
            .map(|_| {
                let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
                qa.element(&c)
            })
            .collect();
        let span = SymSpan::new(4, elems).unwrap().conjugate(&r);
        let fit = fit_type_a(&span).unwrap();
        assert!(fit.residual < 1e-10);
        let j = fit.j.unwrap();
        assert!((&j * &j + DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn type_a_examples() {
        assert!(fit_type_a(&qb_basis()).unwrap().j.is_none());
        let d = SymSpan::new(4, vec![SymMatrix::diagonal(&[1.0, -1.0, 1.0, -1.0])]).unwrap();
        assert!(fit_type_a(&d).unwrap().residual < 1e-12);
        let a1 = fit_type_a(&qb_basis()).unwrap();
        let a2 = fit_type_a(&qb_basis()).unwrap();
        assert_eq!(a1.residual.to_bits(), a2.residual.to_bits());
        assert!(matches!(
            fit_type_a(&SymSpan::zero(3)),
            Err(ClassifyError::Austere(_))
        ));
    }

    #[test]
    fn type_a_anti_self_dual() {
        // conjugating by a reflection swaps the two halves of so(4)
        let refl = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0]));
        let span = qa_basis().conjugate(&refl);
        assert!(fit_type_a(&span).unwrap().residual < 1e-12);
    }
}
