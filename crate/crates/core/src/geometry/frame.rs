use nalgebra::{DMatrix, DVector};

use super::{GeometryError, Immersion};
use crate::numerics::{
    gram_schmidt, numerical_rank, orthonormal_complement_with_pivots, sym_eig, Jet2, NumericsError,
    SymMatrix,
};

/// Second fundamental forms below this Frobenius size count as exactly flat
/// when deciding ranks and nullities.
const FLAT_FLOOR: f64 = 1e-12;

/// Adapted orthonormal frame at a point of an immersion.
#[derive(Clone, Debug)]
pub struct PointFrame {
    pub point: DVector<f64>,
    /// `n x m`, columns `e_1..e_m`.
    pub tangent: DMatrix<f64>,
    /// `n x (n - m)`, columns `e_a`; oriented so that `[tangent | normal]` has
    /// positive determinant.
    pub normal: DMatrix<f64>,
    /// `m x m`; column `i` holds the coordinate expression of `e_i`.
    pub coord_to_frame: DMatrix<f64>,
    /// `m x m` upper triangular; column `k` holds `d/dx_k` in the tangent frame.
    pub frame_to_coord: DMatrix<f64>,
    /// Standard basis indices that seeded the normal frame.
    pub normal_pivots: Vec<usize>,
    pub(crate) jet: Jet2,
}

impl PointFrame {
    pub fn jet(&self) -> &Jet2 {
        &self.jet
    }

    /// Tangent-frame coordinates of the given coordinate vectors `d/dx_k`.
    pub fn coordinate_vectors(&self, coords: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.frame_to_coord.nrows(), coords.len(), |r, c| {
            self.frame_to_coord[(r, coords[c])]
        })
    }
}

/// Adapted frame at `x`: Gram–Schmidt on the Jacobian columns in coordinate
/// order, then the orthonormal complement.
pub fn frame_at(imm: &Immersion, x: &[f64]) -> Result<PointFrame, GeometryError> {
    imm.check_point(x)?;
    let jet = imm.jet(x)?;
    frame_from_jet(jet, x)
}

pub(crate) fn frame_from_jet(jet: Jet2, x: &[f64]) -> Result<PointFrame, GeometryError> {
    let singular = |e: NumericsError| match e {
        NumericsError::RankDeficient { .. } => {
            GeometryError::SingularImmersion { point: x.to_vec() }
        }
        other => GeometryError::Numerics(other),
    };
    let gs = gram_schmidt(&jet.jacobian, 1e-10).map_err(singular)?;
    let comp = orthonormal_complement_with_pivots(&jet.jacobian).map_err(singular)?;
    let (n, m) = jet.jacobian.shape();
    let mut normal = comp.basis;
    if n > m {
        let mut full = DMatrix::zeros(n, n);
        full.view_mut((0, 0), (n, m)).copy_from(&gs.q);
        full.view_mut((0, m), (n, n - m)).copy_from(&normal);
        if full.determinant() < 0.0 {
            let mut last = normal.column_mut(n - m - 1);
            last.neg_mut();
        }
    }
    let coord_to_frame =
        gs.r.clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::SingularImmersion { point: x.to_vec() })?;
    Ok(PointFrame {
        point: DVector::from_vec(jet.value.clone()),
        tangent: gs.q,
        normal,
        coord_to_frame,
        frame_to_coord: gs.r,
        normal_pivots: comp.pivots,
        jet,
    })
}

/// Components `S^a_{ij} = e_a . II(e_i, e_j)` in an adapted orthonormal frame.
#[derive(Clone, Debug)]
pub struct SecondFundamentalForm {
    pub components: Vec<SymMatrix>,
    pub frame: PointFrame,
}

impl SecondFundamentalForm {
    pub fn domain_dim(&self) -> usize {
        self.frame.tangent.ncols()
    }

    pub fn codim(&self) -> usize {
        self.components.len()
    }

    fn max_norm(&self) -> f64 {
        self.components
            .iter()
            .map(SymMatrix::frobenius_norm)
            .fold(0.0, f64::max)
    }

    /// `II(e_i, e_j)` as an ambient vector.
    pub fn evaluate(&self, i: usize, j: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.frame.normal.nrows());
        for (a, s) in self.components.iter().enumerate() {
            v.axpy(s.get(i, j), &self.frame.normal.column(a), 1.0);
        }
        v
    }
}

pub fn second_fundamental_form(
    imm: &Immersion,
    x: &[f64],
) -> Result<SecondFundamentalForm, GeometryError> {
    Ok(sff_from_frame(frame_at(imm, x)?))
}

pub(crate) fn sff_from_frame(frame: PointFrame) -> SecondFundamentalForm {
    let m = frame.tangent.ncols();
    let c = &frame.coord_to_frame;
    let components = (0..frame.normal.ncols())
        .map(|a| {
            let mut h = DMatrix::zeros(m, m);
            for (out, hess) in frame.jet.hessian.iter().enumerate() {
                let w = frame.normal[(out, a)];
                if w != 0.0 {
                    h += hess * w;
                }
            }
            SymMatrix::symmetrize(&(c.transpose() * h * c))
        })
        .collect();
    SecondFundamentalForm { components, frame }
}

/// `sum_a xi_a S^a` for a unit vector `xi` in normal-frame coordinates.
pub fn shape_operator(sff: &SecondFundamentalForm, xi: &[f64]) -> Result<SymMatrix, GeometryError> {
    if xi.len() != sff.codim() {
        return Err(GeometryError::Invalid(format!(
            "normal direction has {} coordinates, codimension is {}",
            xi.len(),
            sff.codim()
        )));
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(GeometryError::NonUnitNormal { norm });
    }
    Ok(SymMatrix::combination(xi, &sff.components))
}

/// Traces of the `S^a`.
pub fn mean_curvature_vector(sff: &SecondFundamentalForm) -> Vec<f64> {
    sff.components.iter().map(SymMatrix::trace).collect()
}

/// `dim |II_p|`.
pub fn normal_rank(sff: &SecondFundamentalForm, tol: f64) -> usize {
    if sff.max_norm() < FLAT_FLOOR {
        return 0;
    }
    let flat: Vec<Vec<f64>> = sff
        .components
        .iter()
        .map(SymMatrix::to_isometric_vec)
        .collect();
    numerical_rank(&flat, tol)
}

/// Common kernel of all `S^a`.
#[derive(Clone, Debug)]
pub struct RelativeNullity {
    pub dim: usize,
    /// `m x dim`, orthonormal, in tangent-frame coordinates.
    pub basis: DMatrix<f64>,
}

/// Kernel of `sum_a (S^a)^2`; eigenvalues whose square roots fall below
/// `tol` times the largest count as zero.
pub fn relative_nullity(
    sff: &SecondFundamentalForm,
    tol: f64,
) -> Result<RelativeNullity, GeometryError> {
    let m = sff.domain_dim();
    if sff.max_norm() < FLAT_FLOOR {
        return Ok(RelativeNullity {
            dim: m,
            basis: DMatrix::identity(m, m),
        });
    }
    let mut sum = DMatrix::zeros(m, m);
    for s in &sff.components {
        sum += s.as_matrix() * s.as_matrix();
    }
    let eig = sym_eig(&SymMatrix::symmetrize(&sum))?;
    let top = eig
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt();
    let kernel: Vec<usize> = (0..m)
        .filter(|&i| eig.eigenvalues[i].max(0.0).sqrt() <= tol * top)
        .collect();
    let basis = DMatrix::from_fn(m, kernel.len(), |r, c| eig.eigenvectors[(r, kernel[c])]);
    Ok(RelativeNullity {
        dim: kernel.len(),
        basis,
    })
}

/// Rank of the Gauss map differential, `m - dim(relative nullity)`.
pub fn gauss_map_rank(sff: &SecondFundamentalForm, tol: f64) -> Result<usize, GeometryError> {
    Ok(sff.domain_dim() - relative_nullity(sff, tol)?.dim)
}
