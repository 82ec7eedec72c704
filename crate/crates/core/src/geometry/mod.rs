//! Immersions `F: box ⊂ R^m -> R^n`, adapted frames, second fundamental
//! forms, rulings, relative nullity and the ruling-map holomorphy check.

mod frame;
mod holomorphy;
mod ruling;
mod sampling;

pub use frame::{
    frame_at, gauss_map_rank, mean_curvature_vector, normal_rank, relative_nullity,
    second_fundamental_form, shape_operator, PointFrame, RelativeNullity, SecondFundamentalForm,
};
pub use holomorphy::{
    j_invariance_defect, ruling_map_holomorphy_defect, RulingOrientation, J_INVARIANCE_TOL,
};
pub use ruling::{ruled_condition_check, ruling_frame, ruling_straightness_defect};
pub use sampling::{derive_seed, sample_points, SamplePlan, DEFAULT_MARGIN};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::numerics::{jet_eval, Jet2, MapExpr, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("immersion is singular at {point:?}")]
    SingularImmersion { point: Vec<f64> },
    #[error("point {point:?} lies outside the parameter domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("invalid immersion: {0}")]
    Invalid(String),
    #[error("normal direction has norm {norm}, expected 1")]
    NonUnitNormal { norm: f64 },
    #[error("immersion carries no ruling annotation")]
    MissingRuling,
    #[error("ruling basis is rank deficient")]
    RankDeficientRuling,
    #[error("immersion carries no complex structure")]
    MissingComplexStructure,
    #[error("ruling is not invariant under J (defect {defect:e})")]
    NotJInvariant { defect: f64 },
    #[error("difference step {h} leaves the parameter domain")]
    StepTooLarge { h: f64 },
}

/// A parametrized map from an `m`-dimensional box into `R^n`.
#[derive(Clone, Debug)]
pub struct Immersion {
    map: MapExpr,
    domain: Vec<(f64, f64)>,
    ruling_coords: Option<Vec<usize>>,
    complex_structure: bool,
}

impl Immersion {
    pub fn new(map: MapExpr, domain: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        let imm = Self::factor(map, domain)?;
        if imm.domain_dim() >= imm.ambient_dim() {
            return Err(GeometryError::Invalid(format!(
                "domain dimension {} must be below ambient dimension {}",
                imm.domain_dim(),
                imm.ambient_dim()
            )));
        }
        Ok(imm)
    }

    /// Like [`Immersion::new`] but allows `m == n`; such maps are only useful
    /// as factors of a product.
    pub(crate) fn factor(map: MapExpr, domain: Vec<(f64, f64)>) -> Result<Self, GeometryError> {
        if domain.len() != map.input_dim() {
            return Err(GeometryError::Invalid(format!(
                "domain has {} intervals for {} inputs",
                domain.len(),
                map.input_dim()
            )));
        }
        if domain
            .iter()
            .any(|&(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite())
        {
            return Err(GeometryError::Invalid(
                "empty or unbounded domain interval".into(),
            ));
        }
        if map.input_dim() > map.output_dim() {
            return Err(GeometryError::Invalid(
                "more parameters than ambient coordinates".into(),
            ));
        }
        Ok(Self {
            map,
            domain,
            ruling_coords: None,
            complex_structure: false,
        })
    }

    /// Designates domain coordinates that sweep the ruling.
    pub fn with_ruling(mut self, coords: Vec<usize>) -> Result<Self, GeometryError> {
        let m = self.domain_dim();
        let mut sorted = coords.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if coords.is_empty() || sorted.len() != coords.len() || sorted.iter().any(|&c| c >= m) {
            return Err(GeometryError::Invalid(format!(
                "bad ruling coordinates {coords:?}"
            )));
        }
        self.ruling_coords = Some(coords);
        Ok(self)
    }

    /// Declares that coordinates pair as `(x0, x1), (x2, x3), ...` with
    /// `J(d/dx_{2k}) = d/dx_{2k+1}`.
    pub fn with_complex_structure(mut self) -> Result<Self, GeometryError> {
        if self.domain_dim() % 2 != 0 {
            return Err(GeometryError::Invalid(
                "complex structure needs even dimension".into(),
            ));
        }
        self.complex_structure = true;
        Ok(self)
    }

    pub fn without_annotations(mut self) -> Self {
        self.ruling_coords = None;
        self.complex_structure = false;
        self
    }

    pub fn domain_dim(&self) -> usize {
        self.map.input_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.map.output_dim()
    }

    pub fn map(&self) -> &MapExpr {
        &self.map
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn ruling_coords(&self) -> Option<&[usize]> {
        self.ruling_coords.as_deref()
    }

    pub fn has_complex_structure(&self) -> bool {
        self.complex_structure
    }

    /// Complex structure on coordinate vectors, as an `m x m` matrix.
    pub fn coordinate_complex_structure(&self) -> Option<DMatrix<f64>> {
        if !self.complex_structure {
            return None;
        }
        let m = self.domain_dim();
        let mut j = DMatrix::zeros(m, m);
        for k in (0..m).step_by(2) {
            j[(k + 1, k)] = 1.0;
            j[(k, k + 1)] = -1.0;
        }
        Some(j)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.domain.len()
            && x.iter()
                .zip(&self.domain)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<(), GeometryError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GeometryError::OutOfDomain { point: x.to_vec() })
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        Ok(self.map.eval(x)?)
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet2, GeometryError> {
        Ok(jet_eval(&self.map, x)?)
    }

    /// Same immersion with ambient coordinates transformed by `q` (`n x n`).
    pub fn transform_ambient(&self, q: &DMatrix<f64>) -> Self {
        Self {
            map: self.map.postcompose_linear(q),
            ..self.clone()
        }
    }

    /// Reparametrizes by `x = A y + b`. The new domain is the bounding box of
    /// the preimage of the old one; annotations are dropped since they refer
    /// to the old coordinates.
    pub fn reparametrize(&self, a: &DMatrix<f64>, b: &[f64]) -> Result<Self, GeometryError> {
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::Invalid("reparametrization is not invertible".into()))?;
        let m = self.domain_dim();
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for corner in 0..(1usize << m) {
            let x: Vec<f64> = (0..m)
                .map(|i| {
                    let (l, h) = self.domain[i];
                    (if corner >> i & 1 == 1 { h } else { l }) - b[i]
                })
                .collect();
            let y = &inv * nalgebra::DVector::from_vec(x);
            for i in 0..m {
                lo[i] = lo[i].min(y[i]);
                hi[i] = hi[i].max(y[i]);
            }
        }
        Ok(Self {
            map: self.map.precompose_affine(a, b),
            domain: lo.into_iter().zip(hi).collect(),
            ruling_coords: None,
            complex_structure: false,
        })
    }

    /// Cartesian product `(x, y) -> (F(x), G(y))`.
    pub fn product(&self, other: &Immersion) -> Result<Immersion, GeometryError> {
        let m = self.domain_dim();
        let map = self.map.concat(&other.map);
        let mut domain = self.domain.clone();
        domain.extend_from_slice(&other.domain);
        let mut imm = Immersion::new(map, domain)?;
        let ruling: Vec<usize> = self
            .ruling_coords
            .iter()
            .flatten()
            .copied()
            .chain(other.ruling_coords.iter().flatten().map(|c| c + m))
            .collect();
        if !ruling.is_empty() {
            imm = imm.with_ruling(ruling)?;
        }
        if self.complex_structure && other.complex_structure {
            imm = imm.with_complex_structure()?;
        }
        Ok(imm)
    }
}
