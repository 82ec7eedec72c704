//! Conormal bundles `N*M ⊂ T*R^n = C^n` (`z = p + i xi`): always
//! Lagrangian, special Lagrangian when `M` is austere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{frame_at, GeometryError, Immersion, PointFrame};
use crate::numerics::{gram_schmidt, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlagError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("normal frame changes branch inside the stencil of width {h}; shrink the step")]
    StencilTooCoarse { h: f64 },
    #[error("expected {expected} tangent vectors, got {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("need at least two samples to compare phases")]
    TooFewSamples,
    #[error("tangent basis is degenerate")]
    DegenerateBasis,
    #[error("normal coordinates have length {found}, codimension is {expected}")]
    BadNormal { expected: usize, found: usize },
}

/// Which identification `T*R^n = C^n` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `z = p + i xi`
    #[default]
    PlusI,
    /// `z = p - i xi`
    MinusI,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::PlusI => 1.0,
            Convention::MinusI => -1.0,
        }
    }
}

/// A point `(p, xi)` of the conormal bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct ConormalSample {
    pub base_x: Vec<f64>,
    /// Coefficients of `xi` in the normal frame at `base_x`.
    pub xi_coords: Vec<f64>,
    /// `p + i xi`.
    pub complex_point: Vec<Complex64>,
}

impl ConormalSample {
    pub fn new(imm: &Immersion, x: &[f64], xi_coords: Vec<f64>) -> Result<Self, SlagError> {
        let frame = frame_at(imm, x)?;
        check_codim(&frame, &xi_coords)?;
        let xi = &frame.normal * DVector::from_column_slice(&xi_coords);
        let complex_point = frame
            .point
            .iter()
            .zip(xi.iter())
            .map(|(&p, &q)| Complex64::new(p, q))
            .collect();
        Ok(Self {
            base_x: x.to_vec(),
            xi_coords,
            complex_point,
        })
    }
}

fn check_codim(frame: &PointFrame, xi: &[f64]) -> Result<(), SlagError> {
    let codim = frame.normal.ncols();
    if xi.len() != codim {
        return Err(SlagError::BadNormal {
            expected: codim,
            found: xi.len(),
        });
    }
    Ok(())
}

/// Tangent space of `N*M` at `sample` as `n` real `2n`-vectors `(dp, dxi)`:
/// `m` from moving the base point (with `xi` carried along with frozen
/// normal-frame coefficients, differentiated by central differences of
/// step `h`) and `n - m` vertical vectors `(0, e_a)`.
pub fn conormal_tangent_basis(
    imm: &Immersion,
    sample: &ConormalSample,
    h: f64,
) -> Result<Vec<DVector<f64>>, SlagError> {
    if !(h > 0.0) {
        return Err(GeometryError::Numerics(NumericsError::InvalidStep(h)).into());
    }
    let x = &sample.base_x;
    let frame = frame_at(imm, x)?;
    check_codim(&frame, &sample.xi_coords)?;
    let n = imm.ambient_dim();
    let m = imm.domain_dim();
    let coeffs = DVector::from_column_slice(&sample.xi_coords);
    let jac = &frame.jet().jacobian;
    let mut basis = Vec::with_capacity(n);
    for k in 0..m {
        let mut xi_pm = Vec::with_capacity(2);
        for s in [1.0, -1.0] {
            let mut y = x.clone();
            y[k] += s * h;
            let f = match frame_at(imm, &y) {
                Err(GeometryError::OutOfDomain { .. }) => {
                    return Err(GeometryError::StepTooLarge { h }.into())
                }
                other => other?,
            };
            if f.normal_pivots != frame.normal_pivots {
                return Err(SlagError::StencilTooCoarse { h });
            }
            xi_pm.push(&f.normal * &coeffs);
        }
        let dxi = (&xi_pm[0] - &xi_pm[1]) / (2.0 * h);
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(0, n).copy_from(&jac.column(k));
        v.rows_mut(n, n).copy_from(&dxi);
        basis.push(v);
    }
    for a in 0..(n - m) {
        let mut v = DVector::zeros(2 * n);
        v.rows_mut(n, n).copy_from(&frame.normal.column(a));
        basis.push(v);
    }
    Ok(basis)
}

/// [`conormal_tangent_basis`] that shrinks `h` tenfold, up to `refinements`
/// times, while the stencil straddles a normal-frame pivot flip.
pub fn conormal_tangent_basis_refined(
    imm: &Immersion,
    sample: &ConormalSample,
    h: f64,
    refinements: usize,
) -> Result<Vec<DVector<f64>>, SlagError> {
    let mut step = h;
    for _ in 0..refinements {
        match conormal_tangent_basis(imm, sample, step) {
            Err(SlagError::StencilTooCoarse { .. }) => step /= 10.0,
            other => return other,
        }
    }
    conormal_tangent_basis(imm, sample, step)
}

fn orthonormalize(basis: &[DVector<f64>]) -> Result<DMatrix<f64>, SlagError> {
    let b = DMatrix::from_columns(basis);
    gram_schmidt(&b, 1e-10)
        .map(|gs| gs.q)
        .map_err(|_| SlagError::DegenerateBasis)
}

/// `max |omega(t_i, t_j)|` over an orthonormalized copy of the basis, with
/// `omega((x, y), (x', y')) = <x, y'> - <y, x'>`.
pub fn lagrangian_defect(basis: &[DVector<f64>]) -> Result<f64, SlagError> {
    let Some(first) = basis.first() else {
        return Err(SlagError::WrongCount {
            expected: 1,
            found: 0,
        });
    };
    let n = first.len() / 2;
    if first.len() % 2 != 0 || basis.len() != n {
        return Err(SlagError::WrongCount {
            expected: n,
            found: basis.len(),
        });
    }
    let q = orthonormalize(basis)?;
    let (x, y) = (q.rows(0, n), q.rows(n, n));
    let omega = x.transpose() * y - y.transpose() * x;
    Ok(omega.amax())
}

/// `arg det` of the orthonormalized basis written as complex columns
/// `x + i y` (or `x - i y`).
pub fn phase_of_basis(basis: &[DVector<f64>], convention: Convention) -> Result<f64, SlagError> {
    let n = basis.first().map_or(0, |v| v.len() / 2);
    if n == 0 || basis.len() != n {
        return Err(SlagError::WrongCount {
            expected: n,
            found: basis.len(),
        });
    }
    let q = orthonormalize(basis)?;
    let s = convention.sign();
    let c = DMatrix::from_fn(n, n, |i, j| Complex64::new(q[(i, j)], s * q[(n + i, j)]));
    let det = c.determinant();
    if det.norm() < 1e-12 {
        return Err(SlagError::DegenerateBasis);
    }
    Ok(det.arg())
}

/// Largest pairwise distance between angles on the circle.
pub fn circular_spread(phases: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in phases.iter().enumerate() {
        for b in &phases[i + 1..] {
            let d = (a - b).rem_euclid(std::f64::consts::TAU);
            worst = worst.max(d.min(std::f64::consts::TAU - d));
        }
    }
    worst
}

/// Tenfold step reductions tried when a stencil straddles a pivot flip.
pub const STENCIL_REFINEMENTS: usize = 3;

/// Spread of the calibration phase over the samples; near zero iff the
/// conormal bundle is special Lagrangian with one phase.
pub fn special_phase_defect(
    imm: &Immersion,
    samples: &[ConormalSample],
    h: f64,
    convention: Convention,
) -> Result<f64, SlagError> {
    if samples.len() < 2 {
        return Err(SlagError::TooFewSamples);
    }
    let phases = samples
        .iter()
        .map(|s| {
            phase_of_basis(
                &conormal_tangent_basis_refined(imm, s, h, STENCIL_REFINEMENTS)?,
                convention,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(circular_spread(&phases))
}
