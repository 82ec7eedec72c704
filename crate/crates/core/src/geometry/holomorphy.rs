//! Cauchy–Riemann test for the ruling map `p -> E_p` into the Grassmannian
//! of oriented 2-planes, realized on the quadric `[v1 + i v2] ⊂ CP^{n-1}`.

use num_complex::Complex64;

use super::frame::frame_at;
use super::{GeometryError, Immersion};
use crate::numerics::gram_schmidt;

/// Tolerance on `||P_E J - J P_E||` for the J-invariance precondition.
pub const J_INVARIANCE_TOL: f64 = 1e-8;

/// Orientation of the ruling plane `E` used to build `v2` from `v1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RulingOrientation {
    /// `v2 = +J v1`
    Positive,
    /// `v2 = -J v1`
    Negative,
}

impl RulingOrientation {
    pub fn sign(self) -> f64 {
        match self {
            RulingOrientation::Positive => 1.0,
            RulingOrientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            RulingOrientation::Positive => RulingOrientation::Negative,
            RulingOrientation::Negative => RulingOrientation::Positive,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RulingOrientation::Positive => "+J",
            RulingOrientation::Negative => "-J",
        }
    }
}

fn ruling_pair(imm: &Immersion) -> Result<(usize, usize), GeometryError> {
    if !imm.has_complex_structure() {
        return Err(GeometryError::MissingComplexStructure);
    }
    let coords = imm.ruling_coords().ok_or(GeometryError::MissingRuling)?;
    match *coords {
        [a, b] if a % 2 == 0 && b == a + 1 => Ok((a, b)),
        _ => Err(GeometryError::Invalid(format!(
            "ruling {coords:?} is not a complex coordinate pair"
        ))),
    }
}

/// `||P_E J - J P_E||_F` in the tangent frame at `x`, where `J` is the
/// complex structure carried over from coordinates.
pub fn j_invariance_defect(imm: &Immersion, x: &[f64]) -> Result<f64, GeometryError> {
    let j_coord = imm
        .coordinate_complex_structure()
        .ok_or(GeometryError::MissingComplexStructure)?;
    let coords = imm.ruling_coords().ok_or(GeometryError::MissingRuling)?;
    let frame = frame_at(imm, x)?;
    let r = &frame.frame_to_coord;
    let j = r * j_coord * &frame.coord_to_frame;
    let e = gram_schmidt(&frame.coordinate_vectors(coords), 1e-10)
        .map_err(|_| GeometryError::RankDeficientRuling)?
        .q;
    let p = &e * e.transpose();
    Ok((&p * &j - &j * &p).norm())
}

/// Homogeneous representative `v1 + i v2` of the ruling plane at `x`.
fn ruling_point(
    imm: &Immersion,
    x: &[f64],
    pair: (usize, usize),
    orientation: RulingOrientation,
) -> Result<Vec<Complex64>, GeometryError> {
    let jac = imm.jet(x)?.jacobian;
    let a = jac.column(pair.0);
    let b = jac.column(pair.1);
    let len = a.norm();
    if len == 0.0 {
        return Err(GeometryError::SingularImmersion { point: x.to_vec() });
    }
    // J d/dx_a = d/dx_b, so J v1 = dF(d/dx_b) / |dF(d/dx_a)|
    let s = orientation.sign();
    Ok(a.iter()
        .zip(b.iter())
        .map(|(&re, &im)| Complex64::new(re / len, s * im / len))
        .collect())
}

fn hermitian_dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest `||D_{Ju} Z - i D_u Z|| / ||Z||` over coordinate directions `u`,
/// with derivatives of the representative `Z` taken by central differences
/// and projected orthogonally to `Z`.
pub fn ruling_map_holomorphy_defect(
    imm: &Immersion,
    x: &[f64],
    h: f64,
    orientation: RulingOrientation,
) -> Result<f64, GeometryError> {
    let pair = ruling_pair(imm)?;
    imm.check_point(x)?;
    let jdef = j_invariance_defect(imm, x)?;
    if jdef > J_INVARIANCE_TOL {
        return Err(GeometryError::NotJInvariant { defect: jdef });
    }
    let m = imm.domain_dim();
    for k in 0..m {
        let (lo, hi) = imm.domain()[k];
        if x[k] - h < lo || x[k] + h > hi || !(h > 0.0) {
            return Err(GeometryError::StepTooLarge { h });
        }
    }
    let z = ruling_point(imm, x, pair, orientation)?;
    let zz = hermitian_dot(&z, &z);
    let derivs: Vec<Vec<Complex64>> = (0..m)
        .map(|k| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let zp = ruling_point(imm, &xp, pair, orientation)?;
            let zm = ruling_point(imm, &xm, pair, orientation)?;
            let d: Vec<Complex64> = zp
                .iter()
                .zip(&zm)
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect();
            let c = hermitian_dot(&z, &d) / zz;
            Ok(d.iter().zip(&z).map(|(di, zi)| di - c * zi).collect())
        })
        .collect::<Result<_, GeometryError>>()?;
    let j = imm.coordinate_complex_structure().expect("checked above");
    let zn = norm(&z);
    let mut worst: f64 = 0.0;
    for k in 0..m {
        // D_{J e_k} = sum_l J[l][k] D_l
        let mut dj = vec![Complex64::new(0.0, 0.0); z.len()];
        for l in 0..m {
            let w = j[(l, k)];
            if w != 0.0 {
                for (acc, d) in dj.iter_mut().zip(&derivs[l]) {
                    *acc += d * w;
                }
            }
        }
        let diff: Vec<Complex64> = dj
            .iter()
            .zip(&derivs[k])
            .map(|(a, b)| a - Complex64::i() * b)
            .collect();
        worst = worst.max(norm(&diff) / zn);
    }
    Ok(worst)
}
