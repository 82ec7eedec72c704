use nalgebra::DMatrix;

use super::frame::{PointFrame, SecondFundamentalForm};
use super::{GeometryError, Immersion};
use crate::numerics::{gram_schmidt, NumericsError};

/// Tangent-frame coordinates of the ruling directions `d/dx_k`, `k` in the
/// immersion's ruling coordinates (first `k` of them when `k` is given).
pub fn ruling_frame(
    imm: &Immersion,
    frame: &PointFrame,
    k: Option<usize>,
) -> Result<DMatrix<f64>, GeometryError> {
    let coords = imm.ruling_coords().ok_or(GeometryError::MissingRuling)?;
    let take = k.unwrap_or(coords.len());
    if take == 0 || take > coords.len() {
        return Err(GeometryError::Invalid(format!(
            "requested a {take}-dimensional ruling, immersion has {}",
            coords.len()
        )));
    }
    Ok(frame.coordinate_vectors(&coords[..take]))
}

/// Largest `||d^2 F / dx_k dx_l||` over ruling coordinates `k, l`, sampled
/// at `x` and at `samples` further points of the ruling fibre through `x`.
///
/// Zero exactly when `F` is affine along the ruling coordinates.
pub fn ruling_straightness_defect(
    imm: &Immersion,
    x: &[f64],
    samples: usize,
) -> Result<f64, GeometryError> {
    let coords = imm.ruling_coords().ok_or(GeometryError::MissingRuling)?;
    imm.check_point(x)?;
    let golden = [
        0.618_033_988_749_894_9,
        0.754_877_666_246_692_8,
        0.569_840_290_998_053_3,
    ];
    let mut worst: f64 = 0.0;
    for s in 0..=samples {
        let mut y = x.to_vec();
        if s > 0 {
            for (idx, &c) in coords.iter().enumerate() {
                let (lo, hi) = imm.domain()[c];
                let frac = (s as f64 * golden[idx % golden.len()] + idx as f64 * 0.5).fract();
                y[c] = lo + (hi - lo) * frac;
            }
        }
        let jet = imm.jet(&y)?;
        for &k in coords {
            for &l in coords {
                let v = jet.second_partial(k, l);
                worst = worst.max(v.iter().map(|c| c * c).sum::<f64>().sqrt());
            }
        }
    }
    Ok(worst)
}

/// `max |v^T S^a w|` over an orthonormalized basis of `E` (columns of `e`,
/// tangent-frame coordinates). Vanishes on rulings.
pub fn ruled_condition_check(
    sff: &SecondFundamentalForm,
    e: &DMatrix<f64>,
) -> Result<f64, GeometryError> {
    if e.nrows() != sff.domain_dim() || e.ncols() == 0 {
        return Err(GeometryError::Invalid(
            "ruling basis has the wrong shape".into(),
        ));
    }
    let q = gram_schmidt(e, 1e-10)
        .map_err(|err| match err {
            NumericsError::RankDeficient { .. } => GeometryError::RankDeficientRuling,
            other => GeometryError::Numerics(other),
        })?
        .q;
    let mut worst: f64 = 0.0;
    for s in &sff.components {
        let block = q.transpose() * s.as_matrix() * &q;
        worst = worst.max(block.amax());
    }
    Ok(worst)
}
