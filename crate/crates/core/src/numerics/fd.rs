//! Central finite differences, used as an independent check on jets.

use nalgebra::DMatrix;

use super::NumericsError;

/// Default step for [`finite_diff_second`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Central-difference Jacobian and Hessian of `f` at `x`.
///
/// Returns `(jacobian n x m, hessian: one m x m matrix per output)`. Errors
/// from `f` (typically domain violations near a boundary) are passed through.
pub fn finite_diff_second<F>(
    f: F,
    x: &[f64],
    h: f64,
) -> Result<(DMatrix<f64>, Vec<DMatrix<f64>>), NumericsError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, NumericsError>,
{
    if !(h > 0.0) {
        return Err(NumericsError::InvalidStep(h));
    }
    let m = x.len();
    let f0 = f(x)?;
    let n = f0.len();
    let shifted = |steps: &[(usize, f64)]| -> Result<Vec<f64>, NumericsError> {
        let mut y = x.to_vec();
        for &(i, s) in steps {
            y[i] += s;
        }
        f(&y)
    };
    let mut jac = DMatrix::zeros(n, m);
    let mut hess = vec![DMatrix::zeros(m, m); n];
    for i in 0..m {
        let fp = shifted(&[(i, h)])?;
        let fm = shifted(&[(i, -h)])?;
        for a in 0..n {
            jac[(a, i)] = (fp[a] - fm[a]) / (2.0 * h);
            hess[a][(i, i)] = (fp[a] - 2.0 * f0[a] + fm[a]) / (h * h);
        }
        for j in (i + 1)..m {
            let fpp = shifted(&[(i, h), (j, h)])?;
            let fpm = shifted(&[(i, h), (j, -h)])?;
            let fmp = shifted(&[(i, -h), (j, h)])?;
            let fmm = shifted(&[(i, -h), (j, -h)])?;
            for a in 0..n {
                let v = (fpp[a] - fpm[a] - fmp[a] + fmm[a]) / (4.0 * h * h);
                hess[a][(i, j)] = v;
                hess[a][(j, i)] = v;
            }
        }
    }
    Ok((jac, hess))
}

/// `max |a - b| / max(1, max |b|)` over all Jacobian and Hessian entries.
pub fn jet_relative_error(jet: &super::Jet2, jac: &DMatrix<f64>, hess: &[DMatrix<f64>]) -> f64 {
    let jac_scale = jet.jacobian.amax().max(1.0);
    let mut err = (&jet.jacobian - jac).amax() / jac_scale;
    let hess_scale = jet.hessian.iter().map(|h| h.amax()).fold(1.0, f64::max);
    for (a, b) in jet.hessian.iter().zip(hess) {
        err = err.max((a - b).amax() / hess_scale);
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_second_derivative() {
        let (_, h) = finite_diff_second(|x| Ok(vec![x[0].powi(3)]), &[1.0], 1e-3).unwrap();
        assert!((h[0][(0, 0)] - 6.0).abs() < 1e-5);
    }

    #[test]
    fn constant_map_has_zero_derivatives() {
        let (j, h) = finite_diff_second(|_| Ok(vec![4.2, -1.0]), &[0.3, 0.4], 1e-4).unwrap();
        assert_eq!(j.amax(), 0.0);
        assert!(h.iter().all(|m| m.amax() == 0.0));
    }

    #[test]
    fn boundary_error_passes_through() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                Err(NumericsError::Domain {
                    primitive: "sqrt",
                    value: x[0],
                })
            } else {
                Ok(vec![x[0].sqrt()])
            }
        };
        assert!(finite_diff_second(f, &[1e-5], 1e-4).is_err());
    }
}
