//! Levenberg–Marquardt on a manifold given by a local chart (retraction).

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once `||J^T r||_inf` falls below this.
    pub grad_tol: f64,
    /// Stop once `||r||` falls below this.
    pub residual_tol: f64,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-10,
            residual_tol: 1e-14,
            fd_step: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome<P> {
    pub point: P,
    /// `||r||` at `point`.
    pub residual: f64,
    pub iterations: usize,
}

/// Minimizes `||r(p)||^2` starting from `start`.
///
/// `retract(p, t)` moves `p` by the tangent step `t` (length `dim`); the
/// Jacobian is taken by central differences in that chart, which is
/// re-centred after every accepted step. `residual` may return `None` for
/// points outside the feasible set; such trial steps are rejected.
pub fn levenberg_marquardt<P, R, T>(
    start: P,
    dim: usize,
    residual: R,
    retract: T,
    opts: &LmOptions,
) -> Option<LmOutcome<P>>
where
    P: Clone,
    R: Fn(&P) -> Option<Vec<f64>>,
    T: Fn(&P, &[f64]) -> P,
{
    let mut x = start;
    let mut r = DVector::from_vec(residual(&x)?);
    let mut cost = r.norm_squared();
    let mut mu: Option<f64> = None;
    let mut nu = 2.0;
    let mut iterations = 0;
    let mut step = vec![0.0; dim];
    while iterations < opts.max_iter && cost.sqrt() > opts.residual_tol {
        iterations += 1;
        let mut jac = DMatrix::zeros(r.len(), dim);
        for k in 0..dim {
            step.iter_mut().for_each(|s| *s = 0.0);
            step[k] = opts.fd_step;
            let plus = residual(&retract(&x, &step))?;
            step[k] = -opts.fd_step;
            let minus = residual(&retract(&x, &step))?;
            for i in 0..r.len() {
                jac[(i, k)] = (plus[i] - minus[i]) / (2.0 * opts.fd_step);
            }
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() < opts.grad_tol {
            break;
        }
        let mu_now = *mu.get_or_insert_with(|| 1e-3 * jtj.diagonal().max().max(1e-12));
        let mut damp = mu_now;
        let mut accepted = false;
        while damp < 1e16 {
            let a = &jtj + DMatrix::identity(dim, dim) * damp;
            let Some(chol) = a.cholesky() else {
                damp *= nu;
                nu *= 2.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let trial = retract(&x, delta.as_slice());
            let trial_r = residual(&trial).map(DVector::from_vec);
            let predicted = delta.dot(&(&delta * damp - &g));
            if let Some(tr) = trial_r {
                let trial_cost = tr.norm_squared();
                let rho = (cost - trial_cost) / predicted.max(f64::MIN_POSITIVE);
                if trial_cost < cost && rho > 0.0 {
                    let small = delta.norm() < 1e-15;
                    x = trial;
                    r = tr;
                    cost = trial_cost;
                    mu = Some(damp * (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3)));
                    nu = 2.0;
                    accepted = !small;
                    break;
                }
            }
            damp *= nu;
            nu *= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Some(LmOutcome {
        point: x,
        residual: cost.sqrt(),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_in_residual_form() {
        let out = levenberg_marquardt(
            vec![-1.2, 1.0],
            2,
            |p: &Vec<f64>| Some(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]),
            |p, t| vec![p[0] + t[0], p[1] + t[1]],
            &LmOptions::default(),
        )
        .unwrap();
        assert!((out.point[0] - 1.0).abs() < 1e-8 && (out.point[1] - 1.0).abs() < 1e-8);
        assert!(out.residual < 1e-10);
    }

    #[test]
    fn unit_circle_chart() {
        // nearest point on the circle to (3, 4)
        let retract = |p: &[f64; 2], t: &[f64]| {
            let q = [p[0] - t[0] * p[1], p[1] + t[0] * p[0]];
            let n = q[0].hypot(q[1]);
            [q[0] / n, q[1] / n]
        };
        let out = levenberg_marquardt(
            [1.0, 0.0],
            1,
            |p: &[f64; 2]| Some(vec![p[0] - 3.0, p[1] - 4.0]),
            retract,
            &LmOptions::default(),
        )
        .unwrap();
        assert!((out.point[0] - 0.6).abs() < 1e-8 && (out.point[1] - 0.8).abs() < 1e-8);
        assert!((out.residual - 4.0).abs() < 1e-8);
    }

    #[test]
    fn infeasible_start() {
        let out = levenberg_marquardt(
            0.0,
            1,
            |_: &f64| None,
            |p, t| p + t[0],
            &LmOptions::default(),
        );
        assert!(out.is_none());
    }
}
