//! Multi-start fits of a span into `Q_B` and `Q_C(lambda)` over `SO(4)`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{require_four, ClassifyError, RotationParam};
use crate::austere::{lambda3_from, QCParams, SymSpan};
use crate::geometry::derive_seed;
use crate::numerics::{haar_rotation, levenberg_marquardt, LmOptions, SymMatrix, DEFAULT_RANK_TOL};

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// A start this good ends the multi-start loop early.
const EARLY_EXIT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 500,
            seed: 0x00C1_A551_F1ED,
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn lm(&self) -> LmOptions {
        LmOptions {
            max_iter: self.max_iter,
            ..LmOptions::default()
        }
    }
}

fn conjugated(basis: &[SymMatrix], r: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    basis
        .iter()
        .map(|s| r * s.as_matrix() * r.transpose())
        .collect()
}

fn left_step(r: &DMatrix<f64>, t: &[f64]) -> DMatrix<f64> {
    RotationParam::from_slice(t).exp() * r
}

/// Component of `T` orthogonal to `Q_B`, in isometric coordinates.
fn qb_residual(t: &DMatrix<f64>, out: &mut Vec<f64>) {
    let mu = (t[(0, 0)] + t[(1, 1)] - t[(2, 2)] - t[(3, 3)]) / 4.0;
    out.extend_from_slice(&[
        t[(0, 0)] - mu,
        t[(1, 1)] - mu,
        t[(2, 2)] + mu,
        t[(3, 3)] + mu,
        SQRT2 * t[(0, 1)],
        SQRT2 * t[(2, 3)],
    ]);
}

#[derive(Clone, Debug)]
pub struct FitB {
    /// `sqrt(sum_i ||P_perp(R S_i R^T)||^2)` over a Frobenius-orthonormal
    /// basis; for spans of dimension above 5 the lower bound `sqrt(dim - 5)`.
    pub residual: f64,
    pub frame: DMatrix<f64>,
}

pub fn fit_type_b(span: &SymSpan, opts: &FitOptions) -> Result<FitB, ClassifyError> {
    require_four(span)?;
    let basis = span.orthonormal_basis(DEFAULT_RANK_TOL);
    let id = DMatrix::identity(4, 4);
    if basis.is_empty() {
        return Ok(FitB {
            residual: 0.0,
            frame: id,
        });
    }
    if basis.len() > 5 {
        return Ok(FitB {
            residual: ((basis.len() - 5) as f64).sqrt(),
            frame: id,
        });
    }
    let residual = |r: &DMatrix<f64>| {
        let mut out = Vec::with_capacity(6 * basis.len());
        for t in conjugated(&basis, r) {
            qb_residual(&t, &mut out);
        }
        Some(out)
    };
    let mut best = FitB {
        residual: f64::INFINITY,
        frame: id,
    };
    for k in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, k as u64));
        let start = haar_rotation(&mut rng, 4);
        let out = levenberg_marquardt(start, 6, residual, left_step, &opts.lm())
            .expect("residual is total");
        if out.residual < best.residual {
            best = FitB {
                residual: out.residual,
                frame: out.point,
            };
        }
        if best.residual < EARLY_EXIT {
            break;
        }
    }
    Ok(best)
}

/// `((x slot), (lambda x slot))` for the three `Q_C` coordinates.
const QC_SLOTS: [((usize, usize), (usize, usize)); 3] =
    [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];

fn qc_residual(t: &DMatrix<f64>, lambda: &[f64; 3], out: &mut Vec<f64>) {
    out.extend((0..4).map(|i| t[(i, i)]));
    for (j, &((a, b), (c, d))) in QC_SLOTS.iter().enumerate() {
        let l = lambda[j];
        out.push(SQRT2 * (t[(c, d)] - l * t[(a, b)]) / (1.0 + l * l).sqrt());
    }
}

/// Optimization point for `Q_C`: rotation plus the two free `lambda`s of a
/// chart in which `lambda[chart]` is solved from the relation.
#[derive(Clone, Debug)]
struct QcPoint {
    r: DMatrix<f64>,
    free: [f64; 2],
    chart: usize,
}

impl QcPoint {
    fn lambdas(&self) -> Option<[f64; 3]> {
        let others: Vec<usize> = (0..3).filter(|&i| i != self.chart).collect();
        let solved = lambda3_from(self.free[0], self.free[1]).ok()?;
        let mut l = [0.0; 3];
        l[others[0]] = self.free[0];
        l[others[1]] = self.free[1];
        l[self.chart] = solved;
        Some(l)
    }
}

#[derive(Clone, Debug)]
pub struct FitC {
    /// `sqrt(sum_i dist(R S_i R^T, Q_C(lambda))^2)` over a
    /// Frobenius-orthonormal basis.
    pub residual: f64,
    pub frame: DMatrix<f64>,
    /// The `lambda` of the model matched by `frame`.
    pub params: QCParams,
}

/// Best-fit slope of the points `(x, y)` through the origin (principal axis).
fn line_slope(pts: &[(f64, f64)]) -> f64 {
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    theta.tan().clamp(-10.0, 10.0)
}

pub fn fit_type_c(span: &SymSpan, opts: &FitOptions) -> Result<FitC, ClassifyError> {
    require_four(span)?;
    let basis = span.orthonormal_basis(DEFAULT_RANK_TOL);
    if basis.len() > 3 {
        return Err(ClassifyError::CannotFit {
            span_dim: basis.len(),
            model_dim: 3,
        });
    }
    let id = DMatrix::identity(4, 4);
    let zero = QCParams::new_unchecked(0.0, 0.0, 0.0);
    if basis.is_empty() {
        return Ok(FitC {
            residual: 0.0,
            frame: id,
            params: zero,
        });
    }
    let residual = |p: &QcPoint| {
        let lambda = p.lambdas()?;
        let mut out = Vec::with_capacity(7 * basis.len());
        for t in conjugated(&basis, &p.r) {
            qc_residual(&t, &lambda, &mut out);
        }
        Some(out)
    };
    let retract = |p: &QcPoint, t: &[f64]| QcPoint {
        r: left_step(&p.r, &t[..6]),
        free: [p.free[0] + t[6], p.free[1] + t[7]],
        chart: p.chart,
    };
    let mut best = FitC {
        residual: f64::INFINITY,
        frame: id,
        params: zero,
    };
    for k in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, k as u64));
        let r = haar_rotation(&mut rng, 4);
        let ts = conjugated(&basis, &r);
        let slopes: Vec<f64> = QC_SLOTS
            .iter()
            .map(|&((a, b), (c, d))| {
                line_slope(
                    &ts.iter()
                        .map(|t| (t[(a, b)], t[(c, d)]))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let chart = k % 3;
        let free: Vec<f64> = (0..3).filter(|&i| i != chart).map(|i| slopes[i]).collect();
        let mut start = QcPoint {
            r,
            free: [free[0], free[1]],
            chart,
        };
        if start.lambdas().is_none() {
            start.free[1] += 0.1;
        }
        let Some(out) = levenberg_marquardt(start, 8, residual, retract, &opts.lm()) else {
            continue;
        };
        if out.residual < best.residual {
            let [l1, l2, l3] = out.point.lambdas().expect("feasible");
            best = FitC {
                residual: out.residual,
                frame: out.point.r,
                params: QCParams::new_unchecked(l1, l2, l3),
            };
        }
        if best.residual < EARLY_EXIT {
            break;
        }
    }
    Ok(best)
}

/// Canonical representative of `lambda` under the frame symmetries of
/// `Q_C`: permutations, overall sign, and inverting two of the three
/// values. Picks the smallest `sum lambda^2`, then the larger sum, and
/// returns it sorted ascending.
pub fn canonical_lambdas(lambda: [f64; 3]) -> [f64; 3] {
    let mut candidates = Vec::new();
    let inversions: [Option<[usize; 2]>; 4] = [None, Some([1, 2]), Some([0, 2]), Some([0, 1])];
    for inv in inversions {
        let mut l = lambda;
        if let Some(pair) = inv {
            if pair.iter().any(|&i| l[i].abs() < 1e-12) {
                continue;
            }
            for i in pair {
                l[i] = 1.0 / l[i];
            }
        }
        for sign in [1.0, -1.0] {
            let mut c = l.map(|v| sign * v);
            c.sort_by(f64::total_cmp);
            candidates.push(c);
        }
    }
    let key = |c: &[f64; 3]| (c.iter().map(|v| v * v).sum::<f64>(), -c.iter().sum::<f64>());
    candidates
        .into_iter()
        .min_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            // values within roundoff of each other count as ties
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
            if !close(ka.0, kb.0) {
                ka.0.total_cmp(&kb.0)
            } else if !close(ka.1, kb.1) {
                ka.1.total_cmp(&kb.1)
            } else {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            }
        })
        .expect("identity candidate always present")
}
