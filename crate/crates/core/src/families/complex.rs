use num_complex::Complex64;

use super::{invalid, FamilyError};
use crate::geometry::Immersion;
use crate::numerics::{Expr, MapExpr};

pub const MAX_CURVE_DEGREE: usize = 6;

/// Polynomial curve `gamma: C -> C^k`, component `c` given by ascending
/// coefficients `coefficients[c][j]` of `z^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloCurveSpec {
    pub coefficients: Vec<Vec<Complex64>>,
    /// Box for `(u1, u2, u3, u4)`; `w = u1 + i u2`, `z = u3 + i u4`.
    pub domain: Vec<(f64, f64)>,
}

impl HoloCurveSpec {
    pub fn new(coefficients: Vec<Vec<Complex64>>) -> Result<Self, FamilyError> {
        let spec = Self {
            coefficients,
            domain: vec![(0.5, 1.5), (-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0)],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Real coefficients, e.g. `[[1], [0, 1], [0, 0, 1]]` for `(1, z, z^2)`.
    pub fn from_real(coefficients: &[&[f64]]) -> Result<Self, FamilyError> {
        Self::new(
            coefficients
                .iter()
                .map(|c| c.iter().map(|&re| Complex64::new(re, 0.0)).collect())
                .collect(),
        )
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self, FamilyError> {
        self.domain = domain;
        self.validate()?;
        Ok(self)
    }

    pub fn n_complex(&self) -> usize {
        self.coefficients.len()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients
            .iter()
            .filter_map(|c| c.iter().rposition(|a| *a != Complex64::new(0.0, 0.0)))
            .max()
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.coefficients.is_empty() {
            return Err(invalid("curve", "needs at least one component"));
        }
        if self
            .coefficients
            .iter()
            .flatten()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(invalid("curve", "coefficients must be finite"));
        }
        match self.degree() {
            Some(d) if d > MAX_CURVE_DEGREE => Err(invalid(
                "curve",
                format!("degree {d} exceeds {MAX_CURVE_DEGREE}"),
            )),
            Some(d) if d >= 1 => Ok(()),
            _ => Err(invalid(
                "curve",
                "some component must have degree at least 1",
            )),
        }?;
        if self.domain.len() != 4 {
            return Err(invalid("domain", "expected 4 intervals"));
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .map(|c| {
                c.iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
            })
            .collect()
    }

    /// `(Re, Im)` expressions of each component in the variables `x`, `y`
    /// of `z = x + i y`.
    fn expressions(&self, x: &Expr, y: &Expr) -> Vec<(Expr, Expr)> {
        let deg = self.degree().unwrap_or(0);
        let mut powers = vec![(Expr::constant(1.0), Expr::zero())];
        for k in 1..=deg {
            let (a, b) = powers[k - 1].clone();
            powers.push((&a * x - &b * y, &a * y + &b * x));
        }
        self.coefficients
            .iter()
            .map(|coeffs| {
                let mut re = Expr::zero();
                let mut im = Expr::zero();
                for (c, (pr, pi)) in coeffs.iter().zip(&powers) {
                    if c.re != 0.0 {
                        re = re + c.re * pr;
                        im = im + c.re * pi;
                    }
                    if c.im != 0.0 {
                        re = re - c.im * pi;
                        im = im + c.im * pr;
                    }
                }
                (re, im)
            })
            .collect()
    }

    /// Smallest `|gamma(z)|` over a 9x9 grid of the `z` box.
    fn min_modulus(&self) -> f64 {
        let (xl, xh) = self.domain[2];
        let (yl, yh) = self.domain[3];
        let mut low = f64::INFINITY;
        for i in 0..9 {
            for j in 0..9 {
                let z = Complex64::new(
                    xl + (xh - xl) * i as f64 / 8.0,
                    yl + (yh - yl) * j as f64 / 8.0,
                );
                let n: f64 = self
                    .eval(z)
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                low = low.min(n);
            }
        }
        low
    }
}

/// `(u1, .., u4) -> w gamma(z)` in `C^k = R^{2k}` (real and imaginary
/// parts interleaved), with `E = C gamma(z)` swept by `(u1, u2)`.
///
/// Needs `k >= 3` so that the real 4-fold has positive codimension.
pub fn complex_cone(spec: &HoloCurveSpec) -> Result<Immersion, FamilyError> {
    spec.validate()?;
    if spec.n_complex() < 3 {
        return Err(invalid("curve", "complex cone needs at least 3 components"));
    }
    if spec.min_modulus() < 1e-10 {
        return Err(invalid("curve", "curve vanishes on the sampled domain"));
    }
    let (u1, u2, u3, u4) = (Expr::var(0), Expr::var(1), Expr::var(2), Expr::var(3));
    let mut out = Vec::with_capacity(2 * spec.n_complex());
    for (re, im) in spec.expressions(&u3, &u4) {
        out.push(&u1 * &re - &u2 * &im);
        out.push(&u1 * &im + &u2 * &re);
    }
    let map = MapExpr::new(4, out).expect("four variables");
    Ok(Immersion::new(map, spec.domain.clone())?
        .with_ruling(vec![0, 1])?
        .with_complex_structure()?)
}

/// `(w, z) -> (w, gamma(z))`: the ruling `E = C e_1` is the same plane at
/// every point.
pub fn complex_cylinder(spec: &HoloCurveSpec) -> Result<Immersion, FamilyError> {
    spec.validate()?;
    let (u1, u2, u3, u4) = (Expr::var(0), Expr::var(1), Expr::var(2), Expr::var(3));
    let mut out = vec![u1, u2];
    for (re, im) in spec.expressions(&u3, &u4) {
        out.push(re);
        out.push(im);
    }
    let map = MapExpr::new(4, out).expect("four variables");
    Ok(Immersion::new(map, spec.domain.clone())?
        .with_ruling(vec![0, 1])?
        .with_complex_structure()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_spec_validation() {
        assert!(HoloCurveSpec::from_real(&[&[1.0], &[2.0]]).is_err());
        let deg7 = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!(HoloCurveSpec::from_real(&[&[1.0], &deg7]).is_err());
        let ok = HoloCurveSpec::from_real(&[&[1.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(ok.degree(), Some(1));
        assert!(complex_cone(&ok).is_err());
        let vanishing =
            HoloCurveSpec::from_real(&[&[0.0, 1.0], &[0.0, 2.0], &[0.0, 0.0, 1.0]]).unwrap();
        assert!(complex_cone(&vanishing).is_err());
    }

    #[test]
    fn cone_is_complex_scaling_of_the_curve() {
        let spec = HoloCurveSpec::new(vec![
            vec![Complex64::new(1.0, 0.5)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.3, -1.0)],
            vec![
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 1.0),
            ],
        ])
        .unwrap();
        let cone = complex_cone(&spec).unwrap();
        let (w, z) = (Complex64::new(0.8, -0.3), Complex64::new(0.4, 0.7));
        let expect: Vec<f64> = spec
            .eval(z)
            .iter()
            .flat_map(|c| [(w * c).re, (w * c).im])
            .collect();
        let got = cone.eval(&[w.re, w.im, z.re, z.im]).unwrap();
        assert!(expect.iter().zip(&got).all(|(a, b)| (a - b).abs() < 1e-14));
        assert!(cone.has_complex_structure());
    }
}
