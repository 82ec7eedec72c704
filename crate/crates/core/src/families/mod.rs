//! Explicit austere families (generalized helicoids, their products and
//! cones, complex cones over holomorphic curves) and non-austere controls.

mod complex;

pub use complex::{complex_cone, complex_cylinder, HoloCurveSpec, MAX_CURVE_DEGREE};

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{GeometryError, Immersion};
use crate::numerics::{Expr, MapExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> FamilyError {
    FamilyError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// Parameters of the generalized helicoid
/// `(l0 x0, x1 cos l1 x0, x1 sin l1 x0, ..., xs cos ls x0, xs sin ls x0, x_{s+1}, ..., x_{m-1})`
/// in `R^{m+s}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelicoidSpec {
    pub m: usize,
    pub s: usize,
    /// `l0, l1, ..., ls`.
    pub lambdas: Vec<f64>,
    pub domain: Vec<(f64, f64)>,
    /// Annotate all of `x1..x_{m-1}` as ruling coordinates instead of `x1..xs`.
    pub extended_ruling: bool,
}

/// `x0 in [0, 2 pi]`, `x_i in [0.2, 2]`: away from the axis `x_i = 0`.
pub fn default_helicoid_domain(m: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(0.2, 2.0); m];
    if m > 0 {
        d[0] = (0.0, TAU);
    }
    d
}

impl HelicoidSpec {
    pub fn new(m: usize, s: usize, lambdas: Vec<f64>) -> Result<Self, FamilyError> {
        let spec = Self {
            m,
            s,
            lambdas,
            domain: default_helicoid_domain(m),
            extended_ruling: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self, FamilyError> {
        self.domain = domain;
        self.validate()?;
        Ok(self)
    }

    pub fn with_extended_ruling(mut self) -> Self {
        self.extended_ruling = true;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.m + self.s
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        if self.s == 0 || self.s >= self.m {
            return Err(invalid(
                "s",
                format!("need 1 <= s < m, got s = {}, m = {}", self.s, self.m),
            ));
        }
        if self.lambdas.len() != self.s + 1 {
            return Err(invalid(
                "lambdas",
                format!(
                    "expected {} values l0..l{}, got {}",
                    self.s + 1,
                    self.s,
                    self.lambdas.len()
                ),
            ));
        }
        if let Some(i) =
            (1..=self.s).find(|&i| self.lambdas[i] == 0.0 || !self.lambdas[i].is_finite())
        {
            return Err(invalid(
                "lambdas",
                format!("l{i} must be finite and nonzero"),
            ));
        }
        if !self.lambdas[0].is_finite() {
            return Err(invalid("lambdas", "l0 must be finite"));
        }
        if self.domain.len() != self.m {
            return Err(invalid("domain", format!("expected {} intervals", self.m)));
        }
        Ok(())
    }

    fn map(&self) -> MapExpr {
        let x0 = Expr::var(0);
        let mut out = vec![self.lambdas[0] * &x0];
        for i in 1..=self.s {
            let xi = Expr::var(i);
            let angle = self.lambdas[i] * &x0;
            out.push(&xi * angle.cos());
            out.push(&xi * angle.sin());
        }
        out.extend((self.s + 1..self.m).map(Expr::var));
        MapExpr::new(self.m, out).expect("variables below m")
    }
}

pub fn generalized_helicoid(spec: &HelicoidSpec) -> Result<Immersion, FamilyError> {
    spec.validate()?;
    let last = if spec.extended_ruling {
        spec.m - 1
    } else {
        spec.s
    };
    Ok(Immersion::new(spec.map(), spec.domain.clone())?.with_ruling((1..=last).collect())?)
}

/// `(b x0, x1 cos x0, x1 sin x0)`.
pub fn classical_helicoid(b: f64) -> Result<Immersion, FamilyError> {
    generalized_helicoid(&HelicoidSpec::new(2, 1, vec![b, 1.0])?)
}

/// `(x, y) -> (F(x), G(y))`.
pub fn product_immersion(a: &Immersion, b: &Immersion) -> Result<Immersion, FamilyError> {
    Ok(a.product(b)?)
}

/// The cone over a generalized Clifford torus: the `m = 4, s = 3`
/// helicoid with `l0 = 0, l1 = l2 = l3 = lambda`, with its vanishing first
/// coordinate dropped, in `R^6`.
pub fn helicoid_cone(lambda: f64) -> Result<Immersion, FamilyError> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(invalid("lambda", "must be finite and nonzero"));
    }
    let spec = HelicoidSpec::new(4, 3, vec![0.0, lambda, lambda, lambda])?;
    let map = spec.map().drop_outputs(&[0]);
    Ok(Immersion::new(map, spec.domain.clone())?.with_ruling(vec![1, 2, 3])?)
}

/// Round sphere `S^{n-1}` of radius `r` in hyperspherical coordinates,
/// polar angles in `[0.3, pi - 0.3]`, last angle in `[0, 2 pi]`.
pub fn sphere(n: usize, r: f64) -> Result<Immersion, FamilyError> {
    if n < 2 {
        return Err(invalid("n", "ambient dimension must be at least 2"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("r", "radius must be positive"));
    }
    let m = n - 1;
    let mut out = Vec::with_capacity(n);
    let mut sines = Expr::constant(r);
    for k in 0..m {
        let t = Expr::var(k);
        out.push(&sines * t.cos());
        sines = sines * t.sin();
    }
    out.push(sines);
    let mut domain = vec![(0.3, PI - 0.3); m];
    domain[m - 1] = (0.0, TAU);
    Ok(Immersion::new(
        MapExpr::new(m, out).expect("variables below m"),
        domain,
    )?)
}

/// `x -> (x, 0)` on `[-1, 1]^m`, every coordinate a ruling coordinate.
pub fn flat(m: usize, n: usize) -> Result<Immersion, FamilyError> {
    if m == 0 || m >= n {
        return Err(invalid(
            "m",
            format!("need 0 < m < n, got m = {m}, n = {n}"),
        ));
    }
    let mut out: Vec<Expr> = (0..m).map(Expr::var).collect();
    out.extend((m..n).map(|_| Expr::zero()));
    let map = MapExpr::new(m, out).expect("variables below m");
    Ok(Immersion::new(map, vec![(-1.0, 1.0); m])?.with_ruling((0..m).collect())?)
}

/// Identity of `R^k` on `[-1, 1]^k`, only usable as a product factor.
pub fn euclidean_factor(k: usize) -> Result<Immersion, FamilyError> {
    if k == 0 {
        return Err(invalid("k", "must be positive"));
    }
    let map = MapExpr::new(k, (0..k).map(Expr::var).collect()).expect("variables below k");
    Ok(Immersion::factor(map, vec![(-1.0, 1.0); k])?.with_ruling((0..k).collect())?)
}
