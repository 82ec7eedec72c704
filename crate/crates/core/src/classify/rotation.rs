use nalgebra::DMatrix;

/// Coordinates on `so(4)` in the order `(01, 02, 03, 12, 13, 23)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RotationParam(pub [f64; 6]);

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl RotationParam {
    pub fn from_slice(t: &[f64]) -> Self {
        let mut a = [0.0; 6];
        a.copy_from_slice(&t[..6]);
        Self(a)
    }

    /// The skew matrix with `A[i][j] = a_ij`, `A[j][i] = -a_ij`.
    pub fn hat(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(4, 4);
        for (&(i, j), &v) in PAIRS.iter().zip(&self.0) {
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
        a
    }

    pub fn exp(&self) -> DMatrix<f64> {
        self.hat().exp()
    }
}
