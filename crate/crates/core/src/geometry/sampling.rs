//! Seeded domain sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fraction of each interval trimmed from both ends before sampling.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// SplitMix64 finalizer applied to `root` and a stream index.
///
/// Per-point work seeded with `derive_seed(root, i)` reproduces exactly
/// whether points are processed serially or in parallel.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// How to sample a parameter box.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    /// Points per axis of the uniform grid; empty for no grid.
    pub grid: Vec<usize>,
    /// Number of uniform random points.
    pub random: usize,
    pub seed: u64,
    pub margin: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            grid: Vec::new(),
            random: 0,
            seed: 0,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// Grid points (last axis fastest) followed by random points, all inside
/// the domain shrunk by `margin` of each interval on both sides.
///
/// A single grid entry is broadcast to every axis.
pub fn sample_points(domain: &[(f64, f64)], plan: &SamplePlan) -> Vec<Vec<f64>> {
    let m = domain.len();
    let shrunk: Vec<(f64, f64)> = domain
        .iter()
        .map(|&(lo, hi)| {
            let d = (hi - lo) * plan.margin;
            (lo + d, hi - d)
        })
        .collect();
    let mut points = Vec::new();
    if !plan.grid.is_empty() {
        let counts: Vec<usize> = if plan.grid.len() == 1 {
            vec![plan.grid[0]; m]
        } else {
            plan.grid.clone()
        };
        let total: usize = counts.iter().product();
        for flat in 0..total {
            let mut rem = flat;
            let mut x = vec![0.0; m];
            for axis in (0..m).rev() {
                let k = counts[axis];
                let idx = rem % k;
                rem /= k;
                let (lo, hi) = shrunk[axis];
                x[axis] = if k == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * idx as f64 / (k - 1) as f64
                };
            }
            points.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, 0));
    for _ in 0..plan.random {
        points.push(
            shrunk
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect(),
        );
    }
    points
}
