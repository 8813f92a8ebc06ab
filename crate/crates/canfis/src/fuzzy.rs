//! Generalized bell membership functions over a two-input grid partition,
//! rule firing strengths, and their normalization.
//!
//! Membership is `mu(x) = 1 / (1 + |(x - c)/a|^(2b))` with width `a > 0`,
//! slope exponent `b > 0` and center `c`. Rules are the full grid product:
//! one membership function per input, product T-norm, `n_mf^2` rules.

use crate::error::{CanfisError, Result};

/// Firing-strength sums below this are treated as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// Half-window around the center inside which all bell partials are taken as 0.
/// The slope partial involves `ln|x - c|` there; the true limit of every
/// partial at the symmetric maximum is 0.
pub const CENTER_GUARD: f64 = 1e-12;

/// One generalized bell membership function.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BellMf {
    /// Width `a`, in input units. Must be positive.
    pub width: f64,
    /// Slope exponent `b`, dimensionless. Must be positive.
    pub slope: f64,
    /// Center `c`, in input units. Membership is exactly 1 there.
    pub center: f64,
}

/// Partial derivatives of a bell membership degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellGrad {
    pub d_width: f64,
    pub d_slope: f64,
    pub d_center: f64,
    pub d_input: f64,
}

impl BellMf {
    /// Builds a bell MF, rejecting non-finite values and non-positive
    /// width or slope.
    pub fn new(width: f64, slope: f64, center: f64) -> Result<Self> {
        if !(width.is_finite() && slope.is_finite() && center.is_finite()) {
            return Err(CanfisError::ParameterDomain(format!(
                "bell MF parameters must be finite (a={width}, b={slope}, c={center})"
            )));
        }
        if width <= 0.0 || slope <= 0.0 {
            return Err(CanfisError::ParameterDomain(format!(
                "bell MF width and slope must be positive (a={width}, b={slope})"
            )));
        }
        Ok(Self {
            width,
            slope,
            center,
        })
    }

    /// Membership degree at `x`, in `(0, 1]` with `eval(center) == 1`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = ((x - self.center) / self.width).abs();
        1.0 / (1.0 + t.powf(2.0 * self.slope))
    }

    /// Analytic partials of the membership degree with respect to width,
    /// slope, center and the input. Inside `CENTER_GUARD` of the center all
    /// four are 0.
    pub fn grad(&self, x: f64) -> BellGrad {
        let dx = x - self.center;
        if dx.abs() < CENTER_GUARD {
            return BellGrad {
                d_width: 0.0,
                d_slope: 0.0,
                d_center: 0.0,
                d_input: 0.0,
            };
        }
        let t = (dx / self.width).abs();
        let u = t.powf(2.0 * self.slope);
        let mu = 1.0 / (1.0 + u);
        let mu2 = mu * mu;
        // d(mu)/du = -mu^2; du/dx = 2b*u/(x-c); du/da = -2b*u/a; du/db = 2*ln(t)*u.
        let common = 2.0 * self.slope * u * mu2;
        BellGrad {
            d_width: common / self.width,
            d_slope: -2.0 * u * t.ln() * mu2,
            d_center: common / dx,
            d_input: -common / dx,
        }
    }
}

/// An ordered family of bell MFs per input: the grid partition.
///
/// Both inputs carry the same number of MFs; within one input the centers
/// are strictly increasing.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FuzzyGrid {
    inputs: [Vec<BellMf>; 2],
}

impl FuzzyGrid {
    pub fn new(first: Vec<BellMf>, second: Vec<BellMf>) -> Result<Self> {
        if first.is_empty() || first.len() != second.len() {
            return Err(CanfisError::Config(format!(
                "both inputs need the same positive MF count, got {} and {}",
                first.len(),
                second.len()
            )));
        }
        for mfs in [&first, &second] {
            for pair in mfs.windows(2) {
                if pair[1].center <= pair[0].center {
                    return Err(CanfisError::Config(format!(
                        "MF centers must be strictly increasing, got {} then {}",
                        pair[0].center, pair[1].center
                    )));
                }
            }
        }
        Ok(Self {
            inputs: [first, second],
        })
    }

    /// Builds a grid without the center-ordering check. Used when the MFs
    /// come from a raw optimizer parameter vector, where ordering is not
    /// maintained.
    pub(crate) fn from_raw(first: Vec<BellMf>, second: Vec<BellMf>) -> Self {
        Self {
            inputs: [first, second],
        }
    }

    /// MFs per input.
    pub fn n_mf(&self) -> usize {
        self.inputs[0].len()
    }

    /// Rule count of the grid partition, `n_mf^2`.
    pub fn n_rules(&self) -> usize {
        self.n_mf() * self.n_mf()
    }

    pub fn mfs(&self, input: usize) -> &[BellMf] {
        &self.inputs[input]
    }

    pub(crate) fn mfs_mut(&mut self, input: usize) -> &mut [BellMf] {
        &mut self.inputs[input]
    }

    /// Membership degrees of both inputs against their MF families.
    pub fn memberships(&self, x: f64, y: f64) -> [Vec<f64>; 2] {
        [
            self.inputs[0].iter().map(|mf| mf.eval(x)).collect(),
            self.inputs[1].iter().map(|mf| mf.eval(y)).collect(),
        ]
    }

    /// Raw firing strengths over the grid, product T-norm.
    ///
    /// Rule `k = i * n_mf + j` pairs MF `i` of the first input with MF `j`
    /// of the second (row-major); this ordering is part of the contract
    /// since reports index rules by it.
    pub fn fire_raw(&self, x: f64, y: f64) -> Vec<f64> {
        let [mu_x, mu_y] = self.memberships(x, y);
        let mut raw = Vec::with_capacity(self.n_rules());
        for &a in &mu_x {
            for &b in &mu_y {
                raw.push(a * b);
            }
        }
        raw
    }

    /// Raw and normalized firing strengths at one input point.
    pub fn fire(&self, x: f64, y: f64) -> FiringVector {
        FiringVector::from_raw(self.fire_raw(x, y))
    }
}

/// Rule firing strengths: raw products and their normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringVector {
    /// Raw firing strengths in `[0, 1]`, row-major over MF indices.
    pub raw: Vec<f64>,
    /// Raw strengths divided by their sum; sums to 1 unless degenerate.
    pub normalized: Vec<f64>,
    /// Set when the raw sum fell below [`DEGENERACY_EPS`] and the
    /// normalized weights were replaced by the uniform distribution.
    pub degenerate: bool,
}

impl FiringVector {
    /// Normalizes raw strengths to sum to 1. A raw sum below
    /// [`DEGENERACY_EPS`] yields uniform weights plus the degeneracy flag
    /// instead of an error, so a training epoch never aborts on a dead
    /// input point.
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let (normalized, degenerate) = normalize_firings(&raw);
        Self {
            raw,
            normalized,
            degenerate,
        }
    }
}

/// Divides each firing strength by the total. Returns the normalized
/// weights and whether the degenerate fallback (uniform weights) was taken.
pub fn normalize_firings(raw: &[f64]) -> (Vec<f64>, bool) {
    let total: f64 = raw.iter().sum();
    if total < DEGENERACY_EPS {
        let uniform = 1.0 / raw.len() as f64;
        (vec![uniform; raw.len()], true)
    } else {
        (raw.iter().map(|w| w / total).collect(), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_is_one_at_center() {
        let mf = BellMf::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(mf.eval(0.0), 1.0);
    }

    #[test]
    fn eval_unit_distance_with_slope_two() {
        let mf = BellMf::new(1.0, 2.0, 0.0).unwrap();
        assert_eq!(mf.eval(1.0), 0.5);
    }

    #[test]
    fn eval_hand_computed_point() {
        // 1 / (1 + 2^4) = 1/17.
        let mf = BellMf::new(1.0, 2.0, 0.0).unwrap();
        assert!((mf.eval(2.0) - 1.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn eval_is_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let mf = BellMf::new(
                rng.random_range(0.1..2.0),
                rng.random_range(0.5..4.0),
                rng.random_range(-1.0..2.0),
            )
            .unwrap();
            let d: f64 = rng.random_range(0.0..3.0);
            let left = mf.eval(mf.center - d);
            let right = mf.eval(mf.center + d);
            assert!((left - right).abs() < 1e-12, "asymmetric at d={d}");
            assert!(left > 0.0 && left <= 1.0);
            // Strictly below 1 away from the center; very small d can
            // underflow |d/a|^(2b) to zero in f64, so keep clear of it.
            if d > 0.05 {
                assert!(left < 1.0);
            }
        }
    }

    #[test]
    fn eval_strictly_decreasing_in_distance() {
        let mf = BellMf::new(0.7, 1.5, 0.3).unwrap();
        let mut prev = mf.eval(0.3);
        for step in 1..50 {
            let v = mf.eval(0.3 + step as f64 * 0.05);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn new_rejects_bad_parameters() {
        assert!(BellMf::new(0.0, 1.0, 0.0).is_err());
        assert!(BellMf::new(-1.0, 1.0, 0.0).is_err());
        assert!(BellMf::new(1.0, 0.0, 0.0).is_err());
        assert!(BellMf::new(1.0, f64::NAN, 0.0).is_err());
        assert!(BellMf::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn grad_zero_at_center() {
        let mf = BellMf::new(1.0, 1.0, 0.0).unwrap();
        let g = mf.grad(0.0);
        assert_eq!(
            (g.d_width, g.d_slope, g.d_center, g.d_input),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn grad_input_partial_hand_computed() {
        // mu = 1/(1+x^2), mu' = -2x/(1+x^2)^2 = -0.5 at x = 1.
        let mf = BellMf::new(1.0, 1.0, 0.0).unwrap();
        let g = mf.grad(1.0);
        assert!((g.d_input + 0.5).abs() < 1e-12);
    }

    #[test]
    fn grad_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let step = 1e-6;
        let mut checked = 0;
        while checked < 1000 {
            let a: f64 = rng.random_range(0.1..2.0);
            let b: f64 = rng.random_range(0.5..4.0);
            let c: f64 = rng.random_range(-1.0..2.0);
            let x: f64 = rng.random_range(-1.0..2.0);
            if (x - c).abs() < 1e-8 {
                continue;
            }
            let mf = BellMf::new(a, b, c).unwrap();
            let g = mf.grad(x);
            let numeric = [
                (BellMf { width: a + step, ..mf }.eval(x)
                    - BellMf { width: a - step, ..mf }.eval(x))
                    / (2.0 * step),
                (BellMf { slope: b + step, ..mf }.eval(x)
                    - BellMf { slope: b - step, ..mf }.eval(x))
                    / (2.0 * step),
                (BellMf { center: c + step, ..mf }.eval(x)
                    - BellMf { center: c - step, ..mf }.eval(x))
                    / (2.0 * step),
                (mf.eval(x + step) - mf.eval(x - step)) / (2.0 * step),
            ];
            let analytic = [g.d_width, g.d_slope, g.d_center, g.d_input];
            for (an, num) in analytic.iter().zip(&numeric) {
                let scale = an.abs().max(num.abs());
                if scale < 1e-10 {
                    continue;
                }
                // Central differences at step 1e-6 carry ~1e-10 absolute
                // roundoff, so tiny partials get an absolute floor.
                assert!(
                    (an - num).abs() <= 1e-9 + 1e-5 * scale,
                    "partial mismatch: analytic={an}, numeric={num} (a={a}, b={b}, c={c}, x={x})"
                );
            }
            checked += 1;
        }
    }

    fn grid2() -> FuzzyGrid {
        FuzzyGrid::new(
            vec![
                BellMf::new(0.5, 2.0, 0.0).unwrap(),
                BellMf::new(0.5, 2.0, 1.0).unwrap(),
            ],
            vec![
                BellMf::new(0.5, 2.0, 0.0).unwrap(),
                BellMf::new(0.5, 2.0, 1.0).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn grid_rejects_mismatched_or_unsorted_mfs() {
        let a = BellMf::new(0.5, 2.0, 0.0).unwrap();
        let b = BellMf::new(0.5, 2.0, 1.0).unwrap();
        assert!(FuzzyGrid::new(vec![a], vec![a, b]).is_err());
        assert!(FuzzyGrid::new(vec![], vec![]).is_err());
        assert!(FuzzyGrid::new(vec![b, a], vec![a, b]).is_err());
    }

    #[test]
    fn single_rule_grid_fires_with_membership_product() {
        let grid = FuzzyGrid::new(
            vec![BellMf::new(0.5, 2.0, 0.5).unwrap()],
            vec![BellMf::new(0.5, 2.0, 0.5).unwrap()],
        )
        .unwrap();
        let raw = grid.fire_raw(0.5, 0.5);
        assert_eq!(raw, vec![1.0]);
        let [mx, my] = grid.memberships(0.2, 0.9);
        assert!((grid.fire_raw(0.2, 0.9)[0] - mx[0] * my[0]).abs() < 1e-15);
    }

    #[test]
    fn firing_is_row_major_product() {
        // mu1(x)=0.8, mu2(x)=0.2, mu1(y)=0.6, mu2(y)=0.4 -> [0.48, 0.32, 0.12, 0.08].
        let grid = grid2();
        let [mx, my] = grid.memberships(0.31, 0.43);
        let raw = grid.fire_raw(0.31, 0.43);
        let expect = [mx[0] * my[0], mx[0] * my[1], mx[1] * my[0], mx[1] * my[1]];
        for (got, want) in raw.iter().zip(&expect) {
            assert!((got - want).abs() < 1e-15);
        }
        // The exact enumerated case from known membership values.
        let (m1x, m2x, m1y, m2y) = (0.8f64, 0.2, 0.6, 0.4);
        let enumerated = [m1x * m1y, m1x * m2y, m2x * m1y, m2x * m2y];
        for (got, want) in enumerated.iter().zip(&[0.48, 0.32, 0.12, 0.08]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_simple_cases() {
        assert_eq!(
            normalize_firings(&[1.0, 0.0, 0.0, 0.0]).0,
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            normalize_firings(&[0.2, 0.2, 0.2, 0.2]).0,
            vec![0.25, 0.25, 0.25, 0.25]
        );
        assert_eq!(normalize_firings(&[3.0, 1.0]).0, vec![0.75, 0.25]);
    }

    #[test]
    fn normalize_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let raw: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..1.0)).collect();
            let (normalized, degenerate) = normalize_firings(&raw);
            if degenerate {
                continue;
            }
            let sum: f64 = normalized.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_sum_yields_uniform_and_flag() {
        let (normalized, degenerate) = normalize_firings(&[0.0, 0.0, 0.0, 0.0]);
        assert!(degenerate);
        assert_eq!(normalized, vec![0.25; 4]);
        let fv = FiringVector::from_raw(vec![1e-13, 1e-14]);
        assert!(fv.degenerate);
        assert_eq!(fv.normalized, vec![0.5, 0.5]);
    }
}
