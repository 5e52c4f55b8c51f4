//! The real-data distribution: quadratic curves drawn between two fixed
//! boundary quadratics, plus least-squares fitting for evaluation.
//!
//! A curve is its y-values on the band's shared x grid; the x coordinates are
//! constant across all samples so they carry no information of their own.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// y = a*x^2 + b*x + c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quadratic {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidBand("non-finite quadratic coefficient".into()));
        }
        Ok(Quadratic { a, b, c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn coeffs(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// Pointwise evaluation of a quadratic on a grid.
pub fn evaluate_quadratic(q: &Quadratic, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| q.eval(x)).collect()
}

/// Fraction of the band-height evaluation tolerance used when judging
/// generated curves.
pub const EVAL_TOL_FRACTION: f64 = 0.02;

/// The region between two non-crossing boundary quadratics over a fixed,
/// strictly increasing x grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBand {
    lower: Quadratic,
    upper: Quadratic,
    grid: Vec<f64>,
}

impl CurveBand {
    pub fn new(lower: Quadratic, upper: Quadratic, grid: Vec<f64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::InvalidBand(format!(
                "grid needs at least 3 points, got {}",
                grid.len()
            )));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBand("non-finite grid point".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBand("grid must be strictly increasing".into()));
        }
        for &x in &grid {
            if upper.eval(x) < lower.eval(x) {
                return Err(Error::InvalidBand(format!(
                    "boundaries cross at x = {x}: lower {} > upper {}",
                    lower.eval(x),
                    upper.eval(x)
                )));
            }
        }
        Ok(CurveBand { lower, upper, grid })
    }

    /// Nested parabolas y = x^2 and y = x^2 + 1 over 16 points in [-1, 1].
    pub fn default_band() -> Self {
        let lower = Quadratic { a: 1.0, b: 0.0, c: 0.0 };
        let upper = Quadratic { a: 1.0, b: 0.0, c: 1.0 };
        CurveBand::new(lower, upper, linspace(-1.0, 1.0, 16)).expect("static band is valid")
    }

    pub fn lower(&self) -> &Quadratic {
        &self.lower
    }

    pub fn upper(&self) -> &Quadratic {
        &self.upper
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn lower_values(&self) -> Vec<f64> {
        evaluate_quadratic(&self.lower, &self.grid)
    }

    pub fn upper_values(&self) -> Vec<f64> {
        evaluate_quadratic(&self.upper, &self.grid)
    }

    /// Largest vertical gap between the boundaries on the grid.
    pub fn height(&self) -> f64 {
        self.grid
            .iter()
            .map(|&x| self.upper.eval(x) - self.lower.eval(x))
            .fold(0.0, f64::max)
    }

    /// Tolerance used when judging generated (approximate) curves.
    pub fn eval_tolerance(&self) -> f64 {
        EVAL_TOL_FRACTION * self.height()
    }

    /// The curve with coefficients `(1 - lambda) * lower + lambda * upper`,
    /// clamped pointwise into the band to absorb round-off at the edges.
    pub fn interpolate(&self, lambda: f64) -> CurveSample {
        let q = Quadratic {
            a: (1.0 - lambda) * self.lower.a + lambda * self.upper.a,
            b: (1.0 - lambda) * self.lower.b + lambda * self.upper.b,
            c: (1.0 - lambda) * self.lower.c + lambda * self.upper.c,
        };
        let y = self
            .grid
            .iter()
            .map(|&x| q.eval(x).clamp(self.lower.eval(x), self.upper.eval(x)))
            .collect();
        CurveSample { y }
    }
}

/// One curve as y-values aligned to a band's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub y: Vec<f64>,
}

impl CurveSample {
    pub fn new(y: Vec<f64>) -> Self {
        CurveSample { y }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Draw `count` real curves: lambda ~ Uniform(0,1) i.i.d. per sample, each
/// curve the convex interpolation of the boundary coefficients.
pub fn sample_real(band: &CurveBand, count: usize, rng: &mut impl Rng) -> Result<Vec<CurveSample>> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    Ok((0..count)
        .map(|_| band.interpolate(rng.gen::<f64>()))
        .collect())
}

/// Fraction of samples lying within `[lower - tol, upper + tol]` at every grid
/// point.
pub fn containment_rate(samples: &[CurveSample], band: &CurveBand, tol: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let lower = band.lower_values();
    let upper = band.upper_values();
    let contained = samples
        .iter()
        .filter(|s| {
            s.len() == band.grid_len()
                && s.y
                    .iter()
                    .zip(lower.iter().zip(&upper))
                    .all(|(&y, (&lo, &hi))| y >= lo - tol && y <= hi + tol)
        })
        .count();
    Ok(contained as f64 / samples.len() as f64)
}

/// Least-squares quadratic through `(grid[i], sample.y[i])` via the 3x3 normal
/// equations.
pub fn fit_quadratic(sample: &CurveSample, grid: &[f64]) -> Result<Quadratic> {
    if grid.len() < 3 || sample.len() != grid.len() {
        return Err(Error::DegenerateFit(format!(
            "need n >= 3 aligned points, got sample {} on grid {}",
            sample.len(),
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateFit("grid must be strictly increasing".into()));
    }

    // Normal equations A^T A beta = A^T y with A rows [x^2, x, 1].
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for (&x, &y) in grid.iter().zip(&sample.y) {
        let row = [x * x, x, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * y;
        }
    }
    let beta = solve3(ata, aty)
        .ok_or_else(|| Error::DegenerateFit("singular normal equations".into()))?;
    Quadratic::new(beta[0], beta[1], beta[2])
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).expect("finite")
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in row + 1..3 {
            s -= m[row][k] * out[k];
        }
        out[row] = s / m[row][row];
    }
    Some(out)
}

/// `n` equally spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least 2 points");
    let step = (end - start) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { end } else { start + i as f64 * step })
        .collect()
}

/// Write curves in the dump format: header
/// `x,y_lower,y_upper,y_sample_0,...,y_sample_{B-1}`, one row per grid point.
pub fn write_curve_csv(path: &Path, band: &CurveBand, samples: &[CurveSample]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(out, "x,y_lower,y_upper")?;
    for i in 0..samples.len() {
        write!(out, ",y_sample_{i}")?;
    }
    writeln!(out)?;
    let lower = band.lower_values();
    let upper = band.upper_values();
    for (i, &x) in band.grid().iter().enumerate() {
        write!(out, "{x},{},{}", lower[i], upper[i])?;
        for s in samples {
            write!(out, ",{}", s.y[i])?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn band() -> CurveBand {
        CurveBand::default_band()
    }

    #[test]
    fn evaluate_quadratic_basics() {
        let q = Quadratic::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(evaluate_quadratic(&q, &[2.0]), vec![4.0]);
        let constant = Quadratic::new(0.0, 0.0, 5.0).unwrap();
        assert_eq!(evaluate_quadratic(&constant, &[-3.0, 0.0, 7.5]), vec![5.0; 3]);
        let q = Quadratic::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(evaluate_quadratic(&q, &[-1.0]), vec![1.0]);
    }

    #[test]
    fn interpolation_endpoints_hit_the_boundaries() {
        let b = band();
        assert_eq!(b.interpolate(0.0).y, b.lower_values());
        assert_eq!(b.interpolate(1.0).y, b.upper_values());
    }

    #[test]
    fn interpolation_midpoint_of_offset_band() {
        let lower = Quadratic::new(1.0, 0.0, 0.0).unwrap();
        let upper = Quadratic::new(1.0, 0.0, 2.0).unwrap();
        let b = CurveBand::new(lower, upper, vec![-1.0, 0.0, 1.0]).unwrap();
        let mid = b.interpolate(0.5);
        assert_eq!(mid.y[1], 1.0); // x = 0 on curve (1, 0, 1)
    }

    #[test]
    fn containment_counts() {
        let b = band();
        let boundaries = vec![
            CurveSample::new(b.lower_values()),
            CurveSample::new(b.upper_values()),
        ];
        assert_eq!(containment_rate(&boundaries, &b, 0.0).unwrap(), 1.0);

        let tol = 0.01;
        let above = CurveSample::new(b.upper_values().iter().map(|y| y + 10.0 * tol).collect());
        assert_eq!(containment_rate(std::slice::from_ref(&above), &b, tol).unwrap(), 0.0);

        let mixed = vec![
            b.interpolate(0.2),
            b.interpolate(0.5),
            b.interpolate(0.9),
            above,
        ];
        assert_eq!(containment_rate(&mixed, &b, tol).unwrap(), 0.75);
    }

    #[test]
    fn containment_rejects_empty_input() {
        assert!(containment_rate(&[], &band(), 0.0).is_err());
    }

    #[test]
    fn samples_are_always_contained_and_seeded() {
        let b = band();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = sample_real(&b, 128, &mut rng).unwrap();
        assert_eq!(containment_rate(&samples, &b, 0.0).unwrap(), 1.0);

        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let again = sample_real(&b, 128, &mut rng2).unwrap();
        assert_eq!(samples, again);
    }

    #[test]
    fn zero_count_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_real(&band(), 0, &mut rng).is_err());
    }

    #[test]
    fn fit_recovers_exact_quadratics() {
        let grid = vec![-1.0, 0.0, 1.0];
        let q = Quadratic::new(1.0, 0.0, 0.0).unwrap();
        let s = CurveSample::new(evaluate_quadratic(&q, &grid));
        let fitted = fit_quadratic(&s, &grid).unwrap();
        assert!((fitted.a - 1.0).abs() < 1e-12);
        assert!(fitted.b.abs() < 1e-12);
        assert!(fitted.c.abs() < 1e-12);

        let flat = CurveSample::new(vec![3.0; 3]);
        let fitted = fit_quadratic(&flat, &grid).unwrap();
        assert!(fitted.a.abs() < 1e-12);
        assert!(fitted.b.abs() < 1e-12);
        assert!((fitted.c - 3.0).abs() < 1e-12);
    }

    // Independent oracle: Cramer's rule on the same normal equations.
    fn fit_by_cramer(sample: &CurveSample, grid: &[f64]) -> [f64; 3] {
        let mut m = [[0.0f64; 3]; 3];
        let mut r = [0.0f64; 3];
        for (&x, &y) in grid.iter().zip(&sample.y) {
            let row = [x * x, x, 1.0];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += row[i] * row[j];
                }
                r[i] += row[i] * y;
            }
        }
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&m);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let mut mk = m;
            for i in 0..3 {
                mk[i][k] = r[i];
            }
            out[k] = det(&mk) / d;
        }
        out
    }

    #[test]
    fn fit_matches_independent_solver_on_noisy_data() {
        let truth = Quadratic::new(2.0, -1.0, 0.5).unwrap();
        let grid = linspace(-1.0, 1.0, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy: Vec<f64> = grid
            .iter()
            .map(|&x| truth.eval(x) + 0.01 * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        let s = CurveSample::new(noisy);

        let fitted = fit_quadratic(&s, &grid).unwrap();
        let oracle = fit_by_cramer(&s, &grid);
        assert!((fitted.a - oracle[0]).abs() < 1e-9);
        assert!((fitted.b - oracle[1]).abs() < 1e-9);
        assert!((fitted.c - oracle[2]).abs() < 1e-9);

        assert!((fitted.a - truth.a).abs() < 0.05);
        assert!((fitted.b - truth.b).abs() < 0.05);
        assert!((fitted.c - truth.c).abs() < 0.05);
    }

    #[test]
    fn fit_rejects_degenerate_grid() {
        let s = CurveSample::new(vec![1.0, 2.0, 3.0]);
        assert!(fit_quadratic(&s, &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn lambda_recoverable_from_noiseless_samples() {
        let b = band();
        for &lambda in &[0.0, 0.25, 0.5123, 0.75, 1.0] {
            let s = b.interpolate(lambda);
            let fitted = fit_quadratic(&s, b.grid()).unwrap();
            // Project fitted coefficients onto the boundary segment.
            let lo = b.lower().coeffs();
            let hi = b.upper().coeffs();
            let diff: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| h - l).collect();
            let num: f64 = fitted
                .coeffs()
                .iter()
                .zip(&lo)
                .zip(&diff)
                .map(|((f, l), d)| (f - l) * d)
                .sum();
            let den: f64 = diff.iter().map(|d| d * d).sum();
            assert!((num / den - lambda).abs() < 1e-9);
        }
    }

    #[test]
    fn crossing_boundaries_are_rejected() {
        let lower = Quadratic::new(1.0, 0.0, 1.0).unwrap();
        let upper = Quadratic::new(1.0, 0.0, 0.0).unwrap();
        assert!(CurveBand::new(lower, upper, linspace(-1.0, 1.0, 8)).is_err());
    }

    proptest! {
        // Convexity keeps every interpolated curve inside any non-crossing band.
        #[test]
        fn interpolants_stay_contained(
            a in -2.0f64..2.0,
            b_coef in -1.0f64..1.0,
            c in -1.0f64..1.0,
            gap in 0.0f64..3.0,
            lambda in 0.0f64..1.0,
        ) {
            let lower = Quadratic { a, b: b_coef, c };
            let upper = Quadratic { a, b: b_coef, c: c + gap };
            let band = CurveBand::new(lower, upper, linspace(-1.0, 1.0, 9)).unwrap();
            let s = band.interpolate(lambda);
            prop_assert_eq!(containment_rate(&[s], &band, 0.0).unwrap(), 1.0);
        }
    }
}
