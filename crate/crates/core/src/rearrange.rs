//! Distribution functions, decreasing rearrangements, symmetric decreasing
//! rearrangements, and the exact reduction between radial shapes and
//! intervals in the measure variable `s = omega_n |x|^n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridFunction, GridGeometry};
use crate::shape::{norm, unit_ball_volume, Shape, ShapeError};

#[derive(Debug, Error)]
pub enum RearrangeError {
    #[error("invalid step function: {0}")]
    InvalidStep(String),
    #[error("empty cell set")]
    EmptyCellSet,
    #[error("cell index out of range")]
    CellOutOfRange,
    #[error("no admissible sector for interval")]
    NoAdmissibleSector,
    #[error("cube not inside the ball of radius {0}")]
    CubeOutsideBall(f64),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// A right-continuous step function on `(0, L)`, extended by zero beyond `L`.
/// Breakpoints are strictly increasing and start at 0; an empty function
/// (no pieces) is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction1D {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, RearrangeError> {
        if breakpoints.is_empty() {
            return Err(RearrangeError::InvalidStep("missing breakpoints".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(RearrangeError::InvalidStep("domain must start at 0".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(RearrangeError::InvalidStep(
                "breakpoint/value count mismatch".into(),
            ));
        }
        if breakpoints
            .iter()
            .chain(values.iter())
            .any(|v| !v.is_finite())
        {
            return Err(RearrangeError::InvalidStep("entries must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RearrangeError::InvalidStep(
                "breakpoints must strictly increase".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// The identically-zero function.
    pub fn zero() -> Self {
        Self {
            breakpoints: vec![0.0],
            values: Vec::new(),
        }
    }

    /// Pieces of equal width; piece `i` spans `[i w, (i+1) w)`.
    pub fn from_uniform(width: f64, values: Vec<f64>) -> Self {
        assert!(width > 0.0);
        let breakpoints = (0..=values.len()).map(|i| i as f64 * width).collect();
        Self {
            breakpoints,
            values,
        }
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Length of the supporting interval `(0, L)`.
    pub fn domain_length(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Right-continuous evaluation; zero beyond the last breakpoint and to
    /// the left of 0.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || self.values.is_empty() || t >= self.domain_length() {
            return 0.0;
        }
        // partition_point: first breakpoint strictly greater than t.
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx - 1]
    }

    /// Exact integral over `(a, b)`, using the zero extension outside the
    /// domain.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        if b <= a || self.values.is_empty() {
            return 0.0;
        }
        let lo = a.max(0.0);
        let hi = b.min(self.domain_length());
        if hi <= lo {
            return 0.0;
        }
        let first = self.breakpoints.partition_point(|&t| t <= lo) - 1;
        let mut acc = 0.0;
        for i in first..self.values.len() {
            let p_lo = self.breakpoints[i].max(lo);
            let p_hi = self.breakpoints[i + 1].min(hi);
            if p_hi <= p_lo {
                break;
            }
            acc += self.values[i] * (p_hi - p_lo);
        }
        acc
    }

    pub fn mean_over(&self, a: f64, b: f64) -> f64 {
        self.integral_over(a, b) / (b - a)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Merge adjacent pieces of equal value.
    pub fn compact(&self) -> Self {
        if self.values.is_empty() {
            return self.clone();
        }
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for i in 0..self.values.len() {
            if values.last() == Some(&self.values[i]) {
                *breakpoints.last_mut().unwrap() = self.breakpoints[i + 1];
            } else {
                values.push(self.values[i]);
                breakpoints.push(self.breakpoints[i + 1]);
            }
        }
        Self {
            breakpoints,
            values,
        }
    }

    /// Pointwise difference on the merged breakpoint set, extended by zero.
    pub fn sub(&self, other: &StepFunction1D) -> StepFunction1D {
        if self.values.is_empty() && other.values.is_empty() {
            return StepFunction1D::zero();
        }
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut values = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let t = w[0];
            values.push(self.value_at(t) - other.value_at(t));
        }
        StepFunction1D {
            breakpoints: cuts,
            values,
        }
    }

    /// L1 distance, on the merged breakpoints with zero extension.
    pub fn l1_distance(&self, other: &StepFunction1D) -> f64 {
        let d = self.sub(other);
        d.breakpoints
            .windows(2)
            .zip(&d.values)
            .map(|(w, v)| v.abs() * (w[1] - w[0]))
            .sum()
    }

    /// Serialize as `breakpoint,value` CSV rows; the final row carries the
    /// closing breakpoint with an empty value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("breakpoint,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.breakpoints[i], v));
        }
        out.push_str(&format!("{},\n", self.domain_length()));
        out
    }
}

/// The distribution function `mu_f(alpha) = |{ |f| > alpha }|` as a
/// right-continuous decreasing step function of `alpha`. Measures are
/// computed as `count * h^n` from exact cell counts, so two equimeasurable
/// inputs produce bit-identical results.
pub fn distribution(f: &GridFunction) -> StepFunction1D {
    let cell = f.geometry().cell_measure();
    let mut sorted: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distribution_from_sorted_counts(&sorted, cell)
}

/// Distribution function of a step function with uniform piece widths.
pub fn distribution_of_uniform_step(sf: &StepFunction1D, width: f64) -> StepFunction1D {
    let mut sorted: Vec<f64> = sf.values().iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distribution_from_sorted_counts(&sorted, width)
}

fn distribution_from_sorted_counts(sorted_abs: &[f64], unit: f64) -> StepFunction1D {
    // Distinct values ascending with the cell count strictly above each.
    let n = sorted_abs.len();
    let mut thresholds = Vec::new();
    let mut above = Vec::new(); // count of entries strictly above thresholds[i]
    let mut i = 0usize;
    while i < n {
        let v = sorted_abs[i];
        let mut j = i;
        while j < n && sorted_abs[j] == v {
            j += 1;
        }
        thresholds.push(v);
        above.push((n - j) as u64);
        i = j;
    }
    if thresholds.is_empty() || (thresholds.len() == 1 && thresholds[0] == 0.0) {
        return StepFunction1D::zero();
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    if thresholds[0] > 0.0 {
        breakpoints.push(0.0);
        values.push(n as u64 as f64 * unit);
    }
    for (k, &v) in thresholds.iter().enumerate() {
        if k + 1 == thresholds.len() {
            // mu vanishes at and beyond the maximum value.
            breakpoints.push(v);
        } else {
            breakpoints.push(v);
            values.push(above[k] as f64 * unit);
        }
    }
    StepFunction1D {
        breakpoints,
        values,
    }
}

/// The decreasing rearrangement `f*`: absolute cell values sorted in
/// decreasing order, one piece of width `h^n` per cell.
pub fn decreasing_rearrangement(f: &GridFunction) -> StepFunction1D {
    let mut sorted: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    StepFunction1D::from_uniform(f.geometry().cell_measure(), sorted)
}

/// Rearrangement of a uniform-width step function (used for `f** = f*`).
pub fn rearrange_uniform_step(sf: &StepFunction1D, width: f64) -> StepFunction1D {
    let mut sorted: Vec<f64> = sf.values().iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    StepFunction1D::from_uniform(width, sorted)
}

/// Both sides of the Hardy–Littlewood inequality
/// `int_A |f| <= int_0^{|A|} f*` for a set `A` of cells (linear indices).
pub fn hardy_littlewood_check(
    f: &GridFunction,
    cells: &[usize],
) -> Result<(f64, f64), RearrangeError> {
    if cells.is_empty() {
        return Err(RearrangeError::EmptyCellSet);
    }
    if cells.iter().any(|&c| c >= f.len()) {
        return Err(RearrangeError::CellOutOfRange);
    }
    let h_n = f.geometry().cell_measure();
    let lhs: f64 = cells.iter().map(|&c| f.values()[c].abs()).sum::<f64>() * h_n;
    let fstar = decreasing_rearrangement(f);
    let rhs = fstar.integral_over(0.0, cells.len() as f64 * h_n);
    Ok((lhs, rhs))
}

/// A radial function `x -> profile(omega_n |x|^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub profile: StepFunction1D,
    pub dim: usize,
}

impl RadialFunction {
    pub fn new(profile: StepFunction1D, dim: usize) -> Self {
        assert!(dim >= 1);
        Self { profile, dim }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let s = unit_ball_volume(self.dim) * norm(x).powi(self.dim as i32);
        self.profile.value_at(s)
    }

    /// Radius beyond which the function vanishes.
    pub fn support_radius(&self) -> f64 {
        (self.profile.domain_length() / unit_ball_volume(self.dim)).powf(1.0 / self.dim as f64)
    }
}

/// The symmetric decreasing rearrangement `Sf(x) = f*(omega_n |x|^n)`,
/// kept in exact radial form.
pub fn symmetrize(f: &GridFunction) -> RadialFunction {
    RadialFunction::new(decreasing_rearrangement(f), f.dim())
}

/// Output of [`rasterize_radial`]; `support_truncated` flags a domain box
/// that does not contain the support ball of the radial function.
#[derive(Debug, Clone)]
pub struct RasterizedRadial {
    pub grid: GridFunction,
    pub support_truncated: bool,
}

/// Sample a radial function onto a grid. Each cell value is the average of
/// the function over `k^n` midpoint-stratified sample points per cell.
pub fn rasterize_radial(
    rf: &RadialFunction,
    geom: &GridGeometry,
    supersample: usize,
) -> RasterizedRadial {
    assert!(supersample >= 1);
    assert_eq!(geom.dim, rf.dim);
    let n = geom.dim;
    let k = supersample;
    let h = geom.cell_size;
    let sub = h / k as f64;
    let total_sub: usize = k.pow(n as u32);
    let mut values = vec![0.0f64; geom.len()];
    let mut point = vec![0.0f64; n];
    let mut sub_idx = vec![0usize; n];
    for (lin, slot) in values.iter_mut().enumerate() {
        let idx = geom.multi_index(lin);
        let mut acc = 0.0;
        sub_idx.iter_mut().for_each(|s| *s = 0);
        for _ in 0..total_sub {
            for a in 0..n {
                point[a] = geom.origin[a] + idx[a] as f64 * h + (sub_idx[a] as f64 + 0.5) * sub;
            }
            acc += rf.eval(&point);
            // Odometer over sub-cells.
            for a in (0..n).rev() {
                sub_idx[a] += 1;
                if sub_idx[a] < k {
                    break;
                }
                sub_idx[a] = 0;
            }
        }
        *slot = acc / total_sub as f64;
    }
    let r0 = rf.support_radius();
    let support_truncated = (0..n).any(|a| {
        geom.origin[a] > -r0 + 1e-12 || geom.origin[a] + geom.extents[a] as f64 * h < r0 - 1e-12
    });
    let grid = GridFunction::new(geom.extents.clone(), h, geom.origin.clone(), values)
        .expect("rasterization produces a valid grid");
    RasterizedRadial {
        grid,
        support_truncated,
    }
}

/// An open interval `(lo, hi)` on the measure half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi);
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Map a centred ball or sector to the interval `I = (omega_n a^n, omega_n b^n)`
/// carrying its radial extent `(a, b)`. For any radial profile, mean and
/// oscillation over the shape equal mean and oscillation of the profile
/// over `I`.
pub fn radial_reduction(shape: &Shape) -> Result<Interval, RearrangeError> {
    let n = shape.dim();
    let (a, b) = shape.radial_extent()?;
    let omega = unit_ball_volume(n);
    Ok(Interval::new(
        omega * a.powi(n as i32),
        omega * b.powi(n as i32),
    ))
}

/// Inverse of [`radial_reduction`]: an interval with left endpoint 0 maps to
/// the centred ball of matching measure; otherwise to the sector
/// `A(R e_1, rho, arcsin(rho/R))` where `R` is the centre of the radial
/// extent `J` and `rho` its half-length.
pub fn shape_for_interval(interval: Interval, dim: usize) -> Result<Shape, RearrangeError> {
    let omega = unit_ball_volume(dim);
    let inv = 1.0 / dim as f64;
    let b = (interval.hi / omega).powf(inv);
    if interval.lo <= 0.0 {
        return Ok(Shape::ball(vec![0.0; dim], b)?);
    }
    let a = (interval.lo / omega).powf(inv);
    let big_r = 0.5 * (a + b);
    let rho = 0.5 * (b - a);
    if rho >= big_r {
        return Err(RearrangeError::NoAdmissibleSector);
    }
    let alpha = (rho / big_r).asin();
    let mut center = vec![0.0; dim];
    center[0] = big_r;
    Ok(Shape::sector(center, rho, alpha)?)
}

/// For a cube of diameter `d` centred at `x` with `|x| <= R - d/2`, the
/// interval produced by reducing the sector built around `B(x, d/2)`.
/// The interval satisfies `|I| <= n omega_n R^{n-1} d`.
pub fn local_interval_for_cube(
    center: &[f64],
    side: f64,
    big_r: f64,
) -> Result<Interval, RearrangeError> {
    let n = center.len();
    let d = side * (n as f64).sqrt();
    let cx = norm(center);
    if cx > big_r - d / 2.0 + 1e-12 {
        return Err(RearrangeError::CubeOutsideBall(big_r));
    }
    let r = d / 2.0;
    let omega = unit_ball_volume(n);
    let (j_lo, j_hi) = if cx < r {
        (0.0, cx + r)
    } else {
        (cx - r, cx + r)
    };
    let interval = Interval::new(omega * j_lo.powi(n as i32), omega * j_hi.powi(n as i32));
    debug_assert!(
        interval.len() <= n as f64 * omega * big_r.powi(n as i32 - 1) * d * (1.0 + 1e-12),
        "interval length bound violated"
    );
    Ok(interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_1d(values: Vec<f64>, h: f64) -> GridFunction {
        GridFunction::from_values(vec![values.len()], h, values).unwrap()
    }

    #[test]
    fn distribution_indicator() {
        // chi_A with |A| = 0.25 on a 4-cell grid of measure 1.
        let f = grid_1d(vec![1.0, 0.0, 0.0, 0.0], 0.25);
        let mu = distribution(&f);
        assert_eq!(mu.value_at(0.0), 0.25);
        assert_eq!(mu.value_at(0.5), 0.25);
        assert_eq!(mu.value_at(1.0), 0.0);
        assert_eq!(mu.value_at(3.0), 0.0);
    }

    #[test]
    fn distribution_zero() {
        let f = grid_1d(vec![0.0; 8], 0.125);
        let mu = distribution(&f);
        assert_eq!(mu, StepFunction1D::zero());
        assert_eq!(mu.value_at(0.0), 0.0);
    }

    #[test]
    fn distribution_multi_level() {
        let f = grid_1d(vec![3.0, 1.0, 1.0, 0.0], 0.25);
        let mu = distribution(&f);
        assert_eq!(mu.value_at(0.0), 0.75);
        assert_eq!(mu.value_at(0.999), 0.75);
        assert_eq!(mu.value_at(1.0), 0.25);
        assert_eq!(mu.value_at(2.5), 0.25);
        assert_eq!(mu.value_at(3.0), 0.0);
    }

    #[test]
    fn rearrangement_sorts() {
        let f = grid_1d(vec![3.0, 1.0, 1.0, 0.0], 0.25);
        let fs = decreasing_rearrangement(&f);
        assert_eq!(fs.values(), &[3.0, 1.0, 1.0, 0.0]);
        assert_eq!(fs.value_at(0.1), 3.0);
        assert_eq!(fs.value_at(0.3), 1.0);
        assert_eq!(fs.value_at(0.74), 1.0);
        assert_eq!(fs.value_at(0.8), 0.0);
    }

    #[test]
    fn rearrangement_constant_and_permutation() {
        let c = grid_1d(vec![-2.5; 6], 0.5);
        let fs = decreasing_rearrangement(&c);
        assert!(fs.values().iter().all(|&v| v == 2.5));

        let f = grid_1d(vec![0.4, 1.7, -0.3, 0.9], 1.0);
        let g = grid_1d(vec![-0.3, 0.9, 0.4, 1.7], 1.0);
        assert_eq!(decreasing_rearrangement(&f), decreasing_rearrangement(&g));
    }

    #[test]
    fn equimeasurability_bit_exact() {
        let f = grid_1d(vec![0.3, 0.3, 2.0, -1.0, 0.0, 5.5, 5.5, 1.25], 0.125);
        let fs = decreasing_rearrangement(&f);
        let d1 = distribution(&f);
        let d2 = distribution_of_uniform_step(&fs, f.geometry().cell_measure());
        assert_eq!(d1, d2);
        // Idempotence: f** = f*.
        let fss = rearrange_uniform_step(&fs, f.geometry().cell_measure());
        assert_eq!(fs, fss);
    }

    #[test]
    fn hardy_littlewood_extremal_and_small() {
        let f = grid_1d(vec![4.0, -3.0, 2.0, 1.0], 0.25);
        // A = support of the 2 largest |values| -> equality.
        let (lhs, rhs) = hardy_littlewood_check(&f, &[0, 1]).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
        // A = single smallest-|value| cell.
        let (lhs, rhs) = hardy_littlewood_check(&f, &[3]).unwrap();
        assert!(lhs <= rhs);
        assert_eq!(lhs, 0.25);
        assert_eq!(rhs, 1.0);
        assert!(hardy_littlewood_check(&f, &[]).is_err());
    }

    #[test]
    fn symmetrize_indicator_is_ball_indicator() {
        let f = grid_1d(vec![1.0, 0.0, 0.0, 1.0], 0.25);
        let sf = symmetrize(&f);
        // Support ball has measure 0.5: radius 0.25 in 1-D (omega_1 = 2).
        assert_eq!(sf.eval(&[0.2]), 1.0);
        assert_eq!(sf.eval(&[0.3]), 0.0);
        // Sf(x) = f*(2 |x|) in 1-D.
        assert_eq!(sf.eval(&[0.1]), sf.profile.value_at(0.2));
    }

    #[test]
    fn rasterize_constant_exact() {
        // The support ball (radius ~1.13) sticks out of the small box, so the
        // truncation flag trips, but every sampled cell still sees the
        // constant.
        let profile = StepFunction1D::from_uniform(4.0, vec![2.5]);
        let rf = RadialFunction::new(profile.clone(), 2);
        let geom = GridGeometry::new(vec![8, 8], 0.125, vec![-0.5, -0.5]).unwrap();
        let out = rasterize_radial(&rf, &geom, 3);
        assert!(out.grid.values().iter().all(|&v| v == 2.5));
        assert!(out.support_truncated);

        let wide = GridGeometry::new(vec![8, 8], 0.5, vec![-2.0, -2.0]).unwrap();
        let out = rasterize_radial(&RadialFunction::new(profile, 2), &wide, 3);
        assert!(!out.support_truncated);
    }

    #[test]
    fn rasterize_aligned_1d_indicator_exact() {
        // Indicator of the ball of radius 0.5 in 1-D, grid cells of width 0.25.
        let profile = StepFunction1D::from_uniform(1.0, vec![1.0]);
        let rf = RadialFunction::new(profile, 1);
        let geom = GridGeometry::new(vec![8], 0.25, vec![-1.0]).unwrap();
        let out = rasterize_radial(&rf, &geom, 4);
        let expected = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        assert_eq!(out.grid.values(), &expected);
    }

    #[test]
    fn rasterize_unit_ball_mass_close_to_pi() {
        let profile = StepFunction1D::from_uniform(PI, vec![1.0]);
        let rf = RadialFunction::new(profile, 2);
        let geom = GridGeometry::new(vec![64, 64], 2.0 / 64.0, vec![-1.0, -1.0]).unwrap();
        let out = rasterize_radial(&rf, &geom, 4);
        let mass: f64 = out.grid.values().iter().sum::<f64>() * out.grid.geometry().cell_measure();
        assert!((mass - PI).abs() / PI < 0.02, "mass {mass} vs pi");
    }

    #[test]
    fn radial_reduction_examples() {
        let b = Shape::ball(vec![0.0, 0.0], 0.7).unwrap();
        let i = radial_reduction(&b).unwrap();
        assert_eq!(i.lo, 0.0);
        assert!((i.hi - PI * 0.49).abs() < 1e-15);

        let a = Shape::sector(vec![1.0, 0.0], 0.5, PI / 6.0).unwrap();
        let i = radial_reduction(&a).unwrap();
        assert!((i.lo - PI / 4.0).abs() < 1e-12);
        assert!((i.hi - 9.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn shape_for_interval_round_trip() {
        let interval = Interval::new(1.0, 3.0);
        let shape = shape_for_interval(interval, 2).unwrap();
        let Shape::Sector { x, rho, alpha } = &shape else {
            panic!()
        };
        let a = (1.0f64 / PI).sqrt();
        let b = (3.0f64 / PI).sqrt();
        assert!((x[0] - 0.5 * (a + b)).abs() < 1e-12);
        assert!((rho - 0.5 * (b - a)).abs() < 1e-12);
        assert!((alpha - (rho / x[0]).asin()).abs() < 1e-12);
        assert!(shape.in_a_basis());
        let back = radial_reduction(&shape).unwrap();
        assert!((back.lo - 1.0).abs() < 1e-12 && (back.hi - 3.0).abs() < 1e-12);

        let ball = shape_for_interval(Interval::new(0.0, 2.0), 3).unwrap();
        assert!(matches!(ball, Shape::Ball { .. }));
    }

    #[test]
    fn local_interval_examples() {
        // n = 1, Q = (0.4, 0.6), R = 1: I = (0.8, 1.2), |I| = 0.4 = 1*2*1^0*0.2.
        let i = local_interval_for_cube(&[0.5], 0.2, 1.0).unwrap();
        assert!((i.lo - 0.8).abs() < 1e-12 && (i.hi - 1.2).abs() < 1e-12);
        assert!((i.len() - 0.4).abs() < 1e-12);

        // Cube centred at the origin starts at 0 (ball branch).
        let i = local_interval_for_cube(&[0.0, 0.0], 0.1, 1.0).unwrap();
        assert_eq!(i.lo, 0.0);

        // n = 2, diameter 0.2 at |x| = 0.5, R = 1: |I| <= 2 pi * 0.2.
        let side = 0.2 / 2f64.sqrt();
        let i = local_interval_for_cube(&[0.5, 0.0], side, 1.0).unwrap();
        assert!(i.len() <= 2.0 * PI * 0.2 + 1e-12);

        assert!(local_interval_for_cube(&[0.95, 0.0], 0.2, 1.0).is_err());
    }

    #[test]
    fn l1_contraction_of_rearrangement() {
        let f1 = grid_1d(vec![0.2, 1.5, -0.7, 3.0, 0.0, 0.4], 0.5);
        let f2 = grid_1d(vec![1.0, -0.5, 0.3, 2.0, 1.1, 0.0], 0.5);
        let lhs = decreasing_rearrangement(&f1).l1_distance(&decreasing_rearrangement(&f2));
        let h = 0.5;
        let rhs: f64 = f1
            .values()
            .iter()
            .zip(f2.values())
            .map(|(a, b)| (a.abs() - b.abs()).abs() * h)
            .sum();
        assert!(lhs <= rhs + 1e-12);
    }
}
