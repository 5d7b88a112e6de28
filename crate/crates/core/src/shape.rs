//! Shapes (cell-aligned boxes, balls, annular sectors), enumerable bases over
//! a grid, and the explicit containment constructions behind the basis
//! equivalences cubes ↔ balls and balls ↔ sectors.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridGeometry;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("not cell-enumerable")]
    NotCellEnumerable,
    #[error("not a cube")]
    NotACube,
    #[error("not in basis A")]
    NotInBasisA,
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("dimension mismatch")]
    DimensionMismatch,
}

/// Volume of the unit ball in `R^n`, `pi^{n/2} / Gamma(n/2 + 1)`, with the
/// half-integer Gamma values evaluated in closed form.
pub fn unit_ball_volume(n: usize) -> f64 {
    assert!(n >= 1);
    if n.is_multiple_of(2) {
        let k = n / 2;
        let mut fact = 1.0;
        for i in 1..=k {
            fact *= i as f64;
        }
        PI.powi(k as i32) / fact
    } else {
        // Gamma(k + 1/2) = sqrt(pi) (2k)! / (4^k k!) with k = (n+1)/2.
        let k = n.div_ceil(2);
        let mut num = 1.0; // (2k)!
        for i in 1..=2 * k {
            num *= i as f64;
        }
        let mut den = 1.0; // k!
        for i in 1..=k {
            den *= i as f64;
        }
        let gamma = PI.sqrt() * num / (4f64.powi(k as i32) * den);
        PI.powf(n as f64 / 2.0) / gamma
    }
}

/// Fraction of the unit sphere within angle `alpha` of a pole.
/// Closed forms for n <= 3; for larger n a 1-D quadrature of sin^{n-2}
/// with relative error below 1e-9.
pub fn cap_fraction(n: usize, alpha: f64) -> f64 {
    assert!(n >= 1);
    assert!(alpha > 0.0 && alpha <= PI / 2.0 + 1e-12);
    match n {
        1 => 0.5,
        2 => alpha / PI,
        3 => (1.0 - alpha.cos()) / 2.0,
        _ => {
            let k = (n - 2) as i32;
            let integrand = |t: f64| t.sin().powi(k);
            let num = adaptive_simpson(&integrand, 0.0, alpha, 1e-13);
            let den = adaptive_simpson(&integrand, 0.0, PI, 1e-13);
            num / den
        }
    }
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// A geometric region over which oscillation is measured.
///
/// Boxes carry real coordinates; boxes produced by basis enumeration are
/// cell-aligned on their grid, but endpoint-refined boxes and rising-sun
/// intervals are not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    #[serde(rename = "box")]
    Box { lo: Vec<f64>, hi: Vec<f64> },
    #[serde(rename = "ball")]
    Ball { x: Vec<f64>, r: f64 },
    /// The annular sector `A(x, rho, alpha)`: points with radius within
    /// `rho` of `|x|` and angle at most `alpha` from the direction of `x`.
    #[serde(rename = "sector")]
    Sector { x: Vec<f64>, rho: f64, alpha: f64 },
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Shape {
    pub fn ball(x: Vec<f64>, r: f64) -> Result<Self, ShapeError> {
        if !(r > 0.0 && r.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(ShapeError::InvalidShape(
                "ball needs finite centre and r > 0".into(),
            ));
        }
        Ok(Shape::Ball { x, r })
    }

    pub fn sector(x: Vec<f64>, rho: f64, alpha: f64) -> Result<Self, ShapeError> {
        let cx = norm(&x);
        if cx == 0.0 {
            return Err(ShapeError::InvalidShape(
                "sector centre must be nonzero".into(),
            ));
        }
        if !(rho > 0.0 && rho <= cx * (1.0 + 1e-12)) {
            return Err(ShapeError::InvalidShape(
                "sector needs 0 < rho <= |x|".into(),
            ));
        }
        if !(alpha > 0.0 && alpha <= PI / 2.0 + 1e-12) {
            return Err(ShapeError::InvalidShape(
                "sector needs 0 < alpha <= pi/2".into(),
            ));
        }
        Ok(Shape::Sector { x, rho, alpha })
    }

    /// Axis-aligned cube with the given centre and side length.
    pub fn cube(center: &[f64], side: f64) -> Self {
        let lo = center.iter().map(|c| c - side / 2.0).collect();
        let hi = center.iter().map(|c| c + side / 2.0).collect();
        Shape::Box { lo, hi }
    }

    /// Real-coordinate box of the half-open cell-index box `[lo, hi)`.
    pub fn from_cell_box(geom: &GridGeometry, lo: &[usize], hi: &[usize]) -> Self {
        Shape::Box {
            lo: geom.corner(lo),
            hi: geom.corner(hi),
        }
    }

    /// Recover cell indices from a box whose endpoints sit on cell boundaries
    /// of `geom` (within 1e-9 of a cell). Returns `None` otherwise.
    pub fn to_cell_box(&self, geom: &GridGeometry) -> Option<(Vec<usize>, Vec<usize>)> {
        let Shape::Box { lo, hi } = self else {
            return None;
        };
        if lo.len() != geom.dim {
            return None;
        }
        let snap = |x: f64, k: usize| -> Option<usize> {
            let u = (x - geom.origin[k]) / geom.cell_size;
            let r = u.round();
            if (u - r).abs() <= 1e-9 && r >= 0.0 && r <= geom.extents[k] as f64 {
                Some(r as usize)
            } else {
                None
            }
        };
        let mut lo_idx = Vec::with_capacity(geom.dim);
        let mut hi_idx = Vec::with_capacity(geom.dim);
        for k in 0..geom.dim {
            lo_idx.push(snap(lo[k], k)?);
            hi_idx.push(snap(hi[k], k)?);
        }
        Some((lo_idx, hi_idx))
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { x, .. } | Shape::Sector { x, .. } => x.len(),
        }
    }

    /// Lebesgue measure. Sector measure is
    /// `sigma_n(alpha) * omega_n * ((|x|+rho)^n - (|x|-rho)^n)`.
    pub fn measure(&self) -> f64 {
        match self {
            Shape::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Shape::Ball { x, r } => unit_ball_volume(x.len()) * r.powi(x.len() as i32),
            Shape::Sector { x, rho, alpha } => {
                let n = x.len();
                let cx = norm(x);
                cap_fraction(n, *alpha)
                    * unit_ball_volume(n)
                    * ((cx + rho).powi(n as i32) - (cx - rho).powi(n as i32))
            }
        }
    }

    /// Pointwise membership. Boxes are half-open, balls and sectors open.
    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => y
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| *v >= *a && *v < *b),
            Shape::Ball { x, r } => {
                let d2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 < r * r
            }
            Shape::Sector { x, rho, alpha } => {
                let cx = norm(x);
                let ny = norm(y);
                if ny <= cx - rho || ny >= cx + rho {
                    return false;
                }
                dot(y, x) > cx * ny * alpha.cos()
            }
        }
    }

    /// Membership in the basis `A` of centred balls and sectors with
    /// `rho = |x| sin(alpha)`.
    pub fn in_a_basis(&self) -> bool {
        match self {
            Shape::Ball { x, .. } => norm(x) == 0.0,
            Shape::Sector { x, rho, alpha } => {
                let target = norm(x) * alpha.sin();
                (rho - target).abs() <= 1e-9 * target.max(1.0)
            }
            Shape::Box { .. } => false,
        }
    }

    /// Radial extent `(inf |y|, sup |y|)` for balls and sectors.
    pub fn radial_extent(&self) -> Result<(f64, f64), ShapeError> {
        match self {
            Shape::Ball { x, r } => {
                if norm(x) != 0.0 {
                    return Err(ShapeError::NotInBasisA);
                }
                Ok((0.0, *r))
            }
            Shape::Sector { x, rho, .. } => {
                let cx = norm(x);
                Ok((cx - rho, cx + rho))
            }
            Shape::Box { .. } => Err(ShapeError::NotInBasisA),
        }
    }

    /// Sample a point uniformly from the shape. Boxes and balls only
    /// (sampling is used to stress containment witnesses, whose outer
    /// shapes are always boxes or balls).
    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Shape::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| rng.random_range(*a..*b))
                .collect(),
            Shape::Ball { x, r } => {
                // Direction from Gaussian samples, radius from U^{1/n}.
                let n = x.len();
                loop {
                    let g: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
                    let len = norm(&g);
                    if len < 1e-12 {
                        continue;
                    }
                    let u: f64 = rng.random_range(0.0..1.0f64);
                    let rad = r * u.powf(1.0 / n as f64);
                    return g
                        .iter()
                        .zip(x)
                        .map(|(gi, xi)| xi + rad * gi / len)
                        .collect();
                }
            }
            Shape::Sector { .. } => unreachable!("sectors are never sampled directly"),
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Marsaglia polar method.
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// `sector_measure` from the module contract; accepts sectors and balls.
pub fn sector_measure(shape: &Shape) -> Result<f64, ShapeError> {
    match shape {
        Shape::Ball { .. } | Shape::Sector { .. } => Ok(shape.measure()),
        Shape::Box { .. } => Err(ShapeError::InvalidShape("expected sector or ball".into())),
    }
}

/// A half-open cell-index box `[lo, hi)`.
pub type CellBox = (Vec<usize>, Vec<usize>);

/// Shape families enumerable (or not) over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BasisFamily {
    /// All axis-parallel cubes, side 1..min extent in cells.
    QCubes,
    /// All axis-parallel rectangles.
    RRectangles,
    /// Wik's false cubes: every cube, plus rectangles with sides `2k` on the
    /// leading `m` axes and `k` elsewhere, `1 <= m < n`.
    WFalseCubes,
    /// Euclidean balls; analytic only, not cell-enumerable.
    BBalls,
    /// Centred balls and sectors with `rho = |x| sin(alpha)`; analytic only.
    ASectors,
    /// An explicit list of cell-index boxes.
    Custom(Vec<CellBox>),
}

/// An enumerable family of shapes over a grid, with optional bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub family: BasisFamily,
    /// Upper bound on any side length, in cells.
    pub max_side: Option<usize>,
    /// Placement stride in cells (1 = every placement).
    pub stride: usize,
    /// For `WFalseCubes`: also enumerate the axis-permuted superfamily where
    /// the long sides may sit on any `m` axes rather than the leading ones.
    pub permuted_axes: bool,
}

impl BasisDescriptor {
    pub fn new(family: BasisFamily) -> Self {
        Self {
            family,
            max_side: None,
            stride: 1,
            permuted_axes: false,
        }
    }

    pub fn cubes() -> Self {
        Self::new(BasisFamily::QCubes)
    }

    pub fn rectangles() -> Self {
        Self::new(BasisFamily::RRectangles)
    }

    pub fn false_cubes() -> Self {
        Self::new(BasisFamily::WFalseCubes)
    }

    pub fn with_max_side(mut self, max_side: usize) -> Self {
        self.max_side = Some(max_side);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn with_permuted_axes(mut self, on: bool) -> Self {
        self.permuted_axes = on;
        self
    }

    /// The side-length classes of the family on a grid with `extents`.
    /// Placements of one class all share the same measure.
    pub fn classes(&self, extents: &[usize]) -> Result<Vec<BoxClass>, ShapeError> {
        let n = extents.len();
        let cap = |s: usize| self.max_side.map_or(s, |m| s.min(m));
        let mut classes = Vec::new();
        match &self.family {
            BasisFamily::QCubes => {
                let smax = cap(*extents.iter().min().unwrap());
                for s in 1..=smax {
                    classes.push(BoxClass {
                        sides: vec![s; n],
                        kind: ClassKind::Cube,
                    });
                }
            }
            BasisFamily::RRectangles => {
                let mut sides = vec![1usize; n];
                loop {
                    classes.push(BoxClass {
                        sides: sides.clone(),
                        kind: ClassKind::Rectangle,
                    });
                    // Odometer over side tuples.
                    let mut k = n;
                    loop {
                        if k == 0 {
                            return Ok(classes);
                        }
                        k -= 1;
                        if sides[k] < cap(extents[k]) {
                            sides[k] += 1;
                            for s in sides.iter_mut().skip(k + 1) {
                                *s = 1;
                            }
                            break;
                        }
                    }
                }
            }
            BasisFamily::WFalseCubes => {
                let smax = cap(*extents.iter().min().unwrap());
                for s in 1..=smax {
                    classes.push(BoxClass {
                        sides: vec![s; n],
                        kind: ClassKind::Cube,
                    });
                }
                let long_axis_sets: Vec<Vec<usize>> = if self.permuted_axes {
                    (1..n).flat_map(|m| axis_subsets(n, m)).collect()
                } else {
                    (1..n).map(|m| (0..m).collect()).collect()
                };
                for axes in long_axis_sets {
                    let mut k = 1usize;
                    loop {
                        let mut sides = vec![k; n];
                        for &a in &axes {
                            sides[a] = 2 * k;
                        }
                        if sides.iter().zip(extents).any(|(s, d)| s > d)
                            || sides.iter().any(|&s| self.max_side.is_some_and(|m| s > m))
                        {
                            break;
                        }
                        classes.push(BoxClass {
                            sides,
                            kind: ClassKind::FalseCube {
                                long_axes: axes.clone(),
                                scale: k,
                            },
                        });
                        k += 1;
                    }
                }
            }
            BasisFamily::BBalls | BasisFamily::ASectors => {
                return Err(ShapeError::NotCellEnumerable);
            }
            BasisFamily::Custom(boxes) => {
                for (lo, hi) in boxes {
                    if lo.len() != n || hi.len() != n {
                        return Err(ShapeError::DimensionMismatch);
                    }
                    classes.push(BoxClass {
                        sides: lo.iter().zip(hi).map(|(a, b)| b - a).collect(),
                        kind: ClassKind::Fixed {
                            lo: lo.clone(),
                            hi: hi.clone(),
                        },
                    });
                }
            }
        }
        Ok(classes)
    }

    /// Every admissible cell-index box of the family, exactly once.
    pub fn enumerate_cell_boxes(&self, extents: &[usize]) -> Result<Vec<CellBox>, ShapeError> {
        let mut out = Vec::new();
        for class in self.classes(extents)? {
            class.for_each_placement(extents, self.stride, |lo, hi| {
                out.push((lo.to_vec(), hi.to_vec()));
            });
        }
        Ok(out)
    }

    /// Every admissible shape of the family as a real-coordinate `Shape`.
    pub fn enumerate(&self, geom: &GridGeometry) -> Result<Vec<Shape>, ShapeError> {
        Ok(self
            .enumerate_cell_boxes(&geom.extents)?
            .into_iter()
            .map(|(lo, hi)| Shape::from_cell_box(geom, &lo, &hi))
            .collect())
    }
}

fn axis_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for a in start..n {
            cur.push(a);
            rec(a + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassKind {
    Cube,
    Rectangle,
    FalseCube { long_axes: Vec<usize>, scale: usize },
    Fixed { lo: Vec<usize>, hi: Vec<usize> },
}

/// One side-length class of a basis over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxClass {
    pub sides: Vec<usize>,
    pub kind: ClassKind,
}

impl BoxClass {
    /// Number of long axes when this class is a (possibly trivial) false cube.
    pub fn false_cube_m(&self, dim: usize) -> Option<usize> {
        match &self.kind {
            ClassKind::Cube => Some(dim),
            ClassKind::FalseCube { long_axes, .. } => Some(long_axes.len()),
            _ => None,
        }
    }

    /// Visit all placements `[lo, lo + sides)` within `extents`.
    pub fn for_each_placement(
        &self,
        extents: &[usize],
        stride: usize,
        mut f: impl FnMut(&[usize], &[usize]),
    ) {
        if let ClassKind::Fixed { lo, hi } = &self.kind {
            if lo.iter().zip(hi).all(|(a, b)| a < b) && hi.iter().zip(extents).all(|(b, d)| b <= d)
            {
                f(lo, hi);
            }
            return;
        }
        let n = extents.len();
        if self.sides.iter().zip(extents).any(|(s, d)| s > d) {
            return;
        }
        let stride = stride.max(1);
        let mut lo = vec![0usize; n];
        let mut hi: Vec<usize> = self.sides.clone();
        loop {
            f(&lo, &hi);
            let mut k = n;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if lo[k] + stride + self.sides[k] <= extents[k] {
                    lo[k] += stride;
                    hi[k] = lo[k] + self.sides[k];
                    for j in k + 1..n {
                        lo[j] = 0;
                        hi[j] = self.sides[j];
                    }
                    break;
                }
            }
        }
    }

    pub fn placement_count(&self, extents: &[usize], stride: usize) -> u64 {
        if let ClassKind::Fixed { lo, hi } = &self.kind {
            let ok = lo.iter().zip(hi).all(|(a, b)| a < b)
                && hi.iter().zip(extents).all(|(b, d)| b <= d);
            return ok as u64;
        }
        let stride = stride.max(1);
        self.sides
            .iter()
            .zip(extents)
            .map(|(&s, &d)| {
                if s > d {
                    0
                } else {
                    ((d - s) / stride + 1) as u64
                }
            })
            .product()
    }
}

/// A verified containment chain `inner ⊂ middle ⊂ outer` with its measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    pub inner: Shape,
    pub middle: Shape,
    pub outer: Shape,
    pub inner_measure: f64,
    pub middle_measure: f64,
    pub outer_measure: f64,
    /// The volume ratio `|outer| / |inner|` asserted by the construction.
    pub declared_ratio: f64,
}

impl EquivalenceWitness {
    fn new(inner: Shape, middle: Shape, outer: Shape, declared_ratio: f64) -> Self {
        let inner_measure = inner.measure();
        let middle_measure = middle.measure();
        let outer_measure = outer.measure();
        Self {
            inner,
            middle,
            outer,
            inner_measure,
            middle_measure,
            outer_measure,
            declared_ratio,
        }
    }

    /// Rejection-sample `count` points uniformly in the outer shape and count
    /// violations of `inner ⊂ middle` and `middle ⊂ outer`.
    pub fn sample_violations(&self, count: usize, rng: &mut impl Rng) -> usize {
        let mut bad = 0usize;
        for _ in 0..count {
            let p = self.outer.sample_uniform(rng);
            let in_inner = self.inner.contains(&p);
            let in_middle = self.middle.contains(&p);
            if in_inner && !in_middle {
                bad += 1;
            }
            if in_middle && !self.outer.contains(&p) {
                bad += 1;
            }
        }
        bad
    }
}

/// Lemma-style cube ↔ ball circumscription. Cube of side `l` maps to the ball
/// of radius `sqrt(n) l / 2` about the same centre; ball of radius `r` maps to
/// the cube of side `2r`. Rectangles that are not cubes are rejected.
pub fn circumscribe_cube_ball(shape: &Shape) -> Result<EquivalenceWitness, ShapeError> {
    match shape {
        Shape::Box { lo, hi } => {
            let n = lo.len();
            let side = hi[0] - lo[0];
            if side <= 0.0 {
                return Err(ShapeError::InvalidShape("degenerate box".into()));
            }
            for k in 1..n {
                let s = hi[k] - lo[k];
                if (s - side).abs() > 1e-9 * side.max(1.0) {
                    return Err(ShapeError::NotACube);
                }
            }
            let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let r = (n as f64).sqrt() * side / 2.0;
            let ball = Shape::ball(center, r)?;
            let ratio =
                2f64.powi(-(n as i32)) * (n as f64).powf(n as f64 / 2.0) * unit_ball_volume(n);
            Ok(EquivalenceWitness::new(
                shape.clone(),
                shape.clone(),
                ball,
                ratio,
            ))
        }
        Shape::Ball { x, r } => {
            let n = x.len();
            let cube = Shape::cube(x, 2.0 * r);
            let ratio = 2f64.powi(n as i32) / unit_ball_volume(n);
            Ok(EquivalenceWitness::new(
                shape.clone(),
                shape.clone(),
                cube,
                ratio,
            ))
        }
        Shape::Sector { .. } => Err(ShapeError::NotACube),
    }
}

/// For a ball `B(x, r)`, the sandwich `B ⊂ A ⊂ B~` with `A` in the basis of
/// centred balls and sectors and `|B~| = 2^n |B|`.
///
/// When the ball contains the origin the middle shape is the centred ball of
/// radius `|x| + r` and the outer the centred ball of radius `2r`; otherwise
/// the middle is the sector `A(x, r, arcsin(r/|x|))` and the outer the ball of
/// radius `2r` about `(cos alpha) x`.
pub fn sector_for_ball(ball: &Shape) -> Result<EquivalenceWitness, ShapeError> {
    let Shape::Ball { x, r } = ball else {
        return Err(ShapeError::InvalidShape("expected a ball".into()));
    };
    if !r.is_finite() || *r <= 0.0 {
        return Err(ShapeError::InvalidShape("radius must be positive".into()));
    }
    let n = x.len();
    let cx = norm(x);
    let ratio = 2f64.powi(n as i32);
    if cx < *r {
        let middle = Shape::ball(vec![0.0; n], cx + r)?;
        let outer = Shape::ball(vec![0.0; n], 2.0 * r)?;
        Ok(EquivalenceWitness::new(ball.clone(), middle, outer, ratio))
    } else {
        let alpha = (r / cx).asin();
        let middle = Shape::sector(x.clone(), *r, alpha)?;
        let tilde_x: Vec<f64> = x.iter().map(|v| alpha.cos() * v).collect();
        let outer = Shape::ball(tilde_x, 2.0 * r)?;
        Ok(EquivalenceWitness::new(ball.clone(), middle, outer, ratio))
    }
}

/// For `A` in the basis of centred balls and sectors, the sandwich
/// `B ⊂ A ⊂ B~` with balls satisfying `|B~| = 2^n |B| <= 2^n |A|`.
pub fn ball_for_sector(a: &Shape) -> Result<EquivalenceWitness, ShapeError> {
    let n = a.dim();
    let ratio = 2f64.powi(n as i32);
    match a {
        Shape::Ball { x, r } => {
            if norm(x) != 0.0 {
                return Err(ShapeError::NotInBasisA);
            }
            let outer = Shape::ball(vec![0.0; n], 2.0 * r)?;
            Ok(EquivalenceWitness::new(a.clone(), a.clone(), outer, ratio))
        }
        Shape::Sector { x, rho, alpha } => {
            if !a.in_a_basis() {
                return Err(ShapeError::NotInBasisA);
            }
            let inner = Shape::ball(x.clone(), *rho)?;
            let tilde_x: Vec<f64> = x.iter().map(|v| alpha.cos() * v).collect();
            let outer = Shape::ball(tilde_x, 2.0 * rho)?;
            Ok(EquivalenceWitness::new(inner, a.clone(), outer, ratio))
        }
        Shape::Box { .. } => Err(ShapeError::NotInBasisA),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cap_fraction_closed_forms_match_quadrature() {
        // The general-n quadrature path must agree with the closed forms.
        let k = 4 - 2;
        let integrand = |t: f64| t.sin().powi(k);
        let half = adaptive_simpson(&integrand, 0.0, PI / 2.0, 1e-13)
            / adaptive_simpson(&integrand, 0.0, PI, 1e-13);
        assert!((half - 0.5).abs() < 1e-9);
        for &alpha in &[0.3, 0.7, PI / 2.0] {
            assert!((cap_fraction(2, alpha) - alpha / PI).abs() < 1e-12);
            assert!((cap_fraction(3, alpha) - (1.0 - alpha.cos()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_measure_examples() {
        // A((1,0), 1/2, pi/6) in the plane has measure pi/3.
        let a = Shape::sector(vec![1.0, 0.0], 0.5, PI / 6.0).unwrap();
        assert!((sector_measure(&a).unwrap() - PI / 3.0).abs() < 1e-12);
        // alpha = pi/2 with |x| = rho = r: half of the ball of radius 2r.
        let r = 0.8;
        let a = Shape::sector(vec![r, 0.0], r, PI / 2.0).unwrap();
        assert!((a.measure() - 0.5 * PI * (2.0 * r).powi(2)).abs() < 1e-12);
        let b = Shape::ball(vec![0.0, 0.0, 0.0], 1.3).unwrap();
        assert!((sector_measure(&b).unwrap() - unit_ball_volume(3) * 1.3f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn q_basis_count_1d() {
        let b = BasisDescriptor::cubes();
        assert_eq!(b.enumerate_cell_boxes(&[4]).unwrap().len(), 10);
    }

    #[test]
    fn w_basis_count_2x2() {
        let b = BasisDescriptor::false_cubes();
        let boxes = b.enumerate_cell_boxes(&[2, 2]).unwrap();
        // 4 unit cubes + 1 side-2 cube + 2 placements of the 2x1 false cube.
        assert_eq!(boxes.len(), 7);
    }

    #[test]
    fn r_basis_count_2x2() {
        let b = BasisDescriptor::rectangles();
        assert_eq!(b.enumerate_cell_boxes(&[2, 2]).unwrap().len(), 9);
    }

    #[test]
    fn w_contains_q() {
        let q = BasisDescriptor::cubes()
            .enumerate_cell_boxes(&[4, 4])
            .unwrap();
        let w = BasisDescriptor::false_cubes()
            .enumerate_cell_boxes(&[4, 4])
            .unwrap();
        for b in &q {
            assert!(w.contains(b));
        }
    }

    #[test]
    fn w_closed_under_long_axis_bisection() {
        // Proper false cubes split along their last long axis; even cubes are
        // false cubes with every axis long and split along the last axis.
        let w = BasisDescriptor::false_cubes();
        let all = w.enumerate_cell_boxes(&[4, 4]).unwrap();
        for class in w.classes(&[4, 4]).unwrap() {
            let axis = match &class.kind {
                ClassKind::FalseCube { long_axes, .. } => *long_axes.last().unwrap(),
                ClassKind::Cube if class.sides[0] % 2 == 0 => class.sides.len() - 1,
                _ => continue,
            };
            class.for_each_placement(&[4, 4], 1, |lo, hi| {
                let mid = lo[axis] + (hi[axis] - lo[axis]) / 2;
                let mut hi_left = hi.to_vec();
                hi_left[axis] = mid;
                let mut lo_right = lo.to_vec();
                lo_right[axis] = mid;
                assert!(all.contains(&(lo.to_vec(), hi_left)));
                assert!(all.contains(&(lo_right, hi.to_vec())));
            });
        }
    }

    #[test]
    fn analytic_bases_not_enumerable() {
        for fam in [BasisFamily::BBalls, BasisFamily::ASectors] {
            let b = BasisDescriptor::new(fam);
            assert!(matches!(
                b.enumerate_cell_boxes(&[4, 4]),
                Err(ShapeError::NotCellEnumerable)
            ));
        }
    }

    #[test]
    fn circumscribe_cube_examples() {
        // n = 2 unit cube -> ball radius sqrt(2)/2 and |B|/|Q| = pi/2.
        let q = Shape::cube(&[0.3, -0.4], 1.0);
        let w = circumscribe_cube_ball(&q).unwrap();
        let Shape::Ball { r, .. } = &w.outer else {
            panic!()
        };
        assert!((r - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((w.outer_measure / w.inner_measure - PI / 2.0).abs() < 1e-12);
        assert!((w.declared_ratio - PI / 2.0).abs() < 1e-12);

        // n = 1: interval of length l maps to itself (radius l/2), ratio 1.
        let i = Shape::cube(&[2.0], 0.6);
        let w = circumscribe_cube_ball(&i).unwrap();
        assert!((w.outer_measure / w.inner_measure - 1.0).abs() < 1e-12);

        // n = 3 ball of radius 1 -> cube of side 2, |Q|/|B| = 6/pi.
        let b = Shape::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let w = circumscribe_cube_ball(&b).unwrap();
        assert!((w.outer_measure / w.inner_measure - 6.0 / PI).abs() < 1e-12);

        let rect = Shape::Box {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 1.0],
        };
        assert!(matches!(
            circumscribe_cube_ball(&rect),
            Err(ShapeError::NotACube)
        ));
    }

    #[test]
    fn sector_for_ball_examples() {
        // B((1,0), 1/2) -> A((1,0), 1/2, pi/6), outer ball B((sqrt3/2, 0), 1).
        let b = Shape::ball(vec![1.0, 0.0], 0.5).unwrap();
        let w = sector_for_ball(&b).unwrap();
        let Shape::Sector { x, rho, alpha } = &w.middle else {
            panic!()
        };
        assert_eq!(x, &vec![1.0, 0.0]);
        assert!((rho - 0.5).abs() < 1e-15);
        assert!((alpha - PI / 6.0).abs() < 1e-12);
        let Shape::Ball { x, r } = &w.outer else {
            panic!()
        };
        assert!((x[0] - 3f64.sqrt() / 2.0).abs() < 1e-12 && x[1].abs() < 1e-15);
        assert!((r - 1.0).abs() < 1e-15);
        assert!((w.outer_measure - PI).abs() < 1e-12);
        assert!((w.outer_measure - 4.0 * w.inner_measure).abs() < 1e-12);

        // Origin inside: B((0.3, 0), 0.5) -> middle B(0, 0.8), outer B(0, 1).
        let b = Shape::ball(vec![0.3, 0.0], 0.5).unwrap();
        let w = sector_for_ball(&b).unwrap();
        let Shape::Ball { x, r } = &w.middle else {
            panic!()
        };
        assert!(norm(x) == 0.0 && (r - 0.8).abs() < 1e-15);
        let Shape::Ball { x, r } = &w.outer else {
            panic!()
        };
        assert!(norm(x) == 0.0 && (r - 1.0).abs() < 1e-15);

        // n = 3: B((2,0,0), 1): alpha = pi/6, outer radius 2 at (sqrt3, 0, 0).
        let b = Shape::ball(vec![2.0, 0.0, 0.0], 1.0).unwrap();
        let w = sector_for_ball(&b).unwrap();
        let Shape::Sector { alpha, .. } = &w.middle else {
            panic!()
        };
        assert!((alpha - PI / 6.0).abs() < 1e-12);
        let Shape::Ball { x, r } = &w.outer else {
            panic!()
        };
        assert!((x[0] - 3f64.sqrt()).abs() < 1e-12 && (r - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ball_for_sector_examples() {
        let a = Shape::ball(vec![0.0, 0.0], 1.0).unwrap();
        let w = ball_for_sector(&a).unwrap();
        assert!((w.outer_measure / w.inner_measure - 4.0).abs() < 1e-12);

        let a = Shape::sector(vec![1.0, 0.0], 0.5, PI / 6.0).unwrap();
        let w = ball_for_sector(&a).unwrap();
        let Shape::Ball { x, r } = &w.inner else {
            panic!()
        };
        assert_eq!(x, &vec![1.0, 0.0]);
        assert!((r - 0.5).abs() < 1e-15);
        let Shape::Ball { x, r } = &w.outer else {
            panic!()
        };
        assert!((x[0] - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-15);

        // n = 3 sector at |x| = 2, alpha = pi/6, rho = 1.
        let a = Shape::sector(vec![0.0, 2.0, 0.0], 1.0, PI / 6.0).unwrap();
        let w = ball_for_sector(&a).unwrap();
        assert!((w.inner_measure - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((w.outer_measure - 8.0 * (4.0 * PI / 3.0)).abs() < 1e-11);

        // rho != |x| sin(alpha) is not in the basis.
        let bad = Shape::sector(vec![1.0, 0.0], 0.3, PI / 6.0).unwrap();
        assert!(matches!(
            ball_for_sector(&bad),
            Err(ShapeError::NotInBasisA)
        ));
    }

    #[test]
    fn witness_sampling_is_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..10 {
            let cx = 0.2 + 0.3 * seed as f64;
            let b = Shape::ball(vec![cx, -0.1 * seed as f64], 0.4).unwrap();
            let w = sector_for_ball(&b).unwrap();
            assert_eq!(w.sample_violations(20_000, &mut rng), 0);
            assert!(w.middle_measure < w.outer_measure);
            assert_eq!(w.outer_measure, 4.0 * w.inner_measure);
        }
    }
}
