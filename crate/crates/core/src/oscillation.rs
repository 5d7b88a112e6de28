//! Mean oscillation over a shape, BMO/BLO seminorms over a basis, and the
//! subcube-mean bounds used by the false-cube comparison.
//!
//! Discrete seminorms are maxima over cell-aligned shapes and therefore lower
//! bounds for the continuum supremum; the `refine` flag re-optimizes the
//! argmax shape with real-valued endpoints to reduce the undershoot on the
//! majorant side of an inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Dd, GridError, GridFunction, PrefixSumTable};
use crate::rearrange::{RadialFunction, StepFunction1D};
use crate::shape::{unit_ball_volume, BasisDescriptor, BoxClass, ClassKind, Shape, ShapeError};

#[derive(Debug, Error)]
pub enum OscError {
    #[error("shape requires radial reduction; grids only take box shapes")]
    NeedsRadialReduction,
    #[error("box is not aligned to the grid domain")]
    NotInDomain,
    #[error("not a false cube")]
    NotAFalseCube,
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Seminorm scan domain for step functions: the finite interval
/// `(0, L)` of a rearrangement on a bounded domain, or the half-line with
/// the zero extension beyond `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanDomain {
    Finite,
    HalfLine,
}

/// Maximum oscillation seen within one side-length class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleMax {
    pub sides: Vec<usize>,
    pub max: f64,
}

/// Result of a seminorm scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationReport {
    /// The reported seminorm: the discrete maximum, or the refined value
    /// when refinement ran (never smaller than the discrete maximum).
    pub seminorm: f64,
    /// Shape attaining the reported value, in real coordinates.
    pub argmax: Option<Shape>,
    pub shapes_scanned: u64,
    pub per_scale: Vec<ScaleMax>,
    /// The cell-aligned maximum before refinement.
    pub discrete_seminorm: f64,
    pub refined: bool,
}

// ---------------------------------------------------------------------------
// Exact oscillation over cell boxes and real boxes
// ---------------------------------------------------------------------------

#[inline]
fn cell_box_abs_and_pos(
    values: &[f64],
    extents: &[usize],
    lo: &[usize],
    hi: &[usize],
    mean: f64,
) -> (f64, f64) {
    let n = extents.len();
    let mut abs = 0.0f64;
    let mut pos = 0.0f64;
    match n {
        1 => {
            for &v in &values[lo[0]..hi[0]] {
                let d = v - mean;
                abs += d.abs();
                pos += if d > 0.0 { d } else { 0.0 };
            }
        }
        2 => {
            let width = extents[1];
            for i in lo[0]..hi[0] {
                let row = i * width;
                for &v in &values[row + lo[1]..row + hi[1]] {
                    let d = v - mean;
                    abs += d.abs();
                    pos += if d > 0.0 { d } else { 0.0 };
                }
            }
        }
        _ => {
            let mut idx = lo.to_vec();
            let strides = row_major_strides(extents);
            loop {
                let base: usize = idx.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
                for &v in &values[base..base + (hi[n - 1] - lo[n - 1])] {
                    let d = v - mean;
                    abs += d.abs();
                    pos += if d > 0.0 { d } else { 0.0 };
                }
                // idx[n-1] stays at lo; advance the outer coordinates.
                let mut k = n - 1;
                loop {
                    if k == 0 {
                        return (abs, pos);
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < hi[k] {
                        break;
                    }
                    idx[k] = lo[k];
                }
            }
        }
    }
    (abs, pos)
}

fn row_major_strides(extents: &[usize]) -> Vec<usize> {
    let n = extents.len();
    let mut s = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * extents[i + 1];
    }
    s
}

#[inline]
fn cell_box_abs_sum(
    values: &[f64],
    extents: &[usize],
    lo: &[usize],
    hi: &[usize],
    mean: f64,
) -> f64 {
    let n = extents.len();
    let mut abs = 0.0f64;
    match n {
        1 => {
            for &v in &values[lo[0]..hi[0]] {
                abs += (v - mean).abs();
            }
        }
        2 => {
            let width = extents[1];
            for i in lo[0]..hi[0] {
                let row = i * width;
                for &v in &values[row + lo[1]..row + hi[1]] {
                    abs += (v - mean).abs();
                }
            }
        }
        3 => {
            let plane = extents[1] * extents[2];
            let width = extents[2];
            for i in lo[0]..hi[0] {
                for j in lo[1]..hi[1] {
                    let row = i * plane + j * width;
                    for &v in &values[row + lo[2]..row + hi[2]] {
                        abs += (v - mean).abs();
                    }
                }
            }
        }
        _ => {
            abs = cell_box_abs_and_pos(values, extents, lo, hi, mean).0;
        }
    }
    abs
}

/// Exact mean oscillation over the cell-index box `[lo, hi)`, cross-checked
/// against the identity `O(f, S) = 2 avg (f - f_S)_+` within 1e-12.
pub fn mean_oscillation_cells(
    f: &GridFunction,
    table: &PrefixSumTable,
    lo: &[usize],
    hi: &[usize],
) -> Result<f64, OscError> {
    let mean = table.box_mean(lo, hi)?;
    let count: usize = lo.iter().zip(hi).map(|(&a, &b)| b - a).product();
    let (abs, pos) = cell_box_abs_and_pos(f.values(), f.extents(), lo, hi, mean);
    let osc = abs / count as f64;
    let osc_pos = 2.0 * pos / count as f64;
    assert!(
        (osc - osc_pos).abs() <= 1e-12 * (1.0 + osc.abs() + mean.abs()),
        "oscillation identity violated: {osc} vs {osc_pos}"
    );
    Ok(osc)
}

/// Mean oscillation of a grid function over a shape. Boxes may have real
/// endpoints (cells at the boundary enter with their overlap fraction);
/// balls and sectors must go through the radial reduction instead.
pub fn mean_oscillation(
    f: &GridFunction,
    table: &PrefixSumTable,
    shape: &Shape,
) -> Result<f64, OscError> {
    match shape {
        Shape::Box { .. } => {
            if let Some((lo, hi)) = shape.to_cell_box(f.geometry()) {
                return mean_oscillation_cells(f, table, &lo, &hi);
            }
            let Shape::Box { lo, hi } = shape else {
                unreachable!()
            };
            let geom = f.geometry();
            let to_units = |x: &[f64]| -> Vec<f64> {
                x.iter()
                    .zip(&geom.origin)
                    .map(|(v, o)| (v - o) / geom.cell_size)
                    .collect()
            };
            let lo_u = to_units(lo);
            let hi_u = to_units(hi);
            if lo_u.iter().any(|&u| u < -1e-9)
                || hi_u
                    .iter()
                    .zip(geom.extents.iter())
                    .any(|(&u, &d)| u > d as f64 + 1e-9)
                || lo_u.iter().zip(&hi_u).any(|(a, b)| a >= b)
            {
                return Err(OscError::NotInDomain);
            }
            Ok(frac_box_oscillation(
                f.values(),
                &geom.extents,
                &lo_u,
                &hi_u,
            ))
        }
        Shape::Ball { .. } | Shape::Sector { .. } => Err(OscError::NeedsRadialReduction),
    }
}

/// Oscillation over a box given in fractional cell units; boundary cells are
/// weighted by their overlap.
pub fn frac_box_oscillation(values: &[f64], extents: &[usize], lo_u: &[f64], hi_u: &[f64]) -> f64 {
    let n = extents.len();
    // Per-axis list of (index, weight).
    let mut axis_weights: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for k in 0..n {
        let a = lo_u[k].max(0.0);
        let b = hi_u[k].min(extents[k] as f64);
        let mut ws = Vec::new();
        if b > a {
            let first = a.floor() as usize;
            let last = (b.ceil() as usize).min(extents[k]);
            for i in first..last {
                let w = (b.min((i + 1) as f64) - a.max(i as f64)).max(0.0);
                if w > 0.0 {
                    ws.push((i, w));
                }
            }
        }
        axis_weights.push(ws);
    }
    if axis_weights.iter().any(|w| w.is_empty()) {
        return 0.0;
    }
    let strides = row_major_strides(extents);
    // First pass: weighted mass and mean; second: weighted absolute deviation.
    let mut mass = 0.0f64;
    let mut weighted = 0.0f64;
    walk_weighted(&axis_weights, &strides, &mut |idx, w| {
        mass += w;
        weighted += w * values[idx];
    });
    let mean = weighted / mass;
    let mut dev = 0.0f64;
    walk_weighted(&axis_weights, &strides, &mut |idx, w| {
        dev += w * (values[idx] - mean).abs();
    });
    dev / mass
}

fn walk_weighted(
    axis_weights: &[Vec<(usize, f64)>],
    strides: &[usize],
    f: &mut impl FnMut(usize, f64),
) {
    fn rec(
        axis_weights: &[Vec<(usize, f64)>],
        strides: &[usize],
        k: usize,
        base: usize,
        w: f64,
        f: &mut impl FnMut(usize, f64),
    ) {
        if k == axis_weights.len() {
            f(base, w);
            return;
        }
        for &(i, wi) in &axis_weights[k] {
            rec(
                axis_weights,
                strides,
                k + 1,
                base + i * strides[k],
                w * wi,
                f,
            );
        }
    }
    rec(axis_weights, strides, 0, 0, 1.0, f);
}

// ---------------------------------------------------------------------------
// Step-function oscillation and the interval seminorm scan
// ---------------------------------------------------------------------------

/// Exact mean oscillation of a step function over the real interval `(a, b)`,
/// using the zero extension outside the domain.
pub fn step_interval_oscillation(sf: &StepFunction1D, a: f64, b: f64) -> f64 {
    assert!(b > a);
    let len = b - a;
    let mean = sf.integral_over(a, b) / len;
    let cuts = sf.breakpoints();
    let values = sf.values();
    let mut dev = 0.0f64;
    // Zero extension left of 0 and right of L.
    if a < 0.0 {
        dev += (0.0f64.min(b) - a) * mean.abs();
    }
    let l = sf.domain_length();
    if b > l {
        dev += (b - l.max(a)) * mean.abs();
    }
    let lo = a.max(0.0);
    let hi = b.min(l);
    if hi > lo && !values.is_empty() {
        let first = cuts.partition_point(|&t| t <= lo) - 1;
        for i in first..values.len() {
            let p_lo = cuts[i].max(lo);
            let p_hi = cuts[i + 1].min(hi);
            if p_hi <= p_lo {
                break;
            }
            dev += (values[i] - mean).abs() * (p_hi - p_lo);
        }
    }
    dev / len
}

struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Self {
            tree: vec![0.0; len + 1],
        }
    }

    fn reset(&mut self) {
        self.tree.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn add(&mut self, mut pos: usize, x: f64) {
        pos += 1;
        while pos < self.tree.len() {
            self.tree[pos] += x;
            pos += pos & pos.wrapping_neg();
        }
    }

    /// Sum over positions `0..=pos-1` (i.e. the first `pos` ranks).
    #[inline]
    fn prefix(&self, mut pos: usize) -> f64 {
        let mut acc = 0.0;
        while pos > 0 {
            acc += self.tree[pos];
            pos -= pos & pos.wrapping_neg();
        }
        acc
    }
}

/// Scanner state shared by all left endpoints of one step function.
struct IntervalScan<'a> {
    cuts: &'a [f64],
    // Double-double cumulative sums: differences of distant prefixes would
    // otherwise leave O(k eps) noise on the means of short intervals, which
    // shows up as phantom oscillation on constant data.
    cum_w: Vec<Dd>,
    cum_vw: Vec<Dd>,
    sorted: Vec<f64>,
    ranks: Vec<usize>,
}

impl<'a> IntervalScan<'a> {
    fn new(sf: &'a StepFunction1D) -> Self {
        let values = sf.values();
        let cuts = sf.breakpoints();
        let k = values.len();
        let mut cum_w = vec![Dd::default(); k + 1];
        let mut cum_vw = vec![Dd::default(); k + 1];
        for i in 0..k {
            let w = cuts[i + 1] - cuts[i];
            cum_w[i + 1] = cum_w[i].add_f64(w);
            cum_vw[i + 1] = cum_vw[i].add_f64(values[i] * w);
        }
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup();
        let ranks: Vec<usize> = values
            .iter()
            .map(|v| sorted.partition_point(|s| s < v))
            .collect();
        Self {
            cuts,
            cum_w,
            cum_vw,
            sorted,
            ranks,
        }
    }
}

struct LeftSweep {
    w_tree: Fenwick,
    vw_tree: Fenwick,
}

#[derive(Debug, Clone, Copy)]
struct ScanBest {
    value: f64,
    a: f64,
    b: f64,
}

/// Maximum of `O(f, (a, b))` over all breakpoint-aligned intervals, with an
/// optional analytic optimization of intervals running past the domain into
/// the zero tail (`ScanDomain::HalfLine`).
fn scan_step_intervals(
    sf: &StepFunction1D,
    domain: ScanDomain,
    max_pieces: Option<usize>,
) -> (ScanBest, u64, Vec<ScaleMax>) {
    let k = sf.piece_count();
    if k == 0 {
        return (
            ScanBest {
                value: 0.0,
                a: 0.0,
                b: 1.0,
            },
            0,
            Vec::new(),
        );
    }
    let scan = IntervalScan::new(sf);
    let rank_count = scan.sorted.len();
    let l = sf.domain_length();

    type LeftResult = (ScanBest, u64, Vec<(usize, f64)>);
    let per_left: Vec<LeftResult> = (0..k)
        .into_par_iter()
        .map_init(
            || LeftSweep {
                w_tree: Fenwick::new(rank_count),
                vw_tree: Fenwick::new(rank_count),
            },
            |ws, i| {
                ws.w_tree.reset();
                ws.vw_tree.reset();
                let mut s_tot = Dd::default();
                let mut sv_tot = Dd::default();
                let a = scan.cuts[i];
                let mut best = ScanBest {
                    value: -1.0,
                    a,
                    b: scan.cuts[i + 1],
                };
                let mut count = 0u64;
                let mut scale_local: Vec<(usize, f64)> = Vec::new();
                let j_max = max_pieces.map_or(k, |m| (i + m).min(k));
                for j in i + 1..=j_max {
                    let piece = j - 1;
                    let w = scan.cuts[j] - scan.cuts[piece];
                    let v = sf.values()[piece];
                    let r = scan.ranks[piece];
                    ws.w_tree.add(r, w);
                    ws.vw_tree.add(r, v * w);
                    s_tot = s_tot.add_f64(w);
                    sv_tot = sv_tot.add_f64(v * w);
                    let len = scan.cum_w[j].sub(scan.cum_w[i]).value();
                    let mean = scan.cum_vw[j].sub(scan.cum_vw[i]).value() / len;
                    let pos = scan.sorted.partition_point(|&s| s <= mean);
                    let s_above = s_tot.value() - ws.w_tree.prefix(pos);
                    let sv_above = sv_tot.value() - ws.vw_tree.prefix(pos);
                    let osc = 2.0 * (sv_above - mean * s_above) / len;
                    count += 1;
                    let pieces = j - i;
                    let bucket = usize::BITS as usize - 1 - pieces.leading_zeros() as usize;
                    if scale_local.len() <= bucket {
                        scale_local.resize(bucket + 1, (0, 0.0));
                    }
                    scale_local[bucket].0 = 1usize << bucket;
                    if osc > scale_local[bucket].1 {
                        scale_local[bucket].1 = osc;
                    }
                    if osc > best.value {
                        best = ScanBest {
                            value: osc,
                            a,
                            b: scan.cuts[j],
                        };
                    }
                }
                if domain == ScanDomain::HalfLine && max_pieces.is_none() {
                    // All pieces from i on are inserted; optimize the right
                    // endpoint beyond the domain against the zero tail.
                    let eval = |b: f64| -> f64 {
                        let len = b - a;
                        let mean = sv_tot.value() / len;
                        let pos = scan.sorted.partition_point(|&s| s <= mean);
                        let s_above = s_tot.value() - ws.w_tree.prefix(pos);
                        let sv_above = sv_tot.value() - ws.vw_tree.prefix(pos);
                        let dev = 2.0 * (sv_above - mean * s_above) + mean * s_tot.value()
                            - sv_tot.value()
                            + (b - l) * mean.abs();
                        dev / len
                    };
                    let span = (l - a).max(l / k as f64);
                    let mut tail_best = (eval(l + 1e-9 * span), l + 1e-9 * span);
                    for step in 1..=24 {
                        let b = l + span * 8.0 * step as f64 / 24.0;
                        let o = eval(b);
                        if o > tail_best.0 {
                            tail_best = (o, b);
                        }
                    }
                    // Golden-section polish around the best sample.
                    let (mut lo_b, mut hi_b) = ((tail_best.1 - span).max(l), tail_best.1 + span);
                    for _ in 0..40 {
                        let m1 = lo_b + (hi_b - lo_b) * 0.381966;
                        let m2 = hi_b - (hi_b - lo_b) * 0.381966;
                        if eval(m1) >= eval(m2) {
                            hi_b = m2;
                        } else {
                            lo_b = m1;
                        }
                    }
                    let b = 0.5 * (lo_b + hi_b);
                    let o = eval(b).max(tail_best.0);
                    let b = if eval(b) >= tail_best.0 {
                        b
                    } else {
                        tail_best.1
                    };
                    if o > best.value {
                        best = ScanBest { value: o, a, b };
                    }
                }
                (best, count, scale_local)
            },
        )
        .collect();

    let mut best = ScanBest {
        value: 0.0,
        a: 0.0,
        b: sf.domain_length(),
    };
    let mut total = 0u64;
    let mut per_scale: Vec<(usize, f64)> = Vec::new();
    for (b, c, scales) in per_left {
        if b.value > best.value {
            best = b;
        }
        total += c;
        for (bi, (sz, mx)) in scales.into_iter().enumerate() {
            if per_scale.len() <= bi {
                per_scale.resize(bi + 1, (0, 0.0));
            }
            if sz > 0 {
                per_scale[bi].0 = sz;
                if mx > per_scale[bi].1 {
                    per_scale[bi].1 = mx;
                }
            }
        }
    }
    let per_scale = per_scale
        .into_iter()
        .filter(|&(s, _)| s > 0)
        .map(|(s, m)| ScaleMax {
            sides: vec![s],
            max: m,
        })
        .collect();
    (best, total, per_scale)
}

fn refine_interval(sf: &StepFunction1D, start: ScanBest, domain: ScanDomain) -> (f64, f64, f64) {
    let l = sf.domain_length();
    let piece = l / sf.piece_count().max(1) as f64;
    let upper = match domain {
        ScanDomain::Finite => l,
        ScanDomain::HalfLine => f64::INFINITY,
    };
    let mut a = start.a;
    let mut b = start.b;
    let mut best = start.value;
    let mut delta = piece;
    while delta > piece / 1024.0 {
        let mut improved = false;
        for (target, is_a) in [(0usize, true), (1, false)] {
            let _ = target;
            for dir in [-1.0f64, 1.0] {
                let (na, nb) = if is_a {
                    ((a + dir * delta).clamp(0.0, b - 1e-12), b)
                } else {
                    (a, (b + dir * delta).clamp(a + 1e-12, upper))
                };
                if nb <= na {
                    continue;
                }
                let o = step_interval_oscillation(sf, na, nb);
                if o > best {
                    best = o;
                    a = na;
                    b = nb;
                    improved = true;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    (best, a, b)
}

/// BMO seminorm of a step function over intervals. The discrete scan covers
/// every breakpoint pair; with `refine` the argmax endpoints are then moved
/// continuously (never decreasing the value).
pub fn step_seminorm(sf: &StepFunction1D, domain: ScanDomain, refine: bool) -> OscillationReport {
    let (best, scanned, per_scale) = scan_step_intervals(sf, domain, None);
    let discrete = best.value.max(0.0);
    let (seminorm, a, b) = if refine && sf.piece_count() > 0 {
        let (v, a, b) = refine_interval(sf, best, domain);
        (v.max(discrete), a, b)
    } else {
        (discrete, best.a, best.b)
    };
    OscillationReport {
        seminorm,
        argmax: (sf.piece_count() > 0).then(|| Shape::Box {
            lo: vec![a],
            hi: vec![b],
        }),
        shapes_scanned: scanned,
        per_scale,
        discrete_seminorm: discrete,
        refined: refine,
    }
}

// ---------------------------------------------------------------------------
// Grid seminorm scans
// ---------------------------------------------------------------------------

struct GridBest {
    value: f64,
    lo: Vec<usize>,
    hi: Vec<usize>,
    kind: ClassKind,
}

fn scan_grid_basis(
    f: &GridFunction,
    table: &PrefixSumTable,
    basis: &BasisDescriptor,
) -> Result<(GridBest, u64, Vec<ScaleMax>), OscError> {
    let extents = f.extents().to_vec();
    let classes = basis.classes(&extents)?;
    let values = f.values();
    let stride = basis.stride;

    let results: Vec<(GridBest, u64, ScaleMax)> = classes
        .into_par_iter()
        .map(|class| {
            let mut best = GridBest {
                value: -1.0,
                lo: vec![0; extents.len()],
                hi: class.sides.clone(),
                kind: class.kind.clone(),
            };
            let mut count = 0u64;
            class.for_each_placement(&extents, stride, |lo, hi| {
                let cells: usize = lo.iter().zip(hi).map(|(&a, &b)| b - a).product();
                let mean = table.cell_sum(lo, hi) / cells as f64;
                let abs = cell_box_abs_sum(values, &extents, lo, hi, mean);
                let osc = abs / cells as f64;
                count += 1;
                if osc > best.value {
                    best.value = osc;
                    best.lo.copy_from_slice(lo);
                    best.hi.copy_from_slice(hi);
                }
            });
            let scale = ScaleMax {
                sides: class.sides.clone(),
                max: best.value.max(0.0),
            };
            (best, count, scale)
        })
        .collect();

    let mut best: Option<GridBest> = None;
    let mut total = 0u64;
    let mut per_scale = Vec::new();
    for (b, c, s) in results {
        total += c;
        if c > 0 {
            per_scale.push(s);
        }
        if c > 0 && best.as_ref().is_none_or(|cur| b.value > cur.value) {
            best = Some(b);
        }
    }
    let best = best.unwrap_or(GridBest {
        value: 0.0,
        lo: vec![0; f.dim()],
        hi: vec![1; f.dim()],
        kind: ClassKind::Cube,
    });
    Ok((best, total, per_scale))
}

/// Pattern-search refinement of a grid argmax box with real endpoints,
/// constrained to its shape class (cubes stay cubes, false cubes keep their
/// side pattern, rectangles move all faces freely).
fn refine_grid_box(
    values: &[f64],
    extents: &[usize],
    best: &GridBest,
) -> (f64, Vec<f64>, Vec<f64>) {
    let lo0: Vec<f64> = best.lo.iter().map(|&u| u as f64).collect();
    let hi0: Vec<f64> = best.hi.iter().map(|&u| u as f64).collect();
    refine_grid_box_from(values, extents, &lo0, &hi0, &best.kind)
}

fn refine_grid_box_from(
    values: &[f64],
    extents: &[usize],
    lo0: &[f64],
    hi0: &[f64],
    kind: &ClassKind,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = extents.len();
    let lo0 = lo0.to_vec();
    let hi0 = hi0.to_vec();

    // Parameter vector: positions plus either a single scale or free faces.
    #[derive(Clone)]
    enum Params {
        Scaled {
            lo: Vec<f64>,
            scale: f64,
            pattern: Vec<f64>,
        },
        Free {
            lo: Vec<f64>,
            hi: Vec<f64>,
        },
    }
    let make_box = |p: &Params| -> (Vec<f64>, Vec<f64>) {
        match p {
            Params::Scaled { lo, scale, pattern } => {
                let hi: Vec<f64> = lo
                    .iter()
                    .zip(pattern)
                    .map(|(l, pat)| l + pat * scale)
                    .collect();
                (lo.clone(), hi)
            }
            Params::Free { lo, hi } => (lo.clone(), hi.clone()),
        }
    };
    let admissible = |lo: &[f64], hi: &[f64]| -> bool {
        (0..n).all(|k| lo[k] >= 0.0 && hi[k] <= extents[k] as f64 && hi[k] - lo[k] > 1e-9)
    };
    let eval = |p: &Params| -> f64 {
        let (lo, hi) = make_box(p);
        if admissible(&lo, &hi) {
            frac_box_oscillation(values, extents, &lo, &hi)
        } else {
            -1.0
        }
    };

    let mut params = match kind {
        ClassKind::Cube => {
            let side = hi0[0] - lo0[0];
            Params::Scaled {
                lo: lo0.clone(),
                scale: side,
                pattern: vec![1.0; n],
            }
        }
        ClassKind::FalseCube { long_axes, .. } => {
            let mut pattern = vec![1.0; n];
            for &a in long_axes {
                pattern[a] = 2.0;
            }
            let scale = hi0
                .iter()
                .zip(&lo0)
                .zip(&pattern)
                .map(|((h, l), p)| (h - l) / p)
                .fold(f64::INFINITY, f64::min);
            Params::Scaled {
                lo: lo0.clone(),
                scale,
                pattern,
            }
        }
        ClassKind::Rectangle | ClassKind::Fixed { .. } => Params::Free {
            lo: lo0.clone(),
            hi: hi0.clone(),
        },
    };
    let mut best_val = eval(&params);
    let mut delta = 0.5f64;
    while delta > 1.0 / 512.0 {
        let mut improved = false;
        let dim_count = match &params {
            Params::Scaled { .. } => n + 1,
            Params::Free { .. } => 2 * n,
        };
        for d in 0..dim_count {
            for dir in [-1.0f64, 1.0] {
                let mut cand = params.clone();
                match &mut cand {
                    Params::Scaled { lo, scale, .. } => {
                        if d < n {
                            lo[d] += dir * delta;
                        } else {
                            *scale = (*scale + dir * delta).max(0.25);
                        }
                    }
                    Params::Free { lo, hi } => {
                        if d < n {
                            lo[d] += dir * delta;
                        } else {
                            hi[d - n] += dir * delta;
                        }
                    }
                }
                let v = eval(&cand);
                if v > best_val {
                    best_val = v;
                    params = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    let (lo, hi) = make_box(&params);
    (best_val, lo, hi)
}

/// Unit cubes (in cell units) straddling the steepest adjacent-cell jump
/// along each axis. The continuum supremum behind a spiky field often sits at
/// such half-offset cubes, which no cell-aligned shape reaches; they seed the
/// refinement multistart.
pub fn steepest_jump_cubes(values: &[f64], extents: &[usize]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = extents.len();
    let strides = row_major_strides(extents);
    let mut out = Vec::with_capacity(n);
    for axis in 0..n {
        let mut best = -1.0f64;
        let mut best_idx: Option<Vec<usize>> = None;
        for lin in 0..values.len() {
            // Decompose and check the neighbour along `axis`.
            let idx_a = (lin / strides[axis]) % extents[axis];
            if idx_a + 1 >= extents[axis] {
                continue;
            }
            let d = (values[lin] - values[lin + strides[axis]]).abs();
            if d > best {
                best = d;
                let mut rem = lin;
                let mut idx = vec![0usize; n];
                for k in 0..n {
                    idx[k] = rem / strides[k];
                    rem %= strides[k];
                }
                best_idx = Some(idx);
            }
        }
        if let Some(idx) = best_idx {
            let mut lo: Vec<f64> = idx.iter().map(|&i| i as f64).collect();
            let mut hi: Vec<f64> = idx.iter().map(|&i| i as f64 + 1.0).collect();
            lo[axis] += 0.5;
            hi[axis] += 0.5;
            out.push((lo, hi));
        }
    }
    out
}

/// BMO seminorm of a grid function over a cell-enumerable basis.
///
/// In one dimension every box family degenerates to the family of intervals,
/// and the scan delegates to the step-function path so that grid and
/// rearrangement seminorms share one implementation.
pub fn bmo_seminorm(
    f: &GridFunction,
    table: &PrefixSumTable,
    basis: &BasisDescriptor,
    refine: bool,
) -> Result<OscillationReport, OscError> {
    if matches!(
        basis.family,
        crate::shape::BasisFamily::BBalls | crate::shape::BasisFamily::ASectors
    ) {
        return Err(OscError::Shape(ShapeError::NotCellEnumerable));
    }
    let geom = f.geometry();
    if f.dim() == 1
        && matches!(
            basis.family,
            crate::shape::BasisFamily::QCubes
                | crate::shape::BasisFamily::RRectangles
                | crate::shape::BasisFamily::WFalseCubes
        )
    {
        let sf = StepFunction1D::from_uniform(geom.cell_size, f.values().to_vec());
        let mut report = step_seminorm(&sf, ScanDomain::Finite, refine);
        if basis.max_side.is_some() || basis.stride != 1 {
            // Bounded enumerations keep the generic (exhaustive) meaning.
            let (best, scanned, per_scale) =
                scan_step_intervals(&sf, ScanDomain::Finite, basis.max_side);
            report = OscillationReport {
                seminorm: best.value.max(0.0),
                argmax: Some(Shape::Box {
                    lo: vec![best.a],
                    hi: vec![best.b],
                }),
                shapes_scanned: scanned,
                per_scale,
                discrete_seminorm: best.value.max(0.0),
                refined: false,
            };
        }
        // Shift interval coordinates into grid coordinates.
        if let Some(Shape::Box { lo, hi }) = &mut report.argmax {
            lo[0] += geom.origin[0];
            hi[0] += geom.origin[0];
        }
        return Ok(report);
    }

    let (best, scanned, per_scale) = scan_grid_basis(f, table, basis)?;
    let discrete = best.value.max(0.0);
    let (seminorm, argmax) = if refine && scanned > 0 {
        let (mut v, mut lo_u, mut hi_u) = refine_grid_box(f.values(), &geom.extents, &best);
        // Multistart from the steepest-jump straddle cubes; unit cubes belong
        // to every family scanned here.
        let jump_kind = match basis.family {
            crate::shape::BasisFamily::RRectangles => ClassKind::Rectangle,
            _ => ClassKind::Cube,
        };
        for (jlo, jhi) in steepest_jump_cubes(f.values(), &geom.extents) {
            let (jv, jl, jh) =
                refine_grid_box_from(f.values(), &geom.extents, &jlo, &jhi, &jump_kind);
            if jv > v {
                v = jv;
                lo_u = jl;
                hi_u = jh;
            }
        }
        if v > discrete {
            let lo: Vec<f64> = lo_u
                .iter()
                .zip(&geom.origin)
                .map(|(u, o)| o + u * geom.cell_size)
                .collect();
            let hi: Vec<f64> = hi_u
                .iter()
                .zip(&geom.origin)
                .map(|(u, o)| o + u * geom.cell_size)
                .collect();
            (v, Shape::Box { lo, hi })
        } else {
            (discrete, Shape::from_cell_box(geom, &best.lo, &best.hi))
        }
    } else {
        (discrete, Shape::from_cell_box(geom, &best.lo, &best.hi))
    };
    Ok(OscillationReport {
        seminorm,
        argmax: (scanned > 0).then_some(argmax),
        shapes_scanned: scanned,
        per_scale,
        discrete_seminorm: discrete,
        refined: refine,
    })
}

/// The bounded-lower-oscillation functional: maximum over the basis of the
/// mean minus the essential infimum (the minimum cell value).
pub fn blo_functional(
    f: &GridFunction,
    table: &PrefixSumTable,
    basis: &BasisDescriptor,
) -> Result<f64, OscError> {
    let extents = f.extents().to_vec();
    let classes = basis.classes(&extents)?;
    let values = f.values();
    let best = classes
        .into_par_iter()
        .map(|class| {
            let mut local = 0.0f64;
            class.for_each_placement(&extents, basis.stride, |lo, hi| {
                let cells: usize = lo.iter().zip(hi).map(|(&a, &b)| b - a).product();
                let mean = table.cell_sum(lo, hi) / cells as f64;
                let mut min = f64::INFINITY;
                let n = extents.len();
                let strides = row_major_strides(&extents);
                let mut idx = lo.to_vec();
                'outer: loop {
                    let base: usize = idx.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
                    for &v in &values[base..base + (hi[n - 1] - lo[n - 1])] {
                        if v < min {
                            min = v;
                        }
                    }
                    let mut k = n - 1;
                    loop {
                        if k == 0 {
                            break 'outer;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < hi[k] {
                            break;
                        }
                        idx[k] = lo[k];
                    }
                }
                local = local.max(mean - min);
            });
            local
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// The Lemma-3.7 style sandwich for a false cube `R = [lo, hi)` split into
/// `2^m` equal subcubes by halving each long axis:
/// `lower <= O(f, R) <= bmo + lower` where
/// `lower = 2^{-m} sum_nu |f_{Q(nu)} - f_R|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PartitionBounds {
    pub lower: f64,
    pub osc: f64,
    pub upper: f64,
}

/// Axes along which `[lo, hi)` must be halved to produce equal subcubes;
/// `None` when the box is not a false cube in cell units.
pub fn false_cube_long_axes(lo: &[usize], hi: &[usize]) -> Option<Vec<usize>> {
    let sides: Vec<usize> = lo.iter().zip(hi).map(|(&a, &b)| b - a).collect();
    let min = *sides.iter().min()?;
    let mut long = Vec::new();
    for (k, &s) in sides.iter().enumerate() {
        if s == 2 * min {
            long.push(k);
        } else if s == min {
            if min % 2 == 0 {
                // An even cube may be treated as a false cube with all axes
                // long (scale min/2); handled below when every side is equal.
            }
        } else {
            return None;
        }
    }
    if long.is_empty() {
        // A cube: all axes long only if the side is even.
        if min % 2 == 0 {
            Some((0..sides.len()).collect())
        } else {
            None
        }
    } else {
        Some(long)
    }
}

pub fn partition_bounds(
    f: &GridFunction,
    table: &PrefixSumTable,
    lo: &[usize],
    hi: &[usize],
    bmo: f64,
) -> Result<PartitionBounds, OscError> {
    let long = false_cube_long_axes(lo, hi).ok_or(OscError::NotAFalseCube)?;
    let m = long.len();
    let f_r = table.box_mean(lo, hi)?;
    let mut sum = 0.0f64;
    for mask in 0u32..(1u32 << m) {
        let mut q_lo = lo.to_vec();
        let mut q_hi = hi.to_vec();
        for (bit, &axis) in long.iter().enumerate() {
            let half = (hi[axis] - lo[axis]) / 2;
            if mask & (1 << bit) == 0 {
                q_hi[axis] = lo[axis] + half;
            } else {
                q_lo[axis] = lo[axis] + half;
            }
        }
        sum += (table.box_mean(&q_lo, &q_hi)? - f_r).abs();
    }
    let lower = sum / (1u64 << m) as f64;
    let osc = mean_oscillation_cells(f, table, lo, hi)?;
    Ok(PartitionBounds {
        lower,
        osc,
        upper: bmo + lower,
    })
}

/// Largest difference of means over equal cell-aligned cubes sharing a full
/// `(n-1)`-dimensional face.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighborGap {
    pub gap: f64,
    pub side: usize,
    pub axis: usize,
    pub lo_first: Vec<usize>,
}

pub fn neighbor_mean_gap(f: &GridFunction, table: &PrefixSumTable) -> NeighborGap {
    let extents = f.extents().to_vec();
    let n = extents.len();
    let max_side = *extents.iter().min().unwrap();
    let sides: Vec<usize> = (1..=max_side).collect();
    sides
        .into_par_iter()
        .map(|s| {
            let mut best = NeighborGap {
                gap: 0.0,
                side: s,
                axis: 0,
                lo_first: vec![0; n],
            };
            let class = BoxClass {
                sides: vec![s; n],
                kind: ClassKind::Cube,
            };
            class.for_each_placement(&extents, 1, |lo, hi| {
                for axis in 0..n {
                    if hi[axis] + s <= extents[axis] {
                        let mean1 = table.box_mean_unchecked(lo, hi);
                        let mut lo2 = lo.to_vec();
                        let mut hi2 = hi.to_vec();
                        lo2[axis] += s;
                        hi2[axis] += s;
                        let mean2 = table.box_mean_unchecked(&lo2, &hi2);
                        let gap = (mean1 - mean2).abs();
                        if gap > best.gap {
                            best = NeighborGap {
                                gap,
                                side: s,
                                axis,
                                lo_first: lo.to_vec(),
                            };
                        }
                    }
                }
            });
            best
        })
        .reduce(
            || NeighborGap {
                gap: 0.0,
                side: 1,
                axis: 0,
                lo_first: vec![0; n],
            },
            |a, b| if a.gap >= b.gap { a } else { b },
        )
}

/// Largest oscillation among an adjacent cube pair and the (generally
/// half-offset) cube straddling their shared face, pattern-refined. The pair
/// gap never exceeds four times this value, so including it in a majorant
/// keeps the neighbour bound faithful on spiky fields.
pub fn straddle_trio_oscillation(
    f: &GridFunction,
    table: &PrefixSumTable,
    gap: &NeighborGap,
) -> f64 {
    let extents = f.extents();
    let s = gap.side;
    let lo1 = gap.lo_first.clone();
    let hi1: Vec<usize> = lo1.iter().map(|&a| a + s).collect();
    let mut lo2 = lo1.clone();
    lo2[gap.axis] += s;
    let hi2: Vec<usize> = lo2.iter().map(|&a| a + s).collect();
    let o1 = mean_oscillation_cells(f, table, &lo1, &hi1).unwrap_or(0.0);
    let o2 = mean_oscillation_cells(f, table, &lo2, &hi2).unwrap_or(0.0);
    let mut lo0: Vec<f64> = lo1.iter().map(|&a| a as f64).collect();
    let mut hi0: Vec<f64> = hi1.iter().map(|&a| a as f64).collect();
    lo0[gap.axis] += s as f64 / 2.0;
    hi0[gap.axis] += s as f64 / 2.0;
    let (o0, _, _) = refine_grid_box_from(f.values(), extents, &lo0, &hi0, &ClassKind::Cube);
    o1.max(o2).max(o0)
}

// ---------------------------------------------------------------------------
// Radial route: oscillation of a radial function over sectors and balls
// ---------------------------------------------------------------------------

/// Oscillation of a radial function over a centred ball or a sector, computed
/// by integrating the profile piecewise in the radius variable with the
/// `n omega_n r^{n-1}` Jacobian. This is the cross-check route for the
/// measure-variable reduction.
pub fn radial_shape_oscillation(rf: &RadialFunction, shape: &Shape) -> Result<f64, OscError> {
    let n = rf.dim;
    let (r_lo, r_hi) = shape.radial_extent()?;
    let omega = unit_ball_volume(n);
    let pow = |r: f64| omega * r.powi(n as i32);
    // Collect profile breakpoints intersecting (pow(r_lo), pow(r_hi)).
    let s_lo = pow(r_lo);
    let s_hi = pow(r_hi);
    let cuts = rf.profile.breakpoints();
    let mut seg_bounds = vec![s_lo];
    for &c in cuts {
        if c > s_lo && c < s_hi {
            seg_bounds.push(c);
        }
    }
    seg_bounds.push(s_hi);
    // Mean: integrate v * measure over segments (in radius space the measure
    // of {r : pow(r) in (c0, c1)} within the cap is proportional to c1 - c0).
    let mut mass = 0.0;
    let mut total = 0.0;
    for w in seg_bounds.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let v = rf.profile.value_at(mid);
        // Segment measure in radius variable, mapped back exactly.
        let r0 = (w[0] / omega).powf(1.0 / n as f64);
        let r1 = (w[1] / omega).powf(1.0 / n as f64);
        let seg = omega * (r1.powi(n as i32) - r0.powi(n as i32));
        mass += seg;
        total += v * seg;
    }
    let mean = total / mass;
    let mut dev = 0.0;
    for w in seg_bounds.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let v = rf.profile.value_at(mid);
        let r0 = (w[0] / omega).powf(1.0 / n as f64);
        let r1 = (w[1] / omega).powf(1.0 / n as f64);
        let seg = omega * (r1.powi(n as i32) - r0.powi(n as i32));
        dev += (v - mean).abs() * seg;
    }
    Ok(dev / mass)
}
