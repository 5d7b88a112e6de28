//! Calderón–Zygmund decompositions at a level `gamma`: the dyadic stopping
//! time over cubes (`c* = 2^n`), bisection of false cubes (`c* = 2`), and the
//! one-dimensional rising sun (`c* = 1`), together with a validator that
//! checks the decomposition conditions directly against the function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridFunction, PrefixSumTable};
use crate::rearrange::decreasing_rearrangement;
use crate::shape::Shape;

#[derive(Debug, Error)]
pub enum CzError {
    #[error("t out of range (0, |domain|]")]
    LevelOutOfRange,
    #[error("negative values in g")]
    NegativeValues,
    #[error("level below base mean")]
    LevelBelowBaseMean,
    #[error("sun below horizon: gamma is below the global mean")]
    SunBelowHorizon,
    #[error("no admissible power-of-two tile for t")]
    NoAdmissibleTile,
    #[error("rising sun requires a one-dimensional grid")]
    NotOneDimensional,
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CzMethod {
    Dyadic,
    Bisection,
    RisingSun,
}

/// One selected pair: a shape with mean at least `gamma` inside a parent
/// with mean at most `gamma` and measure at most `c*` times larger.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CzPair {
    pub selected: Shape,
    pub parent: Shape,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CzDecomposition {
    pub gamma: f64,
    pub c_star: f64,
    pub method: CzMethod,
    /// The target measure when the level came from `t` (paper mode).
    pub t: Option<f64>,
    pub pairs: Vec<CzPair>,
}

/// The level `gamma = mean of g* over (0, t)`. Any cell-aligned shape of
/// measure at least `t` then has mean at most `gamma`.
pub fn level_from_t(g: &GridFunction, t: f64) -> Result<f64, CzError> {
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(CzError::NegativeValues);
    }
    let total = g.geometry().domain_measure();
    if !(t > 0.0 && t <= total * (1.0 + 1e-12)) {
        return Err(CzError::LevelOutOfRange);
    }
    let gstar = decreasing_rearrangement(g);
    Ok(gstar.integral_over(0.0, t) / t)
}

fn largest_pow2_tile(extents: &[usize]) -> usize {
    // Largest power of two dividing every extent.
    let mut side = 1usize;
    while extents.iter().all(|&d| d % (side * 2) == 0) {
        side *= 2;
    }
    side
}

/// Classical dyadic stopping time: halve cubes into `2^n` children, select
/// children with mean strictly above `gamma` together with their parent.
/// Base cubes are the largest power-of-two tiles of the grid and must have
/// mean at most `gamma`.
pub fn dyadic_cz(g: &GridFunction, gamma: f64) -> Result<CzDecomposition, CzError> {
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(CzError::NegativeValues);
    }
    let table = PrefixSumTable::build(g);
    let geom = g.geometry();
    let n = geom.dim;
    let side = largest_pow2_tile(&geom.extents);
    let mut pairs = Vec::new();
    // Accumulation tolerance: a level derived from a rearrangement integral
    // can sit one ulp away from a mean computed through the prefix table.
    let max_abs = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * (1.0 + gamma.abs() + max_abs);

    let mut stack: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut tile = vec![0usize; n];
    loop {
        let lo = tile.clone();
        let hi: Vec<usize> = lo.iter().map(|&a| a + side).collect();
        let mean = table.box_mean_unchecked(&lo, &hi);
        if mean > gamma + tol {
            return Err(CzError::LevelBelowBaseMean);
        }
        stack.push((lo, side));
        // Advance to the next tile.
        let mut k = n;
        loop {
            if k == 0 {
                // All tiles seeded; run the stopping time.
                while let Some((lo, s)) = stack.pop() {
                    if s == 1 {
                        continue;
                    }
                    let half = s / 2;
                    let parent_hi: Vec<usize> = lo.iter().map(|&a| a + s).collect();
                    for mask in 0u32..(1u32 << n) {
                        let child_lo: Vec<usize> = (0..n)
                            .map(|a| lo[a] + if mask & (1 << a) != 0 { half } else { 0 })
                            .collect();
                        let child_hi: Vec<usize> = child_lo.iter().map(|&a| a + half).collect();
                        let mean = table.box_mean_unchecked(&child_lo, &child_hi);
                        if mean > gamma + tol {
                            pairs.push(CzPair {
                                selected: Shape::from_cell_box(geom, &child_lo, &child_hi),
                                parent: Shape::from_cell_box(geom, &lo, &parent_hi),
                            });
                        } else {
                            stack.push((child_lo, half));
                        }
                    }
                }
                return Ok(CzDecomposition {
                    gamma,
                    c_star: (1u64 << n) as f64,
                    method: CzMethod::Dyadic,
                    t: None,
                    pairs,
                });
            }
            k -= 1;
            tile[k] += side;
            if tile[k] < geom.extents[k] {
                break;
            }
            tile[k] = 0;
        }
    }
}

/// Dyadic decomposition at the level derived from `t`.
pub fn dyadic_cz_from_t(g: &GridFunction, t: f64) -> Result<CzDecomposition, CzError> {
    let gamma = level_from_t(g, t)?;
    let mut d = dyadic_cz(g, gamma)?;
    d.t = Some(t);
    Ok(d)
}

/// Bisection decomposition over false cubes: partition the grid into
/// power-of-two cubes of measure at least `t` (the smallest admissible side),
/// then repeatedly bisect shapes with mean at most `gamma` along their last
/// long axis. Children with mean at least `gamma` are selected with their
/// parent, so `|parent| = 2 |child|` and `c* = 2`. Unselected leaves are
/// single cells with value below `gamma`, which settles the complement
/// condition exactly.
pub fn bisection_cz(g: &GridFunction, t: f64) -> Result<CzDecomposition, CzError> {
    let gamma = level_from_t(g, t)?;
    let table = PrefixSumTable::build(g);
    let geom = g.geometry();
    let n = geom.dim;
    let h_n = geom.cell_measure();

    // Smallest power-of-two side with tile measure >= t that still tiles the
    // grid (t is effectively rounded up to the nearest admissible tile).
    let max_side = largest_pow2_tile(&geom.extents);
    let mut side = 1usize;
    while (side as f64).powi(n as i32) * h_n < t * (1.0 - 1e-12) {
        side *= 2;
        if side > max_side {
            return Err(CzError::NoAdmissibleTile);
        }
    }

    let mut pairs = Vec::new();
    // A work item: box [lo, lo+sides) with `long` axes of doubled length.
    // Cubes of even side s are false cubes of scale s/2 with all axes long.
    struct Item {
        lo: Vec<usize>,
        sides: Vec<usize>,
        long: Vec<usize>,
    }
    let mut work: Vec<Item> = Vec::new();
    let mut tile = vec![0usize; n];
    'tiles: loop {
        work.push(Item {
            lo: tile.clone(),
            sides: vec![side; n],
            long: if side >= 2 {
                (0..n).collect()
            } else {
                Vec::new()
            },
        });
        let mut k = n;
        loop {
            if k == 0 {
                break 'tiles;
            }
            k -= 1;
            tile[k] += side;
            if tile[k] < geom.extents[k] {
                break;
            }
            tile[k] = 0;
        }
    }

    while let Some(item) = work.pop() {
        if item.long.is_empty() {
            // A single cell (or an odd cube, which cannot occur when the base
            // side is a power of two): value below gamma by construction.
            continue;
        }
        let parent_hi: Vec<usize> = item
            .lo
            .iter()
            .zip(&item.sides)
            .map(|(&a, &s)| a + s)
            .collect();
        let axis = *item.long.last().unwrap();
        let half = item.sides[axis] / 2;
        let mut child_sides = item.sides.clone();
        child_sides[axis] = half;
        let child_long: Vec<usize> = item.long[..item.long.len() - 1].to_vec();
        for piece in 0..2usize {
            let mut child_lo = item.lo.clone();
            child_lo[axis] += piece * half;
            let child_hi: Vec<usize> = child_lo
                .iter()
                .zip(&child_sides)
                .map(|(&a, &s)| a + s)
                .collect();
            let mean = table.box_mean_unchecked(&child_lo, &child_hi);
            if mean >= gamma {
                pairs.push(CzPair {
                    selected: Shape::from_cell_box(geom, &child_lo, &child_hi),
                    parent: Shape::from_cell_box(geom, &item.lo, &parent_hi),
                });
            } else {
                let long = if child_long.is_empty() && child_sides[0] >= 2 {
                    // The child is an even cube: all axes become long.
                    (0..n).collect()
                } else {
                    child_long.clone()
                };
                work.push(Item {
                    lo: child_lo,
                    sides: child_sides.clone(),
                    long,
                });
            }
        }
    }

    Ok(CzDecomposition {
        gamma,
        c_star: 2.0,
        method: CzMethod::Bisection,
        t: Some(t),
        pairs,
    })
}

/// One-dimensional rising sun at level `gamma >= mean(g)`.
///
/// With `G(x) = integral_0^x (g - gamma)`, the shadow set of the sun shining
/// horizontally from the right is `E = {x : G(y) > G(x) for some y > x}`; its
/// components `(a, b)` satisfy `G(a) = G(b)` (so the mean over each is
/// exactly `gamma`) except possibly the component starting at the left
/// boundary, which is rebalanced by extending it to the first zero of `G`.
/// Outside the union `G` is non-increasing, hence `g <= gamma` cellwise.
/// Every piece is its own parent: `c* = 1`.
pub fn rising_sun_1d(g: &GridFunction, gamma: f64) -> Result<CzDecomposition, CzError> {
    if g.dim() != 1 {
        return Err(CzError::NotOneDimensional);
    }
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(CzError::NegativeValues);
    }
    let h = g.cell_size();
    let k = g.len();
    let values = g.values();
    let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>() * h + gamma.abs() + 1.0;
    let tol = 1e-12 * scale;

    // G at breakpoints (grid coordinates start at origin; work in local x).
    let mut big_g = vec![0.0f64; k + 1];
    for i in 0..k {
        big_g[i + 1] = big_g[i] + (values[i] - gamma) * h;
    }
    if big_g[k] > tol {
        return Err(CzError::SunBelowHorizon);
    }

    // Suffix maxima over breakpoints.
    let mut suffix = vec![f64::NEG_INFINITY; k + 1];
    suffix[k] = big_g[k];
    for i in (0..k).rev() {
        suffix[i] = big_g[i].max(suffix[i + 1]);
    }

    // Shadow parts per segment, merged into components on the fly.
    let x_of = |i: usize| i as f64 * h;
    let mut comps: Vec<(f64, f64)> = Vec::new();
    let push = |a: f64, b: f64, comps: &mut Vec<(f64, f64)>| {
        if b - a <= 0.0 {
            return;
        }
        if let Some(last) = comps.last_mut() {
            if a <= last.1 + 1e-12 * h.max(1.0) {
                last.1 = b;
                return;
            }
        }
        comps.push((a, b));
    };
    for i in 0..k {
        let slope = values[i] - gamma;
        let (g0, x0, x1) = (big_g[i], x_of(i), x_of(i + 1));
        if slope > 0.0 {
            push(x0, x1, &mut comps);
        } else if suffix[i + 1] > g0 + 0.0 {
            // Falling or flat segment fully (or partly) in shadow.
            push(x0, x1, &mut comps);
        } else if slope < 0.0 && suffix[i + 1] > big_g[i + 1] {
            // Part of the segment past the down-crossing of the future max.
            let c = x0 + (suffix[i + 1] - g0) / slope;
            push(c, x1, &mut comps);
        }
    }

    // Rebalance a head component anchored at the left boundary: extend its
    // right endpoint to a zero of G (one exists since G(L) <= 0), skipping
    // over any later component the zero would split, and swallow everything
    // in between.
    if let Some(&(a0, b0)) = comps.first() {
        if a0 <= tol && eval_linear(&big_g, h, b0) > tol {
            let first_zero_from = |cur: f64| -> f64 {
                if eval_linear(&big_g, h, cur) <= tol {
                    return cur;
                }
                let start = (cur / h).floor() as usize;
                for i in start..k {
                    let seg_lo = x_of(i).max(cur);
                    if eval_linear(&big_g, h, seg_lo) > 0.0 && big_g[i + 1] <= tol {
                        let slope = (big_g[i + 1] - big_g[i]) / h;
                        if slope < 0.0 {
                            return (x_of(i) + (0.0 - big_g[i]) / slope).max(seg_lo);
                        }
                        return x_of(i + 1);
                    }
                }
                x_of(k)
            };
            let mut zero_x = first_zero_from(b0);
            loop {
                let inside = comps
                    .iter()
                    .find(|&&(a, b)| a > tol && a < zero_x && zero_x < b)
                    .copied();
                match inside {
                    Some((_, b)) => zero_x = first_zero_from(b),
                    None => break,
                }
            }
            comps.retain(|&(a, _)| a > zero_x || a <= tol);
            comps[0] = (0.0, zero_x);
            comps.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        }
    }

    let origin = g.origin()[0];
    let pairs: Vec<CzPair> = comps
        .into_iter()
        .map(|(a, b)| {
            let shape = Shape::Box {
                lo: vec![origin + a],
                hi: vec![origin + b],
            };
            debug_assert!({
                let mean = segment_mean(values, h, a, b);
                (mean - gamma).abs() <= 1e-9 * scale
            });
            CzPair {
                selected: shape.clone(),
                parent: shape,
            }
        })
        .collect();

    Ok(CzDecomposition {
        gamma,
        c_star: 1.0,
        method: CzMethod::RisingSun,
        t: None,
        pairs,
    })
}

fn eval_linear(big_g: &[f64], h: f64, x: f64) -> f64 {
    let k = big_g.len() - 1;
    let u = (x / h).clamp(0.0, k as f64);
    let i = (u.floor() as usize).min(k - 1);
    let frac = u - i as f64;
    big_g[i] * (1.0 - frac) + big_g[i + 1] * frac
}

fn segment_mean(values: &[f64], h: f64, a: f64, b: f64) -> f64 {
    let k = values.len();
    let lo = (a / h).max(0.0);
    let hi = (b / h).min(k as f64);
    let mut acc = 0.0;
    let first = lo.floor() as usize;
    let last = (hi.ceil() as usize).min(k);
    for (i, &v) in values.iter().enumerate().take(last).skip(first) {
        let w = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
        acc += v * w * h;
    }
    acc / (b - a)
}

/// Result of checking a decomposition against Definition-style clauses:
/// (i) containment and measure ratio, (ii) the mean sandwich,
/// (iii) the pointwise bound off the union of parents, plus pairwise
/// disjointness of the selected shapes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CzValidation {
    pub containment_ok: bool,
    pub mean_sandwich_ok: bool,
    pub complement_ok: bool,
    pub disjoint_ok: bool,
    pub first_violation: Option<String>,
    /// Largest slack by which a mean clause is exceeded (diagnostics).
    pub worst_mean_slack: f64,
}

impl CzValidation {
    pub fn ok(&self) -> bool {
        self.containment_ok && self.mean_sandwich_ok && self.complement_ok && self.disjoint_ok
    }
}

struct RealBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn shape_to_units(shape: &Shape, g: &GridFunction) -> Option<RealBox> {
    let Shape::Box { lo, hi } = shape else {
        return None;
    };
    let geom = g.geometry();
    if lo.len() != geom.dim {
        return None;
    }
    let lo_u: Vec<f64> = lo
        .iter()
        .zip(&geom.origin)
        .map(|(v, o)| (v - o) / geom.cell_size)
        .collect();
    let hi_u: Vec<f64> = hi
        .iter()
        .zip(&geom.origin)
        .map(|(v, o)| (v - o) / geom.cell_size)
        .collect();
    Some(RealBox { lo: lo_u, hi: hi_u })
}

fn box_mean_units(g: &GridFunction, table: &PrefixSumTable, b: &RealBox) -> f64 {
    // Exact fast path for cell-aligned boxes.
    let aligned =
        b.lo.iter()
            .chain(b.hi.iter())
            .all(|&u| (u - u.round()).abs() <= 1e-9);
    if aligned {
        let lo: Vec<usize> = b.lo.iter().map(|&u| u.round() as usize).collect();
        let hi: Vec<usize> = b.hi.iter().map(|&u| u.round() as usize).collect();
        return table.box_mean_unchecked(&lo, &hi);
    }
    // Fractional cells (rising-sun pieces): weighted mean.
    let extents = g.extents();
    let values = g.values();
    debug_assert_eq!(extents.len(), 1);
    let lo = b.lo[0].max(0.0);
    let hi = b.hi[0].min(extents[0] as f64);
    let mut acc = 0.0;
    let first = lo.floor() as usize;
    let last = (hi.ceil() as usize).min(extents[0]);
    for (i, &v) in values.iter().enumerate().take(last).skip(first) {
        let w = (hi.min((i + 1) as f64) - lo.max(i as f64)).max(0.0);
        acc += v * w;
    }
    acc / (hi - lo)
}

fn box_measure_units(b: &RealBox) -> f64 {
    b.lo.iter().zip(&b.hi).map(|(a, c)| c - a).product()
}

fn boxes_overlap(a: &RealBox, b: &RealBox, tol: f64) -> bool {
    a.lo.iter()
        .zip(&a.hi)
        .zip(b.lo.iter().zip(&b.hi))
        .all(|((alo, ahi), (blo, bhi))| alo + tol < *bhi && blo + tol < *ahi)
}

fn box_contains(outer: &RealBox, inner: &RealBox, tol: f64) -> bool {
    outer
        .lo
        .iter()
        .zip(&outer.hi)
        .zip(inner.lo.iter().zip(&inner.hi))
        .all(|((olo, ohi), (ilo, ihi))| *ilo >= olo - tol && *ihi <= ohi + tol)
}

/// Check clauses (i)–(iii) and disjointness against `g`, with 1e-12 slack.
pub fn validate_cz(g: &GridFunction, d: &CzDecomposition) -> CzValidation {
    let table = PrefixSumTable::build(g);
    let geom = g.geometry();
    let max_abs = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * (1.0 + d.gamma.abs() + max_abs);
    let unit_tol = 1e-9;

    let mut v = CzValidation {
        containment_ok: true,
        mean_sandwich_ok: true,
        complement_ok: true,
        disjoint_ok: true,
        first_violation: None,
        worst_mean_slack: 0.0,
    };
    let fail = |flag: &mut bool, first: &mut Option<String>, msg: String| {
        *flag = false;
        if first.is_none() {
            *first = Some(msg);
        }
    };

    let mut selected_units = Vec::with_capacity(d.pairs.len());
    let mut parent_units = Vec::with_capacity(d.pairs.len());
    for (idx, pair) in d.pairs.iter().enumerate() {
        let (Some(s), Some(p)) = (
            shape_to_units(&pair.selected, g),
            shape_to_units(&pair.parent, g),
        ) else {
            fail(
                &mut v.containment_ok,
                &mut v.first_violation,
                format!("pair {idx}: non-box shape in decomposition"),
            );
            continue;
        };
        // (i) containment and measure ratio.
        if !box_contains(&p, &s, unit_tol) {
            fail(
                &mut v.containment_ok,
                &mut v.first_violation,
                format!("pair {idx}: selected shape not inside parent"),
            );
        }
        let ms = box_measure_units(&s);
        let mp = box_measure_units(&p);
        if mp > d.c_star * ms * (1.0 + 1e-12) {
            fail(
                &mut v.containment_ok,
                &mut v.first_violation,
                format!(
                    "pair {idx}: |parent| = {mp} exceeds c*|selected| = {}",
                    d.c_star * ms
                ),
            );
        }
        // (ii) mean sandwich.
        let mean_s = box_mean_units(g, &table, &s);
        let mean_p = box_mean_units(g, &table, &p);
        v.worst_mean_slack = v
            .worst_mean_slack
            .max(mean_p - d.gamma)
            .max(d.gamma - mean_s);
        if mean_p > d.gamma + tol {
            fail(
                &mut v.mean_sandwich_ok,
                &mut v.first_violation,
                format!("pair {idx}: parent mean {mean_p} above gamma {}", d.gamma),
            );
        }
        if mean_s < d.gamma - tol {
            fail(
                &mut v.mean_sandwich_ok,
                &mut v.first_violation,
                format!("pair {idx}: selected mean {mean_s} below gamma {}", d.gamma),
            );
        }
        selected_units.push(s);
        parent_units.push(p);
    }

    // Pairwise disjointness of the selected shapes.
    'out: for i in 0..selected_units.len() {
        for j in i + 1..selected_units.len() {
            if boxes_overlap(&selected_units[i], &selected_units[j], unit_tol) {
                fail(
                    &mut v.disjoint_ok,
                    &mut v.first_violation,
                    format!("selected shapes {i} and {j} overlap"),
                );
                break 'out;
            }
        }
    }

    // (iii) g <= gamma on every cell with uncovered measure.
    let values = g.values();
    for (lin, &val) in values.iter().enumerate() {
        if val <= d.gamma + tol {
            continue;
        }
        let idx = geom.multi_index(lin);
        // Covered fraction of this cell by the union of parents. Parents may
        // overlap, but only the 1-D rising sun produces fractional covers and
        // its pieces are disjoint, so summing clipped overlaps is exact.
        let mut covered = 0.0f64;
        for p in &parent_units {
            let mut frac = 1.0f64;
            for (k, &i) in idx.iter().enumerate() {
                let c_lo = i as f64;
                let c_hi = c_lo + 1.0;
                let o = (p.hi[k].min(c_hi) - p.lo[k].max(c_lo)).max(0.0);
                frac *= o;
            }
            covered += frac;
            if covered >= 1.0 - unit_tol {
                break;
            }
        }
        if covered < 1.0 - unit_tol {
            fail(
                &mut v.complement_ok,
                &mut v.first_violation,
                format!(
                    "cell {idx:?} has value {val} > gamma {} outside the union",
                    d.gamma
                ),
            );
        }
    }

    v
}

/// Coverage of the superlevel set: every cell with `g > gamma` lies inside
/// the union of parents (exact at cell granularity). This is an invariant of
/// the constructions rather than one of the decomposition clauses.
pub fn superlevel_covered(g: &GridFunction, d: &CzDecomposition) -> bool {
    validate_cz(g, d).complement_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(values: Vec<f64>, h: f64) -> GridFunction {
        GridFunction::from_values(vec![values.len()], h, values).unwrap()
    }

    #[test]
    fn level_from_t_examples() {
        let c = grid_1d(vec![2.5; 8], 0.125);
        assert_eq!(level_from_t(&c, 0.3).unwrap(), 2.5);

        // g* = 3 on (0, .25), 1 on (.25, .75), 0 after; t = 0.5 -> gamma = 2.
        let g = grid_1d(vec![3.0, 1.0, 1.0, 0.0], 0.25);
        assert!((level_from_t(&g, 0.5).unwrap() - 2.0).abs() < 1e-15);

        // t = |domain| -> global mean.
        assert!((level_from_t(&g, 1.0).unwrap() - 1.25).abs() < 1e-15);
        assert!(level_from_t(&g, 0.0).is_err());
        assert!(level_from_t(&g, 1.5).is_err());
    }

    #[test]
    fn dyadic_trace_example() {
        // g = (4, 0, 0, 0) on [0,1), gamma = 2: selected = [0, 1/4) with
        // parent [0, 1/2).
        let g = grid_1d(vec![4.0, 0.0, 0.0, 0.0], 0.25);
        let d = dyadic_cz(&g, 2.0).unwrap();
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 0.25));
        let Shape::Box { lo, hi } = &d.pairs[0].parent else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 0.5));
        assert_eq!(d.c_star, 2.0);
        assert!(validate_cz(&g, &d).ok());
    }

    #[test]
    fn dyadic_zero_function_empty() {
        let g = grid_1d(vec![0.0; 8], 0.125);
        let d = dyadic_cz(&g, 1.0).unwrap();
        assert!(d.pairs.is_empty());
        assert!(validate_cz(&g, &d).ok());
    }

    #[test]
    fn dyadic_rejects_low_level() {
        let g = grid_1d(vec![4.0, 4.0, 4.0, 4.0], 0.25);
        assert!(matches!(
            dyadic_cz(&g, 2.0),
            Err(CzError::LevelBelowBaseMean)
        ));
    }

    #[test]
    fn bisection_trace_example() {
        // g = 4 chi_{[0,1/4)} on [0,1); pick t so gamma = 2: g* is 4 on
        // (0, 1/4), so t = 1/2 gives gamma = 2. The smallest admissible tile
        // has measure 1/2, whose left child [0, 1/4) (mean 4) is selected
        // inside [0, 1/2) (mean 2 = gamma); the right half is never selected.
        let g = grid_1d(vec![4.0, 0.0, 0.0, 0.0], 0.25);
        let d = bisection_cz(&g, 0.5).unwrap();
        assert!((d.gamma - 2.0).abs() < 1e-15);
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 0.25));
        let Shape::Box { lo, hi } = &d.pairs[0].parent else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 0.5));
        assert_eq!(d.c_star, 2.0);
        assert!(validate_cz(&g, &d).ok());

        // A larger target measure starts from the whole interval and selects
        // the left half inside it.
        let d = bisection_cz(&g, 1.0).unwrap();
        assert!((d.gamma - 1.0).abs() < 1e-15);
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 0.5));
        let Shape::Box { lo, hi } = &d.pairs[0].parent else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 1.0));
        assert!(validate_cz(&g, &d).ok());
    }

    #[test]
    fn bisection_below_level_empty() {
        let g = grid_1d(vec![1.0, 0.5, 0.25, 0.75], 0.25);
        // t = |domain| gives gamma = global mean; strictly smaller values
        // everywhere would yield an empty set; here mean-level children tie.
        let d = bisection_cz(&g, 1.0).unwrap();
        assert!(validate_cz(&g, &d).ok());
        let low = grid_1d(vec![0.1, 0.2, 0.15, 0.05], 0.25);
        let dd = bisection_cz(&low, 0.25).unwrap();
        // gamma = max value (0.2); nothing strictly exceeds it after tiles.
        assert!(validate_cz(&low, &dd).ok());
    }

    #[test]
    fn rising_sun_balanced_whole_interval() {
        let g = grid_1d(vec![2.0, 0.0, 2.0, 0.0], 0.25);
        let d = rising_sun_1d(&g, 1.0).unwrap();
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert_eq!((lo[0], hi[0]), (0.0, 1.0));
        assert!(validate_cz(&g, &d).ok());
    }

    #[test]
    fn rising_sun_empty_when_below() {
        let g = grid_1d(vec![0.5, 0.25, 0.5, 0.0], 0.25);
        let d = rising_sun_1d(&g, 1.0).unwrap();
        assert!(d.pairs.is_empty());
        assert!(validate_cz(&g, &d).ok());
    }

    #[test]
    fn rising_sun_head_extension() {
        // g = 3 chi_{[0,1/3)} on a 3-cell grid, gamma = 1.5: piece (0, 2/3).
        let g = grid_1d(vec![3.0, 0.0, 0.0], 1.0 / 3.0);
        let d = rising_sun_1d(&g, 1.5).unwrap();
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert!(lo[0].abs() < 1e-15);
        assert!((hi[0] - 2.0 / 3.0).abs() < 1e-12);
        let val = validate_cz(&g, &d);
        assert!(val.ok(), "{:?}", val.first_violation);
        assert!(val.worst_mean_slack <= 1e-12);
    }

    #[test]
    fn rising_sun_mid_cell_piece() {
        // g = (3, 0) with gamma = 2 > mean 1.5: piece must end mid-cell at 0.75.
        let g = grid_1d(vec![3.0, 0.0], 0.5);
        let d = rising_sun_1d(&g, 2.0).unwrap();
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert!(lo[0].abs() < 1e-15);
        assert!((hi[0] - 0.75).abs() < 1e-12);
        let val = validate_cz(&g, &d);
        assert!(val.ok(), "{:?}", val.first_violation);
    }

    #[test]
    fn rising_sun_interior_dip() {
        // Shadow components can dip below their boundary level and must still
        // balance: g = (0, 3, 1.99) at gamma = 2.
        let g = grid_1d(vec![0.0, 3.0, 1.99], 1.0 / 3.0);
        let d = rising_sun_1d(&g, 2.0).unwrap();
        assert_eq!(d.pairs.len(), 1);
        let Shape::Box { lo, hi } = &d.pairs[0].selected else {
            panic!()
        };
        assert!((lo[0] - 1.0 / 6.0).abs() < 1e-12);
        assert!((hi[0] - 2.0 / 3.0).abs() < 1e-12);
        let val = validate_cz(&g, &d);
        assert!(val.ok(), "{:?}", val.first_violation);
    }

    #[test]
    fn rising_sun_rejects_low_gamma() {
        let g = grid_1d(vec![2.0, 2.0], 0.5);
        assert!(matches!(
            rising_sun_1d(&g, 1.0),
            Err(CzError::SunBelowHorizon)
        ));
    }

    #[test]
    fn validator_catches_tampering() {
        let g = grid_1d(vec![4.0, 0.0, 0.0, 0.0], 0.25);
        let mut d = dyadic_cz(&g, 2.0).unwrap();
        // Swap the selected interval for its sibling with mean < gamma.
        d.pairs[0].selected = Shape::Box {
            lo: vec![0.25],
            hi: vec![0.5],
        };
        let val = validate_cz(&g, &d);
        assert!(!val.mean_sandwich_ok);
        assert!(!val.ok());

        // Overlapping selected shapes trip the disjointness clause.
        let d2 = CzDecomposition {
            gamma: 0.5,
            c_star: 2.0,
            method: CzMethod::Bisection,
            t: None,
            pairs: vec![
                CzPair {
                    selected: Shape::Box {
                        lo: vec![0.0],
                        hi: vec![0.5],
                    },
                    parent: Shape::Box {
                        lo: vec![0.0],
                        hi: vec![1.0],
                    },
                },
                CzPair {
                    selected: Shape::Box {
                        lo: vec![0.25],
                        hi: vec![0.75],
                    },
                    parent: Shape::Box {
                        lo: vec![0.0],
                        hi: vec![1.0],
                    },
                },
            ],
        };
        let val2 = validate_cz(&grid_1d(vec![0.5; 4], 0.25), &d2);
        assert!(!val2.disjoint_ok);
    }
}
