//! Deterministic test-function corpus. Every function is nonnegative (the
//! decompositions require it) and reproducible from `(seed, index)` alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{GridFunction, GridGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFamily {
    /// Indicator of a union of random same-level dyadic cubes.
    DyadicIndicator,
    /// Independent uniform values per cell.
    IidUniform,
    /// Independent heavy-tailed values per cell.
    IidHeavyTail,
    /// Sampled truncated logarithmic spike `(-log |x - x0|)_+`.
    LogSpike,
    /// Smooth radial bump.
    RadialBump,
    /// Two-colour checkerboard of random block size.
    Checkerboard,
    /// Two-level split along a random axis (adversarial for neighbour gaps).
    TwoLevel,
}

pub const ALL_FAMILIES: [CorpusFamily; 7] = [
    CorpusFamily::DyadicIndicator,
    CorpusFamily::IidUniform,
    CorpusFamily::IidHeavyTail,
    CorpusFamily::LogSpike,
    CorpusFamily::RadialBump,
    CorpusFamily::Checkerboard,
    CorpusFamily::TwoLevel,
];

/// Equal weights over all families.
pub fn default_weights() -> Vec<(CorpusFamily, f64)> {
    ALL_FAMILIES.iter().map(|&f| (f, 1.0)).collect()
}

/// Geometry of corpus functions for a given dimension at desk scale:
/// 4096 cells in 1-D, 64^2 in 2-D, 16^3 in 3-D, on the unit box.
pub fn default_extents(dim: usize) -> Vec<usize> {
    match dim {
        1 => vec![4096],
        2 => vec![64, 64],
        3 => vec![16, 16, 16],
        _ => vec![8; dim],
    }
}

pub fn geometry_for(dim: usize, extents: &[usize]) -> GridGeometry {
    // Unit cell size 1/d1 keeps the domain box at unit scale; extents that
    // are powers of two make the cell measure a power of two, so measures
    // computed as count * h^n are exact.
    let h = 1.0 / extents[0] as f64;
    GridGeometry::new(extents.to_vec(), h, vec![0.0; dim]).unwrap()
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed ^ index
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03),
    )
}

fn pick_family(weights: &[(CorpusFamily, f64)], rng: &mut ChaCha8Rng) -> CorpusFamily {
    let total: f64 = weights.iter().map(|(_, w)| w.max(0.0)).sum();
    if total <= 0.0 {
        return CorpusFamily::IidUniform;
    }
    let mut u = rng.random_range(0.0..total);
    for &(f, w) in weights {
        let w = w.max(0.0);
        if u < w {
            return f;
        }
        u -= w;
    }
    weights.last().unwrap().0
}

/// One deterministic corpus function.
pub fn generate_one(
    geom: &GridGeometry,
    weights: &[(CorpusFamily, f64)],
    seed: u64,
    index: u64,
) -> GridFunction {
    let mut rng = rng_for(seed, index);
    let family = pick_family(weights, &mut rng);
    generate_family(geom, family, &mut rng)
}

/// A deterministic corpus of `count` functions.
pub fn generate_corpus(
    geom: &GridGeometry,
    weights: &[(CorpusFamily, f64)],
    seed: u64,
    count: usize,
) -> Vec<GridFunction> {
    (0..count)
        .map(|i| generate_one(geom, weights, seed, i as u64))
        .collect()
}

pub fn generate_family(
    geom: &GridGeometry,
    family: CorpusFamily,
    rng: &mut ChaCha8Rng,
) -> GridFunction {
    let n = geom.dim;
    let len = geom.len();
    let values: Vec<f64> = match family {
        CorpusFamily::DyadicIndicator => {
            let min_extent = *geom.extents.iter().min().unwrap();
            let max_level = (min_extent as f64).log2().floor() as u32;
            let level = rng.random_range(0..=max_level.min(6));
            let block = min_extent >> level; // cells per dyadic cube side
            let density: f64 = rng.random_range(0.0..0.9);
            let amp: f64 = rng.random_range(0.5..3.0);
            let blocks_per_axis: Vec<usize> = geom
                .extents
                .iter()
                .map(|&d| d.div_ceil(block.max(1)))
                .collect();
            let total_blocks: usize = blocks_per_axis.iter().product();
            let chosen: Vec<bool> = (0..total_blocks)
                .map(|_| rng.random_range(0.0..1.0) < density)
                .collect();
            (0..len)
                .map(|lin| {
                    let idx = geom.multi_index(lin);
                    let mut b = 0usize;
                    for k in 0..n {
                        b = b * blocks_per_axis[k] + idx[k] / block.max(1);
                    }
                    if chosen[b] {
                        amp
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        CorpusFamily::IidUniform => {
            let amp: f64 = rng.random_range(0.5..4.0);
            (0..len).map(|_| rng.random_range(0.0..amp)).collect()
        }
        CorpusFamily::IidHeavyTail => (0..len)
            .map(|_| {
                let u: f64 = rng.random_range(0.0f64..1.0);
                ((1.0 - u).powf(-0.4) - 1.0).min(40.0)
            })
            .collect(),
        CorpusFamily::LogSpike => {
            let center: Vec<f64> = (0..n)
                .map(|k| {
                    let lo = geom.origin[k];
                    let hi = geom.origin[k] + geom.extents[k] as f64 * geom.cell_size;
                    rng.random_range(lo..hi)
                })
                .collect();
            let amp: f64 = rng.random_range(0.5..2.0);
            (0..len)
                .map(|lin| {
                    let idx = geom.multi_index(lin);
                    let x = geom.cell_center(&idx);
                    let d: f64 = x
                        .iter()
                        .zip(&center)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    amp * (-(d.max(1e-300)).ln()).max(0.0)
                })
                .collect()
        }
        CorpusFamily::RadialBump => {
            let center: Vec<f64> = (0..n)
                .map(|k| {
                    let lo = geom.origin[k];
                    let hi = geom.origin[k] + geom.extents[k] as f64 * geom.cell_size;
                    rng.random_range(lo..hi)
                })
                .collect();
            let domain = geom.extents[0] as f64 * geom.cell_size;
            let sigma: f64 = rng.random_range(0.05 * domain..0.4 * domain);
            let amp: f64 = rng.random_range(0.5..3.0);
            (0..len)
                .map(|lin| {
                    let idx = geom.multi_index(lin);
                    let x = geom.cell_center(&idx);
                    let d2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                    amp * (-d2 / (sigma * sigma)).exp()
                })
                .collect()
        }
        CorpusFamily::Checkerboard => {
            let min_extent = *geom.extents.iter().min().unwrap();
            let max_pow = (min_extent as f64).log2().floor() as u32;
            let block = 1usize << rng.random_range(0..max_pow.max(1));
            let amp: f64 = rng.random_range(0.5..3.0);
            (0..len)
                .map(|lin| {
                    let idx = geom.multi_index(lin);
                    let parity: usize = idx.iter().map(|&i| i / block).sum();
                    (parity % 2) as f64 * amp
                })
                .collect()
        }
        CorpusFamily::TwoLevel => {
            let axis = rng.random_range(0..n);
            let cut = rng.random_range(1..geom.extents[axis]);
            let amp: f64 = rng.random_range(0.5..4.0);
            (0..len)
                .map(|lin| {
                    let idx = geom.multi_index(lin);
                    if idx[axis] < cut {
                        amp
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    GridFunction::new(
        geom.extents.clone(),
        geom.cell_size,
        geom.origin.clone(),
        values,
    )
    .expect("corpus functions are valid grids")
}
