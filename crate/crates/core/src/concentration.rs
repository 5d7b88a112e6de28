//! Exact verification of the L1 bounded-differences concentration bound
//! `E|g - Eg| <= ||a||_2 / 2` for functions of independent Bernoulli
//! coordinates, by full enumeration of the hypercube (no sampling), and the
//! subcube-mean gadget that applies it to false cubes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridFunction, PrefixSumTable};
use crate::oscillation::{false_cube_long_axes, OscError};

/// Enumeration stays exact and fast up to this many coordinates.
pub const MAX_COORDS: usize = 20;

#[derive(Debug, Error)]
pub enum ConcError {
    #[error("table must have 2^m entries with m <= {MAX_COORDS}")]
    BadTable,
    #[error("bias must lie strictly between 0 and 1")]
    BadBias,
    #[error(transparent)]
    Osc(#[from] OscError),
}

/// A function `g` on binary strings of length `m` under the product measure
/// with per-coordinate bias `p` (the application uses `p = 1/2`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationInstance {
    pub m: usize,
    pub table: Vec<f64>,
    pub bias: f64,
}

impl ConcentrationInstance {
    pub fn new(m: usize, table: Vec<f64>, bias: f64) -> Result<Self, ConcError> {
        if m > MAX_COORDS || table.len() != 1usize << m || table.iter().any(|v| !v.is_finite()) {
            return Err(ConcError::BadTable);
        }
        if !(bias > 0.0 && bias < 1.0) {
            return Err(ConcError::BadBias);
        }
        Ok(Self { m, table, bias })
    }

    pub fn fair(m: usize, table: Vec<f64>) -> Result<Self, ConcError> {
        Self::new(m, table, 0.5)
    }

    fn weight(&self, x: usize) -> f64 {
        let ones = x.count_ones() as i32;
        self.bias.powi(ones) * (1.0 - self.bias).powi(self.m as i32 - ones)
    }

    /// Exact expectation under the product measure.
    pub fn expectation(&self) -> f64 {
        if self.bias == 0.5 {
            // All weights equal; avoids 2^m pow evaluations.
            return self.table.iter().sum::<f64>() / self.table.len() as f64;
        }
        self.table
            .iter()
            .enumerate()
            .map(|(x, &v)| v * self.weight(x))
            .sum()
    }
}

/// The tightest per-coordinate bounded-difference constants:
/// `a_i = max over coordinate flips of |g(..., x_i, ...) - g(..., x_i', ...)|`.
pub fn bounded_differences(inst: &ConcentrationInstance) -> Vec<f64> {
    let mut a = vec![0.0f64; inst.m];
    for (i, ai) in a.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut best = 0.0f64;
        for x in 0..inst.table.len() {
            if x & bit == 0 {
                let d = (inst.table[x] - inst.table[x | bit]).abs();
                if d > best {
                    best = d;
                }
            }
        }
        *ai = best;
    }
    a
}

/// Both sides of the concentration inequality: the exact mean absolute
/// deviation, and half the Euclidean norm of the bounded-difference vector.
pub fn check_concentration(inst: &ConcentrationInstance) -> (f64, f64) {
    let e = inst.expectation();
    let lhs = if inst.bias == 0.5 {
        inst.table.iter().map(|&v| (v - e).abs()).sum::<f64>() / inst.table.len() as f64
    } else {
        inst.table
            .iter()
            .enumerate()
            .map(|(x, &v)| (v - e).abs() * inst.weight(x))
            .sum()
    };
    let a = bounded_differences(inst);
    let rhs = 0.5 * a.iter().map(|x| x * x).sum::<f64>().sqrt();
    (lhs, rhs)
}

/// Build the subcube-mean instance of a false cube `R = [lo, hi)`: halving
/// each long axis splits `R` into `2^m` equal subcubes indexed by binary
/// strings, and `g(nu)` is the mean of `f` over the subcube `Q(nu)`.
/// Flipping bit `i` moves to the face-adjacent subcube along the i-th long
/// axis, and `E g` equals the mean of `f` over `R`.
pub fn subcube_gadget(
    f: &GridFunction,
    table: &PrefixSumTable,
    lo: &[usize],
    hi: &[usize],
) -> Result<ConcentrationInstance, ConcError> {
    debug_assert_eq!(f.geometry(), table.geometry());
    let long = false_cube_long_axes(lo, hi).ok_or(OscError::NotAFalseCube)?;
    let m = long.len();
    if m > MAX_COORDS {
        return Err(ConcError::BadTable);
    }
    let mut values = Vec::with_capacity(1usize << m);
    for nu in 0..(1usize << m) {
        let mut q_lo = lo.to_vec();
        let mut q_hi = hi.to_vec();
        for (bit, &axis) in long.iter().enumerate() {
            let half = (hi[axis] - lo[axis]) / 2;
            if nu & (1 << bit) == 0 {
                q_hi[axis] = lo[axis] + half;
            } else {
                q_lo[axis] = lo[axis] + half;
            }
        }
        values.push(table.box_mean(&q_lo, &q_hi).map_err(OscError::Grid)?);
    }
    ConcentrationInstance::fair(m, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_differences_examples() {
        // Scaled parity: every flip changes g by exactly lambda.
        let lambda = 2.5;
        let table: Vec<f64> = (0..16)
            .map(|x: usize| lambda * (x.count_ones() % 2) as f64)
            .collect();
        let inst = ConcentrationInstance::fair(4, table).unwrap();
        assert!(bounded_differences(&inst)
            .iter()
            .all(|&a| (a - lambda).abs() < 1e-15));

        // g(x) = x_1: only the first coordinate matters.
        let table: Vec<f64> = (0..8).map(|x: usize| (x & 1) as f64).collect();
        let inst = ConcentrationInstance::fair(3, table).unwrap();
        assert_eq!(bounded_differences(&inst), vec![1.0, 0.0, 0.0]);

        // g = sum of coordinates.
        let table: Vec<f64> = (0..32).map(|x: usize| x.count_ones() as f64).collect();
        let inst = ConcentrationInstance::fair(5, table).unwrap();
        assert!(bounded_differences(&inst)
            .iter()
            .all(|&a| (a - 1.0).abs() < 1e-15));
    }

    #[test]
    fn concentration_sum_of_two() {
        // m = 2, g = x1 + x2: E|g - 1| = 1/2 and ||a||_2 / 2 = sqrt(2)/2.
        let table: Vec<f64> = (0..4).map(|x: usize| x.count_ones() as f64).collect();
        let inst = ConcentrationInstance::fair(2, table).unwrap();
        let (lhs, rhs) = check_concentration(&inst);
        assert!((lhs - 0.5).abs() < 1e-15);
        assert!((rhs - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn concentration_constant() {
        let inst = ConcentrationInstance::fair(3, vec![7.0; 8]).unwrap();
        let (lhs, rhs) = check_concentration(&inst);
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn concentration_random_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let m = 10;
            let table: Vec<f64> = (0..1 << m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let inst = ConcentrationInstance::fair(m, table).unwrap();
            let (lhs, rhs) = check_concentration(&inst);
            assert!(lhs <= rhs + 1e-12, "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn biased_instances_also_satisfy_the_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for &p in &[0.2, 0.7] {
            for _ in 0..20 {
                let m = 6;
                let table: Vec<f64> = (0..1 << m).map(|_| rng.random_range(0.0..1.0)).collect();
                let inst = ConcentrationInstance::new(m, table, p).unwrap();
                let (lhs, rhs) = check_concentration(&inst);
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }

    #[test]
    fn gadget_indicator_example() {
        // f = chi_{[0,1/2)} on [0,1): m = 1, table (1, 0), Eg = 1/2 = f_R.
        let f = GridFunction::from_values(vec![4], 0.25, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let t = PrefixSumTable::build(&f);
        let inst = subcube_gadget(&f, &t, &[0], &[4]).unwrap();
        assert_eq!(inst.m, 1);
        assert_eq!(inst.table, vec![1.0, 0.0]);
        assert!((inst.expectation() - t.box_mean(&[0], &[4]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn gadget_constant() {
        let f = GridFunction::from_values(vec![4, 2], 0.5, vec![3.0; 8]).unwrap();
        let t = PrefixSumTable::build(&f);
        let inst = subcube_gadget(&f, &t, &[0, 0], &[4, 2]).unwrap();
        assert!(inst.table.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn gadget_expectation_matches_box_mean() {
        let values: Vec<f64> = (0..32).map(|i| ((i * 29) % 11) as f64).collect();
        let f = GridFunction::from_values(vec![8, 4], 0.25, values).unwrap();
        let t = PrefixSumTable::build(&f);
        // (4, 2) false cube with the long axis first.
        let inst = subcube_gadget(&f, &t, &[2, 1], &[6, 3]).unwrap();
        assert_eq!(inst.m, 1);
        let f_r = t.box_mean(&[2, 1], &[6, 3]).unwrap();
        assert!((inst.expectation() - f_r).abs() < 1e-12);
    }
}
