//! Closed-form constants used by the inequality suites, tabulated per
//! dimension.

use serde::{Deserialize, Serialize};

use crate::shape::unit_ball_volume;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: usize,
    /// Volume of the unit ball.
    pub omega_n: f64,
    /// Dyadic decomposition constant `2^n` (also the dyadic rearrangement
    /// bound).
    pub dyadic_cz: f64,
    /// Bisection decomposition constant, dimension-free.
    pub bisection_cz: f64,
    /// Rising-sun constant (one dimension only).
    pub rising_sun: Option<f64>,
    /// False-cube comparison `1 + 2 sqrt(n-1)`.
    pub wik_comparison: f64,
    /// Rearrangement bound `2 (1 + 2 sqrt(n-1))`.
    pub rearrangement_bound: f64,
    /// Paper-size bisection route `2^{(n+1)/2}`; reported for documentation,
    /// the family is not cell-enumerable (irrational side ratios).
    pub iso_paper_route: f64,
    /// Ball circumscribing a cube: `|B| / |Q| = 2^{-n} n^{n/2} omega_n`.
    pub ball_over_cube: f64,
    /// Cube circumscribing a ball: `|Q| / |B| = 2^n / omega_n`.
    pub cube_over_ball: f64,
    /// Lower symmetrization constant `2^{-2n} omega_n`.
    pub sdr_lower: f64,
    /// Upper symmetrization constant `n^{n/2} omega_n`.
    pub sdr_upper: f64,
    /// Symmetrization bound `D_n = 2 (1 + 2 sqrt(n-1)) n^{n/2} omega_n`.
    pub sdr_bound: f64,
}

pub fn constants(n: usize) -> ConstantsRow {
    assert!(n >= 1);
    let nf = n as f64;
    let omega_n = unit_ball_volume(n);
    let wik = 1.0 + 2.0 * (nf - 1.0).sqrt();
    let n_pow_half = nf.powf(nf / 2.0);
    ConstantsRow {
        n,
        omega_n,
        dyadic_cz: 2f64.powi(n as i32),
        bisection_cz: 2.0,
        rising_sun: (n == 1).then_some(1.0),
        wik_comparison: wik,
        rearrangement_bound: 2.0 * wik,
        iso_paper_route: 2f64.powf((nf + 1.0) / 2.0),
        ball_over_cube: 2f64.powi(-(n as i32)) * n_pow_half * omega_n,
        cube_over_ball: 2f64.powi(n as i32) / omega_n,
        sdr_lower: 2f64.powi(-2 * n as i32) * omega_n,
        sdr_upper: n_pow_half * omega_n,
        sdr_bound: 2.0 * wik * n_pow_half * omega_n,
    }
}
