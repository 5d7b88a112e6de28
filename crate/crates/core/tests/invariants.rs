//! Cross-module invariants: prefix-table exactness against naive summation,
//! oscillation laws, rearrangement laws, and decomposition validity on
//! randomized inputs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oscbound_core::cz;
use oscbound_core::grid::{GridFunction, PrefixSumTable};
use oscbound_core::oscillation::{
    blo_functional, bmo_seminorm, mean_oscillation_cells, step_interval_oscillation, step_seminorm,
    ScanDomain,
};
use oscbound_core::rearrange::{
    decreasing_rearrangement, distribution, distribution_of_uniform_step, hardy_littlewood_check,
    radial_reduction, shape_for_interval, Interval, RadialFunction,
};
use oscbound_core::shape::BasisDescriptor;
use oscbound_core::verify::corpus::{default_weights, generate_corpus, geometry_for};

fn random_grid(rng: &mut ChaCha8Rng, dim: usize) -> GridFunction {
    let extents: Vec<usize> = (0..dim).map(|_| rng.random_range(2..=8usize)).collect();
    let len: usize = extents.iter().product();
    let values: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
    GridFunction::from_values(extents, 0.25, values).unwrap()
}

/// Naive n-dimensional cell sum, the oracle for the prefix table.
fn naive_sum(f: &GridFunction, lo: &[usize], hi: &[usize]) -> f64 {
    let mut acc = 0.0;
    let mut idx = lo.to_vec();
    if lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return 0.0;
    }
    loop {
        acc += f.value_at_cell(&idx);
        let mut k = idx.len();
        loop {
            if k == 0 {
                return acc;
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

#[test]
fn prefix_mean_matches_naive_for_1000_boxes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0usize;
    while checked < 1000 {
        let dim = rng.random_range(1..=3usize);
        let f = random_grid(&mut rng, dim);
        let table = PrefixSumTable::build(&f);
        for _ in 0..10 {
            let lo: Vec<usize> = f
                .extents()
                .iter()
                .map(|&d| rng.random_range(0..d))
                .collect();
            let hi: Vec<usize> = lo
                .iter()
                .zip(f.extents())
                .map(|(&a, &d)| rng.random_range(a + 1..=d))
                .collect();
            let count: usize = lo.iter().zip(&hi).map(|(&a, &b)| b - a).product();
            let naive = naive_sum(&f, &lo, &hi) / count as f64;
            let fast = table.box_mean(&lo, &hi).unwrap();
            assert!(
                (naive - fast).abs() <= 1e-12 * naive.abs().max(1.0),
                "box {lo:?}..{hi:?}: naive {naive} vs prefix {fast}"
            );
            checked += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn box_sum_splits_along_any_axis(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3usize);
        let f = random_grid(&mut rng, dim);
        let table = PrefixSumTable::build(&f);
        let extents = f.extents().to_vec();
        let axis = rng.random_range(0..dim);
        if extents[axis] < 2 { return Ok(()); }
        let cut = rng.random_range(1..extents[axis]);
        let lo = vec![0usize; dim];
        let hi = extents.clone();
        let mut hi_left = hi.clone();
        hi_left[axis] = cut;
        let mut lo_right = lo.clone();
        lo_right[axis] = cut;
        let whole = table.box_sum(&lo, &hi);
        let parts = table.box_sum(&lo, &hi_left) + table.box_sum(&lo_right, &hi);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn oscillation_is_shift_invariant(seed in 0u64..5000, shift in -20.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=2usize);
        let f = random_grid(&mut rng, dim);
        let g = f.map(|v| v + shift).unwrap();
        let tf = PrefixSumTable::build(&f);
        let tg = PrefixSumTable::build(&g);
        let lo: Vec<usize> = f.extents().iter().map(|&d| rng.random_range(0..d)).collect();
        let hi: Vec<usize> = lo.iter().zip(f.extents())
            .map(|(&a, &d)| rng.random_range(a + 1..=d)).collect();
        let of = mean_oscillation_cells(&f, &tf, &lo, &hi).unwrap();
        let og = mean_oscillation_cells(&g, &tg, &lo, &hi).unwrap();
        prop_assert!((of - og).abs() <= 1e-11 * (1.0 + shift.abs() + of.abs()));
    }

    #[test]
    fn volume_ratio_bound_on_nested_boxes(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3usize);
        let f = random_grid(&mut rng, dim);
        let table = PrefixSumTable::build(&f);
        // Random outer box and inner sub-box.
        let out_lo: Vec<usize> = f.extents().iter().map(|&d| rng.random_range(0..d)).collect();
        let out_hi: Vec<usize> = out_lo.iter().zip(f.extents())
            .map(|(&a, &d)| rng.random_range(a + 1..=d)).collect();
        let in_lo: Vec<usize> = out_lo.iter().zip(&out_hi)
            .map(|(&a, &b)| rng.random_range(a..b)).collect();
        let in_hi: Vec<usize> = in_lo.iter().zip(&out_hi)
            .map(|(&a, &b)| rng.random_range(a + 1..=b)).collect();
        let o_in = mean_oscillation_cells(&f, &table, &in_lo, &in_hi).unwrap();
        let o_out = mean_oscillation_cells(&f, &table, &out_lo, &out_hi).unwrap();
        let cells_in: usize = in_lo.iter().zip(&in_hi).map(|(&a, &b)| b - a).product();
        let cells_out: usize = out_lo.iter().zip(&out_hi).map(|(&a, &b)| b - a).product();
        let ratio = cells_out as f64 / cells_in as f64;
        prop_assert!(o_in <= ratio * o_out + 1e-12 * (1.0 + o_out));
    }

    #[test]
    fn seminorm_homogeneous_and_subadditive(seed in 0u64..5000, lambda in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_grid(&mut rng, 2);
        let g = random_grid_like(&f, &mut rng);
        let basis = BasisDescriptor::cubes();
        let norm = |x: &GridFunction| {
            let t = PrefixSumTable::build(x);
            bmo_seminorm(x, &t, &basis, false).unwrap().seminorm
        };
        let nf = norm(&f);
        let scaled = f.map(|v| lambda * v).unwrap();
        prop_assert!((norm(&scaled) - lambda.abs() * nf).abs() <= 1e-11 * (1.0 + nf));
        let sum = f.map(|v| v).unwrap();
        let sum = GridFunction::from_values(
            sum.extents().to_vec(),
            sum.cell_size(),
            sum.values().iter().zip(g.values()).map(|(a, b)| a + b).collect(),
        ).unwrap();
        prop_assert!(norm(&sum) <= nf + norm(&g) + 1e-11);
    }

    #[test]
    fn equimeasurability_with_ties(values in prop::collection::vec(0usize..4, 4..64)) {
        // Small value alphabet forces ties; distributions must agree
        // bit-exactly and rearrangement must be idempotent.
        let vals: Vec<f64> = values.iter().map(|&v| v as f64 * 0.5).collect();
        let f = GridFunction::from_values(vec![vals.len()], 0.125, vals).unwrap();
        let fstar = decreasing_rearrangement(&f);
        let h = f.geometry().cell_measure();
        prop_assert_eq!(distribution(&f), distribution_of_uniform_step(&fstar, h));
        prop_assert!(fstar.is_nonincreasing());
        let perm = {
            let mut v = f.values().to_vec();
            v.reverse();
            GridFunction::from_values(vec![v.len()], 0.125, v).unwrap()
        };
        prop_assert_eq!(decreasing_rearrangement(&perm), fstar);
    }

    #[test]
    fn hardy_littlewood_on_random_subsets(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3usize);
        let f = random_grid(&mut rng, dim);
        let density = rng.random_range(0.05..0.95);
        let mut cells: Vec<usize> = (0..f.len())
            .filter(|_| rng.random_range(0.0..1.0f64) < density).collect();
        if cells.is_empty() { cells.push(0); }
        let (lhs, rhs) = hardy_littlewood_check(&f, &cells).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn rearrangement_contracts_l1(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f1 = random_grid(&mut rng, 1);
        let f2 = random_grid_like(&f1, &mut rng);
        let s1 = decreasing_rearrangement(&f1);
        let s2 = decreasing_rearrangement(&f2);
        let h = f1.cell_size();
        let direct: f64 = f1.values().iter().zip(f2.values())
            .map(|(a, b)| (a.abs() - b.abs()).abs() * h).sum();
        prop_assert!(s1.l1_distance(&s2) <= direct + 1e-12 * (1.0 + direct));
    }

    #[test]
    fn blo_dominates_half_oscillation(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_grid(&mut rng, 2);
        let t = PrefixSumTable::build(&f);
        let basis = BasisDescriptor::cubes();
        let blo = blo_functional(&f, &t, &basis).unwrap();
        let bmo = bmo_seminorm(&f, &t, &basis, false).unwrap().seminorm;
        prop_assert!(bmo <= 2.0 * blo + 1e-12);
    }

    #[test]
    fn refine_is_monotone(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=2usize);
        let f = random_grid(&mut rng, dim);
        let t = PrefixSumTable::build(&f);
        for basis in [BasisDescriptor::cubes(), BasisDescriptor::false_cubes()] {
            let plain = bmo_seminorm(&f, &t, &basis, false).unwrap();
            let refined = bmo_seminorm(&f, &t, &basis, true).unwrap();
            prop_assert!(refined.seminorm >= plain.seminorm - 1e-15);
        }
    }

    #[test]
    fn radial_reduction_round_trip(lo in 0.0f64..4.0, len in 0.01f64..3.0, dim in 1usize..4) {
        let interval = Interval::new(lo, lo + len);
        let shape = shape_for_interval(interval, dim).unwrap();
        let back = radial_reduction(&shape).unwrap();
        prop_assert!((back.lo - interval.lo).abs() <= 1e-9 * (1.0 + interval.lo));
        prop_assert!((back.hi - interval.hi).abs() <= 1e-9 * (1.0 + interval.hi));
    }

    #[test]
    fn rising_sun_pieces_balance(values in prop::collection::vec(0.0f64..4.0, 2..48),
                                 excess in 0.0f64..1.0) {
        let h = 1.0 / values.len() as f64;
        let g = GridFunction::from_values(vec![values.len()], h, values).unwrap();
        let mean = g.values().iter().sum::<f64>() / g.len() as f64;
        let gamma = mean + excess * (1.0 + mean);
        let d = cz::rising_sun_1d(&g, gamma).unwrap();
        let v = cz::validate_cz(&g, &d);
        prop_assert!(v.ok(), "violation: {:?}", v.first_violation);
        let scale = 1.0 + gamma + g.values().iter().fold(0.0f64, |m, x| m.max(*x));
        prop_assert!(v.worst_mean_slack.abs() <= 1e-12 * scale);
    }

    #[test]
    fn dyadic_and_bisection_validate(seed in 0u64..5000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.random_range(1..=3usize);
        let side = [16usize, 8, 4][dim - 1];
        let len = side.pow(dim as u32);
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..4.0)).collect();
        let g = GridFunction::from_values(vec![side; dim], 1.0 / side as f64, values).unwrap();
        let total = g.geometry().domain_measure();
        let t = rng.random_range(g.geometry().cell_measure()..total);
        let d = cz::dyadic_cz_from_t(&g, t).unwrap();
        prop_assert!(cz::validate_cz(&g, &d).ok());
        let b = cz::bisection_cz(&g, t).unwrap();
        prop_assert!(cz::validate_cz(&g, &b).ok());
    }
}

fn random_grid_like(f: &GridFunction, rng: &mut ChaCha8Rng) -> GridFunction {
    let values: Vec<f64> = (0..f.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
    GridFunction::from_values(f.extents().to_vec(), f.cell_size(), values).unwrap()
}

#[test]
fn radial_oscillation_equality_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for dim in 1..=3usize {
        let geom = geometry_for(dim, &[[64, 0, 0], [16, 16, 0], [8, 8, 8]][dim - 1][..dim]);
        for f in generate_corpus(&geom, &default_weights(), 31, 8) {
            let p = decreasing_rearrangement(&f);
            let rf = RadialFunction::new(p.clone(), dim);
            let l = p.domain_length();
            for _ in 0..16 {
                let lo = rng.random_range(0.0..l);
                let len = rng.random_range(0.1 * l..1.5 * l);
                let shape = shape_for_interval(Interval::new(lo, lo + len), dim).unwrap();
                let a = oscbound_core::oscillation::radial_shape_oscillation(&rf, &shape).unwrap();
                let b = step_interval_oscillation(&p, lo, lo + len);
                assert!(
                    (a - b).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()),
                    "dim {dim}: {a} vs {b}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        cases: 48,
        ..ProptestConfig::default()
    })]

    #[test]
    fn interval_scan_matches_quadratic_oracle(
        values in prop::collection::vec(-3.0f64..3.0, 2..40),
    ) {
        // Independent oracle: evaluate every breakpoint pair directly.
        let sf = oscbound_core::StepFunction1D::from_uniform(0.125, values);
        let k = sf.piece_count();
        let cuts = sf.breakpoints().to_vec();
        let mut direct = 0.0f64;
        for i in 0..k {
            for j in i + 1..=k {
                direct = direct.max(step_interval_oscillation(&sf, cuts[i], cuts[j]));
            }
        }
        let scanned = step_seminorm(&sf, ScanDomain::Finite, false);
        prop_assert!(
            (scanned.seminorm - direct).abs() <= 1e-12 * (1.0 + direct),
            "scan {} vs direct {}", scanned.seminorm, direct
        );
    }

    #[test]
    fn refined_scan_dominates_dense_interval_sampling(
        values in prop::collection::vec(0.0f64..4.0, 2..24),
    ) {
        // Sample intervals at eighth-of-a-piece resolution; the refined scan
        // must reach within 0.1% of anything the dense sampling finds.
        let w = 0.25;
        let sf = oscbound_core::StepFunction1D::from_uniform(w, values);
        let l = sf.domain_length();
        let step = w / 8.0;
        let points = (l / step) as usize;
        let mut dense = 0.0f64;
        for i in 0..points {
            for j in i + 1..=points {
                let (a, b) = (i as f64 * step, j as f64 * step);
                dense = dense.max(step_interval_oscillation(&sf, a, b));
            }
        }
        let refined = step_seminorm(&sf, ScanDomain::Finite, true).seminorm;
        prop_assert!(
            refined >= dense * (1.0 - 1e-3) - 1e-12,
            "refined {refined} vs dense {dense}"
        );
    }

    #[test]
    fn refined_grid_scan_dominates_dense_cube_sampling(seed in 0u64..3000) {
        // 2-D version: random cubes at quarter-cell resolution.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_grid(&mut rng, 2);
        let t = PrefixSumTable::build(&f);
        let refined = bmo_seminorm(&f, &t, &BasisDescriptor::cubes(), true).unwrap().seminorm;
        let extents = f.extents();
        let mut dense = 0.0f64;
        for _ in 0..400 {
            let side_q = rng.random_range(2..=4 * extents[0].min(extents[1]));
            let side = side_q as f64 / 4.0;
            let lo0 = rng.random_range(0.0..(extents[0] as f64 - side).max(1e-9));
            let lo1 = rng.random_range(0.0..(extents[1] as f64 - side).max(1e-9));
            let o = oscbound_core::oscillation::frac_box_oscillation(
                f.values(),
                extents,
                &[lo0, lo1],
                &[lo0 + side, lo1 + side],
            );
            dense = dense.max(o);
        }
        prop_assert!(refined >= dense * (1.0 - 1e-3) - 1e-12,
            "refined {refined} vs sampled {dense}");
    }
}

#[test]
fn half_line_seminorm_dominates_finite() {
    let geom = geometry_for(1, &[256]);
    for f in generate_corpus(&geom, &default_weights(), 5, 10) {
        let p = decreasing_rearrangement(&f);
        let finite = step_seminorm(&p, ScanDomain::Finite, false).seminorm;
        let half = step_seminorm(&p, ScanDomain::HalfLine, false).seminorm;
        assert!(half >= finite - 1e-15);
    }
}
