use arclab_core::certifier::{
    discriminant_d, eta_bound, find_witness, interval_j, theta_exponent, threshold_denominator,
};
use arclab_core::diagnostics::{weighted_energy, DiagnosticsRecord};
use arclab_core::solver::convergence::{decay_study, DtPolicy, DT_PER_H2};
use arclab_core::solver::{dt_stable, step, step_with_dt, SchemeConfig};
use arclab_core::{Grid, SensitivitySpec, SystemState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn geometric(from: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| from + 1e-3 * 1.2f64.powi(i as i32)).collect()
}

proptest! {
    #[test]
    fn power_family_passes_at_its_largest_alpha(
        chat in 0.1f64..10.0,
        k in 1.05f64..6.0,
        eta in 0.0f64..5.0,
    ) {
        let s = SensitivitySpec::power(chat, k).unwrap().with_eta_floor(eta).unwrap();
        let alpha = s.max_alpha().unwrap();
        let report = s.validate_hypotheses(alpha);
        prop_assert!(report.all_pass(), "{report:?}");
        let bound = report.c_bound.unwrap();
        for x in s.hypothesis_sample() {
            prop_assert!(x * s.value(x).unwrap() <= bound, "s = {x}");
        }
    }

    #[test]
    fn derivative_matches_centered_differences(
        chat in 0.1f64..10.0,
        k in 1.05f64..6.0,
        s in 0.0f64..100.0,
    ) {
        let f = SensitivitySpec::power(chat, k).unwrap();
        let h = 1e-4 * (1.0 + s);
        let fd = (f.value(s + h).unwrap() - f.value(s - h).unwrap()) / (2.0 * h);
        let exact = f.derivative(s).unwrap();
        prop_assert!(((fd - exact) / exact).abs() <= 1e-6, "fd {fd} exact {exact}");
    }

    #[test]
    fn tail_decreases_to_zero(chat in 0.1f64..10.0, k in 1.05f64..6.0, eta in 0.0f64..5.0) {
        let f = SensitivitySpec::power(chat, k).unwrap().with_eta_floor(eta).unwrap();
        let tails: Vec<f64> = geometric(eta, 120).iter().map(|&s| f.tail(s).unwrap()).collect();
        for w in tails.windows(2) {
            prop_assert!(w[1] < w[0], "{:?}", w);
        }
        // Far enough out for any k > 1.05: (1 + s)^(1 - k) < 1e-15.
        prop_assert!(f.tail(1e300).unwrap() < 1e-3 * f.tail(eta).unwrap());
    }

    #[test]
    fn tabulated_tail_decreases(k in 1.2f64..4.0) {
        let exact = SensitivitySpec::power(1.0, k).unwrap();
        let nodes: Vec<(f64, f64)> = (0..40).map(|i| {
            let s = 0.25 * i as f64;
            (s, exact.value(s).unwrap())
        }).collect();
        let f = SensitivitySpec::tabulated(&nodes).unwrap();
        let tails: Vec<f64> = geometric(0.0, 100).iter().map(|&s| f.tail(s).unwrap()).collect();
        for w in tails.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn denominator_positive_exactly_inside_j(
        n in 2u32..6,
        excess in 1e-3f64..20.0,
        t in 0.0f64..1.0,
    ) {
        let beta = n as f64 + (n as f64 / 2.0).sqrt() + excess;
        let (lo, hi) = interval_j(n, beta).unwrap();
        let delta = 2.0 * hi * t;
        let margin = 1e-9 * hi;
        prop_assume!((delta - lo).abs() > margin && (delta - hi).abs() > margin);
        let inside = delta > lo && delta < hi;
        prop_assert_eq!(threshold_denominator(n, beta, delta) > 0.0, inside);
        if inside {
            prop_assert!(discriminant_d(n, beta, delta) >= 0.0);
        }
    }

    #[test]
    fn eta_is_monotone_and_capped(
        z0 in 0.0f64..50.0,
        m in 0.0f64..50.0,
        c0 in 0.0f64..2.0,
        dz in 0.0f64..5.0,
        dm in 0.0f64..5.0,
        dc in 0.0f64..0.5,
    ) {
        let e = eta_bound(z0, m, c0);
        prop_assert!(e >= 0.0);
        prop_assert!(eta_bound(z0 + dz, m, c0) >= e);
        prop_assert!(eta_bound(z0, m + dm, c0) >= e);
        prop_assert!(eta_bound(z0, m, c0 + dc) >= e);
        if z0 > 0.0 {
            prop_assert!(e <= z0);
        }
    }

    #[test]
    fn theta_lies_in_unit_interval(n in 2u32..6, t in 1e-6f64..1.0) {
        let half = n as f64 / 2.0;
        let p = half + t * (50.0 - half);
        let theta = theta_exponent(p, n);
        prop_assert!(theta > 0.0 && theta < 1.0, "p = {p}, theta = {theta}");
    }
}

#[test]
fn witness_form_is_nonpositive_on_random_octant_points() {
    let w = find_witness(2, 20.0, 4.0).unwrap();
    let c = w.coefficients;
    let bound = 1e-9 * c.scale() * 100.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1_000_000 {
        let (x, y, z) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0));
        worst = worst.max(c.form(x, y, z));
    }
    assert!(worst <= bound, "max Q = {worst}, bound {bound}");
}

fn bump_grid() -> Grid {
    Grid::new_2d([1.0, 1.0], [12, 12]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_conserves_mass_and_positivity(seed in any::<u64>(), chat in 0.5f64..4.0) {
        let grid = bump_grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = |lo: f64, hi: f64| (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect::<Vec<_>>();
        let state = SystemState::new(&grid, field(0.0, 10.0), field(0.5, 5.0), field(0.5, 5.0)).unwrap();
        let chi = SensitivitySpec::power(chat, 2.0).unwrap();
        let xi = SensitivitySpec::power(1.0, 3.0).unwrap();
        let scheme = SchemeConfig::default();
        let mut s = state;
        for _ in 0..5 {
            let (next, report) = step(&s, &grid, &scheme, &chi, &xi).unwrap();
            prop_assert!(report.mass_drift.abs() <= 10.0 * scheme.linear_tol, "{report:?}");
            prop_assert!(report.positivity_violation <= 1e-12 * report.u_max.max(1.0), "{report:?}");
            s = next;
        }
    }

    #[test]
    fn constant_state_is_a_fixed_point(c in 0.0f64..100.0) {
        let grid = bump_grid();
        let state = SystemState::uniform(&grid, c, c, c).unwrap();
        let chi = SensitivitySpec::power(1.0, 2.0).unwrap();
        let (next, _) = step_with_dt(&state, &grid, &SchemeConfig::default(), &chi, &chi, 0.01).unwrap();
        for f in [&next.u, &next.v, &next.w] {
            for x in f.iter() {
                prop_assert!((x - c).abs() <= 1e-12 * c.max(1.0));
            }
        }
    }

    #[test]
    fn reflection_symmetry_is_preserved(amp in 1.0f64..30.0, width in 0.05f64..0.3) {
        let n = 16;
        let grid = Grid::new_2d([1.0, 1.0], [n, n]).unwrap();
        // Symmetric under x -> 1 - x and under swapping x and y.
        let bump = |c: [f64; 2]| {
            let r2 = (c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2) + 0.3 * ((c[0] - 0.5) * (c[1] - 0.5)).abs();
            1.0 + amp * (-r2 / (width * width)).exp()
        };
        let u = grid.sample(bump);
        let v = grid.sample(|c| 2.0 + (c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2));
        let mut s = SystemState::new(&grid, u, v.clone(), v).unwrap();
        let chi = SensitivitySpec::power(2.0, 2.0).unwrap();
        let xi = SensitivitySpec::power(1.0, 2.0).unwrap();
        let scheme = SchemeConfig::default();
        for _ in 0..10 {
            s = step(&s, &grid, &scheme, &chi, &xi).unwrap().0;
            let scale = s.u.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for i in 0..n {
                for j in 0..n {
                    let a = s.u[grid.index(i, j)];
                    prop_assert!((a - s.u[grid.index(n - 1 - i, j)]).abs() <= 1e-12 * scale);
                    prop_assert!((a - s.u[grid.index(j, i)]).abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn csv_rows_round_trip(vals in prop::collection::vec(prop_oneof![
        any::<f64>(),
        Just(f64::NAN),
        Just(f64::INFINITY),
        Just(f64::NEG_INFINITY),
        -1e3f64..1e3,
    ], 13), excluded in any::<u32>(), blowup in any::<bool>()) {
        let r = DiagnosticsRecord {
            t: vals[0], mass_u: vals[1], linf_u: vals[2], linf_v: vals[3], linf_w: vals[4],
            min_v: vals[5], min_w: vals[6], grad_linf_v: vals[7], grad_linf_w: vals[8],
            energy_p: vals[9], f_min: vals[10], f_max: vals[11], q_max: vals[12],
            excluded_cells: excluded as usize, blowup,
        };
        let back = DiagnosticsRecord::from_csv_row(&r.to_csv_row()).unwrap();
        prop_assert_eq!(back.to_csv_row(), r.to_csv_row());
        let bits = |x: &DiagnosticsRecord| [x.t, x.mass_u, x.linf_u, x.linf_v, x.linf_w, x.min_v, x.min_w,
            x.grad_linf_v, x.grad_linf_w, x.energy_p, x.f_min, x.f_max, x.q_max].map(|v| if v.is_nan() { u64::MAX } else { v.to_bits() });
        prop_assert_eq!(bits(&back), bits(&r));
        prop_assert_eq!(back.excluded_cells, r.excluded_cells);
        prop_assert_eq!(back.blowup, r.blowup);
    }

    #[test]
    fn unit_weight_linear_energy_is_mass(seed in any::<u64>()) {
        let grid = Grid::new_2d([2.0, 0.5], [9, 7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..20.0)).collect();
        let state = SystemState::new(&grid, u.clone(), vec![1.0; grid.len()], vec![1.0; grid.len()]).unwrap();
        prop_assert_eq!(weighted_energy(&u, 1.0, &vec![1.0; grid.len()], &grid), state.mass(&grid));
    }
}

#[test]
fn halving_h_divides_decay_error_by_about_four() {
    let table = decay_study(&[16, 32, 64, 128], DtPolicy::ScaledH2(DT_PER_H2), 0.1).unwrap();
    for w in table.rows.windows(2) {
        let ratio = w[0].linf_error / w[1].linf_error;
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio} in {table:?}");
    }
}

#[test]
fn checkerboard_signal_keeps_density_positive() {
    // Every low cell drains through all four faces at the maximal speed, and
    // transport dominates diffusion at this sensitivity. A per-axis limit
    // `cfl h / vmax` would drain twice the cell content here.
    let grid = Grid::new_2d([1.0, 1.0], [10, 10]).unwrap();
    let v: Vec<f64> = (0..100).map(|k| if (k / 10 + k % 10) % 2 == 0 { 1.0 } else { 3.0 }).collect();
    let state = SystemState::new(&grid, vec![5.0; 100], v, vec![1.0; 100]).unwrap();
    let chi = SensitivitySpec::power(400.0, 2.0).unwrap();
    let xi = SensitivitySpec::power(1.0, 2.0).unwrap();
    let scheme = SchemeConfig { dt_max: 1.0, ..SchemeConfig::default() };
    let (_, report) = step(&state, &grid, &scheme, &chi, &xi).unwrap();
    assert!(report.positivity_violation <= 1e-12 * report.u_max.max(1.0), "{report:?}");
}

#[test]
fn auto_step_respects_advective_limit() {
    let grid = bump_grid();
    let u = grid.sample(|c| 1.0 + 10.0 * (-20.0 * (c[0] - 0.3).powi(2)).exp());
    let v = grid.sample(|c| 1.0 + 5.0 * c[0] * c[0]);
    let state = SystemState::new(&grid, u, v.clone(), v).unwrap();
    let chi = SensitivitySpec::power(5.0, 2.0).unwrap();
    let scheme = SchemeConfig { dt_max: 1.0, ..SchemeConfig::default() };
    let dt = dt_stable(&state, &grid, &scheme, &chi, &chi);
    assert!(dt < 1.0 && dt > 0.0);
}
