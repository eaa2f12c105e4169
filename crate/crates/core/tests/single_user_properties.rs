use lowsnr::fading::{FadingModel, GfrLimit};
use lowsnr::montecarlo::uniforms;
use lowsnr::numerics::{integrate_semiinf, QuadratureSpec};
use lowsnr::single_user::{
    capacity_csit, capacity_via_g_inverse, g_function, onoff_rate_1u, solve_water_level,
};
use proptest::prelude::*;
use rayon::prelude::*;

fn bundled() -> Vec<FadingModel> {
    vec![
        FadingModel::rayleigh(1.0).unwrap(),
        FadingModel::nakagami(2.0, 1.0).unwrap(),
        FadingModel::rician(3.0, 1.0).unwrap(),
        FadingModel::log_logistic(),
    ]
}

fn ks_distance(model: &FadingModel, n: u64, seed: u64) -> f64 {
    let mut xs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut u = [0.0];
            uniforms(seed, i, &mut u);
            model.sample(u[0]).unwrap()
        })
        .collect();
    xs.par_sort_unstable_by(f64::total_cmp);
    let nf = n as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = model.cdf(x);
            (f - i as f64 / nf)
                .abs()
                .max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn inverse_cdf_samples_match_their_law() {
    for m in bundled() {
        let d = ks_distance(&m, 1_000_000, 7);
        assert!(d < 0.002, "{}: KS distance {d}", m.name());
    }
}

#[test]
fn densities_integrate_to_one_from_the_origin() {
    for m in bundled() {
        let v = integrate_semiinf(|x| m.pdf(x), 0.0, |x| m.tail(x), &QuadratureSpec::default())
            .unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{}: {v}", m.name());
    }
}

fn level_grid() -> Vec<f64> {
    // 0.05 to 50, geometric.
    (0..=30)
        .map(|i| 0.05 * 10f64.powf(i as f64 / 10.0))
        .collect()
}

#[test]
fn g_is_positive_and_strictly_decreasing() {
    for m in bundled() {
        let gs: Vec<f64> = level_grid()
            .iter()
            .map(|&l| g_function(&m, l).unwrap())
            .collect();
        assert!(gs.iter().all(|g| *g > 0.0), "{}", m.name());
        assert!(gs.windows(2).all(|w| w[1] < w[0]), "{}", m.name());
    }
}

#[test]
fn scaled_g_vanishes() {
    for m in bundled() {
        let grid = level_grid();
        let scaled: Vec<f64> = grid[20..]
            .iter()
            .map(|&l| l * g_function(&m, l).unwrap())
            .collect();
        assert!(scaled.windows(2).all(|w| w[1] < w[0]), "{}", m.name());
        // lambda G(lambda) never exceeds the tail mass beyond lambda, which vanishes.
        for (&l, &v) in grid[20..].iter().zip(&scaled) {
            assert!(v <= m.tail(l) * (1.0 + 1e-9), "{} at {l}: {v}", m.name());
        }
        assert!(*scaled.last().unwrap() < 0.01, "{}", m.name());
    }
}

#[test]
fn g_over_tail_tracks_the_gfr_limit() {
    let far = 50.0;
    for m in bundled() {
        let v = far * g_function(&m, far).unwrap() / m.tail(far);
        match m.gfr_limit() {
            GfrLimit::Finite(l) => {
                let target = 1.0 / (1.0 + l);
                assert!(((v - target) / target).abs() < 0.02, "{}: {v}", m.name());
            }
            GfrLimit::Infinite => {
                let near = 5.0;
                let w = near * g_function(&m, near).unwrap() / m.tail(near);
                assert!(v < w && v < 0.1, "{}: {w} -> {v}", m.name());
            }
        }
    }
}

#[test]
fn dual_route_on_a_budget_grid() {
    for m in bundled() {
        for k in [2, 5, 8] {
            let p = 10f64.powi(-k);
            let a = capacity_csit(&m, p).unwrap();
            let b = capacity_via_g_inverse(&m, p).unwrap();
            assert!(
                ((a - b) / a).abs() < 1e-6,
                "{} at {p}: {a} vs {b}",
                m.name()
            );
        }
    }
}

#[test]
fn rayleigh_onoff_ratio_increases_as_budget_shrinks() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    let ratios: Vec<f64> = (2..=9)
        .map(|k| {
            let p = 10f64.powi(-k);
            onoff_rate_1u(&m, p).unwrap() / capacity_csit(&m, p).unwrap()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios.iter().all(|r| *r < 1.0));
    let at_1e6 = ratios[4];
    assert!(at_1e6 >= 0.9, "{at_1e6}");
}

#[test]
fn water_level_decreases_with_budget() {
    for m in bundled() {
        let mut prev = 0.0;
        for k in (0..=10).rev() {
            let l = solve_water_level(&m, 10f64.powi(-k)).unwrap().lambda;
            if prev > 0.0 {
                assert!(l < prev, "{}", m.name());
            }
            prev = l;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn capacity_is_concave(a_exp in -7.0f64..0.0, b_exp in -7.0f64..0.0, which in 0usize..4) {
        let m = bundled()[which];
        let (a, b) = (10f64.powf(a_exp), 10f64.powf(b_exp));
        let mid = capacity_csit(&m, 0.5 * (a + b)).unwrap();
        let chord = 0.5 * (capacity_csit(&m, a).unwrap() + capacity_csit(&m, b).unwrap());
        prop_assert!(mid >= chord * (1.0 - 1e-9), "{} {a} {b}: {mid} < {chord}", m.name());
    }

    #[test]
    fn onoff_never_beats_capacity(p_exp in -9.0f64..0.0, which in 0usize..4) {
        let m = bundled()[which];
        let p = 10f64.powf(p_exp);
        let r = onoff_rate_1u(&m, p).unwrap();
        let c = capacity_csit(&m, p).unwrap();
        prop_assert!(r <= c * (1.0 + 1e-9), "{}: {r} > {c}", m.name());
    }

    #[test]
    fn water_level_meets_budget(p_exp in -10.0f64..1.0, which in 0usize..4) {
        let m = bundled()[which];
        let p = 10f64.powf(p_exp);
        let w = solve_water_level(&m, p).unwrap();
        let g = g_function(&m, w.lambda).unwrap();
        prop_assert!(((g - p) / p).abs() < 1e-9);
    }
}
