use lowsnr::fading::FadingModel;
use lowsnr::mac::{
    awgn_mac_region, coupled_g, csir_mac_region, mac_sumrate_point, onoff_mac_rates,
    rectangle_region, sepup_region, single_user_capacities, solve_mac_water_levels, tdma_symmetric,
    MacProblem, MacUser,
};
use lowsnr::montecarlo::SimConfig;
use lowsnr::single_user::capacity_csit;
use proptest::prelude::*;

fn mixed(budgets: [f64; 3]) -> MacProblem {
    let models = [
        FadingModel::rayleigh(1.0).unwrap(),
        FadingModel::nakagami(2.0, 0.5).unwrap(),
        FadingModel::log_logistic(),
    ];
    MacProblem::new(
        models
            .iter()
            .zip(budgets)
            .map(|(&model, budget)| MacUser { model, budget })
            .collect(),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn levels_meet_every_budget() {
    let p = mixed([1e-3, 2e-3, 5e-4]);
    let w = solve_mac_water_levels(&p).unwrap();
    assert!(w.residual <= 1e-10, "{}", w.residual);
    for (k, u) in p.users().iter().enumerate() {
        let g = coupled_g(&p, k, &w.lambdas).unwrap();
        assert!(rel(g, u.budget) < 1e-9);
    }
}

#[test]
fn relabelling_users_relabels_levels_and_rates() {
    let p = mixed([1e-3, 2e-3, 5e-4]);
    let perm = [2, 0, 1];
    let q = p.permuted(&perm).unwrap();
    let (lp, lq) = (
        solve_mac_water_levels(&p).unwrap().lambdas,
        solve_mac_water_levels(&q).unwrap().lambdas,
    );
    let (rp, rq) = (
        mac_sumrate_point(&p).unwrap(),
        mac_sumrate_point(&q).unwrap(),
    );
    for (i, &j) in perm.iter().enumerate() {
        assert!(rel(lq[i], lp[j]) < 1e-8, "level {i}");
        assert!(rel(rq.rates[i], rp.rates[j]) < 1e-8, "rate {i}");
    }
}

#[test]
fn symmetric_tdma_coincides_with_the_sum_rate_point() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    for k in [2, 3] {
        let p = MacProblem::symmetric(m, k, 1e-4).unwrap();
        let star = mac_sumrate_point(&p).unwrap();
        let lambdas = solve_mac_water_levels(&p).unwrap().lambdas;
        let t = tdma_symmetric(&m, k, 1e-4).unwrap();
        assert!(rel(t.mean_power, k as f64 * 1e-4) < 1e-9);
        assert!(rel(t.lambda, lambdas[0]) < 1e-8);
        for r in &star.rates {
            assert!(
                rel(t.rate_per_user, *r) < 1e-7,
                "{k}: {} vs {r}",
                t.rate_per_user
            );
        }
    }
}

#[test]
fn tdma_approaches_the_single_user_corner() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    let ratios: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8]
        .iter()
        .map(|&p| tdma_symmetric(&m, 2, p).unwrap().rate_per_user / capacity_csit(&m, p).unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios.iter().all(|r| *r <= 1.0));
    assert!(ratios[3] > 0.99, "{ratios:?}");
}

#[test]
fn normalized_regions_grow_as_budgets_shrink() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    let regions: Vec<_> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&p| {
            let prob = MacProblem::symmetric(m, 2, p).unwrap();
            sepup_region(&rectangle_region(&prob).unwrap(), &[p, p]).unwrap()
        })
        .collect();
    assert!(regions[0].is_subset_of(&regions[1], 1e-12));
    assert!(regions[1].is_subset_of(&regions[2], 1e-12));
    assert!(!regions[2].is_subset_of(&regions[1], 1e-12));
}

#[test]
fn awgn_pentagon_sits_inside_the_fading_rectangle() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    let p = MacProblem::symmetric(m, 2, 1e-4).unwrap();
    let awgn = awgn_mac_region(&[1.0, 1.0], &[1e-4, 1e-4]).unwrap();
    let rect = rectangle_region(&p).unwrap();
    assert!(awgn.is_subset_of(&rect, 1e-12));
}

#[test]
fn receiver_only_knowledge_is_no_better_than_the_static_channel() {
    let m = FadingModel::rayleigh(1.0).unwrap();
    let p = MacProblem::symmetric(m, 2, 1e-3).unwrap();
    let sim = SimConfig::with_default_batch(100_000, 1).unwrap();
    let csir = csir_mac_region(&p, &sim).unwrap();
    let awgn = awgn_mac_region(&[1.0, 1.0], &[1e-3, 1e-3]).unwrap();
    assert!(csir.is_subset_of(&awgn, 1e-9));
}

#[test]
fn rectangle_corner_is_the_single_user_capacity_vector() {
    let p = mixed([1e-3, 2e-3, 5e-4]);
    let caps = single_user_capacities(&p).unwrap();
    let rect = rectangle_region(&p).unwrap();
    assert!(rect.points.iter().any(|pt| pt.rates == caps));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rates_are_sandwiched(e1 in -7.0f64..-1.0, e2 in -7.0f64..-1.0, e3 in -7.0f64..-1.0) {
        let p = mixed([10f64.powf(e1), 10f64.powf(e2), 10f64.powf(e3)]);
        let caps = single_user_capacities(&p).unwrap();
        let star = mac_sumrate_point(&p).unwrap();
        let onoff = onoff_mac_rates(&p).unwrap();
        for (r, c) in star.rates.iter().zip(&caps) {
            prop_assert!(*r <= c * (1.0 + 1e-9));
        }
        prop_assert!(onoff.sum() <= star.sum() * (1.0 + 1e-9));
        prop_assert!(star.sum() <= caps.iter().sum::<f64>() * (1.0 + 1e-9));
    }
}
