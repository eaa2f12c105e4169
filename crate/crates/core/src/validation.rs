//! The acceptance battery. Closed-form oracles and low-power laws come
//! first, then rate anchors for the MAC and BC, then Monte Carlo
//! cross-checks and structural invariants.
//!
//! Each check returns a [`CriterionOutcome`] rather than panicking, so the
//! same code drives the test suite and the `validate` command.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bc::{
    bc_region_trace, timesharing_optimality_test, timesharing_region, BcPolicy, BcProblem,
    SplitVector,
};
use crate::error::Result;
use crate::fading::FadingModel;
use crate::mac::{
    asymptotic_equivalence_ratios, coupled_g, coupled_rate, csir_mac_region, mac_sumrate_point,
    onoff_mac_policy, onoff_rates_for, rectangle_region, single_user_capacities,
    solve_mac_water_levels, MacProblem, MacUser,
};
use crate::montecarlo::{simulate, SimConfig, SimReport};
use crate::single_user::{
    asymptotic_capacity, capacity_csit, capacity_via_g_inverse, g_function, onoff_policy_1u,
    onoff_rate, solve_water_level,
};
use crate::special::exp_integral_e1;

/// Every tolerance used by the battery; deserializable so a run can be
/// repeated under perturbed settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub closed_form_rel: f64,
    pub dual_route_rel: f64,
    pub asymptote_band: (f64, f64),
    pub level_law_band: (f64, f64),
    pub rayleigh_level_max: f64,
    pub eta_0db: (f64, f64),
    pub eta_m10db_min: f64,
    pub eta_m30db: (f64, f64),
    pub sumrate_ratio_min: f64,
    pub equivalence_tol: f64,
    pub timeshare_capacity_band: (f64, f64),
    pub timeshare_lambda_rel: f64,
    pub mc_sigmas: f64,
    pub mc_samples: u64,
    pub mc_seed: u64,
    pub mc_seconds: f64,
    pub structural_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            closed_form_rel: 1e-7,
            dual_route_rel: 1e-6,
            asymptote_band: (0.999, 1.0),
            level_law_band: (0.995, 1.001),
            rayleigh_level_max: 1.05,
            eta_0db: (0.87, 0.93),
            eta_m10db_min: 0.93,
            eta_m30db: (0.93, 0.97),
            sumrate_ratio_min: 0.98,
            equivalence_tol: 0.01,
            timeshare_capacity_band: (1.0, 1.06),
            timeshare_lambda_rel: 0.02,
            mc_sigmas: 3.0,
            mc_samples: 1_000_000,
            mc_seed: 20_140_601,
            mc_seconds: 60.0,
            structural_rel: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2}: {} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        )
    }
}

/// Collects sub-checks and their diagnostics.
struct Checks {
    passed: bool,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, note: String) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("FAILED {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }
}

fn outcome(
    id: u32,
    title: &'static str,
    body: impl FnOnce(&mut Checks) -> Result<()>,
) -> CriterionOutcome {
    let mut c = Checks::new();
    let (passed, detail) = match body(&mut c) {
        Ok(()) => (c.passed, c.notes.join("; ")),
        Err(e) => (false, format!("numerical failure: {e}")),
    };
    CriterionOutcome {
        id,
        title,
        passed,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn rayleigh() -> FadingModel {
    FadingModel::rayleigh(1.0).expect("unit mean is valid")
}

const ORACLE_LEVELS: [f64; 7] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

/// Closed-form Rayleigh oracle through the exponential integral.
pub fn criterion_1(t: &Thresholds) -> CriterionOutcome {
    outcome(1, "Rayleigh closed forms via E1", |c| {
        let m = rayleigh();
        let (mut worst_g, mut worst_c) = (0.0f64, 0.0f64);
        for &l in &ORACLE_LEVELS {
            let e1 = exp_integral_e1(l);
            let g_closed = (-l).exp() / l - e1;
            worst_g = worst_g.max(rel(g_function(&m, l)?, g_closed));
            worst_c = worst_c.max(rel(capacity_csit(&m, g_closed)?, e1));
        }
        c.check(
            worst_g < t.closed_form_rel,
            format!("max rel err G {worst_g:.2e}"),
        );
        c.check(
            worst_c < t.closed_form_rel,
            format!("max rel err C {worst_c:.2e}"),
        );
        Ok(())
    })
}

/// Closed-form log-logistic oracle.
pub fn criterion_2(t: &Thresholds) -> CriterionOutcome {
    outcome(2, "log-logistic closed forms", |c| {
        let m = FadingModel::log_logistic();
        let (mut worst_g, mut worst_c) = (0.0f64, 0.0f64);
        for &l in &ORACLE_LEVELS {
            let c_closed = (1.0 / l).ln_1p();
            let g_closed = 1.0 / (l * (1.0 + l)) + 1.0 / (1.0 + l) - c_closed;
            worst_g = worst_g.max(rel(g_function(&m, l)?, g_closed));
            worst_c = worst_c.max(rel(capacity_csit(&m, g_closed)?, c_closed));
        }
        c.check(
            worst_g < t.closed_form_rel,
            format!("max rel err G {worst_g:.2e}"),
        );
        c.check(
            worst_c < t.closed_form_rel,
            format!("max rel err C {worst_c:.2e}"),
        );
        Ok(())
    })
}

/// Capacity by direct integration against `∫₀^P̄ G⁻¹`.
pub fn criterion_3(t: &Thresholds) -> CriterionOutcome {
    outcome(3, "dual-route capacity equality", |c| {
        for m in [rayleigh(), FadingModel::log_logistic()] {
            let mut worst = 0.0f64;
            for k in 1..=8 {
                let p = 10f64.powi(-k);
                let a = capacity_csit(&m, p)?;
                let b = capacity_via_g_inverse(&m, p)?;
                worst = worst.max(rel(b, a));
            }
            c.check(
                worst < t.dual_route_rel,
                format!("{} max rel gap {worst:.2e}", m.name()),
            );
        }
        Ok(())
    })
}

/// Low-power capacity asymptote `(1 + 1/l) λ P̄`.
pub fn criterion_4(t: &Thresholds) -> CriterionOutcome {
    outcome(4, "low-power capacity asymptote", |c| {
        let ll = FadingModel::log_logistic();
        let p = 1e-6;
        let exact = capacity_csit(&ll, p)?;
        let asym = asymptotic_capacity(&ll, p)?;
        let r = asym / exact;
        c.check(
            r >= t.asymptote_band.0 && r <= t.asymptote_band.1,
            format!(
                "log-logistic asymptote/C = {r:.6} (C/asymptote = {:.6})",
                exact / asym
            ),
        );
        let m = rayleigh();
        let ratios = (3..=8)
            .map(|k| {
                let p = 10f64.powi(-k);
                Ok(asymptotic_capacity(&m, p)? / capacity_csit(&m, p)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        let below_one = ratios.iter().all(|r| *r <= 1.0);
        c.check(
            increasing && below_one,
            format!(
                "Rayleigh asymptote/C over 1e-3..1e-8 = [{}]",
                ratios
                    .iter()
                    .map(|r| format!("{r:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
        Ok(())
    })
}

/// Square-root water-level law for log-logistic fading.
pub fn criterion_5(t: &Thresholds) -> CriterionOutcome {
    outcome(5, "log-logistic water-level law", |c| {
        let p: f64 = 1e-6;
        let l = solve_water_level(&FadingModel::log_logistic(), p)?.lambda;
        let v = l * (2.0 * p).sqrt();
        c.check(
            v >= t.level_law_band.0 && v <= t.level_law_band.1,
            format!("lambda*sqrt(2P) = {v:.6}"),
        );
        Ok(())
    })
}

/// Rayleigh water level against `ln(1/P̄) - 2 ln ln(1/P̄)`.
pub fn criterion_6(t: &Thresholds) -> CriterionOutcome {
    outcome(6, "Rayleigh water-level trend", |c| {
        let m = rayleigh();
        let ratios = [1e-6f64, 1e-8, 1e-10]
            .iter()
            .map(|&p| {
                let big = (1.0 / p).ln();
                Ok(solve_water_level(&m, p)?.lambda / (big - 2.0 * big.ln()))
            })
            .collect::<Result<Vec<_>>>()?;
        c.check(
            ratios.windows(2).all(|w| w[1] < w[0]),
            format!(
                "ratios [{:.4}, {:.4}, {:.4}] strictly decreasing",
                ratios[0], ratios[1], ratios[2]
            ),
        );
        c.check(
            ratios[2] <= t.rayleigh_level_max,
            format!("ratio at 1e-10 = {:.4}", ratios[2]),
        );
        Ok(())
    })
}

/// On-off rate over single-user capacity for two symmetric Rayleigh users.
pub fn eta_symmetric(budget: f64) -> Result<f64> {
    let p = MacProblem::symmetric(rayleigh(), 2, budget)?;
    let policy = onoff_mac_policy(&p)?;
    let r = onoff_rates_for(&p, &policy)?;
    Ok(r.rates[0] / capacity_csit(&rayleigh(), budget)?)
}

/// Expected η bands for the two-user on-off MAC.
pub fn criterion_7(t: &Thresholds) -> CriterionOutcome {
    outcome(7, "two-user on-off eta anchors", |c| {
        let db: Vec<i32> = (0..=6).map(|i| -10 * i).collect();
        let eta = db
            .iter()
            .map(|&d| eta_symmetric(10f64.powf(d as f64 / 10.0)))
            .collect::<Result<Vec<_>>>()?;
        c.check(
            eta[0] >= t.eta_0db.0 && eta[0] <= t.eta_0db.1,
            format!("eta(0 dB) = {:.4}", eta[0]),
        );
        c.check(
            eta[1] >= t.eta_m10db_min,
            format!("eta(-10 dB) = {:.4}", eta[1]),
        );
        c.check(
            eta[3] >= t.eta_m30db.0 && eta[3] <= t.eta_m30db.1,
            format!("eta(-30 dB) = {:.4}", eta[3]),
        );
        c.check(
            eta.windows(2).all(|w| w[1] >= w[0]),
            format!(
                "sweep 0..-60 dB [{}] nondecreasing",
                eta.iter()
                    .map(|e| format!("{e:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
        Ok(())
    })
}

/// Convergence of the sum-rate point to the single-user corner.
pub fn criterion_8(t: &Thresholds) -> CriterionOutcome {
    outcome(8, "sum-rate point approaches the rectangle corner", |c| {
        let budgets = [1.0, 1e-2, 1e-4, 1e-6];
        let mut ratios = Vec::new();
        let mut equivalence = Vec::new();
        for &b in &budgets {
            let p = MacProblem::symmetric(rayleigh(), 2, b)?;
            let w = solve_mac_water_levels(&p)?;
            let point = crate::mac::sumrate_point_at(&p, &w.lambdas)?;
            let caps = single_user_capacities(&p)?;
            ratios.push([point.rates[0] / caps[0], point.rates[1] / caps[1]]);
            equivalence.push(asymptotic_equivalence_ratios(&p, &w.lambdas)?);
        }
        let nondecreasing = ratios
            .windows(2)
            .all(|w| w[1][0] >= w[0][0] && w[1][1] >= w[0][1]);
        c.check(
            nondecreasing,
            format!(
                "R*/C over 1..1e-6 = [{}]",
                ratios
                    .iter()
                    .map(|r| format!("{:.6}", r[0]))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        );
        let last = ratios.last().unwrap();
        c.check(
            last[0] >= t.sumrate_ratio_min && last[1] >= t.sumrate_ratio_min,
            format!("R*/C at 1e-6 = ({:.6}, {:.6})", last[0], last[1]),
        );
        let eq = equivalence.last().unwrap();
        c.check(
            eq.iter().all(|r| (r - 1.0).abs() <= t.equivalence_tol),
            format!("coupled/single G at 1e-6 = ({:.6}, {:.6})", eq[0], eq[1]),
        );
        Ok(())
    })
}

fn heterogeneous_users(budget: f64) -> Result<MacProblem> {
    MacProblem::new(vec![
        MacUser {
            model: rayleigh(),
            budget,
        },
        MacUser {
            model: FadingModel::rayleigh(2.0)?,
            budget,
        },
        MacUser {
            model: FadingModel::nakagami(2.0, 1.0)?,
            budget,
        },
    ])
}

/// Coupled water levels grow as the common budget shrinks.
pub fn criterion_9(_t: &Thresholds) -> CriterionOutcome {
    outcome(9, "coupled water levels diverge at low power", |c| {
        let levels = (2..=6)
            .map(|k| Ok(solve_mac_water_levels(&heterogeneous_users(10f64.powi(-k))?)?.lambdas))
            .collect::<Result<Vec<_>>>()?;
        for user in 0..3 {
            let seq: Vec<f64> = levels.iter().map(|l| l[user]).collect();
            c.check(
                seq.windows(2).all(|w| w[1] > w[0]),
                format!(
                    "user {} levels over 1e-2..1e-6 [{}]",
                    user + 1,
                    seq.iter()
                        .map(|l| format!("{l:.4}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            );
        }
        Ok(())
    })
}

/// Time sharing: optimal for Rayleigh, strictly suboptimal for log-logistic.
pub fn criterion_10(t: &Thresholds) -> CriterionOutcome {
    outcome(10, "time-sharing dichotomy", |c| {
        let r = timesharing_optimality_test(&rayleigh(), 0.5, &[1e-4, 1e-6, 1e-8])?;
        let caps: Vec<f64> = r.rows.iter().map(|x| x.ratio_capacity).collect();
        let last = caps[2];
        c.check(
            last >= t.timeshare_capacity_band.0 && last <= t.timeshare_capacity_band.1,
            format!("Rayleigh ratio_capacity(1e-8) = {last:.5}"),
        );
        c.check(
            caps.windows(2).all(|w| w[1] < w[0]),
            format!(
                "Rayleigh ratio_capacity decreasing [{:.5}, {:.5}, {:.5}]",
                caps[0], caps[1], caps[2]
            ),
        );
        c.note(format!("Rayleigh verdict {:?}", r.verdict));
        let ll = timesharing_optimality_test(&FadingModel::log_logistic(), 0.5, &[1e-6])?;
        let rl = ll.rows[0].ratio_lambda;
        c.check(
            rel(rl, std::f64::consts::SQRT_2) <= t.timeshare_lambda_rel,
            format!("log-logistic ratio_lambda(1e-6) = {rl:.5}"),
        );
        Ok(())
    })
}

fn within(c: &mut Checks, label: &str, mc: f64, se: f64, exact: f64, sigmas: f64) {
    let z = if se > 0.0 {
        (mc - exact) / se
    } else if mc == exact {
        0.0
    } else {
        f64::INFINITY
    };
    c.check(
        z.abs() <= sigmas,
        format!("{label}: mc {mc:.6e} vs {exact:.6e} ({z:+.2} se)"),
    );
}

fn check_report(
    c: &mut Checks,
    label: &str,
    r: &SimReport,
    rates: &[f64],
    powers: &[f64],
    sigmas: f64,
) {
    for (k, u) in r.users.iter().enumerate() {
        within(
            c,
            &format!("{label} rate{}", k + 1),
            u.empirical_rate,
            u.standard_error_rate,
            rates[k],
            sigmas,
        );
        within(
            c,
            &format!("{label} power{}", k + 1),
            u.empirical_power,
            u.standard_error_power,
            powers[k],
            sigmas,
        );
    }
}

/// Monte Carlo agreement with the quadrature values.
pub fn criterion_11(t: &Thresholds) -> CriterionOutcome {
    outcome(11, "Monte Carlo agrees with quadrature", |c| {
        let start = Instant::now();
        let sim = SimConfig::with_default_batch(t.mc_samples, t.mc_seed)?;
        let sig = t.mc_sigmas;
        let m = rayleigh();
        let budget = 1e-3;

        let policy = onoff_policy_1u(&m, budget)?;
        let rate = onoff_rate(&m, &policy)?;
        let r = simulate(&[m], &policy, &sim)?;
        check_report(c, "on-off", &r, &[rate], &[budget], sig);

        let mac = MacProblem::symmetric(m, 2, budget)?;
        let policy = onoff_mac_policy(&mac)?;
        let rates = onoff_rates_for(&mac, &policy)?;
        let r = simulate(&mac.models(), &policy, &sim)?;
        check_report(c, "mac on-off", &r, &rates.rates, &[budget, budget], sig);

        let bc = BcProblem::new(vec![m, m], budget)?;
        let split = SplitVector::new(vec![0.5, 0.5])?;
        let shares = [0.5 * budget, 0.5 * budget];
        let targets = [capacity_csit(&m, shares[0])?, capacity_csit(&m, shares[1])?];
        // Levels solved per user, as the policy prescribes.
        let policy = BcPolicy::decoupled(&bc, &split)?;
        let r = simulate(&bc.users, &policy, &sim)?;
        check_report(c, "bc", &r, &targets, &shares, sig);
        // The same policy evaluated exactly as a dual MAC.
        let (dual, lambdas, _) = policy.dual_mac(&bc)?;
        let exact_rate = [
            coupled_rate(&dual, 0, &lambdas)?,
            coupled_rate(&dual, 1, &lambdas)?,
        ];
        let exact_power = [
            coupled_g(&dual, 0, &lambdas)?,
            coupled_g(&dual, 1, &lambdas)?,
        ];
        check_report(c, "bc exact", &r, &exact_rate, &exact_power, sig);

        let secs = start.elapsed().as_secs_f64();
        c.check(secs < t.mc_seconds, format!("runtime {secs:.1} s"));
        Ok(())
    })
}

/// Sandwich bounds, exclusive activation and region nesting.
pub fn criterion_12(t: &Thresholds) -> CriterionOutcome {
    outcome(12, "structural invariants", |c| {
        let tol = t.structural_rel;
        let pair = MacProblem::new(vec![
            MacUser {
                model: rayleigh(),
                budget: 1e-2,
            },
            MacUser {
                model: FadingModel::nakagami(2.0, 2.0)?,
                budget: 1e-3,
            },
        ])?;
        let grid = [0.2, 1.0, 3.0, 8.0];
        let mut violations = 0;
        let mut evaluated = 0;
        for &l1 in &grid {
            for &l2 in &grid {
                let lambdas = [l1, l2];
                for k in 0..2 {
                    let other = 1 - k;
                    let user = &pair.users()[k];
                    let single = g_function(&user.model, lambdas[k])?;
                    let lower = pair.users()[other].model.cdf(lambdas[other]) * single;
                    let g = coupled_g(&pair, k, &lambdas)?;
                    evaluated += 1;
                    if !(g >= lower * (1.0 - tol) && g <= single * (1.0 + tol)) {
                        violations += 1;
                    }
                }
            }
        }
        c.check(
            violations == 0,
            format!("sandwich bounds at {evaluated} points, {violations} violations"),
        );

        let sim = SimConfig::with_default_batch(200_000, t.mc_seed)?;
        let m = rayleigh();
        let mac = MacProblem::symmetric(m, 2, 1e-2)?;
        let r = simulate(&mac.models(), &onoff_mac_policy(&mac)?, &sim)?;
        c.check(
            r.overlap_fraction == 0.0,
            format!("mac on-off overlap {}", r.overlap_fraction),
        );
        let bc = BcProblem::new(vec![m, FadingModel::rayleigh(2.0)?], 1e-2)?;
        let policy = BcPolicy::decoupled(&bc, &SplitVector::new(vec![0.4, 0.6])?)?;
        let r = simulate(&bc.users, &policy, &sim)?;
        c.check(
            r.overlap_fraction == 0.0,
            format!("bc overlap {}", r.overlap_fraction),
        );

        let splits = SplitVector::grid_2user(101)?;
        for model in [m, FadingModel::log_logistic()] {
            let bc = BcProblem::new(vec![model, model], 1e-3)?;
            let dual = bc_region_trace(&bc, &splits)?;
            let ts = timesharing_region(&bc, &splits)?;
            let pointwise = ts
                .points
                .iter()
                .zip(&dual.points)
                .all(|(a, b)| a.dominated_by(b, tol));
            c.check(
                pointwise,
                format!("{} timeshare within bc dual", model.name()),
            );
        }

        let low = MacProblem::symmetric(m, 2, 1e-3)?;
        let rect = rectangle_region(&low)?;
        let csir = csir_mac_region(&low, &sim)?;
        c.check(
            csir.is_subset_of(&rect, tol),
            "csir within rectangle at 1e-3".into(),
        );
        for &b in &[1.0, 1e-2, 1e-4] {
            let p = MacProblem::symmetric(m, 2, b)?;
            let corner = single_user_capacities(&p)?;
            let onoff = onoff_rates_for(&p, &onoff_mac_policy(&p)?)?;
            let sum = mac_sumrate_point(&p)?;
            let ok = onoff
                .rates
                .iter()
                .zip(&corner)
                .all(|(r, c)| *r <= c * (1.0 + tol))
                && sum
                    .rates
                    .iter()
                    .zip(&corner)
                    .all(|(r, c)| *r <= c * (1.0 + tol));
            c.check(
                ok,
                format!("on-off and sum-rate points below corner at {b:e}"),
            );
        }
        Ok(())
    })
}

pub type CriterionFn = fn(&Thresholds) -> CriterionOutcome;

pub const CRITERIA: [CriterionFn; 12] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
    criterion_11,
    criterion_12,
];

/// Runs every criterion in order.
pub fn run_all(t: &Thresholds) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|f| f(t)).collect()
}
