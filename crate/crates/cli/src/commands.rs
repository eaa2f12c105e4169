use lowsnr::bc::{bc_region_trace, timesharing_region, BcProblem, SplitVector};
use lowsnr::fading::db_to_linear;
use lowsnr::mac::{
    awgn_mac_region, csir_mac_region, mac_sumrate_point, onoff_mac_rates, rectangle_region,
    sepup_region, tdma_symmetric, MacProblem, MacUser,
};
use lowsnr::montecarlo::SimConfig;
use lowsnr::single_user::{
    asymptotic_capacity, capacity_awgn, capacity_csir, capacity_csit, onoff_rate_1u,
    solve_water_level,
};
use lowsnr::validation::{run_all, CriterionOutcome, Thresholds};
use lowsnr::{FadingModel, RatePoint, RegionBoundary, RegionKind};
use rayon::prelude::*;

use crate::error::{bad, CliError};
use crate::output::{Cell, Table, Unit};

/// Samples behind the Monte Carlo CSI-R constraints when K > 2.
const CSIR_SAMPLES: u64 = 1_000_000;

fn rate_columns(prefix: &str, k: usize, suffix: &str) -> Vec<String> {
    (1..=k).map(|i| format!("{prefix}{i}_{suffix}")).collect()
}

fn point_region(kind: RegionKind, rates: Vec<f64>) -> Result<RegionBoundary, CliError> {
    Ok(RegionBoundary::from_points(
        kind,
        vec![RatePoint::new(rates)?],
    ))
}

fn need_users(models: &[FadingModel], command: &str) -> Result<(), CliError> {
    if models.len() < 2 {
        return Err(bad(format!(
            "{command} needs a spec with K >= 2 users, got K = {}",
            models.len()
        )));
    }
    Ok(())
}

fn need_identical(models: &[FadingModel], command: &str) -> Result<FadingModel, CliError> {
    need_users(models, command)?;
    if models.iter().any(|m| *m != models[0]) {
        return Err(bad(format!("{command} needs identical users")));
    }
    Ok(models[0])
}

pub fn single(models: &[FadingModel], budgets_db: &[f64], unit: Unit) -> Result<Table, CliError> {
    let [model] = models else {
        return Err(bad(format!(
            "single needs a one-user spec, got K = {}",
            models.len()
        )));
    };
    let mut table = Table::new(["budget_db", "budget", "lambda"]);
    for name in ["c_csit", "c_onoff", "c_asymptotic", "c_csir", "c_awgn"] {
        table.columns.push(format!("{name}_{unit}"));
    }
    table.columns.push("eta".into());
    table.rows = budgets_db
        .par_iter()
        .map(|&db| {
            let b = db_to_linear(db);
            let lambda = solve_water_level(model, b)?.lambda;
            let c = capacity_csit(model, b)?;
            let onoff = onoff_rate_1u(model, b)?;
            let rates = [
                c,
                onoff,
                asymptotic_capacity(model, b)?,
                capacity_csir(model, b)?,
                awgn_or_unbounded(model, b)?,
            ];
            let mut row = vec![Cell::Num(db), Cell::Num(b), Cell::Num(lambda)];
            row.extend(rates.iter().map(|r| Cell::Num(unit.rate(*r))));
            row.push(Cell::Num(onoff / c));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    Ok(table)
}

/// The static-channel baseline at the mean gain; heavy-tailed laws with an
/// infinite mean have no finite baseline.
fn awgn_or_unbounded(model: &FadingModel, budget: f64) -> Result<f64, CliError> {
    if model.mean().is_finite() {
        Ok(capacity_awgn(model.mean(), budget)?)
    } else {
        Ok(f64::INFINITY)
    }
}

fn per_user_budgets(k: usize, budgets_db: &[f64]) -> Result<Vec<f64>, CliError> {
    let lin: Vec<f64> = budgets_db.iter().map(|&d| db_to_linear(d)).collect();
    match lin.len() {
        1 => Ok(vec![lin[0]; k]),
        n if n == k => Ok(lin),
        n => Err(bad(format!(
            "give one budget or one per user ({k}), got {n}"
        ))),
    }
}

pub fn mac_region(
    models: &[FadingModel],
    budgets_db: &[f64],
    seed: u64,
    unit: Unit,
) -> Result<Table, CliError> {
    need_users(models, "mac-region")?;
    let k = models.len();
    let budgets = per_user_budgets(k, budgets_db)?;
    let problem = MacProblem::new(
        models
            .iter()
            .zip(&budgets)
            .map(|(&model, &budget)| MacUser { model, budget })
            .collect(),
    )?;
    let mut regions = vec![
        rectangle_region(&problem)?,
        point_region(RegionKind::Onoff, onoff_mac_rates(&problem)?.rates)?,
    ];
    let symmetric =
        models.iter().all(|m| *m == models[0]) && budgets.iter().all(|b| *b == budgets[0]);
    if symmetric {
        let t = tdma_symmetric(&models[0], k, budgets[0])?;
        regions.push(point_region(RegionKind::Tdma, vec![t.rate_per_user; k])?);
    } else {
        log::info!("users differ, so the symmetric TDMA point is skipped");
    }
    regions.push(point_region(
        RegionKind::Sumrate,
        mac_sumrate_point(&problem)?.rates,
    )?);
    let means: Vec<f64> = models.iter().map(FadingModel::mean).collect();
    if means.iter().all(|m| m.is_finite()) {
        regions.push(awgn_mac_region(&means, &budgets)?);
    } else {
        log::warn!("a user has an infinite mean gain, so the AWGN pentagon is skipped");
    }
    let sim = SimConfig::with_default_batch(CSIR_SAMPLES, seed)?;
    regions.push(csir_mac_region(&problem, &sim)?);

    let mut table = Table::new(rate_columns("R", k, &unit.to_string()));
    table.columns.push("kind".into());
    for r in &regions {
        table.push_region(&[], r, |x| unit.rate(x));
    }
    Ok(table)
}

pub fn bc_region(
    models: &[FadingModel],
    budgets_db: &[f64],
    grid: usize,
    unit: Unit,
) -> Result<Table, CliError> {
    if models.len() != 2 {
        return Err(bad(format!(
            "bc-region traces two users, got K = {}",
            models.len()
        )));
    }
    let [db] = budgets_db else {
        return Err(bad("bc-region takes one total budget"));
    };
    let problem = BcProblem::new(models.to_vec(), db_to_linear(*db))?;
    let splits = SplitVector::grid_2user(grid)?;
    let (dual, shared) = rayon::join(
        || bc_region_trace(&problem, &splits),
        || timesharing_region(&problem, &splits),
    );
    let mut table = Table::new(["alpha1".to_string()]);
    table
        .columns
        .extend(rate_columns("R", 2, &unit.to_string()));
    table.columns.push("kind".into());
    for region in [dual?, shared?] {
        for (s, p) in splits.iter().zip(&region.points) {
            let single = RegionBoundary::from_points(region.kind, vec![p.clone()]);
            table.push_region(&[Cell::Num(s.alphas()[0])], &single, |x| unit.rate(x));
        }
    }
    Ok(table)
}

pub fn eta_sweep(
    models: &[FadingModel],
    budgets_db: &[f64],
    unit: Unit,
) -> Result<Table, CliError> {
    let model = need_identical(models, "eta-sweep")?;
    let k = models.len();
    let mut table = Table::new(["budget_db".to_string(), "eta".to_string()]);
    table.columns.push(format!("r_onoff_{unit}"));
    table.columns.push(format!("c_single_{unit}"));
    table.rows = budgets_db
        .par_iter()
        .map(|&db| {
            let b = db_to_linear(db);
            let r = onoff_mac_rates(&MacProblem::symmetric(model, k, b)?)?.rates[0];
            let c = capacity_csit(&model, b)?;
            Ok(vec![
                Cell::Num(db),
                Cell::Num(r / c),
                Cell::Num(unit.rate(r)),
                Cell::Num(unit.rate(c)),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    Ok(table)
}

pub fn sepup(models: &[FadingModel], budgets_db: &[f64], unit: Unit) -> Result<Table, CliError> {
    need_users(models, "sepup")?;
    let k = models.len();
    let blocks = budgets_db
        .par_iter()
        .map(|&db| {
            let b = db_to_linear(db);
            let problem = MacProblem::new(
                models
                    .iter()
                    .map(|&model| MacUser { model, budget: b })
                    .collect(),
            )?;
            let budgets = vec![b; k];
            let regions = [
                rectangle_region(&problem)?,
                point_region(RegionKind::Sumrate, mac_sumrate_point(&problem)?.rates)?,
                point_region(RegionKind::Onoff, onoff_mac_rates(&problem)?.rates)?,
            ];
            let mut part = Table::default();
            for r in &regions {
                part.push_region(&[Cell::Num(db)], &sepup_region(r, &budgets)?, |x| {
                    unit.rate(x)
                });
            }
            Ok(part)
        })
        .collect::<Result<Vec<Table>, CliError>>()?;
    let mut table = Table::new(["budget_db".to_string()]);
    table
        .columns
        .extend(rate_columns("S", k, &format!("{unit}_per_joule")));
    table.columns.push("kind".into());
    for part in blocks {
        table.rows.extend(part.rows);
        table.constraints.extend(part.constraints);
    }
    Ok(table)
}

pub fn validate(thresholds: &Thresholds) -> (Table, Vec<CriterionOutcome>) {
    let outcomes = run_all(thresholds);
    let mut table = Table::new(["criterion", "title", "passed", "detail"]);
    for o in &outcomes {
        table.rows.push(vec![
            Cell::Int(o.id as u64),
            Cell::Text(o.title.to_string()),
            Cell::Flag(o.passed),
            Cell::Text(o.detail.clone()),
        ]);
    }
    (table, outcomes)
}

pub fn first_failure(outcomes: &[CriterionOutcome]) -> Option<CliError> {
    outcomes
        .iter()
        .find(|o| !o.passed)
        .map(|o| CliError::Validation(format!("criterion {} ({}): {}", o.id, o.title, o.detail)))
}
