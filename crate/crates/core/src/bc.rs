//! Fading broadcast channel at low power, through its dual MAC.
//!
//! Splitting the total budget as `α_k P̄` gives the rate vector
//! `(C_1(α_1 P̄), …, C_K(α_K P̄))`; the union over splits is the low-power
//! capacity region. The matching policy serves at most one user per state.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fading::FadingModel;
use crate::mac::{solve_mac_water_levels, MacProblem, MacUser};
use crate::montecarlo::PowerPolicy;
use crate::region::{RatePoint, RegionBoundary, RegionKind};
use crate::single_user::{capacity_csit, check_budget, solve_water_level};

#[derive(Debug, Clone, PartialEq)]
pub struct BcProblem {
    pub users: Vec<FadingModel>,
    pub total_budget: f64,
}

impl BcProblem {
    pub fn new(users: Vec<FadingModel>, total_budget: f64) -> Result<Self> {
        if users.is_empty() {
            return Err(invalid("a broadcast channel needs at least one user"));
        }
        check_budget(total_budget)?;
        Ok(Self {
            users,
            total_budget,
        })
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }
}

/// Nonnegative budget fractions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitVector {
    alphas: Vec<f64>,
}

impl SplitVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(invalid("split fractions must be finite and nonnegative"));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("split fractions sum to {sum}, not 1")));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `n ≥ 2` evenly spaced two-user splits from `(0, 1)` to `(1, 0)`.
    pub fn grid_2user(n: usize) -> Result<Vec<SplitVector>> {
        if n < 2 {
            return Err(invalid("a split grid needs at least two points"));
        }
        Ok((0..n)
            .map(|i| {
                let a = i as f64 / (n - 1) as f64;
                SplitVector {
                    alphas: vec![a, 1.0 - a],
                }
            })
            .collect())
    }
}

fn check_split(problem: &BcProblem, split: &SplitVector) -> Result<()> {
    if split.alphas.len() != problem.num_users() {
        return Err(invalid(format!(
            "split has {} entries for {} users",
            split.alphas.len(),
            problem.num_users()
        )));
    }
    Ok(())
}

fn capacity_or_zero(model: &FadingModel, budget: f64) -> Result<f64> {
    if budget == 0.0 {
        Ok(0.0)
    } else {
        capacity_csit(model, budget)
    }
}

/// `(C_1(α_1 P̄), …, C_K(α_K P̄))` for each split.
pub fn bc_region_trace(problem: &BcProblem, splits: &[SplitVector]) -> Result<RegionBoundary> {
    let points = splits
        .iter()
        .map(|s| {
            check_split(problem, s)?;
            let rates = problem
                .users
                .iter()
                .zip(&s.alphas)
                .map(|(m, a)| capacity_or_zero(m, a * problem.total_budget))
                .collect::<Result<Vec<_>>>()?;
            RatePoint::new(rates)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionBoundary::from_points(RegionKind::BcDual, points))
}

/// `(α_1 C_1(P̄), …, α_K C_K(P̄))` for each split.
pub fn timesharing_region(problem: &BcProblem, splits: &[SplitVector]) -> Result<RegionBoundary> {
    let full = problem
        .users
        .iter()
        .map(|m| capacity_csit(m, problem.total_budget))
        .collect::<Result<Vec<_>>>()?;
    let points = splits
        .iter()
        .map(|s| {
            check_split(problem, s)?;
            RatePoint::new(s.alphas.iter().zip(&full).map(|(a, c)| a * c).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionBoundary::from_points(RegionKind::Timeshare, points))
}

/// Serves user `k` with power `1/λ_k - 1/γ_k` iff `λ_j γ_k > λ_k γ_j` for
/// every other `j` and `γ_k > λ_k`. Ties go to the lowest index.
pub fn bc_power_policy(lambdas: &[f64], gains: &[f64]) -> Option<(usize, f64)> {
    select(lambdas.iter().map(|&l| Some(l)), gains)
}

fn select<I: Iterator<Item = Option<f64>>>(lambdas: I, gains: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, l) in lambdas.enumerate() {
        let Some(lk) = l else { continue };
        // γ_k/λ_k > γ_b/λ_b in cross-multiplied form.
        match best {
            Some((b, lb)) if !(lb * gains[k] > lk * gains[b]) => {}
            _ => best = Some((k, lk)),
        }
    }
    let (k, lk) = best?;
    let g = gains[k];
    (g > lk).then(|| (k, (g - lk) / (lk * g)))
}

/// The single-user-selection policy at fixed water levels; users with a
/// zero share never transmit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcPolicy {
    pub lambdas: Vec<Option<f64>>,
}

impl BcPolicy {
    /// Levels from each user's own equation `G_k(λ_k) = α_k P̄`.
    pub fn decoupled(problem: &BcProblem, split: &SplitVector) -> Result<Self> {
        check_split(problem, split)?;
        let lambdas = problem
            .users
            .iter()
            .zip(&split.alphas)
            .map(|(m, a)| {
                let b = a * problem.total_budget;
                if b == 0.0 {
                    Ok(None)
                } else {
                    solve_water_level(m, b).map(|w| Some(w.lambda))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambdas })
    }

    /// Levels of the dual MAC with budgets `α_k P̄`, which meet every share
    /// exactly.
    pub fn coupled(problem: &BcProblem, split: &SplitVector) -> Result<Self> {
        check_split(problem, split)?;
        let active: Vec<usize> = (0..problem.num_users())
            .filter(|&k| split.alphas[k] > 0.0)
            .collect();
        let mac = MacProblem::new(
            active
                .iter()
                .map(|&k| MacUser {
                    model: problem.users[k],
                    budget: split.alphas[k] * problem.total_budget,
                })
                .collect(),
        )?;
        let levels = solve_mac_water_levels(&mac)?;
        let mut lambdas = vec![None; problem.num_users()];
        for (i, &k) in active.iter().enumerate() {
            lambdas[k] = Some(levels.lambdas[i]);
        }
        Ok(Self { lambdas })
    }

    /// Levels of the active users, in order, with the dual MAC they define.
    pub fn dual_mac(&self, problem: &BcProblem) -> Result<(MacProblem, Vec<f64>, Vec<usize>)> {
        let idx: Vec<usize> = (0..self.lambdas.len())
            .filter(|&k| self.lambdas[k].is_some())
            .collect();
        let mac = MacProblem::new(
            idx.iter()
                .map(|&k| MacUser {
                    model: problem.users[k],
                    budget: problem.total_budget,
                })
                .collect(),
        )?;
        let lambdas = idx.iter().map(|&k| self.lambdas[k].unwrap()).collect();
        Ok((mac, lambdas, idx))
    }
}

impl PowerPolicy for BcPolicy {
    fn num_users(&self) -> usize {
        self.lambdas.len()
    }

    fn allocate(&self, gains: &[f64], powers: &mut [f64]) {
        powers.fill(0.0);
        if let Some((k, p)) = select(self.lambdas.iter().copied(), gains) {
            powers[k] = p;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSharingRow {
    pub budget: f64,
    pub ratio_lambda: f64,
    pub ratio_capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TimeSharingVerdict {
    Optimal,
    Suboptimal {
        limit_ratio_lambda: f64,
        limit_ratio_capacity: f64,
    },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSharingReport {
    pub alpha: f64,
    pub rows: Vec<TimeSharingRow>,
    pub verdict: TimeSharingVerdict,
}

/// Rate at which `ratio - 1` shrinks against `ln ln(1/P̄)` between two
/// budgets; about 1 when the gap decays like `1/ln(1/P̄)`, about 0 when it
/// does not decay.
fn decay_exponent(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (pa, ra) = a;
    let (pb, rb) = b;
    let (ga, gb) = ((ra - 1.0).abs(), (rb - 1.0).abs());
    if gb == 0.0 {
        return f64::INFINITY;
    }
    let (la, lb) = ((1.0 / pa).ln().ln(), (1.0 / pb).ln().ln());
    -(gb.ln() - ga.ln()) / (lb - la)
}

/// Compares `λ(αP̄)` with `λ(P̄)` and `C(αP̄)` with `αC(P̄)` along a
/// decreasing budget sequence.
pub fn timesharing_optimality_test(
    model: &FadingModel,
    alpha: f64,
    budgets: &[f64],
) -> Result<TimeSharingReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if budgets.is_empty() {
        return Err(invalid("at least one budget is required"));
    }
    for w in budgets.windows(2) {
        if !(w[1] < w[0]) {
            return Err(invalid("budgets must be strictly decreasing"));
        }
    }
    let rows = budgets
        .iter()
        .map(|&p| {
            check_budget(p)?;
            if alpha == 1.0 {
                return Ok(TimeSharingRow {
                    budget: p,
                    ratio_lambda: 1.0,
                    ratio_capacity: 1.0,
                });
            }
            let full = solve_water_level(model, p)?.lambda;
            let part = solve_water_level(model, alpha * p)?.lambda;
            let c_full = capacity_csit(model, p)?;
            let c_part = capacity_csit(model, alpha * p)?;
            Ok(TimeSharingRow {
                budget: p,
                ratio_lambda: part / full,
                ratio_capacity: c_part / (alpha * c_full),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if alpha == 1.0 {
        TimeSharingVerdict::Optimal
    } else if rows.len() < 2 || budgets[0] >= 1.0 / std::f64::consts::E {
        TimeSharingVerdict::Inconclusive
    } else {
        let (a, b) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        let e_lambda = decay_exponent((a.budget, a.ratio_lambda), (b.budget, b.ratio_lambda));
        let e_cap = decay_exponent((a.budget, a.ratio_capacity), (b.budget, b.ratio_capacity));
        if e_lambda > 0.5 && e_cap > 0.5 {
            TimeSharingVerdict::Optimal
        } else {
            TimeSharingVerdict::Suboptimal {
                limit_ratio_lambda: b.ratio_lambda,
                limit_ratio_capacity: b.ratio_capacity,
            }
        }
    };
    Ok(TimeSharingReport {
        alpha,
        rows,
        verdict,
    })
}
