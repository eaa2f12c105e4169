//! K-user fading multi-access channel with full channel state.
//!
//! The sum-rate optimal policy gives the whole band to the user with the
//! largest `γ_k/λ_k` as long as that exceeds one. With the coupled levels
//! `λ_k` solved so every user meets its budget, user `k` spends
//!
//! ```text
//! G_k(λ) = ∫_{λ_k}^∞ (1/λ_k - 1/h) ∏_{i≠k} F_i(λ_i h / λ_k) f_k(h) dh
//! ```
//!
//! and earns the same integral with `ln(h/λ_k)` in place of the power.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fading::FadingModel;
use crate::montecarlo::{estimate, PowerPolicy, SimConfig};
use crate::numerics::{
    find_root_monotone, integrate_semiinf, try_integrate_semiinf, Monotonicity, QuadratureSpec,
    RootSpec,
};
use crate::region::{RatePoint, RegionBoundary, RegionKind, SumConstraint};
use crate::single_user::{
    capacity_csir, capacity_csit, check_budget, check_lambda, fill_power, g_function, log_ratio,
    solve_water_level,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacUser {
    #[serde(skip)]
    pub model: FadingModel,
    pub budget: f64,
}

/// Independent users, each with its own fading law and average power.
#[derive(Debug, Clone, PartialEq)]
pub struct MacProblem {
    users: Vec<MacUser>,
}

impl MacProblem {
    pub fn new(users: Vec<MacUser>) -> Result<Self> {
        if users.is_empty() {
            return Err(invalid("a MAC needs at least one user"));
        }
        for u in &users {
            check_budget(u.budget)?;
        }
        Ok(Self { users })
    }

    pub fn symmetric(model: FadingModel, k: usize, budget: f64) -> Result<Self> {
        Self::new(vec![MacUser { model, budget }; k])
    }

    pub fn users(&self) -> &[MacUser] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn models(&self) -> Vec<FadingModel> {
        self.users.iter().map(|u| u.model).collect()
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.budget).collect()
    }

    /// The same users in the order given by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(perm.iter().map(|&i| self.users[i]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacWaterLevels {
    pub lambdas: Vec<f64>,
    pub sweeps: usize,
    /// `max_k |G_k - P̄_k| / P̄_k` at the returned levels.
    pub residual: f64,
}

fn check_lambdas(problem: &MacProblem, lambdas: &[f64]) -> Result<()> {
    if lambdas.len() != problem.num_users() {
        return Err(invalid(format!(
            "expected {} water levels, got {}",
            problem.num_users(),
            lambdas.len()
        )));
    }
    lambdas.iter().try_for_each(|&l| check_lambda(l))
}

/// `∏_{i≠k} F_i(λ_i h / λ_k)`: probability that user `k` wins the state.
fn others_below(problem: &MacProblem, k: usize, lambdas: &[f64], h: f64) -> f64 {
    let mut p = 1.0;
    for (i, u) in problem.users.iter().enumerate() {
        if i != k {
            p *= u.model.cdf(lambdas[i] / lambdas[k] * h);
        }
    }
    p
}

/// Expected power of user `k` under the sum-rate policy at levels `lambdas`.
pub fn coupled_g(problem: &MacProblem, k: usize, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(problem, lambdas)?;
    let model = &problem.users[k].model;
    let lk = lambdas[k];
    integrate_semiinf(
        |h| fill_power(h, lk) * others_below(problem, k, lambdas, h) * model.pdf(h),
        lk,
        |x| model.tail(x),
        &QuadratureSpec::default(),
    )
}

/// Rate of user `k` under the sum-rate policy at levels `lambdas`.
pub fn coupled_rate(problem: &MacProblem, k: usize, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(problem, lambdas)?;
    let model = &problem.users[k].model;
    let lk = lambdas[k];
    integrate_semiinf(
        |h| log_ratio(h, lk) * others_below(problem, k, lambdas, h) * model.pdf(h),
        lk,
        |x| model.tail(x),
        &QuadratureSpec::default(),
    )
}

fn residual(problem: &MacProblem, lambdas: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, u) in problem.users.iter().enumerate() {
        let g = coupled_g(problem, k, lambdas)?;
        worst = worst.max(((g - u.budget) / u.budget).abs());
    }
    Ok(worst)
}

pub const MAX_SWEEPS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `G_k(λ) = P̄_k` for all users by Gauss-Seidel sweeps seeded at the
/// single-user levels.
pub fn solve_mac_water_levels(problem: &MacProblem) -> Result<MacWaterLevels> {
    let mut lambdas = problem
        .users
        .iter()
        .map(|u| solve_water_level(&u.model, u.budget).map(|w| w.lambda))
        .collect::<Result<Vec<_>>>()?;
    if problem.num_users() == 1 {
        return Ok(MacWaterLevels {
            lambdas,
            sweeps: 0,
            residual: 0.0,
        });
    }
    let spec = RootSpec {
        rel_tol: 1e-12,
        ..RootSpec::default()
    };
    let mut last = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        for k in 0..problem.num_users() {
            let seed = lambdas[k];
            let mut trial = lambdas.clone();
            lambdas[k] = find_root_monotone(
                |l| {
                    trial[k] = l;
                    coupled_g(problem, k, &trial)
                },
                problem.users[k].budget,
                (seed, seed),
                Monotonicity::Decreasing,
                &spec,
            )?;
        }
        last = residual(problem, &lambdas)?;
        if last < RESIDUAL_TOL {
            return Ok(MacWaterLevels {
                lambdas,
                sweeps: sweep,
                residual: last,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_SWEEPS,
        estimate: lambdas[0],
        error: last,
    })
}

/// Per-user rates at the sum-rate maximizing point.
pub fn mac_sumrate_point(problem: &MacProblem) -> Result<RatePoint> {
    let levels = solve_mac_water_levels(problem)?;
    sumrate_point_at(problem, &levels.lambdas)
}

pub fn sumrate_point_at(problem: &MacProblem, lambdas: &[f64]) -> Result<RatePoint> {
    let rates = (0..problem.num_users())
        .map(|k| coupled_rate(problem, k, lambdas))
        .collect::<Result<Vec<_>>>()?;
    RatePoint::new(rates)
}

/// `G_k(λ) / G(λ_k)` per user: how far the coupled power is from the
/// single-user power at the same level.
pub fn asymptotic_equivalence_ratios(problem: &MacProblem, lambdas: &[f64]) -> Result<Vec<f64>> {
    (0..problem.num_users())
        .map(|k| {
            let single = g_function(&problem.users[k].model, lambdas[k])?;
            Ok(coupled_g(problem, k, lambdas)? / single)
        })
        .collect()
}

/// Single-user capacities, one per user.
pub fn single_user_capacities(problem: &MacProblem) -> Result<Vec<f64>> {
    problem
        .users
        .iter()
        .map(|u| capacity_csit(&u.model, u.budget))
        .collect()
}

/// The downward closure of the single-user capacity corner.
pub fn rectangle_region(problem: &MacProblem) -> Result<RegionBoundary> {
    let caps = single_user_capacities(problem)?;
    Ok(box_region(RegionKind::Rectangle, &caps))
}

pub(crate) fn box_region(kind: RegionKind, corner: &[f64]) -> RegionBoundary {
    let points = if corner.len() == 2 {
        vec![
            RatePoint::unchecked(vec![0.0, corner[1]]),
            RatePoint::unchecked(corner.to_vec()),
            RatePoint::unchecked(vec![corner[0], 0.0]),
        ]
    } else {
        vec![RatePoint::unchecked(corner.to_vec())]
    };
    RegionBoundary {
        kind,
        points,
        constraints: (0..corner.len())
            .map(|k| SumConstraint::unit(vec![k], corner[k]))
            .collect(),
    }
}

/// Transmit `on_powers[k]` when user `k` has the strongest gain and clears
/// `thresholds[k]`; ties go to the lowest index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnOffMacPolicy {
    pub thresholds: Vec<f64>,
    pub on_powers: Vec<f64>,
    pub activation_probabilities: Vec<f64>,
    /// Single-user water levels the thresholds derive from.
    pub lambdas: Vec<f64>,
}

impl OnOffMacPolicy {
    /// Index of the transmitting user in state `gains`, if any.
    pub fn active_user(&self, gains: &[f64]) -> Option<usize> {
        let mut best = 0;
        for (i, g) in gains.iter().enumerate().skip(1) {
            if *g > gains[best] {
                best = i;
            }
        }
        (gains[best] >= self.thresholds[best]).then_some(best)
    }
}

impl PowerPolicy for OnOffMacPolicy {
    fn num_users(&self) -> usize {
        self.thresholds.len()
    }

    fn allocate(&self, gains: &[f64], powers: &mut [f64]) {
        powers.fill(0.0);
        if let Some(k) = self.active_user(gains) {
            powers[k] = self.on_powers[k];
        }
    }
}

/// `∏_{i≠k} F_i(γ)`: user `k` has the strongest gain.
fn strongest(problem: &MacProblem, k: usize, g: f64) -> f64 {
    let mut p = 1.0;
    for (i, u) in problem.users.iter().enumerate() {
        if i != k {
            p *= u.model.cdf(g);
        }
    }
    p
}

/// On-off thresholds `(1 + 1/l_k) λ_k(P̄_k)` from the single-user levels
/// and powers that meet each budget exactly.
pub fn onoff_mac_policy(problem: &MacProblem) -> Result<OnOffMacPolicy> {
    let k_users = problem.num_users();
    let mut policy = OnOffMacPolicy {
        thresholds: Vec::with_capacity(k_users),
        on_powers: Vec::with_capacity(k_users),
        activation_probabilities: Vec::with_capacity(k_users),
        lambdas: Vec::with_capacity(k_users),
    };
    for (k, u) in problem.users.iter().enumerate() {
        let limit = u.model.gfr_limit();
        if !limit.is_positive() {
            return Err(invalid(format!(
                "user {k}: on-off needs a positive GFR limit"
            )));
        }
        let lambda = solve_water_level(&u.model, u.budget)?.lambda;
        let tau = limit.threshold_factor() * lambda;
        let p_on = integrate_semiinf(
            |g| strongest(problem, k, g) * u.model.pdf(g),
            tau,
            |x| u.model.tail(x),
            &QuadratureSpec::default(),
        )?;
        let q = u.budget / p_on;
        if !(p_on > f64::MIN_POSITIVE) || !q.is_finite() {
            return Err(Error::DegenerateActivation {
                user: k,
                probability: p_on,
            });
        }
        policy.thresholds.push(tau);
        policy.on_powers.push(q);
        policy.activation_probabilities.push(p_on);
        policy.lambdas.push(lambda);
    }
    Ok(policy)
}

pub fn onoff_rates_for(problem: &MacProblem, policy: &OnOffMacPolicy) -> Result<RatePoint> {
    let rates = problem
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let q = policy.on_powers[k];
            integrate_semiinf(
                |g| (g * q).ln_1p() * strongest(problem, k, g) * u.model.pdf(g),
                policy.thresholds[k],
                |x| u.model.tail(x),
                &QuadratureSpec::default(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    RatePoint::new(rates)
}

/// Rates achieved by the on-off MAC policy.
pub fn onoff_mac_rates(problem: &MacProblem) -> Result<RatePoint> {
    let policy = onoff_mac_policy(problem)?;
    onoff_rates_for(problem, &policy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdmaPoint {
    pub lambda: f64,
    pub rate_per_user: f64,
    /// `E[P(γ_max)]`, which equals `K P̄`.
    pub mean_power: f64,
}

/// Law of the strongest of `k` i.i.d. gains.
struct MaxOf<'a> {
    model: &'a FadingModel,
    k: i32,
}

impl MaxOf<'_> {
    fn pdf(&self, x: f64) -> f64 {
        let kf = self.k as f64;
        kf * self.model.cdf(x).powi(self.k - 1) * self.model.pdf(x)
    }

    /// `1 - F^K`, kept accurate when `F` is close to one.
    fn tail(&self, x: f64) -> f64 {
        let t = self.model.tail(x);
        -((self.k as f64) * (-t).ln_1p()).exp_m1()
    }
}

/// TDMA with water-filling on the strongest of `k` identical users, each
/// with budget `budget`.
pub fn tdma_symmetric(model: &FadingModel, k: usize, budget: f64) -> Result<TdmaPoint> {
    check_budget(budget)?;
    if k == 0 || k > i32::MAX as usize {
        return Err(invalid("TDMA needs at least one user"));
    }
    let max = MaxOf { model, k: k as i32 };
    let spec = QuadratureSpec::default();
    let power_at = |l: f64| {
        try_integrate_semiinf(
            |g| Ok(fill_power(g, l) * max.pdf(g)),
            l,
            |x| max.tail(x),
            &spec,
        )
    };
    let total = k as f64 * budget;
    let lambda = find_root_monotone(
        power_at,
        total,
        (1.0, 1.0),
        Monotonicity::Decreasing,
        &RootSpec {
            rel_tol: 1e-12,
            ..RootSpec::default()
        },
    )?;
    let mean_power = power_at(lambda)?;
    let sum_rate = integrate_semiinf(
        |g| log_ratio(g, lambda) * max.pdf(g),
        lambda,
        |x| max.tail(x),
        &spec,
    )?;
    Ok(TdmaPoint {
        lambda,
        rate_per_user: sum_rate / k as f64,
        mean_power,
    })
}

/// Divides every rate by the matching budget.
pub fn sepup_region(boundary: &RegionBoundary, budgets: &[f64]) -> Result<RegionBoundary> {
    for &b in budgets {
        check_budget(b)?;
    }
    let points = boundary
        .points
        .iter()
        .map(|p| {
            if p.dim() != budgets.len() {
                return Err(invalid("budget vector length does not match the region"));
            }
            Ok(RatePoint::unchecked(
                p.rates.iter().zip(budgets).map(|(r, b)| r / b).collect(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    // Σ w_k R_k ≤ b becomes Σ w_k P̄_k S_k ≤ b in per-unit-power coordinates.
    let constraints = boundary
        .constraints
        .iter()
        .map(|c| SumConstraint {
            users: c.users.clone(),
            weights: c
                .users
                .iter()
                .zip(&c.weights)
                .map(|(&u, w)| w * budgets[u])
                .collect(),
            bound: c.bound,
            std_error: c.std_error,
        })
        .collect();
    Ok(RegionBoundary {
        kind: boundary.kind,
        points,
        constraints,
    })
}

fn subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u64..(1u64 << k)).map(move |mask| (0..k).filter(|i| mask >> i & 1 == 1).collect())
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// Largest K for which polymatroid vertices are enumerated.
const MAX_VERTEX_USERS: usize = 6;

/// Vertices of a polymatroid given the bound of every subset (indexed by
/// bitmask), one per decoding order.
fn polymatroid_region(kind: RegionKind, k: usize, bound: &[f64], se: &[f64]) -> RegionBoundary {
    let mask_of = |s: &[usize]| s.iter().fold(0usize, |m, &i| m | 1 << i);
    let constraints = subsets(k)
        .map(|s| {
            let m = mask_of(&s);
            SumConstraint {
                weights: vec![1.0; s.len()],
                users: s,
                bound: bound[m],
                std_error: se[m],
            }
        })
        .collect();
    let points = if k == 1 {
        vec![RatePoint::unchecked(vec![bound[1]])]
    } else if k == 2 {
        let (c1, c2, c12) = (bound[1], bound[2], bound[3]);
        vec![
            RatePoint::unchecked(vec![0.0, c2]),
            RatePoint::unchecked(vec![(c12 - c2).max(0.0), c2]),
            RatePoint::unchecked(vec![c1, (c12 - c1).max(0.0)]),
            RatePoint::unchecked(vec![c1, 0.0]),
            RatePoint::unchecked(vec![0.0, 0.0]),
        ]
    } else if k <= MAX_VERTEX_USERS {
        // Last decoded user sees no interference.
        permutations(k)
            .into_iter()
            .map(|order| {
                let mut rates = vec![0.0; k];
                let mut mask = 0usize;
                for &u in order.iter().rev() {
                    let before = bound[mask];
                    mask |= 1 << u;
                    rates[u] = (bound[mask] - before).max(0.0);
                }
                RatePoint::unchecked(rates)
            })
            .collect()
    } else {
        Vec::new()
    };
    RegionBoundary {
        kind,
        points,
        constraints,
    }
}

/// Capacity region of the non-fading Gaussian MAC with gains `mean_gains`.
pub fn awgn_mac_region(mean_gains: &[f64], budgets: &[f64]) -> Result<RegionBoundary> {
    let k = mean_gains.len();
    if k == 0 || budgets.len() != k {
        return Err(invalid(
            "gain and budget vectors must be nonempty and of equal length",
        ));
    }
    if k > 20 {
        return Err(invalid("at most 20 users are supported"));
    }
    for (&g, &b) in mean_gains.iter().zip(budgets) {
        check_budget(b)?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(invalid(format!("mean gain must be positive, got {g}")));
        }
    }
    let mut bound = vec![0.0; 1 << k];
    for (m, slot) in bound.iter_mut().enumerate().skip(1) {
        let snr: f64 = (0..k)
            .filter(|i| m >> i & 1 == 1)
            .map(|i| mean_gains[i] * budgets[i])
            .sum();
        *slot = snr.ln_1p();
    }
    Ok(polymatroid_region(
        RegionKind::AwgnPentagon,
        k,
        &bound,
        &vec![0.0; 1 << k],
    ))
}

/// `E[ln(1 + γ₁P̄₁ + γ₂P̄₂)]` by nesting the inner expectation as a
/// receiver-only capacity at the effective budget `P̄₂/(1 + γ₁P̄₁)`.
fn pair_csir(a: &MacUser, b: &MacUser) -> Result<f64> {
    let outer = capacity_csir(&a.model, a.budget)?;
    let spec = QuadratureSpec {
        tail_mass_cutoff: (1e-14 * a.budget.min(1.0)).max(1e-300),
        ..QuadratureSpec::default()
    };
    // ln(1 + x + y) = ln(1 + x) + ln(1 + y/(1 + x)).
    let inner = try_integrate_semiinf(
        |g| Ok(capacity_csir(&b.model, b.budget / (g * a.budget).ln_1p().exp())? * a.model.pdf(g)),
        0.0,
        |x| a.model.tail(x),
        &spec,
    )?;
    Ok(outer + inner)
}

/// Ergodic region with receiver-only CSI. Two users use nested quadrature;
/// larger systems estimate multi-user sums by Monte Carlo with `sim`.
pub fn csir_mac_region(problem: &MacProblem, sim: &SimConfig) -> Result<RegionBoundary> {
    let k = problem.num_users();
    if k > 20 {
        return Err(invalid("at most 20 users are supported"));
    }
    let mut bound = vec![0.0; 1 << k];
    let mut se = vec![0.0; 1 << k];
    for i in 0..k {
        let u = &problem.users[i];
        bound[1 << i] = capacity_csir(&u.model, u.budget)?;
    }
    if k == 2 {
        bound[3] = pair_csir(&problem.users[0], &problem.users[1])?;
    } else if k > 2 {
        let models = problem.models();
        let budgets = problem.budgets();
        for mask in 1..(1usize << k) {
            if mask.count_ones() < 2 {
                continue;
            }
            let (m, s) = estimate(&models, sim, |g| {
                (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| g[i] * budgets[i])
                    .sum::<f64>()
                    .ln_1p()
            })?;
            bound[mask] = m;
            se[mask] = s;
        }
    }
    Ok(polymatroid_region(RegionKind::Csir, k, &bound, &se))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray() -> FadingModel {
        FadingModel::rayleigh(1.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn single_user_reductions() {
        let p = MacProblem::symmetric(ray(), 1, 1e-3).unwrap();
        let l = solve_water_level(&ray(), 1e-3).unwrap().lambda;
        assert_eq!(
            coupled_g(&p, 0, &[2.0]).unwrap(),
            g_function(&ray(), 2.0).unwrap()
        );
        assert_eq!(solve_mac_water_levels(&p).unwrap().lambdas, vec![l]);
        let c = capacity_csit(&ray(), 1e-3).unwrap();
        assert!(rel(mac_sumrate_point(&p).unwrap().rates[0], c) < 1e-12);
        let t = tdma_symmetric(&ray(), 1, 1e-3).unwrap();
        assert!(rel(t.rate_per_user, c) < 1e-9);
        let onoff = onoff_mac_policy(&p).unwrap();
        assert!(rel(onoff.on_powers[0], 1e-3 / ray().tail(onoff.thresholds[0])) < 1e-9);
    }

    #[test]
    fn symmetric_coupled_g_matches_direct_form() {
        let p = MacProblem::symmetric(ray(), 2, 0.1).unwrap();
        let l = 1.5;
        let direct = integrate_semiinf(
            |h: f64| (1.0 / l - 1.0 / h) * (-(-h).exp_m1()) * (-h).exp(),
            l,
            |x| (-x).exp(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(rel(coupled_g(&p, 0, &[l, l]).unwrap(), direct) < 1e-9);
    }

    #[test]
    fn symmetric_levels_agree() {
        let p = MacProblem::symmetric(ray(), 2, 0.1).unwrap();
        let w = solve_mac_water_levels(&p).unwrap();
        assert!(rel(w.lambdas[0], w.lambdas[1]) < 1e-9);
        assert!(w.residual < 1e-7);
    }

    #[test]
    fn levels_exceed_single_user_levels() {
        // Sharing the band lowers each user's spend at a fixed level, so the
        // coupled levels must be lower to meet the same budget.
        let p = MacProblem::new(vec![
            MacUser {
                model: ray(),
                budget: 0.3,
            },
            MacUser {
                model: FadingModel::nakagami(2.0, 1.0).unwrap(),
                budget: 0.05,
            },
        ])
        .unwrap();
        let w = solve_mac_water_levels(&p).unwrap();
        for (k, u) in p.users().iter().enumerate() {
            let single = solve_water_level(&u.model, u.budget).unwrap().lambda;
            assert!(w.lambdas[k] < single);
            let g = coupled_g(&p, k, &w.lambdas).unwrap();
            assert!(rel(g, u.budget) < 1e-7);
        }
    }

    #[test]
    fn awgn_pentagon() {
        let r = awgn_mac_region(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.points.len(), 5);
        let ln2 = 2f64.ln();
        let ln3 = 3f64.ln();
        assert!(r.contains(&RatePoint::new(vec![ln2, ln3 - ln2]).unwrap(), 1e-12));
        assert!(!r.contains(&RatePoint::new(vec![ln2, ln2]).unwrap(), 1e-12));
        let one = awgn_mac_region(&[2.0], &[0.5]).unwrap();
        assert_eq!(one.points[0].rates, vec![2f64.ln()]);
    }

    #[test]
    fn awgn_vertices_for_three_users() {
        let r = awgn_mac_region(&[1.0, 2.0, 0.5], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.points.len(), 6);
        assert_eq!(r.constraints.len(), 7);
        for p in &r.points {
            assert!(r.contains(p, 1e-12));
            assert!((p.sum() - 4.5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn csir_pair_by_nesting_matches_direct_double_integral() {
        let p = MacProblem::symmetric(ray(), 2, 1.0).unwrap();
        let sim = SimConfig::with_default_batch(10_000, 1).unwrap();
        let r = csir_mac_region(&p, &sim).unwrap();
        // E[ln(1 + X + Y)] with X + Y ~ Gamma(2, 1): ∫ ln(1+s) s e^{-s} ds.
        let direct = integrate_semiinf(
            |s: f64| s.ln_1p() * s * (-s).exp(),
            0.0,
            |x| (1.0 + x) * (-x).exp(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let sum = r.constraints.iter().find(|c| c.users.len() == 2).unwrap();
        assert!(rel(sum.bound, direct) < 1e-8, "{} vs {direct}", sum.bound);
        let awgn = awgn_mac_region(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(r.is_subset_of(&awgn, 0.0));
    }

    #[test]
    fn onoff_active_user_ties_go_low() {
        let policy = OnOffMacPolicy {
            thresholds: vec![1.0, 1.0],
            on_powers: vec![0.5, 0.5],
            activation_probabilities: vec![0.1, 0.1],
            lambdas: vec![1.0, 1.0],
        };
        assert_eq!(policy.active_user(&[2.0, 2.0]), Some(0));
        assert_eq!(policy.active_user(&[2.0, 3.0]), Some(1));
        assert_eq!(policy.active_user(&[0.5, 0.9]), None);
    }

    #[test]
    fn sepup_scales_points() {
        let r = box_region(RegionKind::Rectangle, &[2.0, 3.0]);
        let s = sepup_region(&r, &[0.5, 0.25]).unwrap();
        assert_eq!(s.points[1].rates, vec![4.0, 12.0]);
        assert!(s.contains(&RatePoint::new(vec![4.0, 12.0]).unwrap(), 1e-12));
        assert!(!s.contains(&RatePoint::new(vec![4.1, 12.0]).unwrap(), 1e-12));
    }
}
