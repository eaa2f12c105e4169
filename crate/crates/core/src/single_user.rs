//! Point-to-point capacity with channel state at both ends.
//!
//! With unit noise and water level `λ`, the optimal power at gain `γ` is
//! `(1/λ - 1/γ)⁺`. The expected power it consumes is
//!
//! ```text
//! G(λ) = ∫_λ^∞ (1/λ - 1/γ) f(γ) dγ
//! ```
//!
//! and the resulting capacity is `∫_λ^∞ ln(γ/λ) f(γ) dγ`.

use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::fading::FadingModel;
use crate::numerics::{
    find_root_monotone, integrate_semiinf, try_integrate_interval, Monotonicity, QuadratureSpec,
    RootSpec,
};

/// Water level `lambda` that spends exactly `budget` on average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaterLevel {
    pub lambda: f64,
    pub budget: f64,
}

/// Transmit `on_power` whenever the gain reaches `threshold`, else stay silent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnOffPolicy1U {
    pub threshold: f64,
    pub on_power: f64,
    pub budget: f64,
    pub lambda: f64,
}

impl OnOffPolicy1U {
    pub fn power(&self, gain: f64) -> f64 {
        if gain >= self.threshold {
            self.on_power
        } else {
            0.0
        }
    }
}

pub(crate) fn check_budget(budget: f64) -> Result<()> {
    if budget > 0.0 && budget.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "budget must be positive and finite, got {budget}"
        )))
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "water level must be positive and finite, got {lambda}"
        )))
    }
}

/// `ln(γ/λ)` computed as `ln_1p((γ-λ)/λ)` so it stays accurate near `λ`.
pub(crate) fn log_ratio(gamma: f64, lambda: f64) -> f64 {
    ((gamma - lambda) / lambda).ln_1p()
}

/// Water-filling power `1/λ - 1/γ` for `γ ≥ λ`, written without cancellation.
pub(crate) fn fill_power(gamma: f64, lambda: f64) -> f64 {
    (gamma - lambda) / (lambda * gamma)
}

/// Expected power spent at water level `lambda`.
pub fn g_function(model: &FadingModel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    integrate_semiinf(
        |g| fill_power(g, lambda) * model.pdf(g),
        lambda,
        |x| model.tail(x),
        &QuadratureSpec::default(),
    )
}

pub(crate) fn water_level_root_spec() -> RootSpec {
    RootSpec {
        rel_tol: 1e-12,
        ..RootSpec::default()
    }
}

/// Solves `G(λ) = budget`.
pub fn solve_water_level(model: &FadingModel, budget: f64) -> Result<WaterLevel> {
    check_budget(budget)?;
    let lambda = find_root_monotone(
        |l| g_function(model, l),
        budget,
        (1.0, 1.0),
        Monotonicity::Decreasing,
        &water_level_root_spec(),
    )?;
    Ok(WaterLevel { lambda, budget })
}

/// `∫_λ^∞ ln(γ/λ) f(γ) dγ`, the capacity at a given water level.
pub fn capacity_at_level(model: &FadingModel, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    integrate_semiinf(
        |g| log_ratio(g, lambda) * model.pdf(g),
        lambda,
        |x| model.tail(x),
        &QuadratureSpec::default(),
    )
}

/// Ergodic capacity with optimal water-filling under average power `budget`.
pub fn capacity_csit(model: &FadingModel, budget: f64) -> Result<f64> {
    let level = solve_water_level(model, budget)?;
    capacity_at_level(model, level.lambda)
}

/// Capacity as `∫₀^P̄ G⁻¹(t) dt`.
///
/// The integral runs in `ln t` over `[ln δ, ln P̄]` with `δ = 10⁻⁹ P̄`; the
/// head `∫₀^δ G⁻¹` is approximated by its low-power asymptote
/// `(1 + 1/l) δ G⁻¹(δ)`.
pub fn capacity_via_g_inverse(model: &FadingModel, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    let limit = model.gfr_limit();
    if !limit.is_positive() {
        return Err(domain(
            "capacity via G inverse requires a positive GFR limit",
        ));
    }
    let delta = budget * 1e-9;
    let head = limit.threshold_factor() * delta * solve_water_level(model, delta)?.lambda;
    let spec = QuadratureSpec {
        rel_tol: 1e-10,
        ..QuadratureSpec::default()
    };
    let body = try_integrate_interval(
        |s: f64| {
            let t = s.exp();
            Ok(solve_water_level(model, t)?.lambda * t)
        },
        delta.ln(),
        budget.ln(),
        &spec,
    )?;
    Ok(head + body)
}

fn require_positive_gfr(model: &FadingModel) -> Result<()> {
    if model.gfr_limit().is_positive() {
        Ok(())
    } else {
        Err(domain(format!(
            "{} fading has a zero GFR limit; no low-power prescription exists",
            model.name()
        )))
    }
}

/// Low-power approximation `(1 + 1/l) λ(P̄) P̄`.
pub fn asymptotic_capacity(model: &FadingModel, budget: f64) -> Result<f64> {
    require_positive_gfr(model)?;
    let level = solve_water_level(model, budget)?;
    Ok(model.gfr_limit().threshold_factor() * level.lambda * budget)
}

/// On-off signaling at threshold `(1 + 1/l) λ(P̄)` with the power that
/// meets the budget exactly.
pub fn onoff_policy_1u(model: &FadingModel, budget: f64) -> Result<OnOffPolicy1U> {
    require_positive_gfr(model)?;
    let level = solve_water_level(model, budget)?;
    let threshold = model.gfr_limit().threshold_factor() * level.lambda;
    let on_probability = model.tail(threshold);
    if !(on_probability > 0.0) {
        return Err(Error::DegenerateActivation {
            user: 0,
            probability: on_probability,
        });
    }
    Ok(OnOffPolicy1U {
        threshold,
        on_power: budget / on_probability,
        budget,
        lambda: level.lambda,
    })
}

/// Rate of the on-off policy, `∫_τ^∞ ln(1 + γQ) f(γ) dγ`.
pub fn onoff_rate(model: &FadingModel, policy: &OnOffPolicy1U) -> Result<f64> {
    let q = policy.on_power;
    integrate_semiinf(
        |g| (g * q).ln_1p() * model.pdf(g),
        policy.threshold,
        |x| model.tail(x),
        &QuadratureSpec::default(),
    )
}

pub fn onoff_rate_1u(model: &FadingModel, budget: f64) -> Result<f64> {
    let policy = onoff_policy_1u(model, budget)?;
    onoff_rate(model, &policy)
}

/// Ergodic capacity with constant power `budget` (receiver-only CSI).
pub fn capacity_csir(model: &FadingModel, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    // The integrand is O(P̄) near the origin while the log tail is not, so
    // the truncation mass scales with the budget.
    let spec = QuadratureSpec {
        tail_mass_cutoff: (1e-14 * budget.min(1.0)).max(1e-300),
        ..QuadratureSpec::default()
    };
    integrate_semiinf(
        |g| (g * budget).ln_1p() * model.pdf(g),
        0.0,
        |x| model.tail(x),
        &spec,
    )
}

/// `ln(1 + gain · budget)`.
pub fn capacity_awgn(mean_gain: f64, budget: f64) -> Result<f64> {
    check_budget(budget)?;
    if !(mean_gain > 0.0 && mean_gain.is_finite()) {
        return Err(invalid(format!(
            "mean gain must be positive and finite, got {mean_gain}"
        )));
    }
    Ok((mean_gain * budget).ln_1p())
}
