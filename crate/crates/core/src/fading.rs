//! Channel power-gain distributions `γ = |h|²`.
//!
//! Every model has support `[0, ∞)` and exposes the density, distribution,
//! tail, generalized failure rate and inverse-CDF sampling needed by the
//! capacity integrals.
//!
//! | kind | parameters | density |
//! |---|---|---|
//! | Rayleigh | mean γ̄ | `e^{-x/γ̄}/γ̄` |
//! | Nakagami-m | shape m ≥ 0.5, mean γ̄ | gamma(m, γ̄/m) |
//! | Rician | K-factor, mean γ̄ | noncentral χ² with 2 degrees of freedom |
//! | log-logistic | none | `1/(1+x)²` |

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{domain, invalid, Result};
use crate::numerics::{find_root_monotone, Monotonicity, RootSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingKind {
    Rayleigh { mean_power: f64 },
    NakagamiM { m: f64, mean_power: f64 },
    Rician { k_factor: f64, mean_power: f64 },
    LogLogistic,
}

/// An immutable, validated fading distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingModel {
    kind: FadingKind,
}

/// Limit of the generalized failure rate `ζ(t) = t f(t) / (1 - F(t))` as
/// `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GfrLimit {
    Finite(f64),
    Infinite,
}

impl GfrLimit {
    /// `1/l`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            GfrLimit::Finite(l) => 1.0 / l,
            GfrLimit::Infinite => 0.0,
        }
    }

    /// The on-off threshold multiplier `1 + 1/l`.
    pub fn threshold_factor(self) -> f64 {
        1.0 + self.reciprocal()
    }

    pub fn is_positive(self) -> bool {
        match self {
            GfrLimit::Finite(l) => l > 0.0,
            GfrLimit::Infinite => true,
        }
    }
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl FadingModel {
    pub fn rayleigh(mean_power: f64) -> Result<Self> {
        positive_finite("mean power", mean_power)?;
        Ok(Self {
            kind: FadingKind::Rayleigh { mean_power },
        })
    }

    pub fn nakagami(m: f64, mean_power: f64) -> Result<Self> {
        positive_finite("mean power", mean_power)?;
        if !(m >= 0.5) || !m.is_finite() {
            return Err(invalid(format!("Nakagami shape m must be >= 0.5, got {m}")));
        }
        Ok(Self {
            kind: FadingKind::NakagamiM { m, mean_power },
        })
    }

    pub fn rician(k_factor: f64, mean_power: f64) -> Result<Self> {
        positive_finite("mean power", mean_power)?;
        if !(k_factor >= 0.0) || !k_factor.is_finite() {
            return Err(invalid(format!(
                "Rician K-factor must be >= 0, got {k_factor}"
            )));
        }
        Ok(Self {
            kind: FadingKind::Rician {
                k_factor,
                mean_power,
            },
        })
    }

    pub fn log_logistic() -> Self {
        Self {
            kind: FadingKind::LogLogistic,
        }
    }

    pub fn kind(&self) -> FadingKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FadingKind::Rayleigh { .. } => "rayleigh",
            FadingKind::NakagamiM { .. } => "nakagami_m",
            FadingKind::Rician { .. } => "rician",
            FadingKind::LogLogistic => "log_logistic",
        }
    }

    /// Mean power gain; `+∞` for log-logistic.
    pub fn mean(&self) -> f64 {
        match self.kind {
            FadingKind::Rayleigh { mean_power }
            | FadingKind::NakagamiM { mean_power, .. }
            | FadingKind::Rician { mean_power, .. } => mean_power,
            FadingKind::LogLogistic => f64::INFINITY,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.kind {
            FadingKind::Rayleigh { mean_power } => (-x / mean_power).exp() / mean_power,
            FadingKind::NakagamiM { m, mean_power } => {
                let rate = m / mean_power;
                if x == 0.0 {
                    return if m > 1.0 {
                        0.0
                    } else if m == 1.0 {
                        rate
                    } else {
                        f64::INFINITY
                    };
                }
                (m * rate.ln() + (m - 1.0) * x.ln() - rate * x - ln_gamma(m)).exp()
            }
            FadingKind::Rician {
                k_factor,
                mean_power,
            } => {
                let scale = (1.0 + k_factor) / mean_power;
                scale * rician_density_sum(k_factor, scale * x)
            }
            FadingKind::LogLogistic => 1.0 / ((1.0 + x) * (1.0 + x)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self.kind {
            FadingKind::Rayleigh { mean_power } => -(-x / mean_power).exp_m1(),
            FadingKind::NakagamiM { m, mean_power } => gamma_lr(m, m * x / mean_power),
            FadingKind::Rician {
                k_factor,
                mean_power,
            } => {
                let y = (1.0 + k_factor) * x / mean_power;
                rician_mixture(k_factor, y, |j, y| gamma_lr(j + 1.0, y))
            }
            FadingKind::LogLogistic => x / (1.0 + x),
        }
    }

    /// `1 - F(x)`, evaluated directly so it stays accurate deep in the tail.
    pub fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match self.kind {
            FadingKind::Rayleigh { mean_power } => (-x / mean_power).exp(),
            FadingKind::NakagamiM { m, mean_power } => {
                let y = m * x / mean_power;
                if y.is_infinite() {
                    0.0
                } else {
                    gamma_ur(m, y)
                }
            }
            FadingKind::Rician {
                k_factor,
                mean_power,
            } => {
                let y = (1.0 + k_factor) * x / mean_power;
                if y.is_infinite() {
                    return 0.0;
                }
                rician_mixture(k_factor, y, |j, y| gamma_ur(j + 1.0, y))
            }
            FadingKind::LogLogistic => 1.0 / (1.0 + x),
        }
    }

    /// `F⁻¹(p)` for `p ∈ (0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!(
                "quantile probability must lie in (0,1), got {p}"
            )));
        }
        match self.kind {
            FadingKind::Rayleigh { mean_power } => Ok(-mean_power * (-p).ln_1p()),
            FadingKind::LogLogistic => Ok(p / (1.0 - p)),
            _ if p > 0.5 => self.tail_quantile(1.0 - p),
            _ => self.invert(|x| self.cdf(x), p, Monotonicity::Increasing),
        }
    }

    /// The abscissa where the tail equals `q ∈ (0, 1)`; accurate for tiny `q`.
    pub fn tail_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!(
                "tail probability must lie in (0,1), got {q}"
            )));
        }
        match self.kind {
            FadingKind::Rayleigh { mean_power } => Ok(-mean_power * q.ln()),
            FadingKind::LogLogistic => Ok((1.0 - q) / q),
            _ if q > 0.5 => self.quantile(1.0 - q),
            _ => self.invert(|x| self.tail(x), q, Monotonicity::Decreasing),
        }
    }

    fn invert<F: Fn(f64) -> f64>(&self, f: F, target: f64, dir: Monotonicity) -> Result<f64> {
        let spec = RootSpec {
            rel_tol: 1e-13,
            bracket_expansion_factor: 2.0,
            ..RootSpec::default()
        };
        let seed = self.mean();
        find_root_monotone(|x| Ok(f(x)), target, (seed, seed), dir, &spec)
    }

    /// Inverse-CDF draw from a uniform variate `u ∈ (0, 1)`.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!(
                "uniform variate must lie in (0,1), got {u}"
            )));
        }
        if u > 0.5 {
            // 1 - u is exact here.
            self.tail_quantile(1.0 - u)
        } else {
            self.quantile(u)
        }
    }

    /// Generalized failure rate `ζ(t) = t f(t) / (1 - F(t))`.
    pub fn gfr(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain(format!("gfr requires t > 0, got {t}")));
        }
        let tail = self.tail(t);
        if !(tail > 0.0) {
            return Err(domain(format!("tail underflows at t = {t}")));
        }
        Ok(t * self.pdf(t) / tail)
    }

    /// `l = lim_{t→∞} ζ(t)`, known analytically per model.
    pub fn gfr_limit(&self) -> GfrLimit {
        match self.kind {
            FadingKind::Rayleigh { .. }
            | FadingKind::NakagamiM { .. }
            | FadingKind::Rician { .. } => GfrLimit::Infinite,
            FadingKind::LogLogistic => GfrLimit::Finite(1.0),
        }
    }
}

/// `Σ_j Pois(j; K) · term(j, y)` summed until the terms are negligible.
/// The Rician power gain is a Poisson(K) mixture of Gamma(j+1) laws.
fn rician_mixture<T: Fn(f64, f64) -> f64>(k: f64, y: f64, term: T) -> f64 {
    if k == 0.0 {
        return term(0.0, y);
    }
    let ln_k = k.ln();
    // Terms peak near j ≈ max(K, √(K y)).
    let peak = k.max((k * y).sqrt());
    let mut sum = 0.0;
    let mut j = 0usize;
    loop {
        let jf = j as f64;
        let w = (-k + jf * ln_k - ln_gamma(jf + 1.0)).exp();
        let t = w * term(jf, y);
        sum += t;
        if jf > peak + 10.0 && t <= 1e-17 * sum {
            break;
        }
        j += 1;
        if j > 1_000_000 {
            break;
        }
    }
    sum
}

/// `Σ_j Pois(j; K) · y^j e^{-y} / j!`, the Rician density in units of `y`.
fn rician_density_sum(k: f64, y: f64) -> f64 {
    if y == 0.0 {
        return (-k).exp();
    }
    let ln_y = y.ln();
    rician_mixture(k, y, |j, _| (j * ln_y - y - ln_gamma(j + 1.0)).exp())
}

/// JSON description of one user's channel, as read from a spec file.
///
/// `{"kind": "rayleigh", "mean_power_db": 0.0}`; mean power converts as
/// `γ̄ = 10^(db/10)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Rayleigh {
        #[serde(default)]
        mean_power_db: f64,
    },
    NakagamiM {
        #[serde(default = "default_nakagami_m")]
        m: f64,
        #[serde(default)]
        mean_power_db: f64,
    },
    Rician {
        #[serde(default)]
        k_factor: f64,
        #[serde(default)]
        mean_power_db: f64,
    },
    LogLogistic {},
}

fn default_nakagami_m() -> f64 {
    1.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ChannelSpec {
    pub fn to_model(&self) -> Result<FadingModel> {
        match *self {
            ChannelSpec::Rayleigh { mean_power_db } => {
                FadingModel::rayleigh(db_to_linear(mean_power_db))
            }
            ChannelSpec::NakagamiM { m, mean_power_db } => {
                FadingModel::nakagami(m, db_to_linear(mean_power_db))
            }
            ChannelSpec::Rician {
                k_factor,
                mean_power_db,
            } => FadingModel::rician(k_factor, db_to_linear(mean_power_db)),
            ChannelSpec::LogLogistic {} => Ok(FadingModel::log_logistic()),
        }
    }
}
