//! Rate vectors and region boundaries shared by the MAC and BC modules.

use serde::Serialize;

use crate::error::{invalid, Result};

/// A K-vector of rates in nats per symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub rates: Vec<f64>,
}

impl RatePoint {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(invalid(format!(
                "rates must be finite and nonnegative, got {r}"
            )));
        }
        Ok(Self { rates })
    }

    pub(crate) fn unchecked(rates: Vec<f64>) -> Self {
        Self { rates }
    }

    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Componentwise `self ≤ other·(1 + rel_tol)`.
    pub fn dominated_by(&self, other: &RatePoint, rel_tol: f64) -> bool {
        self.dim() == other.dim()
            && self
                .rates
                .iter()
                .zip(&other.rates)
                .all(|(a, b)| *a <= b * (1.0 + rel_tol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Rectangle,
    Onoff,
    Tdma,
    Sumrate,
    AwgnPentagon,
    Csir,
    BcDual,
    Timeshare,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Rectangle => "rectangle",
            RegionKind::Onoff => "onoff",
            RegionKind::Tdma => "tdma",
            RegionKind::Sumrate => "sumrate",
            RegionKind::AwgnPentagon => "awgn_pentagon",
            RegionKind::Csir => "csir",
            RegionKind::BcDual => "bc_dual",
            RegionKind::Timeshare => "timeshare",
        }
    }
}

/// `Σ_{i} weights[i] · R_{users[i]} ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumConstraint {
    pub users: Vec<usize>,
    pub weights: Vec<f64>,
    pub bound: f64,
    /// Zero for quadrature bounds; the Monte Carlo standard error otherwise.
    pub std_error: f64,
}

impl SumConstraint {
    pub fn unit(users: Vec<usize>, bound: f64) -> Self {
        let weights = vec![1.0; users.len()];
        Self {
            users,
            weights,
            bound,
            std_error: 0.0,
        }
    }

    pub fn holds(&self, point: &RatePoint, rel_tol: f64) -> bool {
        let lhs: f64 = self
            .users
            .iter()
            .zip(&self.weights)
            .map(|(&u, w)| w * point.rates[u])
            .sum();
        lhs <= self.bound * (1.0 + rel_tol)
    }
}

/// An ordered set of rate vectors, optionally with the linear constraints
/// that define the region exactly.
///
/// When `constraints` is nonempty the region is their intersection with the
/// nonnegative orthant. Otherwise it is the downward closure of `points`,
/// interpolated along the polyline for two users.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBoundary {
    pub kind: RegionKind,
    pub points: Vec<RatePoint>,
    pub constraints: Vec<SumConstraint>,
}

impl RegionBoundary {
    pub fn from_points(kind: RegionKind, points: Vec<RatePoint>) -> Self {
        Self {
            kind,
            points,
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, RatePoint::dim)
    }

    pub fn contains(&self, point: &RatePoint, rel_tol: f64) -> bool {
        if point.rates.iter().any(|r| *r < 0.0) {
            return false;
        }
        if !self.constraints.is_empty() {
            return self.constraints.iter().all(|c| c.holds(point, rel_tol));
        }
        if self.points.iter().any(|p| point.dominated_by(p, rel_tol)) {
            return true;
        }
        if point.dim() == 2 {
            return self.points.windows(2).any(|w| {
                let (a, b) = (&w[0].rates, &w[1].rates);
                let (lo, hi) = if a[0] <= b[0] { (a, b) } else { (b, a) };
                if point.rates[0] < lo[0] || point.rates[0] > hi[0] || hi[0] == lo[0] {
                    return false;
                }
                let t = (point.rates[0] - lo[0]) / (hi[0] - lo[0]);
                let y = lo[1] + t * (hi[1] - lo[1]);
                point.rates[1] <= y * (1.0 + rel_tol)
            });
        }
        false
    }

    /// Every listed point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &RegionBoundary, rel_tol: f64) -> bool {
        self.points.iter().all(|p| other.contains(p, rel_tol))
    }

    /// The point with the largest rate sum.
    pub fn max_sum_point(&self) -> Option<&RatePoint> {
        self.points
            .iter()
            .max_by(|a, b| a.sum().total_cmp(&b.sum()))
    }
}
