use crate::error::{invalid, Error, Result};

/// Direction of a monotone function, supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSpec {
    /// Accept `x` once `|g(x) - target| <= rel_tol * max(|target|, abs_floor)`.
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_iterations: usize,
    pub bracket_expansion_factor: f64,
    pub max_expansions: usize,
}

impl Default for RootSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_floor: f64::MIN_POSITIVE,
            max_iterations: 200,
            bracket_expansion_factor: 4.0,
            max_expansions: 500,
        }
    }
}

impl RootSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol must be positive"));
        }
        if self.max_iterations < 64 {
            return Err(invalid("max_iterations must be at least 64"));
        }
        if !(self.bracket_expansion_factor > 1.0) {
            return Err(invalid("bracket_expansion_factor must exceed 1"));
        }
        Ok(())
    }
}

fn expand_up(x: f64, width: f64, factor: f64) -> f64 {
    if x > 0.0 {
        x * factor
    } else {
        x + width.max(1.0) * factor
    }
}

fn expand_down(x: f64, width: f64, factor: f64) -> f64 {
    if x > 0.0 {
        x / factor
    } else {
        x - width.max(1.0) * factor
    }
}

/// Solves `g(x) = target` for a strictly monotone `g`.
///
/// The initial bracket is widened by `bracket_expansion_factor` on whichever
/// side fails to straddle the target; positive endpoints expand
/// geometrically and stay positive. Inside the bracket, Illinois false
/// position steps are interleaved with bisection whenever the bracket fails
/// to halve.
pub fn find_root_monotone<G>(
    mut g: G,
    target: f64,
    initial_bracket: (f64, f64),
    direction: Monotonicity,
    spec: &RootSpec,
) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !target.is_finite() {
        return Err(invalid("target must be finite"));
    }
    let (mut lo, mut hi) = initial_bracket;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("malformed bracket ({lo}, {hi})")));
    }
    let sign = match direction {
        Monotonicity::Increasing => 1.0,
        Monotonicity::Decreasing => -1.0,
    };
    let tol = spec.rel_tol * target.abs().max(spec.abs_floor);
    let mut phi = |x: f64| -> Result<f64> { Ok(sign * (g(x)? - target)) };

    let mut f_lo = phi(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut f_hi = if hi == lo { f_lo } else { phi(hi)? };
    if f_hi == 0.0 {
        return Ok(hi);
    }

    let factor = spec.bracket_expansion_factor;
    let mut expansions = 0;
    while f_lo > 0.0 {
        let width = hi - lo;
        hi = lo;
        f_hi = f_lo;
        lo = expand_down(lo, width, factor);
        expansions += 1;
        if expansions > spec.max_expansions || !lo.is_finite() {
            return Err(Error::BracketFailure { target, lo, hi });
        }
        f_lo = phi(lo)?;
        if f_lo == 0.0 {
            return Ok(lo);
        }
    }
    while f_hi < 0.0 {
        let width = hi - lo;
        lo = hi;
        f_lo = f_hi;
        hi = expand_up(hi, width, factor);
        expansions += 1;
        if expansions > spec.max_expansions || !hi.is_finite() {
            return Err(Error::BracketFailure { target, lo, hi });
        }
        f_hi = phi(hi)?;
        if f_hi == 0.0 {
            return Ok(hi);
        }
    }
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }

    // Illinois bookkeeping: which end was retained last time.
    let mut retained: i8 = 0;
    let mut width_before = hi - lo;
    let mut force_bisect = false;
    for iteration in 0..spec.max_iterations {
        let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        let x = if !force_bisect && secant > lo && secant < hi {
            secant
        } else if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            // Bracket has collapsed to adjacent floats.
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        let fx = phi(x)?;
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if retained == 1 {
                f_hi *= 0.5;
            }
            retained = 1;
        } else {
            hi = x;
            f_hi = fx;
            if retained == -1 {
                f_lo *= 0.5;
            }
            retained = -1;
        }
        // Every second step must have at least halved the bracket.
        if iteration % 2 == 1 {
            let width = hi - lo;
            force_bisect = width > 0.5 * width_before;
            width_before = width;
        } else {
            force_bisect = false;
        }
    }
    Err(Error::NonConvergence {
        iterations: spec.max_iterations,
        estimate: 0.5 * (lo + hi),
        error: hi - lo,
    })
}
