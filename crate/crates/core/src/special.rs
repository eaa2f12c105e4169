//! Exponential integral, evaluated independently of the quadrature path so
//! it can serve as a closed-form reference for Rayleigh fading.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// Power series below 1, modified-Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x < 1.0 {
        // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let contrib = term / kf;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `x - ln(1 + x)` without cancellation for small `x`.
pub fn x_minus_log1p(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // x²/2 - x³/3 + x⁴/4 - ...
        let mut sum = 0.0;
        let mut power = x;
        for k in 2..40 {
            power *= -x;
            let term = -power / k as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x - x.ln_1p()
    }
}
