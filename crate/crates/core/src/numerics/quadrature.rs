use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, invalid, Error, Result};

/// Accuracy controls for [`integrate_semiinf`] and [`integrate_interval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Tail mass, relative to the mass beyond the lower limit, below which
    /// the upper tail is dropped.
    pub tail_mass_cutoff: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            tail_mass_cutoff: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol must be positive"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(invalid("abs_tol must be nonnegative"));
        }
        if !(self.tail_mass_cutoff > 0.0 && self.tail_mass_cutoff <= 1e-10) {
            return Err(invalid("tail_mass_cutoff must lie in (0, 1e-10]"));
        }
        if self.max_subdivisions < 32 {
            return Err(invalid("max_subdivisions must be at least 32"));
        }
        Ok(())
    }
}

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the pop order is fully
    // determined by the inputs.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod_21<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += wg * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(domain(format!("integrand is not finite on [{a:e}, {b:e}]")));
    }
    Ok(Panel { a, b, value, error })
}

/// Globally adaptive Gauss-Kronrod over an initial partition.
fn adaptive<F>(f: &mut F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gauss_kronrod_21(f, w[0], w[1])?);
        }
    }
    if heap.is_empty() {
        return Ok(0.0);
    }

    let mut iterations = 0usize;
    loop {
        let (total, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if error <= tol {
            let mut panels: Vec<Panel> = heap.into_vec();
            panels.sort_by(|x, y| x.a.total_cmp(&y.a));
            return Ok(panels.iter().map(|p| p.value).sum());
        }
        if heap.len() >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                iterations,
                estimate: total,
                error,
            });
        }
        let worst = heap.pop().expect("heap is nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::NonConvergence {
                iterations,
                estimate: total,
                error,
            });
        }
        heap.push(gauss_kronrod_21(f, worst.a, mid)?);
        heap.push(gauss_kronrod_21(f, mid, worst.b)?);
        iterations += 1;
    }
}

/// Smallest abscissa above `from` (to a relative width of 1e-7) where the
/// tail drops to `target` or below.
fn tail_crossing<T>(tail: &T, from: f64, target: f64) -> Result<f64>
where
    T: Fn(f64) -> f64,
{
    if tail(from) <= target {
        return Ok(from);
    }
    let mut step = if from > 0.0 { from } else { 1.0 };
    let mut lo = from;
    let mut hi = from + step;
    let mut expansions = 0;
    while tail(hi) > target {
        lo = hi;
        step *= 2.0;
        hi = from + step;
        expansions += 1;
        if !hi.is_finite() || expansions > 2100 {
            return Err(domain("weight tail does not decay to zero"));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-7 * hi {
            break;
        }
        let mid = if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Integral of `integrand` over `[lower, ∞)` against a weight whose upper
/// tail is `weight_tail`.
///
/// The range is partitioned at the abscissae where the tail mass falls by
/// successive decades (relative to the mass beyond `lower`) and truncated
/// where it falls below `tail_mass_cutoff`. Each panel is then refined by
/// adaptive 21-point Gauss-Kronrod until the summed error estimate meets the
/// tolerance.
pub fn integrate_semiinf<F, T>(
    integrand: F,
    lower: f64,
    weight_tail: T,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    try_integrate_semiinf(|x| Ok(integrand(x)), lower, weight_tail, spec)
}

/// Fallible-integrand form of [`integrate_semiinf`]; the first integrand
/// error aborts the integration.
pub fn try_integrate_semiinf<F, T>(
    mut integrand: F,
    lower: f64,
    weight_tail: T,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
    T: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(lower >= 0.0) || !lower.is_finite() {
        return Err(domain(format!(
            "lower limit must be finite and >= 0, got {lower}"
        )));
    }
    let mass = weight_tail(lower);
    if !(mass > 0.0) {
        return Ok(0.0);
    }

    let decades = (-spec.tail_mass_cutoff.log10()).ceil() as i32;
    let mut breaks = vec![lower];
    let mut x = lower;
    for j in 1..=decades {
        let target = if j == decades {
            mass * spec.tail_mass_cutoff
        } else {
            mass * 10f64.powi(-j)
        };
        x = tail_crossing(&weight_tail, x, target)?;
        if x > *breaks.last().unwrap() {
            breaks.push(x);
        }
    }
    adaptive(&mut integrand, &breaks, spec)
}

/// Adaptive integral over a finite interval `[a, b]`.
pub fn integrate_interval<F>(integrand: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_integrate_interval(|x| Ok(integrand(x)), a, b, spec)
}

/// Fallible-integrand form of [`integrate_interval`].
pub fn try_integrate_interval<F>(
    mut integrand: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(domain("interval endpoints must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Ok(-adaptive(&mut integrand, &[b, a], spec)?);
    }
    adaptive(&mut integrand, &[a, b], spec)
}
