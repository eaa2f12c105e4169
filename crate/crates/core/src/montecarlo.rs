//! Seeded Monte Carlo evaluation of power policies over independent fading.
//!
//! Gains for sample `i` and user `k` come from a ChaCha8 keystream keyed by
//! the seed, at word offset `2(iK + k)`. Any sample can be regenerated in
//! isolation, so blocks run in parallel and the merged statistics do not
//! depend on the number of worker threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fading::FadingModel;
use crate::single_user::OnOffPolicy1U;

/// Activation probability below which plain sampling is flagged as
/// unreliable.
pub const RARE_EVENT_THRESHOLD: f64 = 1e-4;

/// A rule mapping the gains of one fading state to transmit powers.
pub trait PowerPolicy: Sync {
    fn num_users(&self) -> usize;

    /// Writes one power per user into `powers`.
    fn allocate(&self, gains: &[f64], powers: &mut [f64]);
}

/// Transmits nothing.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPolicy {
    pub users: usize,
}

impl PowerPolicy for ZeroPolicy {
    fn num_users(&self) -> usize {
        self.users
    }

    fn allocate(&self, _gains: &[f64], powers: &mut [f64]) {
        powers.fill(0.0);
    }
}

/// Single-user water-filling `(1/λ - 1/γ)⁺`.
#[derive(Debug, Clone, Copy)]
pub struct WaterFillingPolicy {
    pub lambda: f64,
}

impl PowerPolicy for WaterFillingPolicy {
    fn num_users(&self) -> usize {
        1
    }

    fn allocate(&self, gains: &[f64], powers: &mut [f64]) {
        let g = gains[0];
        powers[0] = if g > self.lambda {
            (g - self.lambda) / (self.lambda * g)
        } else {
            0.0
        };
    }
}

impl PowerPolicy for OnOffPolicy1U {
    fn num_users(&self) -> usize {
        1
    }

    fn allocate(&self, gains: &[f64], powers: &mut [f64]) {
        powers[0] = self.power(gains[0]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub batch: u64,
}

impl SimConfig {
    pub const MIN_SAMPLES: u64 = 10_000;

    pub fn new(n_samples: u64, seed: u64, batch: u64) -> Result<Self> {
        let c = Self {
            n_samples,
            seed,
            batch,
        };
        c.validate()?;
        Ok(c)
    }

    /// Uses the largest block size up to 10⁴ that divides `n_samples`.
    pub fn with_default_batch(n_samples: u64, seed: u64) -> Result<Self> {
        let batch = (1..=10_000u64.min(n_samples.max(1)))
            .rev()
            .find(|b| n_samples.is_multiple_of(*b))
            .unwrap_or(1);
        Self::new(n_samples, seed, batch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < Self::MIN_SAMPLES {
            return Err(invalid(format!(
                "n_samples must be at least {}, got {}",
                Self::MIN_SAMPLES,
                self.n_samples
            )));
        }
        if self.batch == 0 || !self.n_samples.is_multiple_of(self.batch) {
            return Err(invalid(format!(
                "batch {} must divide n_samples {}",
                self.batch, self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserStats {
    pub empirical_rate: f64,
    pub empirical_power: f64,
    pub standard_error_rate: f64,
    pub standard_error_power: f64,
    pub activation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub users: Vec<UserStats>,
    pub n_samples: u64,
    /// Fraction of states in which two or more users transmit.
    pub overlap_fraction: f64,
    /// Some user's activation fraction fell below [`RARE_EVENT_THRESHOLD`].
    pub rare_event: bool,
}

/// Running mean and centered second moment.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * (b.n / n),
            m2: a.m2 + b.m2 + d * d * (a.n * b.n / n),
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

#[derive(Debug, Clone, Default)]
struct BlockStats {
    rate: Vec<Moments>,
    power: Vec<Moments>,
    active: Vec<u64>,
    overlap: u64,
}

impl BlockStats {
    fn new(k: usize) -> Self {
        Self {
            rate: vec![Moments::default(); k],
            power: vec![Moments::default(); k],
            active: vec![0; k],
            overlap: 0,
        }
    }

    fn merge(mut a: BlockStats, b: BlockStats) -> BlockStats {
        for k in 0..a.rate.len() {
            a.rate[k] = Moments::merge(a.rate[k], b.rate[k]);
            a.power[k] = Moments::merge(a.power[k], b.power[k]);
            a.active[k] += b.active[k];
        }
        a.overlap += b.overlap;
        a
    }
}

/// Pairwise reduction in index order; the tree shape depends only on the
/// number of blocks.
fn merge_tree(mut blocks: Vec<BlockStats>) -> BlockStats {
    while blocks.len() > 1 {
        let mut next = Vec::with_capacity(blocks.len().div_ceil(2));
        let mut it = blocks.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(BlockStats::merge(a, b)),
                None => next.push(a),
            }
        }
        blocks = next;
    }
    blocks.pop().expect("at least one block")
}

/// Uniform variate strictly inside `(0, 1)` from 52 random bits.
fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Keystream positioned at the first variate of sample `index`.
fn stream_at(seed: u64, index: u64, users: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * (index as u128) * users as u128);
    rng
}

/// Fills `out` with the uniform variates of sample `index`.
pub fn uniforms(seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = stream_at(seed, index, out.len());
    for u in out.iter_mut() {
        *u = open_unit(rng.next_u64());
    }
}

/// Fills `gains` with the inverse-CDF draws of sample `index`.
pub fn draw_gains(models: &[FadingModel], seed: u64, index: u64, gains: &mut [f64]) -> Result<()> {
    let mut rng = stream_at(seed, index, models.len());
    for (g, m) in gains.iter_mut().zip(models) {
        *g = m.sample(open_unit(rng.next_u64()))?;
    }
    Ok(())
}

fn run_blocks<F>(config: &SimConfig, users: usize, block: F) -> Result<BlockStats>
where
    F: Fn(u64, u64, &mut BlockStats) -> Result<()> + Sync,
{
    config.validate()?;
    let n_blocks = config.n_samples / config.batch;
    let results: Vec<Result<BlockStats>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut stats = BlockStats::new(users);
            let start = b * config.batch;
            block(start, start + config.batch, &mut stats)?;
            Ok(stats)
        })
        .collect();
    let blocks = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(merge_tree(blocks))
}

fn report(stats: BlockStats, n: u64, flag_rare: bool) -> SimReport {
    let nf = n as f64;
    let users: Vec<UserStats> = (0..stats.rate.len())
        .map(|k| UserStats {
            empirical_rate: stats.rate[k].mean,
            empirical_power: stats.power[k].mean,
            standard_error_rate: stats.rate[k].std_error(),
            standard_error_power: stats.power[k].std_error(),
            activation_fraction: stats.active[k] as f64 / nf,
        })
        .collect();
    let rare_event = flag_rare
        && users
            .iter()
            .any(|u| u.activation_fraction < RARE_EVENT_THRESHOLD);
    if rare_event {
        log::warn!(
            "activation probability below {RARE_EVENT_THRESHOLD:e}; \
             estimates are unreliable, consider conditional sampling beyond the threshold"
        );
    }
    SimReport {
        users,
        n_samples: n,
        overlap_fraction: stats.overlap as f64 / nf,
        rare_event,
    }
}

/// Empirical rates `E[ln(1 + γ_k p_k)]` and powers `E[p_k]` of `policy`.
pub fn simulate<P: PowerPolicy + ?Sized>(
    models: &[FadingModel],
    policy: &P,
    config: &SimConfig,
) -> Result<SimReport> {
    let k = models.len();
    if k == 0 || policy.num_users() != k {
        return Err(invalid(format!(
            "policy serves {} users but {} fading models were given",
            policy.num_users(),
            k
        )));
    }
    let stats = run_blocks(config, k, |start, end, stats| {
        let mut rng = stream_at(config.seed, start, k);
        let mut gains = vec![0.0; k];
        let mut powers = vec![0.0; k];
        for _ in start..end {
            for (g, m) in gains.iter_mut().zip(models) {
                *g = m.sample(open_unit(rng.next_u64()))?;
            }
            policy.allocate(&gains, &mut powers);
            let mut on = 0;
            for user in 0..k {
                let p = powers[user];
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Policy { user, power: p });
                }
                if p > 0.0 {
                    on += 1;
                    stats.active[user] += 1;
                }
                stats.rate[user].push((gains[user] * p).ln_1p());
                stats.power[user].push(p);
            }
            if on > 1 {
                stats.overlap += 1;
            }
        }
        Ok(())
    })?;
    Ok(report(stats, config.n_samples, true))
}

/// Single-user on-off evaluated by sampling only the active region
/// `γ ≥ τ` and reweighting by its probability.
pub fn simulate_onoff_conditional(
    model: &FadingModel,
    policy: &OnOffPolicy1U,
    config: &SimConfig,
) -> Result<SimReport> {
    let p_on = model.tail(policy.threshold);
    if !(p_on > 0.0) {
        return Err(Error::DegenerateActivation {
            user: 0,
            probability: p_on,
        });
    }
    let stats = run_blocks(config, 1, |start, end, stats| {
        let mut rng = stream_at(config.seed, start, 1);
        for _ in start..end {
            let u = open_unit(rng.next_u64());
            let g = model.tail_quantile(u * p_on)?.max(policy.threshold);
            stats.rate[0].push(p_on * (g * policy.on_power).ln_1p());
            stats.power[0].push(p_on * policy.on_power);
        }
        Ok(())
    })?;
    let mut r = report(stats, config.n_samples, false);
    r.users[0].activation_fraction = p_on;
    Ok(r)
}

/// Mean and standard error of `statistic` over sampled gain vectors.
pub fn estimate<F>(models: &[FadingModel], config: &SimConfig, statistic: F) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = models.len();
    let stats = run_blocks(config, 1, |start, end, stats| {
        let mut rng = stream_at(config.seed, start, k);
        let mut gains = vec![0.0; k];
        for _ in start..end {
            for (g, m) in gains.iter_mut().zip(models) {
                *g = m.sample(open_unit(rng.next_u64()))?;
            }
            stats.rate[0].push(statistic(&gains));
        }
        Ok(())
    })?;
    Ok((stats.rate[0].mean, stats.rate[0].std_error()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ray() -> FadingModel {
        FadingModel::rayleigh(1.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(9_999, 1, 1).is_err());
        assert!(SimConfig::new(10_000, 1, 3).is_err());
        assert!(SimConfig::new(10_000, 1, 0).is_err());
        let c = SimConfig::with_default_batch(30_000, 1).unwrap();
        assert_eq!(c.batch, 10_000);
        let c = SimConfig::with_default_batch(10_007, 1).unwrap();
        assert_eq!(c.batch, 1);
    }

    #[test]
    fn streams_are_positional() {
        // Reading sample 5 sequentially from sample 0 matches jumping there.
        let mut rng = stream_at(42, 0, 3);
        for _ in 0..15 {
            rng.next_u64();
        }
        let mut direct = [0.0; 3];
        uniforms(42, 5, &mut direct);
        for u in direct {
            assert_eq!(u, open_unit(rng.next_u64()));
        }
    }

    #[test]
    fn open_unit_is_interior() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn zero_policy_is_exactly_zero() {
        let c = SimConfig::new(10_000, 3, 1_000).unwrap();
        let r = simulate(&[ray(), ray()], &ZeroPolicy { users: 2 }, &c).unwrap();
        for u in &r.users {
            assert_eq!(u.empirical_rate, 0.0);
            assert_eq!(u.empirical_power, 0.0);
            assert_eq!(u.activation_fraction, 0.0);
        }
        assert_eq!(r.overlap_fraction, 0.0);
    }

    struct Negative;
    impl PowerPolicy for Negative {
        fn num_users(&self) -> usize {
            1
        }
        fn allocate(&self, _g: &[f64], p: &mut [f64]) {
            p[0] = -1.0;
        }
    }

    #[test]
    fn negative_power_is_rejected() {
        let c = SimConfig::new(10_000, 3, 1_000).unwrap();
        let r = simulate(&[ray()], &Negative, &c);
        assert!(matches!(r, Err(Error::Policy { user: 0, .. })));
    }

    #[test]
    fn user_count_mismatch_is_rejected() {
        let c = SimConfig::new(10_000, 3, 1_000).unwrap();
        assert!(simulate(&[ray(), ray()], &ZeroPolicy { users: 1 }, &c).is_err());
    }

    #[test]
    fn mean_gain_estimate() {
        let c = SimConfig::new(200_000, 11, 10_000).unwrap();
        let (m, se) = estimate(&[ray()], &c, |g| g[0]).unwrap();
        assert!((m - 1.0).abs() < 4.0 * se, "{m} ± {se}");
    }
}
