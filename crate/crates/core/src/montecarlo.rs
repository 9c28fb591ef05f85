//! Brute-force link simulator used as an independent oracle.
//!
//! Every realization draws the BS-UE amplitude and `N` BS-IRS / IRS-UE
//! amplitude pairs, forms `SNR = P (rho sum g_n h_n + c1 Z)^2 / sigma^2`
//! and compares it with the threshold. The analytical regime of a scenario
//! is ignored: the simulator always uses the exact per-element model.
//!
//! Samples are split into a fixed number of substreams; substream `k` is a
//! ChaCha8 generator seeded with `seed` on stream `k`, so every sample has
//! a fixed position in the random sequence regardless of which worker
//! evaluates it. Tallies are integer counts or are merged in stream order.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{impls, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::coverage::{Mode, Scenario};
use crate::model::{cascade_mean_var, NakagamiParams};
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_STREAMS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    pub streams: u32,
    /// Pair every realization with one driven by the complemented random
    /// words of the first.
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            streams: DEFAULT_STREAMS,
            antithetic: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                value: 0.0,
                reason: "at least one sample is needed",
            });
        }
        if self.streams == 0 {
            return Err(Error::InvalidParameter {
                name: "streams",
                value: 0.0,
                reason: "at least one stream is needed",
            });
        }
        Ok(())
    }

    /// Number of samples assigned to substream `k`.
    pub fn stream_len(&self, k: u32) -> u64 {
        let streams = u64::from(self.streams);
        self.samples / streams + u64::from(u64::from(k) < self.samples % streams)
    }

    pub fn stream_rng(&self, k: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::from(k));
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub coverage: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub std_error: f64,
    pub samples_used: u64,
}

impl SimEstimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let p = if samples == 0 { 0.0 } else { hits as f64 / n };
        Self {
            coverage: p,
            std_error: if samples == 0 {
                0.0
            } else {
                libm::sqrt(p * (1.0 - p) / n)
            },
            samples_used: samples,
        }
    }
}

/// Nakagami amplitude as the square root of a gamma variate with shape `m`
/// and scale `Omega / m`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiSampler {
    power: Gamma<f64>,
}

impl NakagamiSampler {
    pub fn new(p: &NakagamiParams) -> Result<Self> {
        let power = Gamma::new(p.m(), p.omega() / p.m()).map_err(|_| Error::InvalidParameter {
            name: "m",
            value: p.m(),
            reason: "gamma sampler rejected the shape",
        })?;
        Ok(Self { power })
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        libm::sqrt(self.power.sample(rng))
    }
}

pub fn sample_nakagami<R: RngCore + ?Sized>(p: &NakagamiParams, rng: &mut R) -> f64 {
    NakagamiSampler::new(p)
        .expect("validated Nakagami parameters")
        .sample(rng)
}

/// Records every word drawn from the wrapped generator.
struct Recorder<'a, R> {
    rng: &'a mut R,
    log: &'a mut Vec<u64>,
}

impl<R: RngCore> RngCore for Recorder<'_, R> {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        let w = self.rng.next_u64();
        self.log.push(w);
        w
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Replays the complement of a recorded sequence, then continues with
/// fresh words. The recorded length is a stopping time of the original
/// sequence, so the replayed stream is again i.i.d. uniform.
struct Mirror<'a, R> {
    rng: &'a mut R,
    log: &'a [u64],
    pos: usize,
}

impl<R: RngCore> RngCore for Mirror<'_, R> {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        match self.log.get(self.pos) {
            Some(&w) => {
                self.pos += 1;
                !w
            }
            None => self.rng.next_u64(),
        }
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Runs `count` realizations of `draw` on one substream, in antithetic
/// pairs when requested.
fn run_stream<F>(cfg: &SimConfig, k: u32, mut draw: F, mut record: impl FnMut(f64))
where
    F: FnMut(&mut dyn RngCore) -> f64,
{
    let mut rng = cfg.stream_rng(k);
    let mut left = cfg.stream_len(k);
    if cfg.antithetic {
        let mut log = Vec::new();
        while left >= 2 {
            log.clear();
            record(draw(&mut Recorder {
                rng: &mut rng,
                log: &mut log,
            }));
            record(draw(&mut Mirror {
                rng: &mut rng,
                log: &log,
                pos: 0,
            }));
            left -= 2;
        }
    }
    for _ in 0..left {
        record(draw(&mut rng));
    }
}

struct LinkSampler {
    power_over_noise: f64,
    direct: Option<(f64, NakagamiSampler)>,
    cascade: Option<(f64, u32, NakagamiSampler, NakagamiSampler)>,
}

impl LinkSampler {
    fn new(sc: &Scenario) -> Result<Self> {
        let direct = match sc.mode {
            Mode::IrsOnly => None,
            _ => Some((
                sc.geom.direct_gain(),
                NakagamiSampler::new(&sc.fading.bs_ue)?,
            )),
        };
        let cascade = match sc.mode {
            Mode::DirectOnly => None,
            _ => Some((
                sc.geom.cascade_gain(),
                sc.sys.n_elements(),
                NakagamiSampler::new(&sc.fading.bs_irs)?,
                NakagamiSampler::new(&sc.fading.irs_ue)?,
            )),
        };
        Ok(Self {
            power_over_noise: sc.sys.power_w() / sc.sys.noise_var(),
            direct,
            cascade,
        })
    }

    fn snr(&self, rng: &mut dyn RngCore) -> f64 {
        let mut amplitude = 0.0;
        if let Some((c1, q)) = &self.direct {
            amplitude += c1 * q.sample(rng);
        }
        if let Some((rho, n, g, h)) = &self.cascade {
            let mut sum = 0.0;
            for _ in 0..*n {
                sum += g.sample(rng) * h.sample(rng);
            }
            amplitude += rho * sum;
        }
        self.power_over_noise * amplitude * amplitude
    }
}

/// Exceedance counts of one substream for a list of SNR thresholds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamTally {
    pub hits: Vec<u64>,
    pub samples: u64,
}

/// Simulates substream `k`, counting realizations with `SNR > theta` for
/// every `theta` in `thetas` (common random numbers across thresholds).
pub fn coverage_stream(
    sc: &Scenario,
    thetas: &[f64],
    cfg: &SimConfig,
    k: u32,
) -> Result<StreamTally> {
    cfg.validate()?;
    let link = LinkSampler::new(sc)?;
    let mut hits = vec![0u64; thetas.len()];
    let mut samples = 0;
    run_stream(
        cfg,
        k,
        |rng| link.snr(rng),
        |snr| {
            samples += 1;
            for (h, &theta) in hits.iter_mut().zip(thetas) {
                *h += u64::from(snr > theta);
            }
        },
    );
    Ok(StreamTally { hits, samples })
}

/// Combines substream tallies in order.
pub fn merge_coverage(tallies: &[StreamTally]) -> Vec<SimEstimate> {
    let width = tallies.first().map_or(0, |t| t.hits.len());
    let samples: u64 = tallies.iter().map(|t| t.samples).sum();
    (0..width)
        .map(|i| SimEstimate::from_counts(tallies.iter().map(|t| t.hits[i]).sum(), samples))
        .collect()
}

/// Empirical coverage for each `theta` (linear SNR threshold).
pub fn simulate_coverage_grid(
    sc: &Scenario,
    thetas: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<SimEstimate>> {
    cfg.validate()?;
    let tallies = (0..cfg.streams)
        .map(|k| coverage_stream(sc, thetas, cfg, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_coverage(&tallies))
}

/// Empirical `P(SNR > theta)` for the scenario's mode and threshold.
pub fn simulate_coverage(sc: &Scenario, cfg: &SimConfig) -> Result<SimEstimate> {
    Ok(simulate_coverage_grid(sc, &[sc.sys.theta()], cfg)?[0])
}

/// Shifted power sums of one substream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTally {
    pub shift: f64,
    pub samples: u64,
    pub sums: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardeningEstimate {
    /// Empirical mean over standard deviation of `|h_c|`.
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub std_error: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub samples_used: u64,
}

/// Power sums of `sum_n g_n h_n` on substream `k`. The path gain cancels in
/// the mean-to-deviation ratio and is left out.
pub fn hardening_stream(
    n: u32,
    g: &NakagamiParams,
    h: &NakagamiParams,
    cfg: &SimConfig,
    k: u32,
) -> Result<MomentTally> {
    cfg.validate()?;
    let (mean, _) = cascade_mean_var(g, h)?;
    let shift = f64::from(n) * mean;
    let (gs, hs) = (NakagamiSampler::new(g)?, NakagamiSampler::new(h)?);
    let mut tally = MomentTally {
        shift,
        samples: 0,
        sums: [0.0; 4],
    };
    run_stream(
        cfg,
        k,
        |rng| (0..n).map(|_| gs.sample(rng) * hs.sample(rng)).sum::<f64>(),
        |y| {
            let x = y - shift;
            let x2 = x * x;
            tally.samples += 1;
            tally.sums[0] += x;
            tally.sums[1] += x2;
            tally.sums[2] += x2 * x;
            tally.sums[3] += x2 * x2;
        },
    );
    Ok(tally)
}

/// Combines substream power sums in order into the ratio estimate.
pub fn merge_hardening(tallies: &[MomentTally]) -> Result<HardeningEstimate> {
    let first = tallies
        .first()
        .ok_or(Error::InvalidScenario("no substreams to merge"))?;
    let mut s = [0.0; 4];
    let mut count = 0u64;
    for t in tallies {
        count += t.samples;
        for (acc, v) in s.iter_mut().zip(t.sums) {
            *acc += v;
        }
    }
    if count < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: count as f64,
            reason: "hardening needs at least two samples",
        });
    }
    let n = count as f64;
    let [r1, r2, r3, r4] = s.map(|v| v / n);
    let a = r1;
    let m2 = r2 - a * a;
    let m3 = r3 - 3.0 * a * r2 + 2.0 * a * a * a;
    let m4 = r4 - 4.0 * a * r3 + 6.0 * a * a * r2 - 3.0 * a * a * a * a;
    let mean = first.shift + a;
    let std_dev = libm::sqrt(m2 * n / (n - 1.0));
    let ratio = mean / std_dev;
    let skew = m3 / (m2 * libm::sqrt(m2));
    let kurt = m4 / (m2 * m2);
    let var = (1.0 + ratio * ratio * (kurt - 1.0) / 4.0 - ratio * skew) / n;
    Ok(HardeningEstimate {
        ratio,
        std_error: libm::sqrt(var.max(0.0)),
        mean,
        std_dev,
        samples_used: count,
    })
}

/// Empirical channel-hardening ratio of `|h_c|` with `n` elements.
pub fn simulate_hardening(
    n: u32,
    g: &NakagamiParams,
    h: &NakagamiParams,
    cfg: &SimConfig,
) -> Result<HardeningEstimate> {
    let tallies = (0..cfg.streams)
        .map(|k| hardening_stream(n, g, h, cfg, k))
        .collect::<Result<Vec<_>>>()?;
    merge_hardening(&tallies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{channel_hardening_kappa, coverage_combined, coverage_direct, Regime};
    use crate::model::{db_to_linear, noise_power_w, FadingConfig, LinkGeometry, SystemParams};
    use crate::specfun::gamma_ratio;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, libm::sqrt(var / n))
    }

    fn draws(p: &NakagamiParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = NakagamiSampler::new(p).unwrap();
        (0..n).map(|_| s.sample(&mut rng)).collect()
    }

    fn paper(m: f64, n: u32, theta_db: f64, mode: Mode) -> Scenario {
        let geom = LinkGeometry::with_zeta(500.0, 100.0, 85f64.to_radians(), 4.0, 1.0).unwrap();
        let sys = SystemParams::new(
            2.5,
            noise_power_w(-174.0, 1e8, 10.0).unwrap(),
            n,
            db_to_linear(theta_db),
        )
        .unwrap();
        let fading = FadingConfig::uniform(NakagamiParams::new(m, 1.0).unwrap());
        Scenario::new(geom, fading, sys, mode, Regime::FiniteIid)
    }

    #[test]
    fn power_and_first_moment() {
        for (m, omega) in [(0.5, 1.0), (1.0, 2.0), (2.0, 0.7), (3.3, 1.0)] {
            let p = NakagamiParams::new(m, omega).unwrap();
            let z = draws(&p, 1_000_000, 7);
            let sq: Vec<f64> = z.iter().map(|v| v * v).collect();
            let (mean2, se2) = mean_se(&sq);
            assert!(
                (mean2 - omega).abs() < 3.0 * se2,
                "m={m}: {mean2} vs {omega}"
            );
            let expected = gamma_ratio(m + 0.5, m).unwrap() * libm::sqrt(omega / m);
            let (mean1, se1) = mean_se(&z);
            assert!(
                (mean1 - expected).abs() < 3.0 * se1,
                "m={m}: {mean1} vs {expected}"
            );
        }
    }

    #[test]
    fn rayleigh_power_is_exponential() {
        let p = NakagamiParams::new(1.0, 1.0).unwrap();
        let mut sq: Vec<f64> = draws(&p, 5000, 11).iter().map(|v| v * v).collect();
        sq.sort_by(f64::total_cmp);
        let n = sq.len() as f64;
        let d = sq
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = 1.0 - libm::exp(-x);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max);
        // Kolmogorov critical value at level 0.01
        assert!(d < 1.6276 / libm::sqrt(n), "{d}");
    }

    #[test]
    fn vanishing_threshold_is_always_covered() {
        let sc = paper(1.0, 20, -300.0, Mode::Combined);
        let cfg = SimConfig {
            samples: 2000,
            ..SimConfig::default()
        };
        let e = simulate_coverage(&sc, &cfg).unwrap();
        assert_eq!(e.coverage, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.samples_used, 2000);
    }

    #[test]
    fn empty_surface_reproduces_direct() {
        let cfg = SimConfig {
            samples: 20_000,
            seed: 3,
            ..SimConfig::default()
        };
        let sc = paper(2.0, 0, 5.0, Mode::Combined);
        let combined = simulate_coverage(&sc, &cfg).unwrap();
        let direct = simulate_coverage(&sc.with_mode(Mode::DirectOnly), &cfg).unwrap();
        assert_eq!(combined, direct);
        let exact = coverage_direct(&sc.with_mode(Mode::DirectOnly))
            .unwrap()
            .probability;
        assert!((direct.coverage - exact).abs() < 4.0 * direct.std_error);
    }

    #[test]
    fn stream_order_does_not_matter() {
        let sc = paper(1.0, 8, 0.0, Mode::Combined);
        let cfg = SimConfig {
            samples: 3001,
            seed: 99,
            streams: 7,
            antithetic: true,
        };
        let thetas = [db_to_linear(-5.0), 1.0, db_to_linear(5.0)];
        let forward = simulate_coverage_grid(&sc, &thetas, &cfg).unwrap();
        let mut tallies: Vec<_> = (0..cfg.streams)
            .rev()
            .map(|k| coverage_stream(&sc, &thetas, &cfg, k).unwrap())
            .collect();
        tallies.reverse();
        assert_eq!(merge_coverage(&tallies), forward);
        assert_eq!(forward[0].samples_used, 3001);
        let total: u64 = (0..cfg.streams).map(|k| cfg.stream_len(k)).sum();
        assert_eq!(total, 3001);
    }

    #[test]
    fn analytic_agreement() {
        let cfg = SimConfig {
            samples: 100_000,
            seed: 5,
            ..SimConfig::default()
        };
        for antithetic in [false, true] {
            let cfg = SimConfig { antithetic, ..cfg };
            let sc = paper(1.0, 50, 5.0, Mode::Combined);
            let sim = simulate_coverage(&sc, &cfg).unwrap();
            let exact = coverage_combined(&sc.with_regime(Regime::FiniteInid))
                .unwrap()
                .probability;
            assert!(
                (sim.coverage - exact).abs() < (0.01f64).max(3.0 * sim.std_error),
                "{antithetic}: {sim:?} vs {exact}"
            );
        }
    }

    #[test]
    fn hardening_ratio() {
        let cfg = SimConfig {
            samples: 40_000,
            seed: 1,
            ..SimConfig::default()
        };
        for m in [0.5, 1.0, 2.0] {
            let p = NakagamiParams::new(m, 1.0).unwrap();
            for n in [1, 10] {
                let e = simulate_hardening(n, &p, &p, &cfg).unwrap();
                let k = channel_hardening_kappa(n, m, false).unwrap();
                assert!(
                    (e.ratio - k).abs() < 3.0 * e.std_error,
                    "m={m} n={n}: {e:?} vs {k}"
                );
            }
        }
    }

    #[test]
    fn bad_config() {
        let sc = paper(1.0, 1, 0.0, Mode::Combined);
        let zero = SimConfig {
            samples: 0,
            ..SimConfig::default()
        };
        assert!(simulate_coverage(&sc, &zero).is_err());
        let none = SimConfig {
            streams: 0,
            ..SimConfig::default()
        };
        assert!(simulate_coverage(&sc, &none).is_err());
    }
}
