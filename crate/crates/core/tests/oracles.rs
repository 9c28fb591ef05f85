//! Analytic routes checked against brute-force sampling.

use irscov_core::coverage::{coverage, coverage_direct, Mode, Regime, Scenario};
use irscov_core::mgf::{mgf_nakagami, ChannelTransform};
use irscov_core::model::{
    cascade_mean_var, db_to_linear, double_nakagami_moment, noise_power_w, FadingConfig,
    LinkGeometry, NakagamiParams, SystemParams,
};
use irscov_core::montecarlo::{sample_nakagami, simulate_coverage, SimConfig};
use irscov_core::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn naka(m: f64) -> NakagamiParams {
    NakagamiParams::new(m, 1.0).unwrap()
}

/// Sample mean and its standard error.
fn mean_se(n: usize, mut draw: impl FnMut() -> f64) -> (f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = draw();
        s += x;
        s2 += x * x;
    }
    let mean = s / n as f64;
    let var = (s2 / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn paper(m: f64, n: u32, theta_db: f64, mode: Mode, regime: Regime) -> Scenario {
    let geom = LinkGeometry::with_zeta(500.0, 100.0, 85f64.to_radians(), 4.0, 1.0).unwrap();
    let noise = noise_power_w(-174.0, 1e8, 10.0).unwrap();
    let sys = SystemParams::new(2.5, noise, n, db_to_linear(theta_db)).unwrap();
    Scenario::new(geom, FadingConfig::uniform(naka(m)), sys, mode, regime)
}

#[test]
fn double_nakagami_moments_match_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (m1, m2) in [(0.5, 0.5), (1.0, 1.0), (0.75, 2.0)] {
        let (g, h) = (naka(m1), naka(m2));
        for b in [1.0, 2.0, 3.0] {
            let (mean, se) = mean_se(1_000_000, || {
                let y = sample_nakagami(&g, &mut rng) * sample_nakagami(&h, &mut rng);
                y.powf(b)
            });
            let exact = double_nakagami_moment(b, &g, &h).unwrap();
            assert!(
                (mean - exact).abs() < 3.0 * se,
                "m=({m1},{m2}) b={b}: {mean} {exact} {se}"
            );
        }
    }
    let (mean, var) = cascade_mean_var(&naka(0.5), &naka(0.5)).unwrap();
    assert!((mean - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    assert!((var - (1.0 - 4.0 / std::f64::consts::PI.powi(2))).abs() < 1e-12);
}

#[test]
fn nakagami_transform_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let p = naka(2.0);
    let (mean, se) = mean_se(10_000_000, || (-sample_nakagami(&p, &mut rng)).exp());
    let exact = mgf_nakagami(&p, Complex64::new(1.0, 0.0)).unwrap().re;
    assert!((mean - exact).abs() < 3.0 * se, "{mean} {exact} {se}");
}

#[test]
fn single_element_cascade_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = naka(1.0);
    let (mean, se) = mean_se(10_000_000, || {
        (-sample_nakagami(&p, &mut rng) * sample_nakagami(&p, &mut rng)).exp()
    });
    let t = ChannelTransform::double_nakagami(p, p, 1.0, 1).unwrap();
    let exact = t.mgf(Complex64::new(1.0, 0.0)).unwrap().re;
    assert!((mean - exact).abs() < 3.0 * se, "{mean} {exact} {se}");
    let three = ChannelTransform::double_nakagami(p, p, 1.0, 3).unwrap();
    let s = Complex64::new(0.4, -2.0);
    assert!((three.mgf(s).unwrap() - t.mgf(s).unwrap().powu(3)).norm() < 1e-14);
}

#[test]
fn clt_moments_match_sampled_cascade() {
    let sc = paper(0.5, 500, 5.0, Mode::IrsOnly, Regime::AsymptoticClt);
    let rho = sc.geom.cascade_gain();
    let p = naka(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let n = 20_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            rho * (0..500)
                .map(|_| sample_nakagami(&p, &mut rng) * sample_nakagami(&p, &mut rng))
                .sum::<f64>()
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let (ey, vy) = cascade_mean_var(&p, &p).unwrap();
    let (mu, sigma2) = (rho * 500.0 * ey, rho * rho * 500.0 * vy);
    assert!(
        (mean - mu).abs() < 3.0 * (sigma2 / n as f64).sqrt(),
        "{mean} {mu}"
    );
    // standard error of a sample variance is about sigma^2 sqrt(2 / n)
    assert!(
        (var - sigma2).abs() < 3.0 * sigma2 * (2.0 / n as f64).sqrt() * 1.2,
        "{var} {sigma2}"
    );
}

#[test]
fn coverage_matches_simulation_at_reference_point() {
    let cfg = SimConfig {
        samples: 100_000,
        seed: 25,
        ..SimConfig::default()
    };
    for regime in [Regime::FiniteInid, Regime::AsymptoticClt, Regime::FiniteIid] {
        let sc = paper(1.0, 500, 5.0, Mode::Combined, regime);
        let a = coverage(&sc).unwrap().probability;
        let e = simulate_coverage(&sc, &cfg).unwrap();
        assert!(
            (a - e.coverage).abs() <= 0.01_f64.max(3.0 * e.std_error),
            "{regime:?}: {a} {e:?}"
        );
    }
    let direct = paper(0.5, 500, 5.0, Mode::DirectOnly, Regime::FiniteInid);
    let a = coverage_direct(&direct).unwrap().probability;
    let e = simulate_coverage(&direct, &cfg).unwrap();
    assert!((a - e.coverage).abs() <= 0.01, "{a} {e:?}");
    // the direct link alone carries roughly 60 % coverage at this threshold
    // (0.573 at d = 100 m, 0.578 at d = 50 m)
    assert!((a - 0.6).abs() < 0.05, "{a}");

    let by_m: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&m| {
            coverage(&paper(m, 500, 5.0, Mode::Combined, Regime::FiniteInid))
                .unwrap()
                .probability
        })
        .collect();
    assert!(by_m[2] >= by_m[1] && by_m[1] >= by_m[0], "{by_m:?}");
}
