//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands on finite
//! and semi-infinite ranges.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper limit on the number of subintervals kept by the bisection.
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2_000,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be positive",
            });
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// `[a, +inf)`
    SemiInfinite(f64),
}

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

fn checked(v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            function: "quadrature integrand",
        })
    }
}

/// One 21-point Kronrod panel on `[a, b]` with the QUADPACK error heuristic.
///
/// Returns `(value, error_estimate)`.
pub fn gauss_kronrod_21<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked(f(center))?;
    let mut res_k = f_center * WGK[10];
    let mut res_g = Complex64::new(0.0, 0.0);
    let mut res_abs = f_center.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = checked(f(center - x))?;
        let f2 = checked(f(center + x))?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let scale = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * scale;
    let res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        let r = libm::pow(200.0 * err / res_asc, 1.5);
        err = if r < 1.0 { res_asc * r } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

fn bisect_until<F>(f: &mut F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Complex64,
{
    let (v0, e0) = gauss_kronrod_21(f, a, b)?;
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(Segment {
        a,
        b,
        value: v0,
        err: e0,
    });
    let mut evaluations = 21;
    loop {
        let total: Complex64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.err).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            return Ok(QuadratureResult {
                value: total,
                abs_error_estimate: err,
                evaluations,
            });
        }
        let (idx, worst) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, s)| (i, *s))
            .expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = (worst.b - worst.a).abs() <= 100.0 * f64::EPSILON * mid.abs().max(1e-300);
        if segments.len() >= opts.max_subdivisions || too_narrow {
            return Err(Error::NonConvergence {
                partial: total,
                abs_error: err,
                evaluations,
            });
        }
        let (vl, el) = gauss_kronrod_21(f, worst.a, mid)?;
        let (vr, er) = gauss_kronrod_21(f, mid, worst.b)?;
        evaluations += 42;
        segments[idx] = Segment {
            a: worst.a,
            b: mid,
            value: vl,
            err: el,
        };
        segments.push(Segment {
            a: mid,
            b: worst.b,
            value: vr,
            err: er,
        });
    }
}

/// Adaptive integration of a complex-valued integrand.
///
/// Semi-infinite ranges are mapped onto `(0, 1]` with `x = a + (1 - u) / u`.
/// When the tolerance is not met inside `max_subdivisions`, the partial
/// value and the achieved error are returned in [`Error::NonConvergence`].
pub fn integrate_adaptive<F>(
    mut f: F,
    interval: Interval,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Complex64,
{
    opts.validate()?;
    match interval {
        Interval::Finite(a, b) => {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite {
                    function: "integrate_adaptive",
                });
            }
            if a == b {
                return Ok(QuadratureResult {
                    value: Complex64::new(0.0, 0.0),
                    abs_error_estimate: 0.0,
                    evaluations: 0,
                });
            }
            bisect_until(&mut f, a, b, opts)
        }
        Interval::SemiInfinite(a) => {
            if !a.is_finite() {
                return Err(Error::NonFinite {
                    function: "integrate_adaptive",
                });
            }
            let mut g = |u: f64| {
                let x = a + (1.0 - u) / u;
                f(x) / (u * u)
            };
            bisect_until(&mut g, 0.0, 1.0, opts)
        }
    }
}

/// Integrates over `[a, inf)` by truncating at the first `x = a + 2^k`
/// where the caller's tail bound `tail(x) >= |int_x^inf f|` drops below a
/// tenth of `abs_tol`; the bound is added to the error estimate.
pub fn integrate_adaptive_with_tail<F, T>(
    f: F,
    a: f64,
    opts: &QuadratureOptions,
    tail: T,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Complex64,
    T: Fn(f64) -> f64,
{
    opts.validate()?;
    let target = 0.1 * opts.abs_tol;
    let mut width = 1.0;
    let mut cut = a + width;
    let mut bound = tail(cut);
    while !(bound <= target) {
        width *= 2.0;
        if width > 1e18 {
            return Err(Error::Truncation {
                omega: cut,
                tail_bound: bound,
            });
        }
        cut = a + width;
        bound = tail(cut);
    }
    let mut body = integrate_adaptive(f, Interval::Finite(a, cut), opts)?;
    body.abs_error_estimate += bound;
    Ok(body)
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_adaptive_real<F>(
    mut f: F,
    interval: Interval,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_adaptive(|x| Complex64::new(f(x), 0.0), interval, opts)
}
