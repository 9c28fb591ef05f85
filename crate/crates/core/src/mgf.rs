//! Moment generating and characteristic functions of the direct amplitude
//! `|h_q|`, the cascade amplitude `|h_c|` and their sum `T`.
//!
//! Convention: `M(s) = E[exp(-s X)]` and `phi(w) = M(-j w) = E[exp(j w X)]`.
//!
//! Nakagami transforms without a closed form are integrated along a ray
//! rotated into the right half-plane, where the oscillating factor
//! `exp(-s z)` becomes a decaying one. The double-Nakagami transform nests
//! such a transform inside a real-axis expectation over the other factor.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::{FRAC_PI_4, LN_2, PI};

use num_complex::Complex64;

use crate::inversion::{CharacteristicFunction, Cumulants};
use crate::model::{
    cascade_mean_var, double_nakagami_moment, FadingConfig, LinkGeometry, NakagamiParams,
};
use crate::specfun::{
    faddeeva_w, integrate_adaptive_real, integrate_tanh_sinh, ln_gamma, upper_gamma_regularized,
    ChebyshevTable, Interval, QuadratureOptions,
};
use crate::{Error, Result};

/// Distance from the branch point of `(1 + x)^(-k)` below which the gamma
/// transform refuses to evaluate.
pub const BRANCH_GUARD: f64 = 1e-12;

const TABLE_TOL: f64 = 1e-12;
/// Log-magnitude drop, relative to the peak, at which rotated integrals stop.
const LOG_CUTOFF: f64 = 46.0;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn cube(x: f64) -> f64 {
    x * x * x
}

fn is_zero(s: Complex64) -> bool {
    s.re == 0.0 && s.im == 0.0
}

fn finite(s: Complex64, function: &'static str) -> Result<()> {
    if s.re.is_finite() && s.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { function })
    }
}

/// Rotation angle for `exp(-b u)`: turns `b u` towards the positive real
/// axis, clamped inside `|phi| < pi/4` so that `exp(-u^2)` still decays.
fn rotation_angle(b: Complex64) -> f64 {
    let mag = b.norm();
    if mag == 0.0 {
        return 0.0;
    }
    let limit = FRAC_PI_4 * mag / (mag + 2.0);
    (-b.arg()).clamp(-limit, limit)
}

/// `E[h(Z)]` for `Z ~ Nakagami(p)`, integrating along the ray
/// `Z = sqrt(Omega/m) rho exp(j phi)`. `decay >= 0` is a lower bound on the
/// linear decay rate of `|h|` in `rho` and `feature` the `rho` scale on
/// which `h` changes; both only steer the quadrature.
fn rotated_expectation<H>(
    p: &NakagamiParams,
    phi: f64,
    decay: f64,
    feature: f64,
    mut h: H,
) -> Result<Complex64>
where
    H: FnMut(Complex64) -> Result<Complex64>,
{
    let m = p.m();
    let k = 2.0 * m - 1.0;
    let sigma = libm::sqrt(p.omega() / m);
    let c = libm::cos(2.0 * phi);
    let log_env = |rho: f64| {
        let power = if k == 0.0 { 0.0 } else { k * libm::log(rho) };
        power - c * rho * rho - decay * rho
    };
    let rho_peak = if k > 0.0 {
        (-decay + libm::sqrt(decay * decay + 8.0 * c * k)) / (4.0 * c)
    } else {
        0.0
    };
    let g_max = if rho_peak > 0.0 {
        log_env(rho_peak)
    } else {
        0.0
    };
    let target = g_max - LOG_CUTOFF;
    let mut lo = rho_peak;
    let mut hi = rho_peak.max(1.0);
    while log_env(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if log_env(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let ray = Complex64::from_polar(sigma, phi);
    let rot2 = Complex64::from_polar(1.0, 2.0 * phi);
    let failure = Cell::new(None);
    let mut integrand = |rho: f64| {
        let hv = match h(ray * rho) {
            Ok(v) => v,
            Err(e) => {
                let first = failure.take().unwrap_or(e);
                failure.set(Some(first));
                return Complex64::new(0.0, 0.0);
            }
        };
        let power = if k == 0.0 { 0.0 } else { k * libm::log(rho) };
        (Complex64::new(power - g_max, 0.0) - rot2 * (rho * rho)).exp() * hv
    };
    // the integrand is normalized to a unit peak, so the absolute tolerance
    // is relative to the transform's natural scale
    let opts = QuadratureOptions::with_tolerances(1e-14, 1e-12);
    // `h` varies on the scale `feature`; geometric pieces from there out to
    // the cut keep each tanh-sinh pass smooth when `h` decays slowly
    let mut total = Complex64::new(0.0, 0.0);
    let mut a = 0.0;
    let mut b = if feature > 0.0 { feature.min(hi) } else { hi };
    loop {
        let res = integrate_tanh_sinh(&mut integrand, a, b, &opts);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        total += res?.value;
        if b >= hi {
            break;
        }
        a = b;
        b = (4.0 * b).min(hi);
    }
    let log_scale = LN_2 - ln_gamma(m)? + g_max;
    Ok(total * Complex64::from_polar(libm::exp(log_scale), 2.0 * m * phi))
}

/// `E[exp(-s Z)]` for `Z ~ Nakagami(p)` by quadrature, for `Re(s) >= 0`.
pub fn mgf_nakagami(p: &NakagamiParams, s: Complex64) -> Result<Complex64> {
    finite(s, "mgf_nakagami")?;
    if is_zero(s) {
        return Ok(ONE);
    }
    if s.re < -1e-12 * s.norm() {
        return Err(Error::Domain {
            function: "mgf_nakagami",
            value: s.re,
        });
    }
    let b = s * libm::sqrt(p.omega() / p.m());
    let phi = rotation_angle(b);
    let decay = (b * Complex64::from_polar(1.0, phi)).re.max(0.0);
    rotated_expectation(p, phi, decay, 1.0 / b.norm(), |z| Ok((-s * z).exp()))
}

/// Closed-form Rayleigh (`m = 1`) transform
/// `1 - (s sqrt(pi Omega)/2) exp(s^2 Omega/4) erfc(s sqrt(Omega)/2)`,
/// evaluated through the Faddeeva function so that the exponential and
/// the complementary error function never appear separately.
pub fn mgf_rayleigh_closed(omega: f64, s: Complex64) -> Result<Complex64> {
    finite(s, "mgf_rayleigh_closed")?;
    if is_zero(s) {
        return Ok(ONE);
    }
    let half_root = 0.5 * libm::sqrt(omega);
    let z = Complex64::new(0.0, 1.0) * s * half_root;
    if z.norm() >= RAYLEIGH_ASYMPTOTIC && z.im >= 0.0 {
        return Ok(rayleigh_asymptotic(z));
    }
    Ok(ONE - s * (half_root * libm::sqrt(PI)) * faddeeva_w(z)?)
}

/// Beyond this `|z|` the Rayleigh transform is summed from the asymptotic
/// series of `w(z)`, avoiding the cancellation in `1 + j sqrt(pi) z w(z)`.
const RAYLEIGH_ASYMPTOTIC: f64 = 8.0;

/// `1 + j sqrt(pi) z w(z) = -sum_{k>=1} (2k-1)!! / (2 z^2)^k`.
fn rayleigh_asymptotic(z: Complex64) -> Complex64 {
    let q = (z * z * 2.0).inv();
    let mut term = q;
    let mut sum = term;
    for k in 2..60 {
        term *= q * f64::from(2 * k - 1);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -sum
}

/// Closed-form half-normal (`m = 1/2`) transform
/// `exp(s^2 Omega/2) erfc(s sqrt(Omega/2))`.
pub fn mgf_half_normal_closed(omega: f64, s: Complex64) -> Result<Complex64> {
    finite(s, "mgf_half_normal_closed")?;
    if is_zero(s) {
        return Ok(ONE);
    }
    faddeeva_w(Complex64::new(0.0, 1.0) * s * libm::sqrt(0.5 * omega))
}

/// Nakagami transform using a closed form where one exists.
fn nakagami_transform(p: &NakagamiParams, s: Complex64) -> Result<Complex64> {
    if p.m() == 0.5 {
        mgf_half_normal_closed(p.omega(), s)
    } else if p.m() == 1.0 {
        mgf_rayleigh_closed(p.omega(), s)
    } else {
        mgf_nakagami(p, s)
    }
}

fn has_closed_form(p: &NakagamiParams) -> bool {
    p.m() == 0.5 || p.m() == 1.0
}

/// `E[exp(-s G H)]` for independent Nakagami amplitudes `G` and `H`: the
/// inner expectation is a Nakagami transform at `s H`, the outer one a
/// quadrature over `H`.
pub fn mgf_double_nakagami(
    g: &NakagamiParams,
    h: &NakagamiParams,
    s: Complex64,
) -> Result<Complex64> {
    finite(s, "mgf_double_nakagami")?;
    if is_zero(s) {
        return Ok(ONE);
    }
    let (inner, outer) = if !has_closed_form(g) && has_closed_form(h) {
        (h, g)
    } else {
        (g, h)
    };
    // on the real axis the inner transform decays without oscillating, so
    // the outer expectation needs no rotation; it varies on `1 / |b|`
    let b = s * libm::sqrt(outer.omega() / outer.m() * inner.omega());
    rotated_expectation(outer, 0.0, 0.0, 1.0 / b.norm(), |x| {
        nakagami_transform(inner, s * x)
    })
}

fn gamma_transform(shape: f64, scale: f64, s: Complex64) -> Result<Complex64> {
    if shape == 0.0 || is_zero(s) {
        return Ok(ONE);
    }
    let base = ONE + s * scale;
    let distance = base.norm();
    if distance < BRANCH_GUARD {
        return Err(Error::BranchPoint { distance });
    }
    let v = (-shape * base.ln()).exp();
    finite(v, "gamma transform")?;
    Ok(v)
}

fn gaussian_transform(mean: f64, var: f64, s: Complex64) -> Result<Complex64> {
    let v = (-s * mean + s * s * (0.5 * var)).exp();
    finite(v, "gaussian transform")?;
    Ok(v)
}

/// CLT transform of `|h_c|`: Gaussian with mean `rho N E[Y]` and variance
/// `rho^2 N var(Y)`.
pub fn mgf_hc_clt(
    geom: &LinkGeometry,
    fading: &FadingConfig,
    n: u32,
    s: Complex64,
) -> Result<Complex64> {
    ChannelTransform::cascade_clt(geom, fading, n)?.mgf(s)
}

/// Gamma-model transform `(1 + c2 s Omega / m)^(-N m)` (principal branch).
pub fn mgf_hc_finite_iid(
    geom: &LinkGeometry,
    p: &NakagamiParams,
    n: u32,
    s: Complex64,
) -> Result<Complex64> {
    finite(s, "mgf_hc_finite_iid")?;
    let c2 = geom.cascade_gain();
    gamma_transform(f64::from(n) * p.m(), c2 * p.omega() / p.m(), s)
}

/// Exact finite-`N` transform `M_Y(c2 s)^N` with `M_Y` the double-Nakagami
/// transform of one element.
pub fn mgf_hc_finite_inid(
    geom: &LinkGeometry,
    fading: &FadingConfig,
    n: u32,
    s: Complex64,
) -> Result<Complex64> {
    ChannelTransform::cascade_finite_inid(geom, fading, n)?.mgf(s)
}

/// `M_T(s) = M_{h_q}(s) M_{h_c}(s)`; each factor carries its own scale.
pub fn mgf_t(
    direct: &ChannelTransform,
    cascade: &ChannelTransform,
    s: Complex64,
) -> Result<Complex64> {
    Ok(direct.mgf(s)? * cascade.mgf(s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    NakagamiDirect,
    GaussianClt,
    GammaIid,
    DoubleNakagamiNumeric,
    ProductComposite,
}

/// Transform of one nonnegative amplitude (or of a sum of independent
/// ones). Immutable; [`ChannelTransform::accelerated`] and
/// [`ChannelTransform::scaled`] return new values.
#[derive(Debug, Clone)]
pub struct ChannelTransform {
    node: Node,
}

#[derive(Debug, Clone)]
enum Node {
    /// `scale * Z`; the table holds `phi_Z(v)` for `v >= 0`.
    Nakagami {
        p: NakagamiParams,
        scale: f64,
        table: Option<Arc<ChebyshevTable>>,
    },
    Gaussian {
        mean: f64,
        var: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// `scale * sum_{1..n} G_i H_i`; the table holds `phi_Y(v)` of one term.
    DoubleNakagami {
        g: NakagamiParams,
        h: NakagamiParams,
        scale: f64,
        n: u32,
        table: Option<Arc<ChebyshevTable>>,
    },
    Product(Vec<ChannelTransform>),
}

fn check_scale(name: &'static str, scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: scale,
            reason: "amplitude scale must be finite and positive",
        })
    }
}

impl ChannelTransform {
    /// `scale * Z` with `Z ~ Nakagami(p)`.
    pub fn nakagami(p: NakagamiParams, scale: f64) -> Result<Self> {
        check_scale("c1", scale)?;
        Ok(Self {
            node: Node::Nakagami {
                p,
                scale,
                table: None,
            },
        })
    }

    /// Normal law with the given mean and variance (`var = 0` is a point mass).
    pub fn gaussian(mean: f64, var: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "must be finite",
            });
        }
        if !(var.is_finite() && var >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "variance",
                value: var,
                reason: "must be finite and nonnegative",
            });
        }
        Ok(Self {
            node: Node::Gaussian { mean, var },
        })
    }

    /// Gamma law with the given shape and scale; shape zero is a point mass at 0.
    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        check_scale("gamma scale", scale)?;
        if !(shape.is_finite() && shape >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma shape",
                value: shape,
                reason: "must be finite and nonnegative",
            });
        }
        Ok(Self {
            node: Node::Gamma { shape, scale },
        })
    }

    /// `scale * sum of n` independent products `G H`.
    pub fn double_nakagami(
        g: NakagamiParams,
        h: NakagamiParams,
        scale: f64,
        n: u32,
    ) -> Result<Self> {
        check_scale("c2", scale)?;
        Ok(Self {
            node: Node::DoubleNakagami {
                g,
                h,
                scale,
                n,
                table: None,
            },
        })
    }

    /// Sum of independent amplitudes.
    pub fn product(factors: Vec<ChannelTransform>) -> Self {
        Self {
            node: Node::Product(factors),
        }
    }

    /// Direct link `|h_q| = c1 Z`.
    pub fn direct(geom: &LinkGeometry, fading: &FadingConfig) -> Result<Self> {
        Self::nakagami(fading.bs_ue, geom.direct_gain())
    }

    /// Gaussian approximation of `|h_c|` for large `N`.
    pub fn cascade_clt(geom: &LinkGeometry, fading: &FadingConfig, n: u32) -> Result<Self> {
        let (mean, var) = cascade_mean_var(&fading.bs_irs, &fading.irs_ue)?;
        let rho = geom.cascade_gain();
        let n = f64::from(n);
        Self::gaussian(rho * n * mean, rho * rho * n * var)
    }

    /// Gamma model of `|h_c|` for identically faded BS-IRS and IRS-UE links.
    ///
    /// The per-element gamma law has mean `Omega`, while the exact product
    /// has mean `E[G H] < Omega` unless `m` is large; the two regimes are
    /// kept apart so that the difference stays visible.
    pub fn cascade_gamma_iid(geom: &LinkGeometry, fading: &FadingConfig, n: u32) -> Result<Self> {
        if fading.bs_irs != fading.irs_ue {
            return Err(Error::InvalidScenario(
                "gamma i.i.d. regime needs identical BS-IRS and IRS-UE fading",
            ));
        }
        let p = fading.bs_irs;
        Self::gamma(
            f64::from(n) * p.m(),
            geom.cascade_gain() * p.omega() / p.m(),
        )
    }

    /// Exact product-distribution model of `|h_c|`.
    pub fn cascade_finite_inid(geom: &LinkGeometry, fading: &FadingConfig, n: u32) -> Result<Self> {
        Self::double_nakagami(fading.bs_irs, fading.irs_ue, geom.cascade_gain(), n)
    }

    pub fn kind(&self) -> TransformKind {
        match self.node {
            Node::Nakagami { .. } => TransformKind::NakagamiDirect,
            Node::Gaussian { .. } => TransformKind::GaussianClt,
            Node::Gamma { .. } => TransformKind::GammaIid,
            Node::DoubleNakagami { .. } => TransformKind::DoubleNakagamiNumeric,
            Node::Product(_) => TransformKind::ProductComposite,
        }
    }

    /// Factors of a composite transform (empty for the other kinds).
    pub fn factors(&self) -> &[ChannelTransform] {
        match &self.node {
            Node::Product(f) => f,
            _ => &[],
        }
    }

    /// `M(s) = E[exp(-s X)]`.
    pub fn mgf(&self, s: Complex64) -> Result<Complex64> {
        finite(s, "ChannelTransform::mgf")?;
        if is_zero(s) {
            return Ok(ONE);
        }
        match &self.node {
            Node::Nakagami { p, scale, table } => {
                if let Some(v) = lookup(table, s, *scale) {
                    return Ok(v);
                }
                nakagami_transform(p, s * *scale)
            }
            Node::Gaussian { mean, var } => gaussian_transform(*mean, *var, s),
            Node::Gamma { shape, scale } => gamma_transform(*shape, *scale, s),
            Node::DoubleNakagami {
                g,
                h,
                scale,
                n,
                table,
            } => {
                if *n == 0 {
                    return Ok(ONE);
                }
                let one = match lookup(table, s, *scale) {
                    Some(v) => v,
                    None => mgf_double_nakagami(g, h, s * *scale)?,
                };
                Ok(one.powu(*n))
            }
            Node::Product(factors) => {
                let mut acc = ONE;
                for f in factors {
                    acc *= f.mgf(s)?;
                }
                Ok(acc)
            }
        }
    }

    /// Transform of `k X` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        check_scale("scale factor", k)?;
        let node = match &self.node {
            Node::Nakagami { p, scale, table } => Node::Nakagami {
                p: *p,
                scale: scale * k,
                table: table.clone(),
            },
            Node::Gaussian { mean, var } => Node::Gaussian {
                mean: mean * k,
                var: var * k * k,
            },
            Node::Gamma { shape, scale } => Node::Gamma {
                shape: *shape,
                scale: scale * k,
            },
            Node::DoubleNakagami {
                g,
                h,
                scale,
                n,
                table,
            } => Node::DoubleNakagami {
                g: *g,
                h: *h,
                scale: scale * k,
                n: *n,
                table: table.clone(),
            },
            Node::Product(factors) => Node::Product(
                factors
                    .iter()
                    .map(|f| f.scaled(k))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self { node })
    }

    /// Copy whose quadrature-backed factors are tabulated for
    /// `0 <= omega <= omega_max`; outside the table the direct route is used.
    pub fn accelerated(&self, omega_max: f64) -> Result<Self> {
        self.accelerated_with(omega_max, None)
    }

    /// As [`accelerated`](Self::accelerated), taking tables from `cache`
    /// where they cover the needed range instead of building them.
    pub fn accelerated_with(&self, omega_max: f64, cache: Option<&TableCache>) -> Result<Self> {
        check_scale("omega_max", omega_max)?;
        let table_for = |key: TableKey, scale: f64, own: &Option<Arc<ChebyshevTable>>| {
            let v_max = scale * omega_max;
            match own {
                Some(t) if t.range().1 >= v_max => Ok(t.clone()),
                _ => match cache.and_then(|c| c.get(&key, v_max)) {
                    Some(t) => Ok(t),
                    None => key.build(v_max).map(Arc::new),
                },
            }
        };
        let node = match &self.node {
            Node::Nakagami { p, scale, table } if !has_closed_form(p) => Node::Nakagami {
                p: *p,
                scale: *scale,
                table: Some(table_for(TableKey::Nakagami(*p), *scale, table)?),
            },
            Node::DoubleNakagami {
                g,
                h,
                scale,
                n,
                table,
            } if *n > 0 => Node::DoubleNakagami {
                g: *g,
                h: *h,
                scale: *scale,
                n: *n,
                table: Some(table_for(TableKey::DoubleNakagami(*g, *h), *scale, table)?),
            },
            Node::Product(factors) => Node::Product(
                factors
                    .iter()
                    .map(|f| f.accelerated_with(omega_max, cache))
                    .collect::<Result<Vec<_>>>()?,
            ),
            other => other.clone(),
        };
        Ok(Self { node })
    }

    /// Tables, with the `v` range each must cover, that
    /// [`accelerated`](Self::accelerated) would build for `omega_max`.
    pub fn table_demand(&self, omega_max: f64) -> Vec<(TableKey, f64)> {
        match &self.node {
            Node::Nakagami { p, scale, .. } if !has_closed_form(p) => {
                alloc::vec![(TableKey::Nakagami(*p), scale * omega_max)]
            }
            Node::DoubleNakagami { g, h, scale, n, .. } if *n > 0 => {
                alloc::vec![(TableKey::DoubleNakagami(*g, *h), scale * omega_max)]
            }
            Node::Product(f) => f.iter().flat_map(|f| f.table_demand(omega_max)).collect(),
            _ => Vec::new(),
        }
    }

    /// Number of Chebyshev pieces held by tables in this transform.
    pub fn table_pieces(&self) -> usize {
        match &self.node {
            Node::Nakagami { table: Some(t), .. } | Node::DoubleNakagami { table: Some(t), .. } => {
                t.pieces()
            }
            Node::Product(f) => f.iter().map(Self::table_pieces).sum(),
            _ => 0,
        }
    }

    /// Chernoff bound `P(X <= x) <= exp(s x) M(s)` at the best `s > 0` of a
    /// doubling grid. `s x + ln M(s)` is convex, so the scan stops once it
    /// rises. `None` when `x` is not below the mean.
    pub fn cdf_bound(&self, x: f64) -> Option<f64> {
        let mean = self.cumulants().ok()?.mean;
        if !(mean > x) {
            return None;
        }
        let mut s = 1.0 / mean.max(x.abs());
        let mut best = f64::INFINITY;
        for _ in 0..200 {
            let m = self.mgf(Complex64::new(s, 0.0)).ok()?.re;
            // an underflowed transform no longer bounds anything
            if !(m > 1e-290) {
                break;
            }
            let log_bound = s * x + libm::log(m);
            if log_bound >= best {
                break;
            }
            best = log_bound;
            s *= 2.0;
        }
        best.is_finite().then(|| libm::exp(best).min(1.0))
    }

    /// Upper bound on `P(X >= x)`: the exact tail for single Nakagami,
    /// Gaussian and gamma factors, Cantelli's inequality for a
    /// double-Nakagami sum, and for a sum of independent factors the union
    /// of the factor tails with the excess over the mean shared in
    /// proportion to their spreads. `None` when `x` is not above the mean.
    pub fn ccdf_bound(&self, x: f64) -> Option<f64> {
        let c = self.cumulants().ok()?;
        if !(x > c.mean) {
            return None;
        }
        let b = match &self.node {
            Node::Nakagami { p, scale, .. } => {
                let u = x / scale;
                upper_gamma_regularized(p.m(), p.m() * u * u / p.omega()).ok()?
            }
            Node::Gaussian { mean, var } => {
                if *var == 0.0 {
                    0.0
                } else {
                    0.5 * libm::erfc((x - mean) / libm::sqrt(2.0 * var))
                }
            }
            Node::Gamma { shape, scale } => {
                if *shape == 0.0 {
                    0.0
                } else {
                    upper_gamma_regularized(*shape, x / scale).ok()?
                }
            }
            Node::DoubleNakagami { .. } => {
                let e = x - c.mean;
                c.variance / (c.variance + e * e)
            }
            Node::Product(factors) => {
                let cums = factors
                    .iter()
                    .map(|f| f.cumulants().ok())
                    .collect::<Option<Vec<_>>>()?;
                let spreads: Vec<f64> = cums.iter().map(|c| libm::sqrt(c.variance)).collect();
                let total: f64 = spreads.iter().sum();
                let excess = x - c.mean;
                let mut acc = 0.0;
                for ((f, fc), sd) in factors.iter().zip(&cums).zip(&spreads) {
                    let share = if total > 0.0 {
                        sd / total
                    } else {
                        1.0 / factors.len() as f64
                    };
                    acc += f.ccdf_bound(fc.mean + excess * share)?;
                }
                acc
            }
        };
        Some(b.min(1.0))
    }
}

/// A tabulated single-factor characteristic function `phi(v)`, `v >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableKey {
    Nakagami(NakagamiParams),
    DoubleNakagami(NakagamiParams, NakagamiParams),
}

impl TableKey {
    /// Tabulates `phi(v)` on `[0, v_max]`.
    pub fn build(&self, v_max: f64) -> Result<ChebyshevTable> {
        check_scale("v_max", v_max)?;
        match *self {
            TableKey::Nakagami(p) => ChebyshevTable::build(
                |v| mgf_nakagami(&p, Complex64::new(0.0, -v)),
                0.0,
                v_max,
                initial_pieces(v_max * libm::sqrt(p.omega())),
                TABLE_TOL,
            ),
            TableKey::DoubleNakagami(g, h) => ChebyshevTable::build(
                |v| mgf_double_nakagami(&g, &h, Complex64::new(0.0, -v)),
                0.0,
                v_max,
                initial_pieces(v_max * libm::sqrt(g.omega() * h.omega())),
                TABLE_TOL,
            ),
        }
    }
}

/// Prebuilt tables shared by transforms that differ only in scale.
#[derive(Debug, Clone, Default)]
pub struct TableCache {
    entries: Vec<(TableKey, Arc<ChebyshevTable>)>,
}

impl TableCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `table`, replacing a narrower one for the same key.
    pub fn insert(&mut self, key: TableKey, table: ChebyshevTable) {
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some((_, t)) if t.range().1 >= table.range().1 => {}
            Some((_, t)) => *t = Arc::new(table),
            None => self.entries.push((key, Arc::new(table))),
        }
    }

    /// Table for `key` covering `[0, v_max]`.
    pub fn get(&self, key: &TableKey, v_max: f64) -> Option<Arc<ChebyshevTable>> {
        self.entries
            .iter()
            .find(|(k, t)| k == key && t.range().1 >= v_max)
            .map(|(_, t)| t.clone())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn initial_pieces(oscillation: f64) -> usize {
    let p = libm::ceil(oscillation / 8.0);
    if p.is_finite() && p >= 1.0 {
        (p as usize).min(1 << 12)
    } else {
        1
    }
}

/// Table value for `s = -j w` with `w >= 0`, if covered.
fn lookup(table: &Option<Arc<ChebyshevTable>>, s: Complex64, scale: f64) -> Option<Complex64> {
    let t = table.as_ref()?;
    if s.re != 0.0 || s.im > 0.0 {
        return None;
    }
    t.eval(-s.im * scale)
}

/// Nakagami density constants: `f(x) = C x^k exp(-a x^2)`.
struct DensityShape {
    ln_c: f64,
    k: f64,
    a: f64,
}

impl DensityShape {
    fn new(p: &NakagamiParams) -> Result<Self> {
        let m = p.m();
        Ok(Self {
            ln_c: LN_2 + m * libm::log(m) - ln_gamma(m)? - m * libm::log(p.omega()),
            k: 2.0 * m - 1.0,
            a: m / p.omega(),
        })
    }

    fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.k == 0.0 {
                libm::exp(self.ln_c)
            } else {
                0.0
            };
        }
        libm::exp(self.ln_c + self.k * libm::log(x) - self.a * x * x)
    }

    /// `f'(x)` at `u = a x^2`.
    fn slope_at(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return if self.k == 1.0 {
                libm::exp(self.ln_c)
            } else {
                0.0
            };
        }
        let x = libm::sqrt(u / self.a);
        libm::exp(self.ln_c + (self.k - 1.0) * libm::log(x) - u) * (self.k - 2.0 * u)
    }

    /// Constant `A1` in `|phi_Z(v)| <= A1 / v`: total variation `2 f_max`.
    fn first_order(&self) -> f64 {
        let f_max = if self.k == 0.0 {
            libm::exp(self.ln_c)
        } else {
            self.density(libm::sqrt(self.k / (2.0 * self.a)))
        };
        2.0 * f_max
    }

    /// Constant `A2` in `|phi_Z(v)| <= A2 / v^2`, available for `m >= 1`:
    /// `|f'(0)| + TV(f')`, with the extremes of `f'` at
    /// `a x^2 = ((4k + 2) -+ sqrt(32k + 4)) / 8`.
    fn second_order(&self) -> Option<f64> {
        if self.k < 1.0 {
            return None;
        }
        let root = libm::sqrt(32.0 * self.k + 4.0);
        let u_max = ((4.0 * self.k + 2.0 - root) / 8.0).max(0.0);
        let u_min = (4.0 * self.k + 2.0 + root) / 8.0;
        let f0 = self.slope_at(0.0);
        let tv = 2.0 * self.slope_at(u_max) - 2.0 * self.slope_at(u_min) - f0;
        Some(f0.abs() + tv)
    }

    fn envelope(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 1.0;
        }
        let mut e = (self.first_order() / v).min(1.0);
        if let Some(a2) = self.second_order() {
            e = e.min(a2 / (v * v));
        }
        e
    }

    /// Bound on `int_v^inf envelope(u) / u du`.
    fn tail(&self, v: f64) -> f64 {
        let mut t = self.first_order() / v;
        if let Some(a2) = self.second_order() {
            t = t.min(a2 / (2.0 * v * v));
        }
        t
    }
}

/// `E_h[env_g(v h)]`, an upper bound on `|phi_{GH}(v)|`.
fn double_nakagami_envelope(g: &NakagamiParams, h: &NakagamiParams, v: f64) -> Option<f64> {
    if v <= 0.0 {
        return Some(1.0);
    }
    // the factor with the sharper (second-order) bound goes inside
    let (inner, outer) = if h.m() > g.m() { (h, g) } else { (g, h) };
    let inner = DensityShape::new(inner).ok()?;
    let outer = DensityShape::new(outer).ok()?;
    let opts = QuadratureOptions::with_tolerances(1e-12, 1e-9);
    let r = integrate_adaptive_real(
        |x| outer.density(x) * inner.envelope(v * x),
        Interval::SemiInfinite(0.0),
        &opts,
    )
    .ok()?;
    Some((r.value.re + r.abs_error_estimate).min(1.0))
}

impl CharacteristicFunction for ChannelTransform {
    fn cf(&self, omega: f64) -> Result<Complex64> {
        if omega < 0.0 {
            return Ok(self.cf(-omega)?.conj());
        }
        self.mgf(Complex64::new(0.0, -omega))
    }

    fn cumulants(&self) -> Result<Cumulants> {
        match &self.node {
            Node::Nakagami { p, scale, .. } => {
                let m1 = p.moment(1.0)?;
                let m2 = p.omega();
                let m3 = p.moment(3.0)?;
                Ok(Cumulants {
                    mean: scale * m1,
                    variance: scale * scale * (m2 - m1 * m1).max(0.0),
                    third: cube(*scale) * (m3 - 3.0 * m1 * m2 + 2.0 * cube(m1)),
                })
            }
            Node::Gaussian { mean, var } => Ok(Cumulants {
                mean: *mean,
                variance: *var,
                third: 0.0,
            }),
            Node::Gamma { shape, scale } => Ok(Cumulants {
                mean: shape * scale,
                variance: shape * scale * scale,
                third: 2.0 * shape * cube(*scale),
            }),
            Node::DoubleNakagami { g, h, scale, n, .. } => {
                let n = f64::from(*n);
                let m1 = double_nakagami_moment(1.0, g, h)?;
                let m2 = g.omega() * h.omega();
                let m3 = double_nakagami_moment(3.0, g, h)?;
                Ok(Cumulants {
                    mean: n * scale * m1,
                    variance: n * scale * scale * (m2 - m1 * m1).max(0.0),
                    third: n * cube(*scale) * (m3 - 3.0 * m1 * m2 + 2.0 * cube(m1)),
                })
            }
            Node::Product(factors) => {
                let mut acc = Cumulants::default();
                for f in factors {
                    let c = f.cumulants()?;
                    acc.mean += c.mean;
                    acc.variance += c.variance;
                    acc.third += c.third;
                }
                Ok(acc)
            }
        }
    }

    fn envelope(&self, omega: f64) -> Option<f64> {
        let omega = omega.abs();
        match &self.node {
            Node::Nakagami { p, scale, .. } => {
                Some(DensityShape::new(p).ok()?.envelope(scale * omega))
            }
            Node::Gaussian { var, .. } => Some(libm::exp(-0.5 * var * omega * omega)),
            Node::Gamma { shape, scale } => {
                let b = scale * omega;
                Some(libm::pow(1.0 + b * b, -0.5 * shape))
            }
            Node::DoubleNakagami { g, h, scale, n, .. } => {
                if *n == 0 {
                    return Some(1.0);
                }
                let e = double_nakagami_envelope(g, h, scale * omega)?;
                Some(libm::pow(e, f64::from(*n)))
            }
            Node::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.envelope(omega).unwrap_or(1.0);
                }
                Some(acc)
            }
        }
    }

    fn tail_bound(&self, omega: f64) -> Option<f64> {
        if !(omega > 0.0) {
            return None;
        }
        match &self.node {
            Node::Nakagami { p, scale, .. } => Some(DensityShape::new(p).ok()?.tail(scale * omega)),
            Node::Gaussian { var, .. } => {
                if *var == 0.0 {
                    return None;
                }
                let q = var * omega * omega;
                Some(libm::exp(-0.5 * q) / q)
            }
            Node::Gamma { shape, scale } => {
                if *shape == 0.0 {
                    return None;
                }
                Some(libm::pow(scale * omega, -shape) / shape)
            }
            Node::DoubleNakagami { .. } => None,
            Node::Product(factors) => {
                // envelopes are nonincreasing, so each factor's tail bound
                // can be multiplied by the others' envelopes at `omega`
                let envs: Vec<f64> = factors
                    .iter()
                    .map(|f| f.envelope(omega).unwrap_or(1.0))
                    .collect();
                let mut best: Option<f64> = None;
                for (i, f) in factors.iter().enumerate() {
                    if let Some(t) = f.tail_bound(omega) {
                        let others: f64 = envs
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, e)| *e)
                            .product();
                        let b = t * others;
                        best = Some(best.map_or(b, |x: f64| x.min(b)));
                    }
                }
                best
            }
        }
    }

    fn support_min(&self) -> f64 {
        match &self.node {
            Node::Gaussian { mean, var } => {
                if *var == 0.0 {
                    *mean
                } else {
                    f64::NEG_INFINITY
                }
            }
            Node::Product(factors) => factors.iter().map(|f| f.support_min()).sum(),
            _ => 0.0,
        }
    }

    fn edge(&self) -> Option<f64> {
        match &self.node {
            Node::Gaussian { mean, var } => (*var == 0.0).then_some(*mean),
            Node::Product(factors) => {
                let mut acc = 0.0;
                for f in factors {
                    acc += f.edge()?;
                }
                Some(acc)
            }
            _ => Some(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn tail_bounds_dominate_exact_tails() {
        // gamma amplitudes have closed-form tails on both sides
        let t = ChannelTransform::gamma(50.0, 0.1).unwrap();
        for x in [0.5, 2.0, 4.0] {
            let exact = 1.0 - upper_gamma_regularized(50.0, x / 0.1).unwrap();
            let b = t.cdf_bound(x).unwrap();
            assert!(b >= exact && b < 1.0, "x={x}: {b} {exact}");
        }
        assert!(t.cdf_bound(6.0).is_none());
        let sum = ChannelTransform::product(vec![
            t.clone(),
            ChannelTransform::nakagami(NakagamiParams::new(2.0, 1.0).unwrap(), 0.1).unwrap(),
        ]);
        for x in [8.0, 12.0, 20.0] {
            let b = sum.ccdf_bound(x).unwrap();
            let alone = upper_gamma_regularized(50.0, x / 0.1).unwrap();
            assert!(b >= alone && b <= 1.0, "x={x}: {b}");
        }
        assert!(sum.ccdf_bound(20.0).unwrap() < 1e-12);
        assert!(sum.ccdf_bound(1.0).is_none());
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naka(m: f64, omega: f64) -> NakagamiParams {
        NakagamiParams::new(m, omega).unwrap()
    }

    fn unit_geometry() -> LinkGeometry {
        LinkGeometry::with_zeta(1.0, 1.0, 1.0, 4.0, 1.0).unwrap()
    }

    fn paper_geometry() -> LinkGeometry {
        LinkGeometry::new(500.0, 100.0, 85f64.to_radians(), 4.0, 3.0e9).unwrap()
    }

    #[test]
    fn rayleigh_reference_value() {
        // 1 - sqrt(pi) e erfc(1), 30-digit reference
        let expected = 0.242_127_843_858_687_9;
        let closed = mgf_rayleigh_closed(1.0, c(2.0, 0.0)).unwrap();
        let quad = mgf_nakagami(&naka(1.0, 1.0), c(2.0, 0.0)).unwrap();
        assert!((closed.re - expected).abs() < 1e-14, "{closed}");
        assert!((quad.re - expected).abs() < 1e-12, "{quad}");
        assert_eq!(mgf_rayleigh_closed(1.0, c(0.0, 0.0)).unwrap(), ONE);
        assert!(mgf_rayleigh_closed(1.0, c(0.0, 1.0)).unwrap().norm() <= 1.0);
    }

    #[test]
    fn general_shape_reference_values() {
        // direct high-precision quadrature of the defining integral
        let v = mgf_nakagami(&naka(2.0, 1.0), c(1.0, 0.0)).unwrap();
        assert!((v - c(0.412_953_879_131_374_97, 0.0)).norm() < 1e-12, "{v}");
        let v = mgf_nakagami(&naka(0.75, 1.0), c(0.0, -3.0)).unwrap();
        let expected = c(-0.162_550_902_441_088_27, 0.299_054_039_163_722_44);
        assert!((v - expected).norm() < 1e-12, "{v}");
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for &(re, im) in &[
            (0.0, 1.0),
            (0.0, -7.5),
            (0.3, 40.0),
            (3.0, -0.2),
            (0.0, -2000.0),
            (25.0, 25.0),
        ] {
            let s = c(re, im);
            for omega in [0.4, 1.0, 2.5] {
                let r = mgf_rayleigh_closed(omega, s).unwrap();
                let q = mgf_nakagami(&naka(1.0, omega), s).unwrap();
                assert!((r - q).norm() <= 1e-10 * r.norm(), "rayleigh s={s} {r} {q}");
                let h = mgf_half_normal_closed(omega, s).unwrap();
                let q = mgf_nakagami(&naka(0.5, omega), s).unwrap();
                assert!(
                    (h - q).norm() <= 1e-10 * h.norm(),
                    "half-normal s={s} {h} {q}"
                );
            }
        }
    }

    #[test]
    fn negative_real_part_is_rejected() {
        assert!(matches!(
            mgf_nakagami(&naka(2.0, 1.0), c(-1.0, 0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn derivative_at_origin_is_the_mean() {
        for m in [0.5, 0.8, 1.0, 2.0, 4.5] {
            let p = naka(m, 1.7);
            let h = 1e-5;
            let d = (nakagami_transform(&p, c(h, 0.0)).unwrap().re - 1.0) / h;
            let mean = p.moment(1.0).unwrap();
            // forward difference bias is h E[Z^2] / 2
            assert!(
                (-d - mean).abs() <= 1e-5 * mean + 0.5 * h * p.omega(),
                "m={m}"
            );
        }
    }

    #[test]
    fn gamma_model_examples() {
        let p = naka(1.0, 1.0);
        let v = mgf_hc_finite_iid(&unit_geometry(), &p, 1, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(v.re, 0.5, max_relative = 1e-15);
        let p = naka(2.0, 1.0);
        let v = mgf_hc_finite_iid(&unit_geometry(), &p, 10, c(0.0, 1.0)).unwrap();
        assert!(v.norm() <= 1.0);
        assert_eq!(
            mgf_hc_finite_iid(&unit_geometry(), &p, 10, c(0.0, 0.0)).unwrap(),
            ONE
        );
        // 1 + s Omega / m = 0 at s = -2
        assert!(matches!(
            mgf_hc_finite_iid(&unit_geometry(), &p, 10, c(-2.0, 0.0)),
            Err(Error::BranchPoint { .. })
        ));
    }

    #[test]
    fn double_nakagami_examples() {
        let f = FadingConfig::uniform(naka(1.0, 1.0));
        let one = mgf_hc_finite_inid(&unit_geometry(), &f, 1, c(1.0, 0.0)).unwrap();
        // E[exp(-G H)] for two unit Rayleigh amplitudes, nested quadrature oracle
        assert!((one.re - 0.527_200_282_562_569_84).abs() < 1e-12, "{one}");
        let three = mgf_hc_finite_inid(&unit_geometry(), &f, 3, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(three.re, one.re.powi(3), max_relative = 1e-14);
        assert_eq!(
            mgf_hc_finite_inid(&unit_geometry(), &f, 3, c(0.0, 0.0)).unwrap(),
            ONE
        );
    }

    #[test]
    fn double_nakagami_is_symmetric() {
        let g = naka(2.0, 0.7);
        let h = naka(0.5, 1.3);
        for s in [c(0.0, -0.5), c(0.0, -30.0), c(2.0, 1.0)] {
            let a = mgf_double_nakagami(&g, &h, s).unwrap();
            let b = mgf_double_nakagami(&h, &g, s).unwrap();
            assert!((a - b).norm() < 1e-11, "{s}: {a} {b}");
        }
    }

    #[test]
    fn clt_transform_envelope() {
        let f = FadingConfig::uniform(naka(0.5, 1.0));
        let t = ChannelTransform::cascade_clt(&paper_geometry(), &f, 500).unwrap();
        let cum = t.cumulants().unwrap();
        for w in [1e10, 1e12, 3e12] {
            let v = t.cf(w).unwrap();
            assert_relative_eq!(
                v.norm(),
                libm::exp(-0.5 * cum.variance * w * w),
                max_relative = 1e-12
            );
        }
        assert_eq!(
            mgf_hc_clt(&paper_geometry(), &f, 500, c(0.0, 0.0)).unwrap(),
            ONE
        );
    }

    #[test]
    fn composite_reduces_without_irs() {
        let f = FadingConfig::uniform(naka(2.0, 1.0));
        let g = paper_geometry();
        let direct = ChannelTransform::direct(&g, &f).unwrap();
        let empty = ChannelTransform::cascade_gamma_iid(&g, &f, 0).unwrap();
        for w in [0.0, 1e4, 3e5] {
            let s = c(0.0, -w);
            assert_eq!(mgf_t(&direct, &empty, s).unwrap(), direct.mgf(s).unwrap());
        }
    }

    fn zoo() -> Vec<ChannelTransform> {
        let f = FadingConfig::uniform(naka(0.5, 1.0));
        let f2 = FadingConfig {
            bs_irs: naka(2.0, 1.0),
            irs_ue: naka(0.8, 1.4),
            bs_ue: naka(3.3, 0.6),
        };
        let g = unit_geometry();
        let direct = ChannelTransform::direct(&g, &f2).unwrap();
        vec![
            ChannelTransform::direct(&g, &f).unwrap(),
            direct.clone(),
            ChannelTransform::nakagami(naka(1.0, 2.0), 0.3).unwrap(),
            ChannelTransform::cascade_clt(&g, &f, 50).unwrap(),
            ChannelTransform::cascade_gamma_iid(&g, &f, 7).unwrap(),
            ChannelTransform::cascade_finite_inid(&g, &f2, 3).unwrap(),
            ChannelTransform::product(vec![
                direct,
                ChannelTransform::cascade_finite_inid(&g, &f, 2).unwrap(),
            ]),
        ]
    }

    #[test]
    fn unit_at_origin_and_bounded_on_the_imaginary_axis() {
        for t in zoo() {
            assert_eq!(t.mgf(c(0.0, 0.0)).unwrap(), ONE);
            let mut w = 1e-4;
            while w <= 1e6 {
                let v = t
                    .cf(w)
                    .unwrap_or_else(|e| panic!("{:?} at {w}: {e}", t.kind()));
                assert!(v.norm() <= 1.0 + 1e-12, "{:?} at {w}: {v}", t.kind());
                w *= 10f64.powf(0.25);
            }
        }
    }

    #[test]
    fn envelopes_dominate_the_modulus() {
        for t in zoo() {
            let mut w = 1e-2;
            while w <= 1e4 {
                let v = t.cf(w).unwrap().norm();
                let e = t.envelope(w).unwrap();
                assert!(
                    v <= e * (1.0 + 1e-9) + 1e-14,
                    "{:?} at {w}: {v} > {e}",
                    t.kind()
                );
                w *= 1.7;
            }
        }
    }

    #[test]
    fn nakagami_tail_bound_dominates_integral() {
        for m in [0.5, 1.0, 2.0] {
            let t = ChannelTransform::nakagami(naka(m, 1.0), 1.0).unwrap();
            let w0 = 20.0;
            let opts = QuadratureOptions::with_tolerances(1e-10, 1e-8);
            let tail = integrate_adaptive_real(
                |w| t.cf(w).unwrap().norm() / w,
                Interval::Finite(w0, 2e4),
                &QuadratureOptions {
                    max_subdivisions: 20_000,
                    ..opts
                },
            )
            .unwrap();
            assert!(tail.value.re <= t.tail_bound(w0).unwrap(), "m={m}");
        }
    }

    #[test]
    fn cumulants_match_moments() {
        let t = ChannelTransform::nakagami(naka(1.0, 1.0), 2.0).unwrap();
        let c1 = t.cumulants().unwrap();
        assert_relative_eq!(c1.mean, libm::sqrt(PI), max_relative = 1e-14);
        assert_relative_eq!(c1.variance, 4.0 * (1.0 - PI / 4.0), max_relative = 1e-13);
        let g = ChannelTransform::gamma(3.0, 0.5).unwrap();
        let c2 = g.cumulants().unwrap();
        assert_eq!((c2.mean, c2.variance, c2.third), (1.5, 0.75, 0.75));
        let sum = ChannelTransform::product(vec![t, g]).cumulants().unwrap();
        assert_relative_eq!(sum.mean, c1.mean + 1.5, max_relative = 1e-15);
    }

    #[test]
    fn scaling_moves_the_argument() {
        for t in zoo() {
            let k = 3.5;
            let st = t.scaled(k).unwrap();
            for w in [0.1, 2.0, 17.0] {
                let a = st.cf(w).unwrap();
                let b = t.cf(k * w).unwrap();
                assert!((a - b).norm() < 1e-14, "{:?}", t.kind());
            }
        }
    }

    #[test]
    fn tables_reproduce_direct_evaluation() {
        let f = FadingConfig {
            bs_irs: naka(2.0, 1.0),
            irs_ue: naka(0.5, 1.0),
            bs_ue: naka(2.0, 1.0),
        };
        let g = unit_geometry();
        let t = ChannelTransform::product(vec![
            ChannelTransform::direct(&g, &f).unwrap(),
            ChannelTransform::cascade_finite_inid(&g, &f, 4).unwrap(),
        ]);
        let fast = t.accelerated(40.0).unwrap();
        assert!(fast.table_pieces() > 0);
        for i in 0..60 {
            let w = 45.0 * f64::from(i) / 59.0;
            let a = fast.cf(w).unwrap();
            let b = t.cf(w).unwrap();
            assert!((a - b).norm() < 1e-10, "w={w}: {a} {b}");
        }
    }
}
