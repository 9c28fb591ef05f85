//! Coverage and outage probabilities of the direct, IRS-only and combined
//! links, the channel-hardening factor and the IRS coverage range.
//!
//! Coverage is `P(SNR > theta) = P(T > t)` with the amplitude threshold
//! `t = sqrt(theta sigma^2 / P)` and `T` the received amplitude of the
//! chosen mode.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::inversion::{ccdf, omega_max_for, Inversion, InversionConfig, Truncation};
use crate::mgf::{ChannelTransform, TableCache, TableKey};
use crate::model::{cascade_mean_var, FadingConfig, LinkGeometry, SystemParams};
use crate::specfun::{gamma_ratio, upper_gamma_regularized};
use crate::{Error, Result};

/// Smallest `N` for which the CLT regime is used without a warning.
pub const CLT_FLOOR: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    DirectOnly,
    IrsOnly,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Gaussian cascade (large `N`).
    AsymptoticClt,
    /// Gamma-distributed cascade terms.
    FiniteIid,
    /// Exact double-Nakagami cascade terms.
    FiniteInid,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DirectOnly => "direct_only",
            Mode::IrsOnly => "irs_only",
            Mode::Combined => "combined",
        }
    }
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::AsymptoticClt => "asymptotic_clt",
            Regime::FiniteIid => "finite_iid",
            Regime::FiniteInid => "finite_inid",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::DirectOnly, Mode::IrsOnly, Mode::Combined]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or(Error::InvalidScenario("unknown mode"))
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Regime::AsymptoticClt, Regime::FiniteIid, Regime::FiniteInid]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or(Error::InvalidScenario("unknown regime"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageOptions {
    pub inversion: InversionConfig,
    /// Tabulate quadrature-backed transforms before inverting.
    pub accelerate: bool,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            inversion: InversionConfig::default(),
            accelerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub geom: LinkGeometry,
    pub fading: FadingConfig,
    pub sys: SystemParams,
    pub mode: Mode,
    pub regime: Regime,
    pub options: CoverageOptions,
}

impl Scenario {
    pub fn new(
        geom: LinkGeometry,
        fading: FadingConfig,
        sys: SystemParams,
        mode: Mode,
        regime: Regime,
    ) -> Self {
        Self {
            geom,
            fading,
            sys,
            mode,
            regime,
            options: CoverageOptions::default(),
        }
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..*self }
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        Self { regime, ..*self }
    }

    /// Transform of the cascade amplitude `|h_c|` under the scenario's regime.
    pub fn cascade_transform(&self) -> Result<ChannelTransform> {
        let n = self.sys.n_elements();
        match self.regime {
            Regime::AsymptoticClt => ChannelTransform::cascade_clt(&self.geom, &self.fading, n),
            Regime::FiniteIid => ChannelTransform::cascade_gamma_iid(&self.geom, &self.fading, n),
            Regime::FiniteInid => {
                ChannelTransform::cascade_finite_inid(&self.geom, &self.fading, n)
            }
        }
    }

    pub fn direct_transform(&self) -> Result<ChannelTransform> {
        ChannelTransform::direct(&self.geom, &self.fading)
    }

    fn regime_warnings(&self) -> Vec<Warning> {
        let n = self.sys.n_elements();
        if self.regime == Regime::AsymptoticClt && n < CLT_FLOOR {
            alloc::vec![Warning::CltBelowFloor {
                n,
                floor: CLT_FLOOR
            }]
        } else {
            Vec::new()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    GaussianCdf,
    GilPelaez,
    /// Far tail settled by a Chernoff or union bound instead of inversion.
    TailBound,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// CLT regime used with fewer elements than [`CLT_FLOOR`].
    CltBelowFloor { n: u32, floor: u32 },
    /// Inversion result left `[0, 1]` by less than the allowed slack.
    Clamped { unclamped: f64 },
    /// The half-period tail extrapolation was used.
    Extrapolated,
    /// The truncation point came from a scan rather than a certified bound.
    UncertifiedTruncation,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::CltBelowFloor { n, floor } => {
                write!(f, "CLT regime with N = {n} below the floor {floor}")
            }
            Warning::Clamped { unclamped } => write!(f, "clamped inversion value {unclamped:e}"),
            Warning::Extrapolated => f.write_str("CF tail extrapolated over half periods"),
            Warning::UncertifiedTruncation => f.write_str("truncation point from an envelope scan"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub method: Method,
    pub omega_max: Option<f64>,
    pub panels: usize,
    pub evaluations: usize,
    pub truncation: Option<Truncation>,
    pub warnings: Vec<Warning>,
}

impl Diagnostics {
    fn closed(method: Method, warnings: Vec<Warning>) -> Self {
        Self {
            method,
            omega_max: None,
            panels: 0,
            evaluations: 0,
            truncation: None,
            warnings,
        }
    }

    /// One text record per line.
    pub fn records(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.push(alloc::format!("method={:?}", self.method));
        if let Some(w) = self.omega_max {
            out.push(alloc::format!("omega_max={w:e}"));
        }
        if let Some(t) = self.truncation {
            out.push(alloc::format!("truncation={t:?}"));
        }
        if self.panels > 0 {
            out.push(alloc::format!(
                "panels={} evaluations={}",
                self.panels,
                self.evaluations
            ));
        }
        for w in &self.warnings {
            out.push(alloc::format!("warning: {w}"));
        }
        out
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.records().iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(r)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub probability: f64,
    pub abs_error: f64,
    pub diagnostics: Diagnostics,
}

fn expect_mode(sc: &Scenario, mode: Mode) -> Result<()> {
    if sc.mode == mode {
        Ok(())
    } else {
        Err(Error::InvalidScenario(match mode {
            Mode::DirectOnly => "operation needs mode = direct_only",
            Mode::IrsOnly => "operation needs mode = irs_only",
            Mode::Combined => "operation needs mode = combined",
        }))
    }
}

/// Coverage of whichever mode the scenario selects.
pub fn coverage(sc: &Scenario) -> Result<CoverageResult> {
    coverage_with(sc, None)
}

/// As [`coverage`], drawing characteristic-function tables from `cache`.
pub fn coverage_with(sc: &Scenario, cache: Option<&TableCache>) -> Result<CoverageResult> {
    match sc.mode {
        Mode::DirectOnly => coverage_direct(sc),
        Mode::IrsOnly => irs_only(sc, cache),
        Mode::Combined => combined(sc, cache),
    }
}

/// Transform that [`coverage_with`] inverts, if the mode needs one.
fn inverted_transform(sc: &Scenario) -> Result<Option<ChannelTransform>> {
    Ok(match (sc.mode, sc.regime) {
        (Mode::Combined, _) => Some(ChannelTransform::product(alloc::vec![
            sc.direct_transform()?,
            sc.cascade_transform()?,
        ])),
        (Mode::IrsOnly, Regime::FiniteInid) if sc.sys.n_elements() > 0 => {
            Some(sc.cascade_transform()?)
        }
        _ => None,
    })
}

/// Tables, with their ranges, that evaluating the scenario's coverage
/// would build. Building them once into a [`TableCache`] lets a sweep
/// share them between points that differ only in scale.
pub fn table_demand(sc: &Scenario) -> Result<Vec<(TableKey, f64)>> {
    if !sc.options.accelerate {
        return Ok(Vec::new());
    }
    let Some(transform) = inverted_transform(sc)? else {
        return Ok(Vec::new());
    };
    let normalized = transform.scaled(1.0 / sc.sys.amplitude_threshold())?;
    if certified(&normalized, &sc.options.inversion).is_some() {
        return Ok(Vec::new());
    }
    let w = omega_max_for(&normalized, 1.0, &sc.options.inversion)?;
    Ok(if w > 0.0 {
        normalized.table_demand(w * (1.0 + 1e-9))
    } else {
        Vec::new()
    })
}

/// `P(c1 Z > t) = Q(m, m (t / c1)^2 / Omega)`.
pub fn coverage_direct(sc: &Scenario) -> Result<CoverageResult> {
    expect_mode(sc, Mode::DirectOnly)?;
    let p = sc.fading.bs_ue;
    let ratio = sc.sys.amplitude_threshold() / sc.geom.direct_gain();
    let q = upper_gamma_regularized(p.m(), p.m() * ratio * ratio / p.omega())?;
    Ok(CoverageResult {
        probability: q.clamp(0.0, 1.0),
        abs_error: 1e-14,
        diagnostics: Diagnostics::closed(Method::ClosedForm, Vec::new()),
    })
}

/// Outage of the IRS-only link in the CLT regime,
/// `Phi((t - mu) / sigma) - Phi((-t - mu) / sigma)`, i.e. `P(|h_c| < t)` for
/// Gaussian `h_c`.
pub fn outage_irs_only(sc: &Scenario) -> Result<CoverageResult> {
    expect_mode(sc, Mode::IrsOnly)?;
    if sc.regime != Regime::AsymptoticClt {
        return Err(Error::InvalidScenario(
            "IRS-only outage formula needs the CLT regime",
        ));
    }
    let (mean, sd) = cascade_gaussian(sc)?;
    let t = sc.sys.amplitude_threshold();
    let outage = if sd == 0.0 {
        if mean.abs() < t {
            1.0
        } else {
            0.0
        }
    } else {
        normal_cdf((t - mean) / sd) - normal_cdf((-t - mean) / sd)
    };
    Ok(CoverageResult {
        probability: outage.clamp(0.0, 1.0),
        abs_error: 1e-15,
        diagnostics: Diagnostics::closed(Method::GaussianCdf, sc.regime_warnings()),
    })
}

/// IRS-only coverage: Gaussian CDF difference (CLT), gamma CCDF (i.i.d.) or
/// Gil-Pelaez inversion of the exact cascade transform.
pub fn coverage_irs_only(sc: &Scenario) -> Result<CoverageResult> {
    irs_only(sc, None)
}

fn irs_only(sc: &Scenario, cache: Option<&TableCache>) -> Result<CoverageResult> {
    expect_mode(sc, Mode::IrsOnly)?;
    let t = sc.sys.amplitude_threshold();
    match sc.regime {
        Regime::AsymptoticClt => {
            let mut r = outage_irs_only(sc)?;
            r.probability = 1.0 - r.probability;
            Ok(r)
        }
        Regime::FiniteIid => {
            if sc.fading.bs_irs != sc.fading.irs_ue {
                return Err(Error::InvalidScenario(
                    "gamma i.i.d. regime needs identical BS-IRS and IRS-UE fading",
                ));
            }
            let p = sc.fading.bs_irs;
            let n = f64::from(sc.sys.n_elements());
            let probability = if n == 0.0 {
                0.0
            } else {
                let scale = sc.geom.cascade_gain() * p.omega() / p.m();
                upper_gamma_regularized(n * p.m(), t / scale)?
            };
            Ok(CoverageResult {
                probability,
                abs_error: 1e-13,
                diagnostics: Diagnostics::closed(Method::ClosedForm, Vec::new()),
            })
        }
        Regime::FiniteInid => {
            if sc.sys.n_elements() == 0 {
                return Ok(CoverageResult {
                    probability: 0.0,
                    abs_error: 0.0,
                    diagnostics: Diagnostics::closed(Method::ClosedForm, Vec::new()),
                });
            }
            invert(&sc.cascade_transform()?, t, &sc.options, cache, Vec::new())
        }
    }
}

/// Coverage of the coherent sum `T = |h_c| + |h_q|` by Gil-Pelaez inversion
/// of `M_T(s) = M_{h_c}(s) M_{h_q}(s)`.
pub fn coverage_combined(sc: &Scenario) -> Result<CoverageResult> {
    combined(sc, None)
}

fn combined(sc: &Scenario, cache: Option<&TableCache>) -> Result<CoverageResult> {
    expect_mode(sc, Mode::Combined)?;
    let transform =
        ChannelTransform::product(alloc::vec![sc.direct_transform()?, sc.cascade_transform()?]);
    invert(
        &transform,
        sc.sys.amplitude_threshold(),
        &sc.options,
        cache,
        sc.regime_warnings(),
    )
}

/// `P(X > t)` with the amplitude normalized so that the threshold is 1.
/// Fraction of the inversion tolerance below which a tail bound replaces
/// the inversion.
const TAIL_CERTIFICATE: f64 = 1e-2;

/// Coverage `P(X > 1)` of a normalized amplitude, with its error, when a
/// tail bound pins it within the certificate level. Far in either tail the
/// inversion integrand is dominated by cancellation, so this also keeps
/// extreme thresholds out of it.
fn certified(normalized: &ChannelTransform, cfg: &InversionConfig) -> Option<(f64, f64)> {
    let level = TAIL_CERTIFICATE * cfg.abs_tol;
    if let Some(b) = normalized.cdf_bound(1.0).filter(|b| *b <= level) {
        return Some((1.0 - 0.5 * b, 0.5 * b));
    }
    normalized
        .ccdf_bound(1.0)
        .filter(|b| *b <= level)
        .map(|b| (0.5 * b, 0.5 * b))
}

fn invert(
    transform: &ChannelTransform,
    t: f64,
    opts: &CoverageOptions,
    cache: Option<&TableCache>,
    mut warnings: Vec<Warning>,
) -> Result<CoverageResult> {
    let normalized = transform.scaled(1.0 / t)?;
    let cfg = &opts.inversion;
    if let Some((probability, abs_error)) = certified(&normalized, cfg) {
        return Ok(CoverageResult {
            probability,
            abs_error,
            diagnostics: Diagnostics::closed(Method::TailBound, warnings),
        });
    }
    let normalized = if opts.accelerate {
        let w = omega_max_for(&normalized, 1.0, cfg)?;
        if w > 0.0 {
            normalized.accelerated_with(w * (1.0 + 1e-9), cache)?
        } else {
            normalized
        }
    } else {
        normalized
    };
    let r: Inversion = ccdf(&normalized, 1.0, cfg)?;
    if r.unclamped != r.value {
        warnings.push(Warning::Clamped {
            unclamped: r.unclamped,
        });
    }
    match r.truncation {
        Truncation::Extrapolated => warnings.push(Warning::Extrapolated),
        Truncation::Scanned => warnings.push(Warning::UncertifiedTruncation),
        _ => {}
    }
    Ok(CoverageResult {
        probability: r.value,
        abs_error: r.abs_error,
        diagnostics: Diagnostics {
            method: Method::GilPelaez,
            omega_max: Some(r.omega_max),
            panels: r.panels,
            evaluations: r.evaluations,
            truncation: Some(r.truncation),
            warnings,
        },
    })
}

fn cascade_gaussian(sc: &Scenario) -> Result<(f64, f64)> {
    let (mean, var) = cascade_mean_var(&sc.fading.bs_irs, &sc.fading.irs_ue)?;
    let rho = sc.geom.cascade_gain();
    let n = f64::from(sc.sys.n_elements());
    Ok((rho * n * mean, rho * libm::sqrt(n * var)))
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Mean-to-standard-deviation ratio of `|h_c|`,
/// `sqrt(N) G(m+1/2)^2 / sqrt(G(m+1)^2 G(m)^2 - G(m+1/2)^4)` for the
/// double-Nakagami terms, or `sqrt(N m)` under the gamma model.
pub fn channel_hardening_kappa(n: u32, m: f64, under_iid: bool) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_elements",
            value: 0.0,
            reason: "hardening needs at least one element",
        });
    }
    if !(m.is_finite() && m >= 0.5) {
        return Err(Error::InvalidParameter {
            name: "m",
            value: m,
            reason: "Nakagami shape must be at least 0.5",
        });
    }
    let root_n = libm::sqrt(f64::from(n));
    if under_iid {
        return Ok(root_n * libm::sqrt(m));
    }
    // with r = G(m+1/2)/G(m): kappa = sqrt(N) (r^2/m) / sqrt(1 - (r^2/m)^2)
    let r = gamma_ratio(m + 0.5, m)?;
    let q = r * r / m;
    Ok(root_n * q / libm::sqrt((1.0 - q) * (1.0 + q)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRange {
    /// Distance solving `t = 4 mu(d)`.
    pub distance: f64,
    /// Distance from the alternative constant `t / sqrt(2) = mu(d)`.
    pub lemma_distance: f64,
    /// `sqrt(N) E[Y] / sqrt(var Y)`.
    pub hardening: f64,
    /// False when the hardening ratio is below 0.5.
    pub valid: bool,
}

/// Distance beyond which the IRS-only link is essentially always in
/// outage: the `d` at which the cascade mean `mu = rho(r, d) N E[Y]` has
/// fallen to a quarter of the amplitude threshold.
pub fn irs_coverage_range(sc: &Scenario) -> Result<CoverageRange> {
    if sc.regime != Regime::AsymptoticClt {
        return Err(Error::InvalidScenario(
            "coverage range needs the CLT regime",
        ));
    }
    let n = sc.sys.n_elements();
    if n == 0 {
        return Err(Error::InvalidScenario(
            "coverage range needs at least one element",
        ));
    }
    let (mean, var) = cascade_mean_var(&sc.fading.bs_irs, &sc.fading.irs_ue)?;
    let t = sc.sys.amplitude_threshold();
    let g = &sc.geom;
    let alpha = g.alpha();
    let strength = g.zeta() * f64::from(n) * mean / libm::pow(g.r(), 0.5 * alpha);
    let solve = |level: f64| libm::pow(strength / level, 2.0 / alpha);
    let hardening = libm::sqrt(f64::from(n)) * mean / libm::sqrt(var);
    Ok(CoverageRange {
        distance: solve(t / 4.0),
        lemma_distance: solve(t / core::f64::consts::SQRT_2),
        hardening,
        valid: hardening >= 0.5,
    })
}
