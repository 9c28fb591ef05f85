//! CDF of a real random variable from its characteristic function by
//! Gil-Pelaez inversion,
//! `F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-j w x) phi(w)) / w dw`,
//! with `phi(w) = E[exp(j w X)]`.
//!
//! The range `[0, omega*]` is cut into panels no wider than a quarter
//! period of the fastest oscillation, each integrated by adaptive
//! Gauss-Kronrod. `omega*` comes from a certified tail bound when the
//! transform provides one and from an envelope scan otherwise. When neither
//! fits in the panel budget (a slowly decaying transform), the remainder is
//! summed over half periods of `exp(-j w (x - edge))` and extrapolated with
//! the Wynn epsilon algorithm.

use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::specfun::{integrate_adaptive, Interval, QuadratureOptions};
use crate::{Error, Result};

/// Mean, variance and third central moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Cumulants {
    pub mean: f64,
    pub variance: f64,
    pub third: f64,
}

/// What the inversion needs to know about a distribution.
pub trait CharacteristicFunction {
    /// `phi(omega) = E[exp(j omega X)]`.
    fn cf(&self, omega: f64) -> Result<Complex64>;

    fn cumulants(&self) -> Result<Cumulants>;

    /// Nonincreasing upper bound on `|phi(w)|` for `w >= omega`.
    fn envelope(&self, _omega: f64) -> Option<f64> {
        None
    }

    /// Upper bound on `int_omega^inf |phi(w)| / w dw`.
    fn tail_bound(&self, _omega: f64) -> Option<f64> {
        None
    }

    /// Left end of the support.
    fn support_min(&self) -> f64 {
        f64::NEG_INFINITY
    }

    /// Location of the distribution's non-smooth point, which fixes the
    /// asymptotic oscillation `exp(j w edge)` of `phi`.
    fn edge(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaMaxPolicy {
    /// Certified tail bound if available, envelope scan otherwise, with
    /// half-period extrapolation when the budget is exceeded.
    Envelope,
    /// Integrate to the given frequency and ignore the remainder.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub abs_tol: f64,
    /// Below this frequency the integrand is replaced by its Taylor series.
    /// Divided by the reach `max(|x|, |mean| + 6 sd, |mean - x|)` when that
    /// exceeds one, so the series stays valid for widely spread variables.
    pub omega_min: f64,
    pub omega_max_policy: OmegaMaxPolicy,
    pub max_panels: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-6,
            omega_min: 1e-6,
            omega_max_policy: OmegaMaxPolicy::Envelope,
            max_panels: 200_000,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value| Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        };
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(bad("abs_tol", self.abs_tol));
        }
        if !(self.omega_min.is_finite() && self.omega_min > 0.0) {
            return Err(bad("omega_min", self.omega_min));
        }
        if self.max_panels == 0 {
            return Err(bad("max_panels", 0.0));
        }
        if let OmegaMaxPolicy::Fixed(w) = self.omega_max_policy {
            if !(w.is_finite() && w > self.omega_min) {
                return Err(Error::InvalidParameter {
                    name: "omega_max",
                    value: w,
                    reason: "must be finite and above omega_min",
                });
            }
        }
        Ok(())
    }
}

/// How the integral beyond the last panel was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Tail bounded analytically.
    Certified,
    /// Tail judged negligible from a scan of `|phi|` or its envelope.
    Scanned,
    /// Tail summed over half periods and extrapolated.
    Extrapolated,
    /// Cut at a caller-supplied frequency.
    Fixed,
    /// The point lies left of the support; no integral was needed.
    Support,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    /// Probability clamped to `[0, 1]`.
    pub value: f64,
    /// Value before clamping.
    pub unclamped: f64,
    pub abs_error: f64,
    pub omega_max: f64,
    pub panels: usize,
    pub evaluations: usize,
    pub truncation: Truncation,
}

/// `Im(exp(-j w x) phi(w)) / w`, switching to the two-term series
/// `(mu - x) - w^2 E[(X - x)^3] / 6` below `omega_min`.
pub fn gil_pelaez_integrand<C>(cf: &C, x: f64, omega: f64, omega_min: f64) -> Result<f64>
where
    C: CharacteristicFunction + ?Sized,
{
    if omega < omega_min {
        let cum = cf.cumulants()?;
        let d = cum.mean - x;
        let third = cum.third + 3.0 * cum.variance * d + d * d * d;
        return Ok(d - omega * omega * third / 6.0);
    }
    Ok(direct_integrand(cf.cf(omega)?, x, omega))
}

fn direct_integrand(phi: Complex64, x: f64, omega: f64) -> f64 {
    (Complex64::from_polar(1.0, -omega * x) * phi).im / omega
}

/// `P(X <= x)`.
pub fn gil_pelaez_cdf<C>(cf: &C, x: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    C: CharacteristicFunction + ?Sized,
{
    cfg.validate()?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t",
            value: x,
            reason: "must be finite",
        });
    }
    let cum = cf.cumulants()?;
    let support = cf.support_min();
    if x < support || (x == support && cum.variance > 0.0) {
        return Ok(Inversion {
            value: 0.0,
            unclamped: 0.0,
            abs_error: 0.0,
            omega_max: 0.0,
            panels: 0,
            evaluations: 0,
            truncation: Truncation::Support,
        });
    }

    let setup = Setup::new(cf, x, cfg, &cum);
    let (d, spread, width, budget_omega, tail_target) = (
        setup.d,
        setup.spread,
        setup.width,
        setup.budget_omega,
        setup.tail_target,
    );
    let plan = setup.plan;

    let omega_min = setup.omega_min;
    let third = cum.third + 3.0 * cum.variance * d + d * d * d;
    let series = d * omega_min - third * (omega_min * omega_min * omega_min) / 18.0;

    let mut panel_opts = QuadratureOptions::with_tolerances(1e-15, 1e-12);
    panel_opts.max_subdivisions = 64;
    let mut state = Accumulator {
        cf,
        x,
        failure: None,
        evaluations: 0,
        panels: 0,
        sum: series,
        error: 0.0,
    };

    let result = match plan {
        Plan::Cut { omega, tail, kind } => {
            let n = libm::ceil((omega - omega_min) / width).max(1.0) as usize;
            panel_opts.abs_tol = (tail_target / n as f64).max(1e-15);
            state.panels_between(omega_min, omega, n, &panel_opts)?;
            state.error += tail;
            (omega, kind)
        }
        Plan::Oscillatory { reached, tail } => {
            let edge = match cf.edge() {
                Some(e) if e != x => e,
                _ => {
                    return Err(Error::Truncation {
                        omega: reached,
                        tail_bound: tail,
                    })
                }
            };
            let half = PI / (x - edge).abs();
            let cut = oscillatory_cut(half, spread, budget_omega);
            let n = libm::ceil((cut - omega_min) / width).max(1.0) as usize;
            panel_opts.abs_tol = (tail_target / n as f64).max(1e-15);
            state.panels_between(omega_min, cut, n, &panel_opts)?;

            let mut term_opts = panel_opts;
            term_opts.abs_tol = (tail_target / 1000.0).max(1e-15);
            let mut partial = Vec::with_capacity(HALF_PERIODS + 1);
            partial.push(state.sum);
            let mut lo = cut;
            for _ in 0..HALF_PERIODS {
                // half periods are themselves sub-split to keep GK effective
                let pieces = libm::ceil(half / width).max(1.0) as usize;
                state.panels_between(lo, lo + half, pieces, &term_opts)?;
                partial.push(state.sum);
                lo += half;
            }
            let (value, err) = wynn_epsilon(&partial);
            state.sum = value;
            state.error += err;
            (lo, Truncation::Extrapolated)
        }
    };

    let (omega_max, truncation) = result;
    let unclamped = 0.5 - state.sum / PI;
    let abs_error = state.error / PI;
    let slack = 10.0 * cfg.abs_tol;
    if !(unclamped >= -slack && unclamped <= 1.0 + slack) {
        return Err(Error::RangeExcursion {
            value: unclamped,
            tolerance: slack,
        });
    }
    Ok(Inversion {
        value: unclamped.clamp(0.0, 1.0),
        unclamped,
        abs_error,
        omega_max,
        panels: state.panels,
        evaluations: state.evaluations,
        truncation,
    })
}

/// `P(X > x) = 1 - P(X <= x)`.
pub fn ccdf<C>(cf: &C, x: f64, cfg: &InversionConfig) -> Result<Inversion>
where
    C: CharacteristicFunction + ?Sized,
{
    let mut r = gil_pelaez_cdf(cf, x, cfg)?;
    r.value = 1.0 - r.value;
    r.unclamped = 1.0 - r.unclamped;
    Ok(r)
}

/// Largest frequency at which [`gil_pelaez_cdf`] will evaluate `cf` for
/// this point, so that callers can tabulate expensive transforms first.
pub fn omega_max_for<C>(cf: &C, x: f64, cfg: &InversionConfig) -> Result<f64>
where
    C: CharacteristicFunction + ?Sized,
{
    cfg.validate()?;
    let cum = cf.cumulants()?;
    let setup = Setup::new(cf, x, cfg, &cum);
    Ok(match setup.plan {
        Plan::Cut { omega, .. } => omega,
        Plan::Oscillatory { .. } => match cf.edge() {
            Some(e) if e != x => {
                let half = PI / (x - e).abs();
                oscillatory_cut(half, setup.spread, setup.budget_omega) + HALF_PERIODS as f64 * half
            }
            _ => 0.0,
        },
    })
}

const HALF_PERIODS: usize = 40;

struct Setup {
    d: f64,
    omega_min: f64,
    spread: f64,
    width: f64,
    budget_omega: f64,
    tail_target: f64,
    plan: Plan,
}

impl Setup {
    fn new<C>(cf: &C, x: f64, cfg: &InversionConfig, cum: &Cumulants) -> Self
    where
        C: CharacteristicFunction + ?Sized,
    {
        let d = cum.mean - x;
        let spread = libm::sqrt(cum.variance);
        let mut reach = x.abs().max(cum.mean.abs() + 6.0 * spread).max(d.abs());
        if !(reach > 0.0) {
            reach = 1.0;
        }
        let width = PI / reach;
        let budget_omega = width * cfg.max_panels as f64;
        let tail_target = PI * cfg.abs_tol / 10.0;
        let plan = match cfg.omega_max_policy {
            OmegaMaxPolicy::Fixed(w) => Plan::Cut {
                omega: w,
                tail: 0.0,
                kind: Truncation::Fixed,
            },
            OmegaMaxPolicy::Envelope => plan_truncation(cf, 1.0 / reach, tail_target, budget_omega),
        };
        Self {
            d,
            omega_min: cfg.omega_min / reach.max(1.0),
            spread,
            width,
            budget_omega,
            tail_target,
            plan,
        }
    }
}

/// Start of the half-period sums: a few periods in, and past the bulk's
/// own decay scale, on a multiple of `half`.
fn oscillatory_cut(half: f64, spread: f64, budget_omega: f64) -> f64 {
    let mut cut = (8.0 * half).max(30.0 / spread.max(1e-300));
    cut = half * libm::ceil(cut / half);
    if cut > budget_omega {
        cut = half * libm::floor(budget_omega / half).max(8.0);
    }
    cut
}

enum Plan {
    Cut {
        omega: f64,
        tail: f64,
        kind: Truncation,
    },
    Oscillatory {
        reached: f64,
        tail: f64,
    },
}

fn plan_truncation<C>(cf: &C, start: f64, target: f64, budget: f64) -> Plan
where
    C: CharacteristicFunction + ?Sized,
{
    if let Some(mut tail) = cf.tail_bound(start) {
        let mut w = start;
        while !(tail <= target) {
            if w > budget {
                return Plan::Oscillatory { reached: w, tail };
            }
            w *= 2.0;
            tail = cf.tail_bound(w).unwrap_or(f64::INFINITY);
        }
        if w > start {
            // shrink inside the last doubling
            let (mut lo, mut hi) = (0.5 * w, w);
            for _ in 0..30 {
                let mid = libm::sqrt(lo * hi);
                match cf.tail_bound(mid) {
                    Some(t) if t <= target => {
                        hi = mid;
                        tail = t;
                    }
                    _ => lo = mid,
                }
            }
            w = hi;
        }
        return Plan::Cut {
            omega: w,
            tail,
            kind: Truncation::Certified,
        };
    }

    // no analytic tail: scan the envelope (or |phi|) on a doubling grid and
    // stop once three consecutive points are small and nonincreasing
    let level = |w: f64| match cf.envelope(w) {
        Some(e) => e,
        None => cf.cf(w).map(|v| v.norm()).unwrap_or(f64::INFINITY),
    };
    let small = target / (3.0 * LN_2);
    let mut w = start;
    let mut run = [level(w), level(2.0 * w), level(4.0 * w)];
    loop {
        if run[0] <= small && run[1] <= run[0] && run[2] <= run[1] {
            return Plan::Cut {
                omega: w,
                tail: 2.0 * LN_2 * run[0],
                kind: Truncation::Scanned,
            };
        }
        if w > budget {
            return Plan::Oscillatory {
                reached: w,
                tail: 2.0 * LN_2 * run[0],
            };
        }
        w *= 2.0;
        run = [run[1], run[2], level(4.0 * w)];
    }
}

struct Accumulator<'a, C: ?Sized> {
    cf: &'a C,
    x: f64,
    failure: Option<Error>,
    evaluations: usize,
    panels: usize,
    sum: f64,
    error: f64,
}

impl<C> Accumulator<'_, C>
where
    C: CharacteristicFunction + ?Sized,
{
    fn panels_between(&mut self, a: f64, b: f64, n: usize, opts: &QuadratureOptions) -> Result<()> {
        let step = (b - a) / n as f64;
        for i in 0..n {
            let lo = a + step * i as f64;
            let hi = if i + 1 == n { b } else { lo + step };
            let (cf, x) = (self.cf, self.x);
            let failure = &mut self.failure;
            let f = |w: f64| match cf.cf(w) {
                Ok(phi) => Complex64::new(direct_integrand(phi, x, w), 0.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            };
            let r = integrate_adaptive(f, Interval::Finite(lo, hi), opts);
            if let Some(e) = self.failure.take() {
                return Err(e);
            }
            let r = r?;
            self.sum += r.value.re;
            self.error += r.abs_error_estimate;
            self.evaluations += r.evaluations;
            self.panels += 1;
        }
        Ok(())
    }
}

/// Limit of a sequence of partial sums by the Wynn epsilon algorithm.
/// Returns the estimate and the gap between the two last estimates of the
/// most stable even column.
fn wynn_epsilon(s: &[f64]) -> (f64, f64) {
    let n = s.len();
    let mut best = s[n - 1];
    let mut best_err = if n > 1 {
        (s[n - 1] - s[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    let mut prev = alloc::vec![0.0; n + 1];
    let mut cur = s.to_vec();
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let v = prev[i + 1] + 1.0 / diff;
            if !v.is_finite() {
                return (best, best_err);
            }
            next.push(v);
        }
        column += 1;
        if column % 2 == 0 && next.len() >= 2 {
            let l = next.len();
            let err = (next[l - 1] - next[l - 2]).abs();
            if err < best_err {
                best = next[l - 1];
                best_err = err;
            }
        }
        prev = cur;
        cur = next;
    }
    (best, best_err)
}
