//! Physical parameters of the BS / IRS / UE link and the deterministic
//! geometry and moment formulas that feed the transform engine.
//!
//! Amplitude convention: the direct link is `|h_q| = c1 * Z` with
//! `c1 = sqrt(zeta) * l^(-alpha/2)` and `Z ~ Nakagami(m, Omega)`; the
//! cascaded link is `|h_c| = rho * sum_n g_n h_n` with
//! `rho = zeta * r^(-alpha/2) * d^(-alpha/2)`.

use core::f64::consts::PI;

use crate::specfun::gamma_ratio;
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

/// Shape `m` and spread `Omega = E[Z^2]` of one Nakagami-m link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    m: f64,
    omega: f64,
}

impl NakagamiParams {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.5) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "Nakagami shape must be at least 0.5",
            });
        }
        positive("omega", omega)?;
        Ok(Self { m, omega })
    }

    /// Rayleigh fading with unit mean power.
    pub fn rayleigh() -> Self {
        Self { m: 1.0, omega: 1.0 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `E[Z^b]`.
    pub fn moment(&self, b: f64) -> Result<f64> {
        if !(b >= 0.0) {
            return Err(Error::Domain {
                function: "nakagami moment",
                value: b,
            });
        }
        let v = gamma_ratio(self.m + 0.5 * b, self.m)? * libm::pow(self.omega / self.m, 0.5 * b);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow {
                function: "nakagami moment",
            })
        }
    }
}

/// Distances, angle and propagation constants of the three links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    r: f64,
    d: f64,
    psi: f64,
    alpha: f64,
    zeta: f64,
    carrier_hz: Option<f64>,
}

/// `zeta = (lambda / 4 pi)^2` for a carrier frequency in Hz.
pub fn zeta_from_carrier(carrier_hz: f64) -> Result<f64> {
    positive("carrier_hz", carrier_hz)?;
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let z = lambda / (4.0 * PI);
    Ok(z * z)
}

impl LinkGeometry {
    /// Geometry with `zeta` derived from the carrier frequency.
    pub fn new(r: f64, d: f64, psi_rad: f64, alpha: f64, carrier_hz: f64) -> Result<Self> {
        let zeta = zeta_from_carrier(carrier_hz)?;
        let mut g = Self::with_zeta(r, d, psi_rad, alpha, zeta)?;
        g.carrier_hz = Some(carrier_hz);
        Ok(g)
    }

    /// Geometry with an explicit reference path gain `zeta` in `(0, 1]`.
    pub fn with_zeta(r: f64, d: f64, psi_rad: f64, alpha: f64, zeta: f64) -> Result<Self> {
        positive("r", r)?;
        positive("d", d)?;
        if !psi_rad.is_finite() {
            return Err(Error::InvalidParameter {
                name: "psi",
                value: psi_rad,
                reason: "must be finite",
            });
        }
        if !(alpha.is_finite() && alpha >= 2.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "path-loss exponent must be at least 2",
            });
        }
        if !(zeta > 0.0 && zeta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "zeta",
                value: zeta,
                reason: "reference path gain must lie in (0, 1]",
            });
        }
        let g = Self {
            r,
            d,
            psi: psi_rad,
            alpha,
            zeta,
            carrier_hz: None,
        };
        if !(g.bs_ue_distance() > 0.0) {
            return Err(Error::InvalidParameter {
                name: "psi",
                value: psi_rad,
                reason: "BS and UE coincide (degenerate geometry)",
            });
        }
        Ok(g)
    }

    /// Same geometry with a different IRS-to-UE distance.
    pub fn with_distance(&self, d: f64) -> Result<Self> {
        let mut g = Self::with_zeta(self.r, d, self.psi, self.alpha, self.zeta)?;
        g.carrier_hz = self.carrier_hz;
        Ok(g)
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    pub fn carrier_hz(&self) -> Option<f64> {
        self.carrier_hz
    }

    /// BS-to-UE distance `l` by the law of cosines.
    pub fn bs_ue_distance(&self) -> f64 {
        bs_ue_distance(self)
    }

    /// `c1 = sqrt(zeta) l^(-alpha/2)`, the direct-link amplitude scale.
    pub fn direct_gain(&self) -> f64 {
        libm::sqrt(self.zeta) * libm::pow(self.bs_ue_distance(), -0.5 * self.alpha)
    }

    /// `rho(r, d) = c2`, the per-element cascade amplitude scale.
    pub fn cascade_gain(&self) -> f64 {
        path_gain_cascade(self)
    }
}

pub fn bs_ue_distance(geom: &LinkGeometry) -> f64 {
    let (r, d) = (geom.r, geom.d);
    let l2 = r * r + d * d - 2.0 * r * d * libm::cos(geom.psi);
    // rounding can push a collinear geometry slightly negative
    libm::sqrt(l2.max(0.0)).max((r - d).abs())
}

pub fn path_gain_cascade(geom: &LinkGeometry) -> f64 {
    geom.zeta * libm::pow(geom.r * geom.d, -0.5 * geom.alpha)
}

/// `E[Y^b]` for `Y` the product of two independent Nakagami amplitudes.
pub fn double_nakagami_moment(b: f64, p1: &NakagamiParams, p2: &NakagamiParams) -> Result<f64> {
    let v = p1.moment(b)? * p2.moment(b)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            function: "double_nakagami_moment",
        })
    }
}

/// Mean and variance of one cascade term `Y = g h`.
pub fn cascade_mean_var(p1: &NakagamiParams, p2: &NakagamiParams) -> Result<(f64, f64)> {
    let mean = double_nakagami_moment(1.0, p1, p2)?;
    // E[Y^2] = Omega_1 Omega_2 exactly
    let second = p1.omega * p2.omega;
    Ok((mean, (second - mean * mean).max(0.0)))
}

/// BS transmit power, receiver noise, IRS size and SNR threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    power_w: f64,
    noise_var: f64,
    n_elements: u32,
    theta: f64,
}

impl SystemParams {
    pub fn new(power_w: f64, noise_var: f64, n_elements: u32, theta: f64) -> Result<Self> {
        positive("power_w", power_w)?;
        positive("noise_var", noise_var)?;
        positive("theta", theta)?;
        Ok(Self {
            power_w,
            noise_var,
            n_elements,
            theta,
        })
    }

    pub fn power_w(&self) -> f64 {
        self.power_w
    }
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
    pub fn n_elements(&self) -> u32 {
        self.n_elements
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.power_w, self.noise_var, self.n_elements, theta)
    }

    pub fn with_n_elements(&self, n: u32) -> Self {
        Self {
            n_elements: n,
            ..*self
        }
    }

    pub fn with_power(&self, power_w: f64) -> Result<Self> {
        Self::new(power_w, self.noise_var, self.n_elements, self.theta)
    }

    /// Amplitude threshold `t = sqrt(theta sigma^2 / P)`: `SNR > theta`
    /// exactly when the combined amplitude exceeds `t`.
    pub fn amplitude_threshold(&self) -> f64 {
        libm::sqrt(self.theta * self.noise_var / self.power_w)
    }
}

/// Fading of the BS-IRS (`g`), IRS-UE (`h`) and BS-UE (`q`) links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingConfig {
    pub bs_irs: NakagamiParams,
    pub irs_ue: NakagamiParams,
    pub bs_ue: NakagamiParams,
}

impl FadingConfig {
    pub fn uniform(p: NakagamiParams) -> Self {
        Self {
            bs_irs: p,
            irs_ue: p,
            bs_ue: p,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Receiver noise `psd + 10 log10(W) + NF` in dBm, returned in watts.
pub fn noise_power_w(psd_dbm_per_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    positive("bandwidth_hz", bandwidth_hz)?;
    Ok(dbm_to_watts(
        psd_dbm_per_hz + 10.0 * libm::log10(bandwidth_hz) + noise_figure_db,
    ))
}
