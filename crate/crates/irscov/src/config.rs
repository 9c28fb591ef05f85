//! TOML scenario files.
//!
//! Sections: `geometry`, `fading`, `system`, optional `sweep` and
//! `simulation`. Angles are in degrees, thresholds in dB, power in watts
//! and frequencies in Hz. Unknown keys are rejected.
//!
//! Noise power, unless given directly as `system.noise_w`, is
//! `10^((noise_psd_dbm_hz + 10 log10(bandwidth_hz) + noise_figure_db - 30) / 10)`
//! watts.

use std::path::Path;

use irscov_core::coverage::{Mode, Regime, Scenario};
use irscov_core::model::{
    db_to_linear, noise_power_w, FadingConfig, LinkGeometry, NakagamiParams, SystemParams,
};
use irscov_core::montecarlo::{SimConfig, DEFAULT_SAMPLES, DEFAULT_STREAMS};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::sweep::{Grid, Series, SweepSpec, SweepVariable};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometrySection,
    pub fading: FadingSection,
    pub system: SystemSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// BS-IRS distance in metres.
    pub r: f64,
    /// IRS-UE distance in metres.
    pub d: f64,
    /// Angle between the BS-IRS and IRS-UE segments in degrees.
    pub psi_deg: f64,
    pub alpha: f64,
    pub carrier_hz: Option<f64>,
    /// Overrides the near-field factor derived from `carrier_hz`.
    pub zeta: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFading {
    pub m: f64,
    #[serde(default = "unit")]
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    /// Shape shared by every link without its own table.
    pub m: Option<f64>,
    #[serde(default = "unit")]
    pub omega: f64,
    pub bs_irs: Option<LinkFading>,
    pub irs_ue: Option<LinkFading>,
    pub bs_ue: Option<LinkFading>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub power_w: f64,
    pub n_elements: u32,
    pub theta_db: f64,
    pub bandwidth_hz: Option<f64>,
    #[serde(default = "default_psd")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default)]
    pub noise_figure_db: f64,
    /// Noise power in watts, replacing the PSD/bandwidth/figure budget.
    pub noise_w: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub modes: Vec<String>,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<String>,
    #[serde(default)]
    pub validate: bool,
    pub series: Option<Series>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub streams: u32,
    #[serde(default)]
    pub antithetic: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            streams: DEFAULT_STREAMS,
            antithetic: false,
        }
    }
}

fn unit() -> f64 {
    1.0
}
fn default_psd() -> f64 {
    -174.0
}
fn default_regimes() -> Vec<String> {
    vec![Regime::FiniteInid.name().to_owned()]
}
fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}
fn default_streams() -> u32 {
    DEFAULT_STREAMS
}

/// A parsed and validated configuration.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub base: Scenario,
    pub sweep: Option<SweepSpec>,
    pub sim: SimConfig,
    /// SHA-256 of the config text, hex encoded.
    pub hash: String,
}

pub fn load(path: &Path) -> CliResult<Loaded> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<Loaded> {
    let cfg: Config = toml::from_str(text).map_err(CliError::config)?;
    let hash = format!("{:x}", Sha256::digest(text.as_bytes()));
    cfg.resolve(hash)
}

fn numeric<T>(what: &str, r: irscov_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::config(format!("{what}: {e}")))
}

impl Config {
    fn resolve(&self, hash: String) -> CliResult<Loaded> {
        let g = &self.geometry;
        let psi = g.psi_deg.to_radians();
        let geom = match (g.zeta, g.carrier_hz) {
            (Some(z), _) => numeric(
                "geometry",
                LinkGeometry::with_zeta(g.r, g.d, psi, g.alpha, z),
            )?,
            (None, Some(f)) => numeric("geometry", LinkGeometry::new(g.r, g.d, psi, g.alpha, f))?,
            (None, None) => {
                return Err(CliError::config("geometry needs carrier_hz or zeta"));
            }
        };

        let f = &self.fading;
        let link = |own: Option<LinkFading>, name: &str| -> CliResult<NakagamiParams> {
            let lf = match (own, f.m) {
                (Some(l), _) => l,
                (None, Some(m)) => LinkFading { m, omega: f.omega },
                (None, None) => {
                    return Err(CliError::config(format!(
                        "fading: no shape for link {name}"
                    )));
                }
            };
            numeric("fading", NakagamiParams::new(lf.m, lf.omega))
        };
        let fading = FadingConfig {
            bs_irs: link(f.bs_irs, "bs_irs")?,
            irs_ue: link(f.irs_ue, "irs_ue")?,
            bs_ue: link(f.bs_ue, "bs_ue")?,
        };

        let s = &self.system;
        let noise = match (s.noise_w, s.bandwidth_hz) {
            (Some(w), _) => w,
            (None, Some(bw)) => numeric(
                "system",
                noise_power_w(s.noise_psd_dbm_hz, bw, s.noise_figure_db),
            )?,
            (None, None) => return Err(CliError::config("system needs bandwidth_hz or noise_w")),
        };
        let sys = numeric(
            "system",
            SystemParams::new(s.power_w, noise, s.n_elements, db_to_linear(s.theta_db)),
        )?;

        let sweep = self.sweep.as_ref().map(SweepSection::resolve).transpose()?;
        let (mode, regime) = sweep
            .as_ref()
            .map_or((Mode::Combined, Regime::FiniteInid), |w| {
                (w.modes[0], w.regimes[0])
            });
        let sim = SimConfig {
            samples: self.simulation.samples,
            seed: self.simulation.seed,
            streams: self.simulation.streams,
            antithetic: self.simulation.antithetic,
        };
        numeric("simulation", sim.validate())?;
        Ok(Loaded {
            base: Scenario::new(geom, fading, sys, mode, regime),
            sweep,
            sim,
            hash,
        })
    }
}

impl SweepSection {
    fn resolve(&self) -> CliResult<SweepSpec> {
        let modes = self
            .modes
            .iter()
            .map(|m| {
                m.parse::<Mode>()
                    .map_err(|_| CliError::config(format!("sweep: unknown mode {m:?}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let regimes = self
            .regimes
            .iter()
            .map(|r| {
                r.parse::<Regime>()
                    .map_err(|_| CliError::config(format!("sweep: unknown regime {r:?}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let spec = SweepSpec {
            variable: self.variable,
            grid: self.grid.clone(),
            modes,
            regimes,
            validate: self.validate,
            series: self.series.clone(),
        };
        spec.check()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[geometry]
r = 500.0
d = 100.0
psi_deg = 85.0
alpha = 4.0
zeta = 1.0

[fading]
m = 0.5

[system]
power_w = 2.5
n_elements = 500
theta_db = 5.0
bandwidth_hz = 1e8
noise_figure_db = 10.0
"#;

    #[test]
    fn minimal_config() {
        let l = parse(MINIMAL).unwrap();
        assert_eq!(l.base.sys.n_elements(), 500);
        assert!((l.base.sys.noise_var() / 10f64.powf(-11.4) - 1.0).abs() < 1e-12);
        assert_eq!(l.base.fading.bs_ue.m(), 0.5);
        assert_eq!(l.sim, SimConfig::default());
        assert!(l.sweep.is_none());
        assert_eq!(l.hash.len(), 64);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let extra = MINIMAL.replace("alpha = 4.0", "alpha = 4.0\nbeta = 1.0");
        assert!(matches!(parse(&extra), Err(CliError::Config(_))));
        let bad = MINIMAL.replace("m = 0.5", "m = 0.2");
        assert!(matches!(parse(&bad), Err(CliError::Config(_))));
        let no_zeta = MINIMAL.replace("zeta = 1.0", "");
        assert!(matches!(parse(&no_zeta), Err(CliError::Config(_))));
    }

    #[test]
    fn per_link_fading_and_carrier() {
        let text = MINIMAL
            .replace("zeta = 1.0", "carrier_hz = 3e9")
            .replace("m = 0.5", "m = 1.0\n[fading.bs_ue]\nm = 2.0\nomega = 0.5");
        let l = parse(&text).unwrap();
        assert_eq!(l.base.fading.bs_ue.m(), 2.0);
        assert_eq!(l.base.fading.bs_ue.omega(), 0.5);
        assert_eq!(l.base.fading.bs_irs.m(), 1.0);
        assert!(l.base.geom.zeta() < 1e-4);
    }
}
