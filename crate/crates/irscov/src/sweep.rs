//! Parameter sweeps over a base scenario.
//!
//! Grid points are evaluated on the current rayon pool and collected in grid
//! order: series value, then sweep value, then mode, then regime. Monte-Carlo
//! estimates do not depend on the regime and are shared between the regime
//! rows of a point; a threshold sweep reuses one set of realizations for the
//! whole grid.

use std::collections::HashMap;
use std::time::Instant;

use irscov_core::coverage::{
    channel_hardening_kappa, coverage_with, irs_coverage_range, table_demand, Mode, Regime,
    Scenario,
};
use irscov_core::mgf::{TableCache, TableKey};
use irscov_core::model::{db_to_linear, FadingConfig, NakagamiParams};
use irscov_core::montecarlo::{
    coverage_stream, hardening_stream, merge_coverage, merge_hardening, SimConfig, SimEstimate,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    ThetaDb,
    NElements,
    DistanceD,
    ShapeM,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::ThetaDb => "theta_db",
            SweepVariable::NElements => "n_elements",
            SweepVariable::DistanceD => "distance_d",
            SweepVariable::ShapeM => "shape_m",
        }
    }

    /// Copy of `base` with this variable set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> irscov_core::Result<Scenario> {
        let mut sc = *base;
        match self {
            SweepVariable::ThetaDb => sc.sys = sc.sys.with_theta(db_to_linear(value))?,
            SweepVariable::NElements => {
                if !(value >= 0.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                    return Err(irscov_core::Error::InvalidParameter {
                        name: "n_elements",
                        value,
                        reason: "element count must be a nonnegative integer",
                    });
                }
                sc.sys = sc.sys.with_n_elements(value as u32);
            }
            SweepVariable::DistanceD => sc.geom = sc.geom.with_distance(value)?,
            SweepVariable::ShapeM => {
                let f = &sc.fading;
                sc.fading = FadingConfig {
                    bs_irs: NakagamiParams::new(value, f.bs_irs.omega())?,
                    irs_ue: NakagamiParams::new(value, f.irs_ue.omega())?,
                    bs_ue: NakagamiParams::new(value, f.bs_ue.omega())?,
                };
            }
        }
        Ok(sc)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
        #[serde(default)]
        spacing: Spacing,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Range {
                start,
                stop,
                points,
                spacing,
            } => {
                if points == 1 {
                    return vec![start];
                }
                let last = (points - 1) as f64;
                (0..points)
                    .map(|i| {
                        if i + 1 == points {
                            return stop;
                        }
                        let u = i as f64 / last;
                        match spacing {
                            Spacing::Linear => start + (stop - start) * u,
                            Spacing::Log => start * (stop / start).powf(u),
                        }
                    })
                    .collect()
            }
        }
    }

    fn check(&self) -> CliResult<()> {
        if let Grid::Range {
            start,
            stop,
            points,
            spacing,
        } = *self
        {
            if points == 0 {
                return Err(CliError::config("sweep grid needs at least one point"));
            }
            if spacing == Spacing::Log && !(start > 0.0 && stop > 0.0) {
                return Err(CliError::config("log grid needs positive end points"));
            }
        }
        let v = self.values();
        if v.is_empty() {
            return Err(CliError::config("sweep grid is empty"));
        }
        if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::config(
                "sweep grid must be finite and strictly increasing",
            ));
        }
        Ok(())
    }
}

/// A second, outer axis (one curve per value).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub modes: Vec<Mode>,
    pub regimes: Vec<Regime>,
    /// Run the Monte-Carlo oracle alongside.
    pub validate: bool,
    pub series: Option<Series>,
}

impl SweepSpec {
    pub fn check(&self) -> CliResult<()> {
        self.grid.check()?;
        if self.modes.is_empty() || self.regimes.is_empty() {
            return Err(CliError::config(
                "sweep needs at least one mode and one regime",
            ));
        }
        if let Some(s) = &self.series {
            if s.variable == self.variable {
                return Err(CliError::config("series and sweep variable must differ"));
            }
            if s.values.is_empty() {
                return Err(CliError::config("series needs at least one value"));
            }
        }
        Ok(())
    }

    fn series_values(&self) -> Vec<Option<f64>> {
        match &self.series {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    /// Scenario at one series value and grid value.
    pub fn point(&self, base: &Scenario, series: Option<f64>, value: f64) -> CliResult<Scenario> {
        let mut sc = *base;
        if let (Some(s), Some(v)) = (&self.series, series) {
            sc = s.variable.apply(&sc, v).map_err(|e| {
                CliError::config(format!("series {} = {v}: {e}", s.variable.name()))
            })?;
        }
        self.variable
            .apply(&sc, value)
            .map_err(|e| CliError::config(format!("{} = {value}: {e}", self.variable.name())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub series: Option<SweepVariable>,
    pub series_value: Option<f64>,
    #[serde(with = "mode_name")]
    pub mode: Mode,
    #[serde(with = "regime_name")]
    pub regime: Regime,
    pub analytic: f64,
    pub analytic_abs_error: f64,
    pub mc: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub runtime_ms: Option<f64>,
}

macro_rules! name_serde {
    ($module:ident, $ty:ty) => {
        mod $module {
            use serde::{de::Error, Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &$ty, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(v.name())
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<$ty, D::Error> {
                let s = String::deserialize(d)?;
                s.parse()
                    .map_err(|_| D::Error::custom(format!("unknown name {s:?}")))
            }
        }
    };
}
name_serde!(mode_name, irscov_core::coverage::Mode);
name_serde!(regime_name, irscov_core::coverage::Regime);

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepOptions {
    /// Monte-Carlo settings; `None` skips the oracle.
    pub sim: Option<SimConfig>,
    pub timings: bool,
}

/// Parallel Monte-Carlo coverage over substreams, merged in stream order.
pub fn simulate_parallel(
    sc: &Scenario,
    thetas: &[f64],
    cfg: &SimConfig,
) -> CliResult<Vec<SimEstimate>> {
    let tallies = (0..cfg.streams)
        .into_par_iter()
        .map(|k| coverage_stream(sc, thetas, cfg, k))
        .collect::<irscov_core::Result<Vec<_>>>()
        .map_err(|e| CliError::numerical("simulation", e))?;
    Ok(merge_coverage(&tallies))
}

type McKey = (usize, usize, Mode);

fn run_oracle(
    base: &Scenario,
    spec: &SweepSpec,
    series: &[Option<f64>],
    grid: &[f64],
    cfg: &SimConfig,
) -> CliResult<HashMap<McKey, SimEstimate>> {
    // (series index, grid indices, mode, scenario, thresholds)
    let mut tasks = Vec::new();
    for (si, &sv) in series.iter().enumerate() {
        for &mode in &spec.modes {
            if spec.variable == SweepVariable::ThetaDb {
                let sc = spec.point(base, sv, grid[0])?.with_mode(mode);
                let thetas = grid.iter().map(|&db| db_to_linear(db)).collect::<Vec<_>>();
                tasks.push((si, (0..grid.len()).collect::<Vec<_>>(), mode, sc, thetas));
            } else {
                for (gi, &v) in grid.iter().enumerate() {
                    let sc = spec.point(base, sv, v)?.with_mode(mode);
                    let theta = sc.sys.theta();
                    tasks.push((si, vec![gi], mode, sc, vec![theta]));
                }
            }
        }
    }
    let results = tasks
        .par_iter()
        .map(|(_, _, _, sc, thetas)| simulate_parallel(sc, thetas, cfg))
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = HashMap::new();
    for ((si, gis, mode, _, _), est) in tasks.into_iter().zip(results) {
        for (gi, e) in gis.into_iter().zip(est) {
            out.insert((si, gi, mode), e);
        }
    }
    Ok(out)
}

/// Builds, once per fading configuration, the widest table any point needs.
fn shared_tables<F>(points: &[(usize, usize, Scenario)], context: &F) -> CliResult<TableCache>
where
    F: Fn(usize, usize, &Scenario) -> String + Sync,
{
    let demands = points
        .par_iter()
        .map(|(si, gi, sc)| {
            table_demand(sc).map_err(|e| CliError::numerical(context(*si, *gi, sc), e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut widest: Vec<(TableKey, f64)> = Vec::new();
    for (key, v) in demands.into_iter().flatten() {
        match widest.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = entry.1.max(v),
            None => widest.push((key, v)),
        }
    }
    let tables = widest
        .par_iter()
        .map(|(key, v)| {
            key.build(*v)
                .map(|t| (*key, t))
                .map_err(|e| CliError::numerical("characteristic-function table", e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut cache = TableCache::new();
    for (key, table) in tables {
        cache.insert(key, table);
    }
    Ok(cache)
}

/// One row per (series value, grid value, mode, regime), in that order.
pub fn run_sweep(
    base: &Scenario,
    spec: &SweepSpec,
    opts: &SweepOptions,
) -> CliResult<Vec<OutputRow>> {
    spec.check()?;
    let series = spec.series_values();
    let grid = spec.grid.values();

    let mut points = Vec::new();
    for (si, &sv) in series.iter().enumerate() {
        for (gi, &v) in grid.iter().enumerate() {
            let sc = spec.point(base, sv, v)?;
            for &mode in &spec.modes {
                for &regime in &spec.regimes {
                    points.push((si, gi, sc.with_mode(mode).with_regime(regime)));
                }
            }
        }
    }

    let context = |si: usize, gi: usize, sc: &Scenario| {
        let mut ctx = format!("{} = {}", spec.variable.name(), grid[gi]);
        if let (Some(s), Some(v)) = (&spec.series, series[si]) {
            ctx = format!("{} = {v}, {ctx}", s.variable.name());
        }
        format!("{ctx}, {} / {}", sc.mode, sc.regime)
    };
    let cache = shared_tables(&points, &context)?;
    let analytic = points
        .par_iter()
        .map(|(si, gi, sc)| {
            let start = Instant::now();
            let r = coverage_with(sc, Some(&cache))
                .map_err(|e| CliError::numerical(context(*si, *gi, sc), e))?;
            Ok((r, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let oracle = match &opts.sim {
        Some(cfg) => run_oracle(base, spec, &series, &grid, cfg)?,
        None => HashMap::new(),
    };

    Ok(points
        .iter()
        .zip(analytic)
        .map(|((si, gi, sc), (r, ms))| {
            let mc = oracle.get(&(*si, *gi, sc.mode));
            OutputRow {
                variable: spec.variable,
                value: grid[*gi],
                series: spec.series.as_ref().map(|s| s.variable),
                series_value: series[*si],
                mode: sc.mode,
                regime: sc.regime,
                analytic: r.probability,
                analytic_abs_error: r.abs_error,
                mc: mc.map(|e| e.coverage),
                mc_std_error: mc.map(|e| e.std_error),
                runtime_ms: opts.timings.then_some(ms),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub series: Option<SweepVariable>,
    pub series_value: Option<f64>,
    pub distance: f64,
    pub lemma_distance: f64,
    pub hardening: f64,
    pub valid: bool,
}

/// IRS coverage range at every sweep point (CLT regime).
pub fn range_table(base: &Scenario, spec: &SweepSpec) -> CliResult<Vec<RangeRow>> {
    spec.check()?;
    let mut rows = Vec::new();
    for sv in spec.series_values() {
        for v in spec.grid.values() {
            let sc = spec.point(base, sv, v)?.with_regime(Regime::AsymptoticClt);
            let r = irs_coverage_range(&sc)
                .map_err(|e| CliError::numerical(format!("{} = {v}", spec.variable.name()), e))?;
            rows.push(RangeRow {
                variable: spec.variable,
                value: v,
                series: spec.series.as_ref().map(|s| s.variable),
                series_value: sv,
                distance: r.distance,
                lemma_distance: r.lemma_distance,
                hardening: r.hardening,
                valid: r.valid,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardeningRow {
    pub n_elements: u32,
    pub m: f64,
    pub kappa: f64,
    /// Ratio under the gamma model of the cascade terms.
    pub kappa_iid: f64,
    pub mc_ratio: Option<f64>,
    pub mc_std_error: Option<f64>,
}

/// Channel-hardening factor against `N` for each shape of the series (or
/// the configured shape).
pub fn hardening_table(
    base: &Scenario,
    spec: &SweepSpec,
    sim: Option<&SimConfig>,
) -> CliResult<Vec<HardeningRow>> {
    spec.check()?;
    if spec.variable != SweepVariable::NElements {
        return Err(CliError::config("hardening needs an n_elements sweep"));
    }
    let shapes: Vec<Scenario> = match &spec.series {
        Some(s) if s.variable == SweepVariable::ShapeM => s
            .values
            .iter()
            .map(|&m| spec.point(base, Some(m), spec.grid.values()[0]))
            .collect::<CliResult<_>>()?,
        Some(_) => return Err(CliError::config("hardening series must be shape_m")),
        None => vec![*base],
    };
    let mut rows = Vec::new();
    for sc in &shapes {
        let (g, h) = (sc.fading.bs_irs, sc.fading.irs_ue);
        if g.m() != h.m() {
            return Err(CliError::config(
                "hardening needs equal BS-IRS and IRS-UE shapes",
            ));
        }
        for v in spec.grid.values() {
            let n = spec
                .variable
                .apply(sc, v)
                .map_err(CliError::config)?
                .sys
                .n_elements();
            let kappa = channel_hardening_kappa(n, g.m(), false)
                .map_err(|e| CliError::numerical(format!("n_elements = {n}"), e))?;
            let kappa_iid = channel_hardening_kappa(n, g.m(), true)
                .map_err(|e| CliError::numerical(format!("n_elements = {n}"), e))?;
            let mc = match sim {
                Some(cfg) => {
                    let tallies = (0..cfg.streams)
                        .into_par_iter()
                        .map(|k| hardening_stream(n, &g, &h, cfg, k))
                        .collect::<irscov_core::Result<Vec<_>>>()
                        .and_then(|t| merge_hardening(&t))
                        .map_err(|e| CliError::numerical(format!("n_elements = {n}"), e))?;
                    Some(tallies)
                }
                None => None,
            };
            rows.push(HardeningRow {
                n_elements: n,
                m: g.m(),
                kappa,
                kappa_iid,
                mc_ratio: mc.map(|e| e.ratio),
                mc_std_error: mc.map(|e| e.std_error),
            });
        }
    }
    Ok(rows)
}
