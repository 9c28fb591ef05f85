//! Distances at which operating modes should be switched.

use irscov_core::coverage::{Mode, Regime};
use serde::{Deserialize, Serialize};

use crate::sweep::{OutputRow, SweepVariable};

/// Default margin below which the gain of adding the IRS is negligible.
pub const DEFAULT_BENEFIT_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    /// The two coverage curves intersect.
    Crossing,
    /// The gain of `first` over `second` falls to the benefit tolerance.
    BenefitEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub series: Option<SweepVariable>,
    pub series_value: Option<f64>,
    pub regime: String,
    pub kind: CrossoverKind,
    /// Mode with the higher coverage before the crossing.
    pub first: String,
    pub second: String,
    pub distance: f64,
}

/// Abscissas where `diff` changes sign, by linear interpolation between
/// the bracketing points. Values within `noise` of zero carry no sign.
/// Each entry also tells whether `diff` was positive before the change.
fn sign_changes(xs: &[f64], diff: &[f64], noise: &[f64]) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..xs.len() {
        if diff[i].abs() <= noise[i] {
            continue;
        }
        if let Some(j) = last {
            if (diff[j] > 0.0) != (diff[i] > 0.0) {
                let x = xs[j] + (xs[i] - xs[j]) * diff[j] / (diff[j] - diff[i]);
                out.push((x, diff[j] > 0.0));
            }
        }
        last = Some(i);
    }
    out
}

fn curve(rows: &[OutputRow], key: (Option<f64>, Regime), mode: Mode) -> Vec<&OutputRow> {
    let mut c: Vec<_> = rows
        .iter()
        .filter(|r| r.mode == mode && r.regime == key.1 && same(r.series_value, key.0))
        .collect();
    c.sort_by(|a, b| a.value.total_cmp(&b.value));
    c
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
        (None, None) => true,
        _ => false,
    }
}

/// Intersections of every pair of mode curves of a distance sweep, plus
/// the distance at which the combined link stops beating the direct link
/// by more than `benefit_tol`. Rows of other sweep variables are ignored.
pub fn report_crossovers(rows: &[OutputRow], benefit_tol: f64) -> Vec<Crossover> {
    let rows: Vec<OutputRow> = rows
        .iter()
        .filter(|r| r.variable == SweepVariable::DistanceD)
        .cloned()
        .collect();
    let mut groups: Vec<(Option<f64>, Regime)> = Vec::new();
    for r in &rows {
        if !groups
            .iter()
            .any(|g| same(g.0, r.series_value) && g.1 == r.regime)
        {
            groups.push((r.series_value, r.regime));
        }
    }
    let series = rows.first().and_then(|r| r.series);
    let modes = [Mode::DirectOnly, Mode::IrsOnly, Mode::Combined];
    let mut out = Vec::new();
    for key in groups {
        let push = |out: &mut Vec<Crossover>, kind, hi: Mode, lo: Mode, distance| {
            out.push(Crossover {
                series,
                series_value: key.0,
                regime: key.1.name().to_owned(),
                kind,
                first: hi.name().to_owned(),
                second: lo.name().to_owned(),
                distance,
            })
        };
        for (i, &a) in modes.iter().enumerate() {
            for &b in &modes[i + 1..] {
                let (ca, cb) = (curve(&rows, key, a), curve(&rows, key, b));
                if ca.len() < 2 || ca.len() != cb.len() {
                    continue;
                }
                let xs: Vec<f64> = ca.iter().map(|r| r.value).collect();
                let diff: Vec<f64> = ca
                    .iter()
                    .zip(&cb)
                    .map(|(x, y)| x.analytic - y.analytic)
                    .collect();
                let noise: Vec<f64> = ca
                    .iter()
                    .zip(&cb)
                    .map(|(x, y)| 2.0 * (x.analytic_abs_error + y.analytic_abs_error))
                    .collect();
                for (d, a_first) in sign_changes(&xs, &diff, &noise) {
                    let (hi, lo) = if a_first { (a, b) } else { (b, a) };
                    push(&mut out, CrossoverKind::Crossing, hi, lo, d);
                }
            }
        }
        let (cc, cd) = (
            curve(&rows, key, Mode::Combined),
            curve(&rows, key, Mode::DirectOnly),
        );
        if cc.len() >= 2 && cc.len() == cd.len() {
            let xs: Vec<f64> = cc.iter().map(|r| r.value).collect();
            let gain: Vec<f64> = cc
                .iter()
                .zip(&cd)
                .map(|(c, d)| c.analytic - d.analytic - benefit_tol)
                .collect();
            let noise = vec![0.0; xs.len()];
            if let Some(&(d, _)) = sign_changes(&xs, &gain, &noise)
                .iter()
                .rev()
                .find(|(_, down)| *down)
            {
                push(
                    &mut out,
                    CrossoverKind::BenefitEnd,
                    Mode::Combined,
                    Mode::DirectOnly,
                    d,
                );
            }
        }
    }
    out
}
