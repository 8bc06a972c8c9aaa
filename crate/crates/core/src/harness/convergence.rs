//! Parameter sweeps over a scenario.

use super::config::{Equation, ScenarioConfig};
use super::kebab;
use super::run::{run_scenario, ReportBundle};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Changes in discrepancy smaller than this are treated as roundoff.
pub const NOISE_FLOOR: f64 = 1e-10;
/// Agreement required of rows shared between `l_max` sweeps.
pub const SHARED_ROW_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Distance from the surface at which exterior modes are seeded.
    SeedRadius,
    /// Relative integrator tolerance; the absolute one follows at 1e-2 of it.
    IntegratorTol,
    /// Largest degree (balls) or order (cylinders).
    LMax,
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "seed-radius" => Ok(SweepParameter::SeedRadius),
            "integrator-tol" => Ok(SweepParameter::IntegratorTol),
            "l-max" => Ok(SweepParameter::LMax),
            _ => Err(format!("unknown parameter {s:?}; expected seed_radius, integrator_tol or l_max")),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::SeedRadius => "seed_radius",
            SweepParameter::IntegratorTol => "integrator_tol",
            SweepParameter::LMax => "l_max",
        })
    }
}

impl SweepParameter {
    /// Checks a sweep list: at least three distinct positive values, integral
    /// for `l_max`.
    pub fn check_values(&self, values: &[f64]) -> std::result::Result<(), String> {
        if values.len() < 3 {
            return Err(format!("a sweep needs at least 3 values, got {}", values.len()));
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(format!("value {v} is not a finite non-negative number"));
            }
            if *self != SweepParameter::LMax && *v == 0.0 {
                return Err(format!("{self} must be positive"));
            }
            if *self == SweepParameter::LMax && (v.fract() != 0.0 || *v > 1000.0) {
                return Err(format!("l_max value {v} is not an integer in 0..=1000"));
            }
            if values[..i].contains(v) {
                return Err(format!("value {v} appears twice"));
            }
        }
        Ok(())
    }

    fn apply(&self, config: &mut ScenarioConfig, v: f64) {
        match self {
            SweepParameter::SeedRadius => config.solver.seed_gap = v,
            SweepParameter::IntegratorTol => {
                config.solver.rtol = v;
                config.solver.atol = 1e-2 * v;
            }
            SweepParameter::LMax => {
                if config.equation == Equation::MaxwellCylinder {
                    config.grid.n_max = Some(v as i64);
                } else {
                    config.grid.l_max = Some(v as usize);
                }
            }
        }
    }

    /// Sweep order: coarse to fine for tolerances, increasing for `l_max`.
    fn ordered(&self, values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        match self {
            SweepParameter::LMax => v.sort_by(f64::total_cmp),
            _ => v.sort_by(|a, b| b.total_cmp(a)),
        }
        v
    }
}

/// Parses a comma-separated sweep list such as `1e-6,1e-7,1e-8`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse(format!("sweep value {part:?} is not a finite number"))),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub value: f64,
    /// Largest discrepancy over cells that solved.
    pub max_discrepancy: f64,
    pub failed_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlaggedCell {
    pub cell: String,
    pub discrepancies: Vec<f64>,
    pub reason: String,
}

/// Discrepancy against the parameter for one table of the scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCurve {
    pub parameter: SweepParameter,
    pub table: String,
    pub points: Vec<CurvePoint>,
    /// The grid maximum is non-increasing up to [`NOISE_FLOOR`]; for
    /// tolerance sweeps each step must also halve it or reach the floor; for
    /// `l_max` sweeps shared rows must agree to [`SHARED_ROW_TOLERANCE`].
    pub monotone: bool,
    /// Largest relative distance between the Aitken-extrapolated limit of
    /// the last three values of a cell and its reference (seed sweeps only,
    /// over cells whose values still move).
    pub extrapolation_error: Option<f64>,
    /// Largest relative change of a row shared by all runs (`l_max` sweeps).
    pub shared_row_deviation: Option<f64>,
    pub flagged_cells: Vec<FlaggedCell>,
}

impl ConvergenceCurve {
    pub fn converged(&self) -> bool {
        self.monotone && self.flagged_cells.is_empty()
    }
}

/// One comparable quantity of a bundle.
struct Cell {
    value: Complex64,
    reference: Complex64,
    discrepancy: f64,
}

fn cells(bundle: &ReportBundle) -> BTreeMap<(String, String), Cell> {
    let mut out = BTreeMap::new();
    for t in &bundle.dtn_tables {
        let table = format!("dtn {}", kebab(&t.variant));
        for r in &t.rows {
            let cell = if r.error.is_none() {
                Cell { value: r.lambda_cloaked.into(), reference: r.lambda_ref.into(), discrepancy: r.rel_discrepancy }
            } else {
                Cell { value: f64::NAN.into(), reference: f64::NAN.into(), discrepancy: f64::NAN }
            };
            out.insert((table.clone(), format!("l={} k={}", r.l, r.k)), cell);
        }
    }
    for t in &bundle.admittance_tables {
        for r in &t.rows {
            let cell = if r.error.is_none() {
                Cell { value: r.cloaked, reference: r.vacuum, discrepancy: r.rel_discrepancy }
            } else {
                Cell { value: f64::NAN.into(), reference: f64::NAN.into(), discrepancy: f64::NAN }
            };
            out.insert(("admittance".into(), format!("l={} k={} {:?}", r.l, r.k, r.polarization)), cell);
        }
    }
    for t in &bundle.scattering_tables {
        let table = format!("scattering {}", t.lining.label());
        for r in &t.rows {
            let cell = match &r.entry {
                Some(e) => Cell { value: e.max_abs().into(), reference: 0.0.into(), discrepancy: e.max_abs() },
                None => Cell { value: f64::NAN.into(), reference: f64::NAN.into(), discrepancy: f64::NAN },
            };
            out.insert((table.clone(), format!("n={} beta={} k={}", r.n, r.beta, r.k)), cell);
        }
    }
    out
}

fn relative(d: Complex64, scale: Complex64) -> f64 {
    if scale.norm() > 0.0 {
        d.norm() / scale.norm()
    } else {
        d.norm()
    }
}

/// Aitken extrapolation of the last three values, `None` when they no longer
/// move or do not contract.
fn aitken(x: &[Complex64]) -> Option<Complex64> {
    let [x0, x1, x2] = x[x.len().checked_sub(3)?..] else {
        return None;
    };
    let (d1, d2) = (x1 - x0, x2 - x1);
    if d2.norm() <= 1e-13 * x2.norm() || d2.norm() >= d1.norm() {
        return None;
    }
    Some(x2 - d2 * d2 / (d2 - d1))
}

fn steps_ok(parameter: SweepParameter, d: &[f64]) -> std::result::Result<(), String> {
    for (i, w) in d.windows(2).enumerate() {
        if w[1] > w[0] + NOISE_FLOOR {
            return Err(format!("discrepancy grows at step {}", i + 1));
        }
        if parameter == SweepParameter::IntegratorTol && w[1] > (0.5 * w[0]).max(NOISE_FLOOR) {
            return Err(format!("discrepancy does not halve at step {}", i + 1));
        }
    }
    Ok(())
}

/// A single cell may dip below its trend at a coarse setting through
/// cancellation, so a cell is non-convergent only when its last refinement
/// breaks the step rule or it ends above where it started.
fn cell_converges(parameter: SweepParameter, d: &[f64]) -> std::result::Result<(), String> {
    let (Some(&first), Some(&last)) = (d.first(), d.last()) else {
        return Ok(());
    };
    if last > first + NOISE_FLOOR {
        return Err("finest discrepancy exceeds the coarsest".into());
    }
    steps_ok(parameter, &d[d.len().saturating_sub(2)..]).map_err(|_| "last refinement does not converge".into())
}

/// Reruns the scenario's tables for each value of the parameter and reports
/// one curve per table. Diagnostics, sources and checks are not rerun.
pub fn convergence_study(
    config: &ScenarioConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<ConvergenceCurve>> {
    parameter.check_values(values).map_err(|e| Error::Config(vec![format!("values: {e}")]))?;
    let values = parameter.ordered(values);
    let mut runs = Vec::with_capacity(values.len());
    for &v in &values {
        let mut c = config.clone();
        c.checks.clear();
        c.diagnostics.clear();
        c.sources.clear();
        c.random_dipoles = None;
        parameter.apply(&mut c, v);
        c.validate().map_err(|e| match e {
            Error::Config(errs) => Error::Config(errs.into_iter().map(|m| format!("{parameter} = {v}: {m}")).collect()),
            other => other,
        })?;
        runs.push(cells(&run_scenario(&c)?));
    }

    let tables: Vec<String> = {
        let mut t: Vec<String> = runs.iter().flat_map(|r| r.keys().map(|k| k.0.clone())).collect();
        t.dedup();
        t.sort();
        t.dedup();
        t
    };
    let mut curves = Vec::new();
    for table in tables {
        let points: Vec<CurvePoint> = values
            .iter()
            .zip(&runs)
            .map(|(&value, run)| {
                let own: Vec<&Cell> = run.iter().filter(|(k, _)| k.0 == table).map(|(_, c)| c).collect();
                CurvePoint {
                    value,
                    max_discrepancy: own.iter().map(|c| c.discrepancy).filter(|d| d.is_finite()).fold(0.0, f64::max),
                    failed_cells: own.iter().filter(|c| !c.discrepancy.is_finite()).count(),
                }
            })
            .collect();

        let labels: Vec<String> = runs
            .iter()
            .flat_map(|r| r.keys().filter(|k| k.0 == table).map(|k| k.1.clone()))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut flagged = Vec::new();
        let mut extrapolation: Option<f64> = None;
        let mut shared: Option<f64> = None;
        for label in labels {
            let key = (table.clone(), label.clone());
            let present: Vec<&Cell> = runs.iter().filter_map(|r| r.get(&key)).collect();
            let d: Vec<f64> = present.iter().map(|c| c.discrepancy).collect();
            if d.iter().any(|x| !x.is_finite()) {
                flagged.push(FlaggedCell { cell: label, discrepancies: d, reason: "failed to solve".into() });
                continue;
            }
            match parameter {
                SweepParameter::LMax => {
                    if present.len() < 2 {
                        continue;
                    }
                    let v0 = present[0].value;
                    let dev = present.iter().map(|c| relative(c.value - v0, v0)).fold(0.0, f64::max);
                    if present.len() == runs.len() {
                        shared = Some(shared.unwrap_or(0.0).max(dev));
                    }
                    if dev > SHARED_ROW_TOLERANCE {
                        flagged.push(FlaggedCell {
                            cell: label,
                            discrepancies: d,
                            reason: format!("shared row changes by {dev:.3e}"),
                        });
                    }
                }
                _ => {
                    if let Err(reason) = cell_converges(parameter, &d) {
                        flagged.push(FlaggedCell { cell: label.clone(), discrepancies: d.clone(), reason });
                    }
                    if parameter == SweepParameter::SeedRadius {
                        let xs: Vec<Complex64> = present.iter().map(|c| c.value).collect();
                        if let Some(limit) = aitken(&xs) {
                            let e = relative(limit - present[0].reference, present[0].reference);
                            extrapolation = Some(extrapolation.unwrap_or(0.0).max(e));
                        }
                    }
                }
            }
        }
        let maxima: Vec<f64> = points.iter().map(|p| p.max_discrepancy).collect();
        let monotone = match parameter {
            SweepParameter::LMax => shared.is_some_and(|s| s <= SHARED_ROW_TOLERANCE),
            _ => steps_ok(parameter, &maxima).is_ok(),
        };
        curves.push(ConvergenceCurve {
            parameter,
            table,
            points,
            monotone,
            extrapolation_error: extrapolation,
            shared_row_deviation: shared,
            flagged_cells: flagged,
        });
    }
    Ok(curves)
}
