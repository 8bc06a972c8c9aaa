//! Scenario files, runs, convergence sweeps and exports.
//!
//! A [`ScenarioConfig`] names a coating, an equation, a mode grid and the
//! acceptance checks to apply. [`run_scenario`] solves every cell, recording
//! failures per cell, and [`export`] writes the resulting [`ReportBundle`] as
//! flat tables. Bundled scenarios cover each acceptance criterion.

mod config;
mod convergence;
mod export;
mod run;
mod scenarios;

pub use config::{
    Check, ConvergenceSettings, Diagnostic, Equation, Expectation, Format, ModeGrid, OutputSettings, RandomDipoles,
    ScenarioConfig, SolverSettings, SourceEntry, VariantFlag,
};
pub use convergence::{
    convergence_study, parse_values, ConvergenceCurve, CurvePoint, FlaggedCell, SweepParameter, NOISE_FLOOR,
    SHARED_ROW_TOLERANCE,
};
pub use export::{export, summary};
pub use run::{
    evaluate, random_dipoles, run_scenario, CheckOutcome, DecayRecord, EnergyRecord, ObstructionRow, Provenance,
    ReportBundle, SourceRow, VerdictRecord,
};
pub use scenarios::{bundled_scenario, bundled_scenarios, BundledScenario};

/// The kebab-case serialized name of a unit enum variant.
pub(crate) fn kebab<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}
