//! Declarative scenario files.
//!
//! A scenario is a TOML document whose sections mirror [`ScenarioConfig`].
//! Unknown keys are rejected, and [`ScenarioConfig::validate`] reports every
//! offending field at once with its path.

use super::convergence::SweepParameter;
use crate::error::{Error, Result};
use crate::geometry::CoatingSpec;
use crate::helmholtz::{RadialSource, SolveOptions};
use crate::maxwell::{CurrentSource, VERDICT_TOLERANCE};
use crate::ode::Tolerances;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equation {
    Helmholtz,
    MaxwellBall,
    MaxwellCylinder,
}

/// How the cloaking surface is realized. The first three apply to Helmholtz
/// scenarios, the last three to cylinders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantFlag {
    VirtualSurface,
    PhysicalLining,
    UnitDirichlet,
    Shs,
    Pec,
    Pullback,
}

impl VariantFlag {
    fn equation(self) -> Equation {
        match self {
            VariantFlag::VirtualSurface | VariantFlag::PhysicalLining | VariantFlag::UnitDirichlet => {
                Equation::Helmholtz
            }
            VariantFlag::Shs | VariantFlag::Pec | VariantFlag::Pullback => Equation::MaxwellCylinder,
        }
    }
}

/// Modes to solve: degrees `0..=l_max` for balls, or orders `0..=n_max` with
/// axial wavenumbers `beta = f k` for cylinders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_fractions: Option<Vec<f64>>,
    /// Wavenumbers.
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Exists,
    NoFiniteEnergy,
}

/// A named source: an internal current for Maxwell balls, or a radial
/// profile for Helmholtz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<CurrentSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<RadialSource>,
}

/// Point dipoles with locations uniform in the ball of radius `max_radius`
/// and unit moments uniform on the sphere, drawn from a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDipoles {
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

fn default_max_radius() -> f64 {
    0.6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default = "default_seed_gap")]
    pub seed_gap: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Output spacing in `ln(r - a)`.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_verdict_tol")]
    pub verdict_tol: f64,
}

fn default_seed_gap() -> f64 {
    SolveOptions::default().seed_gap
}

fn default_rtol() -> f64 {
    Tolerances::default().rtol
}

fn default_atol() -> f64 {
    Tolerances::default().atol
}

fn default_step() -> f64 {
    SolveOptions::default().step
}

fn default_verdict_tol() -> f64 {
    VERDICT_TOLERANCE
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            seed_gap: default_seed_gap(),
            rtol: default_rtol(),
            atol: default_atol(),
            step: default_step(),
            verdict_tol: default_verdict_tol(),
        }
    }
}

impl SolverSettings {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            seed_gap: self.seed_gap,
            tolerances: self.tolerances(),
            step: self.step,
            ..SolveOptions::default()
        }
    }
}

/// Extra reports computed alongside the mode tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostic {
    /// Fitted metric degeneracy exponents on each side of the surface.
    Degeneracy,
    /// Helmholtz shell energies of the finite-energy modes.
    Energy,
    /// Interior overdetermined-problem residuals of the single ball.
    Obstruction,
    /// Tangential field decay of the `l = 1` TM Maxwell mode.
    AngularDecay,
    /// Angular field decay and axial limits of the `n = 1` cylinder mode.
    AngularTrace,
    /// Frame structure of the cylinder map Jacobian.
    Jacobian,
}

/// Acceptance checks evaluated on the finished bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Check {
    MaxDtnDiscrepancy {
        below: f64,
    },
    /// Largest entrywise difference between the first DtN table and each
    /// other one.
    VariantAgreement {
        below: f64,
    },
    MaxSurfaceFlux {
        below: f64,
    },
    /// Grid residuals above the threshold, eigenvalue residual below it.
    Obstruction {
        threshold: f64,
    },
    DegeneracyExponents {
        expected: f64,
        within: f64,
    },
    RadialEigenvalue {
        expected: f64,
        within: f64,
    },
    VerdictsAsExpected,
    MaxAdmittanceDiscrepancy {
        below: f64,
    },
    MaxReflection {
        lining: VariantFlag,
        below: f64,
    },
    PeakReflection {
        lining: VariantFlag,
        above: f64,
    },
    MaxUnitarityDefect {
        below: f64,
    },
    DecaySlope {
        expected: f64,
        within: f64,
    },
    JacobianCross {
        below: f64,
    },
    EnergyFinite,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::MaxDtnDiscrepancy { .. } => "max-dtn-discrepancy",
            Check::VariantAgreement { .. } => "variant-agreement",
            Check::MaxSurfaceFlux { .. } => "max-surface-flux",
            Check::Obstruction { .. } => "obstruction",
            Check::DegeneracyExponents { .. } => "degeneracy-exponents",
            Check::RadialEigenvalue { .. } => "radial-eigenvalue",
            Check::VerdictsAsExpected => "verdicts-as-expected",
            Check::MaxAdmittanceDiscrepancy { .. } => "max-admittance-discrepancy",
            Check::MaxReflection { .. } => "max-reflection",
            Check::PeakReflection { .. } => "peak-reflection",
            Check::MaxUnitarityDefect { .. } => "max-unitarity-defect",
            Check::DecaySlope { .. } => "decay-slope",
            Check::JacobianCross { .. } => "jacobian-cross",
            Check::EnergyFinite => "energy-finite",
        }
    }

    /// Diagnostic the check reads, if any.
    pub fn needs(&self) -> Option<Diagnostic> {
        match self {
            Check::Obstruction { .. } => Some(Diagnostic::Obstruction),
            Check::DegeneracyExponents { .. } | Check::RadialEigenvalue { .. } => Some(Diagnostic::Degeneracy),
            Check::EnergyFinite => Some(Diagnostic::Energy),
            Check::JacobianCross { .. } => Some(Diagnostic::Jacobian),
            _ => None,
        }
    }

    fn thresholds(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Check::MaxDtnDiscrepancy { below }
            | Check::VariantAgreement { below }
            | Check::MaxSurfaceFlux { below }
            | Check::MaxAdmittanceDiscrepancy { below }
            | Check::MaxReflection { below, .. }
            | Check::MaxUnitarityDefect { below }
            | Check::JacobianCross { below } => vec![("below", below)],
            Check::Obstruction { threshold } => vec![("threshold", threshold)],
            Check::PeakReflection { above, .. } => vec![("above", above)],
            Check::DegeneracyExponents { within, .. }
            | Check::RadialEigenvalue { within, .. }
            | Check::DecaySlope { within, .. } => vec![("within", within)],
            Check::VerdictsAsExpected | Check::EnergyFinite => Vec::new(),
        }
    }
}

/// Default sweep for `converge` when the command line gives none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSettings {
    pub param: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { dir: None, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub equation: Equation,
    pub spec: CoatingSpec,
    pub grid: ModeGrid,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<VariantFlag>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_dipoles: Option<RandomDipoles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSettings>,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl ScenarioConfig {
    /// Parses and validates a scenario.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Export(format!("cannot serialize scenario: {e}")))
    }

    /// Variants to run, with the per-equation default when none are listed.
    pub fn effective_variants(&self) -> Vec<VariantFlag> {
        if !self.variants.is_empty() {
            return self.variants.clone();
        }
        match self.equation {
            Equation::Helmholtz => vec![VariantFlag::VirtualSurface],
            Equation::MaxwellCylinder => vec![VariantFlag::Shs],
            Equation::MaxwellBall => Vec::new(),
        }
    }

    /// Whether a diagnostic is requested directly or by a check.
    pub fn wants(&self, d: Diagnostic) -> bool {
        self.diagnostics.contains(&d) || self.checks.iter().any(|c| c.needs() == Some(d))
    }

    /// Checks every field, returning all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs: Vec<String> = Vec::new();
        let mut err = |path: &str, msg: String| errs.push(format!("{path}: {msg}"));

        if self.name.trim().is_empty() {
            err("name", "must not be empty".into());
        }
        let spec_ok = match self.spec.validate() {
            Ok(()) => true,
            Err(e) => {
                err("spec", e.to_string());
                false
            }
        };
        let a = self.spec.cloak_radius;
        match self.equation {
            Equation::Helmholtz | Equation::MaxwellBall if self.spec.is_cylinder() => {
                err("spec.kind", format!("{:?} is a cylinder but the equation needs a ball", self.spec.kind))
            }
            Equation::MaxwellCylinder if !self.spec.is_cylinder() => {
                err("spec.kind", format!("{:?} is a ball but the equation needs a cylinder", self.spec.kind))
            }
            _ => {}
        }

        let g = &self.grid;
        if g.k.is_empty() {
            err("grid.k", "must list at least one wavenumber".into());
        }
        for (i, k) in g.k.iter().enumerate() {
            if !positive(*k) {
                err(&format!("grid.k[{i}]"), format!("{k} is not a positive wavenumber"));
            }
        }
        match self.equation {
            Equation::Helmholtz | Equation::MaxwellBall => {
                if g.n_max.is_some() || g.beta_fractions.is_some() {
                    err("grid", "n_max and beta_fractions apply to cylinders only".into());
                }
                match g.l_max {
                    None => err("grid.l_max", "required for ball scenarios".into()),
                    Some(0) if self.equation == Equation::MaxwellBall => {
                        err("grid.l_max", "Maxwell multipoles start at l = 1".into())
                    }
                    _ => {}
                }
            }
            Equation::MaxwellCylinder => {
                if g.l_max.is_some() {
                    err("grid.l_max", "applies to ball scenarios only".into());
                }
                match g.n_max {
                    None => err("grid.n_max", "required for cylinder scenarios".into()),
                    Some(n) if n < 0 => err("grid.n_max", format!("{n} is negative")),
                    _ => {}
                }
                match &g.beta_fractions {
                    None => err("grid.beta_fractions", "required for cylinder scenarios".into()),
                    Some(b) if b.is_empty() => err("grid.beta_fractions", "must not be empty".into()),
                    Some(b) => {
                        for (i, f) in b.iter().enumerate() {
                            if !(f.is_finite() && *f >= 0.0) {
                                err(&format!("grid.beta_fractions[{i}]"), format!("{f} is not a finite fraction >= 0"));
                            }
                        }
                    }
                }
            }
        }

        for (i, v) in self.variants.iter().enumerate() {
            if v.equation() != self.equation {
                err(&format!("variants[{i}]"), format!("{v:?} does not apply to {:?}", self.equation));
            }
            if self.variants[..i].contains(v) {
                err(&format!("variants[{i}]"), format!("{v:?} listed twice"));
            }
        }

        let s = &self.solver;
        let span = self.spec.outer_radius - a;
        if !(positive(s.seed_gap) && s.seed_gap < 0.1 * span.max(0.0)) {
            err("solver.seed_gap", format!("{} is not in (0, {})", s.seed_gap, 0.1 * span));
        }
        for (path, v) in [
            ("solver.rtol", s.rtol),
            ("solver.atol", s.atol),
            ("solver.step", s.step),
            ("solver.verdict_tol", s.verdict_tol),
        ] {
            if !positive(v) {
                err(path, format!("{v} is not positive"));
            }
        }

        for (i, d) in self.diagnostics.iter().enumerate() {
            let ok = match d {
                Diagnostic::Degeneracy => true,
                Diagnostic::Energy => self.equation == Equation::Helmholtz,
                Diagnostic::Obstruction => self.equation == Equation::Helmholtz && !self.spec.is_double(),
                Diagnostic::AngularDecay => self.equation == Equation::MaxwellBall,
                Diagnostic::AngularTrace | Diagnostic::Jacobian => self.equation == Equation::MaxwellCylinder,
            };
            if !ok {
                err(&format!("diagnostics[{i}]"), format!("{d:?} does not apply to this equation and coating"));
            }
        }

        let mut names: Vec<&str> = Vec::new();
        for (i, src) in self.sources.iter().enumerate() {
            let path = format!("sources[{i}]");
            if src.name.trim().is_empty() {
                err(&format!("{path}.name"), "must not be empty".into());
            } else if names.contains(&src.name.as_str()) {
                err(&format!("{path}.name"), format!("{:?} is used twice", src.name));
            }
            names.push(&src.name);
            match (self.equation, &src.current, &src.profile) {
                (Equation::MaxwellBall, Some(c), None) => {
                    if self.spec.is_double() {
                        err(&path, "internal currents are judged on the single coating".into());
                    } else if spec_ok {
                        if let Err(e) = c.validate(a) {
                            err(&format!("{path}.current"), e.to_string());
                        }
                    }
                }
                (Equation::Helmholtz, None, Some(p)) => {
                    let (lo, hi) = match *p {
                        RadialSource::Shell { radius, .. } => (radius, radius),
                        RadialSource::Bump { center, width, .. } => (center - width, center + width),
                    };
                    if !(lo > 0.0 && hi < a * (1.0 - 1e-6)) {
                        err(&format!("{path}.profile"), format!("support [{lo}, {hi}] must lie inside (0, {a})"));
                    }
                }
                (Equation::MaxwellBall, _, _) => err(&path, "needs exactly one `current`".into()),
                (Equation::Helmholtz, _, _) => err(&path, "needs exactly one `profile`".into()),
                (Equation::MaxwellCylinder, _, _) => err(&path, "cylinder scenarios take no sources".into()),
            }
            if src.expect.is_some() && self.equation != Equation::MaxwellBall {
                err(&format!("{path}.expect"), "expectations apply to Maxwell verdicts only".into());
            }
        }

        if let Some(r) = &self.random_dipoles {
            if self.equation != Equation::MaxwellBall || self.spec.is_double() {
                err("random_dipoles", "needs a single-coating Maxwell ball".into());
            }
            if r.count == 0 {
                err("random_dipoles.count", "must be at least 1".into());
            }
            if !(positive(r.max_radius) && r.max_radius < a) {
                err("random_dipoles.max_radius", format!("{} is not in (0, {a})", r.max_radius));
            }
        }

        let variants = self.effective_variants();
        for (i, c) in self.checks.iter().enumerate() {
            let path = format!("checks[{i}]");
            for (field, v) in c.thresholds() {
                if !positive(v) {
                    err(&format!("{path}.{field}"), format!("{v} is not positive"));
                }
            }
            let applies = match c {
                Check::MaxDtnDiscrepancy { .. } | Check::MaxSurfaceFlux { .. } => self.equation == Equation::Helmholtz,
                Check::VariantAgreement { .. } => self.equation == Equation::Helmholtz && variants.len() >= 2,
                Check::VerdictsAsExpected => self.equation == Equation::MaxwellBall,
                Check::MaxAdmittanceDiscrepancy { .. } => self.equation == Equation::MaxwellBall,
                Check::MaxReflection { lining, .. } | Check::PeakReflection { lining, .. } => {
                    self.equation == Equation::MaxwellCylinder && variants.contains(lining)
                }
                Check::MaxUnitarityDefect { .. } => self.equation == Equation::MaxwellCylinder,
                Check::DecaySlope { .. } => {
                    self.equation == Equation::MaxwellBall && self.wants(Diagnostic::AngularDecay)
                        || self.equation == Equation::MaxwellCylinder && self.wants(Diagnostic::AngularTrace)
                }
                Check::Obstruction { .. } => self.equation == Equation::Helmholtz && !self.spec.is_double(),
                Check::EnergyFinite => self.equation == Equation::Helmholtz,
                Check::JacobianCross { .. } => self.equation == Equation::MaxwellCylinder,
                Check::DegeneracyExponents { .. } | Check::RadialEigenvalue { .. } => true,
            };
            if !applies {
                err(&path, format!("{} does not apply to this scenario", c.name()));
            }
        }

        if let Some(c) = &self.convergence {
            if c.values.len() < 3 {
                err("convergence.values", format!("needs at least 3 values, got {}", c.values.len()));
            }
            if let Err(e) = c.param.check_values(&c.values) {
                err("convergence.values", e);
            }
        }

        if self.output.formats.is_empty() {
            err("output.formats", "must list at least one format".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "minimal"
equation = "helmholtz"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 2, k = [1.0] }
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.solver, SolverSettings::default());
        assert_eq!(c.effective_variants(), vec![VariantFlag::VirtualSurface]);
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nfrobnicate = 1\n");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Parse(_))));
        let text = MINIMAL.replace("l_max = 2", "l_max = 2, lmax = 3");
        assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn validation_lists_every_offending_field() {
        let text = r#"
name = ""
equation = "maxwell-cylinder"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 2, k = [1.0, -2.0] }
variants = ["virtual-surface"]
solver = { rtol = 0.0 }
"#;
        let Err(Error::Config(errs)) = ScenarioConfig::from_toml_str(text) else {
            panic!("expected a validation error");
        };
        for field in ["name", "spec.kind", "grid.k[1]", "grid.l_max", "grid.n_max", "variants[0]", "solver.rtol"] {
            assert!(errs.iter().any(|e| e.starts_with(&format!("{field}:"))), "{field} missing from {errs:?}");
        }
    }

    #[test]
    fn sources_must_sit_inside_the_cloak() {
        let text = r#"
name = "bad-source"
equation = "maxwell-ball"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 2, k = [1.0] }

[[sources]]
name = "outside"
current = { kind = "point-dipole", location = [0.0, 0.0, 1.5], moment = [0.0, 0.0, 1.0] }
"#;
        let Err(Error::Config(errs)) = ScenarioConfig::from_toml_str(text) else {
            panic!("expected a validation error");
        };
        assert!(errs[0].starts_with("sources[0].current:"), "{errs:?}");
    }

    #[test]
    fn checks_must_match_the_equation() {
        let text = format!("{MINIMAL}\n[[checks]]\nkind = \"max-reflection\"\nlining = \"shs\"\nbelow = 1e-8\n");
        let Err(Error::Config(errs)) = ScenarioConfig::from_toml_str(&text) else {
            panic!("expected a validation error");
        };
        assert!(errs[0].starts_with("checks[0]:"), "{errs:?}");
    }

    #[test]
    fn checks_imply_their_diagnostics() {
        let text = format!("{MINIMAL}\n[[checks]]\nkind = \"obstruction\"\nthreshold = 1e-8\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(c.wants(Diagnostic::Obstruction));
        assert!(!c.wants(Diagnostic::Energy));
    }

    #[test]
    fn serialization_round_trips() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
