//! Scenario execution and acceptance checks.

use super::config::{
    Check, Diagnostic, Equation, Expectation, RandomDipoles, ScenarioConfig, SourceEntry, VariantFlag,
};
use super::convergence::ConvergenceCurve;
use crate::cylinder::{
    cyl_angular_trace_limit, jacobian_structure, scattering_table, solve_cyl_mode, JacobianStructure, Lining,
    ScatteringTable,
};
use crate::error::{Error, Result};
use crate::geometry::CoatingSpec;
use crate::helmholtz::{
    cauchy_match_report, energy_near_sigma, interior_neumann_solve, interior_sphere_solve, neumann_eigenvalue,
    overdetermined_residual, solve_exterior_mode_with, DtnTable, EnergyVerdict, ObstructionVerdict, RadialSource, Seed,
    SolveOptions, Variant,
};
use crate::maxwell::{
    admittance_table, angular_decay, single_coating_verdict, AdmittanceTable, CurrentSource, ModeLabel, Polarization,
};
use crate::media::{degeneracy_diagnostics, DegeneracyReport};
use crate::ode::Tolerances;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Shell radii of the energy diagnostic.
const ENERGY_SHELLS: [f64; 7] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
/// Distances at which boundary-layer decay is sampled.
const DECAY_GAPS: [f64; 5] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

/// Interior response of a Helmholtz source in one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceRow {
    pub source: String,
    pub l: usize,
    pub k: f64,
    /// Flux at the sample closest to the surface, relative to the largest flux.
    pub surface_flux: Option<f64>,
    pub resonance: bool,
    /// Solvability residual of the Neumann problem at a resonance.
    pub compatibility: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub source: String,
    pub k: f64,
    pub expected: Option<Expectation>,
    pub exists_finite_energy: Option<bool>,
    pub offending_modes: Vec<ModeLabel>,
    pub norms: f64,
    pub multipole_norm: f64,
    pub trace_norm: f64,
    pub source_norm: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl VerdictRecord {
    /// `None` when no expectation was declared.
    pub fn matches_expectation(&self) -> Option<bool> {
        let expected = self.expected?;
        Some(match self.exists_finite_energy {
            Some(exists) => exists == (expected == Expectation::Exists),
            None => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub l: usize,
    pub k: f64,
    pub verdict: Option<EnergyVerdict>,
    /// `(shell radius, energy outside it)`, outermost first.
    pub outer_energies: Vec<(f64, f64)>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionRow {
    pub k: f64,
    /// Whether `k` is the first interior Neumann eigenvalue of `l = 0`.
    pub eigenvalue: bool,
    pub residual: f64,
    pub verdict: Option<ObstructionVerdict>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRecord {
    pub mode: String,
    pub k: f64,
    pub gaps: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub slope: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

/// Settings under which a bundle was produced. Only `created_unix` and
/// `elapsed_seconds` vary between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub scenario: String,
    /// SHA-256 of the canonical serialization of the scenario.
    pub config_hash: String,
    pub seed_gap: f64,
    pub tolerances: Tolerances,
    pub step: f64,
    pub verdict_tol: f64,
    pub random_seed: Option<u64>,
    pub created_unix: u64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub name: String,
    pub equation: Option<Equation>,
    pub dtn_tables: Vec<DtnTable>,
    pub admittance_tables: Vec<AdmittanceTable>,
    pub scattering_tables: Vec<ScatteringTable>,
    pub source_rows: Vec<SourceRow>,
    pub verdicts: Vec<VerdictRecord>,
    pub energy_reports: Vec<EnergyRecord>,
    pub degeneracy_reports: Vec<DegeneracyReport>,
    pub obstruction: Vec<ObstructionRow>,
    pub decay_fits: Vec<DecayRecord>,
    pub jacobian: Option<JacobianStructure>,
    pub convergence_curves: Vec<ConvergenceCurve>,
    /// Diagnostics that could not be computed at all.
    pub diagnostic_errors: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub provenance: Option<Provenance>,
}

impl ReportBundle {
    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            equation: None,
            dtn_tables: Vec::new(),
            admittance_tables: Vec::new(),
            scattering_tables: Vec::new(),
            source_rows: Vec::new(),
            verdicts: Vec::new(),
            energy_reports: Vec::new(),
            degeneracy_reports: Vec::new(),
            obstruction: Vec::new(),
            decay_fits: Vec::new(),
            jacobian: None,
            convergence_curves: Vec::new(),
            diagnostic_errors: Vec::new(),
            checks: Vec::new(),
            provenance: None,
        }
    }

    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Cells and records that failed to solve.
    pub fn failed_cells(&self) -> usize {
        let dtn: usize = self.dtn_tables.iter().map(|t| t.rows.iter().filter(|r| r.error.is_some()).count()).sum();
        let adm: usize =
            self.admittance_tables.iter().map(|t| t.rows.iter().filter(|r| r.error.is_some()).count()).sum();
        let scat: usize = self.scattering_tables.iter().map(|t| t.failures()).sum();
        dtn + adm
            + scat
            + self.source_rows.iter().filter(|r| r.error.is_some()).count()
            + self.verdicts.iter().filter(|r| r.error.is_some()).count()
            + self.energy_reports.iter().filter(|r| r.error.is_some()).count()
            + self.obstruction.iter().filter(|r| r.error.is_some()).count()
            + self.decay_fits.iter().filter(|r| r.error.is_some()).count()
            + self.diagnostic_errors.len()
    }

    /// Number of tables the bundle would export.
    pub fn table_count(&self) -> usize {
        self.dtn_tables.len()
            + self.admittance_tables.len()
            + self.scattering_tables.len()
            + [
                !self.source_rows.is_empty(),
                !self.verdicts.is_empty(),
                !self.energy_reports.is_empty(),
                !self.degeneracy_reports.is_empty(),
                !self.obstruction.is_empty(),
                !self.decay_fits.is_empty(),
                self.jacobian.is_some(),
                !self.convergence_curves.is_empty(),
            ]
            .iter()
            .filter(|b| **b)
            .count()
    }
}

fn helmholtz_variant(v: VariantFlag) -> Option<Variant> {
    match v {
        VariantFlag::VirtualSurface => Some(Variant::VirtualSurface),
        VariantFlag::PhysicalLining => Some(Variant::PhysicalNeumannLining),
        VariantFlag::UnitDirichlet => Some(Variant::UnitDirichlet),
        _ => None,
    }
}

pub(crate) fn cylinder_lining(v: VariantFlag) -> Option<Lining> {
    match v {
        VariantFlag::Shs => Some(Lining::Shs),
        VariantFlag::Pec => Some(Lining::Pec),
        VariantFlag::Pullback => Some(Lining::Pullback),
        _ => None,
    }
}

/// Seeded random interior dipoles.
pub fn random_dipoles(spec: &RandomDipoles) -> Vec<SourceEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut unit_ball = move || loop {
        let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if n <= 1.0 && n > 1e-3 {
            return (p, n);
        }
    };
    (0..spec.count)
        .map(|i| {
            let (p, _) = unit_ball();
            let location = p.map(|x| x * spec.max_radius);
            let (m, n) = unit_ball();
            let moment = m.map(|x| x / n);
            SourceEntry {
                name: format!("random-dipole-{i:03}"),
                expect: spec.expect,
                current: Some(CurrentSource::PointDipole { location, moment }),
                profile: None,
            }
        })
        .collect()
}

fn config_hash(config: &ScenarioConfig) -> Result<String> {
    let text = config.to_toml_string()?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn helmholtz_sources(spec: &CoatingSpec, sources: &[SourceEntry], l_max: usize, ks: &[f64]) -> Vec<SourceRow> {
    let cells: Vec<(&SourceEntry, RadialSource, usize, f64)> = sources
        .iter()
        .filter_map(|s| s.profile.map(|p| (s, p)))
        .flat_map(|(s, p)| (0..=l_max).flat_map(move |l| ks.iter().map(move |&k| (s, p, l, k))))
        .collect();
    cells
        .par_iter()
        .map(|&(s, p, l, k)| {
            let solved = if spec.is_double() {
                interior_sphere_solve(spec, l, k, p)
            } else {
                interior_neumann_solve(spec, l, k, p)
            };
            let mut row = SourceRow {
                source: s.name.clone(),
                l,
                k,
                surface_flux: None,
                resonance: false,
                compatibility: None,
                error: None,
            };
            match solved {
                Ok(sol) => {
                    row.resonance = sol.resonance;
                    row.compatibility = sol.compatibility;
                    row.surface_flux = sol.mode.as_ref().map(|m| {
                        let max = m.max_abs_flux();
                        let closest = m.samples.iter().min_by(|a, b| a.gap.total_cmp(&b.gap));
                        match closest {
                            Some(c) if max > 0.0 => c.flux.abs() / max,
                            _ => 0.0,
                        }
                    });
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect()
}

fn energy_records(spec: &CoatingSpec, l_max: usize, ks: &[f64], opts: &SolveOptions) -> Vec<EnergyRecord> {
    let shells: Vec<f64> = ENERGY_SHELLS.iter().copied().filter(|d| *d >= opts.seed_gap).collect();
    let opts = SolveOptions { extra_gaps: shells.clone(), ..opts.clone() };
    let cells: Vec<(usize, f64)> = (0..=l_max).flat_map(|l| ks.iter().map(move |&k| (l, k))).collect();
    cells
        .par_iter()
        .map(|&(l, k)| {
            let result = solve_exterior_mode_with(spec, l, k, Seed::PullbackRegular, &opts)
                .and_then(|m| energy_near_sigma(spec, &m, &shells));
            match result {
                Ok(rep) => EnergyRecord {
                    l,
                    k,
                    verdict: Some(rep.verdict),
                    outer_energies: rep.shell_integrals.iter().map(|s| s.0).zip(rep.outer_integrals).collect(),
                    error: None,
                },
                Err(e) => EnergyRecord { l, k, verdict: None, outer_energies: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect()
}

fn obstruction_rows(spec: &CoatingSpec, ks: &[f64]) -> Vec<ObstructionRow> {
    let a = spec.cloak_radius;
    let row = |k: f64, eigenvalue: bool| match overdetermined_residual(a, 0, k, 1.0) {
        Ok(o) => ObstructionRow { k, eigenvalue, residual: o.residual, verdict: Some(o.verdict), error: None },
        Err(e) => ObstructionRow { k, eigenvalue, residual: f64::NAN, verdict: None, error: Some(e.to_string()) },
    };
    let mut rows: Vec<ObstructionRow> = ks.iter().map(|&k| row(k, false)).collect();
    match neumann_eigenvalue(0, a, 1) {
        Ok(k) => rows.push(row(k, true)),
        Err(e) => rows.push(ObstructionRow {
            k: f64::NAN,
            eigenvalue: true,
            residual: f64::NAN,
            verdict: None,
            error: Some(e.to_string()),
        }),
    }
    rows
}

fn verdict_records(config: &ScenarioConfig) -> Vec<VerdictRecord> {
    let mut sources: Vec<SourceEntry> = config.sources.clone();
    if let Some(r) = &config.random_dipoles {
        sources.extend(random_dipoles(r));
    }
    let tol = config.solver.verdict_tol;
    let cells: Vec<(&SourceEntry, f64)> =
        sources.iter().flat_map(|s| config.grid.k.iter().map(move |&k| (s, k))).collect();
    cells
        .par_iter()
        .filter_map(|&(s, k)| {
            let current = s.current.as_ref()?;
            let mut rec = VerdictRecord {
                source: s.name.clone(),
                k,
                expected: s.expect,
                exists_finite_energy: None,
                offending_modes: Vec::new(),
                norms: f64::NAN,
                multipole_norm: f64::NAN,
                trace_norm: f64::NAN,
                source_norm: f64::NAN,
                tolerance: tol,
                error: None,
            };
            match single_coating_verdict(&config.spec, current, k, tol) {
                Ok(v) => {
                    rec.exists_finite_energy = Some(v.exists_finite_energy);
                    rec.offending_modes = v.offending_modes;
                    rec.norms = v.norms;
                    rec.multipole_norm = v.multipole_norm;
                    rec.trace_norm = v.trace_norm;
                    rec.source_norm = v.source_norm;
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            Some(rec)
        })
        .collect()
}

fn maxwell_decay(spec: &CoatingSpec, ks: &[f64]) -> Vec<DecayRecord> {
    ks.par_iter()
        .map(|&k| match angular_decay(spec, 1, k, Polarization::TM, &DECAY_GAPS) {
            Ok(fit) => DecayRecord {
                mode: "l=1 TM".into(),
                k,
                gaps: fit.gaps,
                magnitudes: fit.tangential,
                slope: fit.slope,
                error: None,
            },
            Err(e) => decay_error("l=1 TM", k, e),
        })
        .collect()
}

fn cylinder_decay(spec: &CoatingSpec, ks: &[f64], opts: &SolveOptions) -> Vec<DecayRecord> {
    let lining = if spec.is_double() { Lining::Pullback } else { Lining::Shs };
    ks.par_iter()
        .map(|&k| {
            let fit =
                solve_cyl_mode(spec, 1, 0.0, k, lining, opts).and_then(|sol| cyl_angular_trace_limit(&sol.modes[1]));
            match fit {
                Ok(f) => DecayRecord {
                    mode: "n=1 TE".into(),
                    k,
                    gaps: f.gaps,
                    magnitudes: f.angular,
                    slope: f.slope,
                    error: None,
                },
                Err(e) => decay_error("n=1 TE", k, e),
            }
        })
        .collect()
}

fn decay_error(mode: &str, k: f64, e: Error) -> DecayRecord {
    DecayRecord {
        mode: mode.into(),
        k,
        gaps: Vec::new(),
        magnitudes: Vec::new(),
        slope: None,
        error: Some(e.to_string()),
    }
}

/// Runs every table and diagnostic of a validated scenario. Failing cells are
/// recorded in their rows; only an invalid scenario is an error.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportBundle> {
    config.validate()?;
    let started = Instant::now();
    let spec = &config.spec;
    let opts = config.solver.solve_options();
    let ks = &config.grid.k;
    let mut bundle = ReportBundle::empty(config.name.clone());
    bundle.equation = Some(config.equation);

    match config.equation {
        Equation::Helmholtz => {
            let l_max = config.grid.l_max.unwrap_or(0);
            for v in config.effective_variants() {
                if let Some(variant) = helmholtz_variant(v) {
                    bundle.dtn_tables.push(cauchy_match_report(spec, l_max, ks, variant, &opts)?);
                }
            }
            bundle.source_rows = helmholtz_sources(spec, &config.sources, l_max, ks);
            if config.wants(Diagnostic::Energy) {
                bundle.energy_reports = energy_records(spec, l_max, ks, &opts);
            }
            if config.wants(Diagnostic::Obstruction) {
                bundle.obstruction = obstruction_rows(spec, ks);
            }
        }
        Equation::MaxwellBall => {
            let l_max = config.grid.l_max.unwrap_or(1);
            bundle.admittance_tables.push(admittance_table(spec, l_max, ks, &opts)?);
            if !spec.is_double() {
                bundle.verdicts = verdict_records(config);
            }
            if config.wants(Diagnostic::AngularDecay) {
                bundle.decay_fits = maxwell_decay(spec, ks);
            }
        }
        Equation::MaxwellCylinder => {
            let n_max = config.grid.n_max.unwrap_or(0);
            let fractions = config.grid.beta_fractions.clone().unwrap_or_default();
            for v in config.effective_variants() {
                if let Some(lining) = cylinder_lining(v) {
                    bundle.scattering_tables.push(scattering_table(spec, n_max, &fractions, ks, lining, &opts)?);
                }
            }
            if config.wants(Diagnostic::AngularTrace) {
                bundle.decay_fits = cylinder_decay(spec, ks, &opts);
            }
            if config.wants(Diagnostic::Jacobian) {
                let gaps: Vec<f64> = (1..=8).map(|i| 10f64.powi(-i)).collect();
                let angles: Vec<f64> = (0..8).map(|i| std::f64::consts::PI * i as f64 / 4.0).collect();
                match jacobian_structure(spec, &gaps, &angles) {
                    Ok(j) => bundle.jacobian = Some(j),
                    Err(e) => bundle.diagnostic_errors.push(format!("jacobian: {e}")),
                }
            }
        }
    }
    if config.wants(Diagnostic::Degeneracy) {
        match degeneracy_diagnostics(spec) {
            Ok(d) => bundle.degeneracy_reports.push(d),
            Err(e) => bundle.diagnostic_errors.push(format!("degeneracy: {e}")),
        }
    }

    bundle.checks = config.checks.iter().map(|c| evaluate(c, &bundle)).collect();
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    bundle.provenance = Some(Provenance {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        scenario: config.name.clone(),
        config_hash: config_hash(config)?,
        seed_gap: config.solver.seed_gap,
        tolerances: config.solver.tolerances(),
        step: config.solver.step,
        verdict_tol: config.solver.verdict_tol,
        random_seed: config.random_dipoles.as_ref().map(|r| r.seed),
        created_unix,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    });
    Ok(bundle)
}

fn outcome(check: &Check, passed: bool, value: f64, threshold: f64, detail: String) -> CheckOutcome {
    CheckOutcome { name: check.name().into(), passed: passed && value.is_finite(), value, threshold, detail }
}

fn no_data(check: &Check, threshold: f64) -> CheckOutcome {
    CheckOutcome { name: check.name().into(), passed: false, value: f64::NAN, threshold, detail: "no data".into() }
}

/// Evaluates one acceptance check against a finished bundle.
pub fn evaluate(check: &Check, b: &ReportBundle) -> CheckOutcome {
    let failed_note = |n: usize| if n == 0 { String::new() } else { format!("; {n} cells failed to solve") };
    match *check {
        Check::MaxDtnDiscrepancy { below } => {
            if b.dtn_tables.is_empty() {
                return no_data(check, below);
            }
            let v = b.dtn_tables.iter().map(|t| t.max_discrepancy()).fold(0.0, f64::max);
            let failed = b.dtn_tables.iter().map(|t| t.rows.iter().filter(|r| r.error.is_some()).count()).sum();
            outcome(check, v < below, v, below, format!("{} tables{}", b.dtn_tables.len(), failed_note(failed)))
        }
        Check::VariantAgreement { below } => {
            let Some((first, rest)) = b.dtn_tables.split_first() else {
                return no_data(check, below);
            };
            if rest.is_empty() {
                return no_data(check, below);
            }
            let mut v: f64 = 0.0;
            for t in rest {
                match first.max_difference(t) {
                    Ok(d) => v = v.max(d),
                    Err(e) => return outcome(check, false, f64::NAN, below, e.to_string()),
                }
            }
            outcome(check, v < below, v, below, format!("{:?} against {} other tables", first.variant, rest.len()))
        }
        Check::MaxSurfaceFlux { below } => {
            let tables: Vec<&DtnTable> = b.dtn_tables.iter().filter(|t| t.variant != Variant::UnitDirichlet).collect();
            if tables.is_empty() {
                return no_data(check, below);
            }
            let v = tables.iter().map(|t| t.max_surface_flux()).fold(0.0, f64::max);
            outcome(check, v < below, v, below, "exterior flux at distance 1e-6 over its maximum".into())
        }
        Check::Obstruction { threshold } => {
            let grid: Vec<&ObstructionRow> = b.obstruction.iter().filter(|r| !r.eigenvalue).collect();
            let eigen = b.obstruction.iter().find(|r| r.eigenvalue);
            let Some(eigen) = eigen else {
                return no_data(check, threshold);
            };
            let min_grid = grid.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
            let passed = grid.iter().all(|r| r.error.is_none() && r.residual > threshold)
                && eigen.error.is_none()
                && eigen.residual < threshold;
            let detail = format!("residual {:.3e} at the eigenvalue k = {:.6}", eigen.residual, eigen.k);
            CheckOutcome { name: check.name().into(), passed, value: min_grid, threshold, detail }
        }
        Check::DegeneracyExponents { expected, within } => {
            let Some(d) = b.degeneracy_reports.first() else {
                return no_data(check, within);
            };
            let sides: Vec<_> = std::iter::once(&d.exterior).chain(d.interior.as_ref()).collect();
            let dev = sides
                .iter()
                .flat_map(|s| [s.tangential_exponent, s.det_sqrt_exponent])
                .map(|p| (p - expected).abs())
                .fold(0.0, f64::max);
            outcome(
                check,
                dev <= within,
                dev,
                within,
                format!("{} sides, largest |exponent - {expected}|", sides.len()),
            )
        }
        Check::RadialEigenvalue { expected, within } => {
            let Some(d) = b.degeneracy_reports.first() else {
                return no_data(check, within);
            };
            let (lo, hi) = d.exterior.radial_eigenvalue;
            let dev = (lo - expected).abs().max((hi - expected).abs());
            outcome(check, dev <= within, dev, within, format!("exterior range [{lo}, {hi}]"))
        }
        Check::VerdictsAsExpected => {
            if b.verdicts.is_empty() {
                return no_data(check, 0.0);
            }
            let errors = b.verdicts.iter().filter(|v| v.error.is_some()).count();
            let mismatches = b.verdicts.iter().filter(|v| v.matches_expectation() == Some(false)).count();
            let declared = b.verdicts.iter().filter(|v| v.expected.is_some()).count();
            outcome(
                check,
                mismatches == 0 && errors == 0 && declared > 0,
                mismatches as f64,
                0.0,
                format!("{declared} records with expectations, {errors} errors"),
            )
        }
        Check::MaxAdmittanceDiscrepancy { below } => {
            if b.admittance_tables.is_empty() {
                return no_data(check, below);
            }
            let v = b.admittance_tables.iter().map(|t| t.max_discrepancy()).fold(0.0, f64::max);
            let failed = b.admittance_tables.iter().map(|t| t.rows.iter().filter(|r| r.error.is_some()).count()).sum();
            outcome(check, v < below, v, below, format!("TE and TM{}", failed_note(failed)))
        }
        Check::MaxReflection { lining, below } => {
            let Some(t) = cylinder_lining(lining).and_then(|l| b.scattering_tables.iter().find(|t| t.lining == l))
            else {
                return no_data(check, below);
            };
            let v = t.max_reflection();
            outcome(check, v < below, v, below, format!("{} cells{}", t.rows.len(), failed_note(t.failures())))
        }
        Check::PeakReflection { lining, above } => {
            let Some(t) = cylinder_lining(lining).and_then(|l| b.scattering_tables.iter().find(|t| t.lining == l))
            else {
                return no_data(check, above);
            };
            let v = t.max_reflection();
            let peak = t
                .rows
                .iter()
                .filter_map(|r| r.entry.as_ref().map(|e| (r, e.max_abs())))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(r, _)| format!("peak at n = {}, beta = {}, k = {}", r.n, r.beta, r.k))
                .unwrap_or_default();
            outcome(check, v > above, v, above, peak)
        }
        Check::MaxUnitarityDefect { below } => {
            let defects: Vec<f64> = b
                .scattering_tables
                .iter()
                .flat_map(|t| t.rows.iter().filter_map(|r| r.entry.as_ref().and_then(|e| e.unitarity_defect())))
                .collect();
            if defects.is_empty() {
                return no_data(check, below);
            }
            let v = defects.iter().copied().fold(0.0, f64::max);
            outcome(check, v < below, v, below, format!("{} propagating cells", defects.len()))
        }
        Check::DecaySlope { expected, within } => {
            if b.decay_fits.is_empty() {
                return no_data(check, within);
            }
            let dev = b
                .decay_fits
                .iter()
                .map(|d| d.slope.map_or(f64::INFINITY, |s| (s - expected).abs()))
                .fold(0.0, f64::max);
            outcome(
                check,
                dev <= within,
                dev,
                within,
                format!("{} fits, largest |slope - {expected}|", b.decay_fits.len()),
            )
        }
        Check::JacobianCross { below } => match &b.jacobian {
            Some(j) => {
                outcome(check, j.max_cross < below, j.max_cross, below, "largest off-diagonal frame entry".into())
            }
            None => no_data(check, below),
        },
        Check::EnergyFinite => {
            if b.energy_reports.is_empty() {
                return no_data(check, 0.0);
            }
            let bad = b.energy_reports.iter().filter(|r| r.verdict != Some(EnergyVerdict::Finite)).count();
            outcome(check, bad == 0, bad as f64, 0.0, format!("{} modes", b.energy_reports.len()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml_str(text).unwrap()
    }

    #[test]
    fn minimal_helmholtz_bundle_has_three_rows() {
        let c = config(
            r#"
name = "minimal"
equation = "helmholtz"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 2, k = [1.0] }
"#,
        );
        let b = run_scenario(&c).unwrap();
        assert_eq!(b.dtn_tables.len(), 1);
        assert_eq!(b.dtn_tables[0].rows.len(), 3);
        assert!(b.checks.is_empty() && b.checks_passed());
        assert_eq!(b.provenance.as_ref().unwrap().config_hash.len(), 64);
    }

    #[test]
    fn failing_cells_do_not_abort_the_bundle() {
        let c = config(
            r#"
name = "resonant"
equation = "helmholtz"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 1, k = [1.5707963267948966, 1.0] }

[[checks]]
kind = "max-dtn-discrepancy"
below = 1e-6
"#,
        );
        let b = run_scenario(&c).unwrap();
        let rows = &b.dtn_tables[0].rows;
        assert!(rows[0].error.is_some());
        assert!(rows[1..].iter().all(|r| r.error.is_none() && r.rel_discrepancy < 1e-6));
        assert_eq!(b.failed_cells(), 1);
        assert!(b.checks_passed());
    }

    #[test]
    fn random_dipoles_are_reproducible_and_inside() {
        let spec = RandomDipoles { count: 20, seed: 7, max_radius: 0.6, expect: None };
        let a = random_dipoles(&spec);
        assert_eq!(a, random_dipoles(&spec));
        for s in &a {
            let Some(CurrentSource::PointDipole { location, moment }) = s.current else { panic!() };
            let r = location.iter().map(|x| x * x).sum::<f64>().sqrt();
            let m = moment.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(r <= 0.6 && (m - 1.0).abs() < 1e-12);
        }
        let other = random_dipoles(&RandomDipoles { seed: 8, ..spec });
        assert_ne!(a, other);
    }

    #[test]
    fn obstruction_check_separates_eigenvalue() {
        let c = config(
            r#"
name = "obstruction"
equation = "helmholtz"
spec = { kind = "single-ball", interior = "euclidean-ball" }
grid = { l_max = 0, k = [1.0, 2.0, 3.0] }

[[checks]]
kind = "obstruction"
threshold = 1e-8
"#,
        );
        let b = run_scenario(&c).unwrap();
        let eigen = b.obstruction.iter().find(|r| r.eigenvalue).unwrap();
        assert!((eigen.k - 4.493409457909064).abs() < 1e-9);
        assert!(b.checks[0].passed, "{:?}", b.checks[0]);
    }

    #[test]
    fn missing_data_fails_the_check() {
        let b = ReportBundle::empty("empty");
        let c = evaluate(&Check::MaxDtnDiscrepancy { below: 1.0 }, &b);
        assert!(!c.passed && c.detail == "no data");
    }
}
