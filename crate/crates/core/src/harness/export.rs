//! Flat-file export of report bundles.
//!
//! Each table becomes a comma-separated file with a header row and a
//! `.schema.json` sidecar describing its columns. Complex values are split
//! into `_re` and `_im` columns, and every row repeats the solver tolerances
//! it was produced under. Tables and the summary depend only on the bundle
//! contents; wall-clock data lives in `provenance.json` alone.

use super::config::Format;
use super::kebab;
use super::run::ReportBundle;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Int,
    Float,
    Bool,
    String,
}

#[derive(Serialize)]
struct Column {
    name: &'static str,
    #[serde(rename = "type")]
    kind: Kind,
    description: &'static str,
}

#[derive(Serialize)]
struct Schema<'a> {
    table: &'a str,
    delimiter: &'static str,
    missing: &'static str,
    columns: &'a [Column],
}

struct Table {
    name: String,
    columns: Vec<Column>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: impl Into<String>, columns: &[(&'static str, Kind, &'static str)]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|&(name, kind, description)| Column { name, kind, description }).collect(),
            rows: Vec::new(),
        }
    }
}

fn f(v: f64) -> String {
    format!("{v:e}")
}

fn opt_f(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn cx(v: Complex64) -> [String; 2] {
    [f(v.re), f(v.im)]
}

fn opt_s(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

const TOL_COLUMNS: [(&str, Kind, &str); 3] = [
    ("rtol", Kind::Float, "relative integrator tolerance"),
    ("atol", Kind::Float, "absolute integrator tolerance"),
    ("seed_gap", Kind::Float, "seed distance from the surface"),
];

fn with_tol(cols: &[(&'static str, Kind, &'static str)]) -> Vec<(&'static str, Kind, &'static str)> {
    cols.iter().copied().chain(TOL_COLUMNS).collect()
}

fn tables(b: &ReportBundle) -> Vec<Table> {
    let tol: Vec<String> = match &b.provenance {
        Some(p) => vec![f(p.tolerances.rtol), f(p.tolerances.atol), f(p.seed_gap)],
        None => vec![String::new(); 3],
    };
    let push = |t: &mut Table, mut row: Vec<String>| {
        row.extend(tol.iter().cloned());
        t.rows.push(row);
    };
    let mut out = Vec::new();

    for table in &b.dtn_tables {
        let mut t = Table::new(
            format!("dtn_{}", kebab(&table.variant)),
            &with_tol(&[
                ("l", Kind::Int, "spherical harmonic degree"),
                ("k", Kind::Float, "wavenumber"),
                ("lambda_cloaked_re", Kind::Float, "cloaked DtN eigenvalue, real part"),
                ("lambda_cloaked_im", Kind::Float, "cloaked DtN eigenvalue, imaginary part"),
                ("lambda_ref_re", Kind::Float, "homogeneous reference eigenvalue, real part"),
                ("lambda_ref_im", Kind::Float, "homogeneous reference eigenvalue, imaginary part"),
                ("rel_discrepancy", Kind::Float, "|cloaked - reference| / |reference|"),
                ("surface_flux", Kind::Float, "exterior flux at distance 1e-6 over its maximum"),
                ("interior_flux", Kind::Float, "interior flux nearest the surface over its maximum"),
                ("flags", Kind::String, "space-separated cell flags"),
                ("error", Kind::String, "solver error, empty when the cell solved"),
            ]),
        );
        for r in &table.rows {
            let [cr, ci] = cx(r.lambda_cloaked.into());
            let [rr, ri] = cx(r.lambda_ref.into());
            push(
                &mut t,
                vec![
                    r.l.to_string(),
                    f(r.k),
                    cr,
                    ci,
                    rr,
                    ri,
                    f(r.rel_discrepancy),
                    f(r.surface_flux),
                    opt_f(r.interior_flux),
                    r.flags.join(" "),
                    opt_s(&r.error),
                ],
            );
        }
        out.push(t);
    }

    for table in &b.admittance_tables {
        let mut t = Table::new(
            "admittance",
            &with_tol(&[
                ("l", Kind::Int, "multipole degree"),
                ("k", Kind::Float, "wavenumber"),
                ("polarization", Kind::String, "TE or TM"),
                ("cloaked_re", Kind::Float, "cloaked admittance, real part"),
                ("cloaked_im", Kind::Float, "cloaked admittance, imaginary part"),
                ("vacuum_re", Kind::Float, "vacuum admittance, real part"),
                ("vacuum_im", Kind::Float, "vacuum admittance, imaginary part"),
                ("rel_discrepancy", Kind::Float, "|cloaked - vacuum| / |vacuum|"),
                ("reciprocity", Kind::Float, "outward versus inward relative difference"),
                ("error", Kind::String, "solver error, empty when the cell solved"),
            ]),
        );
        for r in &table.rows {
            let [cr, ci] = cx(r.cloaked);
            let [vr, vi] = cx(r.vacuum);
            push(
                &mut t,
                vec![
                    r.l.to_string(),
                    f(r.k),
                    format!("{:?}", r.polarization),
                    cr,
                    ci,
                    vr,
                    vi,
                    f(r.rel_discrepancy),
                    f(r.reciprocity),
                    opt_s(&r.error),
                ],
            );
        }
        out.push(t);
    }

    for table in &b.scattering_tables {
        let mut t = Table::new(
            format!("scattering_{}", table.lining.label()),
            &with_tol(&[
                ("n", Kind::Int, "angular order"),
                ("beta", Kind::Float, "axial wavenumber"),
                ("k", Kind::Float, "wavenumber"),
                ("gamma_re", Kind::Float, "transverse wavenumber, real part"),
                ("gamma_im", Kind::Float, "transverse wavenumber, imaginary part"),
                ("r_tm_tm_re", Kind::Float, "outgoing TM from incident TM, real part"),
                ("r_tm_tm_im", Kind::Float, "outgoing TM from incident TM, imaginary part"),
                ("r_tm_te_re", Kind::Float, "outgoing TM from incident TE, real part"),
                ("r_tm_te_im", Kind::Float, "outgoing TM from incident TE, imaginary part"),
                ("r_te_tm_re", Kind::Float, "outgoing TE from incident TM, real part"),
                ("r_te_tm_im", Kind::Float, "outgoing TE from incident TM, imaginary part"),
                ("r_te_te_re", Kind::Float, "outgoing TE from incident TE, real part"),
                ("r_te_te_im", Kind::Float, "outgoing TE from incident TE, imaginary part"),
                ("max_abs", Kind::Float, "largest reflection magnitude"),
                ("unitarity_defect", Kind::Float, "max |S^H S - I|, empty for evanescent modes"),
                ("residual", Kind::Float, "largest relative Maxwell residual"),
                ("error", Kind::String, "solver error, empty when the cell solved"),
            ]),
        );
        for r in &table.rows {
            let mut row = vec![r.n.to_string(), f(r.beta), f(r.k)];
            match &r.entry {
                Some(e) => {
                    row.extend(cx(e.gamma));
                    for o in 0..2 {
                        for i in 0..2 {
                            row.extend(cx(e.reflection[o][i]));
                        }
                    }
                    row.extend([f(e.max_abs()), opt_f(e.unitarity_defect()), f(e.residual)]);
                }
                None => row.extend(std::iter::repeat_n(String::new(), 13)),
            }
            row.push(opt_s(&r.error));
            push(&mut t, row);
        }
        out.push(t);
    }

    if !b.source_rows.is_empty() {
        let mut t = Table::new(
            "sources",
            &with_tol(&[
                ("source", Kind::String, "source name"),
                ("l", Kind::Int, "spherical harmonic degree"),
                ("k", Kind::Float, "wavenumber"),
                ("surface_flux", Kind::Float, "interior flux nearest the surface over its maximum"),
                ("resonance", Kind::Bool, "interior resonance at this (l, k)"),
                ("compatibility", Kind::Float, "solvability residual at a resonance"),
                ("error", Kind::String, "solver error, empty when the cell solved"),
            ]),
        );
        for r in &b.source_rows {
            push(
                &mut t,
                vec![
                    r.source.clone(),
                    r.l.to_string(),
                    f(r.k),
                    opt_f(r.surface_flux),
                    r.resonance.to_string(),
                    opt_f(r.compatibility),
                    opt_s(&r.error),
                ],
            );
        }
        out.push(t);
    }

    if !b.verdicts.is_empty() {
        let mut t = Table::new(
            "verdicts",
            &with_tol(&[
                ("source", Kind::String, "source name"),
                ("k", Kind::Float, "wavenumber"),
                ("expected", Kind::String, "declared expectation"),
                ("exists_finite_energy", Kind::Bool, "verdict"),
                ("offending_modes", Kind::String, "space-separated l:m:polarization labels"),
                ("norms", Kind::Float, "largest amplitude relative to the source norm"),
                ("multipole_norm", Kind::Float, "largest multipole-route amplitude"),
                ("trace_norm", Kind::Float, "largest trace-route amplitude"),
                ("source_norm", Kind::Float, "norm of the discretized source"),
                ("tolerance", Kind::Float, "verdict tolerance"),
                ("matches_expectation", Kind::Bool, "verdict agrees with the expectation"),
                ("error", Kind::String, "solver error, empty when the verdict was reached"),
            ]),
        );
        for r in &b.verdicts {
            let modes: Vec<String> =
                r.offending_modes.iter().map(|m| format!("{}:{}:{:?}", m.l, m.m, m.polarization)).collect();
            push(
                &mut t,
                vec![
                    r.source.clone(),
                    f(r.k),
                    r.expected.map(|e| kebab(&e)).unwrap_or_default(),
                    r.exists_finite_energy.map(|v| v.to_string()).unwrap_or_default(),
                    modes.join(" "),
                    f(r.norms),
                    f(r.multipole_norm),
                    f(r.trace_norm),
                    f(r.source_norm),
                    f(r.tolerance),
                    r.matches_expectation().map(|v| v.to_string()).unwrap_or_default(),
                    opt_s(&r.error),
                ],
            );
        }
        out.push(t);
    }

    if !b.energy_reports.is_empty() {
        let mut t = Table::new(
            "energy",
            &with_tol(&[
                ("l", Kind::Int, "spherical harmonic degree"),
                ("k", Kind::Float, "wavenumber"),
                ("verdict", Kind::String, "finite or divergent"),
                ("shell", Kind::Float, "shell radius, snapped to a sample"),
                ("outer_energy", Kind::Float, "Dirichlet energy outside the shell per unit solid angle"),
                ("error", Kind::String, "solver error, empty when the mode solved"),
            ]),
        );
        for r in &b.energy_reports {
            let verdict = r.verdict.map(|v| kebab(&v)).unwrap_or_default();
            if r.outer_energies.is_empty() {
                push(
                    &mut t,
                    vec![r.l.to_string(), f(r.k), verdict.clone(), String::new(), String::new(), opt_s(&r.error)],
                );
            }
            for &(shell, e) in &r.outer_energies {
                push(&mut t, vec![r.l.to_string(), f(r.k), verdict.clone(), f(shell), f(e), opt_s(&r.error)]);
            }
        }
        out.push(t);
    }

    if !b.degeneracy_reports.is_empty() {
        let mut t = Table::new(
            "degeneracy",
            &[
                ("side", Kind::String, "exterior or interior"),
                ("tangential_exponent", Kind::Float, "fitted exponent of the angular metric"),
                ("det_sqrt_exponent", Kind::Float, "fitted exponent of |g|^(1/2)"),
                ("constant_min", Kind::Float, "smallest |g|^(1/2) / dist^p"),
                ("constant_max", Kind::Float, "largest |g|^(1/2) / dist^p"),
                ("radial_min", Kind::Float, "smallest radial metric eigenvalue"),
                ("radial_max", Kind::Float, "largest radial metric eigenvalue"),
                ("flux_bound", Kind::Float, "max |g^-1 nu|"),
                ("bounded_eigenvalues", Kind::Int, "eigenvalues within a factor 2 over the samples"),
                ("flux_jump", Kind::Float, "radial density jump across the surface at distance 1e-7"),
            ],
        );
        for d in &b.degeneracy_reports {
            for s in std::iter::once(&d.exterior).chain(d.interior.as_ref()) {
                t.rows.push(vec![
                    kebab(&s.branch),
                    f(s.tangential_exponent),
                    f(s.det_sqrt_exponent),
                    f(s.constant_range.0),
                    f(s.constant_range.1),
                    f(s.radial_eigenvalue.0),
                    f(s.radial_eigenvalue.1),
                    f(s.flux_bound),
                    s.bounded_eigenvalues.to_string(),
                    opt_f(d.flux_jump),
                ]);
            }
        }
        out.push(t);
    }

    if !b.obstruction.is_empty() {
        let mut t = Table::new(
            "obstruction",
            &[
                ("k", Kind::Float, "wavenumber"),
                ("eigenvalue", Kind::Bool, "k is the first l = 0 interior Neumann eigenvalue"),
                ("residual", Kind::Float, "normal derivative of the regular interior solution with unit trace"),
                ("verdict", Kind::String, "no-spatial-h1, solvable or dirichlet-resonance"),
                ("error", Kind::String, "error, empty when computed"),
            ],
        );
        for r in &b.obstruction {
            t.rows.push(vec![
                f(r.k),
                r.eigenvalue.to_string(),
                f(r.residual),
                r.verdict.map(|v| kebab(&v)).unwrap_or_default(),
                opt_s(&r.error),
            ]);
        }
        out.push(t);
    }

    if !b.decay_fits.is_empty() {
        let mut t = Table::new(
            "decay",
            &with_tol(&[
                ("mode", Kind::String, "mode whose tangential field is fitted"),
                ("k", Kind::Float, "wavenumber"),
                ("gap", Kind::Float, "distance from the surface"),
                ("magnitude", Kind::Float, "tangential field magnitude"),
                ("slope", Kind::Float, "fitted log-log slope"),
                ("error", Kind::String, "error, empty when fitted"),
            ]),
        );
        for r in &b.decay_fits {
            if r.gaps.is_empty() {
                push(
                    &mut t,
                    vec![r.mode.clone(), f(r.k), String::new(), String::new(), opt_f(r.slope), opt_s(&r.error)],
                );
            }
            for (g, m) in r.gaps.iter().zip(&r.magnitudes) {
                push(&mut t, vec![r.mode.clone(), f(r.k), f(*g), f(*m), opt_f(r.slope), opt_s(&r.error)]);
            }
        }
        out.push(t);
    }

    if let Some(j) = &b.jacobian {
        let mut t = Table::new(
            "jacobian",
            &[
                ("max_cross", Kind::Float, "largest off-diagonal frame entry"),
                ("max_angular_over_gap", Kind::Float, "largest angular entry over the distance"),
                ("max_axial_deviation", Kind::Float, "largest |axial entry - 1|"),
            ],
        );
        t.rows.push(vec![f(j.max_cross), f(j.max_angular_over_gap), f(j.max_axial_deviation)]);
        out.push(t);
    }

    if !b.convergence_curves.is_empty() {
        let mut t = Table::new(
            "convergence",
            &[
                ("table", Kind::String, "swept table"),
                ("parameter", Kind::String, "swept parameter"),
                ("value", Kind::Float, "parameter value"),
                ("max_discrepancy", Kind::Float, "largest discrepancy over solved cells"),
                ("failed_cells", Kind::Int, "cells that failed to solve"),
                ("monotone", Kind::Bool, "curve passes the monotonicity rule"),
                ("extrapolation_error", Kind::Float, "extrapolated-limit error against the reference"),
                ("shared_row_deviation", Kind::Float, "largest change of a row shared by all runs"),
                ("flagged_cells", Kind::Int, "cells flagged as non-convergent"),
            ],
        );
        let mut flags = Table::new(
            "convergence_flags",
            &[
                ("table", Kind::String, "swept table"),
                ("cell", Kind::String, "cell label"),
                ("reason", Kind::String, "why the cell is flagged"),
                ("discrepancies", Kind::String, "space-separated discrepancies in sweep order"),
            ],
        );
        for c in &b.convergence_curves {
            for p in &c.points {
                t.rows.push(vec![
                    c.table.clone(),
                    c.parameter.to_string(),
                    f(p.value),
                    f(p.max_discrepancy),
                    p.failed_cells.to_string(),
                    c.monotone.to_string(),
                    opt_f(c.extrapolation_error),
                    opt_f(c.shared_row_deviation),
                    c.flagged_cells.len().to_string(),
                ]);
            }
            for fc in &c.flagged_cells {
                let d: Vec<String> = fc.discrepancies.iter().map(|v| f(*v)).collect();
                flags.rows.push(vec![c.table.clone(), fc.cell.clone(), fc.reason.clone(), d.join(" ")]);
            }
        }
        out.push(t);
        if !flags.rows.is_empty() {
            out.push(flags);
        }
    }

    if !b.checks.is_empty() {
        let mut t = Table::new(
            "checks",
            &with_tol(&[
                ("name", Kind::String, "check kind"),
                ("passed", Kind::Bool, "whether the check passed"),
                ("value", Kind::Float, "measured value"),
                ("threshold", Kind::Float, "threshold the value is compared with"),
                ("detail", Kind::String, "context"),
            ]),
        );
        for c in &b.checks {
            push(&mut t, vec![c.name.clone(), c.passed.to_string(), f(c.value), f(c.threshold), c.detail.clone()]);
        }
        out.push(t);
    }
    out
}

/// Human-readable summary of a bundle.
pub fn summary(b: &ReportBundle) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", b.name);
    if let Some(e) = b.equation {
        let _ = writeln!(s, "equation: {}", kebab(&e));
    }
    if let Some(p) = &b.provenance {
        let _ = writeln!(s, "config hash: {}", p.config_hash);
        let _ = writeln!(
            s,
            "solver: seed_gap {:e}, rtol {:e}, atol {:e}, verdict_tol {:e}",
            p.seed_gap, p.tolerances.rtol, p.tolerances.atol, p.verdict_tol
        );
    }
    let _ = writeln!(s, "tables: {}", b.table_count());
    for t in &b.dtn_tables {
        let _ = writeln!(
            s,
            "  dtn {}: {} cells, max discrepancy {:e}",
            kebab(&t.variant),
            t.rows.len(),
            t.max_discrepancy()
        );
    }
    for t in &b.admittance_tables {
        let _ = writeln!(s, "  admittance: {} cells, max discrepancy {:e}", t.rows.len(), t.max_discrepancy());
    }
    for t in &b.scattering_tables {
        let _ = writeln!(
            s,
            "  scattering {}: {} cells, max |reflection| {:e}",
            t.lining.label(),
            t.rows.len(),
            t.max_reflection()
        );
    }
    if !b.verdicts.is_empty() {
        let exists = b.verdicts.iter().filter(|v| v.exists_finite_energy == Some(true)).count();
        let _ = writeln!(s, "  verdicts: {} records, {} with a finite-energy solution", b.verdicts.len(), exists);
    }
    for c in &b.convergence_curves {
        let pts: Vec<String> = c.points.iter().map(|p| format!("{:e}:{:e}", p.value, p.max_discrepancy)).collect();
        let _ = writeln!(
            s,
            "  convergence {} over {}: {} ({} flagged cells) [{}]",
            c.table,
            c.parameter,
            if c.converged() { "converged" } else { "not converged" },
            c.flagged_cells.len(),
            pts.join(", ")
        );
    }
    let _ = writeln!(s, "failed cells: {}", b.failed_cells());
    for e in &b.diagnostic_errors {
        let _ = writeln!(s, "diagnostic error: {e}");
    }
    let passed = b.checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "checks: {passed}/{} passed", b.checks.len());
    for c in &b.checks {
        let _ = writeln!(
            s,
            "  [{}] {}: value {:e}, threshold {:e} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold,
            c.detail
        );
    }
    s
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| Error::Export(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Export(format!("{}: {e}", t.name));
    w.write_record(t.columns.iter().map(|c| c.name)).map_err(err)?;
    for row in &t.rows {
        debug_assert_eq!(row.len(), t.columns.len(), "{}", t.name);
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Export(format!("{}: {e}", t.name)))
}

/// Writes the bundle to `dir`, creating it if needed, and returns the files
/// written in order. Tables, `bundle.json` and `summary.txt` are
/// byte-identical for identical bundle contents.
pub fn export(bundle: &ReportBundle, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();
    if formats.contains(&Format::Csv) {
        for t in tables(bundle) {
            let path = dir.join(format!("{}.csv", t.name));
            write(&path, &csv_bytes(&t)?)?;
            written.push(path);
            let schema = Schema { table: &t.name, delimiter: ",", missing: "", columns: &t.columns };
            let path = dir.join(format!("{}.schema.json", t.name));
            write(&path, &json(&schema)?)?;
            written.push(path);
        }
    }
    if formats.contains(&Format::Json) {
        let stable = ReportBundle { provenance: None, ..bundle.clone() };
        let path = dir.join("bundle.json");
        write(&path, &json(&stable)?)?;
        written.push(path);
    }
    if let Some(p) = &bundle.provenance {
        let path = dir.join("provenance.json");
        write(&path, &json(p)?)?;
        written.push(path);
    }
    let path = dir.join("summary.txt");
    write(&path, summary(bundle).as_bytes())?;
    written.push(path);
    Ok(written)
}
