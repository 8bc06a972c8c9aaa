use super::{
    dtn_eigenvalue, interior_neumann_solve, interior_sphere_solve, reference_dtn, solve_exterior_mode_with, Conormal,
    RadialMode, RadialSource, Seed, SolveOptions,
};
use crate::error::{Error, Result};
use crate::geometry::CoatingSpec;
use crate::ode::Tolerances;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the cloaking surface is realized on the exterior side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// No physical boundary: the finite-energy branch is selected by the
    /// degenerate coefficients alone.
    VirtualSurface,
    /// A sound-hard lining at the surface imposes zero flux at the seed.
    PhysicalNeumannLining,
    /// `u = 0` with unit flux at the seed: not finite energy, but its DtN
    /// values converge as the seed approaches the surface.
    UnitDirichlet,
}

impl Variant {
    fn seed(self) -> Seed {
        match self {
            Variant::VirtualSurface => Seed::PullbackRegular,
            Variant::PhysicalNeumannLining => Seed::NeumannLining,
            Variant::UnitDirichlet => Seed::UnitDirichlet,
        }
    }
}

/// One `(l, k)` cell of a DtN comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtnRow {
    pub l: usize,
    pub k: f64,
    pub lambda_cloaked: f64,
    pub lambda_ref: f64,
    pub rel_discrepancy: f64,
    pub flags: Vec<String>,
    /// Exterior flux at distance `1e-6`, relative to the mode's largest flux.
    pub surface_flux: f64,
    /// Interior flux at the sample closest to the surface, relative to its
    /// maximum, for a unit shell source at half the cloak radius.
    pub interior_flux: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtnTable {
    pub variant: Variant,
    pub rows: Vec<DtnRow>,
    pub tolerances: Tolerances,
}

impl DtnTable {
    /// Largest exterior surface flux over cells that solved.
    pub fn max_surface_flux(&self) -> f64 {
        self.rows.iter().filter(|r| r.error.is_none()).map(|r| r.surface_flux).fold(0.0, f64::max)
    }

    /// Largest relative discrepancy over cells that solved.
    pub fn max_discrepancy(&self) -> f64 {
        self.rows.iter().filter(|r| r.error.is_none()).map(|r| r.rel_discrepancy).fold(0.0, f64::max)
    }

    /// Largest relative difference of cloaked eigenvalues between two tables
    /// over the same grid.
    pub fn max_difference(&self, other: &DtnTable) -> Result<f64> {
        if self.rows.len() != other.rows.len() {
            return Err(Error::Inconsistent("tables cover different grids".into()));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.rows.iter().zip(&other.rows) {
            if a.l != b.l || a.k != b.k {
                return Err(Error::Inconsistent("tables cover different grids".into()));
            }
            if a.error.is_none() && b.error.is_none() {
                let d = (a.lambda_cloaked - b.lambda_cloaked).abs() / a.lambda_cloaked.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }
}

/// Flux at distance `1e-6` from the surface relative to the largest flux of
/// the mode.
pub fn hidden_neumann_flux(mode: &RadialMode) -> f64 {
    let max = mode.max_abs_flux();
    if max == 0.0 {
        return 0.0;
    }
    mode.nearest_gap(1e-6).flux.abs() / max
}

fn interior_check(spec: &CoatingSpec, l: usize, k: f64, flags: &mut Vec<String>) -> Result<Option<f64>> {
    let source = RadialSource::Shell { radius: 0.5 * spec.cloak_radius, strength: 1.0 };
    let sol = if spec.is_double() {
        interior_sphere_solve(spec, l, k, source)?
    } else {
        interior_neumann_solve(spec, l, k, source)?
    };
    if sol.resonance {
        flags.push("interior-resonance".into());
    }
    Ok(sol.mode.as_ref().map(|m| {
        let max = m.max_abs_flux();
        let closest = m.samples.iter().min_by(|a, b| a.gap.partial_cmp(&b.gap).unwrap());
        match closest {
            Some(s) if max > 0.0 => s.flux.abs() / max,
            _ => 0.0,
        }
    }))
}

fn cell(spec: &CoatingSpec, l: usize, k: f64, variant: Variant, opts: &SolveOptions) -> DtnRow {
    let mut row = DtnRow {
        l,
        k,
        lambda_cloaked: f64::NAN,
        lambda_ref: f64::NAN,
        rel_discrepancy: f64::NAN,
        flags: Vec::new(),
        surface_flux: f64::NAN,
        interior_flux: None,
        error: None,
    };
    let result = (|| -> Result<()> {
        row.lambda_ref = reference_dtn(l, k, spec.outer_radius)?;
        let mode = solve_exterior_mode_with(spec, l, k, variant.seed(), opts)?;
        row.lambda_cloaked = dtn_eigenvalue(spec, &mode, Conormal::Metric)?;
        row.rel_discrepancy = (row.lambda_cloaked - row.lambda_ref).abs() / row.lambda_ref.abs().max(f64::MIN_POSITIVE);
        row.surface_flux = hidden_neumann_flux(&mode);
        if row.surface_flux >= 1e-4 {
            row.flags.push("surface-flux".into());
        }
        row.interior_flux = interior_check(spec, l, k, &mut row.flags)?;
        Ok(())
    })();
    if let Err(e) = result {
        if matches!(e, Error::DirichletResonance { .. }) {
            row.flags.push("dirichlet-resonance".into());
        }
        row.error = Some(e.to_string());
    }
    row
}

/// Compares cloaked and uncoated DtN eigenvalues over a grid of degrees and
/// wavenumbers. Cells are independent and solved in parallel; a failing cell
/// is recorded and does not abort the table.
pub fn cauchy_match_report(
    spec: &CoatingSpec,
    l_max: usize,
    k_grid: &[f64],
    variant: Variant,
    opts: &SolveOptions,
) -> Result<DtnTable> {
    super::radial_coefficients(spec, 0)?;
    let cells: Vec<(usize, f64)> = (0..=l_max).flat_map(|l| k_grid.iter().map(move |&k| (l, k))).collect();
    let rows = cells.par_iter().map(|&(l, k)| cell(spec, l, k, variant, opts)).collect();
    Ok(DtnTable { variant, rows, tolerances: opts.tolerances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CoatingKind;

    const KS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

    #[test]
    fn single_ball_matches_reference() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let t = cauchy_match_report(&spec, 10, &KS, Variant::VirtualSurface, &SolveOptions::default()).unwrap();
        assert!(t.rows.iter().all(|r| r.error.is_none()), "{:?}", t.rows.iter().find(|r| r.error.is_some()));
        assert!(t.max_discrepancy() < 1e-6, "{}", t.max_discrepancy());
        assert!(t.rows.iter().all(|r| r.interior_flux.unwrap() < 1e-8));
    }

    #[test]
    fn double_ball_matches_reference() {
        let spec = CoatingSpec::canonical(CoatingKind::DoubleBall);
        let t = cauchy_match_report(&spec, 10, &KS, Variant::VirtualSurface, &SolveOptions::default()).unwrap();
        assert!(t.max_discrepancy() < 1e-6, "{}", t.max_discrepancy());
        assert!(t.rows.iter().all(|r| r.interior_flux.is_none_or(|f| f < 1e-8)));
    }

    #[test]
    fn lining_and_virtual_tables_coincide() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let opts = SolveOptions::default();
        let a = cauchy_match_report(&spec, 10, &KS, Variant::VirtualSurface, &opts).unwrap();
        let b = cauchy_match_report(&spec, 10, &KS, Variant::PhysicalNeumannLining, &opts).unwrap();
        assert!(a.max_difference(&b).unwrap() < 1e-10);
    }

    #[test]
    fn resonant_cells_are_recorded() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let k = std::f64::consts::PI / 2.0;
        let t = cauchy_match_report(&spec, 0, &[k], Variant::VirtualSurface, &SolveOptions::default()).unwrap();
        assert!(t.rows[0].error.is_some());
        assert!(t.rows[0].flags.contains(&"dirichlet-resonance".to_string()));
    }

    #[test]
    fn interior_resonance_leaves_exterior_untouched() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let k = super::super::neumann_eigenvalue(1, 1.0, 1).unwrap();
        let t = cauchy_match_report(&spec, 1, &[k], Variant::VirtualSurface, &SolveOptions::default()).unwrap();
        let row = &t.rows[1];
        assert!(row.flags.contains(&"interior-resonance".to_string()));
        assert!(row.rel_discrepancy < 1e-6);
    }
}
