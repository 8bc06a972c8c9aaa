//! Scalar Helmholtz modes of cloaked balls.
//!
//! Each spherical-harmonic degree `l` reduces the cloaked equation to a
//! singular Sturm-Liouville problem in the radius. Exterior modes are
//! integrated outward from a seed just off the surface in the log-distance
//! variable `s = ln(r - a)`, where the coefficient singularity becomes a mild
//! exponential. From the modes we read off boundary data, energies and the
//! fluxes that encode the hidden boundary condition at the surface.

mod coefficients;
mod energy;
mod exterior;
mod interior;
mod report;

pub use coefficients::{radial_coefficients, Coeffs, RadialCoefficients};
pub(crate) use energy::shell_report;
pub use energy::{energy_near_sigma, EnergyReport, EnergyVerdict, CAUCHY_TOLERANCE};
pub use exterior::{
    boundary_pairing_asymmetry, dtn_eigenvalue, mode_residual, reference_dtn, seed_independence, solve_exterior_mode,
    solve_exterior_mode_with, SeedStudy, SolveOptions,
};
pub use interior::{
    interior_neumann_solve, interior_sphere_solve, neumann_eigenvalue, overdetermined_residual, InteriorSolution,
    Obstruction, ObstructionVerdict, RadialSource,
};
pub use report::{cauchy_match_report, hidden_neumann_flux, DtnRow, DtnTable, Variant};

use serde::{Deserialize, Serialize};

/// Near-surface initial condition for exterior modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Seed {
    /// The finite-energy branch: the pulled-back regular free-space solution.
    PullbackRegular,
    /// `u = 0` with unit flux at the seed radius.
    UnitDirichlet,
    /// `u = 1` with zero flux at the seed radius, as imposed by a physical
    /// sound-hard lining.
    NeumannLining,
}

/// Which part of the coated space a mode lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeBranch {
    #[serde(rename = "exterior-N1")]
    ExteriorN1,
    /// Euclidean interior of a single coating.
    #[serde(rename = "interior-N2")]
    InteriorN2,
    /// Round-sphere interior of a double coating.
    #[serde(rename = "interior-M2")]
    InteriorM2,
}

/// Normal used for the Neumann half of boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conormal {
    /// Unit normal of the cloak metric.
    #[default]
    Metric,
    /// Euclidean radial derivative.
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSample {
    pub r: f64,
    /// Distance `|r - a|` to the surface.
    pub gap: f64,
    pub u: f64,
    /// Metric flux `|g|^{1/2} g^{rr} du/dr` per unit solid angle times `r^2`.
    pub flux: f64,
}

/// Samples of one radial mode, ordered by increasing `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialMode {
    pub l: usize,
    pub k: f64,
    pub branch: ModeBranch,
    pub samples: Vec<ModeSample>,
}

impl RadialMode {
    pub fn max_abs_flux(&self) -> f64 {
        self.samples.iter().map(|s| s.flux.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_u(&self) -> f64 {
        self.samples.iter().map(|s| s.u.abs()).fold(0.0, f64::max)
    }

    /// The sample closest to the given distance from the surface.
    pub fn nearest_gap(&self, gap: f64) -> &ModeSample {
        self.samples
            .iter()
            .min_by(|a, b| (a.gap.ln() - gap.ln()).abs().partial_cmp(&(b.gap.ln() - gap.ln()).abs()).unwrap())
            .expect("modes have samples")
    }

    /// Builds an exterior mode from a closed-form profile `r -> (u, du/dr)`,
    /// sampled at the given distances from the surface.
    pub fn from_profile<F>(coeffs: &RadialCoefficients, k: f64, gaps: &[f64], profile: F) -> crate::Result<Self>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let a = coeffs.spec.cloak_radius;
        let mut gaps = gaps.to_vec();
        gaps.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut samples = Vec::with_capacity(gaps.len());
        for t in gaps {
            let c = coeffs.at(crate::geometry::Branch::Exterior, t)?;
            let (u, du) = profile(a + t);
            samples.push(ModeSample { r: a + t, gap: t, u, flux: c.p * du });
        }
        Ok(Self { l: coeffs.l, k, branch: ModeBranch::ExteriorN1, samples })
    }
}
