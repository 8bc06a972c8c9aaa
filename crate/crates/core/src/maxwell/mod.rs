//! Maxwell fields on cloaked balls.
//!
//! The coated media are radially uniaxial with `eps = mu`, so fields split
//! into TE and TM multipoles, each carried by a scalar Debye potential with a
//! second-order radial equation. On the exterior this gives admittances at
//! the outer boundary; for internal currents of a single coating it gives the
//! radiating multipoles whose vanishing decides whether a finite-energy
//! solution exists.
//!
//! Time dependence is `e^{-ikt}`, with `curl E = ik mu H` and
//! `curl H = -ik eps E + J`.

mod debye;
mod divergence;
mod multipoles;
mod sources;
mod verdict;
mod waves;

pub use debye::{
    admittance_inward, admittance_table, angular_decay, debye_residual, double_coating_admittance,
    maxwell_energy_near_sigma, solve_maxwell_mode, vacuum_admittance, AdmittanceRow, AdmittanceTable, DecayFit,
    FieldSample, MaxwellMode,
};
pub use divergence::{divergence_check, smeared_dipole_field, vacuum_mode_field, DivergenceResiduals, ModeField};
pub use multipoles::{
    auto_degree, radiating_multipoles, radiating_multipoles_to, MultipoleCoefficients, MultipoleEntry,
    TRUNCATION_WARNING,
};
pub use sources::{CurrentSource, PointCurrent};
pub use verdict::{cauchy_trace, single_coating_verdict, CauchyTrace, ModeLabel, Verdict, VERDICT_TOLERANCE};
pub use waves::{dipole_field, vector_waves, CVec3, VectorWaves, WaveKind};

use serde::{Deserialize, Serialize};

/// Multipole polarization: TE fields have no radial `E`, TM fields no
/// radial `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}
