//! Maxwell modes of cylindrical coatings.
//!
//! The cylinder map stretches only the radial direction, so `theta` and `z`
//! are untouched and fields separate as `e^{i n theta + i beta z}` with each
//! `(n, beta)` solved independently. Inside the coating the state is the
//! covariant tangential field `(E_z, r E_theta, H_z, r H_theta)`, integrated
//! in `s = ln(r - a)` from a seed near the surface and matched at the outer
//! boundary to regular and outgoing cylindrical waves.
//!
//! Time dependence is `e^{-ikt}`, with `curl E = ik mu H` and
//! `curl H = -ik eps E`.

mod modes;
mod oracle;
mod traces;

pub use modes::{
    scattering_table, solve_cyl_mode, solve_cyl_mode_pec, solve_cyl_mode_shs, solve_cyl_mode_uncoated,
    transverse_wavenumber, CylMode, CylSample, CylSolution, CylState, Lining, ScatteringEntry, ScatteringRow,
    ScatteringTable, RESIDUAL_TOLERANCE,
};
pub use oracle::{bare_pec_reflection, static_pec_limit, transfer_matrix_reflection};
pub use traces::{
    axis_trace_match, axis_traces_from_free_space, cyl_angular_trace_limit, induced_surface_sources,
    jacobian_structure, AngularTraceFit, AxisTraces, AxisVerdict, JacobianStructure, SurfaceSources,
};
