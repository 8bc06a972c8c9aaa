//! Surface traces of cylindrical modes.

use super::modes::{solve_cyl_mode, CylMode, Lining};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::geometry::{jacobian, local_frame, CloakPoint, CoatingSpec};
use crate::helmholtz::SolveOptions;
use crate::maxwell::Polarization;
use num_complex::Complex64;
use serde::Serialize;

/// Axial field components along the axis curves of the two sides of a
/// double cylinder coating, on a common `z` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisTraces {
    pub z: Vec<f64>,
    pub be1: Vec<Complex64>,
    pub bh1: Vec<Complex64>,
    pub be2: Vec<Complex64>,
    pub bh2: Vec<Complex64>,
}

impl AxisTraces {
    pub fn new(
        z: Vec<f64>,
        be1: Vec<Complex64>,
        bh1: Vec<Complex64>,
        be2: Vec<Complex64>,
        bh2: Vec<Complex64>,
    ) -> Result<Self> {
        let n = z.len();
        if n == 0 || [be1.len(), bh1.len(), be2.len(), bh2.len()].iter().any(|&m| m != n) {
            return Err(Error::domain(n as f64, "non-empty traces on a common z grid"));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(f64::NAN, "strictly increasing z grid"));
        }
        Ok(Self { z, be1, bh1, be2, bh2 })
    }

    /// Electric and magnetic jumps `b_1 - b_2`.
    pub fn jumps(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let d = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        (d(&self.be1, &self.be2), d(&self.bh1, &self.bh2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisVerdict {
    pub compatible: bool,
    pub sup_e: f64,
    pub sup_h: f64,
    /// Jump profiles `b_1 - b_2`, reported when incompatible.
    pub mismatch_e: Option<Vec<Complex64>>,
    pub mismatch_h: Option<Vec<Complex64>>,
}

/// A finite-energy solution of the double cylinder exists only when the
/// axial traces of both sides agree.
pub fn axis_trace_match(traces: &AxisTraces, tol: f64) -> AxisVerdict {
    let (de, dh) = traces.jumps();
    let sup = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (sup_e, sup_h) = (sup(&de), sup(&dh));
    let compatible = sup_e < tol && sup_h < tol;
    AxisVerdict {
        compatible,
        sup_e,
        sup_h,
        mismatch_e: (!compatible).then_some(de),
        mismatch_h: (!compatible).then_some(dh),
    }
}

/// Surface sources on the cloaking surface that absorb a trace mismatch.
///
/// With outward normal `rhat`, `rhat x (zhat b) = -b thetahat`, so the
/// profiles are the angular coefficients `-(b_1 - b_2)`. The amplitudes are
/// their projections onto `e^{i beta z}` (trapezoidal mean over the grid).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceSources {
    pub beta: f64,
    pub s_e: Complex64,
    pub s_h: Complex64,
    pub profile_e: Vec<Complex64>,
    pub profile_h: Vec<Complex64>,
}

pub fn induced_surface_sources(mismatch: &AxisTraces, mode: &CylMode) -> SurfaceSources {
    let (de, dh) = mismatch.jumps();
    let profile_e: Vec<Complex64> = de.iter().map(|v| -v).collect();
    let profile_h: Vec<Complex64> = dh.iter().map(|v| -v).collect();
    let z = &mismatch.z;
    let weights: Vec<f64> = if z.len() == 1 {
        vec![1.0]
    } else {
        (0..z.len())
            .map(|i| {
                let left = if i > 0 { z[i] - z[i - 1] } else { 0.0 };
                let right = if i + 1 < z.len() { z[i + 1] - z[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    };
    let total: f64 = weights.iter().sum();
    let project = |p: &[Complex64]| -> Complex64 {
        p.iter()
            .zip(z)
            .zip(&weights)
            .map(|((v, zi), w)| v * Complex64::from_polar(1.0, -mode.beta * zi) * *w)
            .sum::<Complex64>()
            / total
    };
    SurfaceSources { beta: mode.beta, s_e: project(&profile_e), s_h: project(&profile_h), profile_e, profile_h }
}

/// Behaviour of a mode as it approaches the cloaking surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularTraceFit {
    pub gaps: Vec<f64>,
    /// `|E_theta|` at each gap.
    pub angular: Vec<f64>,
    /// Log-log slope of `|E_theta|`; `None` when the field vanishes.
    pub slope: Option<f64>,
    /// Extrapolated surface limits of `E_z` and `H_z`.
    pub zeta_e: Complex64,
    pub zeta_h: Complex64,
    /// Largest distance of `E_z`, `H_z` at gap `1e-6` from those limits,
    /// relative to the largest axial field of the mode.
    pub zeta_deviation: f64,
    pub degenerate: bool,
}

/// Fits `|E_theta|` against the distance to the surface over
/// `1e-6 <= r - a <= 1e-2` and extrapolates the axial components to the
/// surface linearly from the two innermost samples.
pub fn cyl_angular_trace_limit(mode: &CylMode) -> Result<AngularTraceFit> {
    let inner = mode.samples.first().map(|s| s.gap).unwrap_or(f64::INFINITY);
    if inner > 1e-6 * (1.0 + 1e-9) {
        return Err(Error::domain(inner, "mode solved down to a distance of 1e-6"));
    }
    let window: Vec<_> = mode.samples.iter().filter(|s| s.gap >= 1e-6 * (1.0 - 1e-9) && s.gap <= 1e-2).collect();
    let gaps: Vec<f64> = window.iter().map(|s| s.gap).collect();
    let angular: Vec<f64> = window.iter().map(|s| s.e[1].norm()).collect();
    let slope = loglog_slope(&gaps, &angular);
    let (a, b) = (&mode.samples[0], &mode.samples[1]);
    let extrapolate = |fa: Complex64, fb: Complex64| fa - (fb - fa) * (a.gap / (b.gap - a.gap));
    let zeta_e = extrapolate(a.e[2], b.e[2]);
    let zeta_h = extrapolate(a.h[2], b.h[2]);
    let scale = mode.samples.iter().map(|s| s.e[2].norm().max(s.h[2].norm())).fold(0.0, f64::max);
    let at = mode
        .samples
        .iter()
        .min_by(|x, y| (x.gap.ln() - 1e-6f64.ln()).abs().partial_cmp(&(y.gap.ln() - 1e-6f64.ln()).abs()).unwrap())
        .unwrap();
    let zeta_deviation =
        if scale > 0.0 { (at.e[2] - zeta_e).norm().max((at.h[2] - zeta_h).norm()) / scale } else { 0.0 };
    let degenerate = slope.is_none() || angular.iter().all(|v| *v == 0.0);
    Ok(AngularTraceFit {
        gaps,
        angular,
        slope: if degenerate { None } else { slope },
        zeta_e,
        zeta_h,
        zeta_deviation,
        degenerate,
    })
}

/// Axis traces of one free-space mode `n = 0` with axial amplitudes
/// `(E_z, H_z) = amplitudes` on the axis. Side 1 is the surface limit of the
/// numerically solved exterior of the double coating; side 2 is the axis
/// value of the same free-space solution on the interior side.
pub fn axis_traces_from_free_space(
    spec: &CoatingSpec,
    beta: f64,
    k: f64,
    amplitudes: (Complex64, Complex64),
    z: &[f64],
    opts: &SolveOptions,
) -> Result<AxisTraces> {
    let sol = solve_cyl_mode(spec, 0, beta, k, Lining::Pullback, opts)?;
    let mut limit = [Complex64::new(0.0, 0.0); 2];
    for mode in &sol.modes {
        let fit = cyl_angular_trace_limit(mode)?;
        let amp = if mode.incident == Polarization::TM { amplitudes.0 } else { amplitudes.1 };
        limit[0] += amp * fit.zeta_e;
        limit[1] += amp * fit.zeta_h;
    }
    let wave =
        |c: Complex64| -> Vec<Complex64> { z.iter().map(|zi| c * Complex64::from_polar(1.0, beta * zi)).collect() };
    AxisTraces::new(z.to_vec(), wave(limit[0]), wave(limit[1]), wave(amplitudes.0), wave(amplitudes.1))
}

/// Block structure of the inverse cylinder map's Jacobian in the frame
/// `(rhat, thetahat, zhat)` at boundary-layer points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianStructure {
    /// Largest off-diagonal frame entry.
    pub max_cross: f64,
    /// Largest `thetahat . DF^{-1} thetahat / (r - a)`.
    pub max_angular_over_gap: f64,
    /// Largest `|zhat . DF^{-1} zhat - 1|`.
    pub max_axial_deviation: f64,
}

pub fn jacobian_structure(spec: &CoatingSpec, gaps: &[f64], angles: &[f64]) -> Result<JacobianStructure> {
    if !spec.is_cylinder() {
        return Err(Error::Unsupported("cylinder Jacobian structure needs a cylinder coating".into()));
    }
    let mut out = JacobianStructure { max_cross: 0.0, max_angular_over_gap: 0.0, max_axial_deviation: 0.0 };
    for &gap in gaps {
        for &phi in angles {
            let point = CloakPoint::exterior(gap, [phi.cos(), phi.sin(), 0.0]);
            let jac = jacobian(spec, &point)?;
            let q = local_frame(spec, &point);
            let m = q.transpose() * jac.matrix * q;
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        out.max_cross = out.max_cross.max(m[(i, j)].abs());
                    }
                }
            }
            out.max_angular_over_gap = out.max_angular_over_gap.max(m[(1, 1)] / gap);
            out.max_axial_deviation = out.max_axial_deviation.max((m[(2, 2)] - 1.0).abs());
        }
    }
    Ok(out)
}
