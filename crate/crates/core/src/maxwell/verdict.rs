use super::multipoles::{auto_degree, radiating_multipoles_to, MultipoleCoefficients};
use super::sources::CurrentSource;
use super::waves::{cdot, dipole_field, radial_factors, CVec3, WaveKind, ZERO3};
use super::Polarization;
use crate::error::{Error, Result};
use crate::geometry::CoatingSpec;
use crate::special::harmonics::{cross_real, lm_index, vsh_x, ylm_all};
use crate::special::quadrature::SphereRule;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Default verdict tolerance relative to the source norm.
pub const VERDICT_TOLERANCE: f64 = 1e-8;
/// Largest angular degree of the trace quadrature.
const MAX_TRACE_DEGREE: usize = 160;

/// Tangential traces on the sphere `r = radius` of the free-space field of a
/// current inside it, projected on `(X_lm, rhat x X_lm)` for `1 <= l <= l_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyTrace {
    pub radius: f64,
    pub k: f64,
    pub l_max: usize,
    /// `nu x E` components, flat-indexed by `lm_index`.
    pub tangential_e: Vec<[Complex64; 2]>,
    /// `nu x H` components, flat-indexed by `lm_index`.
    pub tangential_h: Vec<[Complex64; 2]>,
}

/// Degree needed for geometric content decaying like `ratio^l` to drop
/// below `1e-13`.
fn geometric_degree(ratio: f64) -> usize {
    if ratio <= 0.0 {
        return 0;
    }
    (-13.0 * std::f64::consts::LN_10 / ratio.ln()).ceil() as usize
}

/// Evaluates the field of the source directly, summing closed-form dipole
/// fields over its discretization, and projects `nu x E`, `nu x H` on the
/// vector harmonics with a product rule.
pub fn cauchy_trace(source: &CurrentSource, k: f64, radius: f64, l_max: usize) -> Result<CauchyTrace> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    source.validate(radius)?;
    let reach = source.reach();
    let degree = (l_max + geometric_degree(reach / radius)).min(MAX_TRACE_DEGREE);
    let points = source.discretize(k, degree);
    let rule = SphereRule::for_degree(degree);
    let size = (l_max + 1) * (l_max + 1);
    let zero = [Complex64::new(0.0, 0.0); 2];
    let partial: Vec<(Vec<[Complex64; 2]>, Vec<[Complex64; 2]>)> = rule
        .dirs
        .par_iter()
        .zip(&rule.weights)
        .map(|(d, w)| {
            let x = d.map(|u| radius * u);
            let (mut e, mut h) = (ZERO3, ZERO3);
            for p in &points {
                let (ep, hp) = dipole_field(x, p.x, p.j, k);
                for c in 0..3 {
                    e[c] += ep[c];
                    h[c] += hp[c];
                }
            }
            let (ne, nh) = (cross_real(*d, e), cross_real(*d, h));
            let table = ylm_all(l_max, *d);
            let mut te = vec![zero; size];
            let mut th = vec![zero; size];
            for l in 1..=l_max {
                for m in -(l as i64)..=(l as i64) {
                    let xv: CVec3 = vsh_x(&table, l, m);
                    let rx = cross_real(*d, xv);
                    let i = lm_index(l, m);
                    te[i] = [cdot(&xv, &ne) * w, cdot(&rx, &ne) * w];
                    th[i] = [cdot(&xv, &nh) * w, cdot(&rx, &nh) * w];
                }
            }
            (te, th)
        })
        .collect();
    let mut tangential_e = vec![zero; size];
    let mut tangential_h = vec![zero; size];
    for (te, th) in partial {
        for i in 0..size {
            for c in 0..2 {
                tangential_e[i][c] += te[i][c];
                tangential_h[i][c] += th[i][c];
            }
        }
    }
    Ok(CauchyTrace { radius, k, l_max, tangential_e, tangential_h })
}

impl CauchyTrace {
    /// Outgoing amplitudes implied by the traces. Outside the support
    /// `nu x E = -k^2 sum (a_TE h_l rhat x X - a_TM (x h_l)'/x X)` and
    /// `nu x H = ik^2 sum (a_TM h_l rhat x X - a_TE (x h_l)'/x X)`.
    /// Returns the amplitudes recovered from `E` and from `H`.
    pub fn implied_multipoles(&self) -> (MultipoleCoefficients, MultipoleCoefficients) {
        let k = self.k;
        let radial = radial_factors(WaveKind::Outgoing, self.l_max, k * self.radius);
        let size = self.tangential_e.len();
        let zero = Complex64::new(0.0, 0.0);
        let (mut te_e, mut tm_e, mut te_h, mut tm_h) =
            (vec![zero; size], vec![zero; size], vec![zero; size], vec![zero; size]);
        let ik2 = Complex64::new(0.0, k * k);
        for l in 1..=self.l_max {
            let [h, _, b] = radial[l];
            for m in -(l as i64)..=(l as i64) {
                let i = lm_index(l, m);
                let [ex, erx] = self.tangential_e[i];
                let [hx, hrx] = self.tangential_h[i];
                te_e[i] = -erx / (k * k * h);
                tm_e[i] = ex / (k * k * b);
                te_h[i] = -hx / (ik2 * b);
                tm_h[i] = hrx / (ik2 * h);
            }
        }
        (
            MultipoleCoefficients::from_tables(k, self.l_max, &te_e, &tm_e),
            MultipoleCoefficients::from_tables(k, self.l_max, &te_h, &tm_h),
        )
    }
}

/// A mode label `(l, m, polarization)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeLabel {
    pub l: usize,
    pub m: i64,
    pub polarization: Polarization,
}

/// Existence of a finite-energy solution for an internal current under the
/// single coating.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub exists_finite_energy: bool,
    pub offending_modes: Vec<ModeLabel>,
    /// Largest amplitude over all modes and both criteria, relative to the
    /// source norm (absolute when the source norm is zero).
    pub norms: f64,
    pub multipole_norm: f64,
    pub trace_norm: f64,
    pub source_norm: f64,
    pub tolerance: f64,
    pub multipoles: MultipoleCoefficients,
}

fn offending(c: &MultipoleCoefficients, threshold: f64) -> Vec<ModeLabel> {
    let mut v: Vec<ModeLabel> =
        c.above(threshold).into_iter().map(|e| ModeLabel { l: e.l, m: e.m, polarization: e.polarization }).collect();
    v.sort();
    v
}

/// Decides whether the current admits a finite-energy solution, by two
/// independent routes: multipole integrals against regular waves, and the
/// tangential traces on the cloaking surface of the directly evaluated field.
/// Both must agree on the offending modes.
pub fn single_coating_verdict(spec: &CoatingSpec, source: &CurrentSource, k: f64, tol: f64) -> Result<Verdict> {
    spec.validate()?;
    if spec.is_cylinder() {
        return Err(Error::Unsupported("the multipole verdict needs a ball coating".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(tol, "tol > 0"));
    }
    let a = spec.cloak_radius;
    source.validate(a)?;
    let l_max = auto_degree(k, source.reach());
    let multipoles = radiating_multipoles_to(source, k, l_max)?;
    let trace = cauchy_trace(source, k, a, l_max)?;
    let (from_e, from_h) = trace.implied_multipoles();

    let source_norm = source.norm(k);
    let scale = if source_norm > 0.0 { source_norm } else { 1.0 };
    let threshold = tol * scale;
    let by_multipole = offending(&multipoles, threshold);
    let mut by_trace = offending(&from_e, threshold);
    by_trace.extend(offending(&from_h, threshold));
    by_trace.sort();
    by_trace.dedup();
    if by_multipole != by_trace {
        return Err(Error::Inconsistent(format!(
            "multipole route flags {} modes, trace route flags {}",
            by_multipole.len(),
            by_trace.len()
        )));
    }
    let multipole_norm = multipoles.max_abs() / scale;
    let trace_norm = from_e.max_abs().max(from_h.max_abs()) / scale;
    Ok(Verdict {
        exists_finite_energy: by_multipole.is_empty(),
        offending_modes: by_multipole,
        norms: multipole_norm.max(trace_norm),
        multipole_norm,
        trace_norm,
        source_norm,
        tolerance: tol,
        multipoles,
    })
}

impl Polarization {
    pub fn label(self) -> &'static str {
        match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        }
    }
}
