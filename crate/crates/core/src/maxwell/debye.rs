use super::Polarization;
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::geometry::{CloakPoint, CoatingSpec};
use crate::helmholtz::{shell_report, EnergyReport, SolveOptions};
use crate::media::principal_media;
use crate::ode::{integrate_linear, Trajectory};
use crate::special::bessel::riccati_psi;
use num_complex::Complex64;
use ode_solvers::SVector;
use rayon::prelude::*;
use serde::Serialize;

/// Radial and tangential permittivity and permeability at a distance `gap`
/// outside the surface: `(eps_r, eps_t, mu_r, mu_t)`.
fn exterior_media(spec: &CoatingSpec, gap: f64) -> Result<[f64; 4]> {
    let m = principal_media(spec, &CloakPoint::exterior(gap, [1.0, 0.0, 0.0]))?;
    Ok([m.material[0], m.material[1], m.material[0], m.material[1]])
}

/// Coefficients of the Debye equation `(u'/a)' = (L / (r^2 b) - k^2 c) u` for
/// a polarization: TM uses `(a, b, c) = (eps_t, eps_r, mu_t)`, TE the dual.
fn debye_coefficients(media: [f64; 4], pol: Polarization) -> (f64, f64, f64) {
    let [er, et, mr, mt] = media;
    match pol {
        Polarization::TM => (et, er, mt),
        Polarization::TE => (mt, mr, et),
    }
}

fn check(spec: &CoatingSpec, l: usize, k: f64) -> Result<()> {
    spec.validate()?;
    if spec.is_cylinder() {
        return Err(Error::Unsupported("spherical multipoles need a ball coating".into()));
    }
    if l == 0 {
        return Err(Error::domain(0.0, "l >= 1 (no monopole Maxwell field)"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    Ok(())
}

/// Integrates `(u, v = u'/a)` in `s = ln(r - a)` through `s_out`.
fn integrate(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    pol: Polarization,
    s0: f64,
    y0: SVector<f64, 2>,
    s_out: &[f64],
    opts: &SolveOptions,
) -> Result<Trajectory<2>> {
    let ell = (l * (l + 1)) as f64;
    let a = spec.cloak_radius;
    let rhs = |s: f64, y: &SVector<f64, 2>, dy: &mut SVector<f64, 2>| {
        let t = s.exp();
        let r = a + t;
        let (ca, cb, cc) = match exterior_media(spec, t) {
            Ok(m) => debye_coefficients(m, pol),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        dy[0] = t * ca * y[1];
        dy[1] = t * (ell / (r * r * cb) - k * k * cc) * y[0];
    };
    integrate_linear(&rhs, s0, y0, s_out, &opts.tolerances)
}

/// Pullback of the regular vacuum potential `psi_l(k rho)` at distance `t0`.
fn pullback_seed(spec: &CoatingSpec, l: usize, k: f64, pol: Polarization, t0: f64) -> Result<SVector<f64, 2>> {
    let map = spec.radial_map();
    let rho = map.inverse_gap(t0);
    let (psi, dpsi) = riccati_psi(l, k * rho);
    let (ca, _, _) = debye_coefficients(exterior_media(spec, t0)?, pol);
    Ok(SVector::<f64, 2>::new(psi, k * dpsi / map.derivative(rho) / ca))
}

/// Field coefficients at one radius. Components are ordered
/// `(Y_lm rhat, X_lm, rhat x X_lm)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub r: f64,
    pub gap: f64,
    pub u: f64,
    pub v: f64,
    pub e: [Complex64; 3],
    pub h: [Complex64; 3],
    /// `(eps_r, eps_t, mu_r, mu_t)`.
    pub media: [f64; 4],
}

/// An exterior Maxwell mode of the coated ball built from its Debye
/// potential.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxwellMode {
    pub l: usize,
    pub k: f64,
    pub polarization: Polarization,
    pub samples: Vec<FieldSample>,
}

/// Fields from the potential. TM: `H = u/r X`, `E_r = -sqrt(L) u / (k r^2 eps_r)`,
/// `E_t = i v / (k r) rhat x X`. TE is the dual with `E = u/r X`.
pub(crate) fn fields(
    l: usize,
    k: f64,
    pol: Polarization,
    r: f64,
    u: f64,
    v: f64,
    media: [f64; 4],
) -> ([Complex64; 3], [Complex64; 3]) {
    let root = ((l * (l + 1)) as f64).sqrt();
    let c = |x: f64| Complex64::new(x, 0.0);
    let [er, _, mr, _] = media;
    match pol {
        Polarization::TM => {
            ([c(-root * u / (k * r * r * er)), c(0.0), Complex64::new(0.0, v / (k * r))], [c(0.0), c(u / r), c(0.0)])
        }
        Polarization::TE => {
            ([c(0.0), c(u / r), c(0.0)], [c(root * u / (k * r * r * mr)), c(0.0), Complex64::new(0.0, -v / (k * r))])
        }
    }
}

fn output_grid(spec: &CoatingSpec, opts: &SolveOptions) -> Vec<f64> {
    let span = spec.outer_radius - spec.cloak_radius;
    let (s0, s1) = (opts.seed_gap.ln(), span.ln());
    let n = ((s1 - s0) / opts.step).ceil().max(1.0) as usize;
    let mut s: Vec<f64> = (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect();
    s.extend(opts.extra_gaps.iter().filter(|g| **g > opts.seed_gap && **g < span).map(|g| g.ln()));
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    *s.last_mut().unwrap() = s1;
    s[0] = s0;
    s
}

/// Exterior mode integrated outward from the pullback seed.
pub fn solve_maxwell_mode(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    pol: Polarization,
    opts: &SolveOptions,
) -> Result<MaxwellMode> {
    check(spec, l, k)?;
    let a = spec.cloak_radius;
    let span = spec.outer_radius - a;
    if !(opts.seed_gap > 0.0 && opts.seed_gap < span) {
        return Err(Error::domain(opts.seed_gap, format!("seed gap in (0, {span})")));
    }
    let s_out = output_grid(spec, opts);
    let y0 = pullback_seed(spec, l, k, pol, opts.seed_gap)?;
    let traj = integrate(spec, l, k, pol, s_out[0], y0, &s_out, opts)?;
    let mut samples = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let gap = if i + 1 == traj.len() { span } else { traj.x[i].exp() };
        let y = traj.state(i);
        let media = exterior_media(spec, gap)?;
        let r = a + gap;
        let (e, h) = fields(l, k, pol, r, y[0], y[1], media);
        samples.push(FieldSample { r, gap, u: y[0], v: y[1], e, h, media });
    }
    Ok(MaxwellMode { l, k, polarization: pol, samples })
}

/// Admittance `Y` with `H_tan = Y rhat x E_tan` from boundary values of the
/// potential: `ik u / v` for TM and `v / (ik u)` for TE.
fn admittance_from(k: f64, pol: Polarization, u: f64, v: f64) -> Option<Complex64> {
    let ik = Complex64::new(0.0, k);
    let y = match pol {
        Polarization::TM => ik * u / v,
        Polarization::TE => v / (ik * u),
    };
    y.is_finite().then_some(y)
}

/// Admittance of the vacuum ball of radius `R` for the regular field:
/// `i psi_l / psi_l'` (TM) and `-i psi_l' / psi_l` (TE) at `kR`.
pub fn vacuum_admittance(l: usize, k: f64, outer_radius: f64, pol: Polarization) -> Result<Complex64> {
    if l == 0 {
        return Err(Error::domain(0.0, "l >= 1"));
    }
    let (psi, dpsi) = riccati_psi(l, k * outer_radius);
    admittance_from(k, pol, psi, k * dpsi).ok_or(Error::DirichletResonance { l, k })
}

/// Admittance at the outer boundary of the coated ball, integrating the
/// Debye equation outward from the pullback seed near the surface.
pub fn double_coating_admittance(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    pol: Polarization,
    opts: &SolveOptions,
) -> Result<Complex64> {
    let lean = SolveOptions { extra_gaps: Vec::new(), ..opts.clone() };
    let mode = solve_maxwell_mode(spec, l, k, pol, &lean)?;
    let last = mode.samples.last().expect("mode has samples");
    admittance_from(k, pol, last.u, last.v).ok_or(Error::DirichletResonance { l, k })
}

/// The same admittance computed inward: two solutions are integrated from
/// the outer boundary down to the seed distance, and the combination whose
/// logarithmic derivative there matches the finite-energy branch gives the
/// boundary data.
pub fn admittance_inward(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    pol: Polarization,
    opts: &SolveOptions,
) -> Result<Complex64> {
    check(spec, l, k)?;
    let span = spec.outer_radius - spec.cloak_radius;
    let (s0, s1) = (opts.seed_gap.ln(), span.ln());
    let target = [s0];
    let y1 = integrate(spec, l, k, pol, s1, SVector::<f64, 2>::new(1.0, 0.0), &target, opts)?.state(0);
    let y2 = integrate(spec, l, k, pol, s1, SVector::<f64, 2>::new(0.0, 1.0), &target, opts)?.state(0);
    let seed = pullback_seed(spec, l, k, pol, opts.seed_gap)?;
    let ratio = seed[1] / seed[0];
    let c1 = -(y2[1] - ratio * y2[0]);
    let c2 = y1[1] - ratio * y1[0];
    admittance_from(k, pol, c1, c2).ok_or(Error::DirichletResonance { l, k })
}

/// One `(l, k, polarization)` cell of the admittance comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmittanceRow {
    pub l: usize,
    pub k: f64,
    pub polarization: Polarization,
    pub cloaked: Complex64,
    pub vacuum: Complex64,
    pub rel_discrepancy: f64,
    /// Relative difference between the outward and inward computations.
    pub reciprocity: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmittanceTable {
    pub rows: Vec<AdmittanceRow>,
}

impl AdmittanceTable {
    pub fn max_discrepancy(&self) -> f64 {
        self.rows.iter().filter(|r| r.error.is_none()).map(|r| r.rel_discrepancy).fold(0.0, f64::max)
    }

    pub fn max_reciprocity(&self) -> f64 {
        self.rows.iter().filter(|r| r.error.is_none()).map(|r| r.reciprocity).fold(0.0, f64::max)
    }
}

/// Cloaked versus vacuum admittances for `1 <= l <= l_max`, both
/// polarizations and every `k`, solved in parallel.
pub fn admittance_table(
    spec: &CoatingSpec,
    l_max: usize,
    k_grid: &[f64],
    opts: &SolveOptions,
) -> Result<AdmittanceTable> {
    check(spec, 1, 1.0)?;
    let cells: Vec<(usize, f64, Polarization)> = (1..=l_max)
        .flat_map(|l| k_grid.iter().flat_map(move |&k| [Polarization::TE, Polarization::TM].map(|p| (l, k, p))))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(l, k, pol)| {
            let nan = Complex64::new(f64::NAN, f64::NAN);
            let mut row = AdmittanceRow {
                l,
                k,
                polarization: pol,
                cloaked: nan,
                vacuum: nan,
                rel_discrepancy: f64::NAN,
                reciprocity: f64::NAN,
                error: None,
            };
            let res = (|| -> Result<()> {
                row.vacuum = vacuum_admittance(l, k, spec.outer_radius, pol)?;
                row.cloaked = double_coating_admittance(spec, l, k, pol, opts)?;
                row.rel_discrepancy = (row.cloaked - row.vacuum).norm() / row.vacuum.norm();
                let inward = admittance_inward(spec, l, k, pol, opts)?;
                row.reciprocity = (row.cloaked - inward).norm() / row.cloaked.norm();
                Ok(())
            })();
            if let Err(e) = res {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();
    Ok(AdmittanceTable { rows })
}

/// Tangential and normal electric field magnitudes of an exterior mode at
/// the requested distances, with the fitted log-log slope of the tangential
/// part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub gaps: Vec<f64>,
    pub tangential: Vec<f64>,
    pub normal: Vec<f64>,
    /// `None` when the field vanishes.
    pub slope: Option<f64>,
}

/// Decay of `|nu x E|` toward the surface. The `l = 1` TM mode carries the
/// slowest decay, linear in the distance; TE modes and higher degrees decay
/// faster.
pub fn angular_decay(spec: &CoatingSpec, l: usize, k: f64, pol: Polarization, gaps: &[f64]) -> Result<DecayFit> {
    let opts = SolveOptions { extra_gaps: gaps.to_vec(), ..SolveOptions::default() };
    let mode = solve_maxwell_mode(spec, l, k, pol, &opts)?;
    let mut tangential = Vec::new();
    let mut normal = Vec::new();
    let mut snapped = Vec::new();
    for &g in gaps {
        let s = mode
            .samples
            .iter()
            .min_by(|a, b| (a.gap.ln() - g.ln()).abs().partial_cmp(&(b.gap.ln() - g.ln()).abs()).unwrap())
            .expect("mode has samples");
        snapped.push(s.gap);
        tangential.push((s.e[1].norm_sqr() + s.e[2].norm_sqr()).sqrt());
        normal.push(s.e[0].norm());
    }
    let slope = loglog_slope(&snapped, &tangential);
    Ok(DecayFit { gaps: snapped, tangential, normal, slope })
}

/// Weighted `L^2` norm of `(E, H)` on shrinking shells, per unit solid angle:
/// density `r^2 (eps_r |E_r|^2 + eps_t |E_t|^2 + mu_r |H_r|^2 + mu_t |H_t|^2)`.
pub fn maxwell_energy_near_sigma(mode: &MaxwellMode, shells: &[f64]) -> Result<EnergyReport> {
    let min_gap = mode.samples.first().map(|s| s.gap).unwrap_or(f64::INFINITY);
    let mut shells = shells.to_vec();
    shells.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if let Some(&d) = shells.last() {
        if d < min_gap * (1.0 - 1e-12) {
            return Err(Error::domain(d, format!("shell radius >= innermost sample {min_gap:e}")));
        }
    }
    let mut s = Vec::with_capacity(mode.samples.len());
    let mut dens = Vec::with_capacity(mode.samples.len());
    for x in &mode.samples {
        let [er, et, mr, mt] = x.media;
        let e = er * x.e[0].norm_sqr() + et * (x.e[1].norm_sqr() + x.e[2].norm_sqr());
        let h = mr * x.h[0].norm_sqr() + mt * (x.h[1].norm_sqr() + x.h[2].norm_sqr());
        s.push(x.gap.ln());
        dens.push(x.gap * x.r * x.r * (e + h));
    }
    let gaps: Vec<f64> = mode.samples.iter().map(|x| x.gap).collect();
    Ok(shell_report(&s, &gaps, &dens, &dens, &shells))
}

/// Relative residual of the first-order system `curl E = ik mu H`,
/// `curl H = -ik eps E` in the mode representation at the given distances,
/// with radial derivatives of the assembled fields taken by sixth-order
/// differences in `ln(r - a)`.
///
/// For `F = f_r Y rhat + f_x X + f_t rhat x X`:
/// `curl F = i sqrt(L) f_x / r Y rhat - (i sqrt(L) f_r + (r f_t)') / r X + (r f_x)' / r rhat x X`.
pub fn debye_residual(spec: &CoatingSpec, l: usize, k: f64, pol: Polarization, check_gaps: &[f64]) -> Result<f64> {
    check(spec, l, k)?;
    let opts = SolveOptions::default();
    let h = 1e-3;
    let s_min = opts.seed_gap.ln() + 3.0 * h;
    let s_max = (spec.outer_radius - spec.cloak_radius).ln() - 3.0 * h;
    let mut centers: Vec<f64> = check_gaps.iter().map(|g| g.ln()).filter(|s| *s > s_min && *s < s_max).collect();
    centers.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if centers.is_empty() {
        return Err(Error::domain(f64::NAN, "no check point inside the integration range"));
    }
    let mut s_out = vec![opts.seed_gap.ln()];
    s_out.extend(centers.iter().flat_map(|c| (-3..=3).map(move |j| c + j as f64 * h)));
    let y0 = pullback_seed(spec, l, k, pol, opts.seed_gap)?;
    let traj = integrate(spec, l, k, pol, s_out[0], y0, &s_out, &opts)?;
    let a = spec.cloak_radius;
    let root = ((l * (l + 1)) as f64).sqrt();
    let i = Complex64::i();
    let weights = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let mut worst: f64 = 0.0;
    for (ci, c) in centers.iter().enumerate() {
        let base = 1 + 7 * ci;
        let mut stencil = Vec::with_capacity(7);
        for j in 0..7 {
            let t = traj.x[base + j].exp();
            let y = traj.state(base + j);
            let media = exterior_media(spec, t)?;
            stencil.push((a + t, fields(l, k, pol, a + t, y[0], y[1], media)));
        }
        let t = c.exp();
        let r = a + t;
        let media = exterior_media(spec, t)?;
        let [er, et, mr, mt] = media;
        let (e, hf) = stencil[3].1;
        let deriv = |f: &dyn Fn(&(f64, ([Complex64; 3], [Complex64; 3]))) -> Complex64| {
            let s: Complex64 = stencil.iter().zip(&weights).map(|(p, w)| f(p) * *w).sum();
            s / (60.0 * h * t)
        };
        let d_re_t = deriv(&|p| p.0 * p.1 .0[2]);
        let d_re_x = deriv(&|p| p.0 * p.1 .0[1]);
        let d_rh_t = deriv(&|p| p.0 * p.1 .1[2]);
        let d_rh_x = deriv(&|p| p.0 * p.1 .1[1]);
        // Each curl component with the summed size of its terms.
        let curl = |f: [Complex64; 3], d_rt: Complex64, d_rx: Complex64| {
            let (a, b) = (i * root * f[0] / r, d_rt / r);
            [
                (i * root * f[1] / r, (root * f[1] / r).norm()),
                (-(a + b), a.norm() + b.norm()),
                (d_rx / r, (d_rx / r).norm()),
            ]
        };
        let ce = curl(e, d_re_t, d_re_x);
        let ch = curl(hf, d_rh_t, d_rh_x);
        let ik = i * k;
        let want_e = [ik * mr * hf[0], ik * mt * hf[1], ik * mt * hf[2]];
        let want_h = [-ik * er * e[0], -ik * et * e[1], -ik * et * e[2]];
        for c in 0..3 {
            for ((lhs, size), rhs) in [(ce[c], want_e[c]), (ch[c], want_h[c])] {
                let scale = size + rhs.norm();
                if scale > 0.0 {
                    worst = worst.max((lhs - rhs).norm() / scale);
                }
            }
        }
    }
    Ok(worst)
}
