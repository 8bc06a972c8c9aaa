use crate::error::{Error, Result};
use crate::geometry::{CloakPoint, CoatingSpec};
use crate::helmholtz::SolveOptions;
use crate::maxwell::Polarization;
use crate::media::principal_media;
use crate::ode::{integrate_linear_with_floor, Trajectory};
use crate::special::bessel::{cyl_deriv, cyl_i, cyl_j, cyl_k, cyl_y};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use ode_solvers::SVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Covariant tangential state `(E_z, r E_theta, H_z, r H_theta)`.
pub type CylState = [Complex64; 4];

/// Largest accepted ODE residual of an assembled solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Step in `ln(r - a)` of the residual stencils.
const STENCIL_STEP: f64 = 1e-3;

/// Relative size below which state components share the error scale of the
/// largest one. The angular components start at zero for SHS seeds and are
/// driven by cancelling products of the axial ones.
const SCALE_FLOOR: f64 = 1e-6;

/// Distances from the surface at which the residual is checked.
const CHECK_GAPS: [f64; 4] = [1e-6, 1e-3, 0.1, 0.5];

/// Condition imposed at the cloaking surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lining {
    /// Soft-and-hard surface: `E_theta = H_theta = 0`.
    Shs,
    /// Perfect conductor: `E_z = E_theta = 0`.
    Pec,
    /// Pullback of the regular vacuum solution (no lining; double coating).
    Pullback,
}

impl Lining {
    pub fn label(self) -> &'static str {
        match self {
            Lining::Shs => "shs",
            Lining::Pec => "pec",
            Lining::Pullback => "pullback",
        }
    }
}

/// Transverse wavenumber `sqrt(k^2 - beta^2)`, real positive for propagating
/// modes and positive imaginary for evanescent ones.
pub fn transverse_wavenumber(k: f64, beta: f64) -> Result<Complex64> {
    if !(k > 0.0 && k.is_finite()) || !beta.is_finite() {
        return Err(Error::domain(k, "k > 0 and finite beta"));
    }
    let g2 = k * k - beta * beta;
    if g2.abs() <= 1e-14 * k * k {
        return Err(Error::Cutoff { k, beta });
    }
    Ok(if g2 > 0.0 { Complex64::new(g2.sqrt(), 0.0) } else { Complex64::new(0.0, (-g2).sqrt()) })
}

/// Radial functions `(F, dF/dr)` of order `|n|` at radius `r`: regular and
/// outgoing (`J_n`, `H_n^(1)` of `gamma r`, or `I_n`, `K_n` of `kappa r` for
/// evanescent modes).
fn radial_functions(n: i64, gamma: Complex64, r: f64) -> [(Complex64, Complex64); 2] {
    let m = n.unsigned_abs() as usize;
    let c = |x: f64| Complex64::new(x, 0.0);
    if gamma.im == 0.0 {
        let g = gamma.re;
        let x = g * r;
        let j = cyl_j(m + 1, x);
        let y = cyl_y(m + 1, x);
        let (dj, dy) = (cyl_deriv(&j, x), cyl_deriv(&y, x));
        [(c(j[m]), c(g * dj[m])), (Complex64::new(j[m], y[m]), Complex64::new(g * dj[m], g * dy[m]))]
    } else {
        let kap = gamma.im;
        let x = kap * r;
        let i = cyl_i(m + 1, x);
        let k = cyl_k(m + 1, x);
        let di = if m == 0 { i[1] } else { i[m - 1] - m as f64 / x * i[m] };
        let dk = if m == 0 { -k[1] } else { -k[m - 1] - m as f64 / x * k[m] };
        [(c(i[m]), c(kap * di)), (c(k[m]), c(kap * dk))]
    }
}

/// Vacuum state of a TM (`H_z = 0`) or TE (`E_z = 0`) wave with radial
/// function `F`.
fn vacuum_state(
    pol: Polarization,
    n: i64,
    beta: f64,
    k: f64,
    gamma: Complex64,
    r: f64,
    f: (Complex64, Complex64),
) -> CylState {
    let g2 = gamma * gamma;
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let (f, df) = f;
    let cross = -(beta * n as f64) * f / g2;
    let drift = i * k * r * df / g2;
    match pol {
        Polarization::TM => [f, cross, zero, drift],
        Polarization::TE => [zero, -drift, f, cross],
    }
}

/// Regular and outgoing vacuum states at radius `r`, indexed
/// `[regular, outgoing][TM, TE]`.
pub(crate) fn vacuum_basis(n: i64, beta: f64, k: f64, r: f64) -> Result<[[CylState; 2]; 2]> {
    let gamma = transverse_wavenumber(k, beta)?;
    let [reg, out] = radial_functions(n, gamma, r);
    let pols = [Polarization::TM, Polarization::TE];
    Ok([
        pols.map(|p| vacuum_state(p, n, beta, k, gamma, r, reg)),
        pols.map(|p| vacuum_state(p, n, beta, k, gamma, r, out)),
    ])
}

/// `(eps_r, eps_theta, eps_z)` at a distance `gap` outside the surface; the
/// coating is impedance matched, so `mu` is equal.
pub(crate) fn cyl_media(spec: &CoatingSpec, gap: f64) -> Result<[f64; 3]> {
    Ok(principal_media(spec, &CloakPoint::exterior(gap, [1.0, 0.0, 0.0]))?.material)
}

/// Matrix `M` of `dy/dr = M y` for the covariant state in media
/// `(eps_r, eps_theta, eps_z)`, with the radial components eliminated:
/// `E_r = (-in H_z + i beta h_theta) / (ik r eps_r)`,
/// `H_r = (in E_z - i beta e_theta) / (ik r mu_r)`.
pub(crate) fn radial_matrix(n: i64, beta: f64, k: f64, r: f64, media: [f64; 3]) -> [[Complex64; 4]; 4] {
    let [er, et, ez] = media;
    let i = Complex64::i();
    let nn = n as f64;
    let z = Complex64::new(0.0, 0.0);
    let c = |x: f64| Complex64::new(x, 0.0);
    // E_r = a_hz H_z + a_ht h_theta, H_r = b_ez E_z + b_et e_theta.
    let (a_hz, a_ht) = (c(-nn / (k * r * er)), c(beta / (k * r * er)));
    let (b_ez, b_et) = (c(nn / (k * r * er)), c(-beta / (k * r * er)));
    let ik = i * k;
    [
        [z, z, i * beta * a_hz, i * beta * a_ht - ik * et / r],
        [z, z, i * nn * a_hz + ik * r * ez, i * nn * a_ht],
        [i * beta * b_ez, i * beta * b_et + ik * et / r, z, z],
        [i * nn * b_ez - ik * r * ez, i * nn * b_et, z, z],
    ]
}

fn to_real(y: &CylState) -> SVector<f64, 8> {
    SVector::<f64, 8>::from_fn(|j, _| if j % 2 == 0 { y[j / 2].re } else { y[j / 2].im })
}

fn from_real(y: &SVector<f64, 8>) -> CylState {
    std::array::from_fn(|j| Complex64::new(y[2 * j], y[2 * j + 1]))
}

/// Fields `(E, H)` in `(r, theta, z)` components from the covariant state.
pub(crate) fn physical_fields(
    n: i64,
    beta: f64,
    k: f64,
    r: f64,
    media: [f64; 3],
    y: &CylState,
) -> ([Complex64; 3], [Complex64; 3]) {
    let i = Complex64::i();
    let nn = n as f64;
    let er = media[0];
    let [ez, et, hz, ht] = *y;
    let e_r = (-i * nn * hz + i * beta * ht) / (i * k * r * er);
    let h_r = (i * nn * ez - i * beta * et) / (i * k * r * er);
    ([e_r, et / r, ez], [h_r, ht / r, hz])
}

fn check(spec: &CoatingSpec, k: f64, beta: f64) -> Result<Complex64> {
    spec.validate()?;
    if !spec.is_cylinder() {
        return Err(Error::Unsupported("cylindrical modes need a cylinder coating".into()));
    }
    transverse_wavenumber(k, beta)
}

pub(crate) fn seeds(spec: &CoatingSpec, lining: Lining, n: i64, beta: f64, k: f64, t0: f64) -> Result<[CylState; 2]> {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Ok(match lining {
        Lining::Shs => [[one, z, z, z], [z, z, one, z]],
        Lining::Pec => [[z, z, one, z], [z, z, z, one]],
        Lining::Pullback => {
            // The covariant state is invariant under the radial map, so the
            // regular vacuum state at rho0 is the seed at t0.
            let rho0 = spec.radial_map().inverse_gap(t0);
            vacuum_basis(n, beta, k, rho0)?[0]
        }
    })
}

/// Integrates one seed through `s_out` in `s = ln(r - a)`.
pub(crate) fn integrate_seed(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    seed: &CylState,
    s_out: &[f64],
    opts: &SolveOptions,
) -> Result<Trajectory<8>> {
    let a = spec.cloak_radius;
    let rhs = |s: f64, y: &SVector<f64, 8>, dy: &mut SVector<f64, 8>| {
        let t = s.exp();
        let media = cyl_media(spec, t).unwrap_or([f64::NAN; 3]);
        let m = radial_matrix(n, beta, k, a + t, media);
        let yc = from_real(y);
        for (row, mr) in m.iter().enumerate() {
            let v: Complex64 = mr.iter().zip(&yc).map(|(c, x)| c * x).sum::<Complex64>() * t;
            dy[2 * row] = v.re;
            dy[2 * row + 1] = v.im;
        }
    };
    integrate_linear_with_floor(&rhs, s_out[0], to_real(seed), s_out, &opts.tolerances, SCALE_FLOOR)
}

/// Solves `[phi_1, phi_2, -out_TM, -out_TE] x = incident` at the outer
/// boundary for both incident channels. Returns the combination weights and
/// `reflection[out][in]`.
pub(crate) fn match_exterior(
    n: i64,
    beta: f64,
    k: f64,
    outer: f64,
    phi: [CylState; 2],
) -> Result<([[Complex64; 2]; 2], [[Complex64; 2]; 2])> {
    let [reg, out] = vacuum_basis(n, beta, k, outer)?;
    let norms = phi.map(|p| p.iter().map(|v| v.norm()).fold(0.0, f64::max));
    if norms.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Integration { at: outer, reason: "degenerate seed solution".into() });
    }
    let mat = Matrix4::<Complex64>::from_fn(|row, col| match col {
        0 | 1 => phi[col][row] / norms[col],
        _ => -out[col - 2][row],
    });
    let lu = mat.lu();
    let mut weights = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut refl = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (inc, state) in reg.iter().enumerate() {
        let x = lu
            .solve(&Vector4::from_column_slice(state))
            .ok_or_else(|| Error::Inconsistent("exterior matching system is singular".into()))?;
        weights[inc] = [x[0] / norms[0], x[1] / norms[1]];
        refl[0][inc] = x[2];
        refl[1][inc] = x[3];
    }
    Ok((weights, refl))
}

/// Field sample of a cylindrical mode, components ordered `(r, theta, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylSample {
    pub r: f64,
    pub gap: f64,
    pub e: [Complex64; 3],
    pub h: [Complex64; 3],
}

/// Total field inside the coating for one incident channel, with
/// `e^{i n theta + i beta z}` dependence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylMode {
    pub n: i64,
    pub beta: f64,
    pub k: f64,
    pub gamma: Complex64,
    pub lining: Lining,
    pub incident: Polarization,
    pub samples: Vec<CylSample>,
}

/// Scattering of unit regular waves by the coated cylinder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringEntry {
    pub n: i64,
    pub beta: f64,
    pub k: f64,
    pub gamma: Complex64,
    pub lining: Lining,
    /// Outgoing amplitude `reflection[out][in]`, channels ordered TM, TE.
    pub reflection: [[Complex64; 2]; 2],
    /// Largest relative Maxwell residual of the assembled fields.
    pub residual: f64,
}

impl ScatteringEntry {
    pub fn max_abs(&self) -> f64 {
        self.reflection.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |S^H S - I|` for `S = I + 2 reflection`, which is unitary when
    /// the mode propagates and the media are lossless. `None` for evanescent
    /// modes, which carry no radial power.
    pub fn unitarity_defect(&self) -> Option<f64> {
        if self.gamma.im != 0.0 {
            return None;
        }
        let s = |i: usize, j: usize| 2.0 * self.reflection[i][j] + if i == j { 1.0 } else { 0.0 };
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let v: Complex64 = (0..2).map(|m| s(m, i).conj() * s(m, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        Some(worst)
    }
}

/// Both incident channels of one `(n, beta, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylSolution {
    pub entry: ScatteringEntry,
    pub modes: [CylMode; 2],
}

fn output_grid(spec: &CoatingSpec, opts: &SolveOptions) -> (Vec<f64>, Vec<f64>) {
    let span = spec.outer_radius - spec.cloak_radius;
    let (s0, s1) = (opts.seed_gap.ln(), span.ln());
    let n = ((s1 - s0) / opts.step).ceil().max(1.0) as usize;
    let mut s: Vec<f64> = (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect();
    s.extend(opts.extra_gaps.iter().filter(|g| **g > opts.seed_gap && **g < span).map(|g| g.ln()));
    let h = STENCIL_STEP;
    let centers: Vec<f64> =
        CHECK_GAPS.iter().map(|g| g.ln()).filter(|c| *c - 3.0 * h > s0 && *c + 3.0 * h < s1).collect();
    for c in &centers {
        s.extend((-3..=3).map(|j| c + j as f64 * h));
    }
    s.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    *s.last_mut().unwrap() = s1;
    s[0] = s0;
    (s, centers)
}

/// Relative residual of the angular and axial Maxwell equations, with radial
/// derivatives of `E_z`, `r E_theta`, `H_z`, `r H_theta` from sixth-order
/// differences in `ln(r - a)`:
/// `(curl E)_theta = i beta E_r - dE_z/dr = ik mu_theta H_theta`,
/// `(curl E)_z = (d(r E_theta)/dr - in E_r) / r = ik mu_z H_z`, and the duals.
/// Each equation is multiplied by `r - a` (a derivative in `s`) and scaled by
/// its term sizes plus the differentiated component, the roundoff floor of a
/// difference quotient in `s`.
fn residual(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    s: &[f64],
    states: &[CylState],
    centers: &[f64],
) -> Result<f64> {
    let a = spec.cloak_radius;
    let h = STENCIL_STEP;
    let weights = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let i = Complex64::i();
    let nn = n as f64;
    let mut worst: f64 = 0.0;
    for c in centers {
        let find = |x: f64| {
            s.iter()
                .position(|v| (v - x).abs() < 1e-12)
                .ok_or_else(|| Error::Inconsistent("residual stencil missing from the grid".into()))
        };
        let idx: Vec<usize> = (-3..=3).map(|j| find(c + j as f64 * h)).collect::<Result<_>>()?;
        let t = c.exp();
        let r = a + t;
        let media = cyl_media(spec, t)?;
        let [_, et, ez] = media;
        let y = states[idx[3]];
        let mut d = [Complex64::new(0.0, 0.0); 4];
        for (j, w) in weights.iter().enumerate() {
            let yj = states[idx[j]];
            for q in 0..4 {
                d[q] += yj[q] * *w;
            }
        }
        d.iter_mut().for_each(|v| *v /= 60.0 * h * t);
        let (e, hf) = physical_fields(n, beta, k, r, media, &y);
        let ik = i * k;
        // (lhs terms, rhs, differentiated component) for each equation.
        let eqs = [
            ([i * beta * e[0], -d[0]], ik * et * hf[1], y[0]),
            ([d[1] / r, -i * nn * e[0] / r], ik * ez * hf[2], y[1] / r),
            ([i * beta * hf[0], -d[2]], -ik * et * e[1], y[2]),
            ([d[3] / r, -i * nn * hf[0] / r], -ik * ez * e[2], y[3] / r),
        ];
        for (terms, rhs, own) in eqs {
            let lhs: Complex64 = terms.iter().sum();
            let scale = t * (terms.iter().map(|v| v.norm()).sum::<f64>() + rhs.norm()) + own.norm();
            if scale > 0.0 {
                worst = worst.max(t * (lhs - rhs).norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// Solves one `(n, beta, k)` mode of the coated cylinder with the given
/// surface condition, for both incident channels.
pub fn solve_cyl_mode(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    lining: Lining,
    opts: &SolveOptions,
) -> Result<CylSolution> {
    let gamma = check(spec, k, beta)?;
    let a = spec.cloak_radius;
    let span = spec.outer_radius - a;
    if !(opts.seed_gap > 0.0 && opts.seed_gap < span) {
        return Err(Error::domain(opts.seed_gap, format!("seed gap in (0, {span})")));
    }
    let (s_out, centers) = output_grid(spec, opts);
    let [s1, s2] = seeds(spec, lining, n, beta, k, opts.seed_gap)?;
    let t1 = integrate_seed(spec, n, beta, k, &s1, &s_out, opts)?;
    let t2 = integrate_seed(spec, n, beta, k, &s2, &s_out, opts)?;
    let last = s_out.len() - 1;
    let phi = [from_real(&t1.state(last)), from_real(&t2.state(last))];
    let (weights, reflection) = match_exterior(n, beta, k, spec.outer_radius, phi)?;

    let mut worst: f64 = 0.0;
    let modes = [Polarization::TM, Polarization::TE].map(|pol| {
        let w = weights[if pol == Polarization::TM { 0 } else { 1 }];
        let states: Vec<CylState> = (0..s_out.len())
            .map(|i| {
                let (p, q) = (from_real(&t1.state(i)), from_real(&t2.state(i)));
                std::array::from_fn(|c| w[0] * p[c] + w[1] * q[c])
            })
            .collect();
        let samples = s_out
            .iter()
            .zip(&states)
            .enumerate()
            .map(|(i, (s, y))| {
                let gap = if i == last { span } else { s.exp() };
                let media = cyl_media(spec, gap).unwrap_or([f64::NAN; 3]);
                let (e, h) = physical_fields(n, beta, k, a + gap, media, y);
                CylSample { r: a + gap, gap, e, h }
            })
            .collect();
        (states, CylMode { n, beta, k, gamma, lining, incident: pol, samples })
    });
    for (states, _) in &modes {
        worst = worst.max(residual(spec, n, beta, k, &s_out, states, &centers)?);
    }
    if !(worst <= RESIDUAL_TOLERANCE) {
        return Err(Error::Integration {
            at: spec.outer_radius,
            reason: format!("Maxwell residual {worst:e} exceeds {RESIDUAL_TOLERANCE:e}"),
        });
    }
    let [(_, tm), (_, te)] = modes;
    Ok(CylSolution {
        entry: ScatteringEntry { n, beta, k, gamma, lining, reflection, residual: worst },
        modes: [tm, te],
    })
}

/// Scattering of the SHS-lined single cylinder coating.
pub fn solve_cyl_mode_shs(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    opts: &SolveOptions,
) -> Result<ScatteringEntry> {
    Ok(solve_cyl_mode(spec, n, beta, k, Lining::Shs, opts)?.entry)
}

/// Scattering of the coated cylinder with a perfectly conducting lining.
pub fn solve_cyl_mode_pec(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    opts: &SolveOptions,
) -> Result<ScatteringEntry> {
    Ok(solve_cyl_mode(spec, n, beta, k, Lining::Pec, opts)?.entry)
}

/// Scattering by an uncoated vacuum cylinder of radius `outer`: the interior
/// solution is the regular wave itself, so the matching is exact.
pub fn solve_cyl_mode_uncoated(n: i64, beta: f64, k: f64, outer: f64) -> Result<ScatteringEntry> {
    let gamma = transverse_wavenumber(k, beta)?;
    if !(outer > 0.0) {
        return Err(Error::domain(outer, "outer radius > 0"));
    }
    let [reg, _] = vacuum_basis(n, beta, k, outer)?;
    let (_, reflection) = match_exterior(n, beta, k, outer, reg)?;
    Ok(ScatteringEntry { n, beta, k, gamma, lining: Lining::Pullback, reflection, residual: 0.0 })
}

/// One cell of a scattering grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringRow {
    pub n: i64,
    pub beta: f64,
    pub k: f64,
    pub entry: Option<ScatteringEntry>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringTable {
    pub lining: Lining,
    pub rows: Vec<ScatteringRow>,
}

impl ScatteringTable {
    /// Largest reflection magnitude over cells that solved.
    pub fn max_reflection(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.entry.as_ref()).map(|e| e.max_abs()).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Scattering over `n = 0..=n_max`, `beta = f k` for each fraction `f`, and
/// each `k`. Cells are independent and solved in parallel.
pub fn scattering_table(
    spec: &CoatingSpec,
    n_max: i64,
    beta_fractions: &[f64],
    k_grid: &[f64],
    lining: Lining,
    opts: &SolveOptions,
) -> Result<ScatteringTable> {
    spec.validate()?;
    if !spec.is_cylinder() {
        return Err(Error::Unsupported("cylindrical modes need a cylinder coating".into()));
    }
    let cells: Vec<(i64, f64, f64)> = (0..=n_max)
        .flat_map(|n| k_grid.iter().flat_map(move |&k| beta_fractions.iter().map(move |&f| (n, f * k, k))))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(n, beta, k)| match solve_cyl_mode(spec, n, beta, k, lining, opts) {
            Ok(sol) => ScatteringRow { n, beta, k, entry: Some(sol.entry), error: None },
            Err(e) => ScatteringRow { n, beta, k, entry: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(ScatteringTable { lining, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CoatingKind;

    fn shs() -> CoatingSpec {
        CoatingSpec::canonical(CoatingKind::SingleCylinderShs)
    }

    #[test]
    fn vacuum_states_solve_the_radial_system() {
        for (n, beta, k) in [(0, 0.0, 1.0), (2, 0.3, 1.0), (3, 1.4, 1.0), (-1, 0.5, 2.0)] {
            let r = 1.3;
            let h = 1e-4;
            for which in 0..2 {
                for pol in 0..2 {
                    let y = |x: f64| vacuum_basis(n, beta, k, x).unwrap()[which][pol];
                    let m = radial_matrix(n, beta, k, r, [1.0; 3]);
                    let (yp, ym, y0) = (y(r + h), y(r - h), y(r));
                    for row in 0..4 {
                        let fd = (yp[row] - ym[row]) / (2.0 * h);
                        let mv: Complex64 = (0..4).map(|c| m[row][c] * y0[c]).sum();
                        assert!((fd - mv).norm() < 1e-6 * (1.0 + mv.norm()), "n={n} row={row}");
                    }
                }
            }
        }
    }

    #[test]
    fn cutoff_is_rejected() {
        assert!(matches!(transverse_wavenumber(1.0, 1.0), Err(Error::Cutoff { .. })));
        assert!(matches!(solve_cyl_mode_shs(&shs(), 0, 1.0, 1.0, &SolveOptions::default()), Err(Error::Cutoff { .. })));
        let g = transverse_wavenumber(1.0, 2.0).unwrap();
        assert!(g.re == 0.0 && g.im > 0.0);
    }

    #[test]
    fn shs_lining_is_invisible() {
        let opts = SolveOptions::default();
        let e = solve_cyl_mode_shs(&shs(), 0, 0.0, 1.0, &opts).unwrap();
        assert!(e.max_abs() < 1e-8, "{:?}", e.reflection);
        for (n, f) in [(1, 0.3), (3, 0.9), (2, 1.5)] {
            let e = solve_cyl_mode_shs(&shs(), n, f * 2.0, 2.0, &opts).unwrap();
            assert!(e.max_abs() < 1e-8, "n={n}: {:?}", e.reflection);
            assert!(e.residual < RESIDUAL_TOLERANCE);
        }
    }

    #[test]
    fn uncoated_cylinder_does_not_scatter() {
        for (n, beta) in [(0, 0.0), (2, 0.3), (1, 1.5)] {
            let e = solve_cyl_mode_uncoated(n, beta, 1.0, 2.0).unwrap();
            assert!(e.max_abs() < 1e-15, "{:?}", e.reflection);
        }
    }

    #[test]
    fn pec_lining_scatters_and_conserves_flux() {
        let opts = SolveOptions::default();
        let e = solve_cyl_mode_pec(&shs(), 0, 0.3, 1.0, &opts).unwrap();
        assert!(e.max_abs() > 1e-3, "{:?}", e.reflection);
        assert!(e.max_abs() <= 1.0 + 1e-9);
        assert!(e.unitarity_defect().unwrap() < 1e-8);
    }

    #[test]
    fn pullback_seed_is_invisible() {
        let spec = CoatingSpec::canonical(CoatingKind::DoubleCylinder);
        let sol = solve_cyl_mode(&spec, 2, 0.3, 1.0, Lining::Pullback, &SolveOptions::default()).unwrap();
        assert!(sol.entry.max_abs() < 1e-8);
    }

    #[test]
    fn ball_spec_is_rejected() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        assert!(solve_cyl_mode_shs(&spec, 0, 0.0, 1.0, &SolveOptions::default()).is_err());
    }
}
