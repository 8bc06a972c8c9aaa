use super::{Conormal, ModeBranch, ModeSample, RadialCoefficients, RadialMode, Seed};
use crate::error::{Error, Result};
use crate::geometry::{Branch, CoatingSpec};
use crate::ode::{integrate_linear, Tolerances, Trajectory};
use crate::special::bessel::sph_j_with_deriv;
use ode_solvers::SVector;
use serde::Serialize;

/// Controls for exterior mode integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Distance from the surface at which integration starts.
    pub seed_gap: f64,
    pub tolerances: Tolerances,
    /// Output spacing in `s = ln(r - a)`.
    pub step: f64,
    /// Additional distances at which samples are recorded.
    pub extra_gaps: Vec<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { seed_gap: 1e-8, tolerances: Tolerances::default(), step: 0.05, extra_gaps: vec![1e-6] }
    }
}

fn seed_state(coeffs: &RadialCoefficients, k: f64, seed: Seed, t0: f64) -> Result<SVector<f64, 2>> {
    Ok(match seed {
        Seed::PullbackRegular => {
            let map = coeffs.spec.radial_map();
            let rho0 = map.inverse_gap(t0);
            let (j, jd) = sph_j_with_deriv(coeffs.l, k * rho0);
            let du_dr = k * jd / map.derivative(rho0);
            let c = coeffs.at(Branch::Exterior, t0)?;
            SVector::<f64, 2>::new(j, c.p * du_dr)
        }
        Seed::UnitDirichlet => SVector::<f64, 2>::new(0.0, 1.0),
        Seed::NeumannLining => SVector::<f64, 2>::new(1.0, 0.0),
    })
}

/// Integrates the exterior mode in `s = ln(r - a)` through `s_out`.
fn integrate_exterior(
    coeffs: &RadialCoefficients,
    k: f64,
    seed: Seed,
    opts: &SolveOptions,
    s_out: &[f64],
) -> Result<Trajectory<2>> {
    let ell = coeffs.ell();
    let rhs = |s: f64, y: &SVector<f64, 2>, dy: &mut SVector<f64, 2>| {
        let t = s.exp();
        let c = coeffs.at_or_nan(Branch::Exterior, t);
        dy[0] = t * y[1] / c.p;
        dy[1] = t * (ell * c.q - k * k * c.w) * y[0];
    };
    let y0 = seed_state(coeffs, k, seed, opts.seed_gap)?;
    integrate_linear(&rhs, opts.seed_gap.ln(), y0, s_out, &opts.tolerances)
}

fn check_inputs(spec: &CoatingSpec, k: f64, opts: &SolveOptions) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    let span = spec.outer_radius - spec.cloak_radius;
    if !(opts.seed_gap > 0.0 && opts.seed_gap < span) {
        return Err(Error::domain(opts.seed_gap, format!("seed gap in (0, {span})")));
    }
    Ok(())
}

/// Exterior mode with default options.
pub fn solve_exterior_mode(spec: &CoatingSpec, l: usize, k: f64, seed: Seed) -> Result<RadialMode> {
    solve_exterior_mode_with(spec, l, k, seed, &SolveOptions::default())
}

/// Integrates the exterior mode of degree `l` from the seed distance out to
/// the outer boundary.
pub fn solve_exterior_mode_with(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    seed: Seed,
    opts: &SolveOptions,
) -> Result<RadialMode> {
    let coeffs = super::radial_coefficients(spec, l)?;
    check_inputs(spec, k, opts)?;
    let a = spec.cloak_radius;
    let span = spec.outer_radius - a;
    let (s0, s1) = (opts.seed_gap.ln(), span.ln());
    let n = ((s1 - s0) / opts.step).ceil().max(1.0) as usize;
    let mut s_out: Vec<f64> = (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect();
    s_out.extend(opts.extra_gaps.iter().filter(|g| **g > opts.seed_gap && **g < span).map(|g| g.ln()));
    s_out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    s_out.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    *s_out.last_mut().unwrap() = s1;
    s_out[0] = s0;

    let traj = integrate_exterior(&coeffs, k, seed, opts, &s_out)?;
    let samples = (0..traj.len())
        .map(|i| {
            let gap = if i + 1 == traj.len() { span } else { traj.x[i].exp() };
            let y = traj.state(i);
            ModeSample { r: a + gap, gap, u: y[0], flux: y[1] }
        })
        .collect();
    Ok(RadialMode { l, k, branch: ModeBranch::ExteriorN1, samples })
}

/// Supremum of the relative ODE residual at the given distances from the
/// surface, with derivatives taken by sixth-order central differences of the
/// integrated solution.
pub fn mode_residual(
    spec: &CoatingSpec,
    l: usize,
    k: f64,
    seed: Seed,
    opts: &SolveOptions,
    check_gaps: &[f64],
) -> Result<f64> {
    let coeffs = super::radial_coefficients(spec, l)?;
    check_inputs(spec, k, opts)?;
    let h = 1e-3;
    let s0 = opts.seed_gap.ln();
    let s_max = (spec.outer_radius - spec.cloak_radius).ln();
    let mut centers: Vec<f64> =
        check_gaps.iter().map(|g| g.ln()).filter(|s| *s - 3.0 * h > s0 && *s + 3.0 * h <= s_max).collect();
    centers.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if centers.is_empty() {
        return Err(Error::domain(f64::NAN, "no check point inside the integration range"));
    }
    let s_out: Vec<f64> = centers.iter().flat_map(|c| (-3..=3).map(move |j| c + j as f64 * h)).collect();
    let traj = integrate_exterior(&coeffs, k, seed, opts, &s_out)?;
    let ell = coeffs.ell();
    let weights = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let mut worst: f64 = 0.0;
    for (ci, c) in centers.iter().enumerate() {
        let base = 7 * ci;
        let mut du = 0.0;
        let mut dphi = 0.0;
        for (j, w) in weights.iter().enumerate() {
            let y = traj.state(base + j);
            du += w * y[0];
            dphi += w * y[1];
        }
        du /= 60.0 * h;
        dphi /= 60.0 * h;
        let y = traj.state(base + 3);
        let t = c.exp();
        let co = coeffs.at(Branch::Exterior, t)?;
        let f0 = t * y[1] / co.p;
        let f1 = t * (ell * co.q - k * k * co.w) * y[0];
        let r0 = (du - f0).abs() / (y[0].abs() + f0.abs()).max(f64::MIN_POSITIVE);
        let r1 = (dphi - f1).abs() / (y[1].abs() + f1.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(r0).max(r1);
    }
    Ok(worst)
}

/// Logarithmic derivative of the mode at the outer boundary, along the chosen
/// unit normal.
pub fn dtn_eigenvalue(spec: &CoatingSpec, mode: &RadialMode, conormal: Conormal) -> Result<f64> {
    let last = mode.samples.last().ok_or_else(|| Error::domain(f64::NAN, "empty mode"))?;
    if (last.r - spec.outer_radius).abs() > 1e-12 * spec.outer_radius {
        return Err(Error::domain(last.r, "mode must reach the outer boundary"));
    }
    if last.u.abs() <= 1e-13 * mode.max_abs_u() || last.u == 0.0 {
        return Err(Error::DirichletResonance { l: mode.l, k: mode.k });
    }
    let coeffs = super::radial_coefficients(spec, mode.l)?;
    let c = coeffs.at(Branch::Exterior, last.gap)?;
    let du = last.flux / c.p;
    let scale = match conormal {
        Conormal::Metric => coeffs.radial_metric(Branch::Exterior, last.gap)?.sqrt(),
        Conormal::Euclidean => 1.0,
    };
    Ok(du / (scale * last.u))
}

/// DtN eigenvalue `k j_l'(kR) / j_l(kR)` of the uncoated ball of radius `R`.
pub fn reference_dtn(l: usize, k: f64, outer_radius: f64) -> Result<f64> {
    let (j, jd) = sph_j_with_deriv(l, k * outer_radius);
    if j.abs() <= 1e-13 * (j.abs() + jd.abs()) {
        return Err(Error::DirichletResonance { l, k });
    }
    Ok(k * jd / j)
}

/// Boundary values from three seed radii, and their spread.
#[derive(Debug, Clone, Serialize)]
pub struct SeedStudy {
    pub seed_gaps: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Largest pairwise relative difference.
    pub spread: f64,
    /// Richardson extrapolation to zero seed distance, assuming linear error.
    pub extrapolated: f64,
}

pub fn seed_independence(spec: &CoatingSpec, l: usize, k: f64, tolerances: Tolerances) -> Result<SeedStudy> {
    let seed_gaps = vec![1e-6, 1e-7, 1e-8];
    let mut lambdas = Vec::new();
    for &g in &seed_gaps {
        let opts = SolveOptions { seed_gap: g, tolerances, ..SolveOptions::default() };
        let mode = solve_exterior_mode_with(spec, l, k, Seed::PullbackRegular, &opts)?;
        lambdas.push(dtn_eigenvalue(spec, &mode, Conormal::Metric)?);
    }
    let mut spread: f64 = 0.0;
    for a in &lambdas {
        for b in &lambdas {
            spread = spread.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    let extrapolated = lambdas[2] + (lambdas[2] - lambdas[1]) / 9.0;
    Ok(SeedStudy { seed_gaps, lambdas, spread, extrapolated })
}

/// Relative size of `p (u' v - u v')` at the outer boundary for two modes of
/// the same degree and frequency. Green's identity makes it equal to its value
/// at the seed, so it vanishes for finite-energy modes.
pub fn boundary_pairing_asymmetry(u: &RadialMode, v: &RadialMode) -> f64 {
    let (a, b) = (u.samples.last().unwrap(), v.samples.last().unwrap());
    let cross = a.flux * b.u - a.u * b.flux;
    cross.abs() / (a.flux * b.u).abs().max((a.u * b.flux).abs()).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CoatingKind;
    use crate::special::bessel::sph_j;

    fn ball() -> CoatingSpec {
        CoatingSpec::canonical(CoatingKind::SingleBall)
    }

    #[test]
    fn l0_matches_closed_form_at_boundary() {
        let k = 1.0;
        let mode = solve_exterior_mode(&ball(), 0, k, Seed::PullbackRegular).unwrap();
        let last = mode.samples.last().unwrap();
        let x = 2.0 * k;
        let u = x.sin() / x;
        let du = 2.0 * k * (x.cos() / x - x.sin() / (x * x));
        assert!((last.u - u).abs() < 1e-8 * u.abs());
        assert!((last.flux - 2.0 * du).abs() < 1e-8 * (2.0 * du).abs());
    }

    #[test]
    fn modes_are_pullbacks_of_free_solutions() {
        for l in [0, 3, 7] {
            let k = 2.0;
            let mode = solve_exterior_mode(&ball(), l, k, Seed::PullbackRegular).unwrap();
            for s in &mode.samples {
                let exact = sph_j(l, 2.0 * k * s.gap)[l];
                assert!((s.u - exact).abs() <= 1e-8 * exact.abs(), "l={l} gap={}", s.gap);
            }
        }
    }

    #[test]
    fn dtn_examples() {
        let reference = reference_dtn(0, 1.0, 2.0).unwrap();
        assert!((reference + 0.957_657_554_360_285_6).abs() < 1e-12, "{reference}");
        let mode = solve_exterior_mode(&ball(), 0, 1.0, Seed::PullbackRegular).unwrap();
        let cloaked = dtn_eigenvalue(&ball(), &mode, Conormal::Metric).unwrap();
        assert!((cloaked - reference).abs() < 1e-6 * reference.abs());
        let euclid = dtn_eigenvalue(&ball(), &mode, Conormal::Euclidean).unwrap();
        assert!((euclid - 2.0 * cloaked).abs() < 1e-12);
        let tiny = solve_exterior_mode(&ball(), 1, 1e-4, Seed::PullbackRegular).unwrap();
        let lam = dtn_eigenvalue(&ball(), &tiny, Conormal::Metric).unwrap();
        assert!((lam - 0.5).abs() < 1e-6, "{lam}");
    }

    #[test]
    fn low_frequency_mode_is_nearly_constant() {
        let mode = solve_exterior_mode(&ball(), 0, 1e-4, Seed::PullbackRegular).unwrap();
        let u0 = mode.samples[0].u;
        for s in &mode.samples {
            assert!((s.u - u0).abs() < 1e-8 * u0.abs());
        }
    }

    #[test]
    fn residual_is_small() {
        let opts = SolveOptions::default();
        let res = mode_residual(&ball(), 4, 2.0, Seed::PullbackRegular, &opts, &[1e-6, 1e-3, 0.1, 0.9]).unwrap();
        assert!(res < 1e-9, "{res}");
    }

    #[test]
    fn seed_radius_does_not_matter_for_the_regular_branch() {
        let study = seed_independence(&ball(), 2, 1.0, Tolerances::default()).unwrap();
        assert!(study.spread < 1e-9, "{:?}", study);
    }

    #[test]
    fn lining_and_virtual_pair_symmetrically() {
        let u = solve_exterior_mode(&ball(), 2, 1.5, Seed::PullbackRegular).unwrap();
        let v = solve_exterior_mode(&ball(), 2, 1.5, Seed::NeumannLining).unwrap();
        assert!(boundary_pairing_asymmetry(&u, &v) < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_exterior_mode(&ball(), 0, 0.0, Seed::PullbackRegular).is_err());
        let cyl = CoatingSpec::canonical(CoatingKind::SingleCylinderShs);
        assert!(solve_exterior_mode(&cyl, 0, 1.0, Seed::PullbackRegular).is_err());
        assert!(matches!(reference_dtn(0, std::f64::consts::PI / 2.0, 2.0), Err(Error::DirichletResonance { .. })));
    }
}
