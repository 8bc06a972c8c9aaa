use super::{radial_coefficients, ModeBranch, RadialMode};
use crate::error::{Error, Result};
use crate::geometry::{Branch, CoatingSpec};
use serde::Serialize;

/// Relative size of the innermost shell increment below which the energy is
/// declared convergent.
pub const CAUCHY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyVerdict {
    Finite,
    Divergent,
}

/// Dirichlet-form energy of a mode near the cloaking surface, per unit
/// solid angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `(delta, energy in the shell between the innermost sample and delta)`,
    /// with `delta` snapped to the nearest sample.
    pub shell_integrals: Vec<(f64, f64)>,
    /// Energy outside each shell, in the same order.
    pub outer_integrals: Vec<f64>,
    /// `int u^2 |g|^{1/2} dx` over all samples.
    pub l2_weighted: f64,
    pub verdict: EnergyVerdict,
}

/// Integrates `f` over the samples, returning the cumulative integral at each
/// sample. Each interval uses the parabola through it and its nearer
/// neighbour, evaluated at two Gauss points.
fn cumulative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let g = 0.5 / 3f64.sqrt();
    for i in 0..n - 1 {
        let (x0, x1) = (x[i], x[i + 1]);
        let val = if n == 2 {
            0.5 * (f[i] + f[i + 1]) * (x1 - x0)
        } else {
            let j = if i + 2 < n { i + 2 } else { i - 1 };
            let (xs, fs) = ([x0, x1, x[j]], [f[i], f[i + 1], f[j]]);
            let mid = 0.5 * (x0 + x1);
            let h = x1 - x0;
            0.5 * h * (parabola(mid - g * h, &xs, &fs) + parabola(mid + g * h, &xs, &fs))
        };
        out[i + 1] = out[i] + val;
    }
    out
}

fn parabola(x: f64, xs: &[f64; 3], fs: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut l = 1.0;
        for j in 0..3 {
            if i != j {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        s += fs[i] * l;
    }
    s
}

/// Shell energies of an exterior mode as the shells shrink onto the surface.
///
/// The Dirichlet density per unit solid angle is
/// `p u'^2 + l(l+1) q u^2 = flux^2 / p + l(l+1) q u^2`; it is integrated in
/// `s = ln(r - a)` so that decades near the surface carry equal weight. The
/// verdict is finite when the energy gained between the two innermost shells
/// is at most [`CAUCHY_TOLERANCE`] of the energy outside the innermost shell.
pub fn energy_near_sigma(spec: &CoatingSpec, mode: &RadialMode, shells: &[f64]) -> Result<EnergyReport> {
    if mode.branch != ModeBranch::ExteriorN1 {
        return Err(Error::Unsupported("shell energies are defined for exterior modes".into()));
    }
    let coeffs = radial_coefficients(spec, mode.l)?;
    let min_gap = mode.samples.first().map(|s| s.gap).unwrap_or(f64::INFINITY);
    let mut shells = shells.to_vec();
    shells.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if let Some(&d) = shells.last() {
        if d < min_gap * (1.0 - 1e-12) {
            return Err(Error::domain(d, format!("shell radius >= innermost sample {min_gap:e}")));
        }
    }
    let ell = coeffs.ell();
    let mut s = Vec::with_capacity(mode.samples.len());
    let mut dens = Vec::with_capacity(mode.samples.len());
    let mut mass = Vec::with_capacity(mode.samples.len());
    for sample in &mode.samples {
        let c = coeffs.at(Branch::Exterior, sample.gap)?;
        let t = sample.gap;
        s.push(t.ln());
        dens.push(t * (sample.flux * sample.flux / c.p + ell * c.q * sample.u * sample.u));
        mass.push(t * c.w * sample.u * sample.u);
    }
    let gaps: Vec<f64> = mode.samples.iter().map(|x| x.gap).collect();
    Ok(shell_report(&s, &gaps, &dens, &mass, &shells))
}

/// Shell energies from densities sampled in `s = ln(r - a)` (already
/// multiplied by `r - a`), with shells sorted outermost first.
pub(crate) fn shell_report(s: &[f64], gaps: &[f64], dens: &[f64], mass: &[f64], shells: &[f64]) -> EnergyReport {
    let cum = cumulative(s, dens);
    let total = *cum.last().unwrap_or(&0.0);
    let l2_weighted = *cumulative(s, mass).last().unwrap_or(&0.0);

    let mut shell_integrals = Vec::with_capacity(shells.len());
    let mut outer_integrals = Vec::with_capacity(shells.len());
    for &d in shells {
        let ld = d.ln();
        let idx = (0..s.len()).min_by(|&a, &b| (s[a] - ld).abs().partial_cmp(&(s[b] - ld).abs()).unwrap()).unwrap_or(0);
        shell_integrals.push((gaps.get(idx).copied().unwrap_or(d), cum.get(idx).copied().unwrap_or(0.0)));
        outer_integrals.push(total - cum.get(idx).copied().unwrap_or(0.0));
    }
    let verdict = match outer_integrals.as_slice() {
        [.., prev, last] => {
            let increment = last - prev;
            if increment <= CAUCHY_TOLERANCE * last.abs() || *last == 0.0 {
                EnergyVerdict::Finite
            } else {
                EnergyVerdict::Divergent
            }
        }
        _ => EnergyVerdict::Finite,
    };
    EnergyReport { shell_integrals, outer_integrals, l2_weighted, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CoatingKind;
    use crate::helmholtz::{solve_exterior_mode_with, Seed, SolveOptions};

    fn ball() -> CoatingSpec {
        CoatingSpec::canonical(CoatingKind::SingleBall)
    }

    fn decades() -> Vec<f64> {
        (1..=7).map(|i| 10f64.powi(-i)).collect()
    }

    fn log_gaps(n: usize) -> Vec<f64> {
        (0..=n).map(|i| 10f64.powf(-8.0 + 8.0 * i as f64 / n as f64)).collect()
    }

    #[test]
    fn cumulative_is_exact_for_quadratics() {
        let x = [0.0, 0.3, 0.4, 1.1, 2.0];
        let f: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v - 3.0 * v * v).collect();
        let c = cumulative(&x, &f);
        let exact = |v: f64| v + v * v - v * v * v;
        for (xi, ci) in x.iter().zip(&c) {
            assert!((ci - exact(*xi)).abs() < 1e-13);
        }
    }

    #[test]
    fn pullback_modes_have_finite_energy() {
        let opts = SolveOptions { extra_gaps: decades(), ..SolveOptions::default() };
        for l in [0, 1, 5] {
            let mode = solve_exterior_mode_with(&ball(), l, 1.5, Seed::PullbackRegular, &opts).unwrap();
            let rep = energy_near_sigma(&ball(), &mode, &decades()).unwrap();
            assert_eq!(rep.verdict, EnergyVerdict::Finite, "l={l}");
            for w in rep.shell_integrals.windows(2) {
                assert!(w[1].1 <= w[0].1);
            }
            assert!(rep.l2_weighted > 0.0);
        }
    }

    #[test]
    fn reciprocal_profile_diverges() {
        let coeffs = radial_coefficients(&ball(), 0).unwrap();
        let mode = RadialMode::from_profile(&coeffs, 1.0, &log_gaps(1600), |r| {
            let t = r - 1.0;
            (1.0 / t, -1.0 / (t * t))
        })
        .unwrap();
        let rep = energy_near_sigma(&ball(), &mode, &decades()).unwrap();
        assert_eq!(rep.verdict, EnergyVerdict::Divergent);
        // Density 2 t^-2 gives outer energy 2 / delta - 2.
        let (d, e) = (rep.shell_integrals[3].0, rep.outer_integrals[3]);
        assert!((e - (2.0 / d - 2.0)).abs() < 1e-6 * e, "{e}");
    }

    #[test]
    fn logarithmic_profile_has_finite_energy() {
        let coeffs = radial_coefficients(&ball(), 0).unwrap();
        let mode = RadialMode::from_profile(&coeffs, 1.0, &log_gaps(400), |r| {
            let t = r - 1.0;
            (t.ln(), 1.0 / t)
        })
        .unwrap();
        let rep = energy_near_sigma(&ball(), &mode, &decades()).unwrap();
        assert_eq!(rep.verdict, EnergyVerdict::Finite);
    }

    #[test]
    fn zero_mode() {
        let coeffs = radial_coefficients(&ball(), 2).unwrap();
        let mode = RadialMode::from_profile(&coeffs, 1.0, &log_gaps(50), |_| (0.0, 0.0)).unwrap();
        let rep = energy_near_sigma(&ball(), &mode, &decades()).unwrap();
        assert_eq!(rep.verdict, EnergyVerdict::Finite);
        assert!(rep.shell_integrals.iter().all(|(_, e)| *e == 0.0));
        assert_eq!(rep.l2_weighted, 0.0);
    }

    #[test]
    fn shells_must_be_resolved() {
        let coeffs = radial_coefficients(&ball(), 0).unwrap();
        let mode = RadialMode::from_profile(&coeffs, 1.0, &[1e-3, 1e-2, 1.0], |_| (1.0, 0.0)).unwrap();
        assert!(energy_near_sigma(&ball(), &mode, &[1e-6]).is_err());
    }
}
