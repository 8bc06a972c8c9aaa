//! Independent references for cylinder scattering.

use super::modes::{cyl_media, match_exterior, radial_matrix, seeds, vacuum_basis, Lining};
use crate::error::{Error, Result};
use crate::geometry::CoatingSpec;
use crate::special::bessel::EULER_GAMMA;
use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Reflection of a bare perfectly conducting cylinder of radius `rho0` in
/// vacuum, `reflection[out][in]` with channels TM, TE.
///
/// The covariant state is invariant under the radial map, so a PEC lining
/// at distance `t0` from the cloaking surface scatters exactly like a bare
/// PEC cylinder of radius `rho0 = F^{-1}(a + t0)`.
pub fn bare_pec_reflection(n: i64, beta: f64, k: f64, rho0: f64) -> Result<[[Complex64; 2]; 2]> {
    if !(rho0 > 0.0) {
        return Err(Error::domain(rho0, "rho0 > 0"));
    }
    let [reg, out] = vacuum_basis(n, beta, k, rho0)?;
    // E_z and r E_theta vanish on the conductor.
    let m = Matrix2::new(out[0][0], out[1][0], out[0][1], out[1][1]);
    let lu = m.lu();
    let mut refl = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (inc, state) in reg.iter().enumerate() {
        let x = lu
            .solve(&Vector2::new(-state[0], -state[1]))
            .ok_or_else(|| Error::Inconsistent("conductor matching system is singular".into()))?;
        refl[0][inc] = x[0];
        refl[1][inc] = x[1];
    }
    Ok(refl)
}

/// Small-argument limit of the `n = 0`, `beta = 0` TM reflection of a thin
/// conductor, `-1 / (1 + (2i/pi)(ln(k rho0 / 2) + gamma_E))`.
pub fn static_pec_limit(k: f64, rho0: f64) -> Complex64 {
    let i = Complex64::i();
    -1.0 / (1.0 + 2.0 * i / PI * ((0.5 * k * rho0).ln() + EULER_GAMMA))
}

/// Reflection of the coated cylinder from a fourth-order Magnus propagator
/// over `steps` uniform intervals in `ln(r - a)`, starting at `seed_gap`.
pub fn transfer_matrix_reflection(
    spec: &CoatingSpec,
    n: i64,
    beta: f64,
    k: f64,
    lining: Lining,
    seed_gap: f64,
    steps: usize,
) -> Result<[[Complex64; 2]; 2]> {
    spec.validate()?;
    if !spec.is_cylinder() {
        return Err(Error::Unsupported("cylindrical modes need a cylinder coating".into()));
    }
    let a = spec.cloak_radius;
    let span = spec.outer_radius - a;
    if !(seed_gap > 0.0 && seed_gap < span) || steps == 0 {
        return Err(Error::domain(seed_gap, format!("seed gap in (0, {span}) and steps > 0")));
    }
    let generator = |s: f64| -> Result<Matrix4<Complex64>> {
        let t = s.exp();
        let m = radial_matrix(n, beta, k, a + t, cyl_media(spec, t)?);
        Ok(Matrix4::from_fn(|i, j| m[i][j] * t))
    };
    let (s0, s1) = (seed_gap.ln(), span.ln());
    let h = (s1 - s0) / steps as f64;
    let off = 3f64.sqrt() / 6.0;
    let mut phi = Matrix4::<Complex64>::identity();
    for i in 0..steps {
        let s = s0 + i as f64 * h;
        let a1 = generator(s + (0.5 - off) * h)?;
        let a2 = generator(s + (0.5 + off) * h)?;
        let omega = (a1 + a2) * Complex64::new(0.5 * h, 0.0)
            + (a2 * a1 - a1 * a2) * Complex64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
        phi = omega.exp() * phi;
        let top = phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(top > 0.0 && top.is_finite()) {
            return Err(Error::Integration { at: s, reason: "transfer matrix degenerated".into() });
        }
        phi /= Complex64::new(top, 0.0);
    }
    let seed = seeds(spec, lining, n, beta, k, seed_gap)?;
    let end = seed.map(|y| {
        let v = phi * nalgebra::Vector4::from_column_slice(&y);
        [v[0], v[1], v[2], v[3]]
    });
    Ok(match_exterior(n, beta, k, spec.outer_radius, end)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::{solve_cyl_mode_pec, solve_cyl_mode_shs};
    use crate::geometry::CoatingKind;
    use crate::helmholtz::SolveOptions;

    fn spec() -> CoatingSpec {
        CoatingSpec::canonical(CoatingKind::SingleCylinderShs)
    }

    fn rho0(t0: f64) -> f64 {
        spec().radial_map().inverse_gap(t0)
    }

    fn max_diff(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
        (0..4).map(|i| (a[i / 2][i % 2] - b[i / 2][i % 2]).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn decoupled_channels_match_bessel_series() {
        // n = 0, beta = 0: TM needs J_0 + R H_0 = 0, TE needs J_0' + R H_0' = 0.
        // Reference values from scipy.special.
        let r0 = 0.37;
        let refl = bare_pec_reflection(0, 0.0, 1.0, r0).unwrap();
        let (j0, y0, j1, y1) =
            (0.966_066_726_438_513, -0.661_272_133_702_965_2, 0.181_852_194_406_331_32, -1.905_507_888_437_400_4);
        let tm = -j0 / Complex64::new(j0, y0);
        let te = -j1 / Complex64::new(j1, y1);
        assert!((refl[0][0] - tm).norm() < 1e-12, "{:?}", refl[0][0]);
        assert!((refl[1][1] - te).norm() < 1e-12, "{:?}", refl[1][1]);
        assert!(refl[0][1].norm() == 0.0 && refl[1][0].norm() == 0.0);
    }

    #[test]
    fn coated_pec_equals_bare_pec_of_preimage_radius() {
        let opts = SolveOptions::default();
        for (n, beta, k) in [(0, 0.0, 1.0), (0, 0.3, 1.0), (1, 0.3, 1.0), (2, 0.9, 2.0), (0, 1.5, 1.0)] {
            let e = solve_cyl_mode_pec(&spec(), n, beta, k, &opts).unwrap();
            let want = bare_pec_reflection(n, beta, k, rho0(opts.seed_gap)).unwrap();
            assert!(max_diff(&e.reflection, &want) < 1e-8, "n={n} beta={beta}: {:?} vs {:?}", e.reflection, want);
        }
    }

    #[test]
    fn magnus_propagator_confirms_the_shooting_solve() {
        let opts = SolveOptions::default();
        for (n, beta, k, lining) in [(0, 0.3, 1.0, Lining::Pec), (1, 0.3, 1.0, Lining::Pec), (2, 0.9, 0.5, Lining::Shs)]
        {
            let tm = transfer_matrix_reflection(&spec(), n, beta, k, lining, opts.seed_gap, 4000).unwrap();
            let shoot = match lining {
                Lining::Pec => solve_cyl_mode_pec(&spec(), n, beta, k, &opts).unwrap(),
                _ => solve_cyl_mode_shs(&spec(), n, beta, k, &opts).unwrap(),
            };
            assert!(max_diff(&tm, &shoot.reflection) < 1e-8, "n={n}: {:?} vs {:?}", tm, shoot.reflection);
        }
    }

    #[test]
    fn small_k_approaches_the_static_limit() {
        let opts = SolveOptions::default();
        let r0 = rho0(opts.seed_gap);
        let mut prev = None;
        for k in [1e-1, 1e-2, 1e-3, 1e-4] {
            let e = solve_cyl_mode_pec(&spec(), 0, 0.0, k, &opts).unwrap();
            let r = e.reflection[0][0];
            assert!(r.norm() <= 1.0 + 1e-9);
            let lim = static_pec_limit(k, r0);
            assert!((r - lim).norm() < 1e-6 * lim.norm().max(1e-3) + (k * r0).powi(2), "k={k}: {r} vs {lim}");
            if let Some(p) = prev {
                let p: Complex64 = p;
                assert!((r - p).norm() < 0.05);
            }
            prev = Some(r);
        }
    }
}
