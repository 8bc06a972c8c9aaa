//! Orthonormal spherical harmonics and vector spherical harmonics.
//!
//! `Y_lm` carries the Condon-Shortley phase. Vector harmonics are built in
//! Cartesian components from the angular momentum ladder, so they are regular
//! at the poles:
//! `X_lm = L Y_lm / sqrt(l(l+1))` with `L = -i x cross grad`.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Index of `(l, m)` in a flat table holding `-l..=l` for each `l`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// All `Y_lm(dir)` for `l <= l_max`, flat-indexed by [`lm_index`].
///
/// `dir` need not be normalized; the zero vector is treated as the north pole.
pub fn ylm_all(l_max: usize, dir: [f64; 3]) -> Vec<Complex64> {
    let r = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    let (ct, st, eiphi) = if r == 0.0 {
        (1.0, 0.0, Complex64::new(1.0, 0.0))
    } else {
        let rho = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        let e = if rho > 0.0 { Complex64::new(dir[0] / rho, dir[1] / rho) } else { Complex64::new(1.0, 0.0) };
        (dir[2] / r, rho / r, e)
    };
    let p = normalized_legendre(l_max, ct, st);
    let mut out = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    let mut em = Complex64::new(1.0, 0.0);
    for m in 0..=l_max {
        for l in m..=l_max {
            let y = em * p[tri(l, m)];
            out[lm_index(l, m as i64)] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[lm_index(l, -(m as i64))] = y.conj() * sign;
            }
        }
        em *= eiphi;
    }
    out
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormal associated Legendre values `bar P_l^m(cos theta)`, `m >= 0`,
/// so that `Y_lm = bar P_l^m e^{i m phi}`.
fn normalized_legendre(l_max: usize, ct: f64, st: f64) -> Vec<f64> {
    let mut p = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    p[0] = (0.25 / PI).sqrt();
    for m in 1..=l_max {
        p[tri(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st * p[tri(m - 1, m - 1)];
    }
    for m in 0..l_max {
        p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * ct * p[tri(m, m)];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (ct * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// Cartesian vector spherical harmonic `X_lm` (for `l >= 1`) from a table of
/// scalar harmonics.
pub fn vsh_x(table: &[Complex64], l: usize, m: i64) -> [Complex64; 3] {
    assert!(l >= 1, "X_lm is defined for l >= 1");
    let lf = l as f64;
    let ll = lf * (lf + 1.0);
    let mf = m as f64;
    let get = |mm: i64| {
        if mm.unsigned_abs() as usize > l {
            Complex64::new(0.0, 0.0)
        } else {
            table[lm_index(l, mm)]
        }
    };
    let cp = (ll - mf * (mf + 1.0)).max(0.0).sqrt();
    let cm = (ll - mf * (mf - 1.0)).max(0.0).sqrt();
    let up = get(m + 1) * cp;
    let dn = get(m - 1) * cm;
    let lx = (up + dn) * 0.5;
    let ly = (up - dn) / Complex64::new(0.0, 2.0);
    let lz = table[lm_index(l, m)] * mf;
    let norm = 1.0 / ll.sqrt();
    [lx * norm, ly * norm, lz * norm]
}

/// `rhat x v` for a real unit vector and complex vector.
pub fn cross_real(a: [f64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [b[2] * a[1] - b[1] * a[2], b[0] * a[2] - b[2] * a[0], b[1] * a[0] - b[0] * a[1]]
}
