//! Vector spherical wave functions and the closed-form dipole field.
//!
//! With `x = kr` and `z_l` a spherical Bessel or Hankel function,
//! `M_lm = z_l(x) X_lm` and
//! `N_lm = curl M_lm / k = i sqrt(l(l+1)) z_l/x Y_lm rhat + (x z_l)'/x rhat x X_lm`.

use crate::special::bessel::{sph_deriv, sph_j, sph_y};
use crate::special::harmonics::{cross_real, lm_index, vsh_x, ylm_all};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type CVec3 = [Complex64; 3];

pub(crate) const ZERO3: CVec3 = [Complex64::new(0.0, 0.0); 3];

/// Which radial function a wave carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    /// `j_l`, finite at the origin.
    Regular,
    /// `h_l^(1)`, outgoing at infinity.
    Outgoing,
}

/// `M_lm` and `N_lm` at one point for `1 <= l <= l_max`, flat-indexed by
/// `lm_index`; the `l = 0` slot is zero.
#[derive(Debug, Clone)]
pub struct VectorWaves {
    pub l_max: usize,
    pub m: Vec<CVec3>,
    pub n: Vec<CVec3>,
}

impl VectorWaves {
    pub fn m(&self, l: usize, m: i64) -> CVec3 {
        self.m[lm_index(l, m)]
    }

    pub fn n(&self, l: usize, m: i64) -> CVec3 {
        self.n[lm_index(l, m)]
    }
}

/// Radial factors `(z_l, z_l / x, (x z_l)'/x)` for `l <= l_max`.
pub(crate) fn radial_factors(kind: WaveKind, l_max: usize, x: f64) -> Vec<[Complex64; 3]> {
    let c = |v: f64| Complex64::new(v, 0.0);
    if x == 0.0 {
        assert_eq!(kind, WaveKind::Regular, "outgoing waves are singular at the origin");
        return (0..=l_max)
            .map(|l| match l {
                0 => [c(1.0), c(0.0), c(0.0)],
                1 => [c(0.0), c(1.0 / 3.0), c(2.0 / 3.0)],
                _ => [c(0.0); 3],
            })
            .collect();
    }
    let j = sph_j(l_max + 1, x);
    let jd = sph_deriv(&j, x);
    let (re, re_d) = (&j[..=l_max], &jd[..=l_max]);
    match kind {
        WaveKind::Regular => (0..=l_max).map(|l| [c(re[l]), c(re[l] / x), c(re[l] / x + re_d[l])]).collect(),
        WaveKind::Outgoing => {
            let y = sph_y(l_max + 1, x);
            let yd = sph_deriv(&y, x);
            (0..=l_max)
                .map(|l| {
                    let h = Complex64::new(re[l], y[l]);
                    let hd = Complex64::new(re_d[l], yd[l]);
                    [h, h / x, h / x + hd]
                })
                .collect()
        }
    }
}

/// `M_lm`, `N_lm` at the Cartesian point `x`.
pub fn vector_waves(kind: WaveKind, l_max: usize, k: f64, x: [f64; 3]) -> VectorWaves {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let dir = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0, 0.0, 1.0] };
    let radial = radial_factors(kind, l_max, k * r);
    let table = ylm_all(l_max, dir);
    let size = (l_max + 1) * (l_max + 1);
    let mut out = VectorWaves { l_max, m: vec![ZERO3; size], n: vec![ZERO3; size] };
    for l in 1..=l_max {
        let [z, z_over_x, b] = radial[l];
        let root = ((l * (l + 1)) as f64).sqrt();
        for m in -(l as i64)..=(l as i64) {
            let idx = lm_index(l, m);
            let xv = vsh_x(&table, l, m);
            let rx = cross_real(dir, xv);
            let radial_part = Complex64::new(0.0, root) * z_over_x * table[idx];
            out.m[idx] = xv.map(|v| v * z);
            out.n[idx] = std::array::from_fn(|i| radial_part * dir[i] + b * rx[i]);
        }
    }
    out
}

/// Field `(E, H)` at `x` radiated in vacuum by the current dipole
/// `J = p delta(. - x0)`, with `curl E = ik H` and `curl H = -ik E + J`.
pub fn dipole_field(x: [f64; 3], x0: [f64; 3], p: CVec3, k: f64) -> (CVec3, CVec3) {
    let d = [x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let n = d.map(|v| v / dist);
    let i = Complex64::i();
    let kr = k * dist;
    let g = (i * kr).exp() / (4.0 * PI * dist);
    let a = 1.0 + i / kr - 1.0 / (kr * kr);
    let b = -1.0 - 3.0 * i / kr + 3.0 / (kr * kr);
    let np = n[0] * p[0] + n[1] * p[1] + n[2] * p[2];
    let pref = i * k * g;
    let e = std::array::from_fn(|c| pref * (a * p[c] + b * np * n[c]));
    let dg = g * (i * k - 1.0 / dist);
    let h = cross_real(n, p).map(|v| dg * v);
    (e, h)
}

/// `sum conj(a_i) b_i`.
pub(crate) fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub(crate) fn norm3(a: &CVec3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curl<F: Fn([f64; 3]) -> CVec3>(f: F, x: [f64; 3], h: f64) -> CVec3 {
        let d = |i: usize, j: usize| {
            let mut p = x;
            let mut m = x;
            p[j] += h;
            m[j] -= h;
            let mut p2 = x;
            let mut m2 = x;
            p2[j] += 2.0 * h;
            m2[j] -= 2.0 * h;
            (8.0 * (f(p)[i] - f(m)[i]) - (f(p2)[i] - f(m2)[i])) / (12.0 * h)
        };
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
    }

    #[test]
    fn curl_of_m_is_k_n() {
        let k = 1.3;
        let x = [0.4, -0.7, 0.9];
        for kind in [WaveKind::Regular, WaveKind::Outgoing] {
            let w = vector_waves(kind, 3, k, x);
            for (l, m) in [(1, 0), (2, -1), (3, 2)] {
                let c = curl(|y| vector_waves(kind, 3, k, y).m(l, m), x, 1e-3);
                let c2 = curl(|y| vector_waves(kind, 3, k, y).n(l, m), x, 1e-3);
                for i in 0..3 {
                    assert!((c[i] - k * w.n(l, m)[i]).norm() < 1e-9, "{kind:?} {l} {m}");
                    assert!((c2[i] - k * w.m(l, m)[i]).norm() < 1e-9, "{kind:?} {l} {m}");
                }
            }
        }
    }

    #[test]
    fn regular_waves_are_continuous_at_origin() {
        let at0 = vector_waves(WaveKind::Regular, 3, 1.0, [0.0; 3]);
        let near = vector_waves(WaveKind::Regular, 3, 1.0, [1e-7, -2e-7, 1.5e-7]);
        for i in 0..at0.n.len() {
            for c in 0..3 {
                assert!((at0.n[i][c] - near.n[i][c]).norm() < 1e-6);
                assert!(at0.m[i][c].norm() == 0.0);
            }
        }
    }

    #[test]
    fn dipole_field_matches_multipole_expansion() {
        let k = 1.7;
        let x0 = [0.1, -0.2, 0.15];
        let p: CVec3 = [0.3, -1.0, 0.5].map(|v| Complex64::new(v, 0.0));
        let x = [0.9, 0.5, -0.8];
        let l_max = 20;
        let reg = vector_waves(WaveKind::Regular, l_max, k, x0);
        let out = vector_waves(WaveKind::Outgoing, l_max, k, x);
        let mut e = ZERO3;
        let mut h = ZERO3;
        for l in 1..=l_max {
            for m in -(l as i64)..=(l as i64) {
                let ate = cdot(&reg.m(l, m), &p);
                let atm = cdot(&reg.n(l, m), &p);
                for c in 0..3 {
                    e[c] += -k * k * (ate * out.m(l, m)[c] + atm * out.n(l, m)[c]);
                    h[c] += Complex64::i() * k * k * (ate * out.n(l, m)[c] + atm * out.m(l, m)[c]);
                }
            }
        }
        let (ed, hd) = dipole_field(x, x0, p, k);
        for c in 0..3 {
            assert!((e[c] - ed[c]).norm() < 1e-12, "{c}: {} vs {}", e[c], ed[c]);
            assert!((h[c] - hd[c]).norm() < 1e-12, "{c}: {} vs {}", h[c], hd[c]);
        }
    }

    #[test]
    fn dipole_field_solves_maxwell() {
        let k = 0.8;
        let x0 = [0.0, 0.1, 0.0];
        let p: CVec3 = [Complex64::new(1.0, 0.2), Complex64::new(0.0, 0.0), Complex64::new(-0.4, 0.0)];
        let x = [0.7, -0.3, 0.5];
        let (e, h) = dipole_field(x, x0, p, k);
        let ce = curl(|y| dipole_field(y, x0, p, k).0, x, 1e-3);
        let ch = curl(|y| dipole_field(y, x0, p, k).1, x, 1e-3);
        for c in 0..3 {
            assert!((ce[c] - Complex64::i() * k * h[c]).norm() < 1e-8);
            assert!((ch[c] + Complex64::i() * k * e[c]).norm() < 1e-8);
        }
    }
}
