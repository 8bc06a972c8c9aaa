use super::waves::radial_factors;
use super::waves::WaveKind;
use super::Polarization;
use crate::error::{Error, Result};
use crate::special::bessel::{riccati_psi, riccati_xi};
use crate::special::quadrature::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// One `(l, m)` component of `(E, H, J)` on a uniform radial grid, with
/// radially uniaxial media. Vector coefficients are ordered
/// `(Y_lm rhat, X_lm, rhat x X_lm)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub l: usize,
    pub k: f64,
    pub r: Vec<f64>,
    pub e: Vec<[Complex64; 3]>,
    pub h: Vec<[Complex64; 3]>,
    pub j: Vec<[Complex64; 3]>,
    /// `(eps_r, eps_t)` per radius.
    pub eps: Vec<(f64, f64)>,
    /// `(mu_r, mu_t)` per radius.
    pub mu: Vec<(f64, f64)>,
}

/// Residuals of `div(eps E) - div(J)/(ik)` and `div(mu H)`, each relative to
/// the largest `|field| / r` over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceResiduals {
    pub electric: f64,
    pub magnetic: f64,
}

const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];

/// Divergence of `f_r Y rhat + f_x X + f_t rhat x X` is
/// `(r^2 f_r)' / r^2 - i sqrt(L) f_t / r`; returns both terms at every
/// interior grid point (three points from each end are skipped).
fn divergence_terms(
    l: usize,
    r: &[f64],
    radial: &[Complex64],
    tangential: &[Complex64],
) -> Vec<(Complex64, Complex64)> {
    let h = r[1] - r[0];
    let root = ((l * (l + 1)) as f64).sqrt();
    (3..r.len() - 3)
        .map(|i| {
            let d: Complex64 = (0..7).map(|j| radial[i + j - 3] * (r[i + j - 3] * r[i + j - 3] * D1[j])).sum();
            let first = d / (60.0 * h * r[i] * r[i]);
            let second = -Complex64::i() * root * tangential[i] / r[i];
            (first, second)
        })
        .collect()
}

/// Checks the divergence equations of a mode field. The grid must be uniform
/// with at least seven points.
pub fn divergence_check(field: &ModeField) -> Result<DivergenceResiduals> {
    let n = field.r.len();
    if n < 7 || [field.e.len(), field.h.len(), field.j.len(), field.eps.len(), field.mu.len()].iter().any(|&m| m != n) {
        return Err(Error::domain(n as f64, "at least 7 samples with matching lengths"));
    }
    let h = field.r[1] - field.r[0];
    if !(h > 0.0) || field.r.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) || field.r[0] <= 0.0 {
        return Err(Error::domain(h, "uniform increasing grid in r > 0"));
    }
    let ik = Complex64::new(0.0, field.k);
    let de = divergence_terms(
        field.l,
        &field.r,
        &field.e.iter().zip(&field.eps).map(|(e, m)| e[0] * m.0).collect::<Vec<_>>(),
        &field.e.iter().zip(&field.eps).map(|(e, m)| e[2] * m.1).collect::<Vec<_>>(),
    );
    let dj = divergence_terms(
        field.l,
        &field.r,
        &field.j.iter().map(|j| j[0]).collect::<Vec<_>>(),
        &field.j.iter().map(|j| j[2]).collect::<Vec<_>>(),
    );
    let dh = divergence_terms(
        field.l,
        &field.r,
        &field.h.iter().zip(&field.mu).map(|(e, m)| e[0] * m.0).collect::<Vec<_>>(),
        &field.h.iter().zip(&field.mu).map(|(e, m)| e[2] * m.1).collect::<Vec<_>>(),
    );
    let root = ((field.l * (field.l + 1)) as f64).sqrt();
    let size = |f: &[Complex64; 3], m: (f64, f64), r: f64| (m.0 * f[0].norm() + root * m.1 * f[2].norm()) / r;
    let inner = 3..n - 3;
    let mut den_e: f64 = 0.0;
    let mut den_h: f64 = 0.0;
    for i in inner.clone() {
        let r = field.r[i];
        den_e = den_e.max(size(&field.e[i], field.eps[i], r) + size(&field.j[i], (1.0, 1.0), r) / field.k);
        den_h = den_h.max(size(&field.h[i], field.mu[i], r));
    }
    let mut num_e: f64 = 0.0;
    for ((a, b), (c, d)) in de.iter().zip(&dj) {
        num_e = num_e.max((a + b - (c + d) / ik).norm());
    }
    let num_h = dh.iter().map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
    let rel = |n: f64, d: f64| if d > 0.0 { n / d } else { 0.0 };
    Ok(DivergenceResiduals { electric: rel(num_e, den_e), magnetic: rel(num_h, den_h) })
}

fn uniform(r0: f64, r1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r0 + (r1 - r0) * i as f64 / (n - 1) as f64).collect()
}

/// Regular vacuum mode `E = N_lm` (TM) or `E = M_lm` (TE), with
/// `H = curl E / (ik)`, on `n` uniform radii in `[r0, r1]`.
pub fn vacuum_mode_field(l: usize, k: f64, pol: Polarization, r0: f64, r1: f64, n: usize) -> ModeField {
    let r = uniform(r0, r1, n);
    let root = ((l * (l + 1)) as f64).sqrt();
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let mut e = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for &x in &r {
        let [z, zx, b] = radial_factors(WaveKind::Regular, l, k * x)[l];
        // N = i sqrt(L) z/x Y rhat + b rhat x X, curl N = k M, curl M = k N.
        let n_vec = [i * root * zx, zero, b];
        let m_vec = [zero, z, zero];
        match pol {
            Polarization::TM => {
                e.push(n_vec);
                h.push(m_vec.map(|c| c / i));
            }
            Polarization::TE => {
                e.push(m_vec);
                h.push(n_vec.map(|c| c / i));
            }
        }
    }
    ModeField { l, k, r, e, h, j: vec![[zero; 3]; n], eps: vec![(1.0, 1.0); n], mu: vec![(1.0, 1.0); n] }
}

/// The `l = 1, m = 0` component of the vacuum field of a smeared dipole
/// `J = p f(r) z_hat` with `f = (1 - r^2/w^2)^4` for `r < w`.
///
/// With `z_hat = c (Y_10 rhat - i sqrt(2) rhat x X_10)`, `c = sqrt(4 pi / 3)`,
/// the potential `W = r (curl E . X)` solves
/// `W'' + (k^2 - 2/r^2) W = sqrt(2) k c p r f'`, integrated against the
/// outgoing Green's function `psi(k r<) xi(k r>) / (ik)`.
pub fn smeared_dipole_field(k: f64, p: f64, width: f64, r0: f64, r1: f64, n: usize) -> ModeField {
    let r = uniform(r0, r1, n);
    let c = (4.0 * PI / 3.0).sqrt();
    let f = |x: f64| if x < width { (1.0 - x * x / (width * width)).powi(4) } else { 0.0 };
    let df = |x: f64| {
        if x < width {
            let q = 1.0 - x * x / (width * width);
            -8.0 * x * q.powi(3) / (width * width)
        } else {
            0.0
        }
    };
    let src = |x: f64| 2f64.sqrt() * k * c * p * x * df(x);
    let gl = GaussLegendre::new(12);
    // Cumulative integrals of psi S from 0 and of xi S to the support edge.
    let nodes: Vec<f64> = {
        let mut v = vec![0.0];
        v.extend(r.iter().copied().filter(|x| *x < width));
        v.push(width);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    };
    let piece = |a: f64, b: f64| -> (Complex64, Complex64) {
        let mut ip = Complex64::new(0.0, 0.0);
        let mut ix = Complex64::new(0.0, 0.0);
        for (x, w) in gl.on(a, b) {
            let s = src(x) * w;
            ip += riccati_psi(1, k * x).0 * s;
            ix += riccati_xi(1, k * x).0 * s;
        }
        (ip, ix)
    };
    let mut cum_psi = vec![Complex64::new(0.0, 0.0); nodes.len()];
    let mut cum_xi = vec![Complex64::new(0.0, 0.0); nodes.len()];
    for i in 1..nodes.len() {
        let (a, b) = piece(nodes[i - 1], nodes[i]);
        cum_psi[i] = cum_psi[i - 1] + a;
        cum_xi[i] = cum_xi[i - 1] + b;
    }
    let total_xi = *cum_xi.last().unwrap();
    let lookup = |x: f64| -> (Complex64, Complex64) {
        if x >= width {
            return (*cum_psi.last().unwrap(), Complex64::new(0.0, 0.0));
        }
        let idx = nodes.iter().position(|v| *v == x).expect("grid radius is a node");
        (cum_psi[idx], total_xi - cum_xi[idx])
    };
    let i = Complex64::i();
    let ik = i * k;
    let root = 2f64.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = ModeField {
        l: 1,
        k,
        r: r.clone(),
        e: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        j: Vec::with_capacity(n),
        eps: vec![(1.0, 1.0); n],
        mu: vec![(1.0, 1.0); n],
    };
    for &x in &r {
        let (inner, outer) = lookup(x);
        let (psi, dpsi) = riccati_psi(1, k * x);
        let (xi, dxi) = riccati_xi(1, k * x);
        let w = (xi * inner + psi * outer) / ik;
        let dw = (dxi * inner + dpsi * outer) * k / ik;
        let jr = Complex64::new(c * p * f(x), 0.0);
        let jt = -i * root * c * p * f(x);
        let er = (i * root * w / (x * x) - ik * jr) / (k * k);
        let et = (dw - ik * x * jt) / (k * k * x);
        out.e.push([er, zero, et]);
        out.h.push([zero, w / (ik * x), zero]);
        out.j.push([jr, zero, jt]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::harmonics::{cross_real, vsh_x, ylm_all};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn source_free_modes_are_divergence_free() {
        for pol in [Polarization::TE, Polarization::TM] {
            for l in [1, 2, 4] {
                let f = vacuum_mode_field(l, 1.3, pol, 0.1, 3.0, 2901);
                let res = divergence_check(&f).unwrap();
                assert!(res.electric < 1e-10 && res.magnetic < 1e-10, "{pol:?} {l}: {res:?}");
            }
        }
    }

    #[test]
    fn unit_z_decomposes_on_l1_harmonics() {
        let c = (4.0 * PI / 3.0).sqrt();
        for d in [[0.3f64, -0.4, 0.866], [1.0, 0.0, 0.0], [0.1, 0.7, -0.2]] {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let d = [d[0] / n, d[1] / n, d[2] / n];
            let t = ylm_all(1, d);
            let rx = cross_real(d, vsh_x(&t, 1, 0));
            for i in 0..3 {
                let v = c * (t[2] * d[i] - Complex64::i() * 2f64.sqrt() * rx[i]);
                let want = if i == 2 { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn driven_field_carries_source_divergence() {
        let f = smeared_dipole_field(1.0, 1.0, 0.5, 0.05, 1.5, 2901);
        let res = divergence_check(&f).unwrap();
        assert!(res.electric < 1e-8, "{res:?}");
        assert!(res.magnetic < 1e-10, "{res:?}");
        // Without the source term the same field fails the check.
        let mut bare = f.clone();
        bare.j.iter_mut().for_each(|j| *j = [Complex64::new(0.0, 0.0); 3]);
        assert!(divergence_check(&bare).unwrap().electric > 1e-2);
    }

    #[test]
    fn perturbations_are_detected_proportionally() {
        let base = vacuum_mode_field(2, 1.0, Polarization::TM, 0.2, 2.0, 1801);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise: Vec<f64> = (0..base.r.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let perturbed = |eps: f64| {
            let mut f = base.clone();
            for (e, z) in f.e.iter_mut().zip(&noise) {
                e[0] *= 1.0 + eps * z;
            }
            divergence_check(&f).unwrap().electric
        };
        let (a, b) = (perturbed(1e-3), perturbed(2e-3));
        assert!(a > 1e-4, "{a}");
        assert!((b / a - 2.0).abs() < 0.05, "{}", b / a);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut f = vacuum_mode_field(1, 1.0, Polarization::TE, 0.1, 1.0, 20);
        f.r[5] += 1e-3;
        assert!(divergence_check(&f).is_err());
    }
}
