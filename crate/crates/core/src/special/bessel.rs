//! Bessel functions of real argument.
//!
//! Spherical `j_l`, `y_l` and their Riccati forms, cylindrical `J_n`, `Y_n`,
//! and modified `I_n`, `K_n`. Each routine returns all orders `0..=n_max` at
//! once since every caller needs a full ladder of orders.

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Spherical Bessel functions `j_0(x)..=j_{l_max}(x)` for `x >= 0`.
pub fn sph_j(l_max: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x < 1.0 {
        return (0..=l_max).map(|l| sph_j_series(l, x)).collect();
    }
    let start = l_max.max(x.ceil() as usize) + 30 + (4.0 * x.sqrt()) as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-30;
    for n in (1..=start).rev() {
        f[n - 1] = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e200 {
            for v in f.iter_mut().skip(n - 1) {
                *v *= 1e-200;
            }
        }
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() { j0 / f[0] } else { j1 / f[1] };
    f.truncate(l_max + 1);
    f.iter_mut().for_each(|v| *v *= scale);
    f
}

fn sph_j_series(l: usize, x: f64) -> f64 {
    let mut pre = 1.0;
    for i in 1..=l {
        pre *= x / (2 * i + 1) as f64;
    }
    if pre == 0.0 {
        return 0.0;
    }
    let z = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..60 {
        term *= z / (m as f64 * (2 * l + 2 * m + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    pre * sum
}

/// Spherical Bessel functions of the second kind `y_0..=y_{l_max}` for `x > 0`.
pub fn sph_y(l_max: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let mut y = Vec::with_capacity(l_max + 1);
    y.push(-c / x);
    if l_max >= 1 {
        y.push(-c / (x * x) - s / x);
    }
    for n in 1..l_max {
        let next = (2 * n + 1) as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y
}

/// Derivatives of a spherical Bessel ladder given its values, via
/// `z_l' = z_{l-1} - (l+1) z_l / x` and `z_0' = -z_1`.
///
/// The ladder must extend one order past what is needed for `l = 0`.
pub fn sph_deriv(z: &[f64], x: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(z.len());
    for l in 0..z.len() {
        if l == 0 {
            d.push(if z.len() > 1 { -z[1] } else { f64::NAN });
        } else if x == 0.0 {
            d.push(if l == 1 { 1.0 / 3.0 } else { 0.0 });
        } else {
            d.push(z[l - 1] - (l + 1) as f64 / x * z[l]);
        }
    }
    d
}

/// `j_l(x)` and `j_l'(x)` for a single order.
pub fn sph_j_with_deriv(l: usize, x: f64) -> (f64, f64) {
    let j = sph_j(l + 1, x);
    let d = sph_deriv(&j, x);
    (j[l], d[l])
}

/// `y_l(x)` and `y_l'(x)` for a single order.
pub fn sph_y_with_deriv(l: usize, x: f64) -> (f64, f64) {
    let y = sph_y(l + 1, x);
    let d = sph_deriv(&y, x);
    (y[l], d[l])
}

/// Outgoing spherical Hankel function `h_l^(1) = j_l + i y_l` and derivative.
pub fn sph_h1_with_deriv(l: usize, x: f64) -> (Complex64, Complex64) {
    let (j, jd) = sph_j_with_deriv(l, x);
    let (y, yd) = sph_y_with_deriv(l, x);
    (Complex64::new(j, y), Complex64::new(jd, yd))
}

/// Riccati-Bessel `psi_l(x) = x j_l(x)` and its derivative.
pub fn riccati_psi(l: usize, x: f64) -> (f64, f64) {
    let (j, jd) = sph_j_with_deriv(l, x);
    (x * j, j + x * jd)
}

/// Riccati-Hankel `xi_l(x) = x h_l^(1)(x)` and its derivative.
pub fn riccati_xi(l: usize, x: f64) -> (Complex64, Complex64) {
    let (h, hd) = sph_h1_with_deriv(l, x);
    (h * x, h + hd * x)
}

/// Cylindrical Bessel functions `J_0..=J_{n_max}` for `x >= 0`.
pub fn cyl_j(n_max: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x < 2.0 {
        return (0..=n_max).map(|n| cyl_j_series(n, x)).collect();
    }
    let top = n_max.max(x.ceil() as usize);
    let mut start = top + 30 + (6.0 * x.sqrt()) as usize;
    start += start % 2;
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-30;
    for n in (1..=start).rev() {
        f[n - 1] = 2.0 * n as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e200 {
            for v in f.iter_mut().skip(n - 1) {
                *v *= 1e-200;
            }
        }
    }
    let norm: f64 = f[0] + 2.0 * f.iter().step_by(2).skip(1).sum::<f64>();
    f.truncate(n_max + 1);
    f.iter_mut().for_each(|v| *v /= norm);
    f
}

fn cyl_j_series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut pre = 1.0;
    for i in 1..=n {
        pre *= h / i as f64;
    }
    if pre == 0.0 {
        return 0.0;
    }
    let z = -h * h;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..80 {
        term *= z / (m as f64 * (n + m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    pre * sum
}

/// Cylindrical Bessel functions of the second kind `Y_0..=Y_{n_max}`, `x > 0`.
///
/// `Y_0` and `Y_1` come from Neumann series in `J_n`; higher orders from the
/// (stable) upward recurrence.
pub fn cyl_y(n_max: usize, x: f64) -> Vec<f64> {
    let terms = 25 + x.ceil() as usize;
    let j = cyl_j(2 * terms + 1, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=terms {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
    }
    let y0 = 2.0 / PI * lg * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * (j[0] / x - lg * j[1]) + 2.0 / PI * s1;
    let mut y = vec![y0, y1];
    for n in 1..n_max {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(next);
    }
    y.truncate(n_max + 1);
    y
}

/// Modified Bessel functions `I_0..=I_{n_max}` for `x >= 0`.
pub fn cyl_i(n_max: usize, x: f64) -> Vec<f64> {
    let x = x.abs();
    if x < 2.0 {
        return (0..=n_max)
            .map(|n| {
                let h = 0.5 * x;
                let mut pre = 1.0;
                for i in 1..=n {
                    pre *= h / i as f64;
                }
                let mut term = 1.0;
                let mut sum = 1.0;
                for m in 1..80 {
                    term *= h * h / (m as f64 * (n + m) as f64);
                    sum += term;
                    if term < 1e-18 * sum {
                        break;
                    }
                }
                pre * sum
            })
            .collect();
    }
    let top = n_max.max(x.ceil() as usize);
    let start = top + 30 + (6.0 * x.sqrt()) as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1e-30;
    for n in (1..=start).rev() {
        f[n - 1] = 2.0 * n as f64 / x * f[n] + f[n + 1];
        if f[n - 1] > 1e200 {
            for v in f.iter_mut().skip(n - 1) {
                *v *= 1e-200;
            }
        }
    }
    let norm: f64 = f[0] + 2.0 * f.iter().skip(1).sum::<f64>();
    let scale = x.exp() / norm;
    f.truncate(n_max + 1);
    f.iter_mut().for_each(|v| *v *= scale);
    f
}

/// Modified Bessel functions of the second kind `K_0..=K_{n_max}`, `x > 0`.
///
/// `K_0` and `K_1` are evaluated from `int_0^inf exp(-x cosh t) cosh(nu t) dt`
/// by the trapezoidal rule, which converges geometrically for this integrand.
pub fn cyl_k(n_max: usize, x: f64) -> Vec<f64> {
    let h = 0.1;
    let mut k0 = 0.5 * (-x).exp();
    let mut k1 = k0;
    let mut i = 1;
    loop {
        let t = i as f64 * h;
        let e = (-x * t.cosh()).exp();
        let a = e;
        let b = e * t.cosh();
        k0 += a;
        k1 += b;
        if b < 1e-18 * k1 && t > 1.0 {
            break;
        }
        i += 1;
    }
    let mut k = vec![k0 * h, k1 * h];
    for n in 1..n_max {
        let next = k[n - 1] + 2.0 * n as f64 / x * k[n];
        k.push(next);
    }
    k.truncate(n_max + 1);
    k
}

/// Derivatives of a cylindrical ladder `Z_n` satisfying the `J`/`Y`
/// recurrences: `Z_n' = Z_{n-1} - n Z_n / x`, `Z_0' = -Z_1`.
pub fn cyl_deriv(z: &[f64], x: f64) -> Vec<f64> {
    (0..z.len())
        .map(|n| if n == 0 { -z.get(1).copied().unwrap_or(f64::NAN) } else { z[n - 1] - n as f64 / x * z[n] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn spherical_reference_values() {
        let j = sph_j(3, 1.0);
        assert!(close(j[0], 0.841_470_984_807_896_5, 1e-14));
        assert!(close(j[1], 0.301_168_678_939_756_8, 1e-14));
        assert!(close(j[2], 0.062_035_052_011_373_86, 1e-13));
        let j = sph_j(10, 5.0);
        assert!(close(j[10], 4.073_442_442_494_62e-4, 1e-12), "{}", j[10]);
        let y = sph_y(2, 2.0);
        assert!(close(y[2], -0.733_991_424_687_654_1, 1e-13), "{}", y[2]);
    }

    #[test]
    fn spherical_series_and_miller_agree_at_switch() {
        for l in 0..12 {
            let below = sph_j_series(l, 1.0);
            let above = sph_j(l, 1.0)[l];
            assert!(close(below, above, 1e-11), "l={l} {below} {above}");
        }
    }

    #[test]
    fn spherical_wronskian() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 15.0] {
            let j = sph_j(9, x);
            let y = sph_y(9, x);
            let jd = sph_deriv(&j, x);
            let yd = sph_deriv(&y, x);
            for l in 0..8 {
                let w = j[l] * yd[l] - jd[l] * y[l];
                assert!(close(w, 1.0 / (x * x), 1e-10), "l={l} x={x} w={w}");
            }
        }
    }

    #[test]
    fn cylindrical_reference_values() {
        let j = cyl_j(2, 1.0);
        assert!(close(j[0], 0.765_197_686_557_966_6, 1e-14));
        assert!(close(j[1], 0.440_050_585_744_933_5, 1e-14));
        let j = cyl_j(5, 10.0);
        assert!(close(j[0], -0.245_935_764_451_348_3, 1e-13), "{}", j[0]);
        assert!(close(j[5], -0.234_061_528_186_793_6, 1e-13), "{}", j[5]);
        let y = cyl_y(2, 1.0);
        assert!(close(y[0], 0.088_256_964_215_676_96, 1e-13), "{}", y[0]);
        assert!(close(y[1], -0.781_212_821_300_288_7, 1e-13), "{}", y[1]);
        let y = cyl_y(3, 10.0);
        assert!(close(y[0], 0.055_671_167_283_599_39, 1e-12), "{}", y[0]);
        let k = cyl_k(1, 1.0);
        assert!(close(k[0], 0.421_024_438_240_708_3, 1e-14), "{}", k[0]);
        assert!(close(k[1], 0.601_907_230_197_234_6, 1e-14), "{}", k[1]);
        let i = cyl_i(1, 1.0);
        assert!(close(i[0], 1.266_065_877_752_008_4, 1e-14));
        assert!(close(i[1], 0.565_159_103_992_485_1, 1e-14));
        let i = cyl_i(1, 3.0);
        assert!(close(i[0], 4.880_792_585_865_024, 1e-13), "{}", i[0]);
    }

    #[test]
    fn cylindrical_wronskians() {
        for &x in &[1e-6, 0.2, 1.0, 1.9, 2.1, 4.0, 9.0] {
            let j = cyl_j(8, x);
            let y = cyl_y(8, x);
            for n in 0..7 {
                let w = j[n + 1] * y[n] - j[n] * y[n + 1];
                assert!(close(w, 2.0 / (PI * x), 1e-10), "n={n} x={x}");
            }
            let i = cyl_i(8, x);
            let k = cyl_k(8, x);
            for n in 0..7 {
                let w = i[n] * k[n + 1] + i[n + 1] * k[n];
                assert!(close(w, 1.0 / x, 1e-10), "n={n} x={x}");
            }
        }
    }
}
