//! Internal current sources of the single coating.

use super::waves::{norm3, CVec3};
use super::Polarization;
use crate::error::{Error, Result};
use crate::special::harmonics::{cross_real, vsh_x, ylm_all};
use crate::special::quadrature::{GaussLegendre, SphereRule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Radial Gauss nodes used for volume sources.
const BUMP_RADIAL_NODES: usize = 12;
/// Angular degree resolved by the volume rule of a bump source.
const BUMP_ANGULAR_DEGREE: usize = 14;

/// An internal current in the interior ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurrentSource {
    /// `J = moment * delta(x - location)`.
    PointDipole { location: [f64; 3], moment: [f64; 3] },
    /// `J = amplitude * delta(r - radius) * W_lm(rhat)` with `W = X_lm` for
    /// TE and `W = rhat x X_lm` for TM.
    ShellCurrent { radius: f64, l: usize, m: i64, polarization: Polarization, amplitude: f64 },
    /// `J = (curl curl - k^2) A` for the bump
    /// `A = amplitude (1 - |x - center|^2 / width^2)^6 direction`, which
    /// radiates nothing outside its support.
    #[serde(rename = "non-radiating-synthetic")]
    NonRadiating { center: [f64; 3], width: f64, direction: [f64; 3], amplitude: f64 },
}

/// A point current `J = j delta(. - x)` of a discretized source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCurrent {
    pub x: [f64; 3],
    pub j: CVec3,
}

fn norm_real(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl CurrentSource {
    /// The passive object: no current.
    pub fn zero() -> Self {
        CurrentSource::PointDipole { location: [0.0; 3], moment: [0.0; 3] }
    }

    /// Largest distance from the origin reached by the support.
    pub fn reach(&self) -> f64 {
        match self {
            CurrentSource::PointDipole { location, .. } => norm_real(*location),
            CurrentSource::ShellCurrent { radius, .. } => *radius,
            CurrentSource::NonRadiating { center, width, .. } => norm_real(*center) + width,
        }
    }

    /// Checks the source is well formed and supported strictly inside the
    /// ball of radius `a`.
    pub fn validate(&self, a: f64) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            CurrentSource::PointDipole { location, moment } => {
                if !finite(location) || !finite(moment) {
                    return Err(Error::domain(f64::NAN, "finite dipole location and moment"));
                }
            }
            CurrentSource::ShellCurrent { radius, l, m, amplitude, .. } => {
                if !(*radius > 0.0) || !amplitude.is_finite() {
                    return Err(Error::domain(*radius, "shell radius > 0 with finite amplitude"));
                }
                if *l == 0 || m.unsigned_abs() as usize > *l {
                    return Err(Error::domain(*l as f64, "shell index with l >= 1 and |m| <= l"));
                }
            }
            CurrentSource::NonRadiating { center, width, direction, amplitude } => {
                if !(*width > 0.0) || !finite(center) || !finite(direction) || !amplitude.is_finite() {
                    return Err(Error::domain(*width, "bump width > 0 with finite data"));
                }
                if norm_real(*direction) == 0.0 {
                    return Err(Error::domain(0.0, "nonzero bump direction"));
                }
            }
        }
        let reach = self.reach();
        if !(reach < a) {
            return Err(Error::domain(reach, format!("source support inside r < {a}")));
        }
        Ok(())
    }

    /// Point currents representing the source. Surface and volume sources
    /// are discretized with product Gauss rules; `angular_degree` is the
    /// spherical-harmonic degree the shell rule must resolve.
    pub fn discretize(&self, k: f64, angular_degree: usize) -> Vec<PointCurrent> {
        let c = |v: f64| Complex64::new(v, 0.0);
        match self {
            CurrentSource::PointDipole { location, moment } => {
                vec![PointCurrent { x: *location, j: moment.map(c) }]
            }
            CurrentSource::ShellCurrent { radius, l, m, polarization, amplitude } => {
                let rule = SphereRule::for_degree(angular_degree.max(*l));
                let w0 = amplitude * radius * radius;
                rule.dirs
                    .iter()
                    .zip(&rule.weights)
                    .map(|(d, w)| {
                        let table = ylm_all(*l, *d);
                        let xv = vsh_x(&table, *l, *m);
                        let v = match polarization {
                            Polarization::TE => xv,
                            Polarization::TM => cross_real(*d, xv),
                        };
                        PointCurrent { x: d.map(|u| radius * u), j: v.map(|z| z * (w0 * w)) }
                    })
                    .collect()
            }
            CurrentSource::NonRadiating { center, width, direction, amplitude } => {
                let n = norm_real(*direction);
                let d = direction.map(|v| v / n);
                let gl = GaussLegendre::new(BUMP_RADIAL_NODES);
                let rule = SphereRule::for_degree(BUMP_ANGULAR_DEGREE);
                let mut out = Vec::with_capacity(BUMP_RADIAL_NODES * rule.dirs.len());
                for (s, ws) in gl.on(0.0, *width) {
                    for (dir, wa) in rule.dirs.iter().zip(&rule.weights) {
                        let y = dir.map(|u| s * u);
                        let j = bump_current(y, d, *width, *amplitude, k);
                        let w = ws * wa * s * s;
                        out.push(PointCurrent {
                            x: [center[0] + y[0], center[1] + y[1], center[2] + y[2]],
                            j: j.map(|v| c(v * w)),
                        });
                    }
                }
                out
            }
        }
    }

    /// Total current magnitude of the discretized source, `sum |J_i|`; the
    /// dipole moment norm for a point dipole.
    pub fn norm(&self, k: f64) -> f64 {
        self.discretize(k, 8).iter().map(|p| norm3(&p.j)).sum()
    }
}

/// `(curl curl - k^2)(phi d)` at offset `y` from the bump center, where
/// `phi = amplitude q^6`, `q = 1 - |y|^2 / w^2`.
fn bump_current(y: [f64; 3], d: [f64; 3], w: f64, amplitude: f64, k: f64) -> [f64; 3] {
    let s2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    let q = 1.0 - s2 / (w * w);
    if q <= 0.0 {
        return [0.0; 3];
    }
    let (q4, w2) = (q.powi(4), w * w);
    let yd = y[0] * d[0] + y[1] * d[1] + y[2] * d[2];
    let tangential = 120.0 * q4 / (w2 * w2);
    let along = 24.0 * q4 * q / w2 - k * k * q4 * q * q;
    std::array::from_fn(|i| amplitude * (tangential * (y[i] * yd - s2 * d[i]) + along * d[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_current_matches_finite_differences() {
        let (w, amp, k) = (0.4, 1.3, 0.9);
        let d = [0.6, 0.0, 0.8];
        let a = |y: [f64; 3]| {
            let q = (1.0 - (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / (w * w)).max(0.0);
            amp * q.powi(6)
        };
        let y = [0.1, -0.05, 0.12];
        let h = 1e-3;
        // grad div A - laplacian A - k^2 A with A = a d.
        let second = |i: usize, j: usize| {
            let shift = |v: [f64; 3], si: f64, sj: f64| {
                let mut u = v;
                u[i] += si;
                u[j] += sj;
                u
            };
            (a(shift(y, h, h)) - a(shift(y, h, -h)) - a(shift(y, -h, h)) + a(shift(y, -h, -h))) / (4.0 * h * h)
        };
        let hess: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| second(i, j)).collect()).collect();
        let trace = hess[0][0] + hess[1][1] + hess[2][2];
        let got = bump_current(y, d, w, amp, k);
        for i in 0..3 {
            let hd: f64 = (0..3).map(|j| hess[i][j] * d[j]).sum();
            let want = hd - trace * d[i] - k * k * a(y) * d[i];
            assert!((got[i] - want).abs() < 1e-4 * want.abs().max(1.0), "{i}: {} {}", got[i], want);
        }
    }

    #[test]
    fn validation() {
        assert!(CurrentSource::zero().validate(1.0).is_ok());
        let out = CurrentSource::PointDipole { location: [0.0, 0.0, 1.2], moment: [1.0, 0.0, 0.0] };
        assert!(out.validate(1.0).is_err());
        let shell =
            CurrentSource::ShellCurrent { radius: 0.5, l: 0, m: 0, polarization: Polarization::TE, amplitude: 1.0 };
        assert!(shell.validate(1.0).is_err());
        let bump = CurrentSource::NonRadiating {
            center: [0.0, 0.0, 0.7],
            width: 0.4,
            direction: [1.0, 0.0, 0.0],
            amplitude: 1.0,
        };
        assert!(bump.validate(1.0).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let src = CurrentSource::NonRadiating {
            center: [0.1, 0.0, 0.0],
            width: 0.2,
            direction: [0.0, 0.0, 1.0],
            amplitude: 2.0,
        };
        let text = toml::to_string(&src).unwrap();
        assert!(text.contains("non-radiating-synthetic"));
        let back: CurrentSource = toml::from_str(&text).unwrap();
        assert_eq!(back, src);
    }
}
