//! Integration of linear homogeneous ODE systems.
//!
//! Radial mode equations are linear, so solutions can be rescaled freely.
//! The state is renormalized at every output point and the accumulated scale
//! is tracked as a logarithm. Within each segment every component is also
//! rescaled to unit size, so the error control stays relative per component
//! even when components differ by many decades.
//!
//! The independent variable is carried as an extra state component with unit
//! derivative, so the stepper only ever sees an autonomous system. The
//! Dormand-Prince 8(5,3) tableau in `ode_solvers` 0.6 evaluates its final
//! stage at the wrong abscissa, which is harmless for autonomous systems only.

use crate::error::{Error, Result};
use ode_solvers::{DVector, Dop853, OutputType, SVector, System};
use serde::{Deserialize, Serialize};

/// Error-control settings. `atol` applies to the renormalized state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

/// States at the requested output points.
#[derive(Debug, Clone)]
pub struct Trajectory<const D: usize> {
    pub x: Vec<f64>,
    /// Renormalized states; the true state is `y[i] * exp(log_scale[i])`.
    pub y: Vec<SVector<f64, D>>,
    pub log_scale: Vec<f64>,
}

impl<const D: usize> Trajectory<D> {
    pub fn state(&self, i: usize) -> SVector<f64, D> {
        self.y[i] * self.log_scale[i].exp()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Rescales every state by `exp(-shift)`.
    pub fn shift_scale(&mut self, shift: f64) {
        self.log_scale.iter_mut().for_each(|s| *s -= shift);
    }
}

struct Rhs<'a, F, const D: usize> {
    f: &'a F,
    scale: SVector<f64, D>,
}

impl<const D: usize, F> System<f64, DVector<f64>> for Rhs<'_, F, D>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    fn system(&self, _x: f64, z: &DVector<f64>, dz: &mut DVector<f64>) {
        let y = SVector::<f64, D>::from_fn(|i, _| z[i] * self.scale[i]);
        let mut dy = SVector::<f64, D>::zeros();
        (self.f)(z[D], &y, &mut dy);
        for i in 0..D {
            dz[i] = dy[i] / self.scale[i];
        }
        dz[D] = 1.0;
    }
}

/// Integrates `y' = rhs(x, y)` from `(x0, y0)` through `outputs`, which must
/// be monotone in the direction of integration. An output equal to `x0`
/// records the initial state.
pub fn integrate_linear<const D: usize, F>(
    rhs: &F,
    x0: f64,
    y0: SVector<f64, D>,
    outputs: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory<D>>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    integrate_linear_with_floor(rhs, x0, y0, outputs, tol, 1e-30)
}

/// As [`integrate_linear`], with components smaller than `floor` times the
/// largest one scaled like the largest one instead of by their own size. Systems whose
/// derivatives cancel between large components need a floor well above
/// roundoff, or the scaled noise stalls the step-size control.
pub fn integrate_linear_with_floor<const D: usize, F>(
    rhs: &F,
    x0: f64,
    y0: SVector<f64, D>,
    outputs: &[f64],
    tol: &Tolerances,
    floor: f64,
) -> Result<Trajectory<D>>
where
    F: Fn(f64, &SVector<f64, D>, &mut SVector<f64, D>),
{
    let mut traj = Trajectory {
        x: Vec::with_capacity(outputs.len()),
        y: Vec::with_capacity(outputs.len()),
        log_scale: Vec::with_capacity(outputs.len()),
    };
    let mut x = x0;
    let mut y = y0;
    let mut log_scale = 0.0;
    for &target in outputs {
        let norm = y.amax();
        if norm > 0.0 && norm.is_finite() {
            y /= norm;
            log_scale += norm.ln();
        }
        if (target - x).abs() > 1e-14 * (1.0 + x.abs()) {
            let top = y.amax().max(f64::MIN_POSITIVE);
            let scale = y.map(|v| if v.abs() > floor * top { v.abs() } else { top });
            let mut solver = Dop853::from_param(
                Rhs { f: rhs, scale },
                x,
                target,
                target - x,
                DVector::from_fn(D + 1, |i, _| if i < D { y[i] / scale[i] } else { x }),
                tol.rtol,
                tol.atol,
                0.9,
                0.0,
                0.333,
                6.0,
                (target - x).abs(),
                0.0,
                100_000,
                u32::MAX,
                OutputType::Sparse,
            );
            solver.integrate().map_err(|e| Error::Integration { at: x, reason: e.to_string() })?;
            let end = solver.y_out().last().expect("solver records the end state");
            y = SVector::<f64, D>::from_fn(|i, _| end[i] * scale[i]);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration { at: target, reason: "non-finite state".into() });
            }
            x = target;
        }
        traj.x.push(target);
        traj.y.push(y);
        traj.log_scale.push(log_scale);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let rhs = |_x: f64, y: &SVector<f64, 2>, dy: &mut SVector<f64, 2>| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let outs: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        let tr = integrate_linear(&rhs, 0.0, SVector::<f64, 2>::new(0.0, 1.0), &outs, &Tolerances::default()).unwrap();
        for (i, x) in tr.x.iter().enumerate() {
            assert!((tr.state(i)[0] - x.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_growth_over_many_decades() {
        let rhs = |_x: f64, y: &SVector<f64, 1>, dy: &mut SVector<f64, 1>| dy[0] = 5.0 * y[0];
        let outs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let tr = integrate_linear(&rhs, 0.0, SVector::<f64, 1>::new(1.0), &outs, &Tolerances::default()).unwrap();
        let last = tr.len() - 1;
        let log_val = tr.y[last][0].ln() + tr.log_scale[last];
        assert!((log_val - 500.0).abs() < 1e-7);
    }

    #[test]
    fn non_autonomous_rhs() {
        let rhs = |x: f64, y: &SVector<f64, 1>, dy: &mut SVector<f64, 1>| dy[0] = x.cos() * y[0];
        for rtol in [1e-8, 1e-12] {
            let tol = Tolerances { rtol, atol: 1e-2 * rtol };
            let tr = integrate_linear(&rhs, 0.0, SVector::<f64, 1>::new(1.0), &[10.0], &tol).unwrap();
            assert!((tr.state(0)[0] - 10f64.sin().exp()).abs() < 100.0 * rtol);
        }
    }

    #[test]
    fn backward_integration() {
        let rhs = |_x: f64, y: &SVector<f64, 1>, dy: &mut SVector<f64, 1>| dy[0] = y[0];
        let tr =
            integrate_linear(&rhs, 0.0, SVector::<f64, 1>::new(1.0), &[-0.5, -2.0], &Tolerances::default()).unwrap();
        assert!((tr.state(1)[0] - (-2.0f64).exp()).abs() < 1e-11);
    }
}
