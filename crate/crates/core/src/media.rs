//! Metrics, material tensor densities and their degeneracy near the surface.
//!
//! In three dimensions a metric `g` and a conductivity-type density `sigma`
//! correspond through `sigma = |g|^{1/2} g^{-1}`, with inverse
//! `g = det(sigma) sigma^{-1}`. Permittivity and permeability are both equal to
//! `sigma` throughout.

use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::geometry::{self, Branch, CloakPoint, CoatingSpec, Interior};
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use std::f64::consts::PI;

/// Distance to the surface below which samples are flagged as imprecise.
pub const PRECISION_FLOOR: f64 = 1e-10;

/// Covariant metric `g_jk` in Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor(pub Matrix3<f64>);

/// Contravariant tensor density `sigma^jk` (weight +1) in Cartesian components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialTensor(pub Matrix3<f64>);

fn check_spd(m: &Matrix3<f64>) -> Result<()> {
    let sym = (m - m.transpose()).abs().max() <= 1e-12 * m.abs().max().max(f64::MIN_POSITIVE);
    if !sym || m.iter().any(|v| !v.is_finite()) || m.cholesky().is_none() {
        return Err(Error::NotSpd);
    }
    Ok(())
}

pub fn metric_to_material(g: &MetricTensor) -> Result<MaterialTensor> {
    check_spd(&g.0)?;
    let inv = g.0.try_inverse().ok_or(Error::NotSpd)?;
    Ok(MaterialTensor(symmetrize(inv * g.0.determinant().sqrt())))
}

pub fn material_to_metric(sigma: &MaterialTensor) -> Result<MetricTensor> {
    check_spd(&sigma.0)?;
    let inv = sigma.0.try_inverse().ok_or(Error::NotSpd)?;
    Ok(MetricTensor(symmetrize(inv * sigma.0.determinant())))
}

fn symmetrize(m: Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// `(F_* sigma)^{jk} = (DF sigma DF^T)^{jk} / det DF`.
pub fn pushforward_tensor(sigma: &MaterialTensor, df: &Matrix3<f64>, det_df: f64) -> Result<MaterialTensor> {
    if det_df == 0.0 || !det_df.is_finite() {
        return Err(Error::SingularMap(det_df));
    }
    Ok(MaterialTensor(symmetrize(df * sigma.0 * df.transpose() / det_df)))
}

/// Principal values of the cloak media in the local frame
/// (radial, first tangential, second tangential).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalMedia {
    pub metric: [f64; 3],
    pub material: [f64; 3],
    pub frame: Matrix3<f64>,
}

impl PrincipalMedia {
    /// `|g|^{1/2}`, which equals `det sigma` in three dimensions.
    pub fn det_sqrt(&self) -> f64 {
        self.material.iter().product()
    }
}

/// Metric and material at a sampled point. Permittivity and permeability are
/// both the single stored `material` tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakMedia {
    pub metric: MetricTensor,
    pub material: MaterialTensor,
    pub principal: PrincipalMedia,
    pub precision_warning: bool,
}

impl CloakMedia {
    pub fn epsilon(&self) -> &MaterialTensor {
        &self.material
    }

    pub fn mu(&self) -> &MaterialTensor {
        &self.material
    }
}

/// `a/pi sin(pi r / a) / r` for the round interior, from the gap `a - r`.
fn sphere_profile(a: f64, gap: f64) -> f64 {
    let r = a - gap;
    let x = PI * r / a;
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        a / PI * (PI * gap / a).sin() / r
    }
}

/// Principal media at a point, avoiding Cartesian cancellation.
pub fn principal_media(spec: &CoatingSpec, point: &CloakPoint) -> Result<PrincipalMedia> {
    spec.validate()?;
    if point.gap == 0.0 {
        return Err(Error::OnSingularSurface { gap: 0.0 });
    }
    let frame = geometry::local_frame(spec, point);
    let material = match point.branch {
        Branch::Exterior => {
            let jac = geometry::jacobian(spec, point)?;
            let df =
                Matrix3::from_diagonal(&Vector3::new(1.0 / jac.radial, 1.0 / jac.angular, 1.0 / jac.second_tangential));
            let pushed = pushforward_tensor(&MaterialTensor(Matrix3::identity()), &df, 1.0 / jac.det)?;
            [pushed.0[(0, 0)], pushed.0[(1, 1)], pushed.0[(2, 2)]]
        }
        Branch::Interior => {
            if point.gap > spec.cloak_radius {
                return Err(Error::domain(point.gap, "interior gap must not exceed a"));
            }
            match spec.interior {
                Interior::EuclideanBall => [1.0; 3],
                Interior::RoundSphere => {
                    let s = sphere_profile(spec.cloak_radius, point.gap);
                    [s * s, 1.0, 1.0]
                }
                Interior::ProductS2R => {
                    let s = sphere_profile(spec.cloak_radius, point.gap);
                    [s, 1.0 / s, s]
                }
                Interior::None => {
                    return Err(Error::Unsupported("coating has no interior media".into()));
                }
            }
        }
    };
    let det: f64 = material.iter().product();
    let metric = [det / material[0], det / material[1], det / material[2]];
    Ok(PrincipalMedia { metric, material, frame })
}

/// Cloak metric and material tensor at a point off the surface.
pub fn sample_cloak_media(spec: &CoatingSpec, point: &CloakPoint) -> Result<CloakMedia> {
    let principal = principal_media(spec, point)?;
    let q = principal.frame;
    let assemble = |d: [f64; 3]| symmetrize(q * Matrix3::from_diagonal(&Vector3::from(d)) * q.transpose());
    Ok(CloakMedia {
        metric: MetricTensor(assemble(principal.metric)),
        material: MaterialTensor(assemble(principal.material)),
        principal,
        precision_warning: point.gap < PRECISION_FLOOR,
    })
}

/// Components of `|g|^{1/2} g^{ij}` in boundary normal coordinates
/// `(tau, angle, angle-or-axial)` at normal distance `tau` from the surface,
/// evaluated on the equator so the angular weight `sin(theta)` is 1.
///
/// These are the coordinates in which the two sides of a double coating glue
/// smoothly; the Cartesian radius is scaled differently on each side.
pub fn normal_coordinate_flux(spec: &CoatingSpec, branch: Branch, tau: f64) -> Result<[f64; 3]> {
    if tau <= 0.0 {
        return Err(Error::OnSingularSurface { gap: tau });
    }
    // The exterior metric is Euclidean in rho, the distance to the blown-up
    // point; the interiors are sin-warped products in the geodesic distance.
    let radius = match branch {
        Branch::Exterior => tau,
        Branch::Interior => match spec.interior {
            Interior::RoundSphere | Interior::ProductS2R => {
                let a = spec.cloak_radius;
                a / PI * (PI * tau / a).sin()
            }
            _ => return Err(Error::Unsupported("interior has no normal coordinates at the surface".into())),
        },
    };
    Ok(if spec.is_cylinder() { [radius, 1.0 / radius, radius] } else { [radius * radius, 1.0, 1.0] })
}

/// Degeneracy of one side of the surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideDegeneracy {
    pub branch: Branch,
    /// Fitted exponent `p` in `g(angular) ~ C dist^p`.
    pub tangential_exponent: f64,
    /// Fitted exponent `p` in `|g|^{1/2} ~ C dist^p`.
    pub det_sqrt_exponent: f64,
    /// Range of `|g|^{1/2} / dist^p` over the samples.
    pub constant_range: (f64, f64),
    /// Range of the radial metric eigenvalue over the samples.
    pub radial_eigenvalue: (f64, f64),
    /// `max |g^{-1} nu|` over the samples.
    pub flux_bound: f64,
    /// Metric eigenvalues whose sampled range stays within a factor 2.
    pub bounded_eigenvalues: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub exterior: SideDegeneracy,
    pub interior: Option<SideDegeneracy>,
    /// `|sigma_rr(exterior) - sigma_rr(interior)|` at distance `1e-7`.
    pub flux_jump: Option<f64>,
    pub sample_gaps: Vec<f64>,
}

fn side_report(spec: &CoatingSpec, branch: Branch, gaps: &[f64]) -> Result<SideDegeneracy> {
    let mut tangential = Vec::new();
    let mut det_sqrt = Vec::new();
    let mut radial = Vec::new();
    let mut eig_cols: [Vec<f64>; 3] = Default::default();
    let mut flux_bound: f64 = 0.0;
    for &gap in gaps {
        let p = CloakPoint { branch, gap, dir: [1.0, 0.0, 0.0], axial: 0.0 };
        let m = principal_media(spec, &p)?;
        tangential.push(m.metric[1]);
        det_sqrt.push(m.det_sqrt());
        radial.push(m.metric[0]);
        for i in 0..3 {
            eig_cols[i].push(m.metric[i]);
        }
        flux_bound = flux_bound.max(1.0 / m.metric[0]);
    }
    let slope = |y: &[f64]| loglog_slope(gaps, y).unwrap_or(f64::NAN);
    let det_p = slope(&det_sqrt);
    let consts: Vec<f64> = det_sqrt.iter().zip(gaps).map(|(d, g)| d / g.powf(det_p)).collect();
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(*x), hi.max(*x)));
    let bounded = eig_cols
        .iter()
        .filter(|c| {
            let (lo, hi) = range(c);
            lo > 0.0 && hi / lo < 2.0
        })
        .count();
    Ok(SideDegeneracy {
        branch,
        tangential_exponent: slope(&tangential),
        det_sqrt_exponent: det_p,
        constant_range: range(&consts),
        radial_eigenvalue: range(&radial),
        flux_bound,
        bounded_eigenvalues: bounded,
    })
}

/// Fits the power-law degeneracy of the media on each side of the surface
/// from 24 log-spaced distances in `[1e-7, 1e-3]`.
pub fn degeneracy_diagnostics(spec: &CoatingSpec) -> Result<DegeneracyReport> {
    spec.validate()?;
    let gaps: Vec<f64> = (0..24).map(|i| 10f64.powf(-7.0 + 4.0 * i as f64 / 23.0)).collect();
    let exterior = side_report(spec, Branch::Exterior, &gaps)?;
    let has_interior = !matches!(spec.interior, Interior::None);
    let interior = if has_interior { Some(side_report(spec, Branch::Interior, &gaps)?) } else { None };
    let flux_jump = if spec.is_double() {
        let ext = principal_media(spec, &CloakPoint::exterior(1e-7, [1.0, 0.0, 0.0]))?;
        let int = principal_media(spec, &CloakPoint::interior(1e-7, [1.0, 0.0, 0.0]))?;
        Some((ext.material[0] - int.material[0]).abs())
    } else {
        None
    };
    Ok(DegeneracyReport { exterior, interior, flux_jump, sample_gaps: gaps })
}

/// A 2-form `sum_{p<q} w_pq dx^p ^ dx^q`, stored as an antisymmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoForm(pub Matrix3<f64>);

impl TwoForm {
    /// Axial vector `w^l` with `w_pq = eps_lpq w^l`.
    pub fn axial(&self) -> Vector3<f64> {
        Vector3::new(self.0[(1, 2)], self.0[(2, 0)], self.0[(0, 1)])
    }

    pub fn from_axial(w: &Vector3<f64>) -> Self {
        TwoForm(Matrix3::new(0.0, w[2], -w[1], -w[2], 0.0, w[0], w[1], -w[0], 0.0))
    }
}

/// Hodge star of a 1-form: `(*E)_pq = |g|^{1/2} g^{jl} E_j eps_lpq`.
pub fn hodge_star_1form(g: &MetricTensor, e: &Vector3<f64>) -> Result<TwoForm> {
    let sigma = metric_to_material(g)?;
    Ok(TwoForm::from_axial(&(sigma.0 * e)))
}

/// Hodge star of a 2-form back to a 1-form: `E_j = |g|^{-1/2} g_jl w^l`.
pub fn hodge_star_2form(g: &MetricTensor, w: &TwoForm) -> Result<Vector3<f64>> {
    check_spd(&g.0)?;
    Ok(g.0 * w.axial() / g.0.determinant().sqrt())
}
