use crate::error::{Error, Result};
use crate::geometry::{Branch, CloakPoint, CoatingSpec};
use crate::media::principal_media;

/// Sturm-Liouville coefficients of `(p u')' + (k^2 w - l(l+1) q) u = 0`,
/// per unit solid angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coeffs {
    /// `r^2 sigma_rr`, the radial flux weight.
    pub p: f64,
    /// `sigma_tt`, the tangential weight.
    pub q: f64,
    /// `r^2 |g|^{1/2}`.
    pub w: f64,
}

impl Coeffs {
    pub fn homogeneous(r: f64) -> Self {
        Self { p: r * r, q: 1.0, w: r * r }
    }

    fn nan() -> Self {
        Self { p: f64::NAN, q: f64::NAN, w: f64::NAN }
    }
}

/// Radial reduction of the cloaked Helmholtz operator on a ball coating.
#[derive(Debug, Clone, Copy)]
pub struct RadialCoefficients {
    pub spec: CoatingSpec,
    pub l: usize,
}

/// Coefficient functions for degree `l`. Only ball coatings are radially
/// symmetric in the required sense.
pub fn radial_coefficients(spec: &CoatingSpec, l: usize) -> Result<RadialCoefficients> {
    spec.validate()?;
    if spec.is_cylinder() {
        return Err(Error::Unsupported("spherical mode reduction needs a ball coating".into()));
    }
    Ok(RadialCoefficients { spec: *spec, l })
}

impl RadialCoefficients {
    /// `l(l+1)`.
    pub fn ell(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }

    /// Coefficients at distance `gap` from the surface on one side.
    pub fn at(&self, branch: Branch, gap: f64) -> Result<Coeffs> {
        let point = CloakPoint { branch, gap, dir: [1.0, 0.0, 0.0], axial: 0.0 };
        let m = principal_media(&self.spec, &point)?;
        let r = point.radius(&self.spec);
        Ok(Coeffs { p: r * r * m.material[0], q: m.material[1], w: r * r * m.det_sqrt() })
    }

    /// As [`Self::at`], with failures mapped to NaN so they surface as
    /// non-finite integrator states.
    pub(crate) fn at_or_nan(&self, branch: Branch, gap: f64) -> Coeffs {
        self.at(branch, gap).unwrap_or_else(|_| Coeffs::nan())
    }

    /// Radial metric eigenvalue `g(d_r, d_r)`.
    pub fn radial_metric(&self, branch: Branch, gap: f64) -> Result<f64> {
        let point = CloakPoint { branch, gap, dir: [1.0, 0.0, 0.0], axial: 0.0 };
        Ok(principal_media(&self.spec, &point)?.metric[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CoatingKind, Interior};

    #[test]
    fn uncoated_interior_is_homogeneous() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let c = radial_coefficients(&spec, 3).unwrap();
        let got = c.at(Branch::Interior, 0.4).unwrap();
        let want = Coeffs::homogeneous(0.6);
        assert!((got.p - want.p).abs() < 1e-15 && (got.w - want.w).abs() < 1e-15);
        assert_eq!(got.q, 1.0);
    }

    #[test]
    fn canonical_exterior_closed_form() {
        let spec = CoatingSpec::canonical(CoatingKind::SingleBall);
        let c = radial_coefficients(&spec, 2).unwrap();
        for t in [1e-8, 1e-3, 0.5, 1.0] {
            let got = c.at(Branch::Exterior, t).unwrap();
            assert!((got.p - 2.0 * t * t).abs() <= 1e-13 * t * t);
            assert!((got.q - 2.0).abs() < 1e-13);
            assert!((got.w - 8.0 * t * t).abs() <= 1e-13 * t * t);
        }
    }

    #[test]
    fn double_ball_flux_weight_continuous() {
        let spec = CoatingSpec::canonical(CoatingKind::DoubleBall);
        assert_eq!(spec.interior, Interior::RoundSphere);
        let c = radial_coefficients(&spec, 0).unwrap();
        let ext = c.at(Branch::Exterior, 1e-7).unwrap().p;
        let int = c.at(Branch::Interior, 1e-7).unwrap().p;
        assert!(ext < 1e-13 && int < 1e-13);
        assert!(radial_coefficients(&CoatingSpec::canonical(CoatingKind::DoubleCylinder), 0).is_err());
    }
}
