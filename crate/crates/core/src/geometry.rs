//! Coating maps for ball and cylinder cloaks.
//!
//! The exterior branch is a radial map `rho -> r` that blows the origin (ball)
//! or the axis (cylinder) up onto the cloaking surface `r = a` and fixes the
//! outer boundary `r = R`. Interior branches of double coatings are represented
//! only through their metric (see `media`), so their chart map is the identity.
//!
//! Points carry their distance to the surface explicitly, because near the
//! surface `r - a` cannot be recovered from Cartesian coordinates with full
//! relative precision.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoatingKind {
    SingleBall,
    DoubleBall,
    SingleCylinderShs,
    DoubleCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stretch {
    /// `r = a + rho (R - a) / R`.
    #[default]
    CanonicalLinear,
    /// `r = f(rho)` with `f = tau/2 + a` near 0, the identity past `2a`, and a
    /// quintic blend in between.
    AppendixSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interior {
    #[serde(rename = "euclidean-ball")]
    EuclideanBall,
    /// Round 3-sphere of radius `a / pi` with the north pole blown up.
    #[serde(rename = "round-3-sphere")]
    RoundSphere,
    /// `S^2 x R` with a round `S^2` of radius `a / pi`.
    #[serde(rename = "product-s2xr")]
    ProductS2R,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoatingSpec {
    pub kind: CoatingKind,
    #[serde(default = "default_outer")]
    pub outer_radius: f64,
    #[serde(default = "default_cloak")]
    pub cloak_radius: f64,
    #[serde(default)]
    pub stretch: Stretch,
    pub interior: Interior,
}

fn default_outer() -> f64 {
    2.0
}

fn default_cloak() -> f64 {
    1.0
}

impl CoatingSpec {
    /// The canonical construction (`a = 1`, `R = 2`, linear stretch) of a kind.
    pub fn canonical(kind: CoatingKind) -> Self {
        let interior = match kind {
            CoatingKind::SingleBall => Interior::EuclideanBall,
            CoatingKind::DoubleBall => Interior::RoundSphere,
            CoatingKind::SingleCylinderShs => Interior::None,
            CoatingKind::DoubleCylinder => Interior::ProductS2R,
        };
        Self { kind, outer_radius: 2.0, cloak_radius: 1.0, stretch: Stretch::CanonicalLinear, interior }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, r) = (self.cloak_radius, self.outer_radius);
        if !(a.is_finite() && r.is_finite() && a > 0.0 && r > a) {
            return Err(Error::InvalidSpec(format!("need 0 < cloak_radius < outer_radius, got a = {a}, R = {r}")));
        }
        if self.stretch == Stretch::AppendixSmooth && !(r >= 2.0 * a && r <= 3.0 * a) {
            return Err(Error::InvalidSpec(format!(
                "appendix-smooth stretch needs 2a <= R <= 3a, got a = {a}, R = {r}"
            )));
        }
        let ok = match self.kind {
            CoatingKind::SingleBall | CoatingKind::SingleCylinderShs => {
                matches!(self.interior, Interior::EuclideanBall | Interior::None)
            }
            CoatingKind::DoubleBall => self.interior == Interior::RoundSphere,
            CoatingKind::DoubleCylinder => self.interior == Interior::ProductS2R,
        };
        if !ok {
            return Err(Error::InvalidSpec(format!(
                "interior {:?} is incompatible with kind {:?}",
                self.interior, self.kind
            )));
        }
        Ok(())
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self.kind, CoatingKind::SingleCylinderShs | CoatingKind::DoubleCylinder)
    }

    pub fn is_double(&self) -> bool {
        matches!(self.kind, CoatingKind::DoubleBall | CoatingKind::DoubleCylinder)
    }

    pub fn radial_map(&self) -> RadialMap {
        RadialMap { a: self.cloak_radius, outer: self.outer_radius, stretch: self.stretch }
    }
}

/// Side of the cloaking surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Exterior,
    Interior,
}

/// A point of `N` off the cloaking surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloakPoint {
    pub branch: Branch,
    /// Distance `|r - a|` to the surface, measured along the radius.
    pub gap: f64,
    /// Unit direction: in 3D for balls, in the `xy`-plane for cylinders.
    pub dir: [f64; 3],
    /// Axial coordinate; only meaningful for cylinders.
    pub axial: f64,
}

impl CloakPoint {
    pub fn exterior(gap: f64, dir: [f64; 3]) -> Self {
        Self { branch: Branch::Exterior, gap, dir: normalize(dir), axial: 0.0 }
    }

    pub fn interior(gap: f64, dir: [f64; 3]) -> Self {
        Self { branch: Branch::Interior, gap, dir: normalize(dir), axial: 0.0 }
    }

    /// Classifies a Cartesian point. Points on the surface are rejected.
    pub fn from_cartesian(spec: &CoatingSpec, x: [f64; 3]) -> Result<Self> {
        let (r, dir, axial) = if spec.is_cylinder() {
            let r = x[0].hypot(x[1]);
            let dir = if r > 0.0 { [x[0] / r, x[1] / r, 0.0] } else { [1.0, 0.0, 0.0] };
            (r, dir, x[2])
        } else {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let dir = if r > 0.0 { [x[0] / r, x[1] / r, x[2] / r] } else { [0.0, 0.0, 1.0] };
            (r, dir, 0.0)
        };
        let a = spec.cloak_radius;
        let gap = (r - a).abs();
        if gap == 0.0 {
            return Err(Error::OnSingularSurface { gap });
        }
        let branch = if r > a { Branch::Exterior } else { Branch::Interior };
        Ok(Self { branch, gap, dir, axial })
    }

    /// Radius `r` (spherical for balls, cylindrical for cylinders).
    pub fn radius(&self, spec: &CoatingSpec) -> f64 {
        match self.branch {
            Branch::Exterior => spec.cloak_radius + self.gap,
            Branch::Interior => spec.cloak_radius - self.gap,
        }
    }

    pub fn to_cartesian(&self, spec: &CoatingSpec) -> [f64; 3] {
        let r = self.radius(spec);
        let mut x = [r * self.dir[0], r * self.dir[1], r * self.dir[2]];
        if spec.is_cylinder() {
            x[2] = self.axial;
        }
        x
    }
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n == 0.0 {
        [0.0, 0.0, 1.0]
    } else {
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

/// The exterior radial map `rho -> r` of a coating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMap {
    pub a: f64,
    pub outer: f64,
    pub stretch: Stretch,
}

impl RadialMap {
    /// `r - a` as a function of `rho`, computed without cancellation.
    pub fn forward_gap(&self, rho: f64) -> f64 {
        match self.stretch {
            Stretch::CanonicalLinear => rho * (self.outer - self.a) / self.outer,
            Stretch::AppendixSmooth => appendix_gap(rho, self.a),
        }
    }

    pub fn forward(&self, rho: f64) -> f64 {
        match self.stretch {
            Stretch::CanonicalLinear => self.a + self.forward_gap(rho),
            Stretch::AppendixSmooth => appendix_value(rho, self.a),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match self.stretch {
            Stretch::CanonicalLinear => (self.outer - self.a) / self.outer,
            Stretch::AppendixSmooth => appendix_slope(rho, self.a),
        }
    }

    /// `rho` as a function of the gap `t = r - a`.
    pub fn inverse_gap(&self, t: f64) -> f64 {
        match self.stretch {
            Stretch::CanonicalLinear => t * self.outer / (self.outer - self.a),
            Stretch::AppendixSmooth => appendix_inverse_gap(t, self.a),
        }
    }
}

// Quintic Hermite blend on [a/2, 2a] between tau/2 + a and tau, matching
// value, slope and (zero) curvature at both ends.
fn blend_coordinates(tau: f64, a: f64) -> (f64, f64) {
    let t0 = 0.5 * a;
    let h = 1.5 * a;
    ((tau - t0) / h, h)
}

fn blend_value(s: f64, a: f64, h: f64) -> f64 {
    let (s2, s3) = (s * s, s * s * s);
    let (s4, s5) = (s3 * s, s3 * s2);
    let h1 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let g0 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let g1 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    // f = f0 + (f1 - f0) H1 + h (m0 G0 + m1 G1) with f0 = 5a/4, f1 = 2a.
    1.25 * a + 0.75 * a * h1 + h * (0.5 * g0 + g1)
}

fn blend_slope(s: f64) -> f64 {
    let s2 = s * s;
    0.5 - 6.0 * s2 + 14.0 * s2 * s - 7.5 * s2 * s2
}

fn appendix_value(tau: f64, a: f64) -> f64 {
    if tau <= 0.5 * a {
        0.5 * tau + a
    } else if tau >= 2.0 * a {
        tau
    } else {
        let (s, h) = blend_coordinates(tau, a);
        blend_value(s, a, h)
    }
}

fn appendix_gap(tau: f64, a: f64) -> f64 {
    if tau <= 0.5 * a {
        0.5 * tau
    } else {
        appendix_value(tau, a) - a
    }
}

fn appendix_slope(tau: f64, a: f64) -> f64 {
    if tau <= 0.5 * a {
        0.5
    } else if tau >= 2.0 * a {
        1.0
    } else {
        blend_slope(blend_coordinates(tau, a).0)
    }
}

fn appendix_inverse_gap(t: f64, a: f64) -> f64 {
    if t <= 0.25 * a {
        return 2.0 * t;
    }
    if t >= a {
        return t + a;
    }
    let target = a + t;
    let mut conv = roots::SimpleConvergency { eps: 1e-15, max_iter: 200 };
    roots::find_root_brent(0.5 * a, 2.0 * a, |tau| appendix_value(tau, a) - target, &mut conv).unwrap_or(f64::NAN)
}

/// The smooth stretching profile `f` on `[0, 3a]`.
pub fn stretch_appendix(tau: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !(0.0..=3.0 * a).contains(&tau) {
        return Err(Error::domain(tau, format!("[0, {}]", 3.0 * a)));
    }
    Ok(appendix_value(tau, a))
}

/// Exterior map `rho -> r`.
pub fn map_forward(spec: &CoatingSpec, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= spec.outer_radius) {
        return Err(Error::domain(rho, format!("(0, {}]", spec.outer_radius)));
    }
    Ok(spec.radial_map().forward(rho))
}

/// Exterior inverse map `r -> rho`.
pub fn map_inverse(spec: &CoatingSpec, r: f64) -> Result<f64> {
    let a = spec.cloak_radius;
    if r <= a {
        return Err(Error::OnSingularSurface { gap: r - a });
    }
    if r > spec.outer_radius * (1.0 + 1e-15) {
        return Err(Error::domain(r, format!("({a}, {}]", spec.outer_radius)));
    }
    Ok(spec.radial_map().inverse_gap(r - a))
}

/// Jacobian `DF^{-1}` of the inverse coating map at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian {
    /// Cartesian matrix.
    pub matrix: Matrix3<f64>,
    pub det: f64,
    /// `d rho / d r`.
    pub radial: f64,
    /// `rho / r`.
    pub angular: f64,
    /// `rho / r` for balls, 1 for cylinders.
    pub second_tangential: f64,
}

/// Orthonormal frame at a point: radial, then the two tangential directions
/// (for cylinders: angular then axial).
pub fn local_frame(spec: &CoatingSpec, point: &CloakPoint) -> Matrix3<f64> {
    let d = point.dir;
    if spec.is_cylinder() {
        let e_r = Vector3::new(d[0], d[1], 0.0);
        let e_t = Vector3::new(-d[1], d[0], 0.0);
        let e_z = Vector3::new(0.0, 0.0, 1.0);
        Matrix3::from_columns(&[e_r, e_t, e_z])
    } else {
        let e_r = Vector3::new(d[0], d[1], d[2]);
        // Pick the coordinate axis least aligned with e_r to complete the frame.
        let mut axis = Vector3::zeros();
        let i = (0..3).min_by(|&i, &j| d[i].abs().partial_cmp(&d[j].abs()).unwrap()).unwrap();
        axis[i] = 1.0;
        let e_1 = (axis - e_r * e_r.dot(&axis)).normalize();
        let e_2 = e_r.cross(&e_1);
        Matrix3::from_columns(&[e_r, e_1, e_2])
    }
}

pub fn jacobian(spec: &CoatingSpec, point: &CloakPoint) -> Result<Jacobian> {
    spec.validate()?;
    if point.gap == 0.0 {
        return Err(Error::OnSingularSurface { gap: 0.0 });
    }
    let (radial, angular, second) = match point.branch {
        Branch::Interior => (1.0, 1.0, 1.0),
        Branch::Exterior => {
            let map = spec.radial_map();
            let r = point.radius(spec);
            if r > spec.outer_radius * (1.0 + 1e-15) {
                return Err(Error::domain(r, "exterior branch (a, R]"));
            }
            let rho = map.inverse_gap(point.gap);
            let radial = 1.0 / map.derivative(rho);
            let angular = rho / r;
            let second = if spec.is_cylinder() { 1.0 } else { angular };
            (radial, angular, second)
        }
    };
    let q = local_frame(spec, point);
    let d = Matrix3::from_diagonal(&Vector3::new(radial, angular, second));
    Ok(Jacobian {
        matrix: q * d * q.transpose(),
        det: radial * angular * second,
        radial,
        angular,
        second_tangential: second,
    })
}

/// Jacobian at a Cartesian point.
pub fn jacobian_at(spec: &CoatingSpec, x: [f64; 3]) -> Result<Jacobian> {
    jacobian(spec, &CloakPoint::from_cartesian(spec, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball() -> CoatingSpec {
        CoatingSpec::canonical(CoatingKind::SingleBall)
    }

    #[test]
    fn canonical_examples() {
        let s = ball();
        assert_eq!(map_forward(&s, 2.0).unwrap(), 2.0);
        assert_eq!(map_forward(&s, 1.0).unwrap(), 1.5);
        assert!((map_forward(&s, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(map_inverse(&s, 2.0).unwrap(), 2.0);
        assert_eq!(map_inverse(&s, 1.5).unwrap(), 1.0);
        let rho = map_inverse(&s, 1.0 + 1e-9).unwrap();
        assert!((rho - 2e-9).abs() < 1e-15);
        assert!(map_inverse(&s, 1.0).is_err());
        assert!(map_forward(&s, 0.0).is_err());
        assert!(map_forward(&s, 2.5).is_err());
    }

    #[test]
    fn blow_up_rate() {
        let s = ball();
        let map = s.radial_map();
        for t in [1e-3, 1e-6, 1e-9] {
            let ratio = map.inverse_gap(t) / t;
            assert!((ratio - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn appendix_profile_endpoints_and_monotone() {
        let a = 1.3;
        assert_eq!(stretch_appendix(0.0, a).unwrap(), a);
        assert!((stretch_appendix(3.0 * a, a).unwrap() - 3.0 * a).abs() < 1e-15);
        assert!(stretch_appendix(-0.1, a).is_err());
        assert!(stretch_appendix(3.0 * a + 0.1, a).is_err());
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let v = stretch_appendix(3.0 * a * i as f64 / 999.0, a).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // value and slope continuity at the blend ends
        for tau in [0.5 * a, 2.0 * a] {
            let lo = appendix_value(tau - 1e-9, a);
            let hi = appendix_value(tau + 1e-9, a);
            assert!((lo - hi).abs() < 1e-8);
            let sl = appendix_slope(tau - 1e-9, a);
            let sh = appendix_slope(tau + 1e-9, a);
            assert!((sl - sh).abs() < 1e-7);
        }
    }

    #[test]
    fn appendix_inverse_round_trip() {
        let spec = CoatingSpec { stretch: Stretch::AppendixSmooth, outer_radius: 3.0, ..ball() };
        spec.validate().unwrap();
        for i in 1..=200 {
            let r = 1.0 + 2.0 * i as f64 / 200.0;
            let rho = map_inverse(&spec, r).unwrap();
            let back = map_forward(&spec, rho).unwrap();
            assert!((back - r).abs() <= 1e-12 * r, "r={r} back={back}");
        }
    }

    #[test]
    fn jacobian_examples() {
        let s = ball();
        let j = jacobian_at(&s, [2.0, 0.0, 0.0]).unwrap();
        assert!((j.radial - 2.0).abs() < 1e-15);
        assert!((j.angular - 1.0).abs() < 1e-15);
        assert!((j.det - 2.0).abs() < 1e-15);
        let i = jacobian(&s, &CloakPoint::interior(0.5, [0.0, 1.0, 0.0])).unwrap();
        assert_eq!(i.matrix, Matrix3::identity());
        assert!(jacobian_at(&s, [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = ball();
        s.interior = Interior::RoundSphere;
        assert!(s.validate().is_err());
        let mut s = ball();
        s.cloak_radius = 3.0;
        assert!(s.validate().is_err());
        for kind in [
            CoatingKind::SingleBall,
            CoatingKind::DoubleBall,
            CoatingKind::SingleCylinderShs,
            CoatingKind::DoubleCylinder,
        ] {
            CoatingSpec::canonical(kind).validate().unwrap();
        }
    }
}
