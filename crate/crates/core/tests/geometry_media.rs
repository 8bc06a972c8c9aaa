//! Cross-module properties of the coating maps, their Jacobians, the
//! assembled media and the radial Sturm-Liouville coefficients.

use cloakcheck::geometry::{
    jacobian, jacobian_at, map_forward, map_inverse, Branch, CloakPoint, CoatingKind, CoatingSpec, Stretch,
};
use cloakcheck::helmholtz::radial_coefficients;
use cloakcheck::media::{pushforward_tensor, sample_cloak_media, MaterialTensor};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn all_specs() -> Vec<CoatingSpec> {
    let mut v: Vec<CoatingSpec> =
        [CoatingKind::SingleBall, CoatingKind::DoubleBall, CoatingKind::SingleCylinderShs, CoatingKind::DoubleCylinder]
            .into_iter()
            .map(CoatingSpec::canonical)
            .collect();
    v.push(CoatingSpec { stretch: Stretch::AppendixSmooth, ..CoatingSpec::canonical(CoatingKind::SingleBall) });
    v.push(CoatingSpec {
        stretch: Stretch::AppendixSmooth,
        outer_radius: 3.0,
        ..CoatingSpec::canonical(CoatingKind::DoubleBall)
    });
    v
}

/// Exterior inverse map in Cartesian coordinates, `x -> (rho / r) x` in the
/// radial plane.
fn inverse_cartesian(spec: &CoatingSpec, x: Vector3<f64>) -> Vector3<f64> {
    let r = if spec.is_cylinder() { x[0].hypot(x[1]) } else { x.norm() };
    let s = map_inverse(spec, r).unwrap() / r;
    if spec.is_cylinder() {
        Vector3::new(s * x[0], s * x[1], x[2])
    } else {
        x * s
    }
}

/// Fourth-order central differences of [`inverse_cartesian`].
fn fd_jacobian(spec: &CoatingSpec, x: Vector3<f64>, h: f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for j in 0..3 {
        let e = Vector3::ith(j, h);
        let col = (inverse_cartesian(spec, x - 2.0 * e) - 8.0 * inverse_cartesian(spec, x - e)
            + 8.0 * inverse_cartesian(spec, x + e)
            - inverse_cartesian(spec, x + 2.0 * e))
            / (12.0 * h);
        m.set_column(j, &col);
    }
    m
}

fn point(spec: &CoatingSpec, frac: f64, d: [f64; 3]) -> CloakPoint {
    let dir = if spec.is_cylinder() { [d[0], d[1], 0.0] } else { d };
    CloakPoint::exterior(frac * (spec.outer_radius - spec.cloak_radius), dir)
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0).prop_filter("nonzero", |d| d[0].abs() + d[1].abs() > 1e-3)
}

#[test]
fn boundary_is_fixed_for_every_spec() {
    for spec in all_specs() {
        let r = map_forward(&spec, spec.outer_radius).unwrap();
        assert!((r - spec.outer_radius).abs() < 1e-14, "{spec:?}: {r}");
    }
}

#[test]
fn coefficients_match_direct_assembly_at_fifty_radii() {
    for kind in [CoatingKind::SingleBall, CoatingKind::DoubleBall] {
        let spec = CoatingSpec::canonical(kind);
        let coeffs = radial_coefficients(&spec, 3).unwrap();
        let span = spec.outer_radius - spec.cloak_radius;
        for i in 0..50 {
            let t = span * 10f64.powf(-3.0 + 3.0 * i as f64 / 49.0) * 0.999;
            let p = CloakPoint::exterior(t, [1.0, 0.0, 0.0]);
            let r = p.radius(&spec);
            // Material from the finite-difference Jacobian of the inverse map.
            let x = Vector3::new(r, 0.0, 0.0);
            let inv = fd_jacobian(&spec, x, 1e-4);
            let df = inv.try_inverse().unwrap();
            let sigma = pushforward_tensor(&MaterialTensor(Matrix3::identity()), &df, df.determinant()).unwrap().0;
            let got = coeffs.at(Branch::Exterior, t).unwrap();
            let want_p = r * r * sigma[(0, 0)];
            let want_q = sigma[(1, 1)];
            let want_w = r * r * sigma.determinant();
            for (g, w, what) in [(got.p, want_p, "p"), (got.q, want_q, "q"), (got.w, want_w, "w")] {
                assert!((g - w).abs() <= 1e-10 * w.abs(), "{kind:?} t={t} {what}: {g} vs {w}");
            }
            // The same values from the sampled media.
            let m = sample_cloak_media(&spec, &p).unwrap().material.0;
            assert!((got.p - r * r * m[(0, 0)]).abs() <= 1e-12 * got.p);
            assert!((got.w - r * r * m.determinant()).abs() <= 1e-12 * got.w);
        }
    }
}

proptest! {
    #[test]
    fn radial_map_round_trips(exp in -12.0f64..0.0, which in 0usize..6) {
        // Radii near the surface carry the gap in their last digits, so the
        // absolute round trips are relative to the radius and the gap form is
        // relative to the gap.
        let spec = all_specs()[which];
        let span = spec.outer_radius - spec.cloak_radius;
        let t = span * 10f64.powf(exp);
        let r = spec.cloak_radius + t;
        let rho = map_inverse(&spec, r).unwrap();
        let back = map_forward(&spec, rho).unwrap();
        prop_assert!((back - r).abs() <= 1e-12 * r, "{spec:?}: {r} -> {rho} -> {back}");
        let rho2 = map_inverse(&spec, back).unwrap();
        prop_assert!((rho2 - rho).abs() <= 1e-12 * spec.outer_radius);
        let map = spec.radial_map();
        let gap = map.forward_gap(map.inverse_gap(t));
        prop_assert!((gap - t).abs() <= 1e-12 * t, "{spec:?}: gap {t} -> {gap}");
    }

    #[test]
    fn cartesian_classification_round_trips(frac in 1e-6f64..0.999, d in direction(), z in -3.0f64..3.0, which in 0usize..6) {
        let spec = all_specs()[which];
        let mut p = point(&spec, frac, d);
        if spec.is_cylinder() {
            p.axial = z;
        }
        let x = p.to_cartesian(&spec);
        let q = CloakPoint::from_cartesian(&spec, x).unwrap();
        prop_assert_eq!(q.branch, Branch::Exterior);
        prop_assert!((q.gap - p.gap).abs() <= 1e-12 * spec.outer_radius);
        let y = q.to_cartesian(&spec);
        for i in 0..3 {
            prop_assert!((x[i] - y[i]).abs() <= 1e-12 * spec.outer_radius);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences(frac in 0.05f64..0.95, d in direction(), which in 0usize..6) {
        let spec = all_specs()[which];
        let p = point(&spec, frac, d);
        let x = p.to_cartesian(&spec);
        let jac = jacobian_at(&spec, x).unwrap();
        let h = 1e-6;
        let xv = Vector3::from(x);
        let mut fd = Matrix3::zeros();
        for j in 0..3 {
            let e = Vector3::ith(j, h);
            fd.set_column(j, &((inverse_cartesian(&spec, xv + e) - inverse_cartesian(&spec, xv - e)) / (2.0 * h)));
        }
        prop_assert!((fd - jac.matrix).abs().max() < 1e-8, "{spec:?} at {x:?}: {}", (fd - jac.matrix).abs().max());
    }

    #[test]
    fn jacobian_determinant_is_the_block_product(frac in 1e-6f64..0.999, d in direction(), which in 0usize..6) {
        let spec = all_specs()[which];
        let jac = jacobian(&spec, &point(&spec, frac, d)).unwrap();
        let blocks = jac.radial * jac.angular * jac.second_tangential;
        prop_assert!((jac.det - blocks).abs() <= 1e-12 * blocks.abs());
        let det = jac.matrix.determinant();
        prop_assert!((det - blocks).abs() <= 1e-12 * blocks.abs().max(1.0));
        let mut eig: Vec<f64> = jac.matrix.symmetric_eigenvalues().iter().copied().collect();
        let mut want = vec![jac.radial, jac.angular, jac.second_tangential];
        eig.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sampled_media_are_the_pushforward_of_the_identity(frac in 1e-4f64..0.999, d in direction(), which in 0usize..6) {
        let spec = all_specs()[which];
        let p = point(&spec, frac, d);
        let m = sample_cloak_media(&spec, &p).unwrap();
        let jac = jacobian(&spec, &p).unwrap();
        let df = jac.matrix.try_inverse().unwrap();
        let direct = pushforward_tensor(&MaterialTensor(Matrix3::identity()), &df, 1.0 / jac.det).unwrap();
        let scale = direct.0.abs().max();
        prop_assert!((direct.0 - m.material.0).abs().max() <= 1e-12 * scale);
        prop_assert!(m.material.0.cholesky().is_some());
    }
}
