//! The exterior map and its inverse reject out-of-range radii and otherwise
//! round-trip, in radius form and in gap form, for both stretch profiles.

#![no_main]

use cloakcheck::geometry::{map_forward, map_inverse, CoatingKind, CoatingSpec, Stretch};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some(bytes) = data.get(..8) else { return };
    let rho = f64::from_le_bytes(bytes.try_into().unwrap());
    let stretch =
        if data.get(8).is_some_and(|b| b & 1 == 1) { Stretch::AppendixSmooth } else { Stretch::CanonicalLinear };
    let spec = CoatingSpec { stretch, ..CoatingSpec::canonical(CoatingKind::SingleBall) };
    let Ok(r) = map_forward(&spec, rho) else { return };
    assert!(r >= spec.cloak_radius && r <= spec.outer_radius * (1.0 + 1e-15));
    if let Ok(back) = map_inverse(&spec, r) {
        // Near the surface the radius holds the gap in its last digits, so
        // the preimage is only recovered to a multiple of the outer radius.
        assert!((back - rho).abs() <= 1e-12 * spec.outer_radius, "{rho} -> {r} -> {back}");
        let again = map_forward(&spec, back).unwrap();
        assert!((again - r).abs() <= 1e-12 * r, "{r} -> {back} -> {again}");
    }
    let map = spec.radial_map();
    let t = map.forward_gap(rho);
    if rho.is_normal() && t.is_normal() {
        let inv = map.inverse_gap(t);
        assert!((inv - rho).abs() <= 1e-12 * rho, "gap {rho} -> {t} -> {inv}");
    }
});
