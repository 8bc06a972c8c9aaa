use super::{radial_coefficients, ModeBranch, ModeSample, RadialMode};
use crate::error::{Error, Result};
use crate::geometry::{Branch, CoatingSpec, Interior};
use crate::ode::{integrate_linear, Tolerances};
use crate::special::bessel::{sph_j_with_deriv, sph_y_with_deriv};
use crate::special::quadrature::GaussLegendre;
use ode_solvers::SVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Threshold on `|j_l'(ka)| / max(|j_l(ka)|, |j_l'(ka)|)` below which the
/// interior Neumann problem is declared resonant. The normalization keeps
/// small arguments at high degree, where both factors are tiny, from being
/// mistaken for resonances.
pub const NEUMANN_RESONANCE_TOL: f64 = 1e-8;

/// Radial source profile `F(r)` on the right of
/// `(p u')' + (k^2 w - l(l+1) q) u = F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadialSource {
    /// `strength * delta(r - radius)`.
    Shell { radius: f64, strength: f64 },
    /// `amplitude * (1 - ((r - center) / width)^2)^4` on `|r - center| < width`.
    Bump { center: f64, width: f64, amplitude: f64 },
}

impl RadialSource {
    fn support(&self) -> (f64, f64) {
        match *self {
            RadialSource::Shell { radius, .. } => (radius, radius),
            RadialSource::Bump { center, width, .. } => (center - width, center + width),
        }
    }

    fn profile(&self, r: f64) -> f64 {
        match *self {
            RadialSource::Shell { .. } => 0.0,
            RadialSource::Bump { center, width, amplitude } => {
                let x = (r - center) / width;
                if x.abs() < 1.0 {
                    amplitude * (1.0 - x * x).powi(4)
                } else {
                    0.0
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        match *self {
            RadialSource::Shell { strength, .. } => strength == 0.0,
            RadialSource::Bump { amplitude, .. } => amplitude == 0.0,
        }
    }

    /// `int K(r') F(r') dr'` over `lo < r' < hi`.
    fn weighted_integral<K: Fn(f64) -> f64>(&self, lo: f64, hi: f64, kernel: K, rule: &GaussLegendre) -> f64 {
        match *self {
            RadialSource::Shell { radius, strength } => {
                if radius > lo && radius <= hi {
                    strength * kernel(radius)
                } else {
                    0.0
                }
            }
            RadialSource::Bump { .. } => {
                let (a, b) = self.support();
                let (lo, hi) = (lo.max(a), hi.min(b));
                if hi <= lo {
                    0.0
                } else {
                    rule.integrate(lo, hi, |r| kernel(r) * self.profile(r))
                }
            }
        }
    }

    fn check(&self, a: f64, gap: f64) -> Result<()> {
        let (lo, hi) = self.support();
        let ok = match *self {
            RadialSource::Shell { radius, .. } => radius > 0.0,
            RadialSource::Bump { width, .. } => width > 0.0 && lo >= 0.0,
        };
        if !ok || hi > a - gap {
            return Err(Error::domain(hi, format!("source support inside r < {}", a - gap)));
        }
        Ok(())
    }
}

/// Result of an interior solve. At a resonance the solution is not unique and
/// `mode` is omitted; `compatibility` then holds the overlap of the source
/// with the resonant eigenfunction, which must vanish for solutions to exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorSolution {
    pub mode: Option<RadialMode>,
    pub resonance: bool,
    pub compatibility: Option<f64>,
}

/// Minimum distance between a source and the surface.
const SOURCE_GAP: f64 = 1e-6;

fn interior_radii(a: f64) -> Vec<f64> {
    let n = 100;
    let mut r: Vec<f64> = (0..n).map(|i| a * i as f64 / n as f64).collect();
    r.extend([1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12].iter().map(|g| a * (1.0 - g)));
    r
}

/// Closed-form solution of the interior Neumann problem on the Euclidean
/// ball, returned as `r -> (u, du/dr)`.
fn neumann_profile(l: usize, k: f64, a: f64, source: RadialSource) -> impl Fn(f64) -> (f64, f64) {
    let rule = GaussLegendre::new(32);
    let (_, yd_a) = sph_y_with_deriv(l, k * a);
    let (_, jd_a) = sph_j_with_deriv(l, k * a);
    let j = move |r: f64| sph_j_with_deriv(l, k * r).0;
    let y = move |r: f64| sph_y_with_deriv(l, k * r).0;
    let total_j = source.weighted_integral(0.0, a, j, &rule);
    let coef = -k * yd_a / jd_a * total_j;
    move |r: f64| {
        let (jr, jdr) = sph_j_with_deriv(l, k * r);
        let inner = source.weighted_integral(0.0, r, j, &rule);
        let outer = source.weighted_integral(r, a, y, &rule);
        if r == 0.0 {
            let u = (k * outer + coef) * jr;
            return (u, (k * outer + coef) * k * jdr);
        }
        let (yr, ydr) = sph_y_with_deriv(l, k * r);
        let u = k * (yr * inner + jr * outer) + coef * jr;
        let du = k * k * (ydr * inner + jdr * outer) + coef * k * jdr;
        (u, du)
    }
}

/// Solves `(Delta + k^2) u = f` in the ball `r < a` with `du/dr = 0` at
/// `r = a`, one spherical-harmonic degree at a time.
pub fn interior_neumann_solve(spec: &CoatingSpec, l: usize, k: f64, source: RadialSource) -> Result<InteriorSolution> {
    let coeffs = radial_coefficients(spec, l)?;
    if spec.is_double() || spec.interior != Interior::EuclideanBall {
        return Err(Error::Unsupported("Neumann interior needs a single ball coating".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    let a = spec.cloak_radius;
    source.check(a, SOURCE_GAP)?;
    let (j_a, jd_a) = sph_j_with_deriv(l, k * a);
    if jd_a.abs() < NEUMANN_RESONANCE_TOL * j_a.abs().max(jd_a.abs()) {
        let rule = GaussLegendre::new(32);
        let overlap = source.weighted_integral(0.0, a, |r| sph_j_with_deriv(l, k * r).0, &rule);
        return Ok(InteriorSolution { mode: None, resonance: true, compatibility: Some(overlap) });
    }
    let profile = neumann_profile(l, k, a, source);
    let zero = source.is_zero();
    let mut samples = Vec::new();
    for r in interior_radii(a) {
        let gap = a - r;
        let c = coeffs.at(Branch::Interior, gap)?;
        let (u, du) = if zero { (0.0, 0.0) } else { profile(r) };
        samples.push(ModeSample { r, gap, u, flux: c.p * du });
    }
    Ok(InteriorSolution {
        mode: Some(RadialMode { l, k, branch: ModeBranch::InteriorN2, samples }),
        resonance: false,
        compatibility: None,
    })
}

/// `n`-th positive root of `j_l'(ka) = 0`, as a wavenumber.
pub fn neumann_eigenvalue(l: usize, a: f64, n: usize) -> Result<f64> {
    if n == 0 || !(a > 0.0) {
        return Err(Error::domain(n as f64, "n >= 1 and a > 0"));
    }
    let f = |x: f64| sph_j_with_deriv(l, x).1;
    let mut found = 0;
    let h = 0.05;
    let mut x = if l == 0 { h } else { 0.5 * h };
    let mut fx = f(x);
    while x < 1e4 {
        let x1 = x + h;
        let f1 = f(x1);
        if fx * f1 < 0.0 {
            found += 1;
            if found == n {
                let mut conv = roots::SimpleConvergency { eps: 1e-15, max_iter: 200 };
                let root = roots::find_root_brent(x, x1, f, &mut conv)
                    .map_err(|e| Error::Integration { at: x, reason: e.to_string() })?;
                return Ok(root / a);
            }
        }
        x = x1;
        fx = f1;
    }
    Err(Error::domain(n as f64, "root index within search range"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionVerdict {
    /// The Dirichlet data has no regular interior extension with vanishing flux.
    NoSpatialH1,
    /// The flux vanishes, so the overdetermined problem is solvable.
    Solvable,
    /// `j_l(ka) = 0`: the prescribed trace cannot be met at all.
    DirichletResonance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Obstruction {
    pub residual: f64,
    pub verdict: ObstructionVerdict,
}

/// Normal derivative at `r = a` of the regular interior solution with
/// `u(a) = c`. A spatially regular solution with the hidden Neumann
/// condition exists only when it vanishes.
pub fn overdetermined_residual(a: f64, l: usize, k: f64, c: f64) -> Result<Obstruction> {
    if !(k > 0.0 && a > 0.0) {
        return Err(Error::domain(k, "k > 0 and a > 0"));
    }
    if c == 0.0 {
        return Ok(Obstruction { residual: 0.0, verdict: ObstructionVerdict::Solvable });
    }
    let (j, jd) = sph_j_with_deriv(l, k * a);
    if j.abs() < 1e-12 * (j.abs() + jd.abs()) {
        return Ok(Obstruction { residual: f64::INFINITY, verdict: ObstructionVerdict::DirichletResonance });
    }
    let residual = (c * k * jd / j).abs();
    let verdict =
        if residual > 1e-8 * c.abs() * k { ObstructionVerdict::NoSpatialH1 } else { ObstructionVerdict::Solvable };
    Ok(Obstruction { residual, verdict })
}

/// Regular solution of the round-sphere radial equation from `r = 0`,
/// returned as `(u, S^2 u')` at the requested sorted radii in `(0, a)`,
/// together with the state at `a / 2`, where it is normalized to unit size.
///
/// The equation is `(S^2 u')' + (k^2 S^2 - l(l+1)) u = 0` with
/// `S = (a / pi) sin(pi r / a)`. Up to `a / 2` it is integrated in `ln r`;
/// beyond, in `ln(a - r)`, so both poles are approached logarithmically.
fn sphere_regular(l: usize, k: f64, a: f64, radii: &[f64], tol: &Tolerances) -> Result<(Vec<[f64; 2]>, [f64; 2])> {
    let ell = (l * (l + 1)) as f64;
    // Evaluated from the distance to the nearer pole to keep full precision.
    let s2 = move |d: f64| {
        let s = a / PI * (PI * d / a).sin();
        s * s
    };
    let half = 0.5 * a;
    let r0 = radii.iter().fold(1e-6 * a, |m, r| m.min(0.5 * r));
    let inner = |x: f64, y: &SVector<f64, 2>, dy: &mut SVector<f64, 2>| {
        let r = x.exp();
        let p = s2(r);
        dy[0] = r * y[1] / p;
        dy[1] = r * (ell - k * k * p) * y[0];
    };
    let outer = |x: f64, y: &SVector<f64, 2>, dy: &mut SVector<f64, 2>| {
        let t = x.exp();
        let p = s2(t);
        dy[0] = -t * y[1] / p;
        dy[1] = -t * (ell - k * k * p) * y[0];
    };
    let mut xs: Vec<f64> = radii.iter().filter(|r| **r <= half).map(|r| r.ln()).collect();
    xs.push(half.ln());
    let y0 = SVector::<f64, 2>::new(1.0, s2(r0) * l as f64 / r0);
    let first = integrate_linear(&inner, r0.ln(), y0, &xs, tol)?;
    let last = first.len() - 1;
    let mid = first.y[last] / first.y[last].amax();
    let shift = first.log_scale[last] + first.y[last].amax().ln();
    let mut out: Vec<[f64; 2]> = (0..last)
        .map(|i| {
            let y = first.y[i] * (first.log_scale[i] - shift).exp();
            [y[0], y[1]]
        })
        .collect();
    let ts: Vec<f64> = radii.iter().filter(|r| **r > half).map(|r| (a - r).ln()).collect();
    if !ts.is_empty() {
        let second = integrate_linear(&outer, half.ln(), mid, &ts, tol)?;
        out.extend((0..second.len()).map(|i| {
            let y = second.state(i);
            [y[0], y[1]]
        }));
    }
    Ok((out, [mid[0], mid[1]]))
}

/// Solves `(Delta + k^2) u = f` on the round 3-sphere interior of a double
/// coating. The collapsed surface is a single point, so no boundary condition
/// enters: the solution only has to be regular at both poles.
pub fn interior_sphere_solve(spec: &CoatingSpec, l: usize, k: f64, source: RadialSource) -> Result<InteriorSolution> {
    radial_coefficients(spec, l)?;
    if spec.interior != Interior::RoundSphere {
        return Err(Error::Unsupported("sphere interior needs a round 3-sphere interior".into()));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    let a = spec.cloak_radius;
    source.check(a, SOURCE_GAP)?;
    let rule = GaussLegendre::new(32);
    let radii: Vec<f64> = interior_radii(a).into_iter().filter(|r| *r > 0.0).collect();
    let (lo, hi) = source.support();

    // Quadrature nodes for the source integrals below and above each radius.
    let split = |r: f64| -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        match source {
            RadialSource::Shell { radius, strength } => {
                if radius <= r {
                    (vec![(radius, strength)], vec![])
                } else {
                    (vec![], vec![(radius, strength)])
                }
            }
            RadialSource::Bump { .. } => {
                let m = r.clamp(lo, hi);
                let weigh = |(x, w): (f64, f64)| (x, w * source.profile(x));
                (rule.on(lo, m).map(weigh).collect(), rule.on(m, hi).map(weigh).collect())
            }
        }
    };
    let plans: Vec<_> = radii.iter().map(|&r| split(r)).collect();
    let mut all: Vec<f64> = radii.clone();
    for (below, above) in &plans {
        all.extend(below.iter().map(|(x, _)| *x));
        all.extend(above.iter().map(|(x, _)| a - x));
    }
    all.extend(radii.iter().map(|r| a - r));
    all.retain(|r| *r > 0.0 && *r < a);
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.dedup();
    let (states, [um, fm]) = sphere_regular(l, k, a, &all, &Tolerances::default())?;
    let ua = |r: f64| -> [f64; 2] { states[all.partition_point(|x| *x < r)] };
    let ub = |r: f64| -> [f64; 2] {
        let [u, f] = ua(a - r);
        [u, -f]
    };

    let wronskian = -2.0 * um * fm;
    let scale_u = um.abs();
    let scale_f = fm.abs() / (a / PI);
    if scale_u.min(scale_f) < 1e-8 * scale_u.max(scale_f) {
        let (below, _) = split(a);
        let overlap: f64 = below.iter().map(|(x, w)| w * ua(*x)[0]).sum();
        return Ok(InteriorSolution { mode: None, resonance: true, compatibility: Some(overlap) });
    }

    let mut samples = Vec::with_capacity(radii.len());
    for (&r, (below, above)) in radii.iter().zip(&plans) {
        let ia: f64 = below.iter().map(|(x, w)| w * ua(*x)[0]).sum();
        let ib: f64 = above.iter().map(|(x, w)| w * ub(*x)[0]).sum();
        let [uar, far] = ua(r);
        let [ubr, fbr] = ub(r);
        let u = (ubr * ia + uar * ib) / wronskian;
        let flux = (fbr * ia + far * ib) / wronskian;
        samples.push(ModeSample { r, gap: a - r, u, flux });
    }
    Ok(InteriorSolution {
        mode: Some(RadialMode { l, k, branch: ModeBranch::InteriorM2, samples }),
        resonance: false,
        compatibility: None,
    })
}
