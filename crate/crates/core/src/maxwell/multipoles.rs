use super::sources::CurrentSource;
use super::waves::{cdot, vector_waves, WaveKind};
use super::Polarization;
use crate::error::{Error, Result};
use crate::special::harmonics::lm_index;
use num_complex::Complex64;
use serde::Serialize;

/// Relative size of the last retained degree above which truncation is
/// reported.
pub const TRUNCATION_WARNING: f64 = 1e-10;
/// Largest degree selected automatically.
pub const MAX_AUTO_DEGREE: usize = 60;

/// One radiating multipole `(l, m, polarization) -> amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultipoleEntry {
    pub l: usize,
    pub m: i64,
    pub polarization: Polarization,
    pub amplitude: Complex64,
}

/// Amplitudes of the free-space outgoing field of a current,
/// `E = -k^2 sum (a_TE M_lm + a_TM N_lm)` and
/// `H = i k^2 sum (a_TE N_lm + a_TM M_lm)` with outgoing waves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipoleCoefficients {
    pub k: f64,
    pub l_max: usize,
    pub entries: Vec<MultipoleEntry>,
    /// Largest amplitude at `l = l_max` relative to the largest amplitude.
    pub tail: f64,
    pub truncation_warning: bool,
}

impl MultipoleCoefficients {
    pub(crate) fn from_tables(k: f64, l_max: usize, te: &[Complex64], tm: &[Complex64]) -> Self {
        let mut entries = Vec::with_capacity(2 * te.len());
        for l in 1..=l_max {
            for m in -(l as i64)..=(l as i64) {
                let i = lm_index(l, m);
                entries.push(MultipoleEntry { l, m, polarization: Polarization::TE, amplitude: te[i] });
                entries.push(MultipoleEntry { l, m, polarization: Polarization::TM, amplitude: tm[i] });
            }
        }
        let lead = entries.iter().map(|e| e.amplitude.norm()).fold(0.0, f64::max);
        let last = entries.iter().filter(|e| e.l == l_max).map(|e| e.amplitude.norm()).fold(0.0, f64::max);
        let tail = if lead > 0.0 { last / lead } else { 0.0 };
        Self { k, l_max, entries, tail, truncation_warning: tail > TRUNCATION_WARNING }
    }

    pub fn get(&self, l: usize, m: i64, polarization: Polarization) -> Option<Complex64> {
        self.entries.iter().find(|e| e.l == l && e.m == m && e.polarization == polarization).map(|e| e.amplitude)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.amplitude.norm()).fold(0.0, f64::max)
    }

    /// Modes whose amplitude exceeds `threshold`.
    pub fn above(&self, threshold: f64) -> Vec<MultipoleEntry> {
        self.entries.iter().filter(|e| e.amplitude.norm() > threshold).copied().collect()
    }
}

fn double_factorial_bound(l: usize, kr: f64) -> f64 {
    (1..=l).fold(1.0, |acc, i| acc * kr / (2 * i + 1) as f64)
}

/// Smallest degree at which `(k reach)^l / (2l+1)!!` drops below `1e-14`,
/// bounding `|j_l(k |y|)|` over the support.
pub fn auto_degree(k: f64, reach: f64) -> usize {
    (2..=MAX_AUTO_DEGREE).find(|&l| double_factorial_bound(l, k * reach) < 1e-14).unwrap_or(MAX_AUTO_DEGREE)
}

/// Radiating multipoles through an automatically chosen degree.
pub fn radiating_multipoles(source: &CurrentSource, k: f64) -> Result<MultipoleCoefficients> {
    radiating_multipoles_to(source, k, auto_degree(k, source.reach()))
}

/// Multipole integrals `a_TE = int conj(M_lm) . J`, `a_TM = int conj(N_lm) . J`
/// against regular waves, for `1 <= l <= l_max`.
pub fn radiating_multipoles_to(source: &CurrentSource, k: f64, l_max: usize) -> Result<MultipoleCoefficients> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain(k, "k > 0"));
    }
    if l_max == 0 {
        return Err(Error::domain(0.0, "l_max >= 1"));
    }
    let size = (l_max + 1) * (l_max + 1);
    let mut te = vec![Complex64::new(0.0, 0.0); size];
    let mut tm = vec![Complex64::new(0.0, 0.0); size];
    for p in source.discretize(k, l_max) {
        let w = vector_waves(WaveKind::Regular, l_max, k, p.x);
        for i in 0..size {
            te[i] += cdot(&w.m[i], &p.j);
            tm[i] += cdot(&w.n[i], &p.j);
        }
    }
    Ok(MultipoleCoefficients::from_tables(k, l_max, &te, &tm))
}
