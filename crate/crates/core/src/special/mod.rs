//! Special functions and quadrature rules.

pub mod bessel;
pub mod harmonics;
pub mod quadrature;
