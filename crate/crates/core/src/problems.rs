//! The two worked examples shipped in `problems/`.
//!
//! `integrable`: `r' = -r + (cos 2t + sin 2t + 2) r^3`, whose positive
//! periodic solution is `1/sqrt(2 + cos 2t)`.
//!
//! `rigid_cubic`: `r' = r/10 - cos(t) r^2/10 - cos^2(t) r^3`, stored with
//! `cos^2 t = (1 + cos 2t)/2` expanded.

use crate::ode::OdeSpec;
use crate::problem::ProblemFile;
use crate::trigpoly::TrigPoly;

pub const INTEGRABLE_HBP: &str = include_str!("../../../problems/integrable.hbp");
pub const RIGID_CUBIC_HBP: &str = include_str!("../../../problems/rigid_cubic.hbp");
pub const INTEGRABLE_ORDER2_TRIG: &str = include_str!("../../../problems/integrable_order2.trig");
pub const INTEGRABLE_AF_TRIG: &str = include_str!("../../../problems/integrable_af.trig");
pub const RIGID_CUBIC_AF2_TRIG: &str = include_str!("../../../problems/rigid_cubic_af2.trig");

pub fn integrable_problem() -> ProblemFile {
    ProblemFile::parse(INTEGRABLE_HBP).expect("bundled problem parses")
}

pub fn rigid_cubic_problem() -> ProblemFile {
    ProblemFile::parse(RIGID_CUBIC_HBP).expect("bundled problem parses")
}

pub fn integrable() -> OdeSpec {
    integrable_problem().ode
}

pub fn rigid_cubic() -> OdeSpec {
    rigid_cubic_problem().ode
}

/// `3/4 - (1/5) cos 2t`.
pub fn integrable_order2() -> TrigPoly {
    TrigPoly::parse_terms(INTEGRABLE_ORDER2_TRIG).expect("bundled approximation parses")
}

/// The rationalized fifth-order approximation of `integrable`.
pub fn integrable_af() -> TrigPoly {
    TrigPoly::parse_terms(INTEGRABLE_AF_TRIG).expect("bundled approximation parses")
}

/// The rationalized degree-3 approximation of the `rigid_cubic` cycle.
pub fn rigid_cubic_af2() -> TrigPoly {
    TrigPoly::parse_terms(RIGID_CUBIC_AF2_TRIG).expect("bundled approximation parses")
}

/// `1 / sqrt(2 + cos 2t)`.
pub fn integrable_exact(t: f64) -> f64 {
    1.0 / (2.0 + (2.0 * t).cos()).sqrt()
}
