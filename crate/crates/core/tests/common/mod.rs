//! Shared generators for the integration tests.
#![allow(dead_code)]

use num_rational::BigRational;
use proptest::prelude::*;

use hbcert::trigpoly::{FloatTrig, Secular, Trig, TrigPoly};

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| q(n, d))
}

/// Rational trigonometric polynomials of degree at most `max_degree`.
pub fn trig_poly(max_degree: usize) -> impl Strategy<Value = TrigPoly> {
    (0..=max_degree).prop_flat_map(|n| {
        (rational(), prop::collection::vec(rational(), n), prop::collection::vec(rational(), n))
            .prop_map(|(a0, c, s)| Trig::from_parts(a0, c, s))
    })
}

fn float_trig(max_degree: usize, amp: f64) -> impl Strategy<Value = FloatTrig> {
    (
        -amp..amp,
        prop::collection::vec(-amp..amp, max_degree),
        prop::collection::vec(-amp..amp, max_degree),
    )
        .prop_map(|(a0, c, s)| Trig::from_parts(a0, c, s))
}

/// `A(t) = mu t + p(t) - p(0)` with `|A(2pi)| > 0.1`.
pub fn secular() -> impl Strategy<Value = Secular<f64>> {
    (0.02f64..1.2, any::<bool>(), float_trig(3, 0.4)).prop_map(|(mu, neg, p)| {
        let periodic = Trig::from_parts(0.0, p.cos_coeffs().to_vec(), p.sin_coeffs().to_vec());
        Secular { slope: if neg { -mu } else { mu }, periodic }
    })
}

/// Forcing terms for the linear periodic problem.
pub fn forcing() -> impl Strategy<Value = FloatTrig> {
    float_trig(4, 1.0)
}
