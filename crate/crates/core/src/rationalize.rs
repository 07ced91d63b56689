//! Continued-fraction simplification of Fourier coefficients under an
//! accuracy budget.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::RationalizeError;
use crate::ode::{ApproxSolution, OdeSpec, Provenance};
use crate::trigpoly::{parse_decimal, ratio_to_f64, TrigPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct CfExpansion {
    /// The exact value expanded (with its sign).
    pub value: BigRational,
    /// Partial quotients of `|value|`.
    pub partial_quotients: Vec<BigInt>,
    /// Convergents with the sign of `value` reattached.
    pub convergents: Vec<BigRational>,
}

/// Expansion of the decimal snapshot of `x` (its shortest round-trip
/// representation), up to `max_terms` partial quotients.
pub fn expand(x: f64, max_terms: usize) -> CfExpansion {
    let exact = parse_decimal(&format!("{x}")).expect("finite float prints as a decimal");
    expand_rational(&exact, max_terms)
}

pub fn expand_rational(value: &BigRational, max_terms: usize) -> CfExpansion {
    let negative = value.is_negative();
    let mut rest = value.abs();
    let mut partial_quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    while partial_quotients.len() < max_terms.max(1) {
        let a = rest.floor().to_integer();
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        let c = BigRational::new(p.clone(), q.clone());
        convergents.push(if negative { -c } else { c });
        partial_quotients.push(a.clone());
        let frac = rest - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
    }
    CfExpansion { value: value.clone(), partial_quotients, convergents }
}

/// A coefficient slot of a trigonometric polynomial: `(harmonic, is_sine)`.
type Slot = (usize, bool);

fn slots(f: &TrigPoly) -> Vec<(Slot, BigRational)> {
    let mut out = Vec::new();
    let mean = f.mean();
    if !mean.is_zero() {
        out.push(((0, false), mean));
    }
    for m in 1..=f.degree() {
        for (sine, c) in [(false, f.cos_coeff(m)), (true, f.sin_coeff(m))] {
            if !c.is_zero() {
                out.push(((m, sine), c));
            }
        }
    }
    out
}

fn assemble(parts: &[(Slot, BigRational)]) -> TrigPoly {
    let mut f = TrigPoly::zero();
    for ((m, sine), c) in parts {
        if *sine {
            f.add_sin(*m, c.clone());
        } else {
            f.add_cos(*m, c.clone());
        }
    }
    f
}

/// `S(candidate) <= budget * s_ref`, compared exactly on squares.
pub fn passes_budget(ode: &OdeSpec, candidate: &TrigPoly, s_ref_sq: &BigRational, budget: f64) -> bool {
    let b = BigRational::from_float(budget).expect("finite budget");
    ode.accuracy(candidate).exact_sq <= &b * &b * s_ref_sq
}

/// Replaces each coefficient by its lowest convergent within
/// `S / (10 n)` (`n` = number of nonzero coefficients), then advances the
/// worst offender until `S(result) <= budget * S(input)`.
///
/// Offenders are ranked by `|error| * max(1, m)`, ties to the lowest
/// harmonic with cosine before sine. Inputs that are already rationalized
/// or user-supplied are returned unchanged.
pub fn simplify_solution(ode: &OdeSpec, xbar: &ApproxSolution, budget: f64) -> Result<ApproxSolution, RationalizeError> {
    if !budget.is_finite() || budget < 1.0 {
        return Err(RationalizeError::InvalidBudget(budget));
    }
    if matches!(xbar.provenance, Provenance::Rationalized | Provenance::User) {
        return Ok(xbar.clone());
    }
    let acc = ode.accuracy(&xbar.xbar);
    let parts = slots(&xbar.xbar);
    if parts.is_empty() {
        return Ok(ApproxSolution::new(xbar.xbar.clone(), Provenance::Rationalized));
    }
    let tol = acc.value / (10.0 * parts.len() as f64);
    let expansions: Vec<Vec<BigRational>> =
        parts.iter().map(|(_, c)| expand_rational(c, usize::MAX).convergents).collect();
    let mut chosen: Vec<usize> = parts
        .iter()
        .zip(&expansions)
        .map(|((_, c), conv)| {
            conv.iter()
                .position(|p| ratio_to_f64(&(p - c).abs()) <= tol)
                .unwrap_or(conv.len() - 1)
        })
        .collect();
    loop {
        let candidate: Vec<(Slot, BigRational)> =
            parts.iter().zip(&chosen).zip(&expansions).map(|(((s, _), &k), conv)| (*s, conv[k].clone())).collect();
        let f = assemble(&candidate);
        if passes_budget(ode, &f, &acc.exact_sq, budget) {
            log::info!("rationalized: S = {:.6e} (input {:.6e})", ode.accuracy(&f).value, acc.value);
            return Ok(ApproxSolution::new(f, Provenance::Rationalized));
        }
        let worst = parts
            .iter()
            .enumerate()
            .filter(|&(i, _)| chosen[i] + 1 < expansions[i].len())
            .map(|(i, ((m, _), c))| {
                let err = ratio_to_f64(&(&expansions[i][chosen[i]] - c).abs());
                (i, err * (*m).max(1) as f64)
            })
            .fold(None::<(usize, f64)>, |best, (i, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((i, w)),
            });
        match worst {
            Some((i, _)) => chosen[i] += 1,
            None => return Err(RationalizeError::BudgetUnreachable),
        }
    }
}

/// Largest denominator among the coefficients.
pub fn max_denominator(f: &TrigPoly) -> BigInt {
    slots(f).into_iter().map(|(_, c)| c.denom().clone()).max().unwrap_or_else(BigInt::one)
}

/// Checks `q >= 1`, `gcd(|p|, q) = 1` and the alternating enclosure of the
/// convergents around the value.
pub fn convergents_are_valid(cf: &CfExpansion) -> bool {
    let x = cf.value.abs();
    cf.convergents.iter().enumerate().all(|(k, c)| {
        let c = c.abs();
        let coprime = c.numer().gcd(c.denom()).is_one() && c.denom() >= &BigInt::one();
        let side = if k % 2 == 0 { c <= x } else { c >= x };
        coprime && side
    })
}
