//! Harmonic balance: the Galerkin system for a truncated Fourier ansatz and
//! its damped Newton solver.
//!
//! Unknowns are laid out as `[mean, a_1..a_N, b_1..b_N]` for
//! `y_N(t) = mean + sum (a_m cos mt + b_m sin mt)`. Residual rows are the
//! matching Fourier components of `F(y) = y' - X(y, t)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::HbmError;
use crate::ode::{dx_along_with, substitute_with, ApproxSolution, OdeSpec, Provenance};
use crate::trigpoly::{parse_decimal, Coeff, FloatTrig, Trig, TrigPoly};

/// Which unknowns are free; the rest are pinned to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Full,
    /// Mean and cosines only.
    CosOnly,
    /// Mean and even cosine harmonics only.
    EvenCos,
}

impl Symmetry {
    /// Increment between successive orders that add a free unknown.
    pub fn order_step(self) -> usize {
        match self {
            Symmetry::EvenCos => 2,
            _ => 1,
        }
    }
}

impl FromStr for Symmetry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Symmetry::Full),
            "cos" => Ok(Symmetry::CosOnly),
            "even-cos" => Ok(Symmetry::EvenCos),
            other => Err(format!("unknown symmetry `{other}` (expected full, cos or even-cos)")),
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Full => "full",
            Symmetry::CosOnly => "cos",
            Symmetry::EvenCos => "even-cos",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalerkinSystem {
    order: usize,
    symmetry: Symmetry,
    free: Vec<usize>,
}

impl GalerkinSystem {
    pub fn new(order: usize, symmetry: Symmetry) -> Self {
        let free = (0..=2 * order)
            .filter(|&i| match symmetry {
                Symmetry::Full => true,
                Symmetry::CosOnly => i <= order,
                Symmetry::EvenCos => i == 0 || (i <= order && i % 2 == 0),
            })
            .collect();
        GalerkinSystem { order, symmetry, free }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Full layout length `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.order + 1
    }

    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Human-readable name of a layout slot.
    pub fn label(&self, i: usize) -> String {
        match i {
            0 => "mean".to_string(),
            i if i <= self.order => format!("cos{i}"),
            i => format!("sin{}", i - self.order),
        }
    }

    /// The ansatz for a full-layout point.
    pub fn ansatz<T: Coeff>(&self, point: &[T]) -> Trig<T> {
        let n = self.order;
        Trig::from_mean(point[0].clone(), point[1..=n].to_vec(), point[n + 1..].to_vec())
    }

    /// Layout component `i` of a trigonometric polynomial.
    pub fn component<T: Coeff>(&self, f: &Trig<T>, i: usize) -> T {
        match i {
            0 => f.mean(),
            i if i <= self.order => f.cos_coeff(i),
            i => f.sin_coeff(i - self.order),
        }
    }

    /// Full-layout coefficients of `f` truncated at this order.
    pub fn layout_of<T: Coeff>(&self, f: &Trig<T>) -> Vec<T> {
        (0..self.dim()).map(|i| self.component(f, i)).collect()
    }

    fn project<T: Coeff>(&self, f: &Trig<T>) -> Vec<T> {
        self.free.iter().map(|&i| self.component(f, i)).collect()
    }

    fn basis<T: Coeff>(&self, i: usize) -> Trig<T> {
        match i {
            0 => Trig::constant(T::one()),
            i if i <= self.order => Trig::cos_term(i, T::one()),
            i => Trig::sin_term(i - self.order, T::one()),
        }
    }

    /// Full-layout point from free values, pinned slots zero.
    pub fn embed(&self, free_vals: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.dim()];
        for (&i, &v) in self.free.iter().zip(free_vals) {
            full[i] = v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    fn check_dim(&self, len: usize) -> Result<(), HbmError> {
        if len != self.dim() {
            return Err(HbmError::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }
}

/// Galerkin residual rows (free slots only) at a full-layout point.
pub fn galerkin_residual<T: Coeff>(ode: &OdeSpec, sys: &GalerkinSystem, point: &[T]) -> Result<Vec<T>, HbmError> {
    sys.check_dim(point.len())?;
    Ok(residual_rows(&ode.coeffs_in::<T>(), sys, point))
}

fn residual_rows<T: Coeff>(coeffs: &[Trig<T>], sys: &GalerkinSystem, point: &[T]) -> Vec<T> {
    let y = sys.ansatz(point);
    let f = &y.differentiate() - &substitute_with(coeffs, &y);
    sys.project(&f)
}

/// Jacobian of [`galerkin_residual`] over the free slots. Column `j` holds
/// the components of `phi_j' - X_x(y, t) phi_j`.
pub fn galerkin_jacobian<T: Coeff>(ode: &OdeSpec, sys: &GalerkinSystem, point: &[T]) -> Result<Vec<Vec<T>>, HbmError> {
    sys.check_dim(point.len())?;
    Ok(jacobian_columns(&ode.coeffs_in::<T>(), sys, point))
}

fn jacobian_columns<T: Coeff>(coeffs: &[Trig<T>], sys: &GalerkinSystem, point: &[T]) -> Vec<Vec<T>> {
    let y = sys.ansatz(point);
    let a = dx_along_with(coeffs, &y);
    // rows indexed first
    let cols: Vec<Vec<T>> = sys
        .free
        .iter()
        .map(|&j| {
            let phi: Trig<T> = sys.basis(j);
            sys.project(&(&phi.differentiate() - &(&a * &phi)))
        })
        .collect();
    (0..sys.n_free()).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

/// Condition estimates above this mark the Jacobian as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Smallest Armijo step before giving up.
pub const MIN_STEP: f64 = 1.0 / 1_048_576.0;
/// Significant digits kept when snapping Newton output to rationals.
pub const SNAP_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct HbmSolution {
    pub approx: ApproxSolution,
    /// Full-layout floating coefficients before snapping.
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Exact rational equal to `v` rounded to `digits` significant digits.
pub fn snap(v: f64, digits: usize) -> BigRational {
    if v == 0.0 || !v.is_finite() {
        return BigRational::zero();
    }
    parse_decimal(&format!("{:.*e}", digits.saturating_sub(1), v)).expect("formatted float is a decimal")
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on the Galerkin system from a full-layout seed.
///
/// Backtracks by halves until the residual norm drops by the Armijo factor;
/// pinned slots of the seed are ignored.
pub fn solve(
    ode: &OdeSpec,
    sys: &GalerkinSystem,
    seed: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<HbmSolution, HbmError> {
    sys.check_dim(seed.len())?;
    let coeffs = ode.coeffs_f64();
    let eval = |free: &[f64]| residual_rows(coeffs, sys, &sys.embed(free));
    let mut x = sys.restrict(seed);
    let cap = 1e3 * norm(&x).max(1.0);
    let mut r = eval(&x);
    let mut rn = norm(&r);
    let mut iterations = 0;
    while rn > tol {
        if iterations == max_iter {
            return Err(HbmError::NoConvergence { iterations, residual: rn });
        }
        iterations += 1;
        let rows = jacobian_columns(coeffs, sys, &sys.embed(&x));
        let n = sys.n_free();
        let jac = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let sv = jac.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if condition.is_nan() || condition > MAX_CONDITION {
            return Err(HbmError::SingularJacobian { condition });
        }
        let rhs = -DVector::from_column_slice(&r);
        let dx = jac.lu().solve(&rhs).ok_or(HbmError::SingularJacobian { condition: f64::INFINITY })?;
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + step * d).collect();
            let tr = eval(&trial);
            let tn = norm(&tr);
            if tn.is_finite() && tn <= (1.0 - 1e-4 * step) * rn {
                x = trial;
                r = tr;
                rn = tn;
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Err(HbmError::NoConvergence { iterations, residual: rn });
            }
        }
        if norm(&x) > cap {
            return Err(HbmError::NoConvergence { iterations, residual: rn });
        }
        log::debug!("newton order {} iter {iterations}: |F| = {rn:e}", sys.order());
    }
    let coefficients = sys.embed(&x);
    let snapped: Vec<BigRational> = coefficients.iter().map(|&v| snap(v, SNAP_DIGITS)).collect();
    let xbar: TrigPoly = sys.ansatz(&snapped);
    Ok(HbmSolution {
        approx: ApproxSolution::new(xbar, Provenance::Hbm { order: sys.order() }),
        coefficients,
        residual_norm: rn,
        iterations,
    })
}

/// Real roots of the constant-ansatz mean equation `sum_k mean(c_k) r^k = 0`,
/// ascending. Empty if that polynomial vanishes identically.
pub fn solve_order1(ode: &OdeSpec) -> Vec<f64> {
    let p: Vec<BigRational> = ode.coeffs().iter().map(Trig::mean).collect();
    sturm::real_roots(&p, 1e-13)
}

/// One rung of [`continuation_ladder`].
#[derive(Clone, Debug, PartialEq)]
pub struct LadderRung {
    pub order: usize,
    pub solution: HbmSolution,
    pub accuracy: f64,
    /// True if the rung was seeded by the fallback instead of the rung below.
    pub fallback_seeded: bool,
}

/// Default Newton tolerance used by the ladder.
pub const LADDER_TOL: f64 = 1e-12;
pub const LADDER_MAX_ITER: usize = 60;

/// Solves order 0 from `r0`, then each order `N + step` seeded by order
/// `N` with new harmonics at zero, up to `n_max`. When a rung fails and a
/// fallback is given, the fallback's full-layout seed for that order is
/// tried once before giving up.
pub fn continuation_ladder(
    ode: &OdeSpec,
    symmetry: Symmetry,
    n_max: usize,
    r0: f64,
    fallback: Option<&dyn Fn(usize) -> Option<Vec<f64>>>,
) -> Result<Vec<LadderRung>, HbmError> {
    let mut rungs: Vec<LadderRung> = Vec::new();
    let mut prev = vec![r0];
    let mut order = 0;
    loop {
        let sys = GalerkinSystem::new(order, symmetry);
        let seed = pad_layout(&prev, order);
        let mut fallback_seeded = false;
        let sol = match solve(ode, &sys, &seed, LADDER_TOL, LADDER_MAX_ITER) {
            Ok(s) => s,
            Err(e) => {
                let alt = fallback.and_then(|f| f(order));
                match alt {
                    Some(alt_seed) => {
                        log::info!("order {order}: {e}; retrying from fallback seed");
                        fallback_seeded = true;
                        solve(ode, &sys, &alt_seed, LADDER_TOL, LADDER_MAX_ITER)
                            .map_err(|e| HbmError::AtOrder { order, source: Box::new(e) })?
                    }
                    None => return Err(HbmError::AtOrder { order, source: Box::new(e) }),
                }
            }
        };
        let accuracy = ode.accuracy(&sol.approx.xbar).value;
        log::info!("order {order}: accuracy {accuracy:.6e}");
        prev = sol.coefficients.clone();
        rungs.push(LadderRung { order, solution: sol, accuracy, fallback_seeded });
        if order >= n_max {
            break;
        }
        order = (order + symmetry.order_step()).min(n_max);
    }
    Ok(rungs)
}

/// Re-lays a full-layout vector of some order into order `n`.
pub fn pad_layout(prev: &[f64], n: usize) -> Vec<f64> {
    let old = (prev.len() - 1) / 2;
    let mut out = vec![0.0; 2 * n + 1];
    out[0] = prev[0];
    let k = old.min(n);
    out[1..=k].copy_from_slice(&prev[1..=k]);
    out[n + 1..=n + k].copy_from_slice(&prev[old + 1..=old + k]);
    out
}

/// Full-layout coefficients of a floating trigonometric polynomial.
pub fn layout_from_float(f: &FloatTrig, n: usize) -> Vec<f64> {
    GalerkinSystem::new(n, Symmetry::Full).layout_of(f)
}

/// Exact univariate root isolation.
mod sturm {
    use super::*;

    type Poly = Vec<BigRational>;

    fn trim(mut p: Poly) -> Poly {
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        p
    }

    fn derivative(p: &[BigRational]) -> Poly {
        trim(p.iter().enumerate().skip(1).map(|(k, c)| c * BigRational::from_integer((k as i64).into())).collect())
    }

    /// Remainder of `a` divided by `b`, `b` nonzero.
    fn rem(a: &[BigRational], b: &[BigRational]) -> Poly {
        let mut r = trim(a.to_vec());
        let lead = b.last().expect("nonzero divisor");
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let f = r.last().unwrap() / lead;
            for (i, c) in b.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &f * c;
            }
            r.pop();
            r = trim(r);
        }
        r
    }

    fn quotient(a: &[BigRational], b: &[BigRational]) -> Poly {
        let mut r = trim(a.to_vec());
        let lead = b.last().expect("nonzero divisor");
        let mut q = vec![BigRational::zero(); r.len().saturating_sub(b.len()) + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let f = r.last().unwrap() / lead;
            for (i, c) in b.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &f * c;
            }
            q[shift] = f;
            r.pop();
            r = trim(r);
        }
        trim(q)
    }

    fn gcd(a: &[BigRational], b: &[BigRational]) -> Poly {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        a
    }

    fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
        p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    fn sign_changes(seq: &[Poly], x: &BigRational) -> usize {
        let signs: Vec<bool> = seq.iter().map(|p| eval(p, x)).filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Roots in `(a, b]`.
    fn count(seq: &[Poly], a: &BigRational, b: &BigRational) -> usize {
        sign_changes(seq, a) - sign_changes(seq, b)
    }

    pub fn real_roots(p: &[BigRational], width: f64) -> Vec<f64> {
        let p = trim(p.to_vec());
        if p.len() <= 1 {
            return Vec::new();
        }
        let g = gcd(&p, &derivative(&p));
        let sf = quotient(&p, &g);
        let mut seq = vec![sf.clone(), derivative(&sf)];
        loop {
            let n = seq.len();
            let r = rem(&seq[n - 2], &seq[n - 1]);
            if r.is_empty() {
                break;
            }
            seq.push(r.into_iter().map(|c| -c).collect());
        }
        let lead = sf.last().unwrap().abs();
        let bound = BigRational::from_integer(1.into())
            + sf.iter().map(|c| c.abs() / &lead).fold(BigRational::zero(), |m, v| if v > m { v } else { m });
        let width = BigRational::from_float(width).expect("finite width");
        let two = BigRational::from_integer(2.into());
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((a, b)) = stack.pop() {
            match count(&seq, &a, &b) {
                0 => {}
                1 => {
                    if eval(&sf, &b).is_zero() {
                        out.push(crate::trigpoly::ratio_to_f64(&b));
                        continue;
                    }
                    let (mut lo, mut hi) = (a, b);
                    while &hi - &lo > width {
                        let mid = (&lo + &hi) / &two;
                        if eval(&sf, &mid).is_zero() {
                            lo = mid.clone();
                            hi = mid;
                            break;
                        }
                        if count(&seq, &lo, &mid) == 1 {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    out.push(crate::trigpoly::ratio_to_f64(&((&lo + &hi) / &two)));
                }
                _ => {
                    let mid = (&a + &b) / &two;
                    stack.push((a, mid.clone()));
                    stack.push((mid, b));
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        fn q(n: i64) -> BigRational {
            BigRational::from_integer(n.into())
        }

        #[test]
        fn repeated_and_rational_roots() {
            // (x - 1)^2 (x + 2) = x^3 - 3x + 2
            let roots = real_roots(&[q(2), q(-3), q(0), q(1)], 1e-14);
            assert_eq!(roots.len(), 2);
            assert!((roots[0] + 2.0).abs() < 1e-12 && (roots[1] - 1.0).abs() < 1e-12);
            // x^2 + 1 has none
            assert!(real_roots(&[q(1), q(0), q(1)], 1e-14).is_empty());
            assert!(real_roots(&[q(3)], 1e-14).is_empty());
        }
    }
}
