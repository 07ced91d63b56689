//! Polynomial-in-`x` periodic vector fields `X(x,t) = sum_k c_k(t) x^k`.

use num_rational::BigRational;

use crate::error::ParseError;
use crate::trigpoly::{Coeff, FloatTrig, Trig, TrigPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSpec {
    name: String,
    coeffs: Vec<TrigPoly>,
    coeffs_f64: Vec<FloatTrig>,
}

/// How an approximate solution was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Hbm { order: usize },
    Rationalized,
    Shooting,
    User,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSolution {
    pub xbar: TrigPoly,
    pub provenance: Provenance,
}

impl ApproxSolution {
    pub fn new(xbar: TrigPoly, provenance: Provenance) -> Self {
        ApproxSolution { xbar, provenance }
    }
}

/// Accuracy `S = ||s||_2`, exact square and its floating root.
#[derive(Clone, Debug, PartialEq)]
pub struct Accuracy {
    pub exact_sq: BigRational,
    pub value: f64,
}

impl OdeSpec {
    /// `coeffs[k]` multiplies `x^k`. Requires degree at least one and a
    /// nonzero leading coefficient.
    pub fn new(name: impl Into<String>, coeffs: Vec<TrigPoly>) -> Result<Self, ParseError> {
        if coeffs.len() < 2 {
            return Err(ParseError::Semantic("degree in x must be at least 1".into()));
        }
        if coeffs.last().is_some_and(Trig::is_zero) {
            return Err(ParseError::Semantic(format!(
                "leading coefficient c_{} is identically zero",
                coeffs.len() - 1
            )));
        }
        let coeffs_f64 = coeffs.iter().map(Trig::to_f64).collect();
        Ok(OdeSpec { name: name.into(), coeffs, coeffs_f64 })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[TrigPoly] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> &[FloatTrig] {
        &self.coeffs_f64
    }

    /// Coefficients converted to another scalar type.
    pub fn coeffs_in<T: Coeff>(&self) -> Vec<Trig<T>> {
        self.coeffs.iter().map(|c| c.map(T::from_rational)).collect()
    }

    /// `X(x(t), t)` as a trigonometric polynomial (Horner in `x`).
    pub fn substitute(&self, xbar: &TrigPoly) -> TrigPoly {
        substitute_with(&self.coeffs, xbar)
    }

    /// `s = x' - X(x, t)`.
    pub fn residual(&self, xbar: &TrigPoly) -> TrigPoly {
        &xbar.differentiate() - &self.substitute(xbar)
    }

    pub fn accuracy(&self, xbar: &TrigPoly) -> Accuracy {
        let exact_sq = self.residual(xbar).l2_norm_sq();
        let value = exact_sq.to_f64().sqrt();
        Accuracy { exact_sq, value }
    }

    /// `dX/dx (x(t), t)`.
    pub fn dx_along(&self, xbar: &TrigPoly) -> TrigPoly {
        dx_along_with(&self.coeffs, xbar)
    }

    /// Upper bound for `max |d2X/dx2|` over `[lo, hi] x [0, 2pi]`.
    pub fn d2x_bound(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "interval must be finite");
        let r = lo.abs().max(hi.abs());
        let mut bound = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(2) {
            if c.is_zero() {
                continue;
            }
            let kk = (k * (k - 1)) as f64;
            bound += kk * c.sup_norm_bound() * r.powi(k as i32 - 2);
        }
        if bound == 0.0 {
            return 0.0;
        }
        // one ulp per accumulated operation, rounded outward
        (bound * (1.0 + 4.0 * self.coeffs.len() as f64 * f64::EPSILON)).next_up()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.coeffs_f64.iter().rev().fold(0.0, |acc, c| acc * x + c.eval_fast(t))
    }

    pub fn eval_dx(&self, x: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, c) in self.coeffs_f64.iter().enumerate().skip(1).rev() {
            acc = acc * x + k as f64 * c.eval_fast(t);
        }
        acc
    }

    pub fn eval_d2x(&self, x: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, c) in self.coeffs_f64.iter().enumerate().skip(2).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * c.eval_fast(t);
        }
        acc
    }

    /// Taylor remainder `R(z,t) = X(x+z,t) - X(x,t) - X_x(x,t) z`, expanded
    /// binomially so small `z` does not cancel.
    pub fn remainder(&self, x: f64, z: f64, t: f64) -> f64 {
        let mut total = 0.0;
        for (k, c) in self.coeffs_f64.iter().enumerate().skip(2) {
            let ck = c.eval_fast(t);
            if ck == 0.0 {
                continue;
            }
            let mut binom = 1.0;
            let mut inner = 0.0;
            for j in 1..=k {
                binom = binom * (k - j + 1) as f64 / j as f64;
                if j >= 2 {
                    inner += binom * x.powi((k - j) as i32) * z.powi(j as i32);
                }
            }
            total += ck * inner;
        }
        total
    }
}

pub(crate) fn substitute_with<T: Coeff>(coeffs: &[Trig<T>], x: &Trig<T>) -> Trig<T> {
    let mut acc = Trig::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub(crate) fn dx_along_with<T: Coeff>(coeffs: &[Trig<T>], x: &Trig<T>) -> Trig<T> {
    let mut acc = Trig::zero();
    for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
        let term = c.scale(&T::from_i64(k as i64));
        acc = &(&acc * x) + &term;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn substitute_constant_in_integrable() {
        let ode = problems::integrable();
        let got = ode.substitute(&TrigPoly::constant(q(3, 4)));
        // -3/4 + (27/64)(2 + cos 2t + sin 2t)
        let expect = TrigPoly::from_mean(
            q(-3, 4) + q(27, 32),
            vec![q(0, 1), q(27, 64)],
            vec![q(0, 1), q(27, 64)],
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn substitute_zero_gives_forcing() {
        let ode = problems::rigid_cubic();
        assert_eq!(ode.substitute(&TrigPoly::zero()), ode.coeffs()[0]);
    }

    #[test]
    fn substitute_constant_in_rigid_cubic() {
        let ode = problems::rigid_cubic();
        let x = q(4, 9);
        let got = ode.substitute(&TrigPoly::constant(x.clone()));
        let x2 = &x * &x;
        let x3 = &x2 * &x;
        let expect = TrigPoly::from_mean(
            q(1, 10) * &x - q(1, 2) * &x3,
            vec![q(-1, 10) * &x2, q(-1, 2) * &x3],
            vec![],
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn residual_accuracy_of_order_two() {
        let ode = problems::integrable();
        let xbar = problems::integrable_order2();
        let acc = ode.accuracy(&xbar);
        assert_eq!(acc.exact_sq, q(50069, 2_560_000));
        assert!((acc.value - 0.1398).abs() < 1e-4);
    }

    #[test]
    fn linear_ode_zero_residual() {
        let ode = OdeSpec::new("linear", vec![TrigPoly::zero(), TrigPoly::constant(q(1, 1))]).unwrap();
        assert!(ode.residual(&TrigPoly::zero()).is_zero());
        assert_eq!(ode.dx_along(&problems::integrable_af()), TrigPoly::constant(q(1, 1)));
        assert_eq!(ode.d2x_bound(-3.0, 5.0), 0.0);
    }

    #[test]
    fn bundled_accuracies() {
        let ode = problems::integrable();
        let af = ode.accuracy(&problems::integrable_af()).value;
        assert!((af - 0.00394).abs() < 5e-6, "{af}");
        let order3 = &problems::integrable_order2() + &TrigPoly::cos_term(4, q(1, 25));
        let o3 = ode.accuracy(&order3).value;
        assert!((o3 - 0.045).abs() < 1e-3, "{o3}");
        let order4 = &order3 + &TrigPoly::cos_term(6, q(-1, 110));
        let o4 = ode.accuracy(&order4).value;
        assert!((o4 - 0.018).abs() < 1e-3, "{o4}");

        let rigid = problems::rigid_cubic();
        let af2 = rigid.accuracy(&problems::rigid_cubic_af2()).value;
        assert!((af2 - 0.00298).abs() < 1e-5, "{af2}");
    }

    #[test]
    fn variational_coefficient_matches_displayed_primitive() {
        let rigid = problems::rigid_cubic();
        let a = rigid.dx_along(&problems::rigid_cubic_af2()).antiderivative();
        assert_eq!(a.slope, q(-347888350813299559, 1778094556332494400));
        let p = &a.periodic;
        assert_eq!(p.cos_coeff(1), q(-561179, 36756720));
        assert_eq!(p.sin_coeff(1), q(-685338551, 8000712720));
        assert_eq!(p.cos_coeff(2), q(-757058717, 48004276320));
        assert_eq!(p.sin_coeff(2), q(-40221206418131, 273447836421760));
        assert_eq!(p.cos_coeff(3), q(-2923231, 576974475));
        assert_eq!(p.sin_coeff(3), q(37724429, 36003207240));
        assert_eq!(p.cos_coeff(4), q(-353400139, 96008552640));
        assert_eq!(p.cos_coeff(5), q(5358811, 300026727000));
        assert_eq!(p.sin_coeff(5), q(4708003, 20001781800));
        assert_eq!(p.cos_coeff(6), q(1537, 207810720));
        assert_eq!(p.cos_coeff(7), q(1, 327600));
        assert_eq!(p.sin_coeff(7), q(-1, 4753840));
        assert_eq!(p.sin_coeff(8), q(-1, 12979200));
        assert_eq!(p.degree(), 8);
        assert_eq!(a.offset(), q(2891685439, 72733752000));
    }

    #[test]
    fn curvature_bounds() {
        let ode = problems::integrable();
        let k = ode.d2x_bound(0.4808, 1.0192);
        assert!(k <= 21.0 && k >= 6.0 * (2.0 + 2f64.sqrt()) * 1.0192, "{k}");
        let rigid = problems::rigid_cubic();
        let k = rigid.d2x_bound(0.358, 0.512);
        assert!((3.272..=3.2721).contains(&k), "{k}");
    }

    #[test]
    fn remainder_matches_direct_formula() {
        let ode = problems::integrable();
        for &(x, z, t) in &[(0.7, 0.01, 0.3), (0.5, -0.02, 2.0), (1.0, 0.3, 5.5)] {
            let direct = ode.eval(x + z, t) - ode.eval(x, t) - ode.eval_dx(x, t) * z;
            assert!((ode.remainder(x, z, t) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(OdeSpec::new("bad", vec![TrigPoly::constant(q(1, 1))]).is_err());
        assert!(OdeSpec::new("bad", vec![TrigPoly::constant(q(1, 1)), TrigPoly::zero()]).is_err());
    }
}
