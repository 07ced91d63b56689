//! Real trigonometric polynomials
//! `f(t) = a0/2 + sum_{m=1}^{N} (a_m cos mt + b_m sin mt)`.
//!
//! The coefficient type is generic: [`TrigPoly`] uses exact rationals and is
//! the representation every certified quantity is computed from, while
//! [`FloatTrig`] carries `f64` coefficients for Newton iterations, quadrature
//! and evaluation on grids.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

/// Scalar field usable as a trigonometric polynomial coefficient.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn half(&self) -> Self;
    /// Division by a small positive integer (harmonic index).
    fn div_int(&self, k: i64) -> Self;
}

impl Coeff for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn half(&self) -> Self {
        self / BigInt::from(2)
    }
    fn div_int(&self, k: i64) -> Self {
        self / BigInt::from(k)
    }
}

impl Coeff for f64 {
    fn from_rational(r: &BigRational) -> Self {
        ratio_to_f64(r)
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn half(&self) -> Self {
        0.5 * self
    }
    fn div_int(&self, k: i64) -> Self {
        self / k as f64
    }
}

/// Correctly rounded enough conversion for rationals with huge numerators
/// and denominators (plain `to_f64` on each part can overflow).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift >= 0 {
        r.numer() / (r.denom() << (shift as usize))
    } else {
        (r.numer() << ((-shift) as usize)) / r.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Finite Fourier series with coefficients in `T`.
///
/// Always kept canonical: `cos` and `sin` have equal length `N` and the top
/// harmonic is nonzero (or `N == 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct Trig<T> {
    a0: T,
    cos: Vec<T>,
    sin: Vec<T>,
}

pub type TrigPoly = Trig<BigRational>;
pub type FloatTrig = Trig<f64>;

impl<T: Coeff> Trig<T> {
    pub fn zero() -> Self {
        Trig { a0: T::zero(), cos: Vec::new(), sin: Vec::new() }
    }

    /// The constant function `value`.
    pub fn constant(value: T) -> Self {
        Trig { a0: value.clone() + value, cos: Vec::new(), sin: Vec::new() }
    }

    /// Builds from `a0` (twice the mean) and the cosine/sine sequences
    /// `a_1..a_N`, `b_1..b_N`. Shorter sequences are zero-padded.
    pub fn from_parts(a0: T, mut cos: Vec<T>, mut sin: Vec<T>) -> Self {
        let n = cos.len().max(sin.len());
        cos.resize(n, T::zero());
        sin.resize(n, T::zero());
        let mut f = Trig { a0, cos, sin };
        f.canonicalize();
        f
    }

    /// Builds from the mean value instead of `a0`.
    pub fn from_mean(mean: T, cos: Vec<T>, sin: Vec<T>) -> Self {
        Self::from_parts(mean.clone() + mean, cos, sin)
    }

    pub fn cos_term(m: usize, c: T) -> Self {
        let mut f = Self::zero();
        f.add_cos(m, c);
        f
    }

    pub fn sin_term(m: usize, c: T) -> Self {
        let mut f = Self::zero();
        f.add_sin(m, c);
        f
    }

    fn canonicalize(&mut self) {
        while let (Some(c), Some(s)) = (self.cos.last(), self.sin.last()) {
            if c.is_zero() && s.is_zero() {
                self.cos.pop();
                self.sin.pop();
            } else {
                break;
            }
        }
    }

    fn grow(&mut self, n: usize) {
        if self.cos.len() < n {
            self.cos.resize(n, T::zero());
            self.sin.resize(n, T::zero());
        }
    }

    /// Adds `c cos(mt)`; `m == 0` adds the constant `c`.
    pub fn add_cos(&mut self, m: usize, c: T) {
        if m == 0 {
            self.a0 = self.a0.clone() + c.clone() + c;
        } else {
            self.grow(m);
            self.cos[m - 1] = self.cos[m - 1].clone() + c;
        }
        self.canonicalize();
    }

    /// Adds `c sin(mt)`; `m == 0` is a no-op.
    pub fn add_sin(&mut self, m: usize, c: T) {
        if m == 0 {
            return;
        }
        self.grow(m);
        self.sin[m - 1] = self.sin[m - 1].clone() + c;
        self.canonicalize();
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn is_zero(&self) -> bool {
        self.a0.is_zero() && self.cos.is_empty()
    }

    /// `a0`, i.e. twice the mean value.
    pub fn a0(&self) -> &T {
        &self.a0
    }

    pub fn mean(&self) -> T {
        self.a0.half()
    }

    /// `a_m` for `m >= 1`; zero beyond the degree.
    pub fn cos_coeff(&self, m: usize) -> T {
        assert!(m >= 1, "cosine coefficients start at m = 1");
        self.cos.get(m - 1).cloned().unwrap_or_else(T::zero)
    }

    /// `b_m` for `m >= 1`; zero beyond the degree.
    pub fn sin_coeff(&self, m: usize) -> T {
        assert!(m >= 1, "sine coefficients start at m = 1");
        self.sin.get(m - 1).cloned().unwrap_or_else(T::zero)
    }

    pub fn cos_coeffs(&self) -> &[T] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[T] {
        &self.sin
    }

    pub fn scale(&self, k: &T) -> Self {
        Self::from_parts(
            self.a0.clone() * k.clone(),
            self.cos.iter().map(|c| c.clone() * k.clone()).collect(),
            self.sin.iter().map(|c| c.clone() * k.clone()).collect(),
        )
    }

    /// Keeps harmonics `0..=n`.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.degree());
        Self::from_parts(self.a0.clone(), self.cos[..n].to_vec(), self.sin[..n].to_vec())
    }

    pub fn differentiate(&self) -> Self {
        let n = self.degree();
        let mut cos = Vec::with_capacity(n);
        let mut sin = Vec::with_capacity(n);
        for m in 1..=n {
            let k = T::from_i64(m as i64);
            cos.push(k.clone() * self.sin[m - 1].clone());
            sin.push(-(k * self.cos[m - 1].clone()));
        }
        Self::from_parts(T::zero(), cos, sin)
    }

    /// `t -> int_0^t f(s) ds` as a secular function.
    pub fn antiderivative(&self) -> Secular<T> {
        let n = self.degree();
        let mut cos = Vec::with_capacity(n);
        let mut sin = Vec::with_capacity(n);
        for m in 1..=n {
            let k = m as i64;
            cos.push(-self.sin[m - 1].div_int(k));
            sin.push(self.cos[m - 1].div_int(k));
        }
        Secular { slope: self.mean(), periodic: Self::from_parts(T::zero(), cos, sin) }
    }

    /// Squared L2 norm `(1/2pi) int f^2` via Parseval.
    pub fn l2_norm_sq(&self) -> T {
        let mean = self.mean();
        let mut acc = T::zero();
        for (c, s) in self.cos.iter().zip(&self.sin) {
            acc = acc + c.clone() * c.clone() + s.clone() * s.clone();
        }
        mean.clone() * mean + acc.half()
    }

    pub fn to_f64(&self) -> FloatTrig {
        Trig {
            a0: self.a0.to_f64(),
            cos: self.cos.iter().map(Coeff::to_f64).collect(),
            sin: self.sin.iter().map(Coeff::to_f64).collect(),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Trig<U> {
        Trig::from_parts(f(&self.a0), self.cos.iter().map(&f).collect(), self.sin.iter().map(&f).collect())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.5 * self.a0.to_f64();
        for (m, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (sn, cs) = ((m + 1) as f64 * t).sin_cos();
            acc += c.to_f64() * cs + s.to_f64() * sn;
        }
        acc
    }

    /// `|a0/2| + sum (|a_m| + |b_m|)`.
    pub fn abs_coeff_sum(&self) -> f64 {
        0.5 * self.a0.to_f64().abs()
            + self.cos.iter().zip(&self.sin).map(|(c, s)| c.to_f64().abs() + s.to_f64().abs()).sum::<f64>()
    }

    /// `sum m (|a_m| + |b_m|)`, an upper bound of `|f'|`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(i, (c, s))| (i + 1) as f64 * (c.to_f64().abs() + s.to_f64().abs()))
            .sum()
    }

    /// Certified enclosure of `[min f, max f]` over one period.
    ///
    /// Samples a uniform grid and widens by `(h/2) * Lip` plus a rounding
    /// allowance. `grid_n` is raised to `4 (deg + 1)` if smaller.
    pub fn range_bounds(&self, grid_n: usize) -> (f64, f64) {
        let f = self.to_f64();
        let n = grid_n.max(4 * (self.degree() + 1));
        let h = 2.0 * PI / n as f64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..n {
            let v = f.eval_fast(j as f64 * h);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let widen = 0.5 * h * f.lipschitz_bound() + 64.0 * f64::EPSILON * (1.0 + f.abs_coeff_sum());
        ((lo - widen).next_down(), (hi + widen).next_up())
    }

    /// Upper bound of `max |f|`.
    pub fn sup_norm_bound(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (lo, hi) = self.range_bounds(DEFAULT_RANGE_GRID);
        let by_range = lo.abs().max(hi.abs());
        let by_sum = (self.abs_coeff_sum() * (1.0 + 4.0 * f64::EPSILON)).next_up();
        by_range.min(by_sum)
    }
}

/// Grid used by [`Trig::sup_norm_bound`].
pub const DEFAULT_RANGE_GRID: usize = 4096;

impl FloatTrig {
    /// Evaluation by angle-addition recurrence; cheaper for high degree.
    pub fn eval_fast(&self, t: f64) -> f64 {
        let (s1, c1) = t.sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut acc = 0.5 * self.a0;
        for (m, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            if m > 0 && m % 16 == 0 {
                // reseed to stop drift of the recurrence
                let (sm, cm) = ((m + 1) as f64 * t).sin_cos();
                s = sm;
                c = cm;
            }
            acc += a * c + b * s;
            let next_c = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = next_c;
        }
        acc
    }
}

impl<'a, T: Coeff> Add<&'a Trig<T>> for &'a Trig<T> {
    type Output = Trig<T>;
    fn add(self, rhs: &'a Trig<T>) -> Trig<T> {
        let n = self.degree().max(rhs.degree());
        let get = |v: &[T], i: usize| v.get(i).cloned().unwrap_or_else(T::zero);
        Trig::from_parts(
            self.a0.clone() + rhs.a0.clone(),
            (0..n).map(|i| get(&self.cos, i) + get(&rhs.cos, i)).collect(),
            (0..n).map(|i| get(&self.sin, i) + get(&rhs.sin, i)).collect(),
        )
    }
}

impl<'a, T: Coeff> Sub<&'a Trig<T>> for &'a Trig<T> {
    type Output = Trig<T>;
    fn sub(self, rhs: &'a Trig<T>) -> Trig<T> {
        self + &(-rhs)
    }
}

impl<T: Coeff> Neg for &Trig<T> {
    type Output = Trig<T>;
    fn neg(self) -> Trig<T> {
        Trig {
            a0: -self.a0.clone(),
            cos: self.cos.iter().map(|c| -c.clone()).collect(),
            sin: self.sin.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<'a, T: Coeff> Mul<&'a Trig<T>> for &'a Trig<T> {
    type Output = Trig<T>;

    /// Exact product by the product-to-sum identities.
    fn mul(self, rhs: &'a Trig<T>) -> Trig<T> {
        if self.is_zero() || rhs.is_zero() {
            return Trig::zero();
        }
        let n = self.degree() + rhs.degree();
        // cos index 0 holds the mean during accumulation
        let mut cos = vec![T::zero(); n + 1];
        let mut sin = vec![T::zero(); n + 1];
        let terms = |f: &Trig<T>| {
            let mut out = vec![(0usize, f.mean(), T::zero())];
            for m in 1..=f.degree() {
                out.push((m, f.cos[m - 1].clone(), f.sin[m - 1].clone()));
            }
            out
        };
        let lhs_terms = terms(self);
        let rhs_terms = terms(rhs);
        for (m, a, b) in &lhs_terms {
            for (k, c, d) in &rhs_terms {
                let (m, k) = (*m, *k);
                let sum = m + k;
                let (diff, sign) = if m >= k { (m - k, 1i64) } else { (k - m, -1i64) };
                let sgn = T::from_i64(sign);
                // cos m cos k = (cos(m-k) + cos(m+k)) / 2
                if !a.is_zero() && !c.is_zero() {
                    let p = (a.clone() * c.clone()).half();
                    cos[diff] = cos[diff].clone() + p.clone();
                    cos[sum] = cos[sum].clone() + p;
                }
                // sin m sin k = (cos(m-k) - cos(m+k)) / 2
                if !b.is_zero() && !d.is_zero() {
                    let p = (b.clone() * d.clone()).half();
                    cos[diff] = cos[diff].clone() + p.clone();
                    cos[sum] = cos[sum].clone() - p;
                }
                // cos m sin k = (sin(m+k) - sin(m-k)) / 2
                if !a.is_zero() && !d.is_zero() {
                    let p = (a.clone() * d.clone()).half();
                    sin[sum] = sin[sum].clone() + p.clone();
                    sin[diff] = sin[diff].clone() - sgn.clone() * p;
                }
                // sin m cos k = (sin(m+k) + sin(m-k)) / 2
                if !b.is_zero() && !c.is_zero() {
                    let p = (b.clone() * c.clone()).half();
                    sin[sum] = sin[sum].clone() + p.clone();
                    sin[diff] = sin[diff].clone() + sgn * p;
                }
            }
        }
        let mean = cos[0].clone();
        Trig::from_mean(mean, cos.split_off(1), sin.split_off(1))
    }
}

impl<T: Coeff> Trig<T> {
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Trig::constant(T::one());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

/// `A(t) = slope * t + periodic(t) - periodic(0)`: the antiderivative of a
/// trigonometric polynomial, normalized so `A(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Secular<T> {
    pub slope: T,
    /// Zero-mean periodic part.
    pub periodic: Trig<T>,
}

pub type SecularFn = Secular<BigRational>;

impl<T: Coeff> Secular<T> {
    pub fn eval(&self, t: f64) -> f64 {
        self.slope.to_f64() * t + self.periodic.eval(t) - self.periodic.eval(0.0)
    }

    /// `A(2pi) = 2pi * slope`.
    pub fn at_two_pi(&self) -> f64 {
        2.0 * PI * self.slope.to_f64()
    }

    /// The integrand `A'`.
    pub fn derivative(&self) -> Trig<T> {
        &Trig::constant(self.slope.clone()) + &self.periodic.differentiate()
    }

    /// Upper bound of `|A'|`.
    pub fn derivative_bound(&self) -> f64 {
        self.slope.to_f64().abs() + self.periodic.lipschitz_bound()
    }

    /// Constant term when `A` is written as `c + slope*t + periodic(t)`.
    pub fn offset(&self) -> T {
        let mut c = T::zero();
        for a in self.periodic.cos_coeffs() {
            c = c - a.clone();
        }
        c
    }

    pub fn to_f64(&self) -> Secular<f64> {
        Secular { slope: self.slope.to_f64(), periodic: self.periodic.to_f64() }
    }
}

impl Secular<f64> {
    pub fn eval_fast(&self, t: f64) -> f64 {
        self.slope * t + self.periodic.eval_fast(t) - self.periodic.eval_fast(0.0)
    }
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or an integer `p`; the denominator must be positive.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let parse_int = |x: &str| -> Result<BigInt, String> {
        let digits = x.strip_prefix(['-', '+']).unwrap_or(x);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid integer `{x}`"));
        }
        x.parse::<BigInt>().map_err(|e| format!("invalid integer `{x}`: {e}"))
    };
    let n = parse_int(num)?;
    let d = match den {
        Some(d) => {
            if d.starts_with(['-', '+']) {
                return Err(format!("denominator must be an unsigned integer, got `{d}`"));
            }
            parse_int(d)?
        }
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err("zero denominator".to_string());
    }
    Ok(BigRational::new(n, d))
}

impl TrigPoly {
    /// Serializes as term lines `const p/q`, `cos m p/q`, `sin m p/q`,
    /// one per nonzero coefficient, by increasing harmonic.
    pub fn to_terms(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mean = self.mean();
        if !mean.is_zero() {
            out.push(format!("const {}", format_rational(&mean)));
        }
        for m in 1..=self.degree() {
            let (c, s) = (&self.cos[m - 1], &self.sin[m - 1]);
            if !c.is_zero() {
                out.push(format!("cos {m} {}", format_rational(c)));
            }
            if !s.is_zero() {
                out.push(format!("sin {m} {}", format_rational(s)));
            }
        }
        out
    }

    /// Parses one term line and adds it to `self`. `line_no` is used for
    /// error positions only.
    pub fn add_term_line(&mut self, line: &str, line_no: usize) -> Result<(), ParseError> {
        let fields: Vec<(usize, &str)> = split_with_columns(line);
        let err = |col: usize, msg: String| ParseError::Syntax { line: line_no, column: col, message: msg };
        let Some(&(col0, kind)) = fields.first() else {
            return Err(err(1, "empty term line".into()));
        };
        match kind {
            "const" => {
                if fields.len() != 2 {
                    return Err(err(col0, "expected `const p/q`".into()));
                }
                let v = parse_rational(fields[1].1).map_err(|m| err(fields[1].0, m))?;
                self.add_cos(0, v);
            }
            "cos" | "sin" => {
                if fields.len() != 3 {
                    return Err(err(col0, format!("expected `{kind} m p/q`")));
                }
                let m: usize = fields[1]
                    .1
                    .parse()
                    .ok()
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| err(fields[1].0, format!("invalid harmonic `{}`", fields[1].1)))?;
                let v = parse_rational(fields[2].1).map_err(|msg| err(fields[2].0, msg))?;
                if kind == "cos" {
                    self.add_cos(m, v);
                } else {
                    self.add_sin(m, v);
                }
            }
            other => return Err(err(col0, format!("unknown term `{other}`"))),
        }
        Ok(())
    }

    /// Parses a standalone term list (the `.trig` format). Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse_terms(text: &str) -> Result<Self, ParseError> {
        let mut f = TrigPoly::zero();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            f.add_term_line(raw, i + 1)?;
        }
        Ok(f)
    }
}

/// Whitespace-separated fields with their 1-based column.
pub(crate) fn split_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.to_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", terms.join("; "))
    }
}

/// `|x|` for exact rationals, as used by the coefficient bounds.
pub fn rational_abs(r: &BigRational) -> BigRational {
    r.abs()
}

/// Exact value of a decimal literal such as `-0.25`, `7.4e-1` or `12`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.25"), Some(q(1, 4)));
        assert_eq!(parse_decimal("-7.5e-1"), Some(q(-3, 4)));
        assert_eq!(parse_decimal("12"), Some(q(12, 1)));
        assert_eq!(parse_decimal("1.5e2"), Some(q(150, 1)));
        assert_eq!(parse_decimal("0.7440456581"), Some(q(7440456581, 10_000_000_000)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1x"), None);
    }

    fn order2() -> TrigPoly {
        TrigPoly::from_mean(q(3, 4), vec![q(0, 1), q(-1, 5)], vec![])
    }

    #[test]
    fn add_cancels_and_keeps_identity() {
        let one_plus_cos = TrigPoly::from_mean(q(1, 1), vec![q(1, 1)], vec![]);
        let minus_cos = TrigPoly::cos_term(1, q(-1, 1));
        let sum = &one_plus_cos + &minus_cos;
        assert_eq!(sum, TrigPoly::constant(q(1, 1)));
        assert_eq!(sum.degree(), 0);
        assert_eq!(&order2() + &TrigPoly::zero(), order2());

        let order3 = &order2() + &TrigPoly::cos_term(4, q(1, 25));
        assert_eq!(order3.mean(), q(3, 4));
        assert_eq!(order3.cos_coeff(2), q(-1, 5));
        assert_eq!(order3.cos_coeff(4), q(1, 25));
        assert_eq!(order3.degree(), 4);
    }

    #[test]
    fn products_by_double_angle() {
        let c = TrigPoly::cos_term(1, q(1, 1));
        let s = TrigPoly::sin_term(1, q(1, 1));
        assert_eq!(&c * &c, TrigPoly::from_mean(q(1, 2), vec![q(0, 1), q(1, 2)], vec![]));
        assert_eq!(&c * &s, TrigPoly::sin_term(2, q(1, 2)));
        assert_eq!(&s * &s, TrigPoly::from_mean(q(1, 2), vec![q(0, 1), q(-1, 2)], vec![]));
        // sin t cos 2t = (sin 3t - sin t) / 2
        let c2 = TrigPoly::cos_term(2, q(1, 1));
        let expect = TrigPoly::from_parts(q(0, 1), vec![], vec![q(-1, 2), q(0, 1), q(1, 2)]);
        assert_eq!(&s * &c2, expect);
        assert_eq!(&c2 * &s, expect);
    }

    #[test]
    fn cube_of_two_term_ansatz_mean() {
        // (r0 + r2 cos 2t)^3 has mean r0^3 + (3/2) r0 r2^2
        let (r0, r2) = (q(3, 4), q(-1, 5));
        let f = TrigPoly::from_mean(r0.clone(), vec![q(0, 1), r2.clone()], vec![]);
        let cube = f.pow(3);
        let expect = &r0 * &r0 * &r0 + q(3, 2) * &r0 * &r2 * &r2;
        assert_eq!(cube.mean(), expect);
        assert_eq!(cube.degree(), 6);
    }

    #[test]
    fn derivative_rules() {
        assert_eq!(TrigPoly::cos_term(1, q(1, 1)).differentiate(), TrigPoly::sin_term(1, q(-1, 1)));
        assert!(TrigPoly::constant(q(7, 3)).differentiate().is_zero());
        assert_eq!(order2().differentiate(), TrigPoly::sin_term(2, q(2, 5)));
    }

    #[test]
    fn antiderivative_examples() {
        let a = TrigPoly::constant(q(2, 1)).antiderivative();
        assert_eq!(a.slope, q(2, 1));
        assert!((a.at_two_pi() - 4.0 * PI).abs() < 1e-12);
        assert!((a.eval(2.0 * PI) - 4.0 * PI).abs() < 1e-12);

        let s = TrigPoly::cos_term(1, q(1, 1)).antiderivative();
        assert!(s.slope.is_zero());
        assert_eq!(s.periodic, TrigPoly::sin_term(1, q(1, 1)));
        assert_eq!(s.eval(0.0), 0.0);
    }

    #[test]
    fn parseval_examples() {
        assert_eq!(order2().l2_norm_sq(), q(233, 400));
        assert!(TrigPoly::zero().l2_norm_sq().is_zero());
    }

    #[test]
    fn evaluation() {
        assert_eq!(TrigPoly::cos_term(1, q(1, 1)).eval(0.0), 1.0);
        assert!((order2().eval(PI / 2.0) - 0.95).abs() < 1e-15);
        let fast = order2().to_f64();
        assert!((fast.eval_fast(PI / 2.0) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn range_and_sup_bounds() {
        let (lo, hi) = TrigPoly::constant(q(3, 4)).range_bounds(64);
        assert!(lo <= 0.75 && hi >= 0.75 && hi - lo < 1e-12);

        let (lo, hi) = order2().range_bounds(4096);
        assert!(lo <= 0.55 && lo > 0.549);
        assert!((0.95..0.951).contains(&hi));

        assert!((TrigPoly::cos_term(1, q(1, 1)).sup_norm_bound() - 1.0).abs() < 1e-3);
        assert!(TrigPoly::cos_term(1, q(1, 1)).sup_norm_bound() >= 1.0);
        assert!(order2().sup_norm_bound() <= 0.951);
        assert_eq!(TrigPoly::zero().sup_norm_bound(), 0.0);
    }

    #[test]
    fn term_text_round_trip() {
        let text = "const 44/59\ncos 2 -24/119\ncos 4 2/49\nsin 7 3\n";
        let f = TrigPoly::parse_terms(text).unwrap();
        assert_eq!(f.to_terms().join("\n") + "\n", text);
    }

    #[test]
    fn term_parse_errors() {
        let e = TrigPoly::parse_terms("cos 2 1/0").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 1, column: 7, .. }), "{e:?}");
        assert!(TrigPoly::parse_terms("cos 0 1").is_err());
        assert!(TrigPoly::parse_terms("tan 1 1").is_err());
        assert!(TrigPoly::parse_terms("const 1.5").is_err());
        assert!(TrigPoly::parse_terms("const 1/-2").is_err());
    }

    #[test]
    fn huge_rationals_convert() {
        let r = q(-347888350813299559, 1778094556332494400);
        assert!((ratio_to_f64(&r) + 0.195652).abs() < 1e-5);
        let big = BigRational::new(BigInt::from(3) << 2000usize, BigInt::from(7) << 2000usize);
        assert!((ratio_to_f64(&big) - 3.0 / 7.0).abs() < 1e-15);
    }
}
