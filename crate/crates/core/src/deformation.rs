//! Deformation constants: `M` with `||y_b||_inf <= M ||b||_2` for the
//! periodic solutions of `y' = a(t) y + b(t)`, where `a = dX/dx` along the
//! approximation and `A(t) = int_0^t a`.
//!
//! The production bound replaces `A` by a continuous piecewise-linear `L`
//! lying strictly below it, for which every integral of `e^{-2L}` is
//! elementary, and then maximizes over `t` on a fine grid with a certified
//! Lipschitz widening. The quadrature oracle evaluates the kernel norm
//! directly and is never used for verdicts.

use std::f64::consts::PI;

use crate::error::DeformationError;
use crate::trigpoly::{FloatTrig, Secular};

/// Below this `|A(2pi)|` the linear problem is treated as critical.
pub const NONCRITICAL_TOL: f64 = 1e-9;

/// Minimum number of grid points for the adequacy check and the outer max.
pub const MIN_GRID: usize = 16384;

/// Piece counts tried by [`m_bound_search`].
pub const SEARCH_PIECES: [usize; 5] = [8, 16, 32, 64, 128];

/// Margins tried by [`m_bound_search`], `2^0 .. 2^-12`.
pub fn search_margins() -> impl Iterator<Item = f64> {
    (0..=12).map(|k| 2f64.powi(-k))
}

/// Continuous piecewise-linear function through `(t_i, v_i)`,
/// `t_i = i * 2pi / P`. Piece `i` is `L_i(t) = -(alpha_i t + beta_i) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pieces: usize,
    margin: f64,
    h: f64,
    values: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    adequacy_certified: bool,
}

impl LowerBound {
    /// Builds `L` from its knot values `v_0..v_P`; `margin` is recorded only.
    pub fn from_knot_values(values: Vec<f64>, margin: f64) -> Result<Self, DeformationError> {
        if values.len() < 3 {
            return Err(DeformationError::InvalidParameters("need at least 2 pieces".into()));
        }
        let pieces = values.len() - 1;
        let h = 2.0 * PI / pieces as f64;
        let mut alpha = Vec::with_capacity(pieces);
        let mut beta = Vec::with_capacity(pieces);
        for i in 0..pieces {
            let slope = (values[i + 1] - values[i]) / h;
            let ti = i as f64 * h;
            alpha.push(-2.0 * slope);
            beta.push(-2.0 * (values[i] - slope * ti));
        }
        Ok(LowerBound { pieces, margin, h, values, alpha, beta, adequacy_certified: false })
    }

    pub fn pieces(&self) -> usize {
        self.pieces
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn knot(&self, i: usize) -> f64 {
        if i == self.pieces {
            2.0 * PI
        } else {
            i as f64 * self.h
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn adequacy_certified(&self) -> bool {
        self.adequacy_certified
    }

    fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / self.h
    }

    /// Index `m` of the piece `[t_m, t_{m+1}]` holding `t`.
    pub fn piece_of(&self, t: f64) -> usize {
        ((t / self.h).floor().max(0.0) as usize).min(self.pieces - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.piece_of(t);
        self.values[i] + self.slope(i) * (t - self.knot(i))
    }

    /// `ln int_{t_i}^{t_{i+1}} e^{-2L}`.
    fn log_j(&self, i: usize) -> f64 {
        log_int_exp_linear(-2.0 * self.values[i], self.alpha[i], self.knot(i + 1) - self.knot(i))
    }

    /// `J_i = int_{t_i}^{t_{i+1}} e^{-2 L_i(s)} ds`.
    pub fn piece_integral(&self, i: usize) -> f64 {
        self.log_j(i).exp()
    }
}

/// `ln int_0^len e^{c + rate s} ds`, stable for `rate` near zero.
fn log_int_exp_linear(c: f64, rate: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return f64::NEG_INFINITY;
    }
    c + len.ln() + log_expm1_over(rate * len)
}

/// `ln((e^x - 1) / x)`, using the series when `|x| < 1e-6`.
fn log_expm1_over(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0).ln()
    } else if x > 0.0 {
        x + (-(-x).exp_m1()).ln() - x.ln()
    } else {
        (-x.exp_m1()).ln() - (-x).ln()
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln |1 - e^a|`.
fn log_abs_one_minus_exp(a: f64) -> f64 {
    if a > 0.0 {
        a + (-(-a).exp_m1()).ln()
    } else {
        (-a.exp_m1()).ln()
    }
}

/// `ln (1 + e^a)`.
fn log_one_plus_exp(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// Chords of `A` at `P` equally spaced knots, shifted down by `margin`.
pub fn build_lower_bound(a: &Secular<f64>, pieces: usize, margin: f64) -> Result<LowerBound, DeformationError> {
    if pieces < 2 {
        return Err(DeformationError::InvalidParameters(format!("pieces = {pieces}, need at least 2")));
    }
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(DeformationError::InvalidParameters(format!("margin = {margin}, need > 0")));
    }
    let h = 2.0 * PI / pieces as f64;
    let values = (0..=pieces)
        .map(|i| {
            let t = if i == pieces { 2.0 * PI } else { i as f64 * h };
            a.eval_fast(t) - margin
        })
        .collect();
    LowerBound::from_knot_values(values, margin)
}

/// `A` sampled on a grid that contains every knot of a `P`-piece bound.
struct Grid {
    n: usize,
    a: Vec<f64>,
}

impl Grid {
    fn for_pieces(sec: &Secular<f64>, pieces: usize) -> Self {
        let n = pieces * MIN_GRID.div_ceil(pieces);
        Self::with_points(sec, n)
    }

    fn with_points(sec: &Secular<f64>, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let a = (0..=n).map(|j| if j == n { sec.eval_fast(2.0 * PI) } else { sec.eval_fast(j as f64 * h) }).collect();
        Grid { n, a }
    }

    fn t(&self, j: usize) -> f64 {
        if j == self.n {
            2.0 * PI
        } else {
            2.0 * PI * j as f64 / self.n as f64
        }
    }

    fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }
}

/// Rounding allowance for evaluating `A` in floating point.
fn eval_slack(sec: &Secular<f64>) -> f64 {
    64.0 * f64::EPSILON * (1.0 + 2.0 * PI * sec.slope.abs() + 2.0 * sec.periodic.abs_coeff_sum())
}

/// Checks `L(t) < A(t)` on all of `[0, 2pi]` and records the outcome.
///
/// Each grid cell of width `d` with gap values `g0, g1` at its ends has
/// minimum at least `(g0 + g1)/2 - Lip d/2`, where
/// `Lip = sup|A'| + |L_i'|`.
pub fn certify_adequate(l: &mut LowerBound, a: &Secular<f64>) -> bool {
    let grid = Grid::for_pieces(a, l.pieces);
    let ok = certify_on_grid(l, a, &grid);
    l.adequacy_certified = ok;
    ok
}

fn certify_on_grid(l: &LowerBound, a: &Secular<f64>, grid: &Grid) -> bool {
    let per_piece = grid.n / l.pieces;
    let d = grid.spacing();
    let lip_a = a.derivative_bound();
    let slack = eval_slack(a);
    for i in 0..l.pieces {
        let lip = lip_a + l.slope(i).abs();
        let ti = l.knot(i);
        let gap = |j: usize| grid.a[j] - (l.values[i] + l.slope(i) * (grid.t(j) - ti));
        let mut prev = gap(i * per_piece);
        for j in i * per_piece + 1..=(i + 1) * per_piece {
            let cur = gap(j);
            if 0.5 * (prev + cur) - 0.5 * lip * d <= slack {
                return false;
            }
            prev = cur;
        }
    }
    true
}

/// Evaluates `Psi_m(t)` literally:
/// `sum_{i<m} J_i + lambda^2 sum_{i>=m} J_i + (1 - lambda^2) int_{t_m}^t e^{-2 L_m}`.
///
/// The second sum starts at `m`, the piece containing `t`; starting it at
/// `m - 1` would count `J_{m-1}` twice and is undefined for `m = 0`.
pub fn psi(l: &LowerBound, lambda: f64, m: usize, t: f64) -> f64 {
    let lam2 = lambda * lambda;
    let left: f64 = (0..m).map(|i| l.piece_integral(i)).sum();
    let right: f64 = (m..l.pieces).map(|i| l.piece_integral(i)).sum();
    let partial = log_int_exp_linear(-2.0 * l.values[m], l.alpha[m], t - l.knot(m)).exp();
    left + lam2 * right + (1.0 - lam2) * partial
}

/// How a deformation constant was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MMethod {
    Cota { pieces: usize, margin: f64 },
    QuadratureOracle { grid_n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformationResult {
    pub m_bound: f64,
    pub method: MMethod,
    /// `A(2pi)`, i.e. `ln lambda`.
    pub a_two_pi: f64,
    /// `e^{A(2pi)}`; may be `inf` when `A(2pi)` is huge.
    pub lambda: f64,
}

impl DeformationResult {
    pub fn pieces(&self) -> Option<usize> {
        match self.method {
            MMethod::Cota { pieces, .. } => Some(pieces),
            MMethod::QuadratureOracle { .. } => None,
        }
    }

    pub fn margin(&self) -> Option<f64> {
        match self.method {
            MMethod::Cota { margin, .. } => Some(margin),
            MMethod::QuadratureOracle { .. } => None,
        }
    }
}

fn check_noncritical(a: &Secular<f64>) -> Result<f64, DeformationError> {
    let a2pi = a.at_two_pi();
    if a2pi.abs() <= NONCRITICAL_TOL {
        return Err(DeformationError::Critical { a_two_pi: a2pi, tolerance: NONCRITICAL_TOL });
    }
    Ok(a2pi)
}

/// Certified `M` from an adequate piecewise-linear lower bound.
///
/// Certifies `l` first if that has not been done. Works with
/// `Q(t) = e^{2A(t)} Psi(t) / (1 - lambda)^2`, so `M = sqrt(2pi max Q)`,
/// evaluated in log space. On a cell of width `d`,
/// `|Q'| <= 2 sup|a| Q + e^{2 max(A - L)} |1 + lambda| / |1 - lambda|`,
/// which bounds the true maximum from the sampled one.
pub fn m_bound_cota(a: &Secular<f64>, l: &mut LowerBound) -> Result<DeformationResult, DeformationError> {
    check_noncritical(a)?;
    let grid = Grid::for_pieces(a, l.pieces);
    if !l.adequacy_certified {
        l.adequacy_certified = certify_on_grid(l, a, &grid);
    }
    if !l.adequacy_certified {
        return Err(DeformationError::NotAdequate { pieces: l.pieces, margin: l.margin });
    }
    cota_on_grid(a, l, &grid)
}

fn cota_on_grid(a: &Secular<f64>, l: &LowerBound, grid: &Grid) -> Result<DeformationResult, DeformationError> {
    let a2pi = check_noncritical(a)?;
    let p = l.pieces;
    let log_j: Vec<f64> = (0..p).map(|i| l.log_j(i)).collect();
    // prefix[i] = ln sum_{k<i} J_k, suffix[i] = ln sum_{k>=i} J_k
    let mut prefix = vec![f64::NEG_INFINITY; p + 1];
    for i in 0..p {
        prefix[i + 1] = log_add(prefix[i], log_j[i]);
    }
    let mut suffix = vec![f64::NEG_INFINITY; p + 1];
    for i in (0..p).rev() {
        suffix[i] = log_add(suffix[i + 1], log_j[i]);
    }
    let log_1ml = log_abs_one_minus_exp(a2pi);
    let log_1pl = log_one_plus_exp(a2pi);

    let per_piece = grid.n / p;
    let mut max_log_q = f64::NEG_INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    let mut max_slope: f64 = 0.0;
    for m in 0..p {
        let tm = l.knot(m);
        let tm1 = l.knot(m + 1);
        let slope = l.slope(m);
        max_slope = max_slope.max(slope.abs());
        for j in m * per_piece..=(m + 1) * per_piece {
            let t = grid.t(j);
            let lt = l.values[m] + slope * (t - tm);
            let log_f = log_add(prefix[m], log_int_exp_linear(-2.0 * l.values[m], l.alpha[m], t - tm));
            let log_b = log_add(log_int_exp_linear(-2.0 * lt, l.alpha[m], tm1 - t), suffix[m + 1]);
            let log_psi = log_add(log_f, 2.0 * a2pi + log_b);
            let log_q = 2.0 * grid.a[j] + log_psi - 2.0 * log_1ml;
            max_log_q = max_log_q.max(log_q);
            max_gap = max_gap.max(grid.a[j] - lt);
        }
    }

    let d = grid.spacing();
    let sup_a = a.derivative_bound();
    let gap_bound = max_gap + 0.5 * d * (sup_a + max_slope) + eval_slack(a);
    let c = (2.0 * gap_bound + log_1pl - log_1ml).exp();
    let shrink = 1.0 - d * sup_a;
    if shrink <= 0.5 {
        // grid too coarse for this A; refine and retry
        let finer = Grid::with_points(a, grid.n * 2);
        return cota_on_grid(a, l, &finer);
    }
    let q_grid = max_log_q.exp() * (1.0 + 1e-12);
    let q_max = (q_grid + 0.5 * d * c) / shrink;
    let m_bound = ((2.0 * PI * q_max).sqrt() * (1.0 + 1e-12)).next_up();
    Ok(DeformationResult {
        m_bound,
        method: MMethod::Cota { pieces: p, margin: l.margin },
        a_two_pi: a2pi,
        lambda: a2pi.exp(),
    })
}

/// Tries every `(P, l)` in [`SEARCH_PIECES`] x [`search_margins`] and keeps
/// the smallest certified `M`. Ties go to the smaller `P`, then the larger
/// margin.
pub fn m_bound_search(a: &Secular<f64>) -> Result<DeformationResult, DeformationError> {
    let margins: Vec<f64> = search_margins().collect();
    m_bound_search_over(a, &SEARCH_PIECES, &margins)
}

/// [`m_bound_search`] over explicit candidate lists. Piece counts are tried
/// in ascending order and margins in descending order.
pub fn m_bound_search_over(
    a: &Secular<f64>,
    pieces: &[usize],
    margins: &[f64],
) -> Result<DeformationResult, DeformationError> {
    check_noncritical(a)?;
    let mut pieces = pieces.to_vec();
    pieces.sort_unstable();
    let mut margins = margins.to_vec();
    margins.sort_by(|x, y| y.total_cmp(x));
    let mut best: Option<DeformationResult> = None;
    let mut grid: Option<Grid> = None;
    for &p in &pieces {
        let n = p * MIN_GRID.div_ceil(p);
        if grid.as_ref().is_none_or(|g| g.n % p != 0) {
            grid = Some(Grid::with_points(a, n));
        }
        let grid = grid.as_ref().expect("grid just built");
        for &margin in &margins {
            let mut l = build_lower_bound(a, p, margin)?;
            // gaps only shrink with the margin
            if !certify_on_grid(&l, a, grid) {
                break;
            }
            l.adequacy_certified = true;
            let r = cota_on_grid(a, &l, grid)?;
            log::debug!("cota P = {p}, margin = {margin}: M <= {}", r.m_bound);
            if best.as_ref().is_none_or(|b| r.m_bound < b.m_bound) {
                best = Some(r);
            }
        }
    }
    best.ok_or(DeformationError::NotAdequate {
        pieces: pieces.last().copied().unwrap_or(0),
        margin: margins.first().copied().unwrap_or(0.0),
    })
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Per-cell integrals `int_{t_j}^{t_{j+1}} f` on a uniform `n`-cell grid.
fn cell_integrals(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let d = 2.0 * PI / n as f64;
    (0..n)
        .map(|j| {
            let mid = (j as f64 + 0.5) * d;
            0.5 * d * GAUSS5.iter().map(|&(x, w)| w * f(mid + 0.5 * d * x)).sum::<f64>()
        })
        .collect()
}

/// Numerical `M = 2pi max_t ||H(t, .)||_2` from the kernel, with the max
/// taken over the grid points only. Not certified.
pub fn m_oracle_quadrature(a: &Secular<f64>, grid_n: usize) -> Result<DeformationResult, DeformationError> {
    let a2pi = check_noncritical(a)?;
    let grid = Grid::with_points(a, grid_n);
    let a_ref = grid.a.iter().cloned().fold(f64::INFINITY, f64::min);
    let cells = cell_integrals(grid_n, |s| (-2.0 * (a.eval_fast(s) - a_ref)).exp());
    let mut prefix = vec![0.0; grid_n + 1];
    for j in 0..grid_n {
        prefix[j + 1] = prefix[j] + cells[j];
    }
    let mut suffix = vec![0.0; grid_n + 1];
    for j in (0..grid_n).rev() {
        suffix[j] = suffix[j + 1] + cells[j];
    }
    let mut max_log = f64::NEG_INFINITY;
    for j in 0..=grid_n {
        let log_g = log_add(prefix[j].ln(), 2.0 * a2pi + suffix[j].ln());
        max_log = max_log.max(2.0 * (grid.a[j] - a_ref) + log_g);
    }
    let m = (2.0 * PI).sqrt() * (0.5 * max_log - log_abs_one_minus_exp(a2pi)).exp();
    Ok(DeformationResult {
        m_bound: m,
        method: MMethod::QuadratureOracle { grid_n },
        a_two_pi: a2pi,
        lambda: a2pi.exp(),
    })
}

/// A function sampled at `t_j = 2pi j / n`, `j = 0..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

impl Samples {
    pub fn sup_norm(&self) -> f64 {
        self.x.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of cells `n`.
    pub fn cells(&self) -> usize {
        self.t.len() - 1
    }
}

/// The unique periodic solution of `x' = a(t) x + b(t)`, `a = A'`, through
/// the kernel representation
/// `x(t) = [int_0^t e^{A(t)-A(s)} b + lambda int_t^{2pi} e^{A(t)-A(s)} b] / (1 - lambda)`.
pub fn periodic_solution(
    a: &Secular<f64>,
    b: impl Fn(f64) -> f64,
    grid_n: usize,
) -> Result<Samples, DeformationError> {
    let a2pi = check_noncritical(a)?;
    let grid = Grid::with_points(a, grid_n);
    let a_ref = grid.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cells = cell_integrals(grid_n, |s| (-(a.eval_fast(s) - a_ref)).exp() * b(s));
    let mut prefix = vec![0.0; grid_n + 1];
    for j in 0..grid_n {
        prefix[j + 1] = prefix[j] + cells[j];
    }
    let mut suffix = vec![0.0; grid_n + 1];
    for j in (0..grid_n).rev() {
        suffix[j] = suffix[j + 1] + cells[j];
    }
    // 1/(1 - lambda) and lambda/(1 - lambda) without forming lambda
    let (c_left, c_right) = if a2pi > 0.0 {
        let e = (-a2pi).exp();
        let den = (-a2pi).exp_m1();
        (e / den, 1.0 / den)
    } else {
        let den = -a2pi.exp_m1();
        (1.0 / den, a2pi.exp() / den)
    };
    let x = (0..=grid_n)
        .map(|j| (grid.a[j] - a_ref).exp() * (c_left * prefix[j] + c_right * suffix[j]))
        .collect();
    Ok(Samples { t: (0..=grid_n).map(|j| grid.t(j)).collect(), x })
}

/// [`periodic_solution`] for a trigonometric forcing term.
pub fn periodic_solution_kernel(a: &Secular<f64>, b: &FloatTrig, grid_n: usize) -> Result<Samples, DeformationError> {
    periodic_solution(a, |t| b.eval_fast(t), grid_n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::Trig;

    fn linear(slope: f64) -> Secular<f64> {
        Secular { slope, periodic: Trig::zero() }
    }

    #[test]
    fn chords_of_linear_function_are_exact() {
        let a = linear(2.0);
        let l = build_lower_bound(&a, 4, 1.0).unwrap();
        for &t in &[0.0, 0.3, 1.7, 3.2, 6.0, 2.0 * PI] {
            assert!((l.eval(t) - (2.0 * t - 1.0)).abs() < 1e-12);
        }
        // L_i(t) = -(alpha_i t + beta_i)/2
        for i in 0..4 {
            let t = l.knot(i) + 0.2;
            assert!((l.eval(t) + 0.5 * (l.alpha()[i] * t + l.beta()[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn adequacy_examples() {
        let a = linear(2.0);
        let mut l = build_lower_bound(&a, 4, 1.0).unwrap();
        assert!(certify_adequate(&mut l, &a));
        assert!(l.adequacy_certified());

        // convex A touches its chords at the knots: zero margin fails
        let convex = Secular { slope: 0.0, periodic: FloatTrig::cos_term(1, -1.0) };
        let values = (0..=8).map(|i| convex.eval(i as f64 * 2.0 * PI / 8.0)).collect();
        let mut l = LowerBound::from_knot_values(values, 0.0).unwrap();
        assert!(!certify_adequate(&mut l, &convex));
        // a concave piece sits above its chord; positive margin certifies
        let mut l = build_lower_bound(&convex, 8, 0.25).unwrap();
        assert!(certify_adequate(&mut l, &convex));
        let mut l = build_lower_bound(&convex, 8, 0.01).unwrap();
        assert!(!certify_adequate(&mut l, &convex));
    }

    #[test]
    fn psi_degenerate_cases() {
        let l = LowerBound::from_knot_values(vec![0.0; 6], 1.0).unwrap();
        for &(m, t) in &[(0usize, 0.5), (2, 3.0), (4, 6.0)] {
            assert!((psi(&l, 0.0, m, t) - t).abs() < 1e-12);
            assert!((psi(&l, 1.0, m, t) - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_equals_left_plus_weighted_right_integral() {
        let a = Secular { slope: 0.4, periodic: FloatTrig::from_parts(0.0, vec![0.3, -0.1], vec![0.2]) };
        let l = build_lower_bound(&a, 7, 0.2).unwrap();
        let lambda = a.at_two_pi().exp();
        // brute-force integrals of e^{-2L}
        let integral = |lo: f64, hi: f64| {
            let n = 20000;
            let d = (hi - lo) / n as f64;
            (0..n).map(|k| (-2.0 * l.eval(lo + (k as f64 + 0.5) * d)).exp() * d).sum::<f64>()
        };
        for &t in &[0.1, 1.0, 2.5, 4.4, 6.2] {
            let m = l.piece_of(t);
            let expect = integral(0.0, t) + lambda * lambda * integral(t, 2.0 * PI);
            let got = psi(&l, lambda, m, t);
            assert!((got - expect).abs() < 1e-6 * expect, "t={t}: {got} vs {expect}");
            assert!(got > 0.0);
        }
    }

    #[test]
    fn oracle_matches_closed_form_for_linear_a() {
        // A = 2t: e^{2A} G = e^{4t}[(1 - e^{-4t})/4 + lambda^2 (e^{-4t} - e^{-8pi})/4]
        let a = linear(2.0);
        let lambda: f64 = (4.0 * PI).exp();
        let closed = |t: f64| {
            let g = (1.0 - (-4.0 * t).exp()) / 4.0 + lambda * lambda * ((-4.0 * t).exp() - (-8.0 * PI).exp()) / 4.0;
            (2.0 * PI).sqrt() * (2.0 * t).exp() * g.sqrt() / (lambda - 1.0)
        };
        let n = 4096;
        let expect = (0..=n).map(|j| closed(2.0 * PI * j as f64 / n as f64)).fold(0.0, f64::max);
        let got = m_oracle_quadrature(&a, n).unwrap().m_bound;
        assert!((got - expect).abs() < 1e-8 * expect, "{got} vs {expect}");
    }

    #[test]
    fn oracle_floor_for_decaying_equation() {
        // x' = -x + 1 has periodic solution 1 with ||b||_2 = 1
        let a = linear(-1.0);
        let m = m_oracle_quadrature(&a, 2048).unwrap().m_bound;
        assert!(m >= 1.0, "{m}");
        let x = periodic_solution(&a, |_| 1.0, 512).unwrap();
        assert!(x.x.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn kernel_solves_forced_equation() {
        // x' = -x + cos t  =>  x = (cos t + sin t)/2
        let a = linear(-1.0);
        let x = periodic_solution(&a, f64::cos, 1024).unwrap();
        for (t, v) in x.t.iter().zip(&x.x) {
            assert!((v - 0.5 * (t.cos() + t.sin())).abs() < 1e-12, "t={t} {v}");
        }
    }

    #[test]
    fn critical_inputs_are_rejected() {
        let a = Secular { slope: 0.0, periodic: FloatTrig::sin_term(1, 1.0) };
        assert!(matches!(periodic_solution(&a, |_| 1.0, 64), Err(DeformationError::Critical { .. })));
        assert!(matches!(m_oracle_quadrature(&a, 64), Err(DeformationError::Critical { .. })));
        let mut l = build_lower_bound(&a, 8, 0.5).unwrap();
        assert!(matches!(m_bound_cota(&a, &mut l), Err(DeformationError::Critical { .. })));
    }

    #[test]
    fn inadequate_bound_is_reported() {
        let convex = Secular { slope: 0.3, periodic: FloatTrig::cos_term(1, -2.0) };
        let mut l = build_lower_bound(&convex, 4, 1e-3).unwrap();
        assert!(matches!(m_bound_cota(&convex, &mut l), Err(DeformationError::NotAdequate { pieces: 4, .. })));
    }

    #[test]
    fn cota_dominates_oracle_for_linear_a() {
        let a = linear(2.0);
        let mut l = build_lower_bound(&a, 16, 1.0 / 64.0).unwrap();
        let cota = m_bound_cota(&a, &mut l).unwrap().m_bound;
        let oracle = m_oracle_quadrature(&a, 8192).unwrap().m_bound;
        assert!(cota >= oracle);
        // only the margin separates them: factor e^{margin}
        assert!(cota <= oracle * (1.0f64 / 64.0).exp() * 1.01, "{cota} vs {oracle}");
    }

    #[test]
    fn invalid_parameters() {
        let a = linear(1.0);
        assert!(build_lower_bound(&a, 1, 0.1).is_err());
        assert!(build_lower_bound(&a, 4, 0.0).is_err());
    }
}
