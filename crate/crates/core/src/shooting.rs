//! Numerical location of the periodic orbit: fixed-step RK4, a secant
//! search for a fixed point of the period map, and Fourier extraction on
//! the uniform grid.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::ShootingError;
use crate::ode::OdeSpec;
use crate::trigpoly::FloatTrig;

/// Samples `x_j = x(t_j)` at `t_j = 2pi j / steps`, `j = 0..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub steps: usize,
    pub h: f64,
    pub method_order: u32,
}

impl Trajectory {
    /// Two-column `t,x` text with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for (t, x) in self.t.iter().zip(&self.x) {
            let _ = writeln!(out, "{t:.16e},{x:.16e}");
        }
        out
    }

    /// `|x(2pi) - x(0)|`.
    pub fn closure_error(&self) -> f64 {
        (self.x[self.steps] - self.x[0]).abs()
    }
}

/// Default escape bound `10 (1 + |x0|)`.
pub fn default_bound(x0: f64) -> f64 {
    10.0 * (1.0 + x0.abs())
}

fn check_steps(steps: usize) -> Result<(), ShootingError> {
    if steps < 64 || !steps.is_power_of_two() {
        return Err(ShootingError::InvalidSteps(steps));
    }
    Ok(())
}

fn rk4_step(ode: &OdeSpec, t: f64, x: f64, h: f64) -> f64 {
    let k1 = ode.eval(x, t);
    let k2 = ode.eval(x + 0.5 * h * k1, t + 0.5 * h);
    let k3 = ode.eval(x + 0.5 * h * k2, t + 0.5 * h);
    let k4 = ode.eval(x + h * k3, t + h);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn run(ode: &OdeSpec, x_start: f64, steps: usize, bound: f64, backward: bool) -> Result<Vec<f64>, ShootingError> {
    check_steps(steps)?;
    let h = 2.0 * PI / steps as f64;
    let mut xs = vec![0.0; steps + 1];
    let (first, sign) = if backward { (steps, -1.0) } else { (0, 1.0) };
    xs[first] = x_start;
    let mut x = x_start;
    for k in 0..steps {
        let j = if backward { steps - k } else { k };
        let t = j as f64 * h;
        x = rk4_step(ode, t, x, sign * h);
        let next = if backward { j - 1 } else { j + 1 };
        if !x.is_finite() || x.abs() > bound {
            return Err(ShootingError::Blowup { t: next as f64 * h, x, bound });
        }
        xs[next] = x;
    }
    Ok(xs)
}

fn trajectory(xs: Vec<f64>, steps: usize) -> Trajectory {
    let h = 2.0 * PI / steps as f64;
    let t = (0..=steps).map(|j| if j == steps { 2.0 * PI } else { j as f64 * h }).collect();
    Trajectory { t, x: xs, steps, h, method_order: 4 }
}

/// Integrates forward from `x(0) = x0` over one period.
pub fn integrate(ode: &OdeSpec, x0: f64, steps: usize, bound: f64) -> Result<Trajectory, ShootingError> {
    Ok(trajectory(run(ode, x0, steps, bound, false)?, steps))
}

/// Integrates backward from `x(2pi) = x_end`; samples are in forward order.
pub fn integrate_backward(ode: &OdeSpec, x_end: f64, steps: usize, bound: f64) -> Result<Trajectory, ShootingError> {
    Ok(trajectory(run(ode, x_end, steps, bound, true)?, steps))
}

/// The period map `x(0) -> x(2pi)`.
pub fn period_map(ode: &OdeSpec, x0: f64, steps: usize, bound: f64) -> Result<f64, ShootingError> {
    Ok(run(ode, x0, steps, bound, false)?[steps])
}

fn inverse_period_map(ode: &OdeSpec, x: f64, steps: usize, bound: f64) -> Result<f64, ShootingError> {
    Ok(run(ode, x, steps, bound, true)?[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPoint {
    pub x0: f64,
    /// Finite-difference estimate of the period-map derivative.
    pub multiplier: f64,
    /// Whether the secant ran on the inverse map (repelling orbits).
    pub backward: bool,
    pub iterations: usize,
    /// `|G(x0) - x0|` for the map `G` the secant ran on.
    pub residual: f64,
}

impl FixedPoint {
    /// The orbit over one period, integrated in the stable direction.
    pub fn orbit(&self, ode: &OdeSpec, steps: usize, bound: f64) -> Result<Trajectory, ShootingError> {
        if self.backward {
            integrate_backward(ode, self.x0, steps, bound)
        } else {
            integrate(ode, self.x0, steps, bound)
        }
    }
}

/// Central difference of the period map (or its inverse) at `x`.
fn derivative(ode: &OdeSpec, x: f64, d: f64, steps: usize, bound: f64, backward: bool) -> Result<f64, ShootingError> {
    let map = |y| if backward { inverse_period_map(ode, y, steps, bound) } else { period_map(ode, y, steps, bound) };
    Ok((map(x + d)? - map(x - d)?) / (2.0 * d))
}

pub const SECANT_MAX_ITER: usize = 60;

/// Secant iteration on `G(x) - x`, where `G` is the period map for an
/// attracting orbit and its inverse for a repelling one, so the map run is
/// always the contracting one.
pub fn period_map_fixed_point(
    ode: &OdeSpec,
    x0_guess: f64,
    tol: f64,
    steps: usize,
    bound: f64,
) -> Result<FixedPoint, ShootingError> {
    let d = 1e-6 * (1.0 + x0_guess.abs());
    // a forward blowup near the guess already says the orbit repels
    let backward = match derivative(ode, x0_guess, d, steps, bound, false) {
        Ok(m) => m.abs() > 1.0,
        Err(ShootingError::Blowup { .. }) => true,
        Err(e) => return Err(e),
    };
    let g = |x: f64| -> Result<f64, ShootingError> {
        Ok(if backward { inverse_period_map(ode, x, steps, bound)? } else { period_map(ode, x, steps, bound)? } - x)
    };
    let multiplier_at = |x: f64| -> Result<f64, ShootingError> {
        let m = derivative(ode, x, d, steps, bound, backward)?;
        Ok(if backward { 1.0 / m } else { m })
    };
    let mut x_prev = x0_guess;
    let mut f_prev = g(x_prev)?;
    if f_prev.abs() <= tol {
        let multiplier = multiplier_at(x_prev)?;
        return Ok(FixedPoint { x0: x_prev, multiplier, backward, iterations: 0, residual: f_prev.abs() });
    }
    let mut x = x0_guess + 1e-4 * (1.0 + x0_guess.abs());
    let mut f = g(x)?;
    for it in 1..=SECANT_MAX_ITER {
        if f.abs() <= tol {
            let multiplier = multiplier_at(x)?;
            log::debug!("period-map fixed point {x} after {it} secant steps, multiplier {multiplier:e}");
            return Ok(FixedPoint { x0: x, multiplier, backward, iterations: it, residual: f.abs() });
        }
        if f == f_prev {
            break;
        }
        let next = x - f * (x - x_prev) / (f - f_prev);
        x_prev = x;
        f_prev = f;
        x = next;
        f = g(x)?;
    }
    Err(ShootingError::NoConvergence { iterations: SECANT_MAX_ITER, residual: f.abs() })
}

/// Fourier coefficients up to harmonic `n` by equal-weight sums over the
/// `steps` distinct samples. Exact for band-limited data below Nyquist.
pub fn fourier_extract(traj: &Trajectory, n: usize) -> Result<FloatTrig, ShootingError> {
    let needed = 2 * (2 * n + 1);
    if needed > traj.steps {
        return Err(ShootingError::TooManyHarmonics { harmonics: n, needed, samples: traj.steps });
    }
    let w = 2.0 / traj.steps as f64;
    let mut a0 = 0.0;
    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    for j in 0..traj.steps {
        let v = traj.x[j];
        a0 += v;
        for m in 1..=n {
            // exact grid angle, reduced modulo the period
            let theta = 2.0 * PI * ((m * j) % traj.steps) as f64 / traj.steps as f64;
            let (s, c) = theta.sin_cos();
            cos[m - 1] += v * c;
            sin[m - 1] += v * s;
        }
    }
    Ok(FloatTrig::from_parts(a0 * w, cos.iter().map(|c| c * w).collect(), sin.iter().map(|s| s * w).collect()))
}

/// Samples `f` on the uniform grid, as if it were a trajectory.
pub fn sample(f: &FloatTrig, steps: usize) -> Trajectory {
    let xs = (0..=steps).map(|j| f.eval(2.0 * PI * j as f64 / steps as f64)).collect();
    trajectory(xs, steps)
}
