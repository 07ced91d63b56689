//! End-to-end orchestration: solve, rationalize, certify, shoot.
//!
//! Settings are resolved with command-line flags first, then the problem
//! file's overrides, then the defaults below.

use std::cell::OnceCell;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::certificate::{certify, check_r_bounds, Certificate, CertifyOptions};
use crate::error::{Error, HbmError};
use crate::hbm::{continuation_ladder, layout_from_float, solve_order1, LadderRung, Symmetry};
use crate::ode::{ApproxSolution, Provenance};
use crate::problem::ProblemFile;
use crate::rationalize::simplify_solution;
use crate::shooting::{default_bound, fourier_extract, period_map_fixed_point, FixedPoint, Trajectory};
use crate::trigpoly::{ratio_to_f64, FloatTrig, TrigPoly};

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_BUDGET: f64 = 1.05;
pub const DEFAULT_STEPS: usize = 4096;
pub const DEFAULT_HARMONICS: usize = 10;
/// Secant tolerance for the period-map fixed point.
pub const SHOOT_TOL: f64 = 1e-12;
/// Random samples used by the remainder-bound sanity check.
pub const R_CHECK_SAMPLES: usize = 10_000;

/// Values given on the command line; `None` defers to the problem file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Flags {
    pub order: Option<usize>,
    pub budget: Option<BigRational>,
    pub steps: Option<usize>,
    pub harmonics: Option<usize>,
    pub pieces: Option<usize>,
    pub margin: Option<BigRational>,
    pub stilde: Option<BigRational>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub order: usize,
    pub symmetry: Symmetry,
    pub budget: f64,
    pub steps: usize,
    pub harmonics: usize,
    pub certify: CertifyOptions,
    pub seed: u64,
}

impl Settings {
    pub fn resolve(problem: &ProblemFile, flags: &Flags) -> Self {
        let o = &problem.overrides;
        let budget = flags.budget.as_ref().or(o.budget.as_ref()).map_or(DEFAULT_BUDGET, ratio_to_f64);
        Settings {
            order: flags.order.or(o.order).unwrap_or(DEFAULT_ORDER),
            symmetry: o.symmetry.unwrap_or(Symmetry::Full),
            budget,
            steps: flags.steps.unwrap_or(DEFAULT_STEPS),
            harmonics: flags.harmonics.unwrap_or(DEFAULT_HARMONICS),
            certify: CertifyOptions {
                pieces: flags.pieces.or(o.pieces),
                margin: flags.margin.as_ref().or(o.margin.as_ref()).map(ratio_to_f64),
                stilde: flags.stilde.clone().or_else(|| o.stilde.clone()),
            },
            seed: flags.seed,
        }
    }
}

/// Largest order-1 root strictly inside the domain.
pub fn initial_root(problem: &ProblemFile) -> Result<f64, HbmError> {
    let (lo, hi) = (problem.omega.lo.to_f64(), problem.omega.hi.to_f64());
    solve_order1(&problem.ode).into_iter().rfind(|&r| lo < r && r < hi).ok_or(HbmError::NoSeed)
}

/// Harmonic balance ladder up to the configured order. A rung where Newton
/// fails is retried once from the Fourier coefficients of the shooting orbit.
pub fn solve_ladder(problem: &ProblemFile, settings: &Settings) -> Result<Vec<LadderRung>, Error> {
    let r0 = initial_root(problem)?;
    let orbit: OnceCell<Option<Trajectory>> = OnceCell::new();
    let fallback = |n: usize| -> Option<Vec<f64>> {
        let traj = orbit.get_or_init(|| {
            let fp = period_map_fixed_point(&problem.ode, r0, SHOOT_TOL, settings.steps, default_bound(r0)).ok()?;
            fp.orbit(&problem.ode, settings.steps, default_bound(fp.x0)).ok()
        });
        let f = fourier_extract(traj.as_ref()?, n).ok()?;
        Some(layout_from_float(&f, n))
    };
    Ok(continuation_ladder(&problem.ode, settings.symmetry, settings.order, r0, Some(&fallback))?)
}

/// Rationalizes the top rung of the ladder.
pub fn rationalize(problem: &ProblemFile, settings: &Settings, rungs: &[LadderRung]) -> Result<ApproxSolution, Error> {
    let top = rungs.last().ok_or(HbmError::NoSeed)?;
    Ok(simplify_solution(&problem.ode, &top.solution.approx, settings.budget)?)
}

pub fn certify_solution(
    problem: &ProblemFile,
    settings: &Settings,
    xbar: &ApproxSolution,
) -> Result<Certificate, Error> {
    Ok(certify(&problem.ode, &xbar.xbar, xbar.provenance, &problem.omega, &settings.certify)?)
}

/// Sampled check of the remainder bounds at the certified `K` and radius.
pub fn r_bounds_hold(problem: &ProblemFile, settings: &Settings, cert: &Certificate) -> bool {
    check_r_bounds(&problem.ode, &cert.xbar, cert.k, cert.radius, R_CHECK_SAMPLES, settings.seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShootReport {
    pub fixed_point: FixedPoint,
    pub trajectory: Trajectory,
    pub coefficients: FloatTrig,
}

/// Locates the periodic orbit from the order-1 root and extracts its
/// Fourier coefficients.
pub fn shoot(problem: &ProblemFile, settings: &Settings) -> Result<ShootReport, Error> {
    let r0 = initial_root(problem)?;
    let fixed_point = period_map_fixed_point(&problem.ode, r0, SHOOT_TOL, settings.steps, default_bound(r0))?;
    let trajectory = fixed_point.orbit(&problem.ode, settings.steps, default_bound(fixed_point.x0))?;
    let coefficients = fourier_extract(&trajectory, settings.harmonics)?;
    Ok(ShootReport { fixed_point, trajectory, coefficients })
}

/// Shooting-derived approximation with coefficients snapped to rationals.
pub fn shooting_solution(report: &ShootReport) -> ApproxSolution {
    ApproxSolution::new(report.coefficients.map(|c| crate::hbm::snap(*c, crate::hbm::SNAP_DIGITS)), Provenance::Shooting)
}

pub fn format_ladder(rungs: &[LadderRung]) -> String {
    let mut out = String::new();
    for rung in rungs {
        let _ = writeln!(out, "# order {}", rung.order);
        let _ = writeln!(out, "accuracy = {}", rung.accuracy);
        let _ = writeln!(out, "newton_iterations = {}", rung.solution.iterations);
        let _ = writeln!(out, "shooting_seeded = {}", rung.fallback_seeded);
        out.push_str(&format_terms(&rung.solution.approx.xbar));
    }
    out
}

/// One term line per nonzero coefficient, readable back as an approximation file.
pub fn format_terms(f: &TrigPoly) -> String {
    f.to_terms().into_iter().map(|t| t + "\n").collect()
}

pub fn format_shoot(report: &ShootReport) -> String {
    let fp = &report.fixed_point;
    let mut out = String::new();
    let _ = writeln!(out, "x0 = {}", fp.x0);
    let _ = writeln!(out, "multiplier = {}", fp.multiplier);
    let _ = writeln!(out, "direction = {}", if fp.backward { "backward" } else { "forward" });
    let _ = writeln!(out, "secant_iterations = {}", fp.iterations);
    let _ = writeln!(out, "residual = {:e}", fp.residual);
    let _ = writeln!(out, "steps = {}", report.trajectory.steps);
    let c = &report.coefficients;
    let _ = writeln!(out, "mean = {}", c.mean());
    for m in 1..=c.degree() {
        let _ = writeln!(out, "cos {m} = {}", c.cos_coeff(m));
        let _ = writeln!(out, "sin {m} = {}", c.sin_coeff(m));
    }
    out
}
