//! Existence, uniqueness and hyperbolicity certificates.
//!
//! With `S` the accuracy of `xbar`, `M` a deformation constant of the
//! variational equation along it and `K` a bound of `|X_xx|` on the strip
//! `I = [min xbar - 2MS, max xbar + 2MS]`, the inequality `2 M^2 K S < 1`
//! guarantees a unique periodic solution within sup-distance `2MS` of
//! `xbar`. Every constant is rounded up before the product is formed.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deformation::{
    build_lower_bound, m_bound_cota, m_bound_search_over, periodic_solution, search_margins, DeformationResult,
    MMethod, Samples, SEARCH_PIECES,
};
use crate::error::CertifyError;
use crate::ode::{OdeSpec, Provenance};
use crate::problem::Domain;
use crate::trigpoly::{format_rational, ratio_to_f64, FloatTrig, Secular, TrigPoly, DEFAULT_RANGE_GRID};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CertifyOptions {
    /// Fix the number of pieces of the lower bound instead of searching.
    pub pieces: Option<usize>,
    /// Fix the margin of the lower bound instead of searching.
    pub margin: Option<f64>,
    /// Declared accuracy `S~ >= S`, used for the verdict when present.
    pub stilde: Option<BigRational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Undetermined,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Undetermined => "undetermined",
        }
    }
}

/// `|A(2pi)| > 2pi / M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicityMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Compares `|A(2pi)|` (rounded down) with `2pi / M` (rounded up).
pub fn hyperbolicity_margin(a: &Secular<BigRational>, m: f64) -> HyperbolicityMargin {
    let lhs = a.at_two_pi().abs().next_down().max(0.0);
    let rhs = if m.is_finite() { (2.0 * PI / m).next_up() } else { 0.0 };
    HyperbolicityMargin { lhs, rhs, pass: lhs > rhs }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub ode_name: String,
    pub xbar: TrigPoly,
    pub provenance: Provenance,
    pub omega: Domain,
    pub s_exact_sq: BigRational,
    /// `sqrt(s_exact_sq)` rounded up.
    pub s_computed: f64,
    pub s_declared: Option<BigRational>,
    /// The accuracy used for the verdict.
    pub s: f64,
    pub deformation: DeformationResult,
    pub m: f64,
    pub a_two_pi: f64,
    pub xbar_range: (f64, f64),
    pub radius: f64,
    pub strip: (f64, f64),
    pub k: f64,
    pub contraction: f64,
    pub hyperbolicity: HyperbolicityMargin,
    pub exists_unique: bool,
    pub hyperbolic: bool,
    pub stability: Stability,
}

/// Upper bound of `sqrt(q)` for a nonnegative rational.
fn sqrt_up(q: &BigRational) -> f64 {
    let f = ratio_to_f64(q).next_up().max(0.0);
    f.sqrt().next_up()
}

fn mul_up(a: f64, b: f64) -> f64 {
    (a * b).next_up()
}

/// Runs the certification pipeline `S -> M -> I -> K -> 2M^2KS`.
pub fn certify(
    ode: &OdeSpec,
    xbar: &TrigPoly,
    provenance: Provenance,
    omega: &Domain,
    options: &CertifyOptions,
) -> Result<Certificate, CertifyError> {
    let acc = ode.accuracy(xbar);
    let s_computed = if acc.exact_sq == BigRational::from_integer(0.into()) { 0.0 } else { sqrt_up(&acc.exact_sq) };
    let s = match &options.stilde {
        Some(st) => {
            if st * st < acc.exact_sq {
                return Err(CertifyError::AccuracyTooSmall { declared: ratio_to_f64(st), computed: acc.value });
            }
            ratio_to_f64(st).next_up()
        }
        None => s_computed,
    };

    let a_exact = ode.dx_along(xbar).antiderivative();
    let a = a_exact.to_f64();
    let deformation = deformation_constant(&a, options)?;
    let m = deformation.m_bound;

    let xbar_range = xbar.range_bounds(DEFAULT_RANGE_GRID);
    let radius = mul_up(mul_up(2.0, m), s);
    let strip = ((xbar_range.0 - radius).next_down(), (xbar_range.1 + radius).next_up());
    if !omega.contains_closed(strip.0, strip.1) {
        return Err(CertifyError::StripOutsideDomain {
            lo: strip.0,
            hi: strip.1,
            omega_lo: omega.lo.to_f64(),
            omega_hi: omega.hi.to_f64(),
        });
    }
    let k = ode.d2x_bound(strip.0, strip.1);
    let contraction = mul_up(mul_up(mul_up(2.0, mul_up(m, m)), k), s);
    let hyperbolicity = hyperbolicity_margin(&a_exact, m);
    let exists_unique = contraction < 1.0;
    let hyperbolic = exists_unique && hyperbolicity.pass;
    let stability = match (hyperbolic, deformation.a_two_pi > 0.0) {
        (false, _) => Stability::Undetermined,
        (true, true) => Stability::Unstable,
        (true, false) => Stability::Stable,
    };
    log::info!("S = {s}, M = {m}, K = {k}, 2M^2KS = {contraction}");
    Ok(Certificate {
        ode_name: ode.name().to_string(),
        xbar: xbar.clone(),
        provenance,
        omega: omega.clone(),
        s_exact_sq: acc.exact_sq,
        s_computed,
        s_declared: options.stilde.clone(),
        s,
        a_two_pi: deformation.a_two_pi,
        deformation,
        m,
        xbar_range,
        radius,
        strip,
        k,
        contraction,
        hyperbolicity,
        exists_unique,
        hyperbolic,
        stability,
    })
}

fn deformation_constant(a: &Secular<f64>, options: &CertifyOptions) -> Result<DeformationResult, CertifyError> {
    Ok(match (options.pieces, options.margin) {
        (Some(p), Some(l)) => {
            let mut lb = build_lower_bound(a, p, l)?;
            m_bound_cota(a, &mut lb)?
        }
        (Some(p), None) => m_bound_search_over(a, &[p], &search_margins().collect::<Vec<_>>())?,
        (None, Some(l)) => m_bound_search_over(a, &SEARCH_PIECES, &[l])?,
        (None, None) => m_bound_search_over(a, &SEARCH_PIECES, &search_margins().collect::<Vec<_>>())?,
    })
}

fn provenance_str(p: Provenance) -> String {
    match p {
        Provenance::Hbm { order } => format!("hbm({order})"),
        Provenance::Rationalized => "rationalized".into(),
        Provenance::Shooting => "shooting".into(),
        Provenance::User => "user".into(),
    }
}

impl Certificate {
    /// Flat `key = value` document with a fixed key order and a trailing
    /// `# notes` section.
    pub fn to_document(&self, generated_at: Option<&str>) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("ode", self.ode_name.clone());
        kv("tool_version", env!("CARGO_PKG_VERSION").to_string());
        if let Some(ts) = generated_at {
            kv("generated_at", ts.to_string());
        }
        kv("provenance", provenance_str(self.provenance));
        kv("xbar", self.xbar.to_string());
        kv("omega", format!("({}, {})", self.omega.lo, self.omega.hi));
        kv("s_exact_sq", format_rational(&self.s_exact_sq));
        kv("s_computed", self.s_computed.to_string());
        kv("s_declared", self.s_declared.as_ref().map_or("none".into(), format_rational));
        kv("s", self.s.to_string());
        kv("a_two_pi", self.a_two_pi.to_string());
        kv("lambda", self.deformation.lambda.to_string());
        kv("m", self.m.to_string());
        match self.deformation.method {
            MMethod::Cota { pieces, margin } => {
                kv("m_method", "cota".into());
                kv("m_pieces", pieces.to_string());
                kv("m_margin", margin.to_string());
            }
            MMethod::QuadratureOracle { grid_n } => {
                kv("m_method", "quadrature_oracle".into());
                kv("m_grid", grid_n.to_string());
            }
        }
        kv("xbar_min", self.xbar_range.0.to_string());
        kv("xbar_max", self.xbar_range.1.to_string());
        kv("radius", self.radius.to_string());
        kv("strip_lo", self.strip.0.to_string());
        kv("strip_hi", self.strip.1.to_string());
        kv("k", self.k.to_string());
        kv("contraction", self.contraction.to_string());
        kv("hyperbolicity_lhs", self.hyperbolicity.lhs.to_string());
        kv("hyperbolicity_rhs", self.hyperbolicity.rhs.to_string());
        kv("exists_unique", self.exists_unique.to_string());
        kv("hyperbolic", self.hyperbolic.to_string());
        kv("stability", self.stability.as_str().to_string());
        out.push_str("# notes\n");
        out.push_str("# psi: the lambda^2-weighted sum in Psi_m starts at the piece m containing t\n");
        out.push_str("# lower bound: knots at (t_i, A(t_i) - margin), adequacy checked on a Lipschitz-widened grid\n");
        if let MMethod::Cota { pieces, margin } = self.deformation.method {
            let _ = writeln!(out, "# deformation: P = {pieces}, margin = {margin}");
        }
        if self.exists_unique {
            let _ = writeln!(
                out,
                "# verdict: a unique periodic solution lies in the tube |x - xbar| <= {} (nothing is claimed outside it)",
                self.radius
            );
        } else {
            out.push_str("# verdict: 2M^2KS >= 1, no conclusion\n");
        }
        out
    }
}

/// Outcome of [`picard_refine`].
#[derive(Clone, Debug, PartialEq)]
pub struct PicardResult {
    /// The correction `z` after the last step; the refined solution is `xbar + z`.
    pub z: Samples,
    /// `sup |z_{n+1} - z_n|` per step.
    pub diffs: Vec<f64>,
    /// Successive ratios `diffs[i+1] / diffs[i]` above the noise floor.
    pub ratios: Vec<f64>,
    /// All ratios are at most the certified contraction factor.
    pub contraction_respected: bool,
}

/// Maximum number of harmonics used to interpolate the iterates.
pub const PICARD_HARMONICS: usize = 128;
const PICARD_NOISE: f64 = 1e-13;

/// Iterates `z' = a(t) z + R(z, t) - s(t)` through the periodic kernel.
/// Diagnostic only; requires a certificate that established existence.
pub fn picard_refine(
    ode: &OdeSpec,
    xbar: &TrigPoly,
    cert: &Certificate,
    iters: usize,
    grid_n: usize,
) -> Result<PicardResult, CertifyError> {
    if !cert.exists_unique {
        return Err(CertifyError::NotCertified);
    }
    let a = ode.dx_along(xbar).antiderivative().to_f64();
    let s = ode.residual(xbar).to_f64();
    let x = xbar.to_f64();
    let harmonics = PICARD_HARMONICS.min(grid_n / 2 - 1);
    let mut z = Samples { t: (0..=grid_n).map(|j| 2.0 * PI * j as f64 / grid_n as f64).collect(), x: vec![0.0; grid_n + 1] };
    let mut diffs = Vec::with_capacity(iters);
    for _ in 0..iters {
        let zt = interpolate(&z, harmonics);
        let b = |t: f64| {
            let xt = x.eval_fast(t);
            ode.remainder(xt, zt.eval_fast(t), t) - s.eval_fast(t)
        };
        let next = periodic_solution(&a, b, grid_n)?;
        let d = next.x.iter().zip(&z.x).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        diffs.push(d);
        z = next;
    }
    let ratios: Vec<f64> = diffs.windows(2).filter(|w| w[0] > PICARD_NOISE).map(|w| w[1] / w[0]).collect();
    let contraction_respected = ratios.iter().all(|&r| r <= cert.contraction);
    Ok(PicardResult { z, diffs, ratios, contraction_respected })
}

/// Trigonometric interpolant of periodic samples by equal-weight sums.
fn interpolate(z: &Samples, harmonics: usize) -> FloatTrig {
    let n = z.cells();
    let mut a0 = 0.0;
    let mut cos = vec![0.0; harmonics];
    let mut sin = vec![0.0; harmonics];
    for j in 0..n {
        let v = z.x[j];
        a0 += v;
        for m in 1..=harmonics {
            let (sn, cs) = (m as f64 * z.t[j]).sin_cos();
            cos[m - 1] += v * cs;
            sin[m - 1] += v * sn;
        }
    }
    let w = 2.0 / n as f64;
    FloatTrig::from_parts(a0 * w, cos.iter().map(|c| c * w).collect(), sin.iter().map(|c| c * w).collect())
}

/// Samples `(z, zb, t)` with `|z|, |zb| <= radius` and checks
/// `|R(z)| <= K z^2 / 2` and `|R(z) - R(zb)| <= K max(|z|, |zb|) |z - zb|`.
pub fn check_r_bounds(ode: &OdeSpec, xbar: &TrigPoly, k: f64, radius: f64, samples: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = xbar.to_f64();
    let slack = |v: f64| v * (1.0 + 1e-9) + 1e-15;
    (0..samples).all(|_| {
        let t = rng.random_range(0.0..2.0 * PI);
        let z = rng.random_range(-radius..=radius);
        let zb = rng.random_range(-radius..=radius);
        let xt = x.eval_fast(t);
        let r = ode.remainder(xt, z, t);
        let rb = ode.remainder(xt, zb, t);
        r.abs() <= slack(0.5 * k * z * z) && (r - rb).abs() <= slack(k * z.abs().max(zb.abs()) * (z - zb).abs())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hyperbolicity_margin_cases() {
        let a = Secular { slope: q(2, 1), periodic: TrigPoly::zero() };
        let h = hyperbolicity_margin(&a, 2.4);
        assert!(h.pass && h.lhs > 12.5 && (h.rhs - 2.618).abs() < 1e-3);
        let flat = Secular { slope: q(0, 1), periodic: TrigPoly::zero() };
        assert!(!hyperbolicity_margin(&flat, f64::INFINITY).pass);
    }

    #[test]
    fn linear_equation_is_certified_at_its_exact_solution() {
        // x' = -x + cos t + sin t has the periodic solution sin t
        let ode = OdeSpec::new(
            "lin",
            vec![&TrigPoly::cos_term(1, q(1, 1)) + &TrigPoly::sin_term(1, q(1, 1)), TrigPoly::constant(q(-1, 1))],
        )
        .unwrap();
        let xbar = TrigPoly::sin_term(1, q(1, 1));
        let cert = certify(&ode, &xbar, Provenance::User, &Domain::real_line(), &CertifyOptions::default()).unwrap();
        assert_eq!(cert.s, 0.0);
        assert_eq!(cert.k, 0.0);
        assert!(cert.exists_unique && cert.hyperbolic);
        assert_eq!(cert.stability, Stability::Stable);
        let p = picard_refine(&ode, &xbar, &cert, 1, 256).unwrap();
        assert!(p.z.sup_norm() == 0.0);
        assert!(check_r_bounds(&ode, &xbar, 0.0, 1.0, 100, 0));
    }

    #[test]
    fn declared_accuracy_must_dominate() {
        let ode = problems::integrable();
        let xbar = problems::integrable_af();
        let opts = CertifyOptions { stilde: Some(q(3, 1000)), pieces: Some(10), margin: Some(0.1) };
        assert!(matches!(
            certify(&ode, &xbar, Provenance::User, &Domain::real_line(), &opts),
            Err(CertifyError::AccuracyTooSmall { .. })
        ));
    }

    #[test]
    fn strip_outside_domain_is_an_error() {
        let ode = problems::integrable();
        let xbar = problems::integrable_order2();
        let opts = CertifyOptions { pieces: Some(13), margin: Some(1.0 / 9.0), stilde: None };
        assert!(matches!(
            certify(&ode, &xbar, Provenance::User, &Domain::positive(), &opts),
            Err(CertifyError::StripOutsideDomain { .. })
        ));
    }

    #[test]
    fn critical_approximation_is_rejected() {
        // x' = x^2 - 1 at xbar = 0 has A = 0
        let ode = OdeSpec::new("c", vec![TrigPoly::constant(q(-1, 1)), TrigPoly::zero(), TrigPoly::constant(q(1, 1))])
            .unwrap();
        let r = certify(&ode, &TrigPoly::zero(), Provenance::User, &Domain::real_line(), &CertifyOptions::default());
        assert!(matches!(r, Err(CertifyError::Deformation(crate::error::DeformationError::Critical { .. }))));
    }

    #[test]
    fn uncertified_refinement_is_refused() {
        let ode = problems::integrable();
        let xbar = problems::integrable_order2();
        let opts = CertifyOptions { pieces: Some(13), margin: Some(1.0 / 9.0), stilde: None };
        let cert = certify(&ode, &xbar, Provenance::User, &Domain::real_line(), &opts).unwrap();
        assert!(!cert.exists_unique);
        assert_eq!(cert.stability, Stability::Undetermined);
        assert_eq!(picard_refine(&ode, &xbar, &cert, 3, 256), Err(CertifyError::NotCertified));
    }

    #[test]
    fn document_has_fixed_keys() {
        let ode = problems::rigid_cubic();
        let xbar = problems::rigid_cubic_af2();
        let cert = certify(&ode, &xbar, Provenance::User, &Domain::positive(), &CertifyOptions::default()).unwrap();
        let doc = cert.to_document(None);
        let keys: Vec<&str> = doc.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(" = ").next().unwrap()).collect();
        assert_eq!(keys[0], "ode");
        assert!(keys.contains(&"contraction") && keys.contains(&"m_pieces"));
        assert!(!doc.contains("generated_at"));
        assert!(doc.contains("# notes\n"));
        assert_eq!(doc, cert.to_document(None));
    }

    #[test]
    fn undersized_curvature_is_caught() {
        let ode = problems::integrable();
        let xbar = problems::integrable_af();
        assert!(check_r_bounds(&ode, &xbar, 20.91, 0.0192, 10_000, 0));
        assert!(!check_r_bounds(&ode, &xbar, 20.91 / 2.0, 0.0192, 10_000, 0));
    }
}
