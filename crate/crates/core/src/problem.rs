//! Line-oriented problem files.
//!
//! ```text
//! name: rigid_cubic
//! omega: 0 inf
//! degree: 3
//! order: 3            # optional overrides follow the three required keys
//! coeff 0
//! coeff 1
//! const 1/10
//! ...
//! ```
//!
//! Every number is an exact rational (`p/q` or an integer). Header keys come
//! first, in any order, each at most once; coefficient blocks `coeff 0` to
//! `coeff d` follow in ascending order and each holds term lines
//! (`const p/q`, `cos m p/q`, `sin m p/q`). Blank lines and `#` comments are
//! ignored. [`ProblemFile::to_text`] writes the canonical form.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::ParseError;
use crate::hbm::Symmetry;
use crate::ode::OdeSpec;
use crate::trigpoly::{format_rational, parse_rational, split_with_columns, TrigPoly};

#[derive(Clone, Debug, PartialEq)]
pub enum DomainBound {
    NegInf,
    PosInf,
    Finite(BigRational),
}

impl DomainBound {
    pub fn to_f64(&self) -> f64 {
        match self {
            DomainBound::NegInf => f64::NEG_INFINITY,
            DomainBound::PosInf => f64::INFINITY,
            DomainBound::Finite(r) => crate::trigpoly::ratio_to_f64(r),
        }
    }
}

impl fmt::Display for DomainBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainBound::NegInf => write!(f, "-inf"),
            DomainBound::PosInf => write!(f, "inf"),
            DomainBound::Finite(r) => write!(f, "{}", format_rational(r)),
        }
    }
}

/// Open interval `Omega` on which `X` is considered.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub lo: DomainBound,
    pub hi: DomainBound,
}

impl Domain {
    pub fn real_line() -> Self {
        Domain { lo: DomainBound::NegInf, hi: DomainBound::PosInf }
    }

    pub fn positive() -> Self {
        Domain { lo: DomainBound::Finite(BigRational::from_integer(0.into())), hi: DomainBound::PosInf }
    }

    /// `[lo, hi]` lies strictly inside the open interval.
    pub fn contains_closed(&self, lo: f64, hi: f64) -> bool {
        self.lo.to_f64() < lo && hi < self.hi.to_f64()
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::positive()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub order: Option<usize>,
    pub symmetry: Option<Symmetry>,
    pub pieces: Option<usize>,
    pub margin: Option<BigRational>,
    pub stilde: Option<BigRational>,
    pub budget: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub name: String,
    pub omega: Domain,
    pub ode: OdeSpec,
    pub overrides: Overrides,
}

const HEADER_KEYS: [&str; 9] = ["name", "omega", "degree", "order", "symmetry", "pieces", "margin", "stilde", "budget"];

impl ProblemFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParseError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut seen = HashSet::new();
        let mut name = None;
        let mut omega = None;
        let mut degree: Option<usize> = None;
        let mut overrides = Overrides::default();
        let mut blocks: Vec<TrigPoly> = Vec::new();
        let mut block_terms: HashSet<(String, usize)> = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let syntax = |column: usize, message: String| ParseError::Syntax { line: line_no, column, message };
            let fields = split_with_columns(raw);
            let (col0, first) = fields[0];

            if let Some(key) = first.strip_suffix(':') {
                if !blocks.is_empty() {
                    return Err(syntax(col0, format!("header key `{key}` after coefficient blocks")));
                }
                if !HEADER_KEYS.contains(&key) {
                    return Err(syntax(col0, format!("unknown key `{key}`")));
                }
                if !seen.insert(key.to_string()) {
                    return Err(syntax(col0, format!("duplicate key `{key}`")));
                }
                let values = &fields[1..];
                let single = || -> Result<(usize, &str), ParseError> {
                    match values {
                        [v] => Ok(*v),
                        _ => Err(syntax(col0, format!("`{key}` takes exactly one value"))),
                    }
                };
                match key {
                    "name" => name = Some(single()?.1.to_string()),
                    "omega" => {
                        let [(c_lo, lo), (c_hi, hi)] = values else {
                            return Err(syntax(col0, "`omega` takes two bounds".into()));
                        };
                        let lo = parse_bound(lo).map_err(|m| syntax(*c_lo, m))?;
                        let hi = parse_bound(hi).map_err(|m| syntax(*c_hi, m))?;
                        if lo.to_f64() >= hi.to_f64() || lo == DomainBound::PosInf || hi == DomainBound::NegInf {
                            return Err(ParseError::Semantic(format!("empty domain ({lo}, {hi})")));
                        }
                        omega = Some(Domain { lo, hi });
                    }
                    "degree" | "order" | "pieces" => {
                        let (c, v) = single()?;
                        let n: usize = v.parse().map_err(|_| syntax(c, format!("invalid integer `{v}`")))?;
                        match key {
                            "degree" => degree = Some(n),
                            "order" => overrides.order = Some(n),
                            _ => overrides.pieces = Some(n),
                        }
                    }
                    "symmetry" => {
                        let (c, v) = single()?;
                        overrides.symmetry =
                            Some(v.parse().map_err(|_| syntax(c, format!("unknown symmetry `{v}`")))?);
                    }
                    _ => {
                        let (c, v) = single()?;
                        let r = parse_rational(v).map_err(|m| syntax(c, m))?;
                        if !r.is_positive() {
                            return Err(syntax(c, format!("`{key}` must be positive")));
                        }
                        match key {
                            "margin" => overrides.margin = Some(r),
                            "stilde" => overrides.stilde = Some(r),
                            _ => overrides.budget = Some(r),
                        }
                    }
                }
                continue;
            }

            if first == "coeff" {
                let Some(d) = degree else {
                    return Err(syntax(col0, "`degree:` must precede coefficient blocks".into()));
                };
                let [_, (c, k)] = fields[..] else {
                    return Err(syntax(col0, "expected `coeff k`".into()));
                };
                let k: usize = k.parse().map_err(|_| syntax(c, format!("invalid block index `{k}`")))?;
                if k != blocks.len() {
                    return Err(syntax(c, format!("expected block `coeff {}`, found `coeff {k}`", blocks.len())));
                }
                if k > d {
                    return Err(ParseError::Semantic(format!("block `coeff {k}` exceeds degree {d}")));
                }
                blocks.push(TrigPoly::zero());
                block_terms.clear();
                continue;
            }

            let Some(current) = blocks.last_mut() else {
                return Err(syntax(col0, format!("unexpected `{first}` outside a coefficient block")));
            };
            let harmonic = if first == "const" { 0 } else { fields.get(1).and_then(|f| f.1.parse::<usize>().ok()).unwrap_or(0) };
            if !block_terms.insert((first.to_string(), harmonic)) {
                return Err(syntax(col0, format!("duplicate term `{first}` for harmonic {harmonic}")));
            }
            current.add_term_line(raw, line_no)?;
        }

        let name = name.ok_or_else(|| ParseError::Semantic("missing `name:`".into()))?;
        let omega = omega.ok_or_else(|| ParseError::Semantic("missing `omega:`".into()))?;
        let degree = degree.ok_or_else(|| ParseError::Semantic("missing `degree:`".into()))?;
        if blocks.len() != degree + 1 {
            return Err(ParseError::Semantic(format!(
                "degree {degree} needs blocks coeff 0..coeff {degree}, found {}",
                blocks.len()
            )));
        }
        let ode = OdeSpec::new(name.clone(), blocks)?;
        Ok(ProblemFile { name, omega, ode, overrides })
    }

    /// Canonical serialization; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name: {}\n", self.name));
        out.push_str(&format!("omega: {} {}\n", self.omega.lo, self.omega.hi));
        out.push_str(&format!("degree: {}\n", self.ode.degree_x()));
        let o = &self.overrides;
        if let Some(n) = o.order {
            out.push_str(&format!("order: {n}\n"));
        }
        if let Some(s) = o.symmetry {
            out.push_str(&format!("symmetry: {s}\n"));
        }
        if let Some(p) = o.pieces {
            out.push_str(&format!("pieces: {p}\n"));
        }
        for (key, value) in [("margin", &o.margin), ("stilde", &o.stilde), ("budget", &o.budget)] {
            if let Some(v) = value {
                out.push_str(&format!("{key}: {}\n", format_rational(v)));
            }
        }
        for (k, c) in self.ode.coeffs().iter().enumerate() {
            out.push_str(&format!("coeff {k}\n"));
            for term in c.to_terms() {
                out.push_str(&term);
                out.push('\n');
            }
        }
        out
    }
}

fn parse_bound(s: &str) -> Result<DomainBound, String> {
    match s {
        "-inf" => Ok(DomainBound::NegInf),
        "inf" | "+inf" => Ok(DomainBound::PosInf),
        _ => parse_rational(s).map(DomainBound::Finite),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn bundled_files_parse_and_round_trip() {
        for text in [problems::INTEGRABLE_HBP, problems::RIGID_CUBIC_HBP] {
            let p = ProblemFile::parse(text).unwrap();
            assert_eq!(p.to_text(), text);
        }
        let p = ProblemFile::parse(problems::INTEGRABLE_HBP).unwrap();
        assert_eq!(p.ode.degree_x(), 3);
        assert_eq!(p.overrides.symmetry, Some(Symmetry::EvenCos));
        assert_eq!(p.omega, Domain::real_line());
        let r = ProblemFile::parse(problems::RIGID_CUBIC_HBP).unwrap();
        assert_eq!(r.omega, Domain::positive());
    }

    fn err_of(text: &str) -> ParseError {
        ProblemFile::parse(text).unwrap_err()
    }

    #[test]
    fn zero_denominator_is_a_parse_error() {
        let e = err_of("name: x\nomega: 0 inf\ndegree: 1\ncoeff 0\ncoeff 1\ncos 2 1/0\n");
        assert_eq!(
            e,
            ParseError::Syntax { line: 6, column: 7, message: "zero denominator".into() }
        );
    }

    #[test]
    fn strictness() {
        let base = "name: x\nomega: 0 inf\ndegree: 1\n";
        assert!(matches!(err_of(&format!("{base}colour: red\ncoeff 0\ncoeff 1\nconst 1\n")), ParseError::Syntax { line: 4, .. }));
        assert!(matches!(err_of(&format!("{base}coeff 0\ncoeff 1\n")), ParseError::Semantic(_)));
        assert!(matches!(err_of(&format!("{base}coeff 0\ncoeff 1\nconst 1\ncoeff 2\nconst 1\n")), ParseError::Semantic(_)));
        assert!(matches!(err_of(&format!("{base}coeff 0\n")), ParseError::Semantic(_)));
        assert!(matches!(err_of(&format!("{base}coeff 1\nconst 1\n")), ParseError::Syntax { line: 4, .. }));
        assert!(matches!(err_of(&format!("{base}coeff 0\ncoeff 1\nconst 1\nconst 2\n")), ParseError::Syntax { line: 7, .. }));
        assert!(matches!(err_of("name: x\nomega: 1 0\ndegree: 1\ncoeff 0\ncoeff 1\nconst 1\n"), ParseError::Semantic(_)));
        assert!(matches!(err_of("name: x\nname: y\n"), ParseError::Syntax { line: 2, .. }));
    }

    #[test]
    fn comments_are_not_canonical_but_accepted() {
        let text = "# demo\nname: lin\nomega: -1/2 3\ndegree: 1\n\ncoeff 0\nsin 1 1\ncoeff 1\nconst -1\n";
        let p = ProblemFile::parse(text).unwrap();
        assert_eq!(p.to_text(), "name: lin\nomega: -1/2 3\ndegree: 1\ncoeff 0\nsin 1 1\ncoeff 1\nconst -1\n");
        assert!(p.omega.contains_closed(0.0, 2.9));
        assert!(!p.omega.contains_closed(-0.5, 1.0));
    }
}
