//! Exact decision procedures for the fractional GN parameter conditions.
//!
//! Exponents are stored as reciprocals so that `p = inf` is the rational 0 and
//! every condition is an affine comparison of rationals.

mod json;
pub mod instances;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GnError, Result};

pub use instances::{regression_instances, Instance};
pub use json::{ProblemJson, TripleJson};

/// A rational number or positive infinity. Only exponents may be infinite.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(BigRational),
    Infinity,
}

impl ExtRational {
    pub fn recip(&self) -> Result<BigRational> {
        match self {
            ExtRational::Infinity => Ok(BigRational::zero()),
            ExtRational::Finite(v) if v.is_positive() => Ok(v.recip()),
            ExtRational::Finite(v) => invalid(format!("exponent {v} must be positive")),
        }
    }

    pub fn from_recip(inv: &BigRational) -> ExtRational {
        if inv.is_zero() {
            ExtRational::Infinity
        } else {
            ExtRational::Finite(inv.recip())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtRational::Infinity => f64::INFINITY,
            ExtRational::Finite(v) => rat_to_f64(v),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Infinity => write!(f, "inf"),
            ExtRational::Finite(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = GnError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtRational::Infinity);
        }
        parse_rational(t).map(ExtRational::Finite)
    }
}

/// Parses `"a/b"` or `"a"` with optional sign.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| GnError::InvalidParameter(format!("bad rational '{s}'")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| GnError::InvalidParameter(format!("bad rational '{s}'")))?;
    if den.is_zero() {
        return invalid(format!("zero denominator in '{s}'"));
    }
    Ok(BigRational::new(num, den))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Indices (s, 1/p, 1/q) of a smoothness space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceTriple {
    pub s: BigRational,
    pub inv_p: BigRational,
    pub inv_q: BigRational,
}

impl SpaceTriple {
    pub fn new(s: BigRational, inv_p: BigRational, inv_q: BigRational) -> Result<Self> {
        if inv_p.is_negative() || inv_q.is_negative() {
            return invalid("reciprocal exponents must be nonnegative");
        }
        Ok(SpaceTriple { s, inv_p, inv_q })
    }

    /// Builds a triple from (s, p, q) given as strings such as `"1/2"` or `"inf"`.
    pub fn parse(s: &str, p: &str, q: &str) -> Result<Self> {
        let s = parse_rational(s)?;
        let inv_p = p.parse::<ExtRational>()?.recip()?;
        let inv_q = q.parse::<ExtRational>()?.recip()?;
        SpaceTriple::new(s, inv_p, inv_q)
    }

    pub fn p(&self) -> ExtRational {
        ExtRational::from_recip(&self.inv_p)
    }

    pub fn q(&self) -> ExtRational {
        ExtRational::from_recip(&self.inv_q)
    }

    pub fn s_f64(&self) -> f64 {
        rat_to_f64(&self.s)
    }

    pub fn p_f64(&self) -> f64 {
        self.p().to_f64()
    }

    pub fn q_f64(&self) -> f64 {
        self.q().to_f64()
    }

    /// s − n/p, the differential dimension.
    pub fn diff_dim(&self, n: u32) -> BigRational {
        &self.s - &self.inv_p * BigRational::from_integer(BigInt::from(n))
    }
}

impl fmt::Display for SpaceTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={}, p={}, q={})", self.s, self.p(), self.q())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    HomogBesov,
    HomogTriebel,
    RieszPotential,
    InhomogBesov,
    InhomogRiesz,
}

impl Scale {
    pub fn name(&self) -> &'static str {
        match self {
            Scale::HomogBesov => "HomogBesov",
            Scale::HomogTriebel => "HomogTriebel",
            Scale::RieszPotential => "RieszPotential",
            Scale::InhomogBesov => "InhomogBesov",
            Scale::InhomogRiesz => "InhomogRiesz",
        }
    }
}

impl FromStr for Scale {
    type Err = GnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HomogBesov" => Ok(Scale::HomogBesov),
            "HomogTriebel" => Ok(Scale::HomogTriebel),
            "RieszPotential" => Ok(Scale::RieszPotential),
            "InhomogBesov" => Ok(Scale::InhomogBesov),
            "InhomogRiesz" => Ok(Scale::InhomogRiesz),
            other => invalid(format!("unknown scale '{other}'")),
        }
    }
}

/// ‖u‖_target ≲ ‖u‖_source0^{1−θ} ‖u‖_source1^θ in dimension n.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GNProblem {
    pub n: u32,
    pub theta: BigRational,
    pub target: SpaceTriple,
    pub source0: SpaceTriple,
    pub source1: SpaceTriple,
    pub scale: Scale,
}

impl GNProblem {
    pub fn new(
        n: u32,
        theta: BigRational,
        target: SpaceTriple,
        source0: SpaceTriple,
        source1: SpaceTriple,
        scale: Scale,
    ) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be positive");
        }
        Ok(GNProblem {
            n,
            theta,
            target,
            source0,
            source1,
            scale,
        })
    }

    pub fn theta_f64(&self) -> f64 {
        rat_to_f64(&self.theta)
    }

    fn one_minus_theta(&self) -> BigRational {
        BigRational::one() - &self.theta
    }

    /// (1−θ)s0 + θs1.
    pub fn s_bar(&self) -> BigRational {
        self.one_minus_theta() * &self.source0.s + &self.theta * &self.source1.s
    }

    /// 1/q ≤ (1−θ)/q0 + θ/q1.
    pub fn q_condition(&self) -> bool {
        self.target.inv_q <= self.one_minus_theta() * &self.source0.inv_q + &self.theta * &self.source1.inv_q
    }
}

/// n/p − s − (1−θ)(n/p0 − s0) − θ(n/p1 − s1).
pub fn scaling_balance(problem: &GNProblem) -> BigRational {
    let lhs = -problem.target.diff_dim(problem.n);
    let r0 = -problem.source0.diff_dim(problem.n);
    let r1 = -problem.source1.diff_dim(problem.n);
    lhs - problem.one_minus_theta() * r0 - &problem.theta * r1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Holds,
    Fails,
    OutOfScope,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub violated: Vec<String>,
    pub residual: BigRational,
    pub note: Option<String>,
}

impl Verdict {
    fn from_violations(violated: Vec<&str>, residual: BigRational) -> Verdict {
        let status = if violated.is_empty() {
            Status::Holds
        } else {
            Status::Fails
        };
        Verdict {
            status,
            violated: violated.into_iter().map(String::from).collect(),
            residual,
            note: None,
        }
    }

    fn out_of_scope(residual: BigRational, note: impl Into<String>) -> Verdict {
        Verdict {
            status: Status::OutOfScope,
            violated: Vec::new(),
            residual,
            note: Some(note.into()),
        }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "violated": self.violated,
            "residual": self.residual.to_string(),
            "note": self.note,
        })
    }
}

fn require_scale(problem: &GNProblem, allowed: &[Scale]) -> Option<Verdict> {
    if allowed.contains(&problem.scale) {
        None
    } else {
        Some(Verdict::out_of_scope(
            scaling_balance(problem),
            format!("scale {} not covered by this theorem", problem.scale.name()),
        ))
    }
}

fn theta_open(problem: &GNProblem) -> bool {
    problem.theta.is_positive() && problem.theta < BigRational::one()
}

/// Homogeneous Besov GN inequality, conditions 1.8 to 1.12.
pub fn check_thm12(problem: &GNProblem) -> Verdict {
    if let Some(v) = require_scale(problem, &[Scale::HomogBesov]) {
        return v;
    }
    let residual = scaling_balance(problem);
    if problem.theta.is_negative() || problem.theta > BigRational::one() {
        return Verdict::out_of_scope(residual, "theta outside [0, 1]");
    }
    let mut violated = Vec::new();
    if !residual.is_zero() {
        violated.push("1.8");
    }
    let s_bar = problem.s_bar();
    let s = &problem.target.s;
    let qcond = problem.q_condition();
    if *s > s_bar {
        violated.push("1.9");
    } else if *s == s_bar {
        if problem.source0.inv_p != problem.source1.inv_p {
            if !qcond {
                violated.push("1.10");
            }
        } else if problem.source0.s == problem.source1.s && !qcond {
            violated.push("1.11");
        }
    } else if problem.source0.diff_dim(problem.n) == problem.target.diff_dim(problem.n) && !qcond {
        violated.push("1.12");
    }
    Verdict::from_violations(violated, residual)
}

/// Besov sources with q0 = q1 = inf and a finite target q.
pub fn check_thm13(problem: &GNProblem) -> Verdict {
    if let Some(v) = require_scale(problem, &[Scale::HomogBesov]) {
        return v;
    }
    let residual = scaling_balance(problem);
    if !theta_open(problem) {
        return Verdict::out_of_scope(residual, "theorem requires 0 < theta < 1");
    }
    if problem.target.inv_q.is_zero() {
        return Verdict::out_of_scope(residual, "theorem requires a finite target q");
    }
    if !problem.source0.inv_q.is_zero() || !problem.source1.inv_q.is_zero() {
        return Verdict::out_of_scope(residual, "theorem requires q0 = q1 = inf");
    }
    let mut violated = Vec::new();
    if !residual.is_zero() {
        violated.push("1.14");
    }
    if problem.source0.diff_dim(problem.n) == problem.source1.diff_dim(problem.n) {
        violated.push("1.15");
    }
    let s_bar = problem.s_bar();
    if problem.target.s > s_bar {
        violated.push("1.16");
    } else if problem.target.s == s_bar && problem.source0.inv_p != problem.source1.inv_p {
        violated.push("1.17");
    }
    Verdict::from_violations(violated, residual)
}

/// Homogeneous Triebel-Lizorkin GN inequality with F^{s_i}_{p_i,inf} sources.
pub fn check_thm14(problem: &GNProblem) -> Verdict {
    if let Some(v) = require_scale(problem, &[Scale::HomogTriebel]) {
        return v;
    }
    let residual = scaling_balance(problem);
    if !theta_open(problem) {
        return Verdict::out_of_scope(residual, "theorem requires 0 < theta < 1");
    }
    let finite = [&problem.target.inv_p, &problem.source0.inv_p, &problem.source1.inv_p, &problem.target.inv_q];
    if finite.iter().any(|v| v.is_zero()) {
        return Verdict::out_of_scope(residual, "theorem requires finite p, p0, p1 and q");
    }
    if !problem.source0.inv_q.is_zero() || !problem.source1.inv_q.is_zero() {
        return Verdict::out_of_scope(residual, "theorem requires q0 = q1 = inf");
    }
    let mut violated = Vec::new();
    if !residual.is_zero() {
        violated.push("1.19");
    }
    let s_bar = problem.s_bar();
    if problem.target.s > s_bar {
        violated.push("1.20");
    } else if problem.target.s == s_bar && problem.source0.s == problem.source1.s {
        violated.push("1.21");
    }
    Verdict::from_violations(violated, residual)
}

fn riesz_in_range(problem: &GNProblem) -> bool {
    let one = BigRational::one();
    [&problem.target, &problem.source0, &problem.source1]
        .iter()
        .all(|t| t.inv_p.is_positive() && t.inv_p < one)
}

/// Riesz potential spaces with source0 = L^{p0}.
pub fn check_cor15(problem: &GNProblem) -> Verdict {
    if let Some(v) = require_scale(problem, &[Scale::RieszPotential]) {
        return v;
    }
    let residual = scaling_balance(problem);
    if !riesz_in_range(problem) {
        return Verdict::out_of_scope(residual, "requires 1 < p, p0, p1 < inf");
    }
    if !problem.source0.s.is_zero() {
        return Verdict::out_of_scope(residual, "requires s0 = 0");
    }
    if problem.theta.is_negative() || problem.theta > BigRational::one() {
        return Verdict::out_of_scope(residual, "theta outside [0, 1]");
    }
    let balanced = residual.is_zero();
    let smooth = problem.target.s <= &problem.theta * &problem.source1.s;
    let violated = if balanced && smooth { vec![] } else { vec!["1.23"] };
    Verdict::from_violations(violated, residual)
}

const SUFFICIENCY_NOTE: &str = "sufficiency-only: failure of these conditions is not a disproof";

/// Inhomogeneous scales via their homogeneous counterparts. Only a
/// positive answer is informative.
pub fn check_sufficient_inhomog(problem: &GNProblem) -> Verdict {
    let residual = scaling_balance(problem);
    let homog = match problem.scale {
        Scale::InhomogBesov => GNProblem {
            scale: Scale::HomogBesov,
            ..problem.clone()
        },
        Scale::InhomogRiesz => GNProblem {
            scale: Scale::RieszPotential,
            ..problem.clone()
        },
        _ => {
            return Verdict::out_of_scope(
                residual,
                format!("scale {} is not inhomogeneous", problem.scale.name()),
            )
        }
    };
    let verdict = match problem.scale {
        Scale::InhomogBesov => check_thm13(&homog),
        _ => check_cor15(&homog),
    };
    match verdict.status {
        Status::Holds => Verdict {
            note: Some("sufficient conditions met".into()),
            ..verdict
        },
        Status::Fails => Verdict::out_of_scope(residual, format!("{SUFFICIENCY_NOTE} (unmet: {})", verdict.violated.join(", "))),
        Status::OutOfScope => Verdict::out_of_scope(
            residual,
            format!("{SUFFICIENCY_NOTE}; {}", verdict.note.unwrap_or_default()),
        ),
    }
}

/// Picks the checker matching the problem's scale. Besov problems whose
/// sources both have q = inf and whose target q is finite go through
/// [`check_thm13`] only when asked; the default Besov checker is [`check_thm12`].
pub fn check_by_scale(problem: &GNProblem) -> Verdict {
    match problem.scale {
        Scale::HomogBesov => check_thm12(problem),
        Scale::HomogTriebel => check_thm14(problem),
        Scale::RieszPotential => check_cor15(problem),
        Scale::InhomogBesov | Scale::InhomogRiesz => check_sufficient_inhomog(problem),
    }
}

/// Runs a checker by theorem label ("1.2", "1.3", "1.4", "1.5", "4.1", "4.2").
pub fn check_theorem(label: &str, problem: &GNProblem) -> Result<Verdict> {
    match label {
        "1.2" => Ok(check_thm12(problem)),
        "1.3" => Ok(check_thm13(problem)),
        "1.4" => Ok(check_thm14(problem)),
        "1.5" => Ok(check_cor15(problem)),
        "4.1" | "4.2" => Ok(check_sufficient_inhomog(problem)),
        "auto" => Ok(check_by_scale(problem)),
        other => invalid(format!("unknown theorem '{other}'")),
    }
}
