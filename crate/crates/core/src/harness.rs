//! Empirical GN ratios, growth fits and the convexity Hölder check.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, GnError, Result};
use crate::norms::{sobolev_norm, NormFamily, NormSpec, ShellDecomposition};
use crate::param_checker::{
    rat_to_f64, regression_instances, Instance, GNProblem, Scale, SpaceTriple, Status, Verdict,
};
use crate::spectral::{Field, Grid};
use crate::testfuncs::{random_band_limited, FamilyKind, LacunaryFamily};

/// Slope bound that counts as "bounded".
pub const BOUNDED_SLOPE: f64 = 0.05;

/// R = target / (source0^{1−θ} · source1^θ).
pub fn gn_ratio(target: f64, source0: f64, source1: f64, theta: f64) -> Result<f64> {
    let denom = source0.powf(1.0 - theta) * source1.powf(theta);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(GnError::Degenerate(format!(
            "denominator {denom} from source norms {source0}, {source1}"
        )));
    }
    Ok(target / denom)
}

fn spec_for(scale: Scale, t: &SpaceTriple) -> NormSpec {
    let family = match scale {
        Scale::HomogBesov => NormFamily::HomogBesov,
        Scale::HomogTriebel => NormFamily::HomogTriebel,
        Scale::RieszPotential => NormFamily::HomogSobolev,
        Scale::InhomogBesov => NormFamily::InhomogBesov,
        Scale::InhomogRiesz => NormFamily::BesselSobolev,
    };
    let spec = NormSpec::from_triple(family, t);
    if scale == Scale::InhomogRiesz {
        spec.with_m2(1.0)
    } else {
        spec
    }
}

/// (target, source0, source1) norms of one field under the problem's scale.
pub fn problem_norms(field: &Field, problem: &GNProblem, shells: Option<(i32, i32)>) -> Result<[f64; 3]> {
    let triples = [&problem.target, &problem.source0, &problem.source1];
    match problem.scale {
        Scale::HomogBesov | Scale::InhomogBesov | Scale::HomogTriebel => {
            let homogeneous = problem.scale != Scale::InhomogBesov;
            let mut dec = ShellDecomposition::new(field, homogeneous, shells)?;
            let mut out = [0.0; 3];
            for (o, t) in out.iter_mut().zip(triples) {
                *o = if problem.scale == Scale::HomogTriebel {
                    if t.p().to_f64().is_infinite() {
                        return invalid("Triebel-Lizorkin norms need p < ∞");
                    }
                    dec.triebel(t.s_f64(), t.p_f64(), t.q_f64())
                } else {
                    dec.besov(t.s_f64(), t.p_f64(), t.q_f64())
                };
            }
            Ok(out)
        }
        Scale::RieszPotential | Scale::InhomogRiesz => {
            let mut out = [0.0; 3];
            for (o, t) in out.iter_mut().zip(triples) {
                *o = sobolev_norm(field, &spec_for(problem.scale, t))?.value;
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub index: i64,
    pub axis: f64,
    pub target_norm: f64,
    pub source0_norm: f64,
    pub source1_norm: f64,
    pub ratio: f64,
}

impl RatioRow {
    pub fn csv_header() -> &'static str {
        "index,target_norm,source0_norm,source1_norm,ratio"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.index, self.target_norm, self.source0_norm, self.source1_norm, self.ratio
        )
    }
}

pub fn ratio_row(field: &Field, problem: &GNProblem, index: i64, axis: f64, shells: Option<(i32, i32)>) -> Result<RatioRow> {
    let [t, a, b] = problem_norms(field, problem, shells)?;
    let ratio = gn_ratio(t, a, b, problem.theta_f64())?;
    Ok(RatioRow { index, axis, target_norm: t, source0_norm: a, source1_norm: b, ratio })
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("slope fit needs at least two matched points");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("slope fit needs distinct abscissae");
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if !slope.is_finite() {
        return Err(GnError::Numerical("non-finite slope".into()));
    }
    Ok(slope)
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioExperiment {
    pub family: LacunaryFamily,
    pub rows: Vec<RatioRow>,
    pub fitted_slope: f64,
    pub predicted_slope: Option<f64>,
    #[serde(skip)]
    pub verdict: Verdict,
}

impl RatioExperiment {
    pub fn bounded(&self) -> bool {
        self.fitted_slope <= BOUNDED_SLOPE
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "fitted_slope": self.fitted_slope,
            "predicted_slope": self.predicted_slope,
            "verdict": self.verdict.to_json(),
            "bounded": self.bounded(),
            "within_10pct": self.predicted_slope.map(|p| (self.fitted_slope - p).abs() <= 0.1 * p.abs()),
        })
    }
}

fn inv(e: &SpaceTriple) -> f64 {
    rat_to_f64(&e.inv_q)
}

/// Slope the family should show for this problem, when one is known.
pub fn predicted_slope(problem: &GNProblem, family: &LacunaryFamily) -> Option<f64> {
    let theta = problem.theta_f64();
    let gap = rat_to_f64(&(problem.target.s.clone() - problem.s_bar()));
    let count_rate = inv(&problem.target) - (1.0 - theta) * inv(&problem.source0) - theta * inv(&problem.source1);
    match family.kind {
        FamilyKind::EpsBumpTrain => Some(gap),
        FamilyKind::ScaledBumpTrain | FamilyKind::SingleAmplitudeTrain if gap == 0.0 => Some(count_rate),
        _ => None,
    }
}

/// Ratios of the family at each index, with the fitted growth slope.
pub fn growth_experiment(
    problem: &GNProblem,
    family: &LacunaryFamily,
    indices: &[i32],
    grid: &Grid,
    shells: Option<(i32, i32)>,
) -> Result<RatioExperiment> {
    if indices.len() < 4 {
        return invalid("growth fits need at least 4 indices");
    }
    if indices.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("indices must be strictly increasing");
    }
    let rows = indices
        .par_iter()
        .map(|&i| {
            let fam = family.with_index(i);
            let field = fam.build(grid)?;
            ratio_row(&field, problem, i as i64, fam.axis_value(), shells)
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.axis).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.log2()).collect();
    let fitted_slope = fit_slope(&x, &y)?;
    Ok(RatioExperiment {
        family: *family,
        rows,
        fitted_slope,
        predicted_slope: predicted_slope(problem, family),
        verdict: crate::param_checker::check_by_scale(problem),
    })
}

/// One-dimensional family probing the condition nearest to failure. The
/// Besov and Lebesgue norms of a tensor f(x₁)g(x′) with g fixed factor
/// through the 1-d norms of f, so the 1-d train tests the n-d inequality.
///
/// s < s̄ uses the equal-shell train when the target shares a source's
/// differential dimension and the ε-bump train otherwise; s = s̄ uses the
/// scaled bumps (λ ≥ 0), ε-bumps (λ < 0) or single amplitudes (p0 = p1).
pub fn matching_family(problem: &GNProblem) -> LacunaryFamily {
    let s = problem.target.s_f64();
    let s_bar = problem.s_bar();
    let sigma_min = [&problem.target, &problem.source0, &problem.source1]
        .iter()
        .map(|t| t.s_f64())
        .fold(f64::INFINITY, f64::min);
    let eps = 1.0 + (-sigma_min).max(0.0);
    if problem.target.s < s_bar {
        let d = problem.target.diff_dim(problem.n);
        let shared = d == problem.source0.diff_dim(problem.n) || d == problem.source1.diff_dim(problem.n);
        let besov_like = matches!(problem.scale, Scale::HomogBesov | Scale::HomogTriebel);
        if shared && besov_like {
            return LacunaryFamily::equal_shell(1, s, problem.target.p_f64(), 0);
        }
        return LacunaryFamily::eps_bump(1, eps, 0);
    }
    if problem.source0.inv_p != problem.source1.inv_p {
        let dp = problem.source0.inv_p.clone() - problem.source1.inv_p.clone();
        let n_lambda = (problem.source1.s.clone() - problem.source0.s.clone()) / dp;
        if !n_lambda.is_negative() {
            return LacunaryFamily::scaled_bump(1, s, problem.target.p_f64(), rat_to_f64(&n_lambda), 0);
        }
        return LacunaryFamily::eps_bump(1, eps, 0);
    }
    LacunaryFamily::single_amplitude(1, s, 0)
}

/// Smallest first shell at which every bump fits its flat zone.
fn fitting_j0(family: &LacunaryFamily, grid: &Grid, top: i32) -> Result<i32> {
    let (k_min, _) = grid.shell_range();
    let mut last = None;
    for j0 in k_min.max(crate::testfuncs::DEFAULT_J0)..=top - 3 {
        let fam = family.with_j0(j0).with_index(j0);
        match fam.build(grid) {
            Ok(_) => return Ok(j0),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| GnError::InvalidGrid("grid too small for four shells".into())))
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub family_points: usize,
    pub family_length: f64,
    pub random_points_3d: usize,
    pub random_points_2d: usize,
    pub random_length: f64,
    pub random_fields: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            family_points: 1 << 14,
            family_length: 4.0 * PI,
            random_points_3d: 64,
            random_points_2d: 256,
            random_length: 4.0 * PI,
            random_fields: 50,
        }
    }
}

pub fn family_experiment(problem: &GNProblem, opts: &SuiteOptions) -> Result<RatioExperiment> {
    let grid = Grid::new(1, opts.family_points, opts.family_length)?;
    let top = grid.k_max();
    let family = matching_family(problem);
    let j0 = fitting_j0(&family, &grid, top)?;
    let family = family.with_j0(j0);
    let indices: Vec<i32> = (j0..=top).collect();
    // per-problem 1-d copy: the norms only see exponents, so n is reset
    let flat = GNProblem { n: 1, ..problem.clone() };
    let mut exp = growth_experiment(&flat, &family, &indices, &grid, None)?;
    exp.verdict = crate::param_checker::check_by_scale(problem);
    Ok(exp)
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomSuite {
    pub rows: Vec<RatioRow>,
    pub fitted_slope: f64,
    pub fields: usize,
}

/// Max ratio over seeds of random fields on 2^{k_lo} ≤ |ξ| ≤ 2^{k_hi},
/// fitted against k_hi.
pub fn random_field_experiment(problem: &GNProblem, opts: &SuiteOptions) -> Result<RandomSuite> {
    let n = problem.n as usize;
    let points = match n {
        1 => opts.family_points,
        2 => opts.random_points_2d,
        3 => opts.random_points_3d,
        _ => return invalid(format!("no random-field grid for n = {n}")),
    };
    let grid = Grid::new(n, points, opts.random_length)?;
    let (k_lo, k_max) = grid.shell_range();
    let his: Vec<i32> = (k_lo..=k_max).collect();
    if his.len() < 4 {
        return invalid("random-field fit needs at least 4 shells");
    }
    let per = opts.random_fields.div_ceil(his.len());
    let mut rows = Vec::new();
    for &hi in &his {
        let ratios = (0..per as u64)
            .into_par_iter()
            .map(|seed| {
                let f = random_band_limited(&grid, k_lo, hi, seed * 1000 + hi as u64)?;
                ratio_row(&f, problem, hi as i64, hi as f64, None)
            })
            .collect::<Result<Vec<_>>>()?;
        let best = ratios
            .into_iter()
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .expect("at least one seed");
        rows.push(best);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.axis).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.log2()).collect();
    Ok(RandomSuite { fitted_slope: fit_slope(&x, &y)?, rows, fields: per * his.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub theorem: String,
    pub verdict: Status,
    pub mutation_verdict: Status,
    pub mutation_violated: Vec<String>,
    pub family: FamilyKind,
    pub family_slope: f64,
    pub random_slope: f64,
}

impl SuiteRow {
    pub fn csv_header() -> &'static str {
        "name,theorem,verdict,mutation_verdict,mutation_violated,family,family_slope,random_slope"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "\"{}\",{},{:?},{:?},{},{:?},{:.16e},{:.16e}",
            self.name,
            self.theorem,
            self.verdict,
            self.mutation_verdict,
            self.mutation_violated.join(";"),
            self.family,
            self.family_slope,
            self.random_slope
        )
    }

    pub fn bounded(&self) -> bool {
        self.family_slope <= BOUNDED_SLOPE && self.random_slope <= BOUNDED_SLOPE
    }
}

pub fn suite_row(inst: &Instance, opts: &SuiteOptions) -> Result<SuiteRow> {
    let verdict = inst.verdict();
    let mutation = inst.mutation_verdict();
    let fam = family_experiment(&inst.problem, opts)?;
    let rnd = random_field_experiment(&inst.problem, opts)?;
    Ok(SuiteRow {
        name: inst.name.to_string(),
        theorem: inst.theorem.to_string(),
        verdict: verdict.status,
        mutation_verdict: mutation.status,
        mutation_violated: mutation.violated,
        family: fam.family.kind,
        family_slope: fam.fitted_slope,
        random_slope: rnd.fitted_slope,
    })
}

pub fn regression_suite(opts: &SuiteOptions) -> Result<Vec<SuiteRow>> {
    regression_instances().iter().map(|inst| suite_row(inst, opts)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub factors: Vec<f64>,
    pub pass: bool,
}

/// Target triple (Σθσ, 1/Σθ/p, 1/Σθ/q) implied by the weights; errors unless
/// the weights are nonnegative and sum to 1.
pub fn convex_target(components: &[(SpaceTriple, BigRational)]) -> Result<SpaceTriple> {
    if components.is_empty() {
        return invalid("need at least one component");
    }
    let total: BigRational = components.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_one() {
        return invalid(format!("weights sum to {total}, not 1"));
    }
    if components.iter().any(|(_, w)| w.is_negative()) {
        return invalid("weights must be nonnegative");
    }
    let mut s = BigRational::zero();
    let mut ip = BigRational::zero();
    let mut iq = BigRational::zero();
    for (t, w) in components {
        s += w * &t.s;
        ip += w * &t.inv_p;
        iq += w * &t.inv_q;
    }
    SpaceTriple::new(s, ip, iq)
}

/// Hölder-type interpolation of Besov norms on a precomputed decomposition.
pub fn convexity_on(
    dec: &mut ShellDecomposition,
    components: &[(SpaceTriple, BigRational)],
    target: Option<&SpaceTriple>,
) -> Result<ConvexityReport> {
    let implied = convex_target(components)?;
    if let Some(t) = target {
        if *t != implied {
            return invalid("target triple does not match the weighted components");
        }
    }
    let lhs = dec.besov(implied.s_f64(), implied.p_f64(), implied.q_f64());
    let mut rhs = 1.0;
    let mut factors = Vec::new();
    for (t, w) in components {
        let v = dec.besov(t.s_f64(), t.p_f64(), t.q_f64());
        factors.push(v);
        rhs *= v.powf(rat_to_f64(w));
    }
    Ok(ConvexityReport { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9), factors })
}

pub fn convexity_check(
    field: &Field,
    components: &[(SpaceTriple, BigRational)],
    target: Option<&SpaceTriple>,
) -> Result<ConvexityReport> {
    let mut dec = ShellDecomposition::new(field, true, None)?;
    convexity_on(&mut dec, components, target)
}
