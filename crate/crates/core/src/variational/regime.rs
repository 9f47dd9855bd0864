use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::energy::NonlinearityG;
use crate::error::{invalid, Result};

const EQ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "critical_mass")]
pub enum Regime {
    MinimizerExists,
    /// A minimizer exists exactly at the critical mass.
    MinimizerExistsIff(f64),
    /// A minimizer exists for 0 < c < critical mass.
    MinimizerExistsBelow(f64),
    NoMinimizer,
    MinusInfinity,
    /// Finite infimum that is not attained.
    NotAchieved,
    OutOfScope,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub case: String,
    /// 1/(2C*) where the critical exponent applies.
    pub critical_mass: Option<f64>,
    /// Outcome at the requested mass c.
    pub at_mass: Regime,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeQuery {
    pub n: usize,
    pub beta: f64,
    pub s: f64,
    pub m2: f64,
    pub c: f64,
    pub cstar: f64,
    pub g: NonlinearityG,
    pub components: usize,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EQ_TOL * a.abs().max(b.abs()).max(1.0)
}

/// s = (n−β)/2 up to the classification tolerance, where C* enters.
pub fn on_critical_line(n: usize, beta: f64, s: f64) -> bool {
    close(s, (n as f64 - beta) / 2.0)
}

/// Homogeneity degree of G, if it is a pure power.
fn degree(g: &NonlinearityG) -> f64 {
    match g {
        NonlinearityG::ProductPowers(a) => a.iter().sum(),
        NonlinearityG::SumPowers(mu) => *mu,
        NonlinearityG::SumSquares => 2.0,
    }
}

fn report(regime: Regime, case: &str, critical: Option<f64>, at_mass: Regime, note: impl Into<String>) -> RegimeReport {
    RegimeReport { regime, case: case.into(), critical_mass: critical, at_mass, note: note.into() }
}

/// Existence regime of the constrained minimization from exact parameter
/// comparisons. `cstar` only matters on the critical line s = (n−β)/2.
pub fn regime_classify(q: &RegimeQuery) -> Result<RegimeReport> {
    let n = q.n as f64;
    if q.n == 0 {
        return invalid("dimension must be positive");
    }
    if !(q.beta > 0.0 && q.beta < n) {
        return invalid(format!("beta = {} must lie in (0, {n})", q.beta));
    }
    if !(q.s > 0.0) || !(q.m2 >= 0.0) || !(q.c > 0.0) || q.components == 0 {
        return invalid("need s > 0, m2 >= 0, c > 0 and at least one component");
    }
    q.g.validate(q.components)?;
    let s_crit = (n - q.beta) / 2.0;
    let out = |note: &str| report(Regime::OutOfScope, "none", None, Regime::OutOfScope, note);

    if q.s < s_crit && !close(q.s, s_crit) {
        return Ok(report(
            Regime::MinusInfinity,
            "s < (n-beta)/2",
            None,
            Regime::MinusInfinity,
            "kinetic term scales slower than the interaction under concentration",
        ));
    }
    if !close(q.s, s_crit) {
        let a = degree(&q.g);
        let upper = 1.0 + (2.0 * q.s + q.beta) / n;
        let shape_ok = match &q.g {
            NonlinearityG::ProductPowers(al) => al.iter().all(|x| *x >= 1.0),
            _ => q.components == 1,
        };
        if !shape_ok {
            return Ok(out("G violates the growth, vanishing or monotonicity conditions"));
        }
        if a > upper && !close(a, upper) {
            return Ok(report(
                Regime::MinusInfinity,
                "s > (n-beta)/2, supercritical G",
                None,
                Regime::MinusInfinity,
                format!("degree {a} exceeds 1 + (2s+beta)/n = {upper}"),
            ));
        }
        if a < 2.0 || close(a, upper) {
            return Ok(out(&format!("degree {a} outside [2, {upper})")));
        }
        return Ok(report(
            Regime::MinimizerExists,
            "s > (n-beta)/2",
            None,
            Regime::MinimizerExists,
            "radial nonincreasing minimizer with negative energy",
        ));
    }

    if !matches!(q.g, NonlinearityG::SumSquares) && q.g.sum_power() != Some(2.0) {
        return Ok(out("critical exponent is covered only for G = sum of squares"));
    }
    if !(q.cstar > 0.0 && q.cstar.is_finite()) {
        return invalid("critical line needs a positive C* estimate");
    }
    let crit = 1.0 / (2.0 * q.cstar);
    let at_crit = close(q.c, crit);
    let above = q.c > crit && !at_crit;
    let boundary = "boundary, estimate-limited";

    if q.m2 == 0.0 {
        let at = if at_crit {
            Regime::MinimizerExists
        } else if above {
            Regime::MinusInfinity
        } else {
            Regime::NoMinimizer
        };
        let note = if at_crit { boundary } else { "infimum 0 below the critical mass, -inf above" };
        return Ok(report(Regime::MinimizerExistsIff(crit), "s = (n-beta)/2, m2 = 0", Some(crit), at, note));
    }
    let two_beta = 2.0 + q.beta;
    if close(n, two_beta) {
        let at = if at_crit {
            Regime::MinimizerExists
        } else if above {
            Regime::MinusInfinity
        } else {
            Regime::NotAchieved
        };
        let note = if at_crit { boundary } else { "infimum c m^(2s)/2 not attained off the critical mass" };
        return Ok(report(Regime::MinimizerExistsIff(crit), "s = (n-beta)/2, m2 > 0, n = 2+beta", Some(crit), at, note));
    }
    if n > two_beta {
        let at = if above { Regime::MinusInfinity } else { Regime::NotAchieved };
        let note = if at_crit { boundary } else { "infimum c m^(2s)/2 is never attained" };
        return Ok(report(Regime::NotAchieved, "s = (n-beta)/2, m2 > 0, n > 2+beta", Some(crit), at, note));
    }
    let at = if at_crit {
        Regime::NotAchieved
    } else if above {
        Regime::MinusInfinity
    } else {
        Regime::MinimizerExists
    };
    let note = if at_crit { boundary } else { "minimizer with energy in (0, c m^(2s)/2) below the critical mass" };
    Ok(report(Regime::MinimizerExistsBelow(crit), "s = (n-beta)/2, m2 > 0, n < 2+beta", Some(crit), at, note))
}

#[derive(Clone, Debug, Serialize)]
pub struct GConditionsReport {
    pub samples: usize,
    /// Exponent μ used in G(v) ≤ C(|v|² + |v|^μ).
    pub growth_exponent: f64,
    pub growth_constant: f64,
    pub growth_ok: bool,
    pub vanishing_ok: bool,
    /// min over samples of G(t·v) / (t_max G(v)).
    pub monotone_worst: f64,
    pub monotone_ok: bool,
    /// min over samples of the mixed second difference of G ⊗ G.
    pub supermodular_worst: f64,
    pub supermodular_ok: bool,
}

impl GConditionsReport {
    pub fn all_ok(&self) -> bool {
        self.growth_ok && self.vanishing_ok && self.monotone_ok && self.supermodular_ok
    }
}

/// Sampled spot checks of the growth, vanishing, monotonicity and
/// supermodularity conditions on G, with v drawn from (0, 0.1]^L.
pub fn g_conditions_check(g: &NonlinearityG, components: usize, sample_count: usize, seed: u64) -> Result<GConditionsReport> {
    if components == 0 || sample_count == 0 {
        return invalid("need at least one component and one sample");
    }
    g.validate(components)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = degree(g).max(2.0);
    let l = components;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..l).map(|_| 0.1 * (1.0 - rng.random::<f64>())).collect() };
    let mut growth: f64 = 0.0;
    let mut vanishing_ok = true;
    let mut mono: f64 = f64::INFINITY;
    let mut sup: f64 = f64::INFINITY;
    for _ in 0..sample_count {
        let v = draw(&mut rng);
        let r2: f64 = v.iter().map(|x| x * x).sum();
        let gv = g.eval(&v);
        growth = growth.max(gv / (r2 + r2.powf(mu / 2.0)));

        if l > 1 {
            let mut z = v.clone();
            z[rng.random_range(0..l)] = 0.0;
            if g.eval(&z) != 0.0 {
                vanishing_ok = false;
            }
        }

        let t: Vec<f64> = (0..l).map(|_| 1.0 + 3.0 * rng.random::<f64>()).collect();
        let tmax = t.iter().cloned().fold(1.0, f64::max);
        let tv: Vec<f64> = v.iter().zip(&t).map(|(a, b)| a * b).collect();
        if gv > 0.0 {
            mono = mono.min(g.eval(&tv) / (tmax * gv));
        }

        // Mixed difference of F(x, y) = G(x)G(y) in two distinct coordinates.
        let w = draw(&mut rng);
        let mut y: Vec<f64> = v.iter().chain(&w).cloned().collect();
        let i = rng.random_range(0..2 * l);
        let mut j = rng.random_range(0..2 * l - 1);
        if j >= i {
            j += 1;
        }
        let (h, k) = (0.05 * rng.random::<f64>(), 0.05 * rng.random::<f64>());
        let f = |y: &[f64]| g.eval(&y[..l]) * g.eval(&y[l..]);
        let f0 = f(&y);
        y[i] += h;
        let fi = f(&y);
        y[j] += k;
        let fij = f(&y);
        y[i] -= h;
        let fj = f(&y);
        let scale = f0.abs().max(fij.abs()).max(1e-300);
        sup = sup.min((fij + f0 - fi - fj) / scale);
    }
    Ok(GConditionsReport {
        samples: sample_count,
        growth_exponent: mu,
        growth_constant: growth,
        growth_ok: growth.is_finite(),
        vanishing_ok,
        monotone_worst: mono,
        monotone_ok: mono >= 1.0 - 1e-12,
        supermodular_worst: sup,
        supermodular_ok: sup >= -1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(n: usize, beta: f64, s: f64, m2: f64, c: f64) -> RegimeQuery {
        RegimeQuery { n, beta, s, m2, c, cstar: 0.1, g: NonlinearityG::SumSquares, components: 1 }
    }

    #[test]
    fn choquard_exists() {
        let r = regime_classify(&query(3, 2.0, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::MinimizerExists);
    }

    #[test]
    fn critical_massive_cases() {
        let r = regime_classify(&query(3, 1.0, 1.0, 1.0, 5.0)).unwrap();
        assert_eq!(r.regime, Regime::MinimizerExistsIff(5.0));
        assert_eq!(r.at_mass, Regime::MinimizerExists);
        let r = regime_classify(&query(5, 1.0, 2.0, 1.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::NotAchieved);
        let r = regime_classify(&query(3, 2.5, 0.25, 4.0, 1.0)).unwrap();
        assert_eq!(r.regime, Regime::MinimizerExistsBelow(5.0));
        assert_eq!(r.at_mass, Regime::MinimizerExists);
        assert_eq!(regime_classify(&query(3, 2.5, 0.25, 4.0, 6.0)).unwrap().at_mass, Regime::MinusInfinity);
    }

    #[test]
    fn massless_critical_sides() {
        assert_eq!(regime_classify(&query(3, 1.0, 1.0, 0.0, 4.0)).unwrap().at_mass, Regime::NoMinimizer);
        assert_eq!(regime_classify(&query(3, 1.0, 1.0, 0.0, 6.0)).unwrap().at_mass, Regime::MinusInfinity);
        assert_eq!(regime_classify(&query(3, 2.0, 0.25, 0.0, 1.0)).unwrap().regime, Regime::MinusInfinity);
    }

    #[test]
    fn product_degrees() {
        let mut q = query(3, 2.0, 1.0, 0.0, 1.0);
        q.components = 2;
        q.g = NonlinearityG::ProductPowers(vec![1.0, 1.0]);
        assert_eq!(regime_classify(&q).unwrap().regime, Regime::MinimizerExists);
        q.g = NonlinearityG::ProductPowers(vec![2.0, 2.0]);
        assert_eq!(regime_classify(&q).unwrap().regime, Regime::MinusInfinity);
        q.g = NonlinearityG::ProductPowers(vec![0.5, 2.0]);
        assert_eq!(regime_classify(&q).unwrap().regime, Regime::OutOfScope);
    }

    #[test]
    fn g_checks() {
        assert_eq!(NonlinearityG::ProductPowers(vec![1.0, 1.0]).eval(&[2.0, 1.0]), 2.0);
        let r = g_conditions_check(&NonlinearityG::ProductPowers(vec![1.0, 1.5]), 2, 1000, 1).unwrap();
        assert!(r.all_ok(), "{r:?}");
        let r = g_conditions_check(&NonlinearityG::SumSquares, 1, 1000, 1).unwrap();
        assert!(r.all_ok(), "{r:?}");
        let r = g_conditions_check(&NonlinearityG::SumSquares, 2, 1000, 1).unwrap();
        assert!(!r.vanishing_ok && !r.monotone_ok);
        let r = g_conditions_check(&NonlinearityG::ProductPowers(vec![0.5, 1.0]), 2, 1000, 1).unwrap();
        assert!(!r.monotone_ok);
    }
}
