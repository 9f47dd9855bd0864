//! Built-in regression instances: classical inequalities that must be
//! accepted, each paired with a mutation that breaks exactly one condition.

use super::{check_theorem, parse_rational, GNProblem, Scale, SpaceTriple, Verdict};

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: &'static str,
    /// Checker label understood by [`check_theorem`].
    pub theorem: &'static str,
    pub problem: GNProblem,
    pub mutation: GNProblem,
    /// The single condition id the mutation must violate.
    pub mutation_breaks: &'static str,
}

impl Instance {
    pub fn verdict(&self) -> Verdict {
        check_theorem(self.theorem, &self.problem).expect("built-in labels are valid")
    }

    pub fn mutation_verdict(&self) -> Verdict {
        check_theorem(self.theorem, &self.mutation).expect("built-in labels are valid")
    }
}

fn t(s: &str, p: &str, q: &str) -> SpaceTriple {
    SpaceTriple::parse(s, p, q).expect("built-in triple")
}

fn pb(n: u32, theta: &str, scale: Scale, target: SpaceTriple, s0: SpaceTriple, s1: SpaceTriple) -> GNProblem {
    GNProblem::new(n, parse_rational(theta).expect("built-in theta"), target, s0, s1, scale)
        .expect("built-in problem")
}

fn with_target(p: &GNProblem, target: SpaceTriple) -> GNProblem {
    GNProblem { target, ..p.clone() }
}

pub fn regression_instances() -> Vec<Instance> {
    use Scale::*;
    let mut out = Vec::new();
    let mut push = |name, theorem, problem: GNProblem, mutation: GNProblem, breaks| {
        out.push(Instance {
            name,
            theorem,
            problem,
            mutation,
            mutation_breaks: breaks,
        })
    };

    let p = pb(3, "1/3", HomogBesov, t("0", "10", "10"), t("-1/2", "inf", "inf"), t("1", "10/3", "10/3"));
    push("L10 bound in R3", "1.2", p.clone(), with_target(&p, t("0", "10", "2")), "1.10");

    let p = pb(3, "1/2", HomogBesov, t("0", "4", "inf"), t("-1", "inf", "inf"), t("1", "2", "inf"));
    push("L4 Besov bound, q = inf", "1.2", p.clone(), with_target(&p, t("0", "4", "2")), "1.10");

    let p = pb(3, "1/2", HomogBesov, t("1", "4", "inf"), t("0", "inf", "inf"), t("2", "2", "inf"));
    push("gradient L4 bound", "1.2", p.clone(), with_target(&p, t("1", "4", "2")), "1.10");

    let p = pb(3, "1/3", HomogBesov, t("0", "6", "6"), t("-1/2", "inf", "inf"), t("1", "2", "2"));
    push("L6 bound with theta = p/q", "1.2", p.clone(), with_target(&p, t("0", "6", "3")), "1.10");

    let p = pb(3, "1/3", HomogBesov, t("1", "6", "inf"), t("0", "inf", "inf"), t("3", "2", "inf"));
    push("higher derivative L6 bound", "1.2", p.clone(), with_target(&p, t("1", "6", "2")), "1.10");

    let p = pb(3, "3/5", HomogBesov, t("0", "10/3", "10/3"), t("-3/2", "inf", "inf"), t("1", "2", "2"));
    push("L10/3 velocity interpolation", "1.2", p.clone(), with_target(&p, t("0", "10/3", "2")), "1.10");

    let p = pb(3, "1/2", HomogBesov, t("0", "12/5", "1"), t("0", "2", "inf"), t("1/2", "2", "inf"));
    push("Hardy-Littlewood-Sobolev type bound", "1.3", p.clone(), with_target(&p, t("1/2", "12/7", "1")), "1.16");

    let p = pb(3, "1/2", HomogBesov, t("0", "4", "1"), t("0", "2", "inf"), t("3/2", "2", "inf"));
    let m = GNProblem {
        target: t("0", "2", "1"),
        source1: t("3/2", "1", "inf"),
        ..p.clone()
    };
    push("L4 from L2 and B^{3/2}_{2,inf}", "1.3", p, m, "1.15");

    let p = pb(3, "1/2", HomogTriebel, t("0", "8/3", "2"), t("1", "2", "inf"), t("-1", "4", "inf"));
    let m = GNProblem {
        source0: t("0", "2", "inf"),
        source1: t("0", "4", "inf"),
        ..p.clone()
    };
    push("Triebel bound with negative smoothness source", "1.4", p, m, "1.21");

    let p = pb(3, "1/2", HomogBesov, t("0", "4", "4"), t("-1", "inf", "inf"), t("1", "2", "2"));
    push("L4 from B^{-1}_{inf,inf} and H^1", "1.2", p.clone(), with_target(&p, t("0", "4", "2")), "1.10");

    let p = pb(3, "1/4", RieszPotential, t("0", "12/5", "2"), t("0", "2", "2"), t("1", "2", "2"));
    push("Hartree interaction bound", "1.5", p.clone(), with_target(&p, t("1/2", "12/7", "2")), "1.23");

    let p = pb(3, "2/3", RieszPotential, t("0", "18/5", "2"), t("0", "2", "2"), t("1", "2", "2"));
    push("power nonlinearity bound", "1.5", p.clone(), with_target(&p, t("1", "18/11", "2")), "1.23");

    let p = pb(2, "1/2", RieszPotential, t("0", "4", "2"), t("0", "2", "2"), t("1", "2", "2"));
    push("classical GN, n=2, L4", "1.5", p.clone(), with_target(&p, t("1", "4/3", "2")), "1.23");

    let p = pb(3, "1/2", RieszPotential, t("1", "2", "2"), t("0", "2", "2"), t("2", "2", "2"));
    let m = GNProblem {
        theta: parse_rational("1/4").expect("literal"),
        ..p.clone()
    };
    push("classical GN, n=3, gradient", "1.5", p, m, "1.23");

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param_checker::Status;
    use num_traits::Zero;

    #[test]
    fn all_instances_hold_and_mutations_fail_once() {
        let list = regression_instances();
        assert!(list.len() >= 12);
        for inst in &list {
            let v = inst.verdict();
            assert_eq!(v.status, Status::Holds, "{}: {:?}", inst.name, v);
            assert!(v.residual.is_zero());
            let m = inst.mutation_verdict();
            assert_eq!(m.status, Status::Fails, "{}", inst.name);
            assert_eq!(m.violated, vec![inst.mutation_breaks.to_string()], "{}", inst.name);
        }
    }
}
