use serde::{Deserialize, Serialize};

use super::{parse_rational, GNProblem, Scale, SpaceTriple};
use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleJson {
    pub s: String,
    pub p: String,
    #[serde(default = "inf_string")]
    pub q: String,
}

fn inf_string() -> String {
    "inf".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub n: u32,
    pub theta: String,
    pub scale: String,
    pub target: TripleJson,
    pub source0: TripleJson,
    pub source1: TripleJson,
}

impl TripleJson {
    fn to_triple(&self) -> Result<SpaceTriple> {
        SpaceTriple::parse(&self.s, &self.p, &self.q)
    }

    fn from_triple(t: &SpaceTriple) -> TripleJson {
        TripleJson {
            s: t.s.to_string(),
            p: t.p().to_string(),
            q: t.q().to_string(),
        }
    }
}

impl GNProblem {
    pub fn from_json_str(text: &str) -> Result<GNProblem> {
        let raw: ProblemJson = serde_json::from_str(text)?;
        raw.to_problem()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ProblemJson::from_problem(self)).expect("plain strings serialize")
    }
}

impl ProblemJson {
    pub fn to_problem(&self) -> Result<GNProblem> {
        let theta = parse_rational(&self.theta)?;
        let scale: Scale = self.scale.parse()?;
        GNProblem::new(
            self.n,
            theta,
            self.target.to_triple()?,
            self.source0.to_triple()?,
            self.source1.to_triple()?,
            scale,
        )
    }

    pub fn from_problem(p: &GNProblem) -> ProblemJson {
        ProblemJson {
            n: p.n,
            theta: p.theta.to_string(),
            scale: p.scale.name().to_string(),
            target: TripleJson::from_triple(&p.target),
            source0: TripleJson::from_triple(&p.source0),
            source1: TripleJson::from_triple(&p.source1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n":3,"theta":"1/2","scale":"HomogBesov",
            "target":{"s":"0","p":"12/5","q":"1"},
            "source0":{"s":"0","p":"2","q":"inf"},
            "source1":{"s":"1/2","p":"2","q":"inf"}}"#;
        let p = GNProblem::from_json_str(text).unwrap();
        let back = GNProblem::from_json_str(&p.to_json().to_string()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"n":3,"theta":"1/2","scale":"HomogBesov","extra":1,
            "target":{"s":"0","p":"4","q":"1"},
            "source0":{"s":"0","p":"2","q":"inf"},
            "source1":{"s":"1/2","p":"2","q":"inf"}}"#;
        assert!(GNProblem::from_json_str(text).is_err());
    }

    #[test]
    fn bad_scale_rejected() {
        let text = r#"{"n":3,"theta":"1/2","scale":"Sobolev",
            "target":{"s":"0","p":"4"},
            "source0":{"s":"0","p":"2"},
            "source1":{"s":"1/2","p":"2"}}"#;
        assert!(GNProblem::from_json_str(text).is_err());
    }
}
