//! Canonical JSON problem documents.

use serde::{Deserialize, Serialize};

use super::{
    ChanceProgram, IndividualSafety, JointRhsSafety, JointRow, Norm, Polytope, Safety, TrainingSet, WassersteinBall,
};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    objective: Vec<f64>,
    polytope: PolytopeDoc,
    epsilon: f64,
    theta: f64,
    norm: NormDoc,
    samples: Vec<Vec<f64>>,
    safety: SafetyDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeDoc {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    h: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NormDoc {
    Named(String),
    Lp { lp: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SafetyDoc {
    Individual {
        #[serde(rename = "A")]
        a_mat: Vec<Vec<f64>>,
        a: Vec<f64>,
        b: Vec<f64>,
        b0: f64,
    },
    JointRhs {
        rows: Vec<JointRowDoc>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRowDoc {
    a: Vec<f64>,
    b: Vec<f64>,
    b0: f64,
}

impl NormDoc {
    fn into_norm(self) -> Result<Norm> {
        match self {
            NormDoc::Named(s) => match s.as_str() {
                "l1" => Ok(Norm::L1),
                "l2" => Ok(Norm::L2),
                "linf" => Ok(Norm::Linf),
                other => Err(Error::Norm(format!(
                    "unknown norm \"{other}\" (expected \"l1\", \"l2\", \"linf\" or {{\"lp\": p}})"
                ))),
            },
            NormDoc::Lp { lp } => Norm::lp(lp),
        }
    }

    fn from_norm(n: Norm) -> Self {
        match n {
            Norm::L1 => NormDoc::Named("l1".into()),
            Norm::L2 => NormDoc::Named("l2".into()),
            Norm::Linf => NormDoc::Named("linf".into()),
            Norm::Lp(p) => NormDoc::Lp { lp: p },
        }
    }
}

/// Parse and fully validate a problem document, including the boundedness
/// of the feasible polytope.
pub fn parse_problem(text: &str) -> Result<ChanceProgram> {
    let doc: ProblemDoc = serde_json::from_str(text)?;
    let l = doc.objective.len();
    if l == 0 {
        return Err(Error::Dimension("objective must have length L >= 1".into()));
    }
    let feasible = Polytope::new(doc.polytope.g, doc.polytope.h, l)?;
    let samples = TrainingSet::new(doc.samples)?;
    let ball = WassersteinBall::new(doc.theta, doc.norm.into_norm()?, samples)?;
    let safety = match doc.safety {
        SafetyDoc::Individual { a_mat, a, b, b0 } => Safety::Individual(IndividualSafety { a_mat, a, b, b0 }),
        SafetyDoc::JointRhs { rows } => Safety::JointRhs(JointRhsSafety::new(
            rows.into_iter().map(|r| JointRow { a: r.a, b: r.b, b0: r.b0 }).collect(),
        )?),
    };
    let cp = ChanceProgram::new(doc.objective, feasible, safety, doc.epsilon, ball)?;
    cp.feasible.validate_bounded()?;
    Ok(cp)
}

/// Serialize to the canonical document; floats use shortest round-trip text.
pub fn to_json(cp: &ChanceProgram) -> String {
    let doc = ProblemDoc {
        objective: cp.objective.clone(),
        polytope: PolytopeDoc { g: cp.feasible.g.clone(), h: cp.feasible.h.clone() },
        epsilon: cp.epsilon,
        theta: cp.ball.radius,
        norm: NormDoc::from_norm(cp.ball.norm),
        samples: cp.ball.center.samples().to_vec(),
        safety: match &cp.safety {
            Safety::Individual(s) => {
                SafetyDoc::Individual { a_mat: s.a_mat.clone(), a: s.a.clone(), b: s.b.clone(), b0: s.b0 }
            }
            Safety::JointRhs(j) => SafetyDoc::JointRhs {
                rows: j.rows.iter().map(|r| JointRowDoc { a: r.a.clone(), b: r.b.clone(), b0: r.b0 }).collect(),
            },
        },
    };
    serde_json::to_string_pretty(&doc).expect("problem documents always serialize")
}
