//! Verdicts and the reports assembled from them.

use serde::Serialize;

use crate::expr::{EqVerdict, MapWitness};

/// Where and how a check failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl Witness {
    pub fn at(point: Vec<f64>, detail: impl Into<String>) -> Witness {
        Witness {
            point,
            detail: detail.into(),
            lhs: None,
            rhs: None,
            residual: None,
        }
    }
}

impl From<MapWitness> for Witness {
    fn from(w: MapWitness) -> Witness {
        Witness {
            detail: format!("sides differ by {:.3e} (scaled)", w.residual),
            point: w.point,
            lhs: Some(w.lhs),
            rhs: Some(w.rhs),
            residual: Some(w.residual),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    PassExact,
    PassNumeric { max_residual: f64 },
    Fail { witness: Witness },
    Unknown { reason: String },
    Skipped { reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::PassExact | Verdict::PassNumeric { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }

    pub fn fail(point: Vec<f64>, detail: impl Into<String>) -> Verdict {
        Verdict::Fail {
            witness: Witness::at(point, detail),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::PassExact => "pass (exact)",
            Verdict::PassNumeric { .. } => "pass (numeric)",
            Verdict::Fail { .. } => "FAIL",
            Verdict::Unknown { .. } => "unknown",
            Verdict::Skipped { .. } => "skipped",
        }
    }

    /// Combine verdicts of sub-checks: any failure wins, then unknown; all
    /// exact stays exact; skipped parts are ignored unless all are skipped.
    pub fn aggregate<'a>(vs: impl IntoIterator<Item = &'a Verdict>) -> Verdict {
        let mut any = false;
        let mut all_exact = true;
        let mut max_res: f64 = 0.0;
        let mut unknown = None;
        let mut skipped = None;
        for v in vs {
            match v {
                Verdict::Fail { .. } => return v.clone(),
                Verdict::Unknown { .. } => {
                    if unknown.is_none() {
                        unknown = Some(v.clone());
                    }
                }
                Verdict::Skipped { .. } => {
                    if skipped.is_none() {
                        skipped = Some(v.clone());
                    }
                    continue;
                }
                Verdict::PassExact => {}
                Verdict::PassNumeric { max_residual } => {
                    all_exact = false;
                    max_res = max_res.max(*max_residual);
                }
            }
            any = true;
        }
        if let Some(u) = unknown {
            return u;
        }
        if !any {
            return skipped.unwrap_or(Verdict::Skipped {
                reason: "nothing to check".into(),
            });
        }
        if all_exact {
            Verdict::PassExact
        } else {
            Verdict::PassNumeric { max_residual: max_res }
        }
    }
}

impl From<EqVerdict> for Verdict {
    fn from(v: EqVerdict) -> Verdict {
        match v {
            EqVerdict::EqualExact => Verdict::PassExact,
            EqVerdict::Numeric { max_residual, .. } => Verdict::PassNumeric { max_residual },
            EqVerdict::NotEqual(w) => Verdict::Fail { witness: w.into() },
            EqVerdict::Unknown(reason) => Verdict::Unknown { reason },
        }
    }
}

/// One named law or property with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl Check {
    pub fn new(id: impl Into<String>, description: impl Into<String>, verdict: Verdict) -> Check {
        Check {
            id: id.into(),
            description: description.into(),
            verdict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregation_order() {
        let e = Verdict::PassExact;
        let n = Verdict::PassNumeric { max_residual: 1e-12 };
        let f = Verdict::fail(vec![0.0], "x");
        let s = Verdict::Skipped { reason: "r".into() };
        assert_eq!(Verdict::aggregate([&e, &e]), Verdict::PassExact);
        assert_eq!(Verdict::aggregate([&e, &n, &s]), n);
        assert!(Verdict::aggregate([&n, &f, &e]).is_fail());
        assert!(matches!(Verdict::aggregate([&s]), Verdict::Skipped { .. }));
    }
}
