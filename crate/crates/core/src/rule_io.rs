//! JSON and CSV formats for rules, construction traces and point sets.

use serde::{Deserialize, Serialize};

use crate::cbc::CbcTrace;
use crate::digitspace::{PointSet, Rule};
use crate::error::{invalid, Error, Result};
use crate::gfpoly::{GFPoly, Modulus, PrimeBase};
use crate::kernel::SpaceParams;

/// On-disk rule: polynomials as ascending coefficient arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleFile {
    pub b: u32,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub p: Vec<u32>,
    pub q: Vec<Vec<u32>>,
    pub alpha: u32,
    pub gamma: Vec<f64>,
    #[serde(rename = "D")]
    pub d: f64,
}

impl RuleFile {
    pub fn new(rule: &Rule, params: &SpaceParams) -> Self {
        RuleFile {
            b: rule.base().get(),
            m: rule.m(),
            n: rule.n(),
            s: rule.s(),
            p: rule.modulus().poly().coeffs().to_vec(),
            q: rule.q().iter().map(|q| q.coeffs().to_vec()).collect(),
            alpha: params.alpha,
            gamma: params.gamma.clone(),
            d: params.d,
        }
    }

    /// Validates the file and rebuilds the rule and space parameters.
    pub fn to_rule(&self) -> Result<(Rule, SpaceParams)> {
        let base = PrimeBase::new(self.b)?;
        let modulus = Modulus::new(GFPoly::new(base, self.p.clone())?)?;
        if modulus.degree() != self.n {
            return invalid(format!(
                "n = {} but p has degree {}",
                self.n,
                modulus.degree()
            ));
        }
        if self.q.len() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                got: self.q.len(),
            });
        }
        let q = self
            .q
            .iter()
            .map(|c| GFPoly::new(base, c.clone()))
            .collect::<Result<Vec<_>>>()?;
        let rule = Rule::new(modulus, self.m, q)?;
        let params = SpaceParams::new(self.alpha, self.gamma.clone(), self.d)?;
        if params.s() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                got: params.s(),
            });
        }
        Ok((rule, params))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("malformed rule JSON: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub selected: Vec<u64>,
    #[serde(rename = "B")]
    pub criterion: Vec<f64>,
    pub bound_lambda1: f64,
}

impl From<&CbcTrace> for TraceFile {
    fn from(t: &CbcTrace) -> Self {
        TraceFile {
            selected: t.selected.clone(),
            criterion: t.criterion.clone(),
            bound_lambda1: t.bound_lambda1,
        }
    }
}

impl TraceFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

/// Shortest decimal string that reads back to the same `f64` (at most 17
/// significant digits, never in exponent form).
pub fn format_decimal(x: f64) -> String {
    format!("{x}")
}

/// Points as CSV with header `x1,...,xs`, one row per point in index order.
pub fn points_csv(points: &PointSet, exact: bool) -> String {
    let mut out = (1..=points.dim)
        .map(|j| format!("x{j}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    let rows: Vec<String> = if exact {
        points
            .project_exact()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| format!("{}/{}", r.numer(), r.denom()))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    } else {
        points
            .project_f64()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| format_decimal(x))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}
