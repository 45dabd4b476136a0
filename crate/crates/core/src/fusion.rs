//! Decision-level and hybrid fusion of per-method distance vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recognition::{DistanceSource, DistanceVector, Method};

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    WeightedSum,
    Product,
}

impl FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "weighted_sum" | "sum" => Ok(FusionMode::WeightedSum),
            "product" => Ok(FusionMode::Product),
            other => Err(Error::Config(format!(
                "unknown fusion mode {other:?} (valid: weighted_sum, product)"
            ))),
        }
    }
}

/// How to combine two or three method outputs into one distance vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFusionSpec", into = "RawFusionSpec")]
pub struct FusionSpec {
    mode: FusionMode,
    inputs: Vec<Method>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFusionSpec {
    mode: FusionMode,
    inputs: Vec<Method>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    weights: Vec<f64>,
}

impl TryFrom<RawFusionSpec> for FusionSpec {
    type Error = Error;

    fn try_from(raw: RawFusionSpec) -> Result<Self> {
        match raw.mode {
            FusionMode::WeightedSum => FusionSpec::weighted_sum(raw.inputs, raw.weights),
            FusionMode::Product if raw.weights.is_empty() => FusionSpec::product(raw.inputs),
            FusionMode::Product => Err(Error::Config("product fusion takes no weights".into())),
        }
    }
}

impl From<FusionSpec> for RawFusionSpec {
    fn from(s: FusionSpec) -> Self {
        RawFusionSpec {
            mode: s.mode,
            inputs: s.inputs,
            weights: s.weights,
        }
    }
}

fn check_inputs(inputs: &[Method]) -> Result<()> {
    if inputs.len() < 2 {
        return Err(Error::Config("fusion needs at least two inputs".into()));
    }
    for (i, m) in inputs.iter().enumerate() {
        if inputs[..i].contains(m) {
            return Err(Error::Config(format!("fusion input {m} listed twice")));
        }
    }
    Ok(())
}

impl FusionSpec {
    pub fn weighted_sum(inputs: Vec<Method>, weights: Vec<f64>) -> Result<Self> {
        check_inputs(&inputs)?;
        if weights.len() != inputs.len() {
            return Err(Error::Config(format!(
                "{} inputs but {} weights",
                inputs.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Config(format!("weights sum to {sum}, not 1")));
        }
        Ok(FusionSpec {
            mode: FusionMode::WeightedSum,
            inputs,
            weights,
        })
    }

    pub fn product(inputs: Vec<Method>) -> Result<Self> {
        check_inputs(&inputs)?;
        Ok(FusionSpec {
            mode: FusionMode::Product,
            inputs,
            weights: Vec::new(),
        })
    }

    pub fn mode(&self) -> FusionMode {
        self.mode
    }

    pub fn inputs(&self) -> &[Method] {
        &self.inputs
    }

    /// Empty for product fusion.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl fmt::Display for FusionSpec {
    /// `0.7*ICP+0.3*BoW` or `ICP*BoW`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self.mode {
            FusionMode::WeightedSum => self
                .inputs
                .iter()
                .zip(&self.weights)
                .map(|(m, w)| format!("{w}*{m}"))
                .collect(),
            FusionMode::Product => self.inputs.iter().map(|m| m.to_string()).collect(),
        };
        let sep = match self.mode {
            FusionMode::WeightedSum => "+",
            FusionMode::Product => "*",
        };
        f.write_str(&parts.join(sep))
    }
}

impl FromStr for FusionSpec {
    type Err = Error;

    /// `MODE:INPUTS[:WEIGHTS]`, e.g. `weighted_sum:ICP,BoW:0.7,0.3` or `product:ICP,BoW,iCLAP`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let mode: FusionMode = parts
            .next()
            .ok_or_else(|| Error::Config("empty fusion spec".into()))?
            .parse()?;
        let inputs = parts
            .next()
            .ok_or_else(|| Error::Config(format!("fusion spec {s:?} lists no inputs")))?
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Method>>>()?;
        let weights = match parts.next() {
            Some(w) => w
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad weight {v:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        if parts.next().is_some() {
            return Err(Error::Config(format!("too many ':' sections in {s:?}")));
        }
        match mode {
            FusionMode::WeightedSum => FusionSpec::weighted_sum(inputs, weights),
            FusionMode::Product if weights.is_empty() => FusionSpec::product(inputs),
            FusionMode::Product => Err(Error::Config("product fusion takes no weights".into())),
        }
    }
}

/// The four input combinations whose weighted-sum weights are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionFamily {
    #[serde(rename = "ICP+BoW")]
    IcpBow,
    #[serde(rename = "ICP+iCLAP")]
    IcpIclap,
    #[serde(rename = "BoW+iCLAP")]
    BowIclap,
    #[serde(rename = "ICP+BoW+iCLAP")]
    All,
}

impl FusionFamily {
    pub const ALL: [FusionFamily; 4] = [
        FusionFamily::IcpBow,
        FusionFamily::IcpIclap,
        FusionFamily::BowIclap,
        FusionFamily::All,
    ];

    /// Inputs in weight order; the last input takes the remaining weight.
    pub fn inputs(self) -> Vec<Method> {
        match self {
            FusionFamily::IcpBow => vec![Method::Icp, Method::Bow],
            FusionFamily::IcpIclap => vec![Method::Icp, Method::Iclap],
            FusionFamily::BowIclap => vec![Method::Bow, Method::Iclap],
            FusionFamily::All => vec![Method::Icp, Method::Bow, Method::Iclap],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FusionFamily::IcpBow => "ICP+BoW",
            FusionFamily::IcpIclap => "ICP+iCLAP",
            FusionFamily::BowIclap => "BoW+iCLAP",
            FusionFamily::All => "ICP+BoW+iCLAP",
        }
    }

    /// Best weights reported for the physical dataset.
    pub fn reference_weights(self) -> Vec<f64> {
        match self {
            FusionFamily::IcpBow => vec![0.7, 0.3],
            FusionFamily::IcpIclap => vec![0.1, 0.9],
            FusionFamily::BowIclap => vec![0.2, 0.8],
            FusionFamily::All => vec![0.2, 0.2, 0.6],
        }
    }

    pub fn reference_spec(self) -> FusionSpec {
        FusionSpec::weighted_sum(self.inputs(), self.reference_weights()).expect("valid preset")
    }

    pub fn product_spec(self) -> FusionSpec {
        FusionSpec::product(self.inputs()).expect("valid preset")
    }
}

impl fmt::Display for FusionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FusionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut wanted: Vec<Method> = s
            .split(['+', ','])
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        wanted.sort();
        FusionFamily::ALL
            .into_iter()
            .find(|f| {
                let mut inputs = f.inputs();
                inputs.sort();
                inputs == wanted
            })
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown fusion family {s:?} (valid: ICP+BoW, ICP+iCLAP, BoW+iCLAP, ICP+BoW+iCLAP)"
                ))
            })
    }
}

/// Combines per-method vectors looked up through `get`.
pub fn fuse_with<'a>(
    spec: &FusionSpec,
    get: impl Fn(Method) -> Option<&'a DistanceVector>,
) -> Result<DistanceVector> {
    let vectors = spec
        .inputs
        .iter()
        .map(|&m| get(m).ok_or_else(|| Error::Config(format!("no {m} distances supplied for fusion"))))
        .collect::<Result<Vec<_>>>()?;
    let first = vectors[0];
    for v in &vectors[1..] {
        if v.len() != first.len() {
            return Err(Error::dimension(first.len(), v.len()));
        }
        if v.object_ids != first.object_ids {
            return Err(Error::Config("fusion inputs disagree on model ordering".into()));
        }
    }
    let combined: Vec<f64> = (0..first.len())
        .map(|j| match spec.mode {
            FusionMode::WeightedSum => vectors
                .iter()
                .zip(&spec.weights)
                .map(|(v, w)| w * v.distances[j])
                .sum(),
            FusionMode::Product => vectors.iter().map(|v| v.distances[j]).product(),
        })
        .collect();
    DistanceVector::normalized(DistanceSource::Fused, first.object_ids.clone(), combined)
}

/// Weighted sum or product of the input vectors, re-normalized to unit L2 norm.
pub fn fuse(spec: &FusionSpec, vectors: &BTreeMap<Method, DistanceVector>) -> Result<DistanceVector> {
    fuse_with(spec, |m| vectors.get(&m))
}
