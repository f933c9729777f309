//! Parameter expressions accepted in configs and on the command line.
//!
//! Exactly these forms are understood: a plain number, `ln(n)`, `n^0.4`,
//! `n*ln(n)` and `(e/(e-1))^-lambda`. Whitespace is ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::harness::figure2_p;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamExpr {
    Literal(f64),
    LnN,
    NPow04,
    NLnN,
    /// `(e/(e-1))^-lambda`, needs a static λ.
    CloneFreeP,
}

impl ParamExpr {
    pub fn resolve(&self, n: usize, lambda: Option<u64>) -> Result<f64> {
        let nf = n as f64;
        Ok(match self {
            ParamExpr::Literal(v) => *v,
            ParamExpr::LnN => nf.ln(),
            ParamExpr::NPow04 => nf.powf(0.4),
            ParamExpr::NLnN => nf * nf.ln(),
            ParamExpr::CloneFreeP => {
                let lambda = lambda.ok_or_else(|| {
                    Error::config("lambda", "`(e/(e-1))^-lambda` needs a static lambda")
                })?;
                figure2_p(lambda)
            }
        })
    }
}

impl FromStr for ParamExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "ln(n)" => Ok(ParamExpr::LnN),
            "n^0.4" => Ok(ParamExpr::NPow04),
            "n*ln(n)" => Ok(ParamExpr::NLnN),
            "(e/(e-1))^-lambda" => Ok(ParamExpr::CloneFreeP),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ParamExpr::Literal)
                .ok_or_else(|| Error::arg(format!("unsupported expression {s:?}"))),
        }
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamExpr::Literal(v) => write!(f, "{v}"),
            ParamExpr::LnN => f.write_str("ln(n)"),
            ParamExpr::NPow04 => f.write_str("n^0.4"),
            ParamExpr::NLnN => f.write_str("n*ln(n)"),
            ParamExpr::CloneFreeP => f.write_str("(e/(e-1))^-lambda"),
        }
    }
}

impl Serialize for ParamExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ParamExpr::Literal(v) => serializer.serialize_f64(*v),
            other => serializer.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for ParamExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(ParamExpr::Literal(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
