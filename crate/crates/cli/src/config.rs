//! JSON config files and flag overrides, resolved into an [`ExperimentConfig`].

use std::path::Path;

use clap::ValueEnum;
use disom::formula::ParamExpr;
use disom::{figure2_params, AlgorithmKind, ControllerParams, ExperimentConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Sa,
    Comma,
    Plus,
    Oneplusone,
}

/// Every setting of a single experiment; all optional so that flags and a
/// config file can be layered.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub experiment_id: Option<String>,
    pub algorithm: Option<Algo>,
    pub lambda: Option<u64>,
    pub n: Option<usize>,
    pub p: Option<ParamExpr>,
    pub d: Option<ParamExpr>,
    pub k_star: Option<ParamExpr>,
    #[serde(rename = "F")]
    pub factor: Option<f64>,
    pub s: Option<f64>,
    pub lambda_max: Option<ParamExpr>,
    pub budget: Option<u64>,
    pub replications: Option<u64>,
    pub base_seed: Option<u64>,
    pub parallelism: Option<usize>,
}

impl RunSettings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Values set in `over` win.
    pub fn overlay(self, over: RunSettings) -> Self {
        Self {
            experiment_id: over.experiment_id.or(self.experiment_id),
            algorithm: over.algorithm.or(self.algorithm),
            lambda: over.lambda.or(self.lambda),
            n: over.n.or(self.n),
            p: over.p.or(self.p),
            d: over.d.or(self.d),
            k_star: over.k_star.or(self.k_star),
            factor: over.factor.or(self.factor),
            s: over.s.or(self.s),
            lambda_max: over.lambda_max.or(self.lambda_max),
            budget: over.budget.or(self.budget),
            replications: over.replications.or(self.replications),
            base_seed: over.base_seed.or(self.base_seed),
            parallelism: over.parallelism.or(self.parallelism),
        }
    }

    /// Applies defaults, evaluates formulas and validates the result.
    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let n = self.n.ok_or_else(|| missing("n"))?;
        let p_expr = self.p.ok_or_else(|| missing("p"))?;
        let algo = self.algorithm.unwrap_or(Algo::Sa);
        let static_lambda = match algo {
            Algo::Comma | Algo::Plus => Some(self.lambda.ok_or_else(|| missing("lambda"))?),
            Algo::Sa | Algo::Oneplusone => None,
        };
        if static_lambda == Some(0) {
            return Err(CliError::Usage("invalid lambda: must be >= 1".into()));
        }
        let p_lambda = match (static_lambda, self.lambda) {
            (Some(l), _) | (None, Some(l)) => Some(l),
            (None, None) if n >= 2 => Some(figure2_params(n).map_err(usage)?.0),
            _ => None,
        };
        let p = field("p", p_expr.resolve(n, p_lambda))?;
        let d = field("d", self.d.unwrap_or(ParamExpr::LnN).resolve(n, p_lambda))?;
        let k_star = field("k_star", self.k_star.unwrap_or(ParamExpr::NPow04).resolve(n, p_lambda))?;
        let algorithm = match algo {
            Algo::Sa => {
                let lambda_max = field(
                    "lambda_max",
                    self.lambda_max.unwrap_or(ParamExpr::NLnN).resolve(n, p_lambda),
                )?;
                let params = ControllerParams::new(self.factor.unwrap_or(1.5), self.s.unwrap_or(1.0), lambda_max)
                    .map_err(usage)?;
                AlgorithmKind::SaCommaReset(params)
            }
            Algo::Comma => AlgorithmKind::StaticComma {
                lambda: static_lambda.expect("checked above"),
            },
            Algo::Plus => AlgorithmKind::StaticPlus {
                lambda: static_lambda.expect("checked above"),
            },
            Algo::Oneplusone => AlgorithmKind::OnePlusOne,
        };
        let config = ExperimentConfig {
            experiment_id: self.experiment_id.unwrap_or_else(|| format!("{}_n{n}", algorithm.name())),
            algorithm,
            n,
            p,
            d,
            k_star,
            budget: self.budget.unwrap_or(1_000_000),
            replications: self.replications.unwrap_or(50),
            base_seed: self.base_seed.unwrap_or(1),
            parallelism: self.parallelism.unwrap_or(1),
        };
        config.validate().map_err(usage)?;
        Ok(config)
    }
}

fn missing(name: &str) -> CliError {
    CliError::Usage(format!("missing required field `{name}`"))
}

fn field(name: &str, value: disom::Result<f64>) -> Result<f64, CliError> {
    value.map_err(|e| CliError::Usage(format!("invalid {name}: {e}")))
}

pub fn usage(e: disom::Error) -> CliError {
    CliError::Usage(e.to_string())
}
