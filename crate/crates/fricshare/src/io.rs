//! JSON interchange formats: spaces with profiles, mechanism specs, Gaussian
//! pools and summary statistics.

use std::fs;
use std::path::Path;

use fricshare_core::gaussian::GaussianPool;
use fricshare_core::mechanisms::{Deviation, MechanismSpec};
use fricshare_core::prob::{EndowmentProfile, FiniteSpace, InfoPartition, Measure};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, CliResult};

/// Probabilities must sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        context: path.display().to_string(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// `{"probs": [...], "agents": [[...], ...], "partition": [[...], ...]}`.
/// A missing partition means trivial information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub probs: Vec<f64>,
    pub agents: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
    /// Aggregate values closer than this are treated as equal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub space: FiniteSpace,
    pub profile: EndowmentProfile,
    pub info: InfoPartition,
}

impl SpaceFile {
    pub fn into_problem(self) -> CliResult<Problem> {
        let m = self.probs.len();
        let mut space = FiniteSpace::normalized(self.probs, NORMALIZATION_TOL)?;
        if let Some(t) = self.tie_tol {
            space = space.with_tie_tol(t);
        }
        let profile = EndowmentProfile::from_rows(self.agents)?;
        if profile.outcomes() != m {
            return Err(fricshare_core::Error::DimensionMismatch {
                expected: m,
                found: profile.outcomes(),
            }
            .into());
        }
        let info = match self.partition {
            Some(blocks) => InfoPartition::new(m, blocks)?,
            None => InfoPartition::trivial(m),
        };
        Ok(Problem { space, profile, info })
    }
}

/// Serialized mechanism, e.g. `{"kind":"left_es","lambda":0.9}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleFile {
    Cmrs {},
    SubjectiveCmrs { measure: Vec<f64> },
    RobustCmrs { measures: Vec<Vec<f64>> },
    LeftEs { lambda: f64 },
    MeanDev {
        #[serde(default)]
        dev: DevName,
        theta: f64,
    },
    Qbrs {},
    Proportional {},
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DevName {
    #[default]
    Std,
    Mad,
}

impl RuleFile {
    pub fn into_spec(self) -> CliResult<MechanismSpec> {
        let spec = match self {
            Self::Cmrs {} => MechanismSpec::Cmrs,
            Self::SubjectiveCmrs { measure } => MechanismSpec::SubjectiveCmrs(Measure::new(measure)?),
            Self::RobustCmrs { measures } => MechanismSpec::RobustCmrs(
                measures
                    .into_iter()
                    .map(Measure::new)
                    .collect::<fricshare_core::Result<_>>()?,
            ),
            Self::LeftEs { lambda } => MechanismSpec::LeftEs { lambda },
            Self::MeanDev { dev, theta } => MechanismSpec::MeanDeviation {
                dev: match dev {
                    DevName::Std => Deviation::CondStdDev,
                    DevName::Mad => Deviation::CondMeanAbsDev,
                },
                theta,
            },
            Self::Qbrs {} => MechanismSpec::Qbrs,
            Self::Proportional {} => MechanismSpec::Proportional,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn shorthand_param(name: &str, arg: Option<&str>) -> CliResult<f64> {
    let arg = arg.ok_or_else(|| CliError::Invalid(format!("rule `{name}` needs a parameter, e.g. `{name}:0.9`")))?;
    arg.trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("rule `{name}`: `{arg}` is not a number")))
}

/// Parses a rule given either as inline JSON or as `name[:param]`
/// shorthand: `cmrs`, `qbrs`, `proportional`, `left_es:0.9`,
/// `mean_dev:0.5` (std) or `mean_dev:mad:0.5`.
pub fn parse_rule(text: &str) -> CliResult<MechanismSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        let file: RuleFile = serde_json::from_str(text).map_err(|source| CliError::Json {
            context: format!("rule `{text}`"),
            source,
        })?;
        return file.into_spec();
    }
    let mut parts = text.splitn(2, ':');
    let name = parts.next().unwrap_or_default().to_ascii_lowercase().replace('-', "_");
    let arg = parts.next();
    let file = match (name.as_str(), arg) {
        ("cmrs", None) => RuleFile::Cmrs {},
        ("qbrs", None) => RuleFile::Qbrs {},
        ("proportional", None) => RuleFile::Proportional {},
        ("left_es" | "les", _) => RuleFile::LeftEs {
            lambda: shorthand_param("left_es", arg)?,
        },
        ("mean_dev", Some(a)) => match a.split_once(':') {
            Some((d, theta)) => RuleFile::MeanDev {
                dev: match d {
                    "std" => DevName::Std,
                    "mad" => DevName::Mad,
                    other => return Err(CliError::Invalid(format!("unknown deviation `{other}` (std or mad)"))),
                },
                theta: shorthand_param("mean_dev", Some(theta))?,
            },
            None => RuleFile::MeanDev {
                dev: DevName::Std,
                theta: shorthand_param("mean_dev", Some(a))?,
            },
        },
        ("subjective_cmrs" | "robust_cmrs", _) => {
            return Err(CliError::Invalid(format!(
                "rule `{name}` takes measures; give it as JSON, e.g. {{\"kind\":\"{name}\",...}}"
            )))
        }
        _ => return Err(CliError::Invalid(format!("unknown rule `{text}`"))),
    };
    file.into_spec()
}

/// Splits a comma-separated rule list, keeping commas inside JSON objects.
pub fn split_rules(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '{' | '[' => depth += 1,
            '}' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// `{"mu": [...], "sigma": [...], "rho": [[...]]}` or
/// `{"mu": [...], "cov": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolFile {
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
}

impl PoolFile {
    pub fn into_pool(self) -> CliResult<GaussianPool> {
        match (self.sigma, self.rho, self.cov) {
            (Some(sigma), Some(rho), None) => Ok(GaussianPool::from_correlation(self.mu, &sigma, &rho)?),
            (None, None, Some(cov)) => Ok(GaussianPool::new(self.mu, cov)?),
            _ => Err(CliError::Invalid(
                "pool needs either `sigma` and `rho`, or `cov`".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_json_agree() {
        assert_eq!(parse_rule("left_es:0.9").unwrap(), parse_rule(r#"{"kind":"left_es","lambda":0.9}"#).unwrap());
        assert_eq!(parse_rule("CMRS").unwrap(), MechanismSpec::Cmrs);
        assert_eq!(
            parse_rule("mean_dev:mad:0.25").unwrap(),
            MechanismSpec::MeanDeviation {
                dev: Deviation::CondMeanAbsDev,
                theta: 0.25
            }
        );
        assert_eq!(
            parse_rule(r#"{"kind":"mean_dev","theta":1}"#).unwrap(),
            MechanismSpec::MeanDeviation {
                dev: Deviation::CondStdDev,
                theta: 1.0
            }
        );
    }

    #[test]
    fn bad_rules_are_rejected() {
        for bad in ["left_es", "left_es:x", "left_es:1.5", "nope", "cmrs:1", r#"{"kind":"cmrs","x":1}"#, "robust_cmrs"] {
            assert!(parse_rule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rule_lists_keep_json_intact() {
        let parts = split_rules(r#"cmrs, {"kind":"robust_cmrs","measures":[[0.5,0.5],[0.2,0.8]]},left_es:0.9"#);
        assert_eq!(parts.len(), 3);
        assert!(parts[1].ends_with("]]}"));
    }

    #[test]
    fn space_file_rejects_unnormalized_probabilities() {
        let f = SpaceFile {
            probs: vec![0.5, 0.6],
            agents: vec![vec![1.0, 2.0]; 3],
            partition: None,
            tie_tol: None,
        };
        assert!(f.into_problem().is_err());
    }

    #[test]
    fn pool_file_needs_one_parametrization() {
        let f = PoolFile {
            mu: vec![0.0; 2],
            sigma: Some(vec![1.0; 2]),
            rho: None,
            cov: None,
        };
        assert!(f.into_pool().is_err());
    }
}
