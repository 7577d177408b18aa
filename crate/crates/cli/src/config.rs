//! JSON run configuration: raw document, overrides, validation and defaults.

use std::fmt;

use serde::{Deserialize, Serialize};

use qcmod::GaugeSpec;

pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_HORIZON: u64 = 1_000_000;
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    GaugeCheck,
    CantorExport,
    Rho,
    KUpper,
    Kappa,
    Ampliation,
    Scaling,
    SmallSet,
    SingularDemo,
    ShiftCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::GaugeCheck,
        Experiment::CantorExport,
        Experiment::Rho,
        Experiment::KUpper,
        Experiment::Kappa,
        Experiment::Ampliation,
        Experiment::Scaling,
        Experiment::SmallSet,
        Experiment::SingularDemo,
        Experiment::ShiftCheck,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::GaugeCheck => "gauge-check",
            Experiment::CantorExport => "cantor-export",
            Experiment::Rho => "rho",
            Experiment::KUpper => "k-upper",
            Experiment::Kappa => "kappa",
            Experiment::Ampliation => "ampliation",
            Experiment::Scaling => "scaling",
            Experiment::SmallSet => "small-set",
            Experiment::SingularDemo => "singular-demo",
            Experiment::ShiftCheck => "shift-check",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    /// Experiments that act on a Cantor complex and a weight sequence.
    pub fn uses_model(self) -> bool {
        !matches!(
            self,
            Experiment::GaugeCheck | Experiment::CantorExport | Experiment::Rho
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl Serialize for Experiment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeConfig {
    Power { s: f64 },
    Example37,
    PowerLog { s: f64, beta: f64 },
}

impl GaugeConfig {
    pub fn spec(&self) -> qcmod::Result<GaugeSpec> {
        match *self {
            GaugeConfig::Power { s } => GaugeSpec::power(s),
            GaugeConfig::Example37 => Ok(GaugeSpec::Example37),
            GaugeConfig::PowerLog { s, beta } => GaugeSpec::power_log(s, beta),
        }
    }

    /// `power:1.5`, `example37` or `power_log:1:0.5`.
    pub fn parse_flag(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| format!("bad number {s:?} in --gauge: {e}"))
        };
        match parts.as_slice() {
            ["power", s] => Ok(GaugeConfig::Power { s: num(s)? }),
            ["example37"] => Ok(GaugeConfig::Example37),
            ["power_log", s, b] => Ok(GaugeConfig::PowerLog {
                s: num(s)?,
                beta: num(b)?,
            }),
            _ => Err(format!(
                "unrecognized gauge {text:?}; expected power:S, example37 or power_log:S:BETA"
            )),
        }
    }

    fn index(&self) -> f64 {
        match *self {
            GaugeConfig::Power { s } | GaugeConfig::PowerLog { s, .. } => s,
            GaugeConfig::Example37 => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsConfig {
    Rho {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m_max: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
    Harmonic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        count: Option<usize>,
    },
    Custom {
        values: Vec<f64>,
    },
}

/// Experiment parameters; unset values take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_lengths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_probe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0_search: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

/// The document as written by the user.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub gauge: Option<GaugeConfig>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub levels: Option<[usize; 2]>,
    #[serde(default)]
    pub weights: Option<WeightsConfig>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub gauge: GaugeConfig,
    pub n: usize,
    pub depth: usize,
    pub levels: [usize; 2],
    pub weights: WeightsConfig,
    pub params: Params,
}

/// One validation failure with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ConfigIssue>),
}

/// Parses a JSON document without applying defaults.
pub fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Parses, validates and fills defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_raw(text)?.resolve()
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, path: &str, message: impl Into<String>) {
        if !ok {
            self.push(path, message);
        }
    }
}

impl RawConfig {
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mut issues = Issues(Vec::new());

        let experiment = match self.experiment.as_deref() {
            None => {
                issues.push("experiment", "missing experiment id");
                None
            }
            Some(id) => {
                let found = Experiment::from_id(id);
                if found.is_none() {
                    let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.id()).collect();
                    issues.push(
                        "experiment",
                        format!(
                            "unknown experiment {id:?}; expected one of: {}",
                            known.join(", ")
                        ),
                    );
                }
                found
            }
        };

        let gauge = match self.gauge {
            None => {
                issues.push("gauge", "missing gauge");
                None
            }
            Some(g) => {
                match g {
                    GaugeConfig::Power { s } | GaugeConfig::PowerLog { s, .. } => issues.check(
                        s.is_finite() && s >= 1.0,
                        "gauge.s",
                        format!("s = {s} must be >= 1"),
                    ),
                    GaugeConfig::Example37 => {}
                }
                if let GaugeConfig::PowerLog { beta, .. } = g {
                    issues.check(
                        beta.is_finite() && beta >= 0.0,
                        "gauge.beta",
                        format!("beta = {beta} must be >= 0"),
                    );
                }
                Some(g)
            }
        };

        let n = self
            .n
            .unwrap_or_else(|| gauge.map_or(1, |g| g.index().max(1.0).floor() as usize + 1));
        issues.check(
            (1..=20).contains(&n),
            "n",
            format!("n = {n} must lie in 1..=20"),
        );

        let depth = self.depth.unwrap_or(DEFAULT_DEPTH);
        issues.check(depth >= 2, "depth", format!("depth = {depth} must be >= 2"));

        let levels = self.levels.unwrap_or([1, depth.saturating_sub(1).max(1)]);
        issues.check(
            levels[0] >= 1 && levels[0] <= levels[1] && levels[1] < depth,
            "levels",
            format!("levels {levels:?} must satisfy 1 <= lo <= hi < depth = {depth}"),
        );

        let weights = self.weights.unwrap_or(WeightsConfig::Rho {
            start: None,
            epsilon: None,
            m_max: None,
            horizon: None,
            count: None,
        });
        match &weights {
            WeightsConfig::Rho {
                start,
                epsilon,
                m_max,
                horizon,
                count,
            } => {
                issues.check(
                    start.is_none_or(|s| s >= 1),
                    "weights.start",
                    "start must be >= 1",
                );
                issues.check(
                    epsilon.is_none_or(|e| e > 0.0 && e < 1.0),
                    "weights.epsilon",
                    "epsilon must lie in (0, 1)",
                );
                issues.check(
                    m_max.is_none_or(|m| m >= 1),
                    "weights.m_max",
                    "m_max must be >= 1",
                );
                issues.check(
                    horizon.is_none_or(|h| h >= 1),
                    "weights.horizon",
                    "horizon must be >= 1",
                );
                issues.check(
                    count.is_none_or(|c| c >= 1),
                    "weights.count",
                    "count must be >= 1",
                );
                issues.check(
                    !(start.is_some() && epsilon.is_some()),
                    "weights",
                    "give either start or epsilon, not both",
                );
            }
            WeightsConfig::Harmonic { count } => {
                issues.check(
                    count.is_none_or(|c| c >= 1),
                    "weights.count",
                    "count must be >= 1",
                );
            }
            WeightsConfig::Custom { values } => {
                if let Err(e) = qcmod::WeightSequence::custom(values.clone()) {
                    issues.push("weights.values", e.to_string());
                }
            }
        }

        let mut params = self.params;
        if let Some(exp) = experiment {
            params = fill_params(exp, params, depth, levels, &weights, &mut issues);
        }

        if issues.0.is_empty() {
            Ok(RunConfig {
                experiment: experiment.expect("checked"),
                gauge: gauge.expect("checked"),
                n,
                depth,
                levels,
                weights,
                params,
            })
        } else {
            Err(ConfigError::Invalid(issues.0))
        }
    }
}

fn fill_params(
    exp: Experiment,
    mut p: Params,
    depth: usize,
    levels: [usize; 2],
    weights: &WeightsConfig,
    issues: &mut Issues,
) -> Params {
    let positive_list = |issues: &mut Issues, path: &str, v: &Option<Vec<usize>>, min: usize| {
        if let Some(v) = v {
            issues.check(!v.is_empty(), path, "list must not be empty");
            issues.check(
                v.iter().all(|x| *x >= min),
                path,
                format!("entries must be >= {min}"),
            );
        }
    };
    match exp {
        Experiment::GaugeCheck => {
            p.a_list.get_or_insert_with(|| vec![2.0, 4.0, 8.0]);
            p.x_probe.get_or_insert(1e-10);
            p.t0_search.get_or_insert([1e-6, 0.5]);
            let a = p.a_list.as_ref().unwrap();
            issues.check(!a.is_empty(), "params.a_list", "list must not be empty");
            issues.check(
                a.iter().all(|x| x.is_finite() && *x > 0.0),
                "params.a_list",
                "entries must be finite and > 0",
            );
            let x = p.x_probe.unwrap();
            issues.check(
                x > 0.0 && x < 1.0,
                "params.x_probe",
                "x_probe must lie in (0, 1)",
            );
            let [lo, hi] = p.t0_search.unwrap();
            issues.check(
                lo > 0.0 && lo < hi && hi <= 1.0,
                "params.t0_search",
                "t0_search must satisfy 0 < lo < hi <= 1",
            );
        }
        Experiment::CantorExport => {
            let level = *p.level.get_or_insert(depth.min(3));
            issues.check(level >= 1, "params.level", "level must be >= 1");
        }
        Experiment::Rho => {
            let c = *p.rho_count.get_or_insert(1000);
            issues.check(c >= 1, "params.rho_count", "rho_count must be >= 1");
            issues.check(
                matches!(weights, WeightsConfig::Rho { .. }),
                "weights.kind",
                "the rho experiment needs rho weights",
            );
        }
        Experiment::KUpper => {}
        Experiment::Kappa => {
            p.depths.get_or_insert_with(|| vec![depth]);
            positive_list(issues, "params.depths", &p.depths, 2);
            if let Some(d) = &p.depths {
                issues.check(
                    d.iter().all(|m| *m > levels[1]),
                    "params.depths",
                    format!("every depth must exceed the top level {}", levels[1]),
                );
            }
        }
        Experiment::Ampliation => {
            let level = *p.level.get_or_insert(depth.saturating_sub(2).max(1));
            issues.check(
                level >= 1 && level < depth,
                "params.level",
                format!("level must lie in 1..{depth}"),
            );
            p.m_list.get_or_insert_with(|| vec![1, 2, 4, 8, 16]);
            positive_list(issues, "params.m_list", &p.m_list, 1);
            let eps = match weights {
                WeightsConfig::Rho {
                    epsilon: Some(e), ..
                } => *e,
                _ => DEFAULT_EPSILON,
            };
            let e = *p.epsilon.get_or_insert(eps);
            issues.check(
                e > 0.0 && e < 1.0,
                "params.epsilon",
                "epsilon must lie in (0, 1)",
            );
        }
        Experiment::Scaling => {
            p.word_lengths.get_or_insert_with(|| vec![1, 2]);
            positive_list(issues, "params.word_lengths", &p.word_lengths, 0);
            p.rel_depth.get_or_insert(2);
            let r = *p.refine.get_or_insert(2);
            issues.check(r >= 1, "params.refine", "refine must be >= 1");
        }
        Experiment::SmallSet => {
            p.generations.get_or_insert_with(|| vec![1, 2, 3, 4, 5, 6]);
            p.cell_counts.get_or_insert_with(|| vec![1, 2, 4]);
            positive_list(issues, "params.generations", &p.generations, 1);
            positive_list(issues, "params.cell_counts", &p.cell_counts, 1);
            p.rel_depth.get_or_insert(1);
            let r = *p.refine.get_or_insert(1);
            issues.check(r >= 1, "params.refine", "refine must be >= 1");
        }
        Experiment::SingularDemo => {
            p.generations.get_or_insert_with(|| vec![4]);
            positive_list(issues, "params.generations", &p.generations, 1);
            if let Some(g) = &p.generations {
                issues.check(
                    g.len() == 1,
                    "params.generations",
                    "give a single generation count",
                );
            }
            p.rel_depth.get_or_insert(1);
            let r = *p.refine.get_or_insert(1);
            issues.check(r >= 1, "params.refine", "refine must be >= 1");
        }
        Experiment::ShiftCheck => {
            p.shifts.get_or_insert_with(|| vec![0, 1, 2, 4]);
            positive_list(issues, "params.shifts", &p.shifts, 0);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_power_config() {
        let c =
            parse_config(r#"{"experiment": "k-upper", "gauge": {"family": "power", "s": 1.5}}"#)
                .unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.depth, 6);
        assert_eq!(c.levels, [1, 5]);
        assert!(matches!(c.weights, WeightsConfig::Rho { start: None, .. }));

        let c =
            parse_config(r#"{"experiment": "rho", "gauge": {"family": "power", "s": 2}}"#).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.params.rho_count, Some(1000));
    }

    #[test]
    fn rejects_small_index() {
        let err =
            parse_config(r#"{"experiment": "k-upper", "gauge": {"family": "power", "s": 0.5}}"#)
                .unwrap_err();
        let ConfigError::Invalid(issues) = err else {
            panic!()
        };
        assert_eq!(issues[0].path, "gauge.s");
    }

    #[test]
    fn unknown_experiment_lists_choices() {
        let err = parse_config(r#"{"experiment": "kupper", "gauge": {"family": "example37"}}"#)
            .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("experiment"));
        assert!(text.contains("k-upper") && text.contains("shift-check"));
    }

    #[test]
    fn collects_every_issue() {
        let err = parse_config(
            r#"{"experiment": "ampliation", "gauge": {"family": "power", "s": 0.2},
                "depth": 4, "levels": [0, 5], "params": {"m_list": [], "level": 9}}"#,
        )
        .unwrap_err();
        let ConfigError::Invalid(issues) = err else {
            panic!()
        };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        for p in ["gauge.s", "levels", "params.level", "params.m_list"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(
            parse_config(
                r#"{"experiment": "rho", "gauge": {"family": "power", "s": 1}, "colour": 1}"#
            ),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            parse_config(r#"{"experiment": "rho", "gauge": {"family": "power", "s": 1, "t": 2}}"#),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(
            parse_config(
                r#"{"experiment": "rho", "gauge": {"family": "example37"}, "params": {"lvl": 1}}"#
            ),
            Err(ConfigError::Parse(_))
        ));
        assert!(matches!(parse_config("{"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn weights_validated() {
        let err = parse_config(
            r#"{"experiment": "k-upper", "gauge": {"family": "example37"},
                "weights": {"kind": "custom", "values": [1, 2]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights.values"));
        let ok = parse_config(
            r#"{"experiment": "k-upper", "gauge": {"family": "example37"},
                "weights": {"kind": "custom", "values": [1, 1, 0, 0]}}"#,
        );
        assert!(ok.is_ok());
        let err = parse_config(
            r#"{"experiment": "k-upper", "gauge": {"family": "example37"},
                "weights": {"kind": "rho", "epsilon": 2}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("weights.epsilon"));
    }

    #[test]
    fn gauge_flag() {
        assert_eq!(
            GaugeConfig::parse_flag("power:1.5").unwrap(),
            GaugeConfig::Power { s: 1.5 }
        );
        assert_eq!(
            GaugeConfig::parse_flag("example37").unwrap(),
            GaugeConfig::Example37
        );
        assert_eq!(
            GaugeConfig::parse_flag("power_log:1:0.5").unwrap(),
            GaugeConfig::PowerLog { s: 1.0, beta: 0.5 }
        );
        assert!(GaugeConfig::parse_flag("cubic").is_err());
    }
}
