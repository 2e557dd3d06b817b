//! Flat `key = value` scenario documents.
//!
//! ```text
//! # threshold-triggered run
//! disease.beta = 0.3
//! disease.gamma = 0.1
//! trigger.kind = prevalence_threshold
//! trigger.pstar = 0.025
//! sweep.axis1.target = epsilon
//! sweep.axis1.min = 0
//! sweep.axis1.max = 1
//! sweep.axis1.points = 21
//! ```
//!
//! `#` starts a comment. Unknown or repeated keys are rejected; missing keys
//! take the defaults listed in [`KEYS`], and every default used is reported
//! by [`ConfigDocument::metadata`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use epitrigger_core::{
    DailyTests, Method, ParamAxis, ParamError, RelapseParams, ScenarioConfig, SurveillanceParams,
    SweepError, SweepPlan, SweepTarget, TriggerSpec,
};
use thiserror::Error;

/// Every recognized key, in the order they are written out.
pub const KEYS: &[&str] = &[
    "population.n",
    "population.i0",
    "disease.beta",
    "disease.gamma",
    "info.beta_i",
    "info.gamma_i",
    "info.epsilon",
    "intervention.phi",
    "relapse.rho",
    "trigger.kind",
    "trigger.pstar",
    "trigger.daily_tests",
    "trigger.confidence",
    "run.t_max",
    "run.dt",
    "run.method",
    "run.stride",
    "run.event_tolerance",
    "run.extinction_threshold",
    "sweep.axis1.target",
    "sweep.axis1.min",
    "sweep.axis1.max",
    "sweep.axis1.points",
    "sweep.axis2.target",
    "sweep.axis2.min",
    "sweep.axis2.max",
    "sweep.axis2.points",
];

const PREVALENCE_KIND: &str = "prevalence_threshold";
const EFFORT_KIND: &str = "surveillance_effort";
const DEFAULT_DAILY_TESTS: f64 = 100.0;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` already set on line {first}")]
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("{}: {key} = {value} violates constraint \"{constraint}\"", anchor(*.line))]
    Invariant {
        line: Option<usize>,
        key: String,
        value: f64,
        constraint: &'static str,
    },
    #[error("line {line}: `{key}` requires trigger.kind = {kind}")]
    WrongTriggerKind {
        line: usize,
        key: String,
        kind: &'static str,
    },
    #[error("{}: sweep axis {axis} is missing `{key}`", anchor(*.line))]
    IncompleteAxis {
        line: Option<usize>,
        axis: usize,
        key: &'static str,
    },
    #[error("{}: {source}", anchor(*.line))]
    Sweep {
        line: Option<usize>,
        source: SweepError,
    },
}

fn anchor(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}"),
        None => "default".to_string(),
    }
}

/// A parsed document: the base scenario plus an optional sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub scenario: ScenarioConfig,
    pub axes: Vec<ParamAxis>,
    /// Keys that were not in the document and took their default.
    pub defaulted: Vec<&'static str>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<&'static str, Entry>);

impl Entries {
    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).map(|e| e.line)
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.0.get(key) else {
            return Ok(None);
        };
        e.value
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .map(Some)
            .ok_or_else(|| ConfigError::TypeMismatch {
                line: e.line,
                key: key.to_string(),
                expected: "a number",
                value: e.value.clone(),
            })
    }

    fn count(&self, key: &'static str) -> Result<Option<usize>, ConfigError> {
        let Some(e) = self.0.get(key) else {
            return Ok(None);
        };
        e.value
            .parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError::TypeMismatch {
                line: e.line,
                key: key.to_string(),
                expected: "a non-negative integer",
                value: e.value.clone(),
            })
    }

    fn word(&self, key: &'static str) -> Option<(&str, usize)> {
        self.0.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn mismatch(&self, key: &'static str, expected: &'static str) -> ConfigError {
        let e = &self.0[key];
        ConfigError::TypeMismatch {
            line: e.line,
            key: key.to_string(),
            expected,
            value: e.value.clone(),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        }
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if let Some(prev) = map.get(known) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first: prev.line,
            });
        }
        map.insert(
            known,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(Entries(map))
}

/// Config key that holds the scalar a [`ParamError`] complains about.
fn key_for(param: &str) -> &'static str {
    match param {
        "n" => "population.n",
        "i0" => "population.i0",
        "beta" => "disease.beta",
        "gamma" => "disease.gamma",
        "beta_i" => "info.beta_i",
        "gamma_i" => "info.gamma_i",
        "epsilon" => "info.epsilon",
        "phi" => "intervention.phi",
        "rho" => "relapse.rho",
        "pstar" => "trigger.pstar",
        "daily_tests" => "trigger.daily_tests",
        "confidence" => "trigger.confidence",
        "t_max" => "run.t_max",
        "dt" => "run.dt",
        "stride" => "run.stride",
        "event_tolerance" => "run.event_tolerance",
        "extinction_threshold" => "run.extinction_threshold",
        _ => "run",
    }
}

fn axis_key(axis: usize, field: &str) -> &'static str {
    KEYS.iter()
        .copied()
        .find(|k| *k == format!("sweep.axis{axis}.{field}"))
        .expect("axis keys are listed")
}

fn parse_daily_tests(entries: &Entries) -> Result<Option<DailyTests>, ConfigError> {
    let Some((raw, _)) = entries.word("trigger.daily_tests") else {
        return Ok(None);
    };
    let values: Result<Vec<f64>, _> = raw
        .trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    match values {
        Ok(v) if v.len() == 1 && !raw.contains(',') && !raw.contains('[') => {
            Ok(Some(DailyTests::Constant(v[0])))
        }
        Ok(v) if !v.is_empty() => Ok(Some(DailyTests::PerDay(v))),
        _ => Err(entries.mismatch(
            "trigger.daily_tests",
            "a number or a comma-separated list of numbers",
        )),
    }
}

fn parse_axis(entries: &Entries, axis: usize) -> Result<Option<ParamAxis>, ConfigError> {
    let fields = ["target", "min", "max", "points"];
    let present: Vec<&str> = fields
        .iter()
        .copied()
        .filter(|f| entries.line(axis_key(axis, f)).is_some())
        .collect();
    if present.is_empty() {
        return Ok(None);
    }
    let first_line = present
        .iter()
        .filter_map(|f| entries.line(axis_key(axis, f)))
        .min();
    for f in fields {
        if !present.contains(&f) {
            return Err(ConfigError::IncompleteAxis {
                line: first_line,
                axis,
                key: axis_key(axis, f),
            });
        }
    }
    let target_key = axis_key(axis, "target");
    let (name, _) = entries.word(target_key).expect("present");
    let target = SweepTarget::from_name(name)
        .ok_or_else(|| entries.mismatch(target_key, "a sweep target"))?;
    let min = entries.number(axis_key(axis, "min"))?.expect("present");
    let max = entries.number(axis_key(axis, "max"))?.expect("present");
    let points = entries.count(axis_key(axis, "points"))?.expect("present");
    ParamAxis::new(target, min, max, points)
        .map(Some)
        .map_err(|source| ConfigError::Sweep {
            line: first_line,
            source,
        })
}

pub fn parse_config(text: &str) -> Result<ConfigDocument, ConfigError> {
    let entries = tokenize(text)?;
    let mut cfg = ScenarioConfig::default();

    macro_rules! set {
        ($key:literal, $field:expr) => {
            if let Some(v) = entries.number($key)? {
                $field = v;
            }
        };
    }
    set!("population.n", cfg.n);
    set!("population.i0", cfg.i0);
    set!("disease.beta", cfg.disease.beta);
    set!("disease.gamma", cfg.disease.gamma);
    set!("info.beta_i", cfg.info.beta_i);
    set!("info.gamma_i", cfg.info.gamma_i);
    set!("info.epsilon", cfg.info.epsilon);
    set!("intervention.phi", cfg.intervention.phi);
    set!("run.t_max", cfg.t_max);
    set!("run.dt", cfg.integrator.dt);
    set!("run.event_tolerance", cfg.integrator.event_tolerance);
    set!("run.extinction_threshold", cfg.extinction_threshold);
    if let Some(rho) = entries.number("relapse.rho")? {
        cfg.relapse = Some(RelapseParams { rho });
    }
    if let Some(stride) = entries.count("run.stride")? {
        cfg.integrator.stride = stride;
    }
    if let Some((m, _)) = entries.word("run.method") {
        cfg.integrator.method =
            Method::from_name(m).ok_or_else(|| entries.mismatch("run.method", "rk4 or euler"))?;
    }

    let kind = match entries.word("trigger.kind") {
        None | Some((PREVALENCE_KIND, _)) => PREVALENCE_KIND,
        Some((EFFORT_KIND, _)) => EFFORT_KIND,
        Some(_) => {
            return Err(entries.mismatch(
                "trigger.kind",
                "prevalence_threshold or surveillance_effort",
            ))
        }
    };
    cfg.trigger = if kind == PREVALENCE_KIND {
        for key in ["trigger.daily_tests", "trigger.confidence"] {
            if let Some(line) = entries.line(key) {
                return Err(ConfigError::WrongTriggerKind {
                    line,
                    key: key.to_string(),
                    kind: EFFORT_KIND,
                });
            }
        }
        let pstar = entries.number("trigger.pstar")?.unwrap_or(0.025);
        TriggerSpec::PrevalenceThreshold { pstar }
    } else {
        if let Some(line) = entries.line("trigger.pstar") {
            return Err(ConfigError::WrongTriggerKind {
                line,
                key: "trigger.pstar".to_string(),
                kind: PREVALENCE_KIND,
            });
        }
        let mut params = SurveillanceParams::constant(DEFAULT_DAILY_TESTS);
        if let Some(tests) = parse_daily_tests(&entries)? {
            params.daily_tests = tests;
        }
        if let Some(c) = entries.number("trigger.confidence")? {
            params.confidence = c;
        }
        TriggerSpec::SurveillanceEffort(params)
    };

    cfg.validate().map_err(|e: ParamError| {
        let key = key_for(e.name);
        ConfigError::Invariant {
            line: entries.line(key),
            key: key.to_string(),
            value: e.value,
            constraint: e.constraint,
        }
    })?;

    let mut axes = Vec::new();
    let axis1 = parse_axis(&entries, 1)?;
    let axis2 = parse_axis(&entries, 2)?;
    match (axis1, axis2) {
        (Some(a), b) => {
            axes.push(a);
            axes.extend(b);
        }
        (None, Some(_)) => {
            return Err(ConfigError::IncompleteAxis {
                line: entries.line("sweep.axis2.target"),
                axis: 1,
                key: "sweep.axis1.target",
            })
        }
        (None, None) => {}
    }
    if !axes.is_empty() {
        SweepPlan::new(cfg.clone(), &axes).map_err(|source| ConfigError::Sweep {
            line: entries
                .line("sweep.axis2.target")
                .or(entries.line("sweep.axis1.target")),
            source,
        })?;
    }

    let defaulted = applicable_keys(&cfg, &axes)
        .into_iter()
        .filter(|k| entries.line(k).is_none())
        .collect();
    Ok(ConfigDocument {
        scenario: cfg,
        axes,
        defaulted,
    })
}

/// Keys that carry a value for this configuration.
fn applicable_keys(cfg: &ScenarioConfig, axes: &[ParamAxis]) -> Vec<&'static str> {
    KEYS.iter()
        .copied()
        .filter(|k| match *k {
            "relapse.rho" => cfg.relapse.is_some(),
            "trigger.pstar" => matches!(cfg.trigger, TriggerSpec::PrevalenceThreshold { .. }),
            "trigger.daily_tests" | "trigger.confidence" => {
                matches!(cfg.trigger, TriggerSpec::SurveillanceEffort(_))
            }
            k if k.starts_with("sweep.axis1.") => !axes.is_empty(),
            k if k.starts_with("sweep.axis2.") => axes.len() > 1,
            _ => true,
        })
        .collect()
}

fn format_tests(tests: &DailyTests) -> String {
    match tests {
        DailyTests::Constant(n) => format!("{n}"),
        DailyTests::PerDay(v) => {
            let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            format!("[{}]", items.join(", "))
        }
    }
}

impl ConfigDocument {
    /// Value of `key` as it would be written in a document.
    pub fn value_of(&self, key: &str) -> Option<String> {
        let c = &self.scenario;
        let axis = |i: usize| self.axes.get(i);
        let v = match key {
            "population.n" => format!("{}", c.n),
            "population.i0" => format!("{}", c.i0),
            "disease.beta" => format!("{}", c.disease.beta),
            "disease.gamma" => format!("{}", c.disease.gamma),
            "info.beta_i" => format!("{}", c.info.beta_i),
            "info.gamma_i" => format!("{}", c.info.gamma_i),
            "info.epsilon" => format!("{}", c.info.epsilon),
            "intervention.phi" => format!("{}", c.intervention.phi),
            "relapse.rho" => format!("{}", c.relapse?.rho),
            "trigger.kind" => match c.trigger {
                TriggerSpec::PrevalenceThreshold { .. } => PREVALENCE_KIND.to_string(),
                TriggerSpec::SurveillanceEffort(_) => EFFORT_KIND.to_string(),
            },
            "trigger.pstar" => match c.trigger {
                TriggerSpec::PrevalenceThreshold { pstar } => format!("{pstar}"),
                _ => return None,
            },
            "trigger.daily_tests" => match &c.trigger {
                TriggerSpec::SurveillanceEffort(p) => format_tests(&p.daily_tests),
                _ => return None,
            },
            "trigger.confidence" => match &c.trigger {
                TriggerSpec::SurveillanceEffort(p) => format!("{}", p.confidence),
                _ => return None,
            },
            "run.t_max" => format!("{}", c.t_max),
            "run.dt" => format!("{}", c.integrator.dt),
            "run.method" => c.integrator.method.name().to_string(),
            "run.stride" => format!("{}", c.integrator.stride),
            "run.event_tolerance" => format!("{}", c.integrator.event_tolerance),
            "run.extinction_threshold" => format!("{}", c.extinction_threshold),
            k => {
                let rest = k.strip_prefix("sweep.axis")?;
                let (idx, field) = rest.split_once('.')?;
                let a = axis(idx.parse::<usize>().ok()?.checked_sub(1)?)?;
                match field {
                    "target" => a.target.name().to_string(),
                    "min" => format!("{}", a.min),
                    "max" => format!("{}", a.max),
                    "points" => format!("{}", a.points),
                    _ => return None,
                }
            }
        };
        Some(v)
    }

    /// The document with every applicable key written out explicitly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in applicable_keys(&self.scenario, &self.axes) {
            if let Some(v) = self.value_of(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    /// `key = value` lines for every applicable key, defaults marked, plus
    /// unit conventions of the sweep axes.
    pub fn metadata(&self) -> Vec<String> {
        let mut lines: Vec<String> = applicable_keys(&self.scenario, &self.axes)
            .into_iter()
            .filter_map(|k| {
                let v = self.value_of(k)?;
                Some(if self.defaulted.contains(&k) {
                    format!("{k} = {v} (default)")
                } else {
                    format!("{k} = {v}")
                })
            })
            .collect();
        if self.scenario.relapse.is_none() {
            lines.push("relapse.model = single_shot (relapse.rho absent)".to_string());
        }
        for (i, a) in self.axes.iter().enumerate() {
            let unit = match a.target {
                SweepTarget::GammaI | SweepTarget::Gamma | SweepTarget::Rho => "rate per day",
                SweepTarget::InfectiousPeriod => "days (gamma = 1/value)",
                SweepTarget::Beta | SweepTarget::BetaI => "rate per day",
                SweepTarget::Epsilon | SweepTarget::Phi | SweepTarget::Pstar => "fraction",
            };
            lines.push(format!("sweep.axis{}.unit = {unit}", i + 1));
        }
        lines
    }
}

impl Default for ConfigDocument {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let doc = parse_config("disease.beta = 0.3\ndisease.gamma = 0.1\n").unwrap();
        assert_eq!(doc.scenario, ScenarioConfig::default());
        assert!(doc.axes.is_empty());
        assert!(doc.defaulted.contains(&"info.beta_i"));
        assert!(!doc.defaulted.contains(&"disease.beta"));
        let meta = doc.metadata();
        assert!(meta.contains(&"info.beta_i = 1.5 (default)".to_string()));
        assert!(meta.contains(&"disease.beta = 0.3".to_string()));
    }

    #[test]
    fn epsilon_above_one_names_constraint_and_line() {
        let err = parse_config("disease.beta = 0.3\ninfo.epsilon = 1.5\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::Invariant {
                line: Some(2),
                key: "info.epsilon".into(),
                value: 1.5,
                constraint: "epsilon ≤ 1"
            }
        );
        assert!(err.to_string().contains("epsilon ≤ 1"));
        assert!(err.to_string().starts_with("line 2:"));
    }

    #[test]
    fn full_document_is_accepted() {
        let text = "\
# emergency declared at 2.5% prevalence
disease.beta = 0.3
disease.gamma = 0.1
info.beta_i = 1.5
info.gamma_i = 0.1
info.epsilon = 0.8
intervention.phi = 0.2
trigger.kind = prevalence_threshold
trigger.pstar = 0.025   # P*
";
        let doc = parse_config(text).unwrap();
        assert_eq!(doc.scenario.info.beta_i, 1.5);
        assert_eq!(
            doc.scenario.trigger,
            TriggerSpec::PrevalenceThreshold { pstar: 0.025 }
        );
    }

    #[test]
    fn rejects_unknown_duplicate_and_mistyped_keys() {
        assert_eq!(
            parse_config("disease.betta = 0.3").unwrap_err(),
            ConfigError::UnknownKey {
                line: 1,
                key: "disease.betta".into()
            }
        );
        assert!(matches!(
            parse_config("disease.beta = 0.3\n\ndisease.beta = 0.4").unwrap_err(),
            ConfigError::DuplicateKey {
                line: 3,
                first: 1,
                ..
            }
        ));
        assert!(matches!(
            parse_config("disease.beta = fast").unwrap_err(),
            ConfigError::TypeMismatch { line: 1, .. }
        ));
        assert!(matches!(
            parse_config("just words").unwrap_err(),
            ConfigError::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse_config("run.stride = 2.5").unwrap_err(),
            ConfigError::TypeMismatch { .. }
        ));
        assert!(matches!(
            parse_config("trigger.kind = magic").unwrap_err(),
            ConfigError::TypeMismatch { .. }
        ));
    }

    #[test]
    fn trigger_keys_must_match_kind() {
        assert!(matches!(
            parse_config("trigger.daily_tests = 10").unwrap_err(),
            ConfigError::WrongTriggerKind { .. }
        ));
        assert!(matches!(
            parse_config("trigger.kind = surveillance_effort\ntrigger.pstar = 0.1").unwrap_err(),
            ConfigError::WrongTriggerKind { line: 2, .. }
        ));
        let doc =
            parse_config("trigger.kind = surveillance_effort\ntrigger.daily_tests = 10, 20, 30")
                .unwrap();
        assert_eq!(
            doc.scenario.trigger,
            TriggerSpec::SurveillanceEffort(SurveillanceParams {
                daily_tests: DailyTests::PerDay(vec![10.0, 20.0, 30.0]),
                confidence: 0.95
            })
        );
    }

    #[test]
    fn sweep_axes() {
        let doc = parse_config(
            "sweep.axis1.target = epsilon\nsweep.axis1.min = 0\nsweep.axis1.max = 1\nsweep.axis1.points = 5\n\
             sweep.axis2.target = pstar\nsweep.axis2.min = 0.01\nsweep.axis2.max = 0.5\nsweep.axis2.points = 3\n",
        )
        .unwrap();
        assert_eq!(doc.axes.len(), 2);
        assert_eq!(doc.axes[1].target, SweepTarget::Pstar);

        let dup = parse_config(
            "sweep.axis1.target = beta\nsweep.axis1.min = 0.1\nsweep.axis1.max = 1\nsweep.axis1.points = 5\n\
             sweep.axis2.target = beta\nsweep.axis2.min = 0.2\nsweep.axis2.max = 0.5\nsweep.axis2.points = 3\n",
        )
        .unwrap_err();
        assert!(dup.to_string().contains("distinct targets"), "{dup}");

        let partial =
            parse_config("sweep.axis1.target = beta\nsweep.axis1.min = 0.1\n").unwrap_err();
        assert!(matches!(
            partial,
            ConfigError::IncompleteAxis { axis: 1, .. }
        ));
    }

    #[test]
    fn emitted_document_parses_back_identically() {
        let text = "relapse.rho = 0.05\ntrigger.kind = surveillance_effort\ntrigger.daily_tests = 250\n\
                    sweep.axis1.target = infectious_period\nsweep.axis1.min = 2\nsweep.axis1.max = 20\nsweep.axis1.points = 40\n";
        let doc = parse_config(text).unwrap();
        let again = parse_config(&doc.to_text()).unwrap();
        assert_eq!(again.scenario, doc.scenario);
        assert_eq!(again.axes, doc.axes);
        assert!(again.defaulted.is_empty());
    }
}
