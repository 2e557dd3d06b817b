//! Random-sampling surveillance: cumulative probability of having found at
//! least one infectious individual, and the day that probability first
//! reaches the required confidence.
//!
//! With prevalence `φ_s` on day `s` and `N_s` people tested that day, the
//! chance of at least one positive by day `t` is
//! `1 - Π_{s<=t} (1 - φ_s)^{N_s}`. Draws are treated as independent.

use alloc::vec::Vec;
use core::fmt;

use crate::integrator::Trajectory;
use crate::params::{ensure, ParamError};

/// Default detection confidence.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Individuals tested per day.
#[derive(Debug, Clone, PartialEq)]
pub enum DailyTests {
    Constant(f64),
    /// One entry per day, starting at day 1.
    PerDay(Vec<f64>),
}

impl DailyTests {
    fn on_day(&self, index: usize) -> Option<f64> {
        match self {
            DailyTests::Constant(n) => Some(*n),
            DailyTests::PerDay(v) => v.get(index).copied(),
        }
    }

    fn validate(&self) -> Result<(), ParamError> {
        match self {
            DailyTests::Constant(n) => ensure(
                *n >= 0.0 && n.is_finite(),
                "daily_tests",
                "daily_tests ≥ 0",
                *n,
            ),
            DailyTests::PerDay(v) => v.iter().try_for_each(|n| {
                ensure(
                    *n >= 0.0 && n.is_finite(),
                    "daily_tests",
                    "daily_tests ≥ 0",
                    *n,
                )
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveillanceParams {
    pub daily_tests: DailyTests,
    /// Required probability of having detected at least one case.
    pub confidence: f64,
}

impl SurveillanceParams {
    pub fn constant(daily_tests: f64) -> Self {
        Self {
            daily_tests: DailyTests::Constant(daily_tests),
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        self.daily_tests.validate()?;
        ensure(
            self.confidence > 0.0 && self.confidence < 1.0,
            "confidence",
            "0 < confidence < 1",
            self.confidence,
        )
    }
}

/// How the emergency declaration is triggered.
#[derive(Debug, Clone, PartialEq)]
pub enum TriggerSpec {
    /// Declare as soon as prevalence I/N reaches `pstar`.
    PrevalenceThreshold { pstar: f64 },
    /// Declare on the day the surveillance effort detects the outbreak.
    SurveillanceEffort(SurveillanceParams),
}

impl TriggerSpec {
    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            TriggerSpec::PrevalenceThreshold { pstar } => ensure(
                *pstar > 0.0 && *pstar < 1.0,
                "pstar",
                "0 < pstar < 1",
                *pstar,
            ),
            TriggerSpec::SurveillanceEffort(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// First day (1-based) at which the confidence is reached.
    pub detection_day: Option<u32>,
    /// Element `k` is the detection probability by the end of day `k + 1`.
    pub cumulative_probability: Vec<f64>,
    pub prevalence_at_detection: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurveillanceError {
    InvalidPrevalence { day: usize, value: f64 },
    MissingTests { day: usize },
    InvalidParams(ParamError),
}

impl fmt::Display for SurveillanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurveillanceError::InvalidPrevalence { day, value } => {
                write!(f, "prevalence {value} on day {day} is outside [0, 1]")
            }
            SurveillanceError::MissingTests { day } => {
                write!(f, "no daily test count given for day {day}")
            }
            SurveillanceError::InvalidParams(e) => {
                write!(f, "invalid surveillance parameters: {e}")
            }
        }
    }
}

impl core::error::Error for SurveillanceError {}

impl From<ParamError> for SurveillanceError {
    fn from(e: ParamError) -> Self {
        SurveillanceError::InvalidParams(e)
    }
}

/// Cumulative detection probability for each day of `prevalence_by_day`,
/// evaluated as `1 - exp(Σ N_s ln(1 - φ_s))`.
pub fn detection_probability(
    prevalence_by_day: &[f64],
    daily_tests: &DailyTests,
) -> Result<Vec<f64>, SurveillanceError> {
    daily_tests.validate()?;
    let mut log_miss = 0.0f64;
    let mut out = Vec::with_capacity(prevalence_by_day.len());
    for (k, &phi) in prevalence_by_day.iter().enumerate() {
        let day = k + 1;
        if !(0.0..=1.0).contains(&phi) {
            return Err(SurveillanceError::InvalidPrevalence { day, value: phi });
        }
        let tests = daily_tests
            .on_day(k)
            .ok_or(SurveillanceError::MissingTests { day })?;
        // 0 * ln(0) would poison the sum with NaN
        if tests > 0.0 && phi > 0.0 {
            log_miss += tests * libm::log1p(-phi);
        }
        out.push(-libm::expm1(log_miss));
    }
    Ok(out)
}

pub fn detection_time(
    prevalence_by_day: &[f64],
    params: &SurveillanceParams,
) -> Result<DetectionResult, SurveillanceError> {
    params.validate()?;
    let cumulative = detection_probability(prevalence_by_day, &params.daily_tests)?;
    let hit = cumulative.iter().position(|&p| p >= params.confidence);
    Ok(DetectionResult {
        detection_day: hit.map(|k| (k + 1) as u32),
        prevalence_at_detection: hit.map(|k| prevalence_by_day[k]),
        cumulative_probability: cumulative,
    })
}

/// Prevalence I/N of a naive-phase trajectory at integer days 1, 2, ...
/// (days since the outbreak started at t = 0) up to the trajectory's end.
/// Interpolation round-off below zero is clamped.
pub fn daily_prevalence(naive: &Trajectory<3>) -> Vec<f64> {
    if naive.is_empty() {
        return Vec::new();
    }
    let n = naive.population();
    let first = libm::floor(naive.start_time()) as i64 + 1;
    let last = libm::floor(naive.end_time()) as i64;
    (first.max(1)..=last)
        .filter_map(|day| naive.interpolate(day as f64))
        .map(|y| (y[1] / n).clamp(0.0, 1.0))
        .collect()
}

/// Prevalence threshold induced by a surveillance effort on a naive-phase
/// trajectory: the prevalence on the detection day, or `None` if the
/// outbreak is never detected within the trajectory.
pub fn effort_to_threshold(
    naive: &Trajectory<3>,
    params: &SurveillanceParams,
) -> Result<Option<f64>, SurveillanceError> {
    let prevalence = daily_prevalence(naive);
    Ok(detection_time(&prevalence, params)?.prevalence_at_detection)
}
