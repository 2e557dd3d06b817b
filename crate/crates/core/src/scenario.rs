//! Two-phase runs: naive spread until the declaration, a single aware
//! individual seeded at the switch, then the behavioral response dynamics.

use core::fmt;

use crate::integrator::{integrate_until, IntegrationError, IntegratorConfig, Trajectory};
use crate::model::{
    DiseaseParams, InfoParams, InterventionParams, ModelError, NaiveState, NaiveSystem,
    RelapseParams, ResponseState, ResponseSystem,
};
use crate::params::{ensure, ParamError};
use crate::surveillance::{daily_prevalence, detection_time, SurveillanceError, TriggerSpec};

const I_IDX: usize = 1;
const R_IDX: usize = 2;
const RESP_Q: usize = 3;
const RESP_I: usize = 4;
const RESP_R: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Population size (individuals).
    pub n: f64,
    /// Initially infectious individuals.
    pub i0: f64,
    pub disease: DiseaseParams,
    pub info: InfoParams,
    pub intervention: InterventionParams,
    /// `None` runs the single-shot response; `Some` the relapse model.
    pub relapse: Option<RelapseParams>,
    pub trigger: TriggerSpec,
    /// Horizon in days.
    pub t_max: f64,
    /// The disease counts as extinct once I + Q drops below this many individuals.
    pub extinction_threshold: f64,
    pub integrator: IntegratorConfig,
}

impl Default for ScenarioConfig {
    /// Population 1e5 with 10 seeds, R0 = 3 with a 10-day infectious period,
    /// βi = 1.5, γi = 0.1, ε = 0.8, φ = 0.2, single-shot response declared at
    /// 2.5% prevalence, 1000-day horizon.
    fn default() -> Self {
        Self {
            n: 1e5,
            i0: 10.0,
            disease: DiseaseParams {
                beta: 0.3,
                gamma: 0.1,
            },
            info: InfoParams {
                beta_i: 1.5,
                gamma_i: 0.1,
                epsilon: 0.8,
            },
            intervention: InterventionParams { phi: 0.2 },
            relapse: None,
            trigger: TriggerSpec::PrevalenceThreshold { pstar: 0.025 },
            t_max: 1000.0,
            extinction_threshold: 1e-3,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(self.n > 0.0 && self.n.is_finite(), "n", "n > 0", self.n)?;
        ensure(self.i0 > 0.0, "i0", "i0 > 0", self.i0)?;
        ensure(self.i0 < self.n, "i0", "i0 < n", self.i0)?;
        ensure(
            self.t_max > 0.0 && self.t_max.is_finite(),
            "t_max",
            "t_max > 0",
            self.t_max,
        )?;
        ensure(
            self.extinction_threshold >= 0.0,
            "extinction_threshold",
            "extinction_threshold ≥ 0",
            self.extinction_threshold,
        )?;
        self.disease.validate()?;
        self.info.validate()?;
        self.intervention.validate()?;
        if let Some(rel) = &self.relapse {
            rel.validate()?;
        }
        self.trigger.validate()?;
        self.integrator.validate()
    }

    fn naive_system(&self) -> NaiveSystem {
        NaiveSystem {
            disease: self.disease,
            n: self.n,
        }
    }

    fn response_system(&self) -> ResponseSystem {
        ResponseSystem {
            disease: self.disease,
            info: self.info,
            intervention: self.intervention,
            relapse: self.relapse,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    InvalidConfig(ParamError),
    Model(ModelError),
    Integration(IntegrationError),
    Surveillance(SurveillanceError),
    /// Fewer than one susceptible left to seed awareness at the switch.
    CannotSeedAwareness {
        susceptible: f64,
    },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::InvalidConfig(e) => write!(f, "invalid scenario: {e}"),
            ScenarioError::Model(e) => write!(f, "{e}"),
            ScenarioError::Integration(e) => write!(f, "{e}"),
            ScenarioError::Surveillance(e) => write!(f, "{e}"),
            ScenarioError::CannotSeedAwareness { susceptible } => write!(
                f,
                "cannot seed awareness: only {susceptible} susceptible individuals at the switch"
            ),
        }
    }
}

impl core::error::Error for ScenarioError {}

impl ScenarioError {
    /// Whether the failure came from the numerics rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ScenarioError::Integration(
                IntegrationError::NonFinite { .. }
                    | IntegrationError::ConservationViolation { .. }
                    | IntegrationError::Negative { .. }
            ) | ScenarioError::CannotSeedAwareness { .. }
        )
    }
}

impl From<ParamError> for ScenarioError {
    fn from(e: ParamError) -> Self {
        ScenarioError::InvalidConfig(e)
    }
}

impl From<IntegrationError> for ScenarioError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidConfig(p) => ScenarioError::InvalidConfig(p),
            e => ScenarioError::Integration(e),
        }
    }
}

impl From<SurveillanceError> for ScenarioError {
    fn from(e: SurveillanceError) -> Self {
        ScenarioError::Surveillance(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// R at the last sample divided by N.
    pub final_size: f64,
    /// Maximum of I/N over the stored samples of both phases.
    pub peak_prevalence: f64,
    pub peak_time: f64,
    /// Time of the switch to the response phase (days).
    pub detection_time: Option<f64>,
    /// Surveillance detection day, for effort-triggered runs.
    pub detection_day: Option<u32>,
    /// I/N at the switch.
    pub trigger_prevalence: Option<f64>,
    /// Time of the last sample.
    pub end_time: f64,
    /// I + Q was still above the extinction threshold at the horizon.
    pub truncated: bool,
    pub n: f64,
    pub i0: f64,
    pub phase1: Trajectory<3>,
    pub phase2: Option<Trajectory<6>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalSize {
    pub fraction: f64,
    pub truncated: bool,
}

pub fn final_size(result: &SimResult) -> FinalSize {
    FinalSize {
        fraction: result.final_size,
        truncated: result.truncated,
    }
}

/// Response-phase initial state: one susceptible becomes aware, nobody is
/// careless or quarantined yet.
pub fn handoff(naive_end: &NaiveState) -> Result<ResponseState, ScenarioError> {
    if naive_end.s.is_nan() || naive_end.s < 1.0 {
        return Err(ScenarioError::CannotSeedAwareness {
            susceptible: naive_end.s,
        });
    }
    Ok(ResponseState {
        u: naive_end.s - 1.0,
        a: 1.0,
        c: 0.0,
        q: 0.0,
        i: naive_end.i,
        r: naive_end.r,
        n: naive_end.n,
    })
}

/// The naive phase with no trigger: SIR from `n - i0` susceptibles until the
/// disease goes extinct or the horizon is reached.
pub fn naive_phase(cfg: &ScenarioConfig) -> Result<Trajectory<3>, ScenarioError> {
    cfg.validate()?;
    let ext = cfg.extinction_threshold;
    let (traj, _) = integrate_until(
        &cfg.naive_system(),
        [cfg.n - cfg.i0, cfg.i0, 0.0],
        0.0,
        cfg.t_max,
        |_, y: &[f64; 3]| y[I_IDX] < ext,
        &cfg.integrator,
    )?;
    Ok(traj)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimResult, ScenarioError> {
    cfg.validate()?;
    let naive = cfg.naive_system();
    let n = cfg.n;
    let ext = cfg.extinction_threshold;
    let initial = [n - cfg.i0, cfg.i0, 0.0];

    let (phase1, switch, detection_day) = match &cfg.trigger {
        TriggerSpec::PrevalenceThreshold { pstar } => {
            let pstar = *pstar;
            let (traj, _) = integrate_until(
                &naive,
                initial,
                0.0,
                cfg.t_max,
                |_, y: &[f64; 3]| y[I_IDX] / n >= pstar || y[I_IDX] < ext,
                &cfg.integrator,
            )?;
            let end = traj.last_state();
            let switch = (end[I_IDX] / n >= pstar).then(|| traj.end_time());
            (traj, switch, None)
        }
        TriggerSpec::SurveillanceEffort(params) => {
            let full = naive_phase(cfg)?;
            let detection = detection_time(&daily_prevalence(&full), params)?;
            match detection.detection_day {
                Some(day) => {
                    let t = day as f64;
                    let traj = full
                        .truncated_at(&naive, t)
                        .expect("detection day lies inside the sampled trajectory");
                    (traj, Some(t), Some(day))
                }
                None => (full, None, None),
            }
        }
    };

    let phase2 = match switch {
        None => None,
        Some(t_switch) => {
            let end = phase1.last_state();
            let seed = handoff(&NaiveState::from_array(end, n))?;
            let response = cfg.response_system();
            let (traj, _) = integrate_until(
                &response,
                seed.to_array(),
                t_switch,
                cfg.t_max,
                |_, y: &[f64; 6]| y[RESP_I] + y[RESP_Q] < ext,
                &cfg.integrator,
            )?;
            Some(traj)
        }
    };

    let mut peak = (phase1.times()[0], phase1.states()[0][I_IDX]);
    let mut consider = |t: f64, i: f64| {
        if i > peak.1 {
            peak = (t, i);
        }
    };
    for (t, y) in phase1.times().iter().zip(phase1.states()) {
        consider(*t, y[I_IDX]);
    }
    if let Some(p2) = &phase2 {
        for (t, y) in p2.times().iter().zip(p2.states()) {
            consider(*t, y[RESP_I]);
        }
    }

    let (end_time, last_r, active) = match &phase2 {
        Some(p2) => {
            let y = p2.last_state();
            (p2.end_time(), y[RESP_R], y[RESP_I] + y[RESP_Q])
        }
        None => {
            let y = phase1.last_state();
            (phase1.end_time(), y[R_IDX], y[I_IDX])
        }
    };

    Ok(SimResult {
        final_size: (last_r / n).clamp(0.0, 1.0),
        peak_prevalence: peak.1 / n,
        peak_time: peak.0,
        detection_time: switch,
        detection_day,
        trigger_prevalence: switch.map(|_| phase1.last_state()[I_IDX] / n),
        end_time,
        truncated: active >= ext,
        n,
        i0: cfg.i0,
        phase1,
        phase2,
    })
}

/// Final size `r∞` of an SIR epidemic, the root of
/// `s0 · exp(-r0 · (r∞ - r_init)) = 1 - r∞` on `[r_init, 1]`.
///
/// When `r0 · s0 > 1` the search starts past the minimum of the residual so
/// the larger (epidemic) root is returned.
pub fn sir_final_size_oracle(r0: f64, s0: f64, r_init: f64) -> f64 {
    let residual = |r: f64| s0 * libm::exp(-r0 * (r - r_init)) - (1.0 - r);
    let mut lo = r_init;
    if r0 * s0 > 1.0 {
        lo = (r_init + libm::log(r0 * s0) / r0).min(1.0);
    }
    let mut hi = 1.0;
    if residual(lo) >= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surveillance::SurveillanceParams;

    #[test]
    fn handoff_seeds_one_aware() {
        let s = NaiveState {
            s: 99990.0,
            i: 8.0,
            r: 2.0,
            n: 1e5,
        };
        let r = handoff(&s).unwrap();
        assert_eq!(
            r,
            ResponseState {
                u: 99989.0,
                a: 1.0,
                c: 0.0,
                q: 0.0,
                i: 8.0,
                r: 2.0,
                n: 1e5
            }
        );
        assert_eq!(r.total(), s.total());
    }

    #[test]
    fn handoff_needs_one_susceptible() {
        let s = NaiveState {
            s: 0.5,
            i: 10.0,
            r: 99989.5,
            n: 1e5,
        };
        assert_eq!(
            handoff(&s),
            Err(ScenarioError::CannotSeedAwareness { susceptible: 0.5 })
        );
    }

    #[test]
    fn handoff_conserves_exactly_for_fractional_states() {
        for &(s, i, r) in &[
            (12345.678901, 3.25, 86641.071099),
            (1.0000001, 0.5, 99997.4999999),
        ] {
            let st = NaiveState { s, i, r, n: 1e5 };
            assert_eq!(handoff(&st).unwrap().total(), st.total());
        }
    }

    #[test]
    fn oracle_known_values() {
        // 1 - r = exp(-2 r)
        let r = sir_final_size_oracle(2.0, 1.0, 0.0);
        assert!((r - 0.796812).abs() < 1e-6, "{r}");
        assert!((1.0 - r - libm::exp(-2.0 * r)).abs() < 1e-12);
        assert!(sir_final_size_oracle(0.5, 1.0 - 1e-9, 0.0) < 1e-8);
        assert!(sir_final_size_oracle(1.0, 1.0 - 1e-9, 0.0) < 1e-3);
        assert!((sir_final_size_oracle(3.0, 0.0, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_transmission_final_size_is_seed_fraction() {
        let cfg = ScenarioConfig {
            disease: DiseaseParams {
                beta: 0.0,
                gamma: 0.1,
            },
            ..ScenarioConfig::default()
        };
        let res = run_scenario(&cfg).unwrap();
        assert!(res.detection_time.is_none());
        assert!(!res.truncated);
        assert!((res.final_size - 1e-4).abs() < 1e-8 + 1e-3 / 1e5);
        assert_eq!(final_size(&res).fraction, res.final_size);
    }

    #[test]
    fn immediate_trigger_when_threshold_already_exceeded() {
        let cfg = ScenarioConfig {
            trigger: TriggerSpec::PrevalenceThreshold { pstar: 5e-5 },
            ..ScenarioConfig::default()
        };
        let res = run_scenario(&cfg).unwrap();
        assert_eq!(res.detection_time, Some(0.0));
        assert_eq!(res.phase1.len(), 1);
        let p2 = res.phase2.as_ref().unwrap();
        assert_eq!(p2.states()[0], [99989.0, 1.0, 0.0, 0.0, 10.0, 0.0]);
    }

    #[test]
    fn effort_trigger_switches_on_detection_day() {
        let cfg = ScenarioConfig {
            trigger: TriggerSpec::SurveillanceEffort(SurveillanceParams::constant(100.0)),
            ..ScenarioConfig::default()
        };
        let res = run_scenario(&cfg).unwrap();
        let day = res.detection_day.unwrap();
        assert_eq!(res.detection_time, Some(day as f64));
        assert_eq!(res.phase1.end_time(), day as f64);
        assert_eq!(res.phase2.as_ref().unwrap().start_time(), day as f64);
    }

    #[test]
    fn undetected_effort_run_has_no_response() {
        let cfg = ScenarioConfig {
            trigger: TriggerSpec::SurveillanceEffort(SurveillanceParams::constant(0.0)),
            ..ScenarioConfig::default()
        };
        let res = run_scenario(&cfg).unwrap();
        assert!(res.phase2.is_none());
        assert!(res.detection_time.is_none() && res.detection_day.is_none());
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = ScenarioConfig {
            i0: 2e5,
            ..ScenarioConfig::default()
        };
        assert!(
            matches!(run_scenario(&cfg), Err(ScenarioError::InvalidConfig(e)) if e.constraint == "i0 < n")
        );
    }
}
