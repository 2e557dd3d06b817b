//! Surveillance-triggered behavioral epidemic dynamics.
//!
//! An outbreak first spreads through a population that knows nothing about
//! it (plain SIR). A surveillance process decides when the outbreak is
//! declared; from then on risk awareness spreads as its own contagion,
//! aware individuals reduce their susceptibility for a while, and a fixed
//! fraction of new infections is quarantined. The crate computes the
//! detection time, runs both phases and evaluates final epidemic sizes over
//! parameter grids.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! sweeps and the command-line front end live in the `epitrigger` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod integrator;
pub mod model;
pub mod scenario;
pub mod surveillance;
pub mod sweep;

mod params;

pub use integrator::{
    integrate, integrate_until, IntegrationError, IntegratorConfig, Method, OdeSystem, Trajectory,
};
pub use model::{
    basic_reproduction_number, naive_derivative, response_derivative, single_shot_derivative,
    DiseaseParams, InfoParams, InterventionParams, ModelError, NaiveRate, NaiveState, NaiveSystem,
    RelapseParams, ResponseRate, ResponseState, ResponseSystem,
};
pub use params::ParamError;
pub use scenario::{
    final_size, handoff, naive_phase, run_scenario, sir_final_size_oracle, FinalSize,
    ScenarioConfig, ScenarioError, SimResult,
};
pub use surveillance::{
    daily_prevalence, detection_probability, detection_time, effort_to_threshold, DailyTests,
    DetectionResult, SurveillanceError, SurveillanceParams, TriggerSpec,
};
pub use sweep::{
    argmin_along, is_nonmonotonic, run_sweep, CellMetrics, CellOutcome, LineMinimum, ParamAxis,
    SweepError, SweepPlan, SweepResult, SweepTarget, DEFAULT_NONMONOTONIC_TOLERANCE,
};
