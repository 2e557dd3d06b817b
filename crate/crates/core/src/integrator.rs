//! Fixed-step explicit integration with threshold-crossing localization.
//!
//! Every step also checks that the compartments still add up to the
//! population and that none has gone meaningfully negative; either failure
//! aborts the run with the offending time.

use alloc::vec::Vec;
use core::fmt;

use crate::params::{ensure, ParamError};

/// Conservation drift that aborts a run, as a fraction of the population.
pub const CONSERVATION_ABORT: f64 = 1e-6;

/// An autonomous-or-not compartmental system with a fixed total population.
pub trait OdeSystem<const D: usize> {
    fn labels(&self) -> [&'static str; D];
    fn population(&self) -> f64;
    fn rates(&self, t: f64, y: &[f64; D]) -> [f64; D];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta.
    Rk4,
    /// Forward Euler, kept for convergence comparisons.
    Euler,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "rk4" => Some(Method::Rk4),
            "euler" => Some(Method::Euler),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Base step in days.
    pub dt: f64,
    pub method: Method,
    /// Width of the final bracket around a located crossing, in days.
    pub event_tolerance: f64,
    /// Permitted negative undershoot, as a fraction of the population.
    pub nonneg_tolerance: f64,
    /// Store every `stride`-th step. The first and last samples are always kept.
    pub stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            method: Method::Rk4,
            event_tolerance: 1e-6,
            nonneg_tolerance: 1e-9,
            stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            event_tolerance: if dt < 1e-6 { dt } else { 1e-6 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(
            self.dt > 0.0 && self.dt.is_finite(),
            "dt",
            "dt > 0",
            self.dt,
        )?;
        ensure(
            self.event_tolerance > 0.0,
            "event_tolerance",
            "event_tolerance > 0",
            self.event_tolerance,
        )?;
        ensure(
            self.event_tolerance <= self.dt,
            "event_tolerance",
            "event_tolerance ≤ dt",
            self.event_tolerance,
        )?;
        ensure(
            self.nonneg_tolerance >= 0.0,
            "nonneg_tolerance",
            "nonneg_tolerance ≥ 0",
            self.nonneg_tolerance,
        )?;
        ensure(self.stride >= 1, "stride", "stride ≥ 1", self.stride as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationError {
    InvalidConfig(ParamError),
    InvalidSpan {
        start: f64,
        end: f64,
    },
    NonFinite {
        time: f64,
    },
    ConservationViolation {
        time: f64,
        drift: f64,
    },
    Negative {
        time: f64,
        compartment: &'static str,
        value: f64,
    },
}

impl fmt::Display for IntegrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrationError::InvalidConfig(e) => write!(f, "invalid integrator config: {e}"),
            IntegrationError::InvalidSpan { start, end } => {
                write!(f, "invalid time span [{start}, {end}]")
            }
            IntegrationError::NonFinite { time } => {
                write!(f, "numerical instability at t = {time}: non-finite state")
            }
            IntegrationError::ConservationViolation { time, drift } => write!(
                f,
                "numerical instability at t = {time}: population drift {drift:e} exceeds tolerance"
            ),
            IntegrationError::Negative {
                time,
                compartment,
                value,
            } => write!(
                f,
                "numerical instability at t = {time}: compartment {compartment} = {value:e} is negative"
            ),
        }
    }
}

impl core::error::Error for IntegrationError {}

impl From<ParamError> for IntegrationError {
    fn from(e: ParamError) -> Self {
        IntegrationError::InvalidConfig(e)
    }
}

/// Time series of compartment states, with the system rates at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    times: Vec<f64>,
    states: Vec<[f64; D]>,
    rates: Vec<[f64; D]>,
    labels: [&'static str; D],
    population: f64,
}

impl<const D: usize> Trajectory<D> {
    fn new(labels: [&'static str; D], population: f64) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            rates: Vec::new(),
            labels,
            population,
        }
    }

    fn push(&mut self, t: f64, y: [f64; D], f: [f64; D]) {
        self.times.push(t);
        self.states.push(y);
        self.rates.push(f);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; D]] {
        &self.states
    }

    pub fn rates(&self) -> &[[f64; D]] {
        &self.rates
    }

    pub fn labels(&self) -> &[&'static str; D] {
        &self.labels
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn last_state(&self) -> &[f64; D] {
        &self.states[self.states.len() - 1]
    }

    /// Values of one compartment over time.
    pub fn component(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |y| y[index])
    }

    /// Cubic Hermite interpolation between the stored samples bracketing `t`.
    /// Returns `None` outside the covered time range.
    pub fn interpolate(&self, t: f64) -> Option<[f64; D]> {
        if self.is_empty() || !(t >= self.start_time() && t <= self.end_time()) {
            return None;
        }
        // first index with time > t
        let upper = self.times.partition_point(|&x| x <= t);
        if upper == 0 {
            return Some(self.states[0]);
        }
        let k = upper - 1;
        if self.times[k] == t || k + 1 == self.len() {
            return Some(self.states[k]);
        }
        Some(hermite(
            self.times[k],
            &self.states[k],
            &self.rates[k],
            self.times[k + 1],
            &self.states[k + 1],
            &self.rates[k + 1],
            t,
        ))
    }

    /// The part of the trajectory up to `t`, ending with the interpolated state
    /// at exactly `t`. `None` if `t` lies outside the trajectory.
    pub fn truncated_at<S: OdeSystem<D>>(&self, sys: &S, t: f64) -> Option<Self> {
        let y = self.interpolate(t)?;
        let keep = self.times.partition_point(|&x| x < t);
        let mut out = Self::new(self.labels, self.population);
        for k in 0..keep {
            out.push(self.times[k], self.states[k], self.rates[k]);
        }
        out.push(t, y, sys.rates(t, &y));
        Some(out)
    }
}

pub(crate) fn hermite<const D: usize>(
    t0: f64,
    y0: &[f64; D],
    f0: &[f64; D],
    t1: f64,
    y1: &[f64; D],
    f1: &[f64; D],
    t: f64,
) -> [f64; D] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    core::array::from_fn(|j| h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j])
}

fn axpy<const D: usize>(y: &[f64; D], h: f64, k: &[f64; D]) -> [f64; D] {
    core::array::from_fn(|j| y[j] + h * k[j])
}

fn step<S: OdeSystem<D>, const D: usize>(
    sys: &S,
    method: Method,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    h: f64,
) -> [f64; D] {
    match method {
        Method::Euler => axpy(y, h, k1),
        Method::Rk4 => {
            let half = 0.5 * h;
            let k2 = sys.rates(t + half, &axpy(y, half, k1));
            let k3 = sys.rates(t + half, &axpy(y, half, &k2));
            let k4 = sys.rates(t + h, &axpy(y, h, &k3));
            core::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        }
    }
}

fn check_state<const D: usize>(
    labels: &[&'static str; D],
    population: f64,
    nonneg_tolerance: f64,
    t: f64,
    y: &[f64; D],
) -> Result<(), IntegrationError> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(IntegrationError::NonFinite { time: t });
    }
    let drift = y.iter().sum::<f64>() - population;
    if drift.abs() > CONSERVATION_ABORT * population {
        return Err(IntegrationError::ConservationViolation { time: t, drift });
    }
    let floor = -nonneg_tolerance * population;
    if let Some(j) = (0..D).find(|&j| y[j] < floor) {
        return Err(IntegrationError::Negative {
            time: t,
            compartment: labels[j],
            value: y[j],
        });
    }
    Ok(())
}

fn march<S, P, const D: usize>(
    sys: &S,
    initial: [f64; D],
    start: f64,
    end: f64,
    cfg: &IntegratorConfig,
    mut predicate: Option<P>,
) -> Result<(Trajectory<D>, Option<f64>), IntegrationError>
where
    S: OdeSystem<D>,
    P: FnMut(f64, &[f64; D]) -> bool,
{
    cfg.validate()?;
    let labels = sys.labels();
    let n = sys.population();
    check_state(&labels, n, cfg.nonneg_tolerance, start, &initial)?;

    let mut traj = Trajectory::new(labels, n);
    let mut y = initial;
    let mut f = sys.rates(start, &y);
    traj.push(start, y, f);
    if let Some(pred) = predicate.as_mut() {
        if pred(start, &y) {
            return Ok((traj, Some(start)));
        }
    }

    let mut t = start;
    let mut k: u64 = 0;
    while t < end {
        k += 1;
        let mut t_next = start + k as f64 * cfg.dt;
        if t_next >= end - 1e-9 * cfg.dt {
            t_next = end;
        }
        let y_next = step(sys, cfg.method, t, &y, &f, t_next - t);
        check_state(&labels, n, cfg.nonneg_tolerance, t_next, &y_next)?;
        let f_next = sys.rates(t_next, &y_next);

        if let Some(pred) = predicate.as_mut() {
            if pred(t_next, &y_next) {
                let (lo, hi) = (t, t_next);
                let tc = bisect(lo, hi, cfg.event_tolerance, |tm| {
                    pred(tm, &hermite(t, &y, &f, t_next, &y_next, &f_next, tm))
                });
                let (yc, fc) = if tc == t_next {
                    (y_next, f_next)
                } else {
                    let yc = hermite(t, &y, &f, t_next, &y_next, &f_next, tc);
                    check_state(&labels, n, cfg.nonneg_tolerance, tc, &yc)?;
                    (yc, sys.rates(tc, &yc))
                };
                if !(k - 1).is_multiple_of(cfg.stride as u64) {
                    traj.push(t, y, f);
                }
                traj.push(tc, yc, fc);
                return Ok((traj, Some(tc)));
            }
        }

        if k.is_multiple_of(cfg.stride as u64) || t_next == end {
            traj.push(t_next, y_next, f_next);
        }
        t = t_next;
        y = y_next;
        f = f_next;
    }
    Ok((traj, None))
}

/// Smallest-bracket search for the first time in `(lo, hi]` where `fires`
/// holds, assuming it is false at `lo`, true at `hi` and flips once. The
/// returned time satisfies the predicate and lies within `tol / 2` of the
/// last time known not to.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut fires: impl FnMut(f64) -> bool) -> f64 {
    let half_tol = 0.5 * tol;
    while hi - lo > half_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fires(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Fixed-step march over `span`. The last step is shortened so the
/// trajectory ends exactly at `span.1`.
pub fn integrate<S: OdeSystem<D>, const D: usize>(
    sys: &S,
    initial: [f64; D],
    span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<D>, IntegrationError> {
    let (start, end) = span;
    if end <= start || !start.is_finite() || !end.is_finite() {
        return Err(IntegrationError::InvalidSpan { start, end });
    }
    march::<S, fn(f64, &[f64; D]) -> bool, D>(sys, initial, start, end, cfg, None).map(|(t, _)| t)
}

/// Integrates until `predicate(t, state)` first holds or `t_max` is reached.
///
/// On a crossing the time is localized by bisection on the step's cubic
/// Hermite interpolant and the trajectory ends with the interpolated state
/// there. `t_max == start` is allowed and yields a single-sample trajectory.
pub fn integrate_until<S, P, const D: usize>(
    sys: &S,
    initial: [f64; D],
    start: f64,
    t_max: f64,
    predicate: P,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory<D>, Option<f64>), IntegrationError>
where
    S: OdeSystem<D>,
    P: FnMut(f64, &[f64; D]) -> bool,
{
    if t_max < start || !start.is_finite() || !t_max.is_finite() {
        return Err(IntegrationError::InvalidSpan { start, end: t_max });
    }
    march(sys, initial, start, t_max, cfg, Some(predicate))
}
