//! Parameters, compartment states and right-hand sides of the two model phases.
//!
//! Phase one is SIR on a naive population:
//!
//! ```text
//! S' = -β S I / N
//! I' =  β S I / N - γ I
//! R' =  γ I
//! ```
//!
//! Phase two splits the susceptibles into unaware (U), aware (A) and
//! careless (C) individuals and adds a quarantine compartment (Q):
//!
//! ```text
//! U' = -βi U A / N - β U I / N + ρ C
//! A' =  βi U A / N - (1-ε) β A I / N - γi A
//! C' =  γi A - β C I / N - ρ C
//! Q' =  φ β [U + C + (1-ε) A] I / N - γ Q
//! I' = (1-φ) β [U + C + (1-ε) A] I / N - γ I
//! R' =  γ (Q + I)
//! ```
//!
//! With ρ = 0 the careless never relapse and every individual adopts the
//! protective behavior at most once (single-shot response).

use core::fmt;

use crate::integrator::OdeSystem;
use crate::params::{ensure, ParamError};

/// Disease transmission and recovery rates, both per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiseaseParams {
    pub beta: f64,
    pub gamma: f64,
}

impl DiseaseParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self, ParamError> {
        let p = Self { beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(
            self.beta >= 0.0 && self.beta.is_finite(),
            "beta",
            "beta ≥ 0",
            self.beta,
        )?;
        ensure(
            self.gamma > 0.0 && self.gamma.is_finite(),
            "gamma",
            "gamma > 0",
            self.gamma,
        )
    }

    /// β/γ. Reported only; the dynamics always use β and γ directly.
    pub fn basic_reproduction_number(&self) -> f64 {
        self.beta / self.gamma
    }
}

/// Risk-information contagion and behavioral stringency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoParams {
    /// Information transmission rate (per day).
    pub beta_i: f64,
    /// Rate at which aware individuals turn careless (per day).
    pub gamma_i: f64,
    /// Fractional susceptibility reduction of aware individuals.
    pub epsilon: f64,
}

impl InfoParams {
    pub fn new(beta_i: f64, gamma_i: f64, epsilon: f64) -> Result<Self, ParamError> {
        let p = Self {
            beta_i,
            gamma_i,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(
            self.beta_i >= 0.0 && self.beta_i.is_finite(),
            "beta_i",
            "beta_i ≥ 0",
            self.beta_i,
        )?;
        ensure(
            self.gamma_i > 0.0 && self.gamma_i.is_finite(),
            "gamma_i",
            "gamma_i > 0",
            self.gamma_i,
        )?;
        ensure(self.epsilon >= 0.0, "epsilon", "epsilon ≥ 0", self.epsilon)?;
        ensure(self.epsilon <= 1.0, "epsilon", "epsilon ≤ 1", self.epsilon)
    }
}

/// Fraction of newly infected individuals quarantined after the declaration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterventionParams {
    pub phi: f64,
}

impl InterventionParams {
    pub fn new(phi: f64) -> Result<Self, ParamError> {
        let p = Self { phi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(self.phi >= 0.0, "phi", "phi ≥ 0", self.phi)?;
        ensure(self.phi <= 1.0, "phi", "phi ≤ 1", self.phi)
    }
}

/// Rate at which careless individuals revert to unaware (per day).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelapseParams {
    pub rho: f64,
}

impl RelapseParams {
    pub fn new(rho: f64) -> Result<Self, ParamError> {
        let p = Self { rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        ensure(
            self.rho >= 0.0 && self.rho.is_finite(),
            "rho",
            "rho ≥ 0",
            self.rho,
        )
    }
}

pub fn basic_reproduction_number(p: &DiseaseParams) -> f64 {
    p.basic_reproduction_number()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelError {
    /// Total population is zero (or not a positive finite number).
    DegeneratePopulation,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::DegeneratePopulation => f.write_str("population size must be positive"),
        }
    }
}

impl core::error::Error for ModelError {}

fn check_population(n: f64) -> Result<(), ModelError> {
    if n > 0.0 && n.is_finite() {
        Ok(())
    } else {
        Err(ModelError::DegeneratePopulation)
    }
}

/// Naive-phase compartments, in individuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub n: f64,
}

impl NaiveState {
    pub const LABELS: [&'static str; 3] = ["S", "I", "R"];

    pub fn to_array(&self) -> [f64; 3] {
        [self.s, self.i, self.r]
    }

    pub fn from_array(y: &[f64; 3], n: f64) -> Self {
        Self {
            s: y[0],
            i: y[1],
            r: y[2],
            n,
        }
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }
}

/// Post-declaration compartments, in individuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseState {
    pub u: f64,
    pub a: f64,
    pub c: f64,
    pub q: f64,
    pub i: f64,
    pub r: f64,
    pub n: f64,
}

impl ResponseState {
    pub const LABELS: [&'static str; 6] = ["U", "A", "C", "Q", "I", "R"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.u, self.a, self.c, self.q, self.i, self.r]
    }

    pub fn from_array(y: &[f64; 6], n: f64) -> Self {
        Self {
            u: y[0],
            a: y[1],
            c: y[2],
            q: y[3],
            i: y[4],
            r: y[5],
            n,
        }
    }

    pub fn total(&self) -> f64 {
        self.u + self.a + self.c + self.q + self.i + self.r
    }
}

/// Time derivative of a [`NaiveState`], individuals per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveRate {
    pub ds: f64,
    pub di: f64,
    pub dr: f64,
}

impl NaiveRate {
    pub fn sum(&self) -> f64 {
        self.ds + self.di + self.dr
    }
}

/// Time derivative of a [`ResponseState`], individuals per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseRate {
    pub du: f64,
    pub da: f64,
    pub dc: f64,
    pub dq: f64,
    pub di: f64,
    pub dr: f64,
}

impl ResponseRate {
    pub fn sum(&self) -> f64 {
        self.du + self.da + self.dc + self.dq + self.di + self.dr
    }

    fn from_array(d: [f64; 6]) -> Self {
        Self {
            du: d[0],
            da: d[1],
            dc: d[2],
            dq: d[3],
            di: d[4],
            dr: d[5],
        }
    }
}

pub(crate) fn naive_rates(y: &[f64; 3], n: f64, p: &DiseaseParams) -> [f64; 3] {
    let [s, i, _] = *y;
    let infection = p.beta * s * i / n;
    let recovery = p.gamma * i;
    [-infection, infection - recovery, recovery]
}

pub(crate) fn single_shot_rates(
    y: &[f64; 6],
    n: f64,
    d: &DiseaseParams,
    info: &InfoParams,
    iv: &InterventionParams,
) -> [f64; 6] {
    let [u, a, c, q, i, _] = *y;
    let foi = d.beta * i / n;
    let inf_u = foi * u;
    let inf_a = (1.0 - info.epsilon) * foi * a;
    let inf_c = foi * c;
    let new_infections = inf_u + inf_a + inf_c;
    let adoption = info.beta_i * u * a / n;
    let withdrawal = info.gamma_i * a;
    [
        -adoption - inf_u,
        adoption - inf_a - withdrawal,
        withdrawal - inf_c,
        iv.phi * new_infections - d.gamma * q,
        (1.0 - iv.phi) * new_infections - d.gamma * i,
        d.gamma * (q + i),
    ]
}

pub(crate) fn relapse_rates(
    y: &[f64; 6],
    n: f64,
    d: &DiseaseParams,
    info: &InfoParams,
    iv: &InterventionParams,
    rel: &RelapseParams,
) -> [f64; 6] {
    let [u, a, c, q, i, _] = *y;
    let foi = d.beta * i / n;
    let inf_u = foi * u;
    let inf_a = (1.0 - info.epsilon) * foi * a;
    let inf_c = foi * c;
    let new_infections = inf_u + inf_a + inf_c;
    let adoption = info.beta_i * u * a / n;
    let withdrawal = info.gamma_i * a;
    let relapse = rel.rho * c;
    [
        -adoption - inf_u + relapse,
        adoption - inf_a - withdrawal,
        withdrawal - inf_c - relapse,
        iv.phi * new_infections - d.gamma * q,
        (1.0 - iv.phi) * new_infections - d.gamma * i,
        d.gamma * (q + i),
    ]
}

pub fn naive_derivative(state: &NaiveState, p: &DiseaseParams) -> Result<NaiveRate, ModelError> {
    check_population(state.n)?;
    let [ds, di, dr] = naive_rates(&state.to_array(), state.n, p);
    Ok(NaiveRate { ds, di, dr })
}

/// Rates of the relapse model. `rel.rho = 0` reproduces the single-shot model.
pub fn response_derivative(
    state: &ResponseState,
    d: &DiseaseParams,
    info: &InfoParams,
    iv: &InterventionParams,
    rel: &RelapseParams,
) -> Result<ResponseRate, ModelError> {
    check_population(state.n)?;
    Ok(ResponseRate::from_array(relapse_rates(
        &state.to_array(),
        state.n,
        d,
        info,
        iv,
        rel,
    )))
}

/// Rates of the single-shot model (no careless-to-unaware flow).
pub fn single_shot_derivative(
    state: &ResponseState,
    d: &DiseaseParams,
    info: &InfoParams,
    iv: &InterventionParams,
) -> Result<ResponseRate, ModelError> {
    check_population(state.n)?;
    Ok(ResponseRate::from_array(single_shot_rates(
        &state.to_array(),
        state.n,
        d,
        info,
        iv,
    )))
}

/// Naive-phase SIR system over `[S, I, R]`.
#[derive(Debug, Clone, Copy)]
pub struct NaiveSystem {
    pub disease: DiseaseParams,
    pub n: f64,
}

impl NaiveSystem {
    pub fn new(disease: DiseaseParams, n: f64) -> Result<Self, ModelError> {
        check_population(n)?;
        Ok(Self { disease, n })
    }
}

impl OdeSystem<3> for NaiveSystem {
    fn labels(&self) -> [&'static str; 3] {
        NaiveState::LABELS
    }

    fn population(&self) -> f64 {
        self.n
    }

    fn rates(&self, _t: f64, y: &[f64; 3]) -> [f64; 3] {
        naive_rates(y, self.n, &self.disease)
    }
}

/// Post-declaration system over `[U, A, C, Q, I, R]`.
///
/// `relapse: None` evaluates the single-shot equations; `Some` evaluates the
/// relapse equations, even when ρ = 0.
#[derive(Debug, Clone, Copy)]
pub struct ResponseSystem {
    pub disease: DiseaseParams,
    pub info: InfoParams,
    pub intervention: InterventionParams,
    pub relapse: Option<RelapseParams>,
    pub n: f64,
}

impl OdeSystem<6> for ResponseSystem {
    fn labels(&self) -> [&'static str; 6] {
        ResponseState::LABELS
    }

    fn population(&self) -> f64 {
        self.n
    }

    fn rates(&self, _t: f64, y: &[f64; 6]) -> [f64; 6] {
        match &self.relapse {
            None => single_shot_rates(y, self.n, &self.disease, &self.info, &self.intervention),
            Some(rel) => relapse_rates(
                y,
                self.n,
                &self.disease,
                &self.info,
                &self.intervention,
                rel,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn naive_rate_without_infectious_is_zero() {
        let s = NaiveState {
            s: 1e5,
            i: 0.0,
            r: 0.0,
            n: 1e5,
        };
        let r = naive_derivative(&s, &DiseaseParams::new(0.3, 0.1).unwrap()).unwrap();
        assert_eq!((r.ds, r.di, r.dr), (0.0, 0.0, 0.0));
    }

    #[test]
    fn naive_rate_hand_evaluated() {
        let s = NaiveState {
            s: 0.99,
            i: 0.01,
            r: 0.0,
            n: 1.0,
        };
        let r = naive_derivative(&s, &DiseaseParams::new(0.3, 0.1).unwrap()).unwrap();
        assert!(close(r.ds, -0.00297, 1e-15));
        assert!(close(r.di, 0.00197, 1e-15));
        assert!(close(r.dr, 0.001, 1e-15));
    }

    #[test]
    fn zero_population_is_degenerate() {
        let d = DiseaseParams::new(0.3, 0.1).unwrap();
        let s = NaiveState {
            s: 0.0,
            i: 0.0,
            r: 0.0,
            n: 0.0,
        };
        assert_eq!(
            naive_derivative(&s, &d),
            Err(ModelError::DegeneratePopulation)
        );
        let rs = ResponseState {
            u: 0.0,
            a: 0.0,
            c: 0.0,
            q: 0.0,
            i: 0.0,
            r: 0.0,
            n: 0.0,
        };
        let info = InfoParams::new(1.5, 0.1, 0.8).unwrap();
        let iv = InterventionParams::new(0.2).unwrap();
        let rel = RelapseParams::new(0.05).unwrap();
        assert_eq!(
            response_derivative(&rs, &d, &info, &iv, &rel),
            Err(ModelError::DegeneratePopulation)
        );
    }

    #[test]
    fn reproduction_number() {
        assert_eq!(
            basic_reproduction_number(&DiseaseParams::new(0.3, 0.1).unwrap()),
            0.3 / 0.1
        );
        assert!(close(
            basic_reproduction_number(&DiseaseParams::new(0.3, 0.1).unwrap()),
            3.0,
            1e-15
        ));
        assert_eq!(
            basic_reproduction_number(&DiseaseParams::new(0.0, 0.1).unwrap()),
            0.0
        );
        assert_eq!(
            basic_reproduction_number(&DiseaseParams::new(0.2, 0.2).unwrap()),
            1.0
        );
    }

    #[test]
    fn parameter_constraints() {
        assert_eq!(
            DiseaseParams::new(-0.1, 0.1).unwrap_err().constraint,
            "beta ≥ 0"
        );
        assert_eq!(
            DiseaseParams::new(0.1, 0.0).unwrap_err().constraint,
            "gamma > 0"
        );
        assert_eq!(
            InfoParams::new(1.0, 0.1, 1.5).unwrap_err().constraint,
            "epsilon ≤ 1"
        );
        assert_eq!(
            InfoParams::new(1.0, 0.1, -0.5).unwrap_err().constraint,
            "epsilon ≥ 0"
        );
        assert_eq!(InfoParams::new(1.0, 0.0, 0.5).unwrap_err().name, "gamma_i");
        assert_eq!(
            InterventionParams::new(1.2).unwrap_err().constraint,
            "phi ≤ 1"
        );
        assert_eq!(RelapseParams::new(-1.0).unwrap_err().name, "rho");
        assert!(DiseaseParams::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn only_relapse_flows_without_seeds() {
        let d = DiseaseParams::new(0.3, 0.1).unwrap();
        let info = InfoParams::new(1.5, 0.1, 0.8).unwrap();
        let iv = InterventionParams::new(0.2).unwrap();
        let rel = RelapseParams::new(0.05).unwrap();
        let st = ResponseState {
            u: 500.0,
            a: 0.0,
            c: 300.0,
            q: 20.0,
            i: 0.0,
            r: 180.0,
            n: 1000.0,
        };
        let r = response_derivative(&st, &d, &info, &iv, &rel).unwrap();
        assert_eq!(r.du, 0.05 * 300.0);
        assert_eq!(r.dc, -0.05 * 300.0);
        assert_eq!(r.da, 0.0);
        assert_eq!(r.di, 0.0);
        // recovery of already-quarantined individuals continues
        assert_eq!(r.dq, -0.1 * 20.0);
        assert_eq!(r.dr, 0.1 * 20.0);
    }

    fn arb_response_state() -> impl Strategy<Value = ResponseState> {
        prop::array::uniform6(0.0f64..1.0).prop_map(|w| {
            let total: f64 = w.iter().sum::<f64>() + 1e-9;
            let n = 1e5;
            let y = w.map(|x| x / total * n);
            ResponseState::from_array(&y, y.iter().sum())
        })
    }

    proptest! {
        #[test]
        fn naive_components_sum_to_zero(
            s in 0.0f64..1e5, i in 0.0f64..1e5, r in 0.0f64..1e5,
            beta in 0.0f64..3.0, gamma in 0.01f64..1.0,
        ) {
            let st = NaiveState { s, i, r, n: s + i + r + 1.0 };
            let rate = naive_derivative(&st, &DiseaseParams::new(beta, gamma).unwrap()).unwrap();
            let scale = rate.ds.abs() + rate.di.abs() + rate.dr.abs();
            prop_assert!(rate.sum().abs() <= 4.0 * f64::EPSILON * scale);
            prop_assert!(rate.dr >= 0.0);
        }

        #[test]
        fn response_components_sum_to_zero(
            st in arb_response_state(),
            beta in 0.0f64..3.0, gamma in 0.01f64..1.0,
            beta_i in 0.0f64..3.0, gamma_i in 0.01f64..1.0, eps in 0.0f64..=1.0,
            phi in 0.0f64..=1.0, rho in 0.0f64..1.0,
        ) {
            let d = DiseaseParams::new(beta, gamma).unwrap();
            let info = InfoParams::new(beta_i, gamma_i, eps).unwrap();
            let iv = InterventionParams::new(phi).unwrap();
            let rate = response_derivative(&st, &d, &info, &iv, &RelapseParams::new(rho).unwrap()).unwrap();
            let scale = [rate.du, rate.da, rate.dc, rate.dq, rate.di, rate.dr]
                .iter().map(|x| x.abs()).sum::<f64>();
            prop_assert!(rate.sum().abs() <= 16.0 * f64::EPSILON * scale);
            prop_assert!(rate.dr >= 0.0);
            prop_assert!(rate.dq >= -gamma * st.q);
        }

        #[test]
        fn zero_rho_matches_single_shot(
            st in arb_response_state(),
            beta in 0.0f64..3.0, beta_i in 0.0f64..3.0, eps in 0.0f64..=1.0, phi in 0.0f64..=1.0,
        ) {
            let d = DiseaseParams::new(beta, 0.1).unwrap();
            let info = InfoParams::new(beta_i, 0.1, eps).unwrap();
            let iv = InterventionParams::new(phi).unwrap();
            let a = response_derivative(&st, &d, &info, &iv, &RelapseParams::new(0.0).unwrap()).unwrap();
            let b = single_shot_derivative(&st, &d, &info, &iv).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn collapses_to_sir_without_behavior(
            st in arb_response_state(), beta in 0.0f64..3.0, gamma in 0.01f64..1.0, beta_i in 0.0f64..3.0,
        ) {
            // nothing is quarantined when phi = 0
            let st = ResponseState { r: st.r + st.q, q: 0.0, ..st };
            let d = DiseaseParams::new(beta, gamma).unwrap();
            let info = InfoParams::new(beta_i, 0.1, 0.0).unwrap();
            let iv = InterventionParams::new(0.0).unwrap();
            let rate = response_derivative(&st, &d, &info, &iv, &RelapseParams::new(0.0).unwrap()).unwrap();
            let naive = naive_derivative(
                &NaiveState { s: st.u + st.a + st.c, i: st.i, r: st.r, n: st.n }, &d,
            ).unwrap();
            let scale = naive.ds.abs() + info.beta_i * st.u * st.a / st.n + info.gamma_i * st.a + 1e-300;
            prop_assert!((rate.du + rate.da + rate.dc - naive.ds).abs() <= 1e-14 * scale);
            prop_assert!((rate.di - naive.di).abs() <= 1e-14 * (naive.ds.abs() + gamma * st.i));
            prop_assert_eq!(rate.dr, naive.dr);
            prop_assert_eq!(rate.dq, 0.0);
        }

        #[test]
        fn full_quarantine_stops_free_infections(
            st in arb_response_state(), beta in 0.0f64..3.0, eps in 0.0f64..=1.0,
        ) {
            let d = DiseaseParams::new(beta, 0.2).unwrap();
            let info = InfoParams::new(1.5, 0.1, eps).unwrap();
            let iv = InterventionParams::new(1.0).unwrap();
            let rate = response_derivative(&st, &d, &info, &iv, &RelapseParams::new(0.05).unwrap()).unwrap();
            prop_assert_eq!(rate.di, -0.2 * st.i);
        }
    }
}
