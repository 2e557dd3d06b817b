//! One- and two-dimensional parameter grids over [`ScenarioConfig`].
//!
//! Cells are independent; a [`SweepPlan`] maps a flat row-major cell index to
//! its configuration so any executor can evaluate cells in any order and
//! assemble the result by position.

use alloc::vec::Vec;
use core::fmt;

use crate::model::RelapseParams;
use crate::scenario::{run_scenario, ScenarioConfig, ScenarioError};
use crate::surveillance::TriggerSpec;

/// Absolute tolerance, in final-size units, for calling a line non-monotonic.
pub const DEFAULT_NONMONOTONIC_TOLERANCE: f64 = 1e-3;

/// Scalar of [`ScenarioConfig`] addressed by a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepTarget {
    Beta,
    Gamma,
    /// 1/γ in days; sets γ to the reciprocal.
    InfectiousPeriod,
    BetaI,
    /// Awareness withdrawal, treated as a rate (per day).
    GammaI,
    Epsilon,
    Phi,
    /// Switches the run to the relapse model.
    Rho,
    /// Only valid with a prevalence-threshold trigger.
    Pstar,
}

impl SweepTarget {
    pub const ALL: [SweepTarget; 9] = [
        SweepTarget::Beta,
        SweepTarget::Gamma,
        SweepTarget::InfectiousPeriod,
        SweepTarget::BetaI,
        SweepTarget::GammaI,
        SweepTarget::Epsilon,
        SweepTarget::Phi,
        SweepTarget::Rho,
        SweepTarget::Pstar,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepTarget::Beta => "beta",
            SweepTarget::Gamma => "gamma",
            SweepTarget::InfectiousPeriod => "infectious_period",
            SweepTarget::BetaI => "beta_i",
            SweepTarget::GammaI => "gamma_i",
            SweepTarget::Epsilon => "epsilon",
            SweepTarget::Phi => "phi",
            SweepTarget::Rho => "rho",
            SweepTarget::Pstar => "pstar",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Whether two targets address the same scalar.
    fn collides_with(&self, other: &SweepTarget) -> bool {
        use SweepTarget::{Gamma, InfectiousPeriod};
        self == other
            || matches!(
                (self, other),
                (Gamma, InfectiousPeriod) | (InfectiousPeriod, Gamma)
            )
    }

    pub fn apply(&self, cfg: &mut ScenarioConfig, value: f64) -> Result<(), SweepError> {
        match self {
            SweepTarget::Beta => cfg.disease.beta = value,
            SweepTarget::Gamma => cfg.disease.gamma = value,
            SweepTarget::InfectiousPeriod => cfg.disease.gamma = 1.0 / value,
            SweepTarget::BetaI => cfg.info.beta_i = value,
            SweepTarget::GammaI => cfg.info.gamma_i = value,
            SweepTarget::Epsilon => cfg.info.epsilon = value,
            SweepTarget::Phi => cfg.intervention.phi = value,
            SweepTarget::Rho => cfg.relapse = Some(RelapseParams { rho: value }),
            SweepTarget::Pstar => match &mut cfg.trigger {
                TriggerSpec::PrevalenceThreshold { pstar } => *pstar = value,
                TriggerSpec::SurveillanceEffort(_) => return Err(SweepError::PstarNeedsThreshold),
            },
        }
        Ok(())
    }
}

impl fmt::Display for SweepTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamAxis {
    pub target: SweepTarget,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl ParamAxis {
    pub fn new(target: SweepTarget, min: f64, max: f64, points: usize) -> Result<Self, SweepError> {
        let axis = Self {
            target,
            min,
            max,
            points,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.min >= self.max || !self.min.is_finite() || !self.max.is_finite() {
            return Err(SweepError::InvalidRange {
                target: self.target,
                min: self.min,
                max: self.max,
            });
        }
        if self.points < 2 {
            return Err(SweepError::TooFewPoints {
                target: self.target,
                points: self.points,
            });
        }
        Ok(())
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.max
        } else {
            self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    NoAxes,
    TooManyAxes(usize),
    DuplicateTarget(SweepTarget),
    InvalidRange {
        target: SweepTarget,
        min: f64,
        max: f64,
    },
    TooFewPoints {
        target: SweepTarget,
        points: usize,
    },
    PstarNeedsThreshold,
    AxisOutOfRange(usize),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::NoAxes => f.write_str("a sweep needs at least one axis"),
            SweepError::TooManyAxes(n) => {
                write!(f, "at most two sweep axes are supported, got {n}")
            }
            SweepError::DuplicateTarget(t) => {
                write!(
                    f,
                    "sweep axes must have distinct targets; {t} is used twice"
                )
            }
            SweepError::InvalidRange { target, min, max } => {
                write!(f, "axis {target}: need min < max, got [{min}, {max}]")
            }
            SweepError::TooFewPoints { target, points } => {
                write!(f, "axis {target}: need at least 2 points, got {points}")
            }
            SweepError::PstarNeedsThreshold => {
                f.write_str("pstar can only be swept with a prevalence_threshold trigger")
            }
            SweepError::AxisOutOfRange(i) => write!(f, "no sweep axis with index {i}"),
        }
    }
}

impl core::error::Error for SweepError {}

/// Per-cell metrics kept in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub final_size: f64,
    pub truncated: bool,
    pub peak_prevalence: f64,
    pub detection_time: Option<f64>,
}

pub type CellOutcome = Result<CellMetrics, ScenarioError>;

/// A validated grid over a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    base: ScenarioConfig,
    axes: Vec<ParamAxis>,
}

impl SweepPlan {
    pub fn new(base: ScenarioConfig, axes: &[ParamAxis]) -> Result<Self, SweepError> {
        match axes.len() {
            0 => return Err(SweepError::NoAxes),
            1 | 2 => {}
            n => return Err(SweepError::TooManyAxes(n)),
        }
        for a in axes {
            a.validate()?;
            if a.target == SweepTarget::Pstar
                && !matches!(base.trigger, TriggerSpec::PrevalenceThreshold { .. })
            {
                return Err(SweepError::PstarNeedsThreshold);
            }
        }
        if axes.len() == 2 && axes[0].target.collides_with(&axes[1].target) {
            return Err(SweepError::DuplicateTarget(axes[1].target));
        }
        Ok(Self {
            base,
            axes: axes.to_vec(),
        })
    }

    pub fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    pub fn base(&self) -> &ScenarioConfig {
        &self.base
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.axes[0].points,
            self.axes.get(1).map_or(1, |a| a.points),
        )
    }

    pub fn cell_count(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    /// Axis indices of a flat row-major cell index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        let cols = self.shape().1;
        (index / cols, index % cols)
    }

    pub fn cell_config(&self, index: usize) -> Result<ScenarioConfig, SweepError> {
        let (i, j) = self.position(index);
        let mut cfg = self.base.clone();
        self.axes[0].target.apply(&mut cfg, self.axes[0].value(i))?;
        if let Some(ax) = self.axes.get(1) {
            ax.target.apply(&mut cfg, ax.value(j))?;
        }
        Ok(cfg)
    }

    pub fn evaluate(&self, index: usize) -> CellOutcome {
        let cfg = self
            .cell_config(index)
            .expect("targets were checked against the base trigger");
        run_scenario(&cfg).map(|r| CellMetrics {
            final_size: r.final_size,
            truncated: r.truncated,
            peak_prevalence: r.peak_prevalence,
            detection_time: r.detection_time,
        })
    }

    /// Assembles a result from outcomes listed in cell-index order.
    pub fn assemble(&self, cells: Vec<CellOutcome>) -> SweepResult {
        assert_eq!(cells.len(), self.cell_count(), "one outcome per cell");
        SweepResult {
            axes: self.axes.clone(),
            cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<ParamAxis>,
    /// Row-major over axis order.
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (
            self.axes[0].points,
            self.axes.get(1).map_or(1, |a| a.points),
        )
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellOutcome {
        &self.cells[i * self.shape().1 + j]
    }

    /// Final sizes; `None` for failed cells.
    pub fn values(&self) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.as_ref().ok().map(|m| m.final_size))
            .collect()
    }

    /// Truncation flags; failed cells count as truncated.
    pub fn truncated(&self) -> Vec<bool> {
        self.cells
            .iter()
            .map(|c| c.as_ref().map_or(true, |m| m.truncated))
            .collect()
    }

    /// Cell indices of the line along `axis` through the other axis' index `fixed`.
    fn line_indices(&self, axis: usize, fixed: usize) -> Vec<usize> {
        let (rows, cols) = self.shape();
        if axis == 0 {
            (0..rows).map(|i| i * cols + fixed).collect()
        } else {
            (0..cols).map(|j| fixed * cols + j).collect()
        }
    }

    fn line_count(&self, axis: usize) -> usize {
        let (rows, cols) = self.shape();
        if axis == 0 {
            cols
        } else {
            rows
        }
    }

    /// Final sizes along `axis` with the other axis held at index `fixed`.
    pub fn line(&self, axis: usize, fixed: usize) -> Result<Vec<CellOutcome>, SweepError> {
        if axis >= self.axes.len() {
            return Err(SweepError::AxisOutOfRange(axis));
        }
        Ok(self
            .line_indices(axis, fixed)
            .into_iter()
            .map(|k| self.cells[k].clone())
            .collect())
    }
}

/// Minimizer of the final size along one line of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMinimum {
    pub index: usize,
    pub value: f64,
    pub final_size: f64,
    /// Neither the first nor the last grid point.
    pub interior: bool,
}

pub fn run_sweep(base: &ScenarioConfig, axes: &[ParamAxis]) -> Result<SweepResult, SweepError> {
    let plan = SweepPlan::new(base.clone(), axes)?;
    let cells = (0..plan.cell_count()).map(|k| plan.evaluate(k)).collect();
    Ok(plan.assemble(cells))
}

/// For every line along `axis`, the grid point with the smallest final size.
/// Truncated and failed cells are skipped; ties go to the smallest parameter
/// value. Lines with no usable cell give `None`.
pub fn argmin_along(
    result: &SweepResult,
    axis: usize,
) -> Result<Vec<Option<LineMinimum>>, SweepError> {
    let ax = result
        .axes
        .get(axis)
        .ok_or(SweepError::AxisOutOfRange(axis))?;
    let lines = result.line_count(axis);
    let mut out = Vec::with_capacity(lines);
    for fixed in 0..lines {
        let mut best: Option<LineMinimum> = None;
        for (k, cell) in result.line_indices(axis, fixed).into_iter().enumerate() {
            let Ok(m) = &result.cells[cell] else { continue };
            if m.truncated {
                continue;
            }
            if best.is_none_or(|b| m.final_size < b.final_size) {
                best = Some(LineMinimum {
                    index: k,
                    value: ax.value(k),
                    final_size: m.final_size,
                    interior: k > 0 && k + 1 < ax.points,
                });
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// True when some interior point dips below, or rises above, both a point
/// before it and a point after it by more than `tolerance`.
pub fn is_nonmonotonic(line: &[f64], tolerance: f64) -> bool {
    let n = line.len();
    if n < 3 {
        return false;
    }
    let mut suffix_max = alloc::vec![f64::NEG_INFINITY; n];
    let mut suffix_min = alloc::vec![f64::INFINITY; n];
    for k in (0..n - 1).rev() {
        suffix_max[k] = suffix_max[k + 1].max(line[k + 1]);
        suffix_min[k] = suffix_min[k + 1].min(line[k + 1]);
    }
    let mut prefix_max = line[0];
    let mut prefix_min = line[0];
    for j in 1..n - 1 {
        let v = line[j];
        if v < prefix_max.min(suffix_max[j]) - tolerance
            || v > prefix_min.max(suffix_min[j]) + tolerance
        {
            return true;
        }
        prefix_max = prefix_max.max(v);
        prefix_min = prefix_min.min(v);
    }
    false
}
