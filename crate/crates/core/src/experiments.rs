//! Experiment drivers: single runs with diagnostics, clogging classification
//! and the `(C_rho, f)` transition sweep.

use crate::discretization::{spatial_average, GridSpec};
use crate::model::{derive_dimensionless, f_tilde_of_sigma1, velocity, DimensionalParams, ModelParams, State};
use crate::stepper::{step, StepError, TimeSpec};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default cutoff on the final growth rate of the mean dust density.
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Relative change of the mean dust density allowed over the last decade
/// (final tenth of the horizon) of a converged run.
pub const CONVERGED_DRIFT: f64 = 0.01;

/// Per-recorded-step diagnostics of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub avg_v1: Vec<f64>,
    pub avg_v2: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub c_value: Vec<f64>,
    pub f_tilde_value: Vec<f64>,
    pub heatmap_v1: Vec<Vec<f64>>,
    pub heatmap_v2: Vec<Vec<f64>>,
    /// Slope of `avg_v1` over the last recorded interval.
    pub final_growth_rate: f64,
    /// Smallest node value of `v1` / `v2` seen over every step of the run.
    pub min_v1: f64,
    pub min_v2: f64,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, p: &ModelParams, grid: &GridSpec, s: &State) -> Result<(), StepError> {
        let avg = |u: &[f64]| spatial_average(grid, u);
        let to_step = |e| StepError::Model {
            substep: crate::stepper::Substep::Sigma1,
            source: e,
        };
        self.times.push(s.t);
        self.avg_v1.push(avg(&s.v1)?);
        self.avg_v2.push(avg(&s.v2)?);
        self.sigma1.push(s.sigma1);
        self.sigma2.push(s.sigma2);
        self.c_value.push(velocity(p, s.sigma1).map_err(to_step)?);
        self.f_tilde_value.push(f_tilde_of_sigma1(p, s.sigma1).map_err(to_step)?);
        self.heatmap_v1.push(s.v1.clone());
        self.heatmap_v2.push(s.v2.clone());
        Ok(())
    }

    fn track_minimum(&mut self, s: &State) {
        let m1 = s.v1.iter().copied().fold(f64::INFINITY, f64::min);
        let m2 = s.v2.iter().copied().fold(f64::INFINITY, f64::min);
        self.min_v1 = self.min_v1.min(m1);
        self.min_v2 = self.min_v2.min(m2);
    }

    fn finish(&mut self) {
        let n = self.len();
        self.final_growth_rate = if n >= 2 {
            (self.avg_v1[n - 1] - self.avg_v1[n - 2]) / (self.times[n - 1] - self.times[n - 2])
        } else {
            0.0
        };
    }

    /// Index of the first sample in the final tenth of the run.
    fn last_decade_start(&self) -> Option<usize> {
        let t_end = *self.times.last()?;
        let cut = 0.9 * t_end;
        self.times.iter().position(|&t| t >= cut)
    }

    /// `|avg_v1(t_end) - avg_v1(0.9 t_end)| / |avg_v1(t_end)|`.
    pub fn last_decade_relative_change(&self) -> f64 {
        let Some(start) = self.last_decade_start() else {
            return 0.0;
        };
        let first = self.avg_v1[start];
        let last = *self.avg_v1.last().unwrap();
        let diff = (last - first).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / last.abs().max(f64::MIN_POSITIVE)
        }
    }

    /// Least-squares line through `avg_v1` against time over the last
    /// decade; returns `(slope, r_squared)`.
    pub fn last_decade_linear_fit(&self) -> (f64, f64) {
        let start = self.last_decade_start().unwrap_or(0);
        linear_fit(&self.times[start..], &self.avg_v1[start..])
    }
}

/// Ordinary least squares `y = a + b x`; returns `(b, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (0.0, 0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[derive(Debug, Error)]
#[error("simulation failed at step {step}: {source}")]
pub struct SimulationError {
    pub step: usize,
    #[source]
    pub source: StepError,
    /// Diagnostics recorded before the failure.
    pub partial: Box<RunRecord>,
}

/// Integrates from `initial` to `timespec.t_end`, recording the initial
/// state, every `record_every`-th step and the final step.
pub fn run_simulation(
    p: &ModelParams,
    grid: &GridSpec,
    timespec: &TimeSpec,
    initial: &State,
) -> Result<RunRecord, SimulationError> {
    let mut record = RunRecord {
        min_v1: f64::INFINITY,
        min_v2: f64::INFINITY,
        ..RunRecord::default()
    };
    let fail = |step: usize, source: StepError, record: &mut RunRecord| {
        record.finish();
        SimulationError {
            step,
            source,
            partial: Box::new(std::mem::take(record)),
        }
    };
    if let Err(e) = p.validate() {
        let source = StepError::Model {
            substep: crate::stepper::Substep::V1,
            source: e,
        };
        return Err(fail(0, source, &mut record));
    }
    let mut state = initial.clone();
    state.t = 0.0;
    if let Err(e) = grid.check_len(state.v1.len()).and(grid.check_len(state.v2.len())) {
        return Err(fail(0, e.into(), &mut record));
    }
    record.track_minimum(&state);
    if let Err(e) = record.push(p, grid, &state) {
        return Err(fail(0, e, &mut record));
    }

    let steps = timespec.steps();
    for k in 1..=steps {
        let dt = timespec.time_at(k) - timespec.time_at(k - 1);
        state = match step(&state, p, grid, dt) {
            Ok(s) => s,
            Err(e) => return Err(fail(k, e, &mut record)),
        };
        state.t = timespec.time_at(k);
        record.track_minimum(&state);
        if k % timespec.record_every == 0 || k == steps {
            if let Err(e) = record.push(p, grid, &state) {
                return Err(fail(k, e, &mut record));
            }
        }
    }
    record.finish();
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Converged,
    Clogging,
    Marginal,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Converged => "Converged",
            Classification::Clogging => "Clogging",
            Classification::Marginal => "Marginal",
        })
    }
}

impl FromStr for Classification {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Converged" => Ok(Self::Converged),
            "Clogging" => Ok(Self::Clogging),
            "Marginal" => Ok(Self::Marginal),
            other => Err(format!("unknown classification `{other}`")),
        }
    }
}

/// Clogging when the final growth rate exceeds `threshold`; converged when it
/// is within `threshold` and the mean dust density drifted by less than 1%
/// over the final tenth of the run; marginal otherwise.
pub fn classify_clogging(record: &RunRecord, threshold: f64) -> Classification {
    let g = record.final_growth_rate;
    if g > threshold {
        Classification::Clogging
    } else if g.abs() <= threshold && record.last_decade_relative_change() < CONVERGED_DRIFT {
        Classification::Converged
    } else {
        Classification::Marginal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub growth_rate: f64,
    pub classification: Result<Classification, String>,
}

/// Growth rates and classifications on the `(C_rho, f)` grid; row-major with
/// `C_rho` as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub c_rho_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub cells: Vec<CellOutcome>,
}

impl SweepResult {
    pub fn cell(&self, i_crho: usize, i_f: usize) -> &CellOutcome {
        &self.cells[i_crho * self.f_values.len() + i_f]
    }

    pub fn growth_rate(&self) -> Vec<Vec<f64>> {
        self.rows(|c| c.growth_rate)
    }

    pub fn classification(&self) -> Vec<Vec<Option<Classification>>> {
        self.rows(|c| c.classification.clone().ok())
    }

    fn rows<T>(&self, f: impl Fn(&CellOutcome) -> T) -> Vec<Vec<T>> {
        self.cells
            .chunks(self.f_values.len())
            .map(|row| row.iter().map(&f).collect())
            .collect()
    }

    /// Smallest `f` classified as clogging for each `C_rho` column.
    pub fn lowest_clogging_f(&self) -> Vec<Option<f64>> {
        (0..self.c_rho_values.len())
            .map(|i| {
                (0..self.f_values.len())
                    .find(|&j| self.cell(i, j).classification == Ok(Classification::Clogging))
                    .map(|j| self.f_values[j])
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("axis `{0}` is empty")]
    EmptyAxis(&'static str),
    #[error("axis `{0}` is not strictly increasing")]
    Unordered(&'static str),
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<(), SweepError> {
    if axis.is_empty() {
        return Err(SweepError::EmptyAxis(name));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SweepError::Unordered(name));
    }
    Ok(())
}

/// Dimensionless parameters of one sweep cell: capacity `C_rho` and feeding
/// rate `f` substituted into `base`.
pub fn cell_params(base: &DimensionalParams, c_rho: f64, f: f64) -> Result<ModelParams, String> {
    derive_dimensionless(&base.with_capacity(c_rho).with_feeding(f)).map_err(|e| e.to_string())
}

/// Runs one simulation per `(C_rho, f)` cell. Cells are independent and run
/// in parallel; results are stored by cell index.
pub fn sweep_transition(
    base: &DimensionalParams,
    c_rho_axis: &[f64],
    f_axis: &[f64],
    grid: &GridSpec,
    timespec: &TimeSpec,
    initial: &State,
    threshold: f64,
) -> Result<SweepResult, SweepError> {
    check_axis("c_rho", c_rho_axis)?;
    check_axis("f", f_axis)?;
    let cols = f_axis.len();
    let cells = (0..c_rho_axis.len() * cols)
        .into_par_iter()
        .map(|idx| {
            let (c_rho, f) = (c_rho_axis[idx / cols], f_axis[idx % cols]);
            evaluate_cell(base, c_rho, f, grid, timespec, initial, threshold)
        })
        .collect();
    Ok(SweepResult {
        c_rho_values: c_rho_axis.to_vec(),
        f_values: f_axis.to_vec(),
        cells,
    })
}

pub fn evaluate_cell(
    base: &DimensionalParams,
    c_rho: f64,
    f: f64,
    grid: &GridSpec,
    timespec: &TimeSpec,
    initial: &State,
    threshold: f64,
) -> CellOutcome {
    let p = match cell_params(base, c_rho, f) {
        Ok(p) => p,
        Err(e) => {
            return CellOutcome {
                growth_rate: f64::NAN,
                classification: Err(e),
            }
        }
    };
    match run_simulation(&p, grid, timespec, initial) {
        Ok(record) => CellOutcome {
            growth_rate: record.final_growth_rate,
            classification: Ok(classify_clogging(&record, threshold)),
        },
        Err(e) => CellOutcome {
            growth_rate: e.partial.final_growth_rate,
            classification: Err(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_spec(record_every: usize) -> TimeSpec {
        TimeSpec::new(0.01, 2.0, record_every).unwrap()
    }

    #[test]
    fn idle_system_records_zeros() {
        let grid = GridSpec::new(8).unwrap();
        let p = ModelParams {
            omega: 0.0,
            f_tilde: 0.0,
            ..ModelParams::default()
        };
        let rec = run_simulation(&p, &grid, &short_spec(10), &State::zeros(9)).unwrap();
        assert_eq!(rec.len(), 21);
        for series in [&rec.avg_v1, &rec.avg_v2, &rec.sigma1, &rec.sigma2, &rec.c_value] {
            assert!(series.iter().all(|&v| v == 0.0));
        }
        assert_eq!(rec.final_growth_rate, 0.0);
        assert_eq!(classify_clogging(&rec, DEFAULT_THRESHOLD), Classification::Converged);
    }

    #[test]
    fn record_shapes_and_times() {
        let grid = GridSpec::new(6).unwrap();
        let p = ModelParams::default();
        let ts = TimeSpec::new(0.01, 1.0, 30).unwrap();
        let rec = run_simulation(&p, &grid, &ts, &State::zeros(7)).unwrap();
        // steps 0, 30, 60, 90 and the final step 100
        assert_eq!(rec.times.len(), 5);
        assert_eq!(*rec.times.last().unwrap(), 1.0);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(rec.heatmap_v1.len(), 5);
        assert!(rec.heatmap_v2.iter().all(|row| row.len() == 7));
        for v in [&rec.avg_v2, &rec.sigma1, &rec.sigma2, &rec.c_value, &rec.f_tilde_value] {
            assert_eq!(v.len(), 5);
        }
    }

    #[test]
    fn decimation_agrees_on_shared_times() {
        let grid = GridSpec::new(8).unwrap();
        let p = ModelParams::default();
        let fine = run_simulation(&p, &grid, &short_spec(1), &State::zeros(9)).unwrap();
        let coarse = run_simulation(&p, &grid, &short_spec(10), &State::zeros(9)).unwrap();
        for (i, t) in coarse.times.iter().enumerate() {
            let j = fine.times.iter().position(|s| s == t).unwrap();
            assert_eq!(fine.heatmap_v1[j], coarse.heatmap_v1[i]);
            assert_eq!(fine.sigma2[j], coarse.sigma2[i]);
        }
    }

    #[test]
    fn blowup_returns_partial_record() {
        let grid = GridSpec::new(4).unwrap();
        let p = ModelParams::default();
        let mut init = State::zeros(5);
        init.v1[2] = 5e11;
        let ts = TimeSpec::new(0.01, 1.0, 1).unwrap();
        let p = ModelParams { f_tilde: 1e15, ..p };
        let err = run_simulation(&p, &grid, &ts, &init).unwrap_err();
        assert_eq!(err.step, 1);
        assert_eq!(err.partial.len(), 1);
        assert!(matches!(err.source, StepError::Blowup { .. }));
    }

    fn synthetic(times: Vec<f64>, avg: Vec<f64>) -> RunRecord {
        let mut r = RunRecord {
            times,
            avg_v1: avg,
            ..RunRecord::default()
        };
        r.finish();
        r
    }

    #[test]
    fn classification_rules() {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 50.0).collect();
        let flat = synthetic(t.clone(), vec![2.0; 101]);
        assert_eq!(flat.final_growth_rate, 0.0);
        assert_eq!(classify_clogging(&flat, 1e-3), Classification::Converged);

        let growing = synthetic(t.clone(), t.iter().map(|x| 0.01 * x).collect());
        assert_eq!(classify_clogging(&growing, 1e-3), Classification::Clogging);
        let (slope, r2) = growing.last_decade_linear_fit();
        assert!((slope - 0.01).abs() < 1e-12 && r2 > 0.999_999);

        // slow drift: slope below the threshold but still moving by > 1%
        let drift = synthetic(t.clone(), t.iter().map(|x| 1.0 + 1e-4 * x).collect());
        assert_eq!(classify_clogging(&drift, 1e-3), Classification::Marginal);

        let decay = synthetic(t.clone(), t.iter().map(|x| -0.01 * x).collect());
        assert_eq!(classify_clogging(&decay, 1e-3), Classification::Marginal);
    }

    #[test]
    fn linear_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert_eq!(linear_fit(&x, &y), (2.0, 1.0));
        assert_eq!(linear_fit(&[1.0], &[1.0]), (0.0, 0.0));
    }

    #[test]
    fn sweep_shape_and_single_cell() {
        let grid = GridSpec::new(8).unwrap();
        let ts = TimeSpec::new(0.05, 2.0, 10).unwrap();
        let base = DimensionalParams::default();
        let init = State::zeros(9);
        let c: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
        let f: Vec<f64> = (1..=15).map(|k| 0.2 * k as f64).collect();
        let res = sweep_transition(&base, &c, &f, &grid, &ts, &init, 1e-3).unwrap();
        assert_eq!(res.cells.len(), 150);
        assert!(res.cells.iter().all(|c| c.classification.is_ok()));
        assert_eq!(res.growth_rate().len(), 10);
        assert_eq!(res.classification()[0].len(), 15);

        let one = sweep_transition(&base, &[0.5], &[1.25], &grid, &ts, &init, 1e-3).unwrap();
        let p = cell_params(&base, 0.5, 1.25).unwrap();
        let rec = run_simulation(&p, &grid, &ts, &init).unwrap();
        assert_eq!(one.cells[0].growth_rate, rec.final_growth_rate);
        assert_eq!(one.cells[0].classification, Ok(classify_clogging(&rec, 1e-3)));
        assert_eq!(res.cell(1, 5), &evaluate_cell(&base, c[1], f[5], &grid, &ts, &init, 1e-3));
    }

    #[test]
    fn sweep_axis_validation() {
        let grid = GridSpec::new(8).unwrap();
        let ts = short_spec(10);
        let base = DimensionalParams::default();
        let init = State::zeros(9);
        assert_eq!(
            sweep_transition(&base, &[], &[1.0], &grid, &ts, &init, 1e-3),
            Err(SweepError::EmptyAxis("c_rho"))
        );
        assert_eq!(
            sweep_transition(&base, &[1.0], &[1.0, 1.0], &grid, &ts, &init, 1e-3),
            Err(SweepError::Unordered("f"))
        );
    }

    #[test]
    fn bad_cell_is_recorded_not_fatal() {
        let grid = GridSpec::new(8).unwrap();
        let ts = short_spec(10);
        let init = State::zeros(9);
        let res = sweep_transition(
            &DimensionalParams::default(),
            &[-1.0, 1.0],
            &[0.5],
            &grid,
            &ts,
            &init,
            1e-3,
        )
        .unwrap();
        assert!(res.cells[0].classification.is_err());
        assert!(res.cells[1].classification.is_ok());
    }
}
