use clogsim::discretization::GridSpec;
use clogsim::experiments::{cell_params, classify_clogging, run_simulation, Classification, DEFAULT_THRESHOLD};
use clogsim::model::{DimensionalParams, ModelParams, State};
use clogsim::output::{emit_run, RunSummary};
use clogsim::stepper::TimeSpec;

fn unit_data() -> State {
    State::uniform(33, 1.0, 1.0, 1.0, 1.0)
}

#[test]
fn converging_run_slope_decays_in_timeseries() {
    let p = ModelParams {
        f_tilde: 0.5,
        ..ModelParams::default()
    };
    let grid = GridSpec::new(32).unwrap();
    let ts = TimeSpec::new(0.01, 500.0, 100).unwrap();
    let rec = run_simulation(&p, &grid, &ts, &unit_data()).unwrap();
    let summary = RunSummary {
        classification: classify_clogging(&rec, DEFAULT_THRESHOLD),
        wall_time_s: 0.0,
        seed: 0,
        config_hash: String::new(),
    };
    assert_eq!(summary.classification, Classification::Converged);
    let dir = tempfile::tempdir().unwrap();
    emit_run(&rec, &summary, &grid, dir.path()).unwrap();

    let mut reader = csv::Reader::from_path(dir.path().join("timeseries.csv")).unwrap();
    let rows: Vec<(f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    let tail: Vec<&(f64, f64)> = rows.iter().filter(|(t, _)| *t >= 450.0).collect();
    let slopes: Vec<f64> = tail.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).collect();
    let scale = rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    for w in slopes.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * scale, "{w:?}");
    }
    assert!(*slopes.last().unwrap() < 1e-6);
}

#[test]
fn column_end_points() {
    let grid = GridSpec::new(32).unwrap();
    let ts = TimeSpec::new(0.01, 5000.0, 100).unwrap();
    let base = DimensionalParams::default();
    let low = run_simulation(&cell_params(&base, 0.5, 0.25).unwrap(), &grid, &ts, &unit_data()).unwrap();
    assert_eq!(classify_clogging(&low, DEFAULT_THRESHOLD), Classification::Converged);
    let high = run_simulation(&cell_params(&base, 0.5, 1.25).unwrap(), &grid, &ts, &unit_data()).unwrap();
    assert_eq!(classify_clogging(&high, DEFAULT_THRESHOLD), Classification::Clogging);
    let (_, r2) = high.last_decade_linear_fit();
    assert!(r2 >= 0.99);
}
