use std::path::PathBuf;

use otkit::reservoir::{
    box_counting_dimension, bundled_iris, evaluate_split, first_period_doubling, integrate_delay_system, iris_states,
    load_iris, map_bifurcation, phase_portrait, ConfusionMatrix, DelayFeedbackConfig, History, Stimulus,
    IRIS_SPECIES,
};
use serde_json::json;

use crate::args::ReservoirAction;
use crate::config::{OectNode, ReservoirSection};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, RunContext, Sheet};
use crate::units::{Column, Quantity};

/// Trajectory rows are thinned to at most this many.
const MAX_TRAJECTORY_ROWS: usize = 100_000;

pub fn run(action: &ReservoirAction, cfg: &ReservoirSection, ctx: &mut RunContext) -> CliResult<()> {
    match action {
        ReservoirAction::Simulate => simulate(cfg, ctx),
        ReservoirAction::Bifurcation => bifurcation(cfg, ctx),
        ReservoirAction::Iris { input, splits } => iris(cfg, input.as_ref(), *splits, ctx),
    }
}

fn delay_config(node: &OectNode, kind: crate::config::NodeKind, tau_nl: f64, tau: f64, gain: f64) -> DelayFeedbackConfig {
    DelayFeedbackConfig::new(tau_nl, tau, gain, node.nonlinearity(kind))
}

fn simulate(cfg: &ReservoirSection, ctx: &mut RunContext) -> CliResult<()> {
    let d = &cfg.delay;
    let dc = DelayFeedbackConfig {
        step: d.step,
        history: History::Constant(d.history),
        ..delay_config(&cfg.oect, d.node, d.tau_nl, d.tau, d.gain)
    };
    let traj = integrate_delay_system(&dc, |_| Stimulus::ZERO, d.horizon)?;
    let stride = traj.len().div_ceil(MAX_TRAJECTORY_ROWS).max(1);
    let mut sheet = Sheet::new(&[Column::new("t", Quantity::Time), Column::new("y", Quantity::Plain)]);
    for n in (0..traj.len()).step_by(stride) {
        sheet.push(vec![traj.time(n).into(), traj.values[n].into()]);
    }
    ctx.write_sheet("trajectory.csv", &sheet)?;

    let dimension = if d.horizon > d.transient + 2.0 * d.tau {
        let pp = phase_portrait(&traj, d.tau, d.transient)?;
        let bc = box_counting_dimension(&pp.points, d.box_eps_min, d.box_eps_max, d.box_scales)?;
        if bc.resolution_warning {
            log::warn!("box counting: too few points per occupied box at the finest scale");
        }
        Some(bc)
    } else {
        log::warn!("horizon too short for a phase portrait after the transient; dimension skipped");
        None
    };
    ctx.write_json("reservoir_simulate.json", &json!({ "row_stride": stride, "box_counting": dimension }))
}

fn bifurcation(cfg: &ReservoirSection, ctx: &mut RunContext) -> CliResult<()> {
    let b = &cfg.bifurcation;
    let gains = b.gains.values("reservoir.bifurcation.gains")?;
    let dc = DelayFeedbackConfig {
        history: History::Constant(b.history),
        ..delay_config(&cfg.oect, b.node, 0.0, 1.0, 1.0)
    };
    let columns = map_bifurcation(&dc, &gains, b.n_transient, b.n_sample, ctx.exec)?;
    let mut sheet = Sheet::new(&[Column::new("param", Quantity::Plain), Column::new("sample", Quantity::Plain)]);
    for c in &columns {
        for &s in &c.samples {
            sheet.push(vec![c.param.into(), s.into()]);
        }
    }
    ctx.write_sheet("bifurcation.csv", &sheet)?;
    ctx.write_json(
        "bifurcation.json",
        &json!({ "first_period_doubling": first_period_doubling(&columns, b.tolerance) }),
    )
}

fn iris(cfg: &ReservoirSection, input: Option<&PathBuf>, splits: u64, ctx: &mut RunContext) -> CliResult<()> {
    if splits == 0 {
        return Err(CliError::usage("--splits must be at least 1"));
    }
    let records = match input {
        Some(path) => {
            ctx.read_input(path)?;
            load_iris(path)?
        }
        None => bundled_iris(),
    };
    let ic = cfg.iris.to_config(&cfg.oect);
    let states = iris_states(&ic, &records, ctx.exec)?;

    let mut scores = Sheet::new(&[
        Column::new("split_seed", Quantity::Plain),
        Column::new("test_accuracy", Quantity::Plain),
        Column::new("train_accuracy", Quantity::Plain),
    ]);
    let mut total = ConfusionMatrix { counts: [[0; 3]; 3] };
    let mut accs = Vec::new();
    for seed in ctx.seed..ctx.seed + splits {
        let out = evaluate_split(&ic, &records, &states, seed)?;
        for (row, counts) in total.counts.iter_mut().zip(&out.confusion.counts) {
            for (a, b) in row.iter_mut().zip(counts) {
                *a += b;
            }
        }
        scores.push(vec![seed.into(), out.accuracy.into(), out.train_accuracy.into()]);
        accs.push(out.accuracy);
    }

    let mut confusion = Sheet::new(&[
        Column::new("predicted", Quantity::Plain),
        Column::new("true_setosa", Quantity::Plain),
        Column::new("true_versicolor", Quantity::Plain),
        Column::new("true_virginica", Quantity::Plain),
    ]);
    for (name, row) in IRIS_SPECIES.iter().zip(&total.counts) {
        let mut cells: Vec<Cell> = vec![(*name).into()];
        cells.extend(row.iter().map(|&c| Cell::from(c)));
        confusion.push(cells);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    ctx.write_sheet("iris_scores.csv", &scores)?;
    ctx.write_sheet("confusion.csv", &confusion)?;
    ctx.write_json(
        "iris.json",
        &json!({ "splits": splits, "mean_test_accuracy": mean, "pooled_accuracy": total.accuracy() }),
    )
}
