use otkit::electrothermal::{
    ndr_turning_points, pulsed_steady_temperature, sweep_voltage, trace_current_controlled, OperatingPoint,
};
use otkit::Error;
use serde_json::json;

use crate::args::OpbtAction;
use crate::config::OpbtSection;
use crate::error::CliResult;
use crate::output::{RunContext, Sheet};
use crate::units::{Column, Quantity};

const POINT: [Column; 4] = [
    Column::new("current", Quantity::Current),
    Column::new("voltage", Quantity::Voltage),
    Column::new("temperature", Quantity::Temperature),
    Column::new("stable", Quantity::Plain),
];

fn push_point(sheet: &mut Sheet, p: &OperatingPoint) {
    sheet.push(vec![p.current.into(), p.voltage.into(), p.temperature.into(), p.stable.into()]);
}

pub fn run(action: &OpbtAction, cfg: &OpbtSection, ctx: &mut RunContext) -> CliResult<()> {
    cfg.device.validate()?;
    match action {
        OpbtAction::Sweep => sweep(cfg, ctx),
        OpbtAction::Trace => trace(cfg, ctx),
        OpbtAction::Pulsed => pulsed(cfg, ctx),
    }
}

fn sweep(cfg: &OpbtSection, ctx: &mut RunContext) -> CliResult<()> {
    let voltages = cfg.voltages.values("opbt.voltages")?;
    let mut sheet = Sheet::new(&POINT);
    let mut runaway = Vec::new();
    let mut multistable = Vec::new();
    for (v, res) in voltages.iter().zip(sweep_voltage(&cfg.device, &voltages, ctx.exec)) {
        match res {
            Ok(roots) => {
                if roots.len() > 1 {
                    multistable.push(*v);
                }
                for r in &roots {
                    push_point(&mut sheet, r);
                }
            }
            Err(Error::ThermalRunaway { .. }) => runaway.push(*v),
            Err(e) => return Err(e.into()),
        }
    }
    if !runaway.is_empty() {
        log::warn!("thermal runaway at {} of {} voltages", runaway.len(), voltages.len());
    }
    ctx.write_sheet("voltage_sweep.csv", &sheet)?;
    ctx.write_json(
        "opbt_sweep.json",
        &json!({ "runaway_voltages_v": runaway, "multiple_root_voltages_v": multistable }),
    )
}

fn trace(cfg: &OpbtSection, ctx: &mut RunContext) -> CliResult<()> {
    let currents = cfg.currents.values("opbt.currents")?;
    let points = trace_current_controlled(&cfg.device, &currents, ctx.exec)?;
    let mut sheet = Sheet::new(&POINT);
    for p in &points {
        push_point(&mut sheet, p);
    }
    let turns: Vec<_> = ndr_turning_points(&points)
        .into_iter()
        .map(|i| json!({ "current_a": points[i].current, "voltage_v": points[i].voltage }))
        .collect();
    let peak_power = points.iter().map(OperatingPoint::power).fold(0.0, f64::max);
    ctx.write_sheet("current_trace.csv", &sheet)?;
    ctx.write_json(
        "opbt_trace.json",
        &json!({ "s_shaped": !turns.is_empty(), "turning_points": turns, "peak_power_w": peak_power }),
    )
}

fn pulsed(cfg: &OpbtSection, ctx: &mut RunContext) -> CliResult<()> {
    let voltages = cfg.pulse_voltages.values("opbt.pulse_voltages")?;
    let peaks = ctx.exec.map(&voltages, |&v| pulsed_steady_temperature(&cfg.device, &cfg.pulse, v));
    let mut sheet = Sheet::new(&[
        Column::new("voltage", Quantity::Voltage),
        Column::new("peak_temperature", Quantity::Temperature),
    ]);
    let mut failed = Vec::new();
    for (v, res) in voltages.iter().zip(peaks) {
        match res {
            Ok(t) => sheet.push(vec![(*v).into(), t.into()]),
            Err(e @ (Error::ThermalRunaway { .. } | Error::NonConvergence { .. })) => {
                log::warn!("V = {v}: {e}");
                failed.push(*v);
            }
            Err(e) => return Err(e.into()),
        }
    }
    ctx.write_sheet("pulsed.csv", &sheet)?;
    ctx.write_json("opbt_pulsed.json", &json!({ "pulse": cfg.pulse, "runaway_voltages_v": failed }))
}
