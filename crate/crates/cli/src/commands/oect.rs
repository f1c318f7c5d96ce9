use otkit::oect::{classify_transient, nernst_slope, transient_prefactor, turn_off_voltage};
use serde_json::json;

use crate::args::OectAction;
use crate::config::OectSection;
use crate::error::CliResult;
use crate::output::{RunContext, Sheet};
use crate::units::{Column, Quantity};

pub fn run(action: &OectAction, cfg: &OectSection, ctx: &mut RunContext) -> CliResult<()> {
    cfg.device.validate()?;
    match action {
        OectAction::Iv => iv(cfg, ctx),
        OectAction::Transient => transient(cfg, ctx),
        OectAction::Sense => sense(cfg, ctx),
    }
}

fn iv(cfg: &OectSection, ctx: &mut RunContext) -> CliResult<()> {
    let v_ds = cfg.v_ds.values("oect.v_ds")?;
    let mut sheet = Sheet::new(&[
        Column::new("v_gs", Quantity::Voltage),
        Column::new("v_ds", Quantity::Voltage),
        Column::new("current", Quantity::Current),
    ]);
    for &vg in &cfg.v_gs_output {
        for &vd in &v_ds {
            sheet.push(vec![vg.into(), vd.into(), cfg.device.steady_state_current(vg, vd).into()]);
        }
    }
    ctx.write_sheet("output.csv", &sheet)?;
    ctx.write_json(
        "oect_summary.json",
        &json!({
            "pinch_off_voltage_v": cfg.device.pinch_off_voltage(),
            "conductance_s": cfg.device.conductance(),
        }),
    )
}

fn transient(cfg: &OectSection, ctx: &mut RunContext) -> CliResult<()> {
    let tr = &cfg.transient;
    let d = &cfg.device;
    let (tau_e, tau_i) = d.time_constants(tr.v_ds, &cfg.electrolyte)?;
    let i_ss = d.steady_state_current(tr.v_gs, tr.v_ds);
    let delta = d.steady_state_current(0.0, tr.v_ds) - i_ss;
    let mut sheet = Sheet::new(&[Column::new("time", Quantity::Time), Column::new("current", Quantity::Current)]);
    for t in tr.time.values("oect.transient.time")? {
        sheet.push(vec![t.into(), d.transient_current(t, i_ss, delta, tau_e, tau_i)?.into()]);
    }
    ctx.write_sheet("transient.csv", &sheet)?;
    ctx.write_json(
        "oect_transient.json",
        &json!({
            "tau_e_s": tau_e,
            "tau_i_s": tau_i,
            "i_ss_a": i_ss,
            "delta_i_ss_a": delta,
            "prefactor": transient_prefactor(d.f_nonuniform, tau_e, tau_i),
            "shape": classify_transient(d.f_nonuniform, tau_e, tau_i),
        }),
    )
}

fn sense(cfg: &OectSection, ctx: &mut RunContext) -> CliResult<()> {
    let s = &cfg.sensing;
    let mut sheet = Sheet::new(&[
        Column::new("concentration", Quantity::Concentration),
        Column::new("v_to", Quantity::Voltage),
    ]);
    for c in s.concentrations.values("oect.sensing.concentrations")? {
        sheet.push(vec![c.into(), turn_off_voltage(c, s.slope, s.v_ref, s.c_ref)?.into()]);
    }
    ctx.write_sheet("turn_off.csv", &sheet)?;
    ctx.write_json(
        "oect_sensing.json",
        &json!({
            "slope_v_per_decade": s.slope,
            "nernst_slope_v_per_decade": nernst_slope(cfg.electrolyte.temperature, cfg.electrolyte.valence),
        }),
    )
}
