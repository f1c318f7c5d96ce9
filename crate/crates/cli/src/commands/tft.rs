use std::path::Path;

use otkit::tft::{tlm_extract, Tft, TlmPoint};
use serde_json::json;

use crate::args::TftAction;
use crate::config::TftSection;
use crate::error::CliResult;
use crate::ingest::{parse_csv, Schema};
use crate::output::{RunContext, Sheet};
use crate::units::{Column, Quantity};

const CURVE: [Column; 4] = [
    Column::new("v_gs", Quantity::Voltage),
    Column::new("v_ds", Quantity::Voltage),
    Column::new("i_d", Quantity::Current),
    Column::new("g_m", Quantity::Conductance),
];

pub fn run(action: &TftAction, cfg: &TftSection, ctx: &mut RunContext) -> CliResult<()> {
    match action {
        TftAction::Iv => iv(cfg, ctx),
        TftAction::Tlm { input } => tlm(input, ctx),
    }
}

fn iv(cfg: &TftSection, ctx: &mut RunContext) -> CliResult<()> {
    let t = Tft::new(cfg.device.clone())?;
    let v_gs = cfg.v_gs.values("tft.v_gs")?;
    let v_ds = cfg.v_ds.values("tft.v_ds")?;

    let mut transfer = Sheet::new(&CURVE);
    let mut peaks = Vec::new();
    for &vd in &cfg.v_ds_transfer {
        let mut peak = 0.0f64;
        for &vg in &v_gs {
            let gm = t.transconductance(vg, vd);
            peak = peak.max(gm.abs());
            transfer.push(vec![vg.into(), vd.into(), t.drain_current(vg, vd).into(), gm.into()]);
        }
        peaks.push(json!({
            "v_ds_v": vd,
            "peak_g_m_s": peak,
            "f_t_upper_bound_hz": t.transition_frequency(peak),
        }));
    }
    let mut output = Sheet::new(&CURVE);
    for &vg in &cfg.v_gs_output {
        for &vd in &v_ds {
            output.push(vec![vg.into(), vd.into(), t.drain_current(vg, vd).into(), t.transconductance(vg, vd).into()]);
        }
    }
    ctx.write_sheet("transfer.csv", &transfer)?;
    ctx.write_sheet("output.csv", &output)?;
    ctx.write_json(
        "tft_summary.json",
        &json!({
            "beta_a_per_v2": t.beta(),
            "min_capacitance_f": t.min_capacitance(),
            "transfer": peaks,
        }),
    )
}

fn tlm(input: &Path, ctx: &mut RunContext) -> CliResult<()> {
    let bytes = ctx.read_input(input)?;
    let table = parse_csv(&bytes, &input.display().to_string(), &Schema::tlm(), ctx.strict)?;
    let points: Vec<TlmPoint> = table.rows.iter().map(|r| TlmPoint { length: r[0], r_tot_w: r[1] }).collect();
    let fit = tlm_extract(&points)?;
    if !fit.physical {
        log::warn!("TLM fit has a negative intercept or slope; contact figures are not physical");
    }
    let mut sheet = Sheet::new(&[
        Column::new("length", Quantity::Length),
        Column::new("r_tot_w", Quantity::ResistanceLength),
        Column::new("fit_r_tot_w", Quantity::ResistanceLength),
    ]);
    for p in &points {
        sheet.push(vec![p.length.into(), p.r_tot_w.into(), (fit.r_c_w + fit.channel_slope * p.length).into()]);
    }
    ctx.write_sheet("tlm_fit.csv", &sheet)?;
    ctx.write_json("tlm.json", &fit)
}
