use otkit::synapse::{
    long_term_decay, read_digit, run_pavlov_protocol, train_digit_network, Bitmap, GrowthRule, PavlovOutcome,
    SynapseState, HOURS_48,
};
use serde_json::json;

use crate::args::SynapseAction;
use crate::config::SynapseSection;
use crate::error::{CliError, CliResult};
use crate::output::{RunContext, Sheet};
use crate::units::{Column, Quantity};

pub fn run(action: &SynapseAction, cfg: &SynapseSection, ctx: &mut RunContext) -> CliResult<()> {
    match action {
        SynapseAction::Pavlov => pavlov(cfg, ctx),
        SynapseAction::Digits { trained, queries } => digits(cfg, trained, queries, ctx),
        SynapseAction::Decay => decay(cfg, ctx),
    }
}

/// Growth jitter, when enabled, draws from the run seed.
fn seeded(rule: &GrowthRule, seed: u64) -> GrowthRule {
    let mut r = *rule;
    if let Some(j) = r.jitter.as_mut() {
        j.seed = seed;
    }
    r
}

fn pavlov(cfg: &SynapseSection, ctx: &mut RunContext) -> CliResult<()> {
    let out = run_pavlov_protocol(&seeded(&cfg.rule, ctx.seed), &cfg.pavlov)?;
    let mut sheet = Sheet::new(&[
        Column::new("phase", Quantity::Plain),
        Column::new("bell_salivation_link", Quantity::Plain),
        Column::new("bell_alone_salivates", Quantity::Plain),
        Column::new("expected_link", Quantity::Plain),
        Column::new("expected_salivates", Quantity::Plain),
    ]);
    for (p, e) in out.phases.iter().zip(PavlovOutcome::expected()) {
        sheet.push(vec![
            p.label.into(),
            p.bell_salivation_link.into(),
            p.bell_alone_salivates.into(),
            e.bell_salivation_link.into(),
            e.bell_alone_salivates.into(),
        ]);
    }
    ctx.write_sheet("pavlov.csv", &sheet)?;
    ctx.write_json(
        "pavlov.json",
        &json!({ "matches_expected": out.matches_expected(), "final_conductance_s": out.final_conductance }),
    )
}

fn parse_bitmap(s: &str) -> CliResult<Bitmap> {
    let t = s.trim();
    if let Ok(d) = t.parse::<usize>() {
        if t.len() == 1 {
            return Ok(Bitmap::digit(d));
        }
    }
    t.parse::<Bitmap>().map_err(|e| CliError::usage(format!("bitmap '{s}': {e}")))
}

fn bits(b: &Bitmap) -> String {
    b.0.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

fn digits(cfg: &SynapseSection, trained: &str, queries: &[String], ctx: &mut RunContext) -> CliResult<()> {
    let mut dc = cfg.digits;
    dc.rule = seeded(&dc.rule, ctx.seed);
    let pattern = parse_bitmap(trained)?;
    let labelled: Vec<(String, Bitmap)> = if queries.is_empty() {
        let mut v: Vec<(String, Bitmap)> = (0..10).map(|d| (format!("digit_{d}"), Bitmap::digit(d))).collect();
        v.extend((0..15).map(|k| (format!("flip_{k}"), pattern.flipped(k))));
        v.push(("inverse".into(), pattern.inverted()));
        v
    } else {
        queries.iter().map(|q| Ok((q.clone(), parse_bitmap(q)?))).collect::<CliResult<_>>()?
    };
    let net = train_digit_network(&pattern, &dc)?;
    let mut sheet = Sheet::new(&[
        Column::new("query", Quantity::Plain),
        Column::new("bitmap", Quantity::Plain),
        Column::new("false_pixels", Quantity::Plain),
        Column::new("score", Quantity::Plain),
    ]);
    for (label, q) in &labelled {
        let score = read_digit(&net, &pattern, q, &dc)?;
        sheet.push(vec![label.as_str().into(), bits(q).into(), pattern.hamming(q).into(), score.into()]);
    }
    ctx.write_sheet("digit_scores.csv", &sheet)?;
    ctx.write_json("digits.json", &json!({ "trained": bits(&pattern), "grid": pattern.grid() }))
}

fn decay(cfg: &SynapseSection, ctx: &mut RunContext) -> CliResult<()> {
    let hours = cfg.decay_hours.values("synapse.decay_hours")?;
    let mut sheet = Sheet::new(&[
        Column::new("reinforcement", Quantity::Plain),
        Column::new("time", Quantity::Time),
        Column::new("retention", Quantity::Plain),
    ]);
    let mut at_48h = Vec::new();
    for &r in &cfg.reinforcement {
        let s = SynapseState { conductance: 1.0, reinforcement: r, exists: true, growth_rate: 1.0 };
        for &h in &hours {
            let t = h * 3600.0;
            sheet.push(vec![r.into(), t.into(), long_term_decay(&s, t, &cfg.decay)?.conductance.into()]);
        }
        at_48h.push(json!({
            "reinforcement": r,
            "retention": long_term_decay(&s, HOURS_48, &cfg.decay)?.conductance,
        }));
    }
    ctx.write_sheet("decay.csv", &sheet)?;
    ctx.write_json("decay.json", &json!({ "retention_after_48h": at_48h }))
}
