use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use otkit::impedance::{
    add_multiplicative_noise, circuit_impedance, classify_ion, diffusion_constant, extract_rw_star, fit_spectrum,
    synthesize, CalibrationPoint, FitReport, ImpedanceSample, ImpedanceSpectrum, SensorCalibration, SpeciesCurve,
};
use otkit::Error;
use serde_json::json;

use crate::args::ImpedanceAction;
use crate::config::ImpedanceSection;
use crate::error::{CliError, CliResult};
use crate::ingest::{parse_csv, Schema};
use crate::output::{RunContext, Sheet};
use crate::units::{Column, Quantity};

const OMEGA: Column = Column::new("omega", Quantity::AngularFrequency);
const Z_REAL: Column = Column::new("z_real", Quantity::Resistance);
const Z_IMAG: Column = Column::new("z_imag", Quantity::Resistance);

pub fn run(action: &ImpedanceAction, cfg: &ImpedanceSection, ctx: &mut RunContext) -> CliResult<()> {
    match action {
        ImpedanceAction::Simulate => simulate(cfg, ctx),
        ImpedanceAction::Fit { input } => fit(input, cfg, ctx),
        ImpedanceAction::Classify { calibration, queries } => classify(calibration, queries, ctx),
    }
}

fn simulate(cfg: &ImpedanceSection, ctx: &mut RunContext) -> CliResult<()> {
    cfg.model.validate()?;
    let omegas = cfg.omega.values("impedance.omega")?;
    let mut spec = synthesize(&cfg.model, &omegas);
    if cfg.noise > 0.0 {
        spec = add_multiplicative_noise(&spec, cfg.noise, ctx.seed);
    }
    let mut sheet = Sheet::new(&[OMEGA, Z_REAL, Z_IMAG]);
    for s in &spec.samples {
        sheet.push(vec![s.omega.into(), s.z.re.into(), s.z.im.into()]);
    }
    ctx.write_sheet("spectrum.csv", &sheet)
}

pub fn load_spectrum(path: &Path, ctx: &mut RunContext) -> CliResult<ImpedanceSpectrum> {
    let bytes = ctx.read_input(path)?;
    let table = parse_csv(&bytes, &path.display().to_string(), &Schema::spectrum(), ctx.strict)?;
    let weighted = table.optional_present[0];
    let samples = table
        .rows
        .iter()
        .map(|r| ImpedanceSample {
            omega: r[0],
            z: Complex64::new(r[1], r[2]),
            weight: weighted.then_some(r[3]),
        })
        .collect();
    Ok(ImpedanceSpectrum { samples })
}

fn fit(input: &Path, cfg: &ImpedanceSection, ctx: &mut RunContext) -> CliResult<()> {
    let spec = load_spectrum(input, ctx)?;
    let guess = cfg.guess.unwrap_or(cfg.model);
    let (report, failure) = match fit_spectrum(&spec, &guess, &cfg.fit) {
        Ok(r) => (r, None),
        Err(Error::FitNotConverged { best }) => {
            let msg = format!("fit did not converge after {} iterations; best-so-far written", best.iterations);
            (*best, Some(CliError::new(crate::error::Failure::Numeric, msg)))
        }
        Err(e) => return Err(e.into()),
    };
    let m = &report.model;

    let mut sheet = Sheet::new(&[
        OMEGA,
        Z_REAL,
        Z_IMAG,
        Column::new("model_real", Quantity::Resistance),
        Column::new("model_imag", Quantity::Resistance),
    ]);
    for s in &spec.samples {
        let z = circuit_impedance(m, s.omega)?;
        sheet.push(vec![s.omega.into(), s.z.re.into(), s.z.im.into(), z.re.into(), z.im.into()]);
    }
    let rw_star = extract_rw_star(m);
    let d = diffusion_constant(m.warburg.omega_d, cfg.electrode_distance)?;
    ctx.write_sheet("fit.csv", &sheet)?;
    ctx.write_json(
        "fit.json",
        &json!({
            "report": report,
            "r_w_star_ohm": rw_star,
            "electrode_distance_m": cfg.electrode_distance,
            "diffusion_constant_m2_s": d,
        }),
    )?;
    ctx.write("fit_report.txt", fit_text(&report, rw_star, d).as_bytes())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn fit_text(r: &FitReport, rw_star: f64, d: f64) -> String {
    let m = &r.model;
    let mut s = String::new();
    let _ = writeln!(s, "converged        {}", r.converged);
    let _ = writeln!(s, "iterations       {}", r.iterations);
    let _ = writeln!(s, "residual_norm    {:.6e}", r.residual_norm);
    let _ = writeln!(s, "rank_deficient   {}", r.rank_deficient);
    let _ = writeln!(s, "r_s_ohm          {:.6e}", m.r_s);
    let _ = writeln!(s, "r1_ohm           {:.6e}", m.rc1.r);
    let _ = writeln!(s, "c1_f             {:.6e}", m.rc1.c);
    let _ = writeln!(s, "r2_ohm           {:.6e}", m.rc2.r);
    let _ = writeln!(s, "c2_f             {:.6e}", m.rc2.c);
    let _ = writeln!(s, "r_w_ohm          {:.6e}", m.warburg.r_w);
    let _ = writeln!(s, "omega_d_rad_s    {:.6e}", m.warburg.omega_d);
    let _ = writeln!(s, "exponent         {:.6}", m.warburg.exponent);
    let _ = writeln!(s, "r_w_star_ohm     {rw_star:.6e}");
    let _ = writeln!(s, "diffusion_m2_s   {d:.6e}");
    let _ = writeln!(s, "relative standard errors:");
    for (p, e) in r.free_params.iter().zip(&r.relative_std_errors) {
        let _ = writeln!(s, "  {:<14} {e:.3e}", p.name());
    }
    s
}

fn load_calibration(dir: &Path, ctx: &mut RunContext) -> CliResult<SensorCalibration> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut curves = Vec::new();
    for path in files {
        let species = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let bytes = ctx.read_input(&path)?;
        let table = parse_csv(&bytes, &path.display().to_string(), &Schema::calibration(), ctx.strict)?;
        let points = table
            .rows
            .iter()
            .map(|r| CalibrationPoint { concentration: r[0], v_to: r[1], r_w_star: r[2] })
            .collect();
        curves.push(SpeciesCurve { species, points });
    }
    Ok(SensorCalibration::new(curves))
}

fn classify(dir: &Path, queries: &[(f64, f64)], ctx: &mut RunContext) -> CliResult<()> {
    let calib = load_calibration(dir, ctx)?;
    let mut sheet = Sheet::new(&[
        Column::new("v_to", Quantity::Voltage),
        Column::new("r_w_star", Quantity::Resistance),
        Column::new("species", Quantity::Plain),
        Column::new("concentration", Quantity::Concentration),
        Column::new("confidence", Quantity::Plain),
    ]);
    for &(v, r) in queries {
        let c = classify_ion(v, r, &calib)?;
        sheet.push(vec![v.into(), r.into(), c.species.into(), c.concentration.into(), c.confidence.into()]);
    }
    ctx.write_sheet("classification.csv", &sheet)
}
