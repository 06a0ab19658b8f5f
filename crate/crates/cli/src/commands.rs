//! Subcommand implementations: argument resolution, report
//! construction, and artifact emission.
//!
//! Every report is built as a single string so stdout and the
//! artifact file carry identical bytes. Numbers are printed with 12
//! significant digits and metadata lines start with `#`.

use anyhow::{Context, Result};
use clap::ArgMatches;
use fourpi_core::cavity::{cavity_figures, p_abs_cav, single_pass_probability};
use fourpi_core::coupling::{axial_hole_extension, pupil_to_angular, spatial_overlap};
use fourpi_core::temporal::{excite_with, sweep_bandwidth, ExciteOptions};
use fourpi_core::transitions::{check_two_level, registry};
use fourpi_core::{
    beam, Cavity, CouplingReport, DipoleKind, ParabolicMirror, PulseEnvelope, PulseShape, PupilMap,
    PupilPolarization, TwoLevelAtom,
};
use serde_json::json;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::config::{Overlay, UsageError};

pub fn fmt_num(x: f64) -> String {
    format!("{:.11e}", x)
}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

fn parse_dipole(name: &str) -> Result<DipoleKind> {
    name.parse::<DipoleKind>().map_err(|e| usage(e.to_string()))
}

fn parse_polarization(name: &str) -> Result<PupilPolarization> {
    match name {
        "radial" => Ok(PupilPolarization::Radial),
        "circular" => Ok(PupilPolarization::Circular),
        other => Err(usage(format!(
            "polarization must be radial or circular, got {other:?}"
        ))),
    }
}

fn format_choice(overlay: &Overlay, matches: &ArgMatches, default: &str) -> Result<String> {
    let choice = overlay
        .opt_string(matches, "format")
        .unwrap_or_else(|| default.to_string());
    match choice.as_str() {
        "csv" | "json" => Ok(choice),
        other => Err(usage(format!("format must be csv or json, got {other:?}"))),
    }
}

fn pretty_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain values serialize");
    s.push('\n');
    s
}

/// Prints each report to stdout and mirrors it into the output
/// directory when one is configured.
pub struct Emitter {
    outdir: Option<String>,
}

impl Emitter {
    pub fn new(overlay: &Overlay, matches: &ArgMatches) -> Self {
        Self {
            outdir: overlay.outdir(matches),
        }
    }

    pub fn for_dir(dir: &str) -> Self {
        Self {
            outdir: Some(dir.to_string()),
        }
    }

    pub fn emit(&self, filename: &str, content: &str) -> Result<()> {
        self.write_only(filename, content)?;
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        if let Err(err) = lock
            .write_all(content.as_bytes())
            .and_then(|()| lock.flush())
        {
            if err.kind() == io::ErrorKind::BrokenPipe {
                // Downstream closed the pipe; the report is complete
                // as far as the reader cares, so stop quietly.
                std::process::exit(0);
            }
            return Err(err.into());
        }
        Ok(())
    }

    pub fn write_only(&self, filename: &str, content: &str) -> Result<()> {
        let Some(dir) = &self.outdir else {
            return Ok(());
        };
        fs::create_dir_all(dir).with_context(|| format!("cannot create {dir}"))?;
        let path = Path::new(dir).join(filename);
        fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

// ---------------------------------------------------------------- coverage

pub fn coverage_table(
    focal_length: f64,
    depths: &[f64],
    kind: DipoleKind,
    format: &str,
) -> Result<String> {
    let mut rows = Vec::with_capacity(depths.len());
    for &depth in depths {
        let mirror = ParabolicMirror::new(focal_length, depth)?;
        let domain = mirror.coverage_domain();
        rows.push((
            depth,
            mirror.rim_angle(),
            kind.weighted_solid_angle(&domain),
            kind.coverage_fraction(&domain),
        ));
    }
    if format == "json" {
        let rows: Vec<_> = rows
            .iter()
            .map(|&(d, angle, sr, fraction)| {
                json!({
                    "depth": d,
                    "rim_angle_rad": angle,
                    "weighted_sr": sr,
                    "coverage_fraction": fraction,
                })
            })
            .collect();
        return Ok(pretty_json(&json!({
            "focal_length": focal_length,
            "dipole": kind.to_string(),
            "rows": rows,
        })));
    }
    let mut out = String::new();
    writeln!(out, "# focal_length={}", fmt_num(focal_length))?;
    writeln!(out, "# dipole={kind}")?;
    writeln!(out, "depth,rim_angle_rad,weighted_sr,coverage_fraction")?;
    for (d, angle, sr, fraction) in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_num(d),
            fmt_num(angle),
            fmt_num(sr),
            fmt_num(fraction)
        )?;
    }
    Ok(out)
}

pub fn coverage(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let focal_length = overlay.f64(matches, "f")?;
    let kind = parse_dipole(&overlay.string(matches, "dipole"))?;
    let depth_min = overlay.opt_f64(matches, "depth-min")?;
    let depth_max = overlay.opt_f64(matches, "depth-max")?;
    let depths = match (depth_min, depth_max) {
        (None, None) => vec![overlay.f64(matches, "depth")?],
        (Some(lo), Some(hi)) => {
            let steps = overlay.usize(matches, "steps")?;
            // Comparison is false for NaN, so NaN bounds fail too.
            let ascending = hi > lo;
            if steps < 2 || !ascending {
                return Err(usage(
                    "a depth sweep needs depth-min < depth-max and steps >= 2",
                ));
            }
            (0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect()
        }
        _ => return Err(usage("provide both depth-min and depth-max for a sweep")),
    };
    let format = format_choice(overlay, matches, "csv")?;
    let content = coverage_table(focal_length, &depths, kind, &format)?;
    Emitter::new(overlay, matches).emit(&format!("coverage.{format}"), &content)
}

// ----------------------------------------------------------------- profile

pub fn profile_report(
    focal_length: f64,
    depth: f64,
    kind: DipoleKind,
    samples: usize,
    format: &str,
) -> Result<String> {
    let mirror = ParabolicMirror::new(focal_length, depth)?;
    let profile = beam::ideal_profile(kind, &mirror, samples)?;
    let audit = beam::profile_power_check(&profile, kind, &mirror)?;
    if format == "json" {
        let f2 = focal_length * focal_length;
        let scaled: Vec<_> = profile
            .samples()
            .iter()
            .map(|&(rho, intensity)| json!([rho / focal_length, intensity * f2]))
            .collect();
        return Ok(pretty_json(&json!({
            "focal_length": focal_length,
            "depth": depth,
            "dipole": kind.to_string(),
            "power_audit": audit,
            "radius_unit": "focal_length",
            "samples": scaled,
        })));
    }
    let mut out = String::new();
    writeln!(out, "# dipole={kind}")?;
    writeln!(out, "# focal_length={}", fmt_num(focal_length))?;
    writeln!(out, "# depth={}", fmt_num(depth))?;
    writeln!(out, "# power_audit={}", fmt_num(audit))?;
    out.push_str(&profile.to_csv(focal_length));
    Ok(out)
}

pub fn profile(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let focal_length = overlay.f64(matches, "f")?;
    let depth = overlay.f64(matches, "depth")?;
    let kind = parse_dipole(&overlay.string(matches, "dipole"))?;
    let samples = overlay.usize(matches, "samples")?;
    let format = format_choice(overlay, matches, "csv")?;
    let content = profile_report(focal_length, depth, kind, samples, &format)?;
    let name = format!("profile_{kind}.{format}");
    Emitter::new(overlay, matches).emit(&name, &content)
}

// ----------------------------------------------------------------- overlap

pub fn overlap_report(
    mirror: &ParabolicMirror,
    kind: DipoleKind,
    samples: usize,
    pupil: &PupilMap,
    hole_efficiency: Option<f64>,
    format: &str,
) -> Result<String> {
    let profile = beam::ideal_profile(kind, mirror, samples)?;
    let field = pupil_to_angular(&profile, pupil, mirror)?;
    let eta = spatial_overlap(&field, kind)?;
    let mut report = CouplingReport::from_spatial_efficiency(eta);
    if let Some(efficiency) = hole_efficiency {
        report = axial_hole_extension(&report, kind, &mirror.uncovered_domain(), efficiency)?;
    }
    if format == "csv" {
        let mut out = String::new();
        writeln!(out, "key,value")?;
        writeln!(
            out,
            "weighted_coverage_sr,{}",
            fmt_num(report.weighted_coverage_sr)
        )?;
        writeln!(
            out,
            "spatial_efficiency,{}",
            fmt_num(report.spatial_efficiency)
        )?;
        writeln!(
            out,
            "absorption_probability,{}",
            fmt_num(report.absorption_probability)
        )?;
        return Ok(out);
    }
    Ok(report.to_json_string())
}

fn default_polarization(kind: DipoleKind) -> PupilPolarization {
    match kind {
        DipoleKind::LinearPi => PupilPolarization::Radial,
        DipoleKind::CircularSigma => PupilPolarization::Circular,
    }
}

pub fn default_pupil(mirror: &ParabolicMirror, kind: DipoleKind) -> Result<PupilMap> {
    Ok(PupilMap::flat(
        mirror.rim_radius(),
        129,
        64,
        default_polarization(kind),
    )?)
}

pub fn overlap(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let focal_length = overlay.f64(matches, "f")?;
    let depth = overlay.f64(matches, "depth")?;
    let kind = parse_dipole(&overlay.string(matches, "dipole"))?;
    let samples = overlay.usize(matches, "samples")?;
    let mirror = ParabolicMirror::new(focal_length, depth)?;
    let pupil = match overlay.opt_string(matches, "aberration") {
        Some(path) => {
            let polarization = match overlay.opt_string(matches, "polarization") {
                Some(name) => parse_polarization(&name)?,
                None => default_polarization(kind),
            };
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read aberration map {path}"))?;
            PupilMap::from_csv(&text, polarization)?
        }
        None => default_pupil(&mirror, kind)?,
    };
    let hole_efficiency = overlay.opt_f64(matches, "hole-efficiency")?;
    let format = format_choice(overlay, matches, "json")?;
    let content = overlap_report(&mirror, kind, samples, &pupil, hole_efficiency, &format)?;
    let name = format!("overlap_report.{format}");
    Emitter::new(overlay, matches).emit(&name, &content)
}

// ------------------------------------------------------------------ excite

fn parse_shape(name: &str) -> Result<PulseShape> {
    match name {
        "rising" => Ok(PulseShape::RisingExponential),
        "falling" => Ok(PulseShape::FallingExponential),
        "gaussian" => Ok(PulseShape::Gaussian),
        other => Err(usage(format!(
            "shape must be rising, falling, or gaussian, got {other:?}"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn excite_report(
    atom: &TwoLevelAtom,
    shape: &PulseShape,
    shape_name: &str,
    time_constant: f64,
    window: Option<(f64, f64)>,
    eta: f64,
    detuning: f64,
    format: &str,
) -> Result<String> {
    let pulse = match window {
        Some(window) => PulseEnvelope::new(shape.clone(), time_constant, window)?,
        None => PulseEnvelope::with_auto_window(shape.clone(), time_constant)?,
    };
    let options = ExciteOptions {
        detuning,
        ..ExciteOptions::default()
    };
    let run = excite_with(atom, &pulse, eta, &options)?;
    if format == "json" {
        let trajectory: Vec<_> = run.trajectory.iter().map(|&(s, p)| json!([s, p])).collect();
        return Ok(pretty_json(&json!({
            "shape": shape_name,
            "time_constant_tau": time_constant,
            "eta": eta,
            "detuning": detuning,
            "max_probability": run.max_probability,
            "peak_time_tau": run.peak_time,
            "lifetime_s": run.lifetime_seconds,
            "trajectory": trajectory,
        })));
    }
    let mut out = String::new();
    writeln!(out, "# shape={shape_name}")?;
    writeln!(out, "# time_constant_tau={}", fmt_num(time_constant))?;
    writeln!(out, "# eta={}", fmt_num(eta))?;
    writeln!(out, "# detuning={}", fmt_num(detuning))?;
    writeln!(out, "# max_probability={}", fmt_num(run.max_probability))?;
    writeln!(out, "# peak_time_tau={}", fmt_num(run.peak_time))?;
    writeln!(out, "# lifetime_s={}", fmt_num(run.lifetime_seconds))?;
    out.push_str(&run.to_csv());
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn excite_sweep_report(
    atom: &TwoLevelAtom,
    shape: &PulseShape,
    shape_name: &str,
    time_constants: &[f64],
    eta: f64,
    detuning: f64,
    format: &str,
) -> Result<String> {
    let table = if detuning == 0.0 {
        sweep_bandwidth(atom, shape, time_constants, eta)?
    } else {
        let options = ExciteOptions {
            detuning,
            ..ExciteOptions::default()
        };
        let mut rows = Vec::with_capacity(time_constants.len());
        for &tc in time_constants {
            let pulse = PulseEnvelope::with_auto_window(shape.clone(), tc)?;
            let run = excite_with(atom, &pulse, eta, &options)?;
            rows.push((tc, run.max_probability));
        }
        rows
    };
    if format == "json" {
        let rows: Vec<_> = table.iter().map(|&(tc, p)| json!([tc, p])).collect();
        return Ok(pretty_json(&json!({
            "shape": shape_name,
            "eta": eta,
            "detuning": detuning,
            "rows": rows,
        })));
    }
    let mut out = String::new();
    writeln!(out, "# shape={shape_name}")?;
    writeln!(out, "# eta={}", fmt_num(eta))?;
    writeln!(out, "# detuning={}", fmt_num(detuning))?;
    writeln!(out, "time_constant_tau,max_probability")?;
    for (tc, p) in table {
        writeln!(out, "{},{}", fmt_num(tc), fmt_num(p))?;
    }
    Ok(out)
}

pub fn excite(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let shape_name = overlay.string(matches, "shape");
    let shape = parse_shape(&shape_name)?;
    let wavelength = overlay.f64(matches, "wavelength")?;
    let gamma = overlay.f64(matches, "gamma")?;
    let atom = TwoLevelAtom::new(wavelength, gamma)?;
    let eta = overlay.f64(matches, "eta")?;
    let detuning = overlay.f64(matches, "detuning")?;
    let sweep_min = overlay.opt_f64(matches, "sweep-min")?;
    let sweep_max = overlay.opt_f64(matches, "sweep-max")?;
    let format = format_choice(overlay, matches, "csv")?;
    let emitter = Emitter::new(overlay, matches);
    match (sweep_min, sweep_max) {
        (Some(lo), Some(hi)) => {
            let points = overlay.usize(matches, "sweep-points")?;
            if !(lo > 0.0 && hi > lo) || points < 2 {
                return Err(usage(
                    "a bandwidth sweep needs 0 < sweep-min < sweep-max and sweep-points >= 2",
                ));
            }
            let ratio = hi / lo;
            let time_constants: Vec<f64> = (0..points)
                .map(|i| lo * ratio.powf(i as f64 / (points - 1) as f64))
                .collect();
            let content = excite_sweep_report(
                &atom,
                &shape,
                &shape_name,
                &time_constants,
                eta,
                detuning,
                &format,
            )?;
            emitter.emit(&format!("excite_sweep_{shape_name}.{format}"), &content)
        }
        (None, None) => {
            let time_constant = overlay.f64(matches, "time-constant")?;
            let start = overlay.opt_f64(matches, "window-start")?;
            let end = overlay.opt_f64(matches, "window-end")?;
            let window = match (start, end) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    return Err(usage(
                        "provide both window-start and window-end, or neither",
                    ))
                }
            };
            let content = excite_report(
                &atom,
                &shape,
                &shape_name,
                time_constant,
                window,
                eta,
                detuning,
                &format,
            )?;
            emitter.emit(&format!("excite_{shape_name}.{format}"), &content)
        }
        _ => Err(usage("provide both sweep-min and sweep-max for a sweep")),
    }
}

// ------------------------------------------------------------------ cavity

pub fn cavity_report(
    wavelength: f64,
    waist: f64,
    reflectivity: f64,
    length: f64,
    gamma: f64,
    format: &str,
) -> Result<String> {
    let cavity = Cavity::new(reflectivity, length, waist)?;
    let atom = TwoLevelAtom::new(wavelength, gamma)?;
    let figures = cavity_figures(&atom, &cavity)?;
    let single_pass = single_pass_probability(wavelength, &cavity)?;
    let absorption = p_abs_cav(figures.f_omega)?;
    let identity_deviation = (figures.f_g / figures.f_omega - 1.0).abs();
    if format == "csv" {
        let mut out = String::new();
        writeln!(out, "key,value")?;
        for (key, value) in [
            ("pass_count", figures.pass_count),
            ("single_pass_probability", single_pass),
            ("f_omega", figures.f_omega),
            ("f_g", figures.f_g),
            ("coupling_g_per_s", figures.coupling_g),
            ("kappa_per_s", figures.kappa),
            ("gamma_per_s", figures.gamma),
            ("p_abs_cav", absorption),
            ("identity_relative_deviation", identity_deviation),
        ] {
            writeln!(out, "{key},{}", fmt_num(value))?;
        }
        return Ok(out);
    }
    Ok(pretty_json(&json!({
        "input": {
            "wavelength_m": wavelength,
            "waist_m": waist,
            "reflectivity": reflectivity,
            "length_m": length,
            "gamma_per_s": gamma,
        },
        "pass_count": figures.pass_count,
        "single_pass_probability": single_pass,
        "f_omega": figures.f_omega,
        "f_g": figures.f_g,
        "coupling_g_per_s": figures.coupling_g,
        "kappa_per_s": figures.kappa,
        "p_abs_cav": absorption,
        "identity_relative_deviation": identity_deviation,
        "identity_ok": identity_deviation <= 1e-10,
        "paraxial": cavity.is_paraxial(wavelength),
    })))
}

pub fn cavity(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let wavelength = overlay.f64(matches, "lambda")?;
    let waist = overlay.f64(matches, "w0")?;
    let reflectivity = overlay.f64(matches, "reflectivity")?;
    let length = overlay.f64(matches, "length")?;
    let gamma = overlay.f64(matches, "gamma")?;
    let format = format_choice(overlay, matches, "json")?;
    let content = cavity_report(wavelength, waist, reflectivity, length, gamma, &format)?;
    let name = format!("cavity_report.{format}");
    Emitter::new(overlay, matches).emit(&name, &content)
}

// ------------------------------------------------------------- transitions

pub fn transitions_list_report(format: &str) -> String {
    let entries = registry();
    if format == "json" {
        let rows: Vec<_> = entries
            .iter()
            .map(|c| {
                json!({
                    "species": c.species(),
                    "protons": c.proton_count(),
                    "neutrons": c.neutron_count(),
                    "nuclear_spin": c.nuclear_spin(),
                    "j_ground": c.j_ground(),
                    "j_excited": c.j_excited(),
                    "wavelength_m": c.wavelength(),
                    "decay_channels": c.decay_channels(),
                })
            })
            .collect();
        return pretty_json(&json!(rows));
    }
    let mut out = String::from(
        "species,protons,neutrons,nuclear_spin,j_ground,j_excited,wavelength_nm,decay_channels\n",
    );
    for c in &entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.species(),
            c.proton_count(),
            c.neutron_count(),
            fmt_num(c.nuclear_spin()),
            fmt_num(c.j_ground()),
            fmt_num(c.j_excited()),
            fmt_num(c.wavelength() * 1e9),
            c.decay_channels()
        );
    }
    out
}

pub fn transitions_check_report(format: &str) -> String {
    let entries = registry();
    if format == "json" {
        let rows: Vec<_> = entries
            .iter()
            .map(|c| {
                let verdict = check_two_level(c);
                let violations: Vec<String> =
                    verdict.violations().iter().map(|v| v.to_string()).collect();
                json!({
                    "species": c.species(),
                    "pass": verdict.is_pass(),
                    "violations": violations,
                })
            })
            .collect();
        return pretty_json(&json!(rows));
    }
    let mut out = String::new();
    for c in &entries {
        let verdict = check_two_level(c);
        if verdict.is_pass() {
            let _ = writeln!(out, "{}: PASS", c.species());
        } else {
            let detail: Vec<String> = verdict.violations().iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}: FAIL ({})", c.species(), detail.join("; "));
        }
    }
    out
}

pub fn transitions(matches: &ArgMatches, overlay: &Overlay) -> Result<()> {
    let action = matches
        .get_one::<String>("action")
        .expect("action is required");
    let format = format_choice(overlay, matches, "csv")?;
    let (name, content) = match action.as_str() {
        "list" => (
            format!(
                "transitions_list.{}",
                if format == "json" { "json" } else { "csv" }
            ),
            transitions_list_report(&format),
        ),
        "check" => (
            format!(
                "transitions_check.{}",
                if format == "json" { "json" } else { "txt" }
            ),
            transitions_check_report(&format),
        ),
        other => return Err(usage(format!("unknown action {other:?}"))),
    };
    Emitter::new(overlay, matches).emit(&name, &content)
}
