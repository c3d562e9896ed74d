//! The `modeswim` commands. Each writes its outputs plus `manifest.json` into
//! an output directory and returns a human-readable report.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{
    cantilever_frequencies, ss_mode_grid, ss_spectrum_hz, superpose_degenerate_deg, AnalyticPlate, ModeIndex,
};
use crate::config::RunConfig;
use crate::drive::{movement_map, verify_reversal, wrap_phase, ActuatorPatch};
use crate::eigen::DofMirror;
use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, PlateGeometry};
use crate::fluid::{beam_added_mass_per_length, calibrate, wet_ratio, FluidModel};
use crate::grid::fmt9;
use crate::model::{resample, ModalAnalysis, PlateModel};

pub const TOOL: &str = "modeswim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Result of a command: overall verdict and the printed report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub report: String,
    /// Set when an earlier manifest in the output directory was produced from
    /// a different configuration.
    pub digest_warning: Option<String>,
}

/// Process exit status for an error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::Domain(_) | Error::Shape(_) | Error::Calibration(_) | Error::Io(_) => 2,
        Error::GridPoint { source, .. } => exit_code(source),
        _ => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_name: String,
    pub config_sha256: String,
    /// Fluid calibration factor Λ used by the run, when a fluid was involved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_factor: Option<f64>,
    pub outputs: Vec<String>,
}

pub fn config_digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the manifest, returning a warning if a previous manifest in `out`
/// recorded a different config digest.
pub fn write_manifest(
    out: &Path,
    command: &str,
    config: &RunConfig,
    text: &str,
    calibration_factor: Option<f64>,
    outputs: &[String],
) -> Result<Option<String>> {
    let path = out.join("manifest.json");
    let digest = config_digest(text);
    let warning = fs::read_to_string(&path)
        .ok()
        .and_then(|old| serde_json::from_str::<Manifest>(&old).ok())
        .filter(|m| m.config_sha256 != digest)
        .map(|m| format!("warning: {} was written from config {}, now {}", path.display(), m.config_sha256, digest));
    let mut outputs = outputs.to_vec();
    outputs.sort();
    let manifest = Manifest {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: command.into(),
        config_name: config.meta.name.clone(),
        config_sha256: digest,
        calibration_factor,
        outputs,
    };
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, body + "\n")?;
    Ok(warning)
}

fn write(out: &Path, name: &str, body: &str, outputs: &mut Vec<String>) -> Result<()> {
    fs::write(out.join(name), body)?;
    outputs.push(name.to_string());
    Ok(())
}

fn percent(value: f64, reference: f64) -> f64 {
    100.0 * (value - reference) / reference
}

struct Checks {
    lines: Vec<String>,
    passed: bool,
}

impl Checks {
    fn new() -> Self {
        Self { lines: Vec::new(), passed: true }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "PASS" } else { "FAIL" }));
    }
}

/// Cantilever check: closed-form and FEM frequencies in air, fluid calibration
/// and the wet prediction, compared with the `[validate]` references.
pub fn beam_validate(config: &RunConfig, text: &str, out: &Path, tolerance_pct: Option<f64>) -> Result<Outcome> {
    let v = config.validate.as_ref().ok_or_else(|| Error::Config("beam-validate needs a [validate] section".into()))?;
    let PlateGeometry::Rectangle { a: length, b: width, .. } = config.geometry else {
        return Err(Error::Config("beam-validate needs a rectangular beam".into()));
    };
    if !matches!(config.boundary, BoundaryCondition::Clamped { .. }) {
        return Err(Error::Config("beam-validate needs a clamped boundary".into()));
    }
    fs::create_dir_all(out)?;
    let tol = tolerance_pct.unwrap_or(v.tolerance_pct);
    let section = config.base_section()?;
    let count = v.air_hz.len().max(2);
    let air = cantilever_frequencies(&section, length, width, count)?;

    let model = PlateModel::build(config)?;
    let dry_fem = model.dry_modes()?;

    // strip-theory fluid: β = Λ·β₀ with β₀ the Λ = 1 added/structural ratio
    let density = config.fluid.density;
    let structural = section.mass_per_area() * width;
    let beta0 = beam_added_mass_per_length(width, &FluidModel::new(density, 1.0)?)? / structural;
    let lambda = match (config.fluid.calibrate_wet_hz, config.fluid.calibration_factor) {
        _ if density == 0.0 => 0.0,
        (Some(target), _) => calibrate(config.fluid.calibrate_dry_hz.unwrap_or(air[0]), target, config.fluid.baseline_ratio.unwrap_or(beta0))?,
        (None, Some(l)) => l,
        (None, None) => 1.0,
    };
    let fluid = FluidModel::new(density, lambda)?;
    let added = beam_added_mass_per_length(width, &fluid)?;
    let ratio = wet_ratio(added / structural);
    let wet: Vec<f64> = air.iter().map(|f| f * ratio).collect();
    let wet_fem = if fluid.is_dry() { None } else { Some(model.wet_modes(&fluid)?) };

    let mut checks = Checks::new();
    for (i, (&f, &r)) in air.iter().zip(&v.air_hz).enumerate() {
        let e = percent(f, r);
        checks.record(e.abs() <= tol, format!("air f{} = {} Hz vs {} Hz ({:+.2}%, limit {}%)", i + 1, fmt9(f), r, e, tol));
    }
    for (i, (&m, &f)) in v.measured_air_hz.iter().zip(&air).enumerate() {
        let e = percent(m, f);
        checks.record(
            e.abs() <= v.measured_tolerance_pct,
            format!("measured air f{} = {} Hz vs computed {} Hz ({:+.2}%, limit {}%)", i + 1, m, fmt9(f), e, v.measured_tolerance_pct),
        );
    }
    if fluid.is_dry() {
        checks.record(wet == air, "no fluid: wet frequencies equal air frequencies".into());
    } else {
        for (i, (&f, &r)) in wet.iter().zip(&v.fluid_hz).enumerate() {
            let e = percent(f, r);
            checks.record(e.abs() <= tol, format!("fluid f{} = {} Hz vs {} Hz ({:+.2}%, limit {}%)", i + 1, fmt9(f), r, e, tol));
        }
        for (i, (&m, &f)) in v.measured_fluid_hz.iter().zip(&wet).enumerate() {
            let factor = (m / f).max(f / m);
            checks.record(
                factor <= v.measured_fluid_factor,
                format!("measured fluid f{} = {} Hz vs predicted {} Hz (factor {:.3}, limit {})", i + 1, m, fmt9(f), factor, v.measured_fluid_factor),
            );
        }
    }

    let mut report = String::new();
    let _ = writeln!(report, "beam-validate {}", config.meta.name);
    let _ = writeln!(
        report,
        "section: mass {} kg/m^2, neutral axis {} m, rigidity {} N*m per width",
        fmt9(section.mass_per_area()),
        fmt9(section.neutral_axis_offset()),
        fmt9(section.flexural_rigidity_per_width())
    );
    let _ = writeln!(report, "fluid: density {} kg/m^3, baseline ratio {}, lambda {}", fmt9(density), fmt9(beta0), fmt9(lambda));
    let mut csv = String::from("order,air_analytic_hz,air_fem_hz,fluid_hz,fluid_fem_hz\n");
    for i in 0..count {
        let fem = dry_fem.basis.frequencies.get(i).copied().unwrap_or(f64::NAN);
        let wfem = wet_fem.as_ref().map_or(fem, |w| w.basis.frequencies.get(i).copied().unwrap_or(f64::NAN));
        let _ = writeln!(report, "mode {}: air {} Hz (fem {}), fluid {} Hz (fem {})", i + 1, fmt9(air[i]), fmt9(fem), fmt9(wet[i]), fmt9(wfem));
        let _ = writeln!(csv, "{},{},{},{},{}", i + 1, fmt9(air[i]), fmt9(fem), fmt9(wet[i]), fmt9(wfem));
    }
    for l in &checks.lines {
        let _ = writeln!(report, "{l}");
    }
    let _ = writeln!(report, "{}", if checks.passed { "PASS" } else { "FAIL" });
    let mut outputs = Vec::new();
    write(out, "beam.csv", &csv, &mut outputs)?;
    write(out, "report.txt", &report, &mut outputs)?;
    let digest_warning = write_manifest(out, "beam-validate", config, text, (density > 0.0).then_some(lambda), &outputs)?;
    Ok(Outcome { passed: checks.passed, report, digest_warning })
}

fn mode_rows(analysis: &ModalAnalysis, csv: &mut String) {
    let b = &analysis.basis;
    for (i, f) in b.frequencies.iter().enumerate() {
        let pair = analysis
            .pairs
            .iter()
            .position(|&(p, q)| p == i || q == i)
            .map(|k| (k + 1).to_string())
            .unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{}", i + 1, fmt9(*f), b.medium.tag(), pair);
    }
}

/// Modal analysis: mode table, shape grids, and a closed-form comparison for
/// simply supported rectangles.
pub fn modes(config: &RunConfig, text: &str, out: &Path, tolerance_pct: Option<f64>) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let model = PlateModel::build(config)?;
    let dry = model.dry_modes()?;
    let mut analyses = vec![dry];
    let mut lambda = None;
    let mut report = String::new();
    let _ = writeln!(report, "modes {}: {} nodes, {} DOFs after boundary conditions", config.meta.name, model.mesh.nodes.len(), analyses[0].system.dofs());
    if config.fluid.density > 0.0 {
        let fluid = model.resolve_fluid(Some(&analyses[0].basis))?;
        let _ = writeln!(
            report,
            "fluid: density {} kg/m^3, lambda {}, characteristic length {} m",
            fmt9(fluid.model.density),
            fmt9(fluid.model.calibration_factor),
            fmt9(model.characteristic_length)
        );
        lambda = Some(fluid.model.calibration_factor);
        analyses.push(model.wet_modes(&fluid.model)?);
    }
    let mut csv = String::from("order,frequency_hz,medium,pair\n");
    let mut outputs = Vec::new();
    for a in &analyses {
        mode_rows(a, &mut csv);
        let tag = a.basis.medium.tag();
        let _ = writeln!(report, "{tag}: {} rigid modes, degenerate pairs {:?}", a.basis.rigid_count, a.pairs.iter().map(|(p, q)| (p + 1, q + 1)).collect::<Vec<_>>());
        for (i, s) in a.basis.shapes.iter().enumerate() {
            let g = resample(&model.mesh, s, config.solver.grid_points);
            write(out, &format!("mode_{tag}_{:02}.grid", i + 1), &g.to_text(), &mut outputs)?;
        }
    }
    write(out, "modes.csv", &csv, &mut outputs)?;

    let mut checks = Checks::new();
    if let (BoundaryCondition::SimplySupported, PlateGeometry::Rectangle { a, b, rotation_deg }) = (&config.boundary, config.geometry) {
        if rotation_deg == 0.0 && config.patches().is_none() {
            let tol = tolerance_pct.unwrap_or(2.0);
            let section = config.base_section()?;
            let plate = AnalyticPlate::new(a, b, section.plate_rigidity().d11, section.mass_per_area())?;
            let dry = &analyses[0].basis;
            let exact = ss_spectrum_hz(&plate, dry.len());
            let mut table = String::from("order,m,n,fem_hz,analytic_hz,error_pct\n");
            for (i, (idx, f)) in exact.iter().enumerate() {
                let e = percent(dry.frequencies[i], *f);
                checks.record(e.abs() <= tol, format!("mode {} ({},{}) {} Hz vs {} Hz ({:+.3}%, limit {}%)", i + 1, idx.m(), idx.n(), fmt9(dry.frequencies[i]), fmt9(*f), e, tol));
                let _ = writeln!(table, "{},{},{},{},{},{}", i + 1, idx.m(), idx.n(), fmt9(dry.frequencies[i]), fmt9(*f), fmt9(e));
            }
            write(out, "analytic.csv", &table, &mut outputs)?;
        }
    }
    for l in &checks.lines {
        let _ = writeln!(report, "{l}");
    }
    write(out, "report.txt", &report, &mut outputs)?;
    let digest_warning = write_manifest(out, "modes", config, text, lambda, &outputs)?;
    Ok(Outcome { passed: checks.passed, report, digest_warning })
}

/// Movement map over the configured drive grid.
pub fn sweep(config: &RunConfig, text: &str, out: &Path, check_reversal: bool) -> Result<Outcome> {
    let drive = config.drive.as_ref().ok_or_else(|| Error::Config("sweep needs a [drive] section".into()))?;
    fs::create_dir_all(out)?;
    let model = PlateModel::build(config)?;
    let fluid = model.resolve_fluid(None)?;
    let dm = model.drive_model(&fluid.model)?;
    let map = movement_map(&dm, &drive.frequencies, &drive.phases_deg)?;
    let mut outputs = Vec::new();
    write(out, "movement_map.csv", &map.to_csv(), &mut outputs)?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "sweep {}: {} cells, {} modes, motion threshold {}",
        config.meta.name,
        map.cells.len(),
        dm.basis.len(),
        fmt9(map.motion_epsilon)
    );
    let lambda = (!fluid.model.is_dry()).then_some(fluid.model.calibration_factor);
    if let Some(l) = lambda {
        let _ = writeln!(report, "fluid: density {} kg/m^3, lambda {}", fmt9(fluid.model.density), fmt9(l));
    }
    let mut passed = true;
    if check_reversal {
        let symmetric = DofMirror::from_mesh(&model.mesh).is_some()
            && config.patches().is_some_and(|[p, q]| mirrors(&p.active(), &q.active()) && mirrors(&p.bond(), &q.bond()));
        let r = verify_reversal(&map, model.characteristic_length);
        let ok = symmetric && r.passed(1e-6);
        passed &= ok;
        if !symmetric {
            let _ = writeln!(report, "FAIL reversal: configuration is not mirror-symmetric about the x-axis");
        }
        let _ = writeln!(
            report,
            "{} reversal: {} cells compared, thrust error {:.3e}, moment error {:.3e}, label mismatches {}, synchronous lateral {:.3e} (threshold {:.3e})",
            if ok { "PASS" } else { "FAIL" },
            r.compared,
            r.thrust_error,
            r.moment_error,
            r.label_mismatches.len(),
            r.synchronous_lateral,
            r.motion_epsilon
        );
    }
    write(out, "report.txt", &report, &mut outputs)?;
    let digest_warning = write_manifest(out, "sweep", config, text, lambda, &outputs)?;
    Ok(Outcome { passed, report, digest_warning })
}

/// Whether `q` is the y → -y image of `p`.
fn mirrors(p: &ActuatorPatch, q: &ActuatorPatch) -> bool {
    let m = p.mirrored();
    m.center == q.center
        && wrap_phase(m.angle_deg) == wrap_phase(q.angle_deg)
        && (m.length, m.width, m.amplitude) == (q.length, q.width, q.amplitude)
}

/// Closed-form degenerate superpositions for plotting.
pub fn atlas(config: &RunConfig, text: &str, out: &Path) -> Result<Outcome> {
    let at = config.atlas.as_ref().ok_or_else(|| Error::Config("atlas needs an [atlas] section".into()))?;
    fs::create_dir_all(out)?;
    let section = config.base_section()?;
    let plate = AnalyticPlate::new(at.a, at.b, section.plate_rigidity().d11, section.mass_per_area())?;
    let idx = ModeIndex::new(at.m, at.n)?;
    let w_mn = ss_mode_grid(idx, &plate, at.grid_points, at.grid_points);
    let w_nm = ss_mode_grid(idx.transposed(), &plate, at.grid_points, at.grid_points);
    let mut outputs = Vec::new();
    write(out, &format!("mode_{}_{}.grid", at.m, at.n), &w_mn.to_text(), &mut outputs)?;
    write(out, &format!("mode_{}_{}.grid", at.n, at.m), &w_nm.to_text(), &mut outputs)?;
    let mut report = format!("atlas ({},{}) on {} x {} m\n", at.m, at.n, fmt9(at.a), fmt9(at.b));
    for &g in &at.gammas_deg {
        let field = superpose_degenerate_deg(&w_mn, &w_nm, g)?;
        let name = format!("atlas_gamma_{g}.grid");
        write(out, &name, &field.to_text(), &mut outputs)?;
        let _ = writeln!(report, "gamma {g} deg -> {name}");
    }
    let digest_warning = write_manifest(out, "atlas", config, text, None, &outputs)?;
    Ok(Outcome { passed: true, report, digest_warning })
}
