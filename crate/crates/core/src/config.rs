//! Run configuration: a TOML document with one table per concern.
//!
//! ```toml
//! [meta]
//! name = "example"
//!
//! [geometry]
//! shape = "rectangle"
//! a = 0.2
//! b = 0.1
//!
//! [mesh]
//! element_size = 0.01
//!
//! [layer.carbon]
//! thickness = 0.2e-3
//! density = 1643.0
//! elastic_modulus = 20.5e9
//! poisson_ratio = 0.3
//!
//! [section]
//! base = ["carbon"]
//! ```
//!
//! Unknown keys are rejected everywhere. Bundled fixtures are available by
//! name through [`bundled`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drive::ActuatorPatch;
use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, PlateGeometry};
use crate::laminate::{LaminateSection, Layer};

pub const BUNDLED: [(&str, &str); 4] = [
    ("paper_beam", include_str!("../fixtures/paper_beam.toml")),
    ("rect_robot", include_str!("../fixtures/rect_robot.toml")),
    ("circ_robot", include_str!("../fixtures/circ_robot.toml")),
    ("ss_square", include_str!("../fixtures/ss_square.toml")),
];

/// Text of a bundled fixture.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub meta: Meta,
    pub geometry: PlateGeometry,
    pub mesh: MeshConfig,
    /// Named layers referenced by [`SectionConfig`].
    pub layer: BTreeMap<String, Layer>,
    pub section: SectionConfig,
    #[serde(default = "free")]
    pub boundary: BoundaryCondition,
    #[serde(default)]
    pub fluid: FluidConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch1: Option<PatchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch2: Option<PatchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atlas: Option<AtlasConfig>,
}

fn free() -> BoundaryCondition {
    BoundaryCondition::Free
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    /// Target element size [m].
    pub element_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    /// Layers covering the whole planform, bottom to top.
    pub base: Vec<String>,
    /// Layers added on top of `base` inside each patch's bond footprint.
    #[serde(default)]
    pub actuator: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidConfig {
    /// [kg/m³]; 0 disables the fluid.
    #[serde(default)]
    pub density: f64,
    /// Λ. Mutually exclusive with the calibration targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_factor: Option<f64>,
    /// Dry reference for calibration [Hz]; defaults to the computed fundamental.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate_dry_hz: Option<f64>,
    /// Wet target for calibration [Hz].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibrate_wet_hz: Option<f64>,
    /// Added/structural mass ratio at Λ = 1; computed when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_ratio: Option<f64>,
    /// L_char for plate added mass [m]; defaults to the planform's shortest span.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub characteristic_length: Option<f64>,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            density: 0.0,
            calibration_factor: None,
            calibrate_dry_hz: None,
            calibrate_wet_hz: None,
            baseline_ratio: None,
            characteristic_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_hz: Option<f64>,
    /// Relative spacing for degenerate pairs.
    #[serde(default = "default_degenerate_tolerance")]
    pub degenerate_tolerance: f64,
    /// Points per side of exported shape grids.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_modes() -> usize {
    13
}

fn default_degenerate_tolerance() -> f64 {
    0.02
}

fn default_grid_points() -> usize {
    41
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            modes: default_modes(),
            shift_hz: None,
            degenerate_tolerance: default_degenerate_tolerance(),
            grid_points: default_grid_points(),
        }
    }
}

/// An actuator patch: the active area carries the load, the bond footprint
/// carries the extra layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub center_x: f64,
    pub center_y: f64,
    /// Active length along the patch axis [m].
    pub length: f64,
    /// Active width [m].
    pub width: f64,
    #[serde(default)]
    pub angle_deg: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Bonded length; defaults to the active length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond_length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bond_width: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

impl PatchConfig {
    pub fn active(&self) -> ActuatorPatch {
        ActuatorPatch {
            center: [self.center_x, self.center_y],
            length: self.length,
            width: self.width,
            angle_deg: self.angle_deg,
            amplitude: self.amplitude,
            phase_deg: 0.0,
        }
    }

    pub fn bond(&self) -> ActuatorPatch {
        ActuatorPatch {
            length: self.bond_length.unwrap_or(self.length),
            width: self.bond_width.unwrap_or(self.width),
            ..self.active()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Drive frequencies [Hz].
    pub frequencies: Vec<f64>,
    /// Phase differences Δφ [deg]; positive means patch 2 lags.
    pub phases_deg: Vec<f64>,
    #[serde(default = "default_damping")]
    pub damping_ratio: f64,
}

fn default_damping() -> f64 {
    0.05
}

/// Cantilever beam check against reference frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    /// Reference model frequencies in air [Hz].
    pub air_hz: Vec<f64>,
    /// Reference model frequencies in fluid [Hz].
    #[serde(default)]
    pub fluid_hz: Vec<f64>,
    /// Measured frequencies in air [Hz].
    #[serde(default)]
    pub measured_air_hz: Vec<f64>,
    /// Measured frequencies in fluid [Hz].
    #[serde(default)]
    pub measured_fluid_hz: Vec<f64>,
    /// Relative tolerance on the model references [%].
    #[serde(default = "default_tolerance_pct")]
    pub tolerance_pct: f64,
    /// Relative tolerance between measured-in-air values and the computation [%].
    #[serde(default = "default_measured_pct")]
    pub measured_tolerance_pct: f64,
    /// Allowed factor between measured fluid values and the prediction.
    #[serde(default = "default_measured_factor")]
    pub measured_fluid_factor: f64,
}

fn default_tolerance_pct() -> f64 {
    5.0
}

fn default_measured_pct() -> f64 {
    7.0
}

fn default_measured_factor() -> f64 {
    1.6
}

/// Closed-form degenerate superpositions on a simply supported rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasConfig {
    pub m: u32,
    pub n: u32,
    pub a: f64,
    pub b: f64,
    pub gammas_deg: Vec<f64>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

impl RunConfig {
    /// Parses and validates TOML text.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads from a path, or from a bundled fixture when `source` names one
    /// and no such file exists. Returns the config and its source text.
    pub fn load(source: &str) -> Result<(Self, String)> {
        let path = Path::new(source);
        let text = if path.exists() {
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {source}: {e}")))?
        } else if let Some(t) = bundled(source) {
            t.to_string()
        } else {
            return Err(Error::Config(format!("no config file or bundled fixture named {source:?}")));
        };
        Ok((Self::parse(&text)?, text))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn layers(&self, names: &[String]) -> Result<Vec<Layer>> {
        names
            .iter()
            .map(|n| {
                self.layer.get(n).copied().ok_or_else(|| Error::Config(format!("section references unknown layer {n:?}")))
            })
            .collect()
    }

    /// Section covering the whole planform.
    pub fn base_section(&self) -> Result<LaminateSection> {
        LaminateSection::new(self.layers(&self.section.base)?)
    }

    /// Base plus actuator layers repeated `count` times.
    pub fn actuated_section(&self, count: usize) -> Result<LaminateSection> {
        let mut layers = self.layers(&self.section.base)?;
        let act = self.layers(&self.section.actuator)?;
        for _ in 0..count {
            layers.extend(act.iter().copied());
        }
        LaminateSection::new(layers)
    }

    pub fn patches(&self) -> Option<[PatchConfig; 2]> {
        Some([self.patch1?, self.patch2?])
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.mesh.element_size.is_finite() && self.mesh.element_size > 0.0) {
            return Err(Error::Config("mesh.element_size must be positive".into()));
        }
        for (name, l) in &self.layer {
            l.validate().map_err(|e| Error::Config(format!("layer {name:?}: {e}")))?;
        }
        if self.section.base.is_empty() {
            return Err(Error::Config("section.base needs at least one layer".into()));
        }
        self.base_section()?;
        self.actuated_section(1)?;
        let f = &self.fluid;
        if !(f.density.is_finite() && f.density >= 0.0) {
            return Err(Error::Config("fluid.density must be >= 0".into()));
        }
        if f.calibration_factor.is_some() && f.calibrate_wet_hz.is_some() {
            return Err(Error::Config("give either fluid.calibration_factor or calibration targets, not both".into()));
        }
        if let Some(l) = f.calibration_factor {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::Config("fluid.calibration_factor must be >= 0".into()));
            }
        }
        if f.calibrate_wet_hz.is_none() && (f.calibrate_dry_hz.is_some() || f.baseline_ratio.is_some()) {
            return Err(Error::Config("fluid calibration needs calibrate_wet_hz".into()));
        }
        if let (Some(d), Some(w)) = (f.calibrate_dry_hz, f.calibrate_wet_hz) {
            if !(w > 0.0 && w < d) {
                return Err(Error::Config("fluid calibration targets must satisfy 0 < wet < dry".into()));
            }
        }
        if let Some(l) = f.characteristic_length {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config("fluid.characteristic_length must be positive".into()));
            }
        }
        let s = &self.solver;
        if s.modes == 0 {
            return Err(Error::Config("solver.modes must be >= 1".into()));
        }
        if !(0.0..0.1).contains(&s.degenerate_tolerance) {
            return Err(Error::Config("solver.degenerate_tolerance must lie in [0, 0.1)".into()));
        }
        if s.grid_points < 2 {
            return Err(Error::Config("solver.grid_points must be >= 2".into()));
        }
        if let Some(sh) = s.shift_hz {
            if !(sh.is_finite() && sh >= 0.0) {
                return Err(Error::Config("solver.shift_hz must be >= 0".into()));
            }
        }
        if self.patch1.is_some() != self.patch2.is_some() {
            return Err(Error::Config("patch1 and patch2 must be given together".into()));
        }
        for p in [self.patch1, self.patch2].into_iter().flatten() {
            p.active().validate()?;
            p.bond().validate()?;
            if p.bond().length < p.length || p.bond().width < p.width {
                return Err(Error::Config("patch bond footprint must contain the active area".into()));
            }
        }
        if let Some(d) = &self.drive {
            if d.frequencies.is_empty() || d.phases_deg.is_empty() {
                return Err(Error::Config("drive.frequencies and drive.phases_deg must be non-empty".into()));
            }
            if d.frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                return Err(Error::Config("drive frequencies must be positive".into()));
            }
            if d.phases_deg.iter().any(|p| !(p.is_finite() && *p > -180.0 && *p <= 180.0)) {
                return Err(Error::Config("drive phases must lie in (-180, 180]".into()));
            }
            if !(0.0..1.0).contains(&d.damping_ratio) {
                return Err(Error::Config("drive.damping_ratio must lie in [0, 1)".into()));
            }
            if self.patches().is_none() {
                return Err(Error::Config("a drive section needs patch1 and patch2".into()));
            }
        }
        if let Some(v) = &self.validate {
            if v.air_hz.is_empty() {
                return Err(Error::Config("validate.air_hz must list at least one frequency".into()));
            }
            if v.fluid_hz.len() > v.air_hz.len() {
                return Err(Error::Config("validate.fluid_hz cannot be longer than air_hz".into()));
            }
        }
        if let Some(a) = &self.atlas {
            if a.m == 0 || a.n == 0 || !(a.a > 0.0 && a.b > 0.0) || a.grid_points < 2 {
                return Err(Error::Config("atlas needs m, n >= 1, positive a, b and grid_points >= 2".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_parse_and_round_trip() {
        for (name, text) in BUNDLED {
            let cfg = RunConfig::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(cfg, again, "{name}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = bundled("rect_robot").unwrap().replace("[mesh]", "[mesh]\nbogus = 1");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("bogus")), "{err}");
    }

    #[test]
    fn referential_checks() {
        let base = bundled("rect_robot").unwrap();
        let bad_layer = base.replace("base = [\"carbon\"]", "base = [\"steel\"]");
        assert!(RunConfig::parse(&bad_layer).is_err());
        let beam = bundled("paper_beam").unwrap();
        let swapped = beam.replace("calibrate_wet_hz = 4.2", "calibrate_wet_hz = 4.2\ncalibrate_dry_hz = 3.0");
        assert!(RunConfig::parse(&swapped).is_err());
    }

    #[test]
    fn missing_source_is_a_config_error() {
        assert!(matches!(RunConfig::load("no_such_fixture"), Err(Error::Config(_))));
        assert!(RunConfig::load("paper_beam").is_ok());
    }
}
