//! Incompressible added-mass model for structures vibrating in a dense fluid.
//!
//! The fluid adds inertia but no stiffness. A flat strip of width `w` carries
//! the potential-flow added mass `ρπw²/4` per unit length; a calibration
//! factor `Λ` absorbs everything the strip estimate gets wrong. When the added
//! mass is a fixed multiple `β` of the structural mass every frequency drops by
//! `1/√(1+β)` and mode shapes are unchanged.

use std::f64::consts::PI;

use nalgebra_sparse::CsrMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen::{Medium, ModalBasis};
use crate::error::{ensure_finite, Error, Result};
use crate::fem::{assemble_with, ElementProps, Mesh};
use crate::laminate::PlateRigidity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidModel {
    /// [kg/m³]
    pub density: f64,
    /// Λ, multiplier on the strip-theory added mass.
    pub calibration_factor: f64,
}

impl Default for FluidModel {
    fn default() -> Self {
        Self { density: 0.0, calibration_factor: 1.0 }
    }
}

impl FluidModel {
    pub fn new(density: f64, calibration_factor: f64) -> Result<Self> {
        let f = Self { density, calibration_factor };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("fluid density", self.density)?;
        ensure_finite("calibration factor", self.calibration_factor)?;
        if self.density < 0.0 || self.calibration_factor < 0.0 {
            return Err(Error::Domain("fluid density and calibration factor must be >= 0".into()));
        }
        Ok(())
    }

    /// True when the model adds no mass at all.
    pub fn is_dry(&self) -> bool {
        self.density == 0.0 || self.calibration_factor == 0.0
    }
}

/// `Λ·ρ·π·w²/4` [kg/m].
pub fn beam_added_mass_per_length(width: f64, fluid: &FluidModel) -> Result<f64> {
    ensure_finite("width", width)?;
    if width <= 0.0 {
        return Err(Error::Domain(format!("width must be positive, got {width}")));
    }
    fluid.validate()?;
    Ok(fluid.calibration_factor * fluid.density * PI * width * width / 4.0)
}

/// `Λ·ρ·(π/4)·L_char` [kg/m²], the plate analogue of the strip added mass.
pub fn plate_added_mass_per_area(characteristic_length: f64, fluid: &FluidModel) -> Result<f64> {
    ensure_finite("characteristic length", characteristic_length)?;
    if characteristic_length <= 0.0 {
        return Err(Error::Domain(format!("characteristic length must be positive, got {characteristic_length}")));
    }
    fluid.validate()?;
    Ok(fluid.calibration_factor * fluid.density * PI / 4.0 * characteristic_length)
}

/// Frequency ratio wet/dry for an added-to-structural mass ratio `β`.
pub fn wet_ratio(beta: f64) -> f64 {
    1.0 / (1.0 + beta).sqrt()
}

/// Applies a uniform added mass to a dry basis. Frequencies scale by
/// `1/√(1+β)`; shapes keep their form and are rescaled so they stay
/// mass-normalized against the augmented mass.
pub fn wet_frequencies(dry: &ModalBasis, structural_mass: f64, added_mass: f64) -> Result<ModalBasis> {
    ensure_finite("structural mass", structural_mass)?;
    ensure_finite("added mass", added_mass)?;
    if structural_mass <= 0.0 || added_mass < 0.0 {
        return Err(Error::Domain("structural mass must be positive and added mass non-negative".into()));
    }
    let beta = added_mass / structural_mass;
    let r = wet_ratio(beta);
    let mut wet = dry.clone();
    wet.frequencies.iter_mut().for_each(|f| *f *= r);
    wet.eigenvalues.iter_mut().for_each(|l| *l *= r * r);
    for s in &mut wet.shapes {
        s.iter_mut().for_each(|v| *v *= r);
    }
    wet.medium = Medium::Wet;
    Ok(wet)
}

/// Λ such that a mode at `dry_frequency` lands on `target_wet_frequency`,
/// given the added/structural mass ratio `β₀` at Λ = 1.
pub fn calibrate(dry_frequency: f64, target_wet_frequency: f64, baseline_ratio: f64) -> Result<f64> {
    for (n, v) in [("dry frequency", dry_frequency), ("target", target_wet_frequency), ("baseline ratio", baseline_ratio)] {
        ensure_finite(n, v)?;
    }
    if baseline_ratio <= 0.0 {
        return Err(Error::Calibration(format!("baseline ratio must be positive, got {baseline_ratio}")));
    }
    if !(target_wet_frequency > 0.0 && target_wet_frequency < dry_frequency) {
        return Err(Error::Calibration(format!(
            "target {target_wet_frequency} Hz must lie in (0, {dry_frequency}) Hz; added mass cannot raise a frequency"
        )));
    }
    Ok(((dry_frequency / target_wet_frequency).powi(2) - 1.0) / baseline_ratio)
}

/// Consistent mass matrix of a uniform added mass per area over the mesh.
pub fn added_mass_matrix(mesh: &Mesh, added_mass_per_area: f64) -> Result<CsrMatrix<f64>> {
    let props = vec![
        ElementProps { rigidity: PlateRigidity { d11: 0.0, d12: 0.0, d66: 0.0 }, mass_per_area: added_mass_per_area };
        mesh.elements.len()
    ];
    Ok(assemble_with(mesh, &props)?.m)
}
