//! Builds meshes, matrices and modal bases from a [`RunConfig`].

use crate::config::RunConfig;
use crate::drive::{ActuatorPatch, DriveModel};
use crate::eigen::{
    canonicalize_pairs, detect_degenerate_pairs, solve_modes, DofMirror, Medium, ModalBasis,
};
use crate::error::{Error, Result};
use crate::fem::element::kinematics;
use crate::fem::{apply_boundary, assemble_with, generate_mesh, ElementProps, Mesh, SystemMatrices};
use crate::fluid::{added_mass_matrix, calibrate, plate_added_mass_per_area, FluidModel};
use crate::grid::Grid;

/// A meshed plate with per-element sections, ready to solve.
#[derive(Debug, Clone)]
pub struct PlateModel {
    pub config: RunConfig,
    pub mesh: Mesh,
    pub props: Vec<ElementProps>,
    /// Unconstrained dry matrices.
    pub free: SystemMatrices,
    pub characteristic_length: f64,
}

/// Modes of one medium together with the matrices they were computed from.
#[derive(Debug, Clone)]
pub struct ModalAnalysis {
    pub basis: ModalBasis,
    pub system: SystemMatrices,
    pub pairs: Vec<(usize, usize)>,
}

/// How the fluid calibration factor was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedFluid {
    pub model: FluidModel,
    /// Added/structural mass ratio at Λ = 1.
    pub baseline_ratio: f64,
    /// Dry frequency the calibration was anchored to, if calibrated.
    pub calibrated_from_hz: Option<f64>,
}

impl PlateModel {
    pub fn build(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mesh = generate_mesh(&config.geometry, config.mesh.element_size)?;
        let base = config.base_section()?;
        let bonds: Vec<ActuatorPatch> =
            config.patches().map(|ps| ps.iter().map(|p| p.bond()).collect()).unwrap_or_default();
        let mut sections = vec![ElementProps::from_section(&base)];
        let props = (0..mesh.elements.len())
            .map(|e| {
                let c = mesh.element_centroid(e);
                let layers = bonds.iter().filter(|b| b.contains(c)).count();
                while sections.len() <= layers {
                    sections.push(ElementProps::from_section(&config.actuated_section(sections.len())?));
                }
                Ok(sections[layers])
            })
            .collect::<Result<Vec<_>>>()?;
        let free = assemble_with(&mesh, &props)?;
        let characteristic_length =
            config.fluid.characteristic_length.unwrap_or_else(|| config.geometry.shortest_span());
        let model = Self { config: config.clone(), mesh, props, free, characteristic_length };
        // patches must sit on the plate
        for p in config.patches().into_iter().flatten() {
            for fp in [p.active(), p.bond()] {
                crate::drive::patch_load_vector(&model.mesh, &fp)?;
            }
        }
        Ok(model)
    }

    /// Total structural mass [kg].
    pub fn structural_mass(&self) -> f64 {
        let u = crate::fem::assembly::translation_vector(&self.mesh);
        SystemMatrices::quadratic(&self.free.m, u.as_slice(), u.as_slice())
    }

    /// Mean structural mass per area [kg/m²].
    pub fn mean_mass_per_area(&self) -> f64 {
        self.structural_mass() / self.mesh.area()
    }

    pub fn dry_system(&self) -> Result<SystemMatrices> {
        apply_boundary(&self.free, &self.mesh, &self.config.boundary)
    }

    pub fn wet_system(&self, fluid: &FluidModel) -> Result<SystemMatrices> {
        let added = plate_added_mass_per_area(self.characteristic_length, fluid)?;
        let mut wet = self.free.clone();
        if added > 0.0 {
            wet.m = &self.free.m + &added_mass_matrix(&self.mesh, added)?;
        }
        apply_boundary(&wet, &self.mesh, &self.config.boundary)
    }

    fn analyse(&self, system: SystemMatrices, medium: Medium) -> Result<ModalAnalysis> {
        let count = self.config.solver.modes.min(system.dofs());
        let mut basis = solve_modes(&system, count, self.config.solver.shift_hz)?;
        basis.shapes = basis.shapes.iter().map(|s| system.expand(s)).collect();
        basis.medium = medium;
        let pairs = detect_degenerate_pairs(&basis, self.config.solver.degenerate_tolerance)?;
        if let Some(mirror) = DofMirror::from_mesh(&self.mesh) {
            canonicalize_pairs(&mut basis, &system, &mirror, &pairs);
        }
        Ok(ModalAnalysis { basis, system, pairs })
    }

    pub fn dry_modes(&self) -> Result<ModalAnalysis> {
        self.analyse(self.dry_system()?, Medium::Dry)
    }

    /// Resolves Λ, calibrating against the dry fundamental when requested.
    /// `dry` avoids a second solve when the dry modes are already known.
    pub fn resolve_fluid(&self, dry: Option<&ModalBasis>) -> Result<ResolvedFluid> {
        let f = &self.config.fluid;
        let unit = FluidModel::new(f.density, 1.0)?;
        let computed_ratio = plate_added_mass_per_area(self.characteristic_length, &unit)? / self.mean_mass_per_area();
        let baseline_ratio = f.baseline_ratio.unwrap_or(computed_ratio);
        let Some(target) = f.calibrate_wet_hz else {
            let model = FluidModel::new(f.density, f.calibration_factor.unwrap_or(1.0))?;
            return Ok(ResolvedFluid { model, baseline_ratio, calibrated_from_hz: None });
        };
        if f.density == 0.0 {
            return Ok(ResolvedFluid { model: FluidModel::new(0.0, 0.0)?, baseline_ratio, calibrated_from_hz: None });
        }
        let dry_hz = match f.calibrate_dry_hz {
            Some(d) => d,
            None => {
                let owned;
                let basis = match dry {
                    Some(b) => b,
                    None => {
                        owned = self.dry_modes()?.basis;
                        &owned
                    }
                };
                *basis
                    .frequencies
                    .get(basis.rigid_count)
                    .ok_or_else(|| Error::Calibration("no elastic dry mode to calibrate against".into()))?
            }
        };
        let lambda = calibrate(dry_hz, target, baseline_ratio)?;
        Ok(ResolvedFluid { model: FluidModel::new(f.density, lambda)?, baseline_ratio, calibrated_from_hz: Some(dry_hz) })
    }

    pub fn wet_modes(&self, fluid: &FluidModel) -> Result<ModalAnalysis> {
        self.analyse(self.wet_system(fluid)?, Medium::Wet)
    }

    /// Drive model on the wet modes (dry when the fluid is off).
    pub fn drive_model(&self, fluid: &FluidModel) -> Result<DriveModel> {
        let patches = self
            .config
            .patches()
            .ok_or_else(|| Error::Config("driving needs patch1 and patch2".into()))?;
        let drive = self.config.drive.as_ref().ok_or_else(|| Error::Config("missing [drive] section".into()))?;
        let analysis = if fluid.is_dry() { self.dry_modes()? } else { self.wet_modes(fluid)? };
        DriveModel::new(
            self.mesh.clone(),
            analysis.basis,
            *fluid,
            self.characteristic_length,
            drive.damping_ratio,
            [patches[0].active(), patches[1].active()],
        )
    }
}

/// Samples the transverse deflection of a full DOF vector on an `n × n`
/// lattice over the mesh bounding box; points off the plate are NaN.
pub fn resample(mesh: &Mesh, values: &[f64], n: usize) -> Grid {
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &mesh.nodes {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    Grid::sample(n, n, lo, hi, |x, y| match mesh.locate([x, y]) {
        Some((e, xi, eta)) => match kinematics(&mesh.element_coords(e), xi, eta) {
            Some(k) => mesh.element_dofs(e).iter().enumerate().map(|(a, &d)| k.n[a] * values[d]).sum(),
            None => f64::NAN,
        },
        None => f64::NAN,
    })
}
