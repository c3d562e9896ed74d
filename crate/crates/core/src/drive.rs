//! Two-patch phased actuation, harmonic response by modal superposition, and
//! a phase-gradient surrogate for the resulting swimming tendency.
//!
//! Conventions: time dependence `e^{iωt}`; patch 1 carries phase 0 and patch 2
//! carries `-Δφ`, so a positive phase difference means patch 2 lags. The body's
//! forward axis is +x and the mirror symmetry is y → -y.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::cos_sin_deg;
use crate::eigen::{DofMirror, ModalBasis};
use crate::error::{ensure_finite, Error, Result};
use crate::fem::element::{kinematics, position, GAUSS};
use crate::fem::{Mesh, SystemMatrices};
use crate::fluid::FluidModel;

/// Phase-gradient floor below which a point is treated as standing [rad/m].
pub const PHASE_EPSILON: f64 = 1e-6;
/// Half-angle of the forward/backward cone [deg].
pub const AXIS_CONE_DEG: f64 = 15.0;
/// `|moment| / L_char` must exceed this multiple of `|thrust|` for rotation.
pub const MOMENT_DOMINANCE: f64 = 2.0;
/// Motion threshold relative to the largest thrust over a map.
pub const MOTION_EPSILON_RATIO: f64 = 1e-3;

/// A rectangular actuator footprint loaded by uniform pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorPatch {
    /// Footprint center [m].
    pub center: [f64; 2],
    /// Extent along the orientation [m].
    pub length: f64,
    /// Extent across the orientation [m].
    pub width: f64,
    /// Orientation of the long side, counterclockwise from +x [deg].
    pub angle_deg: f64,
    /// Pressure scale (arbitrary units).
    pub amplitude: f64,
    /// [deg]
    #[serde(default)]
    pub phase_deg: f64,
}

impl ActuatorPatch {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [
            ("patch center x", self.center[0]),
            ("patch center y", self.center[1]),
            ("patch length", self.length),
            ("patch width", self.width),
            ("patch angle", self.angle_deg),
            ("patch amplitude", self.amplitude),
            ("patch phase", self.phase_deg),
        ] {
            ensure_finite(n, v)?;
        }
        if self.length <= 0.0 || self.width <= 0.0 {
            return Err(Error::Config("patch length and width must be positive".into()));
        }
        if self.amplitude < 0.0 {
            return Err(Error::Config("patch amplitude must be >= 0".into()));
        }
        Ok(())
    }

    /// Unit vector along the long side.
    pub fn orientation(&self) -> [f64; 2] {
        let (c, s) = cos_sin_deg(self.angle_deg);
        [c, s]
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    /// The reflection of this patch through y → -y.
    pub fn mirrored(&self) -> Self {
        Self { center: [self.center[0], -self.center[1]], angle_deg: -self.angle_deg, ..*self }
    }

    /// Whether `p` lies in the footprint (boundary included).
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [c, s] = self.orientation();
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let tol = 1e-12 * self.length.max(self.width);
        u.abs() <= 0.5 * self.length + tol && v.abs() <= 0.5 * self.width + tol
    }

    /// Quadrature points `(x, y, weight)` covering the footprint with cells
    /// no larger than `cell`.
    fn quadrature(&self, cell: f64) -> Vec<([f64; 2], f64)> {
        let [c, s] = self.orientation();
        let nu = (self.length / cell).ceil().max(1.0) as usize;
        let nv = (self.width / cell).ceil().max(1.0) as usize;
        let (hu, hv) = (self.length / nu as f64, self.width / nv as f64);
        let mut out = Vec::with_capacity(nu * nv * 4);
        for i in 0..nu {
            for j in 0..nv {
                let u0 = -0.5 * self.length + (i as f64 + 0.5) * hu;
                let v0 = -0.5 * self.width + (j as f64 + 0.5) * hv;
                for (gu, wu) in GAUSS {
                    for (gv, wv) in GAUSS {
                        let u = u0 + 0.5 * hu * gu;
                        let v = v0 + 0.5 * hv * gv;
                        let p = [self.center[0] + c * u - s * v, self.center[1] + s * u + c * v];
                        out.push((p, 0.25 * hu * hv * wu * wv));
                    }
                }
            }
        }
        out
    }
}

/// Consistent nodal loads of uniform unit-amplitude pressure over the patch,
/// scaled by `amplitude·e^{i·phase}`. The transverse components sum to
/// `amplitude × area × e^{i·phase}`.
pub fn patch_load_vector(mesh: &Mesh, patch: &ActuatorPatch) -> Result<Vec<Complex64>> {
    patch.validate()?;
    let real = patch_load_real(mesh, patch)?;
    let (c, s) = cos_sin_deg(patch.phase_deg);
    let factor = Complex64::new(c, s) * patch.amplitude;
    Ok(real.into_iter().map(|v| factor * v).collect())
}

/// Loads for unit pressure and zero phase.
fn patch_load_real(mesh: &Mesh, patch: &ActuatorPatch) -> Result<Vec<f64>> {
    let mut f = vec![0.0; mesh.dof_count()];
    for (p, w) in patch.quadrature(0.5 * mesh.element_size) {
        let (e, xi, eta) = mesh
            .locate(p)
            .ok_or_else(|| Error::Config(format!("patch footprint leaves the plate at ({:.6e}, {:.6e}) m", p[0], p[1])))?;
        let kin = kinematics(&mesh.element_coords(e), xi, eta)
            .ok_or(Error::Assembly { element: e, reason: "singular Jacobian".into() })?;
        for (a, d) in mesh.element_dofs(e).into_iter().enumerate() {
            f[d] += w * kin.n[a];
        }
    }
    Ok(f)
}

/// Harmonic drive settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveCondition {
    /// [Hz]
    pub frequency_hz: f64,
    /// Δφ in (-180, 180] [deg]; positive means patch 2 lags patch 1.
    pub phase_difference_deg: f64,
    /// Modal damping ratio ζ in [0, 1).
    pub damping_ratio: f64,
}

impl DriveCondition {
    pub fn new(frequency_hz: f64, phase_difference_deg: f64, damping_ratio: f64) -> Result<Self> {
        ensure_finite("drive frequency", frequency_hz)?;
        ensure_finite("phase difference", phase_difference_deg)?;
        ensure_finite("damping ratio", damping_ratio)?;
        if frequency_hz <= 0.0 {
            return Err(Error::Domain(format!("drive frequency must be positive, got {frequency_hz}")));
        }
        if !(0.0..1.0).contains(&damping_ratio) {
            return Err(Error::Domain(format!("damping ratio must lie in [0, 1), got {damping_ratio}")));
        }
        Ok(Self { frequency_hz, phase_difference_deg: wrap_phase(phase_difference_deg), damping_ratio })
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency_hz
    }
}

/// Wraps an angle into (-180, 180].
pub fn wrap_phase(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Complex steady-state deflection on the full DOF vector.
#[derive(Debug, Clone)]
pub struct OperatingShape {
    pub frequency_hz: f64,
    pub values: Vec<Complex64>,
}

impl OperatingShape {
    /// Transverse deflection at each node.
    pub fn nodal_deflection(&self) -> Vec<Complex64> {
        self.values.iter().step_by(crate::fem::DOFS_PER_NODE).copied().collect()
    }
}

/// Modal coordinate `F / (ω_k² - ω² + 2iζωω_k)`.
fn modal_amplitude(force: Complex64, eigenvalue: f64, omega: f64, zeta: f64) -> Option<Complex64> {
    let wk2 = eigenvalue.max(0.0);
    let denom = Complex64::new(wk2 - omega * omega, 2.0 * zeta * omega * wk2.sqrt());
    (denom.norm() > 0.0).then(|| force / denom)
}

fn project(shape: &[f64], loads: &[Complex64]) -> Complex64 {
    shape.iter().zip(loads).map(|(p, f)| f * p).sum()
}

/// Steady-state response `W = Σ φ_k q_k` over every mode in the basis.
pub fn harmonic_response(basis: &ModalBasis, loads: &[Complex64], drive: &DriveCondition) -> Result<OperatingShape> {
    let n = basis.shapes.first().map_or(0, Vec::len);
    if loads.len() != n {
        return Err(Error::Shape(format!("load vector has {} entries, modes have {n}", loads.len())));
    }
    let forces: Vec<Complex64> = basis.shapes.iter().map(|s| project(s, loads)).collect();
    superpose(basis, &forces, drive)
}

fn superpose(basis: &ModalBasis, forces: &[Complex64], drive: &DriveCondition) -> Result<OperatingShape> {
    let omega = drive.omega();
    let n = basis.shapes.first().map_or(0, Vec::len);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for (k, (shape, &force)) in basis.shapes.iter().zip(forces).enumerate() {
        let q = modal_amplitude(force, basis.eigenvalues[k], omega, drive.damping_ratio)
            .ok_or(Error::Singular { frequency_hz: drive.frequency_hz, mode: k })?;
        for (v, p) in values.iter_mut().zip(shape) {
            *v += q * p;
        }
    }
    Ok(OperatingShape { frequency_hz: drive.frequency_hz, values })
}

/// Realized combination inside a degenerate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingFit {
    /// γ in [0, π/2] [rad].
    pub gamma: f64,
    /// Share of the shape's modal energy captured by the pair.
    pub energy_fraction: f64,
}

/// γ = atan2(|⟨W, φ_j⟩_M|, |⟨W, φ_i⟩_M|) for the pair `(i, j)`.
pub fn fit_mixing_angle(
    shape: &OperatingShape,
    basis: &ModalBasis,
    matrices: &SystemMatrices,
    pair: (usize, usize),
) -> Result<MixingFit> {
    let (i, j) = pair;
    if i >= basis.len() || j >= basis.len() {
        return Err(Error::Domain(format!("pair ({i}, {j}) outside a basis of {} modes", basis.len())));
    }
    let re: Vec<f64> = shape.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = shape.values.iter().map(|v| v.im).collect();
    let (re, im) = (matrices.restrict(&re), matrices.restrict(&im));
    let inner = |phi: &[f64]| {
        let phi = matrices.restrict(phi);
        Complex64::new(
            SystemMatrices::quadratic(&matrices.m, &re, &phi),
            SystemMatrices::quadratic(&matrices.m, &im, &phi),
        )
    };
    let (pi, pj) = (inner(&basis.shapes[i]).norm(), inner(&basis.shapes[j]).norm());
    let norm2 = SystemMatrices::quadratic(&matrices.m, &re, &re) + SystemMatrices::quadratic(&matrices.m, &im, &im);
    if norm2 <= 0.0 || pi.max(pj) <= 1e-12 * norm2.sqrt() {
        return Err(Error::UndefinedAngle);
    }
    Ok(MixingFit { gamma: pj.atan2(pi), energy_fraction: (pi * pi + pj * pj) / norm2 })
}

/// Rotation sense about +z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turn {
    Ccw,
    Cw,
}

/// Side of the forward axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionLabel {
    Static,
    Forward,
    Backward,
    Rotate(Turn),
    /// Sideways drift toward the given side without appreciable yaw.
    Translate(Side),
    /// Off-axis thrust combined with yaw.
    Turning(Turn),
}

impl MotionLabel {
    /// The label seen in the y → -y mirror image.
    pub fn mirrored(self) -> Self {
        let flip = |t: Turn| if t == Turn::Ccw { Turn::Cw } else { Turn::Ccw };
        match self {
            MotionLabel::Rotate(t) => MotionLabel::Rotate(flip(t)),
            MotionLabel::Turning(t) => MotionLabel::Turning(flip(t)),
            MotionLabel::Translate(Side::Left) => MotionLabel::Translate(Side::Right),
            MotionLabel::Translate(Side::Right) => MotionLabel::Translate(Side::Left),
            other => other,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => MotionLabel::Static,
            "forward" => MotionLabel::Forward,
            "backward" => MotionLabel::Backward,
            "rotate_ccw" => MotionLabel::Rotate(Turn::Ccw),
            "rotate_cw" => MotionLabel::Rotate(Turn::Cw),
            "translate_left" => MotionLabel::Translate(Side::Left),
            "translate_right" => MotionLabel::Translate(Side::Right),
            "turning_ccw" => MotionLabel::Turning(Turn::Ccw),
            "turning_cw" => MotionLabel::Turning(Turn::Cw),
            _ => return None,
        })
    }
}

impl fmt::Display for MotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MotionLabel::Static => "static",
            MotionLabel::Forward => "forward",
            MotionLabel::Backward => "backward",
            MotionLabel::Rotate(Turn::Ccw) => "rotate_ccw",
            MotionLabel::Rotate(Turn::Cw) => "rotate_cw",
            MotionLabel::Translate(Side::Left) => "translate_left",
            MotionLabel::Translate(Side::Right) => "translate_right",
            MotionLabel::Turning(Turn::Ccw) => "turning_ccw",
            MotionLabel::Turning(Turn::Cw) => "turning_cw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEstimate {
    pub thrust: [f64; 2],
    /// Yaw moment about the area centroid, positive counterclockwise.
    pub moment: f64,
    pub label: MotionLabel,
}

impl MotionEstimate {
    pub fn thrust_magnitude(&self) -> f64 {
        self.thrust[0].hypot(self.thrust[1])
    }

    /// The estimate for the y → -y mirror image.
    pub fn mirrored(&self) -> Self {
        Self { thrust: [self.thrust[0], -self.thrust[1]], moment: -self.moment, label: self.label.mirrored() }
    }
}

/// Labels a thrust/moment pair. `motion_epsilon` is the static threshold for
/// thrust; the moment is compared after division by `characteristic_length`.
pub fn classify(thrust: [f64; 2], moment: f64, motion_epsilon: f64, characteristic_length: f64) -> MotionLabel {
    let t = thrust[0].hypot(thrust[1]);
    let m = moment.abs() / characteristic_length;
    let turn = if moment > 0.0 { Turn::Ccw } else { Turn::Cw };
    if t <= motion_epsilon && m <= motion_epsilon {
        return MotionLabel::Static;
    }
    if m > MOMENT_DOMINANCE * t {
        return MotionLabel::Rotate(turn);
    }
    let heading = thrust[1].atan2(thrust[0]).to_degrees();
    if heading.abs() <= AXIS_CONE_DEG {
        return MotionLabel::Forward;
    }
    if heading.abs() >= 180.0 - AXIS_CONE_DEG {
        return MotionLabel::Backward;
    }
    if m > motion_epsilon {
        MotionLabel::Turning(turn)
    } else if thrust[1] > 0.0 {
        MotionLabel::Translate(Side::Left)
    } else {
        MotionLabel::Translate(Side::Right)
    }
}

/// Net thrust and yaw moment from the local phase gradient of `W = A·e^{iψ}`:
/// `t = ρ_f ω² A² (-∇ψ/|∇ψ|)`. The label uses a threshold of 10⁻³ of this
/// estimate's own thrust; [`movement_map`] relabels against the whole map.
pub fn estimate_motion(
    shape: &OperatingShape,
    mesh: &Mesh,
    fluid: &FluidModel,
    characteristic_length: f64,
) -> Result<MotionEstimate> {
    let (thrust, moment) = thrust_and_moment(shape, mesh, fluid)?;
    let eps = MOTION_EPSILON_RATIO * thrust[0].hypot(thrust[1]);
    Ok(MotionEstimate { thrust, moment, label: classify(thrust, moment, eps, characteristic_length) })
}

fn area_centroid(mesh: &Mesh) -> Result<[f64; 2]> {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for e in 0..mesh.elements.len() {
        let c = mesh.element_coords(e);
        for (xi, wx) in GAUSS {
            for (eta, we) in GAUSS {
                let kin = kinematics(&c, xi, eta)
                    .ok_or(Error::Assembly { element: e, reason: "singular Jacobian".into() })?;
                let p = position(&c, xi, eta);
                let w = wx * we * kin.det_j;
                a += w;
                cx += w * p[0];
                cy += w * p[1];
            }
        }
    }
    Ok([cx / a, cy / a])
}

fn thrust_and_moment(shape: &OperatingShape, mesh: &Mesh, fluid: &FluidModel) -> Result<([f64; 2], f64)> {
    if shape.values.len() != mesh.dof_count() {
        return Err(Error::Shape("operating shape does not match the mesh".into()));
    }
    if shape.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain("operating shape is not finite".into()));
    }
    let centroid = area_centroid(mesh)?;
    let omega = 2.0 * PI * shape.frequency_hz;
    let scale = fluid.density * omega * omega;
    let (mut tx, mut ty, mut mz) = (0.0, 0.0, 0.0);
    for e in 0..mesh.elements.len() {
        let c = mesh.element_coords(e);
        let dofs = mesh.element_dofs(e);
        let we: Vec<Complex64> = dofs.iter().map(|&d| shape.values[d]).collect();
        for (xi, wx) in GAUSS {
            for (eta, wy) in GAUSS {
                let kin = kinematics(&c, xi, eta)
                    .ok_or(Error::Assembly { element: e, reason: "singular Jacobian".into() })?;
                let dot = |n: &crate::fem::element::Vec12| -> Complex64 { n.iter().zip(&we).map(|(a, b)| b * a).sum() };
                let w = dot(&kin.n);
                let a2 = w.norm_sqr();
                if a2 == 0.0 {
                    continue;
                }
                // ∇ψ = Im(W̄ ∇W) / |W|²
                let gx = (w.conj() * dot(&kin.nx)).im / a2;
                let gy = (w.conj() * dot(&kin.ny)).im / a2;
                let g = gx.hypot(gy);
                if g <= PHASE_EPSILON {
                    continue;
                }
                let weight = wx * wy * kin.det_j * scale * a2 / g;
                let (px, py) = (-gx * weight, -gy * weight);
                let p = position(&c, xi, eta);
                tx += px;
                ty += py;
                mz += (p[0] - centroid[0]) * py - (p[1] - centroid[1]) * px;
            }
        }
    }
    Ok(([tx, ty], mz))
}

/// Everything needed to evaluate the two-patch drive at arbitrary settings.
#[derive(Debug, Clone)]
pub struct DriveModel {
    pub mesh: Mesh,
    pub basis: ModalBasis,
    pub fluid: FluidModel,
    pub characteristic_length: f64,
    pub damping_ratio: f64,
    /// Unit-phase loads of the two patches (amplitudes applied, phases not).
    pub loads: [Vec<f64>; 2],
    modal_forces: [Vec<f64>; 2],
}

impl DriveModel {
    pub fn new(
        mesh: Mesh,
        basis: ModalBasis,
        fluid: FluidModel,
        characteristic_length: f64,
        damping_ratio: f64,
        patches: [ActuatorPatch; 2],
    ) -> Result<Self> {
        let mut loads: [Vec<f64>; 2] = Default::default();
        for (slot, p) in loads.iter_mut().zip(&patches) {
            p.validate()?;
            *slot = patch_load_real(&mesh, p)?.into_iter().map(|v| v * p.amplitude).collect();
        }
        Self::from_loads(mesh, basis, fluid, characteristic_length, damping_ratio, loads)
    }

    pub fn from_loads(
        mesh: Mesh,
        basis: ModalBasis,
        fluid: FluidModel,
        characteristic_length: f64,
        damping_ratio: f64,
        loads: [Vec<f64>; 2],
    ) -> Result<Self> {
        ensure_finite("characteristic length", characteristic_length)?;
        if characteristic_length <= 0.0 {
            return Err(Error::Config("characteristic length must be positive".into()));
        }
        if loads.iter().any(|l| l.len() != mesh.dof_count()) || basis.shapes.iter().any(|s| s.len() != mesh.dof_count()) {
            return Err(Error::Shape("loads and modes must live on the mesh DOFs".into()));
        }
        let modal_forces = [0, 1].map(|p| basis.shapes.iter().map(|s| dot(s, &loads[p])).collect());
        Ok(Self { mesh, basis, fluid, characteristic_length, damping_ratio, loads, modal_forces })
    }

    pub fn condition(&self, frequency_hz: f64, phase_difference_deg: f64) -> Result<DriveCondition> {
        DriveCondition::new(frequency_hz, phase_difference_deg, self.damping_ratio)
    }

    /// Combined load with patch 2 lagging by Δφ.
    pub fn load_vector(&self, phase_difference_deg: f64) -> Vec<Complex64> {
        let (c, s) = cos_sin_deg(-wrap_phase(phase_difference_deg));
        let lag = Complex64::new(c, s);
        self.loads[0].iter().zip(&self.loads[1]).map(|(a, b)| Complex64::new(*a, 0.0) + lag * b).collect()
    }

    pub fn response(&self, drive: &DriveCondition) -> Result<OperatingShape> {
        let (c, s) = cos_sin_deg(-drive.phase_difference_deg);
        let lag = Complex64::new(c, s);
        let forces: Vec<Complex64> = self.modal_forces[0]
            .iter()
            .zip(&self.modal_forces[1])
            .map(|(a, b)| Complex64::new(*a, 0.0) + lag * b)
            .collect();
        superpose(&self.basis, &forces, drive)
    }

    pub fn estimate(&self, frequency_hz: f64, phase_difference_deg: f64) -> Result<MotionEstimate> {
        let drive = self.condition(frequency_hz, phase_difference_deg)?;
        let shape = self.response(&drive)?;
        estimate_motion(&shape, &self.mesh, &self.fluid, self.characteristic_length)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCell {
    pub frequency_hz: f64,
    pub phase_deg: f64,
    pub estimate: MotionEstimate,
}

#[derive(Debug, Clone)]
pub struct MovementMap {
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    /// Frequency-major.
    pub cells: Vec<MapCell>,
    /// ε_motion used for the labels.
    pub motion_epsilon: f64,
}

impl MovementMap {
    pub fn to_csv(&self) -> String {
        use crate::grid::fmt9;
        let mut out = String::from("frequency_hz,phase_deg,thrust_x,thrust_y,moment,label\n");
        for c in &self.cells {
            let e = &c.estimate;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt9(c.frequency_hz),
                fmt9(c.phase_deg),
                fmt9(e.thrust[0]),
                fmt9(e.thrust[1]),
                fmt9(e.moment),
                e.label
            ));
        }
        out
    }

    pub fn max_thrust(&self) -> f64 {
        self.cells.iter().map(|c| c.estimate.thrust_magnitude()).fold(0.0, f64::max)
    }

    pub fn max_moment(&self) -> f64 {
        self.cells.iter().map(|c| c.estimate.moment.abs()).fold(0.0, f64::max)
    }
}

/// Evaluates every (frequency, phase difference) cell, in parallel, and labels
/// against ε_motion = 10⁻³ × the largest thrust on the map.
pub fn movement_map(model: &DriveModel, frequencies: &[f64], phases_deg: &[f64]) -> Result<MovementMap> {
    if frequencies.is_empty() || phases_deg.is_empty() {
        return Err(Error::Config("movement map axes must be non-empty".into()));
    }
    let coords: Vec<(f64, f64)> =
        frequencies.iter().flat_map(|&f| phases_deg.iter().map(move |&p| (f, p))).collect();
    let raw: Vec<MapCell> = coords
        .par_iter()
        .map(|&(f, p)| {
            model
                .estimate(f, p)
                .map(|estimate| MapCell { frequency_hz: f, phase_deg: p, estimate })
                .map_err(|e| Error::GridPoint { frequency_hz: f, phase_deg: p, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let max_thrust = raw.iter().map(|c| c.estimate.thrust_magnitude()).fold(0.0, f64::max);
    let eps = MOTION_EPSILON_RATIO * max_thrust;
    let cells = raw
        .into_iter()
        .map(|mut c| {
            c.estimate.label = classify(c.estimate.thrust, c.estimate.moment, eps, model.characteristic_length);
            c
        })
        .collect();
    Ok(MovementMap { frequencies: frequencies.to_vec(), phases: phases_deg.to_vec(), cells, motion_epsilon: eps })
}

/// Outcome of comparing a map with its own mirror image.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversalReport {
    /// Cells whose phase counterpart `-Δφ` is on the map.
    pub compared: usize,
    /// Largest mismatch of thrust relative to the map's largest thrust.
    pub thrust_error: f64,
    /// Largest mismatch of moment relative to the map's largest moment.
    pub moment_error: f64,
    /// Cells whose label is not the mirror of their counterpart's.
    pub label_mismatches: Vec<(f64, f64)>,
    /// Largest `max(|thrust_y|, |moment|/L_char)` over Δφ = 0 cells.
    pub synchronous_lateral: f64,
    pub motion_epsilon: f64,
}

impl ReversalReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.compared > 0
            && self.thrust_error <= tolerance
            && self.moment_error <= tolerance
            && self.label_mismatches.is_empty()
            && self.synchronous_lateral <= self.motion_epsilon
    }
}

/// Checks that the estimate at -Δφ is the mirror image of the one at +Δφ.
pub fn verify_reversal(map: &MovementMap, characteristic_length: f64) -> ReversalReport {
    let max_t = map.max_thrust().max(f64::MIN_POSITIVE);
    let max_m = map.max_moment().max(f64::MIN_POSITIVE);
    let (mut compared, mut te, mut me) = (0, 0.0f64, 0.0f64);
    let mut mismatches = Vec::new();
    let mut lateral = 0.0f64;
    for cell in &map.cells {
        let target = wrap_phase(-cell.phase_deg);
        let partner = map
            .cells
            .iter()
            .find(|c| c.frequency_hz == cell.frequency_hz && wrap_phase(c.phase_deg) == target);
        if let Some(other) = partner {
            compared += 1;
            let m = other.estimate.mirrored();
            let e = &cell.estimate;
            te = te.max((e.thrust[0] - m.thrust[0]).hypot(e.thrust[1] - m.thrust[1]) / max_t);
            me = me.max((e.moment - m.moment).abs() / max_m);
            if e.label != m.label {
                mismatches.push((cell.frequency_hz, cell.phase_deg));
            }
        }
        if wrap_phase(cell.phase_deg) == 0.0 {
            lateral = lateral.max(cell.estimate.thrust[1].abs()).max(cell.estimate.moment.abs() / characteristic_length);
        }
    }
    ReversalReport {
        compared,
        thrust_error: te,
        moment_error: me,
        label_mismatches: mismatches,
        synchronous_lateral: lateral,
        motion_epsilon: map.motion_epsilon,
    }
}

/// Applies the y → -y reflection to an operating shape.
pub fn mirror_shape(shape: &OperatingShape, mirror: &DofMirror) -> OperatingShape {
    OperatingShape { frequency_hz: shape.frequency_hz, values: mirror.apply(&shape.values) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{solve_full, Medium};
    use crate::fem::{assemble, generate_mesh, PlateGeometry};
    use crate::laminate::{Layer, LaminateSection};
    use proptest::prelude::*;

    fn plate() -> (Mesh, SystemMatrices) {
        let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 0.2, b: 0.12, rotation_deg: 0.0 }, 0.02).unwrap();
        let section = LaminateSection::single(Layer::new(1e-3, 1800.0, 20e9, 0.3).unwrap()).unwrap();
        let sys = assemble(&mesh, &section).unwrap();
        (mesh, sys)
    }

    fn patch(center: [f64; 2], angle: f64, phase: f64) -> ActuatorPatch {
        ActuatorPatch { center, length: 0.06, width: 0.013, angle_deg: angle, amplitude: 2.0, phase_deg: phase }
    }

    fn water() -> FluidModel {
        FluidModel::new(1000.0, 1.0).unwrap()
    }

    #[test]
    fn patch_load_totals_and_phases() {
        let (mesh, _) = plate();
        let p = patch([0.01, 0.02], 30.0, 0.0);
        let f = patch_load_vector(&mesh, &p).unwrap();
        assert!(f.iter().all(|v| v.im == 0.0));
        let total: Complex64 = f.iter().step_by(3).sum();
        assert!((total.re - 2.0 * p.area()).abs() < 1e-12 * p.area());
        let g = patch_load_vector(&mesh, &ActuatorPatch { phase_deg: 180.0, ..p }).unwrap();
        assert!(f.iter().zip(&g).all(|(a, b)| *a == -*b));
        let outside = ActuatorPatch { center: [0.09, 0.0], ..p };
        assert!(matches!(patch_load_vector(&mesh, &outside), Err(Error::Config(_))));
    }

    #[test]
    fn mirror_patches_give_mirror_symmetric_loads() {
        let (mesh, _) = plate();
        let mirror = DofMirror::from_mesh(&mesh).unwrap();
        let p = patch([0.02, 0.025], 35.0, 0.0);
        let a = patch_load_vector(&mesh, &p).unwrap();
        let b = patch_load_vector(&mesh, &p.mirrored()).unwrap();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let back = mirror.apply(&sum);
        let scale = sum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (x, y) in sum.iter().zip(&back) {
            assert!((x - y).norm() < 1e-12 * scale);
        }
    }

    fn one_mode(eigenvalue: f64) -> ModalBasis {
        ModalBasis {
            eigenvalues: vec![eigenvalue],
            frequencies: vec![eigenvalue.sqrt() / (2.0 * PI)],
            shapes: vec![vec![1.0]],
            medium: Medium::Dry,
            rigid_count: 0,
        }
    }

    #[test]
    fn single_mode_response_limits() {
        let wk = 2.0 * PI * 3.0;
        let basis = one_mode(wk * wk);
        let f = [Complex64::new(1.5, 0.0)];
        let low = harmonic_response(&basis, &f, &DriveCondition::new(1e-6, 0.0, 0.02).unwrap()).unwrap();
        assert!((low.values[0].re - 1.5 / (wk * wk)).abs() < 1e-9 / (wk * wk));
        let res = harmonic_response(&basis, &f, &DriveCondition::new(3.0, 0.0, 0.02).unwrap()).unwrap();
        assert!((res.values[0].norm() - 25.0 * 1.5 / (wk * wk)).abs() < 1e-12 / (wk * wk));
        let hit = harmonic_response(&basis, &f, &DriveCondition::new(3.0, 0.0, 0.0).unwrap());
        assert!(matches!(hit, Err(Error::Singular { mode: 0, .. })));
        assert!(DriveCondition::new(3.0, 0.0, 1.0).is_err());
        assert!(DriveCondition::new(0.0, 0.0, 0.1).is_err());
        assert_eq!(DriveCondition::new(1.0, -180.0, 0.1).unwrap().phase_difference_deg, 180.0);
    }

    #[test]
    fn mixing_angle_recovers_pair_combinations() {
        let (mesh, sys) = plate();
        let basis = solve_full(&sys, 6, None).unwrap();
        let (i, j) = (3, 4);
        let mk = |a: f64, b: f64| OperatingShape {
            frequency_hz: 1.0,
            values: basis.shapes[i]
                .iter()
                .zip(&basis.shapes[j])
                .map(|(x, y)| Complex64::new(a * x + b * y, 0.0))
                .collect(),
        };
        let g0 = fit_mixing_angle(&mk(1.0, 0.0), &basis, &sys, (i, j)).unwrap();
        assert!(g0.gamma.abs() < 1e-9 && (g0.energy_fraction - 1.0).abs() < 1e-9);
        let g1 = fit_mixing_angle(&mk(0.0, 1.0), &basis, &sys, (i, j)).unwrap();
        assert!((g1.gamma - PI / 2.0).abs() < 1e-9);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let g2 = fit_mixing_angle(&mk(h, h), &basis, &sys, (i, j)).unwrap();
        assert!((g2.gamma - PI / 4.0).abs() < 1e-9);
        // global complex rescaling
        let mut z = mk(0.3, 0.8);
        let base = fit_mixing_angle(&z, &basis, &sys, (i, j)).unwrap().gamma;
        z.values.iter_mut().for_each(|v| *v *= Complex64::new(-2.0, 5.0));
        assert!((fit_mixing_angle(&z, &basis, &sys, (i, j)).unwrap().gamma - base).abs() < 1e-12);
        let zero = OperatingShape { frequency_hz: 1.0, values: vec![Complex64::new(0.0, 0.0); mesh.dof_count()] };
        assert!(matches!(fit_mixing_angle(&zero, &basis, &sys, (i, j)), Err(Error::UndefinedAngle)));
    }

    /// Nodal field `A e^{iκx}` with consistent rotations.
    fn travelling_wave(mesh: &Mesh, kappa: f64) -> OperatingShape {
        let mut values = Vec::with_capacity(mesh.dof_count());
        for [x, _] in &mesh.nodes {
            let w = Complex64::from_polar(1e-3, kappa * x);
            let wx = w * Complex64::new(0.0, kappa);
            values.extend([w, Complex64::new(0.0, 0.0), -wx]);
        }
        OperatingShape { frequency_hz: 2.0, values }
    }

    #[test]
    fn travelling_wave_pushes_against_propagation() {
        let (mesh, _) = plate();
        let est = estimate_motion(&travelling_wave(&mesh, 20.0), &mesh, &water(), 0.12).unwrap();
        assert!(est.thrust[0] < 0.0);
        assert!(est.thrust[1].abs() < 1e-9 * est.thrust[0].abs());
        assert!(est.moment.abs() < 1e-9 * est.thrust[0].abs() * 0.12);
        assert_eq!(est.label, MotionLabel::Backward);
        // mirrored wave: x-thrust kept, lateral parts negated
        let mirror = DofMirror::from_mesh(&mesh).unwrap();
        let m = estimate_motion(&mirror_shape(&travelling_wave(&mesh, 20.0), &mirror), &mesh, &water(), 0.12).unwrap();
        assert!((m.thrust[0] - est.thrust[0]).abs() < 1e-9 * est.thrust[0].abs());
    }

    #[test]
    fn real_shapes_are_static() {
        let (mesh, sys) = plate();
        let basis = solve_full(&sys, 6, None).unwrap();
        let shape = OperatingShape {
            frequency_hz: 4.0,
            values: basis.shapes[4].iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        };
        let e = estimate_motion(&shape, &mesh, &water(), 0.12).unwrap();
        assert_eq!(e.thrust, [0.0, 0.0]);
        assert_eq!(e.moment, 0.0);
        assert_eq!(e.label, MotionLabel::Static);
    }

    #[test]
    fn classification_rules() {
        let l = 0.1;
        assert_eq!(classify([0.0, 0.0], 0.0, 1e-3, l), MotionLabel::Static);
        assert_eq!(classify([1.0, 0.1], 0.0, 1e-3, l), MotionLabel::Forward);
        assert_eq!(classify([-1.0, 0.1], 0.0, 1e-3, l), MotionLabel::Backward);
        assert_eq!(classify([0.1, 0.0], 0.5, 1e-3, l), MotionLabel::Rotate(Turn::Ccw));
        assert_eq!(classify([0.1, 0.0], -0.5, 1e-3, l), MotionLabel::Rotate(Turn::Cw));
        assert_eq!(classify([0.5, 0.5], 0.0, 1e-3, l), MotionLabel::Translate(Side::Left));
        assert_eq!(classify([0.5, -0.5], 0.01, 1e-3, l), MotionLabel::Turning(Turn::Ccw));
        for label in [
            MotionLabel::Static,
            MotionLabel::Rotate(Turn::Cw),
            MotionLabel::Translate(Side::Right),
            MotionLabel::Turning(Turn::Ccw),
        ] {
            assert_eq!(MotionLabel::parse(&label.to_string()), Some(label));
            assert_eq!(label.mirrored().mirrored(), label);
        }
    }

    fn symmetric_model() -> DriveModel {
        let (mesh, sys) = plate();
        let basis = solve_full(&sys, 12, None).unwrap();
        let p1 = patch([0.0, 0.02], 30.0, 0.0);
        DriveModel::new(mesh, basis, water(), 0.12, 0.05, [p1, p1.mirrored()]).unwrap()
    }

    #[test]
    fn map_is_frequency_major_and_reverses() {
        let model = symmetric_model();
        let freqs = [20.0, 55.0, 90.0];
        let phases = [-90.0, -45.0, 0.0, 45.0, 90.0];
        let map = movement_map(&model, &freqs, &phases).unwrap();
        assert_eq!(map.cells.len(), 15);
        assert_eq!((map.cells[1].frequency_hz, map.cells[1].phase_deg), (20.0, -45.0));
        let report = verify_reversal(&map, 0.12);
        assert_eq!(report.compared, 15);
        assert!(report.passed(1e-6), "{report:?}");
        for c in map.cells.iter().filter(|c| c.phase_deg == 0.0) {
            assert!(matches!(c.estimate.label, MotionLabel::Static | MotionLabel::Forward | MotionLabel::Backward));
        }
        assert!(map.to_csv().starts_with("frequency_hz,phase_deg,thrust_x,thrust_y,moment,label\n"));
    }

    #[test]
    fn off_resonance_undamped_response_is_a_standing_wave() {
        let model = DriveModel { damping_ratio: 0.0, ..symmetric_model() };
        let est = model.estimate(33.3, 0.0).unwrap();
        assert_eq!(est.thrust, [0.0, 0.0]);
        assert_eq!(est.moment, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn amplitude_scaling_is_quadratic(c in 0.1f64..10.0, f in 5.0f64..80.0, dphi in -179.0f64..180.0) {
            let model = symmetric_model();
            let scaled = DriveModel::from_loads(
                model.mesh.clone(),
                model.basis.clone(),
                model.fluid,
                model.characteristic_length,
                model.damping_ratio,
                [0, 1].map(|p| model.loads[p].iter().map(|v| v * c).collect()),
            ).unwrap();
            let a = model.estimate(f, dphi).unwrap();
            let b = scaled.estimate(f, dphi).unwrap();
            let t = a.thrust_magnitude().max(1e-300);
            prop_assert!((b.thrust[0] - c * c * a.thrust[0]).abs() <= 1e-9 * c * c * t);
            prop_assert!((b.thrust[1] - c * c * a.thrust[1]).abs() <= 1e-9 * c * c * t);
            prop_assert!((b.moment - c * c * a.moment).abs() <= 1e-9 * c * c * a.moment.abs().max(t * 0.12));
            prop_assert_eq!(a.label, b.label);
        }

        #[test]
        fn response_is_linear_in_loads(f in 1.0f64..100.0, s in -3.0f64..3.0) {
            let model = symmetric_model();
            let drive = model.condition(f, 0.0).unwrap();
            let l1: Vec<Complex64> = model.loads[0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let l2: Vec<Complex64> = model.loads[1].iter().map(|&v| Complex64::new(0.0, s * v)).collect();
            let sum: Vec<Complex64> = l1.iter().zip(&l2).map(|(a, b)| a + b).collect();
            let r1 = harmonic_response(&model.basis, &l1, &drive).unwrap();
            let r2 = harmonic_response(&model.basis, &l2, &drive).unwrap();
            let r = harmonic_response(&model.basis, &sum, &drive).unwrap();
            let scale = r.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for k in 0..r.values.len() {
                prop_assert!((r.values[k] - r1.values[k] - r2.values[k]).norm() <= 1e-12 * scale);
            }
        }
    }
}
