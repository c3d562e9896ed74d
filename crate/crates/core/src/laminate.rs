//! Homogenized bending properties of a bonded layer stack.
//!
//! Layers are listed bottom to top. The beam rigidity reported by
//! [`LaminateSection::flexural_rigidity_per_width`] is the Euler-Bernoulli
//! value (no Poisson correction); plates use [`LaminateSection::plate_rigidity`],
//! which applies the plane-stress correction layer by layer.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// One isotropic layer of the stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Thickness [m].
    pub thickness: f64,
    /// Density [kg/m³].
    pub density: f64,
    /// Young's modulus [Pa].
    pub elastic_modulus: f64,
    pub poisson_ratio: f64,
}

impl Layer {
    pub fn new(thickness: f64, density: f64, elastic_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        let layer = Self { thickness, density, elastic_modulus, poisson_ratio };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("thickness", self.thickness),
            ("density", self.density),
            ("elastic_modulus", self.elastic_modulus),
            ("poisson_ratio", self.poisson_ratio),
        ] {
            ensure_finite(name, v)?;
        }
        if self.thickness <= 0.0 || self.density <= 0.0 || self.elastic_modulus <= 0.0 {
            return Err(Error::Domain(format!(
                "layer thickness, density and modulus must be positive: {self:?}"
            )));
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::Domain(format!(
                "poisson ratio must lie in [0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        Ok(())
    }

    /// Plane-stress modulus E/(1-ν²).
    fn plate_modulus(&self) -> f64 {
        self.elastic_modulus / (1.0 - self.poisson_ratio * self.poisson_ratio)
    }
}

/// Plate bending stiffness D = E·h³ / (12·(1-ν²)).
pub fn bending_stiffness(elastic_modulus: f64, thickness: f64, poisson_ratio: f64) -> Result<f64> {
    for (name, v) in [("elastic_modulus", elastic_modulus), ("thickness", thickness), ("poisson_ratio", poisson_ratio)] {
        ensure_finite(name, v)?;
    }
    if elastic_modulus <= 0.0 || thickness <= 0.0 {
        return Err(Error::Domain("modulus and thickness must be positive".into()));
    }
    if !(0.0..0.5).contains(&poisson_ratio) {
        return Err(Error::Domain(format!("poisson ratio must lie in [0, 0.5), got {poisson_ratio}")));
    }
    Ok(elastic_modulus * thickness.powi(3) / (12.0 * (1.0 - poisson_ratio * poisson_ratio)))
}

/// Orthotropic-form bending constants of a plate section (isotropic layers).
///
/// Moment-curvature law: `Mxx = d11·κxx + d12·κyy`, `Myy = d12·κxx + d11·κyy`,
/// `Mxy = d66·2κxy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateRigidity {
    pub d11: f64,
    pub d12: f64,
    pub d66: f64,
}

/// A layered cross-section with its derived bending and inertia properties.
#[derive(Debug, Clone, PartialEq)]
pub struct LaminateSection {
    layers: Vec<Layer>,
    neutral_axis_offset: f64,
    flexural_rigidity_per_width: f64,
    mass_per_area: f64,
}

impl LaminateSection {
    /// Classical lamination properties of `layers` (bottom to top).
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Domain("a section needs at least one layer".into()));
        }
        for layer in &layers {
            layer.validate()?;
        }
        let mut z = 0.0;
        let mut stiffness = 0.0;
        let mut first_moment = 0.0;
        let mut mass = 0.0;
        for layer in &layers {
            let centroid = z + 0.5 * layer.thickness;
            stiffness += layer.elastic_modulus * layer.thickness;
            first_moment += layer.elastic_modulus * layer.thickness * centroid;
            mass += layer.density * layer.thickness;
            z += layer.thickness;
        }
        let neutral = first_moment / stiffness;
        let rigidity = second_moment(&layers, neutral, |l| l.elastic_modulus);
        Ok(Self {
            layers,
            neutral_axis_offset: neutral,
            flexural_rigidity_per_width: rigidity,
            mass_per_area: mass,
        })
    }

    /// Convenience for a single homogeneous layer.
    pub fn single(layer: Layer) -> Result<Self> {
        Self::new(vec![layer])
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Height of the neutral axis above the bottom face [m].
    pub fn neutral_axis_offset(&self) -> f64 {
        self.neutral_axis_offset
    }

    /// Euler-Bernoulli rigidity per unit width [N·m].
    pub fn flexural_rigidity_per_width(&self) -> f64 {
        self.flexural_rigidity_per_width
    }

    /// [kg/m²]
    pub fn mass_per_area(&self) -> f64 {
        self.mass_per_area
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Plate bending constants, taken about the plane-stress-modulus weighted
    /// centroid.
    pub fn plate_rigidity(&self) -> PlateRigidity {
        let mut z = 0.0;
        let (mut s, mut q) = (0.0, 0.0);
        for layer in &self.layers {
            let c = z + 0.5 * layer.thickness;
            s += layer.plate_modulus() * layer.thickness;
            q += layer.plate_modulus() * layer.thickness * c;
            z += layer.thickness;
        }
        let neutral = q / s;
        PlateRigidity {
            d11: second_moment(&self.layers, neutral, |l| l.plate_modulus()),
            d12: second_moment(&self.layers, neutral, |l| l.poisson_ratio * l.plate_modulus()),
            d66: second_moment(&self.layers, neutral, |l| {
                0.5 * l.elastic_modulus / (1.0 + l.poisson_ratio)
            }),
        }
    }
}

/// Σ mᵢ·(tᵢ³/12 + tᵢ·dᵢ²) about the plane at height `axis`.
fn second_moment(layers: &[Layer], axis: f64, modulus: impl Fn(&Layer) -> f64) -> f64 {
    let mut z = 0.0;
    let mut sum = 0.0;
    for layer in layers {
        let t = layer.thickness;
        let d = z + 0.5 * t - axis;
        sum += modulus(layer) * (t.powi(3) / 12.0 + t * d * d);
        z += t;
    }
    sum
}

/// Material data of the bonded actuator beam: carbon plate, epoxy, PZT fibers.
pub mod table {
    use super::Layer;

    pub const CARBON: Layer = Layer { thickness: 0.2e-3, density: 1643.0, elastic_modulus: 20.5e9, poisson_ratio: 0.3 };
    pub const ADHESIVE: Layer = Layer { thickness: 0.05e-3, density: 1140.0, elastic_modulus: 3.2e9, poisson_ratio: 0.34 };
    pub const PZT: Layer = Layer { thickness: 0.3e-3, density: 4750.0, elastic_modulus: 15.9e9, poisson_ratio: 0.31 };

    /// Carbon at the bottom, actuator bonded on top.
    pub fn actuator_stack() -> Vec<Layer> {
        vec![CARBON, ADHESIVE, PZT]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Midpoint-rule integration through the thickness, independent of the
    /// parallel-axis bookkeeping above.
    fn brute_force(layers: &[Layer]) -> (f64, f64, f64) {
        let slices = 20_000;
        let total: f64 = layers.iter().map(|l| l.thickness).sum();
        let dz = total / slices as f64;
        let modulus_at = |z: f64| {
            let mut top = 0.0;
            for l in layers {
                top += l.thickness;
                if z < top {
                    return (l.elastic_modulus, l.density);
                }
            }
            let l = layers.last().unwrap();
            (l.elastic_modulus, l.density)
        };
        let (mut ez, mut e, mut m) = (0.0, 0.0, 0.0);
        for i in 0..slices {
            let z = (i as f64 + 0.5) * dz;
            let (em, rho) = modulus_at(z);
            e += em * dz;
            ez += em * z * dz;
            m += rho * dz;
        }
        let na = ez / e;
        let mut ei = 0.0;
        for i in 0..slices {
            let z = (i as f64 + 0.5) * dz;
            ei += modulus_at(z).0 * (z - na).powi(2) * dz;
        }
        (m, na, ei)
    }

    #[test]
    fn bending_stiffness_examples() {
        assert_eq!(bending_stiffness(12.0, 1.0, 0.0).unwrap(), 1.0);
        let carbon = bending_stiffness(20.5e9, 0.2e-3, 0.3).unwrap();
        assert!((carbon - 1.5018e-2).abs() < 1e-6, "{carbon}");
        let pzt = bending_stiffness(15.9e9, 0.3e-3, 0.31).unwrap();
        assert!((pzt - 3.9578e-2).abs() < 1e-6, "{pzt}");
    }

    #[test]
    fn bending_stiffness_rejects_bad_input() {
        assert!(bending_stiffness(f64::NAN, 1.0, 0.3).is_err());
        assert!(bending_stiffness(1.0, -1.0, 0.3).is_err());
        assert!(bending_stiffness(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn single_layer_is_symmetric() {
        let s = LaminateSection::single(Layer::new(2e-3, 1000.0, 6e9, 0.2).unwrap()).unwrap();
        assert!((s.neutral_axis_offset() - 1e-3).abs() < 1e-15);
        let expected = 6e9 * 8e-9 / 12.0;
        assert!((s.flexural_rigidity_per_width() - expected).abs() < 1e-12 * expected);
        let d = s.plate_rigidity();
        let plate = bending_stiffness(6e9, 2e-3, 0.2).unwrap();
        assert!((d.d11 - plate).abs() < 1e-12 * plate);
        assert!((d.d12 - 0.2 * plate).abs() < 1e-12 * plate);
        assert!((d.d66 - 0.4 * plate).abs() < 1e-12 * plate);
    }

    #[test]
    fn actuator_stack_matches_brute_force() {
        let layers = table::actuator_stack();
        let s = LaminateSection::new(layers.clone()).unwrap();
        let (m, na, ei) = brute_force(&layers);
        assert!((s.mass_per_area() - m).abs() < 1e-4 * m);
        assert!((s.neutral_axis_offset() - na).abs() < 1e-4 * na);
        assert!((s.flexural_rigidity_per_width() - ei).abs() < 1e-4 * ei);
        // frozen from the brute-force integration
        assert!((s.mass_per_area() - 1.8106).abs() < 5e-4);
        assert!((s.neutral_axis_offset() - 0.2607e-3).abs() < 1e-6);
        assert!((s.flexural_rigidity_per_width() - 0.2483).abs() < 1e-3, "{}", s.flexural_rigidity_per_width());
    }

    #[test]
    fn doubled_layer_equals_thick_layer() {
        let thin = Layer::new(1e-3, 1500.0, 10e9, 0.3).unwrap();
        let thick = Layer { thickness: 2e-3, ..thin };
        let a = LaminateSection::new(vec![thin, thin]).unwrap();
        let b = LaminateSection::single(thick).unwrap();
        assert!((a.flexural_rigidity_per_width() - b.flexural_rigidity_per_width()).abs() < 1e-12);
        assert!((a.neutral_axis_offset() - b.neutral_axis_offset()).abs() < 1e-15);
        assert!((a.mass_per_area() - b.mass_per_area()).abs() < 1e-12);
    }

    #[test]
    fn empty_stack_is_an_error() {
        assert!(matches!(LaminateSection::new(vec![]), Err(Error::Domain(_))));
    }

    fn layer_strategy() -> impl Strategy<Value = Layer> {
        (1e-5..1e-3f64, 500.0..8000.0f64, 1e9..1e11f64, 0.0..0.49f64)
            .prop_map(|(t, rho, e, nu)| Layer { thickness: t, density: rho, elastic_modulus: e, poisson_ratio: nu })
    }

    proptest! {
        #[test]
        fn symmetric_stack_reversal_is_invariant(half in prop::collection::vec(layer_strategy(), 1..4)) {
            let mut stack = half.clone();
            stack.extend(half.iter().rev());
            let fwd = LaminateSection::new(stack.clone()).unwrap();
            stack.reverse();
            let rev = LaminateSection::new(stack).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-300);
            prop_assert!(rel(fwd.flexural_rigidity_per_width(), rev.flexural_rigidity_per_width()) < 1e-10);
            prop_assert!(rel(fwd.neutral_axis_offset(), rev.neutral_axis_offset()) < 1e-10);
            prop_assert!(rel(fwd.mass_per_area(), rev.mass_per_area()) < 1e-12);
        }

        #[test]
        fn modulus_scaling(layers in prop::collection::vec(layer_strategy(), 1..5), c in 0.1..10.0f64) {
            let base = LaminateSection::new(layers.clone()).unwrap();
            let scaled: Vec<Layer> = layers.iter().map(|l| Layer { elastic_modulus: l.elastic_modulus * c, ..*l }).collect();
            let scaled = LaminateSection::new(scaled).unwrap();
            let r = scaled.flexural_rigidity_per_width() / base.flexural_rigidity_per_width();
            prop_assert!((r - c).abs() < 1e-9 * c);
            prop_assert!((scaled.neutral_axis_offset() - base.neutral_axis_offset()).abs() < 1e-12 * base.total_thickness());
        }

        #[test]
        fn mass_is_additive(a in prop::collection::vec(layer_strategy(), 1..4), b in prop::collection::vec(layer_strategy(), 1..4)) {
            let sa = LaminateSection::new(a.clone()).unwrap();
            let sb = LaminateSection::new(b.clone()).unwrap();
            let mut ab = a;
            ab.extend(b);
            let sab = LaminateSection::new(ab).unwrap();
            prop_assert!((sab.mass_per_area() - sa.mass_per_area() - sb.mass_per_area()).abs() < 1e-12 * sab.mass_per_area());
        }
    }
}
