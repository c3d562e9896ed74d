//! Closed-form references: simply supported rectangular plates and clamped-free
//! composite beams. These back the numerical checks of the FEM and eigensolver.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::laminate::LaminateSection;

/// Half-wave counts along x and y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    m: u32,
    n: u32,
}

impl ModeIndex {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain(format!("mode indices must be >= 1, got ({m}, {n})")));
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The partner mode with the indices swapped.
    pub fn transposed(&self) -> Self {
        Self { m: self.n, n: self.m }
    }
}

/// Simply supported rectangle `[0, a] × [0, b]` with uniform stiffness and
/// mass per area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPlate {
    a: f64,
    b: f64,
    stiffness: f64,
    mass_per_area: f64,
}

impl AnalyticPlate {
    pub fn new(a: f64, b: f64, stiffness: f64, mass_per_area: f64) -> Result<Self> {
        let ok = [a, b, stiffness, mass_per_area].iter().all(|v| v.is_finite() && *v > 0.0);
        if !ok {
            return Err(Error::Domain("plate dimensions, D and mass per area must be positive".into()));
        }
        Ok(Self { a, b, stiffness, mass_per_area })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `sin(mπx/a)·sin(nπy/b)`.
pub fn ss_mode_shape(idx: ModeIndex, plate: &AnalyticPlate, x: f64, y: f64) -> Result<f64> {
    let inside = (0.0..=plate.a).contains(&x) && (0.0..=plate.b).contains(&y);
    if !inside {
        return Err(Error::Domain(format!("point ({x}, {y}) lies outside the plate")));
    }
    Ok(ss_mode_unchecked(idx, plate, x, y))
}

fn ss_mode_unchecked(idx: ModeIndex, plate: &AnalyticPlate, x: f64, y: f64) -> f64 {
    (idx.m as f64 * PI * x / plate.a).sin() * (idx.n as f64 * PI * y / plate.b).sin()
}

/// Angular eigenfrequency π²(m²/a² + n²/b²)·√(D/μ) [rad/s].
pub fn ss_eigenfrequency(idx: ModeIndex, plate: &AnalyticPlate) -> f64 {
    let (m, n) = (idx.m as f64, idx.n as f64);
    PI * PI * (m * m / (plate.a * plate.a) + n * n / (plate.b * plate.b))
        * (plate.stiffness / plate.mass_per_area).sqrt()
}

/// [`ss_eigenfrequency`] in Hz.
pub fn ss_eigenfrequency_hz(idx: ModeIndex, plate: &AnalyticPlate) -> f64 {
    ss_eigenfrequency(idx, plate) / (2.0 * PI)
}

/// The lowest `count` simply supported frequencies [Hz], ascending, with
/// their indices. Ties keep (m, n) lexicographic order.
pub fn ss_spectrum_hz(plate: &AnalyticPlate, count: usize) -> Vec<(ModeIndex, f64)> {
    let reach = (count as u32 + 2).max(4);
    let mut all = Vec::new();
    for m in 1..=reach {
        for n in 1..=reach {
            let idx = ModeIndex { m, n };
            all.push((idx, ss_eigenfrequency_hz(idx, plate)));
        }
    }
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(count);
    all
}

/// Samples a simply supported mode on an `nx × ny` grid over the plate.
pub fn ss_mode_grid(idx: ModeIndex, plate: &AnalyticPlate, nx: usize, ny: usize) -> Grid {
    Grid::sample(nx, ny, [0.0, 0.0], [plate.a, plate.b], |x, y| ss_mode_unchecked(idx, plate, x, y))
}

/// `W_mn·cos γ + W_nm·sin γ` pointwise (γ in radians).
pub fn superpose_degenerate(w_mn: &Grid, w_nm: &Grid, gamma: f64) -> Result<Grid> {
    w_mn.combine(gamma.cos(), w_nm, gamma.sin())
}

/// Same as [`superpose_degenerate`] with γ in degrees. Multiples of 90° use
/// exact weights, and γ and γ + 180° give exactly negated fields.
pub fn superpose_degenerate_deg(w_mn: &Grid, w_nm: &Grid, gamma_deg: f64) -> Result<Grid> {
    let (c, s) = cos_sin_deg(gamma_deg);
    w_mn.combine(c, w_nm, s)
}

/// (cos, sin) of an angle in degrees, exact at quarter turns, equal-valued at
/// 45°, and odd under a half-turn shift.
pub fn cos_sin_deg(deg: f64) -> (f64, f64) {
    // reduce to [0, 90] with explicit sign flips so that the result is exactly
    // odd in the angle and exactly negated by a half turn
    let mut r = deg.abs().rem_euclid(360.0);
    let mut sin_sign = deg.signum();
    if r > 180.0 {
        r = 360.0 - r;
        sin_sign = -sin_sign;
    }
    let mut cos_sign = 1.0;
    if r > 90.0 {
        r = 180.0 - r;
        cos_sign = -1.0;
    }
    let (c, s) = if r == 0.0 {
        (1.0, 0.0)
    } else if r == 90.0 {
        (0.0, 1.0)
    } else if r == 45.0 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else {
        let t = r.to_radians();
        (t.cos(), t.sin())
    };
    (cos_sign * c, sin_sign * s)
}

/// Clamped-free beam eigenvalue βᵢL, the `i`-th root of `cos x·cosh x = -1`.
pub fn cantilever_root(i: usize) -> f64 {
    // cos x + sech x = 0 stays well scaled for large x
    let mut x = (2 * i + 1) as f64 * PI / 2.0;
    for _ in 0..50 {
        let f = x.cos() + 1.0 / x.cosh();
        let df = -x.sin() - x.tanh() / x.cosh();
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-15 * x {
            break;
        }
    }
    x
}

/// First `count` Euler-Bernoulli clamped-free frequencies [Hz] of a laminated
/// strip of the given length and width.
pub fn cantilever_frequencies(section: &LaminateSection, length: f64, width: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("count must be >= 1".into()));
    }
    if !(length > 0.0 && width > 0.0) {
        return Err(Error::Domain("beam length and width must be positive".into()));
    }
    let ei = section.flexural_rigidity_per_width() * width;
    let mass_per_length = section.mass_per_area() * width;
    let scale = (ei / (mass_per_length * length.powi(4))).sqrt();
    Ok((0..count)
        .map(|i| cantilever_root(i).powi(2) / (2.0 * PI) * scale)
        .collect())
}
