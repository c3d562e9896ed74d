//! Twelve-DOF non-conforming Kirchhoff plate quadrilateral.
//!
//! The deflection is the 12-term incomplete quartic
//! `1, ξ, η, ξ², ξη, η², ξ³, ξ²η, ξη², η³, ξ³η, ξη³` interpolating
//! `(w, w_ξ, w_η)` at the corners. On rectangles this is the classical
//! rectangular element; on general quadrilaterals the geometry is bilinear and
//! curvatures use the full second-order chain rule, so rigid motions stay
//! strain-free on any shape.
//!
//! Global nodal DOFs are `(w, θx, θy)` with `θx = ∂w/∂y` and `θy = -∂w/∂x`.

use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix3, SMatrix, SVector};

use super::mesh::{bilinear, CORNERS};
use crate::error::{Error, Result};
use crate::laminate::PlateRigidity;

pub type Mat12 = SMatrix<f64, 12, 12>;
pub type Vec12 = SVector<f64, 12>;

const EXPONENTS: [(i32, i32); 12] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (3, 1),
    (1, 3),
];

/// Four-point Gauss-Legendre rule.
pub(crate) const GAUSS: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_8),
];

/// d^(dx+dy)/dξ^dx dη^dy of ξ^p η^q.
fn monomial(p: i32, q: i32, dx: i32, dy: i32, xi: f64, eta: f64) -> f64 {
    let part = |e: i32, d: i32, t: f64| -> f64 {
        if d > e {
            return 0.0;
        }
        let mut c = 1.0;
        for k in 0..d {
            c *= (e - k) as f64;
        }
        c * t.powi(e - d)
    };
    part(p, dx, xi) * part(q, dy, eta)
}

fn monomial_row(dx: i32, dy: i32, xi: f64, eta: f64) -> SVector<f64, 12> {
    SVector::from_fn(|c, _| monomial(EXPONENTS[c].0, EXPONENTS[c].1, dx, dy, xi, eta))
}

/// Inverse of the corner-DOF matrix: maps local corner values
/// `(w, w_ξ, w_η)` to monomial coefficients.
fn coefficients() -> &'static Mat12 {
    static COEFF: OnceLock<Mat12> = OnceLock::new();
    COEFF.get_or_init(|| {
        let mut c = Mat12::zeros();
        for (i, [xi, eta]) in CORNERS.iter().enumerate() {
            for (r, (dx, dy)) in [(0, 0), (1, 0), (0, 1)].into_iter().enumerate() {
                c.set_row(3 * i + r, &monomial_row(dx, dy, *xi, *eta).transpose());
            }
        }
        c.try_inverse().expect("corner interpolation matrix is invertible")
    })
}

/// Shape functions of the element in the global DOF basis at one point.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// Deflection `w`.
    pub n: Vec12,
    /// `∂w/∂x`.
    pub nx: Vec12,
    /// `∂w/∂y`.
    pub ny: Vec12,
    /// Rows `w_xx`, `w_yy`, `2·w_xy`.
    pub curvature: SMatrix<f64, 3, 12>,
    /// Jacobian determinant (area scale).
    pub det_j: f64,
}

fn geometry_derivatives(c: &[[f64; 2]; 4], xi: f64, eta: f64) -> (Matrix2<f64>, [f64; 2]) {
    // rows: ∂/∂ξ, ∂/∂η; columns: x, y
    let mut j = Matrix2::zeros();
    let mut mixed = [0.0; 2];
    for a in 0..4 {
        let [sa, ta] = CORNERS[a];
        let dxi = 0.25 * sa * (1.0 + ta * eta);
        let deta = 0.25 * ta * (1.0 + sa * xi);
        let dxe = 0.25 * sa * ta;
        for d in 0..2 {
            j[(0, d)] += dxi * c[a][d];
            j[(1, d)] += deta * c[a][d];
            mixed[d] += dxe * c[a][d];
        }
    }
    (j, mixed)
}

/// Local-to-global DOF transformation: local `(w, w_ξ, w_η)` per corner from
/// global `(w, θx, θy)`.
fn transformation(c: &[[f64; 2]; 4]) -> Mat12 {
    let mut t = Mat12::zeros();
    for (i, [xi, eta]) in CORNERS.iter().enumerate() {
        let (j, _) = geometry_derivatives(c, *xi, *eta);
        let b = 3 * i;
        t[(b, b)] = 1.0;
        // w_ξ = x_ξ w_x + y_ξ w_y = y_ξ θx - x_ξ θy
        t[(b + 1, b + 1)] = j[(0, 1)];
        t[(b + 1, b + 2)] = -j[(0, 0)];
        t[(b + 2, b + 1)] = j[(1, 1)];
        t[(b + 2, b + 2)] = -j[(1, 0)];
    }
    t
}

/// Evaluates shape functions and their physical derivatives at `(ξ, η)`.
pub fn kinematics(c: &[[f64; 2]; 4], xi: f64, eta: f64) -> Option<Kinematics> {
    let a = coefficients();
    let t = transformation(c);
    let (j, mixed) = geometry_derivatives(c, xi, eta);
    let det_j = j.determinant();
    if det_j <= 0.0 || !det_j.is_finite() {
        return None;
    }
    let jinv = j.try_inverse()?;
    let local = |dx, dy| -> Vec12 { (monomial_row(dx, dy, xi, eta).transpose() * a).transpose() };
    let n_loc = local(0, 0);
    let d_xi = local(1, 0);
    let d_eta = local(0, 1);
    let d_xixi = local(2, 0);
    let d_etaeta = local(0, 2);
    let d_xieta = local(1, 1);
    // [w_x, w_y] = J⁻¹ [w_ξ, w_η]
    let wx = d_xi * jinv[(0, 0)] + d_eta * jinv[(0, 1)];
    let wy = d_xi * jinv[(1, 0)] + d_eta * jinv[(1, 1)];
    let (x_xi, y_xi, x_eta, y_eta) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let t2 = Matrix3::new(
        x_xi * x_xi,
        y_xi * y_xi,
        2.0 * x_xi * y_xi,
        x_eta * x_eta,
        y_eta * y_eta,
        2.0 * x_eta * y_eta,
        x_xi * x_eta,
        y_xi * y_eta,
        x_xi * y_eta + x_eta * y_xi,
    );
    let t2inv = t2.try_inverse()?;
    // bilinear geometry: only the mixed second derivative is nonzero
    let rhs = [d_xixi, d_etaeta, d_xieta - wx * mixed[0] - wy * mixed[1]];
    let mut curv = SMatrix::<f64, 3, 12>::zeros();
    for r in 0..3 {
        let row = rhs[0] * t2inv[(r, 0)] + rhs[1] * t2inv[(r, 1)] + rhs[2] * t2inv[(r, 2)];
        let scale = if r == 2 { 2.0 } else { 1.0 };
        curv.set_row(r, &(row.transpose() * t * scale));
    }
    let to_global = |v: Vec12| -> Vec12 { (v.transpose() * t).transpose() };
    Some(Kinematics { n: to_global(n_loc), nx: to_global(wx), ny: to_global(wy), curvature: curv, det_j })
}

/// Physical position at `(ξ, η)`.
pub fn position(c: &[[f64; 2]; 4], xi: f64, eta: f64) -> [f64; 2] {
    let n = bilinear(xi, eta);
    let mut p = [0.0; 2];
    for a in 0..4 {
        p[0] += n[a] * c[a][0];
        p[1] += n[a] * c[a][1];
    }
    p
}

/// Stiffness and consistent mass of one element.
pub fn element_matrices(
    element: usize,
    c: &[[f64; 2]; 4],
    rigidity: &PlateRigidity,
    mass_per_area: f64,
) -> Result<(Mat12, Mat12)> {
    let d = Matrix3::new(
        rigidity.d11,
        rigidity.d12,
        0.0,
        rigidity.d12,
        rigidity.d11,
        0.0,
        0.0,
        0.0,
        rigidity.d66,
    );
    let mut k = Mat12::zeros();
    let mut m = Mat12::zeros();
    for (xi, wx) in GAUSS {
        for (eta, we) in GAUSS {
            let kin = kinematics(c, xi, eta).ok_or_else(|| Error::Assembly {
                element,
                reason: "non-positive or singular Jacobian".into(),
            })?;
            let w = wx * we * kin.det_j;
            k += kin.curvature.transpose() * d * kin.curvature * w;
            m += kin.n * kin.n.transpose() * (mass_per_area * w);
        }
    }
    // symmetrize round-off
    let k = (k + k.transpose()) * 0.5;
    let m = (m + m.transpose()) * 0.5;
    Ok((k, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rigidity() -> PlateRigidity {
        PlateRigidity { d11: 1.0, d12: 0.3, d66: 0.35 }
    }

    fn rigid_vectors(c: &[[f64; 2]; 4]) -> [Vec12; 3] {
        // w = 1, w = x, w = y
        let mut out = [Vec12::zeros(); 3];
        for i in 0..4 {
            let [x, y] = c[i];
            out[0][3 * i] = 1.0;
            out[1][3 * i] = x;
            out[1][3 * i + 2] = -1.0;
            out[2][3 * i] = y;
            out[2][3 * i + 1] = 1.0;
        }
        out
    }

    #[test]
    fn rigid_motions_are_strain_free() {
        let shapes = [
            [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
            [[0.0, 0.0], [1.0, 0.1], [1.2, 1.1], [-0.1, 0.9]],
            [[0.5, 0.5], [1.5, 0.4], [1.3, 1.0], [0.6, 1.3]],
        ];
        for c in shapes {
            let (k, m) = element_matrices(0, &c, &rigidity(), 2.0).unwrap();
            for u in rigid_vectors(&c) {
                let e = (u.transpose() * k * u)[(0, 0)];
                assert!(e.abs() < 1e-10 * k.norm(), "energy {e}");
            }
            // w = 1 carries the full element mass
            let u = rigid_vectors(&c)[0];
            let mass = (u.transpose() * m * u)[(0, 0)];
            let area = 0.5
                * (0..4).map(|i| c[i][0] * c[(i + 1) % 4][1] - c[(i + 1) % 4][0] * c[i][1]).sum::<f64>();
            assert!((mass - 2.0 * area).abs() < 1e-12, "{mass} vs {}", 2.0 * area);
        }
    }

    #[test]
    fn constant_curvature_is_exact_on_rectangles() {
        // w = x² has w_xx = 2 everywhere
        let c = [[0.0, 0.0], [0.5, 0.0], [0.5, 0.3], [0.0, 0.3]];
        let mut u = Vec12::zeros();
        for i in 0..4 {
            let [x, _] = c[i];
            u[3 * i] = x * x;
            u[3 * i + 2] = -2.0 * x;
        }
        let kin = kinematics(&c, 0.2, -0.4).unwrap();
        let curv = kin.curvature * u;
        assert!((curv[0] - 2.0).abs() < 1e-12);
        assert!(curv[1].abs() < 1e-12 && curv[2].abs() < 1e-12);
        let (k, _) = element_matrices(0, &c, &rigidity(), 1.0).unwrap();
        let energy = (u.transpose() * k * u)[(0, 0)];
        // ∫ d11·(w_xx)² dA = 4·area
        assert!((energy - 4.0 * 0.15).abs() < 1e-12);
    }

    #[test]
    fn matrices_are_symmetric_and_mass_positive() {
        let c = [[0.0, 0.0], [1.0, 0.1], [1.2, 1.1], [-0.1, 0.9]];
        let (k, m) = element_matrices(0, &c, &rigidity(), 1.0).unwrap();
        assert!((k - k.transpose()).norm() < 1e-14 * k.norm());
        assert!(m.cholesky().is_some());
    }

    #[test]
    fn inverted_element_is_rejected() {
        let c = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(matches!(element_matrices(7, &c, &rigidity(), 1.0), Err(Error::Assembly { element: 7, .. })));
    }
}
