use std::f64::consts::PI;

use modeswim::eigen::{dense_modes, solve_modes};
use modeswim::fem::{apply_boundary, assemble, generate_mesh, BoundaryCondition, Edge, Mesh, PlateGeometry};
use modeswim::laminate::{LaminateSection, Layer};
use nalgebra::DMatrix;

fn carbon() -> LaminateSection {
    LaminateSection::single(Layer::new(0.5e-3, 1643.0, 20.5e9, 0.3).unwrap()).unwrap()
}

fn free_frequencies(mesh: &Mesh, count: usize) -> Vec<f64> {
    let basis = solve_modes(&assemble(mesh, &carbon()).unwrap(), count, None).unwrap();
    assert_eq!(basis.rigid_count, 3);
    basis.frequencies[3..].to_vec()
}

#[test]
fn halving_the_element_size_barely_moves_the_fundamental() {
    for geometry in [
        PlateGeometry::Rectangle { a: 0.16, b: 0.1, rotation_deg: 0.0 },
        PlateGeometry::Rectangle { a: 0.16, b: 0.16, rotation_deg: 45.0 },
        PlateGeometry::Circle { radius: 0.08 },
    ] {
        let coarse = free_frequencies(&generate_mesh(&geometry, 0.01).unwrap(), 4)[0];
        let fine = free_frequencies(&generate_mesh(&geometry, 0.005).unwrap(), 4)[0];
        assert!(((coarse - fine) / fine).abs() < 0.01, "{geometry:?}: {coarse} -> {fine}");
    }
}

/// Reflection y → -y with the connectivity reversed to stay counterclockwise.
fn mirrored(mesh: &Mesh) -> Mesh {
    Mesh {
        geometry: mesh.geometry,
        element_size: mesh.element_size,
        nodes: mesh.nodes.iter().map(|p| [p[0], -p[1]]).collect(),
        elements: mesh.elements.iter().map(|e| [e[0], e[3], e[2], e[1]]).collect(),
    }
}

#[test]
fn mirrored_mesh_has_the_same_spectrum() {
    // a tilted rectangle is not its own mirror image
    let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 0.2, b: 0.1, rotation_deg: 30.0 }, 0.02).unwrap();
    assert!(mesh.mirror_map().is_none());
    let a = free_frequencies(&mesh, 12);
    let b = free_frequencies(&mirrored(&mesh), 12);
    for (x, y) in a.iter().zip(&b) {
        assert!(((x - y) / x).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn simply_supported_error_shrinks_with_refinement() {
    let (a, h) = (0.16, 0.5e-3);
    let layer = Layer::new(h, 1643.0, 20.5e9, 0.3).unwrap();
    let d = layer.elastic_modulus * h.powi(3) / (12.0 * (1.0 - 0.09));
    let mut exact: Vec<f64> = (1..=4)
        .flat_map(|m| (1..=4).map(move |n| (m * m + n * n) as f64))
        .map(|s| s * (PI / a).powi(2) * (d / (1643.0 * h)).sqrt() / (2.0 * PI))
        .collect();
    exact.sort_by(f64::total_cmp);
    let mut previous = [f64::INFINITY; 6];
    for n in [8, 16, 32] {
        let mesh = generate_mesh(&PlateGeometry::Rectangle { a, b: a, rotation_deg: 0.0 }, a / n as f64).unwrap();
        let sys = apply_boundary(&assemble(&mesh, &carbon()).unwrap(), &mesh, &BoundaryCondition::SimplySupported).unwrap();
        let f = solve_modes(&sys, 6, None).unwrap().frequencies;
        for i in 0..6 {
            let e = ((f[i] - exact[i]) / exact[i]).abs();
            assert!(e < previous[i], "mode {i} at {n}x{n}: {e} after {}", previous[i]);
            previous[i] = e;
        }
    }
    assert!(previous.iter().all(|&e| e < 0.02));
}

#[test]
fn clamped_edge_removes_the_null_space() {
    let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 0.1, b: 0.02, rotation_deg: 0.0 }, 0.005).unwrap();
    let free = assemble(&mesh, &carbon()).unwrap();
    let clamped = apply_boundary(&free, &mesh, &BoundaryCondition::Clamped { edges: vec![Edge::Left] }).unwrap();
    let n = clamped.dofs();
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in clamped.k.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            k[(i, j)] = v;
        }
    }
    assert!(k.cholesky().is_some(), "clamped stiffness must be positive definite");
    let basis = dense_modes(&clamped, 3).unwrap();
    assert_eq!(basis.rigid_count, 0);
    assert!(basis.frequencies[0] > 0.0);
    // the free plate keeps exactly three zero modes
    assert_eq!(dense_modes(&free, 6).unwrap().rigid_count, 3);
}
