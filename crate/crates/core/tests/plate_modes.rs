use std::time::Instant;

use modeswim::analytic::{ss_spectrum_hz, AnalyticPlate};
use modeswim::eigen::{dense_modes, detect_degenerate_pairs, solve_full, solve_modes};
use modeswim::fem::{apply_boundary, assemble, generate_mesh, BoundaryCondition, PlateGeometry};
use modeswim::laminate::{bending_stiffness, Layer, LaminateSection};

fn aluminium() -> LaminateSection {
    LaminateSection::single(Layer::new(2e-3, 2700.0, 70e9, 0.3).unwrap()).unwrap()
}

#[test]
fn simply_supported_square_matches_closed_form() {
    let section = aluminium();
    let geom = PlateGeometry::Rectangle { a: 1.0, b: 1.0, rotation_deg: 0.0 };
    let start = Instant::now();
    let mesh = generate_mesh(&geom, 1.0 / 32.0).unwrap();
    let full = assemble(&mesh, &section).unwrap();
    let sys = apply_boundary(&full, &mesh, &BoundaryCondition::SimplySupported).unwrap();
    let basis = solve_modes(&sys, 6, None).unwrap();
    let elapsed = start.elapsed();
    let d = bending_stiffness(70e9, 2e-3, 0.3).unwrap();
    let plate = AnalyticPlate::new(1.0, 1.0, d, section.mass_per_area()).unwrap();
    let exact = ss_spectrum_hz(&plate, 6);
    for (i, (idx, f)) in exact.iter().enumerate() {
        let err = (basis.frequencies[i] - f) / f;
        println!("mode {i} ({},{}) fem {} exact {} err {:+.3e}", idx.m(), idx.n(), basis.frequencies[i], f, err);
        assert!(err.abs() < 0.02);
    }
    assert!((basis.frequencies[2] - basis.frequencies[1]).abs() < 0.005 * basis.frequencies[1]);
    assert!(detect_degenerate_pairs(&basis, 0.01).unwrap().contains(&(1, 2)));
    println!("dofs {} elapsed {:?}", sys.dofs(), elapsed);
}

#[test]
fn free_plate_has_three_rigid_modes() {
    let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 0.3, b: 0.2, rotation_deg: 0.0 }, 0.02).unwrap();
    let sys = assemble(&mesh, &aluminium()).unwrap();
    let basis = solve_full(&sys, 8, None).unwrap();
    println!("{:?}", basis.eigenvalues);
    assert_eq!(basis.rigid_count, 3);
    let dense = dense_modes(&sys, 8).unwrap();
    for i in 3..8 {
        let rel = (basis.frequencies[i] - dense.frequencies[i]).abs() / dense.frequencies[i];
        assert!(rel < 1e-8, "mode {i}: {rel}");
    }
}
