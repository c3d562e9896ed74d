//! Global stiffness/mass assembly and boundary conditions.

use nalgebra::DVector;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::element::element_matrices;
use super::mesh::{Edge, Mesh, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::laminate::{LaminateSection, PlateRigidity};

/// Section data used for one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementProps {
    pub rigidity: PlateRigidity,
    /// Structural plus any added mass [kg/m²].
    pub mass_per_area: f64,
}

impl ElementProps {
    pub fn from_section(section: &LaminateSection) -> Self {
        Self { rigidity: section.plate_rigidity(), mass_per_area: section.mass_per_area() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    Free,
    /// Transverse deflection held at every boundary node; rotations free.
    SimplySupported,
    /// All three DOFs held along the listed rectangle edges.
    Clamped { edges: Vec<Edge> },
}

impl BoundaryCondition {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundaryCondition::Free => "free",
            BoundaryCondition::SimplySupported => "simply_supported",
            BoundaryCondition::Clamped { .. } => "clamped",
        }
    }
}

/// Symmetric stiffness and mass over the retained DOFs.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub k: CsrMatrix<f64>,
    pub m: CsrMatrix<f64>,
    /// Full-mesh DOF index of each retained DOF, ascending.
    pub retained: Vec<usize>,
    /// DOF count of the unconstrained mesh.
    pub full_dofs: usize,
    pub bc: BoundaryCondition,
}

impl SystemMatrices {
    pub fn dofs(&self) -> usize {
        self.retained.len()
    }

    /// Scatters a retained-DOF vector into the full DOF space (zeros on
    /// constrained DOFs).
    pub fn expand<T: Copy + Default>(&self, reduced: &[T]) -> Vec<T> {
        let mut full = vec![T::default(); self.full_dofs];
        for (r, &g) in self.retained.iter().enumerate() {
            full[g] = reduced[r];
        }
        full
    }

    /// Gathers the retained DOFs of a full vector.
    pub fn restrict<T: Copy>(&self, full: &[T]) -> Vec<T> {
        self.retained.iter().map(|&g| full[g]).collect()
    }

    /// `uᵀ A v` for a retained-space CSR matrix.
    pub fn quadratic(a: &CsrMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in a.row_iter().enumerate() {
            let mut r = 0.0;
            for (&j, &x) in row.col_indices().iter().zip(row.values()) {
                r += x * v[j];
            }
            s += u[i] * r;
        }
        s
    }
}

/// `A·x` for a CSR matrix and slice.
pub fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.row_iter()
        .map(|row| row.col_indices().iter().zip(row.values()).map(|(&j, &v)| v * x[j]).sum())
        .collect()
}

/// Dense copy of a CSR matrix (used by the dense reference solver).
pub fn to_dense(a: &CsrMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let mut d = nalgebra::DMatrix::zeros(a.nrows(), a.ncols());
    for (i, row) in a.row_iter().enumerate() {
        for (&j, &v) in row.col_indices().iter().zip(row.values()) {
            d[(i, j)] = v;
        }
    }
    d
}

/// Assembles a plate of uniform section.
pub fn assemble(mesh: &Mesh, section: &LaminateSection) -> Result<SystemMatrices> {
    let props = vec![ElementProps::from_section(section); mesh.elements.len()];
    assemble_with(mesh, &props)
}

/// Assembles with per-element section data. Element matrices are computed in
/// parallel and summed in ascending element order.
pub fn assemble_with(mesh: &Mesh, props: &[ElementProps]) -> Result<SystemMatrices> {
    if props.len() != mesh.elements.len() {
        return Err(Error::Shape(format!(
            "{} element property sets for {} elements",
            props.len(),
            mesh.elements.len()
        )));
    }
    let blocks: Vec<_> = (0..mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let c = mesh.element_coords(e);
            element_matrices(e, &c, &props[e].rigidity, props[e].mass_per_area)
        })
        .collect::<Result<_>>()?;
    let n = mesh.dof_count();
    let mut kc = CooMatrix::new(n, n);
    let mut mc = CooMatrix::new(n, n);
    for (e, (ke, me)) in blocks.iter().enumerate() {
        let dofs = mesh.element_dofs(e);
        for (a, &ga) in dofs.iter().enumerate() {
            for (b, &gb) in dofs.iter().enumerate() {
                kc.push(ga, gb, ke[(a, b)]);
                mc.push(ga, gb, me[(a, b)]);
            }
        }
    }
    Ok(SystemMatrices {
        k: CsrMatrix::from(&kc),
        m: CsrMatrix::from(&mc),
        retained: (0..n).collect(),
        full_dofs: n,
        bc: BoundaryCondition::Free,
    })
}

/// Eliminates constrained DOFs by row/column removal.
pub fn apply_boundary(matrices: &SystemMatrices, mesh: &Mesh, bc: &BoundaryCondition) -> Result<SystemMatrices> {
    if matrices.dofs() != matrices.full_dofs || matrices.full_dofs != mesh.dof_count() {
        return Err(Error::Shape("boundary conditions apply to unconstrained matrices of this mesh".into()));
    }
    let mut fixed = vec![false; matrices.full_dofs];
    match bc {
        BoundaryCondition::Free => return Ok(SystemMatrices { bc: bc.clone(), ..matrices.clone() }),
        BoundaryCondition::SimplySupported => {
            for n in mesh.boundary_nodes() {
                fixed[DOFS_PER_NODE * n] = true;
            }
        }
        BoundaryCondition::Clamped { edges } => {
            if edges.is_empty() {
                return Err(Error::Config("clamped boundary needs at least one edge".into()));
            }
            for edge in edges {
                for n in mesh.edge_nodes(*edge)? {
                    for c in 0..DOFS_PER_NODE {
                        fixed[DOFS_PER_NODE * n + c] = true;
                    }
                }
            }
        }
    }
    let retained: Vec<usize> = (0..matrices.full_dofs).filter(|&i| !fixed[i]).collect();
    let mut new_index = vec![usize::MAX; matrices.full_dofs];
    for (r, &g) in retained.iter().enumerate() {
        new_index[g] = r;
    }
    let reduce = |a: &CsrMatrix<f64>| {
        let mut coo = CooMatrix::new(retained.len(), retained.len());
        for (i, row) in a.row_iter().enumerate() {
            if fixed[i] {
                continue;
            }
            for (&j, &v) in row.col_indices().iter().zip(row.values()) {
                if !fixed[j] {
                    coo.push(new_index[i], new_index[j], v);
                }
            }
        }
        CsrMatrix::from(&coo)
    };
    Ok(SystemMatrices {
        k: reduce(&matrices.k),
        m: reduce(&matrices.m),
        retained,
        full_dofs: matrices.full_dofs,
        bc: bc.clone(),
    })
}

/// Full-space vector of unit transverse translation.
pub fn translation_vector(mesh: &Mesh) -> DVector<f64> {
    let mut u = DVector::zeros(mesh.dof_count());
    for n in 0..mesh.nodes.len() {
        u[DOFS_PER_NODE * n] = 1.0;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{generate_mesh, PlateGeometry};
    use crate::laminate::{table, Layer};

    fn section() -> LaminateSection {
        LaminateSection::new(table::actuator_stack()).unwrap()
    }

    fn rigid_modes(mesh: &Mesh) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; mesh.dof_count()]; 3];
        for (n, [x, y]) in mesh.nodes.iter().enumerate() {
            out[0][3 * n] = 1.0;
            out[1][3 * n] = *x;
            out[1][3 * n + 2] = -1.0;
            out[2][3 * n] = *y;
            out[2][3 * n + 1] = 1.0;
        }
        out
    }

    #[test]
    fn rigid_motions_and_total_mass() {
        for g in [
            PlateGeometry::Rectangle { a: 0.2, b: 0.1, rotation_deg: 0.0 },
            PlateGeometry::Rectangle { a: 0.16, b: 0.16, rotation_deg: 45.0 },
            PlateGeometry::Circle { radius: 0.08 },
            PlateGeometry::Cross { overall_length: 0.2, overall_width: 0.2, arm_width: 0.06 },
        ] {
            let mesh = generate_mesh(&g, 0.02).unwrap();
            let s = section();
            let sys = assemble(&mesh, &s).unwrap();
            let kscale = sys.k.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for u in rigid_modes(&mesh) {
                let e = SystemMatrices::quadratic(&sys.k, &u, &u);
                assert!(e.abs() < 1e-10 * kscale, "{g:?}: {e}");
            }
            let u = translation_vector(&mesh);
            let mass = SystemMatrices::quadratic(&sys.m, u.as_slice(), u.as_slice());
            let expected = s.mass_per_area() * mesh.area();
            assert!((mass - expected).abs() < 1e-3 * expected);
            if !matches!(g, PlateGeometry::Circle { .. }) {
                assert!((mass - s.mass_per_area() * g.area()).abs() < 1e-3 * expected);
            }
        }
    }

    #[test]
    fn mass_scales_linearly_and_stiffness_is_unchanged() {
        let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 0.1, b: 0.1, rotation_deg: 0.0 }, 0.025).unwrap();
        let s = section();
        let p = ElementProps::from_section(&s);
        let doubled = ElementProps { mass_per_area: 2.0 * p.mass_per_area, ..p };
        let a = assemble_with(&mesh, &vec![p; mesh.elements.len()]).unwrap();
        let b = assemble_with(&mesh, &vec![doubled; mesh.elements.len()]).unwrap();
        assert_eq!(a.k.values(), b.k.values());
        for (x, y) in a.m.values().iter().zip(b.m.values()) {
            assert!((2.0 * x - y).abs() <= 1e-15 * y.abs());
        }
    }

    #[test]
    fn matrices_are_symmetric() {
        let mesh = generate_mesh(&PlateGeometry::Circle { radius: 0.05 }, 0.02).unwrap();
        let sys = assemble(&mesh, &section()).unwrap();
        for a in [&sys.k, &sys.m] {
            let d = to_dense(a);
            assert!((&d - d.transpose()).norm() <= 1e-14 * d.norm());
        }
    }

    #[test]
    fn boundary_conditions_remove_expected_dofs() {
        let mesh = generate_mesh(&PlateGeometry::Rectangle { a: 1.0, b: 1.0, rotation_deg: 0.0 }, 0.25).unwrap();
        let sys = assemble(&mesh, &LaminateSection::single(Layer::new(0.01, 1000.0, 1e9, 0.3).unwrap()).unwrap()).unwrap();
        let free = apply_boundary(&sys, &mesh, &BoundaryCondition::Free).unwrap();
        assert_eq!(free.k.values(), sys.k.values());
        let ss = apply_boundary(&sys, &mesh, &BoundaryCondition::SimplySupported).unwrap();
        assert_eq!(ss.dofs(), 75 - 16);
        for n in mesh.boundary_nodes() {
            assert!(!ss.retained.contains(&(3 * n)));
            assert!(ss.retained.contains(&(3 * n + 1)) && ss.retained.contains(&(3 * n + 2)));
        }
        let cl = apply_boundary(&sys, &mesh, &BoundaryCondition::Clamped { edges: vec![Edge::Left] }).unwrap();
        assert_eq!(cl.dofs(), 75 - 15);
        let v: Vec<f64> = (0..cl.dofs()).map(|i| i as f64).collect();
        let full = cl.expand(&v);
        assert_eq!(cl.restrict(&full), v);
        assert!(apply_boundary(&ss, &mesh, &BoundaryCondition::Free).is_err());
    }

    #[test]
    fn edge_clamp_on_circle_is_a_configuration_error() {
        let mesh = generate_mesh(&PlateGeometry::Circle { radius: 0.05 }, 0.02).unwrap();
        let sys = assemble(&mesh, &section()).unwrap();
        let bc = BoundaryCondition::Clamped { edges: vec![Edge::Top] };
        assert!(matches!(apply_boundary(&sys, &mesh, &bc), Err(Error::Config(_))));
    }

    #[test]
    fn assembly_is_bit_reproducible() {
        let mesh = generate_mesh(&PlateGeometry::Circle { radius: 0.08 }, 0.01).unwrap();
        let a = assemble(&mesh, &section()).unwrap();
        let b = assemble(&mesh, &section()).unwrap();
        assert_eq!(a.k.values(), b.k.values());
        assert_eq!(a.m.values(), b.m.values());
    }
}
