//! Generalized symmetric eigenproblem `K·φ = ω²·M·φ` for the lowest modes.
//!
//! The production path is shift-invert subspace iteration on the pencil
//! `(K - σM, M)` with a profile LDLᵀ factorization and Rayleigh-Ritz
//! projection (which keeps every iterate M-orthonormal). A Sturm count at
//! the end guarantees no eigenvalue below the returned set was skipped, which
//! matters for exactly degenerate pairs. [`dense_modes`] is the reference
//! solver used in tests.

mod ordering;
pub mod skyline;

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use nalgebra_sparse::CsrMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assembly::{spmv, to_dense, SystemMatrices};
use crate::fem::{Mesh, DOFS_PER_NODE};
use skyline::{profile_ordering, SkylineLdl};

pub use ordering::reverse_cuthill_mckee;

/// Whether modes carry fluid inertia.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Medium {
    Dry,
    Wet,
}

impl Medium {
    pub fn tag(&self) -> &'static str {
        match self {
            Medium::Dry => "dry",
            Medium::Wet => "wet",
        }
    }
}

/// Mass-normalized modes in ascending frequency order.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    /// ω² [rad²/s²]; rigid modes may be tiny negative numbers.
    pub eigenvalues: Vec<f64>,
    /// [Hz]; `√max(ω², 0) / 2π`.
    pub frequencies: Vec<f64>,
    /// Full-mesh DOF vectors with `φᵀMφ = 1`.
    pub shapes: Vec<Vec<f64>>,
    pub medium: Medium,
    /// Leading modes whose eigenvalue is below 10⁻⁶ of the first elastic one.
    pub rigid_count: usize,
}

impl ModalBasis {
    fn from_pairs(mut pairs: Vec<(f64, Vec<f64>)>, medium: Medium) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let frequencies = eigenvalues.iter().map(|&l| l.max(0.0).sqrt() / (2.0 * PI)).collect();
        let rigid_count = rigid_count(&eigenvalues);
        let shapes = pairs
            .into_iter()
            .map(|(_, mut v)| {
                fix_sign(&mut v);
                v
            })
            .collect();
        Self { eigenvalues, frequencies, shapes, medium, rigid_count }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Angular frequency of mode `i` [rad/s].
    pub fn omega(&self, i: usize) -> f64 {
        2.0 * PI * self.frequencies[i]
    }
}

fn rigid_count(sorted: &[f64]) -> usize {
    let mut best = 0;
    for r in 1..sorted.len() {
        let lead = sorted[..r].iter().fold(0.0f64, |a, l| a.max(l.abs()));
        if sorted[r] > 0.0 && lead < 1e-6 * sorted[r] {
            best = r;
        }
    }
    best
}

/// Makes the largest-magnitude transverse component positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for w in v.iter().step_by(DOFS_PER_NODE) {
        if w.abs() > best * (1.0 + 1e-9) {
            best = w.abs();
            sign = w.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Converts a shift in Hz to an eigenvalue shift.
pub fn shift_from_hz(hz: f64) -> f64 {
    (2.0 * PI * hz).powi(2)
}

/// Default eigenvalue shift: 10⁻³ of the smallest diagonal Rayleigh quotient
/// `K_ii / M_ii`.
pub fn default_shift(matrices: &SystemMatrices) -> f64 {
    let kd = diagonal(&matrices.k);
    let md = diagonal(&matrices.m);
    let min = kd
        .iter()
        .zip(&md)
        .filter(|(k, m)| **k > 0.0 && **m > 0.0)
        .map(|(k, m)| k / m)
        .fold(f64::INFINITY, f64::min);
    if min.is_finite() {
        1e-3 * min
    } else {
        0.0
    }
}

fn diagonal(a: &CsrMatrix<f64>) -> Vec<f64> {
    a.row_iter()
        .enumerate()
        .map(|(i, r)| {
            r.col_indices()
                .iter()
                .zip(r.values())
                .filter(|(j, _)| **j == i)
                .map(|(_, v)| *v)
                .sum()
        })
        .collect()
}

fn inf_norm(a: &CsrMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.values().iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Tuning of the shift-invert solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Backward-error target for every returned pair.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Seed for the deterministic start block.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-13, max_iterations: 2000, seed: 0x005e_ed0f_5a17 }
    }
}

/// The `count` lowest modes of the pencil. `shift_hz = None` picks
/// [`default_shift`]; an explicit shift is used as given.
pub fn solve_modes(matrices: &SystemMatrices, count: usize, shift_hz: Option<f64>) -> Result<ModalBasis> {
    solve_modes_with(matrices, count, shift_hz, &SolverOptions::default())
}

pub fn solve_modes_with(
    matrices: &SystemMatrices,
    count: usize,
    shift_hz: Option<f64>,
    options: &SolverOptions,
) -> Result<ModalBasis> {
    let n = matrices.dofs();
    if count == 0 || count > n {
        return Err(Error::Domain(format!("requested {count} modes from a {n}-DOF system")));
    }
    if let Some(s) = shift_hz {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Domain(format!("shift must be >= 0 Hz, got {s}")));
        }
    }
    let perm = profile_ordering(&matrices.k);
    let explicit = shift_hz.is_some();
    let mut sigma = shift_hz.map(shift_from_hz).unwrap_or_else(|| default_shift(matrices));
    let mut block = (2 * count).max(count + 8).min(n);
    for attempt in 0..8 {
        let factor = match SkylineLdl::factor(&[(1.0, &matrices.k), (-sigma, &matrices.m)], &perm) {
            Ok(f) => f,
            Err(z) if explicit && attempt == 0 => {
                return Err(Error::Breakdown { shift_hz: sigma.max(0.0).sqrt() / (2.0 * PI), pivot: z.0 });
            }
            Err(_) => {
                sigma = if sigma > 0.0 { sigma * 1.37 } else { -default_shift(matrices).max(1.0) };
                continue;
            }
        };
        let ritz = match subspace_iteration(matrices, &factor, sigma, count, block, options) {
            Ok(r) => r,
            Err(e) if attempt == 7 => return Err(e),
            Err(_) => {
                sigma = -default_shift(matrices).max(1.0);
                block = (2 * block).min(n);
                continue;
            }
        };
        if sturm_check(matrices, &perm, &ritz, count) == Some(true) {
            let pairs = ritz.into_iter().take(count).collect();
            return Ok(ModalBasis::from_pairs(pairs, Medium::Dry));
        }
        // eigenvalues below the converged window were skipped: move the shift
        // under everything found so far and widen the block
        block = (2 * block).min(n);
        let lowest = ritz[..count].iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        // a negative shift keeps K - σM positive definite; it is also the only
        // safe choice once rigid modes (λ ≈ 0) are in the window
        sigma = if sigma > 0.0 && lowest > 1e-6 * sigma {
            0.1 * sigma.min(lowest)
        } else {
            -default_shift(matrices).max(1.0)
        };
    }
    Err(Error::Convergence { iterations: options.max_iterations, residual: f64::NAN })
}

/// Ritz pairs sorted ascending by eigenvalue; the first `count` are converged.
fn subspace_iteration(
    matrices: &SystemMatrices,
    factor: &SkylineLdl,
    sigma: f64,
    count: usize,
    block: usize,
    options: &SolverOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = matrices.dofs();
    let (k, m) = (&matrices.k, &matrices.m);
    let (knorm, mnorm) = (inf_norm(k), inf_norm(m));
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut worst = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let y: Vec<Vec<f64>> = x.iter().map(|v| spmv(m, v)).collect();
        let xb: Vec<Vec<f64>> = y
            .iter()
            .map(|v| {
                let mut s = v.clone();
                factor.solve_in_place(&mut s);
                s
            })
            .collect();
        let myb: Vec<Vec<f64>> = xb.iter().map(|v| spmv(m, v)).collect();
        let kr = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&xb[i], &y[j]) + dot(&xb[j], &y[i])));
        let mr = DMatrix::from_fn(block, block, |i, j| 0.5 * (dot(&xb[i], &myb[j]) + dot(&xb[j], &myb[i])));
        let (theta, q) = projected_pencil(kr, mr)?;
        // nearest to the shift first
        let mut idx: Vec<usize> = (0..block).collect();
        idx.sort_by(|&a, &b| theta[a].abs().total_cmp(&theta[b].abs()));
        x = idx
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (r, xr) in xb.iter().enumerate() {
                    let w = q[(r, c)];
                    if w != 0.0 {
                        v.iter_mut().zip(xr).for_each(|(a, b)| *a += w * b);
                    }
                }
                v
            })
            .collect();
        let lambdas: Vec<f64> = idx.iter().map(|&c| theta[c] + sigma).collect();
        worst = 0.0;
        for (i, v) in x.iter().take(count).enumerate() {
            let kv = spmv(k, v);
            let mv = spmv(m, v);
            let r: f64 = kv.iter().zip(&mv).map(|(a, b)| (a - lambdas[i] * b).powi(2)).sum::<f64>().sqrt();
            let vn = dot(v, v).sqrt();
            let eta = r / ((knorm + lambdas[i].abs() * mnorm) * vn);
            worst = worst.max(eta);
        }
        if worst <= options.tolerance {
            let mut pairs: Vec<(f64, Vec<f64>)> = lambdas.into_iter().zip(x).collect();
            // converged block first, then the remaining Ritz values
            let tail = pairs.split_off(count);
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.extend(tail);
            return Ok(pairs);
        }
    }
    Err(Error::Convergence { iterations: options.max_iterations, residual: worst })
}

/// Confirms that no eigenvalue below the converged set was missed: the
/// inertia of `K - τM` just above the highest converged value must equal the
/// number of converged values.
fn sturm_check(matrices: &SystemMatrices, perm: &[usize], ritz: &[(f64, Vec<f64>)], count: usize) -> Option<bool> {
    let top = ritz[..count].iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let scale = ritz[..count].iter().map(|r| r.0.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut tau = top + 1e-7 * scale;
    for _ in 0..5 {
        match SkylineLdl::factor(&[(1.0, &matrices.k), (-tau, &matrices.m)], perm) {
            Ok(f) => return Some(f.negative_pivots() == count),
            Err(_) => tau += 1e-7 * scale,
        }
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the small pencil `kr·q = θ·mr·q`; columns of `q` are mr-orthonormal.
fn projected_pencil(kr: DMatrix<f64>, mr: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = mr.cholesky().ok_or(Error::Convergence { iterations: 0, residual: f64::NAN })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::Convergence { iterations: 0, residual: f64::NAN })?;
    let c = &linv * kr * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let q = linv.transpose() * eig.eigenvectors;
    Ok((eig.eigenvalues.iter().copied().collect(), q))
}

/// Reference solver: reduces to a standard problem through the Cholesky
/// factor of the dense mass matrix and diagonalizes it.
pub fn dense_modes(matrices: &SystemMatrices, count: usize) -> Result<ModalBasis> {
    let n = matrices.dofs();
    if count == 0 || count > n {
        return Err(Error::Domain(format!("requested {count} modes from a {n}-DOF system")));
    }
    let k = to_dense(&matrices.k);
    let m = to_dense(&matrices.m);
    let chol = m.cholesky().ok_or_else(|| Error::Domain("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ
    let linv_k = l.solve_lower_triangular(&k).ok_or_else(|| Error::Domain("singular mass factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| Error::Domain("singular mass factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = l.transpose();
    let pairs = order
        .into_iter()
        .take(count)
        .map(|i| {
            let y = eig.eigenvectors.column(i).into_owned();
            let phi = lt.solve_upper_triangular(&y).expect("triangular solve");
            let phi = phi.as_slice().to_vec();
            // the dense eigenvalue carries an absolute error of order ε·λ_max;
            // the Rayleigh quotient of its vector is accurate to second order
            let rq = SystemMatrices::quadratic(&matrices.k, &phi, &phi) / SystemMatrices::quadratic(&matrices.m, &phi, &phi);
            (rq, phi)
        })
        .collect::<Vec<_>>();
    let mut basis = ModalBasis::from_pairs(pairs, Medium::Dry);
    basis.shapes = basis.shapes.iter().map(|s| matrices.expand(s)).collect();
    Ok(basis)
}

/// Expands solver output (retained DOFs) to full-mesh shapes.
pub fn solve_full(matrices: &SystemMatrices, count: usize, shift_hz: Option<f64>) -> Result<ModalBasis> {
    let mut basis = solve_modes(matrices, count, shift_hz)?;
    basis.shapes = basis.shapes.iter().map(|s| matrices.expand(s)).collect();
    Ok(basis)
}

/// Adjacent pairs `(i, i+1)` of elastic modes whose frequencies differ by at
/// most `relative_tolerance·fᵢ`; pairs are disjoint.
pub fn detect_degenerate_pairs(basis: &ModalBasis, relative_tolerance: f64) -> Result<Vec<(usize, usize)>> {
    if !(0.0..0.1).contains(&relative_tolerance) {
        return Err(Error::Domain(format!("relative tolerance must lie in [0, 0.1), got {relative_tolerance}")));
    }
    let f = &basis.frequencies;
    let mut pairs = Vec::new();
    let mut i = basis.rigid_count;
    while i + 1 < f.len() {
        if f[i + 1] - f[i] <= relative_tolerance * f[i] {
            pairs.push((i, i + 1));
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(pairs)
}

/// DOF-level action of the reflection y → -y on full-mesh vectors.
#[derive(Debug, Clone)]
pub struct DofMirror {
    node_map: Vec<usize>,
}

impl DofMirror {
    pub fn from_mesh(mesh: &Mesh) -> Option<Self> {
        mesh.mirror_map().map(|node_map| Self { node_map })
    }

    /// `w` and `θy` are even under the reflection, `θx = ∂w/∂y` is odd.
    pub fn apply<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Neg<Output = T>,
    {
        let mut out = Vec::with_capacity(v.len());
        for &src in &self.node_map {
            let b = DOFS_PER_NODE * src;
            out.push(v[b]);
            out.push(-v[b + 1]);
            out.push(v[b + 2]);
        }
        out
    }

    pub fn node_map(&self) -> &[usize] {
        &self.node_map
    }
}

/// Rotates each degenerate pair so that its first shape is the combination
/// most symmetric under the mirror (largest `φᵀ M Pφ`). Mass-orthonormality is
/// preserved.
pub fn canonicalize_pairs(basis: &mut ModalBasis, matrices: &SystemMatrices, mirror: &DofMirror, pairs: &[(usize, usize)]) {
    for &(i, j) in pairs {
        let a = &basis.shapes[i];
        let b = &basis.shapes[j];
        let corr = |u: &[f64], v: &[f64]| {
            let pv = mirror.apply(v);
            SystemMatrices::quadratic(&matrices.m, &matrices.restrict(u), &matrices.restrict(&pv))
        };
        let saa = corr(a, a);
        let sbb = corr(b, b);
        let sab = 0.5 * (corr(a, b) + corr(b, a));
        // principal axis of [[saa, sab], [sab, sbb]]
        let gamma = 0.5 * (2.0 * sab).atan2(saa - sbb);
        let (c, s) = (gamma.cos(), gamma.sin());
        let mut first: Vec<f64> = a.iter().zip(b).map(|(x, y)| c * x + s * y).collect();
        let mut second: Vec<f64> = a.iter().zip(b).map(|(x, y)| -s * x + c * y).collect();
        fix_sign(&mut first);
        fix_sign(&mut second);
        basis.shapes[i] = first;
        basis.shapes[j] = second;
    }
}
