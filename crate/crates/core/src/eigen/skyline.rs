//! Profile (skyline) LDLᵀ factorization of sparse symmetric matrices.
//!
//! No pivoting is done, so the factorization also works for the indefinite
//! shifted pencils `K - σM`, and the signs of the pivots give the inertia
//! (Sylvester's law): the number of negative pivots equals the number of
//! eigenvalues of the pencil below σ.

use nalgebra_sparse::CsrMatrix;

use super::ordering::reverse_cuthill_mckee;

/// A zero or non-finite pivot was met at the given (permuted) column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroPivot(pub usize);

#[derive(Debug, Clone)]
pub struct SkylineLdl {
    n: usize,
    /// new index -> original index
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
    diag: Vec<f64>,
    negative: usize,
}

/// Fill-reducing symmetric ordering for a CSR pattern.
pub fn profile_ordering(a: &CsrMatrix<f64>) -> Vec<usize> {
    let adjacency: Vec<Vec<usize>> = a.row_iter().map(|r| r.col_indices().to_vec()).collect();
    reverse_cuthill_mckee(&adjacency)
}

impl SkylineLdl {
    /// Factors `Σ cᵢ·Aᵢ` for matrices sharing (a subset of) one pattern, using
    /// the ordering `perm` (new -> original).
    pub fn factor(terms: &[(f64, &CsrMatrix<f64>)], perm: &[usize]) -> Result<Self, ZeroPivot> {
        let n = perm.len();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (_, a) in terms {
            for (i, row) in a.row_iter().enumerate() {
                let pi = inv[i];
                for &j in row.col_indices() {
                    let pj = inv[j];
                    if pi < pj {
                        first[pj] = first[pj].min(pi);
                    }
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for j in 0..n {
            start.push(total);
            total += j - first[j];
        }
        start.push(total);
        let mut data = vec![0.0; total];
        let mut diag = vec![0.0; n];
        for (c, a) in terms {
            for (i, row) in a.row_iter().enumerate() {
                let pi = inv[i];
                for (&j, &v) in row.col_indices().iter().zip(row.values()) {
                    let pj = inv[j];
                    if pi == pj {
                        diag[pi] += c * v;
                    } else if pi < pj {
                        data[start[pj] + pi - first[pj]] += c * v;
                    }
                }
            }
        }
        let mut negative = 0;
        for j in 0..n {
            let fj = first[j];
            let sj = start[j];
            // reduce column j: U_ij = a_ij - Σ_k L_ki U_kj
            for i in fj..j {
                let fi = first[i];
                let k0 = fi.max(fj);
                if k0 < i {
                    let si = start[i];
                    let li = &data[si + k0 - fi..si + i - fi];
                    let uj = &data[sj + k0 - fj..sj + i - fj];
                    let s: f64 = li.iter().zip(uj).map(|(a, b)| a * b).sum();
                    data[sj + i - fj] -= s;
                }
            }
            let original = diag[j];
            let mut d = original;
            for i in fj..j {
                let u = data[sj + i - fj];
                let l = u / diag[i];
                d -= u * l;
                data[sj + i - fj] = l;
            }
            if !d.is_finite() || d == 0.0 || d.abs() <= 1e-14 * original.abs() {
                return Err(ZeroPivot(j));
            }
            if d < 0.0 {
                negative += 1;
            }
            diag[j] = d;
        }
        Ok(Self { n, perm: perm.to_vec(), first, start, data, diag, negative })
    }

    /// Number of negative pivots.
    pub fn negative_pivots(&self) -> usize {
        self.negative
    }

    /// Stored profile entries (off-diagonal).
    pub fn profile_len(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for j in 0..n {
            let fj = self.first[j];
            let col = &self.data[self.start[j]..self.start[j + 1]];
            let s: f64 = col.iter().zip(&y[fj..j]).map(|(l, v)| l * v).sum();
            y[j] -= s;
        }
        for j in 0..n {
            y[j] /= self.diag[j];
        }
        for j in (0..n).rev() {
            let fj = self.first[j];
            let xj = y[j];
            if xj != 0.0 {
                let col = &self.data[self.start[j]..self.start[j + 1]];
                for (v, l) in y[fj..j].iter_mut().zip(col) {
                    *v -= l * xj;
                }
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use nalgebra_sparse::CooMatrix;

    fn to_csr(d: &DMatrix<f64>) -> CsrMatrix<f64> {
        let mut coo = CooMatrix::new(d.nrows(), d.ncols());
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                if d[(i, j)] != 0.0 {
                    coo.push(i, j, d[(i, j)]);
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    fn banded(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            match d {
                0 => 4.0 + (i % 3) as f64,
                1 => -1.0,
                3 => 0.5,
                _ => 0.0,
            }
        })
    }

    #[test]
    fn solves_match_dense_lu() {
        let a = banded(40);
        let csr = to_csr(&a);
        let perm = profile_ordering(&csr);
        let f = SkylineLdl::factor(&[(1.0, &csr)], &perm).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let r = &a * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
        assert!(r.norm() < 1e-12);
        assert_eq!(f.negative_pivots(), 0);
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        let a = banded(30);
        let eig = a.clone().symmetric_eigenvalues();
        let csr = to_csr(&a);
        let id = to_csr(&DMatrix::identity(30, 30));
        let perm: Vec<usize> = (0..30).collect();
        for shift in [3.1, 4.4, 5.05, 6.3] {
            let f = SkylineLdl::factor(&[(1.0, &csr), (-shift, &id)], &perm).unwrap();
            let below = eig.iter().filter(|&&l| l < shift).count();
            assert_eq!(f.negative_pivots(), below);
        }
    }

    #[test]
    fn singular_matrix_reports_zero_pivot() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let csr = to_csr(&a);
        assert!(SkylineLdl::factor(&[(1.0, &csr)], &[0, 1]).is_err());
    }
}
