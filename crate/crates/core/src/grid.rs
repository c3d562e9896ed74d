//! Regular-grid scalar fields and the plain-text formats used for export.
//!
//! Grid file layout: a header line `nx,ny,dx,dy`, then `ny` rows of `nx`
//! comma-separated values (row-major, y outer). Every float is printed with
//! nine significant digits.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats `v` with nine significant digits. Negative zero prints as zero.
pub fn fmt9(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Scalar field sampled on `nx × ny` points starting at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

impl Grid {
    /// Samples `f` on an `nx × ny` lattice covering `[x0, x1] × [y0, y1]`.
    pub fn sample(nx: usize, ny: usize, lo: [f64; 2], hi: [f64; 2], mut f: impl FnMut(f64, f64) -> f64) -> Self {
        assert!(nx >= 2 && ny >= 2, "grid needs at least 2 points per axis");
        let dx = (hi[0] - lo[0]) / (nx - 1) as f64;
        let dy = (hi[1] - lo[1]) / (ny - 1) as f64;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            // endpoints hit exactly so that edge samples land on the boundary
            let y = if j == ny - 1 { hi[1] } else { lo[1] + j as f64 * dy };
            for i in 0..nx {
                let x = if i == nx - 1 { hi[0] } else { lo[0] + i as f64 * dx };
                values.push(f(x, y));
            }
        }
        Self { nx, ny, dx, dy, origin: lo, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.dx, self.origin[1] + j as f64 * self.dy]
    }

    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.origin == other.origin
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Grid, b: f64) -> Result<Grid> {
        if !self.same_lattice(other) || self.values.len() != other.values.len() {
            return Err(Error::Shape(format!(
                "grids differ: {}x{} vs {}x{}",
                self.nx, self.ny, other.nx, other.ny
            )));
        }
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Ok(Grid { values, ..self.clone() })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{},{},{},{}", self.nx, self.ny, fmt9(self.dx), fmt9(self.dy));
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| fmt9(*v)).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    /// Parses the text produced by [`Grid::to_text`]. The origin is not
    /// stored in the file and is set to zero.
    pub fn parse(text: &str) -> Result<Grid> {
        let bad = |msg: &str| Error::Config(format!("grid file: {msg}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split(',').collect();
        if header.len() != 4 {
            return Err(bad("header must be nx,ny,dx,dy"));
        }
        let nx: usize = header[0].trim().parse().map_err(|_| bad("nx"))?;
        let ny: usize = header[1].trim().parse().map_err(|_| bad("ny"))?;
        let dx: f64 = header[2].trim().parse().map_err(|_| bad("dx"))?;
        let dy: f64 = header[3].trim().parse().map_err(|_| bad("dy"))?;
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            for tok in line.split(',') {
                values.push(tok.trim().parse::<f64>().map_err(|_| bad("value"))?);
            }
        }
        if values.len() != nx * ny {
            return Err(bad("value count does not match header"));
        }
        Ok(Grid { nx, ny, dx, dy, origin: [0.0, 0.0], values })
    }
}
