//! Planform geometry and quadrilateral mesh generation.
//!
//! All planforms are centered on the origin. Coordinates are generated from
//! integer ratios so that meshes symmetric about the x-axis are symmetric
//! bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plate outline. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlateGeometry {
    /// `a` along the body x-axis, `b` along body y, rotated counterclockwise
    /// by `rotation_deg` about the center.
    Rectangle {
        a: f64,
        b: f64,
        #[serde(default)]
        rotation_deg: f64,
    },
    Circle { radius: f64 },
    /// Union of an `overall_length × arm_width` bar along x and an
    /// `arm_width × overall_width` bar along y.
    Cross { overall_length: f64, overall_width: f64, arm_width: f64 },
}

impl PlateGeometry {
    pub fn validate(&self) -> Result<()> {
        let dims: Vec<f64> = match *self {
            PlateGeometry::Rectangle { a, b, rotation_deg } => {
                if !rotation_deg.is_finite() {
                    return Err(Error::Config("rotation must be finite".into()));
                }
                vec![a, b]
            }
            PlateGeometry::Circle { radius } => vec![radius],
            PlateGeometry::Cross { overall_length, overall_width, arm_width } => {
                if arm_width > overall_length.min(overall_width) {
                    return Err(Error::Config("cross arm_width exceeds the overall dimensions".into()));
                }
                vec![overall_length, overall_width, arm_width]
            }
        };
        if dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!("planform dimensions must be positive: {self:?}")))
        }
    }

    /// The smallest dimension that the element size has to resolve.
    pub fn smallest_dimension(&self) -> f64 {
        match *self {
            PlateGeometry::Rectangle { a, b, .. } => a.min(b),
            PlateGeometry::Circle { radius } => radius,
            PlateGeometry::Cross { arm_width, .. } => arm_width,
        }
    }

    /// Shortest span across the planform.
    pub fn shortest_span(&self) -> f64 {
        match *self {
            PlateGeometry::Rectangle { a, b, .. } => a.min(b),
            PlateGeometry::Circle { radius } => 2.0 * radius,
            PlateGeometry::Cross { overall_length, overall_width, .. } => overall_length.min(overall_width),
        }
    }

    /// Exact planform area.
    pub fn area(&self) -> f64 {
        match *self {
            PlateGeometry::Rectangle { a, b, .. } => a * b,
            PlateGeometry::Circle { radius } => std::f64::consts::PI * radius * radius,
            PlateGeometry::Cross { overall_length, overall_width, arm_width } => {
                arm_width * (overall_length + overall_width - arm_width)
            }
        }
    }
}

/// Rectangle edges in the body frame (before rotation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

/// Quadrilateral mesh with three DOFs per node: (w, θx, θy).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub geometry: PlateGeometry,
    pub element_size: f64,
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise node indices.
    pub elements: Vec<[usize; 4]>,
}

pub const DOFS_PER_NODE: usize = 3;

/// Quantization used to match coincident nodes (1 nm).
const KEY_SCALE: f64 = 1e9;

fn key(p: [f64; 2]) -> (i64, i64) {
    ((p[0] * KEY_SCALE).round() as i64, (p[1] * KEY_SCALE).round() as i64)
}

/// Deduplicating node builder; nodes keep first-insertion order.
#[derive(Default)]
struct NodeSet {
    index: HashMap<(i64, i64), usize>,
    nodes: Vec<[f64; 2]>,
}

impl NodeSet {
    fn insert(&mut self, p: [f64; 2]) -> usize {
        let k = key(p);
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        self.nodes.push(p);
        self.index.insert(k, self.nodes.len() - 1);
        self.nodes.len() - 1
    }
}

/// `n + 1` coordinates from `-half` to `half`, exactly antisymmetric.
fn symmetric_ticks(half: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| half * (2 * i as i64 - n as i64) as f64 / n as f64)
        .collect()
}

/// Tick coordinates through the given breakpoints, each interval divided so
/// that spacing does not exceed `size`; antisymmetric when the breakpoints are.
fn piecewise_ticks(breaks: &[f64], size: f64) -> Vec<f64> {
    let mut ticks = vec![breaks[0]];
    for w in breaks.windows(2) {
        let n = divisions(w[1] - w[0], size);
        for k in 1..=n {
            ticks.push(if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 });
        }
    }
    let n = ticks.len() - 1;
    for k in 0..=n / 2 {
        let v = 0.5 * (ticks[k] - ticks[n - k]);
        ticks[k] = v;
        ticks[n - k] = -v;
    }
    ticks
}

fn divisions(length: f64, size: f64) -> usize {
    ((length / size) - 1e-9).ceil().max(1.0) as usize
}

fn signed_area(p: &[[f64; 2]; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        let a = p[i];
        let b = p[(i + 1) % 4];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

/// Meshes `geometry` with quadrilaterals no larger than `target_element_size`.
pub fn generate_mesh(geometry: &PlateGeometry, target_element_size: f64) -> Result<Mesh> {
    geometry.validate()?;
    let size = target_element_size;
    if !(size.is_finite() && size > 0.0) || size > 0.5 * geometry.smallest_dimension() {
        return Err(Error::Config(format!(
            "element size {size} must be positive and at most half of {}",
            geometry.smallest_dimension()
        )));
    }
    let mut set = NodeSet::default();
    let mut quads: Vec<[usize; 4]> = Vec::new();
    match *geometry {
        PlateGeometry::Rectangle { a, b, rotation_deg } => {
            let xs = symmetric_ticks(0.5 * a, divisions(a, size));
            let ys = symmetric_ticks(0.5 * b, divisions(b, size));
            let (c, s) = crate::analytic::cos_sin_deg(rotation_deg);
            let rot = |u: f64, v: f64| if rotation_deg == 0.0 { [u, v] } else { [c * u - s * v, s * u + c * v] };
            let mut id = vec![vec![0usize; xs.len()]; ys.len()];
            for (j, &v) in ys.iter().enumerate() {
                for (i, &u) in xs.iter().enumerate() {
                    id[j][i] = set.insert(rot(u, v));
                }
            }
            for j in 0..ys.len() - 1 {
                for i in 0..xs.len() - 1 {
                    quads.push([id[j][i], id[j][i + 1], id[j + 1][i + 1], id[j + 1][i]]);
                }
            }
        }
        PlateGeometry::Cross { overall_length, overall_width, arm_width } => {
            let (hl, hw, ha) = (0.5 * overall_length, 0.5 * overall_width, 0.5 * arm_width);
            let xs = piecewise_ticks(&dedup_breaks(&[-hl, -ha, ha, hl]), size);
            let ys = piecewise_ticks(&dedup_breaks(&[-hw, -ha, ha, hw]), size);
            let inside = |x: f64, y: f64| (y.abs() <= ha && x.abs() <= hl) || (x.abs() <= ha && y.abs() <= hw);
            let mut cells = Vec::new();
            for j in 0..ys.len() - 1 {
                for i in 0..xs.len() - 1 {
                    let cx = 0.5 * (xs[i] + xs[i + 1]);
                    let cy = 0.5 * (ys[j] + ys[j + 1]);
                    if inside(cx, cy) {
                        cells.push((i, j));
                    }
                }
            }
            // number only the nodes that are used, row-major
            let mut used = BTreeMap::new();
            for &(i, j) in &cells {
                for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                    used.insert((j + dj, i + di), ());
                }
            }
            let mut id = HashMap::new();
            for &(j, i) in used.keys() {
                id.insert((i, j), set.insert([xs[i], ys[j]]));
            }
            for (i, j) in cells {
                quads.push([id[&(i, j)], id[&(i + 1, j)], id[&(i + 1, j + 1)], id[&(i, j + 1)]]);
            }
        }
        PlateGeometry::Circle { radius } => circle_blocks(radius, size, &mut set, &mut quads),
    }
    let nodes = set.nodes;
    let mut elements = Vec::with_capacity(quads.len());
    for (e, q) in quads.into_iter().enumerate() {
        let p = [nodes[q[0]], nodes[q[1]], nodes[q[2]], nodes[q[3]]];
        let area = signed_area(&p);
        if area.abs() < 1e-14 * size * size {
            return Err(Error::Assembly { element: e, reason: "degenerate quadrilateral".into() });
        }
        elements.push(if area > 0.0 { q } else { [q[0], q[3], q[2], q[1]] });
    }
    Ok(Mesh { geometry: *geometry, element_size: size, nodes, elements })
}

fn dedup_breaks(b: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in b {
        if out.last().is_none_or(|l| v > *l) {
            out.push(v);
        }
    }
    out
}

/// O-grid: a central square block plus four sectors blended out to the arc.
fn circle_blocks(radius: f64, size: f64, set: &mut NodeSet, quads: &mut Vec<[usize; 4]>) {
    let half = 0.5 * radius;
    let nc = {
        let n = divisions(std::f64::consts::FRAC_PI_2 * radius, size);
        n + n % 2
    };
    let nr = divisions(radius - half, size);
    let ticks = symmetric_ticks(half, nc);
    let mut id = vec![vec![0usize; nc + 1]; nc + 1];
    for j in 0..=nc {
        for i in 0..=nc {
            id[j][i] = set.insert([ticks[i], ticks[j]]);
        }
    }
    for j in 0..nc {
        for i in 0..nc {
            quads.push([id[j][i], id[j][i + 1], id[j + 1][i + 1], id[j + 1][i]]);
        }
    }
    // right sector in local coordinates, then quarter-turn copies
    let rotations: [fn([f64; 2]) -> [f64; 2]; 4] = [
        |p| p,
        |p| [-p[1], p[0]],
        |p| [-p[0], -p[1]],
        |p| [p[1], -p[0]],
    ];
    for rot in rotations {
        let mut sid = vec![vec![0usize; nr + 1]; nc + 1];
        for (i, &t) in ticks.iter().enumerate() {
            let tau = t / half;
            // odd in tau and exact at the ±45° corners shared with the
            // neighbouring sectors
            let (c, s) = if tau.abs() == 1.0 {
                (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
            } else {
                let theta = tau.abs() * FRAC_PI_4;
                (theta.cos(), theta.sin())
            };
            let s = s.copysign(tau);
            let sq = [half, t];
            let arc = [radius * c, radius * s];
            for (k, row) in sid[i].iter_mut().enumerate() {
                let s = k as f64 / nr as f64;
                let p = if k == 0 {
                    sq
                } else if k == nr {
                    arc
                } else {
                    [(1.0 - s) * sq[0] + s * arc[0], (1.0 - s) * sq[1] + s * arc[1]]
                };
                *row = set.insert(rot(p));
            }
        }
        for i in 0..nc {
            for k in 0..nr {
                quads.push([sid[i][k], sid[i][k + 1], sid[i + 1][k + 1], sid[i + 1][k]]);
            }
        }
    }
}

impl Mesh {
    pub fn dof_count(&self) -> usize {
        DOFS_PER_NODE * self.nodes.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 4] {
        let q = self.elements[e];
        [self.nodes[q[0]], self.nodes[q[1]], self.nodes[q[2]], self.nodes[q[3]]]
    }

    /// Global DOF indices of element `e` in (w, θx, θy) node-major order.
    pub fn element_dofs(&self, e: usize) -> [usize; 12] {
        let q = self.elements[e];
        let mut d = [0; 12];
        for (i, n) in q.iter().enumerate() {
            for c in 0..DOFS_PER_NODE {
                d[DOFS_PER_NODE * i + c] = DOFS_PER_NODE * n + c;
            }
        }
        d
    }

    pub fn element_centroid(&self, e: usize) -> [f64; 2] {
        let p = self.element_coords(e);
        [
            0.25 * (p[0][0] + p[1][0] + p[2][0] + p[3][0]),
            0.25 * (p[0][1] + p[1][1] + p[2][1] + p[3][1]),
        ]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        signed_area(&self.element_coords(e))
    }

    /// Total meshed area.
    pub fn area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Nodes on edges that belong to exactly one element, ascending.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for q in &self.elements {
            for i in 0..4 {
                let (a, b) = (q[i], q[(i + 1) % 4]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut nodes: Vec<usize> = count
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .flat_map(|((a, b), _)| [a, b])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Boundary nodes on one body-frame edge of a rectangular planform.
    pub fn edge_nodes(&self, edge: Edge) -> Result<Vec<usize>> {
        let PlateGeometry::Rectangle { a, b, rotation_deg } = self.geometry else {
            return Err(Error::Config("edge constraints need a rectangular planform".into()));
        };
        let (c, s) = crate::analytic::cos_sin_deg(rotation_deg);
        let tol = 1e-6 * self.element_size;
        Ok(self
            .boundary_nodes()
            .into_iter()
            .filter(|&n| {
                let [x, y] = self.nodes[n];
                let (u, v) = (c * x + s * y, -s * x + c * y);
                match edge {
                    Edge::Left => (u + 0.5 * a).abs() < tol,
                    Edge::Right => (u - 0.5 * a).abs() < tol,
                    Edge::Bottom => (v + 0.5 * b).abs() < tol,
                    Edge::Top => (v - 0.5 * b).abs() < tol,
                }
            })
            .collect())
    }

    /// Node permutation for the reflection y → -y, if the mesh has that
    /// symmetry.
    pub fn mirror_map(&self) -> Option<Vec<usize>> {
        let index: HashMap<(i64, i64), usize> =
            self.nodes.iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
        self.nodes
            .iter()
            .map(|p| index.get(&key([p[0], -p[1]])).copied())
            .collect()
    }

    /// Locates the element containing `p` and its local coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, f64, f64)> {
        let slack = 1e-9 * self.element_size;
        for e in 0..self.elements.len() {
            let c = self.element_coords(e);
            let (lo_x, hi_x) = c.iter().fold((f64::MAX, f64::MIN), |(l, h), q| (l.min(q[0]), h.max(q[0])));
            let (lo_y, hi_y) = c.iter().fold((f64::MAX, f64::MIN), |(l, h), q| (l.min(q[1]), h.max(q[1])));
            if p[0] < lo_x - slack || p[0] > hi_x + slack || p[1] < lo_y - slack || p[1] > hi_y + slack {
                continue;
            }
            if let Some((xi, eta)) = inverse_bilinear(&c, p) {
                if xi.abs() <= 1.0 + 1e-9 && eta.abs() <= 1.0 + 1e-9 {
                    return Some((e, xi.clamp(-1.0, 1.0), eta.clamp(-1.0, 1.0)));
                }
            }
        }
        None
    }

    /// Node and element tables as CSV (`id,x,y` then `id,n1,n2,n3,n4`).
    pub fn to_csv(&self) -> (String, String) {
        let mut nodes = String::from("id,x,y\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(nodes, "{i},{},{}", crate::grid::fmt9(p[0]), crate::grid::fmt9(p[1]));
        }
        let mut elems = String::from("id,n1,n2,n3,n4\n");
        for (i, q) in self.elements.iter().enumerate() {
            let _ = writeln!(elems, "{i},{},{},{},{}", q[0], q[1], q[2], q[3]);
        }
        (nodes, elems)
    }
}

/// Bilinear shape functions at (ξ, η) with corners ordered (-1,-1), (1,-1), (1,1), (-1,1).
pub fn bilinear(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

pub(crate) const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

fn inverse_bilinear(c: &[[f64; 2]; 4], p: [f64; 2]) -> Option<(f64, f64)> {
    let (mut xi, mut eta) = (0.0, 0.0);
    for _ in 0..30 {
        let n = bilinear(xi, eta);
        let mut x = [0.0; 2];
        let mut j = [[0.0; 2]; 2];
        for a in 0..4 {
            let [sa, ta] = CORNERS[a];
            let dxi = 0.25 * sa * (1.0 + ta * eta);
            let deta = 0.25 * ta * (1.0 + sa * xi);
            for d in 0..2 {
                x[d] += n[a] * c[a][d];
                j[d][0] += dxi * c[a][d];
                j[d][1] += deta * c[a][d];
            }
        }
        let r = [p[0] - x[0], p[1] - x[1]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dxi = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let deta = (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        xi += dxi;
        eta += deta;
        if dxi.abs() < 1e-14 && deta.abs() < 1e-14 {
            break;
        }
        if xi.abs() > 10.0 || eta.abs() > 10.0 {
            return None;
        }
    }
    Some((xi, eta))
}
