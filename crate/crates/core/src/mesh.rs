//! Axis-aligned quadrilateral meshes on a rectangle with quadtree refinement.
//!
//! Cells are leaves of a forest of quadtrees rooted at the base `nx x ny`
//! grid. Every vertex and every Q2 node is addressed by an integer lattice
//! coordinate fine enough to resolve the midpoints of the deepest admissible
//! level, so node identity never depends on floating-point comparisons.
//!
//! A mesh may carry a horizontal slit: nodes on the slit are duplicated so
//! that cells above and below it are disconnected, which is how geometric
//! notches are represented.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Deepest refinement level supported by the lattice addressing.
pub const MAX_LEVEL: u32 = 20;
const BASE_UNITS: u64 = 1 << (MAX_LEVEL + 1);

/// Position of a cell in the quadtree forest: `(i, j)` index the cell on the
/// uniform grid of its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub level: u32,
    pub i: u64,
    pub j: u64,
}

impl CellKey {
    pub fn parent(&self) -> Option<CellKey> {
        (self.level > 0).then(|| CellKey { level: self.level - 1, i: self.i / 2, j: self.j / 2 })
    }

    /// Children in lexicographic (row, column) order: SW, SE, NW, NE.
    pub fn children(&self) -> [CellKey; 4] {
        let (l, i, j) = (self.level + 1, 2 * self.i, 2 * self.j);
        [
            CellKey { level: l, i, j },
            CellKey { level: l, i: i + 1, j },
            CellKey { level: l, i, j: j + 1 },
            CellKey { level: l, i: i + 1, j: j + 1 },
        ]
    }

    /// Lower-left lattice corner and lattice edge length.
    pub fn lattice_box(&self) -> (u64, u64, u64) {
        let size = BASE_UNITS >> self.level;
        (self.i * size, self.j * size, size)
    }
}

/// Lattice address of a node. `side` is 1 for the copy of a slit node that
/// belongs to the cells below the slit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub y: u64,
    pub x: u64,
    pub side: u8,
}

/// A horizontal cut from `x_start` to `x_end` at height `y`. Endpoints on
/// the domain boundary are duplicated; interior endpoints are crack tips and
/// stay shared.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Slit {
    pub y: f64,
    pub x_start: f64,
    pub x_end: f64,
}

#[derive(Clone, Copy, Debug)]
struct SlitLattice {
    y: u64,
    x0: u64,
    x1: u64,
    dup_x0: bool,
    dup_x1: bool,
}

impl SlitLattice {
    fn duplicates(&self, x: u64, y: u64) -> bool {
        y == self.y
            && ((x > self.x0 && x < self.x1) || (x == self.x0 && self.dup_x0) || (x == self.x1 && self.dup_x1))
    }

    fn covers_segment(&self, y: u64, xa: u64, xb: u64) -> bool {
        y == self.y && xa >= self.x0 && xb <= self.x1
    }
}

/// Membership test used to select cells for local refinement.
pub trait RegionPredicate {
    fn contains(&self, p: Point) -> bool;

    /// Whether the closed box `[lo, hi]` touches the region. The default
    /// samples corners, edge midpoints and the center.
    fn intersects_box(&self, lo: Point, hi: Point) -> bool {
        let xs = [lo[0], 0.5 * (lo[0] + hi[0]), hi[0]];
        let ys = [lo[1], 0.5 * (lo[1] + hi[1]), hi[1]];
        xs.iter().any(|&x| ys.iter().any(|&y| self.contains([x, y])))
    }
}

/// Closed axis-aligned box. An inverted box (lower > upper) is empty.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxRegion {
    pub lower: Point,
    pub upper: Point,
}

impl BoxRegion {
    pub fn new(lower: Point, upper: Point) -> Self {
        Self { lower, upper }
    }

    pub fn empty() -> Self {
        Self { lower: [1.0, 1.0], upper: [-1.0, -1.0] }
    }

    pub fn inflated(&self, by: f64) -> Self {
        Self {
            lower: [self.lower[0] - by, self.lower[1] - by],
            upper: [self.upper[0] + by, self.upper[1] + by],
        }
    }
}

impl RegionPredicate for BoxRegion {
    fn contains(&self, p: Point) -> bool {
        p[0] >= self.lower[0] && p[0] <= self.upper[0] && p[1] >= self.lower[1] && p[1] <= self.upper[1]
    }

    fn intersects_box(&self, lo: Point, hi: Point) -> bool {
        lo[0] <= self.upper[0] && hi[0] >= self.lower[0] && lo[1] <= self.upper[1] && hi[1] >= self.lower[1]
    }
}

/// Region given by an arbitrary point-membership closure.
pub struct FnRegion<F: Fn(Point) -> bool>(pub F);

impl<F: Fn(Point) -> bool> RegionPredicate for FnRegion<F> {
    fn contains(&self, p: Point) -> bool {
        (self.0)(p)
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub key: CellKey,
    /// Counterclockwise from the lower-left corner.
    pub vertices: [usize; 4],
}

/// Cell faces, in the order used by [`Mesh::neighbor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Face {
    South,
    East,
    North,
    West,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::South, Face::East, Face::North, Face::West];
}

/// A coarse face whose midpoint is a vertex of the two finer cells on the
/// other side.
#[derive(Clone, Debug)]
pub struct HangingFace {
    pub coarse_cell: usize,
    pub face: Face,
    pub a: NodeKey,
    pub b: NodeKey,
    pub mid: NodeKey,
}

/// Hanging vertex and the endpoints of the coarse face it bisects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HangingVertex {
    pub vertex: usize,
    pub endpoints: [usize; 2],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    lower: Point,
    upper: Point,
    base: [u64; 2],
    unit: [f64; 2],
    slit: Option<Slit>,
    slit_lattice: Option<SlitLattice>,
    cells: Vec<Cell>,
    leaf_index: HashMap<CellKey, usize>,
    vertices: Vec<Point>,
    vertex_keys: Vec<NodeKey>,
    vertex_index: HashMap<NodeKey, usize>,
    hanging_faces: Vec<HangingFace>,
    hanging_vertices: Vec<HangingVertex>,
}

impl Mesh {
    /// Uniform `nx x ny` tiling of the rectangle `[lower, upper]`.
    pub fn rectangle(lower: Point, upper: Point, subdivisions: (usize, usize)) -> Result<Mesh> {
        let (nx, ny) = subdivisions;
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(Error::Geometry(format!(
                "degenerate rectangle {lower:?}..{upper:?}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::Geometry("subdivisions must be at least 1".into()));
        }
        if !lower.iter().chain(upper.iter()).all(|v| v.is_finite()) {
            return Err(Error::Geometry("non-finite rectangle corner".into()));
        }
        let base = [nx as u64, ny as u64];
        let unit = [
            (upper[0] - lower[0]) / (nx as f64 * BASE_UNITS as f64),
            (upper[1] - lower[1]) / (ny as f64 * BASE_UNITS as f64),
        ];
        let leaves = (0..ny as u64)
            .flat_map(|j| (0..nx as u64).map(move |i| CellKey { level: 0, i, j }))
            .collect();
        Ok(Mesh::from_leaves(lower, upper, base, unit, None, leaves))
    }

    /// Cuts the mesh along a horizontal slit lying on base-grid lines.
    pub fn with_slit(self, slit: Slit) -> Result<Mesh> {
        let to_lattice = |v: f64, axis: usize| -> Option<u64> {
            let t = (v - self.lower[axis]) / (self.unit[axis] * BASE_UNITS as f64);
            let r = t.round();
            ((t - r).abs() < 1e-9 && r >= 0.0 && r <= self.base[axis] as f64).then(|| r as u64 * BASE_UNITS)
        };
        let (Some(y), Some(x0), Some(x1)) =
            (to_lattice(slit.y, 1), to_lattice(slit.x_start, 0), to_lattice(slit.x_end, 0))
        else {
            return Err(Error::Geometry(format!("slit {slit:?} is not aligned with base grid lines")));
        };
        if x1 <= x0 || y == 0 || y == self.base[1] * BASE_UNITS {
            return Err(Error::Geometry(format!("slit {slit:?} is empty or on the boundary")));
        }
        let xmax = self.base[0] * BASE_UNITS;
        let sl = SlitLattice { y, x0, x1, dup_x0: x0 == 0, dup_x1: x1 == xmax };
        let leaves = self.cells.iter().map(|c| c.key).collect();
        Ok(Mesh::from_leaves(self.lower, self.upper, self.base, self.unit, Some((slit, sl)), leaves))
    }

    fn from_leaves(
        lower: Point,
        upper: Point,
        base: [u64; 2],
        unit: [f64; 2],
        slit: Option<(Slit, SlitLattice)>,
        mut leaves: Vec<CellKey>,
    ) -> Mesh {
        leaves.sort_by_key(|k| {
            let (x, y, s) = k.lattice_box();
            (y, x, s)
        });
        let mut mesh = Mesh {
            lower,
            upper,
            base,
            unit,
            slit: slit.map(|s| s.0),
            slit_lattice: slit.map(|s| s.1),
            cells: Vec::with_capacity(leaves.len()),
            leaf_index: HashMap::with_capacity(leaves.len()),
            vertices: Vec::new(),
            vertex_keys: Vec::new(),
            vertex_index: HashMap::new(),
            hanging_faces: Vec::new(),
            hanging_vertices: Vec::new(),
        };
        let mut keys = BTreeSet::new();
        for k in &leaves {
            for (x, y) in Self::corner_lattice(k) {
                keys.insert(mesh.node_key_for(k, x, y));
            }
        }
        for (idx, key) in keys.into_iter().enumerate() {
            mesh.vertex_index.insert(key, idx);
            mesh.vertices.push(mesh.lattice_point(key.x, key.y));
            mesh.vertex_keys.push(key);
        }
        for (idx, k) in leaves.iter().enumerate() {
            let corners = Self::corner_lattice(k);
            let vertices = corners.map(|(x, y)| mesh.vertex_index[&mesh.node_key_for(k, x, y)]);
            mesh.cells.push(Cell { key: *k, vertices });
            mesh.leaf_index.insert(*k, idx);
        }
        mesh.detect_hanging();
        mesh
    }

    fn corner_lattice(k: &CellKey) -> [(u64, u64); 4] {
        let (x, y, s) = k.lattice_box();
        [(x, y), (x + s, y), (x + s, y + s), (x, y + s)]
    }

    fn node_key_for(&self, cell: &CellKey, x: u64, y: u64) -> NodeKey {
        let side = match self.slit_lattice {
            Some(sl) if sl.duplicates(x, y) => {
                let (_, cy, s) = cell.lattice_box();
                u8::from(cy + s == y)
            }
            _ => 0,
        };
        NodeKey { y, x, side }
    }

    /// Lattice address of the node at lattice point `(x, y)` as seen from `cell`.
    pub fn node_key(&self, cell: usize, x: u64, y: u64) -> NodeKey {
        self.node_key_for(&self.cells[cell].key, x, y)
    }

    pub fn lattice_point(&self, x: u64, y: u64) -> Point {
        [self.lower[0] + x as f64 * self.unit[0], self.lower[1] + y as f64 * self.unit[1]]
    }

    fn level_extent(&self, level: u32) -> (u64, u64) {
        (self.base[0] << level, self.base[1] << level)
    }

    fn neighbor_key(&self, k: &CellKey, face: Face) -> Option<CellKey> {
        let (nx, ny) = self.level_extent(k.level);
        let (i, j) = (k.i as i64, k.j as i64);
        let (ni, nj) = match face {
            Face::South => (i, j - 1),
            Face::East => (i + 1, j),
            Face::North => (i, j + 1),
            Face::West => (i - 1, j),
        };
        (ni >= 0 && nj >= 0 && (ni as u64) < nx && (nj as u64) < ny).then(|| CellKey {
            level: k.level,
            i: ni as u64,
            j: nj as u64,
        })
    }

    /// Leaf across `face` that is at the same level or coarser, with the
    /// level difference. `None` on the boundary or when the neighbor side is
    /// finer.
    fn coarser_or_equal_neighbor(
        leaves: &impl Fn(&CellKey) -> bool,
        nk: CellKey,
    ) -> Option<(CellKey, u32)> {
        let mut key = nk;
        let mut diff = 0;
        loop {
            if leaves(&key) {
                return Some((key, diff));
            }
            key = key.parent()?;
            diff += 1;
        }
    }

    fn detect_hanging(&mut self) {
        let mut seen = HashSet::new();
        let mut faces = Vec::new();
        for c in &self.cells {
            for face in Face::ALL {
                let Some(nk) = self.neighbor_key(&c.key, face) else { continue };
                if self.leaf_index.contains_key(&nk) {
                    continue;
                }
                let Some(pk) = nk.parent() else { continue };
                let Some(&coarse) = self.leaf_index.get(&pk) else { continue };
                let opposite = match face {
                    Face::South => Face::North,
                    Face::North => Face::South,
                    Face::East => Face::West,
                    Face::West => Face::East,
                };
                if seen.insert((coarse, opposite)) {
                    faces.push((coarse, opposite));
                }
            }
        }
        faces.sort_by_key(|&(c, f)| (c, f as u8));
        for (coarse, face) in faces {
            let key = self.cells[coarse].key;
            let (x, y, s) = key.lattice_box();
            let ((ax, ay), (bx, by)) = match face {
                Face::South => ((x, y), (x + s, y)),
                Face::East => ((x + s, y), (x + s, y + s)),
                Face::North => ((x, y + s), (x + s, y + s)),
                Face::West => ((x, y), (x, y + s)),
            };
            if let Some(sl) = self.slit_lattice {
                if ay == by && sl.covers_segment(ay, ax, bx) {
                    continue;
                }
            }
            let a = self.node_key_for(&key, ax, ay);
            let b = self.node_key_for(&key, bx, by);
            let mid = self.node_key_for(&key, (ax + bx) / 2, (ay + by) / 2);
            if let Some(&v) = self.vertex_index.get(&mid) {
                self.hanging_vertices.push(HangingVertex {
                    vertex: v,
                    endpoints: [self.vertex_index[&a], self.vertex_index[&b]],
                });
            }
            self.hanging_faces.push(HangingFace { coarse_cell: coarse, face, a, b, mid });
        }
    }

    /// Splits every cell into four children.
    pub fn refine_uniform(&self) -> Mesh {
        let leaves = self.cells.iter().flat_map(|c| c.key.children()).collect();
        self.rebuild(leaves)
    }

    /// Refines cells touching `region` for `times` generations, then closes
    /// the mesh to one-irregularity by refining coarse neighbors.
    pub fn refine_region(&self, region: &dyn RegionPredicate, times: usize) -> Mesh {
        let mut leaves: HashSet<CellKey> = self.cells.iter().map(|c| c.key).collect();
        for _ in 0..times {
            let marked: Vec<CellKey> = leaves
                .iter()
                .copied()
                .filter(|k| {
                    let (lo, hi) = self.key_bounds(k);
                    region.intersects_box(lo, hi)
                })
                .collect();
            if marked.is_empty() {
                break;
            }
            for k in marked {
                leaves.remove(&k);
                leaves.extend(k.children());
            }
            self.balance(&mut leaves);
        }
        self.rebuild(leaves.into_iter().collect())
    }

    fn balance(&self, leaves: &mut HashSet<CellKey>) {
        loop {
            let mut to_split = BTreeSet::new();
            for k in leaves.iter() {
                for face in Face::ALL {
                    let Some(nk) = self.neighbor_key(k, face) else { continue };
                    if let Some((coarse, diff)) =
                        Self::coarser_or_equal_neighbor(&|c: &CellKey| leaves.contains(c), nk)
                    {
                        if diff >= 2 {
                            to_split.insert(coarse);
                        }
                    }
                }
            }
            if to_split.is_empty() {
                return;
            }
            for k in to_split {
                leaves.remove(&k);
                leaves.extend(k.children());
            }
        }
    }

    fn rebuild(&self, leaves: Vec<CellKey>) -> Mesh {
        let slit = self.slit.zip(self.slit_lattice);
        Mesh::from_leaves(self.lower, self.upper, self.base, self.unit, slit, leaves)
    }

    fn key_bounds(&self, k: &CellKey) -> (Point, Point) {
        let (x, y, s) = k.lattice_box();
        (self.lattice_point(x, y), self.lattice_point(x + s, y + s))
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn vertex_key(&self, v: usize) -> NodeKey {
        self.vertex_keys[v]
    }

    pub fn vertex_of_key(&self, key: &NodeKey) -> Option<usize> {
        self.vertex_index.get(key).copied()
    }

    pub fn cell_level(&self, c: usize) -> u32 {
        self.cells[c].key.level
    }

    pub fn max_level(&self) -> u32 {
        self.cells.iter().map(|c| c.key.level).max().unwrap_or(0)
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn slit(&self) -> Option<Slit> {
        self.slit
    }

    pub fn hanging_faces(&self) -> &[HangingFace] {
        &self.hanging_faces
    }

    pub fn hanging_vertices(&self) -> &[HangingVertex] {
        &self.hanging_vertices
    }

    pub fn leaf(&self, key: &CellKey) -> Option<usize> {
        self.leaf_index.get(key).copied()
    }

    /// Lower-left and upper-right corners.
    pub fn cell_bounds(&self, c: usize) -> (Point, Point) {
        self.key_bounds(&self.cells[c].key)
    }

    /// Edge lengths `(hx, hy)`.
    pub fn cell_size(&self, c: usize) -> [f64; 2] {
        let (lo, hi) = self.cell_bounds(c);
        [hi[0] - lo[0], hi[1] - lo[1]]
    }

    /// Diagonal length, the `h` reported alongside results.
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let [hx, hy] = self.cell_size(c);
        hx.hypot(hy)
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [hx, hy] = self.cell_size(c);
        hx * hy
    }

    pub fn cell_center(&self, c: usize) -> Point {
        let (lo, hi) = self.cell_bounds(c);
        [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_diameter(c)).fold(0.0, f64::max)
    }

    /// Smallest cell edge length.
    pub fn min_edge(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| {
                let [hx, hy] = self.cell_size(c);
                hx.min(hy)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Leaf across `face` of cell `c` at the same or a coarser level.
    pub fn neighbor(&self, c: usize, face: Face) -> Option<usize> {
        let nk = self.neighbor_key(&self.cells[c].key, face)?;
        Self::coarser_or_equal_neighbor(&|k: &CellKey| self.leaf_index.contains_key(k), nk)
            .map(|(k, _)| self.leaf_index[&k])
    }

    /// Cell containing `p` and the reference coordinates of `p` in it. Points
    /// on shared edges resolve to the first cell in mesh order, which for a
    /// point on a slit is the cell below it.
    pub fn locate(&self, p: Point) -> Option<(usize, Point)> {
        let tol = 1e-12 * (self.upper[0] - self.lower[0]).abs().max(1.0);
        for c in 0..self.n_cells() {
            let (lo, hi) = self.cell_bounds(c);
            if p[0] >= lo[0] - tol && p[0] <= hi[0] + tol && p[1] >= lo[1] - tol && p[1] <= hi[1] + tol {
                let xi = ((p[0] - lo[0]) / (hi[0] - lo[0])).clamp(0.0, 1.0);
                let eta = ((p[1] - lo[1]) / (hi[1] - lo[1])).clamp(0.0, 1.0);
                return Some((c, [xi, eta]));
            }
        }
        None
    }

    /// Checks one-irregularity, hanging-vertex placement and area
    /// conservation. Returns a description of the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (c, cell) in self.cells.iter().enumerate() {
            let [hx, hy] = self.cell_size(c);
            if !(hx > 0.0 && hy > 0.0) {
                return Err(format!("cell {c} has non-positive Jacobian"));
            }
            for face in Face::ALL {
                let Some(nk) = self.neighbor_key(&cell.key, face) else { continue };
                if let Some((_, diff)) =
                    Self::coarser_or_equal_neighbor(&|k: &CellKey| self.leaf_index.contains_key(k), nk)
                {
                    if diff > 1 {
                        return Err(format!("cell {c} has a neighbor {diff} levels coarser"));
                    }
                }
            }
        }
        for hv in &self.hanging_vertices {
            let [a, b] = hv.endpoints.map(|v| self.vertex(v));
            let m = self.vertex(hv.vertex);
            let scale = (b[0] - a[0]).hypot(b[1] - a[1]);
            let d = (m[0] - 0.5 * (a[0] + b[0])).hypot(m[1] - 0.5 * (a[1] + b[1]));
            if d > 1e-12 * scale.max(1.0) {
                return Err(format!("hanging vertex {} is off its face midpoint by {d}", hv.vertex));
            }
        }
        let area: f64 = (0..self.n_cells()).map(|c| self.cell_area(c)).sum();
        let expected = (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1]);
        if ((area - expected) / expected).abs() > 1e-10 {
            return Err(format!("cell areas sum to {area}, domain area is {expected}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_rectangle() {
        let m = Mesh::rectangle([-10.0, -10.0], [10.0, 10.0], (1, 1)).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert!((m.cell_diameter(0) - 20.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_tiling() {
        let m = Mesh::rectangle([0.0, 0.0], [4.0, 4.0], (2, 2)).unwrap();
        assert_eq!(m.n_cells(), 4);
        for c in 0..4 {
            assert_eq!(m.cell_size(c), [2.0, 2.0]);
        }
    }

    #[test]
    fn degenerate_rectangle_rejected() {
        assert!(Mesh::rectangle([0.0, 0.0], [0.0, 1.0], (1, 1)).is_err());
        assert!(Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (0, 1)).is_err());
    }

    #[test]
    fn sneddon_coarse_resolution() {
        let mut m = Mesh::rectangle([-10.0, -10.0], [10.0, 10.0], (5, 5)).unwrap();
        for _ in 0..3 {
            m = m.refine_uniform();
        }
        assert_eq!(m.n_cells(), 40 * 40);
        assert!((m.h_max() - 0.5 * 2f64.sqrt()).abs() < 1e-12);
        assert!((m.h_max() - m.h_min()).abs() < 1e-12 * m.h_max());
    }

    #[test]
    fn uniform_refinement_counts() {
        let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (3, 3)).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.n_cells(), 36);
        assert_eq!(r.n_vertices(), 7 * 7);
        assert!((r.h_max() - m.h_max() / 2.0).abs() < 1e-14);
        // h = 0.353 -> 0.176
        let mut s = Mesh::rectangle([-10.0, -10.0], [10.0, 10.0], (5, 5)).unwrap();
        for _ in 0..4 {
            s = s.refine_uniform();
        }
        assert!((s.h_max() - 0.3535533905932738).abs() < 1e-12);
        assert!((s.refine_uniform().h_max() - 0.1767766952966369).abs() < 1e-12);
    }

    #[test]
    fn whole_domain_region_equals_uniform() {
        let m = Mesh::rectangle([0.0, 0.0], [2.0, 1.0], (2, 1)).unwrap();
        let everything = BoxRegion::new([-1.0, -1.0], [3.0, 3.0]);
        let a = m.refine_region(&everything, 2);
        let b = m.refine_uniform().refine_uniform();
        assert_eq!(a.n_cells(), b.n_cells());
        for (ca, cb) in a.cells().iter().zip(b.cells()) {
            assert_eq!(ca.key, cb.key);
            assert_eq!(ca.vertices, cb.vertices);
        }
    }

    #[test]
    fn empty_region_is_noop() {
        let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (2, 2)).unwrap();
        let r = m.refine_region(&BoxRegion::empty(), 3);
        assert_eq!(r.n_cells(), 4);
        assert!(r.hanging_vertices().is_empty());
    }

    #[test]
    fn local_refinement_is_one_irregular() {
        let m = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (2, 2)).unwrap();
        let corner = BoxRegion::new([0.0, 0.0], [0.01, 0.01]);
        let r = m.refine_region(&corner, 4);
        r.check_invariants().unwrap();
        assert!(!r.hanging_vertices().is_empty());
        assert!(r.max_level() == 4);
    }

    #[test]
    fn slit_duplicates_nodes() {
        let m = Mesh::rectangle([0.0, 0.0], [4.0, 4.0], (2, 2)).unwrap();
        let plain = m.refine_uniform();
        let cut = m
            .with_slit(Slit { y: 2.0, x_start: 0.0, x_end: 2.0 })
            .unwrap()
            .refine_uniform();
        // nodes at x = 0, 1 on y = 2 duplicated, tip at x = 2 shared
        assert_eq!(cut.n_vertices(), plain.n_vertices() + 2);
        assert!(cut.hanging_vertices().is_empty());
    }

    #[test]
    fn misaligned_slit_rejected() {
        let m = Mesh::rectangle([0.0, 0.0], [4.0, 4.0], (2, 2)).unwrap();
        assert!(m.with_slit(Slit { y: 1.0, x_start: 0.0, x_end: 2.0 }).is_err());
    }

    #[test]
    fn locate_point() {
        let m = Mesh::rectangle([0.0, 0.0], [2.0, 2.0], (2, 2)).unwrap();
        let (c, r) = m.locate([1.5, 0.25]).unwrap();
        assert_eq!(c, 1);
        assert!((r[0] - 0.5).abs() < 1e-14 && (r[1] - 0.25).abs() < 1e-14);
    }
}
