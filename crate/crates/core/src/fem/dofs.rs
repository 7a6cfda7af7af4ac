//! Continuous Lagrange dof numbering on a [`Mesh`].

use std::collections::{BTreeMap, BTreeSet};

use super::constraints::ConstraintSet;
use super::shape;
use crate::mesh::{Mesh, NodeKey, Point};

/// Continuous Q1 or Q2 space with one or two components. Vector dofs are
/// interleaved: dof `c` of node `n` is `components * n + c`.
#[derive(Clone, Debug)]
pub struct DofHandler {
    degree: usize,
    components: usize,
    node_keys: Vec<NodeKey>,
    node_coords: Vec<Point>,
    cell_nodes: Vec<usize>,
    hanging: Vec<(usize, Vec<(usize, f64)>)>,
}

impl DofHandler {
    pub fn new(mesh: &Mesh, degree: usize, components: usize) -> Self {
        assert!(degree == 1 || degree == 2, "unsupported degree {degree}");
        assert!(components == 1 || components == 2);
        let per_cell = (degree + 1) * (degree + 1);
        let ref_nodes = shape::nodes(degree);
        let lattice = |c: usize| -> Vec<(u64, u64)> {
            let (x, y, s) = mesh.cell(c).key.lattice_box();
            let half = s / 2;
            ref_nodes
                .iter()
                .map(|p| (x + (p[0] * 2.0) as u64 * half, y + (p[1] * 2.0) as u64 * half))
                .collect()
        };
        let mut keys = BTreeSet::new();
        let mut raw_cells = Vec::with_capacity(mesh.n_cells() * per_cell);
        for c in 0..mesh.n_cells() {
            for (x, y) in lattice(c) {
                let k = mesh.node_key(c, x, y);
                keys.insert(k);
                raw_cells.push(k);
            }
        }
        let node_keys: Vec<NodeKey> = keys.into_iter().collect();
        let index: BTreeMap<NodeKey, usize> = node_keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let node_coords = node_keys.iter().map(|k| mesh.lattice_point(k.x, k.y)).collect();
        let cell_nodes = raw_cells.iter().map(|k| index[k]).collect();

        let mut hanging = Vec::new();
        for f in mesh.hanging_faces() {
            let a = index[&f.a];
            let b = index[&f.b];
            let m = index[&f.mid];
            match degree {
                1 => hanging.push((m, vec![(a, 0.5), (b, 0.5)])),
                _ => {
                    let quarter = |p: &NodeKey, q: &NodeKey| NodeKey { x: (p.x + q.x) / 2, y: (p.y + q.y) / 2, side: 0 };
                    let qa = quarter(&f.a, &f.mid);
                    let qb = quarter(&f.mid, &f.b);
                    let (l, _) = shape::quad_1d(0.25);
                    if let Some(&n) = index.get(&qa) {
                        hanging.push((n, vec![(a, l[0]), (m, l[1]), (b, l[2])]));
                    }
                    if let Some(&n) = index.get(&qb) {
                        hanging.push((n, vec![(a, l[2]), (m, l[1]), (b, l[0])]));
                    }
                }
            }
        }
        Self { degree, components, node_keys, node_coords, cell_nodes, hanging }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn nodes_per_cell(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.nodes_per_cell() * self.components
    }

    pub fn n_nodes(&self) -> usize {
        self.node_keys.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodes() * self.components
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn node_key(&self, n: usize) -> NodeKey {
        self.node_keys[n]
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let k = self.nodes_per_cell();
        &self.cell_nodes[c * k..(c + 1) * k]
    }

    /// Global dofs of cell `c`, local index `components * a + comp`.
    pub fn cell_dofs(&self, c: usize, out: &mut Vec<usize>) {
        out.clear();
        for &n in self.cell_nodes(c) {
            for comp in 0..self.components {
                out.push(self.components * n + comp);
            }
        }
    }

    /// Node-level hanging constraints `(slave, [(master, weight)])`.
    pub fn hanging_nodes(&self) -> &[(usize, Vec<(usize, f64)>)] {
        &self.hanging
    }

    pub fn hanging_constraints(&self) -> ConstraintSet {
        let mut cs = ConstraintSet::new(self.n_dofs());
        let nc = self.components;
        for (s, masters) in &self.hanging {
            for comp in 0..nc {
                cs.add_line(nc * s + comp, masters.iter().map(|&(m, w)| (nc * m + comp, w)).collect(), 0.0);
            }
        }
        cs
    }

    pub fn nodes_where(&self, pred: impl Fn(Point) -> bool) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&n| pred(self.node_coords[n])).collect()
    }

    /// Nodal interpolant of `f` (per component).
    pub fn interpolate(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for (n, &p) in self.node_coords.iter().enumerate() {
            let v = f(p);
            for comp in 0..self.components {
                out[self.components * n + comp] = v[comp];
            }
        }
        out
    }

    /// Value (per component) of the field `x` at reference point `xi` in cell `c`.
    pub fn evaluate(&self, mesh: &Mesh, x: &[f64], c: usize, xi: Point) -> [f64; 2] {
        let mut v = Vec::new();
        let mut g = Vec::new();
        shape::eval(self.degree, xi, mesh.cell_size(c), &mut v, &mut g);
        let mut out = [0.0; 2];
        for (a, &n) in self.cell_nodes(c).iter().enumerate() {
            for comp in 0..self.components {
                out[comp] += v[a] * x[self.components * n + comp];
            }
        }
        out
    }
}
