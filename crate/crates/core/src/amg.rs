//! Smoothed-aggregation algebraic multigrid for the symmetric positive
//! definite blocks of the fracture system.
//!
//! Rows that carry only a diagonal entry (constrained or active dofs) are
//! decoupled from everything else. They are kept out of the aggregation,
//! get no coarse representation, and are solved exactly on every level.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsolve::krylov::Preconditioner;
use crate::mesh::Point;
use crate::sparse::{norm2, CsrMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmgSettings {
    /// Strength-of-connection threshold on node blocks.
    pub theta: f64,
    /// Prolongator damping is `omega_factor / rho(D^-1 A)`.
    pub omega_factor: f64,
    pub coarse_size: usize,
    pub max_levels: usize,
    pub power_iterations: usize,
    pub cheb_degree: usize,
    /// Chebyshev window as fractions of the spectral estimate.
    pub cheb_window: (f64, f64),
    pub symmetry_tol: f64,
}

impl Default for AmgSettings {
    fn default() -> Self {
        Self {
            theta: 0.02,
            omega_factor: 2.0 / 3.0,
            coarse_size: 64,
            max_levels: 20,
            power_iterations: 15,
            cheb_degree: 2,
            cheb_window: (0.25, 1.1),
            symmetry_tol: 1e-8,
        }
    }
}

impl AmgSettings {
    /// Settings for mass-like matrices: every connection is strong.
    pub fn mass() -> Self {
        Self { theta: 0.0, ..Self::default() }
    }
}

/// Near-nullspace vectors with the grouping of dofs into nodes.
#[derive(Clone, Debug)]
pub struct NearNullspace {
    pub node_of_dof: Vec<usize>,
    pub n_nodes: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl NearNullspace {
    /// Constants on a scalar field.
    pub fn scalar(n: usize) -> Self {
        Self { node_of_dof: (0..n).collect(), n_nodes: n, vectors: vec![vec![1.0; n]] }
    }

    /// Two translations and the in-plane rotation for interleaved 2D
    /// displacement dofs at the given node positions.
    pub fn elasticity(coords: &[Point]) -> Self {
        let n = coords.len();
        let c = coords.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
        let c = [c[0] / n.max(1) as f64, c[1] / n.max(1) as f64];
        let mut tx = vec![0.0; 2 * n];
        let mut ty = vec![0.0; 2 * n];
        let mut rot = vec![0.0; 2 * n];
        for (i, p) in coords.iter().enumerate() {
            tx[2 * i] = 1.0;
            ty[2 * i + 1] = 1.0;
            rot[2 * i] = -(p[1] - c[1]);
            rot[2 * i + 1] = p[0] - c[0];
        }
        Self { node_of_dof: (0..2 * n).map(|d| d / 2).collect(), n_nodes: n, vectors: vec![tx, ty, rot] }
    }
}

#[derive(Clone, Debug)]
struct Level {
    a: CsrMatrix,
    p: CsrMatrix,
    r: CsrMatrix,
    dinv: Vec<f64>,
    rho: f64,
    decoupled: Vec<usize>,
}

#[derive(Clone, Debug)]
enum Coarse {
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Pinv(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub struct AmgHierarchy {
    levels: Vec<Level>,
    coarse_a: CsrMatrix,
    coarse: Coarse,
    /// Coupled rows of the coarsest matrix, in the order of the dense factor.
    coarse_keep: Vec<usize>,
    coarse_dinv: Vec<f64>,
    settings: AmgSettings,
}

/// Largest coarsest level that is factorized densely.
const MAX_DENSE_COARSE: usize = 4000;

/// Deterministic pseudo-random start vector for the power iteration.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let h = (i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40;
            0.5 + (h as f64) / (1u64 << 24) as f64
        })
        .collect()
}

fn spectral_estimate(a: &CsrMatrix, dinv: &[f64], iters: usize) -> f64 {
    let n = a.nrows();
    let mut x = start_vector(n);
    let mut y = vec![0.0; n];
    let mut est = 0.0;
    for _ in 0..iters.max(1) {
        let nx = norm2(&x);
        if nx == 0.0 {
            return 1.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        a.spmv(&x, &mut y);
        y.iter_mut().zip(dinv).for_each(|(v, d)| *v *= d);
        est = norm2(&y);
        std::mem::swap(&mut x, &mut y);
    }
    if est > 0.0 {
        est
    } else {
        1.0
    }
}

/// Node-level strong neighbors. Nodes whose dofs are all decoupled get no
/// entry in `active`.
fn strength_graph(
    a: &CsrMatrix,
    ns: &NearNullspace,
    decoupled: &[bool],
    theta: f64,
) -> (Vec<Vec<usize>>, Vec<bool>) {
    let nn = ns.n_nodes;
    let mut dofs_of: Vec<Vec<usize>> = vec![Vec::new(); nn];
    for (d, &node) in ns.node_of_dof.iter().enumerate() {
        if !decoupled[d] {
            dofs_of[node].push(d);
        }
    }
    let active: Vec<bool> = dofs_of.iter().map(|d| !d.is_empty()).collect();
    let mut diag = vec![0.0; nn];
    let mut acc = vec![0.0; nn];
    let mut touched = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn];
    for i in 0..nn {
        for &d in &dofs_of[i] {
            let (cols, vals) = a.row(d);
            for (&c, &v) in cols.iter().zip(vals) {
                if decoupled[c] {
                    continue;
                }
                let j = ns.node_of_dof[c];
                if acc[j] == 0.0 {
                    touched.push(j);
                }
                acc[j] += v * v;
            }
        }
        for &j in &touched {
            let f = acc[j].sqrt();
            if j == i {
                diag[i] = f;
            } else if f > 0.0 {
                rows[i].push((j, f));
            }
            acc[j] = 0.0;
        }
        touched.clear();
    }
    let strong = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut s: Vec<usize> = row
                .iter()
                .filter(|&&(j, f)| f >= theta * (diag[i] * diag[j]).sqrt())
                .map(|&(j, _)| j)
                .collect();
            s.sort_unstable();
            s
        })
        .collect();
    (strong, active)
}

/// Greedy three-pass aggregation. Returns the aggregate of every active
/// node (`usize::MAX` for inactive ones) and the aggregate count.
pub(crate) fn aggregate(strong: &[Vec<usize>], active: &[bool]) -> (Vec<usize>, usize) {
    const NONE: usize = usize::MAX;
    let n = strong.len();
    let mut agg = vec![NONE; n];
    let mut count = 0;
    for i in 0..n {
        if !active[i] || agg[i] != NONE {
            continue;
        }
        if strong[i].iter().all(|&j| agg[j] == NONE) {
            agg[i] = count;
            for &j in &strong[i] {
                agg[j] = count;
            }
            count += 1;
        }
    }
    let first_pass = agg.clone();
    for i in 0..n {
        if !active[i] || agg[i] != NONE {
            continue;
        }
        if let Some(&j) = strong[i].iter().find(|&&j| first_pass[j] != NONE) {
            agg[i] = first_pass[j];
        }
    }
    for i in 0..n {
        if !active[i] || agg[i] != NONE {
            continue;
        }
        agg[i] = count;
        for &j in &strong[i] {
            if agg[j] == NONE {
                agg[j] = count;
            }
        }
        count += 1;
    }
    (agg, count)
}

/// Tentative prolongator from a per-aggregate QR of the near nullspace.
fn tentative(
    n: usize,
    ns: &NearNullspace,
    agg_of_node: &[usize],
    n_agg: usize,
    decoupled: &[bool],
) -> (CsrMatrix, NearNullspace) {
    let k = ns.vectors.len();
    let mut dofs_of: Vec<Vec<usize>> = vec![Vec::new(); n_agg];
    for d in 0..n {
        if decoupled[d] {
            continue;
        }
        let a = agg_of_node[ns.node_of_dof[d]];
        if a != usize::MAX {
            dofs_of[a].push(d);
        }
    }
    let mut triplets = Vec::new();
    let mut coarse_node = Vec::new();
    let mut coarse_vecs: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut offset = 0;
    for (a, dofs) in dofs_of.iter().enumerate() {
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut r: Vec<Vec<f64>> = Vec::new();
        for j in 0..k {
            let mut v: Vec<f64> = dofs.iter().map(|&d| ns.vectors[j][d]).collect();
            let orig = norm2(&v);
            let mut rcol = vec![0.0; q.len()];
            for _ in 0..2 {
                for (qi, qv) in q.iter().enumerate() {
                    let c: f64 = qv.iter().zip(&v).map(|(x, y)| x * y).sum();
                    rcol[qi] += c;
                    v.iter_mut().zip(qv).for_each(|(x, y)| *x -= c * y);
                }
            }
            let nv = norm2(&v);
            for (qi, &c) in rcol.iter().enumerate() {
                r[qi][j] = c;
            }
            if orig > 0.0 && nv > 1e-10 * orig {
                v.iter_mut().for_each(|x| *x /= nv);
                q.push(v);
                let mut row = vec![0.0; k];
                row[j] = nv;
                r.push(row);
            }
        }
        for (qi, qv) in q.iter().enumerate() {
            for (&d, &val) in dofs.iter().zip(qv) {
                triplets.push((d, offset + qi, val));
            }
            coarse_node.push(a);
            for j in 0..k {
                coarse_vecs[j].push(r[qi][j]);
            }
        }
        offset += q.len();
    }
    let p = CsrMatrix::from_triplets(n, offset, &triplets);
    (p, NearNullspace { node_of_dof: coarse_node, n_nodes: n_agg, vectors: coarse_vecs })
}

fn smooth_prolongator(a: &CsrMatrix, p: &CsrMatrix, dinv: &[f64], omega: f64) -> CsrMatrix {
    let ap = a.matmul(p);
    let mut triplets = Vec::with_capacity(p.nnz() + ap.nnz());
    for r in 0..p.nrows() {
        let (c, v) = p.row(r);
        triplets.extend(c.iter().zip(v).map(|(&c, &v)| (r, c, v)));
        let (c, v) = ap.row(r);
        triplets.extend(c.iter().zip(v).map(|(&c, &v)| (r, c, -omega * dinv[r] * v)));
    }
    CsrMatrix::from_triplets(p.nrows(), p.ncols(), &triplets)
}

impl AmgHierarchy {
    pub fn new(a: &CsrMatrix, ns: &NearNullspace, settings: &AmgSettings) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Parameter("AMG needs a square matrix".into()));
        }
        if ns.node_of_dof.len() != a.nrows() || ns.vectors.iter().any(|v| v.len() != a.nrows()) {
            return Err(Error::Parameter("near-nullspace size does not match the matrix".into()));
        }
        let asym = a.relative_asymmetry();
        if asym > settings.symmetry_tol {
            return Err(Error::NotSymmetric(asym));
        }
        if a.diagonal().iter().any(|&d| d < 0.0) {
            return Err(Error::Parameter("AMG needs a nonnegative diagonal".into()));
        }
        let mut levels = Vec::new();
        let mut cur = a.clone();
        let mut cur_ns = ns.clone();
        while cur.nrows() > settings.coarse_size && levels.len() + 1 < settings.max_levels {
            let n = cur.nrows();
            let diag = cur.diagonal();
            let mut decoupled = cur.decoupled_rows();
            for (i, &d) in diag.iter().enumerate() {
                if d == 0.0 {
                    decoupled[i] = true;
                }
            }
            let dinv: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
            let (strong, active) = strength_graph(&cur, &cur_ns, &decoupled, settings.theta);
            let (agg, n_agg) = aggregate(&strong, &active);
            let (pt, coarse_ns) = tentative(n, &cur_ns, &agg, n_agg, &decoupled);
            let nc = pt.ncols();
            if nc == 0 || nc as f64 > 0.9 * n as f64 {
                break;
            }
            let rho = spectral_estimate(&cur, &dinv, settings.power_iterations);
            let p = smooth_prolongator(&cur, &pt, &dinv, settings.omega_factor / rho);
            let r = p.transpose();
            let ac = r.matmul(&cur.matmul(&p));
            levels.push(Level {
                a: cur,
                p,
                r,
                dinv,
                rho,
                decoupled: decoupled.iter().enumerate().filter(|&(_, &d)| d).map(|(i, _)| i).collect(),
            });
            cur = ac;
            cur_ns = coarse_ns;
        }
        // decoupled rows stay out of the dense factorization
        let cdiag = cur.diagonal();
        let mut cdec = cur.decoupled_rows();
        cdec.iter_mut().zip(&cdiag).for_each(|(d, &v)| *d |= v == 0.0);
        let keep: Vec<usize> = (0..cur.nrows()).filter(|&i| !cdec[i]).collect();
        if keep.len() > MAX_DENSE_COARSE {
            return Err(Error::Parameter(format!(
                "AMG coarsening stalled with {} coupled rows on level {}",
                keep.len(),
                levels.len()
            )));
        }
        let mut pos = vec![usize::MAX; cur.nrows()];
        keep.iter().enumerate().for_each(|(k, &i)| pos[i] = k);
        let mut dense = DMatrix::<f64>::zeros(keep.len(), keep.len());
        for (k, &i) in keep.iter().enumerate() {
            let (c, v) = cur.row(i);
            for (&j, &val) in c.iter().zip(v) {
                if pos[j] != usize::MAX {
                    dense[(k, pos[j])] += val;
                }
            }
        }
        let lu = dense.clone().lu();
        let coarse = if lu.is_invertible() && lu.u().diagonal().iter().all(|d| d.abs() > 1e-13 * dense.amax()) {
            Coarse::Lu(lu)
        } else {
            let eps = 1e-12 * dense.amax().max(1e-300);
            Coarse::Pinv(dense.pseudo_inverse(eps).map_err(|_| Error::Singular)?)
        };
        let coarse_dinv = cdiag.iter().map(|&d| if d != 0.0 { 1.0 / d } else { 0.0 }).collect();
        Ok(Self { levels, coarse_a: cur, coarse, coarse_keep: keep, coarse_dinv, settings: *settings })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).chain(std::iter::once(self.coarse_a.nrows())).collect()
    }

    /// Sum of nonzeros over all levels divided by the fine-level count.
    pub fn operator_complexity(&self) -> f64 {
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum::<usize>() + self.coarse_a.nnz();
        let fine = self.levels.first().map_or(self.coarse_a.nnz(), |l| l.a.nnz());
        total as f64 / fine.max(1) as f64
    }

    pub fn settings(&self) -> &AmgSettings {
        &self.settings
    }

    fn coarse_solve(&self, b: &[f64], x: &mut [f64]) {
        for (xi, (bi, di)) in x.iter_mut().zip(b.iter().zip(&self.coarse_dinv)) {
            *xi = bi * di;
        }
        if self.coarse_keep.is_empty() {
            return;
        }
        let bv = nalgebra::DVector::from_iterator(self.coarse_keep.len(), self.coarse_keep.iter().map(|&i| b[i]));
        let sol = match &self.coarse {
            Coarse::Lu(lu) => lu.solve(&bv).unwrap_or_else(|| nalgebra::DVector::zeros(bv.len())),
            Coarse::Pinv(m) => m * bv,
        };
        for (&i, &v) in self.coarse_keep.iter().zip(sol.iter()) {
            x[i] = v;
        }
    }

    fn chebyshev(&self, lvl: &Level, b: &[f64], x: &mut [f64]) {
        let n = b.len();
        let (lo, hi) = (self.settings.cheb_window.0 * lvl.rho, self.settings.cheb_window.1 * lvl.rho);
        let theta = 0.5 * (hi + lo);
        let delta = 0.5 * (hi - lo);
        let sigma = theta / delta;
        let mut rho = 1.0 / sigma;
        let mut r = vec![0.0; n];
        lvl.a.spmv(x, &mut r);
        for i in 0..n {
            r[i] = (b[i] - r[i]) * lvl.dinv[i];
        }
        let mut d: Vec<f64> = r.iter().map(|v| v / theta).collect();
        let mut ad = vec![0.0; n];
        for k in 0..self.settings.cheb_degree {
            x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
            if k + 1 == self.settings.cheb_degree {
                break;
            }
            lvl.a.spmv(&d, &mut ad);
            for i in 0..n {
                r[i] -= lvl.dinv[i] * ad[i];
            }
            let rho_new = 1.0 / (2.0 * sigma - rho);
            for i in 0..n {
                d[i] = rho_new * rho * d[i] + 2.0 * rho_new / delta * r[i];
            }
            rho = rho_new;
        }
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        if l == self.levels.len() {
            self.coarse_solve(b, x);
            return;
        }
        let lvl = &self.levels[l];
        self.chebyshev(lvl, b, x);
        let mut r = vec![0.0; b.len()];
        lvl.a.spmv(x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let rc = lvl.r.mul_vec(&r);
        let mut xc = vec![0.0; rc.len()];
        self.cycle(l + 1, &rc, &mut xc);
        lvl.p.spmv_add(1.0, &xc, x);
        self.chebyshev(lvl, b, x);
        for &i in &lvl.decoupled {
            x[i] = b[i] * lvl.dinv[i];
        }
    }

    /// One V(1,1) cycle for `A x = b` starting from the given `x`.
    pub fn vcycle(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    /// One V-cycle from a zero initial guess.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.vcycle(b, &mut x);
        x
    }
}

impl Preconditioner for AmgHierarchy {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(x, y);
        Ok(())
    }
}

impl Preconditioner for &AmgHierarchy {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.vcycle(x, y);
        Ok(())
    }
}

/// Q1 stiffness matrix of `-Laplace` on an `n x n` cell grid
/// of the unit square with homogeneous Dirichlet rows kept as identity rows.
pub fn q1_laplacian(n: usize) -> CsrMatrix {
    let nv = n + 1;
    let k = [[4.0, -1.0, -2.0, -1.0], [-1.0, 4.0, -1.0, -2.0], [-2.0, -1.0, 4.0, -1.0], [-1.0, -2.0, -1.0, 4.0]];
    let boundary = |v: usize| {
        let (i, j) = (v % nv, v / nv);
        i == 0 || j == 0 || i == n || j == n
    };
    let mut t = Vec::with_capacity(16 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v = [j * nv + i, j * nv + i + 1, (j + 1) * nv + i + 1, (j + 1) * nv + i];
            for a in 0..4 {
                for b in 0..4 {
                    if !boundary(v[a]) && !boundary(v[b]) {
                        t.push((v[a], v[b], k[a][b] / 6.0));
                    }
                }
            }
        }
    }
    for v in 0..nv * nv {
        if boundary(v) {
            t.push((v, v, 1.0));
        }
    }
    CsrMatrix::from_triplets(nv * nv, nv * nv, &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_is_single_level_exact() {
        let a = CsrMatrix::identity(10);
        let h = AmgHierarchy::new(&a, &NearNullspace::scalar(10), &AmgSettings::default()).unwrap();
        assert_eq!(h.n_levels(), 1);
        let b: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(h.apply(&b), b);
    }

    #[test]
    fn path_graph_aggregates() {
        let a = laplace_1d(9);
        let ns = NearNullspace::scalar(9);
        let dec = vec![false; 9];
        let (strong, active) = strength_graph(&a, &ns, &dec, 0.02);
        let (agg, count) = aggregate(&strong, &active);
        assert_eq!(count, 3);
        assert_eq!(agg, vec![0, 0, 1, 1, 1, 2, 2, 2, 2]);
        let s = AmgSettings { coarse_size: 3, ..AmgSettings::default() };
        let h = AmgHierarchy::new(&a, &ns, &s).unwrap();
        assert_eq!(h.level_sizes(), vec![9, 3]);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = q1_laplacian(16);
        let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings { coarse_size: 10, ..Default::default() })
            .unwrap();
        assert!(h.apply(&vec![0.0; a.nrows()]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complexity_on_64_grid() {
        let a = q1_laplacian(64);
        let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings::default()).unwrap();
        assert!(h.n_levels() >= 3, "levels {:?}", h.level_sizes());
        assert!(h.operator_complexity() < 2.0, "complexity {}", h.operator_complexity());
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)]);
        assert!(matches!(
            AmgHierarchy::new(&a, &NearNullspace::scalar(2), &AmgSettings::default()),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn elasticity_nullspace_rotation_is_centered() {
        let ns = NearNullspace::elasticity(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        assert_eq!(ns.vectors.len(), 3);
        assert_eq!(&ns.vectors[2][..2], &[1.0, -1.0]);
    }
}
