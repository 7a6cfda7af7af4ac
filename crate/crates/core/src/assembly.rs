//! Residual and Jacobian of the coupled displacement, pressure and phase-field
//! system.
//!
//! Unknowns are stored in one flat vector ordered `(u, p, phi)`. Constraints
//! (hanging nodes and Dirichlet data) are eliminated during assembly: each
//! local contribution is distributed to the masters of its dof, constrained
//! rows and columns stay empty and get a unit diagonal, and the corresponding
//! residual entries are zero.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::constraints::Expansion;
use crate::fem::shape;
use crate::fem::{ConstraintSet, DofHandler, QuadRule};
use crate::mesh::{Mesh, Point};
use crate::model::{self, Material, ModelParams, Tensor2};
use crate::sparse::{CsrMatrix, SparsityPattern};

pub const U: usize = 0;
pub const P: usize = 1;
pub const PHI: usize = 2;

const NU: usize = 18;
const NS: usize = 4;

/// Block sizes of the flat `(u, p, phi)` vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: [usize; 3],
}

impl Layout {
    pub fn offset(&self, b: usize) -> usize {
        self.n[..b].iter().sum()
    }

    pub fn range(&self, b: usize) -> std::ops::Range<usize> {
        let o = self.offset(b);
        o..o + self.n[b]
    }

    pub fn total(&self) -> usize {
        self.n.iter().sum()
    }
}

/// 3x3 block sparse matrix over a [`Layout`].
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    pub layout: Layout,
    pub blocks: [[CsrMatrix; 3]; 3],
}

impl BlockMatrix {
    pub fn block(&self, i: usize, j: usize) -> &CsrMatrix {
        &self.blocks[i][j]
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut CsrMatrix {
        &mut self.blocks[i][j]
    }

    /// `y = A x` on flat vectors.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let l = self.layout;
        for i in 0..3 {
            let yi = &mut y[l.range(i)];
            yi.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..3 {
                if self.blocks[i][j].nnz() > 0 {
                    self.blocks[i][j].spmv_add(1.0, &x[l.range(j)], yi);
                }
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let l = self.layout;
        let mut m = nalgebra::DMatrix::zeros(l.total(), l.total());
        for i in 0..3 {
            for j in 0..3 {
                let b = &self.blocks[i][j];
                let (ro, co) = (l.offset(i), l.offset(j));
                for r in 0..b.nrows() {
                    let (cols, vals) = b.row(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        m[(ro + r, co + c)] += v;
                    }
                }
            }
        }
        m
    }

    /// Removes the rows and columns of active phase-field dofs from the
    /// system `J dx = rhs`, prescribing `dx[phi_a] = d[a]`. Inactive rows
    /// receive `-J_IA d`; active rows become identity rows with `rhs = d`.
    pub fn eliminate_active(&mut self, rhs: &mut [f64], active: &[bool], d: &[f64]) {
        let l = self.layout;
        let off = l.offset(PHI);
        let lphi = &mut self.blocks[PHI][PHI];
        for r in 0..lphi.nrows() {
            let (cols, vals) = lphi.row_mut(r);
            if active[r] {
                for (c, v) in cols.iter().zip(vals.iter_mut()) {
                    *v = if *c == r { 1.0 } else { 0.0 };
                }
                rhs[off + r] = d[r];
            } else {
                for (c, v) in cols.iter().zip(vals.iter_mut()) {
                    if active[*c] {
                        rhs[off + r] -= *v * d[*c];
                        *v = 0.0;
                    }
                }
            }
        }
        for b in [U, P] {
            let m = &mut self.blocks[PHI][b];
            for r in 0..m.nrows() {
                if active[r] {
                    m.row_mut(r).1.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }
}

/// Body force `f` in the displacement equation.
#[derive(Clone)]
pub enum BodyForce {
    Constant([f64; 2]),
    Field(Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>),
}

impl BodyForce {
    fn at(&self, p: Point) -> [f64; 2] {
        match self {
            BodyForce::Constant(f) => *f,
            BodyForce::Field(f) => f(p),
        }
    }
}

impl std::fmt::Debug for BodyForce {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BodyForce::Constant(v) => write!(f, "Constant({v:?})"),
            BodyForce::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Precomputed reference values at the quadrature points.
#[derive(Clone, Debug)]
struct Tables {
    weights: Vec<f64>,
    points: Vec<[f64; 2]>,
    v2: Vec<[f64; 9]>,
    g2: Vec<[[f64; 2]; 9]>,
    v1: Vec<[f64; 4]>,
    g1: Vec<[[f64; 2]; 4]>,
}

impl Tables {
    fn new(q: &QuadRule) -> Self {
        Self {
            weights: q.weights.clone(),
            points: q.points.clone(),
            v2: q.points.iter().map(|&p| shape::q2_values(p)).collect(),
            g2: q.points.iter().map(|&p| shape::q2_grads(p)).collect(),
            v1: q.points.iter().map(|&p| shape::q1_values(p)).collect(),
            g1: q.points.iter().map(|&p| shape::q1_grads(p)).collect(),
        }
    }
}

/// Element contributions of one cell.
struct Local {
    ru: [f64; NU],
    rp: [f64; NS],
    rphi: [f64; NS],
    kuu: [[f64; NU]; NU],
    kup: [[f64; NS]; NU],
    kpp: [[f64; NS]; NS],
    kphiu: [[f64; NU]; NS],
    kphip: [[f64; NS]; NS],
    kphiphi: [[f64; NS]; NS],
}

impl Local {
    fn zero() -> Self {
        Self {
            ru: [0.0; NU],
            rp: [0.0; NS],
            rphi: [0.0; NS],
            kuu: [[0.0; NU]; NU],
            kup: [[0.0; NS]; NU],
            kpp: [[0.0; NS]; NS],
            kphiu: [[0.0; NU]; NS],
            kphip: [[0.0; NS]; NS],
            kphiphi: [[0.0; NS]; NS],
        }
    }
}

/// Field values at a quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct PointValues {
    pub x: Point,
    pub u: [f64; 2],
    pub grad_u: Tensor2,
    pub p: f64,
    pub phi: f64,
    pub grad_phi: [f64; 2],
    pub phi_tilde: f64,
}

/// Mesh, spaces, constraints and coefficients of one problem.
#[derive(Clone, Debug)]
pub struct Discretization {
    mesh: Mesh,
    u_dofs: DofHandler,
    s_dofs: DofHandler,
    constraints: [ConstraintSet; 3],
    user_constraints: [ConstraintSet; 3],
    expansions: [Expansion; 3],
    materials: Vec<Material>,
    params: ModelParams,
    body_force: BodyForce,
    tables: Tables,
    layout: Layout,
    patterns: [[Option<SparsityPattern>; 3]; 3],
}

/// User-supplied constraints per field, on top of the hanging-node ones.
#[derive(Clone, Debug)]
pub struct FieldConstraints {
    pub u: ConstraintSet,
    pub p: ConstraintSet,
    pub phi: ConstraintSet,
}

impl Discretization {
    pub fn new(
        mesh: Mesh,
        materials: Vec<Material>,
        params: ModelParams,
        body_force: BodyForce,
        user: impl FnOnce(&DofHandler, &DofHandler) -> FieldConstraints,
        quad_order: usize,
    ) -> Result<Self> {
        params.validate()?;
        if materials.len() != mesh.n_cells() {
            return Err(Error::Parameter(format!(
                "{} materials for {} cells",
                materials.len(),
                mesh.n_cells()
            )));
        }
        let u_dofs = DofHandler::new(&mesh, 2, 2);
        let s_dofs = DofHandler::new(&mesh, 1, 1);
        let FieldConstraints { mut u, mut p, mut phi } = user(&u_dofs, &s_dofs);
        let user_constraints = [u.clone(), p.clone(), phi.clone()];
        if u.len() != u_dofs.n_dofs() || p.len() != s_dofs.n_dofs() || phi.len() != s_dofs.n_dofs() {
            return Err(Error::Parameter("constraint set sizes do not match the dof counts".into()));
        }
        u.merge(&u_dofs.hanging_constraints());
        let hs = s_dofs.hanging_constraints();
        p.merge(&hs);
        phi.merge(&hs);
        for c in [&mut u, &mut p, &mut phi] {
            c.close()?;
        }
        let expansions = [u.expansion(), p.expansion(), phi.expansion()];
        let layout = Layout { n: [u_dofs.n_dofs(), s_dofs.n_dofs(), s_dofs.n_dofs()] };
        let tables = Tables::new(&QuadRule::gauss(quad_order)?);
        let mut d = Self {
            mesh,
            u_dofs,
            s_dofs,
            constraints: [u, p, phi],
            user_constraints,
            expansions,
            materials,
            params,
            body_force,
            tables,
            layout,
            patterns: Default::default(),
        };
        for (i, j) in [(U, U), (U, P), (P, U), (P, P), (PHI, U), (PHI, P), (PHI, PHI)] {
            d.patterns[i][j] = Some(d.build_pattern(i, j));
        }
        Ok(d)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn u_dofs(&self) -> &DofHandler {
        &self.u_dofs
    }

    /// Q1 space shared by pressure and phase field.
    pub fn scalar_dofs(&self) -> &DofHandler {
        &self.s_dofs
    }

    pub fn constraints(&self, field: usize) -> &ConstraintSet {
        &self.constraints[field]
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn set_params(&mut self, params: ModelParams) -> Result<()> {
        params.validate()?;
        self.params = params;
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.total()
    }

    /// Changes the values of existing Dirichlet constraints of `field`.
    pub fn set_dirichlet_values(&mut self, field: usize, values: &[(usize, f64)]) -> Result<()> {
        let raw = &mut self.user_constraints[field];
        for &(d, v) in values {
            match raw.line(d) {
                Some(l) if l.entries.is_empty() => raw.set_dirichlet(d, v),
                _ => return Err(Error::Parameter(format!("dof {d} of field {field} has no Dirichlet constraint"))),
            }
        }
        let mut c = raw.clone();
        c.merge(&if field == U { self.u_dofs.hanging_constraints() } else { self.s_dofs.hanging_constraints() });
        c.close()?;
        self.constraints[field] = c;
        Ok(())
    }

    /// Overwrites constrained entries of the flat vector `x` from their masters.
    pub fn distribute(&self, x: &mut [f64]) {
        for b in 0..3 {
            self.constraints[b].distribute(&mut x[self.layout.range(b)]);
        }
    }

    pub fn distribute_homogeneous(&self, x: &mut [f64]) {
        for b in 0..3 {
            self.constraints[b].distribute_homogeneous(&mut x[self.layout.range(b)]);
        }
    }

    /// Whether flat dof `i` is constrained.
    pub fn is_constrained(&self, i: usize) -> bool {
        let (b, k) = self.split_index(i);
        self.constraints[b].is_constrained(k)
    }

    fn split_index(&self, i: usize) -> (usize, usize) {
        let mut k = i;
        for b in 0..3 {
            if k < self.layout.n[b] {
                return (b, k);
            }
            k -= self.layout.n[b];
        }
        panic!("dof {i} out of range");
    }

    fn cell_globals(&self, field: usize, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if field == U {
            self.u_dofs.cell_dofs(c, &mut out);
        } else {
            self.s_dofs.cell_dofs(c, &mut out);
        }
        out
    }

    fn cell_expanded(&self, field: usize, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for g in self.cell_globals(field, c) {
            out.extend(self.expansions[field].masters(g).iter().map(|&(m, _)| m));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn build_pattern(&self, rb: usize, cb: usize) -> SparsityPattern {
        let nrows = self.layout.n[rb];
        let ncols = self.layout.n[cb];
        let nc = self.mesh.n_cells();
        let rows_of: Vec<Vec<usize>> = (0..nc).map(|c| self.cell_expanded(rb, c)).collect();
        let cols_of: Vec<Vec<usize>> =
            if rb == cb { rows_of.clone() } else { (0..nc).map(|c| self.cell_expanded(cb, c)).collect() };
        let mut ptr = vec![0usize; nrows + 1];
        for rows in &rows_of {
            for &r in rows {
                ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            ptr[r + 1] += ptr[r];
        }
        let mut cells = vec![0usize; ptr[nrows]];
        let mut fill = ptr.clone();
        for (c, rows) in rows_of.iter().enumerate() {
            for &r in rows {
                cells[fill[r]] = c;
                fill[r] += 1;
            }
        }
        let mut marker = vec![usize::MAX; ncols];
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for r in 0..nrows {
            let start = indices.len();
            if rb == cb {
                marker[r] = r;
                indices.push(r);
            }
            for &c in &cells[ptr[r]..ptr[r + 1]] {
                for &col in &cols_of[c] {
                    if marker[col] != r {
                        marker[col] = r;
                        indices.push(col);
                    }
                }
            }
            indices[start..].sort_unstable();
            indptr.push(indices.len());
        }
        SparsityPattern::from_raw(ncols, indptr, indices)
    }

    fn empty_block(&self, i: usize, j: usize) -> CsrMatrix {
        match &self.patterns[i][j] {
            Some(p) => CsrMatrix::from_pattern(p),
            None => CsrMatrix::zeros(self.layout.n[i], self.layout.n[j]),
        }
    }

    fn empty_matrix(&self) -> BlockMatrix {
        let blocks = std::array::from_fn(|i| std::array::from_fn(|j| self.empty_block(i, j)));
        BlockMatrix { layout: self.layout, blocks }
    }

    /// Values at reference point `xi` of cell `c`.
    pub fn point_values(&self, c: usize, xi: Point, x: &[f64], phi_tilde: &[f64]) -> PointValues {
        let h = self.mesh.cell_size(c);
        let (lo, _) = self.mesh.cell_bounds(c);
        let v2 = shape::q2_values(xi);
        let g2 = shape::q2_grads(xi);
        let v1 = shape::q1_values(xi);
        let g1 = shape::q1_grads(xi);
        self.values_from(c, h, [lo[0] + xi[0] * h[0], lo[1] + xi[1] * h[1]], &v2, &g2, &v1, &g1, x, phi_tilde)
    }

    #[allow(clippy::too_many_arguments)]
    fn values_from(
        &self,
        c: usize,
        h: [f64; 2],
        xp: Point,
        v2: &[f64; 9],
        g2: &[[f64; 2]; 9],
        v1: &[f64; 4],
        g1: &[[f64; 2]; 4],
        x: &[f64],
        phi_tilde: &[f64],
    ) -> PointValues {
        let po = self.layout.offset(P);
        let fo = self.layout.offset(PHI);
        let mut u = [0.0; 2];
        let mut gu = [[0.0; 2]; 2];
        for (a, &n) in self.u_dofs.cell_nodes(c).iter().enumerate() {
            let d = [g2[a][0] / h[0], g2[a][1] / h[1]];
            for comp in 0..2 {
                let val = x[2 * n + comp];
                u[comp] += v2[a] * val;
                gu[comp][0] += d[0] * val;
                gu[comp][1] += d[1] * val;
            }
        }
        let (mut p, mut phi, mut pt) = (0.0, 0.0, 0.0);
        let mut gphi = [0.0; 2];
        for (a, &n) in self.s_dofs.cell_nodes(c).iter().enumerate() {
            p += v1[a] * x[po + n];
            phi += v1[a] * x[fo + n];
            pt += v1[a] * phi_tilde[n];
            gphi[0] += g1[a][0] / h[0] * x[fo + n];
            gphi[1] += g1[a][1] / h[1] * x[fo + n];
        }
        PointValues { x: xp, u, grad_u: gu, p, phi, grad_phi: gphi, phi_tilde: pt }
    }

    fn local(&self, c: usize, x: &[f64], phi_tilde: &[f64], jac: bool) -> Local {
        let mut l = Local::zero();
        let t = &self.tables;
        let h = self.mesh.cell_size(c);
        let (lo, _) = self.mesh.cell_bounds(c);
        let det = h[0] * h[1];
        let mat = self.materials[c];
        let (mu, il) = (mat.mu, mat.inv_lambda);
        let ModelParams { kappa, gc, eps, rho } = self.params;
        for q in 0..t.weights.len() {
            let w = t.weights[q] * det;
            let xp = [lo[0] + t.points[q][0] * h[0], lo[1] + t.points[q][1] * h[1]];
            let pv = self.values_from(c, h, xp, &t.v2[q], &t.g2[q], &t.v1[q], &t.g1[q], x, phi_tilde);
            let dn: [[f64; 2]; 9] = t.g2[q].map(|g| [g[0] / h[0], g[1] / h[1]]);
            let nv = &t.v2[q];
            let m = &t.v1[q];
            let dm: [[f64; 2]; 4] = t.g1[q].map(|g| [g[0] / h[0], g[1] / h[1]]);
            let e = model::strain(&pv.grad_u);
            let div = model::trace(&e);
            let sig = model::mixed_stress(mu, &e, pv.p);
            let g = model::degradation(kappa, pv.phi_tilde);
            let f = self.body_force.at(xp);
            let se = model::contract(&sig, &e);
            let phi = pv.phi;

            for a in 0..9 {
                for comp in 0..2 {
                    let r = g * (sig[comp][0] * dn[a][0] + sig[comp][1] * dn[a][1])
                        + pv.phi_tilde * pv.phi_tilde * rho * dn[a][comp]
                        - f[comp] * nv[a];
                    l.ru[2 * a + comp] += w * r;
                }
            }
            let drive = (1.0 - kappa) * phi * se + 2.0 * phi * rho * div - gc / eps * (1.0 - phi);
            for b in 0..4 {
                l.rp[b] += w * (g * div - il * pv.p) * m[b];
                l.rphi[b] += w
                    * (drive * m[b] + gc * eps * (pv.grad_phi[0] * dm[b][0] + pv.grad_phi[1] * dm[b][1]));
            }
            if !jac {
                continue;
            }
            for a in 0..9 {
                for b in 0..9 {
                    let gg = dn[a][0] * dn[b][0] + dn[a][1] * dn[b][1];
                    for ci in 0..2 {
                        for di in 0..2 {
                            let mut v = dn[a][di] * dn[b][ci];
                            if ci == di {
                                v += gg;
                            }
                            l.kuu[2 * a + ci][2 * b + di] += w * g * mu * v;
                        }
                    }
                }
                for b in 0..4 {
                    for ci in 0..2 {
                        l.kup[2 * a + ci][b] += w * g * dn[a][ci] * m[b];
                    }
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    l.kpp[a][b] -= w * il * m[a] * m[b];
                    l.kphip[a][b] += w * (1.0 - kappa) * phi * div * m[b] * m[a];
                    l.kphiphi[a][b] += w
                        * ((((1.0 - kappa) * se + 2.0 * rho * div + gc / eps) * m[a] * m[b])
                            + gc * eps * (dm[a][0] * dm[b][0] + dm[a][1] * dm[b][1]));
                }
                for b in 0..9 {
                    for d in 0..2 {
                        let ed = e[d][0] * dn[b][0] + e[d][1] * dn[b][1];
                        let v = (1.0 - kappa) * phi * (4.0 * mu * ed + pv.p * dn[b][d]) + 2.0 * phi * rho * dn[b][d];
                        l.kphiu[a][2 * b + d] += w * v * m[a];
                    }
                }
            }
        }
        l
    }

    fn scatter_vec(&self, field: usize, globals: &[usize], local: &[f64], out: &mut [f64]) {
        let off = self.layout.offset(field);
        for (&g, &v) in globals.iter().zip(local) {
            for &(m, w) in self.expansions[field].masters(g) {
                out[off + m] += w * v;
            }
        }
    }

    fn scatter_mat<const R: usize, const C: usize>(
        &self,
        rb: usize,
        cb: usize,
        rg: &[usize],
        cg: &[usize],
        k: &[[f64; C]; R],
        m: &mut CsrMatrix,
    ) {
        for (i, &gi) in rg.iter().enumerate() {
            for &(mi, wi) in self.expansions[rb].masters(gi) {
                for (j, &gj) in cg.iter().enumerate() {
                    let v = k[i][j];
                    if v == 0.0 {
                        continue;
                    }
                    for &(mj, wj) in self.expansions[cb].masters(gj) {
                        m.add_to(mi, mj, wi * wj * v);
                    }
                }
            }
        }
    }

    /// Reduced residual at state `x` (constraints already distributed).
    pub fn residual(&self, x: &[f64], phi_tilde: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n_dofs()];
        for c in 0..self.mesh.n_cells() {
            let l = self.local(c, x, phi_tilde, false);
            self.scatter_local_residual(c, &l, &mut r);
        }
        r
    }

    fn scatter_local_residual(&self, c: usize, l: &Local, r: &mut [f64]) {
        let gu = self.cell_globals(U, c);
        let gs = self.cell_globals(P, c);
        self.scatter_vec(U, &gu, &l.ru, r);
        self.scatter_vec(P, &gs, &l.rp, r);
        self.scatter_vec(PHI, &gs, &l.rphi, r);
    }

    /// Reduced Jacobian and residual at state `x`.
    pub fn jacobian(&self, x: &[f64], phi_tilde: &[f64]) -> (BlockMatrix, Vec<f64>) {
        let mut j = self.empty_matrix();
        let mut r = vec![0.0; self.n_dofs()];
        for c in 0..self.mesh.n_cells() {
            let l = self.local(c, x, phi_tilde, true);
            self.scatter_local_residual(c, &l, &mut r);
            let gu = self.cell_globals(U, c);
            let gs = self.cell_globals(P, c);
            let [ju, jp, jf] = &mut j.blocks;
            self.scatter_mat(U, U, &gu, &gu, &l.kuu, &mut ju[U]);
            self.scatter_mat(U, P, &gu, &gs, &l.kup, &mut ju[P]);
            let kpu = transpose(&l.kup);
            self.scatter_mat(P, U, &gs, &gu, &kpu, &mut jp[U]);
            self.scatter_mat(P, P, &gs, &gs, &l.kpp, &mut jp[P]);
            self.scatter_mat(PHI, U, &gs, &gu, &l.kphiu, &mut jf[U]);
            self.scatter_mat(PHI, P, &gs, &gs, &l.kphip, &mut jf[P]);
            self.scatter_mat(PHI, PHI, &gs, &gs, &l.kphiphi, &mut jf[PHI]);
        }
        for b in 0..3 {
            for d in self.constraints[b].constrained_dofs() {
                j.blocks[b][b].set(d, d, 1.0);
            }
        }
        (j, r)
    }

    /// Pressure mass matrix weighted by `1/lambda + g(phi_tilde) / (2 mu)`.
    pub fn schur_mass(&self, phi_tilde: &[f64]) -> CsrMatrix {
        let mut m = self.empty_block(P, P);
        let t = &self.tables;
        let kappa = self.params.kappa;
        for c in 0..self.mesh.n_cells() {
            let h = self.mesh.cell_size(c);
            let det = h[0] * h[1];
            let mat = self.materials[c];
            let nodes = self.s_dofs.cell_nodes(c);
            let mut k = [[0.0; NS]; NS];
            for q in 0..t.weights.len() {
                let v = &t.v1[q];
                let pt: f64 = nodes.iter().enumerate().map(|(a, &n)| v[a] * phi_tilde[n]).sum();
                let coef = mat.inv_lambda + model::degradation(kappa, pt) / (2.0 * mat.mu);
                for a in 0..4 {
                    for b in 0..4 {
                        k[a][b] += t.weights[q] * det * coef * v[a] * v[b];
                    }
                }
            }
            let gs = self.cell_globals(P, c);
            self.scatter_mat(P, P, &gs, &gs, &k, &mut m);
        }
        for d in self.constraints[P].constrained_dofs() {
            m.set(d, d, 1.0);
        }
        m
    }

    /// Row sums of the reduced Q1 mass matrix on the phase-field space.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.n[PHI]];
        let t = &self.tables;
        for c in 0..self.mesh.n_cells() {
            let det = self.mesh.cell_area(c);
            let mut loc = [0.0; NS];
            for q in 0..t.weights.len() {
                for a in 0..4 {
                    loc[a] += t.weights[q] * det * t.v1[q][a];
                }
            }
            for (&g, &v) in self.cell_globals(PHI, c).iter().zip(&loc) {
                for &(m, w) in self.expansions[PHI].masters(g) {
                    out[m] += w * v;
                }
            }
        }
        out
    }

    /// Quadrature points of cell `c` as `(reference point, weight * |cell|)`.
    pub fn quadrature(&self, c: usize) -> impl Iterator<Item = (Point, f64)> + '_ {
        let det = self.mesh.cell_area(c);
        self.tables.points.iter().zip(&self.tables.weights).map(move |(&p, &w)| (p, w * det))
    }
}

fn transpose<const R: usize, const C: usize>(k: &[[f64; C]; R]) -> [[f64; R]; C] {
    std::array::from_fn(|j| std::array::from_fn(|i| k[i][j]))
}
