//! Flexible GMRES and preconditioned conjugate gradients.

use crate::assembly::BlockMatrix;
use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

/// `y = A x` for a square operator.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv(x, y);
    }
}

impl LinearOperator for BlockMatrix {
    fn dim(&self) -> usize {
        self.layout.total()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        BlockMatrix::apply(self, x, y);
    }
}

impl LinearOperator for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// `y ~= A^{-1} x`. May be nonlinear or vary between calls.
pub trait Preconditioner {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y.copy_from_slice(x);
        Ok(())
    }
}

/// Wraps a closure as a preconditioner.
pub struct FnPreconditioner<F: FnMut(&[f64], &mut [f64]) -> Result<()>>(pub F);

impl<F: FnMut(&[f64], &mut [f64]) -> Result<()>> Preconditioner for FnPreconditioner<F> {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        (self.0)(x, y)
    }
}

/// Stopping rule shared by the Krylov solvers.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KrylovSettings {
    /// Relative residual tolerance `|b - Ax| <= tol |b|`.
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length; `None` keeps the full basis.
    pub restart: Option<usize>,
}

impl KrylovSettings {
    pub fn gmres() -> Self {
        Self { tol: 1e-5, max_iter: 300, restart: None }
    }

    pub fn cg() -> Self {
        Self { tol: 1e-6, max_iter: 200, restart: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || self.restart == Some(0) {
            return Err(Error::Parameter(format!("invalid Krylov settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveInfo {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with 1 for `x = 0`.
    pub history: Vec<f64>,
}

/// Right-preconditioned flexible GMRES from `x = 0`, modified Gram-Schmidt
/// Arnoldi with Givens rotations.
pub fn fgmres(
    op: &dyn LinearOperator,
    prec: &mut dyn Preconditioner,
    b: &[f64],
    settings: &KrylovSettings,
) -> Result<SolveInfo> {
    settings.validate()?;
    let n = op.dim();
    assert_eq!(b.len(), n);
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite right-hand side".into()));
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = vec![1.0];
    if bnorm == 0.0 {
        return Ok(SolveInfo { x, iterations: 0, history });
    }
    let m = settings.restart.unwrap_or(settings.max_iter).min(settings.max_iter);
    let mut r = b.to_vec();
    let mut total = 0;
    let mut w = vec![0.0; n];
    loop {
        let beta = norm2(&r);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::new();
        let mut h: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<(f64, f64)> = Vec::new();
        let mut g = vec![beta];
        let mut k = 0;
        let mut done = false;
        while k < m && total < settings.max_iter {
            let mut zk = vec![0.0; n];
            prec.apply(&v[k], &mut zk)?;
            op.apply(&zk, &mut w);
            z.push(zk);
            let mut col = vec![0.0; k + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= hij * vj);
            }
            let hn = norm2(&w);
            col[k + 1] = hn;
            for (i, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (a, bb) = (col[k], col[k + 1]);
            let rho = a.hypot(bb);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (a / rho, bb / rho) };
            col[k] = rho;
            col[k + 1] = 0.0;
            cs.push((c, s));
            g.push(-s * g[k]);
            g[k] *= c;
            h.push(col);
            k += 1;
            total += 1;
            let rel = g[k].abs() / bnorm;
            history.push(rel);
            if rel <= settings.tol || hn == 0.0 {
                done = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // back substitution on the k x k triangular system
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(xj, zj)| *xj += yi * zj);
        }
        op.apply(&x, &mut w);
        r.iter_mut().zip(b.iter().zip(&w)).for_each(|(ri, (bi, wi))| *ri = bi - wi);
        let true_rel = norm2(&r) / bnorm;
        if done || true_rel <= settings.tol {
            return Ok(SolveInfo { x, iterations: total, history });
        }
        if total >= settings.max_iter {
            return Err(Error::NotConverged {
                solver: "fgmres",
                iterations: total,
                residual: true_rel,
                history,
            });
        }
    }
}

/// Preconditioned conjugate gradients from `x = 0`.
pub fn cg(
    op: &dyn LinearOperator,
    prec: &mut dyn Preconditioner,
    b: &[f64],
    settings: &KrylovSettings,
) -> Result<SolveInfo> {
    settings.validate()?;
    let n = op.dim();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    let mut history = vec![1.0];
    if bnorm == 0.0 {
        return Ok(SolveInfo { x, iterations: 0, history });
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    prec.apply(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=settings.max_iter {
        op.apply(&p, &mut ap);
        let curv = dot(&p, &ap);
        if !(curv > 0.0) {
            return Err(Error::Indefinite { iteration: it, curvature: curv });
        }
        let alpha = rz / curv;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        let rel = norm2(&r) / bnorm;
        history.push(rel);
        if rel <= settings.tol {
            return Ok(SolveInfo { x, iterations: it, history });
        }
        prec.apply(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    let residual = *history.last().unwrap();
    Err(Error::NotConverged { solver: "cg", iterations: settings.max_iter, residual, history })
}

/// Relative residuals `min |b - A M V_k y| / |b|` of right-preconditioned
/// GMRES, `V_k` spanning `{b, (A M) b, ..., (A M)^{k-1} b}`, for
/// `k = 1..=steps`; entry `k - 1` belongs to step `k`. Computed by dense
/// least squares on an explicitly orthonormalized basis.
pub fn dense_gmres_residuals(
    a: &nalgebra::DMatrix<f64>,
    m: &nalgebra::DMatrix<f64>,
    b: &[f64],
    steps: usize,
) -> Vec<f64> {
    use nalgebra::{DMatrix, DVector};
    let n = b.len();
    let bv = DVector::from_column_slice(b);
    let am = a * m;
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut out = Vec::new();
    let mut k = bv.clone();
    for _ in 0..steps {
        let mut q = k.clone();
        for _ in 0..2 {
            for bq in &basis {
                let c = bq.dot(&q);
                q -= bq * c;
            }
        }
        let nq = q.norm();
        if nq > 1e-14 * k.norm().max(1e-300) {
            basis.push(q / nq);
        }
        let v = DMatrix::from_columns(&basis);
        let amv = &am * &v;
        let svd = amv.clone().svd(true, true);
        let y = svd.solve(&bv, 1e-14).expect("svd solve");
        out.push((&bv - amv * y).norm() / bv.norm());
        k = &am * basis.last().unwrap();
        if basis.len() == n {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let s = fgmres(&a, &mut Identity, &b, &KrylovSettings::gmres()).unwrap();
        assert_eq!(s.iterations, 1);
        for (x, y) in s.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_system() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 4.0]);
        let s = fgmres(&a, &mut Identity, &[1.0, 2.0, 4.0], &KrylovSettings { tol: 1e-12, ..KrylovSettings::gmres() })
            .unwrap();
        for x in s.x {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_two_by_two() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]));
        let s = cg(&a, &mut Identity, &[1.0, 2.0], &KrylovSettings { tol: 1e-14, ..KrylovSettings::cg() }).unwrap();
        assert!((s.x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((s.x[1] - 7.0 / 11.0).abs() < 1e-14);
        assert!(s.iterations <= 2);
    }

    #[test]
    fn cg_reports_indefiniteness() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let e = cg(&a, &mut Identity, &[1.0, 1.0], &KrylovSettings::cg()).unwrap_err();
        assert!(matches!(e, Error::Indefinite { .. }));
    }

    #[test]
    fn nonconvergence_carries_history() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let e = fgmres(&a, &mut Identity, &[1.0; 4], &KrylovSettings { tol: 1e-12, max_iter: 2, restart: None })
            .unwrap_err();
        match e {
            Error::NotConverged { iterations, history, .. } => {
                assert_eq!(iterations, 2);
                assert_eq!(history.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn restarted_gmres_converges() {
        let n = 30;
        let a = CsrMatrix::from_triplets(
            n,
            n,
            &(0..n)
                .flat_map(|i| {
                    let mut t = vec![(i, i, 3.0)];
                    if i > 0 {
                        t.push((i, i - 1, -1.0));
                    }
                    if i + 1 < n {
                        t.push((i, i + 1, -1.2));
                    }
                    t
                })
                .collect::<Vec<_>>(),
        );
        let b = vec![1.0; n];
        let s = fgmres(&a, &mut Identity, &b, &KrylovSettings { tol: 1e-10, max_iter: 300, restart: Some(5) }).unwrap();
        let r: Vec<f64> = a.mul_vec(&s.x).iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(norm2(&r) / norm2(&b) < 1e-9);
    }

    #[test]
    fn invalid_settings_rejected() {
        let a = CsrMatrix::identity(2);
        assert!(fgmres(&a, &mut Identity, &[1.0, 1.0], &KrylovSettings { tol: 0.0, ..KrylovSettings::gmres() }).is_err());
    }
}
