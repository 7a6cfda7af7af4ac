//! Affine constraints `x_i = sum_j w_ij x_j + b_i` on a single field.
//!
//! Dirichlet values are lines without masters. After [`ConstraintSet::close`]
//! every master is unconstrained, so a constrained dof expands in one step.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Line {
    pub entries: Vec<(usize, f64)>,
    pub inhomogeneity: f64,
}

#[derive(Clone, Debug)]
pub struct ConstraintSet {
    n: usize,
    lines: BTreeMap<usize, Line>,
    closed: bool,
}

impl ConstraintSet {
    pub fn new(n: usize) -> Self {
        Self { n, lines: BTreeMap::new(), closed: true }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn n_constrained(&self) -> usize {
        self.lines.len()
    }

    pub fn add_line(&mut self, dof: usize, entries: Vec<(usize, f64)>, inhomogeneity: f64) {
        assert!(dof < self.n, "constrained dof {dof} out of range {}", self.n);
        self.lines.insert(dof, Line { entries, inhomogeneity });
        self.closed = false;
    }

    /// Fixes `dof` to `value`, replacing any previous line.
    pub fn set_dirichlet(&mut self, dof: usize, value: f64) {
        self.add_line(dof, Vec::new(), value);
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.lines.contains_key(&dof)
    }

    pub fn line(&self, dof: usize) -> Option<&Line> {
        self.lines.get(&dof)
    }

    pub fn constrained_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.lines.keys().copied()
    }

    /// Lines from `other` are added unless `self` already constrains the dof.
    pub fn merge(&mut self, other: &ConstraintSet) {
        assert_eq!(self.n, other.n);
        for (&d, l) in &other.lines {
            self.lines.entry(d).or_insert_with(|| l.clone());
        }
        self.closed = false;
    }

    /// Substitutes constrained masters until every line refers only to free
    /// dofs. Fails on cyclic constraints.
    pub fn close(&mut self) -> Result<()> {
        let keys: Vec<usize> = self.lines.keys().copied().collect();
        let mut resolved: BTreeMap<usize, Line> = BTreeMap::new();
        for d in keys {
            let mut stack = Vec::new();
            let line = self.resolve(d, &mut resolved, &mut stack)?;
            resolved.insert(d, line);
        }
        self.lines = resolved;
        self.closed = true;
        Ok(())
    }

    fn resolve(&self, d: usize, done: &mut BTreeMap<usize, Line>, stack: &mut Vec<usize>) -> Result<Line> {
        if let Some(l) = done.get(&d) {
            return Ok(l.clone());
        }
        if stack.contains(&d) {
            return Err(Error::Parameter(format!("cyclic constraint through dof {d}")));
        }
        stack.push(d);
        let raw = &self.lines[&d];
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut b = raw.inhomogeneity;
        for &(m, w) in &raw.entries {
            if self.lines.contains_key(&m) {
                let sub = self.resolve(m, done, stack)?;
                done.insert(m, sub.clone());
                b += w * sub.inhomogeneity;
                for (mm, ww) in sub.entries {
                    *acc.entry(mm).or_insert(0.0) += w * ww;
                }
            } else {
                *acc.entry(m).or_insert(0.0) += w;
            }
        }
        stack.pop();
        Ok(Line { entries: acc.into_iter().filter(|&(_, w)| w != 0.0).collect(), inhomogeneity: b })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Calls `f(master, weight)` for each free dof that `dof` depends on.
    pub fn for_each_master(&self, dof: usize, mut f: impl FnMut(usize, f64)) {
        debug_assert!(self.closed, "constraint set must be closed before expansion");
        match self.lines.get(&dof) {
            Some(l) => l.entries.iter().for_each(|&(m, w)| f(m, w)),
            None => f(dof, 1.0),
        }
    }

    /// Flattened master lists for fast lookup during assembly.
    pub fn expansion(&self) -> Expansion {
        debug_assert!(self.closed);
        let mut ptr = Vec::with_capacity(self.n + 1);
        let mut entries = Vec::with_capacity(self.n);
        ptr.push(0);
        for d in 0..self.n {
            self.for_each_master(d, |m, w| entries.push((m, w)));
            ptr.push(entries.len());
        }
        Expansion { ptr, entries }
    }

    /// Overwrites constrained entries of `x` from their masters.
    pub fn distribute(&self, x: &mut [f64]) {
        debug_assert!(self.closed);
        for (&d, l) in &self.lines {
            x[d] = l.inhomogeneity + l.entries.iter().map(|&(m, w)| w * x[m]).sum::<f64>();
        }
    }

    /// Same as [`distribute`](Self::distribute) with zero inhomogeneities.
    pub fn distribute_homogeneous(&self, x: &mut [f64]) {
        debug_assert!(self.closed);
        for (&d, l) in &self.lines {
            x[d] = l.entries.iter().map(|&(m, w)| w * x[m]).sum::<f64>();
        }
    }

    pub fn zero_constrained(&self, x: &mut [f64]) {
        for &d in self.lines.keys() {
            x[d] = 0.0;
        }
    }

    /// Largest violation `|x_i - sum w_ij x_j - b_i|`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.lines
            .iter()
            .map(|(&d, l)| (x[d] - l.inhomogeneity - l.entries.iter().map(|&(m, w)| w * x[m]).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-dof master lists of a closed [`ConstraintSet`]. A free dof maps to
/// itself with weight one, a Dirichlet dof to nothing.
#[derive(Clone, Debug)]
pub struct Expansion {
    ptr: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Expansion {
    pub fn masters(&self, dof: usize) -> &[(usize, f64)] {
        &self.entries[self.ptr[dof]..self.ptr[dof + 1]]
    }

    pub fn len(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
