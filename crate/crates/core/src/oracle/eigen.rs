//! Lowest eigenpair of a real symmetric sparse operator: dense
//! decomposition for small blocks, restarted Lanczos above that.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric operator given by its action on vectors.
pub(crate) trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn to_dense(&self) -> DMatrix<f64>;
    /// Upper bound on the spectral radius (max absolute row sum).
    fn norm_bound(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Largest dimension handled by dense decomposition.
    pub dense_limit: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Residual target relative to the operator norm bound.
    pub rel_residual: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_limit: 4096, krylov_dim: 80, max_restarts: 60, rel_residual: 1e-10 }
    }
}

pub(crate) struct LowestPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Second-lowest eigenvalue (or Ritz value), if the space has one.
    pub next: Option<f64>,
    /// Largest |eigenvalue| seen.
    pub spectral_radius: f64,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn residual<O: SymOp>(op: &O, v: &[f64], e: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply(v, &mut hv);
    libm::sqrt(hv.iter().zip(v).map(|(h, x)| (h - e * x) * (h - e * x)).sum())
}

pub(crate) fn lowest<O: SymOp>(op: &O, opts: &EigenOptions) -> Result<LowestPair> {
    if op.dim() <= opts.dense_limit {
        Ok(dense_lowest(op))
    } else {
        lanczos_lowest(op, opts)
    }
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn dense_lowest<O: SymOp>(op: &O) -> LowestPair {
    let eig = SymmetricEigen::new(op.to_dense());
    let values = eig.eigenvalues.as_slice();
    let order = sorted_order(values);
    let k = order[0];
    let vector: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let value = values[k];
    let spectral_radius = values.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let residual = residual(op, &vector, value);
    LowestPair { value, vector, next: order.get(1).map(|&i| values[i]), spectral_radius, residual }
}

/// Lanczos with full reorthogonalisation, restarted from the current Ritz vector.
fn lanczos_lowest<O: SymOp>(op: &O, opts: &EigenOptions) -> Result<LowestPair> {
    let dim = op.dim();
    let target = opts.rel_residual * op.norm_bound().max(f64::MIN_POSITIVE);
    // deterministic start with no particular symmetry
    let mut start: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * libm::sin(1.7 * i as f64 + 0.3)).collect();
    let mut last_residual = f64::INFINITY;
    for _ in 0..opts.max_restarts.max(1) {
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x /= s);
        let kmax = opts.krylov_dim.min(dim).max(1);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::with_capacity(kmax);
        let mut betas: Vec<f64> = Vec::with_capacity(kmax);
        let mut w = vec![0.0; dim];
        for k in 0..kmax {
            op.apply(&basis[k], &mut w);
            let a = dot(&w, &basis[k]);
            alphas.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let beta = norm(&w);
            if k + 1 == kmax || beta <= 1e-14 * op.norm_bound() {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }
        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let values = eig.eigenvalues.as_slice();
        let order = sorted_order(values);
        let k = order[0];
        let mut vector = vec![0.0; dim];
        for (i, b) in basis.iter().enumerate().take(m) {
            let c = eig.eigenvectors[(i, k)];
            vector.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        let nv = norm(&vector);
        vector.iter_mut().for_each(|x| *x /= nv);
        let value = values[k];
        let res = residual(op, &vector, value);
        last_residual = res;
        if res <= target {
            let spectral_radius = values.iter().fold(0.0f64, |a, v| a.max(libm::fabs(*v)));
            return Ok(LowestPair {
                value,
                vector,
                next: order.get(1).map(|&i| values[i]),
                spectral_radius,
                residual: res,
            });
        }
        start = vector;
    }
    Err(Error::NonConvergence { residual: last_residual, iterations: opts.max_restarts })
}
