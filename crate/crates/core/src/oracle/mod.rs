//! Brute-force checks that share no code path with the closed forms:
//! exact diagonalization of the spin Hamiltonian in fixed-magnetization
//! blocks, and Schmidt ranks of explicitly reshaped states.

mod eigen;
pub mod modular;

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

pub use eigen::EigenOptions;
use eigen::{lowest, SymOp};
use modular::CyclotomicField;

use crate::combinatorics::{binomial, lex_rank, subset_mask, Combinations};
use crate::error::{Error, Result};
use crate::groundstate::SectorState;
use crate::linalg::{singular_values, Matrix};
use crate::spectrum::ChainParams;

/// Largest chain the oracle will diagonalize.
pub const ORACLE_MAX_SITES: usize = 20;
/// Largest block dimension the oracle will build.
pub const ORACLE_MAX_DIM: u128 = 1 << 20;
/// Relative spectral gap below which a ground state is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Sign of the XX coupling in the spin basis.
///
/// `Fermionized` gives every nearest-neighbour hop of a down spin the matrix
/// element `-J/2`: the convention under which the fermion modes have
/// dispersion `2B - J cos q` and the closed-form energies and sine-product
/// states hold for every `N`. `Literal` reads `(J/4)(σxσx + σyσy)` with
/// standard Pauli matrices and gives `+J/2`. For even `N` the two are related
/// by the sublattice sign `(-1)^{Σ k}`; for odd `N` they have different spectra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HoppingConvention {
    #[default]
    Fermionized,
    Literal,
}

/// The Hamiltonian restricted to `r` down spins, in the lexicographic
/// subset basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianBlock {
    n: usize,
    r: usize,
    /// Basis states as bit masks, site 1 most significant.
    basis: Vec<u64>,
    diagonal: f64,
    /// `(row, col, value)` off-diagonal entries, both triangles, sorted.
    hops: Vec<(usize, usize, f64)>,
}

impl HamiltonianBlock {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Diagonal entry `-B(N - 2r)`, shared by all basis states.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    pub fn basis_masks(&self) -> &[u64] {
        &self.basis
    }

    pub fn off_diagonal(&self) -> &[(usize, usize, f64)] {
        &self.hops
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::from_diagonal_element(d, d, self.diagonal);
        for &(i, j, v) in &self.hops {
            m[(i, j)] += v;
        }
        m
    }
}

impl SymOp for HamiltonianBlock {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.diagonal * xi;
        }
        for &(i, j, v) in &self.hops {
            y[i] += v * x[j];
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        HamiltonianBlock::to_dense(self)
    }

    fn norm_bound(&self) -> f64 {
        let mut rows = vec![libm::fabs(self.diagonal); self.dim()];
        for &(i, _, v) in &self.hops {
            rows[i] += libm::fabs(v);
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Builds `H` on the `r`-down-spin subspace with the default convention.
pub fn build_block_hamiltonian(p: &ChainParams, r: usize) -> Result<HamiltonianBlock> {
    build_block_hamiltonian_with(p, r, HoppingConvention::default())
}

/// Builds the block directly from spin flips: for every bond `(i, i+1)`,
/// `i = 1..N` with `N + 1 ≡ 1`, the term exchanges an up and a down spin.
/// On a two-site ring both bonds join sites 1 and 2, so that hop is doubled.
pub fn build_block_hamiltonian_with(
    p: &ChainParams,
    r: usize,
    convention: HoppingConvention,
) -> Result<HamiltonianBlock> {
    let n = p.n();
    if n > ORACLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "oracle chain length",
            requested: n as u128,
            cap: ORACLE_MAX_SITES as u128,
        });
    }
    if r > n {
        return Err(Error::InvalidSector { n, r, max: n });
    }
    let dim = binomial(n, r);
    if dim > ORACLE_MAX_DIM {
        return Err(Error::Capacity { what: "oracle block dimension", requested: dim, cap: ORACLE_MAX_DIM });
    }
    let hop = match convention {
        HoppingConvention::Fermionized => -0.5 * p.j(),
        HoppingConvention::Literal => 0.5 * p.j(),
    };
    let basis: Vec<u64> = Combinations::new(1, n as u32, r).map(|s| subset_mask(n, &s)).collect();
    let bit = |site: usize| 1u64 << (n - site);
    let mut hops = Vec::new();
    for (col, &state) in basis.iter().enumerate() {
        for i in 1..=n {
            let j = i % n + 1;
            let (bi, bj) = (bit(i), bit(j));
            // σ+σ- + σ-σ+ only acts on antiparallel pairs
            if (state & bi == 0) == (state & bj == 0) {
                continue;
            }
            let flipped = state ^ bi ^ bj;
            let row = lex_rank(n, &mask_sites(n, flipped)) as usize;
            hops.push((row, col, hop));
        }
    }
    hops.sort_by_key(|h| (h.0, h.1));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(hops.len());
    for h in hops {
        match merged.last_mut() {
            Some(last) if last.0 == h.0 && last.1 == h.1 => last.2 += h.2,
            _ => merged.push(h),
        }
    }
    let diagonal = -p.b() * (n as f64 - 2.0 * r as f64);
    Ok(HamiltonianBlock { n, r, basis, diagonal, hops: merged })
}

fn mask_sites(n: usize, mask: u64) -> Vec<u32> {
    (1..=n as u32).filter(|&k| mask & (1u64 << (n - k as usize)) != 0).collect()
}

/// Lowest eigenpair of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub n: usize,
    pub r: usize,
    pub ground_energy: f64,
    /// Unit-norm amplitudes over the block basis.
    pub ground_vector: Vec<f64>,
    /// Gap to the next level is below `1e-10` times the spectral radius.
    pub degenerate: bool,
    /// `‖Hv - Ev‖`.
    pub residual: f64,
}

pub fn ground_of_block(h: &HamiltonianBlock) -> Result<OracleResult> {
    ground_of_block_with(h, &EigenOptions::default())
}

pub fn ground_of_block_with(h: &HamiltonianBlock, opts: &EigenOptions) -> Result<OracleResult> {
    let pair = lowest(h, opts)?;
    let degenerate = match pair.next {
        Some(next) => next - pair.value < DEGENERACY_GAP * pair.spectral_radius,
        None => false,
    };
    Ok(OracleResult {
        n: h.n,
        r: h.r,
        ground_energy: pair.value,
        ground_vector: pair.vector,
        degenerate,
        residual: pair.residual,
    })
}

/// `|⟨analytic|numeric⟩|` with the analytic state normalized.
pub fn overlap(analytic: &SectorState, numeric: &OracleResult) -> Result<f64> {
    if analytic.n() != numeric.n || analytic.r() != numeric.r || analytic.len() != numeric.ground_vector.len() {
        return Err(Error::BasisMismatch {
            n_state: analytic.n(),
            r_state: analytic.r(),
            n_block: numeric.n,
            r_block: numeric.r,
        });
    }
    let c = analytic.norm_constant();
    let s: f64 = analytic.amplitudes().iter().zip(&numeric.ground_vector).map(|(a, v)| c * a * v).sum();
    Ok(libm::fabs(s).min(1.0))
}

/// Nonzero blocks of the `2^M × 2^{N-M}` reshaped amplitude matrix, keyed
/// by the number of down spins on the left. Rows and columns are the
/// left and right halves of each configuration's bit mask.
struct ReshapedBlock {
    rows: Vec<u64>,
    cols: Vec<u64>,
    /// `(row index, col index, entry index into the state)`.
    entries: Vec<(usize, usize, usize)>,
}

fn reshape(state: &SectorState, m: usize) -> Result<Vec<ReshapedBlock>> {
    let n = state.n();
    if m == 0 || m >= n {
        return Err(Error::InvalidBipartition { n, m });
    }
    if n > ORACLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "oracle chain length",
            requested: n as u128,
            cap: ORACLE_MAX_SITES as u128,
        });
    }
    let right_bits = n - m;
    let mut blocks: Vec<ReshapedBlock> =
        (0..=state.r()).map(|_| ReshapedBlock { rows: Vec::new(), cols: Vec::new(), entries: Vec::new() }).collect();
    for (idx, (sites, _)) in state.entries().enumerate() {
        let mask = subset_mask(n, sites);
        let left = mask >> right_bits;
        let right = mask & ((1u64 << right_bits) - 1);
        let b = &mut blocks[left.count_ones() as usize];
        let i = position_or_push(&mut b.rows, left);
        let j = position_or_push(&mut b.cols, right);
        b.entries.push((i, j, idx));
    }
    blocks.retain(|b| !b.entries.is_empty());
    Ok(blocks)
}

fn position_or_push(v: &mut Vec<u64>, x: u64) -> usize {
    match v.iter().position(|&y| y == x) {
        Some(i) => i,
        None => {
            v.push(x);
            v.len() - 1
        }
    }
}

/// Exact Schmidt rank of `state` across `1..=M | M+1..=N`.
///
/// Each amplitude is re-evaluated as a cyclotomic integer in two large prime
/// fields (see [`modular`]) at the state's support, the reshaped matrix is
/// reduced by Gaussian elimination, and the larger of the two ranks is kept.
pub fn dense_bipartition_rank(state: &SectorState, m: usize) -> Result<u128> {
    let blocks = reshape(state, m)?;
    let fields = [CyclotomicField::new(state.n(), 0), CyclotomicField::new(state.n(), 1)];
    let mut total = 0u128;
    for b in &blocks {
        let best = fields
            .iter()
            .map(|f| {
                let mut data = vec![0u64; b.rows.len() * b.cols.len()];
                for &(i, j, idx) in &b.entries {
                    data[i * b.cols.len() + j] = f.amplitude(state.subset(idx));
                }
                f.rank(b.rows.len(), b.cols.len(), data)
            })
            .max()
            .unwrap_or(0);
        total += best as u128;
    }
    Ok(total)
}

/// Schmidt rank of the stored binary64 amplitudes: singular values of each
/// reshaped block, no equilibration, threshold `tol·σ_max·max(rows, cols)`.
/// Only trustworthy while the genuine singular values stay well above
/// binary64 noise (roughly `N <= 12` here).
pub fn dense_bipartition_rank_numeric(state: &SectorState, m: usize, tol: f64) -> Result<u128> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let blocks = reshape(state, m)?;
    let c = state.norm_constant();
    let mut total = 0u128;
    for b in &blocks {
        let mut a = Matrix::<f64>::zeros(b.rows.len(), b.cols.len());
        for &(i, j, idx) in &b.entries {
            a.set(i, j, c * state.amplitudes()[idx]);
        }
        let sv = singular_values(&a);
        let smax = sv.values[0];
        let cutoff = tol * smax * b.rows.len().max(b.cols.len()) as f64;
        total += sv.values.iter().filter(|&&s| s > cutoff).count() as u128;
    }
    Ok(total)
}
