//! Block Schmidt decomposition of the sector ground states.
//!
//! Across the cut `1..=M | M+1..=N`, every configuration with `r` down spins
//! has some number `l` of them on the left. Configurations with different `l`
//! have orthogonal left and right parts, so the reshaped amplitude matrix is
//! block diagonal with blocks `A^{r(l)}` of shape `C(M,l) × C(N-M, r-l)`, and
//! the Schmidt rank is the sum of the block ranks. For the ground states the
//! block ranks come out as `C(r, l)`, for a total of `2^r`.
//!
//! Block ranks are measured numerically: equilibrate, take singular values
//! with one-sided Jacobi, threshold relative to the largest. Sine-product
//! blocks are graded enough that binary64 cannot always separate the
//! smallest genuine singular value from the threshold; such blocks are
//! recomputed from scratch in double-double.

use alloc::vec::Vec;

use crate::combinatorics::{binomial, Combinations};
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::groundstate::{amplitude_unchecked, scaled_amplitude, LOG_FORM_THRESHOLD};
use crate::linalg::{cos_pi_ratio, sin_pi_ratio, singular_values, Matrix, Real};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Smallest ratio between the last retained and the first discarded
/// singular value for a rank to count as reliable.
pub const RELIABLE_GAP: f64 = 1e3;

/// Default cap on the number of entries in one block.
pub const DEFAULT_BLOCK_CAP: u128 = 1 << 24;

/// Residual bound for the three-term row recurrence of `A^{2(1)}`.
pub const RECURRENCE_TOLERANCE: f64 = 1e-12;

const EQUILIBRATION_ROUNDS: usize = 2;

/// The cut `1..=M | M+1..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    n: usize,
    m: usize,
}

impl Bipartition {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::InvalidBipartition { n, m });
        }
        Ok(Self { n, m })
    }

    /// The balanced cut `M = ⌊N/2⌋`.
    pub fn half(n: usize) -> Result<Self> {
        Self::new(n, n / 2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn right(&self) -> usize {
        self.n - self.m
    }

    /// Values of `l` for which `A^{r(l)}` is non-empty.
    pub fn block_range(&self, r: usize) -> core::ops::RangeInclusive<usize> {
        r.saturating_sub(self.right())..=r.min(self.m)
    }
}

/// Which entry formula a block is filled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockForm {
    /// Full product over all pairs: the state's amplitudes.
    Full,
    /// Only the `l·(r-l)` cross factors between left and right sites. Differs
    /// from `Full` by a nonzero scaling of each row and each column.
    CrossFactors,
}

/// `A^{r(l)}`: rows are left subsets of `1..=M` with `l` sites, columns are
/// right subsets of `M+1..=N` with `r - l` sites, both lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    cut: Bipartition,
    r: usize,
    l: usize,
    form: BlockForm,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
    entries: Matrix<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct BlockOptions {
    pub cap: u128,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_BLOCK_CAP }
    }
}

fn block_entry(n: usize, r: usize, l: usize, form: BlockForm, sites: &[u32]) -> f64 {
    match form {
        BlockForm::Full => amplitude_unchecked(n, sites),
        BlockForm::CrossFactors => {
            let mut prod = 1.0;
            for &ki in &sites[..l] {
                for &kj in &sites[l..r] {
                    prod *= sin_pi_ratio(ki as i64 - kj as i64, n as u64);
                }
            }
            prod
        }
    }
}

/// Builds `A^{r(l)}` with the full sine-product entries.
pub fn build_block(n: usize, m: usize, r: usize, l: usize) -> Result<BlockMatrix> {
    build_block_with(Bipartition::new(n, m)?, r, l, BlockForm::Full, &BlockOptions::default())
}

pub fn build_block_with(
    cut: Bipartition,
    r: usize,
    l: usize,
    form: BlockForm,
    opts: &BlockOptions,
) -> Result<BlockMatrix> {
    if l > r || l > cut.m || r - l > cut.right() {
        return Err(Error::InvalidBlock { r, l, m: cut.m, rest: cut.right() });
    }
    let size = binomial(cut.m, l) * binomial(cut.right(), r - l);
    if size > opts.cap {
        return Err(Error::Capacity { what: "block matrix entries", requested: size, cap: opts.cap });
    }
    let n = cut.n;
    let rows: Vec<Vec<u32>> = Combinations::new(1, cut.m as u32, l).collect();
    let cols: Vec<Vec<u32>> = Combinations::new(cut.m as u32 + 1, n as u32, r - l).collect();
    let mut data = Vec::with_capacity(size as usize);
    let mut sites = Vec::with_capacity(r);
    for left in &rows {
        for right in &cols {
            sites.clear();
            sites.extend_from_slice(left);
            sites.extend_from_slice(right);
            data.push(block_entry(n, r, l, form, &sites));
        }
    }
    let entries = Matrix::from_row_major(rows.len(), cols.len(), data);
    Ok(BlockMatrix { cut, r, l, form, rows, cols, entries })
}

impl BlockMatrix {
    pub fn bipartition(&self) -> Bipartition {
        self.cut
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn form(&self) -> BlockForm {
        self.form
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_subset(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn col_subset(&self, j: usize) -> &[u32] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn entries(&self) -> &Matrix<f64> {
        &self.entries
    }

    /// Entries recomputed in precision `T` and equilibrated.
    ///
    /// Long products (more than [`LOG_FORM_THRESHOLD`] sites) carry a separate
    /// binary exponent and are pre-scaled by powers of two per row and column
    /// before the sup-norm passes, so nothing underflows.
    fn equilibrated<T: Real>(&self) -> Matrix<T> {
        let n = self.cut.n;
        let (rows, cols) = (self.rows(), self.cols());
        let mut sites = Vec::with_capacity(self.r);
        let mut fill = |i: usize, j: usize| -> (T, i32) {
            sites.clear();
            sites.extend_from_slice(&self.rows[i]);
            sites.extend_from_slice(&self.cols[j]);
            match self.form {
                BlockForm::Full => scaled_amplitude::<T>(n, &sites),
                BlockForm::CrossFactors => {
                    let mut prod = T::ONE;
                    for &ki in &sites[..self.l] {
                        for &kj in &sites[self.l..] {
                            prod = prod * T::sin_pi_ratio(ki as i64 - kj as i64, n as u64);
                        }
                    }
                    (prod, 0)
                }
            }
        };
        let mut m = Matrix::<T>::zeros(rows, cols);
        if self.r <= LOG_FORM_THRESHOLD {
            for i in 0..rows {
                for j in 0..cols {
                    let (v, e) = fill(i, j);
                    m.set(i, j, v.ldexp(e));
                }
            }
        } else {
            let mut exps = alloc::vec![0i32; rows * cols];
            let mut mants = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    let (v, e) = fill(i, j);
                    mants.push(v);
                    exps[i * cols + j] = e;
                }
            }
            for i in 0..rows {
                let top = (0..cols).map(|j| exps[i * cols + j]).max().unwrap_or(0);
                for j in 0..cols {
                    exps[i * cols + j] -= top;
                }
            }
            for j in 0..cols {
                let top = (0..rows).map(|i| exps[i * cols + j]).max().unwrap_or(0);
                for i in 0..rows {
                    m.set(i, j, mants[i * cols + j].ldexp(exps[i * cols + j] - top));
                }
            }
        }
        m.equilibrate(EQUILIBRATION_ROUNDS);
        m
    }
}

/// Working precision of a rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// binary64.
    Standard,
    /// Double-double, ~106-bit mantissa.
    Extended,
}

impl Precision {
    pub fn name(&self) -> &'static str {
        match self {
            Precision::Standard => f64::NAME,
            Precision::Extended => DoubleDouble::NAME,
        }
    }

    fn unit_roundoff(&self) -> f64 {
        match self {
            Precision::Standard => f64::UNIT_ROUNDOFF,
            Precision::Extended => DoubleDouble::UNIT_ROUNDOFF,
        }
    }
}

/// Tolerance policy for block ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    /// Relative threshold in binary64: singular values at or below
    /// `tol·σ_max·max(rows, cols)` count as zero.
    pub tol: f64,
    /// Starting precision.
    pub precision: Precision,
    /// Recompute in double-double when the binary64 gap is below [`RELIABLE_GAP`].
    pub escalate: bool,
    pub block_cap: u128,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOLERANCE, precision: Precision::Standard, escalate: true, block_cap: DEFAULT_BLOCK_CAP }
    }
}

impl RankOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Relative threshold actually applied in `precision`: `tol` in binary64,
    /// scaled by the ratio of unit roundoffs otherwise.
    pub fn effective_tol(&self, precision: Precision) -> f64 {
        self.tol * precision.unit_roundoff() / f64::UNIT_ROUNDOFF
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

/// Measured rank of one block with its threshold diagnostics. Singular
/// values are reported relative to the block's largest one.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRank {
    pub l: usize,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    /// `σ_rank / σ_max`.
    pub smallest_retained: f64,
    /// `σ_{rank+1} / σ_max`, `None` when every singular value was kept.
    pub largest_discarded: Option<f64>,
    /// `smallest_retained / largest_discarded`; infinite when nothing was discarded.
    pub gap: f64,
    pub precision: Precision,
    /// Relative threshold used in `precision`.
    pub threshold: f64,
    pub reliable: bool,
}

fn rank_in<T: Real>(block: &BlockMatrix, rel_tol: f64, precision: Precision) -> BlockRank {
    let a = block.equilibrated::<T>();
    let sv = singular_values(&a);
    let sigma_max = sv.values.first().copied().unwrap_or(T::ZERO);
    let dim = block.rows().max(block.cols());
    let cutoff = sigma_max * T::from_f64(rel_tol * dim as f64);
    let rank = sv.values.iter().take_while(|&&s| s > cutoff).count();
    let rel = |s: T| if sigma_max > T::ZERO { (s / sigma_max).to_f64() } else { 0.0 };
    let smallest_retained = if rank > 0 { rel(sv.values[rank - 1]) } else { 0.0 };
    let largest_discarded = sv.values.get(rank).map(|&s| rel(s));
    let gap = match largest_discarded {
        None => f64::INFINITY,
        Some(0.0) => f64::INFINITY,
        Some(d) => smallest_retained / d,
    };
    BlockRank {
        l: block.l,
        rank,
        rows: block.rows(),
        cols: block.cols(),
        smallest_retained,
        largest_discarded,
        gap,
        precision,
        threshold: rel_tol,
        reliable: gap >= RELIABLE_GAP && sv.converged,
    }
}

/// Numerical rank of a block.
///
/// Applies two rounds of row/column sup-norm equilibration, then counts
/// singular values above `tol·σ_max·max(rows, cols)`. When that count is not
/// separated from the rest by a factor [`RELIABLE_GAP`] and escalation is on,
/// entries and decomposition are redone in double-double with the tolerance
/// held at the same multiple of the unit roundoff.
pub fn numerical_rank(block: &BlockMatrix, opts: &RankOptions) -> Result<BlockRank> {
    opts.validate()?;
    let first = match opts.precision {
        Precision::Standard => rank_in::<f64>(block, opts.effective_tol(Precision::Standard), Precision::Standard),
        Precision::Extended => {
            return Ok(rank_in::<DoubleDouble>(block, opts.effective_tol(Precision::Extended), Precision::Extended))
        }
    };
    if first.reliable || !opts.escalate {
        return Ok(first);
    }
    Ok(rank_in::<DoubleDouble>(block, opts.effective_tol(Precision::Extended), Precision::Extended))
}

/// Schmidt rank of `|ψ_0^r⟩` across one cut, block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub options: RankOptions,
    pub blocks: Vec<BlockRank>,
    pub total_rank: u128,
}

impl RankReport {
    pub fn reliable(&self) -> bool {
        self.blocks.iter().all(|b| b.reliable)
    }

    pub fn bipartition(&self) -> Bipartition {
        Bipartition { n: self.n, m: self.m }
    }

    pub fn block_ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rank).collect()
    }
}

/// Measures every block of `|ψ_0^r⟩` across `M` and sums their ranks.
pub fn schmidt_rank(n: usize, m: usize, r: usize, opts: &RankOptions) -> Result<RankReport> {
    opts.validate()?;
    let cut = Bipartition::new(n, m)?;
    if r > n / 2 {
        return Err(Error::InvalidSector { n, r, max: n / 2 });
    }
    let block_opts = BlockOptions { cap: opts.block_cap };
    let blocks = cut
        .block_range(r)
        .map(|l| {
            let block = build_block_with(cut, r, l, BlockForm::Full, &block_opts)?;
            numerical_rank(&block, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let total_rank = blocks.iter().map(|b| b.rank as u128).sum();
    Ok(RankReport { n, m, r, options: *opts, blocks, total_rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    /// Different Schmidt ranks across the same cut: no SLOCC protocol maps
    /// one state to the other.
    Inequivalent,
    /// Equal ranks; the witness says nothing.
    Inconclusive,
}

/// Outcome of the Schmidt-rank SLOCC witness, with its certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SloccVerdict {
    pub kind: VerdictKind,
    pub n: usize,
    pub m: usize,
    pub rank_a: u128,
    pub rank_b: u128,
    /// Both underlying rank reports were reliable.
    pub reliable: bool,
}

/// Compares two rank reports taken across the same cut.
pub fn slocc_verdict(a: &RankReport, b: &RankReport) -> Result<SloccVerdict> {
    if a.n != b.n || a.m != b.m {
        return Err(Error::BipartitionMismatch { n_a: a.n, m_a: a.m, n_b: b.n, m_b: b.m });
    }
    Ok(verdict_from_ranks(a.n, a.m, a.total_rank, b.total_rank, a.reliable() && b.reliable()))
}

/// The witness on bare ranks.
pub fn verdict_from_ranks(n: usize, m: usize, rank_a: u128, rank_b: u128, reliable: bool) -> SloccVerdict {
    let kind = if rank_a != rank_b { VerdictKind::Inequivalent } else { VerdictKind::Inconclusive };
    SloccVerdict { kind, n, m, rank_a, rank_b, reliable }
}

/// Result of checking `a_i + a_{i+2} = 2cos(π/N)·a_{i+1}` on the rows of `A^{2(1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceCheck {
    pub rows: usize,
    pub max_residual: f64,
    pub holds: bool,
}

/// Verifies the three-term recurrence on all consecutive row triples of
/// the unscaled `A^{2(1)}` for the cut at `M`.
pub fn row_recurrence_check(n: usize, m: usize) -> Result<RecurrenceCheck> {
    let cut = Bipartition::new(n, m)?;
    if m < 3 {
        return Err(Error::TooFewRows(m));
    }
    let block = build_block_with(cut, 2, 1, BlockForm::Full, &BlockOptions::default())?;
    let two_cos = 2.0 * cos_pi_ratio(1, n as u64);
    let mut max_residual: f64 = 0.0;
    for i in 0..block.rows() - 2 {
        for j in 0..block.cols() {
            let res = block.get(i, j) + block.get(i + 2, j) - two_cos * block.get(i + 1, j);
            max_residual = max_residual.max(libm::fabs(res));
        }
    }
    Ok(RecurrenceCheck { rows: block.rows(), max_residual, holds: max_residual < RECURRENCE_TOLERANCE })
}
