//! Closed-form spectrum of the periodic XX chain in a uniform field.
//!
//! In the sector with `r` down spins the chain maps onto `r` free fermions
//! whose momenta sit on the grid `q = 2πn/N`, `n` integer for odd `r` and
//! half-odd for even `r`. The lowest state fills the `r` momenta closest to
//! zero, giving
//!
//! ```text
//! E_0^r = -J·D^r - B·(N - 2r),   D^r = sin(πr/N) / sin(π/N).
//! ```
//!
//! Adjacent sectors cross at `B_c^r = (J/2)·cos(π(r+½)/N) / cos(π/(2N))`,
//! so tuning `B` downward from above `J/2` walks the ground state through
//! `r = 0, 1, ..., ⌊N/2⌋` with a kink in `E(B)` at every crossing.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cos_pi_ratio, sin_pi_ratio};

/// Default coincidence tolerance for `B` against a critical field, in units of `|J|`.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-12;

/// Model inputs `N`, `J`, `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    n: usize,
    j: f64,
    b: f64,
}

impl ChainParams {
    pub fn new(n: usize, j: f64, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("N={n} but the ring needs N >= 2")));
        }
        if !j.is_finite() || j <= 0.0 {
            return Err(Error::InvalidParams(format!("J={j} must be finite and > 0")));
        }
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidParams(format!("B={b} must be finite and >= 0")));
        }
        Ok(Self { n, j, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Same chain at a different field.
    pub fn with_field(&self, b: f64) -> Result<Self> {
        Self::new(self.n, self.j, b)
    }

    /// `⌊N/2⌋`, the largest sector in the ground-state family.
    pub fn max_sector(&self) -> usize {
        self.n / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Magnetization sector: `r` down spins, boundary sign `α = (-1)^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    r: usize,
    parity: Parity,
}

impl Sector {
    pub fn new(r: usize) -> Self {
        let parity = if r % 2 == 0 { Parity::Even } else { Parity::Odd };
        Self { r, parity }
    }

    /// Checks `r <= ⌊N/2⌋`, the range of the ground-state family.
    pub fn in_family(n: usize, r: usize) -> Result<Self> {
        if r > n / 2 {
            return Err(Error::InvalidSector { n, r, max: n / 2 });
        }
        Ok(Self::new(r))
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// `α = (-1)^r`.
    pub fn alpha(&self) -> i32 {
        match self.parity {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    /// Whether the momentum label `n` in `q = 2πn/N` is half-odd in this sector.
    pub fn half_odd_momenta(&self) -> bool {
        self.parity == Parity::Even
    }
}

/// The occupied momenta `q_l = π(r + 1 - 2l)/N`, `l = 1..r`, of the sector
/// ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSet {
    n: usize,
    sector: Sector,
    /// `2n_l = r + 1 - 2l` for each occupied mode.
    twice_labels: Vec<i64>,
}

impl MomentumSet {
    pub fn ground(n: usize, r: usize) -> Result<Self> {
        let sector = Sector::in_family(n, r)?;
        let twice_labels = (1..=r as i64).map(|l| r as i64 + 1 - 2 * l).collect();
        Ok(Self { n, sector, twice_labels })
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// `2n` for each occupied mode, so `q = π·(2n)/N`.
    pub fn twice_labels(&self) -> &[i64] {
        &self.twice_labels
    }

    pub fn values(&self) -> Vec<f64> {
        self.twice_labels.iter().map(|&m| core::f64::consts::PI * m as f64 / self.n as f64).collect()
    }
}

/// Single-fermion energy `ε(q) = 2B - J cos q`.
pub fn dispersion(q: f64, p: &ChainParams) -> f64 {
    2.0 * p.b - p.j * libm::cos(q)
}

/// `D^r = csc(π/N)·sin(πr/N)`, for any `0 <= r <= N`.
pub fn d_coefficient(n: usize, r: usize) -> f64 {
    debug_assert!(r <= n);
    sin_pi_ratio(r as i64, n as u64) / sin_pi_ratio(1, n as u64)
}

/// `D^r` as the explicit sum `Σ_l cos(π(r+1-2l)/N)` over occupied modes.
pub fn d_coefficient_cosine_sum(n: usize, r: usize) -> f64 {
    (1..=r as i64).map(|l| cos_pi_ratio(r as i64 + 1 - 2 * l, n as u64)).sum()
}

/// `E_0^r = -D^r J - B(N - 2r)`.
pub fn sector_energy(p: &ChainParams, r: usize) -> Result<f64> {
    Sector::in_family(p.n, r)?;
    Ok(-d_coefficient(p.n, r) * p.j - p.b * (p.n as f64 - 2.0 * r as f64))
}

/// Sector energy from the mode-by-mode cosine sum; the cross-check path.
pub fn sector_energy_cosine_sum(p: &ChainParams, r: usize) -> Result<f64> {
    Sector::in_family(p.n, r)?;
    Ok(-d_coefficient_cosine_sum(p.n, r) * p.j - p.b * (p.n as f64 - 2.0 * r as f64))
}

/// Field at which sectors `r` and `r + 1` cross.
pub fn critical_field(p: &ChainParams, r: usize) -> Result<f64> {
    let last = p.max_sector();
    if r >= last {
        return Err(Error::NoTransition { n: p.n, r, last });
    }
    let n2 = 2 * p.n as u64;
    // cos(π(2r+1)/(2N)) / cos(π/(2N)); identical expressions at r = 0 give exactly 1
    Ok(0.5 * p.j * (cos_pi_ratio(2 * r as i64 + 1, n2) / cos_pi_ratio(1, n2)))
}

/// All critical fields `B_c^0 > B_c^1 > ... > B_c^{⌊N/2⌋-1}`.
pub fn critical_fields(p: &ChainParams) -> Vec<f64> {
    (0..p.max_sector()).map(|r| critical_field(p, r).expect("r below max sector")).collect()
}

/// Index of the ground sector at `p.b()`, using the default tolerance.
pub fn ground_sector(p: &ChainParams) -> Result<usize> {
    ground_sector_with_tol(p, DEFAULT_DEGENERACY_TOL)
}

/// Ground sector, or [`Error::Degenerate`] when `|B - B_c^r| <= tol·J`
/// for some `r`.
pub fn ground_sector_with_tol(p: &ChainParams, tol: f64) -> Result<usize> {
    let fields = critical_fields(p);
    for (r, &bc) in fields.iter().enumerate() {
        if libm::fabs(p.b - bc) <= tol * libm::fabs(p.j) {
            return Err(Error::Degenerate { lower: r, upper: r + 1, field: bc });
        }
    }
    Ok(fields.iter().filter(|&&bc| bc > p.b).count())
}

/// `min_r E_0^r` at the field in `p`, with the minimising sector
/// (lowest `r` on ties).
pub fn min_energy(p: &ChainParams) -> (usize, f64) {
    (0..=p.max_sector())
        .map(|r| (r, sector_energy(p, r).expect("r within family")))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Field range on which one sector is the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseInterval {
    pub sector: usize,
    /// Lower field bound; `0` for the last sector.
    pub lower: f64,
    /// Upper field bound; `None` above the top transition.
    pub upper: Option<f64>,
    pub d_coefficient: f64,
    /// `N - 2r`, the magnetization multiplying `-B`.
    pub field_coefficient: i64,
}

impl PhaseInterval {
    /// `dE/dB = -(N - 2r)` inside the interval.
    pub fn slope(&self) -> f64 {
        -(self.field_coefficient as f64)
    }

    /// `k` evenly spread interior fields; the unbounded top interval is
    /// sampled on `(B_c^0, 2·B_c^0)`.
    pub fn sample_fields(&self, k: usize) -> Vec<f64> {
        let hi = self.upper.unwrap_or(2.0 * self.lower);
        let lo = self.lower;
        (1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64).collect()
    }

    pub fn midpoint(&self) -> f64 {
        self.sample_fields(1)[0]
    }
}

/// Critical fields and the ground sector of every interval between them.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub n: usize,
    pub j: f64,
    /// Strictly decreasing in `r`.
    pub critical_fields: Vec<f64>,
    /// One interval per sector `r = 0..=⌊N/2⌋`, ordered by `r`.
    pub intervals: Vec<PhaseInterval>,
}

impl PhaseDiagram {
    /// Change of `dE/dB` going from sector `r` to `r + 1` (downward in `B`),
    /// one entry per critical field.
    pub fn derivative_jumps(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| w[1].slope() - w[0].slope()).collect()
    }

    /// Largest spacing between consecutive critical fields, including the
    /// spacing from the lowest one down to `B = 0`.
    pub fn max_field_gap(&self) -> f64 {
        let mut gap = self.critical_fields.last().copied().unwrap_or(0.0);
        for w in self.critical_fields.windows(2) {
            gap = gap.max(w[0] - w[1]);
        }
        gap
    }

    pub fn interval_for_sector(&self, r: usize) -> Option<&PhaseInterval> {
        self.intervals.get(r)
    }
}

pub fn phase_diagram(p: &ChainParams) -> PhaseDiagram {
    let fields = critical_fields(p);
    let intervals = (0..=p.max_sector())
        .map(|r| PhaseInterval {
            sector: r,
            lower: fields.get(r).copied().unwrap_or(0.0),
            upper: r.checked_sub(1).map(|k| fields[k]),
            d_coefficient: d_coefficient(p.n, r),
            field_coefficient: p.n as i64 - 2 * r as i64,
        })
        .collect();
    PhaseDiagram { n: p.n, j: p.j, critical_fields: fields, intervals }
}
