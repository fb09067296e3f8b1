//! Sector ground states as real amplitudes over r-subsets of sites.
//!
//! Filling the momenta `π(r+1-2l)/N` and expanding in site operators turns
//! the Slater determinant into a Vandermonde product, which collapses to
//!
//! ```text
//! ψ(k_1 < ... < k_r) ∝ Π_{i<j} sin((k_i - k_j)π/N)
//! ```
//!
//! The constant prefactor `(2i)^{C(r,2)}/√(N^r)` is a global phase times a
//! normalization and is dropped; amplitudes here are real and the state is
//! normalized through [`SectorState::norm_constant`].

use alloc::vec::Vec;

use crate::combinatorics::{binomial, lex_rank, subset_mask, validate_sites, Combinations, SiteSubset};
use crate::error::{Error, Result};
use crate::linalg::{sin_pi_ratio, Real};

/// Above this many down spins amplitudes are accumulated as log-magnitudes.
pub const LOG_FORM_THRESHOLD: usize = 12;

/// Default cap on `C(N, r)` for materialized states.
pub const DEFAULT_STATE_CAP: u128 = 1 << 26;

/// Hard cap on `N` for the dense `2^N` embedding.
pub const DENSE_MAX_SITES: usize = 24;

/// Sign and natural log of `|ψ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAmplitude {
    pub negative: bool,
    pub ln_abs: f64,
}

impl LogAmplitude {
    pub fn value(&self) -> f64 {
        let m = libm::exp(self.ln_abs);
        if self.negative {
            -m
        } else {
            m
        }
    }
}

/// `Π_{i<j} sin((k_i - k_j)π/N)` in log-magnitude form.
pub fn log_amplitude(n: usize, sites: &[u32]) -> LogAmplitude {
    let mut negative = false;
    let mut ln_abs = 0.0;
    for (i, &ki) in sites.iter().enumerate() {
        for &kj in &sites[i + 1..] {
            let s = sin_pi_ratio(ki as i64 - kj as i64, n as u64);
            negative ^= s < 0.0;
            ln_abs += libm::log(libm::fabs(s));
        }
    }
    LogAmplitude { negative, ln_abs }
}

/// Sine-product amplitude on an already validated site list.
pub(crate) fn amplitude_unchecked(n: usize, sites: &[u32]) -> f64 {
    if sites.len() > LOG_FORM_THRESHOLD {
        return log_amplitude(n, sites).value();
    }
    let mut prod = 1.0;
    for (i, &ki) in sites.iter().enumerate() {
        for &kj in &sites[i + 1..] {
            prod *= sin_pi_ratio(ki as i64 - kj as i64, n as u64);
        }
    }
    prod
}

/// Sine-product amplitude in an arbitrary working precision, returned as a
/// mantissa and a power-of-two exponent so long products cannot underflow.
pub(crate) fn scaled_amplitude<T: Real>(n: usize, sites: &[u32]) -> (T, i32) {
    let mut mant = T::ONE;
    let mut exp = 0i32;
    for (i, &ki) in sites.iter().enumerate() {
        for &kj in &sites[i + 1..] {
            mant = mant * T::sin_pi_ratio(ki as i64 - kj as i64, n as u64);
            let (_, e) = libm::frexp(mant.to_f64());
            if e != 0 {
                mant = mant.ldexp(-e);
                exp += e;
            }
        }
    }
    (mant, exp)
}

/// `Π_{i<j} sin((k_i - k_j)π/N)` for a subset of `1..=N`.
pub fn amplitude(n: usize, subset: &SiteSubset) -> Result<f64> {
    if subset.n() != n {
        return Err(Error::InvalidSubset { n, reason: "subset belongs to a different chain" });
    }
    Ok(amplitude_unchecked(n, subset.sites()))
}

/// Amplitude for a raw site list, validating it first.
pub fn amplitude_of_sites(n: usize, sites: &[u32]) -> Result<f64> {
    validate_sites(n, sites)?;
    Ok(amplitude_unchecked(n, sites))
}

/// The ground state of sector `r` with all `C(N, r)` amplitudes, listed in
/// lexicographic subset order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    n: usize,
    r: usize,
    /// Flattened subsets, `r` sites each.
    sites: Vec<u32>,
    amplitudes: Vec<f64>,
    norm_constant: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct StateOptions {
    /// Largest `C(N, r)` that may be materialized.
    pub cap: u128,
}

impl Default for StateOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_STATE_CAP }
    }
}

/// Builds `|ψ_0^r⟩` with default options.
pub fn build_state(n: usize, r: usize) -> Result<SectorState> {
    build_state_with(n, r, &StateOptions::default())
}

pub fn build_state_with(n: usize, r: usize, opts: &StateOptions) -> Result<SectorState> {
    if n < 2 {
        return Err(Error::InvalidParams(alloc::format!("N={n} but the ring needs N >= 2")));
    }
    if r > n / 2 {
        return Err(Error::InvalidSector { n, r, max: n / 2 });
    }
    let count = binomial(n, r);
    if count > opts.cap {
        return Err(Error::Capacity { what: "C(N, r) amplitudes", requested: count, cap: opts.cap });
    }
    let mut sites = Vec::with_capacity(count as usize * r);
    let mut amplitudes = Vec::with_capacity(count as usize);
    for subset in Combinations::new(1, n as u32, r) {
        amplitudes.push(amplitude_unchecked(n, &subset));
        sites.extend_from_slice(&subset);
    }
    let norm_sq = compensated_sum(amplitudes.iter().map(|a| a * a));
    Ok(SectorState { n, r, sites, amplitudes, norm_constant: 1.0 / libm::sqrt(norm_sq) })
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    // Neumaier
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if libm::fabs(sum) >= libm::fabs(v) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl SectorState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// Unnormalized sine-product amplitudes, in lexicographic subset order.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn subset(&self, i: usize) -> &[u32] {
        &self.sites[i * self.r..(i + 1) * self.r]
    }

    /// `(sites, unnormalized amplitude)` pairs in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.len()).map(move |i| (self.subset(i), self.amplitudes[i]))
    }

    /// Normalized amplitude of a subset, or `None` if it is not an r-subset of this chain.
    pub fn normalized_amplitude(&self, sites: &[u32]) -> Option<f64> {
        if sites.len() != self.r || validate_sites(self.n, sites).is_err() {
            return None;
        }
        let idx = lex_rank(self.n, sites) as usize;
        Some(self.norm_constant * self.amplitudes[idx])
    }

    /// `Σ (c·ψ)^2`, which is 1 up to rounding.
    pub fn norm_squared(&self) -> f64 {
        compensated_sum(self.amplitudes.iter().map(|a| {
            let v = self.norm_constant * a;
            v * v
        }))
    }
}

/// Embeds the state in the full `2^N` spin basis. Site 1 is the most
/// significant bit and a set bit is a down spin.
pub fn dense_vector(state: &SectorState) -> Result<Vec<f64>> {
    if state.n > DENSE_MAX_SITES {
        return Err(Error::Capacity {
            what: "dense 2^N embedding (sites)",
            requested: state.n as u128,
            cap: DENSE_MAX_SITES as u128,
        });
    }
    let mut v = alloc::vec![0.0; 1usize << state.n];
    for (sites, amp) in state.entries() {
        v[subset_mask(state.n, sites) as usize] = state.norm_constant * amp;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn amplitude_examples() {
        assert_eq!(amplitude(4, &SiteSubset::empty(4)).unwrap(), 1.0);
        let a12 = amplitude(4, &SiteSubset::new(4, vec![1, 2]).unwrap()).unwrap();
        assert_relative_eq!(a12, -core::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_eq!(amplitude_of_sites(4, &[1, 3]).unwrap(), -1.0);
        assert!(amplitude_of_sites(4, &[3, 1]).is_err());
        assert!(amplitude_of_sites(4, &[1, 5]).is_err());
        assert!(amplitude(5, &SiteSubset::new(4, vec![1]).unwrap()).is_err());
    }

    #[test]
    fn empty_sector() {
        let s = build_state(7, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitudes(), [1.0]);
        assert_eq!(s.norm_constant(), 1.0);
    }

    #[test]
    fn two_site_singlet_like_state() {
        let s = build_state(2, 1).unwrap();
        assert_eq!(s.amplitudes(), [1.0, 1.0]);
        assert_relative_eq!(s.norm_constant(), core::f64::consts::FRAC_1_SQRT_2);
        let v = dense_vector(&s).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.0);
        assert_relative_eq!(v[1], h);
        assert_relative_eq!(v[2], h);
        assert_eq!(v[3], 0.0);
        assert_eq!(dense_vector(&build_state(2, 0).unwrap()).unwrap(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn three_sites_one_flip() {
        let v = dense_vector(&build_state(3, 1).unwrap()).unwrap();
        let nz: Vec<f64> = v.iter().copied().filter(|x| *x != 0.0).collect();
        assert_eq!(nz.len(), 3);
        for x in nz {
            assert_relative_eq!(x, 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        }
        assert_eq!(v[0b100], v[0b001]);
    }

    #[test]
    fn four_sites_two_flips() {
        let s = build_state(4, 2).unwrap();
        assert_eq!(s.len(), 6);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        for &a in s.amplitudes() {
            assert!((a.abs() - h).abs() < 1e-15 || (a.abs() - 1.0).abs() < 1e-15);
        }
        assert!((s.norm_squared() - 1.0).abs() < 1e-15);
        assert_eq!(s.subset(0), [1, 2]);
        assert_eq!(s.subset(5), [3, 4]);
    }

    #[test]
    fn rejects_out_of_family_and_over_cap() {
        assert!(matches!(build_state(6, 4), Err(Error::InvalidSector { .. })));
        let tight = StateOptions { cap: 10 };
        assert!(matches!(build_state_with(6, 3, &tight), Err(Error::Capacity { .. })));
        let big = build_state(26, 1).unwrap();
        assert!(matches!(dense_vector(&big), Err(Error::Capacity { .. })));
    }

    #[test]
    fn normalization_up_to_twenty_sites() {
        for n in 2..=20 {
            for r in 0..=n / 2 {
                let s = build_state(n, r).unwrap();
                assert_eq!(s.len() as u128, binomial(n, r));
                let total: f64 = s.amplitudes().iter().map(|a| (s.norm_constant() * a).powi(2)).sum();
                assert!((total - 1.0).abs() < 1e-10, "n={n} r={r}: {total}");
            }
        }
    }

    #[test]
    fn log_form_agrees_with_direct_product() {
        for n in [10usize, 17, 30] {
            for subset in Combinations::new(1, n as u32, 5).step_by(7) {
                let direct = amplitude_unchecked(n, &subset);
                assert_relative_eq!(log_amplitude(n, &subset).value(), direct, max_relative = 1e-12);
                let (m, e) = scaled_amplitude::<f64>(n, &subset);
                assert_relative_eq!(libm::scalbn(m, e), direct, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn large_sectors_do_not_underflow() {
        // a contiguous block of 40 on 80 sites: ln|ψ| ~ -794, below the
        // smallest subnormal
        let sites: Vec<u32> = (1..=40).collect();
        let la = log_amplitude(80, &sites);
        assert!(la.ln_abs.is_finite() && la.ln_abs < -745.0);
        let (m, e) = scaled_amplitude::<f64>(80, &sites);
        assert!(m != 0.0 && e < -1074);
    }

    proptest! {
        #[test]
        fn probability_is_translation_invariant(n in 3usize..=18, seed in any::<u64>()) {
            let r = (seed % (n as u64 / 2 + 1)) as usize;
            let s = build_state(n, r).unwrap();
            let pick = (seed / 7) as usize % s.len();
            let sites = SiteSubset::new(n, s.subset(pick).to_vec()).unwrap();
            let p0 = amplitude(n, &sites).unwrap().powi(2);
            let p1 = amplitude(n, &sites.shifted()).unwrap().powi(2);
            prop_assert!((p0 - p1).abs() <= 1e-12 * p0.max(1e-300));
        }
    }
}
