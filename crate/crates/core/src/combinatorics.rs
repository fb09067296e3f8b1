//! Binomial coefficients and lexicographic enumeration of r-subsets.
//!
//! Sites are 1-based throughout, matching the chain labelling `1..=N`.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `C(n, k)` in 128-bit arithmetic; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// A strictly increasing list of sites `k_1 < ... < k_r` in `[1, N]`,
/// labelling the configuration with down spins at exactly those sites.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteSubset {
    n: usize,
    sites: Vec<u32>,
}

impl SiteSubset {
    pub fn new(n: usize, sites: Vec<u32>) -> Result<Self> {
        validate_sites(n, &sites)?;
        Ok(Self { n, sites })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, sites: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[u32] {
        &self.sites
    }

    /// Rotates every site by one step around the ring (`k -> k + 1`, `N -> 1`).
    pub fn shifted(&self) -> Self {
        let n = self.n as u32;
        let mut sites: Vec<u32> = self.sites.iter().map(|&k| k % n + 1).collect();
        sites.sort_unstable();
        Self { n: self.n, sites }
    }
}

pub(crate) fn validate_sites(n: usize, sites: &[u32]) -> Result<()> {
    if sites.len() > n {
        return Err(Error::InvalidSubset { n, reason: "more sites than the chain has" });
    }
    for (i, &k) in sites.iter().enumerate() {
        if k == 0 || k as usize > n {
            return Err(Error::InvalidSubset { n, reason: "site index out of range" });
        }
        if i > 0 && sites[i - 1] >= k {
            return Err(Error::InvalidSubset { n, reason: "sites not strictly increasing" });
        }
    }
    Ok(())
}

/// Lexicographic iterator over the `k`-subsets of `{lo, ..., hi}`.
#[derive(Debug, Clone)]
pub struct Combinations {
    hi: u32,
    current: Vec<u32>,
    done: bool,
}

impl Combinations {
    /// Subsets of size `k` drawn from the inclusive range `lo..=hi`.
    pub fn new(lo: u32, hi: u32, k: usize) -> Self {
        let width = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
        let done = k > width;
        let current = (0..k as u32).map(|i| lo + i).collect();
        Self { hi, current, done }
    }

    fn advance(&mut self) {
        let k = self.current.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            // largest value allowed at position i
            let cap = self.hi - (k - 1 - i) as u32;
            if self.current[i] < cap {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Combinations {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        if self.current.is_empty() {
            self.done = true;
        } else {
            self.advance();
        }
        Some(out)
    }
}

/// Position of `sites` in the lexicographic order of `k`-subsets of `1..=n`.
pub fn lex_rank(n: usize, sites: &[u32]) -> u128 {
    let k = sites.len();
    let mut rank = 0u128;
    let mut prev = 0u32;
    for (i, &s) in sites.iter().enumerate() {
        for v in prev + 1..s {
            rank += binomial(n - v as usize, k - i - 1);
        }
        prev = s;
    }
    rank
}

/// Bit pattern of a subset with site 1 in the most significant of `n` bits.
pub fn subset_mask(n: usize, sites: &[u32]) -> u64 {
    sites.iter().fold(0u64, |m, &k| m | 1u64 << (n - k as usize))
}
