//! Exact ranks of sine-product matrices over prime fields.
//!
//! With `ζ = e^{iπ/N}`, `sin(aπ/N) = (ζ^a - ζ^{-a}) / 2i`, so every
//! amplitude is `(2i)^{-C(r,2)}` times an element of `Z[ζ]`. Dropping that
//! common factor and sending `ζ` to a primitive `2N`-th root of unity in
//! `GF(p)` (`p ≡ 1 mod 2N`) is a ring homomorphism. Minors that vanish over
//! `C` vanish mod `p`, so the rank mod `p` never exceeds the true rank, and
//! it equals it unless `p` divides one of finitely many nonzero minors.
//! Taking the maximum over a few large primes makes a miss vanishingly
//! unlikely.

use alloc::vec::Vec;

/// A prime `p ≡ 1 (mod 2N)` with a primitive `2N`-th root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclotomicField {
    pub p: u64,
    pub n: usize,
    /// Image of `ζ = e^{iπ/N}`.
    pub root: u64,
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            out.push(f);
            while m % f == 0 {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

impl CyclotomicField {
    /// The `index`-th prime `p ≡ 1 (mod 2N)` counting down from `2^61`.
    pub fn new(n: usize, index: usize) -> Self {
        let order = 2 * n as u64;
        let mut k = (1u64 << 61) / order;
        let mut found = 0;
        let p = loop {
            let cand = k * order + 1;
            if is_prime(cand) {
                if found == index {
                    break cand;
                }
                found += 1;
            }
            k -= 1;
        };
        let factors = prime_factors(order);
        let root = (2..p)
            .map(|h| pow_mod(h, (p - 1) / order, p))
            .find(|&g| factors.iter().all(|&q| pow_mod(g, order / q, p) != 1))
            .expect("a primitive root of unity exists when p = 1 mod 2N");
        Self { p, n, root }
    }

    /// Image of `2i·sin(aπ/N) = ζ^a - ζ^{-a}`.
    pub fn sine(&self, a: i64) -> u64 {
        let order = 2 * self.n as i64;
        let e = a.rem_euclid(order) as u64;
        let pos = pow_mod(self.root, e, self.p);
        let neg = pow_mod(self.root, (order as u64 - e) % order as u64, self.p);
        (pos + self.p - neg) % self.p
    }

    /// Image of the amplitude up to the common factor `(2i)^{C(r,2)}`.
    pub fn amplitude(&self, sites: &[u32]) -> u64 {
        let mut acc = 1u64;
        for (i, &ki) in sites.iter().enumerate() {
            for &kj in &sites[i + 1..] {
                acc = mul_mod(acc, self.sine(ki as i64 - kj as i64), self.p);
            }
        }
        acc
    }

    /// Rank of a row-major matrix over `GF(p)` by Gaussian elimination.
    pub fn rank(&self, rows: usize, cols: usize, mut data: Vec<u64>) -> usize {
        let p = self.p;
        let mut rank = 0;
        for col in 0..cols {
            let Some(pivot) = (rank..rows).find(|&i| data[i * cols + col] != 0) else {
                continue;
            };
            if pivot != rank {
                for j in 0..cols {
                    data.swap(pivot * cols + j, rank * cols + j);
                }
            }
            let inv = pow_mod(data[rank * cols + col], p - 2, p);
            for i in rank + 1..rows {
                let f = mul_mod(data[i * cols + col], inv, p);
                if f == 0 {
                    continue;
                }
                for j in col..cols {
                    let sub = mul_mod(f, data[rank * cols + j], p);
                    data[i * cols + j] = (data[i * cols + j] + p - sub) % p;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}
