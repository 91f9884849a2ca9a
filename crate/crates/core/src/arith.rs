//! Integer arithmetic primitives shared by every other module: segmented
//! prime sieving, deterministic 64-bit primality, the von Mangoldt
//! function, primitive roots and discrete logarithms.
//!
//! Everything here is exact. Prime-power detection goes through integer
//! k-th roots (floating point only seeds the Newton step), and primality
//! is the deterministic Miller-Rabin variant with the 12-witness set that
//! covers the full `u64` range.

use std::collections::HashMap;

use crate::{Error, Result};

/// Hard cap on sieve limits; above this the prime list alone would not fit
/// a sane memory budget.
pub const MAX_SIEVE_LIMIT: u64 = 1 << 32;

/// Hard cap for least-prime-factor tables (4 bytes per entry).
pub const MAX_FACTOR_TABLE_LIMIT: u64 = 1 << 27;

/// Default segment length for the segmented sieve. Cache residency
/// dominates sieve throughput, so segments default to 2^18 entries.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 18;

/// Moduli up to this bound get a full discrete-log table; larger moduli
/// fall back to baby-step/giant-step.
pub const DLOG_TABLE_LIMIT: u64 = 1 << 20;

const SMALL_PRIMES: [u64; 18] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
];

// Deterministic for all n < 2^64 (Sinclair's witness set).
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, modulus);
        }
        exp >>= 1;
        base = mul_mod(base, base, modulus);
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

/// Modular inverse of `a` mod `m` for `gcd(a, m) = 1`, by extended Euclid.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic primality test for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // n odd, > 61^2 would be needed for a missed factor; run Miller-Rabin.
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &MR_WITNESSES {
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

/// Largest integer `r` with `r^k <= n`.
pub fn integer_kth_root(n: u64, k: u32) -> u64 {
    if n == 0 || k == 0 {
        return if k == 0 { 1 } else { 0 };
    }
    if k == 1 {
        return n;
    }
    if k >= 64 {
        return 1;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    // Float seed can be off by one in either direction near exact powers.
    while r > 1 && pow_checked(r, k).map_or(true, |v| v > n) {
        r -= 1;
    }
    while pow_checked(r + 1, k).map_or(false, |v| v <= n) {
        r += 1;
    }
    r
}

fn pow_checked(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Von Mangoldt function: `log p` when `m = p^j`, zero otherwise.
///
/// Prime-power detection is exact: a small-prime factor is divided out
/// completely, and for the remaining range only integer k-th roots decide.
pub fn von_mangoldt(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    for &p in &SMALL_PRIMES {
        if m % p == 0 {
            let mut q = m;
            while q % p == 0 {
                q /= p;
            }
            return if q == 1 { (p as f64).ln() } else { 0.0 };
        }
    }
    if is_prime(m) {
        return (m as f64).ln();
    }
    // No factor <= 61, so any prime power m = p^j has p >= 67, j <= 10.
    for j in 2..=10u32 {
        let root = integer_kth_root(m, j);
        if root < 67 {
            break;
        }
        if pow_checked(root, j) == Some(m) && is_prime(root) {
            return (root as f64).ln();
        }
    }
    0.0
}

/// Trial-division factorization into `(prime, exponent)` pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &p in &SMALL_PRIMES {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut d = 67u64;
    while d as u128 * d as u128 <= n as u128 {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 2;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Moebius function.
pub fn moebius(n: u64) -> i64 {
    if n == 0 {
        return 0;
    }
    let fs = factorize(n);
    if fs.iter().any(|&(_, e)| e > 1) {
        0
    } else if fs.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(mut a: i64, mut n: u64) -> i32 {
    assert!(n % 2 == 1 && n > 0, "jacobi denominator must be odd positive");
    a = a.rem_euclid(n as i64);
    let mut a = a as u64;
    let mut result = 1i32;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`, extending Jacobi to all integers `n`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n_abs = n.unsigned_abs();
    if n < 0 && a < 0 {
        result = -result;
    }
    let twos = n_abs.trailing_zeros();
    n_abs >>= twos;
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a/2) = 0, 1, -1 for a even, a = ±1 mod 8, a = ±3 mod 8.
        let a8 = a.rem_euclid(8);
        if (a8 == 3 || a8 == 5) && twos % 2 == 1 {
            result = -result;
        }
    }
    result * jacobi(a, n_abs)
}

/// All primes up to `limit`, with optional least-prime-factor table.
///
/// The prime list is produced by a segmented sieve so the working set is
/// one segment plus the primes below `sqrt(limit)`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    smallest_factor: Option<Vec<u32>>,
}

impl PrimeTable {
    /// Sieve all primes `<= limit`.
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_segment_len(limit, DEFAULT_SEGMENT_LEN)
    }

    /// Sieve with an explicit segment length (tuning knob).
    pub fn with_segment_len(limit: u64, segment_len: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Domain(format!("sieve limit {limit} < 2")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::Resource(format!(
                "sieve limit {limit} exceeds budget {MAX_SIEVE_LIMIT}"
            )));
        }
        let segment_len = segment_len.max(64);
        let root = integer_kth_root(limit, 2) as usize;

        // Base sieve up to sqrt(limit).
        let mut base = vec![true; root + 1];
        if !base.is_empty() {
            base[0] = false;
        }
        if root >= 1 {
            base[1] = false;
        }
        let mut i = 2usize;
        while i * i <= root {
            if base[i] {
                let mut j = i * i;
                while j <= root {
                    base[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        let base_primes: Vec<u64> = (2..=root).filter(|&i| base[i]).map(|i| i as u64).collect();

        let approx = if limit > 16 {
            (1.2 * limit as f64 / (limit as f64).ln()) as usize
        } else {
            8
        };
        let mut primes = Vec::with_capacity(approx);
        let mut segment = vec![true; segment_len];
        let mut low = 2u64;
        while low <= limit {
            let high = (low + segment_len as u64 - 1).min(limit);
            let len = (high - low + 1) as usize;
            segment[..len].fill(true);
            for &p in &base_primes {
                if p * p > high {
                    break;
                }
                let mut start = p * p;
                if start < low {
                    start = low.div_ceil(p) * p;
                }
                let mut j = (start - low) as usize;
                while j < len {
                    segment[j] = false;
                    j += p as usize;
                }
            }
            for (offset, &flag) in segment[..len].iter().enumerate() {
                if flag {
                    let n = low + offset as u64;
                    if n >= 2 {
                        primes.push(n);
                    }
                }
            }
            low = high + 1;
        }

        Ok(PrimeTable {
            limit,
            primes,
            smallest_factor: None,
        })
    }

    /// Sieve that also records the least prime factor of every `n <= limit`.
    pub fn with_least_factors(limit: u64) -> Result<Self> {
        if limit > MAX_FACTOR_TABLE_LIMIT {
            return Err(Error::Resource(format!(
                "least-factor table for limit {limit} exceeds budget {MAX_FACTOR_TABLE_LIMIT}"
            )));
        }
        let mut table = Self::new(limit)?;
        let n = (limit + 1) as usize;
        let mut lpf = vec![0u32; n];
        for &p in &table.primes {
            let mut m = p;
            while m <= limit {
                let slot = &mut lpf[m as usize];
                if *slot == 0 {
                    *slot = p as u32;
                }
                m += p;
            }
        }
        table.smallest_factor = Some(lpf);
        Ok(table)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Least prime factor of `n` (requires `with_least_factors`).
    pub fn least_factor(&self, n: u64) -> Option<u64> {
        let lpf = self.smallest_factor.as_ref()?;
        lpf.get(n as usize).and_then(|&p| (p != 0).then_some(p as u64))
    }

    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit);
        self.primes.binary_search(&n).is_ok()
    }
}

/// Smallest primitive root modulo an odd prime `p`, with the order
/// certified against the factorization of `p - 1`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if p == 2 {
        return Ok(1);
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let order_factors: Vec<u64> = factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    for g in 2..p {
        if order_factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1) {
            return Ok(g);
        }
    }
    unreachable!("every prime has a primitive root")
}

/// A prime `p` with a fixed primitive root `g` and the index map
/// `n -> nu(n)` where `g^nu(n) = n (mod p)`.
///
/// For `p` below [`DLOG_TABLE_LIMIT`] the full index table is stored;
/// above it, lookups run baby-step/giant-step.
#[derive(Debug, Clone)]
pub struct ResidueSystem {
    p: u64,
    g: u64,
    log_table: Option<Vec<u32>>,
}

impl ResidueSystem {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_table_limit(p, DLOG_TABLE_LIMIT)
    }

    pub fn with_table_limit(p: u64, table_limit: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Domain(format!("{p} is not an odd prime")));
        }
        let g = primitive_root(p)?;
        let log_table = (p <= table_limit).then(|| {
            let mut table = vec![0u32; p as usize];
            let mut value = 1u64;
            for e in 0..p - 1 {
                table[value as usize] = e as u32;
                value = mul_mod(value, g, p);
            }
            table
        });
        Ok(ResidueSystem { p, g, log_table })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Index `nu(n)` in `[0, p-2]` with `g^nu(n) = n (mod p)`.
    pub fn discrete_log(&self, n: u64) -> Result<u64> {
        let n = n % self.p;
        if n == 0 {
            return Err(Error::Domain(format!(
                "discrete log of 0 mod {} undefined",
                self.p
            )));
        }
        if let Some(table) = &self.log_table {
            return Ok(table[n as usize] as u64);
        }
        Ok(self.bsgs(n))
    }

    fn bsgs(&self, target: u64) -> u64 {
        let order = self.p - 1;
        let m = integer_kth_root(order, 2) + 1;
        let mut baby = HashMap::with_capacity(m as usize);
        let mut cur = 1u64;
        for j in 0..m {
            baby.entry(cur).or_insert(j);
            cur = mul_mod(cur, self.g, self.p);
        }
        // cur = g^m; giant stride is g^{-m}.
        let stride = inv_mod(cur, self.p).expect("generator is invertible");
        let mut gamma = target;
        for i in 0..=m {
            if let Some(&j) = baby.get(&gamma) {
                return (i * m + j) % order;
            }
            gamma = mul_mod(gamma, stride, self.p);
        }
        unreachable!("bsgs covers the whole group")
    }
}
