//! Ramanujan tau and the weight-16 cusp form by exact q-expansion.
//!
//! `Delta = q prod (1 - q^n)^24`. With `E3 = prod (1 - q^n)^3`, Jacobi's
//! identity makes `E3` sparse, `E6 = E3^2` is formed exactly, and
//! `E24 = (E6^2)^2` is squared twice modulo five NTT primes. A balanced
//! Garner step recovers each coefficient, which is only ever needed to double
//! precision after normalization.

use crate::arith::{inv_mod, primitive_root};

const NTT_PRIMES: [u32; 5] = [1_107_296_257, 1_711_276_033, 1_811_939_329, 2_013_265_921, 2_113_929_217];
const MAX_LOG_LEN: u32 = 25;
const BLOCK: usize = 1 << 14;

/// Montgomery arithmetic modulo an odd prime below 2^31.
#[derive(Clone, Copy)]
struct Field {
    p: u32,
    neg_inv: u32,
    r2: u32,
}

impl Field {
    fn new(p: u32) -> Self {
        let mut inv = 1u32;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r2 = ((1u128 << 64) % p as u128) as u32;
        Field { p, neg_inv: inv.wrapping_neg(), r2 }
    }

    #[inline(always)]
    fn reduce(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.neg_inv);
        let u = (t.wrapping_add((m as u64).wrapping_mul(self.p as u64)) >> 32) as u32;
        if u >= self.p {
            u.wrapping_sub(self.p)
        } else {
            u
        }
    }

    #[inline(always)]
    fn mul(&self, a: u32, b: u32) -> u32 {
        self.reduce((a as u64).wrapping_mul(b as u64))
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a.wrapping_add(b);
        if s >= self.p {
            s.wrapping_sub(self.p)
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a.wrapping_sub(b)
        } else {
            a.wrapping_add(self.p).wrapping_sub(b)
        }
    }

    fn to_mont(&self, a: u32) -> u32 {
        self.mul(a % self.p, self.r2)
    }

    fn from_mont(&self, a: u32) -> u32 {
        self.reduce(a as u64)
    }

    fn pow(&self, base: u32, mut e: u64) -> u32 {
        let mut acc = self.to_mont(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// `len / 2` consecutive powers of a primitive `len`-th root of unity.
    fn roots(&self, g: u32, len: usize, invert: bool) -> Vec<u32> {
        let mut w = self.pow(g, (self.p as u64 - 1) / len as u64);
        if invert {
            w = self.pow(w, self.p as u64 - 2);
        }
        let mut out = Vec::with_capacity(len / 2);
        let mut cur = self.to_mont(1);
        for _ in 0..len / 2 {
            out.push(cur);
            cur = self.mul(cur, w);
        }
        out
    }

    #[inline(always)]
    fn dif_pass(&self, a: &mut [u32], len: usize, roots: &[u32]) {
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(roots) {
                let (u, v) = (*x, *y);
                *x = self.add(u, v);
                *y = self.mul(self.sub(u, v), t);
            }
        }
    }

    #[inline(always)]
    fn dit_pass(&self, a: &mut [u32], len: usize, roots: &[u32]) {
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(roots) {
                let u = *x;
                let v = self.mul(*y, t);
                *x = self.add(u, v);
                *y = self.sub(u, v);
            }
        }
    }

    /// Per-level root tables, `tables[j]` for length `2^(j+1)`.
    fn root_tables(&self, n: usize, invert: bool) -> Vec<Vec<u32>> {
        let g = self.to_mont(primitive_root(self.p as u64) as u32);
        (1..=n.trailing_zeros()).map(|j| self.roots(g, 1 << j, invert)).collect()
    }

    /// Decimation-in-frequency NTT: natural order in, bit-reversed order out.
    /// Lengths up to `BLOCK` are finished block by block to stay in cache.
    fn ntt_forward(&self, a: &mut [u32]) {
        let n = a.len();
        let tables = self.root_tables(n, false);
        let block = BLOCK.min(n);
        let mut len = n;
        while len > block {
            self.dif_pass(a, len, &tables[len.trailing_zeros() as usize - 1]);
            len /= 2;
        }
        for chunk in a.chunks_exact_mut(block) {
            let mut len = block;
            while len >= 2 {
                self.dif_pass(chunk, len, &tables[len.trailing_zeros() as usize - 1]);
                len /= 2;
            }
        }
    }

    /// Decimation-in-time inverse of [`Self::ntt_forward`], including the `1/n`.
    fn ntt_inverse(&self, a: &mut [u32]) {
        let n = a.len();
        let tables = self.root_tables(n, true);
        let block = BLOCK.min(n);
        for chunk in a.chunks_exact_mut(block) {
            let mut len = 2;
            while len <= block {
                self.dit_pass(chunk, len, &tables[len.trailing_zeros() as usize - 1]);
                len *= 2;
            }
        }
        let mut len = 2 * block;
        while len <= n {
            self.dit_pass(a, len, &tables[len.trailing_zeros() as usize - 1]);
            len *= 2;
        }
        let n_inv = self.pow(self.to_mont(n as u32), self.p as u64 - 2);
        for x in a.iter_mut() {
            *x = self.mul(*x, n_inv);
        }
    }

    /// `(poly^2) mod x^keep` for Montgomery-form input of length `keep`.
    fn square_truncated(&self, poly: &[u32], keep: usize) -> Vec<u32> {
        let len = (2 * keep).next_power_of_two();
        let mut buf = vec![0u32; len];
        buf[..poly.len()].copy_from_slice(poly);
        self.ntt_forward(&mut buf);
        for x in buf.iter_mut() {
            *x = self.mul(*x, *x);
        }
        self.ntt_inverse(&mut buf);
        buf.truncate(keep);
        buf
    }
}

/// Coefficients of `prod (1 - q^n)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}` below `len`.
fn euler_cube(len: usize) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let c = (2 * k + 1) as i64;
        out.push((k * (k + 1) / 2, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    out
}

/// `E24 = prod (1 - q^n)^24` below `keep`, modulo each NTT prime.
fn e24_residues(keep: usize) -> Vec<Vec<u32>> {
    let cube = euler_cube(keep);
    let mut e6 = vec![0i64; keep];
    for &(i, a) in &cube {
        for &(j, b) in &cube {
            if i + j >= keep {
                break;
            }
            e6[i + j] += a * b;
        }
    }
    NTT_PRIMES
        .iter()
        .map(|&p| {
            let f = Field::new(p);
            let base: Vec<u32> = e6.iter().map(|&c| f.to_mont(c.rem_euclid(p as i64) as u32)).collect();
            let e12 = f.square_truncated(&base, keep);
            let e24 = f.square_truncated(&e12, keep);
            e24.into_iter().map(|x| f.from_mont(x)).collect()
        })
        .collect()
}

/// Largest `n` supported by [`tau_normalized`].
pub fn tau_limit() -> usize {
    1 << (MAX_LOG_LEN - 1)
}

/// `tau(n) / n^{11/2}` for `n` in `0..=limit` (index 0 unused, set to 0).
pub fn tau_normalized(limit: usize) -> Vec<f64> {
    assert!(limit < tau_limit(), "tau table limited to n < {}", tau_limit());
    // Delta = q E24, so tau(n) is the coefficient of q^{n-1} in E24.
    let residues = e24_residues(limit);
    let garner = Garner::new();
    let mut out = vec![0.0; limit + 1];
    for n in 1..=limit {
        let r: [u32; 5] = std::array::from_fn(|i| residues[i][n - 1]);
        out[n] = garner.to_f64(&r) / (n as f64).powf(5.5);
    }
    out
}

/// Exact `tau(n)` for `n <= limit` when every value fits in 128 bits
/// (true for `limit` up to about 7e6), by the same modular pipeline.
pub fn tau_exact(limit: usize) -> Vec<i128> {
    assert!(limit < tau_limit(), "tau table limited to n < {}", tau_limit());
    let residues = e24_residues(limit);
    let garner = Garner::new();
    let mut out = vec![0i128; limit + 1];
    for n in 1..=limit {
        let r: [u32; 5] = std::array::from_fn(|i| residues[i][n - 1]);
        out[n] = garner.to_i128(&r).expect("tau(n) exceeds 128 bits");
    }
    out
}

/// Mixed-radix reconstruction in the balanced range `(-P/2, P/2]`.
struct Garner {
    inv: [[u64; 5]; 5],
    half_digits: [u64; 5],
    radix_f64: [f64; 5],
}

impl Garner {
    fn new() -> Self {
        let mut inv = [[0u64; 5]; 5];
        for (j, row) in inv.iter_mut().enumerate() {
            for (i, slot) in row.iter_mut().enumerate() {
                if i != j {
                    *slot = inv_mod(NTT_PRIMES[j] as i64, NTT_PRIMES[i] as u64).unwrap().value();
                }
            }
        }
        // digits of (P - 1) / 2: P - 1 has all digits p_i - 1, halve from the top
        let mut half_digits = [0u64; 5];
        let mut carry = 0u128;
        for i in (0..5).rev() {
            let cur = carry * NTT_PRIMES[i] as u128 + (NTT_PRIMES[i] as u128 - 1);
            half_digits[i] = (cur / 2) as u64;
            carry = cur % 2;
        }
        let mut radix_f64 = [1.0f64; 5];
        for i in 1..5 {
            radix_f64[i] = radix_f64[i - 1] * NTT_PRIMES[i - 1] as f64;
        }
        Garner { inv, half_digits, radix_f64 }
    }

    fn digits(&self, r: &[u32; 5]) -> [u64; 5] {
        let mut a = [0u64; 5];
        for i in 0..5 {
            let p = NTT_PRIMES[i] as u64;
            let mut x = r[i] as u64 % p;
            for j in 0..i {
                x = (x + p - a[j] % p) % p * self.inv[j][i] % p;
            }
            a[i] = x;
        }
        a
    }

    /// Returns `(negative, magnitude digits)`.
    fn balanced(&self, r: &[u32; 5]) -> (bool, [u64; 5]) {
        let a = self.digits(r);
        let above_half = (0..5).rev().map(|i| a[i].cmp(&self.half_digits[i])).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater);
        if !above_half {
            return (false, a);
        }
        // P - x = (P - 1 - x) + 1, digitwise complement then add one
        let mut m = [0u64; 5];
        let mut carry = 1u64;
        for i in 0..5 {
            let d = NTT_PRIMES[i] as u64 - 1 - a[i] + carry;
            if d == NTT_PRIMES[i] as u64 {
                m[i] = 0;
                carry = 1;
            } else {
                m[i] = d;
                carry = 0;
            }
        }
        (true, m)
    }

    fn to_f64(&self, r: &[u32; 5]) -> f64 {
        let (neg, m) = self.balanced(r);
        let v: f64 = (0..5).rev().map(|i| m[i] as f64 * self.radix_f64[i]).sum();
        if neg {
            -v
        } else {
            v
        }
    }

    fn to_i128(&self, r: &[u32; 5]) -> Option<i128> {
        let (neg, m) = self.balanced(r);
        let mut v: i128 = 0;
        for i in (0..5).rev() {
            v = v.checked_mul(NTT_PRIMES[i] as i128)?.checked_add(m[i] as i128)?;
        }
        Some(if neg { -v } else { v })
    }
}

/// Reference `tau(n)` for `n <= limit` by repeated multiplication by `(1 - q^n)`.
pub fn tau_naive(limit: usize) -> Vec<i128> {
    let mut poly = vec![0i128; limit];
    poly[0] = 1;
    for n in 1..limit {
        for _ in 0..24 {
            for i in (n..limit).rev() {
                poly[i] -= poly[i - n];
            }
        }
    }
    let mut out = vec![0i128; limit + 1];
    out[1..].copy_from_slice(&poly);
    out
}

/// `sigma_3(n)` for `n` in `0..=limit`.
fn sigma3(limit: usize) -> Vec<i128> {
    let mut s = vec![0i128; limit + 1];
    for d in 1..=limit {
        let d3 = (d as i128).pow(3);
        let mut m = d;
        while m <= limit {
            s[m] += d3;
            m += d;
        }
    }
    s
}

/// Largest `n` for [`delta_e4_exact`]; keeps every partial sum inside i128.
pub const DELTA_E4_LIMIT: usize = 5000;

/// Coefficients of the weight-16 eigenform `Delta E4`, `E4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn delta_e4_exact(limit: usize) -> Vec<i128> {
    assert!(limit <= DELTA_E4_LIMIT, "weight-16 coefficients are limited to n <= {DELTA_E4_LIMIT}");
    let tau = tau_exact(limit.max(2));
    let s3 = sigma3(limit);
    let e4 = |n: usize| if n == 0 { 1 } else { 240 * s3[n] };
    let mut out = vec![0i128; limit + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = (1..=n).map(|m| tau[m] * e4(n - m)).sum();
    }
    out
}
