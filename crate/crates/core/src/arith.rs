//! Exact integer and modular arithmetic on 64-bit moduli.
//!
//! Everything here is a pure function on small immutable values. Products are
//! formed in 128 bits so any modulus below 2^63 is safe.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("cannot factor zero")]
    Zero,
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("{a} is not invertible modulo {modulus}")]
    NotInvertible { a: i64, modulus: u64 },
    #[error("moduli {r} and {s} are not coprime")]
    NotCoprime { r: u64, s: u64 },
    #[error("residue is taken modulo {got}, expected {expected}")]
    ModulusMismatch { expected: u64, got: u64 },
    #[error("{0} exceeds the 2^63 factorization cap")]
    TooLarge(u64),
}

/// A positive integer together with its prime factorization.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Factored {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factored {
    pub fn one() -> Self {
        Factored { value: 1, factors: Vec::new() }
    }

    /// Builds from prime-exponent pairs. Pairs are sorted and merged; the caller
    /// guarantees that every base is prime.
    pub fn from_prime_powers(mut factors: Vec<(u64, u32)>) -> Self {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        let value = merged.iter().fold(1u64, |acc, &(p, e)| acc * p.pow(e));
        Factored { value, factors: merged }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn mobius(&self) -> i64 {
        if self.is_squarefree() {
            if self.factors.len() % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    pub fn is_coprime_to(&self, n: u64) -> bool {
        gcd(self.value, n) == 1
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Divisors as factored values (squarefree moduli only need this).
    pub fn factored_divisors(&self) -> Vec<Factored> {
        let mut out = vec![Factored::one()];
        for &(p, e) in &self.factors {
            let len = out.len();
            for k in 1..=e {
                for i in 0..len {
                    let mut f = out[i].factors.clone();
                    f.push((p, k));
                    out.push(Factored::from_prime_powers(f));
                }
            }
        }
        out.sort_by_key(|f| f.value);
        out
    }

    /// The part of `self` built from primes dividing `n`, and the cofactor.
    pub fn split_by(&self, n: u64) -> (Factored, Factored) {
        let (a, b): (Vec<_>, Vec<_>) = self.factors.iter().partition(|&&(p, _)| n % p == 0);
        (Factored::from_prime_powers(a), Factored::from_prime_powers(b))
    }

    pub fn mul(&self, other: &Factored) -> Factored {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        Factored::from_prime_powers(f)
    }
}

impl fmt::Debug for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if !self.factors.is_empty() {
            write!(f, " = ")?;
            for (i, (p, e)) in self.factors.iter().enumerate() {
                if i > 0 {
                    write!(f, "·")?;
                }
                if *e == 1 {
                    write!(f, "{p}")?;
                } else {
                    write!(f, "{p}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An element of Z/qZ in canonical form `0 <= value < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    pub fn new(value: i64, modulus: u64) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::ZeroModulus);
        }
        Ok(Residue { value: reduce_signed(value as i128, modulus), modulus })
    }

    pub fn from_u64(value: u64, modulus: u64) -> Result<Self, ArithError> {
        if modulus == 0 {
            return Err(ArithError::ZeroModulus);
        }
        Ok(Residue { value: value % modulus, modulus })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_signed(a: i64, b: u64) -> u64 {
    gcd(a.unsigned_abs(), b)
}

/// Canonical representative of `a mod m` for any signed input.
pub fn reduce_signed(a: i128, m: u64) -> u64 {
    let m = m as i128;
    (((a % m) + m) % m) as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `a^e mod m` for a signed base.
pub fn pow_mod_signed(a: i64, e: u64, m: u64) -> u64 {
    pow_mod(reduce_signed(a as i128, m), e, m)
}

/// Inverse of `a` modulo `q`. Fails exactly when `gcd(a, q) > 1`.
pub fn inv_mod(a: i64, q: u64) -> Result<Residue, ArithError> {
    if q == 0 {
        return Err(ArithError::ZeroModulus);
    }
    if q == 1 {
        return Residue::from_u64(0, 1);
    }
    let (mut old_r, mut r) = (reduce_signed(a as i128, q) as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(ArithError::NotInvertible { a, modulus: q });
    }
    Ok(Residue { value: reduce_signed(old_s, q), modulus: q })
}

/// Splits `x mod rs` into its images mod `r` and mod `s`.
pub fn crt_split(x: Residue, r: u64, s: u64) -> Result<(Residue, Residue), ArithError> {
    if r == 0 || s == 0 {
        return Err(ArithError::ZeroModulus);
    }
    if gcd(r, s) != 1 {
        return Err(ArithError::NotCoprime { r, s });
    }
    let rs = r * s;
    if x.modulus != rs {
        return Err(ArithError::ModulusMismatch { expected: rs, got: x.modulus });
    }
    Ok((Residue { value: x.value % r, modulus: r }, Residue { value: x.value % s, modulus: s }))
}

/// Inverse of [`crt_split`].
pub fn crt_combine(a: Residue, b: Residue) -> Result<Residue, ArithError> {
    let (r, s) = (a.modulus, b.modulus);
    if gcd(r, s) != 1 {
        return Err(ArithError::NotCoprime { r, s });
    }
    let rs = r * s;
    // x = a + r * ((b - a) * r^{-1} mod s)
    let r_inv = inv_mod(r as i64, s)?.value;
    let diff = reduce_signed(b.value as i128 - a.value as i128, s);
    let t = mul_mod(diff, r_inv, s);
    Ok(Residue { value: a.value + r * t, modulus: rs })
}

/// Iterator over the reduced residue system modulo `q`, ascending.
pub struct Units {
    next: u64,
    modulus: u64,
    primes: Vec<u64>,
}

impl Iterator for Units {
    type Item = Residue;

    fn next(&mut self) -> Option<Residue> {
        while self.next < self.modulus {
            let x = self.next;
            self.next += 1;
            if self.primes.iter().all(|&p| x % p != 0) {
                return Some(Residue { value: x, modulus: self.modulus });
            }
        }
        None
    }
}

pub fn units(q: &Factored) -> Units {
    Units { next: 0, modulus: q.value, primes: q.primes().collect() }
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
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

fn pollard_brent(n: u64, seed: u64) -> u64 {
    let f = |x: u64| (mul_mod(x, x, n) + seed) % n;
    let mut y = seed.wrapping_mul(0x9E37_79B9) % n;
    let m = 128u64;
    let mut g = 1u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..m.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    g
}

fn split_composite(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let mut seed = 1;
    loop {
        let d = pollard_brent(n, seed);
        if d != n && d != 1 {
            split_composite(d, out);
            split_composite(n / d, out);
            return;
        }
        seed += 1;
    }
}

/// Exact factorization: trial division by small primes, then Pollard-Brent
/// on whatever composite cofactor remains.
pub fn factorize(n: u64) -> Result<Factored, ArithError> {
    if n == 0 {
        return Err(ArithError::Zero);
    }
    if n > 1 << 63 {
        return Err(ArithError::TooLarge(n));
    }
    let mut rest = n;
    let mut primes = Vec::new();
    while rest % 2 == 0 {
        primes.push(2);
        rest /= 2;
    }
    let mut p = 3u64;
    while p <= 1000 && p * p <= rest {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
        p += 2;
    }
    if rest > 1 {
        if rest < 1_000_000 {
            // no factor below 1000 and below 10^6 means prime
            primes.push(rest);
        } else {
            split_composite(rest, &mut primes);
        }
    }
    Ok(Factored::from_prime_powers(primes.into_iter().map(|p| (p, 1)).collect()))
}

/// Infallible factorization for `1 <= n`. Panics on zero.
pub fn factor(n: u64) -> Factored {
    factorize(n).expect("factor() requires a positive argument")
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n).phi()
}

pub fn mobius(n: u64) -> i64 {
    factor(n).mobius()
}

/// Least primitive root modulo an odd prime `p` (or 1 for `p = 2`).
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let qs: Vec<u64> = factor(order).primes().collect();
    (2..p)
        .find(|&g| qs.iter().all(|&q| pow_mod(g, order / q, p) != 1))
        .expect("every prime has a primitive root")
}

/// Primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in the half-open interval `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi <= lo {
        return Vec::new();
    }
    primes_up_to(hi - 1).into_iter().filter(|&p| p >= lo).collect()
}

/// Smallest-prime-factor table for fast bulk factorization of `1..=n`.
pub struct FactorSieve {
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(n: usize) -> Self {
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        FactorSieve { spf }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn smallest_prime_factor(&self, n: usize) -> u64 {
        self.spf[n] as u64
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    pub fn factor(&self, mut n: usize) -> Factored {
        assert!(n >= 1 && n <= self.limit(), "{n} outside sieve range");
        let mut f: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            f.push((p as u64, e));
        }
        Factored { value: f.iter().fold(1, |a, &(p, e)| a * p.pow(e)), factors: f }
    }
}
