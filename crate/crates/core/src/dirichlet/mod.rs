//! Dirichlet characters modulo squarefree integers.
//!
//! A group mod `q = p_1 ... p_r` is the product of cyclic local groups, one per
//! prime, each with its least primitive root. A character is an exponent
//! vector `e_p` and evaluates as a product of roots of unity. Characters and
//! units share one mixed-radix indexing, so a single multidimensional DFT maps
//! functions on units to functions on characters and back.

mod cache;

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::arith::{self, gcd, gcd_signed, primitive_root, reduce_signed, ArithError, Factored};

pub use cache::DiskCache;

#[derive(Debug, Error)]
pub enum DirichletError {
    #[error("modulus {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("{n} is not a unit modulo {modulus}")]
    NotUnit { n: i64, modulus: u64 },
    #[error("character index {index} out of range for a group of order {order}")]
    BadIndex { index: usize, order: usize },
    #[error("exponent vector has {got} entries, expected {expected}")]
    BadExponents { expected: usize, got: usize },
    #[error("orthogonality mismatch mod {modulus} at n={n}: characters give {character_side}, divisors give {divisor_side}")]
    Consistency { modulus: u64, n: i64, character_side: f64, divisor_side: i64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("cache i/o at {path}: {source}")]
    Cache { path: String, source: std::io::Error },
}

/// `e(j/n) = exp(2 pi i j/n)`.
pub fn e_frac(j: i128, n: u64) -> Complex64 {
    let r = reduce_signed(j, n);
    let (s, c) = (TAU * r as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// Per-prime tables: discrete logs and local Gauss sums by exponent.
#[derive(Debug)]
pub struct LocalTable {
    pub prime: u64,
    pub generator: u64,
    dlog: Vec<u32>,
    gauss: Vec<Complex64>,
}

const NO_LOG: u32 = u32::MAX;

impl LocalTable {
    fn build(p: u64) -> Self {
        let generator = primitive_root(p);
        let mut dlog = vec![NO_LOG; p as usize];
        let mut x = 1u64;
        for l in 0..p - 1 {
            dlog[x as usize] = l as u32;
            x = x * generator % p;
        }
        Self::from_dlog(p, generator, dlog)
    }

    fn from_dlog(p: u64, generator: u64, dlog: Vec<u32>) -> Self {
        let n = (p - 1) as usize;
        // gauss[e] = sum_l e(g^l / p) zeta_{p-1}^{e l}
        let mut buf = vec![Complex64::default(); n];
        for x in 1..p {
            buf[dlog[x as usize] as usize] = e_frac(x as i128, p);
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        LocalTable { prime: p, generator, dlog, gauss: buf }
    }

    pub fn order(&self) -> u64 {
        self.prime - 1
    }

    pub fn log(&self, x: u64) -> Option<u64> {
        match self.dlog[(x % self.prime) as usize] {
            NO_LOG => None,
            l => Some(l as u64),
        }
    }

    /// Gauss sum of the local character with exponent `e`.
    pub fn gauss(&self, e: u64) -> Complex64 {
        self.gauss[e as usize]
    }
}

fn local_registry() -> &'static Mutex<HashMap<u64, Arc<LocalTable>>> {
    static REG: OnceLock<Mutex<HashMap<u64, Arc<LocalTable>>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared local table for `p`, built once per process (or loaded from `cache`).
pub fn local_table(p: u64, cache: Option<&DiskCache>) -> Result<Arc<LocalTable>, DirichletError> {
    if let Some(t) = local_registry().lock().unwrap().get(&p) {
        return Ok(t.clone());
    }
    let table = match cache.and_then(|c| c.load_dlog(p)) {
        Some((g, dlog)) => LocalTable::from_dlog(p, g, dlog),
        None => {
            let t = LocalTable::build(p);
            if let Some(c) = cache {
                c.store_dlog(p, t.generator, &t.dlog)?;
            }
            t
        }
    };
    let table = Arc::new(table);
    local_registry().lock().unwrap().entry(p).or_insert_with(|| table.clone());
    Ok(table)
}

/// The full character group modulo a squarefree `q`.
pub struct CharacterGroup {
    modulus: Factored,
    locals: Vec<Arc<LocalTable>>,
    strides: Vec<usize>,
    order: usize,
    exponent: u64,
    roots: Vec<Complex64>,
    unit_index: Vec<u32>,
    unit_value: Vec<u64>,
    gauss: OnceLock<Vec<Complex64>>,
    cache: Option<DiskCache>,
}

impl fmt::Debug for CharacterGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacterGroup")
            .field("modulus", &self.modulus)
            .field("order", &self.order)
            .finish()
    }
}

impl CharacterGroup {
    pub fn new(q: &Factored) -> Result<Arc<Self>, DirichletError> {
        Self::build(q, None)
    }

    pub fn with_cache(q: &Factored, cache: &DiskCache) -> Result<Arc<Self>, DirichletError> {
        Self::build(q, Some(cache.clone()))
    }

    pub fn from_modulus(q: u64) -> Result<Arc<Self>, DirichletError> {
        Self::new(&arith::factorize(q)?)
    }

    fn build(q: &Factored, cache: Option<DiskCache>) -> Result<Arc<Self>, DirichletError> {
        if !q.is_squarefree() {
            return Err(DirichletError::NotSquarefree(q.value()));
        }
        let locals = q
            .primes()
            .map(|p| local_table(p, cache.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let mut strides = Vec::with_capacity(locals.len());
        let mut order = 1usize;
        let mut exponent = 1u64;
        for t in &locals {
            strides.push(order);
            order *= t.order() as usize;
            exponent = exponent / gcd(exponent, t.order()) * t.order();
        }
        let roots = (0..exponent).map(|j| e_frac(j as i128, exponent)).collect();
        let qv = q.value() as usize;
        let mut unit_index = vec![NO_LOG; qv];
        let mut unit_value = vec![0u64; order];
        'x: for x in 0..qv {
            let mut idx = 0usize;
            for (t, &s) in locals.iter().zip(&strides) {
                match t.log(x as u64) {
                    Some(l) => idx += l as usize * s,
                    None => continue 'x,
                }
            }
            unit_index[x] = idx as u32;
            unit_value[idx] = x as u64;
        }
        Ok(Arc::new(CharacterGroup {
            modulus: q.clone(),
            locals,
            strides,
            order,
            exponent,
            roots,
            unit_index,
            unit_value,
            gauss: OnceLock::new(),
            cache,
        }))
    }

    pub fn modulus(&self) -> &Factored {
        &self.modulus
    }

    /// Number of characters, equal to phi(q).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn locals(&self) -> &[Arc<LocalTable>] {
        &self.locals
    }

    /// Mixed-radix position of a unit, or `None` for non-units.
    pub fn unit_index(&self, n: i64) -> Option<usize> {
        let x = reduce_signed(n as i128, self.modulus.value());
        match self.unit_index[x as usize] {
            NO_LOG => None,
            i => Some(i as usize),
        }
    }

    /// Least nonnegative unit at a mixed-radix position.
    pub fn unit_at(&self, index: usize) -> u64 {
        self.unit_value[index]
    }

    pub fn exponents_of(&self, id: usize) -> Vec<u64> {
        self.locals
            .iter()
            .zip(&self.strides)
            .map(|(t, &s)| ((id / s) % t.order() as usize) as u64)
            .collect()
    }

    pub fn id_of(&self, exponents: &[u64]) -> Result<usize, DirichletError> {
        if exponents.len() != self.locals.len() {
            return Err(DirichletError::BadExponents { expected: self.locals.len(), got: exponents.len() });
        }
        Ok(exponents
            .iter()
            .zip(self.locals.iter().zip(&self.strides))
            .map(|(&e, (t, &s))| (e % t.order()) as usize * s)
            .sum())
    }

    pub fn character(self: &Arc<Self>, id: usize) -> Result<Character, DirichletError> {
        if id >= self.order {
            return Err(DirichletError::BadIndex { index: id, order: self.order });
        }
        Ok(Character { group: self.clone(), id })
    }

    pub fn character_from_exponents(self: &Arc<Self>, exponents: &[u64]) -> Result<Character, DirichletError> {
        let id = self.id_of(exponents)?;
        Ok(Character { group: self.clone(), id })
    }

    pub fn characters(self: &Arc<Self>) -> impl Iterator<Item = Character> + '_ {
        (0..self.order).map(move |id| Character { group: self.clone(), id })
    }

    pub fn primitive_characters(self: &Arc<Self>) -> impl Iterator<Item = Character> + '_ {
        self.characters().filter(|c| c.is_primitive())
    }

    /// The trivial character is id 0.
    pub fn trivial(self: &Arc<Self>) -> Character {
        Character { group: self.clone(), id: 0 }
    }

    pub fn is_primitive_id(&self, id: usize) -> bool {
        self.locals
            .iter()
            .zip(&self.strides)
            .all(|(t, &s)| (id / s) % t.order() as usize != 0)
    }

    pub fn parity_id(&self, id: usize) -> i32 {
        let odd_sum: usize = self
            .locals
            .iter()
            .zip(&self.strides)
            .map(|(t, &s)| (id / s) % t.order() as usize)
            .sum();
        if odd_sum % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Id of the conjugate character.
    pub fn conj_id(&self, id: usize) -> usize {
        self.locals
            .iter()
            .zip(&self.strides)
            .map(|(t, &s)| {
                let n = t.order() as usize;
                ((n - (id / s) % n) % n) * s
            })
            .sum()
    }

    /// Phase index `j` with `chi_id(unit) = e(j / exponent)`.
    fn phase(&self, id: usize, unit: usize) -> u64 {
        let mut acc = 0u64;
        for (t, &s) in self.locals.iter().zip(&self.strides) {
            let n = t.order();
            let e = ((id / s) as u64) % n;
            let l = ((unit / s) as u64) % n;
            acc = (acc + (e * l % n) * (self.exponent / n)) % self.exponent;
        }
        acc
    }

    pub fn eval_id(&self, id: usize, n: i64) -> Complex64 {
        match self.unit_index(n) {
            Some(u) => self.roots[self.phase(id, u) as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// In-place multidimensional DFT with positive sign, symmetric in
    /// characters and units: output `[id] = sum_u data[u] chi_id(u)`.
    pub fn transform(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.order, "transform length must equal the group order");
        let mut planner = FftPlanner::new();
        for (t, &stride) in self.locals.iter().zip(&self.strides) {
            let n = t.order() as usize;
            if n == 1 {
                continue;
            }
            let fft = planner.plan_fft_inverse(n);
            let mut buf = vec![Complex64::default(); n];
            let block = stride * n;
            for base in (0..self.order).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = data[start + j * stride];
                    }
                    fft.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        data[start + j * stride] = *b;
                    }
                }
            }
        }
    }

    /// Gauss sums of all characters by id, from local sums and the twisted
    /// product rule. Cached in memory and optionally on disk.
    pub fn gauss_table(&self) -> &[Complex64] {
        self.gauss.get_or_init(|| {
            let q = self.modulus.value();
            if let Some(c) = &self.cache {
                if let Some(t) = c.load_gauss(q, self.order) {
                    return t;
                }
            }
            let mut table = vec![Complex64::new(1.0, 0.0); self.order];
            for (t, &s) in self.locals.iter().zip(&self.strides) {
                let n = t.order() as usize;
                let cofactor = q / t.prime;
                let l = t.log(cofactor).expect("squarefree cofactor is a local unit") as usize;
                for (id, v) in table.iter_mut().enumerate() {
                    let e = (id / s) % n;
                    *v *= t.gauss(e as u64) * e_frac((e * l) as i128, n as u64);
                }
            }
            if let Some(c) = &self.cache {
                // a failed cache write only costs recomputation later
                let _ = c.store_gauss(q, &table);
            }
            table
        })
    }

    /// `e(x/q)` for `x` in `0..q`.
    pub fn additive_phases(&self) -> Vec<Complex64> {
        let q = self.modulus.value();
        (0..q).map(|x| e_frac(x as i128, q)).collect()
    }

    pub fn primitive_count(&self) -> usize {
        self.locals.iter().map(|t| t.order() as usize - 1).product()
    }
}

/// One character of a [`CharacterGroup`].
#[derive(Clone)]
pub struct Character {
    group: Arc<CharacterGroup>,
    id: usize,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[{}; {:?}] mod {}", self.id, self.exponents(), self.modulus())
    }
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.modulus() == other.modulus()
    }
}

impl Character {
    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus.value()
    }

    pub fn exponents(&self) -> Vec<u64> {
        self.group.exponents_of(self.id)
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        self.group.eval_id(self.id, n)
    }

    pub fn conductor(&self) -> Factored {
        let pairs = self
            .group
            .locals
            .iter()
            .zip(self.exponents())
            .filter(|(_, e)| *e != 0)
            .map(|(t, _)| (t.prime, 1))
            .collect();
        Factored::from_prime_powers(pairs)
    }

    pub fn is_primitive(&self) -> bool {
        self.group.is_primitive_id(self.id)
    }

    /// `chi(-1)` as +1 or -1.
    pub fn parity(&self) -> i32 {
        self.group.parity_id(self.id)
    }

    pub fn conj(&self) -> Character {
        Character { group: self.group.clone(), id: self.group.conj_id(self.id) }
    }

    /// Direct O(q) Gauss sum.
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.modulus();
        (0..q)
            .map(|x| self.eval(x as i64) * e_frac(x as i128, q))
            .sum()
    }

    /// Gauss sum from the group's cached table.
    pub fn gauss_sum_cached(&self) -> Complex64 {
        self.group.gauss_table()[self.id]
    }
}

/// `sum over d | q with n = 1 mod d of mu(q/d) phi(d)`.
pub fn primitive_char_sum_divisor_side(q: &Factored, n: i64) -> i64 {
    q.factored_divisors()
        .iter()
        .filter(|d| reduce_signed(n as i128 - 1, d.value()) == 0)
        .map(|d| {
            let c = arith::factor(q.value() / d.value());
            c.mobius() * d.phi() as i64
        })
        .sum()
}

/// Sum of `chi(n)` over primitive characters mod `q`, evaluated both by
/// enumeration and on the divisor side; errors if they disagree.
pub fn primitive_char_sum(q: &Factored, n: i64) -> Result<i64, DirichletError> {
    if gcd_signed(n, q.value()) != 1 {
        return Err(DirichletError::NotUnit { n, modulus: q.value() });
    }
    let group = CharacterGroup::new(q)?;
    primitive_char_sum_in(&group, n)
}

pub fn primitive_char_sum_in(group: &Arc<CharacterGroup>, n: i64) -> Result<i64, DirichletError> {
    let q = group.modulus();
    let character_side: Complex64 = group.primitive_characters().map(|c| c.eval(n)).sum();
    let divisor_side = primitive_char_sum_divisor_side(q, n);
    let err = (character_side - Complex64::new(divisor_side as f64, 0.0)).norm();
    if err > 1e-6 {
        return Err(DirichletError::Consistency {
            modulus: q.value(),
            n,
            character_side: character_side.re,
            divisor_side,
        });
    }
    Ok(divisor_side)
}

/// Count of primitive characters mod `q` by the divisor formula.
pub fn primitive_count_formula(q: &Factored) -> i64 {
    q.divisors()
        .iter()
        .map(|&d| arith::mobius(q.value() / d) * arith::euler_phi(d) as i64)
        .sum()
}
