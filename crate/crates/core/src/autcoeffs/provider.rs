use std::sync::Arc;

use num_complex::Complex64;

use super::ramanujan::{delta_e4_exact, tau_normalized, DELTA_E4_LIMIT};
use super::satake::{power_sums_from_lambdas, SatakeLocal};
use super::AutError;
use crate::arith::{factorize, primes_up_to, FactorSieve};

/// Normalized Hecke eigenvalues `lambda(p) = a_p / p^{(k-1)/2}` of a GL(2) form.
#[derive(Debug, Clone)]
pub struct Gl2Form {
    pub name: String,
    pub weight: u32,
    pub level: u64,
    eigen: Vec<(u64, f64)>,
}

impl Gl2Form {
    /// Pairs must be sorted by prime without repeats.
    pub fn new(name: impl Into<String>, weight: u32, level: u64, eigen: Vec<(u64, f64)>) -> Result<Self, AutError> {
        if eigen.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(AutError::Validation("eigenvalue primes must be strictly increasing".into()));
        }
        Ok(Gl2Form { name: name.into(), weight, level, eigen })
    }

    /// Ramanujan's `Delta` with eigenvalues at all primes up to `limit`.
    pub fn delta(limit: usize) -> Self {
        let lambda = tau_normalized(limit.max(2));
        let eigen = primes_up_to(limit as u64).into_iter().map(|p| (p, lambda[p as usize])).collect();
        Gl2Form { name: "delta".into(), weight: 12, level: 1, eigen }
    }

    /// The weight-16 level-1 eigenform `Delta E4`, primes up to `limit` (at most 5000).
    pub fn delta_e4(limit: usize) -> Self {
        let limit = limit.min(DELTA_E4_LIMIT);
        let coeffs = delta_e4_exact(limit.max(2));
        let eigen = primes_up_to(limit as u64)
            .into_iter()
            .map(|p| (p, coeffs[p as usize] as f64 / (p as f64).powf(7.5)))
            .collect();
        Gl2Form { name: "delta-e4".into(), weight: 16, level: 1, eigen }
    }

    pub fn eigenvalue(&self, p: u64) -> Option<f64> {
        self.eigen.binary_search_by_key(&p, |e| e.0).ok().map(|i| self.eigen[i].1)
    }

    pub fn eigenvalues(&self) -> &[(u64, f64)] {
        &self.eigen
    }

    pub fn max_prime(&self) -> u64 {
        self.eigen.last().map_or(1, |e| e.0)
    }
}

/// Central character of the representation.
#[derive(Debug, Clone, PartialEq)]
pub enum CentralCharacter {
    Trivial,
    /// Values `w(n mod modulus)`.
    Table { modulus: u64, values: Vec<Complex64> },
}

impl CentralCharacter {
    pub fn eval(&self, n: u64) -> Complex64 {
        match self {
            CentralCharacter::Trivial => Complex64::new(1.0, 0.0),
            CentralCharacter::Table { modulus, values } => values[(n % modulus) as usize],
        }
    }
}

/// What is known at one prime.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeData {
    pub prime: u64,
    pub satake: Option<SatakeLocal>,
    /// Explicit `lambda(p), lambda(p^2), ...` when no Satake data is present.
    pub given: Vec<Complex64>,
}

impl PrimeData {
    fn lambda_power(&self, e: u32) -> Option<Complex64> {
        if e == 0 {
            return Some(Complex64::new(1.0, 0.0));
        }
        match &self.satake {
            Some(s) => Some(s.lambda_powers(e as usize)[e as usize]),
            None => self.given.get(e as usize - 1).copied(),
        }
    }
}

/// A degree-four coefficient source with its functional-equation data.
#[derive(Debug, Clone)]
pub struct CoeffProvider {
    name: String,
    conductor: u64,
    mu: [Complex64; 4],
    root_constant: Complex64,
    central: CentralCharacter,
    self_dual: bool,
    primes: Arc<Vec<PrimeData>>,
}

impl CoeffProvider {
    pub fn new(
        name: impl Into<String>,
        conductor: u64,
        mu: [Complex64; 4],
        root_constant: Complex64,
        primes: Vec<PrimeData>,
    ) -> Result<Self, AutError> {
        if primes.windows(2).any(|w| w[0].prime >= w[1].prime) {
            return Err(AutError::Validation("prime data must be strictly increasing".into()));
        }
        if (root_constant.norm() - 1.0).abs() > 1e-9 {
            return Err(AutError::Validation(format!("root-number constant {root_constant} is not unimodular")));
        }
        let self_dual = mu.iter().all(|m| m.im == 0.0)
            && root_constant.im == 0.0
            && primes.iter().all(|d| match &d.satake {
                Some(s) => s.elementary().iter().all(|e| e.im.abs() < 1e-12),
                None => d.given.iter().all(|g| g.im == 0.0),
            });
        Ok(CoeffProvider {
            name: name.into(),
            conductor,
            mu,
            root_constant,
            central: CentralCharacter::Trivial,
            self_dual,
            primes: Arc::new(primes),
        })
    }

    pub fn with_root_constant(mut self, c: Complex64) -> Self {
        self.root_constant = c;
        self
    }

    pub fn with_central_character(mut self, w: CentralCharacter) -> Self {
        self.central = w;
        self
    }

    pub fn with_mu(mut self, mu: [Complex64; 4]) -> Self {
        self.mu = mu;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// Shifts `mu_j` of `L_inf(s) = prod Gamma_R(s + mu_j)`.
    pub fn mu(&self) -> [Complex64; 4] {
        self.mu
    }

    pub fn root_constant(&self) -> Complex64 {
        self.root_constant
    }

    pub fn central_value(&self, q: u64) -> Complex64 {
        self.central.eval(q)
    }

    pub fn is_self_dual(&self) -> bool {
        self.self_dual
    }

    pub fn ramified_primes(&self) -> Vec<u64> {
        factorize(self.conductor.max(1)).map(|f| f.primes().collect()).unwrap_or_default()
    }

    pub fn prime_data(&self) -> &[PrimeData] {
        &self.primes
    }

    pub fn local(&self, p: u64) -> Option<&PrimeData> {
        self.primes.binary_search_by_key(&p, |d| d.prime).ok().map(|i| &self.primes[i])
    }

    pub fn satake(&self, p: u64) -> Result<&SatakeLocal, AutError> {
        self.local(p).and_then(|d| d.satake.as_ref()).ok_or(AutError::Gap { prime: p, exponent: 1 })
    }

    /// Largest `P` such that every prime up to `P` has data.
    pub fn coverage(&self) -> u64 {
        let mut last = 1;
        for (d, p) in self.primes.iter().zip(primes_up_to(self.primes.last().map_or(1, |d| d.prime))) {
            if d.prime != p {
                break;
            }
            last = p;
        }
        last
    }

    pub fn lambda_prime_power(&self, p: u64, e: u32) -> Result<Complex64, AutError> {
        if e == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        self.local(p)
            .and_then(|d| d.lambda_power(e))
            .ok_or(AutError::Gap { prime: p, exponent: e })
    }

    /// `lambda(n)` by multiplicativity.
    pub fn lambda_at(&self, n: u64) -> Result<Complex64, AutError> {
        let f = factorize(n).map_err(|_| AutError::Validation("lambda(0) is undefined".into()))?;
        f.factors()
            .iter()
            .try_fold(Complex64::new(1.0, 0.0), |acc, &(p, e)| Ok(acc * self.lambda_prime_power(p, e)?))
    }

    /// `a(p^l)` from the Satake parameters, cross-checked against the Newton
    /// reconstruction from `lambda(p), ..., lambda(p^l)`.
    pub fn power_sum(&self, p: u64, l: u32) -> Result<Complex64, AutError> {
        let local = self.satake(p)?;
        let direct = local.power_sum(l);
        let lambdas: Vec<Complex64> = (0..=l).map(|e| self.lambda_prime_power(p, e)).collect::<Result<_, _>>()?;
        let rebuilt = power_sums_from_lambdas(&lambdas)[l as usize];
        let diff = (direct - rebuilt).norm();
        if diff > 1e-9 * (1.0 + direct.norm()) {
            return Err(AutError::Consistency { prime: p, exponent: l, discrepancy: diff });
        }
        Ok(direct)
    }

    /// `lambda(n)` for `n` in `0..=limit` by a smallest-prime-factor sieve
    /// (index 0 holds 0).
    pub fn lambda_table(&self, limit: usize) -> Result<Vec<Complex64>, AutError> {
        let sieve = FactorSieve::new(limit.max(1));
        let mut table = vec![Complex64::new(0.0, 0.0); limit + 1];
        if limit >= 1 {
            table[1] = Complex64::new(1.0, 0.0);
        }
        let mut powers: Vec<Complex64> = Vec::new();
        let mut powers_prime = 0u64;
        for n in 2..=limit {
            let p = sieve.smallest_prime_factor(n);
            let mut m = n;
            let mut e = 0u32;
            while m % p as usize == 0 {
                m /= p as usize;
                e += 1;
            }
            if m > 1 {
                table[n] = table[m] * table[n / m];
                continue;
            }
            // n = p^e: local values come from the prime data
            if powers_prime != p {
                let d = self.local(p).ok_or(AutError::Gap { prime: p, exponent: 1 })?;
                let kmax = (limit as f64).ln() / (p as f64).ln();
                let kmax = kmax.floor() as usize + 1;
                powers = match &d.satake {
                    Some(s) => s.lambda_powers(kmax),
                    None => {
                        let mut v = vec![Complex64::new(1.0, 0.0)];
                        v.extend_from_slice(&d.given);
                        v
                    }
                };
                powers_prime = p;
            }
            table[n] = *powers.get(e as usize).ok_or(AutError::Gap { prime: p, exponent: e })?;
        }
        Ok(table)
    }
}

fn half(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `i^{4k-2} = -1` for the symmetric cube of a level-one weight-`k` form.
fn sym3_root_constant(weight: u32) -> Complex64 {
    let k = weight as i64;
    let power = (4 * k - 2).rem_euclid(4);
    [half(1.0), Complex64::new(0.0, 1.0), half(-1.0), Complex64::new(0.0, -1.0)][power as usize]
}

/// Symmetric cube of a GL(2) form. For level one the conductor is 1 and the
/// archimedean factor is `Gamma_C(s + 3(k-1)/2) Gamma_C(s + (k-1)/2)`.
pub fn sym3_provider(form: &Gl2Form) -> Result<CoeffProvider, AutError> {
    let w = (form.weight as f64 - 1.0) / 2.0;
    let mu = [half(3.0 * w), half(3.0 * w + 1.0), half(w), half(w + 1.0)];
    let ramified: Vec<u64> = factorize(form.level.max(1))?.primes().collect();
    let primes = form
        .eigenvalues()
        .iter()
        .filter(|(p, _)| !ramified.contains(p))
        .map(|&(p, l)| PrimeData { prime: p, satake: Some(SatakeLocal::sym3(p, l)), given: Vec::new() })
        .collect();
    let conductor = form.level.pow(3);
    CoeffProvider::new(format!("sym3-{}", form.name), conductor, mu, sym3_root_constant(form.weight), primes)
}

/// Rankin-Selberg product of two GL(2) forms of level one; archimedean factor
/// `Gamma_C(s + (k1+k2-2)/2) Gamma_C(s + |k2-k1|/2)`, root number `(-1)^max(k)`.
pub fn rankin_provider(f1: &Gl2Form, f2: &Gl2Form) -> Result<CoeffProvider, AutError> {
    if f1.level != 1 || f2.level != 1 {
        return Err(AutError::Validation("Rankin-Selberg provider supports level one only".into()));
    }
    let (k1, k2) = (f1.weight.min(f2.weight) as f64, f1.weight.max(f2.weight) as f64);
    let hi = (k1 + k2 - 2.0) / 2.0;
    let lo = (k2 - k1) / 2.0;
    let mu = [half(hi), half(hi + 1.0), half(lo), half(lo + 1.0)];
    let sign = if f1.weight.max(f2.weight) % 2 == 0 { 1.0 } else { -1.0 };
    let mut primes = Vec::new();
    for &(p, l1) in f1.eigenvalues() {
        if let Some(l2) = f2.eigenvalue(p) {
            primes.push(PrimeData { prime: p, satake: Some(SatakeLocal::rankin(p, l1, l2)), given: Vec::new() });
        }
    }
    CoeffProvider::new(format!("{}x{}", f1.name, f2.name), 1, mu, half(sign), primes)
}

/// `Sym^3 Delta` with primes up to `limit`.
pub fn sym3_delta(limit: usize) -> CoeffProvider {
    sym3_provider(&Gl2Form::delta(limit)).expect("level-one symmetric cube is always valid")
}

/// `Delta x (Delta E4)` with primes up to `min(limit, 5000)`.
pub fn rankin_delta_delta_e4(limit: usize) -> CoeffProvider {
    rankin_provider(&Gl2Form::delta(limit.min(DELTA_E4_LIMIT)), &Gl2Form::delta_e4(limit))
        .expect("level-one forms always pair")
}
