use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::afe::{AfeWeight, MellinKernel};
use super::LfunError;
use crate::arith::gcd;
use crate::autcoeffs::CoeffProvider;
use crate::dirichlet::{Character, CharacterGroup};

/// `|L|` above this is declared nonzero.
pub const NONZERO_THRESHOLD: f64 = 1e-3;
/// `|L|` in `[this, NONZERO_THRESHOLD]` is indeterminate; below it, zero-ish.
pub const INDETERMINATE_THRESHOLD: f64 = 1e-6;

const ROUNDING: f64 = 1e-14;

/// `epsilon(pi, chi) = c_pi w_pi(q) chi(N_pi) tau(chi)^4 / q^2`.
pub fn root_number(provider: &CoeffProvider, chi: &Character) -> Result<Complex64, LfunError> {
    let q = chi.modulus();
    if !chi.is_primitive() {
        return Err(LfunError::NotPrimitive { q, id: chi.id() });
    }
    let conductor = provider.conductor();
    if gcd(q, conductor) != 1 {
        return Err(LfunError::Ramified { q, conductor });
    }
    let tau = chi.gauss_sum_cached();
    let qf = q as f64;
    let tau4 = (tau * tau) * (tau * tau) / (qf * qf);
    Ok(provider.root_constant() * provider.central_value(q) * chi.eval(conductor as i64) * tau4)
}

/// Splitting of the functional equation: `N_0 = X q^2 sqrt(N)` and
/// `M_0 = q^2 sqrt(N) / X`, so `N_0 M_0` is the analytic conductor
/// `q^4 N` (the `pi^{-s/2}` of each `Gamma_R` absorbs the usual `2 pi`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AfeConfig {
    pub split: f64,
    pub kernel: MellinKernel,
}

impl Default for AfeConfig {
    fn default() -> Self {
        AfeConfig { split: 1.0, kernel: MellinKernel::Unit }
    }
}

impl AfeConfig {
    pub fn with_split(split: f64) -> Self {
        AfeConfig { split, ..Self::default() }
    }

    pub fn scales(&self, q: u64, conductor: u64) -> (f64, f64) {
        let base = (q as f64).powi(2) * (conductor as f64).sqrt();
        (self.split * base, base / self.split)
    }

    pub fn weight(&self, provider: &CoeffProvider) -> Result<Arc<AfeWeight>, LfunError> {
        AfeWeight::shared(provider.mu(), self.kernel)
    }

    /// Number of terms kept on each side.
    pub fn lengths(&self, q: u64, provider: &CoeffProvider) -> Result<(usize, usize), LfunError> {
        let cut = self.weight(provider)?.cutoff();
        let (n0, m0) = self.scales(q, provider.conductor());
        Ok(((cut * n0).floor() as usize, (cut * m0).floor() as usize))
    }
}

/// `lambda(n) / sqrt(n)` and `ln n` for `n <= limit`, shared across moduli.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    scaled: Vec<Complex64>,
    logs: Vec<f64>,
    abs_sum: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(provider: &CoeffProvider, limit: usize) -> Result<Self, LfunError> {
        let lambda = provider.lambda_table(limit)?;
        let scaled: Vec<Complex64> = lambda
            .iter()
            .enumerate()
            .map(|(n, l)| if n == 0 { Complex64::new(0.0, 0.0) } else { l / (n as f64).sqrt() })
            .collect();
        let logs = (0..=limit).map(|n| if n == 0 { f64::NEG_INFINITY } else { (n as f64).ln() }).collect();
        let mut abs_sum = Vec::with_capacity(limit + 1);
        let mut acc = 0.0;
        for c in &scaled {
            acc += c.norm();
            abs_sum.push(acc);
        }
        Ok(CoefficientTable { scaled, logs, abs_sum })
    }

    pub fn limit(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `lambda(n) / sqrt(n)`.
    pub fn scaled(&self, n: usize) -> Complex64 {
        self.scaled[n]
    }

    pub fn ln(&self, n: usize) -> f64 {
        self.logs[n]
    }

    /// `sum over n <= m of |lambda(n)| / sqrt(n)`.
    pub fn abs_prefix(&self, m: usize) -> f64 {
        self.abs_sum[m.min(self.limit())]
    }

    fn require(&self, needed: usize) -> Result<(), LfunError> {
        if needed > self.limit() {
            return Err(LfunError::Coefficients { needed, available: self.limit() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LStatus {
    Nonzero,
    Indeterminate,
    ZeroIsh,
}

impl LStatus {
    pub fn of(abs: f64) -> Self {
        if abs > NONZERO_THRESHOLD {
            LStatus::Nonzero
        } else if abs >= INDETERMINATE_THRESHOLD {
            LStatus::Indeterminate
        } else {
            LStatus::ZeroIsh
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LStatus::Nonzero => "nonzero",
            LStatus::Indeterminate => "indeterminate",
            LStatus::ZeroIsh => "zero-ish",
        }
    }
}

/// `L(1/2, pi x chi)` with both partial sums of the functional equation.
#[derive(Debug, Clone, Serialize)]
pub struct TwistedLValue {
    pub q: u64,
    pub chi_id: usize,
    pub parity: i32,
    pub value: Complex64,
    pub root_number: Complex64,
    pub forward: Complex64,
    pub dual: Complex64,
    pub tail_est: f64,
    pub forward_terms: usize,
    pub dual_terms: usize,
}

impl TwistedLValue {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    pub fn status(&self) -> LStatus {
        LStatus::of(self.abs())
    }
}

struct Sides {
    n0: f64,
    m0: f64,
    len_f: usize,
    len_d: usize,
    weight: Arc<AfeWeight>,
}

fn sides(provider: &CoeffProvider, q: u64, config: &AfeConfig) -> Result<Sides, LfunError> {
    let conductor = provider.conductor();
    if gcd(q, conductor) != 1 {
        return Err(LfunError::Ramified { q, conductor });
    }
    let weight = config.weight(provider)?;
    let (n0, m0) = config.scales(q, conductor);
    let (len_f, len_d) = config.lengths(q, provider)?;
    Ok(Sides { n0, m0, len_f, len_d, weight })
}

fn tail_estimate(weight: &AfeWeight, coeffs: &CoefficientTable, s: &Sides, abs_f: f64, abs_d: f64) -> f64 {
    // terms left out weigh at most tail_bound each against the coefficient mass near the cutoff
    let spill = coeffs.abs_prefix(2 * s.len_f) + coeffs.abs_prefix(2 * s.len_d);
    weight.tail_bound() * spill + ROUNDING * (abs_f + abs_d)
}

/// Direct evaluation for one primitive character.
pub fn l_central(provider: &CoeffProvider, chi: &Character, config: &AfeConfig) -> Result<TwistedLValue, LfunError> {
    let q = chi.modulus();
    let eps = root_number(provider, chi)?;
    let s = sides(provider, q, config)?;
    let coeffs = CoefficientTable::new(provider, 2 * s.len_f.max(s.len_d))?;
    let mut forward = Complex64::new(0.0, 0.0);
    let mut abs_f = 0.0;
    let ln_n0 = s.n0.ln();
    for n in 1..=s.len_f {
        let term = coeffs.scaled(n) * s.weight.eval_log(coeffs.ln(n) - ln_n0);
        abs_f += term.norm();
        forward += term * chi.eval(n as i64);
    }
    let mut dual = Complex64::new(0.0, 0.0);
    let mut abs_d = 0.0;
    let ln_m0 = s.m0.ln();
    for m in 1..=s.len_d {
        let term = coeffs.scaled(m).conj() * s.weight.eval_log(coeffs.ln(m) - ln_m0).conj();
        abs_d += term.norm();
        dual += term * chi.eval(m as i64).conj();
    }
    Ok(TwistedLValue {
        q,
        chi_id: chi.id(),
        parity: chi.parity(),
        value: forward + eps * dual,
        root_number: eps,
        forward,
        dual,
        tail_est: tail_estimate(&s.weight, &coeffs, &s, abs_f, abs_d),
        forward_terms: s.len_f,
        dual_terms: s.len_d,
    })
}

/// Residue-class sums `sum over n = u of c(n) W(n / scale)`, indexed by unit position.
fn class_sums(
    group: &CharacterGroup,
    coeffs: &CoefficientTable,
    weight: &AfeWeight,
    len: usize,
    scale: f64,
    conjugate: bool,
) -> (Vec<Complex64>, f64) {
    let q = group.modulus().value() as usize;
    let index: Vec<usize> = (0..q).map(|r| group.unit_index(r as i64).unwrap_or(usize::MAX)).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); group.order()];
    let mut abs = 0.0;
    let ln_scale = scale.ln();
    let mut r = 0usize;
    for n in 1..=len {
        r += 1;
        if r == q {
            r = 0;
        }
        let idx = index[r];
        if idx == usize::MAX {
            continue;
        }
        let w = weight.eval_log(coeffs.ln(n) - ln_scale);
        let term = if conjugate { coeffs.scaled(n).conj() * w.conj() } else { coeffs.scaled(n) * w };
        abs += term.norm();
        sums[idx] += term;
    }
    (sums, abs)
}

/// All primitive characters mod `q` at once: residue-class sums on both sides
/// followed by one character transform each.
pub fn lvalues_for_modulus(
    provider: &CoeffProvider,
    group: &Arc<CharacterGroup>,
    config: &AfeConfig,
    coeffs: &CoefficientTable,
) -> Result<Vec<TwistedLValue>, LfunError> {
    let q = group.modulus().value();
    let s = sides(provider, q, config)?;
    coeffs.require(s.len_f.max(s.len_d))?;
    let (mut forward, abs_f) = class_sums(group, coeffs, &s.weight, s.len_f, s.n0, false);
    let (dual_sums, abs_d) = if provider.is_self_dual() && s.len_f == s.len_d && s.n0 == s.m0 {
        (forward.clone(), abs_f)
    } else {
        class_sums(group, coeffs, &s.weight, s.len_d, s.m0, true)
    };
    group.transform(&mut forward);
    let mut dual: Vec<Complex64> = dual_sums.iter().map(|z| z.conj()).collect();
    group.transform(&mut dual);
    let tail = tail_estimate(&s.weight, coeffs, &s, abs_f, abs_d);
    let mut rows = Vec::with_capacity(group.primitive_count());
    for chi in group.primitive_characters() {
        let id = chi.id();
        let eps = root_number(provider, &chi)?;
        let d = dual[id].conj();
        rows.push(TwistedLValue {
            q,
            chi_id: id,
            parity: chi.parity(),
            value: forward[id] + eps * d,
            root_number: eps,
            forward: forward[id],
            dual: d,
            tail_est: tail,
            forward_terms: s.len_f,
            dual_terms: s.len_d,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;
    use crate::autcoeffs::sym3_delta;

    fn quadratic(q: u64) -> Character {
        let g = CharacterGroup::from_modulus(q).unwrap();
        let half = (q - 1) / 2;
        g.character_from_exponents(&[half]).unwrap()
    }

    #[test]
    fn root_number_examples() {
        let plus = sym3_delta(10).with_root_constant(Complex64::new(1.0, 0.0));
        let g1 = CharacterGroup::from_modulus(1).unwrap();
        assert_eq!(root_number(&plus, &g1.trivial()).unwrap(), Complex64::new(1.0, 0.0));
        for q in [5u64, 3] {
            let e = root_number(&plus, &quadratic(q)).unwrap();
            assert!((e - 1.0).norm() < 1e-12, "q={q}: {e}");
        }
        let g15 = CharacterGroup::new(&factor(15)).unwrap();
        assert!(root_number(&plus, &g15.trivial()).is_err());
    }

    #[test]
    fn unimodular() {
        let pi = sym3_delta(10);
        for q in [7u64, 15, 77, 221] {
            let g = CharacterGroup::from_modulus(q).unwrap();
            for chi in g.primitive_characters() {
                assert!((root_number(&pi, &chi).unwrap().norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn untwisted_value_is_stable_and_vanishes() {
        let pi = sym3_delta(200);
        let chi = CharacterGroup::from_modulus(1).unwrap().trivial();
        let a = l_central(&pi, &chi, &AfeConfig::default()).unwrap();
        let b = l_central(&pi, &chi, &AfeConfig::with_split(2.0)).unwrap();
        assert!((a.value - b.value).norm() < 1e-6 * (1.0 + a.abs()), "{a:?} {b:?}");
        // the sign of the functional equation is -1
        assert!(a.abs() < 1e-8);
        assert!(a.tail_est < 1e-8);
    }

    #[test]
    fn batched_matches_direct() {
        let pi = sym3_delta(20_000);
        let config = AfeConfig::default();
        let coeffs = CoefficientTable::new(&pi, 20_000).unwrap();
        let g = CharacterGroup::from_modulus(7).unwrap();
        let rows = lvalues_for_modulus(&pi, &g, &config, &coeffs).unwrap();
        assert_eq!(rows.len(), 5);
        for row in &rows {
            let chi = g.character(row.chi_id).unwrap();
            let direct = l_central(&pi, &chi, &config).unwrap();
            assert!((direct.value - row.value).norm() < 1e-10, "{direct:?} vs {row:?}");
        }
    }

    #[test]
    fn wrong_sign_breaks_stability() {
        let pi = sym3_delta(10_000).with_root_constant(Complex64::new(1.0, 0.0));
        let chi = CharacterGroup::from_modulus(1).unwrap().trivial();
        let a = l_central(&pi, &chi, &AfeConfig::default()).unwrap();
        let b = l_central(&pi, &chi, &AfeConfig::with_split(2.0)).unwrap();
        assert!((a.value - b.value).norm() > 1e-4 * (1.0 + a.abs()));
    }

    #[test]
    fn statuses() {
        assert_eq!(LStatus::of(0.5), LStatus::Nonzero);
        assert_eq!(LStatus::of(1e-4), LStatus::Indeterminate);
        assert_eq!(LStatus::of(1e-9), LStatus::ZeroIsh);
    }
}
