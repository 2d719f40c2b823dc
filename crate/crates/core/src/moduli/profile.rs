use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModuliError;
use crate::arith::{factorize, gcd, primes_in, Factored};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMode {
    /// Explicit small thresholds.
    #[default]
    Desk,
    /// Asymptotic thresholds, powers of `log Q`.
    Paper,
}

/// Parameters of the moduli set. In desk mode `p1`, `p2`, `z` and
/// `max_omega` are used as given; in paper mode they are derived from `q`,
/// `delta`, `nu` and `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliProfile {
    #[serde(default)]
    pub mode: ProfileMode,
    /// Scale `Q`.
    pub q: f64,
    #[serde(default = "default_small")]
    pub delta: f64,
    #[serde(default = "default_small")]
    pub nu: f64,
    #[serde(default = "default_one")]
    pub kappa: f64,
    #[serde(default = "default_small")]
    pub epsilon: f64,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub max_omega: u32,
    /// Members must be coprime to `f`.
    #[serde(default = "default_f")]
    pub f: u64,
    /// Conductor of the coefficient source; members must be coprime to it.
    #[serde(default = "default_f")]
    pub conductor: u64,
    /// Enforce `4 P1 < 2 P2 < z`.
    #[serde(default = "default_true")]
    pub require_shape: bool,
}

fn default_small() -> f64 {
    1e-4
}
fn default_one() -> f64 {
    1.0
}
fn default_f() -> u64 {
    1
}
fn default_true() -> bool {
    true
}

/// Thresholds after resolving the mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
    pub max_omega: u32,
}

impl ModuliProfile {
    /// `Q = 205`, `p1` in `[5, 10)`, `p2` in `[41, 82)`, `m = 1`, coprime to 6.
    pub fn desk() -> Self {
        ModuliProfile {
            mode: ProfileMode::Desk,
            q: 205.0,
            delta: default_small(),
            nu: default_small(),
            kappa: 1.0,
            epsilon: default_small(),
            p1: 5.0,
            p2: 41.0,
            z: 100.0,
            max_omega: 0,
            f: 6,
            conductor: 1,
            require_shape: true,
        }
    }

    /// Single modulus `15 = 3 * 5`: `p1` in `[2.5, 5)`, `p2` in `[5, 10)`
    /// with 7 excluded.
    pub fn singleton_15() -> Self {
        ModuliProfile {
            q: 12.0,
            p1: 2.5,
            p2: 5.0,
            z: 11.0,
            max_omega: 0,
            f: 7,
            require_shape: false,
            ..Self::desk()
        }
    }

    /// The two moduli `15` and `21`: the singleton profile without the
    /// exclusion of 7.
    pub fn pair_15_21() -> Self {
        ModuliProfile { f: 1, ..Self::singleton_15() }
    }

    /// Small profiles whose pipeline check runs in seconds.
    pub fn toy_profiles() -> Vec<(&'static str, Self)> {
        vec![("singleton-15", Self::singleton_15()), ("pair-15-21", Self::pair_15_21())]
    }

    pub fn from_toml(text: &str) -> Result<Self, ModuliError> {
        let profile: ModuliProfile = toml::from_str(text).map_err(|e| ModuliError::Profile(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModuliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModuliError::Profile(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile fields serialize")
    }

    pub fn thresholds(&self) -> Thresholds {
        match self.mode {
            ProfileMode::Desk => Thresholds { p1: self.p1, p2: self.p2, z: self.z, max_omega: self.max_omega },
            ProfileMode::Paper => {
                let lq = self.q.ln();
                Thresholds {
                    p1: lq.powf(self.kappa * self.nu),
                    p2: lq.powf(10_000.0),
                    z: lq.powf(20_000.0),
                    max_omega: (self.delta * lq.ln() + 10.0).floor().max(0.0) as u32,
                }
            }
        }
    }

    pub fn validate(&self) -> Result<(), ModuliError> {
        let bad = |m: String| Err(ModuliError::Profile(m));
        if !(self.q >= 1.0) {
            return bad(format!("Q must be at least 1, got {}", self.q));
        }
        for (name, v) in [("delta", self.delta), ("nu", self.nu), ("kappa", self.kappa), ("epsilon", self.epsilon)] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.mode == ProfileMode::Paper && !(self.epsilon <= self.delta && self.delta < self.nu && self.nu < 1e-3) {
            return bad("paper mode needs 0 < epsilon <= delta < nu < 1/1000".into());
        }
        if self.f == 0 || self.conductor == 0 {
            return bad("f and the conductor must be positive".into());
        }
        let t = self.thresholds();
        if self.mode == ProfileMode::Desk && !(t.p1 >= 2.0 && t.p2 >= 2.0) {
            return bad("desk mode needs p1, p2 >= 2".into());
        }
        if self.require_shape && self.mode == ProfileMode::Desk && !(4.0 * t.p1 < 2.0 * t.p2 && 2.0 * t.p2 < t.z) {
            return bad(format!("shape 4 P1 < 2 P2 < z fails for P1={}, P2={}, z={}", t.p1, t.p2, t.z));
        }
        Ok(())
    }
}

/// One modulus `q = p1 p2 m` with its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Member {
    pub q: u64,
    pub p1: u64,
    pub p2: u64,
    pub m: u64,
    #[serde(skip)]
    pub factored: Factored,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModuliSet {
    pub profile: ModuliProfile,
    pub mode: ProfileMode,
    pub thresholds: Thresholds,
    pub members: Vec<Member>,
}

impl ModuliSet {
    pub fn moduli(&self) -> Vec<Factored> {
        self.members.iter().map(|m| m.factored.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Re-checks every member against the set invariants.
    pub fn validate(&self) -> Result<(), ModuliError> {
        for mem in &self.members {
            check_member(&self.profile, &self.thresholds, mem)?;
        }
        if self.members.windows(2).any(|w| w[0].q >= w[1].q) {
            return Err(ModuliError::Invariant("members must be strictly increasing".into()));
        }
        Ok(())
    }
}

const EXHAUSTIVE_CAP: f64 = 1e6;

fn in_band(x: u64, scale: f64) -> bool {
    (x as f64) >= scale && (x as f64) < 2.0 * scale
}

fn check_member(profile: &ModuliProfile, t: &Thresholds, mem: &Member) -> Result<(), ModuliError> {
    let fail = |why: &str| Err(ModuliError::Invariant(format!("q = {}: {why}", mem.q)));
    let f = &mem.factored;
    if f.value() != mem.q || mem.p1 * mem.p2 * mem.m != mem.q {
        return fail("witness does not multiply out");
    }
    if !f.is_squarefree() {
        return fail("not squarefree");
    }
    if !in_band(mem.p1, t.p1) || !in_band(mem.p2, t.p2) {
        return fail("prime outside its dyadic band");
    }
    let x = profile.q / (t.p1 * t.p2);
    if !in_band(mem.m, x) {
        return fail("cofactor outside its dyadic band");
    }
    let mf = factorize(mem.m)?;
    if mf.omega() as u32 > t.max_omega || mf.primes().any(|p| (p as f64) <= t.z) {
        return fail("cofactor is not z-rough with bounded omega");
    }
    if gcd(mem.q, profile.f) != 1 || gcd(mem.q, profile.conductor) != 1 {
        return fail("shares a factor with f or the conductor");
    }
    let qf = mem.q as f64;
    if qf < profile.q / 16.0 || qf > 16.0 * profile.q {
        return fail("outside [Q/16, 16Q]");
    }
    Ok(())
}

fn primes_in_band(scale: f64) -> Vec<u64> {
    let lo = scale.ceil().max(2.0) as u64;
    let hi = (2.0 * scale).ceil() as u64;
    primes_in(lo, hi).into_iter().filter(|&p| in_band(p, scale)).collect()
}

/// Exhaustive enumeration of `q = p1 p2 m`.
pub fn build_moduli(profile: &ModuliProfile) -> Result<ModuliSet, ModuliError> {
    profile.validate()?;
    let t = profile.thresholds();
    let empty = |reason: String| ModuliError::Empty { mode: profile.mode, reason };
    if !(t.p1.is_finite() && t.p2.is_finite() && t.z.is_finite()) || t.p1 * t.p2 > 2.0 * profile.q {
        return Err(empty(format!("thresholds P1={:.3e}, P2={:.3e}, z={:.3e} exceed Q={}", t.p1, t.p2, t.z, profile.q)));
    }
    if profile.q > EXHAUSTIVE_CAP * 16.0 {
        return Err(ModuliError::Budget { what: "build_moduli", size: profile.q as u64, cap: (EXHAUSTIVE_CAP * 16.0) as u64 });
    }
    let x = profile.q / (t.p1 * t.p2);
    let m_lo = x.ceil().max(1.0) as u64;
    let m_hi = (2.0 * x).ceil() as u64;
    let cofactors: Vec<(u64, Factored)> = (m_lo..m_hi)
        .into_par_iter()
        .filter(|&m| in_band(m, x))
        .filter_map(|m| {
            let f = factorize(m).ok()?;
            let ok = f.is_squarefree() && f.omega() as u32 <= t.max_omega && f.primes().all(|p| (p as f64) > t.z);
            ok.then_some((m, f))
        })
        .collect();
    let p1s = primes_in_band(t.p1);
    let p2s = primes_in_band(t.p2);
    let mut members = Vec::new();
    for &p1 in &p1s {
        for &p2 in &p2s {
            if p1 == p2 {
                continue;
            }
            for (m, mf) in &cofactors {
                if mf.primes().any(|p| p == p1 || p == p2) {
                    continue;
                }
                let q = p1 * p2 * m;
                if gcd(q, profile.f) != 1 || gcd(q, profile.conductor) != 1 {
                    continue;
                }
                let qf = q as f64;
                if qf < profile.q / 16.0 || qf > 16.0 * profile.q {
                    continue;
                }
                let factored = Factored::from_prime_powers(vec![(p1, 1), (p2, 1)]).mul(mf);
                members.push(Member { q, p1, p2, m: *m, factored });
            }
        }
    }
    members.sort_by_key(|m| m.q);
    members.dedup_by_key(|m| m.q);
    if members.is_empty() {
        return Err(empty("no integer passes the band, roughness and coprimality filters".into()));
    }
    let set = ModuliSet { profile: profile.clone(), mode: profile.mode, thresholds: t, members };
    set.validate()?;
    Ok(set)
}
