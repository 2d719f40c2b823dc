use std::collections::BTreeSet;
use std::fmt::Display;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{coverage, Check, Context, Outcome, INVARIANT_COUNTS};
use crate::arith::{crt_combine, crt_split, factor, factorize, gcd, primes_up_to, units, Factored, Residue};
use crate::autcoeffs::{lambdas_from_power_sums, power_sums_from_lambdas, SatakeLocal, SatakeTag};
use crate::census::{mean_value, pipeline_shape_check, run_census, run_census_with, write_csv, CensusOptions, Parity};
use crate::dirichlet::{primitive_count_formula, CharacterGroup};
use crate::expsums::{
    e_pi_transform_character_side, e_pi_transform_formula, hyper_kloosterman_all, kk_brute, kk_diagonal,
    kk_diagonal_closed_form, kk_factored, t_k_brute, t_k_factored, tk_table, KKParams, KK_BRUTE_BUDGET, T_BRUTE_BUDGET,
};
use crate::lfun::{
    band_scales, dual_piece, dual_piece_direct, forward_piece, forward_piece_direct, lvalues_for_modulus, partition_check,
    root_number, AfeConfig, CoefficientTable, LfunError, SmoothWindow,
};
use crate::moduli::{
    binomial_entropy_bound, build_moduli, classify_smooth_rough, mobius_phi_brute, mobius_phi_convolution,
    reduction_identity_scan, ModuliProfile, PrimeWindow, SmoothClass,
};

/// Coefficients of the shared symmetric-cube provider.
pub const SYM3_LIMIT: usize = 400_000;

fn es<E: Display>(e: E) -> String {
    e.to_string()
}

fn squarefree_up_to(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| factor(n).is_squarefree()).collect()
}

fn random_squarefree(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> Factored {
    loop {
        let f = factor(rng.gen_range(lo..=hi));
        if f.is_squarefree() {
            return f;
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, q: u64) -> i64 {
    if q == 1 {
        return 0;
    }
    loop {
        let x = rng.gen_range(0..q);
        if gcd(x, q) == 1 {
            return x as i64;
        }
    }
}

pub static REGISTRY: &[Check] = &[
    // arith
    Check {
        id: "arith.factorize-roundtrip",
        module: "arith",
        covers: Some(0),
        summary: "factorize(n) multiplies back to n with increasing primes",
        tolerance: 0.0,
        run: arith_factorize,
    },
    Check {
        id: "arith.crt-roundtrip",
        module: "arith",
        covers: Some(1),
        summary: "crt_combine(crt_split(x)) = x for coprime r, s <= 10^4",
        tolerance: 0.0,
        run: arith_crt,
    },
    Check {
        id: "arith.units-count",
        module: "arith",
        covers: Some(2),
        summary: "|units(q)| equals phi(q) by a gcd count",
        tolerance: 0.0,
        run: arith_units,
    },
    // dirichlet
    Check {
        id: "dirichlet.multiplicativity",
        module: "dirichlet",
        covers: Some(0),
        summary: "chi(mn) = chi(m) chi(n)",
        tolerance: 1e-10,
        run: dirichlet_multiplicativity,
    },
    Check {
        id: "dirichlet.gauss-norm",
        module: "dirichlet",
        covers: Some(1),
        summary: "|tau(chi)|^2 = q for primitive chi, squarefree q <= 500",
        tolerance: 1e-8,
        run: dirichlet_gauss_norm,
    },
    Check {
        id: "dirichlet.gauss-coprime-product",
        module: "dirichlet",
        covers: Some(2),
        summary: "tau(psi nu) = tau(psi) tau(nu) nu(r) psi(s) for coprime r, s <= 100",
        tolerance: 1e-8,
        run: dirichlet_gauss_product,
    },
    Check {
        id: "dirichlet.primitive-count",
        module: "dirichlet",
        covers: Some(3),
        summary: "primitive characters counted by sum mu(q/d) phi(d), squarefree q <= 2000",
        tolerance: 0.0,
        run: dirichlet_primitive_count,
    },
    Check {
        id: "dirichlet.primitive-orthogonality",
        module: "dirichlet",
        covers: None,
        summary: "sum of primitive chi(n) by characters and by divisors agree",
        tolerance: 0.0,
        run: dirichlet_orthogonality,
    },
    // expsums
    Check {
        id: "expsums.tk-multiplicativity",
        module: "expsums",
        covers: Some(0),
        summary: "t_k_factored = t_k_brute for coprime squarefree r, s, k in {2,3,4}",
        tolerance: 1e-8,
        run: expsums_tk_mult,
    },
    Check {
        id: "expsums.kk-factorization",
        module: "expsums",
        covers: Some(1),
        summary: "kk_factored = kk_brute for r s1 s2 <= 3e4, k = 4",
        tolerance: 1e-7,
        run: expsums_kk_factor,
    },
    Check {
        id: "expsums.deligne-envelope",
        module: "expsums",
        covers: Some(2),
        summary: "|K_k(v; p)| <= k and |T_k(v; p)| <= k + 1 for p <= 500",
        tolerance: 1e-9,
        run: expsums_deligne,
    },
    Check {
        id: "expsums.kk-prime-bound",
        module: "expsums",
        covers: Some(3),
        summary: "|K_4(v1, v2, l; p, 1, 1)| <= 20, or <= sqrt(p) when p | l and p | v1 - v2",
        tolerance: 1e-9,
        run: expsums_kk_prime,
    },
    Check {
        id: "expsums.reality",
        module: "expsums",
        covers: Some(4),
        summary: "T_k real for even k; K_4(v, v, 0; r, s, s) real and nonnegative",
        tolerance: 1e-9,
        run: expsums_reality,
    },
    Check {
        id: "expsums.e-pi-consistency",
        module: "expsums",
        covers: Some(5),
        summary: "E_pi character side matches the T_4 formula within 1e-6 q",
        tolerance: 1.0,
        run: expsums_e_pi,
    },
    Check {
        id: "expsums.kk-diagonal-closed-form",
        module: "expsums",
        covers: None,
        summary: "K_4(v, v, 0; r, s, s) against its closed form and the sqrt(r) s ceiling",
        tolerance: 1e-9,
        run: expsums_kk_diagonal,
    },
    // autcoeffs
    Check {
        id: "autcoeffs.lambda-multiplicativity",
        module: "autcoeffs",
        covers: Some(0),
        summary: "lambda(mn) = lambda(m) lambda(n) on 1000 coprime pairs, lambda(1) = 1",
        tolerance: 1e-10,
        run: aut_lambda_mult,
    },
    Check {
        id: "autcoeffs.newton-roundtrip",
        module: "autcoeffs",
        covers: Some(1),
        summary: "lambda(p^k) to power sums and back, p <= 100, k <= 6",
        tolerance: 1e-9,
        run: aut_newton,
    },
    Check {
        id: "autcoeffs.satake-closure",
        module: "autcoeffs",
        covers: Some(2),
        summary: "Satake multisets closed under z -> 1/conj(z)",
        tolerance: 0.0,
        run: aut_closure,
    },
    Check {
        id: "autcoeffs.power-sum-envelope",
        module: "autcoeffs",
        covers: Some(3),
        summary: "|a(p^l)| <= 4 p^(l/2 - l/11) (1 + 1e-6)",
        tolerance: 0.0,
        run: aut_envelope,
    },
    Check {
        id: "autcoeffs.exterior-square-lower-bound",
        module: "autcoeffs",
        covers: Some(4),
        summary: "exterior square of a two-pair multiset against its lower bound",
        tolerance: 1e-12,
        run: aut_exterior,
    },
    // lfun
    Check {
        id: "lfun.afe-stability",
        module: "lfun",
        covers: Some(0),
        summary: "doubling N0 changes L(1/2) by at most 1e-4 (1 + |L|)",
        tolerance: 1e-4,
        run: lfun_afe_stability,
    },
    Check {
        id: "lfun.root-number-unimodular",
        module: "lfun",
        covers: Some(1),
        summary: "|eps(pi x chi)| = 1 for primitive chi, q <= 500",
        tolerance: 1e-6,
        run: lfun_root_numbers,
    },
    Check {
        id: "lfun.pieces-cross-check",
        module: "lfun",
        covers: Some(2),
        summary: "band pieces by divisors and by characters agree, up to 10 moduli <= 100",
        tolerance: 1e-6,
        run: lfun_pieces,
    },
    Check {
        id: "lfun.conjugate-symmetry",
        module: "lfun",
        covers: Some(3),
        summary: "L(1/2, pi x conj chi) = conj L(1/2, pi x chi) for self-dual pi",
        tolerance: 1e-6,
        run: lfun_conjugate,
    },
    Check {
        id: "lfun.partition-of-unity",
        module: "lfun",
        covers: Some(4),
        summary: "dyadic partition sums to 1",
        tolerance: 1e-10,
        run: lfun_partition,
    },
    // moduli
    Check {
        id: "moduli.c-multiplicativity",
        module: "moduli",
        covers: Some(0),
        summary: "c(mn) = c(m) c(n) for coprime m, n <= 10^4",
        tolerance: 0.0,
        run: moduli_c_mult,
    },
    Check {
        id: "moduli.set-revalidation",
        module: "moduli",
        covers: Some(1),
        summary: "every member of the shipped profiles passes the set invariants",
        tolerance: 0.0,
        run: moduli_revalidate,
    },
    Check {
        id: "moduli.reduction-identity",
        module: "moduli",
        covers: Some(2),
        summary: "reduction identity residual for n <= 10^5, window [5, 200]",
        tolerance: 1e-9,
        run: moduli_reduction,
    },
    Check {
        id: "moduli.binomial-entropy",
        module: "moduli",
        covers: Some(3),
        summary: "binomial(n, k) <= exp(n H(k/n)) for n <= 200, k <= n/2",
        tolerance: 0.0,
        run: moduli_binomial,
    },
    Check {
        id: "moduli.classify-partition",
        module: "moduli",
        covers: Some(4),
        summary: "each n gets exactly the tag its factorization dictates",
        tolerance: 0.0,
        run: moduli_classify,
    },
    Check {
        id: "moduli.c-brute",
        module: "moduli",
        covers: None,
        summary: "c(n) by convolution equals the divisor-sum count",
        tolerance: 0.0,
        run: moduli_c_brute,
    },
    // census
    Check {
        id: "census.csv-determinism",
        module: "census",
        covers: Some(0),
        summary: "identical inputs, fresh or resumed, give byte-identical CSV",
        tolerance: 0.0,
        run: census_determinism,
    },
    Check {
        id: "census.parity-partition",
        module: "census",
        covers: Some(1),
        summary: "even rows and odd rows partition the rows of both",
        tolerance: 0.0,
        run: census_parity,
    },
    Check {
        id: "census.mean-recomputation",
        module: "census",
        covers: Some(2),
        summary: "stored mean value equals the recomputed row sum",
        tolerance: 1e-9,
        run: census_mean,
    },
    Check {
        id: "census.pipeline-agreement",
        module: "census",
        covers: Some(3),
        summary: "band reconstruction matches the direct sum on the toy profiles",
        tolerance: 1e-4,
        run: census_pipeline,
    },
    // verify
    Check {
        id: "verify.registry-coverage",
        module: "verify",
        covers: Some(0),
        summary: "every stated module invariant has a registered check",
        tolerance: 0.0,
        run: verify_coverage,
    },
];

fn arith_factorize(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new(ctx.scale.pick("random n <= 10^6 (20000) + n <= 2000", "every n <= 10^6"));
    let ns: Vec<u64> = match ctx.scale {
        super::GridScale::Quick => (1..=2000).chain((0..20_000).map(|_| rng.gen_range(1..=1_000_000))).collect(),
        super::GridScale::Full => (1..=1_000_000).collect(),
    };
    let mut bad = Vec::new();
    for n in ns {
        let f = factorize(n).map_err(es)?;
        let fs = f.factors();
        let product: u64 = fs.iter().map(|&(p, e)| p.pow(e)).product();
        let ok = product == n && f.value() == n && fs.windows(2).all(|w| w[0].0 < w[1].0) && fs.iter().all(|&(p, e)| e >= 1 && crate::arith::is_prime(p));
        if !ok && bad.len() < 5 {
            bad.push(n);
        }
        out.holds(ok);
    }
    if !bad.is_empty() {
        out.note(format!("failing n: {bad:?}"));
    }
    Ok(out)
}

fn arith_crt(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let pairs = ctx.scale.pick(40, 300);
    let mut out = Outcome::new(format!("{pairs} random coprime (r, s) <= 10^4, 50 x each plus corners"));
    for _ in 0..pairs {
        let (r, s) = loop {
            let r = rng.gen_range(1..=10_000u64);
            let s = rng.gen_range(1..=10_000u64);
            if gcd(r, s) == 1 {
                break (r, s);
            }
        };
        let m = r * s;
        let mut xs: Vec<u64> = (0..50).map(|_| rng.gen_range(0..m)).collect();
        xs.extend([0, 1, m - 1, r % m, s % m]);
        for x in xs {
            let res = Residue::from_u64(x, m).map_err(es)?;
            let (a, b) = crt_split(res, r, s).map_err(es)?;
            let back = crt_combine(a, b).map_err(es)?;
            out.holds(back.value() == x && back.modulus() == m && a.value() == x % r && b.value() == x % s);
        }
    }
    Ok(out)
}

fn arith_units(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(600, 3000);
    let mut out = Outcome::new(format!("q in 1..={hi}"));
    for q in 1..=hi {
        let f = factorize(q).map_err(es)?;
        let by_gcd = (0..q).filter(|&x| gcd(x, q) == 1).count() as u64;
        let by_gcd = if q == 1 { 1 } else { by_gcd };
        out.holds(units(&f).count() as u64 == by_gcd && f.phi() == by_gcd);
    }
    Ok(out)
}

fn dirichlet_multiplicativity(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let moduli = ctx.scale.pick(20, 120);
    let mut out = Outcome::new(format!("{moduli} random squarefree q <= 2000, 4 characters, 25 (m, n) each"));
    for _ in 0..moduli {
        let q = random_squarefree(rng, 3, 2000);
        let group = CharacterGroup::new(&q).map_err(es)?;
        for _ in 0..4 {
            let chi = group.character(rng.gen_range(0..group.order())).map_err(es)?;
            for _ in 0..25 {
                let m = rng.gen_range(-5000i64..5000);
                let n = rng.gen_range(-5000i64..5000);
                out.error((chi.eval(m * n) - chi.eval(m) * chi.eval(n)).norm());
            }
        }
    }
    Ok(out)
}

fn dirichlet_gauss_norm(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(150, 500);
    let mut out = Outcome::new(format!("every squarefree q <= {hi}, every primitive chi"));
    for q in squarefree_up_to(1, hi) {
        let group = CharacterGroup::from_modulus(q).map_err(es)?;
        let table = group.gauss_table();
        for id in (0..group.order()).filter(|&id| group.is_primitive_id(id)) {
            out.error((table[id].norm_sqr() - q as f64).abs() / q as f64);
        }
    }
    Ok(out)
}

fn dirichlet_gauss_product(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let pairs = ctx.scale.pick(30, 200);
    let mut out = Outcome::new(format!("{pairs} random coprime squarefree (r, s) <= 100, random psi, nu"));
    for _ in 0..pairs {
        let (r, s) = loop {
            let r = random_squarefree(rng, 2, 100);
            let s = random_squarefree(rng, 2, 100);
            if gcd(r.value(), s.value()) == 1 {
                break (r, s);
            }
        };
        let gr = CharacterGroup::new(&r).map_err(es)?;
        let gs = CharacterGroup::new(&s).map_err(es)?;
        let q = r.mul(&s);
        let gq = CharacterGroup::new(&q).map_err(es)?;
        let psi = gr.character(rng.gen_range(0..gr.order())).map_err(es)?;
        let nu = gs.character(rng.gen_range(0..gs.order())).map_err(es)?;
        // exponents of psi nu, in the prime order of q
        let (pe, ne) = (psi.exponents(), nu.exponents());
        let (rp, sp): (Vec<u64>, Vec<u64>) = (r.primes().collect(), s.primes().collect());
        let exps: Vec<u64> = q
            .primes()
            .map(|p| match rp.iter().position(|&x| x == p) {
                Some(i) => pe[i],
                None => ne[sp.iter().position(|&x| x == p).expect("prime of s")],
            })
            .collect();
        let product = gq.character_from_exponents(&exps).map_err(es)?;
        for x in [1i64, 2, 7, 11, 13, 97] {
            out.error((product.eval(x) - psi.eval(x) * nu.eval(x)).norm());
        }
        let lhs = product.gauss_sum();
        let rhs = psi.gauss_sum() * nu.gauss_sum() * nu.eval(r.value() as i64) * psi.eval(s.value() as i64);
        out.error((lhs - rhs).norm() / (q.value() as f64).sqrt());
    }
    Ok(out)
}

fn dirichlet_primitive_count(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(600, 2000);
    let mut out = Outcome::new(format!("every squarefree q <= {hi}"));
    for q in squarefree_up_to(1, hi) {
        let f = factor(q);
        let group = CharacterGroup::new(&f).map_err(es)?;
        let by_exponents = (0..group.order()).filter(|&id| group.is_primitive_id(id)).count() as i64;
        let by_divisors: i64 = f.divisors().iter().map(|&d| crate::arith::mobius(q / d) * crate::arith::euler_phi(d) as i64).sum();
        out.holds(by_exponents == by_divisors && primitive_count_formula(&f) == by_divisors);
    }
    Ok(out)
}

fn dirichlet_orthogonality(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let moduli = ctx.scale.pick(15, 80);
    let mut out = Outcome::new(format!("{moduli} random squarefree q <= 1000, 20 units n each"));
    for _ in 0..moduli {
        let q = random_squarefree(rng, 2, 1000);
        let group = CharacterGroup::new(&q).map_err(es)?;
        for _ in 0..20 {
            let n = random_unit(rng, q.value()) + q.value() as i64 * rng.gen_range(-20i64..20);
            let by_chars: Complex64 = group.primitive_characters().map(|c| c.eval(n)).sum();
            let by_divisors = crate::dirichlet::primitive_char_sum_divisor_side(&q, n) as f64;
            out.holds((by_chars.re - by_divisors).abs() < 1e-6 && by_chars.im.abs() < 1e-6);
        }
    }
    Ok(out)
}

fn expsums_tk_mult(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let pairs = ctx.scale.pick(30, 250);
    let mut out = Outcome::new(format!("{pairs} random coprime squarefree (r, s) <= 200 with rs <= {T_BRUTE_BUDGET}, k = 2, 3, 4, 3 m each"));
    let mut done = 0;
    while done < pairs {
        let r = random_squarefree(rng, 1, 200);
        let s = random_squarefree(rng, 1, 200);
        if gcd(r.value(), s.value()) != 1 || r.value() * s.value() > T_BRUTE_BUDGET {
            continue;
        }
        done += 1;
        let q = r.mul(&s);
        for k in 2..=4 {
            for _ in 0..3 {
                let m = random_unit(rng, q.value());
                let brute = t_k_brute(m, &q, k).map_err(es)?;
                let fact = t_k_factored(m, &r, &s, k).map_err(es)?;
                out.error((brute.value - fact.value).norm());
            }
        }
    }
    Ok(out)
}

fn expsums_kk_factor(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let cases = ctx.scale.pick(12, 80);
    let cap = ctx.scale.pick(3000, 30_000).min(KK_BRUTE_BUDGET);
    let mut out = Outcome::new(format!("{cases} random instances with r s1 s2 <= {cap}, k = 4, plus shared-factor corners"));
    let mut instances = vec![(7u64, 5u64, 5u64), (3, 10, 5), (1, 6, 15), (11, 1, 1)];
    while instances.len() < cases {
        let r = random_squarefree(rng, 1, 60).value();
        let s1 = random_squarefree(rng, 1, 40).value();
        let s2 = random_squarefree(rng, 1, 40).value();
        if gcd(r, s1) == 1 && gcd(r, s2) == 1 && r * s1 * s2 <= cap && r * s1 * s2 > 1 {
            instances.push((r, s1, s2));
        }
    }
    for (r, s1, s2) in instances {
        let big = r * s1 * s2;
        let v1 = random_unit(rng, big);
        let v2 = random_unit(rng, big);
        for ell in [0, rng.gen_range(0..big as i64), 1] {
            let params = KKParams::new(v1, v2, ell, factor(r), factor(s1), factor(s2)).map_err(es)?;
            let brute = kk_brute(&params, 4).map_err(es)?;
            let fact = kk_factored(&params, 4).map_err(es)?;
            out.error((brute - fact).norm());
        }
    }
    Ok(out)
}

fn expsums_deligne(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(120, 500);
    let mut out = Outcome::new(format!("every prime p <= {hi}, every unit v, k = 2, 3, 4"));
    for p in primes_up_to(hi) {
        let f = factor(p);
        for k in 2..=4u32 {
            let kl = hyper_kloosterman_all(p, k).map_err(es)?;
            let tk = tk_table(&f, k);
            for v in 1..p as usize {
                out.bound(kl[v].norm(), k as f64);
                out.bound(tk[v].norm(), k as f64 + 1.0);
            }
            if p <= 100 {
                let v = random_unit(rng, p);
                let brute = t_k_brute(v, &f, k).map_err(es)?;
                out.bound(brute.value.norm(), k as f64 + 1.0);
            }
        }
    }
    Ok(out)
}

fn expsums_kk_prime(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(50, 200);
    let per = ctx.scale.pick(3, 6);
    let mut out = Outcome::new(format!("every prime 3 <= p <= {hi}, {per} generic and 2 special (v1, v2, l)"));
    let mut c0: f64 = 0.0;
    for p in primes_up_to(hi).into_iter().filter(|&p| p >= 3) {
        let pf = factor(p);
        let one = Factored::one();
        let mut triples = Vec::new();
        for _ in 0..per {
            let v1 = random_unit(rng, p);
            let v2 = random_unit(rng, p);
            let ell = rng.gen_range(0..p as i64);
            if (v1 - v2).rem_euclid(p as i64) == 0 && ell == 0 {
                continue;
            }
            triples.push((v1, v2, ell, false));
        }
        let v = random_unit(rng, p);
        triples.push((v, v, 0, true));
        triples.push((v, v + p as i64, p as i64, true));
        for (v1, v2, ell, special) in triples {
            let params = KKParams::new(v1, v2, ell, pf.clone(), one.clone(), one.clone()).map_err(es)?;
            let value = kk_brute(&params, 4).map_err(es)?.norm();
            if special {
                out.bound(value, (p as f64).sqrt());
            } else {
                c0 = c0.max(value);
                out.bound(value, 20.0);
            }
        }
    }
    out.note(format!("observed C0 = {c0:.6}"));
    Ok(out)
}

fn expsums_reality(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(80, 300);
    let mut out = Outcome::new(format!("T_2, T_4 tables for squarefree q <= {hi}; K_4 diagonal on 40 (v, r, s)"));
    for q in squarefree_up_to(2, hi) {
        let f = factor(q);
        for k in [2, 4] {
            for t in tk_table(&f, k) {
                out.error(t.im.abs() / (1.0 + t.norm()));
            }
        }
    }
    let mut n = 0;
    while n < ctx.scale.pick(15, 40) {
        let r = random_squarefree(rng, 1, 40);
        let s = random_squarefree(rng, 1, 40);
        if gcd(r.value(), s.value()) != 1 {
            continue;
        }
        n += 1;
        let v = random_unit(rng, r.value() * s.value());
        let k = kk_diagonal(v, &r, &s).map_err(es)?;
        out.error(k.im.abs());
        out.error((-k.re).max(0.0));
    }
    Ok(out)
}

fn expsums_e_pi(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let moduli = ctx.scale.pick(8, 40);
    let mut out = Outcome::new(format!("{moduli} random squarefree q <= 300, 6 m each, both providers; worst is discrepancy / (1e-6 q)"));
    for provider in ctx.providers() {
        for _ in 0..moduli {
            let q = random_squarefree(rng, 3, 300);
            if gcd(q.value(), provider.conductor()) != 1 {
                continue;
            }
            let qv = q.value() as i64;
            for m in [1, 0, rng.gen_range(0..qv), rng.gen_range(0..qv), random_unit(rng, q.value()), -1] {
                let direct = e_pi_transform_character_side(m, &q, provider).map_err(es)?;
                let formula = e_pi_transform_formula(m, &q, provider).map_err(es)?;
                out.error((direct - formula).norm() / (1e-6 * q.value() as f64));
            }
        }
    }
    Ok(out)
}

fn expsums_kk_diagonal(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let cases = ctx.scale.pick(20, 80);
    let mut out = Outcome::new(format!("{cases} random coprime squarefree (r, s) <= 60, unit and non-unit v"));
    let mut n = 0;
    while n < cases {
        let r = random_squarefree(rng, 1, 60);
        let s = random_squarefree(rng, 1, 60);
        if gcd(r.value(), s.value()) != 1 {
            continue;
        }
        n += 1;
        let q = r.value() * s.value();
        for v in [random_unit(rng, q), rng.gen_range(0..q as i64)] {
            let k = kk_diagonal(v, &r, &s).map_err(es)?;
            let closed = kk_diagonal_closed_form(v, &r, &s);
            out.error((k.re - closed).abs() / (1.0 + closed));
            out.bound(k.norm(), (r.value() as f64).sqrt() * s.value() as f64 + 1e-9);
        }
    }
    Ok(out)
}

fn aut_lambda_mult(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("1000 random coprime pairs per provider, mn within the coefficient table");
    for provider in ctx.providers() {
        let limit = provider.coverage().min(200_000) as usize;
        let table = provider.lambda_table(limit).map_err(es)?;
        out.error((table[1] - Complex64::new(1.0, 0.0)).norm());
        let mut done = 0;
        while done < 1000 {
            let m = rng.gen_range(2..=(limit as u64 / 2));
            let n = rng.gen_range(2..=(limit as u64 / m).max(2));
            if m * n > limit as u64 || gcd(m, n) != 1 {
                continue;
            }
            done += 1;
            let lhs = provider.lambda_at(m * n).map_err(es)?;
            let rhs = provider.lambda_at(m).map_err(es)? * provider.lambda_at(n).map_err(es)?;
            out.error((lhs - rhs).norm() / (1.0 + lhs.norm()));
            out.error((table[(m * n) as usize] - lhs).norm() / (1.0 + lhs.norm()));
        }
    }
    Ok(out)
}

fn aut_newton(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("both providers, unramified p <= 100, k <= 6");
    for provider in ctx.providers() {
        let ramified = provider.ramified_primes();
        for p in primes_up_to(100).into_iter().filter(|p| !ramified.contains(p)) {
            let lambdas: Vec<Complex64> = (0..=6).map(|e| provider.lambda_prime_power(p, e)).collect::<Result<_, _>>().map_err(es)?;
            let sums = power_sums_from_lambdas(&lambdas);
            for l in 1..=6u32 {
                let direct = provider.power_sum(p, l).map_err(es)?;
                out.error((sums[l as usize] - direct).norm() / (1.0 + direct.norm()));
            }
            let back = lambdas_from_power_sums(&sums);
            for k in 0..=6 {
                out.error((back[k] - lambdas[k]).norm() / (1.0 + lambdas[k].norm()));
            }
        }
    }
    Ok(out)
}

fn aut_closure(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let extra = ctx.scale.pick(200, 2000);
    let mut out = Outcome::new(format!("provider Satake data for p <= 10^4, plus {extra} random symmetric-cube and Rankin fixtures"));
    for provider in ctx.providers() {
        for data in provider.prime_data().iter().filter(|d| d.prime <= 10_000) {
            if let Some(s) = &data.satake {
                out.holds(s.check_closure().is_ok());
            }
        }
    }
    for _ in 0..extra {
        let p = primes_up_to(1000)[rng.gen_range(0..168)];
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        out.holds(SatakeLocal::sym3(p, a).check_closure().is_ok());
        out.holds(SatakeLocal::rankin(p, a, b).check_closure().is_ok());
    }
    Ok(out)
}

fn aut_envelope(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(500, 5000);
    let mut out = Outcome::new(format!("both providers, unramified p <= {hi}, l <= 6"));
    for provider in ctx.providers() {
        let ramified = provider.ramified_primes();
        let top = hi.min(provider.coverage());
        for p in primes_up_to(top).into_iter().filter(|p| !ramified.contains(p)) {
            let pf = p as f64;
            for l in 1..=6u32 {
                let a = provider.power_sum(p, l).map_err(es)?;
                let lf = l as f64;
                out.bound(a.norm(), 4.0 * pf.powf(lf / 2.0 - lf / 11.0) * (1.0 + 1e-6));
            }
        }
    }
    Ok(out)
}

fn aut_exterior(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let cases = ctx.scale.pick(500, 5000);
    let mut out = Outcome::new(format!("{cases} fixtures {{p^t, p^-t, p^s, p^-s}} with 0 < s <= t < 1/2"));
    let primes = primes_up_to(200);
    for _ in 0..cases {
        let p = primes[rng.gen_range(0..primes.len())];
        let t: f64 = rng.gen_range(1e-3..0.5);
        let s: f64 = rng.gen_range(1e-3..=t);
        let pf = p as f64;
        let c = |x: f64| Complex64::new(x, 0.0);
        let loc = SatakeLocal::new(p, [c(pf.powf(t)), c(pf.powf(-t)), c(pf.powf(s)), c(pf.powf(-s))]);
        let cls = loc.classify().map_err(es)?;
        out.holds(cls.tag == SatakeTag::C);
        let bound = pf.powf(s + t) + pf.powf(t - s) + pf.powf(s - t) + pf.powf(-s - t) - 2.0;
        let v = loc.exterior_square().norm();
        out.bound(bound, v);
    }
    Ok(out)
}

fn sym3_coefficients(ctx: &Context, len: usize) -> Result<CoefficientTable, String> {
    CoefficientTable::new(ctx.sym3(), len).map_err(es)
}

fn lfun_afe_stability(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(15, 50);
    let mut out = Outcome::new(format!("symmetric cube: squarefree 3 <= q <= {hi}; Rankin: q whose lengths fit its table"));
    let base = AfeConfig::default();
    let doubled = AfeConfig::with_split(2.0);
    let mut skipped = Vec::new();
    for provider in ctx.providers() {
        let qs: Vec<u64> = squarefree_up_to(3, hi).into_iter().filter(|&q| gcd(q, provider.conductor()) == 1).collect();
        let mut need = 1;
        for &q in &qs {
            for c in [&base, &doubled] {
                let (a, b) = c.lengths(q, provider).map_err(es)?;
                need = need.max(a).max(b);
            }
        }
        let limit = need.min(provider.coverage() as usize);
        let coeffs = if std::ptr::eq(provider, ctx.sym3()) { sym3_coefficients(ctx, limit)? } else { CoefficientTable::new(provider, limit).map_err(es)? };
        for q in qs {
            let group = CharacterGroup::from_modulus(q).map_err(es)?;
            let a = lvalues_for_modulus(provider, &group, &base, &coeffs);
            let b = lvalues_for_modulus(provider, &group, &doubled, &coeffs);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    for (x, y) in a.iter().zip(&b) {
                        out.error((x.value - y.value).norm() / (1.0 + x.value.norm()));
                    }
                }
                (Err(LfunError::Coefficients { .. }), _) | (_, Err(LfunError::Coefficients { .. })) => skipped.push((provider.name().to_string(), q)),
                (Err(e), _) | (_, Err(e)) => return Err(es(e)),
            }
        }
    }
    if !skipped.is_empty() {
        out.note(format!("beyond coefficient coverage: {skipped:?}"));
    }
    Ok(out)
}

fn lfun_root_numbers(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(120, 500);
    let mut out = Outcome::new(format!("both providers, every primitive chi, squarefree q <= {hi} coprime to the conductor"));
    for q in squarefree_up_to(3, hi) {
        let group = CharacterGroup::from_modulus(q).map_err(es)?;
        for provider in ctx.providers() {
            if gcd(q, provider.conductor()) != 1 {
                continue;
            }
            for chi in group.primitive_characters() {
                let eps = root_number(provider, &chi).map_err(es)?;
                out.error((eps.norm() - 1.0).abs());
            }
        }
    }
    Ok(out)
}

fn lfun_pieces(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let (sets, size, hi) = ctx.scale.pick((1, 3, 40), (2, 10, 100));
    let mut out = Outcome::new(format!("{sets} random sets of {size} squarefree moduli <= {hi}, every band, both selectors"));
    let provider = ctx.sym3();
    let config = AfeConfig::default();
    let window = SmoothWindow::partition();
    for _ in 0..sets {
        let mut chosen = BTreeSet::new();
        while chosen.len() < size {
            chosen.insert(random_squarefree(rng, 3, hi).value());
        }
        let moduli: Vec<Factored> = chosen.iter().map(|&q| factor(q)).collect();
        let (mut len_f, mut len_d) = (1, 1);
        for q in &chosen {
            let (a, b) = config.lengths(*q, provider).map_err(es)?;
            len_f = len_f.max(a);
            len_d = len_d.max(b);
        }
        let coeffs = sym3_coefficients(ctx, len_f.max(len_d))?;
        for sign in [1, -1] {
            for band in band_scales(len_f, &window) {
                let a = forward_piece(provider, &coeffs, &moduli, band, sign, &window, &config).map_err(es)?;
                let b = forward_piece_direct(provider, &coeffs, &moduli, band, sign, &window, &config).map_err(es)?;
                out.error((a.value - b).norm() / (1.0 + b.norm()));
            }
            for band in band_scales(len_d, &window) {
                let a = dual_piece(provider, &coeffs, &moduli, band, sign, &window, &config).map_err(es)?;
                let b = dual_piece_direct(provider, &coeffs, &moduli, band, sign, &window, &config).map_err(es)?;
                out.error((a.value - b).norm() / (1.0 + b.norm()));
            }
        }
    }
    Ok(out)
}

fn lfun_conjugate(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(40, 100);
    let mut out = Outcome::new(format!("symmetric cube, every primitive chi, squarefree q <= {hi}"));
    let provider = ctx.sym3();
    let config = AfeConfig::default();
    let need = config.lengths(hi, provider).map_err(es)?;
    let coeffs = sym3_coefficients(ctx, need.0.max(need.1))?;
    for q in squarefree_up_to(3, hi) {
        let group = CharacterGroup::from_modulus(q).map_err(es)?;
        let rows = lvalues_for_modulus(provider, &group, &config, &coeffs).map_err(es)?;
        for row in &rows {
            let conj_id = group.conj_id(row.chi_id);
            let partner = rows.iter().find(|r| r.chi_id == conj_id).ok_or("conjugate missing")?;
            out.error((partner.value - row.value.conj()).norm());
        }
    }
    Ok(out)
}

fn lfun_partition(_ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let report = partition_check(&SmoothWindow::partition());
    let mut out = Outcome::new(format!("{} points on [1, 10^6]", report.samples));
    out.error(report.max_deviation);
    out.cases = report.samples;
    out.note(format!("worst at x = {}", report.worst_x));
    Ok(out)
}

fn moduli_c_mult(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let pairs = ctx.scale.pick(2000, 20_000);
    let mut out = Outcome::new(format!("{pairs} random coprime (m, n) <= 10^4"));
    let mut done = 0;
    while done < pairs {
        let m = rng.gen_range(1..=10_000u64);
        let n = rng.gen_range(1..=10_000u64);
        if gcd(m, n) != 1 {
            continue;
        }
        done += 1;
        let c = |x: u64| mobius_phi_convolution(&factor(x));
        out.holds(c(m * n) == c(m) * c(n));
    }
    Ok(out)
}

fn moduli_revalidate(_ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("desk, singleton-15 and pair-15-21 profiles");
    let mut profiles = vec![("desk", ModuliProfile::desk())];
    profiles.extend(ModuliProfile::toy_profiles());
    let mut sizes = Vec::new();
    for (name, profile) in profiles {
        let set = build_moduli(&profile).map_err(es)?;
        out.holds(set.validate().is_ok());
        for m in &set.members {
            let f = factor(m.q);
            out.holds(f.is_squarefree() && gcd(m.q, profile.f * profile.conductor) == 1);
        }
        sizes.push(format!("{name}: {}", set.len()));
    }
    out.note(sizes.join(", "));
    Ok(out)
}

fn moduli_reduction(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let n_max = ctx.scale.pick(20_000, 100_000);
    let mut out = Outcome::new(format!("symmetric cube n <= {n_max}; Rankin n <= its coverage"));
    let sym = reduction_identity_scan(ctx.sym3(), n_max, PrimeWindow::DEFAULT).map_err(es)?;
    out.error(sym.max_residual);
    let rankin = ctx.rankin();
    let rn = rankin.coverage().min(n_max);
    let rk = reduction_identity_scan(rankin, rn, PrimeWindow::DEFAULT).map_err(es)?;
    out.error(rk.max_residual);
    out.cases = (n_max + rn) as usize;
    out.note(format!("worst n: {} and {}", sym.worst_n, rk.worst_n));
    Ok(out)
}

fn moduli_binomial(_ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("every n <= 200, k <= n/2");
    for n in 1..=200 {
        for k in 0..=n / 2 {
            let r = binomial_entropy_bound(n, k).map_err(es)?;
            out.holds(r.holds);
        }
    }
    Ok(out)
}

fn moduli_classify(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(20_000, 200_000);
    let mut out = Outcome::new(format!("every n <= {hi}, window [5, 200], random thresholds"));
    let window = PrimeWindow::DEFAULT;
    let mut tally = [0usize; 3];
    for n in 1..=hi {
        let f = factor(n);
        let u = rng.gen_range(1..=1000u64);
        let has_window = f.primes().any(|p| window.contains(p));
        let smooth: u64 = f.factors().iter().filter(|&&(p, _)| p < window.lo).map(|&(p, e)| p.pow(e)).product();
        let expected = if has_window {
            SmoothClass::WindowPrime
        } else if smooth > u {
            SmoothClass::HeavySmooth
        } else {
            SmoothClass::Exceptional
        };
        let got = classify_smooth_rough(&f, window.lo, window.hi, u);
        tally[got as usize] += 1;
        out.holds(got == expected);
    }
    out.note(format!("window-prime {}, heavy-smooth {}, exceptional {}", tally[0], tally[1], tally[2]));
    Ok(out)
}

fn moduli_c_brute(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let hi = ctx.scale.pick(2000, 10_000);
    let mut out = Outcome::new(format!("every n <= {hi}"));
    for n in 1..=hi {
        let f = factor(n);
        out.holds(mobius_phi_convolution(&f) == mobius_phi_brute(&f));
    }
    Ok(out)
}

fn csv_bytes(report: &crate::census::CensusReport) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).map_err(es)?;
    Ok(buf)
}

fn census_determinism(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("pair-15-21 profile: two fresh runs, a sharded run and its resume");
    let provider = ctx.sym3();
    let profile = ModuliProfile::pair_15_21();
    let a = csv_bytes(&run_census(provider, &profile, Parity::Both, 1).map_err(es)?)?;
    let b = csv_bytes(&run_census(provider, &profile, Parity::Both, 1).map_err(es)?)?;
    let dir = tempfile::tempdir().map_err(es)?;
    let options = CensusOptions { run_dir: Some(dir.path().to_path_buf()), ..Default::default() };
    let first = run_census_with(provider, &profile, Parity::Both, 1, &options).map_err(es)?;
    let resumed = run_census_with(provider, &profile, Parity::Both, 1, &options).map_err(es)?;
    let c = csv_bytes(&first)?;
    let d = csv_bytes(&resumed)?;
    out.holds(a == b);
    out.holds(a == c);
    out.holds(a == d);
    out.holds(resumed.shards_reused == resumed.moduli.len());
    out.note(format!("{} bytes, {} shards reused", a.len(), resumed.shards_reused));
    Ok(out)
}

fn census_parity(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("pair-15-21 profile");
    let provider = ctx.sym3();
    let profile = ModuliProfile::pair_15_21();
    let key = |r: &crate::census::CensusRow| (r.q, r.chi_id);
    let both = run_census(provider, &profile, Parity::Both, 1).map_err(es)?;
    let even = run_census(provider, &profile, Parity::Even, 1).map_err(es)?;
    let odd = run_census(provider, &profile, Parity::Odd, 1).map_err(es)?;
    let all: BTreeSet<_> = both.rows.iter().map(key).collect();
    let e: BTreeSet<_> = even.rows.iter().map(key).collect();
    let o: BTreeSet<_> = odd.rows.iter().map(key).collect();
    out.holds(e.is_disjoint(&o));
    out.holds(e.union(&o).cloned().collect::<BTreeSet<_>>() == all);
    out.holds(all.len() == both.rows.len());
    out.holds(even.rows.iter().all(|r| r.parity == 1) && odd.rows.iter().all(|r| r.parity == -1));
    Ok(out)
}

fn census_mean(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("pair-15-21 profile, each parity filter");
    let provider = ctx.sym3();
    let profile = ModuliProfile::pair_15_21();
    for parity in [Parity::Both, Parity::Even, Parity::Odd] {
        let report = run_census(provider, &profile, parity, 1).map_err(es)?;
        out.error((report.mean_value - mean_value(&report)).norm());
        let by_hand: Complex64 = report
            .rows
            .iter()
            .filter(|r| r.status != crate::census::RowStatus::Skipped)
            .map(|r| if parity.selector() == -1 { r.value * r.parity as f64 } else { r.value })
            .sum();
        out.error((report.mean_value - by_hand).norm());
    }
    Ok(out)
}

fn census_pipeline(ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("shipped toy profiles, both selectors");
    let mut notes = Vec::new();
    for (name, profile) in ModuliProfile::toy_profiles() {
        let report = pipeline_shape_check(ctx.sym3(), &profile).map_err(es)?;
        for s in &report.selectors {
            out.error(s.relative_error);
            notes.push(format!("{name} sign {:+}: {:.2e}", s.sign, s.relative_error));
        }
    }
    out.note(notes.join("; "));
    Ok(out)
}

fn verify_coverage(_ctx: &Context, _rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut out = Outcome::new("static registry");
    let mut missing = Vec::new();
    for (module, stated, covered) in coverage() {
        out.holds(stated == covered);
        if stated != covered {
            missing.push(module);
        }
    }
    let total: usize = INVARIANT_COUNTS.iter().map(|c| c.1).sum();
    out.note(if missing.is_empty() { format!("{total} invariants covered") } else { format!("uncovered in {missing:?}") });
    Ok(out)
}
