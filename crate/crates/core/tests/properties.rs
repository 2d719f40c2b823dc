use charsum_core::arith::{crt_combine, crt_split, factor, gcd, pow_mod, units, Residue};
use charsum_core::autcoeffs::{lambdas_from_power_sums, power_sums_from_lambdas, SatakeLocal};
use charsum_core::census::format_float;
use charsum_core::dirichlet::{primitive_char_sum, primitive_char_sum_divisor_side, CharacterGroup};
use charsum_core::expsums::{kk_brute, kk_factored, t_k_brute, t_k_factored, KKParams};
use charsum_core::lfun::ln_gamma;
use charsum_core::moduli::{binomial_entropy_bound, mobius_phi_brute, mobius_phi_convolution};
use charsum_core::Complex64;
use proptest::prelude::*;

fn squarefree(hi: u64) -> impl Strategy<Value = u64> {
    (1..=hi).prop_filter("squarefree", |&n| factor(n).is_squarefree())
}

fn coprime_squarefree(hi: u64) -> impl Strategy<Value = (u64, u64)> {
    (squarefree(hi), squarefree(hi)).prop_filter("coprime", |&(r, s)| gcd(r, s) == 1)
}

proptest! {
    #[test]
    fn factor_multiplies_back(n in 1u64..1_000_000_000_000) {
        let f = factor(n);
        prop_assert_eq!(f.factors().iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        prop_assert!(f.primes().all(charsum_core::arith::is_prime));
    }

    #[test]
    fn crt_round_trip((r, s) in (1u64..5000, 1u64..5000).prop_filter("coprime", |&(r, s)| gcd(r, s) == 1), x in any::<u64>()) {
        let x = Residue::from_u64(x, r * s).unwrap();
        let (a, b) = crt_split(x, r, s).unwrap();
        prop_assert_eq!(crt_combine(a, b).unwrap(), x);
    }

    #[test]
    fn unit_count_is_phi(q in 1u64..20_000) {
        let f = factor(q);
        let expected = if q == 1 { 1 } else { f.phi() as usize };
        prop_assert_eq!(units(&f).count(), expected);
    }

    #[test]
    fn characters_are_multiplicative(q in squarefree(3000), id in any::<prop::sample::Index>(), m in -10_000i64..10_000, n in -10_000i64..10_000) {
        let group = CharacterGroup::from_modulus(q).unwrap();
        let chi = group.character(id.index(group.order())).unwrap();
        prop_assert!((chi.eval(m * n) - chi.eval(m) * chi.eval(n)).norm() < 1e-9);
    }

    #[test]
    fn primitive_gauss_sums_have_norm_sqrt_q(q in squarefree(1000), id in any::<prop::sample::Index>()) {
        let group = CharacterGroup::from_modulus(q).unwrap();
        let primitive: Vec<_> = group.primitive_characters().collect();
        prop_assume!(!primitive.is_empty());
        let chi = &primitive[id.index(primitive.len())];
        prop_assert!((chi.gauss_sum().norm_sqr() - q as f64).abs() < 1e-8 * q as f64);
    }

    #[test]
    fn primitive_sum_matches_divisor_side(q in squarefree(3000), n in -100_000i64..100_000) {
        let f = factor(q);
        prop_assume!(gcd(n.unsigned_abs(), q) == 1);
        prop_assert_eq!(primitive_char_sum(&f, n).unwrap(), primitive_char_sum_divisor_side(&f, n));
    }

    #[test]
    fn tk_splits_over_coprime_moduli((r, s) in coprime_squarefree(80), m in 0i64..10_000, k in 2u32..=4) {
        let (rf, sf) = (factor(r), factor(s));
        let whole = t_k_brute(m, &rf.mul(&sf), k).unwrap().value;
        let mr = (m as u64 % s * pow_mod(r, k as u64, s) % s) as i64;
        let ms = (m as u64 % r * pow_mod(s, k as u64, r) % r) as i64;
        let split = t_k_brute(mr, &sf, k).unwrap().value * t_k_brute(ms, &rf, k).unwrap().value;
        prop_assert!((whole - split).norm() < 1e-8);
        prop_assert!((whole - t_k_factored(m, &rf, &sf, k).unwrap().value).norm() < 1e-8);
    }

    #[test]
    fn t4_is_real(q in squarefree(2000), m in 0i64..5000) {
        prop_assert!(t_k_brute(m, &factor(q), 4).unwrap().value.im.abs() < 1e-9);
    }

    #[test]
    fn kk_factored_matches_brute(
        (r, s1, s2) in (squarefree(20), squarefree(12), squarefree(12)).prop_filter("r coprime to s1 s2", |&(r, a, b)| gcd(r, a * b) == 1),
        i1 in any::<prop::sample::Index>(),
        i2 in any::<prop::sample::Index>(),
        ell in 0i64..500,
    ) {
        let q = factor(r * s1 * s2 / gcd(s1, s2));
        let unit = |i: prop::sample::Index| units(&q).nth(i.index(q.phi() as usize)).map_or(1, |u| u.value() as i64);
        let params = KKParams::new(unit(i1), unit(i2), ell, factor(r), factor(s1), factor(s2)).unwrap();
        prop_assert!((kk_brute(&params, 4).unwrap() - kk_factored(&params, 4).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn newton_round_trip(l1 in -2.0f64..2.0, l2 in -2.0f64..2.0) {
        let local = SatakeLocal::rankin(7, l1, l2);
        let lambdas = local.lambda_powers(6);
        let back = lambdas_from_power_sums(&power_sums_from_lambdas(&lambdas));
        for (a, b) in lambdas.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn sym3_satake_is_closed(lambda in -2.0f64..2.0) {
        prop_assert!(SatakeLocal::sym3(11, lambda).check_closure().is_ok());
    }

    #[test]
    fn ln_gamma_recurrence(re in 0.2f64..30.0, im in -30.0f64..30.0) {
        let z = Complex64::new(re, im);
        let lhs = (ln_gamma(z + 1.0) - ln_gamma(z) - z.ln()).exp();
        prop_assert!((lhs - 1.0).norm() < 1e-10);
    }

    #[test]
    fn c_is_multiplicative(m in 1u64..3000, n in 1u64..3000) {
        prop_assume!(gcd(m, n) == 1);
        let c = |x: u64| mobius_phi_convolution(&factor(x));
        prop_assert_eq!(c(m * n), c(m) * c(n));
        prop_assert_eq!(c(m), mobius_phi_brute(&factor(m)));
    }

    #[test]
    fn binomial_bound_holds(n in 1u64..=200, frac in 0.0f64..0.5) {
        let k = (n as f64 * frac) as u64;
        prop_assert!(binomial_entropy_bound(n, k).unwrap().holds);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }
}
