use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use wb_core::hecke::*;
use wb_core::sym::*;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `S_k` for `0 <= k <= n` or `T_m` for `m <= 2`.
fn generator(n: usize, q: u8, which: (bool, usize)) -> HeckeFunction {
    let (is_s, k) = which;
    if is_s {
        HeckeFunction::s(n, q, k.min(n) as i64)
    } else {
        HeckeFunction::t(n, q, k.min(2) as i64)
    }
}

fn arb_generator() -> impl Strategy<Value = (bool, usize)> {
    (any::<bool>(), 0usize..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn satake_is_multiplicative(n in 1usize..4, q in prop::sample::select(vec![2u8, 3]), a in arb_generator(), b in arb_generator()) {
        let (f, g) = (generator(n, q, a), generator(n, q, b));
        let lhs = f.convolve(&g).unwrap().satake().unwrap();
        let rhs = f.satake().unwrap().mul(&g.satake().unwrap()).reduce_square(q);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn convolution_is_associative_and_commutative(n in 1usize..3, a in arb_generator(), b in arb_generator(), c in arb_generator()) {
        let (f, g, h) = (generator(n, 3, a), generator(n, 3, b), generator(n, 3, c));
        prop_assert_eq!(f.convolve(&g).unwrap(), g.convolve(&f).unwrap());
        prop_assert_eq!(f.convolve(&g).unwrap().convolve(&h).unwrap(), f.convolve(&g.convolve(&h).unwrap()).unwrap());
    }

    #[test]
    fn satake_is_symmetric_and_graded(n in 1usize..4, m in prop::collection::vec(0i64..3, 1..3), k in -1i64..2) {
        let total: i64 = m.iter().sum();
        prop_assume!(total <= 3);
        let f = HeckeFunction::f_of_m(n, 2, &m).unwrap().twist(k);
        let s = f.satake().unwrap();
        prop_assert!(s.is_symmetric());
        prop_assert!(s.is_homogeneous(total + n as i64 * k));
    }
}

/// Rewrite `f(m)` as a combination of convolution monomials in the `S_k` by
/// reading off the elementary-basis expansion of its Satake transform, then
/// rebuild it by convolution alone.
fn generated_by_minuscules(n: usize, q: u8, m: &[i64]) -> bool {
    let f = HeckeFunction::f_of_m(n, q, m).unwrap();
    let expansion = f.satake().unwrap().in_elementary_basis().unwrap();
    let mut rebuilt = HeckeFunction::zero(n, q);
    for (exps, c) in expansion {
        // prod S_k^(a_k) has transform u^(sum a_k k (n - k)) prod e_k^(a_k)
        let weight: i64 = exps.iter().enumerate().map(|(i, &a)| a as i64 * ((i + 1) * (n - i - 1)) as i64).sum();
        let coeff = c.shift(-weight).reduce_square(q);
        if coeff.terms().keys().any(|&e| e != 0) {
            return false;
        }
        let mut term = HeckeFunction::unit(n, q);
        for (i, &a) in exps.iter().enumerate() {
            for _ in 0..a {
                term = term.convolve(&HeckeFunction::s(n, q, i as i64 + 1)).unwrap();
            }
        }
        rebuilt = rebuilt.add(&term.scale(&coeff.coeff(0)));
    }
    rebuilt == f
}

#[test]
fn minuscule_functions_generate() {
    for n in 1..=3usize {
        for m in [vec![1], vec![2], vec![3], vec![1, 1], vec![2, 1], vec![1, 1, 1]] {
            assert!(generated_by_minuscules(n, 3, &m), "n {n} m {m:?}");
        }
    }
}

#[test]
fn satake_closed_forms() {
    for q in [2u8, 3] {
        for n in 1..=3usize {
            for k in 0..=n {
                assert_eq!(HeckeFunction::s(n, q, k as i64).satake().unwrap(), satake_s_closed(q, n, k));
            }
            for m in 0..=3usize {
                assert_eq!(HeckeFunction::t(n, q, m as i64).satake().unwrap(), satake_t_closed(q, n, m));
            }
        }
    }
}

#[test]
fn partial_satake_matches_closed_form() {
    for (n0, n1) in [(1usize, 1usize), (1, 2)] {
        for m in [vec![1], vec![2], vec![3], vec![1, 1], vec![2, 1]] {
            let f = HeckeFunction::f_of_m(n0 + n1, 3, &m).unwrap();
            assert_eq!(f.satake_levi(&[n0, n1]).unwrap(), partial_satake_closed(3, n0, n1, &m, 0).unwrap(), "{n0}+{n1} {m:?}");
        }
    }
}

#[test]
fn twist_shifts_support() {
    let t2 = HeckeFunction::t(2, 3, 2);
    let twisted = HeckeFunction::pi_power(2, 3, 1).convolve(&t2).unwrap();
    assert_eq!(twisted.coeffs().keys().cloned().collect::<Vec<_>>(), vec![vec![2, 2], vec![3, 1]]);
    assert_eq!(twisted, t2.twist(1));
    assert_eq!(HeckeFunction::s(2, 3, -2), HeckeFunction::pi_power(2, 3, -1));
    assert_eq!(HeckeFunction::s(2, 3, -1).coeffs().keys().next().unwrap(), &vec![0, -1]);
}

#[test]
fn symmetric_function_identities() {
    let e = |k| elementary(2, k);
    assert_eq!(complete(2, 1), e(1));
    assert_eq!(complete(2, 2), e(1).mul(&e(1)).sub(&e(2)));
    for n in 1..=4 {
        assert!(!check_complete_elementary_identity(n, 0));
        for k in 1..=4 {
            assert!(check_complete_elementary_identity(n, k));
        }
    }
    assert_eq!(dimension_census(2, 2), (2, 2));
    assert_eq!(dimension_census(3, 0), (1, 1));
    assert_eq!(dimension_census(3, 3), (3, 3));
}

#[test]
fn rank_one_and_small_values() {
    let t1 = HeckeFunction::t(2, 5, 1);
    let c = t1.convolve(&t1).unwrap();
    assert_eq!(c.at(&[1, 1]), rat(6));
    assert_eq!(c.at(&[2, 0]), rat(1));
    let f = HeckeFunction::t(1, 3, 2);
    let mut expect = SymLaurent::zero(1);
    expect.add_term(vec![2], wb_core::sym::Laurent::one());
    assert_eq!(f.satake().unwrap(), expect);
}
