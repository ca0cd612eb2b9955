use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wb_core::etale::FixedAlgebra;
use wb_core::field::Field;
use wb_core::hecke::HeckeFunction;
use wb_core::lattice::Lattice;
use wb_core::matrix::Matrix;
use wb_core::orbital::*;
use wb_core::pairs::*;
use wb_core::quad::{Kind, Quad};
use wb_core::sym::Laurent;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

struct Setup {
    field: Field,
    unram: Arc<Quad>,
    ram: Arc<Quad>,
    split: Arc<Quad>,
}

fn setup() -> Setup {
    let field = Field::new(3, 30).unwrap();
    Setup {
        field,
        unram: Quad::standard(field, Kind::Unramified).unwrap(),
        ram: Quad::standard(field, Kind::Ramified).unwrap(),
        split: Quad::standard(field, Kind::Split).unwrap(),
    }
}

fn fixed(a: &Arc<Quad>, b: &Arc<Quad>) -> Arc<Quad> {
    FixedAlgebra::of_pair(a, b).unwrap().alg
}

fn matched(beta: &EmbeddingPair) -> EmbeddingPair {
    let e3 = fixed(&beta.ea, &beta.eb);
    match_alpha(&beta.invariant().unwrap().delta, &e3).unwrap()
}

#[test]
fn abs_character_examples() {
    let s = setup();
    let f = s.field;
    let id = Matrix::identity(&f, 2);
    assert_eq!(abs_character(&id, &id).unwrap(), 0);
    assert_eq!(abs_character(&Matrix::scalar(&f, 2, &f.pi_pow(1)), &id).unwrap(), -2);
}

#[test]
fn transfer_factor_of_span_is_power_of_q() {
    // Λ_3 = O_E3 Λ_0^+ gives a = 0, so Ω = Q^b with b = [Λ_3 : O_E3 Λ_0^-]
    let s = setup();
    let e3 = fixed(&s.unram, &s.unram);
    for seed in 0..4 {
        let (alpha, _) = random_pair_spread(&s.split, &e3, 1, seed, 1).unwrap();
        let ctx = TransferContext::new(&alpha).unwrap();
        let l0 = stable_hull(&alpha.a, &Lattice::standard(&s.field, 2)).unwrap();
        let (r1, r2) = alpha.ea.roots().unwrap();
        let f = s.field;
        let plus = alpha.a.sub(&Matrix::scalar(&f, 2, r2)).scale(&r1.sub(r2).inv().unwrap());
        let minus = Matrix::identity(&f, 2).sub(&plus);
        let span = |e: &Matrix<_>| {
            let part = e.mul(l0.basis());
            Lattice::from_generators(&part.hstack(&alpha.b.mul(&part))).unwrap()
        };
        let l3 = span(&plus);
        let b = l3.index(&span(&minus));
        assert_eq!(ctx.transfer_factor(&l0, &l3).unwrap(), Laurent::monomial(rat(1), b));
    }
}

#[test]
fn transfer_factor_rejects_unstable_lattices() {
    let s = setup();
    let e3 = fixed(&s.unram, &s.unram);
    let (alpha, _) = random_pair_spread(&s.split, &e3, 1, 3, 2).unwrap();
    let ctx = TransferContext::new(&alpha).unwrap();
    let std = Lattice::standard(&s.field, 2);
    let candidates = std.sublattices_of_index(1).unwrap();
    let unstable = candidates.iter().find(|l| !l.contains_vectors(&alpha.a.mul(l.basis())).unwrap());
    if let Some(l) = unstable {
        let l3 = stable_hull(&alpha.b, &std).unwrap();
        assert_eq!(ctx.transfer_factor(l, &l3), Err(wb_core::Error::NotStable));
    }
}

#[test]
fn transfer_factor_transformation_law() {
    let s = setup();
    for (e1, e2) in [(&s.unram, &s.unram), (&s.unram, &s.ram)] {
        let e3 = fixed(e1, e2);
        for seed in 0..6 {
            let n = 1 + (seed % 2) as usize;
            let (alpha, _) = random_pair_spread(&s.split, &e3, n, seed, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let (lhs, rhs) = transfer_law_sample(&alpha, &mut rng).unwrap();
            assert_eq!(lhs, rhs, "seed {seed}");
        }
    }
}

#[test]
fn twist_invariance() {
    let s = setup();
    let win = Windows::default();
    for seed in 0..3 {
        let (beta, _) = random_pair_spread(&s.unram, &s.unram, 1, seed, 2).unwrap();
        let alpha = matched(&beta);
        for f in [HeckeFunction::unit(2, 3), HeckeFunction::t(2, 3, 1)] {
            let b = orbital_beta(&beta, &f, &win).unwrap().0;
            let a = orbital_alpha(&alpha, &f, &win).unwrap().value;
            for k in [-1, 1, 2] {
                let g = HeckeFunction::pi_power(2, 3, k).convolve(&f).unwrap();
                assert_eq!(orbital_beta(&beta, &g, &win).unwrap().0, b);
                assert_eq!(orbital_alpha(&alpha, &g, &win).unwrap().value, a);
            }
        }
    }
}

#[test]
fn conjugation_invariance() {
    let s = setup();
    let win = Windows::default();
    let f = HeckeFunction::t(2, 3, 1);
    for seed in 0..3 {
        let (beta, _) = random_pair_spread(&s.unram, &s.ram, 1, seed, 1).unwrap();
        let alpha = matched(&beta);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 7);
        let (g, gi) = random_integral_unit(&s.field, 2, &mut rng);
        // a non-integral conjugator as well
        let d = Matrix::diagonal(&s.field, &[s.field.pi_pow(1), s.field.one()]);
        let di = Matrix::diagonal(&s.field, &[s.field.pi_pow(-1), s.field.one()]);
        let (h, hi) = (g.mul(&d), di.mul(&gi));
        let b = orbital_beta(&beta, &f, &win).unwrap().0;
        let a = orbital_alpha(&alpha, &f, &win).unwrap().value;
        for (x, xi) in [(&g, &gi), (&h, &hi)] {
            assert_eq!(orbital_beta(&beta.conjugate(x, xi), &f, &win).unwrap().0, b);
            assert_eq!(orbital_alpha(&alpha.conjugate(x, xi), &f, &win).unwrap().value, a);
        }
    }
}

#[test]
fn window_stability() {
    let s = setup();
    let (beta, _) = random_pair_spread(&s.unram, &s.unram, 1, 2, 2).unwrap();
    let alpha = matched(&beta);
    let f = HeckeFunction::t(2, 3, 2);
    let (b, wb) = orbital_beta(&beta, &f, &Windows::default()).unwrap();
    let a = orbital_alpha(&alpha, &f, &Windows::default()).unwrap();
    let wider = Windows { max: 12, floor: wb.max(a.window) + 4 };
    assert_eq!(orbital_beta(&beta, &f, &wider).unwrap().0, b);
    assert_eq!(orbital_alpha(&alpha, &f, &wider).unwrap().value, a.value);
}

#[test]
fn window_overflow_is_reported() {
    let s = setup();
    let (beta, _) = random_pair_spread(&s.unram, &s.unram, 1, 2, 2).unwrap();
    let r = orbital_beta(&beta, &HeckeFunction::t(2, 3, 2), &Windows::new(1));
    assert!(matches!(r, Err(wb_core::Error::WindowOverflow { .. })));
}

#[test]
fn empty_support_gives_zero() {
    let s = setup();
    let (beta, _) = random_pair(&s.unram, &s.unram, 1, 0).unwrap();
    let alpha = matched(&beta);
    let z = HeckeFunction::zero(2, 3);
    assert_eq!(orbital_alpha(&alpha, &z, &Windows::default()).unwrap().value, Laurent::zero());
    assert_eq!(orbital_beta(&beta, &z, &Windows::default()).unwrap().0, rat(0));
}

#[test]
fn rank_mismatch_is_rejected() {
    let s = setup();
    let (beta, _) = random_pair(&s.unram, &s.unram, 1, 0).unwrap();
    let r = orbital_beta(&beta, &HeckeFunction::unit(4, 3), &Windows::default());
    assert_eq!(r, Err(wb_core::Error::WrongDimension { expected: 2, found: 4 }));
}

#[test]
fn fundamental_lemma_rank_two_sample() {
    let s = setup();
    let win = Windows::default();
    for seed in 0..4 {
        let (beta, _) = random_pair_spread(&s.unram, &s.unram, 1, seed, 2).unwrap();
        let alpha = matched(&beta);
        for f in [HeckeFunction::unit(2, 3), HeckeFunction::t(2, 3, 1), HeckeFunction::t(2, 3, 2)] {
            let b = orbital_beta(&beta, &f, &win).unwrap().0;
            let a = orbital_alpha(&alpha, &f, &win).unwrap().value;
            assert_eq!(value_at_zero(&a), b, "seed {seed}");
        }
    }
}

#[test]
fn order_one_invariants_vanish_with_sign_minus() {
    let s = setup();
    let e3 = fixed(&s.unram, &s.unram);
    let win = Windows::default();
    let x = Laurent::monomial(rat(1), 1).sub(&Laurent::monomial(rat(1), -1));
    for seed in [1, 4, 11] {
        let (alpha, _) = random_pair_spread(&s.split, &e3, 1, seed, 2).unwrap();
        let v = orbital_alpha(&alpha, &HeckeFunction::unit(2, 3), &win).unwrap().value;
        assert_eq!(v, x, "seed {seed}");
        assert_eq!(value_at_zero(&v), rat(0));
        assert_eq!(functional_equation_probe(&v).unwrap().sign, -1);
        assert_eq!(vanishing_order(&v), Some(1));
    }
}

#[test]
fn order_bound_on_direct_sum() {
    let s = setup();
    let e3 = fixed(&s.unram, &s.unram);
    let win = Windows::default();
    let (a0, _) = random_pair_spread(&s.split, &e3, 1, 1, 2).unwrap();
    let (a1, _) = random_pair_spread(&s.split, &e3, 1, 4, 2).unwrap();
    let alpha = direct_sum(&a0, &a1).unwrap();
    let report = order_lower_bound_check(&alpha, &HeckeFunction::unit(4, 3), &[a0, a1], &win).unwrap();
    assert_eq!(report.estimate, 2);
    assert!(report.holds, "{report:?}");
}

#[test]
fn value_and_derivative_examples() {
    let v = Laurent::monomial(rat(1), 2).sub(&Laurent::monomial(rat(1), -2));
    assert_eq!(value_at_zero(&v), rat(0));
    assert_eq!(derivative_at_zero(&v), rat(2));
    assert_eq!(derivative_at_zero(&Laurent::int(5)), rat(0));
}

#[test]
fn functional_equation_examples() {
    let a = Laurent::monomial(rat(1), 1).sub(&Laurent::monomial(rat(1), -1));
    assert_eq!(functional_equation_probe(&a), Some(FunctionalEquation { sign: -1, r: rat(0) }));
    let b = Laurent::monomial(rat(1), 2).add(&Laurent::one());
    assert_eq!(functional_equation_probe(&b), Some(FunctionalEquation { sign: 1, r: rat(1) }));
    let c = Laurent::monomial(rat(1), 2).add(&Laurent::int(2));
    assert_eq!(functional_equation_probe(&c), None);
    assert_eq!(vanishing_order(&Laurent::zero()), None);
}

fn laurent_strategy() -> impl Strategy<Value = Laurent> {
    prop::collection::vec((-6i64..=6, -5i64..=5), 0..6).prop_map(|terms| {
        let mut v = Laurent::zero();
        for (k, c) in terms {
            v = v.add(&Laurent::monomial(rat(c), k));
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // d/ds Q^k at s = 0 is (k/2) log q; the oracle differentiates in Q and
    // uses dQ/ds = Q log q / 2
    #[test]
    fn derivative_matches_symbolic_oracle(v in laurent_strategy()) {
        let dq = v.derivative().eval(&rat(1));
        prop_assert_eq!(derivative_at_zero(&v), dq / rat(2));
    }

    #[test]
    fn vanishing_order_counts_factors_of_q_minus_one(v in laurent_strategy(), k in 0u32..4) {
        prop_assume!(!v.is_zero());
        let base = vanishing_order(&v).unwrap();
        let factor = Laurent::monomial(rat(1), 1).sub(&Laurent::one());
        let mut w = v.clone();
        for _ in 0..k {
            w = w.mul(&factor);
        }
        prop_assert_eq!(vanishing_order(&w), Some(base + k));
    }

    #[test]
    fn symmetric_polynomials_probe_with_sign(v in laurent_strategy(), r in -3i64..=3) {
        prop_assume!(!v.is_zero());
        let sym = v.add(&v.invert_variable()).shift(r);
        let anti = v.sub(&v.invert_variable()).shift(r);
        if !sym.is_zero() {
            prop_assert_eq!(functional_equation_probe(&sym).map(|fe| fe.sign), Some(1));
        }
        if !anti.is_zero() {
            prop_assert_eq!(functional_equation_probe(&anti).map(|fe| fe.sign), Some(-1));
        }
    }
}
