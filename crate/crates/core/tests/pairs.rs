use std::sync::Arc;

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wb_core::etale::{symmetry_check, FixedAlgebra};
use wb_core::field::{Fe, Field};
use wb_core::pairs::*;
use wb_core::quad::{Kind, Quad};
use wb_core::{Matrix, Ring};

fn field() -> Field {
    Field::new(3, 40).unwrap()
}

fn configuration(i: usize) -> (Arc<Quad>, Arc<Quad>) {
    let f = field();
    let u = Quad::standard(f, Kind::Unramified).unwrap();
    let r = Quad::standard(f, Kind::Ramified).unwrap();
    let s = Quad::standard(f, Kind::Split).unwrap();
    match i {
        0 => (u.clone(), u),
        1 => (u, r),
        2 => (r, Quad::standard(f, Kind::Unramified).unwrap()),
        3 => {
            let e3 = FixedAlgebra::of_pair(&u, &u).unwrap().alg;
            (s, e3)
        }
        _ => {
            let e3 = FixedAlgebra::of_pair(&u, &r).unwrap().alg;
            (s, e3)
        }
    }
}

fn centralizes(x: &Matrix<Fe>, p: &EmbeddingPair) -> bool {
    x.commutes_with(&p.a) && x.commutes_with(&p.b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariant_properties(conf in 0usize..5, seed in 0u64..10_000, n in 1usize..3) {
        let (ea, eb) = configuration(conf);
        let (p, _) = random_pair(&ea, &eb, n, seed).unwrap();
        // invariant() succeeding means the characteristic polynomial was a square
        let inv = p.invariant().unwrap();
        prop_assert!(inv.rs);
        prop_assert_eq!(inv.delta.degree(), n as isize);
        prop_assert!(inv.delta.is_monic());
        prop_assert!(symmetry_check(&inv.delta));
        let w = p.w();
        prop_assert!(centralizes(&w, &p));
        let c = inv.centralizer.clone().unwrap();
        prop_assert_eq!(c.basis.len(), n);
        for x in &c.basis {
            prop_assert!(centralizes(x, &p));
            prop_assert!(x.commutes_with(&w));
        }
        for g in c.gammas() {
            prop_assert!(centralizes(&g, &p));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let (g, gi) = random_integral_unit(&field(), 2 * n, &mut rng);
        prop_assert_eq!(p.conjugate(&g, &gi).invariant().unwrap().delta, inv.delta);
    }

    #[test]
    fn matching_round_trips(conf in 0usize..2, seed in 0u64..10_000) {
        let (ea, eb) = configuration(conf);
        let (p, _) = random_pair(&ea, &eb, 1, seed).unwrap();
        let inv = p.invariant().unwrap();
        let e3 = FixedAlgebra::of_fields(&ea, &eb).unwrap().alg;
        let alpha = match_alpha(&inv.delta, &e3).unwrap();
        let ia = alpha.invariant().unwrap();
        prop_assert_eq!(ia.delta, inv.delta);
        prop_assert!(ia.rs);
        // alpha_0 is the idempotent pair and alpha_3 satisfies its minimal polynomial
        let f = field();
        let e = &alpha.a;
        prop_assert_eq!(e.mul(e), e.clone());
        let z = &alpha.b;
        let mp = z.mul(z).sub(&z.scale(e3.tr())).add(&Matrix::scalar(&f, 2, e3.nm()));
        prop_assert!(mp.is_zero());
    }

    #[test]
    fn direct_sums(seed in 0u64..10_000) {
        let (ea, eb) = configuration(0);
        let (p0, _) = random_pair(&ea, &eb, 1, seed).unwrap();
        let (p1, _) = random_pair(&ea, &eb, 1, seed + 1).unwrap();
        let d0 = p0.invariant().unwrap().delta;
        let d1 = p1.invariant().unwrap().delta;
        let sum = direct_sum(&p0, &p1).unwrap();
        prop_assert_eq!(sum.n, 2);
        let inv = sum.invariant().unwrap();
        prop_assert_eq!(&inv.delta, &d0.mul(&d1));
        let res_nonzero = !d0.resultant(&d1).unwrap().norm().is_zero();
        prop_assert_eq!(inv.rs, res_nonzero);
    }
}

#[test]
fn w_of_identical_embeddings_is_scalar() {
    let f = field();
    let u = Quad::standard(f, Kind::Unramified).unwrap();
    let a = standard_embedding(&u, 1);
    let p = EmbeddingPair::new(&u, &u, a.clone(), a.clone()).unwrap();
    // z z + z' z' = tr^2 - 2 nm
    let expect = u.tr().mul(u.tr()).sub(&f.int(2).mul(u.nm()));
    assert_eq!(p.w(), Matrix::scalar(&f, 2, &expect));
    assert!(!p.invariant().unwrap().rs);
}

#[test]
fn w_of_block_sum_is_block_sum() {
    let (ea, eb) = configuration(1);
    let (p0, _) = random_pair(&ea, &eb, 1, 3).unwrap();
    let (p1, _) = random_pair(&ea, &eb, 1, 4).unwrap();
    assert_eq!(direct_sum(&p0, &p1).unwrap().w(), p0.w().block_diag(&p1.w()));
}

#[test]
fn constants_c_and_d() {
    let f = field();
    let u = Quad::standard(f, Kind::Unramified).unwrap();
    let r = Quad::standard(f, Kind::Ramified).unwrap();
    for (a, b, half) in [(&u, &u, 0), (&u, &r, -1)] {
        let fx = FixedAlgebra::of_fields(a, b).unwrap();
        assert_eq!(fx.d().half_abs().unwrap(), half);
        assert_eq!(fx.c().conj(), fx.t().neg());
        assert!(!fx.d().norm().is_zero());
    }
}

#[test]
fn split_centralizer_in_rank_four() {
    let (ea, eb) = configuration(0);
    let mut found = false;
    for seed in 0..20 {
        let (p0, _) = random_pair(&ea, &eb, 1, 2 * seed).unwrap();
        let (p1, _) = random_pair(&ea, &eb, 1, 2 * seed + 1).unwrap();
        let sum = direct_sum(&p0, &p1).unwrap();
        let inv = sum.invariant().unwrap();
        if !inv.rs {
            continue;
        }
        let c = inv.centralizer.unwrap();
        let es = c.idempotents();
        assert_eq!(es.len(), 2);
        let f = field();
        assert_eq!(es[0].add(&es[1]), Matrix::identity(&f, 4));
        for e in &es {
            assert_eq!(e.mul(e), e.clone());
            assert!(centralizes(e, &sum));
        }
        assert_eq!(c.gammas().len(), 2);
        found = true;
        break;
    }
    assert!(found);
}
