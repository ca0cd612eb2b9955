use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wb_core::etale::FixedAlgebra;
use wb_core::field::{Fe, Field};
use wb_core::hecke::HeckeFunction;
use wb_core::lattice::Lattice;
use wb_core::matrix::Matrix;
use wb_core::orbital::{orbital_beta, value_at_zero, TransferContext, Windows};
use wb_core::pairs::*;
use wb_core::quad::{Kind, Quad};
use wb_core::reduction::*;
use wb_core::Error;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn field() -> Field {
    Field::new(3, 30).unwrap()
}

fn algebras() -> (Arc<Quad>, Arc<Quad>, Arc<Quad>) {
    let f = field();
    (
        Quad::standard(f, Kind::Unramified).unwrap(),
        Quad::standard(f, Kind::Ramified).unwrap(),
        Quad::standard(f, Kind::Split).unwrap(),
    )
}

/// The four configurations: `(E_1, E_2)` with both unramified or the second
/// ramified, and the matching `(E_0, E_3)`.
fn configurations() -> Vec<(&'static str, Arc<Quad>, Arc<Quad>)> {
    let (u, r, s) = algebras();
    let e3i = FixedAlgebra::of_pair(&u, &u).unwrap().alg;
    let e3ii = FixedAlgebra::of_pair(&u, &r).unwrap().alg;
    vec![("beta-i", u.clone(), u.clone()), ("beta-ii", u, r), ("alpha-i", s.clone(), e3i), ("alpha-ii", s, e3ii)]
}

fn random_lattice(f: &Field, m: usize, rng: &mut ChaCha8Rng) -> Lattice<Fe> {
    let (g, _) = random_integral_unit(f, m, rng);
    let ks: Vec<Fe> = (0..m).map(|_| f.pi_pow((rng.next_u32() % 4) as i64 - 1)).collect();
    Lattice::from_generators(&g.mul(&Matrix::diagonal(f, &ks))).unwrap()
}

#[test]
fn fibration_round_trip() {
    let f = field();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = random_lattice(&f, 4, &mut rng);
        let (x0, x1, s) = fibrate(&x, 2);
        assert_eq!(rebuild(&x0, &x1, &s).unwrap(), x);
    }
}

#[test]
fn split_lattice_has_zero_lift() {
    let f = field();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = random_lattice(&f, 2, &mut rng);
    let b = random_lattice(&f, 2, &mut rng);
    let (x0, x1, s) = fibrate(&a.direct_sum(&b), 2);
    assert_eq!((x0, x1), (a, b));
    assert!(s.is_zero());
}

#[test]
fn fibered_inclusion_matches_containment() {
    let f = field();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    for _ in 0..30 {
        let x = random_lattice(&f, 4, &mut rng);
        let y = if rng.next_u32() % 2 == 0 { x.sum(&random_lattice(&f, 4, &mut rng)).unwrap() } else { random_lattice(&f, 4, &mut rng) };
        for (a, b) in [(&x, &y), (&y, &x)] {
            let direct = b.contains(a).unwrap();
            hits += direct as usize;
            assert_eq!(fibered_inclusion(a, b, 2).unwrap(), direct);
        }
    }
    assert!(hits > 10);
}

#[test]
fn fibration_of_split_chain_splits_steps() {
    let f = field();
    let std = Lattice::standard(&f, 2);
    let chain0 = [std.scale(2), std.scale(1), std.clone()];
    let chain1 = [std.scale(1), std.clone(), std.clone()];
    let chain: Vec<_> = chain0.iter().zip(&chain1).map(|(a, b)| a.direct_sum(b)).collect();
    let fc = fibration_map(&chain, 2);
    assert_eq!(fc.m0, vec![2, 2]);
    assert_eq!(fc.m1, vec![2, 0]);
    let m: Vec<i64> = chain.windows(2).map(|w| w[1].index(&w[0])).collect();
    let sum: Vec<i64> = fc.m0.iter().zip(&fc.m1).map(|(a, b)| a + b).collect();
    assert_eq!(m, sum);
}

#[test]
fn quasi_degree_examples() {
    let f = field();
    let l = Lattice::standard(&f, 3);
    let id = Matrix::identity(&f, 3);
    assert_eq!(quasi_degree(&l, &l, &id).unwrap(), 0);
    assert_eq!(quasi_degree(&l, &l, &id.scale(&f.pi_pow(1))).unwrap(), 3);
    assert_eq!(quasi_degree(&l, &l, &Matrix::zeros(&f, 3, 3)), Err(Error::SingularMap));
    // additive under composition
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_lattice(&f, 3, &mut rng);
    let b = random_lattice(&f, 3, &mut rng);
    let c = random_lattice(&f, 3, &mut rng);
    let g = Matrix::diagonal(&f, &[f.pi_pow(1), f.one(), f.pi_pow(-2)]);
    let h = random_integral_unit(&f, 3, &mut rng).0;
    let total = quasi_degree(&a, &c, &h.mul(&g)).unwrap();
    assert_eq!(total, quasi_degree(&a, &b, &g).unwrap() + quasi_degree(&b, &c, &h).unwrap());
}

fn panel() -> Vec<(&'static str, SplitScenario)> {
    let mut out = Vec::new();
    for (name, ea, eb) in configurations() {
        for seed in 0..10 {
            out.push((name, random_scenario(&ea, &eb, seed, 2, 2).unwrap()));
        }
    }
    out
}

#[test]
fn hom_lattices_have_expected_ranks_and_projections_surject() {
    for (name, sc) in panel().into_iter().step_by(3) {
        let sys = build_hom_system(&sc).unwrap();
        assert_eq!(sys.dim, 4);
        for side in [Side::First, Side::Second] {
            for part in [Part::Linear, Part::Conj] {
                assert_eq!(sys.lambda_part(side, part).rank(), 2);
                assert!(sys.projection_surjective(side, part).unwrap(), "{name}");
            }
        }
    }
}

#[test]
fn projection_identities() {
    let (_, sc) = panel().remove(4);
    let sys = build_hom_system(&sc).unwrap();
    let f = field();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for side in [Side::First, Side::Second] {
        let (z0, z1, alg) = match side {
            Side::First => (&sc.p0.a, &sc.p1.a, &sc.p0.ea),
            Side::Second => (&sc.p0.b, &sc.p1.b, &sc.p0.eb),
        };
        let conj0 = Matrix::scalar(&f, 2, alg.tr()).sub(z0);
        let conj1 = Matrix::scalar(&f, 2, alg.tr()).sub(z1);
        let (g, _) = random_integral_unit(&f, 2, &mut rng);
        assert!(sys.q_projection(side, Part::Conj, &g).sub(&conj0.mul(&g).sub(&g.mul(&conj1))).is_zero());
        for (part, killed) in [(Part::Linear, Part::Conj), (Part::Conj, Part::Linear)] {
            let basis = sys.part_basis(side, part);
            let h = Matrix::from_vec_cols(&f, 2, 2, &basis.col(0));
            assert!(sys.q_projection(side, killed, &h).is_zero());
            if part == Part::Linear {
                assert!(sys.q_projection(side, Part::Linear, &h).sub(&z0.sub(&conj0).mul(&h)).is_zero());
            }
        }
    }
}

#[test]
fn phi_without_steps_is_the_pair_of_projections() {
    let u = algebras().0;
    for seed in 0..3 {
        let sc = random_scenario(&u, &u, seed, 0, 0).unwrap();
        assert_eq!(sc.r(), 0);
        let sys = build_hom_system(&sc).unwrap();
        let expected = sys.q_matrix(Side::Second, Part::Conj).vstack(&sys.q_matrix(Side::First, Part::Conj));
        assert!(sys.phi().matrix.sub(&expected).is_zero());
    }
}

#[test]
fn degrees_match_closed_forms_on_panel() {
    for (name, sc) in panel() {
        let cf = sc.closed_forms().unwrap();
        let d = build_hom_system(&sc).unwrap().degrees().unwrap();
        let ctx = format!("{name} seed {} m0 {:?} m1 {:?}", sc.seed, sc.m0, sc.m1);
        assert_eq!(d.inclusion, cf.inclusion(), "{ctx}");
        assert_eq!(2 * d.second_triple[0], cf.projection_pair_twice(), "{ctx}");
        assert!(d.first_triple.iter().all(|&x| x == d.first_triple[0]), "{ctx}");
        assert!(d.second_triple.iter().all(|&x| x == d.second_triple[0]), "{ctx}");
        assert_eq!(d.composite, cf.composite(), "{ctx}");
        assert_eq!(2 * d.second_triple[0], d.inclusion + d.composite, "{ctx}");
        assert_eq!(d.left_compositions, cf.left_compositions(), "{ctx}");
        assert_eq!(2 * d.phi, cf.fiber_twice(), "{ctx}");
    }
}

#[test]
fn fiber_counts_agree_three_ways() {
    for (name, sc) in panel().into_iter().step_by(2) {
        let cf = sc.closed_forms().unwrap();
        let phi = build_hom_system(&sc).unwrap().phi().degree().unwrap();
        let (count, level) = fiber_count_direct(&sc, cf.fiber_twice() / 2).unwrap();
        assert_eq!(count, phi, "{name}");
        assert_eq!(2 * count, cf.fiber_twice(), "{name}");
        assert_eq!(fiber_count_at(&sc, 2 * level).unwrap(), count);
    }
}

/// Every tuple `(γ_i)` with entries in `π^-1 Hom(X_i^1, X_i^0)` modulo
/// `Hom(X_i^1, X_i^0)`, checked against the diagram one by one.
fn brute_force_level_one(sc: &SplitScenario) -> u64 {
    let f = sc.p0.field();
    let q = f.q() as u64;
    let r = sc.r();
    let param: Vec<(Matrix<Fe>, Matrix<Fe>)> =
        (0..=r).map(|i| (sc.chain0[i].basis().clone(), sc.chain1[i].basis().inverse().unwrap())).collect();
    let total = q.pow(4 * (r as u32 + 1));
    let mut count = 0;
    for code in 0..total {
        let digits: Vec<u8> = (0..4 * (r as u32 + 1)).map(|k| (code / q.pow(k) % q) as u8).collect();
        let gammas: Vec<Matrix<Fe>> = (0..=r)
            .map(|i| {
                let y = Matrix::from_fn(&f, 2, 2, |a, b| f.constant(digits[4 * i + 2 * b + a]).mul(&f.pi_pow(-1)));
                param[i].0.mul(&y).mul(&param[i].1)
            })
            .collect();
        let mut ok = true;
        for i in 1..=r {
            let diff = gammas[i].sub(&gammas[i - 1]).mul(sc.chain1[i - 1].basis());
            ok &= sc.chain0[i].contains_vectors(&diff).unwrap();
        }
        for (i, z0, z1) in [(0, &sc.p0.b, &sc.p1.b), (r, &sc.p0.a, &sc.p1.a)] {
            let twisted = gammas[i].mul(z1).sub(&z0.mul(&gammas[i])).mul(sc.chain1[i].basis());
            ok &= sc.chain0[i].contains_vectors(&twisted).unwrap();
        }
        count += ok as u64;
    }
    count
}

#[test]
fn level_one_counts_match_brute_force() {
    let mut checked = 0;
    for (name, sc) in panel() {
        if sc.r() > 1 {
            continue;
        }
        let exp = fiber_count_at(&sc, 1).unwrap();
        assert_eq!(3u64.pow(exp as u32), brute_force_level_one(&sc), "{name} seed {}", sc.seed);
        checked += 1;
        if checked == 6 {
            break;
        }
    }
    assert_eq!(checked, 6);
}

#[test]
fn fiber_count_is_multiplicative_over_direct_sums() {
    // V^j = V^j_a ⊕ V^j_b: Hom(V^1, V^0) splits into four independent blocks
    let (u, _, _) = algebras();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut done = 0;
    for seed in 0..40u64 {
        let pairs: Vec<EmbeddingPair> = (0..4).map(|k| random_pair_spread(&u, &u, 1, 4 * seed + k, 1).unwrap().0).collect();
        let steps = [vec![1i64], vec![0i64]];
        let mut scs = Vec::new();
        for (k, p) in pairs.iter().enumerate() {
            let c = random_chain(p, &steps[k % 2], &mut rng, 16).unwrap();
            scs.push(c);
        }
        if scs.iter().any(|c| c.is_none()) {
            continue;
        }
        let chains: Vec<Vec<Lattice<Fe>>> = scs.into_iter().map(|c| c.unwrap()).collect();
        // V^0 = pairs 0 ⊕ 1, V^1 = pairs 2 ⊕ 3
        let join = |a: &[Lattice<Fe>], b: &[Lattice<Fe>]| a.iter().zip(b).map(|(x, y)| x.direct_sum(y)).collect::<Vec<_>>();
        let p0 = direct_sum(&pairs[0], &pairs[1]).unwrap();
        let p1 = direct_sum(&pairs[2], &pairs[3]).unwrap();
        let Ok(whole) = SplitScenario::new(p0, p1, join(&chains[0], &chains[1]), join(&chains[2], &chains[3])) else { continue };
        let mut parts = 0;
        let mut ok = true;
        for y in [0usize, 1] {
            for x in [2usize, 3] {
                let sc = SplitScenario::new(pairs[y].clone(), pairs[x].clone(), chains[y].clone(), chains[x].clone()).unwrap();
                match fiber_count_at(&sc, 12) {
                    Ok(c) => parts += c,
                    Err(_) => ok = false,
                }
            }
        }
        if !ok {
            continue;
        }
        assert_eq!(fiber_count_at(&whole, 12).unwrap(), parts);
        done += 1;
        if done == 2 {
            break;
        }
    }
    assert_eq!(done, 2);
}

#[test]
fn kernel_lifts_glue_stable_lattices_with_multiplicative_transfer_factor() {
    let (_, _, s) = algebras();
    let (u, r, _) = algebras();
    for e3 in [FixedAlgebra::of_pair(&u, &u).unwrap().alg, FixedAlgebra::of_pair(&u, &r).unwrap().alg] {
        for seed in 0..4 {
            let sc = random_scenario(&s, &e3, seed, 2, 2).unwrap();
            let sys = build_hom_system(&sc).unwrap();
            let phi = sys.phi();
            let lifts = phi.kernel_lifts().unwrap();
            let full = sc.full_pair().unwrap();
            let r = sc.r();
            let full_ctx = TransferContext::new(&full).unwrap();
            let c0 = TransferContext::new(&sc.p0).unwrap();
            let c1 = TransferContext::new(&sc.p1).unwrap();
            let expected = c0
                .transfer_factor(&sc.chain0[r], &sc.chain0[0])
                .unwrap()
                .mul(&c1.transfer_factor(&sc.chain1[r], &sc.chain1[0]).unwrap());
            for k in 0..lifts.rank() {
                let v = lifts.basis().col(k);
                let gamma = |i: usize| Matrix::from_vec_cols(&s.field(), 2, 2, &v[4 * i..4 * i + 4]);
                let glued: Vec<Lattice<Fe>> = (0..=r)
                    .map(|i| {
                        let lift = gamma(i).mul(sc.chain1[i].basis());
                        rebuild(&sc.chain0[i], &sc.chain1[i], &lift).unwrap()
                    })
                    .collect();
                for w in glued.windows(2) {
                    assert!(w[1].contains(&w[0]).unwrap());
                }
                let (x0, xr) = (&glued[0], &glued[r]);
                assert!(x0.contains_vectors(&full.b.mul(x0.basis())).unwrap());
                assert!(xr.contains_vectors(&full.a.mul(xr.basis())).unwrap());
                assert_eq!(full_ctx.transfer_factor(xr, x0).unwrap(), expected);
            }
        }
    }
}

#[test]
fn levi_reduction_rank_four() {
    let (u, r, _) = algebras();
    let win = Windows::default();
    for (ea, eb) in [(&u, &u), (&u, &r)] {
        let (b0, _) = random_pair(ea, eb, 1, 0).unwrap();
        let (b1, _) = random_pair(ea, eb, 1, 1).unwrap();
        for m in [vec![0], vec![1]] {
            let rep = verify_levi_reduction(&b0, &b1, &m, &win).unwrap();
            assert!(rep.beta.equal, "{rep:?}");
            assert!(rep.alpha.equal, "{rep:?}");
            assert_eq!(value_at_zero(&rep.alpha.lhs), rep.beta.lhs);
        }
        // m = (0): a single summand, the product of the unit integrals
        let rep = verify_levi_reduction(&b0, &b1, &[0], &win).unwrap();
        let unit = HeckeFunction::unit(2, 3);
        let prod = orbital_beta(&b0, &unit, &win).unwrap().0 * orbital_beta(&b1, &unit, &win).unwrap().0;
        assert_eq!(rep.beta.sum, prod);
    }
}

#[test]
fn levi_reduction_with_nontrivial_constant() {
    let (u, _, _) = algebras();
    let (b0, _) = random_pair_spread(&u, &u, 1, 0, 1).unwrap();
    let (b1, _) = random_pair_spread(&u, &u, 1, 1, 1).unwrap();
    let (beta_c, alpha_c) = constants_twice(&b0, &b1).unwrap();
    assert_eq!(beta_c, alpha_c);
    assert_ne!(beta_c, 0);
    let rep = verify_levi_reduction(&b0, &b1, &[1], &Windows::default()).unwrap();
    assert!(rep.beta.equal && rep.alpha.equal, "{rep:?}");
    assert_ne!(rep.beta.lhs, rat(0));
}

#[test]
fn splittings_enumerate_componentwise() {
    assert_eq!(splittings(&[]), vec![Vec::<i64>::new()]);
    assert_eq!(splittings(&[1, 2]).len(), 6);
    assert!(splittings(&[2, 1]).iter().all(|s| s[0] <= 2 && s[1] <= 1));
}

#[test]
fn intersection_reduction_rhs() {
    let (u, r, _) = algebras();
    let win = Windows::default();
    let (b1, _) = random_pair(&u, &r, 1, 2).unwrap();
    let m = vec![1, 1];
    // empty V^0: the right side is the orbital integral itself
    let (v, c) = evaluate_intersection_rhs(&BTreeMap::new(), 0, &b1, &m, 0, &win).unwrap();
    let full = orbital_beta(&b1, &HeckeFunction::f_of_m(2, 3, &m).unwrap(), &win).unwrap().0;
    assert_eq!((v, c), (full, 0));
    // linear in the supplied values
    let keys = splittings(&m);
    let a: BTreeMap<_, _> = keys.iter().enumerate().map(|(i, k)| (k.clone(), rat(i as i64 + 1))).collect();
    let b: BTreeMap<_, _> = keys.iter().enumerate().map(|(i, k)| (k.clone(), rat(2 - i as i64))).collect();
    let ab: BTreeMap<_, _> = keys.iter().map(|k| (k.clone(), &a[k] * rat(3) + &b[k])).collect();
    let va = evaluate_intersection_rhs(&a, 1, &b1, &m, 0, &win).unwrap().0;
    let vb = evaluate_intersection_rhs(&b, 1, &b1, &m, 0, &win).unwrap().0;
    assert_eq!(evaluate_intersection_rhs(&ab, 1, &b1, &m, 0, &win).unwrap().0, va * rat(3) + vb);
    let mut partial = a.clone();
    partial.remove(&vec![1, 0]);
    assert_eq!(evaluate_intersection_rhs(&partial, 1, &b1, &m, 0, &win), Err(Error::MissingInput));
}

#[test]
fn both_constants_agree() {
    let (u, r, _) = algebras();
    for (ea, eb) in [(&u, &u), (&u, &r)] {
        for seed in 0..5 {
            let (b0, _) = random_pair_spread(ea, eb, 1, 2 * seed, 2).unwrap();
            let (b1, _) = random_pair_spread(ea, eb, 1, 2 * seed + 1, 2).unwrap();
            let Ok((beta, alpha)) = constants_twice(&b0, &b1) else { continue };
            assert_eq!(beta, alpha);
        }
    }
}

#[test]
fn scenarios_are_reproducible() {
    let (u, r, _) = algebras();
    let a = random_scenario(&u, &r, 17, 2, 2).unwrap();
    let b = random_scenario(&u, &r, 17, 2, 2).unwrap();
    assert_eq!(a.chain0, b.chain0);
    assert_eq!(a.chain1, b.chain1);
    assert_eq!((a.m0, a.m1, a.retries), (b.m0, b.m1, b.retries));
}
