use std::collections::BTreeSet;

use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wb_core::field::{Fe, Field};
use wb_core::lattice::{gamma_reduce, Lattice};
use wb_core::pairs::random_integral_unit;
use wb_core::Matrix;

fn random_matrix(f: &Field, m: usize, rng: &mut ChaCha8Rng) -> Matrix<Fe> {
    // product of an integral unit, a diagonal of pi powers and another unit
    let (g, _) = random_integral_unit(f, m, rng);
    let (h, _) = random_integral_unit(f, m, rng);
    let ks: Vec<Fe> = (0..m).map(|_| f.pi_pow((rng.next_u32() % 5) as i64 - 2)).collect();
    g.mul(&Matrix::diagonal(f, &ks)).mul(&h)
}

fn random_lattice(f: &Field, m: usize, rng: &mut ChaCha8Rng) -> Lattice<Fe> {
    Lattice::from_generators(&random_matrix(f, m, rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn canonical_form_is_unique_and_idempotent(seed in any::<u64>(), m in 1usize..4) {
        let f = Field::new(3, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_matrix(&f, m, &mut rng);
        let (u, _) = random_integral_unit(&f, m, &mut rng);
        let l = Lattice::from_generators(&g).unwrap();
        prop_assert_eq!(Lattice::from_generators(&g.mul(&u)).unwrap(), l.clone());
        prop_assert_eq!(Lattice::from_generators(l.basis()).unwrap(), l);
    }

    #[test]
    fn index_is_additive_and_matches_positions(seed in any::<u64>(), m in 1usize..4) {
        let f = Field::new(5, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_lattice(&f, m, &mut rng), random_lattice(&f, m, &mut rng), random_lattice(&f, m, &mut rng));
        prop_assert_eq!(a.index(&c), a.index(&b) + b.index(&c));
        let pos = a.relative_position(&b).unwrap();
        prop_assert_eq!(pos.iter().sum::<i64>(), a.index(&b));
        prop_assert!(pos.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn relative_position_is_translation_invariant(seed in any::<u64>(), m in 1usize..4) {
        let f = Field::new(3, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_lattice(&f, m, &mut rng), random_lattice(&f, m, &mut rng));
        let g = random_matrix(&f, m, &mut rng);
        prop_assert_eq!(a.apply(&g).unwrap().relative_position(&b.apply(&g).unwrap()).unwrap(), a.relative_position(&b).unwrap());
    }

    #[test]
    fn single_step_chains(seed in any::<u64>(), k in 0i64..3) {
        let f = Field::new(3, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outer = random_lattice(&f, 2, &mut rng);
        let subs = outer.sublattices_of_index(k).unwrap();
        let inner = &subs[(rng.next_u32() as usize) % subs.len()];
        prop_assert_eq!(Lattice::count_chains(inner, &outer, &[k]).unwrap(), 1);
        prop_assert_eq!(Lattice::count_chains(inner, &outer, &[k + 1]).unwrap(), 0);
    }

    #[test]
    fn gamma_representative_is_orbit_invariant(seed in any::<u64>(), e0 in -3i64..4, e1 in -3i64..4) {
        let f = Field::new(3, 40).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = random_lattice(&f, 4, &mut rng);
        let one = f.one();
        let pi = f.pi_pow(1);
        let gammas = vec![
            Matrix::diagonal(&f, &[pi.clone(), pi.clone(), one.clone(), one.clone()]),
            Matrix::diagonal(&f, &[one.clone(), one.clone(), pi.clone(), pi.clone()]),
        ];
        let g = Matrix::diagonal(&f, &[f.pi_pow(e0), f.pi_pow(e0), f.pi_pow(e1), f.pi_pow(e1)]);
        let (r1, _) = gamma_reduce(&l, &[2, 2], &gammas).unwrap();
        let (r2, _) = gamma_reduce(&l.apply(&g).unwrap(), &[2, 2], &gammas).unwrap();
        prop_assert_eq!(r1, r2);
    }
}

/// Distinct submodules of index `k` in `O^2`, by enumerating generator pairs
/// modulo `pi^k`.
fn brute_force_sublattices(f: &Field, k: i64) -> usize {
    let q = f.q() as u64;
    let n = q.pow(k as u32);
    let digits = |mut c: u64| -> Fe {
        let mut ds = Vec::new();
        for _ in 0..k {
            ds.push((c % q) as u8);
            c /= q;
        }
        Fe::from_digits(*f, 0, ds, None)
    };
    let mut seen = BTreeSet::new();
    let pk = f.pi_pow(k);
    for code in 0..n.pow(4) {
        let v = [digits(code % n), digits(code / n % n), digits(code / n / n % n), digits(code / n / n / n)];
        let gens = Matrix::from_rows(f, vec![vec![v[0].clone(), v[2].clone(), pk.clone(), f.zero()], vec![v[1].clone(), v[3].clone(), f.zero(), pk.clone()]]);
        let l = Lattice::from_generators(&gens).unwrap();
        if l.det_valuation() == k {
            seen.insert(l.key());
        }
    }
    seen.len()
}

#[test]
fn sublattice_counts_match_brute_force() {
    for (q, kmax) in [(2u8, 3i64), (3, 2)] {
        let f = Field::new(q, 40).unwrap();
        let o = Lattice::<Fe>::standard(&f, 2);
        for k in 0..=kmax {
            let listed = o.sublattices_of_index(k).unwrap();
            let expected: usize = (0..=k).map(|j| (q as usize).pow(j as u32)).sum();
            assert_eq!(listed.len(), expected);
            assert_eq!(brute_force_sublattices(&f, k), expected);
            assert!(listed.iter().all(|l| o.contains(l).unwrap() && o.index(l) == k));
        }
    }
}

#[test]
fn chain_count_through_scaled_lattice() {
    for q in [2u8, 3, 5] {
        let f = Field::new(q, 40).unwrap();
        let o = Lattice::<Fe>::standard(&f, 2);
        assert_eq!(Lattice::count_chains(&o.scale(1), &o, &[1, 1]).unwrap(), q as u64 + 1);
    }
}

#[test]
fn canonical_form_example() {
    let f = Field::new(3, 40).unwrap();
    let g = Matrix::from_rows(&f, vec![vec![f.pi_pow(1), f.zero()], vec![f.one(), f.one()]]);
    let l = Lattice::from_generators(&g).unwrap();
    assert_eq!(Lattice::from_generators(l.basis()).unwrap(), l);
    assert_eq!(l.det_valuation(), 1);
    assert_eq!(Lattice::<Fe>::from_generators(&Matrix::identity(&f, 3)).unwrap(), Lattice::<Fe>::standard(&f, 3));
}

#[test]
fn trivial_gamma_leaves_input() {
    let f = Field::new(3, 40).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let l = random_lattice(&f, 2, &mut rng);
    assert_eq!(gamma_reduce(&l, &[], &[]).unwrap().0, l);
}
