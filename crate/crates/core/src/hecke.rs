//! The spherical Hecke algebra of `GL_m(F)`: functions of the Cartan type,
//! convolution and (partial) Satake transforms, all by lattice counting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::field::{Fe, Field};
use crate::lattice::Lattice;
use crate::matrix::Matrix;
use crate::sym::{monomials_of_degree, Laurent, SymLaurent};

/// A finitely supported bi-`GL_m(O)`-invariant function, keyed by decreasing
/// exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeFunction {
    rank: usize,
    q: u8,
    coeffs: BTreeMap<Vec<i64>, BigRational>,
}

fn is_decreasing(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

/// Type of `g^-1` from the type of `g`.
fn inverse_type(t: &[i64]) -> Vec<i64> {
    t.iter().rev().map(|x| -x).collect()
}

fn rat(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// Scratch field for lattice counting; all lattices involved are exact.
fn counting_field(q: u8) -> Field {
    Field::new(q, 24).expect("supported q")
}

fn diagonal_lattice(f: &Field, exps: &[i64]) -> Lattice<Fe> {
    let d: Vec<Fe> = exps.iter().map(|&e| f.pi_pow(e)).collect();
    Lattice::from_canonical(Matrix::diagonal(f, &d))
}

impl HeckeFunction {
    pub fn zero(rank: usize, q: u8) -> Self {
        HeckeFunction { rank, q, coeffs: BTreeMap::new() }
    }

    /// Characteristic function of a single double coset.
    pub fn delta(rank: usize, q: u8, t: Vec<i64>) -> Self {
        let mut f = Self::zero(rank, q);
        f.add_at(t, BigRational::one());
        f
    }

    pub fn unit(rank: usize, q: u8) -> Self {
        Self::delta(rank, q, vec![0; rank])
    }

    /// `[pi]^k`: the characteristic function of `pi^k GL_m(O)`.
    pub fn pi_power(rank: usize, q: u8, k: i64) -> Self {
        Self::delta(rank, q, vec![k; rank])
    }

    /// `pi O^m ⊂ g O^m ⊂_k O^m` for `0 <= k <= m`; negative `k` via `g^-1`.
    pub fn s(rank: usize, q: u8, k: i64) -> Self {
        assert!(k.unsigned_abs() as usize <= rank);
        let a = k.unsigned_abs() as usize;
        let t: Vec<i64> = (0..rank).map(|i| i64::from(i < a)).collect();
        Self::delta(rank, q, if k >= 0 { t } else { inverse_type(&t) })
    }

    /// `g O^m ⊂_k O^m`, i.e. integral with `v(det) = k`; negative `k` via `g^-1`.
    pub fn t(rank: usize, q: u8, k: i64) -> Self {
        let mut f = Self::zero(rank, q);
        for mut e in monomials_of_degree(rank, k.abs()) {
            if is_decreasing(&e) {
                if k < 0 {
                    e = inverse_type(&e);
                }
                f.add_at(e, BigRational::one());
            }
        }
        f
    }

    /// `f(m) = T_(m_1) * ... * T_(m_r)`, the chain-counting function.
    pub fn f_of_m(rank: usize, q: u8, m: &[i64]) -> Result<Self> {
        let mut acc = Self::unit(rank, q);
        for &mi in m {
            acc = acc.convolve(&Self::t(rank, q, mi))?;
        }
        Ok(acc)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
    pub fn q(&self) -> u8 {
        self.q
    }
    pub fn coeffs(&self) -> &BTreeMap<Vec<i64>, BigRational> {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_at(&mut self, t: Vec<i64>, c: BigRational) {
        assert!(t.len() == self.rank && is_decreasing(&t), "type must be a decreasing vector");
        let e = self.coeffs.entry(t.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&t);
        }
    }

    pub fn at(&self, t: &[i64]) -> BigRational {
        self.coeffs.get(t).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.coeffs {
            r.add_at(k.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut r = Self::zero(self.rank, self.q);
        for (k, x) in &self.coeffs {
            r.add_at(k.clone(), x * c);
        }
        r
    }

    /// `[pi]^k * f`, i.e. `g -> f(pi^-k g)`.
    pub fn twist(&self, k: i64) -> Self {
        HeckeFunction {
            rank: self.rank,
            q: self.q,
            coeffs: self.coeffs.iter().map(|(t, c)| (t.iter().map(|x| x + k).collect(), c.clone())).collect(),
        }
    }

    /// Smallest and largest exponent over the support.
    pub fn entry_range(&self) -> Option<(i64, i64)> {
        let lo = self.coeffs.keys().filter_map(|t| t.last().copied()).min()?;
        let hi = self.coeffs.keys().filter_map(|t| t.first().copied()).max()?;
        Some((lo, hi))
    }

    fn degrees(&self) -> BTreeSet<i64> {
        self.coeffs.keys().map(|t| t.iter().sum()).collect()
    }

    /// Value at a pair of lattices: `f` of their relative position.
    pub fn value_at(&self, a: &Lattice<Fe>, b: &Lattice<Fe>) -> Result<BigRational> {
        Ok(self.at(&a.relative_position(b)?))
    }

    /// Every lattice `Λ` with `f(O^m, Λ) != 0`, with that value.
    pub fn support_lattices(&self, field: &Field) -> Result<Vec<(Lattice<Fe>, BigRational)>> {
        let Some((lo, hi)) = self.entry_range() else { return Ok(Vec::new()) };
        let m = self.rank;
        let outer = diagonal_lattice(field, &vec![lo; m]);
        let inner = diagonal_lattice(field, &vec![hi; m]);
        let mut out = Vec::new();
        for d in self.degrees() {
            for l in Lattice::between(&outer, &inner, Some(d - lo * m as i64))? {
                let std = Lattice::standard(field, m);
                let v = self.value_at(&std, &l)?;
                if !v.is_zero() {
                    out.push((l, v));
                }
            }
        }
        Ok(out)
    }

    /// `(f * g)(x) = sum over lattices Λ of f(O, Λ) g(Λ, x O)`.
    pub fn convolve(&self, g: &Self) -> Result<Self> {
        assert_eq!((self.rank, self.q), (g.rank, g.q));
        let m = self.rank;
        let mut out = Self::zero(m, self.q);
        let (Some((lf, hf)), Some((lg, hg))) = (self.entry_range(), g.entry_range()) else {
            return Ok(out);
        };
        let field = counting_field(self.q);
        let mids = self.support_lattices(&field)?;
        let mut totals = BTreeSet::new();
        for a in self.degrees() {
            for b in g.degrees() {
                totals.insert(a + b);
            }
        }
        for total in totals {
            for t in decreasing_vectors(m, lf + lg, hf + hg, total) {
                let x = diagonal_lattice(&field, &t);
                let mut s = BigRational::zero();
                for (mid, fv) in &mids {
                    let gv = g.value_at(mid, &x)?;
                    if !gv.is_zero() {
                        s += fv * gv;
                    }
                }
                if !s.is_zero() {
                    out.add_at(t, s);
                }
            }
        }
        Ok(out)
    }

    /// Partial Satake transform to the Levi with block sizes `blocks`:
    /// `δ_P(l)^(1/2) ∫_U f(l u) du`, evaluated on each block-diagonal
    /// representative `l = diag(pi^μ_1, ..., pi^μ_r)` (each `μ_i` decreasing).
    ///
    /// By the Iwasawa decomposition, the cosets `l u U(O)` are exactly the
    /// lattices whose block Hermite form has diagonal blocks `pi^μ_i`, so the
    /// integral is a weighted count of lattices.
    pub fn satake_levi(&self, blocks: &[usize]) -> Result<LeviTransform> {
        assert_eq!(blocks.iter().sum::<usize>(), self.rank);
        let field = counting_field(self.q);
        let mut out = LeviTransform { blocks: blocks.to_vec(), terms: BTreeMap::new() };
        for (l, v) in self.support_lattices(&field)? {
            let b = l.basis();
            let mut key = Vec::with_capacity(blocks.len());
            let mut off = 0;
            let mut ok = true;
            for &n in blocks {
                let mut t = Vec::with_capacity(n);
                for i in off..off + n {
                    for j in off..off + n {
                        if i != j && !b[(i, j)].is_exact_zero() {
                            ok = false;
                        }
                    }
                    t.push(b[(i, i)].valuation().expect("canonical diagonal"));
                }
                if !is_decreasing(&t) {
                    ok = false;
                }
                key.push(t);
                off += n;
            }
            if !ok {
                continue;
            }
            // δ_P(l) = prod_{i<j} |det l_i|^(n_j) |det l_j|^(-n_i); its square
            // root is u^(-sum_{i<j} (n_j |μ_i| - n_i |μ_j|)) with u = q^(1/2)
            let mut e = 0i64;
            for i in 0..blocks.len() {
                for j in i + 1..blocks.len() {
                    let di: i64 = key[i].iter().sum();
                    let dj: i64 = key[j].iter().sum();
                    e -= blocks[j] as i64 * di - blocks[i] as i64 * dj;
                }
            }
            out.add(key, Laurent::monomial(v, e).reduce_square(self.q));
        }
        Ok(out)
    }

    /// Full Satake transform as a symmetric Laurent polynomial in
    /// `x_1..x_m` with coefficients in `u = q^(1/2)`.
    pub fn satake(&self) -> Result<SymLaurent> {
        Ok(self.satake_levi(&vec![1; self.rank])?.to_torus())
    }
}

/// Decreasing integer vectors of length `m`, entries in `[lo, hi]`, summing
/// to `total`.
pub fn decreasing_vectors(m: usize, lo: i64, hi: i64, total: i64) -> Vec<Vec<i64>> {
    fn rec(m: usize, lo: i64, hi: i64, total: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if m == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in (lo..=hi).rev() {
            // the other m - 1 entries lie in [lo, x]
            if lo * (m as i64 - 1) + x > total || x * (m as i64) < total {
                continue;
            }
            cur.push(x);
            rec(m - 1, lo, x, total - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, lo, hi, total, &mut Vec::new(), &mut out);
    out
}

/// A function on a Levi `GL_n1 x ... x GL_nr`, bi-invariant under integral
/// points, with coefficients Laurent in `u = q^(1/2)`: a sum of tensors of
/// Hecke functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeviTransform {
    pub blocks: Vec<usize>,
    pub terms: BTreeMap<Vec<Vec<i64>>, Laurent>,
}

impl LeviTransform {
    pub fn zero(blocks: &[usize]) -> Self {
        LeviTransform { blocks: blocks.to_vec(), terms: BTreeMap::new() }
    }

    pub fn add(&mut self, key: Vec<Vec<i64>>, c: Laurent) {
        let e = self.terms.entry(key.clone()).or_default();
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// `c * (f_1 ⊗ ... ⊗ f_r)`.
    pub fn add_tensor(&mut self, c: &Laurent, parts: &[&HeckeFunction]) {
        let mut acc: Vec<(Vec<Vec<i64>>, BigRational)> = vec![(Vec::new(), BigRational::one())];
        for p in parts {
            let mut next = Vec::new();
            for (k, x) in &acc {
                for (t, y) in p.coeffs() {
                    let mut k2 = k.clone();
                    k2.push(t.clone());
                    next.push((k2, x * y));
                }
            }
            acc = next;
        }
        for (k, x) in acc {
            self.add(k, c.scale(&x));
        }
    }

    pub fn to_torus(&self) -> SymLaurent {
        let mut s = SymLaurent::zero(self.blocks.len());
        for (k, c) in &self.terms {
            s.add_term(k.iter().map(|t| t[0]).collect(), c.clone());
        }
        s
    }
}

/// Closed form of the partial Satake transform of `[pi]^k * f(m)` to the
/// Levi `GL_n0 x GL_n1`: the sum over `m = m0 + m1` of
/// `q^((n1 |m0| + n0 |m1|) / 2) ([pi]^k * f(m0)) ⊗ ([pi]^k * f(m1))`.
pub fn partial_satake_closed(q: u8, n0: usize, n1: usize, m: &[i64], k: i64) -> Result<LeviTransform> {
    let mut out = LeviTransform::zero(&[n0, n1]);
    let mut splits: Vec<(Vec<i64>, Vec<i64>)> = vec![(Vec::new(), Vec::new())];
    for &mi in m {
        let mut next = Vec::new();
        for (a, b) in &splits {
            for x in 0..=mi {
                let (mut a2, mut b2) = (a.clone(), b.clone());
                a2.push(x);
                b2.push(mi - x);
                next.push((a2, b2));
            }
        }
        splits = next;
    }
    for (m0, m1) in splits {
        let f0 = HeckeFunction::f_of_m(n0, q, &m0)?.twist(k);
        let f1 = HeckeFunction::f_of_m(n1, q, &m1)?.twist(k);
        let s0: i64 = m0.iter().sum();
        let s1: i64 = m1.iter().sum();
        let e = n1 as i64 * s0 + n0 as i64 * s1;
        out.add_tensor(&Laurent::power(e).reduce_square(q), &[&f0, &f1]);
    }
    Ok(out)
}

/// `q^(k(n-k)/2) e_k`.
pub fn satake_s_closed(q: u8, n: usize, k: usize) -> SymLaurent {
    crate::sym::elementary(n, k).scale(&Laurent::power((k * (n - k)) as i64).reduce_square(q))
}

/// `q^(m(n-1)/2) b_m`.
pub fn satake_t_closed(q: u8, n: usize, m: usize) -> SymLaurent {
    crate::sym::complete(n, m).scale(&Laurent::power((m * (n - 1)) as i64).reduce_square(q))
}

/// Rational `q` as a value of `u^2`.
pub fn q_rational(q: u8) -> BigRational {
    rat(q as i64)
}
