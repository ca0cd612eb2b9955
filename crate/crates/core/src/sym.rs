//! Laurent polynomials in one variable with rational coefficients, and
//! symmetric Laurent polynomials in `x_1..x_n` over them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `sum c_k X^k` over the rationals, finitely many `k` (possibly negative).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Laurent {
    terms: BTreeMap<i64, BigRational>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }
    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }
    pub fn monomial(c: BigRational, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        Laurent { terms }
    }
    pub fn int(c: i64) -> Self {
        Self::monomial(BigRational::from_integer(BigInt::from(c)), 0)
    }
    /// `X^k`.
    pub fn power(k: i64) -> Self {
        Self::monomial(BigRational::one(), k)
    }
    pub fn terms(&self) -> &BTreeMap<i64, BigRational> {
        &self.terms
    }
    pub fn coeff(&self, k: i64) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn insert_add(&mut self, k: i64, c: BigRational) {
        let e = self.terms.entry(k).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (&k, c) in &o.terms {
            r.insert_add(k, c.clone());
        }
        r
    }
    pub fn neg(&self) -> Self {
        Laurent { terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect() }
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Laurent::zero();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &o.terms {
                r.insert_add(a + b, ca * cb);
            }
        }
        r
    }
    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Laurent::zero();
        }
        Laurent { terms: self.terms.iter().map(|(&k, x)| (k, x * c)).collect() }
    }
    /// Multiply by `X^k`.
    pub fn shift(&self, k: i64) -> Self {
        Laurent { terms: self.terms.iter().map(|(&e, c)| (e + k, c.clone())).collect() }
    }
    /// `X -> X^-1`.
    pub fn invert_variable(&self) -> Self {
        Laurent { terms: self.terms.iter().map(|(&e, c)| (-e, c.clone())).collect() }
    }
    /// Value at `X = x` (a rational number).
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut s = BigRational::zero();
        for (&k, c) in &self.terms {
            s += c * pow_rational(x, k);
        }
        s
    }
    /// Derivative in `X`.
    pub fn derivative(&self) -> Self {
        let mut r = Laurent::zero();
        for (&k, c) in &self.terms {
            if k != 0 {
                r.insert_add(k - 1, c * BigRational::from_integer(BigInt::from(k)));
            }
        }
        r
    }
    /// Canonical form modulo `X^2 = q`: only `X^0` and `X^1` remain, and
    /// when `q` is a perfect square only `X^0`.
    pub fn reduce_square(&self, q: u8) -> Self {
        let qr = BigRational::from_integer(BigInt::from(q));
        let root = (1..=q).find(|r| r * r == q);
        let mut r = Laurent::zero();
        for (&k, c) in &self.terms {
            let (j, rem) = (k.div_euclid(2), k.rem_euclid(2));
            let mut c = c * pow_rational(&qr, j);
            let mut e = rem;
            if let (Some(rt), 1) = (root, rem) {
                c *= BigRational::from_integer(BigInt::from(rt));
                e = 0;
            }
            r.insert_add(e, c);
        }
        r
    }

    /// `X -> X^e` for an integer `e`.
    pub fn substitute_power(&self, e: i64) -> Self {
        Laurent { terms: self.terms.iter().map(|(&k, c)| (k * e, c.clone())).collect() }
    }
    pub fn to_string_in(&self, var: &str) -> String {
        if self.terms.is_empty() {
            return String::from("0");
        }
        let mut s = String::new();
        for (i, (&k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            let unit = a.is_one();
            if !unit || k == 0 {
                s.push_str(&alloc::format!("{}", a));
            }
            if k != 0 {
                if !unit {
                    s.push('*');
                }
                s.push_str(var);
                if k != 1 {
                    s.push_str(&alloc::format!("^{}", k));
                }
            }
        }
        s
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("X"))
    }
}

pub fn pow_rational(x: &BigRational, k: i64) -> BigRational {
    let mut r = BigRational::one();
    let base = if k < 0 { x.recip() } else { x.clone() };
    for _ in 0..k.unsigned_abs() {
        r *= &base;
    }
    r
}

/// A Laurent polynomial in `x_1..x_n` with coefficients in [`Laurent`]
/// (in `u = q^(1/2)`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymLaurent {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Laurent>,
}

impl SymLaurent {
    pub fn zero(nvars: usize) -> Self {
        SymLaurent { nvars, terms: BTreeMap::new() }
    }
    pub fn constant(nvars: usize, c: Laurent) -> Self {
        let mut s = Self::zero(nvars);
        s.add_term(vec![0; nvars], c);
        s
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Laurent> {
        &self.terms
    }
    pub fn add_term(&mut self, exps: Vec<i64>, c: Laurent) {
        assert_eq!(exps.len(), self.nvars);
        let e = self.terms.entry(exps.clone()).or_default();
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&exps);
        }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Laurent::int(-1)))
    }
    pub fn scale(&self, c: &Laurent) -> Self {
        let mut r = Self::zero(self.nvars);
        for (k, x) in &self.terms {
            r.add_term(k.clone(), x.mul(c));
        }
        r
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                r.add_term(e, ca.mul(cb));
            }
        }
        r
    }
    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::constant(self.nvars, Laurent::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }
    /// Coefficients reduced modulo `u^2 = q`.
    pub fn reduce_square(&self, q: u8) -> Self {
        let mut r = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            r.add_term(k.clone(), c.reduce_square(q));
        }
        r
    }

    /// Invariant under every permutation of the variables.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(k, c)| {
            let mut perm = k.clone();
            perm.sort_unstable();
            permutations(&perm).iter().all(|p| self.terms.get(p) == Some(c))
        })
    }
    /// Every monomial has total degree `k`.
    pub fn is_homogeneous(&self, k: i64) -> bool {
        self.terms.keys().all(|e| e.iter().sum::<i64>() == k)
    }

    /// Coefficients in the basis of monomials `e_1^a_1 ... e_n^a_n` of
    /// elementary symmetric polynomials, for a symmetric polynomial (no
    /// negative exponents). `None` if the input is not symmetric.
    pub fn in_elementary_basis(&self) -> Option<BTreeMap<Vec<u32>, Laurent>> {
        let n = self.nvars;
        let mut rest = self.clone();
        let mut out = BTreeMap::new();
        let es: Vec<SymLaurent> = (0..=n).map(|k| elementary(n, k)).collect();
        while let Some((lead, c)) = rest.terms.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
            if lead.iter().any(|&x| x < 0) || lead.windows(2).any(|w| w[0] < w[1]) {
                return None;
            }
            let mut a = vec![0u32; n];
            let mut prod = Self::constant(n, Laurent::one());
            for i in 0..n {
                let next = if i + 1 < n { lead[i + 1] } else { 0 };
                a[i] = (lead[i] - next) as u32;
                prod = prod.mul(&es[i + 1].pow(a[i]));
            }
            rest = rest.sub(&prod.scale(&c));
            out.insert(a, c);
        }
        Some(out)
    }
}

fn permutations(v: &[i64]) -> Vec<Vec<i64>> {
    // distinct permutations of a sorted vector
    let mut out = Vec::new();
    let mut cur = v.to_vec();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let n = cur.len();
        if n < 2 {
            break;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

fn compositions(n: usize, total: i64, out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>) {
    if cur.len() + 1 == n {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for x in 0..=total {
        cur.push(x);
        compositions(n, total - x, out, cur);
        cur.pop();
    }
}

/// All exponent vectors of length `n`, entries `>= 0`, summing to `total`.
pub fn monomials_of_degree(n: usize, total: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if n == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    compositions(n, total, &mut out, &mut Vec::new());
    out
}

/// `e_k(x_1..x_n)`.
pub fn elementary(n: usize, k: usize) -> SymLaurent {
    let mut s = SymLaurent::zero(n);
    if k > n {
        return s;
    }
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            s.add_term((0..n).map(|i| ((mask >> i) & 1) as i64).collect(), Laurent::one());
        }
    }
    s
}

/// `b_m(x_1..x_n)`: the sum of all monomials of degree `m`.
pub fn complete(n: usize, m: usize) -> SymLaurent {
    let mut s = SymLaurent::zero(n);
    for e in monomials_of_degree(n, m as i64) {
        s.add_term(e, Laurent::one());
    }
    s
}

/// `sum_{i=0}^k (-1)^i b_i e_(k-i) == 0`.
pub fn check_complete_elementary_identity(n: usize, k: usize) -> bool {
    let mut acc = SymLaurent::zero(n);
    for i in 0..=k {
        let term = complete(n, i).mul(&elementary(n, k - i));
        acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc.is_zero()
}

/// Number of double cosets of determinant valuation `k` for integral
/// matrices of size `n` (nondecreasing tuples of `n` nonnegative integers
/// summing to `k`), and the dimension of degree-`k` symmetric polynomials in
/// `n` variables (orbits of degree-`k` monomials under permutation).
pub fn dimension_census(n: usize, k: i64) -> (usize, usize) {
    let mut cosets = 0;
    count_nondecreasing(n, k, 0, &mut cosets);
    let mut orbits: Vec<Vec<i64>> = monomials_of_degree(n, k)
        .into_iter()
        .map(|mut e| {
            e.sort_unstable();
            e
        })
        .collect();
    orbits.sort();
    orbits.dedup();
    (cosets, orbits.len())
}

fn count_nondecreasing(slots: usize, total: i64, min: i64, out: &mut usize) {
    if slots == 0 {
        if total == 0 {
            *out += 1;
        }
        return;
    }
    let mut x = min;
    while x * slots as i64 <= total {
        count_nondecreasing(slots - 1, total - x, x, out);
        x += 1;
    }
}
