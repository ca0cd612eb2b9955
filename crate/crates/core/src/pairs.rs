//! Pairs of embeddings of two quadratic étale algebras into `M_2n(F)` and
//! their invariant polynomial.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::etale::{decompose_commutative, is_regular_semisimple, symmetry_check, Decomposition, FixedAlgebra};
use crate::field::{Fe, Field};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::quad::{Kind, QElem, Quad};
use crate::ring::Ring;

/// How the fixed algebra of a pair is identified with the target algebra in
/// which invariants are written: on generators, `t -> t` or `t -> t^sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Identification {
    Direct,
    Conjugate,
}

/// Identification used for pairs whose first algebra is split. Chosen once by
/// comparing orbital integrals of matched pairs at `n = 1`.
pub const SPLIT_SIDE_IDENTIFICATION: Identification = Identification::Direct;

/// `(A, B)`: images of the generators of `E_a` and `E_b` in `M_2n(F)`.
#[derive(Clone, Debug)]
pub struct EmbeddingPair {
    pub ea: Arc<Quad>,
    pub eb: Arc<Quad>,
    pub a: Matrix<Fe>,
    pub b: Matrix<Fe>,
    pub n: usize,
}

/// The invariant of a pair and, for regular semisimple pairs, its centralizer.
#[derive(Clone, Debug)]
pub struct InvariantData {
    pub delta: Poly<QElem>,
    pub rs: bool,
    pub centralizer: Option<Centralizer>,
}

/// The centralizer `L` of a regular semisimple pair, split into fields; each
/// factor's uniformizer matrix generates one copy of `Z` in `Γ`.
#[derive(Clone, Debug)]
pub struct Centralizer {
    pub basis: Vec<Matrix<Fe>>,
    pub decomposition: Decomposition,
}

impl Centralizer {
    pub fn gammas(&self) -> Vec<Matrix<Fe>> {
        self.decomposition.factors.iter().map(|f| f.uniformizer.clone()).collect()
    }
    pub fn idempotents(&self) -> Vec<Matrix<Fe>> {
        self.decomposition.factors.iter().map(|f| f.idempotent.clone()).collect()
    }
}

/// `z` acting on `F^2` in the basis `1, z`.
fn companion(e: &Quad) -> Matrix<Fe> {
    let f = e.field();
    Matrix::from_rows(&f, vec![vec![f.zero(), e.nm().neg()], vec![f.one(), e.tr().clone()]])
}

/// The standard free embedding: `n` copies of the companion block.
pub fn standard_embedding(e: &Quad, n: usize) -> Matrix<Fe> {
    let c = companion(e);
    let mut m = c.clone();
    for _ in 1..n {
        m = m.block_diag(&c);
    }
    m
}

/// `tr - X`, the image of the conjugate generator.
pub fn conjugate_image(e: &Quad, x: &Matrix<Fe>) -> Matrix<Fe> {
    let f = e.field();
    Matrix::scalar(&f, x.rows(), e.tr()).sub(x)
}

fn satisfies_minpoly(e: &Quad, x: &Matrix<Fe>) -> bool {
    let f = e.field();
    let k = x.rows();
    x.mul(x).sub(&x.scale(e.tr())).add(&Matrix::scalar(&f, k, e.nm())).is_zero()
}

fn is_free(e: &Quad, x: &Matrix<Fe>, n: usize) -> Result<bool> {
    let Some((r1, _)) = e.roots() else { return Ok(true) };
    let f = e.field();
    let k = x.sub(&Matrix::scalar(&f, x.rows(), r1)).kernel_basis()?;
    Ok(k.cols() == n)
}

impl EmbeddingPair {
    pub fn new(ea: &Arc<Quad>, eb: &Arc<Quad>, a: Matrix<Fe>, b: Matrix<Fe>) -> Result<Self> {
        let m = a.rows();
        if !m.is_multiple_of(2) || !a.is_square() || b.rows() != m || !b.is_square() {
            return Err(Error::Invalid("embedding matrices must be square of even size"));
        }
        let n = m / 2;
        if !satisfies_minpoly(ea, &a) || !satisfies_minpoly(eb, &b) {
            return Err(Error::Invalid("matrix does not satisfy its minimal polynomial"));
        }
        if !is_free(ea, &a, n)? || !is_free(eb, &b, n)? {
            return Err(Error::Invalid("embedding is not free"));
        }
        Ok(EmbeddingPair { ea: ea.clone(), eb: eb.clone(), a, b, n })
    }

    pub fn field(&self) -> Field {
        self.ea.field()
    }

    /// `w = B A + A^sigma B^sigma`.
    pub fn w(&self) -> Matrix<Fe> {
        let asig = conjugate_image(&self.ea, &self.a);
        let bsig = conjugate_image(&self.eb, &self.b);
        self.b.mul(&self.a).add(&asig.mul(&bsig))
    }

    /// Conjugate both embeddings: `(g A g^-1, h B h^-1)`.
    pub fn conjugate_each(&self, g: &Matrix<Fe>, g_inv: &Matrix<Fe>, h: &Matrix<Fe>, h_inv: &Matrix<Fe>) -> Self {
        EmbeddingPair { a: g.mul(&self.a).mul(g_inv), b: h.mul(&self.b).mul(h_inv), ..self.clone() }
    }

    /// Simultaneous conjugation by `g`.
    pub fn conjugate(&self, g: &Matrix<Fe>, g_inv: &Matrix<Fe>) -> Self {
        self.conjugate_each(g, g_inv, g, g_inv)
    }

    /// Invariant written in the fixed algebra of `(E_a, E_b)` itself.
    pub fn invariant(&self) -> Result<InvariantData> {
        let fixed = FixedAlgebra::of_pair(&self.ea, &self.eb)?;
        self.invariant_in(&fixed.alg.clone(), Identification::Direct)
    }

    /// Invariant written in `target`, whose generator has the same minimal
    /// polynomial as the fixed algebra's.
    pub fn invariant_in(&self, target: &Arc<Quad>, ident: Identification) -> Result<InvariantData> {
        let fixed = FixedAlgebra::of_pair(&self.ea, &self.eb)?;
        let alg = &fixed.alg;
        if !alg.tr().sub(target.tr()).is_zero() || !alg.nm().sub(target.nm()).is_zero() {
            return Err(Error::Invalid("target algebra does not match the fixed algebra"));
        }
        let c = fixed.c();
        let d = fixed.d();
        let m = 2 * self.n;
        // s = (c - w) / d, so charpoly(s)(T) = d^-2n charpoly(w)(c - d T)
        let chi = self.w().charpoly();
        let lifted = Poly::new(alg, chi.coeffs().iter().map(|x| QElem::scalar(alg, x.clone())).collect());
        let dinv = d.try_inv()?;
        let scale = crate::ring::pow(&dinv, m as u64);
        let p = lifted.compose_affine(&d.neg(), &c).scale(&scale);
        let root = p.sqrt()?;
        let delta = Poly::new(
            target,
            root.coeffs()
                .iter()
                .map(|x| {
                    let y = QElem::new(target, x.a.clone(), x.b.clone());
                    match ident {
                        Identification::Direct => y,
                        Identification::Conjugate => y.conj(),
                    }
                })
                .collect(),
        );
        if !symmetry_check(&delta) {
            return Err(Error::NormalizationFail);
        }
        let rs = is_regular_semisimple(&delta)?;
        let centralizer = if rs { Some(self.centralizer()?) } else { None };
        Ok(InvariantData { delta, rs, centralizer })
    }

    /// Commutant of `A` and `B`, split into fields.
    pub fn centralizer(&self) -> Result<Centralizer> {
        let f = self.field();
        let m = 2 * self.n;
        let mut cols = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                let mut e = Matrix::zeros(&f, m, m);
                e[(i, j)] = f.one();
                let ca = self.a.mul(&e).sub(&e.mul(&self.a));
                let cb = self.b.mul(&e).sub(&e.mul(&self.b));
                let mut v = ca.vec_cols();
                v.extend(cb.vec_cols());
                cols.push(v);
            }
        }
        let sys = Matrix::from_cols(&f, 2 * m * m, &cols);
        let ker = sys.kernel_basis()?;
        if ker.cols() != self.n {
            return Err(Error::WrongDimension { expected: self.n, found: ker.cols() });
        }
        let basis: Vec<Matrix<Fe>> =
            (0..ker.cols()).map(|k| Matrix::from_vec_cols(&f, m, m, &ker.col(k))).collect();
        let decomposition = decompose_commutative(&basis)?;
        Ok(Centralizer { basis, decomposition })
    }
}

/// Block-diagonal sum of two pairs over the same algebras.
pub fn direct_sum(p0: &EmbeddingPair, p1: &EmbeddingPair) -> Result<EmbeddingPair> {
    if p0.ea != p1.ea || p0.eb != p1.eb {
        return Err(Error::Invalid("pairs use different algebras"));
    }
    Ok(EmbeddingPair {
        ea: p0.ea.clone(),
        eb: p0.eb.clone(),
        a: p0.a.block_diag(&p1.a),
        b: p0.b.block_diag(&p1.b),
        n: p0.n + p1.n,
    })
}

/// A random element of `GL_m(O_F)` and its inverse, both exact: a product of
/// elementary matrices with short entries and a unit diagonal.
pub fn random_integral_unit(f: &Field, m: usize, rng: &mut ChaCha8Rng) -> (Matrix<Fe>, Matrix<Fe>) {
    let q = f.q() as u32;
    let mut g = Matrix::identity(f, m);
    let mut g_inv = Matrix::identity(f, m);
    let digit = |rng: &mut ChaCha8Rng| (rng.next_u32() % q) as u8;
    let diag: Vec<u8> = (0..m).map(|_| 1 + (rng.next_u32() % (q - 1)) as u8).collect();
    let d = Matrix::diagonal(f, &diag.iter().map(|&c| f.constant(c)).collect::<Vec<_>>());
    let d_inv = Matrix::diagonal(f, &diag.iter().map(|&c| f.constant(c).inv().unwrap()).collect::<Vec<_>>());
    g = g.mul(&d);
    g_inv = d_inv.mul(&g_inv);
    for _ in 0..3 * m * m {
        let i = (rng.next_u32() as usize) % m;
        let j = (rng.next_u32() as usize) % m;
        if i == j {
            continue;
        }
        let c = f.constant(digit(rng)).add(&Fe::monomial(*f, digit(rng), 1));
        let mut e = Matrix::identity(f, m);
        e[(i, j)] = c.clone();
        let mut e_inv = Matrix::identity(f, m);
        e_inv[(i, j)] = c.neg();
        g = g.mul(&e);
        g_inv = e_inv.mul(&g_inv);
    }
    (g, g_inv)
}

/// Standard embeddings conjugated independently by random integral units,
/// retried until regular semisimple.
pub fn random_pair(ea: &Arc<Quad>, eb: &Arc<Quad>, n: usize, seed: u64) -> Result<(EmbeddingPair, u32)> {
    random_pair_spread(ea, eb, n, seed, 0)
}

/// As [`random_pair`], but the second conjugator also carries a diagonal of
/// powers `π^k`, `0 <= k <= spread`, which moves the invariant further from
/// the integral one.
pub fn random_pair_spread(ea: &Arc<Quad>, eb: &Arc<Quad>, n: usize, seed: u64, spread: u32) -> Result<(EmbeddingPair, u32)> {
    let f = ea.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = EmbeddingPair::new(ea, eb, standard_embedding(ea, n), standard_embedding(eb, n))?;
    let fixed = FixedAlgebra::of_pair(ea, eb)?;
    for attempt in 0..64 {
        let (g, gi) = random_integral_unit(&f, 2 * n, &mut rng);
        let (mut h, mut hi) = random_integral_unit(&f, 2 * n, &mut rng);
        if spread > 0 {
            let ks: Vec<i64> = (0..2 * n).map(|_| (rng.next_u32() % (spread + 1)) as i64).collect();
            let d = Matrix::diagonal(&f, &ks.iter().map(|&k| f.pi_pow(k)).collect::<Vec<_>>());
            let d_inv = Matrix::diagonal(&f, &ks.iter().map(|&k| f.pi_pow(-k)).collect::<Vec<_>>());
            let (h2, h2i) = random_integral_unit(&f, 2 * n, &mut rng);
            h = h.mul(&d).mul(&h2);
            hi = h2i.mul(&d_inv).mul(&hi);
        }
        let p = base.conjugate_each(&g, &gi, &h, &hi);
        let delta = p.invariant_in(&fixed.alg, Identification::Direct)?;
        if delta.rs {
            return Ok((p, attempt));
        }
    }
    Err(Error::Timeout)
}

/// A pair `(E_0, E_3)` with `E_0` split whose invariant is `delta`.
///
/// `alpha_0` is `diag(I_n, 0)` and `alpha_3(z)` is `[[a, I], [tr a - nm - a^2, tr - a]]`.
/// With this shape `w = diag(a, a)`, so `a` is the companion matrix of the
/// polynomial whose roots are `c - d r` over the roots `r` of `delta`.
pub fn match_alpha(delta: &Poly<QElem>, e3: &Arc<Quad>) -> Result<EmbeddingPair> {
    let f = e3.field();
    let n = delta.degree() as usize;
    let e0 = Quad::standard(f, Kind::Split)?;
    let fixed = FixedAlgebra::of_pair(&e0, e3)?;
    let (c, d) = (fixed.c(), fixed.d());
    // bring delta into the fixed algebra's coordinates
    let local = Poly::new(
        &fixed.alg,
        delta
            .coeffs()
            .iter()
            .map(|x| {
                let y = match SPLIT_SIDE_IDENTIFICATION {
                    Identification::Direct => x.clone(),
                    Identification::Conjugate => x.conj(),
                };
                QElem::new(&fixed.alg, y.a, y.b)
            })
            .collect(),
    );
    // chi(X) = (-d)^n delta((c - X) / d)
    let dinv = d.try_inv()?;
    let lead = crate::ring::pow(&d.neg(), n as u64);
    let chi = local.compose_affine(&dinv.neg(), &c.mul(&dinv)).scale(&lead);
    let mut coeffs = Vec::with_capacity(n + 1);
    for x in chi.coeffs() {
        if !x.b.is_zero() {
            return Err(Error::NotFound);
        }
        coeffs.push(x.a.clone());
    }
    let chi_f = Poly::new(&f, coeffs);
    let mut a = Matrix::zeros(&f, n, n);
    for i in 1..n {
        a[(i, i - 1)] = f.one();
    }
    for i in 0..n {
        a[(i, n - 1)] = chi_f.coeff(i).neg();
    }
    let id = Matrix::identity(&f, n);
    let zero = Matrix::zeros(&f, n, n);
    let alpha0 = id.hstack(&zero).vstack(&zero.hstack(&zero));
    let lower_left = a.scale(e3.tr()).sub(&Matrix::scalar(&f, n, e3.nm())).sub(&a.mul(&a));
    let lower_right = Matrix::scalar(&f, n, e3.tr()).sub(&a);
    let alpha3 = a.hstack(&id).vstack(&lower_left.hstack(&lower_right));
    let pair = EmbeddingPair::new(&e0, e3, alpha0, alpha3)?;
    let check = pair.invariant_in(e3, SPLIT_SIDE_IDENTIFICATION)?;
    if check.delta != *delta {
        return Err(Error::NotFound);
    }
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(q: u8, k1: Kind, k2: Kind) -> (Arc<Quad>, Arc<Quad>) {
        let f = Field::new(q, 30).unwrap();
        (Quad::standard(f, k1).unwrap(), Quad::standard(f, k2).unwrap())
    }

    #[test]
    fn w_commutes_with_both_embeddings() {
        let (e1, e2) = setup(3, Kind::Unramified, Kind::Ramified);
        for seed in 0..10 {
            let (p, _) = random_pair(&e1, &e2, 1, seed).unwrap();
            let w = p.w();
            assert!(w.commutes_with(&p.a) && w.commutes_with(&p.b));
        }
    }

    #[test]
    fn d_is_a_unit_when_both_unramified() {
        let (e1, e2) = setup(5, Kind::Unramified, Kind::Unramified);
        let fx = FixedAlgebra::of_pair(&e1, &e2).unwrap();
        assert_eq!(fx.d().norm_valuation(), Some(0));
        assert!(fx.d().conj().add(&fx.d()).is_zero());
    }

    #[test]
    fn invariant_is_conjugation_invariant() {
        let (e1, e2) = setup(3, Kind::Unramified, Kind::Unramified);
        let f = e1.field();
        let (p, _) = random_pair(&e1, &e2, 2, 7).unwrap();
        let base = p.invariant().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..3 {
            let (g, gi) = random_integral_unit(&f, 4, &mut rng);
            assert_eq!(p.conjugate(&g, &gi).invariant().unwrap().delta, base.delta);
        }
    }

    #[test]
    fn identical_embeddings_are_not_regular() {
        let (e1, _) = setup(3, Kind::Unramified, Kind::Unramified);
        let a = standard_embedding(&e1, 1);
        let p = EmbeddingPair::new(&e1, &e1, a.clone(), a).unwrap();
        assert!(!p.invariant().unwrap().rs);
    }

    #[test]
    fn direct_sum_multiplies_invariants() {
        let (e1, e2) = setup(3, Kind::Unramified, Kind::Ramified);
        let (p0, _) = random_pair(&e1, &e2, 1, 1).unwrap();
        let (p1, _) = random_pair(&e1, &e2, 1, 2).unwrap();
        let s = direct_sum(&p0, &p1).unwrap();
        let d = s.invariant().unwrap().delta;
        assert_eq!(d, p0.invariant().unwrap().delta.mul(&p1.invariant().unwrap().delta));
    }

    #[test]
    fn centralizer_of_rank_one_pair_is_scalars() {
        let (e1, e2) = setup(5, Kind::Ramified, Kind::Unramified);
        let (p, _) = random_pair(&e1, &e2, 1, 3).unwrap();
        let c = p.centralizer().unwrap();
        assert_eq!(c.basis.len(), 1);
        let g = &c.gammas()[0];
        let f = e1.field();
        assert!(g.sub(&Matrix::scalar(&f, 2, &f.pi_pow(1))).is_zero());
    }

    #[test]
    fn match_alpha_round_trips() {
        for (k1, k2) in [(Kind::Unramified, Kind::Ramified), (Kind::Unramified, Kind::Unramified)] {
            let (e1, e2) = setup(3, k1, k2);
            let e3 = FixedAlgebra::of_pair(&e1, &e2).unwrap().alg;
            for n in 1..=2 {
                let (p, _) = random_pair(&e1, &e2, n, 11).unwrap();
                let inv = p.invariant().unwrap();
                let alpha = match_alpha(&inv.delta, &e3).unwrap();
                let ia = alpha.invariant_in(&e3, SPLIT_SIDE_IDENTIFICATION).unwrap();
                assert_eq!(ia.delta, inv.delta);
                assert!(ia.rs);
            }
        }
    }
}
