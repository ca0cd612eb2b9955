//! Étale algebras over F: root finding and factorization, the fixed algebra of
//! a pair of quadratic algebras, polynomials over it, and splitting commutative
//! matrix algebras into fields.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::Matrix;
use crate::poly::Poly;
use crate::quad::{Kind, QElem, Quad};
use crate::ring::Ring;

fn residue_poly(p: &Poly<Fe>) -> Vec<u8> {
    (0..=p.degree().max(0) as usize).map(|i| p.coeff(i).coeff(0)).collect()
}

fn eval_residue(field: Field, r: &[u8], x: u8) -> u8 {
    let gf = field.gf();
    r.iter().rev().fold(0u8, |acc, &c| gf.add(gf.mul(acc, x), c))
}

fn residue_derivative(field: Field, r: &[u8]) -> Vec<u8> {
    let gf = field.gf();
    r.iter().enumerate().skip(1).map(|(i, &c)| gf.mul(c, gf.from_int(i as i64))).collect()
}

/// Divide by the power of pi that makes the smallest coefficient valuation 0.
fn primitive_part(p: &Poly<Fe>) -> Result<Poly<Fe>> {
    let v = p.coeffs().iter().filter_map(|c| c.valuation()).min().ok_or(Error::FactorFail)?;
    Ok(p.map_coeffs(|c| c.shift(-v)))
}

fn newton_lift(p: &Poly<Fe>, x0: Fe) -> Result<Fe> {
    let dp = p.derivative();
    let mut x = x0;
    for _ in 0..64 {
        let fx = p.eval(&x);
        if fx.is_zero() {
            return Ok(x);
        }
        let step = fx.div(&dp.eval(&x))?;
        if step.is_zero() {
            return Ok(x);
        }
        x = x.sub(&step);
    }
    Err(Error::FactorFail)
}

/// Roots in O_F of a primitive polynomial (minimal coefficient valuation 0).
fn integral_roots(p: &Poly<Fe>, depth: u32, out: &mut Vec<Fe>) -> Result<()> {
    let field = *p.ctx();
    if depth > 2 * field.precision() {
        return Err(Error::FactorFail);
    }
    let r = residue_poly(p);
    let dr = residue_derivative(field, &r);
    for u in 0..field.q() {
        if eval_residue(field, &r, u) != 0 {
            continue;
        }
        let c = field.constant(u);
        if eval_residue(field, &dr, u) != 0 {
            out.push(newton_lift(p, c)?);
        } else {
            let shifted = primitive_part(&p.compose_affine(&field.pi_pow(1), &c))?;
            let mut sub = Vec::new();
            integral_roots(&shifted, depth + 1, &mut sub)?;
            out.extend(sub.into_iter().map(|y| c.add(&y.shift(1))));
        }
    }
    Ok(())
}

/// All roots in F of a separable polynomial.
pub fn roots(p: &Poly<Fe>) -> Result<Vec<Fe>> {
    let field = *p.ctx();
    let mut p = p.clone();
    let mut out = Vec::new();
    // a constant term that vanishes to working precision is the root 0 of a
    // separable polynomial
    if p.coeff(0).is_zero() && p.degree() > 0 {
        if p.coeff(1).is_zero() {
            return Err(Error::FactorFail);
        }
        out.push(field.zero());
        p = Poly::new(&field, p.coeffs()[1..].to_vec());
    }
    if p.degree() <= 0 {
        return Ok(out);
    }
    integral_roots(&primitive_part(&p)?, 0, &mut out)?;
    let rev = Poly::new(&field, p.coeffs().iter().rev().cloned().collect());
    let mut inv = Vec::new();
    integral_roots(&primitive_part(&rev)?, 0, &mut inv)?;
    for y in inv {
        if y.valuation().is_some_and(|v| v > 0) {
            out.push(y.inv()?);
        }
    }
    Ok(out)
}

/// Factorization of a squarefree monic polynomial over F into monic
/// irreducibles, each with multiplicity 1.
///
/// Linear factors come from Hensel-lifted roots; what remains must have degree
/// at most 3 (and is then irreducible), otherwise `FactorFail`.
pub fn hensel_factor(p: &Poly<Fe>) -> Result<Vec<(Poly<Fe>, u32)>> {
    let field = *p.ctx();
    if !p.is_monic() {
        return Err(Error::Invalid("polynomial must be monic"));
    }
    let rs = roots(p)?;
    let mut rest = p.clone();
    let mut out = Vec::new();
    for r in rs {
        let l = Poly::linear(&field, &r);
        let (q, rem) = rest.divrem_monic(&l)?;
        if !rem.coeffs().iter().all(|c| c.is_zero()) {
            return Err(Error::FactorFail);
        }
        rest = q;
        out.push((l, 1));
    }
    match rest.degree() {
        0 => {}
        2 | 3 => out.push((rest, 1)),
        _ => return Err(Error::FactorFail),
    }
    Ok(out)
}

/// The fixed algebra of `sigma_a (x) sigma_b` inside `E_a (x) E_b`, presented
/// by the generator `t = z_a (x) z_b + z_a^sigma (x) z_b^sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedAlgebra {
    pub ea: Arc<Quad>,
    pub eb: Arc<Quad>,
    pub alg: Arc<Quad>,
}

impl FixedAlgebra {
    /// The algebra for two quadratic field extensions, at least one unramified.
    pub fn of_fields(ea: &Arc<Quad>, eb: &Arc<Quad>) -> Result<FixedAlgebra> {
        if ea.kind() == Kind::Split || eb.kind() == Kind::Split {
            return Err(Error::SplitInput);
        }
        if ea.kind() == Kind::Ramified && eb.kind() == Kind::Ramified {
            return Err(Error::BothRamified);
        }
        Self::of_pair(ea, eb)
    }

    /// No restrictions beyond maximality of `O_F[t]`.
    pub fn of_pair(ea: &Arc<Quad>, eb: &Arc<Quad>) -> Result<FixedAlgebra> {
        let field = ea.field();
        let (ta, na, tb, nb) = (ea.tr(), ea.nm(), eb.tr(), eb.nm());
        // t^2 - ta tb t + (nb ta^2 + na tb^2 - 4 na nb) = 0
        let tr = ta.mul(tb);
        let nm = nb.mul(&ta.mul(ta)).add(&na.mul(&tb.mul(tb))).sub(&field.int(4).mul(&na.mul(nb)));
        let alg = Quad::from_minpoly(field, tr, nm)?;
        Ok(FixedAlgebra { ea: ea.clone(), eb: eb.clone(), alg })
    }

    pub fn t(&self) -> QElem {
        QElem::generator(&self.alg)
    }

    /// `c = -(z_a (x) z_b^sigma + z_a^sigma (x) z_b) = t - tr_a tr_b`.
    pub fn c(&self) -> QElem {
        self.t().sub(&QElem::scalar(&self.alg, self.alg.tr().clone()))
    }

    /// `d = (z_a - z_a^sigma) (x) (z_b - z_b^sigma) = 2t - tr_a tr_b`.
    pub fn d(&self) -> QElem {
        let t = self.t();
        t.add(&t).sub(&QElem::scalar(&self.alg, self.alg.tr().clone()))
    }
}

/// Exponent `h` with `|Disc_{E/F}|_F = q^(h/2)`.
pub fn half_abs_disc(e: &Quad) -> i64 {
    -2 * e.disc_valuation()
}

/// `(-1)^n P(1 - T) == P^sigma(T)` coefficientwise.
pub fn symmetry_check(p: &Poly<QElem>) -> bool {
    let alg = p.ctx();
    let n = p.degree().max(0);
    let one = QElem::one(alg);
    let mut lhs = p.compose_affine(&one.neg(), &one);
    if n % 2 == 1 {
        lhs = lhs.neg();
    }
    lhs == p.map_coeffs(|c| c.conj())
}

/// Separable with invertible constant term, in each factor of the algebra.
pub fn is_regular_semisimple(p: &Poly<QElem>) -> Result<bool> {
    if p.degree() < 1 {
        return Ok(false);
    }
    let c0 = p.coeff(0).norm();
    if c0.is_zero() {
        return Ok(false);
    }
    let res = p.resultant(&p.derivative())?;
    Ok(!res.norm().is_zero())
}

/// `eta(det h)` for an invertible matrix over the algebra.
pub fn eta_det(h: &Matrix<QElem>) -> Result<i8> {
    h.det()?.eta()
}

/// Minimal polynomial of a matrix over F, from the first linear dependency
/// among its powers.
pub fn matrix_minpoly(y: &Matrix<Fe>) -> Result<Poly<Fe>> {
    let f = *y.ctx();
    let n = y.rows();
    let mut powers = vec![Matrix::identity(&f, n)];
    loop {
        let k = powers.len();
        let next = powers[k - 1].mul(y);
        powers.push(next);
        let cols: Vec<Vec<Fe>> = powers.iter().map(|p| p.vec_cols()).collect();
        let m = Matrix::from_cols(&f, n * n, &cols);
        let ker = m.kernel_basis()?;
        if ker.cols() > 0 {
            let v = ker.col(0);
            let lead = v[k].clone();
            let inv = lead.inv()?;
            return Ok(Poly::new(&f, v.iter().map(|c| c.mul(&inv)).collect()));
        }
        if k > n {
            return Err(Error::FactorFail);
        }
    }
}

/// Evaluate a polynomial at a square matrix.
pub fn poly_at_matrix(p: &Poly<Fe>, y: &Matrix<Fe>) -> Matrix<Fe> {
    let f = *y.ctx();
    let n = y.rows();
    let mut acc = Matrix::zeros(&f, n, n);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(y).add(&Matrix::scalar(&f, n, c));
    }
    acc
}

/// One field factor of a commutative étale matrix algebra.
#[derive(Clone, Debug)]
pub struct FieldFactor {
    pub degree: usize,
    pub ramification: u32,
    /// Minimal polynomial of the primitive element on this factor.
    pub minpoly: Poly<Fe>,
    pub idempotent: Matrix<Fe>,
    /// Acts as a uniformizer of this factor and as the identity elsewhere.
    pub uniformizer: Matrix<Fe>,
}

/// A commutative étale F-algebra given by commuting matrices, split into fields.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub dim: usize,
    pub primitive: Matrix<Fe>,
    pub minpoly: Poly<Fe>,
    pub factors: Vec<FieldFactor>,
}

/// Multiplication-by-`x` matrix on `F[T]/(m)` in the basis `1, T, ...`.
fn mult_matrix(x: &Poly<Fe>, m: &Poly<Fe>) -> Result<Matrix<Fe>> {
    let f = *m.ctx();
    let d = m.degree() as usize;
    let mut cols = Vec::with_capacity(d);
    for i in 0..d {
        let mut mono = vec![f.zero(); i + 1];
        mono[i] = f.one();
        let prod = x.mul(&Poly::new(&f, mono)).divrem_monic(m)?.1;
        cols.push((0..d).map(|k| prod.coeff(k)).collect::<Vec<_>>());
    }
    Ok(Matrix::from_cols(&f, d, &cols))
}

/// A uniformizer of the field `F[T]/(m)` (degree 1 to 3) as a polynomial in
/// `T`, together with the ramification index.
pub fn local_uniformizer(m: &Poly<Fe>) -> Result<(Poly<Fe>, u32)> {
    let f = *m.ctx();
    let d = m.degree() as usize;
    if d == 1 {
        return Ok((Poly::constant(&f, f.pi_pow(1)), 1));
    }
    if d > 3 {
        return Err(Error::FactorFail);
    }
    let mut x = Poly::x(&f);
    for _ in 0..4 * f.precision() {
        let cp = mult_matrix(&x, m)?.charpoly();
        let v = cp.coeff(0).valuation().ok_or(Error::FactorFail)?;
        let (k, r) = (v.div_euclid(d as i64), v.rem_euclid(d as i64));
        if r != 0 {
            // totally ramified: x has valuation v in K, solve a v - d b = 1
            let a = (1..d as i64).find(|a| (a * v).rem_euclid(d as i64) == 1).unwrap();
            let b = (a * v - 1) / d as i64;
            let mut u = Poly::constant(&f, f.pi_pow(-b));
            for _ in 0..a {
                u = u.mul(&x).divrem_monic(m)?.1;
            }
            return Ok((u, d as u32));
        }
        let y = x.map_coeffs(|c| c.shift(-k));
        let cpy = mult_matrix(&y, m)?.charpoly();
        let res = residue_poly(&cpy);
        let root = (0..f.q()).find(|&u| eval_residue(f, &res, u) == 0);
        match root {
            None => return Ok((Poly::constant(&f, f.pi_pow(1)), 1)),
            Some(c) => x = y.sub(&Poly::constant(&f, f.constant(c))),
        }
    }
    Err(Error::FactorFail)
}

/// Split the commutative algebra spanned by `basis` (which must be étale of
/// dimension `basis.len()`) into its field factors.
pub fn decompose_commutative(basis: &[Matrix<Fe>]) -> Result<Decomposition> {
    let dim = basis.len();
    let f = *basis[0].ctx();
    let size = basis[0].rows();
    let mut candidates: Vec<Matrix<Fe>> = basis.to_vec();
    let mut weighted = basis[0].clone();
    for (k, b) in basis.iter().enumerate().skip(1) {
        weighted = weighted.add(&b.scale(&f.int(k as i64 + 1)));
    }
    candidates.push(weighted);
    for s in 1..6i64 {
        let mut c = basis[0].scale(&f.pi_pow(s));
        for (k, b) in basis.iter().enumerate().skip(1) {
            c = c.add(&b.scale(&f.int(k as i64).add(&f.pi_pow(k as i64 * s))));
        }
        candidates.push(c);
    }
    let mut chosen = None;
    for y in candidates {
        let mp = matrix_minpoly(&y)?;
        if mp.degree() as usize == dim {
            chosen = Some((y, mp));
            break;
        }
    }
    let (y, minpoly) = chosen.ok_or(Error::FactorFail)?;
    let parts = hensel_factor(&minpoly)?;
    let mut kernels = Vec::new();
    for (m, _) in &parts {
        kernels.push(poly_at_matrix(m, &y).kernel_basis()?);
    }
    let total: usize = kernels.iter().map(|k| k.cols()).sum();
    if total != size {
        return Err(Error::FactorFail);
    }
    let mut p = kernels[0].clone();
    for k in &kernels[1..] {
        p = p.hstack(k);
    }
    let pinv = p.inverse()?;
    let mut factors = Vec::new();
    let mut offset = 0;
    for ((m, _), k) in parts.iter().zip(&kernels) {
        let mut sel = Matrix::zeros(&f, size, size);
        for i in offset..offset + k.cols() {
            sel[(i, i)] = f.one();
        }
        offset += k.cols();
        let e = p.mul(&sel).mul(&pinv);
        let (u, ram) = local_uniformizer(m)?;
        let id = Matrix::identity(&f, size);
        let unif = poly_at_matrix(&u, &y).mul(&e).add(&id.sub(&e));
        factors.push(FieldFactor { degree: m.degree() as usize, ramification: ram, minpoly: m.clone(), idempotent: e, uniformizer: unif });
    }
    Ok(Decomposition { dim, primitive: y, minpoly, factors })
}

/// `E_3[T]/(delta)` as a 2n-dimensional F-space with basis `T^i, t T^i`.
fn e3_coords(p: &Poly<QElem>, n: usize) -> Vec<Fe> {
    let mut v = Vec::with_capacity(2 * n);
    for i in 0..n {
        v.push(p.coeff(i).a.clone());
    }
    for i in 0..n {
        v.push(p.coeff(i).b.clone());
    }
    v
}

fn e3_basis_elem(alg: &Arc<Quad>, n: usize, k: usize) -> Poly<QElem> {
    let f = alg.field();
    let mut c = vec![QElem::zero(alg); n];
    c[k % n] = if k < n { QElem::one(alg) } else { QElem::new(alg, f.zero(), f.one()) };
    Poly::new(alg, c)
}

/// The σ-fixed subalgebra of `E_3[T]/(delta)` (with `T -> 1 - T`) and its
/// decomposition into fields.
#[derive(Clone, Debug)]
pub struct LDelta {
    /// Fixed elements, as polynomials mod delta.
    pub basis: Vec<Poly<QElem>>,
    pub decomposition: Decomposition,
}

pub fn build_l_delta(delta: &Poly<QElem>) -> Result<LDelta> {
    let alg = delta.ctx().clone();
    let f = alg.field();
    let n = delta.degree() as usize;
    if !symmetry_check(delta) {
        return Err(Error::Invalid("polynomial is not symmetric"));
    }
    let one = QElem::one(&alg);
    let reduce = |p: &Poly<QElem>| -> Result<Poly<QElem>> { Ok(p.divrem_monic(delta)?.1) };
    // matrix of the involution on the F-basis
    let mut sig_cols = Vec::with_capacity(2 * n);
    for k in 0..2 * n {
        let b = e3_basis_elem(&alg, n, k);
        let s = reduce(&b.map_coeffs(|c| c.conj()).compose_affine(&one.neg(), &one))?;
        sig_cols.push(e3_coords(&s, n));
    }
    let sig = Matrix::from_cols(&f, 2 * n, &sig_cols);
    let fixed = sig.sub(&Matrix::identity(&f, 2 * n)).kernel_basis()?;
    if fixed.cols() != n {
        return Err(Error::WrongDimension { expected: n, found: fixed.cols() });
    }
    let mut basis = Vec::with_capacity(n);
    let mut mats = Vec::with_capacity(n);
    for j in 0..n {
        let v = fixed.col(j);
        let coeffs: Vec<QElem> = (0..n).map(|i| QElem::new(&alg, v[i].clone(), v[n + i].clone())).collect();
        let g = Poly::new(&alg, coeffs);
        let mut cols = Vec::with_capacity(2 * n);
        for k in 0..2 * n {
            cols.push(e3_coords(&reduce(&g.mul(&e3_basis_elem(&alg, n, k)))?, n));
        }
        mats.push(Matrix::from_cols(&f, 2 * n, &cols));
        basis.push(g);
    }
    let decomposition = decompose_commutative(&mats)?;
    Ok(LDelta { basis, decomposition })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u8) -> Field {
        Field::new(q, 40).unwrap()
    }

    #[test]
    fn roots_and_factors() {
        let k = f(3);
        let unram = Poly::new(&k, vec![k.int(1), k.zero(), k.one()]); // T^2 + 1
        assert_eq!(hensel_factor(&unram).unwrap().len(), 1);
        let split = Poly::new(&k, vec![k.int(-1), k.zero(), k.one()]);
        let fs = hensel_factor(&split).unwrap();
        assert_eq!(fs.len(), 2);
        let ram = Poly::new(&k, vec![k.pi_pow(1).neg(), k.zero(), k.one()]);
        assert_eq!(hensel_factor(&ram).unwrap().len(), 1);
        // close roots 1 and 1 + pi^3
        let a = k.one();
        let b = k.one().add(&k.pi_pow(3));
        let p = Poly::linear(&k, &a).mul(&Poly::linear(&k, &b));
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 2);
        for x in r {
            assert!(p.eval(&x).is_zero());
        }
    }

    #[test]
    fn fixed_algebra_kinds() {
        let k = f(3);
        let u = Quad::standard(k, Kind::Unramified).unwrap();
        let r = Quad::standard(k, Kind::Ramified).unwrap();
        assert_eq!(FixedAlgebra::of_fields(&u, &u).unwrap().alg.kind(), Kind::Split);
        assert_eq!(FixedAlgebra::of_fields(&u, &r).unwrap().alg.kind(), Kind::Ramified);
        assert_eq!(FixedAlgebra::of_fields(&r, &r), Err(Error::BothRamified));
        let s = Quad::standard(k, Kind::Split).unwrap();
        assert_eq!(FixedAlgebra::of_fields(&s, &s), Err(Error::SplitInput));
        for q in [2u8, 4, 8] {
            let u = Quad::standard(f(q), Kind::Unramified).unwrap();
            assert_eq!(FixedAlgebra::of_fields(&u, &u).unwrap().alg.kind(), Kind::Split);
        }
    }

    #[test]
    fn d_is_anti_invariant_with_expected_size() {
        let k = f(5);
        let u = Quad::standard(k, Kind::Unramified).unwrap();
        let r = Quad::standard(k, Kind::Ramified).unwrap();
        for (a, b, h) in [(&u, &u, 0), (&u, &r, -1)] {
            let fa = FixedAlgebra::of_fields(a, b).unwrap();
            let d = fa.d();
            assert_eq!(d.conj(), d.neg());
            assert_eq!(d.half_abs().unwrap(), (half_abs_disc(a) + half_abs_disc(b)) / 2);
            assert_eq!(d.half_abs().unwrap(), h);
        }
    }

    #[test]
    fn symmetry_examples() {
        let k = f(3);
        let u = Quad::standard(k, Kind::Unramified).unwrap();
        let fa = FixedAlgebra::of_fields(&u, &u).unwrap();
        let e3 = fa.alg.clone();
        let x = QElem::from_components(&e3, &k.pi_pow(1), &k.one().sub(&k.pi_pow(1))).unwrap();
        let p = Poly::linear(&e3, &x);
        assert!(symmetry_check(&p));
        assert!(is_regular_semisimple(&p).unwrap());
        let t2 = Poly::x(&e3).mul(&Poly::x(&e3));
        assert!(!symmetry_check(&t2));
    }

    #[test]
    fn l_delta_of_degree_one_is_f() {
        let k = f(3);
        let u = Quad::standard(k, Kind::Unramified).unwrap();
        let e3 = FixedAlgebra::of_fields(&u, &u).unwrap().alg;
        let x = QElem::from_components(&e3, &k.pi_pow(1), &k.one().sub(&k.pi_pow(1))).unwrap();
        let l = build_l_delta(&Poly::linear(&e3, &x)).unwrap();
        assert_eq!(l.decomposition.factors.len(), 1);
        assert_eq!(l.decomposition.factors[0].degree, 1);
    }

    #[test]
    fn uniformizers_of_quadratic_fields() {
        let k = f(3);
        let ram = Poly::new(&k, vec![k.pi_pow(3).neg(), k.zero(), k.one()]);
        let (u, e) = local_uniformizer(&ram).unwrap();
        assert_eq!(e, 2);
        // u = T / pi, whose square is pi
        let sq = u.mul(&u).divrem_monic(&ram).unwrap().1;
        assert_eq!(sq, Poly::constant(&k, k.pi_pow(1)));
        let unr = Poly::new(&k, vec![k.int(1), k.zero(), k.one()]);
        assert_eq!(local_uniformizer(&unr).unwrap().1, 1);
        let k2 = f(2);
        let wild = Poly::new(&k2, vec![k2.pi_pow(1), k2.pi_pow(1), k2.one()]);
        assert_eq!(local_uniformizer(&wild).unwrap().1, 2);
    }
}
