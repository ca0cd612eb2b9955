//! Quadratic étale algebras `F[z]/(z^2 - tr z + nm)` and their elements.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::ring::{Dvr, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Split,
    Unramified,
    Ramified,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Split => "split",
            Kind::Unramified => "unramified",
            Kind::Ramified => "ramified",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s {
            "split" => Ok(Kind::Split),
            "unramified" => Ok(Kind::Unramified),
            "ramified" => Ok(Kind::Ramified),
            _ => Err(Error::Invalid("kind must be split, unramified or ramified")),
        }
    }
}

/// A quadratic étale algebra presented by the minimal polynomial
/// `T^2 - tr T + nm` of its generator `z`, with `O_F[z]` the maximal order.
///
/// When split, `roots` holds the two images of `z` under the two projections
/// to `F`; the conjugation swaps them.
#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    field: Field,
    kind: Kind,
    tr: Fe,
    nm: Fe,
    roots: Option<(Fe, Fe)>,
}

/// Smallest nonsquare unit of F_q (odd q).
fn nonsquare(field: Field) -> u8 {
    let gf = field.gf();
    (1..field.q()).find(|&c| !gf.is_square(c)).expect("odd q has nonsquares")
}

/// Smallest residue constant of absolute trace 1 (even q).
fn trace_one(field: Field) -> u8 {
    let gf = field.gf();
    (1..field.q()).find(|&c| gf.abs_trace(c) == 1).expect("trace is onto")
}

impl Quad {
    /// The standard model of each kind: split `z = (1, 0)`; unramified
    /// `z^2 = c` (odd q) or `z^2 = z + c` (even q); ramified `z^2 = pi`.
    pub fn standard(field: Field, kind: Kind) -> Result<Arc<Quad>> {
        let q = match kind {
            Kind::Split => Quad {
                field,
                kind,
                tr: field.one(),
                nm: field.zero(),
                roots: Some((field.one(), field.zero())),
            },
            Kind::Unramified if field.odd() => {
                Quad { field, kind, tr: field.zero(), nm: field.constant(nonsquare(field)).neg(), roots: None }
            }
            Kind::Unramified => {
                Quad { field, kind, tr: field.one(), nm: field.constant(trace_one(field)), roots: None }
            }
            Kind::Ramified if field.odd() => Quad { field, kind, tr: field.zero(), nm: field.pi_pow(1).neg(), roots: None },
            Kind::Ramified => return Err(Error::UnsupportedRamified),
        };
        Ok(Arc::new(q))
    }

    /// Classify `T^2 - tr T + nm` (exact coefficients) and build the algebra.
    ///
    /// Fails with `NonMaximalOrder` when `O_F[z]` is not the maximal order.
    pub fn from_minpoly(field: Field, tr: Fe, nm: Fe) -> Result<Arc<Quad>> {
        if tr.val_lower() < 0 || nm.val_lower() < 0 {
            return Err(Error::NonMaximalOrder);
        }
        let kind;
        if field.odd() {
            let disc = tr.mul(&tr).sub(&nm.mul(&field.int(4)));
            match disc.valuation() {
                None => return Err(Error::Invalid("inseparable minimal polynomial")),
                Some(0) => {
                    let lead = disc.leading().unwrap();
                    kind = if field.gf().is_square(lead) { Kind::Split } else { Kind::Unramified };
                }
                Some(1) => kind = Kind::Ramified,
                Some(_) => return Err(Error::NonMaximalOrder),
            }
        } else {
            if tr.valuation() != Some(0) {
                return Err(Error::NonMaximalOrder);
            }
            // T = tr U turns the polynomial into tr^2 (U^2 + U + nm/tr^2)
            let c = nm.div(&tr.mul(&tr))?;
            let r = c.truncate(1)?;
            kind = if field.gf().abs_trace(r.coeff(0)) == 0 { Kind::Split } else { Kind::Unramified };
        }
        if kind == Kind::Ramified && !tr.is_exact_zero() {
            return Err(Error::Invalid("ramified presentations must have zero trace"));
        }
        let roots = if kind == Kind::Split { Some(split_roots(field, &tr, &nm)?) } else { None };
        Ok(Arc::new(Quad { field, kind, tr, nm, roots }))
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn kind(&self) -> Kind {
        self.kind
    }
    pub fn tr(&self) -> &Fe {
        &self.tr
    }
    pub fn nm(&self) -> &Fe {
        &self.nm
    }
    pub fn is_field(&self) -> bool {
        self.kind != Kind::Split
    }
    /// The two images of the generator in `F x F` (split algebras only).
    pub fn roots(&self) -> Option<&(Fe, Fe)> {
        self.roots.as_ref()
    }

    /// `v(Disc)` in `F`: 1 for ramified, 0 otherwise.
    pub fn disc_valuation(&self) -> i64 {
        if self.kind == Kind::Ramified {
            1
        } else {
            0
        }
    }

    /// Exponent `h` with `|z - z^sigma|_F = q^(h/2)`, where the absolute value
    /// on the algebra is `|Nm|^(1/2)`.
    pub fn half_abs_generator_difference(&self) -> i64 {
        -self.disc_valuation()
    }
}

/// Roots of a split `T^2 - tr T + nm`, in a fixed order.
fn split_roots(field: Field, tr: &Fe, nm: &Fe) -> Result<(Fe, Fe)> {
    let p = crate::poly::Poly::new(&field, alloc::vec![nm.clone(), tr.neg(), field.one()]);
    let mut r = crate::etale::roots(&p)?;
    if r.len() != 2 {
        return Err(Error::FactorFail);
    }
    // order by residue encoding then by full text, which is deterministic
    r.sort_by(|a, b| alloc::format!("{a}").cmp(&alloc::format!("{b}")));
    Ok((r[0].clone(), r[1].clone()))
}

/// `a + b z` in a quadratic étale algebra.
#[derive(Clone, PartialEq)]
pub struct QElem {
    pub a: Fe,
    pub b: Fe,
    alg: Arc<Quad>,
}

impl fmt::Debug for QElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) + ({:?})z", self.a, self.b)
    }
}

impl QElem {
    pub fn new(alg: &Arc<Quad>, a: Fe, b: Fe) -> QElem {
        QElem { a, b, alg: alg.clone() }
    }
    pub fn scalar(alg: &Arc<Quad>, a: Fe) -> QElem {
        QElem { a, b: alg.field.zero(), alg: alg.clone() }
    }
    pub fn generator(alg: &Arc<Quad>) -> QElem {
        QElem { a: alg.field.zero(), b: alg.field.one(), alg: alg.clone() }
    }
    /// Element with images `(x, y)` under the two projections of a split algebra.
    pub fn from_components(alg: &Arc<Quad>, x: &Fe, y: &Fe) -> Result<QElem> {
        let (r1, r2) = alg.roots.as_ref().ok_or(Error::Invalid("algebra is not split"))?;
        // a + b r1 = x, a + b r2 = y
        let b = x.sub(y).div(&r1.sub(r2))?;
        let a = x.sub(&b.mul(r1));
        Ok(QElem::new(alg, a, b))
    }
    pub fn alg(&self) -> &Arc<Quad> {
        &self.alg
    }
    pub fn conj(&self) -> QElem {
        QElem { a: self.a.add(&self.b.mul(&self.alg.tr)), b: self.b.neg(), alg: self.alg.clone() }
    }
    pub fn norm(&self) -> Fe {
        let QElem { a, b, alg } = self;
        a.mul(a).add(&a.mul(b).mul(&alg.tr)).add(&b.mul(b).mul(&alg.nm))
    }
    pub fn trace(&self) -> Fe {
        self.a.add(&self.a).add(&self.b.mul(&self.alg.tr))
    }
    /// Images under the two projections (split algebras only).
    pub fn components(&self) -> Result<(Fe, Fe)> {
        let (r1, r2) = self.alg.roots.as_ref().ok_or(Error::Invalid("algebra is not split"))?;
        Ok((self.a.add(&self.b.mul(r1)), self.a.add(&self.b.mul(r2))))
    }
    /// `v(Nm x)`, certified.
    pub fn norm_valuation(&self) -> Option<i64> {
        self.norm().valuation()
    }
    /// The quadratic character: `(-1)^[O : x O]` with the index counted over `O_F`.
    pub fn eta(&self) -> Result<i8> {
        let v = self.norm_valuation().ok_or(Error::PrecisionExhausted)?;
        Ok(if v.rem_euclid(2) == 0 { 1 } else { -1 })
    }
    /// Exponent `h` with `|x|_F = |Nm x|^(1/2) = q^(h/2)`.
    pub fn half_abs(&self) -> Result<i64> {
        Ok(-self.norm_valuation().ok_or(Error::PrecisionExhausted)?)
    }
    pub fn map_fe(&self, f: impl Fn(&Fe) -> Fe) -> QElem {
        QElem { a: f(&self.a), b: f(&self.b), alg: self.alg.clone() }
    }
}

impl Ring for QElem {
    type Ctx = Arc<Quad>;

    fn ctx(&self) -> Arc<Quad> {
        self.alg.clone()
    }
    fn zero(ctx: &Arc<Quad>) -> QElem {
        QElem::scalar(ctx, ctx.field.zero())
    }
    fn one(ctx: &Arc<Quad>) -> QElem {
        QElem::scalar(ctx, ctx.field.one())
    }
    fn from_int(ctx: &Arc<Quad>, k: i64) -> QElem {
        QElem::scalar(ctx, ctx.field.int(k))
    }
    fn add(&self, o: &QElem) -> QElem {
        QElem { a: self.a.add(&o.a), b: self.b.add(&o.b), alg: self.alg.clone() }
    }
    fn sub(&self, o: &QElem) -> QElem {
        QElem { a: self.a.sub(&o.a), b: self.b.sub(&o.b), alg: self.alg.clone() }
    }
    fn mul(&self, o: &QElem) -> QElem {
        // z^2 = tr z - nm
        let bd = self.b.mul(&o.b);
        let a = self.a.mul(&o.a).sub(&bd.mul(&self.alg.nm));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a)).add(&bd.mul(&self.alg.tr));
        QElem { a, b, alg: self.alg.clone() }
    }
    fn neg(&self) -> QElem {
        QElem { a: self.a.neg(), b: self.b.neg(), alg: self.alg.clone() }
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn is_exact_zero(&self) -> bool {
        self.a.is_exact_zero() && self.b.is_exact_zero()
    }
    fn try_inv(&self) -> Result<QElem> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        if n.is_zero() {
            return Err(if n.is_exact_zero() { Error::DivisionByZero } else { Error::PrecisionExhausted });
        }
        let ni = n.inv()?;
        let c = self.conj();
        Ok(QElem { a: c.a.mul(&ni), b: c.b.mul(&ni), alg: self.alg.clone() })
    }
    fn pivot_weight(&self) -> Option<i64> {
        self.norm().valuation()
    }
    fn char_two(ctx: &Arc<Quad>) -> bool {
        !ctx.field.odd()
    }
    fn square_root(&self) -> Result<QElem> {
        if self.alg.field.odd() {
            return Err(Error::NotASquare);
        }
        // (a + b z)^2 = a^2 + b^2 (tr z - nm) in characteristic 2
        let b = self.b.div(&self.alg.tr)?.sqrt()?;
        let a = self.a.add(&b.mul(&b).mul(&self.alg.nm)).sqrt()?;
        Ok(QElem { a, b, alg: self.alg.clone() })
    }
}

impl Dvr for QElem {
    /// Normalized valuation of the field; unusable on split algebras.
    fn valuation(&self) -> Option<i64> {
        match self.alg.kind {
            Kind::Unramified => match (self.a.valuation(), self.b.valuation()) {
                (None, None) => None,
                (Some(x), None) => (x < self.b.val_lower()).then_some(x),
                (None, Some(y)) => (y < self.a.val_lower()).then_some(y),
                (Some(x), Some(y)) => Some(x.min(y)),
            },
            Kind::Ramified => {
                let va = self.a.valuation().map(|v| 2 * v);
                let vb = self.b.valuation().map(|v| 2 * v + 1);
                let la = self.a.val_lower().saturating_mul(2);
                let lb = self.b.val_lower().saturating_mul(2).saturating_add(1);
                match (va, vb) {
                    (None, None) => None,
                    (Some(x), None) => (x < lb).then_some(x),
                    (None, Some(y)) => (y < la).then_some(y),
                    (Some(x), Some(y)) => Some(x.min(y)),
                }
            }
            Kind::Split => panic!("split algebras carry no valuation"),
        }
    }
    fn val_lower(&self) -> i64 {
        match self.alg.kind {
            Kind::Ramified => {
                (self.a.val_lower().saturating_mul(2)).min(self.b.val_lower().saturating_mul(2).saturating_add(1))
            }
            _ => self.a.val_lower().min(self.b.val_lower()),
        }
    }
    fn uniformizer_pow(ctx: &Arc<Quad>, e: i64) -> QElem {
        let f = ctx.field;
        match ctx.kind {
            Kind::Ramified => {
                // z^2 = -nm, an exact monomial
                let s = ctx.nm.neg();
                let half = e.div_euclid(2);
                let base = if half >= 0 { s.pow(half as u64) } else { s.inv().expect("monomial").pow((-half) as u64) };
                if e.rem_euclid(2) == 0 {
                    QElem::scalar(ctx, base)
                } else {
                    QElem::new(ctx, f.zero(), base)
                }
            }
            _ => QElem::scalar(ctx, f.pi_pow(e)),
        }
    }
    fn residue_size(ctx: &Arc<Quad>) -> u64 {
        let q = ctx.field.q() as u64;
        if ctx.kind == Kind::Unramified {
            q * q
        } else {
            q
        }
    }
    fn truncate(&self, e: i64) -> Result<QElem> {
        let (ea, eb) = match self.alg.kind {
            Kind::Ramified => (e.div_euclid(2) + e.rem_euclid(2), e.div_euclid(2)),
            _ => (e, e),
        };
        Ok(QElem { a: self.a.truncate(ea)?, b: self.b.truncate(eb)?, alg: self.alg.clone() })
    }
    fn representatives(ctx: &Arc<Quad>, lo: i64, hi: i64) -> Vec<QElem> {
        let f = ctx.field;
        let ceil = |x: i64| x.div_euclid(2) + x.rem_euclid(2);
        let ((alo, ahi), (blo, bhi)) = match ctx.kind {
            Kind::Ramified => ((ceil(lo), ceil(hi)), (lo.div_euclid(2), hi.div_euclid(2))),
            _ => ((lo, hi), (lo, hi)),
        };
        let ar = Fe::representatives(&f, alo, ahi);
        let br = Fe::representatives(&f, blo, bhi);
        let mut out = Vec::with_capacity(ar.len() * br.len());
        for b in &br {
            for a in &ar {
                out.push(QElem::new(ctx, a.clone(), b.clone()));
            }
        }
        out
    }
    fn make_exact(self) -> QElem {
        QElem { a: self.a.exact(), b: self.b.exact(), alg: self.alg }
    }
}
