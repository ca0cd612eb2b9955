//! Coefficient-ring abstractions shared by the matrix and polynomial code.

use alloc::vec::Vec;
use core::fmt::Debug;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// A commutative ring whose elements carry their own context (field tables,
/// algebra structure constants).
pub trait Ring: Clone + PartialEq + Debug + Send + Sync {
    type Ctx: Clone + PartialEq + Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_int(ctx: &Self::Ctx, k: i64) -> Self;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;

    /// No nonzero digit is known.
    fn is_zero(&self) -> bool;
    fn is_exact_zero(&self) -> bool;
    fn try_inv(&self) -> Result<Self>;

    /// Smaller is a better pivot; `None` when the element cannot be certified
    /// to be nonzero (or cannot be inverted at all).
    fn pivot_weight(&self) -> Option<i64>;

    /// Whether 2 = 0 in the ring.
    fn char_two(ctx: &Self::Ctx) -> bool;

    /// A square root when one is known to exist (needed by polynomial square
    /// roots in characteristic 2, where the top-down recursion cannot divide by 2).
    fn square_root(&self) -> Result<Self> {
        Err(Error::NotASquare)
    }
}

/// A discrete valuation ring's fraction field: enough structure for Hermite and
/// Smith normal forms and for enumerating residue representatives.
pub trait Dvr: Ring {
    /// Valuation in units of the uniformizer; `None` for zero.
    fn valuation(&self) -> Option<i64>;
    /// Lower bound for the valuation, `i64::MAX` for exact zero.
    fn val_lower(&self) -> i64;
    fn uniformizer_pow(ctx: &Self::Ctx, e: i64) -> Self;
    /// Cardinality of the residue field.
    fn residue_size(ctx: &Self::Ctx) -> u64;
    /// Canonical representative of the class modulo `varpi^e`, returned exact.
    fn truncate(&self, e: i64) -> Result<Self>;
    /// All canonical representatives of `varpi^lo O / varpi^hi O`.
    fn representatives(ctx: &Self::Ctx, lo: i64, hi: i64) -> Vec<Self>;
    /// Mark stored digits as exact (after a certified truncation).
    fn make_exact(self) -> Self;
}

impl Ring for Fe {
    type Ctx = Field;

    fn ctx(&self) -> Field {
        self.field()
    }
    fn zero(ctx: &Field) -> Fe {
        Fe::zero(*ctx)
    }
    fn one(ctx: &Field) -> Fe {
        ctx.one()
    }
    fn from_int(ctx: &Field, k: i64) -> Fe {
        Fe::from_int(*ctx, k)
    }
    fn add(&self, o: &Fe) -> Fe {
        Fe::add(self, o)
    }
    fn sub(&self, o: &Fe) -> Fe {
        Fe::sub(self, o)
    }
    fn mul(&self, o: &Fe) -> Fe {
        Fe::mul(self, o)
    }
    fn neg(&self) -> Fe {
        Fe::neg(self)
    }
    fn is_zero(&self) -> bool {
        Fe::is_zero(self)
    }
    fn is_exact_zero(&self) -> bool {
        Fe::is_exact_zero(self)
    }
    fn try_inv(&self) -> Result<Fe> {
        self.inv()
    }
    fn pivot_weight(&self) -> Option<i64> {
        self.valuation()
    }
    fn char_two(ctx: &Field) -> bool {
        !ctx.odd()
    }
    fn square_root(&self) -> Result<Fe> {
        self.sqrt()
    }
}

impl Dvr for Fe {
    fn valuation(&self) -> Option<i64> {
        Fe::valuation(self)
    }
    fn val_lower(&self) -> i64 {
        Fe::val_lower(self)
    }
    fn uniformizer_pow(ctx: &Field, e: i64) -> Fe {
        ctx.pi_pow(e)
    }
    fn residue_size(ctx: &Field) -> u64 {
        ctx.q() as u64
    }
    fn truncate(&self, e: i64) -> Result<Fe> {
        Fe::truncate(self, e)
    }
    fn representatives(ctx: &Field, lo: i64, hi: i64) -> Vec<Fe> {
        let q = ctx.q();
        let len = (hi - lo).max(0) as usize;
        let total = (q as usize).pow(len as u32);
        let mut out = Vec::with_capacity(total);
        let mut digits = alloc::vec![0u8; len];
        for _ in 0..total {
            out.push(Fe::from_digits(*ctx, lo, digits.clone(), None));
            for d in digits.iter_mut() {
                *d += 1;
                if *d < q {
                    break;
                }
                *d = 0;
            }
        }
        out
    }
    fn make_exact(self) -> Fe {
        self.exact()
    }
}

/// Sum of a slice of ring elements.
pub fn sum<R: Ring>(ctx: &R::Ctx, xs: impl IntoIterator<Item = R>) -> R {
    xs.into_iter().fold(R::zero(ctx), |a, b| a.add(&b))
}

/// Integer power by repeated squaring.
pub fn pow<R: Ring>(x: &R, mut e: u64) -> R {
    let mut acc = R::one(&x.ctx());
    let mut base = x.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        base = base.mul(&base);
        e >>= 1;
    }
    acc
}

/// `x / y` in a ring where `y` is invertible.
pub fn div<R: Ring>(x: &R, y: &R) -> Result<R> {
    Ok(x.mul(&y.try_inv()?))
}
