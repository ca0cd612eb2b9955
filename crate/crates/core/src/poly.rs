//! Dense univariate polynomials over any [`Ring`], low degree first.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::Ring;

#[derive(Clone, Debug)]
pub struct Poly<R: Ring> {
    ctx: R::Ctx,
    coeffs: Vec<R>,
}

impl<R: Ring> PartialEq for Poly<R> {
    /// Equality as polynomials: trailing zero coefficients are ignored and
    /// coefficients are compared by their difference being zero.
    fn eq(&self, o: &Self) -> bool {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).all(|i| self.coeff(i).sub(&o.coeff(i)).is_zero())
    }
}

impl<R: Ring> Poly<R> {
    pub fn new(ctx: &R::Ctx, mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Poly { ctx: ctx.clone(), coeffs }
    }

    pub fn zero(ctx: &R::Ctx) -> Self {
        Poly { ctx: ctx.clone(), coeffs: Vec::new() }
    }

    pub fn constant(ctx: &R::Ctx, c: R) -> Self {
        Self::new(ctx, vec![c])
    }

    /// The monomial `T`.
    pub fn x(ctx: &R::Ctx) -> Self {
        Self::new(ctx, vec![R::zero(ctx), R::one(ctx)])
    }

    /// `T - a`.
    pub fn linear(ctx: &R::Ctx, a: &R) -> Self {
        Self::new(ctx, vec![a.neg(), R::one(ctx)])
    }

    pub fn ctx(&self) -> &R::Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    /// Index of the last stored coefficient; -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(|| R::zero(&self.ctx))
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.sub(&R::one(&self.ctx)).is_exact_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(&self.ctx, (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(&self.ctx, (0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.ctx, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn scale(&self, x: &R) -> Self {
        Self::new(&self.ctx, self.coeffs.iter().map(|c| c.mul(x)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero(&self.ctx);
        }
        let mut out = vec![R::zero(&self.ctx); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(&self.ctx, out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(&self.ctx, R::one(&self.ctx));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &R) -> R {
        let mut acc = R::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            &self.ctx,
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul(&R::from_int(&self.ctx, i as i64))).collect(),
        )
    }

    /// Substitute `T -> u T + v`.
    pub fn compose_affine(&self, u: &R, v: &R) -> Self {
        let lin = Self::new(&self.ctx, vec![v.clone(), u.clone()]);
        let mut acc = Self::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Self::constant(&self.ctx, c.clone()));
        }
        acc
    }

    /// Apply a coefficient map (e.g. an involution).
    pub fn map_coeffs(&self, f: impl Fn(&R) -> R) -> Self {
        Self::new(&self.ctx, self.coeffs.iter().map(f).collect())
    }

    /// Division with remainder by a monic polynomial.
    pub fn divrem_monic(&self, d: &Self) -> Result<(Self, Self)> {
        if !d.is_monic() {
            return Err(Error::Invalid("divisor must be monic"));
        }
        let dd = d.degree() as usize;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(&self.ctx), self.clone()));
        }
        let mut q = vec![R::zero(&self.ctx); r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = r[k].clone();
            q[k - dd] = c.clone();
            for (i, di) in d.coeffs.iter().enumerate() {
                r[k - dd + i] = r[k - dd + i].sub(&c.mul(di));
            }
            r[k] = R::zero(&self.ctx);
        }
        r.truncate(dd);
        Ok((Self::new(&self.ctx, q), Self::new(&self.ctx, r)))
    }

    /// Monic square root of a monic polynomial of even degree.
    ///
    /// Odd characteristic: coefficients are solved for from the top down.
    /// Characteristic 2: a square has only even-degree terms, and the root's
    /// coefficients are square roots of those. Either way the result is
    /// checked by squaring.
    pub fn sqrt(&self) -> Result<Self> {
        let d = self.degree();
        if d < 0 || d % 2 != 0 || !self.is_monic() {
            return Err(Error::NotASquare);
        }
        let n = (d / 2) as usize;
        let ctx = &self.ctx;
        let root = if R::char_two(ctx) {
            let mut c = Vec::with_capacity(n + 1);
            for i in 0..=n {
                c.push(self.coeff(2 * i).square_root()?);
            }
            c[n] = R::one(ctx);
            Self::new(ctx, c)
        } else {
            let half = R::from_int(ctx, 2).try_inv()?;
            let mut c = vec![R::zero(ctx); n + 1];
            c[n] = R::one(ctx);
            for k in 1..=n {
                // coefficient of T^(2n-k) in the square: 2 c[n-k] + sum of cross terms
                let mut s = self.coeff(2 * n - k);
                for i in n - k + 1..n {
                    s = s.sub(&c[i].mul(&c[2 * n - k - i]));
                }
                c[n - k] = s.mul(&half);
            }
            Self::new(ctx, c)
        };
        if root.mul(&root) != *self {
            return Err(Error::NotASquare);
        }
        Ok(root)
    }

    /// `Res(P, Q)` as the Sylvester determinant; for monic inputs this equals
    /// the product of `p_i - q_j` over the roots.
    pub fn resultant(&self, o: &Self) -> Result<R> {
        let m = self.degree().max(0) as usize;
        let n = o.degree().max(0) as usize;
        if m + n == 0 {
            return Ok(R::one(&self.ctx));
        }
        let size = m + n;
        let mut s = Matrix::zeros(&self.ctx, size, size);
        for r in 0..n {
            for i in 0..=m {
                s[(r, r + i)] = self.coeff(m - i);
            }
        }
        for r in 0..m {
            for i in 0..=n {
                s[(n + r, r + i)] = o.coeff(n - i);
            }
        }
        s.det()
    }
}
