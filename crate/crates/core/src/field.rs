//! Truncated Laurent series over F_q with tracked absolute precision.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf::{self, Gf};

/// Default relative precision for inverting exact non-monomial elements.
pub const DEFAULT_PRECISION: u32 = 40;

/// The local field F_q((pi)) at a chosen working precision.
///
/// `precision` is the number of digits an inverse of an exact element is
/// computed to; exact inputs that never need such an inverse stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    table: u8,
    precision: u32,
}

impl Field {
    pub fn new(q: u8, precision: u32) -> Result<Field> {
        let table = gf::table_index(q).ok_or(Error::UnsupportedQ(q))?;
        if precision == 0 {
            return Err(Error::Invalid("precision must be at least 1"));
        }
        Ok(Field { table, precision })
    }

    pub fn q(&self) -> u8 {
        self.gf().q
    }
    pub fn p(&self) -> u8 {
        self.gf().p
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn with_precision(&self, precision: u32) -> Field {
        Field { table: self.table, precision }
    }
    #[inline]
    pub fn gf(&self) -> &'static Gf {
        gf::table(self.table)
    }
    pub fn odd(&self) -> bool {
        self.p() != 2
    }

    pub fn zero(&self) -> Fe {
        Fe::zero(*self)
    }
    pub fn one(&self) -> Fe {
        Fe::from_int(*self, 1)
    }
    pub fn int(&self, k: i64) -> Fe {
        Fe::from_int(*self, k)
    }
    /// `pi^k`, exact.
    pub fn pi_pow(&self, k: i64) -> Fe {
        Fe::monomial(*self, 1, k)
    }
    /// The residue-field constant `c` (additive encoding), exact.
    pub fn constant(&self, c: u8) -> Fe {
        Fe::monomial(*self, c, 0)
    }
}

/// An element of F_q((pi)).
///
/// `digits[i]` is the coefficient of `pi^(val + i)`; the first digit is nonzero.
/// `prec` is the absolute precision: the element is known modulo `pi^prec`,
/// or exactly when `None`. Zero known to precision `p` has no digits and
/// `val == p`; the exact zero has no digits, `val == 0` and `prec == None`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fe {
    field: Field,
    val: i64,
    digits: Vec<u8>,
    prec: Option<i64>,
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl Fe {
    pub fn zero(field: Field) -> Fe {
        Fe { field, val: 0, digits: Vec::new(), prec: None }
    }

    /// Zero known only modulo `pi^prec`.
    pub fn zero_to(field: Field, prec: i64) -> Fe {
        Fe { field, val: prec, digits: Vec::new(), prec: Some(prec) }
    }

    pub fn from_int(field: Field, k: i64) -> Fe {
        Fe::monomial(field, field.gf().from_int(k), 0)
    }

    /// `c * pi^k` for a residue constant `c`.
    pub fn monomial(field: Field, c: u8, k: i64) -> Fe {
        if c == 0 {
            return Fe::zero(field);
        }
        Fe { field, val: k, digits: vec![c], prec: None }
    }

    /// Build from raw digits starting at `pi^val`; normalizes.
    pub fn from_digits(field: Field, val: i64, digits: Vec<u8>, prec: Option<i64>) -> Fe {
        Fe::normalized(field, val, digits, prec)
    }

    fn normalized(field: Field, mut val: i64, mut digits: Vec<u8>, prec: Option<i64>) -> Fe {
        if let Some(p) = prec {
            let keep = (p - val).max(0) as usize;
            if digits.len() > keep {
                digits.truncate(keep);
            }
        }
        let lead = digits.iter().position(|&d| d != 0);
        match lead {
            None => match prec {
                None => Fe::zero(field),
                Some(p) => Fe::zero_to(field, p),
            },
            Some(i) => {
                if i > 0 {
                    digits.drain(..i);
                    val += i as i64;
                }
                while digits.last() == Some(&0) {
                    digits.pop();
                }
                Fe { field, val, digits, prec }
            }
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn prec(&self) -> Option<i64> {
        self.prec
    }
    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }
    pub fn is_exact_zero(&self) -> bool {
        self.digits.is_empty() && self.prec.is_none()
    }
    /// True when no nonzero digit is known (exact zero or zero to precision).
    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// Certified valuation; `None` for zero (exact or to precision).
    pub fn valuation(&self) -> Option<i64> {
        (!self.digits.is_empty()).then_some(self.val)
    }

    /// Lower bound on the valuation (`i64::MAX` for exact zero).
    pub fn val_lower(&self) -> i64 {
        if self.digits.is_empty() {
            self.prec.unwrap_or(i64::MAX)
        } else {
            self.val
        }
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    /// Coefficient of `pi^k` (zero outside the stored range).
    pub fn coeff(&self, k: i64) -> u8 {
        if self.digits.is_empty() || k < self.val {
            return 0;
        }
        self.digits.get((k - self.val) as usize).copied().unwrap_or(0)
    }

    /// Leading residue coefficient of a nonzero element.
    pub fn leading(&self) -> Option<u8> {
        self.digits.first().copied()
    }

    /// Multiply by `pi^k`.
    pub fn shift(&self, k: i64) -> Fe {
        if self.is_exact_zero() {
            return self.clone();
        }
        Fe {
            field: self.field,
            val: self.val + k,
            digits: self.digits.clone(),
            prec: self.prec.map(|p| p + k),
        }
    }

    /// Forget digits at or beyond `pi^p`.
    pub fn with_prec(&self, p: i64) -> Fe {
        let prec = min_prec(self.prec, Some(p));
        Fe::normalized(self.field, self.val, self.digits.clone(), prec)
    }

    /// Exact element formed by the digits strictly below `pi^e`; fails when those
    /// digits are not all known.
    pub fn truncate(&self, e: i64) -> Result<Fe> {
        if let Some(p) = self.prec {
            if p < e {
                return Err(Error::PrecisionExhausted);
            }
        }
        if self.digits.is_empty() {
            return Ok(Fe::zero(self.field));
        }
        Ok(Fe::normalized(self.field, self.val, self.digits.clone(), Some(e)).exact())
    }

    /// Declare the stored digits exact.
    pub fn exact(mut self) -> Fe {
        if self.digits.is_empty() {
            return Fe::zero(self.field);
        }
        self.prec = None;
        while self.digits.last() == Some(&0) {
            self.digits.pop();
        }
        self
    }

    pub fn neg(&self) -> Fe {
        let gf = self.field.gf();
        Fe {
            field: self.field,
            val: self.val,
            digits: self.digits.iter().map(|&d| gf.neg(d)).collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, o: &Fe) -> Fe {
        if self.is_exact_zero() {
            return o.clone();
        }
        if o.is_exact_zero() {
            return self.clone();
        }
        let prec = min_prec(self.prec, o.prec);
        let end_of = |x: &Fe| x.val + x.digits.len() as i64;
        let lo = match (self.digits.is_empty(), o.digits.is_empty()) {
            (true, true) => return Fe::zero_to(self.field, prec.unwrap()),
            (true, false) => o.val,
            (false, true) => self.val,
            (false, false) => self.val.min(o.val),
        };
        let mut hi = end_of(self).max(end_of(o));
        if let Some(p) = prec {
            hi = hi.min(p);
        }
        if hi <= lo {
            return Fe::normalized(self.field, lo, Vec::new(), prec);
        }
        let gf = self.field.gf();
        let mut digits = vec![0u8; (hi - lo) as usize];
        for (i, &d) in self.digits.iter().enumerate() {
            let k = self.val + i as i64;
            if k < hi {
                let j = (k - lo) as usize;
                digits[j] = gf.add(digits[j], d);
            }
        }
        for (i, &d) in o.digits.iter().enumerate() {
            let k = o.val + i as i64;
            if k < hi {
                let j = (k - lo) as usize;
                digits[j] = gf.add(digits[j], d);
            }
        }
        Fe::normalized(self.field, lo, digits, prec)
    }

    pub fn sub(&self, o: &Fe) -> Fe {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Fe) -> Fe {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Fe::zero(self.field);
        }
        let va = self.val_lower();
        let vb = o.val_lower();
        let prec = min_prec(self.prec.map(|p| p + vb), o.prec.map(|p| p + va));
        if self.digits.is_empty() || o.digits.is_empty() {
            return Fe::zero_to(self.field, prec.unwrap());
        }
        let val = self.val + o.val;
        let mut len = self.digits.len() + o.digits.len() - 1;
        if let Some(p) = prec {
            len = len.min((p - val).max(0) as usize);
        }
        let gf = self.field.gf();
        let mut digits = vec![0u8; len];
        for (i, &a) in self.digits.iter().enumerate() {
            if i >= len || a == 0 {
                continue;
            }
            for (j, &b) in o.digits.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if b != 0 {
                    digits[i + j] = gf.add(digits[i + j], gf.mul(a, b));
                }
            }
        }
        Fe::normalized(self.field, val, digits, prec)
    }

    /// Multiply by a residue constant.
    pub fn scale(&self, c: u8) -> Fe {
        if c == 0 {
            return Fe::zero(self.field);
        }
        let gf = self.field.gf();
        Fe {
            field: self.field,
            val: self.val,
            digits: self.digits.iter().map(|&d| gf.mul(d, c)).collect(),
            prec: self.prec,
        }
    }

    /// Inverse by inverting the unit part as a power series.
    pub fn inv(&self) -> Result<Fe> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.digits.is_empty() {
            return Err(Error::PrecisionExhausted);
        }
        let gf = self.field.gf();
        let v = self.val;
        let u0inv = gf.inv(self.digits[0]);
        let rel = match self.prec {
            None if self.digits.len() == 1 => {
                return Ok(Fe::monomial(self.field, u0inv, -v));
            }
            None => self.field.precision as usize,
            Some(p) => (p - v) as usize,
        };
        let u = &self.digits;
        let mut b = vec![0u8; rel];
        b[0] = u0inv;
        for k in 1..rel {
            let mut s = 0u8;
            for j in 1..=k.min(u.len() - 1) {
                s = gf.add(s, gf.mul(u[j], b[k - j]));
            }
            b[k] = gf.neg(gf.mul(u0inv, s));
        }
        Ok(Fe::normalized(self.field, -v, b, Some(-v + rel as i64)))
    }

    pub fn div(&self, o: &Fe) -> Result<Fe> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, mut e: u64) -> Fe {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Square root in F, when one exists and can be certified.
    ///
    /// Odd characteristic: Newton iteration on the unit part. Characteristic 2:
    /// inverse Frobenius digit by digit, which needs every odd digit to vanish.
    pub fn sqrt(&self) -> Result<Fe> {
        if self.is_exact_zero() {
            return Ok(self.clone());
        }
        if self.digits.is_empty() {
            return Err(Error::PrecisionExhausted);
        }
        let gf = self.field.gf();
        if self.val % 2 != 0 && self.field.odd() {
            return Err(Error::NotASquare);
        }
        if !self.field.odd() {
            // (sum c_k pi^k)^2 = sum c_k^2 pi^(2k)
            let mut digits = Vec::new();
            let end = self.val + self.digits.len() as i64;
            if self.val.rem_euclid(2) != 0 {
                return Err(Error::NotASquare);
            }
            let mut k = self.val;
            while k < end {
                let c = self.coeff(k);
                digits.push(gf.sqrt(c).ok_or(Error::NotASquare)?);
                if k + 1 < end && self.coeff(k + 1) != 0 {
                    return Err(Error::NotASquare);
                }
                k += 2;
            }
            let prec = self.prec.map(|p| p.div_euclid(2));
            return Ok(Fe::normalized(self.field, self.val / 2, digits, prec));
        }
        let r0 = gf.sqrt(self.digits[0]).ok_or(Error::NotASquare)?;
        // unit part u, find y with y^2 = u via y <- (y + u/y)/2
        let u = Fe { field: self.field, val: 0, digits: self.digits.clone(), prec: self.prec.map(|p| p - self.val) };
        let target = match u.prec {
            Some(p) => p,
            None if u.digits.len() == 1 => {
                return Ok(Fe::monomial(self.field, r0, self.val / 2));
            }
            None => self.field.precision as i64,
        };
        let u = u.with_prec(target);
        let half = self.field.int(2).inv()?;
        let mut y = Fe::monomial(self.field, r0, 0).with_prec(target);
        let mut known = 1i64;
        while known < target {
            y = y.add(&u.div(&y)?).mul(&half);
            known *= 2;
        }
        let y = y.with_prec(target);
        Ok(y.shift(self.val / 2))
    }

    /// Parse the textual form written by `Display`.
    pub fn parse(field: Field, s: &str) -> Result<Fe> {
        let s = s.trim();
        if s == "0" {
            return Ok(Fe::zero(field));
        }
        let gf = field.gf();
        let mut terms: Vec<(i64, u8)> = Vec::new();
        let mut prec = None;
        for part in s.split(" + ") {
            let part = part.trim();
            if let Some(rest) = part.strip_prefix("O(pi^") {
                let n = rest.strip_suffix(')').ok_or(Error::Invalid("bad O-term"))?;
                prec = Some(n.parse::<i64>().map_err(|_| Error::Invalid("bad O-term"))?);
                continue;
            }
            let (c, e) = part.split_once("*pi^").ok_or(Error::Invalid("bad term"))?;
            let c: u32 = c.parse().map_err(|_| Error::Invalid("bad coefficient"))?;
            let e: i64 = e.parse().map_err(|_| Error::Invalid("bad exponent"))?;
            terms.push((e, gf.exp(c)));
        }
        if terms.is_empty() {
            return Ok(Fe::zero_to(field, prec.ok_or(Error::Invalid("empty"))?));
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut digits = vec![0u8; (hi - lo + 1) as usize];
        for (e, c) in terms {
            digits[(e - lo) as usize] = c;
        }
        Ok(Fe::normalized(field, lo, digits, prec))
    }
}

impl fmt::Display for Fe {
    /// `c_v*pi^v + ... + O(pi^N)`, each `c` written as its generator exponent.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gf = self.field.gf();
        let mut parts: Vec<String> = Vec::new();
        for (i, &d) in self.digits.iter().enumerate() {
            if d != 0 {
                parts.push(alloc::format!("{}*pi^{}", gf.log(d), self.val + i as i64));
            }
        }
        if let Some(p) = self.prec {
            parts.push(alloc::format!("O(pi^{})", p));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::new(3, 40).unwrap()
    }

    #[test]
    fn inverse_of_one_minus_pi_is_geometric_series() {
        let f = f3();
        let x = f.one().sub(&f.pi_pow(1));
        let y = x.inv().unwrap();
        assert_eq!(y.prec(), Some(40));
        for k in 0..40 {
            assert_eq!(y.coeff(k), 1);
        }
        assert_eq!(x.mul(&y), f.one().with_prec(40));
    }

    #[test]
    fn valuation_of_sum_of_powers() {
        let f = f3();
        assert_eq!(f.pi_pow(3).add(&f.pi_pow(5)).valuation(), Some(3));
    }

    #[test]
    fn monomial_inverse_is_exact() {
        let f = f3();
        assert_eq!(f.pi_pow(-1).mul(&f.pi_pow(1)), f.one());
        assert_eq!(f.pi_pow(4).inv().unwrap(), f.pi_pow(-4));
    }

    #[test]
    fn zero_inverse_errors() {
        let f = f3();
        assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
        assert_eq!(Fe::zero_to(f, 5).inv(), Err(Error::PrecisionExhausted));
    }

    #[test]
    fn text_round_trip() {
        let f = Field::new(9, 40).unwrap();
        let x = Fe::from_digits(f, -2, vec![3, 0, 5, 1], Some(7));
        let s = alloc::format!("{x}");
        assert_eq!(Fe::parse(f, &s).unwrap(), x);
        assert_eq!(Fe::parse(f, "0").unwrap(), f.zero());
    }

    #[test]
    fn square_roots() {
        let f = Field::new(5, 20).unwrap();
        let x = f.one().add(&f.pi_pow(1));
        let y = x.mul(&x);
        let r = y.sqrt().unwrap();
        assert!(r.sub(&x).is_zero() || r.add(&x).is_zero());
        assert_eq!(f.pi_pow(1).sqrt(), Err(Error::NotASquare));
        let f2 = Field::new(4, 20).unwrap();
        let z = f2.constant(2).add(&f2.pi_pow(1));
        assert_eq!(z.mul(&z).sqrt().unwrap(), z);
    }
}
