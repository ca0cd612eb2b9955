//! Residue fields F_q for q <= 9, realized by lookup tables built at compile time.
//!
//! An element is stored as a `u8` in `0..q` encoding the polynomial
//! `d_0 + d_1 x + ...` over F_p with base-p digits `d_i`. The multiplicative
//! group is cyclic with a fixed generator; [`Gf::log`] and [`Gf::exp`] translate
//! between the additive encoding and generator exponents.

const MAX_Q: usize = 9;

/// Lookup tables for one residue field.
#[derive(Debug)]
pub struct Gf {
    pub q: u8,
    pub p: u8,
    add: [[u8; MAX_Q]; MAX_Q],
    mul: [[u8; MAX_Q]; MAX_Q],
    neg: [u8; MAX_Q],
    inv: [u8; MAX_Q],
    log: [u8; MAX_Q],
    exp: [u8; MAX_Q],
    sqrt: [u8; MAX_Q],
    is_square: [bool; MAX_Q],
}

// Polynomial arithmetic on base-p digit encodings, reduced by a monic modulus
// `x^e = -(m_0 + m_1 x + ... + m_{e-1} x^{e-1})`.
const fn digits(mut a: usize, p: usize, e: usize) -> [usize; 3] {
    let mut d = [0usize; 3];
    let mut i = 0;
    while i < e {
        d[i] = a % p;
        a /= p;
        i += 1;
    }
    d
}

const fn undigits(d: [usize; 3], p: usize, e: usize) -> usize {
    let mut a = 0;
    let mut i = e;
    while i > 0 {
        i -= 1;
        a = a * p + d[i];
    }
    a
}

const fn poly_add(a: usize, b: usize, p: usize, e: usize) -> usize {
    let da = digits(a, p, e);
    let db = digits(b, p, e);
    let mut d = [0usize; 3];
    let mut i = 0;
    while i < e {
        d[i] = (da[i] + db[i]) % p;
        i += 1;
    }
    undigits(d, p, e)
}

const fn poly_mul(a: usize, b: usize, p: usize, e: usize, modulus: [usize; 3]) -> usize {
    let da = digits(a, p, e);
    let db = digits(b, p, e);
    let mut prod = [0usize; 5];
    let mut i = 0;
    while i < e {
        let mut j = 0;
        while j < e {
            prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            j += 1;
        }
        i += 1;
    }
    // reduce degrees 2e-2 .. e using x^e = -modulus
    let mut k = 2 * e - 1;
    while k > e {
        k -= 1;
        let c = prod[k];
        if c != 0 {
            prod[k] = 0;
            let mut t = 0;
            while t < e {
                let sub = (c * modulus[t]) % p;
                prod[k - e + t] = (prod[k - e + t] + p - sub) % p;
                t += 1;
            }
        }
    }
    let mut d = [0usize; 3];
    let mut t = 0;
    while t < e {
        d[t] = prod[t];
        t += 1;
    }
    undigits(d, p, e)
}

const fn build(p: usize, e: usize, modulus: [usize; 3]) -> Gf {
    let mut q = 1;
    let mut i = 0;
    while i < e {
        q *= p;
        i += 1;
    }
    let mut add = [[0u8; MAX_Q]; MAX_Q];
    let mut mul = [[0u8; MAX_Q]; MAX_Q];
    let mut a = 0;
    while a < q {
        let mut b = 0;
        while b < q {
            add[a][b] = poly_add(a, b, p, e) as u8;
            mul[a][b] = poly_mul(a, b, p, e, modulus) as u8;
            b += 1;
        }
        a += 1;
    }
    let mut neg = [0u8; MAX_Q];
    let mut inv = [0u8; MAX_Q];
    a = 0;
    while a < q {
        let mut b = 0;
        while b < q {
            if add[a][b] == 0 {
                neg[a] = b as u8;
            }
            if mul[a][b] == 1 {
                inv[a] = b as u8;
            }
            b += 1;
        }
        a += 1;
    }
    // smallest element whose powers exhaust the multiplicative group
    let mut gen = 0;
    let mut g = 1;
    while g < q && gen == 0 {
        let mut x = g;
        let mut order = 1;
        while x != 1 {
            x = mul[x][g] as usize;
            order += 1;
        }
        if order == q - 1 {
            gen = g;
        }
        g += 1;
    }
    let mut log = [0u8; MAX_Q];
    let mut exp = [0u8; MAX_Q];
    let mut x = 1;
    let mut k = 0;
    while k < q - 1 {
        exp[k] = x as u8;
        log[x] = k as u8;
        x = mul[x][gen] as usize;
        k += 1;
    }
    let mut sqrt = [0u8; MAX_Q];
    let mut is_square = [false; MAX_Q];
    a = 0;
    while a < q {
        let s = mul[a][a] as usize;
        if !is_square[s] {
            is_square[s] = true;
            sqrt[s] = a as u8;
        }
        a += 1;
    }
    Gf { q: q as u8, p: p as u8, add, mul, neg, inv, log, exp, sqrt, is_square }
}

/// Supported residue cardinalities, in table order.
pub const SUPPORTED_Q: [u8; 7] = [2, 3, 4, 5, 7, 8, 9];

// Moduli: x^2 + x + 1 over F_2, x^3 + x + 1 over F_2, x^2 + 1 over F_3.
static TABLES: [Gf; 7] = [
    build(2, 1, [0, 0, 0]),
    build(3, 1, [0, 0, 0]),
    build(2, 2, [1, 1, 0]),
    build(5, 1, [0, 0, 0]),
    build(7, 1, [0, 0, 0]),
    build(2, 3, [1, 1, 0]),
    build(3, 2, [1, 0, 0]),
];

/// Index into the static tables for residue cardinality `q`.
pub fn table_index(q: u8) -> Option<u8> {
    SUPPORTED_Q.iter().position(|&x| x == q).map(|i| i as u8)
}

pub(crate) fn table(index: u8) -> &'static Gf {
    &TABLES[index as usize]
}

impl Gf {
    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize][b as usize]
    }
    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize][self.neg[b as usize] as usize]
    }
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize][b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    /// Multiplicative inverse; `inv(0)` is 0.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }
    /// Generator exponent of a nonzero element.
    pub fn log(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.log[a as usize]
    }
    pub fn exp(&self, k: u32) -> u8 {
        self.exp[(k % (self.q as u32 - 1)) as usize]
    }
    pub fn is_square(&self, a: u8) -> bool {
        self.is_square[a as usize]
    }
    pub fn sqrt(&self, a: u8) -> Option<u8> {
        self.is_square[a as usize].then(|| self.sqrt[a as usize])
    }
    /// Image of the integer `k` under Z -> F_p -> F_q.
    pub fn from_int(&self, k: i64) -> u8 {
        k.rem_euclid(self.p as i64) as u8
    }
    /// Absolute trace to F_2 (only meaningful in characteristic 2).
    pub fn abs_trace(&self, a: u8) -> u8 {
        let mut t = 0;
        let mut x = a;
        let mut k = 1;
        while k < self.q {
            t = self.add(t, x);
            x = self.mul(x, x);
            k *= 2;
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_hold_for_every_table() {
        for (i, &q) in SUPPORTED_Q.iter().enumerate() {
            let f = table(i as u8);
            assert_eq!(f.q, q);
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                    assert_eq!(f.exp(f.log(a) as u32), a);
                }
                for b in 0..q {
                    for c in 0..q {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn squares_make_up_half_the_units_in_odd_characteristic() {
        for q in [3u8, 5, 7, 9] {
            let f = table(table_index(q).unwrap());
            let n = (1..q).filter(|&a| f.is_square(a)).count();
            assert_eq!(n, (q as usize - 1) / 2);
        }
    }
}
