//! Dense matrices over any [`Ring`], with normal forms over discrete valuation rings.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ring::{Dvr, Ring};

#[derive(Clone, PartialEq)]
pub struct Matrix<R: Ring> {
    ctx: R::Ctx,
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Ring> fmt::Debug for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl<R: Ring> core::ops::Index<(usize, usize)> for Matrix<R> {
    type Output = R;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R: Ring> core::ops::IndexMut<(usize, usize)> for Matrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Ring> Matrix<R> {
    pub fn zeros(ctx: &R::Ctx, rows: usize, cols: usize) -> Self {
        Matrix { ctx: ctx.clone(), rows, cols, data: vec![R::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &R::Ctx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = R::one(ctx);
        }
        m
    }

    pub fn scalar(ctx: &R::Ctx, n: usize, x: &R) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn diagonal(ctx: &R::Ctx, xs: &[R]) -> Self {
        let mut m = Self::zeros(ctx, xs.len(), xs.len());
        for (i, x) in xs.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn from_rows(ctx: &R::Ctx, rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix { ctx: ctx.clone(), rows: r, cols: c, data }
    }

    pub fn from_cols(ctx: &R::Ctx, rows: usize, cols: &[Vec<R>]) -> Self {
        let mut m = Self::zeros(ctx, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn from_fn(ctx: &R::Ctx, rows: usize, cols: usize, f: impl Fn(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { ctx: ctx.clone(), rows, cols, data }
    }

    pub fn ctx(&self) -> &R::Ctx {
        &self.ctx
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn col(&self, j: usize) -> Vec<R> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }
    pub fn row(&self, i: usize) -> Vec<R> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }
    pub fn columns(&self) -> Vec<Vec<R>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn map<S: Ring>(&self, ctx: &S::Ctx, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix { ctx: ctx.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ctx, self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            ctx: self.ctx.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            ctx: self.ctx.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.neg()).collect() }
    }

    pub fn scale(&self, x: &R) -> Self {
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.mul(x)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Self::zeros(&self.ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_exact_zero() {
                        continue;
                    }
                    let t = a.mul(b);
                    out[(i, j)] = out[(i, j)].add(&t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = R::zero(&self.ctx);
                for (j, x) in v.iter().enumerate() {
                    if !x.is_exact_zero() && !self[(i, j)].is_exact_zero() {
                        acc = acc.add(&self[(i, j)].mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(&self.ctx, rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        Self::from_fn(&self.ctx, self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                o[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.cols);
        Self::from_fn(&self.ctx, self.rows + o.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                o[(i - self.rows, j)].clone()
            }
        })
    }

    pub fn block_diag(&self, o: &Self) -> Self {
        let mut m = Self::zeros(&self.ctx, self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m[(self.rows + i, self.cols + j)] = o[(i, j)].clone();
            }
        }
        m
    }

    /// Column-major flattening (used to vectorize Hom spaces).
    pub fn vec_cols(&self) -> Vec<R> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)].clone());
            }
        }
        v
    }

    pub fn from_vec_cols(ctx: &R::Ctx, rows: usize, cols: usize, v: &[R]) -> Self {
        assert_eq!(v.len(), rows * cols);
        Self::from_fn(ctx, rows, cols, |i, j| v[j * rows + i].clone())
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o).sub(&o.mul(self)).is_zero()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(&self.ctx, self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Characteristic polynomial `det(T - M)` by Berkowitz's division-free algorithm.
    pub fn charpoly(&self) -> Poly<R> {
        assert!(self.is_square());
        let ctx = &self.ctx;
        let n = self.rows;
        // p holds coefficients highest degree first
        let mut p: Vec<R> = vec![R::one(ctx)];
        for r in 0..n {
            let a = self[(r, r)].clone();
            // c = column r above the diagonal, row = row r left of diagonal
            let mut powers: Vec<R> = Vec::with_capacity(r + 1);
            // first column of the Toeplitz matrix: 1, -a, -R C, -R A C, ...
            powers.push(R::one(ctx));
            powers.push(a.neg());
            let mut v: Vec<R> = (0..r).map(|i| self[(i, r)].clone()).collect();
            for _ in 0..r.saturating_sub(0) {
                if powers.len() >= r + 2 {
                    break;
                }
                // -R v
                let mut s = R::zero(ctx);
                for (j, x) in v.iter().enumerate() {
                    s = s.add(&self[(r, j)].mul(x));
                }
                powers.push(s.neg());
                // v <- A_{r} v
                let nv: Vec<R> = (0..r)
                    .map(|i| {
                        let mut s = R::zero(ctx);
                        for (j, x) in v.iter().enumerate() {
                            s = s.add(&self[(i, j)].mul(x));
                        }
                        s
                    })
                    .collect();
                v = nv;
            }
            // p_new = T * p where T is (r+2) x (r+1) lower Toeplitz from `powers`
            let mut np: Vec<R> = vec![R::zero(ctx); r + 2];
            for i in 0..r + 2 {
                for j in 0..=r.min(i) {
                    if j < p.len() && i - j < powers.len() {
                        np[i] = np[i].add(&powers[i - j].mul(&p[j]));
                    }
                }
            }
            p = np;
        }
        p.reverse();
        Poly::new(ctx, p)
    }

    /// Determinant by Gaussian elimination with best-pivot choice, falling
    /// back to the division-free characteristic polynomial.
    pub fn det(&self) -> Result<R> {
        assert!(self.is_square());
        let n = self.rows;
        let ctx = self.ctx.clone();
        if n == 0 {
            return Ok(R::one(&ctx));
        }
        let mut m = self.clone();
        let mut acc = R::one(&ctx);
        for k in 0..n {
            let mut best: Option<(usize, i64)> = None;
            for i in k..n {
                if let Some(w) = m[(i, k)].pivot_weight() {
                    if best.is_none_or(|(_, bw)| w < bw) {
                        best = Some((i, w));
                    }
                }
            }
            let Some((p, _)) = best else {
                if (k..n).all(|i| m[(i, k)].is_exact_zero()) {
                    return Ok(R::zero(&ctx));
                }
                // undecidable pivot: use the division-free route
                let cp = self.charpoly();
                let c0 = cp.coeff(0);
                return Ok(if n.is_multiple_of(2) { c0 } else { c0.neg() });
            };
            if p != k {
                m.swap_rows(p, k);
                acc = acc.neg();
            }
            let piv = m[(k, k)].clone();
            acc = acc.mul(&piv);
            let inv = piv.try_inv()?;
            for i in k + 1..n {
                if m[(i, k)].is_exact_zero() {
                    continue;
                }
                let f = m[(i, k)].mul(&inv);
                for j in k..n {
                    let t = f.mul(&m[(k, j)]);
                    m[(i, j)] = m[(i, j)].sub(&t);
                }
            }
        }
        Ok(acc)
    }

    /// Reduced row echelon form over a field-like ring; returns the pivot columns.
    fn rref(&self) -> Result<(Self, Vec<usize>)> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut best: Option<(usize, i64)> = None;
            let mut uncertain = false;
            for i in r..self.rows {
                match m[(i, c)].pivot_weight() {
                    Some(w) => {
                        if best.is_none_or(|(_, bw)| w < bw) {
                            best = Some((i, w));
                        }
                    }
                    None => {
                        if !m[(i, c)].is_exact_zero() {
                            uncertain = true;
                        }
                    }
                }
            }
            let Some((p, _)) = best else {
                if uncertain && !self.ctx_allows_uncertain() {
                    return Err(Error::PrecisionExhausted);
                }
                continue;
            };
            m.swap_rows(p, r);
            let inv = m[(r, c)].try_inv()?;
            for j in 0..self.cols {
                m[(r, j)] = m[(r, j)].mul(&inv);
            }
            for i in 0..self.rows {
                if i == r || m[(i, c)].is_exact_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in 0..self.cols {
                    let t = f.mul(&m[(r, j)]);
                    m[(i, j)] = m[(i, j)].sub(&t);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Ok((m, pivots))
    }

    // Entries that are zero only to precision are treated as zero in echelon
    // computations; kernel dimensions are re-checked by callers that care.
    fn ctx_allows_uncertain(&self) -> bool {
        true
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    /// Basis of the right kernel, as columns of the returned matrix.
    pub fn kernel_basis(&self) -> Result<Self> {
        let (m, pivots) = self.rref()?;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Self::zeros(&self.ctx, self.cols, free.len());
        for (t, &f) in free.iter().enumerate() {
            k[(f, t)] = R::one(&self.ctx);
            for (r, &p) in pivots.iter().enumerate() {
                k[(p, t)] = m[(r, f)].neg();
            }
        }
        Ok(k)
    }

    /// One solution of `M x = b` together with a kernel basis.
    pub fn linear_solve(&self, b: &[R]) -> Result<(Vec<R>, Self)> {
        assert_eq!(b.len(), self.rows);
        let bm = Self::from_cols(&self.ctx, self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bm);
        let (m, pivots) = aug.rref()?;
        if pivots.contains(&self.cols) {
            return Err(Error::NoSolution);
        }
        let mut x = vec![R::zero(&self.ctx); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = m[(r, self.cols)].clone();
        }
        Ok((x, self.kernel_basis()?))
    }

    pub fn inverse(&self) -> Result<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = self.hstack(&Self::identity(&self.ctx, n));
        let (m, pivots) = aug.rref()?;
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::SingularBasis);
        }
        Ok(Self::from_fn(&self.ctx, n, n, |i, j| m[(i, n + j)].clone()))
    }

    /// Solve `M X = B` for square invertible M.
    pub fn solve_matrix(&self, b: &Self) -> Result<Self> {
        Ok(self.inverse()?.mul(b))
    }
}

impl<R: Dvr> Matrix<R> {
    /// Smallest valuation of any entry (`i64::MAX` if all exact zero).
    pub fn min_valuation(&self) -> i64 {
        self.data.iter().map(|x| x.val_lower()).min().unwrap_or(i64::MAX)
    }

    /// Column Hermite form of the lattice spanned by the columns.
    ///
    /// The result is square upper triangular with diagonal `varpi^e_i` and each
    /// entry above a diagonal entry replaced by its canonical representative
    /// modulo that row's pivot. All entries are exact.
    pub fn hermite(&self) -> Result<Self> {
        let m = self.rows;
        let ctx = self.ctx.clone();
        let mut pool: Vec<Vec<R>> = self.columns();
        let mut placed: Vec<Option<Vec<R>>> = vec![None; m];
        let mut exps = vec![0i64; m];
        for i in (0..m).rev() {
            let mut best: Option<(usize, i64)> = None;
            let mut uncertain = false;
            for (k, c) in pool.iter().enumerate() {
                match c[i].valuation() {
                    Some(v) => {
                        if best.is_none_or(|(_, bv)| v < bv) {
                            best = Some((k, v));
                        }
                    }
                    None => uncertain |= !c[i].is_exact_zero(),
                }
            }
            let Some((k, e)) = best else {
                return Err(if uncertain { Error::PrecisionExhausted } else { Error::SingularBasis });
            };
            let piv = pool.swap_remove(k);
            // scale so the pivot is exactly varpi^e
            let unit_inv = piv[i].try_inv()?.mul(&R::uniformizer_pow(&ctx, e));
            let mut piv: Vec<R> = piv.iter().map(|x| x.mul(&unit_inv)).collect();
            piv[i] = R::uniformizer_pow(&ctx, e);
            for x in piv.iter_mut().skip(i + 1) {
                *x = R::zero(&ctx);
            }
            let shift = R::uniformizer_pow(&ctx, -e);
            for c in pool.iter_mut() {
                if c[i].is_exact_zero() {
                    continue;
                }
                let t = c[i].mul(&shift);
                for r in 0..i {
                    let d = t.mul(&piv[r]);
                    c[r] = c[r].sub(&d);
                }
                c[i] = R::zero(&ctx);
            }
            exps[i] = e;
            placed[i] = Some(piv);
        }
        let cols: Vec<Vec<R>> = placed.into_iter().map(|c| c.unwrap()).collect();
        let mut h = Self::from_cols(&ctx, m, &cols);
        for j in 0..m {
            for i in (0..j).rev() {
                let x = h[(i, j)].clone();
                let r = x.truncate(exps[i])?;
                let diff = x.sub(&r);
                if !diff.is_zero() {
                    let t = diff.mul(&R::uniformizer_pow(&ctx, -exps[i]));
                    for k in 0..i {
                        let d = t.mul(&h[(k, i)]);
                        h[(k, j)] = h[(k, j)].sub(&d);
                    }
                }
                h[(i, j)] = r;
            }
        }
        Ok(h)
    }

    /// Elementary-divisor exponents of a square matrix, sorted decreasing.
    pub fn smith_exponents(&self) -> Result<Vec<i64>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut best: Option<(usize, usize, i64)> = None;
            let mut uncertain = false;
            for i in k..n {
                for j in k..n {
                    match m[(i, j)].valuation() {
                        Some(v) => {
                            if best.is_none_or(|(_, _, bv)| v < bv) {
                                best = Some((i, j, v));
                            }
                        }
                        None => uncertain |= !m[(i, j)].is_exact_zero(),
                    }
                }
            }
            let Some((pi, pj, v)) = best else {
                return Err(if uncertain { Error::PrecisionExhausted } else { Error::SingularBasis });
            };
            m.swap_rows(pi, k);
            m.swap_cols(pj, k);
            let inv = m[(k, k)].try_inv()?;
            for i in k + 1..n {
                if m[(i, k)].is_exact_zero() {
                    continue;
                }
                let f = m[(i, k)].mul(&inv);
                for j in k..n {
                    let t = f.mul(&m[(k, j)]);
                    m[(i, j)] = m[(i, j)].sub(&t);
                }
            }
            // column elimination only affects row k beyond the pivot, which no
            // later step reads
            out.push(v);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        Ok(out)
    }

    /// Basis of `U ∩ O^m` where `U` is the column span: integral columns with a
    /// unit in distinct pivot rows.
    pub fn saturate(&self) -> Result<Self> {
        let mut cols = self.columns();
        let m = self.rows;
        let d = cols.len();
        let mut used_rows = vec![false; m];
        let mut done = vec![false; d];
        let mut pivot_row = vec![0usize; d];
        for _ in 0..d {
            let mut best: Option<(usize, usize, i64)> = None;
            for (c, col) in cols.iter().enumerate() {
                if done[c] {
                    continue;
                }
                for (r, x) in col.iter().enumerate() {
                    if used_rows[r] {
                        continue;
                    }
                    if let Some(v) = x.valuation() {
                        if best.is_none_or(|(_, _, bv)| v < bv) {
                            best = Some((c, r, v));
                        }
                    }
                }
            }
            let Some((c, r, _)) = best else {
                return Err(Error::SingularBasis);
            };
            let inv = cols[c][r].try_inv()?;
            cols[c] = cols[c].iter().map(|x| x.mul(&inv)).collect();
            cols[c][r] = R::one(&self.ctx);
            for k in 0..d {
                if k == c || cols[k][r].is_exact_zero() {
                    continue;
                }
                let f = cols[k][r].clone();
                let pc = cols[c].clone();
                for (i, x) in cols[k].iter_mut().enumerate() {
                    *x = x.sub(&f.mul(&pc[i]));
                }
                cols[k][r] = R::zero(&self.ctx);
            }
            used_rows[r] = true;
            done[c] = true;
            pivot_row[c] = r;
        }
        Ok(Self::from_cols(&self.ctx, m, &cols))
    }

    /// Inverse of an upper triangular matrix by back substitution.
    pub fn upper_triangular_inverse(&self) -> Result<Self> {
        let n = self.rows;
        let ctx = self.ctx.clone();
        let mut inv = Self::zeros(&ctx, n, n);
        let diag_inv: Vec<R> = (0..n).map(|i| self[(i, i)].try_inv()).collect::<Result<_>>()?;
        for j in 0..n {
            inv[(j, j)] = diag_inv[j].clone();
            for i in (0..j).rev() {
                let mut s = R::zero(&ctx);
                for k in i + 1..=j {
                    if !self[(i, k)].is_exact_zero() && !inv[(k, j)].is_exact_zero() {
                        s = s.add(&self[(i, k)].mul(&inv[(k, j)]));
                    }
                }
                inv[(i, j)] = s.neg().mul(&diag_inv[i]);
            }
        }
        Ok(inv)
    }

    /// True when every entry has nonnegative valuation.
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.val_lower() >= 0)
    }

    /// Valuation of the determinant.
    pub fn det_valuation(&self) -> Result<i64> {
        let e = self.smith_exponents()?;
        Ok(e.iter().sum())
    }
}
