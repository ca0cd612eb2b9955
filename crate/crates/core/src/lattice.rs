//! Full-rank lattices over a discrete valuation ring, kept in canonical
//! column Hermite form.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::Dvr;

#[derive(Clone, PartialEq)]
pub struct Lattice<R: Dvr> {
    basis: Matrix<R>,
}

impl<R: Dvr> core::fmt::Debug for Lattice<R> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Lattice{:?}", self.basis)
    }
}

impl<R: Dvr> Lattice<R> {
    /// The lattice spanned by the columns of `gens` (at least `rows` of them).
    pub fn from_generators(gens: &Matrix<R>) -> Result<Self> {
        if gens.cols() < gens.rows() {
            return Err(Error::SingularBasis);
        }
        Ok(Lattice { basis: gens.hermite()? })
    }

    /// Wrap a matrix already known to be in canonical form.
    pub fn from_canonical(basis: Matrix<R>) -> Self {
        Lattice { basis }
    }

    pub fn standard(ctx: &R::Ctx, m: usize) -> Self {
        Lattice { basis: Matrix::identity(ctx, m) }
    }

    pub fn basis(&self) -> &Matrix<R> {
        &self.basis
    }
    pub fn rank(&self) -> usize {
        self.basis.rows()
    }
    pub fn ctx(&self) -> &R::Ctx {
        self.basis.ctx()
    }

    /// Exponents of the Hermite diagonal.
    pub fn diagonal_exponents(&self) -> Vec<i64> {
        (0..self.rank()).map(|i| self.basis[(i, i)].valuation().expect("canonical diagonal")).collect()
    }

    /// `v(det basis)`.
    pub fn det_valuation(&self) -> i64 {
        self.diagonal_exponents().iter().sum()
    }

    /// `varpi^k` times the lattice.
    pub fn scale(&self, k: i64) -> Self {
        let s = R::uniformizer_pow(self.ctx(), k);
        Lattice::from_generators(&self.basis.scale(&s)).expect("scaling keeps full rank")
    }

    pub fn apply(&self, g: &Matrix<R>) -> Result<Self> {
        Lattice::from_generators(&g.mul(&self.basis))
    }

    /// Coordinates of the columns of `m` in this lattice's basis.
    pub fn coords(&self, m: &Matrix<R>) -> Result<Matrix<R>> {
        Ok(self.basis.upper_triangular_inverse()?.mul(m))
    }

    pub fn contains(&self, other: &Self) -> Result<bool> {
        Ok(self.coords(&other.basis)?.is_integral())
    }

    pub fn contains_vectors(&self, m: &Matrix<R>) -> Result<bool> {
        Ok(self.coords(m)?.is_integral())
    }

    /// `[self : other]` in units of the uniformizer, for any two lattices.
    pub fn index(&self, other: &Self) -> i64 {
        other.det_valuation() - self.det_valuation()
    }

    /// Cartan invariant of `(self, other)`: elementary-divisor exponents of the
    /// change of basis, sorted decreasing.
    pub fn relative_position(&self, other: &Self) -> Result<Vec<i64>> {
        self.coords(&other.basis)?.smith_exponents()
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        Lattice::from_generators(&self.basis.hstack(&other.basis))
    }

    /// The dual lattice under the standard pairing.
    pub fn dual(&self) -> Result<Self> {
        Lattice::from_generators(&self.basis.upper_triangular_inverse()?.transpose())
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.dual()?.sum(&other.dual()?)?.dual()
    }

    /// `{y : P y in self}` for a full-column-rank `P` (the lattice cut out on
    /// the column space of `P`, in `P`-coordinates).
    pub fn preimage(&self, p: &Matrix<R>) -> Result<Self> {
        let m = self.coords(p)?;
        Lattice::from_generators(&m.transpose())?.dual()
    }

    /// Split a lattice given in block coordinates `(first d0 | rest)`:
    /// returns `(Λ ∩ first block, projection to rest, lift matrix)` where the
    /// lift matrix gives, for each basis vector of the projection, the first
    /// block coordinates of a lift.
    pub fn fibrate(&self, d0: usize) -> (Self, Self, Matrix<R>) {
        let m = self.rank();
        let first: Vec<usize> = (0..d0).collect();
        let rest: Vec<usize> = (d0..m).collect();
        let x0 = Lattice { basis: self.basis.submatrix(&first, &first) };
        let x1 = Lattice { basis: self.basis.submatrix(&rest, &rest) };
        let lift = self.basis.submatrix(&first, &rest);
        (x0, x1, lift)
    }

    /// Inverse of [`Lattice::fibrate`].
    pub fn unfibrate(x0: &Self, x1: &Self, lift: &Matrix<R>) -> Result<Self> {
        let ctx = x0.ctx().clone();
        let top = x0.basis.hstack(lift);
        let bottom = Matrix::zeros(&ctx, x1.rank(), x0.rank()).hstack(&x1.basis);
        Lattice::from_generators(&top.vstack(&bottom))
    }

    /// Direct sum in block coordinates.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Lattice { basis: self.basis.block_diag(&other.basis) }
    }

    /// Every lattice `X` with `inner ⊆ X ⊆ outer`, optionally only those of
    /// index `k` in `outer`, each exactly once.
    pub fn between(outer: &Self, inner: &Self, index: Option<i64>) -> Result<Vec<Self>> {
        let c = outer.coords(&inner.basis)?;
        if !c.is_integral() {
            return Ok(Vec::new());
        }
        let total = outer.index(inner);
        let m = outer.rank();
        let ctx = outer.ctx().clone();
        let mut h = Matrix::zeros(&ctx, m, m);
        let mut x_rows: Vec<Vec<R>> = vec![Vec::new(); m];
        let mut out = Vec::new();
        let want = index.unwrap_or(-1);
        if index.is_some() && (want < 0 || want > total) {
            return Ok(out);
        }
        between_rec(outer, &c, m, &mut h, &mut x_rows, 0, want, total, &mut out)?;
        Ok(out)
    }

    /// All sublattices of index `k`.
    pub fn sublattices_of_index(&self, k: i64) -> Result<Vec<Self>> {
        if k < 0 {
            return Ok(Vec::new());
        }
        Self::between(self, &self.scale(k), Some(k))
    }

    /// Number of chains `inner = X_0 ⊆ X_1 ⊆ ... ⊆ X_r = outer` with
    /// `[X_i : X_{i-1}] = steps[i-1]`.
    pub fn count_chains(inner: &Self, outer: &Self, steps: &[i64]) -> Result<u64> {
        if steps.iter().sum::<i64>() != outer.index(inner) || !outer.contains(inner)? {
            return Ok(0);
        }
        if steps.len() <= 1 {
            return Ok(1);
        }
        let (&last, rest) = steps.split_last().unwrap();
        let mut n = 0;
        for x in Self::between(outer, inner, Some(last))? {
            n += Self::count_chains(inner, &x, rest)?;
        }
        Ok(n)
    }

    /// Stable text key for hashing and ordering.
    pub fn key(&self) -> String {
        alloc::format!("{:?}", self.basis)
    }
}

#[allow(clippy::too_many_arguments)]
fn between_rec<R: Dvr>(
    outer: &Lattice<R>,
    c: &Matrix<R>,
    m: usize,
    h: &mut Matrix<R>,
    x_rows: &mut Vec<Vec<R>>,
    used: i64,
    want: i64,
    total: i64,
    out: &mut Vec<Lattice<R>>,
) -> Result<()> {
    // rows are filled from the bottom; `filled` rows done so far
    let filled = x_rows.iter().filter(|r| !r.is_empty()).count();
    if filled == m {
        if want >= 0 && used != want {
            return Ok(());
        }
        let l = Lattice::from_generators(&outer.basis.mul(h))?;
        out.push(l);
        return Ok(());
    }
    let i = m - 1 - filled;
    let ctx = outer.ctx().clone();
    let remaining = if want >= 0 { want - used } else { total - used };
    for e in 0..=remaining {
        if want >= 0 && i == 0 && e != remaining {
            continue;
        }
        let reps = R::representatives(&ctx, 0, e);
        let free = m - 1 - i;
        let combos = reps.len().pow(free as u32);
        let pivot = R::uniformizer_pow(&ctx, e);
        let pivot_inv = R::uniformizer_pow(&ctx, -e);
        for idx in 0..combos {
            let mut t = idx;
            let mut row_entries = Vec::with_capacity(free);
            for _ in 0..free {
                row_entries.push(reps[t % reps.len()].clone());
                t /= reps.len();
            }
            // X_i = varpi^-e (C_i - sum_j H_ij X_j) must be integral
            let mut xi = Vec::with_capacity(c.cols());
            let mut ok = true;
            for col in 0..c.cols() {
                let mut r = c[(i, col)].clone();
                for (k, hij) in row_entries.iter().enumerate() {
                    let j = i + 1 + k;
                    if !hij.is_exact_zero() {
                        r = r.sub(&hij.mul(&x_rows[j][col]));
                    }
                }
                let v = r.mul(&pivot_inv);
                if v.val_lower() < 0 {
                    ok = false;
                    break;
                }
                xi.push(v);
            }
            if !ok {
                continue;
            }
            h[(i, i)] = pivot.clone();
            for (k, hij) in row_entries.iter().enumerate() {
                h[(i, i + 1 + k)] = hij.clone();
            }
            x_rows[i] = xi;
            between_rec(outer, c, m, h, x_rows, used + e, want, total, out)?;
            x_rows[i] = Vec::new();
        }
    }
    for k in i..m {
        h[(i, k)] = R::zero(&ctx);
    }
    Ok(())
}

/// Orbit normalization under a free abelian group generated by commuting
/// automorphisms `gammas`, each acting by `gamma_j` on the block `V_j` and
/// trivially elsewhere, in block coordinates with block sizes `dims`.
///
/// The representative is the unique translate whose block lattices
/// `Λ ∩ V_j` have index in `[0, v_j)` relative to the standard lattice,
/// where `v_j = v(det gamma_j|V_j)`. Returns the representative and the
/// exponents applied.
pub fn gamma_reduce<R: Dvr>(lat: &Lattice<R>, dims: &[usize], gammas: &[Matrix<R>]) -> Result<(Lattice<R>, Vec<i64>)> {
    let ctx = lat.ctx().clone();
    let m = lat.rank();
    let mut offset = 0;
    let mut total = Matrix::identity(&ctx, m);
    let mut exps = Vec::with_capacity(dims.len());
    for (j, &d) in dims.iter().enumerate() {
        let g = &gammas[j];
        let rows: Vec<usize> = (offset..offset + d).collect();
        let block = g.submatrix(&rows, &rows);
        let v = block.det_valuation()?;
        if v <= 0 {
            return Err(Error::NonFreeAction);
        }
        let mut p = Matrix::zeros(&ctx, m, d);
        for (k, &r) in rows.iter().enumerate() {
            p[(r, k)] = R::one(&ctx);
        }
        let part = lat.preimage(&p)?;
        // index of the block lattice below the standard one
        let idx = part.det_valuation();
        let k = idx.div_euclid(v);
        // apply gamma^-k on this block
        let inv = block.inverse()?;
        let mut step = Matrix::identity(&ctx, m);
        let mut pw = Matrix::identity(&ctx, d);
        for _ in 0..k.unsigned_abs() {
            pw = pw.mul(if k > 0 { &inv } else { &block });
        }
        for (a, &ra) in rows.iter().enumerate() {
            for (b, &rb) in rows.iter().enumerate() {
                step[(ra, rb)] = pw[(a, b)].clone();
            }
        }
        total = step.mul(&total);
        exps.push(k);
        offset += d;
    }
    Ok((lat.apply(&total)?, exps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Fe, Field};

    fn f3() -> Field {
        Field::new(3, 40).unwrap()
    }

    #[test]
    fn index_examples() {
        let f = f3();
        let o = Lattice::<Fe>::standard(&f, 2);
        assert_eq!(o.index(&o.scale(1)), 2);
        let d = Lattice::from_generators(&Matrix::diagonal(&f, &[f.pi_pow(1), f.pi_pow(-1)])).unwrap();
        assert_eq!(o.index(&d), 0);
        assert_eq!(o.index(&o), 0);
        assert_eq!(o.relative_position(&o.scale(1)).unwrap(), vec![1, 1]);
        let d2 = Lattice::from_generators(&Matrix::diagonal(&f, &[f.pi_pow(1), f.one()])).unwrap();
        assert_eq!(o.relative_position(&d2).unwrap(), vec![1, 0]);
    }

    #[test]
    fn sublattice_counts_rank_two() {
        let f = f3();
        let o = Lattice::<Fe>::standard(&f, 2);
        assert_eq!(o.sublattices_of_index(0).unwrap(), vec![o.clone()]);
        assert_eq!(o.sublattices_of_index(1).unwrap().len(), 4);
        assert_eq!(o.sublattices_of_index(2).unwrap().len(), 13);
        assert_eq!(o.sublattices_of_index(3).unwrap().len(), 40);
    }

    #[test]
    fn chain_counts() {
        let f = f3();
        let o = Lattice::<Fe>::standard(&f, 2);
        let x = o.sublattices_of_index(1).unwrap()[0].clone();
        assert_eq!(Lattice::count_chains(&x, &o, &[1]).unwrap(), 1);
        assert_eq!(Lattice::count_chains(&o.scale(1), &o, &[1, 1]).unwrap(), 4);
        assert_eq!(Lattice::count_chains(&o.scale(1), &o, &[1]).unwrap(), 0);
    }

    #[test]
    fn intersection_and_sum() {
        let f = f3();
        let a = Lattice::from_generators(&Matrix::diagonal(&f, &[f.pi_pow(1), f.one()])).unwrap();
        let b = Lattice::from_generators(&Matrix::diagonal(&f, &[f.one(), f.pi_pow(1)])).unwrap();
        assert_eq!(a.intersection(&b).unwrap(), Lattice::standard(&f, 2).scale(1));
        assert_eq!(a.sum(&b).unwrap(), Lattice::standard(&f, 2));
    }

    #[test]
    fn fibration_round_trip() {
        let f = f3();
        let g = Matrix::from_rows(&f, vec![vec![f.pi_pow(1), f.pi_pow(-1)], vec![f.zero(), f.pi_pow(2)]]);
        let l = Lattice::from_generators(&g).unwrap();
        let (x0, x1, lift) = l.fibrate(1);
        assert_eq!(Lattice::unfibrate(&x0, &x1, &lift).unwrap(), l);
    }

    #[test]
    fn gamma_reduce_scalar() {
        let f = f3();
        let o = Lattice::<Fe>::standard(&f, 2);
        let g = Matrix::scalar(&f, 2, &f.pi_pow(1));
        let (r1, _) = gamma_reduce(&o, &[2], std::slice::from_ref(&g)).unwrap();
        let (r2, e) = gamma_reduce(&o.scale(3), &[2], &[g]).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(e, vec![3]);
    }
}
