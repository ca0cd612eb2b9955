//! Orbital integrals as weighted sums over pairs of stable lattices, taken
//! modulo the discrete subgroup of the centralizer.
//!
//! The outer lattice (stable under the first algebra) runs over one
//! representative per orbit, built block by block along the eigenspaces of the
//! centralizer; the inner lattice (stable under the second algebra) runs over
//! everything within the support distance of the Hecke function.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Fe;
use crate::hecke::HeckeFunction;
use crate::lattice::{gamma_reduce, Lattice};
use crate::matrix::Matrix;
use crate::pairs::{random_integral_unit, Centralizer, EmbeddingPair};
use crate::quad::{Kind, QElem, Quad};
use crate::ring::{Dvr, Ring};
use crate::sym::Laurent;

/// A lattice stable under a quadratic algebra, as lattices over its factors.
#[derive(Clone, Debug)]
pub enum Stable {
    Field(Lattice<QElem>),
    Split(Lattice<Fe>, Lattice<Fe>),
}

/// `F`-coordinates of generators of a stable lattice given in component
/// coordinates (pairs `(a, b)` for `a + b z` in the field case).
fn local_gens(alg: &Arc<Quad>, s: &Stable) -> Matrix<Fe> {
    match s {
        Stable::Field(x) => realize_field(alg, x.basis()),
        Stable::Split(p, m) => p.basis().block_diag(m.basis()),
    }
}

/// `Λ + J Λ`: the smallest `J`-stable lattice containing `Λ`.
pub fn stable_hull(j: &Matrix<Fe>, lat: &Lattice<Fe>) -> Result<Lattice<Fe>> {
    Lattice::from_generators(&lat.basis().hstack(&j.mul(lat.basis())))
}

/// `{x in Λ : J x in Λ}`: the largest `J`-stable lattice inside `Λ`.
pub fn stable_core(j: &Matrix<Fe>, lat: &Lattice<Fe>) -> Result<Lattice<Fe>> {
    let b = lat.basis();
    let m = b.rows();
    let local = lat.coords(&j.mul(b))?;
    let gens = Matrix::identity(b.ctx(), m).hstack(&local.transpose());
    let d = Lattice::from_generators(&gens)?.dual()?;
    Lattice::from_generators(&b.mul(d.basis()))
}

/// Whether some `J`-stable lattice lies between `π^hi Λ` and `π^lo Λ`.
fn feasible(j: &Matrix<Fe>, lat: &Lattice<Fe>, lo: i64, hi: i64) -> Result<bool> {
    let lower = stable_hull(j, &lat.scale(hi))?;
    let upper = stable_core(j, &lat.scale(lo))?;
    upper.contains(&lower)
}

fn image_of_idempotent(e: &Matrix<Fe>) -> Result<Matrix<Fe>> {
    let f = *e.ctx();
    e.sub(&Matrix::identity(&f, e.rows())).kernel_basis()
}

/// Coordinates on `F^2n` adapted to an embedded quadratic algebra and to a
/// list of commuting idempotents (the eigenblocks of a centralizer).
///
/// Field case: columns `v_1, z v_1, ..., v_n, z v_n`, with the `v_i` of each
/// block spanning it over the algebra. Split case: a basis of the first
/// eigenspace followed by one of the second, each ordered by block.
#[derive(Clone, Debug)]
pub struct AlgebraCoords {
    alg: Arc<Quad>,
    gen: Matrix<Fe>,
    p: Matrix<Fe>,
    p_inv: Matrix<Fe>,
    blocks: Vec<usize>,
}

impl AlgebraCoords {
    pub fn new(alg: &Arc<Quad>, gen: &Matrix<Fe>, idempotents: &[Matrix<Fe>]) -> Result<Self> {
        let f = alg.field();
        let m = gen.rows();
        let ids = if idempotents.is_empty() { vec![Matrix::identity(&f, m)] } else { idempotents.to_vec() };
        let mut blocks = Vec::with_capacity(ids.len());
        let p = match alg.roots() {
            Some((r1, r2)) => {
                let plus = gen.sub(&Matrix::scalar(&f, m, r2)).scale(&r1.sub(r2).inv()?);
                let minus = Matrix::identity(&f, m).sub(&plus);
                let (mut cp, mut cm) = (Vec::new(), Vec::new());
                for e in &ids {
                    let kp = image_of_idempotent(&e.mul(&plus))?;
                    let km = image_of_idempotent(&e.mul(&minus))?;
                    if kp.cols() != km.cols() {
                        return Err(Error::WrongDimension { expected: kp.cols(), found: km.cols() });
                    }
                    blocks.push(kp.cols());
                    cp.extend(kp.columns());
                    cm.extend(km.columns());
                }
                cp.extend(cm);
                Matrix::from_cols(&f, m, &cp)
            }
            None => {
                let mut cols: Vec<Vec<Fe>> = Vec::with_capacity(m);
                for e in &ids {
                    let u = image_of_idempotent(e)?;
                    let want = u.cols() / 2;
                    let mut chosen: Vec<Vec<Fe>> = Vec::new();
                    for c in u.columns() {
                        if chosen.len() == 2 * want {
                            break;
                        }
                        let jc = gen.mul_vec(&c);
                        let mut trial = chosen.clone();
                        trial.push(c);
                        trial.push(jc);
                        let all: Vec<Vec<Fe>> = cols.iter().chain(trial.iter()).cloned().collect();
                        if Matrix::from_cols(&f, m, &all).rank()? == all.len() {
                            chosen = trial;
                        }
                    }
                    if chosen.len() != 2 * want {
                        return Err(Error::FactorFail);
                    }
                    blocks.push(want);
                    cols.extend(chosen);
                }
                Matrix::from_cols(&f, m, &cols)
            }
        };
        if blocks.iter().sum::<usize>() * 2 != m {
            return Err(Error::WrongDimension { expected: m / 2, found: blocks.iter().sum() });
        }
        let p_inv = p.inverse()?;
        Ok(AlgebraCoords { alg: alg.clone(), gen: gen.clone(), p, p_inv, blocks })
    }

    pub fn alg(&self) -> &Arc<Quad> {
        &self.alg
    }
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }
    fn n(&self) -> usize {
        self.gen.rows() / 2
    }

    /// `F`-coordinate indices belonging to block `j`.
    fn block_indices(&self, j: usize) -> Vec<usize> {
        let start: usize = self.blocks[..j].iter().sum();
        let d = self.blocks[j];
        if self.alg.is_field() {
            (start..start + d).flat_map(|i| [2 * i, 2 * i + 1]).collect()
        } else {
            let n = self.n();
            (start..start + d).chain(n + start..n + start + d).collect()
        }
    }

    /// `F`-coordinate indices of blocks `j, j+1, ...`, in the order used by
    /// the component realization.
    fn tail_indices(&self, j: usize) -> Vec<usize> {
        let start: usize = self.blocks[..j].iter().sum();
        let n = self.n();
        if self.alg.is_field() {
            (2 * start..2 * n).collect()
        } else {
            (start..n).chain(n + start..2 * n).collect()
        }
    }

    pub fn to_lattice(&self, s: &Stable) -> Result<Lattice<Fe>> {
        Lattice::from_generators(&self.p.mul(&local_gens(&self.alg, s)))
    }

    /// Component lattices of a stable lattice (not checked for stability).
    pub fn components(&self, lat: &Lattice<Fe>) -> Result<Stable> {
        let y = self.p_inv.mul(lat.basis());
        let n = self.n();
        if self.alg.is_field() {
            let g = Matrix::from_fn(&self.alg, n, y.cols(), |i, c| {
                QElem::new(&self.alg, y[(2 * i, c)].clone(), y[(2 * i + 1, c)].clone())
            });
            Ok(Stable::Field(Lattice::from_generators(&g)?))
        } else {
            let all: Vec<usize> = (0..y.cols()).collect();
            let top: Vec<usize> = (0..n).collect();
            let bottom: Vec<usize> = (n..2 * n).collect();
            Ok(Stable::Split(
                Lattice::from_generators(&y.submatrix(&top, &all))?,
                Lattice::from_generators(&y.submatrix(&bottom, &all))?,
            ))
        }
    }

    pub fn is_stable(&self, lat: &Lattice<Fe>) -> Result<bool> {
        lat.contains_vectors(&self.gen.mul(lat.basis()))
    }

    /// Every stable lattice `X` with `lower ⊆ X ⊆ upper`.
    pub fn stable_between(&self, lower: &Lattice<Fe>, upper: &Lattice<Fe>) -> Result<Vec<Lattice<Fe>>> {
        let hull = stable_hull(&self.gen, lower)?;
        let core = stable_core(&self.gen, upper)?;
        if !core.contains(&hull)? {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        match (self.components(&core)?, self.components(&hull)?) {
            (Stable::Field(c), Stable::Field(h)) => {
                for x in Lattice::between(&c, &h, None)? {
                    out.push(self.to_lattice(&Stable::Field(x))?);
                }
            }
            (Stable::Split(cp, cm), Stable::Split(hp, hm)) => {
                let minus = Lattice::between(&cm, &hm, None)?;
                for xp in Lattice::between(&cp, &hp, None)? {
                    for xm in &minus {
                        out.push(self.to_lattice(&Stable::Split(xp.clone(), xm.clone()))?);
                    }
                }
            }
            _ => unreachable!("components follow the algebra type"),
        }
        Ok(out)
    }
}

/// Ramification of the algebra's field over `F` (1 when split).
fn ramification(alg: &Quad) -> i64 {
    if alg.kind() == Kind::Ramified {
        2
    } else {
        1
    }
}

/// Candidate block lattices in `R^d` at window `w` (in units of `π = ϖ^e`):
/// one per orbit of `gamma` when given, otherwise all within `π^±w`.
fn block_options<R: Dvr>(ctx: &R::Ctx, d: usize, e: i64, w: i64, gamma: Option<&Matrix<R>>) -> Result<Vec<Lattice<R>>> {
    if d == 1 {
        let range = match gamma {
            Some(g) => 0..g[(0, 0)].valuation().ok_or(Error::NonFreeAction)?,
            None => -w * e..w * e + 1,
        };
        return Ok(range.map(|k| Lattice::from_canonical(Matrix::diagonal(ctx, &[R::uniformizer_pow(ctx, k)]))).collect());
    }
    let std = Lattice::<R>::standard(ctx, d);
    let all = Lattice::between(&std.scale(-w * e), &std.scale(w * e), None)?;
    let Some(g) = gamma else { return Ok(all) };
    let mut seen = BTreeMap::new();
    for x in all {
        let (r, _) = gamma_reduce(&x, &[d], core::slice::from_ref(g))?;
        seen.entry(r.key()).or_insert(r);
    }
    Ok(seen.into_values().collect())
}

fn block_upper<R: Ring>(a: &Matrix<R>, b: &Matrix<R>, c: &Matrix<R>) -> Matrix<R> {
    let zero = Matrix::zeros(a.ctx(), c.rows(), a.cols());
    a.hstack(b).vstack(&zero.hstack(c))
}

/// The lattice with graded pieces `x` (first) and `rest`, whose lift is `x T`
/// with `T` read off `2 d r` parameters: `a + b z` entries in the field case,
/// the two eigenspace matrices one after the other in the split case.
/// Returns its `F`-basis in local coordinates and its components.
fn glue(alg: &Arc<Quad>, x: &Stable, rest: &Stable, p: &[Fe]) -> Result<(Matrix<Fe>, Stable)> {
    let f = alg.field();
    match (x, rest) {
        (Stable::Field(x), Stable::Field(r)) => {
            let (d, k) = (x.rank(), r.rank());
            let t = Matrix::from_fn(alg, d, k, |i, c| {
                QElem::new(alg, p[2 * (i * k + c)].clone(), p[2 * (i * k + c) + 1].clone())
            });
            let b = block_upper(x.basis(), &x.basis().mul(&t), r.basis());
            let s = Stable::Field(Lattice::from_generators(&b)?);
            Ok((realize_field(alg, &b), s))
        }
        (Stable::Split(xp, xm), Stable::Split(rp, rm)) => {
            let (d, k) = (xp.rank(), rp.rank());
            let tp = Matrix::from_fn(&f, d, k, |i, c| p[i * k + c].clone());
            let tm = Matrix::from_fn(&f, d, k, |i, c| p[d * k + i * k + c].clone());
            let bp = block_upper(xp.basis(), &xp.basis().mul(&tp), rp.basis());
            let bm = block_upper(xm.basis(), &xm.basis().mul(&tm), rm.basis());
            let s = Stable::Split(Lattice::from_generators(&bp)?, Lattice::from_generators(&bm)?);
            Ok((bp.block_diag(&bm), s))
        }
        _ => unreachable!("components follow the algebra type"),
    }
}

/// An `E`-matrix as the matrix of the same map on `F`-coordinates `(a, b)`.
fn realize_field(alg: &Arc<Quad>, c: &Matrix<QElem>) -> Matrix<Fe> {
    let f = alg.field();
    let z = QElem::generator(alg);
    let mut g = Matrix::zeros(&f, 2 * c.rows(), 2 * c.cols());
    for k in 0..c.cols() {
        for i in 0..c.rows() {
            let x = &c[(i, k)];
            let zx = z.mul(x);
            g[(2 * i, 2 * k)] = x.a.clone();
            g[(2 * i + 1, 2 * k)] = x.b.clone();
            g[(2 * i, 2 * k + 1)] = zx.a;
            g[(2 * i + 1, 2 * k + 1)] = zx.b;
        }
    }
    g
}

/// Representatives of `U / O^k` for a lattice `U ⊇ O^k`.
fn coset_reps(u: &Lattice<Fe>) -> Vec<Vec<Fe>> {
    let f = *u.ctx();
    let digits: Vec<Vec<Fe>> = u.diagonal_exponents().iter().map(|&a| Fe::representatives(&f, 0, -a)).collect();
    cartesian(&digits).into_iter().map(|c| u.basis().mul_vec(&c)).collect()
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for prefix in &out {
            for x in l {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Enumeration windows: grown from 0 until the sum is unchanged over two
/// further steps, failing past `max`. No stop is accepted before `floor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Windows {
    pub max: i64,
    pub floor: i64,
}

impl Windows {
    pub fn new(max: i64) -> Self {
        Windows { max, floor: 0 }
    }
}

impl Default for Windows {
    fn default() -> Self {
        Windows::new(10)
    }
}

/// A lattice sum together with the window at which it stabilized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSum {
    pub value: Laurent,
    pub window: i64,
}

type Weight<'a> = dyn Fn(&Lattice<Fe>, &Lattice<Fe>) -> Result<Laurent> + Sync + 'a;

/// The two algebras of a pair placed for enumeration: outer coordinates
/// adapted to the centralizer blocks, and the inner generator in them.
struct Plan {
    outer: AlgebraCoords,
    inner: AlgebraCoords,
    inner_local: Vec<Matrix<Fe>>,
    inner_tail: Vec<Matrix<Fe>>,
    gamma_field: Vec<Matrix<QElem>>,
    gamma_split: Vec<Matrix<Fe>>,
}

impl Plan {
    fn new(
        outer_alg: &Arc<Quad>,
        outer_gen: &Matrix<Fe>,
        inner_alg: &Arc<Quad>,
        inner_gen: &Matrix<Fe>,
        cent: &Centralizer,
    ) -> Result<Plan> {
        let outer = AlgebraCoords::new(outer_alg, outer_gen, &cent.idempotents())?;
        let inner = AlgebraCoords::new(inner_alg, inner_gen, &[])?;
        let moved = outer.p_inv.mul(inner_gen).mul(&outer.p);
        let nb = outer.blocks.len();
        let inner_local = (0..nb)
            .map(|j| {
                let idx = outer.block_indices(j);
                moved.submatrix(&idx, &idx)
            })
            .collect();
        let inner_tail = (0..nb)
            .map(|j| {
                let idx = outer.tail_indices(j);
                moved.submatrix(&idx, &idx)
            })
            .collect();
        let mut gamma_field = Vec::new();
        let mut gamma_split = Vec::new();
        for (j, g) in cent.gammas().iter().enumerate() {
            let local = outer.p_inv.mul(g).mul(&outer.p);
            let start: usize = outer.blocks[..j].iter().sum();
            let d = outer.blocks[j];
            if outer.alg.is_field() {
                let alg = outer.alg.clone();
                gamma_field.push(Matrix::from_fn(&alg, d, d, |i, k| {
                    let (r, c) = (2 * (start + i), 2 * (start + k));
                    QElem::new(&alg, local[(r, c)].clone(), local[(r + 1, c)].clone())
                }));
            } else {
                let idx: Vec<usize> = (start..start + d).collect();
                gamma_split.push(local.submatrix(&idx, &idx));
            }
        }
        Ok(Plan { outer, inner, inner_local, inner_tail, gamma_field, gamma_split })
    }

    /// One outer lattice per orbit among those reachable at window `w`.
    fn outer_reps(&self, w: i64, lo: i64, hi: i64) -> Result<Vec<Lattice<Fe>>> {
        let alg = &self.outer.alg;
        let f = alg.field();
        let e = ramification(alg);
        let mut per_block: Vec<Vec<Stable>> = Vec::new();
        for (j, &d) in self.outer.blocks.iter().enumerate() {
            let options: Vec<Stable> = if alg.is_field() {
                block_options::<QElem>(alg, d, e, w, Some(&self.gamma_field[j]))?.into_iter().map(Stable::Field).collect()
            } else {
                let plus = block_options::<Fe>(&f, d, 1, w, Some(&self.gamma_split[j]))?;
                let minus = block_options::<Fe>(&f, d, 1, w, None)?;
                plus.iter().flat_map(|p| minus.iter().map(move |m| Stable::Split(p.clone(), m.clone()))).collect()
            };
            let mut kept = Vec::new();
            for s in options {
                let lat = Lattice::from_generators(&local_gens(alg, &s))?;
                if feasible(&self.inner_local[j], &lat, lo, hi)? {
                    kept.push(s);
                }
            }
            per_block.push(kept);
        }
        let mut out = Vec::new();
        for combo in cartesian(&per_block) {
            let mut acc = vec![combo.last().expect("at least one block").clone()];
            for j in (0..combo.len() - 1).rev() {
                let mut next = Vec::new();
                for rest in &acc {
                    for s in self.lifts(j, &combo[j], rest, hi - lo)? {
                        let lat = Lattice::from_generators(&local_gens(alg, &s))?;
                        if feasible(&self.inner_tail[j], &lat, lo, hi)? {
                            next.push(s);
                        }
                    }
                }
                acc = next;
            }
            for s in &acc {
                out.push(self.outer.to_lattice(s)?);
            }
        }
        Ok(out)
    }

    /// Every lattice with graded pieces `x` (block `j`) and `rest` (blocks
    /// after `j`) satisfying `π^gap J Λ ⊆ Λ` for the inner generator `J`.
    ///
    /// In a basis adapted to the flag, `J` becomes block upper triangular and
    /// its corner is linear in the lift parameters, so the admissible lifts
    /// form a lattice containing the integral ones.
    fn lifts(&self, j: usize, x: &Stable, rest: &Stable, gap: i64) -> Result<Vec<Stable>> {
        let alg = &self.outer.alg;
        let f = alg.field();
        let (d, r) = match (x, rest) {
            (Stable::Field(a), Stable::Field(b)) => (a.rank(), b.rank()),
            (Stable::Split(a, _), Stable::Split(b, _)) => (a.rank(), b.rank()),
            _ => unreachable!("components follow the algebra type"),
        };
        let k = 2 * d * r;
        let jt = &self.inner_tail[j];
        let conj = |p: &[Fe]| -> Result<Matrix<Fe>> {
            let (b, _) = glue(alg, x, rest, p)?;
            Ok(b.inverse()?.mul(jt).mul(&b))
        };
        let zero = vec![f.zero(); k];
        let base = conj(&zero)?;
        let scale = f.pi_pow(gap);
        let mut cols = Vec::with_capacity(k);
        for i in 0..k {
            let mut p = zero.clone();
            p[i] = f.one();
            cols.push(conj(&p)?.sub(&base).scale(&scale).vec_cols());
        }
        let rows = cols[0].len();
        let linear = Matrix::from_cols(&f, rows, &cols);
        let admissible = Lattice::from_generators(&linear.transpose())?.dual()?;
        let u = admissible.sum(&Lattice::standard(&f, k))?;
        coset_reps(&u).iter().map(|p| glue(alg, x, rest, p).map(|(_, s)| s)).collect()
    }

    fn contribution(&self, outer: &Lattice<Fe>, f: &HeckeFunction, lo: i64, hi: i64, weight: &Weight) -> Result<Laurent> {
        let mut total = Laurent::zero();
        for x in self.inner.stable_between(&outer.scale(hi), &outer.scale(lo))? {
            let c = f.at(&outer.relative_position(&x)?);
            if !c.is_zero() {
                total = total.add(&weight(outer, &x)?.scale(&c));
            }
        }
        Ok(total)
    }
}

#[cfg(feature = "parallel")]
fn map_all<T: Sync, U: Send>(xs: &[T], g: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    use rayon::prelude::*;
    xs.par_iter().map(g).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_all<T, U>(xs: &[T], g: impl Fn(&T) -> Result<U>) -> Result<Vec<U>> {
    xs.iter().map(g).collect()
}

/// `Σ f(Λ, X) · weight(Λ, X)` over outer lattices `Λ` modulo `Γ` and inner
/// lattices `X`, grown until stable.
fn lattice_sum(plan: &Plan, f: &HeckeFunction, weight: &Weight, win: &Windows) -> Result<LatticeSum> {
    let Some((lo, hi)) = f.entry_range() else {
        return Ok(LatticeSum { value: Laurent::zero(), window: 0 });
    };
    let mut cache: BTreeMap<String, Laurent> = BTreeMap::new();
    let mut history: Vec<Laurent> = Vec::new();
    for w in 0..=win.max {
        let reps = plan.outer_reps(w, lo, hi)?;
        let fresh: Vec<(String, &Lattice<Fe>)> =
            reps.iter().map(|l| (l.key(), l)).filter(|(k, _)| !cache.contains_key(k)).collect();
        let values = map_all(&fresh, |(_, l)| plan.contribution(l, f, lo, hi, weight))?;
        for ((k, _), v) in fresh.into_iter().zip(values) {
            cache.insert(k, v);
        }
        let mut total = Laurent::zero();
        for l in &reps {
            total = total.add(&cache[&l.key()]);
        }
        history.push(total);
        let h = history.len();
        if w >= win.floor && h >= 3 && history[h - 1] == history[h - 2] && history[h - 2] == history[h - 3] {
            return Ok(LatticeSum { value: history[h - 1].clone(), window: w - 2 });
        }
    }
    Err(Error::WindowOverflow { needed: win.max + 1, cap: win.max })
}

fn check_rank(n: usize, f: &HeckeFunction, q: u8) -> Result<()> {
    if f.rank() != 2 * n {
        return Err(Error::WrongDimension { expected: 2 * n, found: f.rank() });
    }
    if f.q() != q {
        return Err(Error::Invalid("Hecke function and pair use different residue fields"));
    }
    Ok(())
}

/// `O(β, f)`: the `f`-weighted count of pairs `(Λ_1, Λ_2)` of lattices
/// stable under the two algebras, modulo `Γ`.
pub fn orbital_beta(beta: &EmbeddingPair, f: &HeckeFunction, win: &Windows) -> Result<(BigRational, i64)> {
    check_rank(beta.n, f, beta.field().q())?;
    let cent = beta.centralizer()?;
    let plan = Plan::new(&beta.ea, &beta.a, &beta.eb, &beta.b, &cent)?;
    let one = |_: &Lattice<Fe>, _: &Lattice<Fe>| Ok(Laurent::one());
    let s = lattice_sum(&plan, f, &one, win)?;
    Ok((s.value.coeff(0), s.window))
}

/// The data needed to evaluate transfer factors for a pair on `(E_0, E_3)`.
#[derive(Clone, Debug)]
pub struct TransferContext {
    plus: Matrix<Fe>,
    minus: Matrix<Fe>,
    outer_gen: Matrix<Fe>,
    inner_gen: Matrix<Fe>,
}

impl TransferContext {
    pub fn new(alpha: &EmbeddingPair) -> Result<Self> {
        let f = alpha.field();
        let m = 2 * alpha.n;
        let Some((r1, r2)) = alpha.ea.roots() else { return Err(Error::Invalid("first algebra must be split")) };
        let plus = alpha.a.sub(&Matrix::scalar(&f, m, r2)).scale(&r1.sub(r2).inv()?);
        let minus = Matrix::identity(&f, m).sub(&plus);
        // E_3 ⊗ (eigenspace) -> F^2n must be bijective for both eigenspaces
        for e in [&plus, &minus] {
            let img = image_of_idempotent(e)?;
            if img.hstack(&alpha.b.mul(&img)).rank()? != m {
                return Err(Error::SingularMap);
            }
        }
        Ok(TransferContext { plus, minus, outer_gen: alpha.a.clone(), inner_gen: alpha.b.clone() })
    }

    fn module_span(&self, e: &Matrix<Fe>, lat: &Lattice<Fe>) -> Result<Lattice<Fe>> {
        let part = e.mul(lat.basis());
        Lattice::from_generators(&part.hstack(&self.inner_gen.mul(&part)))
    }

    /// `Ω(Λ_0, Λ_3) = (-1)^a Q^(b - a)` with `a = [Λ_3 : O Λ_0^+]`,
    /// `b = [Λ_3 : O Λ_0^-]`.
    pub fn transfer_factor(&self, l0: &Lattice<Fe>, l3: &Lattice<Fe>) -> Result<Laurent> {
        if !l0.contains_vectors(&self.outer_gen.mul(l0.basis()))? || !l3.contains_vectors(&self.inner_gen.mul(l3.basis()))? {
            return Err(Error::NotStable);
        }
        let a = l3.index(&self.module_span(&self.plus, l0)?);
        let b = l3.index(&self.module_span(&self.minus, l0)?);
        let sign = if a.rem_euclid(2) == 0 { 1 } else { -1 };
        Ok(Laurent::monomial(BigRational::from_integer(BigInt::from(sign)), b - a))
    }
}

/// A random invertible matrix commuting with `j`: a combination of a basis of
/// the commutant with coefficients `c π^k`, `c` a residue digit and
/// `0 <= k <= spread`.
pub fn random_commuting(j: &Matrix<Fe>, rng: &mut ChaCha8Rng, spread: u32) -> Result<Matrix<Fe>> {
    let f = *j.ctx();
    let m = j.rows();
    let mut cols = Vec::with_capacity(m * m);
    for c in 0..m {
        for r in 0..m {
            let mut e = Matrix::zeros(&f, m, m);
            e[(r, c)] = f.one();
            cols.push(e.mul(j).sub(&j.mul(&e)).vec_cols());
        }
    }
    let ker = Matrix::from_cols(&f, m * m, &cols).kernel_basis()?;
    for _ in 0..64 {
        let mut v = vec![f.zero(); m * m];
        for k in 0..ker.cols() {
            let digit = (rng.next_u32() % f.q() as u32) as u8;
            let shift = (rng.next_u32() % (spread + 1)) as i64;
            let c = f.constant(digit).mul(&f.pi_pow(shift));
            for (i, x) in v.iter_mut().enumerate() {
                *x = x.add(&ker[(i, k)].mul(&c));
            }
        }
        let h = Matrix::from_vec_cols(&f, m, m, &v);
        if h.rank()? == m {
            return Ok(h);
        }
    }
    Err(Error::Timeout)
}

/// Both sides of `Ω(h_0 Λ_0, h_3 Λ_3) = |h_0|^s η(h_3) Ω(Λ_0, Λ_3)` for random
/// stable lattices and random `h_0`, `h_3` commuting with the two algebras.
pub fn transfer_law_sample(alpha: &EmbeddingPair, rng: &mut ChaCha8Rng) -> Result<(Laurent, Laurent)> {
    let f = alpha.field();
    let m = 2 * alpha.n;
    let ctx = TransferContext::new(alpha)?;
    let random_lattice = |rng: &mut ChaCha8Rng| -> Result<Lattice<Fe>> {
        let (g, _) = random_integral_unit(&f, m, rng);
        let ks: Vec<Fe> = (0..m).map(|_| f.pi_pow((rng.next_u32() % 3) as i64 - 1)).collect();
        Lattice::from_generators(&g.mul(&Matrix::diagonal(&f, &ks)))
    };
    let l0 = stable_hull(&alpha.a, &random_lattice(rng)?)?;
    let l3 = stable_hull(&alpha.b, &random_lattice(rng)?)?;
    let h0 = random_commuting(&alpha.a, rng, 2)?;
    let h3 = random_commuting(&alpha.b, rng, 2)?;
    // h_0 = (a, b) on the two eigenspaces of the split algebra
    let kp = image_of_idempotent(&ctx.plus)?;
    let km = image_of_idempotent(&ctx.minus)?;
    let frame = kp.hstack(&km);
    let local = frame.inverse()?.mul(&h0).mul(&frame);
    let (top, bottom): (Vec<usize>, Vec<usize>) = ((0..alpha.n).collect(), (alpha.n..m).collect());
    let abs = abs_character(&local.submatrix(&top, &top), &local.submatrix(&bottom, &bottom))?;
    let lhs = ctx.transfer_factor(&l0.apply(&h0)?, &l3.apply(&h3)?)?;
    let rhs = ctx.transfer_factor(&l0, &l3)?.shift(2 * abs).scale(&BigRational::from_integer(BigInt::from(eta_of(&h3)?)));
    Ok((lhs, rhs))
}

/// `|det a / det b|` as an exponent of `q`.
pub fn abs_character(a: &Matrix<Fe>, b: &Matrix<Fe>) -> Result<i64> {
    Ok(b.det_valuation()? - a.det_valuation()?)
}

/// `η` of an automorphism commuting with the second algebra: the parity of
/// `v(det)`, since the `F`-determinant is the norm of the algebra determinant.
pub fn eta_of(h: &Matrix<Fe>) -> Result<i8> {
    Ok(if h.det_valuation()?.rem_euclid(2) == 0 { 1 } else { -1 })
}

/// `O(α, f, s)` as a Laurent polynomial in `Q = q^(s/2)`.
pub fn orbital_alpha(alpha: &EmbeddingPair, f: &HeckeFunction, win: &Windows) -> Result<LatticeSum> {
    check_rank(alpha.n, f, alpha.field().q())?;
    let ctx = TransferContext::new(alpha)?;
    let cent = alpha.centralizer()?;
    let plan = Plan::new(&alpha.ea, &alpha.a, &alpha.eb, &alpha.b, &cent)?;
    let omega = |l0: &Lattice<Fe>, l3: &Lattice<Fe>| ctx.transfer_factor(l0, l3);
    lattice_sum(&plan, f, &omega, win)
}

/// `Σ c_k`.
pub fn value_at_zero(v: &Laurent) -> BigRational {
    v.eval(&BigRational::one())
}

/// `Σ c_k k / 2`: the derivative at `s = 0` divided by `log q`.
pub fn derivative_at_zero(v: &Laurent) -> BigRational {
    let mut s = BigRational::zero();
    for (&k, c) in v.terms() {
        s += c * BigRational::new(BigInt::from(k), BigInt::from(2));
    }
    s
}

/// `v(Q) = sign · Q^(2r) · v(1/Q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalEquation {
    pub sign: i8,
    pub r: BigRational,
}

pub fn functional_equation_probe(v: &Laurent) -> Option<FunctionalEquation> {
    let lo = *v.terms().keys().next()?;
    let hi = *v.terms().keys().next_back()?;
    let shift = lo + hi;
    let mirrored = v.invert_variable().shift(shift);
    let sign = if mirrored == *v {
        1
    } else if mirrored.neg() == *v {
        -1
    } else {
        return None;
    };
    Some(FunctionalEquation { sign, r: BigRational::new(BigInt::from(shift), BigInt::from(2)) })
}

/// Multiplicity of `Q = 1` as a root (`s = 0`); `None` for the zero polynomial.
pub fn vanishing_order(v: &Laurent) -> Option<u32> {
    let lo = *v.terms().keys().next()?;
    let hi = *v.terms().keys().next_back()?;
    // coefficients of Q^-lo v, low degree first
    let mut c: Vec<BigRational> = (lo..=hi).map(|k| v.coeff(k)).collect();
    let mut order = 0;
    loop {
        let total: BigRational = c.iter().cloned().sum();
        if !total.is_zero() {
            return Some(order);
        }
        // divide by (Q - 1), synthetic division from the top
        let deg = c.len() - 1;
        let mut quot = vec![BigRational::zero(); deg];
        let mut carry = BigRational::zero();
        for i in (1..=deg).rev() {
            carry += &c[i];
            quot[i - 1] = carry.clone();
        }
        c = quot;
        order += 1;
    }
}

/// Vanishing order of `O(α, f, s)` at `s = 0` against the number of factors
/// whose functional equation has sign `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderReport {
    pub order: Option<u32>,
    pub estimate: u32,
    pub holds: bool,
}

/// `factors`: pairs for the irreducible pieces of `α`'s invariant. Each is
/// probed with `1, T_1, T_2` of its own rank until the integral is nonzero,
/// and counts when that integral has sign `-1`.
pub fn order_lower_bound_check(
    alpha: &EmbeddingPair,
    f: &HeckeFunction,
    factors: &[EmbeddingPair],
    win: &Windows,
) -> Result<OrderReport> {
    let v = orbital_alpha(alpha, f, win)?.value;
    let mut estimate = 0;
    for p in factors {
        let rank = 2 * p.n;
        for probe in [HeckeFunction::unit(rank, f.q()), HeckeFunction::t(rank, f.q(), 1), HeckeFunction::t(rank, f.q(), 2)] {
            let w = orbital_alpha(p, &probe, win)?.value;
            if w.is_zero() {
                continue;
            }
            if functional_equation_probe(&w).is_some_and(|fe| fe.sign < 0) {
                estimate += 1;
            }
            break;
        }
    }
    let order = vanishing_order(&v);
    let holds = order.is_none_or(|o| o >= estimate);
    Ok(OrderReport { order, estimate, holds })
}
