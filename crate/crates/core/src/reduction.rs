//! Reduction to a Levi subgroup: lattices split along `V = V^0 ⊕ V^1`, the
//! Hom-lattices between the two halves, the connecting map whose kernel
//! parametrizes the fibers, and the resulting factorization of orbital
//! integrals.
//!
//! `P = Hom(V^1, V^0)` is written in column-major coordinates, so a
//! `2n^0 × 2n^1` matrix `f` sits in `F^(4 n^0 n^1)` as `vec(f)`. Degrees are
//! exponents of `q`; quantities carrying `|Disc|^(1/2)` are tracked doubled.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::etale::FixedAlgebra;
use crate::field::{Fe, Field};
use crate::hecke::HeckeFunction;
use crate::lattice::Lattice;
use crate::matrix::Matrix;
use crate::orbital::{orbital_alpha, orbital_beta, stable_hull, Windows};
use crate::pairs::{direct_sum, match_alpha, random_integral_unit, random_pair_spread, EmbeddingPair};
use crate::quad::{Quad, QElem};
use crate::sym::Laurent;

/// `(X ∩ V^0, projection to V^1, lift)` for `X` in block coordinates.
pub fn fibrate(x: &Lattice<Fe>, d0: usize) -> (Lattice<Fe>, Lattice<Fe>, Matrix<Fe>) {
    x.fibrate(d0)
}

/// Rebuild `X = X^0 + {(s(x), x) : x in X^1}`.
pub fn rebuild(x0: &Lattice<Fe>, x1: &Lattice<Fe>, lift: &Matrix<Fe>) -> Result<Lattice<Fe>> {
    Lattice::unfibrate(x0, x1, lift)
}

/// `X ⊆ Y` read off the fibrations: `X^j ⊆ Y^j` and `s_X ≡ s_Y` modulo `Y^0`
/// on `X^1`.
pub fn fibered_inclusion(x: &Lattice<Fe>, y: &Lattice<Fe>, d0: usize) -> Result<bool> {
    let (x0, x1, sx) = x.fibrate(d0);
    let (y0, y1, sy) = y.fibrate(d0);
    if !y0.contains(&x0)? || !y1.contains(&x1)? {
        return Ok(false);
    }
    // s_Y evaluated on the basis of X^1
    let c = y1.coords(x1.basis())?;
    let diff = sx.sub(&sy.mul(&c));
    y0.contains_vectors(&diff)
}

/// Component chains of a chain in block coordinates, with their step indices.
#[derive(Clone, Debug)]
pub struct FiberedChain {
    pub chain0: Vec<Lattice<Fe>>,
    pub chain1: Vec<Lattice<Fe>>,
    pub m0: Vec<i64>,
    pub m1: Vec<i64>,
}

pub fn fibration_map(chain: &[Lattice<Fe>], d0: usize) -> FiberedChain {
    let (chain0, chain1): (Vec<_>, Vec<_>) = chain.iter().map(|x| {
        let (a, b, _) = x.fibrate(d0);
        (a, b)
    }).unzip();
    let steps = |c: &[Lattice<Fe>]| c.windows(2).map(|w| w[1].index(&w[0])).collect();
    FiberedChain { m0: steps(&chain0), m1: steps(&chain1), chain0, chain1 }
}

/// `[target : map(source)]` for a map that is bijective on the ambient spaces.
pub fn quasi_degree(source: &Lattice<Fe>, target: &Lattice<Fe>, map: &Matrix<Fe>) -> Result<i64> {
    if !map.is_square() || map.rows() != target.rank() || map.cols() != source.rank() {
        return Err(Error::WrongDimension { expected: target.rank(), found: map.rows() });
    }
    let d = map.det_valuation().map_err(|e| match e {
        Error::SingularBasis => Error::SingularMap,
        e => e,
    })?;
    Ok(d + source.det_valuation() - target.det_valuation())
}

/// Which of the two algebras of a pair: the first (whose lattices end a
/// chain) or the second (whose lattices start it).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// `+`: maps commuting with the algebra, `-`: maps twisted by its involution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Linear,
    Conj,
}

/// Two pairs on `V^0` and `V^1` over the same algebras, with a lattice chain
/// for each. `chain[0]` is stable under the second algebra, the last entry
/// under the first.
#[derive(Clone, Debug)]
pub struct SplitScenario {
    pub p0: EmbeddingPair,
    pub p1: EmbeddingPair,
    pub chain0: Vec<Lattice<Fe>>,
    pub chain1: Vec<Lattice<Fe>>,
    pub m0: Vec<i64>,
    pub m1: Vec<i64>,
    pub seed: u64,
    pub retries: u32,
}

fn abs(m: &[i64]) -> i64 {
    m.iter().sum()
}

fn generator(p: &EmbeddingPair, side: Side) -> &Matrix<Fe> {
    match side {
        Side::First => &p.a,
        Side::Second => &p.b,
    }
}

fn algebra(p: &EmbeddingPair, side: Side) -> &Quad {
    match side {
        Side::First => &p.ea,
        Side::Second => &p.eb,
    }
}

fn stable(j: &Matrix<Fe>, l: &Lattice<Fe>) -> Result<bool> {
    l.contains_vectors(&j.mul(l.basis()))
}

impl SplitScenario {
    pub fn new(p0: EmbeddingPair, p1: EmbeddingPair, chain0: Vec<Lattice<Fe>>, chain1: Vec<Lattice<Fe>>) -> Result<Self> {
        if p0.ea != p1.ea || p0.eb != p1.eb {
            return Err(Error::Invalid("pairs use different algebras"));
        }
        if chain0.is_empty() || chain0.len() != chain1.len() {
            return Err(Error::Invalid("chains must be nonempty and of equal length"));
        }
        let mut steps = [Vec::new(), Vec::new()];
        for (k, (p, c)) in [(&p0, &chain0), (&p1, &chain1)].into_iter().enumerate() {
            if !stable(&p.b, &c[0])? || !stable(&p.a, c.last().unwrap())? {
                return Err(Error::NotStable);
            }
            for w in c.windows(2) {
                if !w[1].contains(&w[0])? {
                    return Err(Error::Invalid("chain is not increasing"));
                }
                steps[k].push(w[1].index(&w[0]));
            }
        }
        let [m0, m1] = steps;
        Ok(SplitScenario { p0, p1, chain0, chain1, m0, m1, seed: 0, retries: 0 })
    }

    pub fn r(&self) -> usize {
        self.chain0.len() - 1
    }

    /// The pair on `V` preserving the decomposition.
    pub fn full_pair(&self) -> Result<EmbeddingPair> {
        direct_sum(&self.p0, &self.p1)
    }

    /// `M_1^j` (end of the chain) or `M_2^j` (start).
    pub fn endpoint(&self, side: Side, j: usize) -> &Lattice<Fe> {
        let c = if j == 0 { &self.chain0 } else { &self.chain1 };
        match side {
            Side::First => c.last().unwrap(),
            Side::Second => &c[0],
        }
    }

    /// Exponent data for the closed formulas.
    pub fn closed_forms(&self) -> Result<ClosedForms> {
        ClosedForms::of(&self.p0, &self.p1, abs(&self.m0), abs(&self.m1))
    }
}

/// `|Disc|` and `|Res|` exponents of two pairs and the chain lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForms {
    pub n0: i64,
    pub n1: i64,
    /// `v(Disc_a) + v(Disc_b)`.
    pub disc: i64,
    /// `v(Nm Res(Inv^0, Inv^1))`.
    pub res: i64,
    pub m0: i64,
    pub m1: i64,
}

impl ClosedForms {
    pub fn of(p0: &EmbeddingPair, p1: &EmbeddingPair, m0: i64, m1: i64) -> Result<Self> {
        Ok(ClosedForms {
            n0: p0.n as i64,
            n1: p1.n as i64,
            disc: p0.ea.disc_valuation() + p0.eb.disc_valuation(),
            res: resultant_valuation(p0, p1)?,
            m0,
            m1,
        })
    }

    /// Twice the exponent of `|Disc|^(-n0 n1 / 2) |Res|^-1`.
    pub fn constant_twice(&self) -> i64 {
        self.disc * self.n0 * self.n1 + self.res
    }

    /// Twice the fiber-count exponent (also the degree of `Φ`).
    pub fn fiber_twice(&self) -> i64 {
        self.constant_twice() + 2 * (self.n1 * self.m0 + self.n0 * self.m1)
    }

    /// Twice the degree of `(q_1^-, q_2^-)` on `Λ_2`.
    pub fn projection_pair_twice(&self) -> i64 {
        self.constant_twice() + 2 * (self.n1 * self.m0 - self.n0 * self.m1)
    }

    /// Degree of `q_1^+ q_2^-` on `Λ_1^+`.
    pub fn composite(&self) -> i64 {
        self.constant_twice()
    }

    /// `[Λ_1 : Λ_2]`.
    pub fn inclusion(&self) -> i64 {
        2 * self.n1 * self.m0 - 2 * self.n0 * self.m1
    }

    /// `Σ deg L_i`.
    pub fn left_compositions(&self) -> i64 {
        2 * self.n0 * self.m1
    }
}

/// `v(Nm Res(Inv(p0), Inv(p1)))` in the fixed algebra; `SingularMap` when the
/// invariants share a root.
pub fn resultant_valuation(p0: &EmbeddingPair, p1: &EmbeddingPair) -> Result<i64> {
    let d0 = p0.invariant()?.delta;
    let d1 = p1.invariant()?.delta;
    let d1 = crate::poly::Poly::new(d0.ctx(), d1.coeffs().iter().map(|c| QElem::new(d0.ctx(), c.a.clone(), c.b.clone())).collect());
    let r = d0.resultant(&d1)?;
    if r.norm().is_exact_zero() {
        return Err(Error::SingularMap);
    }
    r.norm_valuation().ok_or(Error::PrecisionExhausted)
}

/// `vec` of `f ↦ L f R` as a matrix on column-major coordinates.
fn sandwich(left: &Matrix<Fe>, right: &Matrix<Fe>) -> Matrix<Fe> {
    let f = *left.ctx();
    let (a, b) = (left.rows(), left.cols());
    let (c, d) = (right.rows(), right.cols());
    // vec(L F R) = (R^T ⊗ L) vec(F)
    Matrix::from_fn(&f, a * d, b * c, |i, j| {
        let (ir, il) = (i / a, i % a);
        let (jr, jl) = (j / b, j % b);
        right[(jr, ir)].mul(&left[(il, jl)])
    })
}

/// `Hom(M^1, M^0)` inside `P`.
fn hom_lattice(m1: &Lattice<Fe>, m0: &Lattice<Fe>) -> Result<Lattice<Fe>> {
    let inv = m1.basis().inverse()?;
    Lattice::from_generators(&sandwich(m0.basis(), &inv))
}

/// Coordinates on `P_i^+ ⊕ P_i^-` for one side.
#[derive(Clone, Debug)]
struct Frame {
    /// Columns: bases of `P^+` then `P^-`.
    basis: Matrix<Fe>,
    inverse: Matrix<Fe>,
    half: usize,
    /// `f ↦ f ζ - ζ f` and `f ↦ f ζ - ζ^σ f` on `P`.
    minus: Matrix<Fe>,
    plus: Matrix<Fe>,
}

impl Frame {
    fn new(zeta0: &Matrix<Fe>, zeta1: &Matrix<Fe>, alg: &Quad) -> Result<Self> {
        let f = *zeta0.ctx();
        let (a, b) = (zeta0.rows(), zeta1.rows());
        let id0 = Matrix::identity(&f, a);
        let id1 = Matrix::identity(&f, b);
        let right = sandwich(&id0, zeta1);
        let minus = right.sub(&sandwich(zeta0, &id1));
        let conj0 = Matrix::scalar(&f, a, alg.tr()).sub(zeta0);
        let plus = right.sub(&sandwich(&conj0, &id1));
        let lin = minus.kernel_basis()?;
        let con = plus.kernel_basis()?;
        let half = a * b / 2;
        if lin.cols() != half || con.cols() != half {
            return Err(Error::WrongDimension { expected: half, found: lin.cols().min(con.cols()) });
        }
        let basis = lin.hstack(&con);
        let inverse = basis.inverse()?;
        Ok(Frame { basis, inverse, half, minus, plus })
    }

    fn embed(&self, part: Part) -> Matrix<Fe> {
        let n = self.basis.rows();
        let cols: Vec<usize> = match part {
            Part::Linear => (0..self.half).collect(),
            Part::Conj => (self.half..2 * self.half).collect(),
        };
        self.basis.submatrix(&(0..n).collect::<Vec<_>>(), &cols)
    }

    /// `P` coordinates to `P^part` coordinates, along the complement.
    fn coords(&self, part: Part) -> Matrix<Fe> {
        let n = self.basis.rows();
        let rows: Vec<usize> = match part {
            Part::Linear => (0..self.half).collect(),
            Part::Conj => (self.half..2 * self.half).collect(),
        };
        self.inverse.submatrix(&rows, &(0..n).collect::<Vec<_>>())
    }

    /// `q^part` from `P` to `P^part` coordinates (`q^-` lands in the conjugate
    /// part, `q^+` in the linear part).
    fn q(&self, part: Part) -> Matrix<Fe> {
        match part {
            Part::Linear => self.coords(Part::Linear).mul(&self.plus),
            Part::Conj => self.coords(Part::Conj).mul(&self.minus),
        }
    }
}

/// The Hom-lattices of a split scenario inside `P = Hom(V^1, V^0)`.
#[derive(Clone, Debug)]
pub struct HomLatticeSystem {
    pub dim: usize,
    frames: [Frame; 2],
    /// `Λ_1 = Hom(M_1^1, M_1^0)`, `Λ_2 = Hom(M_2^1, M_2^0)`.
    pub lambda: [Lattice<Fe>; 2],
    /// `Λ_i^+` and `Λ_i^-` in the coordinates of `P_i^±`.
    pub lambda_pm: [[Lattice<Fe>; 2]; 2],
    /// `H_i = Hom(X_i^1, X_i^0)`.
    pub h: Vec<Lattice<Fe>>,
    /// `C_i = Hom(X_(i-1)^1, X_i^0)`, `i = 1..r`.
    pub c: Vec<Lattice<Fe>>,
    /// Zeta images on `V^0` and `V^1`, per side.
    zeta: [(Matrix<Fe>, Matrix<Fe>, Quad); 2],
}

fn side_index(side: Side) -> usize {
    match side {
        Side::First => 0,
        Side::Second => 1,
    }
}

fn part_index(part: Part) -> usize {
    match part {
        Part::Linear => 0,
        Part::Conj => 1,
    }
}

/// Lattice of the vectors `y` with `K y ∈ Λ`, for `K` of full column rank.
fn restrict(lat: &Lattice<Fe>, k: &Matrix<Fe>) -> Result<Lattice<Fe>> {
    lat.preimage(k)
}

pub fn build_hom_system(sc: &SplitScenario) -> Result<HomLatticeSystem> {
    let mut frames = Vec::with_capacity(2);
    let mut zeta = Vec::with_capacity(2);
    for side in [Side::First, Side::Second] {
        let (z0, z1) = (generator(&sc.p0, side), generator(&sc.p1, side));
        let alg = algebra(&sc.p0, side).clone();
        frames.push(Frame::new(z0, z1, &alg)?);
        zeta.push((z0.clone(), z1.clone(), alg));
    }
    let frames: [Frame; 2] = [frames[0].clone(), frames[1].clone()];
    let lambda = [
        hom_lattice(sc.endpoint(Side::First, 1), sc.endpoint(Side::First, 0))?,
        hom_lattice(sc.endpoint(Side::Second, 1), sc.endpoint(Side::Second, 0))?,
    ];
    let mut lambda_pm = Vec::with_capacity(2);
    for i in 0..2 {
        lambda_pm.push([
            restrict(&lambda[i], &frames[i].embed(Part::Linear))?,
            restrict(&lambda[i], &frames[i].embed(Part::Conj))?,
        ]);
    }
    let r = sc.r();
    let h = (0..=r).map(|i| hom_lattice(&sc.chain1[i], &sc.chain0[i])).collect::<Result<Vec<_>>>()?;
    let c = (1..=r).map(|i| hom_lattice(&sc.chain1[i - 1], &sc.chain0[i])).collect::<Result<Vec<_>>>()?;
    Ok(HomLatticeSystem {
        dim: lambda[0].rank(),
        frames,
        lambda,
        lambda_pm: [lambda_pm[0].clone(), lambda_pm[1].clone()],
        h,
        c,
        zeta: [zeta[0].clone(), zeta[1].clone()],
    })
}

/// Degrees of the maps between the Hom-lattices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    /// `Λ_2 ⇢ Λ_1`.
    pub inclusion: i64,
    /// `(q_1^-, q_2^-)` on `Λ_1`, `q_2^-` on `Λ_1^+`, `q_2^+` on `Λ_1^-`.
    pub first_triple: [i64; 3],
    /// `(q_1^-, q_2^-)` on `Λ_2`, `q_1^-` on `Λ_2^+`, `q_1^+` on `Λ_2^-`.
    pub second_triple: [i64; 3],
    /// `q_1^+ q_2^-` on `Λ_1^+`.
    pub composite: i64,
    /// `Σ deg L_i`.
    pub left_compositions: i64,
    pub phi: i64,
}

impl HomLatticeSystem {
    pub fn lambda_part(&self, side: Side, part: Part) -> &Lattice<Fe> {
        &self.lambda_pm[side_index(side)][part_index(part)]
    }

    /// `q_i^part` as a matrix from `P` into the coordinates of `P_i^part`.
    pub fn q_matrix(&self, side: Side, part: Part) -> Matrix<Fe> {
        self.frames[side_index(side)].q(part)
    }

    /// Columns: a basis of `P_i^part` in `P`.
    pub fn part_basis(&self, side: Side, part: Part) -> Matrix<Fe> {
        self.frames[side_index(side)].embed(part)
    }

    /// `q_i^-(f) = f ζ - ζ f`, `q_i^+(f) = f ζ - ζ^σ f`, as maps `V^1 → V^0`.
    pub fn q_projection(&self, side: Side, part: Part, f: &Matrix<Fe>) -> Matrix<Fe> {
        q_projection(&self.zeta[side_index(side)], part, f)
    }

    /// `q_i^a` restricted to `P_j^b`, in the part coordinates on both ends.
    fn restricted(&self, i: Side, a: Part, j: Side, b: Part) -> Matrix<Fe> {
        self.q_matrix(i, a).mul(&self.part_basis(j, b))
    }

    /// `(q_1^-, q_2^-)` from `P` to `P_1^- × P_2^-`.
    fn minus_pair(&self) -> Matrix<Fe> {
        self.q_matrix(Side::First, Part::Conj).vstack(&self.q_matrix(Side::Second, Part::Conj))
    }

    fn minus_pair_target(&self) -> Lattice<Fe> {
        self.lambda_part(Side::First, Part::Conj).direct_sum(self.lambda_part(Side::Second, Part::Conj))
    }

    /// Degree of `(q_1^-, q_2^-)` on `Λ_2`.
    pub fn projection_pair_degree(&self) -> Result<i64> {
        quasi_degree(&self.lambda[1], &self.minus_pair_target(), &self.minus_pair())
    }

    /// Whether `q_i^±` maps `Λ_i` onto `Λ_i^±`.
    pub fn projection_surjective(&self, side: Side, part: Part) -> Result<bool> {
        let i = side_index(side);
        let image = Lattice::from_generators(&self.q_matrix(side, part).mul(self.lambda[i].basis()))?;
        Ok(image == *self.lambda_part(side, part))
    }

    pub fn degrees(&self) -> Result<DegreeReport> {
        use Part::*;
        use Side::*;
        let id = Matrix::identity(self.lambda[0].ctx(), self.dim);
        let first_triple = [
            quasi_degree(&self.lambda[0], &self.minus_pair_target(), &self.minus_pair())?,
            quasi_degree(self.lambda_part(First, Linear), self.lambda_part(Second, Conj), &self.restricted(Second, Conj, First, Linear))?,
            quasi_degree(self.lambda_part(First, Conj), self.lambda_part(Second, Linear), &self.restricted(Second, Linear, First, Conj))?,
        ];
        let second_triple = [
            self.projection_pair_degree()?,
            quasi_degree(self.lambda_part(Second, Linear), self.lambda_part(First, Conj), &self.restricted(First, Conj, Second, Linear))?,
            quasi_degree(self.lambda_part(Second, Conj), self.lambda_part(First, Linear), &self.restricted(First, Linear, Second, Conj))?,
        ];
        let composite_map = self.restricted(First, Linear, Second, Conj).mul(&self.restricted(Second, Conj, First, Linear));
        let composite = quasi_degree(self.lambda_part(First, Linear), self.lambda_part(First, Linear), &composite_map)?;
        let mut left_compositions = 0;
        for (i, c) in self.c.iter().enumerate() {
            left_compositions += quasi_degree(&self.h[i + 1], c, &id)?;
        }
        let phi = self.phi().degree()?;
        Ok(DegreeReport {
            inclusion: quasi_degree(&self.lambda[1], &self.lambda[0], &id)?,
            first_triple,
            second_triple,
            composite,
            left_compositions,
            phi,
        })
    }

    /// The map whose kernel on `⊕ H_i ⊗ F/O` is the set of connecting tuples.
    pub fn phi(&self) -> Phi {
        let f = *self.lambda[0].ctx();
        let n = self.dim;
        let r = self.h.len() - 1;
        let half = n / 2;
        let rows = 2 * half + r * n;
        let cols = (r + 1) * n;
        let mut m = Matrix::zeros(&f, rows, cols);
        let put = |m: &mut Matrix<Fe>, r0: usize, c0: usize, b: &Matrix<Fe>| {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
        };
        put(&mut m, 0, 0, &self.q_matrix(Side::Second, Part::Conj));
        let id = Matrix::identity(&f, n);
        for i in 1..=r {
            let row = half + (i - 1) * n;
            put(&mut m, row, (i - 1) * n, &id.neg());
            put(&mut m, row, i * n, &id);
        }
        put(&mut m, half + r * n, r * n, &self.q_matrix(Side::First, Part::Conj));
        let mut source = self.h[0].clone();
        for h in &self.h[1..] {
            source = source.direct_sum(h);
        }
        let h0 = restrict(&self.h[0], &self.part_basis(Side::Second, Part::Conj)).expect("full column rank");
        let hr = restrict(&self.h[r], &self.part_basis(Side::First, Part::Conj)).expect("full column rank");
        let mut target = h0;
        for c in &self.c {
            target = target.direct_sum(c);
        }
        target = target.direct_sum(&hr);
        Phi { matrix: m, source, target }
    }
}

/// `q^-(f) = f ζ - ζ f` or `q^+(f) = f ζ - ζ^σ f` for `ζ` acting on both halves.
fn q_projection(zeta: &(Matrix<Fe>, Matrix<Fe>, Quad), part: Part, f: &Matrix<Fe>) -> Matrix<Fe> {
    let (z0, z1, alg) = zeta;
    let right = f.mul(z1);
    match part {
        Part::Conj => right.sub(&z0.mul(f)),
        Part::Linear => {
            let conj = Matrix::scalar(z0.ctx(), z0.rows(), alg.tr()).sub(z0);
            right.sub(&conj.mul(f))
        }
    }
}

/// `Φ` with its source `⊕ H_i` and target `H_0^- ⊕ ⊕ C_i ⊕ H_r^-`.
#[derive(Clone, Debug)]
pub struct Phi {
    pub matrix: Matrix<Fe>,
    pub source: Lattice<Fe>,
    pub target: Lattice<Fe>,
}

impl Phi {
    pub fn degree(&self) -> Result<i64> {
        quasi_degree(&self.source, &self.target, &self.matrix)
    }

    /// `Φ^-1(target)`: lifts of the kernel on the divisible quotient.
    pub fn kernel_lifts(&self) -> Result<Lattice<Fe>> {
        self.target.preimage(&self.matrix)
    }
}

/// Number of tuples `γ_i : X_i^1 → π^-M X_i^0 / X_i^0` compatible with the
/// chain maps, with `γ_0` linear for the second algebra and `γ_r` for the
/// first, as an exponent of `q`. Built from the chain bases directly.
pub fn fiber_count_at(sc: &SplitScenario, level: i64) -> Result<i64> {
    let f = sc.p0.field();
    let r = sc.r();
    let (a, b) = (2 * sc.p0.n, 2 * sc.p1.n);
    let block = a * b;
    let unknowns = (r + 1) * block;
    // γ_i = B0_i Y_i B1_i^-1 with Y_i integral: parameters `vec(Y_i)`
    let param: Vec<Matrix<Fe>> =
        (0..=r).map(|i| Ok(sandwich(sc.chain0[i].basis(), &sc.chain1[i].basis().inverse()?))).collect::<Result<_>>()?;
    let mut rows: Vec<Matrix<Fe>> = Vec::new();
    // γ ↦ coordinates in X^0 of γ applied to a basis of a lattice in V^1
    let evaluate = |target: &Lattice<Fe>, source: &Lattice<Fe>, pre: Option<&Matrix<Fe>>, post: Option<&Matrix<Fe>>| -> Result<Matrix<Fe>> {
        let right = match pre {
            Some(p) => p.mul(source.basis()),
            None => source.basis().clone(),
        };
        let left = target.basis().inverse()?;
        let left = match post {
            Some(p) => left.mul(p),
            None => left,
        };
        Ok(sandwich(&left, &right))
    };
    let place = |blocks: &[(usize, Matrix<Fe>)]| {
        let height = blocks[0].1.rows();
        let mut m = Matrix::zeros(&f, height, unknowns);
        for (k, blk) in blocks {
            for i in 0..height {
                for j in 0..block {
                    m[(i, k * block + j)] = blk[(i, j)].clone();
                }
            }
        }
        m
    };
    for i in 1..=r {
        let e = evaluate(&sc.chain0[i], &sc.chain1[i - 1], None, None)?;
        rows.push(place(&[(i, e.mul(&param[i])), (i - 1, e.neg().mul(&param[i - 1]))]));
    }
    for (idx, side) in [(0usize, Side::Second), (r, Side::First)] {
        let (z0, z1) = (generator(&sc.p0, side), generator(&sc.p1, side));
        let x0 = &sc.chain0[idx];
        let x1 = &sc.chain1[idx];
        let twisted = evaluate(x0, x1, Some(z1), None)?.sub(&evaluate(x0, x1, None, Some(z0))?);
        rows.push(place(&[(idx, twisted.mul(&param[idx]))]));
    }
    let mut system = rows[0].clone();
    for m in &rows[1..] {
        system = system.vstack(m);
    }
    if system.rank()? < unknowns {
        return Err(Error::SingularMap);
    }
    // {y integral : π^-M A y integral}, counted modulo π^M
    let scaled = system.scale(&f.pi_pow(-level));
    let sols = Lattice::standard(&f, system.rows()).preimage(&scaled)?;
    let sols = sols.intersection(&Lattice::standard(&f, unknowns))?;
    Ok(unknowns as i64 * level - Lattice::standard(&f, unknowns).index(&sols))
}

/// [`fiber_count_at`] at the first level where it stops changing, starting
/// from `bound + 2` and doubling.
pub fn fiber_count_direct(sc: &SplitScenario, bound: i64) -> Result<(i64, i64)> {
    let mut level = bound.max(0) + 2;
    for _ in 0..6 {
        let a = fiber_count_at(sc, level)?;
        let b = fiber_count_at(sc, level + 2)?;
        if a == b {
            return Ok((a, level));
        }
        level *= 2;
    }
    Err(Error::Unstable)
}

/// `q^(e/2)` as a rational, for even `e`.
pub fn root_q_power(q: u8, twice: i64) -> Option<BigRational> {
    if twice.rem_euclid(2) != 0 {
        return None;
    }
    let p = BigRational::from_integer(BigInt::from(q)).pow((twice / 2) as i32);
    Some(p)
}

/// All `m0` with `0 <= m0 <= m` componentwise.
pub fn splittings(m: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &k in m {
        out = out.into_iter().flat_map(|p| (0..=k.max(0)).map(move |x| {
            let mut p = p.clone();
            p.push(x);
            p
        })).collect();
    }
    out
}

/// One line of the Levi reduction: the full integral, the sum over
/// splittings, and the constant as a doubled `q` exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionLine<V> {
    pub lhs: V,
    pub sum: V,
    pub constant_twice: i64,
    pub rhs: Option<V>,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeviReductionReport {
    pub m: Vec<i64>,
    pub beta: ReductionLine<BigRational>,
    pub alpha: ReductionLine<Laurent>,
}

/// Factorization of orbital integrals of `p0 ⊕ p1` with `f(m)` for the given
/// pairs of `(E_1, E_2)` and for the matched `(E_0, E_3)` pairs.
pub fn verify_levi_reduction(p0: &EmbeddingPair, p1: &EmbeddingPair, m: &[i64], win: &Windows) -> Result<LeviReductionReport> {
    let q = p0.field().q();
    let (n0, n1) = (p0.n as i64, p1.n as i64);
    let n = p0.n + p1.n;
    let closed = ClosedForms::of(p0, p1, 0, 0)?;
    let e3 = FixedAlgebra::of_pair(&p0.ea, &p0.eb)?.alg;
    let a0 = match_alpha(&p0.invariant()?.delta, &e3)?;
    let a1 = match_alpha(&p1.invariant()?.delta, &e3)?;
    let alpha_closed = ClosedForms::of(&a0, &a1, 0, 0)?;
    let full_f = HeckeFunction::f_of_m(2 * n, q, m)?;
    let beta_lhs = orbital_beta(&direct_sum(p0, p1)?, &full_f, win)?.0;
    let alpha_lhs = orbital_alpha(&direct_sum(&a0, &a1)?, &full_f, win)?.value;

    let mut cache: BTreeMap<(usize, Vec<i64>), (BigRational, Laurent)> = BTreeMap::new();
    let mut levi = |j: usize, mj: &[i64]| -> Result<(BigRational, Laurent)> {
        if let Some(v) = cache.get(&(j, mj.to_vec())) {
            return Ok(v.clone());
        }
        let (bp, ap) = if j == 0 { (p0, &a0) } else { (p1, &a1) };
        let h = HeckeFunction::f_of_m(2 * bp.n, q, mj)?;
        let v = (orbital_beta(bp, &h, win)?.0, orbital_alpha(ap, &h, win)?.value);
        cache.insert((j, mj.to_vec()), v.clone());
        Ok(v)
    };
    let mut beta_sum = BigRational::zero();
    let mut alpha_sum = Laurent::zero();
    for m0 in splittings(m) {
        let m1: Vec<i64> = m.iter().zip(&m0).map(|(a, b)| a - b).collect();
        let weight = root_q_power(q, 2 * (n1 * abs(&m0) + n0 * abs(&m1))).unwrap();
        let (b0, x0) = levi(0, &m0)?;
        let (b1, x1) = levi(1, &m1)?;
        beta_sum += &weight * b0 * b1;
        alpha_sum = alpha_sum.add(&x0.mul(&x1).scale(&weight));
    }
    let beta_rhs = match root_q_power(q, closed.constant_twice()) {
        Some(c) => Some(c * &beta_sum),
        None if beta_sum.is_zero() => Some(BigRational::zero()),
        None => None,
    };
    let alpha_rhs = match root_q_power(q, alpha_closed.constant_twice()) {
        Some(c) => Some(alpha_sum.scale(&c)),
        None if alpha_sum == Laurent::zero() => Some(Laurent::zero()),
        None => None,
    };
    Ok(LeviReductionReport {
        m: m.to_vec(),
        beta: ReductionLine {
            equal: beta_rhs.as_ref() == Some(&beta_lhs),
            lhs: beta_lhs,
            sum: beta_sum,
            constant_twice: closed.constant_twice(),
            rhs: beta_rhs,
        },
        alpha: ReductionLine {
            equal: alpha_rhs.as_ref() == Some(&alpha_lhs),
            lhs: alpha_lhs,
            sum: alpha_sum,
            constant_twice: alpha_closed.constant_twice(),
            rhs: alpha_rhs,
        },
    })
}

/// Right-hand side of the intersection-number reduction with externally
/// supplied values for the `V^0` part (keyed by `m^0`), as `(value, doubled
/// exponent of the constant)`: the number is `value · q^(exponent / 2)`.
/// With `n0 = 0` only `m^0 = 0` contributes and its value is `1`.
pub fn evaluate_intersection_rhs(
    int0: &BTreeMap<Vec<i64>, BigRational>,
    n0: usize,
    beta1: &EmbeddingPair,
    m: &[i64],
    constant_twice: i64,
    win: &Windows,
) -> Result<(BigRational, i64)> {
    let q = beta1.field().q();
    let n1 = beta1.n as i64;
    let mut total = BigRational::zero();
    for m0 in splittings(m) {
        let m1: Vec<i64> = m.iter().zip(&m0).map(|(a, b)| a - b).collect();
        let value0 = if n0 == 0 {
            if m0.iter().any(|&x| x != 0) {
                continue;
            }
            BigRational::one()
        } else {
            int0.get(&m0).cloned().ok_or(Error::MissingInput)?
        };
        if value0.is_zero() {
            continue;
        }
        let weight = root_q_power(q, 2 * (n1 * abs(&m0) + n0 as i64 * abs(&m1))).unwrap();
        let h = HeckeFunction::f_of_m(2 * beta1.n, q, &m1)?;
        total += weight * value0 * orbital_beta(beta1, &h, win)?.0;
    }
    Ok((total, constant_twice))
}

/// Doubled constant exponents for the two sides of the reduction: the
/// `(E_1, E_2)` side uses both discriminants, the `(E_0, E_3)` side only that
/// of the fixed algebra.
pub fn constants_twice(p0: &EmbeddingPair, p1: &EmbeddingPair) -> Result<(i64, i64)> {
    let beta = ClosedForms::of(p0, p1, 0, 0)?.constant_twice();
    let e3 = FixedAlgebra::of_pair(&p0.ea, &p0.eb)?.alg;
    let res = resultant_valuation(p0, p1)?;
    let alpha = e3.disc_valuation() * (p0.n * p1.n) as i64 + res;
    Ok((beta, alpha))
}

fn pick<T: Clone>(v: &[T], rng: &mut ChaCha8Rng) -> Option<T> {
    if v.is_empty() {
        None
    } else {
        Some(v[(rng.next_u64() % v.len() as u64) as usize].clone())
    }
}

/// A lattice stable under `j`, near a random one.
fn random_stable(f: &Field, j: &Matrix<Fe>, rng: &mut ChaCha8Rng) -> Result<Lattice<Fe>> {
    let m = j.rows();
    let (g, _) = random_integral_unit(f, m, rng);
    let ks: Vec<Fe> = (0..m).map(|_| f.pi_pow((rng.next_u32() % 2) as i64)).collect();
    let base = Lattice::from_generators(&g.mul(&Matrix::diagonal(f, &ks)))?;
    stable_hull(j, &base)
}

/// A chain in `L(p, steps)`: start stable under `p.b`, end under `p.a`.
pub fn random_chain(p: &EmbeddingPair, steps: &[i64], rng: &mut ChaCha8Rng, tries: u32) -> Result<Option<Vec<Lattice<Fe>>>> {
    let f = p.field();
    let total = abs(steps);
    for _ in 0..tries {
        let outer = random_stable(&f, &p.a, rng)?;
        let starts: Vec<Lattice<Fe>> =
            outer.sublattices_of_index(total)?.into_iter().filter(|x| stable(&p.b, x).unwrap_or(false)).collect();
        let Some(start) = pick(&starts, rng) else { continue };
        let mut chain = vec![outer];
        let mut ok = true;
        for &s in steps.iter().skip(1).rev() {
            let top = chain.last().unwrap().clone();
            match pick(&Lattice::between(&top, &start, Some(s))?, rng) {
                Some(x) => chain.push(x),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if !steps.is_empty() {
            chain.push(start);
        }
        chain.reverse();
        return Ok(Some(chain));
    }
    Ok(None)
}

/// A scenario with `n^0 = n^1 = 1`: two random pairs with coprime invariants,
/// `r <= max_r`, steps `<= max_step`, and random chains for a random
/// splitting of the steps. Retries from derived seeds until one exists.
pub fn random_scenario(ea: &alloc::sync::Arc<Quad>, eb: &alloc::sync::Arc<Quad>, seed: u64, max_r: usize, max_step: i64) -> Result<SplitScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for retry in 0..200u32 {
        let s = rng.next_u64();
        let (p0, _) = random_pair_spread(ea, eb, 1, s, 2)?;
        let (p1, _) = random_pair_spread(ea, eb, 1, s ^ 0x9e37_79b9, 2)?;
        match resultant_valuation(&p0, &p1) {
            Err(Error::SingularMap) => continue,
            r => {
                r?;
            }
        }
        let r = (rng.next_u64() % (max_r as u64 + 1)) as usize;
        let m: Vec<i64> = (0..r).map(|_| (rng.next_u64() % (max_step as u64 + 1)) as i64).collect();
        let m0: Vec<i64> = m.iter().map(|&k| (rng.next_u64() % (k as u64 + 1)) as i64).collect();
        let m1: Vec<i64> = m.iter().zip(&m0).map(|(a, b)| a - b).collect();
        let Some(c0) = random_chain(&p0, &m0, &mut rng, 8)? else { continue };
        let Some(c1) = random_chain(&p1, &m1, &mut rng, 8)? else { continue };
        let mut sc = SplitScenario::new(p0, p1, c0, c1)?;
        sc.seed = seed;
        sc.retries = retry;
        return Ok(sc);
    }
    Err(Error::Timeout)
}
