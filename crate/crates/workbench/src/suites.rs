//! The verification suites. Each suite is a list of independent cases run on
//! a rayon pool and collected in order, then rerun at precision + 8.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use num_rational::BigRational;
use num_traits::Zero;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use wb_core::etale::FixedAlgebra;
use wb_core::hecke::{partial_satake_closed, satake_s_closed, satake_t_closed, HeckeFunction};
use wb_core::orbital::*;
use wb_core::pairs::{direct_sum, match_alpha, random_pair, random_pair_spread, EmbeddingPair};
use wb_core::quad::{Kind, Quad};
use wb_core::reduction::{build_hom_system, fiber_count_at, fiber_count_direct, random_scenario, verify_levi_reduction, SplitScenario};
use wb_core::sym::{check_complete_elementary_identity, complete, dimension_census, elementary, SymLaurent};
use wb_core::Field;

use crate::config::RunConfig;
use crate::report::{self, Record, Report};
use crate::hecke_expr::HeckeExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    SatakeIdentities,
    SatakeHomomorphism,
    PartialSatake,
    SymmetricFunctions,
    TransferLaw,
    LeviReduction,
    DegreeFormulas,
    FiberCounts,
    FlN1,
    VanishingSign,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::SatakeIdentities,
        Suite::SatakeHomomorphism,
        Suite::PartialSatake,
        Suite::SymmetricFunctions,
        Suite::TransferLaw,
        Suite::LeviReduction,
        Suite::DegreeFormulas,
        Suite::FiberCounts,
        Suite::FlN1,
        Suite::VanishingSign,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SatakeIdentities => "satake-identities",
            Suite::SatakeHomomorphism => "satake-homomorphism",
            Suite::PartialSatake => "partial-satake",
            Suite::SymmetricFunctions => "symmetric-functions",
            Suite::TransferLaw => "transfer-law",
            Suite::LeviReduction => "levi-reduction",
            Suite::DegreeFormulas => "degree-formulas",
            Suite::FiberCounts => "fiber-counts",
            Suite::FlN1 => "fl-n1",
            Suite::VanishingSign => "vanishing-sign",
            Suite::Determinism => "determinism",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    pub fn names() -> Vec<&'static str> {
        Suite::ALL.iter().map(|s| s.name()).collect()
    }

    /// Acceptance criterion number, 1 to 11.
    pub fn criterion(self) -> usize {
        Suite::ALL.iter().position(|&s| s == self).unwrap() + 1
    }
}

type Job = Box<dyn Fn() -> Record + Send + Sync>;

fn job(suite: Suite, id: String, f: impl Fn() -> Result<Record> + Send + Sync + 'static) -> Job {
    Box::new(move || f().unwrap_or_else(|e| Record::failed(suite.name(), id.clone(), &e)))
}

/// Field and algebras at the run's precision.
#[derive(Clone)]
struct Ctx {
    field: Field,
    win: Windows,
}

impl Ctx {
    fn new(cfg: &RunConfig, q: u8) -> Result<Self> {
        Ok(Ctx { field: Field::new(q, cfg.precision)?, win: Windows::new(cfg.window) })
    }

    fn quad(&self, kind: Kind) -> Result<Arc<Quad>> {
        Ok(Quad::standard(self.field, kind)?)
    }

    fn split(&self) -> Result<Arc<Quad>> {
        self.quad(Kind::Split)
    }

    fn fixed(&self, a: Kind, b: Kind) -> Result<Arc<Quad>> {
        Ok(FixedAlgebra::of_fields(&self.quad(a)?, &self.quad(b)?)?.alg)
    }
}

fn matched(beta: &EmbeddingPair) -> Result<EmbeddingPair> {
    let e3 = FixedAlgebra::of_pair(&beta.ea, &beta.eb)?.alg;
    Ok(match_alpha(&beta.invariant()?.delta, &e3)?)
}

/// `(label, E1, E2)` field pairs available at `q`.
fn beta_configs(q: u8) -> Vec<(&'static str, Kind, Kind)> {
    let mut out = vec![("i", Kind::Unramified, Kind::Unramified)];
    if q % 2 == 1 {
        out.push(("ii", Kind::Unramified, Kind::Ramified));
    }
    out
}

fn seeds(cfg: &RunConfig) -> std::ops::Range<u64> {
    cfg.seed..cfg.seed + cfg.samples as u64
}

fn qs(cfg: &RunConfig) -> Vec<u8> {
    cfg.q.map_or(vec![2, 3], |q| vec![q])
}

fn ns(cfg: &RunConfig, max: usize) -> Vec<usize> {
    cfg.n.map_or((1..=max).collect(), |n| vec![n])
}

fn jobs(suite: Suite, cfg: &RunConfig) -> Result<Vec<Job>> {
    let s = suite;
    let mut out: Vec<Job> = Vec::new();
    match suite {
        Suite::SatakeIdentities => {
            for q in qs(cfg) {
                for n in ns(cfg, 3) {
                    for k in 0..=n {
                        out.push(job(s, format!("q{q}-n{n}-S_{k}"), move || {
                            let lhs = HeckeFunction::s(n, q, k as i64).satake()?;
                            let rhs = satake_s_closed(q, n, k);
                            Ok(Record::new(s.name(), format!("q{q}-n{n}-S_{k}"), report::sym(&lhs), report::sym(&rhs), lhs == rhs))
                        }));
                    }
                    for m in 0..=3usize {
                        out.push(job(s, format!("q{q}-n{n}-T_{m}"), move || {
                            let lhs = HeckeFunction::t(n, q, m as i64).satake()?;
                            let rhs = satake_t_closed(q, n, m);
                            Ok(Record::new(s.name(), format!("q{q}-n{n}-T_{m}"), report::sym(&lhs), report::sym(&rhs), lhs == rhs))
                        }));
                    }
                }
            }
        }
        Suite::SatakeHomomorphism => {
            for q in qs(cfg) {
                for n in ns(cfg, 2) {
                    let mut gens: Vec<String> = (0..=n).map(|k| format!("S_{k}")).collect();
                    gens.extend((0..=2).map(|m| format!("T_{m}")));
                    for i in 0..gens.len() {
                        for j in i..gens.len() {
                            let (a, b) = (gens[i].clone(), gens[j].clone());
                            let id = format!("q{q}-n{n}-{a}*{b}");
                            out.push(job(s, id.clone(), move || {
                                let f = HeckeExpr::parse(&a).map_err(|e| anyhow!(e))?.build(n, q)?;
                                let g = HeckeExpr::parse(&b).map_err(|e| anyhow!(e))?.build(n, q)?;
                                let lhs = f.convolve(&g)?.satake()?;
                                let rhs = f.satake()?.mul(&g.satake()?).reduce_square(q);
                                Ok(Record::new(s.name(), id.clone(), report::sym(&lhs), report::sym(&rhs), lhs == rhs))
                            }));
                        }
                    }
                }
            }
        }
        Suite::PartialSatake => {
            let q = cfg.q_or(3);
            let mut cases: Vec<([usize; 2], Vec<i64>, i64)> = Vec::new();
            let splits = cfg.split.map_or(vec![[1, 1], [1, 2]], |sp| vec![sp]);
            for sp in &splits {
                for m in [vec![1], vec![2], vec![3], vec![1, 1], vec![2, 1], vec![1, 1, 1]] {
                    cases.push((*sp, m, 0));
                }
            }
            if cfg.split.is_none_or(|sp| sp == [2, 2]) {
                for m in [vec![1], vec![2], vec![1, 1]] {
                    for k in [0, 1] {
                        cases.push(([2, 2], m.clone(), k));
                    }
                }
            }
            for ([n0, n1], m, k) in cases {
                let id = format!("q{q}-{n0}+{n1}-m{m:?}-k{k}").replace(' ', "");
                out.push(job(s, id.clone(), move || {
                    let f = HeckeFunction::pi_power(n0 + n1, q, k).convolve(&HeckeFunction::f_of_m(n0 + n1, q, &m)?)?;
                    let lhs = f.satake_levi(&[n0, n1])?;
                    let rhs = partial_satake_closed(q, n0, n1, &m, k)?;
                    Ok(Record::new(s.name(), id.clone(), report::levi(&lhs), report::levi(&rhs), lhs == rhs))
                }));
            }
        }
        Suite::SymmetricFunctions => {
            for n in 1..=4usize {
                for k in 1..=4usize {
                    let id = format!("n{n}-k{k}-complete-elementary");
                    out.push(job(s, id.clone(), move || {
                        let mut acc = SymLaurent::zero(n);
                        for i in 0..=k {
                            let term = complete(n, i).mul(&elementary(n, k - i));
                            acc = if i % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                        }
                        let equal = acc.is_zero() && check_complete_elementary_identity(n, k);
                        Ok(Record::new(s.name(), id.clone(), report::sym(&acc), report::sym(&SymLaurent::zero(n)), equal))
                    }));
                }
            }
            for n in 1..=3usize {
                for k in 0..=5i64 {
                    let id = format!("n{n}-k{k}-census");
                    out.push(job(s, id.clone(), move || {
                        let (cosets, dim) = dimension_census(n, k);
                        let support = HeckeFunction::t(n, 2, k).coeffs().len();
                        Ok(Record::new(s.name(), id.clone(), json!(cosets), json!(dim), cosets == dim && support == cosets)
                            .note("t_support", support))
                    }));
                }
            }
        }
        Suite::TransferLaw => {
            let q = cfg.q_or(3);
            let ctx = Ctx::new(cfg, q)?;
            for (label, k1, k2) in beta_configs(q) {
                for seed in seeds(cfg) {
                    let ctx = ctx.clone();
                    let id = format!("law-{label}-seed{seed}");
                    out.push(job(s, id.clone(), move || {
                        let n = 1 + (seed % 2) as usize;
                        let (alpha, retries) = random_pair_spread(&ctx.split()?, &ctx.fixed(k1, k2)?, n, seed, 1)?;
                        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
                        let (lhs, rhs) = transfer_law_sample(&alpha, &mut rng)?;
                        Ok(Record::new(s.name(), id.clone(), report::in_q(&lhs), report::in_q(&rhs), lhs == rhs).retries([retries]).note("n", n))
                    }));
                }
                for seed in seeds(cfg) {
                    for fname in ["unit", "T_1"] {
                        let ctx = ctx.clone();
                        let id = format!("twist-{label}-seed{seed}-{fname}");
                        out.push(job(s, id.clone(), move || {
                            let (beta, retries) = random_pair_spread(&ctx.quad(k1)?, &ctx.quad(k2)?, 1, seed, 2)?;
                            let alpha = matched(&beta)?;
                            let f = HeckeExpr::parse(fname).map_err(|e| anyhow!(e))?.build(2, q)?;
                            let (b, wb) = orbital_beta(&beta, &f, &ctx.win)?;
                            let a = orbital_alpha(&alpha, &f, &ctx.win)?;
                            let mut windows = vec![wb, a.window];
                            let (mut tb, mut ta) = (Vec::new(), Vec::new());
                            for k in [-1, 1, 2] {
                                let g = HeckeFunction::pi_power(2, q, k).convolve(&f)?;
                                let (vb, w1) = orbital_beta(&beta, &g, &ctx.win)?;
                                let va = orbital_alpha(&alpha, &g, &ctx.win)?;
                                windows.extend([w1, va.window]);
                                tb.push(vb);
                                ta.push(va.value);
                            }
                            let equal = tb.iter().all(|x| *x == b) && ta.iter().all(|x| *x == a.value);
                            let lhs = json!({
                                "beta": tb.iter().map(report::rat).collect::<Vec<_>>(),
                                "alpha": ta.iter().map(report::in_q).collect::<Vec<_>>(),
                            });
                            let rhs = json!({ "beta": report::rat(&b), "alpha": report::in_q(&a.value) });
                            Ok(Record::new(s.name(), id.clone(), lhs, rhs, equal).windows(windows).retries([retries]).note("twists", [-1, 1, 2]))
                        }));
                    }
                }
            }
        }
        Suite::LeviReduction => {
            let q = cfg.q_or(3);
            let ctx = Ctx::new(cfg, q)?;
            for (label, k1, k2) in beta_configs(q) {
                for (set, spread) in [("baseline", None), ("spread", Some(1u32))] {
                    for m in [vec![0i64], vec![1], vec![2], vec![1, 1]] {
                        let ctx = ctx.clone();
                        let id = format!("{label}-{set}-m{m:?}").replace(' ', "");
                        let seed = cfg.seed;
                        out.push(job(s, id.clone(), move || {
                            let (e1, e2) = (ctx.quad(k1)?, ctx.quad(k2)?);
                            let draw = |sd: u64| match spread {
                                None => random_pair(&e1, &e2, 1, sd),
                                Some(sp) => random_pair_spread(&e1, &e2, 1, sd, sp),
                            };
                            let (b0, r0) = draw(2 * seed)?;
                            let (b1, r1) = draw(2 * seed + 1)?;
                            let rep = verify_levi_reduction(&b0, &b1, &m, &ctx.win)?;
                            let opt_rat = |x: &Option<BigRational>| x.as_ref().map_or(Value::Null, report::rat);
                            let opt_q = |x: &Option<wb_core::sym::Laurent>| x.as_ref().map_or(Value::Null, report::in_q);
                            let lhs = json!({ "beta": report::rat(&rep.beta.lhs), "alpha": report::in_q(&rep.alpha.lhs) });
                            let rhs = json!({ "beta": opt_rat(&rep.beta.rhs), "alpha": opt_q(&rep.alpha.rhs) });
                            let at_zero = value_at_zero(&rep.alpha.lhs) == rep.beta.lhs;
                            Ok(Record::new(s.name(), id.clone(), lhs, rhs, rep.beta.equal && rep.alpha.equal && at_zero)
                                .retries([r0, r1])
                                .note("beta_sum", report::rat(&rep.beta.sum))
                                .note("alpha_sum", report::in_q(&rep.alpha.sum))
                                .note("beta_constant_twice", rep.beta.constant_twice)
                                .note("alpha_constant_twice", rep.alpha.constant_twice))
                        }));
                    }
                }
            }
        }
        Suite::DegreeFormulas | Suite::FiberCounts => {
            let q = cfg.q_or(3);
            let ctx = Ctx::new(cfg, q)?;
            let mut configs = Vec::new();
            for (label, k1, k2) in beta_configs(q) {
                configs.push((format!("beta-{label}"), Some((k1, k2)), None));
                configs.push((format!("alpha-{label}"), None, Some((k1, k2))));
            }
            for (label, beta, alpha) in configs {
                for seed in seeds(cfg) {
                    let ctx = ctx.clone();
                    let id = format!("{label}-seed{seed}");
                    out.push(job(s, id.clone(), move || {
                        let (ea, eb) = match (beta, alpha) {
                            (Some((k1, k2)), _) => (ctx.quad(k1)?, ctx.quad(k2)?),
                            (_, Some((k1, k2))) => (ctx.split()?, ctx.fixed(k1, k2)?),
                            _ => unreachable!(),
                        };
                        let sc = random_scenario(&ea, &eb, seed, 2, 2)?;
                        if suite == Suite::DegreeFormulas {
                            degree_record(s, &id, &sc)
                        } else {
                            fiber_record(s, &id, &sc)
                        }
                    }));
                }
            }
        }
        Suite::FlN1 => {
            let q = cfg.q_or(3);
            let ctx = Ctx::new(cfg, q)?;
            let (k1, k2) = cfg.kinds()?;
            let mut fs: Vec<String> = ["unit", "T_1", "T_2", "T_1*T_1"].map(String::from).to_vec();
            if !fs.contains(&cfg.hecke) {
                fs.push(cfg.hecke.clone());
            }
            for seed in seeds(cfg) {
                for fname in &fs {
                    let ctx = ctx.clone();
                    let fname = fname.clone();
                    let id = format!("seed{seed}-{fname}");
                    out.push(job(s, id.clone(), move || {
                        let (beta, retries) = random_pair_spread(&ctx.quad(k1)?, &ctx.quad(k2)?, 1, seed, 2)?;
                        let alpha = matched(&beta)?;
                        let f = HeckeExpr::parse(&fname).map_err(|e| anyhow!(e))?.build(2, q)?;
                        let (b, wb) = orbital_beta(&beta, &f, &ctx.win)?;
                        let a = orbital_alpha(&alpha, &f, &ctx.win)?;
                        let at_zero = value_at_zero(&a.value);
                        Ok(Record::new(s.name(), id.clone(), report::rat(&b), report::rat(&at_zero), b == at_zero)
                            .windows([wb, a.window])
                            .retries([retries])
                            .note("alpha", report::in_q(&a.value))
                            .note("derivative", report::rat(&derivative_at_zero(&a.value))))
                    }));
                }
            }
        }
        Suite::VanishingSign => vanishing_jobs(cfg, &mut out)?,
        Suite::Determinism => {
            for other in Suite::ALL.into_iter().filter(|&x| x != Suite::Determinism) {
                let cfg = cfg.clone();
                out.push(job(s, other.name().to_string(), move || {
                    let first = run(other, &cfg)?;
                    let second = run(other, &rerun_config(&cfg))?;
                    Ok(compare_runs(other, &first, &second))
                }));
            }
        }
    }
    Ok(out)
}

fn degree_record(s: Suite, id: &str, sc: &SplitScenario) -> Result<Record> {
    let cf = sc.closed_forms()?;
    let d = build_hom_system(sc)?.degrees()?;
    let lhs = json!({
        "inclusion": d.inclusion,
        "projection_pair_twice": 2 * d.second_triple[0],
        "composite": d.composite,
        "left_compositions": d.left_compositions,
        "fiber_twice": 2 * d.phi,
        "inclusion_plus_composite": d.inclusion + d.composite,
    });
    let rhs = json!({
        "inclusion": cf.inclusion(),
        "projection_pair_twice": cf.projection_pair_twice(),
        "composite": cf.composite(),
        "left_compositions": cf.left_compositions(),
        "fiber_twice": cf.fiber_twice(),
        "inclusion_plus_composite": cf.projection_pair_twice(),
    });
    let constant = |t: &[i64; 3]| t.iter().all(|&x| x == t[0]);
    let equal = lhs == rhs && constant(&d.first_triple) && constant(&d.second_triple);
    Ok(Record::new(s.name(), id, lhs, rhs, equal)
        .retries([sc.retries])
        .note("m0", &sc.m0)
        .note("m1", &sc.m1)
        .note("disc", cf.disc)
        .note("res", cf.res)
        .note("first_triple", d.first_triple)
        .note("second_triple", d.second_triple))
}

fn fiber_record(s: Suite, id: &str, sc: &SplitScenario) -> Result<Record> {
    let cf = sc.closed_forms()?;
    let twice = cf.fiber_twice();
    let phi = build_hom_system(sc)?.phi().degree()?;
    let (count, level) = fiber_count_direct(sc, twice.max(0) / 2)?;
    let doubled = fiber_count_at(sc, 2 * level)?;
    let lhs = json!({ "direct_twice": 2 * count, "doubled_twice": 2 * doubled, "phi_twice": 2 * phi });
    let rhs = json!({ "direct_twice": twice, "doubled_twice": twice, "phi_twice": twice });
    Ok(Record::new(s.name(), id, lhs.clone(), rhs.clone(), lhs == rhs)
        .windows([level, 2 * level])
        .retries([sc.retries])
        .note("m0", &sc.m0)
        .note("m1", &sc.m1))
}

/// First nonzero integral among `1, T_1, T_2` and whether its functional
/// equation has sign `-1`.
fn probe_sign(alpha: &EmbeddingPair, q: u8, win: &Windows) -> Result<Option<i8>> {
    for f in [HeckeFunction::unit(2, q), HeckeFunction::t(2, q, 1), HeckeFunction::t(2, q, 2)] {
        let v = orbital_alpha(alpha, &f, win)?.value;
        if !v.is_zero() {
            return Ok(functional_equation_probe(&v).map(|fe| fe.sign));
        }
    }
    Ok(None)
}

fn vanishing_jobs(cfg: &RunConfig, out: &mut Vec<Job>) -> Result<()> {
    let s = Suite::VanishingSign;
    let q = cfg.q_or(3);
    let ctx = Ctx::new(cfg, q)?;
    let (k1, k2) = cfg.kinds()?;
    let (split, e3) = (ctx.split()?, ctx.fixed(k1, k2)?);
    // classify seeds up front so that the sum cases can pick their factors
    let draws: Vec<(u64, EmbeddingPair, u32)> = seeds(cfg)
        .map(|seed| random_pair_spread(&split, &e3, 1, seed, 2).map(|(p, r)| (seed, p, r)))
        .collect::<Result<_, _>>()?;
    let signs: Vec<Option<i8>> = draws.par_iter().map(|(_, p, _)| probe_sign(p, q, &ctx.win)).collect::<Result<_>>()?;
    let odd: Vec<usize> = (0..draws.len()).filter(|&i| signs[i] == Some(-1)).collect();
    let even: Vec<usize> = (0..draws.len()).filter(|&i| signs[i] == Some(1)).collect();
    let (found, even_found) = (odd.len(), even.len());
    out.push(Box::new(move || {
        Record::new(s.name(), "order-one-found", json!(found), json!(">=1"), found >= 1).note("even", even_found)
    }));
    for &i in &odd {
        let (seed, alpha, retries) = draws[i].clone();
        for fname in ["unit", "T_1", "T_2", "T_1*T_1"] {
            let (ctx, alpha) = (ctx.clone(), alpha.clone());
            let id = format!("seed{seed}-{fname}");
            out.push(job(s, id.clone(), move || {
                let f = HeckeExpr::parse(fname).map_err(|e| anyhow!(e))?.build(2, q)?;
                let a = orbital_alpha(&alpha, &f, &ctx.win)?;
                let sign = functional_equation_probe(&a.value).map(|fe| fe.sign);
                let at_zero = value_at_zero(&a.value);
                let equal = at_zero.is_zero() && (a.value.is_zero() || sign == Some(-1));
                Ok(Record::new(s.name(), id.clone(), json!({ "value": report::rat(&at_zero), "sign": sign }), json!({ "value": "0", "sign": -1 }), equal)
                    .windows([a.window])
                    .retries([retries])
                    .note("alpha", report::in_q(&a.value))
                    .note("derivative", report::rat(&derivative_at_zero(&a.value))))
            }));
        }
    }
    // rank-four sums: two odd factors, then an odd and an even one
    let mut sums: Vec<(usize, usize)> = odd.windows(2).take(2).map(|w| (w[0], w[1])).collect();
    sums.extend(odd.iter().zip(&even).take(2).map(|(&a, &b)| (a, b)));
    for (i, j) in sums {
        let (p0, p1) = (draws[i].1.clone(), draws[j].1.clone());
        let (s0, s1) = (draws[i].0, draws[j].0);
        let ctx = ctx.clone();
        let id = format!("sum-seed{s0}+seed{s1}");
        out.push(job(s, id.clone(), move || {
            let alpha = direct_sum(&p0, &p1)?;
            let rs = alpha.invariant()?.rs;
            let rep = order_lower_bound_check(&alpha, &HeckeFunction::unit(4, q), &[p0.clone(), p1.clone()], &ctx.win)?;
            Ok(Record::new(s.name(), id.clone(), json!({ "order": rep.order }), json!({ "at_least": rep.estimate }), rep.holds).note("regular", rs))
        }));
    }
    Ok(())
}

pub fn rerun_config(cfg: &RunConfig) -> RunConfig {
    RunConfig { precision: cfg.precision + 8, threads: cfg.threads + 1, ..cfg.clone() }
}

/// One suite at the configured precision, without the stability rerun.
pub fn compute(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build().context("building thread pool")?;
    let jobs = jobs(suite, cfg)?;
    let records = pool.install(|| jobs.par_iter().map(|j| j()).collect());
    Ok(Report { records })
}

/// One suite, with every record checked against a rerun at precision + 8.
pub fn run(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    let mut first = compute(suite, cfg)?;
    if suite != Suite::Determinism {
        let rerun = RunConfig { precision: cfg.precision + 8, ..cfg.clone() };
        first.mark_stability(&compute(suite, &rerun)?);
    }
    Ok(first)
}

/// Suites 1 to 10, then the determinism suite built from their reports and a
/// rerun of each at precision + 8 on a different number of threads.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<(Suite, Report)>> {
    let mut out = Vec::new();
    let mut cross = Vec::new();
    for suite in Suite::ALL.into_iter().filter(|&s| s != Suite::Determinism) {
        let first = run(suite, cfg)?;
        let second = run(suite, &rerun_config(cfg))?;
        cross.push(compare_runs(suite, &first, &second));
        out.push((suite, first));
    }
    out.push((Suite::Determinism, Report { records: cross }));
    Ok(out)
}

fn digest(text: &str) -> String {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Byte comparison of two serialized reports of the same suite.
pub fn compare_runs(suite: Suite, first: &Report, second: &Report) -> Record {
    let (a, b) = (first.to_jsonl(), second.to_jsonl());
    let summary = |t: &str| json!({ "bytes": t.len(), "lines": t.lines().count(), "digest": digest(t) });
    Record::new(Suite::Determinism.name(), suite.name(), summary(&a), summary(&b), a == b)
}
