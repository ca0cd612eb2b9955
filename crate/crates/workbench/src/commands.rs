//! Single-computation commands: invariants, orbital integrals, Satake transforms.

use anyhow::{anyhow, Result};
use serde_json::{json, Value};

use wb_core::etale::FixedAlgebra;
use wb_core::hecke::{partial_satake_closed, satake_s_closed, satake_t_closed, HeckeFunction};
use wb_core::orbital::*;
use wb_core::pairs::{match_alpha, random_pair_spread, EmbeddingPair};
use wb_core::poly::Poly;
use wb_core::quad::{QElem, Quad};
use wb_core::sym::{Laurent, SymLaurent};
use wb_core::Field;

use crate::config::RunConfig;
use crate::report::{self, Record, Report};
use crate::hecke_expr::{Factor, HeckeExpr};

/// Conjugation spread used when drawing pairs, as in the suites.
pub const SPREAD: u32 = 2;

fn poly_json(p: &Poly<QElem>) -> Value {
    Value::Array(p.coeffs().iter().map(|c| json!([c.a.to_string(), c.b.to_string()])).collect())
}

fn descriptor(cfg: &RunConfig, q: u8, n: usize) -> String {
    format!("q{q}-n{n}-{}-{}-seed{}", cfg.e1, cfg.e2, cfg.seed)
}

/// The seeded pair `β` and its matched `α`.
fn pairs(cfg: &RunConfig, q: u8, n: usize) -> Result<(EmbeddingPair, EmbeddingPair, u32)> {
    let field = Field::new(q, cfg.precision)?;
    let (k1, k2) = cfg.kinds()?;
    let (e1, e2) = (Quad::standard(field, k1)?, Quad::standard(field, k2)?);
    let (beta, retries) = random_pair_spread(&e1, &e2, n, cfg.seed, SPREAD)?;
    let e3 = FixedAlgebra::of_fields(&e1, &e2)?.alg;
    let alpha = match_alpha(&beta.invariant()?.delta, &e3)?;
    Ok((beta, alpha, retries))
}

pub fn invariant(cfg: &RunConfig) -> Result<Report> {
    let (q, n) = (cfg.q_or(3), cfg.n_or(1));
    let (beta, alpha, retries) = pairs(cfg, q, n)?;
    let (ib, ia) = (beta.invariant()?, alpha.invariant()?);
    let rec = Record::new("invariant", descriptor(cfg, q, n), poly_json(&ib.delta), poly_json(&ia.delta), ib.delta == ia.delta)
        .retries([retries])
        .note("regular_semisimple", ib.rs)
        .note("centralizer_rank", ib.centralizer.as_ref().map(|c| c.basis.len()));
    Ok(Report { records: vec![rec] })
}

pub fn orbital(cfg: &RunConfig) -> Result<Report> {
    let (q, n) = (cfg.q_or(3), cfg.n_or(1));
    let expr = cfg.hecke_expr()?;
    let f = expr.build(2 * n, q)?;
    let (beta, alpha, retries) = pairs(cfg, q, n)?;
    let win = Windows::new(cfg.window);
    let (b, wb) = orbital_beta(&beta, &f, &win)?;
    let a = orbital_alpha(&alpha, &f, &win)?;
    let at_zero = value_at_zero(&a.value);
    let fe = functional_equation_probe(&a.value);
    let id = format!("{}-{expr}", descriptor(cfg, q, n));
    let rec = Record::new("orbital", id, report::rat(&b), report::rat(&at_zero), b == at_zero)
        .windows([wb, a.window])
        .retries([retries])
        .note("alpha", report::in_q(&a.value))
        .note("derivative", report::rat(&derivative_at_zero(&a.value)))
        .note("sign", fe.as_ref().map(|x| x.sign))
        .note("center", fe.as_ref().map(|x| x.r.to_string()))
        .note("vanishing_order", vanishing_order(&a.value));
    Ok(Report { records: vec![rec] })
}

/// Product of the closed forms of the factors; `None` when a factor has none.
fn closed_form(expr: &HeckeExpr, n: usize, q: u8) -> Option<SymLaurent> {
    let mut acc = SymLaurent::constant(n, Laurent::one());
    for f in &expr.factors {
        let g = match f {
            Factor::Unit => continue,
            Factor::S(k) if *k >= 0 => satake_s_closed(q, n, *k as usize),
            Factor::T(m) if *m >= 0 => satake_t_closed(q, n, *m as usize),
            Factor::F(m) => {
                let mut g = SymLaurent::constant(n, Laurent::one());
                for &mi in m {
                    g = g.mul(&satake_t_closed(q, n, mi as usize)).reduce_square(q);
                }
                g
            }
            Factor::Pi(k) => {
                let mut g = SymLaurent::zero(n);
                g.add_term(vec![*k; n], Laurent::one());
                g
            }
            _ => return None,
        };
        acc = acc.mul(&g).reduce_square(q);
    }
    Some(acc)
}

pub fn satake(cfg: &RunConfig) -> Result<Report> {
    let q = cfg.q_or(3);
    let n = cfg.split.map_or(cfg.n_or(2), |[a, b]| a + b);
    let expr = cfg.hecke_expr()?;
    let f: HeckeFunction = expr.build(n, q)?;
    let lhs = f.satake()?;
    let mut rec = match closed_form(&expr, n, q) {
        Some(rhs) => Record::new("satake", format!("q{q}-n{n}-{expr}"), report::sym(&lhs), report::sym(&rhs), lhs == rhs),
        None => Record::new("satake", format!("q{q}-n{n}-{expr}"), report::sym(&lhs), Value::Null, lhs.is_symmetric())
            .note("closed_form", "none for negative indices"),
    };
    rec = rec.note("symmetric", lhs.is_symmetric());
    let mut records = vec![rec];
    if let Some([n0, n1]) = cfg.split {
        let lhs = f.satake_levi(&[n0, n1])?;
        let (k, m) = expr.twisted_chain().ok_or_else(|| anyhow!("partial Satake closed form needs a test function of the form [pi]^k*f(m)"))?;
        let rhs = partial_satake_closed(q, n0, n1, &m, k)?;
        records.push(Record::new("satake", format!("q{q}-{n0}+{n1}-{expr}"), report::levi(&lhs), report::levi(&rhs), lhs == rhs));
    }
    Ok(Report { records })
}
