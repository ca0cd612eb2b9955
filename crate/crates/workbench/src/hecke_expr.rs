//! Textual test functions: products of `unit`, `S_k`, `T_m`, `f(m1,...)` and
//! `[pi]^k`, joined by `*`.

use std::fmt;

use wb_core::hecke::HeckeFunction;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Unit,
    S(i64),
    T(i64),
    F(Vec<i64>),
    Pi(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeckeExpr {
    pub factors: Vec<Factor>,
}

fn int(s: &str, what: &str) -> Result<i64, String> {
    s.trim().parse().map_err(|_| format!("bad {what} {s:?} in test function"))
}

impl HeckeExpr {
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut factors = Vec::new();
        for raw in s.split('*') {
            let t = raw.trim();
            let factor = if t == "unit" || t == "1" {
                Factor::Unit
            } else if let Some(k) = t.strip_prefix("S_") {
                Factor::S(int(k, "index")?)
            } else if let Some(m) = t.strip_prefix("T_") {
                Factor::T(int(m, "index")?)
            } else if let Some(k) = t.strip_prefix("[pi]^") {
                Factor::Pi(int(k, "exponent")?)
            } else if let Some(body) = t.strip_prefix("f(").and_then(|r| r.strip_suffix(')')) {
                let m = body.split(',').map(|x| int(x, "part")).collect::<Result<Vec<_>, _>>()?;
                if m.iter().any(|&x| x < 0) {
                    return Err(format!("negative part in {t:?}"));
                }
                Factor::F(m)
            } else {
                return Err(format!("unknown test function factor {t:?}; use unit, S_k, T_m, f(m1,...) or [pi]^k"));
            };
            factors.push(factor);
        }
        Ok(HeckeExpr { factors })
    }

    /// Largest `|k|` among the `S_k` factors; they need `|k| <= rank`.
    pub fn min_rank(&self) -> usize {
        self.factors.iter().map(|f| if let Factor::S(k) = f { k.unsigned_abs() as usize } else { 0 }).max().unwrap_or(0)
    }

    pub fn build(&self, rank: usize, q: u8) -> anyhow::Result<HeckeFunction> {
        anyhow::ensure!(self.min_rank() <= rank, "S_k needs |k| <= rank {rank}");
        let mut acc = HeckeFunction::unit(rank, q);
        for f in &self.factors {
            let g = match f {
                Factor::Unit => continue,
                Factor::S(k) => HeckeFunction::s(rank, q, *k),
                Factor::T(m) => HeckeFunction::t(rank, q, *m),
                Factor::F(m) => HeckeFunction::f_of_m(rank, q, m)?,
                Factor::Pi(k) => HeckeFunction::pi_power(rank, q, *k),
            };
            acc = acc.convolve(&g)?;
        }
        Ok(acc)
    }

    /// `(k, m)` when the function is `[pi]^k * f(m)` up to reordering, with
    /// `T_m` read as `f(m)`.
    pub fn twisted_chain(&self) -> Option<(i64, Vec<i64>)> {
        let mut k = 0;
        let mut m = Vec::new();
        for f in &self.factors {
            match f {
                Factor::Unit => {}
                Factor::Pi(j) => k += j,
                Factor::T(j) if *j >= 0 => m.push(*j),
                Factor::F(parts) => m.extend(parts),
                _ => return None,
            }
        }
        Some((k, m))
    }
}

impl fmt::Display for HeckeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|x| match x {
                Factor::Unit => "unit".to_string(),
                Factor::S(k) => format!("S_{k}"),
                Factor::T(m) => format!("T_{m}"),
                Factor::F(m) => format!("f({})", m.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
                Factor::Pi(k) => format!("[pi]^{k}"),
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["unit", "S_2", "T_1*T_1", "f(2,1)", "[pi]^-1*f(1,1)"] {
            assert_eq!(HeckeExpr::parse(s).unwrap().to_string(), s);
        }
        assert!(HeckeExpr::parse("X_1").is_err());
        assert!(HeckeExpr::parse("f(1,-1)").is_err());
        assert_eq!(HeckeExpr::parse("[pi]^2*T_1*f(1,1)").unwrap().twisted_chain(), Some((2, vec![1, 1, 1])));
        assert_eq!(HeckeExpr::parse("S_1").unwrap().twisted_chain(), None);
    }

    #[test]
    fn products_convolve() {
        let f = HeckeExpr::parse("T_1*T_1").unwrap().build(2, 3).unwrap();
        assert_eq!(f, HeckeFunction::f_of_m(2, 3, &[1, 1]).unwrap());
        assert!(HeckeExpr::parse("S_3").unwrap().build(2, 3).is_err());
    }
}
