//! Lower bounds on the probability that a random Erdős–Rényi network is
//! sparse-controllable, as a function of edge probability `p` and the
//! admissible support family.
//!
//! Both bounds are sums over `i = 0..=s` of `Q(i, U)·(1 − p)^{e(i)}·β(i)`:
//!
//! | model      | `e(i)`             | `β(i)`                              |
//! |------------|--------------------|-------------------------------------|
//! | undirected | `i(2N − i − 1)/2`  | `1 − C·exp(−c·(p(N − i))^{1/32})`   |
//! | directed   | `i(N − 1)`         | `1 − exp(−c·p(N − i))`              |
//!
//! `C` and `c` are unknown universal constants. The defaults `C = c = 1` are a
//! heuristic choice, so the values are indicative only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::sparsity::{count_subsets_q, SupportFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub big_c: f64,
    pub small_c: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            big_c: 1.0,
            small_c: 1.0,
        }
    }
}

impl BoundParams {
    pub fn new(big_c: f64, small_c: f64) -> Result<Self> {
        let p = BoundParams { big_c, small_c };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.big_c > 0.0 && self.big_c.is_finite() && self.small_c > 0.0 && self.small_c.is_finite()) {
            return Err(CoreError::param(format!(
                "bound constants must be positive and finite, got C = {}, c = {}",
                self.big_c, self.small_c
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundModel {
    Undirected,
    Directed,
}

impl BoundModel {
    /// Exponent of `(1 − p)` in term `i` for an `n`-node graph.
    pub fn exponent(self, n: usize, i: usize) -> f64 {
        let (n, i) = (n as f64, i as f64);
        match self {
            BoundModel::Undirected => i * (2.0 * n - i - 1.0) / 2.0,
            BoundModel::Directed => i * (n - 1.0),
        }
    }
}

impl fmt::Display for BoundModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundModel::Undirected => "undirected",
            BoundModel::Directed => "directed",
        })
    }
}

impl FromStr for BoundModel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "undirected" | "er-undirected" => Ok(BoundModel::Undirected),
            "directed" | "er-directed" => Ok(BoundModel::Directed),
            _ => Err(CoreError::param(format!("unknown bound model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// `raw_q` clamped to `[0, 1]`.
    pub q: f64,
    pub raw_q: f64,
    /// Whether `p` lies in the range where the bound is claimed.
    pub valid: bool,
    /// Contribution of each `i = 0..=s`.
    pub terms: Vec<f64>,
}

fn check_inputs(family: &SupportFamily, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CoreError::param(format!("p must lie in [0, 1], got {p}")));
    }
    let (n, s) = (family.n(), family.s());
    if s < 1 || s >= n {
        return Err(CoreError::param(format!("need 1 <= s < N, got s = {s}, N = {n}")));
    }
    if !family.coverage() {
        return Err(CoreError::ModelAssumption(
            "the admissible supports do not cover every node".into(),
        ));
    }
    Ok(())
}

fn q_values(family: &SupportFamily) -> Result<Vec<f64>> {
    (0..=family.s())
        .map(|i| count_subsets_q(i, family).map(|q| q as f64))
        .collect()
}

fn assemble(terms: Vec<f64>, valid: bool) -> BoundResult {
    let raw_q: f64 = terms.iter().sum();
    BoundResult {
        q: raw_q.clamp(0.0, 1.0),
        raw_q,
        valid,
        terms,
    }
}

/// Bound for undirected ER graphs.
pub fn undirected_bound(family: &SupportFamily, p: f64, params: &BoundParams) -> Result<BoundResult> {
    params.validate()?;
    check_inputs(family, p)?;
    let n = family.n();
    let gap = 1.0 / (n - family.s()) as f64;
    let valid = p >= gap && p <= 1.0 - gap;
    let terms = q_values(family)?
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            let decay = (1.0 - p).powf(BoundModel::Undirected.exponent(n, i));
            let bracket = 1.0 - params.big_c * (-params.small_c * (p * (n - i) as f64).powf(1.0 / 32.0)).exp();
            q * decay * bracket
        })
        .collect();
    Ok(assemble(terms, valid))
}

/// Bound for directed ER graphs.
pub fn directed_bound(family: &SupportFamily, p: f64, params: &BoundParams) -> Result<BoundResult> {
    params.validate()?;
    check_inputs(family, p)?;
    let n = family.n();
    let m = (n - family.s()) as f64;
    let gap = params.big_c * m.ln() / m;
    let valid = p > gap && p <= 1.0 - gap;
    let terms = q_values(family)?
        .into_iter()
        .enumerate()
        .map(|(i, q)| {
            let decay = (1.0 - p).powf(BoundModel::Directed.exponent(n, i));
            let bracket = 1.0 - (-params.small_c * p * (n - i) as f64).exp();
            q * decay * bracket
        })
        .collect();
    Ok(assemble(terms, valid))
}

pub fn bound(model: BoundModel, family: &SupportFamily, p: f64, params: &BoundParams) -> Result<BoundResult> {
    match model {
        BoundModel::Undirected => undirected_bound(family, p, params),
        BoundModel::Directed => directed_bound(family, p, params),
    }
}

/// Constant-free variant: every bracket replaced by 1, result capped at 1.
pub fn structural_bound(family: &SupportFamily, p: f64, model: BoundModel) -> Result<f64> {
    check_inputs(family, p)?;
    let n = family.n();
    let sum: f64 = q_values(family)?
        .into_iter()
        .enumerate()
        .map(|(i, q)| q * (1.0 - p).powf(model.exponent(n, i)))
        .sum();
    Ok(sum.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: usize, s: usize) -> SupportFamily {
        SupportFamily::unconstrained(n, s).unwrap()
    }

    #[test]
    fn undirected_pinned_value() {
        let r = undirected_bound(&u(12, 1), 0.5, &BoundParams::default()).unwrap();
        let t0 = 1.0 - (-(6.0f64).powf(1.0 / 32.0)).exp();
        let t1 = 12.0 * 0.5f64.powi(11) * (1.0 - (-(5.5f64).powf(1.0 / 32.0)).exp());
        assert!((r.raw_q - (t0 + t1)).abs() < 1e-15);
        assert!((r.raw_q - 0.656_526_741_401_415_3).abs() < 1e-14, "{}", r.raw_q);
        assert!(r.valid);
        assert_eq!(r.terms.len(), 2);
    }

    #[test]
    fn directed_pinned_value() {
        let r = directed_bound(&u(12, 1), 0.5, &BoundParams::default()).unwrap();
        let expect = (1.0 - (-6.0f64).exp()) + 12.0 * 0.5f64.powi(11) * (1.0 - (-5.5f64).exp());
        assert!((r.raw_q - expect).abs() < 1e-15);
        assert!(r.valid);
    }

    #[test]
    fn directed_at_p_one_keeps_only_first_term() {
        let r = directed_bound(&u(12, 3), 1.0, &BoundParams::default()).unwrap();
        assert!(r.terms[1..].iter().all(|&t| t == 0.0));
        assert!((r.raw_q - (1.0 - (-12.0f64).exp())).abs() < 1e-15);
        assert!(!r.valid);
    }

    #[test]
    fn validity_flags() {
        let params = BoundParams::default();
        // N - s = 10: undirected range [0.1, 0.9]
        assert!(!undirected_bound(&u(12, 2), 0.05, &params).unwrap().valid);
        assert!(undirected_bound(&u(12, 2), 0.1, &params).unwrap().valid);
        assert!(undirected_bound(&u(12, 2), 0.9, &params).unwrap().valid);
        assert!(!undirected_bound(&u(12, 2), 0.95, &params).unwrap().valid);
        // directed range (ln 10 / 10, 1 - ln 10 / 10]
        assert!(!directed_bound(&u(12, 2), 0.2, &params).unwrap().valid);
        assert!(directed_bound(&u(12, 2), 0.5, &params).unwrap().valid);
    }

    #[test]
    fn tiny_constant_sends_brackets_to_one() {
        let params = BoundParams::new(1e-300, 1.0).unwrap();
        let f = u(12, 2);
        let r = undirected_bound(&f, 0.3, &params).unwrap();
        let expect: f64 = (0..=2)
            .map(|i| count_subsets_q(i, &f).unwrap() as f64 * 0.7f64.powf(i as f64 * (23.0 - i as f64) / 2.0))
            .sum();
        assert!((r.raw_q - expect).abs() < 1e-12);
    }

    #[test]
    fn structural_limits() {
        let f = u(12, 3);
        assert_eq!(structural_bound(&f, 0.0, BoundModel::Undirected).unwrap(), 1.0);
        assert_eq!(structural_bound(&f, 1.0, BoundModel::Directed).unwrap(), 1.0);
        assert!((structural_bound(&f, 1.0 - 1e-9, BoundModel::Undirected).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn structural_family_ordering() {
        let uf = u(12, 3);
        let pf = SupportFamily::piecewise(12, 3, 3).unwrap();
        let bf = SupportFamily::block(12, 3, 3).unwrap();
        for model in [BoundModel::Undirected, BoundModel::Directed] {
            let (qu, qp, qb) = (
                structural_bound(&uf, 0.4, model).unwrap(),
                structural_bound(&pf, 0.4, model).unwrap(),
                structural_bound(&bf, 0.4, model).unwrap(),
            );
            assert!(qb <= qp && qp <= qu);
        }
    }

    #[test]
    fn directed_block_not_above_unconstrained() {
        let params = BoundParams::default();
        let b = directed_bound(&SupportFamily::block(12, 2, 2).unwrap(), 0.5, &params).unwrap();
        let a = directed_bound(&u(12, 2), 0.5, &params).unwrap();
        assert!(b.q <= a.q);
    }

    #[test]
    fn first_term_closed_form() {
        let params = BoundParams::new(2.0, 0.5).unwrap();
        let r = undirected_bound(&u(20, 4), 0.3, &params).unwrap();
        assert_eq!(r.terms[0], 1.0 - 2.0 * (-0.5 * (0.3f64 * 20.0).powf(1.0 / 32.0)).exp());
    }

    #[test]
    fn input_errors() {
        let params = BoundParams::default();
        assert!(undirected_bound(&u(5, 5), 0.5, &params).is_err());
        assert!(undirected_bound(&u(5, 2), 1.5, &params).is_err());
        assert!(BoundParams::new(0.0, 1.0).is_err());
        let sparse = SupportFamily::explicit(
            4,
            1,
            vec![crate::sparsity::Support::new(vec![0], 4).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            undirected_bound(&sparse, 0.5, &params),
            Err(CoreError::ModelAssumption(_))
        ));
    }
}
