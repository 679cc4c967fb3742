//! Test-side reference implementations, written from the definitions and
//! sharing no code with the library beyond its public types.

#![allow(dead_code)]

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

/// Structured family kinds as plain data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Unconstrained,
    Piecewise(usize),
    Block(usize),
}

/// Membership predicate of a structured family on bitmask subsets.
pub fn is_member(kind: Kind, n: usize, s: usize, mask: u32) -> bool {
    if mask.count_ones() as usize != s {
        return false;
    }
    match kind {
        Kind::Unconstrained => true,
        Kind::Piecewise(m) => {
            let w = n / m;
            (0..m).all(|r| {
                let window = ((1u32 << w) - 1) << (r * w);
                (mask & window).count_ones() as usize == s / m
            })
        }
        Kind::Block(m) => (0..n / m).all(|b| {
            let block = ((1u32 << m) - 1) << (b * m);
            let hit = mask & block;
            hit == 0 || hit == block
        }),
    }
}

/// All members as bitmasks, by scanning every subset of `0..n`.
pub fn members(kind: Kind, n: usize, s: usize) -> Vec<u32> {
    assert!(n <= 20);
    (0u32..(1 << n)).filter(|&m| is_member(kind, n, s, m)).collect()
}

/// `q[t]` = number of distinct `t`-subsets of members, for `t = 0..=s`.
pub fn q_table(kind: Kind, n: usize, s: usize) -> Vec<u128> {
    let mut seen: Vec<HashSet<u32>> = vec![HashSet::new(); s + 1];
    for mask in members(kind, n, s) {
        // every submask of `mask`
        let mut sub = mask;
        loop {
            seen[sub.count_ones() as usize].insert(sub);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
    }
    seen.iter().map(|h| h.len() as u128).collect()
}

/// Bound evaluated term by term from a Q table.
pub fn bound_oracle(directed: bool, n: usize, p: f64, q: &[u128], big_c: f64, small_c: f64) -> f64 {
    let mut total = 0.0;
    for (i, &qi) in q.iter().enumerate() {
        let (decay, bracket) = if directed {
            let e = (i * (n - 1)) as i32;
            (
                (1.0 - p).powi(e),
                1.0 - (-(small_c * p * (n - i) as f64)).exp(),
            )
        } else {
            let e = (i * (2 * n - i - 1) / 2) as i32;
            (
                (1.0 - p).powi(e),
                1.0 - big_c * (-(small_c * (p * (n - i) as f64).powf(1.0 / 32.0))).exp(),
            )
        };
        total += qi as f64 * decay * bracket;
    }
    total
}

/// Forward recursion `x_k = Φ x_{k-1} + u_k`, returning `x_K`.
pub fn terminal_state(phi: &DMatrix<f64>, x0: &DVector<f64>, inputs: &[DVector<f64>]) -> DVector<f64> {
    let mut x = x0.clone();
    for u in inputs {
        let mut next = DVector::zeros(x.len());
        for i in 0..x.len() {
            let mut acc = u[i];
            for j in 0..x.len() {
                acc += phi[(i, j)] * x[j];
            }
            next[i] = acc;
        }
        x = next;
    }
    x
}

/// Rank by Gaussian elimination with partial pivoting and a relative tolerance.
pub fn gauss_rank(m: &DMatrix<f64>) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    let tol = 1e-9 * scale;
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (piv, val) = (rank..rows)
            .map(|r| (r, a[(r, c)].abs()))
            .fold((rank, -1.0), |best, x| if x.1 > best.1 { x } else { best });
        if val <= tol {
            continue;
        }
        a.swap_rows(rank, piv);
        for r in rank + 1..rows {
            let f = a[(r, c)] / a[(rank, c)];
            for k in c..cols {
                a[(r, k)] -= f * a[(rank, k)];
            }
        }
        rank += 1;
    }
    rank
}
