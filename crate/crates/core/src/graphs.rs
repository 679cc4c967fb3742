//! Random graph ensembles and the row-normalized opinion-propagation matrix.
//!
//! Three binary models are provided: undirected and directed Erdős–Rényi, and
//! an undirected power-law configuration model. A sampled adjacency `A` is
//! turned into the dynamics matrix `Ā = Λ(A ⊙ w wᵀ)` by [`row_normalize`].
//!
//! Text formats:
//!
//! * Edge list: an optional run of `#` comment lines, a header line `<n> <directed>`
//!   where `<directed>` is `0` or `1`, then one `i j` pair per line (0-indexed).
//!   For directed graphs `i j` means `A[i][j] = 1`; undirected edges are listed
//!   once with `i < j`.
//! * Dense CSV: one matrix row per line, comma separated.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp1, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Square 0/1 adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryAdjacency {
    n: usize,
    directed: bool,
    entries: Vec<bool>,
}

impl BinaryAdjacency {
    pub fn empty(n: usize, directed: bool) -> Self {
        BinaryAdjacency {
            n,
            directed,
            entries: vec![false; n * n],
        }
    }

    /// `𝟙𝟙ᵀ − I`.
    pub fn complete(n: usize, directed: bool) -> Self {
        let mut a = Self::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    a.entries[i * n + j] = true;
                }
            }
        }
        a
    }

    /// Builds a graph from an edge list. Undirected edges are mirrored.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(n, directed);
        for &(i, j) in edges {
            a.add_edge(i, j)?;
        }
        Ok(a)
    }

    /// Builds a graph from a dense 0/1 matrix, checking the invariants.
    pub fn from_matrix(m: &DMatrix<f64>, directed: bool) -> Result<Self> {
        if !m.is_square() {
            return Err(CoreError::param("adjacency matrix must be square"));
        }
        let n = m.nrows();
        let mut a = Self::empty(n, directed);
        for i in 0..n {
            for j in 0..n {
                match m[(i, j)] {
                    x if x == 0.0 => {}
                    x if x == 1.0 => a.entries[i * n + j] = true,
                    x => return Err(CoreError::param(format!("entry ({i},{j}) = {x} is not 0/1"))),
                }
            }
        }
        a.check()?;
        Ok(a)
    }

    fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(CoreError::param(format!(
                "edge ({i},{j}) out of range for n = {}",
                self.n
            )));
        }
        if i == j {
            return Err(CoreError::param(format!("self-loop at node {i}")));
        }
        self.entries[i * self.n + j] = true;
        if !self.directed {
            self.entries[j * self.n + i] = true;
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) {
                return Err(CoreError::param(format!("nonzero diagonal at {i}")));
            }
            if !self.directed {
                for j in 0..i {
                    if self.get(i, j) != self.get(j, i) {
                        return Err(CoreError::param(format!(
                            "undirected adjacency is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    /// Number of edges (arcs for directed graphs).
    pub fn edge_count(&self) -> usize {
        let nnz = self.entries.iter().filter(|&&e| e).count();
        if self.directed {
            nnz
        } else {
            nnz / 2
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }

    /// Edge list in the serialized orientation (`i < j` for undirected).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) && (self.directed || i < j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.get(i, j) { 1.0 } else { 0.0 })
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, u8::from(self.directed))?;
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut header: Option<(usize, bool)> = None;
        let mut edges = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut parts = t.split_whitespace();
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(CoreError::parse(lineno, "expected two fields")),
            };
            if header.is_none() {
                let n: usize = a
                    .parse()
                    .map_err(|_| CoreError::parse(lineno, format!("bad node count {a:?}")))?;
                let directed = match b {
                    "0" | "false" | "undirected" => false,
                    "1" | "true" | "directed" => true,
                    _ => return Err(CoreError::parse(lineno, format!("bad directed flag {b:?}"))),
                };
                header = Some((n, directed));
                continue;
            }
            let i: usize = a
                .parse()
                .map_err(|_| CoreError::parse(lineno, format!("bad node index {a:?}")))?;
            let j: usize = b
                .parse()
                .map_err(|_| CoreError::parse(lineno, format!("bad node index {b:?}")))?;
            edges.push((lineno, i, j));
        }
        let (n, directed) = header.ok_or_else(|| CoreError::parse(0, "missing header line"))?;
        let mut a = Self::empty(n, directed);
        for (lineno, i, j) in edges {
            a.add_edge(i, j)
                .map_err(|e| CoreError::parse(lineno, e.to_string()))?;
        }
        Ok(a)
    }
}

/// Strictly positive node weights `w`; the edge weights are `W = w wᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(CoreError::param(format!("weights must be positive and finite, got {x}")));
        }
        Ok(WeightVector(w))
    }

    pub fn ones(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Continuous distribution the node weights are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDist {
    /// Uniform on (0, 1].
    #[default]
    Uniform,
    /// Exponential with rate 1.
    Exponential,
    /// Log-normal with location 0 and scale 1.
    LogNormal,
}

impl FromStr for WeightDist {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightDist::Uniform),
            "exponential" | "exp" => Ok(WeightDist::Exponential),
            "lognormal" | "log-normal" => Ok(WeightDist::LogNormal),
            _ => Err(CoreError::param(format!("unknown weight distribution {s:?}"))),
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightDist::Uniform => "uniform",
            WeightDist::Exponential => "exponential",
            WeightDist::LogNormal => "lognormal",
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CoreError::param(format!("edge probability {p} outside [0, 1]")))
    }
}

/// Undirected Erdős–Rényi graph: each pair `j < i` is an independent
/// Bernoulli(p) edge, mirrored to keep `A` symmetric.
pub fn sample_er_undirected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BinaryAdjacency> {
    check_probability(p)?;
    if n == 0 {
        return Err(CoreError::param("graph needs at least one node"));
    }
    let mut a = BinaryAdjacency::empty(n, false);
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(p) {
                a.entries[i * n + j] = true;
                a.entries[j * n + i] = true;
            }
        }
    }
    Ok(a)
}

/// Directed Erdős–Rényi graph: every off-diagonal entry is an independent
/// Bernoulli(p).
pub fn sample_er_directed<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<BinaryAdjacency> {
    check_probability(p)?;
    if n == 0 {
        return Err(CoreError::param("graph needs at least one node"));
    }
    let mut a = BinaryAdjacency::empty(n, true);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                a.entries[i * n + j] = true;
            }
        }
    }
    Ok(a)
}

/// Node degrees for the configuration model. The sum is always even and every
/// degree lies in `[1, n - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        if n < 2 {
            return Err(CoreError::param("degree sequence needs at least two nodes"));
        }
        if let Some(d) = degrees.iter().find(|&&d| d == 0 || d >= n) {
            return Err(CoreError::param(format!("degree {d} outside [1, {}]", n - 1)));
        }
        if degrees.iter().sum::<usize>() % 2 != 0 {
            return Err(CoreError::param("degree sum must be even"));
        }
        Ok(DegreeSequence(degrees))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }
}

/// Draws `n` degrees i.i.d. with `P(k) ∝ k^(-alpha)` on `k_min..=k_max`.
///
/// An odd total is repaired by incrementing one uniformly chosen node that is
/// below `k_max`; if every node sits at `k_max`, one uniformly chosen node is
/// decremented instead.
pub fn sample_power_law_degrees<R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    k_min: usize,
    k_max: usize,
    rng: &mut R,
) -> Result<DegreeSequence> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(CoreError::param(format!("power-law exponent {alpha} must exceed 1")));
    }
    if n < 2 {
        return Err(CoreError::param("power-law graph needs at least two nodes"));
    }
    if k_min < 1 || k_min > k_max {
        return Err(CoreError::param(format!("empty degree support [{k_min}, {k_max}]")));
    }
    if k_max > n - 1 {
        return Err(CoreError::param(format!("k_max = {k_max} exceeds n - 1 = {}", n - 1)));
    }
    let weights: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(-alpha)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| CoreError::param(e.to_string()))?;
    let mut degrees: Vec<usize> = (0..n).map(|_| k_min + dist.sample(rng)).collect();

    if degrees.iter().sum::<usize>() % 2 == 1 {
        if degrees.iter().any(|&d| d < k_max) {
            loop {
                let i = rng.random_range(0..n);
                if degrees[i] < k_max {
                    degrees[i] += 1;
                    break;
                }
            }
        } else if k_max > 1 {
            let i = rng.random_range(0..n);
            degrees[i] -= 1;
        } else {
            return Err(CoreError::param(
                "cannot make the degree sum even: every node is at k_max = 1",
            ));
        }
    }
    DegreeSequence::new(degrees)
}

/// Matches half-edges into a simple undirected graph.
///
/// Stubs are paired in random order; each stub picks a partner uniformly among
/// the remaining stubs that create neither a self-loop nor a parallel edge. If
/// no such partner exists the attempt is discarded and matching restarts from
/// scratch, up to `max_retries` times.
pub fn configuration_model<R: Rng + ?Sized>(
    degrees: &DegreeSequence,
    rng: &mut R,
    max_retries: usize,
) -> Result<BinaryAdjacency> {
    let n = degrees.n();
    'attempt: for _ in 0..max_retries.max(1) {
        let mut stubs: Vec<usize> = degrees
            .as_slice()
            .iter()
            .enumerate()
            .flat_map(|(node, &d)| std::iter::repeat_n(node, d))
            .collect();
        let mut a = BinaryAdjacency::empty(n, false);
        let mut candidates = Vec::with_capacity(stubs.len());
        while !stubs.is_empty() {
            let pick = rng.random_range(0..stubs.len());
            let u = stubs.swap_remove(pick);
            candidates.clear();
            candidates.extend(
                stubs
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != u && !a.get(u, v))
                    .map(|(idx, _)| idx),
            );
            if candidates.is_empty() {
                continue 'attempt;
            }
            let idx = candidates[rng.random_range(0..candidates.len())];
            let v = stubs.swap_remove(idx);
            a.entries[u * n + v] = true;
            a.entries[v * n + u] = true;
        }
        return Ok(a);
    }
    Err(CoreError::MatchingFailed {
        retries: max_retries.max(1),
    })
}

pub fn sample_weight_vector<R: Rng + ?Sized>(n: usize, dist: WeightDist, rng: &mut R) -> WeightVector {
    let lognormal = LogNormal::new(0.0, 1.0).expect("valid log-normal parameters");
    let draw = |rng: &mut R| -> f64 {
        match dist {
            WeightDist::Uniform => 1.0 - rng.random::<f64>(),
            WeightDist::Exponential => Exp1.sample(rng),
            WeightDist::LogNormal => lognormal.sample(rng),
        }
    };
    let w = (0..n)
        .map(|_| loop {
            let x = draw(rng);
            if x > 0.0 && x.is_finite() {
                break x;
            }
        })
        .collect();
    WeightVector(w)
}

/// The dynamics matrix `Ā = Λ(A ⊙ w wᵀ)` together with the graph and weights
/// it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RowNormalizedSystem {
    pub a_bar: DMatrix<f64>,
    pub adjacency: BinaryAdjacency,
    pub weights: WeightVector,
}

impl RowNormalizedSystem {
    pub fn n(&self) -> usize {
        self.a_bar.nrows()
    }
}

/// Scales each nonzero row of `A ⊙ w wᵀ` to sum to one. Rows of isolated
/// nodes stay zero.
pub fn row_normalize(adj: &BinaryAdjacency, w: &WeightVector) -> Result<RowNormalizedSystem> {
    let n = adj.n();
    if w.len() != n {
        return Err(CoreError::param(format!(
            "weight vector has length {} but the graph has {n} nodes",
            w.len()
        )));
    }
    let w = w.as_slice();
    let mut a_bar = DMatrix::zeros(n, n);
    for i in 0..n {
        // w_i is common to the row and cancels.
        let total: f64 = (0..n).filter(|&j| adj.get(i, j)).map(|j| w[j]).sum();
        if total > 0.0 {
            for j in 0..n {
                if adj.get(i, j) {
                    a_bar[(i, j)] = w[j] / total;
                }
            }
        }
    }
    Ok(RowNormalizedSystem {
        a_bar,
        adjacency: adj.clone(),
        weights: WeightVector(w.to_vec()),
    })
}

pub fn write_dense_csv<W: Write>(m: &DMatrix<f64>, mut w: W) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_dense_csv<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CoreError::parse(idx + 1, format!("bad number {x:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CoreError::parse(idx + 1, "ragged row"));
            }
        }
        rows.push(row);
    }
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}
