//! Admissible support families for budget- and pattern-constrained sparse inputs.
//!
//! Indices are 0-based in memory. The text form of a [`Support`] is 1-based,
//! e.g. `{1,3,5}`, one set per line in explicit-family files.
//!
//! Families:
//!
//! * **Unconstrained**: every `s`-subset of `{0..n}`.
//! * **Piecewise** with `m` pieces: `{0..n}` is cut into `m` consecutive windows
//!   of length `n/m`, and a member takes exactly `s/m` indices from each window.
//! * **Block** with block size `m`: `{0..n}` is cut into `n/m` consecutive
//!   blocks of length `m`, and a member is the union of `s/m` whole blocks.
//! * **Explicit**: a user-supplied list of `s`-sets.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Largest `|U| * C(s, t)` for which `Q` is computed by enumeration.
pub const BRUTE_FORCE_Q_LIMIT: u128 = 10_000_000;

/// Strictly increasing list of 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Support(Vec<usize>);

impl Support {
    /// Sorts the indices and rejects duplicates or indices `>= n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::param(format!("duplicate index in support {indices:?}")));
        }
        if let Some(&i) = indices.last() {
            if i >= n {
                return Err(CoreError::param(format!("index {} out of range 1..={n}", i + 1)));
            }
        }
        Ok(Support(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Support(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_superset_of(&self, other: &[usize]) -> bool {
        other.iter().all(|&i| self.contains(i))
    }

    /// 1-based indices, as printed.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// Indices of `0..n` not in the support.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for Support {
    type Err = CoreError;

    /// Parses the 1-based text form. Bounds against `n` are checked by the family.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .ok_or_else(|| CoreError::param(format!("support {t:?} must look like {{1,3,5}}")))?;
        let mut idx = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let v: usize = part
                .parse()
                .map_err(|_| CoreError::param(format!("bad index {part:?} in {t:?}")))?;
            if v == 0 {
                return Err(CoreError::param(format!("indices are 1-based, got 0 in {t:?}")));
            }
            idx.push(v - 1);
        }
        Support::new(idx, usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilyKind {
    Unconstrained,
    /// `pieces` consecutive windows, `s / pieces` indices from each.
    Piecewise { pieces: usize },
    /// Whole blocks of length `size`.
    Block { size: usize },
    /// Sorted, deduplicated members.
    Explicit { sets: Vec<Support> },
}

/// An admissible supports set together with its ambient dimension and budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFamily {
    n: usize,
    s: usize,
    kind: FamilyKind,
}

fn check_budget(n: usize, s: usize) -> Result<()> {
    if n == 0 || s == 0 || s > n {
        return Err(CoreError::param(format!("need 1 <= s <= n, got n = {n}, s = {s}")));
    }
    Ok(())
}

fn check_divides(m: usize, n: usize, s: usize) -> Result<()> {
    if m == 0 || n % m != 0 || s % m != 0 {
        return Err(CoreError::param(format!("m = {m} must divide both n = {n} and s = {s}")));
    }
    Ok(())
}

impl SupportFamily {
    pub fn unconstrained(n: usize, s: usize) -> Result<Self> {
        check_budget(n, s)?;
        Ok(SupportFamily {
            n,
            s,
            kind: FamilyKind::Unconstrained,
        })
    }

    pub fn piecewise(n: usize, s: usize, pieces: usize) -> Result<Self> {
        check_budget(n, s)?;
        check_divides(pieces, n, s)?;
        Ok(SupportFamily {
            n,
            s,
            kind: FamilyKind::Piecewise { pieces },
        })
    }

    pub fn block(n: usize, s: usize, size: usize) -> Result<Self> {
        check_budget(n, s)?;
        check_divides(size, n, s)?;
        Ok(SupportFamily {
            n,
            s,
            kind: FamilyKind::Block { size },
        })
    }

    /// Deduplicates `sets`; every set must have exactly `s` indices below `n`.
    pub fn explicit(n: usize, s: usize, sets: Vec<Support>) -> Result<Self> {
        check_budget(n, s)?;
        for set in &sets {
            if set.len() != s {
                return Err(CoreError::param(format!("set {set} has size {} but s = {s}", set.len())));
            }
            if set.indices().iter().any(|&i| i >= n) {
                return Err(CoreError::param(format!("set {set} exceeds n = {n}")));
            }
        }
        let mut sets = sets;
        sets.sort();
        sets.dedup();
        if sets.is_empty() {
            return Err(CoreError::param("explicit family has no sets"));
        }
        Ok(SupportFamily {
            n,
            s,
            kind: FamilyKind::Explicit { sets },
        })
    }

    /// Builds a family from its kind name (`unconstrained`, `piecewise`, `block`).
    /// `m` is the piece count or block size and is ignored for unconstrained.
    pub fn from_descriptor(kind: &str, n: usize, s: usize, m: Option<usize>) -> Result<Self> {
        let need_m = || m.ok_or_else(|| CoreError::param(format!("family {kind:?} needs m")));
        match kind.to_ascii_lowercase().as_str() {
            "unconstrained" => Self::unconstrained(n, s),
            "piecewise" | "piece-wise" => Self::piecewise(n, s, need_m()?),
            "block" => Self::block(n, s, need_m()?),
            other => Err(CoreError::param(format!("unknown family kind {other:?}"))),
        }
    }

    /// Reads an explicit family, one `{i,j,...}` set per line (1-based).
    pub fn read_explicit<R: BufRead>(n: usize, r: R) -> Result<Self> {
        let mut sets = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let set: Support = t.parse().map_err(|e: CoreError| CoreError::parse(idx + 1, e.to_string()))?;
            sets.push(set);
        }
        let s = sets
            .first()
            .map(Support::len)
            .ok_or_else(|| CoreError::parse(0, "no sets in explicit family"))?;
        Self::explicit(n, s, sets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Unconstrained => "unconstrained",
            FamilyKind::Piecewise { .. } => "piecewise",
            FamilyKind::Block { .. } => "block",
            FamilyKind::Explicit { .. } => "explicit",
        }
    }

    /// Piece count or block size, where applicable.
    pub fn m(&self) -> Option<usize> {
        match self.kind {
            FamilyKind::Piecewise { pieces } => Some(pieces),
            FamilyKind::Block { size } => Some(size),
            _ => None,
        }
    }

    /// `ℳ`: the union of all members, sorted.
    pub fn union_indices(&self) -> Vec<usize> {
        match &self.kind {
            FamilyKind::Explicit { sets } => {
                let mut seen = vec![false; self.n];
                for set in sets {
                    for &i in set.indices() {
                        seen[i] = true;
                    }
                }
                (0..self.n).filter(|&i| seen[i]).collect()
            }
            _ => (0..self.n).collect(),
        }
    }

    /// Whether the members jointly cover every index.
    pub fn coverage(&self) -> bool {
        self.union_indices().len() == self.n
    }

    /// Members in lexicographic order, generated lazily.
    pub fn enumerate(&self) -> SupportIter<'_> {
        SupportIter::new(self)
    }

    /// `|U|`.
    pub fn size(&self) -> Result<u128> {
        let overflow = || CoreError::Capacity(format!("family size overflows for {self:?}"));
        match &self.kind {
            FamilyKind::Unconstrained => binomial(self.n, self.s).ok_or_else(overflow),
            FamilyKind::Piecewise { pieces } => {
                let per = binomial(self.n / pieces, self.s / pieces).ok_or_else(overflow)?;
                per.checked_pow(*pieces as u32).ok_or_else(overflow)
            }
            FamilyKind::Block { size } => {
                binomial(self.n / size, self.s / size).ok_or_else(overflow)
            }
            FamilyKind::Explicit { sets } => Ok(sets.len() as u128),
        }
    }

    /// Membership test.
    pub fn contains(&self, candidate: &Support) -> bool {
        let idx = candidate.indices();
        if idx.len() != self.s || idx.iter().any(|&i| i >= self.n) {
            return false;
        }
        match &self.kind {
            FamilyKind::Unconstrained => true,
            FamilyKind::Piecewise { pieces } => {
                let w = self.n / pieces;
                let per = self.s / pieces;
                let mut counts = vec![0usize; *pieces];
                for &i in idx {
                    counts[i / w] += 1;
                }
                counts.iter().all(|&c| c == per)
            }
            FamilyKind::Block { size } => {
                // |S| = s, so whole blocks only means exactly s/size of them
                let mut counts = vec![0usize; self.n / size];
                for &i in idx {
                    counts[i / size] += 1;
                }
                counts.iter().all(|&c| c == 0 || c == *size)
            }
            FamilyKind::Explicit { sets } => sets.binary_search(candidate).is_ok(),
        }
    }

    /// Whether `partial` (sorted, no duplicates) is a subset of some member.
    pub fn is_extendable(&self, partial: &[usize]) -> bool {
        if partial.len() > self.s || partial.iter().any(|&i| i >= self.n) {
            return false;
        }
        match &self.kind {
            FamilyKind::Unconstrained => true,
            FamilyKind::Piecewise { pieces } => {
                let w = self.n / pieces;
                let per = self.s / pieces;
                let mut counts = vec![0usize; *pieces];
                for &i in partial {
                    counts[i / w] += 1;
                }
                counts.iter().all(|&c| c <= per)
            }
            FamilyKind::Block { size } => {
                let mut blocks: Vec<usize> = partial.iter().map(|i| i / size).collect();
                blocks.dedup();
                blocks.len() <= self.s / size
            }
            FamilyKind::Explicit { sets } => sets.iter().any(|set| set.is_superset_of(partial)),
        }
    }

    /// The lexicographically first member containing `partial`, if any.
    pub fn complete(&self, partial: &[usize]) -> Option<Support> {
        let mut partial = partial.to_vec();
        partial.sort_unstable();
        partial.dedup();
        if !self.is_extendable(&partial) {
            return None;
        }
        let fill = |range: std::ops::Range<usize>, chosen: &mut Vec<usize>, want: usize| {
            for i in range {
                if chosen.len() >= want {
                    break;
                }
                if !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
        };
        match &self.kind {
            FamilyKind::Unconstrained => {
                let mut chosen = partial;
                fill(0..self.n, &mut chosen, self.s);
                chosen.sort_unstable();
                Some(Support::from_sorted(chosen))
            }
            FamilyKind::Piecewise { pieces } => {
                let w = self.n / pieces;
                let per = self.s / pieces;
                let mut out = Vec::with_capacity(self.s);
                for p in 0..*pieces {
                    let mut chosen: Vec<usize> =
                        partial.iter().copied().filter(|i| i / w == p).collect();
                    fill(p * w..(p + 1) * w, &mut chosen, per);
                    out.extend(chosen);
                }
                out.sort_unstable();
                Some(Support::from_sorted(out))
            }
            FamilyKind::Block { size } => {
                let mut blocks: Vec<usize> = partial.iter().map(|i| i / size).collect();
                blocks.dedup();
                fill(0..self.n / size, &mut blocks, self.s / size);
                blocks.sort_unstable();
                let out = blocks
                    .iter()
                    .flat_map(|b| b * size..(b + 1) * size)
                    .collect();
                Some(Support::from_sorted(out))
            }
            FamilyKind::Explicit { sets } => {
                sets.iter().find(|set| set.is_superset_of(&partial)).cloned()
            }
        }
    }

    /// A member drawn uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Support {
        let mut out = match &self.kind {
            FamilyKind::Unconstrained => rand::seq::index::sample(rng, self.n, self.s).into_vec(),
            FamilyKind::Piecewise { pieces } => {
                let w = self.n / pieces;
                let per = self.s / pieces;
                (0..*pieces)
                    .flat_map(|p| {
                        rand::seq::index::sample(rng, w, per)
                            .into_iter()
                            .map(move |i| p * w + i)
                            .collect::<Vec<_>>()
                    })
                    .collect()
            }
            FamilyKind::Block { size } => {
                rand::seq::index::sample(rng, self.n / size, self.s / size)
                    .into_iter()
                    .flat_map(|b| b * size..(b + 1) * size)
                    .collect()
            }
            FamilyKind::Explicit { sets } => sets[rng.random_range(0..sets.len())].0.clone(),
        };
        out.sort_unstable();
        Support::from_sorted(out)
    }
}

/// Advances `c` (a strictly increasing `k`-combination of `0..n`) to its
/// lexicographic successor. Returns `false` after the last combination.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lazy lexicographic iterator over the members of a [`SupportFamily`].
pub struct SupportIter<'a> {
    family: &'a SupportFamily,
    // one combination per piece (a single piece for unconstrained; block
    // indices for block families)
    state: Vec<Vec<usize>>,
    explicit_pos: usize,
    done: bool,
}

impl<'a> SupportIter<'a> {
    fn new(family: &'a SupportFamily) -> Self {
        let state = match family.kind {
            FamilyKind::Unconstrained => vec![(0..family.s).collect()],
            FamilyKind::Piecewise { pieces } => vec![(0..family.s / pieces).collect(); pieces],
            FamilyKind::Block { size } => vec![(0..family.s / size).collect()],
            FamilyKind::Explicit { .. } => Vec::new(),
        };
        SupportIter {
            family,
            state,
            explicit_pos: 0,
            done: false,
        }
    }

    fn current(&self) -> Support {
        let f = self.family;
        let out = match f.kind {
            FamilyKind::Unconstrained => self.state[0].clone(),
            FamilyKind::Piecewise { pieces } => {
                let w = f.n / pieces;
                self.state
                    .iter()
                    .enumerate()
                    .flat_map(|(p, c)| c.iter().map(move |i| p * w + i))
                    .collect()
            }
            FamilyKind::Block { size } => self.state[0]
                .iter()
                .flat_map(|b| b * size..(b + 1) * size)
                .collect(),
            FamilyKind::Explicit { .. } => unreachable!(),
        };
        Support::from_sorted(out)
    }

    fn advance(&mut self) {
        let f = self.family;
        let range = match f.kind {
            FamilyKind::Unconstrained => f.n,
            FamilyKind::Piecewise { pieces } => f.n / pieces,
            FamilyKind::Block { size } => f.n / size,
            FamilyKind::Explicit { .. } => unreachable!(),
        };
        // least significant piece is the last one
        for p in (0..self.state.len()).rev() {
            if next_combination(&mut self.state[p], range) {
                return;
            }
            let k = self.state[p].len();
            self.state[p] = (0..k).collect();
        }
        self.done = true;
    }
}

impl Iterator for SupportIter<'_> {
    type Item = Support;

    fn next(&mut self) -> Option<Support> {
        if let FamilyKind::Explicit { sets } = &self.family.kind {
            let out = sets.get(self.explicit_pos).cloned();
            self.explicit_pos += 1;
            return out;
        }
        if self.done {
            return None;
        }
        let out = self.current();
        self.advance();
        Some(out)
    }
}

/// `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        // exact: r * (n - i) is divisible by (i + 1) after the multiply
        r = r.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(r)
}

/// `Q(t, U)`: the number of distinct `t`-subsets of members of `U`.
///
/// Unconstrained families use `C(n, t)`. Piecewise and block families are
/// enumerated when `|U| * C(s, t) <= BRUTE_FORCE_Q_LIMIT` and fall back to
/// [`count_subsets_q_closed_form`] otherwise. Explicit families are always
/// enumerated.
pub fn count_subsets_q(t: usize, family: &SupportFamily) -> Result<u128> {
    if t > family.s {
        return Err(CoreError::param(format!("t = {t} exceeds s = {}", family.s)));
    }
    if t == 0 {
        return Ok(1);
    }
    match family.kind {
        FamilyKind::Unconstrained => count_subsets_q_closed_form(t, family)?
            .ok_or_else(|| CoreError::Capacity("binomial overflow".into())),
        FamilyKind::Piecewise { .. } | FamilyKind::Block { .. } => {
            if brute_force_feasible(t, family) {
                count_subsets_q_brute_force(t, family)
            } else {
                count_subsets_q_closed_form(t, family)?
                    .ok_or_else(|| CoreError::Capacity("closed form overflow".into()))
            }
        }
        FamilyKind::Explicit { .. } => count_subsets_q_brute_force(t, family),
    }
}

fn brute_force_feasible(t: usize, family: &SupportFamily) -> bool {
    if family.n > 128 {
        return false;
    }
    match (family.size(), binomial(family.s, t)) {
        (Ok(u), Some(c)) => u.checked_mul(c).is_some_and(|w| w <= BRUTE_FORCE_Q_LIMIT),
        _ => false,
    }
}

/// `Q(t, U)` by enumerating every `t`-subset of every member.
pub fn count_subsets_q_brute_force(t: usize, family: &SupportFamily) -> Result<u128> {
    if t > family.s {
        return Err(CoreError::param(format!("t = {t} exceeds s = {}", family.s)));
    }
    if !brute_force_feasible(t, family) {
        return Err(CoreError::Capacity(format!(
            "enumerating Q({t}, U) for a {} family with n = {}, s = {} exceeds {BRUTE_FORCE_Q_LIMIT} subsets",
            family.kind_name(),
            family.n,
            family.s
        )));
    }
    let mut seen: HashSet<u128> = HashSet::new();
    let mut pos: Vec<usize> = (0..t).collect();
    for set in family.enumerate() {
        let idx = set.indices();
        pos.iter_mut().enumerate().for_each(|(i, p)| *p = i);
        loop {
            let mask = pos.iter().fold(0u128, |m, &p| m | (1u128 << idx[p]));
            seen.insert(mask);
            if !next_combination(&mut pos, idx.len()) {
                break;
            }
        }
    }
    Ok(seen.len() as u128)
}

/// Closed-form `Q(t, U)`; `None` for explicit families.
///
/// * unconstrained: `C(n, t)`
/// * piecewise (`m` windows of width `w = n/m`, `s/m` per window): the
///   coefficient of `x^t` in `(Σ_{j ≤ s/m} C(w, j) x^j)^m`
/// * block (`B = n/m` blocks of size `m`): `Σ_b C(B, b) H(b, t)` over the
///   number `b ≤ s/m` of touched blocks, with `H(b, t) = Σ_j (-1)^j C(b, j) C((b-j)m, t)`
///   counting `t`-subsets of `b` blocks that meet every one of them.
pub fn count_subsets_q_closed_form(t: usize, family: &SupportFamily) -> Result<Option<u128>> {
    if t > family.s {
        return Err(CoreError::param(format!("t = {t} exceeds s = {}", family.s)));
    }
    let overflow = || CoreError::Capacity("closed form overflows u128".into());
    let (n, s) = (family.n, family.s);
    let q = match family.kind {
        FamilyKind::Unconstrained => binomial(n, t).ok_or_else(overflow)?,
        FamilyKind::Piecewise { pieces } => {
            let w = n / pieces;
            let per = s / pieces;
            let base: Vec<u128> = (0..=per)
                .map(|j| binomial(w, j).ok_or_else(overflow))
                .collect::<Result<_>>()?;
            let mut poly = vec![1u128];
            for _ in 0..pieces {
                let mut next = vec![0u128; (poly.len() + per).min(t + 1)];
                for (a, &pa) in poly.iter().enumerate() {
                    for (b, &pb) in base.iter().enumerate() {
                        if a + b < next.len() {
                            let term = pa.checked_mul(pb).ok_or_else(overflow)?;
                            next[a + b] = next[a + b].checked_add(term).ok_or_else(overflow)?;
                        }
                    }
                }
                poly = next;
            }
            poly.get(t).copied().unwrap_or(0)
        }
        FamilyKind::Block { size } => {
            let blocks = n / size;
            let max_blocks = s / size;
            let mut total: u128 = 0;
            for b in t.div_ceil(size)..=max_blocks.min(t) {
                let mut hits: i128 = 0;
                for j in 0..=b {
                    let c = i128::try_from(
                        binomial(b, j)
                            .ok_or_else(overflow)?
                            .checked_mul(binomial((b - j) * size, t).ok_or_else(overflow)?)
                            .ok_or_else(overflow)?,
                    )
                    .map_err(|_| overflow())?;
                    hits += if j % 2 == 0 { c } else { -c };
                }
                let hits = u128::try_from(hits).map_err(|_| overflow())?;
                let term = binomial(blocks, b)
                    .ok_or_else(overflow)?
                    .checked_mul(hits)
                    .ok_or_else(overflow)?;
                total = total.checked_add(term).ok_or_else(overflow)?;
            }
            total
        }
        FamilyKind::Explicit { .. } => return Ok(None),
    };
    Ok(Some(q))
}

/// Interleaving permutation that lays block-structured vectors out piece-wise:
/// position `b*m + j` (block `b`, offset `j`) goes to `j*(n/m) + b`.
///
/// Under it every member of `Block(n, s, m)` maps onto a member of
/// `Piecewise(n, s, m)`.
pub fn block_to_piecewise_permutation(n: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || n == 0 || n % m != 0 {
        return Err(CoreError::param(format!("block size {m} must divide n = {n}")));
    }
    let blocks = n / m;
    Ok((0..n).map(|i| (i % m) * blocks + i / m).collect())
}

/// Image of a support under a permutation given as `perm[old] = new`.
pub fn permute_support(perm: &[usize], support: &Support) -> Support {
    let mut out: Vec<usize> = support.indices().iter().map(|&i| perm[i]).collect();
    out.sort_unstable();
    Support::from_sorted(out)
}
