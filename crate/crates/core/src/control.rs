//! Sparse controllability of `α_k = Φ α_{k-1} + Ψ v_k` when every input
//! support must lie in an admissible family `U`.
//!
//! The system is controllable iff
//!
//! * (a) `rank [λI − Φ, Ψ_M] = n` for every eigenvalue `λ` of `Φ`, where `M`
//!   is the union of all members of `U`, and
//! * (b) some `S ∈ U` gives `rank [Φ, Ψ_S] = n`.
//!
//! [`brute_force_controllable`] checks the definition directly (some finite
//! sequence of admissible supports yields a full-rank reachability matrix)
//! and serves as the oracle for the two-condition test on small systems.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::{self, RankPolicy};
use crate::sparsity::{FamilyKind, Support, SupportFamily};

/// Eigenvalues closer than this are tested once.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;
/// Exhaustive condition (b) refuses families larger than this.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;
/// [`ConditionBStrategy::Auto`] enumerates families up to this size.
pub const AUTO_EXHAUSTIVE_LIMIT: u128 = 100_000;
/// Draws used by `Auto` when it falls back to sampling.
pub const AUTO_SAMPLED_DRAWS: usize = 10_000;
/// Distinct reachable subspaces the brute-force oracle may visit.
pub const BRUTE_FORCE_STATE_LIMIT: usize = 1_000_000;
/// Largest state dimension accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_N: usize = 6;
/// Default relative rank threshold of the brute-force oracle. Subspaces are
/// re-orthonormalized at every step and pick up a few ulps of noise outside
/// the true reachable space; an ε-scale threshold would eventually admit it.
pub const BRUTE_FORCE_RANK_FACTOR: f64 = 1e-10;

/// `α_k = Φ α_{k-1} + Ψ v_k` with `Φ` of size `n×n` and `Ψ` of size `n×L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    phi: DMatrix<f64>,
    psi: DMatrix<f64>,
    psi_identity: bool,
}

impl LinearSystem {
    pub fn new(phi: DMatrix<f64>, psi: DMatrix<f64>) -> Result<Self> {
        if !phi.is_square() || phi.nrows() == 0 {
            return Err(CoreError::param("state matrix must be square and nonempty"));
        }
        if psi.nrows() != phi.nrows() {
            return Err(CoreError::param(format!(
                "input matrix has {} rows, state dimension is {}",
                psi.nrows(),
                phi.nrows()
            )));
        }
        let psi_identity = psi.is_square() && psi == DMatrix::identity(psi.nrows(), psi.ncols());
        Ok(LinearSystem {
            phi,
            psi,
            psi_identity,
        })
    }

    /// The opinion-dynamics instance: `Ψ = I`.
    pub fn with_identity_input(phi: DMatrix<f64>) -> Result<Self> {
        let n = phi.nrows();
        Self::new(phi, DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    /// Number of input channels `L`.
    pub fn inputs(&self) -> usize {
        self.psi.ncols()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn input_is_identity(&self) -> bool {
        self.psi_identity
    }

    fn psi_columns(&self, cols: &[usize]) -> DMatrix<f64> {
        self.psi.select_columns(cols)
    }

    fn check_family(&self, family: &SupportFamily) -> Result<()> {
        if family.n() != self.inputs() {
            return Err(CoreError::param(format!(
                "family is over {} inputs but the system has {}",
                family.n(),
                self.inputs()
            )));
        }
        Ok(())
    }
}

/// How condition (b) searches the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum ConditionBStrategy {
    /// Shortcut for unconstrained families with `Ψ = I`, exhaustive up to
    /// [`AUTO_EXHAUSTIVE_LIMIT`] members, sampled beyond.
    #[default]
    Auto,
    /// Every member in lexicographic order; the first success is the witness.
    Exhaustive,
    /// `rank Φ >= n − s`; only for unconstrained families with `Ψ = I`.
    UnconstrainedShortcut,
    /// `draws` members drawn uniformly with a seeded stream. A negative answer
    /// is inconclusive.
    Sampled { draws: usize, seed: u64 },
}

impl ConditionBStrategy {
    /// Replaces `Auto` by the concrete strategy used for this instance.
    pub fn resolve(self, system: &LinearSystem, family: &SupportFamily) -> Result<Self> {
        if self != ConditionBStrategy::Auto {
            return Ok(self);
        }
        if system.input_is_identity() && matches!(family.kind(), FamilyKind::Unconstrained) {
            return Ok(ConditionBStrategy::UnconstrainedShortcut);
        }
        // an overflowing size is certainly above the limit
        let size = family.size().unwrap_or(u128::MAX);
        Ok(if size <= AUTO_EXHAUSTIVE_LIMIT {
            ConditionBStrategy::Exhaustive
        } else {
            ConditionBStrategy::Sampled {
                draws: AUTO_SAMPLED_DRAWS,
                seed: 0,
            }
        })
    }
}

impl fmt::Display for ConditionBStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionBStrategy::Auto => f.write_str("auto"),
            ConditionBStrategy::Exhaustive => f.write_str("exhaustive"),
            ConditionBStrategy::UnconstrainedShortcut => f.write_str("unconstrained-shortcut"),
            ConditionBStrategy::Sampled { draws, seed } => write!(f, "sampled:{draws}:{seed}"),
        }
    }
}

impl FromStr for ConditionBStrategy {
    type Err = CoreError;

    /// `auto`, `exhaustive`, `shortcut`/`unconstrained-shortcut`, or
    /// `sampled:<draws>[:<seed>]`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "auto" => return Ok(ConditionBStrategy::Auto),
            "exhaustive" => return Ok(ConditionBStrategy::Exhaustive),
            "shortcut" | "unconstrained-shortcut" => {
                return Ok(ConditionBStrategy::UnconstrainedShortcut)
            }
            _ => {}
        }
        let mut parts = lower.split(':');
        if parts.next() == Some("sampled") {
            let draws = parts
                .next()
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| CoreError::param(format!("bad strategy {s:?}")))?;
            let seed = match parts.next() {
                Some(x) => x
                    .parse()
                    .map_err(|_| CoreError::param(format!("bad seed in strategy {s:?}")))?,
                None => 0,
            };
            return Ok(ConditionBStrategy::Sampled { draws, seed });
        }
        Err(CoreError::param(format!("unknown strategy {s:?}")))
    }
}

/// Smallest singular value of `[λI − Φ, Ψ_M]` at one eigenvalue cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMargin {
    pub re: f64,
    pub im: f64,
    pub sigma_min: f64,
    pub full_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionA {
    pub holds: bool,
    /// `Ψ_M` alone has rank `n`, so no eigenvalue needed testing.
    pub shortcut: bool,
    pub margins: Vec<EigenMargin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionB {
    pub holds: bool,
    pub witness: Option<Support>,
    /// Smallest singular value of the matrix that certified the witness.
    pub margin: Option<f64>,
    /// A sampled search found nothing; this is not a proof of failure.
    pub inconclusive: bool,
    pub supports_tested: u64,
    pub strategy: ConditionBStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub eigen_margins: Vec<EigenMargin>,
    pub condition_a_shortcut: bool,
    /// The relative rank-threshold factor, `None` meaning `max(rows, cols)·ε`.
    pub rank_factor: Option<f64>,
    pub strategy: ConditionBStrategy,
    pub condition_b_margin: Option<f64>,
    pub inconclusive: bool,
    pub supports_tested: u64,
}

/// Result of the two-condition test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityVerdict {
    pub cond_a: bool,
    pub cond_b: bool,
    pub controllable: bool,
    pub witness: Option<Support>,
    pub diagnostics: Diagnostics,
}

/// Flat record of a verdict for JSON/CSV emission; witness indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub controllable: bool,
    pub cond_a: bool,
    pub cond_b: bool,
    pub witness: Option<Vec<usize>>,
    pub strategy: String,
    pub inconclusive: bool,
    pub condition_b_margin: Option<f64>,
    pub min_eigen_margin: Option<f64>,
    pub eigen_margins: Vec<EigenMargin>,
}

impl ControllabilityVerdict {
    pub fn to_record(&self) -> VerdictRecord {
        VerdictRecord {
            controllable: self.controllable,
            cond_a: self.cond_a,
            cond_b: self.cond_b,
            witness: self.witness.as_ref().map(Support::one_based),
            strategy: self.diagnostics.strategy.to_string(),
            inconclusive: self.diagnostics.inconclusive,
            condition_b_margin: self.diagnostics.condition_b_margin,
            min_eigen_margin: self
                .diagnostics
                .eigen_margins
                .iter()
                .map(|m| m.sigma_min)
                .reduce(f64::min),
            eigen_margins: self.diagnostics.eigen_margins.clone(),
        }
    }
}

/// Condition (a): the PBH test for the pair `(Φ, Ψ_M)`.
pub fn condition_a(system: &LinearSystem, family: &SupportFamily, policy: &RankPolicy) -> Result<ConditionA> {
    system.check_family(family)?;
    let n = system.n();
    let psi_m = system.psi_columns(&family.union_indices());
    if psi_m.ncols() >= n && linalg::numeric_rank(&psi_m, policy)? == n {
        return Ok(ConditionA {
            holds: true,
            shortcut: true,
            margins: Vec::new(),
        });
    }
    let eig = linalg::eigenvalues(system.phi())?;
    let mut reps = linalg::cluster_eigenvalues(&eig, EIGEN_CLUSTER_TOL);
    let scale = linalg::singular_values(system.phi())?.first().copied().unwrap_or(0.0);
    for c in linalg::defective_centroids(&eig, EIGEN_CLUSTER_TOL, scale) {
        if !reps.iter().any(|r| (r - c).norm() <= f64::EPSILON * scale.max(1.0)) {
            reps.push(c);
        }
    }
    // eigenvalues carry the eigensolver's backward error, about n·ε·‖Φ‖, so
    // the default threshold is widened by a factor n at these points
    let pbh_policy = match policy.factor {
        Some(_) => *policy,
        None => RankPolicy::relative((2 * n) as f64 * n as f64 * f64::EPSILON),
    };
    let mut margins = Vec::with_capacity(reps.len());
    for lambda in reps {
        let lambda = refine_eigenvalue(system.phi(), lambda)?;
        let m = DMatrix::from_fn(n, n + psi_m.ncols(), |i, j| {
            if j < n {
                let d = if i == j { lambda } else { Complex::new(0.0, 0.0) };
                d - Complex::new(system.phi()[(i, j)], 0.0)
            } else {
                Complex::new(psi_m[(i, j - n)], 0.0)
            }
        });
        let report = linalg::rank_report(&m, &pbh_policy)?;
        margins.push(EigenMargin {
            re: lambda.re,
            im: lambda.im,
            sigma_min: report.sigma_min,
            full_rank: report.rank == n,
        });
    }
    Ok(ConditionA {
        holds: margins.iter().all(|m| m.full_rank),
        shortcut: false,
        margins,
    })
}

/// Two-sided Rayleigh-quotient steps `λ ← uᴴΦv / uᴴv` from the smallest
/// singular triplet of `λI − Φ`, kept only while they reduce `σ_min`. Solver
/// output can sit a few ulps away from the true eigenvalue, enough to lift
/// `σ_min` over a relative-ε rank threshold.
fn refine_eigenvalue(phi: &DMatrix<f64>, lambda: Complex<f64>) -> Result<Complex<f64>> {
    let n = phi.nrows();
    let phi_c = phi.map(|x| Complex::new(x, 0.0));
    let step = |l: Complex<f64>| -> Result<(f64, Option<Complex<f64>>)> {
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            let d = if i == j { l } else { Complex::new(0.0, 0.0) };
            d - phi_c[(i, j)]
        });
        let svd = shifted
            .try_svd(true, true, linalg::DECOMP_EPS, 10_000)
            .ok_or_else(|| CoreError::Numerical("SVD did not converge while refining an eigenvalue".into()))?;
        let (k, &sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let u = svd.u.as_ref().expect("u requested").column(k).into_owned();
        let v = svd.v_t.as_ref().expect("v requested").row(k).adjoint();
        let denom = u.dotc(&v);
        let next = (denom.norm() > 1e-8).then(|| u.dotc(&(&phi_c * &v)) / denom);
        Ok((sigma, next))
    };
    let mut best = lambda;
    let (mut sigma, mut next) = step(best)?;
    for _ in 0..3 {
        let Some(candidate) = next else { break };
        // stay on the eigenvalue being tested
        if sigma == 0.0 || (candidate - lambda).norm() > 1e-6 * lambda.norm().max(1.0) {
            break;
        }
        let (s2, n2) = step(candidate)?;
        if s2 >= sigma {
            break;
        }
        best = candidate;
        sigma = s2;
        next = n2;
    }
    Ok(best)
}

/// Tests `rank [Φ, Ψ_S] = n` for one support. With `Ψ = I` this is full row
/// rank of the rows of `Φ` outside `S`.
fn support_certifies(system: &LinearSystem, support: &Support, policy: &RankPolicy) -> Result<(bool, f64)> {
    let n = system.n();
    if system.input_is_identity() {
        let rows = support.complement(n);
        if rows.is_empty() {
            return Ok((true, f64::INFINITY));
        }
        let sub = system.phi().select_rows(&rows);
        let report = linalg::rank_report(&sub, policy)?;
        return Ok((report.rank == rows.len(), report.sigma_min));
    }
    let psi_s = system.psi_columns(support.indices());
    let m = DMatrix::from_fn(n, n + psi_s.ncols(), |i, j| {
        if j < n {
            system.phi()[(i, j)]
        } else {
            psi_s[(i, j - n)]
        }
    });
    let report = linalg::rank_report(&m, policy)?;
    Ok((report.rank == n, report.sigma_min))
}

/// Greedily picks `target` linearly independent rows of `phi`, lowest index first.
fn independent_rows(phi: &DMatrix<f64>, target: usize, policy: &RankPolicy) -> Result<Option<Vec<usize>>> {
    let mut chosen: Vec<usize> = Vec::with_capacity(target);
    for i in 0..phi.nrows() {
        if chosen.len() == target {
            break;
        }
        if phi.nrows() - i < target - chosen.len() {
            return Ok(None);
        }
        chosen.push(i);
        let sub = phi.select_rows(&chosen);
        if linalg::numeric_rank(&sub, policy)? < chosen.len() {
            chosen.pop();
        }
    }
    Ok((chosen.len() == target).then_some(chosen))
}

fn exhaustive_search(
    system: &LinearSystem,
    family: &SupportFamily,
    policy: &RankPolicy,
) -> Result<ConditionB> {
    let size = family.size()?;
    if size > EXHAUSTIVE_LIMIT {
        return Err(CoreError::Capacity(format!(
            "exhaustive search over {size} supports exceeds {EXHAUSTIVE_LIMIT}; use the unconstrained shortcut or sampling"
        )));
    }
    let mut tested = 0u64;
    for support in family.enumerate() {
        tested += 1;
        let (ok, margin) = support_certifies(system, &support, policy)?;
        if ok {
            return Ok(ConditionB {
                holds: true,
                witness: Some(support),
                margin: Some(margin),
                inconclusive: false,
                supports_tested: tested,
                strategy: ConditionBStrategy::Exhaustive,
            });
        }
    }
    Ok(ConditionB {
        holds: false,
        witness: None,
        margin: None,
        inconclusive: false,
        supports_tested: tested,
        strategy: ConditionBStrategy::Exhaustive,
    })
}

/// Condition (b): some admissible support completes `Φ` to full row rank.
pub fn condition_b(
    system: &LinearSystem,
    family: &SupportFamily,
    policy: &RankPolicy,
    strategy: ConditionBStrategy,
) -> Result<ConditionB> {
    system.check_family(family)?;
    let n = system.n();
    let strategy = strategy.resolve(system, family)?;
    match strategy {
        ConditionBStrategy::Auto => unreachable!("resolved above"),
        ConditionBStrategy::Exhaustive => exhaustive_search(system, family, policy),
        ConditionBStrategy::UnconstrainedShortcut => {
            if !system.input_is_identity() || !matches!(family.kind(), FamilyKind::Unconstrained) {
                return Err(CoreError::param(
                    "the unconstrained shortcut needs an unconstrained family and identity input",
                ));
            }
            let s = family.s();
            let rank = linalg::numeric_rank(system.phi(), policy)?;
            let mut out = ConditionB {
                holds: rank + s >= n,
                witness: None,
                margin: None,
                inconclusive: false,
                supports_tested: 0,
                strategy,
            };
            if out.holds {
                let witness = match independent_rows(system.phi(), n - s, policy)? {
                    Some(rows) => {
                        let complement: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
                        Support::new(complement, n)?
                    }
                    None => {
                        // borderline rank: fall back to a full search for the witness
                        let found = exhaustive_search(system, family, policy)?;
                        found.witness.ok_or_else(|| {
                            CoreError::Numerical(format!(
                                "rank(Φ) = {rank} suggests a witness but none passes the row test"
                            ))
                        })?
                    }
                };
                let (_, margin) = support_certifies(system, &witness, policy)?;
                out.witness = Some(witness);
                out.margin = Some(margin);
                out.supports_tested = 1;
            }
            Ok(out)
        }
        ConditionBStrategy::Sampled { draws, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in 0..draws {
                let support = family.sample(&mut rng);
                let (ok, margin) = support_certifies(system, &support, policy)?;
                if ok {
                    return Ok(ConditionB {
                        holds: true,
                        witness: Some(support),
                        margin: Some(margin),
                        inconclusive: false,
                        supports_tested: k as u64 + 1,
                        strategy,
                    });
                }
            }
            Ok(ConditionB {
                holds: false,
                witness: None,
                margin: None,
                inconclusive: true,
                supports_tested: draws as u64,
                strategy,
            })
        }
    }
}

/// Both conditions, with witness and diagnostics.
///
/// With `Ψ = I` and `s = n` every system is controllable and the answer is
/// returned without any rank computation.
pub fn is_sparse_controllable(
    system: &LinearSystem,
    family: &SupportFamily,
    policy: &RankPolicy,
    strategy: ConditionBStrategy,
) -> Result<ControllabilityVerdict> {
    system.check_family(family)?;
    if system.input_is_identity() && family.s() == system.n() {
        return Ok(ControllabilityVerdict {
            cond_a: true,
            cond_b: true,
            controllable: true,
            witness: family.enumerate().next(),
            diagnostics: Diagnostics {
                eigen_margins: Vec::new(),
                condition_a_shortcut: true,
                rank_factor: policy.factor,
                strategy: strategy.resolve(system, family)?,
                condition_b_margin: None,
                inconclusive: false,
                supports_tested: 0,
            },
        });
    }
    let a = condition_a(system, family, policy)?;
    let b = condition_b(system, family, policy, strategy)?;
    Ok(ControllabilityVerdict {
        cond_a: a.holds,
        cond_b: b.holds,
        controllable: a.holds && b.holds,
        witness: b.witness,
        diagnostics: Diagnostics {
            eigen_margins: a.margins,
            condition_a_shortcut: a.shortcut,
            rank_factor: policy.factor,
            strategy: b.strategy,
            condition_b_margin: b.margin,
            inconclusive: b.inconclusive,
            supports_tested: b.supports_tested,
        },
    })
}

fn subspace_key(basis: &DMatrix<f64>) -> Vec<i64> {
    let proj = basis * basis.transpose();
    proj.iter().map(|x| (x * 1e8).round() as i64).collect()
}

/// Decides controllability from the definition: is there a `K <= k_max` and a
/// sequence `S_1, …, S_K ∈ U` with
/// `rank [Φ^{K-1} Ψ_{S_1}, …, Φ Ψ_{S_{K-1}}, Ψ_{S_K}] = n`?
///
/// The column space of that matrix obeys `V_k = Φ V_{k-1} + span Ψ_{S_k}`, so
/// every sequence is explored as a walk over subspaces. Subspaces already
/// visited are not expanded again: what is reachable from a subspace does not
/// depend on how it was reached. The default `k_max` is `n·|U|`. Without an
/// explicit rank factor, [`BRUTE_FORCE_RANK_FACTOR`] is used.
pub fn brute_force_controllable(
    system: &LinearSystem,
    family: &SupportFamily,
    k_max: Option<usize>,
    policy: &RankPolicy,
) -> Result<bool> {
    system.check_family(family)?;
    let n = system.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(CoreError::Capacity(format!(
            "brute-force oracle limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let size = family.size()?;
    if size > 10_000 {
        return Err(CoreError::Capacity(format!("brute-force oracle limited to |U| <= 10000, got {size}")));
    }
    let k_max = k_max.unwrap_or(n * size as usize);
    let policy = &RankPolicy {
        factor: Some(policy.factor.unwrap_or(BRUTE_FORCE_RANK_FACTOR)),
    };
    let inputs: Vec<DMatrix<f64>> = family
        .enumerate()
        .map(|s| system.psi_columns(s.indices()))
        .collect();

    let mut visited: HashSet<Vec<i64>> = HashSet::new();
    let mut frontier = vec![DMatrix::<f64>::zeros(n, 0)];
    for _ in 0..k_max {
        let mut next = Vec::new();
        for basis in &frontier {
            let propagated = system.phi() * basis;
            for psi_s in &inputs {
                let stacked = DMatrix::from_fn(n, propagated.ncols() + psi_s.ncols(), |i, j| {
                    if j < propagated.ncols() {
                        propagated[(i, j)]
                    } else {
                        psi_s[(i, j - propagated.ncols())]
                    }
                });
                let b = linalg::column_space_basis(&stacked, policy)?;
                if b.ncols() == n {
                    return Ok(true);
                }
                if visited.insert(subspace_key(&b)) {
                    next.push(b);
                }
            }
        }
        if visited.len() > BRUTE_FORCE_STATE_LIMIT {
            return Err(CoreError::Capacity(format!(
                "brute-force oracle visited more than {BRUTE_FORCE_STATE_LIMIT} subspaces"
            )));
        }
        if next.is_empty() {
            return Ok(false);
        }
        frontier = next;
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{row_normalize, BinaryAdjacency, WeightVector};
    use nalgebra::dmatrix;

    fn policy() -> RankPolicy {
        RankPolicy::default()
    }

    #[test]
    fn condition_a_identity_input_with_coverage() {
        let phi = dmatrix![0.3, 0.7, 0.0; 0.2, 0.1, 0.7; 1.0, 0.0, 0.0];
        let sys = LinearSystem::with_identity_input(phi).unwrap();
        let f = SupportFamily::unconstrained(3, 1).unwrap();
        let a = condition_a(&sys, &f, &policy()).unwrap();
        assert!(a.holds && a.shortcut);
    }

    #[test]
    fn condition_a_sees_through_split_jordan_blocks() {
        // nilpotent part on {0, 2, 5} plus a 3-cycle; zero is defective
        let phi = dmatrix![
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0;
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
            0.0, 1.0, 0.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        ];
        let perm = [2usize, 4, 3, 1, 0, 5];
        let mut permuted = DMatrix::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                permuted[(perm[i], perm[j])] = phi[(i, j)];
            }
        }
        let f = SupportFamily::explicit(6, 1, vec![Support::new(vec![0], 6).unwrap()]).unwrap();
        for m in [phi, permuted] {
            let a = condition_a(&LinearSystem::with_identity_input(m).unwrap(), &f, &policy()).unwrap();
            assert!(!a.holds);
        }
    }

    #[test]
    fn condition_a_fails_for_zero_dynamics_with_partial_union() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(2, 2)).unwrap();
        let f = SupportFamily::explicit(2, 1, vec![Support::new(vec![0], 2).unwrap()]).unwrap();
        let a = condition_a(&sys, &f, &policy()).unwrap();
        assert!(!a.holds);
        assert_eq!(a.margins.len(), 1);
    }

    #[test]
    fn condition_a_diagonal_with_ones_input() {
        let sys = LinearSystem::new(dmatrix![1.0, 0.0; 0.0, 2.0], dmatrix![1.0; 1.0]).unwrap();
        let f = SupportFamily::unconstrained(1, 1).unwrap();
        let a = condition_a(&sys, &f, &policy()).unwrap();
        assert!(a.holds);
        assert!(!a.shortcut);
        assert_eq!(a.margins.len(), 2);
    }

    #[test]
    fn condition_b_zero_dynamics() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(4, 4)).unwrap();
        let f = SupportFamily::unconstrained(4, 2).unwrap();
        for strategy in [ConditionBStrategy::Exhaustive, ConditionBStrategy::UnconstrainedShortcut] {
            let b = condition_b(&sys, &f, &policy(), strategy).unwrap();
            assert!(!b.holds);
            assert!(b.witness.is_none());
        }
    }

    #[test]
    fn condition_b_complete_graph() {
        let sys = row_normalize(&BinaryAdjacency::complete(6, false), &WeightVector::ones(6)).unwrap();
        let sys = LinearSystem::with_identity_input(sys.a_bar).unwrap();
        for f in [
            SupportFamily::unconstrained(6, 1).unwrap(),
            SupportFamily::piecewise(6, 2, 2).unwrap(),
            SupportFamily::block(6, 2, 2).unwrap(),
        ] {
            let v = is_sparse_controllable(&sys, &f, &policy(), ConditionBStrategy::Auto).unwrap();
            assert!(v.controllable, "{f:?}");
            assert!(f.contains(v.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn rank_three_matrix_strategies_agree() {
        // third row = first + second
        let phi = dmatrix![
            1.0, 2.0, 0.5, 0.0;
            0.0, 1.0, 3.0, 1.0;
            1.0, 3.0, 3.5, 1.0;
            2.0, 0.0, 1.0, 4.0
        ];
        let sys = LinearSystem::with_identity_input(phi).unwrap();
        let f = SupportFamily::unconstrained(4, 1).unwrap();
        let short = condition_b(&sys, &f, &policy(), ConditionBStrategy::UnconstrainedShortcut).unwrap();
        let exh = condition_b(&sys, &f, &policy(), ConditionBStrategy::Exhaustive).unwrap();
        assert!(short.holds && exh.holds);
        // dropping row 1 leaves rows 2,3,4 which are independent
        assert_eq!(exh.witness.unwrap().to_string(), "{1}");
        assert!(f.contains(short.witness.as_ref().unwrap()));
    }

    #[test]
    fn shortcut_rejects_structured_families() {
        let sys = LinearSystem::with_identity_input(DMatrix::identity(4, 4)).unwrap();
        let f = SupportFamily::block(4, 2, 2).unwrap();
        assert!(condition_b(&sys, &f, &policy(), ConditionBStrategy::UnconstrainedShortcut).is_err());
    }

    #[test]
    fn exhaustive_capacity_guard() {
        let sys = LinearSystem::with_identity_input(DMatrix::identity(60, 60)).unwrap();
        let f = SupportFamily::unconstrained(60, 10).unwrap();
        assert!(matches!(
            condition_b(&sys, &f, &policy(), ConditionBStrategy::Exhaustive),
            Err(CoreError::Capacity(_))
        ));
    }

    #[test]
    fn sampled_negative_is_inconclusive() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(5, 5)).unwrap();
        let f = SupportFamily::unconstrained(5, 2).unwrap();
        let b = condition_b(&sys, &f, &policy(), ConditionBStrategy::Sampled { draws: 20, seed: 1 }).unwrap();
        assert!(!b.holds && b.inconclusive);
        let sys = LinearSystem::with_identity_input(DMatrix::identity(5, 5)).unwrap();
        let b = condition_b(&sys, &f, &policy(), ConditionBStrategy::Sampled { draws: 20, seed: 1 }).unwrap();
        assert!(b.holds && !b.inconclusive);
    }

    #[test]
    fn full_budget_is_always_controllable() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(3, 3)).unwrap();
        let f = SupportFamily::unconstrained(3, 3).unwrap();
        let v = is_sparse_controllable(&sys, &f, &policy(), ConditionBStrategy::Auto).unwrap();
        assert!(v.controllable);
        assert_eq!(v.witness.unwrap().to_string(), "{1,2,3}");
    }

    #[test]
    fn zero_dynamics_single_input_not_controllable() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(3, 3)).unwrap();
        let f = SupportFamily::unconstrained(3, 1).unwrap();
        let v = is_sparse_controllable(&sys, &f, &policy(), ConditionBStrategy::Auto).unwrap();
        assert!(!v.controllable && v.cond_a && !v.cond_b);
    }

    #[test]
    fn brute_force_examples() {
        let f = SupportFamily::unconstrained(2, 2).unwrap();
        let sys = LinearSystem::with_identity_input(dmatrix![0.3, 0.1; 0.2, 0.5]).unwrap();
        assert!(brute_force_controllable(&sys, &f, Some(1), &policy()).unwrap());

        let sys = LinearSystem::with_identity_input(DMatrix::zeros(3, 3)).unwrap();
        let f = SupportFamily::unconstrained(3, 2).unwrap();
        assert!(!brute_force_controllable(&sys, &f, None, &policy()).unwrap());

        let swap = LinearSystem::with_identity_input(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        let f = SupportFamily::unconstrained(2, 1).unwrap();
        assert!(!brute_force_controllable(&swap, &f, Some(1), &policy()).unwrap());
        assert!(brute_force_controllable(&swap, &f, Some(2), &policy()).unwrap());
    }

    #[test]
    fn brute_force_guard() {
        let sys = LinearSystem::with_identity_input(DMatrix::zeros(8, 8)).unwrap();
        let f = SupportFamily::unconstrained(8, 1).unwrap();
        assert!(matches!(
            brute_force_controllable(&sys, &f, None, &policy()),
            Err(CoreError::Capacity(_))
        ));
    }

    #[test]
    fn general_input_matrix() {
        // Ψ = [e1 + e2, e2]: with budget 1, only the first column reaches both states
        let phi = dmatrix![2.0, 0.0; 0.0, 3.0];
        let psi = dmatrix![1.0, 0.0; 1.0, 1.0];
        let sys = LinearSystem::new(phi, psi).unwrap();
        let f = SupportFamily::explicit(2, 1, vec![Support::new(vec![0], 2).unwrap()]).unwrap();
        let v = is_sparse_controllable(&sys, &f, &policy(), ConditionBStrategy::Exhaustive).unwrap();
        assert!(v.controllable);
        assert!(brute_force_controllable(&sys, &f, None, &policy()).unwrap());
        let f = SupportFamily::explicit(2, 1, vec![Support::new(vec![1], 2).unwrap()]).unwrap();
        let v = is_sparse_controllable(&sys, &f, &policy(), ConditionBStrategy::Exhaustive).unwrap();
        assert!(!v.controllable && !v.cond_a);
        assert!(!brute_force_controllable(&sys, &f, None, &policy()).unwrap());
    }

    #[test]
    fn strategy_text() {
        for s in ["auto", "exhaustive", "unconstrained-shortcut", "sampled:50:3"] {
            let parsed: ConditionBStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert_eq!(
            "sampled:7".parse::<ConditionBStrategy>().unwrap(),
            ConditionBStrategy::Sampled { draws: 7, seed: 0 }
        );
        assert!("bogus".parse::<ConditionBStrategy>().is_err());
    }
}
