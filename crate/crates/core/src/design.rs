//! Steering `x_k = Φ x_{k-1} + u_k` from `x_0` to `x_f` in `K` steps with
//! inputs whose supports are admissible.
//!
//! The terminal state is `Φ^K x_0 + Σ_k Φ^{K-k} u_k`, so the inputs solve the
//! stacked system `[Φ^{K-1}, …, Φ, I] ũ = x_f − Φ^K x_0` with `ũ` made of `K`
//! blocks, each supported on a member of the family. The solver is an
//! orthogonal greedy pursuit restricted to columns that keep every block's
//! support extendable to a member.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::{is_sparse_controllable, ConditionBStrategy, ControllabilityVerdict, LinearSystem};
use crate::error::{CoreError, Result};
use crate::linalg::{self, RankPolicy};
use crate::sparsity::{Support, SupportFamily};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
/// Relative norm below which a column counts as dependent when screening picks.
const COMPLETION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringProblem {
    pub phi: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub xf: DVector<f64>,
    pub family: SupportFamily,
    /// Number of steps `K`.
    pub horizon: usize,
    /// Absolute tolerance on `‖x_f − x_K‖`.
    pub residual_tol: f64,
    pub policy: RankPolicy,
}

impl SteeringProblem {
    /// Horizon `n`, tolerance [`DEFAULT_RESIDUAL_TOL`].
    pub fn new(phi: DMatrix<f64>, x0: DVector<f64>, xf: DVector<f64>, family: SupportFamily) -> Result<Self> {
        let n = phi.nrows();
        let p = SteeringProblem {
            phi,
            x0,
            xf,
            family,
            horizon: n,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            policy: RankPolicy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_horizon(mut self, k: usize) -> Self {
        self.horizon = k;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.phi.nrows();
        if !self.phi.is_square() || n == 0 {
            return Err(CoreError::param("state matrix must be square and nonempty"));
        }
        if self.x0.len() != n || self.xf.len() != n {
            return Err(CoreError::param(format!(
                "state vectors have lengths {} and {}, expected {n}",
                self.x0.len(),
                self.xf.len()
            )));
        }
        if self.family.n() != n {
            return Err(CoreError::param(format!(
                "family is over {} nodes, system has {n}",
                self.family.n()
            )));
        }
        if self.horizon == 0 {
            return Err(CoreError::param("horizon must be at least 1"));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(CoreError::param("residual tolerance must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPlan {
    /// `u_1, …, u_K`.
    pub inputs: Vec<DVector<f64>>,
    /// `‖x_f − x_K‖` from a forward simulation.
    pub residual_norm: f64,
    /// The member certifying each step.
    pub supports: Vec<Support>,
}

impl ControlPlan {
    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    /// Every `u_k` is supported inside `supports[k]` and that set is a member.
    pub fn satisfies(&self, family: &SupportFamily) -> bool {
        self.inputs.len() == self.supports.len()
            && self.inputs.iter().zip(&self.supports).all(|(u, s)| {
                family.contains(s) && u.iter().enumerate().all(|(i, &v)| v == 0.0 || s.contains(i))
            })
    }
}

/// Why [`design_inputs`] gave up, with the best plan it found.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibleReport {
    pub plan: ControlPlan,
    pub residual_norm: f64,
    /// Verdict of the two-condition test, when it could be computed. A
    /// controllable verdict means the greedy pursuit failed, not the instance.
    pub verdict: Option<ControllabilityVerdict>,
}

#[derive(Debug)]
pub enum DesignError {
    Core(CoreError),
    Infeasible(Box<InfeasibleReport>),
}

impl fmt::Display for DesignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignError::Core(e) => e.fmt(f),
            DesignError::Infeasible(r) => {
                let why = match &r.verdict {
                    Some(v) if v.controllable => "the system is controllable, greedy pursuit fell short",
                    Some(_) => "the system is not sparse-controllable",
                    None => "controllability undetermined",
                };
                write!(f, "no admissible plan reached the target: residual {:e} ({why})", r.residual_norm)
            }
        }
    }
}

impl std::error::Error for DesignError {}

impl From<CoreError> for DesignError {
    fn from(e: CoreError) -> Self {
        DesignError::Core(e)
    }
}

/// `Φ^0, …, Φ^k`.
fn powers(phi: &DMatrix<f64>, k: usize) -> Vec<DMatrix<f64>> {
    let n = phi.nrows();
    let mut out = Vec::with_capacity(k + 1);
    out.push(DMatrix::identity(n, n));
    for j in 1..=k {
        out.push(phi * &out[j - 1]);
    }
    out
}

/// `[Φ^{K-1}, Φ^{K-2}, …, Φ, I]`, an `n × Kn` matrix.
pub fn build_reachability_matrix(phi: &DMatrix<f64>, horizon: usize) -> Result<DMatrix<f64>> {
    if horizon == 0 {
        return Err(CoreError::param("horizon must be at least 1"));
    }
    let n = phi.nrows();
    let pw = powers(phi, horizon - 1);
    let mut r = DMatrix::zeros(n, horizon * n);
    for b in 0..horizon {
        r.view_mut((0, b * n), (n, n)).copy_from(&pw[horizon - 1 - b]);
    }
    Ok(r)
}

/// States `x_0, …, x_K` under the plan's inputs.
pub fn simulate(phi: &DMatrix<f64>, x0: &DVector<f64>, inputs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut traj = Vec::with_capacity(inputs.len() + 1);
    traj.push(x0.clone());
    for u in inputs {
        let next = phi * traj.last().expect("nonempty") + u;
        traj.push(next);
    }
    traj
}

/// Greedy pursuit with least-squares refit.
///
/// Columns are scored by `|⟨d, r⟩| / ‖d‖` against the current residual `r`.
/// Ties go to the earliest step, then the lowest index. Candidates are taken
/// in score order, skipping any after which no admissible completion reaches
/// rank `n`; if every candidate fails that screen the top one is used.
pub fn design_inputs(problem: &SteeringProblem) -> Result<ControlPlan, DesignError> {
    problem.validate()?;
    let n = problem.n();
    let k_steps = problem.horizon;
    let family = &problem.family;
    let pw = powers(&problem.phi, k_steps);
    let b = &problem.xf - &pw[k_steps] * &problem.x0;
    let b_scale = b.norm().max(1.0);

    // column (k, j) of the dictionary is Φ^{K-k} e_j, k = 0-based step
    let column = |k: usize, j: usize| pw[k_steps - 1 - k].column(j).into_owned();
    let norms: Vec<Vec<f64>> = (0..k_steps)
        .map(|k| (0..n).map(|j| pw[k_steps - 1 - k].column(j).norm()).collect())
        .collect();

    let mut partial: Vec<Vec<usize>> = vec![Vec::new(); k_steps];
    let mut selected: Vec<(usize, usize)> = Vec::new();
    let mut coeffs = DVector::zeros(0);
    let mut residual = b.clone();

    while residual.norm() > problem.residual_tol {
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        for k in 0..k_steps {
            for j in 0..n {
                if partial[k].contains(&j) || norms[k][j] <= f64::EPSILON * b_scale {
                    continue;
                }
                let mut trial = partial[k].clone();
                trial.push(j);
                trial.sort_unstable();
                if family.is_extendable(&trial) {
                    let score = column(k, j).dot(&residual).abs() / norms[k][j];
                    candidates.push((k, j, score));
                }
            }
        }
        candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        let mut accepted = None;
        for &(k, j, score) in &candidates {
            if score <= 1e-14 * b_scale {
                break;
            }
            // skip picks that make full rank unreachable, unless none remain
            let mut next = partial.clone();
            next[k].push(j);
            next[k].sort_unstable();
            if can_complete(&pw, family, &selected, (k, j), &next) {
                accepted = Some((k, j));
                break;
            }
            if accepted.is_none() {
                accepted = Some((k, j));
            }
        }
        let Some((k, j)) = accepted else { break };
        selected.push((k, j));
        let dict = DMatrix::from_fn(n, selected.len(), |r, c| {
            let (kk, jj) = selected[c];
            pw[k_steps - 1 - kk][(r, jj)]
        });
        let new_coeffs = linalg::least_squares(&dict, &b, &problem.policy)?;
        let new_residual = &b - &dict * &new_coeffs;
        if new_residual.norm() >= residual.norm() {
            selected.pop();
            break;
        }
        partial[k].push(j);
        partial[k].sort_unstable();
        coeffs = new_coeffs;
        residual = new_residual;
    }

    let mut inputs = vec![DVector::zeros(n); k_steps];
    for (c, &(k, j)) in selected.iter().enumerate() {
        inputs[k][j] = coeffs[c];
    }
    let supports = partial
        .iter()
        .map(|p| {
            family
                .complete(p)
                .ok_or_else(|| CoreError::Numerical(format!("partial support {p:?} lost extendability")))
        })
        .collect::<Result<Vec<_>>>()?;
    let terminal = simulate(&problem.phi, &problem.x0, &inputs)
        .pop()
        .expect("trajectory has x_0");
    let residual_norm = (&problem.xf - terminal).norm();
    let plan = ControlPlan {
        inputs,
        residual_norm,
        supports,
    };
    if residual_norm <= problem.residual_tol {
        return Ok(plan);
    }
    let verdict = LinearSystem::with_identity_input(problem.phi.clone())
        .and_then(|sys| is_sparse_controllable(&sys, family, &problem.policy, ConditionBStrategy::Auto))
        .ok();
    Err(DesignError::Infeasible(Box::new(InfeasibleReport {
        plan,
        residual_norm,
        verdict,
    })))
}

/// Whether the selected columns plus the pick `(k, j)` can still be grown to
/// rank `n` under the partial supports `next`. Completion is greedy, latest
/// step first, with Gram–Schmidt rank updates, so `true` is a certificate
/// and `false` may be pessimistic.
fn can_complete(
    pw: &[DMatrix<f64>],
    family: &SupportFamily,
    selected: &[(usize, usize)],
    pick: (usize, usize),
    next: &[Vec<usize>],
) -> bool {
    let n = family.n();
    let k_steps = next.len();
    let col = |k: usize, j: usize| pw[k_steps - 1 - k].column(j).into_owned();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let absorb = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| {
        let scale = v.norm();
        let mut r = v;
        for _ in 0..2 {
            for q in basis.iter() {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let rn = r.norm();
        if rn > COMPLETION_TOL * scale {
            basis.push(r / rn);
            true
        } else {
            false
        }
    };
    for &(k, j) in selected.iter().chain(std::iter::once(&pick)) {
        absorb(col(k, j), &mut basis);
    }
    let mut slots = next.to_vec();
    for k in (0..k_steps).rev() {
        for j in 0..n {
            if basis.len() == n {
                return true;
            }
            if slots[k].contains(&j) {
                continue;
            }
            let mut trial = slots[k].clone();
            trial.push(j);
            trial.sort_unstable();
            if family.is_extendable(&trial) && absorb(col(k, j), &mut basis) {
                slots[k] = trial;
            }
        }
    }
    basis.len() == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn reachability_matrix_shapes() {
        let phi = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 });
        let r = build_reachability_matrix(&phi, 1).unwrap();
        assert_eq!(r, DMatrix::identity(3, 3));
        let r = build_reachability_matrix(&DMatrix::zeros(3, 3), 3).unwrap();
        assert_eq!(r.ncols(), 9);
        assert!(r.columns(0, 6).iter().all(|&x| x == 0.0));
        assert_eq!(r.columns(6, 3).into_owned(), DMatrix::identity(3, 3));
        let r = build_reachability_matrix(&phi, 2).unwrap();
        assert_eq!(r.columns(0, 3).into_owned(), phi);
        assert!(build_reachability_matrix(&phi, 0).is_err());
    }

    #[test]
    fn zero_dynamics_single_step() {
        let f = SupportFamily::block(4, 2, 2).unwrap();
        let xf = dvector![0.0, 0.0, 1.5, -2.0];
        let p = SteeringProblem::new(DMatrix::zeros(4, 4), DVector::zeros(4), xf.clone(), f.clone()).unwrap();
        let plan = design_inputs(&p).unwrap();
        assert!((&plan.inputs[3] - &xf).norm() < 1e-14);
        assert!(plan.inputs[..3].iter().all(|u| u.iter().all(|&v| v == 0.0)));
        assert!(plan.residual_norm < 1e-14);
        assert!(plan.satisfies(&f));
    }

    #[test]
    fn free_evolution_needs_no_input() {
        let phi = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 0.5 });
        let x0 = dvector![1.0, -1.0, 2.0];
        let xf = &phi * &phi * &x0;
        let f = SupportFamily::unconstrained(3, 1).unwrap();
        let p = SteeringProblem::new(phi, x0, xf, f).unwrap().with_horizon(2);
        let plan = design_inputs(&p).unwrap();
        assert!(plan.inputs.iter().all(|u| u.iter().all(|&v| v == 0.0)));
        assert!(plan.residual_norm <= 1e-12);
    }

    #[test]
    fn simulate_basic_cases() {
        let phi = DMatrix::from_row_slice(2, 2, &[0.2, 0.8, 0.6, 0.4]);
        let x0 = dvector![1.0, 3.0];
        let zeros = vec![DVector::zeros(2); 3];
        let traj = simulate(&phi, &x0, &zeros);
        assert_eq!(traj.len(), 4);
        assert!((&traj[3] - &phi * &phi * &phi * &x0).norm() < 1e-15);
        let u = vec![dvector![1.0, 0.0], dvector![0.0, 2.0]];
        let traj = simulate(&DMatrix::zeros(2, 2), &x0, &u);
        assert_eq!(traj[1], u[0]);
        assert_eq!(traj[2], u[1]);
    }

    #[test]
    fn uncontrollable_instance_reports_verdict() {
        let f = SupportFamily::unconstrained(3, 1).unwrap();
        let p = SteeringProblem::new(DMatrix::zeros(3, 3), DVector::zeros(3), dvector![1.0, 1.0, 0.0], f).unwrap();
        match design_inputs(&p) {
            Err(DesignError::Infeasible(r)) => {
                assert!((r.residual_norm - 1.0).abs() < 1e-12);
                assert!(!r.verdict.unwrap().controllable);
                assert_eq!(r.plan.residual_norm, r.residual_norm);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validation() {
        let f = SupportFamily::unconstrained(3, 1).unwrap();
        assert!(SteeringProblem::new(DMatrix::zeros(3, 3), DVector::zeros(2), DVector::zeros(3), f.clone()).is_err());
        let p = SteeringProblem::new(DMatrix::zeros(3, 3), DVector::zeros(3), DVector::zeros(3), f).unwrap();
        assert!(matches!(design_inputs(&p.with_horizon(0)), Err(DesignError::Core(_))));
    }
}
