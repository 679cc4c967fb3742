//! Dense linear-algebra helpers shared by the controllability tests and the
//! input-design solver: SVD-thresholded rank, spectra of nonsymmetric
//! matrices, orthonormal bases and least squares.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

const SVD_MAX_ITER: usize = 10_000;
/// Convergence tolerance handed to nalgebra's iterative decompositions. Its
/// own default is `5ε`; with plain `ε` the SVD can stop with a wrong `U`.
pub(crate) const DECOMP_EPS: f64 = 5.0 * f64::EPSILON;

/// How singular values are turned into a rank.
///
/// The threshold is `factor * sigma_max`; when `factor` is `None` the factor is
/// `max(rows, cols) * f64::EPSILON`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RankPolicy {
    pub factor: Option<f64>,
}

impl RankPolicy {
    pub fn relative(factor: f64) -> Self {
        RankPolicy {
            factor: Some(factor),
        }
    }

    pub fn factor_for(&self, nrows: usize, ncols: usize) -> f64 {
        self.factor
            .unwrap_or_else(|| nrows.max(ncols) as f64 * f64::EPSILON)
    }

    pub fn threshold(&self, sigma_max: f64, nrows: usize, ncols: usize) -> f64 {
        self.factor_for(nrows, ncols) * sigma_max
    }
}

/// Outcome of a thresholded rank computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub threshold: f64,
    pub sigma_max: f64,
    /// Smallest singular value (the `min(rows, cols)`-th one).
    pub sigma_min: f64,
}

pub fn singular_values<T>(m: &DMatrix<T>) -> Result<Vec<f64>>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, DECOMP_EPS, SVD_MAX_ITER)
        .ok_or_else(|| {
            CoreError::Numerical(format!(
                "SVD did not converge on a {}x{} matrix (max |entry| = {:e})",
                m.nrows(),
                m.ncols(),
                m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
            ))
        })?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

pub fn rank_report<T>(m: &DMatrix<T>, policy: &RankPolicy) -> Result<RankReport>
where
    T: ComplexField<RealField = f64>,
{
    let sv = singular_values(m)?;
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_min = sv.last().copied().unwrap_or(0.0);
    let threshold = policy.threshold(sigma_max, m.nrows(), m.ncols());
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok(RankReport {
        rank,
        threshold,
        sigma_max,
        sigma_min,
    })
}

/// Rank by singular-value thresholding. Works for real and complex matrices.
pub fn numeric_rank<T>(m: &DMatrix<T>, policy: &RankPolicy) -> Result<usize>
where
    T: ComplexField<RealField = f64>,
{
    Ok(rank_report(m, policy)?.rank)
}

/// Orthonormal basis of the column space, one column per retained singular value.
pub fn column_space_basis(m: &DMatrix<f64>, policy: &RankPolicy) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let svd = m
        .clone()
        .try_svd(true, false, DECOMP_EPS, SVD_MAX_ITER)
        .ok_or_else(|| CoreError::Numerical("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = policy.threshold(sigma_max, m.nrows(), m.ncols());
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])]))
}

/// Eigenvalues of a real square matrix via the real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !m.is_square() {
        return Err(CoreError::param("eigenvalues need a square matrix"));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let n = m.nrows();
    let max_iter = 1000 * n.max(10);
    // QR iterations can stall on permutation-like matrices; an orthogonal
    // similarity by a fixed Householder reflector breaks the symmetry.
    for attempt in 0..4usize {
        let a = if attempt == 0 {
            m.clone()
        } else {
            let v = DVector::from_fn(n, |i, _| ((attempt * (i + 1)) as f64).cos() + 0.5).normalize();
            let h = DMatrix::identity(n, n) - 2.0 * &v * v.transpose();
            &h * m * &h
        };
        if let Some(schur) = Schur::try_new(a, DECOMP_EPS, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(CoreError::Numerical(format!(
        "Schur decomposition did not converge on a {n}x{n} matrix"
    )))
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>, policy: &RankPolicy) -> Result<DVector<f64>> {
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    let svd = a
        .clone()
        .try_svd(true, true, DECOMP_EPS, SVD_MAX_ITER)
        .ok_or_else(|| CoreError::Numerical("SVD did not converge".into()))?;
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = policy.threshold(sigma_max, a.nrows(), a.ncols());
    svd.solve(b, eps)
        .map_err(|e| CoreError::Numerical(e.to_string()))
}

/// Greedy cluster of eigenvalues: each value joins the first representative
/// within `tol`, otherwise it starts a new cluster.
pub fn cluster_eigenvalues(values: &[Complex<f64>], tol: f64) -> Vec<Complex<f64>> {
    let mut reps: Vec<Complex<f64>> = Vec::new();
    for &v in values {
        if !reps.iter().any(|r| (r - v).norm() <= tol) {
            reps.push(v);
        }
    }
    reps
}

/// Centroids of near-coincident eigenvalue groups.
///
/// A defective eigenvalue of an `k`-dimensional Jordan block is returned by the
/// eigensolver as `k` points spread over a circle of radius about
/// `(ε·scale)^(1/k)`; their mean recovers it to working precision. Groups are
/// formed by single linkage at tolerances `base·10^j` up to `ε^(1/n)·scale`,
/// and the centroid of every group with two or more members is returned.
pub fn defective_centroids(values: &[Complex<f64>], base: f64, scale: f64) -> Vec<Complex<f64>> {
    let n = values.len();
    if n < 2 {
        return Vec::new();
    }
    let ceiling = f64::EPSILON.powf(1.0 / n as f64) * scale.max(1.0);
    let mut out: Vec<Complex<f64>> = Vec::new();
    let mut tol = base;
    while tol <= ceiling * 10.0 {
        for group in single_linkage(values, tol) {
            if group.len() < 2 {
                continue;
            }
            let c = group.iter().map(|&i| values[i]).sum::<Complex<f64>>() / group.len() as f64;
            if !out.iter().any(|o| (o - c).norm() <= f64::EPSILON * scale.max(1.0)) {
                out.push(c);
            }
        }
        tol *= 10.0;
    }
    out
}

fn single_linkage(values: &[Complex<f64>], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut label, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rank_of_identity_zero_and_outer_product() {
        let p = RankPolicy::default();
        assert_eq!(numeric_rank(&DMatrix::<f64>::identity(5, 5), &p).unwrap(), 5);
        assert_eq!(numeric_rank(&DMatrix::<f64>::zeros(4, 3), &p).unwrap(), 0);
        let u = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let v = DVector::from_vec(vec![3.0, 1.0, 4.0, 1.5]);
        assert_eq!(numeric_rank(&(&u * v.transpose()), &p).unwrap(), 1);
    }

    #[test]
    fn basis_spans_columns_with_repeated_rows() {
        // rows 0, 1 and 3 coincide; a plain-ε SVD returned a U outside the range
        let m = dmatrix![
            1.0 / 3.0, 0.384_900_179_459_750_5, 0.0;
            1.0 / 3.0, 0.384_900_179_459_750_5, 0.0;
            0.0, 0.577_350_269_189_625_8, 1.0;
            1.0 / 3.0, 0.384_900_179_459_750_5, 0.0
        ];
        let b = column_space_basis(&m, &RankPolicy::relative(1e-10)).unwrap();
        assert_eq!(b.ncols(), 2);
        let residual = &m - &b * (b.transpose() * &m);
        assert!(residual.norm() < 1e-12, "{residual}");
    }

    #[test]
    fn complex_rank() {
        let i = Complex::new(0.0, 1.0);
        let one = Complex::new(1.0, 0.0);
        // second row is i times the first
        let m = DMatrix::from_row_slice(2, 2, &[one, i, i, -one]);
        assert_eq!(numeric_rank(&m, &RankPolicy::default()).unwrap(), 1);
    }

    #[test]
    fn empty_matrix_has_rank_zero() {
        let m = DMatrix::<f64>::zeros(0, 4);
        assert_eq!(numeric_rank(&m, &RankPolicy::default()).unwrap(), 0);
    }

    #[test]
    fn rotation_has_complex_spectrum() {
        let m = dmatrix![0.0, -1.0; 1.0, 0.0];
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - Complex::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn clustering_merges_close_values() {
        let v = [
            Complex::new(1.0, 0.0),
            Complex::new(1.0 + 1e-10, 0.0),
            Complex::new(2.0, 0.0),
        ];
        assert_eq!(cluster_eigenvalues(&v, 1e-8).len(), 2);
    }

    #[test]
    fn basis_is_orthonormal() {
        let m = dmatrix![1.0, 2.0, 3.0; 2.0, 4.0, 6.0; 0.0, 1.0, 1.0];
        let b = column_space_basis(&m, &RankPolicy::default()).unwrap();
        assert_eq!(b.ncols(), 2);
        let g = b.transpose() * &b;
        assert!((g - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = dmatrix![2.0, 0.0; 0.0, 3.0; 1.0, 1.0];
        let x = DVector::from_vec(vec![1.5, -2.0]);
        let b = &a * &x;
        let got = least_squares(&a, &b, &RankPolicy::default()).unwrap();
        assert!((got - x).norm() < 1e-12);
    }
}
