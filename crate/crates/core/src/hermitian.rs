//! Dense Hermitian linear algebra: eigendecomposition, spectral projectors,
//! operator norms, polar decomposition and angles between subspaces.
//!
//! Scalars are always complex. Real symmetric data is embedded with zero
//! imaginary part.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance on eigen-residuals and orthonormality.
pub const TOL_EIG: f64 = 1e-10;
/// Relative distance (in units of `‖H‖`) an eigenvalue must keep from an
/// open-interval endpoint to be classified unambiguously.
pub const TOL_EDGE: f64 = 1e-9;
/// Relative asymmetry tolerated on input.
pub const TOL_HERMITIAN: f64 = 1e-12;

/// Embed a real matrix as a complex one.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest singular value. Empty and zero matrices have norm zero.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 || max_abs_entry(m) == 0.0 {
        return 0.0;
    }
    // Column and row vectors: the Euclidean norm is exact and cheaper.
    if m.ncols() == 1 || m.nrows() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    m.singular_values().max()
}

pub fn op_norm_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b))
}

/// A dense self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermitian symmetry to `1e-12·max|entry|` and stores the
    /// exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: "n >= 1".into(),
                actual: "n = 0".into(),
            });
        }
        let scale = max_abs_entry(&m);
        let asymmetry = max_abs_entry(&(&m - m.adjoint()));
        let tolerance = TOL_HERMITIAN * scale;
        if asymmetry > tolerance {
            return Err(Error::NonHermitianInput {
                asymmetry,
                tolerance,
            });
        }
        let sym = (&m + m.adjoint()).map(|z| z * 0.5);
        Ok(Self { m: sym })
    }

    /// `(M + Mᴴ)/2` without a symmetry check, for matrices that are
    /// Hermitian up to rounding by construction.
    pub fn hermitian_part(m: CMatrix) -> Self {
        let sym = (&m + m.adjoint()).map(|z| z * 0.5);
        Self { m: sym }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(complexify(m))
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &x) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn norm(&self) -> f64 {
        op_norm(&self.m)
    }

    /// `self + other`; the sum of Hermitian matrices stays Hermitian.
    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            m: &self.m + &other.m,
        })
    }

    /// `self − c·I`.
    pub fn shifted(&self, c: f64) -> HermitianOperator {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= Complex64::new(c, 0.0);
        }
        Self { m }
    }

    /// `W·H·Wᴴ` for a unitary `W`.
    pub fn conjugated(&self, w: &CMatrix) -> Result<HermitianOperator> {
        check_same_dim(self.dim(), w.nrows())?;
        Self::new(w * &self.m * w.adjoint())
    }
}

fn check_same_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected: format!("n = {expected}"),
            actual: format!("n = {actual}"),
        });
    }
    Ok(())
}

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    /// `max|λ|`, i.e. `‖H‖`.
    pub scale: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Columns of `vectors` at the given indices.
    pub fn columns(&self, idx: &[usize]) -> CMatrix {
        let n = self.vectors.nrows();
        CMatrix::from_fn(n, idx.len(), |i, k| self.vectors[(i, idx[k])])
    }

    /// Indices of eigenvalues strictly inside `(lo, hi)`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| self.values[k] > lo && self.values[k] < hi)
            .collect()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The backend result is checked against the residual and orthonormality
/// invariants; a breach is reported as [`Error::ConvergenceFailure`].
pub fn eigh(h: &HermitianOperator) -> Result<EigenSystem> {
    let n = h.dim();
    let eig = SymmetricEigen::try_new(h.matrix().clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| Error::ConvergenceFailure("symmetric eigensolver".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps backend order for ties.
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    let scale = values.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));

    let diag = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    // Frobenius norms bound the operator norms from above.
    let residual = (h.matrix() * &vectors - &vectors * diag).norm();
    let ortho = (vectors.adjoint() * &vectors - identity(n)).norm();
    if !(residual <= TOL_EIG * scale) {
        return Err(Error::ConvergenceFailure(format!(
            "eigen-residual {residual:e} exceeds {:e}",
            TOL_EIG * scale
        )));
    }
    if !(ortho <= TOL_EIG) {
        return Err(Error::ConvergenceFailure(format!(
            "eigenvector orthonormality defect {ortho:e}"
        )));
    }
    Ok(EigenSystem {
        values,
        vectors,
        scale,
    })
}

/// Which eigenvalues a spectral projector collects.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    /// Eigenvalues in the open interval `(lo, hi)`.
    Interval(f64, f64),
    /// Explicit positions in the ascending eigenvalue list.
    Indices(Vec<usize>),
}

/// An orthogonal projector together with its rank.
#[derive(Debug, Clone)]
pub struct Projector {
    pub matrix: CMatrix,
    pub rank: usize,
}

impl Projector {
    /// `Σ b_k b_kᴴ` over the orthonormal columns of `basis`.
    pub fn from_basis(basis: &CMatrix) -> Self {
        Self {
            matrix: basis * basis.adjoint(),
            rank: basis.ncols(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `(‖P² − P‖, ‖Pᴴ − P‖)`.
    pub fn defects(&self) -> (f64, f64) {
        let p = &self.matrix;
        (op_norm(&(p * p - p)), op_norm(&(p.adjoint() - p)))
    }
}

/// Spectral projector onto the eigenvectors picked by `selector`.
pub fn spectral_projector(es: &EigenSystem, selector: &Selector) -> Result<Projector> {
    let idx = match selector {
        Selector::Interval(lo, hi) => {
            let tol = TOL_EDGE * es.scale;
            for &value in &es.values {
                for endpoint in [*lo, *hi] {
                    if (value - endpoint).abs() <= tol {
                        return Err(Error::AmbiguousEdge {
                            value,
                            endpoint,
                            tolerance: tol,
                        });
                    }
                }
            }
            es.indices_in(*lo, *hi)
        }
        Selector::Indices(idx) => {
            if let Some(&bad) = idx.iter().find(|&&k| k >= es.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: format!("index < {}", es.dim()),
                    actual: format!("index {bad}"),
                });
            }
            idx.clone()
        }
    };
    if idx.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(Projector::from_basis(&es.columns(&idx)))
}

/// Norm of `P − Q`, the maximal angle, and the sine spectrum of the
/// operator angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    pub norm_diff: f64,
    pub max_angle: f64,
    /// Singular values of `P − Q`, descending, clipped to `[0, 1]`.
    pub sin_spectrum: Vec<f64>,
}

pub fn subspace_angle(p: &Projector, q: &Projector) -> Result<AngleReport> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("n = {}", p.dim()),
            actual: format!("n = {}", q.dim()),
        });
    }
    // P − Q is Hermitian: its singular values are the moduli of its
    // eigenvalues, and Q − P has the same moduli.
    let es = eigh(&HermitianOperator::hermitian_part(&p.matrix - &q.matrix))?;
    let mut sin_spectrum: Vec<f64> = es.values.iter().map(|x| x.abs().min(1.0)).collect();
    sin_spectrum.sort_by(|a, b| b.total_cmp(a));
    let norm_diff = sin_spectrum.first().copied().unwrap_or(0.0);
    Ok(AngleReport {
        norm_diff,
        max_angle: norm_diff.asin(),
        sin_spectrum,
    })
}

/// Polar decomposition `X = U·|X|` with `U` vanishing on `Ker(X)`.
#[derive(Debug, Clone)]
pub struct PolarParts {
    /// Partial isometry, same shape as `X`.
    pub isometry: CMatrix,
    /// `|X| = (XᴴX)^{1/2}`, square on the domain space.
    pub absval: CMatrix,
    /// Singular values of `X`, descending.
    pub singular_values: Vec<f64>,
}

/// Polar decomposition from the thin SVD of `X`.
///
/// Singular values at or below `max(m,n)·ε·σ_max` are treated as zero, so
/// their directions belong to the kernel where `U` vanishes.
pub fn polar_decompose(x: &CMatrix) -> Result<PolarParts> {
    let (m, n) = x.shape();
    if m == 0 || n == 0 || max_abs_entry(x) == 0.0 {
        return Ok(PolarParts {
            isometry: CMatrix::zeros(m, n),
            absval: CMatrix::zeros(n, n),
            singular_values: vec![0.0; m.min(n)],
        });
    }
    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("SVD".into()))?;
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let k = svd.singular_values.len();
    let sigma_max = svd.singular_values.max();
    let cutoff = (m.max(n) as f64) * f64::EPSILON * sigma_max;

    let mut isometry = CMatrix::zeros(m, n);
    let mut absval = CMatrix::zeros(n, n);
    for i in 0..k {
        let s = svd.singular_values[i];
        // z_i is the i-th right singular vector: row i of Vᴴ, conjugated.
        let z = v_t.row(i).adjoint();
        let w = u.column(i);
        absval += (&z * z.adjoint()).map(|c| c * s);
        if s > cutoff {
            isometry += w * z.adjoint();
        }
    }
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(PolarParts {
        isometry,
        absval,
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian, random_matrix, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eigh_sorts_diagonal_input() {
        let es = eigh(&HermitianOperator::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0]);
        // permutation eigenvectors
        for (k, row) in [1usize, 2, 0].iter().enumerate() {
            assert!((es.vectors[(*row, k)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_two_by_two_closed_form() {
        let h =
            HermitianOperator::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, -1.0]))
                .unwrap();
        let es = eigh(&h).unwrap();
        let s2 = 2f64.sqrt();
        assert!((es.values[0] - (-1.0 - s2) / 2.0).abs() < 1e-14);
        assert!((es.values[1] - (-1.0 + s2) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_random_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 8);
            let es = eigh(&h).unwrap();
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                8,
                es.values.iter().map(|&x| c(x)),
            ));
            let res = op_norm(&(h.matrix() * &es.vectors - &es.vectors * d));
            assert!(res <= TOL_EIG * h.norm());
            assert!(op_norm(&(es.vectors.adjoint() * &es.vectors - identity(8))) <= 1e-10);
            assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = complexify(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn projector_on_diagonal() {
        let es = eigh(&HermitianOperator::from_diagonal(&[0.0, -1.0, 1.0])).unwrap();
        let p = spectral_projector(&es, &Selector::Interval(-1.0 + 1e-6, 1.0 - 1e-6)).unwrap();
        assert_eq!(p.rank, 1);
        let mut expected = CMatrix::zeros(3, 3);
        expected[(0, 0)] = c(1.0);
        assert!(op_norm_diff(&p.matrix, &expected) < 1e-14);

        let all = spectral_projector(&es, &Selector::Interval(-2.0, 2.0)).unwrap();
        assert!(op_norm_diff(&all.matrix, &identity(3)) < 1e-14);
        assert_eq!(all.rank, 3);
    }

    #[test]
    fn projector_edge_and_empty_errors() {
        let es = eigh(&HermitianOperator::from_diagonal(&[0.0, -1.0, 1.0])).unwrap();
        assert!(matches!(
            spectral_projector(&es, &Selector::Interval(-1.0, 1.0)),
            Err(Error::AmbiguousEdge { .. })
        ));
        assert!(matches!(
            spectral_projector(&es, &Selector::Interval(0.2, 0.8)),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn projector_invariants_on_random_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 7);
        let es = eigh(&h).unwrap();
        let p = spectral_projector(&es, &Selector::Indices(vec![0, 2, 5])).unwrap();
        let (idem, herm) = p.defects();
        assert!(idem <= 1e-10);
        assert!(herm <= 1e-12);
        assert!((p.trace() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn angle_identity_and_rotation() {
        let e1 = CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let p = Projector::from_basis(&e1);
        let same = subspace_angle(&p, &p).unwrap();
        assert_eq!(same.norm_diff, 0.0);
        assert_eq!(same.max_angle, 0.0);

        let theta = std::f64::consts::PI / 6.0;
        let rot = CMatrix::from_column_slice(2, 1, &[c(theta.cos()), c(theta.sin())]);
        let q = Projector::from_basis(&rot);
        let rep = subspace_angle(&p, &q).unwrap();
        assert!((rep.norm_diff - 0.5).abs() < 1e-14);
        assert!((rep.max_angle - theta).abs() < 1e-14);
        let back = subspace_angle(&q, &p).unwrap();
        assert!((back.norm_diff - rep.norm_diff).abs() < 1e-15);
    }

    #[test]
    fn angle_dimension_mismatch() {
        let p = Projector::from_basis(&identity(2));
        let q = Projector::from_basis(&identity(3));
        assert!(matches!(
            subspace_angle(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polar_of_zero() {
        let parts = polar_decompose(&CMatrix::zeros(3, 2)).unwrap();
        assert_eq!(parts.isometry, CMatrix::zeros(3, 2));
        assert_eq!(parts.absval, CMatrix::zeros(2, 2));
    }

    #[test]
    fn polar_rank_one_column() {
        let t = 2f64.sqrt() - 1.0;
        let x = CMatrix::from_column_slice(2, 1, &[c(t), c(0.0)]);
        let parts = polar_decompose(&x).unwrap();
        assert!((parts.absval[(0, 0)] - c(t)).norm() < 1e-15);
        let u_expected = CMatrix::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        assert!(op_norm_diff(&parts.isometry, &u_expected) < 1e-15);
    }

    #[test]
    fn polar_diagonal_signs() {
        let x = complexify(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]));
        let parts = polar_decompose(&x).unwrap();
        let abs_expected = complexify(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        let u_expected = complexify(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(op_norm_diff(&parts.absval, &abs_expected) < 1e-14);
        assert!(op_norm_diff(&parts.isometry, &u_expected) < 1e-14);
    }

    #[test]
    fn polar_kernel_convention_on_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // rank 2 map from C^4 to C^5
        let x = random_matrix(&mut rng, 5, 2) * random_matrix(&mut rng, 2, 4);
        let parts = polar_decompose(&x).unwrap();
        let es = eigh(&HermitianOperator::new(parts.absval.clone()).unwrap()).unwrap();
        let scale = op_norm(&x);
        for k in 0..4 {
            let col = es.vectors.columns(k, 1).into_owned();
            let image = &parts.isometry * &col;
            if es.values[k] > 1e-8 * scale {
                assert!((op_norm(&image) - 1.0).abs() < 1e-10);
            } else {
                assert!(op_norm(&image) < 1e-10);
            }
        }
        assert!(op_norm_diff(&(&parts.isometry * &parts.absval), &x) <= 1e-10 * scale);
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(op_norm(&CMatrix::zeros(3, 4)), 0.0);
        let d = complexify(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -4.0]));
        assert!((op_norm(&d) - 4.0).abs() < 1e-14);
        let col = CMatrix::from_column_slice(2, 1, &[c(3.0), c(4.0)]);
        assert!((op_norm(&col) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_invariance_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 6, 6);
            let w = random_unitary(&mut rng, 6);
            let a = op_norm(&m);
            let b = op_norm(&(w.adjoint() * &m * &w));
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }
}
