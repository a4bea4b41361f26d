//! Symmetric-matrix numerics.
//!
//! Everything in the simulator that is a covariance, a cost matrix or a
//! relaxed projection lives in [`SymMatrix`]; the positive semidefinite ones
//! are wrapped in [`Covariance`]. The interesting primitive here is
//! [`project_interval`], the Frobenius projection onto the order interval
//! `{S : O <= S <= sigma0}`, computed with Dykstra's alternating projections.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues at or above this are treated as nonnegative.
pub const PSD_TOL: f64 = 1e-9;

/// Default relative rank cutoff for [`pinv`].
pub const PINV_RANK_TOL: f64 = 1e-10;

/// Default Dykstra stopping tolerance (Frobenius distance between iterates).
pub const DYKSTRA_TOL: f64 = 1e-10;
pub const DYKSTRA_MAX_ITER: usize = 10_000;

/// Dense real symmetric matrix.
#[derive(Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates squareness and finiteness, then symmetrizes.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self::symmetrize(m))
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn scalar(value: f64) -> Self {
        Self(DMatrix::from_element(1, 1, value))
    }

    /// Symmetric part of a square matrix, without validation.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product `Tr(self * other)`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    /// `A * self * A^T`, symmetrized.
    pub fn congruence(&self, a: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrize(a * &self.0 * a.transpose())
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().iter().copied().collect()
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix{}", self.0)
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix(-&self.0)
    }
}

/// Numerically positive semidefinite symmetric matrix.
#[derive(Clone, PartialEq)]
pub struct Covariance(SymMatrix);

impl Covariance {
    pub fn new(base: SymMatrix) -> Result<Self> {
        let min = eig(&base).min_value();
        if min < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(Self(base))
    }

    pub fn identity(dim: usize) -> Self {
        Self(SymMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(SymMatrix::zeros(dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::from_diagonal(diag)?)
    }

    /// Wraps a matrix already known to be PSD up to rounding.
    pub(crate) fn assume_psd(base: SymMatrix) -> Self {
        Self(base)
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn into_sym(self) -> SymMatrix {
        self.0
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.0.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl fmt::Debug for Covariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Covariance{}", self.0.as_matrix())
    }
}

impl From<Covariance> for SymMatrix {
    fn from(c: Covariance) -> Self {
        c.0
    }
}

/// `A = vectors * diag(values) * vectors^T`, values in descending order.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenPair {
    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `U f(Λ) U^T` for a scalar map `f` applied to the spectrum.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let mapped = self.values.map(&mut f);
        let scaled = &self.vectors * DMatrix::from_diagonal(&mapped);
        SymMatrix::symmetrize(scaled * self.vectors.transpose())
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|x| x)
    }
}

/// Symmetric eigendecomposition with a deterministic ordering: descending
/// eigenvalues, each eigenvector's first non-negligible component positive.
pub fn eig(a: &SymMatrix) -> EigenPair {
    let d = a.dim();
    let se = SymmetricEigen::new(a.as_matrix().clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].total_cmp(&se.eigenvalues[i]));

    let mut values = DVector::zeros(d);
    let mut vectors = DMatrix::zeros(d, d);
    for (k, &src) in order.iter().enumerate() {
        values[k] = se.eigenvalues[src];
        let mut col = se.eigenvectors.column(src).into_owned();
        let lead = col.iter().copied().find(|x| x.abs() > 1e-12).unwrap_or(1.0);
        if lead < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    EigenPair { values, vectors }
}

/// Checked variant of [`eig`] for matrices that did not come through
/// [`SymMatrix::new`].
pub fn eig_checked(a: &DMatrix<f64>) -> Result<EigenPair> {
    Ok(eig(&SymMatrix::new(a.clone())?))
}

/// Unique PSD square root.
pub fn psd_sqrt(s: &Covariance) -> Result<Covariance> {
    let e = eig(s.as_sym());
    check_psd(&e)?;
    Ok(Covariance::assume_psd(e.map(|x| x.max(0.0).sqrt())))
}

/// `S^{-1/2}` for a positive definite `S`.
pub fn psd_inv_sqrt(s: &Covariance) -> Result<SymMatrix> {
    let e = eig(s.as_sym());
    check_psd(&e)?;
    if e.min_value() <= PSD_TOL * e.max_value().abs().max(1.0) {
        return Err(Error::SingularPrior);
    }
    Ok(e.map(|x| 1.0 / x.sqrt()))
}

fn check_psd(e: &EigenPair) -> Result<()> {
    if e.min_value() < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min_value(),
        });
    }
    Ok(())
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix. Eigenvalues with
/// `|λ| <= rank_tol * max|λ|` are treated as zero.
pub fn pinv(a: &SymMatrix, rank_tol: f64) -> SymMatrix {
    let e = eig(a);
    let largest = e.values.amax();
    if largest == 0.0 {
        return SymMatrix::zeros(a.dim());
    }
    let cutoff = rank_tol * largest;
    e.map(|x| if x.abs() <= cutoff { 0.0 } else { 1.0 / x })
}

/// Eigenvalue clipping onto the PSD cone.
pub fn clip_psd(x: &SymMatrix) -> SymMatrix {
    eig(x).map(|v| v.max(0.0))
}

/// Largest violation of `O <= x <= sigma0`, as a nonnegative number.
pub fn interval_violation(x: &SymMatrix, sigma0: &Covariance) -> f64 {
    let low = -eig(x).min_value();
    let high = -eig(&(sigma0.as_sym() - x)).min_value();
    low.max(high).max(0.0)
}

/// Result of [`dykstra`], including diagnostics.
#[derive(Clone, Debug)]
pub struct DykstraOutcome {
    pub point: Covariance,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Dykstra's alternating projections between the PSD cone and
/// `{S : S <= sigma0}`. Stops once successive iterates (and the two half
/// steps) are within `tol` in Frobenius norm.
pub fn dykstra(x: &SymMatrix, sigma0: &Covariance, tol: f64, max_iter: usize) -> DykstraOutcome {
    let s0 = sigma0.as_sym();
    let mut cur = x.clone();
    let mut p = SymMatrix::zeros(x.dim());
    let mut q = SymMatrix::zeros(x.dim());
    let mut residual = f64::INFINITY;

    for it in 1..=max_iter {
        // PSD cone step.
        let shifted = &cur + &p;
        let y = clip_psd(&shifted);
        p = &shifted - &y;
        // Upper-bound step: sigma0 - clip(sigma0 - z).
        let shifted = &y + &q;
        let next = s0 - &clip_psd(&(s0 - &shifted));
        q = &shifted - &next;

        residual = (&next - &cur)
            .frobenius_norm()
            .max((&y - &next).frobenius_norm());
        cur = next;
        if residual <= tol {
            return DykstraOutcome {
                point: Covariance::assume_psd(cur),
                iterations: it,
                residual,
                converged: true,
            };
        }
    }
    DykstraOutcome {
        point: Covariance::assume_psd(cur),
        iterations: max_iter,
        residual,
        converged: false,
    }
}

/// Frobenius projection onto `{S : O <= S <= sigma0}`.
pub fn project_interval(
    x: &SymMatrix,
    sigma0: &Covariance,
    tol: f64,
    max_iter: usize,
) -> Result<Covariance> {
    if x.dim() != sigma0.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            x.dim(),
            sigma0.dim()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let out = dykstra(x, sigma0, tol, max_iter);
    if !out.converged {
        return Err(Error::NoConvergence {
            what: "interval projection",
            iterations: out.iterations,
            residual: out.residual,
        });
    }
    Ok(out.point)
}

/// [`project_interval`] with the default tolerance and iteration cap.
pub fn project_interval_default(x: &SymMatrix, sigma0: &Covariance) -> Result<Covariance> {
    project_interval(x, sigma0, DYKSTRA_TOL, DYKSTRA_MAX_ITER)
}

/// Uniform draw from the unit Frobenius sphere of `d x d` symmetric matrices.
pub fn sample_unit_sphere_sym<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SymMatrix {
    let mut m = DMatrix::zeros(d, d);
    loop {
        for i in 0..d {
            m[(i, i)] = rng.sample::<f64, _>(StandardNormal);
            for j in (i + 1)..d {
                let v = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let norm = m.norm();
        if norm > 0.0 {
            return SymMatrix(m / norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        SymMatrix::symmetrize(m)
    }

    fn random_psd(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> Covariance {
        let a = DMatrix::from_fn(d, rank, |_, _| rng.random_range(-1.0..1.0));
        Covariance::assume_psd(SymMatrix::symmetrize(&a * a.transpose()))
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = eig(&SymMatrix::identity(2));
        assert_eq!(e.values.as_slice(), &[1.0, 1.0]);
        let ut_u = e.vectors.transpose() * &e.vectors;
        assert!((ut_u - DMatrix::identity(2, 2)).norm() < 1e-12);

        let e = eig(&SymMatrix::from_diagonal(&[1.0, 3.0]).unwrap());
        assert_eq!(e.values.as_slice(), &[3.0, 1.0]);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((&e.vectors - expected).norm() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = random_sym(4, &mut rng);
            let e = eig(&a);
            let err = (e.reconstruct().as_matrix() - a.as_matrix()).norm();
            assert!(err <= 1e-8 * a.frobenius_norm());
            let orth = (e.vectors.transpose() * &e.vectors - DMatrix::identity(4, 4)).norm();
            assert!(orth <= 1e-10);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_sign_convention_is_deterministic() {
        let a = SymMatrix::from_row_slice(2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
        let e = eig(&a);
        for k in 0..2 {
            let lead = e
                .vectors
                .column(k)
                .iter()
                .copied()
                .find(|x| x.abs() > 1e-12)
                .unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, 0.0, 1.0]);
        assert!(matches!(SymMatrix::new(m), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn sqrt_cases() {
        let r = psd_sqrt(&Covariance::identity(3)).unwrap();
        assert!(r.as_sym().max_abs_diff(&SymMatrix::identity(3)) < 1e-14);
        let r = psd_sqrt(&Covariance::from_diagonal(&[4.0, 9.0]).unwrap()).unwrap();
        assert!(
            r.as_sym()
                .max_abs_diff(&SymMatrix::from_diagonal(&[2.0, 3.0]).unwrap())
                < 1e-14
        );

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = random_psd(4, 4, &mut rng);
            let r = psd_sqrt(&s).unwrap();
            let sq = r.as_matrix() * r.as_matrix();
            assert!((sq - s.as_matrix()).norm() <= 1e-8 * s.as_sym().frobenius_norm());
            assert!(eig(r.as_sym()).min_value() >= -PSD_TOL);
        }
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let s = Covariance::assume_psd(SymMatrix::from_diagonal(&[1.0, -0.1]).unwrap());
        assert!(matches!(psd_sqrt(&s), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pinv_cases() {
        let p = pinv(
            &SymMatrix::from_diagonal(&[2.0, 0.0]).unwrap(),
            PINV_RANK_TOL,
        );
        assert!(p.max_abs_diff(&SymMatrix::from_diagonal(&[0.5, 0.0]).unwrap()) < 1e-15);
        assert_eq!(
            pinv(&SymMatrix::zeros(3), PINV_RANK_TOL),
            SymMatrix::zeros(3)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_sym(4, &mut rng);
            let inv = a.as_matrix().clone().lu().try_inverse().unwrap();
            let p = pinv(&a, PINV_RANK_TOL);
            assert!((p.as_matrix() - &inv).amax() <= 1e-8 * inv.amax().max(1.0));
        }
    }

    #[test]
    fn pinv_moore_penrose_identities_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let a = DMatrix::from_fn(5, 2, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(5, 2, |_, _| rng.random_range(-1.0..1.0));
            // symmetric, indefinite, rank 4
            let m = SymMatrix::symmetrize(&a * a.transpose() - &b * b.transpose());
            let x = pinv(&m, PINV_RANK_TOL);
            let (a, x) = (m.as_matrix(), x.as_matrix());
            assert!((a * x * a - a).amax() < 1e-7);
            assert!((x * a * x - x).amax() < 1e-7);
            assert!(((a * x).transpose() - a * x).amax() < 1e-7);
            assert!(((x * a).transpose() - x * a).amax() < 1e-7);
        }
    }

    #[test]
    fn projection_scalar_clipping() {
        let s0 = Covariance::from_diagonal(&[2.0]).unwrap();
        let p = project_interval_default(&SymMatrix::scalar(3.0), &s0).unwrap();
        assert!((p.as_sym().get(0, 0) - 2.0).abs() < 1e-12);
        let p = project_interval_default(&SymMatrix::scalar(-1.0), &s0).unwrap();
        assert!(p.as_sym().get(0, 0).abs() < 1e-12);
    }

    #[test]
    fn projection_fixes_feasible_points() {
        let s0 = Covariance::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let x =
            SymMatrix::from_row_slice(3, &[0.5, 0.1, 0.0, 0.1, 1.0, 0.2, 0.0, 0.2, 1.5]).unwrap();
        assert_eq!(interval_violation(&x, &s0), 0.0);
        let p = project_interval_default(&x, &s0).unwrap();
        assert!(p.as_sym().max_abs_diff(&x) < 1e-12);
    }

    #[test]
    fn projection_commuting_case_matches_eigen_clip() {
        // X and sigma0 share the eigenbasis of a random rotation.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let basis = eig(&random_sym(3, &mut rng)).vectors;
            let s0_eigs = [0.5, 1.5, 3.0];
            let x_eigs: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..4.0)).collect();
            let build = |vals: &[f64]| {
                SymMatrix::symmetrize(
                    &basis
                        * DMatrix::from_diagonal(&DVector::from_column_slice(vals))
                        * basis.transpose(),
                )
            };
            let s0 = Covariance::assume_psd(build(&s0_eigs));
            let clipped: Vec<f64> = x_eigs
                .iter()
                .zip(s0_eigs)
                .map(|(x, hi)| x.clamp(0.0, hi))
                .collect();
            let p = project_interval_default(&build(&x_eigs), &s0).unwrap();
            assert!(p.as_sym().max_abs_diff(&build(&clipped)) < 1e-8);
        }
    }

    #[test]
    fn projection_membership_idempotence_and_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            // condition number stays below ~100; see the ill-conditioned test below
            let s0 = Covariance::assume_psd(
                random_psd(3, 3, &mut rng).as_sym() + &(&SymMatrix::identity(3) * 0.05),
            );
            let x = &random_sym(3, &mut rng) * 3.0;
            let p = project_interval_default(&x, &s0).unwrap();
            assert!(interval_violation(p.as_sym(), &s0) <= 1e-8);
            let pp = project_interval_default(p.as_sym(), &s0).unwrap();
            assert!((pp.as_sym() - p.as_sym()).frobenius_norm() <= 2.0 * DYKSTRA_TOL + 1e-12);
            let dist = (&x - p.as_sym()).frobenius_norm();
            let s0_sqrt = psd_sqrt(&s0).unwrap();
            for _ in 0..50 {
                // random feasible Z = sigma0^{1/2} T sigma0^{1/2}, O <= T <= I
                let basis = eig(&random_sym(3, &mut rng));
                let t = basis.map(|_| rng.random_range(0.0..1.0));
                let z = t.congruence(s0_sqrt.as_matrix());
                assert!(dist <= (&x - &z).frobenius_norm() + 1e-6);
            }
        }
    }

    #[test]
    fn projection_ill_conditioned_prior_needs_more_iterations() {
        // smallest eigenvalue ~1e-3: alternating projections crawl
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..6 {
            let s0 = random_psd(3, 3, &mut rng);
            let x = &random_sym(3, &mut rng) * 3.0;
            for _ in 0..50 {
                let basis = eig(&random_sym(3, &mut rng));
                let _ = basis.map(|_| rng.random_range(0.0..1.0));
            }
            let out = dykstra(&x, &s0, DYKSTRA_TOL, 200_000);
            assert!(out.converged);
            assert!(interval_violation(out.point.as_sym(), &s0) <= 1e-8);
        }
    }

    #[test]
    fn projection_rejects_bad_tolerance() {
        let s0 = Covariance::identity(2);
        assert!(project_interval(&SymMatrix::identity(2), &s0, 0.0, 10).is_err());
    }

    #[test]
    fn sphere_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let u = sample_unit_sphere_sym(1, &mut rng);
            assert!((u.get(0, 0).abs() - 1.0).abs() < 1e-15);
            let u = sample_unit_sphere_sym(3, &mut rng);
            assert!((u.frobenius_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_is_centered() {
        // Each coordinate of a uniform point on the sphere has mean zero.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        let mut sum = [0.0f64; 3];
        let mut sumsq = [0.0f64; 3];
        for _ in 0..n {
            let u = sample_unit_sphere_sym(2, &mut rng);
            for (k, v) in [u.get(0, 0), u.get(0, 1), u.get(1, 1)]
                .into_iter()
                .enumerate()
            {
                sum[k] += v;
                sumsq[k] += v * v;
            }
        }
        for k in 0..3 {
            let mean = sum[k] / n as f64;
            let se = ((sumsq[k] / n as f64 - mean * mean) / n as f64).sqrt();
            assert!(
                mean.abs() <= 3.0 * se,
                "coordinate {k}: mean {mean}, se {se}"
            );
        }
    }
}
