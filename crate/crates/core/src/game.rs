//! Static game primitives.
//!
//! A receiver of type `(Q, R)` minimizes `||Q w + R u||^2` and best-responds
//! with `u = -Λ ŵ`, `Λ = (RᵀR)⁻¹RᵀQ`. Substituting that into the sender's
//! quadratic cost leaves an objective that is linear in the error covariance
//! `Σ_e` through the matrix `V`; the smoothed-entropy signaling cost adds a
//! `-ln det(Σ_e + εI)` term that makes it strongly convex.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, Covariance, SymMatrix};

/// Absolute floor on `λ_min(RᵀR)` below which a receiver is singular.
pub const SINGULAR_FLOOR: f64 = 1e-12;

pub const DEFAULT_EPSILON: f64 = 0.01;

pub const ARMIJO_C: f64 = 1e-4;
pub const ARMIJO_SHRINK: f64 = 0.5;
pub const STATIC_MAX_ITER: usize = 50_000;
pub const STATIC_TOL: f64 = 1e-8;

/// Receiver type: cost `||Q w + R u||^2` with `Q` r×d and `R` r×m.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverType {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

/// Bounds every admissible receiver type must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeBounds {
    /// Upper bound on `max(||Q||_F, ||R||_F)`.
    pub kappa: f64,
    /// Lower bound on `λ_min(RᵀR)`.
    pub lambda_min: f64,
}

impl ReceiverType {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != r.nrows() {
            return Err(Error::InvalidInput(format!(
                "Q has {} rows but R has {}",
                q.nrows(),
                r.nrows()
            )));
        }
        if q.is_empty() || r.is_empty() {
            return Err(Error::InvalidInput("empty receiver matrices".into()));
        }
        if q.iter().chain(r.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite receiver entry".into()));
        }
        Ok(Self { q, r })
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn state_dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn action_dim(&self) -> usize {
        self.r.ncols()
    }

    pub fn gram_min_eigenvalue(&self) -> f64 {
        let k = SymMatrix::symmetrize(self.r.transpose() * &self.r);
        matcore::eig(&k).min_value()
    }

    pub fn validate(&self, bounds: &TypeBounds) -> Result<()> {
        let norm = self.q.norm().max(self.r.norm());
        if norm > bounds.kappa * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "max(|Q|_F, |R|_F) = {norm} exceeds kappa = {}",
                bounds.kappa
            )));
        }
        let lmin = self.gram_min_eigenvalue();
        if lmin < bounds.lambda_min * (1.0 - 1e-12) {
            return Err(Error::SingularReceiver {
                min_eigenvalue: lmin,
                floor: bounds.lambda_min,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// `c = -ln det(Σ_e + εI)`.
    EntropySmoothed,
    /// No signaling cost; β is treated as 0.
    None,
}

/// The sender's objective: `(1-β)||Q_s w + R_s u||^2 + β c`.
#[derive(Clone, Debug)]
pub struct SenderSpec {
    pub qs: DMatrix<f64>,
    pub rs: DMatrix<f64>,
    pub beta: f64,
    pub epsilon: f64,
    pub sigma0: Covariance,
    pub cost_kind: CostKind,
}

impl SenderSpec {
    pub fn new(
        qs: DMatrix<f64>,
        rs: DMatrix<f64>,
        beta: f64,
        epsilon: f64,
        sigma0: Covariance,
        cost_kind: CostKind,
    ) -> Result<Self> {
        if qs.nrows() != rs.nrows() {
            return Err(Error::InvalidInput(format!(
                "Q_s has {} rows but R_s has {}",
                qs.nrows(),
                rs.nrows()
            )));
        }
        if qs.ncols() != sigma0.dim() {
            return Err(Error::InvalidInput(format!(
                "Q_s has {} columns but the state dimension is {}",
                qs.ncols(),
                sigma0.dim()
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidInput(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        if cost_kind == CostKind::EntropySmoothed && !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if (0..sigma0.dim()).any(|i| sigma0.as_sym().get(i, i) <= 0.0) {
            return Err(Error::InvalidInput(
                "sigma0 must have a positive diagonal".into(),
            ));
        }
        Ok(Self {
            qs,
            rs,
            beta,
            epsilon,
            sigma0,
            cost_kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }

    /// β actually applied (0 when there is no signaling cost).
    pub fn effective_beta(&self) -> f64 {
        match self.cost_kind {
            CostKind::EntropySmoothed => self.beta,
            CostKind::None => 0.0,
        }
    }

    /// `(1-β)(Tr(Q_sᵀQ_sΣ₀) + Tr(VΣ₀))`: the part of the expected sender
    /// cost against a receiver with matrix `V` that does not depend on `Σ_e`
    /// and that `J` leaves out.
    pub fn cost_offset(&self, v: &SymMatrix) -> f64 {
        let qtq = self.qs.transpose() * &self.qs;
        let s0 = self.sigma0.as_matrix();
        (1.0 - self.effective_beta()) * (qtq.dot(s0) + v.as_matrix().dot(s0))
    }
}

/// Expected sender cost `J(Σ_e) + offset` of committing to `Σ_e`.
pub fn expected_sender_cost(sigma_e: &Covariance, v: &SymMatrix, spec: &SenderSpec) -> Result<f64> {
    Ok(eval_j(sigma_e, v, spec)? + spec.cost_offset(v))
}

/// Sender cost of the polynomial form
/// `aᵀw + bᵀu + c wᵀCᵀCw + d uᵀDᵀDu + e wᵀEᵀEu`.
#[derive(Clone, Debug)]
pub struct PolySenderCost {
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub c: f64,
    pub d_coef: f64,
    pub e_coef: f64,
    pub c_mat: DMatrix<f64>,
    pub d_mat: DMatrix<f64>,
    pub e_mat: DMatrix<f64>,
}

/// `Λ = (RᵀR)⁻¹ RᵀQ` (m×d).
pub fn compute_lambda(theta: &ReceiverType) -> Result<DMatrix<f64>> {
    let gram = theta.r.transpose() * &theta.r;
    let lmin = matcore::eig(&SymMatrix::symmetrize(gram.clone())).min_value();
    let floor = SINGULAR_FLOOR * gram.amax().max(1.0);
    if lmin < floor {
        return Err(Error::SingularReceiver {
            min_eigenvalue: lmin,
            floor,
        });
    }
    let chol = gram.cholesky().ok_or(Error::SingularReceiver {
        min_eigenvalue: lmin,
        floor,
    })?;
    Ok(chol.solve(&(theta.r.transpose() * &theta.q)))
}

/// `V = ΛᵀR_sᵀR_sΛ − ΛᵀR_sᵀQ_s − Q_sᵀR_sΛ`.
pub fn compute_v(theta: &ReceiverType, spec: &SenderSpec) -> Result<SymMatrix> {
    let lambda = compute_lambda(theta)?;
    v_from_lambda(&lambda, spec)
}

pub fn v_from_lambda(lambda: &DMatrix<f64>, spec: &SenderSpec) -> Result<SymMatrix> {
    if spec.rs.ncols() != lambda.nrows() || spec.qs.ncols() != lambda.ncols() {
        return Err(Error::InvalidInput(format!(
            "R_s is {}x{} and Q_s is {}x{} but Λ is {}x{}",
            spec.rs.nrows(),
            spec.rs.ncols(),
            spec.qs.nrows(),
            spec.qs.ncols(),
            lambda.nrows(),
            lambda.ncols()
        )));
    }
    let m = &spec.rs * lambda;
    let cross = m.transpose() * &spec.qs;
    let v = m.transpose() * &m - &cross - cross.transpose();
    Ok(SymMatrix::symmetrize(v))
}

/// Symmetric part of `d ΛᵀDᵀDΛ − e EᵀEΛ`.
pub fn compute_v_poly(poly: &PolySenderCost, lambda: &DMatrix<f64>) -> Result<SymMatrix> {
    let d = lambda.ncols();
    if lambda.nrows() != d {
        return Err(Error::InvalidInput(
            "the polynomial sender cost needs a square Λ (action and state dimensions equal)"
                .into(),
        ));
    }
    if poly.d_mat.ncols() != d || poly.e_mat.ncols() != d {
        return Err(Error::InvalidInput(format!(
            "D has {} and E has {} columns, expected {d}",
            poly.d_mat.ncols(),
            poly.e_mat.ncols()
        )));
    }
    let dl = &poly.d_mat * lambda;
    let quad = dl.transpose() * dl * poly.d_coef;
    let cross = poly.e_mat.transpose() * &poly.e_mat * lambda * poly.e_coef;
    Ok(SymMatrix::symmetrize(quad - cross))
}

fn shifted_cholesky(
    sigma_e: &Covariance,
    epsilon: f64,
) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let d = sigma_e.dim();
    let shifted = sigma_e.as_matrix() + DMatrix::identity(d, d) * epsilon;
    shifted.cholesky()
}

/// `ln det(Σ_e + εI)`.
pub fn log_det_shifted(sigma_e: &Covariance, epsilon: f64) -> Result<f64> {
    let chol = shifted_cholesky(sigma_e, epsilon)
        .ok_or_else(|| Error::Domain("Σ_e + εI is not positive definite".into()))?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|x| x.ln())
            .sum::<f64>())
}

/// `J(Σ_e) = −(1−β)Tr(VΣ_e) − β ln det(Σ_e + εI)`; `−Tr(VΣ_e)` without
/// signaling cost. `Σ_e` is expected to lie in `[O, Σ₀]`.
pub fn eval_j(sigma_e: &Covariance, v: &SymMatrix, spec: &SenderSpec) -> Result<f64> {
    let beta = spec.effective_beta();
    let linear = -(1.0 - beta) * v.inner(sigma_e.as_sym());
    if beta == 0.0 {
        return Ok(linear);
    }
    Ok(linear - beta * log_det_shifted(sigma_e, spec.epsilon)?)
}

/// `∇J = −(1−β)V − β(Σ_e + εI)⁻¹`.
pub fn grad_j(sigma_e: &Covariance, v: &SymMatrix, spec: &SenderSpec) -> Result<SymMatrix> {
    let beta = spec.effective_beta();
    let linear = v * (-(1.0 - beta));
    if beta == 0.0 {
        return Ok(linear);
    }
    let chol = shifted_cholesky(sigma_e, spec.epsilon)
        .ok_or_else(|| Error::Numerical("cannot invert Σ_e + εI".into()))?;
    let inv = SymMatrix::symmetrize(chol.inverse());
    Ok(&linear - &(&inv * beta))
}

/// Bound `G` on `||∇J||_F` over the feasible interval for receivers with
/// `max(|Q|,|R|) <= κ` and `λ_min(RᵀR) >= lambda_min`.
pub fn gradient_bound(spec: &SenderSpec, kappa: f64, lambda_min: f64) -> f64 {
    let beta = spec.effective_beta();
    let v_bound = v_norm_bound(spec, kappa, lambda_min);
    let diameter = spec.sigma0.trace();
    let entropy = if beta > 0.0 {
        diameter / spec.epsilon
    } else {
        0.0
    };
    (1.0 - beta) * v_bound + beta * entropy
}

/// `K'^2 + 2K'||Q_s||_F` with `K' = ||R_s||_F d κ / λ_min`, bounding `||V||_F`.
pub fn v_norm_bound(spec: &SenderSpec, kappa: f64, lambda_min: f64) -> f64 {
    let k = spec.rs.norm() * spec.dim() as f64 * kappa / lambda_min;
    k * k + 2.0 * k * spec.qs.norm()
}

/// Bound `B` on `|J|` over the feasible interval:
/// `(1−β)·G_V·Tr(Σ₀) + β·max(|ln det(εI)|, |ln det(Σ₀+εI)|)`.
pub fn loss_bound(spec: &SenderSpec, kappa: f64, lambda_min: f64) -> Result<f64> {
    let beta = spec.effective_beta();
    let linear = (1.0 - beta) * v_norm_bound(spec, kappa, lambda_min) * spec.sigma0.trace();
    if beta == 0.0 {
        return Ok(linear);
    }
    let d = spec.dim() as f64;
    let low = (d * spec.epsilon.ln()).abs();
    let high = log_det_shifted(&spec.sigma0, spec.epsilon)?.abs();
    Ok(linear + beta * low.max(high))
}

/// Strong-convexity constant `1/(1152 γ² d³ √e)` of `−ln det` over the
/// interval, with `γ = max_i (Σ₀)_ii`.
pub fn strong_convexity_alpha(sigma0: &Covariance, d: usize) -> f64 {
    let gamma = (0..sigma0.dim())
        .map(|i| sigma0.as_sym().get(i, i))
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 / (1152.0 * gamma * gamma * (d as f64).powi(3) * std::f64::consts::E.sqrt())
}

/// Exact lower bound `1/(λ_max(Σ₀)+ε)²` on the Hessian of `−ln det(Σ_e+εI)`
/// over the interval. Much larger than [`strong_convexity_alpha`] and still
/// a valid modulus, so it gives sane OGD step sizes.
pub fn logdet_curvature(sigma0: &Covariance, epsilon: f64) -> f64 {
    let top = matcore::eig(sigma0.as_sym()).max_value() + epsilon;
    1.0 / (top * top)
}

/// `u = −Λ ŵ`.
pub fn best_response(lambda: &DMatrix<f64>, omega_hat: &DVector<f64>) -> DVector<f64> {
    -(lambda * omega_hat)
}

/// Realized `(sender, receiver)` stage costs. The signaling term of the
/// sender is evaluated at the committed error covariance.
pub fn stage_costs(
    omega: &DVector<f64>,
    u: &DVector<f64>,
    theta: &ReceiverType,
    spec: &SenderSpec,
    sigma_e: &Covariance,
) -> Result<(f64, f64)> {
    let receiver = (&theta.q * omega + &theta.r * u).norm_squared();
    let beta = spec.effective_beta();
    let quad = (&spec.qs * omega + &spec.rs * u).norm_squared();
    let mut sender = (1.0 - beta) * quad;
    if beta > 0.0 {
        sender -= beta * log_det_shifted(sigma_e, spec.epsilon)?;
    }
    Ok((sender, receiver))
}

/// Minimizer of `−Tr(M Σ_e)` over `[O, Σ₀]` for positive definite `Σ₀`:
/// `Σ₀^{1/2} P Σ₀^{1/2}` with `P` the projector onto the positive
/// eigenspace of `Σ₀^{1/2} M Σ₀^{1/2}`. Zero eigenvalues are left out.
pub fn linear_interval_minimizer(m: &SymMatrix, sigma0: &Covariance) -> Result<Covariance> {
    let root = matcore::psd_sqrt(sigma0)?;
    let transformed = m.congruence(root.as_matrix());
    let proj = matcore::eig(&transformed).map(|x| if x > 0.0 { 1.0 } else { 0.0 });
    Ok(Covariance::assume_psd(proj.congruence(root.as_matrix())))
}

/// Outcome of [`minimize_projected`].
#[derive(Clone, Debug)]
pub struct PgdOutcome {
    pub point: Covariance,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Projected gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking. Stops when `||x − Π(x − ∇f(x))||_F <= tol`.
pub fn minimize_projected<F, G, P>(
    f: F,
    grad: G,
    project: P,
    start: Covariance,
    tol: f64,
    max_iter: usize,
) -> Result<PgdOutcome>
where
    F: Fn(&Covariance) -> Result<f64>,
    G: Fn(&Covariance) -> Result<SymMatrix>,
    P: Fn(&SymMatrix) -> Result<Covariance>,
{
    let mut x = start;
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut step = 1.0;
    let mut residual = f64::INFINITY;

    for it in 0..max_iter {
        let unit = project(&(x.as_sym() - &g))?;
        residual = (unit.as_sym() - x.as_sym()).frobenius_norm();
        if residual <= tol {
            return Ok(PgdOutcome {
                point: x,
                value: fx,
                iterations: it,
                residual,
            });
        }

        let mut s = step;
        let (next, f_next) = loop {
            let cand = project(&(x.as_sym() - &(&g * s)))?;
            let dir = cand.as_sym() - x.as_sym();
            // Points where the log-det is undefined count as failed trials.
            // The slack absorbs rounding once f stops resolving decreases.
            if let Ok(fc) = f(&cand) {
                if fc <= fx + ARMIJO_C * g.inner(&dir) + 1e-14 * fx.abs().max(1.0) {
                    break (cand, fc);
                }
            }
            s *= ARMIJO_SHRINK;
            if s < 1e-300 {
                return Err(Error::Numerical("line search step underflow".into()));
            }
        };

        let g_next = grad(&next)?;
        let dx = next.as_sym() - x.as_sym();
        let dg = &g_next - &g;
        let curv = dx.inner(&dg);
        step = if curv > 0.0 {
            (dx.inner(&dx) / curv).clamp(1e-12, 1e12)
        } else {
            (s * 2.0).min(1e12)
        };
        x = next;
        fx = f_next;
        g = g_next;
    }
    Err(Error::NoConvergence {
        what: "projected gradient descent",
        iterations: max_iter,
        residual,
    })
}

/// Minimizes `J` over `[O, Σ₀]`, starting from `Σ₀/2`.
pub fn solve_static(v: &SymMatrix, spec: &SenderSpec, tol: f64) -> Result<(Covariance, f64)> {
    let start = Covariance::assume_psd(spec.sigma0.as_sym() * 0.5);
    let out = solve_static_from(v, spec, tol, start)?;
    Ok((out.point, out.value))
}

/// [`solve_static`] with an explicit (feasible) starting point.
pub fn solve_static_from(
    v: &SymMatrix,
    spec: &SenderSpec,
    tol: f64,
    start: Covariance,
) -> Result<PgdOutcome> {
    if v.dim() != spec.dim() {
        return Err(Error::InvalidInput(format!(
            "V is {0}x{0} but the state dimension is {1}",
            v.dim(),
            spec.dim()
        )));
    }
    minimize_projected(
        |s| eval_j(s, v, spec),
        |s| grad_j(s, v, spec),
        |x| matcore::project_interval_default(x, &spec.sigma0),
        start,
        tol,
        STATIC_MAX_ITER,
    )
}
