//! Linear-plus-noise signaling policies `y = L w + v`, `v ~ N(0, Θ)`.
//!
//! Any posterior covariance in `[O, Σ₀]` is reachable by such a policy
//! ([`synthesize_policy`]); projection matrices `W` in the whitened frame are
//! reachable by noiseless ones ([`synthesize_from_projection`]), and any
//! `O <= W <= I` is a mixture of projections ([`caratheodory_decompose`]).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::game::{self, ReceiverType, SenderSpec};
use crate::matcore::{self, Covariance, SymMatrix, PINV_RANK_TOL};

/// Target/interval membership tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Eigenvalue tolerance for recognizing projections and `[O, I]` members.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Whitened directions revealing less than this are switched off entirely.
const SILENT_DIRECTION: f64 = 1e-9;
const ATOM_WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct SignalingPolicy {
    pub l: DMatrix<f64>,
    pub theta: Covariance,
}

impl SignalingPolicy {
    /// Reveals nothing.
    pub fn silent(d: usize) -> Self {
        Self {
            l: DMatrix::zeros(d, d),
            theta: Covariance::zeros(d),
        }
    }
}

/// Gaussian posterior induced by a policy.
#[derive(Clone, Debug)]
pub struct Posterior {
    /// `K = Σ₀Lᵀ(LΣ₀Lᵀ+Θ)†`, so that `ŵ = K y`.
    pub gain: DMatrix<f64>,
    /// `Σ = E[ŵŵᵀ]`.
    pub covariance: Covariance,
    /// `Σ_e = Σ₀ − Σ`.
    pub error: Covariance,
}

/// A mixture of noiseless linear policies, one per projection atom.
#[derive(Clone, Debug)]
pub struct RandomizedPolicy {
    pub atoms: Vec<(f64, SymMatrix)>,
}

impl RandomizedPolicy {
    /// `Σ w_i W_i`.
    pub fn mean(&self) -> SymMatrix {
        let d = self.atoms[0].1.dim();
        self.atoms
            .iter()
            .fold(SymMatrix::zeros(d), |acc, (w, m)| &acc + &(m * *w))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &SymMatrix {
        let mut u: f64 = rng.random();
        for (w, m) in &self.atoms {
            if u < *w {
                return m;
            }
            u -= w;
        }
        &self.atoms[self.atoms.len() - 1].1
    }
}

/// Builds a policy whose posterior covariance equals `target`.
///
/// With `Σ₀ = U₀Λ₀U₀ᵀ`, whiten the target to `T = Λ₀^{-1/2}U₀ᵀ Σ U₀Λ₀^{-1/2}`
/// and diagonalize `T = U_tΛ_tU_tᵀ`. The policy observes the whitened state
/// along each column of `U_t` with unit gain and noise variance
/// `1/λ_t − 1`; fully revealed directions get no noise and silent ones a
/// zero row.
pub fn synthesize_policy(target: &Covariance, sigma0: &Covariance) -> Result<SignalingPolicy> {
    let d = sigma0.dim();
    if target.dim() != d {
        return Err(Error::InvalidInput(
            "target and prior dimensions differ".into(),
        ));
    }
    let violation = matcore::interval_violation(target.as_sym(), sigma0);
    if violation > FEASIBILITY_TOL {
        return Err(Error::InfeasibleTarget { violation });
    }
    let e0 = matcore::eig(sigma0.as_sym());
    if e0.min_value() <= PROJECTION_TOL * e0.max_value().max(1.0) {
        return Err(Error::SingularPrior);
    }
    let inv_root = DMatrix::from_diagonal(&e0.values.map(|x| 1.0 / x.sqrt()));
    let whiten = inv_root * e0.vectors.transpose();
    let t = target.as_sym().congruence(&whiten);
    let et = matcore::eig(&t);

    let directions = et.vectors.transpose() * &whiten;
    let mut l = DMatrix::zeros(d, d);
    let mut noise = DVector::zeros(d);
    for i in 0..d {
        let lam = et.values[i].clamp(0.0, 1.0);
        if lam < SILENT_DIRECTION {
            continue;
        }
        l.set_row(i, &directions.row(i));
        if lam < 1.0 {
            noise[i] = 1.0 / lam - 1.0;
        }
    }
    Ok(SignalingPolicy {
        l,
        theta: Covariance::assume_psd(SymMatrix::symmetrize(DMatrix::from_diagonal(&noise))),
    })
}

/// Gain and covariances of the posterior induced by `policy`.
pub fn posterior(policy: &SignalingPolicy, sigma0: &Covariance) -> Result<Posterior> {
    let d = sigma0.dim();
    if policy.l.ncols() != d || policy.theta.dim() != policy.l.nrows() {
        return Err(Error::InvalidInput(format!(
            "policy L is {}x{} with Θ {}x{}, prior is {d}x{d}",
            policy.l.nrows(),
            policy.l.ncols(),
            policy.theta.dim(),
            policy.theta.dim()
        )));
    }
    let s0 = sigma0.as_matrix();
    let signal_cov = &policy.l * s0 * policy.l.transpose() + policy.theta.as_matrix();
    let inv = matcore::pinv(&SymMatrix::symmetrize(signal_cov), PINV_RANK_TOL);
    let gain = s0 * policy.l.transpose() * inv.as_matrix();
    let cov = SymMatrix::symmetrize(&gain * &policy.l * s0);
    let error = Covariance::assume_psd(sigma0.as_sym() - &cov);
    Ok(Posterior {
        gain,
        covariance: Covariance::assume_psd(cov),
        error,
    })
}

/// `ŵ = Σ₀Lᵀ(LΣ₀Lᵀ+Θ)† y`.
pub fn posterior_mean(
    policy: &SignalingPolicy,
    sigma0: &Covariance,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(posterior(policy, sigma0)?.gain * y)
}

/// `Σ = Σ₀Lᵀ(LΣ₀Lᵀ+Θ)†LΣ₀`.
pub fn posterior_covariance(policy: &SignalingPolicy, sigma0: &Covariance) -> Result<Covariance> {
    Ok(posterior(policy, sigma0)?.covariance)
}

/// Noiseless policy with `Σ₀^{1/2} W Σ₀^{1/2}` as posterior covariance, for
/// an orthogonal projection `W`: `L = PᵀΣ₀^{-1/2}` padded with zero rows,
/// where the columns of `P` span the range of `W`.
pub fn synthesize_from_projection(w: &SymMatrix, sigma0: &Covariance) -> Result<SignalingPolicy> {
    let d = sigma0.dim();
    if w.dim() != d {
        return Err(Error::InvalidInput("W and prior dimensions differ".into()));
    }
    let e = matcore::eig(w);
    if let Some(&bad) = e
        .values
        .iter()
        .find(|&&x| x.abs() > PROJECTION_TOL && (x - 1.0).abs() > PROJECTION_TOL)
    {
        return Err(Error::NotProjection { eigenvalue: bad });
    }
    let inv_root = matcore::psd_inv_sqrt(sigma0)?;
    let mut l = DMatrix::zeros(d, d);
    for (i, &x) in e.values.iter().enumerate() {
        if x > 0.5 {
            let row = e.vectors.column(i).transpose() * inv_root.as_matrix();
            l.set_row(i, &row);
        }
    }
    Ok(SignalingPolicy {
        l,
        theta: Covariance::zeros(d),
    })
}

/// Writes `O <= W <= I` as a convex combination of at most `d + 1`
/// projections sharing `W`'s eigenbasis.
///
/// With eigenvalues sorted `δ₁ >= … >= δ_d`, the atom projecting onto the
/// top `k` eigenvectors gets weight `δ_k − δ_{k+1}` and the zero matrix gets
/// `1 − δ₁`.
pub fn caratheodory_decompose(w: &SymMatrix) -> Result<RandomizedPolicy> {
    let d = w.dim();
    let e = matcore::eig(w);
    if let Some(&bad) = e
        .values
        .iter()
        .find(|&&x| !(-PROJECTION_TOL..=1.0 + PROJECTION_TOL).contains(&x))
    {
        return Err(Error::InfeasibleW { eigenvalue: bad });
    }
    let delta: Vec<f64> = e.values.iter().map(|x| x.clamp(0.0, 1.0)).collect();

    let mut atoms = Vec::with_capacity(d + 1);
    let zero_weight = 1.0 - delta[0];
    if zero_weight > ATOM_WEIGHT_FLOOR {
        atoms.push((zero_weight, SymMatrix::zeros(d)));
    }
    for k in 1..=d {
        let next = if k < d { delta[k] } else { 0.0 };
        let weight = delta[k - 1] - next;
        if weight > ATOM_WEIGHT_FLOOR {
            let cols = e.vectors.columns(0, k);
            atoms.push((weight, SymMatrix::symmetrize(cols * cols.transpose())));
        }
    }
    if atoms.is_empty() {
        atoms.push((1.0, SymMatrix::zeros(d)));
    }
    let total: f64 = atoms.iter().map(|(w, _)| w).sum();
    for atom in &mut atoms {
        atom.0 /= total;
    }
    Ok(RandomizedPolicy { atoms })
}

/// One simulated round of the persuasion game.
#[derive(Clone, Debug)]
pub struct RoundSample {
    pub omega: DVector<f64>,
    pub signal: DVector<f64>,
    pub omega_hat: DVector<f64>,
    pub action: DVector<f64>,
    pub sender_cost: f64,
    pub receiver_cost: f64,
    /// Expected sender cost of the committed policy against this receiver.
    pub expected_sender_cost: f64,
}

/// Draws `w ~ N(0, S)` through the PSD square root.
pub fn sample_gaussian<R: Rng + ?Sized>(root: &SymMatrix, rng: &mut R) -> DVector<f64> {
    let z = DVector::from_fn(root.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    root.as_matrix() * z
}

/// Samples a state, signals it through `policy`, lets the receiver
/// best-respond and records both costs.
pub fn simulate_round<R: Rng + ?Sized>(
    policy: &SignalingPolicy,
    theta: &ReceiverType,
    spec: &SenderSpec,
    rng: &mut R,
) -> Result<RoundSample> {
    let sigma0 = &spec.sigma0;
    let post = posterior(policy, sigma0)?;
    let lambda = game::compute_lambda(theta)?;
    let v = game::v_from_lambda(&lambda, spec)?;

    let omega = sample_gaussian(matcore::psd_sqrt(sigma0)?.as_sym(), rng);
    let noise = sample_gaussian(matcore::psd_sqrt(&policy.theta)?.as_sym(), rng);
    let signal = &policy.l * &omega + noise;
    let omega_hat = &post.gain * &signal;
    let action = game::best_response(&lambda, &omega_hat);
    let (sender_cost, receiver_cost) =
        game::stage_costs(&omega, &action, theta, spec, &post.error)?;
    let expected_sender_cost = game::expected_sender_cost(&post.error, &v, spec)?;
    Ok(RoundSample {
        omega,
        signal,
        omega_hat,
        action,
        sender_cost,
        receiver_cost,
        expected_sender_cost,
    })
}
