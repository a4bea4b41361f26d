//! Projected online gradient descent on the error covariance.

use rand::Rng;

use super::hindsight::IntervalHindsight;
use super::{realize_interval, RegretBook, RoundRecord};
use crate::error::{Error, Result};
use crate::game::{self, ReceiverType, SenderSpec, TypeBounds};
use crate::matcore::{self, Covariance};
use crate::policy::FEASIBILITY_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// `ρ_t = 1/(αβt)`.
    StronglyConvex,
    /// `ρ_t = D/(G√t)`.
    Linear,
}

/// Step-size parameters. `β` and `ε` are read from the [`SenderSpec`].
#[derive(Clone, Debug)]
pub struct OgdConfig {
    /// Strong-convexity modulus of the signaling cost.
    pub alpha: f64,
    /// Bound on the gradient norm.
    pub g: f64,
    /// Diameter `D` of the decision set.
    pub diameter: f64,
    pub initial_sigma_e: Covariance,
    pub step_rule: StepRule,
}

impl OgdConfig {
    /// Strongly convex steps with the exact log-det curvature when `β > 0`,
    /// linear steps otherwise; starts from `Σ₀/2`.
    pub fn for_spec(spec: &SenderSpec, bounds: &TypeBounds) -> Self {
        let beta = spec.effective_beta();
        Self {
            alpha: game::logdet_curvature(&spec.sigma0, spec.epsilon),
            g: game::gradient_bound(spec, bounds.kappa, bounds.lambda_min),
            diameter: spec.sigma0.trace(),
            initial_sigma_e: Covariance::assume_psd(spec.sigma0.as_sym() * 0.5),
            step_rule: if beta > 0.0 {
                StepRule::StronglyConvex
            } else {
                StepRule::Linear
            },
        }
    }

    pub fn step(&self, t: usize, beta: f64) -> f64 {
        match self.step_rule {
            StepRule::StronglyConvex => 1.0 / (self.alpha * beta * t as f64),
            StepRule::Linear => self.diameter / (self.g * (t as f64).sqrt()),
        }
    }

    fn validate(&self, spec: &SenderSpec) -> Result<()> {
        let ok = match self.step_rule {
            StepRule::StronglyConvex => self.alpha > 0.0 && spec.effective_beta() > 0.0,
            StepRule::Linear => self.diameter > 0.0 && self.g > 0.0,
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "non-positive step sizes for {:?} (alpha {}, beta {}, D {}, G {})",
                self.step_rule,
                self.alpha,
                spec.effective_beta(),
                self.diameter,
                self.g
            )));
        }
        if self.initial_sigma_e.dim() != spec.dim() {
            return Err(Error::InvalidInput(
                "initial Σ_e has the wrong dimension".into(),
            ));
        }
        let violation = matcore::interval_violation(self.initial_sigma_e.as_sym(), &spec.sigma0);
        if violation > FEASIBILITY_TOL {
            return Err(Error::InfeasibleTarget { violation });
        }
        Ok(())
    }
}

/// Runs OGD against `stream` with full feedback.
///
/// Round `t` commits `Σ_{e,t}` (realized through a linear-plus-noise policy
/// sampled with `rng`), observes `V_t` and moves to
/// `Π(Σ_{e,t} − ρ_t∇J_t(Σ_{e,t}))`.
pub fn ogd_run<R: Rng + ?Sized>(
    stream: &[ReceiverType],
    spec: &SenderSpec,
    cfg: &OgdConfig,
    rng: &mut R,
) -> Result<Vec<RoundRecord>> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("empty receiver stream".into()));
    }
    cfg.validate(spec)?;
    let beta = spec.effective_beta();
    let mut sigma_e = cfg.initial_sigma_e.clone();
    let mut hindsight = IntervalHindsight::new(spec);
    let mut offsets = 0.0;
    let mut book = RegretBook::with_capacity(stream.len());

    for (i, theta) in stream.iter().enumerate() {
        let t = i + 1;
        let v = game::compute_v(theta, spec)?;
        let expected = game::expected_sender_cost(&sigma_e, &v, spec)?;
        let realized = realize_interval(&sigma_e, theta, spec, rng)?;
        offsets += spec.cost_offset(&v);
        let best = hindsight.push(&v)? + offsets;
        book.push(sigma_e.as_sym().clone(), expected, realized, best);

        if t < stream.len() {
            let grad = game::grad_j(&sigma_e, &v, spec)?;
            let moved = sigma_e.as_sym() - &(&grad * cfg.step(t, beta));
            sigma_e = matcore::project_interval_default(&moved, &spec.sigma0)?;
        }
    }
    Ok(book.finish())
}
