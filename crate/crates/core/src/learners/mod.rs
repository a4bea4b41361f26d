//! Online learners for the repeated persuasion game and regret accounting.
//!
//! * [`ogd`] projected online gradient descent with full feedback,
//! * [`fkm`] the bandit variant that only sees scalar losses,
//! * [`ftpl`] follow-the-perturbed-leader over `O <= W <= I`,
//! * [`hindsight`] the best fixed decision for a prefix of the stream.

pub mod fkm;
pub mod ftpl;
pub mod hindsight;
pub mod ogd;

pub use fkm::{fkm_run, shrink_set_project, FkmConfig, FkmLearner};
pub use ftpl::{
    ftpl_gradient_bound, ftpl_linear_oracle, ftpl_run, grad_quadratic_w, FtplConfig, FtplLearner,
    Perturbation, QuadraticWCost,
};
pub use hindsight::{hindsight_best, History, IntervalHindsight, WBoxHindsight};
pub use ogd::{ogd_run, OgdConfig, StepRule};

use serde::Serialize;

use crate::matcore::SymMatrix;

/// Per-round log of an online run.
///
/// Costs are expected sender costs of the committed decision against the
/// round's receiver; realized costs come from one simulated state.
#[derive(Clone, Debug, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    /// `Σ_e` for the interval learners, `W` for FTPL.
    #[serde(skip)]
    pub decision: SymMatrix,
    pub expected_cost: f64,
    pub realized_sender_cost: f64,
    pub realized_receiver_cost: f64,
    pub cumulative_cost: f64,
    pub hindsight_cost: f64,
    pub regret: f64,
    pub avg_regret: f64,
}

/// Running sums turning per-round costs into [`RoundRecord`]s.
#[derive(Debug, Default)]
pub(crate) struct RegretBook {
    cumulative: f64,
    records: Vec<RoundRecord>,
}

impl RegretBook {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            cumulative: 0.0,
            records: Vec::with_capacity(n),
        }
    }

    pub(crate) fn push(
        &mut self,
        decision: SymMatrix,
        expected_cost: f64,
        realized: (f64, f64),
        hindsight_cost: f64,
    ) {
        let t = self.records.len() + 1;
        self.cumulative += expected_cost;
        let regret = self.cumulative - hindsight_cost;
        self.records.push(RoundRecord {
            t,
            decision,
            expected_cost,
            realized_sender_cost: realized.0,
            realized_receiver_cost: realized.1,
            cumulative_cost: self.cumulative,
            hindsight_cost,
            regret,
            avg_regret: regret / t as f64,
        });
    }

    pub(crate) fn finish(self) -> Vec<RoundRecord> {
        self.records
    }
}

/// Realized `(sender, receiver)` costs of committing to `Σ_e` for one
/// sampled state.
pub(crate) fn realize_interval<R: rand::Rng + ?Sized>(
    sigma_e: &crate::matcore::Covariance,
    theta: &crate::game::ReceiverType,
    spec: &crate::game::SenderSpec,
    rng: &mut R,
) -> crate::Result<(f64, f64)> {
    let target = crate::matcore::Covariance::assume_psd(spec.sigma0.as_sym() - sigma_e.as_sym());
    let policy = crate::policy::synthesize_policy(&target, &spec.sigma0)?;
    let sample = crate::policy::simulate_round(&policy, theta, spec, rng)?;
    Ok((sample.sender_cost, sample.receiver_cost))
}
