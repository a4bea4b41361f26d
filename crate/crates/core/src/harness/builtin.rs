//! Named experiment presets reproducing the reference figures.

use nalgebra::DMatrix;

use crate::adversary::StreamKind;
use crate::error::{Error, Result};
use crate::game::{CostKind, SenderSpec, DEFAULT_EPSILON};
use crate::matcore::Covariance;

use super::config::{Algorithm, ExperimentConfig, LearnerOptions, DEFAULT_TRIALS};

pub const BUILTIN_NAMES: &[&str] = &["fig1a", "fig1b", "lowerbound", "ftpl-quadratic", "fkm"];

/// Horizons of the log-log regret sweep.
pub const FIG1B_HORIZONS: &[usize] = &[10, 32, 100, 316, 1000, 3162, 10000];

/// `Q_s = [1, 1, 0]`, `R_s = [-1]`, `Σ₀ = I₃`.
pub fn alpha_sender(beta: f64, cost_kind: CostKind) -> SenderSpec {
    SenderSpec::new(
        DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]),
        DMatrix::from_row_slice(1, 1, &[-1.0]),
        beta,
        DEFAULT_EPSILON,
        Covariance::identity(3),
        cost_kind,
    )
    .expect("alpha-family sender is well formed")
}

/// `Q_s = 1`, `R_s = -1`, `Σ₀ = 1`.
pub fn scalar_sender() -> SenderSpec {
    SenderSpec::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, -1.0),
        0.0,
        DEFAULT_EPSILON,
        Covariance::identity(1),
        CostKind::None,
    )
    .expect("scalar sender is well formed")
}

fn base(
    name: &str,
    algorithm: Algorithm,
    stream: StreamKind,
    sender: SenderSpec,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        algorithm,
        stream,
        bounds: None,
        sender,
        horizons: Vec::new(),
        n_trials: DEFAULT_TRIALS,
        seed,
        output_dir: None,
        options: LearnerOptions::default(),
    }
}

pub fn builtin(name: &str, seed: u64) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig1a" => ExperimentConfig {
            horizons: (1..=10).map(|k| 10 * k).collect(),
            ..base(
                name,
                Algorithm::Ogd,
                StreamKind::alpha_family(),
                alpha_sender(0.5, CostKind::EntropySmoothed),
                seed,
            )
        },
        "fig1b" => ExperimentConfig {
            horizons: FIG1B_HORIZONS.to_vec(),
            ..base(
                name,
                Algorithm::Ogd,
                StreamKind::alpha_family(),
                alpha_sender(0.0, CostKind::EntropySmoothed),
                seed,
            )
        },
        "lowerbound" => ExperimentConfig {
            horizons: vec![100, 400, 1600],
            n_trials: 200,
            ..base(
                name,
                Algorithm::Ogd,
                StreamKind::ScalarLowerBound,
                scalar_sender(),
                seed,
            )
        },
        "ftpl-quadratic" => ExperimentConfig {
            horizons: vec![5000],
            n_trials: 10,
            ..base(
                name,
                Algorithm::Ftpl,
                StreamKind::alpha_family(),
                alpha_sender(0.0, CostKind::None),
                seed,
            )
        },
        "fkm" => ExperimentConfig {
            horizons: vec![1000, 10000],
            n_trials: 10,
            ..base(
                name,
                Algorithm::Fkm,
                StreamKind::alpha_family(),
                alpha_sender(0.5, CostKind::EntropySmoothed),
                seed,
            )
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown builtin '{other}' (expected one of {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
