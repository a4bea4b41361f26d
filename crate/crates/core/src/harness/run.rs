//! Seeded multi-trial runs and their summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{trial_seed, Algorithm, ExperimentConfig};
use super::fit::{fit_loglog_slope, LogLogFit};
use super::plot::{emit_plot, PlotOptions};
use crate::error::{Error, Result};
use crate::learners::{
    fkm_run, ftpl_gradient_bound, ftpl_run, ogd_run, FkmConfig, FtplConfig, OgdConfig, RoundRecord,
};

pub const CSV_HEADER: &str = "t,decision_frobnorm,expected_cost,realized_sender_cost,\
realized_receiver_cost,cumulative_cost,hindsight_cost,regret,avg_regret";

/// Final-round statistics over trials at one horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonStats {
    pub horizon: usize,
    pub mean_avg_regret: f64,
    pub std_avg_regret: f64,
    pub mean_regret: f64,
    pub std_regret: f64,
    /// Final `avg_regret` of each trial, in trial order.
    pub trial_avg_regret: Vec<f64>,
    /// Final `regret` of each trial, in trial order.
    pub trial_regret: Vec<f64>,
}

impl HorizonStats {
    /// Statistics of the final rows of each trial.
    pub fn from_finals(horizon: usize, finals: &[(f64, f64)]) -> Self {
        let regret: Vec<f64> = finals.iter().map(|f| f.0).collect();
        let avg: Vec<f64> = finals.iter().map(|f| f.1).collect();
        let (mean_regret, std_regret) = mean_std(&regret);
        let (mean_avg_regret, std_avg_regret) = mean_std(&avg);
        Self {
            horizon,
            mean_avg_regret,
            std_avg_regret,
            mean_regret,
            std_regret,
            trial_avg_regret: avg,
            trial_regret: regret,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub algorithm: String,
    pub seed: u64,
    pub trial_seeds: Vec<u64>,
    pub horizons: Vec<HorizonStats>,
    /// Fit of mean `avg_regret` against `T`; absent with fewer than three
    /// usable horizons.
    pub avg_regret_fit: Option<FitRecord>,
    /// Fit of mean cumulative regret against `T`.
    pub regret_fit: Option<FitRecord>,
    pub wall_clock_seconds: f64,
}

/// Serializable mirror of [`LogLogFit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub excluded: usize,
}

impl From<LogLogFit> for FitRecord {
    fn from(f: LogLogFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            r2: f.r2,
            excluded: f.excluded,
        }
    }
}

impl ExperimentSummary {
    /// Builds the summary (fits included) from per-horizon statistics.
    pub fn assemble(
        cfg: &ExperimentConfig,
        horizons: Vec<HorizonStats>,
        wall_clock_seconds: f64,
    ) -> Self {
        let fit = |f: fn(&HorizonStats) -> f64| {
            let pts: Vec<(f64, f64)> = horizons.iter().map(|h| (h.horizon as f64, f(h))).collect();
            fit_loglog_slope(&pts).ok().map(FitRecord::from)
        };
        Self {
            name: cfg.name.clone(),
            algorithm: cfg.algorithm.name().into(),
            seed: cfg.seed,
            trial_seeds: (0..cfg.n_trials).map(|k| trial_seed(cfg.seed, k)).collect(),
            avg_regret_fit: fit(|h| h.mean_avg_regret),
            regret_fit: fit(|h| h.mean_regret),
            horizons,
            wall_clock_seconds,
        }
    }

    /// One line per horizon: `horizon,mean_avg_regret,std_avg_regret,mean_regret,std_regret`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("horizon,mean_avg_regret,std_avg_regret,mean_regret,std_regret\n");
        for h in &self.horizons {
            writeln!(
                s,
                "{},{},{},{},{}",
                h.horizon, h.mean_avg_regret, h.std_avg_regret, h.mean_regret, h.std_regret
            )
            .unwrap();
        }
        s
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Learner generator for one trial: seeded like the stream but on a
/// separate ChaCha stream.
fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs one (horizon, trial) cell of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, horizon: usize, trial: usize) -> Result<Vec<RoundRecord>> {
    let spec = cfg.stream_spec(horizon, trial);
    let stream = spec.generate()?;
    let bounds = spec.type_bounds()?;
    let sender = &cfg.sender;
    let opts = &cfg.options;
    let mut rng = learner_rng(spec.seed);
    match cfg.algorithm {
        Algorithm::Ogd => {
            let mut c = OgdConfig::for_spec(sender, &bounds);
            if let Some(a) = opts.ogd_alpha {
                c.alpha = a;
            }
            if let Some(r) = opts.ogd_step {
                c.step_rule = r;
            }
            ogd_run(&stream, sender, &c, &mut rng)
        }
        Algorithm::Fkm => {
            let mut c = FkmConfig::for_horizon(sender, horizon)?;
            if let Some(f) = opts.fkm_dimension_factor {
                c.dimension_factor = f;
            }
            fkm_run(&stream, sender, &c, &mut rng)
        }
        Algorithm::Ftpl => {
            let mut c = FtplConfig::for_horizon(ftpl_gradient_bound(sender, &bounds), horizon);
            if let Some(r) = opts.ftpl_rho {
                c.rho = r;
            }
            if let Some(n) = opts.ftpl_samples {
                c.n_samples = n;
            }
            ftpl_run(&stream, sender, &c, &mut rng)
        }
    }
}

/// Per-round CSV with the fixed column set.
pub fn records_to_csv(records: &[RoundRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 160);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.decision.frobenius_norm(),
            r.expected_cost,
            r.realized_sender_cost,
            r.realized_receiver_cost,
            r.cumulative_cost,
            r.hindsight_cost,
            r.regret,
            r.avg_regret
        )
        .unwrap();
    }
    s
}

/// Path of the per-round CSV of one trial.
pub fn trial_csv_path(dir: &Path, horizon: usize, trial: usize) -> PathBuf {
    dir.join(format!("T{horizon}"))
        .join(format!("trial_{trial:03}.csv"))
}

struct CellOutput {
    regret: f64,
    avg_regret: f64,
    csv: Option<String>,
}

fn run_cell(cfg: &ExperimentConfig, horizon: usize, trial: usize) -> Result<CellOutput> {
    let records = run_trial(cfg, horizon, trial).map_err(|e| Error::Trial {
        trial,
        horizon,
        source: Box::new(e),
    })?;
    let last = records.last().expect("horizon is positive");
    Ok(CellOutput {
        regret: last.regret,
        avg_regret: last.avg_regret,
        csv: cfg.output_dir.as_ref().map(|_| records_to_csv(&records)),
    })
}

/// Runs every (horizon, trial) cell, in parallel, and writes per-trial CSV
/// files, `summary.json`, `config.txt` and `avg_regret.svg` when an output
/// directory is configured. Files are written in cell order after all
/// cells finish, so the output is identical for any thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let cells: Vec<(usize, usize)> = cfg
        .horizons
        .iter()
        .flat_map(|&h| (0..cfg.n_trials).map(move |k| (h, k)))
        .collect();
    let results: Mutex<Vec<Option<Result<CellOutput>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cells.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let (h, k) = cells[i];
                let out = run_cell(cfg, h, k);
                results.lock().unwrap()[i] = Some(out);
            });
        }
    });

    let outputs = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect::<Result<Vec<_>>>()?;

    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        for (&(h, k), out) in cells.iter().zip(&outputs) {
            let path = trial_csv_path(dir, h, k);
            std::fs::create_dir_all(path.parent().unwrap())?;
            std::fs::write(&path, out.csv.as_deref().unwrap_or_default())?;
        }
    }

    let stats: Vec<HorizonStats> = cfg
        .horizons
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let finals: Vec<(f64, f64)> = outputs[i * cfg.n_trials..(i + 1) * cfg.n_trials]
                .iter()
                .map(|o| (o.regret, o.avg_regret))
                .collect();
            HorizonStats::from_finals(h, &finals)
        })
        .collect();
    let summary = ExperimentSummary::assemble(cfg, stats, start.elapsed().as_secs_f64());

    if let Some(dir) = &cfg.output_dir {
        std::fs::write(dir.join("config.txt"), cfg.to_text())?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&summary)?,
        )?;
        emit_plot(
            &summary,
            &dir.join("avg_regret.svg"),
            &PlotOptions {
                log_log: summary.horizons.len() > 1,
            },
        )?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
