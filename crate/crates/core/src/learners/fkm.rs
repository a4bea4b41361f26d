//! Bandit gradient descent (FKM): one-point gradient estimates from scalar
//! losses at spherically perturbed plays.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hindsight::IntervalHindsight;
use super::{realize_interval, RegretBook, RoundRecord};
use crate::error::{Error, Result};
use crate::game::{self, ReceiverType, SenderSpec};
use crate::matcore::{self, Covariance, SymMatrix};

/// Shrinking applied when `T^{-1/4}` is not below the inradius.
const DELTA_CLAMP: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct FkmConfig {
    pub horizon: usize,
    /// Perturbation radius `δ`.
    pub delta: f64,
    /// Step size `ρ`.
    pub rho: f64,
    /// Center `C = Σ₀/2` of the shrunk set.
    pub center: Covariance,
    /// Frobenius inradius `λ_min(Σ₀)/2` of the interval around `C`.
    pub inradius: f64,
    /// Multiplier `n` in the estimator `(n/δ) J U`; `d²` by default.
    pub dimension_factor: f64,
}

impl FkmConfig {
    /// `δ = T^{-1/4}` (capped at `0.9·r`), `ρ = D/(d²T^{3/4})` with
    /// `D = Tr Σ₀`.
    pub fn for_horizon(spec: &SenderSpec, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        let sigma0 = &spec.sigma0;
        let d = sigma0.dim() as f64;
        let inradius = inradius(sigma0);
        let t = horizon as f64;
        let delta = t.powf(-0.25).min(DELTA_CLAMP * inradius);
        Ok(Self {
            horizon,
            delta,
            rho: sigma0.trace() / (d * d * t.powf(0.75)),
            center: Covariance::assume_psd(sigma0.as_sym() * 0.5),
            inradius,
            dimension_factor: d * d,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < self.inradius) {
            return Err(Error::InvalidShrinkage {
                delta: self.delta,
                inradius: self.inradius,
            });
        }
        if !(self.rho > 0.0) || !(self.dimension_factor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "rho {} and dimension factor {} must be positive",
                self.rho, self.dimension_factor
            )));
        }
        Ok(())
    }
}

fn inradius(sigma0: &Covariance) -> f64 {
    matcore::eig(sigma0.as_sym()).min_value() / 2.0
}

/// Projection onto `K_δ = {C + s(Σ − C) : Σ ∈ [O, Σ₀]}`, `s = 1 − δ/r`,
/// `C = Σ₀/2`, `r = λ_min(Σ₀)/2`. Every point of `K_δ` stays in the interval
/// after adding any `δU` with `||U||_F <= 1`.
pub fn shrink_set_project(x: &SymMatrix, sigma0: &Covariance, delta: f64) -> Result<Covariance> {
    let r = inradius(sigma0);
    if !(0.0..r).contains(&delta) {
        return Err(Error::InvalidShrinkage { delta, inradius: r });
    }
    let s = 1.0 - delta / r;
    let c = sigma0.as_sym() * 0.5;
    let unscaled = &c + &(&(x - &c) * (1.0 / s));
    let p = matcore::project_interval_default(&unscaled, sigma0)?;
    Ok(Covariance::assume_psd(&c + &(&(p.as_sym() - &c) * s)))
}

/// FKM state. Sees nothing but the scalar loss of each proposed play.
#[derive(Clone, Debug)]
pub struct FkmLearner {
    cfg: FkmConfig,
    sigma0: Covariance,
    state: Covariance,
    pending: Option<SymMatrix>,
}

impl FkmLearner {
    /// Starts at the projection of `O` onto `K_δ`.
    pub fn new(cfg: FkmConfig, sigma0: Covariance) -> Result<Self> {
        cfg.validate()?;
        let state = shrink_set_project(&SymMatrix::zeros(sigma0.dim()), &sigma0, cfg.delta)?;
        Ok(Self {
            cfg,
            sigma0,
            state,
            pending: None,
        })
    }

    pub fn state(&self) -> &Covariance {
        &self.state
    }

    /// Draws `U` uniformly from the unit Frobenius sphere and returns the
    /// play `Σ_t + δU`.
    pub fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Covariance> {
        if self.pending.is_some() {
            return Err(Error::InvalidInput("previous play has no loss yet".into()));
        }
        let u = matcore::sample_unit_sphere_sym(self.sigma0.dim(), rng);
        let play = Covariance::assume_psd(self.state.as_sym() + &(&u * self.cfg.delta));
        self.pending = Some(u);
        Ok(play)
    }

    /// Takes the loss of the last play and steps along `−ρ(n/δ)·loss·U`.
    pub fn observe(&mut self, loss: f64) -> Result<()> {
        let u = self
            .pending
            .take()
            .ok_or_else(|| Error::InvalidInput("no pending play".into()))?;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("non-finite loss {loss}")));
        }
        let scale = self.cfg.rho * self.cfg.dimension_factor / self.cfg.delta * loss;
        let moved = self.state.as_sym() - &(&u * scale);
        self.state = shrink_set_project(&moved, &self.sigma0, self.cfg.delta)?;
        Ok(())
    }
}

/// Runs FKM against `stream`. The learner draws its perturbations from
/// `rng`; the first draw seeds a separate generator for the realized
/// samples so that the learner's stream does not depend on them.
pub fn fkm_run<R: Rng + ?Sized>(
    stream: &[ReceiverType],
    spec: &SenderSpec,
    cfg: &FkmConfig,
    rng: &mut R,
) -> Result<Vec<RoundRecord>> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("empty receiver stream".into()));
    }
    let mut sim_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut learner = FkmLearner::new(cfg.clone(), spec.sigma0.clone())?;
    let mut hindsight = IntervalHindsight::new(spec);
    let mut offsets = 0.0;
    let mut book = RegretBook::with_capacity(stream.len());

    for theta in stream {
        let play = learner.propose(rng)?;
        let v = game::compute_v(theta, spec)?;
        let loss = game::eval_j(&play, &v, spec)?;
        learner.observe(loss)?;

        let offset = spec.cost_offset(&v);
        let realized = realize_interval(&play, theta, spec, &mut sim_rng)?;
        offsets += offset;
        let best = hindsight.push(&v)? + offsets;
        book.push(play.into_sym(), loss + offset, realized, best);
    }
    Ok(book.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CostKind, STATIC_TOL};
    use nalgebra::DMatrix;

    fn spec_with(sigma0: Covariance, beta: f64) -> SenderSpec {
        let d = sigma0.dim();
        let mut qs = DMatrix::zeros(1, d);
        qs[(0, 0)] = 1.0;
        if d > 1 {
            qs[(0, 1)] = 1.0;
        }
        SenderSpec::new(
            qs,
            DMatrix::from_element(1, 1, -1.0),
            beta,
            0.01,
            sigma0,
            CostKind::EntropySmoothed,
        )
        .unwrap()
    }

    fn random_sym(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::symmetrize(DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0)))
    }

    fn alpha_type(a: f64, b: f64) -> ReceiverType {
        ReceiverType::new(
            DMatrix::from_row_slice(1, 3, &[1.0, a, b]),
            DMatrix::from_element(1, 1, -1.0),
        )
        .unwrap()
    }

    #[test]
    fn zero_shrinkage_is_the_plain_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s0 = Covariance::identity(3);
        for _ in 0..20 {
            let x = &random_sym(3, &mut rng) * 2.0;
            let a = shrink_set_project(&x, &s0, 0.0).unwrap();
            let b = matcore::project_interval_default(&x, &s0).unwrap();
            assert!(a.as_sym().max_abs_diff(b.as_sym()) < 1e-12);
        }
    }

    #[test]
    fn center_is_fixed() {
        let s0 = Covariance::from_diagonal(&[2.0, 3.0]).unwrap();
        let c = s0.as_sym() * 0.5;
        let p = shrink_set_project(&c, &s0, 0.5).unwrap();
        assert!(p.as_sym().max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn perturbed_points_stay_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s0 = Covariance::identity(2);
        let delta = 0.3;
        for _ in 0..10 {
            let x = &random_sym(2, &mut rng) * 3.0;
            let p = shrink_set_project(&x, &s0, delta).unwrap();
            for _ in 0..100 {
                let u = matcore::sample_unit_sphere_sym(2, &mut rng);
                let play = p.as_sym() + &(&u * delta);
                assert!(matcore::interval_violation(&play, &s0) <= 1e-12);
            }
        }
    }

    #[test]
    fn scalar_plays_stay_in_the_interval() {
        let spec = spec_with(Covariance::identity(1), 0.5);
        let cfg = FkmConfig::for_horizon(&spec, 400).unwrap();
        let mut learner = FkmLearner::new(cfg, spec.sigma0.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..400 {
            let play = learner.propose(&mut rng).unwrap();
            let x = play.as_sym().get(0, 0);
            assert!((-1e-12..=1.0 + 1e-12).contains(&x), "{x}");
            learner
                .observe(if t % 3 == 0 { 5.0 } else { -4.0 })
                .unwrap();
        }
    }

    #[test]
    fn shrinkage_at_inradius_is_rejected() {
        let s0 = Covariance::identity(2);
        assert!(matches!(
            shrink_set_project(&SymMatrix::zeros(2), &s0, 0.5),
            Err(Error::InvalidShrinkage { .. })
        ));
        let spec = spec_with(s0.clone(), 0.5);
        let mut cfg = FkmConfig::for_horizon(&spec, 100).unwrap();
        cfg.delta = 0.6;
        assert!(FkmLearner::new(cfg, s0).is_err());
    }

    #[test]
    fn defaults_follow_the_horizon() {
        let spec = spec_with(Covariance::identity(3), 0.5);
        let cfg = FkmConfig::for_horizon(&spec, 10_000).unwrap();
        assert!((cfg.delta - 0.1).abs() < 1e-15);
        assert!((cfg.rho - 3.0 / (9.0 * 1000.0)).abs() < 1e-15);
        assert_eq!(cfg.dimension_factor, 9.0);
        let short = FkmConfig::for_horizon(&spec, 4).unwrap();
        assert!((short.delta - 0.45).abs() < 1e-15);
    }

    #[test]
    fn learner_only_depends_on_scalar_losses() {
        // replaying the scalar losses alone reproduces every play bit for bit
        let spec = spec_with(Covariance::identity(3), 0.5);
        let cfg = FkmConfig::for_horizon(&spec, 200).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stream: Vec<ReceiverType> = (0..200)
            .map(|_| alpha_type(rng.random_range(0.1..4.1), rng.random_range(0.2..4.2)))
            .collect();
        let mut run_rng = ChaCha8Rng::seed_from_u64(99);
        let recs = fkm_run(&stream, &spec, &cfg, &mut run_rng).unwrap();
        let losses: Vec<f64> = recs
            .iter()
            .zip(&stream)
            .map(|(r, theta)| {
                let v = game::compute_v(theta, &spec).unwrap();
                game::eval_j(&Covariance::assume_psd(r.decision.clone()), &v, &spec).unwrap()
            })
            .collect();

        let mut replay_rng = ChaCha8Rng::seed_from_u64(99);
        let _: u64 = replay_rng.random();
        let mut learner = FkmLearner::new(cfg, spec.sigma0.clone()).unwrap();
        for (r, loss) in recs.iter().zip(losses) {
            let play = learner.propose(&mut replay_rng).unwrap();
            assert_eq!(play.as_sym(), &r.decision);
            learner.observe(loss).unwrap();
        }
    }

    #[test]
    fn constant_adversary_drifts_toward_static_optimum() {
        // running-average decision, averaged over seeds: the one-point
        // estimator is too noisy for single-seed windows
        let spec = spec_with(Covariance::identity(3), 0.5);
        let theta = alpha_type(2.0, 3.0);
        let v = game::compute_v(&theta, &spec).unwrap();
        let (opt, _) = game::solve_static(&v, &spec, STATIC_TOL).unwrap();
        let horizon = 4000;
        let cfg = FkmConfig::for_horizon(&spec, horizon).unwrap();
        let stream = vec![theta; horizon];
        let seeds = 10;
        let mut dists = vec![0.0; horizon / 1000];
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let recs = fkm_run(&stream, &spec, &cfg, &mut rng).unwrap();
            let mut sum = SymMatrix::zeros(3);
            for (k, window) in recs.chunks(1000).enumerate() {
                sum = window.iter().fold(sum, |acc, r| &acc + &r.decision);
                let avg = &sum * (1.0 / ((k + 1) * 1000) as f64);
                dists[k] += (&avg - opt.as_sym()).frobenius_norm() / seeds as f64;
            }
        }
        assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
    }
}
