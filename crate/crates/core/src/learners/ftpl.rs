//! Follow-the-perturbed-leader over `𝒲 = {W : O <= W <= I}`.
//!
//! Linear minimization over `𝒲` is attained at a projection matrix, so the
//! leader is always realizable by a noiseless linear policy; averaged plays
//! become randomized policies through the Carathéodory decomposition.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hindsight::WBoxHindsight;
use super::{RegretBook, RoundRecord};
use crate::error::{Error, Result};
use crate::game::{self, ReceiverType, SenderSpec, TypeBounds};
use crate::matcore::{self, SymMatrix};
use crate::policy::{self, RandomizedPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// Upper triangle i.i.d. uniform on `[0, 1]`, mirrored below.
    UniformUpperTriangle,
}

#[derive(Clone, Debug)]
pub struct FtplConfig {
    pub rho: f64,
    pub n_samples: usize,
    pub perturbation: Perturbation,
}

impl FtplConfig {
    /// `ρ = 1/(G√T)`, one sample per round.
    pub fn for_horizon(g: f64, horizon: usize) -> Self {
        Self {
            rho: 1.0 / (g * (horizon as f64).sqrt()),
            n_samples: 1,
            perturbation: Perturbation::UniformUpperTriangle,
        }
    }
}

/// `argmin_{O<=W<=I} Tr(MW)`: the projector onto the span of the
/// eigenvectors of `M` with strictly negative eigenvalues.
pub fn ftpl_linear_oracle(m: &SymMatrix) -> SymMatrix {
    matcore::eig(m).map(|x| if x < 0.0 { 1.0 } else { 0.0 })
}

/// Expected quadratic sender cost `||(Q_s − R_sΛW)Σ₀^{1/2}||_F²`.
pub struct QuadraticWCost<'a> {
    m: DMatrix<f64>,
    spec: &'a SenderSpec,
}

impl<'a> QuadraticWCost<'a> {
    pub fn new(lambda: &DMatrix<f64>, spec: &'a SenderSpec) -> Result<Self> {
        if lambda.nrows() != spec.rs.ncols() || lambda.ncols() != spec.dim() {
            return Err(Error::InvalidInput(format!(
                "Λ is {}x{}, expected {}x{}",
                lambda.nrows(),
                lambda.ncols(),
                spec.rs.ncols(),
                spec.dim()
            )));
        }
        Ok(Self {
            m: &spec.rs * lambda,
            spec,
        })
    }

    fn residual(&self, w: &SymMatrix) -> DMatrix<f64> {
        &self.spec.qs - &self.m * w.as_matrix()
    }

    pub fn value(&self, w: &SymMatrix) -> f64 {
        let r = self.residual(w);
        (&r * self.spec.sigma0.as_matrix()).dot(&r)
    }

    /// `sym(−2MᵀR Σ₀)` with `R = Q_s − MW`.
    pub fn gradient(&self, w: &SymMatrix) -> SymMatrix {
        let g = self.m.transpose() * self.residual(w) * self.spec.sigma0.as_matrix() * -2.0;
        SymMatrix::symmetrize(g)
    }
}

/// Gradient of the quadratic `W` cost at `w` for receiver gain `lambda`.
pub fn grad_quadratic_w(
    w: &SymMatrix,
    lambda: &DMatrix<f64>,
    spec: &SenderSpec,
) -> Result<SymMatrix> {
    if w.dim() != spec.dim() {
        return Err(Error::InvalidInput("W has the wrong dimension".into()));
    }
    Ok(QuadraticWCost::new(lambda, spec)?.gradient(w))
}

/// Bound on `||∇||_F` of the quadratic `W` cost over `[O, I]`:
/// `2||R_s||K(||Q_s|| + ||R_s||K)λ_max(Σ₀)` with `K = κ/√λ_min` bounding
/// `||Λ||_F`.
pub fn ftpl_gradient_bound(spec: &SenderSpec, bounds: &TypeBounds) -> f64 {
    let k = bounds.kappa / bounds.lambda_min.sqrt();
    let rs = spec.rs.norm();
    let top = matcore::eig(spec.sigma0.as_sym()).max_value();
    2.0 * rs * k * (spec.qs.norm() + rs * k) * top
}

fn sample_perturbation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SymMatrix {
    let mut n = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let x: f64 = rng.random();
            n[(i, j)] = x;
            n[(j, i)] = x;
        }
    }
    SymMatrix::symmetrize(n)
}

/// One FTPL play: the (possibly averaged) `W` and its realization.
#[derive(Clone, Debug)]
pub struct FtplPlay {
    pub w: SymMatrix,
    pub mixture: RandomizedPolicy,
}

#[derive(Clone, Debug)]
pub struct FtplLearner {
    cfg: FtplConfig,
    grad_sum: SymMatrix,
}

impl FtplLearner {
    pub fn new(cfg: FtplConfig, d: usize) -> Result<Self> {
        if !(cfg.rho > 0.0) || cfg.n_samples == 0 {
            return Err(Error::InvalidInput(format!(
                "FTPL needs rho > 0 and at least one sample (rho {}, samples {})",
                cfg.rho, cfg.n_samples
            )));
        }
        Ok(Self {
            cfg,
            grad_sum: SymMatrix::zeros(d),
        })
    }

    /// Leader of `ρΣ∇_s + N` for fresh perturbations `N`.
    pub fn play<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FtplPlay> {
        let d = self.grad_sum.dim();
        let base = &self.grad_sum * self.cfg.rho;
        let mut draw = || {
            let n = match self.cfg.perturbation {
                Perturbation::UniformUpperTriangle => sample_perturbation(d, rng),
            };
            ftpl_linear_oracle(&(&base + &n))
        };
        if self.cfg.n_samples == 1 {
            let w = draw();
            return Ok(FtplPlay {
                mixture: RandomizedPolicy {
                    atoms: vec![(1.0, w.clone())],
                },
                w,
            });
        }
        let mut sum = SymMatrix::zeros(d);
        for _ in 0..self.cfg.n_samples {
            sum = &sum + &draw();
        }
        let w = &sum * (1.0 / self.cfg.n_samples as f64);
        let mixture = policy::caratheodory_decompose(&w)?;
        Ok(FtplPlay { w, mixture })
    }

    pub fn observe(&mut self, grad: &SymMatrix) {
        self.grad_sum = &self.grad_sum + grad;
    }
}

/// Runs FTPL with the quadratic `W` cost against `stream` (full feedback).
///
/// The expected cost of a round is the mixture average of the atom costs;
/// the realized cost samples one atom and plays its noiseless policy. The
/// first draw from `rng` seeds the generator used for those samples.
pub fn ftpl_run<R: Rng + ?Sized>(
    stream: &[ReceiverType],
    spec: &SenderSpec,
    cfg: &FtplConfig,
    rng: &mut R,
) -> Result<Vec<RoundRecord>> {
    if stream.is_empty() {
        return Err(Error::InvalidInput("empty receiver stream".into()));
    }
    let mut sim_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut learner = FtplLearner::new(cfg.clone(), spec.dim())?;
    let mut hindsight = WBoxHindsight::new(spec);
    let mut book = RegretBook::with_capacity(stream.len());

    for theta in stream {
        let played = learner.play(rng)?;
        let lambda = game::compute_lambda(theta)?;
        let cost = QuadraticWCost::new(&lambda, spec)?;
        let expected: f64 = played
            .mixture
            .atoms
            .iter()
            .map(|(weight, atom)| weight * cost.value(atom))
            .sum();

        let atom = played.mixture.sample(&mut sim_rng);
        let pol = policy::synthesize_from_projection(atom, &spec.sigma0)?;
        let sample = policy::simulate_round(&pol, theta, spec, &mut sim_rng)?;

        learner.observe(&cost.gradient(&played.w));
        let best = hindsight.push(&lambda)?;
        book.push(
            played.w,
            expected,
            (sample.sender_cost, sample.receiver_cost),
            best,
        );
    }
    Ok(book.finish())
}
