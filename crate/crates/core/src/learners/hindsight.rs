//! Best fixed decision in hindsight.
//!
//! Both domains admit sufficient statistics: the interval objective only
//! sees `ΣV_t`, and the quadratic `W` cost only sees `ΣMᵀM` and `ΣMᵀQ_s`
//! with `M = R_sΛ_t`. The trackers below fold one round at a time and
//! warm-start the solver from the previous prefix optimum.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::{self, SenderSpec, STATIC_MAX_ITER, STATIC_TOL};
use crate::matcore::{self, Covariance, SymMatrix};

/// Cost history of a finished (or partial) run.
pub enum History<'a> {
    /// Per-round `V_t`; minimizes `Σ_t J_t` over `[O, Σ₀]`.
    Interval(&'a [SymMatrix]),
    /// Per-round receiver gains `Λ_t`; minimizes `Σ_t ||(Q_s − R_sΛ_tW)Σ₀^{1/2}||_F²`
    /// over `[O, I]`.
    WBox(&'a [DMatrix<f64>]),
}

/// Minimizer and minimal total cost over the whole history.
pub fn hindsight_best(history: History<'_>, spec: &SenderSpec) -> Result<(SymMatrix, f64)> {
    match history {
        History::Interval(vs) => {
            if vs.is_empty() {
                return Err(Error::InvalidInput("empty history".into()));
            }
            let mut h = IntervalHindsight::new(spec);
            for v in vs {
                h.fold(v)?;
            }
            let total = h.solve()?;
            Ok((h.best().as_sym().clone(), total))
        }
        History::WBox(lambdas) => {
            if lambdas.is_empty() {
                return Err(Error::InvalidInput("empty history".into()));
            }
            let mut h = WBoxHindsight::new(spec);
            for l in lambdas {
                h.fold(l)?;
            }
            let total = h.solve()?;
            Ok((h.best().as_sym().clone(), total))
        }
    }
}

/// Prefix optimum of `Σ_{s<=t} J_s(Σ_e)` over `[O, Σ₀]`.
pub struct IntervalHindsight<'a> {
    spec: &'a SenderSpec,
    v_sum: SymMatrix,
    rounds: usize,
    best: Covariance,
}

impl<'a> IntervalHindsight<'a> {
    pub fn new(spec: &'a SenderSpec) -> Self {
        Self {
            spec,
            v_sum: SymMatrix::zeros(spec.dim()),
            rounds: 0,
            best: Covariance::assume_psd(spec.sigma0.as_sym() * 0.5),
        }
    }

    pub fn fold(&mut self, v: &SymMatrix) -> Result<()> {
        if v.dim() != self.spec.dim() {
            return Err(Error::InvalidInput("V has the wrong dimension".into()));
        }
        self.v_sum = &self.v_sum + v;
        self.rounds += 1;
        Ok(())
    }

    /// Folds `v` and returns the new prefix optimum value.
    pub fn push(&mut self, v: &SymMatrix) -> Result<f64> {
        self.fold(v)?;
        self.solve()
    }

    /// Minimal total cost over the rounds folded so far.
    pub fn solve(&mut self) -> Result<f64> {
        let t = self.rounds as f64;
        if self.rounds == 0 {
            return Ok(0.0);
        }
        if self.spec.effective_beta() == 0.0 {
            // linear: −Tr(ΣV_t Σ_e), minimized at a face of the interval
            self.best = game::linear_interval_minimizer(&self.v_sum, &self.spec.sigma0)?;
            return Ok(-self.v_sum.inner(self.best.as_sym()));
        }
        let v_bar = &self.v_sum * (1.0 / t);
        let out = game::solve_static_from(&v_bar, self.spec, STATIC_TOL, self.best.clone())?;
        self.best = out.point;
        Ok(t * out.value)
    }

    pub fn best(&self) -> &Covariance {
        &self.best
    }
}

/// Prefix optimum of the quadratic `W` cost over `[O, I]`.
pub struct WBoxHindsight<'a> {
    spec: &'a SenderSpec,
    /// `ΣMᵀM`
    a: DMatrix<f64>,
    /// `ΣMᵀQ_s`
    b: DMatrix<f64>,
    /// `Σ Tr(Q_sΣ₀Q_sᵀ)`
    c: f64,
    rounds: usize,
    best: Covariance,
}

impl<'a> WBoxHindsight<'a> {
    pub fn new(spec: &'a SenderSpec) -> Self {
        let d = spec.dim();
        Self {
            spec,
            a: DMatrix::zeros(d, d),
            b: DMatrix::zeros(d, d),
            c: 0.0,
            rounds: 0,
            best: Covariance::assume_psd(&SymMatrix::identity(d) * 0.5),
        }
    }

    pub fn fold(&mut self, lambda: &DMatrix<f64>) -> Result<()> {
        let spec = self.spec;
        if lambda.nrows() != spec.rs.ncols() || lambda.ncols() != spec.dim() {
            return Err(Error::InvalidInput(format!(
                "Λ is {}x{}, expected {}x{}",
                lambda.nrows(),
                lambda.ncols(),
                spec.rs.ncols(),
                spec.dim()
            )));
        }
        let m = &spec.rs * lambda;
        self.a += m.transpose() * &m;
        self.b += m.transpose() * &spec.qs;
        self.c += (&spec.qs * spec.sigma0.as_matrix() * spec.qs.transpose()).trace();
        self.rounds += 1;
        Ok(())
    }

    pub fn push(&mut self, lambda: &DMatrix<f64>) -> Result<f64> {
        self.fold(lambda)?;
        self.solve()
    }

    /// Total cost `c − 2Tr(WΣ₀Bᵀ) + Tr(WΣ₀WA)` of a fixed `W`.
    pub fn total_cost(&self, w: &SymMatrix) -> f64 {
        let s0 = self.spec.sigma0.as_matrix();
        let ws0 = w.as_matrix() * s0;
        self.c - 2.0 * ws0.dot(&self.b) + (&ws0 * w.as_matrix()).dot(&self.a)
    }

    fn total_gradient(&self, w: &SymMatrix) -> SymMatrix {
        let s0 = self.spec.sigma0.as_matrix();
        let aws0 = &self.a * w.as_matrix() * s0;
        SymMatrix::symmetrize((aws0 - &self.b * s0) * 2.0)
    }

    pub fn solve(&mut self) -> Result<f64> {
        if self.rounds == 0 {
            return Ok(0.0);
        }
        let t = self.rounds as f64;
        let out = game::minimize_projected(
            |w| Ok(self.total_cost(w.as_sym()) / t),
            |w| Ok(&self.total_gradient(w.as_sym()) * (1.0 / t)),
            |x| Ok(clip_unit_box(x)),
            self.best.clone(),
            STATIC_TOL,
            STATIC_MAX_ITER,
        )?;
        self.best = out.point;
        Ok(self.total_cost(self.best.as_sym()))
    }

    pub fn best(&self) -> &Covariance {
        &self.best
    }
}

/// Frobenius projection onto `[O, I]`: clip the spectrum to `[0, 1]`.
pub(crate) fn clip_unit_box(x: &SymMatrix) -> Covariance {
    Covariance::assume_psd(matcore::eig(x).map(|v| v.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::CostKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_spec(beta: f64) -> SenderSpec {
        SenderSpec::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, -1.0),
            beta,
            0.01,
            Covariance::identity(1),
            CostKind::EntropySmoothed,
        )
        .unwrap()
    }

    fn spec2(beta: f64) -> SenderSpec {
        SenderSpec::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DMatrix::from_element(1, 1, -1.0),
            beta,
            0.01,
            Covariance::identity(2),
            CostKind::EntropySmoothed,
        )
        .unwrap()
    }

    fn random_sym(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
        SymMatrix::symmetrize(DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn equal_v_collapses_to_static_solution() {
        let spec = spec2(0.0);
        let v = SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.5, -2.0]).unwrap();
        let vs = vec![v.clone(); 7];
        let (best, total) = hindsight_best(History::Interval(&vs), &spec).unwrap();
        let (single, value) = game::solve_static(&v, &spec, STATIC_TOL).unwrap();
        assert!((best.as_matrix() - single.as_matrix()).norm() < 1e-6);
        assert!((total - 7.0 * value).abs() < 1e-6);
    }

    #[test]
    fn balanced_scalar_sequence_costs_nothing() {
        let spec = scalar_spec(0.0);
        let vs: Vec<SymMatrix> = (0..10)
            .map(|i| SymMatrix::scalar(if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let (_, total) = hindsight_best(History::Interval(&vs), &spec).unwrap();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn interval_optimum_beats_a_fine_grid() {
        // Σ_e = R(φ) diag(a, b) R(φ)ᵀ with a, b, φ on a 0.01 grid
        let spec = spec2(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let vs: Vec<SymMatrix> = (0..10).map(|_| &random_sym(2, &mut rng) * 3.0).collect();
        let (best, total) = hindsight_best(History::Interval(&vs), &spec).unwrap();
        assert!(matcore::interval_violation(&best, &spec.sigma0) <= 1e-8);

        let v_sum = vs.iter().fold(SymMatrix::zeros(2), |acc, v| &acc + v);
        let eps = spec.epsilon;
        let mut grid_best = f64::INFINITY;
        let steps = (std::f64::consts::PI / 0.01) as usize;
        for k in 0..steps {
            let phi = k as f64 * 0.01;
            let (c, s) = (phi.cos(), phi.sin());
            // diagonal of RᵀV R
            let v11 =
                c * c * v_sum.get(0, 0) + 2.0 * c * s * v_sum.get(0, 1) + s * s * v_sum.get(1, 1);
            let v22 =
                s * s * v_sum.get(0, 0) - 2.0 * c * s * v_sum.get(0, 1) + c * c * v_sum.get(1, 1);
            let axis = |vii: f64| {
                (0..=100)
                    .map(|i| {
                        let x = i as f64 * 0.01;
                        -0.5 * vii * x - 0.5 * 10.0 * (x + eps).ln()
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            grid_best = grid_best.min(axis(v11) + axis(v22));
        }
        assert!(total <= grid_best + 1e-9, "{total} vs grid {grid_best}");
        assert!(
            grid_best - total <= 1e-3 * grid_best.abs().max(1.0),
            "{total} vs grid {grid_best}"
        );
    }

    #[test]
    fn prefix_tracker_matches_batch() {
        let spec = spec2(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vs: Vec<SymMatrix> = (0..20).map(|_| &random_sym(2, &mut rng) * 2.0).collect();
        let mut h = IntervalHindsight::new(&spec);
        for (t, v) in vs.iter().enumerate() {
            let running = h.push(v).unwrap();
            let (_, batch) = hindsight_best(History::Interval(&vs[..=t]), &spec).unwrap();
            assert!((running - batch).abs() <= 1e-6 * batch.abs().max(1.0));
        }
    }

    fn spec3_none() -> SenderSpec {
        SenderSpec::new(
            DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]),
            DMatrix::from_element(1, 1, -1.0),
            0.0,
            0.01,
            Covariance::identity(3),
            CostKind::None,
        )
        .unwrap()
    }

    #[test]
    fn wbox_matches_direct_sum_and_is_optimal() {
        let spec = spec3_none();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let lambdas: Vec<DMatrix<f64>> = (0..15)
            .map(|_| DMatrix::from_fn(1, 3, |_, _| rng.random_range(-3.0..3.0)))
            .collect();
        let (w, total) = hindsight_best(History::WBox(&lambdas), &spec).unwrap();
        let direct = |w: &SymMatrix| -> f64 {
            lambdas
                .iter()
                .map(|l| (&spec.qs - &spec.rs * l * w.as_matrix()).norm_squared())
                .sum()
        };
        assert!((direct(&w) - total).abs() < 1e-8 * total.max(1.0));
        for _ in 0..200 {
            let basis = matcore::eig(&random_sym(3, &mut rng));
            let z = basis.map(|_| rng.random_range(0.0..1.0));
            assert!(total <= direct(&z) + 1e-6);
        }
    }

    #[test]
    fn wbox_exact_fit_costs_nothing() {
        // Q_s = R_sΛW with W = I reachable
        let spec = spec3_none();
        let lambda = DMatrix::from_row_slice(1, 3, &[-1.0, -1.0, 0.0]);
        let (_, total) = hindsight_best(History::WBox(&[lambda.clone(), lambda]), &spec).unwrap();
        assert!(total.abs() < 1e-10);
    }

    #[test]
    fn empty_history_is_rejected() {
        let spec = spec3_none();
        assert!(hindsight_best(History::Interval(&[]), &spec).is_err());
        assert!(hindsight_best(History::WBox(&[]), &spec).is_err());
    }
}
