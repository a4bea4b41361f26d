//! Single-instance inputs for the `solve-static` and `synthesize` commands.
//!
//! Same `key = value` layout as experiment configs. A static instance
//! names the sender (`qs`, `rs`, `sigma0`, `beta`, `epsilon`, `cost`) and
//! either the receiver (`q`, `r`) or the matrix `v` directly. A synthesis
//! instance names `sigma0` and the target posterior covariance `sigma`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::adversary::parse_matrix;
use crate::error::{Error, Result};
use crate::game::{self, CostKind, ReceiverType, SenderSpec, DEFAULT_EPSILON, STATIC_TOL};
use crate::matcore::{Covariance, SymMatrix};
use crate::policy::{self, SignalingPolicy};

fn parse_pairs(text: &str, origin: &Path, keys: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Format {
            path: origin.to_path_buf(),
            line: i + 1,
            message,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected KEY = VALUE, got '{line}'")))?;
        let k = k.trim();
        if !keys.contains(&k) {
            return Err(err(format!("unknown key '{k}'")));
        }
        if map.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(err(format!("duplicate key '{k}'")));
        }
    }
    Ok(map)
}

struct Reader<'a> {
    map: BTreeMap<String, String>,
    origin: &'a Path,
}

impl Reader<'_> {
    fn err(&self, message: String) -> Error {
        Error::Format {
            path: self.origin.to_path_buf(),
            line: 0,
            message,
        }
    }

    fn matrix(&self, key: &str) -> Result<Option<DMatrix<f64>>> {
        self.map
            .get(key)
            .map(|v| parse_matrix(v).map_err(|m| self.err(format!("{key}: {m}"))))
            .transpose()
    }

    fn required_matrix(&self, key: &str) -> Result<DMatrix<f64>> {
        self.matrix(key)?
            .ok_or_else(|| self.err(format!("missing required key '{key}'")))
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| self.err(format!("{key}: cannot parse '{v}'"))),
        }
    }

    fn covariance(&self, key: &str) -> Result<Covariance> {
        Covariance::new(SymMatrix::new(self.required_matrix(key)?)?)
    }
}

#[derive(Clone, Debug)]
pub struct StaticInstance {
    pub spec: SenderSpec,
    pub v: SymMatrix,
}

impl StaticInstance {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        const KEYS: &[&str] = &[
            "qs", "rs", "sigma0", "beta", "epsilon", "cost", "q", "r", "v",
        ];
        let rd = Reader {
            map: parse_pairs(text, origin, KEYS)?,
            origin,
        };
        let cost_kind = match rd
            .map
            .get("cost")
            .map(String::as_str)
            .unwrap_or("entropy_smoothed")
        {
            "entropy_smoothed" => CostKind::EntropySmoothed,
            "none" => CostKind::None,
            other => return Err(rd.err(format!("cost: unknown cost '{other}'"))),
        };
        let spec = SenderSpec::new(
            rd.required_matrix("qs")?,
            rd.required_matrix("rs")?,
            rd.number("beta", 0.0)?,
            rd.number("epsilon", DEFAULT_EPSILON)?,
            rd.covariance("sigma0")?,
            cost_kind,
        )?;
        let v = match (rd.matrix("v")?, rd.matrix("q")?, rd.matrix("r")?) {
            (Some(v), None, None) => SymMatrix::new(v)?,
            (None, Some(q), Some(r)) => game::compute_v(&ReceiverType::new(q, r)?, &spec)?,
            _ => return Err(rd.err("give either v, or both q and r".into())),
        };
        if v.dim() != spec.sigma0.dim() {
            return Err(rd.err(format!(
                "v is {0}x{0} but sigma0 is {1}x{1}",
                v.dim(),
                spec.sigma0.dim()
            )));
        }
        Ok(Self { spec, v })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&crate::error::read_text(path)?, path)
    }

    pub fn solve(&self) -> Result<StaticSolution> {
        let (sigma_e, objective) = game::solve_static(&self.v, &self.spec, STATIC_TOL)?;
        let expected_cost = objective + self.spec.cost_offset(&self.v);
        let target = Covariance::assume_psd(self.spec.sigma0.as_sym() - sigma_e.as_sym());
        let policy = policy::synthesize_policy(&target, &self.spec.sigma0)?;
        Ok(StaticSolution {
            sigma_e: rows(sigma_e.as_matrix()),
            objective,
            expected_cost,
            policy: PolicyRecord::from(&policy),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisInstance {
    pub sigma0: Covariance,
    pub sigma: Covariance,
}

impl SynthesisInstance {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let rd = Reader {
            map: parse_pairs(text, origin, &["sigma0", "sigma"])?,
            origin,
        };
        Ok(Self {
            sigma0: rd.covariance("sigma0")?,
            sigma: rd.covariance("sigma")?,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&crate::error::read_text(path)?, path)
    }

    pub fn synthesize(&self) -> Result<SynthesisResult> {
        let policy = policy::synthesize_policy(&self.sigma, &self.sigma0)?;
        let post = policy::posterior(&policy, &self.sigma0)?;
        let achieved = post.covariance.as_sym();
        Ok(SynthesisResult {
            policy: PolicyRecord::from(&policy),
            posterior_covariance: rows(achieved.as_matrix()),
            max_abs_error: achieved.max_abs_diff(self.sigma.as_sym()),
        })
    }
}

/// Row-major nested form for JSON output.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PolicyRecord {
    pub l: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

impl From<&SignalingPolicy> for PolicyRecord {
    fn from(p: &SignalingPolicy) -> Self {
        Self {
            l: rows(&p.l),
            theta: rows(p.theta.as_matrix()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StaticSolution {
    pub sigma_e: Vec<Vec<f64>>,
    /// Decision-dependent part of the expected cost.
    pub objective: f64,
    pub expected_cost: f64,
    pub policy: PolicyRecord,
}

#[derive(Clone, Debug, Serialize)]
pub struct SynthesisResult {
    pub policy: PolicyRecord,
    pub posterior_covariance: Vec<Vec<f64>>,
    pub max_abs_error: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> &'static Path {
        Path::new("inline")
    }

    #[test]
    fn v_and_receiver_forms_agree() {
        // Q = [1, 2, 3], R = [-1] gives Λ = -Q.
        let by_receiver = StaticInstance::parse(
            "qs = 1,1,0;1x3\nrs = -1;1x1\nsigma0 = 1,0,0,0,1,0,0,0,1;3x3\nbeta = 0.5\nq = 1,2,3;1x3\nr = -1;1x1\n",
            origin(),
        )
        .unwrap();
        let l = DMatrix::from_row_slice(1, 3, &[-1.0, -2.0, -3.0]);
        let v = game::v_from_lambda(&l, &by_receiver.spec).unwrap();
        assert!(by_receiver.v.max_abs_diff(&v) < 1e-12);

        let text = format!(
            "qs = 1,1,0;1x3\nrs = -1;1x1\nsigma0 = 1,0,0,0,1,0,0,0,1;3x3\nbeta = 0.5\nv = {}\n",
            crate::adversary::format_matrix(v.as_matrix())
        );
        let by_v = StaticInstance::parse(&text, origin()).unwrap();
        let a = by_receiver.solve().unwrap();
        let b = by_v.solve().unwrap();
        assert!((a.objective - b.objective).abs() < 1e-9);
    }

    #[test]
    fn ambiguous_receiver_rejected() {
        let err = StaticInstance::parse(
            "qs = 1;1x1\nrs = -1;1x1\nsigma0 = 1;1x1\nv = 1;1x1\nq = 1;1x1\nr = 1;1x1\n",
            origin(),
        );
        assert!(matches!(err, Err(Error::Format { .. })));
        let err = StaticInstance::parse(
            "qs = 1;1x1\nrs = -1;1x1\nsigma0 = 1;1x1\nmu = 2\n",
            origin(),
        );
        assert!(matches!(err, Err(Error::Format { line: 4, .. })));
    }

    #[test]
    fn synthesis_reaches_target() {
        let inst = SynthesisInstance::parse(
            "sigma0 = 2,0.5,0.5,1;2x2\nsigma = 1,0.2,0.2,0.4;2x2\n",
            origin(),
        )
        .unwrap();
        let out = inst.synthesize().unwrap();
        assert!(out.max_abs_error < 1e-9);
    }

    #[test]
    fn synthesis_outside_interval_rejected() {
        let inst =
            SynthesisInstance::parse("sigma0 = 1,0,0,1;2x2\nsigma = 2,0,0,0.5;2x2\n", origin())
                .unwrap();
        assert!(matches!(
            inst.synthesize(),
            Err(Error::InfeasibleTarget { .. })
        ));
    }
}
