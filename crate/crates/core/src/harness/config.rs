//! Flat `key = value` experiment configuration files.
//!
//! ```text
//! # OGD on the alpha family
//! name = fig1a
//! algorithm = ogd
//! stream = uniform_alpha
//! qs = 1,1,0;1x3
//! rs = -1;1x1
//! sigma0 = 1,0,0,0,1,0,0,0,1;3x3
//! beta = 0.5
//! horizons = 10,20,30
//! trials = 20
//! seed = 7
//! ```
//!
//! Every key except the required ones (`algorithm`, `stream`, `qs`, `rs`,
//! `horizons`) has a default; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::adversary::{
    format_matrix, parse_matrix, StreamKind, StreamSpec, ALPHA_A_RANGE, ALPHA_B_RANGE,
};
use crate::error::{Error, Result};
use crate::game::{CostKind, SenderSpec, TypeBounds, DEFAULT_EPSILON};
use crate::learners::StepRule;
use crate::matcore::{Covariance, SymMatrix};

pub const DEFAULT_TRIALS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Ogd,
    Fkm,
    Ftpl,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ogd => "ogd",
            Algorithm::Fkm => "fkm",
            Algorithm::Ftpl => "ftpl",
        }
    }
}

/// Optional learner overrides; `None` keeps the defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LearnerOptions {
    pub ogd_alpha: Option<f64>,
    pub ogd_step: Option<StepRule>,
    pub fkm_dimension_factor: Option<f64>,
    pub ftpl_rho: Option<f64>,
    pub ftpl_samples: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub algorithm: Algorithm,
    pub stream: StreamKind,
    pub bounds: Option<TypeBounds>,
    pub sender: SenderSpec,
    pub horizons: Vec<usize>,
    pub n_trials: usize,
    pub seed: u64,
    /// Where CSV, JSON and SVG files go; nothing is written when `None`.
    pub output_dir: Option<PathBuf>,
    pub options: LearnerOptions,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::InvalidInput(
                "horizons must be non-empty and positive".into(),
            ));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "horizons must be strictly increasing".into(),
            ));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidInput("need at least one trial".into()));
        }
        Ok(())
    }

    /// Stream for one trial: seed `seed ⊕ trial`.
    pub fn stream_spec(&self, horizon: usize, trial: usize) -> StreamSpec {
        StreamSpec {
            kind: self.stream.clone(),
            horizon,
            seed: trial_seed(self.seed, trial),
            bounds: self.bounds,
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
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
            let key = k.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(err(format!("unknown key '{key}'")));
            }
            if map
                .insert(key.clone(), (v.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Fields { map, origin }.build()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::error::read_text(path)?;
        Self::parse(&text, path)
    }

    /// Text form accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("name", self.name.clone());
        kv("algorithm", self.algorithm.name().into());
        match &self.stream {
            StreamKind::UniformAlphaFamily { a, b } => {
                kv("stream", "uniform_alpha".into());
                kv("alpha_a", format!("{},{}", a.0, a.1));
                kv("alpha_b", format!("{},{}", b.0, b.1));
            }
            StreamKind::ScalarLowerBound => kv("stream", "scalar_lower_bound".into()),
            StreamKind::FromFile(p) => kv("stream", format!("file:{}", p.display())),
        }
        if let Some(b) = self.bounds {
            kv("kappa", b.kappa.to_string());
            kv("lambda_min", b.lambda_min.to_string());
        }
        let sp = &self.sender;
        kv("qs", format_matrix(&sp.qs));
        kv("rs", format_matrix(&sp.rs));
        kv("sigma0", format_matrix(sp.sigma0.as_matrix()));
        kv("beta", sp.beta.to_string());
        kv("epsilon", sp.epsilon.to_string());
        kv(
            "cost",
            match sp.cost_kind {
                CostKind::EntropySmoothed => "entropy_smoothed",
                CostKind::None => "none",
            }
            .into(),
        );
        let hs: Vec<String> = self.horizons.iter().map(|h| h.to_string()).collect();
        kv("horizons", hs.join(","));
        kv("trials", self.n_trials.to_string());
        kv("seed", self.seed.to_string());
        if let Some(dir) = &self.output_dir {
            kv("output_dir", dir.display().to_string());
        }
        let o = &self.options;
        if let Some(a) = o.ogd_alpha {
            kv("ogd_alpha", a.to_string());
        }
        if let Some(r) = o.ogd_step {
            kv(
                "ogd_step",
                match r {
                    StepRule::StronglyConvex => "strongly_convex",
                    StepRule::Linear => "linear",
                }
                .into(),
            );
        }
        if let Some(f) = o.fkm_dimension_factor {
            kv("fkm_dimension_factor", f.to_string());
        }
        if let Some(r) = o.ftpl_rho {
            kv("ftpl_rho", r.to_string());
        }
        if let Some(n) = o.ftpl_samples {
            kv("ftpl_samples", n.to_string());
        }
        s
    }
}

/// Seed of trial `k`: `seed ⊕ k`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

const KEYS: &[&str] = &[
    "name",
    "algorithm",
    "stream",
    "alpha_a",
    "alpha_b",
    "kappa",
    "lambda_min",
    "qs",
    "rs",
    "sigma0",
    "beta",
    "epsilon",
    "cost",
    "horizons",
    "trials",
    "seed",
    "output_dir",
    "ogd_alpha",
    "ogd_step",
    "fkm_dimension_factor",
    "ftpl_rho",
    "ftpl_samples",
];

struct Fields<'a> {
    map: BTreeMap<String, (String, usize)>,
    origin: &'a Path,
}

impl Fields<'_> {
    fn err(&self, key: &str, message: String) -> Error {
        Error::Format {
            path: self.origin.to_path_buf(),
            line: self.map.get(key).map_or(0, |(_, l)| *l),
            message: format!("{key}: {message}"),
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Format {
            path: self.origin.to_path_buf(),
            line: 0,
            message: format!("missing required key '{key}'"),
        })
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| self.err(key, format!("cannot parse '{v}'")))
            })
            .transpose()
    }

    fn matrix(&self, key: &str) -> Result<Option<DMatrix<f64>>> {
        self.get(key)
            .map(|v| parse_matrix(v).map_err(|m| self.err(key, m)))
            .transpose()
    }

    fn pair(&self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        let Some(v) = self.get(key) else {
            return Ok(default);
        };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [a, b] => match (a.parse(), b.parse()) {
                (Ok(a), Ok(b)) => Ok((a, b)),
                _ => Err(self.err(key, format!("cannot parse '{v}'"))),
            },
            _ => Err(self.err(key, format!("expected LOW,HIGH, got '{v}'"))),
        }
    }

    fn build(self) -> Result<ExperimentConfig> {
        let algorithm = match self.required("algorithm")? {
            "ogd" => Algorithm::Ogd,
            "fkm" => Algorithm::Fkm,
            "ftpl" => Algorithm::Ftpl,
            other => return Err(self.err("algorithm", format!("unknown algorithm '{other}'"))),
        };
        let stream = match self.required("stream")? {
            "uniform_alpha" => StreamKind::UniformAlphaFamily {
                a: self.pair("alpha_a", ALPHA_A_RANGE)?,
                b: self.pair("alpha_b", ALPHA_B_RANGE)?,
            },
            "scalar_lower_bound" => StreamKind::ScalarLowerBound,
            other => match other.strip_prefix("file:") {
                Some(p) => {
                    let path = PathBuf::from(p.trim());
                    // relative stream files resolve against the config's directory
                    let path = match self.origin.parent() {
                        Some(dir) if path.is_relative() => dir.join(path),
                        _ => path,
                    };
                    StreamKind::FromFile(path)
                }
                None => return Err(self.err("stream", format!("unknown stream '{other}'"))),
            },
        };
        let bounds = match (
            self.number::<f64>("kappa")?,
            self.number::<f64>("lambda_min")?,
        ) {
            (Some(kappa), Some(lambda_min)) => Some(TypeBounds { kappa, lambda_min }),
            (None, None) => None,
            _ => return Err(self.err("kappa", "kappa and lambda_min go together".into())),
        };

        let qs = self
            .matrix("qs")?
            .ok_or_else(|| self.err("qs", "missing".into()))?;
        let rs = self
            .matrix("rs")?
            .ok_or_else(|| self.err("rs", "missing".into()))?;
        let sigma0 = match self.matrix("sigma0")? {
            Some(m) => {
                let sym = SymMatrix::new(m).map_err(|e| self.err("sigma0", e.to_string()))?;
                Covariance::new(sym).map_err(|e| self.err("sigma0", e.to_string()))?
            }
            None => Covariance::identity(qs.ncols()),
        };
        let cost_kind = match self.get("cost").unwrap_or("entropy_smoothed") {
            "entropy_smoothed" => CostKind::EntropySmoothed,
            "none" => CostKind::None,
            other => return Err(self.err("cost", format!("unknown cost '{other}'"))),
        };
        let sender = SenderSpec::new(
            qs,
            rs,
            self.number("beta")?.unwrap_or(0.0),
            self.number("epsilon")?.unwrap_or(DEFAULT_EPSILON),
            sigma0,
            cost_kind,
        )
        .map_err(|e| self.err("qs", e.to_string()))?;

        let horizons = self
            .required("horizons")?
            .split(',')
            .map(|h| {
                h.trim()
                    .parse::<usize>()
                    .map_err(|_| self.err("horizons", format!("bad horizon '{h}'")))
            })
            .collect::<Result<Vec<_>>>()?;

        let ogd_step = match self.get("ogd_step") {
            None => None,
            Some("strongly_convex") => Some(StepRule::StronglyConvex),
            Some("linear") => Some(StepRule::Linear),
            Some(other) => return Err(self.err("ogd_step", format!("unknown rule '{other}'"))),
        };
        let cfg = ExperimentConfig {
            name: self.get("name").unwrap_or("experiment").to_string(),
            algorithm,
            stream,
            bounds,
            sender,
            horizons,
            n_trials: self.number("trials")?.unwrap_or(DEFAULT_TRIALS),
            seed: self.number("seed")?.unwrap_or(0),
            output_dir: self.get("output_dir").map(PathBuf::from),
            options: LearnerOptions {
                ogd_alpha: self.number("ogd_alpha")?,
                ogd_step,
                fkm_dimension_factor: self.number("fkm_dimension_factor")?,
                ftpl_rho: self.number("ftpl_rho")?,
                ftpl_samples: self.number("ftpl_samples")?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
