//! Receiver-type streams: the uniform `(α_A, α_B)` family, the scalar
//! two-point instance behind the `√T` lower bound, and streams read from
//! text files.
//!
//! File format, one receiver per line, `#` starts a comment:
//!
//! ```text
//! Q=1,2.5,3.75;1x3 R=-1;1x1
//! ```
//!
//! Matrices are row-major comma-separated entries followed by `;RxC`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{ReceiverType, TypeBounds, SINGULAR_FLOOR};

pub const ALPHA_A_RANGE: (f64, f64) = (0.1, 4.1);
pub const ALPHA_B_RANGE: (f64, f64) = (0.2, 4.2);

#[derive(Clone, Debug, PartialEq)]
pub enum StreamKind {
    /// `Q = [1, α_A, α_B]`, `R = [−1]` with `α_A ~ U[a]`, `α_B ~ U[b]`.
    UniformAlphaFamily { a: (f64, f64), b: (f64, f64) },
    /// `d = 1`, `R = −1`, `Q ∈ {1, 1+√2}` uniformly.
    ScalarLowerBound,
    /// Receivers listed in a stream file, used in order.
    FromFile(PathBuf),
}

impl StreamKind {
    pub fn alpha_family() -> Self {
        StreamKind::UniformAlphaFamily {
            a: ALPHA_A_RANGE,
            b: ALPHA_B_RANGE,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamSpec {
    pub kind: StreamKind,
    pub horizon: usize,
    pub seed: u64,
    /// Overrides the bounds implied by `kind`.
    pub bounds: Option<TypeBounds>,
}

impl StreamSpec {
    pub fn new(kind: StreamKind, horizon: usize, seed: u64) -> Self {
        Self {
            kind,
            horizon,
            seed,
            bounds: None,
        }
    }

    /// Bounds every receiver of the stream is validated against.
    pub fn type_bounds(&self) -> Result<TypeBounds> {
        if let Some(b) = self.bounds {
            return Ok(b);
        }
        match &self.kind {
            StreamKind::UniformAlphaFamily { a, b } => Ok(alpha_family_bounds(*a, *b)),
            StreamKind::ScalarLowerBound => Ok(TypeBounds {
                kappa: 1.0 + std::f64::consts::SQRT_2,
                lambda_min: 1.0,
            }),
            StreamKind::FromFile(path) => Ok(observed_bounds(&read_stream_file(path)?)),
        }
    }

    /// The stream, validated. A function of the spec alone.
    pub fn generate(&self) -> Result<Vec<ReceiverType>> {
        if self.horizon == 0 {
            return Err(Error::InvalidInput(
                "stream horizon must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let stream = match &self.kind {
            StreamKind::UniformAlphaFamily { a, b } => {
                check_range(*a)?;
                check_range(*b)?;
                alpha_family_stream(self.horizon, *a, *b, &mut rng)
            }
            StreamKind::ScalarLowerBound => scalar_lower_bound_stream(self.horizon, &mut rng),
            StreamKind::FromFile(path) => {
                let mut all = read_stream_file(path)?;
                if all.len() < self.horizon {
                    return Err(Error::InvalidInput(format!(
                        "{} lists {} receivers, horizon is {}",
                        path.display(),
                        all.len(),
                        self.horizon
                    )));
                }
                all.truncate(self.horizon);
                all
            }
        };
        validate_stream(&stream, &self.type_bounds()?)?;
        Ok(stream)
    }
}

fn check_range((lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "degenerate range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `κ = √(1 + a_hi² + b_hi²)` (largest `||Q||_F`), `λ_min = 1`.
pub fn alpha_family_bounds(a: (f64, f64), b: (f64, f64)) -> TypeBounds {
    let top_a = a.0.abs().max(a.1.abs());
    let top_b = b.0.abs().max(b.1.abs());
    TypeBounds {
        kappa: (1.0 + top_a * top_a + top_b * top_b).sqrt().max(1.0),
        lambda_min: 1.0,
    }
}

/// Tightest bounds satisfied by `stream`.
pub fn observed_bounds(stream: &[ReceiverType]) -> TypeBounds {
    let kappa = stream
        .iter()
        .map(|t| t.q().norm().max(t.r().norm()))
        .fold(0.0, f64::max);
    let lambda_min = stream
        .iter()
        .map(|t| t.gram_min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    TypeBounds { kappa, lambda_min }
}

/// Rejects the first receiver outside `bounds` or with a singular `RᵀR`.
pub fn validate_stream(stream: &[ReceiverType], bounds: &TypeBounds) -> Result<()> {
    let d = stream.first().map(|t| t.state_dim());
    for (index, t) in stream.iter().enumerate() {
        if Some(t.state_dim()) != d || t.action_dim() != stream[0].action_dim() {
            return Err(Error::InvalidType {
                index,
                reason: "dimensions differ from the first receiver".into(),
            });
        }
        if t.gram_min_eigenvalue() < SINGULAR_FLOOR {
            return Err(Error::InvalidType {
                index,
                reason: "RᵀR is singular".into(),
            });
        }
        t.validate(bounds).map_err(|e| Error::InvalidType {
            index,
            reason: e.to_string(),
        })?;
    }
    Ok(())
}

fn alpha_type(a: f64, b: f64) -> ReceiverType {
    ReceiverType::new(
        DMatrix::from_row_slice(1, 3, &[1.0, a, b]),
        DMatrix::from_element(1, 1, -1.0),
    )
    .expect("finite 1x3 / 1x1 receiver")
}

/// `T` receivers of the default family: `α_A ~ U[0.1, 4.1]`,
/// `α_B ~ U[0.2, 4.2]`.
pub fn uniform_alpha_stream<R: Rng + ?Sized>(horizon: usize, rng: &mut R) -> Vec<ReceiverType> {
    alpha_family_stream(horizon, ALPHA_A_RANGE, ALPHA_B_RANGE, rng)
}

pub fn alpha_family_stream<R: Rng + ?Sized>(
    horizon: usize,
    a: (f64, f64),
    b: (f64, f64),
    rng: &mut R,
) -> Vec<ReceiverType> {
    (0..horizon)
        .map(|_| {
            let alpha_a = rng.random_range(a.0..=a.1);
            let alpha_b = rng.random_range(b.0..=b.1);
            alpha_type(alpha_a, alpha_b)
        })
        .collect()
}

/// Scalar receivers with `Q ∈ {1, 1+√2}`; against `Q_s = 1`, `R_s = −1`
/// they give `V = −1` and `V = 1`.
pub fn scalar_lower_bound_stream<R: Rng + ?Sized>(
    horizon: usize,
    rng: &mut R,
) -> Vec<ReceiverType> {
    (0..horizon)
        .map(|_| {
            let q = if rng.random::<bool>() {
                1.0 + std::f64::consts::SQRT_2
            } else {
                1.0
            };
            ReceiverType::new(
                DMatrix::from_element(1, 1, q),
                DMatrix::from_element(1, 1, -1.0),
            )
            .expect("finite scalar receiver")
        })
        .collect()
}

/// `a,b,c;RxC` in row-major order. Entries use the shortest
/// representation that parses back to the same `f64`.
pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !out.is_empty() {
                out.push(',');
            }
            write!(out, "{}", m[(i, j)]).unwrap();
        }
    }
    write!(out, ";{}x{}", m.nrows(), m.ncols()).unwrap();
    out
}

pub fn parse_matrix(s: &str) -> std::result::Result<DMatrix<f64>, String> {
    let (entries, shape) = s
        .split_once(';')
        .ok_or_else(|| format!("missing ';RxC' shape in '{s}'"))?;
    let (r, c) = shape
        .split_once('x')
        .ok_or_else(|| format!("shape '{shape}' is not RxC"))?;
    let rows: usize = r
        .trim()
        .parse()
        .map_err(|_| format!("bad row count '{r}'"))?;
    let cols: usize = c
        .trim()
        .parse()
        .map_err(|_| format!("bad column count '{c}'"))?;
    let values = entries
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number '{x}'"))
        })
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if rows == 0 || cols == 0 || values.len() != rows * cols {
        return Err(format!(
            "{} entries do not fill a {rows}x{cols} matrix",
            values.len()
        ));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err("non-finite entry".into());
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn format_receiver(t: &ReceiverType) -> String {
    format!("Q={} R={}", format_matrix(t.q()), format_matrix(t.r()))
}

fn parse_receiver(line: &str) -> std::result::Result<ReceiverType, String> {
    let mut q = None;
    let mut r = None;
    for field in line.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("field '{field}' is not KEY=VALUE"))?;
        let slot = match key {
            "Q" => &mut q,
            "R" => &mut r,
            other => return Err(format!("unknown field '{other}'")),
        };
        if slot.is_some() {
            return Err(format!("duplicate field '{key}'"));
        }
        *slot = Some(parse_matrix(value)?);
    }
    let q = q.ok_or("missing Q")?;
    let r = r.ok_or("missing R")?;
    ReceiverType::new(q, r).map_err(|e| e.to_string())
}

/// Parses a stream file without validating bounds.
pub fn read_stream_file(path: &Path) -> Result<Vec<ReceiverType>> {
    let text = crate::error::read_text(path)?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let t = parse_receiver(line).map_err(|message| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?;
        out.push(t);
    }
    if out.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            line: text.lines().count().max(1),
            message: "no receiver records".into(),
        });
    }
    Ok(out)
}

/// Reads a stream file and validates every receiver against its own
/// observed dimensions and `bounds` (when given).
pub fn stream_from_file(path: &Path, bounds: Option<&TypeBounds>) -> Result<Vec<ReceiverType>> {
    let stream = read_stream_file(path)?;
    let b = bounds.copied().unwrap_or_else(|| observed_bounds(&stream));
    validate_stream(&stream, &b)?;
    Ok(stream)
}

pub fn write_stream_file(path: &Path, stream: &[ReceiverType]) -> Result<()> {
    let mut text = String::new();
    for t in stream {
        text.push_str(&format_receiver(t));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{self, CostKind, SenderSpec};
    use crate::matcore::Covariance;

    fn scalar_sender() -> SenderSpec {
        SenderSpec::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, -1.0),
            0.0,
            0.01,
            Covariance::identity(1),
            CostKind::None,
        )
        .unwrap()
    }

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("persuade-adv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn streams_are_reproducible() {
        for kind in [StreamKind::alpha_family(), StreamKind::ScalarLowerBound] {
            let spec = StreamSpec::new(kind, 50, 17);
            assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
            let other = StreamSpec {
                seed: 18,
                ..spec.clone()
            };
            assert_ne!(spec.generate().unwrap(), other.generate().unwrap());
        }
    }

    #[test]
    fn alpha_draws_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in uniform_alpha_stream(10_000, &mut rng) {
            let q = t.q();
            assert_eq!(q[(0, 0)], 1.0);
            assert!((0.1..=4.1).contains(&q[(0, 1)]));
            assert!((0.2..=4.2).contains(&q[(0, 2)]));
            assert_eq!(t.r()[(0, 0)], -1.0);
        }
    }

    #[test]
    fn alpha_a_mean_matches_uniform() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mean = uniform_alpha_stream(n, &mut rng)
            .iter()
            .map(|t| t.q()[(0, 1)])
            .sum::<f64>()
            / n as f64;
        let se = 4.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 2.1).abs() <= 3.0 * se, "{mean}");
    }

    #[test]
    fn generated_types_respect_family_bounds() {
        let spec = StreamSpec::new(StreamKind::alpha_family(), 2000, 3);
        let bounds = spec.type_bounds().unwrap();
        for t in spec.generate().unwrap() {
            t.validate(&bounds).unwrap();
            assert!(t.gram_min_eigenvalue() >= bounds.lambda_min);
        }
    }

    #[test]
    fn scalar_instance_gives_unit_v() {
        let sender = scalar_sender();
        let v = |q: f64| {
            let t = ReceiverType::new(
                DMatrix::from_element(1, 1, q),
                DMatrix::from_element(1, 1, -1.0),
            )
            .unwrap();
            game::compute_v(&t, &sender).unwrap().get(0, 0)
        };
        assert_eq!(v(1.0), -1.0);
        assert!((v(1.0 + std::f64::consts::SQRT_2) - 1.0).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn scalar_instance_is_a_fair_coin() {
        let n = 100_000;
        let sender = scalar_sender();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ups = scalar_lower_bound_stream(n, &mut rng)
            .iter()
            .filter(|t| game::compute_v(t, &sender).unwrap().get(0, 0) > 0.0)
            .count();
        let freq = ups as f64 / n as f64;
        let se = 0.5 / (n as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * se, "{freq}");
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let path = temp_path("round_trip.txt");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let stream = uniform_alpha_stream(100, &mut rng);
        write_stream_file(&path, &stream).unwrap();
        let back = stream_from_file(&path, None).unwrap();
        assert_eq!(back, stream);
    }

    #[test]
    fn empty_file_is_a_format_error() {
        let path = temp_path("empty.txt");
        std::fs::write(&path, "# nothing here\n\n").unwrap();
        assert!(matches!(
            stream_from_file(&path, None),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn single_record_with_comments() {
        let path = temp_path("single.txt");
        std::fs::write(
            &path,
            "# one receiver\nQ=1,2,3;1x3   R=-1;1x1  # trailing\n",
        )
        .unwrap();
        let s = stream_from_file(&path, None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].q()[(0, 2)], 3.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let path = temp_path("bad.txt");
        std::fs::write(&path, "Q=1,2,3;1x3 R=-1;1x1\n\nQ=1,2;1x3 R=-1;1x1\n").unwrap();
        match stream_from_file(&path, None) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "Q=1;1x1 R=-1;1x1 S=2;1x1\n").unwrap();
        assert!(matches!(
            stream_from_file(&path, None),
            Err(Error::Format { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_bounds_receiver_is_rejected_by_index() {
        let path = temp_path("bounds.txt");
        std::fs::write(&path, "Q=1,1;1x2 R=-1;1x1\nQ=1,9;1x2 R=-1;1x1\n").unwrap();
        let bounds = TypeBounds {
            kappa: 2.0,
            lambda_min: 1.0,
        };
        match stream_from_file(&path, Some(&bounds)) {
            Err(Error::InvalidType { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "Q=1,1;1x2 R=0;1x1\n").unwrap();
        assert!(matches!(
            stream_from_file(&path, None),
            Err(Error::InvalidType { index: 0, .. })
        ));
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, -2.5e-17, 1.0 / 3.0, 7.0]);
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        assert!(parse_matrix("1,2;2x2").is_err());
        assert!(parse_matrix("1,2").is_err());
        assert!(parse_matrix("1,x;1x2").is_err());
    }

    #[test]
    fn degenerate_family_range_is_rejected() {
        let spec = StreamSpec::new(
            StreamKind::UniformAlphaFamily {
                a: (1.0, 1.0),
                b: ALPHA_B_RANGE,
            },
            10,
            0,
        );
        assert!(spec.generate().is_err());
    }
}
