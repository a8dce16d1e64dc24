//! Scenario files (JSON) and CSV output.
//!
//! A scenario document looks like
//!
//! ```json
//! {
//!   "model": "imperfect",
//!   "n": 2,
//!   "g": 1.0,
//!   "epsilon": 0.1,
//!   "c": [[0.7071067811865476, 0], [0.7071067811865476, 0]],
//!   "grid": { "t0": 0, "t1": 1.5707963267948966, "points": 201 },
//!   "sampling": { "t": 0.7853981633974483, "trials": 100000, "seed": 42 }
//! }
//! ```
//!
//! `epsilon` defaults to 0, `grid.points` to 201, and `sampling` is optional.
//! Complex coefficients are `[re, im]` pairs. Reals in CSV output carry 17
//! significant digits so they parse back to the identical `f64`.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TimeGrid, TimingTrajectory};
use crate::error::Error;
use crate::hilbert::StateVector;
use crate::measurement::{build_imperfect_model, build_rotation_model, MeasurementModel};
use crate::operational::{EstimateReport, TrialRecord};
use crate::tolerance;

pub const DEFAULT_GRID_POINTS: usize = 201;

/// Joint dimension `n (n + 1)` stays within 64 for dense matrices.
pub const MAX_OUTCOMES: usize = 7;
pub const MAX_GRID_POINTS: usize = 1_000_000;
pub const MAX_TRIALS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    fn validation(field: &str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Rotation,
    Imperfect,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Rotation => write!(f, "rotation"),
            ModelKind::Imperfect => write!(f, "imperfect"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub model_kind: ModelKind,
    pub n_outcomes: usize,
    pub coupling_g: f64,
    pub epsilon: f64,
    /// Normalized initial system coefficients `c_i`.
    pub initial_coefficients: Vec<C64>,
    pub grid: TimeGrid,
    pub sampling: Option<SamplingSpec>,
}

impl ScenarioSpec {
    pub fn build_model(&self) -> Result<MeasurementModel, Error> {
        match self.model_kind {
            ModelKind::Rotation => build_rotation_model(self.n_outcomes, self.coupling_g),
            ModelKind::Imperfect => build_imperfect_model(self.n_outcomes, self.coupling_g, self.epsilon),
        }
    }

    /// `(Σ c_i |a_i⟩) ⊗ |init⟩` for `model`.
    pub fn initial_state(&self, model: &MeasurementModel) -> Result<StateVector, Error> {
        model.initial_state(&self.initial_coefficients)
    }

    pub fn to_json(&self) -> String {
        let raw = RawScenario {
            model: self.model_kind,
            n: self.n_outcomes,
            g: self.coupling_g,
            epsilon: Some(self.epsilon),
            c: self.initial_coefficients.iter().map(|z| [z.re, z.im]).collect(),
            grid: RawGrid {
                t0: self.grid.t_start(),
                t1: self.grid.t_end(),
                points: self.grid.n_points(),
            },
            sampling: self.sampling.map(|s| RawSampling {
                t: s.t,
                trials: s.trials,
                seed: s.seed,
            }),
        };
        serde_json::to_string_pretty(&raw).expect("scenario serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    model: ModelKind,
    n: usize,
    g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    c: Vec<[f64; 2]>,
    grid: RawGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sampling: Option<RawSampling>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t0: f64,
    t1: f64,
    #[serde(default = "default_points")]
    points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    t: f64,
    trials: usize,
    seed: u64,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ScenarioError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawScenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Parse {
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        field: ".".into(),
        message: e.to_string(),
    })?;
    validate(raw)
}

fn validate(raw: RawScenario) -> Result<ScenarioSpec, ScenarioError> {
    if raw.n < 2 {
        return Err(ScenarioError::validation("n", format!("need at least 2 outcomes, got {}", raw.n)));
    }
    if raw.n > MAX_OUTCOMES {
        return Err(ScenarioError::validation(
            "n",
            format!("at most {MAX_OUTCOMES} outcomes are supported, got {}", raw.n),
        ));
    }
    if !(raw.g.is_finite() && raw.g > 0.0) {
        return Err(ScenarioError::validation("g", format!("coupling must be positive, got {}", raw.g)));
    }
    let epsilon = raw.epsilon.unwrap_or(0.0);
    if !(0.0..1.0).contains(&epsilon) {
        return Err(ScenarioError::validation("epsilon", format!("must lie in [0, 1), got {epsilon}")));
    }
    if raw.model == ModelKind::Rotation && epsilon != 0.0 {
        return Err(ScenarioError::validation(
            "epsilon",
            "only the imperfect model takes a nonzero epsilon",
        ));
    }

    if raw.c.len() != raw.n {
        return Err(ScenarioError::validation(
            "c",
            format!("expected {} coefficients, got {}", raw.n, raw.c.len()),
        ));
    }
    let mut coefficients: Vec<C64> = raw.c.iter().map(|&[re, im]| C64::new(re, im)).collect();
    if coefficients.iter().any(|z| !z.is_finite()) {
        return Err(ScenarioError::validation("c", "coefficients must be finite"));
    }
    let norm = coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tolerance::COEFFICIENT_RENORMALIZE {
        return Err(ScenarioError::validation(
            "c",
            format!("coefficient norm {norm} is not 1 within {}", tolerance::COEFFICIENT_RENORMALIZE),
        ));
    }
    if (norm - 1.0).abs() > 4.0 * f64::EPSILON {
        log::info!("renormalizing initial coefficients by factor {}", 1.0 / norm);
        for z in &mut coefficients {
            *z /= norm;
        }
    }

    if raw.grid.points > MAX_GRID_POINTS {
        return Err(ScenarioError::validation(
            "grid.points",
            format!("at most {MAX_GRID_POINTS} points, got {}", raw.grid.points),
        ));
    }
    let grid = TimeGrid::new(raw.grid.t0, raw.grid.t1, raw.grid.points)
        .map_err(|e| ScenarioError::validation("grid", e.to_string()))?;

    let sampling = match raw.sampling {
        None => None,
        Some(s) => {
            if !s.t.is_finite() {
                return Err(ScenarioError::validation("sampling.t", "must be finite"));
            }
            if s.trials == 0 || s.trials > MAX_TRIALS {
                return Err(ScenarioError::validation(
                    "sampling.trials",
                    format!("must lie in 1..={MAX_TRIALS}, got {}", s.trials),
                ));
            }
            Some(SamplingSpec {
                t: s.t,
                trials: s.trials,
                seed: s.seed,
            })
        }
    };

    Ok(ScenarioSpec {
        model_kind: raw.model,
        n_outcomes: raw.n,
        coupling_g: raw.g,
        epsilon,
        initial_coefficients: coefficients,
        grid,
        sampling,
    })
}

/// Shortest-form rendering with 17 significant digits, like C's `%.17g`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..17).contains(&exponent) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (16 - exponent) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `t,P,p` with one row per grid point.
pub fn emit_trajectory_csv(traj: &TimingTrajectory) -> String {
    let mut out = String::from("t,P,p\n");
    for ((t, p_cum), p_rate) in traj.grid().times().zip(traj.probability()).zip(traj.density()) {
        out.push_str(&format!("{},{},{}\n", format_real(t), format_real(*p_cum), format_real(*p_rate)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub probability: f64,
    pub density: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
}

fn check_header(reader: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), CsvError> {
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(CsvError::Header {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(())
}

pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, CsvError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut reader, &["t", "P", "p"])?;
    reader
        .deserialize::<(f64, f64, f64)>()
        .map(|row| {
            let (t, probability, density) = row?;
            Ok(TrajectoryRow { t, probability, density })
        })
        .collect()
}

const REPORT_HEADER: [&str; 6] = ["t", "trials", "case1", "estimate", "std_error", "exact_P"];

/// `t,trials,case1,estimate,std_error,exact_P` with a single row.
pub fn emit_report_csv(report: &EstimateReport) -> String {
    format!(
        "{}\n{},{},{},{},{},{}\n",
        REPORT_HEADER.join(","),
        format_real(report.t),
        report.n_trials,
        report.case1_count,
        format_real(report.estimate),
        format_real(report.std_error),
        format_real(report.exact_p),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t: f64,
    pub trials: usize,
    pub case1: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub exact_p: f64,
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>, CsvError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut reader, &REPORT_HEADER)?;
    reader
        .deserialize::<(f64, usize, usize, f64, f64, f64)>()
        .map(|row| {
            let (t, trials, case1, estimate, std_error, exact_p) = row?;
            Ok(ReportRow { t, trials, case1, estimate, std_error, exact_p })
        })
        .collect()
}

/// `t,q,pointer,case1`, one row per trial; `q` is zero-based and `pointer` is
/// `init`, `O<j>` (one-based) or `residual`.
pub fn emit_trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("t,q,pointer,case1\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_real(r.t),
            r.q_outcome,
            r.pointer_outcome,
            u8::from(r.case1)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const MINIMAL: &str = r#"{"model":"rotation","n":2,"g":1.0,
        "c":[[0.7071,0],[0.7071,0]],
        "grid":{"t0":0,"t1":1.5708,"points":201}}"#;

    #[test]
    fn minimal_document() {
        let spec = parse_scenario(MINIMAL).unwrap();
        assert_eq!(spec.model_kind, ModelKind::Rotation);
        assert_eq!(spec.n_outcomes, 2);
        assert_eq!(spec.epsilon, 0.0);
        assert_eq!(spec.grid.n_points(), 201);
        assert!(spec.grid.t_end() >= FRAC_PI_2 - 1e-4);
        assert!(spec.sampling.is_none());
        let norm: f64 = spec.initial_coefficients.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn defaults_apply() {
        let spec = parse_scenario(r#"{"model":"imperfect","n":3,"g":2,"epsilon":0.2,
            "c":[[1,0],[0,0],[0,0]],"grid":{"t0":0,"t1":1}}"#)
        .unwrap();
        assert_eq!(spec.grid.n_points(), DEFAULT_GRID_POINTS);
        assert_eq!(spec.epsilon, 0.2);
        assert_eq!(spec.initial_coefficients[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn unnormalized_coefficients_rejected() {
        let text = MINIMAL.replace("0.7071,0],[0.7071", "1,0],[1");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::Validation { field, .. }) if field == "c"
        ));
    }

    #[test]
    fn validation_errors_name_the_field() {
        let cases = [
            (MINIMAL.replace("\"n\":2", "\"n\":1"), "n"),
            (MINIMAL.replace("\"g\":1.0", "\"g\":0"), "g"),
            (MINIMAL.replace("\"g\":1.0", "\"g\":-2"), "g"),
            (MINIMAL.replace("\"g\":1.0", "\"g\":1.0,\"epsilon\":0.1"), "epsilon"),
            (MINIMAL.replace("rotation", "imperfect").replace("\"g\":1.0", "\"g\":1.0,\"epsilon\":1.0"), "epsilon"),
            (MINIMAL.replace("\"points\":201", "\"points\":1"), "grid"),
            (MINIMAL.replace("\"t1\":1.5708", "\"t1\":0"), "grid"),
            (MINIMAL.replace("[[0.7071,0],[0.7071,0]]", "[[1,0]]"), "c"),
            (MINIMAL.replace("}}", "},\"sampling\":{\"t\":1,\"trials\":0,\"seed\":1}}"), "sampling.trials"),
        ];
        for (text, field) in cases {
            match parse_scenario(&text) {
                Err(ScenarioError::Validation { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("expected validation error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let unknown = MINIMAL.replace("\"n\":2", "\"n\":2,\"colour\":\"red\"");
        match parse_scenario(&unknown) {
            Err(ScenarioError::Parse { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
        let wrong_type = MINIMAL.replace("\"points\":201", "\"points\":\"many\"");
        match parse_scenario(&wrong_type) {
            Err(ScenarioError::Parse { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "grid.points");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scenario("{"), Err(ScenarioError::Parse { .. })));
        assert!(matches!(parse_scenario(""), Err(ScenarioError::Parse { .. })));
        assert!(matches!(parse_scenario(&format!("{MINIMAL} 1")), Err(ScenarioError::Parse { .. })));
        assert!(matches!(
            parse_scenario(&MINIMAL.replace("rotation", "spiral")),
            Err(ScenarioError::Parse { .. })
        ));
    }

    #[test]
    fn serialize_round_trip() {
        let spec = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&spec.to_json()).unwrap();
        assert_eq!(spec, again);

        let with_sampling = MINIMAL.replace("}}", "},\"sampling\":{\"t\":0.5,\"trials\":10,\"seed\":18446744073709551615}}");
        let spec = parse_scenario(&with_sampling).unwrap();
        assert_eq!(spec.sampling.unwrap().seed, u64::MAX);
        assert_eq!(parse_scenario(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.0), "1");
        assert_eq!(format_real(-2.5), "-2.5");
        assert_eq!(format_real(PI), "3.1415926535897931");
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_real(1.5e20), "1.5e+20");
        assert_eq!(format_real(6.123233995736766e-17), "6.123233995736766e-17");
        for x in [PI, 0.1, 1e-300, -7.25e-9, 123456789.123, f64::MAX, f64::MIN_POSITIVE] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn report_csv_round_trip() {
        let report = EstimateReport {
            t: 0.785,
            n_trials: 10,
            case1_count: 4,
            estimate: 0.4,
            std_error: (0.24f64 / 10.0).sqrt(),
            exact_p: 0.5,
            rng_algorithm: crate::operational::RNG_ALGORITHM,
            seed: 1,
        };
        let rows = parse_report_csv(&emit_report_csv(&report)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].std_error, report.std_error);
        assert_eq!(rows[0].case1, 4);
        assert!(matches!(parse_trajectory_csv("a,b\n1,2\n"), Err(CsvError::Header { .. })));
    }
}
