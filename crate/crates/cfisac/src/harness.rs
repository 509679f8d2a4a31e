//! Experiment runner: single trials, Monte Carlo sweeps over network
//! parameters with paired seeds across methods, and CSV/JSON persistence.
//!
//! The core works entirely in linear units; decibel conversions happen only
//! here, on load and on emission. All records are `f64`.

use crate::error::{Error, Result};
use crate::fpmm::FpmmParams;
use crate::model::{assemble_sensing, comm_sinr_all, sum_sensing_sinr};
use crate::scenario::{generate_scenario, NetworkConfig};
use crate::selection::{
    select_comm_centric, select_exhaustive, select_joint, select_random, select_sensing_centric,
    CommRankingRule, SelectionResult,
};
use crate::units::{db_to_linear, linear_to_db};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Selection method identifiers used by the CLI and result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "cc")]
    CommCentric,
    #[serde(rename = "sc")]
    SensingCentric,
    #[serde(rename = "joint")]
    Joint,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl Method {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "cc" => Ok(Method::CommCentric),
            "sc" => Ok(Method::SensingCentric),
            "joint" => Ok(Method::Joint),
            "random" => Ok(Method::Random),
            "exhaustive" => Ok(Method::Exhaustive),
            other => Err(Error::InvalidArgument(format!(
                "unknown method '{other}' (expected cc|sc|joint|random|exhaustive)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::CommCentric => "cc",
            Method::SensingCentric => "sc",
            Method::Joint => "joint",
            Method::Random => "random",
            Method::Exhaustive => "exhaustive",
        }
    }
}

/// Trial outcome category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "infeasible")]
    Infeasible,
    #[serde(rename = "solver-fail")]
    SolverFail,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::SolverFail => "solver-fail",
        }
    }
}

/// One optimization run: inputs, outcome and summary numbers. The objective
/// fields are present exactly when the status is `ok`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub axis: String,
    pub value: f64,
    pub seed: u64,
    pub status: TrialStatus,
    pub objective: Option<f64>,
    pub objective_db: Option<f64>,
    pub comm_sinrs: Vec<f64>,
    pub mode_bits: String,
    pub rounds: usize,
    /// Wall-clock milliseconds; informational only and excluded from the
    /// deterministic CSV output.
    pub wall_ms: u64,
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "num_bs")]
    NumBs,
    #[serde(rename = "gamma_db")]
    GammaDb,
    #[serde(rename = "num_users")]
    NumUsers,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::NumBs => "num_bs",
            SweepAxis::GammaDb => "gamma_db",
            SweepAxis::NumUsers => "num_users",
        }
    }
}

/// A full experiment: one base config, one swept axis, a method set, and a
/// number of paired trials per point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(
        serialize_with = "serialize_config",
        deserialize_with = "deserialize_config"
    )]
    pub base: NetworkConfig<f64>,
    pub sweep_axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed0: u64,
}

fn serialize_config<S: serde::Serializer>(
    cfg: &NetworkConfig<f64>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let text = cfg
        .to_json_string()
        .map_err(serde::ser::Error::custom)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(serde::ser::Error::custom)?;
    value.serialize(ser)
}

fn deserialize_config<'de, D: serde::Deserializer<'de>>(
    de: D,
) -> std::result::Result<NetworkConfig<f64>, D::Error> {
    let value = serde_json::Value::deserialize(de)?;
    NetworkConfig::from_json_str(&value.to_string()).map_err(serde::de::Error::custom)
}

impl SweepSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one trial".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one method".into()));
        }
        for &value in &self.values {
            let cfg = self.config_at(value)?;
            if self.methods.contains(&Method::Exhaustive) && cfg.num_bs > 10 {
                return Err(Error::InvalidConfig(format!(
                    "exhaustive method requires J <= 10 on every sweep point, got {}",
                    cfg.num_bs
                )));
            }
        }
        Ok(())
    }

    /// Base config with the sweep axis set to the given value.
    pub fn config_at(&self, value: f64) -> Result<NetworkConfig<f64>> {
        let mut cfg = self.base.clone();
        match self.sweep_axis {
            SweepAxis::NumBs => {
                if value < 2.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "num_bs sweep value {value} is not an integer >= 2"
                    )));
                }
                cfg.num_bs = value as usize;
            }
            SweepAxis::GammaDb => {
                cfg.sinr_targets = vec![db_to_linear(value); cfg.num_users];
            }
            SweepAxis::NumUsers => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "num_users sweep value {value} is not a positive integer"
                    )));
                }
                let gamma = *cfg.sinr_targets.first().ok_or_else(|| {
                    Error::InvalidConfig("base config has no SINR target to broadcast".into())
                })?;
                cfg.num_users = value as usize;
                cfg.sinr_targets = vec![gamma; cfg.num_users];
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-point summary over the ok trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub value: f64,
    pub num_ok: usize,
    pub num_trials: usize,
    pub mean_objective: Option<f64>,
    pub std_error: Option<f64>,
    pub mean_objective_db: Option<f64>,
}

/// Records plus the aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

/// Runs one method on one drawn scenario. The objective is re-evaluated
/// through the model module from the returned mode, beamformer and filters.
/// Optimization failures are recorded in the status, never raised.
pub fn run_trial(config: &NetworkConfig<f64>, method: Method, seed: u64) -> Result<TrialRecord> {
    let scenario = generate_scenario(config, seed)?;
    let params = FpmmParams::default();
    let started = Instant::now();
    let outcome: Result<SelectionResult<f64>> = match method {
        Method::CommCentric => select_comm_centric(&scenario, CommRankingRule::default(), &params),
        Method::SensingCentric => select_sensing_centric(&scenario, &params),
        Method::Joint => select_joint(&scenario, &params),
        Method::Random => select_random(&scenario, seed, &params),
        Method::Exhaustive => select_exhaustive(&scenario, &params),
    };
    let wall_ms = started.elapsed().as_millis() as u64;

    let record = match outcome {
        Ok(result) => {
            let mats = assemble_sensing(&scenario, &result.mode)?;
            let objective = sum_sensing_sinr(&mats, &result.beamformer, &result.filters)?;
            let comm = comm_sinr_all(&scenario, &result.mode, &result.beamformer)?;
            TrialRecord {
                method,
                axis: "none".into(),
                value: 0.0,
                seed,
                status: TrialStatus::Ok,
                objective: Some(objective),
                objective_db: Some(linear_to_db(objective)),
                comm_sinrs: comm,
                mode_bits: result.mode.as_bit_string(),
                rounds: result.history.len(),
                wall_ms,
            }
        }
        Err(Error::InfeasibleConstraints(_)) | Err(Error::ModeInfeasible(_)) => TrialRecord {
            method,
            axis: "none".into(),
            value: 0.0,
            seed,
            status: TrialStatus::Infeasible,
            objective: None,
            objective_db: None,
            comm_sinrs: Vec::new(),
            mode_bits: String::new(),
            rounds: 0,
            wall_ms,
        },
        Err(_) => TrialRecord {
            method,
            axis: "none".into(),
            value: 0.0,
            seed,
            status: TrialStatus::SolverFail,
            objective: None,
            objective_db: None,
            comm_sinrs: Vec::new(),
            mode_bits: String::new(),
            rounds: 0,
            wall_ms,
        },
    };
    Ok(record)
}

/// Runs the full cartesian product of values, methods and trials. The seed
/// of trial `t` is `seed0 + t` for every method and sweep value, so methods
/// are compared on identical scenarios. Trials run on up to `workers`
/// threads (0 picks the rayon default); records are sorted by
/// (method, value, seed) before aggregation so the output is deterministic.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (vi, &value) in spec.values.iter().enumerate() {
        let config = spec.config_at(value)?;
        for &method in &spec.methods {
            for t in 0..spec.trials {
                jobs.push((vi, value, config.clone(), method, spec.seed0 + t as u64));
            }
        }
    }

    let run_all = || -> Result<Vec<TrialRecord>> {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(_, value, config, method, seed)| {
                let mut record = run_trial(config, *method, *seed)?;
                record.axis = spec.sweep_axis.as_str().into();
                record.value = *value;
                Ok(record)
            })
            .collect()
    };
    let mut records = if workers == 0 {
        run_all()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::SolverFailure(format!("worker pool: {e}")))?;
        pool.install(run_all)?
    };

    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.value.total_cmp(&b.value))
            .then(a.seed.cmp(&b.seed))
    });

    let mut aggregates = Vec::new();
    for &method in &spec.methods {
        for &value in &spec.values {
            let point: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == method && r.value == value)
                .collect();
            let oks: Vec<f64> = point.iter().filter_map(|r| r.objective).collect();
            let n = oks.len();
            let (mean, se, mean_db) = if n > 0 {
                let mean = oks.iter().sum::<f64>() / n as f64;
                let var = if n > 1 {
                    oks.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
                } else {
                    0.0
                };
                (
                    Some(mean),
                    Some((var / n as f64).sqrt()),
                    Some(linear_to_db(mean)),
                )
            } else {
                (None, None, None)
            };
            aggregates.push(Aggregate {
                method,
                value,
                num_ok: n,
                num_trials: point.len(),
                mean_objective: mean,
                std_error: se,
                mean_objective_db: mean_db,
            });
        }
    }
    Ok(SweepResult { records, aggregates })
}

/// Nine significant digits, `.` decimal separator.
fn format_sig9(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// The CSV view of the records. The wall_ms column is pinned to zero so
/// identical invocations produce byte-identical files; real timings live in
/// the JSON document.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("method,axis,value,seed,status,objective_db,rounds,wall_ms,mode_bits\n");
    for r in records {
        let objective_db = r.objective_db.map(format_sig9).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},0,{}\n",
            r.method.as_str(),
            r.axis,
            format_sig9(r.value),
            r.seed,
            r.status.as_str(),
            objective_db,
            r.rounds,
            r.mode_bits
        ));
    }
    out
}

/// Output format of [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    Both,
}

impl EmitFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            "both" => Ok(EmitFormat::Both),
            other => Err(Error::InvalidArgument(format!(
                "unknown format '{other}' (expected csv|json|both)"
            ))),
        }
    }
}

/// Writes `results.csv` and/or `results.json` into the directory and
/// returns the written paths.
pub fn emit_results(
    result: &SweepResult,
    dir: impl AsRef<Path>,
    format: EmitFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if matches!(format, EmitFormat::Csv | EmitFormat::Both) {
        let path = dir.join("results.csv");
        std::fs::write(&path, records_to_csv(&result.records))?;
        written.push(path);
    }
    if matches!(format, EmitFormat::Json | EmitFormat::Both) {
        let path = dir.join("results.json");
        std::fs::write(&path, serde_json::to_string_pretty(result)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_and_format_parsing() {
        assert_eq!(Method::parse("joint").unwrap(), Method::Joint);
        assert!(Method::parse("bogus").is_err());
        assert_eq!(EmitFormat::parse("both").unwrap(), EmitFormat::Both);
        assert!(EmitFormat::parse("yaml").is_err());
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(1.0), "1.00000000e0");
        assert_eq!(format_sig9(-0.012345678949), "-1.23456789e-2");
        assert_eq!(format_sig9(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn config_at_applies_axis() {
        let spec = SweepSpec {
            base: NetworkConfig::desk_scale(),
            sweep_axis: SweepAxis::GammaDb,
            values: vec![4.0, 8.0],
            methods: vec![Method::Random],
            trials: 1,
            seed0: 0,
        };
        let cfg = spec.config_at(4.0).unwrap();
        assert!((cfg.sinr_targets[0] - db_to_linear(4.0)).abs() < 1e-12);

        let spec = SweepSpec {
            sweep_axis: SweepAxis::NumUsers,
            values: vec![2.0],
            ..spec
        };
        let cfg = spec.config_at(2.0).unwrap();
        assert_eq!(cfg.num_users, 2);
        assert_eq!(cfg.sinr_targets.len(), 2);
        assert!(spec.config_at(2.5).is_err());

        let spec = SweepSpec {
            sweep_axis: SweepAxis::NumBs,
            values: vec![4.0],
            ..spec
        };
        assert_eq!(spec.config_at(4.0).unwrap().num_bs, 4);
    }

    #[test]
    fn exhaustive_guard_in_spec_validation() {
        let spec = SweepSpec {
            base: NetworkConfig::desk_scale(),
            sweep_axis: SweepAxis::NumBs,
            values: vec![8.0, 12.0],
            methods: vec![Method::Exhaustive],
            trials: 1,
            seed0: 0,
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn csv_row_count_and_empty_list() {
        let empty = records_to_csv(&[]);
        assert_eq!(empty.lines().count(), 1);
        assert!(empty.starts_with("method,axis,value,seed,status,objective_db,rounds,wall_ms,mode_bits"));
    }
}
