//! Subcommand implementations. Each returns the serialized report and the
//! process exit code; `Err` carries an input-error message for exit code 2.
//! Exit code 1 is reserved for validation failures: an expected verdict that
//! did not materialize, a failed fixture, or an equivalence violation.

use crate::experiment::{dispatch_check, run_equivalence_experiment, ExperimentConfig};
use crate::fixtures::run_fixture_suite;
use crate::schema::{
    check_schema, encode_partition, encode_verdict, parse_inner_norm, uniqueness_tag,
    InstanceFile, MatrixFile, PointsFile, SignalFile, VerdictReport, SCHEMA,
};
use nsp_core::family::{build_family, validate_family, FamilyInstance};
use nsp_core::linalg::{orthonormal_null_basis, InnerNorm};
use nsp_core::nsp::null_space_basis;
use nsp_core::polytope::{is_neighborly, is_outwardly_neighborly, PointSet};
use nsp_core::recovery::{check_unique_recovery, recover, SolverKind, UNIQUENESS_TOL};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;
use std::time::Instant;

pub type CmdResult = Result<(String, i32), String>;

fn to_json<T: Serialize>(t: &T) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("report types serialize");
    s.push('\n');
    s
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn crosscheck_setting(flag: Option<&str>, file_tag: &str) -> Result<(), String> {
    match flag {
        Some(tag) if tag != file_tag => Err(format!(
            "setting mismatch: flag says '{tag}', instance file says '{file_tag}'"
        )),
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckNspReport {
    pub schema: String,
    pub setting: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    pub order: usize,
    pub null_space_dim: usize,
    pub verdict: VerdictReport,
    pub elapsed_ms: f64,
}

pub fn check_nsp(
    setting: Option<&str>,
    order: usize,
    input: &Path,
    q: Option<&str>,
) -> CmdResult {
    let file: InstanceFile = read_json(input)?;
    crosscheck_setting(setting, &file.setting)?;
    let dec = file.decode(q)?;
    let t0 = Instant::now();
    let verdict = dispatch_check(&dec.setting, &dec.sensing, order)?;
    let nullity = null_space_basis(&dec.sensing)
        .map_err(|e| e.to_string())?
        .dim();
    let report = CheckNspReport {
        schema: SCHEMA.into(),
        setting: dec.tag,
        q: dec.q.map(|q| q.label().to_string()),
        order,
        null_space_dim: nullity,
        verdict: encode_verdict(&verdict),
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    };
    Ok((to_json(&report), 0))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct UniquenessSection {
    pub verdict: String,
    pub reference_objective: f64,
    pub distance_to_reference: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: String,
    pub setting: String,
    pub objective: f64,
    pub residual: f64,
    pub solver: String,
    pub iterations: usize,
    pub converged: bool,
    pub signal: SignalFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSection>,
    pub elapsed_ms: f64,
}

pub fn solve(
    setting: Option<&str>,
    input: &Path,
    q: Option<&str>,
    tol: Option<f64>,
) -> CmdResult {
    let file: InstanceFile = read_json(input)?;
    crosscheck_setting(setting, &file.setting)?;
    let dec = file.decode(q)?;
    let b = match (&dec.b, &dec.signal) {
        (Some(b), _) => b.clone(),
        (None, Some(x)) => dec.sensing.apply(x).map_err(|e| e.to_string())?,
        (None, None) => return Err("instance needs `b` or `signal` to solve".into()),
    };
    let t0 = Instant::now();
    let res = recover(&dec.setting, &dec.sensing, &b).map_err(|e| e.to_string())?;
    let uniqueness = match &dec.signal {
        Some(x0) => {
            let rep = check_unique_recovery(
                &dec.setting,
                &dec.sensing,
                x0,
                tol.unwrap_or(UNIQUENESS_TOL),
            )
            .map_err(|e| e.to_string())?;
            Some(UniquenessSection {
                verdict: uniqueness_tag(&rep.verdict).into(),
                reference_objective: dec.setting.objective(x0).map_err(|e| e.to_string())?,
                distance_to_reference: rep
                    .solution
                    .signal
                    .distance(x0)
                    .map_err(|e| e.to_string())?,
            })
        }
        None => None,
    };
    let report = SolveReport {
        schema: SCHEMA.into(),
        setting: dec.tag,
        objective: res.objective,
        residual: res.residual,
        solver: match res.diagnostics.solver {
            SolverKind::Simplex => "simplex".into(),
            SolverKind::Splitting => "splitting".into(),
        },
        iterations: res.diagnostics.iterations,
        converged: res.diagnostics.converged,
        signal: SignalFile::from_signal(&res.signal),
        uniqueness,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    };
    Ok((to_json(&report), 0))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyCheckReport {
    pub label: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FamilyCliReport {
    pub schema: String,
    pub m: usize,
    pub k: usize,
    pub s_star: usize,
    pub t_values: Vec<f64>,
    pub interior_point: Vec<f64>,
    pub partition: Vec<Vec<usize>>,
    pub null_space_dim: usize,
    pub normalized: bool,
    pub matrix: MatrixFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<FamilyCheckReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_passed: Option<bool>,
    pub elapsed_ms: f64,
}

fn parse_ts(ts: Option<&str>) -> Result<Option<Vec<f64>>, String> {
    match ts {
        None => Ok(None),
        Some(text) => {
            let vals: Result<Vec<f64>, _> = text
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect();
            vals.map(Some)
                .map_err(|e| format!("cannot parse --ts '{text}': {e}"))
        }
    }
}

fn family_rows(inst: &FamilyInstance, normalize: bool) -> Vec<Vec<f64>> {
    let a = &inst.a;
    let scale: Vec<f64> = (0..a.cols())
        .map(|j| {
            if !normalize {
                return 1.0;
            }
            let norm = (0..a.rows()).map(|i| a.get(i, j).powi(2)).sum::<f64>().sqrt();
            1.0 / norm
        })
        .collect();
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|j| a.get(i, j) * scale[j]).collect())
        .collect()
}

pub fn construct_family(
    m: usize,
    k: usize,
    ts: Option<&str>,
    validate: bool,
    normalize: bool,
) -> CmdResult {
    let ts_vec = parse_ts(ts)?;
    let t0 = Instant::now();
    let inst = build_family(m, k, ts_vec.as_deref()).map_err(|e| e.to_string())?;
    let (checks, all_passed) = if validate {
        let rep = validate_family(&inst).map_err(|e| e.to_string())?;
        let checks = rep
            .checks
            .iter()
            .map(|c| FamilyCheckReport {
                label: c.label.clone(),
                expected: c.expected.clone(),
                observed: c.observed.clone(),
                passed: c.passed,
            })
            .collect();
        (Some(checks), Some(rep.all_passed))
    } else {
        (None, None)
    };
    let report = FamilyCliReport {
        schema: SCHEMA.into(),
        m: inst.m,
        k: inst.k,
        s_star: inst.s_star,
        t_values: inst.t_values.clone(),
        interior_point: inst.interior_point.clone(),
        partition: encode_partition(&inst.partition),
        null_space_dim: orthonormal_null_basis(&inst.a).len(),
        normalized: normalize,
        matrix: MatrixFile {
            rows: family_rows(&inst, normalize),
        },
        checks,
        all_passed,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    };
    let code = if all_passed == Some(false) { 1 } else { 0 };
    Ok((to_json(&report), code))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NeighborlyReport {
    pub schema: String,
    pub points: usize,
    pub dim: usize,
    pub order: usize,
    pub outward: bool,
    pub neighborly: bool,
    pub elapsed_ms: f64,
}

pub fn check_neighborly(input: &Path, order: usize) -> CmdResult {
    let file: PointsFile = read_json(input)?;
    check_schema(&file.schema)?;
    let ps = PointSet::new(file.points.clone(), file.include_origin).map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let neighborly = if file.include_origin {
        is_outwardly_neighborly(&ps, order)
    } else {
        is_neighborly(&ps, order)
    }
    .map_err(|e| e.to_string())?;
    let report = NeighborlyReport {
        schema: SCHEMA.into(),
        points: file.points.len(),
        dim: ps.dim(),
        order,
        outward: file.include_origin,
        neighborly,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    };
    Ok((to_json(&report), 0))
}

#[allow(clippy::too_many_arguments)]
pub fn experiment(
    setting: Option<&str>,
    q: Option<&str>,
    order: usize,
    trials: usize,
    seed: u64,
    jobs: usize,
    measurements: Option<usize>,
    input: Option<&Path>,
) -> CmdResult {
    let q_norm = match q {
        Some(text) => parse_inner_norm(text)?,
        None => InnerNorm::One,
    };
    let (tag, fixed) = match input {
        Some(path) => {
            let file: InstanceFile = read_json(path)?;
            crosscheck_setting(setting, &file.setting)?;
            let dec = file.decode(q)?;
            (dec.tag.clone(), Some(dec))
        }
        None => {
            let tag = setting.ok_or("--setting is required without --in")?;
            (tag.to_string(), None)
        }
    };
    let cfg = ExperimentConfig {
        tag,
        q: q_norm,
        order,
        trials,
        seed,
        jobs: jobs.max(1),
        measurements: measurements.unwrap_or(6),
        fixed,
    };
    let report = run_equivalence_experiment(&cfg)?;
    let code = if report.violations() > 0 { 1 } else { 0 };
    Ok((to_json(&report), code))
}

pub fn fixtures() -> CmdResult {
    let suite = run_fixture_suite();
    let code = if suite.all_passed { 0 } else { 1 };
    Ok((to_json(&suite), code))
}
