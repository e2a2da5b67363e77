//! Equivalence experiments between certified verdicts and sampled recovery.
//!
//! Each trial either draws a fresh standard-normal operator (random mode) or
//! reuses a fixed instance (when the caller supplies one). A trial is
//! consistent when an exact holds verdict comes with a sampled in-cone
//! signal that is recovered uniquely, and an exact fails verdict comes with
//! a witness-derived signal that is not. Everything else is tallied as
//! inconclusive, never as a violation.
//!
//! Trials are independently seeded from the base seed, so reports are
//! byte-identical across thread counts except for the timing fields.

use crate::schema::{
    encode_verdict, uniqueness_tag, DecodedInstance, SignalFile, VerdictReport, SCHEMA,
};
use nsp_core::linalg::{BlockPartition, DenseMatrix, InnerNorm, SymMatrix};
use nsp_core::nsp::{
    check_nsp_block, check_nsp_block_matrix, check_nsp_block_matrix_psd, check_nsp_block_nonneg,
    check_nsp_classical, check_nsp_matrix, check_nsp_matrix_psd, check_nsp_nonneg,
    witness_to_counterexample, Method, NspVerdict,
};
use nsp_core::recovery::{check_unique_recovery, Setting, Uniqueness, UNIQUENESS_TOL};
use nsp_core::sensing::{Sensing, Signal};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Vector length used by random mode; blocks of 2 for the block settings.
const RANDOM_N: usize = 8;

pub struct ExperimentConfig {
    pub tag: String,
    pub q: InnerNorm,
    pub order: usize,
    pub trials: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Measurement count for random mode.
    pub measurements: usize,
    /// When present, trials sample signals for this instance instead of
    /// drawing fresh operators.
    pub fixed: Option<DecodedInstance>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimsReport {
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_sizes: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    /// consistent | violation | inconclusive | informational
    pub outcome: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<String>,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub support: Vec<usize>,
    pub signal: SignalFile,
    pub competitor: SignalFile,
    pub signal_objective: f64,
    pub competitor_objective: f64,
    pub recovery: String,
    pub consistent: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SummaryReport {
    pub holds: usize,
    pub fails: usize,
    pub inconclusive_verdicts: usize,
    pub recovered_unique: usize,
    pub not_recovered: usize,
    pub undetermined_probes: usize,
    pub consistent: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub setting: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    pub order: usize,
    pub trials: usize,
    pub seed: u64,
    pub jobs: usize,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<DimsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleReport>,
    pub results: Vec<TrialReport>,
    pub summary: SummaryReport,
    pub elapsed_ms: f64,
}

impl ExperimentReport {
    pub fn violations(&self) -> usize {
        self.summary.violations
    }
}

fn trial_seed(base: u64, index: usize) -> u64 {
    base ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    DenseMatrix::from_rows(rows).expect("nonempty shape")
}

fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.5..=2.0)
}

fn signed_magnitude(rng: &mut ChaCha8Rng, signed: bool) -> f64 {
    let m = magnitude(rng);
    if signed && rng.gen_bool(0.5) {
        -m
    } else {
        m
    }
}

fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return u.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn choose(num: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, num, count.min(num)).into_vec();
    idx.sort_unstable();
    idx
}

/// An in-cone signal with the sparsity the setting's order counts.
fn sample_signal(setting: &Setting, n: usize, order: usize, rng: &mut ChaCha8Rng) -> Signal {
    match setting {
        Setting::Sparse | Setting::SparseNonneg => {
            let signed = matches!(setting, Setting::Sparse);
            let mut x = vec![0.0; n];
            for i in choose(n, order, rng) {
                x[i] = signed_magnitude(rng, signed);
            }
            Signal::Vector(x)
        }
        Setting::Block { partition, .. } | Setting::BlockNonneg { partition } => {
            let signed = matches!(setting, Setting::Block { .. });
            let mut x = vec![0.0; n];
            for bi in choose(partition.num_blocks(), order, rng) {
                for &i in partition.block(bi) {
                    x[i] = signed_magnitude(rng, signed);
                }
            }
            Signal::Vector(x)
        }
        Setting::LowRank | Setting::LowRankPsd => {
            let psd = matches!(setting, Setting::LowRankPsd);
            let mut x = SymMatrix::zeros(n);
            for _ in 0..order {
                let u = unit_vector(n, rng);
                let lam = signed_magnitude(rng, !psd);
                for i in 0..n {
                    for j in i..n {
                        x.set(i, j, x.get(i, j) + lam * u[i] * u[j]);
                    }
                }
            }
            Signal::Matrix(x)
        }
        Setting::BlockLowRank { partition } | Setting::BlockLowRankPsd { partition } => {
            let psd = matches!(setting, Setting::BlockLowRankPsd { .. });
            let mut x = SymMatrix::zeros(n);
            for bi in choose(partition.num_blocks(), order, rng) {
                let idx = partition.block(bi);
                let d = idx.len();
                let u = unit_vector(d, rng);
                let lam = signed_magnitude(rng, !psd);
                let mut blk = SymMatrix::zeros(d);
                for i in 0..d {
                    for j in i..d {
                        blk.set(i, j, lam * u[i] * u[j]);
                    }
                }
                x.set_principal_block(idx, &blk);
            }
            Signal::Matrix(x)
        }
    }
}

pub(crate) fn dispatch_check(
    setting: &Setting,
    sensing: &Sensing,
    order: usize,
) -> Result<NspVerdict, String> {
    let res = match (setting, sensing) {
        (Setting::Sparse, Sensing::Vector(a)) => check_nsp_classical(a, order),
        (Setting::SparseNonneg, Sensing::Vector(a)) => check_nsp_nonneg(a, order),
        (Setting::Block { partition, q }, Sensing::Vector(a)) => {
            check_nsp_block(a, partition, order, *q)
        }
        (Setting::BlockNonneg { partition }, Sensing::Vector(a)) => {
            check_nsp_block_nonneg(a, partition, order)
        }
        (Setting::LowRank, Sensing::Matrix(s)) => check_nsp_matrix(s, order),
        (Setting::LowRankPsd, Sensing::Matrix(s)) => check_nsp_matrix_psd(s, order),
        (Setting::BlockLowRank { partition }, Sensing::Matrix(s)) => {
            check_nsp_block_matrix(s, partition, order)
        }
        (Setting::BlockLowRankPsd { partition }, Sensing::Matrix(s)) => {
            check_nsp_block_matrix_psd(s, partition, order)
        }
        _ => return Err("operator kind does not match the setting".into()),
    };
    res.map_err(|e| e.to_string())
}

/// Random mode: the per-setting operator shape and a fresh setting value.
fn random_setting(tag: &str, q: InnerNorm) -> Result<(Setting, Option<Vec<usize>>), String> {
    match tag {
        "l1" => Ok((Setting::Sparse, None)),
        "l1-nonneg" => Ok((Setting::SparseNonneg, None)),
        "block-q1" | "block-nonneg" => {
            let sizes = vec![2; RANDOM_N / 2];
            let partition = BlockPartition::from_sizes(&sizes).map_err(|e| e.to_string())?;
            let setting = if tag == "block-q1" {
                Setting::Block { partition, q }
            } else {
                Setting::BlockNonneg { partition }
            };
            Ok((setting, Some(sizes)))
        }
        other => Err(format!(
            "random experiments need a vector setting, got '{other}'; pass a fixed instance for matrix settings"
        )),
    }
}

fn probe(
    setting: &Setting,
    sensing: &Sensing,
    x0: &Signal,
) -> Result<Uniqueness, String> {
    check_unique_recovery(setting, sensing, x0, UNIQUENESS_TOL)
        .map(|r| r.verdict)
        .map_err(|e| e.to_string())
}

fn inconclusive_trial(index: usize, detail: String, t0: Instant) -> TrialReport {
    TrialReport {
        index,
        verdict: None,
        outcome: "inconclusive".into(),
        detail,
        recovery: None,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

fn random_trial(
    tag: &str,
    q: InnerNorm,
    m: usize,
    order: usize,
    index: usize,
    seed: u64,
) -> TrialReport {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, index));
    let (setting, _) = match random_setting(tag, q) {
        Ok(s) => s,
        Err(e) => return inconclusive_trial(index, e, t0),
    };
    let a = gaussian_matrix(m, RANDOM_N, &mut rng);
    let sensing = Sensing::Vector(a);
    let verdict = match dispatch_check(&setting, &sensing, order) {
        Ok(v) => v,
        Err(e) => return inconclusive_trial(index, format!("checker error: {e}"), t0),
    };
    let encoded = encode_verdict(&verdict);

    let (outcome, detail, recovery) = if !matches!(verdict.method, Method::Exact) {
        (
            "inconclusive".to_string(),
            format!("verdict method is {}, not exact", encoded.method),
            None,
        )
    } else if verdict.holds {
        let x0 = sample_signal(&setting, RANDOM_N, order, &mut rng);
        match probe(&setting, &sensing, &x0) {
            Ok(Uniqueness::Unique) => (
                "consistent".into(),
                "holds and the sampled signal is recovered uniquely".into(),
                Some("unique".to_string()),
            ),
            Ok(Uniqueness::NonUnique) => (
                "violation".into(),
                "holds but the sampled signal admits an equally good competitor".into(),
                Some("non-unique".to_string()),
            ),
            Ok(Uniqueness::Undetermined) => (
                "inconclusive".into(),
                "uniqueness probe was undetermined".into(),
                Some("undetermined".to_string()),
            ),
            Err(e) => ("inconclusive".into(), format!("probe error: {e}"), None),
        }
    } else {
        match witness_to_counterexample(&setting, &verdict) {
            Ok((x0, _z)) => match probe(&setting, &sensing, &x0) {
                Ok(Uniqueness::NonUnique) => (
                    "consistent".into(),
                    "fails and the witness-derived signal is not recovered uniquely".into(),
                    Some("non-unique".to_string()),
                ),
                Ok(Uniqueness::Unique) => (
                    "violation".into(),
                    "fails but the witness-derived signal is still recovered uniquely".into(),
                    Some("unique".to_string()),
                ),
                Ok(Uniqueness::Undetermined) => (
                    "inconclusive".into(),
                    "uniqueness probe was undetermined".into(),
                    Some("undetermined".to_string()),
                ),
                Err(e) => ("inconclusive".into(), format!("probe error: {e}"), None),
            },
            Err(e) => (
                "inconclusive".into(),
                format!("witness conversion failed: {e}"),
                None,
            ),
        }
    };

    TrialReport {
        index,
        verdict: Some(encoded),
        outcome,
        detail,
        recovery,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

/// Fixed-instance trial: the verdict is computed once by the caller; each
/// trial samples one signal. With an exact holds verdict the expectation is
/// unique recovery; otherwise trials are informational.
fn fixed_trial(
    setting: &Setting,
    sensing: &Sensing,
    order: usize,
    expect_unique: bool,
    index: usize,
    seed: u64,
) -> TrialReport {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, index));
    let x0 = sample_signal(setting, sensing.ambient_dim(), order, &mut rng);
    let (outcome, detail, recovery) = match probe(setting, sensing, &x0) {
        Ok(u) => {
            let tag = uniqueness_tag(&u).to_string();
            if !expect_unique {
                (
                    "informational".to_string(),
                    format!("sampled signal probe: {tag}"),
                    Some(tag),
                )
            } else {
                match u {
                    Uniqueness::Unique => (
                        "consistent".into(),
                        "holds and the sampled signal is recovered uniquely".into(),
                        Some(tag),
                    ),
                    Uniqueness::NonUnique => (
                        "violation".into(),
                        "holds but the sampled signal admits an equally good competitor".into(),
                        Some(tag),
                    ),
                    Uniqueness::Undetermined => (
                        "inconclusive".into(),
                        "uniqueness probe was undetermined".into(),
                        Some(tag),
                    ),
                }
            }
        }
        Err(e) => ("inconclusive".into(), format!("probe error: {e}"), None),
    };
    TrialReport {
        index,
        verdict: None,
        outcome,
        detail,
        recovery,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

fn run_trials<F>(trials: usize, jobs: usize, f: F) -> Result<Vec<TrialReport>, String>
where
    F: Fn(usize) -> TrialReport + Sync + Send,
{
    if jobs <= 1 {
        return Ok((0..trials).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| e.to_string())?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(f).collect()))
}

fn count_verdict(s: &mut SummaryReport, v: Option<&VerdictReport>) {
    match v {
        Some(v) if v.method == "exact" && v.holds => s.holds += 1,
        Some(v) if v.method == "exact" => s.fails += 1,
        _ => s.inconclusive_verdicts += 1,
    }
}

/// Fixed-instance trials carry no verdict of their own; the caller counts
/// the shared verdict once.
fn summarize(results: &[TrialReport], per_trial_verdicts: bool) -> SummaryReport {
    let mut s = SummaryReport::default();
    for r in results {
        if per_trial_verdicts {
            count_verdict(&mut s, r.verdict.as_ref());
        }
        match r.recovery.as_deref() {
            Some("unique") => s.recovered_unique += 1,
            Some("non-unique") => s.not_recovered += 1,
            Some("undetermined") => s.undetermined_probes += 1,
            _ => {}
        }
        match r.outcome.as_str() {
            "consistent" => s.consistent += 1,
            "violation" => s.violations += 1,
            _ => {}
        }
    }
    s
}

pub fn run_equivalence_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, String> {
    let t0 = Instant::now();
    match &cfg.fixed {
        None => {
            let (_, block_sizes) = random_setting(&cfg.tag, cfg.q)?;
            let results = if cfg.trials == 0 {
                Vec::new()
            } else {
                let (tag, q, m, order, seed) =
                    (cfg.tag.clone(), cfg.q, cfg.measurements, cfg.order, cfg.seed);
                run_trials(cfg.trials, cfg.jobs, move |i| {
                    random_trial(&tag, q, m, order, i, seed)
                })?
            };
            let summary = summarize(&results, true);
            Ok(ExperimentReport {
                schema: SCHEMA.into(),
                setting: cfg.tag.clone(),
                q: (cfg.tag == "block-q1").then(|| cfg.q.label().to_string()),
                order: cfg.order,
                trials: cfg.trials,
                seed: cfg.seed,
                jobs: cfg.jobs,
                mode: "random".into(),
                dims: Some(DimsReport {
                    m: cfg.measurements,
                    n: RANDOM_N,
                    block_sizes,
                }),
                verdict: None,
                counterexample: None,
                results,
                summary,
                elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            })
        }
        Some(inst) => {
            let verdict = dispatch_check(&inst.setting, &inst.sensing, cfg.order)?;
            let encoded = encode_verdict(&verdict);
            let exact = matches!(verdict.method, Method::Exact);

            let counterexample = if !verdict.holds
                && matches!(verdict.method, Method::Exact | Method::FalsifiedOnly)
            {
                let (x0, z) = witness_to_counterexample(&inst.setting, &verdict)
                    .map_err(|e| e.to_string())?;
                let u = probe(&inst.setting, &inst.sensing, &x0)?;
                Some(CounterexampleReport {
                    support: encoded
                        .witness
                        .as_ref()
                        .map(|w| w.support.clone())
                        .unwrap_or_default(),
                    signal: SignalFile::from_signal(&x0),
                    competitor: SignalFile::from_signal(&z),
                    signal_objective: inst.setting.objective(&x0).map_err(|e| e.to_string())?,
                    competitor_objective: inst.setting.objective(&z).map_err(|e| e.to_string())?,
                    recovery: uniqueness_tag(&u).into(),
                    consistent: !matches!(u, Uniqueness::Unique),
                })
            } else {
                None
            };

            let expect_unique = exact && verdict.holds;
            let results = if cfg.trials == 0 {
                Vec::new()
            } else {
                let (setting, sensing, order, seed) =
                    (inst.setting.clone(), inst.sensing.clone(), cfg.order, cfg.seed);
                run_trials(cfg.trials, cfg.jobs, move |i| {
                    fixed_trial(&setting, &sensing, order, expect_unique, i, seed)
                })?
            };
            let mut summary = summarize(&results, false);
            count_verdict(&mut summary, Some(&encoded));
            if counterexample.as_ref().map(|c| !c.consistent).unwrap_or(false) {
                summary.violations += 1;
            }
            Ok(ExperimentReport {
                schema: SCHEMA.into(),
                setting: inst.tag.clone(),
                q: inst.q.map(|q| q.label().to_string()),
                order: cfg.order,
                trials: cfg.trials,
                seed: cfg.seed,
                jobs: cfg.jobs,
                mode: "fixed-instance".into(),
                dims: None,
                verdict: Some(encoded),
                counterexample,
                results,
                summary,
                elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
            })
        }
    }
}
