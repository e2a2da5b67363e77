//! Versioned JSON formats for instances, signals, and verdicts.
//!
//! All index sets are 1-based in the files and 0-based in memory. Symmetric
//! matrices are written as the upper triangle in row-major order so that
//! symmetry is structural; full square `rows` payloads are also accepted on
//! input and symmetrized, rejecting asymmetry above 1e-8.

use nsp_core::linalg::{BlockPartition, DenseMatrix, InnerNorm, SymMatrix};
use nsp_core::nsp::{Method, NspVerdict};
use nsp_core::recovery::{Setting, Uniqueness};
use nsp_core::sensing::{MatrixSensing, Sensing, Signal};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "nsp-lab/1";

pub const SETTING_TAGS: [&str; 8] = [
    "l1",
    "l1-nonneg",
    "block-q1",
    "block-nonneg",
    "nuclear",
    "nuclear-psd",
    "block-nuclear",
    "block-nuclear-psd",
];

/// Symmetric matrix payload. Exactly one of `upper` (upper triangle,
/// row-major, length n(n+1)/2) or `rows` (full square) must be present.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymMatrixFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
}

impl SymMatrixFile {
    pub fn from_matrix(m: &SymMatrix) -> Self {
        SymMatrixFile {
            dim: m.dim(),
            upper: Some(m.upper_triangle()),
            rows: None,
        }
    }

    pub fn decode(&self) -> Result<SymMatrix, String> {
        match (&self.upper, &self.rows) {
            (Some(u), None) => {
                SymMatrix::from_upper_triangle(self.dim, u).map_err(|e| e.to_string())
            }
            (None, Some(r)) => {
                if r.len() != self.dim {
                    return Err(format!(
                        "symmetric matrix declares dim {} but has {} rows",
                        self.dim,
                        r.len()
                    ));
                }
                SymMatrix::from_rows(r.clone()).map_err(|e| e.to_string())
            }
            _ => Err("symmetric matrix needs exactly one of `upper` or `rows`".into()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: Vec<Vec<f64>>,
}

/// A signal payload: a plain vector or a symmetric matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymMatrixFile>,
}

impl SignalFile {
    pub fn from_signal(x: &Signal) -> Self {
        match x {
            Signal::Vector(v) => SignalFile {
                vector: Some(v.clone()),
                symmetric: None,
            },
            Signal::Matrix(m) => SignalFile {
                vector: None,
                symmetric: Some(SymMatrixFile::from_matrix(m)),
            },
        }
    }

    pub fn decode(&self) -> Result<Signal, String> {
        match (&self.vector, &self.symmetric) {
            (Some(v), None) => Ok(Signal::Vector(v.clone())),
            (None, Some(m)) => Ok(Signal::Matrix(m.decode()?)),
            _ => Err("signal needs exactly one of `vector` or `symmetric`".into()),
        }
    }
}

/// On-disk problem instance: a setting tag plus the sensing payload.
///
/// Vector settings carry `matrix`; matrix settings carry `operators`.
/// `partition` is required for the four block settings and ignored
/// otherwise. `b` and `signal` are optional and validated against the
/// operator shape when present.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub setting: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<SymMatrixFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalFile>,
}

/// An instance after validation, in core types.
pub struct DecodedInstance {
    pub tag: String,
    pub setting: Setting,
    pub sensing: Sensing,
    pub b: Option<Vec<f64>>,
    pub signal: Option<Signal>,
    pub q: Option<InnerNorm>,
}

pub fn parse_inner_norm(s: &str) -> Result<InnerNorm, String> {
    match s {
        "1" => Ok(InnerNorm::One),
        "2" => Ok(InnerNorm::Two),
        "inf" => Ok(InnerNorm::Inf),
        other => Err(format!("unknown inner norm '{other}' (expected 1, 2, or inf)")),
    }
}

pub fn check_schema(found: &str) -> Result<(), String> {
    if found != SCHEMA {
        return Err(format!(
            "unsupported schema version '{found}' (expected {SCHEMA})"
        ));
    }
    Ok(())
}

/// 1-based file blocks to a 0-based partition of `dim` coordinates.
pub fn decode_partition(blocks: &[Vec<usize>], dim: usize) -> Result<BlockPartition, String> {
    let mut shifted = Vec::with_capacity(blocks.len());
    for blk in blocks {
        let mut b = Vec::with_capacity(blk.len());
        for &i in blk {
            if i == 0 || i > dim {
                return Err(format!("partition index {i} out of range 1..={dim}"));
            }
            b.push(i - 1);
        }
        shifted.push(b);
    }
    BlockPartition::from_blocks(shifted).map_err(|e| e.to_string())
}

pub fn encode_partition(p: &BlockPartition) -> Vec<Vec<usize>> {
    p.blocks()
        .iter()
        .map(|b| b.iter().map(|&i| i + 1).collect())
        .collect()
}

impl InstanceFile {
    pub fn encode(
        tag: &str,
        sensing: &Sensing,
        partition: Option<&BlockPartition>,
        q: Option<InnerNorm>,
        b: Option<&[f64]>,
        signal: Option<&Signal>,
    ) -> Self {
        let (matrix, operators) = match sensing {
            Sensing::Vector(a) => (
                Some(MatrixFile {
                    rows: (0..a.rows()).map(|i| a.row(i).to_vec()).collect(),
                }),
                None,
            ),
            Sensing::Matrix(s) => (
                None,
                Some(s.matrices().iter().map(SymMatrixFile::from_matrix).collect()),
            ),
        };
        InstanceFile {
            schema: SCHEMA.into(),
            setting: tag.into(),
            q: q.map(|q| q.label().to_string()),
            matrix,
            operators,
            partition: partition.map(encode_partition),
            b: b.map(|b| b.to_vec()),
            signal: signal.map(SignalFile::from_signal),
        }
    }

    /// Validates and lowers the file into core types. `q_flag` is the
    /// command-line inner norm; when both the flag and the file give one
    /// they must agree.
    pub fn decode(&self, q_flag: Option<&str>) -> Result<DecodedInstance, String> {
        check_schema(&self.schema)?;
        let tag = self.setting.as_str();
        if !SETTING_TAGS.contains(&tag) {
            return Err(format!(
                "unknown setting '{tag}' (expected one of {})",
                SETTING_TAGS.join(", ")
            ));
        }
        let is_matrix_setting = matches!(
            tag,
            "nuclear" | "nuclear-psd" | "block-nuclear" | "block-nuclear-psd"
        );
        let is_block_setting = matches!(
            tag,
            "block-q1" | "block-nonneg" | "block-nuclear" | "block-nuclear-psd"
        );

        let q = match (&self.q, q_flag) {
            (Some(a), Some(b)) if a != b => {
                return Err(format!(
                    "inner norm mismatch: file says q={a}, flag says q={b}"
                ));
            }
            (Some(a), _) => Some(parse_inner_norm(a)?),
            (None, Some(b)) => Some(parse_inner_norm(b)?),
            (None, None) => None,
        };
        if q.is_some() && tag != "block-q1" {
            return Err(format!("setting '{tag}' does not take an inner norm"));
        }

        let sensing = if is_matrix_setting {
            let ops = self
                .operators
                .as_ref()
                .ok_or_else(|| format!("setting '{tag}' needs an `operators` payload"))?;
            let mats: Vec<SymMatrix> = ops
                .iter()
                .map(|o| o.decode())
                .collect::<Result<_, _>>()?;
            let dim = mats.first().map(|m| m.dim()).unwrap_or(0);
            let part = if is_block_setting {
                let blocks = self
                    .partition
                    .as_ref()
                    .ok_or_else(|| format!("setting '{tag}' needs a `partition`"))?;
                Some(decode_partition(blocks, dim)?)
            } else {
                None
            };
            Sensing::Matrix(MatrixSensing::new(mats, part).map_err(|e| e.to_string())?)
        } else {
            let mf = self
                .matrix
                .as_ref()
                .ok_or_else(|| format!("setting '{tag}' needs a `matrix` payload"))?;
            Sensing::Vector(DenseMatrix::from_rows(mf.rows.clone()).map_err(|e| e.to_string())?)
        };

        let setting = match tag {
            "l1" => Setting::Sparse,
            "l1-nonneg" => Setting::SparseNonneg,
            "nuclear" => Setting::LowRank,
            "nuclear-psd" => Setting::LowRankPsd,
            _ => {
                let blocks = self
                    .partition
                    .as_ref()
                    .ok_or_else(|| format!("setting '{tag}' needs a `partition`"))?;
                let p = decode_partition(blocks, sensing.ambient_dim())?;
                match tag {
                    "block-q1" => Setting::Block {
                        partition: p,
                        q: q.unwrap_or(InnerNorm::One),
                    },
                    "block-nonneg" => Setting::BlockNonneg { partition: p },
                    "block-nuclear" => Setting::BlockLowRank { partition: p },
                    "block-nuclear-psd" => Setting::BlockLowRankPsd { partition: p },
                    _ => unreachable!(),
                }
            }
        };

        let b = match &self.b {
            Some(b) => {
                if b.len() != sensing.measurements() {
                    return Err(format!(
                        "b has length {} but the operator has {} measurements",
                        b.len(),
                        sensing.measurements()
                    ));
                }
                Some(b.clone())
            }
            None => None,
        };

        let signal = match &self.signal {
            Some(sf) => {
                let x = sf.decode()?;
                let shape_ok = match (&x, &sensing) {
                    (Signal::Vector(v), Sensing::Vector(_)) => v.len() == sensing.ambient_dim(),
                    (Signal::Matrix(m), Sensing::Matrix(_)) => m.dim() == sensing.ambient_dim(),
                    _ => false,
                };
                if !shape_ok {
                    return Err("signal shape does not match the operator".into());
                }
                Some(x)
            }
            None => None,
        };

        Ok(DecodedInstance {
            tag: tag.into(),
            setting,
            sensing,
            b,
            signal,
            q,
        })
    }
}

/// Point cloud for neighborliness queries. With `include_origin` the origin
/// joins the hull as an extra vertex and queries use the outward variant.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub schema: String,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub include_origin: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    /// 1-based indices of the violating support.
    pub support: Vec<usize>,
    /// Right-hand side minus left-hand side of the strict inequality at the
    /// witness; failures have margin <= 0.
    pub margin: f64,
    pub element: SignalFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictReport {
    pub holds: bool,
    pub order: usize,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

pub fn method_tag(m: &Method) -> &'static str {
    match m {
        Method::Exact => "exact",
        Method::Numerical => "numerical",
        Method::FalsifiedOnly => "falsified-only",
        Method::Inconclusive => "inconclusive",
    }
}

pub fn uniqueness_tag(u: &Uniqueness) -> &'static str {
    match u {
        Uniqueness::Unique => "unique",
        Uniqueness::NonUnique => "non-unique",
        Uniqueness::Undetermined => "undetermined",
    }
}

pub fn encode_verdict(v: &NspVerdict) -> VerdictReport {
    VerdictReport {
        holds: v.holds,
        order: v.order,
        method: method_tag(&v.method).into(),
        witness: v.witness.as_ref().map(|w| WitnessReport {
            support: w.support.indices().iter().map(|&i| i + 1).collect(),
            margin: w.margin,
            element: SignalFile::from_signal(&w.element),
        }),
    }
}
