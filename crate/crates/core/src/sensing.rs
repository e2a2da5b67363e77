//! Measurement operators for vector and symmetric-matrix signals.
//!
//! A vector operator is an ordinary matrix acting by multiplication. A matrix
//! operator is a list of symmetric measurement matrices acting by Frobenius
//! inner products. A matrix operator may declare a block partition, in which
//! case every measurement matrix must be block diagonal and the operator's
//! domain is the block-diagonal symmetric subspace.

use crate::linalg::{l2_norm, BlockPartition, DenseMatrix, SymMatrix};
use crate::{invalid, Result};

/// Off-block mass above this disqualifies a measurement matrix from a
/// block-diagonal declaration.
const BLOCK_DIAG_TOL: f64 = 1e-12;

/// A signal is either a vector or a symmetric matrix.
#[derive(Clone, Debug)]
pub enum Signal {
    Vector(Vec<f64>),
    Matrix(SymMatrix),
}

impl Signal {
    /// Euclidean (vector) or Frobenius (matrix) norm.
    pub fn norm(&self) -> f64 {
        match self {
            Signal::Vector(v) => l2_norm(v),
            Signal::Matrix(m) => m.frob_norm(),
        }
    }

    /// Norm of the difference; signals of mismatched shape are an error.
    pub fn distance(&self, other: &Signal) -> Result<f64> {
        match (self, other) {
            (Signal::Vector(a), Signal::Vector(b)) if a.len() == b.len() => {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                Ok(l2_norm(&d))
            }
            (Signal::Matrix(a), Signal::Matrix(b)) if a.dim() == b.dim() => {
                Ok(a.sub(b).frob_norm())
            }
            _ => Err(invalid("signals have mismatched shapes")),
        }
    }
}

/// Frobenius-inner-product measurement operator on symmetric matrices.
#[derive(Clone, Debug)]
pub struct MatrixSensing {
    mats: Vec<SymMatrix>,
    n: usize,
    partition: Option<BlockPartition>,
}

impl MatrixSensing {
    /// At least one measurement matrix, all of one dimension. With a
    /// partition, every measurement matrix must be block diagonal for it.
    pub fn new(mats: Vec<SymMatrix>, partition: Option<BlockPartition>) -> Result<Self> {
        if mats.is_empty() {
            return Err(invalid("matrix operator needs at least one measurement"));
        }
        let n = mats[0].dim();
        if mats.iter().any(|m| m.dim() != n) {
            return Err(invalid("measurement matrices must share one dimension"));
        }
        if let Some(p) = &partition {
            if p.dim() != n {
                return Err(invalid("partition dimension must match measurement dimension"));
            }
            for (i, m) in mats.iter().enumerate() {
                let off = m.off_block_magnitude(p);
                if off > BLOCK_DIAG_TOL {
                    return Err(invalid(format!(
                        "measurement {i} is not block diagonal: off-block magnitude {off:.3e}"
                    )));
                }
            }
        }
        Ok(MatrixSensing { mats, n, partition })
    }

    pub fn measurements(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.mats
    }

    pub fn partition(&self) -> Option<&BlockPartition> {
        self.partition.as_ref()
    }

    /// `y_p = <A_p, X>` for each measurement matrix.
    pub fn apply(&self, x: &SymMatrix) -> Result<Vec<f64>> {
        if x.dim() != self.n {
            return Err(invalid("signal dimension must match operator dimension"));
        }
        Ok(self.mats.iter().map(|m| m.dot_frob(x)).collect())
    }

    /// Embeds a vector operator as diagonal measurement matrices, so that
    /// `A x` for vectors equals applying the embedding to `diag(x)`.
    ///
    /// The embedded operator carries the given partition, or one singleton
    /// block per coordinate when none is given; diagonal matrices are block
    /// diagonal for every partition.
    pub fn diagonal_embedding(a: &DenseMatrix, p: Option<&BlockPartition>) -> Result<Self> {
        let n = a.cols();
        if a.rows() == 0 {
            return Err(invalid("matrix operator needs at least one measurement"));
        }
        let partition = match p {
            Some(p) => {
                if p.dim() != n {
                    return Err(invalid("partition dimension must match column count"));
                }
                p.clone()
            }
            None => BlockPartition::singletons(n)?,
        };
        let mats = (0..a.rows())
            .map(|i| SymMatrix::diagonal(a.row(i)))
            .collect::<Result<Vec<_>>>()?;
        MatrixSensing::new(mats, Some(partition))
    }
}

/// Either kind of measurement operator.
#[derive(Clone, Debug)]
pub enum Sensing {
    Vector(DenseMatrix),
    Matrix(MatrixSensing),
}

impl Sensing {
    pub fn measurements(&self) -> usize {
        match self {
            Sensing::Vector(a) => a.rows(),
            Sensing::Matrix(s) => s.measurements(),
        }
    }

    /// Signal-space dimension: vector length or matrix side length.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Sensing::Vector(a) => a.cols(),
            Sensing::Matrix(s) => s.dim(),
        }
    }

    pub fn apply(&self, x: &Signal) -> Result<Vec<f64>> {
        match (self, x) {
            (Sensing::Vector(a), Signal::Vector(v)) => {
                if v.len() != a.cols() {
                    return Err(invalid("signal length must match operator columns"));
                }
                Ok(a.matvec(v))
            }
            (Sensing::Matrix(s), Signal::Matrix(m)) => s.apply(m),
            _ => Err(invalid("signal shape does not match operator kind")),
        }
    }
}

/// Orthonormal basis (Frobenius) of the symmetric matrices that are block
/// diagonal for the partition, or of all symmetric matrices when no
/// partition is given.
///
/// Ordering is deterministic: blocks in order, within each block the upper
/// triangle row by row. Off-diagonal basis elements carry weight `1/sqrt(2)`
/// on the two mirrored entries.
pub fn structure_basis(n: usize, partition: Option<&BlockPartition>) -> Result<Vec<SymMatrix>> {
    if n == 0 {
        return Err(invalid("matrix dimension must be at least 1"));
    }
    let whole: Vec<usize> = (0..n).collect();
    let blocks: Vec<&[usize]> = match partition {
        Some(p) => {
            if p.dim() != n {
                return Err(invalid("partition dimension must match matrix dimension"));
            }
            p.blocks().iter().map(|b| b.as_slice()).collect()
        }
        None => vec![&whole],
    };
    let mut basis = Vec::new();
    let w = 1.0 / 2.0_f64.sqrt();
    for b in blocks {
        for (ai, &i) in b.iter().enumerate() {
            for &j in b.iter().skip(ai) {
                let mut m = SymMatrix::zeros(n);
                if i == j {
                    m.set(i, i, 1.0);
                } else {
                    m.set(i, j, w);
                }
                basis.push(m);
            }
        }
    }
    Ok(basis)
}

/// Rows of Frobenius inner products of each measurement matrix against each
/// basis element. With an orthonormal structure basis this represents the
/// operator in coordinates.
pub fn coefficient_matrix(s: &MatrixSensing, basis: &[SymMatrix]) -> Result<DenseMatrix> {
    if basis.is_empty() {
        return Err(invalid("structure basis must be nonempty"));
    }
    let rows = s
        .matrices()
        .iter()
        .map(|a| basis.iter().map(|c| a.dot_frob(c)).collect())
        .collect();
    DenseMatrix::from_rows(rows)
}
