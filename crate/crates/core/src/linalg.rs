//! Dense linear algebra: symmetric matrices, block partitions, a cyclic Jacobi
//! eigendecomposition, orthonormal null space bases, and the norms used by the
//! recovery programs.
//!
//! Everything here is exact-arithmetic-free dense float work sized for small
//! instances (dimensions in the tens). Determinism matters more than speed:
//! eigenvalues are sorted with a fixed tie-break and eigenvector signs are
//! canonicalized, so repeated runs produce identical bytes.

use crate::{invalid, Error, Result};

/// Asymmetry beyond this is rejected instead of silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Jacobi sweep convergence threshold, relative to the Frobenius norm.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Components below this are ignored when picking the sign-defining entry of
/// an eigenvector.
const SIGN_TOL: f64 = 1e-12;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn l2_norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn linf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Inner norm applied within each block of a mixed block norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerNorm {
    One,
    Two,
    Inf,
}

impl InnerNorm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InnerNorm::One => l1_norm(x),
            InnerNorm::Two => l2_norm(x),
            InnerNorm::Inf => linf_norm(x),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InnerNorm::One => "1",
            InnerNorm::Two => "2",
            InnerNorm::Inf => "inf",
        }
    }
}

/// Dense row-major matrix with at least one column.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Zero matrix. Zero rows are allowed (an empty constraint set); zero
    /// columns are not.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(invalid("matrix must have at least one column"));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(invalid("matrix must have at least one row"));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(invalid("matrix must have at least one column"));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("matrix rows must all have the same length"));
        }
        let data = rows.into_iter().flatten().collect();
        Ok(DenseMatrix {
            rows: 0,
            cols,
            data,
        }
        .with_rows_from_len())
    }

    fn with_rows_from_len(mut self) -> Self {
        self.rows = self.data.len() / self.cols;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "t_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows).expect("cols >= 1 implies rows >= 1 ok");
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }
}

/// Ordered partition of `0..n` into disjoint nonempty index blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    n: usize,
}

impl BlockPartition {
    /// General constructor. Indices within a block must be strictly
    /// increasing and the blocks together must cover `0..n` exactly once.
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid("partition must have at least one block"));
        }
        let mut seen: Vec<usize> = Vec::new();
        for b in &blocks {
            if b.is_empty() {
                return Err(invalid("partition blocks must be nonempty"));
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("block indices must be strictly increasing"));
            }
            seen.extend_from_slice(b);
        }
        let n = seen.len();
        let mut sorted = seen.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(invalid("partition blocks must cover 0..n exactly once"));
        }
        Ok(BlockPartition { blocks, n })
    }

    /// Contiguous blocks of the given sizes, in order.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            if s == 0 {
                return Err(invalid("partition blocks must be nonempty"));
            }
            blocks.push((next..next + s).collect());
            next += s;
        }
        BlockPartition::from_blocks(blocks)
    }

    /// One singleton block per coordinate.
    pub fn singletons(n: usize) -> Result<Self> {
        BlockPartition::from_sizes(&vec![1; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Gathers the entries of `x` belonging to block `i`.
    pub fn gather(&self, x: &[f64], i: usize) -> Vec<f64> {
        self.blocks[i].iter().map(|&j| x[j]).collect()
    }
}

/// Dense symmetric matrix of dimension at least 1; storage keeps both
/// triangles equal at all times.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `n >= 1`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "symmetric matrix dimension must be at least 1");
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from full rows and symmetrizes as `(M + M^T) / 2`.
    /// Asymmetry beyond [`SYMMETRY_TOL`] in any entry is an error.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("symmetric matrix dimension must be at least 1"));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("symmetric matrix rows must form a square"));
        }
        let mut max_asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((rows[i][j] - rows[j][i]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric(max_asym));
        }
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, 0.5 * (rows[i][j] + rows[j][i]));
            }
        }
        Ok(m)
    }

    /// Builds from the upper triangle in row-major order
    /// (`n * (n + 1) / 2` values), which is symmetric by construction.
    pub fn from_upper_triangle(n: usize, vals: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("symmetric matrix dimension must be at least 1"));
        }
        if vals.len() != n * (n + 1) / 2 {
            return Err(invalid(format!(
                "upper triangle of a {n}x{n} matrix needs {} values, got {}",
                n * (n + 1) / 2,
                vals.len()
            )));
        }
        let mut m = SymMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                m.set(i, j, vals[k]);
                k += 1;
            }
        }
        Ok(m)
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        if d.is_empty() {
            return Err(invalid("symmetric matrix dimension must be at least 1"));
        }
        let mut m = SymMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Writes both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n + 1) / 2);
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    /// Frobenius inner product `<self, other>`.
    pub fn dot_frob(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dot_frob dimension mismatch");
        dot(&self.data, &other.data)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "add dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n, "sub dimension mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, other: &SymMatrix, c: f64) {
        assert_eq!(self.n, other.n, "add_scaled dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "apply dimension mismatch");
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], x))
            .collect()
    }

    /// Principal submatrix on the given strictly increasing index set.
    pub fn principal_block(&self, idx: &[usize]) -> SymMatrix {
        assert!(!idx.is_empty(), "principal block must be nonempty");
        let mut out = SymMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a) {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }

    /// Writes `block` into the principal submatrix on `idx`.
    pub fn set_principal_block(&mut self, idx: &[usize], block: &SymMatrix) {
        assert_eq!(idx.len(), block.dim(), "block size mismatch");
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a) {
                self.set(i, j, block.get(a, b));
            }
        }
    }

    /// Largest absolute off-block entry with respect to a partition.
    pub fn off_block_magnitude(&self, p: &BlockPartition) -> f64 {
        let mut owner = vec![0usize; self.n];
        for (bi, b) in p.blocks().iter().enumerate() {
            for &j in b {
                owner[j] = bi;
            }
        }
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if owner[i] != owner[j] {
                    m = m.max(self.get(i, j).abs());
                }
            }
        }
        m
    }
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted in non-increasing order. Exact eigenvalue ties are
/// broken by lexicographic comparison of the (sign-canonicalized)
/// eigenvectors, so the decomposition is deterministic.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the unit eigenvector paired with
    /// `eigenvalues[j]`; its first component of magnitude above 1e-12 is
    /// positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rebuilds `sum_j lambda_j q_j q_j^T`, mainly for accuracy checks.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim();
        let mut m = SymMatrix::zeros(n);
        for (lam, q) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in i..n {
                    let v = m.get(i, j) + lam * q[i] * q[j];
                    m.set(i, j, v);
                }
            }
        }
        m
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps rotate every off-diagonal pair until the off-diagonal Frobenius
/// mass falls below 1e-14 relative to the input norm, capped at 100 sweeps.
/// The cap is defensive; the rotation sequence converges on every symmetric
/// input.
pub fn symeig(m: &SymMatrix) -> Spectrum {
    let n = m.dim();
    let mut a = m.clone();
    let mut vecs = vec![vec![0.0; n]; n];
    for (i, v) in vecs.iter_mut().enumerate() {
        v[i] = 1.0;
    }

    let scale = m.frob_norm();
    if scale > 0.0 {
        let tol = JACOBI_TOL * scale;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * a.get(i, j) * a.get(i, j);
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    a.set(p, p, app - t * apq);
                    a.set(q, q, aqq + t * apq);
                    a.set(p, q, 0.0);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        a.set(i, p, c * aip - s * aiq);
                        a.set(i, q, s * aip + c * aiq);
                    }
                    for v in vecs.iter_mut() {
                        let vp = v[p];
                        let vq = v[q];
                        v[p] = c * vp - s * vq;
                        v[q] = s * vp + c * vq;
                    }
                }
            }
        }
    }

    // vecs is row-major: vecs[i][j] is component i of eigenvector j.
    let mut cols: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = (0..n).map(|i| vecs[i][j]).collect();
            if let Some(&lead) = col.iter().find(|x| x.abs() > SIGN_TOL) {
                if lead < 0.0 {
                    for x in col.iter_mut() {
                        *x = -*x;
                    }
                }
            }
            (a.get(j, j), col)
        })
        .collect();

    cols.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("eigenvalues are finite")
            .then_with(|| lex_cmp(&x.1, &y.1))
    });

    let (eigenvalues, eigenvectors) = cols.into_iter().unzip();
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

fn lex_cmp(x: &[f64], y: &[f64]) -> std::cmp::Ordering {
    for (a, b) in x.iter().zip(y) {
        match a.partial_cmp(b).expect("components are finite") {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Sum of absolute eigenvalues.
pub fn nuclear_norm(m: &SymMatrix) -> f64 {
    symeig(m).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Sum over blocks of the nuclear norm of each principal block.
/// Off-block entries are ignored.
pub fn mixed_norm_star1(m: &SymMatrix, p: &BlockPartition) -> Result<f64> {
    if p.dim() != m.dim() {
        return Err(invalid("partition dimension must match matrix dimension"));
    }
    Ok(p.blocks()
        .iter()
        .map(|b| nuclear_norm(&m.principal_block(b)))
        .sum())
}

/// Sum over blocks of the inner `q`-norm of each block of `v`.
pub fn mixed_norm_q1(v: &[f64], p: &BlockPartition, q: InnerNorm) -> Result<f64> {
    if p.dim() != v.len() {
        return Err(invalid("partition dimension must match vector length"));
    }
    Ok((0..p.num_blocks()).map(|i| q.eval(&p.gather(v, i))).sum())
}

/// Entrywise split `x = plus - minus` with both parts nonnegative.
pub fn signed_split_vector(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let plus = x.iter().map(|&v| v.max(0.0)).collect();
    let minus = x.iter().map(|&v| (-v).max(0.0)).collect();
    (plus, minus)
}

/// Eigenvalue split `X = plus - minus` with both parts positive
/// semidefinite. With a partition the split is applied per principal block
/// and off-block entries are dropped.
pub fn signed_split_matrix(
    x: &SymMatrix,
    p: Option<&BlockPartition>,
) -> Result<(SymMatrix, SymMatrix)> {
    let n = x.dim();
    let mut plus = SymMatrix::zeros(n);
    let mut minus = SymMatrix::zeros(n);
    let whole: Vec<usize> = (0..n).collect();
    let blocks: Vec<&[usize]> = match p {
        Some(p) => {
            if p.dim() != n {
                return Err(invalid("partition dimension must match matrix dimension"));
            }
            p.blocks().iter().map(|b| b.as_slice()).collect()
        }
        None => vec![&whole],
    };
    for b in blocks {
        let spec = symeig(&x.principal_block(b));
        let k = b.len();
        let mut bp = SymMatrix::zeros(k);
        let mut bm = SymMatrix::zeros(k);
        for (lam, q) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            let target = if *lam >= 0.0 { &mut bp } else { &mut bm };
            let mag = lam.abs();
            for i in 0..k {
                for j in i..k {
                    let v = target.get(i, j) + mag * q[i] * q[j];
                    target.set(i, j, v);
                }
            }
        }
        plus.set_principal_block(b, &bp);
        minus.set_principal_block(b, &bm);
    }
    Ok((plus, minus))
}

/// Nearest positive semidefinite matrix in Frobenius norm
/// (negative eigenvalues clipped to zero).
pub fn psd_project(x: &SymMatrix) -> SymMatrix {
    let (plus, _) = signed_split_matrix(x, None).expect("no partition given");
    plus
}

/// Orthonormal basis of the null space of `a`, as unit columns of length
/// `a.cols()`.
///
/// Computed by Householder QR with column pivoting of the transpose; the
/// numerical rank uses the threshold `max(rows, cols) * eps * |R_00|`, with
/// `|R_00|` the largest pivot. The returned vectors are mutually orthonormal
/// to machine precision because they are trailing columns of the accumulated
/// orthogonal factor.
pub fn orthonormal_null_basis(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let n = a.cols();
    let m = a.rows();
    if m == 0 {
        return (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // b is a^T, n x m; the null space of a is the orthogonal complement of
    // b's column space.
    let mut b = a.transpose();
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();

    let steps = n.min(m);
    let mut pivots: Vec<f64> = Vec::new();
    let mut rank = 0;
    for k in 0..steps {
        // Fresh column norms below row k; pick the largest as pivot.
        let (jstar, best) = (k..m)
            .map(|j| {
                let s: f64 = (k..n).map(|i| b.get(i, j) * b.get(i, j)).sum();
                (j, s.sqrt())
            })
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= 0.0 {
            break;
        }
        if let Some(&first) = pivots.first() {
            let tol = (n.max(m) as f64) * f64::EPSILON * first;
            if best <= tol {
                break;
            }
        }
        if jstar != k {
            for i in 0..n {
                let t = b.get(i, k);
                b.set(i, k, b.get(i, jstar));
                b.set(i, jstar, t);
            }
        }

        // Householder vector for column k below row k.
        let x0 = b.get(k, k);
        let alpha = -x0.signum() * best;
        let mut v: Vec<f64> = (k..n).map(|i| b.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm = l2_norm(&v);
        if vnorm > 0.0 {
            for x in v.iter_mut() {
                *x /= vnorm;
            }
            for j in k..m {
                let proj: f64 = (k..n).map(|i| v[i - k] * b.get(i, j)).sum();
                for i in k..n {
                    let t = b.get(i, j) - 2.0 * proj * v[i - k];
                    b.set(i, j, t);
                }
            }
            for row in q.iter_mut() {
                let proj: f64 = (k..n).map(|i| v[i - k] * row[i]).sum();
                for i in k..n {
                    row[i] -= 2.0 * proj * v[i - k];
                }
            }
        }
        b.set(k, k, alpha);
        for i in (k + 1)..n {
            b.set(i, k, 0.0);
        }
        pivots.push(alpha.abs());
        rank = k + 1;
    }

    // Pivot magnitudes are non-increasing, so rank counting can stop at the
    // first pivot under the threshold.
    if let Some(&first) = pivots.first() {
        let tol = (n.max(m) as f64) * f64::EPSILON * first;
        rank = pivots.iter().take_while(|&&p| p > tol).count();
    }

    // q is row-major over components: q[i] holds component i of every column.
    (rank..n)
        .map(|j| (0..n).map(|i| q[i][j]).collect())
        .collect()
}
