//! Uniform front-end for the eight recovery programs: minimize a
//! structure-promoting norm subject to linear measurements, optionally
//! inside the nonnegative orthant or the positive semidefinite cone.
//!
//! Polyhedral settings (entrywise 1-norm, nonnegative sums, blockwise 1- and
//! infinity-norms) reduce to linear programs solved exactly by the simplex
//! kernel. Spectral settings (nuclear norms, trace programs) and the
//! blockwise 2-norm go through the splitting solvers. A uniqueness probe
//! re-solves with a pair of opposite random linear perturbations of the
//! objective; only optima that survive both perturbations are declared
//! unique.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::{min_group_norm_tilted, min_nuclear_tilted, AdmmConfig};
use crate::linalg::{
    l1_norm, l2_norm, mixed_norm_q1, mixed_norm_star1, nuclear_norm, symeig, BlockPartition,
    DenseMatrix, InnerNorm, SymMatrix,
};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};
use crate::sensing::{Sensing, Signal};
use crate::{invalid, Result};

/// Default relative tolerance for signal and objective comparisons.
pub const UNIQUENESS_TOL: f64 = 1e-6;

/// Cone membership slack when validating inputs.
const CONE_TOL: f64 = 1e-9;

/// Fixed seed for the uniqueness probe's perturbation directions; the probe
/// is deterministic by design.
const PROBE_SEED: u64 = 0x756e_6971;

/// One of the eight structured recovery problems.
#[derive(Clone, Debug, PartialEq)]
pub enum Setting {
    /// Entrywise 1-norm minimization.
    Sparse,
    /// Coordinate-sum minimization over the nonnegative orthant.
    SparseNonneg,
    /// Blockwise inner-`q` group norm minimization.
    Block {
        partition: BlockPartition,
        q: InnerNorm,
    },
    /// Blockwise nonnegative recovery (inner norm 1 on the cone).
    BlockNonneg { partition: BlockPartition },
    /// Nuclear norm minimization over symmetric matrices.
    LowRank,
    /// Trace minimization over the positive semidefinite cone.
    LowRankPsd,
    /// Blockwise nuclear norm minimization.
    BlockLowRank { partition: BlockPartition },
    /// Blockwise trace minimization over the cone.
    BlockLowRankPsd { partition: BlockPartition },
}

impl Setting {
    pub fn is_matrix(&self) -> bool {
        matches!(
            self,
            Setting::LowRank
                | Setting::LowRankPsd
                | Setting::BlockLowRank { .. }
                | Setting::BlockLowRankPsd { .. }
        )
    }

    pub fn partition(&self) -> Option<&BlockPartition> {
        match self {
            Setting::Block { partition, .. }
            | Setting::BlockNonneg { partition }
            | Setting::BlockLowRank { partition }
            | Setting::BlockLowRankPsd { partition } => Some(partition),
            _ => None,
        }
    }

    pub fn has_cone(&self) -> bool {
        matches!(
            self,
            Setting::SparseNonneg
                | Setting::BlockNonneg { .. }
                | Setting::LowRankPsd
                | Setting::BlockLowRankPsd { .. }
        )
    }

    /// The minimized norm evaluated at a signal, independent of cone
    /// membership.
    pub fn objective(&self, x: &Signal) -> Result<f64> {
        match (self, x) {
            (Setting::Sparse, Signal::Vector(v)) | (Setting::SparseNonneg, Signal::Vector(v)) => {
                Ok(l1_norm(v))
            }
            (Setting::Block { partition, q }, Signal::Vector(v)) => {
                mixed_norm_q1(v, partition, *q)
            }
            (Setting::BlockNonneg { partition }, Signal::Vector(v)) => {
                mixed_norm_q1(v, partition, InnerNorm::One)
            }
            (Setting::LowRank, Signal::Matrix(m)) | (Setting::LowRankPsd, Signal::Matrix(m)) => {
                Ok(nuclear_norm(m))
            }
            (Setting::BlockLowRank { partition }, Signal::Matrix(m))
            | (Setting::BlockLowRankPsd { partition }, Signal::Matrix(m)) => {
                mixed_norm_star1(m, partition)
            }
            _ => Err(invalid("signal shape does not match setting")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    /// Recovered and surviving the perturbation probe.
    Unique,
    /// A competitor with no worse objective differs from the input signal.
    NonUnique,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Simplex,
    Splitting,
}

#[derive(Clone, Debug)]
pub struct SolveDiagnostics {
    pub solver: SolverKind,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub signal: Signal,
    pub objective: f64,
    pub residual: f64,
    /// Filled by [`check_unique_recovery`]; plain solves report
    /// `Undetermined`.
    pub unique: Uniqueness,
    pub diagnostics: SolveDiagnostics,
}

/// Uniqueness assessment for a given signal, together with the unperturbed
/// solve that produced it.
#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub verdict: Uniqueness,
    pub solution: RecoveryResult,
}

pub fn recover(setting: &Setting, sensing: &Sensing, b: &[f64]) -> Result<RecoveryResult> {
    recover_with(setting, sensing, b, &AdmmConfig::default())
}

pub fn recover_with(
    setting: &Setting,
    sensing: &Sensing,
    b: &[f64],
    cfg: &AdmmConfig,
) -> Result<RecoveryResult> {
    solve_program(setting, sensing, b, None, cfg)
}

fn solve_program(
    setting: &Setting,
    sensing: &Sensing,
    b: &[f64],
    tilt: Option<&Signal>,
    cfg: &AdmmConfig,
) -> Result<RecoveryResult> {
    if b.len() != sensing.measurements() {
        return Err(invalid("measurement vector length must match operator"));
    }
    if let Some(p) = setting.partition() {
        if p.dim() != sensing.ambient_dim() {
            return Err(invalid("partition dimension must match operator dimension"));
        }
    }

    let signal = match (setting, sensing) {
        (Setting::Sparse, Sensing::Vector(a)) => lp_abs_sum(a, b, vec_tilt(tilt)?, false)?,
        (Setting::SparseNonneg, Sensing::Vector(a)) => lp_abs_sum(a, b, vec_tilt(tilt)?, true)?,
        (Setting::Block { partition, q }, Sensing::Vector(a)) => match q {
            InnerNorm::One => lp_abs_sum(a, b, vec_tilt(tilt)?, false)?,
            InnerNorm::Inf => lp_block_inf(a, b, partition, vec_tilt(tilt)?)?,
            InnerNorm::Two => {
                let (x, diag) =
                    min_group_norm_tilted(a, b, partition, InnerNorm::Two, false, vec_tilt(tilt)?, cfg)?;
                return finish_splitting(setting, sensing, b, Signal::Vector(x), diag.iterations, diag.converged);
            }
        },
        (Setting::BlockNonneg { .. }, Sensing::Vector(a)) => {
            lp_abs_sum(a, b, vec_tilt(tilt)?, true)?
        }
        (Setting::LowRank, Sensing::Matrix(ms)) => {
            let (x, diag) = min_nuclear_tilted(ms, b, false, None, mat_tilt(tilt)?, cfg)?;
            return finish_splitting(setting, sensing, b, Signal::Matrix(x), diag.iterations, diag.converged);
        }
        (Setting::LowRankPsd, Sensing::Matrix(ms)) => {
            let (x, diag) = min_nuclear_tilted(ms, b, true, None, mat_tilt(tilt)?, cfg)?;
            return finish_splitting(setting, sensing, b, Signal::Matrix(x), diag.iterations, diag.converged);
        }
        (Setting::BlockLowRank { partition }, Sensing::Matrix(ms)) => {
            let (x, diag) = min_nuclear_tilted(ms, b, false, Some(partition), mat_tilt(tilt)?, cfg)?;
            return finish_splitting(setting, sensing, b, Signal::Matrix(x), diag.iterations, diag.converged);
        }
        (Setting::BlockLowRankPsd { partition }, Sensing::Matrix(ms)) => {
            let (x, diag) = min_nuclear_tilted(ms, b, true, Some(partition), mat_tilt(tilt)?, cfg)?;
            return finish_splitting(setting, sensing, b, Signal::Matrix(x), diag.iterations, diag.converged);
        }
        _ => return Err(invalid("sensing kind does not match setting")),
    };

    let objective = setting.objective(&signal)?;
    let ax = sensing.apply(&signal)?;
    let residual = l2_norm(
        &ax.iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .collect::<Vec<f64>>(),
    );
    Ok(RecoveryResult {
        signal,
        objective,
        residual,
        unique: Uniqueness::Undetermined,
        diagnostics: SolveDiagnostics {
            solver: SolverKind::Simplex,
            iterations: 0,
            converged: true,
        },
    })
}

fn finish_splitting(
    setting: &Setting,
    sensing: &Sensing,
    b: &[f64],
    signal: Signal,
    iterations: usize,
    converged: bool,
) -> Result<RecoveryResult> {
    let objective = setting.objective(&signal)?;
    let ax = sensing.apply(&signal)?;
    let residual = l2_norm(
        &ax.iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .collect::<Vec<f64>>(),
    );
    Ok(RecoveryResult {
        signal,
        objective,
        residual,
        unique: Uniqueness::Undetermined,
        diagnostics: SolveDiagnostics {
            solver: SolverKind::Splitting,
            iterations,
            converged,
        },
    })
}

fn vec_tilt(tilt: Option<&Signal>) -> Result<Option<&[f64]>> {
    match tilt {
        None => Ok(None),
        Some(Signal::Vector(v)) => Ok(Some(v)),
        Some(Signal::Matrix(_)) => Err(invalid("tilt shape does not match setting")),
    }
}

fn mat_tilt(tilt: Option<&Signal>) -> Result<Option<&SymMatrix>> {
    match tilt {
        None => Ok(None),
        Some(Signal::Matrix(m)) => Ok(Some(m)),
        Some(Signal::Vector(_)) => Err(invalid("tilt shape does not match setting")),
    }
}

/// 1-norm (or nonnegative-sum) program via the standard positive/negative
/// split. Tilt entries must stay below one in magnitude so the objective
/// remains bounded; probe perturbations are far smaller.
fn lp_abs_sum(
    a: &DenseMatrix,
    b: &[f64],
    tilt: Option<&[f64]>,
    nonneg: bool,
) -> Result<Signal> {
    let n = a.cols();
    let m = a.rows();
    let t = |j: usize| tilt.map(|t| t[j]).unwrap_or(0.0);
    if nonneg {
        let rows: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
        let lp = LpProblem::new(
            Sense::Minimize,
            (0..n).map(|j| 1.0 + t(j)).collect(),
            DenseMatrix::from_rows(rows)?,
            b.to_vec(),
            vec![0.0; n],
            vec![f64::INFINITY; n],
        )?;
        let sol = solve_lp(&lp)?;
        return lp_signal(sol.status, sol.point);
    }
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = Vec::with_capacity(2 * n);
            r.extend_from_slice(a.row(i));
            r.extend(a.row(i).iter().map(|v| -v));
            r
        })
        .collect();
    let mut objective = Vec::with_capacity(2 * n);
    objective.extend((0..n).map(|j| 1.0 + t(j)));
    objective.extend((0..n).map(|j| 1.0 - t(j)));
    let lp = LpProblem::new(
        Sense::Minimize,
        objective,
        DenseMatrix::from_rows(rows)?,
        b.to_vec(),
        vec![0.0; 2 * n],
        vec![f64::INFINITY; 2 * n],
    )?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return lp_signal(sol.status, Vec::new());
    }
    let x: Vec<f64> = (0..n).map(|j| sol.point[j] - sol.point[n + j]).collect();
    Ok(Signal::Vector(x))
}

/// Blockwise infinity-norm program: one bound variable per block dominating
/// the absolute coordinates of that block.
fn lp_block_inf(
    a: &DenseMatrix,
    b: &[f64],
    partition: &BlockPartition,
    tilt: Option<&[f64]>,
) -> Result<Signal> {
    let n = a.cols();
    let m = a.rows();
    let k = partition.num_blocks();
    let t = |j: usize| tilt.map(|t| t[j]).unwrap_or(0.0);
    let mut owner = vec![0usize; n];
    for (bi, blk) in partition.blocks().iter().enumerate() {
        for &j in blk {
            owner[j] = bi;
        }
    }
    // Variables: [p (n) | q (n) | w (k) | slack (n)].
    let width = 2 * n + k + n;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m + n);
    let mut rhs: Vec<f64> = Vec::with_capacity(m + n);
    for i in 0..m {
        let mut r = vec![0.0; width];
        for j in 0..n {
            r[j] = a.get(i, j);
            r[n + j] = -a.get(i, j);
        }
        rows.push(r);
        rhs.push(b[i]);
    }
    for j in 0..n {
        let mut r = vec![0.0; width];
        r[j] = 1.0;
        r[n + j] = 1.0;
        r[2 * n + owner[j]] = -1.0;
        r[2 * n + k + j] = 1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    let mut objective = vec![0.0; width];
    for j in 0..n {
        objective[j] = t(j);
        objective[n + j] = -t(j);
    }
    for bi in 0..k {
        objective[2 * n + bi] = 1.0;
    }
    let lp = LpProblem::new(
        Sense::Minimize,
        objective,
        DenseMatrix::from_rows(rows)?,
        rhs,
        vec![0.0; width],
        vec![f64::INFINITY; width],
    )?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return lp_signal(sol.status, Vec::new());
    }
    let x: Vec<f64> = (0..n).map(|j| sol.point[j] - sol.point[n + j]).collect();
    Ok(Signal::Vector(x))
}

fn lp_signal(status: LpStatus, point: Vec<f64>) -> Result<Signal> {
    match status {
        LpStatus::Optimal => Ok(Signal::Vector(point)),
        LpStatus::Infeasible => Err(invalid("measurement system is infeasible")),
        LpStatus::Unbounded => Err(invalid("recovery program is unbounded")),
    }
}

/// Solves with `b = A(x0)` and classifies the outcome.
///
/// `NonUnique` when the solver finds a strictly better objective or an
/// equally good but different signal. `Unique` when the solver returns `x0`
/// and both opposite-perturbation probes return it again. `Undetermined`
/// otherwise (including unconverged solves). `tol` is relative; see
/// [`UNIQUENESS_TOL`] for the conventional value.
pub fn check_unique_recovery(
    setting: &Setting,
    sensing: &Sensing,
    x0: &Signal,
    tol: f64,
) -> Result<UniquenessReport> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    check_cone_membership(setting, x0)?;
    let b = sensing.apply(x0)?;
    let cfg = AdmmConfig::default();
    let mut base = solve_program(setting, sensing, &b, None, &cfg)?;
    let obj0 = setting.objective(x0)?;
    let obj_scale = 1.0 + obj0.abs();
    let sig_scale = 1.0 + x0.norm();

    let verdict = if !base.diagnostics.converged {
        Uniqueness::Undetermined
    } else if base.objective < obj0 - tol * obj_scale {
        Uniqueness::NonUnique
    } else {
        let dist = base.signal.distance(x0)?;
        if dist > tol * sig_scale {
            if base.objective <= obj0 + tol * obj_scale {
                Uniqueness::NonUnique
            } else {
                Uniqueness::Undetermined
            }
        } else {
            probe_uniqueness(
                setting,
                sensing,
                &b,
                x0,
                tol * sig_scale,
                obj0,
                tol,
                obj_scale,
                &cfg,
            )?
        }
    };
    base.unique = verdict;
    Ok(UniquenessReport {
        verdict,
        solution: base,
    })
}

/// Re-solves with a fixed random tilt and its negation. Requiring `x0` to
/// win under both rules out flat optimal faces containing `x0`, because no
/// nonzero face direction can be simultaneously uphill for a tilt and its
/// negation. A tilted optimum that differs from `x0` while matching its
/// unperturbed objective lies on such a face and certifies non-uniqueness.
fn probe_uniqueness(
    setting: &Setting,
    sensing: &Sensing,
    b: &[f64],
    x0: &Signal,
    dist_tol: f64,
    obj0: f64,
    tol: f64,
    obj_scale: f64,
    cfg: &AdmmConfig,
) -> Result<Uniqueness> {
    let eps = 1e-6 * obj_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let tilt = match x0 {
        Signal::Vector(v) => {
            let r: Vec<f64> = (0..v.len()).map(|_| eps * (rng.gen::<f64>() * 2.0 - 1.0)).collect();
            Signal::Vector(r)
        }
        Signal::Matrix(m) => {
            let n = m.dim();
            let mut r = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    r.set(i, j, eps * (rng.gen::<f64>() * 2.0 - 1.0));
                }
            }
            Signal::Matrix(r)
        }
    };
    let neg = match &tilt {
        Signal::Vector(v) => Signal::Vector(v.iter().map(|x| -x).collect()),
        Signal::Matrix(m) => Signal::Matrix(m.scale(-1.0)),
    };
    for t in [&tilt, &neg] {
        let sol = solve_program(setting, sensing, b, Some(t), cfg)?;
        if !sol.diagnostics.converged {
            return Ok(Uniqueness::Undetermined);
        }
        if sol.signal.distance(x0)? > dist_tol {
            if sol.objective <= obj0 + tol * obj_scale {
                return Ok(Uniqueness::NonUnique);
            }
            return Ok(Uniqueness::Undetermined);
        }
    }
    Ok(Uniqueness::Unique)
}

fn check_cone_membership(setting: &Setting, x0: &Signal) -> Result<()> {
    if !setting.has_cone() {
        return Ok(());
    }
    match x0 {
        Signal::Vector(v) => {
            let scale = 1.0 + l2_norm(v);
            if v.iter().any(|&x| x < -CONE_TOL * scale) {
                return Err(invalid("signal lies outside the nonnegative cone"));
            }
        }
        Signal::Matrix(m) => {
            let scale = 1.0 + m.frob_norm();
            let lam_min = symeig(m)
                .eigenvalues
                .last()
                .copied()
                .unwrap_or(0.0);
            if lam_min < -CONE_TOL * scale {
                return Err(invalid("signal lies outside the semidefinite cone"));
            }
        }
    }
    Ok(())
}

/// Indices of blocks whose restriction of `x` has norm above `tol`
/// (Euclidean for vectors, Frobenius for matrix blocks), plus the count.
/// `None` uses the scale-aware default `1e-8 * (1 + |x|)`.
pub fn block_support(
    x: &Signal,
    partition: &BlockPartition,
    tol: Option<f64>,
) -> Result<(Vec<usize>, usize)> {
    let tol = tol.unwrap_or(1e-8 * (1.0 + x.norm()));
    let norms: Vec<f64> = match x {
        Signal::Vector(v) => {
            if partition.dim() != v.len() {
                return Err(invalid("partition dimension must match signal length"));
            }
            (0..partition.num_blocks())
                .map(|bi| l2_norm(&partition.gather(v, bi)))
                .collect()
        }
        Signal::Matrix(m) => {
            if partition.dim() != m.dim() {
                return Err(invalid("partition dimension must match signal dimension"));
            }
            partition
                .blocks()
                .iter()
                .map(|b| m.principal_block(b).frob_norm())
                .collect()
        }
    };
    let support: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, &nm)| nm > tol)
        .map(|(i, _)| i)
        .collect();
    let count = support.len();
    Ok((support, count))
}
