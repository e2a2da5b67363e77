//! Splitting solvers for the non-polyhedral recovery programs: nuclear and
//! block-nuclear norm minimization (optionally over the positive
//! semidefinite cone) and group-norm minimization (optionally over the
//! nonnegative orthant).
//!
//! Both solvers alternate an exact affine projection onto the measurement
//! set with a closed-form proximal step for the objective, with scaled dual
//! updates and a fixed over-relaxation factor. Measurement inconsistency is
//! detected up front through the projection residual. Non-convergence within
//! the iteration budget is not an error: the last iterate is returned with
//! `converged = false` in the diagnostics so callers can decide.

use crate::linalg::{
    dot, l2_norm, symeig, BlockPartition, DenseMatrix, InnerNorm, SymMatrix,
};
use crate::sensing::MatrixSensing;
use crate::{invalid, Result};

/// Over-relaxation factor applied to the affine iterate before the proximal
/// step. Values in (1, 1.8) typically reduce iteration counts; this one is
/// fixed for determinism.
pub const OVER_RELAXATION: f64 = 1.7;

/// Relative infeasibility threshold for the measurement system.
const FEAS_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct AdmmConfig {
    /// Augmented Lagrangian penalty, must be positive.
    pub rho: f64,
    /// Relative tolerance on primal and dual residuals.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 1.0,
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

impl AdmmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(invalid("solver config needs rho > 0, tol > 0, max_iter >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AdmmDiagnostics {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

/// Eigenvalue pseudo-inverse of a symmetric positive semidefinite matrix.
fn pinv_sym(g: &SymMatrix) -> SymMatrix {
    let spec = symeig(g);
    let lam_max = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let tol = g.dim() as f64 * f64::EPSILON * lam_max;
    let n = g.dim();
    let mut out = SymMatrix::zeros(n);
    for (lam, q) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
        if *lam > tol {
            let inv = 1.0 / lam;
            for i in 0..n {
                for j in i..n {
                    let v = out.get(i, j) + inv * q[i] * q[j];
                    out.set(i, j, v);
                }
            }
        }
    }
    out
}

/// Minimizes the nuclear norm (or the blockwise nuclear norm when a
/// partition is given) over `{X : <A_p, X> = b_p}`, intersected with the
/// positive semidefinite cone when `psd` is set.
///
/// The returned matrix satisfies the measurements to projection accuracy;
/// cone and structure violations are bounded by the primal residual in the
/// diagnostics.
pub fn min_nuclear(
    s: &MatrixSensing,
    b: &[f64],
    psd: bool,
    partition: Option<&BlockPartition>,
    cfg: &AdmmConfig,
) -> Result<(SymMatrix, AdmmDiagnostics)> {
    min_nuclear_tilted(s, b, psd, partition, None, cfg)
}

/// Same program with an extra linear term `<tilt, X>` added to the
/// objective. Used by the uniqueness probe to perturb flat optimal faces.
pub(crate) fn min_nuclear_tilted(
    s: &MatrixSensing,
    b: &[f64],
    psd: bool,
    partition: Option<&BlockPartition>,
    tilt: Option<&SymMatrix>,
    cfg: &AdmmConfig,
) -> Result<(SymMatrix, AdmmDiagnostics)> {
    cfg.validate()?;
    let n = s.dim();
    if b.len() != s.measurements() {
        return Err(invalid("measurement vector length must match operator"));
    }
    if let Some(t) = tilt {
        if t.dim() != n {
            return Err(invalid("tilt dimension must match operator dimension"));
        }
    }
    if let Some(p) = partition {
        if p.dim() != n {
            return Err(invalid("partition dimension must match operator dimension"));
        }
        match s.partition() {
            Some(sp) if sp != p => {
                return Err(invalid("objective partition must match the operator's partition"))
            }
            None if psd => {
                return Err(invalid(
                    "blockwise psd objective needs a block-diagonal operator",
                ))
            }
            _ => {}
        }
    }

    let whole: Vec<usize> = (0..n).collect();
    let blocks: Vec<&[usize]> = match partition {
        Some(p) => p.blocks().iter().map(|b| b.as_slice()).collect(),
        None => vec![&whole],
    };

    // Gram matrix of the measurements and its pseudo-inverse give an exact
    // projection onto the affine feasible set.
    let m = s.measurements();
    let mut g = SymMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            g.set(i, j, s.matrices()[i].dot_frob(&s.matrices()[j]));
        }
    }
    let ginv = pinv_sym(&g);
    let project = |y: &SymMatrix| -> SymMatrix {
        let ay = s.apply(y).expect("dimension checked");
        let r: Vec<f64> = ay.iter().zip(b).map(|(a, bb)| a - bb).collect();
        let c = ginv.apply(&r);
        let mut x = y.clone();
        for (cp, ap) in c.iter().zip(s.matrices()) {
            x.add_scaled(ap, -cp);
        }
        x
    };

    let x0 = project(&SymMatrix::zeros(n));
    let res0: Vec<f64> = s
        .apply(&x0)
        .expect("dimension checked")
        .iter()
        .zip(b)
        .map(|(a, bb)| a - bb)
        .collect();
    if l2_norm(&res0) > FEAS_TOL * (1.0 + l2_norm(b)) {
        return Err(invalid("measurement system is infeasible"));
    }

    let shrink = 1.0 / cfg.rho;
    let mut z = SymMatrix::zeros(n);
    let mut u = SymMatrix::zeros(n);
    let mut x = x0;
    let mut diag = AdmmDiagnostics {
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=cfg.max_iter {
        x = project(&z.sub(&u));
        let xh = x.scale(OVER_RELAXATION).add(&z.scale(1.0 - OVER_RELAXATION));
        let mut w = xh.add(&u);
        if let Some(t) = tilt {
            w.add_scaled(t, -shrink);
        }
        let z_new = spectral_prox(&w, &blocks, shrink, psd);
        u = u.add(&xh).sub(&z_new);
        diag.iterations = it;
        diag.primal_residual = x.sub(&z_new).frob_norm();
        diag.dual_residual = cfg.rho * z_new.sub(&z).frob_norm();
        z = z_new;
        let scale = x.frob_norm().max(1.0);
        if diag.primal_residual <= cfg.tol * scale && diag.dual_residual <= cfg.tol * scale {
            diag.converged = true;
            break;
        }
    }
    Ok((x, diag))
}

/// Blockwise eigenvalue shrinkage. Without `psd` this is soft-thresholding
/// of eigenvalues; with `psd` negative eigenvalues are removed as well,
/// which is the proximal map of the nuclear norm plus the cone indicator.
/// The blockwise objective's domain is the block-diagonal subspace, so
/// entries outside the blocks are zeroed. Leaving them free makes any
/// off-block linear term unbounded below.
fn spectral_prox(m: &SymMatrix, blocks: &[&[usize]], shrink: f64, psd: bool) -> SymMatrix {
    let mut z = SymMatrix::zeros(m.dim());
    for b in blocks {
        let spec = symeig(&m.principal_block(b));
        let k = b.len();
        let mut nb = SymMatrix::zeros(k);
        for (lam, q) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            let shrunk = if psd {
                (lam - shrink).max(0.0)
            } else {
                lam.signum() * (lam.abs() - shrink).max(0.0)
            };
            if shrunk != 0.0 {
                for i in 0..k {
                    for j in i..k {
                        let v = nb.get(i, j) + shrunk * q[i] * q[j];
                        nb.set(i, j, v);
                    }
                }
            }
        }
        z.set_principal_block(b, &nb);
    }
    z
}

/// Minimizes the blockwise inner-`q` group norm over `{x : A x = b}`, with
/// `q` either 1 or 2; with `nonneg` the objective is the coordinate sum over
/// the nonnegative orthant (and `q` must be 1).
pub fn min_group_norm(
    a: &DenseMatrix,
    b: &[f64],
    partition: &BlockPartition,
    q: InnerNorm,
    nonneg: bool,
    cfg: &AdmmConfig,
) -> Result<(Vec<f64>, AdmmDiagnostics)> {
    min_group_norm_tilted(a, b, partition, q, nonneg, None, cfg)
}

/// Group-norm program with an extra linear term `<tilt, x>`.
pub(crate) fn min_group_norm_tilted(
    a: &DenseMatrix,
    b: &[f64],
    partition: &BlockPartition,
    q: InnerNorm,
    nonneg: bool,
    tilt: Option<&[f64]>,
    cfg: &AdmmConfig,
) -> Result<(Vec<f64>, AdmmDiagnostics)> {
    cfg.validate()?;
    let n = a.cols();
    let m = a.rows();
    if partition.dim() != n {
        return Err(invalid("partition dimension must match column count"));
    }
    if b.len() != m {
        return Err(invalid("measurement vector length must match row count"));
    }
    if let Some(t) = tilt {
        if t.len() != n {
            return Err(invalid("tilt length must match column count"));
        }
    }
    match q {
        InnerNorm::One => {}
        InnerNorm::Two if !nonneg => {}
        InnerNorm::Two => {
            return Err(invalid("nonnegative group solver supports inner norm 1 only"))
        }
        InnerNorm::Inf => {
            return Err(invalid("group splitting solver supports inner norms 1 and 2"))
        }
    }

    if m == 0 {
        return Err(invalid("operator needs at least one measurement"));
    }
    let mut g = SymMatrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            g.set(i, j, dot(a.row(i), a.row(j)));
        }
    }
    let ginv = pinv_sym(&g);
    let project = |y: &[f64]| -> Vec<f64> {
        let ay = a.matvec(y);
        let r: Vec<f64> = ay.iter().zip(b).map(|(v, bb)| v - bb).collect();
        let c = ginv.apply(&r);
        let back = a.t_matvec(&c);
        y.iter().zip(&back).map(|(v, w)| v - w).collect()
    };

    let x0 = project(&vec![0.0; n]);
    let r0: Vec<f64> = a.matvec(&x0).iter().zip(b).map(|(v, bb)| v - bb).collect();
    if l2_norm(&r0) > FEAS_TOL * (1.0 + l2_norm(b)) {
        return Err(invalid("measurement system is infeasible"));
    }

    let shrink = 1.0 / cfg.rho;
    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut x = x0;
    let mut diag = AdmmDiagnostics {
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        converged: false,
    };
    for it in 1..=cfg.max_iter {
        let zu: Vec<f64> = z.iter().zip(&u).map(|(zv, uv)| zv - uv).collect();
        x = project(&zu);
        let xh: Vec<f64> = x
            .iter()
            .zip(&z)
            .map(|(xv, zv)| OVER_RELAXATION * xv + (1.0 - OVER_RELAXATION) * zv)
            .collect();
        let mut w: Vec<f64> = xh.iter().zip(&u).map(|(a, b)| a + b).collect();
        if let Some(t) = tilt {
            for (wv, tv) in w.iter_mut().zip(t) {
                *wv -= shrink * tv;
            }
        }
        let z_new = group_prox(&w, partition, q, nonneg, shrink);
        for ((uv, xv), zv) in u.iter_mut().zip(&xh).zip(&z_new) {
            *uv += xv - zv;
        }
        diag.iterations = it;
        let pr: Vec<f64> = x.iter().zip(&z_new).map(|(a, b)| a - b).collect();
        diag.primal_residual = l2_norm(&pr);
        let dr: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        diag.dual_residual = cfg.rho * l2_norm(&dr);
        z = z_new;
        let scale = l2_norm(&x).max(1.0);
        if diag.primal_residual <= cfg.tol * scale && diag.dual_residual <= cfg.tol * scale {
            diag.converged = true;
            break;
        }
    }
    Ok((x, diag))
}

fn group_prox(
    w: &[f64],
    p: &BlockPartition,
    q: InnerNorm,
    nonneg: bool,
    shrink: f64,
) -> Vec<f64> {
    if nonneg {
        return w.iter().map(|&v| (v - shrink).max(0.0)).collect();
    }
    match q {
        InnerNorm::One => w
            .iter()
            .map(|&v| v.signum() * (v.abs() - shrink).max(0.0))
            .collect(),
        InnerNorm::Two => {
            let mut z = vec![0.0; w.len()];
            for bi in 0..p.num_blocks() {
                let idx = p.block(bi);
                let norm = l2_norm(&p.gather(w, bi));
                if norm > shrink {
                    let f = 1.0 - shrink / norm;
                    for &j in idx {
                        z[j] = f * w[j];
                    }
                }
            }
            z
        }
        InnerNorm::Inf => unreachable!("rejected in validation"),
    }
}

