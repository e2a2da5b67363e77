//! Null space property certification.
//!
//! Eight checkers cover the cross product of four signal structures
//! (entrywise sparse, block sparse, low rank, block low rank) with two cones
//! (none, nonnegative / positive semidefinite). Each checker reports a
//! verdict with one of four evidence levels:
//!
//! * `Exact`: produced by complete support enumeration plus linear
//!   programming, by a closed-form analysis of a one-dimensional null space,
//!   or by a certified angular search in two dimensions.
//! * `Numerical`: a hold backed only by randomized sampling or an iterative
//!   search that found no violation.
//! * `FalsifiedOnly`: a failure backed by a concrete violating null space
//!   element, found by sampling rather than enumeration.
//! * `Inconclusive`: the checker could not decide (solver trouble, a value
//!   inside the strictness band, or an exhausted refinement budget).
//!
//! Failure witnesses always carry the violating element and the support, and
//! for `Exact` / `FalsifiedOnly` they re-violate the defining inequality on
//! direct substitution. Ties (margin exactly zero) count as failures: the
//! properties are strict inequalities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{
    l1_norm, l2_norm, linf_norm, nuclear_norm, orthonormal_null_basis, signed_split_matrix,
    signed_split_vector, symeig, BlockPartition, DenseMatrix, InnerNorm, SymMatrix,
};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};
use crate::recovery::Setting;
use crate::sensing::{coefficient_matrix, structure_basis, MatrixSensing, Sensing, Signal};
use crate::subsets;
use crate::{invalid, Error, Result};

/// Strictness margin for converting strict inequalities into checkable ones.
/// Optima inside the band next to the threshold are reported inconclusive
/// instead of guessed.
pub const STRICTNESS_MARGIN: f64 = 1e-9;

/// Box applied to null space coordinates in the sign-pattern programs; makes
/// every subproblem bounded while leaving violation detection intact.
const LP_BOX: f64 = 1e3;

/// Threshold for treating an LP-found coordinate as genuinely nonzero in the
/// tie-search phase.
const NONZERO_TOL: f64 = 1e-7;

/// Cap on the number of sign-pattern LPs per checker call.
const SIGN_CAP: u64 = 2_000_000;

/// Angular grid size for the two-dimensional certified search.
const ANGULAR_GRID: usize = 1_000_000;

/// Evaluation budget for interval refinement in the angular search.
const REFINE_BUDGET: usize = 4_000_000;

/// Iteration/restart budget for the per-support semidefinite searches.
const SEARCH_ITERS: usize = 400;
const SEARCH_RESTARTS: usize = 4;

/// Support set `S` inside a universe `0..universe`, with the complement
/// derived on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
    universe: usize,
}

impl SupportSet {
    /// Indices must be strictly increasing and inside the universe.
    pub fn new(indices: Vec<usize>, universe: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= universe) {
            return Err(invalid("support indices must lie inside the universe"));
        }
        Ok(SupportSet { indices, universe })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.universe).filter(|&i| !self.contains(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Numerical,
    FalsifiedOnly,
    Inconclusive,
}

/// A violating (or tying) null space element for a specific support.
/// `margin` is the right-hand side minus the left-hand side of the strict
/// defining inequality evaluated at the element; failures have margin <= 0.
#[derive(Clone, Debug)]
pub struct Witness {
    pub support: SupportSet,
    pub element: Signal,
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct NspVerdict {
    /// Whether the property holds at the queried order. Carries no
    /// information when `method` is `Inconclusive`.
    pub holds: bool,
    pub order: usize,
    pub method: Method,
    pub witness: Option<Witness>,
}

impl NspVerdict {
    fn holds_with(order: usize, method: Method) -> Self {
        NspVerdict {
            holds: true,
            order,
            method,
            witness: None,
        }
    }

    fn fails_with(order: usize, method: Method, witness: Witness) -> Self {
        NspVerdict {
            holds: false,
            order,
            method,
            witness: Some(witness),
        }
    }

    fn inconclusive(order: usize) -> Self {
        NspVerdict {
            holds: false,
            order,
            method: Method::Inconclusive,
            witness: None,
        }
    }
}

/// Knobs for the randomized and iterative paths. Exact paths ignore it.
#[derive(Clone, Debug)]
pub struct CertifyConfig {
    /// Null space sphere samples for the falsifiers.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            samples: 100_000,
            seed: 7,
        }
    }
}

/// Orthonormal basis of the operator's null space, in the operator's domain:
/// vectors for a vector operator, symmetric matrices (block diagonal when
/// the operator declares a partition) for a matrix operator.
#[derive(Clone, Debug)]
pub struct NullSpaceBasis {
    elements: Vec<Signal>,
}

impl NullSpaceBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Signal] {
        &self.elements
    }
}

pub fn null_space_basis(sensing: &Sensing) -> Result<NullSpaceBasis> {
    let elements = match sensing {
        Sensing::Vector(a) => orthonormal_null_basis(a)
            .into_iter()
            .map(Signal::Vector)
            .collect(),
        Sensing::Matrix(s) => matrix_null_basis(s)?
            .into_iter()
            .map(Signal::Matrix)
            .collect(),
    };
    Ok(NullSpaceBasis { elements })
}

/// Null space of a matrix operator as symmetric matrices, computed in
/// orthonormal structure coordinates (off-diagonal weight `sqrt(2)`) so the
/// returned matrices are Frobenius-orthonormal.
pub(crate) fn matrix_null_basis(s: &MatrixSensing) -> Result<Vec<SymMatrix>> {
    let basis = structure_basis(s.dim(), s.partition())?;
    let coeff = coefficient_matrix(s, &basis)?;
    let coords = orthonormal_null_basis(&coeff);
    Ok(coords
        .into_iter()
        .map(|c| {
            let mut m = SymMatrix::zeros(s.dim());
            for (ci, bi) in c.iter().zip(&basis) {
                m.add_scaled(bi, *ci);
            }
            m
        })
        .collect())
}

fn sample_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = l2_norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Worst support of size `s` for a list of per-group norms: the margin
/// `sum off-support - sum on-support` is minimized by taking the `s`
/// largest groups. Returns the margin and that support, ties broken toward
/// smaller indices.
fn grouped_margin(norms: &[f64], s: usize) -> (f64, Vec<usize>) {
    let s = s.min(norms.len());
    let total: f64 = norms.iter().sum();
    let mut idx: Vec<usize> = (0..norms.len()).collect();
    idx.sort_by(|&a, &b| {
        norms[b]
            .partial_cmp(&norms[a])
            .expect("norms are finite")
            .then(a.cmp(&b))
    });
    let mut top: Vec<usize> = idx[..s].to_vec();
    top.sort_unstable();
    let topsum: f64 = top.iter().map(|&i| norms[i]).sum();
    (total - 2.0 * topsum, top)
}

/// Scales a vector to unit max-norm; leaves the zero vector alone.
fn normalize_inf(v: &[f64]) -> Vec<f64> {
    let m = linf_norm(v);
    if m > 0.0 {
        v.iter().map(|x| x / m).collect()
    } else {
        v.to_vec()
    }
}

/// Classical entrywise null space property of order `s`:
/// every null space element has less mass on any `s` coordinates than off
/// them. Complete sign-pattern LP enumeration; verdicts are exact.
pub fn check_nsp_classical(a: &DenseMatrix, s: usize) -> Result<NspVerdict> {
    let partition = BlockPartition::singletons(a.cols())?;
    let nullb = orthonormal_null_basis(a);
    sign_lp_core(&nullb, &partition, s, InnerNorm::One)
}

/// Nonnegative entrywise null space property of order `s`: on the cone
/// `v_off <= 0`, the coordinate sum stays negative. Two-phase LP
/// enumeration; verdicts are exact.
pub fn check_nsp_nonneg(a: &DenseMatrix, s: usize) -> Result<NspVerdict> {
    let partition = BlockPartition::singletons(a.cols())?;
    let nullb = orthonormal_null_basis(a);
    nonneg_core(&nullb, &partition, s)
}

/// Block null space property of order `s` with inner norm `q` on blocks.
/// `q = 1` reduces to sign-pattern LPs and is exact. `q in {2, inf}` is
/// exact for null space dimension at most 2 (analytic, then a certified
/// angular search) and falls back to a randomized falsifier beyond that.
pub fn check_nsp_block(
    a: &DenseMatrix,
    partition: &BlockPartition,
    s: usize,
    q: InnerNorm,
) -> Result<NspVerdict> {
    check_nsp_block_with(a, partition, s, q, &CertifyConfig::default())
}

pub fn check_nsp_block_with(
    a: &DenseMatrix,
    partition: &BlockPartition,
    s: usize,
    q: InnerNorm,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    if partition.dim() != a.cols() {
        return Err(invalid("partition dimension must match column count"));
    }
    let nullb = orthonormal_null_basis(a);
    match q {
        InnerNorm::One => sign_lp_core(&nullb, partition, s, q),
        _ => block_parametric(&nullb, partition, s, q, cfg),
    }
}

/// Nonnegative block null space property of order `s` (inner norm 1 on the
/// cone). Two-phase LP enumeration over block supports; exact.
pub fn check_nsp_block_nonneg(
    a: &DenseMatrix,
    partition: &BlockPartition,
    s: usize,
) -> Result<NspVerdict> {
    if partition.dim() != a.cols() {
        return Err(invalid("partition dimension must match column count"));
    }
    let nullb = orthonormal_null_basis(a);
    nonneg_core(&nullb, partition, s)
}

/// Shared sign-pattern LP core. The support ranges over blocks; with
/// singleton blocks this is the classical property. For each support and
/// each sign pattern on its coordinates, maximize the signed on-support sum
/// subject to off-support 1-norm at most one; any optimum reaching one is a
/// violation.
fn sign_lp_core(
    nullb: &[Vec<f64>],
    partition: &BlockPartition,
    s: usize,
    q: InnerNorm,
) -> Result<NspVerdict> {
    debug_assert!(matches!(q, InnerNorm::One));
    if s == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let d = nullb.len();
    let n = partition.dim();
    let k = partition.num_blocks();
    let s_eff = s.min(k);
    if d == 0 {
        return Ok(NspVerdict::holds_with(s, Method::Exact));
    }
    subsets::check_cap(k, s_eff)?;

    // Sign patterns multiply the subset count by 2^|T| where T is the
    // largest coordinate set any s blocks can have.
    let mut sizes = partition.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let max_t: usize = sizes.iter().take(s_eff).sum();
    if max_t >= 63
        || subsets::binomial(k, s_eff).saturating_mul(1u64 << max_t) > SIGN_CAP
    {
        return Err(invalid(
            "sign-pattern enumeration too large for this partition and order",
        ));
    }

    let nrow = |j: usize| -> Vec<f64> { nullb.iter().map(|col| col[j]).collect() };

    let mut best: Option<Witness> = None;
    let mut near_tie = false;
    let mut trouble = false;

    for sub in subsets::combinations(k, s_eff) {
        let t_coords: Vec<usize> = sub
            .iter()
            .flat_map(|&bi| partition.block(bi).iter().copied())
            .collect();
        let comp_coords: Vec<usize> = (0..k)
            .filter(|bi| !sub.contains(bi))
            .flat_map(|bi| partition.block(bi).iter().copied())
            .collect();
        let nc = comp_coords.len();
        let nt = t_coords.len();

        // Variables: [c (d) | u (nc) | slack p (nc) | slack r (nc) | w (1)].
        let width = d + 3 * nc + 1;
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * nc + 1);
        let mut rhs: Vec<f64> = Vec::with_capacity(2 * nc + 1);
        for (jj, &j) in comp_coords.iter().enumerate() {
            let nr = nrow(j);
            let mut r1 = vec![0.0; width];
            r1[..d].copy_from_slice(&nr);
            r1[d + jj] = -1.0;
            r1[d + nc + jj] = 1.0;
            rows.push(r1);
            rhs.push(0.0);
            let mut r2 = vec![0.0; width];
            for (i, v) in nr.iter().enumerate() {
                r2[i] = -v;
            }
            r2[d + jj] = -1.0;
            r2[d + 2 * nc + jj] = 1.0;
            rows.push(r2);
            rhs.push(0.0);
        }
        let mut r3 = vec![0.0; width];
        for jj in 0..nc {
            r3[d + jj] = 1.0;
        }
        r3[width - 1] = 1.0;
        rows.push(r3);
        rhs.push(1.0);

        let mut lower = vec![0.0; width];
        let mut upper = vec![f64::INFINITY; width];
        for i in 0..d {
            lower[i] = -LP_BOX;
            upper[i] = LP_BOX;
        }
        let a_eq = DenseMatrix::from_rows(rows)?;

        for mask in 0u64..(1u64 << nt) {
            let mut objective = vec![0.0; width];
            for (tt, &j) in t_coords.iter().enumerate() {
                let sigma = if mask >> tt & 1 == 1 { -1.0 } else { 1.0 };
                let nr = nrow(j);
                for (i, v) in nr.iter().enumerate() {
                    objective[i] += sigma * v;
                }
            }
            let lp = LpProblem::new(
                Sense::Maximize,
                objective,
                a_eq.clone(),
                rhs.clone(),
                lower.clone(),
                upper.clone(),
            )?;
            match solve_lp(&lp) {
                Ok(sol) if sol.status == LpStatus::Optimal => {
                    if sol.objective >= 1.0 {
                        let v: Vec<f64> = (0..n)
                            .map(|j| {
                                let nr = nrow(j);
                                nr.iter().zip(&sol.point[..d]).map(|(a, c)| a * c).sum()
                            })
                            .collect();
                        let vn = normalize_inf(&v);
                        let on: f64 = sub
                            .iter()
                            .map(|&bi| l1_norm(&partition.gather(&vn, bi)))
                            .sum();
                        let total: f64 = (0..k)
                            .map(|bi| l1_norm(&partition.gather(&vn, bi)))
                            .sum();
                        let margin = (total - on) - on;
                        let better = best
                            .as_ref()
                            .map(|b| margin < b.margin)
                            .unwrap_or(true);
                        if better {
                            best = Some(Witness {
                                support: SupportSet::new(sub.clone(), k)?,
                                element: Signal::Vector(vn),
                                margin,
                            });
                        }
                    } else if sol.objective >= 1.0 - STRICTNESS_MARGIN {
                        near_tie = true;
                    }
                }
                Ok(_) => trouble = true,
                Err(Error::LpStalled(_)) => trouble = true,
                Err(e) => return Err(e),
            }
        }
    }

    match best {
        Some(w) if w.margin <= 0.0 => Ok(NspVerdict::fails_with(s, Method::Exact, w)),
        // A claimed violation whose recomputed margin is positive is solver
        // noise at the threshold.
        Some(_) => Ok(NspVerdict::inconclusive(s)),
        None if near_tie || trouble => Ok(NspVerdict::inconclusive(s)),
        None => Ok(NspVerdict::holds_with(s, Method::Exact)),
    }
}

/// Shared two-phase nonnegative core over block supports. Phase one
/// maximizes the coordinate sum on the cone (off-support blocks
/// nonpositive) inside a unit box; a clearly positive optimum is a
/// violation. Phase two looks for nonzero cone elements with coordinate sum
/// exactly zero, which are tie violations with margin zero.
fn nonneg_core(
    nullb: &[Vec<f64>],
    partition: &BlockPartition,
    s: usize,
) -> Result<NspVerdict> {
    if s == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let d = nullb.len();
    let n = partition.dim();
    let k = partition.num_blocks();
    let s_eff = s.min(k);
    if d == 0 {
        return Ok(NspVerdict::holds_with(s, Method::Exact));
    }
    subsets::check_cap(k, s_eff)?;

    let nrow = |j: usize| -> Vec<f64> { nullb.iter().map(|col| col[j]).collect() };
    let colsum: Vec<f64> = (0..d).map(|i| (0..n).map(|j| nullb[i][j]).sum()).collect();

    let mut best: Option<Witness> = None;
    let mut tie: Option<Witness> = None;
    let mut trouble = false;

    for sub in subsets::combinations(k, s_eff) {
        let t_coords: Vec<usize> = sub
            .iter()
            .flat_map(|&bi| partition.block(bi).iter().copied())
            .collect();
        let comp_coords: Vec<usize> = (0..k)
            .filter(|bi| !sub.contains(bi))
            .flat_map(|bi| partition.block(bi).iter().copied())
            .collect();
        let nc = comp_coords.len();
        let nt = t_coords.len();

        // Variables: [c (d, free) | cone slacks (nc) | lower slacks (n) |
        // upper slacks (nt)]; rows pin v_off <= 0 and |v| <= 1.
        let width = d + nc + n + nt;
        let build_rows = |with_sum_row: bool| -> (DenseMatrix, Vec<f64>) {
            let extra = if with_sum_row { 1 } else { 0 };
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nc + n + nt + extra);
            let mut rhs: Vec<f64> = Vec::with_capacity(nc + n + nt + extra);
            for (jj, &j) in comp_coords.iter().enumerate() {
                let mut r = vec![0.0; width];
                r[..d].copy_from_slice(&nrow(j));
                r[d + jj] = 1.0;
                rows.push(r);
                rhs.push(0.0);
            }
            for j in 0..n {
                let mut r = vec![0.0; width];
                for (i, v) in nrow(j).iter().enumerate() {
                    r[i] = -v;
                }
                r[d + nc + j] = 1.0;
                rows.push(r);
                rhs.push(1.0);
            }
            for (tt, &j) in t_coords.iter().enumerate() {
                let mut r = vec![0.0; width];
                r[..d].copy_from_slice(&nrow(j));
                r[d + nc + n + tt] = 1.0;
                rows.push(r);
                rhs.push(1.0);
            }
            if with_sum_row {
                let mut r = vec![0.0; width];
                r[..d].copy_from_slice(&colsum);
                rows.push(r);
                rhs.push(0.0);
            }
            (
                DenseMatrix::from_rows(rows).expect("nonempty rows"),
                rhs,
            )
        };
        let mut lower = vec![0.0; width];
        let upper = vec![f64::INFINITY; width];
        for i in 0..d {
            lower[i] = f64::NEG_INFINITY;
        }
        let extract = |point: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    nrow(j)
                        .iter()
                        .zip(&point[..d])
                        .map(|(a, c)| a * c)
                        .sum()
                })
                .collect()
        };

        let (a_eq, rhs) = build_rows(false);
        let mut objective = vec![0.0; width];
        objective[..d].copy_from_slice(&colsum);
        let lp = LpProblem::new(
            Sense::Maximize,
            objective,
            a_eq,
            rhs,
            lower.clone(),
            upper.clone(),
        )?;
        let phase_a = match solve_lp(&lp) {
            Ok(sol) if sol.status == LpStatus::Optimal => Some(sol),
            Ok(_) => {
                trouble = true;
                None
            }
            Err(Error::LpStalled(_)) => {
                trouble = true;
                None
            }
            Err(e) => return Err(e),
        };
        let Some(phase_a) = phase_a else { continue };

        if phase_a.objective > STRICTNESS_MARGIN {
            let v = extract(&phase_a.point);
            let margin = -v.iter().sum::<f64>();
            let better = best.as_ref().map(|b| margin < b.margin).unwrap_or(true);
            if better {
                best = Some(Witness {
                    support: SupportSet::new(sub.clone(), k)?,
                    element: Signal::Vector(v),
                    margin,
                });
            }
            continue;
        }

        // Tie search: only worth running until one tie is found.
        if tie.is_some() {
            continue;
        }
        let (a_eq_b, rhs_b) = build_rows(true);
        'coords: for j in 0..n {
            for dir in [1.0, -1.0] {
                let mut objective = vec![0.0; width];
                for (i, v) in nrow(j).iter().enumerate() {
                    objective[i] = dir * v;
                }
                let lp = LpProblem::new(
                    Sense::Maximize,
                    objective,
                    a_eq_b.clone(),
                    rhs_b.clone(),
                    lower.clone(),
                    upper.clone(),
                )?;
                match solve_lp(&lp) {
                    Ok(sol) if sol.status == LpStatus::Optimal => {
                        if sol.objective > NONZERO_TOL {
                            let v = normalize_inf(&extract(&sol.point));
                            tie = Some(Witness {
                                support: SupportSet::new(sub.clone(), k)?,
                                element: Signal::Vector(v),
                                margin: 0.0,
                            });
                            break 'coords;
                        }
                    }
                    Ok(_) => trouble = true,
                    Err(Error::LpStalled(_)) => trouble = true,
                    Err(e) => return Err(e),
                }
            }
        }
    }

    match best.or(tie) {
        Some(w) => Ok(NspVerdict::fails_with(s, Method::Exact, w)),
        None if trouble => Ok(NspVerdict::inconclusive(s)),
        None => Ok(NspVerdict::holds_with(s, Method::Exact)),
    }
}

/// Parametric block path for inner norms 2 and infinity.
fn block_parametric(
    nullb: &[Vec<f64>],
    partition: &BlockPartition,
    s: usize,
    q: InnerNorm,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    if s == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let d = nullb.len();
    let k = partition.num_blocks();
    let s_eff = s.min(k);
    if d == 0 {
        return Ok(NspVerdict::holds_with(s, Method::Exact));
    }

    let block_norms = |v: &[f64]| -> Vec<f64> {
        (0..k).map(|bi| q.eval(&partition.gather(v, bi))).collect()
    };

    if d == 1 {
        // Norms are even in the direction, so one sign suffices.
        let v = normalize_inf(&nullb[0]);
        let (margin, sup) = grouped_margin(&block_norms(&v), s_eff);
        return if margin <= 0.0 {
            Ok(NspVerdict::fails_with(
                s,
                Method::Exact,
                Witness {
                    support: SupportSet::new(sup, k)?,
                    element: Signal::Vector(v),
                    margin,
                },
            ))
        } else {
            Ok(NspVerdict::holds_with(s, Method::Exact))
        };
    }

    if d == 2 {
        return block_angular(nullb, partition, s, s_eff, q);
    }

    // Randomized falsifier on the null space sphere.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = partition.dim();
    for _ in 0..cfg.samples {
        let u = sample_unit(&mut rng, d);
        let v: Vec<f64> = (0..n)
            .map(|j| nullb.iter().zip(&u).map(|(col, c)| col[j] * c).sum())
            .collect();
        let vn = normalize_inf(&v);
        let (margin, sup) = grouped_margin(&block_norms(&vn), s_eff);
        if margin <= 0.0 {
            return Ok(NspVerdict::fails_with(
                s,
                Method::FalsifiedOnly,
                Witness {
                    support: SupportSet::new(sup, k)?,
                    element: Signal::Vector(vn),
                    margin,
                },
            ));
        }
    }
    Ok(NspVerdict::holds_with(s, Method::Numerical))
}

/// Certified two-dimensional search: the margin as a function of the angle
/// is Lipschitz with constant bounded by the sum of basis block norms, so a
/// fine grid plus interval refinement decides the sign everywhere unless
/// the margin touches zero tangentially (reported inconclusive).
fn block_angular(
    nullb: &[Vec<f64>],
    partition: &BlockPartition,
    s: usize,
    s_eff: usize,
    q: InnerNorm,
) -> Result<NspVerdict> {
    let k = partition.num_blocks();
    let n = partition.dim();
    let w1 = &nullb[0];
    let w2 = &nullb[1];
    let lipschitz: f64 = (0..k)
        .map(|bi| q.eval(&partition.gather(w1, bi)) + q.eval(&partition.gather(w2, bi)))
        .sum();

    let direction = |theta: f64| -> Vec<f64> {
        let (st, ct) = theta.sin_cos();
        (0..n).map(|j| ct * w1[j] + st * w2[j]).collect()
    };
    let eval = |theta: f64| -> (f64, Vec<usize>) {
        let v = direction(theta);
        let norms: Vec<f64> = (0..k).map(|bi| q.eval(&partition.gather(&v, bi))).collect();
        grouped_margin(&norms, s_eff)
    };
    let fail_at = |theta: f64, sup: Vec<usize>| -> Result<NspVerdict> {
        let v = normalize_inf(&direction(theta));
        let norms: Vec<f64> = (0..k).map(|bi| q.eval(&partition.gather(&v, bi))).collect();
        let total: f64 = norms.iter().sum();
        let on: f64 = sup.iter().map(|&i| norms[i]).sum();
        Ok(NspVerdict::fails_with(
            s,
            Method::Exact,
            Witness {
                support: SupportSet::new(sup, k)?,
                element: Signal::Vector(v),
                margin: total - 2.0 * on,
            },
        ))
    };

    // Directions repeat with opposite sign after half a turn and all block
    // norms are even, so [0, pi) covers everything.
    let h = std::f64::consts::PI / ANGULAR_GRID as f64;
    let clear = |margin: f64, halfwidth: f64| margin >= STRICTNESS_MARGIN + lipschitz * halfwidth;
    let mut stack: Vec<(f64, f64)> = Vec::new();
    for i in 0..ANGULAR_GRID {
        let mid = (i as f64 + 0.5) * h;
        let (margin, sup) = eval(mid);
        if margin <= 0.0 {
            return fail_at(mid, sup);
        }
        if !clear(margin, h / 2.0) {
            stack.push((i as f64 * h, mid));
            stack.push((mid, (i as f64 + 1.0) * h));
        }
    }
    let mut budget = REFINE_BUDGET;
    while let Some((lo, hi)) = stack.pop() {
        if budget == 0 {
            return Ok(NspVerdict::inconclusive(s));
        }
        budget -= 1;
        let mid = 0.5 * (lo + hi);
        let (margin, sup) = eval(mid);
        if margin <= 0.0 {
            return fail_at(mid, sup);
        }
        if !clear(margin, 0.5 * (hi - lo)) {
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    Ok(NspVerdict::holds_with(s, Method::Exact))
}

/// Eigenvalue (low-rank) null space property of order `s`: for every null
/// space matrix, the `s` largest absolute eigenvalues carry less mass than
/// the rest. Exact for null space dimension at most 1, randomized falsifier
/// beyond.
pub fn check_nsp_matrix(s: &MatrixSensing, order: usize) -> Result<NspVerdict> {
    check_nsp_matrix_with(s, order, &CertifyConfig::default())
}

pub fn check_nsp_matrix_with(
    s: &MatrixSensing,
    order: usize,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    if order == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let nullb = matrix_null_basis(s)?;
    let d = nullb.len();
    let n = s.dim();
    let s_eff = order.min(n);
    if d == 0 {
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    if d == 1 {
        // The eigenvalue magnitudes of -V equal those of V, so one
        // direction decides. All supports up to the order are enumerated
        // for witness completeness even though the top block is worst.
        let v = &nullb[0];
        let spec = symeig(v);
        let abs: Vec<f64> = spec.eigenvalues.iter().map(|l| l.abs()).collect();
        subsets::check_cap_upto(n, s_eff)?;
        let total: f64 = abs.iter().sum();
        let mut worst: Option<(f64, Vec<usize>)> = None;
        for size in 0..=s_eff {
            for sub in subsets::combinations(n, size) {
                let on: f64 = sub.iter().map(|&i| abs[i]).sum();
                let margin = total - 2.0 * on;
                if worst.as_ref().map(|w| margin < w.0).unwrap_or(true) {
                    worst = Some((margin, sub));
                }
            }
        }
        let (margin, sup) = worst.expect("at least the empty support");
        return if margin <= 0.0 {
            Ok(NspVerdict::fails_with(
                order,
                Method::Exact,
                Witness {
                    support: SupportSet::new(sup, n)?,
                    element: Signal::Matrix(v.clone()),
                    margin,
                },
            ))
        } else {
            Ok(NspVerdict::holds_with(order, Method::Exact))
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let u = sample_unit(&mut rng, d);
        let v = combine(&nullb, &u);
        let spec = symeig(&v);
        let abs: Vec<f64> = spec.eigenvalues.iter().map(|l| l.abs()).collect();
        let (margin, sup) = grouped_margin(&abs, s_eff);
        if margin <= 0.0 {
            return Ok(NspVerdict::fails_with(
                order,
                Method::FalsifiedOnly,
                Witness {
                    support: SupportSet::new(sup, n)?,
                    element: Signal::Matrix(v),
                    margin,
                },
            ));
        }
    }
    Ok(NspVerdict::holds_with(order, Method::Numerical))
}

fn combine(basis: &[SymMatrix], u: &[f64]) -> SymMatrix {
    let mut v = SymMatrix::zeros(basis[0].dim());
    for (b, c) in basis.iter().zip(u) {
        v.add_scaled(b, *c);
    }
    v
}

/// Semidefinite eigenvalue null space property of order `s`: whenever all
/// but `s` eigenvalues are nonpositive, the trace stays negative. Exact for
/// null space dimension at most 1; falsifier plus an iterative eigenvalue
/// clipping search beyond.
pub fn check_nsp_matrix_psd(s: &MatrixSensing, order: usize) -> Result<NspVerdict> {
    check_nsp_matrix_psd_with(s, order, &CertifyConfig::default())
}

pub fn check_nsp_matrix_psd_with(
    s: &MatrixSensing,
    order: usize,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    if order == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let nullb = matrix_null_basis(s)?;
    let d = nullb.len();
    let n = s.dim();
    let s_eff = order.min(n);
    if d == 0 {
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    // On the cone (all off-support eigenvalues nonpositive) the defining
    // inequality reduces to a negative trace, and enlarging the support by
    // nonpositive eigenvalues leaves the margin unchanged; so a direction
    // violates iff it has at most `s` positive eigenvalues and nonnegative
    // trace, with margin equal to minus the trace.
    let psd_violation = |v: &SymMatrix| -> Option<(f64, Vec<usize>)> {
        let spec = symeig(v);
        let npos = spec.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        if npos > s_eff {
            return None;
        }
        let trace: f64 = spec.eigenvalues.iter().sum();
        if trace >= 0.0 {
            Some((-trace, (0..npos).collect()))
        } else {
            None
        }
    };

    if d == 1 {
        for dir in [nullb[0].clone(), nullb[0].scale(-1.0)] {
            if let Some((margin, sup)) = psd_violation(&dir) {
                return Ok(NspVerdict::fails_with(
                    order,
                    Method::Exact,
                    Witness {
                        support: SupportSet::new(sup, n)?,
                        element: Signal::Matrix(dir),
                        margin,
                    },
                ));
            }
        }
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let u = sample_unit(&mut rng, d);
        let v = combine(&nullb, &u);
        for dir in [v.clone(), v.scale(-1.0)] {
            if let Some((margin, sup)) = psd_violation(&dir) {
                return Ok(NspVerdict::fails_with(
                    order,
                    Method::FalsifiedOnly,
                    Witness {
                        support: SupportSet::new(sup, n)?,
                        element: Signal::Matrix(dir),
                        margin,
                    },
                ));
            }
        }
    }

    // Iterative search: push the trace up while clipping surplus positive
    // eigenvalues, then validate the candidate by substitution.
    if let Some(v) = psd_clip_search(&nullb, s_eff, &mut rng) {
        if let Some((margin, sup)) = psd_violation(&v) {
            return Ok(NspVerdict::fails_with(
                order,
                Method::FalsifiedOnly,
                Witness {
                    support: SupportSet::new(sup, n)?,
                    element: Signal::Matrix(v),
                    margin,
                },
            ));
        }
    }
    Ok(NspVerdict::holds_with(order, Method::Numerical))
}

/// Alternates between the null space ball and matrices with at most `s`
/// positive eigenvalues while drifting toward larger trace. Heuristic; any
/// candidate is re-validated by the caller.
fn psd_clip_search(
    nullb: &[SymMatrix],
    s_eff: usize,
    rng: &mut ChaCha8Rng,
) -> Option<SymMatrix> {
    let d = nullb.len();
    let t: Vec<f64> = nullb.iter().map(|w| w.trace()).collect();
    let tnorm = l2_norm(&t);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if tnorm > 1e-12 {
        starts.push(t.iter().map(|x| x / tnorm).collect());
    }
    for _ in 0..SEARCH_RESTARTS {
        starts.push(sample_unit(rng, d));
    }
    let eta = 0.2 / tnorm.max(1.0);

    let mut best: Option<(f64, SymMatrix)> = None;
    for start in starts {
        let mut u = start;
        for _ in 0..SEARCH_ITERS {
            let v = combine(nullb, &u);
            let spec = symeig(&v);
            // Keep the s largest positive eigenvalues, drop the rest of the
            // positive part, keep the negative part.
            let n = v.dim();
            let mut clipped = SymMatrix::zeros(n);
            let mut kept_pos = 0;
            for (lam, qv) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
                let keep = if *lam > 0.0 {
                    kept_pos += 1;
                    kept_pos <= s_eff
                } else {
                    true
                };
                if keep {
                    for i in 0..n {
                        for j in i..n {
                            let val = clipped.get(i, j) + lam * qv[i] * qv[j];
                            clipped.set(i, j, val);
                        }
                    }
                }
            }
            let mut raw: Vec<f64> = nullb.iter().map(|w| clipped.dot_frob(w)).collect();
            for (r, ti) in raw.iter_mut().zip(&t) {
                *r += eta * ti;
            }
            let norm = l2_norm(&raw);
            if norm > 1.0 {
                for r in raw.iter_mut() {
                    *r /= norm;
                }
            }
            let delta: f64 = raw
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            u = raw;
            if delta <= 1e-10 {
                break;
            }
        }
        let v = combine(nullb, &u);
        let tr = v.trace();
        if best.as_ref().map(|b| tr > b.0).unwrap_or(true) {
            best = Some((tr, v));
        }
    }
    best.map(|b| b.1)
}

/// Block low-rank null space property of order `s`: any `s` blocks of a
/// null space matrix carry less nuclear mass than the rest. Requires the
/// operator to be block diagonal for the given partition. Exact for null
/// space dimension at most 1.
pub fn check_nsp_block_matrix(
    s: &MatrixSensing,
    partition: &BlockPartition,
    order: usize,
) -> Result<NspVerdict> {
    check_nsp_block_matrix_with(s, partition, order, &CertifyConfig::default())
}

pub fn check_nsp_block_matrix_with(
    s: &MatrixSensing,
    partition: &BlockPartition,
    order: usize,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    require_block_operator(s, partition)?;
    if order == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let nullb = matrix_null_basis(s)?;
    let d = nullb.len();
    let k = partition.num_blocks();
    let s_eff = order.min(k);
    if d == 0 {
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    let block_nuclear = |v: &SymMatrix| -> Vec<f64> {
        partition
            .blocks()
            .iter()
            .map(|b| nuclear_norm(&v.principal_block(b)))
            .collect()
    };

    if d == 1 {
        let v = &nullb[0];
        let (margin, sup) = grouped_margin(&block_nuclear(v), s_eff);
        return if margin <= 0.0 {
            Ok(NspVerdict::fails_with(
                order,
                Method::Exact,
                Witness {
                    support: SupportSet::new(sup, k)?,
                    element: Signal::Matrix(v.clone()),
                    margin,
                },
            ))
        } else {
            Ok(NspVerdict::holds_with(order, Method::Exact))
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let u = sample_unit(&mut rng, d);
        let v = combine(&nullb, &u);
        let (margin, sup) = grouped_margin(&block_nuclear(&v), s_eff);
        if margin <= 0.0 {
            return Ok(NspVerdict::fails_with(
                order,
                Method::FalsifiedOnly,
                Witness {
                    support: SupportSet::new(sup, k)?,
                    element: Signal::Matrix(v),
                    margin,
                },
            ));
        }
    }
    Ok(NspVerdict::holds_with(order, Method::Numerical))
}

/// Semidefinite block low-rank null space property of order `s`: whenever
/// all off-support blocks are negative semidefinite, the trace stays
/// negative. Exact for null space dimension at most 1; per-support
/// iterative search beyond, reported as numerical evidence.
pub fn check_nsp_block_matrix_psd(
    s: &MatrixSensing,
    partition: &BlockPartition,
    order: usize,
) -> Result<NspVerdict> {
    check_nsp_block_matrix_psd_with(s, partition, order, &CertifyConfig::default())
}

pub fn check_nsp_block_matrix_psd_with(
    s: &MatrixSensing,
    partition: &BlockPartition,
    order: usize,
    cfg: &CertifyConfig,
) -> Result<NspVerdict> {
    require_block_operator(s, partition)?;
    if order == 0 {
        return Err(invalid("order must be at least 1"));
    }
    let nullb = matrix_null_basis(s)?;
    let d = nullb.len();
    let k = partition.num_blocks();
    let s_eff = order.min(k);
    if d == 0 {
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    if d == 1 {
        // Adding a nonpositive-definite block to the support subtracts the
        // same amount from both sides, so the margin on the cone is minus
        // the trace and the minimal valid support is the set of blocks with
        // a positive eigenvalue.
        for dir in [nullb[0].clone(), nullb[0].scale(-1.0)] {
            let bad: Vec<usize> = partition
                .blocks()
                .iter()
                .enumerate()
                .filter(|(_, b)| {
                    symeig(&dir.principal_block(b))
                        .eigenvalues
                        .first()
                        .is_some_and(|&l| l > 0.0)
                })
                .map(|(i, _)| i)
                .collect();
            if bad.len() <= s_eff && dir.trace() >= 0.0 {
                let margin = -dir.trace();
                return Ok(NspVerdict::fails_with(
                    order,
                    Method::Exact,
                    Witness {
                        support: SupportSet::new(bad, k)?,
                        element: Signal::Matrix(dir),
                        margin,
                    },
                ));
            }
        }
        return Ok(NspVerdict::holds_with(order, Method::Exact));
    }

    subsets::check_cap(k, s_eff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for sub in subsets::combinations(k, s_eff) {
        let comp: Vec<usize> = (0..k).filter(|bi| !sub.contains(bi)).collect();
        if let Some(v) = nsd_block_search(&nullb, partition, &comp, &mut rng) {
            let margin = -v.trace();
            return Ok(NspVerdict::fails_with(
                order,
                Method::Numerical,
                Witness {
                    support: SupportSet::new(sub, k)?,
                    element: Signal::Matrix(v),
                    margin,
                },
            ));
        }
    }
    Ok(NspVerdict::holds_with(order, Method::Numerical))
}

/// Seeks a unit-ball null space element with nonnegative trace whose blocks
/// in `comp` are negative semidefinite, by alternating an NSD clip of those
/// blocks with projection back to null space coordinates and a trace ascent
/// step. Candidates failing validation are discarded.
fn nsd_block_search(
    nullb: &[SymMatrix],
    partition: &BlockPartition,
    comp: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<SymMatrix> {
    let d = nullb.len();
    let t: Vec<f64> = nullb.iter().map(|w| w.trace()).collect();
    let tnorm = l2_norm(&t);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if tnorm > 1e-12 {
        starts.push(t.iter().map(|x| x / tnorm).collect());
    }
    for _ in 0..SEARCH_RESTARTS {
        starts.push(sample_unit(rng, d));
    }
    let eta = 0.2 / tnorm.max(1.0);

    for start in starts {
        let mut u = start;
        for _ in 0..SEARCH_ITERS {
            let v = combine(nullb, &u);
            let mut clipped = v.clone();
            for &bi in comp {
                let b = partition.block(bi);
                let spec = symeig(&v.principal_block(b));
                let mut nsd = SymMatrix::zeros(b.len());
                for (lam, qv) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
                    if *lam < 0.0 {
                        for i in 0..b.len() {
                            for j in i..b.len() {
                                let val = nsd.get(i, j) + lam * qv[i] * qv[j];
                                nsd.set(i, j, val);
                            }
                        }
                    }
                }
                clipped.set_principal_block(b, &nsd);
            }
            let mut raw: Vec<f64> = nullb.iter().map(|w| clipped.dot_frob(w)).collect();
            for (r, ti) in raw.iter_mut().zip(&t) {
                *r += eta * ti;
            }
            let norm = l2_norm(&raw);
            if norm > 1.0 {
                for r in raw.iter_mut() {
                    *r /= norm;
                }
            }
            let delta: f64 = raw
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            u = raw;
            if delta <= 1e-10 {
                break;
            }
        }
        let v = combine(nullb, &u);
        let scale = v.frob_norm();
        if scale < 1e-6 || v.trace() < 0.0 {
            continue;
        }
        let cone_ok = comp.iter().all(|&bi| {
            symeig(&v.principal_block(partition.block(bi)))
                .eigenvalues
                .first()
                .is_none_or(|&l| l <= 1e-7 * scale)
        });
        if cone_ok {
            return Some(v);
        }
    }
    None
}

fn require_block_operator(s: &MatrixSensing, partition: &BlockPartition) -> Result<()> {
    match s.partition() {
        Some(p) if p == partition => Ok(()),
        _ => Err(invalid(
            "operator must declare exactly the block partition being checked",
        )),
    }
}

/// Turns a failure witness into a pair of distinct signals `(x0, z)` with
/// identical measurements and `objective(z) <= objective(x0)`, so `x0` is
/// never the unique optimum of the corresponding recovery program.
///
/// Unstructured sign settings split the witness across its certified
/// support; cone settings split it into its positive and negative parts,
/// which both lie in the cone. Spectral settings split along eigenvalues,
/// blockwise settings along blocks. Requires a verdict that fails with a
/// concrete witness element, so the method must be `Exact` or
/// `FalsifiedOnly`.
pub fn witness_to_counterexample(
    setting: &Setting,
    verdict: &NspVerdict,
) -> Result<(Signal, Signal)> {
    if verdict.holds || !matches!(verdict.method, Method::Exact | Method::FalsifiedOnly) {
        return Err(Error::NotAFailureWitness);
    }
    let w = verdict.witness.as_ref().ok_or(Error::NotAFailureWitness)?;
    match (setting, &w.element) {
        (Setting::Sparse, Signal::Vector(v)) => {
            if w.support.universe() != v.len() {
                return Err(invalid("witness support does not index coordinates"));
            }
            let mut x0 = vec![0.0; v.len()];
            let mut z = vec![0.0; v.len()];
            for (j, &vj) in v.iter().enumerate() {
                if w.support.contains(j) {
                    x0[j] = vj;
                } else {
                    z[j] = -vj;
                }
            }
            Ok((Signal::Vector(x0), Signal::Vector(z)))
        }
        (Setting::Block { partition, .. }, Signal::Vector(v)) => {
            if w.support.universe() != partition.num_blocks() || partition.dim() != v.len() {
                return Err(invalid("witness support does not index blocks"));
            }
            let mut x0 = vec![0.0; v.len()];
            let mut z = vec![0.0; v.len()];
            for (bi, blk) in partition.blocks().iter().enumerate() {
                for &j in blk {
                    if w.support.contains(bi) {
                        x0[j] = v[j];
                    } else {
                        z[j] = -v[j];
                    }
                }
            }
            Ok((Signal::Vector(x0), Signal::Vector(z)))
        }
        (Setting::SparseNonneg, Signal::Vector(v))
        | (Setting::BlockNonneg { .. }, Signal::Vector(v)) => {
            let (plus, minus) = signed_split_vector(v);
            Ok((Signal::Vector(plus), Signal::Vector(minus)))
        }
        (Setting::LowRank, Signal::Matrix(m)) => {
            if w.support.universe() != m.dim() {
                return Err(invalid("witness support does not index eigenvalues"));
            }
            let spec = symeig(m);
            let n = m.dim();
            let mut x0 = SymMatrix::zeros(n);
            let mut z = SymMatrix::zeros(n);
            for (idx, (lam, q)) in spec.eigenvalues.iter().zip(&spec.eigenvectors).enumerate() {
                let (target, sign) = if w.support.contains(idx) {
                    (&mut x0, 1.0)
                } else {
                    (&mut z, -1.0)
                };
                for i in 0..n {
                    for j in i..n {
                        let v = target.get(i, j) + sign * lam * q[i] * q[j];
                        target.set(i, j, v);
                    }
                }
            }
            Ok((Signal::Matrix(x0), Signal::Matrix(z)))
        }
        (Setting::LowRankPsd, Signal::Matrix(m)) => {
            let (plus, minus) = signed_split_matrix(m, None)?;
            Ok((Signal::Matrix(plus), Signal::Matrix(minus)))
        }
        (Setting::BlockLowRank { partition }, Signal::Matrix(m)) => {
            if w.support.universe() != partition.num_blocks() || partition.dim() != m.dim() {
                return Err(invalid("witness support does not index blocks"));
            }
            let n = m.dim();
            let mut x0 = SymMatrix::zeros(n);
            let mut z = SymMatrix::zeros(n);
            for (bi, blk) in partition.blocks().iter().enumerate() {
                let block = m.principal_block(blk);
                if w.support.contains(bi) {
                    x0.set_principal_block(blk, &block);
                } else {
                    z.set_principal_block(blk, &block.scale(-1.0));
                }
            }
            Ok((Signal::Matrix(x0), Signal::Matrix(z)))
        }
        (Setting::BlockLowRankPsd { partition }, Signal::Matrix(m)) => {
            let (plus, minus) = signed_split_matrix(m, Some(partition))?;
            Ok((Signal::Matrix(plus), Signal::Matrix(minus)))
        }
        _ => Err(invalid("witness shape does not match setting")),
    }
}
