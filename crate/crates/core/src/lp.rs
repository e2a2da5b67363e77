//! A self-contained dense two-phase simplex solver.
//!
//! The certifiers generate many small, exactly-posed linear programs (tens of
//! variables, tens of rows). This kernel favors predictability over speed:
//! dense tableau, bounded variables handled by column mirroring instead of
//! extra rows, a smallest-index entering rule, a fixed pivot tolerance, and a
//! hard iteration cap that surfaces as an error instead of looping. Rows are
//! equilibrated to unit coefficient magnitude so tolerances act relatively,
//! and every claimed optimum is re-checked against the original system before
//! it is returned.
//!
//! Problems are stated with equality constraints plus per-variable bounds,
//! where a bound of `f64::INFINITY` / `f64::NEG_INFINITY` means unbounded on
//! that side. Free variables are split into nonnegative pairs internally.

use crate::linalg::{dot, DenseMatrix};
use crate::{invalid, Error, Result};

/// Entries smaller than this never serve as pivots.
pub const PIVOT_TOL: f64 = 1e-10;

/// Basic values at or below this count as degenerate zeros in the ratio test.
const DEGEN_TOL: f64 = 1e-11;

/// Relative window within which leaving-row ratios count as tied.
const RATIO_TIE: f64 = 1e-12;

/// Iteration cap factor, multiplied by tableau width plus row count.
const ITER_FACTOR: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `sense (c^T x)` subject to `a_eq x = b_eq` and `lower <= x <= upper`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub a_eq: DenseMatrix,
    pub b_eq: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        sense: Sense,
        objective: Vec<f64>,
        a_eq: DenseMatrix,
        b_eq: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let d = objective.len();
        if d == 0 {
            return Err(invalid("LP needs at least one variable"));
        }
        if a_eq.cols() != d || lower.len() != d || upper.len() != d {
            return Err(invalid("LP objective, bounds, and columns must agree"));
        }
        if a_eq.rows() != b_eq.len() {
            return Err(invalid("LP right-hand side length must match row count"));
        }
        if objective.iter().any(|v| !v.is_finite()) || b_eq.iter().any(|v| !v.is_finite()) {
            return Err(invalid("LP objective and right-hand side must be finite"));
        }
        for j in 0..d {
            let (l, u) = (lower[j], upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(invalid("LP bounds must be ordered and not NaN"));
            }
            if l > u {
                return Err(invalid("LP bounds must satisfy lower <= upper"));
            }
        }
        Ok(LpProblem {
            sense,
            objective,
            a_eq,
            b_eq,
            lower,
            upper,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `objective` and `point` are meaningful only when the
/// status is `Optimal`; an unbounded problem reports a signed infinity and an
/// infeasible one reports NaN, both with an empty point.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub point: Vec<f64>,
}

enum VarMap {
    Shift { col: usize, lower: f64 },
    Negate { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

enum End {
    Optimal,
    Unbounded,
}

/// Working tableau. Every tableau variable lives in `[0, ub]`; a mirrored
/// column stands for `ub - y` of its original variable, which keeps all
/// nonbasic variables at zero.
struct Tableau {
    t: Vec<Vec<f64>>,
    b: Vec<f64>,
    basis: Vec<usize>,
    ub: Vec<f64>,
    mirror: Vec<bool>,
}

/// Solves the program. The only error is [`Error::LpStalled`], raised when
/// pivoting exhausts the iteration cap or the final tableau fails the
/// consistency re-check; status outcomes are returned in the solution, never
/// as errors.
///
/// Runs a numerically stabilized pivot rule first; if that stalls, restarts
/// under Bland's rule, which cannot cycle.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    match solve_with(p, false) {
        Err(Error::LpStalled(_)) => solve_with(p, true),
        other => other,
    }
}

fn solve_with(p: &LpProblem, bland: bool) -> Result<LpSolution> {
    let d = p.objective.len();
    let eq_rows = p.a_eq.rows();
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // Shift, negate, or split every variable to reach y in [0, ub] form.
    let mut maps: Vec<VarMap> = Vec::with_capacity(d);
    let mut var_cols: Vec<Vec<f64>> = Vec::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut var_ub: Vec<f64> = Vec::new();
    let mut rhs: Vec<f64> = p.b_eq.clone();
    for j in 0..d {
        let (l, u) = (p.lower[j], p.upper[j]);
        let a_col: Vec<f64> = (0..eq_rows).map(|i| p.a_eq.get(i, j)).collect();
        let c = sign * p.objective[j];
        if l.is_finite() {
            for (r, a) in rhs.iter_mut().zip(&a_col) {
                *r -= a * l;
            }
            let col = var_cols.len();
            var_cols.push(a_col);
            costs.push(c);
            var_ub.push(if u.is_finite() { u - l } else { f64::INFINITY });
            maps.push(VarMap::Shift { col, lower: l });
        } else if u.is_finite() {
            for (r, a) in rhs.iter_mut().zip(&a_col) {
                *r -= a * u;
            }
            let col = var_cols.len();
            var_cols.push(a_col.iter().map(|v| -v).collect());
            costs.push(-c);
            var_ub.push(f64::INFINITY);
            maps.push(VarMap::Negate { col, upper: u });
        } else {
            let pos = var_cols.len();
            var_cols.push(a_col.clone());
            costs.push(c);
            var_ub.push(f64::INFINITY);
            let neg = var_cols.len();
            var_cols.push(a_col.iter().map(|v| -v).collect());
            costs.push(-c);
            var_ub.push(f64::INFINITY);
            maps.push(VarMap::Split { pos, neg });
        }
    }

    let structural = var_cols.len();
    let width = structural + eq_rows;

    let mut t: Vec<Vec<f64>> = Vec::with_capacity(eq_rows);
    let mut b: Vec<f64> = Vec::with_capacity(eq_rows);
    for i in 0..eq_rows {
        let mut row: Vec<f64> = var_cols.iter().map(|c| c[i]).collect();
        row.resize(width, 0.0);
        t.push(row);
        b.push(rhs[i]);
    }

    // Equilibrate each row to unit coefficient magnitude so the pivot
    // tolerance acts relatively; row scaling leaves the feasible set
    // unchanged.
    for (row, bv) in t.iter_mut().zip(b.iter_mut()) {
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            for v in row.iter_mut() {
                *v /= scale;
            }
            *bv /= scale;
        }
    }

    // Nonnegative right-hand side, then one artificial per row.
    for (row, bv) in t.iter_mut().zip(b.iter_mut()) {
        if *bv < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
            *bv = -*bv;
        }
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[structural + i] = 1.0;
    }
    let mut ub = var_ub;
    ub.resize(width, f64::INFINITY);
    let mut tab = Tableau {
        t,
        b,
        basis: (0..eq_rows).map(|i| structural + i).collect(),
        ub,
        mirror: vec![false; width],
    };
    let cap = ITER_FACTOR * (width + eq_rows + 1) * if bland { 10 } else { 1 };
    // Shifted box bounds inflate the right-hand side, so the infeasibility
    // threshold grows much slower than the raw magnitude or it would swallow
    // genuine gaps.
    let feas_tol = 1e-8 + 1e-11 * tab.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // Phase 1 minimizes the artificial sum; reduced costs are priced out
    // against the all-artificial basis.
    let mut obj = vec![0.0; width + 1];
    for (j, o) in obj.iter_mut().enumerate().take(width) {
        let z: f64 = tab.t.iter().map(|row| row[j]).sum();
        let cj = if j >= structural { 1.0 } else { 0.0 };
        *o = cj - z;
    }
    obj[width] = -tab.b.iter().sum::<f64>();
    match run_simplex(&mut tab, &mut obj, width, cap, bland)? {
        End::Optimal => {}
        // A sum of nonnegative variables is bounded below; reaching this arm
        // means the tableau degraded numerically.
        End::Unbounded => return Err(Error::LpStalled(cap)),
    }
    if -obj[width] > feas_tol {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            point: Vec::new(),
        });
    }

    // Drive artificials out of the basis on the largest available structural
    // pivot; rows with none are redundant and get dropped.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= structural {
            let jc = (0..structural)
                .max_by(|&a, &c| tab.t[r][a].abs().total_cmp(&tab.t[r][c].abs()))
                .expect("structural columns exist");
            if tab.t[r][jc].abs() > PIVOT_TOL {
                pivot(&mut tab, &mut obj, r, jc);
            } else {
                tab.t.remove(r);
                tab.b.remove(r);
                tab.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // Phase 2 objective, priced out against the current basis; mirrored
    // columns carry negated costs. Artificial columns are excluded from
    // entering.
    let mut obj2 = vec![0.0; width + 1];
    for j in 0..structural {
        obj2[j] = if tab.mirror[j] { -costs[j] } else { costs[j] };
    }
    for (i, &bj) in tab.basis.iter().enumerate() {
        let cb = obj2[bj];
        if cb != 0.0 {
            let row = tab.t[i].clone();
            let bval = tab.b[i];
            for j in 0..width {
                obj2[j] -= cb * row[j];
            }
            obj2[width] -= cb * bval;
        }
    }
    if let End::Unbounded = run_simplex(&mut tab, &mut obj2, structural, cap, bland)? {
        let objective = match p.sense {
            Sense::Minimize => f64::NEG_INFINITY,
            Sense::Maximize => f64::INFINITY,
        };
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective,
            point: Vec::new(),
        });
    }

    // A basic value outside its bounds means the tableau degraded; refuse to
    // certify such a point. The slack absorbs tie-window overshoot, which is
    // orders below the corruption this guards against.
    for (i, &bj) in tab.basis.iter().enumerate() {
        if tab.b[i] < -1e-5 || tab.b[i] > tab.ub[bj] + 1e-5 {
            return Err(Error::LpStalled(cap));
        }
    }
    let mut y = vec![0.0; width];
    for (i, &bj) in tab.basis.iter().enumerate() {
        y[bj] = tab.b[i];
    }
    for j in 0..width {
        if tab.mirror[j] {
            y[j] = tab.ub[j] - y[j];
        }
    }
    let point: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lower } => lower + y[col],
            VarMap::Negate { col, upper } => upper - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    for i in 0..eq_rows {
        let mut ax = 0.0;
        let mut mag = p.b_eq[i].abs();
        for j in 0..d {
            let term = p.a_eq.get(i, j) * point[j];
            ax += term;
            mag += term.abs();
        }
        if (ax - p.b_eq[i]).abs() > 1e-6 * (1.0 + mag) {
            return Err(Error::LpStalled(cap));
        }
    }
    let objective = dot(&p.objective, &point);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        point,
    })
}

/// How far the entering variable can move before something blocks it.
enum Block {
    /// The entering variable reaches its own upper bound.
    Flip,
    /// Basic variable in this row reaches a bound; `to_upper` says which.
    Row { row: usize, to_upper: bool },
}

/// Entering column is the smallest index with a negative reduced cost. The
/// leaving row minimizes the blocking ratio; among rows tied within a
/// relative window, the smallest basic variable index wins. The stabilized
/// rule additionally skips rows whose pivot is under a hundredth of the best
/// tied pivot, keeping divisions away from near-tolerance entries; under
/// `bland` every tied row is eligible, which rules out cycling. Basic values
/// within `DEGEN_TOL` of a bound count as exactly at it. A bound-to-bound
/// move of the entering variable mirrors its column in place of any pivot.
fn run_simplex(
    tab: &mut Tableau,
    obj: &mut [f64],
    allowed: usize,
    cap: usize,
    bland: bool,
) -> Result<End> {
    let clamp0 = |v: f64| if v <= DEGEN_TOL { 0.0 } else { v };
    for _ in 0..cap {
        let jc = match (0..allowed).find(|&j| obj[j] < -PIVOT_TOL) {
            None => return Ok(End::Optimal),
            Some(j) => j,
        };
        let mut min_limit = tab.ub[jc];
        for (i, row) in tab.t.iter().enumerate() {
            let a = row[jc];
            if a > PIVOT_TOL {
                min_limit = min_limit.min(clamp0(tab.b[i]) / a);
            } else if a < -PIVOT_TOL && tab.ub[tab.basis[i]].is_finite() {
                min_limit = min_limit.min(clamp0(tab.ub[tab.basis[i]] - tab.b[i]) / -a);
            }
        }
        if min_limit.is_infinite() {
            return Ok(End::Unbounded);
        }
        // A bound flip moves the variable across its whole range, so it is
        // taken only when that range really is the minimum.
        let block = if tab.ub[jc] <= min_limit * (1.0 + 1e-12) + DEGEN_TOL {
            Block::Flip
        } else {
            let window = min_limit + RATIO_TIE * (1.0 + min_limit);
            let limit_of = |i: usize, a: f64| -> Option<(f64, bool)> {
                if a > PIVOT_TOL {
                    Some((clamp0(tab.b[i]) / a, false))
                } else if a < -PIVOT_TOL && tab.ub[tab.basis[i]].is_finite() {
                    Some((clamp0(tab.ub[tab.basis[i]] - tab.b[i]) / -a, true))
                } else {
                    None
                }
            };
            let mut max_piv = 0.0f64;
            for (i, row) in tab.t.iter().enumerate() {
                if let Some((lim, _)) = limit_of(i, row[jc]) {
                    if lim <= window {
                        max_piv = max_piv.max(row[jc].abs());
                    }
                }
            }
            let piv_floor = if bland { 0.0 } else { 0.01 * max_piv };
            let mut chosen: Option<(usize, bool)> = None;
            for (i, row) in tab.t.iter().enumerate() {
                if let Some((lim, to_upper)) = limit_of(i, row[jc]) {
                    if lim <= window && row[jc].abs() >= piv_floor {
                        let better = chosen.is_none_or(|(ir, _)| tab.basis[i] < tab.basis[ir]);
                        if better {
                            chosen = Some((i, to_upper));
                        }
                    }
                }
            }
            let (row, to_upper) = chosen.expect("a finite blocking row exists");
            Block::Row { row, to_upper }
        };
        match block {
            Block::Flip => {
                let delta = tab.ub[jc];
                let width = obj.len() - 1;
                obj[width] -= obj[jc] * delta;
                obj[jc] = -obj[jc];
                for (row, bv) in tab.t.iter_mut().zip(tab.b.iter_mut()) {
                    *bv -= row[jc] * delta;
                    row[jc] = -row[jc];
                }
                tab.mirror[jc] = !tab.mirror[jc];
            }
            Block::Row { row, to_upper } => {
                if to_upper {
                    mirror_basic(tab, row);
                }
                pivot(tab, obj, row, jc);
            }
        }
    }
    Err(Error::LpStalled(cap))
}

/// Replaces the basic variable of `row` by its reflection off the upper
/// bound, so it can leave the basis at tableau value zero.
fn mirror_basic(tab: &mut Tableau, row: usize) {
    let bcol = tab.basis[row];
    for (j, v) in tab.t[row].iter_mut().enumerate() {
        if j != bcol {
            *v = -*v;
        }
    }
    tab.b[row] = tab.ub[bcol] - tab.b[row];
    tab.mirror[bcol] = !tab.mirror[bcol];
}

fn pivot(tab: &mut Tableau, obj: &mut [f64], ir: usize, jc: usize) {
    let width = obj.len() - 1;
    let piv = tab.t[ir][jc];
    for v in tab.t[ir].iter_mut() {
        *v /= piv;
    }
    tab.t[ir][jc] = 1.0;
    tab.b[ir] /= piv;
    let piv_row = tab.t[ir].clone();
    let piv_b = tab.b[ir];
    for (i, row) in tab.t.iter_mut().enumerate() {
        if i == ir {
            continue;
        }
        let f = row[jc];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&piv_row) {
                *v -= f * pv;
            }
            row[jc] = 0.0;
            tab.b[i] -= f * piv_b;
        }
    }
    let f = obj[jc];
    if f != 0.0 {
        for (v, pv) in obj.iter_mut().zip(&piv_row) {
            *v -= f * pv;
        }
        obj[jc] = 0.0;
        obj[width] -= f * piv_b;
    }
    tab.basis[ir] = jc;
}
