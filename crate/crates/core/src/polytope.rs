//! Face-structure queries on finite point sets via separating-hyperplane
//! linear programs.
//!
//! A subset spans a face when some hyperplane touches the hull exactly at
//! that subset, every other point (and the origin, when it is part of the
//! hull) lying strictly below. Strictness is encoded as a unit gap; scaling
//! of the normal absorbs the choice of unit, within a coefficient box that
//! admits normals up to magnitude 1e6.

use crate::linalg::{l2_norm, DenseMatrix};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};
use crate::subsets;
use crate::{invalid, Result};

/// Bound on separating-normal coefficients.
const NORMAL_BOX: f64 = 1e6;

/// Distinctness threshold for input points.
const DISTINCT_TOL: f64 = 1e-12;

/// A finite set of labelled points, optionally augmented by the origin when
/// forming convex hulls.
#[derive(Clone, Debug)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    include_origin: bool,
}

impl PointSet {
    /// Points must be nonempty, share a positive dimension, and be pairwise
    /// distinct; with `include_origin` they must also avoid the origin.
    pub fn new(points: Vec<Vec<f64>>, include_origin: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("point set must be nonempty"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(invalid("points must have dimension at least 1"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(invalid("all points must share one dimension"));
        }
        if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(invalid("point coordinates must be finite"));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d: Vec<f64> = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                if l2_norm(&d) <= DISTINCT_TOL {
                    return Err(invalid(format!(
                        "points {i} and {j} coincide within 1e-12"
                    )));
                }
            }
        }
        if include_origin && points.iter().any(|p| l2_norm(p) <= DISTINCT_TOL) {
            return Err(invalid("origin-augmented point sets require nonzero points"));
        }
        Ok(PointSet {
            dim,
            points,
            include_origin,
        })
    }

    /// Columns of `a` as points.
    pub fn from_columns(a: &DenseMatrix, include_origin: bool) -> Result<Self> {
        let cols = (0..a.cols())
            .map(|j| (0..a.rows()).map(|i| a.get(i, j)).collect())
            .collect();
        PointSet::new(cols, include_origin)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn includes_origin(&self) -> bool {
        self.include_origin
    }
}

/// Whether the points indexed by `subset` span a face of the hull: some
/// hyperplane `c^T w = gamma` contains exactly them while every other hull
/// point satisfies `c^T w <= gamma - 1`. The origin counts as a hull point
/// when the set includes it.
///
/// Decided by a feasibility linear program, so both answers are certified;
/// a stalled pivot sequence surfaces as an error rather than a default.
pub fn spans_face(ps: &PointSet, subset: &[usize]) -> Result<bool> {
    if subset.is_empty() {
        return Err(invalid("face subset must be nonempty"));
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("face subset must be strictly increasing"));
    }
    if *subset.last().expect("nonempty") >= ps.len() {
        return Err(invalid("face subset index out of range"));
    }

    let d = ps.dim();
    let others: Vec<usize> = (0..ps.len()).filter(|i| !subset.contains(i)).collect();
    let extra = others.len() + usize::from(ps.include_origin);
    // Variables: [c (d, boxed) | gamma (free) | slacks (one per strict row)].
    let width = d + 1 + extra;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(subset.len() + extra);
    let mut rhs: Vec<f64> = Vec::with_capacity(subset.len() + extra);
    for &j in subset {
        let mut r = vec![0.0; width];
        r[..d].copy_from_slice(&ps.points[j]);
        r[d] = -1.0;
        rows.push(r);
        rhs.push(0.0);
    }
    for (slot, &l) in others.iter().enumerate() {
        let mut r = vec![0.0; width];
        r[..d].copy_from_slice(&ps.points[l]);
        r[d] = -1.0;
        r[d + 1 + slot] = 1.0;
        rows.push(r);
        rhs.push(-1.0);
    }
    if ps.include_origin {
        let mut r = vec![0.0; width];
        r[d] = -1.0;
        r[d + 1 + others.len()] = 1.0;
        rows.push(r);
        rhs.push(-1.0);
    }

    let mut lower = vec![-NORMAL_BOX; d];
    lower.push(f64::NEG_INFINITY);
    lower.extend(std::iter::repeat(0.0).take(extra));
    let mut upper = vec![NORMAL_BOX; d];
    upper.push(f64::INFINITY);
    upper.extend(std::iter::repeat(f64::INFINITY).take(extra));

    let lp = LpProblem::new(
        Sense::Minimize,
        vec![0.0; width],
        DenseMatrix::from_rows(rows)?,
        rhs,
        lower,
        upper,
    )?;
    match solve_lp(&lp)?.status {
        LpStatus::Optimal => Ok(true),
        LpStatus::Infeasible => Ok(false),
        LpStatus::Unbounded => Err(invalid("feasibility program reported unbounded")),
    }
}

/// Whether point `i` is a vertex of the hull, as the singleton face query.
pub fn is_vertex(ps: &PointSet, i: usize) -> Result<bool> {
    spans_face(ps, &[i])
}

/// Whether every subset of exactly `r` points spans a face.
pub fn is_neighborly(ps: &PointSet, r: usize) -> Result<bool> {
    if r == 0 {
        return Err(invalid("neighborliness order must be at least 1"));
    }
    if r > ps.len() {
        return Err(invalid("neighborliness order exceeds the number of points"));
    }
    subsets::check_cap(ps.len(), r)?;
    for subset in subsets::combinations(ps.len(), r) {
        if !spans_face(ps, &subset)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Neighborliness of the origin-augmented hull with respect to the nonzero
/// points: every subset of exactly `s` of them must span a face while the
/// origin stays strictly below the touching hyperplane.
pub fn is_outwardly_neighborly(ps: &PointSet, s: usize) -> Result<bool> {
    if !ps.include_origin {
        return Err(invalid(
            "outward neighborliness requires an origin-augmented point set",
        ));
    }
    is_neighborly(ps, s)
}
