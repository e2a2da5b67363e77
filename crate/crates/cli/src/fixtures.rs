//! Built-in fixture suite pinning the arithmetic of three small hand-checked
//! instances: two split-bound counterexamples showing that a norm bound can
//! go negative under a bad decomposition, and a four-operator semidefinite
//! instance whose block verdicts differ with and without the cone.
//!
//! The first two fixtures are integer arithmetic and compared exactly; the
//! operator fixture normalizes a computed null space direction and allows
//! 1e-9 for the eigendecomposition round-off.

use crate::schema::{self, SCHEMA};
use nsp_core::family::verdict_summary;
use nsp_core::linalg::{l1_norm, nuclear_norm, BlockPartition, SymMatrix};
use nsp_core::nsp::{check_nsp_block_matrix, check_nsp_block_matrix_psd, null_space_basis, Method};
use nsp_core::sensing::{MatrixSensing, Sensing, Signal};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureItem {
    pub label: String,
    pub expected: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub items: Vec<FixtureItem>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureSuite {
    pub schema: String,
    pub fixtures: Vec<Fixture>,
    pub all_passed: bool,
    pub elapsed_ms: f64,
}

/// The four-operator semidefinite instance with blocks {1}, {2}, {3,4} and
/// b = (-1, 0, 0, 0). Its null space is one-dimensional.
pub fn psd_block_example() -> (MatrixSensing, BlockPartition, Vec<f64>) {
    let a1 = SymMatrix::diagonal(&[0.0, -1.0, -1.0, 2.0]).unwrap();
    let a2 = SymMatrix::diagonal(&[1.0, -1.0, -1.0, -1.0]).unwrap();
    let a3 = SymMatrix::diagonal(&[0.0, -1.0, 1.0, 0.0]).unwrap();
    let mut a4 = SymMatrix::zeros(4);
    a4.set(2, 3, 1.0);
    let part = BlockPartition::from_blocks(vec![vec![0], vec![1], vec![2, 3]]).unwrap();
    let sensing = MatrixSensing::new(vec![a1, a2, a3, a4], Some(part.clone())).unwrap();
    (sensing, part, vec![-1.0, 0.0, 0.0, 0.0])
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

fn exact_item(label: &str, expected: f64, observed: f64) -> FixtureItem {
    FixtureItem {
        label: label.into(),
        expected: fmt_num(expected),
        observed: fmt_num(observed),
        passed: expected == observed,
    }
}

fn masked_l1(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i].abs()).sum()
}

/// z = (2,0,0), x = (0,-1,0), and the split v = x - z = (8,9,0) - (10,10,0)
/// drive the decomposition bound to -1, strictly below the unit left side.
fn l1_split_bound() -> Fixture {
    let z = [2.0, 0.0, 0.0];
    let x = [0.0, -1.0, 0.0];
    let v: Vec<f64> = (0..3).map(|i| x[i] - z[i]).collect();
    let v1 = [8.0, 9.0, 0.0];
    let v2 = [10.0, 10.0, 0.0];
    let proj = [0usize, 1];
    let coproj = [2usize];

    let split_err: f64 = (0..3).map(|i| (v[i] - (v1[i] - v2[i])).abs()).sum();
    let term_z = l1_norm(&z);
    let term_v1 = masked_l1(&v1, &proj);
    let term_v2 = masked_l1(&v2, &proj);
    let term_v = masked_l1(&v, &coproj);
    let rhs = term_z + term_v1 - term_v2 - term_v;
    let lhs = l1_norm(&x);

    let mut items = vec![
        exact_item("split reproduces v = x - z", 0.0, split_err),
        exact_item("measured-signal term", 2.0, term_z),
        exact_item("projected plus-part term", 17.0, term_v1),
        exact_item("projected minus-part term", 20.0, term_v2),
        exact_item("off-support term", 0.0, term_v),
        exact_item("right-hand side", -1.0, rhs),
        exact_item("left-hand side", 1.0, lhs),
    ];
    items.push(FixtureItem {
        label: "bound fails".into(),
        expected: "right side < left side".into(),
        observed: format!("{} < {}", fmt_num(rhs), fmt_num(lhs)),
        passed: rhs < lhs,
    });
    let passed = items.iter().all(|i| i.passed);
    Fixture {
        name: "l1-split-bound".into(),
        items,
        passed,
    }
}

/// The matrix analogue on S^4 with blocks {1,2} and {3,4}: X = -E11,
/// Z = 0, and the split V = 0 - E11 drive the blockwise bound to -1.
fn block_nuclear_split_bound() -> Fixture {
    let n = 4;
    let blocks = [vec![0usize, 1], vec![2usize, 3]];
    let z = SymMatrix::zeros(n);
    let mut x = SymMatrix::zeros(n);
    x.set(0, 0, -1.0);
    let v = x.sub(&z);
    let v1 = SymMatrix::zeros(n);
    let mut v2 = SymMatrix::zeros(n);
    v2.set(0, 0, 1.0);

    let split_err = v.sub(&v1.sub(&v2)).frob_norm();
    let blockwise = |m: &SymMatrix| -> f64 {
        blocks
            .iter()
            .map(|b| nuclear_norm(&m.principal_block(b)))
            .sum()
    };
    let term_z = blockwise(&z);
    let term_v1 = nuclear_norm(&v1.principal_block(&blocks[0]));
    let term_v2 = nuclear_norm(&v2.principal_block(&blocks[0]));
    let term_v = nuclear_norm(&v.principal_block(&blocks[1]));
    let rhs = term_z + term_v1 - term_v2 - term_v;
    let lhs = blockwise(&x);

    let mut items = vec![
        exact_item("split reproduces V = X - Z", 0.0, split_err),
        exact_item("measured-signal term", 0.0, term_z),
        exact_item("projected plus-part term", 0.0, term_v1),
        exact_item("projected minus-part term", 1.0, term_v2),
        exact_item("off-support term", 0.0, term_v),
        exact_item("right-hand side", -1.0, rhs),
        exact_item("left-hand side", 1.0, lhs),
    ];
    items.push(FixtureItem {
        label: "bound fails".into(),
        expected: "right side < left side".into(),
        observed: format!("{} < {}", fmt_num(rhs), fmt_num(lhs)),
        passed: rhs < lhs,
    });
    let passed = items.iter().all(|i| i.passed);
    Fixture {
        name: "block-nuclear-split-bound".into(),
        items,
        passed,
    }
}

const NULL_TOL: f64 = 1e-9;

/// Null direction, verdict pair, and the order-1 inequality table of the
/// four-operator instance, with the direction scaled so that a = -1 in
/// diag(3a, a, a, a).
fn psd_block_operator() -> Fixture {
    let (sensing, part, _b) = psd_block_example();
    let mut items = Vec::new();

    let basis = null_space_basis(&Sensing::Matrix(sensing.clone())).unwrap();
    items.push(FixtureItem {
        label: "null space dimension".into(),
        expected: "1".into(),
        observed: format!("{}", basis.dim()),
        passed: basis.dim() == 1,
    });

    let mut scaled: Option<SymMatrix> = None;
    if let Some(Signal::Matrix(v)) = basis.elements().first() {
        let alpha = v.get(1, 1);
        if alpha.abs() > NULL_TOL {
            scaled = Some(v.scale(-1.0 / alpha));
        }
    }

    match &scaled {
        Some(v) => {
            let diag: Vec<f64> = (0..4).map(|i| v.get(i, i)).collect();
            let expected = [-3.0, -1.0, -1.0, -1.0];
            let mut off = 0.0f64;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    off = off.max(v.get(i, j).abs());
                }
            }
            let diag_ok = diag
                .iter()
                .zip(expected.iter())
                .all(|(d, e)| (d - e).abs() <= NULL_TOL);
            items.push(FixtureItem {
                label: "null direction, scaled to a = -1".into(),
                expected: "diag(-3, -1, -1, -1)".into(),
                observed: format!(
                    "diag({:.6}, {:.6}, {:.6}, {:.6}), max off-diagonal {:.1e}",
                    diag[0], diag[1], diag[2], diag[3], off
                ),
                passed: diag_ok && off <= NULL_TOL,
            });

            // Order-1 inequalities: trace over the support blocks against
            // nuclear norms off the support, at a = -1.
            let blocks = part.blocks();
            let table: [(&str, &[usize], f64, f64); 4] = [
                ("support {}", &[], 0.0, 6.0),
                ("support {1}", &[0], -3.0, 3.0),
                ("support {2}", &[1], -1.0, 5.0),
                ("support {3}", &[2], -2.0, 4.0),
            ];
            for (name, sel, exp_l, exp_r) in table {
                let lhs: f64 = sel
                    .iter()
                    .map(|&bi| v.principal_block(&blocks[bi]).trace())
                    .sum();
                let rhs: f64 = (0..blocks.len())
                    .filter(|bi| !sel.contains(bi))
                    .map(|bi| nuclear_norm(&v.principal_block(&blocks[bi])))
                    .sum();
                let passed = (lhs - exp_l).abs() <= NULL_TOL
                    && (rhs - exp_r).abs() <= NULL_TOL
                    && lhs < rhs;
                items.push(FixtureItem {
                    label: format!("order-1 inequality at {name}"),
                    expected: format!("{} < {}", fmt_num(exp_l), fmt_num(exp_r)),
                    observed: format!("{:.6} < {:.6}", lhs, rhs),
                    passed,
                });
            }
        }
        None => items.push(FixtureItem {
            label: "null direction, scaled to a = -1".into(),
            expected: "diag(-3, -1, -1, -1)".into(),
            observed: "no usable basis element".into(),
            passed: false,
        }),
    }

    let psd = check_nsp_block_matrix_psd(&sensing, &part, 1).unwrap();
    items.push(FixtureItem {
        label: "semidefinite block verdict at order 1".into(),
        expected: "holds (exact)".into(),
        observed: verdict_summary(&psd),
        passed: psd.holds && matches!(psd.method, Method::Exact),
    });

    let blk = check_nsp_block_matrix(&sensing, &part, 1).unwrap();
    let witness_ok = blk
        .witness
        .as_ref()
        .map(|w| w.support.indices() == [0] && w.margin.abs() <= NULL_TOL)
        .unwrap_or(false);
    items.push(FixtureItem {
        label: "block verdict at order 1".into(),
        expected: "fails (exact), support {1}, margin 0".into(),
        observed: verdict_summary(&blk),
        passed: !blk.holds && matches!(blk.method, Method::Exact) && witness_ok,
    });

    let passed = items.iter().all(|i| i.passed);
    Fixture {
        name: "psd-block-operator".into(),
        items,
        passed,
    }
}

pub fn run_fixture_suite() -> FixtureSuite {
    let t0 = Instant::now();
    let fixtures = vec![
        l1_split_bound(),
        block_nuclear_split_bound(),
        psd_block_operator(),
    ];
    let all_passed = fixtures.iter().all(|f| f.passed);
    FixtureSuite {
        schema: SCHEMA.into(),
        fixtures,
        all_passed,
        elapsed_ms: t0.elapsed().as_secs_f64() * 1e3,
    }
}

/// The operator fixture as an on-disk instance, used by the docs and tests.
pub fn psd_block_example_file(setting: &str) -> schema::InstanceFile {
    let (sensing, part, b) = psd_block_example();
    schema::InstanceFile::encode(
        setting,
        &Sensing::Matrix(sensing),
        Some(&part),
        None,
        Some(&b),
        None,
    )
}
