use nsp_core::linalg::DenseMatrix;
use nsp_core::lp::{solve_lp, LpProblem, LpStatus, Sense};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lp(
    sense: Sense,
    obj: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
) -> LpProblem {
    LpProblem::new(sense, obj, DenseMatrix::from_rows(rows).unwrap(), rhs, lower, upper).unwrap()
}

#[test]
fn minimizes_transport_split() {
    // min x1 + x2 s.t. x1 - x2 = 1, x >= 0: optimum (1, 0).
    let p = lp(
        Sense::Minimize,
        vec![1.0, 1.0],
        vec![vec![1.0, -1.0]],
        vec![1.0],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert!((s.point[0] - 1.0).abs() < 1e-9);
    assert!(s.point[1].abs() < 1e-9);
}

#[test]
fn maximizes_with_upper_bounds() {
    // max x1 + 2 x2 s.t. x1 + x2 = 3, 0 <= x <= 2: optimum (1, 2) value 5.
    let p = lp(
        Sense::Maximize,
        vec![1.0, 2.0],
        vec![vec![1.0, 1.0]],
        vec![3.0],
        vec![0.0, 0.0],
        vec![2.0, 2.0],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 5.0).abs() < 1e-9);
    assert!((s.point[0] - 1.0).abs() < 1e-9);
    assert!((s.point[1] - 2.0).abs() < 1e-9);
}

#[test]
fn handles_free_and_shifted_variables() {
    // min 2x + y with x free, y in [-1, 4], x + y = 2: push y up, x = -2.
    let p = lp(
        Sense::Minimize,
        vec![2.0, 1.0],
        vec![vec![1.0, 1.0]],
        vec![2.0],
        vec![f64::NEG_INFINITY, -1.0],
        vec![f64::INFINITY, 4.0],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.point[1] - 4.0).abs() < 1e-9);
    assert!((s.point[0] + 2.0).abs() < 1e-9);
    assert!((s.objective - 0.0).abs() < 1e-9);
}

#[test]
fn handles_negative_upper_bound_variables() {
    // max x with x <= -2, y >= 0, x + y = 0: the bound binds at x = -2.
    let p = lp(
        Sense::Maximize,
        vec![1.0, 0.0],
        vec![vec![1.0, 1.0]],
        vec![0.0],
        vec![f64::NEG_INFINITY, 0.0],
        vec![-2.0, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.point[0] + 2.0).abs() < 1e-9);
    assert!((s.point[1] - 2.0).abs() < 1e-9);
}

#[test]
fn reports_infeasible_systems() {
    // x >= 0 with x1 + x2 = -1 has no solution.
    let p = lp(
        Sense::Minimize,
        vec![1.0, 1.0],
        vec![vec![1.0, 1.0]],
        vec![-1.0],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Infeasible);
    assert!(s.objective.is_nan());
    assert!(s.point.is_empty());
}

#[test]
fn reports_unbounded_rays() {
    // min -x1 with x1 - x2 = 0, x >= 0: ray (t, t) drives the cost down.
    let p = lp(
        Sense::Minimize,
        vec![-1.0, 0.0],
        vec![vec![1.0, -1.0]],
        vec![0.0],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Unbounded);
    assert_eq!(s.objective, f64::NEG_INFINITY);
}

#[test]
fn unbounded_sign_follows_sense() {
    let p = lp(
        Sense::Maximize,
        vec![1.0, 0.0],
        vec![vec![1.0, -1.0]],
        vec![0.0],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Unbounded);
    assert_eq!(s.objective, f64::INFINITY);
}

#[test]
fn drops_redundant_rows() {
    // Duplicate constraint rows force an artificial to be driven out.
    let p = lp(
        Sense::Minimize,
        vec![1.0, 1.0],
        vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        vec![2.0, 2.0],
        vec![0.0, 0.0],
        vec![f64::INFINITY, f64::INFINITY],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 2.0).abs() < 1e-9);
}

#[test]
fn zero_objective_reports_feasibility() {
    let p = lp(
        Sense::Minimize,
        vec![0.0, 0.0],
        vec![vec![1.0, 2.0]],
        vec![4.0],
        vec![0.0, 0.0],
        vec![3.0, 3.0],
    );
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.point[0] + 2.0 * s.point[1] - 4.0).abs() < 1e-9);
}

#[test]
fn rejects_malformed_problems() {
    let a = DenseMatrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
    assert!(LpProblem::new(
        Sense::Minimize,
        vec![1.0],
        a.clone(),
        vec![1.0],
        vec![0.0],
        vec![1.0],
    )
    .is_err());
    assert!(LpProblem::new(
        Sense::Minimize,
        vec![1.0, 1.0],
        a.clone(),
        vec![1.0],
        vec![2.0, 0.0],
        vec![1.0, 1.0],
    )
    .is_err());
    assert!(LpProblem::new(
        Sense::Minimize,
        vec![1.0, f64::NAN],
        a,
        vec![1.0],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
    )
    .is_err());
}

struct RandomLp {
    problem: LpProblem,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    feasible_point: Vec<f64>,
}

fn random_feasible_lp(rng: &mut ChaCha8Rng) -> RandomLp {
    let n = 2 + rng.gen_range(0..4);
    let m = 1 + rng.gen_range(0..n.min(3));
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let rhs: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(&x0).map(|(a, x)| a * x).sum())
        .collect();
    let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..3.0)).collect();
    let problem = lp(
        Sense::Minimize,
        obj.clone(),
        rows.clone(),
        rhs.clone(),
        vec![0.0; n],
        vec![5.0; n],
    );
    RandomLp {
        problem,
        rows,
        rhs,
        obj,
        feasible_point: x0,
    }
}

#[test]
fn primal_feasibility_holds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut optimal = 0;
    for _ in 0..200 {
        let inst = random_feasible_lp(&mut rng);
        let s = solve_lp(&inst.problem).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        optimal += 1;
        for (r, &b) in inst.rows.iter().zip(&inst.rhs) {
            let ax: f64 = r.iter().zip(&s.point).map(|(a, x)| a * x).sum();
            assert!((ax - b).abs() < 1e-7, "row residual {}", (ax - b).abs());
        }
        for &x in &s.point {
            assert!((-1e-9..=5.0 + 1e-9).contains(&x));
        }
    }
    assert_eq!(optimal, 200);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Optimality spot check: the reported optimum must not exceed the value
    // at the feasible point the instance was built around, nor at any
    // convex combination of that point with the optimum.
    #[test]
    fn optimum_beats_known_feasible_points(seed in 0u64..2000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_feasible_lp(&mut rng);
        let s = solve_lp(&inst.problem).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        let value = |y: &[f64]| inst.obj.iter().zip(y).map(|(c, x)| c * x).sum::<f64>();
        prop_assert!(s.objective <= value(&inst.feasible_point) + 1e-7);
        for step in 1..5 {
            let lam = step as f64 / 5.0;
            let y: Vec<f64> = s
                .point
                .iter()
                .zip(&inst.feasible_point)
                .map(|(a, b)| lam * a + (1.0 - lam) * b)
                .collect();
            prop_assert!(s.objective <= value(&y) + 1e-7);
        }
    }
}
