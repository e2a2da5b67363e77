use nsp_core::family::moment_curve_points;
use nsp_core::linalg::DenseMatrix;
use nsp_core::nsp::{check_nsp_nonneg, Method};
use nsp_core::polytope::{
    is_neighborly, is_outwardly_neighborly, is_vertex, spans_face, PointSet,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn square() -> PointSet {
    PointSet::new(
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ],
        false,
    )
    .unwrap()
}

#[test]
fn square_edges_span_but_diagonals_do_not() {
    let ps = square();
    assert!(spans_face(&ps, &[0, 1]).unwrap());
    assert!(spans_face(&ps, &[1, 2]).unwrap());
    assert!(!spans_face(&ps, &[0, 2]).unwrap());
    assert!(!spans_face(&ps, &[1, 3]).unwrap());
    // The full set spans the improper face; a zero normal touches everything.
    assert!(spans_face(&ps, &[0, 1, 2, 3]).unwrap());
}

#[test]
fn square_corners_are_vertices_midpoints_are_not() {
    let ps = square();
    for i in 0..4 {
        assert!(is_vertex(&ps, i).unwrap());
    }
    let with_mid = PointSet::new(
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.0],
        ],
        false,
    )
    .unwrap();
    assert!(!is_vertex(&with_mid, 4).unwrap());
    assert!(is_vertex(&with_mid, 0).unwrap());
}

#[test]
fn origin_augmented_simplex_is_outwardly_neighborly() {
    let ps = PointSet::new(
        vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
        true,
    )
    .unwrap();
    for s in 1..=3 {
        assert!(is_outwardly_neighborly(&ps, s).unwrap(), "order {s}");
    }
}

#[test]
fn collinear_point_with_origin_breaks_outward_neighborliness() {
    let ps = PointSet::new(vec![vec![1.0], vec![2.0]], true).unwrap();
    assert!(!spans_face(&ps, &[0]).unwrap());
    assert!(spans_face(&ps, &[1]).unwrap());
    assert!(!is_outwardly_neighborly(&ps, 1).unwrap());
}

#[test]
fn outward_neighborliness_requires_the_origin_flag() {
    let ps = square();
    assert!(is_outwardly_neighborly(&ps, 1).is_err());
}

#[test]
fn face_subsets_are_validated() {
    let ps = square();
    assert!(spans_face(&ps, &[]).is_err());
    assert!(spans_face(&ps, &[4]).is_err());
    assert!(spans_face(&ps, &[1, 1]).is_err());
    assert!(spans_face(&ps, &[2, 1]).is_err());
}

#[test]
fn point_sets_are_validated() {
    assert!(PointSet::new(vec![], false).is_err());
    assert!(PointSet::new(vec![vec![1.0], vec![1.0, 2.0]], false).is_err());
    assert!(PointSet::new(vec![vec![1.0], vec![1.0]], false).is_err());
    assert!(PointSet::new(vec![vec![0.0, 0.0]], true).is_err());
    assert!(PointSet::new(vec![vec![f64::NAN]], false).is_err());
    assert!(PointSet::new(vec![vec![0.0, 0.0]], false).is_ok());
}

#[test]
fn neighborliness_equals_nonneg_verdict_on_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut holds = [0usize; 2];
    let mut fails = [0usize; 2];
    let mut tested = 0;
    while tested < 120 {
        let m = 2 + rng.gen_range(0..5);
        let n = (m + 1).max(3) + rng.gen_range(0..3);
        if n > 8 {
            continue;
        }
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let a = DenseMatrix::from_rows(rows).unwrap();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..m).map(|i| a.get(i, j)).collect())
            .collect();
        let ps = PointSet::new(cols, true).unwrap();
        tested += 1;
        for (si, s) in [1usize, 2].into_iter().enumerate() {
            let verdict = check_nsp_nonneg(&a, s).unwrap();
            assert_eq!(verdict.method, Method::Exact);
            let outward = is_outwardly_neighborly(&ps, s).unwrap();
            assert_eq!(
                verdict.holds, outward,
                "disagreement at order {s} on a {m}x{n} instance"
            );
            if verdict.holds {
                holds[si] += 1;
            } else {
                fails[si] += 1;
            }
        }
    }
    // Both outcomes must occur at both orders or the equivalence is vacuous.
    assert!(holds[0] > 0 && fails[0] > 0, "order 1 split {holds:?} {fails:?}");
    assert!(holds[1] > 0 && fails[1] > 0, "order 2 split {holds:?} {fails:?}");
}

#[test]
fn faces_restrict_to_faces_in_general_position() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let n = 6;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let ps = PointSet::new(pts, false).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                if spans_face(&ps, &[i, j]).unwrap() {
                    assert!(spans_face(&ps, &[i]).unwrap());
                    assert!(spans_face(&ps, &[j]).unwrap());
                }
            }
        }
    }
}

#[test]
fn cyclic_polytope_on_seven_points_is_two_neighborly() {
    let ts: Vec<f64> = (1..=7).map(|i| i as f64).collect();
    let pts = moment_curve_points(4, &ts).unwrap();
    let ps = PointSet::new(pts, false).unwrap();
    assert!(is_neighborly(&ps, 1).unwrap());
    assert!(is_neighborly(&ps, 2).unwrap());
    assert!(!is_neighborly(&ps, 3).unwrap());
}

#[test]
fn neighborliness_order_is_validated() {
    let ps = square();
    assert!(is_neighborly(&ps, 0).is_err());
    assert!(is_neighborly(&ps, 5).is_err());
}
