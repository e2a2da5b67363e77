use nsp_core::family::{build_family, moment_curve_points, validate_family, verdict_summary};
use nsp_core::linalg::{orthonormal_null_basis, DenseMatrix};
use nsp_core::nsp::{check_nsp_classical, Method, NspVerdict};

#[test]
fn moment_points_follow_the_power_ladder() {
    assert_eq!(moment_curve_points(2, &[2.0]).unwrap(), vec![vec![2.0, 4.0]]);
    assert_eq!(
        moment_curve_points(4, &[1.0]).unwrap(),
        vec![vec![1.0, 1.0, 1.0, 1.0]]
    );
    assert_eq!(
        moment_curve_points(3, &[-1.0]).unwrap(),
        vec![vec![-1.0, 1.0, -1.0]]
    );
    let two = moment_curve_points(2, &[1.0, 3.0]).unwrap();
    assert_eq!(two, vec![vec![1.0, 1.0], vec![3.0, 9.0]]);
}

#[test]
fn moment_point_parameters_are_validated() {
    assert!(moment_curve_points(0, &[1.0]).is_err());
    assert!(moment_curve_points(2, &[]).is_err());
    assert!(moment_curve_points(2, &[0.0]).is_err());
    assert!(moment_curve_points(2, &[f64::NAN]).is_err());
    assert!(moment_curve_points(2, &[1.0, 1.0]).is_err());
    let err = moment_curve_points(4, &[1e4]).unwrap_err();
    assert!(err.to_string().contains("rescale"), "{err}");
}

#[test]
fn six_row_member_has_the_documented_layout() {
    let inst = build_family(6, 7, None).unwrap();
    assert_eq!(inst.a.rows(), 6);
    assert_eq!(inst.a.cols(), 8);
    assert_eq!(inst.s_star, 2);
    assert_eq!(inst.t_values, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert_eq!(inst.partition.num_blocks(), 7);
    assert_eq!(inst.partition.block(0), &[0, 1]);
    for blk in 1..7 {
        assert_eq!(inst.partition.block(blk), &[blk + 1]);
    }

    let pts = moment_curve_points(4, &inst.t_values).unwrap();
    let centroid: Vec<f64> = (0..4)
        .map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / 6.0)
        .collect();
    assert_eq!(inst.interior_point, centroid);
    for j in 0..4 {
        assert_eq!(inst.a.get(j, 0), centroid[j]);
        assert_eq!(inst.a.get(j, 1), centroid[j]);
    }
    assert_eq!(inst.a.get(4, 0), 1.0);
    assert_eq!(inst.a.get(5, 0), 0.0);
    assert_eq!(inst.a.get(4, 1), 0.0);
    assert_eq!(inst.a.get(5, 1), 1.0);
    for (i, p) in pts.iter().enumerate() {
        for (j, &x) in p.iter().enumerate() {
            assert_eq!(inst.a.get(j, i + 2), x);
        }
        assert_eq!(inst.a.get(4, i + 2), 0.0);
        assert_eq!(inst.a.get(5, i + 2), 0.0);
    }
    assert_eq!(orthonormal_null_basis(&inst.a).len(), 2);
}

#[test]
fn twelve_row_member_builds_with_critical_order_five() {
    let inst = build_family(12, 13, None).unwrap();
    assert_eq!(inst.a.rows(), 12);
    assert_eq!(inst.a.cols(), 14);
    assert_eq!(inst.s_star, 5);
    assert_eq!(inst.partition.num_blocks(), 13);
    assert_eq!(orthonormal_null_basis(&inst.a).len(), 2);
}

#[test]
fn negative_parameters_build_as_well() {
    let inst = build_family(6, 7, Some(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0])).unwrap();
    assert_eq!(inst.a.cols(), 8);
    assert_eq!(orthonormal_null_basis(&inst.a).len(), 2);
}

#[test]
fn builder_rejects_bad_shapes() {
    assert!(build_family(2, 5, None).is_err());
    assert!(build_family(6, 6, None).is_err());
    assert!(build_family(6, 5, None).is_err());
    assert!(build_family(6, 7, Some(&[1.0, 2.0, 3.0])).is_err());
}

#[test]
fn six_row_validation_passes_the_blockwise_checks() {
    let inst = build_family(6, 7, None).unwrap();
    let report = validate_family(&inst).unwrap();
    assert_eq!(report.checks.len(), 2);
    assert!(report.all_passed);
    for (i, check) in report.checks.iter().enumerate() {
        assert!(check.passed, "{}: {}", check.label, check.observed);
        assert!(check.label.contains(&format!("order {}", i + 1)));
        assert_eq!(check.observed, "holds (exact)");
    }
}

#[test]
fn minimal_member_validates_vacuously() {
    let inst = build_family(3, 4, None).unwrap();
    assert_eq!(inst.s_star, 0);
    let report = validate_family(&inst).unwrap();
    assert!(report.checks.is_empty());
    assert!(report.all_passed);
}

#[test]
fn verdict_summaries_read_as_expected() {
    let identity = DenseMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let holds = check_nsp_classical(&identity, 1).unwrap();
    assert_eq!(verdict_summary(&holds), "holds (exact)");

    let tie = DenseMatrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
    let fails = check_nsp_classical(&tie, 1).unwrap();
    let summary = verdict_summary(&fails);
    assert!(
        summary.starts_with("fails (exact), support {"),
        "{summary}"
    );
    assert!(summary.contains("margin"), "{summary}");

    let inconclusive = NspVerdict {
        holds: false,
        order: 3,
        method: Method::Inconclusive,
        witness: None,
    };
    assert_eq!(verdict_summary(&inconclusive), "inconclusive at order 3");
}
