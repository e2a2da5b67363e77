use nsp_core::linalg::{
    l1_norm, l2_norm, linf_norm, mixed_norm_q1, mixed_norm_star1, nuclear_norm,
    orthonormal_null_basis, psd_project, signed_split_matrix, signed_split_vector, symeig,
    BlockPartition, DenseMatrix, InnerNorm, SymMatrix,
};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, rng.sample::<f64, _>(StandardNormal));
        }
    }
    m
}

#[test]
fn vector_norms_match_hand_values() {
    let v = [3.0, -4.0, 0.0];
    assert_eq!(l1_norm(&v), 7.0);
    assert_eq!(l2_norm(&v), 5.0);
    assert_eq!(linf_norm(&v), 4.0);
    assert_eq!(InnerNorm::One.eval(&v), 7.0);
    assert_eq!(InnerNorm::Two.eval(&v), 5.0);
    assert_eq!(InnerNorm::Inf.eval(&v), 4.0);
}

#[test]
fn partition_rejects_bad_covers() {
    assert!(BlockPartition::from_blocks(vec![vec![0], vec![2]]).is_err());
    assert!(BlockPartition::from_blocks(vec![vec![0, 1], vec![1, 2]]).is_err());
    assert!(BlockPartition::from_blocks(vec![vec![1, 0]]).is_err());
    assert!(BlockPartition::from_blocks(vec![]).is_err());
    let p = BlockPartition::from_blocks(vec![vec![0, 1], vec![2]]).unwrap();
    assert_eq!(p.dim(), 3);
    assert_eq!(p.num_blocks(), 2);
    assert_eq!(p.sizes(), vec![2, 1]);
}

#[test]
fn partition_from_sizes_lays_out_contiguously() {
    let p = BlockPartition::from_sizes(&[2, 1, 1]).unwrap();
    assert_eq!(p.blocks(), &[vec![0, 1], vec![2], vec![3]]);
    assert_eq!(p.gather(&[5.0, 6.0, 7.0, 8.0], 0), vec![5.0, 6.0]);
    assert_eq!(p.gather(&[5.0, 6.0, 7.0, 8.0], 2), vec![8.0]);
}

#[test]
fn sym_matrix_rejects_asymmetry_beyond_tolerance() {
    let bad = vec![vec![1.0, 0.5], vec![0.4, 1.0]];
    assert!(SymMatrix::from_rows(bad).is_err());
    let ok = vec![vec![1.0, 0.5 + 1e-10], vec![0.5, 1.0]];
    let m = SymMatrix::from_rows(ok).unwrap();
    assert!((m.get(0, 1) - m.get(1, 0)).abs() == 0.0);
}

#[test]
fn upper_triangle_round_trips() {
    let m = SymMatrix::from_rows(vec![
        vec![1.0, 2.0, 3.0],
        vec![2.0, 4.0, 5.0],
        vec![3.0, 5.0, 6.0],
    ])
    .unwrap();
    let ut = m.upper_triangle();
    assert_eq!(ut, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let back = SymMatrix::from_upper_triangle(3, &ut).unwrap();
    assert_eq!(back.get(2, 1), 5.0);
    assert_eq!(m.trace(), 11.0);
}

#[test]
fn principal_block_extracts_and_writes_back() {
    let mut m = SymMatrix::zeros(4);
    m.set(2, 2, 2.0);
    m.set(2, 3, -1.0);
    m.set(3, 3, 5.0);
    let b = m.principal_block(&[2, 3]);
    assert_eq!(b.get(0, 1), -1.0);
    let mut other = SymMatrix::zeros(4);
    other.set_principal_block(&[2, 3], &b);
    assert_eq!(other.get(3, 2), -1.0);
    assert_eq!(other.get(0, 0), 0.0);
}

#[test]
fn off_block_magnitude_sees_only_coupling_entries() {
    let p = BlockPartition::from_sizes(&[2, 2]).unwrap();
    let mut m = SymMatrix::zeros(4);
    m.set(0, 1, 9.0);
    m.set(2, 3, 9.0);
    assert_eq!(m.off_block_magnitude(&p), 0.0);
    m.set(1, 2, 0.25);
    assert_eq!(m.off_block_magnitude(&p), 0.25);
}

#[test]
fn symeig_two_by_two_analytic() {
    let m = SymMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let s = symeig(&m);
    assert!((s.eigenvalues[0] - 3.0).abs() < 1e-12);
    assert!((s.eigenvalues[1] - 1.0).abs() < 1e-12);
    let r = 0.5f64.sqrt();
    assert!((s.eigenvectors[0][0] - r).abs() < 1e-12);
    assert!((s.eigenvectors[0][1] - r).abs() < 1e-12);
    assert!((s.eigenvectors[1][0] - r).abs() < 1e-12);
    assert!((s.eigenvectors[1][1] + r).abs() < 1e-12);
}

#[test]
fn symeig_reconstructs_hundred_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..100 {
        let n = 1 + rng.gen_range(0..30);
        let m = random_sym(&mut rng, n);
        let s = symeig(&m);
        for w in s.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let err = s.reconstruct().sub(&m).frob_norm();
        let scale = 1.0 + m.frob_norm();
        assert!(
            err <= 1e-10 * scale,
            "trial {trial}: reconstruction error {err:.3e} at n={n}"
        );
        for i in 0..n {
            for j in 0..n {
                let d: f64 = (0..n).map(|r| s.eigenvectors[i][r] * s.eigenvectors[j][r]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn symeig_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = random_sym(&mut rng, 7);
    let a = symeig(&m);
    let b = symeig(&m);
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.eigenvectors, b.eigenvectors);
}

#[test]
fn nuclear_norm_of_diagonal_is_absolute_sum() {
    let m = SymMatrix::diagonal(&[3.0, 1.0, 1.0, 1.0]).unwrap();
    assert!((nuclear_norm(&m) - 6.0).abs() < 1e-12);
    let m = SymMatrix::diagonal(&[1.0, -2.0]).unwrap();
    assert!((nuclear_norm(&m) - 3.0).abs() < 1e-12);
}

#[test]
fn blockwise_nuclear_norm_sums_block_spectra() {
    let p = BlockPartition::from_blocks(vec![vec![0], vec![1], vec![2, 3]]).unwrap();
    let m = SymMatrix::diagonal(&[3.0, 1.0, 1.0, 1.0]).unwrap();
    assert!((mixed_norm_star1(&m, &p).unwrap() - 6.0).abs() < 1e-12);

    let p2 = BlockPartition::from_sizes(&[2, 2]).unwrap();
    let mut e11 = SymMatrix::zeros(4);
    e11.set(0, 0, -1.0);
    assert!((mixed_norm_star1(&e11, &p2).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn mixed_vector_norms_match_hand_values() {
    let p = BlockPartition::from_sizes(&[2, 1]).unwrap();
    assert!((mixed_norm_q1(&[1.0, -1.0, 2.0], &p, InnerNorm::One).unwrap() - 4.0).abs() < 1e-12);
    assert!((mixed_norm_q1(&[3.0, 4.0, 0.0], &p, InnerNorm::Two).unwrap() - 5.0).abs() < 1e-12);
    assert!((mixed_norm_q1(&[3.0, 4.0, 2.0], &p, InnerNorm::Inf).unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn signed_vector_split_separates_parts() {
    let (p, m) = signed_split_vector(&[1.0, -2.0, 0.0]);
    assert_eq!(p, vec![1.0, 0.0, 0.0]);
    assert_eq!(m, vec![0.0, 2.0, 0.0]);
}

#[test]
fn signed_matrix_split_is_psd_pair_summing_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_sym(&mut rng, 5);
    let (plus, minus) = signed_split_matrix(&m, None).unwrap();
    let sp = symeig(&plus);
    let sm = symeig(&minus);
    assert!(sp.eigenvalues.iter().all(|&l| l >= -1e-10));
    assert!(sm.eigenvalues.iter().all(|&l| l >= -1e-10));
    let diff = plus.sub(&minus).sub(&m).frob_norm();
    assert!(diff < 1e-10);
}

#[test]
fn signed_matrix_split_respects_blocks() {
    let p = BlockPartition::from_sizes(&[1, 2]).unwrap();
    let m = SymMatrix::diagonal(&[2.0, -1.0, 3.0]).unwrap();
    let (plus, minus) = signed_split_matrix(&m, Some(&p)).unwrap();
    assert_eq!(plus.off_block_magnitude(&p), 0.0);
    assert_eq!(minus.off_block_magnitude(&p), 0.0);
    assert!((plus.get(0, 0) - 2.0).abs() < 1e-12);
    assert!((minus.get(1, 1) - 1.0).abs() < 1e-12);
    assert!((plus.get(2, 2) - 3.0).abs() < 1e-12);
}

#[test]
fn psd_projection_clips_negative_eigenvalues() {
    let m = SymMatrix::diagonal(&[2.0, -3.0]).unwrap();
    let p = psd_project(&m);
    assert!((p.get(0, 0) - 2.0).abs() < 1e-12);
    assert!(p.get(1, 1).abs() < 1e-12);
}

#[test]
fn null_basis_of_row_sum_operator() {
    let a = DenseMatrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
    let basis = orthonormal_null_basis(&a);
    assert_eq!(basis.len(), 1);
    let v = &basis[0];
    assert!((l2_norm(v) - 1.0).abs() < 1e-12);
    assert!((v[0] + v[1]).abs() < 1e-12);
}

#[test]
fn null_basis_spans_kernel_on_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let m = 1 + rng.gen_range(0..5);
        let n = m + 1 + rng.gen_range(0..5);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let a = DenseMatrix::from_rows(rows).unwrap();
        let basis = orthonormal_null_basis(&a);
        assert_eq!(basis.len(), n - m);
        for (i, u) in basis.iter().enumerate() {
            let img = a.matvec(u);
            assert!(l2_norm(&img) < 1e-9, "kernel residual {}", l2_norm(&img));
            for (j, w) in basis.iter().enumerate() {
                let d: f64 = u.iter().zip(w).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn null_basis_of_zero_row_operator_is_identity() {
    let a = DenseMatrix::zeros(0, 3).unwrap();
    let basis = orthonormal_null_basis(&a);
    assert_eq!(basis.len(), 3);
    assert_eq!(basis[0], vec![1.0, 0.0, 0.0]);
}

#[test]
fn dense_matvec_and_transpose_agree() {
    let a = DenseMatrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
    assert_eq!(a.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
    assert_eq!(a.t_matvec(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    let t = a.transpose();
    assert_eq!(t.rows(), 3);
    assert_eq!(t.get(2, 1), 6.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symeig_reconstruction_is_accurate(seed in 0u64..1000, n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sym(&mut rng, n);
        let err = symeig(&m).reconstruct().sub(&m).frob_norm();
        prop_assert!(err <= 1e-10 * (1.0 + m.frob_norm()));
    }

    #[test]
    fn nuclear_norm_dominates_trace(seed in 0u64..1000, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sym(&mut rng, n);
        prop_assert!(nuclear_norm(&m) + 1e-10 >= m.trace().abs());
    }

    #[test]
    fn signed_split_reassembles_difference(seed in 0u64..1000, n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_sym(&mut rng, n);
        let (p, q) = signed_split_matrix(&m, None).unwrap();
        prop_assert!(p.sub(&q).sub(&m).frob_norm() < 1e-9);
        prop_assert!((nuclear_norm(&m) - (p.trace() + q.trace())).abs() < 1e-8);
    }
}
