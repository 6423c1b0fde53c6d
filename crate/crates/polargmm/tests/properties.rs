//! Randomized property tests for the algebraic invariants: metric
//! invariances, EM step constraints, grid coverage, and coefficient
//! rotations.

use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use polargmm::fbspca::{rotate, PolarCoeff};
use polargmm::gmm::{e_step, m_step, ClusterParams, MixtureParams, SigmaFloors};
use polargmm::metrics::{
    accuracy, adjusted_mutual_information, homogeneity_completeness, relative_alignment_errors,
    AlignmentRecord, ClusteringPair,
};
use polargmm::translate::{make_rotation_grid, make_translation_grid};
use polargmm::wrap_angle;

fn label_pairs(max_labels: usize, max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            proptest::collection::vec(0..max_labels, n),
            proptest::collection::vec(0..max_labels, n),
        )
    })
}

/// Relabels by an arbitrary permutation of the label alphabet.
fn permute(labels: &[usize], perm: &[usize]) -> Vec<usize> {
    labels.iter().map(|&l| perm[l]).collect()
}

fn permutations(k: usize, seed: usize) -> Vec<usize> {
    // k-th lexicographic-ish shuffle derived from a seed; enough variety for
    // invariance checks
    let mut p: Vec<usize> = (0..k).collect();
    let mut s = seed;
    for i in (1..k).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        p.swap(i, s % (i + 1));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_invariant_under_relabeling(
        (t, p) in label_pairs(5, 40),
        seed in 0usize..1000,
    ) {
        let pair = ClusteringPair::new(t.clone(), p.clone()).unwrap();
        let perm_t = permutations(5, seed);
        let perm_p = permutations(5, seed + 1);
        let pair2 = ClusteringPair::new(permute(&t, &perm_t), permute(&p, &perm_p)).unwrap();
        prop_assert!((accuracy(&pair) - accuracy(&pair2)).abs() < 1e-12);
        prop_assert!(
            (adjusted_mutual_information(&pair) - adjusted_mutual_information(&pair2)).abs()
                < 1e-9
        );
        let (h1, c1) = homogeneity_completeness(&pair);
        let (h2, c2) = homogeneity_completeness(&pair2);
        prop_assert!((h1 - h2).abs() < 1e-12);
        prop_assert!((c1 - c2).abs() < 1e-12);
    }

    #[test]
    fn ami_is_symmetric((t, p) in label_pairs(4, 30)) {
        let ab = ClusteringPair::new(t.clone(), p.clone()).unwrap();
        let ba = ClusteringPair::new(p, t).unwrap();
        prop_assert!(
            (adjusted_mutual_information(&ab) - adjusted_mutual_information(&ba)).abs() < 1e-12
        );
    }

    #[test]
    fn alignment_errors_ignore_global_offsets(
        (t, p) in label_pairs(3, 12),
        angles in proptest::collection::vec(-PI..PI, 12),
        preds in proptest::collection::vec(-PI..PI, 12),
        offset in -PI..PI,
        shift in proptest::array::uniform2(-5.0f64..5.0),
    ) {
        let n = t.len();
        let pair = ClusteringPair::new(t, p).unwrap();
        let base: Vec<AlignmentRecord<f64>> = (0..n)
            .map(|i| AlignmentRecord {
                alpha_true: angles[i],
                alpha_pred: preds[i],
                t_true: [i as f64, -(i as f64)],
                t_pred: [0.5 * i as f64, 0.25],
            })
            .collect();
        let moved: Vec<AlignmentRecord<f64>> = base
            .iter()
            .map(|r| AlignmentRecord {
                alpha_true: r.alpha_true,
                alpha_pred: wrap_angle(r.alpha_pred + offset),
                t_true: r.t_true,
                t_pred: [r.t_pred[0] + shift[0], r.t_pred[1] + shift[1]],
            })
            .collect();
        match (
            relative_alignment_errors(&base, &pair),
            relative_alignment_errors(&moved, &pair),
        ) {
            (Ok((ae_a, te_a, n_a)), Ok((ae_b, te_b, n_b))) => {
                prop_assert_eq!(n_a, n_b);
                prop_assert!((ae_a - ae_b).abs() < 1e-9, "AE {} vs {}", ae_a, ae_b);
                prop_assert!((te_a - te_b).abs() < 1e-9, "TE {} vs {}", te_a, te_b);
            }
            (Err(_), Err(_)) => {} // no jointly assigned pair in either view
            _ => prop_assert!(false, "error disagreement"),
        }
    }

    #[test]
    fn wrap_angle_lands_in_half_open_interval(a in -50.0f64..50.0) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI, "{}", w);
        // same angle modulo full turns
        prop_assert!(((a - w) / TAU - ((a - w) / TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn translation_grid_points_stay_inside(radius in 0.5f64..12.0, n_r in 1usize..5) {
        let grid = make_translation_grid(radius, n_r);
        prop_assert_eq!(grid.points[0], [0.0, 0.0]);
        for p in &grid.points {
            prop_assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= radius + 0.5);
        }
    }

    #[test]
    fn rotation_grid_covers_every_angle(
        n_alpha in 4usize..128,
        seed in 0u64..500,
        target in -PI..PI,
    ) {
        let rot = make_rotation_grid::<f64>(n_alpha, seed);
        let closest = rot
            .angles
            .iter()
            .map(|&a| wrap_angle(a - target).abs())
            .fold(f64::INFINITY, f64::min);
        prop_assert!(closest <= PI / n_alpha as f64 + 1e-9, "gap {}", closest);
    }

    #[test]
    fn coefficient_rotation_preserves_magnitudes(
        r in proptest::collection::vec(0.01f64..10.0, 6),
        phi in proptest::collection::vec(-PI..PI, 6),
        alpha in -10.0f64..10.0,
    ) {
        let omega: Vec<i64> = vec![0, 1, 1, 2, 3, 5];
        let z = PolarCoeff { r: r.clone(), phi };
        let rotated = rotate(&z, alpha, &omega).unwrap();
        prop_assert_eq!(rotated.r, r); // bitwise: magnitudes untouched
        for (j, (&p, &w)) in rotated.phi.iter().zip(&omega).enumerate() {
            let expect = wrap_angle(z.phi[j] + alpha * w as f64);
            prop_assert!(wrap_angle(p - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn em_steps_respect_stochastic_constraints(
        rs in proptest::collection::vec(0.05f64..5.0, 8),
        phis in proptest::collection::vec(-PI..PI, 8),
        mu_shift in 0.0f64..2.0,
    ) {
        // 4 two-dimensional samples, 2 clusters
        let samples: Vec<PolarCoeff<f64>> = (0..4)
            .map(|i| PolarCoeff {
                r: rs[2 * i..2 * i + 2].to_vec(),
                phi: phis[2 * i..2 * i + 2].to_vec(),
            })
            .collect();
        let theta = MixtureParams {
            pi: vec![0.4, 0.6],
            clusters: (0..2)
                .map(|c| ClusterParams {
                    mu_r: vec![1.0 + mu_shift * c as f64; 2],
                    mu_phi: vec![0.5 - c as f64; 2],
                    sigma_r: vec![0.7; 2],
                    sigma_phi: vec![0.6; 2],
                })
                .collect(),
        };
        let w = e_step(&samples, &theta).unwrap();
        for i in 0..4 {
            let row = w.row(i);
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12, "row sum {}", sum);
            for &v in row {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        let floors = SigmaFloors { r: 1e-6, phi: 1e-3 };
        let updated = m_step(&samples, &w, floors).unwrap();
        let pi_sum: f64 = updated.pi.iter().sum();
        prop_assert!((pi_sum - 1.0).abs() < 1e-12);
        for (cl, &pi) in updated.clusters.iter().zip(&updated.pi) {
            prop_assert!(pi >= 0.0);
            for j in 0..2 {
                prop_assert!(cl.sigma_r[j] >= floors.r);
                prop_assert!(cl.sigma_phi[j] >= floors.phi);
                prop_assert!(cl.mu_phi[j] > -PI - 1e-12 && cl.mu_phi[j] <= PI + 1e-12);
            }
        }
    }
}
