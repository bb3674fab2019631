use proptest::prelude::*;
use tae_core::data::{minmax_fit, stratified_split_indices, synth_blobs, BlobConfig};
use tae_core::metrics::representation_quality;
use tae_core::nn::Matrix;
use tae_core::seeded_rng;
use tae_core::transform::{compute_class_means, CenterRule, ClassMeans, TransformPlan};
use tae_core::tree::{fit_tree, TreeParams};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-50.0f64..50.0, rows * cols)
        .prop_map(move |d| Matrix::from_vec(rows, cols, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_is_a_stratified_partition(
        labels in prop::collection::vec(0usize..4, 1..300),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let (a, b) = stratified_split_indices(&labels, 4, fraction, &mut seeded_rng(seed)).unwrap();
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for c in 0..4 {
            let n = labels.iter().filter(|&&l| l == c).count();
            let in_b = b.iter().filter(|&&i| labels[i] == c).count();
            if n >= 2 {
                let expected = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
                prop_assert_eq!(in_b, expected);
            } else {
                prop_assert_eq!(in_b, 0);
            }
        }
        let again = stratified_split_indices(&labels, 4, fraction, &mut seeded_rng(seed)).unwrap();
        prop_assert_eq!((a, b), again);
    }

    #[test]
    fn minmax_maps_training_range_to_unit_interval(x in (2usize..30).prop_flat_map(|n| matrix(n, 3))) {
        let stats = minmax_fit(&x).unwrap();
        let y = stats.apply(&x).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..x.rows()).map(|i| y.get(i, j)).collect();
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
            if stats.max[j] > stats.min[j] {
                prop_assert_eq!(lo, 0.0);
                prop_assert!((hi - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(col.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn separation_is_a_per_class_rigid_translation(
        mu in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 2..6),
        scale in 0.001f64..50.0,
        e in prop::collection::vec(-5.0f64..5.0, 3),
        shift in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let k = mu.len();
        let mu_bar: Vec<f64> = (0..3).map(|i| mu.iter().map(|m| m[i]).sum::<f64>() / k as f64).collect();
        let plan = TransformPlan::from_means(ClassMeans { class_ids: (0..k).collect(), mu, mu_bar }, scale).unwrap();
        for c in 0..k {
            prop_assert_eq!(plan.scale[c], scale * (c + 3) as f64);
            for i in 0..3 {
                prop_assert_eq!(plan.t[c][i].abs(), 1.0);
                prop_assert!((plan.mu[c][i] + plan.v[c][i] - plan.mu_hat[c][i]).abs() < 1e-12);
            }
            // Differences between two latents survive the translation.
            let e2: Vec<f64> = e.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let z1 = plan.apply(&e, c).unwrap();
            let z2 = plan.apply(&e2, c).unwrap();
            for i in 0..3 {
                prop_assert!((z2[i] - z1[i] - shift[i]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quality_is_invariant_to_rigid_motion_and_scaling(
        x in matrix(40, 2),
        angle in 0.0f64..std::f64::consts::TAU,
        s in 0.1f64..10.0,
        tx in -20.0f64..20.0,
    ) {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let (c, sn) = (angle.cos(), angle.sin());
        let rows: Vec<Vec<f64>> = x
            .row_iter()
            .map(|r| vec![s * (c * r[0] - sn * r[1]) + tx, s * (sn * r[0] + c * r[1]) - tx])
            .collect();
        let y = Matrix::from_rows(&rows).unwrap();
        let a = representation_quality(&x, &labels).unwrap();
        let b = representation_quality(&y, &labels).unwrap();
        prop_assert!((a.quality - b.quality).abs() <= 1e-8 * a.quality.max(1.0));
    }

    #[test]
    fn deeper_trees_never_fit_training_data_worse(x in matrix(60, 2), seed in 0usize..100) {
        let labels: Vec<usize> = (0..60).map(|i| (i * 31 + seed) % 3).collect();
        let mut prev = 0.0;
        for depth in [1, 2, 3, 5, 8, 64] {
            let tree = fit_tree(&x, &labels, 3, TreeParams { max_depth: depth, min_leaf: 1 }).unwrap();
            let pred = tree.predict_rows(&x).unwrap();
            let acc = pred.iter().zip(&labels).filter(|(a, b)| a == b).count() as f64 / 60.0;
            prop_assert!(acc + 1e-12 >= prev, "depth {depth}: {acc} < {prev}");
            prev = acc;
        }
    }
}

#[test]
fn four_class_plan_from_projected_samples() {
    // Each class has four samples symmetric around its corner of the
    // square, so the class means come out exact.
    let means = [[0.5, 0.5], [-0.5, 0.5], [0.5, -0.5], [-0.5, -0.5]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, m) in means.iter().enumerate() {
        for d in [[0.25, 0.0], [-0.25, 0.0], [0.0, 0.125], [0.0, -0.125]] {
            rows.push([m[0] + d[0], m[1] + d[1]]);
            labels.push(c);
        }
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let plan = TransformPlan::fit(
        &x,
        &labels,
        &[0, 1, 2, 3],
        0.5,
        CenterRule::MeanOfClassMeans,
    )
    .unwrap();
    assert_eq!(plan.mu_bar, vec![0.0, 0.0]);
    assert_eq!(
        plan.v,
        vec![
            vec![1.0, 1.0],
            vec![-1.5, 1.5],
            vec![2.0, -2.0],
            vec![-2.5, -2.5]
        ]
    );
}

#[test]
fn centre_rules_differ_only_under_imbalance() {
    let rows = [[0.0], [0.0], [0.0], [4.0]];
    let x = Matrix::from_rows(&rows).unwrap();
    let labels = [0, 0, 0, 1];
    let a = compute_class_means(&x, &labels, &[0, 1], CenterRule::MeanOfClassMeans).unwrap();
    let b = compute_class_means(&x, &labels, &[0, 1], CenterRule::SampleMean).unwrap();
    assert_eq!(a.mu_bar, vec![2.0]);
    assert_eq!(b.mu_bar, vec![1.0]);
}

#[test]
fn blob_means_converge() {
    let cfg = BlobConfig {
        classes: 5,
        per_class: 2000,
        dim: 3,
        radius: 2.0,
        spread: 1.5,
        seed: 42,
    };
    let data = synth_blobs(&cfg).unwrap();
    let bound = 3.0 * cfg.spread / (cfg.per_class as f64).sqrt();
    for (c, mean) in cfg.class_means().iter().enumerate() {
        let norm: f64 = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - cfg.radius).abs() < 1e-12);
        for j in 0..cfg.dim {
            let emp = data
                .x
                .row_iter()
                .zip(&data.labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r[j])
                .sum::<f64>()
                / cfg.per_class as f64;
            assert!(
                (emp - mean[j]).abs() < bound,
                "class {c} dim {j}: {emp} vs {}",
                mean[j]
            );
        }
    }
}
