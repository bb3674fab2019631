//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng as _;
use tae_core::data::{stratified_split, synth_blobs, BlobConfig, Dataset};
use tae_core::metrics::{accuracy, f_score, Averaging, ConfusionMatrix, RateMode};
use tae_core::model_file::{ModelKind, SavedModel};
use tae_core::nn::Matrix;
use tae_core::pca::fit_pca;
use tae_core::pipeline::{
    cmd_train, evaluate, fit_model, represent, sweep, EvalReport, EvalSettings, Representation,
    RunConfig,
};
use tae_core::tae::build_tae;
use tae_core::trainer::{TrainConfig, Trainable};
use tae_core::transform::{ClassMeans, TransformPlan};
use tae_core::{metrics, seeded_rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn blobs() -> Dataset {
    synth_blobs(&BlobConfig {
        classes: 4,
        per_class: 400,
        dim: 6,
        radius: 1.0,
        spread: 1.0,
        seed: 0,
    })
    .unwrap()
}

fn blob_split() -> (Dataset, Dataset) {
    stratified_split(&blobs(), 0.3, 0).unwrap()
}

fn blob_config(epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 3e-3,
        epochs,
        batch_size: 25,
        early_stop_threshold: 0.0,
        scale: 0.1,
        latent_dim: 4,
        seed: 0,
        ..TrainConfig::default()
    }
}

fn eval_settings() -> EvalSettings {
    EvalSettings {
        max_depths: vec![5, 10, 20, 50, 100],
        validation_fraction: 0.3,
        seed: 0,
        normal_class: 0,
    }
}

fn four_class_plan() -> Outcome {
    let means = ClassMeans {
        class_ids: vec![0, 1, 2, 3],
        mu: vec![
            vec![0.5, 0.5],
            vec![-0.5, 0.5],
            vec![0.5, -0.5],
            vec![-0.5, -0.5],
        ],
        mu_bar: vec![0.0, 0.0],
    };
    let plan = TransformPlan::from_means(means, 0.5).unwrap();
    let t = vec![
        vec![1.0, 1.0],
        vec![-1.0, 1.0],
        vec![1.0, -1.0],
        vec![-1.0, -1.0],
    ];
    let scale = vec![1.5, 2.0, 2.5, 3.0];
    let mu_hat = vec![
        vec![1.5, 1.5],
        vec![-2.0, 2.0],
        vec![2.5, -2.5],
        vec![-3.0, -3.0],
    ];
    let v = vec![
        vec![1.0, 1.0],
        vec![-1.5, 1.5],
        vec![2.0, -2.0],
        vec![-2.5, -2.5],
    ];
    let ok = plan.t == t && plan.scale == scale && plan.mu_hat == mu_hat && plan.v == v;
    outcome(
        ok,
        format!(
            "t={:?} S={:?} mu_hat={:?} v={:?}",
            plan.t, plan.scale, plan.mu_hat, plan.v
        ),
    )
}

fn gradient_check() -> Outcome {
    let cfg = TrainConfig {
        latent_dim: 2,
        hidden: Some(4),
        ..TrainConfig::default()
    };
    let mut rng = seeded_rng(7);
    let mut model = build_tae(3, &cfg, &mut rng).unwrap();
    let n = 24;
    let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
    let x = Matrix::from_vec(
        n,
        3,
        (0..n * 3)
            .map(|i| labels[i / 3] as f64 * 0.5 + rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap();
    model
        .fit_plan(&x, &labels, &[0, 1, 2], 0.5, Default::default())
        .unwrap();
    // Zero initial biases can park ReLU units exactly on their kink.
    for p in model.param_slices_mut() {
        p.iter_mut().for_each(|v| *v += rng.random_range(-0.1..0.1));
    }

    let idx: Vec<usize> = (0..8).collect();
    let bx = x.select_rows(&idx);
    let bl = &labels[..8];
    let (analytic, _) = model.batch_gradients(&x, &labels, &idx).unwrap();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (b, grad) in analytic.iter().enumerate() {
        for (i, &g) in grad.iter().enumerate() {
            let mut plus = model.clone();
            plus.param_slices_mut()[b][i] += h;
            let mut minus = model.clone();
            minus.param_slices_mut()[b][i] -= h;
            let lp = plus.evaluate(&bx, bl).unwrap().total;
            let lm = minus.evaluate(&bx, bl).unwrap().total;
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-4,
        format!("{checked} parameters, worst relative error {worst:.2e}"),
    )
}

fn loss_descent() -> Outcome {
    let (train, _) = blob_split();
    let (_, history, ..) = fit_model(ModelKind::Tae, &train, &blob_config(50)).unwrap();
    let first = history[0].train.components();
    let last = history.last().unwrap().train.components();
    let ok = history.len() == 50 && first.iter().zip(&last).all(|(a, b)| b < a);
    outcome(
        ok,
        format!("epoch 1 {first:.4?} -> epoch {} {last:.4?}", history.len()),
    )
}

struct BlobReports {
    raw: EvalReport,
    latent: EvalReport,
    recon: EvalReport,
}

fn blob_reports() -> BlobReports {
    let (train, test) = blob_split();
    let (model, ..) = fit_model(ModelKind::Tae, &train, &blob_config(300)).unwrap();
    let run = |r| evaluate(Some(&model), r, &train, &test, &eval_settings()).unwrap();
    BlobReports {
        raw: run(Representation::Raw),
        latent: run(Representation::TaeLatent),
        recon: run(Representation::TaeReconstruction),
    }
}

fn recon_beats_latent(r: &BlobReports) -> Outcome {
    let (z, e, x) = (r.recon.accuracy, r.latent.accuracy, r.raw.accuracy);
    outcome(
        z - e >= 0.05 && z > x,
        format!("acc(z_hat)={z:.4} acc(e)={e:.4} acc(raw)={x:.4}"),
    )
}

fn quality_gain(r: &BlobReports) -> Outcome {
    let q = r.recon.quality_representation.quality;
    let q0 = r.recon.quality_raw.quality;
    outcome(
        q / q0 >= 2.0,
        format!(
            "quality(z_hat)={q:.4} quality(raw)={q0:.4} ratio={:.3}",
            q / q0
        ),
    )
}

fn scale_sensitivity() -> Outcome {
    let (train, test) = blob_split();
    let rows = sweep(
        &train,
        &test,
        &blob_config(300),
        Representation::TaeReconstruction,
        &eval_settings(),
        &[0.0001, 0.1, 10.0],
        &[4],
    )
    .unwrap();
    let acc: Vec<f64> = rows
        .iter()
        .map(|r| r.accuracy.unwrap_or(f64::NAN))
        .collect();
    let ok = acc[1] >= acc[0] && acc[2] >= acc[0] && (acc[1] - acc[2]).abs() <= 0.05;
    outcome(
        ok,
        format!(
            "acc(S=0.0001)={:.4} acc(S=0.1)={:.4} acc(S=10)={:.4}",
            acc[0], acc[1], acc[2]
        ),
    )
}

/// Counts computed by walking individual (truth, predicted) pairs.
fn counting_oracle(cm: &[Vec<u64>]) -> (f64, f64, f64, f64) {
    let mut pairs = Vec::new();
    for (t, row) in cm.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            pairs.extend(std::iter::repeat_n((t, p), n as usize));
        }
    }
    let n = pairs.len() as f64;
    let acc = pairs.iter().filter(|(t, p)| t == p).count() as f64 / n;
    let k = cm.len();
    let mut f1 = 0.0;
    for c in 0..k {
        let tp = pairs.iter().filter(|&&(t, p)| t == c && p == c).count() as f64;
        let fp = pairs.iter().filter(|&&(t, p)| t != c && p == c).count() as f64;
        let fn_ = pairs.iter().filter(|&&(t, p)| t == c && p != c).count() as f64;
        let prec = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let rec = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        f1 += if prec + rec > 0.0 {
            2.0 * prec * rec / (prec + rec)
        } else {
            0.0
        };
    }
    let normals = pairs.iter().filter(|(t, _)| *t == 0).count() as f64;
    let alarms = pairs.iter().filter(|&&(t, p)| t == 0 && p != 0).count() as f64;
    let attacks = pairs.iter().filter(|(t, _)| *t != 0).count() as f64;
    let missed = pairs.iter().filter(|&&(t, p)| t != 0 && p == 0).count() as f64;
    (acc, f1 / k as f64, alarms / normals, missed / attacks)
}

fn metric_oracles() -> Outcome {
    let mut rng = seeded_rng(11);
    let mode = RateMode::NormalVsAttack { normal: 0 };
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rows: Vec<Vec<u64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.random_range(1..60)).collect())
            .collect();
        let cm = ConfusionMatrix::from_counts(&rows).unwrap();
        let (acc, f1, far, mdr) = counting_oracle(&rows);
        for (a, b) in [
            (accuracy(&cm).unwrap(), acc),
            (f_score(&cm, Averaging::Macro).unwrap(), f1),
            (metrics::far(&cm, mode).unwrap(), far),
            (metrics::mdr(&cm, mode).unwrap(), mdr),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let table = ConfusionMatrix::from_counts(&[vec![5586, 344], vec![2059, 45635]]).unwrap();
    let mdr = metrics::mdr(&table, mode).unwrap();
    let far = metrics::far(&table, mode).unwrap();
    // 2059 / 47694 = 0.04317..., 344 / 5930 = 0.05801...
    let table_ok = (mdr - 0.0432).abs() < 5e-5 && (far - 0.0580).abs() < 5e-5;
    outcome(
        worst <= 1e-12 && table_ok,
        format!("worst oracle gap {worst:.1e}; binary counts MDR={mdr:.4} FAR={far:.4}"),
    )
}

fn pca_oracle() -> Outcome {
    let mut rng = seeded_rng(5);
    let n = 300;
    let mut data = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let (a, b, c): (f64, f64, f64) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        data.extend([3.0 * a + 0.5 * b, b - 0.3 * c, 0.2 * c + 0.1 * a]);
    }
    let x = Matrix::from_vec(n, 3, data.clone()).unwrap();
    let pca = fit_pca(&x, 3).unwrap();

    let m = DMatrix::from_row_slice(n, 3, &data);
    let mean = m.row_mean();
    let centred = DMatrix::from_fn(n, 3, |i, j| m[(i, j)] - mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut worst: f64 = 0.0;
    for (k, &j) in order.iter().enumerate() {
        let oracle = eig.eigenvectors.column(j);
        let ours = pca.components.row(k);
        let dot: f64 = ours.iter().zip(oracle.iter()).map(|(a, b)| a * b).sum();
        let sign = dot.signum();
        for (a, b) in ours.iter().zip(oracle.iter()) {
            worst = worst.max((a - sign * b).abs());
        }
        worst = worst.max((pca.explained_variance[k] - eig.eigenvalues[j]).abs());
    }
    outcome(
        worst <= 1e-8,
        format!("worst component difference {worst:.1e}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("blobs.csv");
    let mut small = blobs();
    small = small.subset(&(0..small.len()).step_by(4).collect::<Vec<_>>());
    small.write_csv(&csv).unwrap();
    let run = |out: &str| {
        let cfg = RunConfig {
            train: Some(csv.clone()),
            out: dir.path().join(out),
            epochs: 20,
            learning_rate: 3e-3,
            latent_dim: 3,
            seed: 3,
            ..RunConfig::default()
        };
        cmd_train(&cfg).unwrap()
    };
    let a = run("a");
    let b = run("b");
    let bytes_a = std::fs::read(&a.model_path).unwrap();
    let identical = bytes_a == std::fs::read(&b.model_path).unwrap();

    let (train, _) = blob_split();
    let (model, ..) = fit_model(ModelKind::Tae, &train, &blob_config(5)).unwrap();
    let path = dir.path().join("round_trip.json");
    model.save(&path).unwrap();
    let loaded = SavedModel::load(&path).unwrap();
    let xn = model.normalize(&train.x).unwrap();
    let before = represent(Some(&model), Representation::TaeReconstruction, &xn).unwrap();
    let after = represent(
        Some(&loaded),
        Representation::TaeReconstruction,
        &loaded.normalize(&train.x).unwrap(),
    )
    .unwrap();
    let bit_exact = before
        .as_slice()
        .iter()
        .zip(after.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    outcome(
        identical && bit_exact,
        format!(
            "model files identical: {identical} ({} bytes); reload bit-exact: {bit_exact}",
            bytes_a.len()
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut push = |id, name, limit_s: u64, (o, t): (Outcome, Duration)| {
        results.push((id, name, o, t, Duration::from_secs(limit_s)));
    };
    push(1, "four-class separation plan", 1, timed(four_class_plan));
    push(
        2,
        "TAE gradient vs finite differences",
        5,
        timed(gradient_check),
    );
    push(
        3,
        "loss components decrease over 50 epochs",
        60,
        timed(loss_descent),
    );
    let (reports, t_train) = timed(blob_reports);
    let (o, t) = timed(|| recon_beats_latent(&reports));
    push(4, "z_hat accuracy beats e and raw", 120, (o, t + t_train));
    let (o, t) = timed(|| quality_gain(&reports));
    push(5, "representation quality gain", 10, (o, t));
    push(6, "scale sensitivity", 300, timed(scale_sensitivity));
    push(7, "metric oracles", 5, timed(metric_oracles));
    push(8, "PCA vs eigensolver oracle", 5, timed(pca_oracle));
    push(9, "determinism and round-trip", 60, timed(determinism));

    let mut failures = 0;
    for (id, name, o, elapsed, limit) in &results {
        let in_time = elapsed <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {id}: {name} [{:.2}s / {}s] {}{}",
            elapsed.as_secs_f64(),
            limit.as_secs(),
            o.detail,
            if in_time { "" } else { " (over time limit)" }
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
