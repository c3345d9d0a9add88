use kbarrier::analysis::metrics;
use kbarrier::mlp::{train_lm_rows, AffineMap, MlpModel, TrainConfig};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn maps(dims: usize) -> (AffineMap, AffineMap) {
    (
        AffineMap { min: vec![-1.0; dims], max: vec![1.0; dims] },
        AffineMap { min: vec![-1.0], max: vec![1.0] },
    )
}

/// Largest relative gap between the analytic Jacobian and central
/// differences of the normalized error, with a floor on the denominator so
/// entries that vanish analytically are compared absolutely.
fn jacobian_gap(model: &MlpModel, xs: &[DVector<f64>], ys: &[f64], h: f64) -> f64 {
    let (_, jac) = model.errors_and_jacobian(xs, ys);
    let w = model.params();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for k in 0..w.len() {
        let mut wp = w.clone();
        wp[k] += h;
        probe.set_params(&wp);
        let plus: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - probe.forward_normalized(x)).collect();
        wp[k] -= 2.0 * h;
        probe.set_params(&wp);
        let minus: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - probe.forward_normalized(x)).collect();
        for i in 0..xs.len() {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            let an = jac[(i, k)];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for net in 0..20 {
        let (i, o) = maps(4);
        let model = MlpModel::random(&[4, 3, 2, 1], i, o, net).unwrap();
        // Scale weights up so hidden units leave the linear regime.
        let mut m = model.clone();
        m.set_params(&model.params().iter().map(|w| w * 4.0).collect::<Vec<_>>());
        let xs: Vec<DVector<f64>> = (0..8)
            .map(|_| DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let ys: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        worst = worst.max(jacobian_gap(&m, &xs, &ys, 1e-6));
    }
    assert!(worst < 1e-5, "max relative error {worst}");
}

fn linear_rows(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..4).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    let ys = xs.iter().map(|x| 2.0 * x[0]).collect();
    (xs, ys)
}

fn quick_config() -> TrainConfig {
    TrainConfig {
        hidden_layers: vec![5],
        max_epochs: 200,
        restarts: 2,
        init_seed: 4,
        ..TrainConfig::default()
    }
}

#[test]
fn learns_a_linear_target() {
    let (xs, ys) = linear_rows(50, 1);
    let (model, report) =
        train_lm_rows(&xs[..35], &ys[..35], &xs[35..43], &ys[35..43], &quick_config()).unwrap();
    assert!(report.epochs_run <= 200);
    let pred: Vec<f64> = xs[43..].iter().map(|x| model.predict(x).unwrap()).collect();
    let m = metrics(&ys[43..], &pred).unwrap();
    assert!(m.r >= 0.999, "test R {}", m.r);
}

#[test]
fn fits_a_single_repeated_sample() {
    let xs = vec![vec![3.0, 15.0, 30.0, 100.0]; 6];
    let ys = vec![42.0; 6];
    let (model, _) = train_lm_rows(&xs, &ys, &xs[..2], &ys[..2], &quick_config()).unwrap();
    let y = model.predict(&xs[0]).unwrap();
    assert!((y - 42.0).abs() < 1e-6, "{y}");
}

#[test]
fn accepted_steps_never_raise_training_error() {
    let (xs, mut ys) = linear_rows(60, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (y, x) in ys.iter_mut().zip(&xs) {
        *y = (x[1] * 0.7).sin() * 10.0 + x[2] * x[3] + rng.random_range(-1.0..1.0);
    }
    let cfg = TrainConfig { hidden_layers: vec![6, 4], restarts: 3, ..quick_config() };
    let (_, report) = train_lm_rows(&xs[..45], &ys[..45], &xs[45..], &ys[45..], &cfg).unwrap();
    assert!(report.train_loss.len() >= 2);
    for pair in report.train_loss.windows(2) {
        assert!(pair[1] <= pair[0], "{} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn training_is_deterministic() {
    let (xs, ys) = linear_rows(40, 5);
    let run = || train_lm_rows(&xs[..30], &ys[..30], &xs[30..], &ys[30..], &quick_config()).unwrap();
    let (ma, ra) = run();
    let (mb, rb) = run();
    assert_eq!(ra, rb);
    assert_eq!(ma.to_json().unwrap(), mb.to_json().unwrap());
}

proptest! {
    #[test]
    fn output_map_round_trips(
        lo in -1e4f64..1e4,
        width in 1e-3f64..1e4,
        t in 0.0f64..=1.0,
    ) {
        let m = AffineMap::fit(&[vec![lo, lo + width]]).unwrap();
        let y = lo + t * width;
        let back = m.invert(0, m.apply(0, y));
        prop_assert!((back - y).abs() <= 1e-12 * y.abs().max(1.0), "{} vs {}", back, y);
    }
}
