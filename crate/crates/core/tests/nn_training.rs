use proptest::prelude::*;
use rand::Rng;
use tabx_core::nn::{
    cross_entropy, fit, one_hot, predict, predicted_classes, Activation, LayerSpec, LossKind,
    NeuralCheckpoint, NeuralSpec, NnError, TrainConfig, PROB_CLIP,
};
use tabx_core::{rng, Matrix};

fn separable(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let mut r = rng::stream(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let centre = if y == 1 { 1.5 } else { -1.5 };
        data.push(centre + r.random_range(-1.0..1.0));
        data.push(r.random_range(-1.0..1.0));
        labels.push(y);
    }
    (Matrix::from_vec(n, 2, data), labels)
}

fn small_spec() -> NeuralSpec {
    NeuralSpec::new(
        2,
        vec![
            LayerSpec::dense(8, Activation::Relu),
            LayerSpec::dense(1, Activation::Sigmoid),
        ],
    )
    .unwrap()
}

#[test]
fn separable_toy_reaches_high_accuracy() {
    let (x, y) = separable(200, 1);
    let cfg = TrainConfig::new(LossKind::BinaryCe, 7);
    let (params, hist) = fit(&small_spec(), &x, &y, &cfg).unwrap();
    assert_eq!(hist.epochs(), 120);
    assert!(*hist.train_accuracy.last().unwrap() >= 0.95);
    let pred = predicted_classes(&predict(&small_spec(), &params, &[x]).unwrap());
    let acc = pred.iter().zip(&y).filter(|(p, t)| p == t).count() as f64 / y.len() as f64;
    assert!(acc >= 0.95, "{acc}");
}

#[test]
fn single_epoch_history() {
    let (x, y) = separable(40, 2);
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::new(LossKind::BinaryCe, 3)
    };
    let (_, hist) = fit(&small_spec(), &x, &y, &cfg).unwrap();
    for curve in [
        &hist.train_loss,
        &hist.train_accuracy,
        &hist.val_loss,
        &hist.val_accuracy,
    ] {
        assert_eq!(curve.len(), 1);
        assert!(curve[0].is_finite());
    }
}

#[test]
fn same_seed_same_history() {
    let (x, y) = separable(60, 3);
    let spec = NeuralSpec::new(
        2,
        vec![
            LayerSpec::dense(6, Activation::Relu),
            LayerSpec::Dropout { rate: 0.5 },
            LayerSpec::Lstm {
                units: 4,
                return_sequences: false,
            },
            LayerSpec::dense(2, Activation::Softmax),
        ],
    )
    .unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        ..TrainConfig::new(LossKind::CategoricalCe, 9)
    };
    let a = fit(&spec, &x, &y, &cfg).unwrap();
    let b = fit(&spec, &x, &y, &cfg).unwrap();
    assert_eq!(a, b);
    let other = fit(&spec, &x, &y, &TrainConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.1, other.1);
}

#[test]
fn no_validation_split_measures_training_part() {
    let (x, y) = separable(30, 4);
    let cfg = TrainConfig {
        epochs: 3,
        validation_fraction: 0.0,
        ..TrainConfig::new(LossKind::BinaryCe, 1)
    };
    let (_, hist) = fit(&small_spec(), &x, &y, &cfg).unwrap();
    assert_eq!(hist.train_loss, hist.val_loss);
}

#[test]
fn invalid_config_rejected() {
    let (x, y) = separable(10, 5);
    let cfg = TrainConfig {
        validation_fraction: 1.0,
        ..TrainConfig::new(LossKind::BinaryCe, 1)
    };
    assert!(matches!(
        fit(&small_spec(), &x, &y, &cfg),
        Err(NnError::InvalidConfig(_))
    ));
    let cfg = TrainConfig {
        epochs: 0,
        ..TrainConfig::new(LossKind::BinaryCe, 1)
    };
    assert!(matches!(
        fit(&small_spec(), &x, &y, &cfg),
        Err(NnError::InvalidConfig(_))
    ));
}

#[test]
fn divergence_reports_non_finite_loss() {
    let x = Matrix::from_vec(2, 2, vec![f64::NAN, 0.0, 1.0, 1.0]);
    let cfg = TrainConfig {
        epochs: 1,
        ..TrainConfig::new(LossKind::BinaryCe, 1)
    };
    let err = fit(&small_spec(), &x, &[0, 1], &cfg).unwrap_err();
    assert!(
        matches!(err, NnError::NonFiniteLoss { epoch: 0, .. }),
        "{err:?}"
    );
}

#[test]
fn checkpoint_reload_is_bit_exact() {
    let (x, y) = separable(50, 6);
    let spec = NeuralSpec::new(
        2,
        vec![
            LayerSpec::Gru {
                units: 3,
                return_sequences: false,
            },
            LayerSpec::dense(2, Activation::Softmax),
        ],
    )
    .unwrap();
    let cfg = TrainConfig {
        epochs: 4,
        ..TrainConfig::new(LossKind::CategoricalCe, 2)
    };
    let (params, _) = fit(&spec, &x, &y, &cfg).unwrap();
    let json = NeuralCheckpoint::new(spec.clone(), params.clone()).to_json();
    let back = NeuralCheckpoint::from_json(&json).unwrap();
    assert_eq!(back.params.flatten(), params.flatten());
    let inputs = [x];
    assert_eq!(
        predict(&spec, &params, &inputs).unwrap(),
        predict(&back.spec, &back.params, &inputs).unwrap()
    );
}

#[test]
fn checkpoint_rejects_bad_payloads() {
    assert!(NeuralCheckpoint::from_json("{}").is_err());
    let ck = NeuralCheckpoint::new(
        small_spec(),
        tabx_core::nn::ParameterBlock::init(&small_spec(), 0),
    );
    let tampered = ck
        .to_json()
        .replace("\"format_version\":1", "\"format_version\":99");
    assert!(NeuralCheckpoint::from_json(&tampered).is_err());
}

fn oracle_ce(probs: &[Vec<f64>], targets: &[Vec<f64>], binary: bool) -> f64 {
    let mut total = 0.0;
    for (p_row, t_row) in probs.iter().zip(targets) {
        for (&p, &t) in p_row.iter().zip(t_row) {
            let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            total -= t * p.ln();
            if binary {
                total -= (1.0 - t) * (1.0 - p).ln();
            }
        }
    }
    total / probs.len() as f64
}

proptest! {
    #[test]
    fn categorical_ce_matches_scalar_loop(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 3), 1..12), seed in 0u64..1000) {
        let probs: Vec<Vec<f64>> = rows.iter().map(|r| { let s: f64 = r.iter().sum(); r.iter().map(|v| v / s).collect() }).collect();
        let mut g = rng::stream(seed);
        let labels: Vec<usize> = probs.iter().map(|_| g.random_range(0..3)).collect();
        let t = one_hot(&labels, 3);
        let targets: Vec<Vec<f64>> = (0..t.rows()).map(|i| t.row(i).to_vec()).collect();
        let (loss, _) = cross_entropy(&Matrix::from_rows(&probs), &t, LossKind::CategoricalCe).unwrap();
        prop_assert!((loss - oracle_ce(&probs, &targets, false)).abs() < 1e-12);
    }

    #[test]
    fn binary_ce_matches_scalar_loop(ps in prop::collection::vec(0.0f64..=1.0, 1..20), seed in 0u64..1000) {
        let mut g = rng::stream(seed);
        let labels: Vec<usize> = ps.iter().map(|_| g.random_range(0..2)).collect();
        let t = one_hot(&labels, 1);
        let probs: Vec<Vec<f64>> = ps.iter().map(|&p| vec![p]).collect();
        let targets: Vec<Vec<f64>> = labels.iter().map(|&l| vec![l as f64]).collect();
        let (loss, _) = cross_entropy(&Matrix::from_rows(&probs), &t, LossKind::BinaryCe).unwrap();
        prop_assert!(loss.is_finite());
        prop_assert!((loss - oracle_ce(&probs, &targets, true)).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one(z in prop::collection::vec(-50.0f64..50.0, 1..8)) {
        let p = tabx_core::nn::softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
