use rand::Rng;
use tabx_core::data::{
    encode_categoricals, impute_mean, synth_generate, ADHD200_CLASS_COUNTS, SUBJECT_COLUMN,
};
use tabx_core::explain::{
    exact_shapley, interaction_matrix, kernel_shap, mean_abs_shap, pfi, pfi_feature,
    shap_interaction, ExplainError, PfiMetric, ShapExplanation,
};
use tabx_core::zoo::{BoostConfig, FittedModel};
use tabx_core::{rng, Matrix};

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn random_matrix(r: &mut rng::Stream, n: usize, d: usize) -> Matrix {
    Matrix::from_vec(
        n,
        d,
        (0..n * d).map(|_| r.random_range(-2.0..2.0)).collect(),
    )
}

/// A random smooth two-class model with pairwise terms; features flagged in
/// `dummy` never enter the score.
struct RandomModel {
    w: Vec<f64>,
    pairs: Vec<(usize, usize, f64)>,
}

impl RandomModel {
    fn new(r: &mut rng::Stream, d: usize, dummy: &[usize]) -> Self {
        let live: Vec<usize> = (0..d).filter(|i| !dummy.contains(i)).collect();
        let w = (0..d)
            .map(|i| {
                if dummy.contains(&i) {
                    0.0
                } else {
                    r.random_range(-1.5..1.5)
                }
            })
            .collect();
        let pairs = (0..3)
            .map(|_| {
                (
                    live[r.random_range(0..live.len())],
                    live[r.random_range(0..live.len())],
                    r.random_range(-1.0..1.0),
                )
            })
            .collect();
        Self { w, pairs }
    }

    fn proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), 2);
        for i in 0..x.rows() {
            let row = x.row(i);
            let mut z: f64 = row.iter().zip(&self.w).map(|(a, b)| a * b).sum();
            z += self
                .pairs
                .iter()
                .map(|&(a, b, c)| c * row[a] * row[b])
                .sum::<f64>();
            let p = 1.0 / (1.0 + (-z).exp());
            out.set(i, 0, 1.0 - p);
            out.set(i, 1, p);
        }
        out
    }
}

#[test]
fn exact_values_satisfy_efficiency_and_dummy() {
    let mut r = rng::stream(1);
    for case in 0..20 {
        let d = r.random_range(2..=8);
        let dummy = r.random_range(0..d);
        let model = RandomModel::new(&mut r, d, &[dummy]);
        let f = |x: &Matrix| model.proba(x);
        let bg = random_matrix(&mut r, 10, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let e = exact_shapley(&f, &x, &bg, &names(d), 1).unwrap();
        assert!(e.residual.abs() < 1e-9, "case {case}");
        assert!((e.prediction - f(&Matrix::from_vec(1, d, x.clone())).get(0, 1)).abs() < 1e-15);
        assert!(e.phi()[dummy].abs() < 1e-12, "case {case}");
    }
}

#[test]
fn swapping_two_features_swaps_their_values() {
    let mut r = rng::stream(2);
    for _ in 0..20 {
        let d = r.random_range(2..=8);
        let (a, b) = (0, d - 1);
        let model = RandomModel::new(&mut r, d, &[]);
        let swap = |m: &Matrix| {
            let mut order: Vec<usize> = (0..d).collect();
            order.swap(a, b);
            m.select_cols(&order)
        };
        let f = |x: &Matrix| model.proba(x);
        let g = |x: &Matrix| model.proba(&swap(x));
        let bg = random_matrix(&mut r, 8, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let mut xs = x.clone();
        xs.swap(a, b);
        let pf = exact_shapley(&f, &x, &bg, &names(d), 1).unwrap().phi();
        let pg = exact_shapley(&g, &xs, &swap(&bg), &names(d), 1)
            .unwrap()
            .phi();
        for i in 0..d {
            let j = if i == a {
                b
            } else if i == b {
                a
            } else {
                i
            };
            assert!((pf[i] - pg[j]).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_features_get_equal_values() {
    // Symmetric model in (0, 1), instance and background agree on both.
    let f = |x: &Matrix| {
        Matrix::from_vec(
            x.rows(),
            1,
            (0..x.rows())
                .map(|i| x.get(i, 0) * x.get(i, 1) + x.get(i, 0) + x.get(i, 1) + 0.3 * x.get(i, 2))
                .collect(),
        )
    };
    let bg = Matrix::from_rows(&[
        vec![1.0, 1.0, 0.0],
        vec![-2.0, -2.0, 1.0],
        vec![0.5, 0.5, 3.0],
    ]);
    let e = exact_shapley(&f, &[0.7, 0.7, -1.0], &bg, &names(3), 0).unwrap();
    assert!((e.phi()[0] - e.phi()[1]).abs() < 1e-12);
}

#[test]
fn linear_model_closed_form() {
    let mut r = rng::stream(3);
    for _ in 0..50 {
        let d = r.random_range(1..=8);
        let w: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
        let f = |x: &Matrix| {
            Matrix::from_vec(
                x.rows(),
                1,
                (0..x.rows())
                    .map(|i| x.row(i).iter().zip(&w).map(|(a, b)| a * b).sum())
                    .collect(),
            )
        };
        let bg = random_matrix(&mut r, 12, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let e = exact_shapley(&f, &x, &bg, &names(d), 0).unwrap();
        for i in 0..d {
            let mean = bg.column(i).iter().sum::<f64>() / 12.0;
            assert!((e.phi()[i] - w[i] * (x[i] - mean)).abs() < 1e-9);
        }
    }
}

#[test]
fn kernel_with_full_enumeration_is_exact() {
    let mut r = rng::stream(4);
    for _ in 0..20 {
        let d = r.random_range(2..=10);
        let model = RandomModel::new(&mut r, d, &[]);
        let f = |x: &Matrix| model.proba(x);
        let bg = random_matrix(&mut r, 6, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let exact = exact_shapley(&f, &x, &bg, &names(d), 1).unwrap().phi();
        let budget = ((1usize << d) - 2).max(2 * d + 2);
        let approx = kernel_shap(&f, &x, &bg, &names(d), budget, 0, 1).unwrap();
        assert!(approx.residual.abs() < 1e-9);
        for (a, b) in exact.iter().zip(approx.phi()) {
            assert!((a - b).abs() < 1e-6, "d={d}: {a} vs {b}");
        }
    }
}

#[test]
fn kernel_dummy_and_efficiency_under_sampling() {
    let mut r = rng::stream(5);
    let d = 12;
    let model = RandomModel::new(&mut r, d, &[7]);
    let f = |x: &Matrix| model.proba(x);
    let bg = random_matrix(&mut r, 10, d);
    let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
    let e = kernel_shap(&f, &x, &bg, &names(d), 2048, 9, 1).unwrap();
    assert!(e.phi()[7].abs() < 0.01, "{}", e.phi()[7]);
    assert!(e.residual.abs() < 1e-6);
    assert_eq!(kernel_shap(&f, &x, &bg, &names(d), 2048, 9, 1).unwrap(), e);
}

#[test]
fn kernel_error_shrinks_as_samples_double() {
    let mut r = rng::stream(6);
    let d = 8;
    let sizes = [24, 48, 96];
    let mut err = [0.0; 3];
    for case in 0..20 {
        let model = RandomModel::new(&mut r, d, &[]);
        let f = |x: &Matrix| model.proba(x);
        let bg = random_matrix(&mut r, 6, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let exact = exact_shapley(&f, &x, &bg, &names(d), 1).unwrap().phi();
        for (k, &n) in sizes.iter().enumerate() {
            let phi = kernel_shap(&f, &x, &bg, &names(d), n, case, 1)
                .unwrap()
                .phi();
            err[k] += exact
                .iter()
                .zip(&phi)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / d as f64;
        }
    }
    assert!(err[0] > err[1] && err[1] > err[2], "{err:?}");
}

#[test]
fn kernel_rejects_tiny_budgets() {
    let f = |x: &Matrix| Matrix::zeros(x.rows(), 1);
    let err = kernel_shap(&f, &[0.0; 4], &Matrix::zeros(1, 4), &names(4), 9, 0, 0).unwrap_err();
    assert_eq!(err, ExplainError::TooFewSamples { n: 9, min: 10 });
}

#[test]
fn exact_rejects_wide_inputs() {
    let f = |x: &Matrix| Matrix::zeros(x.rows(), 1);
    let err = exact_shapley(&f, &[0.0; 16], &Matrix::zeros(1, 16), &names(16), 0).unwrap_err();
    assert!(matches!(err, ExplainError::TooManyFeatures { d: 16, .. }));
}

#[test]
fn additive_model_has_no_interaction() {
    let f = |x: &Matrix| {
        Matrix::from_vec(
            x.rows(),
            1,
            (0..x.rows())
                .map(|i| x.get(i, 0).sin() + x.get(i, 1).powi(3) + x.get(i, 2))
                .collect(),
        )
    };
    let mut r = rng::stream(7);
    let bg = random_matrix(&mut r, 5, 3);
    let v = shap_interaction(&f, &[0.3, -1.2, 2.0], &bg, 0, 1, 0).unwrap();
    assert!(v.abs() < 1e-9);
}

#[test]
fn product_interaction_matches_four_coalitions() {
    let f = |x: &Matrix| {
        Matrix::from_vec(
            x.rows(),
            1,
            (0..x.rows()).map(|i| x.get(i, 0) * x.get(i, 1)).collect(),
        )
    };
    let bg = Matrix::zeros(1, 2);
    let (xi, xj) = (1.7, -0.6);
    // Brute force over the coalitions {}, {i}, {j}, {i, j} with weight 0!0!/(2·1!).
    let value =
        |i_on: bool, j_on: bool| (if i_on { xi } else { 0.0 }) * (if j_on { xj } else { 0.0 });
    let oracle =
        0.5 * (value(true, true) - value(true, false) - value(false, true) + value(false, false));
    let got = shap_interaction(&f, &[xi, xj], &bg, 0, 1, 0).unwrap();
    assert!((got - oracle).abs() < 1e-12);
    assert_eq!(got, shap_interaction(&f, &[xi, xj], &bg, 1, 0, 0).unwrap());
    assert_eq!(
        shap_interaction(&f, &[xi, xj], &bg, 1, 1, 0),
        Err(ExplainError::SameFeature(1))
    );
}

#[test]
fn interactions_and_main_effects_sum_to_total() {
    let mut r = rng::stream(8);
    for d in 2..=6 {
        let model = RandomModel::new(&mut r, d, &[]);
        let f = |x: &Matrix| model.proba(x);
        let bg = random_matrix(&mut r, 5, d);
        let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
        let m = interaction_matrix(&f, &x, &bg, &names(d), 1).unwrap();
        let phi = exact_shapley(&f, &x, &bg, &names(d), 1).unwrap().phi();
        let total: f64 = m.values.iter().flatten().sum();
        assert!((total - (m.prediction - m.base_value)).abs() < 1e-9);
        for i in 0..d {
            assert!((m.values[i].iter().sum::<f64>() - phi[i]).abs() < 1e-9);
            for j in 0..d {
                assert_eq!(m.values[i][j], m.values[j][i]);
            }
        }
    }
}

#[test]
fn mean_abs_ranking() {
    let f = |x: &Matrix| {
        Matrix::from_vec(
            x.rows(),
            1,
            (0..x.rows())
                .map(|i| 2.0 * x.get(i, 0) - 5.0 * x.get(i, 1))
                .collect(),
        )
    };
    let bg = Matrix::zeros(1, 3);
    let e = exact_shapley(&f, &[1.0, 1.0, 1.0], &bg, &names(3), 0).unwrap();
    let ranked = mean_abs_shap(std::slice::from_ref(&e)).unwrap();
    let order: Vec<&str> = ranked.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(order, vec!["x1", "x0", "x2"]);
    let zero = |x: &Matrix| Matrix::zeros(x.rows(), 1);
    let z = exact_shapley(&zero, &[1.0, 2.0], &Matrix::zeros(1, 2), &names(2), 0).unwrap();
    assert!(mean_abs_shap(&[z])
        .unwrap()
        .iter()
        .all(|g| g.mean_abs_phi == 0.0));
    assert!(mean_abs_shap(&[]).is_err());
}

#[test]
fn explanation_json_shape() {
    let f = |x: &Matrix| Matrix::from_vec(x.rows(), 1, x.column(0));
    let e = exact_shapley(&f, &[3.0], &Matrix::zeros(1, 1), &names(1), 0).unwrap();
    let v: serde_json::Value = serde_json::to_value(&e).unwrap();
    assert_eq!(v["features"][0]["name"], "x0");
    assert_eq!(v["features"][0]["phi"], 3.0);
    assert!(v.get("base_value").is_some() && v.get("target_class").is_some());
    let back: ShapExplanation = serde_json::from_value(v).unwrap();
    assert_eq!(back, e);
}

/// Synthetic table with labels rewritten to depend on one column only.
fn single_driver(driver: &str, seed: u64) -> (Matrix, Vec<usize>, Vec<String>) {
    let (raw, _) = synth_generate(ADHD200_CLASS_COUNTS, seed);
    let (imputed, mut state) = impute_mean(&raw).unwrap();
    let encoded = encode_categoricals(&imputed, &mut state).unwrap();
    let fm = encoded
        .to_feature_matrix(&[SUBJECT_COLUMN.to_string()])
        .unwrap();
    let col = fm.names().iter().position(|n| n == driver).unwrap();
    let values = fm.data().column(col);
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let y = values.iter().map(|&v| usize::from(v > median)).collect();
    (fm.data().clone(), y, fm.names().to_vec())
}

#[test]
fn sole_driver_ranks_first_in_mean_abs_shap() {
    let (x, y, names) = single_driver("ADHD Index", 21);
    let model = FittedModel::fit_gboost(&x, &y, 2, &names, &BoostConfig::default()).unwrap();
    let bg = x.select_rows(&(0..20).collect::<Vec<_>>());
    let explanations: Vec<ShapExplanation> = (100..110)
        .map(|i| kernel_shap(&model, x.row(i), &bg, &names, 512, i as u64, 1).unwrap())
        .collect();
    assert_eq!(mean_abs_shap(&explanations).unwrap()[0].name, "ADHD Index");
}

#[test]
fn sole_driver_ranks_first_in_pfi() {
    let (x, y, names) = single_driver("Inattentive", 22);
    let model = FittedModel::fit_gboost(&x, &y, 2, &names, &BoostConfig::default()).unwrap();
    let report = pfi(&model, &x, &y, &names, "accuracy", 10, 3).unwrap();
    assert_eq!(report.ranked()[0].name, "Inattentive");
}

#[test]
fn pfi_constant_and_ignored_features() {
    let mut r = rng::stream(9);
    let n = 200;
    let mut x = random_matrix(&mut r, n, 3);
    for i in 0..n {
        x.set(i, 2, 4.0);
    }
    let y: Vec<usize> = (0..n).map(|i| usize::from(x.get(i, 0) > 0.0)).collect();
    // Column 1 is provably ignored.
    let f = |m: &Matrix| {
        let mut out = Matrix::zeros(m.rows(), 2);
        for i in 0..m.rows() {
            let p = 1.0 / (1.0 + (-3.0 * m.get(i, 0) - 0.1 * m.get(i, 2)).exp());
            out.row_mut(i).copy_from_slice(&[1.0 - p, p]);
        }
        out
    };
    let before = x.clone();
    let report = pfi(&f, &x, &y, &names(3), "accuracy", 20, 4).unwrap();
    assert_eq!(x, before);
    assert_eq!(report.features[2].mean, 0.0);
    assert_eq!(report.features[2].std, 0.0);
    assert!(report.features[1].mean.abs() < 0.02);
    assert_eq!(report.ranked()[0].name, "x0");
    assert!((report.baseline_score - PfiMetric::Accuracy.score(&f(&x), &y).unwrap()).abs() < 1e-15);
}

#[test]
fn pfi_does_not_depend_on_processing_order() {
    let mut r = rng::stream(10);
    let x = random_matrix(&mut r, 80, 4);
    let y: Vec<usize> = (0..80)
        .map(|i| usize::from(x.get(i, 1) + x.get(i, 3) > 0.0))
        .collect();
    let f = |m: &Matrix| {
        let mut out = Matrix::zeros(m.rows(), 2);
        for i in 0..m.rows() {
            let p = 1.0 / (1.0 + (-(m.get(i, 1) + 0.5 * m.get(i, 3))).exp());
            out.row_mut(i).copy_from_slice(&[1.0 - p, p]);
        }
        out
    };
    let report = pfi(&f, &x, &y, &names(4), "f1", 5, 11).unwrap();
    for feat in (0..4).rev() {
        let alone = pfi_feature(
            &f,
            &x,
            &y,
            &names(4),
            PfiMetric::F1,
            report.baseline_score,
            feat,
            5,
            11,
        )
        .unwrap();
        assert_eq!(alone, report.features[feat]);
    }
    assert!(matches!(
        pfi(&f, &x, &y, &names(4), "mcc", 5, 11),
        Err(ExplainError::UnknownMetric(_))
    ));
    assert!(pfi(&f, &x, &y, &names(4), "auc", 2, 11).is_ok());
}
