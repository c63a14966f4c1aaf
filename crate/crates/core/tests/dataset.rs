use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use off_core::dataset::{
    drop_optional, feature_drop_scores, inject_availability, rank_features_by_drop, FeatureInjection, InjectionSpec,
    LabeledDataset, Schema,
};
use off_core::glm::FitConfig;
use off_core::learner::LogisticLearner;

fn one_optional(values: Vec<f64>) -> LabeledDataset {
    let rows = values.len();
    LabeledDataset::fully_available(
        Schema::new(["b"], ["z"], "y").unwrap(),
        DMatrix::from_fn(rows, 1, |j, _| j as f64),
        DMatrix::from_row_slice(rows, 1, &values),
        (0..rows).map(|j| (j % 2) as u8).collect(),
    )
    .unwrap()
}

fn missing_rate(ds: &LabeledDataset, rows: impl Iterator<Item = usize>) -> (f64, usize) {
    let rows: Vec<usize> = rows.collect();
    let hidden = rows.iter().filter(|&&j| !ds.mask().get(j, 0)).count();
    (hidden as f64 / rows.len() as f64, rows.len())
}

fn within_three_sigma(rate: f64, p: f64, n: usize) -> bool {
    (rate - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn injection_probabilities() {
    let n = 20_000;
    let spec = |slope: f64, center: f64| InjectionSpec {
        features: vec![FeatureInjection {
            center: Some(center),
            ..FeatureInjection::new("z", slope)
        }],
    };
    let at_centre = inject_availability(&one_optional(vec![2.0; n]), &spec(3.0, 2.0), 1).unwrap();
    let (rate, _) = missing_rate(&at_centre, 0..n);
    assert!(within_three_sigma(rate, 0.5, n), "{rate}");

    let spread: Vec<f64> = (0..n).map(|j| (j % 17) as f64 - 8.0).collect();
    let flat = inject_availability(&one_optional(spread), &spec(0.0, 0.0), 2).unwrap();
    let (rate, _) = missing_rate(&flat, 0..n);
    assert!(within_three_sigma(rate, 0.5, n), "{rate}");

    let ln3 = inject_availability(&one_optional(vec![3f64.ln(); n]), &spec(1.0, 0.0), 3).unwrap();
    let (rate, _) = missing_rate(&ln3, 0..n);
    assert!(within_three_sigma(rate, 0.75, n), "{rate}");

    assert_eq!(drop_optional(&ln3), drop_optional(&one_optional(vec![0.0; n])));
}

#[test]
fn positive_slope_hides_large_values_more_often() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values: Vec<f64> = (0..2000).map(|_| rng.sample(StandardNormal)).collect();
    let ds = one_optional(values.clone());
    let spec = InjectionSpec {
        features: vec![FeatureInjection {
            per_std: true,
            ..FeatureInjection::new("z", 1.0)
        }],
    };
    let out = inject_availability(&ds, &spec, 9).unwrap();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (above, _) = missing_rate(&out, (0..values.len()).filter(|&j| values[j] > mean));
    let (below, _) = missing_rate(&out, (0..values.len()).filter(|&j| values[j] <= mean));
    assert!(above > below, "{above} vs {below}");
}

fn ranking_data(rows: usize, duplicate: bool) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let signal: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
    let labels: Vec<u8> = signal.iter().map(|&s| u8::from(s + 0.3 * rng.sample::<f64, _>(StandardNormal) > 0.0)).collect();
    let names = if duplicate { ["noise", "signal", "copy"] } else { ["noise", "signal", "other"] };
    let base = DMatrix::from_fn(rows, 3, |j, c| match c {
        1 => signal[j],
        2 if duplicate => signal[j],
        _ => ((j * 7919 + c * 104_729) % 1000) as f64 / 500.0 - 1.0,
    });
    LabeledDataset::fully_available(Schema::new(names, Vec::<String>::new(), "y").unwrap(), base, DMatrix::zeros(rows, 0), labels)
        .unwrap()
}

#[test]
fn informative_feature_ranks_first() {
    let learner = LogisticLearner::new(FitConfig::default());
    let ranking = rank_features_by_drop(&ranking_data(2000, false), &learner, 1).unwrap();
    assert_eq!(ranking[0], "signal");
    assert_eq!(ranking.len(), 3);
}

#[test]
fn duplicated_columns_have_no_drop_score() {
    let learner = LogisticLearner::new(FitConfig::default());
    let scores = feature_drop_scores(&ranking_data(10_000, true), &learner, 2).unwrap();
    for (name, score) in scores {
        if name != "noise" {
            assert!(score.abs() <= 0.02, "{name}: {score}");
        }
    }
}

#[test]
fn single_feature_ranking() {
    let ds = LabeledDataset::fully_available(
        Schema::new(["only"], Vec::<String>::new(), "y").unwrap(),
        DMatrix::from_fn(10, 1, |j, _| j as f64),
        DMatrix::zeros(10, 0),
        vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
    )
    .unwrap();
    let learner = LogisticLearner::new(FitConfig::default());
    assert_eq!(rank_features_by_drop(&ds, &learner, 0).unwrap(), vec!["only".to_owned()]);
}
