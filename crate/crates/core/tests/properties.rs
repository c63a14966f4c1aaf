use nalgebra::DMatrix;
use proptest::prelude::*;

use off_core::dataset::{
    inject_availability, read_csv, split_train_test, write_csv, AvailabilityMask, FeatureInjection, InjectionSpec,
    LabeledDataset, Schema,
};
use off_core::glm::{gradient, objective, FitConfig, LogisticParams};
use off_core::metrics::{auc, off_gap};
use off_core::models::{fit_base, fit_imputed, fit_multi, fit_off_lr, predict_dataset, FnPredictor, SubsetKey};
use off_core::synthetic::{sample_family, FamilyParams};

fn dataset() -> impl Strategy<Value = LabeledDataset> {
    (1usize..4, 0usize..4, 1usize..30).prop_flat_map(|(n, r, rows)| {
        (
            prop::collection::vec(-1e6f64..1e6, rows * n),
            prop::collection::vec(-1e3f64..1e3, rows * r),
            prop::collection::vec(any::<bool>(), rows * r),
            prop::collection::vec(0u8..2, rows),
        )
            .prop_map(move |(base, opt, bits, labels)| {
                let schema = Schema::new(
                    (0..n).map(|i| format!("b{i}")).collect::<Vec<_>>(),
                    (0..r).map(|i| format!("z{i}")).collect::<Vec<_>>(),
                    "y",
                )
                .unwrap();
                LabeledDataset::new(
                    schema,
                    DMatrix::from_row_slice(rows, n, &base),
                    DMatrix::from_row_slice(rows, r, &opt),
                    AvailabilityMask::new(rows, r, bits).unwrap(),
                    labels,
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(ds in dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf, "N/A").unwrap();
        let back = read_csv(buf.as_slice(), ds.schema(), "N/A").unwrap();
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn split_partitions_rows(rows in 2usize..200, fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let schema = Schema::new(["i"], Vec::<String>::new(), "y").unwrap();
        let ds = LabeledDataset::fully_available(
            schema,
            DMatrix::from_fn(rows, 1, |j, _| j as f64),
            DMatrix::zeros(rows, 0),
            vec![0; rows],
        ).unwrap();
        match split_train_test(&ds, fraction, seed) {
            Ok((train, test)) => {
                prop_assert_eq!(test.len(), ((1.0 - fraction) * rows as f64 + 1e-9).floor() as usize);
                let mut ids: Vec<f64> = train.base().iter().chain(test.base().iter()).copied().collect();
                prop_assert!(train.base().as_slice().windows(2).all(|w| w[0] < w[1]));
                ids.sort_by(f64::total_cmp);
                prop_assert_eq!(ids, (0..rows).map(|j| j as f64).collect::<Vec<_>>());
            }
            Err(_) => prop_assert!(((1.0 - fraction) * rows as f64 + 1e-9).floor() as usize == 0
                || ((1.0 - fraction) * rows as f64 + 1e-9).floor() as usize == rows),
        }
    }

    #[test]
    fn steeper_injection_hides_more_above_the_centre(
        values in prop::collection::vec(-5f64..5.0, 1..60),
        slope in 0f64..3.0,
        extra in 0f64..3.0,
        seed in any::<u64>(),
    ) {
        let rows = values.len();
        let ds = LabeledDataset::fully_available(
            Schema::new(["b"], ["z"], "y").unwrap(),
            DMatrix::zeros(rows, 1),
            DMatrix::from_row_slice(rows, 1, &values),
            vec![0; rows],
        ).unwrap();
        let spec = |s: f64| InjectionSpec { features: vec![FeatureInjection { center: Some(0.0), ..FeatureInjection::new("z", s) }] };
        let gentle = inject_availability(&ds, &spec(slope), seed).unwrap();
        let steep = inject_availability(&ds, &spec(slope + extra), seed).unwrap();
        for j in 0..rows {
            if values[j] > 0.0 && !gentle.mask().get(j, 0) {
                prop_assert!(!steep.mask().get(j, 0));
            }
            if values[j] < 0.0 && !steep.mask().get(j, 0) {
                prop_assert!(!gentle.mask().get(j, 0));
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(
        rows in 3usize..25,
        d in 1usize..4,
        seed in any::<u64>(),
        l2 in prop::sample::select(vec![0.0, 1e-6, 0.1]),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(rows, d, |_, _| rng.random_range(-2.0..2.0));
        let y: Vec<u8> = (0..rows).map(|_| rng.random_range(0..2u8)).collect();
        let params = LogisticParams { weights: (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), intercept: rng.random_range(-1.0..1.0) };
        let g = gradient(&params, &x, &y, None, l2).unwrap();
        let h = 1e-5;
        for c in 0..=d {
            let at = |delta: f64| {
                let mut p = params.clone();
                if c < d { p.weights[c] += delta } else { p.intercept += delta }
                objective(&p, &x, &y, None, l2).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            prop_assert!((g[c] - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "coord {}: {} vs {}", c, g[c], fd);
        }
    }

    #[test]
    fn auc_ignores_monotone_transforms(
        scores in prop::collection::vec(-3f64..3.0, 2..80),
        labels_seed in any::<u64>(),
    ) {
        let labels: Vec<u8> = (0..scores.len()).map(|j| ((labels_seed >> (j % 64)) & 1) as u8).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let squashed: Vec<f64> = scores.iter().map(|s| s.exp() * 2.0 + 1.0).collect();
        prop_assert_eq!(auc(&scores, &labels).unwrap(), auc(&squashed, &labels).unwrap());
        let flipped: Vec<u8> = labels.iter().map(|y| 1 - y).collect();
        prop_assert!((auc(&scores, &labels).unwrap() + auc(&scores, &flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gap_is_a_pseudometric(c in prop::collection::vec(-2f64..2.0, 6), ds in dataset()) {
        let f = |k: usize| {
            let (a, b) = (c[2 * k], c[2 * k + 1]);
            FnPredictor(move |base: &[f64], _: &[bool], _: &[f64]| 1.0 / (1.0 + (-(a * base[0].tanh() + b)).exp()))
        };
        let (f0, f1, f2) = (f(0), f(1), f(2));
        let d01 = off_gap(&f0, &f1, &ds).unwrap();
        prop_assert_eq!(off_gap(&f0, &f0, &ds).unwrap(), 0.0);
        prop_assert!((d01 - off_gap(&f1, &f0, &ds).unwrap()).abs() < 1e-15);
        prop_assert!(d01 <= off_gap(&f0, &f2, &ds).unwrap() + off_gap(&f2, &f1, &ds).unwrap() + 1e-12);
    }

    #[test]
    fn subset_key_text_round_trip(width in 0usize..12, bits in any::<u64>()) {
        let mask: Vec<bool> = (0..width).map(|i| bits >> i & 1 == 1).collect();
        let key = SubsetKey::from_mask(&mask);
        prop_assert_eq!(key.to_string().parse::<SubsetKey>().unwrap(), key);
        prop_assert_eq!(key.to_mask(), mask);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn withheld_everything_means_base_prediction(seed in 0u64..10_000) {
        let ds = sample_family(&FamilyParams::paper_synthetic(), 400, seed).unwrap();
        let cfg = FitConfig::default();
        let base = fit_base(&ds, &cfg).unwrap();
        let off = fit_off_lr(&ds, &cfg).unwrap();
        let multi = fit_multi(&ds, &cfg).unwrap();
        let none = [false; 3];
        let z = [f64::NAN; 3];
        for j in 0..20 {
            let b = ds.base_row(j);
            let p = base.predict(&b, &none, &z).unwrap();
            prop_assert_eq!(off.predict(&b, &none, &z).unwrap(), p);
            prop_assert_eq!(multi.predict(&b, &none, &z).unwrap(), p);
        }
        let imputed = fit_imputed(&ds, &cfg, true).unwrap();
        for model in [&base as &dyn off_core::OffPredictor, &off, &multi, &imputed] {
            prop_assert!(predict_dataset(model, &ds).unwrap().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
