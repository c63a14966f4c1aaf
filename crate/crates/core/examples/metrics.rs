use off_core::glm::FitConfig;
use off_core::metrics::{auc, evaluate, non_penalization_gap, off_gap, percent};
use off_core::models::{fit_base, fit_imputed, fit_multi, predict_dataset};
use off_core::dataset::{inject_availability, split_train_test, FeatureInjection, InjectionSpec};
use off_core::synthetic::{sample_family_complete, FamilyParams};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let full = sample_family_complete(&FamilyParams::paper_synthetic(), 20_000, 4)?;
    // hide low values of z1; keep z2 and z3 as base features
    let spec = InjectionSpec {
        features: vec![FeatureInjection::new("z1", -3.0)],
    };
    let ds = inject_availability(&full, &spec, 4)?.repartition(&["z1".to_owned()])?;
    let (train, test) = split_train_test(&ds, 0.8, 4)?;

    let cfg = FitConfig::default();
    let base = fit_base(&train, &cfg)?;
    let imputed = fit_imputed(&train, &cfg, true)?;
    let multi = fit_multi(&train, &cfg)?;

    for (name, model) in [("base", &base as &dyn off_core::OffPredictor), ("imputed", &imputed), ("multi", &multi)] {
        let report = evaluate(model, &test)?;
        let gap = non_penalization_gap(model, &base, &test, 0)?;
        println!(
            "{name:>8}: error {}%  auc {:.4}  unfavourable score without z1 {}%  change {}",
            percent(report.get("misclassification").unwrap()),
            report.get("auc").unwrap(),
            percent(gap.avg_imputed),
            percent(gap.change)
        );
    }
    println!("gap imputed vs multi: {:.4}", off_gap(&imputed, &multi, &test)?);
    let scores = predict_dataset(&multi, &test)?;
    println!("multi AUC {:.4}", auc(&scores, test.labels())?);
    Ok(())
}
