//! One logistic model per availability pattern, with fallbacks for patterns
//! that are too rare to fit.

use off_core::glm::FitConfig;
use off_core::metrics::misclassification;
use off_core::models::fit_multi;
use off_core::synthetic::{sample_family, FamilyParams};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = FamilyParams::paper_synthetic();
    let train = sample_family(&params, 5_000, 1)?;
    let test = sample_family(&params, 5_000, 2)?;

    let model = fit_multi(&train, &FitConfig::default())?;
    println!("{} submodels from {} fits", model.submodels.len(), model.fits);
    for (key, entry) in &model.submodels {
        let rows = train.rows_with_superset(*key).len();
        println!("  {key}: {rows:>5} rows, served by {}", entry.source);
    }
    for (key, entry) in model.fallbacks() {
        println!("  fallback {key} -> {} ({})", entry.source, entry.fallback_reason.as_deref().unwrap_or(""));
    }
    println!("test error {:.4}", misclassification(&model, &test, 0.5)?);

    // a pattern that never occurs in training
    let mut sparse = sample_family(&params, 40, 3)?;
    sparse = sparse.select_rows(&(0..sparse.len()).filter(|&j| !sparse.mask_row(j)[2]).collect::<Vec<_>>());
    let fallback = fit_multi(&sparse, &FitConfig::default())?;
    println!("{} of 8 patterns use a fallback on {} rows", fallback.fallbacks().count(), sparse.len());
    Ok(())
}
