//! Five applicants, one of whom withheld a test score. The subset model for
//! "no optional feature" is fit on everyone, so withholding is never worse
//! than the average outcome of applicants with the same base features.

use off_core::dataset::{read_csv, Schema};
use off_core::learner::GroupMeanLearner;
use off_core::models::{fit_multi_with, predict_dataset};

const APPLICANTS: &str = "\
courses,gpa,test_score,admitted
0,3.6,87,Yes
1,3.7,N/A,Yes
0,3.6,92,Yes
0,3.6,N/A,No
2,3.0,56,No
";

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let schema = Schema::new(["courses", "gpa"], ["test_score"], "admitted")?;
    let ds = read_csv(APPLICANTS.as_bytes(), &schema, "N/A")?;
    let model = fit_multi_with(&ds, &GroupMeanLearner)?;

    for (j, p) in predict_dataset(&model, &ds)?.iter().enumerate() {
        println!("applicant {}: admitted={} score={p:.3}", j + 1, ds.labels()[j]);
    }
    let fourth = model.predict(&ds.base_row(3), ds.mask_row(3), &ds.optional_row(3))?;
    assert!((fourth - 2.0 / 3.0).abs() < 1e-12);
    Ok(())
}
