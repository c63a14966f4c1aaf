//! Naive Bayes over binary features: withheld features simply drop out of
//! the log-odds sum.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use off_core::dataset::{AvailabilityMask, LabeledDataset, Schema, NA};
use off_core::metrics::evaluate;
use off_core::models::fit_nb_off;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows = 4_000;
    let (mut base, mut opt, mut bits, mut labels) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..rows {
        let y = rng.random::<f64>() < 0.4;
        let p = if y { [0.7, 0.2] } else { [0.3, 0.6] };
        for &pi in &p {
            base.push(f64::from(u8::from(rng.random::<f64>() < pi)));
        }
        for (p_avail, p_one) in [(0.8, if y { 0.9 } else { 0.2 }), (0.5, if y { 0.4 } else { 0.6 })] {
            let a = rng.random::<f64>() < p_avail;
            let v = f64::from(u8::from(rng.random::<f64>() < p_one));
            bits.push(a);
            opt.push(if a { v } else { NA });
        }
        labels.push(u8::from(y));
    }
    let ds = LabeledDataset::new(
        Schema::new(["smoker", "exercise"], ["screening", "family_history"], "condition")?,
        DMatrix::from_row_slice(rows, 2, &base),
        DMatrix::from_row_slice(rows, 2, &opt),
        AvailabilityMask::new(rows, 2, bits)?,
        labels,
    )?;

    let model = fit_nb_off(&ds, 1.0)?;
    println!("{} log-ratios, prior log-odds {:.3}", model.n_ratio_params(), model.prior_log_odds);
    for (name, r) in ds.schema().optional_names.iter().zip(&model.optional_ratios) {
        println!("  {name}: v=0 {:+.3}  v=1 {:+.3}", r[0], r[1]);
    }
    let withheld = model.predict(&[1.0, 0.0], &[false, false], &[NA, NA])?;
    let disclosed = model.predict(&[1.0, 0.0], &[true, false], &[1.0, NA])?;
    println!("smoker, no exercise: {withheld:.3} withheld, {disclosed:.3} with a positive screening");
    println!("{}", serde_json::to_string_pretty(&evaluate(&model, &ds)?)?);
    Ok(())
}
