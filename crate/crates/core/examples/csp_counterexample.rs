//! A distribution where conditioning non-disclosers on the disclosers'
//! outcomes is worse than ignoring the optional feature altogether.

use off_core::learner::GroupMeanLearner;
use off_core::metrics::mse;
use off_core::models::{fit_base_with, fit_csp_with, fit_multi_with};
use off_core::synthetic::{sample_counterexample, CounterexampleParams};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    for alpha in [0.2, 0.5, 0.8] {
        let c = CounterexampleParams::new(alpha)?;
        let train = sample_counterexample(&c, 50_000, 1)?;
        let test = sample_counterexample(&c, 50_000, 2)?;
        let csp = fit_csp_with(&train, &GroupMeanLearner)?;
        let base = fit_base_with(&train, &GroupMeanLearner)?;
        let multi = fit_multi_with(&train, &GroupMeanLearner)?;
        println!(
            "alpha={alpha}: csp {:.4} (exact {:.4})  base {:.4} (exact {:.4})  multi {:.4}",
            mse(&csp, &test)?,
            c.csp_loss(),
            mse(&base, &test)?,
            c.base_loss(),
            mse(&multi, &test)?
        );
    }
    Ok(())
}
