//! Fits the compact logistic model and compares every stored scalar with the
//! closed-form coefficients of the generating family.

use off_core::glm::FitConfig;
use off_core::metrics::off_gap;
use off_core::models::fit_off_lr;
use off_core::synthetic::{oracle_coefficients, sample_family, FamilyOracle, FamilyParams};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = FamilyParams::paper_synthetic();
    let oracle = oracle_coefficients(&params);
    let test = sample_family(&params, 10_000, 99)?;

    for n in [1_000, 10_000, 50_000] {
        let train = sample_family(&params, n, 7)?;
        let model = fit_off_lr(&train, &FitConfig::default())?;
        let gap = off_gap(&model, &FamilyOracle::new(&params), &test)?;
        println!("N={n:>6}: {} parameters, {} fits, gap to posterior {gap:.4}", model.n_params(), model.fits);
        if n == 50_000 {
            println!("          fitted      oracle");
            println!("t         {:>8.3}  {:>8.3}", model.t, oracle.t);
            for (i, (w, o)) in model.w.iter().zip(&oracle.w).enumerate() {
                println!("w{i}        {w:>8.3}  {o:>8.3}");
            }
            for (k, (term, o)) in model.terms.iter().zip(&oracle.terms).enumerate() {
                println!("beta{k}     {:>8.3}  {:>8.3}", term.beta, o.beta);
                println!("s{k}        {:>8.3}  {:>8.3}", term.s, o.s);
                for (i, (w, ow)) in term.omega.iter().zip(&o.omega).enumerate() {
                    println!("omega{k}{i}   {w:>8.3}  {ow:>8.3}");
                }
            }
        }
    }
    Ok(())
}
