//! Exact fair predictions on a small finite distribution, by enumeration.

use off_core::models::{brute_force_off, Atom, FiniteDistribution};
use off_core::learner::GroupMeanLearner;
use off_core::models::fit_multi_with;

fn atom(b: f64, a: bool, z: f64, y: u8, weight: f64) -> Atom {
    Atom {
        b: vec![b],
        a: vec![a],
        z: vec![z],
        y,
        weight,
    }
}

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dist = FiniteDistribution::new(
        1,
        1,
        vec![
            atom(0.0, true, 1.0, 1, 0.20),
            atom(0.0, true, 0.0, 0, 0.15),
            atom(0.0, false, 0.0, 0, 0.25),
            atom(1.0, true, 1.0, 1, 0.10),
            atom(1.0, false, 0.0, 1, 0.20),
            atom(1.0, false, 0.0, 0, 0.10),
        ],
    )?;
    let model = fit_multi_with(&dist.to_dataset()?, &GroupMeanLearner)?;
    for b in [0.0, 1.0] {
        let withheld = brute_force_off(&dist, &[b], &[false], &[f64::NAN])?;
        let given_missing = dist.conditional_mean(|a| a.b == [b] && !a.a[0])?;
        println!(
            "b={b}: fair score when withheld {withheld:.3} (E[Y|b] {:.3}, E[Y|b, withheld] {given_missing:.3}, model {:.3})",
            dist.mean_given_base(&[b])?,
            model.predict(&[b], &[false], &[f64::NAN])?
        );
    }
    let off = dist.expected_mse(|a| brute_force_off(&dist, &a.b, &a.a, &a.z))?;
    let base = dist.expected_mse(|a| dist.mean_given_base(&a.b))?;
    println!("expected squared error: fair {off:.4}, base only {base:.4}");
    Ok(())
}
