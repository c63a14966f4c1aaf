#![allow(dead_code)]

use off_core::models::{Atom, FiniteDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bits(width: usize, value: usize) -> Vec<bool> {
    (0..width).map(|i| value >> i & 1 == 1).collect()
}

/// Random finite distribution: at most four base points in `{0,1,2}^n`,
/// `r ≤ 2` optional features with binary values, each candidate atom kept
/// with probability 3/4 and given a random positive weight.
pub fn random_distribution(rng: &mut ChaCha8Rng) -> FiniteDistribution {
    let n = rng.random_range(1..=2);
    let r = rng.random_range(0..=2);
    let k = rng.random_range(1..=4usize).min(3usize.pow(n as u32));
    let mut support: Vec<Vec<f64>> = Vec::new();
    while support.len() < k {
        let p: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..3u8))).collect();
        if !support.contains(&p) {
            support.push(p);
        }
    }
    let mut atoms = Vec::new();
    loop {
        for b in &support {
            for a_bits in 0..1usize << r {
                let a = bits(r, a_bits);
                for z_bits in 0..1usize << r {
                    let z: Vec<f64> = bits(r, z_bits).iter().map(|&v| f64::from(u8::from(v))).collect();
                    if (0..r).any(|i| !a[i] && z[i] != 0.0) {
                        continue;
                    }
                    for y in 0..2u8 {
                        if rng.random::<f64>() < 0.75 {
                            atoms.push(Atom {
                                b: b.clone(),
                                a: a.clone(),
                                z: z.clone(),
                                y,
                                weight: rng.random_range(0.05..1.0),
                            });
                        }
                    }
                }
            }
        }
        if !atoms.is_empty() {
            break;
        }
    }
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    for atom in &mut atoms {
        atom.weight /= total;
    }
    FiniteDistribution::new(n, r, atoms).expect("valid distribution")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
