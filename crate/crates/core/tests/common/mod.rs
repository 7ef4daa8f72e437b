//! Seeded random economies shared by the integration tests.

#![allow(dead_code)]

use famdiv::{Economy, Family, Individual, UtilityFunction};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cd(id: impl Into<String>, alpha: f64) -> Individual {
    Individual::new(id, UtilityFunction::cobb_douglas2(alpha))
}

/// Two-good economy from per-family lists of utilities.
pub fn economy(endowment: [f64; 2], families: Vec<Vec<UtilityFunction>>) -> Economy {
    let families = families
        .into_iter()
        .enumerate()
        .map(|(f, members)| {
            Family::new(
                format!("f{f}"),
                members
                    .into_iter()
                    .enumerate()
                    .map(|(i, u)| Individual::new(format!("f{f}m{i}"), u))
                    .collect(),
            )
        })
        .collect();
    Economy::new(2, endowment.to_vec(), families).unwrap()
}

/// Cobb-Douglas members with weights drawn from `U(0.1, 0.9)`.
pub fn random_cd_economy(rng: &mut impl Rng, families: usize, max_members: usize, endowment: [f64; 2]) -> Economy {
    let members = (0..families)
        .map(|_| {
            let size = rng.gen_range(1..=max_members);
            (0..size)
                .map(|_| UtilityFunction::cobb_douglas2(rng.gen_range(0.1..0.9)))
                .collect()
        })
        .collect();
    economy(endowment, members)
}

/// A strictly convex utility: Cobb-Douglas or CES with `rho` in `[-2, 0.7]`.
pub fn random_strictly_convex(rng: &mut impl Rng) -> UtilityFunction {
    let w = rng.gen_range(0.1..0.9);
    if rng.gen_bool(0.5) {
        UtilityFunction::cobb_douglas2(w)
    } else {
        let mut rho: f64 = rng.gen_range(-2.0..0.7);
        if rho.abs() < 0.05 {
            rho = -0.5;
        }
        UtilityFunction::ces(vec![w, 1.0 - w], rho)
    }
}

/// Up to three families of up to three strictly convex members over two
/// goods with endowments in `[1, 4]`.
pub fn random_strictly_convex_economy(rng: &mut impl Rng) -> Economy {
    let families = rng.gen_range(1..=3);
    let endowment = [rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0)];
    let members = (0..families)
        .map(|_| {
            let size = rng.gen_range(1..=3);
            (0..size).map(|_| random_strictly_convex(rng)).collect()
        })
        .collect();
    economy(endowment, members)
}
