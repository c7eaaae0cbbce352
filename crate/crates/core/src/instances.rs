//! Seeded instance generators and the standard small fixtures.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::Valuation;
use crate::rational::{int, ratio, Scalar};

/// Density 10 on `[0, 1/10]`: a player who only cares about the morning.
pub fn morning() -> Valuation {
    Valuation::concentrated(int(0), ratio(1, 10)).unwrap()
}

/// Density 10 on `[9/10, 1]`.
pub fn evening() -> Valuation {
    Valuation::concentrated(ratio(9, 10), int(1)).unwrap()
}

/// A random piecewise-constant valuation with 1 to 4 segments whose
/// breakpoints sit on the `1/grid` lattice and whose raw densities are small
/// integers (some possibly zero), normalized.
pub fn random_valuation<R: Rng>(rng: &mut R, grid: u32) -> Valuation {
    assert!(grid >= 4);
    let segments = rng.gen_range(1..=4usize);
    let mut inner: Vec<u32> = vec![];
    while inner.len() + 1 < segments {
        let b = rng.gen_range(1..grid);
        if !inner.contains(&b) {
            inner.push(b);
        }
    }
    inner.sort_unstable();
    let mut breakpoints = vec![int(0)];
    breakpoints.extend(inner.iter().map(|&b| ratio(b as i64, grid as i64)));
    breakpoints.push(int(1));
    loop {
        let raw: Vec<Scalar> = (0..segments).map(|_| int(rng.gen_range(0..=4))).collect();
        if let Ok(v) = Valuation::normalized(breakpoints.clone(), raw) {
            return v;
        }
    }
}

/// `n` random valuations from a seeded generator.
pub fn random_instance(seed: u64, n: usize) -> Vec<Valuation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_valuation(&mut rng, 10)).collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn generator_is_deterministic_and_normalized() {
        let a = random_instance(7, 5);
        assert_eq!(a, random_instance(7, 5));
        assert_ne!(a, random_instance(8, 5));
        for v in &a {
            assert!(v.value(&int(0), &int(1)).unwrap().is_one());
        }
    }
}
