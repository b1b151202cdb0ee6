use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::thermal::{ProcessParameters, PARAMETER_BOUNDS};

/// Independent uniform draws of each parameter within `bounds`.
pub fn sample_parameters_within(n: usize, bounds: &[(f64, f64); 5], seed: u64) -> Vec<ProcessParameters> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: [f64; 5] = std::array::from_fn(|i| {
                let (lo, hi) = bounds[i];
                lo + (hi - lo) * rng.gen::<f64>()
            });
            ProcessParameters::from_array(v)
        })
        .collect()
}

/// Uniform draws over the standard process window.
pub fn sample_parameters(n: usize, seed: u64) -> Vec<ProcessParameters> {
    sample_parameters_within(n, &PARAMETER_BOUNDS, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_stay_in_bounds() {
        let draws = sample_parameters(500, 11);
        assert_eq!(draws.len(), 500);
        for p in &draws {
            for (v, (lo, hi)) in p.to_array().iter().zip(PARAMETER_BOUNDS) {
                assert!(*v >= lo && *v <= hi);
            }
        }
    }

    #[test]
    fn seeded() {
        assert_eq!(sample_parameters(20, 3), sample_parameters(20, 3));
        assert_ne!(sample_parameters(20, 3), sample_parameters(20, 4));
    }
}
