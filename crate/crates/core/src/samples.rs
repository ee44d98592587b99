//! Built-in admissible parameter grid, plus seeded random draws for the
//! property suites.

use rand::Rng;

use crate::exactpoly::rat;
use crate::system::{CaseTag, HyperSystem};

/// `(α, β)` as `((num, den), (num, den))`.
type Params = ((i64, i64), (i64, i64));

fn grid(case: CaseTag) -> &'static [Params] {
    match case {
        CaseTag::Const => &[((-2, 1), (0, 1)), ((-8, 1), (3, 1)), ((-1, 1), (1, 2)), ((-9, 2), (-2, 1))],
        CaseTag::Linear => &[((-1, 1), (1, 1)), ((-2, 1), (3, 2)), ((-1, 2), (5, 1))],
        CaseTag::OneMinusS2 => &[((-5, 1), (1, 1)), ((-3, 1), (1, 1)), ((-4, 1), (0, 1)), ((-7, 2), (-1, 1))],
        CaseTag::S2MinusOne => &[((-8, 1), (10, 1)), ((-3, 1), (5, 1)), ((-21, 1), (22, 1)), ((-1, 2), (1, 1))],
        CaseTag::S2 => &[((-6, 1), (2, 1)), ((-10, 1), (2, 1)), ((-41, 2), (3, 1)), ((-4, 1), (2, 1))],
        CaseTag::S2PlusOne => &[((-4, 1), (2, 1)), ((-2, 1), (2, 1)), ((-22, 1), (-3, 1)), ((-11, 1), (5, 2))],
    }
}

/// Admissible systems used by the verification suites; at least three per
/// case, including ones with ν large enough to reach index 10.
pub fn default_samples(case: CaseTag) -> Vec<HyperSystem> {
    grid(case)
        .iter()
        .map(|&((an, ad), (bn, bd))| {
            HyperSystem::new(case, rat(an, ad), rat(bn, bd)).expect("built-in grid is admissible")
        })
        .collect()
}

pub fn all_default_samples() -> Vec<HyperSystem> {
    CaseTag::ALL.into_iter().flat_map(default_samples).collect()
}

/// Draws an admissible system with small-denominator rational parameters.
pub fn random_admissible<R: Rng + ?Sized>(case: CaseTag, rng: &mut R) -> HyperSystem {
    loop {
        let den = rng.random_range(1..=4i64);
        let alpha = rat(-rng.random_range(1..=40i64), den);
        let bden = rng.random_range(1..=4i64);
        let beta = rat(rng.random_range(-30..=30i64), bden);
        if let Ok(sys) = HyperSystem::new(case, alpha, beta) {
            return sys;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_is_admissible_and_large_enough() {
        for case in CaseTag::ALL {
            let samples = default_samples(case);
            assert!(samples.len() >= 3);
            if case.is_finite_family() {
                assert!(samples.iter().any(|s| s.nu().max_index().unwrap() >= 10));
            }
        }
    }

    #[test]
    fn random_draws_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in CaseTag::ALL {
            for _ in 0..20 {
                let s = random_admissible(case, &mut rng);
                assert_eq!(s.case(), case);
            }
        }
    }
}
