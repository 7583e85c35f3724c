//! Engine invariants over 1000 random cases each.

use proptest::prelude::*;

mod props;

fn checked(r: props::Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn elitism_keeps_the_best(seed in any::<u64>()) {
        checked(props::elitism(seed))?;
    }

    #[test]
    fn chromosomes_stay_normalized(seed in any::<u64>()) {
        checked(props::normalization(seed))?;
    }

    #[test]
    fn crossover_support_is_a_subset(seed in any::<u64>()) {
        checked(props::crossover_subset(seed))?;
    }

    #[test]
    fn mutation_preserves_prefixes(seed in any::<u64>()) {
        checked(props::mutation_prefix(seed))?;
    }
}
