//! A uniform handle over both rule families, used by callers that don't
//! care whether outcomes come from subset scoring or sequential branching.

use crate::model::{ElectionInstance, Outcome};
use crate::scoring::{elect_scoring, ScoringFunction, DEFAULT_SUBSET_CAP};
use crate::sequential::{enumerate_outcomes, EngineConfig, EngineError, SequentialRule};

/// Settings shared by every entry point that runs a rule to completion.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineConfig,
    /// Cap on the number of k-subsets a scoring rule may enumerate.
    pub subset_cap: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: EngineConfig::default(),
            subset_cap: DEFAULT_SUBSET_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ElectionRule {
    Scoring(ScoringFunction),
    Sequential(SequentialRule),
}

impl ElectionRule {
    pub fn name(&self) -> String {
        match self {
            ElectionRule::Scoring(s) => s.name().to_string(),
            ElectionRule::Sequential(s) => s.name(),
        }
    }

    /// Full set-valued outcome of the rule on `instance`.
    pub fn outcomes(
        &self,
        instance: &ElectionInstance,
        config: &RunConfig,
    ) -> Result<Outcome, EngineError> {
        match self {
            ElectionRule::Scoring(s) => Ok(elect_scoring(instance, s, config.subset_cap)?),
            ElectionRule::Sequential(s) => {
                let run = enumerate_outcomes(s, instance, &config.engine)?;
                Ok(run.outcome()?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Profile;

    #[test]
    fn both_families_run_through_the_same_entry() {
        let p = Profile::from_raw(
            3,
            vec![(vec![0, 1], 1), (vec![1, 2], 1), (vec![0], 1), (vec![2], 1)],
        )
        .unwrap();
        let instance = ElectionInstance::new(p, 2).unwrap();
        let config = RunConfig::default();
        let scoring = ElectionRule::Scoring(ScoringFunction::pav(2));
        let outcome = scoring.outcomes(&instance, &config).unwrap();
        assert_eq!(outcome.len(), 1);
        let sequential = ElectionRule::Sequential(SequentialRule::seq_pav(2));
        let outcome = sequential.outcomes(&instance, &config).unwrap();
        assert_eq!(outcome.len(), 3);
    }
}
