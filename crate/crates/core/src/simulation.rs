//! Multi-round episodes.
//!
//! Each round a violation occurs, a policy picks a response, and every
//! observer moves their perceived severity toward what the response conveyed:
//! `S_i <- S_i + lambda * (S_c - S_i)`. Silence leaves beliefs untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::model::{
    face_threat, Observer, ObserverRole, PolitenessStrategy, Scenario, Severity, SpeechAct,
    Violation,
};
use crate::selection::select_response;
use crate::utility::{total_utility, ModelVariant, UtilityBreakdown};

/// How the robot picks its response each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Utility-maximizing response.
    #[default]
    SelectBest,
    /// Bald on record, conveying the actual severity (clamped to the cap).
    AlwaysHonestBald,
    AlwaysSilent,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::SelectBest => "select_best",
            Policy::AlwaysHonestBald => "always_honest_bald",
            Policy::AlwaysSilent => "always_silent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub violation: Violation,
    pub violator_id: String,
}

/// A validated episode: every round's scenario is known to be constructible.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeScript {
    initial_scenario: Scenario,
    rounds: Vec<Round>,
    policy: Policy,
}

impl EpisodeScript {
    pub fn new(
        initial_scenario: Scenario,
        rounds: Vec<Round>,
        policy: Policy,
    ) -> Result<Self, ValidationError> {
        if rounds.is_empty() {
            return Err(ValidationError::invalid(
                "rounds",
                "an episode needs at least one round",
            ));
        }
        for (i, round) in rounds.iter().enumerate() {
            round_scenario(&initial_scenario, initial_scenario.observers(), round)
                .map_err(|e| e.within(&format!("rounds[{i}]")))?;
        }
        Ok(EpisodeScript {
            initial_scenario,
            rounds,
            policy,
        })
    }

    pub fn initial_scenario(&self) -> &Scenario {
        &self.initial_scenario
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }
}

/// The named observer becomes the violator for this round; whoever held that
/// role before is treated as a bystander.
fn round_scenario(
    template: &Scenario,
    observers: &[Observer],
    round: &Round,
) -> Result<Scenario, ValidationError> {
    if !observers.is_empty() && !observers.iter().any(|o| o.id() == round.violator_id) {
        return Err(ValidationError::invalid(
            "violator_id",
            format!("no observer with id '{}'", round.violator_id),
        ));
    }
    let audience = observers
        .iter()
        .map(|o| {
            if o.id() == round.violator_id {
                o.with_role(ObserverRole::Violator)
            } else if o.role() == ObserverRole::Violator {
                o.with_role(ObserverRole::Bystander)
            } else {
                o.clone()
            }
        })
        .collect();
    Ok(template
        .with_audience(round.violator_id.clone(), audience)?
        .with_violation(round.violation.clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub violation: Violation,
    pub violator_id: String,
    pub act: SpeechAct,
    pub face_threat: f64,
    pub breakdown: UtilityBreakdown,
    /// Beliefs after this round's update.
    pub beliefs: BTreeMap<String, Severity>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    /// Mean of `|S_i - S_a|` over observers and rounds, post-update.
    pub mean_belief_error: f64,
    pub cumulative_face_threat: f64,
    /// Sum of `|S_c - S_a|` over rounds where something was said.
    pub cumulative_honesty_gap: f64,
}

impl EpisodeSummary {
    pub fn from_rounds(rounds: &[RoundRecord]) -> Self {
        let mut error_sum = 0.0;
        let mut samples = 0usize;
        let mut cumulative_face_threat = 0.0;
        let mut cumulative_honesty_gap = 0.0;
        for record in rounds {
            let actual = record.violation.actual_severity;
            for belief in record.beliefs.values() {
                error_sum += belief.distance(actual);
                samples += 1;
            }
            cumulative_face_threat += record.face_threat;
            if !record.act.is_silence() {
                cumulative_honesty_gap += record.act.honesty_gap(actual);
            }
        }
        EpisodeSummary {
            mean_belief_error: if samples == 0 {
                0.0
            } else {
                error_sum / samples as f64
            },
            cumulative_face_threat,
            cumulative_honesty_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub rounds: Vec<RoundRecord>,
    pub summary: EpisodeSummary,
}

/// Moves each observer's belief toward the conveyed severity. An observer's
/// own `belief_rate` takes precedence over `lambda`.
///
/// # Panics
///
/// If `lambda` is outside `[0, 1]`.
pub fn update_beliefs(observers: &[Observer], act: &SpeechAct, lambda: f64) -> Vec<Observer> {
    assert!(
        (0.0..=1.0).contains(&lambda),
        "belief-update rate {lambda} outside [0, 1]"
    );
    let conveyed = match act.conveyed_severity() {
        None => return observers.to_vec(),
        Some(s) => s.value(),
    };
    observers
        .iter()
        .map(|o| {
            let rate = o.belief_rate().unwrap_or(lambda);
            let current = o.perceived_severity().value();
            o.with_perceived_severity(Severity::saturating(current + rate * (conveyed - current)))
        })
        .collect()
}

fn policy_act(policy: Policy, scenario: &Scenario, variant: ModelVariant) -> SpeechAct {
    match policy {
        Policy::AlwaysSilent => SpeechAct::Silence,
        Policy::AlwaysHonestBald => {
            let params = scenario.params();
            let cap = params.conveyance_cap[PolitenessStrategy::BaldOnRecord];
            let conveyed = Severity::saturating(scenario.actual_severity().value().min(cap));
            SpeechAct::utterance(PolitenessStrategy::BaldOnRecord, conveyed, params)
                .expect("conveyed severity clamped to cap")
        }
        Policy::SelectBest => select_response(scenario, variant).chosen,
    }
}

pub fn run_episode(script: &EpisodeScript, variant: ModelVariant) -> EpisodeTrace {
    let template = &script.initial_scenario;
    let lambda = template.params().lambda;
    let mut current = template.observers().to_vec();
    let mut records = Vec::with_capacity(script.rounds.len());

    for round in &script.rounds {
        let scenario = round_scenario(template, &current, round)
            .expect("round scenarios are validated when the script is built");
        let act = policy_act(script.policy, &scenario, variant);
        let breakdown = total_utility(&scenario, &act, variant);
        current = update_beliefs(&current, &act, lambda);
        records.push(RoundRecord {
            violation: round.violation.clone(),
            violator_id: round.violator_id.clone(),
            act,
            face_threat: face_threat(&act, scenario.params()),
            breakdown,
            beliefs: current
                .iter()
                .map(|o| (o.id().to_string(), o.perceived_severity()))
                .collect(),
        });
    }

    EpisodeTrace {
        summary: EpisodeSummary::from_rounds(&records),
        rounds: records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn sev(v: f64) -> Severity {
        Severity::new(v).unwrap()
    }

    fn observer(id: &str, role: ObserverRole, si: f64) -> Observer {
        Observer::new(id, role, sev(si), 1.0).unwrap()
    }

    fn scenario(observers: Vec<Observer>, lambda: f64) -> Scenario {
        let params = ModelParams {
            lambda,
            ..ModelParams::default()
        };
        Scenario::new(Violation::new("n", sev(0.8), false), "v", observers, params).unwrap()
    }

    fn rounds(n: usize, actual: f64) -> Vec<Round> {
        (0..n)
            .map(|_| Round {
                violation: Violation::new("n", sev(actual), false),
                violator_id: "v".into(),
            })
            .collect()
    }

    fn bald(sc: f64) -> SpeechAct {
        SpeechAct::utterance(
            PolitenessStrategy::BaldOnRecord,
            sev(sc),
            &ModelParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn update_examples() {
        let obs = vec![observer("v", ObserverRole::Violator, 0.2)];
        assert_eq!(
            update_beliefs(&obs, &bald(0.8), 1.0)[0].perceived_severity(),
            sev(0.8)
        );
        assert_eq!(
            update_beliefs(&obs, &bald(0.8), 0.0)[0].perceived_severity(),
            sev(0.2)
        );
        let half = update_beliefs(&obs, &bald(0.8), 0.5)[0]
            .perceived_severity()
            .value();
        assert!((half - 0.5).abs() < 1e-12);
        assert_eq!(update_beliefs(&obs, &SpeechAct::Silence, 0.7), obs);
    }

    #[test]
    fn per_observer_rate_overrides() {
        let stubborn = observer("v", ObserverRole::Violator, 0.2)
            .with_belief_rate(Some(0.0))
            .unwrap();
        let updated = update_beliefs(&[stubborn], &bald(0.8), 1.0);
        assert_eq!(updated[0].perceived_severity(), sev(0.2));
    }

    #[test]
    #[should_panic]
    fn rate_out_of_range_panics() {
        update_beliefs(&[], &bald(0.8), 1.5);
    }

    #[test]
    fn honest_bald_iteration() {
        let s = scenario(vec![observer("v", ObserverRole::Violator, 0.0)], 0.5);
        let script = EpisodeScript::new(s, rounds(3, 0.8), Policy::AlwaysHonestBald).unwrap();
        let trace = run_episode(&script, ModelVariant::Base);
        let beliefs: Vec<f64> = trace
            .rounds
            .iter()
            .map(|r| r.beliefs["v"].value())
            .collect();
        for (got, want) in beliefs.iter().zip([0.4, 0.6, 0.7]) {
            assert!((got - want).abs() < 1e-12, "{beliefs:?}");
        }
        assert!(trace.summary.cumulative_honesty_gap.abs() < 1e-12);
    }

    #[test]
    fn silent_policy_changes_nothing() {
        let obs = vec![
            observer("v", ObserverRole::Violator, 0.1),
            observer("b", ObserverRole::Bystander, 0.3),
        ];
        let s = scenario(obs, 0.5);
        let script = EpisodeScript::new(s, rounds(4, 0.8), Policy::AlwaysSilent).unwrap();
        let trace = run_episode(&script, ModelVariant::Base);
        let last = &trace.rounds.last().unwrap().beliefs;
        assert_eq!(last["v"], sev(0.1));
        assert_eq!(last["b"], sev(0.3));
        assert_eq!(trace.summary.cumulative_face_threat, 0.0);
        assert_eq!(trace.summary.cumulative_honesty_gap, 0.0);
    }

    #[test]
    fn single_select_best_round_matches_selection() {
        let obs = vec![
            observer("v", ObserverRole::Violator, 0.1),
            observer("b", ObserverRole::Bystander, 0.1),
        ];
        let s = scenario(obs, 0.5);
        let expected = select_response(&s, ModelVariant::Base);
        let script = EpisodeScript::new(s, rounds(1, 0.8), Policy::SelectBest).unwrap();
        let trace = run_episode(&script, ModelVariant::Base);
        assert_eq!(trace.rounds[0].act, expected.chosen);
        assert_eq!(trace.rounds[0].breakdown, expected.breakdown);
    }

    #[test]
    fn violator_can_change_between_rounds() {
        let obs = vec![
            observer("v", ObserverRole::Violator, 0.1),
            observer("b", ObserverRole::Bystander, 0.1),
        ];
        let s = scenario(obs, 0.5);
        let mut plan = rounds(2, 0.8);
        plan[1].violator_id = "b".into();
        let script = EpisodeScript::new(s, plan, Policy::SelectBest).unwrap();
        let trace = run_episode(&script, ModelVariant::Base);
        assert_eq!(trace.rounds[1].violator_id, "b");
    }

    #[test]
    fn invalid_scripts_rejected() {
        let s = scenario(vec![observer("v", ObserverRole::Violator, 0.1)], 0.5);
        let err = EpisodeScript::new(s.clone(), vec![], Policy::SelectBest).unwrap_err();
        assert_eq!(err.path(), "rounds");
        let mut plan = rounds(2, 0.5);
        plan[1].violator_id = "ghost".into();
        let err = EpisodeScript::new(s, plan, Policy::SelectBest).unwrap_err();
        assert_eq!(err.path(), "rounds[1].violator_id");
    }

    #[test]
    fn summary_is_recomputable() {
        let obs = vec![
            observer("v", ObserverRole::Violator, 0.0),
            observer("b", ObserverRole::Bystander, 0.6),
        ];
        let s = scenario(obs, 0.3);
        let script = EpisodeScript::new(s, rounds(5, 0.9), Policy::SelectBest).unwrap();
        let trace = run_episode(&script, ModelVariant::Base);
        let mut err = 0.0;
        let mut threat = 0.0;
        for r in &trace.rounds {
            err += r
                .beliefs
                .values()
                .map(|b| (b.value() - 0.9).abs())
                .sum::<f64>();
            threat += r.face_threat;
        }
        assert!((trace.summary.mean_belief_error - err / 10.0).abs() < 1e-12);
        assert!((trace.summary.cumulative_face_threat - threat).abs() < 1e-12);
    }
}
