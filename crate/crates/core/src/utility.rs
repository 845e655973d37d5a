//! Moral, social and total utility of a speech act.
//!
//! The base model scores an act as moral benefit plus social utility:
//!
//! ```text
//! moral  = sum_i (|S_a - S_i| - |S_a - S_c|) - beta * |S_a - S_c|
//! social = -sum_i I_i * F
//! ```
//!
//! The extended model keeps the same skeleton and adds per-role weights on
//! the correction term, a harm-mitigation credit per victim, a capped shame
//! bonus when harm has been done, spillover threat to observers unaware of
//! the norm, sublinear audience scaling and a penalty for speaking over
//! victims who would rather speak for themselves:
//!
//! ```text
//! moral  = sum_i w(role_i) * [(|S_a - S_i| - |S_a - S_c|) - beta * |S_a - S_c|]
//!        + sum_victims w_harm * min(S_c, S_a)
//!        + gamma * min(F, face_cap)                    (harm done only)
//! social = -F * L^alpha - rho * F * #self_advocating_victims
//! L      = sum_i I_i + kappa * #unaware_observers
//! ```
//!
//! Silence scores exactly zero in both variants. Sums always run in
//! observer-id order so the result does not depend on list order.

use serde::{Deserialize, Serialize};

use crate::model::{face_threat, ObserverRole, Scenario, SpeechAct};

/// Which utility equations to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    /// Plain moral + social model; only `beta` (and the face-threat tables)
    /// are read from the parameters.
    #[default]
    Base,
    /// Honors every parameter.
    Extended,
}

impl std::str::FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(ModelVariant::Base),
            "extended" => Ok(ModelVariant::Extended),
            other => Err(format!(
                "unknown variant '{other}' (expected base or extended)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverContribution {
    pub observer_id: String,
    pub moral_contribution: f64,
    /// Audience-load share of the social utility, before any discount.
    pub social_contribution: f64,
    /// Penalty for speaking over a self-advocating victim (extended only).
    pub self_advocacy_penalty: f64,
}

/// Utility of one act with per-observer detail.
///
/// For the base variant `moral` and `social` are the plain sums of the
/// per-observer entries. For the extended variant:
///
/// ```text
/// moral  = sum(moral_contribution) + shame_bonus
/// social = discount_factor * sum(social_contribution) + sum(self_advocacy_penalty)
/// ```
///
/// up to floating-point reassociation.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityBreakdown {
    pub moral: f64,
    pub social: f64,
    /// Always `moral + social`.
    pub total: f64,
    pub face_threat: f64,
    /// Sorted by observer id.
    pub per_observer: Vec<ObserverContribution>,
    /// `L^alpha / L`; 1 for the base variant or an empty audience.
    pub discount_factor: f64,
    pub shame_bonus: f64,
}

pub fn moral_utility(scenario: &Scenario, act: &SpeechAct, variant: ModelVariant) -> f64 {
    evaluate(scenario, act, variant).moral
}

pub fn social_utility(scenario: &Scenario, act: &SpeechAct, variant: ModelVariant) -> f64 {
    evaluate(scenario, act, variant).social
}

pub fn total_utility(
    scenario: &Scenario,
    act: &SpeechAct,
    variant: ModelVariant,
) -> UtilityBreakdown {
    evaluate(scenario, act, variant)
}

fn evaluate(scenario: &Scenario, act: &SpeechAct, variant: ModelVariant) -> UtilityBreakdown {
    let conveyed = match act {
        SpeechAct::Silence => return silent_breakdown(scenario),
        SpeechAct::Utterance(u) => u.conveyed_severity(),
    };
    let params = scenario.params();
    let actual = scenario.actual_severity();
    let threat = face_threat(act, params);
    let gap = actual.distance(conveyed);
    let dishonesty = params.beta * gap;
    let extended = variant == ModelVariant::Extended;

    let mut per_observer = Vec::with_capacity(scenario.observers().len());
    let mut moral = 0.0;
    let mut load = 0.0;
    let mut victims_speaking_for_themselves = 0usize;

    for observer in scenario.observers_by_id() {
        let correction = (actual.distance(observer.perceived_severity()) - gap) - dishonesty;
        let (moral_i, load_i, advocacy_i) = if extended {
            let mut m = params.role_weights[observer.role()] * correction;
            if observer.role() == ObserverRole::Victim {
                m += params.w_harm * conveyed.value().min(actual.value());
            }
            let unaware = if observer.aware_of_norm() {
                0.0
            } else {
                params.kappa
            };
            let a = if observer.prefers_self_advocacy() {
                victims_speaking_for_themselves += 1;
                -(params.rho * threat)
            } else {
                0.0
            };
            (m, observer.importance() + unaware, a)
        } else {
            (correction, observer.importance(), 0.0)
        };
        moral += moral_i;
        load += load_i;
        per_observer.push(ObserverContribution {
            observer_id: observer.id().to_string(),
            moral_contribution: moral_i,
            social_contribution: -(load_i * threat),
            self_advocacy_penalty: advocacy_i,
        });
    }

    let (social, discount_factor, shame_bonus) = if extended {
        let discounted = load.powf(params.alpha);
        let factor = if load > 0.0 { discounted / load } else { 1.0 };
        let social =
            -(threat * discounted) - params.rho * threat * victims_speaking_for_themselves as f64;
        let shame = if scenario.violation().harm_done && scenario.has_violator() {
            params.gamma * threat.min(params.face_cap)
        } else {
            0.0
        };
        (social, factor, shame)
    } else {
        let social = per_observer
            .iter()
            .fold(0.0, |acc, c| acc + c.social_contribution);
        (social, 1.0, 0.0)
    };

    let moral = moral + shame_bonus;
    UtilityBreakdown {
        moral,
        social,
        total: moral + social,
        face_threat: threat,
        per_observer,
        discount_factor,
        shame_bonus,
    }
}

fn silent_breakdown(scenario: &Scenario) -> UtilityBreakdown {
    UtilityBreakdown {
        moral: 0.0,
        social: 0.0,
        total: 0.0,
        face_threat: 0.0,
        per_observer: scenario
            .observers_by_id()
            .map(|o| ObserverContribution {
                observer_id: o.id().to_string(),
                moral_contribution: 0.0,
                social_contribution: 0.0,
                self_advocacy_penalty: 0.0,
            })
            .collect(),
        discount_factor: 1.0,
        shame_bonus: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ModelParams, Observer, PolitenessStrategy, RoleWeights, Severity, Violation,
    };

    fn sev(v: f64) -> Severity {
        Severity::new(v).unwrap()
    }

    /// Violator first, then bystanders; `(S_i, I)` pairs.
    fn scenario(actual: f64, audience: &[(f64, f64)], params: ModelParams) -> Scenario {
        let observers = audience
            .iter()
            .enumerate()
            .map(|(i, &(si, imp))| {
                let role = if i == 0 {
                    ObserverRole::Violator
                } else {
                    ObserverRole::Bystander
                };
                Observer::new(format!("o{i}"), role, sev(si), imp).unwrap()
            })
            .collect();
        Scenario::new(
            Violation::new("n", sev(actual), false),
            "o0",
            observers,
            params,
        )
        .unwrap()
    }

    fn utter(s: &Scenario, strategy: PolitenessStrategy, sc: f64) -> SpeechAct {
        SpeechAct::utterance(strategy, sev(sc), s.params()).unwrap()
    }

    #[test]
    fn silence_is_zero() {
        let s = scenario(0.8, &[(0.2, 1.0), (0.1, 0.4)], ModelParams::default());
        for variant in [ModelVariant::Base, ModelVariant::Extended] {
            let b = total_utility(&s, &SpeechAct::Silence, variant);
            assert_eq!((b.moral, b.social, b.total), (0.0, 0.0, 0.0));
            assert_eq!(b.per_observer.len(), 2);
        }
    }

    #[test]
    fn base_moral_examples() {
        let s = scenario(0.8, &[(0.2, 1.0)], ModelParams::default());
        let act = utter(&s, PolitenessStrategy::BaldOnRecord, 0.8);
        assert!((moral_utility(&s, &act, ModelVariant::Base) - 0.6).abs() < 1e-12);

        let params = ModelParams {
            beta: 0.5,
            ..ModelParams::default()
        };
        let s = scenario(0.8, &[(0.2, 1.0)], params);
        let act = utter(&s, PolitenessStrategy::PositivePoliteness, 0.6);
        // (0.6 - 0.2) - 0.5 * 0.2
        assert!((moral_utility(&s, &act, ModelVariant::Base) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn no_misconception_no_moral_value() {
        let s = scenario(0.7, &[(0.7, 1.0), (0.7, 0.3)], ModelParams::default());
        let act = utter(&s, PolitenessStrategy::BaldOnRecord, 0.7);
        assert_eq!(moral_utility(&s, &act, ModelVariant::Base), 0.0);
    }

    #[test]
    fn extended_role_weights() {
        let params = ModelParams {
            role_weights: RoleWeights::default().with(ObserverRole::Violator, 2.0),
            ..ModelParams::default()
        };
        let s = scenario(0.8, &[(0.0, 1.0), (0.4, 1.0)], params);
        let act = utter(&s, PolitenessStrategy::BaldOnRecord, 0.8);
        // 2 * 0.8 + 1 * 0.4
        assert!((moral_utility(&s, &act, ModelVariant::Extended) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn base_social_examples() {
        let s = scenario(0.5, &[(0.0, 1.0)], ModelParams::default());
        let act = utter(&s, PolitenessStrategy::OffRecord, 0.1)
            .with_face_threat(0.4)
            .unwrap();
        assert!((social_utility(&s, &act, ModelVariant::Base) + 0.4).abs() < 1e-12);

        let s = scenario(0.5, &[(0.0, 0.5), (0.0, 0.5)], ModelParams::default());
        let act = utter(&s, PolitenessStrategy::OffRecord, 0.1)
            .with_face_threat(0.6)
            .unwrap();
        assert!((social_utility(&s, &act, ModelVariant::Base) + 0.6).abs() < 1e-12);
    }

    #[test]
    fn extended_discounted_social() {
        let params = ModelParams {
            alpha: 0.5,
            ..ModelParams::default()
        };
        let s = scenario(0.5, &[(0.0, 1.0); 4], params);
        let act = utter(&s, PolitenessStrategy::OffRecord, 0.1)
            .with_face_threat(0.5)
            .unwrap();
        let b = total_utility(&s, &act, ModelVariant::Extended);
        assert!((b.social + 1.0).abs() < 1e-12);
        assert!((b.discount_factor - 0.5).abs() < 1e-12);
        // Per-observer contributions are pre-discount.
        let raw: f64 = b.per_observer.iter().map(|c| c.social_contribution).sum();
        assert!((raw * b.discount_factor - b.social).abs() < 1e-12);
    }

    #[test]
    fn zero_importance_observer_changes_nothing_socially() {
        let s1 = scenario(0.6, &[(0.1, 0.7)], ModelParams::default());
        let s2 = scenario(0.6, &[(0.1, 0.7), (0.3, 0.0)], ModelParams::default());
        let a1 = utter(&s1, PolitenessStrategy::PositivePoliteness, 0.6);
        let a2 = utter(&s2, PolitenessStrategy::PositivePoliteness, 0.6);
        assert_eq!(
            social_utility(&s1, &a1, ModelVariant::Base),
            social_utility(&s2, &a2, ModelVariant::Base)
        );
    }

    #[test]
    fn total_composes_face_threat_and_sums() {
        let s = scenario(0.9, &[(0.1, 0.2)], ModelParams::default());
        let act = utter(&s, PolitenessStrategy::BaldOnRecord, 0.9);
        let b = total_utility(&s, &act, ModelVariant::Base);
        assert!((b.moral - 0.8).abs() < 1e-12);
        assert!((b.social + 0.19).abs() < 1e-12);
        assert!((b.total - 0.61).abs() < 1e-12);
        assert_eq!(b.total, b.moral + b.social);
    }

    #[test]
    fn victim_terms() {
        let params = ModelParams {
            w_harm: 0.5,
            rho: 0.25,
            ..ModelParams::default()
        };
        let violator = Observer::new("v", ObserverRole::Violator, sev(0.2), 0.0).unwrap();
        let victim = Observer::new("w", ObserverRole::Victim, sev(0.6), 1.0)
            .unwrap()
            .with_self_advocacy(true)
            .unwrap();
        let s = Scenario::new(
            Violation::new("n", sev(0.6), true),
            "v",
            vec![violator, victim],
            params,
        )
        .unwrap();
        let act = utter(&s, PolitenessStrategy::BaldOnRecord, 0.9);
        let f = 1.0 * (0.5 + 0.5 * 0.9);
        let b = total_utility(&s, &act, ModelVariant::Extended);
        // violator: 0.4 - 0.3; victim: 0.0 - 0.3 + 0.5 * min(0.9, 0.6)
        let expected_moral = (0.4 - 0.3) + (0.0 - 0.3 + 0.5 * 0.6);
        assert!((b.moral - expected_moral).abs() < 1e-12);
        let expected_social = -f * 1.0 - 0.25 * f;
        assert!((b.social - expected_social).abs() < 1e-12);
        let victim_row = &b.per_observer[1];
        assert_eq!(victim_row.observer_id, "w");
        assert!((victim_row.self_advocacy_penalty + 0.25 * f).abs() < 1e-12);
    }

    #[test]
    fn spillover_to_unaware_observers() {
        let params = ModelParams {
            kappa: 0.3,
            ..ModelParams::default()
        };
        let violator = Observer::new("v", ObserverRole::Violator, sev(0.2), 0.5).unwrap();
        let newcomer = Observer::new("n", ObserverRole::CoViolator, sev(0.0), 0.0)
            .unwrap()
            .with_aware_of_norm(false);
        let s = Scenario::new(
            Violation::new("n", sev(0.6), false),
            "v",
            vec![violator, newcomer],
            params,
        )
        .unwrap();
        let act = utter(&s, PolitenessStrategy::OffRecord, 0.3)
            .with_face_threat(1.0)
            .unwrap();
        assert!((social_utility(&s, &act, ModelVariant::Extended) + 0.8).abs() < 1e-12);
        // Base ignores the spillover.
        assert!((social_utility(&s, &act, ModelVariant::Base) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn shame_bonus_needs_harm_and_is_capped() {
        let params = ModelParams {
            gamma: 0.1,
            face_cap: 0.5,
            ..ModelParams::default()
        };
        let violator = Observer::new("v", ObserverRole::Violator, sev(0.5), 1.0).unwrap();
        let harmed = Scenario::new(
            Violation::new("n", sev(0.5), true),
            "v",
            vec![violator.clone()],
            params.clone(),
        )
        .unwrap();
        let unharmed = harmed.with_violation(Violation::new("n", sev(0.5), false));
        let act = utter(&harmed, PolitenessStrategy::BaldOnRecord, 0.5)
            .with_face_threat(2.0)
            .unwrap();
        let b = total_utility(&harmed, &act, ModelVariant::Extended);
        assert!((b.shame_bonus - 0.05).abs() < 1e-12);
        assert_eq!(
            total_utility(&unharmed, &act, ModelVariant::Extended).shame_bonus,
            0.0
        );
        assert_eq!(
            total_utility(&harmed, &act, ModelVariant::Base).shame_bonus,
            0.0
        );

        // No audience, no violator to shame: every act scores zero.
        let empty = harmed.with_observers(vec![]).unwrap();
        assert_eq!(
            total_utility(&empty, &act, ModelVariant::Extended).total,
            0.0
        );
    }
}
