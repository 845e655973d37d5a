//! Domain types: severities, observers, politeness strategies, speech acts,
//! scenarios and model parameters, plus the face-threat and importance
//! helpers the utility model is built on.
//!
//! Every type validates on construction and is immutable afterwards. A
//! `Scenario` that exists is a valid scenario.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_closed, check_non_negative, ValidationError};

// ---------------------------------------------------------------------------
// Severity
// ---------------------------------------------------------------------------

/// Norm-violation severity on the closed unit interval.
///
/// Used for the actual severity of a violation, the severity a response
/// conveys, and the severity each observer currently perceives.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Severity(f64);

impl Severity {
    pub const ZERO: Severity = Severity(0.0);
    pub const ONE: Severity = Severity(1.0);

    pub fn new(value: f64) -> Result<Self, ValidationError> {
        check_closed("", value, 0.0, 1.0, "[0, 1]").map(Severity)
    }

    /// Clamps into `[0, 1]`. NaN maps to zero.
    pub(crate) fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Severity(0.0)
        } else {
            Severity(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Absolute distance `|self - other|`.
    pub fn distance(self, other: Severity) -> f64 {
        (self.0 - other.0).abs()
    }
}

impl TryFrom<f64> for Severity {
    type Error = ValidationError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Severity::new(value)
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

// ---------------------------------------------------------------------------
// Roles and strategies
// ---------------------------------------------------------------------------

/// How an observer relates to the violation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverRole {
    Bystander,
    Violator,
    Victim,
    /// Someone who facilitated or committed the same violation.
    CoViolator,
}

impl ObserverRole {
    pub const ALL: [ObserverRole; 4] = [
        ObserverRole::Bystander,
        ObserverRole::Violator,
        ObserverRole::Victim,
        ObserverRole::CoViolator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObserverRole::Bystander => "bystander",
            ObserverRole::Violator => "violator",
            ObserverRole::Victim => "victim",
            ObserverRole::CoViolator => "co_violator",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ObserverRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Redress class of a face-threatening act, ordered from least to most
/// threatening. The derived `Ord` is the harshness order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolitenessStrategy {
    OffRecord,
    NegativePoliteness,
    PositivePoliteness,
    BaldOnRecord,
}

impl PolitenessStrategy {
    /// All strategies in harshness order.
    pub const ALL: [PolitenessStrategy; 4] = [
        PolitenessStrategy::OffRecord,
        PolitenessStrategy::NegativePoliteness,
        PolitenessStrategy::PositivePoliteness,
        PolitenessStrategy::BaldOnRecord,
    ];

    /// Harshness rank, 0 (off record) through 3 (bald on record).
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            PolitenessStrategy::OffRecord => "off_record",
            PolitenessStrategy::NegativePoliteness => "negative_politeness",
            PolitenessStrategy::PositivePoliteness => "positive_politeness",
            PolitenessStrategy::BaldOnRecord => "bald_on_record",
        }
    }
}

impl fmt::Display for PolitenessStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolitenessStrategy {
    type Err = ValidationError;

    /// Accepts the canonical snake_case names and the short forms
    /// `off`, `negative`, `positive`, `bald`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "off" | "off_record" => Ok(PolitenessStrategy::OffRecord),
            "negative" | "negative_politeness" => Ok(PolitenessStrategy::NegativePoliteness),
            "positive" | "positive_politeness" => Ok(PolitenessStrategy::PositivePoliteness),
            "bald" | "bald_on_record" => Ok(PolitenessStrategy::BaldOnRecord),
            other => Err(ValidationError::invalid(
                "strategy",
                format!(
                    "unknown strategy '{other}' (expected off_record, negative_politeness, \
                     positive_politeness or bald_on_record)"
                ),
            )),
        }
    }
}

/// One value per politeness strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyTable([f64; 4]);

impl StrategyTable {
    pub fn new(off_record: f64, negative: f64, positive: f64, bald: f64) -> Self {
        StrategyTable([off_record, negative, positive, bald])
    }

    pub fn with(mut self, strategy: PolitenessStrategy, value: f64) -> Self {
        self.0[strategy.rank() as usize] = value;
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (PolitenessStrategy, f64)> + '_ {
        PolitenessStrategy::ALL.into_iter().zip(self.0)
    }

    fn validate(&self, path: &str, hi: f64, range: &'static str) -> Result<(), ValidationError> {
        for (strategy, value) in self.iter() {
            check_closed(strategy.name(), value, 0.0, hi, range).map_err(|e| e.within(path))?;
        }
        for pair in self.0.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ValidationError::invalid(
                    path,
                    "values must be strictly increasing from off_record to bald_on_record",
                ));
            }
        }
        Ok(())
    }
}

impl Index<PolitenessStrategy> for StrategyTable {
    type Output = f64;

    fn index(&self, strategy: PolitenessStrategy) -> &f64 {
        &self.0[strategy.rank() as usize]
    }
}

/// Per-role weight on the correction benefit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoleWeights([f64; 4]);

impl RoleWeights {
    pub fn uniform(weight: f64) -> Self {
        RoleWeights([weight; 4])
    }

    pub fn with(mut self, role: ObserverRole, weight: f64) -> Self {
        self.0[role.index()] = weight;
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObserverRole, f64)> + '_ {
        ObserverRole::ALL.into_iter().zip(self.0)
    }
}

impl Default for RoleWeights {
    fn default() -> Self {
        RoleWeights::uniform(1.0)
    }
}

impl Index<ObserverRole> for RoleWeights {
    type Output = f64;

    fn index(&self, role: ObserverRole) -> &f64 {
        &self.0[role.index()]
    }
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// All model coefficients.
///
/// The defaults reproduce the plain moral-plus-social model: no dishonesty
/// penalty, linear audience scaling, no shame bonus, no spillover, no victim
/// terms and uniform role weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Dishonesty penalty weight.
    pub beta: f64,
    /// Audience discount exponent, in (0, 1].
    pub alpha: f64,
    /// Weight of the capped shame bonus.
    pub gamma: f64,
    /// Face threat beyond which the shame bonus stops growing.
    pub face_cap: f64,
    /// Fraction of the strategy's base threat imposed at zero conveyed severity.
    pub theta: f64,
    /// Face-threat spillover per observer unaware of the norm.
    pub kappa: f64,
    /// Penalty per self-advocating victim, proportional to face threat.
    pub rho: f64,
    /// Per-victim harm-mitigation weight.
    pub w_harm: f64,
    pub role_weights: RoleWeights,
    pub strategy_base_threat: StrategyTable,
    /// Highest severity each strategy can convey.
    pub conveyance_cap: StrategyTable,
    /// Resolution of the candidate conveyed-severity grid.
    pub grid_step: f64,
    /// Belief-update rate toward the conveyed severity.
    pub lambda: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            beta: 0.0,
            alpha: 1.0,
            gamma: 0.0,
            face_cap: 0.5,
            theta: 0.5,
            kappa: 0.0,
            rho: 0.0,
            w_harm: 0.0,
            role_weights: RoleWeights::default(),
            strategy_base_threat: StrategyTable::new(0.2, 0.45, 0.7, 1.0),
            conveyance_cap: StrategyTable::new(0.3, 0.55, 0.8, 1.0),
            grid_step: 0.05,
            lambda: 0.5,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        check_non_negative("beta", self.beta)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ValidationError::out_of_range("alpha", self.alpha, "(0, 1]"));
        }
        check_non_negative("gamma", self.gamma)?;
        check_non_negative("face_cap", self.face_cap)?;
        check_closed("theta", self.theta, 0.0, 1.0, "[0, 1]")?;
        check_non_negative("kappa", self.kappa)?;
        check_non_negative("rho", self.rho)?;
        check_non_negative("w_harm", self.w_harm)?;
        for (role, weight) in self.role_weights.iter() {
            check_non_negative(role.name(), weight).map_err(|e| e.within("role_weights"))?;
        }
        self.strategy_base_threat
            .validate("strategy_base_threat", 1.0, "[0, 1]")?;
        self.conveyance_cap
            .validate("conveyance_cap", 1.0, "[0, 1]")?;
        if !(self.grid_step > 0.0 && self.grid_step <= 1.0) {
            return Err(ValidationError::out_of_range(
                "grid_step",
                self.grid_step,
                "(0, 1]",
            ));
        }
        check_closed("lambda", self.lambda, 0.0, 1.0, "[0, 1]")?;
        Ok(())
    }

    /// True when every coefficient the extended model adds is at its neutral
    /// value, so both variants agree.
    pub fn is_neutral_extension(&self) -> bool {
        self.alpha == 1.0
            && self.gamma == 0.0
            && self.kappa == 0.0
            && self.rho == 0.0
            && self.w_harm == 0.0
            && self.role_weights == RoleWeights::default()
    }
}

// ---------------------------------------------------------------------------
// Observers
// ---------------------------------------------------------------------------

/// An audience member, including the violator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observer {
    id: String,
    role: ObserverRole,
    perceived_severity: Severity,
    importance: f64,
    aware_of_norm: bool,
    prefers_self_advocacy: bool,
    belief_rate: Option<f64>,
}

impl Observer {
    /// A norm-aware observer with no self-advocacy preference.
    pub fn new(
        id: impl Into<String>,
        role: ObserverRole,
        perceived_severity: Severity,
        importance: f64,
    ) -> Result<Self, ValidationError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ValidationError::invalid(
                "id",
                "observer id must be non-empty",
            ));
        }
        check_closed("importance", importance, 0.0, 1.0, "[0, 1]")?;
        Ok(Observer {
            id,
            role,
            perceived_severity,
            importance,
            aware_of_norm: true,
            prefers_self_advocacy: false,
            belief_rate: None,
        })
    }

    pub fn with_aware_of_norm(mut self, aware: bool) -> Self {
        self.aware_of_norm = aware;
        self
    }

    /// Only victims may prefer to speak for themselves.
    pub fn with_self_advocacy(mut self, prefers: bool) -> Result<Self, ValidationError> {
        if prefers && self.role != ObserverRole::Victim {
            return Err(ValidationError::invalid(
                "prefers_self_advocacy",
                format!(
                    "only victims may prefer self-advocacy (role is {})",
                    self.role
                ),
            ));
        }
        self.prefers_self_advocacy = prefers;
        Ok(self)
    }

    /// Per-observer override of the belief-update rate.
    pub fn with_belief_rate(mut self, rate: Option<f64>) -> Result<Self, ValidationError> {
        if let Some(rate) = rate {
            check_closed("belief_rate", rate, 0.0, 1.0, "[0, 1]")?;
        }
        self.belief_rate = rate;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn role(&self) -> ObserverRole {
        self.role
    }

    pub fn perceived_severity(&self) -> Severity {
        self.perceived_severity
    }

    pub fn importance(&self) -> f64 {
        self.importance
    }

    pub fn aware_of_norm(&self) -> bool {
        self.aware_of_norm
    }

    pub fn prefers_self_advocacy(&self) -> bool {
        self.prefers_self_advocacy
    }

    pub fn belief_rate(&self) -> Option<f64> {
        self.belief_rate
    }

    pub(crate) fn with_perceived_severity(&self, severity: Severity) -> Self {
        Observer {
            perceived_severity: severity,
            ..self.clone()
        }
    }

    pub(crate) fn renamed(&self, id: String) -> Self {
        Observer { id, ..self.clone() }
    }

    /// Reassigns the role, dropping the self-advocacy flag when the observer
    /// stops being a victim.
    pub(crate) fn with_role(&self, role: ObserverRole) -> Self {
        Observer {
            role,
            prefers_self_advocacy: self.prefers_self_advocacy && role == ObserverRole::Victim,
            ..self.clone()
        }
    }
}

/// Importance of keeping face in front of an observer, from relative rank:
/// `clamp(0.5 + 0.5 * (observer_rank - violator_rank), 0, 1)`.
pub fn derive_importance(violator_rank: f64, observer_rank: f64) -> Result<f64, ValidationError> {
    check_closed("violator_rank", violator_rank, 0.0, 1.0, "[0, 1]")?;
    check_closed("observer_rank", observer_rank, 0.0, 1.0, "[0, 1]")?;
    Ok((0.5 + 0.5 * (observer_rank - violator_rank)).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Speech acts
// ---------------------------------------------------------------------------

/// A response utterance: what severity it conveys and how it is phrased.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Utterance {
    conveyed_severity: Severity,
    strategy: PolitenessStrategy,
    explicit_face_threat: Option<f64>,
}

impl Utterance {
    pub fn conveyed_severity(&self) -> Severity {
        self.conveyed_severity
    }

    pub fn strategy(&self) -> PolitenessStrategy {
        self.strategy
    }

    pub fn explicit_face_threat(&self) -> Option<f64> {
        self.explicit_face_threat
    }
}

/// A candidate response to a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeechAct {
    /// Say nothing. Conveys no severity and imposes no face threat.
    Silence,
    Utterance(Utterance),
}

impl SpeechAct {
    /// An utterance whose conveyed severity must not exceed the strategy's
    /// conveyance cap under `params`.
    pub fn utterance(
        strategy: PolitenessStrategy,
        conveyed_severity: Severity,
        params: &ModelParams,
    ) -> Result<Self, ValidationError> {
        let cap = params.conveyance_cap[strategy];
        if conveyed_severity.value() > cap {
            return Err(ValidationError::invalid(
                "conveyed_severity",
                format!(
                    "{} cannot convey severity {} (cap {})",
                    strategy,
                    conveyed_severity.value(),
                    cap
                ),
            ));
        }
        Ok(SpeechAct::Utterance(Utterance {
            conveyed_severity,
            strategy,
            explicit_face_threat: None,
        }))
    }

    /// Overrides the derived face threat. Not applicable to silence.
    pub fn with_face_threat(self, face_threat: f64) -> Result<Self, ValidationError> {
        match self {
            SpeechAct::Silence => Err(ValidationError::invalid(
                "explicit_face_threat",
                "silence cannot carry a face threat",
            )),
            SpeechAct::Utterance(u) => {
                check_non_negative("explicit_face_threat", face_threat)?;
                Ok(SpeechAct::Utterance(Utterance {
                    explicit_face_threat: Some(face_threat),
                    ..u
                }))
            }
        }
    }

    pub fn is_silence(&self) -> bool {
        matches!(self, SpeechAct::Silence)
    }

    pub fn strategy(&self) -> Option<PolitenessStrategy> {
        match self {
            SpeechAct::Silence => None,
            SpeechAct::Utterance(u) => Some(u.strategy),
        }
    }

    pub fn conveyed_severity(&self) -> Option<Severity> {
        match self {
            SpeechAct::Silence => None,
            SpeechAct::Utterance(u) => Some(u.conveyed_severity),
        }
    }

    /// `|S_c - S_a|`, treating silence as conveying zero.
    pub fn honesty_gap(&self, actual: Severity) -> f64 {
        self.conveyed_severity()
            .unwrap_or(Severity::ZERO)
            .distance(actual)
    }
}

impl fmt::Display for SpeechAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeechAct::Silence => f.write_str("silence"),
            SpeechAct::Utterance(u) => write!(f, "{}:{}", u.strategy, u.conveyed_severity),
        }
    }
}

/// Face threat a speech act imposes on the violator.
///
/// `base_threat(strategy) * (theta + (1 - theta) * S_c)`, zero for silence,
/// or the explicit override when one is set.
pub fn face_threat(act: &SpeechAct, params: &ModelParams) -> f64 {
    match act {
        SpeechAct::Silence => 0.0,
        SpeechAct::Utterance(u) => match u.explicit_face_threat {
            Some(threat) => threat,
            None => {
                let base = params.strategy_base_threat[u.strategy];
                base * (params.theta + (1.0 - params.theta) * u.conveyed_severity.value())
            }
        },
    }
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub norm_id: String,
    pub actual_severity: Severity,
    /// Whether the violator has already caused harm.
    pub harm_done: bool,
}

impl Violation {
    pub fn new(norm_id: impl Into<String>, actual_severity: Severity, harm_done: bool) -> Self {
        Violation {
            norm_id: norm_id.into(),
            actual_severity,
            harm_done,
        }
    }
}

/// A violation, its audience (the violator included) and model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    violation: Violation,
    violator_id: String,
    observers: Vec<Observer>,
    params: ModelParams,
    /// Observer indices sorted by id; every sum iterates in this order.
    sum_order: Vec<usize>,
}

impl Scenario {
    pub fn new(
        violation: Violation,
        violator_id: impl Into<String>,
        observers: Vec<Observer>,
        params: ModelParams,
    ) -> Result<Self, ValidationError> {
        let violator_id = violator_id.into();
        params.validate().map_err(|e| e.within("params"))?;

        let mut seen = BTreeSet::new();
        let mut violators = 0usize;
        for (i, observer) in observers.iter().enumerate() {
            let at = format!("observers[{i}]");
            if !seen.insert(observer.id()) {
                return Err(ValidationError::new(
                    format!("{at}.id"),
                    crate::error::ValidationKind::DuplicateObserver(observer.id().to_string()),
                ));
            }
            if observer.role() == ObserverRole::Violator {
                violators += 1;
                if violators > 1 {
                    return Err(ValidationError::invalid(
                        format!("{at}.role"),
                        "at most one observer may have role violator",
                    ));
                }
            }
        }
        if !observers.is_empty() {
            match observers.iter().find(|o| o.id() == violator_id) {
                None => {
                    return Err(ValidationError::invalid(
                        "violator_id",
                        format!("no observer with id '{violator_id}'"),
                    ))
                }
                Some(o) if o.role() != ObserverRole::Violator => {
                    return Err(ValidationError::invalid(
                        "violator_id",
                        format!("observer '{violator_id}' does not have role violator"),
                    ))
                }
                Some(_) => {}
            }
        }

        let mut sum_order: Vec<usize> = (0..observers.len()).collect();
        sum_order.sort_by(|&a, &b| observers[a].id().cmp(observers[b].id()));

        Ok(Scenario {
            violation,
            violator_id,
            observers,
            params,
            sum_order,
        })
    }

    pub fn violation(&self) -> &Violation {
        &self.violation
    }

    pub fn actual_severity(&self) -> Severity {
        self.violation.actual_severity
    }

    pub fn violator_id(&self) -> &str {
        &self.violator_id
    }

    /// Observers in document order.
    pub fn observers(&self) -> &[Observer] {
        &self.observers
    }

    /// Observers sorted by id.
    pub fn observers_by_id(&self) -> impl Iterator<Item = &Observer> + '_ {
        self.sum_order.iter().map(move |&i| &self.observers[i])
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn has_violator(&self) -> bool {
        !self.observers.is_empty()
    }

    pub fn with_params(&self, params: ModelParams) -> Result<Self, ValidationError> {
        Scenario::new(
            self.violation.clone(),
            self.violator_id.clone(),
            self.observers.clone(),
            params,
        )
    }

    pub fn with_violation(&self, violation: Violation) -> Self {
        Scenario {
            violation,
            ..self.clone()
        }
    }

    pub fn with_observers(&self, observers: Vec<Observer>) -> Result<Self, ValidationError> {
        Scenario::new(
            self.violation.clone(),
            self.violator_id.clone(),
            observers,
            self.params.clone(),
        )
    }

    /// Replaces violator and observers together.
    pub fn with_audience(
        &self,
        violator_id: impl Into<String>,
        observers: Vec<Observer>,
    ) -> Result<Self, ValidationError> {
        Scenario::new(
            self.violation.clone(),
            violator_id,
            observers,
            self.params.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sev(v: f64) -> Severity {
        Severity::new(v).unwrap()
    }

    fn utter(strategy: PolitenessStrategy, sc: f64) -> SpeechAct {
        SpeechAct::utterance(strategy, sev(sc), &ModelParams::default()).unwrap()
    }

    #[test]
    fn severity_range() {
        assert!(Severity::new(0.0).is_ok());
        assert!(Severity::new(1.0).is_ok());
        assert!(Severity::new(-0.01).is_err());
        assert!(Severity::new(1.01).is_err());
        assert!(Severity::new(f64::NAN).is_err());
    }

    #[test]
    fn strategy_rank_order() {
        use PolitenessStrategy::*;
        assert!(OffRecord < NegativePoliteness);
        assert!(NegativePoliteness < PositivePoliteness);
        assert!(PositivePoliteness < BaldOnRecord);
        assert_eq!(BaldOnRecord.rank(), 3);
        assert_eq!("bald".parse::<PolitenessStrategy>().unwrap(), BaldOnRecord);
        assert_eq!(
            "negative_politeness".parse::<PolitenessStrategy>().unwrap(),
            NegativePoliteness
        );
        assert!("rude".parse::<PolitenessStrategy>().is_err());
    }

    #[test]
    fn face_threat_examples() {
        let params = ModelParams::default();
        assert_eq!(face_threat(&SpeechAct::Silence, &params), 0.0);
        let bald = utter(PolitenessStrategy::BaldOnRecord, 1.0);
        assert!((face_threat(&bald, &params) - 1.0).abs() < 1e-12);
        // 0.45 * (0.5 + 0.5 * 0.55)
        let neg = utter(PolitenessStrategy::NegativePoliteness, 0.55);
        assert!((face_threat(&neg, &params) - 0.34875).abs() < 1e-9);
    }

    #[test]
    fn conveyance_cap_enforced() {
        let params = ModelParams::default();
        let err =
            SpeechAct::utterance(PolitenessStrategy::OffRecord, sev(0.4), &params).unwrap_err();
        assert_eq!(err.path(), "conveyed_severity");
        assert!(SpeechAct::utterance(PolitenessStrategy::OffRecord, sev(0.3), &params).is_ok());
    }

    #[test]
    fn explicit_face_threat_overrides() {
        let params = ModelParams::default();
        let act = utter(PolitenessStrategy::OffRecord, 0.1)
            .with_face_threat(1.7)
            .unwrap();
        assert_eq!(face_threat(&act, &params), 1.7);
        assert!(utter(PolitenessStrategy::OffRecord, 0.1)
            .with_face_threat(-0.1)
            .is_err());
        assert!(SpeechAct::Silence.with_face_threat(0.5).is_err());
    }

    #[test]
    fn derive_importance_examples() {
        assert_eq!(derive_importance(0.5, 0.5).unwrap(), 0.5);
        assert_eq!(derive_importance(0.0, 1.0).unwrap(), 1.0);
        assert!((derive_importance(0.8, 0.2).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(derive_importance(1.0, 0.0).unwrap(), 0.0);
        let err = derive_importance(1.2, 0.0).unwrap_err();
        assert_eq!(err.path(), "violator_rank");
        assert!(derive_importance(0.0, -0.1).is_err());
    }

    #[test]
    fn observer_validation() {
        let err = Observer::new("a", ObserverRole::Bystander, sev(0.1), 1.5).unwrap_err();
        assert_eq!(err.path(), "importance");
        assert!(Observer::new("", ObserverRole::Bystander, sev(0.1), 0.5).is_err());
        let bystander = Observer::new("a", ObserverRole::Bystander, sev(0.1), 0.5).unwrap();
        assert!(bystander.clone().with_self_advocacy(true).is_err());
        assert!(bystander.with_self_advocacy(false).is_ok());
        let victim = Observer::new("b", ObserverRole::Victim, sev(0.1), 0.5).unwrap();
        let victim = victim.with_self_advocacy(true).unwrap();
        assert!(victim.prefers_self_advocacy());
        assert!(!victim
            .with_role(ObserverRole::Violator)
            .prefers_self_advocacy());
    }

    fn violation() -> Violation {
        Violation::new("n", sev(0.5), false)
    }

    #[test]
    fn scenario_referential_integrity() {
        let v = Observer::new("v", ObserverRole::Violator, sev(0.1), 0.5).unwrap();
        let b = Observer::new("b", ObserverRole::Bystander, sev(0.1), 0.5).unwrap();
        let ok = Scenario::new(
            violation(),
            "v",
            vec![v.clone(), b.clone()],
            ModelParams::default(),
        );
        assert!(ok.is_ok());

        let dup = Scenario::new(
            violation(),
            "v",
            vec![v.clone(), v.clone()],
            ModelParams::default(),
        )
        .unwrap_err();
        assert_eq!(dup.path(), "observers[1].id");

        let missing =
            Scenario::new(violation(), "x", vec![b.clone()], ModelParams::default()).unwrap_err();
        assert_eq!(missing.path(), "violator_id");

        let wrong_role =
            Scenario::new(violation(), "b", vec![b.clone()], ModelParams::default()).unwrap_err();
        assert_eq!(wrong_role.path(), "violator_id");

        let v2 = Observer::new("w", ObserverRole::Violator, sev(0.1), 0.5).unwrap();
        let two = Scenario::new(violation(), "v", vec![v, v2], ModelParams::default()).unwrap_err();
        assert_eq!(two.path(), "observers[1].role");

        // No audience at all is legal.
        assert!(Scenario::new(violation(), "anyone", vec![], ModelParams::default()).is_ok());
    }

    #[test]
    fn params_validation_paths() {
        let bad = ModelParams {
            alpha: 0.0,
            ..ModelParams::default()
        };
        let err = Scenario::new(violation(), "v", vec![], bad).unwrap_err();
        assert_eq!(err.path(), "params.alpha");

        let bad = ModelParams {
            strategy_base_threat: StrategyTable::new(0.2, 0.2, 0.7, 1.0),
            ..ModelParams::default()
        };
        assert_eq!(bad.validate().unwrap_err().path(), "strategy_base_threat");

        let bad = ModelParams {
            role_weights: RoleWeights::default().with(ObserverRole::Victim, -1.0),
            ..ModelParams::default()
        };
        assert_eq!(bad.validate().unwrap_err().path(), "role_weights.victim");

        let bad = ModelParams {
            grid_step: 0.0,
            ..ModelParams::default()
        };
        assert_eq!(bad.validate().unwrap_err().path(), "grid_step");
        assert!(ModelParams::default().is_neutral_extension());
    }

    #[test]
    fn sum_order_is_sorted_by_id() {
        let v = Observer::new("z", ObserverRole::Violator, sev(0.1), 0.5).unwrap();
        let b = Observer::new("a", ObserverRole::Bystander, sev(0.1), 0.5).unwrap();
        let s = Scenario::new(violation(), "z", vec![v, b], ModelParams::default()).unwrap();
        let ids: Vec<_> = s.observers_by_id().map(|o| o.id()).collect();
        assert_eq!(ids, ["a", "z"]);
    }
}
