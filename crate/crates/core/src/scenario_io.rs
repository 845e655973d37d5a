//! Scenario documents (JSON) and tabular results (CSV).
//!
//! Parsing is strict: unknown keys are rejected, every number is range
//! checked, and every error carries the path of the offending field.
//! Serialization is canonical (sorted keys, numbers rounded to nine
//! significant digits, defaults omitted), so equal documents serialize to
//! identical bytes. See `docs/format.md` for the schema.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;
use crate::model::{
    ModelParams, Observer, ObserverRole, PolitenessStrategy, Scenario, Severity, StrategyTable,
    Violation,
};
use crate::selection::SweepRow;
use crate::simulation::{EpisodeScript, EpisodeTrace, Policy, Round};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("input is not valid UTF-8 (first bad byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unknown key '{key}'")]
    UnknownKey { path: String, key: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("format_version: unsupported version {0} (expected 1)")]
    UnsupportedVersion(i64),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl FormatError {
    /// Field path of the error, when it concerns a specific field.
    pub fn path(&self) -> Option<&str> {
        match self {
            FormatError::Encoding { .. } | FormatError::Syntax { .. } => None,
            FormatError::UnknownKey { path, .. } | FormatError::Schema { path, .. } => Some(path),
            FormatError::UnsupportedVersion(_) => Some("format_version"),
            FormatError::Validation(e) => Some(e.path()),
        }
    }
}

/// A parsed and fully validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDocument {
    scenario: Scenario,
    episode: Option<EpisodeScript>,
}

impl ScenarioDocument {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioDocument {
            scenario,
            episode: None,
        }
    }

    /// Attaches an episode played out over this document's scenario.
    pub fn with_episode(self, rounds: Vec<Round>, policy: Policy) -> Result<Self, ValidationError> {
        let script = EpisodeScript::new(self.scenario.clone(), rounds, policy)
            .map_err(|e| e.within("episode"))?;
        Ok(ScenarioDocument {
            episode: Some(script),
            ..self
        })
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn episode(&self) -> Option<&EpisodeScript> {
        self.episode.as_ref()
    }

    /// Replaces the model parameters of the scenario (and any episode).
    pub fn with_params(&self, params: ModelParams) -> Result<Self, ValidationError> {
        let scenario = self
            .scenario
            .with_params(params)
            .map_err(|e| e.within("scenario"))?;
        let doc = ScenarioDocument::new(scenario);
        match &self.episode {
            None => Ok(doc),
            Some(script) => doc.with_episode(script.rounds().to_vec(), script.policy()),
        }
    }
}

// ---------------------------------------------------------------------------
// Wire representation
// ---------------------------------------------------------------------------

fn is_false(b: &bool) -> bool {
    !*b
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRepr {
    format_version: i64,
    scenario: ScenarioRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    episode: Option<EpisodeRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioRepr {
    violation: ViolationRepr,
    violator_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    observers: Vec<ObserverRepr>,
    #[serde(default, skip_serializing_if = "ParamsRepr::is_empty")]
    params: ParamsRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViolationRepr {
    norm_id: String,
    actual_severity: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    harm_done: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObserverRepr {
    id: String,
    role: ObserverRole,
    perceived_severity: f64,
    importance: f64,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    aware_of_norm: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    prefers_self_advocacy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    belief_rate: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_harm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role_weights: Option<RoleTableRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strategy_base_threat: Option<StrategyTableRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    conveyance_cap: Option<StrategyTableRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

impl ParamsRepr {
    fn is_empty(&self) -> bool {
        self.beta.is_none()
            && self.alpha.is_none()
            && self.gamma.is_none()
            && self.face_cap.is_none()
            && self.theta.is_none()
            && self.kappa.is_none()
            && self.rho.is_none()
            && self.w_harm.is_none()
            && self.role_weights.is_none()
            && self.strategy_base_threat.is_none()
            && self.conveyance_cap.is_none()
            && self.grid_step.is_none()
            && self.lambda.is_none()
    }
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoleTableRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bystander: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    violator: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    victim: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    co_violator: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyTableRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    off_record: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    negative_politeness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positive_politeness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bald_on_record: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpisodeRepr {
    #[serde(default, skip_serializing_if = "is_default_policy")]
    policy: Policy,
    rounds: Vec<RoundRepr>,
}

fn is_default_policy(p: &Policy) -> bool {
    *p == Policy::default()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundRepr {
    violation: ViolationRepr,
    violator_id: String,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_scenario_bytes(bytes: &[u8]) -> Result<ScenarioDocument, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|e| FormatError::Encoding {
        offset: e.valid_up_to(),
    })?;
    parse_scenario(text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioDocument, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let repr: DocumentRepr = serde_path_to_error::deserialize(&mut *de).map_err(|err| {
        let path = err.path().to_string();
        decode_error(path, err.into_inner())
    })?;
    de.end().map_err(|e| decode_error(String::new(), e))?;

    if repr.format_version != FORMAT_VERSION as i64 {
        return Err(FormatError::UnsupportedVersion(repr.format_version));
    }
    let scenario = build_scenario(repr.scenario).map_err(|e| e.within("scenario"))?;
    let doc = ScenarioDocument::new(scenario);
    match repr.episode {
        None => Ok(doc),
        Some(episode) => {
            let rounds = episode
                .rounds
                .into_iter()
                .enumerate()
                .map(|(i, r)| {
                    Ok(Round {
                        violation: build_violation(r.violation)
                            .map_err(|e| e.within(&format!("episode.rounds[{i}].violation")))?,
                        violator_id: r.violator_id,
                    })
                })
                .collect::<Result<Vec<_>, ValidationError>>()?;
            Ok(doc.with_episode(rounds, episode.policy)?)
        }
    }
}

fn decode_error(path: String, err: serde_json::Error) -> FormatError {
    use serde_json::error::Category;
    let message = strip_position(&err.to_string());
    match err.classify() {
        Category::Syntax | Category::Eof | Category::Io => FormatError::Syntax {
            line: err.line(),
            column: err.column(),
            message,
        },
        Category::Data => match unknown_key(&message) {
            Some(key) => FormatError::UnknownKey { path, key },
            None => FormatError::Schema {
                path: if path == "." || path == "?" {
                    String::new()
                } else {
                    path
                },
                message,
            },
        },
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.find('`').map(|end| rest[..end].to_string())
}

fn severity(value: f64, path: &str) -> Result<Severity, ValidationError> {
    Severity::new(value).map_err(|e| e.within(path))
}

fn build_violation(repr: ViolationRepr) -> Result<Violation, ValidationError> {
    Ok(Violation::new(
        repr.norm_id,
        severity(repr.actual_severity, "actual_severity")?,
        repr.harm_done,
    ))
}

fn build_scenario(repr: ScenarioRepr) -> Result<Scenario, ValidationError> {
    let violation = build_violation(repr.violation).map_err(|e| e.within("violation"))?;
    let observers = repr
        .observers
        .into_iter()
        .enumerate()
        .map(|(i, o)| build_observer(o).map_err(|e| e.within(&format!("observers[{i}]"))))
        .collect::<Result<Vec<_>, _>>()?;
    let params = build_params(repr.params).map_err(|e| e.within("params"))?;
    Scenario::new(violation, repr.violator_id, observers, params)
}

fn build_observer(repr: ObserverRepr) -> Result<Observer, ValidationError> {
    let perceived = severity(repr.perceived_severity, "perceived_severity")?;
    Observer::new(repr.id, repr.role, perceived, repr.importance)?
        .with_aware_of_norm(repr.aware_of_norm)
        .with_self_advocacy(repr.prefers_self_advocacy)?
        .with_belief_rate(repr.belief_rate)
}

fn build_params(repr: ParamsRepr) -> Result<ModelParams, ValidationError> {
    let d = ModelParams::default();
    let mut role_weights = d.role_weights;
    if let Some(table) = repr.role_weights {
        for (role, value) in [
            (ObserverRole::Bystander, table.bystander),
            (ObserverRole::Violator, table.violator),
            (ObserverRole::Victim, table.victim),
            (ObserverRole::CoViolator, table.co_violator),
        ] {
            if let Some(v) = value {
                role_weights = role_weights.with(role, v);
            }
        }
    }
    let params = ModelParams {
        beta: repr.beta.unwrap_or(d.beta),
        alpha: repr.alpha.unwrap_or(d.alpha),
        gamma: repr.gamma.unwrap_or(d.gamma),
        face_cap: repr.face_cap.unwrap_or(d.face_cap),
        theta: repr.theta.unwrap_or(d.theta),
        kappa: repr.kappa.unwrap_or(d.kappa),
        rho: repr.rho.unwrap_or(d.rho),
        w_harm: repr.w_harm.unwrap_or(d.w_harm),
        role_weights,
        strategy_base_threat: merge_strategy_table(
            d.strategy_base_threat,
            repr.strategy_base_threat,
        ),
        conveyance_cap: merge_strategy_table(d.conveyance_cap, repr.conveyance_cap),
        grid_step: repr.grid_step.unwrap_or(d.grid_step),
        lambda: repr.lambda.unwrap_or(d.lambda),
    };
    params.validate()?;
    Ok(params)
}

fn merge_strategy_table(base: StrategyTable, repr: Option<StrategyTableRepr>) -> StrategyTable {
    let Some(repr) = repr else { return base };
    [
        (PolitenessStrategy::OffRecord, repr.off_record),
        (
            PolitenessStrategy::NegativePoliteness,
            repr.negative_politeness,
        ),
        (
            PolitenessStrategy::PositivePoliteness,
            repr.positive_politeness,
        ),
        (PolitenessStrategy::BaldOnRecord, repr.bald_on_record),
    ]
    .into_iter()
    .fold(base, |table, (strategy, value)| match value {
        Some(v) => table.with(strategy, v),
        None => table,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Rounds to nine significant digits.
pub(crate) fn round_sig9(value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 { 0.0 } else { value };
    }
    format!("{value:.8e}").parse().unwrap_or(value)
}

/// Shortest decimal rendering of `value` rounded to nine significant digits.
pub fn fmt_num(value: f64) -> String {
    format!("{}", round_sig9(value))
}

fn non_default(value: f64, default: f64) -> Option<f64> {
    (value != default).then(|| round_sig9(value))
}

fn violation_repr(v: &Violation) -> ViolationRepr {
    ViolationRepr {
        norm_id: v.norm_id.clone(),
        actual_severity: round_sig9(v.actual_severity.value()),
        harm_done: v.harm_done,
    }
}

fn params_repr(p: &ModelParams) -> ParamsRepr {
    let d = ModelParams::default();
    let role_weights = (p.role_weights != d.role_weights).then(|| {
        let w = |role| non_default(p.role_weights[role], d.role_weights[role]);
        RoleTableRepr {
            bystander: w(ObserverRole::Bystander),
            violator: w(ObserverRole::Violator),
            victim: w(ObserverRole::Victim),
            co_violator: w(ObserverRole::CoViolator),
        }
    });
    let table = |t: &StrategyTable, dt: &StrategyTable| {
        (t != dt).then(|| {
            let s = |strategy| non_default(t[strategy], dt[strategy]);
            StrategyTableRepr {
                off_record: s(PolitenessStrategy::OffRecord),
                negative_politeness: s(PolitenessStrategy::NegativePoliteness),
                positive_politeness: s(PolitenessStrategy::PositivePoliteness),
                bald_on_record: s(PolitenessStrategy::BaldOnRecord),
            }
        })
    };
    ParamsRepr {
        beta: non_default(p.beta, d.beta),
        alpha: non_default(p.alpha, d.alpha),
        gamma: non_default(p.gamma, d.gamma),
        face_cap: non_default(p.face_cap, d.face_cap),
        theta: non_default(p.theta, d.theta),
        kappa: non_default(p.kappa, d.kappa),
        rho: non_default(p.rho, d.rho),
        w_harm: non_default(p.w_harm, d.w_harm),
        role_weights,
        strategy_base_threat: table(&p.strategy_base_threat, &d.strategy_base_threat),
        conveyance_cap: table(&p.conveyance_cap, &d.conveyance_cap),
        grid_step: non_default(p.grid_step, d.grid_step),
        lambda: non_default(p.lambda, d.lambda),
    }
}

/// Canonical JSON text for a document.
pub fn serialize_scenario(doc: &ScenarioDocument) -> String {
    let s = &doc.scenario;
    let repr = DocumentRepr {
        format_version: FORMAT_VERSION as i64,
        scenario: ScenarioRepr {
            violation: violation_repr(s.violation()),
            violator_id: s.violator_id().to_string(),
            observers: s
                .observers()
                .iter()
                .map(|o| ObserverRepr {
                    id: o.id().to_string(),
                    role: o.role(),
                    perceived_severity: round_sig9(o.perceived_severity().value()),
                    importance: round_sig9(o.importance()),
                    aware_of_norm: o.aware_of_norm(),
                    prefers_self_advocacy: o.prefers_self_advocacy(),
                    belief_rate: o.belief_rate().map(round_sig9),
                })
                .collect(),
            params: params_repr(s.params()),
        },
        episode: doc.episode.as_ref().map(|script| EpisodeRepr {
            policy: script.policy(),
            rounds: script
                .rounds()
                .iter()
                .map(|r| RoundRepr {
                    violation: violation_repr(&r.violation),
                    violator_id: r.violator_id.clone(),
                })
                .collect(),
        }),
    };
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(&repr).expect("document representation is plain data");
    let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Rows accepted by [`write_results`].
#[derive(Debug, Clone, Copy)]
pub enum ResultRows<'a> {
    Sweep(&'a [SweepRow]),
    Episode(&'a EpisodeTrace),
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "axis_value",
    "strategy",
    "conveyed_severity",
    "face_threat",
    "moral",
    "social",
    "total",
];

pub const EPISODE_COLUMNS: [&str; 10] = [
    "round",
    "norm_id",
    "actual_severity",
    "violator_id",
    "strategy",
    "conveyed_severity",
    "face_threat",
    "moral",
    "social",
    "total",
];

fn strategy_cell(act: &crate::model::SpeechAct) -> String {
    act.strategy()
        .map_or_else(|| "silence".to_string(), |s| s.name().to_string())
}

fn conveyed_cell(act: &crate::model::SpeechAct) -> String {
    act.conveyed_severity()
        .map_or_else(String::new, |s| fmt_num(s.value()))
}

/// CSV with a header row. Sweeps use [`SWEEP_COLUMNS`]; episodes use
/// [`EPISODE_COLUMNS`] followed by one `belief:<observer id>` column per
/// observer in id order.
pub fn write_results(rows: ResultRows<'_>) -> String {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let write = |out: &mut csv::Writer<Vec<u8>>, record: Vec<String>| {
        out.write_record(&record).expect("writing to memory");
    };
    match rows {
        ResultRows::Sweep(rows) => {
            write(
                &mut out,
                SWEEP_COLUMNS.iter().map(|c| c.to_string()).collect(),
            );
            for row in rows {
                let b = &row.breakdown;
                write(
                    &mut out,
                    vec![
                        fmt_num(row.axis_value),
                        strategy_cell(&row.chosen),
                        conveyed_cell(&row.chosen),
                        fmt_num(b.face_threat),
                        fmt_num(b.moral),
                        fmt_num(b.social),
                        fmt_num(b.total),
                    ],
                );
            }
        }
        ResultRows::Episode(trace) => {
            let ids: Vec<String> = trace
                .rounds
                .first()
                .map(|r| r.beliefs.keys().cloned().collect())
                .unwrap_or_default();
            let mut header: Vec<String> = EPISODE_COLUMNS.iter().map(|c| c.to_string()).collect();
            header.extend(ids.iter().map(|id| format!("belief:{id}")));
            write(&mut out, header);
            for (i, r) in trace.rounds.iter().enumerate() {
                let b = &r.breakdown;
                let mut record = vec![
                    (i + 1).to_string(),
                    r.violation.norm_id.clone(),
                    fmt_num(r.violation.actual_severity.value()),
                    r.violator_id.clone(),
                    strategy_cell(&r.act),
                    conveyed_cell(&r.act),
                    fmt_num(r.face_threat),
                    fmt_num(b.moral),
                    fmt_num(b.social),
                    fmt_num(b.total),
                ];
                record.extend(ids.iter().map(|id| fmt_num(r.beliefs[id].value())));
                write(&mut out, record);
            }
        }
    }
    String::from_utf8(out.into_inner().expect("flushing to memory")).expect("csv of UTF-8 fields")
}
