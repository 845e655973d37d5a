//! Proportionality model for choosing how to respond to a social-norm
//! violation.
//!
//! A response (a [`SpeechAct`]) is scored by the moral benefit of correcting
//! each observer's belief about how severe the violation was, minus the
//! social cost of the face threat it imposes on the violator. The crate
//! provides:
//!
//! - [`model`]: validated domain types and the face-threat function,
//! - [`utility`]: base and extended utility equations,
//! - [`selection`]: candidate generation, argmax selection and sweeps,
//! - [`simulation`]: multi-round episodes with belief updates,
//! - [`scenario_io`]: the JSON scenario format and CSV result output.

pub mod error;
pub mod model;
pub mod scenario_io;
pub mod selection;
pub mod simulation;
pub mod utility;

pub use error::{ValidationError, ValidationKind};
pub use model::{
    derive_importance, face_threat, ModelParams, Observer, ObserverRole, PolitenessStrategy,
    RoleWeights, Scenario, Severity, SpeechAct, StrategyTable, Utterance, Violation,
};
pub use scenario_io::{
    fmt_num, parse_scenario, parse_scenario_bytes, serialize_scenario, write_results, FormatError,
    ResultRows, ScenarioDocument,
};
pub use selection::{
    candidate_acts, select_response, sweep, AxisSpec, CandidateSet, RankedAct, SelectionResult,
    SweepAxis, SweepRow,
};
pub use simulation::{
    run_episode, update_beliefs, EpisodeScript, EpisodeSummary, EpisodeTrace, Policy, Round,
    RoundRecord,
};
pub use utility::{
    moral_utility, social_utility, total_utility, ModelVariant, ObserverContribution,
    UtilityBreakdown,
};
