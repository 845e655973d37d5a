//! Candidate generation, utility-maximizing response selection and
//! parameter sweeps.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::ValidationError;
use crate::model::{
    face_threat, ModelParams, ObserverRole, PolitenessStrategy, Scenario, Severity, SpeechAct,
    Violation,
};
use crate::utility::{total_utility, ModelVariant, UtilityBreakdown};

/// Grid points closer than this are the same point.
pub const GRID_EPSILON: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Candidates
// ---------------------------------------------------------------------------

/// Silence first, then utterances ordered by (strategy rank, conveyed severity).
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    acts: Vec<SpeechAct>,
}

impl CandidateSet {
    pub fn acts(&self) -> &[SpeechAct] {
        &self.acts
    }

    pub fn len(&self) -> usize {
        self.acts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }
}

/// Conveyed severities considered for one strategy: multiples of the grid
/// step up to the strategy's cap, plus `min(S_a, cap)` exactly.
pub fn severity_grid(
    params: &ModelParams,
    strategy: PolitenessStrategy,
    actual: Severity,
) -> Vec<f64> {
    let cap = params.conveyance_cap[strategy];
    let step = params.grid_step;
    let honest = actual.value().min(cap);
    let steps = (cap / step + GRID_EPSILON).floor() as u64;

    let mut points: Vec<f64> = (0..=steps)
        .map(|k| (k as f64 * step).min(cap))
        .filter(|v| (v - honest).abs() > GRID_EPSILON)
        .collect();
    points.push(honest);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= GRID_EPSILON);
    points
}

pub fn candidate_acts(scenario: &Scenario) -> CandidateSet {
    let params = scenario.params();
    let mut acts = vec![SpeechAct::Silence];
    for strategy in PolitenessStrategy::ALL {
        for sc in severity_grid(params, strategy, scenario.actual_severity()) {
            let severity = Severity::saturating(sc);
            let act = SpeechAct::utterance(strategy, severity, params)
                .expect("grid points never exceed the conveyance cap");
            acts.push(act);
        }
    }
    CandidateSet { acts }
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct RankedAct {
    pub act: SpeechAct,
    pub total: f64,
    pub face_threat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen: SpeechAct,
    pub breakdown: UtilityBreakdown,
    /// Every candidate, best first.
    pub ranked: Vec<RankedAct>,
}

/// Preference order between two scored acts: higher total first, then lower
/// face threat, smaller honesty gap, gentler strategy (silence gentlest) and
/// lower conveyed severity.
pub fn preference_order(a: &RankedAct, b: &RankedAct, actual: Severity) -> Ordering {
    b.total
        .total_cmp(&a.total)
        .then(a.face_threat.total_cmp(&b.face_threat))
        .then(
            a.act
                .honesty_gap(actual)
                .total_cmp(&b.act.honesty_gap(actual)),
        )
        .then(a.act.strategy().cmp(&b.act.strategy()))
        .then(severity_or_zero(&a.act).total_cmp(&severity_or_zero(&b.act)))
}

fn severity_or_zero(act: &SpeechAct) -> f64 {
    act.conveyed_severity().map_or(0.0, Severity::value)
}

pub fn select_response(scenario: &Scenario, variant: ModelVariant) -> SelectionResult {
    let candidates = candidate_acts(scenario);
    let mut best: Option<(usize, UtilityBreakdown)> = None;
    let mut ranked = Vec::with_capacity(candidates.len());

    for act in candidates.acts() {
        let breakdown = total_utility(scenario, act, variant);
        ranked.push(RankedAct {
            act: *act,
            total: breakdown.total,
            face_threat: face_threat(act, scenario.params()),
        });
        let index = ranked.len() - 1;
        let better = match &best {
            None => true,
            Some((i, _)) => {
                preference_order(&ranked[index], &ranked[*i], scenario.actual_severity())
                    == Ordering::Less
            }
        };
        if better {
            best = Some((index, breakdown));
        }
    }

    let actual = scenario.actual_severity();
    ranked.sort_by(|a, b| preference_order(a, b, actual));
    let (_, breakdown) = best.expect("candidate set always contains silence");
    SelectionResult {
        chosen: ranked[0].act,
        breakdown,
        ranked,
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// A scenario quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    ActualSeverity,
    Beta,
    Alpha,
    Gamma,
    Kappa,
    Rho,
    /// Total observer count; the violator plus copies of a prototype observer.
    AudienceSize,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ActualSeverity => "s_a",
            SweepAxis::Beta => "beta",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Rho => "rho",
            SweepAxis::AudienceSize => "n",
        }
    }

    fn check(self, value: f64) -> Result<(), ValidationError> {
        let path = format!("axis {}", self.name());
        let ok = match self {
            SweepAxis::ActualSeverity => (0.0..=1.0).contains(&value),
            SweepAxis::Alpha => value > 0.0 && value <= 1.0,
            SweepAxis::Beta | SweepAxis::Gamma | SweepAxis::Kappa | SweepAxis::Rho => {
                value.is_finite() && value >= 0.0
            }
            SweepAxis::AudienceSize => {
                value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= 1e6
            }
        };
        if ok {
            return Ok(());
        }
        let range = match self {
            SweepAxis::ActualSeverity => "[0, 1]",
            SweepAxis::Alpha => "(0, 1]",
            SweepAxis::AudienceSize => "non-negative integers",
            _ => "[0, inf)",
        };
        Err(ValidationError::out_of_range(path, value, range))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s_a" | "actual_severity" => Ok(SweepAxis::ActualSeverity),
            "beta" => Ok(SweepAxis::Beta),
            "alpha" => Ok(SweepAxis::Alpha),
            "gamma" => Ok(SweepAxis::Gamma),
            "kappa" => Ok(SweepAxis::Kappa),
            "rho" => Ok(SweepAxis::Rho),
            "n" | "audience_size" => Ok(SweepAxis::AudienceSize),
            other => Err(ValidationError::invalid(
                "axis",
                format!(
                    "unknown axis '{other}' (expected s_a, beta, alpha, gamma, kappa, rho or n)"
                ),
            )),
        }
    }
}

/// An axis and the ordered values to visit.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl AxisSpec {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Result<Self, ValidationError> {
        if values.is_empty() {
            return Err(ValidationError::invalid(
                format!("axis {}", axis.name()),
                "axis needs at least one value",
            ));
        }
        for &value in &values {
            axis.check(value)?;
        }
        Ok(AxisSpec { axis, values })
    }
}

impl FromStr for AxisSpec {
    type Err = ValidationError;

    /// `name=v1,v2,...` or `name=start:stop:step` (inclusive of `stop`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.split_once('=').ok_or_else(|| {
            ValidationError::invalid("axis", format!("expected name=values, got '{s}'"))
        })?;
        let axis: SweepAxis = name.parse()?;
        let path = format!("axis {}", axis.name());
        let number = |text: &str| -> Result<f64, ValidationError> {
            text.trim().parse::<f64>().map_err(|_| {
                ValidationError::invalid(path.clone(), format!("'{}' is not a number", text.trim()))
            })
        };

        let values = if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(ValidationError::invalid(
                    path,
                    "range must be start:stop:step",
                ));
            }
            let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
            if step.is_nan() || step <= 0.0 || !step.is_finite() || stop.is_nan() || stop < start {
                return Err(ValidationError::invalid(
                    path,
                    "range needs step > 0 and stop >= start",
                ));
            }
            let count = ((stop - start) / step + GRID_EPSILON).floor() as u64;
            if count > 100_000 {
                return Err(ValidationError::invalid(path, "range has too many values"));
            }
            (0..=count)
                .map(|k| {
                    let v = start + k as f64 * step;
                    // Snap to 12 decimals so 0.1 steps land on 0.3, not 0.30000000000000004.
                    ((v * 1e12).round() / 1e12).min(stop)
                })
                .collect()
        } else {
            rest.split(',').map(number).collect::<Result<Vec<_>, _>>()?
        };
        AxisSpec::new(axis, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub chosen: SpeechAct,
    pub breakdown: UtilityBreakdown,
}

/// The scenario one sweep row evaluates.
pub fn apply_axis(
    template: &Scenario,
    axis: SweepAxis,
    value: f64,
) -> Result<Scenario, ValidationError> {
    axis.check(value)?;
    let with = |f: fn(&mut ModelParams, f64)| {
        let mut params = template.params().clone();
        f(&mut params, value);
        template
            .with_params(params)
            .map_err(|e| e.within(&format!("axis {}", axis.name())))
    };
    match axis {
        SweepAxis::ActualSeverity => {
            let v = template.violation();
            Ok(template.with_violation(Violation::new(
                v.norm_id.clone(),
                Severity::new(value)?,
                v.harm_done,
            )))
        }
        SweepAxis::Beta => with(|p, v| p.beta = v),
        SweepAxis::Alpha => with(|p, v| p.alpha = v),
        SweepAxis::Gamma => with(|p, v| p.gamma = v),
        SweepAxis::Kappa => with(|p, v| p.kappa = v),
        SweepAxis::Rho => with(|p, v| p.rho = v),
        SweepAxis::AudienceSize => replicate_audience(template, value as usize),
    }
}

/// Keeps the violator and fills the audience up to `size` observers with
/// copies of the first non-violator observer (or of the violator, as a
/// bystander, when there is none).
fn replicate_audience(template: &Scenario, size: usize) -> Result<Scenario, ValidationError> {
    if size == 0 {
        return template.with_observers(Vec::new());
    }
    let observers = template.observers();
    let violator = observers
        .iter()
        .find(|o| o.role() == ObserverRole::Violator)
        .ok_or_else(|| {
            ValidationError::invalid(
                "axis n",
                "audience-size sweeps need a template with a violator observer",
            )
        })?;
    let prototype = observers
        .iter()
        .find(|o| o.role() != ObserverRole::Violator)
        .cloned()
        .unwrap_or_else(|| violator.with_role(ObserverRole::Bystander));

    let mut audience = Vec::with_capacity(size);
    audience.push(violator.clone());
    for k in 1..size {
        audience.push(prototype.renamed(format!("{}#{k}", prototype.id())));
    }
    template
        .with_observers(audience)
        .map_err(|e| e.within("axis n"))
}

/// Runs `select_response` once per axis value. Rows come back in input order.
pub fn sweep(
    template: &Scenario,
    spec: &AxisSpec,
    variant: ModelVariant,
) -> Result<Vec<SweepRow>, ValidationError> {
    let scenarios = spec
        .values
        .iter()
        .map(|&value| apply_axis(template, spec.axis, value).map(|s| (value, s)))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(scenarios
        .into_par_iter()
        .map(|(axis_value, scenario)| {
            let result = select_response(&scenario, variant);
            SweepRow {
                axis_value,
                chosen: result.chosen,
                breakdown: result.breakdown,
            }
        })
        .collect())
}
