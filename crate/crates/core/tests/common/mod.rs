#![allow(dead_code)]

use proptest::prelude::*;

use propor::{ModelParams, Observer, ObserverRole, RoleWeights, Scenario, Severity, Violation};

/// Values with at most three decimals, so they survive canonical
/// serialization unchanged.
pub fn milli(lo: u32, hi: u32) -> impl Strategy<Value = f64> {
    (lo..=hi).prop_map(|k| k as f64 / 1000.0)
}

pub fn unit() -> impl Strategy<Value = f64> {
    milli(0, 1000)
}

pub fn severity() -> impl Strategy<Value = Severity> {
    prop_oneof![
        unit(),
        // on-grid values exercise the duplicate-point handling
        (0u32..=20).prop_map(|k| f64::from(k * 5) / 100.0),
        Just(0.0),
        Just(1.0),
    ]
    .prop_map(|v| Severity::new(v.min(1.0)).unwrap())
}

#[derive(Debug, Clone)]
pub struct ObserverSpec {
    pub role: ObserverRole,
    pub perceived: Severity,
    pub importance: f64,
    pub aware: bool,
    pub self_advocate: bool,
}

pub fn observer_spec() -> impl Strategy<Value = ObserverSpec> {
    (
        prop_oneof![
            Just(ObserverRole::Bystander),
            Just(ObserverRole::Victim),
            Just(ObserverRole::CoViolator),
        ],
        severity(),
        unit(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(
            |(role, perceived, importance, aware, advocate)| ObserverSpec {
                role,
                perceived,
                importance,
                aware,
                self_advocate: advocate && role == ObserverRole::Victim,
            },
        )
}

pub fn base_params() -> impl Strategy<Value = ModelParams> {
    (
        milli(0, 2000),
        prop_oneof![
            Just(0.05),
            Just(0.1),
            Just(0.2),
            Just(0.25),
            Just(0.07),
            Just(1.0)
        ],
        milli(0, 1000),
    )
        .prop_map(|(beta, grid_step, theta)| ModelParams {
            beta,
            grid_step,
            theta,
            ..ModelParams::default()
        })
}

pub fn extended_params() -> impl Strategy<Value = ModelParams> {
    (
        base_params(),
        milli(1, 1000),
        milli(0, 1000),
        milli(0, 1000),
        milli(0, 1000),
        milli(0, 1000),
        milli(0, 1000),
        proptest::array::uniform4(milli(0, 3000)),
        unit(),
    )
        .prop_map(
            |(base, alpha, gamma, face_cap, kappa, rho, w_harm, weights, lambda)| ModelParams {
                alpha,
                gamma,
                face_cap,
                kappa,
                rho,
                w_harm,
                role_weights: RoleWeights::uniform(1.0)
                    .with(ObserverRole::Bystander, weights[0])
                    .with(ObserverRole::Violator, weights[1])
                    .with(ObserverRole::Victim, weights[2])
                    .with(ObserverRole::CoViolator, weights[3]),
                lambda,
                ..base
            },
        )
}

pub fn build(
    actual: Severity,
    harm_done: bool,
    violator: Option<ObserverSpec>,
    others: Vec<ObserverSpec>,
    params: ModelParams,
) -> Scenario {
    let mut observers = Vec::new();
    if let Some(v) = violator {
        observers.push(
            Observer::new("v", ObserverRole::Violator, v.perceived, v.importance)
                .unwrap()
                .with_aware_of_norm(v.aware),
        );
    }
    for (i, o) in others.into_iter().enumerate() {
        observers.push(
            Observer::new(format!("o{i:02}"), o.role, o.perceived, o.importance)
                .unwrap()
                .with_aware_of_norm(o.aware)
                .with_self_advocacy(o.self_advocate)
                .unwrap(),
        );
    }
    Scenario::new(
        Violation::new("norm", actual, harm_done),
        "v",
        observers,
        params,
    )
    .unwrap()
}

fn scenario_with(
    params: impl Strategy<Value = ModelParams>,
    min_audience: usize,
) -> impl Strategy<Value = Scenario> {
    (
        severity(),
        any::<bool>(),
        observer_spec(),
        proptest::collection::vec(observer_spec(), 0..=9),
        params,
        0usize..10,
    )
        .prop_map(move |(actual, harm, v, others, params, empty_roll)| {
            let violator = if min_audience == 0 && empty_roll == 0 {
                None
            } else {
                Some(v)
            };
            let others = if violator.is_none() { vec![] } else { others };
            build(actual, harm, violator, others, params)
        })
}

/// 0–10 observers (occasionally none), base-only parameters.
pub fn base_scenario() -> impl Strategy<Value = Scenario> {
    scenario_with(base_params(), 0)
}

/// 1–10 observers, base-only parameters.
pub fn populated_base_scenario() -> impl Strategy<Value = Scenario> {
    scenario_with(base_params(), 1)
}

/// 0–10 observers, every parameter randomized.
pub fn extended_scenario() -> impl Strategy<Value = Scenario> {
    scenario_with(extended_params(), 0)
}

/// Same audience and params as `extended_params` but neutral extension terms.
pub fn neutral_extended_scenario() -> impl Strategy<Value = Scenario> {
    scenario_with(
        extended_params().prop_map(|p| ModelParams {
            alpha: 1.0,
            gamma: 0.0,
            kappa: 0.0,
            rho: 0.0,
            w_harm: 0.0,
            role_weights: RoleWeights::default(),
            ..p
        }),
        0,
    )
}
