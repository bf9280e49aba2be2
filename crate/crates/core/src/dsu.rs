//! Backward compatibility of concrete runs, state mapping at output points
//! and hybrid execution.

use crate::interp::{init_config, out_prefix, run_config, run_observed, Config, CrashCause, IoEvent, Outcome, RunResult, Term, Value};
use crate::lang::Checked;
use crate::update_classes::Rho;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// An old and a new program, with values for configuration variables of the new one.
#[derive(Clone, Copy)]
pub struct UpdatePair<'a> {
    pub old: &'a Checked,
    pub new: &'a Checked,
    pub rho: Option<&'a Rho>,
}

impl<'a> UpdatePair<'a> {
    pub fn new(old: &'a Checked, new: &'a Checked) -> Self {
        UpdatePair { old, new, rho: None }
    }

    pub fn with_rho(self, rho: &'a Rho) -> Self {
        UpdatePair { rho: Some(rho), ..self }
    }

    pub fn old_start(&self, inputs: &[i64]) -> Config {
        init_config(self.old, inputs)
    }

    pub fn new_start(&self, inputs: &[i64]) -> Config {
        let mut c = init_config(self.new, inputs);
        for (id, v) in self.rho.into_iter().flatten() {
            c.set_scalar(id, Value::Long(*v));
        }
        c
    }
}

/// How output events are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EventEq {
    #[default]
    Exact,
    /// Outputs of prompt labels match when the labels do, whatever their values.
    ModuloPrompt,
}

impl EventEq {
    pub fn same(self, a: &IoEvent, b: &IoEvent) -> bool {
        match (self, a, b) {
            (EventEq::ModuloPrompt, IoEvent::Out { prompt: Some(p), .. }, IoEvent::Out { prompt: Some(q), .. }) => p == q,
            _ => a == b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconclusiveReason {
    Fuel,
    InvalidOldRun,
    AssumptionViolated,
}

impl fmt::Display for InconclusiveReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InconclusiveReason::Fuel => "fuel",
            InconclusiveReason::InvalidOldRun => "invalid-old-run",
            InconclusiveReason::AssumptionViolated => "assumption-violated",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum CompatStatus {
    Compatible,
    /// `index` is the first event at which the traces disagree.
    Incompatible { index: usize },
    Inconclusive { reason: InconclusiveReason },
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompatReport {
    #[serde(flatten)]
    pub status: CompatStatus,
    pub old_trace: Vec<IoEvent>,
    pub new_trace: Vec<IoEvent>,
}

/// Runs reading an undefined cell or crashing on a type-range or bounds error
/// are outside the old program's specification.
pub fn old_run_invalid(r: &RunResult) -> bool {
    r.undefined_read
        || matches!(
            r.cause,
            Some(CrashCause::ValueMismatch | CrashCause::IndexOob | CrashCause::UndefinedRead)
        )
}

/// Whether every old I/O prefix ending at an output is reproduced by the new trace.
pub fn compare_traces(
    old: &[IoEvent],
    old_outcome: Outcome,
    new: &[IoEvent],
    new_outcome: Outcome,
    eq: EventEq,
) -> CompatStatus {
    let need = out_prefix(old);
    for (i, e) in need.iter().enumerate() {
        match new.get(i) {
            Some(n) if eq.same(e, n) => {}
            Some(_) => return CompatStatus::Incompatible { index: i },
            None if new_outcome == Outcome::FuelExhausted => {
                return CompatStatus::Inconclusive { reason: InconclusiveReason::Fuel }
            }
            None => return CompatStatus::Incompatible { index: i },
        }
    }
    // The unfinished old run might still emit outputs the finished new run lacks.
    if old_outcome == Outcome::FuelExhausted && new_outcome != Outcome::FuelExhausted {
        return CompatStatus::Inconclusive { reason: InconclusiveReason::Fuel };
    }
    CompatStatus::Compatible
}

pub fn compare_runs(old: &RunResult, new: &RunResult, eq: EventEq) -> CompatStatus {
    if old_run_invalid(old) {
        return CompatStatus::Inconclusive { reason: InconclusiveReason::InvalidOldRun };
    }
    compare_traces(&old.trace, old.outcome, &new.trace, new.outcome, eq)
}

pub fn empirical_backward_compat(pair: &UpdatePair, inputs: &[i64], fuel: u64) -> CompatReport {
    let old = run_config(pair.old_start(inputs), fuel);
    let new = run_config(pair.new_start(inputs), fuel);
    CompatReport { status: compare_runs(&old, &new, EventEq::Exact), old_trace: old.trace, new_trace: new.trace }
}

#[derive(Clone, Debug)]
pub struct UpdatePoint {
    pub old_config: Config,
    pub outputs_emitted: usize,
    pub inputs_consumed: usize,
}

impl UpdatePoint {
    pub fn consumed_inputs(&self) -> Vec<i64> {
        inputs_of(&self.old_config.state.store.io)
    }
}

#[derive(Clone, Debug)]
pub struct StateMapping {
    pub new_config: Config,
    pub replay_steps: u64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HybridTrace {
    pub prefix: Vec<IoEvent>,
    pub suffix: Vec<IoEvent>,
    pub combined: Vec<IoEvent>,
    /// How the new program's continuation ended; `FuelExhausted` marks a partial suffix.
    pub suffix_outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsuError {
    #[error("no corresponding configuration: {0}")]
    MappingNotFound(String),
    #[error("invalid update point: {0}")]
    InvalidUpdatePoint(String),
}

fn inputs_of(io: &[IoEvent]) -> Vec<i64> {
    io.iter()
        .filter_map(|e| match e {
            IoEvent::In(v) => Some(*v),
            IoEvent::Out { .. } => None,
        })
        .collect()
}

/// Not crashed, and the next statement to reduce is an output.
pub fn at_output(c: &Config) -> bool {
    !c.state.crash && matches!(c.head(), Some(Term::Output(..)))
}

/// The configuration just before each output of the old run, at most `limit` of them.
pub fn update_points(pair: &UpdatePair, inputs: &[i64], fuel: u64, limit: usize) -> Vec<UpdatePoint> {
    let mut points: Vec<UpdatePoint> = Vec::new();
    run_observed(pair.old_start(inputs), fuel, |c| {
        if points.len() >= limit || !at_output(c) {
            return;
        }
        let k = c.outputs_emitted();
        if points.last().is_some_and(|p| p.outputs_emitted == k) {
            return;
        }
        points.push(UpdatePoint {
            old_config: c.clone(),
            outputs_emitted: k,
            inputs_consumed: inputs_of(&c.state.store.io).len(),
        });
    });
    points
}

/// The update point before the `j`-th output (1-based).
pub fn update_point_at(pair: &UpdatePair, inputs: &[i64], fuel: u64, j: usize) -> Result<UpdatePoint, DsuError> {
    if j == 0 {
        return Err(DsuError::InvalidUpdatePoint("outputs are numbered from 1".into()));
    }
    update_points(pair, inputs, fuel, j)
        .into_iter()
        .nth(j - 1)
        .ok_or_else(|| DsuError::InvalidUpdatePoint(format!("the old run reaches no output #{j}")))
}

/// Replay the new program on the consumed input prefix until it stands before the same output.
pub fn map_state(pair: &UpdatePair, up: &UpdatePoint, fuel: u64) -> Result<StateMapping, DsuError> {
    if up.old_config.state.crash {
        return Err(DsuError::InvalidUpdatePoint("the old configuration has crashed".into()));
    }
    if !at_output(&up.old_config) {
        return Err(DsuError::InvalidUpdatePoint("the next statement is not an output".into()));
    }
    let consumed = up.consumed_inputs();
    let mut c = pair.new_start(&consumed);
    let mut steps = 0;
    loop {
        if at_output(&c) && c.outputs_emitted() == up.outputs_emitted {
            return Ok(StateMapping { new_config: c, replay_steps: steps });
        }
        if c.state.crash {
            let why = match c.state.crash_cause {
                Some(CrashCause::EmptyInput) => "the new program needs more input than was consumed".to_string(),
                cause => format!("the new program crashed during replay ({cause:?})"),
            };
            return Err(DsuError::MappingNotFound(why));
        }
        if c.is_terminal() {
            return Err(DsuError::MappingNotFound("the new program terminated during replay".into()));
        }
        if c.outputs_emitted() > up.outputs_emitted {
            return Err(DsuError::MappingNotFound("the new program emitted more outputs".into()));
        }
        if steps >= fuel {
            return Err(DsuError::MappingNotFound("fuel exhausted during replay".into()));
        }
        crate::interp::step_in_place(&mut c);
        steps += 1;
    }
}

/// Continue the mapped new configuration on `remaining` inputs.
pub fn hybrid_execute(
    pair: &UpdatePair,
    up: &UpdatePoint,
    remaining: &[i64],
    fuel: u64,
) -> Result<HybridTrace, DsuError> {
    let mapping = map_state(pair, up, fuel)?;
    let mut c = mapping.new_config;
    let start = c.state.store.io.len();
    c.state.store.input = remaining.iter().copied().collect();
    let r = run_config(c, fuel);
    let prefix = up.old_config.state.store.io.clone();
    let suffix = r.trace[start..].to_vec();
    let combined = prefix.iter().chain(&suffix).cloned().collect();
    Ok(HybridTrace { prefix, suffix, combined, suffix_outcome: r.outcome })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HybridReport {
    pub mapped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Unknown when either run ran out of fuel.
    pub hybrid_equals_pure_new: Option<bool>,
    pub backward_compatible: Option<CompatStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridTrace>,
    pub pure_new: Vec<IoEvent>,
}

/// Update before the `j`-th output of the old run on `inputs` and validate the hybrid run.
pub fn simulate_update(pair: &UpdatePair, inputs: &[i64], j: usize, fuel: u64) -> HybridReport {
    let pure_new = run_config(pair.new_start(inputs), fuel);
    let failed = |e: DsuError| HybridReport {
        mapped: false,
        error: Some(e.to_string()),
        hybrid_equals_pure_new: None,
        backward_compatible: None,
        hybrid: None,
        pure_new: pure_new.trace.clone(),
    };
    let up = match update_point_at(pair, inputs, fuel, j) {
        Ok(up) => up,
        Err(e) => return failed(e),
    };
    let remaining = &inputs[up.inputs_consumed..];
    let hybrid = match hybrid_execute(pair, &up, remaining, fuel) {
        Ok(h) => h,
        Err(e) => return failed(e),
    };
    let complete = hybrid.suffix_outcome != Outcome::FuelExhausted && pure_new.outcome != Outcome::FuelExhausted;
    let equal = complete.then(|| hybrid.combined == pure_new.trace);
    let old = run_config(pair.old_start(inputs), fuel);
    let status = if old_run_invalid(&old) {
        CompatStatus::Inconclusive { reason: InconclusiveReason::InvalidOldRun }
    } else {
        compare_traces(&old.trace, old.outcome, &hybrid.combined, hybrid.suffix_outcome, EventEq::Exact)
    };
    HybridReport {
        mapped: true,
        error: None,
        hybrid_equals_pure_new: equal,
        backward_compatible: Some(status),
        hybrid: Some(hybrid),
        pure_new: pure_new.trace,
    }
}
