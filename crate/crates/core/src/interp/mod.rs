//! Structural operational semantics: configurations, one-step reduction and
//! bounded runs.

mod eval;
mod state;
mod step;

pub use eval::{eval, Evaluated};
pub use state::{
    init_config, init_config_with, Config, CrashCause, ExecState, IoEvent, Operand, Store, Target,
    Term, Value,
};
pub use step::{step, step_in_place, Rule};

use crate::lang::Checked;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Outcome {
    Terminated,
    Crashed,
    FuelExhausted,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    pub cause: Option<CrashCause>,
    pub steps: u64,
    pub final_config: Config,
    pub trace: Vec<IoEvent>,
    pub undefined_read: bool,
}

/// JSON shape of a run.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cause: Option<CrashCause>,
    pub steps: u64,
    pub trace: Vec<IoEvent>,
    pub undefined_read: bool,
    pub overflow: bool,
}

impl RunResult {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            outcome: self.outcome,
            cause: self.cause,
            steps: self.steps,
            trace: self.trace.clone(),
            undefined_read: self.undefined_read,
            overflow: self.final_config.state.overflow,
        }
    }

    pub fn overflow(&self) -> bool {
        self.final_config.state.overflow
    }
}

/// Run a well-typed program on `inputs` for at most `fuel` steps.
pub fn run(checked: &Checked, inputs: &[i64], fuel: u64) -> RunResult {
    run_config(init_config(checked, inputs), fuel)
}

pub fn run_config(config: Config, fuel: u64) -> RunResult {
    run_observed(config, fuel, |_| {})
}

/// Like [`run_config`], calling `observe` on every configuration before it steps.
pub fn run_observed(mut config: Config, fuel: u64, mut observe: impl FnMut(&Config)) -> RunResult {
    let mut steps = 0;
    let outcome = loop {
        if config.state.crash {
            break Outcome::Crashed;
        }
        if config.is_terminal() {
            break Outcome::Terminated;
        }
        if steps >= fuel {
            break Outcome::FuelExhausted;
        }
        observe(&config);
        step_in_place(&mut config);
        steps += 1;
    };
    RunResult {
        outcome,
        cause: config.state.crash_cause,
        steps,
        trace: config.state.store.io.clone(),
        undefined_read: config.state.undefined_read,
        final_config: config,
    }
}

/// The trace truncated after its last output event.
pub fn out_prefix(trace: &[IoEvent]) -> &[IoEvent] {
    match trace.iter().rposition(IoEvent::is_out) {
        Some(i) => &trace[..=i],
        None => &[],
    }
}

pub fn outputs(trace: &[IoEvent]) -> Vec<&IoEvent> {
    trace.iter().filter(|e| e.is_out()).collect()
}

/// One event per line: `in <n>`, `out <n>` or `out <n> #pmpt:<label>`.
pub fn format_trace(trace: &[IoEvent]) -> String {
    trace.iter().map(|e| format!("{e}\n")).collect()
}
