//! Asynchronous message-passing simulator for atomic commit across `n + 1`
//! chains under crash failures and fork suspension.
//!
//! A run is a pure function of its setup, protocol and schedule. The
//! schedule is an adversary-chosen prefix of events; afterwards the run is
//! completed fairly (every pending message delivered, every enabled step
//! taken) until nothing is enabled.

mod check;
mod explore;
mod protocol;
mod world;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simplicial::{BlockRef, Value};

pub use check::{check_trace, AtomicityViolation, ViolationReport};
pub use explore::{find_violation, find_violation_matching, SearchMode, DEFAULT_STATE_LIMIT};
pub use protocol::{
    Effects, NodeView, Protocol, TwoPcMessage, TwoPcPhase, TwoPhaseCommit, COORDINATOR,
};

/// Upper bound on fair-completion steps after a schedule prefix.
const COMPLETION_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("resilience t = {t} must satisfy t < (n+1)/2 with n = {n}")]
    BadResilience { n: usize, t: usize },
    #[error("a cross-chain transaction needs at least two chains")]
    TooFewChains,
    #[error("invalid inputs: {0}")]
    InvalidInputs(String),
    #[error("invalid schedule at event {index}: {reason}")]
    InvalidSchedule { index: usize, reason: String },
    #[error("exploration exceeded its limit of {limit}")]
    ResourceBound { limit: usize },
}

/// Parameters shared by every run: chain count, crash budget, initial local
/// states and how many suspensions the adversary may inject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimSetup {
    n: usize,
    t: usize,
    inputs: Vec<Value>,
    max_suspensions: usize,
    block_index: u64,
}

impl SimSetup {
    /// All local transactions committed, one suspension allowed.
    pub fn new(n: usize, t: usize) -> Result<Self, SimError> {
        if n < 1 {
            return Err(SimError::TooFewChains);
        }
        if 2 * t > n {
            return Err(SimError::BadResilience { n, t });
        }
        Ok(SimSetup {
            n,
            t,
            inputs: vec![Value::One; n + 1],
            max_suspensions: 1,
            block_index: 0,
        })
    }

    pub fn with_inputs(mut self, inputs: Vec<Value>) -> Result<Self, SimError> {
        if inputs.len() != self.n + 1 {
            return Err(SimError::InvalidInputs(format!(
                "expected {} values, got {}",
                self.n + 1,
                inputs.len()
            )));
        }
        self.inputs = inputs;
        Ok(self)
    }

    pub fn with_max_suspensions(mut self, k: usize) -> Self {
        self.max_suspensions = k;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn parties(&self) -> usize {
        self.n + 1
    }

    pub fn inputs(&self) -> &[Value] {
        &self.inputs
    }

    pub fn max_suspensions(&self) -> usize {
        self.max_suspensions
    }

    pub fn block(&self, chain: usize) -> BlockRef {
        BlockRef::new(chain, self.block_index)
    }
}

/// Local state of one chain's node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NodeState<Ph> {
    pub chain: BlockRef,
    pub local_value: Value,
    pub phase: Ph,
    pub decided: Option<Value>,
    pub crashed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Message<P> {
    pub from: usize,
    pub to: usize,
    pub seq: u64,
    pub payload: P,
}

/// An adversary-controlled event. The JSON form matches the corresponding
/// trace event, so exported traces replay as schedules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleEvent {
    Step { chain: usize },
    Deliver { seq: u64 },
    Suspend { chain: usize },
    Crash { chain: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent<P> {
    Step {
        chain: usize,
    },
    Send {
        seq: u64,
        from: usize,
        to: usize,
        payload: P,
    },
    Deliver {
        seq: u64,
        from: usize,
        to: usize,
        payload: P,
    },
    Decide {
        chain: usize,
        value: Value,
    },
    Suspend {
        chain: usize,
    },
    Crash {
        chain: usize,
    },
}

/// Final state of one node at the end of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeOutcome {
    pub chain: usize,
    /// Local value at the start of the run.
    pub input: Value,
    /// Local value at the end, `⊥` if the block was suspended.
    pub final_value: Value,
    pub decided: Option<Value>,
    pub crashed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExecutionTrace<P> {
    pub protocol: String,
    pub n: usize,
    pub t: usize,
    /// Adversary-chosen prefix that produced this run.
    pub schedule: Vec<ScheduleEvent>,
    pub events: Vec<TraceEvent<P>>,
    pub outcome: Vec<NodeOutcome>,
}

/// Executes `schedule` and then completes the run fairly.
pub fn run<Pr: Protocol>(
    setup: &SimSetup,
    protocol: &Pr,
    schedule: &[ScheduleEvent],
) -> Result<ExecutionTrace<Pr::Payload>, SimError> {
    let mut world = world::World::new(setup, protocol);
    let mut events = Vec::new();
    for (index, ev) in schedule.iter().enumerate() {
        if !world.enabled(setup, protocol).contains(ev) {
            return Err(SimError::InvalidSchedule {
                index,
                reason: world.why_disabled(setup, ev),
            });
        }
        world.apply(protocol, setup, *ev, &mut events);
    }
    let mut steps = 0;
    while let Some(ev) = world.next_fair_event(setup, protocol) {
        steps += 1;
        if steps > COMPLETION_LIMIT {
            return Err(SimError::ResourceBound {
                limit: COMPLETION_LIMIT,
            });
        }
        world.apply(protocol, setup, ev, &mut events);
    }
    Ok(ExecutionTrace {
        protocol: protocol.name().to_string(),
        n: setup.n,
        t: setup.t,
        schedule: schedule.to_vec(),
        events,
        outcome: world.outcomes(setup),
    })
}

impl<P: Serialize> ExecutionTrace<P> {
    /// One JSON object per line: every event, then a final outcome record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        #[derive(Serialize)]
        struct Outcome<'a> {
            kind: &'static str,
            nodes: &'a [NodeOutcome],
        }
        let tail = Outcome {
            kind: "outcome",
            nodes: &self.outcome,
        };
        out.push_str(&serde_json::to_string(&tail).expect("outcome serializes"));
        out.push('\n');
        out
    }

    pub fn render_timeline(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} with {} chains, t = {}", self.protocol, self.n + 1, self.t);
        for (i, e) in self.events.iter().enumerate() {
            let line = match e {
                TraceEvent::Step { chain } => format!("step      chain {chain}"),
                TraceEvent::Send {
                    seq,
                    from,
                    to,
                    payload,
                } => format!("send      #{seq} {from} -> {to} {}", compact(payload)),
                TraceEvent::Deliver {
                    seq,
                    from,
                    to,
                    payload,
                } => format!("deliver   #{seq} {from} -> {to} {}", compact(payload)),
                TraceEvent::Decide { chain, value } => format!("decide    chain {chain} = {value}"),
                TraceEvent::Suspend { chain } => format!("suspend   chain {chain} (block now ⊥)"),
                TraceEvent::Crash { chain } => format!("crash     chain {chain}"),
            };
            let _ = writeln!(out, "{i:>4}  {line}");
        }
        let _ = writeln!(out, "outcome:");
        for o in &self.outcome {
            let decided = o.decided.map_or("-".to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "  chain {}: input {} final {} decided {}{}",
                o.chain,
                o.input,
                o.final_value,
                decided,
                if o.crashed { " (crashed)" } else { "" }
            );
        }
        out
    }
}

fn compact<P: Serialize>(p: &P) -> String {
    serde_json::to_string(p).expect("payload serializes")
}

/// Reads a schedule from JSON lines. Lines for events the adversary does
/// not control (sends, decisions, the outcome record) are skipped, so an
/// exported trace can be fed back unchanged.
pub fn parse_schedule_jsonl(text: &str) -> Result<Vec<ScheduleEvent>, SimError> {
    let mut schedule = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| SimError::InvalidSchedule { index, reason };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some("step" | "deliver" | "crash" | "suspend") => {
                schedule.push(serde_json::from_value(value).map_err(|e| bad(e.to_string()))?)
            }
            Some("send" | "decide" | "outcome") => {}
            other => return Err(bad(format!("unknown event kind {other:?}"))),
        }
    }
    Ok(schedule)
}

/// Chains grouped by decision, for reporting.
pub fn decisions<P>(trace: &ExecutionTrace<P>) -> BTreeMap<Option<Value>, Vec<usize>> {
    let mut m: BTreeMap<Option<Value>, Vec<usize>> = BTreeMap::new();
    for o in trace.outcome.iter().filter(|o| !o.crashed) {
        m.entry(o.decided).or_default().push(o.chain);
    }
    m
}
