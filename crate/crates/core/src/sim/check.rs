use serde::Serialize;

use crate::simplicial::Value;

use super::{ExecutionTrace, NodeOutcome};

/// A breach of the transaction's atomicity requirement, judged against the
/// realized inputs (local values after any suspension).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum AtomicityViolation {
    /// Live nodes decided differently.
    Disagreement { committed: usize, aborted: usize },
    /// A block was suspended, which forces a global abort, yet a live node
    /// committed.
    SuspendedCommit { suspended: usize, committed: usize },
    /// Every local transaction committed and nothing was suspended, yet a
    /// live node aborted.
    AbortedUnanimousCommit { aborted: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub atomicity: Vec<AtomicityViolation>,
    /// Live nodes still undecided once nothing more can happen.
    pub non_termination: Vec<usize>,
}

impl ViolationReport {
    pub fn is_clean(&self) -> bool {
        self.atomicity.is_empty() && self.non_termination.is_empty()
    }
}

/// Judges a completed (quiescent) trace.
pub fn check_trace<P>(trace: &ExecutionTrace<P>) -> ViolationReport {
    judge(&trace.outcome, true)
}

/// Atomicity is judged on any state; termination only once `quiescent`.
pub(crate) fn judge(outcome: &[NodeOutcome], quiescent: bool) -> ViolationReport {
    let live: Vec<&NodeOutcome> = outcome.iter().filter(|o| !o.crashed).collect();
    let first_with = |v: Value| live.iter().find(|o| o.decided == Some(v)).map(|o| o.chain);
    let committed = first_with(Value::One);
    let aborted = first_with(Value::Zero);

    let mut atomicity = Vec::new();
    if let (Some(c), Some(a)) = (committed, aborted) {
        atomicity.push(AtomicityViolation::Disagreement {
            committed: c,
            aborted: a,
        });
    }
    let suspended = outcome
        .iter()
        .find(|o| o.final_value == Value::Bottom)
        .map(|o| o.chain);
    if let (Some(s), Some(c)) = (suspended, committed) {
        atomicity.push(AtomicityViolation::SuspendedCommit {
            suspended: s,
            committed: c,
        });
    }
    if outcome.iter().all(|o| o.final_value == Value::One) {
        if let Some(a) = aborted {
            atomicity.push(AtomicityViolation::AbortedUnanimousCommit { aborted: a });
        }
    }

    let non_termination = if quiescent {
        live.iter()
            .filter(|o| o.decided.is_none())
            .map(|o| o.chain)
            .collect()
    } else {
        Vec::new()
    };
    ViolationReport {
        atomicity,
        non_termination,
    }
}
