use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::simplicial::Value;

/// What a node may look at when it acts.
#[derive(Clone, Copy, Debug)]
pub struct NodeView {
    pub chain: usize,
    pub parties: usize,
    pub local_value: Value,
    pub decided: Option<Value>,
}

/// Messages to send and an optional decision, produced by one action.
#[derive(Clone, Debug, Default)]
pub struct Effects<P> {
    pub sends: Vec<(usize, P)>,
    pub decide: Option<Value>,
}

impl<P> Effects<P> {
    pub fn none() -> Self {
        Effects {
            sends: Vec::new(),
            decide: None,
        }
    }
}

/// A commit protocol run by every chain. The simulator owns scheduling,
/// crashes, suspensions and the decision register; the protocol only maps
/// local events to effects.
pub trait Protocol {
    type Phase: Clone + Debug + Eq + Hash + Serialize;
    type Payload: Clone + Debug + Eq + Hash + Serialize;

    fn name(&self) -> &'static str;

    fn initial_phase(&self, chain: usize, parties: usize) -> Self::Phase;

    /// Whether a local step is enabled.
    fn can_step(&self, node: &NodeView, phase: &Self::Phase) -> bool;

    fn step(&self, node: &NodeView, phase: &mut Self::Phase) -> Effects<Self::Payload>;

    fn receive(
        &self,
        node: &NodeView,
        phase: &mut Self::Phase,
        from: usize,
        payload: &Self::Payload,
    ) -> Effects<Self::Payload>;
}

/// Coordinator-based two-phase commit with chain 0 as coordinator.
///
/// Every chain votes yes iff its local transaction is committed. The
/// coordinator commits on unanimous yes and aborts on any no. There are no
/// timeouts: the system is asynchronous.
#[derive(Clone, Copy, Debug, Default)]
pub struct TwoPhaseCommit;

pub const COORDINATOR: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum TwoPcPhase {
    Coordinating {
        voted: bool,
        yes: BTreeSet<usize>,
        no: BTreeSet<usize>,
    },
    Working,
    Prepared,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TwoPcMessage {
    Vote { yes: bool },
    Commit,
    Abort,
}

fn broadcast(node: &NodeView, msg: TwoPcMessage) -> Vec<(usize, TwoPcMessage)> {
    (0..node.parties)
        .filter(|&i| i != node.chain)
        .map(|i| (i, msg.clone()))
        .collect()
}

impl Protocol for TwoPhaseCommit {
    type Phase = TwoPcPhase;
    type Payload = TwoPcMessage;

    fn name(&self) -> &'static str {
        "two-phase-commit"
    }

    fn initial_phase(&self, chain: usize, _parties: usize) -> TwoPcPhase {
        if chain == COORDINATOR {
            TwoPcPhase::Coordinating {
                voted: false,
                yes: BTreeSet::new(),
                no: BTreeSet::new(),
            }
        } else {
            TwoPcPhase::Working
        }
    }

    fn can_step(&self, node: &NodeView, phase: &TwoPcPhase) -> bool {
        match phase {
            TwoPcPhase::Coordinating { voted, yes, no } => {
                !voted || !no.is_empty() || yes.len() == node.parties
            }
            TwoPcPhase::Working => true,
            TwoPcPhase::Prepared | TwoPcPhase::Finished => false,
        }
    }

    fn step(&self, node: &NodeView, phase: &mut TwoPcPhase) -> Effects<TwoPcMessage> {
        let vote_yes = node.local_value == Value::One;
        match phase {
            TwoPcPhase::Coordinating { voted, yes, no } if !*voted => {
                *voted = true;
                if vote_yes {
                    yes.insert(node.chain);
                } else {
                    no.insert(node.chain);
                }
                Effects::none()
            }
            TwoPcPhase::Coordinating { no, .. } => {
                let (decision, msg) = if no.is_empty() {
                    (Value::One, TwoPcMessage::Commit)
                } else {
                    (Value::Zero, TwoPcMessage::Abort)
                };
                *phase = TwoPcPhase::Finished;
                Effects {
                    sends: broadcast(node, msg),
                    decide: Some(decision),
                }
            }
            TwoPcPhase::Working => {
                let sends = vec![(COORDINATOR, TwoPcMessage::Vote { yes: vote_yes })];
                if vote_yes {
                    *phase = TwoPcPhase::Prepared;
                    Effects {
                        sends,
                        decide: None,
                    }
                } else {
                    // A no vote may abort unilaterally.
                    *phase = TwoPcPhase::Finished;
                    Effects {
                        sends,
                        decide: Some(Value::Zero),
                    }
                }
            }
            TwoPcPhase::Prepared | TwoPcPhase::Finished => Effects::none(),
        }
    }

    fn receive(
        &self,
        _node: &NodeView,
        phase: &mut TwoPcPhase,
        from: usize,
        payload: &TwoPcMessage,
    ) -> Effects<TwoPcMessage> {
        match (phase as &mut TwoPcPhase, payload) {
            (TwoPcPhase::Coordinating { yes, no, .. }, TwoPcMessage::Vote { yes: v }) => {
                if *v {
                    yes.insert(from);
                } else {
                    no.insert(from);
                }
                Effects::none()
            }
            (TwoPcPhase::Working | TwoPcPhase::Prepared, TwoPcMessage::Commit) => {
                *phase = TwoPcPhase::Finished;
                Effects {
                    sends: Vec::new(),
                    decide: Some(Value::One),
                }
            }
            (TwoPcPhase::Working | TwoPcPhase::Prepared, TwoPcMessage::Abort) => {
                *phase = TwoPcPhase::Finished;
                Effects {
                    sends: Vec::new(),
                    decide: Some(Value::Zero),
                }
            }
            _ => Effects::none(),
        }
    }
}
