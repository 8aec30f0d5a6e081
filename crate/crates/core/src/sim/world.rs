use std::collections::BTreeMap;

use crate::simplicial::Value;

use super::{Effects, Message, NodeOutcome, NodeState, NodeView, Protocol, ScheduleEvent, SimSetup, TraceEvent};

/// Global simulator state. Hashable so exploration can skip revisits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct World<Ph, P> {
    pub nodes: Vec<NodeState<Ph>>,
    pub in_flight: BTreeMap<u64, Message<P>>,
    next_seq: u64,
    crashes: usize,
    suspensions: usize,
}

impl<Ph: Clone, P: Clone> World<Ph, P> {
    pub fn new<Pr: Protocol<Phase = Ph, Payload = P>>(setup: &SimSetup, protocol: &Pr) -> Self {
        let nodes = (0..setup.parties())
            .map(|i| NodeState {
                chain: setup.block(i),
                local_value: setup.inputs()[i],
                phase: protocol.initial_phase(i, setup.parties()),
                decided: None,
                crashed: false,
            })
            .collect();
        World {
            nodes,
            in_flight: BTreeMap::new(),
            next_seq: 0,
            crashes: 0,
            suspensions: 0,
        }
    }

    fn view(&self, i: usize, parties: usize) -> NodeView {
        let node = &self.nodes[i];
        NodeView {
            chain: i,
            parties,
            local_value: node.local_value,
            decided: node.decided,
        }
    }

    fn protocol_events<Pr: Protocol<Phase = Ph, Payload = P>>(
        &self,
        setup: &SimSetup,
        protocol: &Pr,
    ) -> impl Iterator<Item = ScheduleEvent> + '_ {
        let deliveries = self
            .in_flight
            .values()
            .filter(|m| !self.nodes[m.to].crashed)
            .map(|m| ScheduleEvent::Deliver { seq: m.seq });
        let parties = setup.parties();
        let steps: Vec<ScheduleEvent> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, n)| !n.crashed && protocol.can_step(&self.view(*i, parties), &n.phase))
            .map(|(chain, _)| ScheduleEvent::Step { chain })
            .collect();
        deliveries.chain(steps)
    }

    /// Enabled events in canonical order: deliveries by sequence number,
    /// steps by chain, then suspensions and crashes by chain.
    pub fn enabled<Pr: Protocol<Phase = Ph, Payload = P>>(
        &self,
        setup: &SimSetup,
        protocol: &Pr,
    ) -> Vec<ScheduleEvent> {
        let mut out: Vec<ScheduleEvent> = self.protocol_events(setup, protocol).collect();
        if self.suspensions < setup.max_suspensions() {
            out.extend(
                self.nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| n.local_value != Value::Bottom)
                    .map(|(chain, _)| ScheduleEvent::Suspend { chain }),
            );
        }
        if self.crashes < setup.t() {
            out.extend(
                self.nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| !n.crashed)
                    .map(|(chain, _)| ScheduleEvent::Crash { chain }),
            );
        }
        out
    }

    /// First enabled protocol event, if any.
    pub fn next_fair_event<Pr: Protocol<Phase = Ph, Payload = P>>(
        &self,
        setup: &SimSetup,
        protocol: &Pr,
    ) -> Option<ScheduleEvent> {
        self.protocol_events(setup, protocol).next()
    }

    pub fn is_quiescent<Pr: Protocol<Phase = Ph, Payload = P>>(
        &self,
        setup: &SimSetup,
        protocol: &Pr,
    ) -> bool {
        self.next_fair_event(setup, protocol).is_none()
    }

    pub fn why_disabled(&self, setup: &SimSetup, ev: &ScheduleEvent) -> String {
        let chain_ok = |c: usize| c < setup.parties();
        match *ev {
            ScheduleEvent::Step { chain }
            | ScheduleEvent::Crash { chain }
            | ScheduleEvent::Suspend { chain }
                if !chain_ok(chain) =>
            {
                format!("chain {chain} does not exist (n = {})", setup.n())
            }
            ScheduleEvent::Step { chain } if self.nodes[chain].crashed => {
                format!("chain {chain} has crashed")
            }
            ScheduleEvent::Step { chain } => format!("chain {chain} has no enabled step"),
            ScheduleEvent::Deliver { seq } => match self.in_flight.get(&seq) {
                None => format!("message #{seq} is not in flight"),
                Some(m) => format!("recipient {} of message #{seq} has crashed", m.to),
            },
            ScheduleEvent::Crash { chain } if self.nodes[chain].crashed => {
                format!("chain {chain} already crashed")
            }
            ScheduleEvent::Crash { .. } => format!("crash budget t = {} exhausted", setup.t()),
            ScheduleEvent::Suspend { chain } if self.nodes[chain].local_value == Value::Bottom => {
                format!("chain {chain} is already suspended")
            }
            ScheduleEvent::Suspend { .. } => format!(
                "suspension budget {} exhausted",
                setup.max_suspensions()
            ),
        }
    }

    /// Applies an enabled event, appending what happened to `log`.
    pub fn apply<Pr: Protocol<Phase = Ph, Payload = P>>(
        &mut self,
        protocol: &Pr,
        setup: &SimSetup,
        ev: ScheduleEvent,
        log: &mut Vec<TraceEvent<P>>,
    ) {
        let parties = setup.parties();
        match ev {
            ScheduleEvent::Step { chain } => {
                log.push(TraceEvent::Step { chain });
                let view = self.view(chain, parties);
                let effects = protocol.step(&view, &mut self.nodes[chain].phase);
                self.commit_effects(chain, effects, log);
            }
            ScheduleEvent::Deliver { seq } => {
                let m = self.in_flight.remove(&seq).expect("delivery of an in-flight message");
                log.push(TraceEvent::Deliver {
                    seq,
                    from: m.from,
                    to: m.to,
                    payload: m.payload.clone(),
                });
                let view = self.view(m.to, parties);
                let effects = protocol.receive(&view, &mut self.nodes[m.to].phase, m.from, &m.payload);
                self.commit_effects(m.to, effects, log);
            }
            ScheduleEvent::Suspend { chain } => {
                self.suspensions += 1;
                self.nodes[chain].local_value = Value::Bottom;
                log.push(TraceEvent::Suspend { chain });
            }
            ScheduleEvent::Crash { chain } => {
                self.crashes += 1;
                self.nodes[chain].crashed = true;
                log.push(TraceEvent::Crash { chain });
            }
        }
    }

    fn commit_effects(&mut self, chain: usize, effects: Effects<P>, log: &mut Vec<TraceEvent<P>>) {
        if let Some(value) = effects.decide {
            let node = &mut self.nodes[chain];
            // Decisions are write-once.
            if node.decided.is_none() {
                node.decided = Some(value);
                log.push(TraceEvent::Decide { chain, value });
            }
        }
        for (to, payload) in effects.sends {
            let seq = self.next_seq;
            self.next_seq += 1;
            log.push(TraceEvent::Send {
                seq,
                from: chain,
                to,
                payload: payload.clone(),
            });
            self.in_flight.insert(
                seq,
                Message {
                    from: chain,
                    to,
                    seq,
                    payload,
                },
            );
        }
    }

    pub fn outcomes(&self, setup: &SimSetup) -> Vec<NodeOutcome> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodeOutcome {
                chain: i,
                input: setup.inputs()[i],
                final_value: n.local_value,
                decided: n.decided,
                crashed: n.crashed,
            })
            .collect()
    }
}
