use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check::{check_trace, judge, ViolationReport};
use super::world::World;
use super::{run, ExecutionTrace, Protocol, ScheduleEvent, SimError, SimSetup};

/// Cap on distinct states visited by exhaustive exploration.
pub const DEFAULT_STATE_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Depth-first over every adversary schedule of at most `depth` events,
    /// in canonical event order. States reached along different
    /// interleavings are explored once.
    Exhaustive { depth: usize, state_limit: usize },
    /// `trials` uniformly random schedules of at most `depth` events.
    Random { seed: u64, trials: usize, depth: usize },
}

impl SearchMode {
    pub fn exhaustive(depth: usize) -> Self {
        SearchMode::Exhaustive {
            depth,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

/// First violating trace of any kind.
pub fn find_violation<Pr: Protocol>(
    setup: &SimSetup,
    protocol: &Pr,
    mode: SearchMode,
) -> Result<Option<ExecutionTrace<Pr::Payload>>, SimError> {
    find_violation_matching(setup, protocol, mode, |r| !r.is_clean())
}

/// First trace whose violation report satisfies `wanted`.
pub fn find_violation_matching<Pr: Protocol>(
    setup: &SimSetup,
    protocol: &Pr,
    mode: SearchMode,
    wanted: impl Fn(&ViolationReport) -> bool,
) -> Result<Option<ExecutionTrace<Pr::Payload>>, SimError> {
    let schedule = match mode {
        SearchMode::Exhaustive { depth, state_limit } => {
            let mut dfs = Dfs {
                setup,
                protocol,
                wanted: &wanted,
                depth,
                state_limit,
                visited: HashMap::new(),
                path: Vec::new(),
            };
            let root = World::new(setup, protocol);
            dfs.visited.insert(root.clone(), 0);
            dfs.visit(&root)?
        }
        SearchMode::Random {
            seed,
            trials,
            depth,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut found = None;
            for _ in 0..trials {
                let schedule = random_schedule(setup, protocol, depth, &mut rng);
                let trace = run(setup, protocol, &schedule)?;
                if wanted(&check_trace(&trace)) {
                    found = Some(trace);
                    break;
                }
            }
            return Ok(found);
        }
    };
    schedule
        .map(|s| {
            let trace = run(setup, protocol, &s)?;
            debug_assert!(wanted(&check_trace(&trace)));
            Ok(trace)
        })
        .transpose()
}

fn random_schedule<Pr: Protocol>(
    setup: &SimSetup,
    protocol: &Pr,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<ScheduleEvent> {
    let mut world = World::new(setup, protocol);
    let mut schedule = Vec::new();
    let mut scratch = Vec::new();
    while schedule.len() < depth {
        let enabled = world.enabled(setup, protocol);
        if enabled.is_empty() {
            break;
        }
        let ev = enabled[rng.gen_range(0..enabled.len())];
        world.apply(protocol, setup, ev, &mut scratch);
        schedule.push(ev);
    }
    schedule
}

struct Dfs<'a, Pr: Protocol, F> {
    setup: &'a SimSetup,
    protocol: &'a Pr,
    wanted: &'a F,
    depth: usize,
    state_limit: usize,
    /// Shallowest depth at which each state has been expanded.
    visited: HashMap<World<Pr::Phase, Pr::Payload>, usize>,
    path: Vec<ScheduleEvent>,
}

impl<Pr, F> Dfs<'_, Pr, F>
where
    Pr: Protocol,
    F: Fn(&ViolationReport) -> bool,
{
    fn visit(
        &mut self,
        world: &World<Pr::Phase, Pr::Payload>,
    ) -> Result<Option<Vec<ScheduleEvent>>, SimError> {
        let quiescent = world.is_quiescent(self.setup, self.protocol);
        let report = judge(&world.outcomes(self.setup), quiescent);
        if !report.is_clean() && (self.wanted)(&report) {
            return Ok(Some(self.path.clone()));
        }
        if self.path.len() >= self.depth {
            return Ok(None);
        }
        let mut scratch = Vec::new();
        for ev in world.enabled(self.setup, self.protocol) {
            let mut next = world.clone();
            next.apply(self.protocol, self.setup, ev, &mut scratch);
            scratch.clear();
            let d = self.path.len() + 1;
            match self.visited.get(&next) {
                Some(&seen) if seen <= d => continue,
                _ => {}
            }
            if self.visited.len() >= self.state_limit {
                return Err(SimError::ResourceBound {
                    limit: self.state_limit,
                });
            }
            self.visited.insert(next.clone(), d);
            self.path.push(ev);
            let found = self.visit(&next)?;
            self.path.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TwoPhaseCommit;

    #[test]
    fn exhaustive_finds_suspension_violation() {
        let setup = SimSetup::new(2, 1).unwrap();
        let trace = find_violation_matching(&setup, &TwoPhaseCommit, SearchMode::exhaustive(40), |r| {
            !r.atomicity.is_empty()
        })
        .unwrap()
        .expect("a violating schedule exists");
        assert!(!check_trace(&trace).atomicity.is_empty());
    }

    #[test]
    fn failure_free_two_pc_is_clean() {
        let setup = SimSetup::new(2, 0).unwrap().with_max_suspensions(0);
        assert_eq!(
            find_violation(&setup, &TwoPhaseCommit, SearchMode::exhaustive(40)).unwrap(),
            None
        );
    }

    #[test]
    fn random_mode_is_deterministic() {
        let setup = SimSetup::new(2, 1).unwrap();
        let mode = SearchMode::Random {
            seed: 7,
            trials: 200,
            depth: 30,
        };
        let a = find_violation(&setup, &TwoPhaseCommit, mode).unwrap();
        let b = find_violation(&setup, &TwoPhaseCommit, mode).unwrap();
        assert!(a.is_some());
        assert_eq!(a, b);
    }

    #[test]
    fn state_limit_is_enforced() {
        let setup = SimSetup::new(2, 1).unwrap();
        let mode = SearchMode::Exhaustive {
            depth: 40,
            state_limit: 3,
        };
        let r = find_violation_matching(&setup, &TwoPhaseCommit, mode, |_| false);
        assert_eq!(r.unwrap_err(), SimError::ResourceBound { limit: 3 });
    }
}
