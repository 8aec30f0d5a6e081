//! The cross-blockchain transaction task for `n + 1` chains.
//!
//! Input vertices pair a chain's block with a local state in `{0, 1, ⊥}`;
//! a vertex set is a simplex iff it touches each chain at most once. Output
//! vertices pair a block with a final `{0, 1}` decision, and only
//! same-decision sets are simplices, so the output splits into an all-abort
//! and an all-commit simplex.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::simplicial::{Complex, Simplex, Value, Vertex};
use crate::task::{CarrierMap, Task};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CbtError {
    #[error("a cross-chain transaction needs at least two chains (n >= 1), got n = {0}")]
    TooFewChains(usize),
}

/// `n + 1` chains, each touched at block `block_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CbtConfig {
    n: usize,
    block_index: u64,
}

impl CbtConfig {
    pub fn new(n: usize) -> Result<Self, CbtError> {
        Self::with_block(n, 0)
    }

    pub fn with_block(n: usize, block_index: u64) -> Result<Self, CbtError> {
        if n < 1 {
            return Err(CbtError::TooFewChains(n));
        }
        Ok(CbtConfig { n, block_index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chains(&self) -> usize {
        self.n + 1
    }

    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    fn vertex(&self, chain: usize, value: Value) -> Vertex {
        Vertex::colored(chain, self.block_index, value)
    }

    fn monochrome_facet(&self, value: Value) -> Simplex<Vertex> {
        Simplex::new((0..self.chains()).map(|i| self.vertex(i, value)))
            .expect("distinct chains give distinct vertices")
    }
}

/// Which carrier rule applies to an input simplex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarrierRule {
    /// Every local transaction committed: only the all-commit outcome.
    AllCommitted,
    /// Some block was suspended: only the all-abort outcome.
    Suspended,
    /// Anything else: either outcome.
    Mixed,
}

impl CarrierRule {
    pub fn classify(simplex: &Simplex<Vertex>) -> CarrierRule {
        let values = simplex.vertices().iter().map(|v| v.value);
        if values.clone().any(|x| x == Value::Bottom) {
            CarrierRule::Suspended
        } else if values.into_iter().all(|x| x == Value::One) {
            CarrierRule::AllCommitted
        } else {
            CarrierRule::Mixed
        }
    }

    /// Output values permitted under this rule.
    pub fn allowed(self) -> &'static [Value] {
        match self {
            CarrierRule::AllCommitted => &[Value::One],
            CarrierRule::Suspended => &[Value::Zero],
            CarrierRule::Mixed => &[Value::Zero, Value::One],
        }
    }
}

/// One facet per assignment of `{0, 1, ⊥}` to the chains.
pub fn build_input_complex(cfg: &CbtConfig) -> Complex<Vertex> {
    let facets = (0..cfg.chains())
        .map(|_| Value::ALL.iter().copied())
        .multi_cartesian_product()
        .map(|values| {
            Simplex::new(values.into_iter().enumerate().map(|(i, x)| cfg.vertex(i, x)))
                .expect("one vertex per chain")
        })
        .collect::<Vec<_>>();
    Complex::new(facets).expect("at least one facet")
}

/// Closures of the all-abort and the all-commit n-simplex.
pub fn build_output_complex(cfg: &CbtConfig) -> Complex<Vertex> {
    Complex::new(vec![
        cfg.monochrome_facet(Value::Zero),
        cfg.monochrome_facet(Value::One),
    ])
    .expect("two facets")
}

/// Image of one input simplex: the output simplices over its blocks whose
/// values the applicable rule permits.
pub fn carrier_image(output: &Complex<Vertex>, simplex: &Simplex<Vertex>) -> Complex<Vertex> {
    let allowed = CarrierRule::classify(simplex).allowed();
    let vertices: BTreeSet<Vertex> = simplex
        .vertices()
        .iter()
        .flat_map(|v| {
            allowed.iter().map(move |&y| Vertex {
                block: v.block,
                value: y,
            })
        })
        .collect();
    output
        .induced_subcomplex(&vertices)
        .expect("input blocks appear in the output")
}

pub fn build_carrier_map(cfg: &CbtConfig) -> CarrierMap {
    let input = build_input_complex(cfg);
    let output = build_output_complex(cfg);
    let mut carrier = CarrierMap::new();
    for simplex in input.simplices() {
        let image = carrier_image(&output, &simplex);
        carrier.insert(simplex, image);
    }
    carrier
}

pub fn build_task(cfg: &CbtConfig) -> Task {
    Task::new(
        build_input_complex(cfg),
        build_output_complex(cfg),
        build_carrier_map(cfg),
        true,
    )
    .expect("generated task is well formed")
}

pub fn build_colorless_task(cfg: &CbtConfig) -> Task {
    build_task(cfg)
        .colorless_projection()
        .expect("generated task is colored")
}
