#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cbt_topo::cbt::{build_output_complex, carrier_image};
use cbt_topo::sim::NodeOutcome;
use cbt_topo::task::CarrierMap;
use cbt_topo::{CbtConfig, Complex, Simplex, Task, Value, Vertex};

/// Input vertex `i` of a random task.
fn inp(i: usize) -> Vertex {
    Vertex::colored(i, 0, Value::ALL[i % 3])
}

/// Output vertex `i` of a random task; blocks 100+ keep them apart from inputs.
fn out(i: usize) -> Vertex {
    Vertex::colored(i, 100, Value::Zero)
}

/// Connected input complex of dimension at least 2 on `k >= 3` vertices.
fn connected_input(rng: &mut ChaCha8Rng, k: usize) -> Complex<Vertex> {
    let mut facets = vec![vec![0, 1, 2]];
    let mut used: Vec<usize> = vec![0, 1, 2];
    for v in 3..k {
        let size = rng.gen_range(1..=2);
        let mut f: Vec<usize> = used.choose_multiple(rng, size).copied().collect();
        f.push(v);
        used.push(v);
        facets.push(f);
    }
    for _ in 0..rng.gen_range(0..3) {
        let size = rng.gen_range(2..=3.min(k));
        facets.push(used.choose_multiple(rng, size).copied().collect());
    }
    Complex::from_vertex_lists(facets.into_iter().map(|f| f.into_iter().map(inp))).unwrap()
}

/// A colorless task on at most 8 vertices whose output splits into two
/// contractible components and whose carrier pins one input vertex in each.
/// `Ξ(σ)` is the induced output subcomplex on the union of per-vertex images.
pub fn split_task(seed: u64) -> Task {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=4);
    let input = connected_input(&mut rng, k);
    let a_size = rng.gen_range(1..=2);
    let b_size = rng.gen_range(1..=2);
    let comp_a: Vec<usize> = (0..a_size).collect();
    let comp_b: Vec<usize> = (a_size..a_size + b_size).collect();
    let output = Complex::from_vertex_lists([
        comp_a.iter().map(|&i| out(i)).collect::<Vec<_>>(),
        comp_b.iter().map(|&i| out(i)).collect::<Vec<_>>(),
    ])
    .unwrap();
    let all: Vec<usize> = (0..a_size + b_size).collect();

    let mut images: Vec<BTreeSet<Vertex>> = (0..k)
        .map(|_| {
            let size = rng.gen_range(1..=all.len());
            all.choose_multiple(&mut rng, size).map(|&i| out(i)).collect()
        })
        .collect();
    let pinned: Vec<usize> = (0..k).collect::<Vec<_>>().choose_multiple(&mut rng, 2).copied().collect();
    images[pinned[0]] = [out(*comp_a.choose(&mut rng).unwrap())].into();
    images[pinned[1]] = [out(*comp_b.choose(&mut rng).unwrap())].into();

    union_carrier_task(input, output, |v| images[v.block.unwrap().chain].clone())
}

/// A colorless task whose output is a relabeled copy of the input and whose
/// carrier sends every simplex to the closure of its own copy.
pub fn identity_task(seed: u64) -> Task {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(3..=8);
    let input = connected_input(&mut rng, k);
    let copy = |v: &Vertex| out(v.block.unwrap().chain);
    let output = input.map_vertices(copy);
    union_carrier_task(input, output, |v| [copy(v)].into())
}

fn union_carrier_task(
    input: Complex<Vertex>,
    output: Complex<Vertex>,
    image_of: impl Fn(&Vertex) -> BTreeSet<Vertex>,
) -> Task {
    let mut carrier = CarrierMap::new();
    for s in input.simplices() {
        let vs: BTreeSet<Vertex> = s.vertices().iter().flat_map(&image_of).collect();
        carrier.insert(s, output.induced_subcomplex(&vs).unwrap());
    }
    Task::new(input, output, carrier, false).unwrap()
}

pub fn simplex(vs: &[Vertex]) -> Simplex<Vertex> {
    Simplex::new(vs.iter().copied()).unwrap()
}

/// An outcome is atomic iff the decided vertices of live nodes span a simplex
/// of the carrier image of the realized input simplex.
pub fn allowed_by_carrier(outcome: &[NodeOutcome]) -> bool {
    let n = outcome.len() - 1;
    let output = build_output_complex(&CbtConfig::new(n).unwrap());
    let realized = Simplex::new(outcome.iter().map(|o| Vertex::colored(o.chain, 0, o.final_value))).unwrap();
    let decided: BTreeSet<Vertex> = outcome
        .iter()
        .filter(|o| !o.crashed)
        .filter_map(|o| o.decided.map(|d| Vertex::colored(o.chain, 0, d)))
        .collect();
    match Simplex::from_set(decided) {
        None => true,
        Some(d) => carrier_image(&output, &realized).contains(&d),
    }
}
