//! Deciding whether a task admits a t-resilient protocol.
//!
//! Two independent routes are provided. [`connectivity_obstruction`] works at
//! the level of geometric realizations: a connected `|skel^t I|` cannot be
//! mapped continuously onto a disconnected output when two input simplices
//! are pinned to different output components. [`search_carried_simplicial_map`]
//! looks for the combinatorial object directly, a simplicial map from
//! `Bary^N skel^t I` to the output carried by the task's carrier map, by
//! exhaustive backtracking.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::connectivity::{connected_components, reduced_betti, spanning_forest, BettiReport};
use crate::simplicial::{barycentric_subdivide, Simplex, SubdivisionVertex, Vertex};
use crate::task::{Task, TaskError};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("resilience t = {t} must satisfy 0 < t < (n+1)/2 with n = {n}")]
    BadResilience { n: usize, t: usize },
    #[error("search exceeded its budget of {budget} nodes")]
    ResourceBound { budget: u64 },
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// One vertex of the subdivided input and where the found map sends it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssignmentEntry {
    pub vertex: usize,
    pub carrier: Simplex<Vertex>,
    pub image: Vertex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    UnsolvableByObstruction,
    /// The obstruction test does not apply to this task.
    Inconclusive,
    NoMapUpToDepth { depth: usize },
    MapFound {
        depth: usize,
        assignment: Vec<AssignmentEntry>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Parameters {
    pub n: usize,
    pub t: usize,
    pub depth: Option<usize>,
}

/// Two input simplices whose carriers sit in different output components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionWitness {
    pub first: Simplex<Vertex>,
    pub first_component: usize,
    pub second: Simplex<Vertex>,
    pub second_component: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Evidence {
    /// Homology of `skel^t I` through dimension `t - 1`.
    pub input_skeleton: Option<BettiReport>,
    /// Spanning tree of the 1-skeleton of `skel^t I`: the connectivity
    /// certificate when it has `|V| - 1` edges.
    pub spanning_tree: Vec<(Vertex, Vertex)>,
    pub input_vertices: usize,
    pub output_components: Vec<BTreeSet<Vertex>>,
    pub witness: Option<ObstructionWitness>,
    pub subdivision_vertices: Option<usize>,
    pub search_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolvabilityReport {
    pub verdict: Verdict,
    pub parameters: Parameters,
    pub evidence: Evidence,
}

impl SolvabilityReport {
    pub fn is_unsolvable(&self) -> bool {
        matches!(
            self.verdict,
            Verdict::UnsolvableByObstruction | Verdict::NoMapUpToDepth { .. }
        )
    }
}

impl fmt::Display for SolvabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.parameters;
        let e = &self.evidence;
        write!(f, "n = {}, t = {}", p.n, p.t)?;
        if let Some(d) = p.depth {
            write!(f, ", subdivision depth = {d}")?;
        }
        writeln!(f)?;
        match &self.verdict {
            Verdict::UnsolvableByObstruction => {
                writeln!(f, "verdict: unsolvable (connectivity obstruction)")?;
                if let Some(b) = &e.input_skeleton {
                    writeln!(
                        f,
                        "  skel^{} of the input: {} component(s), reduced Betti {:?}",
                        p.t, b.components, b.reduced_betti
                    )?;
                }
                writeln!(
                    f,
                    "  spanning tree with {} edges over {} vertices certifies connectivity",
                    e.spanning_tree.len(),
                    e.input_vertices
                )?;
                writeln!(f, "  output has {} components", e.output_components.len())?;
                if let Some(w) = &e.witness {
                    writeln!(
                        f,
                        "  carrier of {} lies in output component {}",
                        w.first, w.first_component
                    )?;
                    writeln!(
                        f,
                        "  carrier of {} lies in output component {}",
                        w.second, w.second_component
                    )?;
                    writeln!(
                        f,
                        "  a connected input cannot be mapped into two disjoint components, so no carried map exists"
                    )?;
                }
            }
            Verdict::Inconclusive => writeln!(f, "verdict: inconclusive (obstruction does not apply)")?,
            Verdict::NoMapUpToDepth { depth } => {
                writeln!(
                    f,
                    "verdict: no carried simplicial map from Bary^{depth} of the input skeleton"
                )?;
                if let Some(v) = e.subdivision_vertices {
                    writeln!(f, "  {v} subdivision vertices, {} search nodes", e.search_nodes)?;
                }
            }
            Verdict::MapFound { depth, assignment } => {
                writeln!(f, "verdict: carried simplicial map found at depth {depth}")?;
                for a in assignment {
                    writeln!(f, "  b{} (carrier {}) -> {}", a.vertex, a.carrier, a.image)?;
                }
            }
        }
        Ok(())
    }
}

fn check_resilience(task: &Task, t: usize) -> Result<Parameters, SolveError> {
    let processes = task.processes();
    let n = processes.saturating_sub(1);
    if t == 0 || 2 * t >= processes {
        return Err(SolveError::BadResilience { n, t });
    }
    Ok(Parameters { n, t, depth: None })
}

/// Decides the realization-level obstruction for `0 < t < (n+1)/2`.
///
/// Returns `UnsolvableByObstruction` iff `skel^t I` is connected, the output
/// has at least two components, and two input simplices have carriers lying
/// wholly inside different components. Otherwise `Inconclusive`.
pub fn connectivity_obstruction(task: &Task, t: usize) -> Result<SolvabilityReport, SolveError> {
    let parameters = check_resilience(task, t)?;
    let skel = task.restrict_to_skeleton(t)?;
    let input = skel.input();
    let betti = reduced_betti(input, t - 1).expect("t - 1 < dim skel^t");
    let output_components = connected_components(task.output());
    let component_of: HashMap<Vertex, usize> = output_components
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |v| (*v, i)))
        .collect();

    let mut evidence = Evidence {
        spanning_tree: spanning_forest(input),
        input_vertices: input.vertices().len(),
        output_components,
        ..Evidence::default()
    };
    let connected = betti.components == 1;
    evidence.input_skeleton = Some(betti);

    let mut verdict = Verdict::Inconclusive;
    if connected && evidence.output_components.len() >= 2 {
        // Highest-dimensional simplices first, canonical order within a dimension.
        let mut first: Option<(Simplex<Vertex>, usize)> = None;
        'dims: for d in (0..=t).rev() {
            for s in input.simplices_of_dim(d) {
                let comps: BTreeSet<usize> = skel
                    .image(&s)
                    .vertices()
                    .iter()
                    .map(|v| component_of[v])
                    .collect();
                if comps.len() != 1 {
                    continue;
                }
                let c = *comps.first().unwrap();
                match &first {
                    None => first = Some((s, c)),
                    Some((s1, c1)) if *c1 != c => {
                        evidence.witness = Some(ObstructionWitness {
                            first: s1.clone(),
                            first_component: *c1,
                            second: s,
                            second_component: c,
                        });
                        verdict = Verdict::UnsolvableByObstruction;
                        break 'dims;
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(SolvabilityReport {
        verdict,
        parameters,
        evidence,
    })
}

/// Constraint tables for the backtracking search. Output vertices and
/// subdivision vertices are both addressed by index.
struct MapProblem {
    domains: Vec<Vec<usize>>,
    /// (subdivision vertices of a simplex, id of its allowed image set)
    constraints: Vec<(Vec<usize>, usize)>,
    by_vertex: Vec<Vec<usize>>,
    allowed: Vec<HashSet<Vec<usize>>>,
}

/// Allowed image simplices per carrier, computed once per distinct carrier.
struct ImageTable<'a> {
    task: &'a Task,
    out_index: &'a BTreeMap<Vertex, usize>,
    ids: BTreeMap<Simplex<Vertex>, usize>,
    allowed: Vec<HashSet<Vec<usize>>>,
}

impl ImageTable<'_> {
    fn id_for(&mut self, carrier: Simplex<Vertex>) -> usize {
        if let Some(&id) = self.ids.get(&carrier) {
            return id;
        }
        let faces = self
            .task
            .image(&carrier)
            .simplices()
            .into_iter()
            .map(|s| s.vertices().iter().map(|v| self.out_index[v]).collect())
            .collect();
        self.allowed.push(faces);
        let id = self.allowed.len() - 1;
        self.ids.insert(carrier, id);
        id
    }
}

struct Search<'a> {
    problem: &'a MapProblem,
    assign: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn image_of(&self, vs: &[usize], extra: Option<usize>) -> Vec<usize> {
        let mut img: Vec<usize> = vs.iter().filter_map(|&u| self.assign[u]).chain(extra).collect();
        img.sort_unstable();
        img.dedup();
        img
    }

    fn solve(&mut self, domains: &[Vec<usize>]) -> Result<bool, SolveError> {
        // Smallest remaining domain first; ties by index.
        let next = (0..self.assign.len())
            .filter(|&u| self.assign[u].is_none())
            .min_by_key(|&u| (domains[u].len(), u));
        let Some(u) = next else {
            return Ok(true);
        };
        for &x in &domains[u] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(SolveError::ResourceBound {
                    budget: self.budget,
                });
            }
            self.assign[u] = Some(x);
            if let Some(reduced) = self.propagate(u, x, domains) {
                if self.solve(&reduced)? {
                    return Ok(true);
                }
            }
            self.assign[u] = None;
        }
        Ok(false)
    }

    /// Checks every simplex through `u` against its allowed image set and
    /// prunes the domains of its unassigned vertices.
    fn propagate(&self, u: usize, x: usize, domains: &[Vec<usize>]) -> Option<Vec<Vec<usize>>> {
        let p = self.problem;
        let mut reduced = domains.to_vec();
        reduced[u] = vec![x];
        for &c in &p.by_vertex[u] {
            let (vs, allowed_id) = &p.constraints[c];
            let allowed = &p.allowed[*allowed_id];
            if !allowed.contains(&self.image_of(vs, None)) {
                return None;
            }
            for &w in vs.iter().filter(|&&w| self.assign[w].is_none()) {
                reduced[w].retain(|&y| allowed.contains(&self.image_of(vs, Some(y))));
                if reduced[w].is_empty() {
                    return None;
                }
            }
        }
        Some(reduced)
    }
}

/// Searches for a simplicial map `δ: Bary^depth skel^t I → O` with
/// `δ(s) ∈ carrier(carrier_of(s))` for every subdivision simplex `s`.
pub fn search_carried_simplicial_map(
    task: &Task,
    t: usize,
    depth: usize,
    opts: &SearchOptions,
) -> Result<SolvabilityReport, SolveError> {
    let mut parameters = check_resilience(task, t)?;
    parameters.depth = Some(depth);
    let skel = task.restrict_to_skeleton(t)?;
    let sd = barycentric_subdivide(skel.input(), depth);

    let out_vertices: Vec<Vertex> = task.output().vertices().into_iter().collect();
    let out_index: BTreeMap<Vertex, usize> =
        out_vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();

    let mut images = ImageTable {
        task: &skel,
        out_index: &out_index,
        ids: BTreeMap::new(),
        allowed: Vec::new(),
    };

    let n_vertices = sd.vertex_count();
    let mut domains = vec![Vec::new(); n_vertices];
    let mut constraints = Vec::new();
    let mut by_vertex = vec![Vec::new(); n_vertices];
    for s in sd.complex.simplices() {
        let id = images.id_for(sd.carrier_of_simplex(&s));
        let vs: Vec<usize> = s.vertices().iter().map(|u| u.0).collect();
        if let [u] = vs[..] {
            // Vertex constraints become the initial domains.
            domains[u] = (0..out_vertices.len())
                .filter(|&x| images.allowed[id].contains(&vec![x]))
                .collect();
            continue;
        }
        for &u in &vs {
            by_vertex[u].push(constraints.len());
        }
        constraints.push((vs, id));
    }
    let allowed = images.allowed;

    let problem = MapProblem {
        domains,
        constraints,
        by_vertex,
        allowed,
    };
    let mut search = Search {
        problem: &problem,
        assign: vec![None; n_vertices],
        nodes: 0,
        budget: opts.node_budget,
    };
    let found = if problem.domains.iter().any(Vec::is_empty) {
        false
    } else {
        search.solve(&problem.domains)?
    };

    let verdict = if found {
        let assignment = search
            .assign
            .iter()
            .enumerate()
            .map(|(u, x)| AssignmentEntry {
                vertex: u,
                carrier: sd.carrier_of(SubdivisionVertex(u)).clone(),
                image: out_vertices[x.expect("complete assignment")],
            })
            .collect();
        Verdict::MapFound { depth, assignment }
    } else {
        Verdict::NoMapUpToDepth { depth }
    };
    Ok(SolvabilityReport {
        verdict,
        parameters,
        evidence: Evidence {
            input_vertices: skel.input().vertices().len(),
            output_components: connected_components(task.output()),
            subdivision_vertices: Some(n_vertices),
            search_nodes: search.nodes,
            ..Evidence::default()
        },
    })
}

/// Full pipeline: project colored tasks to their colorless form, try the
/// obstruction, then search depths `0..=max_depth`.
pub fn decide(
    task: &Task,
    t: usize,
    max_depth: usize,
    opts: &SearchOptions,
) -> Result<SolvabilityReport, SolveError> {
    let projected;
    let task = if task.is_colored() {
        projected = task.colorless_projection()?;
        &projected
    } else {
        task
    };
    let obstruction = connectivity_obstruction(task, t)?;
    if obstruction.verdict == Verdict::UnsolvableByObstruction {
        return Ok(obstruction);
    }
    let mut last = None;
    for depth in 0..=max_depth {
        let report = search_carried_simplicial_map(task, t, depth, opts)?;
        if matches!(report.verdict, Verdict::MapFound { .. }) {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("at least depth 0 is searched"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbt::{build_colorless_task, build_task, CbtConfig};
    use crate::simplicial::{Complex, Value};
    use crate::task::CarrierMap;

    fn cbt(n: usize) -> Task {
        build_colorless_task(&CbtConfig::new(n).unwrap())
    }

    fn lv(label: usize) -> Vertex {
        Vertex::colored(label, 0, Value::Zero)
    }

    fn triangle_identity() -> Task {
        let input = Complex::from_vertex_lists([[lv(0), lv(1), lv(2)]]).unwrap();
        let mut carrier = CarrierMap::new();
        for s in input.simplices() {
            carrier.insert(s.clone(), Complex::closure(s));
        }
        Task::new(input.clone(), input, carrier, false).unwrap()
    }

    #[test]
    fn cbt_obstruction_fires() {
        let r = connectivity_obstruction(&cbt(2), 1).unwrap();
        assert_eq!(r.verdict, Verdict::UnsolvableByObstruction);
        let w = r.evidence.witness.unwrap();
        assert_ne!(w.first_component, w.second_component);
        assert_eq!(w.first.dimension(), 1);
        assert_eq!(r.evidence.spanning_tree.len(), 8);
        assert_eq!(r.evidence.input_skeleton.unwrap().reduced_betti, vec![0]);
    }

    #[test]
    fn resilience_bound() {
        assert_eq!(
            connectivity_obstruction(&cbt(1), 1).unwrap_err(),
            SolveError::BadResilience { n: 1, t: 1 }
        );
        assert!(connectivity_obstruction(&cbt(2), 0).is_err());
        assert!(connectivity_obstruction(&cbt(2), 2).is_err());
        assert!(search_carried_simplicial_map(&cbt(2), 2, 0, &SearchOptions::default()).is_err());
    }

    #[test]
    fn identity_task_has_a_map() {
        let task = triangle_identity();
        let r = search_carried_simplicial_map(&task, 1, 0, &SearchOptions::default()).unwrap();
        match r.verdict {
            Verdict::MapFound { assignment, .. } => {
                for a in assignment {
                    assert_eq!(a.carrier.vertices(), &[a.image]);
                }
            }
            v => panic!("expected a map, got {v:?}"),
        }
        let r1 = search_carried_simplicial_map(&task, 1, 1, &SearchOptions::default()).unwrap();
        assert!(matches!(r1.verdict, Verdict::MapFound { depth: 1, .. }));
        assert!(matches!(
            decide(&task, 1, 1, &SearchOptions::default()).unwrap().verdict,
            Verdict::MapFound { depth: 0, .. }
        ));
    }

    #[test]
    fn cbt_search_is_unsat_at_small_depths() {
        for depth in 0..=2 {
            let r = search_carried_simplicial_map(&cbt(2), 1, depth, &SearchOptions::default()).unwrap();
            assert_eq!(r.verdict, Verdict::NoMapUpToDepth { depth });
        }
        let r = search_carried_simplicial_map(&cbt(2), 1, 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.evidence.subdivision_vertices, Some(36));
    }

    #[test]
    fn budget_is_enforced() {
        let task = triangle_identity();
        let opts = SearchOptions { node_budget: 2 };
        assert_eq!(
            search_carried_simplicial_map(&task, 1, 1, &opts).unwrap_err(),
            SolveError::ResourceBound { budget: 2 }
        );
    }

    #[test]
    fn decide_projects_colored_tasks() {
        let colored = build_task(&CbtConfig::new(3).unwrap());
        let r = decide(&colored, 1, 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::UnsolvableByObstruction);
        assert_eq!(r.parameters.n, 3);
    }

    #[test]
    fn report_renders_witnesses() {
        let r = connectivity_obstruction(&cbt(2), 1).unwrap();
        let text = r.to_string();
        assert!(text.contains("unsolvable"));
        assert!(text.contains("carrier of {"));
    }
}
