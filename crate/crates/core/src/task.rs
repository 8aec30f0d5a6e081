//! Tasks as (input complex, output complex, carrier map) triples.
//!
//! Carrier maps are stored extensionally: every simplex of the input complex
//! has an explicit image. The verification routines return a concrete
//! counterexample on failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::simplicial::{BlockRef, Complex, Simplex, Value, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("carrier map has no entry for input simplex {0}")]
    NotTotal(Simplex<Vertex>),
    #[error("carrier map has an entry for {0}, which is not an input simplex")]
    ForeignSimplex(Simplex<Vertex>),
    #[error("image of {0} is not a subcomplex of the output complex")]
    ImageNotSubcomplex(Simplex<Vertex>),
    #[error("colored task has an unlabeled vertex {0}")]
    Unlabeled(Vertex),
    #[error("output vertex {0} carries the suspended value")]
    BottomInOutput(Vertex),
    #[error("operation requires a colored task")]
    NotColored,
    #[error("resilience t = {t} is out of range for a task of dimension {dimension}")]
    BadResilience { t: usize, dimension: isize },
}

/// A failed carrier-map property, with the simplices that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "property", rename_all = "snake_case")]
pub enum CarrierViolation {
    /// `face ⊆ simplex` but `carrier(face) ⊄ carrier(simplex)`.
    NotMonotonic {
        face: Simplex<Vertex>,
        simplex: Simplex<Vertex>,
    },
    NotRigid {
        simplex: Simplex<Vertex>,
        image_dimension: isize,
    },
    NotNamePreserving {
        simplex: Simplex<Vertex>,
        expected: BTreeSet<BlockRef>,
        found: BTreeSet<BlockRef>,
    },
}

impl fmt::Display for CarrierViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierViolation::NotMonotonic { face, simplex } => write!(
                f,
                "not monotonic: carrier of face {face} is not inside carrier of {simplex}"
            ),
            CarrierViolation::NotRigid {
                simplex,
                image_dimension,
            } => write!(
                f,
                "not rigid: {simplex} has dimension {} but its image has dimension {image_dimension}",
                simplex.dimension()
            ),
            CarrierViolation::NotNamePreserving {
                simplex,
                expected,
                found,
            } => {
                let show = |s: &BTreeSet<BlockRef>| {
                    s.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
                };
                write!(
                    f,
                    "not name-preserving: {simplex} has blocks [{}] but its image has [{}]",
                    show(expected),
                    show(found)
                )
            }
        }
    }
}

/// Outcome of a property check.
pub type Check = Result<(), CarrierViolation>;

/// Map from each input simplex to a subcomplex of the output complex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CarrierMap {
    entries: BTreeMap<Simplex<Vertex>, Complex<Vertex>>,
}

impl CarrierMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, simplex: Simplex<Vertex>, image: Complex<Vertex>) {
        self.entries.insert(simplex, image);
    }

    pub fn get(&self, simplex: &Simplex<Vertex>) -> Option<&Complex<Vertex>> {
        self.entries.get(simplex)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex<Vertex>, &Complex<Vertex>)> {
        self.entries.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct CarrierEntry {
    simplex: Simplex<Vertex>,
    image_facets: Vec<Simplex<Vertex>>,
}

impl Serialize for CarrierMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<CarrierEntry> = self
            .entries
            .iter()
            .map(|(simplex, image)| CarrierEntry {
                simplex: simplex.clone(),
                image_facets: image.facets().iter().cloned().collect(),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CarrierMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<CarrierEntry>::deserialize(d)?;
        let mut map = CarrierMap::new();
        for e in entries {
            if map.entries.contains_key(&e.simplex) {
                return Err(D::Error::custom(format!(
                    "duplicate carrier entry for {}",
                    e.simplex
                )));
            }
            map.insert(e.simplex, Complex::from_simplices(e.image_facets));
        }
        Ok(map)
    }
}

/// A task triple. Colored tasks keep block identities on both sides;
/// colorless tasks impose no identity matching on the carrier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Task {
    input: Complex<Vertex>,
    output: Complex<Vertex>,
    carrier: CarrierMap,
    colored: bool,
}

impl Task {
    /// Validates totality of the carrier, that every image is a subcomplex
    /// of the output, and the labeling rules.
    pub fn new(
        input: Complex<Vertex>,
        output: Complex<Vertex>,
        carrier: CarrierMap,
        colored: bool,
    ) -> Result<Task, TaskError> {
        let simplices = input.simplices();
        if let Some(missing) = simplices.iter().find(|s| carrier.get(s).is_none()) {
            return Err(TaskError::NotTotal(missing.clone()));
        }
        if let Some((extra, _)) = carrier.iter().find(|(s, _)| !simplices.contains(*s)) {
            return Err(TaskError::ForeignSimplex(extra.clone()));
        }
        if let Some((s, _)) = carrier
            .iter()
            .find(|(_, image)| !image.is_subcomplex_of(&output))
        {
            return Err(TaskError::ImageNotSubcomplex(s.clone()));
        }
        let out_vertices = output.vertices();
        if let Some(v) = out_vertices.iter().find(|v| v.value == Value::Bottom) {
            return Err(TaskError::BottomInOutput(*v));
        }
        if colored {
            if let Some(v) = input
                .vertices()
                .iter()
                .chain(out_vertices.iter())
                .find(|v| !v.is_colored())
            {
                return Err(TaskError::Unlabeled(*v));
            }
        }
        Ok(Task {
            input,
            output,
            carrier,
            colored,
        })
    }

    pub fn input(&self) -> &Complex<Vertex> {
        &self.input
    }

    pub fn output(&self) -> &Complex<Vertex> {
        &self.output
    }

    pub fn carrier(&self) -> &CarrierMap {
        &self.carrier
    }

    pub fn is_colored(&self) -> bool {
        self.colored
    }

    /// Number of participating processes, one more than the input dimension.
    pub fn processes(&self) -> usize {
        (self.input.dimension() + 1).max(0) as usize
    }

    /// Image of an input simplex. Panics if `simplex` is not in the input.
    pub fn image(&self, simplex: &Simplex<Vertex>) -> &Complex<Vertex> {
        self.carrier
            .get(simplex)
            .unwrap_or_else(|| panic!("{simplex} is not an input simplex"))
    }

    /// Replaces one carrier entry, re-validating the task.
    pub fn with_image(
        &self,
        simplex: Simplex<Vertex>,
        image: Complex<Vertex>,
    ) -> Result<Task, TaskError> {
        let mut carrier = self.carrier.clone();
        carrier.insert(simplex, image);
        Task::new(self.input.clone(), self.output.clone(), carrier, self.colored)
    }

    /// `τ ⊆ σ` implies `carrier(τ) ⊆ carrier(σ)`. Checking codimension-one
    /// faces suffices by transitivity.
    pub fn verify_monotonic(&self) -> Check {
        for (simplex, image) in self.carrier.iter() {
            for face in simplex.boundary_faces() {
                if !self.image(&face).is_subcomplex_of(image) {
                    return Err(CarrierViolation::NotMonotonic {
                        face,
                        simplex: simplex.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `dim carrier(σ) = dim σ` for every input simplex.
    pub fn verify_rigid(&self) -> Check {
        for (simplex, image) in self.carrier.iter() {
            if image.dimension() != simplex.dimension() as isize {
                return Err(CarrierViolation::NotRigid {
                    simplex: simplex.clone(),
                    image_dimension: image.dimension(),
                });
            }
        }
        Ok(())
    }

    /// The block identities in `carrier(σ)` are exactly those of `σ`.
    pub fn verify_name_preserving(&self) -> Result<Check, TaskError> {
        if !self.colored {
            return Err(TaskError::NotColored);
        }
        let blocks = |vs: &mut dyn Iterator<Item = &Vertex>| -> BTreeSet<BlockRef> {
            vs.filter_map(|v| v.block).collect()
        };
        for (simplex, image) in self.carrier.iter() {
            let expected = blocks(&mut simplex.vertices().iter());
            let found = blocks(&mut image.vertices().iter());
            if expected != found {
                return Ok(Err(CarrierViolation::NotNamePreserving {
                    simplex: simplex.clone(),
                    expected,
                    found,
                }));
            }
        }
        Ok(Ok(()))
    }

    /// Restricts the input to its `t`-skeleton, keeping the carrier on the
    /// surviving simplices.
    pub fn restrict_to_skeleton(&self, t: usize) -> Result<Task, TaskError> {
        let dimension = self.input.dimension();
        if t == 0 || t as isize > dimension {
            return Err(TaskError::BadResilience { t, dimension });
        }
        let input = self.input.skeleton(t);
        let mut carrier = CarrierMap::new();
        for (s, image) in self.carrier.iter() {
            if s.dimension() <= t {
                carrier.insert(s.clone(), image.clone());
            }
        }
        Ok(Task {
            input,
            output: self.output.clone(),
            carrier,
            colored: self.colored,
        })
    }

    /// Forgets block identities on the output side: `(b, y) ↦ (y)`. The new
    /// carrier sends each input simplex to the vertex-wise projection of its
    /// old image; coincident projected simplices merge.
    pub fn colorless_projection(&self) -> Result<Task, TaskError> {
        if !self.colored {
            return Err(TaskError::NotColored);
        }
        let output = self.output.map_vertices(Vertex::project);
        let mut carrier = CarrierMap::new();
        for (s, image) in self.carrier.iter() {
            carrier.insert(s.clone(), image.map_vertices(Vertex::project));
        }
        Ok(Task {
            input: self.input.clone(),
            output,
            carrier,
            colored: false,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task serialization is infallible")
    }
}

/// Parse failures and structural validation failures are kept apart so the
/// CLI can map them to different exit codes.
#[derive(Debug, Error)]
pub enum TaskLoadError {
    #[error("malformed task JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid task: {0}")]
    Invalid(#[from] TaskError),
}

impl Task {
    pub fn from_json(text: &str) -> Result<Task, TaskLoadError> {
        #[derive(Deserialize)]
        struct Repr {
            input: Complex<Vertex>,
            output: Complex<Vertex>,
            carrier: CarrierMap,
            colored: bool,
        }
        let r: Repr = serde_json::from_str(text)?;
        Ok(Task::new(r.input, r.output, r.carrier, r.colored)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(chain: usize, value: Value) -> Vertex {
        Vertex::colored(chain, 0, value)
    }

    fn s(vs: &[Vertex]) -> Simplex<Vertex> {
        Simplex::new(vs.iter().copied()).unwrap()
    }

    /// Two processes, each either 0 or 1; output copies the input.
    fn copy_task() -> Task {
        let input = Complex::from_vertex_lists(
            [(Value::Zero, Value::Zero), (Value::Zero, Value::One), (Value::One, Value::Zero), (Value::One, Value::One)]
                .iter()
                .map(|&(a, b)| vec![v(0, a), v(1, b)]),
        )
        .unwrap();
        let mut carrier = CarrierMap::new();
        for simplex in input.simplices() {
            carrier.insert(simplex.clone(), Complex::closure(simplex));
        }
        Task::new(input.clone(), input, carrier, true).unwrap()
    }

    #[test]
    fn copy_task_has_all_properties() {
        let t = copy_task();
        assert_eq!(t.carrier().len(), 8);
        assert_eq!(t.verify_monotonic(), Ok(()));
        assert_eq!(t.verify_rigid(), Ok(()));
        assert_eq!(t.verify_name_preserving(), Ok(Ok(())));
    }

    #[test]
    fn shrinking_one_image_breaks_monotonicity() {
        let t = copy_task();
        let edge = s(&[v(0, Value::One), v(1, Value::One)]);
        let broken = t
            .with_image(edge.clone(), Complex::closure(s(&[v(0, Value::One)])))
            .unwrap();
        assert_eq!(
            broken.verify_monotonic(),
            Err(CarrierViolation::NotMonotonic {
                face: s(&[v(1, Value::One)]),
                simplex: edge.clone(),
            })
        );
        assert!(matches!(
            broken.verify_rigid(),
            Err(CarrierViolation::NotRigid { image_dimension: 0, .. })
        ));
    }

    #[test]
    fn foreign_block_breaks_name_preservation() {
        let t = copy_task();
        let vertex = s(&[v(0, Value::One)]);
        let broken = t
            .with_image(vertex.clone(), Complex::closure(s(&[v(1, Value::One)])))
            .unwrap();
        match broken.verify_name_preserving().unwrap() {
            Err(CarrierViolation::NotNamePreserving { simplex, .. }) => assert_eq!(simplex, vertex),
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn validation_errors() {
        let t = copy_task();
        let mut partial = t.carrier().clone();
        partial.entries.remove(&s(&[v(0, Value::Zero)]));
        assert!(matches!(
            Task::new(t.input().clone(), t.output().clone(), partial, true),
            Err(TaskError::NotTotal(_))
        ));
        let outside = Complex::closure(s(&[v(3, Value::One)]));
        assert!(matches!(
            t.with_image(s(&[v(0, Value::Zero)]), outside),
            Err(TaskError::ImageNotSubcomplex(_))
        ));
    }

    #[test]
    fn projection_requires_color_and_merges_images() {
        let t = copy_task();
        let p = t.colorless_projection().unwrap();
        assert!(!p.is_colored());
        assert_eq!(p.colorless_projection().unwrap_err(), TaskError::NotColored);
        assert_eq!(p.verify_name_preserving().unwrap_err(), TaskError::NotColored);
        let mixed = s(&[v(0, Value::Zero), v(1, Value::One)]);
        let expected = Complex::closure(s(&[Vertex::colorless(Value::Zero), Vertex::colorless(Value::One)]));
        assert_eq!(p.image(&mixed), &expected);
        let same = s(&[v(0, Value::One), v(1, Value::One)]);
        assert_eq!(p.image(&same), &Complex::closure(s(&[Vertex::colorless(Value::One)])));
    }

    #[test]
    fn restriction_bounds() {
        let t = copy_task();
        assert_eq!(t.restrict_to_skeleton(1).unwrap(), t);
        assert!(matches!(
            t.restrict_to_skeleton(0),
            Err(TaskError::BadResilience { t: 0, .. })
        ));
        assert!(t.restrict_to_skeleton(2).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let t = copy_task();
        let back = Task::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let bad = t.to_json().replace("\"colored\": true", "\"colored\": 7");
        assert!(matches!(Task::from_json(&bad), Err(TaskLoadError::Parse(_))));
    }
}
