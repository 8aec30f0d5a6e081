use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ComplexError;

/// A nonempty, duplicate-free vertex set kept in canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex<V>(Vec<V>);

impl<V: Ord + Clone> Simplex<V> {
    /// Builds a simplex, rejecting empty input and repeated vertices.
    pub fn new(vertices: impl IntoIterator<Item = V>) -> Result<Self, ComplexError> {
        let mut vs: Vec<V> = vertices.into_iter().collect();
        if vs.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vs.sort();
        let before = vs.len();
        vs.dedup();
        if vs.len() != before {
            return Err(ComplexError::MalformedSimplex);
        }
        Ok(Simplex(vs))
    }

    /// Builds a simplex from a set; duplicates cannot occur.
    ///
    /// Returns `None` for the empty set.
    pub fn from_set(vertices: BTreeSet<V>) -> Option<Self> {
        if vertices.is_empty() {
            None
        } else {
            Some(Simplex(vertices.into_iter().collect()))
        }
    }

    pub fn vertex(v: V) -> Self {
        Simplex(vec![v])
    }

    pub(crate) fn from_sorted_unchecked(vs: Vec<V>) -> Self {
        debug_assert!(!vs.is_empty());
        debug_assert!(vs.windows(2).all(|w| w[0] < w[1]));
        Simplex(vs)
    }

    pub fn vertices(&self) -> &[V] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains_vertex(&self, v: &V) -> bool {
        self.0.binary_search(v).is_ok()
    }

    /// True if every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex<V>) -> bool {
        if self.len() > other.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// All nonempty faces, including `self`.
    pub fn faces(&self) -> impl Iterator<Item = Simplex<V>> + '_ {
        (1..=self.len()).flat_map(move |k| self.faces_of_size(k))
    }

    /// Faces with exactly `size` vertices, in lexicographic order.
    pub fn faces_of_size(&self, size: usize) -> impl Iterator<Item = Simplex<V>> + '_ {
        self.0
            .iter()
            .cloned()
            .combinations(size)
            .map(Simplex::from_sorted_unchecked)
    }

    /// Codimension-one faces. Empty for a vertex.
    pub fn boundary_faces(&self) -> Vec<Simplex<V>> {
        if self.len() == 1 {
            return Vec::new();
        }
        (0..self.len())
            .map(|skip| {
                let vs = self
                    .0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, v)| v.clone())
                    .collect();
                Simplex(vs)
            })
            .collect()
    }

    pub fn union(&self, other: &Simplex<V>) -> Simplex<V> {
        let set: BTreeSet<V> = self.0.iter().chain(other.0.iter()).cloned().collect();
        Simplex(set.into_iter().collect())
    }

    /// Vertex-wise image under `f`; coincident images collapse.
    pub fn map<W: Ord + Clone>(&self, f: impl Fn(&V) -> W) -> Simplex<W> {
        let set: BTreeSet<W> = self.0.iter().map(f).collect();
        Simplex(set.into_iter().collect())
    }
}

impl<V: fmt::Display> fmt::Display for Simplex<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl<V: Serialize> Serialize for Simplex<V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de, V: Deserialize<'de> + Ord + Clone> Deserialize<'de> for Simplex<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vs = Vec::<V>::deserialize(d)?;
        Simplex::new(vs).map_err(D::Error::custom)
    }
}

/// A finite abstract simplicial complex, stored by its inclusion-maximal
/// simplices. Every face of a facet is a member.
///
/// The void complex (no simplices at all) is representable; it shows up as
/// the image of a carrier that maps a simplex to nothing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Complex<V> {
    facets: BTreeSet<Simplex<V>>,
}

impl<V: Ord + Clone> Complex<V> {
    /// Builds a complex from a nonempty facet list, discarding duplicates and
    /// simplices dominated by another entry.
    pub fn new(facets: Vec<Simplex<V>>) -> Result<Self, ComplexError> {
        if facets.is_empty() {
            return Err(ComplexError::EmptyInput);
        }
        Ok(Self::from_simplices(facets))
    }

    /// Builds a complex from raw vertex lists.
    pub fn from_vertex_lists<I, J>(lists: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = V>,
    {
        let facets = lists
            .into_iter()
            .map(Simplex::new)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(facets)
    }

    pub fn void() -> Self {
        Complex {
            facets: BTreeSet::new(),
        }
    }

    /// Keeps only inclusion-maximal simplices. Accepts an empty iterator.
    pub fn from_simplices(simplices: impl IntoIterator<Item = Simplex<V>>) -> Self {
        let mut candidates: Vec<Simplex<V>> = simplices
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // Larger simplices first so each candidate only needs checking
        // against already-kept ones.
        candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut kept: Vec<Simplex<V>> = Vec::new();
        for c in candidates {
            if !kept.iter().any(|k| k.len() > c.len() && c.is_face_of(k)) {
                kept.push(c);
            }
        }
        Complex {
            facets: kept.into_iter().collect(),
        }
    }

    /// Caller guarantees that no entry is a face of another.
    pub(crate) fn from_facets_unchecked(facets: BTreeSet<Simplex<V>>) -> Self {
        Complex { facets }
    }

    /// The full closure of one simplex.
    pub fn closure(simplex: Simplex<V>) -> Self {
        Complex {
            facets: BTreeSet::from([simplex]),
        }
    }

    pub fn facets(&self) -> &BTreeSet<Simplex<V>> {
        &self.facets
    }

    pub fn is_void(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn vertices(&self) -> BTreeSet<V> {
        self.facets
            .iter()
            .flat_map(|f| f.vertices().iter().cloned())
            .collect()
    }

    /// Largest facet dimension; -1 for the void complex.
    pub fn dimension(&self) -> isize {
        self.facets
            .iter()
            .map(|f| f.dimension() as isize)
            .max()
            .unwrap_or(-1)
    }

    pub fn is_pure(&self) -> bool {
        self.facets.iter().map(Simplex::len).all_equal()
    }

    /// Membership under downward closure.
    pub fn contains(&self, simplex: &Simplex<V>) -> bool {
        self.facets.iter().any(|f| simplex.is_face_of(f))
    }

    pub fn contains_vertex(&self, v: &V) -> bool {
        self.facets.iter().any(|f| f.contains_vertex(v))
    }

    /// Every simplex of the complex, in canonical order.
    pub fn simplices(&self) -> BTreeSet<Simplex<V>> {
        self.facets.iter().flat_map(|f| f.faces()).collect()
    }

    /// Simplices of one dimension, in canonical order.
    pub fn simplices_of_dim(&self, k: usize) -> Vec<Simplex<V>> {
        let set: BTreeSet<Simplex<V>> = self
            .facets
            .iter()
            .filter(|f| f.len() > k)
            .flat_map(|f| f.faces_of_size(k + 1))
            .collect();
        set.into_iter().collect()
    }

    /// Simplex counts per dimension, starting at dimension 0.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for s in self.simplices() {
            *counts.entry(s.dimension()).or_default() += 1;
        }
        let top = self.dimension();
        (0..=top.max(-1))
            .map(|d| counts.get(&(d as usize)).copied().unwrap_or(0))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// All simplices of dimension at most `k`.
    pub fn skeleton(&self, k: usize) -> Complex<V> {
        if self.dimension() <= k as isize {
            return self.clone();
        }
        Complex::from_simplices(self.facets.iter().flat_map(|f| {
            if f.len() <= k + 1 {
                vec![f.clone()]
            } else {
                f.faces_of_size(k + 1).collect()
            }
        }))
    }

    /// All simplices whose vertices lie in `vertices`.
    pub fn induced_subcomplex(&self, vertices: &BTreeSet<V>) -> Result<Complex<V>, ComplexError> {
        if vertices.iter().any(|v| !self.contains_vertex(v)) {
            return Err(ComplexError::UnknownVertex);
        }
        Ok(Complex::from_simplices(self.facets.iter().filter_map(|f| {
            let kept: BTreeSet<V> = f
                .vertices()
                .iter()
                .filter(|v| vertices.contains(v))
                .cloned()
                .collect();
            Simplex::from_set(kept)
        })))
    }

    pub fn is_subcomplex_of(&self, other: &Complex<V>) -> bool {
        self.facets.iter().all(|f| other.contains(f))
    }

    /// Image complex under a vertex map.
    pub fn map_vertices<W: Ord + Clone>(&self, f: impl Fn(&V) -> W) -> Complex<W> {
        Complex::from_simplices(self.facets.iter().map(|s| s.map(&f)))
    }
}

impl<V: Serialize> Serialize for Complex<V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a, V: Serialize> {
            facets: &'a BTreeSet<Simplex<V>>,
        }
        Repr {
            facets: &self.facets,
        }
        .serialize(s)
    }
}

impl<'de, V: Deserialize<'de> + Ord + Clone> Deserialize<'de> for Complex<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "V: Deserialize<'de> + Ord + Clone")]
        struct Repr<V> {
            facets: Vec<Simplex<V>>,
        }
        let repr = Repr::<V>::deserialize(d)?;
        Ok(Complex::from_simplices(repr.facets))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(lists: &[&[u32]]) -> Complex<u32> {
        Complex::from_vertex_lists(lists.iter().map(|l| l.iter().copied())).unwrap()
    }

    #[test]
    fn path_of_two_edges() {
        let k = cx(&[&[0, 1], &[1, 2]]);
        assert_eq!(k.facets().len(), 2);
        assert_eq!(k.simplices().len(), 5);
        assert_eq!(k.f_vector(), vec![3, 2]);
    }

    #[test]
    fn dominated_face_is_absorbed() {
        let k = cx(&[&[0, 1], &[0]]);
        assert_eq!(k, cx(&[&[0, 1]]));
        let dup = cx(&[&[0, 1], &[1, 0]]);
        assert_eq!(dup.facets().len(), 1);
    }

    #[test]
    fn triangle_has_seven_faces() {
        let k = cx(&[&[0, 1, 2]]);
        // 2^3 - 1 nonempty subsets
        assert_eq!(k.simplices().len(), 7);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Complex::<u32>::new(vec![]).unwrap_err(),
            ComplexError::EmptyInput
        );
        assert_eq!(
            Simplex::new([1u32, 1]).unwrap_err(),
            ComplexError::MalformedSimplex
        );
        assert_eq!(
            Simplex::<u32>::new([]).unwrap_err(),
            ComplexError::EmptySimplex
        );
    }

    #[test]
    fn dimension_and_purity() {
        assert_eq!(cx(&[&[7]]).dimension(), 0);
        assert_eq!(cx(&[&[0, 1], &[2, 3, 4]]).dimension(), 2);
        assert!(!cx(&[&[0, 1], &[2]]).is_pure());
        assert!(cx(&[&[0, 1, 2]]).is_pure());
        assert_eq!(Complex::<u32>::void().dimension(), -1);
    }

    #[test]
    fn skeleton_of_triangle_is_its_boundary() {
        let k = cx(&[&[0, 1, 2]]);
        let s = k.skeleton(1);
        assert_eq!(s, cx(&[&[0, 1], &[1, 2], &[0, 2]]));
        assert_eq!(k.skeleton(2), k);
        assert_eq!(k.skeleton(5), k);
        assert_eq!(k.skeleton(0).f_vector(), vec![3]);
    }

    #[test]
    fn induced_subcomplex_cases() {
        let k = cx(&[&[0, 1, 2], &[3, 4, 5]]);
        let first = k.induced_subcomplex(&BTreeSet::from([0, 1, 2])).unwrap();
        assert_eq!(first, cx(&[&[0, 1, 2]]));
        let one = k.induced_subcomplex(&BTreeSet::from([4])).unwrap();
        assert_eq!(one, cx(&[&[4]]));
        assert_eq!(
            k.induced_subcomplex(&BTreeSet::from([9])).unwrap_err(),
            ComplexError::UnknownVertex
        );
        // Facet {0,1,2} restricted to {0,2} leaves the edge.
        let edge = k.induced_subcomplex(&BTreeSet::from([0, 2, 5])).unwrap();
        assert_eq!(edge, cx(&[&[0, 2], &[5]]));
    }

    #[test]
    fn face_relation() {
        let big = Simplex::new([1u32, 3, 5, 7]).unwrap();
        assert!(Simplex::new([3u32, 7]).unwrap().is_face_of(&big));
        assert!(!Simplex::new([3u32, 4]).unwrap().is_face_of(&big));
        assert!(!Simplex::new([8u32]).unwrap().is_face_of(&big));
        assert!(big.is_face_of(&big));
        assert_eq!(big.boundary_faces().len(), 4);
    }

    #[test]
    fn json_is_canonical() {
        let a = cx(&[&[2, 1], &[0, 1]]);
        let b = cx(&[&[1, 0], &[1, 2]]);
        let ja = serde_json::to_string(&a).unwrap();
        assert_eq!(ja, serde_json::to_string(&b).unwrap());
        assert_eq!(ja, r#"{"facets":[[0,1],[1,2]]}"#);
        let back: Complex<u32> = serde_json::from_str(&ja).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn euler_characteristic_of_circle_and_disk() {
        assert_eq!(cx(&[&[0, 1], &[1, 2], &[0, 2]]).euler_characteristic(), 0);
        assert_eq!(cx(&[&[0, 1, 2]]).euler_characteristic(), 1);
    }
}
