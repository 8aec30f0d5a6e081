use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use super::{Complex, Simplex};

/// Vertex of an iterated barycentric subdivision. The index points into the
/// carrier table of the owning [`Subdivision`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SubdivisionVertex(pub usize);

impl fmt::Display for SubdivisionVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// `Bary^N K` together with the carrier of each new vertex in the original
/// complex: the smallest simplex of `K` containing its geometric position.
#[derive(Clone, Debug)]
pub struct Subdivision<V> {
    pub complex: Complex<SubdivisionVertex>,
    carriers: Vec<Simplex<V>>,
    depth: usize,
}

impl<V: Ord + Clone> Subdivision<V> {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        self.carriers.len()
    }

    pub fn carrier_of(&self, u: SubdivisionVertex) -> &Simplex<V> {
        &self.carriers[u.0]
    }

    /// Carrier of a subdivision simplex: the union of its vertices' carriers.
    /// For a genuine simplex of the subdivision these form a chain, so the
    /// union is the largest of them.
    pub fn carrier_of_simplex(&self, s: &Simplex<SubdivisionVertex>) -> Simplex<V> {
        let mut it = s.vertices().iter();
        let first = self.carrier_of(*it.next().expect("simplices are nonempty")).clone();
        it.fold(first, |acc, u| acc.union(self.carrier_of(*u)))
    }

    pub fn carriers(&self) -> impl Iterator<Item = (SubdivisionVertex, &Simplex<V>)> {
        self.carriers
            .iter()
            .enumerate()
            .map(|(i, c)| (SubdivisionVertex(i), c))
    }
}

/// Applies barycentric subdivision `depth` times.
///
/// At depth 0 the complex is relabeled (vertices numbered in canonical
/// order) and every vertex is its own carrier.
pub fn barycentric_subdivide<V: Ord + Clone>(k: &Complex<V>, depth: usize) -> Subdivision<V> {
    let originals: Vec<V> = k.vertices().into_iter().collect();
    let index: BTreeMap<&V, usize> = originals.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let complex = Complex::from_facets_unchecked(
        k.facets()
            .iter()
            .map(|f| f.map(|v| SubdivisionVertex(index[v])))
            .collect(),
    );
    let mut sd = Subdivision {
        complex,
        carriers: originals.iter().cloned().map(Simplex::vertex).collect(),
        depth: 0,
    };
    for _ in 0..depth {
        sd = subdivide_once(&sd);
    }
    sd
}

fn subdivide_once<V: Ord + Clone>(prev: &Subdivision<V>) -> Subdivision<V> {
    // One new vertex per simplex of the previous complex.
    let simplices: Vec<Simplex<SubdivisionVertex>> = prev.complex.simplices().into_iter().collect();
    let carriers: Vec<Simplex<V>> = simplices
        .iter()
        .map(|s| prev.carrier_of_simplex(s))
        .collect();
    let id: BTreeMap<&Simplex<SubdivisionVertex>, usize> =
        simplices.iter().enumerate().map(|(i, s)| (s, i)).collect();

    // Maximal flags of a facet correspond to orderings of its vertices.
    let mut facets = BTreeSet::new();
    for facet in prev.complex.facets() {
        for order in facet.vertices().iter().copied().permutations(facet.len()) {
            let mut chain = Vec::with_capacity(order.len());
            let mut prefix: Vec<SubdivisionVertex> = Vec::with_capacity(order.len());
            for u in order {
                let pos = prefix.binary_search(&u).unwrap_err();
                prefix.insert(pos, u);
                let face = Simplex::from_sorted_unchecked(prefix.clone());
                chain.push(SubdivisionVertex(id[&face]));
            }
            chain.sort();
            facets.insert(Simplex::from_sorted_unchecked(chain));
        }
    }
    Subdivision {
        complex: Complex::from_facets_unchecked(facets),
        carriers,
        depth: prev.depth + 1,
    }
}
