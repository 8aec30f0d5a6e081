//! Connected components and reduced GF(2) homology of simplicial complexes.
//!
//! Path-connectivity of a geometric realization is decided on the 1-skeleton
//! graph. Reduced Betti numbers come from ranks of boundary matrices.

pub mod gf2;
mod union_find;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::simplicial::Complex;
pub use gf2::BitMatrix;
pub use union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnectivityError {
    #[error("dimension {requested} out of range for a complex of dimension {dimension}")]
    DimensionOutOfRange { requested: usize, dimension: isize },
}

/// Reduced Betti numbers b̃_0..b̃_k together with the component count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiReport {
    pub reduced_betti: Vec<usize>,
    pub components: usize,
}

impl BettiReport {
    /// True when b̃_0..b̃_{k} all vanish, the homological shadow of
    /// k-connectedness. Exact for k = 0.
    pub fn homologically_connected_through(&self, k: usize) -> bool {
        self.reduced_betti.len() > k && self.reduced_betti[..=k].iter().all(|&b| b == 0)
    }
}

/// Vertex partition by reachability along edges. Components are sorted by
/// their smallest vertex.
pub fn connected_components<V: Ord + Clone>(k: &Complex<V>) -> Vec<BTreeSet<V>> {
    let (vertices, mut uf) = skeleton_union_find(k);
    let mut groups: BTreeMap<usize, BTreeSet<V>> = BTreeMap::new();
    for (i, v) in vertices.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().insert(v.clone());
    }
    let mut comps: Vec<BTreeSet<V>> = groups.into_values().collect();
    comps.sort();
    comps
}

/// Edges of a spanning forest of the 1-skeleton, chosen greedily in
/// canonical edge order. A complex is connected iff this has
/// `|V| - 1` edges.
pub fn spanning_forest<V: Ord + Clone>(k: &Complex<V>) -> Vec<(V, V)> {
    let vertices: Vec<V> = k.vertices().into_iter().collect();
    let index: BTreeMap<&V, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut uf = UnionFind::new(vertices.len());
    let mut tree = Vec::new();
    for e in k.simplices_of_dim(1) {
        let (a, b) = (&e.vertices()[0], &e.vertices()[1]);
        if uf.union(index[a], index[b]) {
            tree.push((a.clone(), b.clone()));
        }
    }
    tree
}

fn skeleton_union_find<V: Ord + Clone>(k: &Complex<V>) -> (Vec<V>, UnionFind) {
    let vertices: Vec<V> = k.vertices().into_iter().collect();
    let index: BTreeMap<&V, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut uf = UnionFind::new(vertices.len());
    for facet in k.facets() {
        // Any spanning path through a facet's vertices joins them.
        for w in facet.vertices().windows(2) {
            uf.union(index[&w[0]], index[&w[1]]);
        }
    }
    (vertices, uf)
}

/// Boundary operator from k-chains to (k-1)-chains. Rows are the
/// (k-1)-simplices and columns the k-simplices, both in canonical order.
pub fn boundary_matrix<V: Ord + Clone>(
    k: &Complex<V>,
    dim: usize,
) -> Result<BitMatrix, ConnectivityError> {
    if dim == 0 || dim as isize > k.dimension() {
        return Err(ConnectivityError::DimensionOutOfRange {
            requested: dim,
            dimension: k.dimension(),
        });
    }
    Ok(boundary_unchecked(k, dim))
}

fn boundary_unchecked<V: Ord + Clone>(k: &Complex<V>, dim: usize) -> BitMatrix {
    let rows = k.simplices_of_dim(dim - 1);
    let cols = k.simplices_of_dim(dim);
    let row_index: BTreeMap<_, usize> = rows.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut m = BitMatrix::zeros(rows.len(), cols.len());
    for (c, s) in cols.iter().enumerate() {
        for face in s.boundary_faces() {
            m.set(row_index[&face], c, true);
        }
    }
    m
}

/// Reduced Betti numbers over GF(2) for dimensions `0..=up_to`.
pub fn reduced_betti<V: Ord + Clone>(
    k: &Complex<V>,
    up_to: usize,
) -> Result<BettiReport, ConnectivityError> {
    let dim = k.dimension();
    if up_to as isize > dim {
        return Err(ConnectivityError::DimensionOutOfRange {
            requested: up_to,
            dimension: dim,
        });
    }
    // ranks[j] = rank of the boundary map out of dimension j; the augmentation
    // map out of dimension 0 has rank 1 on a nonempty complex.
    let mut ranks = vec![0usize; up_to + 2];
    ranks[0] = 1;
    for (j, slot) in ranks.iter_mut().enumerate().skip(1) {
        if j as isize <= dim {
            *slot = boundary_unchecked(k, j).rank();
        }
    }
    let f = k.f_vector();
    let reduced_betti = (0..=up_to)
        .map(|j| f[j] - ranks[j] - ranks[j + 1])
        .collect();
    Ok(BettiReport {
        reduced_betti,
        components: connected_components(k).len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(lists: &[&[u32]]) -> Complex<u32> {
        Complex::from_vertex_lists(lists.iter().map(|l| l.iter().copied())).unwrap()
    }

    #[test]
    fn components_of_simple_complexes() {
        assert_eq!(connected_components(&cx(&[&[0], &[1]])).len(), 2);
        assert_eq!(connected_components(&cx(&[&[0, 1], &[1, 2]])).len(), 1);
        let comps = connected_components(&cx(&[&[3, 4, 5], &[0, 1]]));
        assert_eq!(comps, vec![BTreeSet::from([0, 1]), BTreeSet::from([3, 4, 5])]);
    }

    #[test]
    fn single_edge_boundary() {
        let m = boundary_matrix(&cx(&[&[0, 1]]), 1).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 1));
        assert!(m.get(0, 0) && m.get(1, 0));
    }

    #[test]
    fn boundary_dimension_guard() {
        let k = cx(&[&[0, 1]]);
        assert!(boundary_matrix(&k, 0).is_err());
        assert_eq!(
            boundary_matrix(&k, 2).unwrap_err(),
            ConnectivityError::DimensionOutOfRange {
                requested: 2,
                dimension: 1
            }
        );
    }

    #[test]
    fn circle_homology() {
        let circle = cx(&[&[0, 1], &[1, 2], &[0, 2]]);
        assert_eq!(boundary_matrix(&circle, 1).unwrap().rank(), 2);
        let r = reduced_betti(&circle, 1).unwrap();
        assert_eq!(r.reduced_betti, vec![0, 1]);
        assert_eq!(r.components, 1);
    }

    #[test]
    fn sphere_homology() {
        let sphere = cx(&[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]]);
        assert_eq!(reduced_betti(&sphere, 2).unwrap().reduced_betti, vec![0, 0, 1]);
    }

    #[test]
    fn disjoint_points() {
        let r = reduced_betti(&cx(&[&[0], &[1], &[2]]), 0).unwrap();
        assert_eq!(r.reduced_betti, vec![2]);
        assert_eq!(r.components, 3);
        assert!(!r.homologically_connected_through(0));
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let k = cx(&[&[0, 1, 2, 3], &[3, 4, 5]]);
        for d in 1..3 {
            let a = boundary_matrix(&k, d).unwrap();
            let b = boundary_matrix(&k, d + 1).unwrap();
            assert!(a.mul(&b).is_zero());
        }
    }

    #[test]
    fn spanning_forest_size() {
        let k = cx(&[&[0, 1, 2], &[5, 6]]);
        assert_eq!(spanning_forest(&k).len(), 3);
        assert_eq!(spanning_forest(&k), vec![(0, 1), (0, 2), (5, 6)]);
    }
}
