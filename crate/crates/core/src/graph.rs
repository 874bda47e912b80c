//! Labeled, undirected, multi-relational graphs.
//!
//! Vertices are the dense ids `0..n`. Every relation is an undirected simple
//! edge set stored as a compressed sparse row table whose per-vertex neighbor
//! lists are sorted ascending. Graphs are immutable once built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex label. Labels are natural numbers.
pub type Label = u32;

/// One undirected edge set in CSR form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    /// Builds the symmetric adjacency of `edges` over `n` vertices.
    ///
    /// Rejects self-loops, out-of-range endpoints and repeated edges
    /// (in either orientation).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {u}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0usize; offsets[n]];
        for &(u, v) in edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        for v in 0..n {
            let list = &mut targets[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({v}, {})",
                    w[0]
                )));
            }
        }
        Ok(Adjacency { offsets, targets })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }
}

/// A labeled graph with `r` undirected relations over the same vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiRelGraph {
    relations: Vec<Adjacency>,
    labels: Vec<Label>,
}

impl MultiRelGraph {
    /// `relations[i]` lists the edges of relation `i`.
    pub fn new(n: usize, relations: &[Vec<(usize, usize)>], labels: Vec<Label>) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {n} vertices",
                labels.len()
            )));
        }
        let relations = relations
            .iter()
            .map(|edges| Adjacency::from_edges(n, edges))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiRelGraph { relations, labels })
    }

    /// Same as [`MultiRelGraph::new`] with every label set to 0.
    pub fn unlabeled(n: usize, relations: &[Vec<(usize, usize)>]) -> Result<Self> {
        Self::new(n, relations, vec![0; n])
    }

    pub(crate) fn from_parts(relations: Vec<Adjacency>, labels: Vec<Label>) -> Self {
        debug_assert!(relations.iter().all(|a| a.vertex_count() == labels.len()));
        MultiRelGraph { relations, labels }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> Label {
        self.labels[v]
    }

    pub fn relation(&self, i: usize) -> &Adjacency {
        &self.relations[i]
    }

    pub fn relations(&self) -> &[Adjacency] {
        &self.relations
    }

    /// `N_i(v)`, sorted ascending.
    #[inline]
    pub fn neighbors(&self, rel: usize, v: usize) -> &[usize] {
        self.relations[rel].neighbors(v)
    }

    pub fn edge_count(&self) -> usize {
        self.relations.iter().map(Adjacency::edge_count).sum()
    }

    pub fn has_uniform_labels(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] == w[1])
    }

    /// Relabels vertex `v` as `perm[v]`, carrying labels and relations along.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count();
        check_permutation(perm, n)?;
        let mut labels = vec![0; n];
        for v in 0..n {
            labels[perm[v]] = self.labels[v];
        }
        let relations = self
            .relations
            .iter()
            .map(|a| {
                let edges: Vec<_> = a.edges().map(|(u, v)| (perm[u], perm[v])).collect();
                Adjacency::from_edges(n, &edges)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiRelGraph { relations, labels })
    }

    pub fn to_dump(&self) -> GraphDump {
        GraphDump {
            n: self.vertex_count(),
            r: self.relation_count(),
            labels: self.labels.clone(),
            relations: self
                .relations
                .iter()
                .map(|a| a.edges().map(|(u, v)| [u, v]).collect())
                .collect(),
        }
    }

    pub fn from_dump(dump: &GraphDump) -> Result<Self> {
        if dump.relations.len() != dump.r {
            return Err(Error::InvalidGraph(format!(
                "r = {} but {} relation lists",
                dump.r,
                dump.relations.len()
            )));
        }
        let relations: Vec<Vec<(usize, usize)>> = dump
            .relations
            .iter()
            .map(|edges| edges.iter().map(|&[u, v]| (u, v)).collect())
            .collect();
        Self::new(dump.n, &relations, dump.labels.clone())
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::contract(format!(
            "permutation of length {} for {n} vertices",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::contract("not a permutation"));
        }
    }
    Ok(())
}

/// A labeled graph with a single edge relation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    adjacency: Adjacency,
    labels: Vec<Label>,
}

impl LabeledGraph {
    pub fn new(n: usize, edges: &[(usize, usize)], labels: Vec<Label>) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {n} vertices",
                labels.len()
            )));
        }
        Ok(LabeledGraph {
            adjacency: Adjacency::from_edges(n, edges)?,
            labels,
        })
    }

    pub fn unlabeled(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges, vec![0; n])
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.adjacency.neighbors(v)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }

    /// The same graph viewed as a multi-relational graph with `r = 1`.
    pub fn to_multi(&self) -> MultiRelGraph {
        MultiRelGraph::from_parts(vec![self.adjacency.clone()], self.labels.clone())
    }
}

impl From<LabeledGraph> for MultiRelGraph {
    fn from(g: LabeledGraph) -> Self {
        MultiRelGraph::from_parts(vec![g.adjacency], g.labels)
    }
}

/// Read access shared by [`MultiRelGraph`] and [`LabeledGraph`] (the latter
/// as a single relation).
pub trait RelationalView: Sync {
    fn vertex_count(&self) -> usize;
    fn relation_count(&self) -> usize;
    fn relation(&self, i: usize) -> &Adjacency;
    fn label(&self, v: usize) -> Label;
}

impl RelationalView for MultiRelGraph {
    fn vertex_count(&self) -> usize {
        self.labels.len()
    }
    fn relation_count(&self) -> usize {
        self.relations.len()
    }
    fn relation(&self, i: usize) -> &Adjacency {
        &self.relations[i]
    }
    fn label(&self, v: usize) -> Label {
        self.labels[v]
    }
}

impl RelationalView for LabeledGraph {
    fn vertex_count(&self) -> usize {
        self.labels.len()
    }
    fn relation_count(&self) -> usize {
        1
    }
    fn relation(&self, i: usize) -> &Adjacency {
        assert_eq!(i, 0, "labeled graphs have a single relation");
        &self.adjacency
    }
    fn label(&self, v: usize) -> Label {
        self.labels[v]
    }
}

/// Forgets relation types: the edge set is the union of all relations.
pub fn union_graph(g: &MultiRelGraph) -> LabeledGraph {
    let n = g.vertex_count();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    for v in 0..n {
        let start = targets.len();
        for a in g.relations() {
            targets.extend_from_slice(a.neighbors(v));
        }
        let list = &mut targets[start..];
        list.sort_unstable();
        let mut write = start;
        for read in start..targets.len() {
            if write == start || targets[write - 1] != targets[read] {
                targets[write] = targets[read];
                write += 1;
            }
        }
        targets.truncate(write);
        offsets.push(targets.len());
    }
    LabeledGraph {
        adjacency: Adjacency { offsets, targets },
        labels: g.labels().to_vec(),
    }
}

/// JSON form: `{n, r, labels, relations}` with every edge written as `[u, v]`, `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDump {
    pub n: usize,
    pub r: usize,
    pub labels: Vec<Label>,
    pub relations: Vec<Vec<[usize; 2]>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_rel() -> MultiRelGraph {
        MultiRelGraph::unlabeled(4, &[vec![(0, 1), (1, 2)], vec![(0, 1), (2, 3)]]).unwrap()
    }

    #[test]
    fn neighbor_lists_are_sorted_and_symmetric() {
        let g = MultiRelGraph::unlabeled(4, &[vec![(3, 0), (0, 1), (2, 0)]]).unwrap();
        assert_eq!(g.neighbors(0, 0), &[1, 2, 3]);
        for v in 0..4 {
            for &u in g.neighbors(0, v) {
                assert!(g.relation(0).contains(u, v));
            }
        }
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(MultiRelGraph::unlabeled(2, &[vec![(1, 1)]]).is_err());
        assert!(MultiRelGraph::unlabeled(2, &[vec![(0, 1), (1, 0)]]).is_err());
        assert!(MultiRelGraph::unlabeled(2, &[vec![(0, 2)]]).is_err());
        assert!(MultiRelGraph::new(2, &[vec![(0, 1)]], vec![0]).is_err());
    }

    #[test]
    fn union_dedups_across_relations() {
        let u = union_graph(&two_rel());
        assert_eq!(u.vertex_count(), 4);
        assert_eq!(u.edge_count(), 3);
        assert_eq!(u.neighbors(0), &[1]);
        assert_eq!(u.neighbors(2), &[1, 3]);
    }

    #[test]
    fn union_of_identical_relations_is_idempotent() {
        let e = vec![(0, 1), (1, 2), (2, 3)];
        let g = MultiRelGraph::unlabeled(4, &[e.clone(), e.clone()]).unwrap();
        assert_eq!(union_graph(&g).edge_count(), 3);
        let single = MultiRelGraph::unlabeled(4, &[e]).unwrap();
        assert_eq!(union_graph(&single).to_multi(), single);
    }

    #[test]
    fn dump_round_trip() {
        let g = two_rel();
        let dump = g.to_dump();
        assert!(dump.relations.iter().flatten().all(|[u, v]| u < v));
        let json = serde_json::to_string(&dump).unwrap();
        let back: GraphDump = serde_json::from_str(&json).unwrap();
        assert_eq!(MultiRelGraph::from_dump(&back).unwrap(), g);
    }

    #[test]
    fn permutation_carries_labels() {
        let g = MultiRelGraph::new(3, &[vec![(0, 1)]], vec![5, 6, 7]).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[6, 7, 5]);
        assert!(p.relation(0).contains(2, 0));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }
}
