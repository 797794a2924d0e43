//! Weighted dual graphs of resolutions: intersection matrices, blow-ups and
//! blow-downs, minimal models and cross-resolution matching.
//!
//! Vertices are exceptional curves carrying their self-intersection and
//! genus; an edge `{i, j}` records the intersection number `(E_i . E_j)`.
//! Vertex order is part of a graph's identity: `blow_up` appends and
//! `contract_vertex` removes, so the pair is an exact inverse.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest graph `matrices_match` will search.
pub const MAX_MATCH_VERTICES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u32),
    #[error("edge {0}-{0} is a loop")]
    SelfLoop(u32),
    #[error("edge {0}-{1} has multiplicity 0")]
    ZeroMultiplicity(u32, u32),
    #[error(
        "vertex {id} is not contractible (self-intersection {self_intersection}, genus {genus})"
    )]
    NotContractible {
        id: u32,
        self_intersection: i64,
        genus: u32,
    },
    #[error("curves {0} and {1} do not meet")]
    NoIntersection(u32, u32),
    #[error("point data inconsistent with the graph: {0}")]
    InconsistentPoints(String),
    #[error("graph with {size} vertices exceeds the matching limit of {max}")]
    TooLarge { size: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u32,
    #[serde(rename = "self")]
    pub self_intersection: i64,
    #[serde(default)]
    pub genus: u32,
    #[serde(default)]
    pub label: String,
}

impl Vertex {
    pub fn new(id: u32, self_intersection: i64, genus: u32) -> Self {
        Vertex {
            id,
            self_intersection,
            genus,
            label: format!("E{id}"),
        }
    }

    /// Smooth rational curve with self-intersection -1.
    pub fn is_contractible(&self) -> bool {
        self.genus == 0 && self.self_intersection == -1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub i: u32,
    pub j: u32,
    #[serde(default = "one")]
    pub mult: u32,
}

fn one() -> u32 {
    1
}

/// A point of the resolved surface and the exceptional curves through it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointIncidence {
    pub point: String,
    pub curves: Vec<u32>,
}

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointIncidence>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct DualGraph {
    vertices: Vec<Vertex>,
    edges: BTreeMap<(u32, u32), u32>,
}

fn key(i: u32, j: u32) -> (u32, u32) {
    (i.min(j), i.max(j))
}

impl TryFrom<GraphFile> for DualGraph {
    type Error = GraphError;

    fn try_from(f: GraphFile) -> Result<Self, Self::Error> {
        DualGraph::new(f.vertices, &f.edges)
    }
}

impl From<DualGraph> for GraphFile {
    fn from(g: DualGraph) -> Self {
        g.to_file(None)
    }
}

impl DualGraph {
    /// Repeated edges between the same pair are summed.
    pub fn new(vertices: Vec<Vertex>, edges: &[EdgeRecord]) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.id) {
                return Err(GraphError::DuplicateVertex(v.id));
            }
        }
        let mut map = BTreeMap::new();
        for e in edges {
            if e.i == e.j {
                return Err(GraphError::SelfLoop(e.i));
            }
            for id in [e.i, e.j] {
                if !seen.contains(&id) {
                    return Err(GraphError::UnknownVertex(id));
                }
            }
            if e.mult == 0 {
                return Err(GraphError::ZeroMultiplicity(e.i, e.j));
            }
            *map.entry(key(e.i, e.j)).or_insert(0) += e.mult;
        }
        Ok(DualGraph {
            vertices,
            edges: map,
        })
    }

    /// Chain of curves with the given self-intersections, genus 0, ids `1..`.
    pub fn chain(self_intersections: &[i64]) -> Self {
        let vertices = self_intersections
            .iter()
            .enumerate()
            .map(|(k, s)| Vertex::new(k as u32 + 1, *s, 0))
            .collect();
        let edges: Vec<EdgeRecord> = (1..self_intersections.len() as u32)
            .map(|i| EdgeRecord {
                i,
                j: i + 1,
                mult: 1,
            })
            .collect();
        DualGraph::new(vertices, &edges).expect("valid chain")
    }

    /// The `A_n` configuration: a chain of `n` rational `-2` curves.
    pub fn a_n(n: usize) -> Self {
        Self::chain(&vec![-2; n])
    }

    pub fn to_file(&self, points: Option<Vec<PointIncidence>>) -> GraphFile {
        GraphFile {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|(&(i, j), &mult)| EdgeRecord { i, j, mult })
                .collect(),
            points,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn ids(&self) -> Vec<u32> {
        self.vertices.iter().map(|v| v.id).collect()
    }

    pub fn vertex(&self, id: u32) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    fn require(&self, id: u32) -> Result<&Vertex, GraphError> {
        self.vertex(id).ok_or(GraphError::UnknownVertex(id))
    }

    /// `(E_i . E_j)` for `i != j`.
    pub fn intersection(&self, i: u32, j: u32) -> u32 {
        if i == j {
            return 0;
        }
        self.edges.get(&key(i, j)).copied().unwrap_or(0)
    }

    /// Nonzero `((i, j), (E_i . E_j))` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, *v))
    }

    /// Sum of intersection numbers with the other curves.
    pub fn degree(&self, id: u32) -> u32 {
        self.edges
            .iter()
            .filter(|((a, b), _)| *a == id || *b == id)
            .map(|(_, m)| *m)
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let Some(first) = self.vertices.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([first.id]);
        let mut stack = vec![first.id];
        while let Some(v) = stack.pop() {
            for &(a, b) in self.edges.keys() {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if seen.insert(other) {
                    stack.push(other);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    fn next_id(&self) -> u32 {
        self.vertices
            .iter()
            .map(|v| v.id)
            .max()
            .map_or(1, |m| m + 1)
    }
}

/// Symmetric matrix of intersection numbers, rows in vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionMatrix {
    pub ids: Vec<u32>,
    pub entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn size(&self) -> usize {
        self.ids.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

pub fn intersection_matrix(g: &DualGraph) -> IntersectionMatrix {
    let ids = g.ids();
    let entries = ids
        .iter()
        .map(|&i| {
            ids.iter()
                .map(|&j| {
                    if i == j {
                        g.vertex(i).expect("id").self_intersection
                    } else {
                        i64::from(g.intersection(i, j))
                    }
                })
                .collect()
        })
        .collect();
    IntersectionMatrix { ids, entries }
}

/// Leading principal minors `D_1, ..., D_n`, computed exactly by fraction-free
/// elimination. `None` once a zero pivot appears (that minor is zero).
fn leading_minors(m: &IntersectionMatrix) -> Vec<Option<BigInt>> {
    let n = m.size();
    let mut a: Vec<Vec<BigInt>> = m
        .entries
        .iter()
        .map(|r| r.iter().map(|v| BigInt::from(*v)).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            out.push(Some(BigInt::zero()));
            out.extend(std::iter::repeat_n(None, n - k - 1));
            return out;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        out.push(Some(a[k][k].clone()));
        prev = a[k][k].clone();
    }
    out
}

/// Sylvester's criterion: `(-1)^k D_k > 0` for every leading minor.
pub fn is_negative_definite(m: &IntersectionMatrix) -> bool {
    leading_minors(m).iter().enumerate().all(|(k, d)| match d {
        Some(d) if k % 2 == 0 => d.is_negative(),
        Some(d) => d.is_positive(),
        None => false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Goodness {
    VeryGood,
    Good,
    Neither,
}

/// Good: no point on three curves (and, in this model, transversality is
/// assumed). Very good: additionally no two curves meet twice.
///
/// Without point data every edge of multiplicity `d` is read as `d`
/// distinct points on exactly two curves.
pub fn check_goodness(
    g: &DualGraph,
    points: Option<&[PointIncidence]>,
) -> Result<Goodness, GraphError> {
    let very = g.edges().all(|(_, m)| m <= 1);
    let Some(points) = points else {
        return Ok(if very {
            Goodness::VeryGood
        } else {
            Goodness::Good
        });
    };
    let mut per_pair: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut triple = false;
    for p in points {
        let curves: BTreeSet<u32> = p.curves.iter().copied().collect();
        if curves.is_empty() {
            return Err(GraphError::InconsistentPoints(format!(
                "point {} lies on no curve",
                p.point
            )));
        }
        for &c in &curves {
            g.require(c)?;
        }
        triple |= curves.len() >= 3;
        let list: Vec<u32> = curves.into_iter().collect();
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                *per_pair.entry(key(i, j)).or_insert(0) += 1;
            }
        }
    }
    for (&(i, j), &c) in &per_pair {
        if g.intersection(i, j) != c {
            return Err(GraphError::InconsistentPoints(format!(
                "curves {i} and {j} share {c} listed points but (E_{i}.E_{j}) = {}",
                g.intersection(i, j)
            )));
        }
    }
    for ((i, j), m) in g.edges() {
        if !per_pair.contains_key(&(i, j)) {
            return Err(GraphError::InconsistentPoints(format!(
                "edge {i}-{j} of multiplicity {m} has no listed points"
            )));
        }
    }
    Ok(if triple {
        Goodness::Neither
    } else if very {
        Goodness::VeryGood
    } else {
        Goodness::Good
    })
}

/// Castelnuovo blow-down of a rational `-1` curve `v`:
/// `(E_i.E_j) += (E_i.E_v)(E_j.E_v)` and `E_i^2 += (E_i.E_v)^2`.
pub fn contract_vertex(g: &DualGraph, v: u32) -> Result<DualGraph, GraphError> {
    let vert = g.require(v)?;
    if !vert.is_contractible() {
        return Err(GraphError::NotContractible {
            id: v,
            self_intersection: vert.self_intersection,
            genus: vert.genus,
        });
    }
    let meet: BTreeMap<u32, u32> = g
        .vertices
        .iter()
        .filter(|w| w.id != v)
        .map(|w| (w.id, g.intersection(w.id, v)))
        .filter(|(_, m)| *m > 0)
        .collect();
    let vertices = g
        .vertices
        .iter()
        .filter(|w| w.id != v)
        .map(|w| {
            let mut w = w.clone();
            let e = i64::from(meet.get(&w.id).copied().unwrap_or(0));
            w.self_intersection += e * e;
            w
        })
        .collect();
    let mut edges: BTreeMap<(u32, u32), u32> = g
        .edges
        .iter()
        .filter(|((a, b), _)| *a != v && *b != v)
        .map(|(k, m)| (*k, *m))
        .collect();
    let touched: Vec<(u32, u32)> = meet.iter().map(|(k, m)| (*k, *m)).collect();
    for (a, &(i, mi)) in touched.iter().enumerate() {
        for &(j, mj) in &touched[a + 1..] {
            *edges.entry(key(i, j)).or_insert(0) += mi * mj;
        }
    }
    Ok(DualGraph { vertices, edges })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlowUpLocus {
    /// A point on curve `i` not on any other curve.
    OnCurve { i: u32 },
    /// One of the intersection points of curves `i` and `j`.
    Intersection { i: u32, j: u32 },
}

/// Blow-up of a point; the new rational `-1` curve is appended with the next
/// free id.
pub fn blow_up(g: &DualGraph, locus: BlowUpLocus) -> Result<DualGraph, GraphError> {
    let id = g.next_id();
    let mut out = g.clone();
    let centers = match locus {
        BlowUpLocus::OnCurve { i } => {
            g.require(i)?;
            vec![i]
        }
        BlowUpLocus::Intersection { i, j } => {
            g.require(i)?;
            g.require(j)?;
            let k = key(i, j);
            match out.edges.get_mut(&k) {
                Some(m) if i != j => {
                    *m -= 1;
                    if *m == 0 {
                        out.edges.remove(&k);
                    }
                }
                _ => return Err(GraphError::NoIntersection(i, j)),
            }
            vec![i, j]
        }
    };
    for c in &centers {
        let w = out
            .vertices
            .iter_mut()
            .find(|w| w.id == *c)
            .expect("checked");
        w.self_intersection -= 1;
        out.edges.insert(key(*c, id), 1);
    }
    out.vertices.push(Vertex::new(id, -1, 0));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinimalModel {
    pub graph: DualGraph,
    /// Original vertices whose strict transforms survive.
    pub essential: BTreeSet<u32>,
    /// Ids in the order they were contracted.
    pub contracted: Vec<u32>,
}

/// Contracts rational `-1` curves (first in vertex order each time) until
/// none is left.
pub fn minimal_model(g: &DualGraph) -> MinimalModel {
    let mut cur = g.clone();
    let mut contracted = Vec::new();
    while let Some(v) = cur
        .vertices
        .iter()
        .find(|v| v.is_contractible())
        .map(|v| v.id)
    {
        cur = contract_vertex(&cur, v).expect("contractible");
        contracted.push(v);
    }
    let essential = cur.ids().into_iter().collect();
    MinimalModel {
        graph: cur,
        essential,
        contracted,
    }
}

/// Every terminal outcome over all contraction orders. Exponential; meant
/// for checking confluence on small graphs.
pub fn minimal_models_all_orders(g: &DualGraph) -> Vec<MinimalModel> {
    fn go(g: &DualGraph, path: &mut Vec<u32>, out: &mut Vec<MinimalModel>) {
        let choices: Vec<u32> = g
            .vertices
            .iter()
            .filter(|v| v.is_contractible())
            .map(|v| v.id)
            .collect();
        if choices.is_empty() {
            out.push(MinimalModel {
                graph: g.clone(),
                essential: g.ids().into_iter().collect(),
                contracted: path.clone(),
            });
            return;
        }
        for v in choices {
            path.push(v);
            go(&contract_vertex(g, v).expect("contractible"), path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    go(g, &mut Vec::new(), &mut out);
    out
}

/// Number of exceptional curves on the minimal model.
pub fn count_nr(g: &DualGraph) -> usize {
    minimal_model(g).graph.len()
}

fn signature(g: &DualGraph, id: u32) -> (i64, u32, Vec<u32>) {
    let v = g.vertex(id).expect("id");
    let mut mults: Vec<u32> = g
        .vertices
        .iter()
        .map(|w| g.intersection(id, w.id))
        .filter(|m| *m > 0)
        .collect();
    mults.sort_unstable();
    (v.self_intersection, v.genus, mults)
}

/// Searches for a bijection `g1 -> g2` under which intersection matrices and
/// genera agree. Candidates are tried in `g2`'s vertex order.
pub fn matrices_match(
    g1: &DualGraph,
    g2: &DualGraph,
) -> Result<Option<BTreeMap<u32, u32>>, GraphError> {
    for g in [g1, g2] {
        if g.len() > MAX_MATCH_VERTICES {
            return Err(GraphError::TooLarge {
                size: g.len(),
                max: MAX_MATCH_VERTICES,
            });
        }
    }
    if g1.len() != g2.len() {
        return Ok(None);
    }
    let a = g1.ids();
    let b = g2.ids();
    let sa: Vec<_> = a.iter().map(|&id| signature(g1, id)).collect();
    let sb: Vec<_> = b.iter().map(|&id| signature(g2, id)).collect();

    fn go(
        k: usize,
        a: &[u32],
        b: &[u32],
        sa: &[(i64, u32, Vec<u32>)],
        sb: &[(i64, u32, Vec<u32>)],
        g1: &DualGraph,
        g2: &DualGraph,
        used: &mut [bool],
        image: &mut Vec<usize>,
    ) -> bool {
        if k == a.len() {
            return true;
        }
        for c in 0..b.len() {
            if used[c] || sa[k] != sb[c] {
                continue;
            }
            let consistent = image
                .iter()
                .enumerate()
                .all(|(prev, &pc)| g1.intersection(a[prev], a[k]) == g2.intersection(b[pc], b[c]));
            if !consistent {
                continue;
            }
            used[c] = true;
            image.push(c);
            if go(k + 1, a, b, sa, sb, g1, g2, used, image) {
                return true;
            }
            image.pop();
            used[c] = false;
        }
        false
    }

    let mut used = vec![false; b.len()];
    let mut image = Vec::with_capacity(a.len());
    if go(0, &a, &b, &sa, &sb, g1, g2, &mut used, &mut image) {
        Ok(Some(
            a.iter().zip(&image).map(|(&x, &c)| (x, b[c])).collect(),
        ))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    /// `(vertex of g1, vertex of g2)` pairs.
    pub bijection: Option<Vec<(u32, u32)>>,
    pub n_r_first: usize,
    pub n_r_second: usize,
    /// On a match: every matched pair is essential in both or in neither.
    pub essential_status_agrees: Option<bool>,
}

pub fn match_report(g1: &DualGraph, g2: &DualGraph) -> Result<MatchReport, GraphError> {
    let found = matrices_match(g1, g2)?;
    let (m1, m2) = (minimal_model(g1), minimal_model(g2));
    let essential_status_agrees = found.as_ref().map(|map| {
        map.iter()
            .all(|(x, y)| m1.essential.contains(x) == m2.essential.contains(y))
    });
    Ok(MatchReport {
        bijection: found.map(|m| m.into_iter().collect()),
        n_r_first: m1.graph.len(),
        n_r_second: m2.graph.len(),
        essential_status_agrees,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvarianceReport {
    pub matched: bool,
    pub bijection: Option<Vec<(u32, u32)>>,
    pub special_vertices: usize,
    pub generic_vertices: usize,
    pub n_r_special: usize,
    pub n_r_generic: usize,
    pub n_r_equal: bool,
    pub essential_status_agrees: Option<bool>,
    /// First invariant telling the two graphs apart when no match exists.
    pub distinguishing_invariant: Option<String>,
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

fn first_difference(a: &DualGraph, b: &DualGraph) -> String {
    if a.len() != b.len() {
        return format!("vertex count {} vs {}", a.len(), b.len());
    }
    let genera = |g: &DualGraph| sorted(g.vertices().iter().map(|v| v.genus).collect());
    if genera(a) != genera(b) {
        return format!("genus multiset {:?} vs {:?}", genera(a), genera(b));
    }
    let diag = |g: &DualGraph| sorted(g.vertices().iter().map(|v| v.self_intersection).collect());
    if diag(a) != diag(b) {
        return format!("self-intersection multiset {:?} vs {:?}", diag(a), diag(b));
    }
    let mults = |g: &DualGraph| sorted(g.edges().map(|(_, m)| m).collect());
    if mults(a) != mults(b) {
        return format!(
            "intersection-number multiset {:?} vs {:?}",
            mults(a),
            mults(b)
        );
    }
    let degs = |g: &DualGraph| sorted(g.ids().into_iter().map(|i| g.degree(i)).collect());
    if degs(a) != degs(b) {
        return format!("degree sequence {:?} vs {:?}", degs(a), degs(b));
    }
    "no bijection matches the intersection matrices".into()
}

/// Compares the resolution graphs of the special and generic fibers; a match
/// transfers `N_r` from one fiber to the other.
pub fn family_invariance_check(
    special: &DualGraph,
    generic: &DualGraph,
) -> Result<InvarianceReport, GraphError> {
    let m = match_report(special, generic)?;
    let matched = m.bijection.is_some();
    Ok(InvarianceReport {
        matched,
        bijection: m.bijection,
        special_vertices: special.len(),
        generic_vertices: generic.len(),
        n_r_special: m.n_r_first,
        n_r_generic: m.n_r_second,
        n_r_equal: m.n_r_first == m.n_r_second,
        essential_status_agrees: m.essential_status_agrees,
        distinguishing_invariant: (!matched).then(|| first_difference(special, generic)),
    })
}
