//! Bi-coloured 2d-trees built from word evolutions, and the Hasse diagram and
//! major graph derived from them.
//!
//! Nodes are breakpoints `k_a` / `k_b`. A breakpoint placed on the genome
//! segment `[u_a, v_b]` gets a type-a parent edge from `u_a` and a type-b parent
//! edge from `v_b`; the edge from the parent with the larger TD number is major.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::word::WordEvolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn offset(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
        })
    }
}

/// Breakpoint `td_side`. TD number 0 is reserved for the roots `0_a`, `0_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BreakpointId {
    pub td: u32,
    pub side: Side,
}

impl BreakpointId {
    pub const ROOT_A: BreakpointId = BreakpointId { td: 0, side: Side::A };
    pub const ROOT_B: BreakpointId = BreakpointId { td: 0, side: Side::B };

    pub fn new(td: u32, side: Side) -> Self {
        BreakpointId { td, side }
    }

    pub fn a(td: u32) -> Self {
        Self::new(td, Side::A)
    }

    pub fn b(td: u32) -> Self {
        Self::new(td, Side::B)
    }

    pub fn is_root(&self) -> bool {
        self.td == 0
    }

    /// Dense index `2·td + side`.
    pub fn index(&self) -> usize {
        2 * self.td as usize + self.side.offset()
    }

    pub fn from_index(i: usize) -> Self {
        let side = if i.is_multiple_of(2) { Side::A } else { Side::B };
        Self::new((i / 2) as u32, side)
    }

    pub fn partner(&self) -> Self {
        Self::new(self.td, self.side.opposite())
    }
}

impl fmt::Display for BreakpointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.td, self.side)
    }
}

impl FromStr for BreakpointId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            line: 1,
            column: 1,
            message: format!("bad breakpoint id {s:?}"),
        };
        let (td, side) = s.split_once('_').ok_or_else(bad)?;
        let td = td.parse().map_err(|_| bad())?;
        let side = match side {
            "a" => Side::A,
            "b" => Side::B,
            _ => return Err(bad()),
        };
        Ok(Self::new(td, side))
    }
}

impl Serialize for BreakpointId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BreakpointId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The two parental edges of a non-root node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParentEdges {
    pub a_parent: BreakpointId,
    pub b_parent: BreakpointId,
    /// Type of the major edge.
    pub major: Side,
}

impl ParentEdges {
    pub fn parent(&self, side: Side) -> BreakpointId {
        match side {
            Side::A => self.a_parent,
            Side::B => self.b_parent,
        }
    }

    pub fn major_parent(&self) -> BreakpointId {
        self.parent(self.major)
    }

    pub fn minor_parent(&self) -> BreakpointId {
        self.parent(self.major.opposite())
    }
}

/// Fence `k_a < k_b` between two breakpoints placed on the same segment,
/// together with their shared parents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fence {
    pub td: u32,
    pub a_parent: BreakpointId,
    pub b_parent: BreakpointId,
}

/// A 2d-tree with fences on `n` TDs: `2n + 2` nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdTree {
    n: u32,
    /// Indexed by [`BreakpointId::index`]; `None` for the two roots.
    parents: Vec<Option<ParentEdges>>,
    fences: Vec<Fence>,
}

pub fn build_2d_tree(evo: &WordEvolution) -> TdTree {
    let n = evo.td_count() as u32;
    let mut parents = vec![None; 2 * n as usize + 2];
    let mut fences = Vec::new();
    if n == 0 {
        return TdTree { n, parents, fences };
    }
    // Both parents of the first TD have TD number 0; 1_a takes 0_b as major
    // and 1_b takes 0_a.
    parents[BreakpointId::a(1).index()] = Some(ParentEdges {
        a_parent: BreakpointId::ROOT_A,
        b_parent: BreakpointId::ROOT_B,
        major: Side::B,
    });
    parents[BreakpointId::b(1).index()] = Some(ParentEdges {
        a_parent: BreakpointId::ROOT_A,
        b_parent: BreakpointId::ROOT_B,
        major: Side::A,
    });
    fences.push(Fence {
        td: 1,
        a_parent: BreakpointId::ROOT_A,
        b_parent: BreakpointId::ROOT_B,
    });

    for (i, choice) in evo.steps().iter().enumerate() {
        let k = i as u32 + 2;
        let word = evo.word(k as usize - 1).symbols();
        // segment s_i = [(c_i)_a, (c_{i+1})_b] with c_0 = c_{m+1} = 0
        let c = |j: usize| -> u32 {
            if j == 0 || j > word.len() {
                0
            } else {
                word[j - 1]
            }
        };
        let segment = |j: usize| -> ParentEdges {
            let (u, v) = (c(j), c(j + 1));
            assert_ne!(u, v, "segment endpoints share TD number {u}");
            ParentEdges {
                a_parent: BreakpointId::a(u),
                b_parent: BreakpointId::b(v),
                major: if u > v { Side::A } else { Side::B },
            }
        };
        let pa = segment(choice.a - 1);
        let pb = segment(choice.b);
        parents[BreakpointId::a(k).index()] = Some(pa);
        parents[BreakpointId::b(k).index()] = Some(pb);
        if choice.is_fence() {
            fences.push(Fence {
                td: k,
                a_parent: pa.a_parent,
                b_parent: pa.b_parent,
            });
        }
    }
    TdTree { n, parents, fences }
}

impl TdTree {
    pub fn td_count(&self) -> u32 {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = BreakpointId> + '_ {
        (0..self.parents.len()).map(BreakpointId::from_index)
    }

    pub fn parents(&self, node: BreakpointId) -> Option<&ParentEdges> {
        self.parents.get(node.index()).and_then(|p| p.as_ref())
    }

    pub fn fences(&self) -> &[Fence] {
        &self.fences
    }

    pub fn has_fence(&self, td: u32) -> bool {
        self.fences.iter().any(|f| f.td == td)
    }

    /// Number of parental edges plus fences.
    pub fn edge_count(&self) -> usize {
        2 * (self.node_count() - 2) + self.fences.len()
    }

    /// Swaps the major/minor designation of one node. Only useful for building
    /// corrupted trees that the validators must reject.
    pub fn flip_major(&mut self, node: BreakpointId) {
        if let Some(Some(p)) = self.parents.get_mut(node.index()) {
            p.major = p.major.opposite();
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Directed order diagram on breakpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseDiagram {
    pub labels: Vec<BreakpointId>,
    pub edges: Vec<(usize, usize)>,
}

impl HasseDiagram {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.labels.len()];
        for &(u, v) in &self.edges {
            succ[u].push(v);
        }
        succ
    }

    pub fn index_of(&self, id: BreakpointId) -> Option<usize> {
        self.labels.iter().position(|&l| l == id)
    }

    /// Kahn topological order, or `CycleDetected`.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let succ = self.successors();
        let mut indeg = vec![0usize; self.labels.len()];
        for &(_, v) in &self.edges {
            indeg[v] += 1;
        }
        let mut ready: Vec<usize> = (0..indeg.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(indeg.len());
        while let Some(u) = ready.pop() {
            order.push(u);
            for &v in &succ[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    ready.push(v);
                }
            }
        }
        if order.len() == indeg.len() {
            Ok(order)
        } else {
            Err(Error::CycleDetected)
        }
    }

    /// `reach[u][v]` iff there is a non-empty directed path `u -> v`.
    pub fn reachability(&self) -> Result<Vec<Vec<bool>>> {
        let order = self.topological_order()?;
        let succ = self.successors();
        let n = self.labels.len();
        let mut reach = vec![vec![false; n]; n];
        for &u in order.iter().rev() {
            for &v in &succ[u] {
                reach[u][v] = true;
                let (ru, rv) = if u < v {
                    let (lo, hi) = reach.split_at_mut(v);
                    (&mut lo[u], &hi[0])
                } else {
                    let (lo, hi) = reach.split_at_mut(u);
                    (&mut hi[0], &lo[v])
                };
                for (x, &y) in ru.iter_mut().zip(rv.iter()) {
                    *x |= y;
                }
            }
        }
        Ok(reach)
    }

    pub fn sources(&self) -> Vec<BreakpointId> {
        let mut has_in = vec![false; self.labels.len()];
        for &(_, v) in &self.edges {
            has_in[v] = true;
        }
        (0..self.labels.len())
            .filter(|&i| !has_in[i])
            .map(|i| self.labels[i])
            .collect()
    }

    pub fn sinks(&self) -> Vec<BreakpointId> {
        let mut has_out = vec![false; self.labels.len()];
        for &(u, _) in &self.edges {
            has_out[u] = true;
        }
        (0..self.labels.len())
            .filter(|&i| !has_out[i])
            .map(|i| self.labels[i])
            .collect()
    }
}

/// Type-a edges keep their direction, type-b edges are reversed and fences
/// point from `k_a` to `k_b`.
pub fn hasse_diagram(tree: &TdTree) -> Result<HasseDiagram> {
    let labels: Vec<BreakpointId> = tree.nodes().collect();
    let mut edges = Vec::with_capacity(tree.edge_count());
    for node in tree.nodes() {
        if let Some(p) = tree.parents(node) {
            edges.push((p.a_parent.index(), node.index()));
            edges.push((node.index(), p.b_parent.index()));
        }
    }
    for f in tree.fences() {
        edges.push((BreakpointId::a(f.td).index(), BreakpointId::b(f.td).index()));
    }
    let h = HasseDiagram { labels, edges };
    h.topological_order()?;
    Ok(h)
}

/// A forest of major edges plus fences. Nodes without a parent are roots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorGraph {
    pub labels: Vec<BreakpointId>,
    pub parent: Vec<Option<usize>>,
    /// `(a-side daughter, b-side daughter)` index pairs.
    pub fences: Vec<(usize, usize)>,
    /// Nodes removed before applying the product rule (the TD roots).
    pub roots: Vec<usize>,
}

impl MajorGraph {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, id: BreakpointId) -> Option<usize> {
        self.labels.iter().position(|&l| l == id)
    }

    pub fn parent_of(&self, id: BreakpointId) -> Option<BreakpointId> {
        let i = self.index_of(id)?;
        self.parent[i].map(|p| self.labels[p])
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.labels.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Common parent of a fence's two daughters, when they share one.
    pub fn fence_parent(&self, fence: (usize, usize)) -> Option<usize> {
        match (self.parent[fence.0], self.parent[fence.1]) {
            (Some(p), Some(q)) if p == q => Some(p),
            _ => None,
        }
    }

    /// Labelled edge set, for comparing graphs built by different routes.
    pub fn edge_set(&self) -> BTreeSet<(BreakpointId, BreakpointId)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (self.labels[p], self.labels[i])))
            .collect()
    }

    pub fn fence_set(&self) -> BTreeSet<(BreakpointId, BreakpointId)> {
        self.fences
            .iter()
            .map(|&(a, b)| (self.labels[a], self.labels[b]))
            .collect()
    }

    /// Same labels, edges and fences, regardless of node ordering.
    pub fn same_graph(&self, other: &MajorGraph) -> bool {
        let labels = |g: &MajorGraph| g.labels.iter().copied().collect::<BTreeSet<_>>();
        labels(self) == labels(other)
            && self.edge_set() == other.edge_set()
            && self.fence_set() == other.fence_set()
    }

    /// Size of the subtree hanging from each node, the node included.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let children = self.children();
        let mut size = vec![0u64; self.labels.len()];
        fn fill(u: usize, children: &[Vec<usize>], size: &mut [u64]) -> u64 {
            let s = 1 + children[u]
                .iter()
                .map(|&c| fill(c, children, size))
                .sum::<u64>();
            size[u] = s;
            s
        }
        for i in 0..self.labels.len() {
            if self.parent[i].is_none() {
                fill(i, &children, &mut size);
            }
        }
        size
    }
}

pub fn major_graph(tree: &TdTree) -> MajorGraph {
    let labels: Vec<BreakpointId> = tree.nodes().collect();
    let parent = tree
        .nodes()
        .map(|x| tree.parents(x).map(|p| p.major_parent().index()))
        .collect();
    let fences = tree
        .fences()
        .iter()
        .map(|f| (BreakpointId::a(f.td).index(), BreakpointId::b(f.td).index()))
        .collect();
    MajorGraph {
        labels,
        parent,
        fences,
        roots: vec![BreakpointId::ROOT_A.index(), BreakpointId::ROOT_B.index()],
    }
}

/// Outcome of one structural check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub violations: Vec<(BreakpointId, String)>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            violations: Vec::new(),
        }
    }

    fn fail(&mut self, node: BreakpointId, message: impl Into<String>) {
        self.violations.push((node, message.into()));
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub checks: Vec<Check>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn into_result(self) -> Result<()> {
        for c in self.checks {
            if let Some((node, msg)) = c.violations.into_iter().next() {
                return Err(Error::StructureViolation {
                    node,
                    message: format!("{}: {msg}", c.name),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{status} {}", c.name)?;
            for (node, msg) in &c.violations {
                writeln!(f, "    {node}: {msg}")?;
            }
        }
        Ok(())
    }
}

/// Checks the structural invariants of a tree: well-formed parent edges, the two
/// major trees, the Hasse source/sink, the segment chains, minor parents as
/// most recent opposite-type ancestors, and the nested order along every
/// major path.
pub fn validate_structure(tree: &TdTree) -> StructureReport {
    let mut checks = Vec::new();
    let major = major_graph(tree);
    let major_parent = |x: BreakpointId| tree.parents(x).map(|p| p.major_parent());

    let mut wf = Check::new("parent_edges");
    if tree.node_count() != 2 * tree.td_count() as usize + 2 {
        wf.fail(BreakpointId::ROOT_A, "node count is not 2n+2");
    }
    for x in tree.nodes() {
        match (x.is_root(), tree.parents(x)) {
            (true, Some(_)) => wf.fail(x, "root has parents"),
            (false, None) => wf.fail(x, "missing parent edges"),
            (false, Some(p)) => {
                if p.a_parent.side != Side::A || p.b_parent.side != Side::B {
                    wf.fail(x, "parent edge types do not match parent types");
                }
                if p.a_parent.td >= x.td || p.b_parent.td >= x.td {
                    wf.fail(x, "parent is not older than child");
                }
                if x.td >= 2 {
                    if p.a_parent.td == p.b_parent.td {
                        wf.fail(x, "segment endpoints share a TD number");
                    }
                    let expected = if p.a_parent.td > p.b_parent.td { Side::A } else { Side::B };
                    if p.major != expected {
                        wf.fail(x, "major edge is not from the larger TD number");
                    }
                } else if x.td == 1 && p.major != x.side.opposite() {
                    wf.fail(x, "first TD breaks the root major convention");
                }
            }
            (true, None) => {}
        }
    }
    for f in tree.fences() {
        for side in [Side::A, Side::B] {
            let node = BreakpointId::new(f.td, side);
            match tree.parents(node) {
                Some(p) if p.a_parent == f.a_parent && p.b_parent == f.b_parent => {}
                _ => wf.fail(node, "fence daughters do not share the fence parents"),
            }
        }
    }
    checks.push(wf);

    let mut forest = Check::new("major_forest");
    for x in tree.nodes() {
        let mut cur = x;
        let mut steps = 0;
        while let Some(p) = major_parent(cur) {
            cur = p;
            steps += 1;
            if steps > tree.node_count() {
                forest.fail(x, "cycle among major edges");
                break;
            }
        }
        if !cur.is_root() {
            forest.fail(x, "does not reach a root through major edges");
        }
    }
    for root in [BreakpointId::ROOT_A, BreakpointId::ROOT_B] {
        if tree.node_count() > 2 {
            let kids = major
                .parent
                .iter()
                .filter(|p| **p == Some(root.index()))
                .count();
            if kids != 1 {
                forest.fail(root, format!("root has {kids} major children"));
            }
        }
    }
    checks.push(forest);

    let mut hasse_check = Check::new("hasse_source_sink");
    let hasse = hasse_diagram(tree);
    let reach = match &hasse {
        Ok(h) => {
            if h.sources() != vec![BreakpointId::ROOT_A] {
                hasse_check.fail(BreakpointId::ROOT_A, format!("sources {:?}", h.sources()));
            }
            if h.sinks() != vec![BreakpointId::ROOT_B] {
                hasse_check.fail(BreakpointId::ROOT_B, format!("sinks {:?}", h.sinks()));
            }
            h.reachability().ok()
        }
        Err(_) => {
            hasse_check.fail(BreakpointId::ROOT_A, "cycle detected");
            None
        }
    };
    checks.push(hasse_check);

    let is_ancestor = |anc: BreakpointId, mut x: BreakpointId| -> Option<Vec<BreakpointId>> {
        // returns the nodes strictly between anc and x on the major path
        let mut between = Vec::new();
        while let Some(p) = major_parent(x) {
            if p == anc {
                between.reverse();
                return Some(between);
            }
            between.push(p);
            x = p;
        }
        None
    };

    let mut chain = Check::new("segment_chain");
    let mut recent = Check::new("minor_parent_is_recent_ancestor");
    for x in tree.nodes().filter(|x| x.td >= 2) {
        let Some(p) = tree.parents(x) else { continue };
        let (maj, min) = (p.major_parent(), p.minor_parent());
        if maj == min {
            continue;
        }
        if major_parent(maj) == Some(min) {
            // single major edge between the segment endpoints
        } else {
            match is_ancestor(min, maj) {
                Some(between) => {
                    let mut prev = min.td;
                    for y in between {
                        if y.side != maj.side {
                            chain.fail(x, format!("chain node {y} has the wrong type"));
                        }
                        if y.td <= prev {
                            chain.fail(x, format!("chain TD numbers not increasing at {y}"));
                        }
                        prev = y.td;
                    }
                    if maj.td <= prev {
                        chain.fail(x, "chain does not end at the major parent");
                    }
                }
                None => chain.fail(x, format!("minor parent {min} is not a major ancestor of {maj}")),
            }
        }

        let mut cur = maj;
        let mut found = None;
        while let Some(up) = major_parent(cur) {
            if up.side != maj.side {
                found = Some(up);
                break;
            }
            cur = up;
        }
        if found != Some(min) {
            recent.fail(
                x,
                format!("minor parent {min}, most recent opposite-type ancestor {found:?}"),
            );
        }
    }
    checks.push(chain);
    checks.push(recent);

    let mut nested = Check::new("major_path_order");
    if let Some(reach) = reach {
        let children = major.children();
        let mut stack: Vec<Vec<usize>> = major.roots.iter().map(|&r| vec![r]).collect();
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if !children[last].is_empty() {
                for &c in &children[last] {
                    let mut p = path.clone();
                    p.push(c);
                    stack.push(p);
                }
                continue;
            }
            let a_nodes: Vec<usize> = path
                .iter()
                .copied()
                .filter(|&i| major.labels[i].side == Side::A)
                .collect();
            let b_nodes: Vec<usize> = path
                .iter()
                .copied()
                .filter(|&i| major.labels[i].side == Side::B)
                .collect();
            let leaf = major.labels[last];
            for list in [&a_nodes, &b_nodes] {
                if list.windows(2).any(|w| major.labels[w[0]].td >= major.labels[w[1]].td) {
                    nested.fail(leaf, "TD numbers do not increase down the path");
                }
            }
            let order: Vec<usize> = a_nodes.iter().chain(b_nodes.iter().rev()).copied().collect();
            for w in order.windows(2) {
                if !reach[w[0]][w[1]] {
                    nested.fail(
                        leaf,
                        format!(
                            "{} < {} is not forced along the path",
                            major.labels[w[0]], major.labels[w[1]]
                        ),
                    );
                }
            }
        }
    }
    checks.push(nested);

    StructureReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{enumerate_word_evolutions, DupChoice};

    fn worked_example() -> WordEvolution {
        WordEvolution::from_steps([DupChoice::new(1, 1), DupChoice::new(1, 0), DupChoice::new(2, 3)])
            .unwrap()
    }

    #[test]
    fn example_tree_parents() {
        let t = build_2d_tree(&worked_example());
        let p = t.parents(BreakpointId::a(2)).unwrap();
        assert_eq!(p.major_parent(), BreakpointId::b(1));
        assert_eq!(p.minor_parent(), BreakpointId::ROOT_A);
        let fenced: Vec<u32> = t.fences().iter().map(|f| f.td).collect();
        assert_eq!(fenced, vec![1, 3]);
        assert_eq!(t.node_count(), 10);
        assert_eq!(t.edge_count(), 16 + 2);
    }

    #[test]
    fn single_td_tree() {
        let t = build_2d_tree(&WordEvolution::initial());
        assert_eq!(t.node_count(), 4);
        assert_eq!(t.parents(BreakpointId::a(1)).unwrap().major_parent(), BreakpointId::ROOT_B);
        assert_eq!(t.parents(BreakpointId::b(1)).unwrap().major_parent(), BreakpointId::ROOT_A);
        assert!(t.has_fence(1));
        let h = hasse_diagram(&t).unwrap();
        let mut edges: Vec<(String, String)> = h
            .edges
            .iter()
            .map(|&(u, v)| (h.labels[u].to_string(), h.labels[v].to_string()))
            .collect();
        edges.sort();
        let mut expected: Vec<(String, String)> = [
            ("0_a", "1_a"),
            ("0_a", "1_b"),
            ("1_a", "0_b"),
            ("1_b", "0_b"),
            ("1_a", "1_b"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        expected.sort();
        assert_eq!(edges, expected);
        let g = major_graph(&t);
        assert_eq!(g.parent_of(BreakpointId::a(1)), Some(BreakpointId::ROOT_B));
        assert_eq!(g.parent_of(BreakpointId::b(1)), Some(BreakpointId::ROOT_A));
        assert_eq!(g.fences.len(), 1);
        assert!(validate_structure(&t).passed());
    }

    #[test]
    fn worked_linear_extension_is_admitted() {
        let t = build_2d_tree(&worked_example());
        let h = hasse_diagram(&t).unwrap();
        let chain: Vec<BreakpointId> = ["0_a", "3_a", "4_a", "1_a", "2_a", "2_b", "4_b", "3_b", "1_b", "0_b"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let pos = |id: BreakpointId| chain.iter().position(|&c| c == id).unwrap();
        for &(u, v) in &h.edges {
            assert!(pos(h.labels[u]) < pos(h.labels[v]), "{} !< {}", h.labels[u], h.labels[v]);
        }
    }

    #[test]
    fn example_major_graph() {
        let g = major_graph(&build_2d_tree(&worked_example()));
        let id = |s: &str| s.parse::<BreakpointId>().unwrap();
        let expected = [
            ("0_a", "1_b"),
            ("0_b", "1_a"),
            ("1_b", "2_a"),
            ("1_a", "2_b"),
            ("1_b", "3_a"),
            ("1_b", "3_b"),
            ("3_a", "4_a"),
            ("2_a", "4_b"),
        ];
        let set: BTreeSet<_> = expected.iter().map(|(a, b)| (id(a), id(b))).collect();
        assert_eq!(g.edge_set(), set);
        let kids_of_1b = g.parent.iter().filter(|p| **p == Some(id("1_b").index())).count();
        assert_eq!(kids_of_1b, 3);
        assert_eq!(g.fence_parent((id("3_a").index(), id("3_b").index())), Some(id("1_b").index()));
        assert_eq!(g.fence_parent((id("1_a").index(), id("1_b").index())), None);
    }

    #[test]
    fn structure_holds_exhaustively() {
        for n in 1..=4 {
            for e in enumerate_word_evolutions(n) {
                let t = build_2d_tree(&e);
                let report = validate_structure(&t);
                assert!(report.passed(), "{e}\n{report}");
                let g = major_graph(&t);
                let non_root_without_parent = (0..g.node_count())
                    .filter(|&i| !g.roots.contains(&i) && g.parent[i].is_none())
                    .count();
                assert_eq!(non_root_without_parent, 0);
                let fence_steps = e.steps().iter().filter(|c| c.is_fence()).count();
                assert_eq!(t.fences().len(), fence_steps + 1);
            }
        }
    }

    #[test]
    fn corrupted_tree_is_flagged() {
        let mut t = build_2d_tree(&worked_example());
        t.flip_major(BreakpointId::b(4));
        let report = validate_structure(&t);
        assert!(!report.passed());
        match report.into_result() {
            Err(Error::StructureViolation { node, .. }) => assert_eq!(node, BreakpointId::b(4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let t = build_2d_tree(&worked_example());
        assert_eq!(TdTree::from_json(&t.to_json()).unwrap(), t);
    }
}
