//! Induced evolutions, 1-nodesets, β-trees and the kernel identity behind the
//! closed form for the number of TD-Evolutions.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combin::binomial;
use crate::count::{combinatorial_product, count_evolution};
use crate::error::{Error, Result};
use crate::tree::{BreakpointId, MajorGraph, Side, TdTree};
use crate::word::{enumerate_word_evolutions, par_fold_evolutions, td_step, DupChoice, Word, WordEvolution};

pub const DEFAULT_SUBTREE_MAX_NODES: usize = 20;
pub const DEFAULT_INDUCED_MAX: usize = 1 << 20;
pub const DEFAULT_TOTAL_GUARD: usize = 6;

/// `𝒩ₙ = ∏ₖ (4^k − (2k+1))`.
pub fn closed_form(n: u32) -> BigUint {
    (1..=n)
        .map(|k| (BigUint::from(1u8) << (2 * k as usize)) - BigUint::from(2 * k + 1))
        .product()
}

/// Sum of per-evolution extension counts over every word evolution on `n` TDs.
pub fn total_evolutions_via_words(n: usize) -> Result<BigUint> {
    total_evolutions_via_words_with(n, DEFAULT_TOTAL_GUARD)
}

pub fn total_evolutions_via_words_with(n: usize, guard: usize) -> Result<BigUint> {
    if n > guard {
        return Err(Error::BudgetExceeded(format!(
            "summing over word evolutions for n={n} exceeds guard n<={guard}"
        )));
    }
    if n == 0 {
        return Ok(BigUint::from(1u8));
    }
    par_fold_evolutions(
        n,
        Ok(BigUint::default()),
        |acc: Result<BigUint>, e| Ok(acc? + count_evolution(e)?.value),
        |x, y| Ok(x? + y?),
    )
}

fn reduce_word(w: &Word) -> Word {
    w.delete_first_symbol()
}

/// Deletes every copy of symbol 1 and lowers the remaining symbols by one.
pub fn delete_first_td(e: &WordEvolution) -> Result<WordEvolution> {
    if e.td_count() < 2 {
        return Err(Error::Validation {
            step: 0,
            message: "deleting the first TD needs at least two TDs".into(),
        });
    }
    let words: Vec<Word> = e.words()[1..].iter().map(reduce_word).collect();
    WordEvolution::from_words(&words)
}

pub fn induced_evolutions(e: &WordEvolution) -> Result<Vec<WordEvolution>> {
    induced_evolutions_with(e, DEFAULT_INDUCED_MAX)
}

/// Every evolution on one more TD that reduces to `e`, in lexicographic
/// order of steps.
pub fn induced_evolutions_with(e: &WordEvolution, max: usize) -> Result<Vec<WordEvolution>> {
    let mut out = Vec::new();
    let mut cur = WordEvolution::initial();
    fn go(
        e: &WordEvolution,
        cur: &mut WordEvolution,
        out: &mut Vec<WordEvolution>,
        max: usize,
    ) -> Result<()> {
        let k = cur.td_count();
        if k == e.td_count() + 1 {
            if out.len() >= max {
                return Err(Error::BudgetExceeded(format!("more than {max} induced evolutions")));
            }
            out.push(cur.clone());
            return Ok(());
        }
        // W'_{k+1} must reduce to W_k of e
        let target = e.word(k);
        let len = cur.last_word().len();
        let mut c = Some(DupChoice::first());
        while let Some(choice) = c {
            let next = td_step(cur.last_word(), choice, k as u32 + 1)?;
            if reduce_word(&next) == *target {
                cur.push(choice)?;
                go(e, cur, out, max)?;
                cur.pop();
            }
            c = choice.successor(len);
        }
        Ok(())
    }
    go(e, &mut cur, &mut out, max)?;
    Ok(out)
}

/// Nodes of the shifted tree whose symbols sit next to an inserted 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OneNodeset {
    pub members: BTreeSet<BreakpointId>,
}

impl OneNodeset {
    pub fn contains(&self, x: BreakpointId) -> bool {
        self.members.contains(&x)
    }
}

pub fn one_nodeset_of(e: &WordEvolution, induced: &WordEvolution) -> Result<OneNodeset> {
    if induced.td_count() != e.td_count() + 1 || delete_first_td(induced).ok().as_ref() != Some(e) {
        return Err(Error::NotAnInducedPair);
    }
    let mut members = BTreeSet::from([BreakpointId::a(1), BreakpointId::b(1)]);
    for m in 2..=induced.td_count() as u32 {
        let w = induced.word(m as usize).symbols();
        let p = w.iter().position(|&s| s == m).expect("new symbol present");
        if p > 0 && w[p - 1] == 1 {
            members.insert(BreakpointId::b(m));
        }
        if p + 1 < w.len() && w[p + 1] == 1 {
            members.insert(BreakpointId::a(m));
        }
    }
    Ok(OneNodeset { members })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BetaParents {
    pub a: usize,
    pub b: usize,
    pub major: Side,
}

impl BetaParents {
    pub fn of_side(&self, side: Side) -> usize {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    pub fn major_parent(&self) -> usize {
        self.of_side(self.major)
    }
}

/// Generalised 2d-tree. Index 0 is the type-a root `A`, index 1 the type-b
/// root `B`; a node's type is the side of its label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaTree {
    pub labels: Vec<BreakpointId>,
    pub parents: Vec<Option<BetaParents>>,
    /// `(type-a node, type-b node)` pairs.
    pub fences: Vec<(usize, usize)>,
}

pub const ROOT_A: usize = 0;
pub const ROOT_B: usize = 1;

impl BetaTree {
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn side(&self, i: usize) -> Side {
        self.labels[i].side
    }

    pub fn index_of(&self, id: BreakpointId) -> Option<usize> {
        self.labels.iter().position(|&l| l == id)
    }

    pub fn from_td_tree(t: &TdTree) -> BetaTree {
        let labels: Vec<BreakpointId> = t.nodes().collect();
        let parents = labels
            .iter()
            .map(|&x| {
                t.parents(x).map(|p| BetaParents {
                    a: p.a_parent.index(),
                    b: p.b_parent.index(),
                    major: p.major,
                })
            })
            .collect();
        let fences = t
            .fences()
            .iter()
            .map(|f| (BreakpointId::a(f.td).index(), BreakpointId::b(f.td).index()))
            .collect();
        BetaTree {
            labels,
            parents,
            fences,
        }
    }

    /// Checks the β-tree axioms: typed roots, typed parents, parents either
    /// the two roots or in descent with the descendant as major, and
    /// fences only between same-parent opposite-type pairs or the roots.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidBetaTree(m));
        let n = self.node_count();
        if n < 2 || self.parents.len() != n {
            return bad("needs two roots".into());
        }
        if self.side(ROOT_A) != Side::A || self.side(ROOT_B) != Side::B {
            return bad("roots have the wrong types".into());
        }
        if self.parents[ROOT_A].is_some() || self.parents[ROOT_B].is_some() {
            return bad("roots have parents".into());
        }
        let distinct: BTreeSet<_> = self.labels.iter().collect();
        if distinct.len() != n {
            return bad("duplicate labels".into());
        }
        for i in 2..n {
            let Some(p) = self.parents[i] else {
                return bad(format!("{} has no parents", self.labels[i]));
            };
            if p.a >= n || p.b >= n || p.a == i || p.b == i {
                return bad(format!("{} has bad parent indices", self.labels[i]));
            }
            if self.side(p.a) != Side::A || self.side(p.b) != Side::B {
                return bad(format!("{} has parents of the wrong types", self.labels[i]));
            }
        }
        if !acyclic(&self.parents) {
            return bad("parent edges contain a cycle".into());
        }
        for i in 2..n {
            let p = self.parents[i].unwrap();
            if p.a == ROOT_A && p.b == ROOT_B {
                continue;
            }
            let (maj, min) = (p.major_parent(), p.of_side(p.major.opposite()));
            if !is_descendant(&self.parents, maj, min) {
                return bad(format!(
                    "{}: major parent {} does not descend from minor parent {}",
                    self.labels[i], self.labels[maj], self.labels[min]
                ));
            }
        }
        let mut fenced = vec![false; n];
        for &(a, b) in &self.fences {
            if a >= n || b >= n || self.side(a) != Side::A || self.side(b) != Side::B {
                return bad("fence between nodes of the wrong types".into());
            }
            let roots = a == ROOT_A && b == ROOT_B;
            let same_parents = matches!(
                (self.parents[a], self.parents[b]),
                (Some(p), Some(q)) if p.a == q.a && p.b == q.b
            );
            if !roots && !same_parents {
                return bad(format!(
                    "fence {}-{} joins nodes with different parents",
                    self.labels[a], self.labels[b]
                ));
            }
            if fenced[a] || fenced[b] {
                return bad("node in two fences".into());
            }
            fenced[a] = true;
            fenced[b] = true;
        }
        Ok(())
    }

    pub fn major_graph(&self) -> MajorGraph {
        MajorGraph {
            labels: self.labels.clone(),
            parent: self.parents.iter().map(|p| p.map(|p| p.major_parent())).collect(),
            fences: self.fences.clone(),
            roots: vec![ROOT_A, ROOT_B],
        }
    }

    /// Parents-before-children order.
    fn topological(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let before = order.len();
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let ready = match self.parents[i] {
                    None => true,
                    Some(p) => done[p.a] && done[p.b],
                };
                if ready {
                    done[i] = true;
                    order.push(i);
                }
            }
            assert!(order.len() > before, "β-tree parent edges contain a cycle");
        }
        order
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("β-tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: BetaTree = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        t.validate()?;
        Ok(t)
    }
}

/// Member set of a β-subtree, one bit per node index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BetaSubtree {
    pub mask: u64,
}

impl BetaSubtree {
    pub fn roots() -> Self {
        BetaSubtree {
            mask: (1 << ROOT_A) | (1 << ROOT_B),
        }
    }

    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Self {
        BetaSubtree {
            mask: members.into_iter().fold(0, |m, i| m | (1 << i)),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 64 && self.mask & (1 << i) != 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(|&i| self.contains(i))
    }

    fn adjacent(&self, t: &BetaTree, i: usize) -> bool {
        match t.parents[i] {
            Some(p) => !self.contains(i) && self.contains(p.a) && self.contains(p.b),
            None => false,
        }
    }

    pub fn validate(&self, t: &BetaTree) -> Result<()> {
        let n = t.node_count();
        if n < 64 && self.mask >> n != 0 {
            return Err(Error::InvalidSubtree("member outside the tree".into()));
        }
        if !self.contains(ROOT_A) || !self.contains(ROOT_B) {
            return Err(Error::InvalidSubtree("roots must be members".into()));
        }
        for i in self.members() {
            if let Some(p) = t.parents[i] {
                if !self.contains(p.a) || !self.contains(p.b) {
                    return Err(Error::InvalidSubtree(format!(
                        "{} is a member without both parents",
                        t.labels[i]
                    )));
                }
            }
        }
        for &(a, b) in &t.fences {
            if a == ROOT_A && b == ROOT_B {
                continue;
            }
            let p = t.parents[a].unwrap();
            if self.contains(p.a) && self.contains(p.b) && !self.contains(a) && !self.contains(b) {
                return Err(Error::InvalidSubtree(format!(
                    "fence {}-{} has both parents in the subtree but no daughter",
                    t.labels[a], t.labels[b]
                )));
            }
        }
        Ok(())
    }
}

pub fn enumerate_beta_subtrees(t: &BetaTree) -> Result<Vec<BetaSubtree>> {
    enumerate_beta_subtrees_with(t, DEFAULT_SUBTREE_MAX_NODES)
}

/// Every β-subtree, by top-down search. A fence is checked once both of its
/// daughters have been decided.
pub fn enumerate_beta_subtrees_with(t: &BetaTree, max_nodes: usize) -> Result<Vec<BetaSubtree>> {
    let n = t.node_count();
    if n > max_nodes || n > 64 {
        return Err(Error::BudgetExceeded(format!(
            "{n} β-tree nodes exceed the budget of {}",
            max_nodes.min(64)
        )));
    }
    let order: Vec<usize> = t.topological().into_iter().filter(|&i| i > ROOT_B).collect();
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    // fences to check after deciding position r
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); order.len()];
    for &(a, b) in &t.fences {
        if a == ROOT_A && b == ROOT_B {
            continue;
        }
        checks[rank[a].max(rank[b])].push((a, b));
    }
    let mut out = Vec::new();
    fn go(
        r: usize,
        mask: u64,
        t: &BetaTree,
        order: &[usize],
        checks: &[Vec<(usize, usize)>],
        out: &mut Vec<BetaSubtree>,
    ) {
        if r == order.len() {
            out.push(BetaSubtree { mask });
            return;
        }
        let i = order[r];
        let p = t.parents[i].unwrap();
        let parents_in = mask & (1 << p.a) != 0 && mask & (1 << p.b) != 0;
        let options: &[bool] = if parents_in { &[false, true] } else { &[false] };
        for &take in options {
            let m = if take { mask | (1 << i) } else { mask };
            let ok = checks[r].iter().all(|&(a, b)| {
                let q = t.parents[a].unwrap();
                let both = m & (1 << q.a) != 0 && m & (1 << q.b) != 0;
                !both || m & (1 << a) != 0 || m & (1 << b) != 0
            });
            if ok {
                go(r + 1, m, t, order, checks, out);
            }
        }
    }
    go(0, BetaSubtree::roots().mask, t, &order, &checks, &mut out);
    out.sort();
    Ok(out)
}

/// Major graph selected by a β-subtree: members take their same-type parent,
/// adjacent nodes their opposite-type parent, all others their major parent.
/// A fence survives unless both daughters are members.
pub fn induced_tree(t: &BetaTree, tau: &BetaSubtree) -> Result<MajorGraph> {
    tau.validate(t)?;
    let parent = (0..t.node_count())
        .map(|i| {
            t.parents[i].map(|p| {
                if tau.contains(i) {
                    p.of_side(t.side(i))
                } else if tau.adjacent(t, i) {
                    p.of_side(t.side(i).opposite())
                } else {
                    p.major_parent()
                }
            })
        })
        .collect();
    let fences = t
        .fences
        .iter()
        .copied()
        .filter(|&(a, b)| !(tau.contains(a) && tau.contains(b)))
        .collect();
    Ok(MajorGraph {
        labels: t.labels.clone(),
        parent,
        fences,
        roots: vec![ROOT_A, ROOT_B],
    })
}

/// Nodes in the component of root `A`, `A` included.
pub fn component_size_at_a(g: &MajorGraph) -> u64 {
    let a = g.roots[0];
    g.subtree_sizes()[a]
}

/// Merges the two roots into a single root labelled like `A`. A fence between
/// the roots disappears.
pub fn contract_roots(g: &MajorGraph) -> MajorGraph {
    let (a, b) = (g.roots[0], g.roots[1]);
    let keep: Vec<usize> = (0..g.node_count()).filter(|&i| i != b).collect();
    let mut new_index = vec![usize::MAX; g.node_count()];
    for (j, &i) in keep.iter().enumerate() {
        new_index[i] = j;
    }
    new_index[b] = new_index[a];
    MajorGraph {
        labels: keep.iter().map(|&i| g.labels[i]).collect(),
        parent: keep.iter().map(|&i| g.parent[i].map(|p| new_index[p])).collect(),
        fences: g
            .fences
            .iter()
            .filter(|&&(x, y)| new_index[x] != new_index[y])
            .map(|&(x, y)| (new_index[x], new_index[y]))
            .collect(),
        roots: vec![new_index[a]],
    }
}

/// `C(τ)` together with `N_A(τ)`.
pub fn subtree_term(t: &BetaTree, tau: &BetaSubtree) -> Result<(u64, u128)> {
    let g = induced_tree(t, tau)?;
    Ok((component_size_at_a(&g), combinatorial_product(&g)?.value))
}

/// `C̄(ε)`: the product rule on the root-contracted graph of the trivial subtree.
pub fn contracted_trivial_term(t: &BetaTree) -> Result<u128> {
    let g = induced_tree_unchecked(t, &BetaSubtree::roots());
    Ok(combinatorial_product(&contract_roots(&g))?.value)
}

fn induced_tree_unchecked(t: &BetaTree, tau: &BetaSubtree) -> MajorGraph {
    // ε may violate the fence rule; its induced graph is still well defined
    let parent = (0..t.node_count())
        .map(|i| {
            t.parents[i].map(|p| {
                if tau.contains(i) {
                    p.of_side(t.side(i))
                } else if tau.adjacent(t, i) {
                    p.of_side(t.side(i).opposite())
                } else {
                    p.major_parent()
                }
            })
        })
        .collect();
    MajorGraph {
        labels: t.labels.clone(),
        parent,
        fences: t
            .fences
            .iter()
            .copied()
            .filter(|&(a, b)| !(tau.contains(a) && tau.contains(b)))
            .collect(),
        roots: vec![ROOT_A, ROOT_B],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub r: usize,
    pub lhs: u128,
    pub rhs: u128,
    /// Number of β-subtrees with `N_A = r`.
    pub subtrees: usize,
}

impl KernelCheck {
    pub fn equal(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Per-subtree `(N_A(τ), C(τ))`, computed in parallel.
pub fn subtree_terms(t: &BetaTree) -> Result<Vec<(BetaSubtree, u64, u128)>> {
    enumerate_beta_subtrees(t)?
        .into_par_iter()
        .map(|tau| subtree_term(t, &tau).map(|(na, c)| (tau, na, c)))
        .collect()
}

pub fn kernel_check(t: &BetaTree, r: usize) -> Result<KernelCheck> {
    let n = t.node_count();
    if r == 0 || r >= n {
        return Err(Error::InvalidSubtree(format!("r={r} outside 1..{}", n - 1)));
    }
    Ok(kernel_check_all(t)?.swap_remove(r - 1))
}

/// Kernel identity for every `r` in `1..N`.
pub fn kernel_check_all(t: &BetaTree) -> Result<Vec<KernelCheck>> {
    t.validate()?;
    let n = t.node_count();
    let rhs = contracted_trivial_term(t)?;
    let terms = subtree_terms(t)?;
    let mut checks: Vec<KernelCheck> = (1..n)
        .map(|r| KernelCheck {
            r,
            lhs: 0,
            rhs,
            subtrees: 0,
        })
        .collect();
    for (_, na, c) in terms {
        let k = &mut checks[na as usize - 1];
        k.lhs = k.lhs.checked_add(c).ok_or(Error::Overflow("kernel sum"))?;
        k.subtrees += 1;
    }
    Ok(checks)
}

fn shift_label(x: BreakpointId) -> BreakpointId {
    match (x.td, x.side) {
        (0, Side::A) => BreakpointId::b(1),
        (0, Side::B) => BreakpointId::a(1),
        (t, s) => BreakpointId::new(t + 1, s),
    }
}

/// β-subtree of `T(e)` matching a 1-nodeset labelled in the induced numbering.
pub fn subtree_of_nodeset(t: &TdTree, nodes: &OneNodeset) -> Result<BetaSubtree> {
    let beta = BetaTree::from_td_tree(t);
    let tau = BetaSubtree::from_members(
        beta.labels
            .iter()
            .enumerate()
            .filter(|(_, x)| nodes.contains(BreakpointId::new(x.td + 1, x.side)))
            .map(|(i, _)| i),
    );
    if tau.len() != nodes.members.len() {
        return Err(Error::InvalidNodeset("member outside the shifted tree".into()));
    }
    tau.validate(&beta)
        .map_err(|e| Error::InvalidNodeset(e.to_string()))?;
    Ok(tau)
}

/// Major graph of an induced evolution, read off the 2d-tree of the original
/// evolution and a 1-nodeset: relabel by +1 with the two root labels swapped,
/// reselect edges, add the fence between `1_a` and `1_b` and hang them from
/// fresh roots `0_a`, `0_b`.
pub fn induced_major_graph(t: &TdTree, nodes: &OneNodeset) -> Result<MajorGraph> {
    let tau = subtree_of_nodeset(t, nodes)?;
    let beta = BetaTree::from_td_tree(t);
    let g = induced_tree(&beta, &tau)?;
    let size = g.node_count() + 2;
    let mut labels = vec![BreakpointId::ROOT_A; size];
    let mut parent = vec![None; size];
    let idx = |x: BreakpointId| shift_label(x).index();
    for i in 0..g.node_count() {
        let x = g.labels[i];
        labels[idx(x)] = shift_label(x);
        parent[idx(x)] = g.parent[i].map(|p| idx(g.labels[p]));
    }
    labels[0] = BreakpointId::ROOT_A;
    labels[1] = BreakpointId::ROOT_B;
    parent[BreakpointId::b(1).index()] = Some(0);
    parent[BreakpointId::a(1).index()] = Some(1);
    let mut fences: Vec<(usize, usize)> = g
        .fences
        .iter()
        .map(|&(a, b)| (idx(g.labels[a]), idx(g.labels[b])))
        .collect();
    fences.push((BreakpointId::a(1).index(), BreakpointId::b(1).index()));
    fences.sort();
    Ok(MajorGraph {
        labels,
        parent,
        fences,
        roots: vec![0, 1],
    })
}

/// `Σ_τ ((2n choose N_A(τ)) − 1)·C(τ)` over the β-subtrees of `T(e)`, which
/// counts the TD-Evolutions of all evolutions induced from `e`.
pub fn induced_count_via_subtrees(t: &TdTree) -> Result<u128> {
    let beta = BetaTree::from_td_tree(t);
    let total_nodes = beta.node_count() as u64;
    subtree_terms(&beta)?
        .into_iter()
        .try_fold(0u128, |acc, (_, na, c)| {
            let f = binomial(total_nodes, na)? - 1;
            f.checked_mul(c)
                .and_then(|x| acc.checked_add(x))
                .ok_or(Error::Overflow("induced count"))
        })
}

/// Random β-tree on `size` nodes, grown segment by segment. Each new node or
/// fenced pair takes a parent pair from an existing segment, so the axioms
/// hold by construction. Not uniform over β-trees.
pub fn random_beta_tree(seed: u64, size: usize) -> BetaTree {
    assert!(size >= 2, "a β-tree has at least its two roots");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = vec![BreakpointId::ROOT_A, BreakpointId::ROOT_B];
    let mut parents: Vec<Option<BetaParents>> = vec![None, None];
    let mut fences = Vec::new();
    let mut segments: Vec<(usize, usize)> = vec![(ROOT_A, ROOT_B)];
    let mut serial = [0u32; 2];
    if size > 2 && rng.random_bool(0.2) {
        fences.push((ROOT_A, ROOT_B));
    }

    let mut add = |side: Side,
                   seg: (usize, usize),
                   labels: &mut Vec<BreakpointId>,
                   parents: &mut Vec<Option<BetaParents>>,
                   rng: &mut ChaCha8Rng|
     -> usize {
        let major = if seg == (ROOT_A, ROOT_B) {
            if rng.random_bool(0.5) {
                side.opposite()
            } else {
                side
            }
        } else if is_descendant(parents, seg.0, seg.1) {
            Side::A
        } else {
            Side::B
        };
        let s = match side {
            Side::A => 0,
            Side::B => 1,
        };
        serial[s] += 1;
        labels.push(BreakpointId::new(serial[s], side));
        parents.push(Some(BetaParents {
            a: seg.0,
            b: seg.1,
            major,
        }));
        labels.len() - 1
    };

    while labels.len() < size {
        let seg = segments[rng.random_range(0..segments.len())];
        if labels.len() + 2 <= size && rng.random_bool(0.3) {
            let a = add(Side::A, seg, &mut labels, &mut parents, &mut rng);
            let b = add(Side::B, seg, &mut labels, &mut parents, &mut rng);
            fences.push((a, b));
            segments.push((a, seg.1));
            segments.push((seg.0, b));
        } else {
            let side = if rng.random_bool(0.5) { Side::A } else { Side::B };
            let x = add(side, seg, &mut labels, &mut parents, &mut rng);
            segments.push(match side {
                Side::A => (x, seg.1),
                Side::B => (seg.0, x),
            });
        }
    }
    BetaTree {
        labels,
        parents,
        fences,
    }
}

fn is_descendant(parents: &[Option<BetaParents>], x: usize, anc: usize) -> bool {
    let mut seen = vec![false; parents.len()];
    let mut stack = vec![x];
    while let Some(y) = stack.pop() {
        if let Some(p) = parents[y] {
            for q in [p.a, p.b] {
                if q == anc {
                    return true;
                }
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    false
}

fn acyclic(parents: &[Option<BetaParents>]) -> bool {
    // 0 unvisited, 1 on stack, 2 done
    fn visit(i: usize, parents: &[Option<BetaParents>], state: &mut [u8]) -> bool {
        match state[i] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        state[i] = 1;
        if let Some(p) = parents[i] {
            if !visit(p.a, parents, state) || !visit(p.b, parents, state) {
                return false;
            }
        }
        state[i] = 2;
        true
    }
    let mut state = vec![0u8; parents.len()];
    (0..parents.len()).all(|i| visit(i, parents, &mut state))
}

/// The β-tree with a fence below two roots and a second generation on each
/// side: `a1`, `b1` fenced under the roots, `b2`, `b3` under `b1`, `a2` under
/// `a1`.
pub fn example_fenced_beta_tree() -> BetaTree {
    let l = |s: &str| s.parse::<BreakpointId>().unwrap();
    let labels = vec![l("0_a"), l("0_b"), l("1_a"), l("1_b"), l("2_b"), l("3_b"), l("2_a")];
    let p = |a: usize, b: usize, major: Side| Some(BetaParents { a, b, major });
    let parents = vec![
        None,
        None,
        p(0, 1, Side::B),
        p(0, 1, Side::A),
        p(0, 3, Side::B),
        p(0, 3, Side::B),
        p(2, 1, Side::A),
    ];
    BetaTree {
        labels,
        parents,
        fences: vec![(2, 3)],
    }
}

/// Fiber of `e` under deletion of the first TD, as (induced evolution,
/// 1-nodeset, extension count) rows.
pub fn fiber_table(e: &WordEvolution) -> Result<Vec<(WordEvolution, OneNodeset, u128)>> {
    induced_evolutions(e)?
        .into_iter()
        .map(|ep| {
            let n = one_nodeset_of(e, &ep)?;
            let c = count_evolution(&ep)?.value;
            Ok((ep, n, c))
        })
        .collect()
}

/// `Σ_{e' induced from e} N(e')` against `N(e)·(4^{n+1} − (2n+3))` for every
/// `e` on `n` TDs. Returns the violating evolutions.
pub fn fiber_violations(n: usize) -> Result<Vec<WordEvolution>> {
    let factor = |m: u32| -> u128 { (1u128 << (2 * m)) - (2 * m as u128 + 1) };
    let mut bad = Vec::new();
    for e in enumerate_word_evolutions(n) {
        let lhs: u128 = fiber_table(&e)?.iter().map(|(_, _, c)| c).sum();
        let rhs = count_evolution(&e)?.value * factor(n as u32 + 1);
        if lhs != rhs {
            bad.push(e);
        }
    }
    Ok(bad)
}
