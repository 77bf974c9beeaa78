//! Linear-extension counts for TD posets: the product rule over the major
//! graph, a downset DP oracle over the Hasse diagram, and full enumeration.

use std::collections::HashMap;
use std::fmt;

use crate::combin::{binomial, multinomial};
use crate::error::{Error, Result};
use crate::tree::{build_2d_tree, major_graph, BreakpointId, HasseDiagram, MajorGraph};
use crate::word::WordEvolution;

pub const DEFAULT_DP_MAX_NODES: usize = 14;
pub const DEFAULT_ENUMERATE_MAX_NODES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Fence { a: BreakpointId, b: BreakpointId },
    Node(BreakpointId),
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Node(x) => write!(f, "node({x})"),
            Site::Fence { a, b } if a.td == b.td => write!(f, "fence({})", a.td),
            Site::Fence { a, b } => write!(f, "fence({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCount {
    pub value: u128,
    /// Every node and fence factor, fences first.
    pub factor_trace: Vec<(Site, u128)>,
}

impl ExtensionCount {
    pub fn nontrivial(&self) -> impl Iterator<Item = &(Site, u128)> {
        self.factor_trace.iter().filter(|(_, f)| *f > 1)
    }

    /// `27 * 2 * 10 = 540`
    pub fn product_string(&self) -> String {
        let factors: Vec<String> = self.nontrivial().map(|(_, f)| f.to_string()).collect();
        if factors.is_empty() {
            format!("{}", self.value)
        } else {
            format!("{} = {}", factors.join(" * "), self.value)
        }
    }
}

/// Product rule over a major graph with the roots removed.
pub fn count_extensions_formula(g: &MajorGraph) -> Result<ExtensionCount> {
    product_rule(g, &g.roots)
}

/// Product over every node of the graph, roots included. Used for induced
/// β-tree graphs where the root multinomials matter.
pub fn combinatorial_product(g: &MajorGraph) -> Result<ExtensionCount> {
    product_rule(g, &[])
}

pub fn count_evolution(evo: &WordEvolution) -> Result<ExtensionCount> {
    count_extensions_formula(&major_graph(&build_2d_tree(evo)))
}

fn product_rule(g: &MajorGraph, removed: &[usize]) -> Result<ExtensionCount> {
    let n = g.node_count();
    if g.parent.len() != n {
        return Err(Error::MalformedGraph("parent table length".into()));
    }
    let is_removed = |i: usize| removed.contains(&i);
    // `None` is the virtual parent of the tops
    let eff_parent = |i: usize| -> Option<usize> { g.parent[i].filter(|&p| !is_removed(p)) };
    for i in 0..n {
        if is_removed(i) {
            continue;
        }
        if let Some(p) = g.parent[i] {
            if p >= n || p == i {
                return Err(Error::MalformedGraph(format!("bad parent of {}", g.labels[i])));
            }
        } else if !g.roots.contains(&i) && !removed.is_empty() {
            return Err(Error::MalformedGraph(format!("{} lacks a parent", g.labels[i])));
        }
    }

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut tops = Vec::new();
    for i in (0..n).filter(|&i| !is_removed(i)) {
        match eff_parent(i) {
            Some(p) => children[p].push(i),
            None => tops.push(i),
        }
    }

    // subtree sizes, iteratively in reverse BFS order
    let mut order = tops.clone();
    let mut k = 0;
    while k < order.len() {
        let u = order[k];
        order.extend(children[u].iter().copied());
        k += 1;
    }
    if order.len() != n - removed.len() {
        return Err(Error::MalformedGraph("major edges do not form a forest".into()));
    }
    let mut size = vec![0u64; n];
    for &u in order.iter().rev() {
        size[u] = 1 + children[u].iter().map(|&c| size[c]).sum::<u64>();
    }

    let mut partner = vec![None; n];
    for &(a, b) in &g.fences {
        if is_removed(a) || is_removed(b) {
            continue;
        }
        if eff_parent(a) != eff_parent(b) {
            return Err(Error::MalformedGraph(format!(
                "fence {}-{} bridges nodes with different parents",
                g.labels[a], g.labels[b]
            )));
        }
        if partner[a].is_some() || partner[b].is_some() {
            return Err(Error::MalformedGraph("node in two fences".into()));
        }
        partner[a] = Some(b);
        partner[b] = Some(a);
    }

    let mut fence_trace = Vec::new();
    let mut node_trace = Vec::new();
    let mut value: u128 = 1;
    let mul = |v: &mut u128, f: u128| -> Result<()> {
        *v = v.checked_mul(f).ok_or(Error::Overflow("extension count"))?;
        Ok(())
    };

    let branch_sizes = |kids: &[usize], trace: &mut Vec<(Site, u128)>| -> Result<Vec<u64>> {
        let mut sizes = Vec::with_capacity(kids.len());
        for &c in kids {
            match partner[c] {
                Some(d) if d < c => {}
                Some(d) => {
                    let (y1, y2) = (size[c], size[d]);
                    let f = binomial(y1 + y2, y1)? - 1;
                    let (a, b) = if g.labels[c] < g.labels[d] { (c, d) } else { (d, c) };
                    trace.push((
                        Site::Fence {
                            a: g.labels[a],
                            b: g.labels[b],
                        },
                        f,
                    ));
                    sizes.push(y1 + y2);
                }
                None => sizes.push(size[c]),
            }
        }
        Ok(sizes)
    };

    branch_sizes(&tops, &mut fence_trace)?;
    for &u in &order {
        let sizes = branch_sizes(&children[u], &mut fence_trace)?;
        node_trace.push((Site::Node(g.labels[u]), multinomial(&sizes)?));
    }
    fence_trace.sort();
    node_trace.sort();
    let mut factor_trace = fence_trace;
    factor_trace.extend(node_trace);
    for &(_, f) in &factor_trace {
        mul(&mut value, f)?;
    }
    Ok(ExtensionCount {
        value,
        factor_trace,
    })
}

fn predecessor_masks(h: &HasseDiagram, max_nodes: usize) -> Result<Vec<u64>> {
    let n = h.node_count();
    if n > max_nodes || n > 64 {
        return Err(Error::BudgetExceeded(format!(
            "{n} poset nodes exceed the budget of {}",
            max_nodes.min(64)
        )));
    }
    h.topological_order()?;
    let mut pred = vec![0u64; n];
    for &(u, v) in &h.edges {
        pred[v] |= 1 << u;
    }
    Ok(pred)
}

pub fn count_extensions_bruteforce(h: &HasseDiagram) -> Result<u128> {
    count_extensions_bruteforce_with(h, DEFAULT_DP_MAX_NODES)
}

/// Number of linear extensions by dynamic programming over order ideals.
pub fn count_extensions_bruteforce_with(h: &HasseDiagram, max_nodes: usize) -> Result<u128> {
    let pred = predecessor_masks(h, max_nodes)?;
    let n = pred.len();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    // ways[ideal] = number of ways to list the ideal's elements in order
    let mut layer: HashMap<u64, u128> = HashMap::from([(0u64, 1u128)]);
    for _ in 0..n {
        let mut next: HashMap<u64, u128> = HashMap::with_capacity(layer.len() * 2);
        for (&ideal, &ways) in &layer {
            for (v, &pm) in pred.iter().enumerate() {
                let bit = 1u64 << v;
                if ideal & bit == 0 && pm & !ideal == 0 {
                    let e = next.entry(ideal | bit).or_insert(0);
                    *e = e.checked_add(ways).ok_or(Error::Overflow("extension count"))?;
                }
            }
        }
        layer = next;
    }
    Ok(layer.get(&full).copied().unwrap_or(0))
}

pub fn enumerate_extensions(h: &HasseDiagram) -> Result<Vec<Vec<BreakpointId>>> {
    enumerate_extensions_with(h, DEFAULT_ENUMERATE_MAX_NODES)
}

/// Every linear extension, in lexicographic order of label sequences.
pub fn enumerate_extensions_with(h: &HasseDiagram, max_nodes: usize) -> Result<Vec<Vec<BreakpointId>>> {
    let pred = predecessor_masks(h, max_nodes)?;
    let mut by_label: Vec<usize> = (0..pred.len()).collect();
    by_label.sort_by_key(|&i| h.labels[i]);
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(pred.len());
    fn go(
        ideal: u64,
        pred: &[u64],
        by_label: &[usize],
        labels: &[BreakpointId],
        prefix: &mut Vec<BreakpointId>,
        out: &mut Vec<Vec<BreakpointId>>,
    ) {
        if prefix.len() == pred.len() {
            out.push(prefix.clone());
            return;
        }
        for &v in by_label {
            let bit = 1u64 << v;
            if ideal & bit == 0 && pred[v] & !ideal == 0 {
                prefix.push(labels[v]);
                go(ideal | bit, pred, by_label, labels, prefix, out);
                prefix.pop();
            }
        }
    }
    go(0, &pred, &by_label, &h.labels, &mut prefix, &mut out);
    Ok(out)
}
