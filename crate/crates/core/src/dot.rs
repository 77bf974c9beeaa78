//! Graphviz export. Type-a nodes are red boxes and type-b nodes blue
//! ellipses; major edges are solid, minor edges dashed, fences bold black.

use std::fmt::Write;

use crate::beta::BetaTree;
use crate::tree::{BreakpointId, HasseDiagram, MajorGraph, Side, TdTree};

fn node_line(out: &mut String, id: BreakpointId) {
    let (shape, color) = match id.side {
        Side::A => ("box", "red"),
        Side::B => ("ellipse", "blue"),
    };
    writeln!(out, "  \"{id}\" [shape={shape}, color={color}];").unwrap();
}

fn edge_color(parent: BreakpointId) -> &'static str {
    match parent.side {
        Side::A => "red",
        Side::B => "blue",
    }
}

fn fence_line(out: &mut String, a: BreakpointId, b: BreakpointId, directed: bool) {
    let dir = if directed { "" } else { ", dir=none" };
    writeln!(out, "  \"{a}\" -> \"{b}\" [style=bold, color=black{dir}];").unwrap();
}

pub fn tree_to_dot(t: &TdTree) -> String {
    let mut out = String::from("digraph td_tree {\n");
    for x in t.nodes() {
        node_line(&mut out, x);
    }
    for x in t.nodes() {
        if let Some(p) = t.parents(x) {
            for side in [Side::A, Side::B] {
                let parent = p.parent(side);
                let style = if side == p.major { "solid" } else { "dashed" };
                writeln!(
                    out,
                    "  \"{parent}\" -> \"{x}\" [style={style}, color={}];",
                    edge_color(parent)
                )
                .unwrap();
            }
        }
    }
    for f in t.fences() {
        fence_line(&mut out, BreakpointId::a(f.td), BreakpointId::b(f.td), false);
    }
    out.push_str("}\n");
    out
}

pub fn hasse_to_dot(h: &HasseDiagram) -> String {
    let mut out = String::from("digraph hasse {\n");
    for &x in &h.labels {
        node_line(&mut out, x);
    }
    for &(u, v) in &h.edges {
        let (u, v) = (h.labels[u], h.labels[v]);
        if u.td == v.td && u.side == Side::A && v.side == Side::B {
            fence_line(&mut out, u, v, true);
        } else {
            writeln!(out, "  \"{u}\" -> \"{v}\";").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

pub fn major_to_dot(g: &MajorGraph) -> String {
    let mut out = String::from("digraph major {\n");
    for &x in &g.labels {
        node_line(&mut out, x);
    }
    for (i, p) in g.parent.iter().enumerate() {
        if let Some(p) = p {
            let (u, v) = (g.labels[*p], g.labels[i]);
            writeln!(out, "  \"{u}\" -> \"{v}\" [style=solid, color={}];", edge_color(u)).unwrap();
        }
    }
    for &(a, b) in &g.fences {
        fence_line(&mut out, g.labels[a], g.labels[b], false);
    }
    out.push_str("}\n");
    out
}

pub fn beta_to_dot(t: &BetaTree) -> String {
    let mut out = String::from("digraph beta_tree {\n");
    for &x in &t.labels {
        node_line(&mut out, x);
    }
    for (i, p) in t.parents.iter().enumerate() {
        if let Some(p) = p {
            for side in [Side::A, Side::B] {
                let parent = t.labels[p.of_side(side)];
                let style = if side == p.major { "solid" } else { "dashed" };
                writeln!(
                    out,
                    "  \"{parent}\" -> \"{}\" [style={style}, color={}];",
                    t.labels[i],
                    edge_color(parent)
                )
                .unwrap();
            }
        }
    }
    for &(a, b) in &t.fences {
        fence_line(&mut out, t.labels[a], t.labels[b], false);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_2d_tree, hasse_diagram, major_graph};
    use crate::word::WordEvolution;

    fn count(dot: &str, pat: &str) -> usize {
        dot.lines().filter(|l| l.contains(pat)).count()
    }

    #[test]
    fn single_td_dot() {
        let t = build_2d_tree(&WordEvolution::initial());
        let dot = tree_to_dot(&t);
        assert_eq!(count(&dot, "shape="), 4);
        assert_eq!(count(&dot, "style=solid"), 2);
        assert_eq!(count(&dot, "style=dashed"), 2);
        assert_eq!(count(&dot, "style=bold"), 1);
        let h = hasse_to_dot(&hasse_diagram(&t).unwrap());
        assert_eq!(count(&h, "->"), 5);
        let m = major_to_dot(&major_graph(&t));
        assert_eq!(count(&m, "->"), 3);
    }
}
