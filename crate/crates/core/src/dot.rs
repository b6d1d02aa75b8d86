//! Graphviz rendering of the state graph and the digraphs of
//! states-and-cliques.

use std::fmt::Write as _;

use crate::graphs::{Graphs, StateCliqueGraph};
use crate::system::ConcurrentSystem;

pub const POSITIVE_COLOR: &str = "palegreen";
pub const NULL_COLOR: &str = "lightcoral";

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DotGraph {
    Dsc,
    Adsc,
    States,
    Condensation,
}

impl std::str::FromStr for DotGraph {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dsc" => Ok(DotGraph::Dsc),
            "adsc" => Ok(DotGraph::Adsc),
            "states" => Ok(DotGraph::States),
            "condensation" => Ok(DotGraph::Condensation),
            other => Err(format!("unknown graph `{other}`")),
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn export_dot(sys: &ConcurrentSystem, graphs: &Graphs, kind: DotGraph) -> String {
    match kind {
        DotGraph::States => states_dot(sys),
        DotGraph::Dsc => clustered(sys, &graphs.dsc, &graphs.positive, "dsc"),
        DotGraph::Adsc => clustered(sys, &graphs.adsc, &graphs.positive, "adsc"),
        DotGraph::Condensation => condensation_dot(sys, &graphs.dsc, &graphs.positive),
    }
}

fn states_dot(sys: &ConcurrentSystem) -> String {
    let mut out = String::from("digraph states {\n  node [shape=circle];\n");
    for s in sys.states() {
        writeln!(out, "  {};", quote(s)).unwrap();
    }
    for (s, a, t) in sys.state_edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(sys.state_name(s)),
            quote(sys.state_name(t)),
            quote(sys.monoid().name(a))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn clustered(sys: &ConcurrentSystem, g: &StateCliqueGraph, positive: &[bool], name: &str) -> String {
    let cond = g.condensation();
    let mut out = format!("digraph {name} {{\n  node [shape=box, style=filled];\n");
    for (k, members) in cond.members.iter().enumerate() {
        writeln!(out, "  subgraph cluster_{k} {{").unwrap();
        if cond.terminal[k] {
            writeln!(out, "    peripheries=2;").unwrap();
        }
        for &i in members {
            let color = if positive[g.nodes[i].dsc] {
                POSITIVE_COLOR
            } else {
                NULL_COLOR
            };
            writeln!(
                out,
                "    n{i} [label={}, fillcolor={color}];",
                quote(&g.node_name(sys, i))
            )
            .unwrap();
        }
        writeln!(out, "  }}").unwrap();
    }
    for (u, v) in g.graph.arcs() {
        writeln!(out, "  n{u} -> n{v};").unwrap();
    }
    out.push_str("}\n");
    out
}

fn condensation_dot(sys: &ConcurrentSystem, dsc: &StateCliqueGraph, positive: &[bool]) -> String {
    let cond = dsc.condensation();
    let mut out = String::from("digraph condensation {\n  node [shape=box, style=filled];\n");
    for (k, members) in cond.members.iter().enumerate() {
        let label: Vec<String> = members.iter().map(|&i| dsc.node_name(sys, i)).collect();
        let color = if members.iter().all(|&i| positive[i]) {
            POSITIVE_COLOR
        } else {
            NULL_COLOR
        };
        writeln!(out, "  subgraph cluster_{k} {{").unwrap();
        if cond.terminal[k] {
            writeln!(out, "    peripheries=2;").unwrap();
        }
        writeln!(out, "    c{k} [label={}, fillcolor={color}];", quote(&label.join(" "))).unwrap();
        writeln!(out, "  }}").unwrap();
    }
    for (u, v) in cond.dag.arcs() {
        writeln!(out, "  c{u} -> c{v};").unwrap();
    }
    out.push_str("}\n");
    out
}
