//! JSON report documents. Field order is the key order of the output.

use std::cmp::Ordering;

use concsys::graphs::Graphs;
use concsys::measure::{numeric_null_check, uniqueness_diagnostics, UniquenessReport};
use concsys::spectral::{
    characteristic_root, mobius_matrix, spectral_property_report, spectral_radius, verify_inversion,
    CharacteristicRoot, InversionReport, RootBound, POWER_TOLERANCE,
};
use concsys::{ConcurrentSystem, Poly, SystemClassification, UniformMeasure};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SystemInfo {
    pub alphabet: Vec<String>,
    pub independence: Vec<(String, String)>,
    pub states: Vec<String>,
    pub base: String,
}

impl SystemInfo {
    pub fn new(sys: &ConcurrentSystem) -> Self {
        let m = sys.monoid();
        SystemInfo {
            alphabet: m.alphabet().to_vec(),
            independence: m
                .independent_pairs()
                .into_iter()
                .map(|(a, b)| (m.name(a).to_string(), m.name(b).to_string()))
                .collect(),
            states: sys.states().to_vec(),
            base: sys.state_name(sys.base()).to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Polynomials {
    /// Rows of the Möbius matrix, each entry a coefficient array.
    pub mobius: Vec<Vec<Poly>>,
    pub theta: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootInfo {
    pub lo: String,
    pub hi: String,
    pub exact: bool,
    pub approx: f64,
}

impl RootInfo {
    pub fn new(r: &CharacteristicRoot) -> Self {
        RootInfo {
            lo: r.lo.to_string(),
            hi: r.hi.to_string(),
            exact: r.is_exact(),
            approx: r.approx(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphStats {
    pub dsc_nodes: usize,
    pub dsc_arcs: usize,
    pub adsc_nodes: usize,
    pub adsc_arcs: usize,
    pub dsc_components: usize,
    pub dsc_terminal_components: usize,
    pub dsc_plus_nodes: usize,
    pub dsc_plus_components: usize,
    pub dsc_plus_terminal_components: usize,
    pub null_nodes: Vec<String>,
    pub spectral_radius_adsc: Option<f64>,
    pub spectral_radius_adsc_plus: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeLabel {
    pub node: String,
    pub state: String,
    pub clique: String,
    pub label: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleReport {
    /// `Γ(base, β)` per state.
    pub vector: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub kernel_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CliqueValue {
    pub clique: String,
    pub f: f64,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateTable {
    pub state: String,
    pub values: Vec<CliqueValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeValue {
    pub node: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InitialLaw {
    pub state: String,
    pub law: Vec<NodeValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct McscReport {
    pub nodes: Vec<String>,
    pub initial: Vec<InitialLaw>,
    pub transition: Vec<Vec<f64>>,
    pub unreachable: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LetterRoot {
    pub letter: String,
    /// `None` when executions without the letter have bounded length.
    pub root: Option<RootInfo>,
    pub comparison: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub holds: bool,
    pub letters: Vec<LetterRoot>,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NullCheck {
    pub pass: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub errors: Vec<String>,
    pub inversion: InversionReport,
    pub null_check: Option<NullCheck>,
    pub identity_violations: Vec<String>,
    pub uniqueness: Option<UniquenessReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub system: SystemInfo,
    pub classification: SystemClassification,
    pub polynomials: Polynomials,
    pub root: Option<RootInfo>,
    pub graphs: GraphStats,
    pub nodes: Vec<NodeLabel>,
    pub gamma: Option<CocycleReport>,
    pub tables: Option<Vec<StateTable>>,
    pub g: Option<Vec<NodeValue>>,
    pub mcsc: Option<McscReport>,
    pub spectral_property: Option<SpectralReport>,
    pub diagnostics: Diagnostics,
}

fn ordering_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn graph_stats(sys: &ConcurrentSystem, g: &Graphs, errors: &mut Vec<String>) -> GraphStats {
    let dsc_cond = g.dsc.condensation();
    let (plus, _) = g.dsc_plus();
    let plus_cond = plus.condensation();
    let (adsc_plus, _) = g.adsc_plus();
    let mut radius = |graph: &concsys::Digraph| match spectral_radius(graph, POWER_TOLERANCE) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("spectral radius: {e}"));
            None
        }
    };
    GraphStats {
        dsc_nodes: g.dsc.len(),
        dsc_arcs: g.dsc.graph.num_arcs(),
        adsc_nodes: g.adsc.len(),
        adsc_arcs: g.adsc.graph.num_arcs(),
        dsc_components: dsc_cond.len(),
        dsc_terminal_components: dsc_cond.terminal_components().len(),
        dsc_plus_nodes: plus.len(),
        dsc_plus_components: plus_cond.len(),
        dsc_plus_terminal_components: plus_cond.terminal_components().len(),
        null_nodes: g.null_nodes().into_iter().map(|i| g.dsc.node_name(sys, i)).collect(),
        spectral_radius_adsc: radius(&g.adsc.graph),
        spectral_radius_adsc_plus: radius(&adsc_plus.graph),
    }
}

pub fn analyze(sys: &ConcurrentSystem, precision: f64, series_order: usize) -> AnalysisReport {
    let graphs = Graphs::new(sys);
    let m = sys.monoid();
    let classification = sys.classify();
    let mu = mobius_matrix(sys);
    let d = sys.num_states();
    let polynomials = Polynomials {
        mobius: (0..d).map(|i| (0..d).map(|j| mu.get(i, j).clone()).collect()).collect(),
        theta: mu.determinant(),
    };
    let mut errors = Vec::new();
    let root = match characteristic_root(sys, precision) {
        Ok(r) => Some(r),
        Err(e) => {
            errors.push(format!("characteristic root: {e}"));
            None
        }
    };
    let stats = graph_stats(sys, &graphs, &mut errors);
    let nodes = graphs
        .dsc
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| NodeLabel {
            node: graphs.dsc.node_name(sys, i),
            state: sys.state_name(n.state).to_string(),
            clique: m.clique_name(n.clique),
            label: if graphs.positive[i] { "positive" } else { "null" },
        })
        .collect();

    let spectral_property = match root {
        Some(_) => match spectral_property_report(sys, precision) {
            Ok(rep) => Some(SpectralReport {
                holds: rep.holds,
                letters: rep
                    .letters
                    .iter()
                    .map(|l| LetterRoot {
                        letter: l.letter.clone(),
                        root: match &l.root {
                            RootBound::Finite(r) => Some(RootInfo::new(r)),
                            RootBound::Infinite => None,
                        },
                        comparison: ordering_name(l.ordering),
                    })
                    .collect(),
                witnesses: rep.witnesses,
            }),
            Err(e) => {
                errors.push(format!("spectral property: {e}"));
                None
            }
        },
        None => None,
    };

    let inversion = verify_inversion(sys, &graphs.adsc, series_order);
    let measure = if classification.irreducible {
        match UniformMeasure::new(sys, &graphs, precision) {
            Ok(me) => Some(me),
            Err(e) => {
                errors.push(format!("uniform measure: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut null_check = None;
    let mut identity_violations = Vec::new();
    let mut uniqueness = None;
    let (mut gamma, mut tables, mut g, mut mcsc) = (None, None, None, None);
    if let Some(me) = &measure {
        null_check = Some(match numeric_null_check(sys, me, &graphs) {
            Ok(_) => NullCheck {
                pass: true,
                detail: None,
            },
            Err(e) => NullCheck {
                pass: false,
                detail: Some(e.to_string()),
            },
        });
        identity_violations = me.check_identities(sys, &graphs.dsc);
        match uniqueness_diagnostics(sys, me, &graphs) {
            Ok(u) => uniqueness = Some(u),
            Err(e) => errors.push(format!("uniqueness diagnostics: {e}")),
        }
        let base = sys.base();
        gamma = Some(CocycleReport {
            vector: (0..d).map(|b| me.gamma(base, b)).collect(),
            matrix: (0..d).map(|a| (0..d).map(|b| me.gamma(a, b)).collect()).collect(),
            kernel_dim: me.cocycle.kernel_dim,
        });
        tables = Some(
            (0..d)
                .map(|a| StateTable {
                    state: sys.state_name(a).to_string(),
                    values: m
                        .cliques()
                        .iter()
                        .filter(|c| !c.is_empty())
                        .map(|&c| CliqueValue {
                            clique: m.clique_name(c),
                            f: me.f(a, c),
                            h: me.h(a, c),
                        })
                        .collect(),
                })
                .collect(),
        );
        let name = |i: usize| graphs.dsc.node_name(sys, i);
        g = Some(
            me.g.iter()
                .enumerate()
                .map(|(i, &value)| NodeValue { node: name(i), value })
                .collect(),
        );
        mcsc = Some(McscReport {
            nodes: (0..graphs.dsc.len()).map(name).collect(),
            initial: me
                .chain
                .initial
                .iter()
                .enumerate()
                .map(|(a, law)| InitialLaw {
                    state: sys.state_name(a).to_string(),
                    law: law
                        .iter()
                        .map(|&(i, value)| NodeValue { node: name(i), value })
                        .collect(),
                })
                .collect(),
            transition: me.chain.transition.clone(),
            unreachable: (0..graphs.dsc.len())
                .filter(|&i| me.chain.unreachable[i])
                .map(name)
                .collect(),
        });
    }

    let pass = errors.is_empty()
        && inversion.pass
        && null_check.as_ref().is_none_or(|n| n.pass)
        && identity_violations.is_empty()
        && uniqueness.as_ref().is_none_or(|u| u.pass);
    AnalysisReport {
        system: SystemInfo::new(sys),
        classification,
        polynomials,
        root: root.as_ref().map(RootInfo::new),
        graphs: stats,
        nodes,
        gamma,
        tables,
        g,
        mcsc,
        spectral_property,
        diagnostics: Diagnostics {
            errors,
            inversion,
            null_check,
            identity_violations,
            uniqueness,
            pass,
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub word: String,
    pub nodes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
    pub mode: &'static str,
    pub start: String,
    pub seed: u64,
    pub samples: Vec<SampleRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorReport {
    pub error: String,
    pub exit_code: i32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use concsys::fixtures;

    #[test]
    fn e1_report_tables() {
        let rep = analyze(&fixtures::e1(), 1e-12, 10);
        assert!(rep.diagnostics.pass);
        let root = rep.root.unwrap();
        assert!(root.exact);
        assert_eq!(root.lo, "1/2");
        let tables = rep.tables.unwrap();
        let ad = tables[0].values.iter().find(|v| v.clique == "ad").unwrap();
        assert!((ad.h - 0.25).abs() < 1e-9);
        assert_eq!(rep.mcsc.unwrap().unreachable, ["(α0,d)"]);
        assert_eq!(rep.nodes.iter().filter(|n| n.label == "null").count(), 1);
    }

    #[test]
    fn reducible_report_has_no_measure() {
        let rep = analyze(&fixtures::tm2(), 1e-12, 10);
        assert!(!rep.classification.irreducible);
        assert!(rep.gamma.is_none() && rep.mcsc.is_none() && rep.diagnostics.uniqueness.is_none());
        let sp = rep.spectral_property.unwrap();
        assert!(!sp.holds);
        assert_eq!(sp.witnesses, ["a", "b"]);
    }
}
