//! Constraint graphs, path-decomposition witnesses and DOT export.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::landscape::{Orientation, Verdict};

/// Vertices are the instance's variables; edges are its binary scopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    /// Builds a graph from an explicit edge list; duplicate edges collapse.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= num_vertices {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        num_vars: num_vertices,
                    });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Ok(ConstraintGraph {
            num_vertices,
            edges,
            adjacency,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

pub fn constraint_graph(inst: &Instance) -> ConstraintGraph {
    let edges: Vec<_> = inst.binaries().map(|(e, _)| e).collect();
    ConstraintGraph::from_edges(inst.num_vars(), &edges).expect("instance scopes are valid edges")
}

pub fn max_degree(g: &ConstraintGraph) -> usize {
    (0..g.num_vertices()).map(|v| g.degree(v)).max().unwrap_or(0)
}

/// True iff the graph has a cycle. A cycle certifies pathwidth at least 2,
/// since forests have treewidth at most 1.
pub fn has_cycle(g: &ConstraintGraph) -> bool {
    let mut parent: Vec<usize> = (0..g.num_vertices()).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(a, b) in g.edges() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return true;
        }
        parent[ra] = rb;
    }
    false
}

/// An ordered sequence of vertex bags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathDecomposition {
    bags: Vec<Vec<usize>>,
}

impl PathDecomposition {
    pub fn new(bags: Vec<Vec<usize>>) -> Self {
        PathDecomposition { bags }
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    /// Largest bag size minus one; zero for an empty sequence.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(|b| b.iter().collect::<BTreeSet<_>>().len())
            .max()
            .unwrap_or(1)
            .saturating_sub(1)
    }

    /// Parses one bag per line, whitespace-separated indices, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut bags = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bag = content
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad vertex index {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            bags.push(bag);
        }
        Ok(PathDecomposition { bags })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for bag in &self.bags {
            let line: Vec<String> = bag.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// First violated path-decomposition property, with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionViolation {
    NoBags,
    UnknownVertex {
        vertex: usize,
        bag: usize,
    },
    /// Property 1: vertex in no bag.
    MissingVertex {
        vertex: usize,
    },
    /// Property 2: no bag holds both endpoints.
    UncoveredEdge {
        edge: (usize, usize),
    },
    /// Property 3: the bags holding `vertex` are not contiguous.
    BrokenInterval {
        vertex: usize,
        first: usize,
        gap: usize,
        last: usize,
    },
}

impl fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionViolation::NoBags => write!(f, "decomposition has no bags"),
            DecompositionViolation::UnknownVertex { vertex, bag } => {
                write!(f, "bag {bag} names vertex {vertex}, which is not in the graph")
            }
            DecompositionViolation::MissingVertex { vertex } => {
                write!(f, "vertex {vertex} appears in no bag")
            }
            DecompositionViolation::UncoveredEdge { edge: (a, b) } => {
                write!(f, "edge {{{a},{b}}} is contained in no bag")
            }
            DecompositionViolation::BrokenInterval {
                vertex,
                first,
                gap,
                last,
            } => write!(
                f,
                "vertex {vertex} is in bags {first} and {last} but not in bag {gap}"
            ),
        }
    }
}

/// Returns the width when all three path-decomposition properties hold.
pub fn validate_path_decomposition(
    g: &ConstraintGraph,
    decomposition: &PathDecomposition,
) -> std::result::Result<usize, DecompositionViolation> {
    let bags = decomposition.bags();
    if bags.is_empty() {
        return Err(DecompositionViolation::NoBags);
    }
    let n = g.num_vertices();
    let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut membership: Vec<BTreeSet<usize>> = Vec::with_capacity(bags.len());
    for (r, bag) in bags.iter().enumerate() {
        let set: BTreeSet<usize> = bag.iter().copied().collect();
        for &v in &set {
            if v >= n {
                return Err(DecompositionViolation::UnknownVertex { vertex: v, bag: r });
            }
            occurrences[v].push(r);
        }
        membership.push(set);
    }

    if let Some(vertex) = (0..n).find(|&v| occurrences[v].is_empty()) {
        return Err(DecompositionViolation::MissingVertex { vertex });
    }

    for &(a, b) in g.edges() {
        if !membership.iter().any(|s| s.contains(&a) && s.contains(&b)) {
            return Err(DecompositionViolation::UncoveredEdge { edge: (a, b) });
        }
    }

    for (vertex, occ) in occurrences.iter().enumerate() {
        for w in occ.windows(2) {
            if w[1] != w[0] + 1 {
                return Err(DecompositionViolation::BrokenInterval {
                    vertex,
                    first: occ[0],
                    gap: w[0] + 1,
                    last: *occ.last().unwrap(),
                });
            }
        }
    }

    Ok(decomposition.width())
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text for the constraint graph. With an oriented orientation the
/// output is a digraph whose arcs follow sign dependence; edges without a
/// dependence in either direction are drawn with `dir=none`.
pub fn export_dot(inst: &Instance, orientation: Option<&Orientation>) -> String {
    let directed = matches!(orientation, Some(o) if o.verdict() == Verdict::Oriented);
    let mut out = String::new();
    let (kind, connector) = if directed {
        ("digraph", "->")
    } else {
        ("graph", "--")
    };
    let _ = writeln!(out, "{kind} vcsp {{");
    for v in 0..inst.num_vars() {
        let name = dot_escape(&inst.var_name(v));
        let unary = inst.unary(v);
        if unary != 0 {
            let _ = writeln!(out, "  \"{name}\" [xlabel=\"{unary}\"];");
        } else {
            let _ = writeln!(out, "  \"{name}\";");
        }
    }
    for ((a, b), w) in inst.binaries() {
        let (from, to, extra) = match orientation {
            Some(o) if directed => {
                if o.has_arc(a, b) {
                    (a, b, "")
                } else if o.has_arc(b, a) {
                    (b, a, "")
                } else {
                    (a, b, ", dir=none")
                }
            }
            _ => (a, b, ""),
        };
        let _ = writeln!(
            out,
            "  \"{}\" {connector} \"{}\" [label=\"{w}\"{extra}];",
            dot_escape(&inst.var_name(from)),
            dot_escape(&inst.var_name(to)),
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{build_chain, canonical_decomposition, FamilyParams, Sign};
    use crate::landscape::orient;

    fn chain(n: u32, m: u32, sign: Sign) -> Instance {
        build_chain(FamilyParams::new(n, m, sign).unwrap()).unwrap()
    }

    #[test]
    fn gadget_graph_is_a_six_cycle() {
        let g = constraint_graph(&chain(3, 1, Sign::Minus));
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.edges().len(), 6);
        assert!((0..6).all(|v| g.degree(v) == 2));
        assert_eq!(max_degree(&g), 2);
        assert!(has_cycle(&g));
    }

    #[test]
    fn chain_degree_and_edges() {
        let g = constraint_graph(&chain(4, 3, Sign::Plus));
        assert_eq!(g.num_vertices(), 18);
        assert_eq!(g.edges().len(), 20);
        assert_eq!(max_degree(&g), 3);
        assert!(has_cycle(&g));
    }

    #[test]
    fn edgeless_and_forest() {
        let inst = Instance::new(4, 0, &[(0, 1)], &[]).unwrap();
        let g = constraint_graph(&inst);
        assert!(g.edges().is_empty());
        assert_eq!(max_degree(&g), 0);
        assert!(!has_cycle(&g));
        let tree = ConstraintGraph::from_edges(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert!(!has_cycle(&tree));
        let forest = ConstraintGraph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        assert!(!has_cycle(&forest));
    }

    #[test]
    fn canonical_decomposition_validates() {
        for m in 1..=6 {
            let g = constraint_graph(&chain(m, m, Sign::Minus));
            assert_eq!(
                validate_path_decomposition(&g, &canonical_decomposition(m)),
                Ok(2)
            );
        }
    }

    #[test]
    fn single_bag_is_valid() {
        let g = constraint_graph(&chain(2, 2, Sign::Minus));
        let d = PathDecomposition::new(vec![(0..12).collect()]);
        assert_eq!(validate_path_decomposition(&g, &d), Ok(11));
    }

    /// Independent re-scan of the three properties, used as the oracle for
    /// mutilated decompositions.
    fn rescan(g: &ConstraintGraph, bags: &[Vec<usize>]) -> bool {
        let covers = |v: usize| bags.iter().any(|b| b.contains(&v));
        let p1 = (0..g.num_vertices()).all(covers);
        let p2 = g
            .edges()
            .iter()
            .all(|&(a, b)| bags.iter().any(|bag| bag.contains(&a) && bag.contains(&b)));
        let p3 = (0..g.num_vertices()).all(|v| {
            let idx: Vec<usize> = (0..bags.len()).filter(|&r| bags[r].contains(&v)).collect();
            idx.windows(2).all(|w| w[1] == w[0] + 1)
        });
        p1 && p2 && p3
    }

    #[test]
    fn deleting_any_bag_breaks_the_decomposition() {
        for m in 1..=3 {
            let g = constraint_graph(&chain(3, m, Sign::Plus));
            let bags = canonical_decomposition(m).bags().to_vec();
            for drop in 0..bags.len() {
                let mut cut = bags.clone();
                cut.remove(drop);
                let verdict = validate_path_decomposition(&g, &PathDecomposition::new(cut.clone()));
                assert_eq!(verdict.is_ok(), rescan(&g, &cut), "m={m} drop={drop}");
                assert!(verdict.is_err(), "m={m} drop={drop}");
            }
        }
        let g = constraint_graph(&chain(1, 1, Sign::Plus));
        let mut bags = canonical_decomposition(1).bags().to_vec();
        bags.remove(1);
        assert_eq!(
            validate_path_decomposition(&g, &PathDecomposition::new(bags)),
            Err(DecompositionViolation::UncoveredEdge { edge: (1, 2) })
        );
    }

    #[test]
    fn violation_witnesses() {
        let g = ConstraintGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let d = |b: Vec<Vec<usize>>| validate_path_decomposition(&g, &PathDecomposition::new(b));
        assert_eq!(d(vec![]), Err(DecompositionViolation::NoBags));
        assert_eq!(
            d(vec![vec![0, 1]]),
            Err(DecompositionViolation::MissingVertex { vertex: 2 })
        );
        assert_eq!(
            d(vec![vec![0, 1], vec![2]]),
            Err(DecompositionViolation::UncoveredEdge { edge: (1, 2) })
        );
        assert_eq!(
            d(vec![vec![0, 1], vec![0, 2], vec![1, 2]]),
            Err(DecompositionViolation::BrokenInterval {
                vertex: 1,
                first: 0,
                gap: 1,
                last: 2
            })
        );
        assert_eq!(
            d(vec![vec![0, 7]]),
            Err(DecompositionViolation::UnknownVertex { vertex: 7, bag: 0 })
        );
    }

    #[test]
    fn bag_text_round_trip() {
        let d = canonical_decomposition(2);
        let text = format!("# canonical\n{}", d.to_text());
        assert_eq!(PathDecomposition::parse(&text).unwrap(), d);
        assert!(PathDecomposition::parse("0 1\nx\n").is_err());
    }

    #[test]
    fn dot_for_oriented_gadget() {
        let inst = chain(2, 1, Sign::Minus);
        let o = orient(&inst).unwrap();
        let dot = export_dot(&inst, Some(&o));
        assert!(dot.starts_with("digraph vcsp {"));
        for (a, b) in [(1, 2), (1, 4), (2, 3), (4, 5), (3, 6), (5, 6)] {
            assert!(
                dot.contains(&format!("\"(1,{a})\" -> \"(1,{b})\"")),
                "missing arc ({a})->({b}) in\n{dot}"
            );
        }
        assert_eq!(dot.matches("->").count(), 6);
    }

    #[test]
    fn dot_for_plain_instances() {
        let inst = Instance::new(2, 0, &[(0, 1), (1, 1)], &[(0, 1, -3)]).unwrap();
        let dot = export_dot(&inst, None);
        assert!(dot.contains("\"0\""));
        assert!(dot.contains("\"0\" -- \"1\" [label=\"-3\"]"));
        let empty = Instance::new(0, 0, &[], &[]).unwrap();
        assert_eq!(export_dot(&empty, None), "graph vcsp {\n}\n");
    }
}
