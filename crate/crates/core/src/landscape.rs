//! Sign dependence, orientation, peaks and brute-force landscape oracles.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use rayon::prelude::*;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::instance::Instance;

pub const DEFAULT_PEAK_CAP: usize = 24;
pub const DEFAULT_SEMISMOOTH_CAP: usize = 12;
pub const DEFAULT_ASCENT_GRAPH_CAP: usize = 1 << 20;

/// Neighbourhoods larger than this are not enumerated.
const MAX_ENUMERATED_DEGREE: usize = 30;

/// Three-valued sign; zero differs from both signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GradSign {
    Negative,
    Zero,
    Positive,
}

impl GradSign {
    pub fn of(v: i128) -> Self {
        match v.signum() {
            -1 => GradSign::Negative,
            0 => GradSign::Zero,
            _ => GradSign::Positive,
        }
    }
}

/// `target` sign-depends on `source`: in `background` (an assignment to the
/// other neighbours of `target`), the sign of `target`'s gradient changes
/// when `source` flips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignDependence {
    pub source: usize,
    pub target: usize,
    pub background: Vec<(usize, bool)>,
    pub sign_source_zero: GradSign,
    pub sign_source_one: GradSign,
}

/// Searches the neighbourhood of `target` for a background in which flipping
/// `source` changes the sign of `target`'s gradient. Cost is `2^(deg - 1)`.
pub fn sign_depends(inst: &Instance, target: usize, source: usize) -> Result<Option<SignDependence>> {
    let n = inst.num_vars();
    for v in [target, source] {
        if v >= n {
            return Err(Error::IndexOutOfRange {
                index: v,
                num_vars: n,
            });
        }
    }
    if target == source {
        return Err(Error::Range(format!(
            "sign dependence needs two distinct variables, got {target} twice"
        )));
    }
    let Some(link) = inst.binary(target, source) else {
        return Ok(None);
    };
    let others: Vec<(usize, i128)> = inst
        .neighbors(target)
        .iter()
        .copied()
        .filter(|&(j, _)| j != source)
        .collect();
    if others.len() > MAX_ENUMERATED_DEGREE {
        return Err(Error::TooLarge {
            what: "neighbourhood size",
            size: others.len() + 1,
            cap: MAX_ENUMERATED_DEGREE + 1,
        });
    }
    let of = || Error::Overflow("evaluating gradient");
    for mask in 0u64..(1u64 << others.len()) {
        let mut base = inst.unary(target);
        for (b, &(_, w)) in others.iter().enumerate() {
            if mask >> b & 1 == 1 {
                base = base.checked_add(w).ok_or_else(of)?;
            }
        }
        let with = base.checked_add(link).ok_or_else(of)?;
        let (s0, s1) = (GradSign::of(base), GradSign::of(with));
        if s0 != s1 {
            let background = others
                .iter()
                .enumerate()
                .map(|(b, &(j, _))| (j, mask >> b & 1 == 1))
                .collect();
            return Ok(Some(SignDependence {
                source,
                target,
                background,
                sign_source_zero: s0,
                sign_source_one: s1,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Oriented,
    NotOriented,
}

/// An edge whose endpoints sign-depend on each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub pair: (usize, usize),
    /// `pair.1` sign-depends on `pair.0`.
    pub forward: SignDependence,
    /// `pair.0` sign-depends on `pair.1`.
    pub backward: SignDependence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    verdict: Verdict,
    arcs: Vec<(usize, usize)>,
    topo_order: Vec<usize>,
    conflict: Option<Conflict>,
}

impl Orientation {
    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn is_oriented(&self) -> bool {
        self.verdict == Verdict::Oriented
    }

    /// Arcs `i -> j` (meaning `j` sign-depends on `i`), sorted.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs.binary_search(&(from, to)).is_ok()
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }

    pub fn conflict(&self) -> Option<&Conflict> {
        self.conflict.as_ref()
    }
}

/// Orients every constraint edge by sign dependence. Edges with no dependence
/// in either direction stay unoriented. The topological order breaks ties by
/// lowest index.
pub fn orient(inst: &Instance) -> Result<Orientation> {
    let mut arcs = Vec::new();
    for ((a, b), _) in inst.binaries() {
        let b_on_a = sign_depends(inst, b, a)?;
        let a_on_b = sign_depends(inst, a, b)?;
        match (b_on_a, a_on_b) {
            (Some(forward), Some(backward)) => {
                return Ok(Orientation {
                    verdict: Verdict::NotOriented,
                    arcs: Vec::new(),
                    topo_order: Vec::new(),
                    conflict: Some(Conflict {
                        pair: (a, b),
                        forward,
                        backward,
                    }),
                });
            }
            (Some(_), None) => arcs.push((a, b)),
            (None, Some(_)) => arcs.push((b, a)),
            (None, None) => {}
        }
    }
    arcs.sort_unstable();

    let n = inst.num_vars();
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &arcs {
        indegree[b] += 1;
        out[a].push(b);
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut topo_order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        topo_order.push(v);
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if topo_order.len() != n {
        return Err(Error::CyclicOrientation);
    }
    Ok(Orientation {
        verdict: Verdict::Oriented,
        arcs,
        topo_order,
        conflict: None,
    })
}

pub fn is_local_peak(inst: &Instance, x: &Assignment) -> Result<bool> {
    inst.is_local_peak(x)
}

/// Fixes variables in topological order to their preferred value. Each
/// variable's gradient sign is independent of its not-yet-fixed neighbours,
/// so those are read as zero.
pub fn peak_of_oriented(inst: &Instance, orientation: &Orientation) -> Result<Assignment> {
    if !orientation.is_oriented() {
        return Err(Error::NotOriented);
    }
    let mut x = Assignment::zeros(inst.num_vars());
    for &v in orientation.topo_order() {
        let g = inst.gradient(v, &x)?;
        if g == 0 {
            return Err(Error::ZeroGradientAtFix(v));
        }
        x.set(v, g > 0);
    }
    Ok(x)
}

/// Unary weights and neighbour lists packed for bit-mask evaluation.
struct MaskEvaluator {
    unary: Vec<i128>,
    neighbors: Vec<Vec<(u32, i128)>>,
}

impl MaskEvaluator {
    fn new(inst: &Instance) -> Self {
        MaskEvaluator {
            unary: (0..inst.num_vars()).map(|i| inst.unary(i)).collect(),
            neighbors: (0..inst.num_vars())
                .map(|i| inst.neighbors(i).iter().map(|&(j, w)| (j as u32, w)).collect())
                .collect(),
        }
    }

    /// Bit `i` set iff flipping `i` strictly improves fitness at `x`.
    fn improving(&self, x: u64) -> Result<u64> {
        let mut mask = 0u64;
        for (i, nb) in self.neighbors.iter().enumerate() {
            let mut g = self.unary[i];
            for &(j, w) in nb {
                if x >> j & 1 == 1 {
                    g = g.checked_add(w).ok_or(Error::Overflow("evaluating gradient"))?;
                }
            }
            let up = x >> i & 1 == 0;
            if (up && g > 0) || (!up && g < 0) {
                mask |= 1 << i;
            }
        }
        Ok(mask)
    }
}

fn check_cap(what: &'static str, size: usize, cap: usize) -> Result<()> {
    if size > cap || size >= 64 {
        return Err(Error::TooLarge { what, size, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peak {
    pub assignment: Assignment,
    pub fitness: i128,
}

/// All local peaks by exhaustive scan, sorted by fitness descending (ties by
/// assignment).
pub fn enumerate_peaks(inst: &Instance, cap: usize) -> Result<Vec<Peak>> {
    let d = inst.num_vars();
    check_cap("variable count", d, cap)?;
    let eval = MaskEvaluator::new(inst);
    let masks: Vec<u64> = (0u64..1 << d)
        .into_par_iter()
        .map(|x| eval.improving(x).map(|imp| (x, imp)))
        .filter_map(|r| match r {
            Ok((x, 0)) => Some(Ok(x)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    let mut peaks = masks
        .into_iter()
        .map(|x| {
            let assignment = Assignment::from_mask(x, d);
            inst.fitness(&assignment)
                .map(|fitness| Peak { assignment, fitness })
        })
        .collect::<Result<Vec<_>>>()?;
    peaks.sort_by(|a, b| {
        b.fitness
            .cmp(&a.fitness)
            .then_with(|| a.assignment.cmp(&b.assignment))
    });
    Ok(peaks)
}

/// A face (sub-cube) of the hypercube that does not have exactly one peak.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceViolation {
    /// Variables free to vary on the face.
    pub free: Vec<usize>,
    /// Values of the fixed variables; free positions read as zero.
    pub background: Assignment,
    /// Face-local peaks (zero or at least two of them).
    pub peaks: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Semismoothness {
    Semismooth,
    Violation(FaceViolation),
}

/// Checks that every face of the hypercube has exactly one face-local peak.
///
/// A vertex is a peak of a face when no flip of a free variable strictly
/// improves it, so it suffices to know, for every vertex, the set of
/// improving directions. Faces are visited by free set, then background, in
/// increasing bit-mask order; the first violation is returned. Work is `4^d`.
pub fn check_semismooth(inst: &Instance, cap: usize) -> Result<Semismoothness> {
    let d = inst.num_vars();
    check_cap("variable count", d, cap)?;
    let eval = MaskEvaluator::new(inst);
    let size = 1usize << d;
    let improving: Vec<u64> = (0..size as u64)
        .into_par_iter()
        .map(|x| eval.improving(x))
        .collect::<Result<_>>()?;

    let violation = (0..size as u64)
        .into_par_iter()
        .map_init(
            || vec![0u32; size],
            |counts, free| {
                counts.iter_mut().for_each(|c| *c = 0);
                for (x, &imp) in improving.iter().enumerate() {
                    if imp & free == 0 {
                        counts[x & !(free as usize)] += 1;
                    }
                }
                (0..size)
                    .filter(|&bg| bg as u64 & free == 0)
                    .find(|&bg| counts[bg] != 1)
                    .map(|bg| (free, bg as u64))
            },
        )
        .find_first(Option::is_some)
        .flatten();

    Ok(match violation {
        None => Semismoothness::Semismooth,
        Some((free, bg)) => {
            let peaks = (0..size as u64)
                .filter(|&x| x & !free == bg && improving[x as usize] & free == 0)
                .map(|x| Assignment::from_mask(x, d))
                .collect();
            Semismoothness::Violation(FaceViolation {
                free: (0..d).filter(|&i| free >> i & 1 == 1).collect(),
                background: Assignment::from_mask(bg, d),
                peaks,
            })
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AscentEdge {
    pub from: usize,
    pub to: usize,
    pub var: usize,
    pub gain: i128,
}

/// Every assignment reachable from a start by strictly improving flips.
/// Node 0 is the start.
#[derive(Debug, Clone)]
pub struct AscentGraph {
    nodes: Vec<Assignment>,
    fitness: Vec<i128>,
    index: HashMap<Assignment, usize>,
    edges: Vec<AscentEdge>,
    out: Vec<Vec<usize>>,
    sinks: Vec<usize>,
}

impl AscentGraph {
    pub fn nodes(&self) -> &[Assignment] {
        &self.nodes
    }

    pub fn fitness(&self, node: usize) -> i128 {
        self.fitness[node]
    }

    pub fn node_of(&self, x: &Assignment) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn edges(&self) -> &[AscentEdge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &AscentEdge> {
        self.out[node].iter().map(|&e| &self.edges[e])
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn start(&self) -> &Assignment {
        &self.nodes[0]
    }

    /// Lengths of all maximal ascents from the start (paths ending in a sink).
    pub fn maximal_path_lengths(&self) -> BTreeSet<usize> {
        // Nodes sorted by decreasing fitness come after all their successors.
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&v| Reverse(self.fitness[v]));
        let mut lengths: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nodes.len()];
        for v in order {
            if self.out[v].is_empty() {
                lengths[v].insert(0);
                continue;
            }
            let mut acc = BTreeSet::new();
            for e in self.out_edges(v) {
                acc.extend(lengths[e.to].iter().map(|l| l + 1));
            }
            lengths[v] = acc;
        }
        std::mem::take(&mut lengths[0])
    }
}

/// Breadth-first expansion of improving flips from `start`, up to `cap` nodes.
pub fn ascent_graph(inst: &Instance, start: &Assignment, cap: usize) -> Result<AscentGraph> {
    let f0 = inst.fitness(start)?;
    let mut g = AscentGraph {
        nodes: vec![start.clone()],
        fitness: vec![f0],
        index: HashMap::from([(start.clone(), 0)]),
        edges: Vec::new(),
        out: vec![Vec::new()],
        sinks: Vec::new(),
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let x = g.nodes[v].clone();
        let moves = inst.improving_moves(&x)?;
        if moves.is_empty() {
            g.sinks.push(v);
        }
        for mv in moves {
            let y = x.flipped(mv.var)?;
            let to = match g.index.get(&y) {
                Some(&to) => to,
                None => {
                    if g.nodes.len() >= cap {
                        return Err(Error::TooLarge {
                            what: "ascent graph node count",
                            size: g.nodes.len() + 1,
                            cap,
                        });
                    }
                    let to = g.nodes.len();
                    let fy = g.fitness[v]
                        .checked_add(mv.gain)
                        .ok_or(Error::Overflow("evaluating fitness"))?;
                    g.index.insert(y.clone(), to);
                    g.nodes.push(y);
                    g.fitness.push(fy);
                    g.out.push(Vec::new());
                    queue.push_back(to);
                    to
                }
            };
            g.out[v].push(g.edges.len());
            g.edges.push(AscentEdge {
                from: v,
                to,
                var: mv.var,
                gain: mv.gain,
            });
        }
    }
    g.sinks.sort_unstable();
    Ok(g)
}

/// Number of steps on a shortest ascent path from the start to `target`.
pub fn shortest_ascent_length(graph: &AscentGraph, target: &Assignment) -> Result<usize> {
    let goal = graph.node_of(target).ok_or(Error::Unreachable)?;
    let mut dist = vec![usize::MAX; graph.nodes.len()];
    dist[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if v == goal {
            return Ok(dist[v]);
        }
        for e in graph.out_edges(v) {
            if dist[e.to] == usize::MAX {
                dist[e.to] = dist[v] + 1;
                queue.push_back(e.to);
            }
        }
    }
    Err(Error::Unreachable)
}
