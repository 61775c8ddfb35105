//! Ascent engine: steepest, random and first-improvement update rules.
//!
//! Every rule shares [`AscentState`], which keeps the gradient of each
//! variable current after each flip by touching only the flipped variable's
//! neighbours. Steepest ascent additionally keeps a tournament tree over the
//! flip gains, so each step costs `O(deg · log d)` regardless of instance
//! size. Steps are streamed to a [`StepObserver`]; [`Trace`] records them all,
//! [`NoRecord`] keeps only the summary.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::instance::{BitOrder, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Flip the lowest dense index among the maximal-gain moves.
    #[default]
    LowestIndex,
    /// Fail with [`Error::TieEncountered`].
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AscentOptions {
    pub tie_policy: TiePolicy,
    /// Stop after this many steps and mark the result truncated.
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub var: usize,
    pub gain: i128,
    pub fitness_after: i128,
}

pub trait StepObserver {
    fn observe(&mut self, step: &Step);
}

impl StepObserver for Vec<Step> {
    fn observe(&mut self, step: &Step) {
        self.push(*step);
    }
}

impl<F: FnMut(&Step)> StepObserver for F {
    fn observe(&mut self, step: &Step) {
        self(step)
    }
}

/// Observer that discards steps.
pub struct NoRecord;

impl StepObserver for NoRecord {
    fn observe(&mut self, _: &Step) {}
}

/// Aggregate outcome of one ascent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AscentSummary {
    pub start: Assignment,
    pub end: Assignment,
    pub steps: u64,
    /// Steps where two or more moves shared the maximal gain (steepest only).
    pub tie_events: u64,
    pub min_gain: Option<i128>,
    pub start_fitness: i128,
    pub final_fitness: i128,
    /// The step cap stopped the run before a peak.
    pub truncated: bool,
}

/// A fully recorded ascent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Assignment,
    pub steps: Vec<Step>,
    pub end: Assignment,
    pub tie_events: u64,
    pub truncated: bool,
}

impl Trace {
    fn from_parts(summary: AscentSummary, steps: Vec<Step>) -> Self {
        Trace {
            start: summary.start,
            steps,
            end: summary.end,
            tie_events: summary.tie_events,
            truncated: summary.truncated,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn min_gain(&self) -> Option<i128> {
        self.steps.iter().map(|s| s.gain).min()
    }

    /// Re-applies every flip from the start and checks each recorded gain
    /// and fitness against a fresh evaluation, strict increase at each step,
    /// the end assignment, and (unless truncated) that the end is a peak.
    pub fn replay(&self, inst: &Instance) -> std::result::Result<(), String> {
        let mut x = self.start.clone();
        let mut f = inst.fitness(&x).map_err(|e| e.to_string())?;
        for (t, s) in self.steps.iter().enumerate() {
            let y = x.flipped(s.var).map_err(|e| e.to_string())?;
            let fy = inst.fitness(&y).map_err(|e| e.to_string())?;
            if fy != s.fitness_after || fy - f != s.gain {
                return Err(format!(
                    "step {}: recorded gain {} / fitness {}, replay gives {} / {}",
                    t + 1,
                    s.gain,
                    s.fitness_after,
                    fy - f,
                    fy
                ));
            }
            if fy <= f {
                return Err(format!("step {} does not increase fitness", t + 1));
            }
            x = y;
            f = fy;
        }
        if x != self.end {
            return Err("replayed end differs from the recorded end".into());
        }
        if !self.truncated && !inst.is_local_peak(&x).map_err(|e| e.to_string())? {
            return Err("end of a complete trace is not a local peak".into());
        }
        Ok(())
    }
}

/// Current assignment with incrementally maintained gradients.
pub struct AscentState<'a> {
    inst: &'a Instance,
    x: Assignment,
    grad: Vec<i128>,
    fitness: i128,
}

impl<'a> AscentState<'a> {
    pub fn new(inst: &'a Instance, start: &Assignment) -> Result<Self> {
        let fitness = inst.fitness(start)?;
        let grad = (0..inst.num_vars())
            .map(|i| inst.gradient(i, start))
            .collect::<Result<_>>()?;
        Ok(AscentState {
            inst,
            x: start.clone(),
            grad,
            fitness,
        })
    }

    pub fn assignment(&self) -> &Assignment {
        &self.x
    }

    pub fn fitness(&self) -> i128 {
        self.fitness
    }

    /// Fitness change from flipping `i` now.
    pub fn gain(&self, i: usize) -> i128 {
        if self.x.get(i) {
            -self.grad[i]
        } else {
            self.grad[i]
        }
    }

    /// Flips `i` and returns the step taken.
    pub fn flip(&mut self, i: usize) -> Result<Step> {
        let gain = self.gain(i);
        let rising = !self.x.get(i);
        self.x.flip_in_place(i);
        for &(j, w) in self.inst.neighbors(i) {
            let g = &mut self.grad[j];
            *g = if rising {
                g.checked_add(w)
            } else {
                g.checked_sub(w)
            }
            .ok_or(Error::Overflow("updating gradients"))?;
        }
        self.fitness = self
            .fitness
            .checked_add(gain)
            .ok_or(Error::Overflow("updating fitness"))?;
        Ok(Step {
            var: i,
            gain,
            fitness_after: self.fitness,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    gain: i128,
    var: u32,
    count: u32,
}

const EMPTY_SLOT: Slot = Slot {
    gain: i128::MIN,
    var: u32::MAX,
    count: 0,
};

fn merge(a: Slot, b: Slot) -> Slot {
    use std::cmp::Ordering::*;
    match a.gain.cmp(&b.gain) {
        Greater => a,
        Less => b,
        Equal => Slot {
            gain: a.gain,
            var: a.var.min(b.var),
            count: a.count + b.count,
        },
    }
}

/// Max-gain tournament tree; the root holds the best gain, the lowest
/// variable achieving it, and how many variables tie for it.
struct Tournament {
    leaves: usize,
    nodes: Vec<Slot>,
}

impl Tournament {
    fn new(gains: impl ExactSizeIterator<Item = i128>) -> Self {
        let leaves = gains.len().next_power_of_two().max(1);
        let mut nodes = vec![EMPTY_SLOT; 2 * leaves];
        for (i, g) in gains.enumerate() {
            nodes[leaves + i] = Slot {
                gain: g,
                var: i as u32,
                count: 1,
            };
        }
        for p in (1..leaves).rev() {
            nodes[p] = merge(nodes[2 * p], nodes[2 * p + 1]);
        }
        Tournament { leaves, nodes }
    }

    fn update(&mut self, i: usize, gain: i128) {
        let mut p = self.leaves + i;
        self.nodes[p].gain = gain;
        while p > 1 {
            p /= 2;
            self.nodes[p] = merge(self.nodes[2 * p], self.nodes[2 * p + 1]);
        }
    }

    fn best(&self) -> Slot {
        self.nodes[1]
    }
}

struct Run<'o, O> {
    summary: AscentSummary,
    observer: &'o mut O,
}

impl<'o, O: StepObserver> Run<'o, O> {
    fn new(state: &AscentState<'_>, observer: &'o mut O) -> Self {
        Run {
            summary: AscentSummary {
                start: state.x.clone(),
                end: state.x.clone(),
                steps: 0,
                tie_events: 0,
                min_gain: None,
                start_fitness: state.fitness,
                final_fitness: state.fitness,
                truncated: false,
            },
            observer,
        }
    }

    fn capped(&mut self, opts: &AscentOptions) -> bool {
        if opts.max_steps.is_some_and(|cap| self.summary.steps >= cap) {
            self.summary.truncated = true;
            return true;
        }
        false
    }

    fn record(&mut self, step: Step) {
        self.summary.steps += 1;
        self.summary.min_gain = Some(self.summary.min_gain.map_or(step.gain, |g| g.min(step.gain)));
        self.observer.observe(&step);
    }

    fn finish(mut self, state: AscentState<'_>) -> AscentSummary {
        self.summary.final_fitness = state.fitness;
        self.summary.end = state.x;
        self.summary
    }
}

/// Steepest ascent, streaming each step to `observer`.
pub fn steepest_ascent_with<O: StepObserver>(
    inst: &Instance,
    start: &Assignment,
    opts: &AscentOptions,
    observer: &mut O,
) -> Result<AscentSummary> {
    let mut state = AscentState::new(inst, start)?;
    let mut run = Run::new(&state, observer);
    let mut tree = Tournament::new((0..inst.num_vars()).map(|i| state.gain(i)));
    loop {
        let best = tree.best();
        if best.gain <= 0 || run.capped(opts) {
            break;
        }
        if best.count > 1 {
            if opts.tie_policy == TiePolicy::Error {
                let vars = (0..inst.num_vars())
                    .filter(|&i| state.gain(i) == best.gain)
                    .collect();
                return Err(Error::TieEncountered {
                    step: run.summary.steps + 1,
                    vars,
                });
            }
            run.summary.tie_events += 1;
        }
        let var = best.var as usize;
        let step = state.flip(var)?;
        tree.update(var, state.gain(var));
        for &(j, _) in inst.neighbors(var) {
            tree.update(j, state.gain(j));
        }
        run.record(step);
    }
    Ok(run.finish(state))
}

pub fn steepest_ascent(inst: &Instance, start: &Assignment, tie_policy: TiePolicy) -> Result<Trace> {
    let mut steps = Vec::new();
    let opts = AscentOptions {
        tie_policy,
        max_steps: None,
    };
    let summary = steepest_ascent_with(inst, start, &opts, &mut steps)?;
    Ok(Trace::from_parts(summary, steps))
}

/// Variables with positive gain, with O(1) insert, remove and indexing.
struct ImprovingSet {
    members: Vec<usize>,
    position: Vec<usize>,
}

impl ImprovingSet {
    fn new(state: &AscentState<'_>, n: usize) -> Self {
        let mut set = ImprovingSet {
            members: Vec::new(),
            position: vec![usize::MAX; n],
        };
        for i in 0..n {
            set.refresh(i, state.gain(i));
        }
        set
    }

    fn refresh(&mut self, i: usize, gain: i128) {
        let present = self.position[i] != usize::MAX;
        if gain > 0 && !present {
            self.position[i] = self.members.len();
            self.members.push(i);
        } else if gain <= 0 && present {
            let p = self.position[i];
            let last = *self.members.last().unwrap();
            self.members.swap_remove(p);
            if last != i {
                self.position[last] = p;
            }
            self.position[i] = usize::MAX;
        }
    }
}

/// Random ascent: each step flips a uniformly chosen improving variable,
/// drawn from a ChaCha8 stream seeded by `seed`.
pub fn random_ascent_with<O: StepObserver>(
    inst: &Instance,
    start: &Assignment,
    seed: u64,
    opts: &AscentOptions,
    observer: &mut O,
) -> Result<AscentSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AscentState::new(inst, start)?;
    let mut run = Run::new(&state, observer);
    let mut improving = ImprovingSet::new(&state, inst.num_vars());
    while !improving.members.is_empty() && !run.capped(opts) {
        let pick = rng.random_range(0..improving.members.len());
        let var = improving.members[pick];
        let step = state.flip(var)?;
        improving.refresh(var, state.gain(var));
        for &(j, _) in inst.neighbors(var) {
            improving.refresh(j, state.gain(j));
        }
        run.record(step);
    }
    Ok(run.finish(state))
}

pub fn random_ascent(inst: &Instance, start: &Assignment, seed: u64) -> Result<Trace> {
    let mut steps = Vec::new();
    let summary = random_ascent_with(inst, start, seed, &AscentOptions::default(), &mut steps)?;
    Ok(Trace::from_parts(summary, steps))
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidScanOrder(format!(
            "length {} for {n} variables",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidScanOrder(format!(
                "{v} is out of range or repeated"
            )));
        }
    }
    Ok(())
}

/// First-improvement ascent. The scan resumes just after the position of
/// the previous flip and wraps around `scan_order`.
pub fn first_improvement_ascent_with<O: StepObserver>(
    inst: &Instance,
    start: &Assignment,
    scan_order: &[usize],
    opts: &AscentOptions,
    observer: &mut O,
) -> Result<AscentSummary> {
    let n = inst.num_vars();
    check_permutation(scan_order, n)?;
    let mut state = AscentState::new(inst, start)?;
    let mut run = Run::new(&state, observer);
    let mut cursor = 0;
    while !run.capped(opts) {
        let Some(offset) = (0..n).find(|&o| state.gain(scan_order[(cursor + o) % n]) > 0) else {
            break;
        };
        let pos = (cursor + offset) % n;
        let step = state.flip(scan_order[pos])?;
        run.record(step);
        cursor = (pos + 1) % n;
    }
    Ok(run.finish(state))
}

pub fn first_improvement_ascent(inst: &Instance, start: &Assignment, scan_order: &[usize]) -> Result<Trace> {
    let mut steps = Vec::new();
    let summary =
        first_improvement_ascent_with(inst, start, scan_order, &AscentOptions::default(), &mut steps)?;
    Ok(Trace::from_parts(summary, steps))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Method {
    Steepest(TiePolicy),
    Random,
    /// Scan order as a permutation of dense indices.
    FirstImprovement(Vec<usize>),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Steepest(_) => "steepest",
            Method::Random => "random",
            Method::FirstImprovement(_) => "first",
        }
    }
}

/// Runs any update rule; `seed` is only read by random ascent.
pub fn ascend_with<O: StepObserver>(
    inst: &Instance,
    start: &Assignment,
    method: &Method,
    seed: u64,
    max_steps: Option<u64>,
    observer: &mut O,
) -> Result<AscentSummary> {
    match method {
        Method::Steepest(tie_policy) => {
            let opts = AscentOptions {
                tie_policy: *tie_policy,
                max_steps,
            };
            steepest_ascent_with(inst, start, &opts, observer)
        }
        Method::Random => {
            let opts = AscentOptions {
                max_steps,
                ..Default::default()
            };
            random_ascent_with(inst, start, seed, &opts, observer)
        }
        Method::FirstImprovement(order) => {
            let opts = AscentOptions {
                max_steps,
                ..Default::default()
            };
            first_improvement_ascent_with(inst, start, order, &opts, observer)
        }
    }
}

pub fn ascend(
    inst: &Instance,
    start: &Assignment,
    method: &Method,
    seed: u64,
    max_steps: Option<u64>,
) -> Result<Trace> {
    let mut steps = Vec::new();
    let summary = ascend_with(inst, start, method, seed, max_steps, &mut steps)?;
    Ok(Trace::from_parts(summary, steps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub trials: usize,
    pub seed: u64,
    pub step_counts: Vec<u64>,
    pub ends: Vec<Assignment>,
    pub total_steps: u128,
    pub min: u64,
    pub max: u64,
}

impl TrialStats {
    pub fn mean(&self) -> f64 {
        self.total_steps as f64 / self.trials as f64
    }
}

/// Seed of trial `index`: first word of ChaCha8 stream `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Independent trials, run in parallel and reported in trial order.
pub fn run_trials(
    inst: &Instance,
    start: &Assignment,
    method: &Method,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::EmptyTrial);
    }
    let results: Vec<AscentSummary> = (0..trials as u64)
        .into_par_iter()
        .map(|t| ascend_with(inst, start, method, trial_seed(seed, t), None, &mut NoRecord))
        .collect::<Result<_>>()?;
    let step_counts: Vec<u64> = results.iter().map(|r| r.steps).collect();
    Ok(TrialStats {
        trials,
        seed,
        total_steps: step_counts.iter().map(|&s| s as u128).sum(),
        min: *step_counts.iter().min().unwrap(),
        max: *step_counts.iter().max().unwrap(),
        ends: results.into_iter().map(|r| r.end).collect(),
        step_counts,
    })
}

/// Metadata written as `#` lines ahead of a trace CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub method: String,
    pub seed: Option<u64>,
    pub instance_hash: String,
}

/// Streams trace rows as CSV while an ascent runs. Write errors are held
/// until [`TraceCsvWriter::finish`].
pub struct TraceCsvWriter<'a, W: Write> {
    inst: &'a Instance,
    out: csv::Writer<W>,
    step: u64,
    error: Option<Error>,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

impl<'a, W: Write> TraceCsvWriter<'a, W> {
    /// Writes the `#` metadata lines and the header row.
    pub fn new(mut out: W, inst: &'a Instance, start: &Assignment, meta: &TraceMeta) -> Result<Self> {
        writeln!(out, "# method={}", meta.method)?;
        match meta.seed {
            Some(s) => writeln!(out, "# seed={s}")?,
            None => writeln!(out, "# seed=none")?,
        }
        writeln!(out, "# instance_sha256={}", meta.instance_hash)?;
        writeln!(
            out,
            "# start={}",
            inst.format_assignment(start, BitOrder::Labeled)
        )?;
        let mut out = csv::Writer::from_writer(out);
        out.write_record(["step", "var_index", "var_label", "gain", "fitness_after"])
            .map_err(csv_error)?;
        Ok(TraceCsvWriter {
            inst,
            out,
            step: 0,
            error: None,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(())
    }
}

impl<W: Write> StepObserver for TraceCsvWriter<'_, W> {
    fn observe(&mut self, s: &Step) {
        if self.error.is_some() {
            return;
        }
        self.step += 1;
        let label = self.inst.label(s.var).map(|l| l.to_string()).unwrap_or_default();
        let row = [
            self.step.to_string(),
            s.var.to_string(),
            label,
            s.gain.to_string(),
            s.fitness_after.to_string(),
        ];
        if let Err(e) = self.out.write_record(row) {
            self.error = Some(csv_error(e));
        }
    }
}

/// Writes a recorded trace, one row per step.
pub fn write_trace_csv<W: Write>(out: W, inst: &Instance, trace: &Trace, meta: &TraceMeta) -> Result<()> {
    let mut w = TraceCsvWriter::new(out, inst, &trace.start, meta)?;
    for s in &trace.steps {
        w.observe(s);
    }
    w.finish()
}
