//! The `vcsp` command line: generation, evaluation, search, structural
//! checks, brute-force oracles and one-shot verification of the chain family.
//!
//! Results go to the `out` writer, diagnostics to `err`. Exit codes are 0 on
//! success, 1 on a failed check or library error, and 2 on misuse.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::assignment::Assignment;
use crate::error::Error;
use crate::format::{instance_hash, parse_instance, write_instance};
use crate::generator::{
    build_chain, build_chain_with, canonical_decomposition, expected_arcs, expected_peak,
    predicted_ascent_length, FamilyParams, Sign,
};
use crate::instance::{BitOrder, Instance};
use crate::landscape::{
    ascent_graph, check_semismooth, enumerate_peaks, orient, peak_of_oriented, shortest_ascent_length,
    Semismoothness, DEFAULT_ASCENT_GRAPH_CAP, DEFAULT_PEAK_CAP, DEFAULT_SEMISMOOTH_CAP,
};
use crate::search::{
    ascend_with, run_trials, steepest_ascent_with, AscentOptions, Method, NoRecord, TiePolicy,
    TraceCsvWriter, TraceMeta,
};
use crate::structure::{
    constraint_graph, export_dot, has_cycle, max_degree, validate_path_decomposition, PathDecomposition,
};

#[derive(Debug, Parser)]
#[command(
    name = "vcsp",
    version,
    about = "Binary Boolean VCSP landscapes and steepest-ascent gadget chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the gadget chain for given n, m and sign.
    Gen(GenArgs),
    /// Evaluate fitness and improving moves at one assignment.
    Eval(EvalArgs),
    /// Run a local search from a start assignment.
    Ascend(AscendArgs),
    /// Check every structural and runtime claim for one (n, m).
    Verify(VerifyArgs),
    /// Brute-force peaks, semismoothness or the ascent graph.
    Oracle(OracleArgs),
    /// Constraint-graph statistics, decomposition checks and DOT export.
    Structure(StructureArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: u32,
    /// Number of gadgets; defaults to n.
    #[arg(long)]
    pub m: Option<u32>,
    /// `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub sign: Sign,
    /// Instance file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the canonical path decomposition here.
    #[arg(long)]
    pub decomposition: Option<PathBuf>,
    /// Skip the weight self-check.
    #[arg(long)]
    pub no_validate: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub assignment: String,
    /// Read assignment strings in dense-index order.
    #[arg(long)]
    pub raw_order: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Steepest,
    Random,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Lowest,
    Error,
}

#[derive(Debug, Args)]
pub struct AscendArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Start assignment; all zeros when omitted.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Steepest)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Write the step trace as CSV (single trial only).
    #[arg(long, conflicts_with = "trials")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TieArg::Lowest)]
    pub tie: TieArg,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Comma-separated dense indices for first-improvement; identity by default.
    #[arg(long, value_delimiter = ',')]
    pub scan_order: Option<Vec<usize>>,
    #[arg(long)]
    pub raw_order: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: u32,
    /// Defaults to n.
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Debug, Args)]
#[group(id = "oracle_kind", required = true, multiple = false)]
pub struct OracleKind {
    #[arg(long)]
    pub peaks: bool,
    #[arg(long)]
    pub semismooth: bool,
    #[arg(long, value_name = "START")]
    pub ascent_graph: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub kind: OracleKind,
    /// Variable cap for --peaks/--semismooth, node cap for --ascent-graph.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub raw_order: bool,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Orient the DOT edges by sign dependence.
    #[arg(long)]
    pub orient: bool,
    /// Path decomposition to validate, one bag per line.
    #[arg(long)]
    pub decomposition: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

type CliResult = std::result::Result<Outcome, CliError>;

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Gen(a) => cmd_gen(a, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Ascend(a) => cmd_ascend(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Oracle(a) => cmd_oracle(a, out, err),
        Command::Structure(a) => cmd_structure(a, out, err),
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Error> {
    parse_instance(&read_text(path)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn bit_order(raw: bool) -> BitOrder {
    if raw {
        BitOrder::Raw
    } else {
        BitOrder::Labeled
    }
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let params = FamilyParams::new(a.n, a.m.unwrap_or(a.n), a.sign)?;
    let inst = build_chain_with(params, !a.no_validate)?;
    let text = write_instance(&inst);
    let counts = format!(
        "vars={} unaries={} binaries={} constraints={}",
        inst.num_vars(),
        inst.num_unaries(),
        inst.num_binaries(),
        inst.num_unaries() + inst.num_binaries()
    );
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
            writeln!(out, "{counts}")?;
        }
        None => {
            out.write_all(text.as_bytes())?;
            writeln!(err, "{counts}")?;
        }
    }
    if let Some(path) = &a.decomposition {
        let mut f = create(path)?;
        f.write_all(canonical_decomposition(params.m()).to_text().as_bytes())?;
        f.flush()?;
    }
    Ok(Outcome::Success)
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let x = inst.parse_assignment(&a.assignment, bit_order(a.raw_order))?;
    let moves = inst.improving_moves(&x)?;
    writeln!(
        out,
        "fitness={} local_peak={} improving={}",
        inst.fitness(&x)?,
        moves.is_empty(),
        moves.len()
    )?;
    for m in moves {
        writeln!(out, "move {} {}", inst.var_name(m.var), m.gain)?;
    }
    Ok(Outcome::Success)
}

fn cmd_ascend(a: AscendArgs, out: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let order = bit_order(a.raw_order);
    let start = match &a.start {
        Some(s) => inst.parse_assignment(s, order)?,
        None => Assignment::zeros(inst.num_vars()),
    };
    let tie_policy = match a.tie {
        TieArg::Lowest => TiePolicy::LowestIndex,
        TieArg::Error => TiePolicy::Error,
    };
    let method = match a.method {
        MethodArg::Steepest => Method::Steepest(tie_policy),
        MethodArg::Random => Method::Random,
        MethodArg::First => Method::FirstImprovement(
            a.scan_order
                .clone()
                .unwrap_or_else(|| (0..inst.num_vars()).collect()),
        ),
    };
    if a.scan_order.is_some() && a.method != MethodArg::First {
        return Err(CliError::Usage(
            "--scan-order only applies to --method first".into(),
        ));
    }
    if a.trials == 0 {
        return Err(Error::EmptyTrial.into());
    }

    if a.trials > 1 {
        let stats = run_trials(&inst, &start, &method, a.trials, a.seed)?;
        let mut ends: Vec<&Assignment> = stats.ends.iter().collect();
        ends.sort();
        ends.dedup();
        writeln!(
            out,
            "trials={} mean={:.3} min={} max={} seed={} distinct_ends={}",
            stats.trials,
            stats.mean(),
            stats.min,
            stats.max,
            stats.seed,
            ends.len()
        )?;
        for e in ends {
            writeln!(
                out,
                "end {} {}",
                inst.format_assignment(e, order),
                inst.fitness(e)?
            )?;
        }
        return Ok(Outcome::Success);
    }

    let summary = match &a.trace {
        Some(path) => {
            let meta = TraceMeta {
                method: method.name().to_string(),
                seed: (a.method == MethodArg::Random).then_some(a.seed),
                instance_hash: instance_hash(&inst),
            };
            let mut w = TraceCsvWriter::new(create(path)?, &inst, &start, &meta)?;
            let summary = ascend_with(&inst, &start, &method, a.seed, a.max_steps, &mut w)?;
            w.finish()?;
            summary
        }
        None => ascend_with(&inst, &start, &method, a.seed, a.max_steps, &mut NoRecord)?,
    };
    write!(
        out,
        "steps={} final_fitness={} peak={} ties={}",
        summary.steps,
        summary.final_fitness,
        inst.format_assignment(&summary.end, order),
        summary.tie_events
    )?;
    if summary.truncated {
        write!(out, " truncated=true")?;
    }
    writeln!(out)?;
    Ok(Outcome::Success)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub n: u32,
    pub m: u32,
    pub checks: Vec<Check>,
    pub overall: bool,
}

fn check(checks: &mut Vec<Check>, name: &str, expected: impl ToString, observed: impl ToString) {
    let (expected, observed) = (expected.to_string(), observed.to_string());
    checks.push(Check {
        name: name.to_string(),
        pass: expected == observed,
        expected,
        observed,
    });
}

/// Runs every check on the `+` and `-` chains for `(n, m)`.
pub fn verify(n: u32, m: u32) -> crate::error::Result<VerifyReport> {
    let plus = FamilyParams::new(n, m, Sign::Plus)?;
    let minus = plus.with_sign(Sign::Minus);
    let mut checks = Vec::new();
    let length = predicted_ascent_length(m)?;
    let min_gain = i128::from(n + 1 - m);

    for params in [plus, minus] {
        let inst = build_chain(params)?;
        let tag = params.sign();
        check(
            &mut checks,
            &format!("counts{tag}"),
            format!("{}/{}", 6 * m, 7 * m - 1),
            format!("{}/{}", inst.num_unaries(), inst.num_binaries()),
        );
        let g = constraint_graph(&inst);
        check(
            &mut checks,
            &format!("max_degree{tag}"),
            if m == 1 { 2 } else { 3 },
            max_degree(&g),
        );
        check(&mut checks, &format!("cycle{tag}"), true, has_cycle(&g));
        let width = match validate_path_decomposition(&g, &canonical_decomposition(m)) {
            Ok(w) => w.to_string(),
            Err(v) => v.to_string(),
        };
        check(&mut checks, &format!("decomposition_width{tag}"), 2, width);

        let o = orient(&inst)?;
        check(&mut checks, &format!("oriented{tag}"), true, o.is_oriented());
        let arcs = expected_arcs(m);
        let observed = match arcs.iter().zip(o.arcs()).find(|(a, b)| a != b) {
            _ if arcs.len() != o.arcs().len() => format!("{} arcs", o.arcs().len()),
            Some((_, b)) => format!("unexpected arc {b:?}"),
            None => format!("{} arcs", arcs.len()),
        };
        check(
            &mut checks,
            &format!("arcs{tag}"),
            format!("{} arcs", arcs.len()),
            observed,
        );
        let peak = peak_of_oriented(&inst, &o)?;
        check(&mut checks, &format!("peak{tag}"), expected_peak(params), &peak);

        let start = expected_peak(params.with_sign(tag.opposite()));
        let opts = AscentOptions::default();
        let run = steepest_ascent_with(&inst, &start, &opts, &mut NoRecord)?;
        check(&mut checks, &format!("steepest_steps{tag}"), length, run.steps);
        check(&mut checks, &format!("steepest_ties{tag}"), 0, run.tie_events);
        check(
            &mut checks,
            &format!("steepest_min_gain{tag}"),
            format!(">={min_gain}"),
            match run.min_gain {
                Some(g) if g >= min_gain => format!(">={min_gain}"),
                other => format!("{other:?}"),
            },
        );
        check(
            &mut checks,
            &format!("steepest_end{tag}"),
            expected_peak(params),
            &run.end,
        );
    }
    let overall = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        n,
        m,
        checks,
        overall,
    })
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CliResult {
    let m = a.m.unwrap_or(a.n);
    if m == 0 || m > a.n {
        return Err(CliError::Usage(format!("need 1 <= m <= n, got n={} m={m}", a.n)));
    }
    let report = verify(a.n, m)?;
    writeln!(out, "n={} m={}", report.n, report.m)?;
    for c in &report.checks {
        writeln!(
            out,
            "{} {} expected={} observed={}",
            if c.pass { "pass" } else { "FAIL" },
            c.name,
            c.expected,
            c.observed
        )?;
    }
    writeln!(out, "overall={}", if report.overall { "pass" } else { "fail" })?;
    Ok(if report.overall {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let order = bit_order(a.raw_order);
    let fmt = |x: &Assignment| inst.format_assignment(x, order);

    if a.kind.peaks {
        let peaks = enumerate_peaks(&inst, a.cap.unwrap_or(DEFAULT_PEAK_CAP))?;
        for p in &peaks {
            writeln!(out, "peak {} {}", fmt(&p.assignment), p.fitness)?;
        }
        writeln!(out, "# peaks={}", peaks.len())?;
        return Ok(Outcome::Success);
    }
    if a.kind.semismooth {
        return match check_semismooth(&inst, a.cap.unwrap_or(DEFAULT_SEMISMOOTH_CAP))? {
            Semismoothness::Semismooth => {
                writeln!(out, "# semismooth=true")?;
                Ok(Outcome::Success)
            }
            Semismoothness::Violation(v) => {
                for p in &v.peaks {
                    writeln!(out, "face_peak {} {}", fmt(p), inst.fitness(p)?)?;
                }
                let free: Vec<String> = v.free.iter().map(|&i| inst.var_name(i)).collect();
                writeln!(out, "# semismooth=false free={}", free.join(","))?;
                writeln!(err, "face with {} peaks", v.peaks.len())?;
                Ok(Outcome::Failed)
            }
        };
    }
    let start = inst.parse_assignment(a.kind.ascent_graph.as_deref().unwrap_or_default(), order)?;
    let g = ascent_graph(&inst, &start, a.cap.unwrap_or(DEFAULT_ASCENT_GRAPH_CAP))?;
    for (i, x) in g.nodes().iter().enumerate() {
        let kind = if g.sinks().contains(&i) { "sink" } else { "node" };
        writeln!(out, "{kind} {} {}", fmt(x), g.fitness(i))?;
    }
    let lengths: Vec<String> = g.maximal_path_lengths().iter().map(|l| l.to_string()).collect();
    write!(
        out,
        "# nodes={} edges={} sinks={} path_lengths={}",
        g.nodes().len(),
        g.edges().len(),
        g.sinks().len(),
        lengths.join(",")
    )?;
    if let [sink] = g.sinks() {
        write!(
            out,
            " shortest={}",
            shortest_ascent_length(&g, &g.nodes()[*sink])?
        )?;
    }
    writeln!(out)?;
    Ok(Outcome::Success)
}

fn cmd_structure(a: StructureArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let g = constraint_graph(&inst);
    let mut outcome = Outcome::Success;
    write!(
        out,
        "vertices={} edges={} cycle={}",
        g.num_vertices(),
        g.edges().len(),
        has_cycle(&g)
    )?;
    if let Some(path) = &a.decomposition {
        let d = PathDecomposition::parse(&read_text(path)?)?;
        write!(out, " bags={} width={}", d.bags().len(), d.width())?;
        match validate_path_decomposition(&g, &d) {
            Ok(_) => write!(out, " valid=true")?,
            Err(v) => {
                write!(out, " valid=false")?;
                writeln!(err, "invalid decomposition: {v}")?;
                outcome = Outcome::Failed;
            }
        }
    }
    writeln!(out, " degree={}", max_degree(&g))?;
    if let Some(path) = &a.dot {
        let orientation = if a.orient { Some(orient(&inst)?) } else { None };
        if let Some(o) = orientation.as_ref().filter(|o| !o.is_oriented()) {
            let (i, j) = o.conflict().map(|c| c.pair).unwrap_or_default();
            writeln!(
                err,
                "not oriented: {} and {} sign-depend on each other",
                inst.var_name(i),
                inst.var_name(j)
            )?;
        }
        let mut f = create(path)?;
        f.write_all(export_dot(&inst, orientation.as_ref()).as_bytes())?;
        f.flush()?;
    }
    Ok(outcome)
}
