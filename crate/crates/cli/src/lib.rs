//! Command-line front end: `check`, `analyze`, `sample`, `oracle` and
//! `export-dot` over spec files, safe Petri nets or built-in fixtures.
//!
//! Exit codes: 0 on success, 1 on analysis failure, 2 on input errors.

pub mod report;

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use concsys::dot::{export_dot, DotGraph};
use concsys::graphs::Graphs;
use concsys::oracle::cross_check;
use concsys::petri::DEFAULT_MARKING_CAP;
use concsys::sampling::{rng_for, sample_mcsc, UniformSampler};
use concsys::spectral::DEFAULT_PRECISION;
use concsys::{fixtures, parse_petri, parse_spec, ConcurrentSystem, Error, UniformMeasure};
use serde::Serialize;

use crate::report::{analyze, ErrorReport, SampleRecord, SampleReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ANALYSIS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "concsys", version, about = "Analyze concurrent systems over trace monoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Width of the isolating interval of the characteristic root.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: f64,
    /// Order up to which the inversion identity is checked.
    #[arg(long, global = true, default_value_t = 10)]
    pub series_order: usize,
    /// Fail unless the system is irreducible and the spectral property holds.
    #[arg(long, global = true)]
    pub expect_irreducible: bool,
    /// Print a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct Input {
    /// System spec or safe Petri net file; `-` reads standard input.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    pub file: Option<PathBuf>,
    /// Built-in fixture instead of a file: e1, tm1, tm2, aztec, twelve.
    #[arg(long)]
    pub fixture: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleMode {
    Mcsc,
    Uniform,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    Dsc,
    Adsc,
    States,
    Condensation,
}

impl From<GraphArg> for DotGraph {
    fn from(g: GraphArg) -> Self {
        match g {
            GraphArg::Dsc => DotGraph::Dsc,
            GraphArg::Adsc => DotGraph::Adsc,
            GraphArg::States => DotGraph::States,
            GraphArg::Condensation => DotGraph::Condensation,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate the input and classify the system.
    Check(Input),
    /// Full analysis report.
    Analyze(Input),
    /// Sample executions.
    Sample {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = SampleMode::Mcsc)]
        mode: SampleMode,
        /// Start state; defaults to the base state.
        #[arg(long)]
        start: Option<String>,
        /// Chain steps per sample in `mcsc` mode.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Execution length in `uniform` mode.
        #[arg(long, default_value_t = 10)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cross-check counts against brute-force enumeration.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = concsys::oracle::DEFAULT_CAP)]
        max_len: usize,
    },
    /// Graphviz rendering.
    ExportDot {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = GraphArg::Dsc)]
        graph: GraphArg,
    },
}

/// Errors that stem from the input rather than from the analysis.
pub fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::EmptyAlphabet
            | Error::AlphabetTooLarge(_)
            | Error::DuplicateLetter(_)
            | Error::UnknownLetterInPair(_)
            | Error::ReflexivePair(_)
            | Error::UnknownLetter(_)
            | Error::UnknownState(_)
            | Error::NoStates
            | Error::DuplicateState(_)
            | Error::ReservedStateName(_)
            | Error::DiamondViolation { .. }
            | Error::Syntax { .. }
            | Error::AtLine { .. }
            | Error::NotOneBounded { .. }
            | Error::StateExplosion(_)
    )
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if is_input_error(&e) { EXIT_INPUT } else { EXIT_ANALYSIS },
            message: e.to_string(),
        }
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

fn load(input: &Input) -> Result<ConcurrentSystem, Failure> {
    if let Some(name) = &input.fixture {
        return fixtures::by_name(name).ok_or_else(|| input_failure(format!("unknown fixture `{name}`")));
    }
    let path = input.file.as_ref().expect("clap requires a file or a fixture");
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_failure(format!("standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))?
    };
    let is_petri = text
        .lines()
        .any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("[places]"));
    if is_petri {
        Ok(parse_petri(&text)?.to_system(DEFAULT_MARKING_CAP)?.0)
    } else {
        Ok(parse_spec(&text)?)
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if cli.json {
                let _ = out.write_all(
                    json(&ErrorReport {
                        error: f.message,
                        exit_code: f.code,
                    })
                    .as_bytes(),
                );
            }
            f.code
        }
    }
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    match &cli.command {
        Command::Check(input) => {
            let sys = load(input)?;
            let c = sys.classify();
            let code = if cli.expect_irreducible && !c.irreducible {
                EXIT_ANALYSIS
            } else {
                EXIT_OK
            };
            let text = if cli.json {
                json(&c)
            } else {
                let mut s = format!(
                    "states: {}\nletters: {}\ntrivial: {}\naccessible: {}\nalive: {}\nmonoid irreducible: {}\nirreducible: {}\n",
                    sys.num_states(),
                    sys.monoid().len(),
                    c.trivial,
                    c.accessible,
                    c.alive,
                    c.monoid_irreducible,
                    c.irreducible
                );
                if let Some((a, b)) = &c.unreachable {
                    s += &format!("unreachable: {b} from {a}\n");
                }
                for (st, l) in &c.dead {
                    s += &format!("dead: {l} after {st}\n");
                }
                s
            };
            Ok((text, code))
        }
        Command::Analyze(input) => {
            let sys = load(input)?;
            let rep = analyze(&sys, cli.precision, cli.series_order);
            let spectral_ok = rep.spectral_property.as_ref().is_some_and(|s| s.holds);
            let failed =
                !rep.diagnostics.pass || (cli.expect_irreducible && !(rep.classification.irreducible && spectral_ok));
            let text = if cli.json { json(&rep) } else { summary(&rep) };
            Ok((text, if failed { EXIT_ANALYSIS } else { EXIT_OK }))
        }
        Command::Sample {
            input,
            mode,
            start,
            steps,
            length,
            count,
            seed,
        } => {
            let sys = load(input)?;
            let start = match start {
                Some(name) => sys.state(name)?,
                None => sys.base(),
            };
            let graphs = Graphs::new(&sys);
            let mut samples = Vec::with_capacity(*count);
            match mode {
                SampleMode::Mcsc => {
                    let measure = UniformMeasure::new(&sys, &graphs, cli.precision)?;
                    // Sample k uses seed + k; the generator hashes seeds, so
                    // neighbouring seeds give unrelated streams.
                    for k in 0..*count {
                        let run = sample_mcsc(&graphs, &measure, start, *steps, seed.wrapping_add(k as u64));
                        samples.push(SampleRecord {
                            word: sys.monoid().format_word(&run.trace),
                            nodes: run.nodes.iter().map(|&i| graphs.dsc.node_name(&sys, i)).collect(),
                        });
                    }
                }
                SampleMode::Uniform => {
                    let sampler = UniformSampler::new(&graphs.adsc, start, *length)?;
                    let mut rng = rng_for(*seed, 0);
                    for _ in 0..*count {
                        let path = sampler.sample_path(&mut rng);
                        samples.push(SampleRecord {
                            word: sys.monoid().format_word(&sampler.word_of_path(&path)),
                            nodes: path.iter().map(|&i| graphs.adsc.node_name(&sys, i)).collect(),
                        });
                    }
                }
            }
            let rep = SampleReport {
                mode: match mode {
                    SampleMode::Mcsc => "mcsc",
                    SampleMode::Uniform => "uniform",
                },
                start: sys.state_name(start).to_string(),
                seed: *seed,
                samples,
            };
            let text = if cli.json {
                json(&rep)
            } else {
                rep.samples.iter().map(|s| format!("{}\n", s.word)).collect()
            };
            Ok((text, EXIT_OK))
        }
        Command::Oracle { input, max_len } => {
            let sys = load(input)?;
            let graphs = Graphs::new(&sys);
            let rep = cross_check(&sys, &graphs, *max_len, *max_len)?;
            let code = if rep.pass { EXIT_OK } else { EXIT_ANALYSIS };
            let text = if cli.json {
                json(&rep)
            } else {
                let mut s = format!(
                    "oracle up to length {}: {}\n",
                    rep.order,
                    if rep.pass { "all counts agree" } else { "MISMATCH" }
                );
                for m in &rep.mismatches {
                    s += &format!(
                        "n={} {}->{}: oracle {} paths {} mobius {}\n",
                        m.n, m.from, m.to, m.oracle, m.paths, m.mobius
                    );
                }
                s
            };
            Ok((text, code))
        }
        Command::ExportDot { input, graph } => {
            let sys = load(input)?;
            let graphs = Graphs::new(&sys);
            Ok((export_dot(&sys, &graphs, (*graph).into()), EXIT_OK))
        }
    }
}

fn summary(rep: &report::AnalysisReport) -> String {
    let c = &rep.classification;
    let g = &rep.graphs;
    let mut s = format!(
        "states: {}\nletters: {}\nirreducible: {}\ntheta: {:?}\n",
        rep.system.states.len(),
        rep.system.alphabet.len(),
        c.irreducible,
        rep.polynomials
            .theta
            .coeffs()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>(),
    );
    match &rep.root {
        Some(r) if r.exact => s += &format!("root: {} (exact)\n", r.lo),
        Some(r) => s += &format!("root: {} in ({}, {}]\n", r.approx, r.lo, r.hi),
        None => s += "root: none in (0,1]\n",
    }
    s += &format!(
        "dsc: {} nodes, {} arcs, {} components ({} terminal)\nadsc: {} nodes, {} arcs\n",
        g.dsc_nodes, g.dsc_arcs, g.dsc_components, g.dsc_terminal_components, g.adsc_nodes, g.adsc_arcs
    );
    s += &format!(
        "dsc+: {} nodes, {} components ({} terminal)\nnull nodes ({}): {}\n",
        g.dsc_plus_nodes,
        g.dsc_plus_components,
        g.dsc_plus_terminal_components,
        g.null_nodes.len(),
        g.null_nodes.join(" ")
    );
    if let Some(sp) = &rep.spectral_property {
        s += &format!("spectral property: {}", sp.holds);
        if !sp.witnesses.is_empty() {
            s += &format!(" (witnesses: {})", sp.witnesses.join(" "));
        }
        s.push('\n');
    }
    if let Some(gamma) = &rep.gamma {
        let v: Vec<String> = gamma.vector.iter().map(|x| format!("{:.9}", x + 0.0)).collect();
        s += &format!("gamma from base: {}\n", v.join(" "));
    }
    if let Some(tables) = &rep.tables {
        for t in tables {
            let v: Vec<String> = t
                .values
                .iter()
                .filter(|v| v.f != 0.0)
                .map(|v| format!("{}={:.9}", v.clique, v.h.max(0.0)))
                .collect();
            s += &format!("h[{}]: {}\n", t.state, v.join(" "));
        }
    }
    let d = &rep.diagnostics;
    s += &format!("inversion to order {}: {}\n", d.inversion.order, d.inversion.pass);
    if let Some(u) = &d.uniqueness {
        s += &format!("uniqueness diagnostics: {}\n", u.pass);
    }
    for e in &d.errors {
        s += &format!("error: {e}\n");
    }
    s += &format!("diagnostics: {}\n", if d.pass { "pass" } else { "FAIL" });
    s
}
