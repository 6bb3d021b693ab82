//! `santa` command line. JSON on stdout by default, TSV with `--tsv` where a
//! table makes sense. Exit codes: 0 ok, 1 validation failure or error,
//! 2 inconclusive (budget or cap), 64 usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use super::{allocation_by_id, gap_for_instance, run_gap_experiment, verify_convex_combination, BatchConfig};
use crate::allocation_graph::{compute_m, AllocationGraph};
use crate::error::{Error, Result};
use crate::instance::{brute_force_opt, Instance, OracleCaps, RandomConfig, TwoValueConfig};
use crate::lp::{compute_t_star, verify_dual, ClpCaps, DualSolution};
use crate::rational::{fmt_exact, parse_rational, to_f64, Rational};
use crate::topology::{
    execute_sequence, four_phase_driver, reduced_homology, search_de_sequence, DeSequence, DriverOutcome,
    EtaEngine, Graph, GraphDocument, Objective, SearchBudget, SearchContext, SearchOutcome, TraceStep,
};
use crate::two_values::{f_gap, rc_table, reduce_two_value, two_value_driver, TwoValueBudget, TwoValueOutcome};

const EXIT_OK: i32 = 0;
const EXIT_INVALID: i32 = 1;
const EXIT_INCONCLUSIVE: i32 = 2;
const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "santa", version, about = "Exact tools for restricted max-min allocation")]
struct Cli {
    /// Emit tab-separated text instead of JSON where supported.
    #[arg(long, global = true)]
    tsv: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact CLP optimum T*.
    Tstar { instance: PathBuf },
    /// Brute-force OPT with a witness allocation.
    Opt { instance: PathBuf },
    /// T*/OPT against a claimed bound.
    Gap {
        instance: PathBuf,
        #[arg(long, default_value = "53/15")]
        bound: String,
    },
    /// η of the independence complex of a graph document.
    Eta { graph: PathBuf },
    /// Replays a DE trace and checks every step.
    DeVerify { graph: PathBuf, trace: PathBuf },
    /// Searches for a DE-sequence. Cover-priced objectives need an instance.
    DeSearch {
        /// Graph document; omit when building J(α) from `--instance`.
        graph: Option<PathBuf>,
        #[arg(long, default_value = "ko")]
        objective: String,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 20_000)]
        max_nodes: usize,
    },
    /// Allocation graph H(α) (or J(α) with `--thin`) as a graph document.
    Hypergraph {
        instance: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        thin: bool,
    },
    /// The (c, r_c) table; TSV unless `--json`.
    RcTable {
        #[arg(long, default_value_t = 30)]
        max: u64,
        #[arg(long)]
        json: bool,
    },
    /// The two-value gap function f(x).
    FGap { x: String },
    /// Checks the weighted sum of the four snapshot bounds.
    VerifyCoefficients {
        #[arg(long = "T")]
        target: String,
        #[arg(long)]
        m: String,
    },
    /// Seeded batch of T*/OPT measurements.
    Experiment {
        #[arg(long, value_enum, default_value_t = BatchKind::Random)]
        kind: BatchKind,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        players: usize,
        #[arg(long, default_value_t = 8)]
        resources: usize,
        #[arg(long, default_value = "1")]
        lo: String,
        #[arg(long, default_value = "4")]
        hi: String,
        #[arg(long, default_value_t = 6)]
        steps: u32,
        #[arg(long, default_value_t = 0.6)]
        density: f64,
        #[arg(long, default_value = "1/5")]
        eps: String,
        #[arg(long, default_value_t = 2)]
        fat: usize,
        #[arg(long, default_value_t = 10)]
        thin: usize,
        #[arg(long, default_value = "53/15")]
        bound: String,
    },
    /// Verifies a DCLP(T) solution.
    DualCheck {
        instance: PathBuf,
        target: String,
        dual: PathBuf,
    },
    /// Four-phase DE driver on J(α).
    Phases {
        instance: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 20_000)]
        max_nodes: usize,
    },
    /// Two-value driver, at `--target` or after reducing by T*.
    TwoValue {
        instance: PathBuf,
        #[arg(long)]
        target: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BatchKind {
    Random,
    TwoValue,
}

/// Parses `argv` (including the program name) and runs the command with
/// stdout as the sink.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run(argv, &mut lock)
}

/// Same as [`cli_main`] with an explicit sink; usage errors go to stderr.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            eprint!("{}", e.render());
            return EXIT_USAGE;
        }
    };
    let mut sink = Sink { out, tsv: cli.tsv };
    match dispatch(cli.command, &mut sink) {
        Ok(code) => code,
        Err(e) => {
            let code = match e {
                Error::CapExceeded { .. } | Error::TooLarge(_) => EXIT_INCONCLUSIVE,
                _ => EXIT_INVALID,
            };
            let _ = sink.json(&json!({ "error": e.to_string() }));
            code
        }
    }
}

struct Sink<'a> {
    out: &'a mut dyn Write,
    tsv: bool,
}

impl Sink<'_> {
    fn json<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json(e.to_string()))?;
        self.text(&(text + "\n"))
    }

    fn text(&mut self, text: &str) -> Result<()> {
        self.out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))
    }

    /// TSV when requested, JSON otherwise.
    fn emit<T: Serialize>(&mut self, value: &T, tsv: impl FnOnce() -> String) -> Result<()> {
        if self.tsv {
            self.text(&tsv())
        } else {
            self.json(value)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<(GraphDocument, Graph)> {
    let doc: GraphDocument = serde_json::from_str(&read(path)?).map_err(|e| Error::Json(e.to_string()))?;
    let g = doc.to_graph()?;
    Ok((doc, g))
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

fn dispatch(command: Command, sink: &mut Sink<'_>) -> Result<i32> {
    let caps = ClpCaps::default();
    match command {
        Command::Tstar { instance } => {
            let inst = Instance::load(&instance)?;
            let t = compute_t_star(&inst, caps)?;
            let value = json!({
                "t_star": fmt_exact(&t.t_star),
                "candidates": t.candidates,
                "probes": t.probes,
            });
            sink.emit(&value, || {
                format!("t_star\tcandidates\tprobes\n{}\t{}\t{}\n", fmt_exact(&t.t_star), t.candidates, t.probes)
            })?;
            Ok(EXIT_OK)
        }
        Command::Opt { instance } => {
            let inst = Instance::load(&instance)?;
            let opt = brute_force_opt(&inst, OracleCaps::default())?;
            let witness = allocation_by_id(&inst, &opt.witness);
            let value = json!({ "opt": fmt_exact(&opt.opt_value), "witness": witness });
            sink.emit(&value, || {
                let mut s = String::from("player\tresources\tvalue\n");
                for (p, set) in opt.witness.assignment.iter().enumerate() {
                    let ids: Vec<&str> = set.iter().map(|&r| inst.resources()[r].id.as_str()).collect();
                    s += &format!("{}\t{}\t{}\n", inst.players()[p], ids.join(","), fmt_exact(&inst.value(set)));
                }
                s
            })?;
            Ok(EXIT_OK)
        }
        Command::Gap { instance, bound } => {
            let bound = parse_rational(&bound)?;
            let inst = Instance::load(&instance)?;
            let id = instance.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            let (report, _, _) = gap_for_instance(&id, &inst, &bound, caps, OracleCaps::default())?;
            sink.emit(&report, || format!("{}\n{}\n", super::GapReport::tsv_header(), report.tsv_row()))?;
            Ok(status(!report.exceeds()))
        }
        Command::Eta { graph } => {
            let (_, g) = load_graph(&graph)?;
            let engine = EtaEngine::default();
            let eta = engine.eta(&g)?;
            let profile = reduced_homology(&g, &engine.caps)?;
            let value = json!({
                "eta": eta,
                "vertices": g.num_vertices(),
                "edges": g.num_edges(),
                "reduced_ranks": profile.ranks,
            });
            sink.emit(&value, || format!("eta\tvertices\tedges\n{eta}\t{}\t{}\n", g.num_vertices(), g.num_edges()))?;
            Ok(EXIT_OK)
        }
        Command::DeVerify { graph, trace } => {
            let (doc, g) = load_graph(&graph)?;
            let steps: Vec<TraceStep> = serde_json::from_str(&read(&trace)?).map_err(|e| Error::Json(e.to_string()))?;
            let seq = DeSequence::from_trace(&doc, &steps)?;
            let run = execute_sequence(&g, &seq, &EtaEngine::default())?;
            sink.json(&run)?;
            Ok(status(run.valid))
        }
        Command::DeSearch {
            graph,
            objective,
            instance,
            alpha,
            target,
            max_nodes,
        } => de_search(sink, graph, &objective, instance, alpha, target, max_nodes),
        Command::Hypergraph {
            instance,
            alpha,
            target,
            thin,
        } => {
            let inst = Instance::load(&instance)?;
            let h = AllocationGraph::build_h(&inst, &parse_rational(&target)?, &parse_rational(&alpha)?, caps)?;
            let g = if thin { h.build_j() } else { h };
            sink.json(&g.to_document(&inst))?;
            Ok(EXIT_OK)
        }
        Command::RcTable { max, json } => {
            let table = rc_table(max)?;
            if json {
                sink.json(&table)?;
            } else {
                let mut s = String::from("c\tr_c\tratio\tratio_decimal\n");
                for e in &table {
                    s += &format!("{}\t{}\t{}\t{:.4}\n", e.c, e.r_c, fmt_exact(&e.ratio), to_f64(&e.ratio));
                }
                sink.text(&s)?;
            }
            Ok(EXIT_OK)
        }
        Command::FGap { x } => {
            let x = parse_rational(&x)?;
            let f = f_gap(&x)?;
            let value = json!({ "x": fmt_exact(&x), "f": fmt_exact(&f), "decimal": to_f64(&f) });
            sink.emit(&value, || format!("x\tf\tdecimal\n{}\t{}\t{:.6}\n", fmt_exact(&x), fmt_exact(&f), to_f64(&f)))?;
            Ok(EXIT_OK)
        }
        Command::VerifyCoefficients { target, m } => {
            let cert = verify_convex_combination(&parse_rational(&target)?, &parse_rational(&m)?)?;
            sink.emit(&cert, || {
                let mut s = String::from("variable\tcoefficient\tdecimal\n");
                for (k, c) in &cert.per_variable {
                    s += &format!("{k}\t{}\t{:.6}\n", fmt_exact(c), to_f64(c));
                }
                s
            })?;
            Ok(EXIT_OK)
        }
        Command::Experiment {
            kind,
            count,
            seed,
            players,
            resources,
            lo,
            hi,
            steps,
            density,
            eps,
            fat,
            thin,
            bound,
        } => {
            let batch = match kind {
                BatchKind::Random => BatchConfig::Random {
                    config: RandomConfig {
                        num_players: players,
                        num_resources: resources,
                        value_lo: parse_rational(&lo)?,
                        value_hi: parse_rational(&hi)?,
                        value_steps: steps,
                        covet_density: density,
                    },
                    count,
                },
                BatchKind::TwoValue => BatchConfig::TwoValue {
                    num_players: players,
                    epsilon: parse_rational(&eps)?,
                    config: TwoValueConfig {
                        num_fat: fat,
                        num_thin: thin,
                        covet_density: density,
                    },
                    count,
                },
            };
            let report = run_gap_experiment(&batch, &parse_rational(&bound)?, seed)?;
            sink.emit(&report, || report.to_tsv())?;
            if !report.exceedances.is_empty() {
                // the audit documents go out even in TSV mode
                if sink.tsv {
                    sink.json(&report.exceedances)?;
                }
                return Ok(EXIT_INVALID);
            }
            Ok(EXIT_OK)
        }
        Command::DualCheck { instance, target, dual } => {
            let inst = Instance::load(&instance)?;
            let target = parse_rational(&target)?;
            let sol = DualSolution::parse_json(&inst, &read(&dual)?)?;
            let verdict = verify_dual(&inst, &target, &sol, caps)?;
            let value = json!({
                "feasible": verdict.feasible,
                "objective": fmt_exact(&verdict.objective),
                "violated": verdict.violated.as_ref().map(|c| c.describe(&inst)),
            });
            sink.json(&value)?;
            Ok(status(verdict.feasible))
        }
        Command::Phases {
            instance,
            alpha,
            target,
            max_nodes,
        } => {
            let inst = Instance::load(&instance)?;
            let (alpha, target) = (parse_rational(&alpha)?, parse_rational(&target)?);
            let j = AllocationGraph::build_h(&inst, &target, &alpha, caps)?.build_j();
            let m = compute_m(&inst, &target, &alpha, caps)?;
            let budget = SearchBudget {
                max_nodes,
                ..SearchBudget::default()
            };
            let report = four_phase_driver(&inst, &j, &m, budget, &EtaEngine::default())?;
            sink.json(&report)?;
            Ok(match report.outcome {
                DriverOutcome::Inconclusive => EXIT_INCONCLUSIVE,
                _ => status(report.checks.all()),
            })
        }
        Command::TwoValue { instance, target } => {
            let inst = Instance::load(&instance)?;
            let engine = EtaEngine::default();
            let (case, input) = match target {
                Some(t) => (None, Some((inst, parse_rational(&t)?))),
                None => {
                    let t_star = compute_t_star(&inst, caps)?.t_star;
                    let reduced = reduce_two_value(&inst, &t_star)?;
                    (Some(reduced.case), reduced.driver_input)
                }
            };
            let report = match &input {
                Some((inst, t)) => Some(two_value_driver(inst, t, TwoValueBudget::default(), &engine)?),
                None => None,
            };
            sink.json(&json!({ "case": case, "report": report }))?;
            Ok(match report.map(|r| r.outcome) {
                Some(TwoValueOutcome::Inconclusive) => EXIT_INCONCLUSIVE,
                Some(TwoValueOutcome::NoTransversal) => EXIT_INVALID,
                _ => EXIT_OK,
            })
        }
    }
}

fn parse_objective(text: &str, m: Option<&Rational>) -> Result<Objective> {
    let need_m = || m.cloned().ok_or_else(|| Error::Hypothesis(format!("objective `{text}` needs --instance")));
    Ok(match text {
        "ko" => Objective::Ko,
        "edgeless" => Objective::AnyToEdgeless,
        "cheap" => Objective::Cheap { m: need_m()? },
        "ko-or-cheap" => Objective::KoOrCheap { m: need_m()? },
        other => match other.strip_prefix("gamma:") {
            Some(g) => {
                need_m()?;
                Objective::Gamma {
                    gamma: parse_rational(g)?,
                }
            }
            None => return Err(Error::OutOfRange(format!("unknown objective `{other}`"))),
        },
    })
}

fn de_search(
    sink: &mut Sink<'_>,
    graph: Option<PathBuf>,
    objective: &str,
    instance: Option<PathBuf>,
    alpha: Option<String>,
    target: Option<String>,
    max_nodes: usize,
) -> Result<i32> {
    let engine = EtaEngine::default();
    let budget = SearchBudget {
        max_nodes,
        ..SearchBudget::default()
    };
    let (outcome, names, resource_ids) = match (graph, instance) {
        (Some(path), None) => {
            let (doc, g) = load_graph(&path)?;
            let objective = parse_objective(objective, None)?;
            let ctx = SearchContext {
                engine: &engine,
                hyperedges: None,
                instance: None,
            };
            (search_de_sequence(&g, &objective, budget, ctx)?, doc.vertices, Vec::new())
        }
        (None, Some(path)) => {
            let inst = Instance::load(&path)?;
            let missing = || Error::Hypothesis("--instance needs --alpha and --target".into());
            let alpha = parse_rational(alpha.as_deref().ok_or_else(missing)?)?;
            let target = parse_rational(target.as_deref().ok_or_else(missing)?)?;
            let caps = ClpCaps::default();
            let j = AllocationGraph::build_h(&inst, &target, &alpha, caps)?.build_j();
            let m = compute_m(&inst, &target, &alpha, caps)?;
            let objective = parse_objective(objective, Some(&m.m))?;
            let ctx = SearchContext {
                engine: &engine,
                hyperedges: Some(&j.vertices),
                instance: Some(&inst),
            };
            let outcome = search_de_sequence(&j.graph, &objective, budget, ctx)?;
            let names = j.vertices.iter().map(|e| e.descriptor(&inst)).collect();
            let ids = inst.resources().iter().map(|r| r.id.clone()).collect();
            (outcome, names, ids)
        }
        _ => return Err(Error::Hypothesis("give either a graph document or --instance".into())),
    };
    match outcome {
        SearchOutcome::Found(f) => {
            let trace = f.seq.to_trace(|v| names[v].clone());
            let cover: Vec<&str> = f.cover.iter().map(|&r| resource_ids[r].as_str()).collect();
            sink.json(&json!({
                "outcome": "found",
                "nodes": f.nodes,
                "ell": f.seq.ell(),
                "ko": f.ko,
                "trace": trace,
                "cover": cover,
            }))?;
            Ok(EXIT_OK)
        }
        SearchOutcome::Exhausted { nodes } => {
            sink.json(&json!({ "outcome": "exhausted", "nodes": nodes }))?;
            Ok(EXIT_OK)
        }
        SearchOutcome::BudgetExhausted { nodes } => {
            sink.json(&json!({ "outcome": "budget-exhausted", "nodes": nodes }))?;
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}
