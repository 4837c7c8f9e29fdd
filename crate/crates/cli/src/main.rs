//! `modalforge` — reductions into small modal fragments, frame validity
//! sweeps, and satisfiability for the non-normal logics E, EM, EN, EMN.

mod bench;
mod config;
mod verify;

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use modalforge::classical::ClassicalValuation;
use modalforge::families::{self, FragmentKind, VarFreeMode};
use modalforge::kripke::{
    check_validity, frame_f, frame_f_strict, frame_properties, model_f_vf, KripkeFrame,
    KripkeModel, SearchBudget, Verdict,
};
use modalforge::neighborhood::{
    brute_force_sat, decide_sat, nbhd_model_check, LogicId, NeighborhoodModel, SatResult,
};
use modalforge::Formula;

use config::AxiomConfig;
use verify::RecordsMode;

#[derive(Parser)]
#[command(name = "modalforge", version, about)]
struct Cli {
    /// Seed for randomized sweeps and random corpora.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Emit machine-readable JSON (JSON lines for sweeps).
    #[arg(long, global = true)]
    json: bool,

    /// Trial budget for randomized validity search.
    #[arg(long, global = true, default_value_t = 100_000)]
    budget: u64,

    /// Axiom config file (overrides the MODALFORGE_AXIOMS environment
    /// variable and the built-in catalog).
    #[arg(long, global = true)]
    axioms: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FragmentArg {
    TwoVar,
    OneVar,
    VarFree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Repaired,
    Literal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Decide,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FrameArg {
    /// Reflexive descending chain plus an all-seeing top world.
    F,
    /// Strict descending chain plus a top world.
    FStrict,
    /// Bundle of chains with valuation-selected root edges.
    FVf,
}

impl FragmentArg {
    fn kind(self, mode: ModeArg) -> FragmentKind {
        match self {
            FragmentArg::TwoVar => FragmentKind::TwoVar,
            FragmentArg::OneVar => FragmentKind::OneVar,
            FragmentArg::VarFree => FragmentKind::VarFree(mode.var_free()),
        }
    }
}

impl ModeArg {
    fn var_free(self) -> VarFreeMode {
        match self {
            ModeArg::Repaired => VarFreeMode::Repaired,
            ModeArg::Literal => VarFreeMode::Literal,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form and metrics.
    Parse {
        /// Formula text, e.g. "q & <>(~q & <>[]q)".
        formula: String,
    },

    /// Reduce a propositional formula over p1, p2, … into a modal fragment.
    Reduce {
        #[arg(long, value_enum)]
        fragment: FragmentArg,
        /// Variable-free sentinel shape (only meaningful with var-free).
        #[arg(long, value_enum, default_value = "repaired")]
        mode: ModeArg,
        formula: String,
    },

    /// Sweep a propositional corpus and check a reduction theorem case by case.
    Verify {
        /// Which reduction to test: 1 two-variable, 2 one-variable, 3 variable-free.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        theorem: u8,
        #[arg(long, value_enum, default_value = "repaired")]
        mode: ModeArg,
        /// Exhaustive corpus: all formulas with at most this many variables…
        #[arg(long, default_value_t = 3)]
        max_vars: u32,
        /// …and at most this many nodes.
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        /// Number of seeded random formulas appended to the corpus.
        #[arg(long, default_value_t = 500)]
        random: usize,
        #[arg(long, default_value_t = 5)]
        random_vars: u32,
        #[arg(long, default_value_t = 14)]
        random_size: usize,
        /// Cap on decide_sat cross-checks of tautology instances.
        #[arg(long, default_value_t = 64)]
        sat_checks: usize,
        /// How many frame models from refuted cases are kept for checking
        /// tautology instances at every world.
        #[arg(long, default_value_t = 16)]
        model_pool: usize,
        /// Which per-case records to emit.
        #[arg(long, value_enum, default_value = "all")]
        records: RecordsMode,
    },

    /// Check named axioms for validity on a frame.
    Axioms {
        #[arg(long, value_enum, default_value = "f")]
        frame: FrameArg,
        /// Chain length for f/f-strict.
        #[arg(long, default_value_t = 10)]
        chain: usize,
        /// Variable count for f-vf.
        #[arg(long, default_value_t = 3)]
        vars: u32,
        #[arg(long, value_enum, default_value = "repaired")]
        mode: ModeArg,
        /// Print the built-in axiom catalog and exit.
        #[arg(long)]
        print_config: bool,
        /// Axiom or logic names from the catalog; defaults to every axiom.
        names: Vec<String>,
    },

    /// Growth tables for the sentinel families and the reduction.
    Bench {
        #[arg(long, value_enum, default_value = "two-var")]
        fragment: FragmentArg,
        #[arg(long, default_value_t = 1)]
        from: u32,
        #[arg(long, default_value_t = 30)]
        to: u32,
        /// Random 3-CNF growth check: number of variables…
        #[arg(long, default_value_t = 0)]
        cnf_vars: u32,
        /// …number of clauses…
        #[arg(long, default_value_t = 0)]
        cnf_clauses: u32,
        /// …and number of samples (0 disables the CNF check).
        #[arg(long, default_value_t = 0)]
        cnf_samples: usize,
    },

    /// Decide satisfiability in E, EM, EN or EMN.
    Sat {
        #[arg(long)]
        logic: LogicId,
        #[arg(long, value_enum, default_value = "decide")]
        engine: EngineArg,
        /// World budget for the brute-force engine (at most 3).
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        formula: String,
    },

    /// Model-check a formula on a serialized model (Kripke or neighborhood).
    Mc {
        /// Path to a model JSON file, or `-` for stdin.
        #[arg(long)]
        model: String,
        /// World to evaluate at; defaults to the model's designated world
        /// (world 0 for neighborhood models).
        #[arg(long)]
        world: Option<usize>,
        formula: String,
    },
}

#[derive(Serialize)]
struct ParseOutput {
    formula: String,
    size: usize,
    modal_depth: usize,
    atoms: BTreeSet<String>,
}

#[derive(Serialize)]
struct ReduceOutput {
    formula: String,
    fragment: String,
    size: usize,
    modal_depth: usize,
    atoms: BTreeSet<String>,
    source_var_count: usize,
}

#[derive(Serialize)]
struct AxiomVerdict {
    axiom: String,
    formula: String,
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    countermodel: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    refuted_world: Option<usize>,
}

#[derive(Serialize)]
struct PropertiesOutput {
    frame: String,
    worlds: usize,
    reflexive: bool,
    irreflexive: bool,
    transitive: bool,
    antisymmetric: bool,
    linear: bool,
    acyclic_over_distinct: bool,
}

fn load_config(cli: &Cli) -> Result<AxiomConfig> {
    if let Some(path) = &cli.axioms {
        return Ok(AxiomConfig::from_path(path)?);
    }
    if let Ok(path) = std::env::var("MODALFORGE_AXIOMS") {
        if !path.is_empty() {
            return Ok(AxiomConfig::from_path(PathBuf::from(path).as_path())?);
        }
    }
    Ok(AxiomConfig::default_config())
}

fn cmd_parse(json: bool, text: &str) -> Result<()> {
    let formula = Formula::parse(text)?;
    let metrics = formula.metrics();
    if json {
        let out = ParseOutput {
            formula: formula.to_string(),
            size: metrics.size,
            modal_depth: metrics.modal_depth,
            atoms: metrics.atoms,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        println!("{formula}");
        println!(
            "size={} modal_depth={} atoms={{{}}}",
            metrics.size,
            metrics.modal_depth,
            metrics.atoms.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    Ok(())
}

fn cmd_reduce(json: bool, kind: FragmentKind, text: &str) -> Result<()> {
    let input = Formula::parse(text)?;
    let reduced = families::reduce(&input, kind)?;
    if json {
        let out = ReduceOutput {
            formula: reduced.formula.to_string(),
            fragment: kind.to_string(),
            size: reduced.metrics.size,
            modal_depth: reduced.metrics.modal_depth,
            atoms: reduced.metrics.atoms,
            source_var_count: reduced.source_var_count,
        };
        println!("{}", serde_json::to_string(&out)?);
    } else {
        println!("{}", reduced.formula);
        println!(
            "fragment={} size={} modal_depth={} atoms={{{}}} source_vars={}",
            kind,
            reduced.metrics.size,
            reduced.metrics.modal_depth,
            reduced.metrics.atoms.into_iter().collect::<Vec<_>>().join(", "),
            reduced.source_var_count
        );
    }
    Ok(())
}

fn build_frame(frame: FrameArg, chain: usize, vars: u32, mode: ModeArg) -> Result<(String, KripkeFrame)> {
    match frame {
        FrameArg::F => Ok((format!("f(chain={chain})"), frame_f(chain))),
        FrameArg::FStrict => Ok((format!("f-strict(chain={chain})"), frame_f_strict(chain))),
        FrameArg::FVf => {
            // the all-ones valuation gives the root its full edge set
            let v = ClassicalValuation::from_pairs((1..=vars).map(|k| (k, true)));
            let model = model_f_vf(&v, vars, mode.var_free())?;
            let label = format!(
                "f-vf(vars={vars}, mode={}, valuation=all-ones)",
                match mode {
                    ModeArg::Repaired => "repaired",
                    ModeArg::Literal => "literal",
                }
            );
            Ok((label, model.frame().clone()))
        }
    }
}

fn cmd_axioms(
    cli: &Cli,
    frame: FrameArg,
    chain: usize,
    vars: u32,
    mode: ModeArg,
    print_config: bool,
    names: &[String],
) -> Result<()> {
    if print_config {
        print!("{}", AxiomConfig::default_text());
        return Ok(());
    }
    let config = load_config(cli)?;
    // expand logic names into their axiom lists, keep axiom names as-is
    let mut selected: Vec<String> = Vec::new();
    if names.is_empty() {
        selected.extend(config.axiom_names().map(str::to_string));
    } else {
        for name in names {
            if config.axiom(name).is_some() {
                selected.push(name.clone());
            } else if let Some(members) = config.logic(name) {
                selected.extend(members.iter().cloned());
            } else {
                bail!("unknown axiom or logic `{name}`");
            }
        }
    }
    let (label, frame) = build_frame(frame, chain, vars, mode)?;
    let props = frame_properties(&frame);
    let props_out = PropertiesOutput {
        frame: label.clone(),
        worlds: frame.world_count(),
        reflexive: props.reflexive,
        irreflexive: props.irreflexive,
        transitive: props.transitive,
        antisymmetric: props.antisymmetric,
        linear: props.linear,
        acyclic_over_distinct: props.acyclic_over_distinct,
    };
    if cli.json {
        println!("{}", serde_json::to_string(&props_out)?);
    } else {
        println!(
            "{label}: {} worlds; reflexive={} irreflexive={} transitive={} antisymmetric={} linear={} acyclic_over_distinct={}",
            props_out.worlds,
            props_out.reflexive,
            props_out.irreflexive,
            props_out.transitive,
            props_out.antisymmetric,
            props_out.linear,
            props_out.acyclic_over_distinct
        );
    }
    let budget = SearchBudget {
        trials: cli.budget,
        seed: cli.seed,
    };
    for name in selected {
        let formula = config
            .axiom(&name)
            .ok_or_else(|| anyhow!("unknown axiom `{name}`"))?;
        let verdict = check_validity(&frame, formula, &budget);
        let (verdict_text, countermodel, refuted_world) = match &verdict {
            Verdict::Valid { exhaustive } => (
                if *exhaustive {
                    "valid (exhaustive)".to_string()
                } else {
                    "valid".to_string()
                },
                None,
                None,
            ),
            Verdict::NoCounterexampleFound { trials } => {
                (format!("no counterexample in {trials} trials"), None, None)
            }
            Verdict::Refuted { model, world } => (
                "refuted".to_string(),
                Some(serde_json::from_str(&model.to_json())?),
                Some(*world),
            ),
        };
        if cli.json {
            let out = AxiomVerdict {
                axiom: name,
                formula: formula.to_string(),
                verdict: verdict_text,
                countermodel,
                refuted_world,
            };
            println!("{}", serde_json::to_string(&out)?);
        } else {
            print!("{name} = {formula}: {verdict_text}");
            match (&countermodel, refuted_world) {
                (Some(model), Some(world)) => println!(" at world {world}; countermodel {model}"),
                _ => println!(),
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SatOutput {
    logic: String,
    engine: &'static str,
    formula: String,
    satisfiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    world: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<serde_json::Value>,
}

fn cmd_sat(
    json: bool,
    logic: LogicId,
    engine: EngineArg,
    max_worlds: usize,
    text: &str,
) -> Result<()> {
    let formula = Formula::parse(text)?;
    let (engine_name, result) = match engine {
        EngineArg::Decide => ("decide", decide_sat(&formula, logic)),
        EngineArg::Brute => ("brute", brute_force_sat(&formula, logic, max_worlds)?),
    };
    let out = match &result {
        SatResult::Satisfiable { witness, world } => SatOutput {
            logic: logic.to_string(),
            engine: engine_name,
            formula: formula.to_string(),
            satisfiable: true,
            world: Some(*world),
            witness: Some(serde_json::from_str(&witness.to_json())?),
        },
        SatResult::Unsatisfiable => SatOutput {
            logic: logic.to_string(),
            engine: engine_name,
            formula: formula.to_string(),
            satisfiable: false,
            world: None,
            witness: None,
        },
    };
    if json {
        println!("{}", serde_json::to_string(&out)?);
    } else if out.satisfiable {
        println!(
            "satisfiable in {} at world {} of witness {}",
            logic,
            out.world.unwrap(),
            out.witness.as_ref().unwrap()
        );
    } else {
        println!("unsatisfiable in {logic}");
    }
    Ok(())
}

fn cmd_mc(json: bool, model_path: &str, world: Option<usize>, text: &str) -> Result<()> {
    let formula = Formula::parse(text)?;
    let model_text = if model_path == "-" {
        let mut buffer = String::new();
        std::io::stdin().read_to_string(&mut buffer)?;
        buffer
    } else {
        std::fs::read_to_string(model_path).with_context(|| format!("reading {model_path}"))?
    };
    // the two wire formats are distinguished by their required fields
    let holds = match KripkeModel::from_json(&model_text) {
        Ok(model) => {
            let at = world.unwrap_or(model.designated());
            if at >= model.world_count() {
                bail!("world {at} outside 0..{}", model.world_count());
            }
            model.model_check(at, &formula)
        }
        Err(kripke_err) => match NeighborhoodModel::from_json(&model_text) {
            Ok(model) => {
                let at = world.unwrap_or(0);
                if at >= model.world_count() {
                    bail!("world {at} outside 0..{}", model.world_count());
                }
                nbhd_model_check(&model, at, &formula)
            }
            Err(nbhd_err) => bail!(
                "model is neither a Kripke model ({kripke_err}) nor a neighborhood model ({nbhd_err})"
            ),
        },
    };
    if json {
        println!("{{\"holds\":{holds}}}");
    } else {
        println!("{holds}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Parse { formula } => {
            cmd_parse(cli.json, formula)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce {
            fragment,
            mode,
            formula,
        } => {
            cmd_reduce(cli.json, fragment.kind(*mode), formula)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            theorem,
            mode,
            max_vars,
            max_size,
            random,
            random_vars,
            random_size,
            sat_checks,
            model_pool,
            records,
        } => {
            let opts = verify::VerifyOptions {
                theorem: *theorem,
                mode: mode.var_free(),
                max_vars: *max_vars,
                max_size: *max_size,
                random: *random,
                random_vars: *random_vars,
                random_size: *random_size,
                sat_checks: *sat_checks,
                model_pool: *model_pool,
                seed: cli.seed,
                json: cli.json,
                records: *records,
                command_echo: std::env::args().collect::<Vec<_>>().join(" "),
            };
            let disagreements = verify::run(&opts);
            Ok(if disagreements == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Axioms {
            frame,
            chain,
            vars,
            mode,
            print_config,
            names,
        } => {
            cmd_axioms(cli, *frame, *chain, *vars, *mode, *print_config, names)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            fragment,
            from,
            to,
            cnf_vars,
            cnf_clauses,
            cnf_samples,
        } => {
            let opts = bench::BenchOptions {
                fragment: fragment.kind(ModeArg::Repaired),
                from: *from,
                to: *to,
                cnf_vars: *cnf_vars,
                cnf_clauses: *cnf_clauses,
                cnf_samples: if *cnf_vars == 0 || *cnf_clauses == 0 {
                    0
                } else {
                    *cnf_samples
                },
                seed: cli.seed,
                json: cli.json,
            };
            Ok(if bench::run(&opts) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Sat {
            logic,
            engine,
            max_worlds,
            formula,
        } => {
            cmd_sat(cli.json, *logic, *engine, *max_worlds, formula)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mc {
            model,
            world,
            formula,
        } => {
            cmd_mc(cli.json, model, *world, formula)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
