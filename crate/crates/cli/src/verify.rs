//! The `verify` command: sweep a propositional corpus through a reduction and
//! compare the classical verdict with the designated-world verdict on the
//! matching frame.

use std::collections::BTreeMap;
use std::time::Instant;

use modalforge::classical::{self, ClassicalValuation, TautVerdict};
use modalforge::families::{self, FragmentKind, VarFreeMode};
use modalforge::kripke::{chain_len_for, model_f, model_f_strict, model_f_vf, KripkeModel};
use modalforge::neighborhood::{decide_sat, LogicId, SatResult};
use modalforge::Formula;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RecordsMode {
    /// One JSON line per case.
    All,
    /// Only cases whose agreement flag is false.
    Disagreements,
    /// Summary only.
    None,
}

pub struct VerifyOptions {
    pub theorem: u8,
    pub mode: VarFreeMode,
    pub max_vars: u32,
    pub max_size: usize,
    pub random: usize,
    pub random_vars: u32,
    pub random_size: usize,
    pub sat_checks: usize,
    pub model_pool: usize,
    pub seed: u64,
    pub json: bool,
    pub records: RecordsMode,
    pub command_echo: String,
}

#[derive(Serialize)]
struct DesignatedVerdicts {
    base: bool,
    widened: bool,
}

#[derive(Serialize)]
struct CaseRecord {
    case: usize,
    formula: String,
    fragment: String,
    classical: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    valuation: Option<BTreeMap<String, bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    designated: Option<DesignatedVerdicts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pool_models_checked: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sat_check: Option<&'static str>,
    agreement: bool,
}

#[derive(Serialize)]
struct Summary {
    command: String,
    theorem: u8,
    fragment: String,
    cases: usize,
    refuted: usize,
    tautologies: usize,
    disagreements: usize,
    stability_violations: usize,
    sat_checks_run: usize,
    seed: u64,
    wall_ms: u128,
}

#[derive(Serialize)]
struct SummaryLine {
    summary: Summary,
}

fn fragment_for(theorem: u8, mode: VarFreeMode) -> FragmentKind {
    match theorem {
        1 => FragmentKind::TwoVar,
        2 => FragmentKind::OneVar,
        3 => FragmentKind::VarFree(mode),
        other => unreachable!("theorem {other} rejected by argument parsing"),
    }
}

fn max_var_index(f: &Formula) -> u32 {
    f.metrics()
        .atoms
        .iter()
        .filter_map(|a| families::var_index(a))
        .max()
        .unwrap_or(0)
}

fn build_model(
    kind: FragmentKind,
    v: &ClassicalValuation,
    n_max: u32,
    depth: usize,
    margin: usize,
) -> KripkeModel {
    match kind {
        FragmentKind::TwoVar => {
            model_f(chain_len_for(n_max, depth) + margin, v).expect("chain is long enough")
        }
        FragmentKind::OneVar => {
            model_f_strict(chain_len_for(n_max, depth) + margin, v).expect("chain is long enough")
        }
        FragmentKind::VarFree(mode) => {
            model_f_vf(v, n_max.max(1) + margin as u32 / 2, mode).expect("var count is positive")
        }
    }
}

/// Run the sweep; returns the number of disagreements outside literal mode
/// (the process exit is nonzero iff that is nonzero).
pub fn run(opts: &VerifyOptions) -> usize {
    let start = Instant::now();
    let kind = fragment_for(opts.theorem, opts.mode);
    let literal = matches!(kind, FragmentKind::VarFree(VarFreeMode::Literal));
    let fragment_name = kind.to_string();

    let mut case = 0usize;
    let mut refuted = 0usize;
    let mut tautologies = 0usize;
    let mut disagreements = 0usize;
    let mut stability_violations = 0usize;
    let mut sat_checks_run = 0usize;
    let mut pool: Vec<KripkeModel> = Vec::new();

    let mut process = |phi: &Formula| {
        let id = case;
        case += 1;
        let n_max = max_var_index(phi);
        let reduced = families::reduce(phi, kind).expect("corpus formulas reduce");
        let depth = reduced.metrics.modal_depth;
        let record = match classical::taut_check(phi).expect("corpus formulas are propositional") {
            TautVerdict::RefutedBy(v) => {
                refuted += 1;
                let base_model = build_model(kind, &v, n_max, depth, 0);
                let base = base_model.model_check(base_model.designated(), &reduced.formula);
                let widened_model = build_model(kind, &v, n_max, depth, 2);
                let widened =
                    widened_model.model_check(widened_model.designated(), &reduced.formula);
                if base != widened {
                    stability_violations += 1;
                }
                // the theorem demands the designated world refute the reduction
                let agreement = !base;
                if !agreement {
                    disagreements += 1;
                }
                if pool.len() < opts.model_pool {
                    pool.push(base_model);
                }
                CaseRecord {
                    case: id,
                    formula: phi.to_string(),
                    fragment: fragment_name.clone(),
                    classical: "refuted",
                    valuation: Some(
                        v.iter().map(|(k, b)| (format!("p{k}"), b)).collect(),
                    ),
                    designated: Some(DesignatedVerdicts { base, widened }),
                    pool_models_checked: None,
                    sat_check: None,
                    agreement,
                }
            }
            TautVerdict::Tautology => {
                tautologies += 1;
                // a substitution instance of a tautology must hold everywhere
                let mut everywhere = true;
                for model in &pool {
                    for w in 0..model.world_count() {
                        if !model.model_check(w, &reduced.formula) {
                            everywhere = false;
                        }
                    }
                }
                let sat_check = if sat_checks_run < opts.sat_checks && !literal {
                    sat_checks_run += 1;
                    match decide_sat(&Formula::not(reduced.formula.clone()), LogicId::E) {
                        SatResult::Unsatisfiable => Some("unsatisfiable"),
                        SatResult::Satisfiable { .. } => Some("satisfiable"),
                    }
                } else {
                    None
                };
                let agreement = everywhere && sat_check != Some("satisfiable");
                if !agreement {
                    disagreements += 1;
                }
                CaseRecord {
                    case: id,
                    formula: phi.to_string(),
                    fragment: fragment_name.clone(),
                    classical: "tautology",
                    valuation: None,
                    designated: None,
                    pool_models_checked: Some(pool.len()),
                    sat_check,
                    agreement,
                }
            }
        };
        let emit = match opts.records {
            RecordsMode::All => true,
            RecordsMode::Disagreements => !record.agreement,
            RecordsMode::None => false,
        };
        if emit {
            if opts.json {
                println!("{}", serde_json::to_string(&record).expect("record serializes"));
            } else if !record.agreement {
                println!(
                    "disagreement on case {}: {} ({})",
                    record.case, record.formula, record.classical
                );
            }
        }
    };

    classical::for_each_formula(opts.max_size, opts.max_vars, &mut process);
    for phi in classical::random_formulas(opts.seed, opts.random, opts.random_vars, opts.random_size)
    {
        process(&phi);
    }

    let summary = Summary {
        command: opts.command_echo.clone(),
        theorem: opts.theorem,
        fragment: fragment_name,
        cases: case,
        refuted,
        tautologies,
        disagreements,
        stability_violations,
        sat_checks_run,
        seed: opts.seed,
        wall_ms: start.elapsed().as_millis(),
    };
    if opts.json {
        println!(
            "{}",
            serde_json::to_string(&SummaryLine { summary }).expect("summary serializes")
        );
    } else {
        println!(
            "theorem {} sweep ({}): {} cases, {} refuted, {} tautologies, {} disagreements, {} stability violations, {} sat checks, {} ms",
            summary.theorem,
            summary.fragment,
            summary.cases,
            summary.refuted,
            summary.tautologies,
            summary.disagreements,
            summary.stability_violations,
            summary.sat_checks_run,
            summary.wall_ms
        );
        if literal && summary.disagreements > 0 {
            println!(
                "literal mode: {} disagreements documented (expected for the literal sentinel text)",
                summary.disagreements
            );
        }
    }
    if literal {
        0
    } else {
        disagreements
    }
}
