//! The `bench` command: growth tables for the sentinel families and the
//! reduction, with exact affine-fit assertions.

use modalforge::families::{self, FragmentKind, VarFreeMode};
use modalforge::Formula;
use serde::Serialize;

/// Frozen coefficients for the 3-CNF growth check:
/// `|reduce(φ)| ≤ c1·(n+m)·n + c2` for a CNF over n variables and m clauses.
fn cnf_bound(kind: FragmentKind, vars: u32, clauses: u32) -> usize {
    let (c1, c2) = match kind {
        FragmentKind::TwoVar => (96usize, 100usize),
        FragmentKind::OneVar => (42, 100),
        FragmentKind::VarFree(_) => (60, 100),
    };
    c1 * (vars as usize + clauses as usize) * vars as usize + c2
}

#[derive(Serialize)]
struct SizeRow {
    k: u32,
    beta: usize,
    beta_strict: usize,
    beta_vf: usize,
}

#[derive(Serialize)]
struct Fit {
    family: &'static str,
    slope: usize,
    intercept: usize,
    exact: bool,
}

#[derive(Serialize)]
struct CnfRow {
    sample: usize,
    input_size: usize,
    output_size: usize,
    bound: usize,
    within: bool,
}

struct AffineCheck {
    rows: Vec<(u32, usize)>,
}

impl AffineCheck {
    fn fit(&self) -> Fit {
        let (k0, s0) = self.rows[0];
        let (k1, s1) = self.rows[1];
        let slope = (s1 - s0) / (k1 - k0) as usize;
        let intercept = s0 - slope * k0 as usize;
        let exact = self
            .rows
            .iter()
            .all(|&(k, s)| s == slope * k as usize + intercept);
        Fit {
            family: "",
            slope,
            intercept,
            exact,
        }
    }
}

/// Deterministic random 3-CNF over `p1..p<vars>` with `clauses` clauses.
fn random_cnf(seed: u64, vars: u32, clauses: u32) -> Formula {
    // local xorshift keeps the corpus independent of library internals
    let mut state = seed.wrapping_mul(0x2545_f491_4f6c_dd1d) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let literal = |r: u64| {
        let var = Formula::atom(format!("p{}", 1 + (r >> 1) % vars as u64));
        if r & 1 == 1 {
            Formula::not(var)
        } else {
            var
        }
    };
    let mut cnf: Option<Formula> = None;
    for _ in 0..clauses {
        let clause = Formula::or(
            Formula::or(literal(next()), literal(next())),
            literal(next()),
        );
        cnf = Some(match cnf {
            None => clause,
            Some(rest) => Formula::and(rest, clause),
        });
    }
    cnf.expect("at least one clause")
}

pub struct BenchOptions {
    pub fragment: FragmentKind,
    pub from: u32,
    pub to: u32,
    pub cnf_vars: u32,
    pub cnf_clauses: u32,
    pub cnf_samples: usize,
    pub seed: u64,
    pub json: bool,
}

/// Returns false when an exact-affinity or growth assertion fails.
pub fn run(opts: &BenchOptions) -> bool {
    let mut ok = true;
    let range: Vec<u32> = (opts.from.max(1)..=opts.to).collect();
    let rows: Vec<SizeRow> = range
        .iter()
        .map(|&k| SizeRow {
            k,
            beta: families::beta(k).size(),
            beta_strict: families::beta_strict(k).size(),
            beta_vf: families::beta_vf(k, VarFreeMode::Repaired).size(),
        })
        .collect();
    if opts.json {
        for row in &rows {
            println!("{}", serde_json::to_string(row).expect("row serializes"));
        }
    } else {
        println!("k\t|beta_k|\t|beta'_k|\t|beta''_k|");
        for row in &rows {
            println!("{}\t{}\t{}\t{}", row.k, row.beta, row.beta_strict, row.beta_vf);
        }
    }
    for (name, extract) in [
        ("beta", (|r: &SizeRow| r.beta) as fn(&SizeRow) -> usize),
        ("beta_strict", |r| r.beta_strict),
        ("beta_vf", |r| r.beta_vf),
    ] {
        let check = AffineCheck {
            rows: rows.iter().map(|r| (r.k, extract(r))).collect(),
        };
        let mut fit = check.fit();
        fit.family = name;
        if !fit.exact {
            ok = false;
        }
        if opts.json {
            println!("{}", serde_json::to_string(&fit).expect("fit serializes"));
        } else {
            println!(
                "{}: size(k) = {}k + {} ({})",
                fit.family,
                fit.slope,
                fit.intercept,
                if fit.exact { "exact" } else { "NOT AFFINE" }
            );
        }
    }

    if opts.cnf_samples > 0 {
        let bound = cnf_bound(opts.fragment, opts.cnf_vars, opts.cnf_clauses);
        for sample in 0..opts.cnf_samples {
            let cnf = random_cnf(
                opts.seed.wrapping_add(sample as u64),
                opts.cnf_vars,
                opts.cnf_clauses,
            );
            let reduced = families::reduce(&cnf, opts.fragment).expect("CNF inputs reduce");
            let row = CnfRow {
                sample,
                input_size: cnf.size(),
                output_size: reduced.metrics.size,
                bound,
                within: reduced.metrics.size <= bound,
            };
            if !row.within {
                ok = false;
            }
            if opts.json {
                println!("{}", serde_json::to_string(&row).expect("row serializes"));
            } else {
                println!(
                    "cnf sample {}: |φ| = {}, |reduce(φ)| = {} ≤ {} ({})",
                    row.sample,
                    row.input_size,
                    row.output_size,
                    row.bound,
                    if row.within { "ok" } else { "EXCEEDED" }
                );
            }
        }
    }
    ok
}
