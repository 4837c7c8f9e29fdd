//! Classical propositional oracle and sweep corpora.
//!
//! [`taut_check`] decides tautology-hood of propositional formulas over at
//! most 20 distinct indexed variables `pk` and returns a concrete refuting
//! valuation when one exists. Small variable counts go through an exhaustive truth
//! table; larger ones fall back to a backtracking search with short-circuit
//! partial evaluation. Both explore assignments in the same lexicographic
//! order (lowest index most significant, false before true), so the reported
//! valuation is deterministic regardless of the engine.
//!
//! The enumeration helpers drive the small-scope sweeps: every propositional
//! (or modal) formula up to a node budget, in a fixed canonical order, plus
//! seeded random corpora.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::families::var_index;
use crate::formula::Formula;
use crate::rng::SplitMix64;

/// Upper bound on distinct variables accepted by [`taut_check`].
pub const MAX_TAUT_VARS: usize = 20;

/// Variables beyond this count switch from the truth table to backtracking.
const TABLE_VAR_LIMIT: usize = 12;

/// A total assignment on a finite set of indexed variables `pk`.
///
/// Lookup of an undeclared index yields `false`; the declared indices are the
/// valuation's domain for display and reporting purposes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassicalValuation {
    values: BTreeMap<u32, bool>,
}

impl ClassicalValuation {
    pub fn new() -> ClassicalValuation {
        ClassicalValuation::default()
    }

    /// Build from index/value pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, bool)>) -> ClassicalValuation {
        ClassicalValuation {
            values: pairs.into_iter().collect(),
        }
    }

    /// Build from the low bits of `bits`: variable `p(start + i)` gets bit `i`.
    pub fn from_bits(start: u32, count: u32, bits: u64) -> ClassicalValuation {
        assert!(count <= 64, "from_bits covers at most 64 variables");
        ClassicalValuation {
            values: (0..count)
                .map(|i| (start + i, (bits >> i) & 1 == 1))
                .collect(),
        }
    }

    pub fn set(&mut self, index: u32, value: bool) {
        self.values.insert(index, value);
    }

    /// Value of `p<index>`; `false` when undeclared.
    pub fn get(&self, index: u32) -> bool {
        self.values.get(&index).copied().unwrap_or(false)
    }

    pub fn max_index(&self) -> Option<u32> {
        self.values.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

impl fmt::Display for ClassicalValuation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.values {
            if !first {
                write!(out, ", ")?;
            }
            first = false;
            write!(out, "p{k}={}", if *v { 1 } else { 0 })?;
        }
        Ok(())
    }
}

/// Outcome of [`taut_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TautVerdict {
    Tautology,
    RefutedBy(ClassicalValuation),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TautError {
    #[error("formula contains modal operators")]
    ModalOperator,
    #[error("atom `{0}` is not an indexed variable p1, p2, …")]
    UnsupportedAtom(String),
    #[error("formula uses {0} distinct variables, the oracle accepts at most {MAX_TAUT_VARS}")]
    TooManyVariables(usize),
}

/// Evaluate a propositional formula under a valuation.
pub fn evaluate(f: &Formula, v: &ClassicalValuation) -> bool {
    match f {
        Formula::Bottom => false,
        Formula::Top => true,
        Formula::Atom(a) => var_index(a).map(|k| v.get(k)).unwrap_or(false),
        Formula::Not(x) => !evaluate(x, v),
        Formula::And(a, b) => evaluate(a, v) && evaluate(b, v),
        Formula::Or(a, b) => evaluate(a, v) || evaluate(b, v),
        Formula::Implies(a, b) => !evaluate(a, v) || evaluate(b, v),
        Formula::Iff(a, b) => evaluate(a, v) == evaluate(b, v),
        Formula::Box(_) | Formula::Diamond(_) => {
            unreachable!("evaluate is only called on propositional formulas")
        }
    }
}

/// Three-valued evaluation under a partial assignment; `None` = undetermined.
fn evaluate_partial(f: &Formula, assigned: &BTreeMap<u32, bool>) -> Option<bool> {
    match f {
        Formula::Bottom => Some(false),
        Formula::Top => Some(true),
        Formula::Atom(a) => assigned.get(&var_index(a).unwrap()).copied(),
        Formula::Not(x) => evaluate_partial(x, assigned).map(|b| !b),
        Formula::And(a, b) => match (evaluate_partial(a, assigned), evaluate_partial(b, assigned)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Formula::Or(a, b) => match (evaluate_partial(a, assigned), evaluate_partial(b, assigned)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Formula::Implies(a, b) => {
            match (evaluate_partial(a, assigned), evaluate_partial(b, assigned)) {
                (Some(false), _) | (_, Some(true)) => Some(true),
                (Some(true), Some(false)) => Some(false),
                _ => None,
            }
        }
        Formula::Iff(a, b) => match (evaluate_partial(a, assigned), evaluate_partial(b, assigned)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
        Formula::Box(_) | Formula::Diamond(_) => unreachable!(),
    }
}

/// Decide whether a propositional formula over `p1..p20` is a classical
/// tautology; if not, return the lexicographically first refuting valuation.
pub fn taut_check(f: &Formula) -> Result<TautVerdict, TautError> {
    if f.modal_depth() != 0 {
        return Err(TautError::ModalOperator);
    }
    let metrics = f.metrics();
    let mut vars = Vec::with_capacity(metrics.atoms.len());
    for atom in &metrics.atoms {
        match var_index(atom) {
            Some(k) if k >= 1 => vars.push(k),
            _ => return Err(TautError::UnsupportedAtom(atom.clone())),
        }
    }
    if vars.len() > MAX_TAUT_VARS {
        return Err(TautError::TooManyVariables(vars.len()));
    }
    vars.sort_unstable();

    if vars.len() <= TABLE_VAR_LIMIT {
        let m = vars.len();
        for row in 0u64..(1u64 << m) {
            // lowest-index variable in the most significant position
            let v = ClassicalValuation::from_pairs(
                vars.iter()
                    .enumerate()
                    .map(|(i, &k)| (k, (row >> (m - 1 - i)) & 1 == 1)),
            );
            if !evaluate(f, &v) {
                return Ok(TautVerdict::RefutedBy(v));
            }
        }
        Ok(TautVerdict::Tautology)
    } else {
        let mut assigned = BTreeMap::new();
        match refute_backtracking(f, &vars, 0, &mut assigned) {
            Some(v) => Ok(TautVerdict::RefutedBy(v)),
            None => Ok(TautVerdict::Tautology),
        }
    }
}

fn refute_backtracking(
    f: &Formula,
    vars: &[u32],
    next: usize,
    assigned: &mut BTreeMap<u32, bool>,
) -> Option<ClassicalValuation> {
    match evaluate_partial(f, assigned) {
        Some(false) => {
            // Complete the refutation with `false` for the free variables so
            // the reported valuation is total on the formula's variables.
            let mut v = ClassicalValuation::new();
            for &k in vars {
                v.set(k, assigned.get(&k).copied().unwrap_or(false));
            }
            return Some(v);
        }
        Some(true) => return None,
        None => {}
    }
    if next == vars.len() {
        return None;
    }
    let k = vars[next];
    for value in [false, true] {
        assigned.insert(k, value);
        if let Some(v) = refute_backtracking(f, vars, next + 1, assigned) {
            return Some(v);
        }
    }
    assigned.remove(&k);
    None
}

fn leaves(max_vars: u32, modal: bool) -> Vec<Formula> {
    let mut out = vec![Formula::Bottom, Formula::Top];
    if modal {
        out.push(Formula::atom("p"));
    } else {
        for k in 1..=max_vars {
            out.push(Formula::atom(format!("p{k}")));
        }
    }
    out
}

fn visit_exact(
    size: usize,
    leaves: &[Formula],
    modal: bool,
    visit: &mut dyn FnMut(&Formula),
) {
    if size == 0 {
        return;
    }
    if size == 1 {
        for leaf in leaves {
            visit(leaf);
        }
        return;
    }
    // unary operators over trees one node smaller
    let mut wrap_unary = |g: &Formula| {
        visit(&Formula::not(g.clone()));
        if modal {
            visit(&Formula::boxed(g.clone()));
            visit(&Formula::diamond(g.clone()));
        }
    };
    visit_exact(size - 1, leaves, modal, &mut wrap_unary);
    // binary operators over every split of the remaining nodes
    for left_size in 1..=size.saturating_sub(2) {
        let right_size = size - 1 - left_size;
        let mut outer = |left: &Formula| {
            let left = left.clone();
            let mut inner = |right: &Formula| {
                visit(&Formula::and(left.clone(), right.clone()));
                visit(&Formula::or(left.clone(), right.clone()));
                visit(&Formula::implies(left.clone(), right.clone()));
                visit(&Formula::iff(left.clone(), right.clone()));
            };
            visit_exact(right_size, leaves, modal, &mut inner);
        };
        visit_exact(left_size, leaves, modal, &mut outer);
    }
}

/// Visit every propositional formula over `p1..p<max_vars>` with at most
/// `max_size` nodes, in canonical order (by size, then structurally), without
/// materializing the corpus. Duplicates up to structural equality are never
/// produced.
pub fn for_each_formula(max_size: usize, max_vars: u32, visit: &mut dyn FnMut(&Formula)) {
    let leaves = leaves(max_vars, false);
    for size in 1..=max_size {
        visit_exact(size, &leaves, false, visit);
    }
}

/// Materialized version of [`for_each_formula`], for small bounds.
pub fn enumerate_formulas(max_size: usize, max_vars: u32) -> Vec<Formula> {
    let mut out = Vec::new();
    for_each_formula(max_size, max_vars, &mut |f| out.push(f.clone()));
    out
}

/// Visit every modal formula over the single atom `p` with at most
/// `max_size` nodes, canonical order; unary connectives are `~`, `[]`, `<>`.
pub fn for_each_modal_formula(max_size: usize, visit: &mut dyn FnMut(&Formula)) {
    let leaves = leaves(1, true);
    for size in 1..=max_size {
        visit_exact(size, &leaves, true, visit);
    }
}

/// Seeded random propositional formulas over `p1..p<max_vars>`.
///
/// Each sample picks a target size in `3..=max_size` and builds an exact-size
/// tree; the stream is a pure function of the seed.
pub fn random_formulas(seed: u64, count: usize, max_vars: u32, max_size: usize) -> Vec<Formula> {
    assert!(max_size >= 3);
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let target = 3 + rng.below((max_size - 2) as u64) as usize;
        out.push(random_exact(target, max_vars, &mut rng));
    }
    out
}

fn random_exact(size: usize, max_vars: u32, rng: &mut SplitMix64) -> Formula {
    if size == 1 {
        return match rng.below(max_vars as u64 + 2) {
            0 => Formula::Bottom,
            1 => Formula::Top,
            k => Formula::atom(format!("p{}", k - 1)),
        };
    }
    if size == 2 {
        return Formula::not(random_exact(1, max_vars, rng));
    }
    match rng.below(5) {
        0 => Formula::not(random_exact(size - 1, max_vars, rng)),
        op => {
            let left_size = 1 + rng.below((size - 2) as u64) as usize;
            let left = random_exact(left_size, max_vars, rng);
            let right = random_exact(size - 1 - left_size, max_vars, rng);
            match op {
                1 => Formula::and(left, right),
                2 => Formula::or(left, right),
                3 => Formula::implies(left, right),
                _ => Formula::iff(left, right),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn excluded_middle_is_a_tautology() {
        assert_eq!(taut_check(&parse("p1 | ~p1")).unwrap(), TautVerdict::Tautology);
    }

    #[test]
    fn implication_refuted_at_first_row() {
        match taut_check(&parse("p1 -> p2")).unwrap() {
            TautVerdict::RefutedBy(v) => {
                assert!(v.get(1));
                assert!(!v.get(2));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn chained_implication_is_a_tautology() {
        let f = parse("(p1 -> p2) & (p2 -> p3) -> (p1 -> p3)");
        assert_eq!(taut_check(&f).unwrap(), TautVerdict::Tautology);
    }

    #[test]
    fn refuting_valuations_recheck() {
        let mut seen_refuted = 0;
        for f in enumerate_formulas(5, 2) {
            if let TautVerdict::RefutedBy(v) = taut_check(&f).unwrap() {
                assert!(!evaluate(&f, &v), "refutation does not re-check for {f}");
                seen_refuted += 1;
            }
        }
        assert!(seen_refuted > 100);
    }

    #[test]
    fn backtracking_agrees_with_table() {
        // force the backtracking path with 13 variables
        let big = parse(
            "p1 & p2 & p3 & p4 & p5 & p6 & p7 & p8 & p9 & p10 & p11 & p12 & p13 -> p1",
        );
        assert_eq!(taut_check(&big).unwrap(), TautVerdict::Tautology);
        let refutable = parse(
            "p1 & p2 & p3 & p4 & p5 & p6 & p7 & p8 & p9 & p10 & p11 & p12 -> p13",
        );
        match taut_check(&refutable).unwrap() {
            TautVerdict::RefutedBy(v) => {
                assert!(!evaluate(&refutable, &v));
                assert!((1..=12).all(|k| v.get(k)));
                assert!(!v.get(13));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rejects_modal_and_foreign_atoms() {
        assert_eq!(taut_check(&parse("[]p1")), Err(TautError::ModalOperator));
        assert_eq!(
            taut_check(&parse("p1 & x")),
            Err(TautError::UnsupportedAtom("x".into()))
        );
        assert_eq!(
            taut_check(&parse("p0")),
            Err(TautError::UnsupportedAtom("p0".into()))
        );
    }

    #[test]
    fn rejects_more_than_twenty_distinct_variables() {
        let wide = (1..=21)
            .map(|k| format!("p{k}"))
            .collect::<Vec<_>>()
            .join(" & ");
        assert_eq!(
            taut_check(&parse(&wide)),
            Err(TautError::TooManyVariables(21))
        );
        let at_limit = (2..=21)
            .map(|k| format!("p{k}"))
            .collect::<Vec<_>>()
            .join(" & ");
        assert!(taut_check(&parse(&at_limit)).is_ok());
    }

    #[test]
    fn smallest_formulas_enumerate_in_order() {
        let got = enumerate_formulas(1, 1);
        assert_eq!(got, vec![Formula::Bottom, Formula::Top, Formula::atom("p1")]);
    }

    #[test]
    fn enumeration_count_is_pinned() {
        // frozen regression value for size <= 3, one variable
        assert_eq!(enumerate_formulas(3, 1).len(), 45);
    }

    #[test]
    fn enumeration_contains_identity_implication() {
        let want = parse("p1 -> p1");
        assert!(enumerate_formulas(3, 1).contains(&want));
    }

    #[test]
    fn enumeration_has_no_structural_duplicates() {
        let all = enumerate_formulas(4, 2);
        let distinct: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), distinct.len());
    }

    #[test]
    fn random_corpus_is_seed_deterministic() {
        let a = random_formulas(9, 50, 3, 10);
        let b = random_formulas(9, 50, 3, 10);
        let c = random_formulas(10, 50, 3, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|f| f.size() <= 10 && f.modal_depth() == 0));
    }
}
