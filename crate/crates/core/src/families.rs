//! Indexed formula families and the fragment reductions built from them.
//!
//! Three families of sentinel formulas, one per target fragment:
//!
//! - two-variable (atoms `p`, `q`):  `delta`/`alpha`/`beta`
//! - one-variable (atom `p`):        `delta_strict`/`alpha_strict`/`beta_strict`
//! - variable-free:                  `alpha_vf`/`beta_vf`
//!
//! [`reduce`] maps a purely propositional formula over `p1, p2, …` into the
//! chosen fragment by substituting the k-th beta formula for `pk`. The
//! substitution is a homomorphism over every propositional connective, so
//! the output inherits the input's shape with each variable occurrence
//! replaced by a fixed sentinel whose size is affine in its index.

use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Metrics, Substitution};

/// Shape of the variable-free sentinel.
///
/// `Repaired` builds `beta_vf(n) = <> alpha_vf(n)`, which is variable-free.
/// `Literal` builds `beta_vf(n) = <>(p & alpha_strict(n))`, atom `p`
/// included; it exists so the verification harness can measure what that
/// variant does on the bundle frame rather than assume it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarFreeMode {
    Literal,
    Repaired,
}

/// Target fragment of a reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FragmentKind {
    /// Atoms of the output are among `{p, q}`.
    TwoVar,
    /// Atoms of the output are among `{p}`.
    OneVar,
    /// No atoms at all in `Repaired` mode; `{p}` in `Literal` mode.
    VarFree(VarFreeMode),
}

impl fmt::Display for FragmentKind {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentKind::TwoVar => write!(out, "two-var"),
            FragmentKind::OneVar => write!(out, "one-var"),
            FragmentKind::VarFree(VarFreeMode::Repaired) => write!(out, "var-free"),
            FragmentKind::VarFree(VarFreeMode::Literal) => write!(out, "var-free-literal"),
        }
    }
}

/// Result of [`reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    pub formula: Formula,
    pub metrics: Metrics,
    pub fragment: FragmentKind,
    /// Number of distinct `pk` atoms in the input.
    pub source_var_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("input must be purely propositional, found a modal operator")]
    ModalInput,
    #[error("atom `{0}` is not an indexed variable p1, p2, …")]
    UnsupportedAtom(String),
    #[error("variable-free reductions start at p1; p0 is not accepted")]
    ZeroIndexVarFree,
}

/// Index of an atom in the `p0, p1, p2, …` namespace, if it belongs to it.
/// Names with leading zeros (`p01`) are not part of the family.
pub fn var_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('p')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

fn p() -> Formula {
    Formula::atom("p")
}

fn q() -> Formula {
    Formula::atom("q")
}

/// `delta(0) = []q`, `delta(n+1) = q & <>(~q & <>delta(n))`.
pub fn delta(n: u32) -> Formula {
    let mut f = Formula::boxed(q());
    for _ in 0..n {
        f = Formula::and(
            q(),
            Formula::diamond(Formula::and(Formula::not(q()), Formula::diamond(f))),
        );
    }
    f
}

/// `alpha(n) = delta(n) & ~delta(n+1)`.
pub fn alpha(n: u32) -> Formula {
    Formula::and(delta(n), Formula::not(delta(n + 1)))
}

/// `beta(n) = <>(p & alpha(n))`.
pub fn beta(n: u32) -> Formula {
    Formula::diamond(Formula::and(p(), alpha(n)))
}

/// `delta_strict(0) = []false`, `delta_strict(n+1) = <>delta_strict(n)`.
pub fn delta_strict(n: u32) -> Formula {
    let mut f = Formula::boxed(Formula::Bottom);
    for _ in 0..n {
        f = Formula::diamond(f);
    }
    f
}

/// `alpha_strict(n) = delta_strict(n) & ~delta_strict(n+1)`.
pub fn alpha_strict(n: u32) -> Formula {
    Formula::and(delta_strict(n), Formula::not(delta_strict(n + 1)))
}

/// `beta_strict(n) = <>(p & alpha_strict(n))`.
pub fn beta_strict(n: u32) -> Formula {
    Formula::diamond(Formula::and(p(), alpha_strict(n)))
}

/// `alpha_vf(n) = <>(<>true & []<>true) & delta_strict(n) & ~delta_strict(n+1)`,
/// for n ≥ 1. The first conjunct is `<>` applied to `box_plus(<>true)`.
///
/// Panics if `n == 0`; the variable-free family is indexed from 1.
pub fn alpha_vf(n: u32) -> Formula {
    assert!(n >= 1, "alpha_vf is defined for n >= 1");
    let liveness = Formula::diamond(Formula::diamond(Formula::Top).box_plus());
    Formula::and(
        Formula::and(liveness, delta_strict(n)),
        Formula::not(delta_strict(n + 1)),
    )
}

/// Variable-free sentinel, n ≥ 1. See [`VarFreeMode`] for the two shapes.
///
/// Panics if `n == 0`.
pub fn beta_vf(n: u32, mode: VarFreeMode) -> Formula {
    assert!(n >= 1, "beta_vf is defined for n >= 1");
    match mode {
        VarFreeMode::Repaired => Formula::diamond(alpha_vf(n)),
        VarFreeMode::Literal => Formula::diamond(Formula::and(p(), alpha_strict(n))),
    }
}

/// Substitute the fragment's sentinel family for the indexed variables of a
/// purely propositional formula.
///
/// The input must have modal depth zero and use only atoms of the form
/// `p<k>`; the variable-free fragments additionally require k ≥ 1.
pub fn reduce(f: &Formula, kind: FragmentKind) -> Result<ReductionOutput, ReduceError> {
    if f.modal_depth() != 0 {
        return Err(ReduceError::ModalInput);
    }
    let input_metrics = f.metrics();
    let mut substitution = Substitution::new();
    for atom in &input_metrics.atoms {
        let k = var_index(atom).ok_or_else(|| ReduceError::UnsupportedAtom(atom.clone()))?;
        let image = match kind {
            FragmentKind::TwoVar => beta(k),
            FragmentKind::OneVar => beta_strict(k),
            FragmentKind::VarFree(mode) => {
                if k == 0 {
                    return Err(ReduceError::ZeroIndexVarFree);
                }
                beta_vf(k, mode)
            }
        };
        substitution.bind(atom.clone(), image);
    }
    let formula = f.substitute(&substitution);
    let metrics = formula.metrics();
    Ok(ReductionOutput {
        formula,
        metrics,
        fragment: kind,
        source_var_count: input_metrics.atoms.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn delta_base_case() {
        assert_eq!(delta(0), parse("[]q"));
    }

    #[test]
    fn delta_unfolds_once() {
        assert_eq!(delta(1), parse("q & <>(~q & <>[]q)"));
    }

    #[test]
    fn delta_size_is_affine() {
        // each unfolding wraps the previous level in q & <>(~q & <>·), which
        // is 7 fresh nodes, so size(delta(n)) = 2 + 7n
        for n in 0..=4u32 {
            assert_eq!(delta(n).size(), 2 + 7 * n as usize);
        }
        for n in 0..30u32 {
            assert_eq!(delta(n + 1).size(), delta(n).size() + 7);
        }
    }

    #[test]
    fn alpha_base_case() {
        assert_eq!(alpha(0), parse("[]q & ~(q & <>(~q & <>[]q))"));
    }

    #[test]
    fn beta_wraps_alpha() {
        assert_eq!(beta(0), Formula::diamond(Formula::and(Formula::atom("p"), alpha(0))));
    }

    #[test]
    fn beta_atoms_are_p_and_q() {
        for k in 0..=10 {
            let atoms = beta(k).metrics().atoms;
            assert_eq!(atoms.into_iter().collect::<Vec<_>>(), vec!["p", "q"]);
        }
    }

    #[test]
    fn delta_strict_is_a_diamond_chain() {
        assert_eq!(delta_strict(2), parse("<><>[]false"));
        // 5 nodes: three modal operators above []false
        let m = delta_strict(3).metrics();
        assert_eq!(m.size, 5);
        assert_eq!(m.modal_depth, 4);
        assert!(m.atoms.is_empty());
    }

    #[test]
    fn alpha_strict_one() {
        assert_eq!(alpha_strict(1), parse("<>[]false & ~<><>[]false"));
    }

    #[test]
    fn beta_strict_one() {
        assert_eq!(beta_strict(1), parse("<>(p & (<>[]false & ~<><>[]false))"));
    }

    #[test]
    fn alpha_vf_one() {
        assert_eq!(
            alpha_vf(1),
            parse("<>(<>true & []<>true) & <>[]false & ~<><>[]false")
        );
    }

    #[test]
    fn beta_vf_repaired_is_variable_free() {
        assert!(beta_vf(2, VarFreeMode::Repaired).metrics().atoms.is_empty());
    }

    #[test]
    fn beta_vf_literal_contains_p() {
        let atoms = beta_vf(2, VarFreeMode::Literal).metrics().atoms;
        assert_eq!(atoms.into_iter().collect::<Vec<_>>(), vec!["p"]);
    }

    #[test]
    #[should_panic(expected = "n >= 1")]
    fn alpha_vf_rejects_zero() {
        alpha_vf(0);
    }

    #[test]
    fn reduce_single_variable_one_var() {
        let out = reduce(&parse("p1"), FragmentKind::OneVar).unwrap();
        assert_eq!(out.formula, parse("<>(p & (<>[]false & ~<><>[]false))"));
        assert_eq!(out.source_var_count, 1);
    }

    #[test]
    fn reduce_is_homomorphic_on_excluded_middle() {
        let out = reduce(&parse("p1 | ~p1"), FragmentKind::VarFree(VarFreeMode::Repaired)).unwrap();
        let b = beta_vf(1, VarFreeMode::Repaired);
        assert_eq!(out.formula, Formula::or(b.clone(), Formula::not(b)));
        assert!(out.metrics.atoms.is_empty());
    }

    #[test]
    fn reduce_two_var_size_matches_beta() {
        let out = reduce(&parse("p2"), FragmentKind::TwoVar).unwrap();
        assert_eq!(out.metrics.size, beta(2).metrics().size);
    }

    #[test]
    fn reduce_rejects_modal_input() {
        assert_eq!(
            reduce(&parse("[]p1"), FragmentKind::TwoVar),
            Err(ReduceError::ModalInput)
        );
    }

    #[test]
    fn reduce_rejects_foreign_atoms() {
        assert_eq!(
            reduce(&parse("p1 & x"), FragmentKind::OneVar),
            Err(ReduceError::UnsupportedAtom("x".into()))
        );
        assert_eq!(
            reduce(&parse("p01"), FragmentKind::OneVar),
            Err(ReduceError::UnsupportedAtom("p01".into()))
        );
    }

    #[test]
    fn reduce_rejects_p0_in_var_free_only() {
        assert_eq!(
            reduce(&parse("p0"), FragmentKind::VarFree(VarFreeMode::Repaired)),
            Err(ReduceError::ZeroIndexVarFree)
        );
        // The other fragments accept index zero.
        assert!(reduce(&parse("p0"), FragmentKind::TwoVar).is_ok());
        assert!(reduce(&parse("p0"), FragmentKind::OneVar).is_ok());
    }

    #[test]
    fn var_index_grammar() {
        assert_eq!(var_index("p0"), Some(0));
        assert_eq!(var_index("p12"), Some(12));
        assert_eq!(var_index("p"), None);
        assert_eq!(var_index("p01"), None);
        assert_eq!(var_index("q1"), None);
        assert_eq!(var_index("p1x"), None);
    }

    #[test]
    fn family_sizes_are_affine() {
        for (family, step) in [
            (&beta as &dyn Fn(u32) -> Formula, 14usize),
            (&beta_strict, 2),
        ] {
            let sizes: Vec<usize> = (0..=30).map(|k| family(k).size()).collect();
            for w in sizes.windows(2) {
                assert_eq!(w[1] - w[0], step);
            }
        }
        let sizes: Vec<usize> = (1..=30).map(|k| beta_vf(k, VarFreeMode::Repaired).size()).collect();
        for w in sizes.windows(2) {
            assert_eq!(w[1] - w[0], 2);
        }
    }
}
