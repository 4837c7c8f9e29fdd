//! The modal formula language.
//!
//! Concrete syntax (whitespace insignificant):
//!
//! ```text
//! atoms     [a-z][a-z0-9_]*        constants  true, false
//! unary     ~  []  <>              binary     &  |  ->  <->
//! ```
//!
//! Precedence, tightest first: unary, `&`, `|`, `->`, `<->`. Conjunction and
//! disjunction associate to the left, the arrows to the right. [`Formula`]
//! printing is minimal: parentheses appear exactly where the grammar needs
//! them, so `parse(print(f))` reproduces `f` node for node.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A modal propositional formula.
///
/// Plain tree representation; equality, ordering and hashing are structural.
/// No normalization is ever applied implicitly: the tree you build is the
/// tree that gets printed, substituted into and model-checked.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bottom,
    Top,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
}

/// Structural measurements of a formula, computed in one traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metrics {
    /// Number of nodes in the tree.
    pub size: usize,
    /// Maximum nesting of `[]`/`<>`.
    pub modal_depth: usize,
    /// Distinct atom names.
    pub atoms: BTreeSet<String>,
}

/// True iff `name` matches `[a-z][a-z0-9_]*` and is not a reserved word.
pub fn is_valid_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {
            chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        }
        _ => false,
    };
    ok && name != "true" && name != "false"
}

impl Formula {
    /// Atom constructor. Panics if `name` does not satisfy the lexical rule
    /// for atoms; programmatically built formulas must stay printable.
    pub fn atom(name: impl Into<String>) -> Formula {
        let name = name.into();
        assert!(is_valid_atom_name(&name), "invalid atom name: {name:?}");
        Formula::Atom(name)
    }

    #[allow(clippy::should_implement_trait)] // constructor, named like its siblings
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    /// `φ ∧ □φ`.
    pub fn box_plus(&self) -> Formula {
        Formula::and(self.clone(), Formula::boxed(self.clone()))
    }

    /// Parse the concrete syntax. See the module doc for the grammar.
    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        parse(text)
    }

    /// Size, modal depth and atom set in a single pass.
    pub fn metrics(&self) -> Metrics {
        let mut m = Metrics {
            size: 0,
            modal_depth: 0,
            atoms: BTreeSet::new(),
        };
        fn walk(f: &Formula, m: &mut Metrics, depth: usize) {
            m.size += 1;
            match f {
                Formula::Bottom | Formula::Top => {}
                Formula::Atom(a) => {
                    if !m.atoms.contains(a.as_str()) {
                        m.atoms.insert(a.clone());
                    }
                }
                Formula::Not(x) => walk(x, m, depth),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    walk(a, m, depth);
                    walk(b, m, depth);
                }
                Formula::Box(x) | Formula::Diamond(x) => {
                    if depth + 1 > m.modal_depth {
                        m.modal_depth = depth + 1;
                    }
                    walk(x, m, depth + 1);
                }
            }
        }
        walk(self, &mut m, 0);
        m
    }

    /// Node count alone, when the full [`Metrics`] is overkill.
    pub fn size(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Top | Formula::Atom(_) => 1,
            Formula::Not(x) | Formula::Box(x) | Formula::Diamond(x) => 1 + x.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Maximum `[]`/`<>` nesting.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Top | Formula::Atom(_) => 0,
            Formula::Not(x) => x.modal_depth(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Box(x) | Formula::Diamond(x) => 1 + x.modal_depth(),
        }
    }

    /// Simultaneous substitution: every atom in `s`'s domain is replaced by
    /// its image, in one pass. Atoms introduced by replacement formulas are
    /// never substituted again.
    pub fn substitute(&self, s: &Substitution) -> Formula {
        match self {
            Formula::Bottom | Formula::Top => self.clone(),
            Formula::Atom(a) => match s.get(a) {
                Some(image) => image.clone(),
                None => self.clone(),
            },
            Formula::Not(x) => Formula::not(x.substitute(s)),
            Formula::And(a, b) => Formula::and(a.substitute(s), b.substitute(s)),
            Formula::Or(a, b) => Formula::or(a.substitute(s), b.substitute(s)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(s), b.substitute(s)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(s), b.substitute(s)),
            Formula::Box(x) => Formula::boxed(x.substitute(s)),
            Formula::Diamond(x) => Formula::diamond(x.substitute(s)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) | Formula::Box(..) | Formula::Diamond(..) => 5,
            Formula::Bottom | Formula::Top | Formula::Atom(_) => 6,
        }
    }

    fn fmt_prec(&self, out: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            write!(out, "(")?;
        }
        match self {
            Formula::Bottom => write!(out, "false")?,
            Formula::Top => write!(out, "true")?,
            Formula::Atom(a) => write!(out, "{a}")?,
            Formula::Not(x) => {
                write!(out, "~")?;
                x.fmt_prec(out, 5)?;
            }
            Formula::Box(x) => {
                write!(out, "[]")?;
                x.fmt_prec(out, 5)?;
            }
            Formula::Diamond(x) => {
                write!(out, "<>")?;
                x.fmt_prec(out, 5)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(out, 4)?;
                write!(out, " & ")?;
                b.fmt_prec(out, 5)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(out, 3)?;
                write!(out, " | ")?;
                b.fmt_prec(out, 4)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(out, 3)?;
                write!(out, " -> ")?;
                b.fmt_prec(out, 2)?;
            }
            Formula::Iff(a, b) => {
                a.fmt_prec(out, 2)?;
                write!(out, " <-> ")?;
                b.fmt_prec(out, 1)?;
            }
        }
        if wrap {
            write!(out, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    /// Minimal-parenthesization canonical text.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(out, 0)
    }
}

/// A finite map from atom names to formulas, applied simultaneously.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, Formula>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, image: Formula) -> &mut Self {
        self.map.insert(name.into(), image);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Formula> {
        self.map.get(name)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The substitution equivalent to applying `self` first and `then`
    /// second: `a ↦ then(self(a))` on `self`'s domain, `a ↦ then(a)` on the
    /// rest of `then`'s domain.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (name, image) in &self.map {
            out.bind(name.clone(), image.substitute(then));
        }
        for (name, image) in &then.map {
            if !self.map.contains_key(name) {
                out.bind(name.clone(), image.clone());
            }
        }
        out
    }
}

impl FromIterator<(String, Formula)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (String, Formula)>>(iter: T) -> Substitution {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Parse failures, with byte positions into the input.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unbalanced parenthesis: `(` at byte {open} is never closed")]
    UnbalancedParen { open: usize },
    #[error("dangling unary operator `{op}` at byte {pos}")]
    DanglingUnary { op: &'static str, pos: usize },
    #[error("expected a formula at byte {pos}, found `{found}`")]
    ExpectedFormula { found: String, pos: usize },
    #[error("unexpected trailing input `{found}` at byte {pos}")]
    TrailingInput { found: String, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    True,
    False,
    Ident(String),
    Not,
    BoxOp,
    DiamondOp,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::True => "true".into(),
            Token::False => "false".into(),
            Token::Ident(s) => s.clone(),
            Token::Not => "~".into(),
            Token::BoxOp => "[]".into(),
            Token::DiamondOp => "<>".into(),
            Token::And => "&".into(),
            Token::Or => "|".into(),
            Token::Implies => "->".into(),
            Token::Iff => "<->".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '~' => {
                out.push((Token::Not, i));
                i += 1;
            }
            '&' => {
                out.push((Token::And, i));
                i += 1;
            }
            '|' => {
                out.push((Token::Or, i));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            '[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    out.push((Token::BoxOp, i));
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar { ch: '[', pos: i });
                }
            }
            '<' => match bytes.get(i + 1) {
                Some(b'>') => {
                    out.push((Token::DiamondOp, i));
                    i += 2;
                }
                Some(b'-') if bytes.get(i + 2) == Some(&b'>') => {
                    out.push((Token::Iff, i));
                    i += 3;
                }
                _ => return Err(ParseError::UnexpectedChar { ch: '<', pos: i }),
            },
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Token::Implies, i));
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar { ch: '-', pos: i });
                }
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase()
                        || bytes[i].is_ascii_digit()
                        || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Token::True,
                    "false" => Token::False,
                    _ => Token::Ident(word.to_string()),
                };
                out.push((tok, start));
            }
            other => return Err(ParseError::UnexpectedChar { ch: other, pos: i }),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    // <-> is right-associative and binds loosest
    fn parse_iff(&mut self) -> Result<Formula, ParseError> {
        let left = self.parse_implies()?;
        if let Some((Token::Iff, _)) = self.peek() {
            self.next();
            let right = self.parse_iff()?;
            return Ok(Formula::iff(left, right));
        }
        Ok(left)
    }

    fn parse_implies(&mut self) -> Result<Formula, ParseError> {
        let left = self.parse_or()?;
        if let Some((Token::Implies, _)) = self.peek() {
            self.next();
            let right = self.parse_implies()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_and()?;
        while let Some((Token::Or, _)) = self.peek() {
            self.next();
            let right = self.parse_and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.parse_unary()?;
        while let Some((Token::And, _)) = self.peek() {
            self.next();
            let right = self.parse_unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some((Token::Not, pos)) => {
                self.next();
                let inner = self.parse_unary().map_err(|e| dangling("~", pos, e))?;
                Ok(Formula::not(inner))
            }
            Some((Token::BoxOp, pos)) => {
                self.next();
                let inner = self.parse_unary().map_err(|e| dangling("[]", pos, e))?;
                Ok(Formula::boxed(inner))
            }
            Some((Token::DiamondOp, pos)) => {
                self.next();
                let inner = self.parse_unary().map_err(|e| dangling("<>", pos, e))?;
                Ok(Formula::diamond(inner))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Formula, ParseError> {
        match self.next() {
            Some((Token::True, _)) => Ok(Formula::Top),
            Some((Token::False, _)) => Ok(Formula::Bottom),
            Some((Token::Ident(name), _)) => Ok(Formula::Atom(name)),
            Some((Token::LParen, open)) => {
                let inner = self.parse_iff()?;
                match self.next() {
                    Some((Token::RParen, _)) => Ok(inner),
                    Some((tok, pos)) => Err(ParseError::TrailingInput {
                        found: tok.describe(),
                        pos,
                    }),
                    None => Err(ParseError::UnbalancedParen { open }),
                }
            }
            Some((tok, pos)) => Err(ParseError::ExpectedFormula {
                found: tok.describe(),
                pos,
            }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

// A missing operand right after a unary operator is reported as dangling.
fn dangling(op: &'static str, pos: usize, inner: ParseError) -> ParseError {
    match inner {
        ParseError::UnexpectedEnd => ParseError::DanglingUnary { op, pos },
        other => other,
    }
}

fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let formula = parser.parse_iff()?;
    match parser.next() {
        None => Ok(formula),
        Some((tok, pos)) => Err(ParseError::TrailingInput {
            found: tok.describe(),
            pos,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    #[test]
    fn parse_single_connective() {
        assert_eq!(p("[]q"), Formula::boxed(Formula::atom("q")));
    }

    #[test]
    fn parse_delta_one() {
        // q & <>(~q & <>[]q)
        let expected = Formula::and(
            Formula::atom("q"),
            Formula::diamond(Formula::and(
                Formula::not(Formula::atom("q")),
                Formula::diamond(Formula::boxed(Formula::atom("q"))),
            )),
        );
        assert_eq!(p("q & <>(~q & <>[]q)"), expected);
    }

    #[test]
    fn implies_is_right_associative() {
        let expected = Formula::implies(
            Formula::atom("p1"),
            Formula::implies(Formula::atom("p2"), Formula::atom("p3")),
        );
        assert_eq!(p("p1 -> p2 -> p3"), expected);
    }

    #[test]
    fn and_or_are_left_associative() {
        assert_eq!(p("a & b & c"), p("(a & b) & c"));
        assert_eq!(p("a | b | c"), p("(a | b) | c"));
        assert_eq!(p("a <-> b <-> c"), p("a <-> (b <-> c)"));
    }

    #[test]
    fn print_box_bottom() {
        assert_eq!(Formula::boxed(Formula::Bottom).to_string(), "[]false");
    }

    #[test]
    fn print_omits_redundant_parens() {
        let f = Formula::and(
            Formula::atom("q"),
            Formula::diamond(Formula::not(Formula::atom("q"))),
        );
        assert_eq!(f.to_string(), "q & <>~q");
    }

    #[test]
    fn print_respects_precedence() {
        let f = Formula::implies(
            Formula::and(Formula::atom("p"), Formula::atom("q")),
            Formula::atom("p"),
        );
        assert_eq!(f.to_string(), "p & q -> p");
    }

    #[test]
    fn print_parenthesizes_left_implication() {
        let f = Formula::implies(
            Formula::implies(Formula::atom("p"), Formula::atom("q")),
            Formula::atom("r"),
        );
        assert_eq!(f.to_string(), "(p -> q) -> r");
        assert_eq!(p(&f.to_string()), f);
    }

    #[test]
    fn substitute_tautology_instance() {
        let f = p("p -> p");
        let mut s = Substitution::new();
        s.bind("p", p("[]false"));
        assert_eq!(f.substitute(&s), p("[]false -> []false"));
    }

    #[test]
    fn substitute_leaves_other_atoms() {
        let mut s = Substitution::new();
        s.bind("p", Formula::Top);
        assert_eq!(Formula::atom("r").substitute(&s), Formula::atom("r"));
    }

    #[test]
    fn substitute_is_simultaneous() {
        // p ↦ q, q ↦ p swaps; the introduced atoms are not rewritten again.
        let mut s = Substitution::new();
        s.bind("p", Formula::atom("q"));
        s.bind("q", Formula::atom("p"));
        assert_eq!(p("p & q").substitute(&s), p("q & p"));
    }

    #[test]
    fn compose_matches_sequential_application() {
        let f = p("p & (q -> r)");
        let mut s = Substitution::new();
        s.bind("p", p("q | r"));
        let mut t = Substitution::new();
        t.bind("q", p("false"));
        t.bind("p", p("true"));
        assert_eq!(f.substitute(&s).substitute(&t), f.substitute(&s.compose(&t)));
    }

    #[test]
    fn metrics_box_bottom() {
        let m = Formula::boxed(Formula::Bottom).metrics();
        assert_eq!(m.size, 2);
        assert_eq!(m.modal_depth, 1);
        assert!(m.atoms.is_empty());
    }

    #[test]
    fn box_plus_unfolds_once() {
        assert_eq!(Formula::Top.box_plus(), p("true & []true"));
        assert_eq!(p("<>true").box_plus(), p("<>true & []<>true"));
    }

    #[test]
    fn lexical_error_reports_position() {
        match Formula::parse("p & Q") {
            Err(ParseError::UnexpectedChar { ch: 'Q', pos: 4 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren_reported() {
        match Formula::parse("(p & q") {
            Err(ParseError::UnbalancedParen { open: 0 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn dangling_unary_reported() {
        match Formula::parse("p & ~") {
            Err(ParseError::DanglingUnary { op: "~", pos: 4 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        match Formula::parse("<>") {
            Err(ParseError::DanglingUnary { op: "<>", pos: 0 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn keywords_are_not_atoms() {
        assert!(!is_valid_atom_name("true"));
        assert!(!is_valid_atom_name("False"));
        assert!(is_valid_atom_name("truthy"));
        assert!(is_valid_atom_name("p_1"));
        assert_eq!(p("true"), Formula::Top);
    }
}
