//! Finite Kripke frames and models.
//!
//! Frames are immutable after construction and precompute successor bitsets,
//! so the model checker works on whole truth sets: one `Vec<u64>` mask per
//! subformula, one bit per world. [`check_validity`] sweeps valuations over a
//! frame — exhaustively when the search space is small, by seeded random
//! sampling otherwise — and every refutation it reports is re-checked before
//! it is returned.
//!
//! The module also provides the three chain-frame builders the fragment
//! reductions are evaluated on: a reflexive descending chain with a top point
//! that sees everything, its strict (irreflexive) variant, and a bundle-of-
//! chains frame whose root edges encode a classical valuation.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::ClassicalValuation;
use crate::families::VarFreeMode;
use crate::formula::Formula;
use crate::rng::SplitMix64;

/// A finite directed graph of worlds `0..world_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeFrame {
    world_count: usize,
    succ: Vec<BTreeSet<usize>>,
    succ_mask: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("a frame needs at least one world")]
    ZeroWorlds,
    #[error("edge ({0}, {1}) points outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("designated world {0} outside 0..{1}")]
    BadDesignated(usize, usize),
    #[error("valuation covers {0} worlds, frame has {1}")]
    BadValuationLength(usize, usize),
    #[error("chain of length {chain_len} is too short: valuation declares p{max_var}, needing world {needed}")]
    TruncationTooSmall {
        chain_len: usize,
        max_var: u32,
        needed: usize,
    },
    #[error("the chain-bundle frame needs at least one variable")]
    VarCountZero,
}

fn blocks_for(world_count: usize) -> usize {
    world_count.div_ceil(64)
}

fn set_bit(mask: &mut [u64], w: usize) {
    mask[w / 64] |= 1 << (w % 64);
}

fn get_bit(mask: &[u64], w: usize) -> bool {
    mask[w / 64] >> (w % 64) & 1 == 1
}

impl KripkeFrame {
    pub fn new(
        world_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<KripkeFrame, FrameError> {
        if world_count == 0 {
            return Err(FrameError::ZeroWorlds);
        }
        let mut succ = vec![BTreeSet::new(); world_count];
        let mut succ_mask = vec![vec![0u64; blocks_for(world_count)]; world_count];
        for (from, to) in edges {
            if from >= world_count || to >= world_count {
                return Err(FrameError::EdgeOutOfRange(from, to, world_count));
            }
            succ[from].insert(to);
            set_bit(&mut succ_mask[from], to);
        }
        Ok(KripkeFrame {
            world_count,
            succ,
            succ_mask,
        })
    }

    pub fn world_count(&self) -> usize {
        self.world_count
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ.get(from).is_some_and(|s| s.contains(&to))
    }

    pub fn successors(&self, world: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[world].iter().copied()
    }

    /// All edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (from, tos) in self.succ.iter().enumerate() {
            for &to in tos {
                out.push((from, to));
            }
        }
        out
    }
}

/// First-order properties of a frame, each decided by exhaustive scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameProperties {
    pub reflexive: bool,
    pub irreflexive: bool,
    pub transitive: bool,
    pub antisymmetric: bool,
    /// Total over distinct pairs: `i R j` or `j R i` whenever `i != j`.
    pub linear: bool,
    /// No cycle through two or more distinct worlds (self-loops ignored).
    pub acyclic_over_distinct: bool,
}

/// Evaluate [`FrameProperties`] by pair/triple scans plus a cycle search.
pub fn frame_properties(frame: &KripkeFrame) -> FrameProperties {
    let n = frame.world_count;
    let r = |i: usize, j: usize| frame.has_edge(i, j);
    let mut props = FrameProperties {
        reflexive: (0..n).all(|i| r(i, i)),
        irreflexive: (0..n).all(|i| !r(i, i)),
        transitive: true,
        antisymmetric: true,
        linear: true,
        acyclic_over_distinct: true,
    };
    'outer: for i in 0..n {
        for j in 0..n {
            if !r(i, j) {
                continue;
            }
            for k in 0..n {
                if r(j, k) && !r(i, k) {
                    props.transitive = false;
                    break 'outer;
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if r(i, j) && r(j, i) {
                props.antisymmetric = false;
            }
            if !r(i, j) && !r(j, i) {
                props.linear = false;
            }
        }
    }
    // DFS over the relation with self-loops removed
    let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    fn dfs(frame: &KripkeFrame, v: usize, state: &mut [u8]) -> bool {
        state[v] = 1;
        for w in frame.successors(v) {
            if w == v {
                continue;
            }
            if state[w] == 1 || (state[w] == 0 && dfs(frame, w, state)) {
                return true;
            }
        }
        state[v] = 2;
        false
    }
    for v in 0..n {
        if state[v] == 0 && dfs(frame, v, &mut state) {
            props.acyclic_over_distinct = false;
            break;
        }
    }
    props
}

/// A frame with a per-world atom valuation and a designated world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    frame: KripkeFrame,
    valuation: Vec<BTreeSet<String>>,
    designated: usize,
}

impl KripkeModel {
    pub fn new(
        frame: KripkeFrame,
        valuation: Vec<BTreeSet<String>>,
        designated: usize,
    ) -> Result<KripkeModel, FrameError> {
        if valuation.len() != frame.world_count {
            return Err(FrameError::BadValuationLength(
                valuation.len(),
                frame.world_count,
            ));
        }
        if designated >= frame.world_count {
            return Err(FrameError::BadDesignated(designated, frame.world_count));
        }
        Ok(KripkeModel {
            frame,
            valuation,
            designated,
        })
    }

    pub fn frame(&self) -> &KripkeFrame {
        &self.frame
    }

    pub fn world_count(&self) -> usize {
        self.frame.world_count
    }

    pub fn designated(&self) -> usize {
        self.designated
    }

    pub fn atoms_at(&self, world: usize) -> &BTreeSet<String> {
        &self.valuation[world]
    }

    fn atom_mask(&self, atom: &str) -> Vec<u64> {
        let mut mask = vec![0u64; blocks_for(self.frame.world_count)];
        for (w, atoms) in self.valuation.iter().enumerate() {
            if atoms.contains(atom) {
                set_bit(&mut mask, w);
            }
        }
        mask
    }

    fn full_mask(&self) -> Vec<u64> {
        let mut mask = vec![u64::MAX; blocks_for(self.frame.world_count)];
        let spare = blocks_for(self.frame.world_count) * 64 - self.frame.world_count;
        if spare > 0 {
            *mask.last_mut().unwrap() >>= spare;
        }
        mask
    }

    fn truth_mask<'f>(
        &self,
        f: &'f Formula,
        atoms: &mut HashMap<&'f str, Vec<u64>>,
        full: &[u64],
    ) -> Vec<u64> {
        match f {
            Formula::Bottom => vec![0; full.len()],
            Formula::Top => full.to_vec(),
            Formula::Atom(a) => atoms
                .entry(a.as_str())
                .or_insert_with(|| self.atom_mask(a))
                .clone(),
            Formula::Not(x) => {
                let mut m = self.truth_mask(x, atoms, full);
                for (b, f) in m.iter_mut().zip(full) {
                    *b = !*b & *f;
                }
                m
            }
            Formula::And(a, b) => {
                let mut m = self.truth_mask(a, atoms, full);
                let r = self.truth_mask(b, atoms, full);
                for (x, y) in m.iter_mut().zip(&r) {
                    *x &= *y;
                }
                m
            }
            Formula::Or(a, b) => {
                let mut m = self.truth_mask(a, atoms, full);
                let r = self.truth_mask(b, atoms, full);
                for (x, y) in m.iter_mut().zip(&r) {
                    *x |= *y;
                }
                m
            }
            Formula::Implies(a, b) => {
                let mut m = self.truth_mask(a, atoms, full);
                let r = self.truth_mask(b, atoms, full);
                for ((x, y), f) in m.iter_mut().zip(&r).zip(full) {
                    *x = (!*x & *f) | *y;
                }
                m
            }
            Formula::Iff(a, b) => {
                let mut m = self.truth_mask(a, atoms, full);
                let r = self.truth_mask(b, atoms, full);
                for ((x, y), f) in m.iter_mut().zip(&r).zip(full) {
                    *x = !(*x ^ *y) & *f;
                }
                m
            }
            Formula::Box(x) => {
                let inner = self.truth_mask(x, atoms, full);
                let mut m = vec![0; full.len()];
                for w in 0..self.frame.world_count {
                    let sm = &self.frame.succ_mask[w];
                    if sm.iter().zip(&inner).all(|(s, i)| s & !i == 0) {
                        set_bit(&mut m, w);
                    }
                }
                m
            }
            Formula::Diamond(x) => {
                let inner = self.truth_mask(x, atoms, full);
                let mut m = vec![0; full.len()];
                for w in 0..self.frame.world_count {
                    let sm = &self.frame.succ_mask[w];
                    if sm.iter().zip(&inner).any(|(s, i)| s & i != 0) {
                        set_bit(&mut m, w);
                    }
                }
                m
            }
        }
    }

    // Allocation-free variant for models of at most 64 worlds, the common
    // case in the sweeps.
    fn truth_bits<'f>(
        &self,
        f: &'f Formula,
        atoms: &mut HashMap<&'f str, u64>,
        full: u64,
    ) -> u64 {
        match f {
            Formula::Bottom => 0,
            Formula::Top => full,
            Formula::Atom(a) => *atoms
                .entry(a.as_str())
                .or_insert_with(|| self.atom_mask(a)[0]),
            Formula::Not(x) => !self.truth_bits(x, atoms, full) & full,
            Formula::And(a, b) => {
                self.truth_bits(a, atoms, full) & self.truth_bits(b, atoms, full)
            }
            Formula::Or(a, b) => self.truth_bits(a, atoms, full) | self.truth_bits(b, atoms, full),
            Formula::Implies(a, b) => {
                (!self.truth_bits(a, atoms, full) & full) | self.truth_bits(b, atoms, full)
            }
            Formula::Iff(a, b) => {
                !(self.truth_bits(a, atoms, full) ^ self.truth_bits(b, atoms, full)) & full
            }
            Formula::Box(x) => {
                let inner = self.truth_bits(x, atoms, full);
                let mut m = 0;
                for w in 0..self.frame.world_count {
                    if self.frame.succ_mask[w][0] & !inner == 0 {
                        m |= 1 << w;
                    }
                }
                m
            }
            Formula::Diamond(x) => {
                let inner = self.truth_bits(x, atoms, full);
                let mut m = 0;
                for w in 0..self.frame.world_count {
                    if self.frame.succ_mask[w][0] & inner != 0 {
                        m |= 1 << w;
                    }
                }
                m
            }
        }
    }

    /// Truth of `f` at `world`, by bottom-up labeling.
    ///
    /// Panics if `world` is not a world of the model.
    pub fn model_check(&self, world: usize, f: &Formula) -> bool {
        assert!(
            world < self.frame.world_count,
            "unknown world {world} (model has {})",
            self.frame.world_count
        );
        if self.frame.world_count <= 64 {
            let full = self.full_mask()[0];
            let mut atoms = HashMap::new();
            return self.truth_bits(f, &mut atoms, full) >> world & 1 == 1;
        }
        let full = self.full_mask();
        let mut atoms = HashMap::new();
        let mask = self.truth_mask(f, &mut atoms, &full);
        get_bit(&mask, world)
    }

    /// All worlds where `f` holds, ascending.
    pub fn satisfying_worlds(&self, f: &Formula) -> Vec<usize> {
        if self.frame.world_count <= 64 {
            let full = self.full_mask()[0];
            let mut atoms = HashMap::new();
            let mask = self.truth_bits(f, &mut atoms, full);
            return (0..self.frame.world_count)
                .filter(|&w| mask >> w & 1 == 1)
                .collect();
        }
        let full = self.full_mask();
        let mut atoms = HashMap::new();
        let mask = self.truth_mask(f, &mut atoms, &full);
        (0..self.frame.world_count)
            .filter(|&w| get_bit(&mask, w))
            .collect()
    }

    /// Serialize to the wire format
    /// `{"worlds": n, "edges": [[i,j],…], "valuation": {atom: [worlds]}, "designated": i}`.
    pub fn to_json(&self) -> String {
        let mut valuation: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (w, atoms) in self.valuation.iter().enumerate() {
            for atom in atoms {
                valuation.entry(atom.clone()).or_default().push(w);
            }
        }
        let wire = KripkeModelWire {
            worlds: self.frame.world_count,
            edges: self.frame.edges(),
            valuation,
            designated: self.designated,
        };
        serde_json::to_string(&wire).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<KripkeModel, ModelJsonError> {
        let wire: KripkeModelWire = serde_json::from_str(text)?;
        let frame = KripkeFrame::new(wire.worlds, wire.edges)?;
        let mut valuation = vec![BTreeSet::new(); wire.worlds];
        for (atom, worlds) in wire.valuation {
            for w in worlds {
                if w >= wire.worlds {
                    return Err(FrameError::BadValuationLength(w, wire.worlds).into());
                }
                valuation[w].insert(atom.clone());
            }
        }
        Ok(KripkeModel::new(frame, valuation, wire.designated)?)
    }
}

#[derive(Serialize, Deserialize)]
struct KripkeModelWire {
    worlds: usize,
    edges: Vec<(usize, usize)>,
    valuation: BTreeMap<String, Vec<usize>>,
    designated: usize,
}

#[derive(Debug, Error)]
pub enum ModelJsonError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Outcome of a validity search on a frame.
#[derive(Clone, Debug)]
pub enum Verdict {
    /// No refutation exists (`exhaustive`) or was found in a full sweep.
    Valid { exhaustive: bool },
    /// Randomized search exhausted its budget without finding a refutation.
    NoCounterexampleFound { trials: u64 },
    /// A concrete countermodel; re-checked before being returned.
    Refuted { model: KripkeModel, world: usize },
}

impl Verdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted { .. })
    }
}

/// Budget for the randomized side of [`check_validity`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            trials: 100_000,
            seed: 0,
        }
    }
}

/// Search the valuations of `f`'s atoms over `frame` for a refuting world.
///
/// Exhaustive when `atoms × worlds ≤ 20` bits; otherwise `budget.trials`
/// seeded random valuations. The sweep is deterministic for a fixed seed.
pub fn check_validity(frame: &KripkeFrame, f: &Formula, budget: &SearchBudget) -> Verdict {
    let atoms: Vec<String> = f.metrics().atoms.into_iter().collect();
    let wc = frame.world_count();
    let bits = atoms.len() * wc;

    let refute = |valuation: Vec<BTreeSet<String>>| -> Option<(KripkeModel, usize)> {
        let model = KripkeModel::new(frame.clone(), valuation, 0).expect("valuation is total");
        let holds = model.satisfying_worlds(f);
        if holds.len() == wc {
            return None;
        }
        let world = (0..wc).find(|w| !holds.contains(w)).unwrap();
        let model = KripkeModel {
            designated: world,
            ..model
        };
        // refutations must re-check before leaving the search
        assert!(!model.model_check(world, f), "refutation failed re-check");
        Some((model, world))
    };

    if bits <= 20 {
        for assignment in 0u64..(1u64 << bits) {
            let mut valuation = vec![BTreeSet::new(); wc];
            for (i, atom) in atoms.iter().enumerate() {
                for (w, entry) in valuation.iter_mut().enumerate() {
                    if assignment >> (i * wc + w) & 1 == 1 {
                        entry.insert(atom.clone());
                    }
                }
            }
            if let Some((model, world)) = refute(valuation) {
                return Verdict::Refuted { model, world };
            }
        }
        Verdict::Valid { exhaustive: true }
    } else {
        let mut rng = SplitMix64::new(budget.seed);
        for _ in 0..budget.trials {
            let mut valuation = vec![BTreeSet::new(); wc];
            for atom in &atoms {
                for entry in valuation.iter_mut() {
                    if rng.next_u64() & 1 == 1 {
                        entry.insert(atom.clone());
                    }
                }
            }
            if let Some((model, world)) = refute(valuation) {
                return Verdict::Refuted { model, world };
            }
        }
        Verdict::NoCounterexampleFound {
            trials: budget.trials,
        }
    }
}

/// Default truncation length for the chain frames: `2·n + depth + 2`.
pub fn chain_len_for(max_var_index: u32, modal_depth: usize) -> usize {
    2 * max_var_index as usize + modal_depth + 2
}

/// Reflexive descending chain `0..chain_len` (edge `i → j` iff `i ≥ j`) plus
/// a top world that sees every world including itself.
pub fn frame_f(chain_len: usize) -> KripkeFrame {
    assert!(chain_len >= 1);
    let top = chain_len;
    let mut edges = Vec::new();
    for i in 0..chain_len {
        for j in 0..=i {
            edges.push((i, j));
        }
    }
    for x in 0..=chain_len {
        edges.push((top, x));
    }
    KripkeFrame::new(chain_len + 1, edges).expect("edges are in range")
}

/// Strict variant of [`frame_f`]: `i → j` iff `i > j` on the chain; the top
/// world sees every chain world but not itself.
pub fn frame_f_strict(chain_len: usize) -> KripkeFrame {
    assert!(chain_len >= 1);
    let top = chain_len;
    let mut edges = Vec::new();
    for i in 0..chain_len {
        for j in 0..i {
            edges.push((i, j));
        }
    }
    for x in 0..chain_len {
        edges.push((top, x));
    }
    KripkeFrame::new(chain_len + 1, edges).expect("edges are in range")
}

/// Model on [`frame_f`] encoding a classical valuation: `q` holds at even
/// chain worlds, `p` holds at world `2k` iff `v(pk) = 1`, the designated top
/// world satisfies no atoms.
pub fn model_f(chain_len: usize, v: &ClassicalValuation) -> Result<KripkeModel, FrameError> {
    if let Some(max_var) = v.max_index() {
        let needed = 2 * max_var as usize + 1;
        if chain_len < needed {
            return Err(FrameError::TruncationTooSmall {
                chain_len,
                max_var,
                needed,
            });
        }
    }
    let frame = frame_f(chain_len);
    let mut valuation = vec![BTreeSet::new(); chain_len + 1];
    for (k, entry) in valuation.iter_mut().enumerate().take(chain_len) {
        if k % 2 == 0 {
            entry.insert("q".to_string());
            if v.get((k / 2) as u32) {
                entry.insert("p".to_string());
            }
        }
    }
    KripkeModel::new(frame, valuation, chain_len)
}

/// Model on [`frame_f_strict`]: `p` holds at chain world `k` iff `v(pk) = 1`.
pub fn model_f_strict(chain_len: usize, v: &ClassicalValuation) -> Result<KripkeModel, FrameError> {
    if let Some(max_var) = v.max_index() {
        let needed = max_var as usize + 1;
        if chain_len < needed {
            return Err(FrameError::TruncationTooSmall {
                chain_len,
                max_var,
                needed,
            });
        }
    }
    let frame = frame_f_strict(chain_len);
    let mut valuation = vec![BTreeSet::new(); chain_len + 1];
    for (k, entry) in valuation.iter_mut().enumerate().take(chain_len) {
        if v.get(k as u32) {
            entry.insert("p".to_string());
        }
    }
    KripkeModel::new(frame, valuation, chain_len)
}

/// Index of chain world `w^k_m` in the bundle frame, after the root (0) and
/// the terminal world (1). Chains are laid out k = 1..=n, m = 0..=k.
pub fn vf_world(k: u32, m: u32) -> usize {
    debug_assert!(k >= 1 && m <= k);
    let k = k as usize;
    2 + (k - 1) * (k + 2) / 2 + m as usize
}

/// Bundle-of-chains model encoding a classical valuation in the root's edges.
///
/// Worlds: root `w` (index 0), terminal `w*` (index 1), and for each
/// `k = 1..=var_count` a descending chain `w^k_0 → … → w^k_k` whose head also
/// sees `w*`. In `Literal` mode the root sees every other world (the edges
/// selected by the valuation are a subset of those) and `w*` is a dead end.
/// In `Repaired` mode the root sees `w*` plus exactly the heads `w^k_0` with
/// `v(pk) = 1`, and `w*` carries a reflexive loop. The valuation is empty and
/// the designated world is the root.
pub fn model_f_vf(
    v: &ClassicalValuation,
    var_count: u32,
    mode: VarFreeMode,
) -> Result<KripkeModel, FrameError> {
    if var_count == 0 {
        return Err(FrameError::VarCountZero);
    }
    let world_count = vf_world(var_count, var_count) + 1;
    let mut edges = Vec::new();
    for k in 1..=var_count {
        for m in 0..k {
            edges.push((vf_world(k, m), vf_world(k, m + 1)));
        }
        edges.push((vf_world(k, 0), 1));
        if v.get(k) {
            edges.push((0, vf_world(k, 0)));
        }
    }
    match mode {
        VarFreeMode::Literal => {
            for x in 1..world_count {
                edges.push((0, x));
            }
        }
        VarFreeMode::Repaired => {
            edges.push((0, 1));
            edges.push((1, 1));
        }
    }
    let frame = KripkeFrame::new(world_count, edges)?;
    KripkeModel::new(frame, vec![BTreeSet::new(); world_count], 0)
}
