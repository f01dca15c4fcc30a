//! Trie-structured diphone HMM index over compiled lexicon headers.
//!
//! Every header becomes a left-to-right HMM with self-loops; headers share
//! prefixes in a trie rooted at a start state. Junction states (one per
//! `C2C1` diphone) hang off the root and feed morphemes whose first consonant
//! matches the junction's second consonant, so a morpheme can absorb the
//! co-articulation diphone at its left edge.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lexicon::{EntryId, HeaderUnit, Lexicon};
use crate::phonology::{DiphoneId, DiphoneInventory, DiphoneKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("lexicon headers are not compiled")]
    NotCompiled,
    #[error("entry {0} has an empty diphone header")]
    EmptyHeader(String),
    #[error("invalid HMM parameters: {0}")]
    Params(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StateLabel {
    Root,
    Unit(HeaderUnit),
    Junction(DiphoneId),
}

#[derive(Clone, Debug)]
pub struct TrieState {
    pub id: StateId,
    pub label: StateLabel,
    pub children: Vec<StateId>,
    pub terminals: Vec<EntryId>,
    pub junction: bool,
}

/// Self-transition probability, match-emission probability and inventory size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HmmParams {
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    /// Spread the mismatch mass over the `M - 1` other symbols so that the
    /// emission distribution sums to one.
    pub normalize_emissions: bool,
}

impl HmmParams {
    pub const DEFAULT_ALPHA: f64 = 0.8;
    pub const DEFAULT_BETA: f64 = 0.9;

    pub fn new(alpha: f64, beta: f64, m: usize) -> Result<Self, IndexError> {
        let p = Self { alpha, beta, m, normalize_emissions: false };
        p.validate()?;
        Ok(p)
    }

    pub fn with_inventory_size(m: usize) -> Self {
        Self { alpha: Self::DEFAULT_ALPHA, beta: Self::DEFAULT_BETA, m, normalize_emissions: false }
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(IndexError::Params(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(IndexError::Params(format!("beta must lie in (0,1), got {}", self.beta)));
        }
        if self.m == 0 {
            return Err(IndexError::Params("inventory size must be at least 1".into()));
        }
        Ok(())
    }

    /// Probability of emitting one particular non-matching symbol.
    pub fn mismatch_prob(&self) -> f64 {
        if self.normalize_emissions && self.m > 1 {
            (1.0 - self.beta) / (self.m - 1) as f64
        } else {
            (1.0 - self.beta) / self.m as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrieHmmIndex {
    states: Vec<TrieState>,
    // Syllable-final consonant carried by each inventory diphone.
    coda_of: Vec<Option<String>>,
    entry_count: usize,
}

impl TrieHmmIndex {
    pub const ROOT: StateId = StateId(0);

    pub fn build(lexicon: &Lexicon, inventory: &DiphoneInventory) -> Result<Self, IndexError> {
        if !lexicon.is_compiled() {
            return Err(IndexError::NotCompiled);
        }
        let mut index = Self {
            states: vec![TrieState {
                id: Self::ROOT,
                label: StateLabel::Root,
                children: Vec::new(),
                terminals: Vec::new(),
                junction: false,
            }],
            coda_of: inventory.iter().map(|(_, d)| d.coda().map(String::from)).collect(),
            entry_count: lexicon.len(),
        };
        for (id, entry) in lexicon.iter() {
            if entry.diphone_header.is_empty() {
                return Err(IndexError::EmptyHeader(entry.orthographic.clone()));
            }
            let mut cur = Self::ROOT;
            for unit in &entry.diphone_header {
                let label = StateLabel::Unit(unit.clone());
                cur = match index.child_with(cur, &label) {
                    Some(s) => s,
                    None => index.add_child(cur, label, false),
                };
            }
            index.states[cur.index()].terminals.push(id);
        }
        for (_, entry) in lexicon.iter() {
            let HeaderUnit::Diphone(first) = &entry.diphone_header[0] else { continue };
            let first_diphone = inventory.get(*first);
            if first_diphone.kind != DiphoneKind::C1V {
                continue;
            }
            let onset = first_diphone.onset();
            let first_state = index.child_with(Self::ROOT, &StateLabel::Unit(HeaderUnit::Diphone(*first))).expect("first state exists");
            for (jid, jd) in inventory.iter() {
                if jd.kind != DiphoneKind::C2C1 || jd.onset() != onset {
                    continue;
                }
                let label = StateLabel::Junction(jid);
                let junction = match index.child_with(Self::ROOT, &label) {
                    Some(s) => s,
                    None => index.add_child(Self::ROOT, label, true),
                };
                let kids = &mut index.states[junction.index()].children;
                if !kids.contains(&first_state) {
                    kids.push(first_state);
                }
            }
        }
        Ok(index)
    }

    fn child_with(&self, parent: StateId, label: &StateLabel) -> Option<StateId> {
        self.states[parent.index()].children.iter().copied().find(|c| &self.states[c.index()].label == label)
    }

    fn add_child(&mut self, parent: StateId, label: StateLabel, junction: bool) -> StateId {
        let id = StateId(self.states.len() as u32);
        self.states.push(TrieState { id, label, children: Vec::new(), terminals: Vec::new(), junction });
        self.states[parent.index()].children.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: StateId) -> &TrieState {
        &self.states[id.index()]
    }

    pub fn states(&self) -> &[TrieState] {
        &self.states
    }

    pub fn root(&self) -> &TrieState {
        &self.states[0]
    }

    pub fn inventory_size(&self) -> usize {
        self.coda_of.len()
    }

    pub fn entry_count(&self) -> usize {
        self.entry_count
    }

    pub fn terminal_count(&self) -> usize {
        self.states.iter().map(|s| s.terminals.len()).sum()
    }

    /// `α` for a self-loop, `(1-α)/N` to each of the `N` children, else 0.
    pub fn transition_prob(&self, i: StateId, j: StateId, p: &HmmParams) -> f64 {
        if i == j {
            return p.alpha;
        }
        let children = &self.states[i.index()].children;
        if children.contains(&j) {
            (1.0 - p.alpha) / children.len() as f64
        } else {
            0.0
        }
    }

    /// Whether `state` emits `observed` with the match probability.
    pub fn matches(&self, state: StateId, observed: DiphoneId) -> bool {
        match &self.states[state.index()].label {
            StateLabel::Root => false,
            StateLabel::Unit(HeaderUnit::Diphone(d)) | StateLabel::Junction(d) => *d == observed,
            StateLabel::Unit(HeaderUnit::CodaAttach(c)) => {
                self.coda_of.get(observed.index()).and_then(|x| x.as_deref()) == Some(c.as_str())
            }
        }
    }

    /// `β` when the observation matches the state label, `(1-β)/M` otherwise.
    pub fn emission_prob(&self, state: StateId, observed: DiphoneId, p: &HmmParams) -> f64 {
        if self.matches(state, observed) {
            p.beta
        } else {
            p.mismatch_prob()
        }
    }

    /// Graphviz rendering; junction states are drawn with a bold outline.
    pub fn to_dot(&self, lexicon: &Lexicon, inventory: &DiphoneInventory) -> String {
        let mut out = String::from("digraph trie {\n  rankdir=LR;\n");
        for s in &self.states {
            let label = match &s.label {
                StateLabel::Root => "start".to_string(),
                StateLabel::Unit(HeaderUnit::Diphone(d)) | StateLabel::Junction(d) => inventory.get(*d).symbol.clone(),
                StateLabel::Unit(HeaderUnit::CodaAttach(c)) => format!("_{c}"),
            };
            let terms: Vec<&str> = s.terminals.iter().map(|e| lexicon.get(*e).orthographic.as_str()).collect();
            let full = if terms.is_empty() { label } else { format!("{label}\\n[{}]", terms.join(",")) };
            let style = if s.junction { ", penwidth=3" } else { "" };
            let _ = writeln!(out, "  s{} [label=\"{}\"{}];", s.id.0, full, style);
            for c in &s.children {
                let _ = writeln!(out, "  s{} -> s{};", s.id.0, c.0);
            }
        }
        out.push_str("}\n");
        out
    }
}
