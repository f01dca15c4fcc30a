//! Time-synchronous Viterbi lexical decoding over the trie index.
//!
//! A search is launched from the root at every observation position. Each
//! step either stays in the current state (self-loop, absorbing inserted or
//! repeated symbols) or advances to a child; every step emits the next
//! observation. Whenever the best path into a state that completes a
//! morpheme survives pruning, every morpheme ending there is enrolled as a
//! candidate for the consumed span.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::lexicon::{EntryId, Lexicon};
use crate::phonology::{DiphoneId, DiphoneInventory};
use crate::trie_hmm::{HmmParams, TrieHmmIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("empty observation sequence")]
    EmptyObservation,
    #[error("line {line}: unknown diphone {symbol:?}")]
    UnknownDiphone { line: usize, symbol: String },
}

/// A noisy diphone stream for one eonjeol. Positions are 1-based in
/// candidates and tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationSeq {
    pub symbols: Vec<DiphoneId>,
    pub source_tag: String,
}

impl ObservationSeq {
    pub fn new(symbols: Vec<DiphoneId>, source_tag: impl Into<String>) -> Result<Self, DecodeError> {
        if symbols.is_empty() {
            return Err(DecodeError::EmptyObservation);
        }
        Ok(Self { symbols, source_tag: source_tag.into() })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Space-separated diphone symbols.
    pub fn render(&self, inventory: &DiphoneInventory) -> String {
        let syms: Vec<&str> = self.symbols.iter().map(|&d| inventory.get(d).symbol.as_str()).collect();
        syms.join(" ")
    }
}

/// Stands in for an eonjeol whose every diphone was lost, so that record
/// positions survive in observation files.
pub const EMPTY_OBSERVATION_LINE: &str = "# empty";

/// Parses an observation file: one eonjeol per line, symbols separated by
/// spaces. Blank lines and `#` lines are skipped.
pub fn parse_observations(text: &str, inventory: &DiphoneInventory) -> Result<Vec<ObservationSeq>, DecodeError> {
    Ok(parse_observation_records(text, inventory)?.into_iter().flatten().collect())
}

/// Like [`parse_observations`], but [`EMPTY_OBSERVATION_LINE`] yields `None`.
pub fn parse_observation_records(text: &str, inventory: &DiphoneInventory) -> Result<Vec<Option<ObservationSeq>>, DecodeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line == EMPTY_OBSERVATION_LINE {
            out.push(None);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let symbols = line
            .split_whitespace()
            .map(|s| inventory.lookup(s).ok_or_else(|| DecodeError::UnknownDiphone { line: i + 1, symbol: s.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(Some(ObservationSeq::new(symbols, format!("line {}", i + 1))?));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorphemeCandidate {
    pub entry: EntryId,
    pub start: usize,
    pub end: usize,
    pub log_score: f64,
    pub mismatches: u32,
}

impl MorphemeCandidate {
    pub fn span_len(&self) -> usize {
        self.end + 1 - self.start
    }
}

/// Candidates keyed by their `(start, end)` span, one per `(entry, span)`.
#[derive(Clone, Debug, Default)]
pub struct CandidateLattice {
    pub length: usize,
    by_span: BTreeMap<(usize, usize), Vec<MorphemeCandidate>>,
}

impl CandidateLattice {
    pub fn new(length: usize) -> Self {
        Self { length, by_span: BTreeMap::new() }
    }

    /// Adds a candidate; a duplicate `(entry, start, end)` keeps the better
    /// scoring copy. Returns whether the lattice changed.
    pub fn insert(&mut self, c: MorphemeCandidate) -> bool {
        assert!(1 <= c.start && c.start <= c.end && c.end <= self.length, "candidate span out of range");
        let cell = self.by_span.entry((c.start, c.end)).or_default();
        match cell.binary_search_by_key(&c.entry, |x| x.entry) {
            Ok(i) => {
                let old = &mut cell[i];
                if c.log_score > old.log_score || (c.log_score == old.log_score && c.mismatches < old.mismatches) {
                    *old = c;
                    true
                } else {
                    false
                }
            }
            Err(i) => {
                cell.insert(i, c);
                true
            }
        }
    }

    pub fn span(&self, start: usize, end: usize) -> &[MorphemeCandidate] {
        self.by_span.get(&(start, end)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All candidates ordered by `(start, end, entry)`.
    pub fn iter(&self) -> impl Iterator<Item = &MorphemeCandidate> {
        self.by_span.values().flatten()
    }

    pub fn num_candidates(&self) -> usize {
        self.by_span.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_span.is_empty()
    }

    /// `start<TAB>end<TAB>orthographic<TAB>log_score<TAB>mismatches`, sorted by
    /// start, end and orthographic form.
    pub fn dump(&self, lexicon: &Lexicon) -> String {
        let mut rows: Vec<(&MorphemeCandidate, &str, &str)> = self
            .iter()
            .map(|c| {
                let e = lexicon.get(c.entry);
                (c, e.orthographic.as_str(), e.surface_header.as_str())
            })
            .collect();
        rows.sort_by(|a, b| (a.0.start, a.0.end, a.1, a.2).cmp(&(b.0.start, b.0.end, b.1, b.2)));
        let mut out = String::new();
        for (c, orth, _) in rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{:.6}\t{}", c.start, c.end, orth, c.log_score, c.mismatches);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneConfig {
    pub enabled: bool,
    pub min_mismatch_allowance: u32,
    pub mismatch_fraction: f64,
    /// Minimum average log-score per consumed symbol; `None` leaves the
    /// mismatch budget as the only criterion.
    pub per_symbol_floor: Option<f64>,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self { enabled: true, min_mismatch_allowance: 1, mismatch_fraction: 0.34, per_symbol_floor: None }
    }
}

impl PruneConfig {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn mismatch_allowance(&self, path_len: usize) -> u32 {
        // the epsilon keeps 0.34 * 50 from rounding up to 18
        let frac = (self.mismatch_fraction * path_len as f64 - 1e-9).ceil().max(0.0) as u32;
        self.min_mismatch_allowance.max(frac)
    }
}

pub fn prune_check(path_len: usize, log_score: f64, mismatches: u32, cfg: &PruneConfig) -> bool {
    if !cfg.enabled {
        return true;
    }
    if mismatches > cfg.mismatch_allowance(path_len) {
        return false;
    }
    match cfg.per_symbol_floor {
        Some(floor) => log_score >= path_len as f64 * floor,
        None => true,
    }
}

/// Per-state log probabilities for one parameter setting.
struct LogModel {
    self_loop: f64,
    advance: Vec<f64>,
    matched: f64,
    mismatched: f64,
}

impl LogModel {
    fn new(index: &TrieHmmIndex, p: &HmmParams) -> Self {
        let advance = index
            .states()
            .iter()
            .map(|s| if s.children.is_empty() { f64::NEG_INFINITY } else { ((1.0 - p.alpha) / s.children.len() as f64).ln() })
            .collect();
        Self { self_loop: p.alpha.ln(), advance, matched: p.beta.ln(), mismatched: p.mismatch_prob().ln() }
    }
}

/// Which lexical search to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Search {
    #[default]
    Viterbi,
    /// [`decode_exact`], the baseline without error smoothing.
    Exact,
}

impl std::str::FromStr for Search {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "viterbi" => Ok(Self::Viterbi),
            "exact" => Ok(Self::Exact),
            other => Err(format!("unknown search {other:?}, expected viterbi or exact")),
        }
    }
}

impl std::fmt::Display for Search {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Viterbi => "viterbi",
            Self::Exact => "exact",
        })
    }
}

/// Runs `search`; pruning applies to the Viterbi search only.
pub fn decode_with(
    search: Search,
    obs: &ObservationSeq,
    index: &TrieHmmIndex,
    params: &HmmParams,
    prune: &PruneConfig,
) -> Result<CandidateLattice, DecodeError> {
    match search {
        Search::Viterbi => decode(obs, index, params, prune),
        Search::Exact => decode_exact(obs, index, params),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    Viterbi,
    Exact,
}

/// Spots every morpheme whose best alignment to some span passes `prune`.
pub fn decode(
    obs: &ObservationSeq,
    index: &TrieHmmIndex,
    params: &HmmParams,
    prune: &PruneConfig,
) -> Result<CandidateLattice, DecodeError> {
    run(obs, index, params, prune, Mode::Viterbi)
}

/// Baseline without error smoothing: a morpheme is spotted only where the
/// observations spell its header exactly, one symbol per state. Scores use
/// the same transition and emission model as [`decode`].
pub fn decode_exact(obs: &ObservationSeq, index: &TrieHmmIndex, params: &HmmParams) -> Result<CandidateLattice, DecodeError> {
    run(obs, index, params, &PruneConfig::disabled(), Mode::Exact)
}

fn run(
    obs: &ObservationSeq,
    index: &TrieHmmIndex,
    params: &HmmParams,
    prune: &PruneConfig,
    mode: Mode,
) -> Result<CandidateLattice, DecodeError> {
    if obs.is_empty() {
        return Err(DecodeError::EmptyObservation);
    }
    let n = obs.len();
    let model = LogModel::new(index, params);
    let states = index.states();
    let mut lattice = CandidateLattice::new(n);
    let mut score = vec![f64::NEG_INFINITY; states.len()];
    let mut mism = vec![0u32; states.len()];
    let mut next_score = score.clone();
    let mut next_mism = mism.clone();

    for s in 0..n {
        score.fill(f64::NEG_INFINITY);
        let root = TrieHmmIndex::ROOT;
        for &c in &states[root.index()].children {
            let hit = index.matches(c, obs.symbols[s]);
            if mode == Mode::Exact && !hit {
                continue;
            }
            score[c.index()] = model.advance[root.index()] + if hit { model.matched } else { model.mismatched };
            mism[c.index()] = u32::from(!hit);
        }
        enroll_terminals(index, &score, &mism, s, s, prune, &mut lattice);

        for t in s + 1..n {
            next_score.fill(f64::NEG_INFINITY);
            let o = obs.symbols[t];
            for (i, state) in states.iter().enumerate() {
                let base = score[i];
                if base == f64::NEG_INFINITY {
                    continue;
                }
                if mode == Mode::Viterbi {
                    let hit = index.matches(state.id, o);
                    let cand = base + model.self_loop + if hit { model.matched } else { model.mismatched };
                    relax(&mut next_score, &mut next_mism, i, cand, mism[i] + u32::from(!hit));
                }
                for &j in &state.children {
                    let hit = index.matches(j, o);
                    if mode == Mode::Exact && !hit {
                        continue;
                    }
                    let cand = base + model.advance[i] + if hit { model.matched } else { model.mismatched };
                    relax(&mut next_score, &mut next_mism, j.index(), cand, mism[i] + u32::from(!hit));
                }
            }
            std::mem::swap(&mut score, &mut next_score);
            std::mem::swap(&mut mism, &mut next_mism);
            if score.iter().all(|&x| x == f64::NEG_INFINITY) {
                break;
            }
            enroll_terminals(index, &score, &mism, s, t, prune, &mut lattice);
        }
    }
    Ok(lattice)
}

fn relax(score: &mut [f64], mism: &mut [u32], at: usize, cand: f64, mm: u32) {
    if cand > score[at] || (cand == score[at] && mm < mism[at]) {
        score[at] = cand;
        mism[at] = mm;
    }
}

fn enroll_terminals(
    index: &TrieHmmIndex,
    score: &[f64],
    mism: &[u32],
    s: usize,
    t: usize,
    prune: &PruneConfig,
    lattice: &mut CandidateLattice,
) {
    let path_len = t - s + 1;
    for state in index.states() {
        let i = state.id.index();
        if state.terminals.is_empty() || score[i] == f64::NEG_INFINITY {
            continue;
        }
        if !prune_check(path_len, score[i], mism[i], prune) {
            continue;
        }
        for &entry in &state.terminals {
            lattice.insert(MorphemeCandidate { entry, start: s + 1, end: t + 1, log_score: score[i], mismatches: mism[i] });
        }
    }
}
