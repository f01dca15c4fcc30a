//! Triangular-table morphological and phonological co-analysis.
//!
//! Lattice candidates are enrolled as singleton analyses in cell
//! `(start, end)`; longer cells are then filled bottom-up by joining an
//! analysis of `(i, k)` with one of `(k+1, j)` whenever the morpheme at the
//! seam passes both connectivity matrices.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::decoder::{self, CandidateLattice, DecodeError, MorphemeCandidate, ObservationSeq, PruneConfig, Search};
use crate::lexicon::{EntryId, Grammar, Lexicon};
use crate::trie_hmm::{HmmParams, TrieHmmIndex};

pub const DEFAULT_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyzeError {
    #[error("no morpheme candidate anywhere in the eonjeol")]
    NoAnalysis,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Adjacent morphemes covering one table cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub morphemes: Vec<MorphemeCandidate>,
    pub log_score: f64,
    rendering: String,
}

impl Analysis {
    pub fn singleton(c: MorphemeCandidate, lexicon: &Lexicon, grammar: &Grammar) -> Self {
        Self::from_members(vec![c], lexicon, grammar)
    }

    fn from_members(morphemes: Vec<MorphemeCandidate>, lexicon: &Lexicon, grammar: &Grammar) -> Self {
        let log_score = morphemes.iter().fold(0.0, |acc, m| acc + m.log_score);
        let rendering = render_members(&morphemes, lexicon, grammar);
        Self { morphemes, log_score, rendering }
    }

    pub fn start(&self) -> usize {
        self.morphemes[0].start
    }

    pub fn end(&self) -> usize {
        self.morphemes[self.morphemes.len() - 1].end
    }

    /// Orthographic forms joined by `+`, with a space at word breaks.
    pub fn rendering(&self) -> &str {
        &self.rendering
    }

    pub fn first(&self) -> &MorphemeCandidate {
        &self.morphemes[0]
    }

    pub fn last(&self) -> &MorphemeCandidate {
        &self.morphemes[self.morphemes.len() - 1]
    }

    /// `(entry, start, end)` per member.
    pub fn identity(&self) -> Vec<(u32, usize, usize)> {
        self.identity_iter().collect()
    }

    fn identity_iter(&self) -> impl Iterator<Item = (u32, usize, usize)> + '_ {
        self.morphemes.iter().map(|m| (m.entry.0, m.start, m.end))
    }

    fn join(&self, right: &Analysis, lexicon: &Lexicon, grammar: &Grammar) -> Analysis {
        let mut members = self.morphemes.clone();
        members.extend_from_slice(&right.morphemes);
        Self::from_members(members, lexicon, grammar)
    }
}

fn separator(left: EntryId, right: EntryId, lexicon: &Lexicon, grammar: &Grammar) -> char {
    if grammar.tags.is_word_break(lexicon.get(left).right_pos, lexicon.get(right).left_pos) {
        ' '
    } else {
        '+'
    }
}

/// Orthographic forms of `entries` joined by `+`, or by a space where the
/// tag set allows a word break.
pub fn render_chain(entries: &[EntryId], lexicon: &Lexicon, grammar: &Grammar) -> String {
    let mut out = String::new();
    for (k, &e) in entries.iter().enumerate() {
        if k > 0 {
            out.push(separator(entries[k - 1], e, lexicon, grammar));
        }
        out.push_str(&lexicon.get(e).orthographic);
    }
    out
}

fn render_members(members: &[MorphemeCandidate], lexicon: &Lexicon, grammar: &Grammar) -> String {
    let entries: Vec<EntryId> = members.iter().map(|m| m.entry).collect();
    render_chain(&entries, lexicon, grammar)
}

/// Ranking: higher score, then fewer morphemes, then rendering, then spans.
pub fn rank_order(a: &Analysis, b: &Analysis) -> Ordering {
    b.log_score
        .partial_cmp(&a.log_score)
        .unwrap_or(Ordering::Equal)
        .then(a.morphemes.len().cmp(&b.morphemes.len()))
        .then_with(|| a.rendering.cmp(&b.rendering))
        .then_with(|| a.identity_iter().cmp(b.identity_iter()))
}

#[derive(Clone, Debug)]
pub struct TriangularTable {
    n: usize,
    cells: Vec<Vec<Analysis>>,
}

impl TriangularTable {
    pub fn new(n: usize) -> Self {
        Self { n, cells: vec![Vec::new(); n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(Vec::is_empty)
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        assert!(1 <= i && i <= j && j <= self.n, "cell ({i},{j}) outside a table of {}", self.n);
        (i - 1) * self.n + (j - 1)
    }

    /// Analyses of cell `(i, j)` in rank order.
    pub fn cell(&self, i: usize, j: usize) -> &[Analysis] {
        &self.cells[self.slot(i, j)]
    }

    /// Every analysis in every cell.
    pub fn iter(&self) -> impl Iterator<Item = &Analysis> {
        self.cells.iter().flatten()
    }

    fn set_cell(&mut self, i: usize, j: usize, mut items: Vec<Analysis>, cap: Option<usize>) {
        // identity is the last sort key, so duplicates end up adjacent
        items.sort_by(rank_order);
        items.dedup_by(|a, b| a.identity_iter().eq(b.identity_iter()));
        if let Some(cap) = cap {
            items.truncate(cap);
        }
        let s = self.slot(i, j);
        self.cells[s] = items;
    }
}

/// Each candidate becomes a singleton analysis in its own cell.
pub fn enroll(lattice: &CandidateLattice, lexicon: &Lexicon, grammar: &Grammar) -> TriangularTable {
    let mut table = TriangularTable::new(lattice.length);
    for c in lattice.iter() {
        let s = table.slot(c.start, c.end);
        table.cells[s].push(Analysis::singleton(*c, lexicon, grammar));
    }
    for i in 1..=table.n {
        for j in i..=table.n {
            let s = table.slot(i, j);
            let items = std::mem::take(&mut table.cells[s]);
            table.set_cell(i, j, items, None);
        }
    }
    table
}

/// Fills every cell bottom-up by span length. `cap` bounds each cell to its
/// best analyses; `None` keeps everything.
pub fn combine(mut table: TriangularTable, lexicon: &Lexicon, grammar: &Grammar, cap: Option<usize>) -> TriangularTable {
    let n = table.n;
    for len in 1..=n {
        for i in 1..=n + 1 - len {
            let j = i + len - 1;
            let s = table.slot(i, j);
            let existing = std::mem::take(&mut table.cells[s]);
            let mut keys: Vec<JoinKey> =
                existing.iter().enumerate().map(|(x, a)| JoinKey { score: a.log_score, size: a.morphemes.len(), source: Source::Existing(x) }).collect();
            for k in i..j {
                let (left, right) = (table.cell(i, k), table.cell(k + 1, j));
                for (ia, a) in left.iter().enumerate() {
                    let la = lexicon.get(a.last().entry);
                    for (ib, b) in right.iter().enumerate() {
                        if grammar.connects(la, lexicon.get(b.first().entry)) {
                            // same left fold as `from_members`
                            let score = b.morphemes.iter().fold(a.log_score, |acc, m| acc + m.log_score);
                            let size = a.morphemes.len() + b.morphemes.len();
                            keys.push(JoinKey { score, size, source: Source::Join(k, ia, ib) });
                        }
                    }
                }
            }
            keys.sort_by(|x, y| y.score.partial_cmp(&x.score).unwrap_or(Ordering::Equal).then(x.size.cmp(&y.size)));
            let keep = match cap {
                Some(cap) => survivors(&keys, cap, |key| table.members(i, j, key, &existing)),
                None => keys.len(),
            };
            let items: Vec<Analysis> = keys[..keep]
                .iter()
                .map(|key| match key.source {
                    Source::Existing(x) => existing[x].clone(),
                    Source::Join(k, ia, ib) => table.cell(i, k)[ia].join(&table.cell(k + 1, j)[ib], lexicon, grammar),
                })
                .collect();
            table.set_cell(i, j, items, cap);
        }
    }
    table
}

#[derive(Clone, Copy)]
enum Source {
    Existing(usize),
    Join(usize, usize, usize),
}

/// Ranking keys of a prospective analysis, before it is built.
#[derive(Clone, Copy)]
struct JoinKey {
    score: f64,
    size: usize,
    source: Source,
}

/// Length of the prefix of `keys` (sorted by score, then size) that holds
/// every analysis able to reach the first `cap` distinct ones: the prefix
/// up to the `cap`-th distinct identity, extended over its ties.
fn survivors(keys: &[JoinKey], cap: usize, identity: impl Fn(&JoinKey) -> Vec<(u32, usize, usize)>) -> usize {
    let mut seen = HashSet::new();
    let mut end = 0;
    while end < keys.len() && seen.len() < cap {
        seen.insert(identity(&keys[end]));
        end += 1;
    }
    if end == 0 {
        return 0;
    }
    let last = keys[end - 1];
    while end < keys.len() && keys[end].score == last.score && keys[end].size == last.size {
        end += 1;
    }
    end
}

impl TriangularTable {
    fn members(&self, i: usize, j: usize, key: &JoinKey, existing: &[Analysis]) -> Vec<(u32, usize, usize)> {
        match key.source {
            Source::Existing(x) => existing[x].identity(),
            Source::Join(k, ia, ib) => {
                let mut id = self.cell(i, k)[ia].identity();
                id.extend(self.cell(k + 1, j)[ib].identity());
                id
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzerConfig {
    pub params: HmmParams,
    pub prune: PruneConfig,
    pub search: Search,
    pub cap: Option<usize>,
    pub top_k: Option<usize>,
}

impl AnalyzerConfig {
    pub fn new(params: HmmParams) -> Self {
        Self { params, prune: PruneConfig::default(), search: Search::Viterbi, cap: Some(DEFAULT_CAP), top_k: None }
    }
}

/// A piece of a ranked result: a covering analysis or an uncovered gap.
#[derive(Clone, Debug, PartialEq)]
pub enum Piece {
    Covered(Analysis),
    Gap { start: usize, end: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EojeolOutput {
    pub rank: usize,
    pub rendering: String,
    pub log_score: f64,
    pub span: (usize, usize),
    /// Whether a single analysis covers the whole eonjeol.
    pub complete: bool,
    pub pieces: Vec<Piece>,
}

impl EojeolOutput {
    fn full(rank: usize, a: Analysis) -> Self {
        Self {
            rank,
            rendering: a.rendering.clone(),
            log_score: a.log_score,
            span: (a.start(), a.end()),
            complete: true,
            pieces: vec![Piece::Covered(a)],
        }
    }

    pub fn morphemes(&self) -> impl Iterator<Item = &MorphemeCandidate> {
        self.pieces.iter().flat_map(|p| match p {
            Piece::Covered(a) => a.morphemes.as_slice(),
            Piece::Gap { .. } => &[],
        })
    }

    pub fn gap_count(&self) -> usize {
        self.pieces.iter().filter(|p| matches!(p, Piece::Gap { .. })).count()
    }

    /// `rank<TAB>rendering<TAB>log_score`; verbose appends one field per
    /// morpheme, `orthographic/surface@start-end:LEFT_POS-RIGHT_POS`.
    pub fn format_line(&self, lexicon: &Lexicon, grammar: &Grammar, verbose: bool) -> String {
        let mut line = format!("{}\t{}\t{:.6}", self.rank, self.rendering, self.log_score);
        if verbose {
            for m in self.morphemes() {
                let e = lexicon.get(m.entry);
                let _ = write!(
                    line,
                    "\t{}/{}@{}-{}:{}-{}",
                    e.orthographic,
                    e.surface_header,
                    m.start,
                    m.end,
                    grammar.tags.name(e.left_pos),
                    grammar.tags.name(e.right_pos)
                );
            }
        }
        line
    }
}

/// Output line for an eonjeol without any candidate.
pub const NO_ANALYSIS_LINE: &str = "0\t?\t-inf";

/// Ranked analyses from the full-span cell, or the best partial cover when
/// that cell is empty.
pub fn analyze_table(table: &TriangularTable, lexicon: &Lexicon, grammar: &Grammar, top_k: Option<usize>) -> Result<Vec<EojeolOutput>, AnalyzeError> {
    let n = table.len();
    if n == 0 || table.is_empty() {
        return Err(AnalyzeError::NoAnalysis);
    }
    let full = table.cell(1, n);
    if !full.is_empty() {
        let k = top_k.unwrap_or(usize::MAX);
        return Ok(full.iter().take(k).enumerate().map(|(r, a)| EojeolOutput::full(r + 1, a.clone())).collect());
    }
    Ok(vec![best_cover(table, lexicon, grammar)])
}

/// Non-overlapping cell analyses minimising uncovered positions, then
/// maximising total score. Seams between pieces are not checked.
fn best_cover(table: &TriangularTable, lexicon: &Lexicon, grammar: &Grammar) -> EojeolOutput {
    #[derive(Clone, Copy)]
    enum Step {
        Gap,
        Cell(usize),
    }
    let n = table.len();
    // best[p]: (gaps, score, step) for the prefix ending at position p
    let mut best: Vec<(usize, f64, Step)> = vec![(0, 0.0, Step::Gap); n + 1];
    for p in 1..=n {
        let mut cur = (best[p - 1].0 + 1, best[p - 1].1, Step::Gap);
        for i in 1..=p {
            if let Some(a) = table.cell(i, p).first() {
                let (g, s) = (best[i - 1].0, best[i - 1].1 + a.log_score);
                if g < cur.0 || (g == cur.0 && s > cur.1) {
                    cur = (g, s, Step::Cell(i));
                }
            }
        }
        best[p] = cur;
    }
    let mut pieces = Vec::new();
    let mut p = n;
    while p > 0 {
        match best[p].2 {
            Step::Gap => {
                match pieces.last_mut() {
                    Some(Piece::Gap { start, .. }) => *start = p,
                    _ => pieces.push(Piece::Gap { start: p, end: p }),
                }
                p -= 1;
            }
            Step::Cell(i) => {
                pieces.push(Piece::Covered(table.cell(i, p)[0].clone()));
                p = i - 1;
            }
        }
    }
    pieces.reverse();
    let members: Vec<&MorphemeCandidate> = pieces
        .iter()
        .flat_map(|pc| match pc {
            Piece::Covered(a) => a.morphemes.iter().collect::<Vec<_>>(),
            Piece::Gap { .. } => Vec::new(),
        })
        .collect();
    let log_score = members.iter().fold(0.0, |acc, m| acc + m.log_score);
    EojeolOutput { rank: 1, rendering: render_pieces(&pieces, lexicon, grammar), log_score, span: (1, n), complete: false, pieces }
}

fn render_pieces(pieces: &[Piece], lexicon: &Lexicon, grammar: &Grammar) -> String {
    let mut out = String::new();
    let mut prev: Option<&MorphemeCandidate> = None;
    for (k, piece) in pieces.iter().enumerate() {
        match piece {
            Piece::Gap { .. } => {
                if k > 0 {
                    out.push('+');
                }
                out.push('?');
                prev = None;
            }
            Piece::Covered(a) => {
                if k > 0 {
                    out.push(match prev {
                        Some(l) => separator(l.entry, a.first().entry, lexicon, grammar),
                        None => '+',
                    });
                }
                out.push_str(a.rendering());
                prev = Some(a.last());
            }
        }
    }
    out
}

/// Decode, enroll, combine and rank.
pub fn analyze(
    obs: &ObservationSeq,
    index: &TrieHmmIndex,
    lexicon: &Lexicon,
    grammar: &Grammar,
    cfg: &AnalyzerConfig,
) -> Result<Vec<EojeolOutput>, AnalyzeError> {
    let lattice = decoder::decode_with(cfg.search, obs, index, &cfg.params, &cfg.prune)?;
    analyze_lattice(&lattice, lexicon, grammar, cfg.cap, cfg.top_k)
}

pub fn analyze_lattice(
    lattice: &CandidateLattice,
    lexicon: &Lexicon,
    grammar: &Grammar,
    cap: Option<usize>,
    top_k: Option<usize>,
) -> Result<Vec<EojeolOutput>, AnalyzeError> {
    let table = combine(enroll(lattice, lexicon, grammar), lexicon, grammar, cap);
    analyze_table(&table, lexicon, grammar, top_k)
}
