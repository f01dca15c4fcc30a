//! Gold eonjeol corpora: file format, the bundled corpus, and the random
//! walk over the connectivity matrices that produced it.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analyzer::render_chain;
use crate::lexicon::{EntryId, HeaderUnit, TagId, UpmEntry};
use crate::model::Model;
use crate::phonology::Phonology;
use crate::simulator::{GoldRecord, SimError};

pub const BUNDLED_CORPUS: &str = include_str!("../assets/corpus.tsv");
/// Eonjeols of the bundled corpus whose clean stream has a competing
/// analysis scoring at least as well as the gold one.
pub const BUNDLED_AMBIGUOUS: &str = include_str!("../assets/ambiguous.txt");
pub const CORPUS_SEED: u64 = 1993;
pub const CORPUS_SIZE: usize = 240;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("gold line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// One `eonjeol_text<TAB>gold_rendering` record.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoldLine {
    pub text: String,
    pub rendering: String,
}

pub fn parse_gold(text: &str) -> Result<Vec<GoldLine>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(CorpusError::Parse { line: i + 1, message: format!("expected 2 fields, found {}", fields.len()) });
        }
        let (t, r) = (fields[0].trim(), fields[1].trim());
        if t.is_empty() || r.is_empty() {
            return Err(CorpusError::Parse { line: i + 1, message: "empty field".into() });
        }
        out.push(GoldLine { text: t.to_string(), rendering: r.to_string() });
    }
    Ok(out)
}

pub fn gold_to_tsv(lines: &[GoldLine]) -> String {
    let mut out = String::from("# eonjeol_text<TAB>gold_rendering\n");
    for l in lines {
        out.push_str(&l.text);
        out.push('\t');
        out.push_str(&l.rendering);
        out.push('\n');
    }
    out
}

pub fn to_records(lines: &[GoldLine], phonology: &Phonology) -> Result<Vec<GoldRecord>, CorpusError> {
    lines.iter().map(|l| GoldRecord::new(&l.text, &l.rendering, phonology).map_err(CorpusError::from)).collect()
}

pub fn bundled_gold() -> Vec<GoldLine> {
    parse_gold(BUNDLED_CORPUS).expect("bundled corpus is valid")
}

/// Eonjeol texts listed one per line, optionally followed by tab-separated
/// notes; `#` starts a comment line.
pub fn parse_manifest(text: &str) -> BTreeSet<String> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split('\t').next())
        .map(|t| t.trim().to_string())
        .collect()
}

pub fn bundled_ambiguous() -> BTreeSet<String> {
    parse_manifest(BUNDLED_AMBIGUOUS)
}

/// Orthographic morphemes of a rendering; gap markers are dropped.
pub fn morpheme_tokens(rendering: &str) -> Vec<&str> {
    rendering.split([' ', '+']).filter(|t| !t.is_empty() && *t != "?").collect()
}

fn is_vowel_less(e: &UpmEntry) -> bool {
    matches!(e.diphone_header.first(), Some(HeaderUnit::CodaAttach(_)))
}

/// Random morpheme chains licensed by both matrices, spelled out as Yale
/// eonjeol text. Where an altered boundary variant (`sswu` for `swu`) is
/// explicitly licensed after the previous morpheme it is preferred over the
/// plain one; vowel-less morphemes become the coda of an open final syllable.
pub fn generate(model: &Model, count: usize, seed: u64) -> Vec<GoldLine> {
    let lex = &model.lexicon;
    let g = &model.grammar;
    let mut groups: BTreeMap<(&str, TagId, TagId), Vec<EntryId>> = BTreeMap::new();
    for (id, e) in lex.iter() {
        groups.entry((e.orthographic.as_str(), e.left_pos, e.right_pos)).or_default().push(id);
    }
    let groups: Vec<Vec<EntryId>> = groups.into_values().collect();

    let open_final = |text: &str| -> bool {
        let last = text.rsplit('-').next().unwrap_or("");
        !last.is_empty()
            && model.phonology.tokenize_yale(last).map(|s| s.last().map_or(false, |x| x.coda.is_none())).unwrap_or(false)
    };
    let pick = |prev: Option<EntryId>, grp: &[EntryId], text: &str| -> Option<EntryId> {
        let Some(prev) = prev else {
            return grp.iter().copied().find(|&v| {
                let e = lex.get(v);
                e.left_phon.is_unchanged() && !is_vowel_less(e) && g.tags.get(e.left_pos).word_initial
            });
        };
        let pe = lex.get(prev);
        let usable = |v: EntryId| {
            let e = lex.get(v);
            g.connects(pe, e) && (!is_vowel_less(e) || open_final(text))
        };
        grp.iter()
            .copied()
            .find(|&v| !lex.get(v).left_phon.is_unchanged() && usable(v) && g.phon.explicitly_allowed(&pe.right_phon, &lex.get(v).left_phon))
            .or_else(|| grp.iter().copied().find(|&v| lex.get(v).left_phon.is_unchanged() && usable(v)))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count.saturating_mul(1000) {
        attempts += 1;
        let target = rng.gen_range(1..=4usize);
        let mut chain: Vec<EntryId> = Vec::new();
        let mut text = String::new();
        loop {
            let options: Vec<EntryId> = groups.iter().filter_map(|grp| pick(chain.last().copied(), grp, &text)).collect();
            if options.is_empty() {
                break;
            }
            let e = options[rng.gen_range(0..options.len())];
            let entry = lex.get(e);
            if !text.is_empty() && !is_vowel_less(entry) {
                text.push('-');
            }
            text.push_str(&entry.surface_header);
            chain.push(e);
            let fin = g.tags.get(entry.right_pos).word_final;
            if (chain.len() >= target && fin) || chain.len() >= target + 3 {
                break;
            }
        }
        let Some(&last) = chain.last() else { continue };
        if !g.tags.get(lex.get(last).right_pos).word_final || model.phonology.transcribe(&text).is_err() {
            continue;
        }
        if seen.insert(text.clone()) {
            out.push(GoldLine { rendering: render_chain(&chain, lex, g), text });
        }
    }
    out
}
