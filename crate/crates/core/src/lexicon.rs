//! The unified phonetic-morpheme (UPM) lexicon and the two connectivity
//! matrices consulted at morpheme junctions.
//!
//! Every phonetic surface form of a morpheme is its own entry: conjugated and
//! phonologically changed variants are data, not rules. An entry carries
//! morphotactic tags and phonemic classes for both of its edges.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::phonology::{DiphoneId, PhonemeTable, Phonology, PhonologyError, Slot};

pub const BUNDLED_TAGS: &str = include_str!("../assets/tags.tsv");
pub const BUNDLED_LEXICON: &str = include_str!("../assets/lexicon.tsv");
pub const BUNDLED_MORPH_MATRIX: &str = include_str!("../assets/morph.tsv");
pub const BUNDLED_PHON_MATRIX: &str = include_str!("../assets/phon.tsv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LexiconError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse { source_name: &'static str, line: usize, column: usize, message: String },
    #[error("entry {entry}: {invariant}")]
    Validation { entry: String, invariant: String },
    #[error("entry {entry}: {source}")]
    Phonology { entry: String, source: PhonologyError },
}

fn parse_err(source_name: &'static str, line: usize, column: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse { source_name, line, column, message: message.into() }
}

/// Records of a tab-separated text source: (1-based line number, fields).
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').collect()))
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(pub u16);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosTag {
    pub name: String,
    pub parent: Option<TagId>,
    /// May open an eojeol.
    pub word_initial: bool,
    /// May close an eojeol.
    pub word_final: bool,
}

/// Hierarchical part-of-speech tags. Word-boundary flags are inherited from
/// ancestors.
#[derive(Clone, Debug)]
pub struct TagSet {
    tags: Vec<PosTag>,
    by_name: HashMap<String, TagId>,
    ancestors: Vec<Vec<TagId>>,
}

impl TagSet {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TAGS).expect("bundled tag set is valid")
    }

    /// Parses `tag<TAB>parent?<TAB>flags?` lines; flags is a comma list of
    /// `initial` and `final`.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        const SRC: &str = "tags";
        let mut raw: Vec<(usize, String, Option<String>, bool, bool)> = Vec::new();
        let mut by_name = HashMap::new();
        for (line, fields) in records(text) {
            if fields.len() > 3 {
                return Err(parse_err(SRC, line, 4, "too many fields"));
            }
            let name = fields[0].trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(parse_err(SRC, line, 1, format!("invalid tag name {name:?}")));
            }
            let parent = fields.get(1).map(|s| s.trim()).filter(|s| !s.is_empty()).map(String::from);
            let (mut initial, mut fin) = (false, false);
            if let Some(flags) = fields.get(2) {
                for flag in flags.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                    match flag {
                        "initial" => initial = true,
                        "final" => fin = true,
                        other => return Err(parse_err(SRC, line, 3, format!("unknown flag {other:?}"))),
                    }
                }
            }
            if by_name.insert(name.to_string(), TagId(raw.len() as u16)).is_some() {
                return Err(parse_err(SRC, line, 1, format!("duplicate tag {name:?}")));
            }
            raw.push((line, name.to_string(), parent, initial, fin));
        }
        let mut tags = Vec::with_capacity(raw.len());
        for (line, name, parent, word_initial, word_final) in raw {
            let parent = match parent {
                None => None,
                Some(p) => Some(
                    *by_name.get(&p).ok_or_else(|| parse_err(SRC, line, 2, format!("unknown parent tag {p:?}")))?,
                ),
            };
            tags.push(PosTag { name, parent, word_initial, word_final });
        }
        let mut ancestors = Vec::with_capacity(tags.len());
        for (i, tag) in tags.iter().enumerate() {
            let mut chain = vec![TagId(i as u16)];
            let mut cur = tag.parent;
            while let Some(p) = cur {
                if chain.contains(&p) {
                    return Err(LexiconError::Validation {
                        entry: tag.name.clone(),
                        invariant: "tag parent links form a cycle".into(),
                    });
                }
                chain.push(p);
                cur = tags[p.0 as usize].parent;
            }
            ancestors.push(chain);
        }
        let mut set = Self { tags, by_name, ancestors };
        for i in 0..set.tags.len() {
            let (initial, fin) = set.ancestors[i]
                .iter()
                .fold((false, false), |(a, b), t| (a || set.tags[t.0 as usize].word_initial, b || set.tags[t.0 as usize].word_final));
            set.tags[i].word_initial = initial;
            set.tags[i].word_final = fin;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<TagId> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, id: TagId) -> &PosTag {
        &self.tags[id.0 as usize]
    }

    pub fn name(&self, id: TagId) -> &str {
        &self.get(id).name
    }

    /// `id` followed by its ancestors, nearest first.
    pub fn ancestors(&self, id: TagId) -> &[TagId] {
        &self.ancestors[id.0 as usize]
    }

    /// Whether an eojeol boundary falls between two adjacent morphemes.
    pub fn is_word_break(&self, left_right_pos: TagId, right_left_pos: TagId) -> bool {
        self.get(left_right_pos).word_final && self.get(right_left_pos).word_initial
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhonChange {
    None,
    Altered(String),
}

/// Phonemic connectivity class of a morpheme edge: the underlying phoneme and
/// whether it surfaces changed. Rendered `p:none` or `p>q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhonClass {
    pub phoneme: String,
    pub change: PhonChange,
}

impl PhonClass {
    pub fn unchanged(phoneme: &str) -> Self {
        Self { phoneme: phoneme.to_string(), change: PhonChange::None }
    }

    pub fn is_unchanged(&self) -> bool {
        self.change == PhonChange::None
    }

    /// The phoneme actually pronounced at the edge.
    pub fn surface_phoneme(&self) -> &str {
        match &self.change {
            PhonChange::None => &self.phoneme,
            PhonChange::Altered(target) => target,
        }
    }

    fn validate(&self, phonemes: &PhonemeTable) -> Result<(), String> {
        if phonemes.get(&self.phoneme).is_none() {
            return Err(format!("unknown phoneme {:?}", self.phoneme));
        }
        if let PhonChange::Altered(t) = &self.change {
            if phonemes.get(t).is_none() {
                return Err(format!("unknown target phoneme {t:?}"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PhonClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.change {
            PhonChange::None => write!(f, "{}:none", self.phoneme),
            PhonChange::Altered(t) => write!(f, "{}>{}", self.phoneme, t),
        }
    }
}

impl FromStr for PhonClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(p) = s.strip_suffix(":none") {
            if !p.is_empty() {
                return Ok(Self::unchanged(p));
            }
        } else if let Some((p, t)) = s.split_once('>') {
            if !p.is_empty() && !t.is_empty() {
                return Ok(Self { phoneme: p.to_string(), change: PhonChange::Altered(t.to_string()) });
            }
        }
        Err(format!("malformed phonemic class {s:?} (expected p:none or p>q)"))
    }
}

/// One element of a compiled diphone header.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HeaderUnit {
    Diphone(DiphoneId),
    /// A vowel-less morpheme (the adnominal `l`) attaches as the coda of the
    /// preceding syllable; it matches any observation whose diphone carries
    /// that consonant in syllable-final position.
    CodaAttach(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntryId(pub u32);

impl EntryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpmEntry {
    pub surface_header: String,
    pub orthographic: String,
    pub left_pos: TagId,
    pub right_pos: TagId,
    pub left_phon: PhonClass,
    pub right_phon: PhonClass,
    pub idiom: bool,
    pub diphone_header: Vec<HeaderUnit>,
}

impl UpmEntry {
    fn label(&self) -> String {
        format!("{}/{}", self.surface_header, self.orthographic)
    }
}

/// Lexicon entries in canonical `(surface, orthographic)` order; an
/// [`EntryId`] is a position in that order.
#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: Vec<UpmEntry>,
    compiled: bool,
}

impl Lexicon {
    /// Loads and compiles the bundled lexicon.
    pub fn bundled(tags: &TagSet, phonology: &Phonology) -> Self {
        Self::load(BUNDLED_LEXICON, tags, phonology).expect("bundled lexicon is valid")
    }

    /// `parse` followed by `compile_headers`.
    pub fn load(text: &str, tags: &TagSet, phonology: &Phonology) -> Result<Self, LexiconError> {
        let mut lex = Self::parse(text, tags, phonology)?;
        lex.compile_headers(phonology)?;
        Ok(lex)
    }

    /// Parses and validates lexicon records without compiling headers.
    pub fn parse(text: &str, tags: &TagSet, phonology: &Phonology) -> Result<Self, LexiconError> {
        const SRC: &str = "lexicon";
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (line, fields) in records(text) {
            if !(6..=7).contains(&fields.len()) {
                return Err(parse_err(SRC, line, fields.len().min(7), format!("expected 6 or 7 fields, found {}", fields.len())));
            }
            let tag = |col: usize| {
                tags.id(fields[col]).ok_or_else(|| parse_err(SRC, line, col + 1, format!("unknown tag {:?}", fields[col])))
            };
            let phon = |col: usize| fields[col].parse::<PhonClass>().map_err(|m| parse_err(SRC, line, col + 1, m));
            let idiom = match fields.get(6) {
                None => false,
                Some(&"IDIOM") => true,
                Some(other) => return Err(parse_err(SRC, line, 7, format!("expected IDIOM, found {other:?}"))),
            };
            let entry = UpmEntry {
                surface_header: fields[0].to_string(),
                orthographic: fields[1].to_string(),
                left_pos: tag(2)?,
                right_pos: tag(3)?,
                left_phon: phon(4)?,
                right_phon: phon(5)?,
                idiom,
                diphone_header: Vec::new(),
            };
            if entry.orthographic.is_empty() || entry.orthographic.contains(['+', ' ', '?']) {
                return Err(parse_err(SRC, line, 2, format!("invalid orthographic form {:?}", entry.orthographic)));
            }
            validate_entry(&entry, phonology)?;
            if !seen.insert((entry.surface_header.clone(), entry.orthographic.clone())) {
                return Err(LexiconError::Validation {
                    entry: entry.label(),
                    invariant: "duplicate (surface, orthographic) pair".into(),
                });
            }
            entries.push(entry);
        }
        entries.sort_by(|a, b| (&a.surface_header, &a.orthographic).cmp(&(&b.surface_header, &b.orthographic)));
        Ok(Self { entries, compiled: false })
    }

    /// Fills every entry's diphone header from its surface transcription.
    pub fn compile_headers(&mut self, phonology: &Phonology) -> Result<(), LexiconError> {
        for entry in &mut self.entries {
            entry.diphone_header = compile_header(&entry.surface_header, phonology)
                .map_err(|source| LexiconError::Phonology { entry: entry.label(), source })?;
        }
        self.compiled = true;
        Ok(())
    }

    pub fn is_compiled(&self) -> bool {
        self.compiled
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: EntryId) -> &UpmEntry {
        &self.entries[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (EntryId, &UpmEntry)> {
        self.entries.iter().enumerate().map(|(i, e)| (EntryId(i as u32), e))
    }

    pub fn find(&self, surface: &str, orthographic: &str) -> Option<EntryId> {
        self.iter().find(|(_, e)| e.surface_header == surface && e.orthographic == orthographic).map(|(id, _)| id)
    }

    /// Canonical text form, loadable by [`Lexicon::parse`].
    pub fn to_tsv(&self, tags: &TagSet) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.surface_header,
                e.orthographic,
                tags.name(e.left_pos),
                tags.name(e.right_pos),
                e.left_phon,
                e.right_phon
            ));
            if e.idiom {
                out.push_str("\tIDIOM");
            }
            out.push('\n');
        }
        out
    }
}

/// A surface header made of a single consonant is vowel-less.
fn vowel_less_consonant<'a>(surface: &'a str, phonology: &Phonology) -> Option<&'a str> {
    match phonology.phonemes.get(surface) {
        Some(p) if !p.is_vowel() => Some(surface),
        _ => None,
    }
}

fn validate_entry(entry: &UpmEntry, phonology: &Phonology) -> Result<(), LexiconError> {
    let invalid = |invariant: String| LexiconError::Validation { entry: entry.label(), invariant };
    if !entry.idiom && entry.left_pos != entry.right_pos {
        return Err(invalid("left and right tags differ on a non-idiom entry".into()));
    }
    entry.left_phon.validate(&phonology.phonemes).map_err(&invalid)?;
    entry.right_phon.validate(&phonology.phonemes).map_err(&invalid)?;
    let (first, last) = match vowel_less_consonant(&entry.surface_header, phonology) {
        Some(c) => (c.to_string(), c.to_string()),
        None => {
            let syllables = phonology
                .tokenize_yale(&entry.surface_header)
                .map_err(|source| LexiconError::Phonology { entry: entry.label(), source })?;
            let first = syllables.first().and_then(|s| s.phonemes().next()).map(|p| p.symbol.clone());
            let last = syllables.last().and_then(|s| s.phonemes().last()).map(|p| p.symbol.clone());
            (first.unwrap_or_default(), last.unwrap_or_default())
        }
    };
    if entry.left_phon.surface_phoneme() != first {
        return Err(invalid(format!("left class {} does not match first phoneme {first:?}", entry.left_phon)));
    }
    if entry.right_phon.surface_phoneme() != last {
        return Err(invalid(format!("right class {} does not match last phoneme {last:?}", entry.right_phon)));
    }
    Ok(())
}

fn compile_header(surface: &str, phonology: &Phonology) -> Result<Vec<HeaderUnit>, PhonologyError> {
    if let Some(c) = vowel_less_consonant(surface, phonology) {
        return if phonology.phonemes.allows(c, Slot::Coda) {
            Ok(vec![HeaderUnit::CodaAttach(c.to_string())])
        } else {
            Err(PhonologyError::MalformedSyllable { segment: surface.to_string(), reason: "vowel-less morpheme is not a coda consonant" })
        };
    }
    Ok(phonology.transcribe(surface)?.into_iter().map(HeaderUnit::Diphone).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Allow,
    Deny,
}

impl Verdict {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "allow" => Some(Verdict::Allow),
            "deny" => Some(Verdict::Deny),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Allow => "allow",
            Verdict::Deny => "deny",
        }
    }
}

/// Legal morpheme combinations keyed by POS tags.
///
/// Lookup generalizes both tags along the hierarchy and takes the first
/// explicit record, ordered by total generalization distance; on equal
/// distance the right tag is kept more specific. No record means deny.
#[derive(Clone, Debug)]
pub struct MorphConnMatrix {
    records: BTreeMap<(TagId, TagId), Verdict>,
    n: usize,
    table: Vec<bool>,
}

impl MorphConnMatrix {
    pub fn bundled(tags: &TagSet) -> Self {
        Self::parse(BUNDLED_MORPH_MATRIX, tags).expect("bundled morpheme matrix is valid")
    }

    pub fn parse(text: &str, tags: &TagSet) -> Result<Self, LexiconError> {
        const SRC: &str = "morpheme matrix";
        let mut recs = BTreeMap::new();
        for (line, fields) in records(text) {
            if fields.len() != 3 {
                return Err(parse_err(SRC, line, fields.len().min(4), "expected left<TAB>right<TAB>allow|deny"));
            }
            let tag = |col: usize| {
                tags.id(fields[col]).ok_or_else(|| parse_err(SRC, line, col + 1, format!("unknown tag {:?}", fields[col])))
            };
            let key = (tag(0)?, tag(1)?);
            let verdict = Verdict::parse(fields[2]).ok_or_else(|| parse_err(SRC, line, 3, "expected allow or deny"))?;
            if recs.insert(key, verdict).is_some() {
                return Err(parse_err(SRC, line, 1, "duplicate record for this tag pair"));
            }
        }
        Ok(Self::from_records(recs, tags))
    }

    fn from_records(records: BTreeMap<(TagId, TagId), Verdict>, tags: &TagSet) -> Self {
        let n = tags.len();
        let mut table = vec![false; n * n];
        for l in 0..n {
            for r in 0..n {
                let (la, ra) = (tags.ancestors(TagId(l as u16)), tags.ancestors(TagId(r as u16)));
                let mut pairs: Vec<(usize, usize)> =
                    (0..la.len()).flat_map(|i| (0..ra.len()).map(move |j| (i, j))).collect();
                pairs.sort_by_key(|&(i, j)| (i + j, j));
                table[l * n + r] = pairs
                    .into_iter()
                    .find_map(|(i, j)| records.get(&(la[i], ra[j])))
                    .is_some_and(|v| *v == Verdict::Allow);
            }
        }
        Self { records, n, table }
    }

    pub fn allowed(&self, left_right_pos: TagId, right_left_pos: TagId) -> bool {
        self.table[left_right_pos.0 as usize * self.n + right_left_pos.0 as usize]
    }

    pub fn to_tsv(&self, tags: &TagSet) -> String {
        self.records
            .iter()
            .map(|((l, r), v)| format!("{}\t{}\t{}\n", tags.name(*l), tags.name(*r), v.as_str()))
            .collect()
    }
}

/// Legal sound combinations at morpheme junctions. An explicit record wins;
/// otherwise a junction where neither side changes is legal and anything else
/// is not.
#[derive(Clone, Debug)]
pub struct PhonConnMatrix {
    // left morpheme's right class -> right morpheme's left class -> verdict
    records: BTreeMap<PhonClass, BTreeMap<PhonClass, Verdict>>,
}

impl PhonConnMatrix {
    pub fn bundled(phonemes: &PhonemeTable) -> Self {
        Self::parse(BUNDLED_PHON_MATRIX, phonemes).expect("bundled phoneme matrix is valid")
    }

    pub fn parse(text: &str, phonemes: &PhonemeTable) -> Result<Self, LexiconError> {
        const SRC: &str = "phoneme matrix";
        let mut recs: BTreeMap<PhonClass, BTreeMap<PhonClass, Verdict>> = BTreeMap::new();
        for (line, fields) in records(text) {
            if fields.len() != 3 {
                return Err(parse_err(SRC, line, fields.len().min(4), "expected left<TAB>right<TAB>allow|deny"));
            }
            let class = |col: usize| -> Result<PhonClass, LexiconError> {
                let c = fields[col].parse::<PhonClass>().map_err(|m| parse_err(SRC, line, col + 1, m))?;
                c.validate(phonemes).map_err(|m| parse_err(SRC, line, col + 1, m))?;
                Ok(c)
            };
            let (left, right) = (class(0)?, class(1)?);
            let verdict = Verdict::parse(fields[2]).ok_or_else(|| parse_err(SRC, line, 3, "expected allow or deny"))?;
            if recs.entry(left).or_default().insert(right, verdict).is_some() {
                return Err(parse_err(SRC, line, 1, "duplicate record for this class pair"));
            }
        }
        Ok(Self { records: recs })
    }

    fn verdict(&self, left_right_phon: &PhonClass, right_left_phon: &PhonClass) -> Option<Verdict> {
        self.records.get(left_right_phon).and_then(|row| row.get(right_left_phon)).copied()
    }

    pub fn allowed(&self, left_right_phon: &PhonClass, right_left_phon: &PhonClass) -> bool {
        match self.verdict(left_right_phon, right_left_phon) {
            Some(v) => v == Verdict::Allow,
            None => left_right_phon.is_unchanged() && right_left_phon.is_unchanged(),
        }
    }

    /// Whether `(left, right)` is licensed by an explicit allow record, as
    /// opposed to the unchanged-junction default.
    pub fn explicitly_allowed(&self, left_right_phon: &PhonClass, right_left_phon: &PhonClass) -> bool {
        self.verdict(left_right_phon, right_left_phon) == Some(Verdict::Allow)
    }

    fn pairs(&self) -> impl Iterator<Item = (&PhonClass, &PhonClass, Verdict)> {
        self.records.iter().flat_map(|(l, row)| row.iter().map(move |(r, v)| (l, r, *v)))
    }

    /// Classes named by matrix records but carried by no lexicon entry.
    pub fn undeclared_classes(&self, lexicon: &Lexicon) -> Vec<PhonClass> {
        let declared: HashSet<&PhonClass> =
            lexicon.iter().flat_map(|(_, e)| [&e.left_phon, &e.right_phon]).collect();
        let mut out: Vec<PhonClass> = self
            .pairs()
            .flat_map(|(l, r, _)| [l, r])
            .filter(|c| !declared.contains(c))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn to_tsv(&self) -> String {
        self.pairs().map(|(l, r, v)| format!("{l}\t{r}\t{}\n", v.as_str())).collect()
    }
}

/// Tag set plus both connectivity matrices.
#[derive(Clone, Debug)]
pub struct Grammar {
    pub tags: TagSet,
    pub morph: MorphConnMatrix,
    pub phon: PhonConnMatrix,
}

impl Grammar {
    pub fn bundled(phonemes: &PhonemeTable) -> Self {
        let tags = TagSet::bundled();
        let morph = MorphConnMatrix::bundled(&tags);
        Self { tags, morph, phon: PhonConnMatrix::bundled(phonemes) }
    }

    /// Both connectivity checks at a single junction.
    pub fn connects(&self, left: &UpmEntry, right: &UpmEntry) -> bool {
        morph_connect_allowed(left, right, &self.morph) && phon_connect_allowed(left, right, &self.phon)
    }
}

pub fn morph_connect_allowed(left: &UpmEntry, right: &UpmEntry, m: &MorphConnMatrix) -> bool {
    m.allowed(left.right_pos, right.left_pos)
}

pub fn phon_connect_allowed(left: &UpmEntry, right: &UpmEntry, p: &PhonConnMatrix) -> bool {
    p.allowed(&left.right_phon, &right.left_phon)
}
