//! Phonemes, syllables and diphones over Yale romanization.
//!
//! The phoneme table and the diphone inventory are plain text assets so that
//! another agglutinative language can be dropped in without code changes.
//! Utterances are written with `-` between syllables (`ci-wul-sswu`).

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Bundled Korean phoneme table (46 positional phonemes).
pub const BUNDLED_PHONEMES: &str = include_str!("../assets/phonemes.tsv");

/// Bundled Korean diphone inventory (618 diphones).
pub const BUNDLED_INVENTORY: &str = include_str!("../assets/inventory.tsv");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhonologyError {
    #[error("unknown symbol at byte {offset} of {input:?}")]
    UnknownSymbol { input: String, offset: usize },
    #[error("malformed syllable {segment:?}: {reason}")]
    MalformedSyllable { segment: String, reason: &'static str },
    #[error("diphone {0:?} is not in the inventory")]
    InventoryMiss(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PhonemeClass {
    Vowel,
    Consonant,
}

/// Position a phoneme may take inside a syllable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Nucleus,
    Onset,
    Coda,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phoneme {
    pub symbol: String,
    pub klass: PhonemeClass,
    /// Nasals and liquids. Vowels always carry `false`.
    pub sonorant: bool,
}

impl Phoneme {
    pub fn is_vowel(&self) -> bool {
        self.klass == PhonemeClass::Vowel
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)
    }
}

/// The closed phoneme table: one record per (symbol, slot).
#[derive(Clone, Debug)]
pub struct PhonemeTable {
    records: Vec<(Phoneme, Slot)>,
    by_symbol: HashMap<String, usize>,
    // Distinct symbols, longest first, for longest-match tokenization.
    match_order: Vec<String>,
}

impl PhonemeTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_PHONEMES).expect("bundled phoneme table is valid")
    }

    /// Parses `symbol<TAB>slot<TAB>sonorant` records, `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self, PhonologyError> {
        let mut records: Vec<(Phoneme, Slot)> = Vec::new();
        let mut by_symbol = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| PhonologyError::Parse { line: lineno + 1, message };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let symbol = fields[0];
            if symbol.is_empty() || symbol.contains('-') || symbol.contains(char::is_whitespace) {
                return Err(err(format!("invalid phoneme symbol {symbol:?}")));
            }
            let slot = match fields[1] {
                "vowel" => Slot::Nucleus,
                "onset" => Slot::Onset,
                "coda" => Slot::Coda,
                other => return Err(err(format!("unknown slot {other:?}"))),
            };
            let sonorant = match fields[2] {
                "yes" => true,
                "no" => false,
                other => return Err(err(format!("sonorant flag must be yes/no, got {other:?}"))),
            };
            let klass = if slot == Slot::Nucleus { PhonemeClass::Vowel } else { PhonemeClass::Consonant };
            if klass == PhonemeClass::Vowel && sonorant {
                return Err(err(format!("vowel {symbol:?} cannot carry the sonorant flag")));
            }
            let phoneme = Phoneme { symbol: symbol.to_string(), klass, sonorant };
            if let Some(&first) = by_symbol.get(symbol) {
                let (prev, _): &(Phoneme, Slot) = &records[first];
                if prev.klass != klass || prev.sonorant != sonorant {
                    return Err(err(format!("conflicting records for {symbol:?}")));
                }
                if records.iter().any(|(p, s)| p.symbol == symbol && *s == slot) {
                    return Err(err(format!("duplicate record for {symbol:?}")));
                }
            } else {
                by_symbol.insert(symbol.to_string(), records.len());
            }
            records.push((phoneme, slot));
        }
        let mut match_order: Vec<String> = by_symbol.keys().cloned().collect();
        match_order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(Self { records, by_symbol, match_order })
    }

    /// Number of positional phoneme records.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, symbol: &str) -> Option<&Phoneme> {
        self.by_symbol.get(symbol).map(|&i| &self.records[i].0)
    }

    pub fn allows(&self, symbol: &str, slot: Slot) -> bool {
        self.records.iter().any(|(p, s)| p.symbol == symbol && *s == slot)
    }

    pub fn records(&self) -> impl Iterator<Item = (&Phoneme, Slot)> {
        self.records.iter().map(|(p, s)| (p, *s))
    }

    /// Longest-match split of one syllable segment into phonemes.
    pub fn tokenize_segment(&self, segment: &str) -> Result<Vec<Phoneme>, PhonologyError> {
        let mut out = Vec::new();
        let mut offset = 0;
        while offset < segment.len() {
            let rest = &segment[offset..];
            let symbol = self
                .match_order
                .iter()
                .find(|s| rest.starts_with(s.as_str()))
                .ok_or_else(|| PhonologyError::UnknownSymbol { input: segment.to_string(), offset })?;
            out.push(self.get(symbol).expect("symbol comes from the table").clone());
            offset += symbol.len();
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syllable {
    pub onset: Option<Phoneme>,
    pub nucleus: Phoneme,
    pub coda: Option<Phoneme>,
}

impl Syllable {
    pub fn phonemes(&self) -> impl Iterator<Item = &Phoneme> {
        self.onset.iter().chain(std::iter::once(&self.nucleus)).chain(self.coda.iter())
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.phonemes() {
            f.write_str(&p.symbol)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum DiphoneKind {
    V,
    C1V,
    VC2,
    C2C1,
}

impl DiphoneKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "V" => DiphoneKind::V,
            "C1V" => DiphoneKind::C1V,
            "VC2" => DiphoneKind::VC2,
            "C2C1" => DiphoneKind::C2C1,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiphoneKind::V => "V",
            DiphoneKind::C1V => "C1V",
            DiphoneKind::VC2 => "VC2",
            DiphoneKind::C2C1 => "C2C1",
        }
    }
}

/// Index of a diphone inside its [`DiphoneInventory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DiphoneId(pub u16);

impl DiphoneId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A typed sub-word observation symbol. A lone vowel (`V`) keeps its vowel in
/// `left` and has no `right` phoneme.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diphone {
    pub kind: DiphoneKind,
    pub left: Option<String>,
    pub right: Option<String>,
    pub symbol: String,
}

impl Diphone {
    /// The vowel carried by this diphone; `None` for consonant pairs.
    pub fn vowel(&self) -> Option<&str> {
        match self.kind {
            DiphoneKind::V | DiphoneKind::VC2 => self.left.as_deref(),
            DiphoneKind::C1V => self.right.as_deref(),
            DiphoneKind::C2C1 => None,
        }
    }

    /// Syllable-final consonant carried by this diphone, if any.
    pub fn coda(&self) -> Option<&str> {
        match self.kind {
            DiphoneKind::VC2 => self.right.as_deref(),
            DiphoneKind::C2C1 => self.left.as_deref(),
            _ => None,
        }
    }

    /// Syllable-first consonant carried by this diphone, if any.
    pub fn onset(&self) -> Option<&str> {
        match self.kind {
            DiphoneKind::C1V => self.left.as_deref(),
            DiphoneKind::C2C1 => self.right.as_deref(),
            _ => None,
        }
    }
}

impl fmt::Display for Diphone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct KindCounts {
    pub v: usize,
    pub c1v: usize,
    pub vc2: usize,
    pub c2c1: usize,
}

impl KindCounts {
    pub fn total(&self) -> usize {
        self.v + self.c1v + self.vc2 + self.c2c1
    }
}

#[derive(Clone, Debug)]
pub struct DiphoneInventory {
    entries: Vec<Diphone>,
    by_symbol: HashMap<String, DiphoneId>,
}

impl DiphoneInventory {
    /// Parses `symbol<TAB>kind<TAB>left<TAB>right` records (`-` for an absent
    /// phoneme) and checks every record against the phoneme table.
    pub fn parse(text: &str, phonemes: &PhonemeTable) -> Result<Self, PhonologyError> {
        let mut entries = Vec::new();
        let mut by_symbol = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| PhonologyError::Parse { line: lineno + 1, message };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let symbol = fields[0];
            if symbol.contains('-') {
                return Err(err(format!("diphone symbol {symbol:?} contains '-'")));
            }
            let kind = DiphoneKind::parse(fields[1]).ok_or_else(|| err(format!("unknown kind {:?}", fields[1])))?;
            let opt = |s: &str| if s == "-" { None } else { Some(s.to_string()) };
            let (left, right) = (opt(fields[2]), opt(fields[3]));
            let slots: (Slot, Option<Slot>) = match kind {
                DiphoneKind::V => (Slot::Nucleus, None),
                DiphoneKind::C1V => (Slot::Onset, Some(Slot::Nucleus)),
                DiphoneKind::VC2 => (Slot::Nucleus, Some(Slot::Coda)),
                DiphoneKind::C2C1 => (Slot::Coda, Some(Slot::Onset)),
            };
            let l = left.as_deref().ok_or_else(|| err("missing left phoneme".into()))?;
            if !phonemes.allows(l, slots.0) {
                return Err(err(format!("{l:?} cannot fill the left slot of a {} diphone", kind.as_str())));
            }
            match (slots.1, right.as_deref()) {
                (None, None) => {}
                (Some(slot), Some(r)) if phonemes.allows(r, slot) => {}
                _ => return Err(err(format!("bad right phoneme for {} diphone {symbol:?}", kind.as_str()))),
            }
            if kind == DiphoneKind::C2C1 && !phonemes.get(l).is_some_and(|p| p.sonorant) {
                return Err(err(format!("C2C1 diphone {symbol:?} needs a sonorant first consonant")));
            }
            let rendered = format!("{}{}", l, right.as_deref().unwrap_or(""));
            if rendered != symbol {
                return Err(err(format!("symbol {symbol:?} does not spell {rendered:?}")));
            }
            if by_symbol.contains_key(symbol) {
                return Err(err(format!("duplicate diphone {symbol:?}")));
            }
            let id = DiphoneId(u16::try_from(entries.len()).map_err(|_| err("inventory too large".into()))?);
            by_symbol.insert(symbol.to_string(), id);
            entries.push(Diphone { kind, left, right, symbol: symbol.to_string() });
        }
        Ok(Self { entries, by_symbol })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: DiphoneId) -> &Diphone {
        &self.entries[id.index()]
    }

    pub fn lookup(&self, symbol: &str) -> Option<DiphoneId> {
        self.by_symbol.get(symbol).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DiphoneId, &Diphone)> {
        self.entries.iter().enumerate().map(|(i, d)| (DiphoneId(i as u16), d))
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for d in &self.entries {
            match d.kind {
                DiphoneKind::V => c.v += 1,
                DiphoneKind::C1V => c.c1v += 1,
                DiphoneKind::VC2 => c.vc2 += 1,
                DiphoneKind::C2C1 => c.c2c1 += 1,
            }
        }
        c
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# symbol\tkind\tleft\tright\n");
        for d in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                d.symbol,
                d.kind.as_str(),
                d.left.as_deref().unwrap_or("-"),
                d.right.as_deref().unwrap_or("-")
            ));
        }
        out
    }
}

/// Phoneme table plus diphone inventory: everything needed to turn Yale text
/// into reference diphone streams.
#[derive(Clone, Debug)]
pub struct Phonology {
    pub phonemes: PhonemeTable,
    pub inventory: DiphoneInventory,
}

impl Phonology {
    pub fn bundled() -> Self {
        let phonemes = PhonemeTable::bundled();
        let inventory = DiphoneInventory::parse(BUNDLED_INVENTORY, &phonemes).expect("bundled inventory is valid");
        Self { phonemes, inventory }
    }

    pub fn with_inventory(inventory_text: &str) -> Result<Self, PhonologyError> {
        let phonemes = PhonemeTable::bundled();
        let inventory = DiphoneInventory::parse(inventory_text, &phonemes)?;
        Ok(Self { phonemes, inventory })
    }

    /// Splits `-`-separated Yale text into syllables. Inside a syllable the
    /// consonant before the vowel is the onset and the one after is the coda.
    pub fn tokenize_yale(&self, input: &str) -> Result<Vec<Syllable>, PhonologyError> {
        input.split('-').map(|segment| self.syllabify(segment)).collect()
    }

    fn syllabify(&self, segment: &str) -> Result<Syllable, PhonologyError> {
        let malformed = |reason| PhonologyError::MalformedSyllable { segment: segment.to_string(), reason };
        if segment.is_empty() {
            return Err(malformed("empty syllable"));
        }
        let phonemes = self.phonemes.tokenize_segment(segment)?;
        let vowels: Vec<usize> = phonemes.iter().enumerate().filter(|(_, p)| p.is_vowel()).map(|(i, _)| i).collect();
        let nucleus_at = match vowels.as_slice() {
            [i] => *i,
            [] => return Err(malformed("no vowel")),
            _ => return Err(malformed("more than one vowel")),
        };
        if nucleus_at > 1 || phonemes.len() - nucleus_at > 2 {
            return Err(malformed("consonant cluster"));
        }
        let mut it = phonemes.into_iter();
        let onset = if nucleus_at == 1 { it.next() } else { None };
        let nucleus = it.next().expect("nucleus present");
        let coda = it.next();
        Ok(Syllable { onset, nucleus, coda })
    }

    /// Per syllable: `C1V` (or `V` without onset), then `VC2` when there is a
    /// coda, then a `C2C1` junction when that coda is sonorant and the next
    /// syllable has an onset.
    pub fn diphonize(&self, syllables: &[Syllable]) -> Result<Vec<DiphoneId>, PhonologyError> {
        let mut out = Vec::with_capacity(syllables.len() * 3);
        for (k, syl) in syllables.iter().enumerate() {
            let v = &syl.nucleus.symbol;
            match &syl.onset {
                Some(c) => out.push(self.expect(&format!("{}{}", c.symbol, v), DiphoneKind::C1V)?),
                None => out.push(self.expect(v, DiphoneKind::V)?),
            }
            if let Some(coda) = &syl.coda {
                out.push(self.expect(&format!("{}{}", v, coda.symbol), DiphoneKind::VC2)?);
                if let Some(next_onset) = syllables.get(k + 1).and_then(|s| s.onset.as_ref()) {
                    if coda.sonorant {
                        out.push(self.expect(&format!("{}{}", coda.symbol, next_onset.symbol), DiphoneKind::C2C1)?);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `diphonize(tokenize_yale(text))`.
    pub fn transcribe(&self, text: &str) -> Result<Vec<DiphoneId>, PhonologyError> {
        self.diphonize(&self.tokenize_yale(text)?)
    }

    pub fn diphone_class(&self, symbol: &str) -> Result<&Diphone, PhonologyError> {
        self.inventory
            .lookup(symbol)
            .map(|id| self.inventory.get(id))
            .ok_or_else(|| PhonologyError::InventoryMiss(symbol.to_string()))
    }

    pub fn render(&self, ids: &[DiphoneId]) -> Vec<&str> {
        ids.iter().map(|&id| self.inventory.get(id).symbol.as_str()).collect()
    }

    fn expect(&self, symbol: &str, kind: DiphoneKind) -> Result<DiphoneId, PhonologyError> {
        match self.inventory.lookup(symbol) {
            Some(id) if self.inventory.get(id).kind == kind => Ok(id),
            _ => Err(PhonologyError::InventoryMiss(symbol.to_string())),
        }
    }
}
