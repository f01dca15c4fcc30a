//! Seeded insertion/deletion/substitution channel standing in for the
//! acoustic front end, plus frame-rate repetition of spotting outputs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::ObservationSeq;
use crate::phonology::{DiphoneId, DiphoneInventory, DiphoneKind, Phonology, PhonologyError};

/// Mixed into a record seed to derive its frame-expansion seed.
pub const FRAME_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("every reference diphone was deleted")]
    EmptyResult,
    #[error("invalid noise configuration: {0}")]
    Config(String),
    #[error("invalid frame repetition range [{min}, {max}]")]
    FrameRange { min: usize, max: usize },
    #[error("gold record {text:?}: {source}")]
    Gold { text: String, source: PhonologyError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConfusionMode {
    #[default]
    Uniform,
    SameVowelGroup,
}

impl fmt::Display for ConfusionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::SameVowelGroup => "same_vowel_group",
        })
    }
}

impl FromStr for ConfusionMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "same_vowel_group" => Ok(Self::SameVowelGroup),
            other => Err(SimError::Config(format!("unknown confusion mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    pub del_rate: f64,
    pub sub_rate: f64,
    /// Expected insertions per reference diphone.
    pub ins_rate: f64,
    pub confusion: ConfusionMode,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn zero(seed: u64) -> Self {
        Self { del_rate: 0.0, sub_rate: 0.0, ins_rate: 0.0, confusion: ConfusionMode::Uniform, seed }
    }

    /// 6.4% deletions-plus-substitutions split evenly, 38.6% insertions.
    /// `sub_rate` applies to surviving symbols, so it is scaled up to give
    /// 3.2% of reference symbols overall.
    pub fn paper_fig10(seed: u64) -> Self {
        Self { del_rate: 0.032, sub_rate: 0.032 / 0.968, ins_rate: 0.386, confusion: ConfusionMode::Uniform, seed }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self, SimError> {
        match name {
            "paper-fig10" => Ok(Self::paper_fig10(seed)),
            "zero" | "none" => Ok(Self::zero(seed)),
            other => Err(SimError::Config(format!("unknown preset {other:?}"))),
        }
    }

    /// All three rates multiplied by `k`; probabilities are capped at 1.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            del_rate: (self.del_rate * k).min(1.0),
            sub_rate: (self.sub_rate * k).min(1.0),
            ins_rate: self.ins_rate * k,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [("del_rate", self.del_rate), ("sub_rate", self.sub_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::Config(format!("{name} must lie in [0,1], got {v}")));
            }
        }
        if !(self.ins_rate >= 0.0 && self.ins_rate.is_finite()) {
            return Err(SimError::Config(format!("ins_rate must be finite and non-negative, got {}", self.ins_rate)));
        }
        Ok(())
    }

    /// Configuration with the seed replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    /// `del=... sub=... ins=... mode=...` for provenance headers.
    pub fn describe(&self) -> String {
        format!("del={} sub={} ins={} mode={}", self.del_rate, self.sub_rate, self.ins_rate, self.confusion)
    }
}

/// Ground truth for one eonjeol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldRecord {
    pub eonjeol_text: String,
    pub reference: Vec<DiphoneId>,
    /// Orthographic morphemes joined by `+`, eojeols separated by spaces.
    pub gold_rendering: String,
}

impl GoldRecord {
    pub fn new(eonjeol_text: &str, gold_rendering: &str, phonology: &Phonology) -> Result<Self, SimError> {
        let reference = phonology
            .transcribe(eonjeol_text)
            .map_err(|source| SimError::Gold { text: eonjeol_text.to_string(), source })?;
        Ok(Self { eonjeol_text: eonjeol_text.to_string(), reference, gold_rendering: gold_rendering.to_string() })
    }
}

/// Channel events for one corrupted sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChannelStats {
    pub reference: usize,
    pub deleted: usize,
    pub substituted: usize,
    pub inserted: usize,
}

impl std::ops::AddAssign for ChannelStats {
    fn add_assign(&mut self, o: Self) {
        self.reference += o.reference;
        self.deleted += o.deleted;
        self.substituted += o.substituted;
        self.inserted += o.inserted;
    }
}

/// Confusion sets: diphones sharing a vowel, with all `C2C1` diphones in one
/// extra group.
#[derive(Clone, Debug)]
pub struct Confusions {
    group_of: Vec<usize>,
    members: Vec<Vec<DiphoneId>>,
}

impl Confusions {
    pub fn new(inventory: &DiphoneInventory) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mut group_of = Vec::with_capacity(inventory.len());
        let mut members: Vec<Vec<DiphoneId>> = Vec::new();
        for (id, d) in inventory.iter() {
            let key = match d.kind {
                DiphoneKind::C2C1 => "cc".to_string(),
                _ => d.vowel().expect("vowel-bearing diphone").to_string(),
            };
            let g = match names.iter().position(|n| *n == key) {
                Some(g) => g,
                None => {
                    names.push(key);
                    members.push(Vec::new());
                    names.len() - 1
                }
            };
            group_of.push(g);
            members[g].push(id);
        }
        Self { group_of, members }
    }

    pub fn group(&self, d: DiphoneId) -> &[DiphoneId] {
        &self.members[self.group_of[d.index()]]
    }

    pub fn group_count(&self) -> usize {
        self.members.len()
    }
}

/// Applies the channel to `reference`.
pub fn corrupt(reference: &[DiphoneId], inventory: &DiphoneInventory, cfg: &NoiseConfig) -> Result<ObservationSeq, SimError> {
    corrupt_traced(reference, inventory, cfg).map(|(o, _)| o)
}

/// [`corrupt`] that also reports what the channel did.
pub fn corrupt_traced(
    reference: &[DiphoneId],
    inventory: &DiphoneInventory,
    cfg: &NoiseConfig,
) -> Result<(ObservationSeq, ChannelStats), SimError> {
    cfg.validate()?;
    let m = inventory.len();
    let confusions = (cfg.confusion == ConfusionMode::SameVowelGroup).then(|| Confusions::new(inventory));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p_more = cfg.ins_rate / (1.0 + cfg.ins_rate);
    let mut out = Vec::with_capacity(reference.len() * 2);
    let mut stats = ChannelStats { reference: reference.len(), ..Default::default() };
    for &sym in reference {
        if rng.gen::<f64>() < cfg.del_rate {
            stats.deleted += 1;
        } else if rng.gen::<f64>() < cfg.sub_rate {
            let pool = confusions.as_ref().map(|c| c.group(sym)).filter(|g| g.len() > 1);
            let replacement = match pool {
                Some(g) => other_than(sym, g.len(), |k| g[k], &mut rng),
                None if m > 1 => other_than(sym, m, |k| DiphoneId(k as u16), &mut rng),
                None => sym,
            };
            out.push(replacement);
            stats.substituted += usize::from(replacement != sym);
        } else {
            out.push(sym);
        }
        // geometric count with mean ins_rate
        while cfg.ins_rate > 0.0 && rng.gen::<f64>() < p_more {
            out.push(DiphoneId(rng.gen_range(0..m) as u16));
            stats.inserted += 1;
        }
    }
    if out.is_empty() {
        return Err(SimError::EmptyResult);
    }
    let seq = ObservationSeq::new(out, format!("seed={}", cfg.seed)).map_err(|_| SimError::EmptyResult)?;
    Ok((seq, stats))
}

// Uniform over the `n` pool members other than `sym`.
fn other_than(sym: DiphoneId, n: usize, at: impl Fn(usize) -> DiphoneId, rng: &mut ChaCha8Rng) -> DiphoneId {
    loop {
        let cand = at(rng.gen_range(0..n));
        if cand != sym {
            return cand;
        }
    }
}

/// Repeats every symbol a uniform number of times in `[min_rep, max_rep]`.
pub fn frame_expand(obs: &ObservationSeq, min_rep: usize, max_rep: usize, seed: u64) -> Result<ObservationSeq, SimError> {
    if min_rep < 1 || max_rep < min_rep {
        return Err(SimError::FrameRange { min: min_rep, max: max_rep });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(obs.len() * max_rep);
    for &s in &obs.symbols {
        let r = rng.gen_range(min_rep..=max_rep);
        out.extend(std::iter::repeat(s).take(r));
    }
    Ok(ObservationSeq { symbols: out, source_tag: obs.source_tag.clone() })
}

/// Seed for record `index` of a corpus run.
pub fn record_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

pub fn frame_seed(seed: u64, index: usize) -> u64 {
    record_seed(seed, index) ^ FRAME_SEED_SALT
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(p: &Phonology, s: &str) -> Vec<DiphoneId> {
        s.split_whitespace().map(|x| p.inventory.lookup(x).unwrap()).collect()
    }

    #[test]
    fn zero_noise_is_identity() {
        let p = Phonology::bundled();
        let r = p.transcribe("ci-wul-sswu").unwrap();
        let o = corrupt(&r, &p.inventory, &NoiseConfig::zero(9)).unwrap();
        assert_eq!(o.symbols, r);
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = Phonology::bundled();
        let r = p.transcribe("hak-kyo-ey-se").unwrap();
        let cfg = NoiseConfig::paper_fig10(42).scaled(3.0);
        let a = corrupt(&r, &p.inventory, &cfg).unwrap();
        let b = corrupt(&r, &p.inventory, &cfg).unwrap();
        assert_eq!(a, b);
        let c = corrupt(&r, &p.inventory, &cfg.with_seed(43)).unwrap();
        assert_ne!(a.symbols, c.symbols);
    }

    #[test]
    fn all_deleted_is_reported() {
        let p = Phonology::bundled();
        let r = p.transcribe("ci").unwrap();
        let cfg = NoiseConfig { del_rate: 1.0, ..NoiseConfig::zero(1) };
        assert_eq!(corrupt(&r, &p.inventory, &cfg).unwrap_err(), SimError::EmptyResult);
    }

    #[test]
    fn substitutions_never_keep_the_symbol() {
        let p = Phonology::bundled();
        let r = ids(&p, "ci wu wul lss sswu");
        for mode in [ConfusionMode::Uniform, ConfusionMode::SameVowelGroup] {
            let cfg = NoiseConfig { sub_rate: 1.0, confusion: mode, ..NoiseConfig::zero(5) };
            let (o, st) = corrupt_traced(&r, &p.inventory, &cfg).unwrap();
            assert_eq!(st.substituted, r.len());
            for (a, b) in r.iter().zip(&o.symbols) {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn vowel_groups_stay_within_group() {
        let p = Phonology::bundled();
        let conf = Confusions::new(&p.inventory);
        assert_eq!(conf.group_count(), 22);
        let r = ids(&p, "ci wul lss");
        let cfg = NoiseConfig { sub_rate: 1.0, confusion: ConfusionMode::SameVowelGroup, ..NoiseConfig::zero(11) };
        for seed in 0..50 {
            let o = corrupt(&r, &p.inventory, &cfg.with_seed(seed)).unwrap();
            let inv = &p.inventory;
            assert_eq!(inv.get(o.symbols[0]).vowel(), Some("i"));
            assert_eq!(inv.get(o.symbols[1]).vowel(), Some("wu"));
            assert_eq!(inv.get(o.symbols[2]).kind, DiphoneKind::C2C1);
        }
    }

    #[test]
    fn frame_expansion_examples() {
        let p = Phonology::bundled();
        let o = ObservationSeq::new(ids(&p, "ci wu"), "t").unwrap();
        assert_eq!(frame_expand(&o, 1, 1, 3).unwrap(), o);
        assert_eq!(frame_expand(&o, 3, 3, 3).unwrap().symbols, ids(&p, "ci ci ci wu wu wu"));
        assert_eq!(frame_expand(&o, 0, 2, 3).unwrap_err(), SimError::FrameRange { min: 0, max: 2 });
        assert_eq!(frame_expand(&o, 3, 2, 3).unwrap_err(), SimError::FrameRange { min: 3, max: 2 });
    }

    #[test]
    fn config_validation() {
        assert!(NoiseConfig { del_rate: 1.5, ..NoiseConfig::zero(0) }.validate().is_err());
        assert!(NoiseConfig { ins_rate: -0.1, ..NoiseConfig::zero(0) }.validate().is_err());
        assert!(NoiseConfig { ins_rate: 2.0, ..NoiseConfig::zero(0) }.validate().is_ok());
        assert_eq!("same_vowel_group".parse::<ConfusionMode>().unwrap(), ConfusionMode::SameVowelGroup);
        assert!(NoiseConfig::preset("nope", 0).is_err());
    }

    #[test]
    fn derived_seeds() {
        assert_eq!(record_seed(0b1100, 0b1010), 0b0110);
        assert_eq!(frame_seed(5, 5), FRAME_SEED_SALT);
    }
}
