//! Everything needed to decode and analyze, loaded together.

use crate::lexicon::{
    Grammar, Lexicon, MorphConnMatrix, PhonConnMatrix, TagSet, BUNDLED_LEXICON, BUNDLED_MORPH_MATRIX,
    BUNDLED_PHON_MATRIX, BUNDLED_TAGS,
};
use crate::phonology::{Phonology, BUNDLED_INVENTORY};
use crate::trie_hmm::{HmmParams, TrieHmmIndex};
use crate::Error;

/// Text of every model resource.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSources {
    pub inventory: String,
    pub tags: String,
    pub morph: String,
    pub phon: String,
    pub lexicon: String,
}

impl ModelSources {
    pub fn bundled() -> Self {
        Self {
            inventory: BUNDLED_INVENTORY.into(),
            tags: BUNDLED_TAGS.into(),
            morph: BUNDLED_MORPH_MATRIX.into(),
            phon: BUNDLED_PHON_MATRIX.into(),
            lexicon: BUNDLED_LEXICON.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub phonology: Phonology,
    pub grammar: Grammar,
    pub lexicon: Lexicon,
    pub index: TrieHmmIndex,
}

impl Model {
    pub fn bundled() -> Self {
        Self::from_sources(&ModelSources::bundled()).expect("bundled model is valid")
    }

    pub fn from_sources(src: &ModelSources) -> Result<Self, Error> {
        let phonology = Phonology::with_inventory(&src.inventory)?;
        let tags = TagSet::parse(&src.tags)?;
        let morph = MorphConnMatrix::parse(&src.morph, &tags)?;
        let phon = PhonConnMatrix::parse(&src.phon, &phonology.phonemes)?;
        let lexicon = Lexicon::load(&src.lexicon, &tags, &phonology)?;
        let index = TrieHmmIndex::build(&lexicon, &phonology.inventory)?;
        Ok(Self { phonology, grammar: Grammar { tags, morph, phon }, lexicon, index })
    }

    /// Default parameters for this inventory.
    pub fn default_params(&self) -> HmmParams {
        HmmParams::with_inventory_size(self.phonology.inventory.len())
    }

    /// Summary lines for `compile`.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let counts = self.phonology.inventory.counts();
        out.push(format!(
            "inventory: {} diphones (V {}, C1V {}, VC2 {}, C2C1 {})",
            counts.total(),
            counts.v,
            counts.c1v,
            counts.vc2,
            counts.c2c1
        ));
        out.push(format!("lexicon: {} entries", self.lexicon.len()));
        out.push(format!("index: {} states, {} terminals", self.index.len(), self.index.terminal_count()));
        for class in self.grammar.phon.undeclared_classes(&self.lexicon) {
            out.push(format!("note: phoneme matrix names class {class}, which no lexicon entry carries"));
        }
        out
    }
}
