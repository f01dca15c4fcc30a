//! Reading gold and hypothesis files for `evaluate`.
//!
//! Diphone files are observation files or gold corpora (whose eonjeol text
//! is transcribed). Morpheme files are gold corpora or analysis output, of
//! which only the top-ranked line of each record counts.

use morphdec_core::corpus::{morpheme_tokens, parse_gold};
use morphdec_core::decoder::EMPTY_OBSERVATION_LINE;
use morphdec_core::{align_and_count, EvalCounts, Phonology};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Unit {
    Diphone,
    Morpheme,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Diphone => "diphone",
            Unit::Morpheme => "morpheme",
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim_end).filter(|l| *l == EMPTY_OBSERVATION_LINE || !(l.trim().is_empty() || l.starts_with('#')))
}

fn is_gold_corpus(text: &str) -> bool {
    content_lines(text).next().is_some_and(|l| l.split('\t').count() == 2)
}

/// Symbol strings per record.
pub fn diphone_records(text: &str, phonology: &Phonology) -> Result<Vec<Vec<String>>, CliError> {
    if is_gold_corpus(text) {
        let inv = &phonology.inventory;
        return parse_gold(text)?
            .iter()
            .map(|g| {
                let ids = phonology.transcribe(&g.text).map_err(|e| CliError::Data(format!("{}: {e}", g.text)))?;
                Ok(ids.iter().map(|d| inv.get(*d).symbol.clone()).collect())
            })
            .collect();
    }
    Ok(content_lines(text)
        .map(|l| if l == EMPTY_OBSERVATION_LINE { Vec::new() } else { l.split_whitespace().map(String::from).collect() })
        .collect())
}

/// Best rendering per record.
pub fn morpheme_records(text: &str) -> Result<Vec<String>, CliError> {
    if is_gold_corpus(text) {
        return Ok(parse_gold(text)?.into_iter().map(|g| g.rendering).collect());
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let rank: usize = match (fields.len() >= 3).then(|| fields[0].parse().ok()).flatten() {
            Some(r) => r,
            None => return Err(CliError::Data(format!("analysis line {}: expected rank<TAB>rendering<TAB>score", i + 1))),
        };
        if rank <= 1 {
            out.push(fields[1].to_string());
        }
    }
    Ok(out)
}

pub fn count(unit: Unit, gold: &str, hyp: &str, phonology: &Phonology) -> Result<EvalCounts, CliError> {
    let mut total = EvalCounts::default();
    match unit {
        Unit::Diphone => {
            let (g, h) = (diphone_records(gold, phonology)?, diphone_records(hyp, phonology)?);
            same_len(g.len(), h.len())?;
            for (a, b) in g.iter().zip(&h) {
                total += align_and_count(a, b);
            }
        }
        Unit::Morpheme => {
            let (g, h) = (morpheme_records(gold)?, morpheme_records(hyp)?);
            same_len(g.len(), h.len())?;
            for (a, b) in g.iter().zip(&h) {
                total += align_and_count(&morpheme_tokens(a), &morpheme_tokens(b));
            }
        }
    }
    Ok(total)
}

fn same_len(g: usize, h: usize) -> Result<(), CliError> {
    if g != h {
        return Err(CliError::Data(format!("gold has {g} records, hypothesis has {h}")));
    }
    Ok(())
}
