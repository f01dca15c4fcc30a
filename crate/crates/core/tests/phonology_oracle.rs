//! Tokenization and diphonization against a regular-expression oracle.

#[path = "common/oracle.rs"]
mod oracle;

use morphdec_core::{DiphoneKind, Phonology};
use oracle::gen::{CODAS, ONSETS, VOWELS};
use proptest::prelude::*;
use regex::Regex;

fn alternation(symbols: &[&str]) -> String {
    let mut v: Vec<&str> = symbols.to_vec();
    v.sort_by_key(|s| std::cmp::Reverse(s.len()));
    v.join("|")
}

fn syllable_re() -> Regex {
    Regex::new(&format!("^({})?({})({})?$", alternation(ONSETS), alternation(VOWELS), alternation(CODAS))).unwrap()
}

/// `(onset, vowel, coda)` per syllable, or `None` if any syllable is invalid.
fn oracle_syllables(re: &Regex, text: &str) -> Option<Vec<(String, String, String)>> {
    text.split('-')
        .map(|seg| {
            let c = re.captures(seg)?;
            let get = |i| c.get(i).map_or(String::new(), |m| m.as_str().to_string());
            Some((get(1), get(2), get(3)))
        })
        .collect()
}

fn oracle_diphones(syls: &[(String, String, String)]) -> Vec<String> {
    let sonorant = ["n", "l", "m", "ng"];
    let mut out = Vec::new();
    for (k, (on, v, co)) in syls.iter().enumerate() {
        out.push(format!("{on}{v}"));
        if !co.is_empty() {
            out.push(format!("{v}{co}"));
            if let Some((next_on, _, _)) = syls.get(k + 1) {
                if sonorant.contains(&co.as_str()) && !next_on.is_empty() {
                    out.push(format!("{co}{next_on}"));
                }
            }
        }
    }
    out
}

#[test]
fn inventory_has_the_expected_shape() {
    let p = Phonology::bundled();
    let c = p.inventory.counts();
    assert_eq!((c.v, c.c1v, c.vc2, c.c2c1, c.total()), (21, 378, 147, 72, 618));
    for (_, d) in p.inventory.iter() {
        if d.kind == DiphoneKind::C2C1 {
            assert!(["n", "l", "m", "ng"].contains(&d.left.as_deref().unwrap()), "{}", d.symbol);
        }
    }
}

#[test]
fn worked_example() {
    let p = Phonology::bundled();
    let ids = p.transcribe("ci-wul-sswu").unwrap();
    assert_eq!(p.render(&ids), ["ci", "wu", "wul", "lss", "sswu"]);
}

fn valid_text() -> impl Strategy<Value = String> {
    let syl = (
        prop::option::of(prop::sample::select(ONSETS)),
        prop::sample::select(VOWELS),
        prop::option::of(prop::sample::select(CODAS)),
    )
        .prop_map(|(o, v, c)| format!("{}{}{}", o.unwrap_or(""), v, c.unwrap_or("")));
    prop::collection::vec(syl, 1..5).prop_map(|v| v.join("-"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn valid_text_matches_oracle(text in valid_text()) {
        let p = Phonology::bundled();
        let re = syllable_re();
        let syls = oracle_syllables(&re, &text).expect("generated text is valid");
        let got = p.tokenize_yale(&text).unwrap();
        prop_assert_eq!(got.len(), syls.len());
        for (g, (on, v, co)) in got.iter().zip(&syls) {
            prop_assert_eq!(g.onset.as_ref().map_or("", |x| x.symbol.as_str()), on.as_str());
            prop_assert_eq!(g.nucleus.symbol.as_str(), v.as_str());
            prop_assert_eq!(g.coda.as_ref().map_or("", |x| x.symbol.as_str()), co.as_str());
        }
        let ids = p.diphonize(&got).unwrap();
        prop_assert_eq!(p.render(&ids), oracle_diphones(&syls));
    }

    #[test]
    fn arbitrary_text_accepted_iff_oracle_accepts(text in "[aeiouywklnmptschg-]{1,9}") {
        let p = Phonology::bundled();
        let re = syllable_re();
        let oracle = oracle_syllables(&re, &text);
        let got = p.transcribe(&text);
        prop_assert_eq!(got.is_ok(), oracle.is_some(), "{}", text);
        if let (Ok(ids), Some(syls)) = (got, oracle) {
            prop_assert_eq!(p.render(&ids), oracle_diphones(&syls));
        }
    }
}
