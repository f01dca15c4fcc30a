//! The bundled corpus is the generator's output for the pinned seed, and the
//! ambiguity manifest lists exactly the records whose clean stream has a
//! competing analysis under brute-force search.
//!
//! `MORPHDEC_REGENERATE_ASSETS=1 cargo test -p morphdec-core --test corpus_manifest`
//! rewrites both files.

#[path = "common/oracle.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use morphdec_core::corpus::{self, GoldLine, CORPUS_SEED, CORPUS_SIZE};
use morphdec_core::Model;
use oracle::{best_chains, brute_decode, links_from, render, OracleModel};

/// `(text, competing renderings)` for every ambiguous line.
fn ambiguities(model: &Model, lines: &[GoldLine]) -> Vec<(String, Vec<String>)> {
    let om = OracleModel::new(&model.lexicon, &model.phonology.inventory);
    let params = model.default_params();
    let mut out = Vec::new();
    for line in lines {
        let obs = model.phonology.transcribe(&line.text).unwrap();
        let cands = brute_decode(&om, &obs, &params, true);
        let (_, top) = best_chains(&links_from(&cands), obs.len(), &model.lexicon, &model.grammar);
        let renderings: BTreeSet<String> = top.iter().map(|c| render(c, &model.lexicon, &model.grammar)).collect();
        if renderings.len() != 1 || !renderings.contains(&line.rendering) {
            out.push((line.text.clone(), renderings.into_iter().filter(|r| *r != line.rendering).collect()));
        }
    }
    out
}

fn manifest_text(amb: &[(String, Vec<String>)]) -> String {
    let mut s = String::from("# eonjeols whose clean stream has a best analysis other than (or tied with) the gold one\n");
    s.push_str("# eonjeol_text<TAB>competing best renderings\n");
    for (t, r) in amb {
        let _ = writeln!(s, "{t}\t{}", r.join(" | "));
    }
    s
}

#[test]
fn bundled_corpus_and_manifest_are_current() {
    let model = Model::bundled();
    let lines = corpus::generate(&model, CORPUS_SIZE, CORPUS_SEED);
    assert_eq!(lines.len(), CORPUS_SIZE);
    let amb = ambiguities(&model, &lines);
    if std::env::var_os("MORPHDEC_REGENERATE_ASSETS").is_some() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");
        std::fs::write(dir.join("corpus.tsv"), corpus::gold_to_tsv(&lines)).unwrap();
        std::fs::write(dir.join("ambiguous.txt"), manifest_text(&amb)).unwrap();
        eprintln!("wrote {} records, {} ambiguous", lines.len(), amb.len());
        return;
    }
    assert_eq!(corpus::bundled_gold(), lines, "bundled corpus is stale");
    let expected: BTreeSet<String> = amb.into_iter().map(|(t, _)| t).collect();
    assert_eq!(corpus::bundled_ambiguous(), expected, "ambiguity manifest is stale");
}
