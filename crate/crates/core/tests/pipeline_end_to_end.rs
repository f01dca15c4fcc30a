//! Whole-corpus runs through the public pipeline.

use morphdec_core::analyzer::{analyze, Piece};
use morphdec_core::corpus::{bundled_ambiguous, bundled_gold, to_records};
use morphdec_core::{pipeline, AnalyzerConfig, Model, ObservationSeq, RunConfig};

#[test]
fn clean_corpus_recovers_every_unambiguous_gold() {
    let model = Model::bundled();
    let gold = to_records(&bundled_gold(), &model.phonology).unwrap();
    let amb = bundled_ambiguous();
    let report = pipeline::run(&model, &gold, &RunConfig { jobs: 4, ..RunConfig::default() }).unwrap();
    assert_eq!(report.no_analysis, 0);
    let mut wrong = Vec::new();
    for r in report.records.iter().filter(|r| !amb.contains(&r.text)) {
        if r.best_rendering() != Some(r.gold_rendering.as_str()) {
            wrong.push(format!("{}: {:?} != {}", r.text, r.best_rendering(), r.gold_rendering));
        }
    }
    assert!(wrong.is_empty(), "{wrong:#?}");
    // records on the manifest are there because some other analysis wins or ties
    for r in report.records.iter().filter(|r| amb.contains(&r.text)) {
        assert!(r.outputs[0].complete);
    }
}

#[test]
fn unknown_stretch_becomes_a_gap() {
    let model = Model::bundled();
    let inv = &model.phonology.inventory;
    let left = model.phonology.transcribe("cip").unwrap();
    let right = model.phonology.transcribe("pam").unwrap();
    // a run too long for any header to absorb within its mismatch allowance
    let junk: Vec<_> = ["yey"; 10].iter().map(|s| inv.lookup(s).unwrap()).collect();
    let symbols: Vec<_> = left.iter().chain(&junk).chain(&right).copied().collect();
    let obs = ObservationSeq::new(symbols, "t").unwrap();
    // with any mismatch allowance every symbol is some one-unit morpheme
    let mut cfg = AnalyzerConfig::new(model.default_params());
    cfg.prune.min_mismatch_allowance = 0;
    cfg.prune.mismatch_fraction = 0.0;
    let out = analyze(&obs, &model.index, &model.lexicon, &model.grammar, &cfg).unwrap();
    let best = &out[0];
    assert!(!best.complete);
    assert!(best.gap_count() >= 1);
    assert!(best.pieces.iter().any(|p| matches!(p, Piece::Gap { .. })));
    assert!(best.rendering.contains('?'), "{}", best.rendering);
    assert!(best.rendering.starts_with("cip"), "{}", best.rendering);
    assert!(best.rendering.ends_with("pam"), "{}", best.rendering);
}
