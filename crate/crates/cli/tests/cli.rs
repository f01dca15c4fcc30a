use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn morphdec(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphdec")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn evaluate_identical_files_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.tsv"), "na-nun\tna+nun\ncip-ey\tcip+ey\n").unwrap();
    for unit in ["diphone", "morpheme"] {
        let o = morphdec(&["evaluate", "--gold", "g.tsv", "--hyp", "g.tsv", "--unit", unit], dir.path());
        assert_eq!(code(&o), 0, "{o:?}");
        let text = stdout(&o);
        assert!(text.starts_with("unit\ttotal\tcorrect\tdelete\tinsert\n"), "{text}");
        assert!(text.contains("(100.00%)\t0 (0.00%)\t0 (0.00%)"), "{text}");
    }
}

#[test]
fn evaluate_renders_large_counts() {
    // 4266 gold morphemes, 3440 recovered, 902 spurious
    let dir = tempfile::tempdir().unwrap();
    let gold: Vec<String> = (0..4266).map(|k| format!("m{k}")).collect();
    let hyp: Vec<String> = gold[..3440].iter().cloned().chain((0..902).map(|k| format!("x{k}"))).collect();
    fs::write(dir.path().join("g.tsv"), format!("long\t{}\n", gold.join("+"))).unwrap();
    fs::write(dir.path().join("h.txt"), format!("1\t{}\t-1.0\n", hyp.join("+"))).unwrap();
    let o = morphdec(&["evaluate", "--gold", "g.tsv", "--hyp", "h.txt", "--unit", "morpheme"], dir.path());
    assert_eq!(stdout(&o), "unit\ttotal\tcorrect\tdelete\tinsert\nmorpheme\t4266\t3440 (80.64%)\t826 (19.36%)\t902 (21.14%)\n");
    let o = morphdec(&["evaluate", "--gold", "g.tsv", "--hyp", "h.txt", "--unit", "morpheme", "--json"], dir.path());
    assert!(stdout(&o).contains("\"correct_rate\": \"80.64%\""));
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = morphdec(args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        o
    };
    run(&["compile", "--out", "idx"]);
    assert!(dir.path().join("idx/trie.dot").exists());
    run(&["simulate", "--preset", "paper-fig10", "--seed", "4", "--out", "obs.txt"]);
    let obs = fs::read_to_string(dir.path().join("obs.txt")).unwrap();
    assert!(obs.starts_with("# seed=4 cfg=del=0.032"));
    let dec = stdout(&run(&["decode", "--index", "idx", "--obs", "obs.txt", "--dump-lattice"]));
    assert!(dec.starts_with("# eonjeol 1: "));
    run(&["analyze", "--index", "idx", "--matrices", "idx", "--obs", "obs.txt", "--out", "an.txt"]);
    run(&["run", "--preset", "paper-fig10", "--seed", "4", "--out", "r"]);
    // the staged pipeline and the one-pass run agree
    let staged = fs::read_to_string(dir.path().join("an.txt")).unwrap();
    assert_eq!(staged, fs::read_to_string(dir.path().join("r/analyses.txt")).unwrap());
    let obs_run = fs::read_to_string(dir.path().join("r/observations.txt")).unwrap();
    assert_eq!(obs, obs_run);
    let corpus = format!("{}/../core/assets/corpus.tsv", env!("CARGO_MANIFEST_DIR"));
    let eval = stdout(&run(&["evaluate", "--gold", &corpus, "--hyp", "an.txt", "--unit", "morpheme"]));
    let summary = fs::read_to_string(dir.path().join("r/eval.txt")).unwrap();
    assert_eq!(eval.lines().nth(1), summary.lines().nth(2));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.cfg"), "preset=paper-fig10\nseed=8\nframe=2,2\n").unwrap();
    let o = morphdec(&["run", "--config", "c.cfg", "--seed", "9", "--set", "cap=4", "--out", "r"], dir.path());
    assert_eq!(code(&o), 0);
    let echoed = fs::read_to_string(dir.path().join("r/config.txt")).unwrap();
    assert!(echoed.contains("seed=9\n") && echoed.contains("cap=4\n") && echoed.contains("frame=2,2\n"), "{echoed}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&morphdec(&["frobnicate"], p)), 2);
    assert_eq!(code(&morphdec(&["run", "--set", "alpha", "--out", "r"], p)), 2);
    assert_eq!(code(&morphdec(&["run", "--alpha", "1.5", "--out", "r"], p)), 2);
    assert_eq!(code(&morphdec(&["analyze", "--obs", "missing.txt"], p)), 3);
    fs::write(p.join("bad.txt"), "ci zzz\n").unwrap();
    let o = morphdec(&["analyze", "--obs", "bad.txt"], p);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zzz"));
    fs::write(p.join("lex.tsv"), "ci\tci\tNOPE\tV_REG\tc:none\ti:none\n").unwrap();
    assert_eq!(code(&morphdec(&["compile", "--lexicon", "lex.tsv", "--out", "idx"], p)), 3);
    assert!(!p.join("idx").exists(), "failed compile left output behind");

    fs::write(p.join("obs.txt"), "ci wu\n# empty\n").unwrap();
    let o = morphdec(&["analyze", "--obs", "obs.txt"], p);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("0\t?\t-inf\n"));
    assert_eq!(code(&morphdec(&["analyze", "--obs", "obs.txt", "--strict", "--out", "an.txt"], p)), 4);
    assert!(p.join("an.txt").exists());
}

#[test]
fn failed_write_keeps_previous_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("an.txt"), "previous\n").unwrap();
    fs::write(p.join("obs.txt"), "ci zzz\n").unwrap();
    assert_eq!(code(&morphdec(&["analyze", "--obs", "obs.txt", "--out", "an.txt"], p)), 3);
    assert_eq!(fs::read_to_string(p.join("an.txt")).unwrap(), "previous\n");
    let leftovers: Vec<_> = fs::read_dir(p).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 2, "{leftovers:?}");
}
