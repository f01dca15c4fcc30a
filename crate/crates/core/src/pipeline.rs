//! Simulate, decode, analyze and score a gold corpus.

use rayon::prelude::*;

use crate::analyzer::{self, AnalyzeError, AnalyzerConfig, EojeolOutput, NO_ANALYSIS_LINE};
use crate::config::RunConfig;
use crate::corpus::morpheme_tokens;
use crate::decoder::{ObservationSeq, EMPTY_OBSERVATION_LINE};
use crate::eval::{self, align_and_count, EvalCounts};
use crate::model::Model;
use crate::phonology::DiphoneInventory;
use crate::simulator::{self, frame_seed, record_seed, GoldRecord, SimError};
use crate::Error;

#[derive(Clone, Debug)]
pub struct RecordResult {
    pub index: usize,
    pub text: String,
    pub gold_rendering: String,
    /// Channel output before frame expansion; `None` when every diphone was
    /// deleted.
    pub observation: Option<ObservationSeq>,
    /// Decoder input (after frame expansion).
    pub decoded: Option<ObservationSeq>,
    /// Ranked analyses; empty when nothing was found.
    pub outputs: Vec<EojeolOutput>,
    pub diphone: EvalCounts,
    pub morpheme: EvalCounts,
}

impl RecordResult {
    pub fn best_rendering(&self) -> Option<&str> {
        self.outputs.first().map(|o| o.rendering.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub records: Vec<RecordResult>,
    pub diphone: EvalCounts,
    pub morpheme: EvalCounts,
    pub no_analysis: usize,
    pub config: RunConfig,
}

/// Processes every record; output order follows input order for any `jobs`.
pub fn run(model: &Model, gold: &[GoldRecord], cfg: &RunConfig) -> Result<RunReport, Error> {
    cfg.validate(model.phonology.inventory.len())?;
    let acfg = cfg.analyzer_config(model.phonology.inventory.len())?;
    let pool = thread_pool(cfg.jobs)?;
    let records: Vec<RecordResult> = pool.install(|| {
        gold.par_iter()
            .enumerate()
            .map(|(i, rec)| run_record(model, i, rec, cfg, &acfg))
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut report =
        RunReport { records, diphone: EvalCounts::default(), morpheme: EvalCounts::default(), no_analysis: 0, config: cfg.clone() };
    for r in &report.records {
        report.diphone += r.diphone;
        report.morpheme += r.morpheme;
        report.no_analysis += usize::from(r.outputs.is_empty());
    }
    Ok(report)
}

/// Channel output for record `index`, before and after frame expansion.
/// `None` when every diphone was deleted.
pub fn simulate_record(
    inventory: &DiphoneInventory,
    index: usize,
    rec: &GoldRecord,
    cfg: &RunConfig,
) -> Result<(Option<ObservationSeq>, Option<ObservationSeq>), Error> {
    let noise = cfg.effective_noise().with_seed(record_seed(cfg.noise.seed, index));
    let observation = match simulator::corrupt(&rec.reference, inventory, &noise) {
        Ok(o) => Some(o),
        Err(SimError::EmptyResult) => None,
        Err(e) => return Err(e.into()),
    };
    let decoded = match (&observation, cfg.frame) {
        (Some(o), Some((lo, hi))) => Some(simulator::frame_expand(o, lo, hi, frame_seed(cfg.noise.seed, index))?),
        (o, _) => o.clone(),
    };
    Ok((observation, decoded))
}

/// Observation file for `records` behind the provenance line of `cfg`.
pub fn observations_text<'a>(
    records: impl IntoIterator<Item = Option<&'a ObservationSeq>>,
    inventory: &DiphoneInventory,
    cfg: &RunConfig,
) -> String {
    let frame = cfg.frame.map_or_else(|| "off".to_string(), |(a, b)| format!("{a},{b}"));
    let mut out = format!("# seed={} cfg={} frame={}\n", cfg.noise.seed, cfg.effective_noise().describe(), frame);
    for r in records {
        out.push_str(&r.map_or_else(|| EMPTY_OBSERVATION_LINE.to_string(), |o| o.render(inventory)));
        out.push('\n');
    }
    out
}

/// Analyzes every observation with `jobs` threads; `None` records and
/// eonjeols without any analysis give an empty list. Output order follows
/// input order.
pub fn analyze_records(
    model: &Model,
    records: &[Option<ObservationSeq>],
    acfg: &AnalyzerConfig,
    jobs: usize,
) -> Result<Vec<Vec<EojeolOutput>>, Error> {
    let pool = thread_pool(jobs)?;
    pool.install(|| {
        records
            .par_iter()
            .map(|r| match r {
                Some(o) => analyze_one(model, o, acfg),
                None => Ok(Vec::new()),
            })
            .collect()
    })
}

fn analyze_one(model: &Model, obs: &ObservationSeq, acfg: &AnalyzerConfig) -> Result<Vec<EojeolOutput>, Error> {
    match analyzer::analyze(obs, &model.index, &model.lexicon, &model.grammar, acfg) {
        Ok(v) => Ok(v),
        Err(AnalyzeError::NoAnalysis) => Ok(Vec::new()),
        Err(e) => Err(e.into()),
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| Error::Runtime(e.to_string()))
}

/// Ranked lines for each record, [`NO_ANALYSIS_LINE`] for an empty one.
pub fn format_analyses<'a>(
    records: impl IntoIterator<Item = &'a [EojeolOutput]>,
    model: &Model,
    verbose: bool,
) -> String {
    let mut out = String::new();
    for outputs in records {
        if outputs.is_empty() {
            out.push_str(NO_ANALYSIS_LINE);
            out.push('\n');
        }
        for o in outputs {
            out.push_str(&o.format_line(&model.lexicon, &model.grammar, verbose));
            out.push('\n');
        }
    }
    out
}

pub fn run_record(model: &Model, index: usize, rec: &GoldRecord, cfg: &RunConfig, acfg: &AnalyzerConfig) -> Result<RecordResult, Error> {
    let (observation, decoded) = simulate_record(&model.phonology.inventory, index, rec, cfg)?;
    let outputs = match &decoded {
        Some(o) => analyze_one(model, o, acfg)?,
        None => Vec::new(),
    };
    let hyp_symbols = observation.as_ref().map(|o| o.symbols.as_slice()).unwrap_or(&[]);
    let diphone = align_and_count(&rec.reference, hyp_symbols);
    let gold_tokens = morpheme_tokens(&rec.gold_rendering);
    let hyp_tokens = outputs.first().map(|o| morpheme_tokens(&o.rendering)).unwrap_or_default();
    let morpheme = align_and_count(&gold_tokens, &hyp_tokens);
    Ok(RecordResult {
        index,
        text: rec.eonjeol_text.clone(),
        gold_rendering: rec.gold_rendering.clone(),
        observation,
        decoded,
        outputs,
        diphone,
        morpheme,
    })
}

impl RunReport {
    /// Decoder inputs in observation-file format.
    pub fn observations_text(&self, model: &Model) -> String {
        observations_text(self.records.iter().map(|r| r.decoded.as_ref()), &model.phonology.inventory, &self.config)
    }

    /// One block of ranked lines per record.
    pub fn analyses_text(&self, model: &Model, verbose: bool) -> String {
        format_analyses(self.records.iter().map(|r| r.outputs.as_slice()), model, verbose)
    }

    pub fn eval_rows(&self) -> Vec<(&'static str, EvalCounts)> {
        vec![("diphone", self.diphone), ("morpheme", self.morpheme)]
    }

    pub fn eval_table(&self) -> String {
        eval::format_table(&self.eval_rows())
    }

    pub fn eval_json(&self) -> String {
        eval::format_json(&self.eval_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{bundled_gold, to_records};

    #[test]
    fn zero_noise_subset_is_mostly_right() {
        let model = Model::bundled();
        let gold = to_records(&bundled_gold()[..20], &model.phonology).unwrap();
        let report = run(&model, &gold, &RunConfig::default()).unwrap();
        assert_eq!(report.diphone.correct, report.diphone.total);
        assert_eq!(report.diphone.insert, 0);
        assert_eq!(report.records.len(), 20);
    }

    #[test]
    fn parallel_matches_serial() {
        let model = Model::bundled();
        let gold = to_records(&bundled_gold()[..24], &model.phonology).unwrap();
        let mut cfg = RunConfig::parse("preset=paper-fig10\nseed=5").unwrap();
        let serial = run(&model, &gold, &cfg).unwrap();
        cfg.jobs = 4;
        let par = run(&model, &gold, &cfg).unwrap();
        assert_eq!(serial.analyses_text(&model, true), par.analyses_text(&model, true));
        assert_eq!(serial.observations_text(&model), par.observations_text(&model));
        assert_eq!(serial.eval_json(), par.eval_json());
    }
}
