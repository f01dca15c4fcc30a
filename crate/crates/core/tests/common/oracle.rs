//! Brute-force reference implementations used by the integration tests.
//!
//! Nothing here reuses the search code: trie fan-outs are re-derived from the
//! lexicon headers, alignments are enumerated as compositions of each span,
//! and analyses are enumerated as explicit candidate chains.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use morphdec_core::lexicon::HeaderUnit;
use morphdec_core::{DiphoneId, DiphoneInventory, DiphoneKind, EntryId, Grammar, HmmParams, Lexicon};

/// One way of walking into a morpheme: the emitting states in order and the
/// fan-out of the state each one is entered from.
#[derive(Clone, Debug)]
pub struct Route {
    pub states: Vec<OracleUnit>,
    pub fanouts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OracleUnit {
    Header(HeaderUnit),
    Junction(DiphoneId),
}

pub struct OracleModel<'a> {
    pub lexicon: &'a Lexicon,
    pub inventory: &'a DiphoneInventory,
    pub routes: Vec<(EntryId, Vec<Route>)>,
}

impl<'a> OracleModel<'a> {
    pub fn new(lexicon: &'a Lexicon, inventory: &'a DiphoneInventory) -> Self {
        let headers: Vec<(EntryId, Vec<HeaderUnit>)> = lexicon.iter().map(|(id, e)| (id, e.diphone_header.clone())).collect();
        // distinct continuations of a header prefix
        let fanout = |prefix: &[HeaderUnit]| -> usize {
            let next: HashSet<&HeaderUnit> =
                headers.iter().filter(|(_, h)| h.len() > prefix.len() && h.starts_with(prefix)).map(|(_, h)| &h[prefix.len()]).collect();
            next.len()
        };
        let first_onset = |h: &[HeaderUnit]| -> Option<(DiphoneId, String)> {
            match h.first() {
                Some(HeaderUnit::Diphone(d)) if inventory.get(*d).kind == DiphoneKind::C1V => {
                    Some((*d, inventory.get(*d).onset().unwrap().to_string()))
                }
                _ => None,
            }
        };
        let onset_targets: BTreeMap<String, BTreeSet<DiphoneId>> = headers.iter().filter_map(|(_, h)| first_onset(h)).fold(
            BTreeMap::new(),
            |mut m, (d, c)| {
                m.entry(c).or_default().insert(d);
                m
            },
        );
        let junctions: Vec<(DiphoneId, String)> = inventory
            .iter()
            .filter(|(_, d)| d.kind == DiphoneKind::C2C1 && onset_targets.contains_key(d.onset().unwrap()))
            .map(|(id, d)| (id, d.onset().unwrap().to_string()))
            .collect();
        let root_fanout = fanout(&[]) + junctions.len();

        let mut routes = Vec::new();
        for (id, h) in &headers {
            let mut plain_fanouts = vec![root_fanout];
            for k in 1..h.len() {
                plain_fanouts.push(fanout(&h[..k]));
            }
            let plain_states: Vec<OracleUnit> = h.iter().cloned().map(OracleUnit::Header).collect();
            let mut rs = vec![Route { states: plain_states.clone(), fanouts: plain_fanouts.clone() }];
            if let Some((_, onset)) = first_onset(h) {
                for (j, c) in &junctions {
                    if *c != onset {
                        continue;
                    }
                    let mut states = vec![OracleUnit::Junction(*j)];
                    states.extend(plain_states.iter().cloned());
                    let mut fanouts = vec![root_fanout, onset_targets[c].len()];
                    fanouts.extend_from_slice(&plain_fanouts[1..]);
                    rs.push(Route { states, fanouts });
                }
            }
            routes.push((*id, rs));
        }
        Self { lexicon, inventory, routes }
    }

    pub fn matches(&self, unit: &OracleUnit, o: DiphoneId) -> bool {
        match unit {
            OracleUnit::Header(HeaderUnit::Diphone(d)) | OracleUnit::Junction(d) => *d == o,
            OracleUnit::Header(HeaderUnit::CodaAttach(c)) => self.inventory.get(o).coda() == Some(c.as_str()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCandidate {
    pub log_score: f64,
    pub mismatches: u32,
}

/// Mismatch budget: at least one, else ceil(0.34 * len).
pub fn admits(len: usize, mismatches: u32) -> bool {
    let allowance = ((0.34 * len as f64 - 1e-9).ceil() as u32).max(1);
    mismatches <= allowance
}

/// All `(entry, start, end)` candidates with the best alignment score, found
/// by enumerating every split of every span among the route's states.
pub fn brute_decode(
    model: &OracleModel,
    obs: &[DiphoneId],
    p: &HmmParams,
    prune: bool,
) -> BTreeMap<(EntryId, usize, usize), OracleCandidate> {
    let n = obs.len();
    let better = |c: &OracleCandidate, b: &OracleCandidate| c.log_score > b.log_score || (c.log_score == b.log_score && c.mismatches < b.mismatches);
    let mut out: BTreeMap<(EntryId, usize, usize), OracleCandidate> = BTreeMap::new();
    for (entry, routes) in &model.routes {
        for s in 0..n {
            for end in s..n {
                let len = end - s + 1;
                // best alignment over every route into this entry's final state
                let mut best: Option<OracleCandidate> = None;
                for route in routes {
                    let k = route.states.len();
                    if k > len {
                        continue;
                    }
                    let mut parts = vec![0usize; k];
                    compositions(len, k, &mut parts, 0, &mut |parts| {
                        let c = score_alignment(model, route, &obs[s..=end], parts, p);
                        if best.as_ref().map_or(true, |b| better(&c, b)) {
                            best = Some(c);
                        }
                    });
                }
                let Some(c) = best else { continue };
                if prune && !admits(len, c.mismatches) {
                    continue;
                }
                out.insert((*entry, s + 1, end + 1), c);
            }
        }
    }
    out
}

fn compositions(total: usize, k: usize, parts: &mut [usize], at: usize, f: &mut dyn FnMut(&[usize])) {
    if at == k - 1 {
        if total >= 1 {
            parts[at] = total;
            f(parts);
        }
        return;
    }
    let rest = k - at - 1;
    for r in 1..=total.saturating_sub(rest) {
        parts[at] = r;
        compositions(total - r, k, parts, at + 1, f);
    }
}

fn score_alignment(model: &OracleModel, route: &Route, obs: &[DiphoneId], parts: &[usize], p: &HmmParams) -> OracleCandidate {
    let hit = p.beta.ln();
    let miss = p.mismatch_prob().ln();
    let mut score = 0.0;
    let mut mismatches = 0;
    let mut t = 0;
    for (q, (unit, &r)) in route.states.iter().zip(parts).enumerate() {
        for step in 0..r {
            score += if step == 0 { ((1.0 - p.alpha) / route.fanouts[q] as f64).ln() } else { p.alpha.ln() };
            if model.matches(unit, obs[t]) {
                score += hit;
            } else {
                score += miss;
                mismatches += 1;
            }
            t += 1;
        }
    }
    OracleCandidate { log_score: score, mismatches }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainLink {
    pub entry: EntryId,
    pub start: usize,
    pub end: usize,
    pub log_score: f64,
}

/// Every chain of adjacent links covering `1..=n` that passes both
/// connectivity predicates at every seam, with its left-to-right score.
pub fn all_chains(links: &[ChainLink], n: usize, lexicon: &Lexicon, grammar: &Grammar) -> Vec<(Vec<ChainLink>, f64)> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    extend(links, n, 1, lexicon, grammar, &mut stack, &mut out);
    out
}

fn extend(
    links: &[ChainLink],
    n: usize,
    at: usize,
    lexicon: &Lexicon,
    grammar: &Grammar,
    stack: &mut Vec<ChainLink>,
    out: &mut Vec<(Vec<ChainLink>, f64)>,
) {
    if at == n + 1 {
        let score = stack.iter().fold(0.0, |s, l| s + l.log_score);
        out.push((stack.clone(), score));
        return;
    }
    for l in links.iter().filter(|l| l.start == at) {
        if let Some(prev) = stack.last() {
            if !grammar.connects(lexicon.get(prev.entry), lexicon.get(l.entry)) {
                continue;
            }
        }
        stack.push(*l);
        extend(links, n, l.end + 1, lexicon, grammar, stack, out);
        stack.pop();
    }
}

/// The top-scoring legal chains only, by depth-first search bounded with
/// the best connectivity-free completion from each position.
pub fn best_chains(links: &[ChainLink], n: usize, lexicon: &Lexicon, grammar: &Grammar) -> (f64, Vec<Vec<ChainLink>>) {
    let mut bound = vec![f64::NEG_INFINITY; n + 2];
    bound[n + 1] = 0.0;
    for p in (1..=n).rev() {
        for l in links.iter().filter(|l| l.start == p) {
            bound[p] = bound[p].max(l.log_score + bound[l.end + 1]);
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut found: Vec<(Vec<ChainLink>, f64)> = Vec::new();
    let mut stack: Vec<ChainLink> = Vec::new();
    bb(links, n, 1, 0.0, &bound, lexicon, grammar, &mut stack, &mut best, &mut found);
    let top: Vec<Vec<ChainLink>> = found.into_iter().filter(|(_, s)| *s >= best - 1e-9).map(|(c, _)| c).collect();
    (best, top)
}

#[allow(clippy::too_many_arguments)]
fn bb(
    links: &[ChainLink],
    n: usize,
    at: usize,
    acc: f64,
    bound: &[f64],
    lexicon: &Lexicon,
    grammar: &Grammar,
    stack: &mut Vec<ChainLink>,
    best: &mut f64,
    found: &mut Vec<(Vec<ChainLink>, f64)>,
) {
    if at == n + 1 {
        let score = stack.iter().fold(0.0, |s, l| s + l.log_score);
        if score >= *best - 1e-9 {
            *best = best.max(score);
            found.push((stack.clone(), score));
        }
        return;
    }
    if acc + bound[at] < *best - 1e-6 {
        return;
    }
    for l in links.iter().filter(|l| l.start == at) {
        if let Some(prev) = stack.last() {
            if !grammar.connects(lexicon.get(prev.entry), lexicon.get(l.entry)) {
                continue;
            }
        }
        stack.push(*l);
        bb(links, n, l.end + 1, acc + l.log_score, bound, lexicon, grammar, stack, best, found);
        stack.pop();
    }
}

/// `+`/space rendering of a chain, written out from the tag flags.
pub fn render(chain: &[ChainLink], lexicon: &Lexicon, grammar: &Grammar) -> String {
    let mut s = String::new();
    for (k, l) in chain.iter().enumerate() {
        let e = lexicon.get(l.entry);
        if k > 0 {
            let prev = lexicon.get(chain[k - 1].entry);
            let brk = grammar.tags.get(prev.right_pos).word_final && grammar.tags.get(e.left_pos).word_initial;
            s.push(if brk { ' ' } else { '+' });
        }
        s.push_str(&e.orthographic);
    }
    s
}

pub fn links_from(cands: &BTreeMap<(EntryId, usize, usize), OracleCandidate>) -> Vec<ChainLink> {
    cands.iter().map(|(&(entry, start, end), c)| ChainLink { entry, start, end, log_score: c.log_score }).collect()
}

pub mod gen {
    //! Seeded random lexicons, observation streams and lattices.

    use rand::seq::SliceRandom;
    use rand::Rng;

    use morphdec_core::{DiphoneId, Phonology};

    pub const VOWELS: &[&str] =
        &["a", "ay", "ya", "yay", "e", "ey", "ye", "yey", "o", "wa", "way", "oy", "yo", "wu", "we", "wey", "wi", "yu", "u", "uy", "i"];
    pub const ONSETS: &[&str] = &["k", "kk", "n", "t", "tt", "l", "m", "p", "pp", "s", "ss", "c", "cc", "ch", "kh", "th", "ph", "h"];
    pub const CODAS: &[&str] = &["k", "n", "t", "l", "m", "p", "ng"];
    pub const TAGS: &[&str] = &["N_COM", "N_PRO", "N_BND", "V_REG", "E_PRE", "E_CON", "E_FIN", "J_CASE", "J_AUX", "ADV"];

    fn syllable(rng: &mut impl Rng) -> (String, String, String) {
        let onset = if rng.gen_bool(0.7) { *ONSETS.choose(rng).unwrap() } else { "" };
        let v = *VOWELS.choose(rng).unwrap();
        let coda = if rng.gen_bool(0.35) { *CODAS.choose(rng).unwrap() } else { "" };
        let first = if onset.is_empty() { v } else { onset };
        let last = if coda.is_empty() { v } else { coda };
        (format!("{onset}{v}{coda}"), first.to_string(), last.to_string())
    }

    /// Lexicon text with up to `max_entries` records whose headers have at
    /// most `max_header` diphones; roughly one in eight is the vowel-less
    /// adnominal `l` or `n`.
    pub fn lexicon_tsv(rng: &mut impl Rng, max_entries: usize, max_header: usize, phonology: &Phonology) -> String {
        let want = rng.gen_range(1..=max_entries);
        let mut seen = std::collections::BTreeSet::new();
        let mut out = String::new();
        let mut tries = 0;
        while seen.len() < want && tries < 200 {
            tries += 1;
            let (surface, first, last, tag) = if rng.gen_bool(0.12) {
                let c = if rng.gen_bool(0.5) { "l" } else { "n" };
                (c.to_string(), c.to_string(), c.to_string(), "E_ADN")
            } else {
                let k = rng.gen_range(1..=2);
                let syls: Vec<_> = (0..k).map(|_| syllable(rng)).collect();
                let text: Vec<&str> = syls.iter().map(|s| s.0.as_str()).collect();
                let text = text.join("-");
                match phonology.transcribe(&text) {
                    Ok(h) if h.len() <= max_header => {}
                    _ => continue,
                }
                (text, syls[0].1.clone(), syls[k - 1].2.clone(), *TAGS.choose(rng).unwrap())
            };
            if seen.insert(surface.clone()) {
                out.push_str(&format!("{surface}\t{surface}\t{tag}\t{tag}\t{first}:none\t{last}:none\n"));
            }
        }
        out
    }

    /// Observations biased towards `pool` so that candidates actually match.
    pub fn observations(rng: &mut impl Rng, len: usize, pool: &[DiphoneId], inventory_size: usize) -> Vec<DiphoneId> {
        (0..len)
            .map(|_| {
                if !pool.is_empty() && rng.gen_bool(0.75) {
                    *pool.choose(rng).unwrap()
                } else {
                    DiphoneId(rng.gen_range(0..inventory_size) as u16)
                }
            })
            .collect()
    }
}
