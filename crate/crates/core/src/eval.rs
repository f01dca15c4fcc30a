//! Alignment-based correct/delete/insert accounting.

use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub total: u64,
    pub correct: u64,
    pub delete: u64,
    pub insert: u64,
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.correct += o.correct;
        self.delete += o.delete;
        self.insert += o.insert;
    }
}

impl EvalCounts {
    pub fn correct_rate(&self) -> String {
        format_rate(self.correct, self.total)
    }

    pub fn delete_rate(&self) -> String {
        format_rate(self.delete, self.total)
    }

    pub fn insert_rate(&self) -> String {
        format_rate(self.insert, self.total)
    }
}

/// Minimum-edit alignment with unit costs. Among minimum-cost alignments the
/// one with the most matches is taken, so a substitution counts as one
/// deletion plus one insertion.
pub fn align_and_count<T: PartialEq>(gold: &[T], hyp: &[T]) -> EvalCounts {
    let (n, m) = (gold.len(), hyp.len());
    // (cost, matches) per prefix pair, rolling over gold
    let mut prev: Vec<(usize, usize)> = (0..=m).map(|j| (j, 0)).collect();
    let mut cur = vec![(0usize, 0usize); m + 1];
    let better = |a: (usize, usize), b: (usize, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 > b.1);
    for i in 1..=n {
        cur[0] = (i, 0);
        for j in 1..=m {
            let diag = if gold[i - 1] == hyp[j - 1] {
                (prev[j - 1].0, prev[j - 1].1 + 1)
            } else {
                (prev[j - 1].0 + 1, prev[j - 1].1)
            };
            let mut best = diag;
            let del = (prev[j].0 + 1, prev[j].1);
            if better(del, best) {
                best = del;
            }
            let ins = (cur[j - 1].0 + 1, cur[j - 1].1);
            if better(ins, best) {
                best = ins;
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let correct = prev[m].1 as u64;
    EvalCounts { total: n as u64, correct, delete: n as u64 - correct, insert: m as u64 - correct }
}

/// `num / den` as a percentage rounded half-up to two decimals, computed in
/// integers. A zero denominator renders as `n/a`.
pub fn format_rate(num: u64, den: u64) -> String {
    if den == 0 {
        return "n/a".into();
    }
    let (num, den) = (num as u128, den as u128);
    let hundredths = (num * 20_000 + den) / (2 * den);
    format!("{}.{:02}%", hundredths / 100, hundredths % 100)
}

/// Figure-style table: `unit total correct (rate) delete (rate) insert (rate)`.
pub fn format_table(rows: &[(&str, EvalCounts)]) -> String {
    let mut out = String::from("unit\ttotal\tcorrect\tdelete\tinsert\n");
    for (unit, c) in rows {
        let _ = writeln!(
            out,
            "{unit}\t{}\t{} ({})\t{} ({})\t{} ({})",
            c.total,
            c.correct,
            c.correct_rate(),
            c.delete,
            c.delete_rate(),
            c.insert,
            c.insert_rate()
        );
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    unit: &'a str,
    #[serde(flatten)]
    counts: EvalCounts,
    correct_rate: String,
    delete_rate: String,
    insert_rate: String,
}

pub fn format_json(rows: &[(&str, EvalCounts)]) -> String {
    let rows: Vec<JsonRow> = rows
        .iter()
        .map(|(unit, c)| JsonRow {
            unit,
            counts: *c,
            correct_rate: c.correct_rate(),
            delete_rate: c.delete_rate(),
            insert_rate: c.insert_rate(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("plain data serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sequences() {
        let c = align_and_count(&[1, 2, 3], &[1, 2, 3]);
        assert_eq!(c, EvalCounts { total: 3, correct: 3, delete: 0, insert: 0 });
    }

    #[test]
    fn substitution_plus_insertion() {
        let c = align_and_count(&["a", "b", "c"], &["a", "x", "c", "y"]);
        assert_eq!(c, EvalCounts { total: 3, correct: 2, delete: 1, insert: 2 });
    }

    #[test]
    fn prefers_matches_among_cheapest() {
        // sub+sub and del+match+ins both cost 2
        let c = align_and_count(&["a", "b"], &["b", "c"]);
        assert_eq!(c.correct, 1);
        assert_eq!(align_and_count::<u8>(&[], &[1, 2]), EvalCounts { total: 0, correct: 0, delete: 0, insert: 2 });
        assert_eq!(align_and_count::<u8>(&[1, 2], &[]), EvalCounts { total: 2, correct: 0, delete: 2, insert: 0 });
    }

    #[test]
    fn rates_round_half_up() {
        assert_eq!(format_rate(3440, 4266), "80.64%");
        assert_eq!(format_rate(1847, 2083), "88.67%");
        assert_eq!(format_rate(1, 8), "12.50%");
        assert_eq!(format_rate(1, 800), "0.13%");
        assert_eq!(format_rate(5, 5), "100.00%");
        assert_eq!(format_rate(0, 0), "n/a");
    }

    #[test]
    fn table_layout() {
        let c = EvalCounts { total: 4266, correct: 3440, delete: 826, insert: 902 };
        let t = format_table(&[("morpheme", c)]);
        assert_eq!(t.lines().nth(1).unwrap(), "morpheme\t4266\t3440 (80.64%)\t826 (19.36%)\t902 (21.14%)");
        let j: serde_json::Value = serde_json::from_str(&format_json(&[("morpheme", c)])).unwrap();
        assert_eq!(j[0]["correct"], 3440);
        assert_eq!(j[0]["correct_rate"], "80.64%");
    }
}
