//! Run reports: per-question predictions vs oracle answers, with overall,
//! per-type, per-option and per-question accuracy, plus answers-file IO.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::query::{Answer, QType};
use crate::scene::Vocabulary;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("answer id mismatch: `{left}` vs `{right}` at row {row}")]
    IdMismatch {
        left: String,
        right: String,
        row: usize,
    },
    #[error("answer files differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One scored question.
#[derive(Clone, Debug)]
pub struct QuestionRow {
    pub id: String,
    pub qtype: Option<QType>,
    /// None when the reasoner failed to answer (recorded, not fatal).
    pub predicted: Option<Answer>,
    pub oracle: Option<Answer>,
}

impl QuestionRow {
    /// A question is correct only if the full answer matches (for
    /// multiple-choice: every option).
    pub fn matched(&self) -> Option<bool> {
        match (&self.predicted, &self.oracle) {
            (Some(p), Some(o)) => Some(p == o),
            (None, Some(_)) => Some(false),
            _ => None,
        }
    }

    /// (matching options, total options); single-answer questions count as
    /// one option.
    pub fn option_counts(&self) -> Option<(usize, usize)> {
        match (&self.predicted, &self.oracle) {
            (Some(Answer::Options(p)), Some(Answer::Options(o))) => {
                if p.len() != o.len() {
                    Some((0, o.len()))
                } else {
                    Some((p.iter().zip(o).filter(|(a, b)| a == b).count(), o.len()))
                }
            }
            (None, Some(Answer::Options(o))) => Some((0, o.len())),
            (Some(p), Some(o)) => Some(((p == o) as usize, 1)),
            (None, Some(_)) => Some((0, 1)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub rows: Vec<QuestionRow>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
}

impl Accuracy {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }

    fn add(&mut self, correct: usize, total: usize) {
        self.correct += correct;
        self.total += total;
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.1}% ({}/{})",
            100.0 * self.ratio(),
            self.correct,
            self.total
        )
    }
}

impl RunReport {
    pub fn per_question(&self) -> Accuracy {
        let mut acc = Accuracy::default();
        for row in &self.rows {
            if let Some(m) = row.matched() {
                acc.add(m as usize, 1);
            }
        }
        acc
    }

    pub fn per_option(&self) -> Accuracy {
        let mut acc = Accuracy::default();
        for row in &self.rows {
            if let Some((c, t)) = row.option_counts() {
                acc.add(c, t);
            }
        }
        acc
    }

    pub fn by_type(&self) -> BTreeMap<String, (Accuracy, Accuracy)> {
        let mut out: BTreeMap<String, (Accuracy, Accuracy)> = BTreeMap::new();
        for row in &self.rows {
            let key = row
                .qtype
                .map(|t| t.to_string())
                .unwrap_or_else(|| "unknown".into());
            let entry = out.entry(key).or_default();
            if let Some(m) = row.matched() {
                entry.0.add(m as usize, 1);
            }
            if let Some((c, t)) = row.option_counts() {
                entry.1.add(c, t);
            }
        }
        out
    }

    pub fn unanswered(&self) -> usize {
        self.rows.iter().filter(|r| r.predicted.is_none()).count()
    }

    /// Human-readable summary table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "questions: {}  unanswered: {}\n",
            self.rows.len(),
            self.unanswered()
        ));
        out.push_str(&format!(
            "overall    per ques. {}   per opt. {}\n",
            self.per_question(),
            self.per_option()
        ));
        for (qtype, (pq, po)) in self.by_type() {
            out.push_str(&format!("{qtype:<16} per ques. {pq}   per opt. {po}\n"));
        }
        out
    }
}

/// Compare two aligned answer lists (predicted vs oracle).
pub fn evaluate_answers(
    predicted: &[(String, Option<Answer>)],
    oracle: &[(String, Option<Answer>)],
    qtypes: &BTreeMap<String, QType>,
) -> Result<RunReport, ReportError> {
    if predicted.len() != oracle.len() {
        return Err(ReportError::LengthMismatch {
            left: predicted.len(),
            right: oracle.len(),
        });
    }
    let mut rows = Vec::new();
    for (i, ((pid, p), (oid, o))) in predicted.iter().zip(oracle).enumerate() {
        if pid != oid {
            return Err(ReportError::IdMismatch {
                left: pid.clone(),
                right: oid.clone(),
                row: i,
            });
        }
        rows.push(QuestionRow {
            id: pid.clone(),
            qtype: qtypes.get(pid).copied(),
            predicted: p.clone(),
            oracle: o.clone(),
        });
    }
    Ok(RunReport { rows })
}

/// Serialize answers as `id<TAB>answer` lines; failed questions carry an
/// `error:` marker.
pub fn write_answers(rows: &[(String, Option<Answer>)]) -> String {
    let mut out = String::new();
    for (id, answer) in rows {
        match answer {
            Some(a) => out.push_str(&format!("{id}\t{}\n", a.to_field())),
            None => out.push_str(&format!("{id}\terror:unanswered\n")),
        }
    }
    out
}

/// Parse an answers file; unrecognized fields (including `error:` markers)
/// become None.
pub fn read_answers(text: &str, vocab: &Vocabulary) -> Vec<(String, Option<Answer>)> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((id, field)) => {
                out.push((id.to_string(), Answer::parse_field(field.trim(), vocab)))
            }
            None => out.push((line.to_string(), None)),
        }
    }
    out
}
