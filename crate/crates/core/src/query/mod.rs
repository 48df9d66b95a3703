//! Question parsing, compilation to `answer(Q, X)` goal programs, answer
//! extraction, and question-file IO.

mod answer;
mod ast;
mod compile;
mod grammar;
pub mod whatif;

pub use answer::{
    answer, answer_batch, answer_questions, build_scene_model, compile_batch,
    make_question_facts, AnswerError, CompiledBatch,
};
pub use ast::{
    AnchorEvent, AnchorKind, Answer, AttrKind, CauseOption, EventClause, EventStatement,
    ObjFilter, QType, QuestionAst, StatePred, TargetEvent, TimeRef, Window,
};
pub use compile::{compile, CompileError, GoalKind, GoalProgram};
pub use grammar::{parse_question, render, QuestionParseError};

/// One question per line, optional `# id` suffix; blank lines and `#`-only
/// comment lines are skipped. Questions that fail to parse are reported per
/// line, not fatally.
pub fn read_question_file(
    text: &str,
    vocab: &crate::scene::Vocabulary,
) -> Vec<(String, Result<QuestionAst, QuestionParseError>)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let (body, id) = match raw.split_once('#') {
            Some((q, id)) => (q.trim(), id.trim().to_string()),
            None => (raw.trim(), String::new()),
        };
        if body.is_empty() {
            continue;
        }
        let id = if id.is_empty() { format!("q{i}") } else { id };
        out.push((id, parse_question(body, vocab)));
    }
    out
}

/// Render a question file line.
pub fn question_line(id: &str, ast: &QuestionAst) -> String {
    format!("{} # {id}", render(ast))
}
