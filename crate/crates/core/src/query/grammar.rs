//! The question template grammar: rendering and parsing.
//!
//! The grammar is small and deliberately rigid; parsing is recursive descent
//! with one token of lookahead and no backtracking, so every sentence has
//! exactly one parse. The authoritative grammar definition lives in
//! `docs/grammar.md`; [`render`] and [`parse_question`] are exact inverses
//! on the language it generates.

use thiserror::Error;

use crate::scene::Vocabulary;

use super::ast::*;

#[derive(Debug, Error, PartialEq)]
pub enum QuestionParseError {
    #[error("no template match at word {position} (`{found}`): {msg}")]
    NoMatch {
        position: usize,
        found: String,
        msg: String,
    },
    #[error("unknown attribute token `{token}` at word {position}")]
    UnknownAttribute { position: usize, token: String },
    #[error("multiple-choice question needs at least 2 options, found {0}")]
    TooFewOptions(usize),
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_timeref(t: &TimeRef) -> String {
    match t {
        TimeRef::Begin => "when the video begins".into(),
        TimeRef::End => "when the video ends".into(),
        TimeRef::Before(a) => format!("before {} {}", a.obj.singular(), a.kind.word()),
        TimeRef::After(a) => format!("after {} {}", a.obj.singular(), a.kind.word()),
    }
}

fn render_window(w: &Window) -> String {
    match w {
        Window::Before(a) => format!("before {} {}", a.obj.singular(), a.kind.word()),
        Window::After(a) => format!("after {} {}", a.obj.singular(), a.kind.word()),
    }
}

fn render_event_clause(e: &EventClause) -> String {
    match e {
        EventClause::Enters => "enters".into(),
        EventClause::Exits => "exits".into(),
        EventClause::CollidesWith(f) => format!("collides with {}", f.singular()),
    }
}

fn render_cause_option(o: &CauseOption) -> String {
    match o {
        CauseOption::Object(f) => f.singular(),
        CauseOption::Entry(f) => format!("the entry of {}", f.singular()),
        CauseOption::Exit(f) => format!("the exit of {}", f.singular()),
        CauseOption::Collision(a, b) => {
            format!("the collision of {} with {}", a.singular(), b.singular())
        }
    }
}

fn render_statement(s: &EventStatement) -> String {
    match s {
        EventStatement::Enters(f) => format!("{} enters", f.singular()),
        EventStatement::Exits(f) => format!("{} exits", f.singular()),
        EventStatement::Collides(a, b) => {
            format!("{} collides with {}", a.singular(), b.singular())
        }
    }
}

/// Render a question in the template grammar.
pub fn render(ast: &QuestionAst) -> String {
    match ast {
        QuestionAst::CountState {
            filter,
            state,
            time,
        } => format!(
            "How many {} are {} {}?",
            filter.plural(),
            state.word(),
            render_timeref(time)
        ),
        QuestionAst::CountThere { filter } => {
            format!("How many {} are there?", filter.plural())
        }
        QuestionAst::ExistState {
            filter,
            state,
            time,
        } => format!(
            "Are there any {} {} {}?",
            filter.plural(),
            state.word(),
            render_timeref(time)
        ),
        QuestionAst::ExistEvent {
            filter,
            event,
            window,
        } => {
            let mut s = format!(
                "Are there any {} that {}",
                filter.plural(),
                render_event_clause(event)
            );
            if let Some(w) = window {
                s.push(' ');
                s.push_str(&render_window(w));
            }
            s.push('?');
            s
        }
        QuestionAst::AttrState {
            attr,
            of,
            state,
            time,
        } => format!(
            "What is the {} of {} that is {} {}?",
            attr.word(),
            of.singular(),
            state.word(),
            render_timeref(time)
        ),
        QuestionAst::AttrEvent {
            attr,
            of,
            event,
            window,
        } => {
            let mut s = format!(
                "What is the {} of {} that {}",
                attr.word(),
                of.singular(),
                render_event_clause(event)
            );
            if let Some(w) = window {
                s.push(' ');
                s.push_str(&render_window(w));
            }
            s.push('?');
            s
        }
        QuestionAst::Explanatory { target, options } => {
            let t = match target {
                TargetEvent::Exit(f) => format!("the exit of {}", f.singular()),
                TargetEvent::Collision(a, b) => {
                    format!("the collision of {} with {}", a.singular(), b.singular())
                }
            };
            let mut s = format!("Which of the following is responsible for {t}?");
            for o in options {
                s.push_str(" | ");
                s.push_str(&render_cause_option(o));
            }
            s
        }
        QuestionAst::Predictive { options } => {
            let mut s = "Which of the following happens after the video ends?".to_string();
            for o in options {
                s.push_str(" | ");
                s.push_str(&render_statement(o));
            }
            s
        }
        QuestionAst::Counterfactual { remove, options } => {
            let mut s = format!(
                "Without {}, which of the following happens?",
                remove.singular()
            );
            for o in options {
                s.push_str(" | ");
                s.push_str(&render_statement(o));
            }
            s
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    toks: Vec<String>,
    pos: usize,
    vocab: &'a Vocabulary,
}

impl<'a> Cursor<'a> {
    fn new(text: &str, vocab: &'a Vocabulary) -> Self {
        let mut toks = Vec::new();
        for raw in text.split_whitespace() {
            let mut word = raw;
            let mut trailing = Vec::new();
            while let Some(stripped) = word
                .strip_suffix('?')
                .map(|w| (w, "?"))
                .or_else(|| word.strip_suffix(',').map(|w| (w, ",")))
            {
                trailing.push(stripped.1);
                word = stripped.0;
            }
            if !word.is_empty() {
                toks.push(word.to_string());
            }
            for t in trailing.into_iter().rev() {
                toks.push(t.to_string());
            }
        }
        Cursor {
            toks,
            pos: 0,
            vocab,
        }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn next(&mut self) -> Option<&str> {
        let t = self.toks.get(self.pos).map(String::as_str);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> QuestionParseError {
        QuestionParseError::NoMatch {
            position: self.pos,
            found: self.peek().unwrap_or("<end>").to_string(),
            msg: msg.into(),
        }
    }

    fn expect(&mut self, word: &str) -> Result<(), QuestionParseError> {
        if self.peek() == Some(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{word}`")))
        }
    }

    fn expect_seq(&mut self, words: &[&str]) -> Result<(), QuestionParseError> {
        for w in words {
            self.expect(w)?;
        }
        Ok(())
    }

    /// Attribute class of a word: 0 color, 1 material, 2 shape.
    fn attr_class(&self, word: &str) -> Option<usize> {
        if self.vocab.contains_color(word) {
            Some(0)
        } else if self.vocab.contains_material(word) {
            Some(1)
        } else if self.vocab.contains_shape(word) {
            Some(2)
        } else {
            None
        }
    }

    /// `[color] [material] [shape] objects` (plural, no article).
    fn parse_filter_plural(&mut self) -> Result<ObjFilter, QuestionParseError> {
        let mut filter = ObjFilter::default();
        let mut last_class = -1i32;
        loop {
            match self.peek() {
                Some("objects") => {
                    self.pos += 1;
                    return Ok(filter);
                }
                Some(word) => {
                    let class = self.attr_class(word).ok_or_else(|| {
                        QuestionParseError::UnknownAttribute {
                            position: self.pos,
                            token: word.to_string(),
                        }
                    })?;
                    if (class as i32) <= last_class {
                        return Err(self.err("attributes must appear as color, material, shape"));
                    }
                    last_class = class as i32;
                    let word = word.to_string();
                    self.pos += 1;
                    match class {
                        0 => filter.color = Some(word),
                        1 => filter.material = Some(word),
                        _ => filter.shape = Some(word),
                    }
                }
                None => return Err(self.err("expected `objects`")),
            }
        }
    }

    /// `the [color] [material] (shape | object)` (singular with article).
    fn parse_singular(&mut self) -> Result<ObjFilter, QuestionParseError> {
        self.expect("the")?;
        self.parse_singular_rest()
    }

    /// Singular form after the article.
    fn parse_singular_rest(&mut self) -> Result<ObjFilter, QuestionParseError> {
        let mut filter = ObjFilter::default();
        let mut last_class = -1i32;
        loop {
            match self.peek() {
                Some("object") => {
                    self.pos += 1;
                    return Ok(filter);
                }
                Some(word) => {
                    let class = self.attr_class(word).ok_or_else(|| {
                        QuestionParseError::UnknownAttribute {
                            position: self.pos,
                            token: word.to_string(),
                        }
                    })?;
                    if (class as i32) <= last_class {
                        return Err(self.err("attributes must appear as color, material, shape"));
                    }
                    let word = word.to_string();
                    self.pos += 1;
                    if class == 2 {
                        filter.shape = Some(word);
                        return Ok(filter);
                    }
                    last_class = class as i32;
                    if class == 0 {
                        filter.color = Some(word);
                    } else {
                        filter.material = Some(word);
                    }
                }
                None => return Err(self.err("expected a shape or `object`")),
            }
        }
    }

    fn parse_anchor(&mut self) -> Result<AnchorEvent, QuestionParseError> {
        let obj = self.parse_singular()?;
        let kind = match self.next() {
            Some("enters") => AnchorKind::Enters,
            Some("exits") => AnchorKind::Exits,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err("expected `enters` or `exits`"));
            }
        };
        Ok(AnchorEvent { obj, kind })
    }

    fn parse_timeref(&mut self) -> Result<TimeRef, QuestionParseError> {
        match self.next() {
            Some("when") => {
                self.expect_seq(&["the", "video"])?;
                match self.next() {
                    Some("begins") => Ok(TimeRef::Begin),
                    Some("ends") => Ok(TimeRef::End),
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        Err(self.err("expected `begins` or `ends`"))
                    }
                }
            }
            Some("before") => Ok(TimeRef::Before(self.parse_anchor()?)),
            Some("after") => Ok(TimeRef::After(self.parse_anchor()?)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected `when`, `before`, or `after`"))
            }
        }
    }

    fn parse_state(&mut self) -> Result<StatePred, QuestionParseError> {
        match self.next() {
            Some("moving") => Ok(StatePred::Moving),
            Some("stationary") => Ok(StatePred::Stationary),
            Some("present") => Ok(StatePred::Present),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected `moving`, `stationary`, or `present`"))
            }
        }
    }

    fn parse_event_clause(&mut self) -> Result<EventClause, QuestionParseError> {
        match self.next() {
            Some("enters") => Ok(EventClause::Enters),
            Some("exits") => Ok(EventClause::Exits),
            Some("collides") => {
                self.expect("with")?;
                Ok(EventClause::CollidesWith(self.parse_singular()?))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected `enters`, `exits`, or `collides`"))
            }
        }
    }

    fn parse_window_opt(&mut self) -> Result<Option<Window>, QuestionParseError> {
        match self.peek() {
            Some("before") => {
                self.pos += 1;
                Ok(Some(Window::Before(self.parse_anchor()?)))
            }
            Some("after") => {
                self.pos += 1;
                Ok(Some(Window::After(self.parse_anchor()?)))
            }
            _ => Ok(None),
        }
    }

    fn parse_attr_kind(&mut self) -> Result<AttrKind, QuestionParseError> {
        match self.next() {
            Some("color") => Ok(AttrKind::Color),
            Some("shape") => Ok(AttrKind::Shape),
            Some("material") => Ok(AttrKind::Material),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected `color`, `shape`, or `material`"))
            }
        }
    }

    fn parse_cause_option(&mut self) -> Result<CauseOption, QuestionParseError> {
        self.expect("the")?;
        match self.peek() {
            Some("entry") => {
                self.pos += 1;
                self.expect("of")?;
                Ok(CauseOption::Entry(self.parse_singular()?))
            }
            Some("exit") => {
                self.pos += 1;
                self.expect("of")?;
                Ok(CauseOption::Exit(self.parse_singular()?))
            }
            Some("collision") => {
                self.pos += 1;
                self.expect("of")?;
                let a = self.parse_singular()?;
                self.expect("with")?;
                let b = self.parse_singular()?;
                Ok(CauseOption::Collision(a, b))
            }
            _ => Ok(CauseOption::Object(self.parse_singular_rest()?)),
        }
    }

    fn parse_statement(&mut self) -> Result<EventStatement, QuestionParseError> {
        let obj = self.parse_singular()?;
        match self.next() {
            Some("enters") => Ok(EventStatement::Enters(obj)),
            Some("exits") => Ok(EventStatement::Exits(obj)),
            Some("collides") => {
                self.expect("with")?;
                Ok(EventStatement::Collides(obj, self.parse_singular()?))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected `enters`, `exits`, or `collides`"))
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Parse a question sentence (with its ` | option` tail for multiple-choice
/// forms) into its AST.
pub fn parse_question(
    text: &str,
    vocab: &Vocabulary,
) -> Result<QuestionAst, QuestionParseError> {
    let mut c = Cursor::new(text, vocab);
    let ast = match c.peek() {
        Some("How") => {
            c.expect_seq(&["How", "many"])?;
            let filter = c.parse_filter_plural()?;
            c.expect("are")?;
            if c.peek() == Some("there") {
                c.pos += 1;
                c.expect("?")?;
                QuestionAst::CountThere { filter }
            } else {
                let state = c.parse_state()?;
                let time = c.parse_timeref()?;
                c.expect("?")?;
                QuestionAst::CountState {
                    filter,
                    state,
                    time,
                }
            }
        }
        Some("Are") => {
            c.expect_seq(&["Are", "there", "any"])?;
            let filter = c.parse_filter_plural()?;
            if c.peek() == Some("that") {
                c.pos += 1;
                let event = c.parse_event_clause()?;
                let window = c.parse_window_opt()?;
                c.expect("?")?;
                QuestionAst::ExistEvent {
                    filter,
                    event,
                    window,
                }
            } else {
                let state = c.parse_state()?;
                let time = c.parse_timeref()?;
                c.expect("?")?;
                QuestionAst::ExistState {
                    filter,
                    state,
                    time,
                }
            }
        }
        Some("What") => {
            c.expect_seq(&["What", "is", "the"])?;
            let attr = c.parse_attr_kind()?;
            c.expect("of")?;
            let of = c.parse_singular()?;
            c.expect("that")?;
            if c.peek() == Some("is") {
                c.pos += 1;
                let state = c.parse_state()?;
                let time = c.parse_timeref()?;
                c.expect("?")?;
                QuestionAst::AttrState {
                    attr,
                    of,
                    state,
                    time,
                }
            } else {
                let event = c.parse_event_clause()?;
                let window = c.parse_window_opt()?;
                c.expect("?")?;
                QuestionAst::AttrEvent {
                    attr,
                    of,
                    event,
                    window,
                }
            }
        }
        Some("Which") => {
            c.expect_seq(&[
                "Which",
                "of",
                "the",
                "following",
            ])?;
            match c.peek() {
                Some("is") => {
                    c.expect_seq(&["is", "responsible", "for", "the"])?;
                    let target = match c.next() {
                        Some("exit") => {
                            c.expect("of")?;
                            TargetEvent::Exit(c.parse_singular()?)
                        }
                        Some("collision") => {
                            c.expect("of")?;
                            let a = c.parse_singular()?;
                            c.expect("with")?;
                            let b = c.parse_singular()?;
                            TargetEvent::Collision(a, b)
                        }
                        _ => {
                            c.pos = c.pos.saturating_sub(1);
                            return Err(c.err("expected `exit` or `collision`"));
                        }
                    };
                    c.expect("?")?;
                    let mut options = Vec::new();
                    while c.peek() == Some("|") {
                        c.pos += 1;
                        options.push(c.parse_cause_option()?);
                    }
                    if options.len() < 2 {
                        return Err(QuestionParseError::TooFewOptions(options.len()));
                    }
                    QuestionAst::Explanatory { target, options }
                }
                Some("happens") => {
                    c.expect_seq(&["happens", "after", "the", "video", "ends", "?"])?;
                    let mut options = Vec::new();
                    while c.peek() == Some("|") {
                        c.pos += 1;
                        options.push(c.parse_statement()?);
                    }
                    if options.len() < 2 {
                        return Err(QuestionParseError::TooFewOptions(options.len()));
                    }
                    QuestionAst::Predictive { options }
                }
                _ => return Err(c.err("expected `is` or `happens`")),
            }
        }
        Some("Without") => {
            c.expect("Without")?;
            let remove = c.parse_singular()?;
            c.expect(",")?;
            c.expect_seq(&["which", "of", "the", "following", "happens", "?"])?;
            let mut options = Vec::new();
            while c.peek() == Some("|") {
                c.pos += 1;
                options.push(c.parse_statement()?);
            }
            if options.len() < 2 {
                return Err(QuestionParseError::TooFewOptions(options.len()));
            }
            QuestionAst::Counterfactual { remove, options }
        }
        _ => return Err(c.err("expected a question opener (How/Are/What/Which/Without)")),
    };
    if !c.at_end() {
        return Err(c.err("unexpected trailing words"));
    }
    Ok(ast)
}
