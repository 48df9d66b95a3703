//! Question ASTs and answers.

use std::fmt;

use crate::scene::Vocabulary;

/// The queried attribute class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttrKind {
    Color,
    Shape,
    Material,
}

impl AttrKind {
    pub fn word(self) -> &'static str {
        match self {
            AttrKind::Color => "color",
            AttrKind::Shape => "shape",
            AttrKind::Material => "material",
        }
    }

    pub fn pred(self) -> &'static str {
        self.word()
    }
}

/// Attribute constraints identifying objects; every present field must
/// match. An empty filter denotes all objects.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct ObjFilter {
    pub color: Option<String>,
    pub material: Option<String>,
    pub shape: Option<String>,
}

impl ObjFilter {
    pub fn is_empty(&self) -> bool {
        self.color.is_none() && self.material.is_none() && self.shape.is_none()
    }

    /// Adjective words in canonical order (color, material, shape).
    pub fn adjectives(&self) -> Vec<&str> {
        [&self.color, &self.material, &self.shape]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    /// Singular reference: `the [color] [material] (shape | object)`.
    pub fn singular(&self) -> String {
        let mut words = vec!["the"];
        if let Some(c) = &self.color {
            words.push(c);
        }
        if let Some(m) = &self.material {
            words.push(m);
        }
        words.push(self.shape.as_deref().unwrap_or("object"));
        words.join(" ")
    }

    /// Plural form without article: `[color] [material] [shape] objects`.
    pub fn plural(&self) -> String {
        let mut words = self.adjectives();
        words.push("objects");
        words.join(" ")
    }

    /// True when the filter is at least as specific as `other` on every
    /// stated attribute of `other`.
    pub fn refines(&self, other: &ObjFilter) -> bool {
        fn covers(a: &Option<String>, b: &Option<String>) -> bool {
            match b {
                None => true,
                Some(v) => a.as_ref() == Some(v),
            }
        }
        covers(&self.color, &other.color)
            && covers(&self.material, &other.material)
            && covers(&self.shape, &other.shape)
    }
}

/// Object state predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatePred {
    Moving,
    Stationary,
    Present,
}

impl StatePred {
    pub fn word(self) -> &'static str {
        match self {
            StatePred::Moving => "moving",
            StatePred::Stationary => "stationary",
            StatePred::Present => "present",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorKind {
    Enters,
    Exits,
}

impl AnchorKind {
    pub fn word(self) -> &'static str {
        match self {
            AnchorKind::Enters => "enters",
            AnchorKind::Exits => "exits",
        }
    }
}

/// A reference event used as a temporal anchor: the first entry or the last
/// exit of the referenced object.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorEvent {
    pub obj: ObjFilter,
    pub kind: AnchorKind,
}

/// When a state question samples the fluent values.
///
/// `After` samples one frame past the anchor event (when its effects hold);
/// `Before` samples one frame before it.
#[derive(Clone, Debug, PartialEq)]
pub enum TimeRef {
    Begin,
    End,
    Before(AnchorEvent),
    After(AnchorEvent),
}

/// Temporal window over event questions: strictly before or strictly after
/// the anchor event.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    Before(AnchorEvent),
    After(AnchorEvent),
}

/// Event participation pattern in descriptive questions.
#[derive(Clone, Debug, PartialEq)]
pub enum EventClause {
    Enters,
    Exits,
    CollidesWith(ObjFilter),
}

/// The event whose responsibility an explanatory question asks about.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetEvent {
    Exit(ObjFilter),
    Collision(ObjFilter, ObjFilter),
}

/// One candidate answer of an explanatory question.
#[derive(Clone, Debug, PartialEq)]
pub enum CauseOption {
    Object(ObjFilter),
    Entry(ObjFilter),
    Exit(ObjFilter),
    Collision(ObjFilter, ObjFilter),
}

/// One candidate statement of a predictive or counterfactual question.
#[derive(Clone, Debug, PartialEq)]
pub enum EventStatement {
    Enters(ObjFilter),
    Exits(ObjFilter),
    Collides(ObjFilter, ObjFilter),
}

/// The six question families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum QType {
    Count,
    Exist,
    QueryAttribute,
    Explanatory,
    Predictive,
    Counterfactual,
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QType::Count => "count",
            QType::Exist => "exist",
            QType::QueryAttribute => "query_attribute",
            QType::Explanatory => "explanatory",
            QType::Predictive => "predictive",
            QType::Counterfactual => "counterfactual",
        };
        f.write_str(s)
    }
}

/// A parsed question.
#[derive(Clone, Debug, PartialEq)]
pub enum QuestionAst {
    CountState {
        filter: ObjFilter,
        state: StatePred,
        time: TimeRef,
    },
    CountThere {
        filter: ObjFilter,
    },
    ExistState {
        filter: ObjFilter,
        state: StatePred,
        time: TimeRef,
    },
    ExistEvent {
        filter: ObjFilter,
        event: EventClause,
        window: Option<Window>,
    },
    AttrState {
        attr: AttrKind,
        of: ObjFilter,
        state: StatePred,
        time: TimeRef,
    },
    AttrEvent {
        attr: AttrKind,
        of: ObjFilter,
        event: EventClause,
        window: Option<Window>,
    },
    Explanatory {
        target: TargetEvent,
        options: Vec<CauseOption>,
    },
    Predictive {
        options: Vec<EventStatement>,
    },
    Counterfactual {
        remove: ObjFilter,
        options: Vec<EventStatement>,
    },
}

impl QuestionAst {
    pub fn qtype(&self) -> QType {
        match self {
            QuestionAst::CountState { .. } | QuestionAst::CountThere { .. } => QType::Count,
            QuestionAst::ExistState { .. } | QuestionAst::ExistEvent { .. } => QType::Exist,
            QuestionAst::AttrState { .. } | QuestionAst::AttrEvent { .. } => {
                QType::QueryAttribute
            }
            QuestionAst::Explanatory { .. } => QType::Explanatory,
            QuestionAst::Predictive { .. } => QType::Predictive,
            QuestionAst::Counterfactual { .. } => QType::Counterfactual,
        }
    }

    pub fn option_count(&self) -> Option<usize> {
        match self {
            QuestionAst::Explanatory { options, .. } => Some(options.len()),
            QuestionAst::Predictive { options } => Some(options.len()),
            QuestionAst::Counterfactual { options, .. } => Some(options.len()),
            _ => None,
        }
    }
}

/// A one-word answer, or the per-option yes/no list of a multiple-choice
/// question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Count(u64),
    Attr(String),
    Options(Vec<bool>),
}

impl Answer {
    pub fn from_bool(b: bool) -> Answer {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    /// Serialize for the answers file: `yes`, `no`, an integer, an attribute
    /// token, or a comma-joined yes/no list.
    pub fn to_field(&self) -> String {
        match self {
            Answer::Yes => "yes".into(),
            Answer::No => "no".into(),
            Answer::Count(n) => n.to_string(),
            Answer::Attr(a) => a.clone(),
            Answer::Options(v) => v
                .iter()
                .map(|&b| if b { "yes" } else { "no" })
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn parse_field(field: &str, vocab: &Vocabulary) -> Option<Answer> {
        match field {
            "yes" => return Some(Answer::Yes),
            "no" => return Some(Answer::No),
            _ => {}
        }
        if field.contains(',') {
            let mut opts = Vec::new();
            for part in field.split(',') {
                match part {
                    "yes" => opts.push(true),
                    "no" => opts.push(false),
                    _ => return None,
                }
            }
            return Some(Answer::Options(opts));
        }
        if let Ok(n) = field.parse::<u64>() {
            return Some(Answer::Count(n));
        }
        if vocab.contains_color(field)
            || vocab.contains_shape(field)
            || vocab.contains_material(field)
        {
            return Some(Answer::Attr(field.to_string()));
        }
        None
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_field())
    }
}
