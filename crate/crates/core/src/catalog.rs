//! Registry of surveyed public locomotion datasets, with a small query
//! language and aggregate counts that keep unknown values separate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const SHIPPED: &str = include_str!("../data/catalog.toml");

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("malformed catalog: {0}")]
    Malformed(String),
    #[error("dataset {name:?}: {message}")]
    Invalid { name: String, message: String },
}

#[derive(Debug, Error, PartialEq)]
#[error("query error at position {position}: {message}")]
pub struct QueryError {
    pub position: usize,
    pub message: String,
}

/// A count that a dataset may not disclose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Known(u32),
    Unknown,
}

impl Count {
    pub fn known(self) -> Option<u32> {
        match self {
            Count::Known(n) => Some(n),
            Count::Unknown => None,
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Known(n) => write!(f, "{n}"),
            Count::Unknown => f.write_str("unknown"),
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Count::Known(n) => s.serialize_u32(*n),
            Count::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(u32),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(n) => Ok(Count::Known(n)),
            Raw::Text(t) if t.eq_ignore_ascii_case("unknown") => Ok(Count::Unknown),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a count or \"unknown\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Clinical,
    GeneralPurpose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyParts {
    FullBody,
    LowerLimbs,
    LowerLimbsAndTrunk,
    Feet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OldStyle {
    Yes,
    No,
    Unknown,
}

macro_rules! label {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl $t {
            pub fn label(self) -> &'static str {
                match self { $(Self::$v => $s),* }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

label!(Category { Clinical => "clinical", GeneralPurpose => "general purpose" });
label!(BodyParts {
    FullBody => "full body",
    LowerLimbs => "lower limbs",
    LowerLimbsAndTrunk => "lower limbs and trunk",
    Feet => "feet",
});
label!(OldStyle { Yes => "yes", No => "no", Unknown => "unknown" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub name: String,
    pub category: Category,
    pub participants: Count,
    pub older_adults: Count,
    pub body_parts: BodyParts,
    #[serde(default)]
    pub motor_skills: Vec<String>,
    pub has_old_style: OldStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old_style_minutes: Option<f64>,
    pub citation: String,
}

/// Headline figures quoted alongside the survey, kept for comparison with
/// the per-record aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyFacts {
    pub reported_dataset_count: usize,
    pub reported_clinical: usize,
    pub reported_general_purpose: usize,
    pub reported_participants_at_least: u32,
    pub reported_older_adults: u32,
    pub reported_full_body_older_adults: u32,
    pub reported_old_style_datasets: usize,
    pub old_style_minutes_upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survey: Option<SurveyFacts>,
    #[serde(rename = "dataset")]
    pub records: Vec<DatasetRecord>,
}

impl DatasetRecord {
    fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |message: String| CatalogError::Invalid {
            name: self.name.clone(),
            message,
        };
        if let (Count::Known(old), Count::Known(total)) = (self.older_adults, self.participants) {
            if old > total {
                return Err(invalid(format!("{old} older adults exceed {total} participants")));
            }
        }
        match (self.has_old_style, self.old_style_minutes) {
            (OldStyle::Yes, _) | (_, None) => {}
            (other, Some(_)) => {
                return Err(invalid(format!(
                    "old-style minutes given but has_old_style is {other}"
                )))
            }
        }
        if let Some(m) = self.old_style_minutes {
            if !(m.is_finite() && m >= 0.0) {
                return Err(invalid(format!("old-style minutes must be non-negative, got {m}")));
            }
        }
        Ok(())
    }
}

/// Parses and validates a catalog document.
pub fn load_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let catalog: Catalog = toml::from_str(text).map_err(|e| CatalogError::Malformed(e.to_string()))?;
    let mut seen = std::collections::BTreeSet::new();
    for r in &catalog.records {
        r.validate()?;
        if !seen.insert(r.name.as_str()) {
            return Err(CatalogError::Invalid {
                name: r.name.clone(),
                message: "duplicate dataset name".into(),
            });
        }
    }
    Ok(catalog)
}

/// The catalog compiled into the library.
pub fn shipped_catalog() -> Catalog {
    load_catalog(SHIPPED).expect("shipped catalog is valid")
}

pub fn shipped_catalog_text() -> &'static str {
    SHIPPED
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownSum {
    pub known_sum: u32,
    pub unknown: usize,
}

impl KnownSum {
    fn of(counts: impl Iterator<Item = Count>) -> Self {
        counts.fold(KnownSum { known_sum: 0, unknown: 0 }, |acc, c| match c {
            Count::Known(n) => KnownSum {
                known_sum: acc.known_sum + n,
                ..acc
            },
            Count::Unknown => KnownSum {
                unknown: acc.unknown + 1,
                ..acc
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub records: usize,
    pub by_category: BTreeMap<String, usize>,
    pub by_body_parts: BTreeMap<String, usize>,
    pub participants: KnownSum,
    pub older_adults: KnownSum,
    pub full_body_older_adults: KnownSum,
    pub old_style_datasets: usize,
    pub old_style_minutes: f64,
}

pub fn aggregates(records: &[DatasetRecord]) -> CatalogSummary {
    let mut by_category = BTreeMap::new();
    let mut by_body_parts = BTreeMap::new();
    for r in records {
        *by_category.entry(r.category.label().to_string()).or_insert(0) += 1;
        *by_body_parts.entry(r.body_parts.label().to_string()).or_insert(0) += 1;
    }
    CatalogSummary {
        records: records.len(),
        by_category,
        by_body_parts,
        participants: KnownSum::of(records.iter().map(|r| r.participants)),
        older_adults: KnownSum::of(records.iter().map(|r| r.older_adults)),
        full_body_older_adults: KnownSum::of(
            records
                .iter()
                .filter(|r| r.body_parts == BodyParts::FullBody)
                .map(|r| r.older_adults),
        ),
        old_style_datasets: records.iter().filter(|r| r.has_old_style == OldStyle::Yes).count(),
        old_style_minutes: records.iter().filter_map(|r| r.old_style_minutes).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Name,
    Category,
    Participants,
    OlderAdults,
    BodyParts,
    MotorSkills,
    HasOldStyle,
    OldStyleMinutes,
    Citation,
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalize(s).as_str() {
            "name" => Field::Name,
            "category" => Field::Category,
            "participants" => Field::Participants,
            "older adults" => Field::OlderAdults,
            "body parts" => Field::BodyParts,
            "motor skills" => Field::MotorSkills,
            "has old style" | "old style" => Field::HasOldStyle,
            "old style minutes" | "minutes" => Field::OldStyleMinutes,
            "citation" => Field::Citation,
            _ => return Err(format!("unknown field {s:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Contains,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Clause { field: Field, op: Op, value: String },
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

fn normalize(s: &str) -> String {
    s.trim().to_lowercase().replace(['_', '-'], " ")
}

fn compare_number(actual: Option<f64>, op: Op, value: &str) -> bool {
    let (Some(a), Ok(v)) = (actual, value.parse::<f64>()) else {
        return false;
    };
    match op {
        Op::Eq => a == v,
        Op::Ne => a != v,
        Op::Lt => a < v,
        Op::Le => a <= v,
        Op::Gt => a > v,
        Op::Ge => a >= v,
        Op::Contains => false,
    }
}

fn compare_text(actual: &str, op: Op, value: &str) -> bool {
    let (a, v) = (normalize(actual), normalize(value));
    match op {
        Op::Eq => a == v,
        Op::Ne => a != v,
        Op::Contains => a.contains(&v),
        Op::Lt => a < v,
        Op::Le => a <= v,
        Op::Gt => a > v,
        Op::Ge => a >= v,
    }
}

impl Predicate {
    /// Comparisons against unknown values are false.
    pub fn matches(&self, r: &DatasetRecord) -> bool {
        match self {
            Predicate::Not(p) => !p.matches(r),
            Predicate::And(a, b) => a.matches(r) && b.matches(r),
            Predicate::Or(a, b) => a.matches(r) || b.matches(r),
            Predicate::Clause { field, op, value } => match field {
                Field::Name => compare_text(&r.name, *op, value),
                Field::Citation => compare_text(&r.citation, *op, value),
                Field::Category => compare_text(r.category.label(), *op, value),
                Field::BodyParts => compare_text(r.body_parts.label(), *op, value),
                Field::HasOldStyle => {
                    r.has_old_style != OldStyle::Unknown && compare_text(r.has_old_style.label(), *op, value)
                }
                Field::Participants => compare_number(r.participants.known().map(f64::from), *op, value),
                Field::OlderAdults => compare_number(r.older_adults.known().map(f64::from), *op, value),
                Field::OldStyleMinutes => compare_number(r.old_style_minutes, *op, value),
                Field::MotorSkills => match op {
                    Op::Ne => !r.motor_skills.iter().any(|s| compare_text(s, Op::Eq, value)),
                    _ => r.motor_skills.iter().any(|s| compare_text(s, *op, value)),
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Quoted(String),
    Op(Op),
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<(usize, Token)>, QueryError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|x| x.1);
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((pos, Token::Open));
                i += 1;
            }
            ')' => {
                out.push((pos, Token::Close));
                i += 1;
            }
            '=' | '~' => {
                out.push((pos, Token::Op(if c == '=' { Op::Eq } else { Op::Contains })));
                i += if next == Some('=') && c == '=' { 2 } else { 1 };
            }
            '!' | '<' | '>' => {
                let (op, width) = match (c, next) {
                    ('!', Some('=')) => (Op::Ne, 2),
                    ('<', Some('=')) => (Op::Le, 2),
                    ('>', Some('=')) => (Op::Ge, 2),
                    ('<', _) => (Op::Lt, 1),
                    ('>', _) => (Op::Gt, 1),
                    _ => {
                        return Err(QueryError {
                            position: pos,
                            message: "expected '=' after '!'".into(),
                        })
                    }
                };
                out.push((pos, Token::Op(op)));
                i += width;
            }
            '"' | '\'' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1 != c {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(QueryError {
                        position: pos,
                        message: "unterminated string".into(),
                    });
                }
                out.push((pos, Token::Quoted(chars[i + 1..j].iter().map(|x| x.1).collect())));
                i = j + 1;
            }
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].1.is_whitespace() && !"()=~!<>\"'".contains(chars[j].1) {
                    j += 1;
                }
                out.push((pos, Token::Word(chars[i..j].iter().map(|x| x.1).collect())));
                i = j;
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|t| &t.1)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end, |t| t.0)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError {
            position: self.position(),
            message: message.into(),
        })
    }

    fn keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Token::Word(w)) if w.eq_ignore_ascii_case(k))
    }

    fn or(&mut self) -> Result<Predicate, QueryError> {
        let mut left = self.and()?;
        while self.keyword("or") {
            self.at += 1;
            left = Predicate::Or(Box::new(left), Box::new(self.and()?));
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Predicate, QueryError> {
        let mut left = self.unary()?;
        while self.keyword("and") {
            self.at += 1;
            left = Predicate::And(Box::new(left), Box::new(self.unary()?));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Predicate, QueryError> {
        if self.keyword("not") {
            self.at += 1;
            return Ok(Predicate::Not(Box::new(self.unary()?)));
        }
        if self.peek() == Some(&Token::Open) {
            self.at += 1;
            let inner = self.or()?;
            if self.peek() != Some(&Token::Close) {
                return self.error("expected ')'");
            }
            self.at += 1;
            return Ok(inner);
        }
        self.clause()
    }

    fn clause(&mut self) -> Result<Predicate, QueryError> {
        let field = match self.peek() {
            Some(Token::Word(w)) => match w.parse::<Field>() {
                Ok(f) => f,
                Err(e) => return self.error(e),
            },
            _ => return self.error("expected a field name"),
        };
        self.at += 1;
        let op = match self.peek() {
            Some(Token::Op(op)) => *op,
            _ => return self.error("expected a comparison operator"),
        };
        self.at += 1;
        let value = match self.peek() {
            Some(Token::Word(w)) | Some(Token::Quoted(w)) => w.clone(),
            _ => return self.error("expected a value"),
        };
        self.at += 1;
        Ok(Predicate::Clause { field, op, value })
    }
}

impl FromStr for Predicate {
    type Err = QueryError;

    /// Parses expressions such as
    /// `older_adults > 0 and body_parts = "full body"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            tokens: tokenize(s)?,
            at: 0,
            end: s.len(),
        };
        let pred = p.or()?;
        if p.at != p.tokens.len() {
            return p.error("unexpected trailing input");
        }
        Ok(pred)
    }
}

/// Records matching `predicate`, in catalog order.
pub fn query<'a>(records: &'a [DatasetRecord], predicate: &Predicate) -> Vec<&'a DatasetRecord> {
    records.iter().filter(|r| predicate.matches(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(records: &[DatasetRecord], q: &str) -> Vec<String> {
        query(records, &q.parse().unwrap()).iter().map(|r| r.name.clone()).collect()
    }

    #[test]
    fn shipped_catalog_loads() {
        let c = shipped_catalog();
        assert_eq!(c.records.len(), 41);
        let toronto = c.records.iter().find(|r| r.name.starts_with("Toronto")).unwrap();
        assert_eq!(toronto.older_adults, Count::Known(14));
        assert_eq!(toronto.participants, Count::Known(14));
        assert_eq!(toronto.body_parts, BodyParts::LowerLimbs);
    }

    #[test]
    fn older_exceeding_total_is_rejected() {
        let text = r#"
[[dataset]]
name = "Bad"
category = "clinical"
participants = 3
older_adults = 5
body_parts = "feet"
has_old_style = "no"
citation = "x"
"#;
        assert!(matches!(load_catalog(text), Err(CatalogError::Invalid { name, .. }) if name == "Bad"));
    }

    #[test]
    fn minutes_require_old_style() {
        let text = r#"
[[dataset]]
name = "Bad"
category = "clinical"
participants = 3
older_adults = "unknown"
body_parts = "feet"
has_old_style = "unknown"
old_style_minutes = 1.0
citation = "x"
"#;
        assert!(matches!(load_catalog(text), Err(CatalogError::Invalid { .. })));
    }

    #[test]
    fn queries() {
        let c = shipped_catalog();
        assert_eq!(
            names(&c.records, "older_adults > 0 and body_parts = \"full body\""),
            ["Lencioni", "Moore", "Santos", "Tamaya"]
        );
        assert_eq!(names(&c.records, "has_old_style = yes"), ["Xia", "BFA", "100style", "CMU MoCap"]);
        assert!(names(&c.records, "participants < 0").is_empty());
        assert_eq!(names(&c.records, "(name ~ toronto) or citation = Li2021").len(), 2);
        assert_eq!(names(&c.records, "motor_skills = walking"), ["Wang", "Uhlrich", "Li"]);
    }

    #[test]
    fn unknown_values_never_match() {
        let c = shipped_catalog();
        let q = "older_adults >= 0";
        let p = names(&c.records, q);
        let n = names(&c.records, &format!("not ({q})"));
        assert_eq!(p.len() + n.len(), 41);
        assert!(n.contains(&"Xia".to_string()));
    }

    #[test]
    fn malformed_queries() {
        for q in ["", "older_adults >", "age > 3", "name = x and", "(name = x", "name ! x", "name = \"x"] {
            assert!(q.parse::<Predicate>().is_err(), "{q}");
        }
    }

    #[test]
    fn aggregate_counts() {
        let s = aggregates(&shipped_catalog().records);
        assert_eq!(s.by_category["clinical"], 19);
        assert_eq!(s.by_category["general purpose"], 22);
        assert_eq!(s.older_adults.known_sum, 121);
        assert_eq!(s.participants, KnownSum { known_sum: 998, unknown: 1 });
        assert_eq!(s.full_body_older_adults.known_sum, 68);
        assert!((s.old_style_minutes - 11.65).abs() < 1e-9);
    }
}
