use nalgebra::Vector3;
use thiserror::Error;

use super::{Channel, ClipError, JointSpec, MotionClip, Skeleton, SkeletonError};

#[derive(Debug, Error, PartialEq)]
pub enum BvhError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("declared {declared} frames but found {actual} data rows")]
    FrameCount { declared: usize, actual: usize },
    #[error("line {line}: expected {expected} channel values, found {found}")]
    ChannelWidth {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: non-finite value `{text}`")]
    NonFinite {
        line: usize,
        column: usize,
        text: String,
    },
    #[error(transparent)]
    Skeleton(#[from] SkeletonError),
    #[error(transparent)]
    Clip(#[from] ClipError),
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

/// Splits a line into whitespace-separated tokens with 1-based columns.
fn split_tokens(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            line: line_no,
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> BvhError {
    BvhError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Tokenizes the hierarchy section. Joint names run to the end of the line
/// or to an opening brace, so they may contain spaces.
fn tokenize_hierarchy<'a>(lines: &[(usize, &'a str)]) -> Vec<Token<'a>> {
    let mut tokens = Vec::new();
    for &(line_no, line) in lines {
        let parts = split_tokens(line, line_no);
        let Some(first) = parts.first() else { continue };
        if first.text == "ROOT" || first.text == "JOINT" {
            tokens.push(first.clone());
            let kw_end = line.find(first.text).unwrap_or(0) + first.text.len();
            let rest = &line[kw_end..];
            let (name_part, brace) = match rest.find('{') {
                Some(b) => (&rest[..b], Some(kw_end + b)),
                None => (rest, None),
            };
            let trimmed = name_part.trim();
            if !trimmed.is_empty() {
                let lead = name_part.len() - name_part.trim_start().len();
                let byte = kw_end + lead;
                tokens.push(Token {
                    text: trimmed,
                    line: line_no,
                    column: line[..byte].chars().count() + 1,
                });
            }
            if let Some(b) = brace {
                tokens.push(Token {
                    text: "{",
                    line: line_no,
                    column: line[..b].chars().count() + 1,
                });
                tokens.extend(split_tokens(&line[b + 1..], line_no).into_iter().map(|mut t| {
                    t.column += line[..=b].chars().count();
                    t
                }));
            }
        } else {
            tokens.extend(parts);
        }
    }
    tokens
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    eof_line: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, BvhError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(syntax(self.eof_line, 1, format!("unexpected end of hierarchy, expected {what}"))),
        }
    }

    fn expect(&mut self, text: &str) -> Result<Token<'a>, BvhError> {
        let t = self.next(&format!("`{text}`"))?;
        if t.text == text {
            Ok(t)
        } else {
            Err(syntax(t.line, t.column, format!("expected `{text}`, found `{}`", t.text)))
        }
    }

    fn number(&mut self) -> Result<f64, BvhError> {
        let t = self.next("a number")?;
        parse_number(&t)
    }
}

fn parse_number(t: &Token<'_>) -> Result<f64, BvhError> {
    let v: f64 = t
        .text
        .parse()
        .map_err(|_| syntax(t.line, t.column, format!("invalid number `{}`", t.text)))?;
    if !v.is_finite() {
        return Err(BvhError::NonFinite {
            line: t.line,
            column: t.column,
            text: t.text.to_string(),
        });
    }
    Ok(v)
}

fn parse_vec3(cur: &mut Cursor<'_>) -> Result<Vector3<f64>, BvhError> {
    Ok(Vector3::new(cur.number()?, cur.number()?, cur.number()?))
}

fn parse_joint(
    cur: &mut Cursor<'_>,
    parent: Option<usize>,
    out: &mut Vec<JointSpec>,
) -> Result<(), BvhError> {
    let name = cur.next("a joint name")?;
    if name.text == "{" {
        return Err(syntax(name.line, name.column, "missing joint name"));
    }
    cur.expect("{")?;
    cur.expect("OFFSET")?;
    let offset = parse_vec3(cur)?;
    let mut channels = Vec::new();
    if cur.peek().is_some_and(|t| t.text == "CHANNELS") {
        cur.pos += 1;
        let count_tok = cur.next("a channel count")?;
        let count: usize = count_tok.text.parse().map_err(|_| {
            syntax(count_tok.line, count_tok.column, format!("invalid channel count `{}`", count_tok.text))
        })?;
        for _ in 0..count {
            let t = cur.next("a channel name")?;
            let ch = Channel::from_keyword(t.text)
                .ok_or_else(|| syntax(t.line, t.column, format!("unknown channel `{}`", t.text)))?;
            channels.push(ch);
        }
    }
    let index = out.len();
    out.push(JointSpec {
        name: name.text.to_string(),
        parent,
        offset,
        channels,
        end_site: None,
    });
    loop {
        let t = cur.next("`JOINT`, `End Site` or `}`")?;
        match t.text {
            "JOINT" => parse_joint(cur, Some(index), out)?,
            "End" => {
                cur.expect("Site")?;
                cur.expect("{")?;
                cur.expect("OFFSET")?;
                let site = parse_vec3(cur)?;
                cur.expect("}")?;
                if out[index].end_site.is_some() {
                    return Err(syntax(t.line, t.column, "joint has more than one end site"));
                }
                out[index].end_site = Some(site);
            }
            "}" => return Ok(()),
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("expected `JOINT`, `End Site` or `}}`, found `{other}`"),
                ))
            }
        }
    }
}

/// Parses a complete BVH document.
pub fn parse_bvh(text: &str) -> Result<MotionClip, BvhError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut iter = lines.iter().copied().skip_while(|(_, l)| l.trim().is_empty());
    let first = iter.next().ok_or_else(|| syntax(1, 1, "empty document"))?;
    if first.1.trim() != "HIERARCHY" {
        let col = first.1.len() - first.1.trim_start().len() + 1;
        return Err(syntax(first.0, col, "expected `HIERARCHY`"));
    }
    let motion_at = lines
        .iter()
        .position(|(_, l)| l.trim() == "MOTION")
        .ok_or_else(|| syntax(lines.len() + 1, 1, "missing `MOTION` section"))?;
    let hierarchy_start = lines.iter().position(|(n, _)| *n == first.0).unwrap() + 1;
    let hierarchy = &lines[hierarchy_start..motion_at];

    let mut cur = Cursor {
        tokens: tokenize_hierarchy(hierarchy),
        pos: 0,
        eof_line: lines[motion_at].0,
    };
    cur.expect("ROOT")?;
    let mut specs = Vec::new();
    parse_joint(&mut cur, None, &mut specs)?;
    if let Some(t) = cur.peek() {
        return Err(syntax(t.line, t.column, format!("unexpected `{}` after root joint", t.text)));
    }
    let skeleton = Skeleton::new(specs)?;
    let width = skeleton.channel_count();

    let mut motion = lines[motion_at + 1..]
        .iter()
        .copied()
        .filter(|(_, l)| !l.trim().is_empty());
    let eof = lines.len() + 1;

    let (frames_line, frames_text) = motion
        .next()
        .ok_or_else(|| syntax(eof, 1, "missing `Frames:` line"))?;
    let declared = header_value(frames_line, frames_text, &["Frames:"])?;
    let declared: usize = declared
        .text
        .parse()
        .map_err(|_| syntax(declared.line, declared.column, format!("invalid frame count `{}`", declared.text)))?;

    let (time_line, time_text) = motion
        .next()
        .ok_or_else(|| syntax(eof, 1, "missing `Frame Time:` line"))?;
    let ft = header_value(time_line, time_text, &["Frame", "Time:"])?;
    let frame_time = parse_number(&ft)?;

    let mut data = Vec::with_capacity(declared * width);
    let mut rows = 0;
    for (line_no, line) in motion {
        let values = split_tokens(line, line_no);
        if values.len() != width {
            return Err(BvhError::ChannelWidth {
                line: line_no,
                expected: width,
                found: values.len(),
            });
        }
        for t in &values {
            data.push(parse_number(t)?);
        }
        rows += 1;
    }
    if rows != declared {
        return Err(BvhError::FrameCount {
            declared,
            actual: rows,
        });
    }
    Ok(MotionClip::new(skeleton, frame_time, data)?)
}

/// Reads the value after a `Frames:` or `Frame Time:` label. The label may
/// be glued to the value (`Frames:12`) and separated by tabs or spaces.
fn header_value<'a>(line_no: usize, line: &'a str, label: &[&str]) -> Result<Token<'a>, BvhError> {
    let tokens = split_tokens(line, line_no);
    let mut it = tokens.into_iter();
    let mut last = None;
    for (k, want) in label.iter().enumerate() {
        let Some(t) = it.next() else {
            return Err(syntax(line_no, 1, format!("expected `{}`", label.join(" "))));
        };
        if k + 1 == label.len() && t.text.len() > want.len() && t.text.starts_with(want) {
            let col = t.column + want.len();
            return Ok(Token {
                text: &t.text[want.len()..],
                line: line_no,
                column: col,
            });
        }
        if t.text != *want {
            return Err(syntax(t.line, t.column, format!("expected `{}`", label.join(" "))));
        }
        last = Some(t);
    }
    let value = it.next().ok_or_else(|| {
        let col = last.map_or(1, |t| t.column + t.text.len());
        syntax(line_no, col, "missing value")
    })?;
    if let Some(extra) = it.next() {
        return Err(syntax(extra.line, extra.column, format!("unexpected `{}`", extra.text)));
    }
    Ok(value)
}
