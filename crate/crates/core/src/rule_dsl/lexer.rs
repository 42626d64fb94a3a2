//! Splits rule text into sections and flat clause items with nesting depth.

use unicode_normalization::UnicodeNormalization;

use super::{Connective, DslError, Section};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Marker {
    /// `[A]`
    Bracket(String),
    /// `a.` / `ii.`
    List(String),
}

impl Marker {
    pub(crate) fn label(&self) -> &str {
        match self {
            Marker::Bracket(l) | Marker::List(l) => l,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RawItem {
    pub depth: usize,
    pub marker: Option<Marker>,
    pub text: String,
    pub var: Option<String>,
    /// Connective spelled out after the clause (`; or,`), if any.
    pub connective: Option<Connective>,
    /// Raw text ended with `:`.
    pub opener: bool,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct RawSection {
    pub section: Section,
    pub line: usize,
    pub col: usize,
    pub items: Vec<RawItem>,
}

/// NFC plus folding of typographic punctuation to ASCII.
pub(crate) fn normalize(text: &str) -> String {
    text.nfc()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' => '\'',
            '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' => '"',
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}' | '\u{2212}' => '-',
            '\u{00A0}' | '\u{2007}' | '\u{202F}' => ' ',
            other => other,
        })
        .collect::<String>()
        .replace('\u{2026}', "...")
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> DslError {
    DslError::Syntax {
        line,
        col,
        expected: expected.into(),
    }
}

fn is_comment(line: &str) -> bool {
    line.trim_start().starts_with('#')
}

fn keyword_at(chars: &[char], i: usize) -> Option<(Section, usize)> {
    if i > 0 && !chars[i - 1].is_whitespace() {
        return None;
    }
    for s in Section::ALL {
        let kw: Vec<char> = s.keyword().chars().collect();
        let end = i + kw.len();
        if end < chars.len() && chars[i..end] == kw[..] && chars[end] == ':' {
            return Some((s, kw.len() + 1));
        }
    }
    None
}

/// Whether every section header sits alone on its line.
fn is_block_layout(lines: &[&str]) -> bool {
    let mut saw_header = false;
    for line in lines {
        if is_comment(line) {
            continue;
        }
        let trimmed = line.trim();
        let chars: Vec<char> = trimmed.chars().collect();
        for i in 0..chars.len() {
            if let Some((_, len)) = keyword_at(&chars, i) {
                if i != 0 || chars.len() != len {
                    return false;
                }
                saw_header = true;
            }
        }
    }
    saw_header
}

pub(crate) fn scan(text: &str) -> Result<Vec<RawSection>, DslError> {
    let text = normalize(text);
    let lines: Vec<&str> = text.lines().collect();
    if is_block_layout(&lines) {
        scan_block(&lines)
    } else {
        scan_inline(&lines)
    }
}

fn indent_width(line: &str) -> usize {
    let mut w = 0;
    for c in line.chars() {
        match c {
            ' ' => w += 1,
            '\t' => w = (w / 4 + 1) * 4,
            _ => break,
        }
    }
    w
}

fn scan_block(lines: &[&str]) -> Result<Vec<RawSection>, DslError> {
    let mut sections: Vec<RawSection> = Vec::new();
    // indentation of each open nesting level in the current section
    let mut levels: Vec<usize> = Vec::new();
    for (idx, raw) in lines.iter().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || is_comment(raw) {
            continue;
        }
        let trimmed = raw.trim();
        if let Some(kw) = trimmed.strip_suffix(':').and_then(Section::from_keyword) {
            sections.push(RawSection {
                section: kw,
                line,
                col: raw.find(trimmed).unwrap_or(0) + 1,
                items: Vec::new(),
            });
            levels.clear();
            continue;
        }
        let indent = indent_width(raw);
        let lead_chars = raw.chars().take_while(|c| c.is_whitespace()).count();
        let col = lead_chars + 1;
        let Some(current) = sections.last_mut() else {
            return Err(syntax(line, col, "section header `IF:`"));
        };
        let depth = match levels.last() {
            None => {
                levels.push(indent);
                0
            }
            Some(&top) if indent > top => {
                levels.push(indent);
                levels.len() - 1
            }
            Some(_) => {
                while levels.last().is_some_and(|&t| t > indent) {
                    levels.pop();
                }
                if levels.last() != Some(&indent) {
                    return Err(syntax(line, col, "indentation matching an enclosing clause (unbalanced nesting)"));
                }
                levels.len() - 1
            }
        };
        let content: String = raw.chars().skip(lead_chars).collect();
        let (marker, rest, rest_col) = split_marker(&content, line, col)?;
        let (text, var, connective, opener) = parse_content(&rest, line, rest_col)?;
        current.items.push(RawItem {
            depth,
            marker,
            text,
            var,
            connective,
            opener,
            line,
            col,
        });
    }
    Ok(sections)
}

fn is_roman(s: &str) -> bool {
    const ROMAN: [&str; 20] = [
        "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv", "xv", "xvi",
        "xvii", "xviii", "xix", "xx",
    ];
    ROMAN.contains(&s)
}

fn valid_bracket(label: &str) -> bool {
    let mut chars = label.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_digit())
}

/// Reads a leading `[A]` or `a.` / `iv.` marker; a list marker must be followed by clause text.
fn split_marker(content: &str, line: usize, col: usize) -> Result<(Option<Marker>, String, usize), DslError> {
    let chars: Vec<char> = content.chars().collect();
    if chars.first() == Some(&'[') {
        let close = chars
            .iter()
            .position(|&c| c == ']')
            .ok_or_else(|| syntax(line, col, "`]` closing bracket label"))?;
        let label: String = chars[1..close].iter().collect();
        if !valid_bracket(&label) {
            return Err(syntax(line, col, "bracket label such as `[A]`"));
        }
        let skip = close + 1 + chars[close + 1..].iter().take_while(|c| c.is_whitespace()).count();
        return Ok((Some(Marker::Bracket(label)), chars[skip..].iter().collect(), col + skip));
    }
    let run = chars.iter().take_while(|c| c.is_ascii_lowercase()).count();
    if run > 0 && chars.get(run) == Some(&'.') && chars.get(run + 1).is_none_or(|c| c.is_whitespace()) {
        let word: String = chars[..run].iter().collect();
        let skip = run + 1 + chars[run + 1..].iter().take_while(|c| c.is_whitespace()).count();
        let has_text = chars.get(skip).is_some_and(|c| *c != '@');
        if has_text && (run == 1 || is_roman(&word)) {
            return Ok((Some(Marker::List(word)), chars[skip..].iter().collect(), col + skip));
        }
    }
    Ok((None, content.to_string(), col))
}

/// Strips `@var(..)` and the trailing terminator from a clause's text.
type Content = (String, Option<String>, Option<Connective>, bool);

fn parse_content(content: &str, line: usize, col: usize) -> Result<Content, DslError> {
    let mut text = content.to_string();
    let mut var = None;
    while let Some(at) = text.find("@var(") {
        let at_col = col + text[..at].chars().count();
        let close = text[at..]
            .find(')')
            .map(|p| at + p)
            .ok_or_else(|| syntax(line, at_col, "`)` closing @var annotation"))?;
        let name = text[at + 5..close].trim().to_string();
        if name.is_empty() || name.contains(char::is_whitespace) || name.contains(['(', ',']) {
            return Err(syntax(line, at_col, "variable name inside @var(...)"));
        }
        if var.is_some() {
            return Err(syntax(line, at_col, "at most one @var annotation per clause"));
        }
        var = Some(name);
        text.replace_range(at..=close, "");
    }
    let mut s = text.trim_end();
    let opener = s.ends_with(':');
    if opener {
        s = s[..s.len() - 1].trim_end();
    }
    let mut connective = None;
    if let Some((rest, conn)) = strip_connective(s) {
        s = rest;
        connective = Some(conn);
    } else if let Some(stripped) = s.strip_suffix(';').or_else(|| s.strip_suffix('.')) {
        s = stripped;
    }
    let s = s.trim();
    if s.is_empty() {
        return Err(syntax(line, col, "clause text"));
    }
    Ok((s.to_string(), var, connective, opener))
}

/// Recognizes `; or,` / `; and` / `, and` endings.
fn strip_connective(s: &str) -> Option<(&str, Connective)> {
    let body = s.strip_suffix(',').unwrap_or(s).trim_end();
    let lower = body.to_ascii_lowercase();
    let (word_len, conn) = if lower.ends_with("or") {
        (2, Connective::Or)
    } else if lower.ends_with("and") {
        (3, Connective::And)
    } else {
        return None;
    };
    let before = body[..body.len() - word_len].trim_end();
    if before.len() == body.len() - word_len {
        // no whitespace or separator between the word and what precedes it
        if !before.ends_with([';', ',']) {
            return None;
        }
    }
    let rest = before.strip_suffix(';').or_else(|| before.strip_suffix(','))?;
    Some((rest.trim_end(), conn))
}

#[derive(Debug)]
enum InlineTok {
    Section(Section),
    Marker(Marker),
}

struct Located {
    tok: InlineTok,
    start: usize,
    end: usize,
}

fn scan_inline(lines: &[&str]) -> Result<Vec<RawSection>, DslError> {
    // flatten to chars with (line, col), dropping comment lines
    let mut chars = Vec::new();
    let mut pos = Vec::new();
    for (idx, raw) in lines.iter().enumerate() {
        if !is_comment(raw) {
            for (c_idx, c) in raw.chars().enumerate() {
                chars.push(c);
                pos.push((idx + 1, c_idx + 1));
            }
        }
        chars.push('\n');
        pos.push((idx + 1, raw.chars().count() + 1));
    }

    let toks = inline_tokens(&chars);
    let mut sections: Vec<RawSection> = Vec::new();
    let mut pending: Vec<(Option<Marker>, usize, usize, usize)> = Vec::new(); // marker, start, content_start, content_end
    let flush = |sections: &mut Vec<RawSection>, pending: &mut Vec<(Option<Marker>, usize, usize, usize)>| -> Result<(), DslError> {
        let Some(section) = sections.last_mut() else {
            pending.clear();
            return Ok(());
        };
        for (marker, start, cs, ce) in pending.drain(..) {
            let content: String = chars[cs..ce].iter().map(|&c| if c == '\n' { ' ' } else { c }).collect();
            let (line, col) = pos[start];
            let content_col = pos.get(cs).map(|p| p.1).unwrap_or(col);
            let (text, var, connective, opener) = parse_content(content.trim_start(), line, content_col)?;
            section.items.push(RawItem {
                depth: 0,
                marker,
                text,
                var,
                connective,
                opener,
                line,
                col,
            });
        }
        Ok(())
    };

    let mut cursor = 0;
    for (k, t) in toks.iter().enumerate() {
        let gap: String = chars[cursor..t.start].iter().collect();
        if !gap.trim().is_empty() {
            if let Some(last) = pending.last_mut() {
                last.3 = t.start;
            } else if !sections.is_empty() {
                let first = cursor + gap.chars().take_while(|c| c.is_whitespace()).count();
                pending.push((None, first, first, t.start));
            } else {
                let first = cursor + gap.chars().take_while(|c| c.is_whitespace()).count();
                let (line, col) = pos[first];
                return Err(syntax(line, col, "section header `IF:`"));
            }
        } else if let Some(last) = pending.last_mut() {
            last.3 = t.start;
        }
        match &t.tok {
            InlineTok::Section(s) => {
                flush(&mut sections, &mut pending)?;
                let (line, col) = pos[t.start];
                sections.push(RawSection {
                    section: *s,
                    line,
                    col,
                    items: Vec::new(),
                });
            }
            InlineTok::Marker(m) => {
                if sections.is_empty() {
                    let (line, col) = pos[t.start];
                    return Err(syntax(line, col, "section header `IF:`"));
                }
                let end = toks.get(k + 1).map(|n| n.start).unwrap_or(chars.len());
                pending.push((Some(m.clone()), t.start, t.end, end));
            }
        }
        cursor = t.end;
    }
    let tail: String = chars[cursor..].iter().collect();
    if !tail.trim().is_empty() {
        if let Some(last) = pending.last_mut() {
            last.3 = chars.len();
        } else if !sections.is_empty() {
            let first = cursor + tail.chars().take_while(|c| c.is_whitespace()).count();
            pending.push((None, first, first, chars.len()));
        } else {
            let first = cursor + tail.chars().take_while(|c| c.is_whitespace()).count();
            let (line, col) = pos[first];
            return Err(syntax(line, col, "section header `IF:`"));
        }
    }
    flush(&mut sections, &mut pending)?;
    for s in &mut sections {
        infer_depths(&mut s.items);
    }
    Ok(sections)
}

fn inline_tokens(chars: &[char]) -> Vec<Located> {
    let mut toks = Vec::new();
    let mut i = 0;
    // index just past the previous token; a list marker needs a clause boundary since then
    let mut last_end = 0usize;
    while i < chars.len() {
        if let Some((s, len)) = keyword_at(chars, i) {
            toks.push(Located {
                tok: InlineTok::Section(s),
                start: i,
                end: i + len,
            });
            i += len;
            last_end = i;
            continue;
        }
        if chars[i] == '[' {
            if let Some(close) = chars[i..].iter().position(|&c| c == ']').map(|p| i + p) {
                let label: String = chars[i + 1..close].iter().collect();
                if valid_bracket(&label) {
                    toks.push(Located {
                        tok: InlineTok::Marker(Marker::Bracket(label)),
                        start: i,
                        end: close + 1,
                    });
                    i = close + 1;
                    last_end = i;
                    continue;
                }
            }
        }
        if chars[i].is_ascii_lowercase() && (i == 0 || chars[i - 1].is_whitespace()) {
            let run = chars[i..].iter().take_while(|c| c.is_ascii_lowercase()).count();
            let dot = i + run;
            let word: String = chars[i..dot].iter().collect();
            let followed = chars.get(dot) == Some(&'.') && chars.get(dot + 1).is_none_or(|c| c.is_whitespace());
            let next = chars
                .get(dot + 1..)
                .and_then(|rest| rest.iter().position(|c| !c.is_whitespace()))
                .map(|p| dot + 1 + p);
            let has_text = next.is_some_and(|n| !matches!(chars[n], '[' | '@') && keyword_at(chars, n).is_none());
            if followed && has_text && (run == 1 || is_roman(&word)) {
                let prev = chars[last_end..i].iter().rev().find(|c| !c.is_whitespace());
                let boundary = prev.is_some_and(|c| matches!(c, ';' | ',' | '.' | ':' | ')'));
                if boundary {
                    toks.push(Located {
                        tok: InlineTok::Marker(Marker::List(word)),
                        start: i,
                        end: dot + 1,
                    });
                    i = dot + 1;
                    last_end = i;
                    continue;
                }
            }
        }
        i += 1;
    }
    toks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ListClass {
    Alpha,
    Roman,
}

fn predecessor(label: &str) -> Option<char> {
    let c = label.chars().next()?;
    (label.len() == 1 && c > 'a').then(|| (c as u8 - 1) as char)
}

/// Nesting for running text: a list that restarts (`a.`, `i.`) or follows an
/// item ending in `:` opens a level; other markers rejoin the nearest open
/// list of the same kind.
fn infer_depths(items: &mut [RawItem]) {
    // (class, label) of the item open at each depth
    let mut chain: Vec<Option<(ListClass, String)>> = Vec::new();
    let mut prev: Option<(usize, bool)> = None;
    for item in items.iter_mut() {
        let depth = match &item.marker {
            None | Some(Marker::Bracket(_)) => 0,
            Some(Marker::List(label)) => {
                let alpha_pred = predecessor(label)
                    .is_some_and(|p| chain.iter().flatten().any(|(c, l)| *c == ListClass::Alpha && l.len() == 1 && l.starts_with(p)));
                let class = if is_roman(label) && !alpha_pred { ListClass::Roman } else { ListClass::Alpha };
                let restart = label == "a" || (class == ListClass::Roman && label == "i");
                let (prev_depth, prev_opener) = prev.unwrap_or((0, true));
                let same = chain
                    .iter()
                    .enumerate()
                    .rev()
                    .find(|(d, e)| *d > 0 && e.as_ref().is_some_and(|(c, _)| *c == class))
                    .map(|(d, _)| d);
                let depth = match same {
                    Some(d) if !restart && !prev_opener => d,
                    _ => prev_depth + 1,
                };
                chain.truncate(depth);
                chain.resize(depth, None);
                chain.push(Some((class, label.clone())));
                item.depth = depth;
                prev = Some((depth, item.opener));
                continue;
            }
        };
        chain.truncate(depth);
        chain.push(None);
        item.depth = depth;
        prev = Some((depth, item.opener));
    }
}
