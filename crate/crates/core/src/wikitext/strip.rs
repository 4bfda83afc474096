//! Wikitext to plain text.
//!
//! Structural only: templates, tables, comments and reference-like tags
//! are dropped; links and external links are replaced by their visible
//! text; heading, list and emphasis markers are removed. Constructs that
//! never close are dropped up to the end of their line.

use crate::wikitext::links::{classify, LinkKind};
use crate::wikitext::scan::{
    at_line_start, balanced_end, comment_end, external_link_at, line_end, split_link, table_end,
};

/// Tags whose content is not article prose.
const DROP_CONTENT_TAGS: &[&str] = &[
    "ref",
    "references",
    "math",
    "gallery",
    "timeline",
    "score",
    "chem",
    "ce",
    "graph",
    "templatedata",
    "imagemap",
    "syntaxhighlight",
    "source",
    "mapframe",
    "maplink",
];

/// Tags that separate words when removed.
const BREAK_TAGS: &[&str] = &[
    "br",
    "p",
    "div",
    "li",
    "ul",
    "ol",
    "dl",
    "dd",
    "dt",
    "tr",
    "td",
    "th",
    "table",
    "hr",
    "blockquote",
    "center",
];

pub fn strip_markup(markup: &str) -> String {
    let mut out = String::with_capacity(markup.len());
    strip_into(markup, &mut out);
    tidy(&out)
}

fn strip_into(s: &str, out: &mut String) {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if at_line_start(s, i) {
            i = line_prefix(s, i, out);
            if i >= b.len() {
                break;
            }
        }
        let rest = &s[i..];
        let c = b[i];
        if c == b'<' {
            i = angle(s, i, out);
        } else if rest.starts_with("{{{") {
            i = match rest.find("}}}") {
                Some(p) => i + p + 3,
                None => line_end(s, i),
            };
        } else if rest.starts_with("{{") {
            i = balanced_end(s, i, "{{", "}}").unwrap_or_else(|| line_end(s, i));
        } else if rest.starts_with("[[") {
            i = wikilink(s, i, out);
        } else if c == b'[' {
            match external_link_at(s, i) {
                Some((url_end, close)) => {
                    strip_into(s[url_end..close].trim_start(), out);
                    i = close + 1;
                }
                None => {
                    out.push('[');
                    i += 1;
                }
            }
        } else if rest.starts_with("''") {
            i += rest.bytes().take_while(|&x| x == b'\'').count();
        } else if rest.starts_with("__") {
            i = magic_word(s, i, out);
        } else if c == b'&' {
            i = entity(s, i, out);
        } else if c == b'=' && heading_tail(s, i) {
            i = line_end(s, i);
        } else {
            let ch = rest.chars().next().unwrap_or('\u{fffd}');
            out.push(ch);
            i += ch.len_utf8();
        }
    }
}

/// Handles markers that only mean something at the start of a line.
fn line_prefix(s: &str, i: usize, out: &mut String) -> usize {
    let line = &s[i..line_end(s, i)];
    if line.trim_start().starts_with("{|") {
        return table_end(s, i).unwrap_or_else(|| line_end(s, i));
    }
    if line.starts_with("----") {
        return i + line.bytes().take_while(|&x| x == b'-').count();
    }
    if line.starts_with('=') {
        return i + line.bytes().take_while(|&x| x == b'=').count();
    }
    let markers = line
        .bytes()
        .take_while(|x| matches!(x, b'*' | b'#' | b':' | b';'))
        .count();
    if markers > 0 {
        out.push(' ');
    }
    i + markers
}

/// True when `s[i..]` is the trailing `==` run of a heading line.
fn heading_tail(s: &str, i: usize) -> bool {
    let end = line_end(s, i);
    let line_start = s[..i].rfind('\n').map_or(0, |p| p + 1);
    s[line_start..].starts_with('=') && s[i..end].trim_end().bytes().all(|x| x == b'=')
}

fn wikilink(s: &str, i: usize, out: &mut String) -> usize {
    let Some(end) = balanced_end(s, i, "[[", "]]") else {
        return line_end(s, i);
    };
    let inner = &s[i + 2..end - 2];
    let (target, label) = split_link(inner);
    match classify(target) {
        LinkKind::Media | LinkKind::Interlanguage => {}
        LinkKind::Article | LinkKind::OtherNamespace => match label {
            Some(l) if !l.trim().is_empty() => strip_into(l, out),
            _ => strip_into(target.trim_start_matches(':'), out),
        },
    }
    end
}

fn tag_name(s: &str) -> &str {
    let n = s.bytes().take_while(|x| x.is_ascii_alphanumeric()).count();
    &s[..n]
}

fn angle(s: &str, i: usize, out: &mut String) -> usize {
    let rest = &s[i..];
    if rest.starts_with("<!--") {
        return comment_end(s, i);
    }
    let closing = rest.starts_with("</");
    let name_start = if closing { 2 } else { 1 };
    let name = tag_name(&rest[name_start..]);
    if name.is_empty() || !name.as_bytes()[0].is_ascii_alphabetic() {
        out.push('<');
        return i + 1;
    }
    let lend = line_end(s, i);
    let Some(gt) = s[i..lend].find('>') else {
        out.push('<');
        return i + 1;
    };
    let tag_end = i + gt + 1;
    let lname = name.to_ascii_lowercase();
    let self_closing = s[..tag_end].ends_with("/>");

    if !closing && !self_closing && lname == "nowiki" {
        let close = s[tag_end..].to_ascii_lowercase().find("</nowiki>");
        let body_end = close.map_or(s.len(), |p| tag_end + p);
        out.push_str(&s[tag_end..body_end]);
        return close.map_or(s.len(), |p| tag_end + p + 9);
    }
    if !closing && !self_closing && DROP_CONTENT_TAGS.contains(&lname.as_str()) {
        let needle = format!("</{lname}");
        let lower = s[tag_end..].to_ascii_lowercase();
        return match lower.find(&needle) {
            Some(p) => {
                let after = tag_end + p;
                match s[after..].find('>') {
                    Some(q) => after + q + 1,
                    None => s.len(),
                }
            }
            None => lend,
        };
    }
    if BREAK_TAGS.contains(&lname.as_str()) {
        out.push(' ');
    }
    tag_end
}

fn magic_word(s: &str, i: usize, out: &mut String) -> usize {
    let body = &s[i + 2..];
    let n = body.bytes().take_while(|x| x.is_ascii_uppercase()).count();
    if n > 0 && body[n..].starts_with("__") {
        return i + 2 + n + 2;
    }
    out.push_str("__");
    i + 2
}

fn entity(s: &str, i: usize, out: &mut String) -> usize {
    let rest = &s[i..];
    let window = &rest.as_bytes()[..rest.len().min(12)];
    let Some(semi) = window.iter().position(|&x| x == b';') else {
        out.push('&');
        return i + 1;
    };
    let name = &rest[1..semi];
    let decoded = match name {
        "nbsp" | "ensp" | "emsp" | "thinsp" => Some(' '),
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "ndash" => Some('\u{2013}'),
        "mdash" => Some('\u{2014}'),
        _ => {
            if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok().and_then(char::from_u32)
            } else if let Some(dec) = name.strip_prefix('#') {
                dec.parse::<u32>().ok().and_then(char::from_u32)
            } else {
                None
            }
        }
    };
    match decoded {
        Some(c) => {
            out.push(c);
            i + semi + 1
        }
        None => {
            out.push('&');
            i + 1
        }
    }
}

/// Collapses whitespace runs inside lines and squeezes blank lines.
fn tidy(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut blank_run = 0;
    for line in text.lines() {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            blank_run += 1;
            continue;
        }
        if !out.is_empty() {
            out.push_str(if blank_run > 0 { "\n\n" } else { "\n" });
        }
        blank_run = 0;
        out.push_str(&words.join(" "));
    }
    out
}
