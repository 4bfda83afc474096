//! Byte-level helpers shared by the stripper and the link extractors.
//!
//! Every delimiter here is ASCII, so any index returned points at a UTF-8
//! character boundary.

pub(crate) fn line_end(s: &str, from: usize) -> usize {
    s[from..].find('\n').map_or(s.len(), |p| from + p)
}

pub(crate) fn at_line_start(s: &str, i: usize) -> bool {
    i == 0 || s.as_bytes()[i - 1] == b'\n'
}

/// End (exclusive) of an HTML comment starting at `i`, or of its line when
/// it never closes.
pub(crate) fn comment_end(s: &str, i: usize) -> usize {
    match s[i + 4..].find("-->") {
        Some(p) => i + 4 + p + 3,
        None => line_end(s, i),
    }
}

/// Finds the close of a balanced `open ... close` construct starting at `i`.
/// Returns the index just past the closing delimiter. Comments inside are
/// skipped.
pub(crate) fn balanced_end(s: &str, i: usize, open: &str, close: &str) -> Option<usize> {
    let b = s.as_bytes();
    let mut depth = 0usize;
    let mut j = i;
    while j < b.len() {
        if b[j..].starts_with(b"<!--") {
            j = comment_end(s, j);
            continue;
        }
        if b[j..].starts_with(open.as_bytes()) {
            depth += 1;
            j += open.len();
        } else if b[j..].starts_with(close.as_bytes()) {
            depth -= 1;
            j += close.len();
            if depth == 0 {
                return Some(j);
            }
        } else {
            j += 1;
        }
    }
    None
}

/// Position just past the `|}` closing a table opened at line start `i`.
pub(crate) fn table_end(s: &str, i: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut pos = i;
    while pos < s.len() {
        let end = line_end(s, pos);
        let line = s[pos..end].trim_start();
        let indent = s[pos..end].len() - line.len();
        if line.starts_with("{|") {
            depth += 1;
        } else if line.starts_with("|}") {
            depth -= 1;
            if depth == 0 {
                return Some(pos + indent + 2);
            }
        }
        pos = end + 1;
    }
    None
}

/// Splits the inside of `[[...]]` at the first `|` that is not nested in
/// another link or template.
pub(crate) fn split_link(inner: &str) -> (&str, Option<&str>) {
    let b = inner.as_bytes();
    let mut depth = 0i32;
    let mut j = 0;
    while j < b.len() {
        if b[j..].starts_with(b"[[") || b[j..].starts_with(b"{{") {
            depth += 1;
            j += 2;
        } else if b[j..].starts_with(b"]]") || b[j..].starts_with(b"}}") {
            depth -= 1;
            j += 2;
        } else {
            if b[j] == b'|' && depth == 0 {
                return (&inner[..j], Some(&inner[j + 1..]));
            }
            j += 1;
        }
    }
    (inner, None)
}

pub(crate) const URL_SCHEMES: &[&str] = &[
    "http://",
    "https://",
    "ftp://",
    "ftps://",
    "sftp://",
    "irc://",
    "ircs://",
    "news://",
    "nntp://",
    "gopher://",
    "telnet://",
    "svn://",
    "git://",
    "mms://",
    "ssh://",
    "worldwind://",
    "//",
];

pub(crate) const BARE_SCHEMES: &[&str] = &["http://", "https://", "ftp://"];

pub(crate) fn starts_with_ci(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

/// If `s[i]` opens a bracketed external link, returns (url end, `]` index).
pub(crate) fn external_link_at(s: &str, i: usize) -> Option<(usize, usize)> {
    let rest = &s[i + 1..];
    let scheme = URL_SCHEMES.iter().find(|p| starts_with_ci(rest, p))?;
    let close = i + 1 + rest[..line_end(rest, 0)].find(']')?;
    let url_start = i + 1;
    if close <= url_start + scheme.len() {
        return None;
    }
    let url_end = s[url_start..close]
        .find([' ', '\t'])
        .map_or(close, |p| url_start + p);
    if url_end == url_start + scheme.len() {
        return None;
    }
    Some((url_end, close))
}

fn url_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '<' | '>' | '[' | ']' | '"' | '|' | '{' | '}'))
}

/// If a bare URL starts at `i`, returns the index just past it.
pub(crate) fn bare_url_at(s: &str, i: usize) -> Option<usize> {
    let rest = &s[i..];
    let scheme = BARE_SCHEMES.iter().find(|p| starts_with_ci(rest, p))?;
    if i > 0 {
        let prev = s[..i].chars().next_back()?;
        if prev.is_alphanumeric() || prev == '/' {
            return None;
        }
    }
    let body = &rest[scheme.len()..];
    let len = body.find(|c: char| !url_char(c)).unwrap_or(body.len());
    if len == 0 {
        return None;
    }
    Some(i + scheme.len() + len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced() {
        let s = "{{a|{{b}}|c}}rest";
        assert_eq!(balanced_end(s, 0, "{{", "}}"), Some(13));
        assert_eq!(balanced_end("{{a", 0, "{{", "}}"), None);
        assert_eq!(balanced_end("{{a<!--}}-->}}", 0, "{{", "}}"), Some(14));
    }

    #[test]
    fn tables_nest() {
        let s = "{|\n|a\n{|\n|b\n|}\n|}\nafter";
        let end = table_end(s, 0).unwrap();
        assert_eq!(&s[end..], "\nafter");
    }

    #[test]
    fn link_split() {
        assert_eq!(split_link("A|b"), ("A", Some("b")));
        assert_eq!(split_link("A"), ("A", None));
        assert_eq!(
            split_link("File:x|a [[B|c]]"),
            ("File:x", Some("a [[B|c]]"))
        );
        assert_eq!(split_link("{{T|x}}|y"), ("{{T|x}}", Some("y")));
    }

    #[test]
    fn urls() {
        assert_eq!(external_link_at("[http://a.com x]", 0), Some((13, 15)));
        assert_eq!(external_link_at("[http://a.com]", 0), Some((13, 13)));
        assert_eq!(external_link_at("[http://]", 0), None);
        assert_eq!(external_link_at("[http://a.com\n]", 0), None);
        assert_eq!(external_link_at("[foo]", 0), None);
        assert_eq!(bare_url_at("see http://a.com.", 4), Some(17));
        assert_eq!(bare_url_at("xhttp://a.com", 1), None);
        assert_eq!(bare_url_at("http:// x", 0), None);
    }
}
