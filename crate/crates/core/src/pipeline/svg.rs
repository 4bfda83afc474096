//! Minimal SVG writer for histogram figures. Every number is printed with
//! fixed precision so output bytes depend only on the data.

use std::fmt::Write as _;

use crate::attention::Bin;

const FONT: &str = "font-family=\"DejaVu Sans, Helvetica, sans-serif\" font-size=\"12\"";

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) struct Svg {
    body: String,
}

/// A vertical marker drawn across a panel.
pub(crate) struct Marker<'a> {
    pub x: f64,
    pub color: &'a str,
    pub dashed: bool,
    pub label: String,
}

/// A shaded interval drawn behind the bars.
pub(crate) struct Band {
    pub low: f64,
    pub high: f64,
    pub label: String,
}

pub(crate) struct Panel<'a> {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub title: String,
    pub x_label: &'a str,
    pub bins: &'a [Bin],
    pub markers: Vec<Marker<'a>>,
    pub band: Option<Band>,
}

impl Svg {
    pub fn new(width: u32, height: u32) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
        );
        let _ = writeln!(
            body,
            "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
        );
        Svg { body }
    }

    pub fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" {FONT}>{}</text>",
            escape(s)
        );
    }

    pub fn panel(&mut self, p: &Panel<'_>) {
        let (lo, hi) = p.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        let sx = |x: f64| p.left + (x.clamp(lo, hi) - lo) / span * p.width;
        let bottom = p.top + p.height;
        let max_count = p.bins.iter().map(|b| b.count).max().unwrap_or(0).max(1);
        let sy = |c: usize| bottom - c as f64 / max_count as f64 * p.height;

        self.text(p.left + p.width / 2.0, p.top - 10.0, "middle", &p.title);
        if let Some(b) = &p.band {
            let (x0, x1) = (sx(b.low), sx(b.high));
            let _ = writeln!(
                self.body,
                "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" fill-opacity=\"0.5\"/>",
                p.top,
                (x1 - x0).max(1.0),
                p.height
            );
            self.text(p.left + p.width, p.top + 14.0, "end", &b.label);
        }
        for b in p.bins {
            if b.count == 0 {
                continue;
            }
            let (x0, x1) = (sx(b.low), sx(b.high));
            let y = sy(b.count);
            let _ = writeln!(
                self.body,
                "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#bdbdbd\" stroke=\"#636363\" stroke-width=\"0.5\"/>",
                (x1 - x0).max(0.5),
                bottom - y
            );
        }
        for (i, m) in p.markers.iter().enumerate() {
            let x = sx(m.x);
            let dash = if m.dashed {
                " stroke-dasharray=\"6,4\""
            } else {
                ""
            };
            let _ = writeln!(
                self.body,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{bottom:.2}\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
                p.top,
                m.color
            );
            let ly = p.top + 30.0 + 16.0 * i as f64;
            let _ = writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{ly:.2}\" text-anchor=\"start\" fill=\"{}\" {FONT}>{}</text>",
                p.left + 6.0,
                m.color,
                escape(&m.label)
            );
        }
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{bottom:.2}\" x2=\"{:.2}\" y2=\"{bottom:.2}\" stroke=\"black\"/>",
            p.left,
            p.left + p.width
        );
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{bottom:.2}\" stroke=\"black\"/>",
            p.left, p.top, p.left
        );
        for i in 0..=4 {
            let v = lo + span * f64::from(i) / 4.0;
            let x = sx(v);
            let _ = writeln!(
                self.body,
                "<line x1=\"{x:.2}\" y1=\"{bottom:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                bottom + 4.0
            );
            self.text(x, bottom + 18.0, "middle", &format!("{v:.3}"));
        }
        self.text(p.left - 6.0, p.top + 4.0, "end", &max_count.to_string());
        self.text(p.left - 6.0, bottom, "end", "0");
        self.text(p.left + p.width / 2.0, bottom + 36.0, "middle", p.x_label);
    }

    pub fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}
