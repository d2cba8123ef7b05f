//! Reduces raw HTML to compact markup an extraction prompt can afford.
//!
//! Removed outright: `script style svg nav footer head noscript template
//! iframe object canvas` and comments. Kept as markup: tables (one `<tr>` per
//! line), headings, list items, `<br>` inside cells, `aria-label` attributes
//! and image `alt` text. Everything else is unwrapped to text, with block
//! elements starting a new line.
//!
//! When the payload exceeds the token budget, pruning passes run in order
//! until it fits:
//!
//! 1. drop images and attributes,
//! 2. drop prose outside tables (headings survive),
//! 3. drop headings,
//! 4. keep the longest prefix of lines that fits.
//!
//! Text is never rewritten beyond whitespace collapsing, so every text run in
//! the output also appears in the page.

use ego_tree::NodeRef;
use scraper::{Html, Node};

use super::tokens::{ByteHeuristic, TokenCounter};
use super::{IngestError, SourceDocument};

pub const CLEANER_VERSION: &str = "clean/1";

const DROPPED: &[&str] = &[
    "script", "style", "svg", "nav", "footer", "head", "noscript", "template", "iframe", "object", "canvas", "math",
];

const BLOCKS: &[&str] = &[
    "p", "div", "section", "article", "main", "header", "aside", "dl", "dt", "dd", "blockquote", "pre", "form",
    "figure", "figcaption", "details", "summary", "address", "hr", "fieldset", "legend", "body", "html", "center",
];

const TABLE_STRUCTURE: &[&str] = &["table", "thead", "tbody", "tfoot", "tr", "colgroup"];

#[derive(Debug, Clone, PartialEq)]
pub struct CleanedPayload {
    pub text: String,
    pub retained_tables: usize,
    pub estimated_tokens: usize,
    /// Share of the unpruned cleaned text removed to meet the budget.
    pub dropped_byte_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Table,
    Heading,
    Prose,
}

#[derive(Debug, Clone)]
struct Line {
    zone: Zone,
    /// With attributes and images.
    full: String,
    /// Without attributes and images.
    bare: String,
    /// Contains a non-whitespace text character.
    has_text: bool,
}

#[derive(Default)]
struct Walker {
    lines: Vec<Line>,
    full: String,
    bare: String,
    has_text: bool,
    table_depth: usize,
    in_cell: usize,
    heading: usize,
}

impl Walker {
    fn zone(&self) -> Zone {
        if self.table_depth > 0 {
            Zone::Table
        } else if self.heading > 0 {
            Zone::Heading
        } else {
            Zone::Prose
        }
    }

    fn push_markup(&mut self, full: &str, bare: &str) {
        self.full.push_str(full);
        self.bare.push_str(bare);
    }

    fn push_text(&mut self, text: &str) {
        let mut collapsed = String::with_capacity(text.len());
        let mut last_space = self.full.ends_with(' ') || self.full.is_empty();
        for ch in text.chars() {
            if ch.is_whitespace() {
                if !last_space {
                    collapsed.push(' ');
                    last_space = true;
                }
            } else {
                match ch {
                    '&' => collapsed.push_str("&amp;"),
                    '<' => collapsed.push_str("&lt;"),
                    '>' => collapsed.push_str("&gt;"),
                    _ => collapsed.push(ch),
                }
                last_space = false;
                self.has_text = true;
            }
        }
        self.full.push_str(&collapsed);
        self.bare.push_str(&collapsed);
    }

    fn flush(&mut self) {
        let full = self.full.trim().to_string();
        let bare = self.bare.trim().to_string();
        if self.has_text || full.contains('=') {
            self.lines.push(Line { zone: self.zone(), full, bare, has_text: self.has_text });
        }
        self.full.clear();
        self.bare.clear();
        self.has_text = false;
    }

    fn structural_line(&mut self, markup: &str) {
        self.lines.push(Line { zone: Zone::Table, full: markup.into(), bare: markup.into(), has_text: false });
    }

    fn walk(&mut self, node: NodeRef<'_, Node>) {
        match node.value() {
            Node::Text(text) => {
                let parent_is_structure = node
                    .parent()
                    .and_then(|p| p.value().as_element().map(|e| TABLE_STRUCTURE.contains(&e.name())))
                    .unwrap_or(false);
                if parent_is_structure && text.trim().is_empty() {
                    return;
                }
                self.push_text(text);
            }
            Node::Element(el) => {
                let name = el.name();
                let aria = el.attr("aria-label").map(str::trim).filter(|a| !a.is_empty());
                if DROPPED.contains(&name) {
                    // icons carry meaning ("Included") only through their label
                    if let Some(label) = aria.filter(|_| name == "svg") {
                        self.push_markup(&format!("<span aria-label=\"{}\"></span>", escape_attr(label)), "");
                    }
                    return;
                }
                let aria_attr = aria.map(|a| format!(" aria-label=\"{}\"", escape_attr(a))).unwrap_or_default();
                match name {
                    "table" => {
                        self.flush();
                        self.table_depth += 1;
                        let saved_cell = std::mem::take(&mut self.in_cell);
                        self.structural_line("<table>");
                        self.children(node);
                        self.flush();
                        self.structural_line("</table>");
                        self.in_cell = saved_cell;
                        self.table_depth -= 1;
                    }
                    "tr" | "caption" => {
                        self.flush();
                        self.push_markup(&format!("<{name}{aria_attr}>"), &format!("<{name}>"));
                        self.children(node);
                        self.push_markup(&format!("</{name}>"), &format!("</{name}>"));
                        self.flush();
                    }
                    "td" | "th" => {
                        self.in_cell += 1;
                        self.push_markup(&format!("<{name}{aria_attr}>"), &format!("<{name}>"));
                        self.children(node);
                        self.push_markup(&format!("</{name}>"), &format!("</{name}>"));
                        self.in_cell -= 1;
                    }
                    "h1" | "h2" | "h3" | "h4" | "h5" | "h6" if self.in_cell == 0 => {
                        self.flush();
                        self.heading += 1;
                        self.push_markup(&format!("<{name}{aria_attr}>"), &format!("<{name}>"));
                        self.children(node);
                        self.push_markup(&format!("</{name}>"), &format!("</{name}>"));
                        self.flush();
                        self.heading -= 1;
                    }
                    "li" if self.in_cell == 0 => {
                        self.flush();
                        self.push_markup(&format!("<li{aria_attr}>"), "<li>");
                        self.children(node);
                        self.push_markup("</li>", "</li>");
                        self.flush();
                    }
                    "br" => self.push_markup("<br>", "<br>"),
                    "img" => {
                        let alt = el.attr("alt").map(str::trim).filter(|a| !a.is_empty()).or(aria);
                        if let Some(alt) = alt {
                            self.push_markup(&format!("<img alt=\"{}\">", escape_attr(alt)), "");
                        }
                    }
                    _ if BLOCKS.contains(&name) || matches!(name, "ul" | "ol" | "li" | "h1" | "h2" | "h3" | "h4" | "h5" | "h6") => {
                        self.block_boundary();
                        if let Some(a) = aria {
                            self.push_markup(&format!("<span aria-label=\"{}\"></span>", escape_attr(a)), "");
                        }
                        self.children(node);
                        self.block_boundary();
                    }
                    _ => {
                        if let Some(a) = aria {
                            self.push_markup(&format!("<span aria-label=\"{}\"></span>", escape_attr(a)), "");
                        }
                        self.children(node);
                    }
                }
            }
            Node::Document | Node::Fragment => self.children(node),
            _ => {}
        }
    }

    fn block_boundary(&mut self) {
        if self.in_cell > 0 {
            if !self.full.ends_with("<br>") && !self.full.ends_with('>') || self.has_text {
                self.push_markup("<br>", "<br>");
            }
        } else {
            self.flush();
        }
    }

    fn children(&mut self, node: NodeRef<'_, Node>) {
        for child in node.children() {
            self.walk(child);
        }
    }
}

fn escape_attr(value: &str) -> String {
    value
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace('&', "&amp;")
        .replace('"', "&quot;")
        .replace('<', "&lt;")
}

fn render(lines: &[Line], level: u8) -> Vec<&str> {
    lines
        .iter()
        .filter(|l| match level {
            0 => true,
            1 => l.has_text || l.zone == Zone::Table,
            2 => (l.has_text || l.zone == Zone::Table) && l.zone != Zone::Prose,
            _ => l.zone == Zone::Table,
        })
        .map(|l| if level == 0 { l.full.as_str() } else { l.bare.as_str() })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Drops table rows left without content by earlier passes.
fn tidy(lines: Vec<&str>) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::with_capacity(lines.len());
    for line in lines {
        if line == "</table>" && out.last() == Some(&"<table>") {
            out.pop();
            continue;
        }
        out.push(line);
    }
    out
}

/// Longest prefix of `lines` whose text, with any open tables closed, fits the budget.
fn truncate(lines: &[&str], budget: usize, counter: &dyn TokenCounter) -> String {
    let assemble = |n: usize| {
        let mut text = lines[..n].join("\n");
        let depth = lines[..n].iter().fold(0i64, |d, l| match *l {
            "<table>" => d + 1,
            "</table>" => d - 1,
            _ => d,
        });
        for _ in 0..depth.max(0) {
            text.push_str("\n</table>");
        }
        text
    };
    let (mut lo, mut hi) = (0usize, lines.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if counter.count(&assemble(mid)) <= budget {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let mut n = lo;
    // a bare "<table>" with nothing after it is noise
    while n > 0 && lines[n - 1] == "<table>" {
        n -= 1;
    }
    assemble(n)
}

/// Cleans a fetched document with the byte heuristic token counter.
pub fn clean(doc: &SourceDocument, budget: usize) -> Result<CleanedPayload, IngestError> {
    clean_html(&doc.raw_html, budget, &ByteHeuristic)
}

pub fn clean_html(html: &str, budget: usize, counter: &dyn TokenCounter) -> Result<CleanedPayload, IngestError> {
    if budget == 0 {
        return Err(IngestError::ZeroBudget);
    }
    let dom = Html::parse_document(html);
    let mut walker = Walker::default();
    walker.walk(dom.tree.root());
    walker.flush();
    if !walker.lines.iter().any(|l| l.has_text) {
        return Err(IngestError::EmptyAfterClean);
    }

    let unpruned = tidy(render(&walker.lines, 0)).join("\n");
    let mut text = unpruned.clone();
    let mut level = 0u8;
    while counter.count(&text) > budget {
        level += 1;
        text = if level <= 3 {
            tidy(render(&walker.lines, level)).join("\n")
        } else {
            truncate(&tidy(render(&walker.lines, 3)), budget, counter)
        };
        if level > 3 {
            break;
        }
    }

    let retained_tables = text.lines().filter(|l| *l == "<table>").count();
    let dropped_byte_share = if unpruned.is_empty() {
        0.0
    } else {
        1.0 - text.len() as f64 / unpruned.len() as f64
    };
    Ok(CleanedPayload {
        estimated_tokens: counter.count(&text),
        text,
        retained_tables,
        dropped_byte_share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cleaned(html: &str) -> CleanedPayload {
        clean_html(html, 1_000_000, &ByteHeuristic).unwrap()
    }

    #[test]
    fn scripts_are_removed_and_text_kept() {
        let out = cleaned("<html><head><title>x</title></head><body><script>var secret = 1;</script><p>Pro plan</p></body></html>");
        assert_eq!(out.text, "Pro plan");
        assert_eq!(out.retained_tables, 0);
    }

    #[test]
    fn tables_keep_row_structure() {
        let out = cleaned(
            "<table><thead><tr><th>Feature</th><th>Pro</th></tr></thead>\n<tbody><tr><td>SSO</td><td><span aria-label=\"Included\">✔</span></td></tr></tbody></table>",
        );
        assert_eq!(
            out.text,
            "<table>\n<tr><th>Feature</th><th>Pro</th></tr>\n<tr><td>SSO</td><td><span aria-label=\"Included\"></span>✔</td></tr>\n</table>"
        );
        assert_eq!(out.retained_tables, 1);
    }

    #[test]
    fn nav_footer_svg_are_dropped_but_aria_labels_survive() {
        let out = cleaned("<nav aria-label=\"Main\">Home About</nav><div>Plans<svg aria-label=\"check\"><path d=\"M0\"/></svg></div><footer>© 2024</footer>");
        assert_eq!(out.text, "Plans<span aria-label=\"check\"></span>");
    }

    #[test]
    fn inline_text_is_not_padded() {
        let out = cleaned("<p>Pro<b>plan</b> and <i>more</i></p>");
        assert_eq!(out.text, "Proplan and more");
    }

    #[test]
    fn empty_after_clean() {
        let err = clean_html("<script>only()</script>", 100, &ByteHeuristic).unwrap_err();
        assert_eq!(err.code(), "EMPTY_AFTER_CLEAN");
        assert!(matches!(clean_html("<p>x</p>", 0, &ByteHeuristic), Err(IngestError::ZeroBudget)));
    }

    #[test]
    fn pruning_order_drops_images_then_prose_then_headings() {
        let html = "<h2>Compare plans</h2><p>Some long marketing prose about our plans.</p><img alt=\"logo\">\
                    <table><tr><td>SSO</td><td>✔</td></tr></table>";
        let full = cleaned(html);
        assert!(full.text.contains("logo") && full.text.contains("marketing"));

        let no_images = clean_html(html, (full.estimated_tokens) - 1, &ByteHeuristic).unwrap();
        assert!(!no_images.text.contains("logo"));
        assert!(no_images.text.contains("marketing"));

        let tables_and_headings = clean_html(html, 20, &ByteHeuristic).unwrap();
        assert!(!tables_and_headings.text.contains("marketing"));
        assert!(tables_and_headings.text.contains("Compare plans"));
        assert!(tables_and_headings.dropped_byte_share > 0.0);

        let tables_only = clean_html(html, 13, &ByteHeuristic).unwrap();
        assert_eq!(tables_only.text, "<table>\n<tr><td>SSO</td><td>✔</td></tr>\n</table>");
        assert!(tables_only.estimated_tokens <= 13);

        let truncated = clean_html(html, 3, &ByteHeuristic).unwrap();
        assert_eq!(truncated.text, "");
        assert_eq!(truncated.retained_tables, 0);
    }
}
