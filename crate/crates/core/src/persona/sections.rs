use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Section titles of a persona description, in output order.
pub const SECTION_TITLES: [&str; 5] = [
    "Persona Summary",
    "Key Distinguishing Traits",
    "Success Factors",
    "Risk Factors",
    "Recommendations",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Live,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaDescription {
    pub persona_summary: String,
    pub distinguishing_traits: Vec<String>,
    pub success_factors: Vec<String>,
    pub risk_factors: Vec<String>,
    pub recommendations: Vec<String>,
    pub provenance: Provenance,
    pub model_name: String,
}

impl PersonaDescription {
    fn lists(&self) -> [&Vec<String>; 4] {
        [
            &self.distinguishing_traits,
            &self.success_factors,
            &self.risk_factors,
            &self.recommendations,
        ]
    }

    /// Markdown with one `heading_level` heading per section.
    pub fn render_markdown(&self, heading_level: usize) -> String {
        let hashes = "#".repeat(heading_level.max(1));
        let mut out = format!("{hashes} {}\n\n{}\n", SECTION_TITLES[0], self.persona_summary);
        for (title, items) in SECTION_TITLES[1..].iter().zip(self.lists()) {
            out.push_str(&format!("\n{hashes} {title}\n\n"));
            for item in items {
                out.push_str(&format!("- {item}\n"));
            }
        }
        out
    }

    pub fn render(&self) -> String {
        self.render_markdown(2)
    }

    /// First sentence of the summary.
    pub fn one_liner(&self) -> &str {
        let s = self.persona_summary.trim();
        match s.find(". ") {
            Some(i) => &s[..=i],
            None => s,
        }
    }
}

/// Section index and inline remainder if `line` is a section header.
///
/// Accepts markdown heading marks, emphasis, list numbering, a trailing
/// parenthetical such as `(bullet points)` and an optional colon.
fn parse_header(line: &str) -> Option<(usize, String)> {
    let strip_marks = |s: &str| s.trim().trim_start_matches(['#', '*', '_', ' ', '\t']).to_string();
    let mut s = strip_marks(line);
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &s[digits..];
        let r = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
        s = strip_marks(r);
    }
    let lower = s.to_lowercase();
    for (i, title) in SECTION_TITLES.iter().enumerate() {
        let t = title.to_lowercase();
        if !lower.starts_with(&t) {
            continue;
        }
        let mut rest = s[t.len()..].trim_start_matches(['*', '_']).trim_start();
        if rest.starts_with('(') {
            match rest.find(')') {
                Some(close) => rest = rest[close + 1..].trim_start_matches(['*', '_']).trim_start(),
                None => continue,
            }
        }
        if rest.is_empty() {
            return Some((i, String::new()));
        }
        if let Some(after) = rest.strip_prefix(':') {
            let inline = after.trim().trim_start_matches(['*', '_']).trim();
            return Some((i, inline.to_string()));
        }
    }
    None
}

fn strip_bullet(line: &str) -> Option<&str> {
    let t = line.trim_start();
    for marker in ["- ", "* ", "• ", "+ ", "– "] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Some(rest.trim());
        }
    }
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(r) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return Some(r.trim());
        }
    }
    None
}

fn list_items(lines: &[String]) -> Vec<String> {
    let mut items: Vec<String> = Vec::new();
    let mut saw_bullet = false;
    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match strip_bullet(line) {
            Some(item) => {
                saw_bullet = true;
                if !item.is_empty() {
                    items.push(item.to_string());
                }
            }
            None if saw_bullet => {
                let last = items.last_mut().expect("bullet seen");
                last.push(' ');
                last.push_str(trimmed);
            }
            None => items.push(trimmed.to_string()),
        }
    }
    items
}

/// Splits a completion into the five persona sections and validates them.
pub fn post_process(raw: &str, provenance: Provenance, model_name: &str) -> Result<PersonaDescription> {
    if raw.trim().is_empty() {
        return Err(Error::Empty("persona completion"));
    }
    let mut bodies: [Option<Vec<String>>; 5] = Default::default();
    let mut current: Option<usize> = None;
    for line in raw.lines() {
        if let Some((i, inline)) = parse_header(line) {
            let body = bodies[i].get_or_insert_with(Vec::new);
            if !inline.is_empty() {
                body.push(inline);
            }
            current = Some(i);
        } else if let Some(i) = current {
            bodies[i].get_or_insert_with(Vec::new).push(line.to_string());
        }
    }

    let missing = |i: usize| Error::MissingSection {
        section: SECTION_TITLES[i].to_string(),
    };
    let summary_lines = bodies[0].take().ok_or_else(|| missing(0))?;
    let persona_summary = summary_lines
        .iter()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    if persona_summary.is_empty() {
        return Err(missing(0));
    }
    let mut lists = Vec::with_capacity(4);
    for i in 1..5 {
        let items = list_items(&bodies[i].take().ok_or_else(|| missing(i))?);
        if items.is_empty() {
            return Err(missing(i));
        }
        lists.push(items);
    }
    let mut lists = lists.into_iter();
    Ok(PersonaDescription {
        persona_summary,
        distinguishing_traits: lists.next().unwrap(),
        success_factors: lists.next().unwrap(),
        risk_factors: lists.next().unwrap(),
        recommendations: lists.next().unwrap(),
        provenance,
        model_name: model_name.to_string(),
    })
}
