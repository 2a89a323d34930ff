use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_PLACEHOLDER: &str = "{feature_data}";

const BUILTIN_TEMPLATE: &str = include_str!("../../resources/persona_prompt_v1.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    text: String,
    /// Appended after the substituted template; empty by default.
    guidelines: String,
}

impl PromptTemplate {
    /// The bundled persona template (version 1).
    pub fn builtin() -> Self {
        PromptTemplate {
            text: BUILTIN_TEMPLATE.to_string(),
            guidelines: String::new(),
        }
    }

    pub fn from_text(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        let count = text.matches(FEATURE_PLACEHOLDER).count();
        if count != 1 {
            return Err(Error::Config(format!(
                "prompt template must contain `{FEATURE_PLACEHOLDER}` exactly once (found {count})"
            )));
        }
        Ok(PromptTemplate {
            text,
            guidelines: String::new(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("prompt template {}: {e}", path.display())))?;
        Self::from_text(text)
    }

    pub fn with_guidelines(mut self, guidelines: impl Into<String>) -> Self {
        self.guidelines = guidelines.into();
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// The paragraph under the `Context:` heading, used as the system message.
    fn system_context(&self) -> String {
        let mut lines = self.text.lines().skip_while(|l| l.trim() != "Context:");
        if lines.next().is_none() {
            return String::new();
        }
        lines
            .take_while(|l| !l.trim().is_empty())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_context: String,
    pub feature_block: String,
    pub full_prompt: String,
}

/// Substitutes `feature_block` into the template.
pub fn construct_prompt(template: &PromptTemplate, feature_block: &str) -> Result<PromptBundle> {
    if feature_block.trim().is_empty() {
        return Err(Error::Empty("feature block for the persona prompt"));
    }
    let mut full_prompt = template.text.replacen(FEATURE_PLACEHOLDER, feature_block, 1);
    if !template.guidelines.trim().is_empty() {
        if !full_prompt.ends_with('\n') {
            full_prompt.push('\n');
        }
        full_prompt.push('\n');
        full_prompt.push_str(template.guidelines.trim_end());
        full_prompt.push('\n');
    }
    Ok(PromptBundle {
        system_context: template.system_context(),
        feature_block: feature_block.to_string(),
        full_prompt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_template_sections() {
        let bundle = construct_prompt(&PromptTemplate::builtin(), "X ↑ (1.00)").unwrap();
        for header in ["Context:", "Input Features:", "Task:", "Output Format:"] {
            assert!(bundle.full_prompt.contains(header), "{header}");
        }
        assert!(bundle.full_prompt.contains("Persona Summary (2-3 sentences)"));
        assert!(bundle.full_prompt.contains("5. Recommendations (bullet points)"));
        assert_eq!(bundle.full_prompt.matches("X ↑ (1.00)").count(), 1);
        assert!(!bundle.full_prompt.contains(FEATURE_PLACEHOLDER));
        assert!(bundle
            .system_context
            .starts_with("You are an expert startup analyst specializing in founder behavior analysis."));
    }

    #[test]
    fn guidelines_are_appended() {
        let t = PromptTemplate::builtin().with_guidelines("Avoid jargon.");
        let bundle = construct_prompt(&t, "X ↑ (1.00)").unwrap();
        assert!(bundle.full_prompt.trim_end().ends_with("Avoid jargon."));
    }

    #[test]
    fn missing_template_file_is_a_config_error() {
        let err = PromptTemplate::from_file("/nonexistent/persona.txt").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn template_needs_one_placeholder() {
        assert!(PromptTemplate::from_text("no placeholder").is_err());
        assert!(PromptTemplate::from_text("{feature_data} {feature_data}").is_err());
        assert!(construct_prompt(&PromptTemplate::builtin(), "  ").is_err());
    }
}
