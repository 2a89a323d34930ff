use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::prompt::PromptBundle;
use super::sections::{PersonaDescription, Provenance};
use super::NO_FEATURES_LINE;
use crate::error::LlmError;

/// Environment variable holding the bearer token for the live endpoint.
pub const API_KEY_ENV: &str = "HTREE_LLM_API_KEY";

pub const MOCK_MODEL_NAME: &str = "mock-persona-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub endpoint: String,
    pub model_name: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// First retry delay; doubles on every further attempt.
    pub backoff_ms: u64,
}

impl Default for LlmParams {
    fn default() -> Self {
        LlmParams {
            temperature: 0.7,
            max_tokens: 1000,
            top_p: 0.95,
            frequency_penalty: 0.5,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4".into(),
            timeout_secs: 60,
            max_retries: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    frequency_penalty: f64,
}

impl LlmParams {
    /// Chat-completion request body for `prompt`.
    pub fn request_body(&self, prompt: &PromptBundle) -> Value {
        let mut messages = Vec::with_capacity(2);
        if !prompt.system_context.is_empty() {
            messages.push(ChatMessage {
                role: "system",
                content: &prompt.system_context,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &prompt.full_prompt,
        });
        serde_json::to_value(ChatRequest {
            model: &self.model_name,
            messages,
            temperature: self.temperature,
            top_p: self.top_p,
            max_tokens: self.max_tokens,
            frequency_penalty: self.frequency_penalty,
        })
        .expect("request body serializes")
    }
}

/// Something that turns a persona prompt into completion text.
pub trait PersonaBackend: Send + Sync {
    fn complete(&self, prompt: &PromptBundle) -> Result<String, LlmError>;
    fn provenance(&self) -> Provenance;
    fn model_name(&self) -> &str;
}

pub fn query_llm(prompt: &PromptBundle, backend: &dyn PersonaBackend) -> Result<String, LlmError> {
    backend.complete(prompt)
}

/// Offline backend: renders all five sections from the feature block alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockLlm;

struct BlockFeature {
    name: String,
    up: bool,
    magnitude: f64,
}

impl BlockFeature {
    fn relation(&self) -> &'static str {
        match (self.up, self.magnitude) {
            (true, m) if m >= 1.0 => "well above",
            (true, m) if m >= 0.5 => "above",
            (true, _) => "slightly above",
            (false, m) if m >= 1.0 => "well below",
            (false, m) if m >= 0.5 => "below",
            (false, _) => "slightly below",
        }
    }
}

fn parse_block(block: &str) -> Vec<BlockFeature> {
    block
        .lines()
        .filter_map(|line| {
            let (name, rest) = line.trim().split_once(' ')?;
            let rest = rest.trim_start();
            let up = rest.starts_with('↑');
            if !up && !rest.starts_with('↓') {
                return None;
            }
            let magnitude: f64 = rest.split_once('(')?.1.split_once(')')?.0.trim().parse().ok()?;
            Some(BlockFeature {
                name: name.to_string(),
                up,
                magnitude,
            })
        })
        .collect()
}

impl MockLlm {
    pub fn describe(&self, feature_block: &str) -> PersonaDescription {
        let features = parse_block(feature_block);
        let describe = |f: &BlockFeature| {
            format!(
                "{} {} the population average (z = {}{:.2})",
                f.name,
                f.relation(),
                if f.up { '+' } else { '-' },
                f.magnitude
            )
        };
        let (persona_summary, distinguishing_traits) = if features.is_empty() {
            (
                format!("This group shows {NO_FEATURES_LINE}; its members sit close to the population average on every feature."),
                vec!["No feature deviates strongly from the population".to_string()],
            )
        } else {
            let lead: Vec<&str> = features.iter().take(3).map(|f| f.name.as_str()).collect();
            let top = &features[0];
            (
                format!(
                    "Founders in this group are defined by {}. The strongest signal is {}, which is {} the population average.",
                    lead.join(", "),
                    top.name,
                    top.relation()
                ),
                features.iter().map(describe).collect(),
            )
        };
        let strengths: Vec<&BlockFeature> = features.iter().filter(|f| f.up).collect();
        let gaps: Vec<&BlockFeature> = features.iter().filter(|f| !f.up).collect();
        let success_factors = if strengths.is_empty() {
            vec!["Outcomes depend on execution rather than a standout credential".to_string()]
        } else {
            strengths
                .iter()
                .map(|f| format!("Elevated {} is a lever for early traction", f.name))
                .collect()
        };
        let mut risk_factors: Vec<String> = gaps
            .iter()
            .map(|f| format!("Below-average {} may slow progress", f.name))
            .collect();
        if risk_factors.is_empty() {
            risk_factors.push("Reliance on a narrow set of strengths".to_string());
        }
        let mut recommendations: Vec<String> = strengths
            .iter()
            .take(2)
            .map(|f| format!("Validate how {} translates into company progress", f.name))
            .collect();
        recommendations.extend(
            gaps.iter()
                .take(2)
                .map(|f| format!("Offset weak {} with targeted support", f.name)),
        );
        if recommendations.is_empty() {
            recommendations.push("Assess founders individually; the group profile is not distinctive".to_string());
        }
        PersonaDescription {
            persona_summary,
            distinguishing_traits,
            success_factors,
            risk_factors,
            recommendations,
            provenance: Provenance::Mock,
            model_name: MOCK_MODEL_NAME.to_string(),
        }
    }
}

impl PersonaBackend for MockLlm {
    fn complete(&self, prompt: &PromptBundle) -> Result<String, LlmError> {
        Ok(self.describe(&prompt.feature_block).render())
    }

    fn provenance(&self) -> Provenance {
        Provenance::Mock
    }

    fn model_name(&self) -> &str {
        MOCK_MODEL_NAME
    }
}

/// Chat-completion client with exponential backoff on 429, 5xx, timeouts and
/// connection failures.
#[derive(Debug, Clone)]
pub struct HttpLlm {
    params: LlmParams,
    api_key: Option<String>,
    agent: ureq::Agent,
}

enum Attempt {
    Done(String),
    Fatal(LlmError),
    Retry(LlmError),
}

impl HttpLlm {
    /// Reads the API key from [`API_KEY_ENV`] if set.
    pub fn new(params: LlmParams) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_api_key(params, api_key)
    }

    pub fn with_api_key(params: LlmParams, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(params.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        HttpLlm { params, api_key, agent }
    }

    pub fn params(&self) -> &LlmParams {
        &self.params
    }

    fn attempt(&self, body: &str, attempts: u32) -> Attempt {
        let mut request = self
            .agent
            .post(&self.params.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        match request.send(body) {
            Ok(mut response) => {
                let status = response.status().as_u16();
                if (200..300).contains(&status) {
                    match response.body_mut().read_to_string() {
                        Ok(text) => match extract_completion(&text) {
                            Ok(content) => Attempt::Done(content),
                            Err(e) => Attempt::Fatal(e),
                        },
                        Err(e) => Attempt::Retry(classify_transport(e, attempts)),
                    }
                } else if status == 429 || status >= 500 {
                    Attempt::Retry(LlmError::Transport { status, attempts })
                } else {
                    Attempt::Fatal(LlmError::Transport { status, attempts })
                }
            }
            Err(e) => Attempt::Retry(classify_transport(e, attempts)),
        }
    }
}

fn classify_transport(e: ureq::Error, attempts: u32) -> LlmError {
    match e {
        ureq::Error::Timeout(_) => LlmError::Timeout { attempts },
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => LlmError::Timeout { attempts },
        other => LlmError::Connection {
            message: other.to_string(),
            attempts,
        },
    }
}

/// Pulls `choices[0].message.content` out of a chat-completion response.
pub(crate) fn extract_completion(text: &str) -> Result<String, LlmError> {
    let value: Value = serde_json::from_str(text).map_err(|e| LlmError::Protocol(format!("invalid JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LlmError::Protocol("response has no choices[0].message.content".into()))
}

impl PersonaBackend for HttpLlm {
    fn complete(&self, prompt: &PromptBundle) -> Result<String, LlmError> {
        if self.params.endpoint.is_empty() {
            return Err(LlmError::Config("no endpoint configured".into()));
        }
        let body = self.params.request_body(prompt).to_string();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body, attempts) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e) => {
                    if attempts > self.params.max_retries {
                        return Err(e);
                    }
                    let delay = self.params.backoff_ms.saturating_mul(1 << (attempts - 1).min(16));
                    log::warn!("persona request failed ({e}); retrying in {delay} ms");
                    std::thread::sleep(Duration::from_millis(delay));
                }
            }
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance::Live
    }

    fn model_name(&self) -> &str {
        &self.params.model_name
    }
}
