//! Chat-completions decision backend.
//!
//! Each decision is one chat exchange. Transport failures (connection errors,
//! 429, 5xx) are retried with jittered exponential backoff; replies that do not
//! parse are answered with a repair message quoting the parse error.

use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::{LlmSettings, PunishmentMode};
use crate::rng::{stream, StreamPurpose};

use super::prompt::TemplateSet;
use super::{BackendError, Choice, Decision, DecisionBackend, DecisionContext, Severity};

pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_BASE_URL: &str = "LLM_BASE_URL";
pub const ENV_MODEL: &str = "LLM_MODEL";

/// A parsed decision plus how hard it was to get.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmOutcome {
    pub decision: Decision,
    pub repair_retries: u32,
    pub transport_retries: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReply {
    decision: String,
    #[serde(default)]
    severity: Option<Severity>,
    #[serde(default)]
    reasoning: Option<String>,
}

/// Parses a model reply for `ctx`. Code fences and text around the JSON object are ignored.
pub fn parse_reply(ctx: &DecisionContext, content: &str) -> Result<Decision, BackendError> {
    let start = content
        .find('{')
        .ok_or_else(|| BackendError::Parse("reply contains no JSON object".into()))?;
    let end = content
        .rfind('}')
        .filter(|e| *e > start)
        .ok_or_else(|| BackendError::Parse("reply contains no complete JSON object".into()))?;
    let raw: RawReply = serde_json::from_str(&content[start..=end])
        .map_err(|e| BackendError::Parse(format!("invalid reply JSON: {e}")))?;

    let choice = match raw.decision.trim() {
        "Budget" => Choice::Budget,
        "Premium" => Choice::Premium,
        "Punish" => Choice::Punish,
        "Abstain" => Choice::Abstain,
        other => {
            return Err(BackendError::Schema(format!(
                "decision `{other}` is not a known choice"
            )))
        }
    };
    if !choice.is_valid_for(ctx.kind) {
        return Err(BackendError::Schema(format!(
            "decision `{}` is not valid for a {} decision",
            choice.as_str(),
            ctx.kind
        )));
    }
    let severity = if Decision::severity_required(ctx, choice) {
        match raw.severity {
            Some(s) if s.p.is_finite() && s.k.is_finite() && s.p >= 0.0 && s.k >= 0.0 => Some(s),
            Some(_) => {
                return Err(BackendError::Schema(
                    "severity p and k must be finite and non-negative".into(),
                ))
            }
            None => {
                return Err(BackendError::Schema(
                    "severity {p, k} is required when punishing with backend-decided costs".into(),
                ))
            }
        }
    } else {
        None
    };
    Ok(Decision {
        choice,
        severity,
        rationale: raw.reasoning.unwrap_or_default(),
    })
}

pub struct LlmBackend {
    settings: LlmSettings,
    api_key: Option<String>,
    templates: TemplateSet,
    agent: ureq::Agent,
    jitter: Mutex<ChaCha8Rng>,
    trace: Option<Mutex<Box<dyn Write + Send>>>,
    repairs: AtomicU64,
    transport_retries: AtomicU64,
}

impl std::fmt::Debug for LlmBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmBackend")
            .field("base_url", &self.settings.base_url)
            .field("model", &self.settings.model)
            .finish_non_exhaustive()
    }
}

impl LlmBackend {
    /// Builds a client from explicit settings. `seed` feeds the retry-jitter stream.
    pub fn new(
        settings: LlmSettings,
        api_key: Option<String>,
        seed: u64,
    ) -> Result<Self, BackendError> {
        let templates = match &settings.templates_dir {
            Some(dir) => TemplateSet::load_dir(dir).map_err(|e| {
                BackendError::Render(format!("cannot load templates from {}: {e}", dir.display()))
            })?,
            None => TemplateSet::default(),
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(settings.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            settings,
            api_key,
            templates,
            agent,
            jitter: Mutex::new(stream(seed, StreamPurpose::RetryJitter)),
            trace: None,
            repairs: AtomicU64::new(0),
            transport_retries: AtomicU64::new(0),
        })
    }

    /// Like [`LlmBackend::new`] but honours `LLM_API_KEY`, `LLM_BASE_URL` and `LLM_MODEL`.
    pub fn from_env(mut settings: LlmSettings, seed: u64) -> Result<Self, BackendError> {
        if let Ok(url) = std::env::var(ENV_BASE_URL) {
            settings.base_url = url;
        }
        if let Ok(model) = std::env::var(ENV_MODEL) {
            settings.model = model;
        }
        let key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Self::new(settings, key, seed)
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    /// Writes redacted request/response pairs as JSON lines.
    pub fn with_trace(mut self, sink: Box<dyn Write + Send>) -> Self {
        self.trace = Some(Mutex::new(sink));
        self
    }

    pub fn with_trace_file(self, path: PathBuf) -> std::io::Result<Self> {
        let file = std::fs::File::create(path)?;
        Ok(self.with_trace(Box::new(std::io::BufWriter::new(file))))
    }

    pub fn settings(&self) -> &LlmSettings {
        &self.settings
    }

    /// Total repair prompts sent so far.
    pub fn repair_count(&self) -> u64 {
        self.repairs.load(Ordering::Relaxed)
    }

    pub fn transport_retry_count(&self) -> u64 {
        self.transport_retries.load(Ordering::Relaxed)
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.settings.base_url.trim_end_matches('/'))
    }

    fn redact(&self, text: &str) -> String {
        match &self.api_key {
            Some(key) if !key.is_empty() => text.replace(key.as_str(), "***"),
            _ => text.to_string(),
        }
    }

    fn trace_exchange(&self, request: &Value, status: Option<u16>, response: &str) {
        if let Some(sink) = &self.trace {
            let line = json!({
                "endpoint": self.endpoint(),
                "authorization": if self.api_key.is_some() { "Bearer ***" } else { "" },
                "request": request,
                "status": status,
                "response": self.redact(response),
            });
            let mut sink = sink.lock().expect("trace sink poisoned");
            let _ = writeln!(sink, "{}", self.redact(&line.to_string()));
            let _ = sink.flush();
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let base = self.settings.backoff_base_ms.saturating_mul(1u64 << attempt.min(20));
        let capped = base.min(self.settings.backoff_max_ms);
        let factor: f64 = self
            .jitter
            .lock()
            .expect("jitter rng poisoned")
            .random_range(0.5..1.0);
        Duration::from_millis((capped as f64 * factor) as u64)
    }

    /// Sends one chat request, retrying transient transport failures.
    /// Returns the assistant content and the number of retries used.
    fn chat(&self, messages: &[Value]) -> Result<(String, u32), BackendError> {
        let body = json!({
            "model": self.settings.model,
            "temperature": self.settings.temperature,
            "top_p": self.settings.top_p,
            "messages": messages,
        });
        let mut attempt = 0u32;
        loop {
            let mut request = self
                .agent
                .post(&self.endpoint())
                .header("Content-Type", "application/json");
            if let Some(key) = &self.api_key {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
            let failure = match request.send(body.to_string()) {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    let text = response
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| format!("reading response body: {e}"));
                    match text {
                        Ok(text) => {
                            self.trace_exchange(&body, Some(status), &text);
                            if (200..300).contains(&status) {
                                return extract_content(&text).map(|c| (c, attempt));
                            }
                            let msg = format!("HTTP {status}: {}", self.redact(truncate(&text)));
                            if status == 429 || status >= 500 {
                                msg
                            } else {
                                return Err(BackendError::Transport(msg));
                            }
                        }
                        Err(e) => e,
                    }
                }
                Err(e) => {
                    self.trace_exchange(&body, None, &e.to_string());
                    self.redact(&e.to_string())
                }
            };
            if attempt >= self.settings.transport_retries {
                return Err(BackendError::Transport(format!(
                    "{failure} (after {attempt} retries)"
                )));
            }
            let delay = self.backoff(attempt);
            log::warn!("llm transport failure, retrying in {delay:?}: {failure}");
            std::thread::sleep(delay);
            attempt += 1;
            self.transport_retries.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Renders, sends and parses one decision, with repair retries on bad replies.
    pub fn llm_decide(&self, ctx: &DecisionContext) -> Result<LlmOutcome, BackendError> {
        let (system, user) = self.templates.render_messages(ctx)?;
        let mut messages = vec![
            json!({"role": "system", "content": system}),
            json!({"role": "user", "content": user}),
        ];
        let mut transport_total = 0;
        let mut repair = 0u32;
        loop {
            let (content, retries) = self.chat(&messages)?;
            transport_total += retries;
            match parse_reply(ctx, &content) {
                Ok(decision) => {
                    if repair > 0 {
                        log::info!(
                            "{} decision for {} parsed after {repair} repair retries",
                            ctx.kind,
                            ctx.actor.agent_id
                        );
                    }
                    return Ok(LlmOutcome {
                        decision,
                        repair_retries: repair,
                        transport_retries: transport_total,
                    });
                }
                Err(err) => {
                    if repair >= self.settings.repair_retries {
                        return Err(err);
                    }
                    repair += 1;
                    self.repairs.fetch_add(1, Ordering::Relaxed);
                    log::info!(
                        "repair retry {repair} for {} decision of {}: {err}",
                        ctx.kind,
                        ctx.actor.agent_id
                    );
                    messages.push(json!({"role": "assistant", "content": content}));
                    messages.push(json!({
                        "role": "user",
                        "content": format!(
                            "Your previous reply could not be used ({err}). Reply again with only the JSON object requested.{}",
                            if ctx.punishment.mode == PunishmentMode::BackendDecided {
                                " Include severity {\"p\", \"k\"} when the decision is Punish."
                            } else {
                                ""
                            }
                        ),
                    }));
                }
            }
        }
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn extract_content(body: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(body)
        .map_err(|e| BackendError::Transport(format!("malformed completion body: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            BackendError::Transport("completion body has no choices[0].message.content".into())
        })
}

impl DecisionBackend for LlmBackend {
    fn name(&self) -> &str {
        "llm"
    }

    fn decide(&self, ctx: &DecisionContext) -> Result<Decision, BackendError> {
        self.llm_decide(ctx).map(|o| o.decision)
    }

    /// Up to `max_in_flight` requests run concurrently; results keep input order.
    fn decide_batch(&self, contexts: &[DecisionContext]) -> Vec<Result<Decision, BackendError>> {
        let workers = self.settings.max_in_flight.max(1).min(contexts.len());
        if workers <= 1 {
            return contexts.iter().map(|c| self.decide(c)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<Decision, BackendError>>>> =
            contexts.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= contexts.len() {
                        break;
                    }
                    let result = self.decide(&contexts[i]);
                    *slots[i].lock().expect("slot poisoned") = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| {
                s.into_inner()
                    .expect("slot poisoned")
                    .expect("every slot is filled")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::accuracy::ScenarioSuite;
    use crate::backend::DecisionKind;
    use crate::config::PunishmentParams;

    fn ctx_of(kind: DecisionKind) -> DecisionContext {
        ScenarioSuite::generate()
            .scenarios
            .into_iter()
            .find(|s| s.context.kind == kind)
            .unwrap()
            .context
    }

    #[test]
    fn parses_plain_and_fenced_replies() {
        let ctx = ctx_of(DecisionKind::Order);
        let d = parse_reply(&ctx, r#"{"decision":"Budget","reasoning":"cheap"}"#).unwrap();
        assert_eq!(d.choice, Choice::Budget);
        assert_eq!(d.rationale, "cheap");
        let d = parse_reply(&ctx, "```json\n{\"decision\": \"Premium\", \"reasoning\": \"\"}\n```")
            .unwrap();
        assert_eq!(d.choice, Choice::Premium);
    }

    #[test]
    fn rejects_prose_and_bad_enums() {
        let ctx = ctx_of(DecisionKind::Order);
        assert!(matches!(
            parse_reply(&ctx, "I will have the budget meal."),
            Err(BackendError::Parse(_))
        ));
        assert!(matches!(
            parse_reply(&ctx, r#"{"decision":"Salad","reasoning":""}"#),
            Err(BackendError::Schema(_))
        ));
        assert!(matches!(
            parse_reply(&ctx, r#"{"decision":"Punish","reasoning":""}"#),
            Err(BackendError::Schema(_))
        ));
        assert!(matches!(
            parse_reply(&ctx, r#"{"decision":"Budget","reasoning":"","mood":"happy"}"#),
            Err(BackendError::Parse(_))
        ));
    }

    #[test]
    fn severity_rules() {
        let mut ctx = ctx_of(DecisionKind::PunishDefector);
        ctx.punishment = PunishmentParams::backend_decided();
        let d = parse_reply(
            &ctx,
            r#"{"decision":"Punish","severity":{"p":4,"k":1},"reasoning":"x"}"#,
        )
        .unwrap();
        assert_eq!(d.severity, Some(Severity { p: 4.0, k: 1.0 }));
        assert!(matches!(
            parse_reply(&ctx, r#"{"decision":"Punish","reasoning":"x"}"#),
            Err(BackendError::Schema(_))
        ));
        let d = parse_reply(&ctx, r#"{"decision":"Abstain","reasoning":"x"}"#).unwrap();
        assert_eq!(d.severity, None);

        ctx.punishment = PunishmentParams::explicit(3.0, 1.0);
        let d = parse_reply(
            &ctx,
            r#"{"decision":"Punish","severity":{"p":4,"k":1},"reasoning":"x"}"#,
        )
        .unwrap();
        assert_eq!(d.severity, None);
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let settings = LlmSettings {
            base_url: "http://127.0.0.1:9".into(),
            transport_retries: 1,
            backoff_base_ms: 1,
            backoff_max_ms: 2,
            timeout_secs: 2,
            ..LlmSettings::default()
        };
        let backend = LlmBackend::new(settings, Some("secret".into()), 0).unwrap();
        let err = backend.llm_decide(&ctx_of(DecisionKind::Order)).unwrap_err();
        assert!(matches!(err, BackendError::Transport(_)), "{err}");
        assert!(!err.to_string().contains("secret"));
        assert_eq!(backend.transport_retry_count(), 1);
    }

    #[test]
    fn render_failure_precedes_network() {
        let templates = TemplateSet {
            order: "{{nope}}".into(),
            ..TemplateSet::default()
        };
        let backend = LlmBackend::new(
            LlmSettings {
                base_url: "http://127.0.0.1:9".into(),
                ..LlmSettings::default()
            },
            None,
            0,
        )
        .unwrap()
        .with_templates(templates);
        let err = backend.llm_decide(&ctx_of(DecisionKind::Order)).unwrap_err();
        assert!(matches!(err, BackendError::Render(_)));
        assert_eq!(backend.transport_retry_count(), 0);
    }
}
