//! Model clients: an HTTP chat endpoint and a scripted mock.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodingConfig {
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl Default for DecodingConfig {
    fn default() -> Self {
        DecodingConfig { temperature: 0.0, max_tokens: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl std::ops::AddAssign for Usage {
    fn add_assign(&mut self, o: Usage) {
        self.prompt_tokens += o.prompt_tokens;
        self.completion_tokens += o.completion_tokens;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<Usage>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClientError {
    /// Worth retrying: connection failures, rate limits, server errors.
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("request failed: {0}")]
    Fatal(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
}

/// Anything that turns a prompt into a completion. Implementations must be
/// usable from several threads at once.
pub trait ModelClient: Send + Sync {
    fn send(&self, system: &str, prompt: &str, config: &DecodingConfig) -> Result<Completion, ClientError>;

    /// Label used in reports.
    fn name(&self) -> String;
}

type Script = dyn Fn(&str, usize) -> String + Send + Sync;

/// Deterministic client replaying a script. The script sees the prompt and
/// the zero-based index of the call within its chain, which it infers from
/// the number of subquestions already answered.
pub struct MockClient {
    name: String,
    script: Box<Script>,
    calls: AtomicUsize,
}

impl MockClient {
    pub fn new(name: impl Into<String>, script: impl Fn(&str, usize) -> String + Send + Sync + 'static) -> Self {
        MockClient { name: name.into(), script: Box::new(script), calls: AtomicUsize::new(0) }
    }

    /// Replies `reply` to every prompt.
    pub fn constant(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        MockClient::new("constant", move |_, _| reply.clone())
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ModelClient for MockClient {
    fn send(&self, _system: &str, prompt: &str, _config: &DecodingConfig) -> Result<Completion, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let step = super::SUBQUESTIONS.iter().filter(|s| prompt.contains(*s)).count().saturating_sub(1);
        Ok(Completion { text: (self.script)(prompt, step), usage: None })
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

static HTTP_CLIENTS_BUILT: AtomicUsize = AtomicUsize::new(0);

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub token: Option<String>,
    pub model: String,
    pub max_attempts: u32,
    /// First retry delay; doubles on each further attempt.
    pub backoff: Duration,
    pub timeout: Duration,
}

impl HttpConfig {
    pub const ENV_ENDPOINT: &'static str = "LADDER_ENDPOINT";
    pub const ENV_TOKEN: &'static str = "LADDER_API_KEY";
    pub const ENV_MODEL: &'static str = "LADDER_MODEL";

    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            token: None,
            model: model.into(),
            max_attempts: 5,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }

    /// Settings from the environment; `endpoint` overrides the variable.
    pub fn from_env(endpoint: Option<String>) -> Result<Self, EvalError> {
        let endpoint = endpoint
            .or_else(|| std::env::var(Self::ENV_ENDPOINT).ok())
            .filter(|e| !e.trim().is_empty())
            .ok_or_else(|| EvalError::Config(format!("no endpoint given and {} is unset", Self::ENV_ENDPOINT)))?;
        let model = std::env::var(Self::ENV_MODEL).unwrap_or_else(|_| "default".to_string());
        let mut config = HttpConfig::new(endpoint, model);
        config.token = std::env::var(Self::ENV_TOKEN).ok().filter(|t| !t.is_empty());
        Ok(config)
    }
}

/// Client for an OpenAI-style chat-completions endpoint.
pub struct HttpClient {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Result<Self, EvalError> {
        if !(config.endpoint.starts_with("http://") || config.endpoint.starts_with("https://")) {
            return Err(EvalError::Config(format!("endpoint `{}` is not an http(s) URL", config.endpoint)));
        }
        if config.max_attempts == 0 {
            return Err(EvalError::Config("max attempts must be positive".into()));
        }
        HTTP_CLIENTS_BUILT.fetch_add(1, Ordering::SeqCst);
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Ok(HttpClient { config, agent })
    }

    /// Number of HTTP clients constructed in this process.
    pub fn constructed() -> usize {
        HTTP_CLIENTS_BUILT.load(Ordering::SeqCst)
    }

    fn attempt(&self, body: &Value) -> Result<Completion, ClientError> {
        let mut req = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(token) = &self.config.token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send_json(body).map_err(|e| ClientError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| ClientError::Transient(e.to_string()))?;
        match status {
            200..=299 => {}
            408 | 429 | 500..=599 => return Err(ClientError::Transient(format!("HTTP {status}: {text}"))),
            _ => return Err(ClientError::Fatal(format!("HTTP {status}: {text}"))),
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| ClientError::Fatal(format!("bad JSON: {e}")))?;
        let content = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| ClientError::Fatal("response has no choices[0].message.content".into()))?;
        let usage = v.get("usage").map(|u| Usage {
            prompt_tokens: u["prompt_tokens"].as_u64().unwrap_or(0),
            completion_tokens: u["completion_tokens"].as_u64().unwrap_or(0),
        });
        Ok(Completion { text: content.to_string(), usage })
    }
}

impl ModelClient for HttpClient {
    fn send(&self, system: &str, prompt: &str, config: &DecodingConfig) -> Result<Completion, ClientError> {
        let mut body = json!({
            "model": self.config.model,
            "temperature": config.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": prompt},
            ],
        });
        if let Some(m) = config.max_tokens {
            body["max_tokens"] = json!(m);
        }
        let mut delay = self.config.backoff;
        let mut last = String::new();
        for attempt in 1..=self.config.max_attempts {
            match self.attempt(&body) {
                Ok(c) => return Ok(c),
                Err(ClientError::Transient(e)) => {
                    log::warn!("attempt {attempt}/{} failed: {e}", self.config.max_attempts);
                    last = e;
                    if attempt < self.config.max_attempts {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Err(ClientError::Exhausted { attempts: self.config.max_attempts, last })
    }

    fn name(&self) -> String {
        self.config.model.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves the given (status, body) pairs, one connection each.
    fn serve(replies: Vec<(u16, String)>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for (status, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        format!("http://{addr}/v1/chat/completions")
    }

    fn quick(endpoint: String) -> HttpClient {
        let mut c = HttpConfig::new(endpoint, "test-model");
        c.backoff = Duration::from_millis(1);
        HttpClient::new(c).unwrap()
    }

    const OK: &str = r#"{"choices":[{"message":{"content":"the answer is yes"}}],"usage":{"prompt_tokens":7,"completion_tokens":4}}"#;

    #[test]
    fn retries_transient_failures() {
        let url = serve(vec![(503, "{}".into()), (429, "{}".into()), (200, OK.into())]);
        let c = quick(url).send("s", "p", &DecodingConfig::default()).unwrap();
        assert_eq!(c.text, "the answer is yes");
        assert_eq!(c.usage, Some(Usage { prompt_tokens: 7, completion_tokens: 4 }));
    }

    #[test]
    fn gives_up_after_five_attempts() {
        let url = serve(vec![(500, "{}".into()); 5]);
        let err = quick(url).send("s", "p", &DecodingConfig::default()).unwrap_err();
        assert!(matches!(err, ClientError::Exhausted { attempts: 5, .. }));
    }

    #[test]
    fn client_errors_are_not_retried() {
        let url = serve(vec![(401, "{}".into())]);
        assert!(matches!(quick(url).send("s", "p", &DecodingConfig::default()), Err(ClientError::Fatal(_))));
    }

    #[test]
    fn bad_endpoint_fails_fast() {
        assert!(HttpClient::new(HttpConfig::new("localhost:1", "m")).is_err());
    }

    #[test]
    fn mock_counts_calls() {
        let m = MockClient::constant("Yes");
        m.send("", "x", &DecodingConfig::default()).unwrap();
        assert_eq!(m.calls(), 1);
    }
}
