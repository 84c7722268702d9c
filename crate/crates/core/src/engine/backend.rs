use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine as _;
use serde::{Deserialize, Serialize};

use crate::context::IMAGE_TOKEN;

pub const DEFAULT_MAX_TOKENS: u32 = 8192;

/// One generation call: prompt text plus the raster it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendRequest {
    pub prompt: String,
    pub image: Vec<u8>,
    pub image_mime: String,
    pub max_tokens: u32,
    pub temperature: f32,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    image_b64: String,
    image_mime: &'a str,
    max_tokens: u32,
    temperature: f32,
}

#[derive(Deserialize)]
struct WireResponse {
    svg_text: Option<String>,
    error: Option<String>,
}

impl BackendRequest {
    pub fn new(prompt: String, png: Vec<u8>) -> Self {
        BackendRequest {
            prompt,
            image: png,
            image_mime: "image/png".into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }

    /// Checks the request invariants: a non-empty image and exactly one
    /// image marker in the prompt.
    pub fn check(&self) -> Result<(), BackendError> {
        if self.image.is_empty() {
            return Err(BackendError::InvalidRequest("empty image".into()));
        }
        let markers = self.prompt.matches(IMAGE_TOKEN).count();
        if markers != 1 {
            return Err(BackendError::InvalidRequest(format!("prompt has {markers} image markers")));
        }
        Ok(())
    }

    /// JSON body of the HTTP wire contract.
    pub fn wire_body(&self, model: &str) -> Vec<u8> {
        let wire = WireRequest {
            model,
            prompt: &self.prompt,
            image_b64: base64::engine::general_purpose::STANDARD.encode(&self.image),
            image_mime: &self.image_mime,
            max_tokens: self.max_tokens,
            temperature: self.temperature,
        };
        serde_json::to_vec(&wire).expect("request serializes")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {0}: {1}")]
    Status(u16, String),
    #[error("backend reported error: {0}")]
    Remote(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Transport failures and 5xx responses are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status(code, _) => *code >= 500,
            _ => false,
        }
    }
}

/// A vision-language model endpoint. Shared across concurrent slide tasks.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        (**self).generate(req)
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        (**self).generate(req)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        (**self).generate(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles after each further failure.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

/// Re-sends the identical request on retryable failures.
pub struct Retrying<B> {
    inner: B,
    policy: RetryPolicy,
}

impl<B: Backend> Retrying<B> {
    pub fn new(inner: B, policy: RetryPolicy) -> Self {
        Retrying { inner, policy }
    }
}

impl<B: Backend> Backend for Retrying<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        let mut delay = self.policy.base_delay;
        let mut attempt = 1;
        loop {
            match self.inner.generate(req) {
                Err(e) if e.is_retryable() && attempt < self.policy.max_attempts => {
                    tracing::warn!(backend = self.inner.name(), attempt, error = %e, "retrying");
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

/// Client for the JSON wire contract: POST `{model, prompt, image_b64,
/// image_mime, max_tokens, temperature}`, answer `{svg_text}` or `{error}`.
pub struct HttpBackend {
    name: String,
    url: String,
    key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(name: &str, url: &str, key: Option<String>, model: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpBackend {
            name: name.to_string(),
            url: url.to_string(),
            key,
            model: model.to_string(),
            agent,
        }
    }

    /// Reads `SLIDER_BACKEND_<NAME>_URL` (required) and
    /// `SLIDER_BACKEND_<NAME>_KEY` (optional) from the environment. The
    /// backend name doubles as the model name.
    pub fn from_env(name: &str) -> Result<Self, BackendError> {
        let var = |suffix: &str| format!("SLIDER_BACKEND_{}_{suffix}", env_name(name));
        let url = std::env::var(var("URL")).map_err(|_| BackendError::Config(format!("{} is not set", var("URL"))))?;
        let key = std::env::var(var("KEY")).ok().filter(|k| !k.is_empty());
        Ok(Self::new(name, &url, key, name, Duration::from_secs(600)))
    }
}

/// Upper-cased name with non-alphanumerics mapped to `_`.
pub fn env_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect()
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        req.check()?;
        let mut call = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call
            .send(&req.wire_body(&self.model)[..])
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let parsed: Option<WireResponse> = serde_json::from_str(&body).ok();
        if !(200..300).contains(&status) {
            let msg = parsed.and_then(|p| p.error).unwrap_or(body);
            return Err(BackendError::Status(status, msg));
        }
        match parsed {
            Some(WireResponse { svg_text: Some(t), .. }) => Ok(t),
            Some(WireResponse { error: Some(e), .. }) => Err(BackendError::Remote(e)),
            _ => Err(BackendError::Remote("response has neither svg_text nor error".into())),
        }
    }
}

/// Counts calls to the wrapped backend.
pub struct Counting<B> {
    inner: B,
    calls: AtomicUsize,
}

impl<B: Backend> Counting<B> {
    pub fn new(inner: B) -> Self {
        Counting {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: Backend> Backend for Counting<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.generate(req)
    }
}

/// Replies with canned responses in order, repeating the last one.
pub struct Scripted {
    responses: Vec<Result<String, BackendError>>,
    next: Mutex<usize>,
}

impl Scripted {
    pub fn new(responses: Vec<Result<String, BackendError>>) -> Self {
        assert!(!responses.is_empty(), "scripted backend needs a response");
        Scripted {
            responses,
            next: Mutex::new(0),
        }
    }
}

impl Backend for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn generate(&self, _req: &BackendRequest) -> Result<String, BackendError> {
        let mut next = self.next.lock().expect("scripted lock");
        let i = (*next).min(self.responses.len() - 1);
        *next += 1;
        self.responses[i].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn request() -> BackendRequest {
        BackendRequest::new(format!("a {IMAGE_TOKEN} b"), vec![1, 2, 3])
    }

    #[test]
    fn request_checks() {
        assert!(request().check().is_ok());
        let mut r = request();
        r.prompt = "no marker".into();
        assert!(r.check().is_err());
        let mut r = request();
        r.image.clear();
        assert!(r.check().is_err());
    }

    #[test]
    fn wire_body_fields() {
        let v: serde_json::Value = serde_json::from_slice(&request().wire_body("m")).unwrap();
        assert_eq!(v["model"], "m");
        assert_eq!(v["image_b64"], "AQID");
        assert_eq!(v["image_mime"], "image/png");
        assert_eq!(v["max_tokens"], DEFAULT_MAX_TOKENS);
    }

    struct Recording {
        fail_first: usize,
        error: BackendError,
        bodies: Mutex<Vec<Vec<u8>>>,
    }

    impl Backend for Recording {
        fn name(&self) -> &str {
            "rec"
        }
        fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
            let mut b = self.bodies.lock().unwrap();
            b.push(req.wire_body("m"));
            if b.len() <= self.fail_first {
                Err(self.error.clone())
            } else {
                Ok("ok".into())
            }
        }
    }

    fn no_delay(max_attempts: u32) -> RetryPolicy {
        RetryPolicy {
            max_attempts,
            base_delay: Duration::ZERO,
        }
    }

    #[test]
    fn retries_resend_identical_bytes() {
        let rec = Arc::new(Recording {
            fail_first: 2,
            error: BackendError::Status(503, "busy".into()),
            bodies: Mutex::new(vec![]),
        });
        let r = Retrying::new(rec.clone(), no_delay(3));
        assert_eq!(r.generate(&request()).unwrap(), "ok");
        let bodies = rec.bodies.lock().unwrap();
        assert_eq!(bodies.len(), 3);
        assert!(bodies.iter().all(|b| b == &bodies[0]));
    }

    #[test]
    fn gives_up_after_max_attempts() {
        let rec = Arc::new(Recording {
            fail_first: 10,
            error: BackendError::Transport("reset".into()),
            bodies: Mutex::new(vec![]),
        });
        let r = Retrying::new(rec.clone(), no_delay(3));
        assert!(matches!(r.generate(&request()), Err(BackendError::Transport(_))));
        assert_eq!(rec.bodies.lock().unwrap().len(), 3);
    }

    #[test]
    fn client_errors_not_retried() {
        let rec = Arc::new(Recording {
            fail_first: 10,
            error: BackendError::Status(400, "bad".into()),
            bodies: Mutex::new(vec![]),
        });
        let r = Retrying::new(rec.clone(), no_delay(3));
        assert!(r.generate(&request()).is_err());
        assert_eq!(rec.bodies.lock().unwrap().len(), 1);
    }

    #[test]
    fn env_names() {
        assert_eq!(env_name("gemma-3.ft"), "GEMMA_3_FT");
    }
}
