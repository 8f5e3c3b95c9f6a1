use super::{GenerationError, Stage};
use std::path::Path;

/// One chat-completion exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub stage: Stage,
    pub system: String,
    pub user: String,
}

/// Anything that turns a request into model text.
pub trait GenerativeClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenerationError>;
}

/// Replays recorded responses. Never touches the network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StubClient {
    pub analysis: Option<String>,
    pub spec: Option<String>,
}

impl StubClient {
    pub fn new(analysis: impl Into<String>, spec: impl Into<String>) -> Self {
        StubClient {
            analysis: Some(analysis.into()),
            spec: Some(spec.into()),
        }
    }

    /// Loads `analysis.txt` and `spec.json` from `dir`; either may be absent.
    pub fn from_dir(dir: &Path) -> Result<Self, GenerationError> {
        let read = |name: &str| -> Result<Option<String>, GenerationError> {
            let p = dir.join(name);
            match std::fs::read_to_string(&p) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(GenerationError::Io(format!("{}: {e}", p.display()))),
            }
        };
        Ok(StubClient {
            analysis: read("analysis.txt")?,
            spec: read("spec.json")?,
        })
    }
}

impl GenerativeClient for StubClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenerationError> {
        let recorded = match request.stage {
            Stage::Analysis => &self.analysis,
            Stage::Spec => &self.spec,
        };
        recorded
            .clone()
            .ok_or(GenerationError::NoRecordedResponse(request.stage))
    }
}

/// Posts a JSON body and returns the JSON reply.
pub trait Transport {
    fn post_json(
        &self,
        url: &str,
        bearer: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, String>;
}

pub const ENV_ENDPOINT: &str = "MODEL_ENDPOINT";
pub const ENV_MODEL: &str = "MODEL_NAME";
pub const ENV_API_KEY: &str = "MODEL_API_KEY";

/// Generic chat-completion client over some [`Transport`].
#[derive(Debug, Clone)]
pub struct LiveClient<T> {
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    pub transport: T,
}

impl<T: Transport> LiveClient<T> {
    /// Reads `MODEL_ENDPOINT`, `MODEL_NAME` and `MODEL_API_KEY`.
    pub fn from_env(transport: T) -> Result<Self, GenerationError> {
        let var = |k: &str| {
            std::env::var(k).map_err(|_| {
                GenerationError::ModelUnavailable(format!("environment variable {k} is not set"))
            })
        };
        Ok(LiveClient {
            endpoint: var(ENV_ENDPOINT)?,
            model: var(ENV_MODEL)?,
            api_key: var(ENV_API_KEY)?,
            transport,
        })
    }
}

impl<T: Transport> GenerativeClient for LiveClient<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, GenerationError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let reply = self
            .transport
            .post_json(&self.endpoint, &self.api_key, &body)
            .map_err(GenerationError::ModelUnavailable)?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| {
                GenerationError::ModelUnavailable("reply has no choices[0].message.content".into())
            })
    }
}

/// Blocking HTTPS transport.
#[cfg(feature = "live")]
#[derive(Debug, Clone, Default)]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

#[cfg(feature = "live")]
impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: &str,
        body: &serde_json::Value,
    ) -> Result<serde_json::Value, String> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(bearer)
            .json(body)
            .send()
            .map_err(|e| e.to_string())?;
        let status = resp.status();
        if !status.is_success() {
            return Err(format!("HTTP {status}"));
        }
        resp.json().map_err(|e| e.to_string())
    }
}
