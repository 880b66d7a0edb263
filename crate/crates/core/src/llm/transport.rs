use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Value,
    pub timeout: Duration,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("{0}")]
    Io(String),
}

impl TransportError {
    /// Rate limits, server errors and connection failures are worth another
    /// attempt; other client errors are not.
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            TransportError::Io(_) => true,
        }
    }
}

/// POSTs a JSON body and returns the parsed JSON response. The seam between
/// the client and the network.
pub trait Transport: Send + Sync {
    fn post_json(&self, request: &HttpRequest) -> Result<Value, TransportError>;
}

/// Blocking HTTPS transport.
#[derive(Debug, Default, Clone, Copy)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post_json(&self, request: &HttpRequest) -> Result<Value, TransportError> {
        let agent = ureq::AgentBuilder::new().timeout(request.timeout).build();
        let mut req = agent.post(&request.url);
        for (k, v) in &request.headers {
            req = req.set(k, v);
        }
        match req.send_json(&request.body) {
            Ok(resp) => resp
                .into_json::<Value>()
                .map_err(|e| TransportError::Io(format!("reading response body: {e}"))),
            Err(ureq::Error::Status(status, resp)) => Err(TransportError::Status {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(e) => Err(TransportError::Io(e.to_string())),
        }
    }
}
