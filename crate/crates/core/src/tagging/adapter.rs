//! Client side of the newline-delimited JSON protocol used to reach an
//! external tagging model.
//!
//! Each request is one line `{"id", "text", "tokens"}` and each reply one line
//! `{"id", "spans": [{"token_start", "token_end", "label", "confidence"}]}`.
//! Unknown reply fields are ignored. Three transports carry the lines: the
//! stdio of a spawned subprocess, a raw TCP stream, or an HTTP endpoint that
//! takes the request as a POST body and answers with the reply as its body.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Prediction, EXTERNAL_TAGGER_ID};
use crate::annotation::{resolve_overlaps, tokenize, EntityLabel, EntitySpan};

pub const DEFAULT_ADAPTER_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter transport error: {0}")]
    Transport(String),
    #[error("adapter protocol error: {0}")]
    Protocol(String),
    #[error("adapter did not reply within {0:?}")]
    Timeout(Duration),
}

impl AdapterError {
    fn io(err: std::io::Error, timeout: Duration) -> Self {
        match err.kind() {
            ErrorKind::WouldBlock | ErrorKind::TimedOut => AdapterError::Timeout(timeout),
            _ => AdapterError::Transport(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

/// A span as the adapter sent it. Positions are signed so that negative
/// values parse and can be clipped rather than rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplySpan {
    pub token_start: i64,
    pub token_end: i64,
    pub label: EntityLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterReply {
    pub id: String,
    pub spans: Vec<ReplySpan>,
}

/// Clips spans to `[0, token_count)`, drops the ones left empty, clamps
/// confidences to `[0, 1]` and resolves overlaps.
pub fn sanitize_reply_spans(spans: &[ReplySpan], token_count: usize) -> Vec<EntitySpan> {
    let limit = token_count as i64;
    let clipped: Vec<EntitySpan> = spans
        .iter()
        .filter_map(|s| {
            let start = s.token_start.clamp(0, limit);
            let end = s.token_end.clamp(0, limit);
            (start < end).then(|| {
                let confidence = if s.confidence.is_nan() { 0.0 } else { s.confidence.clamp(0.0, 1.0) };
                EntitySpan::new(s.label, start as usize, end as usize).with_confidence(confidence)
            })
        })
        .collect();
    resolve_overlaps(&clipped)
}

/// Moves one request line to the adapter and brings one reply line back.
pub trait Transport: Send {
    fn round_trip(&mut self, line: &str, timeout: Duration) -> Result<String, AdapterError>;
}

/// Where an adapter lives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AdapterEndpoint {
    Command { program: String, args: Vec<String> },
    Tcp { addr: String },
    Http { url: String },
}

impl AdapterEndpoint {
    /// `tcp://host:port`, `http(s)://...`, or a whitespace-separated command
    /// line.
    pub fn parse(spec: &str) -> Option<Self> {
        let spec = spec.trim();
        if let Some(addr) = spec.strip_prefix("tcp://") {
            return Some(AdapterEndpoint::Tcp { addr: addr.to_string() });
        }
        if spec.starts_with("http://") || spec.starts_with("https://") {
            return Some(AdapterEndpoint::Http { url: spec.to_string() });
        }
        let mut parts = spec.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(AdapterEndpoint::Command { program, args: parts.collect() })
    }

    pub fn connect(&self, timeout: Duration) -> Result<AdapterHandle, AdapterError> {
        let transport: Box<dyn Transport> = match self {
            AdapterEndpoint::Command { program, args } => Box::new(StdioTransport::spawn(program, args)?),
            AdapterEndpoint::Tcp { addr } => Box::new(TcpTransport::new(addr.clone())),
            AdapterEndpoint::Http { url } => Box::new(HttpTransport::new(url.clone())),
        };
        Ok(AdapterHandle::new(transport, timeout))
    }
}

/// One connection to an adapter. Allows a single in-flight request; use
/// several handles for parallelism.
pub struct AdapterHandle {
    transport: Box<dyn Transport>,
    timeout: Duration,
}

impl AdapterHandle {
    pub fn new(transport: Box<dyn Transport>, timeout: Duration) -> Self {
        AdapterHandle { transport, timeout }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Sends one response to the adapter and returns a sanitized prediction.
    pub fn external_tag(&mut self, response_id: &str, text: &str) -> Result<Prediction, AdapterError> {
        let tokens = tokenize(text);
        let request = AdapterRequest {
            id: response_id.to_string(),
            text: text.to_string(),
            tokens: tokens.iter().map(|t| t.text.clone()).collect(),
        };
        let line = serde_json::to_string(&request).expect("request serializes");
        let started = Instant::now();
        let raw = self.transport.round_trip(&line, self.timeout)?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let reply: AdapterReply =
            serde_json::from_str(raw.trim()).map_err(|e| AdapterError::Protocol(format!("malformed reply: {e}")))?;
        if reply.id != request.id {
            return Err(AdapterError::Protocol(format!("reply id `{}` does not match request `{}`", reply.id, request.id)));
        }
        Ok(Prediction {
            response_id: response_id.to_string(),
            spans: sanitize_reply_spans(&reply.spans, tokens.len()),
            tagger_id: EXTERNAL_TAGGER_ID.to_string(),
            latency_ms,
        })
    }
}

/// Adapter running as a child process speaking JSON lines over stdio. The
/// child is respawned on the next request after a timeout or exit.
pub struct StdioTransport {
    program: String,
    args: Vec<String>,
    process: Option<StdioProcess>,
}

struct StdioProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl StdioProcess {
    fn spawn(program: &str, args: &[String]) -> Result<Self, AdapterError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AdapterError::Transport(format!("spawning `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(StdioProcess { child, stdin, lines })
    }
}

impl Drop for StdioProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl StdioTransport {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, AdapterError> {
        let process = StdioProcess::spawn(program, args)?;
        Ok(StdioTransport { program: program.to_string(), args: args.to_vec(), process: Some(process) })
    }

    fn exchange(process: &mut StdioProcess, line: &str, timeout: Duration) -> Result<String, AdapterError> {
        writeln!(process.stdin, "{line}")
            .and_then(|_| process.stdin.flush())
            .map_err(|e| AdapterError::Transport(format!("writing to adapter: {e}")))?;
        match process.lines.recv_timeout(timeout) {
            Ok(Ok(reply)) => Ok(reply),
            Ok(Err(e)) => Err(AdapterError::Transport(format!("reading from adapter: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(AdapterError::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => Err(AdapterError::Transport("adapter closed its stdout".into())),
        }
    }
}

impl Transport for StdioTransport {
    fn round_trip(&mut self, line: &str, timeout: Duration) -> Result<String, AdapterError> {
        if self.process.is_none() {
            self.process = Some(StdioProcess::spawn(&self.program, &self.args)?);
        }
        let process = self.process.as_mut().expect("process present");
        let result = Self::exchange(process, line, timeout);
        if result.is_err() {
            // A late reply would desynchronize the stream; start over next time.
            self.process = None;
        }
        result
    }
}

/// Adapter listening on a TCP socket. Connects lazily and reconnects after
/// any failure.
pub struct TcpTransport {
    addr: String,
    stream: Option<BufReader<TcpStream>>,
}

impl TcpTransport {
    pub fn new(addr: String) -> Self {
        TcpTransport { addr, stream: None }
    }

    fn exchange(&mut self, line: &str, timeout: Duration) -> Result<String, AdapterError> {
        if self.stream.is_none() {
            let stream = TcpStream::connect(&self.addr)
                .map_err(|e| AdapterError::Transport(format!("connecting to {}: {e}", self.addr)))?;
            // requests are single small writes; don't let Nagle hold them back
            stream.set_nodelay(true).map_err(|e| AdapterError::Transport(e.to_string()))?;
            self.stream = Some(BufReader::new(stream));
        }
        let reader = self.stream.as_mut().expect("connected");
        let stream = reader.get_mut();
        stream.set_read_timeout(Some(timeout)).map_err(|e| AdapterError::io(e, timeout))?;
        stream.set_write_timeout(Some(timeout)).map_err(|e| AdapterError::io(e, timeout))?;
        let mut request = String::with_capacity(line.len() + 1);
        request.push_str(line);
        request.push('\n');
        stream.write_all(request.as_bytes()).and_then(|_| stream.flush()).map_err(|e| AdapterError::io(e, timeout))?;
        let mut reply = String::new();
        match reader.read_line(&mut reply) {
            Ok(0) => Err(AdapterError::Transport("adapter closed the connection".into())),
            Ok(_) => Ok(reply),
            Err(e) => Err(AdapterError::io(e, timeout)),
        }
    }
}

impl Transport for TcpTransport {
    fn round_trip(&mut self, line: &str, timeout: Duration) -> Result<String, AdapterError> {
        let result = self.exchange(line, timeout);
        if result.is_err() {
            self.stream = None;
        }
        result
    }
}

/// Adapter behind an HTTP endpoint: POST the request line, read the reply
/// from the response body.
pub struct HttpTransport {
    url: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(url: String) -> Self {
        let agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
        HttpTransport { url, agent }
    }
}

impl Transport for HttpTransport {
    fn round_trip(&mut self, line: &str, timeout: Duration) -> Result<String, AdapterError> {
        let map_err = |e: ureq::Error| match e {
            ureq::Error::Timeout(_) => AdapterError::Timeout(timeout),
            ureq::Error::Io(io) => AdapterError::io(io, timeout),
            other => AdapterError::Transport(other.to_string()),
        };
        let mut response = self
            .agent
            .post(&self.url)
            .config()
            .timeout_global(Some(timeout))
            .build()
            .header("content-type", "application/json")
            .send(line)
            .map_err(map_err)?;
        let status = response.status();
        if !status.is_success() {
            return Err(AdapterError::Transport(format!("adapter answered HTTP {status}")));
        }
        response.body_mut().read_to_string().map_err(map_err)
    }
}
