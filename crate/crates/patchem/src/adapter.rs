//! Subprocess adapters speaking one JSON line each way.
//!
//! Each call launches the configured command, writes a single request line
//! such as `{"op":"recognize","image_b64":"..."}` to its stdin, and reads a
//! single reply line, either `{"ok":true,"value":...}` or
//! `{"ok":false,"error":"..."}`. A timeout, spawn failure or non-zero exit
//! is reported as unreachable.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use patchem_core::arbiter::{AdapterError, Depiction, Evaluator, MediaKind, Recognizer, Renderer};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub op: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_b64: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smiles: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image2_b64: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SubprocessAdapter {
    pub command: Vec<String>,
    pub timeout: Duration,
}

impl SubprocessAdapter {
    pub fn new(command: Vec<String>, timeout: Duration) -> Self {
        Self { command, timeout }
    }

    /// One request/response exchange, returning the reply's `value`.
    pub fn call(&self, request: &Request) -> Result<Value, AdapterError> {
        let (program, args) = self
            .command
            .split_first()
            .ok_or_else(|| AdapterError::Unreachable("empty adapter command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| AdapterError::Unreachable(format!("{program}: {e}")))?;

        let mut line = serde_json::to_string(request).expect("request serializes");
        line.push('\n');
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            // a child that exits without reading closes the pipe; its exit
            // status decides the outcome
            let _ = stdin.write_all(line.as_bytes());
            drop(stdin);
            let mut out = String::new();
            let res = stdout.read_to_string(&mut out).map(|_| out);
            let _ = tx.send(res);
        });
        let output = match rx.recv_timeout(self.timeout) {
            Ok(r) => r.map_err(|e| AdapterError::Unreachable(e.to_string()))?,
            Err(_) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(AdapterError::Unreachable(format!(
                    "timed out after {} ms",
                    self.timeout.as_millis()
                )));
            }
        };
        let status = child.wait().map_err(|e| AdapterError::Unreachable(e.to_string()))?;
        if !status.success() {
            return Err(AdapterError::Unreachable(format!("adapter exited with {status}")));
        }
        parse_reply(&output)
    }
}

pub fn parse_reply(output: &str) -> Result<Value, AdapterError> {
    let line = output
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| AdapterError::Protocol("no reply line".into()))?;
    let reply: Value = serde_json::from_str(line).map_err(|e| AdapterError::Protocol(e.to_string()))?;
    match reply.get("ok").and_then(Value::as_bool) {
        Some(true) => reply
            .get("value")
            .cloned()
            .ok_or_else(|| AdapterError::Protocol("reply lacks value".into())),
        Some(false) => Err(AdapterError::Reported(
            reply
                .get("error")
                .and_then(Value::as_str)
                .unwrap_or("unspecified error")
                .to_string(),
        )),
        None => Err(AdapterError::Protocol("reply lacks boolean ok".into())),
    }
}

pub fn encode(d: &Depiction) -> String {
    B64.encode(d.payload())
}

/// Payloads that carry the depiction-record prefix decode as records.
pub fn decode_depiction(b64: &str) -> Result<Depiction, AdapterError> {
    let bytes = B64
        .decode(b64.trim())
        .map_err(|e| AdapterError::Protocol(format!("bad base64: {e}")))?;
    depiction_from_bytes(bytes, None).map_err(|e| AdapterError::Protocol(e.to_string()))
}

pub fn depiction_from_bytes(
    bytes: Vec<u8>,
    source: Option<String>,
) -> Result<Depiction, patchem_core::arbiter::ArbiterError> {
    let probe = Depiction::new(bytes.clone(), MediaKind::DepictionRecord, source.clone())?;
    if probe.decode_record().is_some() {
        Ok(probe)
    } else {
        Depiction::new(bytes, MediaKind::RasterImage, source)
    }
}

impl Recognizer for SubprocessAdapter {
    fn recognize(&self, input: &Depiction) -> Result<String, AdapterError> {
        let v = self.call(&Request {
            op: "recognize".into(),
            image_b64: Some(encode(input)),
            ..Default::default()
        })?;
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| AdapterError::Protocol("recognize value must be a string".into()))
    }
}

impl Renderer for SubprocessAdapter {
    fn render(&self, smiles: &str) -> Result<Depiction, AdapterError> {
        let v = self.call(&Request {
            op: "render".into(),
            smiles: Some(smiles.into()),
            ..Default::default()
        })?;
        let b64 = v
            .as_str()
            .ok_or_else(|| AdapterError::Protocol("render value must be base64 text".into()))?;
        decode_depiction(b64)
    }
}

impl Evaluator for SubprocessAdapter {
    fn score(&self, original: &Depiction, candidate: &Depiction) -> Result<f64, AdapterError> {
        let v = self.call(&Request {
            op: "score".into(),
            image_b64: Some(encode(original)),
            image2_b64: Some(encode(candidate)),
            ..Default::default()
        })?;
        v.as_f64()
            .ok_or_else(|| AdapterError::Protocol("score value must be a number".into()))
    }
}

/// Behaviour of the built-in mock adapter.
#[derive(Clone, Debug, PartialEq)]
pub enum MockMode {
    /// Recognize: the SMILES embedded in a depiction record. Render: a
    /// depiction record. Score: fingerprint similarity.
    Truth,
    /// Recognize: always this text.
    Fixed(String),
    /// Reply with an error.
    Fail,
    /// Exit with a non-zero status.
    Crash,
    /// Sleep this many milliseconds before answering truthfully.
    Sleep(u64),
    /// Score: always this value, even out of range.
    Score(f64),
}

impl std::str::FromStr for MockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "truth" => Ok(MockMode::Truth),
            "fixed" => Ok(MockMode::Fixed(arg.to_string())),
            "fail" => Ok(MockMode::Fail),
            "crash" => Ok(MockMode::Crash),
            "sleep" => arg.parse().map(MockMode::Sleep).map_err(|e| format!("sleep:<ms>: {e}")),
            "score" => arg
                .parse()
                .map(MockMode::Score)
                .map_err(|e| format!("score:<value>: {e}")),
            _ => Err(format!("unknown mock mode {s}")),
        }
    }
}

/// Answers one request line; `None` means exit with failure.
pub fn mock_reply(mode: &MockMode, request_line: &str) -> Option<Value> {
    use patchem_core::arbiter::{FingerprintEvaluator, RecordRenderer};
    let err = |m: String| Some(json!({"ok": false, "error": m}));
    let req: Request = match serde_json::from_str(request_line) {
        Ok(r) => r,
        Err(e) => return err(format!("bad request: {e}")),
    };
    match mode {
        MockMode::Crash => return None,
        MockMode::Fail => return err("mock failure".into()),
        MockMode::Sleep(ms) => thread::sleep(Duration::from_millis(*ms)),
        _ => {}
    }
    let image = |b: &Option<String>| -> Result<Depiction, String> {
        decode_depiction(b.as_deref().ok_or("missing image")?).map_err(|e| e.to_string())
    };
    match req.op.as_str() {
        "recognize" => {
            if let MockMode::Fixed(s) = mode {
                return Some(json!({"ok": true, "value": s}));
            }
            match image(&req.image_b64) {
                Ok(d) => match d.decode_record() {
                    Some(s) => Some(json!({"ok": true, "value": s})),
                    None => err("not a depiction record".into()),
                },
                Err(e) => err(e),
            }
        }
        "render" => match RecordRenderer.render(req.smiles.as_deref().unwrap_or_default()) {
            Ok(d) => Some(json!({"ok": true, "value": encode(&d)})),
            Err(e) => err(e.to_string()),
        },
        "score" => {
            if let MockMode::Score(v) = mode {
                return Some(json!({"ok": true, "value": v}));
            }
            match (image(&req.image_b64), image(&req.image2_b64)) {
                (Ok(a), Ok(b)) => match FingerprintEvaluator.score(&a, &b) {
                    Ok(v) => Some(json!({"ok": true, "value": v})),
                    Err(e) => err(e.to_string()),
                },
                (Err(e), _) | (_, Err(e)) => err(e),
            }
        }
        other => err(format!("unknown op {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reply_parsing() {
        assert_eq!(parse_reply("{\"ok\":true,\"value\":\"CCO\"}\n").unwrap(), json!("CCO"));
        assert_eq!(
            parse_reply("{\"ok\":false,\"error\":\"nope\"}").unwrap_err(),
            AdapterError::Reported("nope".into())
        );
        assert!(matches!(parse_reply("not json"), Err(AdapterError::Protocol(_))));
        assert!(matches!(parse_reply(""), Err(AdapterError::Protocol(_))));
    }

    #[test]
    fn request_omits_absent_fields() {
        let r = Request {
            op: "render".into(),
            smiles: Some("C".into()),
            ..Default::default()
        };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"render","smiles":"C"}"#);
    }

    #[test]
    fn mock_truth_recognizes_records() {
        let d = Depiction::record("CCO");
        let line = serde_json::to_string(&Request {
            op: "recognize".into(),
            image_b64: Some(encode(&d)),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(
            mock_reply(&MockMode::Truth, &line).unwrap(),
            json!({"ok": true, "value": "CCO"})
        );
        assert!(mock_reply(&MockMode::Crash, &line).is_none());
    }

    #[test]
    fn missing_program_is_unreachable() {
        let a = SubprocessAdapter::new(vec!["/nonexistent/adapter".into()], Duration::from_secs(1));
        assert!(matches!(
            a.recognize(&Depiction::record("C")),
            Err(AdapterError::Unreachable(_))
        ));
    }
}
