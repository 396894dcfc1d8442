//! Multi-recognizer OCSR arbitration.
//!
//! Every recognizer reads the same depiction. Each answer is standardized,
//! rendered back to a depiction, and scored against the original; the
//! highest-scoring valid candidate wins, ties going to the earliest
//! recognizer. Recognizers, renderers and evaluators are pluggable; the
//! crate ships a depiction-record renderer and a fingerprint evaluator that
//! stand in for pixel rendering and visual comparison in tests.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chem::{parse_smiles, standardize, standardize_molecule};
use crate::feat::{ecfp, tanimoto, DEFAULT_RADIUS, DEFAULT_WIDTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaKind {
    RasterImage,
    DepictionRecord,
}

const RECORD_PREFIX: &[u8] = b"patchem-depiction/1\n";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Depiction {
    payload: Vec<u8>,
    pub media_kind: MediaKind,
    pub source_path: Option<String>,
}

impl Depiction {
    pub fn new(payload: Vec<u8>, media_kind: MediaKind, source_path: Option<String>) -> Result<Self, ArbiterError> {
        if payload.is_empty() {
            return Err(ArbiterError::EmptyPayload);
        }
        Ok(Self {
            payload,
            media_kind,
            source_path,
        })
    }

    /// A depiction record embedding `smiles`.
    pub fn record(smiles: &str) -> Self {
        let mut payload = RECORD_PREFIX.to_vec();
        payload.extend_from_slice(smiles.as_bytes());
        Self {
            payload,
            media_kind: MediaKind::DepictionRecord,
            source_path: None,
        }
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// The embedded SMILES of a depiction record.
    pub fn decode_record(&self) -> Option<&str> {
        if self.media_kind != MediaKind::DepictionRecord {
            return None;
        }
        let rest = self.payload.strip_prefix(RECORD_PREFIX)?;
        core::str::from_utf8(rest).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum AdapterError {
    /// Timeout, spawn failure, or abnormal exit.
    #[error("adapter unreachable: {0}")]
    Unreachable(String),
    /// The reply could not be understood.
    #[error("adapter protocol error: {0}")]
    Protocol(String),
    /// The adapter answered with an error of its own.
    #[error("adapter reported: {0}")]
    Reported(String),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ArbiterError {
    #[error("depiction payload is empty")]
    EmptyPayload,
    #[error("no recognizers configured")]
    NoRecognizers,
    #[error("every candidate is invalid")]
    NoValidCandidate,
    #[error("render failed: {0}")]
    RenderFailed(String),
    #[error("evaluator protocol: {0}")]
    EvaluatorProtocol(String),
}

pub trait Recognizer {
    fn recognize(&self, input: &Depiction) -> Result<String, AdapterError>;
}

pub trait Renderer {
    fn render(&self, smiles: &str) -> Result<Depiction, AdapterError>;
}

pub trait Evaluator {
    /// Similarity in [0, 1]; anything else is a protocol error.
    fn score(&self, original: &Depiction, candidate: &Depiction) -> Result<f64, AdapterError>;
}

/// Renders a SMILES as a depiction record.
#[derive(Clone, Copy, Debug, Default)]
pub struct RecordRenderer;

impl Renderer for RecordRenderer {
    fn render(&self, smiles: &str) -> Result<Depiction, AdapterError> {
        Ok(Depiction::record(smiles))
    }
}

/// Scores two depiction records by Tanimoto similarity of their radius-2
/// fingerprints.
#[derive(Clone, Copy, Debug, Default)]
pub struct FingerprintEvaluator;

impl Evaluator for FingerprintEvaluator {
    fn score(&self, original: &Depiction, candidate: &Depiction) -> Result<f64, AdapterError> {
        let fp = |d: &Depiction| {
            let s = d
                .decode_record()
                .ok_or_else(|| AdapterError::Protocol("fingerprint evaluator needs depiction records".into()))?;
            let m = parse_smiles(s).map_err(|e| AdapterError::Protocol(e.to_string()))?;
            ecfp(&standardize_molecule(&m), DEFAULT_RADIUS, DEFAULT_WIDTH)
                .map_err(|e| AdapterError::Protocol(e.to_string()))
        };
        tanimoto(&fp(original)?, &fp(candidate)?).map_err(|e| AdapterError::Protocol(e.to_string()))
    }
}

/// Returns a fixed answer; handy for tests and replays.
#[derive(Clone, Debug)]
pub struct FixedRecognizer(pub Result<String, AdapterError>);

impl Recognizer for FixedRecognizer {
    fn recognize(&self, _: &Depiction) -> Result<String, AdapterError> {
        self.0.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    AdapterUnreachable,
    AdapterError,
    InvalidSmiles,
    RenderFailed,
    EvaluatorProtocol,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognizerCandidate {
    /// 1-based position in the recognizer list.
    pub model_id: usize,
    pub raw_smiles: Option<String>,
    pub standardized: Option<String>,
    pub rendered: Option<Depiction>,
    pub similarity: f64,
    pub valid: bool,
    pub issue: Option<Issue>,
}

impl RecognizerCandidate {
    fn invalidate(&mut self, kind: IssueKind, message: String) {
        self.valid = false;
        self.similarity = 0.0;
        self.issue = Some(Issue { kind, message });
    }
}

/// Builds a candidate from one recognizer's answer, standardizing it.
pub fn candidate_from_output(model_id: usize, output: Result<String, AdapterError>) -> RecognizerCandidate {
    let mut c = RecognizerCandidate {
        model_id,
        raw_smiles: None,
        standardized: None,
        rendered: None,
        similarity: 0.0,
        valid: false,
        issue: None,
    };
    match output {
        Err(e) => {
            let kind = match e {
                AdapterError::Unreachable(_) => IssueKind::AdapterUnreachable,
                _ => IssueKind::AdapterError,
            };
            c.invalidate(kind, e.to_string());
        }
        Ok(raw) => {
            match standardize(raw.trim()) {
                Ok(s) => {
                    c.standardized = Some(s);
                    c.valid = true;
                }
                Err(d) => c.invalidate(IssueKind::InvalidSmiles, d.to_string()),
            }
            c.raw_smiles = Some(raw);
        }
    }
    c
}

/// Consults each recognizer once, in order.
pub fn recognize_all(
    input: &Depiction,
    recognizers: &[&dyn Recognizer],
) -> Result<Vec<RecognizerCandidate>, ArbiterError> {
    if recognizers.is_empty() {
        return Err(ArbiterError::NoRecognizers);
    }
    Ok(recognizers
        .iter()
        .enumerate()
        .map(|(i, r)| candidate_from_output(i + 1, r.recognize(input)))
        .collect())
}

pub fn render(smiles: &str, renderer: &dyn Renderer) -> Result<Depiction, ArbiterError> {
    let d = renderer
        .render(smiles)
        .map_err(|e| ArbiterError::RenderFailed(e.to_string()))?;
    if d.payload.is_empty() {
        return Err(ArbiterError::RenderFailed("empty payload".into()));
    }
    Ok(d)
}

/// Range-checked similarity.
pub fn score(original: &Depiction, rendered: &Depiction, evaluator: &dyn Evaluator) -> Result<f64, ArbiterError> {
    let v = evaluator
        .score(original, rendered)
        .map_err(|e| ArbiterError::EvaluatorProtocol(e.to_string()))?;
    check_similarity(v)
}

pub fn check_similarity(v: f64) -> Result<f64, ArbiterError> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(ArbiterError::EvaluatorProtocol(alloc::format!(
            "similarity {v} outside [0, 1]"
        )))
    }
}

/// Renders and scores every valid candidate. Render or score failures
/// invalidate that candidate only.
pub fn evaluate_candidates(
    input: &Depiction,
    candidates: &mut [RecognizerCandidate],
    renderer: &dyn Renderer,
    evaluator: &dyn Evaluator,
) {
    for c in candidates.iter_mut().filter(|c| c.valid) {
        let smiles = c.standardized.clone().expect("valid candidates are standardized");
        match render(&smiles, renderer) {
            Err(e) => c.invalidate(IssueKind::RenderFailed, e.to_string()),
            Ok(d) => {
                match score(input, &d, evaluator) {
                    Ok(s) => c.similarity = s,
                    Err(e) => c.invalidate(IssueKind::EvaluatorProtocol, e.to_string()),
                }
                c.rendered = Some(d);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArbiterResult {
    pub candidates: Vec<RecognizerCandidate>,
    pub selected_model: usize,
    pub final_smiles: String,
}

/// Argmax of similarity over valid candidates; ties go to the lowest
/// model id.
pub fn select_best(candidates: Vec<RecognizerCandidate>) -> Result<ArbiterResult, ArbiterError> {
    let mut best: Option<&RecognizerCandidate> = None;
    for c in candidates.iter().filter(|c| c.valid) {
        let better = match best {
            None => true,
            Some(b) => c.similarity > b.similarity || (c.similarity == b.similarity && c.model_id < b.model_id),
        };
        if better {
            best = Some(c);
        }
    }
    let best = best.ok_or(ArbiterError::NoValidCandidate)?;
    let selected_model = best.model_id;
    let final_smiles = best.standardized.clone().expect("valid candidates are standardized");
    Ok(ArbiterResult {
        candidates,
        selected_model,
        final_smiles,
    })
}

/// The full loop: recognize, standardize, render, score, select.
pub fn arbitrate(
    input: &Depiction,
    recognizers: &[&dyn Recognizer],
    renderer: &dyn Renderer,
    evaluator: &dyn Evaluator,
) -> Result<ArbiterResult, ArbiterError> {
    let mut candidates = recognize_all(input, recognizers)?;
    evaluate_candidates(input, &mut candidates, renderer, evaluator);
    select_best(candidates)
}
