//! Loading and saving pipeline artifacts by path.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use termscape_core::{AnnotationSession, ConceptIndex, TokenEmbeddingRecord};

use crate::atomic::{read_to_string, write_atomic};
use crate::error::{Result, WorkbenchError};
use crate::formats::{self, FormatError, Meta, ProjectionRow, VectorStore};

fn json_error(e: serde_json::Error) -> FormatError {
    FormatError::MalformedLine { line: e.line(), reason: e.to_string() }
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| WorkbenchError::format(path, json_error(e)))
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, formats::to_json(value).as_bytes())
}

pub fn load_index(path: &Path) -> Result<ConceptIndex> {
    load_json(path)
}

pub fn load_tokens(path: &Path) -> Result<(Meta, Vec<TokenEmbeddingRecord>)> {
    let text = read_to_string(path)?;
    formats::parse_token_embeddings(&text).map_err(|e| WorkbenchError::format(path, e))
}

pub fn load_store(path: &Path) -> Result<VectorStore> {
    let text = read_to_string(path)?;
    formats::parse_store(&text).map_err(|e| WorkbenchError::format(path, e))
}

pub fn load_projection(path: &Path) -> Result<Vec<ProjectionRow>> {
    let text = read_to_string(path)?;
    formats::parse_projection_csv(&text).map_err(|e| WorkbenchError::format(path, e))
}

/// Loads a session file and checks its derived state against its event log.
pub fn load_session(path: &Path) -> Result<AnnotationSession> {
    let session: AnnotationSession = load_json(path)?;
    session.verify()?;
    Ok(session)
}

/// Warnings for session content hashes that differ from the given digests.
pub fn session_ref_warnings(session: &AnnotationSession, corpus: Option<&str>, store: Option<&str>) -> Vec<String> {
    let mut out = Vec::new();
    for (what, recorded, actual) in [("corpus", &session.corpus_ref, corpus), ("store", &session.store_ref, store)] {
        if let Some(actual) = actual {
            if !recorded.is_empty() && recorded != actual {
                out.push(format!("session was built against {what} {recorded}, current {what} is {actual}"));
            }
        }
    }
    out
}
