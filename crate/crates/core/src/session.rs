//! Annotation session: which terms a human grouped together and what each
//! group was called.
//!
//! State is derived from an append-only event log. Every mutating call
//! validates first, then appends exactly one event and bumps `version`, so a
//! failed call leaves the session untouched and replaying the log from an
//! empty session reproduces the groups and labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown term id {0:?}")]
    UnknownTerm(String),
    #[error("unknown group {0:?}")]
    UnknownGroup(String),
    #[error("group id must be non-empty")]
    EmptyGroupId,
    #[error("event {seq} out of order (expected {expected})")]
    OutOfOrder { seq: u64, expected: u64 },
}

/// Set of term ids a session may reference.
pub trait TermCatalog {
    fn contains_term(&self, term_id: &str) -> bool;
}

impl TermCatalog for BTreeSet<String> {
    fn contains_term(&self, term_id: &str) -> bool {
        self.contains(term_id)
    }
}

impl<F: Fn(&str) -> bool> TermCatalog for F {
    fn contains_term(&self, term_id: &str) -> bool {
        self(term_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "payload", rename_all = "snake_case")]
pub enum SessionAction {
    AssignTerms { group_id: String, term_ids: Vec<String> },
    SetLabel { group_id: String, label: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Version reached by applying this event (1-based).
    pub seq: u64,
    /// Milliseconds since the Unix epoch, supplied by the caller.
    pub timestamp: u64,
    pub actor: String,
    #[serde(flatten)]
    pub action: SessionAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSession {
    pub session_id: String,
    /// Hex digest of the corpus file the session was built against.
    pub corpus_ref: String,
    /// Hex digest of the vector store file.
    pub store_ref: String,
    pub groups: BTreeMap<String, BTreeSet<String>>,
    pub labels: BTreeMap<String, String>,
    pub events: Vec<SessionEvent>,
    pub version: u64,
}

impl AnnotationSession {
    pub fn new(session_id: impl Into<String>, corpus_ref: impl Into<String>, store_ref: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            corpus_ref: corpus_ref.into(),
            store_ref: store_ref.into(),
            groups: BTreeMap::new(),
            labels: BTreeMap::new(),
            events: Vec::new(),
            version: 0,
        }
    }

    /// Moves `term_ids` into `group_id`, creating the group if needed and
    /// removing the terms from any other group.
    pub fn assign_terms(
        &mut self,
        catalog: &impl TermCatalog,
        group_id: &str,
        term_ids: &[String],
        actor: &str,
        timestamp: u64,
    ) -> Result<u64, SessionError> {
        if group_id.is_empty() {
            return Err(SessionError::EmptyGroupId);
        }
        if let Some(bad) = term_ids.iter().find(|t| !catalog.contains_term(t)) {
            return Err(SessionError::UnknownTerm(bad.clone()));
        }
        let unique: BTreeSet<&String> = term_ids.iter().collect();
        let action =
            SessionAction::AssignTerms { group_id: group_id.into(), term_ids: unique.into_iter().cloned().collect() };
        Ok(self.record(action, actor, timestamp))
    }

    pub fn set_label(&mut self, group_id: &str, label: &str, actor: &str, timestamp: u64) -> Result<u64, SessionError> {
        if !self.groups.contains_key(group_id) {
            return Err(SessionError::UnknownGroup(group_id.into()));
        }
        let action = SessionAction::SetLabel { group_id: group_id.into(), label: label.into() };
        Ok(self.record(action, actor, timestamp))
    }

    fn record(&mut self, action: SessionAction, actor: &str, timestamp: u64) -> u64 {
        let event = SessionEvent { seq: self.version + 1, timestamp, actor: actor.into(), action };
        self.apply(&event);
        self.events.push(event);
        self.version
    }

    fn apply(&mut self, event: &SessionEvent) {
        match &event.action {
            SessionAction::AssignTerms { group_id, term_ids } => {
                for members in self.groups.values_mut() {
                    for t in term_ids {
                        members.remove(t);
                    }
                }
                self.groups.entry(group_id.clone()).or_default().extend(term_ids.iter().cloned());
            }
            SessionAction::SetLabel { group_id, label } => {
                self.labels.insert(group_id.clone(), label.clone());
            }
        }
        self.version = event.seq;
    }

    /// Rebuilds derived state from the header fields and an event log.
    pub fn replay(
        session_id: impl Into<String>,
        corpus_ref: impl Into<String>,
        store_ref: impl Into<String>,
        events: &[SessionEvent],
    ) -> Result<Self, SessionError> {
        let mut s = Self::new(session_id, corpus_ref, store_ref);
        for e in events {
            if e.seq != s.version + 1 {
                return Err(SessionError::OutOfOrder { seq: e.seq, expected: s.version + 1 });
            }
            if let SessionAction::SetLabel { group_id, .. } = &e.action {
                if !s.groups.contains_key(group_id) {
                    return Err(SessionError::UnknownGroup(group_id.clone()));
                }
            }
            s.apply(e);
            s.events.push(e.clone());
        }
        Ok(s)
    }

    /// Checks the derived state against a replay of the log.
    pub fn verify(&self) -> Result<(), SessionError> {
        let r = Self::replay(self.session_id.clone(), self.corpus_ref.clone(), self.store_ref.clone(), &self.events)?;
        if r.groups != self.groups || r.labels != self.labels || r.version != self.version {
            return Err(SessionError::OutOfOrder { seq: self.version, expected: r.version });
        }
        Ok(())
    }

    pub fn group_of(&self, term_id: &str) -> Option<&str> {
        self.groups.iter().find(|(_, m)| m.contains(term_id)).map(|(g, _)| g.as_str())
    }
}
