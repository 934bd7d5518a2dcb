//! Conversation log of a run.
//!
//! Every backend call and every tool dispatch appends one record.
//! Timestamps are logical sequence numbers so that mock runs are
//! reproducible byte for byte.

use serde::{Deserialize, Serialize};

use crate::backend::{ChatBackend, ChatMessage, Role};
use crate::AgentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// One chat completion; `request` is the newest message sent.
    Call,
    /// A failed chat completion.
    Error,
    /// A validator dispatched on behalf of the Inspector.
    Tool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub role: Role,
    pub round: usize,
    pub kind: RecordKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<String>,
    pub content: String,
    pub timestamp: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn push(&mut self, role: Role, round: usize, kind: RecordKind, request: Option<String>, content: String) {
        let timestamp = self.records.len() as u64;
        self.records.push(TranscriptRecord {
            role,
            round,
            kind,
            request,
            content,
            timestamp,
        });
    }

    /// Calls the backend and logs the exchange, failures included.
    pub fn call(
        &mut self,
        backend: &mut dyn ChatBackend,
        round: usize,
        messages: &[ChatMessage],
    ) -> Result<String, AgentError> {
        let request = messages.last().map(|m| m.content.clone());
        let reply = backend.complete(messages);
        match &reply {
            Ok(text) => self.push(backend.role(), round, RecordKind::Call, request, text.clone()),
            Err(e) => self.push(backend.role(), round, RecordKind::Error, request, e.to_string()),
        }
        reply
    }

    pub fn tool_event(&mut self, round: usize, request: String, result: String) {
        self.push(Role::Inspector, round, RecordKind::Tool, Some(request), result);
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("record serializes"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Self, String> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;

    impl ChatBackend for Echo {
        fn id(&self) -> String {
            "echo".into()
        }
        fn role(&self) -> Role {
            Role::Creator
        }
        fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, AgentError> {
            Ok(messages.last().unwrap().content.to_uppercase())
        }
    }

    #[test]
    fn one_record_per_call() {
        let mut t = Transcript::default();
        let mut b = Echo;
        for k in 0..3 {
            let reply = t.call(&mut b, 0, &[ChatMessage::user(format!("m{k}"))]).unwrap();
            assert_eq!(reply, format!("M{k}"));
            assert_eq!(t.len(), k + 1);
        }
        t.tool_event(1, "growth".into(), "{}".into());
        assert_eq!(t.records[3].timestamp, 3);
        assert_eq!(Transcript::from_jsonl(&t.to_jsonl()).unwrap(), t);
    }
}
