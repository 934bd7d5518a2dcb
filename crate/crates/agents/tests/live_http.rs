//! Live backend against local stub servers.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use hyperaudit_agents::live::{LiveBackend, LiveEndpoint};
use hyperaudit_agents::{AgentError, ChatBackend, ChatMessage, Role, Transcript};

fn endpoint(port: u16, timeout: f64, attempts: u32) -> LiveEndpoint {
    LiveEndpoint {
        base_url: format!("http://127.0.0.1:{port}/v1"),
        api_key: "test-key".into(),
        model: "stub-model".into(),
        timeout: Duration::from_secs_f64(timeout),
        max_attempts: attempts,
    }
}

/// Reads one HTTP request; returns the request line and the body.
fn read_request(stream: &mut TcpStream) -> (String, String) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut first = String::new();
    reader.read_line(&mut first).unwrap();
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        if line.trim().is_empty() {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    (first, String::from_utf8(body).unwrap())
}

fn respond(stream: &mut TcpStream, status: &str, body: &str) {
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
}

/// Serves `replies` in order, one connection each; returns the port and
/// the captured request bodies.
fn stub(replies: Vec<(&'static str, String)>) -> (u16, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let handle = thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in replies {
            let (mut s, _) = listener.accept().unwrap();
            let (line, req) = read_request(&mut s);
            assert!(line.starts_with("POST /v1/chat/completions"), "{line}");
            bodies.push(req);
            respond(&mut s, status, &body);
        }
        bodies
    });
    (port, handle)
}

fn completion(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

#[test]
fn chat_completion_roundtrip() {
    let (port, server) = stub(vec![("200 OK", completion("hello"))]);
    let mut b = LiveBackend::new(endpoint(port, 5.0, 1), Role::Creator);
    let mut t = Transcript::default();
    let reply = t.call(&mut b, 0, &[ChatMessage::system("s"), ChatMessage::user("ping")]).unwrap();
    assert_eq!(reply, "hello");
    assert_eq!(t.len(), 1);
    assert_eq!(t.records[0].request.as_deref(), Some("ping"));
    let bodies = server.join().unwrap();
    let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(sent["model"], "stub-model");
    assert_eq!(sent["messages"][1]["content"], "ping");
}

#[test]
fn server_errors_are_retried() {
    let (port, server) = stub(vec![
        ("503 Service Unavailable", "{}".into()),
        ("200 OK", completion("second")),
    ]);
    let mut b = LiveBackend::new(endpoint(port, 5.0, 3), Role::Inspector);
    assert_eq!(b.complete(&[ChatMessage::user("x")]).unwrap(), "second");
    assert_eq!(server.join().unwrap().len(), 2);
}

#[test]
fn unauthorized_is_auth_failure_without_retry() {
    let (port, server) = stub(vec![("401 Unauthorized", r#"{"error":"bad key"}"#.into())]);
    let mut b = LiveBackend::new(endpoint(port, 5.0, 3), Role::Creator);
    assert!(matches!(b.complete(&[ChatMessage::user("x")]), Err(AgentError::AuthFailure(_))));
    assert_eq!(server.join().unwrap().len(), 1);
}

#[test]
fn refused_connection_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut b = LiveBackend::new(endpoint(port, 2.0, 2), Role::Creator);
    let mut t = Transcript::default();
    let err = t.call(&mut b, 0, &[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, AgentError::BackendUnavailable(_)), "{err}");
    assert_eq!(t.len(), 1);
}

/// Accepts connections and never answers.
fn silent_server() -> (u16, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let accepted = Arc::new(AtomicUsize::new(0));
    let count = accepted.clone();
    thread::spawn(move || {
        let mut held = Vec::new();
        for s in listener.incoming() {
            count.fetch_add(1, Ordering::SeqCst);
            held.push(s);
        }
    });
    (port, accepted)
}

#[test]
fn timeout_is_honored() {
    let (port, _) = silent_server();
    let mut b = LiveBackend::new(endpoint(port, 1.5, 1), Role::Creator);
    let start = Instant::now();
    let err = b.complete(&[ChatMessage::user("x")]).unwrap_err();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(matches!(err, AgentError::BackendUnavailable(_)), "{err}");
    assert!((elapsed - 1.5).abs() <= 1.0, "elapsed {elapsed}");
}

#[test]
fn total_blocking_is_bounded_by_timeout_times_attempts() {
    let (port, accepted) = silent_server();
    let mut b = LiveBackend::new(endpoint(port, 1.0, 2), Role::Creator);
    let start = Instant::now();
    assert!(b.complete(&[ChatMessage::user("x")]).is_err());
    let elapsed = start.elapsed().as_secs_f64();
    assert!((elapsed - 2.0).abs() <= 1.0, "elapsed {elapsed}");
    assert_eq!(accepted.load(Ordering::SeqCst), 2);
}
