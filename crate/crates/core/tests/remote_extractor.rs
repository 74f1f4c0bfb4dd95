use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use vigen_core::extraction::{ExtractError, Extractor, ExtractorConfig, Lexicon, RemoteExtractor};
use vigen_core::model::CanonicalName;

fn lexicon() -> Lexicon {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/pneumatic/lexicon.json");
    Lexicon::load(path).unwrap()
}

/// Serves one request with `reply` after `delay`, sending the request body back on the channel.
fn stub(reply: &'static str, delay: Duration) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/extract", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if line == "\r\n" || line.is_empty() {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        tx.send(String::from_utf8(body).unwrap()).unwrap();
        thread::sleep(delay);
        let mut stream = stream;
        let _ = write!(
            stream,
            "HTTP/1.1 200 OK\r\ncontent-type: text/plain\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
            reply.len()
        );
    });
    (url, rx)
}

fn remote(url: &str, timeout: Duration) -> RemoteExtractor {
    RemoteExtractor::new(&ExtractorConfig::remote(url, timeout), lexicon()).unwrap()
}

#[test]
fn stub_answer_is_parsed_and_resolved() {
    let (url, rx) = stub("small screws, base, 1", Duration::ZERO);
    let r = remote(&url, Duration::from_secs(5)).extract("Fasten the base onto the screws.").unwrap();
    assert_eq!(r.predecessor(), &CanonicalName::parse("small_screw").unwrap());
    assert_eq!(r.successor(), &CanonicalName::parse("base").unwrap());
    assert_eq!(r.count(), 1);
    let sent: serde_json::Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
    assert_eq!(sent["input"], "Fasten the base onto the screws.");
    assert_eq!(sent["instruction"], "List all the components mentioned in the procedural step.");
}

#[test]
fn garbage_answer_reports_arity_and_raw_text() {
    let (url, _rx) = stub("I think you should use the base", Duration::ZERO);
    let err = remote(&url, Duration::from_secs(5)).extract("anything").unwrap_err();
    assert_eq!(err.kind(), "WrongArity");
    match err {
        ExtractError::BadResponse { raw, source } => {
            assert_eq!(raw, "I think you should use the base");
            assert_eq!(*source, ExtractError::WrongArity(1));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_name_in_answer() {
    let (url, _rx) = stub("widget, base, 1", Duration::ZERO);
    let err = remote(&url, Duration::from_secs(5)).extract("anything").unwrap_err();
    assert_eq!(err.root(), &ExtractError::UnknownComponent("widget".into()));
}

#[test]
fn unreachable_endpoint_is_transport_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let err = remote(&format!("http://127.0.0.1:{port}/x"), Duration::from_secs(5)).extract("x").unwrap_err();
    assert_eq!(err.kind(), "TransportError");
}

#[test]
fn slow_endpoint_times_out() {
    let (url, _rx) = stub("small screws, base, 1", Duration::from_secs(3));
    let err = remote(&url, Duration::from_millis(300)).extract("x").unwrap_err();
    assert_eq!(err, ExtractError::Timeout);
}
