//! Chat-completions client against a minimal local HTTP server.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::thread;

use plancheck::harvest::{GenRequest, GeneratorClient, HttpGenerator};

/// One-shot HTTP/1.1 responder: accepts `count` connections, captures each
/// request head+body, and answers with the canned JSON body.
fn serve(count: usize, body: &'static str) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = thread::spawn(move || {
        let mut captured = Vec::new();
        for _ in 0..count {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut read = 0;
            // Read until the end of the JSON body (headers declare the
            // length; this toy server just reads until the braces close).
            loop {
                let n = stream.read(&mut buf[read..]).unwrap();
                read += n;
                let text = String::from_utf8_lossy(&buf[..read]);
                if let Some(body_start) = text.find("\r\n\r\n") {
                    let header = &text[..body_start];
                    let length: usize = header
                        .lines()
                        .find_map(|l| l.strip_prefix("content-length: "))
                        .or_else(|| {
                            header.lines().find_map(|l| l.strip_prefix("Content-Length: "))
                        })
                        .and_then(|v| v.trim().parse().ok())
                        .unwrap_or(0);
                    if text[body_start + 4..].len() >= length {
                        break;
                    }
                }
                if n == 0 {
                    break;
                }
            }
            captured.push(String::from_utf8_lossy(&buf[..read]).to_string());
            let response = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
        captured
    });
    (format!("http://{addr}"), handle)
}

#[test]
fn http_generator_roundtrips_a_chat_completion() {
    let body = r#"{"choices":[{"message":{"role":"assistant","content":"def plan_0():\n    pass\n"}}]}"#;
    let (url, server) = serve(1, body);
    let client = HttpGenerator::new(&url, "test-model").with_retries(0);
    let request = GenRequest {
        system: "api description".into(),
        user: "go straight".into(),
        seed: 7,
        temperature: 0.5,
    };
    let plan = client.generate(&request).unwrap();
    assert_eq!(plan, "def plan_0():\n    pass\n");

    let captured = server.join().unwrap();
    let req = &captured[0];
    assert!(req.starts_with("POST /chat/completions"));
    let body_start = req.find("\r\n\r\n").unwrap() + 4;
    let sent: serde_json::Value = serde_json::from_str(&req[body_start..]).unwrap();
    assert_eq!(sent["model"], "test-model");
    assert_eq!(sent["messages"][0]["role"], "system");
    assert_eq!(sent["messages"][1]["content"], "go straight");
    assert_eq!(sent["seed"], 7);
}

#[test]
fn http_generator_rejects_malformed_responses() {
    let (url, server) = serve(1, r#"{"unexpected": true}"#);
    let client = HttpGenerator::new(&url, "test-model").with_retries(0);
    let request = GenRequest {
        system: "api".into(),
        user: "task".into(),
        seed: 0,
        temperature: 0.0,
    };
    let err = client.generate(&request).unwrap_err();
    assert!(err.to_string().contains("choices"));
    server.join().unwrap();
}
