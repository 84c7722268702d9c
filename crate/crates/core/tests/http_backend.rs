//! The HTTP backend against a loopback server.

use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde_json::Value;
use slider_core::engine::{
    derender_pipeline, Backend, BackendError, BackendRequest, HttpBackend, PipelineOptions, RetryPolicy, Retrying,
    StartContext,
};
use slider_core::raster::Raster;

const ANSWER: &str = r#"<svg xmlns="http://www.w3.org/2000/svg" width="64" height="32">
  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="background.png" />
  <g id="images">
    <image x="10.0%" y="20.0%" width="30.0%" height="40.0%" href="image_1.png" />
  </g>
  <g id="text"></g>
</svg>"#;

struct Seen {
    body: Vec<u8>,
    auth: Option<String>,
}

/// Serves `replies` (status, body) in order and reports each request.
fn serve(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Seen>) {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}/generate", server.server_addr().to_ip().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in replies {
            let mut req = match server.recv_timeout(Duration::from_secs(10)) {
                Ok(Some(r)) => r,
                _ => return,
            };
            let mut seen = Vec::new();
            req.as_reader().read_to_end(&mut seen).unwrap();
            let auth = req
                .headers()
                .iter()
                .find(|h| h.field.equiv("Authorization"))
                .map(|h| h.value.to_string());
            tx.send(Seen { body: seen, auth }).unwrap();
            req.respond(tiny_http::Response::from_string(body).with_status_code(status)).unwrap();
        }
    });
    (url, rx)
}

fn request() -> BackendRequest {
    let mut req = BackendRequest::new("look at <image> please".into(), vec![137, 80, 78, 71, 1, 2, 3]);
    req.max_tokens = 99;
    req.temperature = 0.5;
    req
}

fn fast(max_attempts: u32) -> RetryPolicy {
    RetryPolicy {
        max_attempts,
        base_delay: Duration::from_millis(1),
    }
}

fn ok_body() -> String {
    serde_json::json!({ "svg_text": ANSWER }).to_string()
}

#[test]
fn wire_contract_and_auth_header() {
    let (url, rx) = serve(vec![(200, ok_body())]);
    let backend = HttpBackend::new("m1", &url, Some("sekrit".into()), "model-x", Duration::from_secs(10));
    assert_eq!(backend.generate(&request()).unwrap(), ANSWER);

    let seen = rx.recv().unwrap();
    assert_eq!(seen.auth.as_deref(), Some("Bearer sekrit"));
    let body: Value = serde_json::from_slice(&seen.body).unwrap();
    assert_eq!(body["model"], "model-x");
    assert_eq!(body["prompt"], "look at <image> please");
    assert_eq!(body["image_b64"], "iVBORwECAw==");
    assert_eq!(body["image_mime"], "image/png");
    assert_eq!(body["max_tokens"], 99);
    assert_eq!(body["temperature"], 0.5);
}

#[test]
fn server_errors_are_retried_with_identical_bytes() {
    let (url, rx) = serve(vec![(503, "busy".into()), (500, "{\"error\":\"oops\"}".into()), (200, ok_body())]);
    let backend = Retrying::new(HttpBackend::new("m", &url, None, "m", Duration::from_secs(10)), fast(3));
    assert_eq!(backend.generate(&request()).unwrap(), ANSWER);
    let bodies: Vec<Vec<u8>> = rx.iter().take(3).map(|s| s.body).collect();
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    assert!(rx.recv_timeout(Duration::from_millis(50)).is_err());
}

#[test]
fn client_and_remote_errors_are_final() {
    let (url, rx) = serve(vec![(400, "{\"error\":\"bad image\"}".into()), (200, ok_body())]);
    let backend = Retrying::new(HttpBackend::new("m", &url, None, "m", Duration::from_secs(10)), fast(3));
    assert_eq!(backend.generate(&request()), Err(BackendError::Status(400, "bad image".into())));
    assert_eq!(rx.iter().take(1).count(), 1);
    assert!(rx.recv_timeout(Duration::from_millis(50)).is_err());

    let (url, _rx) = serve(vec![(200, "{\"error\":\"refused\"}".into())]);
    let backend = Retrying::new(HttpBackend::new("m", &url, None, "m", Duration::from_secs(10)), fast(3));
    assert_eq!(backend.generate(&request()), Err(BackendError::Remote("refused".into())));
}

#[test]
fn unreachable_server_gives_up_after_attempts() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let url = format!("http://127.0.0.1:{port}/generate");
    let backend = Retrying::new(HttpBackend::new("m", &url, None, "m", Duration::from_secs(2)), fast(2));
    assert!(matches!(backend.generate(&request()), Err(BackendError::Transport(_))));
}

#[test]
fn pipeline_over_http() {
    let fenced = serde_json::json!({ "svg_text": format!("Sure:\n```svg\n{ANSWER}\n```") }).to_string();
    let (url, rx) = serve(vec![(200, fenced), (200, ok_body())]);
    let backend = HttpBackend::new("m", &url, None, "m", Duration::from_secs(10));
    let raster = Raster::filled(64, 32, [10, 20, 30]);
    let start = StartContext::Skeleton { n_images: 1, n_texts: 0 };
    let run = derender_pipeline(
        &raster,
        &start,
        &backend,
        &PipelineOptions {
            refine_steps: 1,
            ..PipelineOptions::default()
        },
    )
    .unwrap();
    assert_eq!(run.passes.len(), 2);
    assert!(!run.passes[0].repairs_applied.is_empty());
    assert!(run.passes[1].repairs_applied.is_empty());
    assert_eq!(run.final_result().doc.images.len(), 1);

    let prompts: Vec<String> = rx
        .iter()
        .take(2)
        .map(|s| serde_json::from_slice::<Value>(&s.body).unwrap()["prompt"].as_str().unwrap().to_string())
        .collect();
    assert!(prompts[0].contains("UNKNOWN"));
    assert!(prompts[1].contains("10.0%"), "refinement prompt carries the prior");
}
