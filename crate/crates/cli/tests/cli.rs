use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

const DESK6: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/desk6");

fn adsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsk"))
        .args(args)
        .env_remove("ADSK_CONFIG")
        .output()
        .expect("run adsk")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn desk6_snapshot(dir: &Path) -> PathBuf {
    let out = dir.join("desk6.json");
    let r = adsk(&[
        "build",
        "--records",
        &format!("{DESK6}/records.jsonl"),
        "--readership",
        &format!("{DESK6}/readership.jsonl"),
        "--synonyms",
        &format!("{DESK6}/synonyms.txt"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", text(&r.stderr));
    assert_eq!(text(&r.stdout).trim(), "indexed 6 records");
    out
}

#[test]
fn build_reports_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    desk6_snapshot(dir.path());

    let missing = adsk(&[
        "build",
        "--records",
        "/nonexistent/r.jsonl",
        "--out",
        "/tmp/x.json",
    ]);
    assert_eq!(missing.status.code(), Some(1));

    let dup = dir.path().join("dup.jsonl");
    std::fs::write(
        &dup,
        "{\"bibcode\":\"A\",\"authors\":[\"X, Y\"],\"year\":2000}\n\n{\"bibcode\":\"A\",\"authors\":[\"X, Y\"],\"year\":2001}\n",
    )
    .unwrap();
    let out = dir.path().join("dup.json");
    let r = adsk(&[
        "build",
        "--records",
        dup.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(text(&r.stderr).contains("line 3"), "{}", text(&r.stderr));
    assert!(!out.exists());
}

#[test]
fn query_formats_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let snap = desk6_snapshot(dir.path());
    let snap = snap.to_str().unwrap();

    let r = adsk(&["query", "--index", snap, "author:einstein"]);
    assert_eq!(r.status.code(), Some(0));
    let out = text(&r.stdout);
    let bibs: Vec<&str> = out.lines().map(|l| l.split('\t').next().unwrap()).collect();
    let mut sorted = bibs.clone();
    sorted.sort();
    assert_eq!(sorted, ["B2", "B3"]);
    // repeat runs are byte-identical
    assert_eq!(
        adsk(&["query", "--index", snap, "author:einstein"]).stdout,
        r.stdout
    );

    let r = adsk(&[
        "query",
        "--index",
        snap,
        "citations(references(author:einstein))",
        "--format",
        "table",
    ]);
    let out = text(&r.stdout);
    assert!(out.starts_with("rank"));
    assert!(out.contains("4 of 4 shown"));

    let r = adsk(&[
        "query", "--index", snap, "lensing", "--rows", "2", "--format", "objects",
    ]);
    let lines: Vec<serde_json::Value> = text(&r.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["kind"], "text_bm25");

    let r = adsk(&["query", "--index", snap, "body:zzz"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(r.stdout.is_empty());

    let r = adsk(&["query", "--index", snap, "author:("]);
    assert_eq!(r.status.code(), Some(2));
    let err = text(&r.stderr);
    assert!(err.contains("author:(\n"), "{err}");
    assert!(err.contains(&format!("  {}^", " ".repeat(8))), "{err}");

    let r = adsk(&["query", "--index", "/nonexistent.json", "lensing"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn token_appends_fresh_entries() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("adsk.toml");
    std::fs::write(&config, "port = 9100\n").unwrap();
    let c = config.to_str().unwrap();
    let a = adsk(&["token", "--config", c, "--new", "bumblebee"]);
    assert_eq!(a.status.code(), Some(0));
    let b = adsk(&["token", "--config", c, "--new", "bumblebee"]);
    let (a, b) = (
        text(&a.stdout).trim().to_string(),
        text(&b.stdout).trim().to_string(),
    );
    assert!(a.len() >= 32);
    assert_ne!(a, b);
    let saved = std::fs::read_to_string(&config).unwrap();
    assert!(saved.contains(&a) && saved.contains(&b) && saved.contains("9100"));
    assert_eq!(saved.matches("bumblebee").count(), 2);

    let r = adsk(&[
        "token",
        "--config",
        "/nonexistent-dir/adsk.toml",
        "--new",
        "x",
    ]);
    assert_eq!(r.status.code(), Some(1));
    let r = adsk(&[
        "token",
        "--config",
        dir.path().to_str().unwrap(),
        "--new",
        "x",
    ]);
    assert_eq!(r.status.code(), Some(1));
}

fn http_get(port: u16, path: &str, token: &str) -> (u16, String) {
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    s.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    write!(
        s,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nAuthorization: Bearer {token}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let status = raw.split(' ').nth(1).unwrap().parse().unwrap();
    let body = raw
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    (status, body)
}

#[test]
fn serve_answers_and_logs() {
    let dir = tempfile::tempdir().unwrap();
    let snap = desk6_snapshot(dir.path());
    let config = dir.path().join("adsk.toml");
    std::fs::write(&config, "").unwrap();
    let token = text(&adsk(&["token", "--config", config.to_str().unwrap(), "--new", "ui"]).stdout)
        .trim()
        .to_string();

    let mut child = Command::new(env!("CARGO_BIN_EXE_adsk"))
        .args(["serve", "--index", snap.to_str().unwrap(), "--port", "0"])
        .env("ADSK_CONFIG", &config)
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    let port: u16 = loop {
        line.clear();
        assert!(
            stderr.read_line(&mut line).unwrap() > 0,
            "server exited early"
        );
        if let Some(addr) = line.trim().strip_prefix("listening on ") {
            break addr.rsplit(':').next().unwrap().parse().unwrap();
        }
    };

    let (status, body) = http_get(port, "/v1/search?q=author:einstein", &token);
    assert_eq!(status, 200, "{body}");
    assert!(body.contains("\"numFound\":2"));
    let (status, body) = http_get(port, "/v2/search?q=author:einstein", &token);
    assert_eq!(status, 404);
    assert!(body.contains("unknown_api_version"));
    let (status, _) = http_get(port, "/v1/record/B1", "wrong");
    assert_eq!(status, 401);

    // one log line per request with method, path, status, principal and millis
    let mut logs = Vec::new();
    while logs.len() < 3 {
        line.clear();
        if stderr.read_line(&mut line).unwrap() == 0 {
            break;
        }
        if line.contains("/v") {
            logs.push(line.clone());
        }
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(
        logs[0].contains("GET /v1/search 200 ui") && logs[0].trim_end().ends_with("ms"),
        "{logs:?}"
    );
    assert!(logs[1].contains("GET /v2/search 404 -"), "{logs:?}");
    assert!(logs[2].contains("GET /v1/record/B1 401 -"), "{logs:?}");
}

#[test]
fn serve_fails_on_occupied_port_or_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let snap = desk6_snapshot(dir.path());
    let config = dir.path().join("adsk.toml");
    std::fs::write(&config, "").unwrap();
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let r = adsk(&[
        "serve",
        "--index",
        snap.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--port",
        &port,
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(text(&r.stderr).contains("cannot bind"));

    std::fs::write(&config, "port = \"nope\"").unwrap();
    let r = adsk(&[
        "serve",
        "--index",
        snap.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn serve_can_index_the_configured_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("adsk.toml");
    std::fs::write(
        &config,
        format!(
            "[corpus]\nrecords = \"{DESK6}/records.jsonl\"\n\n[[tokens]]\ntoken = \"0123456789abcdef0123456789abcdef\"\nclient_name = \"t\"\n"
        ),
    )
    .unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_adsk"))
        .args(["serve", "--config", config.to_str().unwrap(), "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    let port: u16 = loop {
        line.clear();
        assert!(
            stderr.read_line(&mut line).unwrap() > 0,
            "server exited early"
        );
        if let Some(addr) = line.trim().strip_prefix("listening on ") {
            break addr.rsplit(':').next().unwrap().parse().unwrap();
        }
    };
    let (status, body) = http_get(port, "/v1/record/B2", "0123456789abcdef0123456789abcdef");
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(status, 200);
    assert!(body.contains("\"citation_count\":3"));
}
