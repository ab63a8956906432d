//! Minimal scorer plugin used to exercise the scorer protocol in tests.

use std::io::{BufRead, Write};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Every score is `--value`.
    Echo,
    /// Score from the text the variant allows: 1 / (1 + characters).
    Length,
    /// Replies with a score outside [0, 1].
    OutOfRange,
    /// Echoes the wrong id.
    WrongId,
    /// Answers requests with a line that is not JSON.
    Garbage,
    /// Completes the handshake, then never answers.
    Hang,
    /// Exits right after the handshake.
    Crash,
}

#[derive(Parser)]
struct Args {
    #[arg(long, value_enum, default_value = "echo")]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    value: f64,
    /// Protocol version this plugin speaks.
    #[arg(long, default_value_t = 1)]
    protocol_version: u64,
}

fn send(out: &mut impl Write, v: Value) {
    writeln!(out, "{v}").and_then(|_| out.flush()).expect("stdout open");
}

fn main() -> ExitCode {
    let args = Args::parse();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut out = std::io::stdout().lock();

    let Some(Ok(hello)) = lines.next() else {
        return ExitCode::FAILURE;
    };
    let hello: Value = serde_json::from_str(&hello).unwrap_or(Value::Null);
    let variant = hello["variant"].as_str().unwrap_or("").to_string();
    if hello["proto"] != "evidencer-scorer" || hello["version"].as_u64() != Some(args.protocol_version) {
        send(&mut out, json!({"ok": false, "error": format!("unsupported protocol {hello}")}));
        return ExitCode::from(3);
    }
    if !["S+M", "MaskS+M", "MaskS"].contains(&variant.as_str()) {
        send(&mut out, json!({"ok": false, "error": format!("unknown variant {variant}")}));
        return ExitCode::from(3);
    }
    send(&mut out, json!({"ok": true, "name": "fixture"}));
    if args.mode == Mode::Crash {
        return ExitCode::from(4);
    }

    for line in lines {
        let Ok(line) = line else { break };
        let req: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                send(&mut out, json!({"id": "", "error": format!("malformed request: {e}")}));
                continue;
            }
        };
        let id = req["id"].as_str().unwrap_or("").to_string();
        let text = |k: &str| req[k].as_str().unwrap_or("").chars().count();
        match args.mode {
            Mode::Echo => send(&mut out, json!({"id": id, "score": args.value})),
            Mode::Length => {
                let n = match variant.as_str() {
                    "S+M" => text("sentence") + text("motion"),
                    "MaskS+M" => text("masked") + text("motion"),
                    _ => text("masked"),
                };
                send(&mut out, json!({"id": id, "score": 1.0 / (1.0 + n as f64)}));
            }
            Mode::OutOfRange => send(&mut out, json!({"id": id, "score": 1.5})),
            Mode::WrongId => send(&mut out, json!({"id": format!("{id}-x"), "score": 0.5})),
            Mode::Garbage => {
                writeln!(out, "not json").unwrap();
                out.flush().unwrap();
            }
            Mode::Hang => {}
            Mode::Crash => unreachable!(),
        }
    }
    ExitCode::SUCCESS
}
