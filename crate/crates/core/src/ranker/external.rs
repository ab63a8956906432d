//! Out-of-process scorers speaking JSON lines over stdin/stdout.
//!
//! ```text
//! engine → {"proto":"evidencer-scorer","version":1,"variant":"S+M"}
//! plugin → {"ok":true,"name":"<scorer name>"}
//! engine → {"id":"<string>","motion":"<text>","sentence":"<text>","masked":"<text>"}   (per request)
//! plugin → {"id":"<same id>","score":<float in [0,1]>}                                (same order)
//! ```
//!
//! The engine closes the plugin's stdin to shut it down.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{RankError, Scorer, ScoringRequest};

pub const PROTOCOL_NAME: &str = "evidencer-scorer";
pub const PROTOCOL_VERSION: u32 = 1;

/// Which texts the model consumes. Requests always carry every field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputVariant {
    #[serde(rename = "S+M")]
    SentenceMotion,
    #[serde(rename = "MaskS+M")]
    MaskedSentenceMotion,
    #[serde(rename = "MaskS")]
    MaskedSentence,
}

impl InputVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            InputVariant::SentenceMotion => "S+M",
            InputVariant::MaskedSentenceMotion => "MaskS+M",
            InputVariant::MaskedSentence => "MaskS",
        }
    }
}

impl fmt::Display for InputVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InputVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S+M" => Ok(InputVariant::SentenceMotion),
            "MaskS+M" => Ok(InputVariant::MaskedSentenceMotion),
            "MaskS" => Ok(InputVariant::MaskedSentence),
            _ => Err(format!("unknown input variant `{s}` (expected S+M, MaskS+M or MaskS)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub variant: InputVariant,
    /// Per-line read timeout.
    pub timeout: Duration,
}

#[derive(Serialize)]
struct Handshake<'a> {
    proto: &'a str,
    version: u32,
    variant: InputVariant,
}

#[derive(Deserialize)]
struct HandshakeReply {
    ok: bool,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Serialize)]
struct Request<'a> {
    id: &'a str,
    motion: &'a str,
    sentence: &'a str,
    masked: &'a str,
}

#[derive(Deserialize)]
struct Response {
    id: String,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    error: Option<String>,
}

pub struct ExternalScorer {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    name: String,
    timeout: Duration,
}

impl ExternalScorer {
    /// Starts the plugin and completes the handshake.
    pub fn spawn(spec: &ExternalSpec) -> Result<Self, RankError> {
        let (program, args) = spec
            .command
            .split_first()
            .ok_or_else(|| RankError::Protocol { id: None, message: "empty scorer command".into() })?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| RankError::Spawn { command: spec.command.join(" "), source })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");

        // Reading on a separate thread keeps the plugin's stdout drained
        // while requests are still being written.
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });

        let mut scorer = Self { child, stdin, lines: rx, name: String::new(), timeout: spec.timeout };
        let hello = serde_json::to_string(&Handshake { proto: PROTOCOL_NAME, version: PROTOCOL_VERSION, variant: spec.variant })
            .expect("handshake serializes");
        scorer.send_line(&hello)?;
        let reply = scorer.read_line(None)?;
        let reply: HandshakeReply = serde_json::from_str(&reply)
            .map_err(|e| RankError::Protocol { id: None, message: format!("bad handshake reply: {e}") })?;
        if !reply.ok {
            return Err(RankError::Protocol {
                id: None,
                message: format!("plugin refused handshake: {}", reply.error.unwrap_or_default()),
            });
        }
        scorer.name = reply.name.unwrap_or_else(|| "external".into());
        Ok(scorer)
    }

    fn send_line(&mut self, line: &str) -> Result<(), RankError> {
        let stdin = self.stdin.as_mut().ok_or_else(|| RankError::Protocol { id: None, message: "scorer closed".into() })?;
        stdin.write_all(line.as_bytes())?;
        stdin.write_all(b"\n")?;
        Ok(())
    }

    fn read_line(&mut self, id: Option<&str>) -> Result<String, RankError> {
        if let Some(stdin) = self.stdin.as_mut() {
            stdin.flush()?;
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(line) => Ok(line?),
            Err(RecvTimeoutError::Timeout) => Err(RankError::Timeout { id: id.map(String::from) }),
            Err(RecvTimeoutError::Disconnected) => Err(RankError::Protocol {
                id: id.map(String::from),
                message: "scorer closed its output".into(),
            }),
        }
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score_batch(&mut self, batch: &[ScoringRequest]) -> Result<Vec<f64>, RankError> {
        for r in batch {
            let line = serde_json::to_string(&Request {
                id: &r.id,
                motion: &r.motion_text,
                sentence: &r.sentence,
                masked: &r.masked,
            })
            .expect("request serializes");
            self.send_line(&line)?;
        }
        let mut scores = Vec::with_capacity(batch.len());
        for r in batch {
            let line = self.read_line(Some(&r.id))?;
            let resp: Response = serde_json::from_str(&line).map_err(|e| RankError::Protocol {
                id: Some(r.id.clone()),
                message: format!("bad response line: {e}"),
            })?;
            if resp.id != r.id {
                return Err(RankError::Protocol {
                    id: Some(r.id.clone()),
                    message: format!("response id `{}` out of order", resp.id),
                });
            }
            if let Some(err) = resp.error {
                return Err(RankError::Protocol { id: Some(r.id.clone()), message: err });
            }
            let score = resp
                .score
                .ok_or_else(|| RankError::Protocol { id: Some(r.id.clone()), message: "missing score".into() })?;
            if !score.is_finite() || !(0.0..=1.0).contains(&score) {
                return Err(RankError::InvalidScore { id: r.id.clone(), score });
            }
            scores.push(score);
        }
        Ok(scores)
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let deadline = Instant::now() + self.timeout;
        loop {
            match self.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    return;
                }
            }
        }
    }
}
